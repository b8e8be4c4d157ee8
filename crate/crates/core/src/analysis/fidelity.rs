use serde::{Deserialize, Serialize};

use crate::circuit::Role;
use crate::error::{Error, Result};
use crate::state::Counts;

/// `√(f(1−f)/shots)`.
pub fn binomial_stderr(f: f64, shots: u64) -> f64 {
    if shots == 0 {
        return 0.0;
    }
    (f * (1.0 - f) / shots as f64).max(0.0).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    /// Fraction of shots whose non-ancilla bits equal `q_prime`.
    pub f1: f64,
    /// Fraction that also have every ancilla equal to `a_prime`.
    pub f2: f64,
    pub shots: u64,
    pub q_prime: String,
    pub a_prime: String,
}

impl FidelityReport {
    pub fn f1_stderr(&self) -> f64 {
        binomial_stderr(self.f1, self.shots)
    }

    pub fn f2_stderr(&self) -> f64 {
        binomial_stderr(self.f2, self.shots)
    }
}

/// Scores `counts` against desired non-ancilla bits `q_prime` and ancilla
/// bits `a_prime`, both in wire order.
pub fn fidelity(counts: &Counts, roles: &[Role], q_prime: &str, a_prime: &str) -> Result<FidelityReport> {
    let n_anc = roles.iter().filter(|r| r.is_ancilla()).count();
    let n_comp = roles.len() - n_anc;
    if q_prime.len() != n_comp || a_prime.len() != n_anc {
        return Err(Error::InvalidLabel(format!(
            "targets {q_prime:?}/{a_prime:?} do not match {n_comp} computational and {n_anc} ancilla wires"
        )));
    }
    let (q, a) = (q_prime.as_bytes(), a_prime.as_bytes());
    let (mut shots, mut hit1, mut hit2) = (0u64, 0u64, 0u64);
    for (label, &count) in counts {
        if label.len() != roles.len() {
            return Err(Error::InvalidLabel(format!(
                "count key {label:?} has {} bits for {} wires",
                label.len(),
                roles.len()
            )));
        }
        shots += count;
        let (mut qi, mut ai) = (0, 0);
        let (mut comp_ok, mut anc_ok) = (true, true);
        for (bit, role) in label.bytes().zip(roles) {
            if role.is_ancilla() {
                anc_ok &= bit == a[ai];
                ai += 1;
            } else {
                comp_ok &= bit == q[qi];
                qi += 1;
            }
        }
        if comp_ok {
            hit1 += count;
            if anc_ok {
                hit2 += count;
            }
        }
    }
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    Ok(FidelityReport {
        f1: hit1 as f64 / shots as f64,
        f2: hit2 as f64 / shots as f64,
        shots,
        q_prime: q_prime.to_string(),
        a_prime: a_prime.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn counts(pairs: &[(&str, u64)]) -> Counts {
        pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
    }

    #[test]
    fn no_ancilla() {
        let r = fidelity(
            &counts(&[("11", 800), ("01", 200)]),
            &[Role::Control, Role::Target],
            "11",
            "",
        )
        .unwrap();
        assert_eq!((r.f1, r.f2), (0.8, 0.8));
    }

    #[test]
    fn ancilla_tightens_f2() {
        let roles = [Role::Control, Role::Target, Role::Ancilla];
        let r = fidelity(&counts(&[("110", 600), ("111", 400)]), &roles, "11", "0").unwrap();
        assert_eq!((r.f1, r.f2), (1.0, 0.6));
    }

    #[test]
    fn stderr_matches_closed_form() {
        assert!((binomial_stderr(0.8, 8000) - 0.004472).abs() < 5e-7);
    }

    #[test]
    fn length_mismatch() {
        let roles = [Role::Control, Role::Target];
        assert!(fidelity(&counts(&[("110", 1)]), &roles, "11", "").is_err());
        assert!(fidelity(&counts(&[("11", 1)]), &roles, "1", "").is_err());
    }

    proptest! {
        #[test]
        fn f2_never_exceeds_f1(raw in proptest::collection::vec((0u8..8, 1u64..50), 1..12)) {
            let mut c = Counts::new();
            for (k, n) in raw {
                *c.entry(format!("{:03b}", k)).or_default() += n;
            }
            let roles = [Role::Control, Role::Ancilla, Role::Target];
            let r = fidelity(&c, &roles, "11", "0").unwrap();
            prop_assert!(r.f2 <= r.f1);
            prop_assert!((0.0..=1.0).contains(&r.f1));
        }
    }
}
