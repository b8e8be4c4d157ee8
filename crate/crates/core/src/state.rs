//! Exact dense statevector simulation.
//!
//! This is the noiseless oracle: builder outputs are checked against it and
//! the trajectory engine's noiseless limit is compared with its samples.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{Circuit, GateKind, GateOp};
use crate::error::{Error, Result};

/// Largest register for which [`circuit_unitary`] builds a full matrix.
pub const MAX_UNITARY_QUBITS: usize = 10;

/// Histogram of measured basis labels.
pub type Counts = BTreeMap<String, u64>;

/// Row-major square complex matrix.
pub type Matrix = Vec<Vec<Complex64>>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// 2×2 matrix of a single-qubit gate, `None` for CNOT, measurement and delay
/// handled elsewhere.
pub(crate) fn single_qubit_matrix(kind: GateKind) -> Option<[[Complex64; 2]; 2]> {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let phase = |theta: f64| Complex64::from_polar(1.0, theta);
    let diag = |d: Complex64| [[ONE, ZERO], [ZERO, d]];
    Some(match kind {
        GateKind::X => [[ZERO, ONE], [ONE, ZERO]],
        GateKind::H => [[h, h], [h, -h]],
        GateKind::T => diag(phase(FRAC_PI_4)),
        GateKind::Tdg => diag(phase(-FRAC_PI_4)),
        GateKind::S => diag(Complex64::new(0.0, 1.0)),
        GateKind::Sdg => diag(Complex64::new(0.0, -1.0)),
        GateKind::Rphi { angle } => diag(phase(angle)),
        GateKind::Delay { .. } => diag(ONE),
        GateKind::Cnot | GateKind::Measure => return None,
    })
}

/// Bit mask of `wire` in a basis index of an `n`-wire register.
#[inline]
pub(crate) fn wire_mask(n_qubits: usize, wire: usize) -> usize {
    1usize << (n_qubits - 1 - wire)
}

/// Basis index → label, wire 0 first.
pub fn basis_label(index: usize, n_qubits: usize) -> String {
    (0..n_qubits)
        .map(|w| {
            if index & wire_mask(n_qubits, w) != 0 {
                '1'
            } else {
                '0'
            }
        })
        .collect()
}

/// Label → basis index, wire 0 first.
pub fn basis_index(label: &str) -> Result<usize> {
    if label.is_empty() || label.len() >= usize::BITS as usize {
        return Err(Error::InvalidLabel(label.to_string()));
    }
    label.chars().try_fold(0usize, |acc, c| match c {
        '0' => Ok(acc << 1),
        '1' => Ok((acc << 1) | 1),
        _ => Err(Error::InvalidLabel(label.to_string())),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩` on `n_qubits` wires.
    pub fn new(n_qubits: usize) -> Self {
        let mut amplitudes = vec![ZERO; 1 << n_qubits];
        amplitudes[0] = ONE;
        StateVector {
            n_qubits,
            amplitudes,
        }
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        if index >= 1 << n_qubits {
            return Err(Error::InvalidState(format!(
                "basis index {index} out of range for {n_qubits} qubits"
            )));
        }
        let mut s = StateVector::new(n_qubits);
        s.amplitudes[0] = ZERO;
        s.amplitudes[index] = ONE;
        Ok(s)
    }

    pub fn from_label(label: &str) -> Result<Self> {
        StateVector::basis(label.len(), basis_index(label)?)
    }

    /// Takes ownership of an amplitude array; it must have power-of-two
    /// length and unit norm within 1e-10.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::InvalidState(format!(
                "amplitude count {len} is not a power of two"
            )));
        }
        let s = StateVector {
            n_qubits: len.trailing_zeros() as usize,
            amplitudes,
        };
        let norm = s.norm_sqr();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("norm² is {norm}, expected 1")));
        }
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, label: &str) -> Result<Complex64> {
        if label.len() != self.n_qubits {
            return Err(Error::InvalidLabel(label.to_string()));
        }
        Ok(self.amplitudes[basis_index(label)?])
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.amplitudes[index].norm_sqr()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Probability that `wire` reads 1.
    pub fn excited_population(&self, wire: usize) -> f64 {
        let m = wire_mask(self.n_qubits, wire);
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & m != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::QubitCountMismatch {
                expected: self.n_qubits,
                got: other.n_qubits,
            });
        }
        let overlap: Complex64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(overlap.norm_sqr())
    }

    pub fn apply_gate(&mut self, op: &GateOp) -> Result<()> {
        op.validate(self.n_qubits)?;
        match op.kind {
            GateKind::Measure => Err(Error::MeasureNotUnitary),
            GateKind::Cnot => {
                let c = wire_mask(self.n_qubits, op.qubits[0]);
                let t = wire_mask(self.n_qubits, op.qubits[1]);
                for i in 0..self.amplitudes.len() {
                    if i & c != 0 && i & t == 0 {
                        self.amplitudes.swap(i, i | t);
                    }
                }
                Ok(())
            }
            kind => {
                let u = single_qubit_matrix(kind).expect("single-qubit gate");
                self.apply_single(&u, op.qubits[0]);
                Ok(())
            }
        }
    }

    fn apply_single(&mut self, u: &[[Complex64; 2]; 2], wire: usize) {
        let m = wire_mask(self.n_qubits, wire);
        for i in 0..self.amplitudes.len() {
            if i & m == 0 {
                let a0 = self.amplitudes[i];
                let a1 = self.amplitudes[i | m];
                self.amplitudes[i] = u[0][0] * a0 + u[0][1] * a1;
                self.amplitudes[i | m] = u[1][0] * a0 + u[1][1] * a1;
            }
        }
    }

    /// Applies every gate in order. The circuit must not contain measurements.
    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.n_qubits() != self.n_qubits {
            return Err(Error::QubitCountMismatch {
                expected: self.n_qubits,
                got: circuit.n_qubits(),
            });
        }
        if circuit.has_measurements() {
            return Err(Error::MeasureNotUnitary);
        }
        for op in circuit.ops() {
            self.apply_gate(op)?;
        }
        Ok(())
    }

    /// Draws `shots` independent basis samples. The same seed always gives the
    /// same histogram.
    pub fn sample_shots(&self, shots: u64, seed: u64) -> Result<Counts> {
        if shots == 0 {
            return Err(Error::ZeroShots);
        }
        let mut cumulative = Vec::with_capacity(self.amplitudes.len());
        let mut acc = 0.0;
        for a in &self.amplitudes {
            acc += a.norm_sqr();
            cumulative.push(acc);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut hits = vec![0u64; self.amplitudes.len()];
        for _ in 0..shots {
            let r = rng.random::<f64>() * acc;
            let idx = cumulative
                .partition_point(|&c| c <= r)
                .min(self.amplitudes.len() - 1);
            hits[idx] += 1;
        }
        Ok(hits
            .into_iter()
            .enumerate()
            .filter(|(_, n)| *n > 0)
            .map(|(i, n)| (basis_label(i, self.n_qubits), n))
            .collect())
    }
}

/// Full `2^n × 2^n` unitary of a measurement-free circuit, `n ≤ 10`.
pub fn circuit_unitary(circuit: &Circuit) -> Result<Matrix> {
    let n = circuit.n_qubits();
    if n > MAX_UNITARY_QUBITS {
        return Err(Error::TooManyQubits {
            n_qubits: n,
            limit: MAX_UNITARY_QUBITS,
        });
    }
    let dim = 1 << n;
    let mut u = vec![vec![ZERO; dim]; dim];
    for col in 0..dim {
        let mut s = StateVector::basis(n, col)?;
        s.apply_circuit(circuit)?;
        for (row, a) in s.amplitudes.iter().enumerate() {
            u[row][col] = *a;
        }
    }
    Ok(u)
}

/// Largest entrywise deviation of `U†U` from the identity.
pub fn unitarity_error(u: &Matrix) -> f64 {
    let dim = u.len();
    let mut worst = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = ZERO;
            for k in 0..dim {
                acc += u[k][i].conj() * u[k][j];
            }
            let expect = if i == j { ONE } else { ZERO };
            worst = worst.max((acc - expect).norm());
        }
    }
    worst
}

/// Largest entrywise deviation between `a` and `e^{iθ} b`, with the global
/// phase θ fixed by the largest entry of `b`.
pub fn distance_up_to_phase(a: &Matrix, b: &Matrix) -> f64 {
    let (mut pi, mut pj, mut best) = (0, 0, -1.0);
    for (i, row) in b.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if v.norm() > best {
                best = v.norm();
                pi = i;
                pj = j;
            }
        }
    }
    let phase = if a[pi][pj].norm() > 0.0 {
        (a[pi][pj] / b[pi][pj]) / (a[pi][pj] / b[pi][pj]).norm()
    } else {
        ONE
    };
    a.iter()
        .zip(b)
        .flat_map(|(ra, rb)| ra.iter().zip(rb).map(move |(x, y)| (x - phase * y).norm()))
        .fold(0.0, f64::max)
}

/// Action of a circuit on its non-ancilla wires, with every ancilla
/// starting in `|0⟩` and projected onto `ancilla_out` at the end.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedOperator {
    /// Rows and columns indexed by the non-ancilla bits in wire order.
    pub matrix: Matrix,
    /// Largest probability, over basis inputs, of ending with the ancilla
    /// anywhere other than `ancilla_out`.
    pub leakage: f64,
}

pub fn restricted_operator(circuit: &Circuit, ancilla_out: &str) -> Result<RestrictedOperator> {
    let n = circuit.n_qubits();
    if n > MAX_UNITARY_QUBITS {
        return Err(Error::TooManyQubits {
            n_qubits: n,
            limit: MAX_UNITARY_QUBITS,
        });
    }
    let comp = circuit.computational_wires();
    let anc = circuit.ancilla_wires();
    if ancilla_out.len() != anc.len() {
        return Err(Error::InvalidLabel(format!(
            "{ancilla_out:?} does not cover {} ancilla",
            anc.len()
        )));
    }
    let anc_bits = if anc.is_empty() {
        0
    } else {
        basis_index(ancilla_out)?
    };
    let embed = |bits: usize, wires: &[usize]| {
        wires
            .iter()
            .enumerate()
            .filter(|&(i, _)| bits & (1 << (wires.len() - 1 - i)) != 0)
            .map(|(_, &w)| wire_mask(n, w))
            .sum::<usize>()
    };
    let anc_mask = embed(anc_bits, &anc);
    let dim = 1 << comp.len();
    let mut matrix = vec![vec![ZERO; dim]; dim];
    let mut leakage = 0.0f64;
    let unitary = circuit.unitary_part();
    for col in 0..dim {
        let mut s = StateVector::basis(n, embed(col, &comp))?;
        s.apply_circuit(&unitary)?;
        let mut kept = 0.0;
        for (row, entry) in matrix.iter_mut().enumerate() {
            let a = s.amplitudes[embed(row, &comp) | anc_mask];
            entry[col] = a;
            kept += a.norm_sqr();
        }
        leakage = leakage.max(1.0 - kept);
    }
    Ok(RestrictedOperator { matrix, leakage })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::{prop_assert, prop_oneof, proptest, Strategy};
    use rand::Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn x_flips_zero() {
        let mut s = StateVector::new(1);
        s.apply_gate(&GateOp::x(0)).unwrap();
        assert_eq!(s.amplitudes(), &[ZERO, ONE]);
    }

    #[test]
    fn h_makes_plus() {
        let mut s = StateVector::new(1);
        s.apply_gate(&GateOp::h(0)).unwrap();
        assert_abs_diff_eq!(s.amplitudes()[0].re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(s.amplitudes()[1].re, FRAC_1_SQRT_2, epsilon = 1e-15);
    }

    #[test]
    fn cnot_truth_table_uses_msb_order() {
        let mut s = StateVector::from_label("10").unwrap();
        s.apply_gate(&GateOp::cnot(0, 1)).unwrap();
        assert_eq!(s, StateVector::from_label("11").unwrap());
        let mut s = StateVector::from_label("01").unwrap();
        s.apply_gate(&GateOp::cnot(0, 1)).unwrap();
        assert_eq!(s, StateVector::from_label("01").unwrap());
    }

    #[test]
    fn gate_errors() {
        let mut s = StateVector::new(2);
        assert!(matches!(
            s.apply_gate(&GateOp::x(3)),
            Err(Error::QubitOutOfRange { .. })
        ));
        assert!(matches!(
            s.apply_gate(&GateOp::measure(0)),
            Err(Error::MeasureNotUnitary)
        ));
    }

    #[test]
    fn circuit_application() {
        let mut s = StateVector::new(1);
        s.apply_circuit(&Circuit::new(1)).unwrap();
        assert_eq!(s, StateVector::new(1));

        let mut s = StateVector::new(1);
        s.apply_circuit(&Circuit::from_ops(1, [GateOp::h(0), GateOp::h(0)]).unwrap())
            .unwrap();
        assert!(s.fidelity(&StateVector::new(1)).unwrap() > 1.0 - 1e-12);

        let mut s = StateVector::new(2);
        s.apply_circuit(&Circuit::from_ops(2, [GateOp::x(0), GateOp::cnot(0, 1)]).unwrap())
            .unwrap();
        assert_eq!(s, StateVector::from_label("11").unwrap());

        let mut s = StateVector::new(3);
        assert!(matches!(
            s.apply_circuit(&Circuit::new(2)),
            Err(Error::QubitCountMismatch { .. })
        ));
    }

    #[test]
    fn x_unitary() {
        let u = circuit_unitary(&Circuit::from_ops(1, [GateOp::x(0)]).unwrap()).unwrap();
        assert_eq!(u, vec![vec![ZERO, ONE], vec![ONE, ZERO]]);
    }

    #[test]
    fn unitary_size_limit() {
        assert!(matches!(
            circuit_unitary(&Circuit::new(11)),
            Err(Error::TooManyQubits { .. })
        ));
    }

    #[test]
    fn phase_insensitive_distance() {
        let a = vec![vec![c(0.0, 1.0), ZERO], vec![ZERO, c(0.0, 1.0)]];
        let b = vec![vec![ONE, ZERO], vec![ZERO, ONE]];
        assert!(distance_up_to_phase(&a, &b) < 1e-15);
        let z = vec![vec![ONE, ZERO], vec![ZERO, -ONE]];
        assert!(distance_up_to_phase(&z, &b) > 1.0);
    }

    #[test]
    fn deterministic_state_samples() {
        let s = StateVector::from_label("101").unwrap();
        let counts = s.sample_shots(100, 3).unwrap();
        assert_eq!(counts.len(), 1);
        assert_eq!(counts["101"], 100);
    }

    #[test]
    fn plus_state_is_fair_within_five_sigma() {
        let mut s = StateVector::new(1);
        s.apply_gate(&GateOp::h(0)).unwrap();
        let counts = s.sample_shots(8000, 11).unwrap();
        let p = counts.get("1").copied().unwrap_or(0) as f64 / 8000.0;
        let sigma = (0.25f64 / 8000.0).sqrt();
        assert!((p - 0.5).abs() < 5.0 * sigma, "p = {p}");
        assert_eq!(counts.values().sum::<u64>(), 8000);
    }

    #[test]
    fn sampling_is_seeded() {
        let mut s = StateVector::new(3);
        for q in 0..3 {
            s.apply_gate(&GateOp::h(q)).unwrap();
        }
        assert_eq!(s.sample_shots(500, 9).unwrap(), s.sample_shots(500, 9).unwrap());
        assert!(matches!(s.sample_shots(0, 9), Err(Error::ZeroShots)));
    }

    #[test]
    fn from_amplitudes_checks_norm() {
        assert!(StateVector::from_amplitudes(vec![ONE, ONE]).is_err());
        assert!(StateVector::from_amplitudes(vec![ONE, ZERO, ZERO]).is_err());
    }

    fn random_state(n: usize, seed: u64) -> StateVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut amps: Vec<Complex64> = (0..1 << n)
            .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        StateVector::from_amplitudes(amps).unwrap()
    }

    fn arb_op(n: usize) -> impl Strategy<Value = GateOp> {
        let one = (0..n, 0usize..7, -10.0f64..10.0).prop_map(|(q, k, a)| match k {
            0 => GateOp::x(q),
            1 => GateOp::h(q),
            2 => GateOp::t(q),
            3 => GateOp::tdg(q),
            4 => GateOp::s(q),
            5 => GateOp::sdg(q),
            _ => GateOp::rphi(q, a),
        });
        let two = (0..n, 1..n).prop_map(move |(c, d)| GateOp::cnot(c, (c + d) % n));
        prop_oneof![3 => one, 1 => two]
    }

    proptest! {
        #[test]
        fn norm_is_preserved(ops in proptest::collection::vec(arb_op(4), 0..40), seed in 0u64..1000) {
            let mut s = random_state(4, seed);
            for op in &ops {
                s.apply_gate(op).unwrap();
                prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
            }
        }

        #[test]
        fn involutions_return_the_state(seed in 0u64..1000, q in 0usize..3, d in 1usize..3) {
            let original = random_state(3, seed);
            for op in [GateOp::x(q), GateOp::h(q), GateOp::cnot(q, (q + d) % 3)] {
                let mut s = original.clone();
                s.apply_gate(&op).unwrap();
                s.apply_gate(&op).unwrap();
                prop_assert!(s.fidelity(&original).unwrap() >= 1.0 - 1e-10);
            }
        }

        #[test]
        fn unitaries_are_unitary(ops in proptest::collection::vec(arb_op(3), 0..25)) {
            let c = Circuit::from_ops(3, ops).unwrap();
            prop_assert!(unitarity_error(&circuit_unitary(&c).unwrap()) < 1e-9);
        }

        #[test]
        fn inverse_undoes_circuit(ops in proptest::collection::vec(arb_op(3), 0..25), seed in 0u64..100) {
            let c = Circuit::from_ops(3, ops).unwrap();
            let original = random_state(3, seed);
            let mut s = original.clone();
            s.apply_circuit(&c).unwrap();
            s.apply_circuit(&c.inverse()).unwrap();
            prop_assert!(s.fidelity(&original).unwrap() > 1.0 - 1e-10);
        }
    }

    #[test]
    fn label_round_trip_up_to_ten_qubits() {
        for n in 1..=10 {
            for i in 0..1usize << n {
                let label = basis_label(i, n);
                assert_eq!(label.len(), n);
                assert_eq!(basis_index(&label).unwrap(), i);
            }
        }
        assert_eq!(basis_label(4, 3), "100");
        assert!(basis_index("10a").is_err());
    }
}
