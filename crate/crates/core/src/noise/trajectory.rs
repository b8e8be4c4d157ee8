//! Sparse statevector used by the trajectory sampler.
//!
//! Chain and Toffoli circuits keep the register in a handful of basis states,
//! so the state is stored as a sorted list of nonzero amplitudes rather than a
//! dense `2^n` array.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;

use crate::circuit::{GateKind, GateOp};
use crate::error::{Error, Result};
use crate::state::{single_qubit_matrix, wire_mask, StateVector};

/// Amplitudes with squared modulus below this are dropped.
const PRUNE: f64 = 1e-28;

/// Largest register the sparse state can index.
pub const MAX_TRAJECTORY_QUBITS: usize = 48;

/// Where a wire's excitation sits in the current state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Occupancy {
    Zero,
    One,
    Mixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryState {
    n_qubits: usize,
    entries: Vec<(usize, Complex64)>,
}

impl TrajectoryState {
    /// `|0…0⟩`.
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits > MAX_TRAJECTORY_QUBITS {
            return Err(Error::TooManyQubits {
                n_qubits,
                limit: MAX_TRAJECTORY_QUBITS,
            });
        }
        Ok(TrajectoryState {
            n_qubits,
            entries: vec![(0, Complex64::new(1.0, 0.0))],
        })
    }

    pub fn from_dense(state: &StateVector) -> Self {
        let entries = state
            .amplitudes()
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > PRUNE)
            .map(|(i, &a)| (i, a))
            .collect();
        TrajectoryState {
            n_qubits: state.n_qubits(),
            entries,
        }
    }

    pub fn to_dense(&self) -> Result<StateVector> {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << self.n_qubits];
        for &(i, a) in &self.entries {
            amps[i] = a;
        }
        StateVector::from_amplitudes(amps)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Number of stored nonzero amplitudes.
    pub fn support(&self) -> usize {
        self.entries.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|(_, a)| a.norm_sqr()).sum()
    }

    pub fn occupancy(&self, wire: usize) -> Occupancy {
        let m = wire_mask(self.n_qubits, wire);
        let mut p1 = 0.0;
        let mut any0 = false;
        let mut any1 = false;
        for &(i, a) in &self.entries {
            if i & m != 0 {
                any1 = true;
                p1 += a.norm_sqr();
            } else {
                any0 = true;
            }
        }
        match (any0, any1) {
            (_, false) => Occupancy::Zero,
            (false, true) => Occupancy::One,
            _ => Occupancy::Mixed(p1 / self.norm_sqr()),
        }
    }

    pub fn excited_population(&self, wire: usize) -> f64 {
        match self.occupancy(wire) {
            Occupancy::Zero => 0.0,
            Occupancy::One => 1.0,
            Occupancy::Mixed(p) => p,
        }
    }

    pub fn apply_gate(&mut self, op: &GateOp) -> Result<()> {
        op.validate(self.n_qubits)?;
        match op.kind {
            GateKind::Measure => return Err(Error::MeasureNotUnitary),
            GateKind::Delay { .. } => {}
            GateKind::Cnot => self.cnot(op.qubits[0], op.qubits[1]),
            GateKind::X => self.flip(op.qubits[0]),
            GateKind::H => {
                let u = single_qubit_matrix(GateKind::H).expect("single-qubit gate");
                self.apply_dense_1q(op.qubits[0], &u);
            }
            kind => {
                let u = single_qubit_matrix(kind).expect("single-qubit gate");
                self.phase_one(op.qubits[0], u[1][1]);
            }
        }
        Ok(())
    }

    pub(crate) fn flip(&mut self, wire: usize) {
        let m = wire_mask(self.n_qubits, wire);
        for e in &mut self.entries {
            e.0 ^= m;
        }
        self.entries.sort_unstable_by_key(|e| e.0);
    }

    pub(crate) fn cnot(&mut self, control: usize, target: usize) {
        let c = wire_mask(self.n_qubits, control);
        let t = wire_mask(self.n_qubits, target);
        let mut moved = false;
        for e in &mut self.entries {
            if e.0 & c != 0 {
                e.0 ^= t;
                moved = true;
            }
        }
        if moved {
            self.entries.sort_unstable_by_key(|e| e.0);
        }
    }

    /// Multiplies amplitudes with `wire` set by `phase`.
    pub(crate) fn phase_one(&mut self, wire: usize, phase: Complex64) {
        let m = wire_mask(self.n_qubits, wire);
        for e in &mut self.entries {
            if e.0 & m != 0 {
                e.1 *= phase;
            }
        }
    }

    /// Y = i·X·Z.
    pub(crate) fn pauli(&mut self, wire: usize, which: u8) {
        match which {
            1 => self.flip(wire),
            2 => {
                self.phase_one(wire, Complex64::new(-1.0, 0.0));
                self.flip(wire);
                for e in &mut self.entries {
                    e.1 *= Complex64::new(0.0, 1.0);
                }
            }
            3 => self.phase_one(wire, Complex64::new(-1.0, 0.0)),
            _ => {}
        }
    }

    fn apply_dense_1q(&mut self, wire: usize, u: &[[Complex64; 2]; 2]) {
        let m = wire_mask(self.n_qubits, wire);
        let mut out: BTreeMap<usize, Complex64> = BTreeMap::new();
        for &(i, a) in &self.entries {
            let (i0, i1) = (i & !m, i | m);
            let bit = usize::from(i & m != 0);
            *out.entry(i0).or_default() += u[0][bit] * a;
            *out.entry(i1).or_default() += u[1][bit] * a;
        }
        self.entries = out.into_iter().filter(|(_, a)| a.norm_sqr() > PRUNE).collect();
    }

    /// Projects `wire` onto `|1⟩`, lowers it to `|0⟩` and renormalizes.
    pub(crate) fn decay_jump(&mut self, wire: usize) {
        let m = wire_mask(self.n_qubits, wire);
        self.entries.retain(|e| e.0 & m != 0);
        for e in &mut self.entries {
            e.0 &= !m;
        }
        self.entries.sort_unstable_by_key(|e| e.0);
        self.renormalize();
    }

    /// No-jump damping back-action `diag(1, √(1−γ))`, renormalized.
    pub(crate) fn decay_no_jump(&mut self, wire: usize, gamma: f64) {
        let m = wire_mask(self.n_qubits, wire);
        let s = (1.0 - gamma).sqrt();
        for e in &mut self.entries {
            if e.0 & m != 0 {
                e.1 *= s;
            }
        }
        self.entries.retain(|e| e.1.norm_sqr() > PRUNE);
        self.renormalize();
    }

    fn renormalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        for e in &mut self.entries {
            e.1 /= n;
        }
    }

    /// Draws one basis index from the Born distribution.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        if self.entries.len() == 1 {
            return self.entries[0].0;
        }
        let total = self.norm_sqr();
        let mut r = rng.random::<f64>() * total;
        for &(i, a) in &self.entries {
            r -= a.norm_sqr();
            if r < 0.0 {
                return i;
            }
        }
        self.entries.last().expect("nonempty state").0
    }
}

/// One idle interval's worth of noise on a single qubit, with the
/// probabilities precomputed for a fixed `Δt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdleChannel {
    /// Damping probability `1 − e^{−Δt/t1}`.
    pub gamma: f64,
    /// Phase-flip probability `(1 − e^{−Δt/tphi})/2`.
    pub p_flip: f64,
    /// Drift phase `e^{iωΔt}` on `|1⟩`.
    pub drift: Complex64,
}

/// What happened during one idle interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct NoiseEvent {
    pub decayed: bool,
    pub phase_flipped: bool,
}

impl IdleChannel {
    pub fn new(dt: f64, t1: f64, tphi: f64, omega: f64) -> Result<Self> {
        if !(dt >= 0.0) {
            return Err(Error::NegativeDuration(dt));
        }
        Ok(IdleChannel {
            gamma: -(-dt / t1).exp_m1(),
            p_flip: -0.5 * (-dt / tphi).exp_m1(),
            drift: Complex64::from_polar(1.0, omega * dt),
        })
    }

    pub fn is_identity(&self) -> bool {
        self.gamma == 0.0 && self.p_flip == 0.0 && self.drift == Complex64::new(1.0, 0.0)
    }

    /// Applies the channel to `wire`. A wire known to be `|0⟩` is untouched; a
    /// wire known to be `|1⟩` only needs the damping draw, since phase flips
    /// and drift are then global phases.
    pub fn apply<R: Rng + ?Sized>(
        &self,
        state: &mut TrajectoryState,
        wire: usize,
        rng: &mut R,
    ) -> NoiseEvent {
        let mut event = NoiseEvent::default();
        match state.occupancy(wire) {
            Occupancy::Zero => {}
            Occupancy::One => {
                if self.gamma > 0.0 && rng.random::<f64>() < self.gamma {
                    state.decay_jump(wire);
                    event.decayed = true;
                }
            }
            Occupancy::Mixed(p1) => {
                if self.gamma > 0.0 {
                    if rng.random::<f64>() < self.gamma * p1 {
                        state.decay_jump(wire);
                        event.decayed = true;
                    } else {
                        state.decay_no_jump(wire, self.gamma);
                    }
                }
                if !event.decayed {
                    if self.p_flip > 0.0 && rng.random::<f64>() < self.p_flip {
                        state.pauli(wire, 3);
                        event.phase_flipped = true;
                    }
                    if self.drift != Complex64::new(1.0, 0.0) {
                        state.phase_one(wire, self.drift);
                    }
                }
            }
        }
        event
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dense_after(ops: &[GateOp], n: usize) -> StateVector {
        let mut s = StateVector::new(n);
        for op in ops {
            s.apply_gate(op).unwrap();
        }
        s
    }

    #[test]
    fn matches_dense_simulation() {
        let ops = [
            GateOp::h(0),
            GateOp::cnot(0, 1),
            GateOp::t(1),
            GateOp::h(2),
            GateOp::cnot(2, 0),
            GateOp::rphi(0, 0.3),
            GateOp::sdg(2),
            GateOp::h(1),
            GateOp::x(2),
        ];
        let mut t = TrajectoryState::new(3).unwrap();
        for op in &ops {
            t.apply_gate(op).unwrap();
        }
        let d = dense_after(&ops, 3);
        assert_abs_diff_eq!(t.to_dense().unwrap().fidelity(&d).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn hadamard_pair_prunes_back_to_one_entry() {
        let mut t = TrajectoryState::new(2).unwrap();
        t.apply_gate(&GateOp::h(1)).unwrap();
        assert_eq!(t.support(), 2);
        t.apply_gate(&GateOp::h(1)).unwrap();
        assert_eq!(t.support(), 1);
        assert_eq!(t.occupancy(1), Occupancy::Zero);
    }

    #[test]
    fn pauli_y_matches_dense() {
        let mut t = TrajectoryState::new(1).unwrap();
        t.apply_gate(&GateOp::h(0)).unwrap();
        t.apply_gate(&GateOp::t(0)).unwrap();
        t.pauli(0, 2);
        // Y equals X·Z up to a global phase.
        let d = dense_after(
            &[GateOp::h(0), GateOp::t(0), GateOp::s(0), GateOp::s(0), GateOp::x(0)],
            1,
        );
        assert_abs_diff_eq!(t.to_dense().unwrap().fidelity(&d).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_interval_is_identity() {
        let ch = IdleChannel::new(0.0, 50e-6, 40e-6, 1e6).unwrap();
        assert!(ch.is_identity());
        assert!(IdleChannel::new(-1e-9, 50e-6, 40e-6, 0.0).is_err());
    }

    #[test]
    fn jump_collapses_superposed_wire() {
        let mut t = TrajectoryState::new(2).unwrap();
        t.apply_gate(&GateOp::h(0)).unwrap();
        t.apply_gate(&GateOp::cnot(0, 1)).unwrap();
        t.decay_jump(0);
        // Bell state with wire 0 lowered: only |01⟩ survives.
        assert_eq!(t.support(), 1);
        assert_eq!(t.occupancy(0), Occupancy::Zero);
        assert_eq!(t.occupancy(1), Occupancy::One);
    }

    #[test]
    fn no_jump_biases_toward_ground() {
        let mut t = TrajectoryState::new(1).unwrap();
        t.apply_gate(&GateOp::h(0)).unwrap();
        t.decay_no_jump(0, 0.75);
        // amplitudes (1, 1/2)/√(5/4)
        assert_abs_diff_eq!(t.excited_population(0), 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(t.norm_sqr(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn excited_survival_averages_to_exponential() {
        let ch = IdleChannel::new(1.0, 1.0, f64::INFINITY, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 20000;
        let mut survived = 0;
        for _ in 0..n {
            let mut t = TrajectoryState::new(1).unwrap();
            t.flip(0);
            ch.apply(&mut t, 0, &mut rng);
            survived += t.sample(&mut rng);
        }
        let p = survived as f64 / n as f64;
        let e = (-1.0f64).exp();
        let sigma = (e * (1.0 - e) / n as f64).sqrt();
        assert!((p - e).abs() < 5.0 * sigma, "p = {p}");
    }
}
