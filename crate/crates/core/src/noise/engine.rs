//! Shot sampling under the calibrated noise model.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::circuit::{GateKind, GateOp};
use crate::error::{Error, Result};
use crate::noise::calibration::{DeviceCalibration, QubitNoiseParams};
use crate::noise::schedule::ScheduledCircuit;
use crate::noise::trajectory::{IdleChannel, NoiseEvent, TrajectoryState};
use crate::state::{basis_label, wire_mask, Counts};

/// splitmix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for one cell of an experiment grid, from the master seed and the
/// cell's coordinates.
pub fn derive_seed(master: u64, coords: &[u64]) -> u64 {
    coords.iter().fold(mix(master), |acc, &c| mix(acc ^ mix(c)))
}

/// Generator for shot `shot` of a run seeded with `seed`.
pub fn shot_rng(seed: u64, shot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    rng
}

/// Applies one idle interval of length `dt` on `wire`.
pub fn idle_channel_sample<R: Rng + ?Sized>(
    state: &mut TrajectoryState,
    wire: usize,
    dt: f64,
    params: &QubitNoiseParams,
    rng: &mut R,
) -> Result<NoiseEvent> {
    if wire >= state.n_qubits() {
        return Err(Error::QubitOutOfRange {
            qubit: wire,
            n_qubits: state.n_qubits(),
        });
    }
    let ch = IdleChannel::new(dt, params.t1(), params.tphi(), params.omega())?;
    Ok(ch.apply(state, wire, rng))
}

struct PlannedLayer<'a> {
    ops: &'a [GateOp],
    channels: Vec<(usize, IdleChannel)>,
}

/// A scheduled circuit with every per-layer channel probability resolved
/// against a calibration. Build once, sample many shots.
pub struct NoisyProgram<'a> {
    n_qubits: usize,
    layers: Vec<PlannedLayer<'a>>,
    readout: Vec<(usize, f64)>,
    depolarizing: f64,
}

impl<'a> NoisyProgram<'a> {
    pub fn new(sched: &'a ScheduledCircuit, cal: &DeviceCalibration) -> Result<Self> {
        let n = sched.n_qubits();
        let params: Vec<&QubitNoiseParams> = sched
            .physical()
            .iter()
            .map(|&p| cal.qubit(p))
            .collect::<Result<_>>()?;
        let layers = sched
            .layers()
            .iter()
            .map(|layer| {
                let channels = params
                    .iter()
                    .enumerate()
                    .map(|(w, p)| {
                        IdleChannel::new(layer.duration, p.t1(), p.tphi(), p.omega())
                            .map(|ch| (w, ch))
                    })
                    .filter(|r| !matches!(r, Ok((_, ch)) if ch.is_identity()))
                    .collect::<Result<Vec<_>>>()?;
                Ok(PlannedLayer {
                    ops: &layer.ops,
                    channels,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let readout = params
            .iter()
            .enumerate()
            .filter(|(_, p)| p.readout_error() > 0.0)
            .map(|(w, p)| (w, p.readout_error()))
            .collect();
        Ok(NoisyProgram {
            n_qubits: n,
            layers,
            readout,
            depolarizing: cal.two_qubit_error(),
        })
    }

    /// One trajectory; returns the measured basis index.
    pub fn run_shot<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize> {
        let mut state = TrajectoryState::new(self.n_qubits)?;
        for layer in &self.layers {
            for &(w, ch) in &layer.channels {
                ch.apply(&mut state, w, rng);
            }
            for op in layer.ops {
                if matches!(op.kind, GateKind::Measure) {
                    continue;
                }
                state.apply_gate(op)?;
                if op.is_two_qubit() && self.depolarizing > 0.0 && rng.random::<f64>() < self.depolarizing
                {
                    let k: u8 = rng.random_range(1..16);
                    state.pauli(op.qubits[0], k / 4);
                    state.pauli(op.qubits[1], k % 4);
                }
            }
        }
        let mut index = state.sample(rng);
        for &(w, e) in &self.readout {
            if rng.random::<f64>() < e {
                index ^= wire_mask(self.n_qubits, w);
            }
        }
        Ok(index)
    }

    /// `shots` trajectories, shot `i` drawing from [`shot_rng`]`(seed, i)`.
    /// The histogram does not depend on how shots are spread over threads.
    pub fn run(&self, shots: u64, seed: u64) -> Result<Counts> {
        if shots == 0 {
            return Err(Error::ZeroShots);
        }
        let hist = (0..shots)
            .into_par_iter()
            .map(|i| self.run_shot(&mut shot_rng(seed, i)))
            .try_fold(BTreeMap::new, |mut acc: BTreeMap<usize, u64>, r| {
                *acc.entry(r?).or_default() += 1;
                Ok::<_, Error>(acc)
            })
            .try_reduce(BTreeMap::new, |mut a, b| {
                for (k, v) in b {
                    *a.entry(k).or_default() += v;
                }
                Ok(a)
            })?;
        Ok(hist
            .into_iter()
            .map(|(i, c)| (basis_label(i, self.n_qubits), c))
            .collect())
    }
}

/// One noisy shot. Every wire is measured; the label is in wire order.
pub fn simulate_noisy_shot(
    sched: &ScheduledCircuit,
    cal: &DeviceCalibration,
    seed: u64,
) -> Result<String> {
    let program = NoisyProgram::new(sched, cal)?;
    let index = program.run_shot(&mut shot_rng(seed, 0))?;
    Ok(basis_label(index, sched.n_qubits()))
}

/// Histogram of `shots` noisy shots.
pub fn run_shots(
    sched: &ScheduledCircuit,
    cal: &DeviceCalibration,
    shots: u64,
    seed: u64,
) -> Result<Counts> {
    NoisyProgram::new(sched, cal)?.run(shots, seed)
}
