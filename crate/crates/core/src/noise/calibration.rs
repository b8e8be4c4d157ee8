//! Device calibration: per-qubit coherence parameters, gate durations and
//! the two-qubit depolarizing rate, plus the JSON calibration file format.

use std::f64::consts::TAU;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

const US: f64 = 1e-6;
const NS: f64 = 1e-9;

/// Shipped calibration for the 20-qubit map (qubit 7 deliberately weak).
pub const DEFAULT_CALIBRATION_JSON: &str = include_str!("../../data/default_calibration.json");

/// Pure-dephasing time from `1/tphi = 1/t2 − 1/(2·t1)`.
///
/// Returns `+∞` when `t2 = 2·t1`. Fails when `t2 > 2·t1` or either time is
/// not positive. `t1 = +∞` is allowed and gives `tphi = t2`.
pub fn derive_tphi(t1: f64, t2: f64) -> Result<f64> {
    if !(t1 > 0.0) || !(t2 > 0.0) {
        return Err(Error::Unphysical(format!(
            "coherence times must be positive (t1 = {t1}, t2 = {t2})"
        )));
    }
    let rate = 1.0 / t2 - 0.5 / t1;
    // Allow a few ulps of slack so t2 = 2·t1 from decimal input is accepted.
    if rate < -1e-12 / t2 {
        return Err(Error::Unphysical(format!(
            "t2 = {t2} s exceeds 2·t1 = {} s",
            2.0 * t1
        )));
    }
    if rate <= 1e-12 / t2 {
        Ok(f64::INFINITY)
    } else {
        Ok(1.0 / rate)
    }
}

/// Coherence parameters of one qubit. Times in seconds, `omega` in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitNoiseParams {
    t1: f64,
    t2: f64,
    tphi: f64,
    omega: f64,
    readout_error: f64,
}

impl QubitNoiseParams {
    pub fn new(t1: f64, t2: f64, omega: f64, readout_error: f64) -> Result<Self> {
        let tphi = derive_tphi(t1, t2)?;
        if !omega.is_finite() {
            return Err(Error::Unphysical(format!("drift frequency {omega} rad/s")));
        }
        if !(0.0..0.5).contains(&readout_error) {
            return Err(Error::Unphysical(format!(
                "readout error {readout_error} outside [0, 0.5)"
            )));
        }
        Ok(QubitNoiseParams {
            t1,
            t2,
            tphi,
            omega,
            readout_error,
        })
    }

    /// No damping, no dephasing, no drift, perfect readout.
    pub fn ideal() -> Self {
        QubitNoiseParams {
            t1: f64::INFINITY,
            t2: f64::INFINITY,
            tphi: f64::INFINITY,
            omega: 0.0,
            readout_error: 0.0,
        }
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }
    pub fn t2(&self) -> f64 {
        self.t2
    }
    pub fn tphi(&self) -> f64 {
        self.tphi
    }
    pub fn omega(&self) -> f64 {
        self.omega
    }
    pub fn readout_error(&self) -> f64 {
        self.readout_error
    }

    pub fn with_t1(self, t1: f64) -> Result<Self> {
        Self::new(t1, self.t2.min(2.0 * t1), self.omega, self.readout_error)
    }
    pub fn with_omega(self, omega: f64) -> Result<Self> {
        Self::new(self.t1, self.t2, omega, self.readout_error)
    }
    pub fn with_readout_error(self, readout_error: f64) -> Result<Self> {
        Self::new(self.t1, self.t2, self.omega, readout_error)
    }
}

/// Gate and measurement durations in seconds. Delays carry their own length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DurationModel {
    pub single_qubit_gate: f64,
    pub two_qubit_gate: f64,
    pub measurement: f64,
}

impl Default for DurationModel {
    fn default() -> Self {
        DurationModel {
            single_qubit_gate: 100.0 * NS,
            two_qubit_gate: 300.0 * NS,
            measurement: 1000.0 * NS,
        }
    }
}

impl DurationModel {
    pub fn validate(&self) -> Result<()> {
        for d in [self.single_qubit_gate, self.two_qubit_gate, self.measurement] {
            if !(d >= 0.0) || !d.is_finite() {
                return Err(Error::NegativeDuration(d));
            }
        }
        Ok(())
    }

    /// All durations zero: scheduling only orders ops.
    pub fn instantaneous() -> Self {
        DurationModel {
            single_qubit_gate: 0.0,
            two_qubit_gate: 0.0,
            measurement: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceCalibration {
    qubits: Vec<QubitNoiseParams>,
    durations: DurationModel,
    two_qubit_error: f64,
}

impl DeviceCalibration {
    pub fn new(
        qubits: Vec<QubitNoiseParams>,
        durations: DurationModel,
        two_qubit_error: f64,
    ) -> Result<Self> {
        durations.validate()?;
        if !(0.0..=1.0).contains(&two_qubit_error) {
            return Err(Error::Unphysical(format!(
                "two-qubit error rate {two_qubit_error} outside [0, 1]"
            )));
        }
        Ok(DeviceCalibration {
            qubits,
            durations,
            two_qubit_error,
        })
    }

    /// Every channel off and every duration at its default.
    pub fn noiseless(n_qubits: usize) -> Self {
        DeviceCalibration {
            qubits: vec![QubitNoiseParams::ideal(); n_qubits],
            durations: DurationModel::default(),
            two_qubit_error: 0.0,
        }
    }

    /// Synthetic device: T1 and T2 uniform over 30–120 μs (T2 capped at
    /// 2·T1), residual drift 2–10 kHz, and `weak` (if any) pinned to T1 = T2 = 20 μs.
    pub fn sampled(n_qubits: usize, seed: u64, weak: Option<usize>) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut qubits = Vec::with_capacity(n_qubits);
        for q in 0..n_qubits {
            let t1 = rng.random_range(30.0..=120.0) * US;
            let t2 = (rng.random_range(30.0..=120.0) * US).min(2.0 * t1);
            let f = rng.random_range(0.002..=0.01) * 1e6;
            let params = if Some(q) == weak {
                QubitNoiseParams::new(20.0 * US, 20.0 * US, TAU * f, 0.0)?
            } else {
                QubitNoiseParams::new(t1, t2, TAU * f, 0.0)?
            };
            qubits.push(params);
        }
        DeviceCalibration::new(qubits, DurationModel::default(), 0.02)
    }

    /// The shipped default calibration.
    pub fn default_device() -> Self {
        Self::from_json_str(DEFAULT_CALIBRATION_JSON).expect("shipped calibration is valid")
    }

    pub fn n_qubits(&self) -> usize {
        self.qubits.len()
    }

    pub fn qubits(&self) -> &[QubitNoiseParams] {
        &self.qubits
    }

    pub fn qubit(&self, q: usize) -> Result<&QubitNoiseParams> {
        self.qubits.get(q).ok_or(Error::MissingCalibration(q))
    }

    pub fn durations(&self) -> &DurationModel {
        &self.durations
    }

    pub fn two_qubit_error(&self) -> f64 {
        self.two_qubit_error
    }

    pub fn with_qubit(mut self, q: usize, params: QubitNoiseParams) -> Result<Self> {
        *self
            .qubits
            .get_mut(q)
            .ok_or(Error::MissingCalibration(q))? = params;
        Ok(self)
    }

    pub fn with_durations(mut self, durations: DurationModel) -> Result<Self> {
        durations.validate()?;
        self.durations = durations;
        Ok(self)
    }

    pub fn with_two_qubit_error(self, rate: f64) -> Result<Self> {
        DeviceCalibration::new(self.qubits, self.durations, rate)
    }

    /// Same durations, every channel off.
    pub fn without_noise(&self) -> Self {
        DeviceCalibration {
            qubits: vec![QubitNoiseParams::ideal(); self.qubits.len()],
            durations: self.durations,
            two_qubit_error: 0.0,
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: CalibrationFile = serde_json::from_str(s)?;
        file.try_into()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&s)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&CalibrationFile::from(self)).expect("serializable") + "\n"
    }

    /// SHA-256 of the canonical compact JSON form, hex encoded.
    pub fn hash_hex(&self) -> String {
        let canonical =
            serde_json::to_string(&CalibrationFile::from(self)).expect("serializable");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

// File format. Units are part of the key names.

#[derive(Debug, Serialize, Deserialize)]
struct CalibrationFile {
    qubits: Vec<QubitEntry>,
    durations_ns: DurationsEntry,
    two_qubit_error: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct QubitEntry {
    #[serde(serialize_with = "inf_as_null", deserialize_with = "null_as_inf")]
    t1_us: f64,
    #[serde(serialize_with = "inf_as_null", deserialize_with = "null_as_inf")]
    t2_us: f64,
    omega_mhz: f64,
    readout_error: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct DurationsEntry {
    single: f64,
    two_qubit: f64,
    measure: f64,
}

fn inf_as_null<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_none()
    } else {
        s.serialize_f64(*v)
    }
}

fn null_as_inf<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
}

impl From<&DeviceCalibration> for CalibrationFile {
    fn from(cal: &DeviceCalibration) -> Self {
        CalibrationFile {
            qubits: cal
                .qubits
                .iter()
                .map(|q| QubitEntry {
                    t1_us: q.t1 / US,
                    t2_us: q.t2 / US,
                    omega_mhz: q.omega / TAU / 1e6,
                    readout_error: q.readout_error,
                })
                .collect(),
            durations_ns: DurationsEntry {
                single: cal.durations.single_qubit_gate / NS,
                two_qubit: cal.durations.two_qubit_gate / NS,
                measure: cal.durations.measurement / NS,
            },
            two_qubit_error: cal.two_qubit_error,
        }
    }
}

impl TryFrom<CalibrationFile> for DeviceCalibration {
    type Error = Error;

    fn try_from(file: CalibrationFile) -> Result<Self> {
        let qubits = file
            .qubits
            .iter()
            .enumerate()
            .map(|(i, q)| {
                QubitNoiseParams::new(
                    q.t1_us * US,
                    q.t2_us * US,
                    TAU * q.omega_mhz * 1e6,
                    q.readout_error,
                )
                .map_err(|e| Error::Unphysical(format!("qubit {i}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        DeviceCalibration::new(
            qubits,
            DurationModel {
                single_qubit_gate: file.durations_ns.single * NS,
                two_qubit_gate: file.durations_ns.two_qubit * NS,
                measurement: file.durations_ns.measure * NS,
            },
            file.two_qubit_error,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tphi_limits() {
        assert_eq!(derive_tphi(f64::INFINITY, 40e-6).unwrap(), 40e-6);
        assert!(derive_tphi(50e-6, 100e-6).unwrap().is_infinite());
        let tphi = derive_tphi(100e-6, 80e-6).unwrap();
        // 1/(1/80 − 1/200) μs = 133.33 μs
        assert!((tphi - 400.0 / 3.0 * 1e-6).abs() < 1e-15);
    }

    #[test]
    fn tphi_rejects_unphysical() {
        assert!(matches!(
            derive_tphi(30e-6, 61e-6),
            Err(Error::Unphysical(_))
        ));
        assert!(derive_tphi(0.0, 1e-6).is_err());
        assert!(QubitNoiseParams::new(30e-6, 70e-6, 0.0, 0.0).is_err());
        assert!(QubitNoiseParams::new(30e-6, 30e-6, 0.0, 0.5).is_err());
    }

    #[test]
    fn file_round_trip_and_units() {
        let json = r#"{
            "qubits": [{"t1_us": 70, "t2_us": 50, "omega_mhz": 0.1, "readout_error": 0.01},
                       {"t1_us": null, "t2_us": 40, "omega_mhz": 0, "readout_error": 0}],
            "durations_ns": {"single": 100, "two_qubit": 300, "measure": 1000},
            "two_qubit_error": 0.02
        }"#;
        let cal = DeviceCalibration::from_json_str(json).unwrap();
        let q0 = cal.qubit(0).unwrap();
        assert!((q0.t1() - 70e-6).abs() < 1e-18);
        assert!((q0.omega() - TAU * 1e5).abs() < 1e-6);
        assert!(cal.qubit(1).unwrap().t1().is_infinite());
        assert!((cal.durations().two_qubit_gate - 300e-9).abs() < 1e-20);
        let again = DeviceCalibration::from_json_str(&cal.to_json_string()).unwrap();
        assert_eq!(again.hash_hex(), cal.hash_hex());
        assert!(matches!(cal.qubit(2), Err(Error::MissingCalibration(2))));
    }

    #[test]
    fn missing_keys_are_errors() {
        let json = r#"{
            "qubits": [{"t1_us": 70, "t2_us": 50, "omega_mhz": 0.1}],
            "durations_ns": {"single": 100, "two_qubit": 300, "measure": 1000},
            "two_qubit_error": 0.02
        }"#;
        assert!(DeviceCalibration::from_json_str(json).is_err());
    }

    #[test]
    fn shipped_default_is_in_range() {
        let cal = DeviceCalibration::default_device();
        assert_eq!(cal.n_qubits(), 20);
        for (q, p) in cal.qubits().iter().enumerate() {
            assert!(p.t2() <= 2.0 * p.t1() * (1.0 + 1e-12));
            if q == 7 {
                assert!((p.t1() - 20e-6).abs() < 1e-12);
            } else {
                assert!((30e-6..=120e-6).contains(&p.t1()), "qubit {q}");
            }
            assert_eq!(p.readout_error(), 0.0);
        }
        assert_eq!(*cal.durations(), DurationModel::default());
    }
}
