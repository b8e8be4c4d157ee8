//! C ABI over `nisq-lab`.
//!
//! Objects are opaque heap handles written through `T **out` parameters and
//! released with the matching `nl_*_free`. Every fallible
//! function returns an [`NlStatus`]; on failure the message is available from
//! [`nl_last_error_message`] on the same thread. Strings returned through
//! `char **` out-parameters are owned by the caller and must be released with
//! [`nl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nisq_lab::analysis::{fit_exponential, theoretical_qpe_distribution, FitStatus, Sample};
use nisq_lab::builder::{self, BuiltCircuit, CcnotInput, ControlPrep, ResetStrategy};
use nisq_lab::noise::{run_shots, schedule, DeviceCalibration};
use nisq_lab::topology::{
    enumerate_linear_triples, enumerate_ring_placements, enumerate_six_rings, enumerate_stars,
    validate_circuit, CouplingGraph, GeometryKind, GeometryPlacement,
};
use nisq_lab::{Circuit, Error};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Runtime = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlResetStrategy {
    None = 0,
    XReset = 1,
    CnotReset = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlControlPrep {
    Zero = 0,
    One = 1,
    Plus = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlGeometry {
    Linear3Cct = 0,
    Linear3Ctc = 1,
    Star4 = 2,
    Ring6ThreeChain = 3,
    Ring6OneChains = 4,
}

/// Coupling graph handle.
pub struct NlGraph(CouplingGraph);

/// Device calibration handle.
pub struct NlCalibration(DeviceCalibration);

/// Built circuit handle, carrying the desired ancilla and output strings.
pub struct NlCircuit(BuiltCircuit);

/// Exponential fit `p(t) = e^{-t/T}`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct NlExpFit {
    pub t: f64,
    pub t_stderr: f64,
    pub r_squared: f64,
    pub converged: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(NlStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Json(_) => NlStatus::Parse,
            Error::SuperpositionReset(_)
            | Error::Unsupported(_)
            | Error::NotAdjacent(..)
            | Error::QubitOutOfRange { .. }
            | Error::ZeroShots => NlStatus::InvalidArgument,
            e if e.is_config_error() => NlStatus::InvalidArgument,
            _ => NlStatus::Runtime,
        };
        Failure(status, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(NlStatus::InvalidArgument, msg.into())
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> NlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            NlStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            NlStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure(NlStatus::NullPointer, format!("{what} is null")))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(NlStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not UTF-8")))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(NlStatus::NullPointer, format!("{what} is null")));
    }
    out.write(value);
    Ok(())
}

unsafe fn write_handle<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(NlStatus::NullPointer, "output handle is null".into()));
    }
    out.write(Box::into_raw(Box::new(value)));
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let s = CString::new(s).map_err(|_| Failure(NlStatus::Runtime, "string has nul byte".into()))?;
    write_out(out, s.into_raw(), "output string")
}

unsafe fn free_handle<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message of the previous call on this thread if it failed, or null. Valid
/// until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn nl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn nl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Static, nul-terminated library version.
#[no_mangle]
pub extern "C" fn nl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// The shipped 20-qubit coupling map.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nl_graph_poughkeepsie(out: *mut *mut NlGraph) -> NlStatus {
    guard(|| write_handle(out, NlGraph(CouplingGraph::poughkeepsie())))
}

/// Parses a `{"n_qubits": n, "edges": [[a, b], ...]}` document.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nl_graph_from_json(json: *const c_char, out: *mut *mut NlGraph) -> NlStatus {
    guard(|| {
        let g = CouplingGraph::from_json_str(read_str(json, "json")?)?;
        write_handle(out, NlGraph(g))
    })
}

/// # Safety
/// `graph` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn nl_graph_free(graph: *mut NlGraph) {
    free_handle(graph);
}

/// Counts linear triples, stars and six-rings.
///
/// # Safety
/// `graph` must be a live handle; the out pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nl_graph_counts(
    graph: *const NlGraph,
    triples: *mut usize,
    stars: *mut usize,
    six_rings: *mut usize,
) -> NlStatus {
    guard(|| {
        let g = &deref(graph, "graph")?.0;
        write_out(triples, enumerate_linear_triples(g).len(), "triples")?;
        write_out(stars, enumerate_stars(g).len(), "stars")?;
        write_out(six_rings, enumerate_six_rings(g).len(), "six_rings")
    })
}

/// The shipped default calibration.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nl_calibration_default(out: *mut *mut NlCalibration) -> NlStatus {
    guard(|| write_handle(out, NlCalibration(DeviceCalibration::default_device())))
}

/// Parses a calibration document.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nl_calibration_from_json(
    json: *const c_char,
    out: *mut *mut NlCalibration,
) -> NlStatus {
    guard(|| {
        let c = DeviceCalibration::from_json_str(read_str(json, "json")?)?;
        write_handle(out, NlCalibration(c))
    })
}

/// Noiseless copy of a calibration, keeping gate durations.
///
/// # Safety
/// `cal` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nl_calibration_noiseless(
    cal: *const NlCalibration,
    out: *mut *mut NlCalibration,
) -> NlStatus {
    guard(|| {
        let c = deref(cal, "calibration")?.0.without_noise();
        write_handle(out, NlCalibration(c))
    })
}

/// # Safety
/// `cal` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn nl_calibration_free(cal: *mut NlCalibration) {
    free_handle(cal);
}

fn strategy(s: NlResetStrategy) -> ResetStrategy {
    match s {
        NlResetStrategy::None => ResetStrategy::None,
        NlResetStrategy::XReset => ResetStrategy::XReset,
        NlResetStrategy::CnotReset => ResetStrategy::CnotReset,
    }
}

fn geometry(k: NlGeometry) -> GeometryKind {
    match k {
        NlGeometry::Linear3Cct => GeometryKind::Linear3Cct,
        NlGeometry::Linear3Ctc => GeometryKind::Linear3Ctc,
        NlGeometry::Star4 => GeometryKind::Star4,
        NlGeometry::Ring6ThreeChain => GeometryKind::Ring6ThreeChain,
        NlGeometry::Ring6OneChains => GeometryKind::Ring6OneChains,
    }
}

fn placements(g: &CouplingGraph, kind: GeometryKind) -> Result<Vec<GeometryPlacement>, Failure> {
    Ok(match kind {
        GeometryKind::Star4 => enumerate_stars(g)
            .iter()
            .flat_map(GeometryPlacement::target_variants)
            .collect(),
        GeometryKind::Ring6ThreeChain | GeometryKind::Ring6OneChains => enumerate_ring_placements(g, kind)?,
        _ => enumerate_linear_triples(g)
            .iter()
            .flat_map(GeometryPlacement::target_variants)
            .filter(|p| p.kind == kind)
            .collect(),
    })
}

/// Number of placements of `kind` on `graph`, counting every target choice.
///
/// # Safety
/// `graph` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nl_placement_count(
    graph: *const NlGraph,
    kind: NlGeometry,
    out: *mut usize,
) -> NlStatus {
    guard(|| {
        let n = placements(&deref(graph, "graph")?.0, geometry(kind))?.len();
        write_out(out, n, "out")
    })
}

/// CNOT chain along `path[0..len]`, control first and target last.
///
/// # Safety
/// `graph` must be a live handle, `path` must point to `len` values and `out`
/// must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nl_circuit_cnot_chain(
    graph: *const NlGraph,
    path: *const usize,
    len: usize,
    reset: NlResetStrategy,
    prep: NlControlPrep,
    out: *mut *mut NlCircuit,
) -> NlStatus {
    guard(|| {
        let g = &deref(graph, "graph")?.0;
        let path = deref(path, "path").map(|p| std::slice::from_raw_parts(p, len))?;
        let prep = match prep {
            NlControlPrep::Zero => ControlPrep::Zero,
            NlControlPrep::One => ControlPrep::One,
            NlControlPrep::Plus => ControlPrep::Plus,
        };
        let built = builder::cnot_chain(g, path, strategy(reset), prep)?;
        write_handle(out, NlCircuit(built))
    })
}

/// Toffoli on the `index`-th placement of `kind`. `basis_input` in `0..8`
/// prepends the preparation of `|Q1 Q2 Q3⟩` (Q1 high bit); a negative value
/// builds the bare gate.
///
/// # Safety
/// `graph` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nl_circuit_ccnot(
    graph: *const NlGraph,
    kind: NlGeometry,
    index: usize,
    reset: NlResetStrategy,
    basis_input: i32,
    out: *mut *mut NlCircuit,
) -> NlStatus {
    guard(|| {
        let g = &deref(graph, "graph")?.0;
        let all = placements(g, geometry(kind))?;
        let p = all
            .get(index)
            .ok_or_else(|| invalid(format!("placement {index} of {}", all.len())))?;
        let input = match basis_input {
            i if i < 0 => CcnotInput::Unknown,
            i @ 0..=7 => CcnotInput::Basis(i as u8),
            i => return Err(invalid(format!("basis input {i} out of range"))),
        };
        let built = builder::ccnot_on_geometry(g, p, strategy(reset), input)?;
        write_handle(out, NlCircuit(built))
    })
}

/// Circuit from its JSON form (`n_qubits`, `ops`, optional `physical`).
///
/// # Safety
/// `json` must be a nul-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nl_circuit_from_json(json: *const c_char, out: *mut *mut NlCircuit) -> NlStatus {
    guard(|| {
        let circuit: Circuit = serde_json::from_str(read_str(json, "json")?).map_err(Error::from)?;
        let built = BuiltCircuit {
            ancilla_target: "0".repeat(circuit.ancilla_wires().len()),
            circuit,
            placement: None,
            expected: None,
        };
        write_handle(out, NlCircuit(built))
    })
}

/// JSON form of a circuit. Free the result with [`nl_string_free`].
///
/// # Safety
/// `circuit` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nl_circuit_to_json(circuit: *const NlCircuit, out: *mut *mut c_char) -> NlStatus {
    guard(|| {
        let json = serde_json::to_string(&deref(circuit, "circuit")?.0.circuit).map_err(Error::from)?;
        write_string(out, json)
    })
}

/// Qubit, CNOT and depth counts of a circuit. Any out pointer may be null.
///
/// # Safety
/// `circuit` must be a live handle; non-null out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn nl_circuit_stats(
    circuit: *const NlCircuit,
    n_qubits: *mut usize,
    cnots: *mut usize,
    depth: *mut usize,
) -> NlStatus {
    guard(|| {
        let b = &deref(circuit, "circuit")?.0;
        for (p, v) in [(n_qubits, b.circuit.n_qubits()), (cnots, b.cnot_count()), (depth, b.depth())] {
            if !p.is_null() {
                p.write(v);
            }
        }
        Ok(())
    })
}

/// Number of two-qubit gates of `circuit` that act on uncoupled device qubits.
///
/// # Safety
/// Both handles must be live and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nl_circuit_violations(
    graph: *const NlGraph,
    circuit: *const NlCircuit,
    out: *mut usize,
) -> NlStatus {
    guard(|| {
        let g = &deref(graph, "graph")?.0;
        let c = &deref(circuit, "circuit")?.0.circuit;
        write_out(out, validate_circuit(g, c).len(), "out")
    })
}

/// Desired output string of the computational wires, if the input was
/// classical; writes null otherwise.
///
/// # Safety
/// `circuit` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nl_circuit_expected(circuit: *const NlCircuit, out: *mut *mut c_char) -> NlStatus {
    guard(|| match &deref(circuit, "circuit")?.0.expected {
        Some(s) => write_string(out, s.clone()),
        None => write_out(out, ptr::null_mut(), "out"),
    })
}

/// # Safety
/// `circuit` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn nl_circuit_free(circuit: *mut NlCircuit) {
    free_handle(circuit);
}

/// Samples `shots` noisy runs and writes the counts as a JSON object mapping
/// bitstrings (wire 0 first) to counts. Unmeasured circuits are measured on
/// every wire.
///
/// # Safety
/// Handles must be live and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nl_simulate_counts_json(
    circuit: *const NlCircuit,
    cal: *const NlCalibration,
    shots: u64,
    seed: u64,
    out: *mut *mut c_char,
) -> NlStatus {
    guard(|| {
        let c = &deref(circuit, "circuit")?.0.circuit;
        let cal = &deref(cal, "calibration")?.0;
        let c = if c.has_measurements() { c.clone() } else { c.with_measure_all() };
        let counts = run_shots(&schedule(&c, cal.durations()), cal, shots, seed)?;
        write_string(out, serde_json::to_string(&counts).map_err(Error::from)?)
    })
}

/// Noiseless outcome distribution of 3-bit phase estimation at phase `phi`.
///
/// # Safety
/// `out` must point to 8 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn nl_qpe_distribution(phi: f64, out: *mut f64) -> NlStatus {
    guard(|| {
        if !phi.is_finite() {
            return Err(invalid("phase must be finite"));
        }
        let dist = theoretical_qpe_distribution(phi);
        deref(out, "out")?;
        ptr::copy_nonoverlapping(dist.as_ptr(), out, dist.len());
        Ok(())
    })
}

/// Weighted fit of `e^{-t/T}` to `n` points.
///
/// # Safety
/// `t`, `p` and `shots` must each point to `n` values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn nl_fit_exponential(
    t: *const f64,
    p: *const f64,
    shots: *const u64,
    n: usize,
    out: *mut NlExpFit,
) -> NlStatus {
    guard(|| {
        let t = std::slice::from_raw_parts(deref(t, "t")?, n);
        let p = std::slice::from_raw_parts(deref(p, "p")?, n);
        let shots = std::slice::from_raw_parts(deref(shots, "shots")?, n);
        let samples: Vec<Sample> = (0..n).map(|i| Sample::new(t[i], p[i], shots[i])).collect();
        let fit = fit_exponential(&samples)?;
        let value = fit.param("T").unwrap_or(f64::NAN);
        let result = NlExpFit {
            t: value,
            t_stderr: fit.covariance.first().map_or(f64::NAN, |r| r[0].sqrt()),
            r_squared: fit.r_squared.unwrap_or(f64::NAN),
            converged: i32::from(fit.status == FitStatus::Converged),
        };
        write_out(out, result, "out")
    })
}
