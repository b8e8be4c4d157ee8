//! Circuit families on restricted geometries: CNOT chains, SWAP-based and
//! ancilla-mediated two-qubit gates, Toffoli, the three-qubit inverse QFT and
//! phase-estimation preparation.
//!
//! Builders emit compact circuits: wire `w` runs on device qubit
//! `placement.wires()[w]` and the circuit's `physical` map records that.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, GateKind, GateOp, Role};
use crate::error::{Error, Result};
use crate::topology::{validate_circuit, CouplingGraph, GeometryKind, GeometryPlacement};

/// How ancilla are returned to `|0⟩` after carrying a control value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResetStrategy {
    None,
    XReset,
    CnotReset,
}

impl ResetStrategy {
    pub const ALL: [ResetStrategy; 3] = [
        ResetStrategy::None,
        ResetStrategy::XReset,
        ResetStrategy::CnotReset,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ResetStrategy::None => "none",
            ResetStrategy::XReset => "x-reset",
            ResetStrategy::CnotReset => "cnot-reset",
        }
    }
}

impl fmt::Display for ResetStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ResetStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ResetStrategy::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown reset strategy {s:?}")))
    }
}

/// State the control qubit is prepared in before a chain or star CNOT.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControlPrep {
    Zero,
    One,
    /// `|+⟩`; a declared superposition.
    Plus,
}

/// Computational input to a Toffoli placement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcnotInput {
    /// Basis state `|Q1 Q2 Q3⟩` packed with `Q1` as the high bit; the
    /// circuit starts with the X gates that prepare it.
    Basis(u8),
    /// No preparation; the circuit is the bare gate.
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BuiltCircuit {
    pub circuit: Circuit,
    /// `None` for the fully connected ideal forms.
    pub placement: Option<GeometryPlacement>,
    /// Desired final ancilla string `A′`, in ancilla wire order.
    pub ancilla_target: String,
    /// Desired final string `Q′` of the non-ancilla wires when the input is
    /// classical.
    pub expected: Option<String>,
}

impl BuiltCircuit {
    pub fn cnot_count(&self) -> usize {
        self.circuit.cnot_count()
    }

    pub fn x_count(&self) -> usize {
        self.circuit.x_count()
    }

    pub fn depth(&self) -> usize {
        self.circuit.depth()
    }
}

/// CNOT(a→b), CNOT(b→a), CNOT(a→b).
pub fn swap_via_cnots(a: usize, b: usize) -> [GateOp; 3] {
    [GateOp::cnot(a, b), GateOp::cnot(b, a), GateOp::cnot(a, b)]
}

/// Controlled `Rphi(phi)` from two CNOTs and three phase gates.
pub fn control_rphi(control: usize, target: usize, phi: f64) -> [GateOp; 5] {
    [
        GateOp::rphi(target, phi / 2.0),
        GateOp::cnot(control, target),
        GateOp::rphi(target, -phi / 2.0),
        GateOp::cnot(control, target),
        GateOp::rphi(control, phi / 2.0),
    ]
}

/// Six-CNOT, seven-T Toffoli with `q1`, `q2` controlling `q3`.
pub fn ccnot_ideal(q1: usize, q2: usize, q3: usize) -> Vec<GateOp> {
    vec![
        GateOp::h(q3),
        GateOp::cnot(q2, q3),
        GateOp::tdg(q3),
        GateOp::cnot(q1, q3),
        GateOp::t(q3),
        GateOp::cnot(q2, q3),
        GateOp::tdg(q3),
        GateOp::cnot(q1, q3),
        GateOp::t(q2),
        GateOp::t(q3),
        GateOp::cnot(q1, q2),
        GateOp::h(q3),
        GateOp::t(q1),
        GateOp::tdg(q2),
        GateOp::cnot(q1, q2),
    ]
}

/// Hadamards and controlled phases of the three-qubit inverse QFT, with no
/// final qubit reversal. Phase `kπ/4` prepared by [`qpe_prep`] reads out as
/// [`qpe_outcome_label`]`(k)`.
pub fn qft_dagger_ideal(q1: usize, q2: usize, q3: usize) -> Vec<GateOp> {
    let mut ops = vec![GateOp::h(q1)];
    ops.extend(control_rphi(q2, q1, -FRAC_PI_2));
    ops.extend(control_rphi(q3, q1, -FRAC_PI_4));
    ops.push(GateOp::h(q2));
    ops.extend(control_rphi(q3, q2, -FRAC_PI_2));
    ops.push(GateOp::h(q3));
    ops
}

/// Phase-kickback stand-in: `H` on all three wires, then `Rphi(4φ)`,
/// `Rphi(2φ)`, `Rphi(φ)` on wires 0, 1, 2.
pub fn qpe_prep(phi: f64) -> Vec<GateOp> {
    vec![
        GateOp::h(0),
        GateOp::h(1),
        GateOp::h(2),
        GateOp::rphi(0, 4.0 * phi),
        GateOp::rphi(1, 2.0 * phi),
        GateOp::rphi(2, phi),
    ]
}

/// Readout `Q1 Q2 Q3` for perfect phase `kπ/4`: `Q1` carries the low bit.
pub fn qpe_outcome_label(k: usize) -> String {
    (0..3).map(|b| if (k >> b) & 1 == 1 { '1' } else { '0' }).collect()
}

/// Inverse of [`qpe_outcome_label`].
pub fn qpe_outcome_index(label: &str) -> Result<usize> {
    if label.len() != 3 || !label.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(Error::InvalidLabel(label.to_string()));
    }
    Ok(label
        .bytes()
        .enumerate()
        .map(|(b, c)| usize::from(c == b'1') << b)
        .sum())
}

/// Emits gates while tracking which wires hold a known classical bit, so
/// that X resets can be placed (and refused) correctly.
struct Emitter {
    ops: Vec<GateOp>,
    known: Vec<Option<bool>>,
}

impl Emitter {
    fn new(known: Vec<Option<bool>>) -> Self {
        Emitter {
            ops: Vec::new(),
            known,
        }
    }

    fn push(&mut self, op: GateOp) {
        match op.kind {
            GateKind::X => {
                let w = op.qubits[0];
                self.known[w] = self.known[w].map(|b| !b);
            }
            GateKind::H => self.known[op.qubits[0]] = None,
            GateKind::Cnot => {
                let (c, t) = (op.qubits[0], op.qubits[1]);
                self.known[t] = match (self.known[c], self.known[t]) {
                    (Some(false), v) => v,
                    (Some(true), v) => v.map(|b| !b),
                    (None, _) => None,
                };
            }
            _ => {}
        }
        self.ops.push(op);
    }

    fn extend(&mut self, ops: impl IntoIterator<Item = GateOp>) {
        for op in ops {
            self.push(op);
        }
    }

    /// X on `wire` if it holds a classical `1`; nothing if `0`.
    fn x_reset(&mut self, wire: usize) -> Result<()> {
        match self.known[wire] {
            Some(true) => {
                self.push(GateOp::x(wire));
                Ok(())
            }
            Some(false) => Ok(()),
            None => Err(Error::SuperpositionReset(format!(
                "wire {wire} may hold a superposition; x-reset needs a classical control"
            ))),
        }
    }

    /// CNOT from `path[0]` to its last entry through the interior ancilla.
    fn chain_cnot(&mut self, path: &[usize], reset: ResetStrategy) -> Result<()> {
        for i in 0..path.len() - 1 {
            self.push(GateOp::cnot(path[i], path[i + 1]));
            if reset == ResetStrategy::XReset && i >= 1 {
                self.x_reset(path[i])?;
            }
        }
        if reset == ResetStrategy::CnotReset {
            for i in (0..path.len().saturating_sub(2)).rev() {
                self.push(GateOp::cnot(path[i], path[i + 1]));
            }
        }
        Ok(())
    }

    fn bits(&self, wires: impl IntoIterator<Item = usize>) -> Option<String> {
        wires
            .into_iter()
            .map(|w| self.known[w].map(|b| if b { '1' } else { '0' }))
            .collect()
    }
}

fn finish(
    g: &CouplingGraph,
    placement: Option<GeometryPlacement>,
    physical: Vec<usize>,
    roles: Vec<Role>,
    ops: Vec<GateOp>,
    ancilla_target: String,
    expected: Option<String>,
) -> Result<BuiltCircuit> {
    let mut circuit = Circuit::new(physical.len());
    circuit.set_physical(physical)?;
    circuit.set_roles(roles)?;
    circuit.extend(ops)?;
    if placement.is_some() {
        if let Some(v) = validate_circuit(g, &circuit).first() {
            return Err(Error::InvalidPlacement(format!(
                "emitted {} on uncoupled qubits {:?}",
                v.op, v.qubits
            )));
        }
    }
    Ok(BuiltCircuit {
        circuit,
        placement,
        ancilla_target,
        expected,
    })
}

/// Two-wire SWAP on adjacent device qubits `a`, `b`.
pub fn swap_on(g: &CouplingGraph, a: usize, b: usize) -> Result<BuiltCircuit> {
    if !g.has_edge(a, b) {
        return Err(Error::NotAdjacent(a, b));
    }
    let placement = GeometryPlacement::chain(&[a, b])?;
    finish(
        g,
        Some(placement),
        vec![a, b],
        vec![Role::Computational; 2],
        swap_via_cnots(0, 1).to_vec(),
        String::new(),
        None,
    )
}

fn linear_wires(g: &CouplingGraph, placement: &GeometryPlacement) -> Result<[usize; 3]> {
    placement.validate(g)?;
    placement.line().ok_or_else(|| {
        Error::InvalidPlacement(format!("{} is not a linear placement", placement.kind.name()))
    })
}

/// CNOT between the two ends of a line, moving the control next to the
/// target and back. Wires are `[control, center, target]`; the center is
/// tagged as an ancilla that must come back unchanged.
pub fn distant_cnot_via_swaps(
    g: &CouplingGraph,
    placement: &GeometryPlacement,
    control: usize,
    target: usize,
) -> Result<BuiltCircuit> {
    let [e1, m, e2] = linear_wires(g, placement)?;
    if !((control, target) == (e1, e2) || (control, target) == (e2, e1)) {
        return Err(Error::InvalidPlacement(format!(
            "({control}, {target}) are not the ends of line {e1}-{m}-{e2}"
        )));
    }
    let mut ops = swap_via_cnots(0, 1).to_vec();
    ops.push(GateOp::cnot(1, 2));
    ops.extend(swap_via_cnots(1, 0));
    finish(
        g,
        Some(placement.clone()),
        vec![control, m, target],
        vec![Role::Control, Role::Ancilla, Role::Target],
        ops,
        "0".into(),
        None,
    )
}

/// Controlled `Rphi(phi)` between the ends of a line by the same SWAP
/// sandwich. Wires are `[end, center, end]` in line order.
pub fn distant_crphi_via_swaps(
    g: &CouplingGraph,
    placement: &GeometryPlacement,
    phi: f64,
) -> Result<BuiltCircuit> {
    let [e1, m, e2] = linear_wires(g, placement)?;
    let mut ops = swap_via_cnots(0, 1).to_vec();
    ops.extend(control_rphi(1, 2, phi));
    ops.extend(swap_via_cnots(1, 0));
    finish(
        g,
        Some(placement.clone()),
        vec![e1, m, e2],
        vec![Role::Control, Role::Ancilla, Role::Target],
        ops,
        "0".into(),
        None,
    )
}

fn prep_ops(prep: ControlPrep, wire: usize) -> Vec<GateOp> {
    match prep {
        ControlPrep::Zero => vec![],
        ControlPrep::One => vec![GateOp::x(wire)],
        ControlPrep::Plus => vec![GateOp::h(wire)],
    }
}

fn require_reset_for(prep: ControlPrep, strategy: ResetStrategy) -> Result<()> {
    if prep == ControlPrep::Plus && strategy != ResetStrategy::CnotReset {
        return Err(Error::SuperpositionReset(format!(
            "control declared in superposition needs cnot-reset, not {strategy}"
        )));
    }
    Ok(())
}

/// CNOT chain along `path` (control first, target last) with the control
/// prepared per `prep`. Wires follow the path.
pub fn cnot_chain(
    g: &CouplingGraph,
    path: &[usize],
    strategy: ResetStrategy,
    prep: ControlPrep,
) -> Result<BuiltCircuit> {
    let placement = GeometryPlacement::chain(path)?;
    placement.validate(g)?;
    require_reset_for(prep, strategy)?;
    let n = path.len();
    let mut em = Emitter::new(vec![Some(false); n]);
    em.extend(prep_ops(prep, 0));
    let wires: Vec<usize> = (0..n).collect();
    em.chain_cnot(&wires, strategy)?;
    let ancilla_target = match strategy {
        ResetStrategy::None => em
            .bits(1..n - 1)
            .expect("classical control leaves classical ancilla"),
        _ => "0".repeat(n - 2),
    };
    let expected = em.bits([0, n - 1]);
    let mut roles = vec![Role::Ancilla; n];
    roles[0] = Role::Control;
    roles[n - 1] = Role::Target;
    finish(
        g,
        Some(placement),
        path.to_vec(),
        roles,
        em.ops,
        ancilla_target,
        expected,
    )
}

/// CNOT between two outer qubits of a star through its center. Wires are
/// `[control, target, center]`.
pub fn star_cnot(
    g: &CouplingGraph,
    placement: &GeometryPlacement,
    control: usize,
    target: usize,
    strategy: ResetStrategy,
    prep: ControlPrep,
) -> Result<BuiltCircuit> {
    if placement.kind != GeometryKind::Star4 {
        return Err(Error::InvalidPlacement(format!(
            "{} is not a star",
            placement.kind.name()
        )));
    }
    placement.validate(g)?;
    if strategy == ResetStrategy::None {
        return Err(Error::Unsupported("star CNOT needs x-reset or cnot-reset".into()));
    }
    require_reset_for(prep, strategy)?;
    let c = &placement.computational;
    if control == target || !c.contains(&control) || !c.contains(&target) {
        return Err(Error::InvalidPlacement(format!(
            "({control}, {target}) must be distinct outer qubits of {c:?}"
        )));
    }
    let mut em = Emitter::new(vec![Some(false); 3]);
    em.extend(prep_ops(prep, 0));
    em.chain_cnot(&[0, 2, 1], strategy)?;
    let expected = em.bits([0, 1]);
    finish(
        g,
        Some(placement.clone()),
        vec![control, target, placement.ancilla[0]],
        vec![Role::Control, Role::Target, Role::Ancilla],
        em.ops,
        "0".into(),
        expected,
    )
}

fn toffoli_bits(input: u8) -> String {
    let (q1, q2, q3) = ((input >> 2) & 1, (input >> 1) & 1, input & 1);
    format!("{q1}{q2}{}", q3 ^ (q1 & q2))
}

/// Toffoli on a placement, with every CNOT between uncoupled qubits routed
/// per the placement kind. Wires are `Q1, Q2, Q3` then the ancilla.
///
/// Linear kinds take [`ResetStrategy::None`]; stars and rings take
/// `XReset` or `CnotReset`.
pub fn ccnot_on_geometry(
    g: &CouplingGraph,
    placement: &GeometryPlacement,
    reset: ResetStrategy,
    input: CcnotInput,
) -> Result<BuiltCircuit> {
    placement.validate(g)?;
    let linear = matches!(
        placement.kind,
        GeometryKind::Linear3Cct | GeometryKind::Linear3Ctc
    );
    match placement.kind {
        GeometryKind::ChainPath => {
            return Err(Error::Unsupported("Toffoli on a chain placement".into()))
        }
        _ if linear && reset != ResetStrategy::None => {
            return Err(Error::Unsupported(format!(
                "{} has no ancilla to reset",
                placement.kind.name()
            )))
        }
        _ if !linear && reset == ResetStrategy::None => {
            return Err(Error::Unsupported(format!(
                "{} needs x-reset or cnot-reset",
                placement.kind.name()
            )))
        }
        _ => {}
    }
    let wires = placement.wires();
    let n = wires.len();
    let mut known = vec![Some(false); n];
    let mut prep = Vec::new();
    if let CcnotInput::Basis(bits) = input {
        if bits > 7 {
            return Err(Error::InvalidState(format!("Toffoli input {bits} exceeds 3 bits")));
        }
        for w in 0..3 {
            if (bits >> (2 - w)) & 1 == 1 {
                prep.push(GateOp::x(w));
            }
        }
    } else {
        known[..3].fill(None);
    }
    let mut em = Emitter::new(known);
    em.extend(prep);
    let coupled = |a: usize, b: usize| g.has_edge(wires[a], wires[b]);
    for op in ccnot_ideal(0, 1, 2) {
        if !op.is_two_qubit() || coupled(op.qubits[0], op.qubits[1]) {
            em.push(op);
            continue;
        }
        let (c, t) = (op.qubits[0], op.qubits[1]);
        match placement.kind {
            GeometryKind::Linear3Cct | GeometryKind::Linear3Ctc => {
                // The target visits the center and returns.
                let m = 3 - c - t;
                em.extend(swap_via_cnots(t, m));
                em.push(GateOp::cnot(c, m));
                em.extend(swap_via_cnots(m, t));
            }
            GeometryKind::Star4 => em.chain_cnot(&[c, 3, t], reset)?,
            GeometryKind::Ring6ThreeChain => {
                let path = if c == 0 { [0, 3, 4, 5, 2] } else { [2, 5, 4, 3, 0] };
                em.chain_cnot(&path, reset)?;
            }
            GeometryKind::Ring6OneChains => {
                let mediator = match (c.min(t), c.max(t)) {
                    (0, 1) => 3,
                    (1, 2) => 4,
                    _ => 5,
                };
                em.chain_cnot(&[c, mediator, t], reset)?;
            }
            GeometryKind::ChainPath => unreachable!("rejected above"),
        }
    }
    let n_anc = n - 3;
    let mut roles = vec![Role::Control, Role::Control, Role::Target];
    roles.extend(std::iter::repeat_n(Role::Ancilla, n_anc));
    let expected = match input {
        CcnotInput::Basis(bits) => Some(toffoli_bits(bits)),
        CcnotInput::Unknown => None,
    };
    finish(
        g,
        Some(placement.clone()),
        wires,
        roles,
        em.ops,
        "0".repeat(n_anc),
        expected,
    )
}

fn qft_ops(g: &CouplingGraph, placement: &GeometryPlacement) -> Result<Vec<GateOp>> {
    let wires = placement.wires();
    let coupled = |a: usize, b: usize| g.has_edge(wires[a], wires[b]);
    let mut ops = Vec::new();
    match placement.kind {
        GeometryKind::Linear3Cct | GeometryKind::Linear3Ctc => {
            let crphi = |c: usize, t: usize, phi: f64, ops: &mut Vec<GateOp>| {
                if coupled(c, t) {
                    ops.extend(control_rphi(c, t, phi));
                } else {
                    let m = 3 - c - t;
                    ops.extend(swap_via_cnots(c, m));
                    ops.extend(control_rphi(m, t, phi));
                    ops.extend(swap_via_cnots(m, c));
                }
            };
            ops.push(GateOp::h(0));
            crphi(1, 0, -FRAC_PI_2, &mut ops);
            crphi(2, 0, -FRAC_PI_4, &mut ops);
            ops.push(GateOp::h(1));
            crphi(2, 1, -FRAC_PI_2, &mut ops);
            ops.push(GateOp::h(2));
        }
        GeometryKind::Star4 => {
            // One copy of Q1 on the center serves both of its phases.
            ops.push(GateOp::h(0));
            ops.push(GateOp::cnot(0, 3));
            ops.extend(control_rphi(3, 1, -FRAC_PI_2));
            ops.extend(control_rphi(3, 2, -FRAC_PI_4));
            ops.push(GateOp::cnot(0, 3));
            ops.push(GateOp::h(1));
            ops.push(GateOp::cnot(1, 3));
            ops.extend(control_rphi(3, 2, -FRAC_PI_2));
            ops.push(GateOp::cnot(1, 3));
            ops.push(GateOp::h(2));
        }
        GeometryKind::Ring6ThreeChain => {
            let copy = [GateOp::cnot(0, 3), GateOp::cnot(3, 4), GateOp::cnot(4, 5)];
            ops.push(GateOp::h(0));
            ops.extend(control_rphi(1, 0, -FRAC_PI_2));
            ops.extend(copy.iter().cloned());
            ops.extend(control_rphi(5, 2, -FRAC_PI_4));
            ops.extend(copy.iter().rev().cloned());
            ops.push(GateOp::h(1));
            ops.extend(control_rphi(2, 1, -FRAC_PI_2));
            ops.push(GateOp::h(2));
        }
        kind => {
            return Err(Error::Unsupported(format!(
                "inverse QFT on {}",
                kind.name()
            )))
        }
    }
    Ok(ops)
}

/// Three-qubit inverse QFT, ideal (`None`, fully connected) or on a linear,
/// star or three-chain ring placement. Ancilla are copied into and back out
/// of with CNOTs, so they end in `|0⟩` for any input.
pub fn qft_dagger_3(
    g: &CouplingGraph,
    placement: Option<&GeometryPlacement>,
) -> Result<BuiltCircuit> {
    build_qft(g, placement, Vec::new())
}

/// [`qpe_prep`] followed by [`qft_dagger_3`].
pub fn qpe_circuit(
    g: &CouplingGraph,
    placement: Option<&GeometryPlacement>,
    phi: f64,
) -> Result<BuiltCircuit> {
    build_qft(g, placement, qpe_prep(phi))
}

fn build_qft(
    g: &CouplingGraph,
    placement: Option<&GeometryPlacement>,
    prep: Vec<GateOp>,
) -> Result<BuiltCircuit> {
    let (physical, mut ops) = match placement {
        None => ((0..3).collect::<Vec<_>>(), qft_dagger_ideal(0, 1, 2)),
        Some(p) => {
            p.validate(g)?;
            (p.wires(), qft_ops(g, p)?)
        }
    };
    ops.splice(0..0, prep);
    let n_anc = physical.len() - 3;
    let mut roles = vec![Role::Computational; 3];
    roles.extend(std::iter::repeat_n(Role::Ancilla, n_anc));
    finish(
        g,
        placement.cloned(),
        physical,
        roles,
        ops,
        "0".repeat(n_anc),
        None,
    )
}
