//! Gate and circuit types shared by the simulators, the builders and the
//! noise scheduler.
//!
//! Wire 0 is the most significant bit of every basis label, so a 3-wire
//! register reads `|q0 q1 q2⟩` left to right.

use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Primitive operations. CCNOT, SWAP and controlled phases are compositions
/// emitted by [`crate::builder`], never primitives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "lowercase")]
pub enum GateKind {
    X,
    H,
    T,
    Tdg,
    S,
    Sdg,
    /// `diag(1, e^{iφ})`, angle in radians.
    Rphi {
        angle: f64,
    },
    Cnot,
    Measure,
    /// Explicit idle interval on one wire; identity as a unitary.
    Delay {
        seconds: f64,
    },
}

impl GateKind {
    pub fn arity(&self) -> usize {
        match self {
            GateKind::Cnot => 2,
            _ => 1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GateKind::X => "x",
            GateKind::H => "h",
            GateKind::T => "t",
            GateKind::Tdg => "tdg",
            GateKind::S => "s",
            GateKind::Sdg => "sdg",
            GateKind::Rphi { .. } => "rphi",
            GateKind::Cnot => "cnot",
            GateKind::Measure => "measure",
            GateKind::Delay { .. } => "delay",
        }
    }
}

/// Brings an angle into `(-2π, 2π)`; the sign of the input is kept.
pub fn normalize_angle(angle: f64) -> f64 {
    angle % TAU
}

/// One gate applied to specific wires. For CNOT the operands are
/// `[control, target]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateOp {
    #[serde(flatten)]
    pub kind: GateKind,
    pub qubits: Vec<usize>,
}

impl GateOp {
    fn single(kind: GateKind, q: usize) -> Self {
        GateOp {
            kind,
            qubits: vec![q],
        }
    }

    pub fn x(q: usize) -> Self {
        Self::single(GateKind::X, q)
    }
    pub fn h(q: usize) -> Self {
        Self::single(GateKind::H, q)
    }
    pub fn t(q: usize) -> Self {
        Self::single(GateKind::T, q)
    }
    pub fn tdg(q: usize) -> Self {
        Self::single(GateKind::Tdg, q)
    }
    pub fn s(q: usize) -> Self {
        Self::single(GateKind::S, q)
    }
    pub fn sdg(q: usize) -> Self {
        Self::single(GateKind::Sdg, q)
    }
    pub fn rphi(q: usize, angle: f64) -> Self {
        Self::single(
            GateKind::Rphi {
                angle: normalize_angle(angle),
            },
            q,
        )
    }
    pub fn cnot(control: usize, target: usize) -> Self {
        GateOp {
            kind: GateKind::Cnot,
            qubits: vec![control, target],
        }
    }
    pub fn measure(q: usize) -> Self {
        Self::single(GateKind::Measure, q)
    }
    pub fn delay(q: usize, seconds: f64) -> Self {
        Self::single(GateKind::Delay { seconds }, q)
    }

    pub fn is_two_qubit(&self) -> bool {
        self.kind.arity() == 2
    }

    /// Checks operand count, range and distinctness against a register size.
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let expected = self.kind.arity();
        if self.qubits.len() != expected {
            return Err(Error::OperandCount {
                gate: self.kind.name().to_string(),
                expected,
                got: self.qubits.len(),
            });
        }
        for (i, &q) in self.qubits.iter().enumerate() {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange { qubit: q, n_qubits });
            }
            if self.qubits[..i].contains(&q) {
                return Err(Error::DuplicateOperand {
                    gate: self.kind.name().to_string(),
                    qubit: q,
                });
            }
        }
        if let GateKind::Delay { seconds } = self.kind {
            if !(seconds >= 0.0) {
                return Err(Error::NegativeDuration(seconds));
            }
        }
        Ok(())
    }
}

impl fmt::Display for GateOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GateKind::Rphi { angle } => write!(f, "rphi({angle})")?,
            GateKind::Delay { seconds } => write!(f, "delay({seconds}s)")?,
            k => f.write_str(k.name())?,
        }
        for q in &self.qubits {
            write!(f, " q{q}")?;
        }
        Ok(())
    }
}

/// Bookkeeping tag used when scoring f1/f2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Control,
    Target,
    Ancilla,
    Computational,
}

impl Role {
    pub fn is_ancilla(self) -> bool {
        self == Role::Ancilla
    }
}

/// An ordered gate list over `n_qubits` wires.
///
/// `physical[w]` is the device qubit that wire `w` runs on; it is the
/// identity unless the circuit was built on a placement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CircuitRepr")]
pub struct Circuit {
    n_qubits: usize,
    ops: Vec<GateOp>,
    roles: Vec<Role>,
    physical: Vec<usize>,
}

#[derive(Deserialize)]
struct CircuitRepr {
    n_qubits: usize,
    ops: Vec<GateOp>,
    #[serde(default)]
    roles: Option<Vec<Role>>,
    #[serde(default)]
    physical: Option<Vec<usize>>,
}

impl TryFrom<CircuitRepr> for Circuit {
    type Error = Error;

    fn try_from(repr: CircuitRepr) -> Result<Self> {
        let mut c = Circuit::new(repr.n_qubits);
        if let Some(roles) = repr.roles {
            c.set_roles(roles)?;
        }
        if let Some(physical) = repr.physical {
            c.set_physical(physical)?;
        }
        for op in repr.ops {
            c.push(op)?;
        }
        Ok(c)
    }
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Circuit {
            n_qubits,
            ops: Vec::new(),
            roles: vec![Role::Computational; n_qubits],
            physical: (0..n_qubits).collect(),
        }
    }

    pub fn from_ops(n_qubits: usize, ops: impl IntoIterator<Item = GateOp>) -> Result<Self> {
        let mut c = Circuit::new(n_qubits);
        for op in ops {
            c.push(op)?;
        }
        Ok(c)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn ops(&self) -> &[GateOp] {
        &self.ops
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn physical(&self) -> &[usize] {
        &self.physical
    }

    /// Appends an op, keeping measurements terminal.
    pub fn push(&mut self, op: GateOp) -> Result<()> {
        op.validate(self.n_qubits)?;
        if op.kind != GateKind::Measure && self.has_measurements() {
            return Err(Error::MeasureNotLast);
        }
        self.ops.push(op);
        Ok(())
    }

    pub fn extend(&mut self, ops: impl IntoIterator<Item = GateOp>) -> Result<()> {
        for op in ops {
            self.push(op)?;
        }
        Ok(())
    }

    pub fn set_roles(&mut self, roles: Vec<Role>) -> Result<()> {
        if roles.len() != self.n_qubits {
            return Err(Error::QubitCountMismatch {
                expected: self.n_qubits,
                got: roles.len(),
            });
        }
        self.roles = roles;
        Ok(())
    }

    pub fn set_physical(&mut self, physical: Vec<usize>) -> Result<()> {
        if physical.len() != self.n_qubits {
            return Err(Error::QubitCountMismatch {
                expected: self.n_qubits,
                got: physical.len(),
            });
        }
        for (i, p) in physical.iter().enumerate() {
            if physical[..i].contains(p) {
                return Err(Error::InvalidPlacement(format!(
                    "device qubit {p} mapped to two wires"
                )));
            }
        }
        self.physical = physical;
        Ok(())
    }

    pub fn has_measurements(&self) -> bool {
        self.ops.iter().any(|op| op.kind == GateKind::Measure)
    }

    /// Returns a copy with a terminal measurement on every wire.
    pub fn with_measure_all(&self) -> Self {
        let mut c = self.clone();
        c.ops.retain(|op| op.kind != GateKind::Measure);
        c.ops.extend((0..self.n_qubits).map(GateOp::measure));
        c
    }

    /// The circuit without measurements.
    pub fn unitary_part(&self) -> Self {
        let mut c = self.clone();
        c.ops.retain(|op| op.kind != GateKind::Measure);
        c
    }

    /// Inverse circuit (measurements dropped).
    pub fn inverse(&self) -> Self {
        let mut c = self.unitary_part();
        c.ops.reverse();
        for op in &mut c.ops {
            op.kind = match op.kind {
                GateKind::T => GateKind::Tdg,
                GateKind::Tdg => GateKind::T,
                GateKind::S => GateKind::Sdg,
                GateKind::Sdg => GateKind::S,
                GateKind::Rphi { angle } => GateKind::Rphi {
                    angle: normalize_angle(-angle),
                },
                k => k,
            };
        }
        c
    }

    pub fn count(&self, pred: impl Fn(&GateKind) -> bool) -> usize {
        self.ops.iter().filter(|op| pred(&op.kind)).count()
    }

    pub fn cnot_count(&self) -> usize {
        self.count(|k| *k == GateKind::Cnot)
    }

    pub fn x_count(&self) -> usize {
        self.count(|k| *k == GateKind::X)
    }

    /// Number of ASAP layers, ignoring durations and measurements.
    pub fn depth(&self) -> usize {
        let mut frontier = vec![0usize; self.n_qubits];
        let mut depth = 0;
        for op in self.ops.iter().filter(|op| op.kind != GateKind::Measure) {
            let layer = op.qubits.iter().map(|&q| frontier[q]).max().unwrap_or(0);
            for &q in &op.qubits {
                frontier[q] = layer + 1;
            }
            depth = depth.max(layer + 1);
        }
        depth
    }

    /// Wires tagged as anything other than ancilla, in wire order.
    pub fn computational_wires(&self) -> Vec<usize> {
        (0..self.n_qubits)
            .filter(|&w| !self.roles[w].is_ancilla())
            .collect()
    }

    pub fn ancilla_wires(&self) -> Vec<usize> {
        (0..self.n_qubits)
            .filter(|&w| self.roles[w].is_ancilla())
            .collect()
    }
}
