//! ASAP layering of a circuit into timed layers.

use serde::Serialize;

use crate::circuit::{Circuit, GateKind, GateOp, Role};
use crate::noise::calibration::DurationModel;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Layer {
    pub ops: Vec<GateOp>,
    /// Seconds; the longest member op.
    pub duration: f64,
}

impl Layer {
    pub fn is_measurement(&self) -> bool {
        self.ops
            .iter()
            .any(|op| matches!(op.kind, GateKind::Measure))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduledCircuit {
    n_qubits: usize,
    layers: Vec<Layer>,
    roles: Vec<Role>,
    physical: Vec<usize>,
}

impl ScheduledCircuit {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }
    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }
    pub fn roles(&self) -> &[Role] {
        &self.roles
    }
    /// Device qubit behind each wire.
    pub fn physical(&self) -> &[usize] {
        &self.physical
    }
    pub fn total_duration(&self) -> f64 {
        self.layers.iter().map(|l| l.duration).sum()
    }
    /// Ops in layer order.
    pub fn flatten(&self) -> impl Iterator<Item = &GateOp> {
        self.layers.iter().flat_map(|l| l.ops.iter())
    }
}

pub fn op_duration(op: &GateOp, durations: &DurationModel) -> f64 {
    match op.kind {
        GateKind::Measure => durations.measurement,
        GateKind::Delay { seconds } => seconds,
        GateKind::Cnot => durations.two_qubit_gate,
        _ => durations.single_qubit_gate,
    }
}

/// Each op lands in the earliest layer after every earlier op sharing a
/// qubit. Measurements all go into one final layer.
pub fn schedule(circuit: &Circuit, durations: &DurationModel) -> ScheduledCircuit {
    let n = circuit.n_qubits();
    let mut next_free = vec![0usize; n];
    let mut layers: Vec<Layer> = Vec::new();
    let mut measures = Vec::new();
    for op in circuit.ops() {
        if matches!(op.kind, GateKind::Measure) {
            measures.push(op.clone());
            continue;
        }
        let slot = op.qubits.iter().map(|&q| next_free[q]).max().unwrap_or(0);
        if slot == layers.len() {
            layers.push(Layer {
                ops: Vec::new(),
                duration: 0.0,
            });
        }
        let d = op_duration(op, durations);
        let layer = &mut layers[slot];
        layer.duration = layer.duration.max(d);
        layer.ops.push(op.clone());
        for &q in &op.qubits {
            next_free[q] = slot + 1;
        }
    }
    if !measures.is_empty() {
        layers.push(Layer {
            ops: measures,
            duration: durations.measurement,
        });
    }
    ScheduledCircuit {
        n_qubits: n,
        layers,
        roles: circuit.roles().to_vec(),
        physical: circuit.physical().to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dm() -> DurationModel {
        DurationModel::default()
    }

    #[test]
    fn disjoint_ops_share_a_layer() {
        let c = Circuit::from_ops(2, [GateOp::x(0), GateOp::x(1)]).unwrap();
        let s = schedule(&c, &dm());
        assert_eq!(s.layers().len(), 1);
        assert!((s.total_duration() - 100e-9).abs() < 1e-18);
    }

    #[test]
    fn shared_qubit_serializes() {
        let c = Circuit::from_ops(2, [GateOp::x(0), GateOp::cnot(0, 1)]).unwrap();
        let s = schedule(&c, &dm());
        let d: Vec<f64> = s.layers().iter().map(|l| l.duration).collect();
        assert_eq!(d.len(), 2);
        assert!((d[0] - 100e-9).abs() < 1e-18 && (d[1] - 300e-9).abs() < 1e-18);
    }

    #[test]
    fn chain_of_three_serializes_after_x() {
        let c = Circuit::from_ops(
            4,
            [
                GateOp::x(0),
                GateOp::cnot(0, 1),
                GateOp::cnot(1, 2),
                GateOp::cnot(2, 3),
            ],
        )
        .unwrap();
        let s = schedule(&c, &dm());
        assert_eq!(s.layers().len(), 4);
        for l in &s.layers()[1..] {
            assert_eq!(l.ops.len(), 1);
            assert!(l.ops[0].is_two_qubit());
        }
    }

    #[test]
    fn measurements_form_final_barrier() {
        let c = Circuit::from_ops(2, [GateOp::x(0), GateOp::h(0)])
            .unwrap()
            .with_measure_all();
        let s = schedule(&c, &dm());
        assert_eq!(s.layers().len(), 3);
        let last = s.layers().last().unwrap();
        assert!(last.is_measurement());
        assert_eq!(last.ops.len(), 2);
    }

    #[test]
    fn delay_sets_its_own_duration() {
        let c = Circuit::from_ops(1, [GateOp::x(0), GateOp::delay(0, 5e-6)]).unwrap();
        let s = schedule(&c, &dm());
        assert!((s.total_duration() - 5.1e-6).abs() < 1e-15);
    }
}
