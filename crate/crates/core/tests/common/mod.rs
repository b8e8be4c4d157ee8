//! Independent reference operators and shared checks for integration tests.

#![allow(dead_code)]

use std::f64::consts::PI;

use nisq_lab::builder::BuiltCircuit;
use nisq_lab::state::{distance_up_to_phase, restricted_operator, Matrix};
use nisq_lab::topology::{validate_circuit, CouplingGraph};
use num_complex::Complex64;

pub const TOL: f64 = 1e-9;

fn permutation(dim: usize, f: impl Fn(usize) -> usize) -> Matrix {
    let mut m = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    for x in 0..dim {
        m[f(x)][x] = Complex64::new(1.0, 0.0);
    }
    m
}

/// CNOT on `|control target⟩`.
pub fn cnot_matrix() -> Matrix {
    permutation(4, |x| if x & 0b10 != 0 { x ^ 1 } else { x })
}

/// Toffoli on `|q1 q2 q3⟩`.
pub fn toffoli_matrix() -> Matrix {
    permutation(8, |x| if x & 0b110 == 0b110 { x ^ 1 } else { x })
}

pub fn swap_matrix() -> Matrix {
    permutation(4, |x| ((x & 1) << 1) | (x >> 1))
}

/// `diag(1, 1, 1, e^{iφ})`.
pub fn crphi_matrix(phi: f64) -> Matrix {
    let mut m = permutation(4, |x| x);
    m[3][3] = Complex64::from_polar(1.0, phi);
    m
}

fn reverse3(k: usize) -> usize {
    ((k & 1) << 2) | (k & 2) | ((k >> 2) & 1)
}

/// Inverse QFT without output reversal: the phase state
/// `Σ_x e^{2πi x k/8}|x⟩/√8` goes to the basis state with index `rev(k)`.
pub fn qft_dagger_matrix() -> Matrix {
    let mut m = vec![vec![Complex64::new(0.0, 0.0); 8]; 8];
    for (y, row) in m.iter_mut().enumerate() {
        let k = reverse3(y);
        for (x, entry) in row.iter_mut().enumerate() {
            *entry = Complex64::from_polar(1.0 / 8f64.sqrt(), -2.0 * PI * (x * k) as f64 / 8.0);
        }
    }
    m
}

/// Restricted action of `built` versus `ideal`, up to global phase, and the
/// worst ancilla leakage.
pub fn oracle_distance(built: &BuiltCircuit, ideal: &Matrix) -> (f64, f64) {
    let r = restricted_operator(&built.circuit, &built.ancilla_target).expect("small circuit");
    (distance_up_to_phase(&r.matrix, ideal), r.leakage)
}

pub fn assert_matches(built: &BuiltCircuit, ideal: &Matrix, what: &str) {
    let (d, leak) = oracle_distance(built, ideal);
    assert!(d < TOL, "{what}: distance {d}");
    assert!(leak < TOL, "{what}: ancilla leakage {leak}");
}

pub fn assert_on_graph(g: &CouplingGraph, built: &BuiltCircuit, what: &str) {
    let v = validate_circuit(g, &built.circuit);
    assert!(v.is_empty(), "{what}: {v:?}");
}
