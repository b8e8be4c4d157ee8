use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;

/// Noiseless outcome distribution of the three-qubit phase estimate of `phi`:
/// `P(k) = |(1/8) Σ_j e^{ij(φ − kπ/4)}|²`, indexed by the integer `k`.
pub fn theoretical_qpe_distribution(phi: f64) -> [f64; 8] {
    let mut out = [0.0; 8];
    for (k, p) in out.iter_mut().enumerate() {
        let delta = phi - k as f64 * FRAC_PI_4;
        let sum: Complex64 = (0..8)
            .map(|j| Complex64::from_polar(1.0, j as f64 * delta))
            .sum();
        *p = (sum / 8.0).norm_sqr();
    }
    out
}

/// Index `k` of the perfect phase `kπ/4` closest to `phi` on the circle.
pub fn nearest_perfect_phase(phi: f64) -> usize {
    ((phi / FRAC_PI_4).round() as i64).rem_euclid(8) as usize
}
