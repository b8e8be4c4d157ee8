//! Weighted least-squares decay fits.
//!
//! Points are weighted by `shots/(p(1−p)+ε)` using the observed fraction.
//! R² is computed unweighted on the linear scale.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const WEIGHT_EPS: f64 = 1e-6;
const MAX_ITER: usize = 200;
const REL_TOL: f64 = 1e-9;

/// One measured point: time, observed fraction, shots behind it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub p: f64,
    pub shots: u64,
}

impl Sample {
    pub fn new(t: f64, p: f64, shots: u64) -> Self {
        Sample { t, p, shots }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitModel {
    /// `floor + (1 − floor)·e^{−t/T}`.
    Exponential,
    /// `½(1 + e^{−t/tphi}·cos(ωt))`.
    DampedCosine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitStatus {
    Converged,
    /// Hit the iteration cap; parameters are the last iterate.
    MaxIterations,
    /// No oscillation found; the result is a decay toward ½.
    Fallback,
    /// Data carry no decay to fit; see the diagnostics.
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: FitModel,
    /// Exponential: `T`, `floor`. Damped cosine: `tphi`, `omega`. Times in
    /// the units of the samples, `omega` in radians per unit time. An
    /// infinite time constant serializes as `null`.
    pub params: BTreeMap<String, Option<f64>>,
    pub r_squared: Option<f64>,
    /// Covariance of the fitted parameters: `[T]` or `[tphi, omega]`.
    pub covariance: Vec<Vec<f64>>,
    pub status: FitStatus,
    pub iterations: usize,
    pub diagnostics: Vec<String>,
}

impl FitResult {
    /// A parameter by name; infinite values come back as `f64::INFINITY`.
    pub fn param(&self, name: &str) -> Option<f64> {
        self.params
            .get(name)
            .map(|v| v.unwrap_or(f64::INFINITY))
    }

    pub fn succeeded(&self) -> bool {
        self.status != FitStatus::Failed
    }

    fn failed(model: FitModel, diagnostics: Vec<String>) -> Self {
        FitResult {
            model,
            params: BTreeMap::new(),
            r_squared: None,
            covariance: Vec::new(),
            status: FitStatus::Failed,
            iterations: 0,
            diagnostics,
        }
    }
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn check_samples(samples: &[Sample], min: usize) -> Result<()> {
    let mut ts: Vec<f64> = samples.iter().map(|s| s.t).collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    if ts.len() < min {
        return Err(Error::Fit(format!(
            "need at least {min} distinct times, got {}",
            ts.len()
        )));
    }
    for s in samples {
        if !(0.0..=1.0).contains(&s.p) || !s.t.is_finite() || s.t < 0.0 {
            return Err(Error::Fit(format!("bad sample {s:?}")));
        }
    }
    Ok(())
}

fn weight(s: &Sample) -> f64 {
    s.shots.max(1) as f64 / (s.p * (1.0 - s.p) + WEIGHT_EPS)
}

fn r_squared(samples: &[Sample], model: impl Fn(f64) -> f64) -> Option<f64> {
    let mean = samples.iter().map(|s| s.p).sum::<f64>() / samples.len() as f64;
    let ss_tot: f64 = samples.iter().map(|s| (s.p - mean).powi(2)).sum();
    let ss_res: f64 = samples.iter().map(|s| (s.p - model(s.t)).powi(2)).sum();
    (ss_tot > 0.0).then(|| 1.0 - ss_res / ss_tot)
}

struct Lm<const N: usize> {
    theta: [f64; N],
    /// `JᵀWJ` at the solution.
    normal: [[f64; N]; N],
    chi2: f64,
    iterations: usize,
    converged: bool,
}

fn solve<const N: usize>(mut a: [[f64; N]; N], mut b: [f64; N]) -> Option<[f64; N]> {
    for col in 0..N {
        let piv = (col..N).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..N {
            let f = a[row][col] / a[col][col];
            for k in col..N {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; N];
    for row in (0..N).rev() {
        let s: f64 = (row + 1..N).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

fn invert<const N: usize>(a: [[f64; N]; N]) -> Option<[[f64; N]; N]> {
    let mut inv = [[0.0; N]; N];
    for j in 0..N {
        let mut e = [0.0; N];
        e[j] = 1.0;
        let col = solve(a, e)?;
        for i in 0..N {
            inv[i][j] = col[i];
        }
    }
    Some(inv)
}

/// Damped Gauss–Newton on `Σ w (y − f)²`, parameters clamped at `lower`.
fn levenberg_marquardt<const N: usize>(
    ts: &[f64],
    ys: &[f64],
    ws: &[f64],
    theta0: [f64; N],
    lower: [f64; N],
    f: impl Fn(f64, &[f64; N]) -> (f64, [f64; N]),
) -> Lm<N> {
    let eval = |theta: &[f64; N]| {
        let mut normal = [[0.0; N]; N];
        let mut grad = [0.0; N];
        let mut chi2 = 0.0;
        for ((&t, &y), &w) in ts.iter().zip(ys).zip(ws) {
            let (v, j) = f(t, theta);
            let r = y - v;
            chi2 += w * r * r;
            for a in 0..N {
                grad[a] += w * j[a] * r;
                for b in 0..N {
                    normal[a][b] += w * j[a] * j[b];
                }
            }
        }
        (chi2, normal, grad)
    };
    let mut theta = theta0;
    let (mut chi2, mut normal, mut grad) = eval(&theta);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITER {
        iterations += 1;
        let mut a = normal;
        for (i, row) in a.iter_mut().enumerate() {
            row[i] += lambda * normal[i][i].max(1e-300);
        }
        let Some(delta) = solve(a, grad) else {
            break;
        };
        let mut next = theta;
        for i in 0..N {
            next[i] = (theta[i] + delta[i]).max(lower[i]);
        }
        let (c2, n2, g2) = eval(&next);
        if c2 <= chi2 {
            let rel = (0..N)
                .map(|i| (next[i] - theta[i]).abs() / theta[i].abs().max(1e-12))
                .fold(0.0, f64::max);
            theta = next;
            chi2 = c2;
            normal = n2;
            grad = g2;
            lambda = (lambda / 10.0).max(1e-12);
            if rel < REL_TOL {
                converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                // No downhill step left: at the minimum to machine precision.
                converged = true;
                break;
            }
        }
    }
    Lm {
        theta,
        normal,
        chi2,
        iterations,
        converged,
    }
}

/// Fits `floor + (1 − floor)·e^{−t/T}`. Use `floor = 0` for energy
/// relaxation and `½` for echo decay.
pub fn fit_decay(samples: &[Sample], floor: f64) -> Result<FitResult> {
    check_samples(samples, 3)?;
    if !(0.0..1.0).contains(&floor) {
        return Err(Error::Fit(format!("floor {floor} outside [0, 1)")));
    }
    let model = FitModel::Exponential;
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.t.total_cmp(&b.t));
    let span = sorted.last().expect("nonempty").t - sorted[0].t;
    let excess: Vec<f64> = sorted.iter().map(|s| (s.p - floor) / (1.0 - floor)).collect();
    let mut diagnostics = Vec::new();
    if excess.iter().all(|&e| e <= 1e-9) {
        diagnostics.push("no signal above the floor".to_string());
        return Ok(FitResult::failed(model, diagnostics));
    }
    let drop = excess[0] - excess[excess.len() - 1];
    if drop <= 1e-9 {
        diagnostics.push(format!("no decay: first-to-last drop {drop:.3e}"));
        return Ok(FitResult::failed(model, diagnostics));
    }

    // Log-linear start: slope through the origin of ln(excess) against t.
    let (mut num, mut den) = (0.0, 0.0);
    for (s, &e) in sorted.iter().zip(&excess) {
        if e > 1e-6 {
            let w = e * e * s.shots.max(1) as f64;
            num -= w * s.t * e.ln();
            den += w * s.t * s.t;
        }
    }
    let scale = if span > 0.0 { span } else { 1.0 };
    let k0 = if den > 0.0 && num > 0.0 { num / den } else { 1.0 / scale };

    let ts: Vec<f64> = sorted.iter().map(|s| s.t / scale).collect();
    let ys: Vec<f64> = sorted.iter().map(|s| s.p).collect();
    let ws: Vec<f64> = sorted.iter().map(weight).collect();
    let lm = levenberg_marquardt(&ts, &ys, &ws, [k0 * scale], [0.0], |t, th| {
        let e = (-th[0] * t).exp();
        (floor + (1.0 - floor) * e, [-(1.0 - floor) * t * e])
    });
    let k = lm.theta[0] / scale;
    if !(k > 0.0) {
        diagnostics.push("fitted decay rate is not positive".to_string());
        return Ok(FitResult::failed(model, diagnostics));
    }
    let t_fit = 1.0 / k;
    let dof = (sorted.len() - 1).max(1) as f64;
    let var_k = invert(lm.normal).map_or(f64::NAN, |inv| inv[0][0] * lm.chi2 / dof) / (scale * scale);
    let var_t = var_k / k.powi(4);
    let mut params = BTreeMap::new();
    params.insert("T".to_string(), Some(t_fit));
    params.insert("floor".to_string(), Some(floor));
    Ok(FitResult {
        model,
        r_squared: r_squared(&sorted, |t| floor + (1.0 - floor) * (-t / t_fit).exp()),
        params,
        covariance: vec![vec![var_t]],
        status: if lm.converged {
            FitStatus::Converged
        } else {
            FitStatus::MaxIterations
        },
        iterations: lm.iterations,
        diagnostics,
    })
}

/// Fits `e^{−t/T}`.
pub fn fit_exponential(samples: &[Sample]) -> Result<FitResult> {
    fit_decay(samples, 0.0)
}

/// `½(1 + e^{−t/tphi}·cos(ωt))`.
pub fn damped_cosine(t: f64, tphi: f64, omega: f64) -> f64 {
    0.5 * (1.0 + (-t / tphi).exp() * (omega * t).cos())
}

/// Fits [`damped_cosine`]. The frequency starts at the periodogram peak of
/// the mean-removed data; with no peak above one cycle per span the result
/// is a [`fit_decay`] toward ½ marked [`FitStatus::Fallback`].
pub fn fit_damped_cosine(samples: &[Sample]) -> Result<FitResult> {
    check_samples(samples, 6)?;
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.t.total_cmp(&b.t));
    let t0 = sorted[0].t;
    let span = sorted.last().expect("nonempty").t - t0;
    let mean = sorted.iter().map(|s| s.p).sum::<f64>() / sorted.len() as f64;

    let min_dt = sorted
        .windows(2)
        .map(|w| w[1].t - w[0].t)
        .filter(|&d| d > 0.0)
        .fold(f64::INFINITY, f64::min);
    let nyquist = TAU * 0.5 / min_dt;
    let lowest = TAU * 0.5 / span;
    let steps = 4000;
    let power = |omega: f64| {
        let (mut re, mut im) = (0.0, 0.0);
        for s in &sorted {
            re += (s.p - mean) * (omega * s.t).cos();
            im += (s.p - mean) * (omega * s.t).sin();
        }
        re * re + im * im
    };
    let (mut omega0, mut best) = (lowest, f64::NEG_INFINITY);
    for i in 0..=steps {
        let omega = lowest + (nyquist - lowest) * i as f64 / steps as f64;
        let p = power(omega);
        if p > best {
            best = p;
            omega0 = omega;
        }
    }
    let signal: f64 = sorted.iter().map(|s| (s.p - mean).powi(2)).sum();
    if omega0 < TAU / span || signal < 1e-12 {
        let mut r = fit_decay(samples, 0.5)?;
        if r.status != FitStatus::Failed {
            r.status = FitStatus::Fallback;
        }
        r.diagnostics
            .push(format!("no oscillation above one cycle per span (peak at {omega0:.4e} rad/unit)"));
        return Ok(r);
    }

    let ts: Vec<f64> = sorted.iter().map(|s| s.t / span).collect();
    let ys: Vec<f64> = sorted.iter().map(|s| s.p).collect();
    let ws: Vec<f64> = sorted.iter().map(weight).collect();
    let chi2 = |k: f64, w: f64| {
        ts.iter()
            .zip(&ys)
            .zip(&ws)
            .map(|((&t, &y), &wt)| wt * (y - 0.5 * (1.0 + (-k * t).exp() * (w * t).cos())).powi(2))
            .sum::<f64>()
    };
    // Coarse grid over the rate and a narrow band around the peak frequency.
    let w_peak = omega0 * span;
    let dw = (nyquist - lowest) * span / steps as f64;
    let mut start = (0.0, w_peak, f64::INFINITY);
    for i in 0..=60 {
        let k = if i == 0 { 0.0 } else { 10f64.powf(-2.0 + 4.0 * (i - 1) as f64 / 59.0) };
        for j in -10..=10 {
            let w = w_peak + dw * j as f64 / 5.0;
            let c = chi2(k, w);
            if c < start.2 {
                start = (k, w, c);
            }
        }
    }
    let lm = levenberg_marquardt(&ts, &ys, &ws, [start.0, start.1], [0.0, 0.0], |t, th| {
        let e = (-th[0] * t).exp();
        let (s, c) = (th[1] * t).sin_cos();
        (
            0.5 * (1.0 + e * c),
            [-0.5 * t * e * c, -0.5 * t * e * s],
        )
    });
    let (k, omega) = (lm.theta[0] / span, lm.theta[1] / span);
    let tphi = if k > 0.0 { 1.0 / k } else { f64::INFINITY };
    let dof = (sorted.len() - 2).max(1) as f64;
    let covariance = match invert(lm.normal) {
        Some(inv) => {
            let s2 = lm.chi2 / dof / (span * span);
            let (vk, vw, ckw) = (inv[0][0] * s2, inv[1][1] * s2, inv[0][1] * s2);
            let dt = if k > 0.0 { -1.0 / (k * k) } else { f64::NAN };
            vec![vec![vk * dt * dt, ckw * dt], vec![ckw * dt, vw]]
        }
        None => vec![vec![f64::NAN; 2]; 2],
    };
    let mut params = BTreeMap::new();
    params.insert("tphi".to_string(), finite(tphi));
    params.insert("omega".to_string(), Some(omega));
    Ok(FitResult {
        model: FitModel::DampedCosine,
        r_squared: r_squared(&sorted, |t| damped_cosine(t, tphi, omega)),
        params,
        covariance,
        status: if lm.converged {
            FitStatus::Converged
        } else {
            FitStatus::MaxIterations
        },
        iterations: lm.iterations,
        diagnostics: Vec::new(),
    })
}
