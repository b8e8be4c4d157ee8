//! Statistical trend checks on result series.

/// Mann–Kendall statistic of a series against its index order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MannKendall {
    pub s: i64,
    pub variance: f64,
    /// Continuity-corrected normal score; positive for an upward trend.
    pub z: f64,
}

pub fn mann_kendall(xs: &[f64]) -> MannKendall {
    let n = xs.len();
    let mut s = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            s += match xs[j].partial_cmp(&xs[i]) {
                Some(std::cmp::Ordering::Greater) => 1,
                Some(std::cmp::Ordering::Less) => -1,
                _ => 0,
            };
        }
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut ties = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        ties += t * (t - 1.0) * (2.0 * t + 5.0);
        i = j + 1;
    }
    let nf = n as f64;
    let variance = (nf * (nf - 1.0) * (2.0 * nf + 5.0) - ties) / 18.0;
    let z = match s.signum() {
        0 => 0.0,
        sign => (s - sign) as f64 / variance.sqrt(),
    };
    MannKendall { s, variance, z }
}

/// Difference `a − b` in units of its combined standard error.
pub fn separation(a: f64, a_err: f64, b: f64, b_err: f64) -> f64 {
    let sigma = (a_err * a_err + b_err * b_err).sqrt();
    if sigma == 0.0 {
        if a == b {
            0.0
        } else {
            (a - b).signum() * f64::INFINITY
        }
    } else {
        (a - b) / sigma
    }
}
