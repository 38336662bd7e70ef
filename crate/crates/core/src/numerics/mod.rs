pub mod quadrature;
pub mod roots;
pub mod summation;

pub use quadrature::{gauss_legendre8, integrate, QuadOptions, QuadResult};
pub use roots::{bisect_increasing, newton_bisect_increasing};
pub use summation::{compensated_sum, CompensatedSum};

/// `n` log-spaced points from `lo` to `hi` inclusive (`0 < lo < hi`).
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo);
    match n {
        0 => vec![],
        1 => vec![hi],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            let mut v: Vec<f64> = (0..n)
                .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
                .collect();
            v[0] = lo;
            v[n - 1] = hi;
            v
        }
    }
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn lin_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

/// Maximum oscillation `max f - min f` over every window of `xs` of width at
/// most `delta`, for each `delta`. `xs` must be sorted ascending.
///
/// Two-pointer sweep with monotone deques; exact for the sampled grid and
/// `O(len)` per width.
pub fn windowed_oscillation(xs: &[f64], values: &[f64], deltas: &[f64]) -> Vec<f64> {
    use std::collections::VecDeque;
    assert_eq!(xs.len(), values.len());
    deltas
        .iter()
        .map(|&delta| {
            let mut maxq: VecDeque<usize> = VecDeque::new();
            let mut minq: VecDeque<usize> = VecDeque::new();
            let mut left = 0;
            let mut best = 0.0f64;
            for right in 0..xs.len() {
                while maxq.back().is_some_and(|&j| values[j] <= values[right]) {
                    maxq.pop_back();
                }
                maxq.push_back(right);
                while minq.back().is_some_and(|&j| values[j] >= values[right]) {
                    minq.pop_back();
                }
                minq.push_back(right);
                while xs[right] - xs[left] > delta {
                    left += 1;
                }
                while maxq.front().is_some_and(|&j| j < left) {
                    maxq.pop_front();
                }
                while minq.front().is_some_and(|&j| j < left) {
                    minq.pop_front();
                }
                let spread = values[maxq[0]] - values[minq[0]];
                best = best.max(spread);
            }
            best
        })
        .collect()
}
