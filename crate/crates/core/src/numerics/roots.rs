//! Root finding for monotone functions.

/// Bisection stop: absolute width, or iteration cap.
pub const BISECTION_WIDTH: f64 = 1e-14;
pub const BISECTION_MAX_ITER: usize = 200;

/// Solves `g(x) = target` for non-decreasing `g` on `[lo, hi]`.
///
/// Stops once the bracket is narrower than [`BISECTION_WIDTH`] *and* the
/// residual is within `residual_tol`, when the bracket can no longer be
/// split, or after [`BISECTION_MAX_ITER`] halvings. Returns the bracket end
/// with the smaller residual.
pub fn bisect_increasing<G: Fn(f64) -> f64>(
    g: G,
    target: f64,
    mut lo: f64,
    mut hi: f64,
    residual_tol: f64,
) -> f64 {
    let mut g_lo = g(lo) - target;
    let mut g_hi = g(hi) - target;
    if g_lo >= 0.0 {
        return lo;
    }
    if g_hi <= 0.0 {
        return hi;
    }
    for _ in 0..BISECTION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid) - target;
        if gm == 0.0 {
            return mid;
        }
        if gm < 0.0 {
            lo = mid;
            g_lo = gm;
        } else {
            hi = mid;
            g_hi = gm;
        }
        if hi - lo <= BISECTION_WIDTH && g_lo.abs().min(g_hi) <= residual_tol {
            break;
        }
    }
    if -g_lo <= g_hi {
        lo
    } else {
        hi
    }
}

/// Safeguarded Newton iteration for increasing `g` with positive derivative
/// `dg` on `[lo, hi]`, solving `g(x) = 0`. Runs to floating resolution.
pub fn newton_bisect_increasing<G, D>(g: G, dg: D, mut lo: f64, mut hi: f64, guess: f64) -> f64
where
    G: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut x = guess.clamp(lo, hi);
    let mut best = (f64::INFINITY, x);
    for _ in 0..2000 {
        let gx = g(x);
        if gx.abs() < best.0 {
            best = (gx.abs(), x);
        }
        if gx == 0.0 {
            return x;
        }
        if gx < 0.0 {
            lo = lo.max(x);
        } else {
            hi = hi.min(x);
        }
        let d = dg(x);
        let newton = x - gx / d;
        let next = if d > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            let mid = 0.5 * (lo + hi);
            // Geometric midpoint when the bracket spans many decades near 0.
            if lo > 0.0 && hi / lo > 16.0 {
                (lo * hi).sqrt()
            } else {
                mid
            }
        };
        if next == x || next <= lo && next >= hi {
            break;
        }
        if (next - x).abs() <= f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
            let gn = g(next);
            if gn.abs() < best.0 {
                best = (gn.abs(), next);
            }
            break;
        }
        x = next;
        let width = hi - lo;
        if width <= f64::EPSILON * hi.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    for end in [lo, hi] {
        let ge = g(end).abs();
        if ge < best.0 {
            best = (ge, end);
        }
    }
    best.1
}
