//! Orbits, derivative products along orbits, and growth sequences.
//!
//! `Γₙ(f) = max(sup (fⁿ)', sup (f⁻ⁿ)')` is computed from the forward map
//! alone through `sup (f⁻ⁿ)' = 1/inf (fⁿ)'`. Suprema are taken over a finite
//! probe set refined by ternary search, so `log_sup` is a lower bound on the
//! true supremum and `log_inf` an upper bound on the true infimum.

use rayon::prelude::*;

use crate::diffeo::Diffeo;
use crate::error::{Error, Result};
use crate::modulus::Modulus;
use crate::numerics::{integrate, lin_space, log_space, CompensatedSum, QuadOptions};

/// Orbits closer than this to a fixed point are frozen there.
pub const FREEZE_DISTANCE: f64 = 1e-12;
const CHUNK: usize = 64;
const FIXED_POINT_PROBES: usize = 32;

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    /// `x₀, x₁ = f(x₀), …, xₙ`.
    pub points: Vec<f64>,
    /// `log_deriv_prefix[j] = Σ_{k<j} log f'(x_k) = log (f^j)'(x₀)`; starts at 0.
    pub log_deriv_prefix: Vec<f64>,
}

fn check_coordinate(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "orbit start",
            value: x,
            lo: 0.0,
            hi: 1.0,
        })
    }
}

fn nonpositive(x: f64, d: f64) -> Error {
    Error::InvalidDiffeo(format!("derivative {d} ≤ 0 at x = {x}"))
}

pub fn orbit(f: &Diffeo, x0: f64, n: usize) -> Result<Trajectory> {
    check_coordinate(x0)?;
    let mut points = Vec::with_capacity(n + 1);
    let mut prefix = Vec::with_capacity(n + 1);
    let mut acc = CompensatedSum::new();
    let mut x = x0;
    points.push(x);
    prefix.push(0.0);
    for _ in 0..n {
        let (y, d) = f.eval_with_deriv(x);
        if !(d > 0.0) {
            return Err(nonpositive(x, d));
        }
        acc.add(d.ln());
        x = y;
        points.push(x);
        prefix.push(acc.value());
    }
    Ok(Trajectory {
        points,
        log_deriv_prefix: prefix,
    })
}

/// `log (fⁿ)'(x) = Σ_{k<n} log f'(f^k(x))`.
pub fn log_deriv_product(f: &Diffeo, x: f64, n: usize) -> Result<f64> {
    check_coordinate(x)?;
    let mut p = Probe::new(x, usize::MAX);
    for _ in 0..n {
        p.step(f, &[])?;
    }
    Ok(p.sum.value())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridSpec {
    /// Base probe count, split between both endpoint layers and the interior.
    pub base: usize,
    /// Ternary-search iterations around the extremal probes at each doubling of `n`.
    pub refine: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            base: 4096,
            refine: 40,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthRecord {
    pub n: usize,
    pub log_gamma: f64,
    pub log_sup: f64,
    pub log_inf: f64,
    pub arg_sup: f64,
    pub arg_inf: f64,
}

#[derive(Clone, Debug)]
struct Probe {
    start: f64,
    index: usize,
    x: f64,
    sum: CompensatedSum,
    frozen_log_deriv: Option<f64>,
}

impl Probe {
    fn new(start: f64, index: usize) -> Self {
        Self {
            start,
            index,
            x: start,
            sum: CompensatedSum::new(),
            frozen_log_deriv: None,
        }
    }

    #[inline]
    fn step(&mut self, f: &Diffeo, fixed: &[f64]) -> Result<()> {
        if let Some(l) = self.frozen_log_deriv {
            self.sum.add(l);
            return Ok(());
        }
        let (y, d) = f.eval_with_deriv(self.x);
        if !(d > 0.0) {
            return Err(nonpositive(self.x, d));
        }
        self.sum.add(d.ln());
        self.x = y;
        if let Some(&p) = nearest(fixed, y) {
            if (y - p).abs() <= FREEZE_DISTANCE {
                self.x = p;
                let dp = f.deriv(p);
                if !(dp > 0.0) {
                    return Err(nonpositive(p, dp));
                }
                self.frozen_log_deriv = Some(dp.ln());
            }
        }
        Ok(())
    }
}

fn nearest(sorted: &[f64], y: f64) -> Option<&f64> {
    let i = sorted.partition_point(|&p| p < y);
    match (i.checked_sub(1).map(|j| &sorted[j]), sorted.get(i)) {
        (Some(a), Some(b)) => Some(if y - a <= b - y { a } else { b }),
        (a, b) => a.or(b),
    }
}

/// Extremes of `log (fⁿ)'` over probes at one `n`; ties go to the smaller index.
#[derive(Clone, Copy, Debug)]
struct Extremes {
    sup: f64,
    sup_idx: usize,
    inf: f64,
    inf_idx: usize,
}

impl Extremes {
    const EMPTY: Extremes = Extremes {
        sup: f64::NEG_INFINITY,
        sup_idx: usize::MAX,
        inf: f64::INFINITY,
        inf_idx: usize::MAX,
    };

    #[inline]
    fn offer(&mut self, v: f64, idx: usize) {
        if v > self.sup || (v == self.sup && idx < self.sup_idx) {
            self.sup = v;
            self.sup_idx = idx;
        }
        if v < self.inf || (v == self.inf && idx < self.inf_idx) {
            self.inf = v;
            self.inf_idx = idx;
        }
    }

    fn merge(&mut self, o: &Extremes) {
        if o.sup > self.sup || (o.sup == self.sup && o.sup_idx < self.sup_idx) {
            self.sup = o.sup;
            self.sup_idx = o.sup_idx;
        }
        if o.inf < self.inf || (o.inf == self.inf && o.inf_idx < self.inf_idx) {
            self.inf = o.inf;
            self.inf_idx = o.inf_idx;
        }
    }
}

/// Probe starting points: both endpoints and all fixed points, log layers
/// toward 0 and 1, a uniform interior, and log layers on both sides of each
/// interior fixed point.
pub fn probe_points(f: &Diffeo, base: usize) -> Vec<f64> {
    let layer = (base / 4).max(2);
    let mut pts = vec![0.0, 1.0];
    pts.extend_from_slice(f.fixed_points());
    pts.extend(log_space(1e-16, 0.25, layer));
    pts.extend(log_space(1e-15, 0.25, layer).into_iter().map(|u| 1.0 - u));
    pts.extend(lin_space(0.0, 1.0, base.saturating_sub(2 * layer).max(3)));
    let fixed = f.fixed_points();
    for (i, &xi) in fixed.iter().enumerate() {
        if xi <= 0.0 || xi >= 1.0 {
            continue;
        }
        let gap = (xi - fixed[i - 1]).min(fixed[i + 1] - xi);
        let reach = (0.5 * gap).min(0.05);
        for u in log_space(1e-12, reach, FIXED_POINT_PROBES) {
            pts.push(xi - u);
            pts.push(xi + u);
        }
    }
    pts.retain(|x| (0.0..=1.0).contains(x));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// `Γₙ(f)` for `n = 1..=n_max`.
pub fn growth_sequence(f: &Diffeo, n_max: usize, grid: GridSpec) -> Result<Vec<GrowthRecord>> {
    if n_max == 0 {
        return Err(Error::Precondition("n_max must be at least 1".into()));
    }
    let fixed: Vec<f64> = f.fixed_points().to_vec();
    let mut probes: Vec<Probe> = probe_points(f, grid.base)
        .into_iter()
        .enumerate()
        .map(|(i, x)| Probe::new(x, i))
        .collect();
    for p in probes.iter_mut() {
        if fixed.contains(&p.start) {
            p.frozen_log_deriv = Some(f.deriv(p.start).ln());
        }
    }
    let mut checkpoints: Vec<usize> = (0..usize::BITS)
        .map(|k| 1usize << k)
        .take_while(|&c| c < n_max)
        .collect();
    checkpoints.push(n_max);

    let mut records = Vec::with_capacity(n_max);
    let mut done = 0;
    for &cp in &checkpoints {
        let seg = cp - done;
        let per_chunk: Vec<Vec<Extremes>> = probes
            .par_chunks_mut(CHUNK)
            .map(|chunk| -> Result<Vec<Extremes>> {
                let mut ext = vec![Extremes::EMPTY; seg];
                for p in chunk.iter_mut() {
                    for e in ext.iter_mut() {
                        p.step(f, &fixed)?;
                        e.offer(p.sum.value(), p.index);
                    }
                }
                Ok(ext)
            })
            .collect::<Result<_>>()?;
        for s in 0..seg {
            let mut e = Extremes::EMPTY;
            for c in &per_chunk {
                e.merge(&c[s]);
            }
            records.push(make_record(done + s + 1, &e, &probes));
        }
        done = cp;
        if grid.refine > 0 {
            refine_checkpoint(f, &fixed, cp, grid.refine, &mut probes, records.last_mut().unwrap())?;
        }
    }
    Ok(records)
}

fn make_record(n: usize, e: &Extremes, probes: &[Probe]) -> GrowthRecord {
    let start = |idx: usize| probes[idx].start;
    GrowthRecord {
        n,
        // + 0.0 turns a −0 from negating inf = 0 into +0
        log_gamma: e.sup.max(-e.inf) + 0.0,
        log_sup: e.sup,
        log_inf: e.inf,
        arg_sup: start(e.sup_idx),
        arg_inf: start(e.inf_idx),
    }
}

/// Ternary search around the current extremal probes; improved points join
/// the probe set from this `n` on.
fn refine_checkpoint(
    f: &Diffeo,
    fixed: &[f64],
    n: usize,
    iters: usize,
    probes: &mut Vec<Probe>,
    rec: &mut GrowthRecord,
) -> Result<()> {
    let mut starts: Vec<f64> = probes.iter().map(|p| p.start).collect();
    starts.sort_by(f64::total_cmp);
    for maximize in [true, false] {
        let arg = if maximize { rec.arg_sup } else { rec.arg_inf };
        if arg <= 0.0 || arg >= 1.0 || fixed.contains(&arg) {
            continue;
        }
        let i = starts.partition_point(|&s| s < arg);
        let lo = if i > 0 && starts[i - 1] > 0.0 { starts[i - 1] } else { 0.01 * arg };
        let hi = match starts.get(i + 1) {
            Some(&h) if h < 1.0 => h,
            _ => 1.0 - 0.01 * (1.0 - arg),
        };
        let coord = Coord::for_point(arg);
        let score = |x: f64| -> Result<f64> {
            let v = log_deriv_product_with(f, fixed, x, n)?;
            Ok(if maximize { v } else { -v })
        };
        let (mut a, mut b) = (coord.to(lo), coord.to(hi));
        for _ in 0..iters {
            let m1 = a + (b - a) / 3.0;
            let m2 = b - (b - a) / 3.0;
            if score(coord.from(m1))? < score(coord.from(m2))? {
                a = m1;
            } else {
                b = m2;
            }
        }
        let x = coord.from(0.5 * (a + b));
        if !(x > 0.0 && x < 1.0) || starts.contains(&x) {
            continue;
        }
        let mut p = Probe::new(x, probes.len());
        for _ in 0..n {
            p.step(f, fixed)?;
        }
        let v = p.sum.value();
        if maximize && v > rec.log_sup {
            rec.log_sup = v;
            rec.arg_sup = x;
        }
        if !maximize && v < rec.log_inf {
            rec.log_inf = v;
            rec.arg_inf = x;
        }
        rec.log_gamma = rec.log_sup.max(-rec.log_inf);
        probes.push(p);
        let j = starts.partition_point(|&s| s < x);
        starts.insert(j, x);
    }
    Ok(())
}

fn log_deriv_product_with(f: &Diffeo, fixed: &[f64], x: f64, n: usize) -> Result<f64> {
    let mut p = Probe::new(x, usize::MAX);
    for _ in 0..n {
        p.step(f, fixed)?;
    }
    Ok(p.sum.value())
}

/// Search coordinate: logarithmic toward an endpoint, linear in the middle.
#[derive(Clone, Copy)]
enum Coord {
    LogNearZero,
    LogNearOne,
    Linear,
}

impl Coord {
    fn for_point(x: f64) -> Self {
        if x < 0.25 {
            Coord::LogNearZero
        } else if x > 0.75 {
            Coord::LogNearOne
        } else {
            Coord::Linear
        }
    }

    fn to(self, x: f64) -> f64 {
        match self {
            Coord::LogNearZero => x.ln(),
            Coord::LogNearOne => (1.0 - x).ln(),
            Coord::Linear => x,
        }
    }

    fn from(self, s: f64) -> f64 {
        match self {
            Coord::LogNearZero => s.exp(),
            Coord::LogNearOne => 1.0 - s.exp(),
            Coord::Linear => s,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GammaEstimate {
    /// `exp(log Γ_{n_max} / n_max)`.
    pub gamma: f64,
    /// `(n, Γₙ^{1/n})` for every record.
    pub roots: Vec<(usize, f64)>,
}

pub fn gamma_estimate(records: &[GrowthRecord]) -> Result<GammaEstimate> {
    let last = records
        .last()
        .ok_or_else(|| Error::Precondition("no growth records".into()))?;
    let roots = records
        .iter()
        .map(|r| (r.n, (r.log_gamma / r.n as f64).exp()))
        .collect();
    Ok(GammaEstimate {
        gamma: (last.log_gamma / last.n as f64).exp(),
        roots,
    })
}

/// `∫ dt/|φ(t)|` between `x_a` and `x_b`.
pub fn orbit_integral(f: &Diffeo, x_a: f64, x_b: f64) -> Result<f64> {
    let (lo, hi) = if x_a <= x_b { (x_a, x_b) } else { (x_b, x_a) };
    if let Some(p) = f.fixed_points().iter().find(|&&p| p > lo && p < hi) {
        return Err(Error::SingularIntegral(format!(
            "fixed point {p} inside ({lo}, {hi})"
        )));
    }
    let opts = QuadOptions {
        rel_tol: 1e-9,
        ..QuadOptions::default()
    };
    integrate(|t| 1.0 / f.displacement(t).abs(), lo, hi, opts)
        .map(|r| r.value)
        .map_err(|e| Error::SingularIntegral(format!("displacement vanishes on ({lo}, {hi}): {e}")))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Claim9Result {
    /// `sup_{n ≤ n_max} n·ω(xₙ)`.
    pub sup: f64,
    /// Sup over `n ∈ [n_max/4, n_max/2]`.
    pub early: f64,
    /// Sup over `n ∈ [n_max/2, n_max]`.
    pub late: f64,
    pub n_max: usize,
}

impl Claim9Result {
    pub fn window_ratio(&self) -> f64 {
        self.late / self.early
    }
}

/// `n·ω(xₙ)` along the orbit of `x₀` under a contracting `f₀` built from a modulus.
pub fn claim9_check(f: &Diffeo, m: &Modulus, x0: f64, n_max: usize) -> Result<Claim9Result> {
    let fm = f.as_from_modulus().ok_or_else(|| {
        Error::Precondition(format!(
            "orbit bound needs a map built from a modulus, got {}",
            f.description()
        ))
    })?;
    if !(f.displacement(x0.min(fm.epsilon())) < 0.0) {
        return Err(Error::Precondition("map is not contracting near 0".into()));
    }
    if n_max < 4 {
        return Err(Error::Precondition("n_max must be at least 4".into()));
    }
    let traj = orbit(f, x0, n_max)?;
    let (mut sup, mut early, mut late) = (0.0f64, 0.0f64, 0.0f64);
    for (n, &x) in traj.points.iter().enumerate().skip(1) {
        let v = n as f64 * m.at(x);
        sup = sup.max(v);
        if n >= n_max / 4 && n <= n_max / 2 {
            early = early.max(v);
        }
        if n >= n_max / 2 {
            late = late.max(v);
        }
    }
    Ok(Claim9Result {
        sup,
        early,
        late,
        n_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffeo::Sign;
    use approx::assert_relative_eq;

    fn small_grid() -> GridSpec {
        GridSpec { base: 512, refine: 40 }
    }

    #[test]
    fn identity_orbit_is_constant() {
        let t = orbit(&Diffeo::identity(), 0.3, 5).unwrap();
        assert!(t.points.iter().all(|&x| x == 0.3));
        assert!(t.log_deriv_prefix.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn moebius_orbit_closed_form() {
        let f = Diffeo::moebius_test();
        let t = orbit(&f, 0.5, 3).unwrap();
        for (n, &x) in t.points.iter().enumerate() {
            let p = 2f64.powi(n as i32);
            assert_relative_eq!(x, p * 0.5 / ((p - 1.0) * 0.5 + 1.0), max_relative = 1e-15);
        }
        assert_relative_eq!(t.points[3], 8.0 / 9.0, max_relative = 1e-15);
        assert_relative_eq!(log_deriv_product(&f, 0.0, 7).unwrap(), 7.0 * 2f64.ln(), max_relative = 1e-15);
    }

    #[test]
    fn chain_rule_split() {
        let f = Diffeo::from_modulus(&Modulus::holder(0.5).unwrap(), 0.25, Sign::Contracting).unwrap();
        let (m, n, x) = (17, 40, 0.6);
        let whole = log_deriv_product(&f, x, m + n).unwrap();
        let fm = orbit(&f, x, m).unwrap().points[m];
        let split = log_deriv_product(&f, x, m).unwrap() + log_deriv_product(&f, fm, n).unwrap();
        assert!((whole - split).abs() <= 1e-10 * (m + n) as f64);
    }

    #[test]
    fn identity_growth_is_one() {
        let recs = growth_sequence(&Diffeo::identity(), 20, small_grid()).unwrap();
        assert_eq!(recs.len(), 20);
        assert!(recs.iter().all(|r| r.log_gamma == 0.0));
    }

    #[test]
    fn moebius_growth_and_gamma() {
        let recs = growth_sequence(&Diffeo::moebius_test(), 50, small_grid()).unwrap();
        for r in &recs {
            assert_relative_eq!(r.log_gamma, r.n as f64 * 2f64.ln(), max_relative = 1e-2);
        }
        let g = gamma_estimate(&recs).unwrap();
        assert_relative_eq!(g.gamma, 2.0, max_relative = 1e-2);
    }

    #[test]
    fn first_record_is_derivative_extremes() {
        let f = Diffeo::from_modulus(&Modulus::lipschitz(), 0.25, Sign::Contracting).unwrap();
        let r = growth_sequence(&f, 1, small_grid()).unwrap()[0];
        let xs = lin_space(0.0, 1.0, 100_001);
        let sup = xs.iter().map(|&x| f.deriv(x)).fold(0.0, f64::max);
        let inf = xs.iter().map(|&x| f.deriv(x)).fold(f64::INFINITY, f64::min);
        assert_relative_eq!(r.log_gamma, sup.ln().max(-inf.ln()), max_relative = 1e-6);
    }

    #[test]
    fn growth_is_deterministic_across_pool_sizes() {
        let f = Diffeo::sharpness_family(&Modulus::holder(0.5).unwrap(), 0.25, 32).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| growth_sequence(&f, 64, small_grid()).unwrap())
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn orbit_integral_closed_form() {
        let f = Diffeo::from_modulus(&Modulus::lipschitz(), 0.4, Sign::Contracting).unwrap();
        assert_relative_eq!(orbit_integral(&f, 0.05, 0.1).unwrap(), 20.0, max_relative = 1e-9);
        assert_relative_eq!(orbit_integral(&f, 0.1, 0.05).unwrap(), 20.0, max_relative = 1e-9);
        assert!(matches!(
            orbit_integral(&Diffeo::identity(), 0.2, 0.4),
            Err(Error::SingularIntegral(_))
        ));
    }

    #[test]
    fn claim9_lipschitz_tends_to_two() {
        let m = Modulus::lipschitz();
        let f = Diffeo::from_modulus(&m, 0.4, Sign::Contracting).unwrap();
        let r = claim9_check(&f, &m, 0.4, 20_000).unwrap();
        // xₙ ≈ 2/n for x − x²/2
        assert!((r.late - 2.0).abs() < 0.01, "{r:?}");
        assert!(r.window_ratio() <= 1.5);
        assert!(matches!(
            claim9_check(&Diffeo::identity(), &m, 0.4, 100),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn frozen_orbits_stop_at_fixed_point() {
        let f = Diffeo::moebius_test();
        let mut p = Probe::new(1.0 - 5e-13, 0);
        p.step(&f, &[0.0, 1.0]).unwrap();
        assert_eq!(p.x, 1.0);
        assert!(p.frozen_log_deriv.is_some());
    }
}
