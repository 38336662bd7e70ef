//! Moduli of continuity and the auxiliary functions built from them.
//!
//! A [`Modulus`] is a non-decreasing continuous function with `ω(0) = 0`,
//! used on `[0, domain_end]`. Besides evaluation it provides the inverse
//! `ω⁻¹`, the inverse `Ω` of `x ↦ x·ω(x)`, `Λ(x) = x·ω(1/x)`, the least
//! concave majorant, and a grid-based regularity classification.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::{bisect_increasing, log_space, ls_slope};

/// Residual tolerance of inverse bisections, relative to the target value.
const INVERSE_RESIDUAL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    deltas: Vec<f64>,
    values: Vec<f64>,
}

impl Table {
    /// Knots must start at `(0, 0)`, have strictly increasing abscissae
    /// and finite non-negative values.
    pub fn new(deltas: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if deltas.len() != values.len() || deltas.len() < 2 {
            return Err(Error::InvalidModulus(
                "table needs at least two (delta, value) pairs".into(),
            ));
        }
        if deltas[0] != 0.0 || values[0] != 0.0 {
            return Err(Error::InvalidModulus("table must start at (0, 0)".into()));
        }
        if deltas.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidModulus(
                "table deltas must be strictly increasing".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidModulus(
                "table values must be finite and non-negative".into(),
            ));
        }
        if *deltas.last().unwrap() > 1.0 {
            return Err(Error::InvalidModulus("table must lie within [0, 1]".into()));
        }
        Ok(Self { deltas, values })
    }

    /// Reads a two-column `delta,value` CSV (header optional).
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_path(path.as_ref())?;
        let (mut ds, mut vs) = (Vec::new(), Vec::new());
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != 2 {
                return Err(Error::InvalidModulus(format!(
                    "line {}: expected two columns",
                    line + 1
                )));
            }
            match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
                (Ok(d), Ok(v)) => {
                    ds.push(d);
                    vs.push(v);
                }
                _ if line == 0 => continue,
                _ => {
                    return Err(Error::InvalidModulus(format!(
                        "line {}: not a number pair",
                        line + 1
                    )))
                }
            }
        }
        Self::new(ds, vs)
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn end(&self) -> f64 {
        *self.deltas.last().unwrap()
    }

    fn segment(&self, d: f64) -> usize {
        let i = self.deltas.partition_point(|&x| x <= d);
        i.clamp(1, self.deltas.len() - 1) - 1
    }

    fn at(&self, d: f64) -> f64 {
        let i = self.segment(d);
        let (x0, x1) = (self.deltas[i], self.deltas[i + 1]);
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let t = ((d - x0) / (x1 - x0)).clamp(0.0, 1.0);
        y0 + (y1 - y0) * t
    }

    fn slope(&self, d: f64) -> f64 {
        let i = self.segment(d);
        (self.values[i + 1] - self.values[i]) / (self.deltas[i + 1] - self.deltas[i])
    }

    /// Exact integral of the interpolant over `[0, x]`.
    fn integral(&self, x: f64) -> f64 {
        let mut acc = crate::numerics::CompensatedSum::new();
        for i in 0..self.deltas.len() - 1 {
            let (x0, x1) = (self.deltas[i], self.deltas[i + 1]);
            if x0 >= x {
                break;
            }
            let hi = x1.min(x);
            acc.add(0.5 * (self.values[i] + self.at(hi)) * (hi - x0));
        }
        acc.value()
    }

    fn is_monotone(&self) -> bool {
        self.values.windows(2).all(|w| w[1] >= w[0])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModulusKind {
    Holder { alpha: f64 },
    Lipschitz,
    /// `δ·log(e/δ)`
    XLog,
    /// `δ·sqrt(log(e/δ))`
    SqrtLog,
    /// `1/log(e/δ)`
    InvLog,
    Tabulated(Arc<Table>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Modulus {
    kind: ModulusKind,
    domain_end: f64,
    scale: f64,
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ModulusKind::Holder { alpha } => write!(f, "holder:{alpha}")?,
            ModulusKind::Lipschitz => write!(f, "lipschitz")?,
            ModulusKind::XLog => write!(f, "xlog")?,
            ModulusKind::SqrtLog => write!(f, "sqrtlog")?,
            ModulusKind::InvLog => write!(f, "invlog")?,
            ModulusKind::Tabulated(t) => write!(f, "tabulated[{} knots]", t.deltas.len())?,
        }
        if self.scale != 1.0 {
            write!(f, "*{}", self.scale)?;
        }
        if self.domain_end != 1.0 {
            write!(f, "@{}", self.domain_end)?;
        }
        Ok(())
    }
}

impl Modulus {
    pub fn new(kind: ModulusKind, domain_end: f64, scale: f64) -> Result<Self> {
        if let ModulusKind::Holder { alpha } = kind {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(Error::InvalidModulus(format!(
                    "holder exponent {alpha} not in (0, 1)"
                )));
            }
        }
        if !(domain_end > 0.0 && domain_end <= 1.0) {
            return Err(Error::InvalidModulus(format!(
                "domain end {domain_end} not in (0, 1]"
            )));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidModulus(format!("scale {scale} not positive")));
        }
        if let ModulusKind::Tabulated(t) = &kind {
            if domain_end > t.end() {
                return Err(Error::InvalidModulus(format!(
                    "domain end {domain_end} beyond last table knot {}",
                    t.end()
                )));
            }
        }
        Ok(Self {
            kind,
            domain_end,
            scale,
        })
    }

    pub fn holder(alpha: f64) -> Result<Self> {
        Self::new(ModulusKind::Holder { alpha }, 1.0, 1.0)
    }

    pub fn lipschitz() -> Self {
        Self::new(ModulusKind::Lipschitz, 1.0, 1.0).unwrap()
    }

    pub fn xlog() -> Self {
        Self::new(ModulusKind::XLog, 1.0, 1.0).unwrap()
    }

    pub fn sqrtlog() -> Self {
        Self::new(ModulusKind::SqrtLog, 1.0, 1.0).unwrap()
    }

    pub fn invlog() -> Self {
        Self::new(ModulusKind::InvLog, 1.0, 1.0).unwrap()
    }

    pub fn tabulated(table: Table) -> Self {
        let end = table.end();
        Self::new(ModulusKind::Tabulated(Arc::new(table)), end, 1.0).unwrap()
    }

    /// Parses `kind[:param]`, e.g. `holder:0.5`, `lipschitz`, `tabulated:path.csv`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (name, arg) = match spec.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (spec.trim(), None),
        };
        let num = |a: Option<&str>| -> Result<f64> {
            a.ok_or_else(|| Error::Config(format!("modulus '{name}' needs a parameter")))?
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("modulus parameter: {e}")))
        };
        match name {
            "holder" => Self::holder(num(arg)?),
            "lipschitz" => Ok(Self::lipschitz()),
            "xlog" => Ok(Self::xlog()),
            "sqrtlog" => Ok(Self::sqrtlog()),
            "invlog" => Ok(Self::invlog()),
            "tabulated" => {
                let path = arg.ok_or_else(|| Error::Config("tabulated modulus needs a CSV path".into()))?;
                Ok(Self::tabulated(Table::from_csv(path)?))
            }
            other => Err(Error::Config(format!("unknown modulus kind '{other}'"))),
        }
    }

    pub fn kind(&self) -> &ModulusKind {
        &self.kind
    }

    pub fn domain_end(&self) -> f64 {
        self.domain_end
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn holder_exponent(&self) -> Option<f64> {
        match self.kind {
            ModulusKind::Holder { alpha } => Some(alpha),
            ModulusKind::Lipschitz => Some(1.0),
            _ => None,
        }
    }

    fn check_domain(&self, what: &'static str, d: f64) -> Result<()> {
        if d >= 0.0 && d <= self.domain_end {
            Ok(())
        } else {
            Err(Error::Domain {
                what,
                value: d,
                lo: 0.0,
                hi: self.domain_end,
            })
        }
    }

    /// `ω(δ)` for `δ ∈ [0, domain_end]`.
    pub fn eval(&self, delta: f64) -> Result<f64> {
        self.check_domain("modulus", delta)?;
        Ok(self.at(delta))
    }

    /// Unchecked evaluation; arguments are clamped into the domain.
    #[inline]
    pub fn at(&self, delta: f64) -> f64 {
        let d = delta.clamp(0.0, self.domain_end);
        if d == 0.0 {
            return 0.0;
        }
        let base = match &self.kind {
            ModulusKind::Holder { alpha } => d.powf(*alpha),
            ModulusKind::Lipschitz => d,
            ModulusKind::XLog => d * (1.0 - d.ln()),
            ModulusKind::SqrtLog => d * (1.0 - d.ln()).sqrt(),
            ModulusKind::InvLog => 1.0 / (1.0 - d.ln()),
            ModulusKind::Tabulated(t) => t.at(d),
        };
        self.scale * base
    }

    /// Closed-form derivative `ω'(δ)` for `δ ∈ (0, domain_end]`
    /// (right slope for tabulated moduli).
    pub fn derivative(&self, delta: f64) -> f64 {
        let d = delta.clamp(0.0, self.domain_end);
        let base = match &self.kind {
            ModulusKind::Holder { alpha } => alpha * d.powf(alpha - 1.0),
            ModulusKind::Lipschitz => 1.0,
            ModulusKind::XLog => -d.ln(),
            ModulusKind::SqrtLog => {
                let l = 1.0 - d.ln();
                l.sqrt() - 0.5 / l.sqrt()
            }
            ModulusKind::InvLog => {
                let l = 1.0 - d.ln();
                1.0 / (d * l * l)
            }
            ModulusKind::Tabulated(t) => t.slope(d),
        };
        self.scale * base
    }

    /// Exact `∫₀ˣ ω` for tabulated moduli.
    pub(crate) fn tabulated_integral(&self, x: f64) -> Option<f64> {
        match &self.kind {
            ModulusKind::Tabulated(t) => Some(self.scale * t.integral(x)),
            _ => None,
        }
    }

    fn require_monotone(&self) -> Result<()> {
        if let ModulusKind::Tabulated(t) = &self.kind {
            if !t.is_monotone() {
                return Err(Error::InvalidModulus(
                    "tabulated modulus is not monotone".into(),
                ));
            }
        }
        Ok(())
    }

    /// `ω⁻¹(y)`, clamped to `domain_end` once `y ≥ ω(domain_end)`.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        self.require_monotone()?;
        if !(y >= 0.0) {
            return Err(Error::Domain {
                what: "modulus inverse",
                value: y,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        if y == 0.0 {
            return Ok(0.0);
        }
        if y >= self.at(self.domain_end) {
            return Ok(self.domain_end);
        }
        let u = y / self.scale;
        let closed = match &self.kind {
            ModulusKind::Holder { alpha } => Some(u.powf(1.0 / alpha)),
            ModulusKind::Lipschitz => Some(u),
            ModulusKind::InvLog => Some((1.0 - 1.0 / u).exp()),
            _ => None,
        };
        if let Some(d) = closed {
            return Ok(d.min(self.domain_end));
        }
        Ok(bisect_increasing(|d| self.at(d), y, 0.0, self.domain_end, INVERSE_RESIDUAL * y))
    }

    /// `Ω(z)`: the inverse of `x ↦ x·ω(x)` on `[0, domain_end]`.
    pub fn omega_cap(&self, z: f64) -> Result<f64> {
        self.require_monotone()?;
        let top = self.domain_end * self.at(self.domain_end);
        if !(z >= 0.0 && z <= top) {
            return Err(Error::Domain {
                what: "omega_cap",
                value: z,
                lo: 0.0,
                hi: top,
            });
        }
        if z == 0.0 {
            return Ok(0.0);
        }
        Ok(bisect_increasing(
            |x| x * self.at(x),
            z,
            0.0,
            self.domain_end,
            INVERSE_RESIDUAL * z,
        ))
    }

    /// `Λ(x) = x·ω(1/x)` for `x ≥ 1` with `1/x` in the domain.
    pub fn lambda(&self, x: f64) -> Result<f64> {
        if !(x >= 1.0) || 1.0 / x > self.domain_end {
            return Err(Error::Domain {
                what: "lambda",
                value: x,
                lo: (1.0f64).max(1.0 / self.domain_end),
                hi: f64::INFINITY,
            });
        }
        Ok(x * self.at(1.0 / x))
    }

    /// Sample grid used by [`Modulus::concave_majorant`]: `0` followed by
    /// `grid_size - 1` log-spaced points ending at `domain_end`.
    pub fn majorant_grid(&self, grid_size: usize) -> Vec<f64> {
        let mut g = vec![0.0];
        g.extend(log_space(self.domain_end * 1e-12, self.domain_end, grid_size - 1));
        g
    }

    /// Least concave majorant of the sampled graph, as a tabulated modulus
    /// on the sample grid.
    pub fn concave_majorant(&self, grid_size: usize) -> Result<Modulus> {
        if grid_size < 3 {
            return Err(Error::InvalidModulus("majorant grid needs at least 3 points".into()));
        }
        let xs = self.majorant_grid(grid_size);
        let ys: Vec<f64> = xs.iter().map(|&x| self.at(x)).collect();
        let hull = upper_hull(&xs, &ys);
        let mut values = Vec::with_capacity(xs.len());
        let mut seg = 0;
        for &x in &xs {
            while seg + 2 < hull.len() && xs[hull[seg + 1]] <= x {
                seg += 1;
            }
            let (i, j) = (hull[seg], hull[(seg + 1).min(hull.len() - 1)]);
            let v = if i == j || x == xs[i] {
                ys[i]
            } else if x == xs[j] {
                ys[j]
            } else {
                ys[i] + (ys[j] - ys[i]) * (x - xs[i]) / (xs[j] - xs[i])
            };
            values.push(v);
        }
        // The hull passes through every sample it dominates exactly; keep the
        // sample value there so that ω ≤ ω* holds bit-for-bit.
        for (v, y) in values.iter_mut().zip(&ys) {
            *v = v.max(*y);
        }
        let table = Table {
            deltas: xs,
            values,
        };
        Modulus::new(ModulusKind::Tabulated(Arc::new(table)), self.domain_end, 1.0)
    }

    /// Grid-based regularity certification on `scan_grid` log-spaced points.
    pub fn classify_regularity(&self, scan_grid: usize) -> Result<RegularityReport> {
        if scan_grid < 16 {
            return Err(Error::InvalidModulus("scan grid needs at least 16 points".into()));
        }
        let xs = log_space(self.domain_end * 1e-12, self.domain_end, scan_grid);
        let om: Vec<f64> = xs.iter().map(|&x| self.at(x)).collect();
        let min_prefix = scan_grid / 4;

        let mut monotone_candidates = Vec::new();
        let mut increasing_candidates = Vec::new();
        for step in 1..=9 {
            let alpha = step as f64 / 10.0;
            let ratio: Vec<f64> = xs.iter().zip(&om).map(|(x, w)| w / x.powf(alpha)).collect();
            let dec = ratio
                .windows(2)
                .take_while(|w| w[1] <= w[0] * (1.0 - 1e-12))
                .count();
            if dec >= min_prefix {
                monotone_candidates.push(AlphaCutoff {
                    alpha,
                    cutoff: xs[dec],
                });
            }
            let inc = ratio
                .windows(2)
                .take_while(|w| w[1] >= w[0] * (1.0 + 1e-12))
                .count();
            if inc >= min_prefix {
                increasing_candidates.push(AlphaCutoff {
                    alpha,
                    cutoff: xs[inc],
                });
            }
        }
        // Decreasing for α implies decreasing for every β > α, so the
        // certified set is an up-interval; report its midpoint.
        let alpha_monotone = match (monotone_candidates.first(), monotone_candidates.last()) {
            (Some(lo), Some(hi)) => {
                let alpha = 0.5 * (lo.alpha + hi.alpha);
                let ratio: Vec<f64> = xs.iter().zip(&om).map(|(x, w)| w / x.powf(alpha)).collect();
                let dec = ratio
                    .windows(2)
                    .take_while(|w| w[1] <= w[0] * (1.0 - 1e-12))
                    .count();
                (dec >= min_prefix).then(|| AlphaCutoff {
                    alpha,
                    cutoff: xs[dec],
                })
            }
            _ => None,
        };
        let alpha_increasing = increasing_candidates.last().copied();

        let over_x: Vec<f64> = xs.iter().zip(&om).map(|(x, w)| w / x).collect();
        let ratio_over_x_decreasing = over_x.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));

        let claim4 = alpha_monotone.map(|ac| self.check_claim4(ac));

        Ok(RegularityReport {
            scan_resolution: scan_grid,
            alpha_monotone,
            monotone_candidates,
            alpha_increasing,
            increasing_candidates,
            ratio_over_x_decreasing,
            xlog_limit_class: self.xlog_limit_class(),
            claim4,
        })
    }

    /// Tail behaviour of `ω(x)/(x·log(e/x))` as `x → 0`, from the exponent
    /// `p` in `R(x) ≈ log(e/x)^p` fitted over `x ∈ [1e-300, 1e-50]`.
    fn xlog_limit_class(&self) -> XlogLimit {
        let (mut lx, mut ly) = (Vec::new(), Vec::new());
        for k in (50..=300).step_by(10) {
            let x = self.domain_end * 10f64.powi(-k);
            let l = 1.0 - x.ln();
            let r = self.at(x) / (x * l);
            if r > 0.0 && r.is_finite() {
                lx.push(l.ln());
                ly.push(r.ln());
            }
        }
        if lx.len() < 3 {
            return XlogLimit::Unbounded;
        }
        let p = ls_slope(&lx, &ly);
        if p < -0.05 {
            XlogLimit::Zero
        } else if p > 0.05 {
            XlogLimit::Unbounded
        } else {
            XlogLimit::Bounded
        }
    }

    fn check_claim4(&self, ac: AlphaCutoff) -> Claim4Check {
        let c = 1.0 - ac.alpha;
        let mut min_ratio = f64::INFINITY;
        for x in log_space(1.0 / ac.cutoff, 1e12, 256) {
            let h = 1e-6 * x;
            let lam = |t: f64| t * self.at(1.0 / t);
            let dlam = (lam(x + h) - lam(x - h)) / (2.0 * h);
            min_ratio = min_ratio.min(dlam / self.at(1.0 / x));
        }
        Claim4Check {
            c,
            min_ratio,
            holds: min_ratio >= c * (1.0 - 1e-6),
        }
    }
}

/// Indices of the upper convex hull of points sorted by abscissa.
fn upper_hull(xs: &[f64], ys: &[f64]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::with_capacity(xs.len());
    for i in 0..xs.len() {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // Drop b when it lies on or below the chord a → i.
            let cross = (xs[b] - xs[a]) * (ys[i] - ys[a]) - (ys[b] - ys[a]) * (xs[i] - xs[a]);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    hull
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlphaCutoff {
    pub alpha: f64,
    pub cutoff: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum XlogLimit {
    Zero,
    Bounded,
    Unbounded,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Claim4Check {
    pub c: f64,
    /// `min Λ'(x)/ω(1/x)` over the scan.
    pub min_ratio: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegularityReport {
    pub scan_resolution: usize,
    /// `ω(x)/x^α` decreasing on `(0, cutoff)`.
    pub alpha_monotone: Option<AlphaCutoff>,
    pub monotone_candidates: Vec<AlphaCutoff>,
    /// `ω(x)/x^α` increasing on `[0, cutoff]`; the largest certified α.
    pub alpha_increasing: Option<AlphaCutoff>,
    pub increasing_candidates: Vec<AlphaCutoff>,
    pub ratio_over_x_decreasing: bool,
    pub xlog_limit_class: XlogLimit,
    pub claim4: Option<Claim4Check>,
}

impl RegularityReport {
    /// Every scanned α ∈ {0.1, …, 0.9} certified increasing near 0.
    pub fn increasing_for_all_alpha(&self) -> bool {
        self.increasing_candidates.len() == 9
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::E;

    fn table(pts: &[(f64, f64)]) -> Modulus {
        Modulus::tabulated(
            Table::new(pts.iter().map(|p| p.0).collect(), pts.iter().map(|p| p.1).collect()).unwrap(),
        )
    }

    #[test]
    fn eval_examples() {
        assert_relative_eq!(Modulus::holder(0.5).unwrap().eval(0.25).unwrap(), 0.5);
        assert_eq!(Modulus::xlog().eval(1.0).unwrap(), 1.0);
        for m in [Modulus::lipschitz(), Modulus::xlog(), Modulus::sqrtlog(), Modulus::invlog()] {
            assert_eq!(m.eval(0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn eval_outside_domain() {
        let m = Modulus::new(ModulusKind::Lipschitz, 0.5, 1.0).unwrap();
        assert!(matches!(m.eval(0.6), Err(Error::Domain { .. })));
        assert!(matches!(m.eval(-1e-3), Err(Error::Domain { .. })));
    }

    #[test]
    fn inverse_examples() {
        assert_relative_eq!(Modulus::lipschitz().inverse(0.3).unwrap(), 0.3, epsilon = 1e-13);
        assert_relative_eq!(Modulus::holder(0.5).unwrap().inverse(0.5).unwrap(), 0.25, epsilon = 1e-13);
        // closed form for invlog: δ = e^{1 - 1/y}
        let d = Modulus::invlog().inverse(0.5).unwrap();
        assert_relative_eq!(d, (1.0f64 - 2.0).exp(), max_relative = 1e-11);
        assert_relative_eq!(d, 0.367_879_441_171_442_3, max_relative = 1e-11);
    }

    #[test]
    fn inverse_clamps() {
        assert_eq!(Modulus::lipschitz().inverse(2.0).unwrap(), 1.0);
        let m = Modulus::new(ModulusKind::Holder { alpha: 0.5 }, 0.25, 1.0).unwrap();
        assert_eq!(m.inverse(0.9).unwrap(), 0.25);
    }

    #[test]
    fn inverse_rejects_non_monotone_table() {
        let m = table(&[(0.0, 0.0), (0.5, 0.6), (1.0, 0.4)]);
        assert!(matches!(m.inverse(0.1), Err(Error::InvalidModulus(_))));
    }

    #[test]
    fn omega_cap_examples() {
        assert_relative_eq!(Modulus::lipschitz().omega_cap(0.04).unwrap(), 0.2, epsilon = 1e-13);
        assert_eq!(Modulus::sqrtlog().omega_cap(0.0).unwrap(), 0.0);
        assert_relative_eq!(Modulus::holder(0.5).unwrap().omega_cap(0.125).unwrap(), 0.25, epsilon = 1e-12);
        assert!(Modulus::lipschitz().omega_cap(1.5).is_err());
    }

    #[test]
    fn lambda_examples() {
        assert_relative_eq!(Modulus::holder(0.5).unwrap().lambda(4.0).unwrap(), 2.0);
        assert_relative_eq!(Modulus::lipschitz().lambda(37.0).unwrap(), 1.0);
        assert_relative_eq!(Modulus::invlog().lambda(E).unwrap(), E / 2.0, max_relative = 1e-15);
        assert!(Modulus::lipschitz().lambda(0.5).is_err());
    }

    /// Brute-force least concave majorant: at each sample, the largest value
    /// of any chord between samples on either side.
    fn brute_majorant(xs: &[f64], ys: &[f64]) -> Vec<f64> {
        (0..xs.len())
            .map(|i| {
                let mut best = ys[i];
                for j in 0..=i {
                    for k in i..xs.len() {
                        if j == k {
                            continue;
                        }
                        let v = ys[j] + (ys[k] - ys[j]) * (xs[i] - xs[j]) / (xs[k] - xs[j]);
                        best = best.max(v);
                    }
                }
                best
            })
            .collect()
    }

    #[test]
    fn majorant_matches_brute_force() {
        let m = table(&[(0.0, 0.0), (0.5, 0.2), (1.0, 1.0)]);
        let star = m.concave_majorant(3).unwrap();
        // chord from (0,0) to (1,1)
        assert_relative_eq!(star.at(0.5), 0.5, epsilon = 1e-12);

        let m = table(&[(0.0, 0.0), (0.1, 0.3), (0.3, 0.3), (0.5, 0.6), (1.0, 0.7)]);
        let star = m.concave_majorant(64).unwrap();
        let xs = m.majorant_grid(64);
        let ys: Vec<f64> = xs.iter().map(|&x| m.at(x)).collect();
        let brute = brute_majorant(&xs, &ys);
        for (x, b) in xs.iter().zip(brute) {
            assert_relative_eq!(star.at(*x), b, epsilon = 1e-12);
        }
    }

    #[test]
    fn majorant_fixes_concave() {
        for m in [Modulus::holder(0.5).unwrap(), Modulus::lipschitz()] {
            let star = m.concave_majorant(512).unwrap();
            for x in m.majorant_grid(512) {
                assert!((star.at(x) - m.at(x)).abs() <= 1e-12, "{m} at {x}");
            }
        }
    }

    #[test]
    fn regularity_holder() {
        let r = Modulus::holder(0.5).unwrap().classify_regularity(256).unwrap();
        let ac = r.alpha_monotone.unwrap();
        assert_relative_eq!(ac.alpha, 0.75, epsilon = 1e-12);
        assert_eq!(ac.cutoff, 1.0);
        assert_eq!(r.xlog_limit_class, XlogLimit::Unbounded);
        let c4 = r.claim4.unwrap();
        assert!(c4.holds, "{c4:?}");
        // Λ'(x)/ω(1/x) = 1/2 for ω = δ^{1/2}
        assert_relative_eq!(c4.min_ratio, 0.5, max_relative = 1e-5);
    }

    #[test]
    fn regularity_lipschitz_and_logs() {
        let r = Modulus::lipschitz().classify_regularity(64).unwrap();
        assert!(r.ratio_over_x_decreasing);
        assert_eq!(r.xlog_limit_class, XlogLimit::Zero);
        assert!(r.alpha_monotone.is_none());
        assert!(r.increasing_for_all_alpha());

        let r = Modulus::sqrtlog().classify_regularity(64).unwrap();
        assert_eq!(r.xlog_limit_class, XlogLimit::Zero);
        assert!(r.ratio_over_x_decreasing);

        assert_eq!(Modulus::xlog().classify_regularity(64).unwrap().xlog_limit_class, XlogLimit::Bounded);
        assert_eq!(Modulus::invlog().classify_regularity(64).unwrap().xlog_limit_class, XlogLimit::Unbounded);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for m in [
            Modulus::holder(0.3).unwrap(),
            Modulus::lipschitz(),
            Modulus::xlog(),
            Modulus::sqrtlog(),
            Modulus::invlog(),
        ] {
            for x in [1e-4, 0.01, 0.3, 0.9] {
                let h = 1e-7 * x;
                let fd = (m.at(x + h) - m.at(x - h)) / (2.0 * h);
                assert_relative_eq!(m.derivative(x), fd, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn parse_specs() {
        assert_eq!(Modulus::parse("holder:0.5").unwrap(), Modulus::holder(0.5).unwrap());
        assert_eq!(Modulus::parse("sqrtlog").unwrap(), Modulus::sqrtlog());
        assert!(Modulus::parse("holder:1.5").is_err());
        assert!(Modulus::parse("bogus").is_err());
    }

    #[test]
    fn table_validation_and_csv() {
        assert!(Table::new(vec![0.1, 0.5], vec![0.0, 0.1]).is_err());
        assert!(Table::new(vec![0.0, 0.5, 0.5], vec![0.0, 0.1, 0.2]).is_err());
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("w.csv");
        std::fs::write(&p, "delta,value\n0,0\n0.5,0.4\n1,0.6\n").unwrap();
        let m = Modulus::parse(&format!("tabulated:{}", p.display())).unwrap();
        assert_relative_eq!(m.at(0.25), 0.2);
        assert_relative_eq!(m.tabulated_integral(1.0).unwrap(), 0.5 * 0.5 * 0.4 + 0.5 * 0.5 * (0.4 + 0.6));
    }
}
