//! Orientation-preserving C¹ diffeomorphisms of `[0, 1]` fixing both ends.
//!
//! Every map carries closed-form `f`, `f'` and displacement `φ = f − x`.
//! Displacement is evaluated directly rather than as `f(x) − x` so that it
//! keeps full relative precision near parabolic fixed points.

mod construct;
mod paste;
mod sharpness;
mod spline;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::modulus::Modulus;
use crate::numerics::{lin_space, newton_bisect_increasing, windowed_oscillation};

pub use construct::FromModulusMap;
pub use paste::{Block, PastedMap, PastedSpec};
pub use sharpness::{SharpnessMap, SHARPNESS_GRID, SHARPNESS_MODULUS_CAP};

/// Direction of the displacement near 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    /// `f(x) < x` on `(0, 1)`.
    Contracting,
    /// `f(x) > x` on `(0, 1)`.
    Expanding,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Contracting => -1.0,
            Sign::Expanding => 1.0,
        }
    }
}

impl std::str::FromStr for Sign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "contracting" => Ok(Sign::Contracting),
            "expanding" => Ok(Sign::Expanding),
            other => Err(Error::Config(format!("unknown sign '{other}'"))),
        }
    }
}

/// Which constructor produced a map, and with which parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Description {
    pub constructor: &'static str,
    pub params: Vec<(&'static str, String)>,
}

impl Description {
    fn new(constructor: &'static str) -> Self {
        Self {
            constructor,
            params: Vec::new(),
        }
    }

    fn with(mut self, key: &'static str, value: impl ToString) -> Self {
        self.params.push((key, value.to_string()));
        self
    }

    pub fn param(&self, key: &str) -> Option<&str> {
        self.params.iter().find(|(k, _)| *k == key).map(|(_, v)| v.as_str())
    }
}

impl fmt::Display for Description {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.constructor)?;
        for (i, (k, v)) in self.params.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k}={v}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug)]
enum Kernel {
    Identity,
    Moebius,
    FromModulus(FromModulusMap),
    Sharpness(SharpnessMap),
    Pasted(PastedMap),
    /// `outer ∘ inner`
    Compose(Diffeo, Diffeo),
    Inverse(Diffeo),
}

#[derive(Clone, Debug)]
pub struct Diffeo {
    kernel: Arc<Kernel>,
    fixed_points: Arc<[f64]>,
    description: Description,
}

impl Diffeo {
    fn from_kernel(kernel: Kernel, mut fixed_points: Vec<f64>, description: Description) -> Self {
        fixed_points.sort_by(f64::total_cmp);
        fixed_points.dedup();
        Self {
            kernel: Arc::new(kernel),
            fixed_points: fixed_points.into(),
            description,
        }
    }

    pub fn identity() -> Self {
        // Every point is fixed; only the endpoints are listed.
        Self::from_kernel(Kernel::Identity, vec![0.0, 1.0], Description::new("identity"))
    }

    /// `f(x) = 2x/(1+x)`: hyperbolic fixed points with `f'(0) = 2`, `f'(1) = 1/2`.
    pub fn moebius_test() -> Self {
        Self::from_kernel(Kernel::Moebius, vec![0.0, 1.0], Description::new("moebius_test"))
    }

    /// `f(x) = x ∓ ∫₀ˣ ω` on `[0, ε]`, mirrored near 1, with a quintic bridge.
    pub fn from_modulus(m: &Modulus, epsilon: f64, sign: Sign) -> Result<Self> {
        let map = FromModulusMap::new(m, epsilon, sign)?;
        let desc = Description::new("from_modulus")
            .with("modulus", m)
            .with("epsilon", epsilon)
            .with("sign", format!("{sign:?}").to_lowercase());
        Ok(Self::from_kernel(Kernel::FromModulus(map), vec![0.0, 1.0], desc))
    }

    /// `f(t) = t/(1+t) + t^{2+ε}·ω(t)·sin(2π/t)` on `[0, a(ε)]`, extended to `[0, 1]`.
    pub fn sharpness_family(m: &Modulus, epsilon: f64, k_min: u64) -> Result<Self> {
        let map = SharpnessMap::new(m, epsilon, k_min)?;
        let desc = Description::new("sharpness")
            .with("modulus", m)
            .with("epsilon", epsilon)
            .with("k_min", k_min)
            .with("reach", map.reach())
            .with("k_start", map.k_start())
            .with("modulus_constant", map.certified_constant());
        Ok(Self::from_kernel(Kernel::Sharpness(map), vec![0.0, 1.0], desc))
    }

    pub fn paste(spec: PastedSpec) -> Result<Self> {
        let map = PastedMap::new(spec)?;
        let mut fixed = vec![0.0, 1.0];
        for b in map.blocks() {
            fixed.push(b.a);
            fixed.push(b.b);
        }
        let desc = Description::new("pasted")
            .with("blocks", map.blocks().len())
            .with("max_glue_second_derivative", map.max_glue_second_derivative());
        Ok(Self::from_kernel(Kernel::Pasted(map), fixed, desc))
    }

    /// `self ∘ inner`. Fixed points listed are those shared by both maps.
    pub fn compose(&self, inner: &Diffeo) -> Self {
        let fixed = self
            .fixed_points
            .iter()
            .copied()
            .filter(|p| inner.fixed_points.contains(p))
            .collect();
        let desc = Description::new("compose")
            .with("outer", &self.description)
            .with("inner", &inner.description);
        Self::from_kernel(Kernel::Compose(self.clone(), inner.clone()), fixed, desc)
    }

    /// The inverse map, evaluated numerically through [`Diffeo::inverse_eval`].
    pub fn inverse(&self) -> Self {
        let desc = Description::new("inverse").with("of", &self.description);
        Self::from_kernel(Kernel::Inverse(self.clone()), self.fixed_points.to_vec(), desc)
    }

    pub fn fixed_points(&self) -> &[f64] {
        &self.fixed_points
    }

    pub fn description(&self) -> &Description {
        &self.description
    }

    pub fn as_sharpness(&self) -> Option<&SharpnessMap> {
        match &*self.kernel {
            Kernel::Sharpness(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_from_modulus(&self) -> Option<&FromModulusMap> {
        match &*self.kernel {
            Kernel::FromModulus(m) => Some(m),
            _ => None,
        }
    }

    pub fn as_pasted(&self) -> Option<&PastedMap> {
        match &*self.kernel {
            Kernel::Pasted(p) => Some(p),
            _ => None,
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match &*self.kernel {
            Kernel::Identity => x,
            Kernel::Moebius => 2.0 * x / (1.0 + x),
            Kernel::FromModulus(m) => m.eval(x),
            Kernel::Sharpness(s) => s.eval(x),
            Kernel::Pasted(p) => p.eval(x),
            Kernel::Compose(f, g) => f.eval(g.eval(x)),
            Kernel::Inverse(f) => f.inverse_eval(x),
        }
    }

    #[inline]
    pub fn deriv(&self, x: f64) -> f64 {
        match &*self.kernel {
            Kernel::Identity => 1.0,
            Kernel::Moebius => 2.0 / ((1.0 + x) * (1.0 + x)),
            Kernel::FromModulus(m) => m.deriv(x),
            Kernel::Sharpness(s) => s.deriv(x),
            Kernel::Pasted(p) => p.deriv(x),
            Kernel::Compose(f, g) => f.deriv(g.eval(x)) * g.deriv(x),
            Kernel::Inverse(f) => 1.0 / f.deriv(f.inverse_eval(x)),
        }
    }

    /// `f(x) − x`.
    #[inline]
    pub fn displacement(&self, x: f64) -> f64 {
        match &*self.kernel {
            Kernel::Identity => 0.0,
            Kernel::Moebius => x * (1.0 - x) / (1.0 + x),
            Kernel::FromModulus(m) => m.displacement(x),
            Kernel::Sharpness(s) => s.displacement(x),
            Kernel::Pasted(p) => p.displacement(x),
            Kernel::Compose(f, g) => {
                let y = g.eval(x);
                f.displacement(y) + g.displacement(x)
            }
            Kernel::Inverse(f) => -f.displacement(f.inverse_eval(x)),
        }
    }

    /// Value and derivative in one call, sharing the work where possible.
    #[inline]
    pub fn eval_with_deriv(&self, x: f64) -> (f64, f64) {
        match &*self.kernel {
            Kernel::Sharpness(s) => s.eval_with_deriv(x),
            Kernel::Compose(f, g) => {
                let (y, dg) = g.eval_with_deriv(x);
                let (z, df) = f.eval_with_deriv(y);
                (z, df * dg)
            }
            Kernel::Inverse(f) => {
                let x0 = f.inverse_eval(x);
                (x0, 1.0 / f.deriv(x0))
            }
            _ => (self.eval(x), self.deriv(x)),
        }
    }

    /// `f⁻¹(y)` to floating resolution; `|f(x) − y| ≤ 1e-13`.
    pub fn inverse_eval(&self, y: f64) -> f64 {
        match &*self.kernel {
            Kernel::Identity => return y,
            Kernel::Moebius => return y / (2.0 - y),
            Kernel::Inverse(f) => return f.eval(y),
            _ => {}
        }
        if y <= 0.0 {
            return 0.0;
        }
        if y >= 1.0 {
            return 1.0;
        }
        // f preserves each gap between consecutive fixed points.
        let i = self.fixed_points.partition_point(|&p| p <= y);
        let lo = self.fixed_points[i - 1];
        if lo == y {
            return y;
        }
        let hi = self.fixed_points.get(i).copied().unwrap_or(1.0);
        let guess = (y - self.displacement(y)).clamp(lo, hi);
        newton_bisect_increasing(|x| self.eval(x) - y, |x| self.deriv(x), lo, hi, guess)
    }

    /// `f'(ξ) = 1` within `tol` at every listed fixed point.
    pub fn is_tangential(&self, tol: f64) -> bool {
        self.fixed_points.iter().all(|&p| (self.deriv(p) - 1.0).abs() <= tol)
    }
}

/// Empirical modulus of continuity of `f'` on a uniform grid of
/// `x_grid_size` points: `(δ, max_{|x−y| ≤ δ} |f'(x) − f'(y)|)`.
pub fn estimate_derivative_modulus(f: &Diffeo, deltas: &[f64], x_grid_size: usize) -> Vec<(f64, f64)> {
    let xs = lin_space(0.0, 1.0, x_grid_size.max(2));
    let ds: Vec<f64> = xs.iter().map(|&x| f.deriv(x)).collect();
    let osc = windowed_oscillation(&xs, &ds, deltas);
    deltas.iter().copied().zip(osc).collect()
}

/// `ω̂_{f'}(δ)/ω(δ)` for each `δ`; infinite when `ω(δ) = 0 < ω̂_{f'}(δ)`.
pub fn membership_profile(f: &Diffeo, m: &Modulus, deltas: &[f64], x_grid_size: usize) -> Vec<(f64, f64)> {
    estimate_derivative_modulus(f, deltas, x_grid_size)
        .into_iter()
        .map(|(d, w)| {
            let om = m.at(d);
            let r = if w == 0.0 {
                0.0
            } else if om == 0.0 {
                f64::INFINITY
            } else {
                w / om
            };
            (d, r)
        })
        .collect()
}

/// `C(f) = max_δ ω̂_{f'}(δ)/ω(δ)` at the scan resolution.
pub fn membership_constant(f: &Diffeo, m: &Modulus, deltas: &[f64], x_grid_size: usize) -> f64 {
    membership_profile(f, m, deltas, x_grid_size)
        .into_iter()
        .map(|(_, r)| r)
        .fold(0.0, f64::max)
}
