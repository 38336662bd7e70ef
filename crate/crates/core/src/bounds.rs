//! Upper and lower growth bounds as functions of `n`, and dyadic-window
//! fits of their unspecified constants.
//!
//! Every bound on `log Γₙ` is written as `fixed(n) + K·shape(n)` with a single
//! constant `K`; fitting takes the extreme ratio `(log Γₙ − fixed)/shape` over
//! the windows `[N/4, N/2]` and `[N/2, N]`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::dynamics::GrowthRecord;
use crate::error::{Error, Result};
use crate::modulus::{Modulus, XlogLimit};

pub const DEFAULT_STABILITY_FACTOR: f64 = 1.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Theorem {
    /// `Γₙ ≤ C·n²`
    Thm2,
    /// `log Γₙ ≤ C·n^{1−α}`
    Thm3,
    /// `log Γₙ ≤ log(n/ω⁻¹(2/n)) + C·n·ω(1/n)`
    Thm4,
    /// `log Γₙ ≤ C·n·ω(1/n)`
    Thm5,
    /// `log Γₙ ≤ C·log(n/ω⁻¹(2/n))`
    Cor5_1,
    /// `log Γₙ ≤ (1 + C)·log(n/ω⁻¹(2/n))`, `C → 0`
    Cor5_2,
    /// `log Γₙ ≥ (1−ε)·log(n/ω⁻¹(c/n))`
    Thm6Lower,
    /// `log Γₙ ≥ c·n^{1−ε}·ω(1/n)`
    Thm7Lower,
}

impl Theorem {
    pub const ALL: [Theorem; 8] = [
        Theorem::Thm2,
        Theorem::Thm3,
        Theorem::Thm4,
        Theorem::Thm5,
        Theorem::Cor5_1,
        Theorem::Cor5_2,
        Theorem::Thm6Lower,
        Theorem::Thm7Lower,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Theorem::Thm2 => "thm2",
            Theorem::Thm3 => "thm3",
            Theorem::Thm4 => "thm4",
            Theorem::Thm5 => "thm5",
            Theorem::Cor5_1 => "cor5_1",
            Theorem::Cor5_2 => "cor5_2",
            Theorem::Thm6Lower => "thm6_lower",
            Theorem::Thm7Lower => "thm7_lower",
        }
    }

    pub fn is_lower(self) -> bool {
        matches!(self, Theorem::Thm6Lower | Theorem::Thm7Lower)
    }

    /// Name of the constant that [`fit_constant`] estimates.
    pub fn fitted_constant(self) -> &'static str {
        match self {
            Theorem::Thm6Lower => "eps",
            Theorem::Thm7Lower => "c",
            _ => "C",
        }
    }

    fn required(self) -> &'static [&'static str] {
        match self {
            Theorem::Thm2 | Theorem::Thm4 | Theorem::Thm5 | Theorem::Cor5_1 | Theorem::Cor5_2 => &["C"],
            Theorem::Thm3 => &["C", "alpha"],
            Theorem::Thm6Lower | Theorem::Thm7Lower => &["c", "eps"],
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Theorem {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Theorem::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Spec(format!("unknown theorem '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Constant {
    Fixed(f64),
    ToFit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundSpec {
    pub theorem: Theorem,
    pub modulus: Modulus,
    pub constants: BTreeMap<String, Constant>,
}

impl BoundSpec {
    /// Builds a spec, filling `alpha` from a Hölder or Lipschitz modulus when absent.
    pub fn new(theorem: Theorem, modulus: Modulus, constants: BTreeMap<String, Constant>) -> Result<Self> {
        let mut constants = constants;
        if theorem == Theorem::Thm3 && !constants.contains_key("alpha") {
            if let Some(a) = modulus.holder_exponent() {
                constants.insert("alpha".into(), Constant::Fixed(a));
            }
        }
        for key in theorem.required() {
            if !constants.contains_key(*key) && *key != theorem.fitted_constant() {
                return Err(Error::Spec(format!("{theorem} needs constant '{key}'")));
            }
        }
        Ok(Self {
            theorem,
            modulus,
            constants,
        })
    }

    /// Parses `C=1,c=2,eps=0.1`; `fit` marks a constant to be fitted.
    pub fn parse_constants(s: &str) -> Result<BTreeMap<String, Constant>> {
        let mut out = BTreeMap::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Spec(format!("constant '{part}' is not key=value")))?;
            let c = match v.trim() {
                "fit" => Constant::ToFit,
                num => Constant::Fixed(
                    num.parse()
                        .map_err(|e| Error::Spec(format!("constant {k}: {e}")))?,
                ),
            };
            out.insert(k.trim().to_string(), c);
        }
        Ok(out)
    }

    fn get(&self, key: &str) -> Result<f64> {
        match self.constants.get(key) {
            Some(Constant::Fixed(v)) => Ok(*v),
            Some(Constant::ToFit) => Err(Error::Spec(format!(
                "constant '{key}' of {} is marked for fitting",
                self.theorem
            ))),
            None => Err(Error::Spec(format!("{} needs constant '{key}'", self.theorem))),
        }
    }

    /// `ω(1/n)`, with `1/n` clamped to the modulus domain.
    fn omega_recip(&self, n: f64) -> f64 {
        self.modulus.at((1.0 / n).min(self.modulus.domain_end()))
    }

    /// `log(n/ω⁻¹(y/n))` with the clamped inverse.
    fn log_ratio(&self, y: f64, n: f64) -> Result<f64> {
        let d = self.modulus.inverse(y / n)?;
        if !(d > 0.0) {
            return Err(Error::Spec(format!("ω⁻¹({y}/{n}) = 0")));
        }
        Ok((n / d).ln())
    }

    /// `(fixed(n), shape(n))` with the bound equal to `fixed + K·shape`.
    fn decompose(&self, n: f64) -> Result<(f64, f64)> {
        Ok(match self.theorem {
            Theorem::Thm2 => (2.0 * n.ln(), 1.0),
            Theorem::Thm3 => (0.0, n.powf(1.0 - self.get("alpha")?)),
            Theorem::Thm4 => (self.log_ratio(2.0, n)?, n * self.omega_recip(n)),
            Theorem::Thm5 => (0.0, n * self.omega_recip(n)),
            Theorem::Cor5_1 => (0.0, self.log_ratio(2.0, n)?),
            Theorem::Cor5_2 => {
                let l = self.log_ratio(2.0, n)?;
                (l, l)
            }
            Theorem::Thm6Lower => (0.0, self.log_ratio(self.get("c")?, n)?),
            Theorem::Thm7Lower => (0.0, n.powf(1.0 - self.get("eps")?) * self.omega_recip(n)),
        })
    }

    fn constant_value(&self) -> Result<f64> {
        match self.theorem {
            // log C enters additively
            Theorem::Thm2 => Ok(self.get("C")?.ln()),
            Theorem::Thm6Lower => Ok(1.0 - self.get("eps")?),
            Theorem::Thm7Lower => self.get("c"),
            _ => self.get("C"),
        }
    }

    fn value(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::Spec("bounds are defined for n ≥ 1".into()));
        }
        let (fixed, shape) = self.decompose(n as f64)?;
        Ok(fixed + self.constant_value()? * shape)
    }
}

/// Value of an upper bound on `log Γₙ`.
pub fn upper_bound(spec: &BoundSpec, n: usize) -> Result<f64> {
    if spec.theorem.is_lower() {
        return Err(Error::Spec(format!("{} is a lower bound", spec.theorem)));
    }
    spec.value(n)
}

/// Value of a lower bound on `log Γₙ`.
pub fn lower_bound(spec: &BoundSpec, n: usize) -> Result<f64> {
    if !spec.theorem.is_lower() {
        return Err(Error::Spec(format!("{} is an upper bound", spec.theorem)));
    }
    spec.value(n)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitReport {
    /// Overall fitted constant (max of the windows for upper bounds, min for lower).
    pub constant: f64,
    pub early: f64,
    pub late: f64,
    pub windows: [(usize, usize); 2],
    pub stable: bool,
}

pub fn fit_constant(records: &[GrowthRecord], spec: &BoundSpec) -> Result<FitReport> {
    fit_constant_with(records, spec, DEFAULT_STABILITY_FACTOR)
}

/// Dyadic-window fit. Upper bounds: `C*` is the largest ratio and the fit is
/// stable when `late ≤ factor·early`. Lower bounds: `c*` is the smallest ratio
/// and the fit is stable when both windows are positive and
/// `late ≥ early/factor`. For Theorem 2 the ratio is `Γₙ/n²`; for Theorem 6
/// the fitted number is the coefficient standing in for `1 − ε`.
pub fn fit_constant_with(records: &[GrowthRecord], spec: &BoundSpec, factor: f64) -> Result<FitReport> {
    let n_last = records.last().map(|r| r.n).unwrap_or(0);
    if n_last < 4 {
        return Err(Error::Spec("fitting needs records up to n ≥ 4".into()));
    }
    let windows = [(n_last / 4, n_last / 2), (n_last / 2, n_last)];
    let lower = spec.theorem.is_lower();
    let mut ext = [None::<f64>; 2];
    for r in records.iter().filter(|r| r.n >= windows[0].0) {
        let (fixed, shape) = spec.decompose(r.n as f64)?;
        if !(shape > 0.0) || !shape.is_finite() {
            return Err(Error::Spec(format!(
                "degenerate bound shape {shape} at n = {}",
                r.n
            )));
        }
        let ratio = match spec.theorem {
            Theorem::Thm2 => (r.log_gamma - fixed).exp(),
            _ => (r.log_gamma - fixed) / shape,
        };
        for (w, e) in windows.iter().zip(ext.iter_mut()) {
            if r.n >= w.0 && r.n <= w.1 {
                *e = Some(match *e {
                    None => ratio,
                    Some(v) if lower => v.min(ratio),
                    Some(v) => v.max(ratio),
                });
            }
        }
    }
    let (early, late) = match ext {
        [Some(a), Some(b)] => (a, b),
        _ => return Err(Error::Spec("records do not cover both dyadic windows".into())),
    };
    let (constant, stable) = if lower {
        (early.min(late), early > 0.0 && late > 0.0 && late * factor >= early)
    } else {
        (early.max(late), late <= factor * early.max(0.0))
    };
    Ok(FitReport {
        constant,
        early,
        late,
        windows,
        stable,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cor5Case {
    /// `ω(x)/(x·log(e/x))` bounded
    Case1,
    /// `ω(x)/(x·log(e/x)) → 0`
    Case2,
    Neither,
}

pub fn corollary5_applicability(m: &Modulus) -> Result<Cor5Case> {
    Ok(match m.classify_regularity(256)?.xlog_limit_class {
        XlogLimit::Zero => Cor5Case::Case2,
        XlogLimit::Bounded => Cor5Case::Case1,
        XlogLimit::Unbounded => Cor5Case::Neither,
    })
}
