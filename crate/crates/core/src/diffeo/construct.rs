//! `f₀(x) = x ∓ ∫₀ˣ ω` near 0, its mirror near 1, and a quintic bridge.

use super::spline::{Jet, Quintic};
use super::Sign;
use crate::error::{Error, Result};
use crate::modulus::{Modulus, ModulusKind};
use crate::numerics::{integrate, lin_space, QuadOptions};

const BRIDGE_CHECK_POINTS: usize = 4097;

/// `Φ(x) = ∫₀ˣ ω(t) dt` in closed form.
pub(crate) fn primitive(m: &Modulus, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let base = match m.kind() {
        ModulusKind::Holder { alpha } => x.powf(alpha + 1.0) / (alpha + 1.0),
        ModulusKind::Lipschitz => 0.5 * x * x,
        ModulusKind::XLog => x * x * (0.75 - 0.5 * x.ln()),
        ModulusKind::SqrtLog => sqrtlog_primitive(x),
        ModulusKind::InvLog => x * e1_scaled(1.0 - x.ln()),
        ModulusKind::Tabulated(_) => return m.tabulated_integral(x).unwrap_or(f64::NAN),
    };
    m.scale() * base
}

/// `∫₀ˣ t·sqrt(1 − ln t) dt` with `u = 1 − ln x`: erfc for moderate `u`,
/// its asymptotic series once `e^{-2u}` would underflow the erfc term.
fn sqrtlog_primitive(x: f64) -> f64 {
    let u = 1.0 - x.ln();
    if u < 40.0 {
        let e2 = std::f64::consts::E * std::f64::consts::E;
        0.5 * x * x * u.sqrt()
            + 0.25 * e2 * (0.5 * std::f64::consts::PI).sqrt() * libm::erfc((2.0 * u).sqrt())
    } else {
        // erfc(z)·e^{z²}·z·√π = Σ (−1)ᵏ (2k−1)!!/(2z²)ᵏ, z² = 2u
        let inv = 1.0 / (4.0 * u);
        let (mut term, mut sum) = (1.0, 1.0);
        for k in 1..60 {
            term *= -((2 * k - 1) as f64) * inv;
            sum += term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        x * x * (0.5 * u.sqrt() + sum / (8.0 * u.sqrt()))
    }
}

/// `e^u·E₁(u)` for `u ≥ 1`, so that `∫₀ˣ dt/(1 − ln t) = x·e^u·E₁(u)`
/// with `u = 1 − ln x`.
fn e1_scaled(u: f64) -> f64 {
    // Continued fraction for e^u·E₁(u), modified Lentz.
    let tiny = 1e-300;
    let mut b = u + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

#[derive(Clone, Debug)]
pub struct FromModulusMap {
    modulus: Modulus,
    epsilon: f64,
    sign: f64,
    bridge: Quintic,
}

impl FromModulusMap {
    pub(crate) fn new(m: &Modulus, epsilon: f64, sign: Sign) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(Error::Construction(format!("epsilon {epsilon} not in (0, 1/2)")));
        }
        if epsilon > m.domain_end() {
            return Err(Error::Construction(format!(
                "epsilon {epsilon} beyond the modulus domain {}",
                m.domain_end()
            )));
        }
        let w = m.at(epsilon);
        if !(w < 1.0) {
            return Err(Error::Construction(format!(
                "ω(ε) = {w} ≥ 1, so 1 − ω(ε) is not a positive derivative"
            )));
        }
        let phi_eps = primitive(m, epsilon);
        let quad = integrate(|t| m.at(t), 0.0, epsilon, QuadOptions::default())?;
        if (quad.value - phi_eps).abs() > 1e-10 * phi_eps.abs().max(f64::MIN_POSITIVE) {
            return Err(Error::Construction(format!(
                "closed-form integral {phi_eps} disagrees with quadrature {}",
                quad.value
            )));
        }
        let s = sign.factor();
        let left = Jet {
            value: s * phi_eps,
            slope: s * w,
            curvature: 0.0,
        };
        let right = Jet {
            value: s * phi_eps,
            slope: -s * w,
            curvature: 0.0,
        };
        let bridge = Quintic::new(epsilon, 1.0 - epsilon, left, right);
        for x in lin_space(epsilon, 1.0 - epsilon, BRIDGE_CHECK_POINTS) {
            let (d, dd) = (bridge.eval(x), bridge.deriv(x));
            if !(1.0 + dd > 0.0) || !(s * d > 0.0) {
                return Err(Error::Construction(format!(
                    "bridge on [{epsilon}, {}] not certified at x = {x}: displacement {d}, derivative {}",
                    1.0 - epsilon,
                    1.0 + dd
                )));
            }
        }
        Ok(Self {
            modulus: m.clone(),
            epsilon,
            sign: s,
            bridge,
        })
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `[0, ε]`, where the map is exactly `x ∓ ∫₀ˣ ω`.
    pub fn window(&self) -> (f64, f64) {
        (0.0, self.epsilon)
    }

    /// `∫₀ˣ ω` by adaptive quadrature, for cross-checking the closed forms.
    pub fn primitive_by_quadrature(&self, x: f64) -> Result<f64> {
        Ok(integrate(|t| self.modulus.at(t), 0.0, x, QuadOptions::default())?.value)
    }

    #[inline]
    pub fn displacement(&self, x: f64) -> f64 {
        if x <= self.epsilon {
            self.sign * primitive(&self.modulus, x)
        } else if x >= 1.0 - self.epsilon {
            self.sign * primitive(&self.modulus, 1.0 - x)
        } else {
            self.bridge.eval(x)
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        if x >= 1.0 {
            return 1.0;
        }
        if x <= 0.0 {
            return 0.0;
        }
        x + self.displacement(x)
    }

    #[inline]
    pub fn deriv(&self, x: f64) -> f64 {
        if x <= self.epsilon {
            1.0 + self.sign * self.modulus.at(x)
        } else if x >= 1.0 - self.epsilon {
            1.0 - self.sign * self.modulus.at(1.0 - x)
        } else {
            1.0 + self.bridge.deriv(x)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffeo::Diffeo;
    use approx::assert_relative_eq;

    fn moduli() -> Vec<Modulus> {
        vec![
            Modulus::holder(0.3).unwrap(),
            Modulus::holder(0.5).unwrap(),
            Modulus::lipschitz(),
            Modulus::xlog(),
            Modulus::sqrtlog(),
            Modulus::invlog(),
        ]
    }

    #[test]
    fn primitive_matches_quadrature() {
        for m in moduli() {
            for x in [1e-12, 1e-6, 1e-3, 0.05, 0.2] {
                let q = integrate(|t| m.at(t), 0.0, x, QuadOptions::default()).unwrap().value;
                assert_relative_eq!(primitive(&m, x), q, max_relative = 1e-11);
            }
        }
    }

    #[test]
    fn sqrtlog_branches_agree() {
        // u = 40 is the switch between erfc and the asymptotic series.
        let x = (1.0f64 - 40.0).exp();
        let below = primitive(&Modulus::sqrtlog(), x * (1.0 + 1e-9));
        let above = primitive(&Modulus::sqrtlog(), x * (1.0 - 1e-9));
        assert_relative_eq!(below, above, max_relative = 1e-8);
        // leading term x²·√u/2
        let x: f64 = 1e-150;
        let lead = 0.5 * x * x * (1.0 - x.ln()).sqrt();
        assert_relative_eq!(primitive(&Modulus::sqrtlog(), x), lead, max_relative = 1e-3);
    }

    #[test]
    fn lipschitz_example() {
        let f = Diffeo::from_modulus(&Modulus::lipschitz(), 0.4, Sign::Contracting).unwrap();
        assert_relative_eq!(f.eval(0.1), 0.095, epsilon = 1e-16);
        assert_eq!(f.deriv(0.0), 1.0);
        assert_eq!(f.deriv(1.0), 1.0);
        assert_eq!(f.eval(0.0), 0.0);
        assert_eq!(f.eval(1.0), 1.0);
    }

    #[test]
    fn holder_example() {
        let f = Diffeo::from_modulus(&Modulus::holder(0.5).unwrap(), 0.25, Sign::Contracting).unwrap();
        let exact = 0.04 - 2.0 / 3.0 * 0.04f64.powf(1.5);
        assert_relative_eq!(f.eval(0.04), exact, max_relative = 1e-14);
        assert_relative_eq!(f.eval(0.04), 0.034_666_666_666_666_67, max_relative = 1e-12);
        let q = f.as_from_modulus().unwrap().primitive_by_quadrature(0.04).unwrap();
        assert_relative_eq!(q, 2.0 / 3.0 * 0.04f64.powf(1.5), max_relative = 1e-12);
    }

    #[test]
    fn rejects_large_modulus() {
        let m = Modulus::new(ModulusKind::Lipschitz, 1.0, 4.0).unwrap();
        assert!(matches!(
            Diffeo::from_modulus(&m, 0.3, Sign::Contracting),
            Err(Error::Construction(_))
        ));
        assert!(Diffeo::from_modulus(&Modulus::lipschitz(), 0.6, Sign::Contracting).is_err());
    }

    #[test]
    fn both_signs_have_no_interior_fixed_points() {
        for m in moduli() {
            for sign in [Sign::Contracting, Sign::Expanding] {
                let f = Diffeo::from_modulus(&m, 0.25, sign).unwrap();
                for x in lin_space(1e-6, 1.0 - 1e-6, 2001) {
                    let d = f.displacement(x);
                    assert!(sign.factor() * d > 0.0, "{m} {sign:?} at {x}");
                    assert!(f.deriv(x) > 0.0);
                    assert_relative_eq!(d, f.eval(x) - x, epsilon = 1e-14);
                }
            }
        }
    }

    #[test]
    fn derivative_is_continuous_at_joints() {
        for m in moduli() {
            let f = Diffeo::from_modulus(&m, 0.25, Sign::Contracting).unwrap();
            for joint in [0.25, 0.75] {
                let h = 1e-10;
                assert!((f.deriv(joint - h) - f.deriv(joint + h)).abs() < 1e-6, "{m} at {joint}");
            }
        }
    }
}
