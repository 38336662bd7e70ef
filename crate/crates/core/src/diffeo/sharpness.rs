//! The oscillating family `f_ε(t) = t/(1+t) + t^{2+ε}·ω(t)·sin(2π/t)`.
//!
//! At `t = 1/k` the sine vanishes, so `f_ε(1/k) = 1/(k+1)` exactly. The
//! frame is used on `[0, a(ε)]`, then continued by a quintic bridge on
//! `[a(ε), 3/4]` and the cap `x − κ(1−x)²` on `[3/4, 1]`.

use std::f64::consts::TAU;

use super::spline::{Jet, Quintic};
use crate::error::{Error, Result};
use crate::modulus::Modulus;
use crate::numerics::{log_space, windowed_oscillation};

/// Uniform scan points used to certify `a(ε)`.
pub const SHARPNESS_GRID: usize = 1 << 14;
/// Largest accepted `max_δ ω̂_{f'}(δ)/ω(δ)` on the certification scan.
pub const SHARPNESS_MODULUS_CAP: f64 = 1024.0;

const SMALLEST_REACH: f64 = 1e-6;
const CAP_START: f64 = 0.75;
const CAP_KAPPA: f64 = 0.5;
const BRIDGE_CHECK_POINTS: usize = 4097;

/// `(sin(2π/x), cos(2π/x))` with `1/x` reduced modulo 1 in double-double
/// arithmetic, so the phase stays accurate when `1/x` is large.
#[inline]
pub(crate) fn sin_cos_recip(x: f64) -> (f64, f64) {
    let q = 1.0 / x;
    // 1 − q·x exactly, divided by x: the low part of 1/x
    let lo = (-q).mul_add(x, 1.0) / x;
    let frac = (q - q.round()) + lo;
    (TAU * frac).sin_cos()
}

#[derive(Clone, Debug)]
pub struct SharpnessMap {
    modulus: Modulus,
    epsilon: f64,
    reach: f64,
    k_start: u64,
    certified_constant: f64,
    bridge: Quintic,
}

impl SharpnessMap {
    pub(crate) fn new(m: &Modulus, epsilon: f64, k_min: u64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Construction(format!("epsilon {epsilon} not in (0, 1)")));
        }
        if k_min < 2 {
            return Err(Error::Construction("k_min must be at least 2".into()));
        }
        let top = (1.0 / k_min as f64).min(m.domain_end());
        let mut reach = 2f64.powi(top.log2().floor() as i32);
        let mut last_failure = String::new();
        while reach >= SMALLEST_REACH {
            let mut map = Self {
                modulus: m.clone(),
                epsilon,
                reach,
                k_start: k_min.max((1.0 / reach).ceil() as u64),
                certified_constant: f64::NAN,
                bridge: Quintic::new(reach, CAP_START, Jet::default(), Jet::default()),
            };
            match map.certify_frame() {
                Ok(c) => {
                    map.certified_constant = c;
                    match map.build_bridge() {
                        Ok(bridge) => {
                            map.bridge = bridge;
                            return Ok(map);
                        }
                        Err(e) => last_failure = e,
                    }
                }
                Err(e) => last_failure = e,
            }
            reach *= 0.5;
        }
        Err(Error::Construction(format!(
            "no a(ε) ≥ {SMALLEST_REACH} certified for ε = {epsilon}, {m}: {last_failure}"
        )))
    }

    /// Grid check of `f' > 0`, `φ < 0` and the derivative-modulus cap on `(0, a]`.
    fn certify_frame(&self) -> std::result::Result<f64, String> {
        let n = SHARPNESS_GRID;
        let xs: Vec<f64> = (1..=n).map(|i| self.reach * i as f64 / n as f64).collect();
        let mut ds = Vec::with_capacity(n + 1);
        ds.push(1.0);
        for &x in &xs {
            let (_, d) = self.frame(x);
            if !(d > 0.0) {
                return Err(format!("f' = {d} at {x}"));
            }
            let phi = self.frame_displacement(x);
            if !(phi < 0.0) {
                return Err(format!("displacement {phi} at {x}"));
            }
            ds.push(d);
        }
        let mut grid = Vec::with_capacity(n + 1);
        grid.push(0.0);
        grid.extend_from_slice(&xs);
        let deltas = log_space(self.reach / n as f64, self.reach, 48);
        let osc = windowed_oscillation(&grid, &ds, &deltas);
        let c = deltas
            .iter()
            .zip(&osc)
            .map(|(&dl, &o)| o / self.modulus.at(dl))
            .fold(0.0, f64::max);
        if c <= SHARPNESS_MODULUS_CAP {
            Ok(c)
        } else {
            Err(format!("derivative modulus constant {c} above {SHARPNESS_MODULUS_CAP}"))
        }
    }

    fn build_bridge(&self) -> std::result::Result<Quintic, String> {
        let a = self.reach;
        let (_, da) = self.frame(a);
        let left = Jet {
            value: self.frame_displacement(a),
            slope: da - 1.0,
            curvature: 0.0,
        };
        let u = 1.0 - CAP_START;
        let right = Jet {
            value: -CAP_KAPPA * u * u,
            slope: 2.0 * CAP_KAPPA * u,
            curvature: -2.0 * CAP_KAPPA,
        };
        let q = Quintic::new(a, CAP_START, left, right);
        for i in 0..BRIDGE_CHECK_POINTS {
            let x = a + (CAP_START - a) * i as f64 / (BRIDGE_CHECK_POINTS - 1) as f64;
            let (d, dd) = (q.eval(x), q.deriv(x));
            if !(d < 0.0 && 1.0 + dd > 0.0) {
                return Err(format!("bridge at {x}: displacement {d}, derivative {}", 1.0 + dd));
            }
        }
        Ok(q)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    /// Certified `a(ε)`: the frame formula holds on `[0, reach]`.
    pub fn reach(&self) -> f64 {
        self.reach
    }

    /// Smallest `k ≥ k_min` with `1/k ≤ a(ε)`.
    pub fn k_start(&self) -> u64 {
        self.k_start
    }

    pub fn certified_constant(&self) -> f64 {
        self.certified_constant
    }

    /// Frame value and derivative for `t ∈ [0, reach]`.
    #[inline]
    fn frame(&self, t: f64) -> (f64, f64) {
        if t <= 0.0 {
            return (0.0, 1.0);
        }
        let e = self.epsilon;
        let (s, c) = sin_cos_recip(t);
        let w = self.modulus.at(t);
        let dw = self.modulus.derivative(t);
        let te = t.powf(e);
        let amp = t * t * te;
        let inv = 1.0 / (1.0 + t);
        let f = t * inv + amp * w * s;
        let d = inv * inv + ((2.0 + e) * t * te * w + amp * dw) * s - TAU * te * w * c;
        (f, d)
    }

    #[inline]
    fn frame_displacement(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let (s, _) = sin_cos_recip(t);
        -t * t / (1.0 + t) + t * t * t.powf(self.epsilon) * self.modulus.at(t) * s
    }

    #[inline]
    pub fn eval_with_deriv(&self, x: f64) -> (f64, f64) {
        if x <= self.reach {
            self.frame(x)
        } else if x < CAP_START {
            (x + self.bridge.eval(x), 1.0 + self.bridge.deriv(x))
        } else if x >= 1.0 {
            (1.0, 1.0)
        } else {
            let u = 1.0 - x;
            (x - CAP_KAPPA * u * u, 1.0 + 2.0 * CAP_KAPPA * u)
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.eval_with_deriv(x).0
    }

    #[inline]
    pub fn deriv(&self, x: f64) -> f64 {
        self.eval_with_deriv(x).1
    }

    #[inline]
    pub fn displacement(&self, x: f64) -> f64 {
        if x <= self.reach {
            self.frame_displacement(x)
        } else if x < CAP_START {
            self.bridge.eval(x)
        } else {
            let u = 1.0 - x;
            -CAP_KAPPA * u * u
        }
    }
}
