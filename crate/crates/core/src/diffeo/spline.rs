//! Hermite interpolants used for bridges and glue.

/// Endpoint data: value, first and second derivative.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct Jet {
    pub value: f64,
    pub slope: f64,
    pub curvature: f64,
}

/// Quintic Hermite interpolant on `[x0, x0 + h]` matching a [`Jet`] at each end.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Quintic {
    x0: f64,
    h: f64,
    left: Jet,
    right: Jet,
}

impl Quintic {
    pub fn new(x0: f64, x1: f64, left: Jet, right: Jet) -> Self {
        Self {
            x0,
            h: x1 - x0,
            left,
            right,
        }
    }

    fn weights(&self) -> [f64; 6] {
        let h = self.h;
        [
            self.left.value,
            h * self.left.slope,
            h * h * self.left.curvature,
            h * h * self.right.curvature,
            h * self.right.slope,
            self.right.value,
        ]
    }

    pub fn eval(&self, x: f64) -> f64 {
        let t = (x - self.x0) / self.h;
        let (t2, t3) = (t * t, t * t * t);
        let (t4, t5) = (t3 * t, t3 * t2);
        let basis = [
            1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5,
            t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5,
            0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5),
            0.5 * (t3 - 2.0 * t4 + t5),
            -4.0 * t3 + 7.0 * t4 - 3.0 * t5,
            10.0 * t3 - 15.0 * t4 + 6.0 * t5,
        ];
        self.weights().iter().zip(basis).map(|(w, b)| w * b).sum()
    }

    pub fn deriv(&self, x: f64) -> f64 {
        let t = (x - self.x0) / self.h;
        let (t2, t3, t4) = (t * t, t * t * t, t * t * t * t);
        let basis = [
            -30.0 * t2 + 60.0 * t3 - 30.0 * t4,
            1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4,
            0.5 * (2.0 * t - 9.0 * t2 + 12.0 * t3 - 5.0 * t4),
            0.5 * (3.0 * t2 - 8.0 * t3 + 5.0 * t4),
            -12.0 * t2 + 28.0 * t3 - 15.0 * t4,
            30.0 * t2 - 60.0 * t3 + 30.0 * t4,
        ];
        self.weights().iter().zip(basis).map(|(w, b)| w * b).sum::<f64>() / self.h
    }
}

/// Cubic Hermite interpolant on `[x0, x0 + h]` from values and slopes.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Cubic {
    x0: f64,
    h: f64,
    v0: f64,
    s0: f64,
    v1: f64,
    s1: f64,
}

impl Cubic {
    pub fn new(x0: f64, x1: f64, (v0, s0): (f64, f64), (v1, s1): (f64, f64)) -> Self {
        Self {
            x0,
            h: x1 - x0,
            v0,
            s0,
            v1,
            s1,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let t = (x - self.x0) / self.h;
        let (t2, t3) = (t * t, t * t * t);
        self.v0 * (2.0 * t3 - 3.0 * t2 + 1.0)
            + self.h * self.s0 * (t3 - 2.0 * t2 + t)
            + self.v1 * (3.0 * t2 - 2.0 * t3)
            + self.h * self.s1 * (t3 - t2)
    }

    pub fn deriv(&self, x: f64) -> f64 {
        let t = (x - self.x0) / self.h;
        let t2 = t * t;
        (self.v0 * (6.0 * t2 - 6.0 * t) + self.v1 * (6.0 * t - 6.0 * t2)) / self.h
            + self.s0 * (3.0 * t2 - 4.0 * t + 1.0)
            + self.s1 * (3.0 * t2 - 2.0 * t)
    }

    pub fn second_deriv(&self, x: f64) -> f64 {
        let t = (x - self.x0) / self.h;
        (self.v0 * (12.0 * t - 6.0) + self.v1 * (6.0 - 12.0 * t)) / (self.h * self.h)
            + (self.s0 * (6.0 * t - 4.0) + self.s1 * (6.0 * t - 2.0)) / self.h
    }

    /// `max |p''|` on the interval; `p''` is affine so the ends suffice.
    pub fn max_abs_second_deriv(&self) -> f64 {
        self.second_deriv(self.x0)
            .abs()
            .max(self.second_deriv(self.x0 + self.h).abs())
    }
}
