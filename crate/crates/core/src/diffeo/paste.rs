//! Pasting translated sharpness frames into disjoint blocks `[a_k, b_k]`.
//!
//! On `[a_k, a_k + r_k]` the map is the frame of its base map translated to
//! start at `a_k` (`r_k` the certified reach). On `[a_k + r_k, b_k]` the
//! displacement is the cubic Hermite glue from the frame's value and slope to
//! `(0, 0)`. With displacement `d₀ < 0` and slope `q₀ ∈ (−1, 0)` the glue is
//! negative and has slope above `−1` throughout, so it is monotone and has
//! no fixed points. The identity is used outside the blocks.

use super::spline::Cubic;
use super::Diffeo;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct Block {
    pub a: f64,
    pub b: f64,
    /// A sharpness map; its frame on `[0, reach]` is translated to `a`.
    pub base: Diffeo,
}

#[derive(Clone, Debug, Default)]
pub struct PastedSpec {
    pub blocks: Vec<Block>,
}

#[derive(Clone, Debug)]
struct Placed {
    a: f64,
    b: f64,
    reach: f64,
    base: Diffeo,
    glue: Cubic,
}

#[derive(Clone, Debug)]
pub struct PastedMap {
    /// Sorted by increasing `a`.
    placed: Vec<Placed>,
    blocks: Vec<Block>,
    max_glue_second_derivative: f64,
}

impl PastedMap {
    pub(crate) fn new(spec: PastedSpec) -> Result<Self> {
        let mut blocks = spec.blocks;
        blocks.sort_by(|x, y| x.a.total_cmp(&y.a));
        for w in blocks.windows(2) {
            if !(w[0].b < w[1].a) {
                return Err(Error::Spec(format!(
                    "blocks [{}, {}] and [{}, {}] overlap or touch",
                    w[0].a, w[0].b, w[1].a, w[1].b
                )));
            }
        }
        let mut placed = Vec::with_capacity(blocks.len());
        let mut max_pp = 0.0f64;
        for blk in &blocks {
            if !(blk.a > 0.0 && blk.b < 1.0 && blk.a < blk.b) {
                return Err(Error::Spec(format!(
                    "block [{}, {}] not inside (0, 1)",
                    blk.a, blk.b
                )));
            }
            let s = blk.base.as_sharpness().ok_or_else(|| {
                Error::Spec(format!(
                    "block base must be a sharpness map, got {}",
                    blk.base.description()
                ))
            })?;
            let r = s.reach();
            let join = blk.a + r;
            if !(join < blk.b) {
                return Err(Error::Spec(format!(
                    "frame of reach {r} does not fit in block [{}, {}]",
                    blk.a, blk.b
                )));
            }
            let d0 = s.displacement(r);
            let q0 = s.deriv(r) - 1.0;
            if !(d0 < 0.0 && q0 > -1.0 && q0 < 0.0) {
                return Err(Error::Construction(format!(
                    "glue at {join}: displacement {d0}, slope {q0} outside the monotone range"
                )));
            }
            let glue = Cubic::new(join, blk.b, (d0, q0), (0.0, 0.0));
            max_pp = max_pp.max(glue.max_abs_second_deriv());
            placed.push(Placed {
                a: blk.a,
                b: blk.b,
                reach: r,
                base: blk.base.clone(),
                glue,
            });
        }
        Ok(Self {
            placed,
            blocks,
            max_glue_second_derivative: max_pp,
        })
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// `max |Ψ_k''|` over all glue pieces.
    pub fn max_glue_second_derivative(&self) -> f64 {
        self.max_glue_second_derivative
    }

    #[inline]
    fn locate(&self, x: f64) -> Option<&Placed> {
        let i = self.placed.partition_point(|p| p.a <= x);
        let p = self.placed.get(i.checked_sub(1)?)?;
        (x <= p.b).then_some(p)
    }

    #[inline]
    pub fn displacement(&self, x: f64) -> f64 {
        match self.locate(x) {
            None => 0.0,
            Some(p) if x <= p.a + p.reach => p.base.displacement(x - p.a),
            Some(p) => p.glue.eval(x),
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self.locate(x) {
            None => x,
            Some(p) if x <= p.a + p.reach => p.a + p.base.eval(x - p.a),
            Some(p) => x + p.glue.eval(x),
        }
    }

    #[inline]
    pub fn deriv(&self, x: f64) -> f64 {
        match self.locate(x) {
            None => 1.0,
            Some(p) if x <= p.a + p.reach => p.base.deriv(x - p.a),
            Some(p) => 1.0 + p.glue.deriv(x),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modulus::Modulus;
    use crate::numerics::lin_space;

    fn base(eps: f64) -> Diffeo {
        Diffeo::sharpness_family(&Modulus::holder(0.5).unwrap(), eps, 64).unwrap()
    }

    #[test]
    fn empty_spec_is_identity() {
        let f = Diffeo::paste(PastedSpec::default()).unwrap();
        for x in [0.0, 0.3, 1.0] {
            assert_eq!(f.eval(x), x);
            assert_eq!(f.deriv(x), 1.0);
        }
    }

    #[test]
    fn single_block_agrees_with_base() {
        let g = base(0.25);
        let r = g.as_sharpness().unwrap().reach();
        let a = 0.3;
        let f = Diffeo::paste(PastedSpec {
            blocks: vec![Block { a, b: 0.5, base: g.clone() }],
        })
        .unwrap();
        for x in lin_space(a, a + r, 257) {
            let t = x - a;
            assert!((f.eval(x) - (a + g.eval(t))).abs() <= 1e-14);
            assert!((f.deriv(x) - g.deriv(t)).abs() <= 1e-14);
        }
        assert_eq!(f.eval(0.2), 0.2);
        assert_eq!(f.eval(0.5), 0.5);
        assert_eq!(f.fixed_points(), &[0.0, 0.3, 0.5, 1.0]);
    }

    #[test]
    fn two_blocks_have_continuous_derivative() {
        let (g1, g2) = (base(0.5), base(0.25));
        let f = Diffeo::paste(PastedSpec {
            blocks: vec![
                Block { a: 0.5, b: 0.8, base: g1.clone() },
                Block { a: 0.1, b: 0.3, base: g2.clone() },
            ],
        })
        .unwrap();
        let joints = [
            0.1,
            0.1 + g2.as_sharpness().unwrap().reach(),
            0.3,
            0.5,
            0.5 + g1.as_sharpness().unwrap().reach(),
            0.8,
        ];
        for j in joints {
            let h = 1e-12;
            assert!((f.deriv(j - h) - f.deriv(j + h)).abs() <= 1e-6, "jump at {j}");
        }
        for x in lin_space(0.0, 1.0, 10_001) {
            assert!(f.deriv(x) > 0.0);
            assert!(f.displacement(x) <= 0.0);
        }
    }

    #[test]
    fn rejects_overlap_and_non_sharpness_base() {
        let g = base(0.5);
        let overlap = PastedSpec {
            blocks: vec![
                Block { a: 0.1, b: 0.4, base: g.clone() },
                Block { a: 0.3, b: 0.6, base: g.clone() },
            ],
        };
        assert!(matches!(Diffeo::paste(overlap), Err(Error::Spec(_))));
        let wrong = PastedSpec {
            blocks: vec![Block { a: 0.1, b: 0.4, base: Diffeo::identity() }],
        };
        assert!(matches!(Diffeo::paste(wrong), Err(Error::Spec(_))));
    }
}
