use growthgap::bounds::{corollary5_applicability, upper_bound, Cor5Case};
use growthgap::dynamics::{growth_sequence, log_deriv_product, orbit};
use growthgap::lab::{self, CheckId, Scenario, Verdict};
use growthgap::{BoundSpec, Diffeo, GridSpec, Modulus, Sign, Theorem};
use proptest::prelude::*;

fn builtins() -> Vec<Modulus> {
    vec![
        Modulus::holder(0.5).unwrap(),
        Modulus::holder(0.25).unwrap(),
        Modulus::lipschitz(),
        Modulus::xlog(),
        Modulus::sqrtlog(),
        Modulus::invlog(),
    ]
}

fn builtin() -> impl Strategy<Value = Modulus> {
    (0..6usize).prop_map(|i| builtins().swap_remove(i))
}

fn maps() -> Vec<Diffeo> {
    let h = Modulus::holder(0.5).unwrap();
    vec![
        Diffeo::from_modulus(&Modulus::lipschitz(), 0.25, Sign::Contracting).unwrap(),
        Diffeo::from_modulus(&h, 0.25, Sign::Expanding).unwrap(),
        Diffeo::from_modulus(&Modulus::sqrtlog(), 0.25, Sign::Contracting).unwrap(),
        Diffeo::sharpness_family(&h, 0.25, 32).unwrap(),
        Diffeo::moebius_test(),
    ]
}

fn map() -> impl Strategy<Value = Diffeo> {
    (0..5usize).prop_map(|i| maps().swap_remove(i))
}

fn spec(t: Theorem, m: Modulus, c: &str) -> BoundSpec {
    BoundSpec::new(t, m, BoundSpec::parse_constants(c).unwrap()).unwrap()
}

proptest! {
    #[test]
    fn modulus_is_monotone_and_subadditive(m in builtin(), a in 0.0..0.5f64, b in 0.0..0.5f64) {
        prop_assert_eq!(m.at(0.0), 0.0);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(m.at(lo) <= m.at(hi));
        prop_assert!(m.at(a + b) <= m.at(a) + m.at(b) + 1e-10);
    }

    #[test]
    fn inverse_undoes_eval(m in builtin(), log_d in -12.0..0.0f64) {
        let d = 10f64.powf(log_d);
        let back = m.inverse(m.at(d)).unwrap();
        prop_assert!((back - d).abs() <= 1e-9 * d, "ω⁻¹(ω({})) = {}", d, back);
    }

    #[test]
    fn omega_cap_inverts_x_omega(m in builtin(), log_z in -8.0..-0.5f64) {
        let z = 10f64.powf(log_z);
        let x = m.omega_cap(z).unwrap();
        prop_assert!((x * m.at(x) - z).abs() <= 1e-9 * z);
        prop_assert!(x >= z);
    }

    #[test]
    fn inverse_derivative_product(f in map(), x in 0.0..1.0f64) {
        let p = f.inverse().deriv(f.eval(x)) * f.deriv(x);
        prop_assert!((p - 1.0).abs() <= 1e-9, "product {} at {}", p, x);
    }

    #[test]
    fn chain_rule_telescopes(f in map(), x in 0.0..1.0f64, m in 1..200usize, n in 1..200usize) {
        let whole = log_deriv_product(&f, x, m + n).unwrap();
        let y = orbit(&f, x, m).unwrap().points[m];
        let split = log_deriv_product(&f, x, m).unwrap() + log_deriv_product(&f, y, n).unwrap();
        prop_assert!((whole - split).abs() <= 1e-10 * (m + n) as f64);
    }

    #[test]
    fn orbits_do_not_cross_fixed_points(f in map(), x in 0.0..1.0f64) {
        let t = orbit(&f, x, 500).unwrap();
        let fix = f.fixed_points();
        for w in t.points.windows(2) {
            // Both points on the same side of (or on) every fixed point.
            for &p in fix {
                prop_assert!((w[0] - p) * (w[1] - p) >= 0.0);
            }
        }
    }

    #[test]
    fn upper_bound_monotone_in_constant(m in builtin(), c0 in 0.0..10.0f64, dc in 0.0..10.0f64, n in 1..100_000usize) {
        for t in [Theorem::Thm4, Theorem::Thm5] {
            let a = upper_bound(&spec(t, m.clone(), &format!("C={c0}")), n);
            let b = upper_bound(&spec(t, m.clone(), &format!("C={}", c0 + dc)), n);
            // invlog: ω⁻¹(2/n) = e^{1−n/2} underflows for large n, for every C.
            match (a, b) {
                (Ok(a), Ok(b)) => prop_assert!(a <= b),
                (a, b) => prop_assert!(a.is_err() && b.is_err()),
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn growth_is_at_least_one_and_submultiplicative(f in map(), pairs in prop::collection::vec((1..64usize, 1..64usize), 20)) {
        let recs = growth_sequence(&f, 128, GridSpec { base: 512, refine: 20 }).unwrap();
        let lg = |n: usize| recs[n - 1].log_gamma;
        prop_assert!(recs.iter().all(|r| r.log_gamma >= 0.0));
        for (m, n) in pairs {
            prop_assert!(lg(m + n) <= lg(m) + lg(n) + (1.0 + 1e-6f64).ln());
        }
    }
}

#[test]
fn concave_majorant_is_a_concave_sandwich() {
    for m in builtins() {
        let star = m.concave_majorant(1 << 12).unwrap();
        let xs = m.majorant_grid(1 << 12);
        let ys: Vec<f64> = xs.iter().map(|&x| star.at(x)).collect();
        for i in 1..xs.len() - 1 {
            let s0 = (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]);
            let s1 = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
            assert!(s1 - s0 <= 1e-10 * s0.abs().max(1.0), "{m}: not concave at {}", xs[i]);
        }
        for (&x, &y) in xs.iter().zip(&ys) {
            assert!(m.at(x) <= y && y <= 2.0 * m.at(x) + 1e-10, "{m}: sandwich fails at {x}");
        }
    }
}

#[test]
fn tangential_at_fixed_points() {
    for f in maps() {
        let tangential = f.description().constructor != "moebius_test";
        for &p in f.fixed_points() {
            if tangential {
                assert!((f.deriv(p) - 1.0).abs() <= 1e-8, "{}: f'({p}) = {}", f.description(), f.deriv(p));
            }
        }
    }
    assert_eq!(Diffeo::moebius_test().deriv(0.0), 2.0);
}

/// Symmetry is checked at the dyadic `n` where the extremal probes are refined;
/// between refinements records are grid maxima. The sharpness family is left
/// out: peaks of `log (f⁻ⁿ)'` have width of order `1/Γₙ`, below any fixed grid.
#[test]
fn growth_is_symmetric_under_inversion() {
    for (i, f) in maps().into_iter().enumerate() {
        if i == 3 {
            continue;
        }
        let g = GridSpec { base: 1024, refine: 40 };
        let a = growth_sequence(&f, 64, g).unwrap();
        let b = growth_sequence(&f.inverse(), 64, g).unwrap();
        for n in [1, 2, 4, 8, 16, 32, 64] {
            let (x, y) = (a[n - 1].log_gamma, b[n - 1].log_gamma);
            assert!(
                (x - y).abs() <= 1e-6 * x.max(1.0),
                "{}: n = {n}: {x} vs {y}",
                f.description()
            );
        }
    }
}

#[test]
fn growth_does_not_depend_on_worker_count() {
    let f = &maps()[3];
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| growth_sequence(f, 256, GridSpec { base: 1024, refine: 20 }).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn thm4_reduces_to_thm2_for_lipschitz() {
    let s = spec(Theorem::Thm4, Modulus::lipschitz(), "C=1");
    let base = upper_bound(&s, 16).unwrap() - 2.0 * 16f64.ln();
    for n in [100, 10_000, 1_000_000, 100_000_000] {
        let d = upper_bound(&s, n).unwrap() - 2.0 * (n as f64).ln();
        assert!((d - base).abs() <= 1e-9, "n = {n}: {d} vs {base}");
    }
}

#[test]
fn case2_bound_ratio_tends_to_one() {
    let m = Modulus::sqrtlog();
    assert_eq!(corollary5_applicability(&m).unwrap(), Cor5Case::Case2);
    let s = spec(Theorem::Thm4, m.clone(), "C=1");
    let ratio = |n: usize| {
        let n_f = n as f64;
        let shape = (n_f / m.inverse(2.0 / n_f).unwrap()).ln();
        upper_bound(&s, n).unwrap() / shape
    };
    let rs: Vec<f64> = [1_000, 100_000, 10_000_000, 1_000_000_000].map(ratio).to_vec();
    assert!(rs.windows(2).all(|w| w[1] < w[0]), "{rs:?}");
    assert!(rs.iter().all(|&r| r > 1.0));
}

fn scenario(text: &str) -> Scenario {
    lab::RawConfig::parse(text).unwrap().expand().unwrap().remove(0)
}

#[test]
fn reports_are_reproducible_and_complete() {
    let s = scenario(
        "name = repro\nmodulus.kind = holder\nmodulus.alpha = 0.5\ndiffeo.kind = sharpness\n\
         diffeo.epsilon = 0.25\ngrowth.n_max = 256\ngrowth.grid = 512\n\
         checks.list = thm2, thm5, submultiplicative, lemma3, orbit_identity\n",
    );
    let pool = |threads| rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    let a = pool(1).install(|| lab::run(&s).unwrap());
    let b = pool(3).install(|| lab::run(&s).unwrap());
    assert_eq!(a.to_text(), b.to_text());
    assert_eq!(a.records_csv(), b.records_csv());
    assert_eq!(a.checks.len(), s.checks.len());
    for id in &s.checks {
        assert_eq!(a.checks.iter().filter(|c| c.check == *id).count(), 1);
    }
    // Lipschitz-only check on a Hölder modulus is a failed precondition.
    let thm2 = a.checks.iter().find(|c| c.check == CheckId::Thm2).unwrap();
    assert_eq!(thm2.verdict, Verdict::Skipped);
}
