use std::f64::consts::PI;

use ism_core::expr::Expr;
use ism_core::oracle::{
    brute_force_range, remainder_violation_search, sample_image, SampleMode, DEFAULT_BUDGET,
};
use ism_core::univariate::workspace;
use ism_core::{
    add_models, compose, mul_models, scalar_affine, AtomKind, Domain, Interval, ProductWorkspace,
    SuperpositionModel,
};
use proptest::prelude::*;

fn iv(lo: f64, hi: f64) -> Interval {
    Interval::new(lo, hi).unwrap()
}

prop_compose! {
    fn arb_interval(lo: f64, hi: f64, max_w: f64)(a in lo..hi, w in 0.0..max_w) -> Interval {
        iv(a, a + w)
    }
}

prop_compose! {
    fn arb_model(lo: f64, hi: f64, max_w: f64)(n in 1usize..=3, nb in 1usize..=4)
        (rows in prop::collection::vec(prop::collection::vec(arb_interval(lo, hi, max_w), nb), n), nb in Just(nb))
        -> SuperpositionModel
    {
        let d = Domain::shared(vec![iv(0.0, 1.0); rows.len()], nb).unwrap();
        SuperpositionModel::from_rows(&d, rows).unwrap()
    }
}

fn model_for(g: AtomKind) -> BoxedStrategy<SuperpositionModel> {
    match g {
        AtomKind::Inv | AtomKind::Log => arb_model(0.3, 2.0, 1.0).boxed(),
        AtomKind::Tan => arb_model(-0.3, 0.2, 0.1).boxed(),
        _ => arb_model(-2.0, 1.5, 1.5).boxed(),
    }
}

fn arb_atom() -> impl Strategy<Value = AtomKind> {
    prop::sample::select(AtomKind::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn remainder_bounds_hold((g, m) in arb_atom().prop_flat_map(|g| (Just(g), model_for(g))), seed: u64) {
        prop_assume!(workspace(g, &m).is_ok());
        prop_assert!(remainder_violation_search(g, &m, 500, seed).unwrap() <= 0.0);
    }

    #[test]
    fn composition_contains_images(
        (g, m) in arb_atom().prop_flat_map(|g| (Just(g), model_for(g))),
        picks in prop::collection::vec((0usize..4, 0.0..=1.0f64), 3),
    ) {
        let Ok(out) = compose(g, &m) else { return Ok(()) };
        // Any value in the entry sum at x is attained by some function the model encloses.
        let mut x = Vec::new();
        let mut h = 0.0;
        for (i, &(j, t)) in picks.iter().take(m.dim()).enumerate() {
            let j = j % m.branches();
            let a = m.coeff(i, j);
            h += a.lo() + t * (a.hi() - a.lo());
            x.push(m.domain().branch_interval(i, j).unwrap().mid());
        }
        let y = g.apply(&Interval::point(h)).unwrap();
        let enc = out.evaluate(&x).unwrap();
        prop_assert!(enc.intersects(&y), "{} of {h}: {y} not in {enc}", g.name());
    }

    #[test]
    fn range_matches_enumeration(m in arb_model(-3.0, 3.0, 2.0)) {
        let (lo, hi) = brute_force_range(&m, DEFAULT_BUDGET).unwrap();
        let r = m.range();
        prop_assert!((r.lambda - lo).abs() <= f64::EPSILON * lo.abs().max(1.0));
        prop_assert!((r.mu - hi).abs() <= f64::EPSILON * hi.abs().max(1.0));
    }

    #[test]
    fn product_remainder_within_quarter_widths(a in arb_model(-3.0, 3.0, 2.0), seed: u64) {
        let b = scalar_affine(&a, ((seed % 7) as f64) - 3.0, 0.5).unwrap();
        let ws = ProductWorkspace::new(&a, &b).unwrap();
        prop_assert!(ws.satisfies_width_bound(&a, &b));
    }

    #[test]
    fn products_and_sums_are_sound(
        a in arb_model(-2.0, 2.0, 1.0),
        b in arb_model(-2.0, 2.0, 1.0),
        picks in prop::collection::vec((0usize..4, 0.0..=1.0f64, 0.0..=1.0f64), 3),
    ) {
        let d = a.domain().clone();
        let b = if b.dim() == a.dim() && b.branches() == a.branches() {
            SuperpositionModel::from_rows(&d, b.rows().map(<[Interval]>::to_vec).collect()).unwrap()
        } else {
            scalar_affine(&a, -1.5, 0.25).unwrap()
        };
        // Values attained by some function each model encloses, at the same x.
        let (mut x, mut va, mut vb) = (Vec::new(), Interval::ZERO, Interval::ZERO);
        let pick = |e: Interval, t: f64| Interval::point((e.lo() + t * e.diam()).clamp(e.lo(), e.hi()));
        for (i, &(j, s, t)) in picks.iter().take(a.dim()).enumerate() {
            let j = j % a.branches();
            va = va.add(&pick(a.coeff(i, j), s)).unwrap();
            vb = vb.add(&pick(b.coeff(i, j), t)).unwrap();
            x.push(d.branch_interval(i, j).unwrap().mid());
        }
        let prod = mul_models(&a, &b).unwrap().evaluate(&x).unwrap();
        let sum = add_models(&a, &b).unwrap().evaluate(&x).unwrap();
        prop_assert!(va.mul(&vb).unwrap().intersects(&prod), "{va} * {vb} vs {prod}");
        prop_assert!(va.add(&vb).unwrap().intersects(&sum), "{va} + {vb} vs {sum}");
    }

    #[test]
    fn scalar_affine_maps_ranges(m in arb_model(-3.0, 3.0, 2.0), c in -4.0..4.0f64, d in -4.0..4.0f64) {
        let r = m.range();
        let got = scalar_affine(&m, c, d).unwrap().range();
        let (lo, hi) = if c >= 0.0 { (r.lambda, r.mu) } else { (r.mu, r.lambda) };
        let tol = 1e-13 * (1.0 + r.lambda.abs() + r.mu.abs()) * (1.0 + c.abs()) + 1e-13 * d.abs();
        prop_assert!((got.lambda - (c * lo + d)).abs() <= tol);
        prop_assert!((got.mu - (c * hi + d)).abs() <= tol);
        prop_assert!(got.lambda <= c * lo + d + tol && got.mu >= c * hi + d - tol);
    }

    #[test]
    fn expression_models_contain_point_values(
        idx in 0usize..6,
        lo in prop::collection::vec(-1.0..1.0f64, 2),
        w in prop::collection::vec(0.01..2.0f64, 2),
        nb in 1usize..12,
        t in prop::collection::vec(0.0..=1.0f64, 2),
    ) {
        let text = [
            "exp(sin(x1)+sin(x2)*cos(x2))",
            "x1*x2 - sqr(x1) + 3",
            "log(2 + x1*x1) / (3 + cos(x2))",
            "tan(0.3*x1) + inv(4 + x2)",
            "sqrt(x1*x1 + x2*x2 + 1)",
            "(x1 + x2)^3 - cot(2 + 0.1*x2)",
        ][idx];
        let e = Expr::parse(text, 2).unwrap();
        let bx: Vec<Interval> = lo.iter().zip(&w).map(|(&a, &b)| iv(a, a + b)).collect();
        let d = Domain::shared(bx.clone(), nb).unwrap();
        let m = match e.eval_ism(&d) {
            Ok(mut v) => v.remove(0),
            Err(err) if err.is_domain_error() => return Ok(()),
            Err(err) => return Err(TestCaseError::fail(err.to_string())),
        };
        let x: Vec<f64> = bx.iter().zip(&t).map(|(a, &s)| a.lo() + s * a.diam()).collect();
        let x: Vec<f64> = x.iter().zip(&bx).map(|(&v, a)| v.clamp(a.lo(), a.hi())).collect();
        let pt: Vec<Interval> = x.iter().map(|&v| Interval::point(v)).collect();
        let exact = e.eval_interval(&pt).unwrap()[0];
        prop_assert!(m.evaluate(&x).unwrap().intersects(&exact));
    }
}

#[test]
fn power_two_is_the_square_atom() {
    let d = Domain::shared(vec![iv(-1.0, 2.0), iv(0.0, 1.0)], 7).unwrap();
    let a = Expr::parse("(x1 + sin(x2))^2", 2)
        .unwrap()
        .eval_ism(&d)
        .unwrap();
    let b = Expr::parse("sqr(x1 + sin(x2))", 2)
        .unwrap()
        .eval_ism(&d)
        .unwrap();
    assert_eq!(a, b);
}

#[test]
fn separable_inputs_have_zero_remainder() {
    let d = Domain::shared(vec![iv(0.0, 1.0); 3], 5).unwrap();
    let x2 = SuperpositionModel::variable(&d, 1).unwrap();
    let shifted = scalar_affine(&x2, 0.5, 0.25).unwrap();
    for g in AtomKind::ALL {
        let r = workspace(g, &shifted).unwrap().remainder;
        assert_eq!(r, 0.0, "{}", g.name());
    }
    let y = compose(AtomKind::Exp, &x2).unwrap();
    assert_eq!(ProductWorkspace::new(&y, &shifted).unwrap().remainder, 0.0);
}

#[test]
fn refined_grid_hull_is_nested() {
    let e = Expr::parse("sin(3*x1)*cos(x2) + x1", 2).unwrap();
    let bx = [iv(0.0, PI), iv(-1.0, 2.0)];
    let mut prev: Option<Interval> = None;
    for g in [5, 9, 17, 33, 65] {
        let h = sample_image(&e, &bx, SampleMode::Grid { per_axis: g }, DEFAULT_BUDGET)
            .unwrap()
            .hull()[0];
        if let Some(p) = prev {
            assert!(p.is_subset_of(&h), "G={g}: {p} not in {h}");
        }
        prev = Some(h);
    }
    let d = Domain::shared(bx.to_vec(), 16).unwrap();
    let isa = e.eval_ism(&d).unwrap()[0].range().as_interval();
    assert!(prev.unwrap().is_subset_of(&isa));
}

#[test]
fn sampling_is_deterministic() {
    let e = Expr::parse("exp(x1) - x2*x3", 3).unwrap();
    let bx = [iv(0.0, 1.0), iv(-1.0, 1.0), iv(2.0, 3.0)];
    let mode = SampleMode::Random {
        count: 2000,
        seed: 11,
    };
    let a = sample_image(&e, &bx, mode, DEFAULT_BUDGET).unwrap();
    let b = sample_image(&e, &bx, mode, DEFAULT_BUDGET).unwrap();
    assert_eq!(a, b);
    let m = Expr::parse("sin(x1+x2+x3)", 3).unwrap();
    let d = Domain::shared(bx.to_vec(), 4).unwrap();
    let m = m.eval_ism(&d).unwrap().remove(0);
    let v1 = remainder_violation_search(AtomKind::Sin, &m, 300, 5).unwrap();
    let v2 = remainder_violation_search(AtomKind::Sin, &m, 300, 5).unwrap();
    assert_eq!(v1.to_bits(), v2.to_bits());
}
