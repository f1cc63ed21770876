use std::f64::consts::E;

use proptest::prelude::*;

use super::*;

fn spec(scale: &str, fields: &[(&str, &str)]) -> InstanceSpec {
    fields
        .iter()
        .fold(InstanceSpec::on(scale).unwrap(), |s, (k, v)| s.with(k, v).unwrap())
}

fn run(id: InequalityId, scale: &str, fields: &[(&str, &str)]) -> CheckReport {
    check(id, &spec(scale, fields)).unwrap()
}

fn close(a: f64, b: f64, eps: f64) -> bool {
    (a - b).abs() <= eps
}

#[test]
fn ids_round_trip() {
    for id in InequalityId::ALL {
        assert_eq!(id.name().parse::<InequalityId>().unwrap(), id);
        assert_eq!(serde_json::to_string(&id).unwrap(), format!("\"{id}\""));
    }
    assert!("jensen2".parse::<InequalityId>().is_err());
}

#[test]
fn spec_fields_round_trip() {
    let s = spec(
        "union(interval(0,1),points(2,3))",
        &[("p", "1 + t"), ("x", "-t^2"), ("F", "abs"), ("kink", "left"), ("order", "opposite"), ("tol", "1e-7"), ("seed", "9")],
    );
    let rebuilt = s.fields().iter().fold(InstanceSpec::on("point(0)").unwrap(), |acc, (k, v)| acc.with(k, v).unwrap());
    assert_eq!(rebuilt, s);
    let json = serde_json::to_string(&s).unwrap();
    assert_eq!(serde_json::from_str::<InstanceSpec>(&json).unwrap(), s);
    assert!(json.contains("\"scale\":\"union(interval(0,1),points(2,3))\""));
    assert!(s.replay_command(InequalityId::Jensen).starts_with("tsint check jensen --scale 'union(interval(0,1),points(2,3))'"));
    assert!(InstanceSpec::on("point(0)").unwrap().with("colour", "red").is_err());
    assert!(InstanceSpec::on("point(0)").unwrap().with("tol", "nan").is_err());
}

#[test]
fn quoting() {
    assert_eq!(shell_quote("t^2"), "t^2");
    assert_eq!(shell_quote("1 + t"), "'1 + t'");
    assert_eq!(shell_quote("it's"), r"'it'\''s'");
    assert_eq!(shell_quote(""), "''");
}

#[test]
fn positivity_examples() {
    let r = run(InequalityId::Positivity, "interval(0,1)", &[("f", "0")]);
    assert_eq!(r.margin, 0.0);
    assert!(r.passed);
    let r = run(InequalityId::Positivity, "integers(0,3)", &[("f", "t^2")]);
    assert_eq!(r.margin, 5.0);
    let e = check(InequalityId::Positivity, &spec("interval(0,2)", &[("f", "t - 1")])).unwrap_err();
    match e {
        Error::PreconditionViolated { witness: Some(t), .. } => assert!(t < 1.0),
        other => panic!("{other:?}"),
    }
}

#[test]
fn monotone_examples() {
    let r = run(InequalityId::Monotone, "interval(0,1)", &[("f", "1")]);
    assert!(r.passed && r.margin > 0.0);
    assert!(close(r.details["cumulative_at_b"], 1.0, 1e-8));
    // F = 0, 0, 1, 3, 6 on {0, ..., 4}
    let r = run(InequalityId::Monotone, "integers(0,4)", &[("f", "t")]);
    assert_eq!(r.margin, 0.0);
    assert_eq!(r.details["cumulative_at_b"], 6.0);
    let r = run(InequalityId::Monotone, "union(interval(0,1),points(2,3))", &[("f", "0")]);
    assert_eq!(r.margin, 0.0);
}

#[test]
fn subdifferential_catalog() {
    for name in ["square", "exp", "abs", "xlogx", "power_1.5", "neg_entropy"] {
        for kink in ["mid", "left", "right"] {
            let r = run(InequalityId::Subdifferential, "point(0)", &[("F", name), ("kink", kink), ("seed", "3")]);
            assert!(r.passed, "{name} {kink}: {r:?}");
        }
    }
}

#[test]
fn theorem5_examples() {
    let base = [("p", "1"), ("F", "square")];
    let r = run(InequalityId::Theorem5, "interval(0,1)", &[base[0], base[1], ("x", "t"), ("y", "t")]);
    assert_eq!(r.margin, 0.0);
    // F = square: margin = Σ (x - y)² = Σ t²/4 over {0, 1, 2}
    let r = run(InequalityId::Theorem5, "integers(0,3)", &[base[0], base[1], ("x", "t"), ("y", "t/2")]);
    let oracle: f64 = (0..3).map(|t| (t as f64 / 2.0).powi(2)).sum();
    assert!(close(r.margin, oracle, 1e-12), "{}", r.margin);
    let lhs: f64 = (0..3).map(|t| (t * t) as f64 - (t as f64 / 2.0).powi(2)).sum();
    assert!(close(r.lhs, lhs, 1e-12));
}

#[test]
fn theorem5_square_reduces_to_squared_distance() {
    let scale = "union(interval(0,1),qtail(q=2,at=1.5,upto=2),points(2.5,3))";
    let fields = [("p", "1 + t"), ("x", "t^2 - 1"), ("y", "0.5*t"), ("F", "square"), ("g", "t + 0.25*t^2")];
    let r = run(InequalityId::Theorem5, scale, &fields);
    let s = spec(scale, &fields);
    let sb = s.scale.build().unwrap();
    let d = |t: f64| -> Result<f64> { Ok((1.0 + t) * (t * t - 1.0 - 0.5 * t).powi(2)) };
    let direct = crate::integrate::rs_integral(&sb, &d, &s.g, sb.min(), sb.max(), 1e-10).unwrap();
    assert!(close(r.margin, direct.value, 5.0 * s.tol), "{} vs {}", r.margin, direct.value);
}

#[test]
fn jensen_examples() {
    let r = run(InequalityId::Jensen, "integers(0,3)", &[("p", "1"), ("x", "t"), ("F", "square")]);
    assert!(close(r.margin, 2.0 / 3.0, 1e-12));
    assert!(close(r.lhs, 5.0 / 3.0, 1e-12) && close(r.rhs, 1.0, 1e-12));
    let r = run(InequalityId::Jensen, "interval(0,1)", &[("p", "1"), ("x", "t"), ("F", "exp")]);
    assert!(close(r.margin, (E - 1.0) - E.sqrt(), 1e-8), "{}", r.margin);
    for scale in ["interval(0,1)", "integers(0,5)", "union(interval(0,1),qtail(q=3,at=2,upto=3))"] {
        let r = run(InequalityId::Jensen, scale, &[("p", "1 + t"), ("x", "0.7"), ("F", "exp")]);
        assert!(r.margin.abs() <= r.slack, "{scale}: {r:?}");
        // affine F
        let r = run(InequalityId::Jensen, scale, &[("p", "1 + t"), ("x", "1 + t"), ("F", "power_1")]);
        assert!(r.margin.abs() <= r.slack, "{scale}: {r:?}");
    }
}

#[test]
fn jensen_preconditions() {
    let e = check(InequalityId::Jensen, &spec("interval(0,1)", &[("p", "0"), ("x", "t"), ("F", "square")])).unwrap_err();
    assert!(e.is_precondition(), "{e}");
    let e = check(InequalityId::Jensen, &spec("interval(0,1)", &[("p", "t - 0.5"), ("x", "t"), ("F", "square")])).unwrap_err();
    assert!(e.is_precondition(), "{e}");
    let e = check(InequalityId::Jensen, &spec("interval(0,1)", &[("p", "1"), ("x", "t - 0.5"), ("F", "xlogx")])).unwrap_err();
    assert!(e.is_precondition(), "{e}");
    let e = check(InequalityId::Jensen, &spec("interval(0,1)", &[("p", "1"), ("x", "t"), ("F", "square"), ("g", "0-t")])).unwrap_err();
    assert!(matches!(e, Error::NonMonotoneIntegrator { .. }), "{e}");
    let e = check(InequalityId::Jensen, &spec("interval(0,1)", &[("p", "1"), ("x", "t")])).unwrap_err();
    assert!(matches!(e, Error::InvalidArgument(_)), "{e}");
}

#[test]
fn reverse_jensen_examples() {
    let r = run(InequalityId::ReverseJensen, "integers(0,3)", &[("p", "1"), ("y", "t"), ("F", "square")]);
    assert!(close(r.details["m1"], 2.0 / 3.0, 1e-12));
    assert!(close(r.details["upper_bound"], 4.0 / 3.0, 1e-12));
    assert!(close(r.details["m2"], 2.0 / 3.0, 1e-12));
    assert!(close(r.margin, 2.0 / 3.0, 1e-12));
    let r = run(InequalityId::ReverseJensen, "interval(0,2)", &[("p", "1"), ("y", "1.5"), ("F", "exp")]);
    assert!(r.margin.abs() <= r.slack && r.passed, "{r:?}");
}

#[test]
fn chebyshev_examples() {
    let r = run(InequalityId::Chebyshev, "integers(0,3)", &[("p", "1"), ("f1", "t"), ("f2", "t")]);
    assert_eq!(r.margin, 6.0);
    assert_eq!((r.lhs, r.rhs), (15.0, 9.0));
    let r = run(InequalityId::Chebyshev, "integers(0,3)", &[("p", "1"), ("f1", "2"), ("f2", "t")]);
    assert_eq!(r.margin, 0.0);
    let r = run(InequalityId::Chebyshev, "integers(0,3)", &[("p", "1"), ("f1", "t"), ("f2", "0-t"), ("order", "opposite")]);
    assert_eq!(r.margin, 6.0);
    let r = run(InequalityId::ChebyshevKernel, "integers(0,3)", &[("p", "1"), ("f1", "t"), ("f2", "0-t"), ("order", "opposite")]);
    assert_eq!(r.lhs, -12.0);
    assert_eq!(r.margin, 12.0);
    let r = run(InequalityId::ChebyshevKernel, "interval(0,1)", &[("p", "1"), ("f1", "t"), ("f2", "3")]);
    assert_eq!(r.margin, 0.0);
}

#[test]
fn misordered_pairs_are_preconditions() {
    let e = check(InequalityId::Chebyshev, &spec("integers(0,3)", &[("p", "1"), ("f1", "t"), ("f2", "0-t")])).unwrap_err();
    assert!(matches!(e, Error::OrderingViolated { product, .. } if product < 0.0), "{e}");
    let e = check(InequalityId::ChebyshevKernel, &spec("interval(0,2)", &[("p", "1"), ("f1", "t"), ("f2", "(t-1)^2")])).unwrap_err();
    assert!(e.is_precondition(), "{e}");
}

#[test]
fn kernel_is_twice_the_product_form() {
    let cases = [
        ("interval(0,1)", "1 + t", "t", "exp(t)", "similar"),
        ("union(interval(0,1),points(1.5,2))", "1", "t^2", "0-t", "opposite"),
        ("union(qtail(q=2,at=0,upto=1),interval(1.5,2))", "2 - 0.5*t", "t", "t/(1 + t)", "similar"),
        ("hgrid(0,2,0.25)", "1 + t", "t", "t^3", "similar"),
    ];
    for (scale, p, f1, f2, order) in cases {
        let fields = [("p", p), ("f1", f1), ("f2", f2), ("order", order), ("tol", "1e-7")];
        let k = run(InequalityId::ChebyshevKernel, scale, &fields);
        let c = run(InequalityId::Chebyshev, scale, &fields);
        assert!(close(k.margin, 2.0 * c.margin, 5e-7), "{scale}: {} vs {}", k.margin, c.margin);
        assert!(k.passed && c.passed);
    }
}

#[test]
fn winckler_examples() {
    let r = run(InequalityId::Winckler, "interval(0,1)", &[("p", "1 + t"), ("f", "2.5")]);
    assert!(r.margin.abs() <= r.slack, "{r:?}");
    let r = run(InequalityId::Winckler, "interval(0,1)", &[("p", "1"), ("f", "exp(t)")]);
    let oracle = (E - 1.0) * (1.0 - 1.0 / E) - 1.0;
    assert!(close(r.margin, oracle, 1e-8), "{} vs {oracle}", r.margin);
    assert!(close(r.details["printed_orientation_margin"], -oracle, 1e-8));
    let r = run(InequalityId::Winckler, "integers(0,4)", &[("p", "1"), ("f", "0 - exp(t)")]);
    assert!(r.passed && r.margin > 0.0);
    let e = check(InequalityId::Winckler, &spec("interval(0,2)", &[("p", "1"), ("f", "t - 1")])).unwrap_err();
    assert!(matches!(e, Error::Domain { .. }), "{e}");
    let e = check(InequalityId::Winckler, &spec("points(0,1,2)", &[("p", "1"), ("f", "t - 0.5")])).unwrap_err();
    assert!(e.is_precondition(), "{e}");
}

#[test]
fn majorisation_eq_examples() {
    let r = run(InequalityId::MajorisationEq, "interval(0,1)", &[("p", "1"), ("x", "t"), ("y", "t"), ("F", "square")]);
    assert_eq!(r.margin, 0.0);
    let r = run(InequalityId::MajorisationEq, "interval(0,1)", &[("p", "1"), ("x", "2*t - 0.5"), ("y", "t"), ("F", "square")]);
    assert!(close(r.margin, 0.25, 1e-8), "{}", r.margin);
    // y = t, x - y = t - 2 on {0, ..., 4}: both sums over {0, 1, 2, 3} equal 6
    let r = run(InequalityId::MajorisationEq, "integers(0,4)", &[("p", "1"), ("x", "2*t - 1.5"), ("y", "t"), ("F", "abs")]);
    let oracle: f64 = (0..4).map(|t| (2.0 * t as f64 - 1.5).abs() - t as f64).sum();
    assert_eq!(r.margin, oracle);
    assert!(r.passed);
}

#[test]
fn majorisation_eq_preconditions() {
    let e = check(InequalityId::MajorisationEq, &spec("interval(0,1)", &[("p", "1"), ("x", "t + 0.1"), ("y", "t"), ("F", "square")])).unwrap_err();
    assert!(e.is_precondition(), "{e}");
    let e = check(InequalityId::MajorisationEq, &spec("interval(0,1)", &[("p", "1"), ("x", "0.5"), ("y", "t"), ("F", "square")])).unwrap_err();
    match e {
        Error::PreconditionViolated { witness: Some(_), .. } => {}
        other => panic!("{other:?}"),
    }
}

#[test]
fn majorisation_eq_can_fail_for_signed_weights() {
    // p = 1, -1 on {0, 1}: equal integrals and co-monotone y, x - y, yet the conclusion fails
    let r = run(InequalityId::MajorisationEq, "points(0,1,2)", &[("p", "1 - 2*t"), ("x", "t + 0.5"), ("y", "t"), ("F", "square")]);
    assert_eq!(r.margin, -1.0);
    assert!(!r.passed);
}

#[test]
fn majorisation_le_examples() {
    let r = run(InequalityId::MajorisationLe, "integers(0,3)", &[("p", "1"), ("x", "t + 1"), ("y", "t"), ("F", "exp")]);
    let oracle = (E - 1.0) * (1.0 + E + E * E);
    assert!(close(r.margin, oracle, 1e-12 * oracle));
    let r = run(InequalityId::MajorisationLe, "interval(0,1)", &[("p", "1"), ("x", "t + 0.3"), ("y", "t"), ("F", "exp")]);
    assert!(r.passed && r.margin > 0.0);
    let r = run(InequalityId::MajorisationLe, "interval(0,1)", &[("p", "1"), ("x", "t"), ("y", "t"), ("F", "exp")]);
    assert_eq!(r.margin, 0.0);
    let e = check(InequalityId::MajorisationLe, &spec("interval(0,1)", &[("p", "1"), ("x", "t + 1"), ("y", "t"), ("F", "square")])).unwrap_err();
    assert!(e.is_precondition(), "{e}");
    let e = check(InequalityId::MajorisationLe, &spec("interval(0,1)", &[("p", "1"), ("x", "t - 1"), ("y", "t"), ("F", "exp")])).unwrap_err();
    assert!(e.is_precondition(), "{e}");
}

#[test]
fn scaling_covariance() {
    let scale = "union(interval(0,1),points(1.5,2,2.5))";
    let t5 = [("x", "t^2"), ("y", "1 - t"), ("F", "exp"), ("tol", "1e-10")];
    let ch = [("f1", "t"), ("f2", "exp(t)"), ("tol", "1e-10")];
    let with_p = |fields: &[(&'static str, &'static str)], p: &'static str| {
        let mut v = fields.to_vec();
        v.push(("p", p));
        v
    };
    let base5 = run(InequalityId::Theorem5, scale, &with_p(&t5, "1 + t")).margin;
    let basec = run(InequalityId::Chebyshev, scale, &with_p(&ch, "1 + t")).margin;
    for (lambda, p) in [(2.0, "2*(1 + t)"), (10.0, "10*(1 + t)")] {
        let m5 = run(InequalityId::Theorem5, scale, &with_p(&t5, p)).margin;
        assert!(close(m5, lambda * base5, 1e-8 * lambda), "{m5} vs {}", lambda * base5);
        let mc = run(InequalityId::Chebyshev, scale, &with_p(&ch, p)).margin;
        assert!(close(mc, lambda * lambda * basec, 1e-8 * lambda * lambda), "{mc} vs {}", lambda * lambda * basec);
    }
}

#[test]
fn reports_are_replayable() {
    let s = spec("union(interval(0,1),qtail(q=2,at=1.5,upto=2))", &[("p", "1 + t"), ("x", "exp(t)"), ("F", "xlogx"), ("seed", "4")]);
    let a = check(InequalityId::Jensen, &s).unwrap();
    let b = check(InequalityId::Jensen, &a.instance).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let back: CheckReport = serde_json::from_str(&serde_json::to_string(&a).unwrap()).unwrap();
    assert_eq!(back, a);
}

#[test]
fn discrete_margins_match_finite_sums() {
    let ts: Vec<f64> = vec![0.0, 0.5, 1.25, 2.0, 3.5];
    let scale = "points(0,0.5,1.25,2,3.5)";
    let p = |t: f64| 1.0 + t;
    let x = |t: f64| t * t - 1.0;
    let w: Vec<f64> = ts.windows(2).map(|c| c[1] * c[1] - c[0] * c[0]).collect();
    let s = |f: &dyn Fn(f64) -> f64| -> f64 { ts.iter().zip(&w).map(|(&t, &dw)| p(t) * f(t) * dw).sum() };
    let a = s(&|_| 1.0);
    let r = run(InequalityId::Jensen, scale, &[("p", "1 + t"), ("x", "t^2 - 1"), ("F", "exp"), ("g", "t^2")]);
    let oracle = s(&|t| x(t).exp()) / a - (s(&x) / a).exp();
    assert!(close(r.margin, oracle, 1e-12 * oracle.abs().max(1.0)), "{} vs {oracle}", r.margin);
    let r = run(InequalityId::Chebyshev, scale, &[("p", "1 + t"), ("f1", "t"), ("f2", "t^3"), ("g", "t^2")]);
    let oracle = a * s(&|t| t.powi(4)) - s(&|t| t) * s(&|t| t.powi(3));
    assert!(close(r.margin, oracle, 1e-12 * oracle.abs()), "{} vs {oracle}", r.margin);
    let r = run(InequalityId::Winckler, scale, &[("p", "1 + t"), ("f", "1 + t"), ("g", "t^2")]);
    let oracle = s(&|t| 1.0 + t) * s(&|t| 1.0 / (1.0 + t)) - a * a;
    assert!(close(r.margin, oracle, 1e-12 * oracle.abs().max(a * a)), "{} vs {oracle}", r.margin);
}

#[test]
fn fuzz_is_deterministic_and_clean() {
    let cfg = GeneratorConfig::default();
    for id in [InequalityId::Jensen, InequalityId::MajorisationEq, InequalityId::Winckler] {
        let a = fuzz(id, 20, 5, &cfg).unwrap();
        let b = fuzz(id, 20, 5, &cfg).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_eq!(a.violations, 0, "{a:?}");
        assert_eq!(a.checked + a.unconverged, 20);
    }
}

#[test]
fn single_trial_matches_direct_check() {
    let r = fuzz(InequalityId::Theorem5, 1, 11, &GeneratorConfig::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    rng.set_stream(0);
    let direct = loop {
        match generate::generate(InequalityId::Theorem5, &mut rng, &GeneratorConfig::default()).and_then(|s| check(InequalityId::Theorem5, &s)) {
            Ok(r) => break r,
            Err(e) => assert!(e.is_precondition() || matches!(e, Error::Domain { .. }), "{e}"),
        }
    };
    assert_eq!(r.min_margin, Some(direct.margin));
}

#[test]
fn misordered_generator_is_exhausted() {
    let cfg = GeneratorConfig { misorder: true, ordering: Some(Ordering::Similar), max_rejections: 50, ..Default::default() };
    let e = fuzz(InequalityId::Chebyshev, 3, 1, &cfg).unwrap_err();
    match e {
        Error::GeneratorExhausted { attempts: 50, last } => assert!(last.is_precondition(), "{last}"),
        other => panic!("{other:?}"),
    }
    assert!(fuzz(InequalityId::Jensen, 0, 1, &GeneratorConfig::default()).is_err());
}

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generated_instances_satisfy_their_checks(seed in any::<u64>(), k in 0usize..8) {
        let id = [
            InequalityId::Jensen,
            InequalityId::Theorem5,
            InequalityId::ReverseJensen,
            InequalityId::Chebyshev,
            InequalityId::Winckler,
            InequalityId::MajorisationEq,
            InequalityId::MajorisationLe,
            InequalityId::Positivity,
        ][k];
        let r = fuzz(id, 3, seed, &GeneratorConfig::default()).unwrap();
        prop_assert_eq!(r.violations, 0, "{:?}", r.failing);
    }

    #[test]
    fn constant_arguments_give_jensen_equality(c in 0.05f64..0.95, k in 0usize..3) {
        let scale = ["interval(0,1)", "integers(0,4)", "union(points(0,0.5),qtail(q=2,at=1,upto=2))"][k];
        let fields = [("p", "1 + t"), ("F", "neg_entropy")];
        let s = spec(scale, &fields).with("x", &c.to_string()).unwrap();
        let r = check(InequalityId::Jensen, &s).unwrap();
        prop_assert!(r.margin.abs() <= r.slack, "{:?}", r);
    }
}

#[test]
fn qscale_numbers() {
    let r = qscale_example(2.0, 1e-12).unwrap();
    assert!(close(r.engine.value, 3.0 / 7.0, 1e-10), "{r:?}");
    assert!(close(r.series, 3.0 / 7.0, 1e-15));
    assert!(r.engine.tail_bound > 0.0 && r.engine.tail_bound < 1e-10);
    assert_eq!(r.printed_square_claim, 1.0);
    assert!(!r.printed_claim_agrees);
    assert!(r.unit_display_equal && close(r.unit_display_lhs, 1.0 / 9.0, 1e-16));
    let r = qscale_example(100.0, 1e-10).unwrap();
    assert!(close(r.engine.value, (1e4 - 1.0) / (1e6 - 1.0), 1e-10));
    assert!(qscale_example(1.0, 1e-8).is_err());
}

#[test]
fn signed_weights_expose_majorisation_counterexamples() {
    let cfg = GeneratorConfig { signed_weights: true, ..Default::default() };
    let r = fuzz(InequalityId::MajorisationEq, 200, 3, &cfg).unwrap();
    assert!(r.violations > 0, "{r:?}");
    assert!(r.failing.iter().all(|f| f.margin < 0.0));
    assert_eq!(fuzz(InequalityId::MajorisationEq, 200, 3, &GeneratorConfig::default()).unwrap().violations, 0);
}
