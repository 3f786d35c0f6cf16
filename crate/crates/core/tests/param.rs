use std::collections::BTreeMap;

use monge_core::param::{
    build_from_solution, construct_order12, endogenous_candidate, jacobian_probe, sample_germs, verify_flat_output,
    verify_numeric, verify_symbolic, verify_symbolic_against, FlatConfig, FlatOutput, GermConfig, NormalForm12,
    ParamKind, Parameterization,
};
use monge_core::pde::{generate_pde, regularity, supply_gamma};
use monge_core::symcore::{ex, DomainBox};
use monge_core::system::SystemDef;
use monge_core::{Error, DEFAULT_SEED};

fn sys_a() -> SystemDef {
    SystemDef::parse("lam", "y").unwrap()
}

fn param12_a() -> Parameterization {
    Parameterization::symbolic(
        1,
        2,
        ex("v0"),
        ex("(v1^2*u0 + u1)/(v2 + v1^3 - 1)"),
        ex("((1 - v2)*u0 + v1*u1)/(v2 + v1^3 - 1)"),
    )
    .unwrap()
}

fn safe_center() -> BTreeMap<String, f64> {
    [("u0", 0.5), ("u1", 0.7), ("v0", 0.3), ("v1", 1.0), ("v2", 1.0)]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
}

fn point(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

#[test]
fn param12_a_solves_system_a_symbolically() {
    let rep = verify_symbolic(&param12_a(), &sys_a(), DEFAULT_SEED).unwrap();
    assert!(rep.passed(), "{}", rep.to_json());
    assert_eq!(rep.get("solution").unwrap().verdict.as_ref().unwrap().label(), "ProvedZero");
    assert!(rep.get("nondegenerate_u").unwrap().passed.unwrap());
    assert!(rep.get("nondegenerate_v").unwrap().passed.unwrap());
    assert_eq!(rep.get("open_image").unwrap().passed, None);
}

#[test]
fn perturbed_param12_a_is_rejected_with_witness() {
    let par = Parameterization::symbolic(
        1,
        2,
        ex("v0"),
        ex("(v1^2*u0 - u1)/(v2 + v1^3 - 1)"),
        ex("((1 - v2)*u0 - v1*u1)/(v2 + v1^3 - 1)"),
    )
    .unwrap();
    let rep = verify_symbolic(&par, &sys_a(), DEFAULT_SEED).unwrap();
    assert!(!rep.passed());
    assert!(rep.get("solution").unwrap().verdict.as_ref().unwrap().is_nonzero());
}

#[test]
fn closed_form_solution_of_an_algebraic_relation() {
    // y' - z x' = z is solved by x = u, y = v, z = v'/(1 + u').
    let par = Parameterization::symbolic(1, 1, ex("u0"), ex("v0"), ex("v1/(1 + u1)")).unwrap();
    let rel = ex("y1 - z*x1 - z");
    let rep = verify_symbolic_against(&par, &rel, &DomainBox::default(), DEFAULT_SEED).unwrap();
    assert!(rep.passed(), "{}", rep.to_json());
    assert_eq!(rep.get("solution").unwrap().verdict.as_ref().unwrap().label(), "ProvedZero");
}

#[test]
fn param12_a_numeric_residual_is_small() {
    let cfg = GermConfig { center: safe_center(), ..GermConfig::default() };
    let rep = verify_numeric(&param12_a(), &sys_a(), &cfg, DEFAULT_SEED).unwrap();
    assert!(rep.passed(), "{}", rep.to_json());
    assert!(rep.get("max_residual").unwrap().value.unwrap() < 1e-8);
}

#[test]
fn corrupted_chi_fails_numerically() {
    let par = Parameterization::symbolic(
        1,
        2,
        ex("v0"),
        ex("(v1^2*u0 + u1)/(v2 + v1^3 - 1)"),
        ex("((1 - v2)*u0 + v1*u1)/(v2 + v1^3 - 1) + 1/1000"),
    )
    .unwrap();
    let cfg = GermConfig { center: safe_center(), ..GermConfig::default() };
    let rep = verify_numeric(&par, &sys_a(), &cfg, DEFAULT_SEED).unwrap();
    assert!(!rep.passed());
    let r = rep.get("max_residual").unwrap().value.unwrap();
    assert!(r > 1e-4 && r < 1e-2, "{r}");
}

fn quartic() -> (monge_core::pde::PdeSystem, monge_core::Expr) {
    let sys = SystemDef::parse("lam", "0").unwrap();
    let gd = supply_gamma(&sys, ex("w"), DEFAULT_SEED).unwrap();
    (generate_pde(&gd, 1, 1).unwrap(), ex("x^4 + u0 + v0"))
}

#[test]
fn quartic_pipeline() {
    let (pde, p) = quartic();
    let domain = DomainBox::default();
    let par =
        build_from_solution(&p, &pde, &point(&[("u0", 0.2), ("x", 0.3), ("v0", 0.1)]), &domain, DEFAULT_SEED).unwrap();
    let ParamKind::Implicit { base_point, .. } = &par.kind else { panic!("implicit kind expected") };
    assert!((base_point["u1"] - 12.0 * 0.09).abs() < 1e-12);
    assert_eq!(base_point["v1"], 0.0);

    let ev = par.evaluator().unwrap();
    let (ud, vd) = (0.8, 0.4);
    let [x, y, z] = ev.eval(&[0.2, ud], &[0.1, vd]).unwrap();
    let expect = ((ud + vd) / 12.0_f64).sqrt();
    assert!((x - expect).abs() < 1e-10);
    assert!((y - (x.powi(4) + 0.3)).abs() < 1e-10);
    assert!((z - 4.0 * x.powi(3)).abs() < 1e-10);

    let sys = SystemDef::parse("lam", "0").unwrap();
    let cfg = GermConfig::default();
    for g in sample_germs(&par, &sys, &cfg, DEFAULT_SEED) {
        let s = g.u.derivative(1, 0.0) + g.v.derivative(1, 0.0);
        assert!((0.5..=2.0).contains(&s), "{s}");
    }
    let rep = verify_numeric(&par, &sys, &cfg, DEFAULT_SEED).unwrap();
    assert!(rep.passed(), "{}", rep.to_json());
}

#[test]
fn quartic_newton_fails_for_negative_target() {
    let (pde, p) = quartic();
    let par = build_from_solution(
        &p,
        &pde,
        &point(&[("u0", 0.2), ("x", 0.3), ("v0", 0.1)]),
        &DomainBox::default(),
        DEFAULT_SEED,
    )
    .unwrap();
    let ev = par.evaluator().unwrap();
    assert!(matches!(ev.eval(&[0.2, -0.5], &[0.1, -0.2]), Err(Error::Numeric(_))));
}

#[test]
fn build_rejects_vanishing_inequation() {
    let (pde, _) = quartic();
    let p = ex("x^4 + v0");
    let err = build_from_solution(
        &p,
        &pde,
        &point(&[("u0", 0.2), ("x", 0.3), ("v0", 0.1)]),
        &DomainBox::default(),
        DEFAULT_SEED,
    );
    assert!(matches!(err, Err(Error::Precondition(_))), "{err:?}");
}

#[test]
fn quartic_is_not_endogenous() {
    let (pde, p) = quartic();
    let rep = regularity(&p, &pde, &DomainBox::default(), DEFAULT_SEED).unwrap();
    assert!(!endogenous_candidate(&rep));
}

fn nf_a() -> NormalForm12 {
    NormalForm12 { kappa: ex("1"), a: ex("0"), b: ex("0"), c: ex("y"), domain: DomainBox::default() }
}

fn pt12(x1: f64, x2: f64) -> BTreeMap<String, f64> {
    point(&[("x", 0.3), ("y", 0.5), ("z", 0.4), ("x1", x1), ("x2", x2)])
}

#[test]
fn order12_construction_and_flat_output() {
    let nf = nf_a();
    let h = ex("-z + y*x1");
    let (par, report) = construct_order12(&nf, &h, &pt12(1.0, 1.0), &GermConfig::default(), DEFAULT_SEED).unwrap();
    assert_eq!(report.yh.label(), "ProvedZero");
    assert!(report.zh.is_nonzero());
    assert!(report.numeric.passed());
    let sys = nf.as_system().unwrap();
    let fo = FlatOutput { a: h.clone(), b: ex("x"), order: 1 };
    let rep = verify_flat_output(&par, &fo, &sys, &FlatConfig::default(), DEFAULT_SEED).unwrap();
    assert!(rep.passed(), "{}", rep.to_json());

    let bad = FlatOutput { a: ex("-z + y*x1 + 1/1000"), b: ex("x"), order: 1 };
    let rep = verify_flat_output(&par, &bad, &sys, &FlatConfig::default(), DEFAULT_SEED).unwrap();
    assert!(!rep.passed());
    let r = rep.get("from_inputs").unwrap().value.unwrap();
    assert!((r - 1e-3).abs() < 1e-5, "{r}");
}

#[test]
fn order12_agrees_with_closed_form() {
    let (par, _) =
        construct_order12(&nf_a(), &ex("-z + y*x1"), &pt12(1.0, 1.0), &GermConfig::default(), DEFAULT_SEED).unwrap();
    let a = par.evaluator().unwrap();
    let b = param12_a().evaluator().unwrap();
    let (u, v) = ([0.1, 0.6], [0.3, 1.05, 0.95]);
    let (pa, pb) = (a.eval(&u, &v).unwrap(), b.eval(&u, &v).unwrap());
    for i in 0..3 {
        assert!((pa[i] - pb[i]).abs() < 1e-9, "{pa:?} {pb:?}");
    }
    assert_eq!(pa[0], v[0]);
}

#[test]
fn order12_rejections() {
    let nf = nf_a();
    let h = ex("-z + y*x1");
    let err = construct_order12(&nf, &h, &pt12(0.5, 0.875), &GermConfig::default(), DEFAULT_SEED);
    assert!(matches!(err, Err(Error::Precondition(_))), "{err:?}");
    let err = construct_order12(&nf, &ex("y"), &pt12(1.0, 1.0), &GermConfig::default(), DEFAULT_SEED);
    assert!(matches!(err, Err(Error::Verification(_))), "{err:?}");
}

#[test]
fn flat_output_order_beyond_depth() {
    let fo = FlatOutput { a: ex("x3"), b: ex("x"), order: 3 };
    let err = verify_flat_output(&param12_a(), &fo, &sys_a(), &FlatConfig::default(), DEFAULT_SEED);
    assert!(matches!(err, Err(Error::Precondition(_))));
}

#[test]
fn param12_a_flat_output_round_trips() {
    let cfg = FlatConfig {
        germs: GermConfig { center: safe_center(), ..GermConfig::default() },
        center: point(&[("x", 0.3), ("x1", 1.0), ("x2", 1.0), ("y", 0.5), ("y1", 0.2), ("z", 0.4)]),
        ..FlatConfig::default()
    };
    let fo = FlatOutput { a: ex("-z + y*x1"), b: ex("x"), order: 1 };
    let rep = verify_flat_output(&param12_a(), &fo, &sys_a(), &cfg, DEFAULT_SEED).unwrap();
    assert!(rep.passed(), "{}", rep.to_json());
}

#[test]
fn jacobian_probe_finds_a_block() {
    let sys = SystemDef::parse("lam", "0").unwrap();
    let gd = supply_gamma(&sys, ex("w"), DEFAULT_SEED).unwrap();
    let pde = generate_pde(&gd, 2, 2).unwrap();
    let p = ex("u1 + x*v1 + v0");
    let rep = jacobian_probe(&p, &pde, 0, &DomainBox::default(), 6, DEFAULT_SEED).unwrap();
    assert!(!rep.inconclusive, "{rep:?}");
    assert_eq!((rep.i0, rep.j0), (Some(0), Some(2)));
    assert!(rep.max_fd_discrepancy < 1e-8, "{}", rep.max_fd_discrepancy);
}

#[test]
fn jacobian_probe_without_v_dependence() {
    let sys = SystemDef::parse("lam", "0").unwrap();
    let gd = supply_gamma(&sys, ex("w"), DEFAULT_SEED).unwrap();
    let pde = generate_pde(&gd, 2, 2).unwrap();
    let p = ex("u1 + x^2*u0");
    let rep = jacobian_probe(&p, &pde, 0, &DomainBox::default(), 4, DEFAULT_SEED).unwrap();
    for pair in &rep.pairs {
        if pair.j0 > 0 {
            assert!(pair.det_samples.iter().all(|s| s.value == 0.0), "{pair:?}");
        }
    }
}
