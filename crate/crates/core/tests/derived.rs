//! Comparisons against values produced by `oracle/derive_values.py`.

use std::collections::HashMap;

use monge_core::forms::compute_stj;
use monge_core::param::NormalForm12;
use monge_core::pde::{branch_gammas, generate_pde, invert_g, sigma_tau, supply_gamma, Branch, NormalFormST0};
use monge_core::symcore::{eval, ex, normalize, Expr};
use monge_core::system::SystemDef;
use monge_core::{DomainBox, DEFAULT_SEED};
use serde_json::Value;

fn derived() -> Value {
    serde_json::from_str(include_str!("data/derived.json")).unwrap()
}

fn sympy_expr(v: &Value) -> Expr {
    ex(&v.as_str().unwrap().replace("**", "^"))
}

fn same(a: &Expr, b: &Expr) -> bool {
    normalize(&Expr::sub(a.clone(), b.clone())).is_zero()
}

fn ratio(text: &str) -> f64 {
    match text.split_once('/') {
        Some((n, d)) => n.parse::<f64>().unwrap() / d.parse::<f64>().unwrap(),
        None => text.parse().unwrap(),
    }
}

#[test]
fn invariants_of_the_three_examples() {
    let d = derived();
    for (name, g, h) in [("a", "lam", "y"), ("b", "lam", "y + lam^2"), ("c", "lam^2", "y")] {
        let r = compute_stj(&SystemDef::parse(g, h).unwrap(), DEFAULT_SEED).unwrap();
        let want = &d["stj"][name];
        for (i, got) in [&r.s, &r.t, &r.j].into_iter().enumerate() {
            assert!(same(got, &sympy_expr(&want[i])), "system ({name}) component {i}: {got} vs {}", want[i]);
        }
    }
}

#[test]
fn first_integral_derivative() {
    let nf = NormalForm12 { kappa: ex("1"), a: ex("0"), b: ex("0"), c: ex("y"), domain: DomainBox::default() };
    let hdot = nf.hdot(&ex("-z + y*x1"));
    assert!(same(&hdot, &sympy_expr(&derived()["order12_hdot"])), "{hdot}");
}

#[test]
fn quartic_sigma_tau() {
    let d = derived();
    let sys = SystemDef::parse("lam", "0").unwrap();
    let pde = generate_pde(&supply_gamma(&sys, ex("w"), DEFAULT_SEED).unwrap(), 1, 1).unwrap();
    let cand = sigma_tau(&ex("x^4 + u0 + v0"), &pde, &DomainBox::default(), DEFAULT_SEED).unwrap();
    assert!(same(&cand.tau.unwrap(), &sympy_expr(&d["quartic"]["tau"])));
    assert!(same(&cand.sigma.unwrap(), &sympy_expr(&d["quartic"]["sigma"])));
}

#[test]
fn printed_pde_equations_evaluate_as_derived() {
    let d = derived();
    let vals: HashMap<String, f64> = d["placeholder_values"]
        .as_object()
        .unwrap()
        .iter()
        .map(|(k, v)| (k.clone(), ratio(v.as_str().unwrap())))
        .collect();
    let nf = NormalFormST0 {
        kappa: ex("1"),
        alpha: ex("z"),
        beta: ex("z - 1"),
        a: ex("0"),
        b: ex("0"),
        c: ex("y"),
        domain: DomainBox::default(),
        alpha_inverse: None,
        beta_inverse: None,
    };
    let (g1, g2) = branch_gammas(&nf, DEFAULT_SEED).unwrap();
    let sys_c = SystemDef::parse("lam^2", "y").unwrap();
    let g3 = invert_g(&sys_c, Some(Branch::Plus), DEFAULT_SEED).unwrap();
    for (key, gd) in [("sys_b_branch1", g1), ("sys_b_branch2", g2), ("sys_c", g3)] {
        let pde = generate_pde(&gd, 3, 4).unwrap();
        let got = eval(&pde.eq_a, &vals).unwrap();
        let want = ratio(d["edp_a_values"][key].as_str().unwrap());
        assert!((got - want).abs() < 1e-12, "{key}: {got} vs {want}");
    }
}
