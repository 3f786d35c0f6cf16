use std::collections::HashMap;

use monge_core::oracle::{fd_check, residual_on_trajectory, simulate};
use monge_core::param::{image_at, sample_germs, GermConfig, Parameterization, ResidualProbe};
use monge_core::symcore::ex;
use monge_core::system::SystemDef;
use monge_core::{Error, DEFAULT_SEED};

fn sys_a() -> SystemDef {
    SystemDef::parse("lam", "y").unwrap()
}

fn max_error(z0: f64, dt: f64, exact: impl Fn(f64) -> f64) -> f64 {
    let tr = simulate(&sys_a(), &ex("t"), &ex("t^2"), z0, 0.0, 1.0, dt).unwrap();
    tr.t.iter().zip(&tr.z).map(|(t, z)| (z - exact(*t)).abs()).fold(0.0, f64::max)
}

#[test]
fn analytic_solutions_of_system_a() {
    assert!(max_error(0.0, 1e-3, |t| t * t) < 1e-8);
    assert!(max_error(1.0, 1e-3, |t| t * t + (-t).exp()) < 1e-8);
}

#[test]
fn rk4_error_drops_sixteenfold() {
    let exact = |t: f64| t * t + (-t).exp();
    let coarse = max_error(1.0, 0.1, exact);
    let fine = max_error(1.0, 0.05, exact);
    let ratio = coarse / fine;
    assert!((13.0..19.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn residual_sees_a_perturbation() {
    let sys = sys_a();
    let mut tr = simulate(&sys, &ex("t"), &ex("t^2"), 0.0, 0.0, 1.0, 1e-3).unwrap();
    assert!(residual_on_trajectory(&tr, &sys).unwrap() < 1e-9);
    for (t, z) in tr.t.iter().zip(tr.z.iter_mut()) {
        *z += 1e-3 * t;
    }
    // The residual of z + e t is e (1 + t) for this system.
    let r = residual_on_trajectory(&tr, &sys).unwrap();
    assert!((1.9e-3..2.1e-3).contains(&r), "{r}");
}

#[test]
fn constant_x_reduces_to_quadrature() {
    let sys = SystemDef::parse("lam^2", "y").unwrap();
    let tr = simulate(&sys, &ex("0"), &ex("t^2"), 0.5, 0.0, 1.0, 1e-2).unwrap();
    let err = tr.t.iter().zip(&tr.z).map(|(t, z)| (z - (0.5 + t.powi(3) / 3.0)).abs()).fold(0.0, f64::max);
    assert!(err < 1e-12, "{err}");
}

#[test]
fn simulate_rejects_bad_inputs() {
    assert!(matches!(simulate(&sys_a(), &ex("t*z"), &ex("t"), 0.0, 0.0, 1.0, 0.1), Err(Error::Unregistered(_))));
    assert!(matches!(simulate(&sys_a(), &ex("t"), &ex("t"), 0.0, 1.0, 0.0, 0.1), Err(Error::Precondition(_))));
    let boxed = sys_a().with_domain(monge_core::DomainBox::new().with("y", -1.0, 0.5));
    assert!(matches!(simulate(&boxed, &ex("t"), &ex("t^2"), 0.0, 0.0, 1.0, 0.1), Err(Error::Domain { .. })));
}

#[test]
fn csv_has_header_and_one_row_per_sample() {
    let tr = simulate(&sys_a(), &ex("t"), &ex("t^2"), 0.0, 0.0, 0.5, 0.1).unwrap();
    let csv = tr.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,x,y,z");
    assert_eq!(lines.len(), tr.len() + 1);
    assert_eq!(tr.len(), 6);
}

fn pts(var: &str, values: &[f64], rest: &[(&str, f64)]) -> Vec<HashMap<String, f64>> {
    values
        .iter()
        .map(|v| {
            let mut m: HashMap<String, f64> = rest.iter().map(|(k, x)| (k.to_string(), *x)).collect();
            m.insert(var.to_string(), *v);
            m
        })
        .collect()
}

#[test]
fn fd_check_agrees_on_smooth_expressions() {
    let rep = fd_check(&ex("lam^2"), "lam", &pts("lam", &[-1.0, 0.3, 2.0], &[])).unwrap();
    assert!(rep.ill_conditioned.is_empty());
    assert!(rep.max_relative_error < 1e-8, "{rep:?}");

    let g = ex("x*lam^3 + y*z*lam^2 - lam/(1 + x^2)");
    let s_closed = ex("-2*(3*x*lam + y*z)^2");
    for (e, var) in [(&g, "lam"), (&s_closed, "x"), (&s_closed, "lam")] {
        let rep = fd_check(e, var, &pts(var, &[0.2, 0.7, 1.1], &[("x", 0.4), ("y", -0.3), ("z", 0.9), ("lam", 0.5)]))
            .unwrap();
        assert!(rep.ill_conditioned.is_empty(), "{var}: {rep:?}");
        assert!(rep.max_relative_error < 1e-8, "{var}: {rep:?}");
    }
}

#[test]
fn fd_check_flags_sqrt_near_zero() {
    let rep = fd_check(&ex("sqrt(w)"), "w", &pts("w", &[1e-8, 1.0], &[])).unwrap();
    assert_eq!(rep.ill_conditioned, vec![0]);
    assert!(rep.max_relative_error < 1e-8);
}

#[test]
fn germ_images_solve_the_system() {
    let par = Parameterization::symbolic(
        1,
        2,
        ex("v0"),
        ex("(v1^2*u0 + u1)/(v2 + v1^3 - 1)"),
        ex("((1 - v2)*u0 + v1*u1)/(v2 + v1^3 - 1)"),
    )
    .unwrap();
    let sys = sys_a();
    let cfg = GermConfig {
        center: [("u0", 0.5), ("u1", 0.7), ("v0", 0.3), ("v1", 1.0), ("v2", 1.0)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect(),
        ..GermConfig::default()
    };
    let ev = par.evaluator().unwrap();
    let probe = ResidualProbe::new(&sys).unwrap();
    let germs = sample_germs(&par, &sys, &cfg, DEFAULT_SEED);
    assert_eq!(germs.len(), cfg.count);
    for g in &germs {
        let r = probe.along(&ev, &par, g, &cfg).unwrap();
        assert!(r < 1e-7, "{r}");
        let p = image_at(&ev, &par, g, 0.0).unwrap();
        assert!((p[0] - g.v.value(0.0)).abs() < 1e-15);
    }
}
