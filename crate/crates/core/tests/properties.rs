use std::collections::HashMap;

use monge_core::forms::{closed_st, decompose, exterior_derivative, structure_forms, wedge, DifferentialForm};
use monge_core::jets::{apply_d, apply_e, apply_f, u_name, v_name, JetContext};
use monge_core::numeric::richardson;
use monge_core::pde::{check_candidate, generate_pde, supply_gamma};
use monge_core::symcore::{diff, ex, normalize, parse, Compiled, DomainBox, Expr};
use monge_core::system::SystemDef;
use monge_core::DEFAULT_SEED;
use proptest::prelude::*;

/// A polynomial with small integer coefficients, as source text.
fn poly(vars: &'static [&'static str], max_terms: usize, max_deg: u32) -> impl Strategy<Value = String> {
    let term = (-4i64..=4, prop::collection::vec(0..=max_deg, vars.len()));
    prop::collection::vec(term, 1..=max_terms).prop_map(move |terms| {
        let mut parts = vec!["0".to_string()];
        for (c, exps) in terms {
            let mut t = format!("({c})");
            for (v, e) in vars.iter().zip(exps) {
                if e > 0 {
                    t += &format!("*{v}^{e}");
                }
            }
            parts.push(t);
        }
        parts.join(" + ")
    })
}

fn rational() -> impl Strategy<Value = String> {
    (-9i64..=9, 1i64..=5).prop_map(|(n, d)| format!("({n}/{d})"))
}

const XYZL: &[&str] = &["x", "y", "z", "lam"];

fn one_form() -> impl Strategy<Value = DifferentialForm> {
    prop::array::uniform4(poly(XYZL, 3, 2)).prop_map(|cs| DifferentialForm::one_form(cs.map(|c| ex(&c))))
}

fn smooth_expr() -> impl Strategy<Value = Expr> {
    (poly(&["x", "y"], 3, 2), poly(&["x", "y"], 2, 1), 0usize..4).prop_map(|(p, q, f)| {
        let text = match f {
            0 => p,
            1 => format!("({p})*exp({q})"),
            2 => format!("sin({q})*({p}) + cos(x*y)"),
            _ => format!("({p})/(2 + x^2 + y^2) + sqrt(3 + x^2)"),
        };
        ex(&text)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn mixed_partials_commute(e in smooth_expr()) {
        let xy = diff(&diff(&e, "x"), "y");
        let yx = diff(&diff(&e, "y"), "x");
        prop_assert!(normalize(&Expr::sub(xy, yx)).is_zero());
    }

    #[test]
    fn normalize_is_idempotent_and_printing_round_trips(p in poly(&["x", "y", "z"], 4, 3), q in poly(&["x", "y"], 2, 2)) {
        let e = ex(&format!("({p})/(1 + ({q})^2)"));
        let n = normalize(&e);
        prop_assert_eq!(normalize(&n), n.clone());
        let back = parse(&e.to_string()).unwrap();
        prop_assert!(normalize(&Expr::sub(back, e)).is_zero());
    }

    #[test]
    fn d_squared_vanishes(a in one_form(), f in poly(XYZL, 4, 3)) {
        let dda = exterior_derivative(&exterior_derivative(&a).unwrap()).unwrap();
        prop_assert!(dda.normalized().is_literally_zero());
        let f = DifferentialForm::function(ex(&f));
        let ddf = exterior_derivative(&exterior_derivative(&f).unwrap()).unwrap();
        prop_assert!(ddf.normalized().is_literally_zero());
    }

    #[test]
    fn wedge_is_graded_antisymmetric(a in one_form(), b in one_form(), c in one_form()) {
        let ab = wedge(&a, &b).unwrap();
        let ba = wedge(&b, &a).unwrap();
        prop_assert!(ab.add(&ba).normalized().is_literally_zero());
        prop_assert!(wedge(&a, &a).unwrap().normalized().is_literally_zero());
        // A 2-form commutes with a 1-form.
        let abc = wedge(&ab, &c).unwrap();
        let cab = wedge(&c, &ab).unwrap();
        prop_assert!(abc.sub(&cab).normalized().is_literally_zero());
    }
}

/// Random jet expression in the variables of a `(2, 3)` context plus `x1`.
const JETS: &[&str] = &["u0", "u1", "x", "v0", "v1", "v2", "x1"];

fn directional(e: &Expr, names: &[String], at: &[f64], dir: &[f64]) -> f64 {
    let c = Compiled::new(e, names).unwrap();
    let f = |s: f64| {
        let p: Vec<f64> = at.iter().zip(dir).map(|(a, d)| a + s * d).collect();
        c.eval(&p)
    };
    richardson(f, 0.0, 1e-3).unwrap()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-6 * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn jet_operators_are_directional_derivatives(
        e in poly(JETS, 4, 2),
        sigma in poly(&["u0", "x", "v1"], 2, 1),
        tau in poly(&["u1", "v0", "x1"], 2, 1),
        point in prop::collection::vec(-1.0f64..1.0, 9),
    ) {
        let (e, sigma, tau) = (ex(&e), ex(&sigma), ex(&tau));
        let mut ctx = JetContext::new(2, 3);
        let names: Vec<String> = ["u0", "u1", "x", "v0", "v1", "v2", "x1", "x2"].iter().map(|s| s.to_string()).collect();
        let at = &point[..8];
        let val = |name: &str| at[names.iter().position(|n| n == name).unwrap()];
        let env: HashMap<String, f64> = names.iter().cloned().zip(at.iter().copied()).collect();
        let ev = |x: &Expr| monge_core::symcore::eval(x, &env).unwrap();

        // F moves u0 -> u1, v0 -> v1, v1 -> v2.
        let f_dir: Vec<f64> = names.iter().map(|n| match n.as_str() {
            "u0" => val("u1"), "v0" => val("v1"), "v1" => val("v2"), _ => 0.0,
        }).collect();
        prop_assert!(close(ev(&apply_f(&e, &ctx)), directional(&e, &names, at, &f_dir)));

        let e_dir: Vec<f64> = names.iter().map(|n| match n.as_str() {
            "u1" => ev(&sigma), "v2" => 1.0, _ => 0.0,
        }).collect();
        prop_assert!(close(ev(&apply_e(&e, &ctx, &sigma).unwrap()), directional(&e, &names, at, &e_dir)));

        let mut d_dir = f_dir.clone();
        d_dir[1] = ev(&tau);
        d_dir[2] = val("x1");
        d_dir[6] = val("x2");
        prop_assert!(close(ev(&apply_d(&e, &mut ctx, &tau).unwrap()), directional(&e, &names, at, &d_dir)));
        prop_assert!(ctx.x_depth <= 2);
    }
}

/// `g = (lam - s) / q`, `h = 0` with `q > 0` on the default box, so that
/// `γ = q w + s` and `δ = 0`.
fn invertible_fixture() -> impl Strategy<Value = (SystemDef, Expr)> {
    (poly(&["x", "y", "z"], 3, 2), 1i64..=4, poly(&["y", "z"], 1, 1)).prop_map(|(s, q0, q1)| {
        let q = format!("({q0} + ({q1})^2)");
        let sys = SystemDef::parse(&format!("(lam - ({s}))/{q}"), "0").unwrap();
        (sys, ex(&format!("{q}*w + ({s})")))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn passing_candidates_satisfy_the_solution_identity(
        (sys, gamma) in invertible_fixture(),
        k in 1usize..=3,
        extra in 0usize..=2,
        f in poly(&["x"], 3, 4),
        a in prop::collection::vec(1i64..=3, 3),
        b in prop::collection::vec(1i64..=3, 5),
        break_b in prop::bool::weighted(0.25),
    ) {
        let l = k + extra;
        let gd = supply_gamma(&sys, gamma, DEFAULT_SEED).unwrap();
        let pde = generate_pde(&gd, k, l).unwrap();
        let mut p = vec![f];
        p.extend((0..k).map(|i| format!("{}*{}", a[i], u_name(i))));
        p.extend((0..l).map(|j| format!("{}*{}", b[j], v_name(j))));
        if break_b {
            p.push(format!("x*{}", u_name(k - 1)));
        }
        let p = ex(&p.join(" + "));
        let rep = check_candidate(&p, &pde, &DomainBox::default(), DEFAULT_SEED).unwrap();
        prop_assert_eq!(rep.equations_hold(), !break_b);
        if rep.equations_hold() {
            prop_assert!(rep.solution_identity.as_ref().unwrap().is_zero(), "{:?}", rep.solution_identity);
        }
    }
}

fn random_system() -> impl Strategy<Value = SystemDef> {
    let coeff = || (rational(), rational(), prop::sample::select(vec!["1", "x", "y", "z", "x*z", "y^2"]));
    (
        prop::collection::vec(coeff(), 1..=4),
        prop::collection::vec(coeff(), 0..=5),
        rational(),
        prop::sample::select(vec!["1", "x", "y*z"]),
    )
        .prop_map(|(gc, hc, lead, mono)| {
            let term = |i: usize, (r, s, m): &(String, String, &str)| format!("({r} + {s}*{m})*lam^{i}");
            let lead = if lead.starts_with("(0/") { "(1/1)".to_string() } else { lead };
            let mut g: Vec<String> = vec![format!("{lead}*{mono}*lam")];
            g.extend(gc.iter().enumerate().map(|(i, c)| term(i + 1, c)));
            let h: Vec<String> =
                std::iter::once("0".to_string()).chain(hc.iter().enumerate().map(|(i, c)| term(i, c))).collect();
            SystemDef::parse(&g.join(" + "), &h.join(" + ")).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn decomposition_matches_closed_forms(sys in random_system()) {
        prop_assume!(sys.check_g4(DEFAULT_SEED).is_ok());
        let sf = structure_forms(&sys, DEFAULT_SEED).unwrap();
        let ([c1, c2, c3], target) = decompose(&sf, &sys.domain, DEFAULT_SEED).unwrap();
        let s = Expr::product(vec![Expr::int(-2), sys.g_lam(1), c1.clone()]);
        let t = Expr::product(vec![Expr::int(-2), c2.clone()]);
        let (s_closed, t_closed) = closed_st(&sys);
        prop_assert!(normalize(&Expr::sub(s, s_closed)).is_zero());
        prop_assert!(normalize(&Expr::sub(t, t_closed)).is_zero());

        let dlam = DifferentialForm::basis(3);
        let recon = [
            (&c1, wedge(&wedge(&dlam, &sf.eta).unwrap(), &sf.omega).unwrap()),
            (&c2, wedge(&wedge(&dlam, &sf.omega1).unwrap(), &sf.omega).unwrap()),
            (&c3, wedge(&wedge(&sf.omega1, &sf.eta).unwrap(), &sf.omega).unwrap()),
        ]
        .iter()
        .fold(DifferentialForm::zero(3), |acc, (c, f)| acc.add(&f.scale(c)));
        prop_assert!(target.sub(&recon).normalized().is_literally_zero());
    }
}
