use std::collections::{BTreeMap, HashMap};

use num_rational::BigRational;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::parameterization::{ParamKind, Parameterization};
use super::report::VerificationReport;
use super::verify::{image_at, sample_germs, GermConfig};
use crate::error::{Error, Result};
use crate::jets::total_derivative;
use crate::numeric::{fornberg_weights, Germ};
use crate::oracle::simulate;
use crate::pde::RegularityReport;
use crate::symcore::{rng_for, sub_seed, substitute_pairs, Compiled, Expr};
use crate::system::SystemDef;

/// Candidate flat output `(u, v) = (a, b)` in the jets of `x, y` up to
/// `order` and of `z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatOutput {
    pub a: Expr,
    pub b: Expr,
    pub order: usize,
}

fn jet_var(base: &str, i: usize) -> String {
    if i == 0 {
        base.to_string()
    } else {
        format!("{base}{i}")
    }
}

impl FlatOutput {
    fn check_variables(&self) -> Result<()> {
        let allowed: Vec<String> = ["x", "y"]
            .iter()
            .flat_map(|b| (0..=self.order).map(move |i| jet_var(b, i)))
            .chain(std::iter::once("z".to_string()))
            .collect();
        for e in [&self.a, &self.b] {
            if let Some(v) = e.variables().into_iter().find(|v| !allowed.contains(v)) {
                return Err(Error::Precondition(format!("flat output uses `{v}` beyond its declared order")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlatConfig {
    /// Input germs for the direction inputs -> solution -> inputs.
    pub germs: GermConfig,
    /// Number of simulated solution germs.
    pub solutions: usize,
    /// Jet values of `x, y, z` at `t = 0` by name (`x`, `x1`, `y2`, ...).
    pub center: BTreeMap<String, f64>,
    pub spread: f64,
    pub t_end: f64,
    pub dt: f64,
    /// Step of the finite-difference stencil on input germs.
    pub stencil_step: f64,
    pub threshold: f64,
}

impl Default for FlatConfig {
    fn default() -> Self {
        FlatConfig {
            germs: GermConfig::default(),
            solutions: 5,
            center: BTreeMap::new(),
            spread: 0.1,
            t_end: 0.05,
            dt: 1e-3,
            stencil_step: 1e-2,
            threshold: 1e-6,
        }
    }
}

fn float_expr(v: f64) -> Expr {
    Expr::constant(BigRational::from_float(v).expect("finite coefficient"))
}

fn poly_in_t(g: &Germ<f64>) -> Expr {
    let t = Expr::var("t");
    Expr::sum(
        g.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| Expr::product(vec![float_expr(*c), Expr::pow(t.clone(), i as i64)]))
            .collect(),
    )
}

/// `D^i e` for `i = 0..=n` along solutions, with `z'` eliminated.
fn prolonged(e: &Expr, n: usize, z_rule: &HashMap<String, Expr>) -> Vec<Expr> {
    let mut out = vec![e.clone()];
    for _ in 0..n {
        let next = total_derivative(out.last().unwrap(), z_rule);
        out.push(next);
    }
    out
}

fn start_value(name: &str, par: &Parameterization, sys: &SystemDef, cfg: &FlatConfig) -> f64 {
    if let Some(v) = cfg.center.get(name) {
        return *v;
    }
    if let ParamKind::ImplicitInverse { base_point, .. } | ParamKind::Implicit { base_point, .. } = &par.kind {
        if let Some(v) = base_point.get(name) {
            return *v;
        }
    }
    let (lo, hi) = sys.domain.range(name);
    0.5 * (lo + hi)
}

/// Round trips between solutions and input jets.
///
/// From solutions: simulated solutions give `(u, v)` jets through `(a, b)`
/// and the parameterization must return the solution. From inputs: input
/// germs are mapped to solutions and `(a, b)` must return the inputs.
pub fn verify_flat_output(
    par: &Parameterization,
    fo: &FlatOutput,
    sys: &SystemDef,
    cfg: &FlatConfig,
    seed: u64,
) -> Result<VerificationReport> {
    fo.check_variables()?;
    if fo.order > par.depth() {
        return Err(Error::Precondition(format!(
            "flat output order {} exceeds the parameterization jet depth {}",
            fo.order,
            par.depth()
        )));
    }
    let ev = par.evaluator()?;
    let (k, l) = (par.k, par.l);
    let mut rep = VerificationReport::default();

    let lam = Expr::sub(Expr::var("y1"), Expr::product(vec![Expr::var("z"), Expr::var("x1")]));
    let z_dot = Expr::sum(vec![
        substitute_pairs(&sys.h, &[("lam", lam.clone())]),
        Expr::product(vec![substitute_pairs(&sys.g, &[("lam", lam)]), Expr::var("x1")]),
    ]);
    let rule: HashMap<String, Expr> = [("z".to_string(), z_dot)].into_iter().collect();
    let u_exprs = prolonged(&fo.a, k, &rule);
    let v_exprs = prolonged(&fo.b, l, &rule);
    let depth = fo.order + k.max(l);
    let names: Vec<String> =
        (0..=depth).flat_map(|i| [jet_var("x", i), jet_var("y", i)]).chain(std::iter::once("z".to_string())).collect();
    let compile = |v: &[Expr]| v.iter().map(|e| Compiled::new(e, &names)).collect::<Result<Vec<_>>>();
    let (uc, vc) = (compile(&u_exprs)?, compile(&v_exprs)?);

    let mut rng = rng_for(sub_seed(seed, 1));
    let mut worst: f64 = 0.0;
    let (mut used, mut skipped) = (0, 0);
    for _ in 0..cfg.solutions {
        let jet = |b: &str, rng: &mut rand_chacha::ChaCha8Rng| -> Germ<f64> {
            let vals: Vec<f64> = (0..=depth + 1)
                .map(|i| {
                    let c = if i <= depth { start_value(&jet_var(b, i), par, sys, cfg) } else { 0.0 };
                    c + cfg.spread * rng.gen_range(-1.0..=1.0)
                })
                .collect();
            Germ::from_jet(&vals)
        };
        let (xg, yg) = (jet("x", &mut rng), jet("y", &mut rng));
        let z0 = start_value("z", par, sys, cfg) + cfg.spread * rng.gen_range(-1.0..=1.0);
        let Ok(traj) = simulate(sys, &poly_in_t(&xg), &poly_in_t(&yg), z0, 0.0, cfg.t_end, cfg.dt) else {
            skipped += 1;
            continue;
        };
        let mut germ_worst: Option<f64> = Some(0.0);
        for idx in [0, traj.len() / 2, traj.len() - 1] {
            let t = traj.t[idx];
            let mut vals: Vec<f64> = (0..=depth).flat_map(|i| [xg.derivative(i, t), yg.derivative(i, t)]).collect();
            vals.push(traj.z[idx]);
            let u: Option<Vec<f64>> = uc.iter().map(|c| c.eval(&vals)).collect();
            let v: Option<Vec<f64>> = vc.iter().map(|c| c.eval(&vals)).collect();
            let got = match (u, v) {
                (Some(u), Some(v)) => ev.eval(&u, &v).ok(),
                _ => None,
            };
            germ_worst = match (germ_worst, got) {
                (Some(w), Some(p)) => {
                    let e = [p[0] - traj.x[idx], p[1] - traj.y[idx], p[2] - traj.z[idx]];
                    Some(e.iter().fold(w, |m, d| m.max(d.abs())))
                }
                _ => None,
            };
        }
        match germ_worst {
            Some(w) if w.is_finite() => {
                used += 1;
                worst = worst.max(w);
            }
            _ => skipped += 1,
        }
    }
    rep.value(
        "from_solutions",
        used > 0 && worst < cfg.threshold,
        worst,
        format!("{used} solutions used, {skipped} skipped"),
    );

    let m = fo.order + 3;
    let nodes: Vec<f64> = (-(m as i64)..=m as i64).map(|i| i as f64 * cfg.stencil_step).collect();
    let weights = fornberg_weights(0.0, &nodes, fo.order);
    let flat_names: Vec<String> = (0..=fo.order)
        .flat_map(|i| [jet_var("x", i), jet_var("y", i)])
        .chain(std::iter::once("z".to_string()))
        .collect();
    let (ac, bc) = (Compiled::new(&fo.a, &flat_names)?, Compiled::new(&fo.b, &flat_names)?);
    let mut worst: f64 = 0.0;
    let (mut used, mut skipped) = (0, 0);
    for germs in sample_germs(par, sys, &cfg.germs, sub_seed(seed, 2)) {
        let samples: Option<Vec<[f64; 3]>> = nodes.iter().map(|&t| image_at(&ev, par, &germs, t).ok()).collect();
        let Some(samples) = samples else {
            skipped += 1;
            continue;
        };
        let deriv = |c: usize, i: usize| -> f64 { weights[i].iter().zip(&samples).map(|(w, s)| w * s[c]).sum() };
        let mut vals: Vec<f64> = (0..=fo.order).flat_map(|i| [deriv(0, i), deriv(1, i)]).collect();
        vals.push(samples[m][2]);
        match (ac.eval(&vals), bc.eval(&vals)) {
            (Some(a), Some(b)) if a.is_finite() && b.is_finite() => {
                used += 1;
                worst = worst.max((a - germs.u.value(0.0)).abs()).max((b - germs.v.value(0.0)).abs());
            }
            _ => skipped += 1,
        }
    }
    rep.value(
        "from_inputs",
        used > 0 && worst < cfg.threshold,
        worst,
        format!("{used} input germs used, {skipped} skipped"),
    );
    Ok(rep)
}

/// A parameterization generated by `p` is a candidate for admitting a flat
/// output exactly when `p` is `(k + l - 2)`-regular.
pub fn endogenous_candidate(report: &RegularityReport) -> bool {
    report.k_regular() == Some(report.k + report.l - 2)
}
