use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::{u_name, v_name};
use crate::numeric::{newton_1d, newton_2d, NewtonSettings};
use crate::pde::{check_candidate, sigma_tau, Partials, PdeSystem};
use crate::symcore::{diff, eval, normalize, Compiled, DomainBox, Expr};

/// How `(x, y, z)` are obtained from the jets of `u` and `v`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParamKind {
    /// Closed forms in `u0..uk, v0..vl`.
    Symbolic { phi: Expr, psi: Expr, chi: Expr },
    /// `x` solves `τ(.., x, ..) = u{k} - σ v{l}`; then `y = p`, `z = p_x`.
    Implicit {
        p: Expr,
        sigma: Expr,
        tau: Expr,
        base_point: BTreeMap<String, f64>,
        #[serde(default)]
        newton: NewtonSettings,
    },
    /// Order `(1, 2)`: `x = v0` and `(y, z)` invert
    /// `(y, z) -> (h, h')` at `(x, x1, x2) = (v0, v1, v2)`.
    ImplicitInverse {
        h: Expr,
        hdot: Expr,
        base_point: BTreeMap<String, f64>,
        #[serde(default)]
        newton: NewtonSettings,
    },
}

/// A candidate parameterization of order `(k, l)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Parameterization {
    pub k: usize,
    #[serde(rename = "ℓ", alias = "l")]
    pub l: usize,
    /// Jet depth at which the checks of this parameterization were run;
    /// `max(k, l)` when absent.
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(flatten)]
    pub kind: ParamKind,
}

impl Parameterization {
    pub fn symbolic(k: usize, l: usize, phi: Expr, psi: Expr, chi: Expr) -> Result<Parameterization> {
        let allowed: Vec<String> = (0..=k).map(u_name).chain((0..=l).map(v_name)).collect();
        for e in [&phi, &psi, &chi] {
            if let Some(v) = e.variables().into_iter().find(|v| !allowed.contains(v)) {
                return Err(Error::Unregistered(v));
            }
        }
        Ok(Parameterization { k, l, depth: Some(k.max(l)), kind: ParamKind::Symbolic { phi, psi, chi } })
    }

    pub fn depth(&self) -> usize {
        self.depth.unwrap_or(self.k.max(self.l))
    }

    /// Names `u0..uk` then `v0..vl`.
    pub fn jet_names(&self) -> Vec<String> {
        (0..=self.k).map(u_name).chain((0..=self.l).map(v_name)).collect()
    }

    /// The `(u, v)` jet of the base point, when the kind has one.
    pub fn base_jet(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        let bp = match &self.kind {
            ParamKind::Symbolic { .. } => return None,
            ParamKind::Implicit { base_point, .. } | ParamKind::ImplicitInverse { base_point, .. } => base_point,
        };
        let u = (0..=self.k).map(|i| bp.get(&u_name(i)).copied()).collect::<Option<Vec<_>>>()?;
        let v = (0..=self.l).map(|i| bp.get(&v_name(i)).copied()).collect::<Option<Vec<_>>>()?;
        Some((u, v))
    }

    pub fn evaluator(&self) -> Result<Evaluator> {
        Evaluator::new(self)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("parameterizations serialize")
    }
}

enum Eval {
    Symbolic([Compiled; 3]),
    Implicit {
        tau: Compiled,
        tau_x: Compiled,
        sigma: Compiled,
        p: Compiled,
        px: Compiled,
        x0: f64,
        newton: NewtonSettings,
    },
    Inverse {
        h: Compiled,
        hdot: Compiled,
        y0: f64,
        z0: f64,
        newton: NewtonSettings,
    },
}

/// Compiled form of a [`Parameterization`] for repeated evaluation.
pub struct Evaluator {
    k: usize,
    l: usize,
    inner: Eval,
}

fn base_names(k: usize, l: usize) -> Vec<String> {
    let mut v: Vec<String> = (0..k).map(u_name).collect();
    v.push("x".into());
    v.extend((0..l).map(v_name));
    v
}

impl Evaluator {
    fn new(par: &Parameterization) -> Result<Evaluator> {
        let (k, l) = (par.k, par.l);
        let inner = match &par.kind {
            ParamKind::Symbolic { phi, psi, chi } => {
                let names = par.jet_names();
                Eval::Symbolic([Compiled::new(phi, &names)?, Compiled::new(psi, &names)?, Compiled::new(chi, &names)?])
            }
            ParamKind::Implicit { p, sigma, tau, base_point, newton } => {
                let names = base_names(k, l);
                let x0 = *base_point.get("x").ok_or_else(|| Error::Unbound("x".into()))?;
                Eval::Implicit {
                    tau: Compiled::new(tau, &names)?,
                    tau_x: Compiled::new(&normalize(&diff(tau, "x")), &names)?,
                    sigma: Compiled::new(sigma, &names)?,
                    p: Compiled::new(p, &names)?,
                    px: Compiled::new(&normalize(&diff(p, "x")), &names)?,
                    x0,
                    newton: *newton,
                }
            }
            ParamKind::ImplicitInverse { h, hdot, base_point, newton } => {
                let names: Vec<String> = ["x", "y", "z", "x1", "x2"].iter().map(|s| s.to_string()).collect();
                let get = |n: &str| base_point.get(n).copied().ok_or_else(|| Error::Unbound(n.into()));
                Eval::Inverse {
                    h: Compiled::new(h, &names)?,
                    hdot: Compiled::new(hdot, &names)?,
                    y0: get("y")?,
                    z0: get("z")?,
                    newton: *newton,
                }
            }
        };
        Ok(Evaluator { k, l, inner })
    }

    /// `(x, y, z)` at the jets `u = (u0..uk)`, `v = (v0..vl)`.
    pub fn eval(&self, u: &[f64], v: &[f64]) -> Result<[f64; 3]> {
        if u.len() != self.k + 1 || v.len() != self.l + 1 {
            return Err(Error::Precondition(format!(
                "expected {} u-jets and {} v-jets, got {} and {}",
                self.k + 1,
                self.l + 1,
                u.len(),
                v.len()
            )));
        }
        let undefined = || Error::Numeric("parameterization undefined at this jet".into());
        match &self.inner {
            Eval::Symbolic(c) => {
                let vals: Vec<f64> = u.iter().chain(v).copied().collect();
                let mut out = [0.0; 3];
                for (o, f) in out.iter_mut().zip(c) {
                    *o = f.eval(&vals).ok_or_else(undefined)?;
                }
                Ok(out)
            }
            Eval::Implicit { tau, tau_x, sigma, p, px, x0, newton } => {
                let (k, l) = (self.k, self.l);
                let args = |x: f64| -> Vec<f64> {
                    let mut a = u[..k].to_vec();
                    a.push(x);
                    a.extend_from_slice(&v[..l]);
                    a
                };
                let s = sigma.eval(&args(*x0)).ok_or_else(undefined)?;
                let target = u[k] - s * v[l];
                let f = |x: f64| tau.eval(&args(x)).map(|t| t - target);
                let df = |x: f64| tau_x.eval(&args(x));
                let (x, _) = newton_1d(f, df, *x0, *newton)?;
                let a = args(x);
                Ok([x, p.eval(&a).ok_or_else(undefined)?, px.eval(&a).ok_or_else(undefined)?])
            }
            Eval::Inverse { h, hdot, y0, z0, newton } => {
                let (x, x1, x2) = (v[0], v[1], v[2]);
                let f = |yz: [f64; 2]| -> Option<[f64; 2]> {
                    let a = [x, yz[0], yz[1], x1, x2];
                    Some([h.eval(&a)? - u[0], hdot.eval(&a)? - u[1]])
                };
                let (yz, _) = newton_2d(f, [*y0, *z0], *newton)?;
                Ok([x, yz[0], yz[1]])
            }
        }
    }

    /// Residual `τ(.., x, ..) - u{k} + σ v{l}` after solving, for the
    /// implicit kind; `None` otherwise.
    pub fn implicit_residual(&self, u: &[f64], v: &[f64]) -> Result<Option<f64>> {
        let Eval::Implicit { tau, sigma, .. } = &self.inner else { return Ok(None) };
        let [x, _, _] = self.eval(u, v)?;
        let (k, l) = (self.k, self.l);
        let mut a = u[..k].to_vec();
        a.push(x);
        a.extend_from_slice(&v[..l]);
        let undefined = || Error::Numeric("τ or σ undefined".into());
        let t = tau.eval(&a).ok_or_else(undefined)?;
        let s = sigma.eval(&a).ok_or_else(undefined)?;
        Ok(Some(t - u[k] + s * v[l]))
    }
}

/// Threshold below which an inequation counts as vanishing at a point.
pub const POINT_TOL: f64 = 1e-12;

/// Builds the implicit parameterization of a solution `p` at `point`, a map
/// over `u0..u{k-1}, x, v0..v{l-1}`. The top jets are chosen with
/// `v{l} = 0` and `u{k} = τ(point)`.
pub fn build_from_solution(
    p: &Expr,
    pde: &PdeSystem,
    point: &BTreeMap<String, f64>,
    domain: &DomainBox,
    seed: u64,
) -> Result<Parameterization> {
    let (k, l) = (pde.k(), pde.l());
    let report = check_candidate(p, pde, domain, seed)?;
    if !report.equations_hold() {
        return Err(Error::Precondition("equations (a), (b) do not hold for this p".into()));
    }
    let parts = Partials::new(p, &pde.ctx)?;
    let pt: std::collections::HashMap<String, f64> = point.iter().map(|(a, b)| (a.clone(), *b)).collect();
    for (tag, e) in [("c", &pde.ineq_c), ("d", &pde.ineq_d), ("e", &pde.ineq_e)] {
        let val = eval(&parts.instantiate(e), &pt)?;
        if val.abs() <= POINT_TOL {
            return Err(Error::Precondition(format!("inequation ({tag}) vanishes at the point")));
        }
    }
    let cand = sigma_tau(p, pde, domain, seed)?;
    let (Some(sigma), Some(tau)) = (cand.sigma, cand.tau) else {
        return Err(Error::Precondition("p_u vanishes identically".into()));
    };
    let tau_x = eval(&diff(&tau, "x"), &pt)?;
    if tau_x.abs() <= POINT_TOL {
        return Err(Error::Precondition("τ_x vanishes at the point".into()));
    }
    let mut base = point.clone();
    base.insert(u_name(k), eval(&tau, &pt)?);
    base.insert(v_name(l), 0.0);
    let par = Parameterization {
        k,
        l,
        depth: Some(k.max(l)),
        kind: ParamKind::Implicit { p: p.clone(), sigma, tau, base_point: base, newton: NewtonSettings::default() },
    };
    let (u, v) = par.base_jet().expect("base point is complete");
    let ev = par.evaluator()?;
    let [x, _, _] = ev.eval(&u, &v)?;
    let res = ev.implicit_residual(&u, &v)?.unwrap_or(0.0);
    if (x - point["x"]).abs() > 1e-9 || res.abs() > 1e-10 {
        return Err(Error::Verification(format!("base point not reproduced: x = {x}, residual {res:e}")));
    }
    Ok(par)
}
