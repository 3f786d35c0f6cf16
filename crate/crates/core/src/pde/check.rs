use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::system::{at_p, PdeSystem};
use crate::error::{Error, Result};
use crate::jets::{apply_d, apply_e, apply_f, expand_in_xchain, monomial_label, u_name, JetContext};
use crate::numeric::rank;
use crate::symcore::{diff, eval, is_zero, normalize, sub_seed, substitute_pairs, DomainBox, Expr, ZeroVerdict};

/// A candidate `p` with the derived `σ = -p_v / p_u` and
/// `τ = (-F p + γ(x, p, p_x, p_xx)) / p_u`.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateSolution {
    pub p: Expr,
    pub sigma: Option<Expr>,
    pub tau: Option<Expr>,
}

/// Outcome of `E D^i p = 0` for one `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status")]
pub enum EdipStatus {
    AllCoefficientsZero { i: usize },
    NonzeroCoefficient { i: usize, monomial: String, coefficient: String },
}

impl EdipStatus {
    pub fn is_zero(&self) -> bool {
        matches!(self, EdipStatus::AllCoefficientsZero { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Regularity {
    /// Smallest `K` with `E D^K p` not identically zero.
    Regular {
        k_regular: usize,
    },
    NotRegular {
        reason: String,
    },
}

/// Numeric rank screens for relations `p_x = α(x, p)` and
/// `p_xx = α(x, p, p_x)`. Advisory only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DependenceScreens {
    pub px_function_of_x_p: bool,
    pub pxx_function_of_x_p_px: bool,
    pub samples: usize,
}

/// Equations, inequations, derived identities and regularity of a
/// candidate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub k: usize,
    #[serde(rename = "ℓ", alias = "l")]
    pub l: usize,
    pub eq_a: ZeroVerdict,
    pub eq_b: ZeroVerdict,
    pub ineq_c: ZeroVerdict,
    pub ineq_d: ZeroVerdict,
    pub ineq_e: ZeroVerdict,
    pub sigma: Option<String>,
    pub tau: Option<String>,
    pub ep: Option<ZeroVerdict>,
    pub sigma_x: Option<ZeroVerdict>,
    pub solution_identity: Option<ZeroVerdict>,
    pub edip: Vec<EdipStatus>,
    pub regularity: Option<Regularity>,
    pub det2: Option<ZeroVerdict>,
    pub screens: Option<DependenceScreens>,
}

impl RegularityReport {
    pub fn equations_hold(&self) -> bool {
        self.eq_a.is_zero() && self.eq_b.is_zero()
    }

    pub fn inequations_hold(&self) -> bool {
        self.ineq_c.is_nonzero() && self.ineq_d.is_nonzero() && self.ineq_e.is_nonzero()
    }

    /// The identities implied by the equations, where they were checked.
    pub fn identities_hold(&self) -> bool {
        [&self.ep, &self.sigma_x, &self.solution_identity].iter().all(|v| v.as_ref().is_none_or(|v| v.is_zero()))
    }

    pub fn k_regular(&self) -> Option<usize> {
        match self.regularity {
            Some(Regularity::Regular { k_regular }) => Some(k_regular),
            _ => None,
        }
    }
}

/// Partial derivatives of `p` named as in the placeholders.
pub struct Partials {
    pub map: HashMap<&'static str, Expr>,
}

impl Partials {
    pub fn new(p: &Expr, ctx: &JetContext) -> Result<Partials> {
        let (ut, vt) = (ctx.u_top()?, ctx.v_top()?);
        let px = normalize(&diff(p, "x"));
        let pxx = normalize(&diff(&px, "x"));
        let mut map = HashMap::new();
        map.insert("p", p.clone());
        map.insert("p_xxx", normalize(&diff(&pxx, "x")));
        map.insert("p_u", normalize(&diff(p, &ut)));
        map.insert("p_v", normalize(&diff(p, &vt)));
        map.insert("p_xu", normalize(&diff(&px, &ut)));
        map.insert("p_xv", normalize(&diff(&px, &vt)));
        map.insert("Fp", apply_f(p, ctx));
        map.insert("Fp_x", apply_f(&px, ctx));
        map.insert("p_x", px);
        map.insert("p_xx", pxx);
        Ok(Partials { map })
    }

    pub fn get(&self, name: &str) -> &Expr {
        &self.map[name]
    }

    /// Replaces every placeholder of `e` by the actual derivative.
    pub fn instantiate(&self, e: &Expr) -> Expr {
        let pairs: Vec<(&str, Expr)> = self.map.iter().map(|(k, v)| (*k, v.clone())).collect();
        substitute_pairs(e, &pairs)
    }
}

fn check_variables(p: &Expr, ctx: &JetContext) -> Result<()> {
    let allowed = ctx.base_variables();
    for v in p.variables() {
        if !allowed.contains(&v) {
            return Err(Error::Unregistered(v));
        }
    }
    Ok(())
}

/// `σ` and `τ` of a candidate; `None` when `p_u` vanishes identically.
pub fn sigma_tau(p: &Expr, pde: &PdeSystem, domain: &DomainBox, seed: u64) -> Result<CandidateSolution> {
    let parts = Partials::new(p, &pde.ctx)?;
    let pu = parts.get("p_u").clone();
    if is_zero(&pu, domain, seed)?.is_zero() {
        return Ok(CandidateSolution { p: p.clone(), sigma: None, tau: None });
    }
    let sigma = normalize(&Expr::neg(Expr::quot(parts.get("p_v").clone(), pu.clone())));
    let gamma = parts.instantiate(&at_p(&pde.gamma_delta.gamma));
    let tau = normalize(&Expr::quot(Expr::sub(gamma, parts.get("Fp").clone()), pu));
    Ok(CandidateSolution { p: p.clone(), sigma: Some(sigma), tau: Some(tau) })
}

/// Substitutes `p` into the two equations and three inequations, derives
/// `σ`, `τ` and checks `E p = 0`, `σ_x = 0` and, when `(g, h)` is known,
/// `D p_x = h(x, p, p_x, D p - p_x x1) + g(...) x1`.
pub fn check_candidate(p: &Expr, pde: &PdeSystem, domain: &DomainBox, seed: u64) -> Result<RegularityReport> {
    check_variables(p, &pde.ctx)?;
    let parts = Partials::new(p, &pde.ctx)?;
    let test = |e: &Expr, n: u64| is_zero(&parts.instantiate(e), domain, sub_seed(seed, n));
    let mut report = RegularityReport {
        k: pde.k(),
        l: pde.l(),
        eq_a: test(&pde.eq_a, 1)?,
        eq_b: test(&pde.eq_b, 2)?,
        ineq_c: test(&pde.ineq_c, 3)?,
        ineq_d: test(&pde.ineq_d, 4)?,
        ineq_e: test(&pde.ineq_e, 5)?,
        sigma: None,
        tau: None,
        ep: None,
        sigma_x: None,
        solution_identity: None,
        edip: Vec::new(),
        regularity: None,
        det2: None,
        screens: None,
    };
    let cand = sigma_tau(p, pde, domain, sub_seed(seed, 6))?;
    let (Some(sigma), Some(tau)) = (cand.sigma, cand.tau) else { return Ok(report) };
    report.sigma = Some(sigma.to_string());
    report.tau = Some(tau.to_string());
    report.ep = Some(is_zero(&apply_e(p, &pde.ctx, &sigma)?, domain, sub_seed(seed, 7))?);
    report.sigma_x = Some(is_zero(&diff(&sigma, "x"), domain, sub_seed(seed, 8))?);
    if let Some(sys) = &pde.gamma_delta.system {
        let mut ctx = pde.ctx.clone();
        let dp = apply_d(p, &mut ctx, &tau)?;
        let dpx = apply_d(parts.get("p_x"), &mut ctx, &tau)?;
        let x1 = Expr::var("x1");
        let lam = Expr::sub(dp, Expr::product(vec![parts.get("p_x").clone(), x1.clone()]));
        let (g, h) = sys.instantiate(&Expr::var("x"), p, parts.get("p_x"), &lam);
        let residual = Expr::sub(dpx, Expr::sum(vec![h, Expr::product(vec![g, x1])]));
        report.solution_identity = Some(is_zero(&residual, domain, sub_seed(seed, 9))?);
    }
    Ok(report)
}

/// Full analysis: [`check_candidate`], then `E D^i p` for
/// `i = 1..=k+l-2` coefficient by coefficient in the x-chain, the
/// determinant of [`det2`] when `k >= 3`, and the dependence screens.
pub fn regularity(p: &Expr, pde: &PdeSystem, domain: &DomainBox, seed: u64) -> Result<RegularityReport> {
    let mut report = check_candidate(p, pde, domain, seed)?;
    report.screens = Some(dependence_screens(p, &pde.ctx, domain, sub_seed(seed, 40))?);
    if pde.k() >= 3 {
        report.det2 = Some(det2(p, pde, domain, sub_seed(seed, 41))?);
    }
    let cand = sigma_tau(p, pde, domain, sub_seed(seed, 6))?;
    let (Some(sigma), Some(tau)) = (cand.sigma, cand.tau) else {
        report.regularity = Some(Regularity::NotRegular { reason: "p_u vanishes identically".into() });
        return Ok(report);
    };
    let mut ctx = pde.ctx.clone();
    let mut cur = p.clone();
    let top = pde.k() + pde.l() - 2;
    for i in 1..=top {
        cur = apply_d(&cur, &mut ctx, &tau)?;
        let edi = apply_e(&cur, &ctx, &sigma)?;
        let coeffs = expand_in_xchain(&edi, &ctx)?;
        let mut status = EdipStatus::AllCoefficientsZero { i };
        for (j, (mono, c)) in coeffs.iter().enumerate() {
            let v = is_zero(c, domain, sub_seed(seed, 100 + 50 * i as u64 + j as u64))?;
            if v.is_nonzero() {
                status =
                    EdipStatus::NonzeroCoefficient { i, monomial: monomial_label(mono), coefficient: c.to_string() };
                break;
            }
        }
        report.edip.push(status);
    }
    let first = report.edip.iter().position(|s| !s.is_zero()).map(|i| i + 1);
    report.regularity = Some(if !report.equations_hold() {
        Regularity::NotRegular { reason: "equations (a), (b) do not hold".into() }
    } else if !report.inequations_hold() {
        Regularity::NotRegular { reason: "one of the inequations (c), (d), (e) vanishes identically".into() }
    } else {
        match first {
            Some(k_regular) => Regularity::Regular { k_regular },
            None => Regularity::NotRegular { reason: format!("E D^i p vanishes for every i ≤ {top}") },
        }
    });
    Ok(report)
}

/// Determinant of `(p, p_x, p_xx)` differentiated against
/// `u{k-1}, u{k-2}, u{k-3}`; requires `k >= 3`.
pub fn det2(p: &Expr, pde: &PdeSystem, domain: &DomainBox, seed: u64) -> Result<ZeroVerdict> {
    let k = pde.k();
    if k < 3 {
        return Err(Error::Precondition(format!("the determinant needs k ≥ 3, got k = {k}")));
    }
    let px = diff(p, "x");
    let rows = [p.clone(), px.clone(), diff(&px, "x")];
    let cols = [u_name(k - 1), u_name(k - 2), u_name(k - 3)];
    let m: Vec<Vec<Expr>> = rows.iter().map(|r| cols.iter().map(|c| normalize(&diff(r, c))).collect()).collect();
    let prod = |a: &Expr, b: &Expr| Expr::product(vec![a.clone(), b.clone()]);
    let minor = |a: &Expr, b: &Expr, c: &Expr, d: &Expr| Expr::sub(prod(a, b), prod(c, d));
    let det = Expr::sum(vec![
        prod(&m[0][0], &minor(&m[1][1], &m[2][2], &m[1][2], &m[2][1])),
        Expr::neg(prod(&m[0][1], &minor(&m[1][0], &m[2][2], &m[1][2], &m[2][0]))),
        prod(&m[0][2], &minor(&m[1][0], &m[2][1], &m[1][1], &m[2][0])),
    ]);
    is_zero(&det, domain, seed)
}

const SCREEN_SAMPLES: usize = 8;

/// Rank of the Jacobians of `(x, p, p_x)` and `(x, p, p_x, p_xx)` with
/// respect to the base variables, at seeded points. A relation
/// `p_x = α(x, p)` forces rank ≤ 2 everywhere, `p_xx = α(x, p, p_x)`
/// rank ≤ 3.
pub fn dependence_screens(p: &Expr, ctx: &JetContext, domain: &DomainBox, seed: u64) -> Result<DependenceScreens> {
    let vars = ctx.base_variables();
    let px = normalize(&diff(p, "x"));
    let pxx = normalize(&diff(&px, "x"));
    let funcs = [Expr::var("x"), p.clone(), px, pxx];
    let grads: Vec<Vec<Expr>> = funcs.iter().map(|f| vars.iter().map(|v| normalize(&diff(f, v))).collect()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut max3, mut max4, mut used) = (0, 0, 0);
    for _ in 0..SCREEN_SAMPLES * 10 {
        if used == SCREEN_SAMPLES {
            break;
        }
        let pt = domain.sample(&vars, &mut rng);
        let rows: Option<Vec<Vec<f64>>> =
            grads.iter().map(|g| g.iter().map(|e| eval(e, &pt).ok()).collect::<Option<Vec<f64>>>()).collect();
        let Some(rows) = rows else { continue };
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            continue;
        }
        used += 1;
        max3 = max3.max(rank(rows[..3].to_vec(), 1e-9));
        max4 = max4.max(rank(rows.clone(), 1e-9));
    }
    if used == 0 {
        return Err(Error::NoAdmissiblePoint { attempts: SCREEN_SAMPLES * 10 });
    }
    Ok(DependenceScreens { px_function_of_x_p: max3 <= 2, pxx_function_of_x_p_px: max4 <= 3, samples: used })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::{generate_pde, supply_gamma};
    use crate::symcore::ex;
    use crate::system::SystemDef;

    fn fixture() -> PdeSystem {
        let sys = SystemDef::parse("lam", "0").unwrap();
        let gd = supply_gamma(&sys, ex("w"), 7).unwrap();
        generate_pde(&gd, 1, 1).unwrap()
    }

    #[test]
    fn uv_fails_e() {
        let pde = fixture();
        let r = regularity(&ex("u0*v0"), &pde, &DomainBox::default(), 3).unwrap();
        assert!(r.equations_hold());
        assert!(r.ineq_c.is_nonzero() && r.ineq_d.is_nonzero());
        assert!(r.ineq_e.is_zero());
        assert!(matches!(r.regularity, Some(Regularity::NotRegular { .. })));
    }

    #[test]
    fn quartic_fixture() {
        let pde = fixture();
        let r = regularity(&ex("x^4 + u0 + v0"), &pde, &DomainBox::default(), 3).unwrap();
        assert!(r.equations_hold() && r.inequations_hold() && r.identities_hold());
        assert_eq!(r.sigma.as_deref(), Some("(-1)"));
        assert_eq!(r.tau.as_deref(), Some("(12 * (x^2))"));
        let s = r.screens.unwrap();
        assert!(s.pxx_function_of_x_p_px);
        assert!(matches!(r.regularity, Some(Regularity::NotRegular { .. })));
    }

    #[test]
    fn independent_of_u_fails_c() {
        let r = check_candidate(&ex("v0"), &fixture(), &DomainBox::default(), 3).unwrap();
        assert!(r.ineq_c.is_zero());
        assert!(r.sigma.is_none());
    }
}
