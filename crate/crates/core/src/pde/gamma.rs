//! The functions `γ`, `δ` attached to a system: inversion of `w = g` in
//! `lam`, user-supplied inverses and the two branches of a normal form with
//! `S = T = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symcore::{
    diff, is_zero, normalize, numer_denom, sub_seed, substitute_pairs, DomainBox, Expr, Node, ZeroVerdict,
};
use crate::system::SystemDef;

/// Root choice for a quadratic inversion: `+` or `-` in front of the
/// square root.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

impl std::str::FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Branch> {
        match s {
            "plus" | "+" | "1" => Ok(Branch::Plus),
            "minus" | "-" | "2" => Ok(Branch::Minus),
            _ => Err(Error::Precondition(format!("unknown branch `{s}` (expected plus or minus)"))),
        }
    }
}

/// Where a pair `(γ, δ)` came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Inverted,
    UserSuppliedVerified,
    Branch1,
    Branch2,
}

/// `γ(x,y,z,w)` with `w = g(x,y,z,lam) <=> lam = γ(x,y,z,w)`, and
/// `δ(x,y,z,w) = h(x,y,z,γ(x,y,z,w))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaDelta {
    pub gamma: Expr,
    pub delta: Expr,
    pub provenance: Provenance,
    /// The `(g, h)` pair `γ` inverts, when known.
    pub system: Option<SystemDef>,
}

/// Shape of a function of one variable that [`solve_for`] can invert.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InvertibleShape {
    Affine,
    Quadratic,
    Mobius,
}

fn at_zero(e: &Expr, var: &str) -> Expr {
    normalize(&substitute_pairs(e, &[(var, Expr::zero())]))
}

/// Solves `f(var) = target` for `var` when `f` is affine, quadratic (with a
/// branch) or a linear fractional function of `var`, with coefficients
/// free of `var`.
pub fn solve_for(f: &Expr, var: &str, target: &Expr, branch: Option<Branch>) -> Result<(Expr, InvertibleShape)> {
    let f = normalize(f);
    if !f.contains_var(var) {
        return Err(Error::Unsupported(format!("`{f}` does not depend on {var}")));
    }
    let mut transcendental = false;
    f.walk(&mut |s| {
        if let Node::Func(_, a) = s.node() {
            transcendental |= a.contains_var(var);
        }
    });
    let unsupported = || {
        Error::Unsupported(format!(
            "`{f}` is not affine, quadratic or linear fractional in {var}; supply the inverse explicitly"
        ))
    };
    if transcendental {
        return Err(unsupported());
    }
    let (num, den) = numer_denom(&f).ok_or_else(unsupported)?;
    if den.contains_var(var) {
        let affine = |e: &Expr| normalize(&diff(&diff(e, var), var)).is_zero();
        if !affine(&num) || !affine(&den) {
            return Err(unsupported());
        }
        let (a, b) = (normalize(&diff(&num, var)), at_zero(&num, var));
        let (c, d) = (normalize(&diff(&den, var)), at_zero(&den, var));
        let sol = Expr::quot(
            Expr::sub(b, Expr::product(vec![d, target.clone()])),
            Expr::sub(Expr::product(vec![c, target.clone()]), a),
        );
        return Ok((normalize(&sol), InvertibleShape::Mobius));
    }
    let d1 = normalize(&diff(&f, var));
    let d2 = normalize(&diff(&d1, var));
    let c0 = at_zero(&f, var);
    if d2.is_zero() {
        return Ok((normalize(&Expr::quot(Expr::sub(target.clone(), c0), d1)), InvertibleShape::Affine));
    }
    if !normalize(&diff(&d2, var)).is_zero() {
        return Err(unsupported());
    }
    let branch = branch.ok_or_else(|| {
        Error::Precondition(format!("`{f}` is quadratic in {var}: declare a branch (plus: +sqrt, minus: -sqrt)"))
    })?;
    let sign = |e: Expr| if branch == Branch::Plus { e } else { Expr::neg(e) };
    let a = normalize(&Expr::quot(d2, Expr::int(2)));
    let b = at_zero(&d1, var);
    let sol = if b.is_zero() {
        sign(Expr::sqrt(normalize(&Expr::quot(Expr::sub(target.clone(), c0), a))))
    } else {
        let disc = Expr::sub(
            Expr::pow(b.clone(), 2),
            Expr::product(vec![Expr::int(4), a.clone(), Expr::sub(c0, target.clone())]),
        );
        Expr::quot(
            Expr::sum(vec![Expr::neg(b), sign(Expr::sqrt(normalize(&disc)))]),
            Expr::product(vec![Expr::int(2), a]),
        )
    };
    Ok((sol, InvertibleShape::Quadratic))
}

/// Box over `(x, y, z, w)` used to validate a `γ`: the system's ranges for
/// `x, y, z` and its `w` range when declared.
pub fn gamma_domain(sys: &SystemDef) -> DomainBox {
    let mut b = DomainBox { ranges: Default::default(), default: sys.domain.default };
    for v in ["x", "y", "z", "w"] {
        if let Some(r) = sys.domain.ranges.get(v) {
            b.ranges.insert(v.to_string(), *r);
        }
    }
    b
}

fn fail_with(what: &str, v: ZeroVerdict) -> Error {
    match v {
        ZeroVerdict::NonZero { point, value } => Error::Verification(format!("{what}: value {value:e} at {point:?}")),
        other => Error::Verification(format!("{what}: {}", other.label())),
    }
}

fn build(sys: &SystemDef, gamma: Expr, provenance: Provenance, seed: u64) -> Result<GammaDelta> {
    let dom = gamma_domain(sys);
    let g_of_gamma = substitute_pairs(&sys.g, &[("lam", gamma.clone())]);
    let v = is_zero(&Expr::sub(g_of_gamma, Expr::var("w")), &dom, sub_seed(seed, 1))?;
    if v.is_nonzero() {
        return Err(fail_with("g(x,y,z,γ) - w is not identically zero", v));
    }
    if is_zero(&diff(&gamma, "w"), &dom, sub_seed(seed, 2))?.is_zero() {
        return Err(Error::Verification("∂γ/∂w vanishes identically".into()));
    }
    let round_trip = Expr::sub(substitute_pairs(&gamma, &[("w", sys.g.clone())]), Expr::var("lam"));
    let v = is_zero(&round_trip, &sys.domain, sub_seed(seed, 3))?;
    if v.is_nonzero() {
        return Err(fail_with("γ(x,y,z,g) - lam is not identically zero on the domain (wrong branch?)", v));
    }
    let delta = normalize(&substitute_pairs(&sys.h, &[("lam", gamma.clone())]));
    Ok(GammaDelta { gamma, delta, provenance, system: Some(sys.clone()) })
}

/// Inverts `w = g(x,y,z,lam)` symbolically on the declared branch and sets
/// `δ = h(x,y,z,γ)`. Both defining identities and the round trip on the
/// system's domain are zero-tested.
pub fn invert_g(sys: &SystemDef, branch: Option<Branch>, seed: u64) -> Result<GammaDelta> {
    sys.check_g4(seed)?;
    let (gamma, _) = solve_for(&sys.g, "lam", &Expr::var("w"), branch)?;
    build(sys, normalize(&gamma), Provenance::Inverted, seed)
}

/// Accepts a user-supplied `γ` after checking it against `g`.
pub fn supply_gamma(sys: &SystemDef, gamma: Expr, seed: u64) -> Result<GammaDelta> {
    for v in gamma.variables() {
        if !["x", "y", "z", "w"].contains(&v.as_str()) {
            return Err(Error::Unregistered(v));
        }
    }
    build(sys, gamma, Provenance::UserSuppliedVerified, seed)
}

/// The form
/// `z' = κ (y' - α x')(y' - β x') + a x' + b y' + c` with coefficients in
/// `(x, y, z)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalFormST0 {
    pub kappa: Expr,
    pub alpha: Expr,
    pub beta: Expr,
    pub a: Expr,
    pub b: Expr,
    pub c: Expr,
    #[serde(default)]
    pub domain: DomainBox,
    /// Inverse of `z -> α(x,y,z)`, written in `(x, y, z)`, when it is not
    /// affine or linear fractional.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_inverse: Option<Expr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_inverse: Option<Expr>,
}

impl NormalFormST0 {
    /// The form read as `z' = h + g x'`; only possible when `α = z` or
    /// `β = z`, otherwise the right-hand side is quadratic in `x'`.
    pub fn as_system(&self) -> Result<SystemDef> {
        let (g, h, quadratic) = normal_form_gh(&self.kappa, &self.alpha, &self.beta, &self.a, &self.b, &self.c);
        if !quadratic.is_zero() {
            return Err(Error::Precondition("the form is not affine in x' (neither α nor β equals z)".into()));
        }
        SystemDef::new(g, h, self.domain.clone())
    }

    /// Checks that none of `κ`, `α - β`, `α_z`, `β_z` vanishes identically.
    pub fn check(&self, seed: u64) -> Result<()> {
        let checks = [
            ("κ", self.kappa.clone()),
            ("α - β", Expr::sub(self.alpha.clone(), self.beta.clone())),
            ("∂α/∂z", diff(&self.alpha, "z")),
            ("∂β/∂z", diff(&self.beta, "z")),
        ];
        for (i, (name, e)) in checks.into_iter().enumerate() {
            if is_zero(&e, &self.domain, sub_seed(seed, 20 + i as u64))?.is_zero() {
                return Err(Error::Precondition(format!("{name} vanishes identically")));
            }
        }
        Ok(())
    }
}

/// Coefficients of `x'^1`, `x'^0` and `x'^2` in
/// `κ(y' - α x')(y' - β x') + a x' + b y' + c` after `y' = lam + z x'`.
fn normal_form_gh(kappa: &Expr, alpha: &Expr, beta: &Expr, a: &Expr, b: &Expr, c: &Expr) -> (Expr, Expr, Expr) {
    let x1 = Expr::var("x1");
    let ydot = Expr::sum(vec![Expr::var("lam"), Expr::product(vec![Expr::var("z"), x1.clone()])]);
    let rhs = Expr::sum(vec![
        Expr::product(vec![
            kappa.clone(),
            Expr::sub(ydot.clone(), Expr::product(vec![alpha.clone(), x1.clone()])),
            Expr::sub(ydot.clone(), Expr::product(vec![beta.clone(), x1.clone()])),
        ]),
        Expr::product(vec![a.clone(), x1.clone()]),
        Expr::product(vec![b.clone(), ydot]),
        c.clone(),
    ]);
    let h = at_zero(&rhs, "x1");
    let g = at_zero(&diff(&rhs, "x1"), "x1");
    let quadratic = normalize(&diff(&diff(&rhs, "x1"), "x1"));
    (g, h, quadratic)
}

fn compose_inverse(f: &Expr, inverse: &Expr) -> Expr {
    normalize(&substitute_pairs(f, &[("z", inverse.clone())]))
}

/// Inverse of `z -> f(x,y,z)`, expressed in `(x, y, z)`.
fn z_inverse(f: &Expr, supplied: Option<&Expr>, dom: &DomainBox, seed: u64) -> Result<Expr> {
    let inv = match supplied {
        Some(e) => e.clone(),
        None => {
            let (sol, _) = solve_for(f, "z", &Expr::var("zz"), None).map_err(|e| match e {
                Error::Precondition(m) | Error::Unsupported(m) => {
                    Error::Unsupported(format!("{m}; give the inverse of z -> {f} explicitly"))
                }
                other => other,
            })?;
            normalize(&substitute_pairs(&sol, &[("zz", Expr::var("z"))]))
        }
    };
    let check = Expr::sub(substitute_pairs(f, &[("z", inv.clone())]), Expr::var("z"));
    let v = is_zero(&check, dom, seed)?;
    if v.is_nonzero() {
        return Err(fail_with("supplied inverse does not invert z -> f", v));
    }
    Ok(inv)
}

/// Coefficients `m^{i,0}, m^{i,1}, n^{i,0}, n^{i,1}, n^{i,2}` of one branch,
/// composed with the inverse change of coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchCoefficients {
    pub m0: Expr,
    pub m1: Expr,
    pub n0: Expr,
    pub n1: Expr,
    pub n2: Expr,
}

fn branch_coefficients(nf: &NormalFormST0, first: &Expr, second: &Expr, inverse: &Expr) -> BranchCoefficients {
    let (f1, f2, f3) = (diff(first, "x"), diff(first, "y"), diff(first, "z"));
    let p = |v: Vec<Expr>| Expr::product(v);
    let m0 = Expr::sum(vec![
        f1,
        p(vec![first.clone(), f2.clone()]),
        p(vec![Expr::sum(vec![nf.a.clone(), p(vec![nf.b.clone(), first.clone()])]), f3.clone()]),
    ]);
    let m1 = p(vec![nf.kappa.clone(), f3.clone(), Expr::sub(first.clone(), second.clone())]);
    let n0 = p(vec![nf.c.clone(), f3.clone()]);
    let n1 = Expr::sum(vec![f2, p(vec![nf.b.clone(), f3.clone()])]);
    let n2 = p(vec![nf.kappa.clone(), f3]);
    let c = |e: Expr| compose_inverse(&e, inverse);
    BranchCoefficients { m0: c(m0), m1: c(m1), n0: c(n0), n1: c(n1), n2: c(n2) }
}

fn branch_gamma_delta(bc: &BranchCoefficients, provenance: Provenance, domain: &DomainBox) -> Result<GammaDelta> {
    let w = Expr::var("w");
    let gamma = normalize(&Expr::quot(Expr::sub(w, bc.m0.clone()), bc.m1.clone()));
    let delta = normalize(&Expr::sum(vec![
        bc.n0.clone(),
        Expr::product(vec![bc.n1.clone(), gamma.clone()]),
        Expr::product(vec![bc.n2.clone(), Expr::pow(gamma.clone(), 2)]),
    ]));
    let lam = Expr::var("lam");
    let g = normalize(&Expr::sum(vec![bc.m0.clone(), Expr::product(vec![bc.m1.clone(), lam.clone()])]));
    let h = normalize(&Expr::sum(vec![
        bc.n0.clone(),
        Expr::product(vec![bc.n1.clone(), lam.clone()]),
        Expr::product(vec![bc.n2.clone(), Expr::pow(lam, 2)]),
    ]));
    let system = SystemDef::new(g, h, domain.clone())?;
    Ok(GammaDelta { gamma, delta, provenance, system: Some(system) })
}

/// The two pairs `(γ¹, δ¹)`, `(γ², δ²)` of a normal form, obtained through
/// the changes of coordinates `z -> α` and `z -> β`. The second is the
/// first with `α` and `β` exchanged.
pub fn branch_gammas(nf: &NormalFormST0, seed: u64) -> Result<(GammaDelta, GammaDelta)> {
    nf.check(seed)?;
    let ainv = z_inverse(&nf.alpha, nf.alpha_inverse.as_ref(), &nf.domain, sub_seed(seed, 30))?;
    let binv = z_inverse(&nf.beta, nf.beta_inverse.as_ref(), &nf.domain, sub_seed(seed, 31))?;
    let c1 = branch_coefficients(nf, &nf.alpha, &nf.beta, &ainv);
    let c2 = branch_coefficients(nf, &nf.beta, &nf.alpha, &binv);
    Ok((
        branch_gamma_delta(&c1, Provenance::Branch1, &nf.domain)?,
        branch_gamma_delta(&c2, Provenance::Branch2, &nf.domain)?,
    ))
}

/// Coefficients of both branches, for reporting.
pub fn branch_coefficient_table(nf: &NormalFormST0, seed: u64) -> Result<(BranchCoefficients, BranchCoefficients)> {
    let ainv = z_inverse(&nf.alpha, nf.alpha_inverse.as_ref(), &nf.domain, sub_seed(seed, 30))?;
    let binv = z_inverse(&nf.beta, nf.beta_inverse.as_ref(), &nf.domain, sub_seed(seed, 31))?;
    Ok((branch_coefficients(nf, &nf.alpha, &nf.beta, &ainv), branch_coefficients(nf, &nf.beta, &nf.alpha, &binv)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::ex;

    #[test]
    fn affine_and_quadratic() {
        let sys = SystemDef::parse("lam", "y").unwrap();
        let gd = invert_g(&sys, None, 1).unwrap();
        assert_eq!(gd.gamma, ex("w"));
        assert_eq!(gd.delta, ex("y"));
        let sys = SystemDef::parse("lam^2", "y").unwrap();
        assert!(matches!(invert_g(&sys, None, 1), Err(Error::Precondition(_))));
        let gd = invert_g(&sys, Some(Branch::Plus), 1).unwrap();
        assert_eq!(gd.gamma.to_string(), "sqrt(w)");
    }

    #[test]
    fn mobius() {
        let sys = SystemDef::parse("(2*lam + x)/(lam + 3)", "y").unwrap();
        let gd = invert_g(&sys, None, 1).unwrap();
        assert_eq!(gd.provenance, Provenance::Inverted);
    }

    #[test]
    fn unsupported_shape() {
        let sys = SystemDef::parse("lam^3 + lam", "y").unwrap();
        assert!(matches!(invert_g(&sys, None, 1), Err(Error::Unsupported(_))));
    }
}
