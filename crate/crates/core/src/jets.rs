//! Jet-variable contexts and the operators `F`, `E`, `D` acting on
//! expressions in `u0..u{k-1}, x, v0..v{l-1}` and the x-chain `x1, x2, ...`.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symcore::{diff, normalize, numer_denom, role_of, substitute_pairs, Expr, Node, Role, VariableRegistry};

/// Name of the `i`-th u-jet.
pub fn u_name(i: usize) -> String {
    format!("u{i}")
}

/// Name of the `i`-th v-jet.
pub fn v_name(i: usize) -> String {
    format!("v{i}")
}

/// Name of the `i`-th element of the x-chain; `x` itself for `i = 0`.
pub fn x_name(i: usize) -> String {
    if i == 0 {
        "x".to_string()
    } else {
        format!("x{i}")
    }
}

/// Orders `(k, l)` of the u- and v-jets, with `k <= l` after construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JetContext {
    pub k: usize,
    pub l: usize,
    /// Highest `x{i}` in use.
    pub x_depth: usize,
    /// Set when the requested orders were exchanged to restore `k <= l`.
    pub swapped: bool,
}

impl JetContext {
    pub fn new(k: usize, l: usize) -> Self {
        let (k, l, swapped) = if k <= l { (k, l, false) } else { (l, k, true) };
        JetContext { k, l, x_depth: 0, swapped }
    }

    /// Largest `x{i}` that `D` may introduce.
    pub fn x_cap(&self) -> usize {
        (self.k + self.l).saturating_sub(1)
    }

    pub fn u_top(&self) -> Result<String> {
        if self.k == 0 {
            return Err(Error::Precondition("k must be at least 1".into()));
        }
        Ok(u_name(self.k - 1))
    }

    pub fn v_top(&self) -> Result<String> {
        if self.l == 0 {
            return Err(Error::Precondition("l must be at least 1".into()));
        }
        Ok(v_name(self.l - 1))
    }

    /// The independent variables `u0..u{k-1}, x, v0..v{l-1}`.
    pub fn base_variables(&self) -> Vec<String> {
        let mut out: Vec<String> = (0..self.k).map(u_name).collect();
        out.push("x".into());
        out.extend((0..self.l).map(v_name));
        out
    }

    /// Base variables followed by `x1..x{x_depth}`.
    pub fn variables(&self) -> Vec<String> {
        let mut out = self.base_variables();
        out.extend((1..=self.x_depth).map(x_name));
        out
    }

    pub fn registry(&self) -> VariableRegistry {
        let mut reg = VariableRegistry::new();
        for v in self.variables() {
            reg.register_auto(&v).expect("jet names are valid identifiers");
        }
        reg
    }
}

/// `F e = sum_{i<k-1} u{i+1} de/du{i} + sum_{i<l-1} v{i+1} de/dv{i}`.
pub fn apply_f(e: &Expr, ctx: &JetContext) -> Expr {
    let mut terms = Vec::new();
    for i in 0..ctx.k.saturating_sub(1) {
        terms.push(Expr::product(vec![Expr::var(&u_name(i + 1)), diff(e, &u_name(i))]));
    }
    for i in 0..ctx.l.saturating_sub(1) {
        terms.push(Expr::product(vec![Expr::var(&v_name(i + 1)), diff(e, &v_name(i))]));
    }
    normalize(&Expr::sum(terms))
}

/// `E e = sigma de/du{k-1} + de/dv{l-1}`.
pub fn apply_e(e: &Expr, ctx: &JetContext, sigma: &Expr) -> Result<Expr> {
    let (ut, vt) = (ctx.u_top()?, ctx.v_top()?);
    Ok(normalize(&Expr::sum(vec![Expr::product(vec![sigma.clone(), diff(e, &ut)]), diff(e, &vt)])))
}

/// `D e = F e + tau de/du{k-1} + sum_{i <= k+l-2} x{i+1} de/dx{i}`.
///
/// Raises `ctx.x_depth` to the deepest x-chain variable of the result.
pub fn apply_d(e: &Expr, ctx: &mut JetContext, tau: &Expr) -> Result<Expr> {
    let ut = ctx.u_top()?;
    let mut terms = vec![apply_f(e, ctx), Expr::product(vec![tau.clone(), diff(e, &ut)])];
    let mut deepest = 0;
    for i in 0..=ctx.x_cap() {
        let xi = x_name(i);
        if !e.contains_var(&xi) {
            continue;
        }
        if i + 1 > ctx.x_cap() {
            return Err(Error::Degree(format!(
                "D would introduce x{} beyond the cap x{} for (k, l) = ({}, {})",
                i + 1,
                ctx.x_cap(),
                ctx.k,
                ctx.l
            )));
        }
        terms.push(Expr::product(vec![Expr::var(&x_name(i + 1)), diff(e, &xi)]));
        deepest = i + 1;
    }
    ctx.x_depth = ctx.x_depth.max(deepest);
    Ok(normalize(&Expr::sum(terms)))
}

/// Name of the time derivative of a jet variable, if it has one.
fn next_jet(name: &str) -> Option<String> {
    match name {
        "x" | "y" | "z" => return Some(format!("{name}1")),
        _ => {}
    }
    match role_of(name)? {
        Role::JetU(i) => Some(u_name(i as usize + 1)),
        Role::JetV(i) => Some(v_name(i as usize + 1)),
        Role::JetX(i) => Some(format!("x{}", i + 1)),
        Role::JetY(i) => Some(format!("y{}", i + 1)),
        Role::JetZ(i) => Some(format!("z{}", i + 1)),
        _ => None,
    }
}

/// Total time derivative: every jet variable `u{i}, v{i}, x{i}, y{i}, z{i}`
/// (with `x, y, z` as order 0) is mapped to its successor.
pub fn prolong_time_derivative(e: &Expr) -> Expr {
    total_derivative(e, &HashMap::new())
}

/// Total time derivative where the derivative of each variable named in
/// `rules` is the given expression instead of its successor.
pub fn total_derivative(e: &Expr, rules: &HashMap<String, Expr>) -> Expr {
    let mut terms = Vec::new();
    for v in e.variables() {
        let dv = match rules.get(&v) {
            Some(r) => r.clone(),
            None => match next_jet(&v) {
                Some(n) => Expr::var(&n),
                None => continue,
            },
        };
        terms.push(Expr::product(vec![dv, diff(e, &v)]));
    }
    normalize(&Expr::sum(terms))
}

const MAX_XCHAIN_DEGREE: u32 = 32;

/// Collects `e` as a polynomial in `x1..x{x_depth}`. Keys are exponent
/// vectors over `x1..x{x_depth}`; values are coefficients free of the chain.
pub fn expand_in_xchain(e: &Expr, ctx: &JetContext) -> Result<BTreeMap<Vec<u32>, Expr>> {
    let chain: Vec<String> = (1..=ctx.x_depth).map(x_name).collect();
    for v in e.variables() {
        if let Some(Role::JetX(i)) = role_of(&v) {
            if i as usize > ctx.x_depth {
                return Err(Error::Unregistered(v));
            }
        }
    }
    let mut out = BTreeMap::new();
    expand_rec(&normalize(e), &chain, Vec::new(), &mut out)?;
    Ok(out)
}

fn expand_rec(e: &Expr, chain: &[String], prefix: Vec<u32>, out: &mut BTreeMap<Vec<u32>, Expr>) -> Result<()> {
    if e.is_zero() {
        return Ok(());
    }
    let Some((v, rest)) = chain.split_first() else {
        out.insert(prefix, e.clone());
        return Ok(());
    };
    if !polynomial_in(e, v) {
        return Err(Error::Unsupported(format!("expression is not polynomial in {v}")));
    }
    // Taylor coefficients at v = 0: d holds the j-th derivative over j!.
    let mut d = e.clone();
    for j in 0..=MAX_XCHAIN_DEGREE {
        if d.is_zero() {
            return Ok(());
        }
        let coeff = normalize(&substitute_pairs(&d, &[(v.as_str(), Expr::zero())]));
        let mut key = prefix.clone();
        key.push(j);
        expand_rec(&coeff, rest, key, out)?;
        d = normalize(&Expr::quot(diff(&d, v), Expr::int(j as i64 + 1)));
    }
    Err(Error::Unsupported(format!("degree in {v} exceeds {MAX_XCHAIN_DEGREE}")))
}

fn polynomial_in(e: &Expr, v: &str) -> bool {
    let Some((_, den)) = numer_denom(e) else { return false };
    if den.contains_var(v) {
        return false;
    }
    let mut ok = true;
    e.walk(&mut |s| {
        if let Node::Func(_, a) = s.node() {
            ok &= !a.contains_var(v);
        }
    });
    ok
}

/// Human-readable label of an exponent vector over `x1, x2, ...`.
pub fn monomial_label(exps: &[u32]) -> String {
    let parts: Vec<String> = exps
        .iter()
        .enumerate()
        .filter(|(_, e)| **e > 0)
        .map(|(i, e)| if *e == 1 { x_name(i + 1) } else { format!("{}^{e}", x_name(i + 1)) })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::ex;

    #[test]
    fn f_on_chain_ends() {
        let ctx = JetContext::new(3, 3);
        assert_eq!(apply_f(&ex("u1"), &ctx), ex("u2"));
        assert!(apply_f(&ex("u2"), &ctx).is_zero());
        let flat = JetContext::new(1, 1);
        assert!(apply_f(&ex("u0*v0 + x"), &flat).is_zero());
    }

    #[test]
    fn swap_recorded() {
        let ctx = JetContext::new(4, 3);
        assert_eq!((ctx.k, ctx.l, ctx.swapped), (3, 4, true));
    }

    #[test]
    fn e_and_d_basics() {
        let mut ctx = JetContext::new(1, 1);
        assert_eq!(apply_e(&ex("v0"), &ctx, &ex("s")).unwrap(), Expr::one());
        assert!(apply_e(&ex("x"), &ctx, &ex("s")).unwrap().is_zero());
        assert_eq!(apply_d(&ex("x"), &mut ctx, &Expr::zero()).unwrap(), ex("x1"));
        assert_eq!(ctx.x_depth, 1);
        assert!(apply_d(&ex("x1"), &mut ctx, &Expr::zero()).is_err());
    }

    #[test]
    fn xchain_expansion() {
        let ctx = JetContext { k: 2, l: 2, x_depth: 2, swapped: false };
        let m = expand_in_xchain(&ex("x1*a + b + 3*x1^2*x2"), &ctx).unwrap();
        assert_eq!(m[&vec![1, 0]], ex("a"));
        assert_eq!(m[&vec![0, 0]], ex("b"));
        assert_eq!(m[&vec![2, 1]], ex("3"));
        assert!(expand_in_xchain(&Expr::zero(), &ctx).unwrap().is_empty());
        let r = expand_in_xchain(&ex("1/x1"), &ctx);
        assert!(r.is_err(), "{r:?}");
        assert_eq!(monomial_label(&[2, 1]), "x1^2*x2");
    }

    #[test]
    fn prolongation() {
        assert_eq!(prolong_time_derivative(&ex("v0")), ex("v1"));
        assert!(prolong_time_derivative(&ex("7")).is_zero());
        assert_eq!(prolong_time_derivative(&ex("y*x1")), normalize(&ex("y1*x1 + y*x2")));
    }
}
