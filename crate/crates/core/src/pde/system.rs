use serde_json::json;

use super::gamma::GammaDelta;
use crate::error::{Error, Result};
use crate::jets::{u_name, v_name, JetContext};
use crate::symcore::{diff, substitute_pairs, to_latex, Expr};

/// Formal placeholders standing for `p` and its partial derivatives.
/// `p_u` and `p_v` differentiate with respect to the top jets
/// `u{k-1}` and `v{l-1}`; `Fp`, `Fp_x` are `F` applied to `p` and `p_x`.
pub const PLACEHOLDERS: [&str; 10] = ["p", "p_x", "p_xx", "p_xxx", "p_u", "p_v", "p_xu", "p_xv", "Fp", "Fp_x"];

/// The system of two equations and three inequations in the unknown `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct PdeSystem {
    pub gamma_delta: GammaDelta,
    pub ctx: JetContext,
    pub eq_a: Expr,
    pub eq_b: Expr,
    pub ineq_c: Expr,
    pub ineq_d: Expr,
    pub ineq_e: Expr,
}

/// `f(x, y, z, w)` evaluated at `(x, p, p_x, p_xx)`.
pub fn at_p(f: &Expr) -> Expr {
    substitute_pairs(f, &[("y", Expr::var("p")), ("z", Expr::var("p_x")), ("w", Expr::var("p_xx"))])
}

/// Builds the five left-hand sides for `(γ, δ)` and orders `(k, l)`.
pub fn generate_pde(gd: &GammaDelta, k: usize, l: usize) -> Result<PdeSystem> {
    if k == 0 || l == 0 {
        return Err(Error::Precondition("orders k and l must be at least 1".into()));
    }
    if k > l {
        return Err(Error::Precondition(format!("convention k ≤ ℓ violated: k = {k}, ℓ = {l}")));
    }
    let v = |n: &str| Expr::var(n);
    let (gamma, delta) = (at_p(&gd.gamma), at_p(&gd.delta));
    let no_f = k <= 1 && l <= 1;
    let (fp, fpx) = if no_f { (Expr::zero(), Expr::zero()) } else { (v("Fp"), v("Fp_x")) };
    let eq_a = Expr::sub(
        Expr::product(vec![v("p_u"), Expr::sub(fpx, delta.clone())]),
        Expr::product(vec![v("p_xu"), Expr::sub(fp, gamma)]),
    );
    let eq_b = Expr::sub(Expr::product(vec![v("p_u"), v("p_xv")]), Expr::product(vec![v("p_xu"), v("p_v")]));
    let partial = |name: &str| at_p(&diff(&gd.gamma, name));
    let ineq_e = Expr::sum(vec![
        partial("x"),
        Expr::product(vec![partial("y"), v("p_x")]),
        Expr::product(vec![partial("z"), v("p_xx")]),
        Expr::product(vec![partial("w"), v("p_xxx")]),
        Expr::neg(delta),
    ]);
    Ok(PdeSystem {
        gamma_delta: gd.clone(),
        ctx: JetContext::new(k, l),
        eq_a,
        eq_b,
        ineq_c: v("p_u"),
        ineq_d: v("p_v"),
        ineq_e,
    })
}

impl PdeSystem {
    pub fn k(&self) -> usize {
        self.ctx.k
    }

    pub fn l(&self) -> usize {
        self.ctx.l
    }

    fn rows(&self) -> [(&'static str, &Expr, &'static str); 5] {
        [
            ("a", &self.eq_a, "= 0"),
            ("b", &self.eq_b, "= 0"),
            ("c", &self.ineq_c, "!= 0"),
            ("d", &self.ineq_d, "!= 0"),
            ("e", &self.ineq_e, "!= 0"),
        ]
    }

    pub fn to_text(&self) -> String {
        let (k, l) = (self.k(), self.l());
        let mut s = format!("E^{{gamma,delta}}_{{{k},{l}}}\n");
        s += &format!("gamma(x,y,z,w) = {}\n", self.gamma_delta.gamma);
        s += &format!("delta(x,y,z,w) = {}\n", self.gamma_delta.delta);
        s += &format!(
            "p_u = dp/d{u}, p_v = dp/d{v}, p_xu = d2p/dx d{u}, p_xv = d2p/dx d{v}, Fp = F p, Fp_x = F p_x\n",
            u = u_name(k - 1),
            v = v_name(l - 1)
        );
        for (tag, e, rel) in self.rows() {
            s += &format!("({tag}) {e} {rel}\n");
        }
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "k": self.k(),
            "ℓ": self.l(),
            "gamma": self.gamma_delta.gamma.to_string(),
            "delta": self.gamma_delta.delta.to_string(),
            "provenance": self.gamma_delta.provenance,
            "eq_a": self.eq_a.to_string(),
            "eq_b": self.eq_b.to_string(),
            "ineq_c": self.ineq_c.to_string(),
            "ineq_d": self.ineq_d.to_string(),
            "ineq_e": self.ineq_e.to_string(),
        })
    }

    pub fn to_latex(&self) -> String {
        let (k, l) = (self.k(), self.l());
        let ku = if k == 1 { "u".to_string() } else { format!("u^{{({})}}", k - 1) };
        let lv = if l == 1 { "v".to_string() } else { format!("v^{{({})}}", l - 1) };
        let rename = [
            ("p_u", format!("p_{ku}")),
            ("p_v", format!("p_{lv}")),
            ("p_xu", format!("p_x{ku}")),
            ("p_xv", format!("p_x{lv}")),
            ("Fp_x", "F{}p_x".to_string()),
        ];
        let pretty = |e: &Expr| {
            let bindings: Vec<(&str, Expr)> = rename.iter().map(|(a, b)| (*a, Expr::var(b))).collect();
            to_latex(&substitute_pairs(e, &bindings))
        };
        let mut s = format!("\\mathcal{{E}}^{{\\gamma,\\delta}}_{{{k},{l}}}:\\quad\n\\begin{{array}}{{ll}}\n");
        for (tag, e, rel) in self.rows() {
            let rel = if rel == "= 0" { "= 0" } else { "\\neq 0" };
            s += &format!("{} {rel} & \\mbox{{({tag})}} \\\\\n", pretty(e));
        }
        s += "\\end{array}\n";
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::gamma::{GammaDelta, Provenance};
    use crate::symcore::ex;

    #[test]
    fn k1_l1_drops_f_terms() {
        let gd = GammaDelta { gamma: ex("w"), delta: ex("y"), provenance: Provenance::Inverted, system: None };
        let pde = generate_pde(&gd, 1, 1).unwrap();
        assert!(!pde.eq_a.contains_var("Fp"));
        assert!(generate_pde(&gd, 2, 1).is_err());
    }
}
