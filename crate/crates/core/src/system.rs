use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symcore::{diff, is_zero, parse, substitute_pairs, DomainBox, Expr, Role, VariableRegistry};

/// The system `z' = h(x,y,z,lam) + g(x,y,z,lam) x'` with `lam = y' - z x'`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemDef {
    pub g: Expr,
    pub h: Expr,
    pub domain: DomainBox,
}

impl SystemDef {
    /// Builds a system, checking that `g` and `h` only use `x, y, z, lam`.
    pub fn new(g: Expr, h: Expr, domain: DomainBox) -> Result<SystemDef> {
        let mut reg = VariableRegistry::new();
        for n in ["x", "y", "z", "lam"] {
            reg.register(n, Role::Base)?;
        }
        reg.check(&g)?;
        reg.check(&h)?;
        Ok(SystemDef { g, h, domain })
    }

    pub fn parse(g: &str, h: &str) -> Result<SystemDef> {
        SystemDef::new(parse(g)?, parse(h)?, DomainBox::default())
    }

    pub fn with_domain(mut self, domain: DomainBox) -> SystemDef {
        self.domain = domain;
        self
    }

    /// `∂^n g / ∂lam^n`.
    pub fn g_lam(&self, n: usize) -> Expr {
        (0..n).fold(self.g.clone(), |e, _| diff(&e, "lam"))
    }

    /// `∂^n h / ∂lam^n`.
    pub fn h_lam(&self, n: usize) -> Expr {
        (0..n).fold(self.h.clone(), |e, _| diff(&e, "lam"))
    }

    /// Fails unless `∂g/∂lam` is not identically zero on the domain.
    pub fn check_g4(&self, seed: u64) -> Result<()> {
        if is_zero(&self.g_lam(1), &self.domain, seed)?.is_zero() {
            return Err(Error::Precondition("dg/dlam vanishes identically".into()));
        }
        Ok(())
    }

    /// `z1 - h - g x1` with `lam` replaced by `y1 - z x1`: the residual of
    /// the equation in terms of first-order jets.
    pub fn residual_in_jets(&self) -> Expr {
        let lam = parse("y1 - z*x1").unwrap();
        let rhs = Expr::sum(vec![self.h.clone(), Expr::product(vec![self.g.clone(), Expr::var("x1")])]);
        Expr::sub(Expr::var("z1"), substitute_pairs(&rhs, &[("lam", lam)]))
    }

    /// The pair `(g, h)` evaluated with the given arguments in place of
    /// `(x, y, z, lam)`.
    pub fn instantiate(&self, x: &Expr, y: &Expr, z: &Expr, lam: &Expr) -> (Expr, Expr) {
        let b = [("x", x.clone()), ("y", y.clone()), ("z", z.clone()), ("lam", lam.clone())];
        (substitute_pairs(&self.g, &b), substitute_pairs(&self.h, &b))
    }
}
