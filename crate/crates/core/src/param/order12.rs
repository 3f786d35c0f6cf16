use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::parameterization::{ParamKind, Parameterization, POINT_TOL};
use super::report::VerificationReport;
use super::verify::{verify_numeric, GermConfig};
use crate::error::{Error, Result};
use crate::numeric::NewtonSettings;
use crate::symcore::{diff, eval, is_zero, normalize, sub_seed, DomainBox, Expr, ZeroVerdict};
use crate::system::SystemDef;

/// The system `z' = κ x' lam + a lam + b x' + c`, i.e. `g = κ lam + b`
/// and `h = a lam + c`, with coefficients in `(x, y, z)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalForm12 {
    pub kappa: Expr,
    pub a: Expr,
    pub b: Expr,
    pub c: Expr,
    #[serde(default)]
    pub domain: DomainBox,
}

impl NormalForm12 {
    pub fn as_system(&self) -> Result<SystemDef> {
        let lam = Expr::var("lam");
        let g = normalize(&Expr::sum(vec![Expr::product(vec![self.kappa.clone(), lam.clone()]), self.b.clone()]));
        let h = normalize(&Expr::sum(vec![Expr::product(vec![self.a.clone(), lam]), self.c.clone()]));
        SystemDef::new(g, h, self.domain.clone())
    }

    /// `X0 f = c f_z`.
    pub fn x0(&self, f: &Expr) -> Expr {
        normalize(&Expr::product(vec![self.c.clone(), diff(f, "z")]))
    }

    /// `X1 f = f_x + z f_y + b f_z`.
    pub fn x1(&self, f: &Expr) -> Expr {
        normalize(&Expr::sum(vec![
            diff(f, "x"),
            Expr::product(vec![Expr::var("z"), diff(f, "y")]),
            Expr::product(vec![self.b.clone(), diff(f, "z")]),
        ]))
    }

    /// `X2 f = f_y + a f_z`.
    pub fn x2(&self, f: &Expr) -> Expr {
        normalize(&Expr::sum(vec![diff(f, "y"), Expr::product(vec![self.a.clone(), diff(f, "z")])]))
    }

    /// `X3 f = κ f_z`.
    pub fn x3(&self, f: &Expr) -> Expr {
        normalize(&Expr::product(vec![self.kappa.clone(), diff(f, "z")]))
    }

    /// `Y f = X2 f + x1 X3 f`.
    pub fn y_field(&self, f: &Expr) -> Expr {
        normalize(&Expr::sum(vec![self.x2(f), Expr::product(vec![Expr::var("x1"), self.x3(f)])]))
    }

    fn a_field(&self, f: &Expr) -> Expr {
        normalize(&Expr::sum(vec![self.x0(f), Expr::product(vec![Expr::var("x1"), self.x1(f)])]))
    }

    /// `Z f = [X0 + x1 X1, X2 + x1 X3] f + x2 X3 f`, with `x1` a parameter.
    pub fn z_field(&self, f: &Expr) -> Expr {
        let ab = self.a_field(&self.y_field(f));
        let ba = self.y_field(&self.a_field(f));
        normalize(&Expr::sum(vec![ab, Expr::neg(ba), Expr::product(vec![Expr::var("x2"), self.x3(f)])]))
    }

    /// The polynomial in `x1, x2` whose nonvanishing is required at the
    /// construction point.
    pub fn condition(&self) -> Expr {
        let (k, a, b, c) = (&self.kappa, &self.a, &self.b, &self.c);
        let x1 = Expr::var("x1");
        let c2 =
            Expr::sum(vec![self.x1(k), Expr::neg(self.x3(b)), Expr::product(vec![Expr::int(2), a.clone(), k.clone()])]);
        let c1 = Expr::sum(vec![
            self.x1(a),
            self.x0(k),
            Expr::neg(self.x3(c)),
            Expr::neg(self.x2(b)),
            Expr::pow(a.clone(), 2),
        ]);
        let c0 = Expr::sub(self.x0(a), self.x2(c));
        normalize(&Expr::sum(vec![
            Expr::product(vec![k.clone(), Expr::var("x2")]),
            Expr::product(vec![Expr::pow(k.clone(), 2), Expr::pow(x1.clone(), 3)]),
            Expr::product(vec![c2, Expr::pow(x1.clone(), 2)]),
            Expr::product(vec![c1, x1]),
            c0,
        ]))
    }

    /// `h' = X0 h + (X1 h) x1 + h_{x1} x2`, the time derivative of a first
    /// integral `h` of `Y` along solutions.
    pub fn hdot(&self, h: &Expr) -> Expr {
        normalize(&Expr::sum(vec![
            self.x0(h),
            Expr::product(vec![self.x1(h), Expr::var("x1")]),
            Expr::product(vec![diff(h, "x1"), Expr::var("x2")]),
        ]))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Order12Report {
    pub yh: ZeroVerdict,
    pub zh: ZeroVerdict,
    pub hdot: String,
    pub condition: String,
    pub condition_at_point: f64,
    pub numeric: VerificationReport,
}

fn domain_with_jets(domain: &DomainBox) -> DomainBox {
    let mut d = domain.clone();
    for v in ["x1", "x2"] {
        if !d.ranges.contains_key(v) {
            d = d.with(v, -2.0, 2.0);
        }
    }
    d
}

/// Builds the order `(1, 2)` parameterization `x = v0`, `(y, z)` from
/// `(u0, u1) = (h, h')` at `point`, a map over `x, y, z, x1, x2`.
pub fn construct_order12(
    nf: &NormalForm12,
    h: &Expr,
    point: &BTreeMap<String, f64>,
    germs: &GermConfig,
    seed: u64,
) -> Result<(Parameterization, Order12Report)> {
    for v in h.variables() {
        if !["x", "y", "z", "x1"].contains(&v.as_str()) {
            return Err(Error::Unregistered(v));
        }
    }
    let domain = domain_with_jets(&nf.domain);
    let yh = is_zero(&nf.y_field(h), &domain, sub_seed(seed, 1))?;
    if yh.is_nonzero() {
        let witness = serde_json::to_string(&yh).unwrap_or_default();
        return Err(Error::Verification(format!("Y h is not zero, witness {witness}")));
    }
    let zh = is_zero(&nf.z_field(h), &domain, sub_seed(seed, 2))?;
    if zh.is_zero() {
        return Err(Error::Verification("Z h vanishes identically".into()));
    }
    let pt: HashMap<String, f64> = point.iter().map(|(k, v)| (k.clone(), *v)).collect();
    for v in ["x", "y", "z", "x1", "x2"] {
        if !pt.contains_key(v) {
            return Err(Error::Unbound(v.into()));
        }
    }
    let cond = nf.condition();
    let cond_at = eval(&cond, &pt)?;
    if cond_at.abs() <= POINT_TOL {
        return Err(Error::Precondition(format!("the order-(1,2) condition {cond} vanishes at the point")));
    }
    let hdot = nf.hdot(h);
    let mut base = point.clone();
    base.insert("u0".into(), eval(h, &pt)?);
    base.insert("u1".into(), eval(&hdot, &pt)?);
    base.insert("v0".into(), pt["x"]);
    base.insert("v1".into(), pt["x1"]);
    base.insert("v2".into(), pt["x2"]);
    let par = Parameterization {
        k: 1,
        l: 2,
        depth: Some(2),
        kind: ParamKind::ImplicitInverse {
            h: h.clone(),
            hdot: hdot.clone(),
            base_point: base,
            newton: NewtonSettings::default(),
        },
    };
    let (u, v) = par.base_jet().expect("base point is complete");
    let [x, y, z] = par.evaluator()?.eval(&u, &v)?;
    if (x - pt["x"]).abs() > 0.0 || (y - pt["y"]).abs() > 1e-9 || (z - pt["z"]).abs() > 1e-9 {
        return Err(Error::Verification(format!("inversion does not reproduce the point: ({x}, {y}, {z})")));
    }
    let numeric = verify_numeric(&par, &nf.as_system()?, germs, sub_seed(seed, 3))?;
    if !numeric.passed() {
        return Err(Error::Verification(format!("germ residual too large: {}", numeric.to_json())));
    }
    let report = Order12Report {
        yh,
        zh,
        hdot: hdot.to_string(),
        condition: cond.to_string(),
        condition_at_point: cond_at,
        numeric,
    };
    Ok((par, report))
}
