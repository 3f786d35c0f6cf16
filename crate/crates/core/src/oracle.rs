//! Numeric ground truth: fixed-step RK4 integration of the system along
//! prescribed polynomial `x(t)`, `y(t)`, residuals on trajectories, and
//! finite-difference checks of symbolic derivatives.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::richardson;
use crate::symcore::{diff, normalize, Compiled, Expr};
use crate::system::SystemDef;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorSettings {
    pub method: String,
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
}

/// Samples of a solution on a uniform grid, with the exact `x'`, `y'`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub xdot: Vec<f64>,
    pub ydot: Vec<f64>,
    pub settings: IntegratorSettings,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.settings.dt
    }

    /// CSV with header `t,x,y,z` and 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,x,y,z\n");
        for i in 0..self.len() {
            let _ = writeln!(s, "{:.16e},{:.16e},{:.16e},{:.16e}", self.t[i], self.x[i], self.y[i], self.z[i]);
        }
        s
    }
}

struct TimeFn {
    f: Compiled,
    df: Compiled,
}

impl TimeFn {
    fn new(e: &Expr) -> Result<TimeFn> {
        if let Some(v) = e.variables().into_iter().find(|v| v != "t") {
            return Err(Error::Unregistered(v));
        }
        if !e.is_rational_fragment() {
            return Err(Error::Unsupported("x(t) and y(t) must be polynomials in t".into()));
        }
        let names = vec!["t".to_string()];
        Ok(TimeFn { f: Compiled::new(e, &names)?, df: Compiled::new(&normalize(&diff(e, "t")), &names)? })
    }

    fn at(&self, t: f64) -> Result<(f64, f64)> {
        match (self.f.eval(&[t]), self.df.eval(&[t])) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(Error::Numeric(format!("input undefined at t = {t}"))),
        }
    }
}

fn check_domain(sys: &SystemDef, name: &str, value: f64, t: f64) -> Result<()> {
    if let Some(&(lo, hi)) = sys.domain.ranges.get(name) {
        if !(lo..=hi).contains(&value) {
            return Err(Error::Domain {
                subterm: name.into(),
                msg: format!("{name} = {value} leaves [{lo}, {hi}] at t = {t}"),
            });
        }
    }
    Ok(())
}

/// Integrates `z' = h(x, y, z, y' - z x') + g(...) x'` with classical RK4,
/// `x(t)` and `y(t)` given as polynomials in `t`.
pub fn simulate(
    sys: &SystemDef,
    x_poly: &Expr,
    y_poly: &Expr,
    z0: f64,
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<Trajectory> {
    if dt.is_nan() || dt <= 0.0 || t0.is_nan() || t1.is_nan() || t1 <= t0 {
        return Err(Error::Precondition(format!("need t1 > t0 and dt > 0, got [{t0}, {t1}], dt = {dt}")));
    }
    let xs = TimeFn::new(x_poly)?;
    let ys = TimeFn::new(y_poly)?;
    let names: Vec<String> = ["x", "y", "z", "lam"].iter().map(|s| s.to_string()).collect();
    let g = Compiled::new(&sys.g, &names)?;
    let h = Compiled::new(&sys.h, &names)?;
    let rhs = |t: f64, z: f64| -> Result<f64> {
        let (x, xd) = xs.at(t)?;
        let (y, yd) = ys.at(t)?;
        let a = [x, y, z, yd - z * xd];
        match (h.eval(&a), g.eval(&a)) {
            (Some(hv), Some(gv)) if (hv + gv * xd).is_finite() => Ok(hv + gv * xd),
            _ => Err(Error::Numeric(format!("right-hand side undefined at t = {t}, z = {z}"))),
        }
    };
    let steps = ((t1 - t0) / dt).round() as usize;
    let mut traj = Trajectory {
        t: Vec::with_capacity(steps + 1),
        x: Vec::with_capacity(steps + 1),
        y: Vec::with_capacity(steps + 1),
        z: Vec::with_capacity(steps + 1),
        xdot: Vec::with_capacity(steps + 1),
        ydot: Vec::with_capacity(steps + 1),
        settings: IntegratorSettings { method: "rk4".into(), t0, t1, dt },
    };
    let mut z = z0;
    for i in 0..=steps {
        let t = t0 + i as f64 * dt;
        let (x, xd) = xs.at(t)?;
        let (y, yd) = ys.at(t)?;
        check_domain(sys, "x", x, t)?;
        check_domain(sys, "y", y, t)?;
        check_domain(sys, "z", z, t)?;
        traj.t.push(t);
        traj.x.push(x);
        traj.y.push(y);
        traj.z.push(z);
        traj.xdot.push(xd);
        traj.ydot.push(yd);
        if i == steps {
            break;
        }
        let k1 = rhs(t, z)?;
        let k2 = rhs(t + dt / 2.0, z + dt / 2.0 * k1)?;
        let k3 = rhs(t + dt / 2.0, z + dt / 2.0 * k2)?;
        let k4 = rhs(t + dt, z + dt * k3)?;
        z += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !z.is_finite() {
            return Err(Error::Numeric(format!("integration blew up at t = {t}")));
        }
    }
    Ok(traj)
}

/// Largest `|z' - h - g x'|` over interior grid points, with `z'` from the
/// fourth-order central difference.
pub fn residual_on_trajectory(traj: &Trajectory, sys: &SystemDef) -> Result<f64> {
    let n = traj.len();
    if n < 5 {
        return Err(Error::Precondition("a residual needs at least 5 samples".into()));
    }
    let names: Vec<String> = ["x", "y", "z", "lam"].iter().map(|s| s.to_string()).collect();
    let g = Compiled::new(&sys.g, &names)?;
    let h = Compiled::new(&sys.h, &names)?;
    let dt = traj.dt();
    let mut worst: f64 = 0.0;
    for i in 2..n - 2 {
        let z = &traj.z;
        let zd = (-z[i + 2] + 8.0 * z[i + 1] - 8.0 * z[i - 1] + z[i - 2]) / (12.0 * dt);
        let a = [traj.x[i], traj.y[i], z[i], traj.ydot[i] - z[i] * traj.xdot[i]];
        let (Some(hv), Some(gv)) = (h.eval(&a), g.eval(&a)) else {
            return Err(Error::Numeric(format!("system undefined at t = {}", traj.t[i])));
        };
        worst = worst.max((zd - hv - gv * traj.xdot[i]).abs());
    }
    Ok(worst)
}

/// Outcome of comparing a symbolic derivative with finite differences.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FdReport {
    /// Largest relative error over well-conditioned points.
    pub max_relative_error: f64,
    /// Indices of points where the difference quotient is unreliable.
    pub ill_conditioned: Vec<usize>,
    pub errors: Vec<f64>,
}

/// Compares `d e / d var` against Richardson central differences at each
/// point. A point is flagged ill-conditioned when the quotient is undefined
/// or the estimates at two step sizes disagree.
pub fn fd_check(e: &Expr, var: &str, points: &[HashMap<String, f64>]) -> Result<FdReport> {
    let mut names = e.variables();
    if !names.iter().any(|n| n == var) {
        names.push(var.to_string());
    }
    let f = Compiled::new(e, &names)?;
    let df = Compiled::new(&normalize(&diff(e, var)), &names)?;
    let idx = names.iter().position(|n| n == var).expect("var is registered");
    let mut report = FdReport { max_relative_error: 0.0, ill_conditioned: Vec::new(), errors: Vec::new() };
    for (i, pt) in points.iter().enumerate() {
        let vals: Vec<f64> =
            names.iter().map(|n| pt.get(n).copied().ok_or_else(|| Error::Unbound(n.clone()))).collect::<Result<_>>()?;
        let exact = df.eval(&vals).ok_or_else(|| Error::Numeric(format!("derivative undefined at point {i}")))?;
        let at = |s: f64| {
            let mut a = vals.clone();
            a[idx] = s;
            f.eval(&a)
        };
        let h = 1e-3 * vals[idx].abs().max(1e-2);
        let coarse = richardson(at, vals[idx], h);
        let fine = richardson(at, vals[idx], h / 4.0);
        let err = match (coarse, fine) {
            (Some(c), Some(fv)) => {
                let scale = exact.abs().max(1.0);
                if (c - fv).abs() / scale > 1e-4 {
                    report.ill_conditioned.push(i);
                }
                (fv - exact).abs() / scale
            }
            _ => {
                report.ill_conditioned.push(i);
                f64::INFINITY
            }
        };
        report.errors.push(err);
        if !report.ill_conditioned.contains(&i) {
            report.max_relative_error = report.max_relative_error.max(err);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::ex;

    #[test]
    fn linear_fixture() {
        let sys = SystemDef::parse("lam", "y").unwrap();
        let tr = simulate(&sys, &ex("t"), &ex("t^2"), 0.0, 0.0, 1.0, 1e-3).unwrap();
        let err = tr.t.iter().zip(&tr.z).map(|(t, z)| (z - t * t).abs()).fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
        assert!(residual_on_trajectory(&tr, &sys).unwrap() < 1e-6);
    }
}
