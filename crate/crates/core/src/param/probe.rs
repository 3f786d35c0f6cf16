use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::{apply_d, u_name, v_name};
use crate::numeric::{determinant, richardson};
use crate::pde::{sigma_tau, PdeSystem};
use crate::symcore::{diff, normalize, rng_for, Compiled, DomainBox, Expr};

/// Determinant of one `(i0, j0)` block at one sampled point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetSample {
    pub point: BTreeMap<String, f64>,
    /// From the symbolic Jacobian entries.
    pub value: f64,
    /// From finite differences of the compiled components.
    pub fd_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairSamples {
    pub i0: usize,
    pub j0: usize,
    pub det_samples: Vec<DetSample>,
}

impl PairSamples {
    fn nonzero(&self, tol: f64) -> bool {
        self.det_samples.iter().any(|s| s.value.abs() > tol)
    }
}

/// Search for a nonsingular block of the Jacobian of
/// `π = (p_x, p, Dp, ..., D^K p)` with respect to the top jets
/// `u{k-i0}..u{k-1}, v{l-j0}..v{l-1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub struct JacobianProbeReport {
    #[serde(rename = "K")]
    pub k_order: usize,
    pub i0: Option<usize>,
    pub j0: Option<usize>,
    pub pairs: Vec<PairSamples>,
    /// Largest `|value - fd_value| / max(1, |value|)` over all samples.
    pub max_fd_discrepancy: f64,
    pub inconclusive: bool,
}

/// Absolute threshold above which a sampled determinant counts as nonzero.
pub const DET_TOL: f64 = 1e-10;

/// The components of `π` as expressions.
pub fn pi_components(p: &Expr, pde: &PdeSystem, k_order: usize, domain: &DomainBox, seed: u64) -> Result<Vec<Expr>> {
    let cand = sigma_tau(p, pde, domain, seed)?;
    let tau = cand.tau.ok_or_else(|| Error::Precondition("p_u vanishes identically".into()))?;
    let mut ctx = pde.ctx.clone();
    let mut comps = vec![normalize(&diff(p, "x")), p.clone()];
    let mut cur = p.clone();
    for _ in 0..k_order {
        cur = apply_d(&cur, &mut ctx, &tau)?;
        comps.push(cur.clone());
    }
    Ok(comps)
}

pub fn jacobian_probe(
    p: &Expr,
    pde: &PdeSystem,
    k_order: usize,
    domain: &DomainBox,
    samples: usize,
    seed: u64,
) -> Result<JacobianProbeReport> {
    let (k, l) = (pde.k(), pde.l());
    let n = k_order + 2;
    if n > k + l {
        return Err(Error::Precondition(format!("K = {k_order} exceeds k + l - 2 = {}", k + l - 2)));
    }
    let comps = pi_components(p, pde, k_order, domain, seed)?;
    let mut vars: Vec<String> = Vec::new();
    for c in &comps {
        for v in c.variables() {
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
    }
    for name in (0..k).map(u_name).chain((0..l).map(v_name)) {
        if !vars.contains(&name) {
            vars.push(name);
        }
    }
    vars.sort();
    let compiled: Vec<Compiled> = comps.iter().map(|c| Compiled::new(c, &vars)).collect::<Result<_>>()?;
    let jet_cols: Vec<String> = (0..k).map(u_name).chain((0..l).map(v_name)).collect();
    let mut entries: Vec<Vec<Compiled>> = Vec::new();
    for c in &comps {
        let row =
            jet_cols.iter().map(|col| Compiled::new(&normalize(&diff(c, col)), &vars)).collect::<Result<Vec<_>>>()?;
        entries.push(row);
    }

    let mut pairs: Vec<PairSamples> = (0..=k)
        .filter_map(|i0| {
            let j0 = n.checked_sub(i0)?;
            (j0 <= l).then_some(PairSamples { i0, j0, det_samples: Vec::new() })
        })
        .collect();
    let mut rng = rng_for(seed);
    let mut discrepancy: f64 = 0.0;
    let mut attempts = 0;
    let mut taken = 0;
    while taken < samples && attempts < samples * 20 {
        attempts += 1;
        let pt = domain.sample(&vars, &mut rng);
        let vals: Vec<f64> = vars.iter().map(|v| pt[v]).collect();
        let Some(sym) = entries
            .iter()
            .map(|row| row.iter().map(|e| e.eval(&vals)).collect::<Option<Vec<f64>>>())
            .collect::<Option<Vec<_>>>()
        else {
            continue;
        };
        let Some(fd) = jacobian_fd(&compiled, &vars, &vals, &jet_cols) else { continue };
        taken += 1;
        let point: BTreeMap<String, f64> = pt.into_iter().collect();
        for pair in &mut pairs {
            let cols: Vec<usize> = (k - pair.i0..k).chain(k + l - pair.j0..k + l).collect();
            let block = |m: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
                m.iter().map(|row| cols.iter().map(|&c| row[c]).collect()).collect()
            };
            let value = determinant(block(&sym));
            let fd_value = determinant(block(&fd));
            discrepancy = discrepancy.max((value - fd_value).abs() / value.abs().max(1.0));
            pair.det_samples.push(DetSample { point: point.clone(), value, fd_value });
        }
    }
    if taken == 0 {
        return Err(Error::NoAdmissiblePoint { attempts });
    }
    let found = pairs.iter().find(|p| p.nonzero(DET_TOL));
    Ok(JacobianProbeReport {
        k_order,
        i0: found.map(|p| p.i0),
        j0: found.map(|p| p.j0),
        inconclusive: found.is_none(),
        pairs,
        max_fd_discrepancy: discrepancy,
    })
}

fn jacobian_fd(compiled: &[Compiled], vars: &[String], vals: &[f64], cols: &[String]) -> Option<Vec<Vec<f64>>> {
    let mut out = vec![vec![0.0; cols.len()]; compiled.len()];
    for (c, col) in cols.iter().enumerate() {
        let idx = vars.iter().position(|v| v == col)?;
        let h = 1e-3 * vals[idx].abs().max(1.0);
        for (r, f) in compiled.iter().enumerate() {
            let g = |s: f64| {
                let mut a = vals.to_vec();
                a[idx] = s;
                f.eval(&a)
            };
            out[r][c] = richardson(g, vals[idx], h)?;
        }
    }
    Some(out)
}
