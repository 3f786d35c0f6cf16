//! Exterior calculus on `(x, y, z, lam)`, the structure forms of a system
//! and the invariants S, T, J.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::symcore::{diff, ex, is_zero, normalize, sub_seed, substitute_pairs, DomainBox, Expr, ZeroVerdict};
use crate::system::SystemDef;

/// Coordinates, in index order.
pub const COORDS: [&str; 4] = ["x", "y", "z", "lam"];

/// A differential form on `(x, y, z, lam)`: strictly increasing index tuples
/// mapped to coefficients. Absent keys are zero coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct DifferentialForm {
    degree: usize,
    comps: BTreeMap<Vec<u8>, Expr>,
}

impl DifferentialForm {
    pub fn zero(degree: usize) -> Self {
        DifferentialForm { degree, comps: BTreeMap::new() }
    }

    /// A 0-form.
    pub fn function(f: Expr) -> Self {
        let mut out = Self::zero(0);
        out.insert(vec![], f);
        out
    }

    /// `coeffs[0] dx + coeffs[1] dy + coeffs[2] dz + coeffs[3] dlam`.
    pub fn one_form(coeffs: [Expr; 4]) -> Self {
        let mut out = Self::zero(1);
        for (i, c) in coeffs.into_iter().enumerate() {
            out.insert(vec![i as u8], c);
        }
        out
    }

    /// The basis 1-form `d(COORDS[i])`.
    pub fn basis(i: usize) -> Self {
        let mut out = Self::zero(1);
        out.insert(vec![i as u8], Expr::one());
        out
    }

    /// Builds a form from `(indices, coefficient)` pairs; indices in any
    /// order, the sign of the sorting permutation is applied.
    pub fn from_terms(degree: usize, terms: Vec<(Vec<u8>, Expr)>) -> Result<Self> {
        let mut out = Self::zero(degree);
        for (idx, c) in terms {
            if idx.len() != degree || idx.iter().any(|i| *i > 3) {
                return Err(Error::Degree(format!("index tuple {idx:?} does not fit degree {degree}")));
            }
            let Some((sorted, sign)) = sort_with_sign(&idx) else { continue };
            out.accumulate(sorted, if sign { Expr::neg(c) } else { c });
        }
        Ok(out.normalized())
    }

    fn insert(&mut self, idx: Vec<u8>, c: Expr) {
        if !c.is_zero() {
            self.comps.insert(idx, c);
        }
    }

    fn accumulate(&mut self, idx: Vec<u8>, c: Expr) {
        let cur = self.comps.remove(&idx);
        let next = match cur {
            Some(prev) => Expr::sum(vec![prev, c]),
            None => c,
        };
        self.insert(idx, next);
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn component(&self, idx: &[u8]) -> Expr {
        self.comps.get(idx).cloned().unwrap_or_else(Expr::zero)
    }

    pub fn components(&self) -> impl Iterator<Item = (&Vec<u8>, &Expr)> {
        self.comps.iter()
    }

    /// Coefficients brought to normal form; zero coefficients dropped.
    pub fn normalized(&self) -> Self {
        let mut out = Self::zero(self.degree);
        for (k, v) in &self.comps {
            out.insert(k.clone(), normalize(v));
        }
        out
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.degree, o.degree, "adding forms of different degree");
        let mut out = self.clone();
        for (k, v) in &o.comps {
            out.accumulate(k.clone(), v.clone());
        }
        out.normalized()
    }

    pub fn scale(&self, f: &Expr) -> Self {
        let mut out = Self::zero(self.degree);
        for (k, v) in &self.comps {
            out.insert(k.clone(), normalize(&Expr::product(vec![f.clone(), v.clone()])));
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(&Expr::int(-1))
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    /// True when every normalized coefficient is the literal zero.
    pub fn is_literally_zero(&self) -> bool {
        self.normalized().comps.is_empty()
    }

    /// Zero-tests every coefficient; returns the first nonzero verdict.
    pub fn zero_test(&self, domain: &DomainBox, seed: u64) -> Result<ZeroVerdict> {
        let mut weakest = ZeroVerdict::ProvedZero;
        for (i, v) in self.comps.values().enumerate() {
            let verdict = is_zero(v, domain, sub_seed(seed, i as u64))?;
            match verdict {
                ZeroVerdict::NonZero { .. } => return Ok(verdict),
                ZeroVerdict::ProbablyZero { .. } => weakest = verdict,
                ZeroVerdict::ProvedZero => {}
            }
        }
        Ok(weakest)
    }
}

/// Sorts indices; `None` on a repeated index, otherwise the sorted tuple and
/// whether the permutation is odd.
fn sort_with_sign(idx: &[u8]) -> Option<(Vec<u8>, bool)> {
    let mut v = idx.to_vec();
    let mut odd = false;
    for i in 0..v.len() {
        for j in 0..v.len() - 1 - i {
            if v[j] == v[j + 1] {
                return None;
            }
            if v[j] > v[j + 1] {
                v.swap(j, j + 1);
                odd = !odd;
            }
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((v, odd))
}

/// Graded-antisymmetric exterior product.
pub fn wedge(a: &DifferentialForm, b: &DifferentialForm) -> Result<DifferentialForm> {
    let degree = a.degree + b.degree;
    if degree > 4 {
        return Err(Error::Degree(format!("wedge of degrees {} and {} exceeds 4", a.degree, b.degree)));
    }
    let mut out = DifferentialForm::zero(degree);
    for (i, ca) in &a.comps {
        for (j, cb) in &b.comps {
            let mut idx = i.clone();
            idx.extend_from_slice(j);
            let Some((sorted, odd)) = sort_with_sign(&idx) else { continue };
            let mut c = Expr::product(vec![ca.clone(), cb.clone()]);
            if odd {
                c = Expr::neg(c);
            }
            out.accumulate(sorted, c);
        }
    }
    Ok(out.normalized())
}

/// Wedge of several forms, left to right.
pub fn wedge_all(forms: &[&DifferentialForm]) -> Result<DifferentialForm> {
    let mut acc = DifferentialForm::function(Expr::one());
    for f in forms {
        acc = wedge(&acc, f)?;
    }
    Ok(acc)
}

/// Exterior derivative.
pub fn exterior_derivative(a: &DifferentialForm) -> Result<DifferentialForm> {
    if a.degree > 3 {
        return Err(Error::Degree("exterior derivative of a 4-form".into()));
    }
    let mut out = DifferentialForm::zero(a.degree + 1);
    for (idx, c) in &a.comps {
        for (k, name) in COORDS.iter().enumerate() {
            let k = k as u8;
            if idx.contains(&k) {
                continue;
            }
            let dc = diff(c, name);
            if dc.is_zero() {
                continue;
            }
            let mut full = vec![k];
            full.extend_from_slice(idx);
            let (sorted, odd) = sort_with_sign(&full).unwrap();
            out.accumulate(sorted, if odd { Expr::neg(dc) } else { dc });
        }
    }
    Ok(out.normalized())
}

/// The forms `ω¹`, `ω`, `η` attached to a system.
#[derive(Clone, Debug, PartialEq)]
pub struct StructureForms {
    pub omega1: DifferentialForm,
    pub omega: DifferentialForm,
    pub eta: DifferentialForm,
}

/// Builds `ω¹ = dy - z dx`,
/// `ω = -2 g₄² dx + (g₄₄ h₄ - g₄ h₄₄) ω¹ - g₄₄ (dz - g dx)` and
/// `η = dz - g dx - h₄ ω¹`, where subscript 4 is `∂/∂lam`.
pub fn structure_forms(sys: &SystemDef, seed: u64) -> Result<StructureForms> {
    sys.check_g4(seed)?;
    let (g, g4, g44) = (sys.g.clone(), sys.g_lam(1), sys.g_lam(2));
    let (h4, h44) = (sys.h_lam(1), sys.h_lam(2));
    let omega1 = DifferentialForm::one_form([Expr::neg(ex("z")), Expr::one(), Expr::zero(), Expr::zero()]);
    let dz_minus_gdx = DifferentialForm::one_form([Expr::neg(g.clone()), Expr::zero(), Expr::one(), Expr::zero()]);
    let k1 = Expr::sub(Expr::product(vec![g44.clone(), h4.clone()]), Expr::product(vec![g4.clone(), h44]));
    let omega = DifferentialForm::one_form([
        Expr::product(vec![Expr::int(-2), Expr::pow(g4, 2)]),
        Expr::zero(),
        Expr::zero(),
        Expr::zero(),
    ])
    .add(&omega1.scale(&k1))
    .sub(&dz_minus_gdx.scale(&g44));
    let eta = dz_minus_gdx.sub(&omega1.scale(&h4));
    Ok(StructureForms { omega1, omega, eta })
}

/// Class of a system according to its invariants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    /// `S = T = J = 0`.
    FSystem,
    /// `S = T = 0`, `J` not identically zero.
    #[serde(rename = "ST0_JNonzero")]
    St0JNonzero,
    /// `S` or `T` not identically zero.
    General,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::FSystem => "FSystem",
            Classification::St0JNonzero => "ST0_JNonzero",
            Classification::General => "General",
        }
    }
}

/// Invariants, their closed-form counterparts, verdicts and classification.
#[derive(Clone, Debug, PartialEq)]
pub struct StjReport {
    pub s: Expr,
    pub t: Expr,
    pub j: Expr,
    pub s_closed: Expr,
    pub t_closed: Expr,
    pub verdicts: [ZeroVerdict; 3],
    pub classification: Classification,
    pub notes: Vec<String>,
}

impl StjReport {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "S": self.s.to_string(),
            "T": self.t.to_string(),
            "J": self.j.to_string(),
            "class": self.classification.as_str(),
            "notes": self.notes,
            "verdicts": {
                "S": self.verdicts[0].label(),
                "T": self.verdicts[1].label(),
                "J": self.verdicts[2].label(),
            },
        })
    }
}

/// Closed forms `S = 2 g₄ g₄₄₄ - 3 g₄₄²` and `T = 2 g₄ h₄₄₄ - 3 g₄₄ h₄₄`.
pub fn closed_st(sys: &SystemDef) -> (Expr, Expr) {
    let (g4, g44, g444) = (sys.g_lam(1), sys.g_lam(2), sys.g_lam(3));
    let (h44, h444) = (sys.h_lam(2), sys.h_lam(3));
    let s = ex("2*a*b - 3*c^2");
    let s = substitute_pairs(&s, &[("a", g4.clone()), ("b", g444), ("c", g44.clone())]);
    let t = substitute_pairs(&ex("2*a*b - 3*c*d"), &[("a", g4), ("b", h444), ("c", g44), ("d", h44)]);
    (normalize(&s), normalize(&t))
}

fn det3(m: &[[Expr; 3]; 3]) -> Expr {
    let p = |a: &Expr, b: &Expr| Expr::product(vec![a.clone(), b.clone()]);
    let minor = |a, b, c, d| Expr::sub(p(a, b), p(c, d));
    normalize(&Expr::sum(vec![
        p(&m[0][0], &minor(&m[1][1], &m[2][2], &m[1][2], &m[2][1])),
        Expr::neg(p(&m[0][1], &minor(&m[1][0], &m[2][2], &m[1][2], &m[2][0]))),
        p(&m[0][2], &minor(&m[1][0], &m[2][1], &m[1][1], &m[2][0])),
    ]))
}

/// Rewrites `a` in the coframe `(dx, ω¹, η, dlam)`. Valid because `ω¹`
/// has no `dz`, `dlam` part and `η` no `dlam` part, with unit `dy` and `dz`
/// coefficients respectively.
fn in_adapted_coframe(a: &DifferentialForm, sf: &StructureForms) -> Result<DifferentialForm> {
    let f = |i: usize| DifferentialForm::basis(i);
    let e1 = f(1).sub(&f(0).scale(&sf.omega1.component(&[0])));
    let e2 = f(2).sub(&f(0).scale(&sf.eta.component(&[0]))).sub(&e1.scale(&sf.eta.component(&[1])));
    let frame = [f(0), e1, e2, f(3)];
    let mut out = DifferentialForm::zero(a.degree());
    for (idx, c) in a.components() {
        let parts: Vec<&DifferentialForm> = idx.iter().map(|i| &frame[*i as usize]).collect();
        out = out.add(&wedge_all(&parts)?.scale(c));
    }
    Ok(out.normalized())
}

/// Solves `Σ_k c_k adapted[k] = target` by repeatedly taking a row with a
/// single unsolved unknown. `None` when no such row is left.
fn solve_by_substitution(
    adapted: &[DifferentialForm],
    target: &DifferentialForm,
    domain: &DomainBox,
    seed: u64,
) -> Result<Option<[Expr; 3]>> {
    let rows: [[u8; 3]; 4] = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];
    let mut solved: [Option<Expr>; 3] = [None, None, None];
    let mut nonzero = BTreeMap::new();
    for (r, row) in rows.iter().enumerate() {
        for (k, b) in adapted.iter().enumerate() {
            let v = is_zero(&b.component(row), domain, sub_seed(seed, 100 + 4 * r as u64 + k as u64))?;
            nonzero.insert((r, k), v.is_nonzero());
        }
    }
    while solved.iter().any(Option::is_none) {
        let pick = rows.iter().enumerate().find_map(|(r, _)| {
            let open: Vec<usize> = (0..3).filter(|k| solved[*k].is_none() && nonzero[&(r, *k)]).collect();
            (open.len() == 1).then(|| (r, open[0]))
        });
        let Some((r, k)) = pick else { return Ok(None) };
        let mut rest = vec![target.component(&rows[r])];
        for (j, c) in solved.iter().enumerate() {
            if let Some(c) = c {
                rest.push(Expr::neg(Expr::product(vec![c.clone(), adapted[j].component(&rows[r])])));
            }
        }
        solved[k] = Some(normalize(&Expr::quot(Expr::sum(rest), adapted[k].component(&rows[r]))));
    }
    Ok(Some(solved.map(|c| c.expect("all solved"))))
}

fn solve_by_cramer(
    adapted: &[DifferentialForm],
    target: &DifferentialForm,
    domain: &DomainBox,
    seed: u64,
) -> Result<Option<[Expr; 3]>> {
    let rows: [[u8; 3]; 4] = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];
    for skip in (0..4).rev() {
        let chosen: Vec<&[u8; 3]> = rows.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, r)| r).collect();
        let m: [[Expr; 3]; 3] = std::array::from_fn(|r| std::array::from_fn(|c| adapted[c].component(chosen[r])));
        let det = det3(&m);
        if is_zero(&det, domain, sub_seed(seed, 150 + skip as u64))?.is_zero() {
            continue;
        }
        let rhs: [Expr; 3] = std::array::from_fn(|r| target.component(chosen[r]));
        return Ok(Some(std::array::from_fn(|k| {
            let mut mk = m.clone();
            for r in 0..3 {
                mk[r][k] = rhs[r].clone();
            }
            normalize(&Expr::quot(det3(&mk), det.clone()))
        })));
    }
    Ok(None)
}

/// Coefficients `(c1, c2, c3)` of `dω∧ω` on the basis
/// `dlam∧η∧ω, dlam∧ω¹∧ω, ω¹∧η∧ω`, together with `dω∧ω` itself.
///
/// The 4×3 system is written in the coframe `(dx, ω¹, η, dlam)`, where it is
/// nearly triangular, and solved by substitution (Cramer's rule on three
/// independent rows if that stalls). The redundant row is checked by zero
/// test.
pub fn decompose(sf: &StructureForms, domain: &DomainBox, seed: u64) -> Result<([Expr; 3], DifferentialForm)> {
    let dlam = DifferentialForm::basis(3);
    let target = wedge(&exterior_derivative(&sf.omega)?, &sf.omega)?;
    let basis = [
        wedge_all(&[&dlam, &sf.eta, &sf.omega])?,
        wedge_all(&[&dlam, &sf.omega1, &sf.omega])?,
        wedge_all(&[&sf.omega1, &sf.eta, &sf.omega])?,
    ];
    let adapted_target = in_adapted_coframe(&target, sf)?;
    let adapted: Vec<DifferentialForm> = basis.iter().map(|b| in_adapted_coframe(b, sf)).collect::<Result<_>>()?;
    let coeffs = match solve_by_substitution(&adapted, &adapted_target, domain, seed)? {
        Some(c) => c,
        None => solve_by_cramer(&adapted, &adapted_target, domain, seed)?
            .ok_or_else(|| Error::Inconsistent("adapted basis is degenerate".into()))?,
    };
    let mut recon = DifferentialForm::zero(3);
    for k in 0..3 {
        recon = recon.add(&adapted[k].scale(&coeffs[k]));
    }
    if adapted_target.sub(&recon).zero_test(domain, sub_seed(seed, 200))?.is_nonzero() {
        return Err(Error::Inconsistent("dω∧ω is not in the span of the adapted basis".into()));
    }
    Ok((coeffs, target))
}

/// S, T, J from the decomposition, cross-checked against the closed forms.
pub fn compute_stj(sys: &SystemDef, seed: u64) -> Result<StjReport> {
    let sf = structure_forms(sys, seed)?;
    let ([c1, c2, c3], _) = decompose(&sf, &sys.domain, seed)?;
    let s = normalize(&Expr::product(vec![Expr::int(-2), sys.g_lam(1), c1]));
    let t = normalize(&Expr::product(vec![Expr::int(-2), c2]));
    let j = normalize(&Expr::neg(c3));
    let (s_closed, t_closed) = closed_st(sys);
    for (name, a, b) in [("S", &s, &s_closed), ("T", &t, &t_closed)] {
        let v = is_zero(&Expr::sub(a.clone(), b.clone()), &sys.domain, sub_seed(seed, 300))?;
        if v.is_nonzero() {
            return Err(Error::Inconsistent(format!("{name} = {a} disagrees with closed form {b}")));
        }
    }
    let verdicts = [
        is_zero(&s, &sys.domain, sub_seed(seed, 1))?,
        is_zero(&t, &sys.domain, sub_seed(seed, 2))?,
        is_zero(&j, &sys.domain, sub_seed(seed, 3))?,
    ];
    let classification = match (verdicts[0].is_zero() && verdicts[1].is_zero(), verdicts[2].is_zero()) {
        (true, true) => Classification::FSystem,
        (true, false) => Classification::St0JNonzero,
        _ => Classification::General,
    };
    Ok(StjReport { s, t, j, s_closed, t_closed, verdicts, classification, notes: vec![] })
}

pub const NOTE_ORDER_12: &str = "S = T = J = 0: admits a parameterization of order (1,2) away from singularities";
pub const NOTE_TWO_BRANCHES: &str =
    "S = T = 0, J != 0: any parameterization derives from a regular solution of E^{γ¹,δ¹}_{k,ℓ} or E^{γ²,δ²}_{k,ℓ}";
pub const NOTE_ONE_PDE: &str =
    "S and T not both zero: any parameterization derives from a regular solution of E^{γ,δ}_{k,ℓ}";
pub const NOTE_ORDER_BOUND: &str =
    "no order with k ≤ 2 or k = ℓ = 3: any parameterization of order (k,ℓ), k ≤ ℓ, has k ≥ 3 and ℓ ≥ 4";
pub const NOTE_OPEN: &str = "existence of a parameterization of any order is open (conjectured: none)";

/// [`compute_stj`] with the consequences for parameterizations attached.
pub fn classify(sys: &SystemDef, seed: u64) -> Result<StjReport> {
    let mut r = compute_stj(sys, seed)?;
    r.notes = match r.classification {
        Classification::FSystem => vec![NOTE_ORDER_12.into()],
        Classification::St0JNonzero => vec![NOTE_TWO_BRANCHES.into(), NOTE_ORDER_BOUND.into(), NOTE_OPEN.into()],
        Classification::General => vec![NOTE_ONE_PDE.into(), NOTE_ORDER_BOUND.into(), NOTE_OPEN.into()],
    };
    Ok(r)
}

/// Coefficients of the bilinear form
/// `lam (b1 x' + a2 lam - c1 z') + (b0 x' + a1 lam - c0 z') + a0 = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParaboloidCoeffs {
    pub a0: Expr,
    pub a1: Expr,
    pub a2: Expr,
    pub b0: Expr,
    pub b1: Expr,
    pub c0: Expr,
    pub c1: Expr,
}

/// Checks that the bilinear form above is equivalent to the system: it
/// vanishes identically once `z'` is replaced by `h + g x'`.
pub fn verify_paraboloid_form(sys: &SystemDef, k: &ParaboloidCoeffs, seed: u64) -> Result<ZeroVerdict> {
    let r = compute_stj(sys, seed)?;
    if r.verdicts[0].is_nonzero() || r.verdicts[1].is_nonzero() {
        return Err(Error::Precondition("S and T must vanish identically".into()));
    }
    let lead = normalize(&Expr::sum(vec![k.c0.clone(), Expr::product(vec![k.c1.clone(), ex("lam")])]));
    if is_zero(&lead, &sys.domain, sub_seed(seed, 10))?.is_zero() {
        return Err(Error::Precondition("c0 + c1 lam vanishes identically".into()));
    }
    let cross =
        Expr::sub(Expr::product(vec![k.c1.clone(), k.b0.clone()]), Expr::product(vec![k.b1.clone(), k.c0.clone()]));
    if is_zero(&cross, &sys.domain, sub_seed(seed, 11))?.is_zero() {
        return Err(Error::Precondition("c1 b0 - b1 c0 vanishes identically".into()));
    }
    let form = substitute_pairs(
        &ex("lam*(b1*x1 + a2*lam - c1*z1) + (b0*x1 + a1*lam - c0*z1) + a0"),
        &[
            ("a0", k.a0.clone()),
            ("a1", k.a1.clone()),
            ("a2", k.a2.clone()),
            ("b0", k.b0.clone()),
            ("b1", k.b1.clone()),
            ("c0", k.c0.clone()),
            ("c1", k.c1.clone()),
        ],
    );
    let zdot = Expr::sum(vec![sys.h.clone(), Expr::product(vec![sys.g.clone(), ex("x1")])]);
    let residual = substitute_pairs(&form, &[("z1", zdot)]);
    is_zero(&residual, &sys.domain, sub_seed(seed, 12))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn antisymmetry_basics() {
        let dx = DifferentialForm::basis(0);
        let dy = DifferentialForm::basis(1);
        assert!(wedge(&dx, &dx).unwrap().is_literally_zero());
        let yx = wedge(&dy, &dx).unwrap();
        assert_eq!(yx.component(&[0, 1]), Expr::int(-1));
        let ydx = DifferentialForm::one_form([ex("y"), Expr::zero(), Expr::zero(), Expr::zero()]);
        assert_eq!(exterior_derivative(&ydx).unwrap().component(&[0, 1]), Expr::int(-1));
    }

    #[test]
    fn invariants_of_the_three_examples() {
        // J of the second system is -2 under the defining decomposition; an
        // independent exterior-algebra computation gives the same value.
        for (g, h, stj) in [
            ("lam", "y", ["0", "0", "0"]),
            ("lam", "y + lam^2", ["0", "0", "(-2)"]),
            ("lam^2", "y", ["(-12)", "0", "0"]),
        ] {
            let r = compute_stj(&SystemDef::parse(g, h).unwrap(), 42).unwrap();
            assert_eq!([r.s.to_string(), r.t.to_string(), r.j.to_string()], stj, "g = {g}, h = {h}");
        }
    }

    #[test]
    fn degree_overflow() {
        let three = DifferentialForm::from_terms(3, vec![(vec![0, 1, 2], Expr::one())]).unwrap();
        assert!(wedge(&three, &three).is_err());
    }
}
