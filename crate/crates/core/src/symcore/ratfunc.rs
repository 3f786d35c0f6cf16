//! Rational functions over Q in a table of atoms, and the canonical
//! normal form built on them.

use std::collections::{BTreeSet, HashMap};

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::expr::{Expr, Func, Node};
use super::poly::{gcd, Mono, Poly};
use super::registry::var_order_key;
use crate::scalar::{rational_sqrt, Scalar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatFunc {
    pub num: Poly,
    pub den: Poly,
}

impl RatFunc {
    pub fn from_poly(p: Poly) -> RatFunc {
        let n = p.nvars();
        RatFunc { num: p, den: Poly::one(n) }
    }

    pub fn constant(n: usize, c: BigRational) -> RatFunc {
        RatFunc::from_poly(Poly::constant(n, c))
    }

    /// Builds `num / den` in lowest terms with a monic denominator.
    pub fn new(num: Poly, den: Poly) -> Option<RatFunc> {
        if den.is_zero() {
            return None;
        }
        if num.is_zero() {
            return Some(RatFunc::from_poly(Poly::zero(num.nvars())));
        }
        let g = gcd(&num, &den);
        let (num, den) = if g.is_one() { (num, den) } else { (num.div_exact(&g).unwrap(), den.div_exact(&g).unwrap()) };
        Some(RatFunc::monic_den(num, den))
    }

    fn monic_den(num: Poly, den: Poly) -> RatFunc {
        let lc = den.leading().unwrap().1.clone();
        if lc.is_one() {
            RatFunc { num, den }
        } else {
            let k = lc.recip();
            RatFunc { num: num.scale(&k), den: den.scale(&k) }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn add(&self, o: &RatFunc) -> RatFunc {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            if self.den.is_one() {
                return RatFunc::from_poly(self.num.add(&o.num));
            }
            return RatFunc::new(self.num.add(&o.num), self.den.clone()).unwrap();
        }
        let g = gcd(&self.den, &o.den);
        let bg = self.den.div_exact(&g).unwrap();
        let dg = o.den.div_exact(&g).unwrap();
        let num = self.num.mul(&dg).add(&o.num.mul(&bg));
        let den = bg.mul(&o.den);
        if g.is_one() {
            return RatFunc::monic_den(num, den);
        }
        let h = gcd(&num, &g);
        if h.is_one() {
            RatFunc::monic_den(num, den)
        } else {
            RatFunc::monic_den(num.div_exact(&h).unwrap(), den.div_exact(&h).unwrap())
        }
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, o: &RatFunc) -> RatFunc {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &RatFunc) -> RatFunc {
        if self.is_zero() || o.is_zero() {
            return RatFunc::from_poly(Poly::zero(self.num.nvars()));
        }
        if self.den.is_one() && o.den.is_one() {
            return RatFunc::from_poly(self.num.mul(&o.num));
        }
        let g1 = gcd(&self.num, &o.den);
        let g2 = gcd(&o.num, &self.den);
        let a = self.num.div_exact(&g1).unwrap();
        let d = o.den.div_exact(&g1).unwrap();
        let c = o.num.div_exact(&g2).unwrap();
        let b = self.den.div_exact(&g2).unwrap();
        RatFunc::monic_den(a.mul(&c), b.mul(&d))
    }

    pub fn recip(&self) -> Option<RatFunc> {
        if self.is_zero() {
            return None;
        }
        Some(RatFunc::monic_den(self.den.clone(), self.num.clone()))
    }

    pub fn div(&self, o: &RatFunc) -> Option<RatFunc> {
        Some(self.mul(&o.recip()?))
    }

    pub fn pow(&self, e: i64) -> Option<RatFunc> {
        let base = if e < 0 { self.recip()? } else { self.clone() };
        let k = e.unsigned_abs() as u32;
        Some(RatFunc { num: base.num.pow(k), den: base.den.pow(k) })
    }
}

/// A symbol of a rational function: a variable or an elementary function
/// applied to a normalized argument.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Atom {
    Var(String),
    Func(Func, Expr),
}

impl Atom {
    fn sort_key(&self) -> (u8, u64, String) {
        match self {
            Atom::Var(v) => var_order_key(v),
            Atom::Func(f, a) => (6, 0, format!("{}{}", f.name(), a)),
        }
    }

    pub fn to_expr(&self) -> Expr {
        match self {
            Atom::Var(v) => Expr::var(v),
            Atom::Func(f, a) => Expr::func(*f, a.clone()),
        }
    }
}

/// Ordered atoms of a rational function, with the sqrt rewrite data.
#[derive(Clone, Debug, Default)]
pub struct AtomTable {
    pub atoms: Vec<Atom>,
    index: HashMap<Atom, usize>,
}

impl AtomTable {
    fn from_set(set: BTreeSet<AtomOrd>) -> AtomTable {
        let atoms: Vec<Atom> = set.into_iter().map(|a| a.1).collect();
        let index = atoms.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();
        AtomTable { atoms, index }
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn position(&self, a: &Atom) -> Option<usize> {
        self.index.get(a).copied()
    }

    pub fn only_variables(&self) -> bool {
        self.atoms.iter().all(|a| matches!(a, Atom::Var(_)))
    }

    /// Evaluates every atom at a point given by variable values.
    pub fn eval_atoms(&self, point: &HashMap<String, f64>) -> crate::Result<Vec<f64>> {
        self.atoms
            .iter()
            .map(|a| match a {
                Atom::Var(v) => point.get(v).copied().ok_or_else(|| crate::Error::Unbound(v.clone())),
                Atom::Func(..) => super::eval::eval(&a.to_expr(), point),
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct AtomOrd((u8, u64, String), Atom);

impl Ord for AtomOrd {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.cmp(&other.0)
    }
}

impl PartialOrd for AtomOrd {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug)]
struct ArgInfo {
    /// Normalized argument.
    arg: Expr,
    /// For sqrt: rational factor pulled out and the remaining radicand.
    sqrt_split: Option<(BigRational, Expr)>,
    /// Exact value when the function folds to a rational constant.
    folded: Option<BigRational>,
}

/// The normal form of an expression as a rational function, together with
/// its atom table and the domain caveats met on the way.
#[derive(Clone, Debug)]
pub struct Rational {
    pub table: AtomTable,
    pub value: RatFunc,
    pub caveats: Vec<String>,
}

impl Rational {
    pub fn to_expr(&self) -> Expr {
        let num = poly_to_expr(&self.value.num, &self.table);
        if self.value.den.is_one() {
            return num;
        }
        Expr::quot(num, poly_to_expr(&self.value.den, &self.table))
    }
}

fn poly_to_expr(p: &Poly, table: &AtomTable) -> Expr {
    let mut terms = Vec::with_capacity(p.len());
    for (m, c) in p.terms().rev() {
        let mut fs = vec![Expr::constant(c.clone())];
        for (i, e) in m.0.iter().enumerate() {
            if *e > 0 {
                fs.push(Expr::pow(table.atoms[i].to_expr(), *e as i64));
            }
        }
        terms.push(Expr::product(fs));
    }
    Expr::sum(terms)
}

#[derive(Default)]
struct Normalizer {
    args: HashMap<(Func, Expr), ArgInfo>,
    caveats: BTreeSet<String>,
}

#[derive(Debug)]
pub(crate) struct DivByZero(pub String);

impl Normalizer {
    fn info(&mut self, f: Func, a: &Expr) -> Result<ArgInfo, DivByZero> {
        if let Some(i) = self.args.get(&(f, a.clone())) {
            return Ok(i.clone());
        }
        let inner = self.run(a)?;
        for c in &inner.caveats {
            self.caveats.insert(c.clone());
        }
        let arg = inner.to_expr();
        let mut info = ArgInfo { arg: arg.clone(), sqrt_split: None, folded: None };
        if let Some(c) = arg.as_const() {
            info.folded = Scalar::apply(c, f);
        }
        if info.folded.is_none() {
            match f {
                Func::Sqrt => {
                    self.caveats.insert(format!("{arg} >= 0"));
                    let content = inner.value.num.rational_content();
                    if !content.is_one() {
                        if let Some(root) = rational_sqrt(&content) {
                            let rest = Rational {
                                table: inner.table.clone(),
                                value: RatFunc {
                                    num: inner.value.num.scale(&content.recip()),
                                    den: inner.value.den.clone(),
                                },
                                caveats: vec![],
                            };
                            info.sqrt_split = Some((root, rest.to_expr()));
                        }
                    }
                }
                Func::Log => {
                    self.caveats.insert(format!("{arg} > 0"));
                }
                _ => {}
            }
        }
        self.args.insert((f, a.clone()), info.clone());
        Ok(info)
    }

    fn collect(&mut self, e: &Expr, set: &mut BTreeSet<AtomOrd>) -> Result<(), DivByZero> {
        match e.node() {
            Node::Const(_) => {}
            Node::Var(v) => {
                let a = Atom::Var(v.to_string());
                set.insert(AtomOrd(a.sort_key(), a));
            }
            Node::Sum(ts) | Node::Product(ts) => {
                for t in ts {
                    self.collect(t, set)?;
                }
            }
            Node::Pow(b, _) => self.collect(b, set)?,
            Node::Quot(a, b) => {
                self.collect(a, set)?;
                self.collect(b, set)?;
            }
            Node::Func(f, a) => {
                let info = self.info(*f, a)?;
                if info.folded.is_some() {
                    return Ok(());
                }
                let radicand = match &info.sqrt_split {
                    Some((_, rest)) => rest.clone(),
                    None => info.arg.clone(),
                };
                if *f == Func::Sqrt && radicand.is_one() {
                    return Ok(());
                }
                let atom = Atom::Func(*f, radicand.clone());
                set.insert(AtomOrd(atom.sort_key(), atom));
                self.collect(&radicand, set)?;
            }
        }
        Ok(())
    }

    fn convert(&mut self, e: &Expr, t: &AtomTable) -> Result<RatFunc, DivByZero> {
        let n = t.len();
        Ok(match e.node() {
            Node::Const(c) => RatFunc::constant(n, c.clone()),
            Node::Var(v) => RatFunc::from_poly(Poly::var(n, t.position(&Atom::Var(v.to_string())).unwrap())),
            Node::Sum(ts) => {
                let mut acc = RatFunc::constant(n, BigRational::zero());
                for x in ts {
                    acc = acc.add(&self.convert(x, t)?);
                }
                acc
            }
            Node::Product(ts) => {
                let mut acc = RatFunc::constant(n, BigRational::one());
                for x in ts {
                    acc = acc.mul(&self.convert(x, t)?);
                    if acc.is_zero() {
                        break;
                    }
                }
                acc
            }
            Node::Pow(b, k) => {
                let base = self.convert(b, t)?;
                if *k < 0 && !base.num.is_constant() {
                    self.caveats.insert(format!("{b} != 0"));
                }
                base.pow(*k).ok_or_else(|| DivByZero(e.to_string()))?
            }
            Node::Quot(a, b) => {
                let den = self.convert(b, t)?;
                if !den.num.is_constant() {
                    self.caveats.insert(format!("{b} != 0"));
                }
                self.convert(a, t)?.div(&den).ok_or_else(|| DivByZero(e.to_string()))?
            }
            Node::Func(f, a) => {
                let info = self.info(*f, a)?;
                if let Some(c) = info.folded {
                    return Ok(RatFunc::constant(n, c));
                }
                let (factor, radicand) = match info.sqrt_split {
                    Some((r, rest)) => (r, rest),
                    None => (BigRational::one(), info.arg),
                };
                if *f == Func::Sqrt && radicand.is_one() {
                    return Ok(RatFunc::constant(n, factor));
                }
                let i = t.position(&Atom::Func(*f, radicand)).unwrap();
                RatFunc::from_poly(Poly::var(n, i).scale(&factor))
            }
        })
    }

    fn run(&mut self, e: &Expr) -> Result<Rational, DivByZero> {
        let mut set = BTreeSet::new();
        self.collect(e, &mut set)?;
        let table = AtomTable::from_set(set);
        let raw = self.convert(e, &table)?;
        let value = reduce_radicals(raw, &table, self)?;
        let caveats = self.caveats.iter().cloned().collect();
        Ok(Rational { table, value, caveats })
    }
}

/// Radicands of the sqrt atoms of a table, as rational functions in it.
fn radicands(t: &AtomTable, nz: &mut Normalizer) -> Result<Vec<(usize, RatFunc)>, DivByZero> {
    let mut out = Vec::new();
    for (i, a) in t.atoms.iter().enumerate() {
        if let Atom::Func(Func::Sqrt, r) = a {
            out.push((i, nz.convert(r, t)?));
        }
    }
    Ok(out)
}

fn reduce_poly(p: &Poly, rads: &[(usize, RatFunc)]) -> RatFunc {
    let n = p.nvars();
    if rads.iter().all(|(s, _)| p.degree_in(*s) < 2) {
        return RatFunc::from_poly(p.clone());
    }
    let mut acc = RatFunc::constant(n, BigRational::zero());
    for (m, c) in p.terms() {
        let mut mono = m.clone();
        let mut factor = RatFunc::constant(n, c.clone());
        for (s, r) in rads {
            let e = mono.0[*s];
            if e >= 2 {
                mono.0[*s] = e % 2;
                factor = factor.mul(&r.pow((e / 2) as i64).unwrap());
            }
        }
        acc = acc.add(&factor.mul(&RatFunc::from_poly(mono_to_poly(n, &mono))));
    }
    acc
}

fn mono_to_poly(n: usize, m: &Mono) -> Poly {
    let mut p = Poly::one(n);
    for (i, e) in m.0.iter().enumerate() {
        if *e > 0 {
            p = p.mul(&Poly::var(n, i).pow(*e));
        }
    }
    p
}

fn reduce_radicals(v: RatFunc, t: &AtomTable, nz: &mut Normalizer) -> Result<RatFunc, DivByZero> {
    if !t.atoms.iter().any(|a| matches!(a, Atom::Func(Func::Sqrt, _))) {
        return Ok(v);
    }
    let rads = radicands(t, nz)?;
    let num = reduce_poly(&v.num, &rads);
    let den = reduce_poly(&v.den, &rads);
    let mut cur = num.div(&den).ok_or_else(|| DivByZero("reduced denominator".into()))?;
    // Rationalize: clear each sqrt atom from the denominator with its conjugate.
    for _ in 0..16 {
        let Some((s, r)) = rads.iter().find(|(s, _)| cur.den.degree_in(*s) == 1) else {
            break;
        };
        let cs = cur.den.coeffs_in(*s);
        let (p, q) = (&cs[0], &cs[1]);
        let conj = p.sub(&q.mul(&Poly::var(p.nvars(), *s)));
        let new_den = RatFunc::from_poly(p.mul(p)).sub(&RatFunc::from_poly(q.mul(q)).mul(r));
        if new_den.is_zero() {
            break;
        }
        let new_num = reduce_poly(&cur.num.mul(&conj), &rads);
        cur = new_num.div(&new_den).unwrap();
    }
    Ok(cur)
}

/// Converts an expression to its canonical rational function.
pub fn to_rational(e: &Expr) -> Result<Rational, String> {
    let mut nz = Normalizer::default();
    nz.run(e).map_err(|d| d.0)
}

/// Canonical form with its domain caveats. Falls back to the light
/// structural simplification of `e` when a division by zero is met.
pub fn normalize_with_caveats(e: &Expr) -> (Expr, Vec<String>) {
    match to_rational(e) {
        Ok(r) => {
            let out = r.to_expr();
            (out, r.caveats)
        }
        Err(at) => (e.clone(), vec![format!("division by zero in {at}")]),
    }
}

/// Canonical form: for the rational fragment a reduced quotient of
/// polynomials with monic denominator in graded lexicographic order; function
/// atoms are kept with normalized arguments and sqrt powers reduced.
pub fn normalize(e: &Expr) -> Expr {
    normalize_with_caveats(e).0
}

/// Numerator and denominator of the canonical form as expressions.
pub fn numer_denom(e: &Expr) -> Option<(Expr, Expr)> {
    let r = to_rational(e).ok()?;
    let num = poly_to_expr(&r.value.num, &r.table);
    let den = poly_to_expr(&r.value.den, &r.table);
    Some((num, den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::parse;

    fn n(s: &str) -> String {
        normalize(&parse(s).unwrap()).to_string()
    }

    #[test]
    fn identities() {
        assert_eq!(n("(x+1)^2 - x^2 - 2*x - 1"), "0");
        assert_eq!(n("x/x"), "1");
        assert_eq!(n("(x^2 - y^2)/(x - y)"), "(x + y)");
        assert_eq!(n("sqrt(w)^2"), "w");
        assert_eq!(n("sqrt(w)^3/w"), "sqrt(w)");
        assert_eq!(n("w/sqrt(w)"), "sqrt(w)");
        assert_eq!(n("sqrt(4*w) - 2*sqrt(w)"), "0");
        assert_eq!(n("sqrt(9/4)"), "(3/2)");
    }

    #[test]
    fn caveats_are_recorded() {
        let (_, cav) = normalize_with_caveats(&parse("x/x").unwrap());
        assert_eq!(cav, vec!["x != 0".to_string()]);
    }

    #[test]
    fn idempotent_on_samples() {
        for s in ["(x+y)/(2*x - 4*y)", "sqrt(p_xx)*x1/(1+sqrt(p_xx))", "exp(x/x + lam) - lam"] {
            let a = normalize(&parse(s).unwrap());
            assert_eq!(normalize(&a), a, "{s}");
        }
    }
}
