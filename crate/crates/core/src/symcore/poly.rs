//! Sparse multivariate polynomials over Q with graded lexicographic order.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::scalar::Scalar;

/// Exponent vector; ordered graded-lexicographically with variable 0 most
/// significant.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mono(pub Vec<u32>);

impl Mono {
    pub fn one(n: usize) -> Mono {
        Mono(vec![0; n])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn mul(&self, other: &Mono) -> Mono {
        Mono(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    fn div(&self, other: &Mono) -> Option<Mono> {
        let mut out = Vec::with_capacity(self.0.len());
        for (a, b) in self.0.iter().zip(&other.0) {
            out.push(a.checked_sub(*b)?);
        }
        Some(Mono(out))
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Mono, BigRational>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Poly {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: BigRational) -> Poly {
        let mut p = Poly::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(Mono::one(nvars), c);
        }
        p
    }

    pub fn one(nvars: usize) -> Poly {
        Poly::constant(nvars, BigRational::one())
    }

    pub fn var(nvars: usize, i: usize) -> Poly {
        Poly::monomial(nvars, i, 1, BigRational::one())
    }

    fn monomial(nvars: usize, i: usize, e: u32, c: BigRational) -> Poly {
        let mut m = Mono::one(nvars);
        m.0[i] = e;
        let mut p = Poly::zero(nvars);
        p.terms.insert(m, c);
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Mono, &BigRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn constant_value(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                (m.degree() == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.constant_value().is_some()
    }

    pub fn is_one(&self) -> bool {
        self.constant_value().is_some_and(|c| c.is_one())
    }

    pub fn leading(&self) -> Option<(&Mono, &BigRational)> {
        self.terms.iter().next_back()
    }

    fn add_term(&mut self, m: Mono, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let (mut big, small) = if self.len() >= other.len() { (self.clone(), other) } else { (other.clone(), self) };
        for (m, c) in &small.terms {
            big.add_term(m.clone(), c.clone());
        }
        big
    }

    pub fn neg(&self) -> Poly {
        Poly { nvars: self.nvars, terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }

    pub fn scale(&self, k: &BigRational) -> Poly {
        if k.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly { nvars: self.nvars, terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect() }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if let Some(c) = other.constant_value() {
            return self.scale(&c);
        }
        if let Some(c) = self.constant_value() {
            return other.scale(&c);
        }
        let mut out = Poly::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    fn mul_term(&self, m: &Mono, c: &BigRational) -> Poly {
        Poly { nvars: self.nvars, terms: self.terms.iter().map(|(mm, cc)| (mm.mul(m), cc * c)).collect() }
    }

    pub fn pow(&self, mut e: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one(self.nvars);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Variables with a positive exponent somewhere.
    pub fn support(&self) -> Vec<bool> {
        let mut used = vec![false; self.nvars];
        for m in self.terms.keys() {
            for (i, e) in m.0.iter().enumerate() {
                if *e > 0 {
                    used[i] = true;
                }
            }
        }
        used
    }

    pub fn degree_in(&self, v: usize) -> u32 {
        self.terms.keys().map(|m| m.0[v]).max().unwrap_or(0)
    }

    /// Coefficients with respect to variable `v`, indexed by degree.
    pub fn coeffs_in(&self, v: usize) -> Vec<Poly> {
        let d = self.degree_in(v) as usize;
        let mut out = vec![Poly::zero(self.nvars); d + 1];
        for (m, c) in &self.terms {
            let mut mm = m.clone();
            let e = mm.0[v] as usize;
            mm.0[v] = 0;
            out[e].terms.insert(mm, c.clone());
        }
        out
    }

    fn lc_in(&self, v: usize) -> Poly {
        self.coeffs_in(v).pop().unwrap_or_else(|| Poly::zero(self.nvars))
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        if d.is_zero() {
            return None;
        }
        if let Some(c) = d.constant_value() {
            return Some(self.scale(&c.recip()));
        }
        let (lm, lc) = d.leading().map(|(m, c)| (m.clone(), c.clone()))?;
        let mut rem = self.clone();
        let mut q = Poly::zero(self.nvars);
        while let Some((m, c)) = rem.leading().map(|(m, c)| (m.clone(), c.clone())) {
            let qm = m.div(&lm)?;
            let qc = c / &lc;
            rem = rem.sub(&d.mul_term(&qm, &qc));
            q.add_term(qm, qc);
        }
        Some(q)
    }

    /// Positive rational `c` such that `self / c` has coprime integer
    /// coefficients.
    pub fn rational_content(&self) -> BigRational {
        let mut num = BigInt::zero();
        let mut den = BigInt::one();
        for c in self.terms.values() {
            num = num.gcd(c.numer());
            den = den.lcm(c.denom());
        }
        if num.is_zero() {
            return BigRational::one();
        }
        BigRational::new(num, den)
    }

    /// Scales to coprime integer coefficients with a positive leading term.
    pub fn primitive_integer(&self) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let mut c = self.rational_content();
        if self.leading().unwrap().1.is_negative() {
            c = -c;
        }
        self.scale(&c.recip())
    }

    /// Scales so the leading coefficient is one.
    pub fn monic(&self) -> Poly {
        match self.leading() {
            Some((_, c)) if !c.is_one() => self.scale(&c.recip()),
            _ => self.clone(),
        }
    }

    /// Polynomial pseudo-remainder of `self` by `g` in variable `v`.
    fn prem(&self, g: &Poly, v: usize) -> Poly {
        let dg = g.degree_in(v);
        let lcg = g.lc_in(v);
        let mut r = self.clone();
        while !r.is_zero() && r.degree_in(v) >= dg {
            let dr = r.degree_in(v);
            let lcr = r.lc_in(v);
            let shifted = Poly::monomial(self.nvars, v, dr - dg, BigRational::one()).mul(&lcr).mul(g);
            r = r.mul(&lcg).sub(&shifted).primitive_integer();
        }
        r
    }

    fn content_in(&self, v: usize) -> Poly {
        let mut acc: Option<Poly> = None;
        for c in self.coeffs_in(v).into_iter().filter(|c| !c.is_zero()) {
            acc = Some(match acc {
                None => c.primitive_integer(),
                Some(a) => gcd(&a, &c),
            });
            if acc.as_ref().unwrap().is_constant() {
                return Poly::one(self.nvars);
            }
        }
        acc.unwrap_or_else(|| Poly::one(self.nvars))
    }

    fn primitive_in(&self, v: usize) -> Poly {
        let c = self.content_in(v);
        self.div_exact(&c).expect("content divides").primitive_integer()
    }

    /// Evaluates with one value per variable.
    pub fn eval<T: Scalar>(&self, vals: &[T]) -> T {
        let mut acc = T::zero();
        for (m, c) in &self.terms {
            let mut t = T::from_rational(c);
            for (i, e) in m.0.iter().enumerate() {
                if *e > 0 {
                    t = t * vals[i].powi(*e as i64);
                }
            }
            acc = acc + t;
        }
        acc
    }

    /// Sum of absolute term values; a scale for relative zero tests.
    pub fn eval_magnitude(&self, vals: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut t = Scalar::to_f64(c).abs();
            for (i, e) in m.0.iter().enumerate() {
                if *e > 0 {
                    t *= vals[i].abs().powi(*e as i32);
                }
            }
            acc += t;
        }
        acc
    }

    /// Re-embeds into a polynomial ring with more variables, mapping old
    /// variable `i` to `map[i]`.
    pub fn remap(&self, nvars: usize, map: &[usize]) -> Poly {
        let mut out = Poly::zero(nvars);
        for (m, c) in &self.terms {
            let mut mm = Mono::one(nvars);
            for (i, e) in m.0.iter().enumerate() {
                mm.0[map[i]] += e;
            }
            out.add_term(mm, c.clone());
        }
        out
    }
}

fn monomial_gcd(single: &Poly, other: &Poly) -> Poly {
    let (m, _) = single.leading().unwrap();
    let mut g = m.0.clone();
    for mm in other.terms.keys() {
        for (a, b) in g.iter_mut().zip(&mm.0) {
            *a = (*a).min(*b);
        }
    }
    let mut p = Poly::zero(single.nvars);
    p.terms.insert(Mono(g), BigRational::one());
    p
}

const IMAGE_PRIME: u64 = 2_147_483_647;

fn mod_prime(n: &BigInt) -> u64 {
    let r = n % BigInt::from(IMAGE_PRIME);
    let r = if r.is_negative() { r + BigInt::from(IMAGE_PRIME) } else { r };
    r.try_into().unwrap()
}

fn mul_mod(a: u64, b: u64) -> u64 {
    a * b % IMAGE_PRIME
}

fn pow_mod(mut base: u64, mut e: u64) -> u64 {
    let mut acc = 1;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, base);
        }
        base = mul_mod(base, base);
        e >>= 1;
    }
    acc
}

fn inv_mod(a: u64) -> u64 {
    pow_mod(a, IMAGE_PRIME - 2)
}

/// Image of `p` modulo a prime as a univariate polynomial in `v`, the other
/// variables set to `pt`. Coefficients indexed by degree. `None` when a
/// denominator vanishes modulo the prime.
fn univariate_image(p: &Poly, v: usize, pt: &[u64]) -> Option<Vec<u64>> {
    let mut out = vec![0; p.degree_in(v) as usize + 1];
    for (m, c) in &p.terms {
        let den = mod_prime(c.denom());
        if den == 0 {
            return None;
        }
        let mut t = mul_mod(mod_prime(c.numer()), inv_mod(den));
        for (i, e) in m.0.iter().enumerate() {
            if i != v && *e > 0 {
                t = mul_mod(t, pow_mod(pt[i], *e as u64));
            }
        }
        let slot = &mut out[m.0[v] as usize];
        *slot = (*slot + t) % IMAGE_PRIME;
    }
    Some(out)
}

fn trim(p: &mut Vec<u64>) {
    while p.last() == Some(&0) {
        p.pop();
    }
}

/// Degree of the gcd of two univariate polynomials over the prime field.
fn univariate_gcd_degree(mut a: Vec<u64>, mut b: Vec<u64>) -> usize {
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let lead_inv = inv_mod(*b.last().unwrap());
        while a.len() >= b.len() {
            let shift = a.len() - b.len();
            let q = mul_mod(*a.last().unwrap(), lead_inv);
            for (i, c) in b.iter().enumerate() {
                a[i + shift] = (a[i + shift] + IMAGE_PRIME - mul_mod(q, *c)) % IMAGE_PRIME;
            }
            a.pop();
            trim(&mut a);
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len().saturating_sub(1)
}

/// Upper bounds on the degree of `gcd(a, b)` in each variable, from
/// univariate images modulo a prime at a fixed point. `None` when a leading
/// coefficient or a denominator vanishes there, so that the bound would not
/// hold.
fn gcd_degree_bounds(a: &Poly, b: &Poly) -> Option<Vec<u32>> {
    let n = a.nvars;
    let pt: Vec<u64> = (0..n as u64).map(|i| 3 + 7 * i + (i * i) % 5).collect();
    let mut out = vec![0; n];
    for (v, bound) in out.iter_mut().enumerate() {
        let (da, db) = (a.degree_in(v), b.degree_in(v));
        if da == 0 || db == 0 {
            continue;
        }
        let (ia, ib) = (univariate_image(a, v, &pt)?, univariate_image(b, v, &pt)?);
        if *ia.last()? == 0 || *ib.last()? == 0 {
            return None;
        }
        *bound = univariate_gcd_degree(ia, ib) as u32;
    }
    Some(out)
}

fn max_norm(p: &Poly) -> BigInt {
    p.terms.values().map(|c| c.numer().abs()).max().unwrap_or_default()
}

/// `p` with variable `v` set to the integer `x`.
fn eval_at(p: &Poly, v: usize, x: &BigInt) -> Poly {
    let mut out = Poly::zero(p.nvars);
    for (m, c) in &p.terms {
        let mut mm = m.clone();
        let e = std::mem::take(&mut mm.0[v]);
        out.add_term(mm, c * BigRational::from_integer(num_traits::pow(x.clone(), e as usize)));
    }
    out
}

/// Reads the coefficients of `h` as symmetric base-`x` digits, giving a
/// polynomial in `v`.
fn interpolate(h: &Poly, v: usize, x: &BigInt) -> Poly {
    let half = x / 2;
    let mut rest = h.clone();
    let mut out = Poly::zero(h.nvars);
    let mut e = 0;
    while !rest.is_zero() {
        let mut digit = Poly::zero(h.nvars);
        for (m, c) in &rest.terms {
            let mut r = c.numer().mod_floor(x);
            if r > half {
                r -= x;
            }
            digit.add_term(m.clone(), BigRational::from_integer(r));
        }
        for (m, c) in &digit.terms {
            let mut mm = m.clone();
            mm.0[v] = e;
            out.add_term(mm, c.clone());
        }
        rest = rest.sub(&digit).scale(&BigRational::from_integer(x.clone()).recip());
        e += 1;
    }
    out
}

/// Heuristic gcd: the gcd of integer images at a large evaluation point,
/// lifted back by symmetric digits and accepted only if it divides both.
/// With the point above `2 min(|a|, |b|) + 2` an accepted candidate is the
/// gcd. `None` after a few unsuccessful points.
fn heuristic_gcd(a: &Poly, b: &Poly, v: usize) -> Option<Poly> {
    let (f, g) = (a.primitive_integer(), b.primitive_integer());
    let mut x: BigInt = max_norm(&f).min(max_norm(&g)) * 2 + 29;
    for _ in 0..6 {
        let (ff, gg) = (eval_at(&f, v, &x), eval_at(&g, v, &x));
        if !ff.is_zero() && !gg.is_zero() {
            let ints = ff.rational_content().numer().gcd(gg.rational_content().numer());
            let h = gcd(&ff, &gg).scale(&BigRational::from_integer(ints));
            let cand = interpolate(&h, v, &x).primitive_integer();
            if !cand.is_zero() && f.div_exact(&cand).is_some() && g.div_exact(&cand).is_some() {
                return Some(cand);
            }
        }
        x = &x * 73794 * x.sqrt().sqrt() / 27011;
    }
    None
}

/// Greatest common divisor, normalized to coprime integer coefficients with
/// a positive leading term.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    let n = a.nvars;
    if a.is_zero() {
        return b.primitive_integer();
    }
    if b.is_zero() {
        return a.primitive_integer();
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one(n);
    }
    if a == b {
        return a.primitive_integer();
    }
    if a.len() == 1 {
        return monomial_gcd(a, b);
    }
    if b.len() == 1 {
        return monomial_gcd(b, a);
    }
    let sa = a.support();
    let sb = b.support();
    if !sa.iter().zip(&sb).any(|(x, y)| *x && *y) {
        return Poly::one(n);
    }
    if let Some(v) = (0..n).find(|&i| sa[i] && !sb[i]) {
        return gcd(&a.content_in(v), b);
    }
    if let Some(v) = (0..n).find(|&i| sb[i] && !sa[i]) {
        return gcd(a, &b.content_in(v));
    }
    if let Some(bounds) = gcd_degree_bounds(a, b) {
        if bounds.iter().all(|d| *d == 0) {
            return Poly::one(n);
        }
        for (f, g) in [(a, b), (b, a)] {
            if (0..n).all(|v| bounds[v] == g.degree_in(v)) && f.div_exact(g).is_some() {
                return g.primitive_integer();
            }
        }
    }
    let v = (0..n).filter(|&i| sa[i]).min_by_key(|&i| a.degree_in(i).max(b.degree_in(i))).unwrap();
    if let Some(h) = heuristic_gcd(a, b, v) {
        return h;
    }
    let ca = a.content_in(v);
    let cb = b.content_in(v);
    let c = gcd(&ca, &cb);
    let mut f = a.div_exact(&ca).unwrap().primitive_integer();
    let mut g = b.div_exact(&cb).unwrap().primitive_integer();
    if f.degree_in(v) < g.degree_in(v) {
        std::mem::swap(&mut f, &mut g);
    }
    loop {
        let r = f.prem(&g, v);
        if r.is_zero() {
            break;
        }
        if r.degree_in(v) == 0 {
            return c;
        }
        f = g;
        g = r.primitive_in(v);
    }
    c.mul(&g.primitive_in(v)).primitive_integer()
}
