use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Elementary functions admitted in expressions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Sqrt,
    Exp,
    Log,
    Sin,
    Cos,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sqrt" => Func::Sqrt,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Const(BigRational),
    Var(Arc<str>),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Pow(Expr, i64),
    Quot(Expr, Expr),
    Func(Func, Expr),
}

/// Immutable, cheaply clonable symbolic expression over exact rationals.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Expr(Arc<Node>);

impl Expr {
    pub fn from_node(node: Node) -> Expr {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn constant(r: BigRational) -> Expr {
        Expr::from_node(Node::Const(r))
    }

    pub fn int(n: i64) -> Expr {
        Expr::constant(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn rational(num: i64, den: i64) -> Expr {
        Expr::constant(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn var(name: &str) -> Expr {
        Expr::from_node(Node::Var(Arc::from(name)))
    }

    pub fn func(f: Func, arg: Expr) -> Expr {
        Expr::from_node(Node::Func(f, arg))
    }

    pub fn sqrt(arg: Expr) -> Expr {
        Expr::func(Func::Sqrt, arg)
    }

    pub fn as_const(&self) -> Option<&BigRational> {
        match self.node() {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn as_var(&self) -> Option<&str> {
        match self.node() {
            Node::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const().is_some_and(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.as_const().is_some_and(|c| c.is_one())
    }

    /// Sum with local folding: flattens nested sums, folds constants and
    /// drops zero terms. Term order is preserved, the folded constant leads.
    pub fn sum(terms: Vec<Expr>) -> Expr {
        let mut acc = BigRational::zero();
        let mut rest = Vec::with_capacity(terms.len());
        for t in terms {
            match t.node() {
                Node::Const(c) => acc += c,
                Node::Sum(inner) => {
                    for s in inner {
                        match s.node() {
                            Node::Const(c) => acc += c,
                            _ => rest.push(s.clone()),
                        }
                    }
                }
                _ => rest.push(t),
            }
        }
        if !acc.is_zero() {
            rest.insert(0, Expr::constant(acc));
        }
        match rest.len() {
            0 => Expr::zero(),
            1 => rest.pop().unwrap(),
            _ => Expr::from_node(Node::Sum(rest)),
        }
    }

    /// Product with local folding: flattens nested products, folds the
    /// constant coefficient to the front, drops unit factors, absorbs zero.
    pub fn product(factors: Vec<Expr>) -> Expr {
        let mut acc = BigRational::one();
        let mut rest = Vec::with_capacity(factors.len());
        for f in factors {
            match f.node() {
                Node::Const(c) => acc *= c,
                Node::Product(inner) => {
                    for s in inner {
                        match s.node() {
                            Node::Const(c) => acc *= c,
                            _ => rest.push(s.clone()),
                        }
                    }
                }
                _ => rest.push(f),
            }
            if acc.is_zero() {
                return Expr::zero();
            }
        }
        if !acc.is_one() {
            rest.insert(0, Expr::constant(acc));
        }
        match rest.len() {
            0 => Expr::one(),
            1 => rest.pop().unwrap(),
            _ => Expr::from_node(Node::Product(rest)),
        }
    }

    pub fn pow(base: Expr, exp: i64) -> Expr {
        if exp == 0 {
            return Expr::one();
        }
        if exp == 1 {
            return base;
        }
        if let Some(c) = base.as_const() {
            if !(c.is_zero() && exp < 0) {
                return Expr::constant(rational_powi(c, exp));
            }
        }
        if let Node::Pow(inner, e) = base.node() {
            if let Some(total) = e.checked_mul(exp) {
                return Expr::pow(inner.clone(), total);
            }
        }
        Expr::from_node(Node::Pow(base, exp))
    }

    pub fn quot(num: Expr, den: Expr) -> Expr {
        if den.is_one() {
            return num;
        }
        if num.is_zero() && !den.is_zero() {
            return Expr::zero();
        }
        if let (Some(a), Some(b)) = (num.as_const(), den.as_const()) {
            if !b.is_zero() {
                return Expr::constant(a / b);
            }
        }
        if let Some(b) = den.as_const() {
            if !b.is_zero() {
                return Expr::product(vec![Expr::constant(b.recip()), num]);
            }
        }
        Expr::from_node(Node::Quot(num, den))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(e: Expr) -> Expr {
        Expr::product(vec![Expr::int(-1), e])
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::sum(vec![a, Expr::neg(b)])
    }

    /// Visits every node in pre-order.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match self.node() {
            Node::Const(_) | Node::Var(_) => {}
            Node::Sum(v) | Node::Product(v) => v.iter().for_each(|c| c.walk(f)),
            Node::Pow(b, _) => b.walk(f),
            Node::Quot(a, b) => {
                a.walk(f);
                b.walk(f);
            }
            Node::Func(_, a) => a.walk(f),
        }
    }

    /// Names of all variables, sorted and deduplicated.
    pub fn variables(&self) -> Vec<String> {
        let mut out = std::collections::BTreeSet::new();
        self.walk(&mut |e| {
            if let Node::Var(v) = e.node() {
                out.insert(v.to_string());
            }
        });
        out.into_iter().collect()
    }

    pub fn contains_var(&self, name: &str) -> bool {
        let mut found = false;
        self.walk(&mut |e| {
            if let Node::Var(v) = e.node() {
                if &**v == name {
                    found = true;
                }
            }
        });
        found
    }

    /// True when no elementary function node occurs.
    pub fn is_rational_fragment(&self) -> bool {
        let mut ok = true;
        self.walk(&mut |e| {
            if matches!(e.node(), Node::Func(..)) {
                ok = false;
            }
        });
        ok
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }
}

pub(crate) fn rational_powi(c: &BigRational, exp: i64) -> BigRational {
    let base = if exp < 0 { c.recip() } else { c.clone() };
    num_traits::pow(base, exp.unsigned_abs() as usize)
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}

impl From<BigRational> for Expr {
    fn from(r: BigRational) -> Expr {
        Expr::constant(r)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl std::ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, rhs)
            }
        }
        impl std::ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self.clone(), rhs.clone())
            }
        }
        impl std::ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self.clone(), rhs)
            }
        }
        impl std::ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, rhs.clone())
            }
        }
    };
}

binop!(Add, add, |a, b| Expr::sum(vec![a, b]));
binop!(Sub, sub, Expr::sub);
binop!(Mul, mul, |a, b| Expr::product(vec![a, b]));
binop!(Div, div, Expr::quot);

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self.clone())
    }
}

impl serde::Serialize for Expr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Expr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Expr, D::Error> {
        let s = <String as serde::Deserialize>::deserialize(d)?;
        super::parse::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smart_constructors_fold() {
        let x = Expr::var("x");
        assert!(Expr::product(vec![Expr::zero(), x.clone()]).is_zero());
        assert_eq!(Expr::sum(vec![x.clone(), Expr::zero()]), x);
        assert_eq!(Expr::pow(x.clone(), 1), x);
        assert_eq!(Expr::pow(Expr::int(2), 3), Expr::int(8));
        assert_eq!(Expr::quot(Expr::int(1), Expr::int(2)), Expr::rational(1, 2));
    }

    #[test]
    fn variables_are_sorted() {
        let e = Expr::var("z") * Expr::var("x") + Expr::var("z");
        assert_eq!(e.variables(), vec!["x".to_string(), "z".to_string()]);
    }
}
