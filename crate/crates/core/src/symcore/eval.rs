use std::collections::HashMap;

use super::expr::{Expr, Func, Node};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Evaluates `e` at `point` in any [`Scalar`] type.
pub fn eval_in<T: Scalar>(e: &Expr, point: &HashMap<String, T>) -> Result<T> {
    Ok(match e.node() {
        Node::Const(c) => T::from_rational(c),
        Node::Var(v) => point.get(&**v).cloned().ok_or_else(|| Error::Unbound(v.to_string()))?,
        Node::Sum(ts) => {
            let mut acc = T::zero();
            for t in ts {
                acc = acc + eval_in(t, point)?;
            }
            acc
        }
        Node::Product(ts) => {
            let mut acc = T::one();
            for t in ts {
                acc = acc * eval_in(t, point)?;
            }
            acc
        }
        Node::Pow(b, n) => {
            let base = eval_in(b, point)?;
            if *n < 0 && base.is_singular() {
                return Err(Error::DivisionByZero(e.to_string()));
            }
            base.powi(*n)
        }
        Node::Quot(a, b) => {
            let den = eval_in(b, point)?;
            if den.is_singular() {
                return Err(Error::DivisionByZero(e.to_string()));
            }
            eval_in(a, point)? / den
        }
        Node::Func(f, a) => {
            let arg = eval_in(a, point)?;
            arg.apply(*f).ok_or_else(|| Error::Domain {
                subterm: e.to_string(),
                msg: format!("{} undefined at {:?}", f.name(), arg),
            })?
        }
    })
}

/// IEEE double evaluation.
pub fn eval(e: &Expr, point: &HashMap<String, f64>) -> Result<f64> {
    eval_in(e, point)
}

/// Convenience: evaluate with a slice of `(name, value)` pairs.
pub fn eval_at(e: &Expr, pairs: &[(&str, f64)]) -> Result<f64> {
    let m: HashMap<String, f64> = pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    eval(e, &m)
}

#[derive(Clone, Debug)]
enum Op {
    Const(f64),
    Slot(usize),
    Sum(Vec<Op>),
    Product(Vec<Op>),
    Pow(Box<Op>, i32),
    Quot(Box<Op>, Box<Op>),
    Func(Func, Box<Op>),
}

/// An expression compiled against a fixed variable ordering, for repeated
/// floating-point evaluation.
#[derive(Clone, Debug)]
pub struct Compiled {
    vars: Vec<String>,
    root: Op,
}

impl Compiled {
    pub fn new(e: &Expr, vars: &[String]) -> Result<Compiled> {
        let slots: HashMap<&str, usize> = vars.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
        let root = compile(e, &slots)?;
        Ok(Compiled { vars: vars.to_vec(), root })
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    /// Evaluates; `None` on a pole or outside a function domain.
    pub fn eval(&self, vals: &[f64]) -> Option<f64> {
        run(&self.root, vals)
    }
}

fn compile(e: &Expr, slots: &HashMap<&str, usize>) -> Result<Op> {
    Ok(match e.node() {
        Node::Const(c) => Op::Const(f64::from_rational(c)),
        Node::Var(v) => Op::Slot(*slots.get(&**v).ok_or_else(|| Error::Unbound(v.to_string()))?),
        Node::Sum(ts) => Op::Sum(ts.iter().map(|t| compile(t, slots)).collect::<Result<_>>()?),
        Node::Product(ts) => Op::Product(ts.iter().map(|t| compile(t, slots)).collect::<Result<_>>()?),
        Node::Pow(b, n) => Op::Pow(Box::new(compile(b, slots)?), *n as i32),
        Node::Quot(a, b) => Op::Quot(Box::new(compile(a, slots)?), Box::new(compile(b, slots)?)),
        Node::Func(f, a) => Op::Func(*f, Box::new(compile(a, slots)?)),
    })
}

fn run(op: &Op, v: &[f64]) -> Option<f64> {
    let out = match op {
        Op::Const(c) => *c,
        Op::Slot(i) => v[*i],
        Op::Sum(ts) => {
            let mut acc = 0.0;
            for t in ts {
                acc += run(t, v)?;
            }
            acc
        }
        Op::Product(ts) => {
            let mut acc = 1.0;
            for t in ts {
                acc *= run(t, v)?;
            }
            acc
        }
        Op::Pow(b, n) => {
            let base = run(b, v)?;
            if *n < 0 && base == 0.0 {
                return None;
            }
            base.powi(*n)
        }
        Op::Quot(a, b) => {
            let den = run(b, v)?;
            if den == 0.0 {
                return None;
            }
            run(a, v)? / den
        }
        Op::Func(f, a) => run(a, v)?.apply(*f)?,
    };
    out.is_finite().then_some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::parse;

    #[test]
    fn doubles() {
        assert_eq!(eval_at(&parse("lam^2").unwrap(), &[("lam", 3.0)]).unwrap(), 9.0);
        assert!(matches!(eval_at(&parse("sqrt(w)").unwrap(), &[("w", -1.0)]), Err(Error::Domain { .. })));
        assert!(matches!(eval_at(&parse("1/x").unwrap(), &[("x", 0.0)]), Err(Error::DivisionByZero(_))));
    }

    #[test]
    fn single_precision_and_exact() {
        let e = parse("x/3 + 1/6").unwrap();
        let m32: HashMap<String, f32> = [("x".to_string(), 0.5f32)].into();
        assert!((eval_in(&e, &m32).unwrap() - 1.0 / 3.0).abs() < 1e-6);
        let half = num_rational::BigRational::new(1.into(), 2.into());
        let mq: HashMap<String, _> = [("x".to_string(), half)].into();
        assert_eq!(eval_in(&e, &mq).unwrap(), num_rational::BigRational::new(1.into(), 3.into()));
    }

    #[test]
    fn compiled_matches_tree() {
        let e = parse("sqrt(x)*y/(1+x^2) - exp(-y)").unwrap();
        let c = Compiled::new(&e, &["x".into(), "y".into()]).unwrap();
        let a = c.eval(&[0.7, -0.3]).unwrap();
        let b = eval_at(&e, &[("x", 0.7), ("y", -0.3)]).unwrap();
        assert!((a - b).abs() < 1e-15);
    }
}
