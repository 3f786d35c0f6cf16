use std::collections::HashMap;

use super::expr::{Expr, Func, Node};

/// Exact partial derivative of `e` with respect to the variable `var`.
pub fn diff(e: &Expr, var: &str) -> Expr {
    if !e.contains_var(var) {
        return Expr::zero();
    }
    match e.node() {
        Node::Const(_) => Expr::zero(),
        Node::Var(v) => {
            if &**v == var {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Node::Sum(ts) => Expr::sum(ts.iter().map(|t| diff(t, var)).collect()),
        Node::Product(fs) => {
            let mut terms = Vec::new();
            for i in 0..fs.len() {
                let di = diff(&fs[i], var);
                if di.is_zero() {
                    continue;
                }
                let mut factors: Vec<Expr> = fs.clone();
                factors[i] = di;
                terms.push(Expr::product(factors));
            }
            Expr::sum(terms)
        }
        Node::Pow(b, n) => Expr::product(vec![Expr::int(*n), Expr::pow(b.clone(), n - 1), diff(b, var)]),
        Node::Quot(a, b) => {
            let da = diff(a, var);
            let db = diff(b, var);
            if db.is_zero() {
                return Expr::quot(da, b.clone());
            }
            Expr::quot(
                Expr::sub(Expr::product(vec![da, b.clone()]), Expr::product(vec![a.clone(), db])),
                Expr::pow(b.clone(), 2),
            )
        }
        Node::Func(f, a) => {
            let da = diff(a, var);
            match f {
                Func::Sqrt => Expr::quot(da, Expr::product(vec![Expr::int(2), e.clone()])),
                Func::Exp => Expr::product(vec![da, e.clone()]),
                Func::Log => Expr::quot(da, a.clone()),
                Func::Sin => Expr::product(vec![da, Expr::func(Func::Cos, a.clone())]),
                Func::Cos => Expr::product(vec![Expr::int(-1), da, Expr::func(Func::Sin, a.clone())]),
            }
        }
    }
}

/// Simultaneous substitution; unbound variables pass through.
pub fn substitute(e: &Expr, bindings: &HashMap<String, Expr>) -> Expr {
    if bindings.is_empty() {
        return e.clone();
    }
    let mut memo: HashMap<*const Node, Expr> = HashMap::new();
    subst_rec(e, bindings, &mut memo)
}

fn subst_rec(e: &Expr, b: &HashMap<String, Expr>, memo: &mut HashMap<*const Node, Expr>) -> Expr {
    let key = e.node() as *const Node;
    if let Some(hit) = memo.get(&key) {
        return hit.clone();
    }
    let out = match e.node() {
        Node::Const(_) => e.clone(),
        Node::Var(v) => b.get(&**v).cloned().unwrap_or_else(|| e.clone()),
        Node::Sum(ts) => Expr::sum(ts.iter().map(|t| subst_rec(t, b, memo)).collect()),
        Node::Product(ts) => Expr::product(ts.iter().map(|t| subst_rec(t, b, memo)).collect()),
        Node::Pow(base, n) => Expr::pow(subst_rec(base, b, memo), *n),
        Node::Quot(x, y) => Expr::quot(subst_rec(x, b, memo), subst_rec(y, b, memo)),
        Node::Func(f, a) => Expr::func(*f, subst_rec(a, b, memo)),
    };
    memo.insert(key, out.clone());
    out
}

/// Convenience wrapper building the binding map from pairs.
pub fn substitute_pairs(e: &Expr, pairs: &[(&str, Expr)]) -> Expr {
    let map: HashMap<String, Expr> = pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
    substitute(e, &map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::{normalize, parse};

    #[test]
    fn rules() {
        assert_eq!(diff(&parse("lam^2").unwrap(), "lam"), parse("2*lam").unwrap());
        assert_eq!(diff(&parse("sqrt(w)").unwrap(), "w").to_string(), "(1 / (2 * sqrt(w)))");
        assert!(diff(&parse("y").unwrap(), "x").is_zero());
        let q = diff(&parse("x/(1+x)").unwrap(), "x");
        assert_eq!(normalize(&q), normalize(&parse("1/(1+x)^2").unwrap()));
    }

    #[test]
    fn substitution_is_simultaneous() {
        let e = parse("x + y").unwrap();
        let out = substitute_pairs(&e, &[("x", parse("y").unwrap()), ("y", parse("x").unwrap())]);
        assert_eq!(out, parse("y + x").unwrap());
        assert_eq!(substitute_pairs(&e, &[("x", Expr::int(2))]), parse("2 + y").unwrap());
    }
}
