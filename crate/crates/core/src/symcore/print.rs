use std::fmt::{self, Write};

use num_rational::BigRational;
use num_traits::{One, Signed};

use super::expr::{Expr, Node};

fn write_const(f: &mut impl Write, c: &BigRational) -> fmt::Result {
    if c.is_integer() && !c.is_negative() {
        write!(f, "{}", c.numer())
    } else if c.is_integer() {
        write!(f, "({})", c.numer())
    } else {
        write!(f, "({}/{})", c.numer(), c.denom())
    }
}

fn write_joined(f: &mut fmt::Formatter<'_>, items: &[Expr], sep: &str) -> fmt::Result {
    f.write_char('(')?;
    for (i, t) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        write!(f, "{t}")?;
    }
    f.write_char(')')
}

/// Canonical fully parenthesized text; re-parses to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(c) => write_const(f, c),
            Node::Var(v) => f.write_str(v),
            Node::Sum(ts) => write_joined(f, ts, " + "),
            Node::Product(ts) => write_joined(f, ts, " * "),
            Node::Pow(b, e) if *e < 0 => write!(f, "({b}^({e}))"),
            Node::Pow(b, e) => write!(f, "({b}^{e})"),
            Node::Quot(a, b) => write!(f, "({a} / {b})"),
            Node::Func(func, a) => {
                // Function arguments are always parenthesized by the call syntax;
                // strip one redundant layer when the argument prints its own.
                let inner = a.to_string();
                if inner.starts_with('(') && balanced_outer(&inner) {
                    write!(f, "{}{}", func.name(), inner)
                } else {
                    write!(f, "{}({})", func.name(), inner)
                }
            }
        }
    }
}

fn balanced_outer(s: &str) -> bool {
    let mut depth = 0i32;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 && i + 1 != s.len() {
                    return false;
                }
            }
            _ => {}
        }
    }
    depth == 0
}

/// LaTeX rendering. Jet names map to dotted or bracketed derivatives and
/// the formal PDE placeholders to subscripted partials.
pub fn to_latex(e: &Expr) -> String {
    let mut s = String::new();
    latex_into(e, &mut s, 0);
    s
}

fn latex_name(v: &str) -> String {
    if v == "lam" {
        return "\\lambda".into();
    }
    if let Some(rest) = v.strip_prefix("p_") {
        return format!("p_{{{rest}}}");
    }
    if let Some(rest) = v.strip_prefix("Fp_") {
        return format!("Fp_{{{rest}}}");
    }
    let (head, digits) = v.split_at(v.find(|c: char| c.is_ascii_digit()).unwrap_or(v.len()));
    if !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit()) && head.len() == 1 {
        let n: usize = digits.parse().unwrap_or(0);
        return match n {
            0 => head.to_string(),
            1 => format!("\\dot{{{head}}}"),
            2 => format!("\\ddot{{{head}}}"),
            _ => format!("{head}^{{({n})}}"),
        };
    }
    v.to_string()
}

// Precedence levels: 0 sum context, 1 product context, 2 power base.
fn latex_into(e: &Expr, s: &mut String, ctx: u8) {
    match e.node() {
        Node::Const(c) => {
            let neg = c.is_negative();
            let wrap = neg && ctx > 0;
            if wrap {
                s.push_str("\\left(");
            }
            if c.is_integer() {
                s.push_str(&c.numer().to_string());
            } else {
                if neg {
                    s.push('-');
                }
                let _ = write!(s, "\\frac{{{}}}{{{}}}", c.numer().abs(), c.denom());
            }
            if wrap {
                s.push_str("\\right)");
            }
        }
        Node::Var(v) => s.push_str(&latex_name(v)),
        Node::Sum(ts) => {
            if ctx > 0 {
                s.push_str("\\left(");
            }
            for (i, t) in ts.iter().enumerate() {
                let mut piece = String::new();
                latex_into(t, &mut piece, 0);
                if i > 0 {
                    if let Some(stripped) = piece.strip_prefix('-') {
                        s.push_str(" - ");
                        s.push_str(stripped);
                        continue;
                    }
                    s.push_str(" + ");
                }
                s.push_str(&piece);
            }
            if ctx > 0 {
                s.push_str("\\right)");
            }
        }
        Node::Product(ts) => {
            let (lead, rest) = match ts[0].as_const() {
                Some(c) if (-c.clone()).is_one() && ctx == 0 => ("-", &ts[1..]),
                _ => ("", &ts[..]),
            };
            let wrap = ctx > 1;
            if wrap {
                s.push_str("\\left(");
            }
            s.push_str(lead);
            for (i, t) in rest.iter().enumerate() {
                if i > 0 {
                    s.push_str(" \\, ");
                }
                latex_into(t, s, 1);
            }
            if wrap {
                s.push_str("\\right)");
            }
        }
        Node::Pow(b, n) => {
            latex_into(b, s, 2);
            let _ = write!(s, "^{{{n}}}");
        }
        Node::Quot(a, b) => {
            s.push_str("\\frac{");
            latex_into(a, s, 0);
            s.push_str("}{");
            latex_into(b, s, 0);
            s.push('}');
        }
        Node::Func(f, a) => {
            if f.name() == "sqrt" {
                s.push_str("\\sqrt{");
                latex_into(a, s, 0);
                s.push('}');
            } else {
                let _ = write!(s, "\\{}\\left(", f.name());
                latex_into(a, s, 0);
                s.push_str("\\right)");
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::parse;

    #[test]
    fn canonical_text() {
        let e = parse("y + lam^2 - 3*x/z + x^-2").unwrap();
        assert_eq!(e.to_string(), "(y + (lam^2) + ((-1) * ((3 * x) / z)) + (x^(-2)))");
        assert_eq!(parse("sqrt(w + 1)").unwrap().to_string(), "sqrt(1 + w)");
        assert_eq!(parse("sqrt(w)").unwrap().to_string(), "sqrt(w)");
        assert_eq!(parse("-1/2*x").unwrap().to_string(), "((-1/2) * x)");
    }

    #[test]
    fn round_trip() {
        for src in ["y + lam^2", "sqrt(p_xx) * x1 - (u0/v1)^3", "exp(-x) + cos(2*lam)/(1 + z)"] {
            let e = parse(src).unwrap();
            assert_eq!(parse(&e.to_string()).unwrap(), e);
        }
    }

    #[test]
    fn latex_names() {
        assert_eq!(to_latex(&parse("lam^2 + u1").unwrap()), "\\lambda^{2} + \\dot{u}");
        assert_eq!(to_latex(&parse("p_xx - x3").unwrap()), "p_{xx} - x^{(3)}");
    }
}
