//! Exact symbolic expressions: parsing, printing, differentiation,
//! substitution, rational normal forms, zero testing and evaluation.

pub mod diff;
pub mod eval;
pub mod expr;
pub mod parse;
pub mod poly;
pub mod print;
pub mod ratfunc;
pub mod registry;
pub mod zero;

pub use diff::{diff, substitute, substitute_pairs};
pub use eval::{eval, eval_at, eval_in, Compiled};
pub use expr::{Expr, Func, Node};
pub use parse::{canonical_name, is_identifier, parse};
pub use print::to_latex;
pub use ratfunc::{normalize, normalize_with_caveats, numer_denom, to_rational};
pub use registry::{role_of, var_order_key, Role, VariableRegistry};
pub use zero::{is_zero, rng_for, sub_seed, DomainBox, ZeroVerdict, ZERO_TOL, ZERO_TRIALS};

/// Parses, panicking on malformed input. Intended for literals in code and
/// tests.
pub fn ex(text: &str) -> Expr {
    parse(text).unwrap_or_else(|e| panic!("bad expression literal {text:?}: {e}"))
}
