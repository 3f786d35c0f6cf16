use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::expr::Expr;
use super::parse::is_identifier;
use crate::error::{Error, Result};

/// What a registered variable stands for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    /// One of `x, y, z, lam`.
    Base,
    /// `u_i`: i-th derivative of the first arbitrary function.
    JetU(u32),
    /// `v_i`: i-th derivative of the second arbitrary function.
    JetV(u32),
    /// `x_i` with `i >= 1`: i-th time derivative of `x`.
    JetX(u32),
    /// `y_i` with `i >= 1`: i-th time derivative of `y`.
    JetY(u32),
    /// `z_i` with `i >= 1`: i-th time derivative of `z`.
    JetZ(u32),
    /// `w` and the formal PDE placeholders.
    Auxiliary,
}

fn split_indexed(name: &str) -> Option<(char, u32)> {
    let mut chars = name.chars();
    let head = chars.next()?;
    let rest = chars.as_str();
    if rest.is_empty() || !rest.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    Some((head, rest.parse().ok()?))
}

/// Role implied by a name alone, if any.
pub fn role_of(name: &str) -> Option<Role> {
    match name {
        "x" | "y" | "z" | "lam" => return Some(Role::Base),
        "w" => return Some(Role::Auxiliary),
        _ => {}
    }
    match split_indexed(name)? {
        ('u', i) => Some(Role::JetU(i)),
        ('v', i) => Some(Role::JetV(i)),
        ('x', i) if i >= 1 => Some(Role::JetX(i)),
        ('y', i) if i >= 1 => Some(Role::JetY(i)),
        ('z', i) if i >= 1 => Some(Role::JetZ(i)),
        _ => None,
    }
}

/// Sort key defining the canonical variable order: base names, then u-jets,
/// v-jets, x-, y- and z-chains by order, then any other name alphabetically.
pub fn var_order_key(name: &str) -> (u8, u64, String) {
    let base = ["x", "y", "z", "lam", "w"];
    if let Some(i) = base.iter().position(|b| *b == name) {
        return (0, i as u64, String::new());
    }
    match role_of(name) {
        Some(Role::JetU(i)) => (1, i as u64, String::new()),
        Some(Role::JetV(i)) => (2, i as u64, String::new()),
        Some(Role::JetX(i)) => (3, i as u64, String::new()),
        Some(Role::JetY(i)) => (4, i as u64, String::new()),
        Some(Role::JetZ(i)) => (5, i as u64, String::new()),
        _ => (5, u64::MAX, name.to_string()),
    }
}

/// Ordered variable names with unique roles.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableRegistry {
    names: Vec<String>,
    roles: HashMap<String, Role>,
}

impl VariableRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// `x, y, z, lam` and `w`.
    pub fn base() -> Self {
        let mut r = Self::new();
        for n in ["x", "y", "z", "lam"] {
            r.register(n, Role::Base).unwrap();
        }
        r.register("w", Role::Auxiliary).unwrap();
        r
    }

    pub fn register(&mut self, name: &str, role: Role) -> Result<()> {
        if !is_identifier(name) {
            return Err(Error::Syntax { pos: 0, msg: format!("`{name}` is not a valid identifier") });
        }
        match self.roles.get(name) {
            Some(r) if *r == role => Ok(()),
            Some(r) => Err(Error::Precondition(format!("`{name}` already registered as {r:?}"))),
            None => {
                self.roles.insert(name.to_string(), role);
                self.names.push(name.to_string());
                self.names.sort_by_key(|n| var_order_key(n));
                Ok(())
            }
        }
    }

    /// Registers with the role implied by the name, or as auxiliary.
    pub fn register_auto(&mut self, name: &str) -> Result<()> {
        self.register(name, role_of(name).unwrap_or(Role::Auxiliary))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.roles.contains_key(name)
    }

    pub fn role(&self, name: &str) -> Option<Role> {
        self.roles.get(name).copied()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Fails on the first variable of `e` that is not registered.
    pub fn check(&self, e: &Expr) -> Result<()> {
        for v in e.variables() {
            if !self.contains(&v) {
                return Err(Error::Unregistered(v));
            }
        }
        Ok(())
    }
}
