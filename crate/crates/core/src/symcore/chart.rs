use std::fmt;
use std::sync::Arc;

use super::SymError;

/// Index of a chart name. Coordinates come first, then parameters.
pub type Var = u16;

/// Names recognised by the parser as functions; they cannot be chart names.
pub const FUNCTION_NAMES: &[&str] = &["arctan", "atan", "ln", "log", "exp", "sqrt", "sech", "tanh"];

/// An ordered set of coordinate names plus parameter names.
///
/// Parameters live in the coefficient field: they may be differentiated
/// against, but the exterior derivative never produces `dc`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Chart {
    coords: Vec<String>,
    params: Vec<String>,
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(ch) if ch.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|ch| ch.is_ascii_alphanumeric() || ch == '_')
}

impl Chart {
    pub fn new<S: AsRef<str>>(coords: &[S], params: &[S]) -> Result<Arc<Chart>, SymError> {
        if coords.is_empty() {
            return Err(SymError::InvalidChart("a chart needs at least one coordinate".into()));
        }
        let coords: Vec<String> = coords.iter().map(|s| s.as_ref().to_string()).collect();
        let params: Vec<String> = params.iter().map(|s| s.as_ref().to_string()).collect();
        let mut seen = std::collections::BTreeSet::new();
        for name in coords.iter().chain(params.iter()) {
            if !valid_name(name) {
                return Err(SymError::InvalidChart(format!("invalid name `{name}`")));
            }
            if FUNCTION_NAMES.contains(&name.as_str()) {
                return Err(SymError::InvalidChart(format!("`{name}` is reserved for a function")));
            }
            if !seen.insert(name.clone()) {
                return Err(SymError::InvalidChart(format!("duplicate name `{name}`")));
            }
        }
        if coords.len() + params.len() > Var::MAX as usize {
            return Err(SymError::InvalidChart("too many names".into()));
        }
        Ok(Arc::new(Chart { coords, params }))
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    /// Number of coordinates (the manifold dimension).
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn nvars(&self) -> usize {
        self.coords.len() + self.params.len()
    }

    pub fn index_of(&self, name: &str) -> Option<Var> {
        self.coords
            .iter()
            .chain(self.params.iter())
            .position(|n| n == name)
            .map(|i| i as Var)
    }

    pub fn coord_index(&self, name: &str) -> Option<Var> {
        self.coords.iter().position(|n| n == name).map(|i| i as Var)
    }

    pub fn require(&self, name: &str) -> Result<Var, SymError> {
        self.index_of(name)
            .ok_or_else(|| SymError::UnknownIdentifier(name.to_string()))
    }

    pub fn require_coord(&self, name: &str) -> Result<Var, SymError> {
        self.coord_index(name)
            .ok_or_else(|| SymError::UnknownIdentifier(name.to_string()))
    }

    pub fn name(&self, var: Var) -> &str {
        let i = var as usize;
        if i < self.coords.len() {
            &self.coords[i]
        } else {
            &self.params[i - self.coords.len()]
        }
    }

    pub fn is_coord(&self, var: Var) -> bool {
        (var as usize) < self.coords.len()
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> {
        0..self.nvars() as Var
    }

    pub fn coord_vars(&self) -> impl Iterator<Item = Var> {
        0..self.coords.len() as Var
    }

    /// Map each variable of `self` to the variable of the same name in `to`.
    pub fn mapping_to(&self, to: &Chart) -> Vec<Option<Var>> {
        self.vars().map(|v| to.index_of(self.name(v))).collect()
    }
}

impl fmt::Debug for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Chart({}; {})", self.coords.join(", "), self.params.join(", "))
    }
}
