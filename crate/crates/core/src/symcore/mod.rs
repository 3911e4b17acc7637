//! Exact expression arithmetic: polynomials, rational functions, the
//! elementary-function layer and the text front-end.

mod chart;
mod elem;
mod parse;
mod poly;
mod rat;

pub use chart::{Chart, Var, FUNCTION_NAMES};
pub use elem::{pow_f64, Atom, AtomKind, AtomProduct, ElemExpr, ElemFn, Value, ZeroTest};
pub use parse::{parse, parse_rat};
pub use poly::{rat, Monomial, Poly};
pub use rat::{reduction_enabled, set_reduction, RatExpr};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymError {
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("zero test undecidable: elementary nodes survived simplification")]
    Undecidable,
    #[error("denominator vanishes at the evaluation point")]
    Pole,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("exponent must be a rational constant")]
    NonConstantExponent,
    #[error("expression is not rational")]
    NotRational,
    #[error("exponent overflow")]
    Overflow,
}
