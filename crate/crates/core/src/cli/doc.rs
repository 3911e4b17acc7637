//! Problem documents (`eds-waves/problem@1`).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub const PROBLEM_SCHEMA: &str = "eds-waves/problem@1";

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProblemDocument {
    pub schema: String,
    #[serde(default)]
    pub name: Option<String>,
    /// Free-text sign convention, echoed into the report.
    #[serde(default)]
    pub convention: Option<String>,
    pub pde: PdeSpec,
    #[serde(default)]
    pub candidates: Candidates,
    #[serde(default)]
    pub structure: Option<StructureSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PdeSpec {
    pub order: usize,
    /// Right-hand side of `u_t = F`.
    #[serde(rename = "F")]
    pub rhs: String,
    #[serde(default)]
    pub params: Vec<String>,
    pub wave_speed: String,
    #[serde(default)]
    pub expect: Option<IntegrabilityExpectation>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct IntegrabilityExpectation {
    pub frobenius: bool,
    pub closed: bool,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Candidates {
    #[serde(default)]
    pub first_integrals: Vec<IntegralSpec>,
    #[serde(default)]
    pub densities: Vec<DensitySpec>,
    #[serde(default)]
    pub solutions: Vec<SolutionSpec>,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct IntegralSpec {
    pub name: String,
    /// Over the jet chart; `u_x` is eliminated on the reduced system.
    pub expr: String,
    /// Whether the expression is expected to verify.
    #[serde(default = "yes")]
    pub expect: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DensitySpec {
    pub name: String,
    #[serde(rename = "T")]
    pub density: String,
    #[serde(rename = "X", default)]
    pub flux: Option<String>,
    #[serde(default)]
    pub expect_class: Option<String>,
    #[serde(default = "yes")]
    pub expect_conserved: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridInput {
    pub x: [f64; 2],
    pub t: [f64; 2],
    pub nx: usize,
    pub nt: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SolutionSpec {
    pub name: String,
    /// `u(x, t)` over `t, x`, the PDE parameters and `constants`.
    pub u: String,
    #[serde(default)]
    pub grid: Option<GridInput>,
    #[serde(default)]
    pub constants: BTreeMap<String, f64>,
    /// Names of first integrals whose level sets are checked.
    #[serde(default)]
    pub levels: Vec<String>,
    #[serde(default)]
    pub tol: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub name: String,
    /// Coordinate name to coefficient, over the reduced chart.
    pub coefs: BTreeMap<String, String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct StructureSpec {
    pub fields: Vec<FieldSpec>,
    /// Field names in the order `X₁, …, X_p`; defaults to listing order.
    #[serde(default)]
    pub order: Option<Vec<String>>,
    #[serde(default = "yes")]
    pub expect: bool,
}
