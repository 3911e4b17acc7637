//! Total derivatives, conservation laws `D_t T + D_x X = 0` on solutions,
//! and classification of densities on the travelling-wave system.

use std::sync::Arc;

use thiserror::Error;

use crate::exterior::DiffForm;
use crate::jettw::{jet_chart, jet_name, EvolutionPde, TwError, TwSystem};
use crate::solvable::FirstIntegral;
use crate::symcore::{Chart, RatExpr, SymError, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConsError {
    #[error("expression depends on {0}, the top coordinate of the jet chart")]
    JetOverflow(String),
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error(transparent)]
    Tw(#[from] TwError),
}

/// `D_x e = ∂e/∂x + Σ_j u_{(j+1)x} ∂e/∂u_{jx}` on a jet chart of the given
/// order; `e` must not involve the top coordinate.
pub fn total_x(chart: &Chart, order: usize, e: &RatExpr) -> Result<RatExpr, ConsError> {
    let top = chart.require_coord(&jet_name(order))?;
    if e.depends_on(top) {
        return Err(ConsError::JetOverflow(jet_name(order)));
    }
    let mut acc = e.deriv(chart.require_coord("x")?);
    for j in 0..order {
        let v = chart.require_coord(&jet_name(j))?;
        let d = e.deriv(v);
        if !d.is_zero() {
            let next = RatExpr::var(chart.require_coord(&jet_name(j + 1))?);
            acc = &acc + &(&d * &next);
        }
    }
    Ok(acc)
}

/// A density with its flux, over the PDE's jet chart.
#[derive(Clone, Debug)]
pub struct DensityFluxPair {
    pub density: RatExpr,
    pub flux: RatExpr,
}

#[derive(Clone, Debug)]
pub struct ConservationVerdict {
    pub conserved: bool,
    /// `D_t T + D_x X` on solutions, over `chart`.
    pub residual: RatExpr,
    pub chart: Arc<Chart>,
}

/// Decide `D_t T + D_x X ≡ 0` on solutions of `pde`.
pub fn check_conservation(pde: &EvolutionPde, pair: &DensityFluxPair) -> Result<ConservationVerdict, ConsError> {
    let k = pde.order();
    let ext = jet_chart(2 * k + 1, pde.chart().params())?;
    let from = pde.chart();
    let t_density = pair.density.rechart(from, &ext)?;
    let flux = pair.flux.rechart(from, &ext)?;
    let mut dxf = pde.rhs().rechart(from, &ext)?;
    let mut acc = t_density.deriv(ext.require_coord("t")?);
    for j in 0..=k {
        let v: Var = ext.require_coord(&jet_name(j))?;
        let d = t_density.deriv(v);
        if !d.is_zero() {
            acc = &acc + &(&d * &dxf);
        }
        if j < k {
            dxf = total_x(&ext, 2 * k + 1, &dxf)?;
        }
    }
    let residual = &acc + &total_x(&ext, 2 * k + 1, &flux)?;
    Ok(ConservationVerdict { conserved: residual.is_zero(), residual, chart: ext })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DensityClass {
    FirstIntegralComposite,
    TwFluxTrivial,
    ConservedOnPde,
    None,
}

impl DensityClass {
    pub fn as_str(self) -> &'static str {
        match self {
            DensityClass::FirstIntegralComposite => "first-integral-composite",
            DensityClass::TwFluxTrivial => "tw-flux-trivial",
            DensityClass::ConservedOnPde => "conserved-on-pde",
            DensityClass::None => "none",
        }
    }
}

#[derive(Clone, Debug)]
pub struct DensityVerdict {
    pub class: DensityClass,
    /// `V₁(G)` when no travelling-wave identity holds.
    pub residual: Option<RatExpr>,
    /// Functional dependence on the rational supplied integrals, when
    /// decidable: `dG ∧ df¹ ∧ … = 0`.
    pub composite_of_supplied: Option<bool>,
}

/// Classify `G` (over the reduced chart) against the Vessiot fields.
pub fn classify_tw_density(tws: &TwSystem, g: &RatExpr, integrals: &[FirstIntegral]) -> DensityVerdict {
    let (v1, v2) = tws.vessiot_fields();
    let a = v1.apply(g);
    let b = v2.apply(g);
    let class = if a.is_zero() && b.is_zero() {
        DensityClass::FirstIntegralComposite
    } else if (&a + &(&tws.speed_expr() * &b)).is_zero() {
        DensityClass::TwFluxTrivial
    } else {
        DensityClass::None
    };
    let residual = (class == DensityClass::None).then_some(a);
    let composite_of_supplied = if class == DensityClass::FirstIntegralComposite && !integrals.is_empty() {
        dependence(tws, g, integrals)
    } else {
        None
    };
    DensityVerdict { class, residual, composite_of_supplied }
}

fn dependence(tws: &TwSystem, g: &RatExpr, integrals: &[FirstIntegral]) -> Option<bool> {
    let chart = tws.chart();
    let mut acc = DiffForm::d_scalar(chart, g);
    let mut skipped = false;
    for f in integrals {
        match f.expr.to_rat() {
            Some(r) if *f.fields.first().map(|x| x.chart()).unwrap_or(chart) == *chart => {
                match acc.wedge(&DiffForm::d_scalar(chart, &r)) {
                    Ok(w) => acc = w,
                    Err(_) => return Some(true),
                }
            }
            _ => skipped = true,
        }
    }
    match (acc.is_zero(), skipped) {
        (true, _) => Some(true),
        (false, false) => Some(false),
        (false, true) => None,
    }
}
