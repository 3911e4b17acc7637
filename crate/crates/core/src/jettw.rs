//! Travelling-wave reduction of a scalar evolution equation `u_t = F` to an
//! exterior differential system on jet coordinates.
//!
//! The ansatz `u_t + c u_x = 0` eliminates `u_x` and every `t`-derivative,
//! leaving the reduced chart `(t, x, u, u_xx, …, u_{kx})`.

use std::sync::Arc;

use thiserror::Error;

use crate::exterior::{self, Codistribution, DiffForm, ExtError, VectorField};
use crate::symcore::{self, Chart, ElemExpr, RatExpr, SymError, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TwError {
    #[error("right-hand side is not affine in u_x")]
    NonAffineInUx,
    #[error("degenerate reduction: {0}")]
    DegenerateReduction(String),
    #[error("order {0} is below 3")]
    OrderTooLow(usize),
    #[error("order must be at least 2, got {0}")]
    InvalidOrder(usize),
    #[error("right-hand side does not depend on {0}")]
    TopDerivativeMissing(String),
    #[error("`{0}` is not a parameter")]
    UnknownSpeed(String),
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error(transparent)]
    Ext(#[from] ExtError),
}

/// Name of the `j`-th pure x-derivative: `u`, `u_x`, `u_xx`, …
pub fn jet_name(j: usize) -> String {
    if j == 0 {
        "u".to_string()
    } else {
        format!("u_{}", "x".repeat(j))
    }
}

/// Chart `(t, x, u, u_x, …, u_{order·x})` plus parameters.
pub fn jet_chart<S: AsRef<str>>(order: usize, params: &[S]) -> Result<Arc<Chart>, SymError> {
    let mut coords = vec!["t".to_string(), "x".to_string()];
    coords.extend((0..=order).map(jet_name));
    let params: Vec<String> = params.iter().map(|p| p.as_ref().to_string()).collect();
    Chart::new(&coords, &params)
}

/// Chart `(t, x, u, u_xx, …, u_{order·x})` plus parameters.
pub fn reduced_chart<S: AsRef<str>>(order: usize, params: &[S]) -> Result<Arc<Chart>, SymError> {
    let mut coords = vec!["t".to_string(), "x".to_string(), jet_name(0)];
    coords.extend((2..=order).map(jet_name));
    let params: Vec<String> = params.iter().map(|p| p.as_ref().to_string()).collect();
    Chart::new(&coords, &params)
}

/// `u_t = F(t, x, u, u_x, …, u_{kx})`.
#[derive(Clone, Debug)]
pub struct EvolutionPde {
    order: usize,
    chart: Arc<Chart>,
    rhs: RatExpr,
}

impl EvolutionPde {
    pub fn parse<S: AsRef<str>>(order: usize, rhs: &str, params: &[S]) -> Result<Self, TwError> {
        if order < 2 {
            return Err(TwError::InvalidOrder(order));
        }
        let chart = jet_chart(order, params)?;
        let rhs = symcore::parse_rat(rhs, &chart)?;
        EvolutionPde::new(order, chart, rhs)
    }

    pub fn new(order: usize, chart: Arc<Chart>, rhs: RatExpr) -> Result<Self, TwError> {
        if order < 2 {
            return Err(TwError::InvalidOrder(order));
        }
        let top = chart.require_coord(&jet_name(order))?;
        if rhs.deriv(top).is_zero() {
            return Err(TwError::TopDerivativeMissing(jet_name(order)));
        }
        Ok(EvolutionPde { order, chart, rhs })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn rhs(&self) -> &RatExpr {
        &self.rhs
    }

    pub fn jet_var(&self, j: usize) -> Var {
        self.chart.coord_index(&jet_name(j)).expect("jet coordinate in chart")
    }
}

/// The reduced travelling-wave system.
#[derive(Clone, Debug)]
pub struct TwSystem {
    pde: EvolutionPde,
    chart: Arc<Chart>,
    speed: Var,
    rhs: RatExpr,
    phi: DiffForm,
    contact: Codistribution,
    omega: DiffForm,
    v1: VectorField,
    v2: VectorField,
}

/// Substitute `u_x = value` with retries at 1, 2, … when 0 is a pole.
fn drop_ux(e: &RatExpr, ux: Var, value: Option<&RatExpr>) -> Result<RatExpr, SymError> {
    if let Some(v) = value {
        return e.substitute(ux, v);
    }
    let mut k = 0;
    loop {
        match e.substitute(ux, &RatExpr::int(k)) {
            Err(SymError::Pole) if k < 64 => k += 1,
            other => return other,
        }
    }
}

/// Reduce `pde` under `u_t + c u_x = 0` with `c` the named parameter.
pub fn reduce(pde: &EvolutionPde, speed: &str) -> Result<TwSystem, TwError> {
    let full = pde.chart();
    let c_full = match full.index_of(speed) {
        Some(v) if !full.is_coord(v) => v,
        _ => return Err(TwError::UnknownSpeed(speed.to_string())),
    };
    let ux = pde.jet_var(1);
    let f = pde.rhs();
    let q = f.deriv(ux);
    if !q.deriv(ux).is_zero() {
        return Err(TwError::NonAffineInUx);
    }
    let p = drop_ux(&(f - &(&q * &RatExpr::var(ux))), ux, None)?;
    let q = drop_ux(&q, ux, None)?;
    let c = RatExpr::var(c_full);
    let den = &c + &q;
    if den.is_zero() {
        return Err(TwError::DegenerateReduction("c + dF/du_x vanishes".into()));
    }
    let rhs_full = &(&c * &p) / &den;
    if rhs_full.is_zero() {
        return Err(TwError::DegenerateReduction("reduced right-hand side vanishes".into()));
    }
    let ux_value = -&(&rhs_full / &c);
    let check = &drop_ux(f, ux, Some(&ux_value))? - &rhs_full;
    if !check.is_zero() {
        return Err(TwError::DegenerateReduction("elimination of u_x is inconsistent".into()));
    }

    let chart = reduced_chart(pde.order(), full.params())?;
    let rhs = rhs_full.rechart(full, &chart)?;
    let speed = chart.require(speed)?;
    let c = RatExpr::var(speed);
    let d = |name: &str| DiffForm::coordinate(&chart, chart.coord_index(name).unwrap());
    let phi = &d("x") - &d("t").scale(&c);

    let mut gens = Vec::with_capacity(pde.order());
    gens.push(&d("u") + &phi.scale(&(&rhs / &c)));
    let u_xx = RatExpr::var(chart.coord_index(&jet_name(2)).unwrap());
    gens.push(&DiffForm::d_scalar(&chart, &rhs) + &phi.scale(&(&c * &u_xx)));
    for b in 3..=pde.order() {
        let ub = RatExpr::var(chart.coord_index(&jet_name(b)).unwrap());
        gens.push(&d(&jet_name(b - 1)) - &phi.scale(&ub));
    }
    let contact = Codistribution::new(&chart, gens)?;
    let omega = contact.characterising_form();
    let kernel = contact.kernel();
    if kernel.len() != 2 {
        return Err(ExtError::RankDeficient { rank: chart.dim() - kernel.len(), count: pde.order() }.into());
    }
    let t = chart.coord_index("t").unwrap();
    let x = chart.coord_index("x").unwrap();
    let frame = exterior::normalize_frame(&kernel, &[t, x])?;
    let [v1, v2]: [VectorField; 2] = frame.try_into().expect("two fields");

    Ok(TwSystem { pde: pde.clone(), chart, speed, rhs, phi, contact, omega, v1, v2 })
}

/// Transport/sub-top criterion verdict with its two residuals.
#[derive(Clone, Debug)]
pub struct CriterionVerdict {
    pub frobenius: bool,
    pub closed: bool,
    /// `F̃_t + c F̃_x`.
    pub transport_residual: RatExpr,
    /// `∂F̃/∂u_{(k−1)x}`.
    pub subtop_residual: RatExpr,
}

/// Brute-force verdict.
#[derive(Clone, Debug)]
pub struct DirectVerdict {
    pub frobenius: bool,
    pub closed: bool,
    /// Generators `a` (1-based) with `dθᵃ ∧ Ω ≠ 0`.
    pub failing_generators: Vec<usize>,
    /// Leibniz terms of `dΩ` (1-based) that do not vanish.
    pub nonzero_terms: Vec<usize>,
    /// Bracket closure of the Vessiot distribution.
    pub brackets_close: bool,
}

impl TwSystem {
    pub fn pde(&self) -> &EvolutionPde {
        &self.pde
    }

    pub fn order(&self) -> usize {
        self.pde.order()
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn speed(&self) -> Var {
        self.speed
    }

    pub fn speed_expr(&self) -> RatExpr {
        RatExpr::var(self.speed)
    }

    /// `F̃` on the reduced chart.
    pub fn rhs(&self) -> &RatExpr {
        &self.rhs
    }

    pub fn phi(&self) -> &DiffForm {
        &self.phi
    }

    pub fn contact(&self) -> &Codistribution {
        &self.contact
    }

    pub fn omega(&self) -> &DiffForm {
        &self.omega
    }

    pub fn v1(&self) -> &VectorField {
        &self.v1
    }

    pub fn v2(&self) -> &VectorField {
        &self.v2
    }

    pub fn vessiot_fields(&self) -> (&VectorField, &VectorField) {
        (&self.v1, &self.v2)
    }

    pub fn var(&self, name: &str) -> Var {
        self.chart.index_of(name).unwrap_or_else(|| panic!("`{name}` not in reduced chart"))
    }

    /// Criterion on `F̃` alone; requires order at least 3.
    pub fn theorem31(&self) -> Result<CriterionVerdict, TwError> {
        let k = self.order();
        if k < 3 {
            return Err(TwError::OrderTooLow(k));
        }
        let f = &self.rhs;
        let transport = &f.deriv(self.var("t")) + &(&self.speed_expr() * &f.deriv(self.var("x")));
        let subtop = f.deriv(self.var(&jet_name(k - 1)));
        let frobenius = transport.is_zero();
        let closed = frobenius && subtop.is_zero();
        Ok(CriterionVerdict { frobenius, closed, transport_residual: transport, subtop_residual: subtop })
    }

    /// `dθᵃ ∧ Ω` for every generator and the Leibniz expansion of `dΩ`.
    pub fn frobenius_direct(&self) -> DirectVerdict {
        let gens = self.contact.generators();
        let failing_generators: Vec<usize> = gens
            .iter()
            .enumerate()
            .filter(|(_, g)| g.d().wedge(&self.omega).map(|w| !w.is_zero()).unwrap_or(false))
            .map(|(a, _)| a + 1)
            .collect();
        let one = DiffForm::scalar(&self.chart, RatExpr::one());
        let mut d_omega = DiffForm::zero(&self.chart, gens.len() + 1);
        let mut nonzero_terms = Vec::new();
        for a in 0..gens.len() {
            let mut term = one.clone();
            for (b, g) in gens.iter().enumerate() {
                let factor = if a == b { g.d() } else { g.clone() };
                term = term.wedge(&factor).expect("fits the chart");
            }
            if a % 2 == 1 {
                term = -&term;
            }
            if !term.is_zero() {
                nonzero_terms.push(a + 1);
            }
            d_omega = &d_omega + &term;
        }
        assert!(d_omega == self.omega.d(), "Leibniz expansion disagrees with dΩ");
        let brackets_close = self.contact.annihilates(&self.v1.bracket(&self.v2));
        DirectVerdict {
            frobenius: failing_generators.is_empty(),
            closed: d_omega.is_zero(),
            failing_generators,
            nonzero_terms,
            brackets_close,
        }
    }

    /// Express a function of the unreduced jet chart on the reduced chart,
    /// replacing `u_x` by `−F̃/c`.
    pub fn restrict(&self, e: &RatExpr) -> Result<RatExpr, TwError> {
        let full = self.pde.chart();
        let ux = self.pde.jet_var(1);
        let value = self.ux_value().rechart(&self.chart, full)?;
        Ok(e.substitute(ux, &value)?.rechart(full, &self.chart)?)
    }

    pub fn restrict_elem(&self, e: &ElemExpr) -> Result<ElemExpr, TwError> {
        let full = self.pde.chart();
        let ux = self.pde.jet_var(1);
        let value = self.ux_value().rechart(&self.chart, full)?;
        Ok(e.substitute(ux, &value)?.rechart(full, &self.chart)?)
    }

    /// `u_x = −F̃/c` on the reduced chart.
    pub fn ux_value(&self) -> RatExpr {
        -&(&self.rhs / &self.speed_expr())
    }

    /// `∂t + c ∂x`.
    pub fn transport_field(&self) -> VectorField {
        VectorField::from_coefs(
            &self.chart,
            [(self.var("t"), RatExpr::one()), (self.var("x"), self.speed_expr())],
        )
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    fn tw(order: usize, f: &str) -> TwSystem {
        reduce(&EvolutionPde::parse(order, f, &["c"]).unwrap(), "c").unwrap()
    }

    fn expr(tws: &TwSystem, s: &str) -> RatExpr {
        symcore::parse_rat(s, tws.chart()).unwrap()
    }

    #[test]
    fn kdv_reduction_and_vessiot_fields() {
        let tws = tw(3, "-u*u_x + u_xxx");
        assert_eq!(*tws.rhs(), expr(&tws, "c*u_xxx/(c-u)"));
        let top = tws.var("u_xxx");
        let expected = expr(&tws, "((c-u)^3*u_xx - u_xxx^2)/(c-u)^2");
        assert_eq!(tws.v1().coef(top), &expected * &expr(&tws, "c"));
        assert_eq!(tws.v2().coef(top), -&expected);
        assert_eq!(tws.v1().coef(tws.var("t")), RatExpr::one());
        assert!(tws.v1().coef(tws.var("x")).is_zero());
        assert_eq!(tws.v2().coef(tws.var("u")), -&(tws.rhs() / &tws.speed_expr()));
        let th2 = &tws.contact().generators()[1];
        assert_eq!(th2.coef(&[tws.var("u")]), expr(&tws, "c*u_xxx/(c-u)^2"));
        assert_eq!(th2.coef(&[top]), expr(&tws, "c/(c-u)"));
        for g in tws.contact().generators() {
            assert!(g.pair(tws.v1()).is_zero() && g.pair(tws.v2()).is_zero());
        }
    }

    #[test]
    fn linear_dispersion_system() {
        let tws = tw(3, "u_xxx");
        assert_eq!(*tws.rhs(), expr(&tws, "u_xxx"));
        let g = tws.contact().generators();
        let phi = tws.phi();
        let d = |n: &str| DiffForm::coordinate(tws.chart(), tws.var(n));
        assert_eq!(g[0], &d("u") + &phi.scale(&expr(&tws, "u_xxx/c")));
        assert_eq!(g[1], &d("u_xxx") + &phi.scale(&expr(&tws, "c*u_xx")));
        assert_eq!(g[2], &d("u_xx") - &phi.scale(&expr(&tws, "u_xxx")));
        let v1 = VectorField::parse(
            tws.chart(),
            &[("t", "1"), ("u", "u_xxx"), ("u_xx", "-c*u_xxx"), ("u_xxx", "c^2*u_xx")],
        )
        .unwrap();
        assert_eq!(*tws.v1(), v1);
        assert_eq!(g[0].d(), d("u_xxx").wedge(phi).unwrap().scale(&expr(&tws, "1/c")));
    }

    #[test]
    fn criterion_and_direct_verdicts() {
        for (f, frob, closed) in [
            ("-u*u_x + u_xxx", true, true),
            ("u_xxx", true, true),
            ("x*u_xxx", false, false),
            ("u*u_xxx", true, true),
            ("u_xxx + u_x", true, true),
            ("u_xx*u_xxx", true, false),
        ] {
            let tws = tw(3, f);
            let th = tws.theorem31().unwrap();
            let direct = tws.frobenius_direct();
            assert_eq!((th.frobenius, th.closed), (frob, closed), "{f}");
            assert_eq!((direct.frobenius, direct.closed), (frob, closed), "{f}");
            assert_eq!(direct.brackets_close, frob, "{f}");
        }
    }

    #[test]
    fn explicit_x_breaks_the_transport_identity() {
        let tws = tw(3, "x*u_xxx");
        assert_eq!(tws.theorem31().unwrap().transport_residual, expr(&tws, "c*u_xxx"));
        let sum = tws.v1() + &tws.v2().scale(&tws.speed_expr());
        assert_ne!(sum, tws.transport_field());
        let br = tws.v1().bracket(tws.v2());
        assert!(!tws.contact().annihilates(&br));
        let autonomous = tw(3, "u*u_xxx + u_xx^2");
        let sum = autonomous.v1() + &autonomous.v2().scale(&autonomous.speed_expr());
        assert_eq!(sum, autonomous.transport_field());
        assert!(autonomous.v1().bracket(autonomous.v2()).is_zero());
    }

    #[test]
    fn second_order_fallback() {
        let tws = tw(2, "u*u_x + u_xx");
        assert_eq!(*tws.rhs(), expr(&tws, "c*u_xx/(c+u)"));
        assert_eq!(tws.theorem31().unwrap_err(), TwError::OrderTooLow(2));
        let direct = tws.frobenius_direct();
        assert_eq!(direct.frobenius, direct.brackets_close);
    }

    #[test]
    fn rejected_inputs() {
        let pde = |f: &str| EvolutionPde::parse(3, f, &["c"]);
        assert!(reduce(&EvolutionPde::parse(2, "u_x + u_xx*0 + u_xx", &["c"]).unwrap(), "c").is_ok());
        assert!(matches!(reduce(&pde("u_x^2 + u_xxx").unwrap(), "c"), Err(TwError::NonAffineInUx)));
        assert!(matches!(pde("u_x"), Err(TwError::TopDerivativeMissing(_))));
        let lin = EvolutionPde::parse(1 + 1, "u_x + 0*u_xx", &["c"]);
        assert!(lin.is_err());
        assert!(matches!(reduce(&pde("u_xxx").unwrap(), "t"), Err(TwError::UnknownSpeed(_))));
        assert!(matches!(reduce(&pde("-c*u_x + u_xxx").unwrap(), "c"), Err(TwError::DegenerateReduction(_))));
    }

    #[test]
    fn restriction_replaces_ux() {
        let tws = tw(3, "-u*u_x - u_xxx");
        let full = tws.pde().chart().clone();
        let e = symcore::parse_rat("u_x^2", &full).unwrap();
        assert_eq!(tws.restrict(&e).unwrap(), expr(&tws, "u_xxx^2/(c-u)^2"));
    }
}
