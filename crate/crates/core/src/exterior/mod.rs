//! Exterior calculus with rational-function coefficients on a fixed chart.

mod field;
mod form;
pub mod linalg;

use std::sync::Arc;

pub use field::VectorField;
pub use form::DiffForm;

use thiserror::Error;

use crate::symcore::{Chart, RatExpr, SymError, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtError {
    #[error("degree {degree} exceeds chart dimension {dim}")]
    DegreeOverflow { degree: usize, dim: usize },
    #[error("generators are linearly dependent (rank {rank} < {count})")]
    RankDeficient { rank: usize, count: usize },
    #[error("`{0}` is not a chart coordinate")]
    NotCoordinate(String),
    #[error("cannot normalize on d/d{0}: coefficient vanishes")]
    ZeroNormalization(String),
    #[error("form is not simple")]
    NotSimple,
    #[error("expected a form of degree {expected}, got {got}")]
    WrongDegree { expected: usize, got: usize },
    #[error("form test and bracket test disagree")]
    Inconsistent,
    #[error(transparent)]
    Sym(#[from] SymError),
}

/// A span of pointwise independent one-forms.
#[derive(Clone, Debug)]
pub struct Codistribution {
    chart: Arc<Chart>,
    generators: Vec<DiffForm>,
}

impl Codistribution {
    pub fn new(chart: &Arc<Chart>, generators: Vec<DiffForm>) -> Result<Self, ExtError> {
        for g in &generators {
            assert!(**g.chart() == **chart, "generator on a different chart");
            if g.degree() != 1 {
                return Err(ExtError::WrongDegree { expected: 1, got: g.degree() });
            }
        }
        let rows = one_form_matrix(chart, &generators);
        let rank = linalg::rank(&rows, chart.dim());
        if rank < generators.len() {
            return Err(ExtError::RankDeficient { rank, count: generators.len() });
        }
        Ok(Codistribution { chart: chart.clone(), generators })
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn generators(&self) -> &[DiffForm] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// `θ¹ ∧ … ∧ θᵏ`.
    pub fn characterising_form(&self) -> DiffForm {
        self.generators
            .iter()
            .fold(DiffForm::scalar(&self.chart, RatExpr::one()), |acc, g| {
                acc.wedge(g).expect("independent generators fit the chart")
            })
    }

    /// Basis of the annihilated distribution, free columns in chart order.
    pub fn kernel(&self) -> Vec<VectorField> {
        let rows = one_form_matrix(&self.chart, &self.generators);
        fields_from_nullspace(&self.chart, &rows)
    }

    pub fn annihilates(&self, x: &VectorField) -> bool {
        self.generators.iter().all(|g| g.pair(x).is_zero())
    }
}

fn one_form_matrix(chart: &Arc<Chart>, forms: &[DiffForm]) -> Vec<Vec<RatExpr>> {
    forms
        .iter()
        .map(|g| chart.coord_vars().map(|v| g.coef(&[v])).collect())
        .collect()
}

fn fields_from_nullspace(chart: &Arc<Chart>, rows: &[Vec<RatExpr>]) -> Vec<VectorField> {
    linalg::nullspace(rows, chart.dim())
        .into_iter()
        .map(|v| VectorField::from_coefs(chart, v.into_iter().enumerate().map(|(i, c)| (i as Var, c))))
        .collect()
}

/// Recombine `fields` so that field `i` has coefficient `δ_ij` on `coords[j]`.
pub fn normalize_frame(fields: &[VectorField], coords: &[Var]) -> Result<Vec<VectorField>, ExtError> {
    assert_eq!(fields.len(), coords.len(), "frame and coordinate counts differ");
    let Some(first) = fields.first() else {
        return Ok(Vec::new());
    };
    let m: Vec<Vec<RatExpr>> = fields
        .iter()
        .map(|f| coords.iter().map(|&v| f.coef(v)).collect())
        .collect();
    let inv = linalg::inverse(&m).ok_or_else(|| {
        let names: Vec<&str> = coords.iter().map(|&v| first.chart().name(v)).collect();
        ExtError::ZeroNormalization(names.join(","))
    })?;
    Ok(inv
        .iter()
        .map(|row| {
            row.iter()
                .zip(fields)
                .fold(VectorField::zero(first.chart()), |acc, (k, f)| &acc + &f.scale(k))
        })
        .collect())
}

/// Fields `X` with `X ⌟ Ω = 0`.
pub fn form_kernel(omega: &DiffForm) -> Vec<VectorField> {
    let chart = omega.chart();
    if omega.degree() == 0 {
        return if omega.is_zero() {
            chart.coord_vars().map(|v| VectorField::coordinate(chart, v)).collect()
        } else {
            Vec::new()
        };
    }
    let contractions: Vec<DiffForm> = chart
        .coord_vars()
        .map(|v| omega.interior(&VectorField::coordinate(chart, v)))
        .collect();
    let mut slots: Vec<Vec<Var>> = contractions
        .iter()
        .flat_map(|c| c.terms().map(|(idx, _)| idx.to_vec()))
        .collect();
    slots.sort();
    slots.dedup();
    let rows: Vec<Vec<RatExpr>> = slots
        .iter()
        .map(|idx| contractions.iter().map(|c| c.coef(idx)).collect())
        .collect();
    fields_from_nullspace(chart, &rows)
}

/// A nonzero `p`-form is simple iff its kernel has dimension `n − p`.
pub fn is_simple(omega: &DiffForm) -> bool {
    if omega.is_zero() || omega.degree() == 0 {
        return false;
    }
    form_kernel(omega).len() == omega.chart().dim() - omega.degree()
}

/// One-forms `θ¹…θᵖ` with `Ω = θ¹ ∧ … ∧ θᵖ`, from the annihilator of the
/// kernel; the leftover factor is absorbed into `θ¹`.
pub fn factor_simple(omega: &DiffForm) -> Result<Vec<DiffForm>, ExtError> {
    if !is_simple(omega) {
        return Err(ExtError::NotSimple);
    }
    let chart = omega.chart();
    let kernel = form_kernel(omega);
    let rows: Vec<Vec<RatExpr>> = kernel.iter().map(|k| k.dense()).collect();
    let mut thetas: Vec<DiffForm> = linalg::nullspace(&rows, chart.dim())
        .into_iter()
        .map(|v| DiffForm::one_form(chart, v.into_iter().enumerate().map(|(i, c)| (i as Var, c))))
        .collect();
    let wedge = thetas
        .iter()
        .fold(DiffForm::scalar(chart, RatExpr::one()), |acc, t| acc.wedge(t).expect("fits"));
    let k = omega.ratio_to(&wedge).ok_or(ExtError::NotSimple)?;
    thetas[0] = thetas[0].scale(&k);
    Ok(thetas)
}

/// Outcome of the two integrability tests.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FrobeniusReport {
    /// `dθᵃ ∧ θ¹ ∧ … ∧ θᵏ = 0` for every generator.
    pub by_forms: bool,
    /// Kernel closed under the bracket.
    pub by_brackets: bool,
}

pub fn frobenius_report(d: &Codistribution) -> FrobeniusReport {
    let omega = d.characterising_form();
    let by_forms = d.generators().iter().all(|g| match g.d().wedge(&omega) {
        Ok(w) => w.is_zero(),
        Err(_) => true,
    });
    let kernel = d.kernel();
    let mut by_brackets = true;
    'outer: for i in 0..kernel.len() {
        for j in i + 1..kernel.len() {
            if !d.annihilates(&kernel[i].bracket(&kernel[j])) {
                by_brackets = false;
                break 'outer;
            }
        }
    }
    FrobeniusReport { by_forms, by_brackets }
}

/// Frobenius integrability, decided by forms and cross-checked by brackets.
pub fn is_frobenius(d: &Codistribution) -> Result<bool, ExtError> {
    let r = frobenius_report(d);
    if r.by_forms != r.by_brackets {
        return Err(ExtError::Inconsistent);
    }
    Ok(r.by_forms)
}

/// Frobenius test for a simple form given without generators.
pub fn is_frobenius_form(omega: &DiffForm) -> Result<bool, ExtError> {
    let thetas = factor_simple(omega)?;
    is_frobenius(&Codistribution::new(omega.chart(), thetas)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::parse_rat;

    fn chart(coords: &[&str]) -> Arc<Chart> {
        Chart::new(coords, &["c"]).unwrap()
    }

    fn d(ch: &Arc<Chart>, name: &str) -> DiffForm {
        DiffForm::coordinate(ch, ch.coord_index(name).unwrap())
    }

    fn field(ch: &Arc<Chart>, pairs: &[(&str, &str)]) -> VectorField {
        VectorField::parse(ch, pairs).unwrap()
    }

    #[test]
    fn wedge_signs() {
        let ch = chart(&["t", "x", "u"]);
        assert!(d(&ch, "x").wedge(&d(&ch, "x")).unwrap().is_zero());
        let a = d(&ch, "t").wedge(&d(&ch, "x")).unwrap();
        let b = d(&ch, "x").wedge(&d(&ch, "t")).unwrap();
        assert_eq!(a, -&b);
        let three = a.wedge(&d(&ch, "u")).unwrap();
        assert!(matches!(three.wedge(&d(&ch, "t")), Err(ExtError::DegreeOverflow { .. })));
    }

    #[test]
    fn derivative_and_contraction() {
        let ch = chart(&["t", "x", "u"]);
        let u = parse_rat("u", &ch).unwrap();
        let form = d(&ch, "x").scale(&u);
        assert_eq!(form.d(), d(&ch, "u").wedge(&d(&ch, "x")).unwrap());
        let dt_dx = d(&ch, "t").wedge(&d(&ch, "x")).unwrap();
        assert_eq!(dt_dx.interior(&field(&ch, &[("t", "1")])), d(&ch, "x"));
        assert!(d(&ch, "t").interior(&field(&ch, &[("u", "1")])).is_zero());
        assert!(d(&ch, "t").lie_deriv(&field(&ch, &[("t", "1")])).is_zero());
        let f = parse_rat("c*u^2*x/(t+u)", &ch).unwrap();
        assert!(DiffForm::d_scalar(&ch, &f).d().is_zero());
    }

    #[test]
    fn kernels_and_simplicity() {
        let ch = chart(&["t", "x", "u"]);
        let cod = Codistribution::new(&ch, vec![d(&ch, "t"), d(&ch, "x")]).unwrap();
        let ker = cod.kernel();
        assert_eq!(ker, vec![field(&ch, &[("u", "1")])]);
        let dt_dx = d(&ch, "t").wedge(&d(&ch, "x")).unwrap();
        assert!(is_simple(&dt_dx));
        let ch4 = chart(&["t", "x", "u", "w"]);
        let sympl = &d(&ch4, "t").wedge(&d(&ch4, "x")).unwrap() + &d(&ch4, "u").wedge(&d(&ch4, "w")).unwrap();
        assert!(!is_simple(&sympl));
        assert!(form_kernel(&sympl).is_empty());
        assert!(matches!(
            Codistribution::new(&ch, vec![d(&ch, "t"), d(&ch, "t").scale(&parse_rat("u", &ch).unwrap())]),
            Err(ExtError::RankDeficient { rank: 1, count: 2 })
        ));
    }

    #[test]
    fn factoring_recovers_the_form() {
        let ch = chart(&["t", "x", "u", "w"]);
        let e = |s: &str| parse_rat(s, &ch).unwrap();
        let a = DiffForm::one_form(&ch, [(0, e("u")), (2, e("1"))]);
        let b = DiffForm::one_form(&ch, [(1, e("t*w")), (3, e("c"))]);
        let omega = a.wedge(&b).unwrap();
        let thetas = factor_simple(&omega).unwrap();
        assert_eq!(thetas.len(), 2);
        assert_eq!(thetas[0].wedge(&thetas[1]).unwrap(), omega);
    }

    #[test]
    fn frobenius_examples() {
        let ch = chart(&["x", "u", "u_x"]);
        let contact = DiffForm::one_form(&ch, [(1, RatExpr::one()), (0, -parse_rat("u_x", &ch).unwrap())]);
        let cod = Codistribution::new(&ch, vec![contact.clone()]).unwrap();
        assert_eq!(frobenius_report(&cod), FrobeniusReport { by_forms: false, by_brackets: false });
        assert!(!is_frobenius_form(&contact).unwrap());
        let ch = chart(&["t", "x", "u"]);
        let f = parse_rat("t*u^2 + x", &ch).unwrap();
        let g = parse_rat("x*u/(1+t^2)", &ch).unwrap();
        let cod = Codistribution::new(&ch, vec![DiffForm::d_scalar(&ch, &f), DiffForm::d_scalar(&ch, &g)]).unwrap();
        assert!(is_frobenius(&cod).unwrap());
    }

    #[test]
    fn display() {
        let ch = chart(&["t", "x", "u_xx"]);
        let form = d(&ch, "x").wedge(&d(&ch, "t")).unwrap().scale(&parse_rat("-c*u_xx", &ch).unwrap());
        assert_eq!(form.to_string(), "(u_xx*c) dt^dx");
        assert_eq!(field(&ch, &[("t", "1"), ("x", "c")]).to_string(), "(1) d/dt + (c) d/dx");
    }
}
