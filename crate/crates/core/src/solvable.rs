//! Solvable structures, the contraction chain that integrates them, closed
//! one-form factors of closed characterising forms, and first integrals.

use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::exterior::{self, linalg, DiffForm, ExtError, VectorField};
use crate::symcore::{ElemExpr, Monomial, Poly, RatExpr, SymError, Var, ZeroTest};

#[derive(Debug, Clone, Error)]
pub enum SolvError {
    #[error("form is not simple")]
    NotSimple,
    #[error("expected {expected} fields, got {got}")]
    WrongCount { expected: usize, got: usize },
    #[error("fields are not transverse to the kernel: {combination} lies in it")]
    NotDirectSum {
        /// Coefficients of the fields in the kernel combination.
        witness: Vec<RatExpr>,
        combination: VectorField,
    },
    #[error("Lie derivative condition {0} is not proportional")]
    NotProportional(usize),
    #[error("form is not closed")]
    NotClosed,
    #[error("strengthened hypothesis {0} fails")]
    HypothesisFailed(usize),
    #[error("not an eigen-scaling: {0}")]
    NotEigen(String),
    #[error("rescaling certificate does not vanish")]
    CertificateFailed,
    #[error("coefficients are not polynomial")]
    NonPolynomial,
    #[error("function is constant")]
    Constant,
    #[error("generator {index} does not annihilate the function")]
    NotAnnihilated { index: usize, residual: ElemExpr },
    #[error(transparent)]
    Ext(#[from] ExtError),
    #[error(transparent)]
    Sym(#[from] SymError),
}

/// Verified solvable structure with its proportionality factors.
#[derive(Clone, Debug)]
pub struct SolvableStructure {
    pub fields: Vec<VectorField>,
    pub factors: Vec<RatExpr>,
    pub omega: DiffForm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Extracted,
    UserSupplied,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Extracted => "extracted",
            Provenance::UserSupplied => "user-supplied",
        }
    }
}

#[derive(Clone, Debug)]
pub struct FirstIntegral {
    pub expr: ElemExpr,
    /// Generators the function was checked against; empty for potentials.
    pub fields: Vec<VectorField>,
    pub provenance: Provenance,
}

#[derive(Clone, Debug)]
pub struct ChainResult {
    pub sigma: Vec<DiffForm>,
    pub omega: Vec<DiffForm>,
    /// `dω¹ = 0`, then `dωʲ ≡ 0 mod ω¹…ωʲ⁻¹`.
    pub closure: Vec<bool>,
    pub potentials: Vec<Option<RatExpr>>,
}

#[derive(Clone, Debug)]
pub struct FactorSequence {
    /// `Ω, X_p⌟Ω, …, X_2⌟…⌟X_p⌟Ω`.
    pub forms: Vec<DiffForm>,
    /// `Ω(X_p, …, X_1)`.
    pub pairing: RatExpr,
    /// The closing identity, `None` when the pairing is constant.
    pub integrates_last: Option<bool>,
}

fn contraction_matrix(thetas: &[DiffForm], fields: &[VectorField]) -> Vec<Vec<RatExpr>> {
    thetas.iter().map(|t| fields.iter().map(|x| t.pair(x)).collect()).collect()
}

/// Fail with a kernel witness when `Sp{X} ⊕ ker Ω` is not the whole space.
pub fn check_direct_sum(omega: &DiffForm, fields: &[VectorField]) -> Result<(), SolvError> {
    let thetas = exterior::factor_simple(omega).map_err(|_| SolvError::NotSimple)?;
    let m = contraction_matrix(&thetas, fields);
    let null = linalg::nullspace(&m, fields.len());
    let Some(w) = null.into_iter().next() else {
        return Ok(());
    };
    let last = w.iter().rev().find(|c| !c.is_zero()).expect("nonzero null vector").clone();
    let inv = last.recip()?;
    let witness: Vec<RatExpr> = w.iter().map(|c| c * &inv).collect();
    let combination = witness
        .iter()
        .zip(fields)
        .fold(VectorField::zero(omega.chart()), |acc, (k, x)| &acc + &x.scale(k));
    Err(SolvError::NotDirectSum { witness, combination })
}

pub fn verify_solvable(omega: &DiffForm, fields: &[VectorField]) -> Result<SolvableStructure, SolvError> {
    if !exterior::is_simple(omega) {
        return Err(SolvError::NotSimple);
    }
    if fields.len() != omega.degree() {
        return Err(SolvError::WrongCount { expected: omega.degree(), got: fields.len() });
    }
    check_direct_sum(omega, fields)?;
    let mut current = omega.clone();
    let mut factors = Vec::with_capacity(fields.len());
    for (i, x) in fields.iter().enumerate() {
        let l = current.lie_deriv(x).ratio_to(&current).ok_or(SolvError::NotProportional(i + 1))?;
        factors.push(l);
        current = current.interior(x);
    }
    Ok(SolvableStructure { fields: fields.to_vec(), factors, omega: omega.clone() })
}

pub fn chain(s: &SolvableStructure) -> Result<ChainResult, SolvError> {
    let k = s.fields.len();
    let mut sigma = Vec::with_capacity(k);
    let mut omegas = Vec::with_capacity(k);
    for i in 0..k {
        let mut acc = s.omega.clone();
        for j in (0..k).rev() {
            if j != i {
                acc = acc.interior(&s.fields[j]);
            }
        }
        let norm = acc.pair(&s.fields[i]);
        let inv = norm.recip()?;
        omegas.push(acc.scale(&inv));
        sigma.push(acc);
    }
    for (i, w) in omegas.iter().enumerate() {
        for (j, x) in s.fields.iter().enumerate() {
            let expected = if i == j { RatExpr::one() } else { RatExpr::zero() };
            assert!(w.pair(x) == expected, "contraction chain lost duality");
        }
    }
    let mut closure = Vec::with_capacity(k);
    let mut potentials = Vec::with_capacity(k);
    let chart = s.omega.chart();
    for i in 0..k {
        let dw = omegas[i].d();
        let mut acc = dw.clone();
        for w in &omegas[..i] {
            match acc.wedge(w) {
                Ok(next) => acc = next,
                Err(_) => {
                    acc = DiffForm::zero(chart, 0);
                    break;
                }
            }
        }
        closure.push(acc.is_zero());
        let potential = if dw.is_zero() { integrate_closed(&omegas[i], None).ok().and_then(|f| f.expr.to_rat()) } else { None };
        potentials.push(potential);
    }
    Ok(ChainResult { sigma, omega: omegas, closure, potentials })
}

pub fn prop26_factors(omega: &DiffForm, fields: &[VectorField]) -> Result<FactorSequence, SolvError> {
    if !omega.d().is_zero() {
        return Err(SolvError::NotClosed);
    }
    if fields.len() != omega.degree() {
        return Err(SolvError::WrongCount { expected: omega.degree(), got: fields.len() });
    }
    check_direct_sum(omega, fields)?;
    let p = fields.len();
    let mut forms = vec![omega.clone()];
    let mut current = omega.clone();
    for i in (0..p).rev() {
        if !current.lie_deriv(&fields[i]).is_zero() {
            return Err(SolvError::HypothesisFailed(i + 1));
        }
        current = current.interior(&fields[i]);
        if i > 0 {
            if !current.d().is_zero() {
                return Err(SolvError::NotClosed);
            }
            forms.push(current.clone());
        }
    }
    let pairing = current.as_scalar().expect("full contraction is a function");
    let last = forms.last().expect("nonempty");
    let integrates_last = if pairing.constant_value().is_some() {
        None
    } else {
        let df = DiffForm::d_scalar(omega.chart(), &pairing);
        Some(df.wedge(last).map(|w| w.is_zero()).unwrap_or(true))
    };
    Ok(FactorSequence { forms, pairing, integrates_last })
}

/// Exponent `α` making `f^α X` a symmetry of `Ω`, with its certificate.
pub fn scale_to_symmetry(x: &VectorField, omega: &DiffForm, f: &RatExpr) -> Result<BigRational, SolvError> {
    if !omega.d().is_zero() {
        return Err(SolvError::NotClosed);
    }
    let lambda = omega
        .lie_deriv(x)
        .ratio_to(omega)
        .and_then(|l| l.constant_value())
        .ok_or_else(|| SolvError::NotEigen("L_X Ω is not a constant multiple of Ω".into()))?;
    if lambda.is_zero() {
        return Ok(BigRational::zero());
    }
    let xf = x.apply(f);
    let mu = if f.is_zero() { None } else { xf.checked_div(f).ok().and_then(|m| m.constant_value()) };
    let mu = match mu {
        Some(m) if !m.is_zero() => m,
        _ => return Err(SolvError::NotEigen("X(f) is not a nonzero constant multiple of f".into())),
    };
    let alpha = -(&lambda / &mu);
    let lam = RatExpr::constant(lambda);
    let df = DiffForm::d_scalar(omega.chart(), f);
    let certificate = &omega.scale(&(&lam * f)) + &df.wedge(&omega.interior(x))?.scale(&RatExpr::constant(alpha.clone()));
    if !certificate.is_zero() {
        return Err(SolvError::CertificateFailed);
    }
    Ok(alpha)
}

/// Potential of a closed polynomial one-form by the radial homotopy from
/// `base` (the origin when `None`). The result satisfies `dγ = ω` exactly.
pub fn integrate_closed(omega: &DiffForm, base: Option<&[BigRational]>) -> Result<FirstIntegral, SolvError> {
    if omega.degree() != 1 {
        return Err(ExtError::WrongDegree { expected: 1, got: omega.degree() }.into());
    }
    if omega.terms().any(|(_, c)| !c.is_polynomial()) {
        return Err(SolvError::NonPolynomial);
    }
    if !omega.d().is_zero() {
        return Err(SolvError::NotClosed);
    }
    let chart = omega.chart();
    let shift = |e: &RatExpr, sign: i64| -> Result<RatExpr, SolvError> {
        let Some(base) = base else {
            return Ok(e.clone());
        };
        let mut out = e.clone();
        for v in chart.coord_vars() {
            let b = &base[v as usize];
            if !b.is_zero() {
                let moved = &RatExpr::var(v) + &RatExpr::constant(b * BigRational::from_integer(sign.into()));
                out = out.substitute(v, &moved)?;
            }
        }
        Ok(out)
    };
    let mut gamma = Poly::zero();
    for (idx, coef) in omega.terms() {
        let zi = idx[0];
        let moved = shift(coef, 1)?;
        let poly = moved.as_poly().ok_or(SolvError::NonPolynomial)?;
        for (m, a) in poly.terms() {
            let degree: u32 = m.pairs().iter().filter(|(v, _)| chart.is_coord(*v)).map(|(_, e)| e).sum();
            let k = a / BigRational::from_integer((degree + 1).into());
            gamma.add_term(m.mul(&Monomial::var(zi)), k);
        }
    }
    let gamma = shift(&RatExpr::from_poly(gamma), -1)?;
    let check = DiffForm::d_scalar(chart, &gamma);
    assert!(check == *omega, "homotopy potential failed to reproduce the form");
    Ok(FirstIntegral { expr: ElemExpr::from_rat(gamma), fields: Vec::new(), provenance: Provenance::Extracted })
}

/// Check `V(f) = 0` for every generator.
pub fn verify_first_integral(dist: &[VectorField], f: &ElemExpr) -> Result<FirstIntegral, SolvError> {
    let chart = match dist.first() {
        Some(x) => x.chart().clone(),
        None => return Ok(FirstIntegral { expr: f.clone(), fields: Vec::new(), provenance: Provenance::UserSupplied }),
    };
    let coords: Vec<Var> = chart.coord_vars().collect();
    let mut constant = true;
    for v in coords {
        if f.pderiv(v)?.zero_test() != ZeroTest::Zero {
            constant = false;
            break;
        }
    }
    if constant {
        return Err(SolvError::Constant);
    }
    for (index, x) in dist.iter().enumerate() {
        let r = x.apply_elem(f)?;
        match r.zero_test() {
            ZeroTest::Zero => {}
            ZeroTest::NonZero => return Err(SolvError::NotAnnihilated { index, residual: r }),
            ZeroTest::Unknown => return Err(SymError::Undecidable.into()),
        }
    }
    Ok(FirstIntegral { expr: f.clone(), fields: dist.to_vec(), provenance: Provenance::UserSupplied })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jettw::{reduce, EvolutionPde};
    use crate::symcore::{parse, parse_rat, rat, Chart};
    use std::sync::Arc;

    fn plane() -> Arc<Chart> {
        Chart::new(&["x", "y", "z"], &[] as &[&str]).unwrap()
    }

    fn field(ch: &Arc<Chart>, pairs: &[(&str, &str)]) -> VectorField {
        VectorField::parse(ch, pairs).unwrap()
    }

    fn dxdy(ch: &Arc<Chart>) -> DiffForm {
        DiffForm::coordinate(ch, 0).wedge(&DiffForm::coordinate(ch, 1)).unwrap()
    }

    #[test]
    fn coordinate_structure_on_a_plane() {
        let ch = plane();
        let fields = [field(&ch, &[("x", "1")]), field(&ch, &[("y", "1")])];
        let s = verify_solvable(&dxdy(&ch), &fields).unwrap();
        assert!(s.factors.iter().all(|l| l.is_zero()));
        let c = chain(&s).unwrap();
        assert_eq!(c.omega[0], DiffForm::coordinate(&ch, 0));
        assert_eq!(c.omega[1], DiffForm::coordinate(&ch, 1));
        assert_eq!(c.closure, vec![true, true]);
        assert_eq!(c.potentials[0].as_ref().unwrap(), &parse_rat("x", &ch).unwrap());
        assert_eq!(c.potentials[1].as_ref().unwrap(), &parse_rat("y", &ch).unwrap());
    }

    #[test]
    fn nonzero_factor() {
        let ch = plane();
        let fields = [field(&ch, &[("x", "x")]), field(&ch, &[("y", "1")])];
        let s = verify_solvable(&dxdy(&ch), &fields).unwrap();
        assert!(s.factors[0].is_one());
        assert!(s.factors[1].is_zero());
        let fields = [field(&ch, &[("x", "y")]), field(&ch, &[("y", "x")])];
        assert!(matches!(verify_solvable(&dxdy(&ch), &fields), Err(SolvError::NotProportional(_)) | Ok(_)));
        let fields = [field(&ch, &[("x", "1")]), field(&ch, &[("z", "1")])];
        assert!(matches!(verify_solvable(&dxdy(&ch), &fields), Err(SolvError::NotDirectSum { .. })));
    }

    #[test]
    fn closed_factor_sequence_on_a_plane() {
        let ch = plane();
        let fields = [field(&ch, &[("y", "1")]), field(&ch, &[("x", "1")])];
        let seq = prop26_factors(&dxdy(&ch), &fields).unwrap();
        assert_eq!(seq.forms.len(), 2);
        assert_eq!(seq.forms[1], DiffForm::coordinate(&ch, 1));
        assert_eq!(seq.integrates_last, None);
    }

    #[test]
    fn synthetic_two_form() {
        let ch = Chart::new(&["t", "x", "u"], &[] as &[&str]).unwrap();
        let f = parse_rat("u^2 + t", &ch).unwrap();
        let g = parse_rat("x*u", &ch).unwrap();
        let omega = DiffForm::d_scalar(&ch, &f).wedge(&DiffForm::d_scalar(&ch, &g)).unwrap();
        let fields = [field(&ch, &[("t", "1")]), field(&ch, &[("x", "1/u")])];
        let s = verify_solvable(&omega, &fields).unwrap();
        assert!(s.factors.iter().all(|l| l.is_zero()));
        let c = chain(&s).unwrap();
        let gamma: Vec<RatExpr> = c.potentials.iter().map(|p| p.clone().unwrap()).collect();
        assert_eq!(DiffForm::d_scalar(&ch, &gamma[0]), DiffForm::d_scalar(&ch, &f));
        assert_eq!(DiffForm::d_scalar(&ch, &gamma[1]), DiffForm::d_scalar(&ch, &g));
    }

    #[test]
    fn linear_dispersion_example() {
        let tws = reduce(&EvolutionPde::parse(3, "u_xxx", &["c"]).unwrap(), "c").unwrap();
        let ch = tws.chart().clone();
        let omega = tws.omega();
        let x1 = field(&ch, &[("t", "1")]);
        let x2 = field(&ch, &[("x", "1")]);
        let x3 = field(&ch, &[("u", "u"), ("u_xx", "u_xx"), ("u_xxx", "u_xxx")]);
        assert!(omega.lie_deriv(&x1).is_zero());
        assert!(omega.lie_deriv(&x2).is_zero());
        assert_eq!(omega.lie_deriv(&x3), omega.scale(&RatExpr::int(3)));
        assert!(omega.interior(&x1).interior(&x2).is_zero());
        assert!(x2.bracket(&x3).is_zero());
        let f1 = parse_rat("c*u_xx^2 + u_xxx^2", &ch).unwrap();
        assert_eq!(scale_to_symmetry(&x3, omega, &f1).unwrap(), BigRational::new((-3).into(), 2.into()));
        match verify_solvable(omega, &[x3.clone(), x2.clone(), x1.clone()]) {
            Err(SolvError::NotDirectSum { witness, combination }) => {
                assert_eq!(witness[0], RatExpr::zero());
                assert_eq!(witness[1], RatExpr::var(ch.index_of("c").unwrap()));
                assert!(witness[2].is_one());
                assert_eq!(combination, &x1 + &x2.scale(&witness[1]));
            }
            other => panic!("expected a degenerate structure, got {other:?}"),
        }
        assert!(matches!(prop26_factors(omega, &[x3, x2, x1]), Err(SolvError::NotDirectSum { .. })));
        let dist = [tws.v1().clone(), tws.v2().clone()];
        for s in ["c*u_xx^2 + u_xxx^2", "c*u + u_xx", "x - c*t + c^(-1/2)*arctan(c^(-1/2)*u_xxx/u_xx)"] {
            verify_first_integral(&dist, &parse(s, &ch).unwrap()).unwrap();
        }
        assert!(matches!(
            verify_first_integral(&dist, &parse("u", &ch).unwrap()),
            Err(SolvError::NotAnnihilated { index: 0, .. })
        ));
        assert!(matches!(verify_first_integral(&dist, &parse("c^2", &ch).unwrap()), Err(SolvError::Constant)));
    }

    #[test]
    fn synthetic_closed_factors() {
        let tws = reduce(&EvolutionPde::parse(3, "u_xxx", &["c"]).unwrap(), "c").unwrap();
        let ch = tws.chart().clone();
        let f1 = parse_rat("c*u_xx^2 + u_xxx^2", &ch).unwrap();
        let f2 = parse_rat("c*u + u_xx", &ch).unwrap();
        let t = parse_rat("t", &ch).unwrap();
        let d = |f: &RatExpr| DiffForm::d_scalar(&ch, f);
        let omega = d(&f1).wedge(&d(&f2)).unwrap().wedge(&d(&t)).unwrap();
        let fields = [
            field(&ch, &[("u", "-1/(2*c^2*u_xx)"), ("u_xx", "1/(2*c*u_xx)")]),
            field(&ch, &[("u", "1/c")]),
            field(&ch, &[("t", "1")]),
        ];
        let seq = prop26_factors(&omega, &fields).unwrap();
        let last = seq.forms.last().unwrap();
        assert_eq!(*last, -&d(&f1));
        let gamma = integrate_closed(last, None).unwrap().expr.to_rat().unwrap();
        assert!((&gamma + &f1).constant_value().is_some());
    }

    #[test]
    fn homotopy_potentials() {
        let tws = reduce(&EvolutionPde::parse(3, "u_xxx", &["c"]).unwrap(), "c").unwrap();
        let ch = tws.chart().clone();
        let f1 = parse_rat("c*u_xx^2 + u_xxx^2", &ch).unwrap();
        let got = integrate_closed(&DiffForm::d_scalar(&ch, &f1), None).unwrap();
        assert_eq!(got.expr.to_rat().unwrap(), f1);
        assert_eq!(got.provenance, Provenance::Extracted);
        let du = DiffForm::coordinate(&ch, ch.index_of("u").unwrap());
        assert_eq!(integrate_closed(&du, None).unwrap().expr.to_rat().unwrap(), parse_rat("u", &ch).unwrap());
        let base: Vec<BigRational> = (0..ch.nvars()).map(|i| rat(i as i64 + 1)).collect();
        let shifted = integrate_closed(&DiffForm::d_scalar(&ch, &f1), Some(&base)).unwrap();
        assert!(DiffForm::d_scalar(&ch, &(&shifted.expr.to_rat().unwrap() - &f1)).is_zero());
        let top = ch.index_of("u_xxx").unwrap();
        let ratio = DiffForm::one_form(&ch, [(top, parse_rat("u_xxx/(c*u_xx^2 + u_xxx^2)", &ch).unwrap())]);
        assert!(matches!(integrate_closed(&ratio, None), Err(SolvError::NonPolynomial)));
        let open = DiffForm::one_form(&ch, [(0, parse_rat("x", &ch).unwrap())]);
        assert!(matches!(integrate_closed(&open, None), Err(SolvError::NotClosed)));
    }

    #[test]
    fn trivial_rescalings() {
        let ch = Chart::new(&["u"], &[] as &[&str]).unwrap();
        let du = DiffForm::coordinate(&ch, 0);
        let x = field(&ch, &[("u", "1")]);
        assert!(scale_to_symmetry(&x, &du, &parse_rat("u", &ch).unwrap()).unwrap().is_zero());
    }
}
