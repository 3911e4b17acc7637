use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::symcore::{Chart, RatExpr, Var};

use super::{ExtError, VectorField};

/// A differential `p`-form `sum f_I dx^I` over strictly increasing index
/// tuples `I` of chart coordinates.
#[derive(Clone)]
pub struct DiffForm {
    chart: Arc<Chart>,
    degree: usize,
    coefs: BTreeMap<Vec<Var>, RatExpr>,
}

/// Sign of the shuffle merging two disjoint increasing tuples, or `None`
/// when they overlap.
fn merge(a: &[Var], b: &[Var]) -> Option<(Vec<Var>, bool)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    let mut odd = false;
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i] < b[j]) {
            out.push(a[i]);
            i += 1;
        } else if i == a.len() || b[j] < a[i] {
            // b[j] jumps over the remaining a's.
            if (a.len() - i) % 2 == 1 {
                odd = !odd;
            }
            out.push(b[j]);
            j += 1;
        } else {
            return None;
        }
    }
    Some((out, odd))
}

impl DiffForm {
    pub fn zero(chart: &Arc<Chart>, degree: usize) -> Self {
        DiffForm { chart: chart.clone(), degree, coefs: BTreeMap::new() }
    }

    pub fn scalar(chart: &Arc<Chart>, f: RatExpr) -> Self {
        let mut out = DiffForm::zero(chart, 0);
        out.add_term(Vec::new(), f);
        out
    }

    /// The coordinate differential `dv`.
    pub fn coordinate(chart: &Arc<Chart>, v: Var) -> Self {
        assert!(chart.is_coord(v), "d{} is not a coordinate differential", chart.name(v));
        let mut out = DiffForm::zero(chart, 1);
        out.add_term(vec![v], RatExpr::one());
        out
    }

    /// A one-form from `(coordinate, coefficient)` pairs.
    pub fn one_form(chart: &Arc<Chart>, coefs: impl IntoIterator<Item = (Var, RatExpr)>) -> Self {
        let mut out = DiffForm::zero(chart, 1);
        for (v, c) in coefs {
            assert!(chart.is_coord(v), "d{} is not a coordinate differential", chart.name(v));
            out.add_term(vec![v], c);
        }
        out
    }

    /// `f dx^I` with an arbitrary (possibly unsorted) index list.
    pub fn monomial(chart: &Arc<Chart>, f: RatExpr, idx: &[Var]) -> Self {
        let mut out = DiffForm::scalar(chart, f);
        for &v in idx {
            out = out.wedge(&DiffForm::coordinate(chart, v)).expect("degree within chart");
        }
        out
    }

    fn add_term(&mut self, idx: Vec<Var>, c: RatExpr) {
        if c.is_zero() {
            return;
        }
        let sum = match self.coefs.remove(&idx) {
            Some(old) => &old + &c,
            None => c,
        };
        if !sum.is_zero() {
            self.coefs.insert(idx, sum);
        }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.coefs.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[Var], &RatExpr)> {
        self.coefs.iter().map(|(k, c)| (k.as_slice(), c))
    }

    pub fn len(&self) -> usize {
        self.coefs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefs.is_empty()
    }

    /// Coefficient of `dx^I` for increasing `I`.
    pub fn coef(&self, idx: &[Var]) -> RatExpr {
        self.coefs.get(idx).cloned().unwrap_or_else(RatExpr::zero)
    }

    /// The function of a zero-form.
    pub fn as_scalar(&self) -> Option<RatExpr> {
        (self.degree == 0).then(|| self.coef(&[]))
    }

    pub fn same_chart(&self, other: &DiffForm) {
        assert!(*self.chart == *other.chart, "forms on different charts");
    }

    pub fn scale(&self, k: &RatExpr) -> Self {
        let mut out = DiffForm::zero(&self.chart, self.degree);
        if k.is_zero() {
            return out;
        }
        for (idx, c) in &self.coefs {
            out.add_term(idx.clone(), c * k);
        }
        out
    }

    pub fn wedge(&self, other: &DiffForm) -> Result<DiffForm, ExtError> {
        self.same_chart(other);
        let degree = self.degree + other.degree;
        if degree > self.chart.dim() {
            return Err(ExtError::DegreeOverflow { degree, dim: self.chart.dim() });
        }
        let mut out = DiffForm::zero(&self.chart, degree);
        for (a, fa) in &self.coefs {
            for (b, fb) in &other.coefs {
                if let Some((idx, odd)) = merge(a, b) {
                    let c = fa * fb;
                    out.add_term(idx, if odd { -c } else { c });
                }
            }
        }
        Ok(out)
    }

    /// Exterior derivative; parameters are constants.
    pub fn d(&self) -> DiffForm {
        let mut out = DiffForm::zero(&self.chart, self.degree + 1);
        if self.degree >= self.chart.dim() {
            return out;
        }
        for (idx, f) in &self.coefs {
            for v in self.chart.coord_vars() {
                let df = f.deriv(v);
                if df.is_zero() {
                    continue;
                }
                if let Some((new, odd)) = merge(&[v], idx) {
                    out.add_term(new, if odd { -df } else { df });
                }
            }
        }
        out
    }

    /// `df` of a function.
    pub fn d_scalar(chart: &Arc<Chart>, f: &RatExpr) -> DiffForm {
        DiffForm::scalar(chart, f.clone()).d()
    }

    /// Interior product `X ⌟ self`; zero on functions.
    pub fn interior(&self, x: &VectorField) -> DiffForm {
        assert!(**x.chart() == *self.chart, "field and form on different charts");
        if self.degree == 0 {
            return DiffForm::zero(&self.chart, 0);
        }
        let mut out = DiffForm::zero(&self.chart, self.degree - 1);
        for (idx, f) in &self.coefs {
            for (k, v) in idx.iter().enumerate() {
                let xv = x.coef(*v);
                if xv.is_zero() {
                    continue;
                }
                let mut rest = idx.clone();
                rest.remove(k);
                let c = f * &xv;
                out.add_term(rest, if k % 2 == 1 { -c } else { c });
            }
        }
        out
    }

    /// Contract successively: `fields[n-1] ⌟ ... ⌟ fields[0] ⌟ self`.
    pub fn contract(&self, fields: &[&VectorField]) -> DiffForm {
        fields.iter().fold(self.clone(), |acc, x| acc.interior(x))
    }

    /// Evaluate a one-form on a field.
    pub fn pair(&self, x: &VectorField) -> RatExpr {
        assert_eq!(self.degree, 1, "pairing needs a one-form");
        self.interior(x).coef(&[])
    }

    /// Lie derivative by the Cartan formula `X⌟dα + d(X⌟α)`.
    pub fn lie_deriv(&self, x: &VectorField) -> DiffForm {
        if self.degree == 0 {
            return DiffForm::scalar(&self.chart, x.apply(&self.coef(&[])));
        }
        &self.d().interior(x) + &self.interior(x).d()
    }

    /// `Some(k)` with `self = k * other` for a function `k`, `None` if not
    /// proportional. Zero forms are proportional to anything with `k = 0`.
    pub fn ratio_to(&self, other: &DiffForm) -> Option<RatExpr> {
        self.same_chart(other);
        if self.is_zero() {
            return Some(RatExpr::zero());
        }
        let (idx, c) = other.coefs.iter().next()?;
        let k = self.coef(idx).checked_div(c).ok()?;
        (self - &other.scale(&k)).is_zero().then_some(k)
    }

    pub fn rechart(&self, to: &Arc<Chart>) -> Result<DiffForm, ExtError> {
        let mut out = DiffForm::zero(to, self.degree);
        for (idx, c) in &self.coefs {
            let mut vars = Vec::new();
            for v in idx {
                let name = self.chart.name(*v);
                vars.push(to.coord_index(name).ok_or_else(|| ExtError::NotCoordinate(name.to_string()))?);
            }
            out = &out + &DiffForm::monomial(to, c.rechart(&self.chart, to)?, &vars);
        }
        Ok(out)
    }
}

impl PartialEq for DiffForm {
    fn eq(&self, other: &Self) -> bool {
        *self.chart == *other.chart && self.degree == other.degree && (self - other).is_zero()
    }
}

impl<'a> std::ops::Add<&'a DiffForm> for &'a DiffForm {
    type Output = DiffForm;
    fn add(self, other: &DiffForm) -> DiffForm {
        self.same_chart(other);
        assert_eq!(self.degree, other.degree, "adding forms of different degree");
        let mut out = self.clone();
        for (idx, c) in &other.coefs {
            out.add_term(idx.clone(), c.clone());
        }
        out
    }
}

impl<'a> std::ops::Sub<&'a DiffForm> for &'a DiffForm {
    type Output = DiffForm;
    fn sub(self, other: &DiffForm) -> DiffForm {
        self + &(-other)
    }
}

impl std::ops::Neg for &DiffForm {
    type Output = DiffForm;
    fn neg(self) -> DiffForm {
        DiffForm {
            chart: self.chart.clone(),
            degree: self.degree,
            coefs: self.coefs.iter().map(|(k, c)| (k.clone(), -c)).collect(),
        }
    }
}

impl fmt::Display for DiffForm {
    /// Prints as `(c*u_xx) dx^dt + (1) du`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coefs.is_empty() {
            return f.write_str("0");
        }
        let name = |v: Var| self.chart.name(v).to_string();
        let parts: Vec<String> = self
            .coefs
            .iter()
            .map(|(idx, c)| {
                let coef = c.to_string_with(&name);
                if idx.is_empty() {
                    coef
                } else {
                    let basis: Vec<String> = idx.iter().map(|v| format!("d{}", name(*v))).collect();
                    format!("({coef}) {}", basis.join("^"))
                }
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

impl fmt::Debug for DiffForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
