use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::symcore::{parse_rat, Chart, ElemExpr, RatExpr, SymError, Var};

use super::ExtError;

/// A derivation `sum X^v d/dv` over the coordinates of a chart.
#[derive(Clone)]
pub struct VectorField {
    chart: Arc<Chart>,
    coefs: BTreeMap<Var, RatExpr>,
}

impl VectorField {
    pub fn zero(chart: &Arc<Chart>) -> Self {
        VectorField { chart: chart.clone(), coefs: BTreeMap::new() }
    }

    /// The coordinate field `d/dv`.
    pub fn coordinate(chart: &Arc<Chart>, v: Var) -> Self {
        assert!(chart.is_coord(v), "d/d{} is not a coordinate field", chart.name(v));
        let mut coefs = BTreeMap::new();
        coefs.insert(v, RatExpr::one());
        VectorField { chart: chart.clone(), coefs }
    }

    pub fn from_coefs(chart: &Arc<Chart>, coefs: impl IntoIterator<Item = (Var, RatExpr)>) -> Self {
        let mut out = VectorField::zero(chart);
        for (v, c) in coefs {
            out.add_coef(v, c);
        }
        out
    }

    /// Build from `(coordinate name, expression)` pairs.
    pub fn parse<S: AsRef<str>>(chart: &Arc<Chart>, pairs: &[(S, S)]) -> Result<Self, ExtError> {
        let mut out = VectorField::zero(chart);
        for (name, expr) in pairs {
            let v = chart
                .coord_index(name.as_ref())
                .ok_or_else(|| ExtError::NotCoordinate(name.as_ref().to_string()))?;
            out.add_coef(v, parse_rat(expr.as_ref(), chart)?);
        }
        Ok(out)
    }

    fn add_coef(&mut self, v: Var, c: RatExpr) {
        assert!(self.chart.is_coord(v), "coefficient on non-coordinate {}", self.chart.name(v));
        if c.is_zero() {
            return;
        }
        let sum = match self.coefs.remove(&v) {
            Some(old) => &old + &c,
            None => c,
        };
        if !sum.is_zero() {
            self.coefs.insert(v, sum);
        }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn coef(&self, v: Var) -> RatExpr {
        self.coefs.get(&v).cloned().unwrap_or_else(RatExpr::zero)
    }

    pub fn coefs(&self) -> impl Iterator<Item = (Var, &RatExpr)> {
        self.coefs.iter().map(|(v, c)| (*v, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coefs.is_empty()
    }

    /// `X(f)` for a rational function.
    pub fn apply(&self, f: &RatExpr) -> RatExpr {
        let mut acc = RatExpr::zero();
        for (v, c) in &self.coefs {
            let d = f.deriv(*v);
            if !d.is_zero() {
                acc = &acc + &(c * &d);
            }
        }
        acc
    }

    /// `X(f)` for an elementary expression.
    pub fn apply_elem(&self, f: &ElemExpr) -> Result<ElemExpr, SymError> {
        let mut acc = ElemExpr::zero();
        for (v, c) in &self.coefs {
            let d = f.pderiv(*v)?;
            acc = &acc + &d.scale_rat(c);
        }
        Ok(acc)
    }

    pub fn scale(&self, k: &RatExpr) -> Self {
        VectorField::from_coefs(&self.chart, self.coefs.iter().map(|(v, c)| (*v, c * k)))
    }

    pub fn bracket(&self, other: &VectorField) -> VectorField {
        self.same_chart(other);
        let mut out = VectorField::zero(&self.chart);
        for v in self.chart.coord_vars() {
            let c = &self.apply(&other.coef(v)) - &other.apply(&self.coef(v));
            out.add_coef(v, c);
        }
        out
    }

    /// Divide through by the coefficient of `v`.
    pub fn normalized_on(&self, v: Var) -> Result<VectorField, ExtError> {
        let c = self.coef(v);
        if c.is_zero() {
            return Err(ExtError::ZeroNormalization(self.chart.name(v).to_string()));
        }
        let inv = c.recip()?;
        Ok(self.scale(&inv))
    }

    pub(crate) fn same_chart(&self, other: &VectorField) {
        assert!(*self.chart == *other.chart, "vector fields on different charts");
    }

    pub fn rechart(&self, to: &Arc<Chart>) -> Result<VectorField, ExtError> {
        let mut out = VectorField::zero(to);
        for (v, c) in &self.coefs {
            let name = self.chart.name(*v);
            let w = to.coord_index(name).ok_or_else(|| ExtError::NotCoordinate(name.to_string()))?;
            out.add_coef(w, c.rechart(&self.chart, to)?);
        }
        Ok(out)
    }

    /// Coefficients in chart order, zeros included.
    pub fn dense(&self) -> Vec<RatExpr> {
        self.chart.coord_vars().map(|v| self.coef(v)).collect()
    }
}

impl PartialEq for VectorField {
    fn eq(&self, other: &Self) -> bool {
        *self.chart == *other.chart && (self - other).is_zero()
    }
}

impl<'a> std::ops::Add<&'a VectorField> for &'a VectorField {
    type Output = VectorField;
    fn add(self, other: &VectorField) -> VectorField {
        self.same_chart(other);
        let mut out = self.clone();
        for (v, c) in &other.coefs {
            out.add_coef(*v, c.clone());
        }
        out
    }
}

impl<'a> std::ops::Sub<&'a VectorField> for &'a VectorField {
    type Output = VectorField;
    fn sub(self, other: &VectorField) -> VectorField {
        self + &(-other)
    }
}

impl std::ops::Neg for &VectorField {
    type Output = VectorField;
    fn neg(self) -> VectorField {
        VectorField {
            chart: self.chart.clone(),
            coefs: self.coefs.iter().map(|(v, c)| (*v, -c)).collect(),
        }
    }
}

impl fmt::Display for VectorField {
    /// Prints as `(u_xxx) d/du + (1) d/dt`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coefs.is_empty() {
            return f.write_str("0");
        }
        let name = |v: Var| self.chart.name(v).to_string();
        let parts: Vec<String> = self
            .coefs
            .iter()
            .map(|(v, c)| format!("({}) d/d{}", c.to_string_with(&name), name(*v)))
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
