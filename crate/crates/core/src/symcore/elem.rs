//! Elementary expressions: sums of rational-function coefficients times
//! products of atoms (`arctan`, `ln`, `exp`, `sech`, `tanh` applications and
//! rational powers).
//!
//! The representation is kept in a light normal form: powers of the same
//! atom merge, integer powers of rational bases fold back into the
//! coefficient, and `exp`/`ln` cancel. Beyond that nothing is simplified and
//! a surviving atom makes the zero test undecidable.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::chart::{Chart, Var};
use super::poly::Poly;
use super::rat::RatExpr;
use super::SymError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ElemFn {
    Arctan,
    Ln,
    Exp,
    Sech,
    Tanh,
}

impl ElemFn {
    pub fn name(self) -> &'static str {
        match self {
            ElemFn::Arctan => "arctan",
            ElemFn::Ln => "ln",
            ElemFn::Exp => "exp",
            ElemFn::Sech => "sech",
            ElemFn::Tanh => "tanh",
        }
    }

    pub fn apply_f64(self, x: f64) -> Result<f64, SymError> {
        Ok(match self {
            ElemFn::Arctan => x.atan(),
            ElemFn::Ln => {
                if x <= 0.0 {
                    return Err(SymError::Domain(format!("ln of non-positive value {x}")));
                }
                x.ln()
            }
            ElemFn::Exp => x.exp(),
            ElemFn::Sech => 1.0 / x.cosh(),
            ElemFn::Tanh => x.tanh(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AtomKind {
    /// The base itself; the exponent lives in the enclosing product.
    Power,
    Func(ElemFn),
}

#[derive(Clone)]
pub struct Atom {
    kind: AtomKind,
    arg: Arc<ElemExpr>,
    key: Arc<str>,
}

impl Atom {
    fn new(kind: AtomKind, arg: ElemExpr) -> Atom {
        let head = match kind {
            AtomKind::Power => "pow",
            AtomKind::Func(f) => f.name(),
        };
        let key: Arc<str> = format!("{head}({})", arg.key()).into();
        Atom { kind, arg: Arc::new(arg), key }
    }

    pub fn kind(&self) -> AtomKind {
        self.kind
    }

    pub fn arg(&self) -> &ElemExpr {
        &self.arg
    }

    /// Derivative of the atom's value (for powers: of the base).
    fn deriv(&self, v: Var) -> Result<ElemExpr, SymError> {
        let dw = self.arg.pderiv(v)?;
        if dw.is_structurally_zero() {
            return Ok(ElemExpr::zero());
        }
        let w = (*self.arg).clone();
        let outer = match self.kind {
            AtomKind::Power => ElemExpr::one(),
            AtomKind::Func(ElemFn::Arctan) => {
                let den = &ElemExpr::one() + &(&w * &w);
                return dw.checked_div(&den);
            }
            AtomKind::Func(ElemFn::Ln) => return dw.checked_div(&w),
            AtomKind::Func(ElemFn::Exp) => ElemExpr::atom(self.clone()),
            AtomKind::Func(ElemFn::Sech) => {
                let s = ElemExpr::atom(self.clone());
                let t = ElemExpr::func(ElemFn::Tanh, w)?;
                -&(&s * &t)
            }
            AtomKind::Func(ElemFn::Tanh) => {
                let t = ElemExpr::atom(self.clone());
                &ElemExpr::one() - &(&t * &t)
            }
        };
        Ok(&outer * &dw)
    }
}

impl PartialEq for Atom {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}
impl Eq for Atom {}
impl PartialOrd for Atom {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Atom {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key.cmp(&other.key)
    }
}

fn is_integer(q: &BigRational) -> bool {
    q.denom().is_one()
}

/// Sorted atoms with nonzero rational exponents.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct AtomProduct(Vec<(Atom, BigRational)>);

impl AtomProduct {
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn atoms(&self) -> &[(Atom, BigRational)] {
        &self.0
    }

    /// Build from arbitrary factors, folding integer powers of rational
    /// bases into the returned coefficient.
    fn build(factors: Vec<(Atom, BigRational)>) -> Result<(RatExpr, AtomProduct), SymError> {
        let mut merged: BTreeMap<Atom, BigRational> = BTreeMap::new();
        for (a, e) in factors {
            *merged.entry(a).or_insert_with(BigRational::zero) += e;
        }
        let mut coef = RatExpr::one();
        let mut out = Vec::new();
        for (a, e) in merged {
            if e.is_zero() {
                continue;
            }
            if a.kind == AtomKind::Power && is_integer(&e) {
                if let Some(base) = a.arg.to_rat() {
                    let n = e.to_integer().to_i32().ok_or(SymError::Overflow)?;
                    coef = &coef * &base.pow(n)?;
                    continue;
                }
            }
            out.push((a, e));
        }
        Ok((coef, AtomProduct(out)))
    }

    fn key(&self) -> String {
        self.0
            .iter()
            .map(|(a, e)| format!("{}^{}", a.key, e))
            .collect::<Vec<_>>()
            .join("*")
    }
}

/// `sum coefficient * atom product`, coefficients nonzero.
#[derive(Clone, Default)]
pub struct ElemExpr {
    terms: BTreeMap<AtomProduct, RatExpr>,
}

impl std::fmt::Debug for ElemExpr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_string_with(&|v| format!("v{v}")))
    }
}

/// Result of the zero test on an elementary expression.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZeroTest {
    Zero,
    NonZero,
    Unknown,
}

/// Exact where possible, floating once an atom had to be evaluated.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Exact(BigRational),
    Float(f64),
}

impl Value {
    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
            Value::Float(x) => *x,
        }
    }
}

impl ElemExpr {
    pub fn zero() -> Self {
        ElemExpr::default()
    }

    pub fn one() -> Self {
        ElemExpr::from_rat(RatExpr::one())
    }

    pub fn from_rat(r: RatExpr) -> Self {
        let mut terms = BTreeMap::new();
        if !r.is_zero() {
            terms.insert(AtomProduct::default(), r);
        }
        ElemExpr { terms }
    }

    pub fn var(v: Var) -> Self {
        ElemExpr::from_rat(RatExpr::var(v))
    }

    fn atom(a: Atom) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(AtomProduct(vec![(a, BigRational::one())]), RatExpr::one());
        ElemExpr { terms }
    }

    fn from_product(coef: RatExpr, factors: Vec<(Atom, BigRational)>) -> Result<Self, SymError> {
        let (k, prod) = AtomProduct::build(factors)?;
        let coef = &coef * &k;
        let mut terms = BTreeMap::new();
        if !coef.is_zero() {
            terms.insert(prod, coef);
        }
        Ok(ElemExpr { terms })
    }

    pub fn terms(&self) -> impl Iterator<Item = (&AtomProduct, &RatExpr)> {
        self.terms.iter()
    }

    pub fn to_rat(&self) -> Option<RatExpr> {
        match self.terms.len() {
            0 => Some(RatExpr::zero()),
            1 => {
                let (p, c) = self.terms.iter().next().unwrap();
                p.is_empty().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_rational(&self) -> bool {
        self.to_rat().is_some()
    }

    fn is_structurally_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn zero_test(&self) -> ZeroTest {
        match self.to_rat() {
            Some(r) if r.is_zero() => ZeroTest::Zero,
            Some(_) => ZeroTest::NonZero,
            None => ZeroTest::Unknown,
        }
    }

    /// Boolean zero test; surviving atoms yield [`SymError::Undecidable`].
    pub fn is_zero(&self) -> Result<bool, SymError> {
        match self.zero_test() {
            ZeroTest::Zero => Ok(true),
            ZeroTest::NonZero => Ok(false),
            ZeroTest::Unknown => Err(SymError::Undecidable),
        }
    }

    pub fn key(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms
            .iter()
            .map(|(p, c)| format!("[{}]{}", p.key(), c.key()))
            .collect::<Vec<_>>()
            .join("+")
    }

    pub fn scale_rat(&self, k: &RatExpr) -> ElemExpr {
        if k.is_zero() {
            return ElemExpr::zero();
        }
        let mut out = ElemExpr::zero();
        for (p, c) in &self.terms {
            out.add_term(p.clone(), c * k);
        }
        out
    }

    fn add_term(&mut self, p: AtomProduct, c: RatExpr) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(p) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get() + &c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn checked_mul(&self, other: &ElemExpr) -> Result<ElemExpr, SymError> {
        let mut out = ElemExpr::zero();
        for (pa, ca) in &self.terms {
            for (pb, cb) in &other.terms {
                let mut factors = pa.0.clone();
                factors.extend(pb.0.iter().cloned());
                let (k, prod) = AtomProduct::build(factors)?;
                out.add_term(prod, &(ca * cb) * &k);
            }
        }
        Ok(out)
    }

    /// Raise to a rational power. Products distribute, `(a*b)^e = a^e*b^e`,
    /// which presumes positive bases, as for the wave speed.
    pub fn pow(&self, e: &BigRational) -> Result<ElemExpr, SymError> {
        if e.is_zero() {
            return Ok(ElemExpr::one());
        }
        if self.terms.is_empty() {
            return if e.is_positive() { Ok(ElemExpr::zero()) } else { Err(SymError::DivisionByZero) };
        }
        if is_integer(e) {
            if let Some(r) = self.to_rat() {
                let n = e.to_integer().to_i32().ok_or(SymError::Overflow)?;
                return Ok(ElemExpr::from_rat(r.pow(n)?));
            }
        }
        if is_integer(e) && e.is_positive() && self.terms.len() > 1 {
            let n = e.to_integer().to_u32().ok_or(SymError::Overflow)?;
            let mut acc = ElemExpr::one();
            for _ in 0..n {
                acc = acc.checked_mul(self)?;
            }
            return Ok(acc);
        }
        if self.terms.len() == 1 {
            let (p, c) = self.terms.iter().next().unwrap();
            let mut factors: Vec<(Atom, BigRational)> =
                p.0.iter().map(|(a, k)| (a.clone(), k * e)).collect();
            let coef = if is_integer(e) {
                let n = e.to_integer().to_i32().ok_or(SymError::Overflow)?;
                c.pow(n)?
            } else {
                let (k, more) = rat_root(c, e)?;
                factors.extend(more);
                k
            };
            return ElemExpr::from_product(coef, factors);
        }
        ElemExpr::from_product(
            RatExpr::one(),
            vec![(Atom::new(AtomKind::Power, self.clone()), e.clone())],
        )
    }

    pub fn recip(&self) -> Result<ElemExpr, SymError> {
        self.pow(&-BigRational::one())
    }

    pub fn checked_div(&self, other: &ElemExpr) -> Result<ElemExpr, SymError> {
        if let Some(r) = other.to_rat() {
            if r.is_zero() {
                return Err(SymError::DivisionByZero);
            }
            let inv = RatExpr::one().checked_div(&r)?;
            return Ok(self.scale_rat(&inv));
        }
        self.checked_mul(&other.recip()?)
    }

    pub fn sqrt(&self) -> Result<ElemExpr, SymError> {
        self.pow(&BigRational::new(BigInt::one(), BigInt::from(2)))
    }

    /// Apply an elementary function with the basic identities
    /// `exp(ln w) = w`, `ln(exp w) = w` and values at zero.
    pub fn func(f: ElemFn, arg: ElemExpr) -> Result<ElemExpr, SymError> {
        if arg.is_structurally_zero() {
            return match f {
                ElemFn::Arctan | ElemFn::Tanh => Ok(ElemExpr::zero()),
                ElemFn::Sech | ElemFn::Exp => Ok(ElemExpr::one()),
                ElemFn::Ln => Err(SymError::Domain("ln(0)".into())),
            };
        }
        if f == ElemFn::Ln && arg.to_rat().is_some_and(|r| r.is_one()) {
            return Ok(ElemExpr::zero());
        }
        if let Some(inner) = arg.single_atom() {
            match (f, inner.kind) {
                (ElemFn::Exp, AtomKind::Func(ElemFn::Ln)) | (ElemFn::Ln, AtomKind::Func(ElemFn::Exp)) => {
                    return Ok((*inner.arg).clone());
                }
                _ => {}
            }
        }
        Ok(ElemExpr::atom(Atom::new(AtomKind::Func(f), arg)))
    }

    /// `Some(atom)` when the expression is exactly `1 * atom^1`.
    fn single_atom(&self) -> Option<&Atom> {
        if self.terms.len() != 1 {
            return None;
        }
        let (p, c) = self.terms.iter().next().unwrap();
        (c.is_one() && p.0.len() == 1 && p.0[0].1.is_one()).then(|| &p.0[0].0)
    }

    /// Exact partial derivative.
    pub fn pderiv(&self, v: Var) -> Result<ElemExpr, SymError> {
        let mut out = ElemExpr::zero();
        for (p, c) in &self.terms {
            let dc = c.deriv(v);
            if !dc.is_zero() {
                out.add_term(p.clone(), dc);
            }
            for (j, (a, e)) in p.0.iter().enumerate() {
                let da = a.deriv(v)?;
                if da.is_structurally_zero() {
                    continue;
                }
                let mut factors = p.0.clone();
                factors[j].1 = e - BigRational::one();
                let rest = ElemExpr::from_product(c.scale(e), factors)?;
                out = &out + &rest.checked_mul(&da)?;
            }
        }
        Ok(out)
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for (p, c) in &self.terms {
            out.extend(c.vars());
            for (a, _) in &p.0 {
                out.extend(a.arg.vars());
            }
        }
        out
    }

    /// Rebuild every node through `leaf`, re-applying the normal form.
    fn map_leaves(&self, leaf: &dyn Fn(&RatExpr) -> Result<RatExpr, SymError>) -> Result<ElemExpr, SymError> {
        let mut out = ElemExpr::zero();
        for (p, c) in &self.terms {
            let mut term = ElemExpr::from_rat(leaf(c)?);
            for (a, e) in &p.0 {
                let arg = a.arg.map_leaves(leaf)?;
                let factor = match a.kind {
                    AtomKind::Power => arg.pow(e)?,
                    AtomKind::Func(f) => ElemExpr::func(f, arg)?.pow(e)?,
                };
                term = term.checked_mul(&factor)?;
            }
            out = &out + &term;
        }
        Ok(out)
    }

    pub fn substitute(&self, v: Var, value: &RatExpr) -> Result<ElemExpr, SymError> {
        self.map_leaves(&|r| r.substitute(v, value))
    }

    pub fn rechart(&self, from: &Chart, to: &Chart) -> Result<ElemExpr, SymError> {
        self.map_leaves(&|r| r.rechart(from, to))
    }

    pub fn eval(&self, value: &dyn Fn(Var) -> BigRational) -> Result<Value, SymError> {
        if let Some(r) = self.to_rat() {
            return Ok(Value::Exact(r.eval(value)?));
        }
        let mut acc = 0.0;
        for (p, c) in &self.terms {
            let mut t = c.eval(value)?.to_f64().unwrap_or(f64::NAN);
            for (a, e) in &p.0 {
                let inner = a.arg.eval(value)?.to_f64();
                let base = match a.kind {
                    AtomKind::Power => inner,
                    AtomKind::Func(f) => f.apply_f64(inner)?,
                };
                t *= pow_f64(base, e)?;
            }
            acc += t;
        }
        Ok(Value::Float(acc))
    }

    pub fn to_string_with(&self, name: &dyn Fn(Var) -> String) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (p, c)) in self.terms.iter().enumerate() {
            let mut s = term_string(p, c, name);
            if i > 0 {
                if let Some(rest) = s.strip_prefix('-') {
                    out.push_str(" - ");
                    s = rest.to_string();
                } else {
                    out.push_str(" + ");
                }
            }
            out.push_str(&s);
        }
        out
    }

    pub fn display<'a>(&'a self, chart: &'a Chart) -> impl std::fmt::Display + 'a {
        struct D<'a>(&'a ElemExpr, &'a Chart);
        impl std::fmt::Display for D<'_> {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str(&self.0.to_string_with(&|v| self.1.name(v).to_string()))
            }
        }
        D(self, chart)
    }
}

pub fn pow_f64(base: f64, e: &BigRational) -> Result<f64, SymError> {
    if is_integer(e) {
        let n = e.to_integer().to_i32().ok_or(SymError::Overflow)?;
        return Ok(base.powi(n));
    }
    if base < 0.0 {
        return Err(SymError::Domain(format!("fractional power of negative value {base}")));
    }
    Ok(base.powf(e.to_f64().unwrap_or(f64::NAN)))
}

fn exp_string(e: &BigRational) -> String {
    if is_integer(e) && e.is_positive() {
        format!("^{e}")
    } else {
        format!("^({e})")
    }
}

fn term_string(p: &AtomProduct, c: &RatExpr, name: &dyn Fn(Var) -> String) -> String {
    let mut factors = Vec::new();
    for (a, e) in &p.0 {
        let body = match a.kind {
            AtomKind::Power => {
                let inner = a.arg.to_string_with(name);
                let simple = a.arg.to_rat().is_some_and(|r| {
                    r.is_polynomial() && r.numer().len() == 1 && !r.is_negative_leading() && {
                        let (m, k) = r.numer().leading().unwrap();
                        m.total_degree() <= 1 && (k.is_one() || m.is_one())
                            && (k.is_one() || k.denom().is_one())
                    }
                });
                if simple {
                    inner
                } else {
                    format!("({inner})")
                }
            }
            AtomKind::Func(f) => format!("{}({})", f.name(), a.arg.to_string_with(name)),
        };
        if e.is_one() {
            factors.push(body);
        } else {
            factors.push(format!("{body}{}", exp_string(e)));
        }
    }
    let coef = c.to_string_with(name);
    if factors.is_empty() {
        return coef;
    }
    let atoms = factors.join("*");
    if c.is_one() {
        atoms
    } else if (-c).is_one() {
        format!("-{atoms}")
    } else if c.is_compound() {
        format!("({coef})*{atoms}")
    } else {
        format!("{coef}*{atoms}")
    }
}

/// Split `r^e` (e not an integer) into an exact coefficient plus power atoms.
fn rat_root(r: &RatExpr, e: &BigRational) -> Result<(RatExpr, Vec<(Atom, BigRational)>), SymError> {
    let num = r.numer();
    let (content, prim) = num.primitive();
    if content.is_negative() {
        let atom = Atom::new(AtomKind::Power, ElemExpr::from_rat(r.clone()));
        return Ok((RatExpr::one(), vec![(atom, e.clone())]));
    }
    let mut factors = Vec::new();
    let mut coef = RatExpr::one();
    if !content.is_one() {
        match exact_rational_power(&content, e) {
            Some(k) => coef = RatExpr::constant(k),
            None => factors.push((
                Atom::new(AtomKind::Power, ElemExpr::from_rat(RatExpr::constant(content.clone()))),
                e.clone(),
            )),
        }
    }
    let mono = prim.monomial_content();
    for &(v, a) in mono.pairs() {
        factors.push((
            Atom::new(AtomKind::Power, ElemExpr::var(v)),
            e * BigRational::from_integer(BigInt::from(a)),
        ));
    }
    let rest = prim.div_monomial(&mono);
    if !rest.is_constant() {
        factors.push((Atom::new(AtomKind::Power, ElemExpr::from_rat(RatExpr::from_poly(rest))), e.clone()));
    }
    for (f, d) in r.den_factors() {
        factors.push((
            Atom::new(AtomKind::Power, ElemExpr::from_rat(RatExpr::from_poly(f.clone()))),
            -e * BigRational::from_integer(BigInt::from(*d)),
        ));
    }
    Ok((coef, factors))
}

/// `k^e` when it is rational.
fn exact_rational_power(k: &BigRational, e: &BigRational) -> Option<BigRational> {
    let root = e.denom().to_u32()?;
    let n = k.numer().nth_root(root);
    let d = k.denom().nth_root(root);
    if num_traits::pow(n.clone(), root as usize) != *k.numer()
        || num_traits::pow(d.clone(), root as usize) != *k.denom()
    {
        return None;
    }
    let base = BigRational::new(n, d);
    let p = e.numer().to_i32()?;
    Some(if p >= 0 {
        num_traits::pow(base, p as usize)
    } else {
        num_traits::pow(base.recip(), (-p) as usize)
    })
}

impl<'a> std::ops::Add<&'a ElemExpr> for &'a ElemExpr {
    type Output = ElemExpr;
    fn add(self, other: &ElemExpr) -> ElemExpr {
        let mut out = self.clone();
        for (p, c) in &other.terms {
            out.add_term(p.clone(), c.clone());
        }
        out
    }
}

impl<'a> std::ops::Sub<&'a ElemExpr> for &'a ElemExpr {
    type Output = ElemExpr;
    fn sub(self, other: &ElemExpr) -> ElemExpr {
        self + &(-other)
    }
}

impl std::ops::Neg for &ElemExpr {
    type Output = ElemExpr;
    fn neg(self) -> ElemExpr {
        ElemExpr {
            terms: self.terms.iter().map(|(p, c)| (p.clone(), -c)).collect(),
        }
    }
}

impl std::ops::Neg for ElemExpr {
    type Output = ElemExpr;
    fn neg(self) -> ElemExpr {
        -&self
    }
}

impl<'a> std::ops::Mul<&'a ElemExpr> for &'a ElemExpr {
    type Output = ElemExpr;
    /// Panics only on exponent overflow; see [`ElemExpr::checked_mul`].
    fn mul(self, other: &ElemExpr) -> ElemExpr {
        self.checked_mul(other).expect("exponent overflow in product")
    }
}

impl From<RatExpr> for ElemExpr {
    fn from(r: RatExpr) -> Self {
        ElemExpr::from_rat(r)
    }
}

impl From<Poly> for ElemExpr {
    fn from(p: Poly) -> Self {
        ElemExpr::from_rat(RatExpr::from_poly(p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::{parse, rat};

    fn chart() -> Arc<Chart> {
        Chart::new(&["t", "x", "u", "u_xx", "u_xxx"], &["c"]).unwrap()
    }

    fn p(s: &str) -> ElemExpr {
        parse(s, &chart()).unwrap()
    }

    #[test]
    fn rational_derivatives() {
        let ch = chart();
        let f = p("c*u_xxx/(c-u)");
        let d = f.pderiv(ch.index_of("u").unwrap()).unwrap();
        assert!((&d - &p("c*u_xxx/(c-u)^2")).is_zero().unwrap());
        assert!(p("u_xxx").pderiv(0).unwrap().is_zero().unwrap());
    }

    #[test]
    fn arctan_chain_rule() {
        let ch = chart();
        let f = p("arctan(u_xxx/u_xx)");
        let d = f.pderiv(ch.index_of("u_xx").unwrap()).unwrap();
        let expected = p("(-u_xxx/u_xx^2)/(1+(u_xxx/u_xx)^2)");
        assert!((&d - &expected).is_zero().unwrap());
    }

    #[test]
    fn square_roots_of_the_speed_fold() {
        let a = p("c^(-1/2)*c^(-1/2)");
        assert!((&a - &p("1/c")).is_zero().unwrap());
        let b = p("sqrt(4*c)");
        assert!((&(&b * &b) - &p("4*c")).is_zero().unwrap());
        assert_eq!(p("sqrt(9/4)").to_rat().unwrap().constant_value(), Some(BigRational::new(3.into(), 2.into())));
    }

    #[test]
    fn third_integral_of_linear_dispersion_is_annihilated() {
        let ch = chart();
        let f3 = p("x - c*t + c^(-1/2)*arctan(c^(-1/2)*u_xxx/u_xx)");
        let fields: [&[(&str, &str)]; 2] = [
            &[("t", "1"), ("u", "u_xxx"), ("u_xx", "-c*u_xxx"), ("u_xxx", "c^2*u_xx")],
            &[("x", "1"), ("u", "-u_xxx/c"), ("u_xx", "u_xxx"), ("u_xxx", "-c*u_xx")],
        ];
        for field in fields {
            let mut acc = ElemExpr::zero();
            for (name, coef) in field {
                let d = f3.pderiv(ch.index_of(name).unwrap()).unwrap();
                acc = &acc + &(&d * &p(coef));
            }
            assert_eq!(acc.zero_test(), ZeroTest::Zero, "{acc:?}");
        }
    }

    #[test]
    fn surviving_atoms_are_undecidable() {
        assert_eq!(p("sech(u)").is_zero(), Err(SymError::Undecidable));
        assert_eq!(p("u - c").zero_test(), ZeroTest::NonZero);
        assert!(p("exp(ln(u)) - u").is_zero().unwrap());
        assert!(p("ln(exp(u+c)) - u - c").is_zero().unwrap());
    }

    #[test]
    fn evaluation() {
        let ch = chart();
        let at = |pairs: &'static [(&'static str, i64)]| {
            let ch = ch.clone();
            move |v: Var| {
                pairs
                    .iter()
                    .find(|(n, _)| *n == ch.name(v))
                    .map(|(_, q)| rat(*q))
                    .unwrap_or_else(BigRational::zero)
            }
        };
        let f = p("c*u_xxx/(c-u)");
        assert_eq!(f.eval(&at(&[("c", 2), ("u", 1), ("u_xxx", 3)])).unwrap(), Value::Exact(rat(6)));
        assert_eq!(f.eval(&at(&[("c", 1), ("u", 1)])), Err(SymError::Pole));
        let s = p("3*c*sech(0)^2");
        assert_eq!(s.eval(&at(&[("c", 4)])).unwrap(), Value::Exact(rat(12)));
        let s = p("3*c*sech(u)^2");
        assert_eq!(s.eval(&at(&[("c", 4)])).unwrap(), Value::Float(12.0));
        assert!(matches!(p("ln(u)").eval(&at(&[("u", -1)])), Err(SymError::Domain(_))));
    }

    #[test]
    fn printing_round_trips() {
        let ch = chart();
        for s in [
            "x - c*t + c^(-1/2)*arctan(c^(-1/2)*u_xxx/u_xx)",
            "3*c*sech(1/2*c^(1/2)*(x - c*t))^2",
            "c*u_xxx/(c-u) - 2*u^3/(u_xx*(c+u)^2)",
            "-u*tanh(u) + exp(-u)/3",
            "(2*u+1)^(1/3) - (-u)^(1/2)",
        ] {
            let e = p(s);
            let printed = e.display(&ch).to_string();
            let again = parse(&printed, &ch).unwrap();
            assert_eq!((&again - &e).zero_test(), ZeroTest::Zero, "{s} -> {printed}");
        }
    }
}
