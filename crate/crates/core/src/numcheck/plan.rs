//! Straight-line programs compiled from symbolic expressions, evaluated on jets.

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use super::jet::JetValue;
use super::NumError;
use crate::symcore::{AtomKind, ElemExpr, ElemFn, Poly, RatExpr, Var};

#[derive(Clone, Debug)]
enum Op {
    Const(f64),
    Input(Var),
    Add(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
    PowI(usize, i32),
    PowF(usize, f64),
    Func(ElemFn, usize),
}

/// A compiled expression. Slots are evaluated in order; the last is the result.
#[derive(Clone, Debug)]
pub struct Program {
    ops: Vec<Op>,
    nvars: usize,
}

struct Builder {
    ops: Vec<Op>,
    memo: HashMap<String, usize>,
}

impl Builder {
    fn push(&mut self, op: Op) -> usize {
        self.ops.push(op);
        self.ops.len() - 1
    }

    fn constant(&mut self, q: &BigRational) -> usize {
        self.push(Op::Const(q.to_f64().unwrap_or(f64::NAN)))
    }

    fn poly(&mut self, p: &Poly) -> usize {
        let mut acc = None;
        for (m, c) in p.terms() {
            let mut t = self.constant(c);
            for &(v, e) in m.pairs() {
                let key = format!("v{v}^{e}");
                let f = match self.memo.get(&key) {
                    Some(&s) => s,
                    None => {
                        let x = self.push(Op::Input(v));
                        let s = if e == 1 { x } else { self.push(Op::PowI(x, e as i32)) };
                        self.memo.insert(key, s);
                        s
                    }
                };
                t = self.push(Op::Mul(t, f));
            }
            acc = Some(match acc {
                None => t,
                Some(a) => self.push(Op::Add(a, t)),
            });
        }
        acc.unwrap_or_else(|| self.push(Op::Const(0.0)))
    }

    fn rat(&mut self, r: &RatExpr) -> usize {
        let num = self.poly(r.numer());
        let mut den = None;
        for (f, e) in r.den_factors() {
            let b = self.poly(f);
            let p = if *e == 1 { b } else { self.push(Op::PowI(b, *e as i32)) };
            den = Some(match den {
                None => p,
                Some(d) => self.push(Op::Mul(d, p)),
            });
        }
        match den {
            None => num,
            Some(d) => self.push(Op::Div(num, d)),
        }
    }

    fn power(&mut self, base: usize, e: &BigRational) -> usize {
        if e.is_one() {
            return base;
        }
        if e.denom().is_one() {
            let n = e.numer().to_i32().unwrap_or(i32::MAX);
            return self.push(Op::PowI(base, n));
        }
        self.push(Op::PowF(base, e.to_f64().unwrap_or(f64::NAN)))
    }

    fn elem(&mut self, e: &ElemExpr) -> usize {
        let mut acc = None;
        for (prod, coef) in e.terms() {
            let mut t = self.rat(coef);
            for (atom, q) in prod.atoms() {
                let key = format!("{}^{q}", atom_key(atom.kind(), atom.arg()));
                let slot = match self.memo.get(&key) {
                    Some(&s) => s,
                    None => {
                        let inner = self.elem(atom.arg());
                        let base = match atom.kind() {
                            AtomKind::Power => inner,
                            AtomKind::Func(f) => self.push(Op::Func(f, inner)),
                        };
                        let s = self.power(base, q);
                        self.memo.insert(key, s);
                        s
                    }
                };
                t = self.push(Op::Mul(t, slot));
            }
            acc = Some(match acc {
                None => t,
                Some(a) => self.push(Op::Add(a, t)),
            });
        }
        acc.unwrap_or_else(|| self.push(Op::Const(0.0)))
    }
}

fn atom_key(kind: AtomKind, arg: &ElemExpr) -> String {
    match kind {
        AtomKind::Power => format!("pow({})", arg.key()),
        AtomKind::Func(f) => format!("{}({})", f.name(), arg.key()),
    }
}

impl Program {
    pub fn compile(e: &ElemExpr, nvars: usize) -> Program {
        let mut b = Builder { ops: Vec::new(), memo: HashMap::new() };
        b.elem(e);
        Program { ops: b.ops, nvars }
    }

    pub fn compile_rat(r: &RatExpr, nvars: usize) -> Program {
        let mut b = Builder { ops: Vec::new(), memo: HashMap::new() };
        b.rat(r);
        Program { ops: b.ops, nvars }
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Evaluate with one jet per chart variable; all jets share one order.
    pub fn eval(&self, inputs: &[JetValue]) -> Result<JetValue, NumError> {
        assert_eq!(inputs.len(), self.nvars, "one input per chart variable");
        let order = inputs.first().map_or(0, JetValue::order);
        let mut slots: Vec<JetValue> = Vec::with_capacity(self.ops.len());
        for op in &self.ops {
            let v = match *op {
                Op::Const(c) => JetValue::constant(c, order),
                Op::Input(v) => inputs[v as usize].clone(),
                Op::Add(a, b) => &slots[a] + &slots[b],
                Op::Mul(a, b) => &slots[a] * &slots[b],
                Op::Div(a, b) => slots[a].checked_div(&slots[b])?,
                Op::PowI(a, n) => slots[a].powi(n)?,
                Op::PowF(a, r) => slots[a].powf(r)?,
                Op::Func(f, a) => {
                    let s = &slots[a];
                    match f {
                        ElemFn::Arctan => s.atan(),
                        ElemFn::Ln => s.ln()?,
                        ElemFn::Exp => s.exp(),
                        ElemFn::Sech => s.sech(),
                        ElemFn::Tanh => s.tanh(),
                    }
                }
            };
            if !v.value().is_finite() {
                return Err(NumError::Domain("non-finite intermediate value".into()));
            }
            slots.push(v);
        }
        Ok(slots.pop().unwrap_or_else(|| JetValue::constant(0.0, order)))
    }

    pub fn eval_f64(&self, point: &[f64]) -> Result<f64, NumError> {
        let inputs: Vec<JetValue> = point.iter().map(|&v| JetValue::constant(v, 0)).collect();
        Ok(self.eval(&inputs)?.value())
    }
}
