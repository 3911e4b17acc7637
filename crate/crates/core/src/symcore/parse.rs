//! Expression grammar.
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := "-" unary | power
//! power   := primary ("^" unary)?          right-associative
//! primary := number | name | func "(" expr ")" | "(" expr ")"
//! func    := arctan | atan | ln | log | exp | sqrt | sech | tanh
//! number  := digits ("." digits)?
//! ```
//!
//! Exponents must reduce to rational constants. Decimal literals are exact.

use num_bigint::BigInt;
use num_rational::BigRational;

use super::chart::Chart;
use super::elem::{ElemExpr, ElemFn};
use super::rat::RatExpr;
use super::SymError;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Op(char),
    End,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, SymError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i];
        if ch.is_ascii_whitespace() {
            i += 1;
        } else if ch.is_ascii_digit() || ch == b'.' {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let int_part = &text[start..i];
            let mut frac_part = "";
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                let fs = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                frac_part = &text[fs..i];
            }
            if int_part.is_empty() && frac_part.is_empty() {
                return Err(SymError::Syntax { pos: start, msg: "malformed number".into() });
            }
            let digits = format!("{int_part}{frac_part}");
            let n: BigInt = digits.parse().map_err(|_| SymError::Syntax {
                pos: start,
                msg: "malformed number".into(),
            })?;
            let d = num_traits::pow(BigInt::from(10), frac_part.len());
            out.push((start, Tok::Num(BigRational::new(n, d))));
        } else if ch.is_ascii_alphabetic() {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(text[start..i].to_string())));
        } else if b"+-*/^()".contains(&ch) {
            out.push((i, Tok::Op(ch as char)));
            i += 1;
        } else {
            let c = text[i..].chars().next().unwrap();
            return Err(SymError::Syntax { pos: i, msg: format!("unexpected character `{c}`") });
        }
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    chart: &'a Chart,
}

fn function(name: &str) -> Option<Option<ElemFn>> {
    Some(match name {
        "arctan" | "atan" => Some(ElemFn::Arctan),
        "ln" | "log" => Some(ElemFn::Ln),
        "exp" => Some(ElemFn::Exp),
        "sech" => Some(ElemFn::Sech),
        "tanh" => Some(ElemFn::Tanh),
        "sqrt" => None,
        _ => return None,
    })
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, SymError> {
        Err(SymError::Syntax { pos: self.pos(), msg: msg.into() })
    }

    fn expect(&mut self, op: char) -> Result<(), SymError> {
        if *self.peek() == Tok::Op(op) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected `{op}`"))
        }
    }

    fn expr(&mut self) -> Result<ElemExpr, SymError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    acc = &acc + &self.term()?;
                }
                Tok::Op('-') => {
                    self.bump();
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<ElemExpr, SymError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    acc = acc.checked_mul(&self.unary()?)?;
                }
                Tok::Op('/') => {
                    self.bump();
                    let pos = self.pos();
                    let rhs = self.unary()?;
                    acc = acc.checked_div(&rhs).map_err(|e| match e {
                        SymError::DivisionByZero => {
                            SymError::Syntax { pos, msg: "division by zero".into() }
                        }
                        other => other,
                    })?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<ElemExpr, SymError> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<ElemExpr, SymError> {
        let base = self.primary()?;
        if *self.peek() != Tok::Op('^') {
            return Ok(base);
        }
        self.bump();
        let exp = self.unary()?;
        let e = exp
            .to_rat()
            .and_then(|r| r.constant_value())
            .ok_or(SymError::NonConstantExponent)?;
        base.pow(&e)
    }

    fn primary(&mut self) -> Result<ElemExpr, SymError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(q) => Ok(ElemExpr::from_rat(RatExpr::constant(q))),
            Tok::Ident(name) => {
                if let Some(f) = function(&name) {
                    self.expect('(')?;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return match f {
                        Some(f) => ElemExpr::func(f, arg),
                        None => arg.sqrt(),
                    };
                }
                let v = self
                    .chart
                    .index_of(&name)
                    .ok_or(SymError::UnknownIdentifier(name))?;
                Ok(ElemExpr::var(v))
            }
            Tok::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::End => Err(SymError::Syntax { pos, msg: "unexpected end of input".into() }),
            Tok::Op(c) => Err(SymError::Syntax { pos, msg: format!("unexpected `{c}`") }),
        }
    }
}

/// Parse `text` against the names of `chart`.
pub fn parse(text: &str, chart: &Chart) -> Result<ElemExpr, SymError> {
    if text.trim().is_empty() {
        return Err(SymError::Syntax { pos: 0, msg: "empty expression".into() });
    }
    let toks = tokenize(text)?;
    let mut p = Parser { toks, at: 0, chart };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.err("unexpected trailing input");
    }
    Ok(e)
}

/// Parse and require a rational result.
pub fn parse_rat(text: &str, chart: &Chart) -> Result<RatExpr, SymError> {
    parse(text, chart)?.to_rat().ok_or(SymError::NotRational)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::poly::rat;

    fn chart() -> std::sync::Arc<Chart> {
        Chart::new(&["t", "x", "u", "u_xx", "u_xxx"], &["c"]).unwrap()
    }

    #[test]
    fn precedence() {
        let ch = chart();
        let a = parse("-u^2", &ch).unwrap();
        let b = parse("-(u*u)", &ch).unwrap();
        assert!((&a - &b).is_zero().unwrap());
        let a = parse("2^3^2", &ch).unwrap();
        assert_eq!(a.to_rat().unwrap().constant_value(), Some(rat(512)));
        let a = parse("1 - 2 - 3", &ch).unwrap();
        assert_eq!(a.to_rat().unwrap().constant_value(), Some(rat(-4)));
        let a = parse("u^-1*u", &ch).unwrap();
        assert!(a.to_rat().unwrap().is_one());
        let a = parse("0.25*4", &ch).unwrap();
        assert!(a.to_rat().unwrap().is_one());
    }

    #[test]
    fn kdv_rhs_is_a_rational_function() {
        let ch = chart();
        let f = parse_rat("c*u_xxx/(c-u)", &ch).unwrap();
        let c = ch.index_of("c").unwrap();
        let u = ch.index_of("u").unwrap();
        let w = ch.index_of("u_xxx").unwrap();
        let num = crate::symcore::Poly::var(c).mul(&crate::symcore::Poly::var(w));
        let den = crate::symcore::Poly::var(c).sub(&crate::symcore::Poly::var(u));
        let expected = RatExpr::from_parts(num, den).unwrap();
        assert!((&f - &expected).is_zero());
        assert!(parse("0", &ch).unwrap().is_zero().unwrap());
    }

    #[test]
    fn errors_report_positions() {
        let ch = chart();
        assert_eq!(parse("(u", &ch).unwrap_err(), SymError::Syntax { pos: 2, msg: "expected `)`".into() });
        assert!(matches!(parse("u +", &ch), Err(SymError::Syntax { pos: 3, .. })));
        assert!(matches!(parse("u $ 1", &ch), Err(SymError::Syntax { pos: 2, .. })));
        assert_eq!(parse("y", &ch).unwrap_err(), SymError::UnknownIdentifier("y".into()));
        assert_eq!(parse("u^u", &ch).unwrap_err(), SymError::NonConstantExponent);
        assert!(matches!(parse("", &ch), Err(SymError::Syntax { pos: 0, .. })));
        assert!(matches!(parse("arctan(u)", &ch).map(|e| e.to_rat()), Ok(None)));
        assert_eq!(parse_rat("sech(u)", &ch).unwrap_err(), SymError::NotRational);
    }
}
