//! Truncated univariate Taylor series in double precision.

use std::ops::{Add, Mul, Neg, Sub};

use super::NumError;

/// Coefficients `a₀ … a_m` of `Σ aᵢ hⁱ`.
#[derive(Clone, Debug, PartialEq)]
pub struct JetValue {
    coefs: Vec<f64>,
}

impl JetValue {
    pub fn constant(v: f64, order: usize) -> Self {
        let mut coefs = vec![0.0; order + 1];
        coefs[0] = v;
        JetValue { coefs }
    }

    /// The seed `v + h`.
    pub fn variable(v: f64, order: usize) -> Self {
        let mut j = Self::constant(v, order);
        if order > 0 {
            j.coefs[1] = 1.0;
        }
        j
    }

    pub fn from_coefs(coefs: Vec<f64>) -> Self {
        assert!(!coefs.is_empty());
        JetValue { coefs }
    }

    pub fn order(&self) -> usize {
        self.coefs.len() - 1
    }

    pub fn coefs(&self) -> &[f64] {
        &self.coefs
    }

    pub fn value(&self) -> f64 {
        self.coefs[0]
    }

    /// `i!·aᵢ`, the i-th derivative along the seed direction.
    pub fn derivative(&self, i: usize) -> f64 {
        let fact: f64 = (1..=i).map(|k| k as f64).product();
        self.coefs[i] * fact
    }

    pub fn scale(&self, k: f64) -> Self {
        JetValue { coefs: self.coefs.iter().map(|a| a * k).collect() }
    }

    fn zeros(&self) -> Vec<f64> {
        vec![0.0; self.coefs.len()]
    }

    pub fn checked_div(&self, q: &JetValue) -> Result<JetValue, NumError> {
        let q0 = q.coefs[0];
        if q0 == 0.0 || !q0.is_finite() {
            return Err(NumError::Domain("division by zero".into()));
        }
        let mut b = self.zeros();
        for n in 0..b.len() {
            let mut s = self.coefs[n];
            for k in 1..=n {
                s -= q.coefs[k] * b[n - k];
            }
            b[n] = s / q0;
        }
        Ok(JetValue { coefs: b })
    }

    pub fn powi(&self, n: i32) -> Result<JetValue, NumError> {
        if n < 0 {
            return JetValue::constant(1.0, self.order()).checked_div(&self.powi(-n)?);
        }
        let mut acc = JetValue::constant(1.0, self.order());
        let mut base = self.clone();
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        Ok(acc)
    }

    /// `a^r` for real `r`; requires `a₀ > 0`.
    pub fn powf(&self, r: f64) -> Result<JetValue, NumError> {
        let a0 = self.coefs[0];
        if a0 <= 0.0 {
            return Err(NumError::Domain(format!("fractional power of non-positive value {a0}")));
        }
        let mut b = self.zeros();
        b[0] = a0.powf(r);
        for n in 1..b.len() {
            let mut s = 0.0;
            for k in 1..=n {
                s += (r * k as f64 - (n - k) as f64) * self.coefs[k] * b[n - k];
            }
            b[n] = s / (n as f64 * a0);
        }
        Ok(JetValue { coefs: b })
    }

    pub fn exp(&self) -> JetValue {
        let mut b = self.zeros();
        b[0] = self.coefs[0].exp();
        for n in 1..b.len() {
            let s: f64 = (1..=n).map(|k| k as f64 * self.coefs[k] * b[n - k]).sum();
            b[n] = s / n as f64;
        }
        JetValue { coefs: b }
    }

    pub fn ln(&self) -> Result<JetValue, NumError> {
        let a0 = self.coefs[0];
        if a0 <= 0.0 {
            return Err(NumError::Domain(format!("ln of non-positive value {a0}")));
        }
        let mut b = self.zeros();
        b[0] = a0.ln();
        for n in 1..b.len() {
            let s: f64 = (1..n).map(|k| k as f64 * b[k] * self.coefs[n - k]).sum();
            b[n] = (self.coefs[n] - s / n as f64) / a0;
        }
        Ok(JetValue { coefs: b })
    }

    pub fn atan(&self) -> JetValue {
        let m = self.order();
        if m == 0 {
            return JetValue::constant(self.coefs[0].atan(), 0);
        }
        let q = &JetValue::constant(1.0, m) + &(self * self);
        let d = self.deriv().checked_div(&q.truncate(m - 1)).expect("1 + a² is positive");
        d.integrate(self.coefs[0].atan())
    }

    /// `tanh` and `sech` together, through `exp(−|a|)` so neither overflows.
    fn hyperbolic(&self) -> (JetValue, JetValue) {
        let flip = self.coefs[0] < 0.0;
        let a = if flip { -self } else { self.clone() };
        let e = (-&a).exp();
        let e2 = &e * &e;
        let one = JetValue::constant(1.0, self.order());
        let den = &one + &e2;
        let tanh = (&one - &e2).checked_div(&den).expect("1 + e² is positive");
        let sech = e.scale(2.0).checked_div(&den).expect("1 + e² is positive");
        (if flip { -&tanh } else { tanh }, sech)
    }

    pub fn tanh(&self) -> JetValue {
        self.hyperbolic().0
    }

    pub fn sech(&self) -> JetValue {
        self.hyperbolic().1
    }

    fn deriv(&self) -> JetValue {
        let coefs = (1..self.coefs.len()).map(|k| k as f64 * self.coefs[k]).collect();
        JetValue { coefs }
    }

    fn integrate(&self, c: f64) -> JetValue {
        let mut coefs = vec![c];
        coefs.extend(self.coefs.iter().enumerate().map(|(k, a)| a / (k + 1) as f64));
        JetValue { coefs }
    }

    fn truncate(&self, order: usize) -> JetValue {
        JetValue { coefs: self.coefs[..=order].to_vec() }
    }
}

impl Add for &JetValue {
    type Output = JetValue;
    fn add(self, o: &JetValue) -> JetValue {
        JetValue { coefs: self.coefs.iter().zip(&o.coefs).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &JetValue {
    type Output = JetValue;
    fn sub(self, o: &JetValue) -> JetValue {
        JetValue { coefs: self.coefs.iter().zip(&o.coefs).map(|(a, b)| a - b).collect() }
    }
}

impl Neg for &JetValue {
    type Output = JetValue;
    fn neg(self) -> JetValue {
        self.scale(-1.0)
    }
}

impl Mul for &JetValue {
    type Output = JetValue;
    fn mul(self, o: &JetValue) -> JetValue {
        let n = self.coefs.len().min(o.coefs.len());
        let coefs = (0..n).map(|i| (0..=i).map(|k| self.coefs[k] * o.coefs[i - k]).sum()).collect();
        JetValue { coefs }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &JetValue, b: &[f64]) {
        for (x, y) in a.coefs().iter().zip(b) {
            assert!((x - y).abs() < 1e-13 * (1.0 + y.abs()), "{:?} vs {:?}", a.coefs(), b);
        }
    }

    #[test]
    fn arithmetic() {
        let x = JetValue::variable(3.0, 2);
        close(&(&x * &x), &[9.0, 6.0, 1.0]);
        close(&x.powi(-1).unwrap(), &[1.0 / 3.0, -1.0 / 9.0, 1.0 / 27.0]);
        close(&x.powf(0.5).unwrap(), &[3f64.sqrt(), 0.5 / 3f64.sqrt(), -1.0 / (8.0 * 3f64.powf(1.5))]);
        assert_eq!(JetValue::variable(3.0, 2).derivative(2), 0.0);
    }

    #[test]
    fn elementary() {
        let z = JetValue::variable(0.0, 4);
        close(&z.sech(), &[1.0, 0.0, -0.5, 0.0, 5.0 / 24.0]);
        close(&z.tanh(), &[0.0, 1.0, 0.0, -1.0 / 3.0, 0.0]);
        close(&z.exp(), &[1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0]);
        close(&z.atan(), &[0.0, 1.0, 0.0, -1.0 / 3.0, 0.0]);
        let one = JetValue::variable(1.0, 3);
        close(&one.ln().unwrap(), &[0.0, 1.0, -0.5, 1.0 / 3.0]);
        assert!(JetValue::variable(-1.0, 2).ln().is_err());
        assert!(JetValue::variable(0.0, 2).powf(0.5).is_err());
        let far = JetValue::variable(-800.0, 3);
        assert!(far.sech().coefs().iter().all(|c| c.is_finite()));
        close(&far.tanh(), &[-1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn compositions_agree() {
        // sech² = 1 − tanh²
        let a = &JetValue::variable(0.7, 5).scale(1.3) + &JetValue::constant(0.2, 5);
        let s = a.sech();
        let t = a.tanh();
        let lhs = &s * &s;
        let rhs = &JetValue::constant(1.0, 5) - &(&t * &t);
        close(&lhs, rhs.coefs());
        close(&a.exp().ln().unwrap(), a.coefs());
    }
}
