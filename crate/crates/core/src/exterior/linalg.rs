//! Gaussian elimination over the field of rational functions.
//!
//! Pivots are taken column by column in chart order, choosing the first
//! remaining row with a nonzero entry. Null-space vectors are scaled to
//! polynomial entries with coprime integer content.

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::symcore::RatExpr;

/// Reduced row-echelon form in place; returns the pivot columns.
pub fn rref(rows: &mut [Vec<RatExpr>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][col].recip().expect("pivot is nonzero");
        for entry in rows[r].iter_mut() {
            if !entry.is_zero() {
                *entry = &*entry * &inv;
            }
        }
        for i in 0..rows.len() {
            if i == r || rows[i][col].is_zero() {
                continue;
            }
            let factor = rows[i][col].clone();
            let pivot_row = rows[r].clone();
            for (dst, src) in rows[i].iter_mut().zip(&pivot_row).take(ncols) {
                if !src.is_zero() {
                    *dst = &*dst - &(&factor * src);
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    pivots
}

pub fn rank(rows: &[Vec<RatExpr>], ncols: usize) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m, ncols).len()
}

/// Basis of `{v : rows * v = 0}`, one vector per free column in order.
pub fn nullspace(rows: &[Vec<RatExpr>], ncols: usize) -> Vec<Vec<RatExpr>> {
    let mut m = rows.to_vec();
    let pivots = rref(&mut m, ncols);
    let mut out = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![RatExpr::zero(); ncols];
        v[free] = RatExpr::one();
        for (r, &p) in pivots.iter().enumerate() {
            v[p] = -&m[r][free];
        }
        out.push(clear_denominators(&v));
    }
    out
}

/// Inverse of a square matrix, `None` when singular.
pub fn inverse(m: &[Vec<RatExpr>]) -> Option<Vec<Vec<RatExpr>>> {
    let n = m.len();
    let mut aug: Vec<Vec<RatExpr>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { RatExpr::one() } else { RatExpr::zero() }));
            r
        })
        .collect();
    let pivots = rref(&mut aug, 2 * n);
    if pivots.len() < n || pivots[n - 1] >= n {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Scale a vector by a common denominator and strip rational content so
/// every entry is a polynomial.
pub fn clear_denominators(v: &[RatExpr]) -> Vec<RatExpr> {
    let den = RatExpr::common_denominator(v.iter().filter(|e| !e.is_zero()));
    let scaled: Vec<RatExpr> = v.iter().map(|e| e * &RatExpr::from_poly(den.clone())).collect();
    let mut content: Option<BigRational> = None;
    for p in scaled.iter().filter_map(|e| e.as_poly()).filter(|p| !p.is_zero()) {
        let k = p.primitive().0.abs();
        content = Some(match content {
            None => k,
            Some(g) => rational_gcd(&g, &k),
        });
    }
    match content {
        Some(g) if !g.is_one() => {
            let k = g.recip();
            scaled.iter().map(|e| e.scale(&k)).collect()
        }
        _ => scaled,
    }
}

fn rational_gcd(a: &BigRational, b: &BigRational) -> BigRational {
    BigRational::new(a.numer().gcd(b.numer()), a.denom().lcm(b.denom()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::{parse_rat, Chart};

    #[test]
    fn rank_and_kernel_of_a_symbolic_matrix() {
        let ch = Chart::new(&["x", "y"], &["c"]).unwrap();
        let e = |s: &str| parse_rat(s, &ch).unwrap();
        let rows = vec![
            vec![e("1"), e("x"), e("c")],
            vec![e("y"), e("x*y"), e("c*y")],
        ];
        assert_eq!(rank(&rows, 3), 1);
        let ker = nullspace(&rows, 3);
        assert_eq!(ker.len(), 2);
        for v in &ker {
            for row in &rows {
                let dot = row.iter().zip(v).fold(RatExpr::zero(), |acc, (a, b)| &acc + &(a * b));
                assert!(dot.is_zero());
            }
            assert!(v.iter().all(|x| x.is_polynomial()));
        }
    }

    #[test]
    fn denominators_are_cleared() {
        let ch = Chart::new(&["x"], &[] as &[&str]).unwrap();
        let e = |s: &str| parse_rat(s, &ch).unwrap();
        let v = clear_denominators(&[e("1/(2*x)"), e("3/4")]);
        assert!((&v[0] - &e("2")).is_zero());
        assert!((&v[1] - &e("3*x")).is_zero());
    }
}
