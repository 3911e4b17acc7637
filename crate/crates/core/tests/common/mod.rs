#![allow(dead_code)]

use std::sync::Arc;

use eds_waves::exterior::{DiffForm, VectorField};
use eds_waves::symcore::{rat, Chart, Monomial, Poly, RatExpr, Var};
use rand::Rng;

pub fn chart_of_dim(n: usize) -> Arc<Chart> {
    let names: Vec<String> = (0..n).map(|i| format!("z{i}")).collect();
    Chart::new(&names, &["c".to_string()]).unwrap()
}

/// Random polynomial in `nvars` variables of total degree at most `deg`.
pub fn random_poly<R: Rng>(rng: &mut R, nvars: usize, deg: u32, terms: usize) -> Poly {
    let mut p = Poly::zero();
    for _ in 0..terms {
        let mut pairs = Vec::new();
        let mut left = deg;
        for v in 0..nvars {
            if left == 0 {
                break;
            }
            let e = rng.gen_range(0..=left.min(2));
            if e > 0 {
                pairs.push((v as Var, e));
                left -= e;
            }
        }
        let c = rng.gen_range(-4i64..=4);
        p.add_term(Monomial::from_pairs(pairs), rat(c));
    }
    p
}

pub fn random_rat<R: Rng>(rng: &mut R, nvars: usize, deg: u32) -> RatExpr {
    RatExpr::from_poly(random_poly(rng, nvars, deg, 3))
}

pub fn random_form<R: Rng>(rng: &mut R, chart: &Arc<Chart>, degree: usize, deg: u32) -> DiffForm {
    let n = chart.dim();
    let mut out = DiffForm::zero(chart, degree);
    for _ in 0..3 {
        let mut idx: Vec<Var> = (0..n as Var).collect();
        while idx.len() > degree {
            let k = rng.gen_range(0..idx.len());
            idx.remove(k);
        }
        let f = random_rat(rng, chart.nvars(), deg);
        out = &out + &DiffForm::monomial(chart, f, &idx);
    }
    out
}

pub fn random_field<R: Rng>(rng: &mut R, chart: &Arc<Chart>, deg: u32) -> VectorField {
    VectorField::from_coefs(
        chart,
        chart.coord_vars().map(|v| (v, random_rat(rng, chart.nvars(), deg))).collect::<Vec<_>>(),
    )
}
