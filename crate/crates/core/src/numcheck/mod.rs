//! Floating-point validation of closed-form candidates: Taylor-mode
//! derivatives, PDE residuals and level-set constancy on a grid.

mod jet;
mod plan;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use jet::JetValue;
pub use plan::Program;

use crate::jettw::{jet_name, EvolutionPde, TwSystem};
use crate::symcore::{Chart, ElemExpr, SymError, Var};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("no value supplied for {0}")]
    MissingConstant(String),
    #[error("candidate chart needs coordinates x and t")]
    BadChart,
    #[error("grid needs at least one node per axis")]
    EmptyGrid,
    #[error(transparent)]
    Sym(#[from] SymError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_range: [f64; 2],
    pub t_range: [f64; 2],
    pub nx: usize,
    pub nt: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { x_range: [-20.0, 20.0], t_range: [0.0, 10.0], nx: 201, nt: 101 }
    }
}

impl GridSpec {
    pub fn nodes(&self) -> usize {
        self.nx * self.nt
    }

    /// Node `idx` as `(x, t)`; x varies fastest.
    pub fn node(&self, idx: usize) -> (f64, f64) {
        let axis = |r: [f64; 2], n: usize, i: usize| {
            if n == 1 {
                r[0]
            } else {
                r[0] + (r[1] - r[0]) * i as f64 / (n - 1) as f64
            }
        };
        (axis(self.x_range, self.nx, idx % self.nx), axis(self.t_range, self.nt, idx / self.nx))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub max: f64,
    pub x: f64,
    pub t: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelStat {
    pub expr: String,
    /// Value at the first evaluated node.
    pub reference: f64,
    pub deviation: Extremum,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub grid: GridSpec,
    pub nodes: usize,
    pub skipped: usize,
    pub residual: Option<Extremum>,
    pub levels: Vec<LevelStat>,
    pub constants: BTreeMap<String, f64>,
}

impl GridReport {
    fn empty(grid: &GridSpec, constants: &BTreeMap<String, f64>) -> Self {
        GridReport {
            grid: grid.clone(),
            nodes: grid.nodes(),
            skipped: 0,
            residual: None,
            levels: Vec::new(),
            constants: constants.clone(),
        }
    }

    /// Fold another report on the same grid into this one.
    pub fn merge(&mut self, other: GridReport) {
        self.skipped = self.skipped.max(other.skipped);
        if other.residual.is_some() {
            self.residual = other.residual;
        }
        self.levels.extend(other.levels);
    }
}

/// Taylor coefficients of `expr` along `direction` at `point` (one value per
/// chart variable).
pub fn jet_eval(expr: &ElemExpr, chart: &Chart, point: &[f64], direction: Var, order: usize) -> Result<JetValue, NumError> {
    let prog = Program::compile(expr, chart.nvars());
    eval_seeded(&prog, point, direction, order)
}

fn eval_seeded(prog: &Program, point: &[f64], direction: Var, order: usize) -> Result<JetValue, NumError> {
    let inputs: Vec<JetValue> = point
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if i == direction as usize {
                JetValue::variable(v, order)
            } else {
                JetValue::constant(v, order)
            }
        })
        .collect();
    prog.eval(&inputs)
}

/// A candidate `u(x, t)` ready for sampling jets at grid nodes.
struct Sampler {
    prog: Program,
    base: Vec<f64>,
    x: Var,
    t: Var,
    order: usize,
}

/// `u, u_x, …, u_{order·x}` and `u_t` at a node.
struct Sample {
    jets: Vec<f64>,
    ut: f64,
}

impl Sampler {
    fn new(candidate: &ElemExpr, chart: &Chart, constants: &BTreeMap<String, f64>, order: usize) -> Result<Self, NumError> {
        let x = chart.coord_index("x").ok_or(NumError::BadChart)?;
        let t = chart.coord_index("t").ok_or(NumError::BadChart)?;
        let mut base = Vec::with_capacity(chart.nvars());
        for v in chart.vars() {
            if v == x || v == t {
                base.push(0.0);
            } else {
                let name = chart.name(v);
                base.push(*constants.get(name).ok_or_else(|| NumError::MissingConstant(name.into()))?);
            }
        }
        Ok(Sampler { prog: Program::compile(candidate, chart.nvars()), base, x, t, order })
    }

    fn sample(&self, xv: f64, tv: f64) -> Result<Sample, NumError> {
        let mut p = self.base.clone();
        p[self.x as usize] = xv;
        p[self.t as usize] = tv;
        let jx = eval_seeded(&self.prog, &p, self.x, self.order)?;
        let jt = eval_seeded(&self.prog, &p, self.t, 1)?;
        Ok(Sample { jets: (0..=self.order).map(|i| jx.derivative(i)).collect(), ut: jt.derivative(1) })
    }
}

/// Lookup plan for an expression over a jet-type chart.
fn jet_point_map(chart: &Chart, order: usize, constants: &BTreeMap<String, f64>) -> Result<Vec<Slot>, NumError> {
    let mut out = Vec::new();
    for v in chart.vars() {
        let name = chart.name(v);
        let slot = if name == "t" {
            Slot::T
        } else if name == "x" {
            Slot::X
        } else if let Some(j) = (0..=order).find(|&j| jet_name(j) == name) {
            Slot::Jet(j)
        } else {
            Slot::Const(*constants.get(name).ok_or_else(|| NumError::MissingConstant(name.into()))?)
        };
        out.push(slot);
    }
    Ok(out)
}

#[derive(Clone, Copy)]
enum Slot {
    T,
    X,
    Jet(usize),
    Const(f64),
}

fn fill(slots: &[Slot], xv: f64, tv: f64, s: &Sample) -> Vec<f64> {
    slots
        .iter()
        .map(|sl| match *sl {
            Slot::T => tv,
            Slot::X => xv,
            Slot::Jet(j) => s.jets[j],
            Slot::Const(c) => c,
        })
        .collect()
}

fn check_grid(grid: &GridSpec) -> Result<(), NumError> {
    if grid.nx == 0 || grid.nt == 0 {
        return Err(NumError::EmptyGrid);
    }
    Ok(())
}

/// Evaluate `f` at every node in parallel; results stay in node order.
fn sweep<F>(grid: &GridSpec, f: F) -> Vec<Option<f64>>
where
    F: Fn(f64, f64) -> Result<f64, NumError> + Sync,
{
    (0..grid.nodes())
        .into_par_iter()
        .map(|i| {
            let (x, t) = grid.node(i);
            f(x, t).ok().filter(|v| v.is_finite())
        })
        .collect()
}

/// Max of `|vᵢ − reference|` over evaluated nodes; ties keep the first node.
fn max_abs(grid: &GridSpec, vals: &[Option<f64>], reference: f64) -> Option<Extremum> {
    let mut best: Option<(f64, usize)> = None;
    for (i, v) in vals.iter().enumerate() {
        if let Some(v) = v {
            let d = (v - reference).abs();
            if best.is_none_or(|(m, _)| d > m) {
                best = Some((d, i));
            }
        }
    }
    best.map(|(max, i)| {
        let (x, t) = grid.node(i);
        Extremum { max, x, t }
    })
}

/// `u_t − F` for the candidate at every node.
pub fn pde_residual(
    pde: &EvolutionPde,
    candidate: &ElemExpr,
    candidate_chart: &Chart,
    constants: &BTreeMap<String, f64>,
    grid: &GridSpec,
) -> Result<GridReport, NumError> {
    check_grid(grid)?;
    let k = pde.order();
    let sampler = Sampler::new(candidate, candidate_chart, constants, k)?;
    let slots = jet_point_map(pde.chart(), k, constants)?;
    let rhs = Program::compile_rat(pde.rhs(), pde.chart().nvars());
    let vals = sweep(grid, |x, t| {
        let s = sampler.sample(x, t)?;
        Ok(s.ut - rhs.eval_f64(&fill(&slots, x, t, &s))?)
    });
    let mut report = GridReport::empty(grid, constants);
    report.skipped = vals.iter().filter(|v| v.is_none()).count();
    report.residual = max_abs(grid, &vals, 0.0);
    Ok(report)
}

/// Deviation of `f` along the candidate from its value at the first node.
/// `f` may use any of `t, x, u, u_x, …, u_kx` and named constants.
pub fn level_check(
    tws: &TwSystem,
    f: &ElemExpr,
    f_chart: &Chart,
    candidate: &ElemExpr,
    candidate_chart: &Chart,
    constants: &BTreeMap<String, f64>,
    grid: &GridSpec,
) -> Result<GridReport, NumError> {
    check_grid(grid)?;
    let k = tws.order();
    let sampler = Sampler::new(candidate, candidate_chart, constants, k)?;
    let slots = jet_point_map(f_chart, k, constants)?;
    let prog = Program::compile(f, f_chart.nvars());
    let vals = sweep(grid, |x, t| {
        let s = sampler.sample(x, t)?;
        prog.eval_f64(&fill(&slots, x, t, &s))
    });
    let mut report = GridReport::empty(grid, constants);
    report.skipped = vals.iter().filter(|v| v.is_none()).count();
    if let Some(reference) = vals.iter().flatten().next().copied() {
        let deviation = max_abs(grid, &vals, reference).expect("at least one node evaluated");
        report.levels.push(LevelStat { expr: f.display(f_chart).to_string(), reference, deviation });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jettw::reduce;
    use crate::symcore::{parse, Value};

    fn sol_chart() -> std::sync::Arc<Chart> {
        Chart::new(&["t", "x"], &["c", "M"]).unwrap()
    }

    fn consts(c: f64) -> BTreeMap<String, f64> {
        [("c".to_string(), c), ("M".to_string(), 0.0)].into()
    }

    const SOLITON: &str = "3*c*sech(1/2*sqrt(c)*(x - c*t) + M)^2";

    #[test]
    fn jets_of_expressions() {
        let ch = sol_chart();
        let x = ch.require("x").unwrap();
        let e = parse("x^2", &ch).unwrap();
        let j = jet_eval(&e, &ch, &[0.0, 3.0, 1.0, 0.0], x, 2).unwrap();
        assert_eq!(j.coefs(), &[9.0, 6.0, 1.0]);
        let e = parse("sech(x)", &ch).unwrap();
        let j = jet_eval(&e, &ch, &[0.0; 4], x, 2).unwrap();
        assert_eq!(j.coefs(), &[1.0, 0.0, -0.5]);
        let e = parse("ln(x)", &ch).unwrap();
        assert!(matches!(jet_eval(&e, &ch, &[0.0; 4], x, 2), Err(NumError::Domain(_))));
    }

    #[test]
    fn soliton_jets_match_symbolic_derivatives() {
        let ch = sol_chart();
        let x = ch.require("x").unwrap();
        let e = parse(SOLITON, &ch).unwrap();
        let pt = [0.3, -0.7, 1.0, 0.0];
        let j = jet_eval(&e, &ch, &pt, x, 4).unwrap();
        let val = |v: Var| num_rational::BigRational::from_float(pt[v as usize]).unwrap();
        let mut d = e.clone();
        for i in 0..=4 {
            let sym = match d.eval(&val).unwrap() {
                Value::Exact(q) => num_traits::ToPrimitive::to_f64(&q).unwrap(),
                Value::Float(f) => f,
            };
            assert!((j.derivative(i) - sym).abs() < 1e-12 * (1.0 + sym.abs()), "order {i}");
            d = d.pderiv(x).unwrap();
        }
    }

    #[test]
    fn residuals() {
        let kdv = EvolutionPde::parse(3, "-u*u_x - u_xxx", &["c"]).unwrap();
        let ch = sol_chart();
        let grid = GridSpec::default();
        let sol = parse(SOLITON, &ch).unwrap();
        let r = pde_residual(&kdv, &sol, &ch, &consts(1.0), &grid).unwrap();
        assert_eq!(r.skipped, 0);
        assert!(r.residual.unwrap().max < 1e-8);
        let five = parse("5", &ch).unwrap();
        assert_eq!(pde_residual(&kdv, &five, &ch, &consts(1.0), &grid).unwrap().residual.unwrap().max, 0.0);
        let lin = EvolutionPde::parse(3, "u_xxx", &["c"]).unwrap();
        let ramp = parse("x - c*t", &ch).unwrap();
        let small = GridSpec { nx: 11, nt: 5, ..GridSpec::default() };
        let r = pde_residual(&lin, &ramp, &ch, &consts(2.0), &small).unwrap();
        assert!((r.residual.unwrap().max - 2.0).abs() < 1e-15);
        let cubic = parse("x^3 + 6*t", &ch).unwrap();
        assert!(pde_residual(&lin, &cubic, &ch, &consts(1.0), &small).unwrap().residual.unwrap().max < 1e-10);
        assert!(matches!(
            pde_residual(&kdv, &sol, &ch, &BTreeMap::new(), &grid),
            Err(NumError::MissingConstant(_))
        ));
    }

    #[test]
    fn levels() {
        let kdv = EvolutionPde::parse(3, "-u*u_x - u_xxx", &["c"]).unwrap();
        let tws = reduce(&kdv, "c").unwrap();
        let ch = sol_chart();
        let grid = GridSpec::default();
        let sol = parse(SOLITON, &ch).unwrap();
        let f1 = parse("u_xx + u*(1/2*u - c)", tws.chart()).unwrap();
        let r = level_check(&tws, &f1, tws.chart(), &sol, &ch, &consts(1.0), &grid).unwrap();
        let lv = &r.levels[0];
        assert!(lv.reference.abs() < 1e-8 && lv.deviation.max < 1e-8);
        let f2 = parse("u_x^2 + 1/3*u^3 - c*u^2 - 2*(u_xx + u*(1/2*u - c))*u", kdv.chart()).unwrap();
        let r = level_check(&tws, &f2, kdv.chart(), &sol, &ch, &consts(1.0), &grid).unwrap();
        assert!(r.levels[0].deviation.max < 1e-8);
        let zero = parse("0", &ch).unwrap();
        let r = level_check(&tws, &f1, tws.chart(), &zero, &ch, &consts(1.0), &grid).unwrap();
        assert_eq!(r.levels[0].deviation.max, 0.0);
    }
}
