//! The family `f_σ = 1 + σ⁻¹ χ_{B_σ(1/2, 0)}` on the unit disk: `f_σ − f♯_σ`
//! has constant `L²` norm while `v_σ − u_σ` vanishes as `σ → 0`.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use super::instance::Instance;
use super::talenti::talenti_gap;
use crate::elliptic::{solve_dirichlet, PoissonProblem};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::geometry::{DomainSpec, GridDomain};
use crate::numerics::{log_log_slope, stable_sum};

/// Off-centre position of the bump.
pub const BUMP_CENTER: [f64; 2] = [0.5, 0.0];

#[derive(Clone, Debug, Serialize)]
pub struct CounterexampleRecord {
    pub sigma: f64,
    pub h: f64,
    /// Cells of the off-centre and of the centred bump.
    pub bump_cells: usize,
    pub bump_cells_centered: usize,
    pub l1_diff: f64,
    pub l15_diff: f64,
    pub l2_diff: f64,
    /// `(2π)^{1/r} σ^{2/r−1}` for `r = 1, 3/2, 2`.
    pub l1_expected: f64,
    pub l15_expected: f64,
    pub l2_expected: f64,
    /// `sup |v_σ − u_σ|` with both solved on the grid.
    pub sup_grid: f64,
    /// `sup |v_σ − u_σ|` with `v_σ` in closed form.
    pub sup_radial: f64,
    /// `‖v − u♯‖∞`.
    pub eps_inf: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CounterexampleFit {
    pub l1_slope: Option<f64>,
    pub l15_slope: Option<f64>,
    /// Largest `|‖f_σ − f♯_σ‖₂ / √(2π) − 1|`.
    pub l2_max_rel_dev: f64,
    /// Whether `sup_grid` decreases along decreasing `σ`.
    pub sup_decreasing: bool,
}

fn expected(sigma: f64, r: f64) -> f64 {
    (2.0 * PI).powf(1.0 / r) * sigma.powf(2.0 / r - 1.0)
}

pub fn counterexample_case(sigma: f64, h: f64) -> Result<CounterexampleRecord> {
    if !(sigma > 0.0 && sigma <= 0.25) {
        return Err(Error::InvalidArgument(format!("sigma must lie in (0, 1/4], got {sigma}")));
    }
    if !(h > 0.0 && h <= sigma / 8.0) {
        return Err(Error::InvalidArgument(format!("h = {h} is too coarse for sigma = {sigma} (need h <= sigma/8)")));
    }
    let d = Arc::new(GridDomain::rasterize(&DomainSpec::disk([0.0, 0.0], 1.0), h)?);
    let bump = |c: [f64; 2]| move |x: [f64; 2]| ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)) < sigma * sigma;
    let in_off = bump(BUMP_CENTER);
    let in_cen = bump([0.0, 0.0]);
    let f = ScalarField::from_fn(d.clone(), |x| 1.0 + if in_off(x) { 1.0 / sigma } else { 0.0 })?;
    let fs = ScalarField::from_fn(d.clone(), |x| 1.0 + if in_cen(x) { 1.0 / sigma } else { 0.0 })?;
    let count = |g: &dyn Fn([f64; 2]) -> bool| (0..d.len()).filter(|&a| g(d.cell_center(a))).count();
    let w = d.cell_area();
    let diff: Vec<f64> = f.values().iter().zip(fs.values()).map(|(a, b)| (a - b).abs()).collect();
    let norm = |r: f64| (stable_sum(diff.iter().map(|x| x.powf(r))) * w).powf(1.0 / r);

    let (inst, v_grid) = rayon::join(|| Instance::solve(f.clone()), || solve_dirichlet(&PoissonProblem::new(fs.clone())));
    let (inst, v_grid) = (inst?, v_grid?.u);
    let u = inst.u.values();
    let sup_grid = u.iter().zip(v_grid.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let sup_radial = (0..d.len())
        .map(|a| {
            let x = d.cell_center(a);
            (inst.sol.v_at_radius(x[0].hypot(x[1])) - u[a]).abs()
        })
        .fold(0.0, f64::max);
    Ok(CounterexampleRecord {
        sigma,
        h,
        bump_cells: count(&in_off),
        bump_cells_centered: count(&in_cen),
        l1_diff: norm(1.0),
        l15_diff: norm(1.5),
        l2_diff: norm(2.0),
        l1_expected: expected(sigma, 1.0),
        l15_expected: expected(sigma, 1.5),
        l2_expected: expected(sigma, 2.0),
        sup_grid,
        sup_radial,
        eps_inf: talenti_gap(&inst.u_star, &inst.sol)?.eps_inf,
    })
}

/// One record per `σ`. With `h = None` each case uses `h = σ/8`.
pub fn counterexample_family(sigmas: &[f64], h: Option<f64>) -> Result<Vec<CounterexampleRecord>> {
    sigmas.iter().map(|&s| counterexample_case(s, h.unwrap_or(s / 8.0))).collect()
}

pub fn fit_family(recs: &[CounterexampleRecord]) -> CounterexampleFit {
    let s: Vec<f64> = recs.iter().map(|r| r.sigma).collect();
    let l1: Vec<f64> = recs.iter().map(|r| r.l1_diff).collect();
    let l15: Vec<f64> = recs.iter().map(|r| r.l15_diff).collect();
    let mut by_sigma: Vec<&CounterexampleRecord> = recs.iter().collect();
    by_sigma.sort_by(|a, b| b.sigma.total_cmp(&a.sigma));
    CounterexampleFit {
        l1_slope: log_log_slope(&s, &l1),
        l15_slope: log_log_slope(&s, &l15),
        l2_max_rel_dev: recs.iter().map(|r| (r.l2_diff / r.l2_expected - 1.0).abs()).fold(0.0, f64::max),
        sup_decreasing: by_sigma.windows(2).all(|w| w[1].sup_grid < w[0].sup_grid),
    }
}
