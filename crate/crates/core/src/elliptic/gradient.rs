use crate::error::Result;
use crate::field::ScalarField;
use crate::geometry::DIRS;

use super::poisson::DirichletLaplacian;

/// `|∇u|` at cell centres: central differences where both neighbours are
/// inside, one-sided towards the inside neighbour at the mask boundary, and
/// through the boundary zeros when both neighbours are outside.
pub fn gradient_magnitude(u: &ScalarField) -> Result<ScalarField> {
    let d = u.domain();
    let h = d.h();
    let vals = u.values();
    let mut out = Vec::with_capacity(u.len());
    for a in 0..u.len() {
        let (i, j) = d.cell_ij(a);
        let (i, j) = (i as i64, j as i64);
        let mut g2 = 0.0;
        for axis in 0..2 {
            let (fwd, bwd) = (2 * axis, 2 * axis + 1);
            let step = |dir: usize| d.active_index(i + DIRS[dir].0, j + DIRS[dir].1);
            let di = match (step(fwd), step(bwd)) {
                (Some(p), Some(m)) => (vals[p] - vals[m]) / (2.0 * h),
                (Some(p), None) => (vals[p] - vals[a]) / h,
                (None, Some(m)) => (vals[a] - vals[m]) / h,
                (None, None) => {
                    let tf = d.boundary_fraction(a, fwd);
                    let tb = d.boundary_fraction(a, bwd);
                    0.5 * (-vals[a] / (tf * h) + vals[a] / (tb * h))
                }
            };
            g2 += di * di;
        }
        out.push(g2.sqrt());
    }
    ScalarField::new(d.clone(), out)
}

/// `∫ |∇u|²` with the solver's stencil, so that `∫|∇u|² = ∫ f u` holds for
/// a converged solve up to the solver tolerance.
pub fn dirichlet_energy(u: &ScalarField) -> f64 {
    let op = DirichletLaplacian::assemble(u.domain());
    op.quadratic_form(u.values())
}

/// `∫ |∇u|^q` from [`gradient_magnitude`] (any `q > 0`).
pub fn gradient_lq(u: &ScalarField, q: f64) -> Result<f64> {
    if q == 2.0 {
        return Ok(dirichlet_energy(u));
    }
    let g = gradient_magnitude(u)?;
    Ok(crate::numerics::stable_sum(g.values().iter().map(|v| v.powf(q))) * u.domain().cell_area())
}
