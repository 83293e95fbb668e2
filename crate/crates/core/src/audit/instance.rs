//! A solved instance: `u` on the grid, `v` in closed form, and the
//! rearrangements both audits work from.

use std::sync::Arc;

use crate::elliptic::{radial_solution, solve_dirichlet, PoissonProblem, RadialSolution, SolverDiagnostics};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::geometry::GridDomain;
use crate::rearrangement::{decreasing_rearrangement, LpIntegrable, MonotoneProfile};

use super::constants::N;

#[derive(Clone, Debug)]
pub struct Instance {
    pub f: ScalarField,
    pub u: ScalarField,
    pub u_star: MonotoneProfile,
    pub f_star: MonotoneProfile,
    pub sol: RadialSolution,
    pub diagnostics: Option<SolverDiagnostics>,
    /// `∫|∇v|²` and `‖v‖₂²`, cached.
    pub v_energy: f64,
    pub v_l2_sq: f64,
}

impl Instance {
    /// Solves `−Δu = f` on the grid of `f` and the symmetrized problem.
    pub fn solve(f: ScalarField) -> Result<Self> {
        let out = solve_dirichlet(&PoissonProblem::new(f.clone()))?;
        let mut inst = Self::from_solution(f, out.u)?;
        inst.diagnostics = Some(out.diagnostics);
        Ok(inst)
    }

    /// Wraps an externally supplied `u` (for instance one read from a file).
    pub fn from_solution(f: ScalarField, u: ScalarField) -> Result<Self> {
        if !f.same_domain(&u) {
            return Err(Error::FrameMismatch);
        }
        if !f.is_nonnegative() {
            return Err(Error::InvalidArgument("the source must be nonnegative".into()));
        }
        let f_star = decreasing_rearrangement(&f);
        let sol = radial_solution(&f_star, f.domain().measure(), N)?;
        let (v_energy, v_l2_sq) = (sol.energy(), sol.l2_norm_sq());
        Ok(Instance { u_star: decreasing_rearrangement(&u), f_star, sol, f, u, diagnostics: None, v_energy, v_l2_sq })
    }

    pub fn domain(&self) -> &Arc<GridDomain> {
        self.u.domain()
    }

    pub fn h(&self) -> f64 {
        self.domain().h()
    }

    pub fn measure(&self) -> f64 {
        self.domain().measure()
    }

    pub fn f_l1(&self) -> f64 {
        self.f.p_norm(1.0)
    }

    /// `h / |Ω|^{1/n}`: the spacing in units of the domain size.
    pub fn relative_h(&self) -> f64 {
        self.h() / self.measure().sqrt()
    }

    /// Tolerance for pointwise comparisons of `u`-sized quantities.
    pub fn tol_u(&self) -> f64 {
        5.0 * self.relative_h() * self.sol.max_value()
    }

    /// Tolerance for Dirichlet energies.
    pub fn tol_energy(&self) -> f64 {
        self.relative_h() * self.v_energy
    }

    /// Tolerance for squared `L²` norms of `u`-sized quantities.
    pub fn tol_l2(&self) -> f64 {
        5.0 * self.relative_h() * self.v_l2_sq
    }

    /// Tolerance for asymmetries and other relative measures.
    pub fn tol_alpha(&self) -> f64 {
        8.0 * self.relative_h()
    }

    /// `u♯` as a piecewise-linear profile through `√N` bins of `u*`,
    /// vanishing at `|Ω|`. Gradients of the rearrangement are read off this
    /// profile; the raw step profile only has lattice noise for slopes.
    pub fn u_sharp_profile(&self) -> MonotoneProfile {
        let bins = (self.u.len() as f64).sqrt().ceil() as usize;
        self.u_star.binned_linear(bins, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainSpec;

    #[test]
    fn rejects_negative_source_and_mismatch() {
        let d = Arc::new(GridDomain::rasterize(&DomainSpec::disk([0.0, 0.0], 1.0), 0.25).unwrap());
        let f = ScalarField::constant(d.clone(), -1.0).unwrap();
        assert!(Instance::solve(f).is_err());
        let d2 = Arc::new(GridDomain::rasterize(&DomainSpec::disk([0.0, 0.0], 1.0), 0.2).unwrap());
        let f = ScalarField::constant(d, 1.0).unwrap();
        let u = ScalarField::zeros(d2);
        assert!(matches!(Instance::from_solution(f, u), Err(Error::FrameMismatch)));
    }
}
