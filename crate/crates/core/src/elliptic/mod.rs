//! Grid solver for `−Δu = f` with homogeneous Dirichlet data, the closed-form
//! radial solution of the symmetrized problem, and gradient/energy functionals.

mod gradient;
mod poisson;
mod radial;

pub use gradient::{dirichlet_energy, gradient_lq, gradient_magnitude};
pub use poisson::{
    conjugate_gradient, solve_dirichlet, DirichletLaplacian, PoissonProblem, Preconditioner, SolveOutcome,
    SolverDiagnostics, THETA_MIN,
};
pub use radial::{radial_solution, RadialSolution};

use serde::Serialize;

use crate::error::Result;
use crate::field::ScalarField;
use crate::numerics::stable_sum;
use crate::rearrangement::decreasing_rearrangement;

#[derive(Clone, Debug, Serialize)]
pub struct BlissCheck {
    pub q: f64,
    /// `∫_Ω |∇u|^q`.
    pub lhs: f64,
    /// `∫_{Ω♯} |∇v|^q`.
    pub rhs: f64,
    /// `(∫_0^{|Ω|} (f*)^{qn/(q+n)})^{(q+n)/n}`; the constant in front of it
    /// is not known numerically, so only the ratio is reported.
    pub source_functional: f64,
    pub ratio_to_functional: f64,
    pub tol: f64,
    pub pass: bool,
}

/// `∫|∇u|^q ≤ ∫|∇v|^q` for `q ∈ (0, 2]`, with a relative tolerance.
pub fn bliss_bound_check(u: &ScalarField, f: &ScalarField, sol: &RadialSolution, q: f64, rel_tol: f64) -> Result<BlissCheck> {
    if !(q > 0.0 && q <= 2.0) {
        return Err(crate::Error::InvalidArgument(format!("q must lie in (0, 2], got {q}")));
    }
    let lhs = gradient_lq(u, q)?;
    let rhs = sol.gradient_lq(q);
    let n = sol.n as f64;
    let fstar = decreasing_rearrangement(f);
    let expo = q * n / (q + n);
    let w = f.domain().cell_area();
    let inner = stable_sum(fstar.values().iter().map(|v| v.powf(expo))) * w;
    let functional = inner.powf((q + n) / n);
    let tol = rel_tol * rhs.abs();
    Ok(BlissCheck {
        q,
        lhs,
        rhs,
        source_functional: functional,
        ratio_to_functional: if functional > 0.0 { rhs / functional } else { 0.0 },
        tol,
        pass: lhs <= rhs + tol,
    })
}
