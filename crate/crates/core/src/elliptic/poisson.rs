use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::geometry::{GridDomain, DIRS};

/// Boundary distances below this fraction of `h` are clamped, which bounds
/// the diagonal at `4 + 4/THETA_MIN`.
pub const THETA_MIN: f64 = 1e-3;

const PAR_MIN: usize = 4096;

fn parallel(n: usize) -> bool {
    n >= PAR_MIN && rayon::current_num_threads() > 1
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preconditioner {
    #[default]
    None,
    Jacobi,
    /// Modified incomplete Cholesky, zero fill-in, in row-major cell order.
    Mic,
}

/// `−Δu = f` in `Ω`, `u = 0` on `∂Ω`.
#[derive(Clone, Debug)]
pub struct PoissonProblem {
    pub domain: Arc<GridDomain>,
    pub source: ScalarField,
    /// Relative residual `‖b − Au‖ / ‖b‖` at which CG stops.
    pub tolerance: f64,
    /// Defaults to `20 √N ln(1/tol)`.
    pub max_iterations: Option<usize>,
    pub preconditioner: Preconditioner,
}

impl PoissonProblem {
    pub fn new(source: ScalarField) -> Self {
        PoissonProblem {
            domain: source.domain().clone(),
            source,
            tolerance: 1e-10,
            max_iterations: None,
            preconditioner: Preconditioner::Mic,
        }
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn iteration_cap(&self) -> usize {
        self.max_iterations.unwrap_or_else(|| {
            let n = self.domain.len() as f64;
            (20.0 * n.sqrt() * (1.0 / self.tolerance).ln()).ceil().max(100.0) as usize
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolverDiagnostics {
    pub unknowns: usize,
    pub iterations: usize,
    pub final_residual: f64,
    pub tolerance: f64,
    pub converged: bool,
    pub preconditioner: Preconditioner,
    /// `(iteration, relative residual)`, thinned to at most ~200 entries.
    pub residual_history: Vec<(usize, f64)>,
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub u: ScalarField,
    pub diagnostics: SolverDiagnostics,
}

/// The five-point Dirichlet Laplacian scaled by `h²`.
///
/// A neighbour outside the mask at boundary distance `θh` contributes
/// `1/θ` to the diagonal and nothing off it: the ghost value is the linear
/// extrapolation through the boundary zero. With `θ = 1` everywhere this is
/// the plain stencil with zero ghost values; either way the matrix stays
/// symmetric positive definite.
#[derive(Clone, Debug)]
pub struct DirichletLaplacian {
    nbr: Vec<[u32; 4]>,
    diag: Vec<f64>,
}

pub(crate) const NO_NBR: u32 = u32::MAX;

impl DirichletLaplacian {
    pub fn assemble(d: &GridDomain) -> Self {
        let n = d.len();
        let mut nbr = vec![[NO_NBR; 4]; n];
        let mut diag = vec![0.0; n];
        nbr.par_iter_mut().zip(diag.par_iter_mut()).enumerate().for_each(|(a, (nb, dg))| {
            let (i, j) = d.cell_ij(a);
            for (dir, (di, dj)) in DIRS.iter().enumerate() {
                match d.active_index(i as i64 + di, j as i64 + dj) {
                    Some(b) => {
                        nb[dir] = b as u32;
                        *dg += 1.0;
                    }
                    None => *dg += 1.0 / d.boundary_fraction(a, dir).max(THETA_MIN),
                }
            }
        });
        DirichletLaplacian { nbr, diag }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let row = |(a, ya): (usize, &mut f64)| {
            let mut s = self.diag[a] * x[a];
            for &b in &self.nbr[a] {
                if b != NO_NBR {
                    s -= x[b as usize];
                }
            }
            *ya = s;
        };
        if parallel(x.len()) {
            y.par_iter_mut().enumerate().for_each(row);
        } else {
            y.iter_mut().enumerate().for_each(row);
        }
    }

    /// `xᵀ A x`, link by link: `Σ (x_i − x_j)²` over interior links plus
    /// `Σ x_i²/θ` over boundary links.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let per_cell = |a: usize| {
            let mut s = 0.0;
            let mut interior = 0.0;
            for &b in &self.nbr[a] {
                if b != NO_NBR {
                    interior += 1.0;
                    // each interior link is visited from both ends
                    if (b as usize) > a {
                        s += (x[a] - x[b as usize]).powi(2);
                    }
                }
            }
            s + (self.diag[a] - interior) * x[a] * x[a]
        };
        let chunk = |c: usize| (c * PAR_MIN..((c + 1) * PAR_MIN).min(x.len())).map(per_cell).sum::<f64>();
        ordered_sum(x.len().div_ceil(PAR_MIN), parallel(x.len()), chunk)
    }
}

fn dot_serial(a: &[f64], b: &[f64]) -> f64 {
    // independent lanes let the loop vectorize
    let mut lanes = [0.0f64; 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            lanes[k] += x[k] * y[k];
        }
    }
    lanes.iter().sum::<f64>() + tail
}

/// `Σ_c chunk(c)` over fixed chunks, added in order: the result does not
/// depend on the number of threads.
fn ordered_sum<F: Fn(usize) -> f64 + Sync>(chunks: usize, par: bool, chunk: F) -> f64 {
    let parts: Vec<f64> = if par {
        (0..chunks).into_par_iter().map(&chunk).collect()
    } else {
        (0..chunks).map(&chunk).collect()
    };
    parts.iter().sum()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let chunk = |c: usize| {
        let r = c * PAR_MIN..((c + 1) * PAR_MIN).min(a.len());
        dot_serial(&a[r.clone()], &b[r])
    };
    ordered_sum(a.len().div_ceil(PAR_MIN), parallel(a.len()), chunk)
}

/// Conjugate gradients on the assembled operator; `b` is already scaled by `h²`.
pub fn conjugate_gradient(
    op: &DirichletLaplacian,
    b: &[f64],
    tol: f64,
    max_iter: usize,
    pc: Preconditioner,
) -> (Vec<f64>, SolverDiagnostics) {
    let n = b.len();
    let mut x = vec![0.0; n];
    let bnorm = dot(b, b).sqrt();
    let mut diag = SolverDiagnostics {
        unknowns: n,
        iterations: 0,
        final_residual: 0.0,
        tolerance: tol,
        converged: true,
        preconditioner: pc,
        residual_history: vec![(0, if bnorm > 0.0 { 1.0 } else { 0.0 })],
    };
    if bnorm == 0.0 {
        return (x, diag);
    }
    let inv_diag: Vec<f64> = op.diag().iter().map(|d| 1.0 / d).collect();
    let mic = (pc == Preconditioner::Mic).then(|| Mic::factor(op));
    let mut scratch = vec![0.0; if mic.is_some() { n } else { 0 }];
    let mut precondition = |r: &[f64], z: &mut [f64]| match pc {
        Preconditioner::None => z.copy_from_slice(r),
        Preconditioner::Jacobi => z.iter_mut().zip(r).zip(&inv_diag).for_each(|((z, r), d)| *z = r * d),
        Preconditioner::Mic => mic.as_ref().unwrap().apply(r, &mut scratch, z),
    };
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    precondition(&r, &mut z);
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut history = Vec::new();
    let mut rel = 1.0;
    let mut it = 0;
    while it < max_iter {
        op.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            break;
        }
        let alpha = rz / pap;
        let update = |(xi, (ri, (pi, api))): (&mut f64, (&mut f64, (&f64, &f64)))| {
            *xi += alpha * pi;
            *ri -= alpha * api;
        };
        if parallel(n) {
            x.par_iter_mut().zip(r.par_iter_mut().zip(p.par_iter().zip(ap.par_iter()))).for_each(update);
        } else {
            x.iter_mut().zip(r.iter_mut().zip(p.iter().zip(ap.iter()))).for_each(update);
        }
        it += 1;
        rel = dot(&r, &r).sqrt() / bnorm;
        history.push((it, rel));
        if rel <= tol {
            break;
        }
        precondition(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        if parallel(n) {
            p.par_iter_mut().zip(z.par_iter()).for_each(|(pi, zi)| *pi = zi + beta * *pi);
        } else {
            p.iter_mut().zip(z.iter()).for_each(|(pi, zi)| *pi = zi + beta * *pi);
        }
    }
    // the recursively updated residual drifts; report the true one
    op.apply(&x, &mut ap);
    let true_rel = ap.iter().zip(b).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt() / bnorm;
    diag.iterations = it;
    diag.final_residual = true_rel;
    diag.converged = rel <= tol && true_rel <= 10.0 * tol;
    let stride = history.len().div_ceil(200).max(1);
    diag.residual_history.extend(
        history
            .iter()
            .enumerate()
            .filter(|(k, _)| k % stride == stride - 1 || *k + 1 == history.len())
            .map(|(_, e)| *e),
    );
    (x, diag)
}

/// MIC(0) factor `(E + L) E⁻² (E + Lᵀ)` with `E = diag(1/precon)`, where `L`
/// couples each cell to its west and south neighbours.
struct Mic {
    precon: Vec<f64>,
    west: Vec<u32>,
    south: Vec<u32>,
    east: Vec<u32>,
    north: Vec<u32>,
}

impl Mic {
    const TAU: f64 = 0.97;
    const SAFETY: f64 = 0.25;

    fn factor(op: &DirichletLaplacian) -> Self {
        let n = op.len();
        let pick = |dir: usize| op.nbr.iter().map(|nb| nb[dir]).collect::<Vec<u32>>();
        let (east, west, north, south) = (pick(0), pick(1), pick(2), pick(3));
        let mut precon = vec![0.0; n];
        // off-diagonal couplings are −1 where a neighbour exists
        let has = |v: u32| if v != NO_NBR { 1.0 } else { 0.0 };
        for a in 0..n {
            let mut e = op.diag[a];
            let w = west[a];
            if w != NO_NBR {
                let pw = precon[w as usize];
                e -= pw * pw + Self::TAU * has(north[w as usize]) * pw * pw;
            }
            let s = south[a];
            if s != NO_NBR {
                let ps = precon[s as usize];
                e -= ps * ps + Self::TAU * has(east[s as usize]) * ps * ps;
            }
            if e < Self::SAFETY * op.diag[a] {
                e = op.diag[a];
            }
            precon[a] = 1.0 / e.sqrt();
        }
        Mic { precon, west, south, east, north }
    }

    fn apply(&self, r: &[f64], q: &mut [f64], z: &mut [f64]) {
        let n = r.len();
        for a in 0..n {
            let mut t = r[a];
            let w = self.west[a];
            if w != NO_NBR {
                t += self.precon[w as usize] * q[w as usize];
            }
            let s = self.south[a];
            if s != NO_NBR {
                t += self.precon[s as usize] * q[s as usize];
            }
            q[a] = t * self.precon[a];
        }
        for a in (0..n).rev() {
            let mut t = q[a];
            let e = self.east[a];
            if e != NO_NBR {
                t += self.precon[a] * z[e as usize];
            }
            let nn = self.north[a];
            if nn != NO_NBR {
                t += self.precon[a] * z[nn as usize];
            }
            z[a] = t * self.precon[a];
        }
    }
}

/// Solves the grid Poisson problem by CG.
pub fn solve_dirichlet(problem: &PoissonProblem) -> Result<SolveOutcome> {
    let d = &problem.domain;
    if !problem.source.domain().same_frame(d) || problem.source.len() != d.len() {
        return Err(Error::FrameMismatch);
    }
    if !(problem.tolerance > 0.0) {
        return Err(Error::InvalidArgument(format!("solver tolerance must be positive, got {}", problem.tolerance)));
    }
    if !problem.source.is_nonnegative() {
        return Err(Error::Field("source must be nonnegative".into()));
    }
    let op = DirichletLaplacian::assemble(d);
    let h2 = d.cell_area();
    let b: Vec<f64> = problem.source.values().iter().map(|f| f * h2).collect();
    let (x, diagnostics) =
        conjugate_gradient(&op, &b, problem.tolerance, problem.iteration_cap(), problem.preconditioner);
    if !diagnostics.converged {
        return Err(Error::NotConverged { iterations: diagnostics.iterations, residual: diagnostics.final_residual });
    }
    Ok(SolveOutcome { u: ScalarField::new(d.clone(), x)?, diagnostics })
}
