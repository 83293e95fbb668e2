//! Rescaling to `|Ω| = 1`, `‖f‖₁ = 1`.
//!
//! With `a = |Ω|^{1−2/n}/‖f‖₁` and `b = |Ω|^{−1/n}`, `w(x) = a u(x/b)`
//! solves `−Δw = g` in `bΩ` with `g(x) = (a/b²) f(x/b)`. On the grid this is
//! exact: the mask is kept, the spacing becomes `bh` and the values are
//! multiplied by `a` resp. `a/b²`.

use std::sync::Arc;

use serde::Serialize;

use super::constants::N;
use super::distance::{distance_at_units, rearrangement_distance};
use super::instance::Instance;
use super::talenti::talenti_gap;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::geometry::fraenkel_asymmetry;
use crate::rearrangement::{distribution_function, LpIntegrable};

#[derive(Clone, Debug, Serialize)]
pub struct Relation {
    pub before: f64,
    pub after: f64,
    /// `after` as predicted from `before` by the scaling law.
    pub predicted: f64,
    pub rel_err: f64,
}

impl Relation {
    fn new(before: f64, after: f64, factor: f64) -> Self {
        let predicted = before * factor;
        let scale = predicted.abs().max(after.abs());
        let rel_err = if scale > 0.0 { (after - predicted).abs() / scale } else { 0.0 };
        Relation { before, after, predicted, rel_err }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NormalizationRecord {
    pub a: f64,
    pub b: f64,
    pub measure_after: f64,
    pub f_l1_after: f64,
    /// `α(Ω̃) = α(Ω)`; agreement only up to the lattice.
    pub alpha: Relation,
    /// `‖z − w♯‖∞ = a ‖v − u♯‖∞`.
    pub eps_inf: Relation,
    /// `‖w − w♯‖₁ = |Ω|^{−2/n}/‖f‖₁ · ‖u − u♯‖₁`, both at the optimal centre
    /// of the original instance.
    pub l1: Relation,
    /// `‖g‖_p = |Ω|^{1−1/p} ‖f‖_p/‖f‖₁` for `p = 1, 3/2, 2`.
    pub g_norms: Vec<(f64, Relation)>,
    /// `σ(t) = μ(t/a)/|Ω|`: largest relative error over sampled levels.
    pub sigma_max_rel_err: f64,
    /// Largest `rel_err` among the exact relations (all but `alpha`).
    pub max_rel_err: f64,
}

#[derive(Clone, Debug)]
pub struct Normalized {
    pub instance: Instance,
    pub record: NormalizationRecord,
    /// `α(Ω)` with its optimal centre.
    pub alpha_before: crate::geometry::Asymmetry,
    pub alpha_after: crate::geometry::Asymmetry,
    /// `inf ‖u − u♯(·+x₀)‖₁` on the original instance.
    pub l1_before: super::distance::Distance,
}

pub fn normalize(inst: &Instance) -> Result<Normalized> {
    let n = N as f64;
    let f_l1 = inst.f_l1();
    if !(f_l1 > 0.0) {
        return Err(Error::InvalidArgument("normalization needs a nonzero source".into()));
    }
    let measure = inst.measure();
    let a = measure.powf(1.0 - 2.0 / n) / f_l1;
    let b = measure.powf(-1.0 / n);
    let dom = Arc::new(inst.domain().scaled(b)?);
    let w = ScalarField::new(dom.clone(), inst.u.values().iter().map(|x| a * x).collect())?;
    let gfac = a / (b * b);
    let g = ScalarField::new(dom, inst.f.values().iter().map(|x| gfac * x).collect())?;
    let mut out = Instance::from_solution(g.clone(), w.clone())?;
    out.diagnostics = inst.diagnostics.clone();

    let (alpha_before, alpha_after) = rayon::join(|| fraenkel_asymmetry(inst.domain()), || fraenkel_asymmetry(out.domain()));
    let alpha = Relation::new(alpha_before.alpha, alpha_after.alpha, 1.0);

    let eps_before = talenti_gap(&inst.u_star, &inst.sol)?.eps_inf;
    let eps_after = talenti_gap(&out.u_star, &out.sol)?.eps_inf;
    let eps_inf = Relation::new(eps_before, eps_after, a);

    let l1_before = rearrangement_distance(&inst.u, 1.0)?;
    let l1_after = distance_at_units(&w, 1.0, l1_before.center_units)?;
    let l1 = Relation::new(l1_before.distance, l1_after.distance, measure.powf(-2.0 / n) / f_l1);

    let g_norms: Vec<(f64, Relation)> = [1.0, 1.5, 2.0]
        .iter()
        .map(|&p| (p, Relation::new(inst.f.p_norm(p), g.p_norm(p), measure.powf(1.0 - 1.0 / p) / f_l1)))
        .collect();

    // levels strictly between consecutive values of u, scaled to w
    let mu = distribution_function(&inst.u);
    let sigma = distribution_function(&w);
    let br = mu.breaks();
    let mut sigma_max_rel_err = 0.0f64;
    let stride = (br.len() / 64).max(1);
    for k in (0..br.len().saturating_sub(1)).step_by(stride) {
        // near-ties could swap sides under the rescaling
        if br[k + 1] - br[k] <= 1e-9 * br[k + 1].abs() {
            continue;
        }
        let t = a * 0.5 * (br[k] + br[k + 1]);
        let lhs = sigma.eval(t);
        let rhs = mu.eval(t / a) / measure;
        let scale = lhs.abs().max(rhs.abs());
        if scale > 0.0 {
            sigma_max_rel_err = sigma_max_rel_err.max((lhs - rhs).abs() / scale);
        }
    }

    let max_rel_err = g_norms
        .iter()
        .map(|(_, r)| r.rel_err)
        .fold(eps_inf.rel_err.max(l1.rel_err).max(sigma_max_rel_err), f64::max);
    let record = NormalizationRecord {
        a,
        b,
        measure_after: out.measure(),
        f_l1_after: out.f_l1(),
        alpha,
        eps_inf,
        l1,
        g_norms,
        sigma_max_rel_err,
        max_rel_err,
    };
    Ok(Normalized { instance: out, record, alpha_before, alpha_after, l1_before })
}
