//! Asymmetry of `Ω` and of the superlevel sets of `u` against `‖v − u♯‖∞`.

use serde::Serialize;

use super::constants::{StabilityConstants, N};
use super::instance::Instance;
use super::Verdict;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::geometry::fraenkel_asymmetry;
use crate::rearrangement::{decreasing_rearrangement, LpIntegrable, MonotoneProfile};

/// Superlevel sets with fewer cells than this are not audited.
pub const MIN_SUPERLEVEL_CELLS: usize = 10;

/// `α³ ≤ C̃₁ ε / (|Ω|^{(2−n)/n} ‖f‖₁)`.
pub fn theorem_asymmetry_bound(
    alpha: f64,
    eps_inf: f64,
    measure: f64,
    f_l1: f64,
    constants: &StabilityConstants,
    tol: f64,
) -> Verdict {
    let n = N as f64;
    let c1 = constants.derived().c_tilde1;
    let rhs = c1 * eps_inf / (measure.powf((2.0 - n) / n) * f_l1);
    Verdict::le("asymmetry_cubed", alpha.powi(3), rhs, tol)
}

/// `s_Ω = u*(|Ω|(1 − α/4))` from the step profile.
pub fn s_omega_profile(u_star: &MonotoneProfile, alpha: f64) -> Result<f64> {
    if !(0.0..2.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!("asymmetry must lie in [0, 2), got {alpha}")));
    }
    Ok(u_star.eval(u_star.total() * (1.0 - alpha / 4.0)))
}

pub fn s_omega(u: &ScalarField, alpha: f64) -> Result<f64> {
    s_omega_profile(&decreasing_rearrangement(u), alpha)
}

/// `s_Ω α²/(2γ_n) ≤ ‖v − u♯‖∞`.
pub fn boosted_bound(s_omega: f64, alpha: f64, eps_inf: f64, gamma_n: f64, tol: f64) -> Verdict {
    Verdict::le("boosted_s_omega", s_omega * alpha * alpha / (2.0 * gamma_n), eps_inf, tol)
}

#[derive(Clone, Debug, Serialize)]
pub struct SuperlevelRecord {
    pub t: f64,
    pub cells: usize,
    /// `μ(t) = |U_t|`.
    pub mu: f64,
    /// Reason for skipping, if skipped.
    pub skipped: Option<String>,
    pub alpha_t: Option<f64>,
    /// `α³(U_t) ≤ C̃₁ |Ω|³/μ³ · |Ω|^{1−2/n}/‖f‖₁ · ε`.
    pub bound: Option<Verdict>,
    /// Whether `|Ω \ U_t|/|Ω| ≤ α(Ω)/4`.
    pub half_hypothesis: bool,
    /// `α(U_t) ≥ α(Ω)/2`, checked when the hypothesis holds.
    pub half_bound: Option<Verdict>,
}

/// Audits `U_t = {u > t}` for each `t`. The superlevel masks inherit
/// boundary crossings from linear interpolation of `u` (towards `0` at the
/// boundary of `Ω`).
pub fn superlevel_audit(
    inst: &Instance,
    t_list: &[f64],
    alpha_omega: f64,
    eps_inf: f64,
    constants: &StabilityConstants,
) -> Result<Vec<SuperlevelRecord>> {
    let n = N as f64;
    let d = inst.domain();
    let u = inst.u.values();
    let umax = inst.u.max();
    let measure = inst.measure();
    let c1 = constants.derived().c_tilde1;
    let nx = d.nx();
    let mut out = Vec::with_capacity(t_list.len());
    for &t in t_list {
        let keep: Vec<bool> = u.iter().map(|&x| x > t).collect();
        let cells = keep.iter().filter(|&&k| k).count();
        let mu = cells as f64 * d.cell_area();
        let mut rec = SuperlevelRecord {
            t,
            cells,
            mu,
            skipped: None,
            alpha_t: None,
            bound: None,
            half_hypothesis: 1.0 - mu / measure <= alpha_omega / 4.0,
            half_bound: None,
        };
        if !(t > 0.0 && t < umax) {
            rec.skipped = Some(format!("t outside (0, max u) = (0, {umax:.6e})"));
            out.push(rec);
            continue;
        }
        if cells < MIN_SUPERLEVEL_CELLS {
            rec.skipped = Some(format!("{cells} cells, below the resolution floor of {MIN_SUPERLEVEL_CELLS}"));
            out.push(rec);
            continue;
        }
        let sub = d.restrict(&keep, |from, to| {
            let a = d.active_of_frame(from).expect("kept cells are active");
            let uf = u[a];
            match d.active_of_frame(to) {
                Some(b) => ((uf - t) / (uf - u[b])).clamp(0.0, 1.0),
                None => {
                    let dir = if to == from + 1 {
                        0
                    } else if to + 1 == from {
                        1
                    } else if to == from + nx {
                        2
                    } else {
                        3
                    };
                    (d.boundary_fraction(a, dir) * (uf - t) / uf).clamp(0.0, 1.0)
                }
            }
        })?;
        let alpha_t = fraenkel_asymmetry(&sub).alpha;
        rec.alpha_t = Some(alpha_t);
        let tol_t = 8.0 * d.h() / mu.sqrt();
        let rhs = c1 * (measure / mu).powi(3) * measure.powf(1.0 - 2.0 / n) / inst.f_l1() * eps_inf;
        rec.bound = Some(Verdict::le("superlevel_asymmetry_cubed", alpha_t.powi(3), rhs, tol_t.powi(3)));
        if rec.half_hypothesis {
            rec.half_bound = Some(Verdict::le("superlevel_asymmetry_half", alpha_omega / 2.0, alpha_t, inst.tol_alpha() + tol_t));
        }
        out.push(rec);
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct L2AsymmetryRecord {
    pub v_l2_sq: f64,
    pub u_l2_sq: f64,
    /// `‖v‖₂² − ‖u‖₂²`.
    pub gap: f64,
    /// `|Ω| s_Ω² α² / 16`.
    pub rhs: f64,
    pub comparison: Verdict,
    pub bound: Verdict,
    /// `α⁴ / (‖v‖₂² − ‖u‖₂²)`: the constant the estimate would need here.
    pub empirical_constant: f64,
    /// `|‖u‖₂ − ‖u*‖₂|`, zero by equimeasurability.
    pub equimeasurability_err: f64,
}

pub fn l2_asymmetry_bound(inst: &Instance, s_omega: f64, alpha: f64) -> L2AsymmetryRecord {
    let u_l2 = inst.u.p_norm(2.0);
    let u_l2_sq = u_l2 * u_l2;
    let gap = inst.v_l2_sq - u_l2_sq;
    let rhs = inst.measure() * s_omega * s_omega * alpha * alpha / 16.0;
    let tol = inst.tol_l2();
    L2AsymmetryRecord {
        v_l2_sq: inst.v_l2_sq,
        u_l2_sq,
        gap,
        rhs,
        comparison: Verdict::le("l2_comparison", u_l2_sq, inst.v_l2_sq, tol),
        bound: Verdict::le("l2_asymmetry", rhs, gap, tol),
        empirical_constant: if gap > 0.0 { alpha.powi(4) / gap } else { f64::INFINITY },
        equimeasurability_err: (u_l2 - inst.u_star.p_norm(2.0)).abs(),
    }
}
