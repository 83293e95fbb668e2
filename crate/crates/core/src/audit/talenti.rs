//! `u♯ ≤ v`, compared on the one-dimensional profiles.

use serde::Serialize;

use crate::elliptic::RadialSolution;
use crate::error::{Error, Result};
use crate::rearrangement::{MonotoneProfile, Reading};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TalentiGap {
    /// `sup_s (v*(s) − u*(s)) = ‖v − u♯‖∞`.
    pub eps_inf: f64,
    /// `inf_s (v*(s) − u*(s))`.
    pub pointwise_min: f64,
}

/// On the piece `[s_k, s_{k+1})` where `u* = u_k`, `v* − u_k` runs from
/// `v*(s_k)` down to `v*(s_{k+1})`, so both extremes are attained at the
/// piece ends.
pub fn talenti_gap(u_star: &MonotoneProfile, sol: &RadialSolution) -> Result<TalentiGap> {
    if u_star.reading() != Reading::Step {
        return Err(Error::InvalidArgument("u* must be a step profile".into()));
    }
    let total = u_star.total();
    if (total - sol.total).abs() > 1e-12 * sol.total.max(total) {
        return Err(Error::InvalidArgument(format!(
            "u* lives on [0, {total}] but v* on [0, {}]",
            sol.total
        )));
    }
    let b = u_star.breaks();
    let mut eps = f64::NEG_INFINITY;
    let mut low = f64::INFINITY;
    let mut left = sol.v_star(b[0]);
    for (k, &uk) in u_star.values().iter().enumerate() {
        let right = sol.v_star(b[k + 1]);
        if b[k + 1] > b[k] {
            eps = eps.max(left - uk);
            low = low.min(right - uk);
        }
        left = right;
    }
    Ok(TalentiGap { eps_inf: eps.max(0.0), pointwise_min: low })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::radial_solution;

    #[test]
    fn identical_profiles_have_lattice_sized_gap() {
        let f = MonotoneProfile::step(vec![0.0, 1.0], vec![1.0]).unwrap();
        let sol = radial_solution(&f, 1.0, 2).unwrap();
        // u* = v* sampled at piece midpoints
        let n = 1000;
        let w = 1.0 / n as f64;
        let breaks: Vec<f64> = (0..=n).map(|k| k as f64 * w).collect();
        let values: Vec<f64> = (0..n).map(|k| sol.v_star((k as f64 + 0.5) * w)).collect();
        let us = MonotoneProfile::step(breaks, values).unwrap();
        let g = talenti_gap(&us, &sol).unwrap();
        // v*′ = −s/(4π s) for f ≡ 1, so a half piece moves v* by w/(8π); the
        // first piece carries the log singularity of v* at 0 only for n > 2
        assert!(g.eps_inf <= w / (8.0 * std::f64::consts::PI) * 1.0001, "{}", g.eps_inf);
        assert!(g.pointwise_min >= -w / (8.0 * std::f64::consts::PI) * 1.0001);
    }

    #[test]
    fn zero_everything() {
        let f = MonotoneProfile::step(vec![0.0, 2.0], vec![0.0]).unwrap();
        let sol = radial_solution(&f, 2.0, 2).unwrap();
        let us = MonotoneProfile::step(vec![0.0, 1.0, 2.0], vec![0.0, 0.0]).unwrap();
        let g = talenti_gap(&us, &sol).unwrap();
        assert_eq!(g.eps_inf, 0.0);
        assert_eq!(g.pointwise_min, 0.0);
    }

    #[test]
    fn measure_mismatch_is_rejected() {
        let f = MonotoneProfile::step(vec![0.0, 1.0], vec![1.0]).unwrap();
        let sol = radial_solution(&f, 1.0, 2).unwrap();
        let us = MonotoneProfile::step(vec![0.0, 2.0], vec![0.0]).unwrap();
        assert!(talenti_gap(&us, &sol).is_err());
    }
}
