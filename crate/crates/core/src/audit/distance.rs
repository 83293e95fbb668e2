//! `inf_{x₀} ‖φ − φ♯(· + x₀)‖_p` on the grid.
//!
//! `φ♯` centred at `c` is evaluated at a cell centre a distance `d` (in cells)
//! away as the `⌊π d²⌋`-th largest cell value, i.e. the step profile `φ*`
//! read at `s = π d² h²`. Everything is done in grid units, so the search
//! visits the same centres and the same ranks on a rescaled copy of the
//! grid. The part of the ball that falls outside the domain contributes
//! `∫(φ♯)^p − Σ_cells φ♯(x)^p h²`, clamped at zero.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::rearrangement::decreasing_rearrangement;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Distance {
    pub p: f64,
    pub distance: f64,
    /// Centre of `φ♯` in physical coordinates.
    pub center: [f64; 2],
    /// The same centre in grid units (cell `(i, j)` spans `[i, i+1] × [j, j+1]`).
    #[serde(skip)]
    pub center_units: [f64; 2],
}

struct Prepared<'a> {
    u: &'a ScalarField,
    pos: Vec<[f64; 2]>,
    star: Vec<f64>,
    star_p: Vec<f64>,
    star_p_sum: f64,
    p: f64,
}

impl<'a> Prepared<'a> {
    fn new(u: &'a ScalarField, p: f64) -> Self {
        let d = u.domain();
        let pos = (0..d.len())
            .map(|a| {
                let (i, j) = d.cell_ij(a);
                [i as f64 + 0.5, j as f64 + 0.5]
            })
            .collect();
        let star = decreasing_rearrangement(u).values().to_vec();
        let star_p: Vec<f64> = star.iter().map(|v| v.abs().powf(p)).collect();
        let star_p_sum = star_p.iter().sum();
        Prepared { u, pos, star, star_p, star_p_sum, p }
    }

    /// Rank of the `φ*` value read at a cell centre, or `None` past the support.
    #[inline]
    fn rank(&self, pos: [f64; 2], c: [f64; 2]) -> Option<usize> {
        let d2 = (pos[0] - c[0]).powi(2) + (pos[1] - c[1]).powi(2);
        let k = (std::f64::consts::PI * d2).floor();
        (k < self.star.len() as f64).then_some(k as usize)
    }

    /// `Σ|φ − φ♯_c|^p` in cell-area units.
    fn eval(&self, c: [f64; 2]) -> f64 {
        let vals = self.u.values();
        let (mut inside, mut sharp_in) = (0.0, 0.0);
        let mut acc = |pow: &dyn Fn(f64) -> f64| {
            for (a, &x) in self.pos.iter().enumerate() {
                match self.rank(x, c) {
                    Some(k) => {
                        inside += pow((vals[a].abs() - self.star[k]).abs());
                        sharp_in += self.star_p[k];
                    }
                    None => inside += pow(vals[a].abs()),
                }
            }
        };
        if self.p == 1.0 {
            acc(&|x| x);
        } else if self.p == 2.0 {
            acc(&|x| x * x);
        } else {
            let p = self.p;
            acc(&|x| x.powf(p));
        }
        inside + (self.star_p_sum - sharp_in).max(0.0)
    }

    fn finish(&self, sum: f64, c: [f64; 2]) -> Distance {
        let d = self.u.domain();
        let w = d.cell_area();
        let o = d.origin();
        Distance {
            p: self.p,
            distance: (sum * w).powf(1.0 / self.p),
            center: [o[0] + c[0] * d.h(), o[1] + c[1] * d.h()],
            center_units: c,
        }
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidArgument(format!("distance needs a finite p >= 1, got {p}")));
    }
    Ok(())
}

// deterministic minimum: value, then x, then y
fn better(a: (f64, [f64; 2]), b: (f64, [f64; 2])) -> (f64, [f64; 2]) {
    let ka = (a.0, a.1[0], a.1[1]);
    let kb = (b.0, b.1[0], b.1[1]);
    if ka.partial_cmp(&kb) != Some(std::cmp::Ordering::Greater) {
        a
    } else {
        b
    }
}

fn best_of(prep: &Prepared, centers: Vec<[f64; 2]>) -> (f64, [f64; 2]) {
    centers
        .into_par_iter()
        .map(|c| (prep.eval(c), c))
        .reduce(|| (f64::INFINITY, [f64::INFINITY, f64::INFINITY]), better)
}

/// `‖φ − φ♯(· − c)‖_p` for a centre given in grid units.
pub fn distance_at_units(u: &ScalarField, p: f64, center_units: [f64; 2]) -> Result<Distance> {
    check_p(p)?;
    let prep = Prepared::new(u, p);
    let sum = prep.eval(center_units);
    Ok(prep.finish(sum, center_units))
}

/// Same with a physical centre.
pub fn distance_at(u: &ScalarField, p: f64, center: [f64; 2]) -> Result<Distance> {
    let d = u.domain();
    let o = d.origin();
    distance_at_units(u, p, [(center[0] - o[0]) / d.h(), (center[1] - o[1]) / d.h()])
}

/// Coarse-to-fine search for the best centre: a lattice of at most about
/// 256 centres over the active bounding box, then 5×5 windows around
/// the incumbent with the step halved down to half a cell.
pub fn rearrangement_distance(u: &ScalarField, p: f64) -> Result<Distance> {
    check_p(p)?;
    let prep = Prepared::new(u, p);
    let d = u.domain();
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for x in &prep.pos {
        for k in 0..2 {
            lo[k] = lo[k].min(x[k]);
            hi[k] = hi[k].max(x[k]);
        }
    }
    let area = ((hi[0] - lo[0]) * (hi[1] - lo[1])).max(1.0);
    let mut step = 4.0f64.max((area / 256.0).sqrt()).exp2_floor();
    let mut coarse = Vec::new();
    let kx = ((hi[0] - lo[0]) / step).ceil() as i64;
    let ky = ((hi[1] - lo[1]) / step).ceil() as i64;
    for a in 0..=kx {
        for b in 0..=ky {
            coarse.push([lo[0] + a as f64 * step, lo[1] + b as f64 * step]);
        }
    }
    // the centroid is a natural candidate and makes symmetric cases exact
    let c = d.centroid();
    let o = d.origin();
    coarse.push([(c[0] - o[0]) / d.h(), (c[1] - o[1]) / d.h()]);
    let mut best = best_of(&prep, coarse);
    while step > 0.5 {
        step *= 0.5;
        let mut guard = 0;
        loop {
            let c0 = best.1;
            let mut window = Vec::with_capacity(25);
            for a in -2i32..=2 {
                for b in -2i32..=2 {
                    window.push([c0[0] + a as f64 * step, c0[1] + b as f64 * step]);
                }
            }
            best = better(best, best_of(&prep, window));
            let moved = best.1 != c0;
            let on_edge = ((best.1[0] - c0[0]).abs() - 2.0 * step).abs() < 1e-9
                || ((best.1[1] - c0[1]).abs() - 2.0 * step).abs() < 1e-9;
            guard += 1;
            if !(moved && on_edge) || guard > 32 {
                break;
            }
        }
    }
    Ok(prep.finish(best.0, best.1))
}

/// Exhaustive scan over all centres of a lattice with the given step (in
/// cells) covering the active bounding box. For verification.
pub fn rearrangement_distance_exhaustive(u: &ScalarField, p: f64, step: f64) -> Result<Distance> {
    check_p(p)?;
    let prep = Prepared::new(u, p);
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for x in &prep.pos {
        for k in 0..2 {
            lo[k] = lo[k].min(x[k]);
            hi[k] = hi[k].max(x[k]);
        }
    }
    let kx = ((hi[0] - lo[0]) / step).ceil() as i64;
    let ky = ((hi[1] - lo[1]) / step).ceil() as i64;
    let mut centers = Vec::new();
    for a in 0..=kx {
        for b in 0..=ky {
            centers.push([lo[0] + a as f64 * step, lo[1] + b as f64 * step]);
        }
    }
    let best = best_of(&prep, centers);
    Ok(prep.finish(best.0, best.1))
}

trait Exp2Floor {
    fn exp2_floor(self) -> f64;
}

impl Exp2Floor for f64 {
    /// Largest power of two not above `self`.
    fn exp2_floor(self) -> f64 {
        self.log2().floor().exp2()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{DomainSpec, GridDomain};
    use std::sync::Arc;

    fn disk_field(c: [f64; 2], h: f64) -> ScalarField {
        let d = Arc::new(GridDomain::rasterize(&DomainSpec::disk(c, 1.0), h).unwrap());
        ScalarField::from_fn(d, |x| 1.0 - ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2))).unwrap()
    }

    #[test]
    fn radial_field_is_recovered() {
        let c = [0.3, -0.2];
        let h = 1.0 / 64.0;
        let u = disk_field(c, h);
        let d = rearrangement_distance(&u, 1.0).unwrap();
        assert!((d.center[0] - c[0]).abs() <= 2.0 * h && (d.center[1] - c[1]).abs() <= 2.0 * h, "{:?}", d.center);
        // O(h)·|Ω| with |u| ≤ 1
        assert!(d.distance <= h * std::f64::consts::PI, "{}", d.distance);
    }

    #[test]
    fn shifted_evaluation_grows() {
        let h = 1.0 / 32.0;
        let u = disk_field([0.0, 0.0], h);
        let at0 = distance_at(&u, 1.0, [0.0, 0.0]).unwrap().distance;
        let at1 = distance_at(&u, 1.0, [0.25, 0.0]).unwrap().distance;
        assert!(at1 > at0 + 0.1, "{at0} {at1}");
    }

    #[test]
    fn search_matches_exhaustive_scan() {
        let h = 1.0 / 32.0;
        let d = Arc::new(GridDomain::rasterize(&DomainSpec::rectangle(0.0, 0.0, 2.0, 0.5), h).unwrap());
        let u = ScalarField::from_fn(d, |x| (x[0] * (2.0 - x[0]) * x[1] * (0.5 - x[1])).max(0.0)).unwrap();
        for p in [1.0, 2.0] {
            let s = rearrangement_distance(&u, p).unwrap();
            let e = rearrangement_distance_exhaustive(&u, p, 0.5).unwrap();
            assert!(s.distance <= e.distance * (1.0 + 1e-3), "p = {p}: {} vs {}", s.distance, e.distance);
        }
    }

    #[test]
    fn rejects_small_p() {
        let u = disk_field([0.0, 0.0], 0.25);
        assert!(rearrangement_distance(&u, 0.5).is_err());
    }
}
