//! Distribution functions, rearrangements and the norms built on them.
//!
//! All profiles come from sorting cell values (descending `|u|`, ties by
//! row-major cell index), so equidistribution holds exactly on the grid.

mod lorentz;
mod profile;

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

pub use lorentz::{
    check_window, lorentz_lambda_norm, lorentz_lambda_norm_with, quantitative_hl_deficit, theta_p, theta_p_analytic, HlDeficit, ThetaP,
};
pub use profile::{MonotoneProfile, Reading};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::geometry::GridDomain;
use crate::numerics::{omega, stable_sum};

/// Cell indices sorted by descending `|value|`, ties by index.
pub fn rank_order(values: &[f64]) -> Vec<u32> {
    let mut idx: Vec<u32> = (0..values.len() as u32).collect();
    // stable sort keeps index order among equal keys
    idx.par_sort_by(|&a, &b| values[b as usize].abs().total_cmp(&values[a as usize].abs()));
    idx
}

/// `μ(t) = h² · #{|u| > t}` as an exact step function of `t` on `[0, max|u|]`.
pub fn distribution_function(u: &ScalarField) -> MonotoneProfile {
    let w = u.domain().cell_area();
    let mut a: Vec<f64> = u.values().iter().map(|v| v.abs()).collect();
    a.par_sort_by(|x, y| x.total_cmp(y));
    let n = a.len();
    let mut breaks = vec![0.0];
    let mut values = Vec::new();
    let mut k = 0;
    // on [previous level, a[k]) exactly n − k cells exceed t
    while k < n {
        let level = a[k];
        if level > *breaks.last().unwrap() {
            values.push((n - k) as f64 * w);
            breaks.push(level);
        }
        while k < n && a[k] == level {
            k += 1;
        }
    }
    if values.is_empty() {
        // u ≡ 0: μ vanishes everywhere; represent on a degenerate interval
        return MonotoneProfile::step(vec![0.0, 0.0], vec![0.0]).unwrap();
    }
    // zero-width closing piece: μ(max|u|) = 0
    breaks.push(*breaks.last().unwrap());
    values.push(0.0);
    MonotoneProfile::step(breaks, values).unwrap()
}

/// `u*`: the k-th largest `|u|` on `[(k−1)h², kh²)`.
pub fn decreasing_rearrangement(u: &ScalarField) -> MonotoneProfile {
    let mut a: Vec<f64> = u.values().iter().map(|v| v.abs()).collect();
    a.par_sort_by(|x, y| y.total_cmp(x));
    MonotoneProfile::uniform_steps(a, u.domain().cell_area())
}

/// A radial function `x ↦ profile(ω_n |x − center|^n)`.
#[derive(Clone, Debug, Serialize)]
pub struct RadialField {
    pub profile: MonotoneProfile,
    pub n: u32,
    pub center: [f64; 2],
}

impl RadialField {
    pub fn new(profile: MonotoneProfile, center: [f64; 2]) -> Self {
        RadialField { profile, n: 2, center }
    }

    /// Radius of the supporting ball.
    pub fn radius(&self) -> f64 {
        (self.profile.total() / omega(self.n)).powf(1.0 / self.n as f64)
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        let r = (x[0] - self.center[0]).hypot(x[1] - self.center[1]);
        self.profile.eval(omega(self.n) * r.powi(self.n as i32))
    }

    /// Same function re-centred.
    pub fn centered_at(&self, center: [f64; 2]) -> Self {
        RadialField { center, ..self.clone() }
    }

    /// Places the profile on the cells of `domain`: the k-th nearest cell to
    /// the centre (ties by index) receives the k-th step value. When the
    /// profile has exactly one step per cell this is equimeasurable with the
    /// field it came from; otherwise the profile is sampled at the mass
    /// midpoint of each rank.
    pub fn on_lattice(&self, domain: Arc<GridDomain>) -> Result<ScalarField> {
        let order = nearest_order(&domain, self.center);
        let n = domain.len();
        let w = domain.cell_area();
        let mut values = vec![0.0; n];
        let exact = self.profile.reading() == Reading::Step && self.profile.values().len() == n;
        for (rank, &a) in order.iter().enumerate() {
            values[a as usize] =
                if exact { self.profile.values()[rank] } else { self.profile.eval((rank as f64 + 0.5) * w) };
        }
        ScalarField::new(domain, values)
    }
}

/// Active cells sorted by distance to `center`, ties by index.
pub fn nearest_order(domain: &GridDomain, center: [f64; 2]) -> Vec<u32> {
    let d2: Vec<f64> = (0..domain.len())
        .map(|a| {
            let c = domain.cell_center(a);
            (c[0] - center[0]).powi(2) + (c[1] - center[1]).powi(2)
        })
        .collect();
    let mut idx: Vec<u32> = (0..domain.len() as u32).collect();
    idx.par_sort_by(|&a, &b| d2[a as usize].total_cmp(&d2[b as usize]));
    idx
}

/// `u♯`: the Schwarz rearrangement, centred at the origin.
pub fn schwarz_rearrangement(u: &ScalarField) -> RadialField {
    RadialField::new(decreasing_rearrangement(u), [0.0, 0.0])
}

/// Things with an `L^p` norm.
pub trait LpIntegrable {
    /// `(∫ |φ|^p)^{1/p}` for `p > 0` (a quasi-norm below 1).
    fn p_norm(&self, p: f64) -> f64;
}

impl LpIntegrable for ScalarField {
    fn p_norm(&self, p: f64) -> f64 {
        let w = self.domain().cell_area();
        if p == 1.0 {
            return stable_sum(self.values().iter().map(|v| v.abs())) * w;
        }
        (stable_sum(self.values().iter().map(|v| v.abs().powf(p))) * w).powf(1.0 / p)
    }
}

impl LpIntegrable for MonotoneProfile {
    fn p_norm(&self, p: f64) -> f64 {
        self.norm(p)
    }
}

impl LpIntegrable for RadialField {
    fn p_norm(&self, p: f64) -> f64 {
        self.profile.norm(p)
    }
}

/// `‖u‖_p` for `p ≥ 1`.
pub fn lp_norm<T: LpIntegrable + ?Sized>(p: f64, u: &T) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("L^p norm needs p >= 1, got {p}")));
    }
    Ok(u.p_norm(p))
}

/// `∫₀^{|Ω|} h* g* − ∫ |hg|`, computed as a sum of nonnegative terms.
///
/// With `a_k` the sorted values of `|h|`, `b_k` those of `|g|` and `c_k` the
/// value of `|g|` on the cell carrying `a_k`, Abel summation gives
/// `Σ (a_k − a_{k+1}) (B_k − C_k)` where `B_k ≥ C_k` are partial sums; each
/// factor is clamped at zero so rounding cannot make the result negative.
pub fn hardy_littlewood_gap(h: &ScalarField, g: &ScalarField) -> Result<f64> {
    if !h.same_domain(g) {
        return Err(Error::FrameMismatch);
    }
    let order = rank_order(h.values());
    let mut b: Vec<f64> = g.values().iter().map(|v| v.abs()).collect();
    b.par_sort_by(|x, y| y.total_cmp(x));
    let n = order.len();
    let (mut bsum, mut csum) = (0.0f64, 0.0f64);
    let (mut bc, mut cc) = (0.0f64, 0.0f64);
    let mut terms = Vec::with_capacity(n);
    for k in 0..n {
        let ak = h.values()[order[k] as usize].abs();
        let ak1 = if k + 1 < n { h.values()[order[k + 1] as usize].abs() } else { 0.0 };
        // compensated running sums
        let add = |s: &mut f64, c: &mut f64, x: f64| {
            let y = x - *c;
            let t = *s + y;
            *c = (t - *s) - y;
            *s = t;
        };
        add(&mut bsum, &mut bc, b[k]);
        add(&mut csum, &mut cc, g.values()[order[k] as usize].abs());
        terms.push((ak - ak1) * (bsum - csum).max(0.0));
    }
    Ok(stable_sum(terms) * h.domain().cell_area())
}

/// `g_h(x) = g*(μ_h(h(x)))` with ranks standing in for `μ_h`: the cell of
/// rank k in the order of `h` receives the k-th largest `|g|`. Plateaus of
/// `h` are resolved by cell index, so `g_h` is equimeasurable with `g`.
pub fn g_sub_h(g: &ScalarField, h: &ScalarField) -> Result<ScalarField> {
    if !h.same_domain(g) {
        return Err(Error::FrameMismatch);
    }
    let order = rank_order(h.values());
    let gstar = decreasing_rearrangement(g);
    let mut values = vec![0.0; g.len()];
    for (rank, &a) in order.iter().enumerate() {
        values[a as usize] = gstar.values()[rank];
    }
    ScalarField::new(g.domain().clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainSpec;

    fn two_cells(a: f64, b: f64) -> ScalarField {
        let mut mask = vec![false; 12];
        mask[5] = true;
        mask[6] = true;
        let d = Arc::new(GridDomain::from_mask(4, 3, 1.0, [0.0, 0.0], mask).unwrap());
        ScalarField::new(d, vec![a, b]).unwrap()
    }

    #[test]
    fn distribution_of_two_cells() {
        let u = two_cells(3.0, 1.0);
        let mu = distribution_function(&u);
        assert_eq!(mu.breaks(), &[0.0, 1.0, 3.0, 3.0]);
        assert_eq!(mu.values(), &[2.0, 1.0, 0.0]);
        assert_eq!(mu.eval(3.0), 0.0);
        assert_eq!(mu.eval(0.5), 2.0);
        assert_eq!(mu.eval(1.0), 1.0);
        assert_eq!(mu.eval(3.5), 0.0);
        let us = decreasing_rearrangement(&u);
        assert_eq!(us.values(), &[3.0, 1.0]);
        assert_eq!(us.breaks(), &[0.0, 1.0, 2.0]);
    }

    #[test]
    fn constant_field_distribution() {
        let d = Arc::new(GridDomain::rasterize(&DomainSpec::disk([0.0, 0.0], 1.0), 0.1).unwrap());
        let u = ScalarField::constant(d.clone(), 2.0).unwrap();
        let mu = distribution_function(&u);
        assert_eq!(mu.eval(1.99), d.measure());
        assert_eq!(mu.eval(2.0), 0.0);
    }

    #[test]
    fn cone_distribution() {
        let h = 1.0 / 256.0;
        let d = Arc::new(GridDomain::rasterize(&DomainSpec::disk([0.0, 0.0], 1.0), h).unwrap());
        let u = ScalarField::from_fn(d, |p| 1.0 - p[0].hypot(p[1])).unwrap();
        let mu = distribution_function(&u);
        for t in [0.0, 0.2, 0.5, 0.9] {
            let exact = std::f64::consts::PI * (1.0f64 - t).powi(2);
            assert!((mu.eval(t) - exact).abs() < 10.0 * h, "t = {t}");
        }
        // already radial decreasing: u♯ reproduces u
        let us = schwarz_rearrangement(&u);
        let worst = (0..u.len())
            .map(|a| (us.eval(u.domain().cell_center(a)) - u.values()[a]).abs())
            .fold(0.0, f64::max);
        assert!(worst < 3.0 * h, "{worst}");
    }

    #[test]
    fn hardy_littlewood_two_cells() {
        let h = two_cells(3.0, 1.0);
        let g = two_cells(1.0, 2.0);
        assert!((hardy_littlewood_gap(&h, &g).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(hardy_littlewood_gap(&h, &h).unwrap(), 0.0);
    }

    #[test]
    fn g_sub_h_special_cases() {
        let h = 1.0 / 32.0;
        let d = Arc::new(GridDomain::rasterize(&DomainSpec::disk([0.0, 0.0], 1.0), h).unwrap());
        let radial = ScalarField::from_fn(d.clone(), |p| 1.0 - p[0] * p[0] - p[1] * p[1]).unwrap();
        let g = ScalarField::from_fn(d.clone(), |p| (3.0 * p[0]).sin().abs() + p[1] * p[1]).unwrap();
        // h radial decreasing: placing g* by the ranks of h is g♯ on the lattice
        let gh = g_sub_h(&g, &radial).unwrap();
        let gs = schwarz_rearrangement(&g).on_lattice(d.clone()).unwrap();
        assert_eq!(rank_order(radial.values()), nearest_order(&d, [0.0, 0.0]));
        assert_eq!(gh.values(), gs.values());
        assert_eq!(g_sub_h(&g, &g).unwrap().values(), g.values());
        let c = ScalarField::constant(d, 0.7).unwrap();
        assert!(g_sub_h(&c, &g).unwrap().values().iter().all(|&v| v == 0.7));
    }

    #[test]
    fn norms() {
        let d = Arc::new(GridDomain::rasterize(&DomainSpec::rectangle(0.0, 0.0, 1.0, 1.0), 0.125).unwrap());
        let one = ScalarField::constant(d.clone(), 1.0).unwrap();
        assert!((lp_norm(2.0, &one).unwrap() - 1.0).abs() < 1e-15);
        assert!(lp_norm(0.5, &one).is_err());
        let u = ScalarField::from_fn(d, |p| p[0] - 2.0 * p[1]).unwrap();
        let us = decreasing_rearrangement(&u);
        for p in [1.0, 2.0, 3.5] {
            assert!((lp_norm(p, &u).unwrap() - lp_norm(p, &us).unwrap()).abs() < 1e-13);
        }
    }
}
