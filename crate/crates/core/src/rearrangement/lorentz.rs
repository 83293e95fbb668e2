//! `θ_p`, the Lorentz-type norm `Λ^q_p` and the quantitative
//! Hardy–Littlewood deficit.

use serde::Serialize;

use super::profile::{MonotoneProfile, Reading};
use super::{decreasing_rearrangement, g_sub_h, hardy_littlewood_gap, LpIntegrable};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::numerics::{gauss_legendre, integrate};

/// Slopes smaller than this in magnitude count as flat.
pub const FLAT_SLOPE: f64 = 1e-12;

/// `θ_p(s) = (∫_0^s (−h*′)^{−1/(p−1)})^{1/p′}`, stored through the inner
/// integral at a set of knots and interpolated linearly in between.
#[derive(Clone, Debug, Serialize)]
pub struct ThetaP {
    knots: Vec<f64>,
    cumulative: Vec<f64>,
    exponent: f64,
}

impl ThetaP {
    /// Whether `θ_p` is finite on `[0, total)`.
    pub fn is_admissible(&self) -> bool {
        let n = self.cumulative.len();
        // the last knot is the right end of the interval; only s < total matters
        self.cumulative[..n - 1].iter().all(|c| c.is_finite())
            && (n < 2 || self.cumulative[n - 2].is_finite())
            && self.first_infinite().map_or(true, |s| s >= self.total())
    }

    /// Smallest knot from which the inner integral is infinite.
    pub fn first_infinite(&self) -> Option<f64> {
        let k = self.cumulative.iter().position(|c| !c.is_finite())?;
        // divergence starts inside the segment that ends at this knot
        Some(if k == 0 { 0.0 } else { self.knots[k - 1] })
    }

    pub fn total(&self) -> f64 {
        *self.knots.last().unwrap()
    }

    /// `∫_0^s (−h*′)^{−1/(p−1)}`.
    pub fn inner(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        let n = self.knots.len();
        let k = self.knots.partition_point(|&b| b < s);
        if k == 0 {
            return self.cumulative[0] * s / self.knots[0].max(f64::MIN_POSITIVE);
        }
        if k >= n {
            // continue the last segment's density
            let (a, b) = (self.knots[n - 2], self.knots[n - 1]);
            let rate = (self.cumulative[n - 1] - self.cumulative[n - 2]) / (b - a);
            return self.cumulative[n - 1] + rate * (s - b);
        }
        let (a, b) = (self.knots[k - 1], self.knots[k]);
        let (ca, cb) = (self.cumulative[k - 1], self.cumulative[k]);
        if !cb.is_finite() {
            return f64::INFINITY;
        }
        if b == a {
            cb
        } else {
            ca + (cb - ca) * (s - a) / (b - a)
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.inner(s).powf(self.exponent)
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidArgument(format!("theta_p needs p > 1, got {p}")));
    }
    Ok(())
}

/// `θ_p` of a profile through its piecewise-linear reading (a step profile
/// is read at its piece midpoints). A flat segment makes the integrand
/// infinite from its left end on.
pub fn theta_p(hstar: &MonotoneProfile, p: f64) -> Result<ThetaP> {
    check_p(p)?;
    let lin = match hstar.reading() {
        Reading::Step => hstar.midpoint_linear(),
        Reading::Linear => hstar.clone(),
    };
    let slopes = lin.slopes();
    let knots = lin.breaks()[1..].to_vec();
    let mut cumulative = Vec::with_capacity(knots.len());
    let mut acc = 0.0f64;
    for (k, &m) in slopes.iter().enumerate() {
        let width = lin.breaks()[k + 1] - lin.breaks()[k];
        if width > 0.0 {
            if m.abs() < FLAT_SLOPE {
                acc = f64::INFINITY;
            } else {
                acc += (-m).powf(-1.0 / (p - 1.0)) * width;
            }
        }
        cumulative.push(acc);
    }
    Ok(ThetaP { knots, cumulative, exponent: 1.0 - 1.0 / p })
}

/// `θ_p` for an analytic profile given through `−h*′`, tabulated at
/// `knots` (increasing, positive). The first interval is integrated over
/// dyadic shells towards 0; shells whose contributions stop shrinking mean
/// the integrand is not integrable at 0 and give `+∞`.
pub fn theta_p_analytic<F>(neg_slope: F, p: f64, knots: &[f64]) -> Result<ThetaP>
where
    F: Fn(f64) -> f64,
{
    check_p(p)?;
    if knots.is_empty() || knots[0] <= 0.0 || knots.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("knots must be positive and increasing".into()));
    }
    let e = -1.0 / (p - 1.0);
    let w = |s: f64| {
        // analytic slopes may legitimately tend to 0; only a true zero is flat
        let d = neg_slope(s);
        if d <= 0.0 {
            f64::INFINITY
        } else {
            d.powf(e)
        }
    };
    let mut cumulative = Vec::with_capacity(knots.len());
    let mut acc = near_zero(&w, knots[0]);
    cumulative.push(acc);
    for k in 1..knots.len() {
        let (a, b) = (knots[k - 1], knots[k]);
        if acc.is_finite() && b > a {
            let piece = if b - a < 1e-3 * b { gauss_legendre(w, a, b) } else { integrate(&w, a, b, 1e-10) };
            acc += if piece.is_finite() { piece } else { f64::INFINITY };
        }
        cumulative.push(acc);
    }
    Ok(ThetaP { knots: knots.to_vec(), cumulative, exponent: 1.0 - 1.0 / p })
}

fn near_zero<W: Fn(f64) -> f64>(w: &W, s: f64) -> f64 {
    let mut total = 0.0;
    let mut prev: Option<f64> = None;
    let mut hi = s;
    for k in 0..200 {
        let lo = 0.5 * hi;
        let c = gauss_legendre(w, lo, hi);
        if !c.is_finite() {
            return f64::INFINITY;
        }
        total += c;
        if let Some(pc) = prev {
            let ratio = c / pc;
            if k > 12 && ratio > 1.0 - 1e-6 {
                return f64::INFINITY;
            }
            if c <= 1e-17 * total {
                // remaining shells form at most a geometric tail
                return total + c * ratio / (1.0 - ratio).max(1e-300);
            }
        }
        prev = Some(c);
        hi = lo;
    }
    let ratio = prev.map_or(0.0, |p| p / total.max(f64::MIN_POSITIVE));
    total + ratio
}

/// `‖g‖_{Λ^q_p} = (∫ (g*)^q θ_p′)^{1/q}`, an exact Stieltjes sum over the
/// steps of `g*`. Infinite when `θ_p` is.
pub fn lorentz_lambda_norm_with(gstar: &MonotoneProfile, theta: &ThetaP, q: f64) -> f64 {
    let mut acc = 0.0f64;
    let mut prev = 0.0f64;
    let b = gstar.breaks();
    for (k, &v) in gstar.values().iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let lo = theta.eval(b[k]);
        let hi = theta.eval(b[k + 1]);
        if !hi.is_finite() {
            return f64::INFINITY;
        }
        acc += v.abs().powf(q) * (hi - lo.max(prev.min(hi)));
        prev = hi;
    }
    acc.powf(1.0 / q)
}

/// Checks `1/p ≤ q < 2 + (1 − 4/n)/p` for `n = 2`.
pub fn check_window(p: f64, q: f64) -> Result<()> {
    let n = 2.0;
    if !(p > 1.0) || !(q >= 1.0 / p) || !(q < 2.0 + (1.0 - 4.0 / n) / p) {
        return Err(Error::InvalidArgument(format!(
            "(p, q) = ({p}, {q}) outside the window 1/p <= q < 2 + (1 - 4/n)/p"
        )));
    }
    Ok(())
}

/// `‖g‖_{Λ^q_p}` with `θ_p` taken from `hstar`.
pub fn lorentz_lambda_norm(g: &ScalarField, hstar: &MonotoneProfile, p: f64, q: f64) -> Result<f64> {
    check_window(p, q)?;
    let theta = theta_p(hstar, p)?;
    if !theta.is_admissible() {
        return Ok(f64::INFINITY);
    }
    Ok(lorentz_lambda_norm_with(&decreasing_rearrangement(g), &theta, q))
}

#[derive(Clone, Debug, Serialize)]
pub struct HlDeficit {
    /// `∫ h* g* − ∫ |hg|`.
    pub lhs_gap: f64,
    /// `‖g‖_Λ^{−qp} ‖g − g_h‖_m^{1+pq} / (2^{p+1} e q)`.
    pub deficit_term: f64,
    pub lambda_norm: f64,
    pub lm_distance: f64,
    pub m: f64,
    pub tol: f64,
    pub pass: bool,
}

/// The deficit term against the Hardy–Littlewood gap for a pair of fields.
pub fn quantitative_hl_deficit(h: &ScalarField, g: &ScalarField, p: f64, q: f64) -> Result<HlDeficit> {
    check_window(p, q)?;
    if !h.same_domain(g) {
        return Err(Error::FrameMismatch);
    }
    let hstar = decreasing_rearrangement(h);
    let theta = theta_p(&hstar, p)?;
    if !theta.is_admissible() {
        return Err(Error::Inadmissible(format!(
            "theta_p is infinite from s = {:.6e} on (h* has a flat segment)",
            theta.first_infinite().unwrap_or(0.0)
        )));
    }
    let gstar = decreasing_rearrangement(g);
    let lambda = lorentz_lambda_norm_with(&gstar, &theta, q);
    let gh = g_sub_h(g, h)?;
    let diff = ScalarField::new(g.domain().clone(), g.values().iter().zip(gh.values()).map(|(a, b)| a.abs() - b).collect())?;
    let m = (q * p + 1.0) / (p + 1.0);
    let dist = diff.p_norm(m);
    let deficit = if lambda > 0.0 && dist > 0.0 {
        lambda.powf(-q * p) * dist.powf(1.0 + p * q) / (2f64.powf(p + 1.0) * std::f64::consts::E * q)
    } else {
        0.0
    };
    let gap = hardy_littlewood_gap(h, g)?;
    let top: f64 = hstar.values().iter().zip(gstar.values()).map(|(a, b)| a * b).sum::<f64>() * g.domain().cell_area();
    let tol = 1e-12 * top.abs().max(f64::MIN_POSITIVE);
    Ok(HlDeficit { lhs_gap: gap, deficit_term: deficit, lambda_norm: lambda, lm_distance: dist, m, tol, pass: deficit <= gap + tol })
}
