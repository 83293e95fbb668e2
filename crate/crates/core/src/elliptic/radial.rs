//! The symmetrized problem `−Δv = f♯` in `Ω♯`, solved in closed form.
//!
//! With `s = ω_n|x|^n` and `F(t) = ∫_0^t f*`,
//!
//! ```text
//! v*(s)  = ∫_s^{|Ω|} t^{−2+2/n} F(t) dt / (n² ω_n^{2/n})
//! |∇v|(r) = F(ω_n r^n) / (n ω_n r^{n−1})
//! ```
//!
//! `F` is a polynomial of degree ≤ 2 on every piece of `f*` (step or linear
//! reading), so the outer integral has an elementary antiderivative on each
//! piece and is evaluated exactly rather than by quadrature.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{gauss_legendre, omega, radial_constant};
use crate::rearrangement::{MonotoneProfile, Reading};

#[derive(Clone, Debug, Serialize)]
pub struct RadialSolution {
    pub n: u32,
    pub total: f64,
    pub f_star: MonotoneProfile,
    #[serde(skip)]
    knots: Vec<f64>,
    // F(t) = c[0] + c[1] t + c[2] t² on [knots[k], knots[k+1]]
    #[serde(skip)]
    coef: Vec<[f64; 3]>,
    #[serde(skip)]
    v_at: Vec<f64>,
}

/// `∫ t^e dt` evaluated at `t` (with the logarithm at `e = −1`).
fn power_primitive(e: f64, t: f64) -> f64 {
    if (e + 1.0).abs() < 1e-14 {
        t.ln()
    } else {
        t.powf(e + 1.0) / (e + 1.0)
    }
}

/// Builds `v` from `f*` on `[0, total_measure]` (`f*` is zero past its own support).
pub fn radial_solution(f_star: &MonotoneProfile, total_measure: f64, n: u32) -> Result<RadialSolution> {
    if n < 2 {
        return Err(Error::InvalidArgument("dimension must be at least 2".into()));
    }
    if !(total_measure > 0.0) {
        return Err(Error::InvalidArgument(format!("total measure must be positive, got {total_measure}")));
    }
    if f_star.values().iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidArgument("f* must be nonnegative".into()));
    }
    if f_star.total() > total_measure * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument("f* extends past the total measure".into()));
    }
    // pieces as (a, b, value at a, slope), merging equal steps
    let mut pieces: Vec<(f64, f64, f64, f64)> = Vec::new();
    let br = f_star.breaks();
    let vals = f_star.values();
    match f_star.reading() {
        Reading::Step => {
            for k in 0..vals.len() {
                let (a, b) = (br[k], br[k + 1]);
                if b <= a {
                    continue;
                }
                match pieces.last_mut() {
                    Some(last) if last.2 == vals[k] && last.3 == 0.0 && last.1 == a => last.1 = b,
                    _ => pieces.push((a, b, vals[k], 0.0)),
                }
            }
        }
        Reading::Linear => {
            for k in 1..br.len() {
                let (a, b) = (br[k - 1], br[k]);
                if b > a {
                    pieces.push((a, b, vals[k - 1], (vals[k] - vals[k - 1]) / (b - a)));
                }
            }
        }
    }
    let end = pieces.last().map_or(0.0, |p| p.1);
    if end < total_measure {
        pieces.push((end, total_measure, 0.0, 0.0));
    }
    let mut knots = Vec::with_capacity(pieces.len() + 1);
    let mut coef = Vec::with_capacity(pieces.len());
    let mut big_f = 0.0f64;
    knots.push(0.0);
    for &(a, b, fa, m) in &pieces {
        // F(t) = F(a) + fa (t − a) + m (t − a)²/2
        let c0 = big_f - fa * a + 0.5 * m * a * a;
        let c1 = fa - m * a;
        let c2 = 0.5 * m;
        coef.push([c0, c1, c2]);
        big_f += fa * (b - a) + 0.5 * m * (b - a) * (b - a);
        knots.push(b);
    }
    let mut sol = RadialSolution { n, total: total_measure, f_star: f_star.clone(), knots, coef, v_at: Vec::new() };
    let k = sol.coef.len();
    let mut v_at = vec![0.0; k + 1];
    for s in (0..k).rev() {
        v_at[s] = v_at[s + 1] + sol.segment_integral(s, sol.knots[s], sol.knots[s + 1]);
    }
    sol.v_at = v_at;
    Ok(sol)
}

impl RadialSolution {
    fn beta(&self) -> f64 {
        -2.0 + 2.0 / self.n as f64
    }

    fn segment(&self, s: f64) -> usize {
        self.knots.partition_point(|&b| b <= s).saturating_sub(1).min(self.coef.len() - 1)
    }

    // ∫_lo^hi t^β F(t) dt / (n² ω^{2/n}) inside segment k
    fn segment_integral(&self, k: usize, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        let beta = self.beta();
        let c = self.coef[k];
        let mut acc = 0.0;
        for (j, &cj) in c.iter().enumerate() {
            if cj != 0.0 {
                let e = beta + j as f64;
                acc += cj * (power_primitive(e, hi) - power_primitive(e, lo));
            }
        }
        acc / radial_constant(self.n)
    }

    /// `F(s) = ∫_0^s f*`.
    pub fn big_f(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, self.total);
        let c = self.coef[self.segment(s)];
        c[0] + c[1] * s + c[2] * s * s
    }

    /// `v*(s)`, zero for `s ≥ |Ω|`.
    pub fn v_star(&self, s: f64) -> f64 {
        if s >= self.total {
            return 0.0;
        }
        let s = s.max(0.0);
        let k = self.segment(s);
        self.v_at[k + 1] + self.segment_integral(k, s, self.knots[k + 1])
    }

    /// `v*′(s) = −s^{−2+2/n} F(s) / (n² ω^{2/n})`.
    pub fn v_star_derivative(&self, s: f64) -> f64 {
        if s <= 0.0 {
            // F(s) ~ f*(0) s, so the limit is finite for n = 2 and 0 for n > 2
            return if self.n == 2 { -self.f_star.eval(0.0) / radial_constant(2) } else { 0.0 };
        }
        -s.powf(self.beta()) * self.big_f(s) / radial_constant(self.n)
    }

    /// `v(x)` at distance `r` from the centre.
    pub fn v_at_radius(&self, r: f64) -> f64 {
        self.v_star(omega(self.n) * r.abs().powi(self.n as i32))
    }

    /// `max v = v*(0)`.
    pub fn max_value(&self) -> f64 {
        self.v_at[0]
    }

    /// Radius of `Ω♯`.
    pub fn radius(&self) -> f64 {
        (self.total / omega(self.n)).powf(1.0 / self.n as f64)
    }

    /// `|∇v|` as a function of `s = ω_n|x|^n`.
    pub fn gradient_at_s(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        let n = self.n as f64;
        let w = omega(self.n);
        let r = (s / w).powf(1.0 / n);
        self.big_f(s) / (n * w * r.powf(n - 1.0))
    }

    /// `|∇v|(r)` for `0 ≤ r ≤ R♯`.
    pub fn gradient(&self, r: f64) -> Result<f64> {
        let big_r = self.radius();
        if !(r >= 0.0) || r > big_r * (1.0 + 1e-12) {
            return Err(Error::InvalidArgument(format!("radius {r} outside [0, {big_r}]")));
        }
        Ok(self.gradient_at_s(omega(self.n) * r.powi(self.n as i32)))
    }

    /// `ν(t) = |{v > t}|` by bisection on `v*`.
    pub fn nu(&self, t: f64) -> f64 {
        if t >= self.max_value() {
            return 0.0;
        }
        if t < 0.0 {
            return self.total;
        }
        let (mut lo, mut hi) = (0.0, self.total);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.v_star(mid) > t {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 4.0 * f64::EPSILON * hi {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// Applies `f` on a Gauss–Legendre partition refined along the knots.
    fn integrate_s<G: Fn(f64) -> f64>(&self, g: G) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.coef.len() {
            let (a, b) = (self.knots[k], self.knots[k + 1]);
            if b <= a {
                continue;
            }
            // pieces near 0 carry the t^β singularity of v*; split them dyadically
            if a == 0.0 {
                let mut hi = b;
                for _ in 0..40 {
                    let lo = 0.5 * hi;
                    acc += gauss_legendre(&g, lo, hi);
                    hi = lo;
                }
                acc += gauss_legendre(&g, 0.0, hi);
            } else {
                let parts = 4usize;
                for p in 0..parts {
                    let lo = a + (b - a) * p as f64 / parts as f64;
                    let hi = a + (b - a) * (p + 1) as f64 / parts as f64;
                    acc += gauss_legendre(&g, lo, hi);
                }
            }
        }
        acc
    }

    /// `‖v‖_2²`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.integrate_s(|s| self.v_star(s).powi(2))
    }

    /// `‖v‖_1`.
    pub fn l1_norm(&self) -> f64 {
        self.integrate_s(|s| self.v_star(s))
    }

    /// `∫_{Ω♯} |∇v|^q`.
    pub fn gradient_lq(&self, q: f64) -> f64 {
        self.integrate_s(|s| self.gradient_at_s(s).powf(q))
    }

    /// `∫_{Ω♯} |∇v|² = ∫ f* v*`.
    pub fn energy(&self) -> f64 {
        self.gradient_lq(2.0)
    }

    /// `∫_{v = t} |∇v| = F(ν(t))`.
    pub fn level_flux(&self, t: f64) -> f64 {
        self.big_f(self.nu(t))
    }

    /// `|{|∇v| ≤ δ}|`, using that `s = ω_n|x|^n` preserves measure.
    pub fn gradient_sublevel_measure(&self, delta: f64, samples: usize) -> f64 {
        let samples = samples.max(16);
        let ds = self.total / samples as f64;
        // the set is a finite union of s-intervals; resolve it on a fine grid
        let mut acc = 0.0;
        for i in 0..samples {
            let (a, b) = (i as f64 * ds, (i + 1) as f64 * ds);
            let ga = self.gradient_at_s(a);
            let gb = self.gradient_at_s(b);
            acc += match (ga <= delta, gb <= delta) {
                (true, true) => ds,
                (false, false) => 0.0,
                // locate the crossing linearly
                (true, false) => ds * (delta - ga) / (gb - ga),
                (false, true) => ds * (ga - delta) / (ga - gb),
            };
        }
        acc
    }

    /// `max_t |n²ω^{2/n} ν^{2−2/n} + ν′ F(ν)| / (n²ω^{2/n} ν^{2−2/n})` over
    /// 64 levels in `(0, max v)`, with `ν′` by central differences.
    pub fn nu_ode_residual(&self) -> f64 {
        let vmax = self.max_value();
        if !(vmax > 0.0) {
            return 0.0;
        }
        let k = radial_constant(self.n);
        let e = 2.0 - 2.0 / self.n as f64;
        let mut worst = 0.0f64;
        for i in 0..64 {
            let t = vmax * (i as f64 + 0.5) / 64.0;
            let dt = 1e-5 * vmax;
            let nu = self.nu(t);
            let dnu = (self.nu(t + dt) - self.nu(t - dt)) / (2.0 * dt);
            let lhs = k * nu.powf(e);
            if lhs > 0.0 {
                worst = worst.max((lhs + dnu * self.big_f(nu)).abs() / lhs);
            }
        }
        worst
    }

    /// `v*` as a piecewise-linear profile through the knots, refined so
    /// that every segment has at least `per_segment` sub-intervals.
    pub fn v_profile(&self, per_segment: usize) -> MonotoneProfile {
        let per = per_segment.max(1);
        let mut s = vec![0.0];
        for k in 0..self.coef.len() {
            let (a, b) = (self.knots[k], self.knots[k + 1]);
            for p in 1..=per {
                let t = a + (b - a) * p as f64 / per as f64;
                if t > *s.last().unwrap() {
                    s.push(t);
                }
            }
        }
        let mut v: Vec<f64> = s.iter().map(|&t| self.v_star(t)).collect();
        for i in 1..v.len() {
            v[i] = v[i].min(v[i - 1]);
        }
        MonotoneProfile::linear(s, v).expect("v* is nonincreasing")
    }
}
