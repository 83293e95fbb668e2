//! Gradient quantities of `u♯` read off its smoothed profile, and the
//! Pólya–Szegő deficit `E(u)`.
//!
//! With `u♯(x) = p(ω|x|ⁿ)` and `p` piecewise linear,
//! `|∇u♯| = |p′(s)| n ω^{1/n} s^{1−1/n}`, so the Dirichlet integral, the
//! level fluxes and the sublevel sets of `|∇u♯|` are all elementary on each
//! segment.

use serde::Serialize;

use super::constants::N;
use super::instance::Instance;
use super::Verdict;
use crate::elliptic::dirichlet_energy;
use crate::error::{Error, Result};
use crate::numerics::{omega, radial_constant, stable_sum};
use crate::rearrangement::{MonotoneProfile, Reading};

/// Allowance on the energy-gap bound, in units of the energy tolerance.
pub const ENERGY_GAP_TOL_FACTOR: f64 = 10.0;

#[derive(Clone, Debug)]
pub struct SharpGradient {
    knots: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    /// `|{u > 0}|`.
    support: f64,
}

impl SharpGradient {
    pub fn new(profile: &MonotoneProfile, support: f64) -> Result<Self> {
        if profile.reading() != Reading::Linear {
            return Err(Error::InvalidArgument("gradients need a piecewise-linear profile".into()));
        }
        Ok(SharpGradient {
            knots: profile.breaks().to_vec(),
            values: profile.values().to_vec(),
            slopes: profile.slopes(),
            support,
        })
    }

    pub fn from_instance(inst: &Instance) -> Result<Self> {
        let w = inst.domain().cell_area();
        let support = inst.u.values().iter().filter(|&&x| x > 0.0).count() as f64 * w;
        Self::new(&inst.u_sharp_profile(), support)
    }

    pub fn max_value(&self) -> f64 {
        self.values[0]
    }

    fn total(&self) -> f64 {
        *self.knots.last().unwrap()
    }

    fn segment(&self, s: f64) -> usize {
        self.knots.partition_point(|&k| k < s).clamp(1, self.knots.len() - 1) - 1
    }

    /// `n ω^{1/n} s^{1−1/n}`: `|∇u♯| / |p′|`.
    fn jacobian(s: f64) -> f64 {
        let n = N as f64;
        n * omega(N).powf(1.0 / n) * s.max(0.0).powf(1.0 - 1.0 / n)
    }

    pub fn value(&self, s: f64) -> f64 {
        if s >= self.total() {
            return 0.0;
        }
        let k = self.segment(s);
        self.values[k] + self.slopes[k] * (s - self.knots[k])
    }

    /// `|∇u♯|` at `s = ω|x|ⁿ`.
    pub fn at(&self, s: f64) -> f64 {
        if s >= self.total() {
            return 0.0;
        }
        self.slopes[self.segment(s)].abs() * Self::jacobian(s)
    }

    /// `∫_{u♯=t} |∇u♯| = n²ω^{2/n} s^{2−2/n} |p′(s)|` at the radius where
    /// `u♯ = t`; zero on plateaus and outside `(0, max u♯)`.
    pub fn level_flux(&self, t: f64) -> f64 {
        if !(t > 0.0 && t < self.max_value()) {
            return 0.0;
        }
        // first knot with value <= t
        let j = self.values.partition_point(|&v| v > t);
        if j == 0 || j >= self.values.len() {
            return 0.0;
        }
        let k = j - 1;
        let m = self.slopes[k];
        if m == 0.0 {
            return 0.0;
        }
        let s = self.knots[k] + (t - self.values[k]) / m;
        Self::jacobian(s).powi(2) * m.abs()
    }

    /// `∫|∇u♯|² = n²ω^{2/n} Σ m_j² ∫ s^{2−2/n} ds`.
    pub fn energy(&self) -> f64 {
        let e = 2.0 - 2.0 / N as f64;
        let k = radial_constant(N);
        stable_sum(self.slopes.iter().enumerate().map(|(j, &m)| {
            let (a, b) = (self.knots[j], self.knots[j + 1]);
            m * m * k * (b.powf(e + 1.0) - a.powf(e + 1.0)) / (e + 1.0)
        }))
    }

    /// `|{|∇u♯| < δ}|` restricted to `{0 < u♯ < ‖u‖∞}`, unnormalized.
    pub fn sublevel_measure(&self, delta: f64) -> f64 {
        if !(delta > 0.0) {
            return 0.0;
        }
        let n = N as f64;
        let top = self.max_value();
        let mut acc = 0.0;
        for (j, &m) in self.slopes.iter().enumerate() {
            let (a, b) = (self.knots[j], self.knots[j + 1]);
            if b <= a {
                continue;
            }
            if m == 0.0 {
                let v = self.values[j];
                if v > 0.0 && v < top {
                    acc += b - a;
                }
                continue;
            }
            // |m| n ω^{1/n} s^{1−1/n} < δ  ⇔  s < s_δ
            let s_delta = (delta / (m.abs() * n * omega(N).powf(1.0 / n))).powf(n / (n - 1.0));
            acc += (s_delta.min(b) - a).max(0.0);
        }
        acc
    }

    /// `M_{u♯}(δ)`: the sublevel measure relative to `|{u > 0}|`.
    pub fn m_fn(&self, delta: f64) -> f64 {
        if self.support > 0.0 {
            self.sublevel_measure(delta) / self.support
        } else {
            0.0
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PolyaSzegoRecord {
    /// `∫_Ω |∇u|²` on the grid.
    pub energy_u: f64,
    /// `∫ |∇u♯|²` from the profile.
    pub energy_sharp: f64,
    /// `E(u) = ∫|∇u|² / ∫|∇u♯|² − 1`.
    pub e_u: f64,
    pub gradient_gap: f64,
    /// `M_{u♯}(δ)` for the probed `δ`.
    pub m_values: Vec<(f64, f64)>,
    /// `∫|∇u|² − ∫|∇u♯|² ≤ 2‖f‖₁ ε`.
    pub energy_gap: Verdict,
}

pub fn polya_szego_deficit(inst: &Instance, eps_inf: f64, deltas: &[f64]) -> Result<PolyaSzegoRecord> {
    if inst.u.sup_norm() == 0.0 {
        return Err(Error::InvalidArgument("u vanishes identically".into()));
    }
    let sg = SharpGradient::from_instance(inst)?;
    let energy_sharp = sg.energy();
    if !(energy_sharp > 0.0) {
        return Err(Error::InvalidArgument("∇u♯ vanishes".into()));
    }
    let energy_u = dirichlet_energy(&inst.u);
    let gap = energy_u - energy_sharp;
    Ok(PolyaSzegoRecord {
        energy_u,
        energy_sharp,
        e_u: energy_u / energy_sharp - 1.0,
        gradient_gap: gap,
        m_values: deltas.iter().map(|&d| (d, sg.m_fn(d))).collect(),
        energy_gap: Verdict::le(
            "energy_gap",
            gap,
            2.0 * inst.f_l1() * eps_inf,
            ENERGY_GAP_TOL_FACTOR * inst.tol_energy(),
        ),
    })
}
