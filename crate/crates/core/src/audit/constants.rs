//! Configuration constants of the stability estimates and everything that
//! can be derived from them in closed form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{conjugate, omega, radial_constant};
use crate::rearrangement::check_window;

/// Working dimension.
pub const N: u32 = 2;

/// User-facing constants. `r`, `s` and the constants `C̃₂`, `C̃₃` are not
/// known numerically; whatever is configured here only feeds verdicts that
/// are labelled conditional.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilityConstants {
    /// Constant of the quantitative isoperimetric inequality.
    pub gamma_n: f64,
    /// Exponents of the quantitative Pólya–Szegő bracket `[M(E^r) + E]^s`.
    pub r: f64,
    pub s: f64,
    pub alpha_exp: f64,
    pub beta_exp: f64,
    pub q_exp: f64,
    /// `(p, q)` of the Lorentz norm in the Hardy–Littlewood step.
    pub hl_p: f64,
    pub hl_q: f64,
    pub c_tilde2: Option<f64>,
    pub c_tilde3: Option<f64>,
}

impl Default for StabilityConstants {
    fn default() -> Self {
        let alpha = 0.5;
        StabilityConstants {
            gamma_n: 2.5,
            r: 1.0,
            s: 1.0,
            alpha_exp: alpha,
            beta_exp: 1.0 / (2.0 * conjugate(N)),
            q_exp: (1.0 - alpha) / 2.0,
            hl_p: 2.0,
            hl_q: 1.0,
            c_tilde2: None,
            c_tilde3: None,
        }
    }
}

impl StabilityConstants {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.gamma_n > 0.0 && self.gamma_n.is_finite()) {
            return bad(format!("gamma_n must be positive, got {}", self.gamma_n));
        }
        if !(self.r > 0.0 && self.s > 0.0) {
            return bad(format!("r and s must be positive, got r = {}, s = {}", self.r, self.s));
        }
        let (a, b, q) = (self.alpha_exp, self.beta_exp, self.q_exp);
        let np = conjugate(N);
        if !(0.0 < b && b < a && a < 1.0 && b < 1.0 / np) {
            return bad(format!("need 0 < beta < alpha < 1 and beta < 1/n' = {}, got alpha = {a}, beta = {b}", 1.0 / np));
        }
        if !(0.0 < q && q < 1.0 - a) {
            return bad(format!("need 0 < q < 1 - alpha, got q = {q}"));
        }
        check_window(self.hl_p, self.hl_q)?;
        for (name, c) in [("c_tilde2", self.c_tilde2), ("c_tilde3", self.c_tilde3)] {
            if let Some(c) = c {
                if !(c > 0.0 && c.is_finite()) {
                    return bad(format!("{name} must be positive, got {c}"));
                }
            }
        }
        Ok(())
    }

    pub fn derived(&self) -> DerivedConstants {
        let n = N as f64;
        let w = omega(N);
        let k = radial_constant(N);
        let np = conjugate(N);
        let (a, b, q) = (self.alpha_exp, self.beta_exp, self.q_exp);
        let theta4 = (1.0 - np * b).min(1.0 - a - q).min(n * q);
        let theta5 = (n * self.r).min(n * (a - b)).min(theta4).min(np * b);
        DerivedConstants {
            n: N,
            omega: w,
            n_prime: np,
            k_radial: k,
            c_tilde1: (8.0 * k).powi(3).max(16.0 * k * self.gamma_n),
            k2: w * n.powf(n),
            k3: 5.0 * n.powf(n) * w,
            k4: 7.0 * n.powf(n) * w,
            eps0: (1.0 / k).powf(1.0 / (1.0 - np * b)),
            theta4,
            theta5,
        }
    }

    /// Exponents of the combined estimate.
    pub fn exponents(&self) -> AssembledExponents {
        let d = self.derived();
        let n = N as f64;
        let (p, q) = (self.hl_p, self.hl_q);
        let pq = p * q;
        let m = (pq + 1.0) / (p + 1.0);
        let t1 = self.s * d.theta5;
        let t2 = 1f64.max((2.0 + pq - 8.0 * t1 / (n + 2.0)) / (1.0 + pq));
        let t3 = ((2.0 - m) / (8.0 * m)).min(1.0 / (1.0 + pq)).min((2.0 * t2 / (n + 2.0)) / (1.0 + pq));
        AssembledExponents {
            m,
            theta_tilde1: t1,
            theta_tilde2: t2,
            theta_tilde3: t3,
            theta1: 1.0 / t1,
            theta2: 1.0 / t2,
            theta2_from_theta3: 1.0 / t3,
        }
    }

    /// `C₁, C₂, C₃` for a given `|Ω|`, `‖f‖₁`, `‖f‖_{2n/(n+2)}` and `‖f‖₂`.
    pub fn assembled(&self, measure: f64, f_l1: f64, f_l2n: f64, f_l2: f64) -> AssembledConstants {
        let n = N as f64;
        let d = self.derived();
        let e = self.exponents();
        let (t1, t2, t3, m) = (e.theta_tilde1, e.theta_tilde2, e.theta_tilde3, e.m);
        let c1 = measure.powf((2.0 - n) / n) * f_l1 / d.c_tilde1;
        let c2 = self.c_tilde2.map(|c| {
            (f_l1.powf(1.0 - 3.0 * t1) / (c * f_l2n.powf(1.0 - 2.0 * t1)) * measure.powf(-1.0 - (2.0 / n - 1.0) * t1))
                .powf(1.0 / t1)
        });
        let c3 = self.c_tilde3.map(|c| {
            (c * f_l2.powf(t2)
                * f_l1.powf(1.0 - t3 - t2)
                * measure.powf(t2 / 2.0 + (1.0 - m) / m + ((n - 2.0) / n) * t3))
                .powf(-1.0 / t3)
        });
        AssembledConstants { c1, c2, c3 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DerivedConstants {
    pub n: u32,
    pub omega: f64,
    pub n_prime: f64,
    /// `n² ω_n^{2/n}`.
    pub k_radial: f64,
    pub c_tilde1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    pub eps0: f64,
    pub theta4: f64,
    pub theta5: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AssembledExponents {
    pub m: f64,
    pub theta_tilde1: f64,
    pub theta_tilde2: f64,
    pub theta_tilde3: f64,
    pub theta1: f64,
    /// `1/θ̃₂`, as stated for the combined estimate.
    pub theta2: f64,
    /// `1/θ̃₃`, the exponent that matches the `f`-term bound and `C₃`.
    pub theta2_from_theta3: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AssembledConstants {
    pub c1: f64,
    pub c2: Option<f64>,
    pub c3: Option<f64>,
}
