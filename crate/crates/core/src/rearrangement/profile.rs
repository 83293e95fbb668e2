use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::stable_sum;

/// How the stored values are read between breakpoints.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Reading {
    /// Right-continuous steps: `values[k]` on `[breaks[k], breaks[k+1])`.
    Step,
    /// Linear interpolation of `values[k]` at knot `breaks[k]`.
    Linear,
}

/// A nonincreasing function on `[0, total]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotoneProfile {
    breaks: Vec<f64>,
    values: Vec<f64>,
    reading: Reading,
}

impl MonotoneProfile {
    /// Step profile; `breaks` has one more entry than `values` and starts at 0.
    pub fn step(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breaks.len() != values.len() + 1 {
            return Err(Error::InvalidArgument(format!(
                "step profile with {} values needs {} breakpoints, got {}",
                values.len(),
                values.len() + 1,
                breaks.len()
            )));
        }
        Self::checked(breaks, values, Reading::Step)
    }

    /// Piecewise-linear profile through `(knots[k], values[k])`.
    pub fn linear(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() != values.len() || knots.len() < 2 {
            return Err(Error::InvalidArgument("linear profile needs matching knots and values (at least two)".into()));
        }
        Self::checked(knots, values, Reading::Linear)
    }

    fn checked(breaks: Vec<f64>, values: Vec<f64>, reading: Reading) -> Result<Self> {
        if breaks.first() != Some(&0.0) {
            return Err(Error::InvalidArgument("profile must start at s = 0".into()));
        }
        if breaks.windows(2).any(|w| !(w[1] >= w[0])) || breaks.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidArgument("profile breakpoints must be finite and sorted".into()));
        }
        if values.windows(2).any(|w| w[1] > w[0]) || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("profile values must be finite and nonincreasing".into()));
        }
        Ok(MonotoneProfile { breaks, values, reading })
    }

    /// Step profile with equal pieces of width `w` (sorted values, descending).
    pub(crate) fn uniform_steps(values: Vec<f64>, w: f64) -> Self {
        let breaks = (0..=values.len()).map(|k| k as f64 * w).collect();
        MonotoneProfile { breaks, values, reading: Reading::Step }
    }

    pub fn reading(&self) -> Reading {
        self.reading
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Right end of the support interval.
    pub fn total(&self) -> f64 {
        *self.breaks.last().unwrap()
    }

    /// Value at `s`; zero beyond the support, `values[0]` for `s ≤ 0`.
    pub fn eval(&self, s: f64) -> f64 {
        let total = self.total();
        if s > total {
            return 0.0;
        }
        match self.reading {
            Reading::Step => {
                if s >= total {
                    return *self.values.last().unwrap_or(&0.0);
                }
                // last k with breaks[k] <= s
                let k = self.breaks.partition_point(|&b| b <= s).saturating_sub(1);
                self.values[k.min(self.values.len() - 1)]
            }
            Reading::Linear => {
                if s <= 0.0 {
                    return self.values[0];
                }
                let k = self.breaks.partition_point(|&b| b < s).clamp(1, self.breaks.len() - 1);
                let (s0, s1) = (self.breaks[k - 1], self.breaks[k]);
                let (v0, v1) = (self.values[k - 1], self.values[k]);
                if s1 == s0 {
                    v1
                } else {
                    v0 + (v1 - v0) * (s - s0) / (s1 - s0)
                }
            }
        }
    }

    /// `∫_0^s` of the profile.
    pub fn primitive(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, self.total());
        let mut acc = 0.0;
        match self.reading {
            Reading::Step => {
                for k in 0..self.values.len() {
                    let (a, b) = (self.breaks[k], self.breaks[k + 1]);
                    if a >= s {
                        break;
                    }
                    acc += self.values[k] * (b.min(s) - a);
                }
            }
            Reading::Linear => {
                for k in 1..self.breaks.len() {
                    let (a, b) = (self.breaks[k - 1], self.breaks[k]);
                    if a >= s {
                        break;
                    }
                    let e = b.min(s);
                    acc += 0.5 * (self.values[k - 1] + self.eval_segment(k, e)) * (e - a);
                }
            }
        }
        acc
    }

    fn eval_segment(&self, k: usize, s: f64) -> f64 {
        let (s0, s1) = (self.breaks[k - 1], self.breaks[k]);
        let (v0, v1) = (self.values[k - 1], self.values[k]);
        if s1 == s0 {
            v1
        } else {
            v0 + (v1 - v0) * (s - s0) / (s1 - s0)
        }
    }

    /// `(∫ |φ|^p)^{1/p}` for any `p > 0`.
    pub fn norm(&self, p: f64) -> f64 {
        let sum = match self.reading {
            Reading::Step => stable_sum(
                self.values.iter().enumerate().map(|(k, v)| v.abs().powf(p) * (self.breaks[k + 1] - self.breaks[k])),
            ),
            Reading::Linear => stable_sum((1..self.breaks.len()).map(|k| {
                let (a, b) = (self.breaks[k - 1], self.breaks[k]);
                crate::numerics::gauss_legendre(|s| self.eval_segment(k, s).abs().powf(p), a, b)
            })),
        };
        sum.powf(1.0 / p)
    }

    /// Number of pieces (step) or segments (linear).
    pub fn pieces(&self) -> usize {
        self.breaks.len() - 1
    }

    /// The decreasing rearrangement of the profile itself; identity on
    /// nonincreasing step profiles.
    pub fn rearranged(&self) -> MonotoneProfile {
        match self.reading {
            Reading::Linear => self.clone(),
            Reading::Step => {
                let mut idx: Vec<usize> = (0..self.values.len()).collect();
                idx.sort_by(|&a, &b| self.values[b].abs().total_cmp(&self.values[a].abs()));
                let mut breaks = vec![0.0];
                let mut values = Vec::with_capacity(idx.len());
                for k in idx {
                    let w = self.breaks[k + 1] - self.breaks[k];
                    breaks.push(breaks.last().unwrap() + w);
                    values.push(self.values[k].abs());
                }
                MonotoneProfile { breaks, values, reading: Reading::Step }
            }
        }
    }

    /// Piecewise-linear reading of a step profile: knots at the piece
    /// midpoints, end segments extended linearly to `0` and `total`.
    pub fn midpoint_linear(&self) -> MonotoneProfile {
        if self.reading == Reading::Linear {
            return self.clone();
        }
        let n = self.values.len();
        let total = self.total();
        let mids: Vec<f64> = (0..n).map(|k| 0.5 * (self.breaks[k] + self.breaks[k + 1])).collect();
        if n == 1 {
            return MonotoneProfile {
                breaks: vec![0.0, total],
                values: vec![self.values[0]; 2],
                reading: Reading::Linear,
            };
        }
        let slope = |a: usize, b: usize| (self.values[b] - self.values[a]) / (mids[b] - mids[a]);
        let first = self.values[0] - slope(0, 1) * mids[0];
        let last = self.values[n - 1] + slope(n - 2, n - 1) * (total - mids[n - 1]);
        let mut knots = Vec::with_capacity(n + 2);
        let mut vals = Vec::with_capacity(n + 2);
        knots.push(0.0);
        vals.push(first);
        knots.extend_from_slice(&mids);
        vals.extend_from_slice(&self.values);
        knots.push(total);
        vals.push(last);
        MonotoneProfile { breaks: knots, values: vals, reading: Reading::Linear }
    }

    /// Largest relative increase of `s ↦ (1/s) ∫_0^s φ` between consecutive
    /// breakpoints (zero when the running mean is nonincreasing).
    pub fn running_mean_violation(&self) -> f64 {
        let mut worst = 0.0f64;
        let mut prim = 0.0;
        let mut prev: Option<f64> = None;
        for k in 0..self.pieces() {
            let (a, b) = (self.breaks[k], self.breaks[k + 1]);
            prim += match self.reading {
                Reading::Step => self.values[k] * (b - a),
                Reading::Linear => 0.5 * (self.values[k] + self.values[k + 1]) * (b - a),
            };
            if b > 0.0 {
                let mean = prim / b;
                if let Some(p) = prev {
                    worst = worst.max((mean - p) / p.abs().max(f64::MIN_POSITIVE));
                }
                prev = Some(mean);
            }
        }
        worst
    }

    /// Piecewise-linear profile through the means of `bins` consecutive
    /// groups of pieces of roughly equal measure, anchored at `s = 0` with
    /// `values[0]` and at `s = total` with `end_value`. Used to read slopes
    /// off a step profile whose individual steps are lattice noise.
    pub fn binned_linear(&self, bins: usize, end_value: f64) -> MonotoneProfile {
        let total = self.total();
        let n = self.pieces();
        let bins = bins.clamp(1, n.max(1));
        let mut knots = vec![0.0];
        let mut vals = vec![self.values[0].max(self.eval(0.0))];
        let mut k = 0;
        for b in 0..bins {
            let target = total * (b + 1) as f64 / bins as f64;
            let (mut mass, mut moment, mut integral) = (0.0, 0.0, 0.0);
            while k < n && (self.breaks[k] < target || mass == 0.0) {
                let (a, c) = (self.breaks[k], self.breaks[k + 1]);
                let w = c - a;
                let v = match self.reading {
                    Reading::Step => self.values[k],
                    Reading::Linear => 0.5 * (self.values[k] + self.values[k + 1]),
                };
                mass += w;
                moment += w * 0.5 * (a + c);
                integral += w * v;
                k += 1;
            }
            if mass > 0.0 {
                let s = moment / mass;
                let v = integral / mass;
                if s > *knots.last().unwrap() && s < total {
                    knots.push(s);
                    vals.push(v.min(*vals.last().unwrap()));
                }
            }
        }
        knots.push(total);
        vals.push(end_value.min(*vals.last().unwrap()));
        MonotoneProfile { breaks: knots, values: vals, reading: Reading::Linear }
    }

    /// Slopes of a linear profile, one per segment.
    pub fn slopes(&self) -> Vec<f64> {
        assert_eq!(self.reading, Reading::Linear, "slopes need the linear reading");
        self.breaks
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(s, v)| if s[1] > s[0] { (v[1] - v[0]) / (s[1] - s[0]) } else { 0.0 })
            .collect()
    }
}
