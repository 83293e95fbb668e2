//! Symmetric differences with balls and the Fraenkel asymmetry search.

use rayon::prelude::*;
use serde::Serialize;

use super::grid::GridDomain;
use super::spec::BallSpec;

/// Per-row prefix counts of the mask, for O(rows) ball intersections.
pub struct MaskRows {
    nx: usize,
    ny: usize,
    prefix: Vec<u32>,
}

impl MaskRows {
    pub fn new(d: &GridDomain) -> Self {
        let (nx, ny) = (d.nx(), d.ny());
        let mut prefix = vec![0u32; (nx + 1) * ny];
        for j in 0..ny {
            let row = &d.mask()[j * nx..(j + 1) * nx];
            let p = &mut prefix[j * (nx + 1)..(j + 1) * (nx + 1)];
            for i in 0..nx {
                p[i + 1] = p[i] + row[i] as u32;
            }
        }
        MaskRows { nx, ny, prefix }
    }

    fn count(&self, j: i64, i_lo: i64, i_hi: i64) -> u64 {
        if j < 0 || j as usize >= self.ny {
            return 0;
        }
        let lo = i_lo.max(0);
        let hi = i_hi.min(self.nx as i64 - 1);
        if lo > hi {
            return 0;
        }
        let base = j as usize * (self.nx + 1);
        (self.prefix[base + hi as usize + 1] - self.prefix[base + lo as usize]) as u64
    }
}

/// Lattice cells of the ball (counted on the infinite grid extending the
/// frame) and how many of them are inside the mask.
pub fn ball_counts(d: &GridDomain, rows: &MaskRows, b: &BallSpec) -> (u64, u64) {
    let h = d.h();
    let o = d.origin();
    let (cx, cy, r) = (b.center[0], b.center[1], b.radius);
    let j_lo = ((cy - r - o[1]) / h - 0.5).floor() as i64 - 1;
    let j_hi = ((cy + r - o[1]) / h - 0.5).ceil() as i64 + 1;
    let (mut total, mut inter) = (0u64, 0u64);
    for j in j_lo..=j_hi {
        let y = d.center(0, j)[1];
        let dy = y - cy;
        let w2 = r * r - dy * dy;
        if w2 <= 0.0 {
            continue;
        }
        let w = w2.sqrt();
        let mut i_lo = ((cx - w - o[0]) / h - 0.5).floor() as i64 - 1;
        let mut i_hi = ((cx + w - o[0]) / h - 0.5).ceil() as i64 + 1;
        // settle the ends with the exact membership test used by rasterize
        while i_lo <= i_hi && !b.contains(d.center(i_lo, j)) {
            i_lo += 1;
        }
        while i_hi >= i_lo && !b.contains(d.center(i_hi, j)) {
            i_hi -= 1;
        }
        if i_lo > i_hi {
            continue;
        }
        total += (i_hi - i_lo + 1) as u64;
        inter += rows.count(j, i_lo, i_hi);
    }
    (total, inter)
}

/// `|Ω Δ B|` at cell level: `|Ω| + |B| − 2|Ω ∩ B|` with the ball rasterized on
/// the same lattice.
pub fn symmetric_difference_measure(d: &GridDomain, b: &BallSpec) -> f64 {
    let rows = MaskRows::new(d);
    symmetric_difference_cells(d, &rows, b) as f64 * d.cell_area()
}

fn symmetric_difference_cells(d: &GridDomain, rows: &MaskRows, b: &BallSpec) -> u64 {
    let (ball, inter) = ball_counts(d, rows, b);
    d.len() as u64 + ball - 2 * inter
}

/// Ball centred at `center` with `|B| = |Ω|`.
pub fn ball_same_measure(d: &GridDomain, center: [f64; 2]) -> BallSpec {
    BallSpec { center, radius: (d.measure() / std::f64::consts::PI).sqrt() }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Asymmetry {
    /// `min_x |Ω Δ B_r(x)| / |Ω|`.
    pub alpha: f64,
    /// Optimal centre found by the search.
    pub center: [f64; 2],
    /// `|Ω Δ B|` at the optimal centre.
    pub symmetric_difference: f64,
}

// Ordering used for the deterministic min-reduction: value, then x, then y.
fn better(a: (u64, [f64; 2]), b: (u64, [f64; 2])) -> (u64, [f64; 2]) {
    let key = |t: &(u64, [f64; 2])| (t.0, t.1[0], t.1[1]);
    let (ka, kb) = (key(&a), key(&b));
    if ka.0 < kb.0 || (ka.0 == kb.0 && (ka.1 < kb.1 || (ka.1 == kb.1 && ka.2 <= kb.2))) {
        a
    } else {
        b
    }
}

fn best_of(d: &GridDomain, rows: &MaskRows, r: f64, centers: Vec<[f64; 2]>) -> (u64, [f64; 2]) {
    centers
        .into_par_iter()
        .map(|c| (symmetric_difference_cells(d, rows, &BallSpec { center: c, radius: r }), c))
        .reduce(|| (u64::MAX, [f64::INFINITY, f64::INFINITY]), better)
}

/// Fraenkel asymmetry by a coarse grid of centres (step `4h`) over the
/// bounding box, followed by refinement at step `h/2` in a `±4h` window.
/// The window is re-centred while the optimum sits on its edge.
pub fn fraenkel_asymmetry(d: &GridDomain) -> Asymmetry {
    let h = d.h();
    let rows = MaskRows::new(d);
    let r = ball_same_measure(d, [0.0, 0.0]).radius;
    let bb = d.active_bounding_box();
    let step = 4.0 * h;
    let kx = ((bb[2] - bb[0]) / step).ceil() as usize;
    let ky = ((bb[3] - bb[1]) / step).ceil() as usize;
    let mut coarse = Vec::with_capacity((kx + 1) * (ky + 1));
    for a in 0..=kx {
        for b in 0..=ky {
            coarse.push([bb[0] + a as f64 * step, bb[1] + b as f64 * step]);
        }
    }
    let mut best = best_of(d, &rows, r, coarse);
    let fine = 0.5 * h;
    for _ in 0..16 {
        let c0 = best.1;
        let mut window = Vec::with_capacity(17 * 17);
        for a in -8i32..=8 {
            for b in -8i32..=8 {
                window.push([c0[0] + a as f64 * fine, c0[1] + b as f64 * fine]);
            }
        }
        let cand = best_of(d, &rows, r, window);
        best = better(best, cand);
        let on_edge = ((best.1[0] - c0[0]).abs() - 8.0 * fine).abs() < 1e-9 * h
            || ((best.1[1] - c0[1]).abs() - 8.0 * fine).abs() < 1e-9 * h;
        if !on_edge || best.1 == c0 {
            break;
        }
    }
    let sd = best.0 as f64 * d.cell_area();
    Asymmetry { alpha: sd / d.measure(), center: best.1, symmetric_difference: sd }
}

/// Exhaustive search over all centres of a lattice with the given step
/// covering the bounding box. Slow; meant for verification.
pub fn fraenkel_asymmetry_exhaustive(d: &GridDomain, step: f64) -> Asymmetry {
    let rows = MaskRows::new(d);
    let r = ball_same_measure(d, [0.0, 0.0]).radius;
    let bb = d.active_bounding_box();
    let kx = ((bb[2] - bb[0]) / step).ceil() as usize;
    let ky = ((bb[3] - bb[1]) / step).ceil() as usize;
    let mut centers = Vec::new();
    for a in 0..=kx {
        for b in 0..=ky {
            centers.push([bb[0] + a as f64 * step, bb[1] + b as f64 * step]);
        }
    }
    let best = best_of(d, &rows, r, centers);
    let sd = best.0 as f64 * d.cell_area();
    Asymmetry { alpha: sd / d.measure(), center: best.1, symmetric_difference: sd }
}
