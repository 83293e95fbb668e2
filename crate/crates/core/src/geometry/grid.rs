use rayon::prelude::*;

use super::spec::DomainSpec;
use crate::error::{Error, Result};

const NONE: u32 = u32::MAX;

/// Neighbour directions in the order east, west, north, south.
pub const DIRS: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

/// A rasterized open set: cell mask on a uniform grid with a one-cell false
/// ring around it.
///
/// Besides the mask the domain remembers, for every link that leaves the set,
/// where along the link the boundary was crossed. Rasterization finds that
/// point by bisection on the analytic membership test; masks that come from
/// files have no such information and default to the midpoint.
#[derive(Clone, Debug)]
pub struct GridDomain {
    nx: usize,
    ny: usize,
    h: f64,
    origin: [f64; 2],
    mask: Vec<bool>,
    index: Vec<u32>,
    cells: Vec<u32>,
    // fraction along (i,j)->(i+1,j) resp. (i,j)->(i,j+1), measured from (i,j);
    // NaN where unknown
    cross_e: Vec<f64>,
    cross_n: Vec<f64>,
}

impl PartialEq for GridDomain {
    fn eq(&self, other: &Self) -> bool {
        self.same_frame(other) && self.mask == other.mask
    }
}

impl GridDomain {
    /// Builds a domain from a row-major mask (`mask[j * nx + i]`).
    pub fn from_mask(nx: usize, ny: usize, h: f64, origin: [f64; 2], mask: Vec<bool>) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidArgument(format!("grid spacing must be positive, got {h}")));
        }
        if mask.len() != nx * ny {
            return Err(Error::Domain(format!("mask has {} entries, expected {}x{}", mask.len(), nx, ny)));
        }
        if nx < 3 || ny < 3 {
            return Err(Error::Domain("grid must be at least 3x3 to carry a padding ring".into()));
        }
        for i in 0..nx {
            if mask[i] || mask[(ny - 1) * nx + i] {
                return Err(Error::Domain("mask touches the bottom or top frame row".into()));
            }
        }
        for j in 0..ny {
            if mask[j * nx] || mask[j * nx + nx - 1] {
                return Err(Error::Domain("mask touches the left or right frame column".into()));
            }
        }
        let mut index = vec![NONE; nx * ny];
        let mut cells = Vec::new();
        for (k, &m) in mask.iter().enumerate() {
            if m {
                index[k] = cells.len() as u32;
                cells.push(k as u32);
            }
        }
        if cells.is_empty() {
            return Err(Error::EmptyRasterization { h });
        }
        Ok(GridDomain {
            nx,
            ny,
            h,
            origin,
            mask,
            index,
            cells,
            cross_e: vec![f64::NAN; nx * ny],
            cross_n: vec![f64::NAN; nx * ny],
        })
    }

    /// Cell `(i, j)` is inside iff its centre lies in the set. Boundary
    /// crossings on links leaving the set are located by bisection.
    pub fn rasterize(spec: &DomainSpec, h: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidArgument(format!("grid spacing must be positive, got {h}")));
        }
        spec.validate()?;
        let bb = spec.bounding_box();
        let i0 = (bb[0] / h).floor() - 1.0;
        let j0 = (bb[1] / h).floor() - 1.0;
        let nx = ((bb[2] / h).ceil() - i0 + 2.0) as usize;
        let ny = ((bb[3] / h).ceil() - j0 + 2.0) as usize;
        if nx.saturating_mul(ny) > 400_000_000 {
            return Err(Error::InvalidArgument(format!("grid {nx}x{ny} is too large")));
        }
        let origin = [i0 * h, j0 * h];
        let center = |i: usize, j: usize| [origin[0] + (i as f64 + 0.5) * h, origin[1] + (j as f64 + 0.5) * h];
        let mut mask = vec![false; nx * ny];
        mask.par_chunks_mut(nx).enumerate().for_each(|(j, row)| {
            if j == 0 || j == ny - 1 {
                return;
            }
            for (i, m) in row.iter_mut().enumerate().take(nx - 1).skip(1) {
                *m = spec.contains(center(i, j));
            }
        });
        if !mask.iter().any(|&m| m) {
            return Err(Error::EmptyRasterization { h });
        }
        let mut d = GridDomain::from_mask(nx, ny, h, origin, mask)?;
        let bisect = |a: [f64; 2], b: [f64; 2], a_in: bool| -> f64 {
            // returns the crossing as a fraction from a towards b
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            for _ in 0..54 {
                let mid = 0.5 * (lo + hi);
                let p = [a[0] + mid * (b[0] - a[0]), a[1] + mid * (b[1] - a[1])];
                if spec.contains(p) == a_in {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let mask = &d.mask;
        let (cross_e, cross_n): (Vec<f64>, Vec<f64>) = (0..nx * ny)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k % nx, k / nx);
                let e = if i + 1 < nx && mask[k] != mask[k + 1] {
                    bisect(center(i, j), center(i + 1, j), mask[k])
                } else {
                    f64::NAN
                };
                let n = if j + 1 < ny && mask[k] != mask[k + nx] {
                    bisect(center(i, j), center(i, j + 1), mask[k])
                } else {
                    f64::NAN
                };
                (e, n)
            })
            .unzip();
        d.cross_e = cross_e;
        d.cross_n = cross_n;
        Ok(d)
    }

    /// A subdomain keeping the active cells flagged in `keep` (indexed by
    /// active cell). `crossing(from, to)` gives, for an active kept cell
    /// `from` and a frame neighbour `to` that is not kept, the fraction of the
    /// link at which the boundary of the subset is met (both frame indices).
    pub fn restrict<F>(&self, keep: &[bool], crossing: F) -> Result<Self>
    where
        F: Fn(usize, usize) -> f64,
    {
        assert_eq!(keep.len(), self.len());
        let mut mask = vec![false; self.nx * self.ny];
        for (a, &k) in keep.iter().enumerate() {
            if k {
                mask[self.cells[a] as usize] = true;
            }
        }
        let mut d = GridDomain::from_mask(self.nx, self.ny, self.h, self.origin, mask)?;
        let nx = self.nx;
        for k in 0..nx * self.ny {
            let (i, j) = (k % nx, k / nx);
            if i + 1 < nx && d.mask[k] != d.mask[k + 1] {
                d.cross_e[k] = if d.mask[k] { crossing(k, k + 1) } else { 1.0 - crossing(k + 1, k) };
            }
            if j + 1 < self.ny && d.mask[k] != d.mask[k + nx] {
                d.cross_n[k] = if d.mask[k] { crossing(k, k + nx) } else { 1.0 - crossing(k + nx, k) };
            }
        }
        Ok(d)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    /// Row-major mask over the whole frame.
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Number of true cells.
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Frame indices of the true cells, row-major order.
    pub fn cells(&self) -> &[u32] {
        &self.cells
    }

    pub fn cell_area(&self) -> f64 {
        self.h * self.h
    }

    /// `|Ω| = count · h²`.
    pub fn measure(&self) -> f64 {
        self.cells.len() as f64 * self.cell_area()
    }

    #[inline]
    pub fn is_inside(&self, i: i64, j: i64) -> bool {
        i >= 0 && j >= 0 && (i as usize) < self.nx && (j as usize) < self.ny && self.mask[j as usize * self.nx + i as usize]
    }

    /// Active index of frame cell `(i, j)`, if inside.
    #[inline]
    pub fn active_index(&self, i: i64, j: i64) -> Option<usize> {
        if i < 0 || j < 0 || i as usize >= self.nx || j as usize >= self.ny {
            return None;
        }
        let v = self.index[j as usize * self.nx + i as usize];
        (v != NONE).then_some(v as usize)
    }

    /// Active index of a frame index.
    #[inline]
    pub fn active_of_frame(&self, k: usize) -> Option<usize> {
        let v = self.index[k];
        (v != NONE).then_some(v as usize)
    }

    /// Frame coordinates `(i, j)` of active cell `a`.
    #[inline]
    pub fn cell_ij(&self, a: usize) -> (usize, usize) {
        let k = self.cells[a] as usize;
        (k % self.nx, k / self.nx)
    }

    /// Centre of frame cell `(i, j)`; valid for lattice cells outside the frame too.
    #[inline]
    pub fn center(&self, i: i64, j: i64) -> [f64; 2] {
        [self.origin[0] + (i as f64 + 0.5) * self.h, self.origin[1] + (j as f64 + 0.5) * self.h]
    }

    /// Centre of active cell `a`.
    #[inline]
    pub fn cell_center(&self, a: usize) -> [f64; 2] {
        let (i, j) = self.cell_ij(a);
        self.center(i as i64, j as i64)
    }

    /// For an active cell and one of the four [`DIRS`], the distance to the
    /// boundary as a fraction of `h`, provided the neighbour is outside.
    /// Unknown crossings default to `1/2`.
    pub fn boundary_fraction(&self, a: usize, dir: usize) -> f64 {
        let k = self.cells[a] as usize;
        let raw = match dir {
            0 => self.cross_e[k],
            1 => 1.0 - self.cross_e[k - 1],
            2 => self.cross_n[k],
            3 => 1.0 - self.cross_n[k - self.nx],
            _ => panic!("direction out of range"),
        };
        if raw.is_finite() {
            raw
        } else {
            0.5
        }
    }

    /// Raw crossing fraction on the east link of frame cell `k`, measured
    /// from `k`; `None` if the link does not cross the boundary.
    pub fn crossing_east(&self, k: usize) -> Option<f64> {
        let i = k % self.nx;
        (i + 1 < self.nx && self.mask[k] != self.mask[k + 1])
            .then(|| if self.cross_e[k].is_finite() { self.cross_e[k] } else { 0.5 })
    }

    /// Same as [`Self::crossing_east`] for the north link.
    pub fn crossing_north(&self, k: usize) -> Option<f64> {
        let j = k / self.nx;
        (j + 1 < self.ny && self.mask[k] != self.mask[k + self.nx])
            .then(|| if self.cross_n[k].is_finite() { self.cross_n[k] } else { 0.5 })
    }

    /// The image under `x ↦ b x`: same mask and crossing fractions, spacing
    /// and origin multiplied by `b`.
    pub fn scaled(&self, b: f64) -> Result<Self> {
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::InvalidArgument(format!("scale factor must be positive, got {b}")));
        }
        Ok(GridDomain { h: self.h * b, origin: [self.origin[0] * b, self.origin[1] * b], ..self.clone() })
    }

    /// Same grid (size, spacing and origin); masks may differ.
    pub fn same_frame(&self, other: &GridDomain) -> bool {
        self.nx == other.nx && self.ny == other.ny && self.h == other.h && self.origin == other.origin
    }

    /// Bounding box of the active cell centres `[xmin, ymin, xmax, ymax]`.
    pub fn active_bounding_box(&self) -> [f64; 4] {
        let mut b = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
        for a in 0..self.len() {
            let c = self.cell_center(a);
            b[0] = b[0].min(c[0]);
            b[1] = b[1].min(c[1]);
            b[2] = b[2].max(c[0]);
            b[3] = b[3].max(c[1]);
        }
        b
    }

    /// Centroid of the active cells.
    pub fn centroid(&self) -> [f64; 2] {
        let mut s = [0.0, 0.0];
        for a in 0..self.len() {
            let c = self.cell_center(a);
            s[0] += c[0];
            s[1] += c[1];
        }
        let n = self.len() as f64;
        [s[0] / n, s[1] / n]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn coarse_disk_count() {
        let d = GridDomain::rasterize(&DomainSpec::disk([0.0, 0.0], 1.0), 0.5).unwrap();
        // centres (±0.25, ±0.25), (±0.75, ±0.25), (±0.25, ±0.75) lie inside; (±0.75, ±0.75) do not
        assert_eq!(d.len(), 12);
        assert!((d.measure() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn square_quarter_grid() {
        let d = GridDomain::rasterize(&DomainSpec::rectangle(0.0, 0.0, 1.0, 1.0), 0.25).unwrap();
        assert_eq!(d.len(), 16);
    }

    #[test]
    fn padding_ring_is_false() {
        let d = GridDomain::rasterize(&DomainSpec::disk([0.3, -0.2], 0.7), 0.05).unwrap();
        let (nx, ny) = (d.nx(), d.ny());
        for i in 0..nx {
            assert!(!d.mask()[i] && !d.mask()[(ny - 1) * nx + i]);
        }
        for j in 0..ny {
            assert!(!d.mask()[j * nx] && !d.mask()[j * nx + nx - 1]);
        }
    }

    #[test]
    fn empty_rasterization_is_an_error() {
        let spec = DomainSpec::Difference {
            base: Box::new(DomainSpec::disk([0.0, 0.0], 1.0)),
            minus: Box::new(DomainSpec::disk([0.0, 0.0], 2.0)),
        };
        assert!(matches!(GridDomain::rasterize(&spec, 0.1), Err(Error::EmptyRasterization { .. })));
        // a tiny disk between cell centres
        let tiny = DomainSpec::disk([0.0, 0.0], 0.01);
        assert!(GridDomain::rasterize(&tiny, 0.5).is_err());
    }

    #[test]
    fn disk_measure_converges() {
        let d = GridDomain::rasterize(&DomainSpec::disk([0.0, 0.0], 1.0), 1.0 / 256.0).unwrap();
        assert!((d.measure() - PI).abs() < 3.0 / 256.0);
        let two = DomainSpec::Union {
            parts: vec![DomainSpec::disk([-2.0, 0.0], 1.0), DomainSpec::disk([2.0, 0.0], 1.0)],
        };
        let d2 = GridDomain::rasterize(&two, 1.0 / 256.0).unwrap();
        assert!((d2.measure() - 2.0 * PI).abs() < 6.0 / 256.0);
    }

    #[test]
    fn boundary_fractions_match_circle() {
        let h = 1.0 / 32.0;
        let d = GridDomain::rasterize(&DomainSpec::disk([0.0, 0.0], 1.0), h).unwrap();
        for a in 0..d.len() {
            let (i, j) = d.cell_ij(a);
            let c = d.cell_center(a);
            for (dir, (di, dj)) in DIRS.iter().enumerate() {
                if !d.is_inside(i as i64 + di, j as i64 + dj) {
                    let t = d.boundary_fraction(a, dir);
                    let p = [c[0] + t * h * *di as f64, c[1] + t * h * *dj as f64];
                    assert!(t > 0.0 && t <= 1.0);
                    assert!(((p[0] * p[0] + p[1] * p[1]).sqrt() - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn file_masks_need_padding() {
        let mut mask = vec![false; 9];
        mask[4] = true;
        assert!(GridDomain::from_mask(3, 3, 1.0, [0.0, 0.0], mask.clone()).is_ok());
        mask[0] = true;
        assert!(GridDomain::from_mask(3, 3, 1.0, [0.0, 0.0], mask).is_err());
        assert!(GridDomain::from_mask(3, 3, 1.0, [0.0, 0.0], vec![false; 9]).is_err());
    }
}
