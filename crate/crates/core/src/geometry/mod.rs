//! Planar domains: analytic specs, rasterized grids and the set functionals
//! (measure, perimeter, asymmetry) computed on them.

mod asymmetry;
mod contour;
mod grid;
mod spec;

pub use asymmetry::{
    ball_counts, ball_same_measure, fraenkel_asymmetry, fraenkel_asymmetry_exhaustive, symmetric_difference_measure,
    Asymmetry, MaskRows,
};
pub use grid::{GridDomain, DIRS};
pub use spec::{BallSpec, DomainSpec};

use crate::error::Result;
use crate::numerics::omega;

pub fn rasterize(spec: &DomainSpec, h: f64) -> Result<GridDomain> {
    GridDomain::rasterize(spec, h)
}

pub fn measure(d: &GridDomain) -> f64 {
    d.measure()
}

/// Marching-squares contour length of the mask.
pub fn perimeter(d: &GridDomain) -> f64 {
    contour::contour_length(d)
}

/// `P(Ω) / (n ω_n^{1/n} |Ω|^{(n−1)/n}) − 1` with `n = 2`.
pub fn isoperimetric_deficit(d: &GridDomain) -> f64 {
    let n = 2.0;
    perimeter(d) / (n * omega(2).powf(1.0 / n) * d.measure().powf((n - 1.0) / n)) - 1.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn disk_in_strip(r: f64, a: f64) -> f64 {
        // area of {|y| < a} ∩ B_r(0) for a < r
        2.0 * (a * (r * r - a * a).sqrt() + r * r * (a / r).asin())
    }

    #[test]
    fn perimeter_of_disk_and_square() {
        let h = 1.0 / 256.0;
        let disk = rasterize(&DomainSpec::disk([0.0, 0.0], 1.0), h).unwrap();
        assert!((perimeter(&disk) / (2.0 * PI) - 1.0).abs() < 0.02);
        let sq = rasterize(&DomainSpec::rectangle(0.0, 0.0, 1.0, 1.0), h).unwrap();
        assert!((perimeter(&sq) / 4.0 - 1.0).abs() < 0.02);
        assert!(isoperimetric_deficit(&disk).abs() < 0.02);
        let expected = 4.0 / (2.0 * PI.sqrt()) - 1.0;
        assert!((isoperimetric_deficit(&sq) - expected).abs() < 0.02 * expected.max(1.0));
    }

    #[test]
    fn single_cell_perimeter() {
        let mut mask = vec![false; 9];
        mask[4] = true;
        let d = GridDomain::from_mask(3, 3, 0.1, [0.0, 0.0], mask).unwrap();
        assert!((perimeter(&d) - 2.0 * 2f64.sqrt() * 0.1).abs() < 1e-15);
    }

    #[test]
    fn ball_radius() {
        let mut mask = vec![false; 25];
        for j in 1..4 {
            for i in 1..4 {
                mask[j * 5 + i] = true;
            }
        }
        let d = GridDomain::from_mask(5, 5, (PI / 9.0).sqrt(), [0.0, 0.0], mask).unwrap();
        assert!((ball_same_measure(&d, [0.0, 0.0]).radius - 1.0).abs() < 1e-14);
        let h = 1.0 / 256.0;
        let disk = rasterize(&DomainSpec::disk([0.0, 0.0], 1.0), h).unwrap();
        assert!((ball_same_measure(&disk, [0.0, 0.0]).radius - 1.0).abs() < 2.0 * h);
    }

    #[test]
    fn symmetric_difference_identities() {
        let h = 1.0 / 64.0;
        let b = BallSpec::new([0.1, 0.2], 0.8).unwrap();
        let d = rasterize(&DomainSpec::disk(b.center, b.radius), h).unwrap();
        assert_eq!(symmetric_difference_measure(&d, &b), 0.0);
        let far = BallSpec::new([10.0, 0.0], 0.8).unwrap();
        let far_cells = rasterize(&DomainSpec::disk(far.center, far.radius), h).unwrap();
        let sd = symmetric_difference_measure(&d, &far);
        assert!((sd - (d.measure() + far_cells.measure())).abs() < 1e-12);
    }

    #[test]
    fn shifted_disk_lens() {
        let h = 1.0 / 512.0;
        let d = rasterize(&DomainSpec::disk([0.0, 0.0], 1.0), h).unwrap();
        let b = BallSpec::new([0.5, 0.0], 1.0).unwrap();
        // lens of two unit disks at distance 1/2
        let dist: f64 = 0.5;
        let lens = 2.0 * (dist / 2.0).acos() - 0.5 * dist * (4.0 - dist * dist).sqrt();
        let expected = 2.0 * (PI - lens);
        assert!((symmetric_difference_measure(&d, &b) - expected).abs() < 20.0 * h);
    }

    #[test]
    fn asymmetry_of_ball_is_small() {
        let h = 1.0 / 128.0;
        let d = rasterize(&DomainSpec::disk([0.3, -0.1], 1.0), h).unwrap();
        let a = fraenkel_asymmetry(&d);
        assert!(a.alpha < 4.0 * h, "alpha = {}", a.alpha);
        assert!((a.center[0] - 0.3).abs() < 2.0 * h && (a.center[1] + 0.1).abs() < 2.0 * h);
    }

    #[test]
    fn asymmetry_of_rectangle_matches_analytic() {
        let h = 1.0 / 256.0;
        let d = rasterize(&DomainSpec::centered_rectangle(2.0, 0.5), h).unwrap();
        let r = (1.0 / PI).sqrt();
        let expected = 2.0 - 2.0 * disk_in_strip(r, 0.25);
        let a = fraenkel_asymmetry(&d);
        assert!((a.alpha - expected).abs() < 5.0 * h, "{} vs {}", a.alpha, expected);
        assert!(a.alpha >= 0.0 && a.alpha < 2.0);
    }

    #[test]
    fn asymmetry_of_square_matches_analytic() {
        let h = 1.0 / 256.0;
        let d = rasterize(&DomainSpec::rectangle(0.0, 0.0, 1.0, 1.0), h).unwrap();
        let r = (1.0 / PI).sqrt();
        let seg = r * r * (0.5 / r).acos() - 0.5 * (r * r - 0.25).sqrt();
        let expected = 2.0 * 4.0 * seg;
        let a = fraenkel_asymmetry(&d);
        assert!((a.alpha - expected).abs() < 5.0 * h, "{} vs {}", a.alpha, expected);
    }

    #[test]
    fn separated_disks_have_asymmetry_one() {
        let h = 1.0 / 128.0;
        let spec = DomainSpec::Union {
            parts: vec![DomainSpec::disk([-3.0, 0.0], 1.0), DomainSpec::disk([3.0, 0.0], 1.0)],
        };
        let d = rasterize(&spec, h).unwrap();
        let a = fraenkel_asymmetry(&d);
        assert!((a.alpha - 1.0).abs() < 5.0 * h, "alpha = {}", a.alpha);
    }

    #[test]
    fn search_agrees_with_exhaustive_scan() {
        let h = 1.0 / 32.0;
        let l = DomainSpec::Polygon {
            vertices: vec![[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0], [1.0, 2.0], [0.0, 2.0]],
        };
        for spec in [l, DomainSpec::centered_rectangle(2.0, 0.5)] {
            let d = rasterize(&spec, h).unwrap();
            let fast = fraenkel_asymmetry(&d);
            let slow = fraenkel_asymmetry_exhaustive(&d, 0.5 * h);
            assert!(fast.alpha >= slow.alpha - 1e-12);
            assert!(fast.alpha <= slow.alpha + 2.0 * h, "{} vs {}", fast.alpha, slow.alpha);
        }
    }

    #[test]
    fn asymmetry_is_translation_and_scale_invariant() {
        let h = 1.0 / 128.0;
        let base = fraenkel_asymmetry(&rasterize(&DomainSpec::centered_rectangle(2.0, 0.5), h).unwrap()).alpha;
        let moved = fraenkel_asymmetry(&rasterize(&DomainSpec::rectangle(3.1, -1.7, 7.1, -0.7), h).unwrap()).alpha;
        assert!((base - moved).abs() < 4.0 * h);
    }
}
