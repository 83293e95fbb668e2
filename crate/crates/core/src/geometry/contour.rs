//! Marching-squares contour of a cell mask.

use super::grid::GridDomain;

// Edges of a dual square: 0 bottom, 1 right, 2 top, 3 left.
// Corners: bit 0 = (i,j), 1 = (i+1,j), 2 = (i+1,j+1), 3 = (i,j+1).
// Saddles (5, 10) separate the two inside corners.
const SEGMENTS: [&[(u8, u8)]; 16] = [
    &[],
    &[(3, 0)],
    &[(0, 1)],
    &[(3, 1)],
    &[(1, 2)],
    &[(3, 0), (1, 2)],
    &[(0, 2)],
    &[(3, 2)],
    &[(2, 3)],
    &[(0, 2)],
    &[(0, 1), (2, 3)],
    &[(1, 2)],
    &[(1, 3)],
    &[(0, 1)],
    &[(3, 0)],
    &[],
];

/// Length of the marching-squares contour of the mask.
///
/// Edge crossings sit where the boundary was located during rasterization;
/// for masks without that information this reduces to interpolating the
/// indicator at the value 1/2.
pub fn contour_length(d: &GridDomain) -> f64 {
    let (nx, ny, h) = (d.nx(), d.ny(), d.h());
    let mask = d.mask();
    let mut total = 0.0;
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let k = j * nx + i;
            let case = mask[k] as usize
                | (mask[k + 1] as usize) << 1
                | (mask[k + 1 + nx] as usize) << 2
                | (mask[k + nx] as usize) << 3;
            if case == 0 || case == 15 {
                continue;
            }
            // local coordinates in units of h, origin at the centre of (i,j)
            let point = |edge: u8| -> (f64, f64) {
                match edge {
                    0 => (d.crossing_east(k).unwrap_or(0.5), 0.0),
                    1 => (1.0, d.crossing_north(k + 1).unwrap_or(0.5)),
                    2 => (d.crossing_east(k + nx).unwrap_or(0.5), 1.0),
                    _ => (0.0, d.crossing_north(k).unwrap_or(0.5)),
                }
            };
            for &(a, b) in SEGMENTS[case] {
                let (pa, pb) = (point(a), point(b));
                total += ((pa.0 - pb.0).powi(2) + (pa.1 - pb.1).powi(2)).sqrt();
            }
        }
    }
    total * h
}
