use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A planar open set described analytically.
///
/// JSON form is tagged by `"shape"`:
///
/// ```json
/// {"shape": "disk", "center": [0, 0], "radius": 1}
/// {"shape": "polygon", "vertices": [[0,0], [1,0], [1,1], [0,1]]}
/// {"shape": "union", "parts": [ ... ]}
/// {"shape": "difference", "base": { ... }, "minus": { ... }}
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum DomainSpec {
    Disk { center: [f64; 2], radius: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
    Union { parts: Vec<DomainSpec> },
    Difference { base: Box<DomainSpec>, minus: Box<DomainSpec> },
}

/// A ball `B_r(x)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallSpec {
    pub center: [f64; 2],
    pub radius: f64,
}

impl BallSpec {
    pub fn new(center: [f64; 2], radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() || !center.iter().all(|c| c.is_finite()) {
            return Err(Error::Domain(format!("ball radius must be positive, got {radius}")));
        }
        Ok(BallSpec { center, radius })
    }

    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.radius * self.radius
    }

    #[inline]
    pub fn contains(&self, p: [f64; 2]) -> bool {
        let dx = p[0] - self.center[0];
        let dy = p[1] - self.center[1];
        dx * dx + dy * dy < self.radius * self.radius
    }
}

impl DomainSpec {
    pub fn disk(center: [f64; 2], radius: f64) -> Self {
        DomainSpec::Disk { center, radius }
    }

    /// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        DomainSpec::Polygon { vertices: vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]] }
    }

    /// Rectangle of the given width and height centred at the origin.
    pub fn centered_rectangle(width: f64, height: f64) -> Self {
        Self::rectangle(-0.5 * width, -0.5 * height, 0.5 * width, 0.5 * height)
    }

    /// Checks boundedness, positive radii and simplicity of polygons.
    pub fn validate(&self) -> Result<()> {
        match self {
            DomainSpec::Disk { center, radius } => {
                BallSpec::new(*center, *radius)?;
            }
            DomainSpec::Polygon { vertices } => validate_polygon(vertices)?,
            DomainSpec::Union { parts } => {
                if parts.is_empty() {
                    return Err(Error::Domain("union of no parts".into()));
                }
                for p in parts {
                    p.validate()?;
                }
            }
            DomainSpec::Difference { base, minus } => {
                base.validate()?;
                minus.validate()?;
            }
        }
        Ok(())
    }

    /// Membership of a point in the (open) set.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        match self {
            DomainSpec::Disk { center, radius } => {
                let dx = p[0] - center[0];
                let dy = p[1] - center[1];
                dx * dx + dy * dy < radius * radius
            }
            DomainSpec::Polygon { vertices } => polygon_contains(vertices, p),
            DomainSpec::Union { parts } => parts.iter().any(|s| s.contains(p)),
            DomainSpec::Difference { base, minus } => base.contains(p) && !minus.contains(p),
        }
    }

    /// Bounding box `[xmin, ymin, xmax, ymax]`.
    pub fn bounding_box(&self) -> [f64; 4] {
        match self {
            DomainSpec::Disk { center, radius } => [
                center[0] - radius,
                center[1] - radius,
                center[0] + radius,
                center[1] + radius,
            ],
            DomainSpec::Polygon { vertices } => {
                let mut b = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
                for v in vertices {
                    b[0] = b[0].min(v[0]);
                    b[1] = b[1].min(v[1]);
                    b[2] = b[2].max(v[0]);
                    b[3] = b[3].max(v[1]);
                }
                b
            }
            DomainSpec::Union { parts } => parts.iter().map(|p| p.bounding_box()).fold(
                [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY],
                |a, b| [a[0].min(b[0]), a[1].min(b[1]), a[2].max(b[2]), a[3].max(b[3])],
            ),
            DomainSpec::Difference { base, .. } => base.bounding_box(),
        }
    }
}

fn polygon_contains(v: &[[f64; 2]], p: [f64; 2]) -> bool {
    let mut inside = false;
    let n = v.len();
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (v[i], v[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn on_segment(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> bool {
    q[0] >= p[0].min(r[0]) && q[0] <= p[0].max(r[0]) && q[1] >= p[1].min(r[1]) && q[1] <= p[1].max(r[1])
}

fn segments_intersect(p1: [f64; 2], p2: [f64; 2], p3: [f64; 2], p4: [f64; 2]) -> bool {
    let d1 = cross(p3, p4, p1);
    let d2 = cross(p3, p4, p2);
    let d3 = cross(p1, p2, p3);
    let d4 = cross(p1, p2, p4);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(p3, p1, p4))
        || (d2 == 0.0 && on_segment(p3, p2, p4))
        || (d3 == 0.0 && on_segment(p1, p3, p2))
        || (d4 == 0.0 && on_segment(p1, p4, p2))
}

fn validate_polygon(v: &[[f64; 2]]) -> Result<()> {
    if v.len() < 3 {
        return Err(Error::Domain(format!("polygon needs at least 3 vertices, got {}", v.len())));
    }
    if v.iter().flatten().any(|c| !c.is_finite()) {
        return Err(Error::Domain("polygon has non-finite coordinates".into()));
    }
    let n = v.len();
    let area2: f64 = (0..n).map(|i| cross([0.0, 0.0], v[i], v[(i + 1) % n])).sum();
    if area2.abs() == 0.0 {
        return Err(Error::Domain("polygon has zero area".into()));
    }
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        for j in (i + 1)..n {
            // neighbouring edges share a vertex by construction
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (c, d) = (v[j], v[(j + 1) % n]);
            if segments_intersect(a, b, c, d) {
                return Err(Error::Domain(format!("polygon edges {i} and {j} intersect")));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let spec = DomainSpec::Difference {
            base: Box::new(DomainSpec::rectangle(0.0, 0.0, 2.0, 2.0)),
            minus: Box::new(DomainSpec::Union { parts: vec![DomainSpec::disk([1.0, 1.0], 0.25)] }),
        };
        let text = serde_json::to_string(&spec).unwrap();
        let back: DomainSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(spec, back);
        let disk: DomainSpec = serde_json::from_str(r#"{"shape":"disk","center":[0,0],"radius":1}"#).unwrap();
        assert_eq!(disk, DomainSpec::disk([0.0, 0.0], 1.0));
    }

    #[test]
    fn bowtie_is_rejected() {
        let bowtie = DomainSpec::Polygon { vertices: vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]] };
        assert!(bowtie.validate().is_err());
        assert!(DomainSpec::rectangle(0.0, 0.0, 1.0, 1.0).validate().is_ok());
        assert!(DomainSpec::disk([0.0, 0.0], -1.0).validate().is_err());
    }

    #[test]
    fn membership() {
        let l = DomainSpec::Polygon {
            vertices: vec![[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0], [1.0, 2.0], [0.0, 2.0]],
        };
        assert!(l.contains([0.5, 1.5]));
        assert!(l.contains([1.5, 0.5]));
        assert!(!l.contains([1.5, 1.5]));
        let annulus = DomainSpec::Difference {
            base: Box::new(DomainSpec::disk([0.0, 0.0], 1.0)),
            minus: Box::new(DomainSpec::disk([0.0, 0.0], 0.5)),
        };
        assert!(annulus.contains([0.75, 0.0]));
        assert!(!annulus.contains([0.25, 0.0]));
    }
}
