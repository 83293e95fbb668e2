//! The shared test corpus: six domains and three kinds of source.
#![allow(dead_code)]

use std::sync::Arc;

use schwarz_stab::audit::Instance;
use schwarz_stab::{DomainSpec, GridDomain, ScalarField};

pub struct Case {
    pub id: String,
    pub domain: DomainSpec,
    pub source: Source,
}

#[derive(Clone, Copy, Debug)]
pub enum Source {
    One,
    OnePlusXSquared,
    /// `1 + σ⁻¹ χ_{B_σ(c)}`.
    Bump { sigma: f64, center: [f64; 2] },
    /// `2 − |x|²`, radially decreasing about the origin.
    RadialDecreasing,
}

impl Source {
    pub fn eval(&self, x: [f64; 2]) -> f64 {
        match *self {
            Source::One => 1.0,
            Source::OnePlusXSquared => 1.0 + x[0] * x[0],
            Source::Bump { sigma, center } => {
                let r2 = (x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2);
                1.0 + if r2 < sigma * sigma { 1.0 / sigma } else { 0.0 }
            }
            Source::RadialDecreasing => 2.0 - x[0] * x[0] - x[1] * x[1],
        }
    }
}

pub fn l_shape() -> DomainSpec {
    DomainSpec::Polygon { vertices: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 0.5], [0.5, 0.5], [0.5, 1.0], [0.0, 1.0]] }
}

pub fn two_disks() -> DomainSpec {
    DomainSpec::Union { parts: vec![DomainSpec::disk([-0.4, 0.0], 0.5), DomainSpec::disk([0.4, 0.0], 0.5)] }
}

/// Domains with an interior point for the bump.
pub fn domains() -> Vec<(&'static str, DomainSpec, [f64; 2])> {
    vec![
        ("disk", DomainSpec::disk([0.0, 0.0], 1.0), [0.5, 0.0]),
        ("square", DomainSpec::rectangle(0.0, 0.0, 1.0, 1.0), [0.3, 0.6]),
        ("rect2x05", DomainSpec::rectangle(0.0, 0.0, 2.0, 0.5), [1.5, 0.25]),
        ("rect4x1", DomainSpec::rectangle(0.0, 0.0, 4.0, 1.0), [1.0, 0.5]),
        ("lshape", l_shape(), [0.25, 0.25]),
        ("twodisks", two_disks(), [0.5, 0.0]),
    ]
}

/// Twenty instances: every domain with `f = 1`, `1 + x²` and a bump of
/// width `0.1`, plus two radially symmetric sources on the disk.
pub fn corpus() -> Vec<Case> {
    let mut out = Vec::new();
    for (name, domain, c) in domains() {
        for (tag, source) in [
            ("one", Source::One),
            ("x2", Source::OnePlusXSquared),
            ("bump", Source::Bump { sigma: 0.1, center: c }),
        ] {
            out.push(Case { id: format!("{name}_{tag}"), domain: domain.clone(), source });
        }
    }
    out.push(Case { id: "disk_radial".into(), domain: DomainSpec::disk([0.0, 0.0], 1.0), source: Source::RadialDecreasing });
    out.push(Case {
        id: "disk_centered_bump".into(),
        domain: DomainSpec::disk([0.0, 0.0], 1.0),
        source: Source::Bump { sigma: 0.1, center: [0.0, 0.0] },
    });
    out
}

pub fn source_field(case: &Case, h: f64) -> ScalarField {
    let d = Arc::new(GridDomain::rasterize(&case.domain, h).unwrap());
    let s = case.source;
    ScalarField::from_fn(d, move |x| s.eval(x)).unwrap()
}

pub fn solve(case: &Case, h: f64) -> Instance {
    Instance::solve(source_field(case, h)).unwrap()
}

/// The rigidity instance: the unit disk with `f ≡ 1`.
pub fn rigid(h: f64) -> Instance {
    let d = Arc::new(GridDomain::rasterize(&DomainSpec::disk([0.0, 0.0], 1.0), h).unwrap());
    Instance::solve(ScalarField::constant(d, 1.0).unwrap()).unwrap()
}
