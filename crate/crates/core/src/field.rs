//! Cell-centred scalar fields, their JSON specs and the grid CSV format.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::GridDomain;

/// Real values on the true cells of a [`GridDomain`], in active-cell order.
#[derive(Clone, Debug)]
pub struct ScalarField {
    domain: Arc<GridDomain>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(domain: Arc<GridDomain>, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::Field(format!("{} values for {} cells", values.len(), domain.len())));
        }
        if let Some(a) = values.iter().position(|v| !v.is_finite()) {
            let (i, j) = domain.cell_ij(a);
            return Err(Error::Field(format!("non-finite value at cell ({i}, {j})")));
        }
        Ok(ScalarField { domain, values })
    }

    /// Samples `f` at the cell centres.
    pub fn from_fn<F: Fn([f64; 2]) -> f64>(domain: Arc<GridDomain>, f: F) -> Result<Self> {
        let values = (0..domain.len()).map(|a| f(domain.cell_center(a))).collect();
        Self::new(domain, values)
    }

    pub fn constant(domain: Arc<GridDomain>, c: f64) -> Result<Self> {
        let n = domain.len();
        Self::new(domain, vec![c; n])
    }

    pub fn zeros(domain: Arc<GridDomain>) -> Self {
        let n = domain.len();
        ScalarField { domain, values: vec![0.0; n] }
    }

    pub fn domain(&self) -> &Arc<GridDomain> {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `max |u|`.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `∫ u = Σ u · h²`.
    pub fn integral(&self) -> f64 {
        crate::numerics::stable_sum(self.values.iter().copied()) * self.domain.cell_area()
    }

    /// Same frame and same mask.
    pub fn same_domain(&self, other: &ScalarField) -> bool {
        Arc::ptr_eq(&self.domain, &other.domain) || *self.domain == *other.domain
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Result<ScalarField> {
        Self::new(self.domain.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    /// Value at frame cell `(i, j)`, zero outside the mask.
    pub fn at(&self, i: i64, j: i64) -> f64 {
        self.domain.active_index(i, j).map_or(0.0, |a| self.values[a])
    }
}

/// Source specification: an expression in `x, y` or a grid file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldSpec {
    Expr { expr: String },
    GridFile { grid_file: PathBuf },
}

impl FieldSpec {
    pub fn expr(s: &str) -> Self {
        FieldSpec::Expr { expr: s.to_string() }
    }

    /// Samples the spec on `domain`. Relative grid-file paths resolve
    /// against `base_dir` when given.
    pub fn sample(&self, domain: Arc<GridDomain>, base_dir: Option<&Path>) -> Result<ScalarField> {
        match self {
            FieldSpec::Expr { expr } => {
                let e = Expr::parse(expr)?;
                ScalarField::from_fn(domain, |p| e.eval(p[0], p[1]))
            }
            FieldSpec::GridFile { grid_file } => {
                let path = match base_dir {
                    Some(b) if grid_file.is_relative() => b.join(grid_file),
                    _ => grid_file.clone(),
                };
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| Error::GridFile(format!("{}: {e}", path.display())))?;
                GridCsv::parse(&text)?.field_on(domain)
            }
        }
    }
}

/// Formats a float with 17 significant digits (round-trip safe).
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

/// Contents of a grid CSV file: header `nx,ny,h,ox,oy`, a line with those
/// numbers, then `ny` rows of `nx` values (row `j = 0` first), `NaN` outside
/// the mask.
#[derive(Clone, Debug, PartialEq)]
pub struct GridCsv {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub origin: [f64; 2],
    pub values: Vec<f64>,
}

impl GridCsv {
    pub fn from_field(u: &ScalarField) -> Self {
        let d = u.domain();
        let mut values = vec![f64::NAN; d.nx() * d.ny()];
        for (a, &k) in d.cells().iter().enumerate() {
            values[k as usize] = u.values()[a];
        }
        GridCsv { nx: d.nx(), ny: d.ny(), h: d.h(), origin: d.origin(), values }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(self.values.len() * 24 + 64);
        s.push_str("nx,ny,h,ox,oy\n");
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            self.nx,
            self.ny,
            fmt_float(self.h),
            fmt_float(self.origin[0]),
            fmt_float(self.origin[1])
        );
        for row in self.values.chunks(self.nx) {
            let line: Vec<String> = row.iter().map(|&v| fmt_float(v)).collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::GridFile("empty file".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols != ["nx", "ny", "h", "ox", "oy"] {
            return Err(Error::GridFile(format!("expected header 'nx,ny,h,ox,oy', got '{header}'")));
        }
        let dims = lines.next().ok_or_else(|| Error::GridFile("missing dimension line".into()))?;
        let dims: Vec<&str> = dims.split(',').map(str::trim).collect();
        if dims.len() != 5 {
            return Err(Error::GridFile("dimension line needs 5 entries".into()));
        }
        let bad = |what: &str| Error::GridFile(format!("malformed {what}"));
        let nx: usize = dims[0].parse().map_err(|_| bad("nx"))?;
        let ny: usize = dims[1].parse().map_err(|_| bad("ny"))?;
        let h: f64 = dims[2].parse().map_err(|_| bad("h"))?;
        let ox: f64 = dims[3].parse().map_err(|_| bad("ox"))?;
        let oy: f64 = dims[4].parse().map_err(|_| bad("oy"))?;
        let mut values = Vec::with_capacity(nx * ny);
        for line in lines {
            for tok in line.split(',') {
                let tok = tok.trim();
                let v: f64 = tok.parse().map_err(|_| Error::GridFile(format!("malformed value '{tok}'")))?;
                values.push(v);
            }
        }
        if values.len() != nx * ny {
            return Err(Error::GridFile(format!("{} values for a {nx}x{ny} grid", values.len())));
        }
        Ok(GridCsv { nx, ny, h, origin: [ox, oy], values })
    }

    /// The domain whose mask is the set of non-NaN entries.
    pub fn domain(&self) -> Result<GridDomain> {
        GridDomain::from_mask(self.nx, self.ny, self.h, self.origin, self.values.iter().map(|v| !v.is_nan()).collect())
    }

    /// Values on `domain`; the frame must match and masked cells must be finite.
    pub fn field_on(&self, domain: Arc<GridDomain>) -> Result<ScalarField> {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * domain.h();
        if self.nx != domain.nx()
            || self.ny != domain.ny()
            || !close(self.h, domain.h())
            || !close(self.origin[0], domain.origin()[0])
            || !close(self.origin[1], domain.origin()[1])
        {
            return Err(Error::GridFile(format!(
                "grid {}x{} (h = {}, origin {:?}) does not match the domain frame {}x{} (h = {}, origin {:?})",
                self.nx,
                self.ny,
                self.h,
                self.origin,
                domain.nx(),
                domain.ny(),
                domain.h(),
                domain.origin()
            )));
        }
        let values: Vec<f64> = domain.cells().iter().map(|&k| self.values[k as usize]).collect();
        ScalarField::new(domain, values)
    }
}
