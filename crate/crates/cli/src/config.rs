//! The JSON run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use schwarz_stab::audit::{AuditOptions, StabilityConstants};
use schwarz_stab::field::FieldSpec;
use schwarz_stab::DomainSpec;

use crate::failure::{Failure, Outcome, EXIT_CONFIG};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub domain: Option<DomainSpec>,
    #[serde(default)]
    pub source: Option<FieldSpec>,
    /// A precomputed `u` to audit instead of solving.
    #[serde(default)]
    pub solution: Option<FieldSpec>,
    #[serde(default)]
    pub h: Option<f64>,
    #[serde(default)]
    pub constants: StabilityConstants,
    #[serde(default)]
    pub audit: AuditSettings,
    /// Closed-form `u` for the `max_err` column of sweeps.
    #[serde(default)]
    pub exact: Option<String>,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub sweep: Option<SweepGrid>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuditSettings {
    pub superlevel_fracs: Vec<f64>,
    pub f_orders: Vec<f64>,
    pub deltas: Vec<f64>,
}

impl Default for AuditSettings {
    fn default() -> Self {
        let d = AuditOptions::default();
        AuditSettings { superlevel_fracs: d.superlevel_fracs, f_orders: d.f_orders, deltas: d.deltas }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    pub report: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

/// Lists that span the sweep; absent lists fall back to the base config.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepGrid {
    pub h: Option<Vec<f64>>,
    /// Bump widths: the source becomes `1 + σ⁻¹ χ_{B_σ(c)}`.
    pub sigma: Option<Vec<f64>>,
    /// Centre of the bump; the domain centroid when absent.
    pub bump_center: Option<[f64; 2]>,
    /// Rectangles `[0, a] × [0, 1]` replacing the configured domain.
    pub rect_aspect: Option<Vec<f64>>,
}

impl RunConfig {
    /// Reads and parses a config file; the directory of the file becomes the
    /// base for relative paths inside it.
    pub fn load(path: &Path) -> Outcome<(Self, PathBuf)> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::new(EXIT_CONFIG, format!("cannot read config {}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Failure::new(EXIT_CONFIG, format!("malformed config {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((cfg, base))
    }

    pub fn audit_options(&self) -> AuditOptions {
        AuditOptions {
            constants: self.constants.clone(),
            superlevel_fracs: self.audit.superlevel_fracs.clone(),
            f_orders: self.audit.f_orders.clone(),
            deltas: self.audit.deltas.clone(),
        }
    }

    pub fn validate(&self) -> Outcome<()> {
        if let Some(h) = self.h {
            check_h(h)?;
        }
        self.constants.validate().map_err(|e| Failure::new(EXIT_CONFIG, e.to_string()))?;
        if let Some(d) = &self.domain {
            d.validate().map_err(|e| Failure::new(EXIT_CONFIG, e.to_string()))?;
        }
        if let Some(s) = &self.sweep {
            s.validate()?;
        }
        Ok(())
    }

    pub fn require_h(&self) -> Outcome<f64> {
        self.h.ok_or_else(|| Failure::new(EXIT_CONFIG, "no grid spacing: set \"h\" in the config or pass --h"))
    }

    pub fn require_domain(&self) -> Outcome<&DomainSpec> {
        self.domain.as_ref().ok_or_else(|| Failure::new(EXIT_CONFIG, "the config has no \"domain\""))
    }

    pub fn require_source(&self) -> Outcome<&FieldSpec> {
        self.source.as_ref().ok_or_else(|| Failure::new(EXIT_CONFIG, "the config has no \"source\""))
    }
}

pub fn check_h(h: f64) -> Outcome<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Failure::new(EXIT_CONFIG, format!("h must be positive, got {h}")));
    }
    Ok(())
}

impl SweepGrid {
    fn validate(&self) -> Outcome<()> {
        let lists = [("h", &self.h), ("sigma", &self.sigma), ("rect_aspect", &self.rect_aspect)];
        if lists.iter().all(|(_, l)| l.is_none()) {
            return Err(Failure::new(EXIT_CONFIG, "the sweep grid lists no parameters"));
        }
        for (name, l) in lists {
            if let Some(v) = l {
                if v.is_empty() {
                    return Err(Failure::new(EXIT_CONFIG, format!("sweep list \"{name}\" is empty")));
                }
                if let Some(x) = v.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
                    return Err(Failure::new(EXIT_CONFIG, format!("sweep list \"{name}\" has a non-positive entry {x}")));
                }
            }
        }
        Ok(())
    }
}
