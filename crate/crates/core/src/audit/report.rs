//! One full audit of a solved instance.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::asymmetry::{
    boosted_bound, l2_asymmetry_bound, s_omega_profile, superlevel_audit, theorem_asymmetry_bound, L2AsymmetryRecord,
    SuperlevelRecord,
};
use super::constants::{AssembledConstants, AssembledExponents, DerivedConstants, StabilityConstants};
use super::distance::rearrangement_distance;
use super::instance::Instance;
use super::normalize::{normalize, NormalizationRecord};
use super::polya::{polya_szego_deficit, PolyaSzegoRecord, SharpGradient};
use super::level_sets::{level_set_quantities, LevelSetRecord};
use super::stability::{f_stability, l1_stability, FStabilityRecord, L1StabilityRecord};
use super::talenti::talenti_gap;
use super::Verdict;
use crate::elliptic::SolverDiagnostics;
use crate::error::Result;
use crate::field::fmt_float;
use crate::rearrangement::LpIntegrable;

/// Tolerance for relations that hold exactly up to round-off.
pub const ROUND_OFF: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuditOptions {
    pub constants: StabilityConstants,
    /// Superlevels `t = frac · max u`.
    pub superlevel_fracs: Vec<f64>,
    /// Orders `m` of the reported `inf ‖f − f♯(·+x₀)‖_m`.
    pub f_orders: Vec<f64>,
    /// Extra `δ` at which `M_{u♯}` is reported.
    pub deltas: Vec<f64>,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions {
            constants: StabilityConstants::default(),
            superlevel_fracs: vec![0.05, 0.25, 0.5, 0.75, 0.95],
            f_orders: vec![1.0, 1.5],
            deltas: vec![0.01, 0.1],
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InstanceInfo {
    pub id: String,
    pub h: f64,
    pub cells: usize,
    pub measure: f64,
    pub f_l1: f64,
    pub f_l2: f64,
    pub relative_h: f64,
    pub tol_u: f64,
    pub tol_energy: f64,
    pub tol_l2: f64,
    pub tol_alpha: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CombinedRecord {
    pub c1_term: f64,
    pub c2_term: Option<f64>,
    /// With the exponent `1/θ̃₂` as stated and with `1/θ̃₃`.
    pub c3_term_stated: Option<f64>,
    pub c3_term_consistent: Option<f64>,
    pub eps_inf: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Quantities {
    pub eps_inf: f64,
    pub pointwise_min: f64,
    pub alpha_omega: f64,
    pub alpha_center: [f64; 2],
    pub s_omega: f64,
    /// On the normalized instance, like the rest of the level-set analysis.
    pub eps_normalized: f64,
    pub t_eps_beta: f64,
    pub i_measure: f64,
    pub e_u: f64,
    pub m_values: Vec<(f64, f64)>,
    pub gradient_gap: f64,
    pub l1_distance: f64,
    pub l2_distance: f64,
    pub f_distance_m: Vec<(f64, f64)>,
    pub l2_norm_gap: f64,
    pub normalization: NormalizationRecord,
    pub superlevels: Vec<SuperlevelRecord>,
    pub polya_szego: PolyaSzegoRecord,
    pub level_sets: LevelSetRecord,
    pub l1_stability: L1StabilityRecord,
    pub f_stability: FStabilityRecord,
    pub l2_asymmetry: L2AsymmetryRecord,
    pub combined: CombinedRecord,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstantsRecord {
    pub config: StabilityConstants,
    pub derived: DerivedConstants,
    pub exponents: AssembledExponents,
    pub assembled: AssembledConstants,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeficitReport {
    pub instance: InstanceInfo,
    pub quantities: Quantities,
    pub constants: ConstantsRecord,
    pub verdicts: Vec<Verdict>,
    pub solver: Option<SolverDiagnostics>,
}

pub fn audit(id: &str, inst: &Instance, opts: &AuditOptions) -> Result<DeficitReport> {
    let c = &opts.constants;
    c.validate()?;
    let tg = talenti_gap(&inst.u_star, &inst.sol)?;
    let eps = tg.eps_inf;
    let nz = normalize(inst)?;
    let alpha = nz.alpha_before.alpha;
    let s_omega = s_omega_profile(&inst.u_star, alpha)?;
    let umax = inst.u.max();
    let t_list: Vec<f64> = opts.superlevel_fracs.iter().map(|f| f * umax).collect();
    let superlevels = superlevel_audit(inst, &t_list, alpha, eps, c)?;

    let sg = SharpGradient::from_instance(inst)?;
    let mut deltas = vec![eps.powf(c.r)];
    deltas.extend(&opts.deltas);
    let mut pz = polya_szego_deficit(inst, eps, &deltas)?;
    let de = pz.e_u.max(0.0).powf(c.r);
    pz.m_values.insert(1, (de, sg.m_fn(de)));

    let norm_inst = &nz.instance;
    let eps_n = nz.record.eps_inf.after;
    let s4 = level_set_quantities(norm_inst, eps_n, c)?;

    let l1s = l1_stability(inst, eps, &pz, &sg, c)?;
    let fs = f_stability(inst, l1s.l2.center, eps, c)?;
    let mut f_distance_m = Vec::new();
    for &m in &opts.f_orders {
        f_distance_m.push((m, rearrangement_distance(&inst.f, m)?.distance));
    }
    let l2a = l2_asymmetry_bound(inst, s_omega, alpha);

    let f_l2 = inst.f.p_norm(2.0);
    // ‖f‖_{2n/(n+2)} = ‖f‖₁ in the plane
    let assembled = c.assembled(inst.measure(), inst.f_l1(), inst.f_l1(), f_l2);
    let ex = c.exponents();
    let combined = CombinedRecord {
        c1_term: assembled.c1 * alpha.powi(3),
        c2_term: assembled.c2.map(|c2| c2 * l1s.l1.distance.powf(ex.theta1)),
        c3_term_stated: assembled.c3.map(|c3| c3 * fs.f_distance.powf(ex.theta2)),
        c3_term_consistent: assembled.c3.map(|c3| c3 * fs.f_distance.powf(ex.theta2_from_theta3)),
        eps_inf: eps,
    };

    let mut verdicts = vec![
        Verdict::le("talenti", -tg.pointwise_min, 0.0, inst.tol_u()),
        theorem_asymmetry_bound(alpha, eps, inst.measure(), inst.f_l1(), c, inst.tol_alpha().powi(3)),
        boosted_bound(s_omega, alpha, eps, c.gamma_n, inst.tol_u()),
        Verdict::le("normalization_exact", nz.record.max_rel_err, 0.0, ROUND_OFF),
        Verdict::le("normalization_alpha", (nz.record.alpha.after - nz.record.alpha.before).abs(), 0.0, inst.tol_alpha()),
    ];
    for s in &superlevels {
        verdicts.extend(s.bound.iter().cloned().map(|v| v.with_note(format!("t = {:.6e}", s.t))));
        verdicts.extend(s.half_bound.iter().cloned().map(|v| v.with_note(format!("t = {:.6e}", s.t))));
    }
    verdicts.push(pz.energy_gap.clone());
    verdicts.extend(s4.verdicts.iter().cloned());
    verdicts.extend(l1s.estimate.iter().cloned());
    verdicts.extend(fs.verdicts.iter().cloned());
    verdicts.push(l2a.comparison.clone());
    verdicts.push(l2a.bound.clone());
    if let (Some(t2), Some(t3)) = (combined.c2_term, combined.c3_term_stated) {
        verdicts.push(
            Verdict::le("combined_estimate", combined.c1_term + t2 + t3, eps, 0.0)
                .conditional_on("uses the configured C̃₂, C̃₃ and the exponent 1/θ̃₂ as stated"),
        );
    }
    if let (Some(t2), Some(t3)) = (combined.c2_term, combined.c3_term_consistent) {
        verdicts.push(
            Verdict::le("combined_estimate_consistent", combined.c1_term + t2 + t3, 3.0 * eps, 0.0)
                .conditional_on("uses the configured C̃₂, C̃₃, the exponent 1/θ̃₃ and a factor 3 for the three terms"),
        );
    }

    let d = inst.domain();
    Ok(DeficitReport {
        instance: InstanceInfo {
            id: id.to_string(),
            h: d.h(),
            cells: d.len(),
            measure: inst.measure(),
            f_l1: inst.f_l1(),
            f_l2,
            relative_h: inst.relative_h(),
            tol_u: inst.tol_u(),
            tol_energy: inst.tol_energy(),
            tol_l2: inst.tol_l2(),
            tol_alpha: inst.tol_alpha(),
        },
        quantities: Quantities {
            eps_inf: eps,
            pointwise_min: tg.pointwise_min,
            alpha_omega: alpha,
            alpha_center: nz.alpha_before.center,
            s_omega,
            eps_normalized: eps_n,
            t_eps_beta: s4.t_eps_beta,
            i_measure: s4.i_measure,
            e_u: pz.e_u,
            m_values: pz.m_values.clone(),
            gradient_gap: pz.gradient_gap,
            l1_distance: l1s.l1.distance,
            l2_distance: l1s.l2.distance,
            f_distance_m,
            l2_norm_gap: l2a.gap,
            normalization: nz.record,
            superlevels,
            polya_szego: pz,
            level_sets: s4,
            l1_stability: l1s,
            f_stability: fs,
            l2_asymmetry: l2a,
            combined,
        },
        constants: ConstantsRecord { config: c.clone(), derived: c.derived(), exponents: ex, assembled },
        verdicts,
        solver: inst.diagnostics.clone(),
    })
}

impl DeficitReport {
    pub fn failures(&self) -> impl Iterator<Item = &Verdict> {
        self.verdicts.iter().filter(|v| v.counts_as_failure())
    }

    /// All non-conditional verdicts pass.
    pub fn passes(&self) -> bool {
        self.failures().next().is_none()
    }

    pub const CSV_COLUMNS: [&'static str; 22] = [
        "id",
        "h",
        "cells",
        "measure",
        "f_l1",
        "eps_inf",
        "pointwise_min",
        "alpha_omega",
        "s_omega",
        "eps_normalized",
        "t_eps_beta",
        "i_measure",
        "e_u",
        "gradient_gap",
        "l1_distance",
        "l2_distance",
        "f_distance_m1",
        "l2_norm_gap",
        "verdicts",
        "failed",
        "conditional",
        "pass",
    ];

    pub fn csv_header() -> String {
        Self::CSV_COLUMNS.join(",")
    }

    pub fn csv_row(&self) -> String {
        let q = &self.quantities;
        let i = &self.instance;
        let fm1 = q.f_distance_m.iter().find(|(m, _)| *m == 1.0).map_or(f64::NAN, |x| x.1);
        let nums = [
            i.h,
            i.measure,
            i.f_l1,
            q.eps_inf,
            q.pointwise_min,
            q.alpha_omega,
            q.s_omega,
            q.eps_normalized,
            q.t_eps_beta,
            q.i_measure,
            q.e_u,
            q.gradient_gap,
            q.l1_distance,
            q.l2_distance,
            fm1,
            q.l2_norm_gap,
        ];
        let mut cols = vec![csv_escape(&i.id)];
        cols.push(fmt_float(nums[0]));
        cols.push(i.cells.to_string());
        cols.extend(nums[1..].iter().map(|&x| fmt_float(x)));
        cols.push(self.verdicts.len().to_string());
        cols.push(self.failures().count().to_string());
        cols.push(self.verdicts.iter().filter(|v| v.conditional).count().to_string());
        cols.push(self.passes().to_string());
        cols.join(",")
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Reports keyed by instance id. Merging is associative; on a repeated id
/// the right-hand report wins.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ReportSet(pub BTreeMap<String, DeficitReport>);

impl ReportSet {
    pub fn single(r: DeficitReport) -> Self {
        let mut m = BTreeMap::new();
        m.insert(r.instance.id.clone(), r);
        ReportSet(m)
    }

    pub fn merge(mut self, other: ReportSet) -> Self {
        self.0.extend(other.0);
        self
    }

    pub fn to_csv(&self) -> String {
        let mut s = DeficitReport::csv_header();
        s.push('\n');
        for r in self.0.values() {
            s.push_str(&r.csv_row());
            s.push('\n');
        }
        s
    }
}
