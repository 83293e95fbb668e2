mod common;

use std::sync::Arc;

use schwarz_stab::audit::*;
use schwarz_stab::field::{FieldSpec, GridCsv};
use schwarz_stab::{DomainSpec, GridDomain, ScalarField};

const H: f64 = 1.0 / 32.0;

fn report(id: &str, inst: &Instance) -> DeficitReport {
    audit(id, inst, &AuditOptions::default()).unwrap()
}

#[test]
fn corpus_audits_have_no_hard_failures() {
    for case in common::corpus() {
        let r = report(&case.id, &common::solve(&case, H));
        let bad: Vec<_> = r.failures().collect();
        assert!(bad.is_empty(), "{}: {bad:#?}", case.id);
        assert!(r.quantities.pointwise_min >= -r.instance.tol_u, "{}", case.id);
    }
}

#[test]
fn rigid_instance_reports_near_zero_deficits() {
    let inst = common::rigid(1.0 / 64.0);
    let r = report("rigid", &inst);
    let q = &r.quantities;
    assert_eq!(q.alpha_omega, 0.0);
    assert!(q.eps_inf <= inst.tol_u());
    assert!(q.e_u.abs() < 0.02);
    assert!(q.l1_distance < 5.0 * inst.h());
    assert!(r.passes());
}

#[test]
fn inflated_solution_breaks_talenti() {
    // a supplied "solution" 30% above the true one cannot satisfy u♯ ≤ v
    let case = &common::corpus()[3];
    let good = common::solve(case, H);
    let u = good.u.map(|x| 1.3 * x).unwrap();
    let bad = Instance::from_solution(good.f.clone(), u).unwrap();
    let r = report("inflated", &bad);
    assert!(!r.passes());
    assert!(r.failures().any(|v| v.name == "talenti"), "{:#?}", r.failures().collect::<Vec<_>>());
}

#[test]
fn json_and_csv_are_deterministic() {
    let case = &common::corpus()[12];
    let a = report(&case.id, &common::solve(case, H));
    let b = report(&case.id, &common::solve(case, H));
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert_eq!(a.csv_row(), b.csv_row());
    assert_eq!(a.csv_row().split(',').count(), DeficitReport::CSV_COLUMNS.len());
    let set = ReportSet::single(a).merge(ReportSet::single(b));
    let csv = set.to_csv();
    assert_eq!(csv.lines().count(), 2);
    assert_eq!(csv.lines().next().unwrap(), DeficitReport::csv_header());
}

#[test]
fn report_rows_are_sorted_by_id() {
    let cases = common::corpus();
    let mut set = ReportSet::default();
    for k in [7, 0, 4] {
        set = set.merge(ReportSet::single(report(&cases[k].id, &common::solve(&cases[k], H))));
    }
    let ids: Vec<String> = set.to_csv().lines().skip(1).map(|l| l.split(',').next().unwrap().to_string()).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
}

#[test]
fn distance_search_matches_exhaustive_scan_on_nonconvex_domains() {
    for spec in [common::l_shape(), common::two_disks()] {
        let d = Arc::new(GridDomain::rasterize(&spec, H).unwrap());
        let u = Instance::solve(ScalarField::constant(d, 1.0).unwrap()).unwrap().u;
        for p in [1.0, 2.0] {
            let s = rearrangement_distance(&u, p).unwrap();
            let e = rearrangement_distance_exhaustive(&u, p, 1.0).unwrap();
            assert!(s.distance <= e.distance * (1.0 + 1e-3), "p = {p}: {} vs {}", s.distance, e.distance);
        }
    }
}

#[test]
fn expression_and_grid_file_sources_agree() {
    let d = Arc::new(GridDomain::rasterize(&DomainSpec::disk([0.0, 0.0], 1.0), H).unwrap());
    let from_expr = FieldSpec::expr("1 + x^2").sample(d.clone(), None).unwrap();
    let dir = std::env::temp_dir().join(format!("schwarz-stab-audit-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join("f.csv"), GridCsv::from_field(&from_expr).to_csv()).unwrap();
    let spec: FieldSpec = serde_json::from_str(r#"{"grid_file": "f.csv"}"#).unwrap();
    let from_file = spec.sample(d, Some(&dir)).unwrap();
    std::fs::remove_dir_all(&dir).unwrap();
    assert_eq!(from_expr.values(), from_file.values());
}

#[test]
fn counterexample_trend_at_coarse_resolution() {
    let recs = counterexample_family(&[0.25, 0.125], None).unwrap();
    let fit = fit_family(&recs);
    assert!(fit.sup_decreasing, "{recs:#?}");
    assert!(fit.l2_max_rel_dev < 0.05, "{fit:?}");
}
