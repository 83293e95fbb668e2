use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use schwarz_stab::audit::{audit, counterexample_family, fit_family, CounterexampleFit, CounterexampleRecord, DeficitReport, Instance, ReportSet};
use schwarz_stab::elliptic::{dirichlet_energy, solve_dirichlet, PoissonProblem, SolverDiagnostics};
use schwarz_stab::expr::Expr;
use schwarz_stab::field::{fmt_float, FieldSpec, GridCsv};
use schwarz_stab::numerics::log_log_slope;
use schwarz_stab::rearrangement::{decreasing_rearrangement, LpIntegrable};
use schwarz_stab::{DomainSpec, GridDomain, ScalarField};

use crate::config::{check_h, RunConfig};
use crate::failure::{Failure, Outcome, EXIT_CONFIG, EXIT_OK, EXIT_VERDICT};
use crate::output::Targets;

pub struct Ctx<'a> {
    pub cfg: RunConfig,
    pub base: &'a Path,
    pub targets: Targets,
    pub workers: usize,
}

fn rasterize(spec: &DomainSpec, h: f64) -> Outcome<Arc<GridDomain>> {
    Ok(Arc::new(GridDomain::rasterize(spec, h)?))
}

fn sample(spec: &FieldSpec, d: &Arc<GridDomain>, base: &Path) -> Outcome<ScalarField> {
    Ok(spec.sample(d.clone(), Some(base))?)
}

/// Solves, or wraps the configured solution file.
fn instance(cfg: &RunConfig, domain: &DomainSpec, source: &FieldSpec, h: f64, base: &Path) -> Outcome<Instance> {
    let d = rasterize(domain, h)?;
    let f = sample(source, &d, base)?;
    Ok(match &cfg.solution {
        Some(u) => Instance::from_solution(f, sample(u, &d, base)?)?,
        None => Instance::solve(f)?,
    })
}

#[derive(Serialize)]
struct SolveSummary {
    h: f64,
    cells: usize,
    measure: f64,
    u_max: f64,
    u_l1: f64,
    energy: f64,
    diagnostics: SolverDiagnostics,
}

pub fn solve(ctx: &Ctx) -> Outcome<u8> {
    let h = ctx.cfg.require_h()?;
    let d = rasterize(ctx.cfg.require_domain()?, h)?;
    let f = sample(ctx.cfg.require_source()?, &d, ctx.base)?;
    let out = solve_dirichlet(&PoissonProblem::new(f))?;
    ctx.targets.write_csv(&GridCsv::from_field(&out.u).to_csv())?;
    ctx.targets.write_report(&SolveSummary {
        h,
        cells: d.len(),
        measure: d.measure(),
        u_max: out.u.max(),
        u_l1: out.u.p_norm(1.0),
        energy: dirichlet_energy(&out.u),
        diagnostics: out.diagnostics,
    })?;
    Ok(EXIT_OK)
}

pub fn audit_cmd(ctx: &Ctx) -> Outcome<u8> {
    let cfg = &ctx.cfg;
    let h = cfg.require_h()?;
    let inst = instance(cfg, cfg.require_domain()?, cfg.require_source()?, h, ctx.base)?;
    let report = audit("instance", &inst, &cfg.audit_options())?;
    ctx.targets.write_report(&report)?;
    ctx.targets.write_csv(&format!("{}\n{}\n", DeficitReport::csv_header(), report.csv_row()))?;
    let failed: Vec<String> = report.failures().map(|v| format!("{} (lhs {:e}, rhs {:e}, tol {:e})", v.name, v.lhs, v.rhs, v.tol)).collect();
    if failed.is_empty() {
        Ok(EXIT_OK)
    } else {
        eprintln!("failed verdicts:");
        for f in &failed {
            eprintln!("  {f}");
        }
        Ok(EXIT_VERDICT)
    }
}

#[derive(Serialize)]
struct CounterexampleOutput {
    records: Vec<CounterexampleRecord>,
    fit: CounterexampleFit,
}

pub const COUNTEREXAMPLE_COLUMNS: [&str; 12] = [
    "sigma",
    "h",
    "bump_cells",
    "l1_diff",
    "l1_expected",
    "l15_diff",
    "l15_expected",
    "l2_diff",
    "l2_expected",
    "sup_grid",
    "sup_radial",
    "eps_inf",
];

pub fn counterexample(ctx: &Ctx, sigmas: Option<Vec<f64>>) -> Outcome<u8> {
    let sigmas = sigmas
        .or_else(|| ctx.cfg.sweep.as_ref().and_then(|s| s.sigma.clone()))
        .ok_or_else(|| Failure::new(EXIT_CONFIG, "no σ values: pass --sigma or set sweep.sigma"))?;
    if sigmas.is_empty() {
        return Err(Failure::new(EXIT_CONFIG, "the σ list is empty"));
    }
    let records = counterexample_family(&sigmas, ctx.cfg.h)?;
    let fit = fit_family(&records);
    let mut csv = COUNTEREXAMPLE_COLUMNS.join(",");
    csv.push('\n');
    for r in &records {
        let row = [
            fmt_float(r.sigma),
            fmt_float(r.h),
            r.bump_cells.to_string(),
            fmt_float(r.l1_diff),
            fmt_float(r.l1_expected),
            fmt_float(r.l15_diff),
            fmt_float(r.l15_expected),
            fmt_float(r.l2_diff),
            fmt_float(r.l2_expected),
            fmt_float(r.sup_grid),
            fmt_float(r.sup_radial),
            fmt_float(r.eps_inf),
        ];
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    ctx.targets.write_csv(&csv)?;
    ctx.targets.write_report(&CounterexampleOutput { records, fit })?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct ProfileSummary {
    field: &'static str,
    measure: f64,
    pieces: usize,
    max: f64,
    l1: f64,
    l2: f64,
}

/// Dumps the decreasing rearrangement of the source (or of the solution) as
/// `s_start,s_end,value` rows.
pub fn rearrange(ctx: &Ctx, of_solution: bool) -> Outcome<u8> {
    let cfg = &ctx.cfg;
    let h = cfg.require_h()?;
    let field = if of_solution {
        instance(cfg, cfg.require_domain()?, cfg.require_source()?, h, ctx.base)?.u
    } else {
        let d = rasterize(cfg.require_domain()?, h)?;
        sample(cfg.require_source()?, &d, ctx.base)?
    };
    let star = decreasing_rearrangement(&field);
    let mut csv = String::from("s_start,s_end,value\n");
    for (k, v) in star.values().iter().enumerate() {
        let b = star.breaks();
        csv.push_str(&format!("{},{},{}\n", fmt_float(b[k]), fmt_float(b[k + 1]), fmt_float(*v)));
    }
    ctx.targets.write_csv(&csv)?;
    ctx.targets.write_report(&ProfileSummary {
        field: if of_solution { "solution" } else { "source" },
        measure: star.total(),
        pieces: star.pieces(),
        max: star.values().first().copied().unwrap_or(0.0),
        l1: star.p_norm(1.0),
        l2: star.p_norm(2.0),
    })?;
    Ok(EXIT_OK)
}

#[derive(Clone, Debug)]
struct Point {
    index: usize,
    aspect: Option<f64>,
    sigma: Option<f64>,
    h: f64,
}

impl Point {
    fn id(&self) -> String {
        format!("p{:04}", self.index)
    }
}

enum RowResult {
    Done { report: Box<DeficitReport>, max_err: Option<f64> },
    Error(String),
}

fn points(cfg: &RunConfig) -> Outcome<Vec<Point>> {
    let grid = cfg.sweep.as_ref().ok_or_else(|| Failure::new(EXIT_CONFIG, "the config has no \"sweep\" grid"))?;
    let aspects: Vec<Option<f64>> = grid.rect_aspect.as_ref().map_or(vec![None], |v| v.iter().map(|&a| Some(a)).collect());
    let sigmas: Vec<Option<f64>> = grid.sigma.as_ref().map_or(vec![None], |v| v.iter().map(|&s| Some(s)).collect());
    let hs = match &grid.h {
        Some(v) => v.clone(),
        None => vec![cfg.require_h()?],
    };
    if grid.rect_aspect.is_none() {
        cfg.require_domain()?;
    }
    if grid.sigma.is_none() {
        cfg.require_source()?;
    }
    let mut out = Vec::new();
    for &aspect in &aspects {
        for &sigma in &sigmas {
            for &h in &hs {
                check_h(h)?;
                out.push(Point { index: out.len(), aspect, sigma, h });
            }
        }
    }
    Ok(out)
}

fn bump_source(sigma: f64, c: [f64; 2]) -> FieldSpec {
    FieldSpec::expr(&format!(
        "1 + (1/{s})*((x - {cx})^2 + (y - {cy})^2 < {s}^2)",
        s = fmt_float(sigma),
        cx = fmt_float(c[0]),
        cy = fmt_float(c[1])
    ))
}

fn run_point(cfg: &RunConfig, base: &Path, exact: Option<&Expr>, p: &Point) -> Outcome<RowResult> {
    let domain = match p.aspect {
        Some(a) => DomainSpec::rectangle(0.0, 0.0, a, 1.0),
        None => cfg.require_domain()?.clone(),
    };
    let source = match p.sigma {
        Some(s) => {
            let c = match cfg.sweep.as_ref().and_then(|g| g.bump_center) {
                Some(c) => c,
                None => rasterize(&domain, p.h)?.centroid(),
            };
            bump_source(s, c)
        }
        None => cfg.require_source()?.clone(),
    };
    let inst = instance(cfg, &domain, &source, p.h, base)?;
    let max_err = exact.map(|e| {
        let d = inst.domain();
        (0..d.len())
            .map(|a| {
                let x = d.cell_center(a);
                (inst.u.values()[a] - e.eval(x[0], x[1])).abs()
            })
            .fold(0.0, f64::max)
    });
    let report = audit(&p.id(), &inst, &cfg.audit_options())?;
    Ok(RowResult::Done { report: Box::new(report), max_err })
}

#[derive(Serialize)]
struct SweepSummary {
    rows: usize,
    failed: usize,
    errors: usize,
    /// Fitted slope of `max_err` against `h` when only `h` varies.
    max_err_order: Option<f64>,
    reports: ReportSet,
}

pub fn sweep(ctx: &Ctx) -> Outcome<u8> {
    let cfg = &ctx.cfg;
    let pts = points(cfg)?;
    let exact = match &cfg.exact {
        Some(s) => Some(Expr::parse(s)?),
        None => None,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(ctx.workers)
        .build()
        .map_err(|e| Failure::new(EXIT_CONFIG, format!("cannot start {} workers: {e}", ctx.workers)))?;
    // collect() keeps input order whatever the completion order
    let rows: Vec<RowResult> = pool.install(|| {
        pts.par_iter()
            .map(|p| run_point(cfg, ctx.base, exact.as_ref(), p).unwrap_or_else(|e| RowResult::Error(e.message)))
            .collect()
    });

    let mut csv = String::from("point,aspect,sigma,status,max_err,");
    csv.push_str(&DeficitReport::csv_header());
    csv.push('\n');
    let opt = |x: Option<f64>| x.map_or(String::new(), fmt_float);
    let (mut failed, mut errors) = (0, 0);
    let mut reports = ReportSet::default();
    let mut errs = Vec::new();
    for (p, row) in pts.iter().zip(&rows) {
        let lead = format!("{},{},{}", p.index, opt(p.aspect), opt(p.sigma));
        match row {
            RowResult::Done { report, max_err } => {
                let status = if report.passes() { "pass" } else { "fail" };
                if !report.passes() {
                    failed += 1;
                }
                csv.push_str(&format!("{lead},{status},{},{}\n", opt(*max_err), report.csv_row()));
                reports = reports.merge(ReportSet::single((**report).clone()));
            }
            RowResult::Error(msg) => {
                errors += 1;
                let blanks = ",".repeat(DeficitReport::CSV_COLUMNS.len() - 2);
                csv.push_str(&format!("{lead},error,,{},{}{blanks}\n", p.id(), fmt_float(p.h)));
                errs.push((p.id(), msg.clone()));
            }
        }
    }
    let only_h = cfg.sweep.as_ref().is_some_and(|g| g.sigma.is_none() && g.rect_aspect.is_none());
    let max_err_order = if only_h {
        let (hs, es): (Vec<f64>, Vec<f64>) = pts
            .iter()
            .zip(&rows)
            .filter_map(|(p, r)| match r {
                RowResult::Done { max_err: Some(e), .. } => Some((p.h, *e)),
                _ => None,
            })
            .unzip();
        log_log_slope(&hs, &es)
    } else {
        None
    };
    ctx.targets.write_csv(&csv)?;
    ctx.targets.write_report(&SweepSummary { rows: rows.len(), failed, errors, max_err_order, reports })?;
    for (id, msg) in &errs {
        eprintln!("{id}: {msg}");
    }
    if failed + errors == rows.len() {
        eprintln!("every sweep row failed");
        Ok(EXIT_VERDICT)
    } else {
        Ok(EXIT_OK)
    }
}
