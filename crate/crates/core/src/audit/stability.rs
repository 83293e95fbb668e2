//! Closeness of `u` to `u♯` and of `f` to `f♯`.

use serde::Serialize;

use super::constants::{StabilityConstants, N};
use super::distance::{distance_at, rearrangement_distance, Distance};
use super::instance::Instance;
use super::polya::{PolyaSzegoRecord, SharpGradient};
use super::Verdict;
use crate::elliptic::dirichlet_energy;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::numerics::{gauss_legendre, omega, stable_sum};
use crate::rearrangement::{check_window, decreasing_rearrangement, lorentz_lambda_norm_with, theta_p_analytic, LpIntegrable};

/// Knots for `θ_p` of `v*`.
pub const THETA_KNOTS: usize = 256;

#[derive(Clone, Debug, Serialize)]
pub struct L1StabilityRecord {
    pub l1: Distance,
    pub l2: Distance,
    /// `[M(E^r) + E]^s` with `E = max(E(u), 0)`.
    pub bracket: f64,
    /// `inf ‖u − u♯(·+x₀)‖₁ / ‖∇u♯‖₂`.
    pub l1_over_grad: f64,
    /// `l1_over_grad / bracket`: the constant the Pólya–Szegő estimate needs here.
    pub bracket_ratio: f64,
    /// `inf ‖u − u♯(·+x₀)‖₂^{(n+2)/2}`.
    pub l2_power: f64,
    /// `inf ‖u − u♯‖₁ / (‖f‖₁^{θ̃₁} |Ω|^{1+(2/n−1)θ̃₁} ε^{θ̃₁})`, valid for `n = 2`.
    pub c_tilde2_ratio: f64,
    /// Same for the `L²` form.
    pub k6_ratio: f64,
    /// Against a configured `C̃₂`; always conditional.
    pub estimate: Option<Verdict>,
}

pub fn l1_stability(
    inst: &Instance,
    eps: f64,
    pz: &PolyaSzegoRecord,
    sg: &SharpGradient,
    constants: &StabilityConstants,
) -> Result<L1StabilityRecord> {
    if !inst.u.is_nonnegative() {
        return Err(Error::InvalidArgument("u must be nonnegative".into()));
    }
    let n = N as f64;
    let (l1, l2) = rayon::join(|| rearrangement_distance(&inst.u, 1.0), || rearrangement_distance(&inst.u, 2.0));
    let (l1, l2) = (l1?, l2?);
    let e = pz.e_u.max(0.0);
    let bracket = (sg.m_fn(e.powf(constants.r)) + e).powf(constants.s);
    let l1_over_grad = l1.distance / pz.energy_sharp.sqrt();
    let t1 = constants.exponents().theta_tilde1;
    let (f1, m) = (inst.f_l1(), inst.measure());
    let scale = m.powf(1.0 + (2.0 / n - 1.0) * t1) * eps.powf(t1);
    // ‖f‖_{2n/(n+2)} = ‖f‖₁ for n = 2
    let c2_den = f1.powf(t1) * scale;
    let l2_power = l2.distance.powf((n + 2.0) / 2.0);
    let k6_den = f1.powf(2.0 + n - 4.0 * t1) / f1.powf(1.0 - 3.0 * t1) * scale;
    let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { f64::INFINITY };
    let estimate = constants.c_tilde2.map(|c| {
        Verdict::le("l1_estimate", l1.distance, c * c2_den, 0.0).conditional_on("C̃₂ is a configured value, not a known constant")
    });
    Ok(L1StabilityRecord {
        bracket,
        l1_over_grad,
        bracket_ratio: ratio(l1_over_grad, bracket),
        l2_power,
        c_tilde2_ratio: ratio(l1.distance, c2_den),
        k6_ratio: ratio(l2_power, k6_den),
        estimate,
        l1,
        l2,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FStabilityRecord {
    pub p: f64,
    pub q: f64,
    pub m: f64,
    /// Centre of `Ω♯` (from the `L²` search for `u`) and its radius.
    pub center: [f64; 2],
    pub radius: f64,
    /// `|Ω \ Ω♯|` and `|Ω Δ Ω♯| ε^{−1/4}`.
    pub outside_measure: f64,
    pub sym_diff_over_eps_quarter: f64,
    pub f_minus_g: f64,
    pub f_star_minus_g_star: f64,
    /// `∫ g* v* − ∫_{Ω♯} g v`.
    pub hl_gap: f64,
    /// `∫|∇v|² − ∫|∇u|² + ∫ f(u − u♯)`.
    pub energy_chain: f64,
    pub lambda_norm: f64,
    pub g_distance: f64,
    /// `(2^{p+1} e q ‖g‖_Λ^{pq} gap)^{1/(1+pq)}`.
    pub g_rhs: f64,
    /// `(‖g‖_Λ^{pq} gap / (2^{p+1} e q))^{1/(1+pq)}`, as printed.
    pub g_rhs_printed: f64,
    pub f_distance: f64,
    /// `inf ‖f − f♯‖_m / (‖f‖₂^{θ̃₂} ‖f‖₁^{1−θ̃₃−θ̃₂} |Ω|^{θ̃₂/2+(1−m)/m} ε^{θ̃₃})`.
    pub c_tilde3_ratio: f64,
    pub tol: f64,
    pub verdicts: Vec<Verdict>,
}

pub fn f_stability(inst: &Instance, center: [f64; 2], eps: f64, constants: &StabilityConstants) -> Result<FStabilityRecord> {
    let (p, q) = (constants.hl_p, constants.hl_q);
    check_window(p, q).map_err(|e| Error::Inadmissible(e.to_string()))?;
    let pq = p * q;
    let m = (pq + 1.0) / (p + 1.0);
    if !(1.0..2.0).contains(&m) {
        return Err(Error::Inadmissible(format!("m = (pq+1)/(p+1) = {m} must lie in [1, 2)")));
    }
    let d = inst.domain();
    let w = d.cell_area();
    let sol = &inst.sol;
    let radius = sol.radius();
    let f = &inst.f;
    let dist2 = |a: usize| {
        let x = d.cell_center(a);
        (x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2)
    };
    let inside: Vec<bool> = (0..d.len()).map(|a| dist2(a) < radius * radius).collect();
    let g = ScalarField::new(
        d.clone(),
        f.values().iter().zip(&inside).map(|(&x, &i)| if i { x } else { 0.0 }).collect(),
    )?;
    let outside_cells = inside.iter().filter(|&&i| !i).count();
    let outside_measure = outside_cells as f64 * w;
    let f_minus_g = (stable_sum(f.values().iter().zip(&inside).filter(|(_, &i)| !i).map(|(x, _)| x.powf(m))) * w)
        .powf(1.0 / m);
    let gstar = decreasing_rearrangement(&g);
    let f_star_minus_g_star =
        (stable_sum(inst.f_star.values().iter().zip(gstar.values()).map(|(a, b)| (a - b).abs().powf(m))) * w).powf(1.0 / m);

    // ∫ g* v* piece by piece, ∫ g v at cell centres
    let br = gstar.breaks();
    let top = stable_sum(
        gstar
            .values()
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0.0)
            .map(|(k, &v)| v * gauss_legendre(|s| sol.v_star(s), br[k], br[k + 1])),
    );
    let wn = omega(N);
    let v_at = |a: usize| sol.v_star(wn * dist2(a));
    let paired = stable_sum((0..d.len()).map(|a| g.values()[a] * v_at(a))) * w;
    let hl_gap = top - paired;

    let u_sharp_at = |a: usize| inst.u_star.eval(wn * dist2(a));
    let cross = stable_sum((0..d.len()).map(|a| f.values()[a] * (inst.u.values()[a] - u_sharp_at(a)))) * w;
    let energy_chain = inst.v_energy - dirichlet_energy(&inst.u) + cross;

    let knots: Vec<f64> = (1..=THETA_KNOTS).map(|k| sol.total * k as f64 / THETA_KNOTS as f64).collect();
    let theta = theta_p_analytic(|s| -sol.v_star_derivative(s), p, &knots)?;
    let lambda_norm = lorentz_lambda_norm_with(&gstar, &theta, q);
    let g_distance = rearrangement_distance(&g, m)?.distance;
    let c_hl = 2f64.powf(p + 1.0) * std::f64::consts::E * q;
    let lp = lambda_norm.powf(pq);
    let gap = hl_gap.max(0.0);
    let g_rhs = (c_hl * lp * gap).powf(1.0 / (1.0 + pq));
    let g_rhs_printed = (lp * gap / c_hl).powf(1.0 / (1.0 + pq));

    let f_distance = rearrangement_distance(f, m)?.distance;
    let f_at_c = distance_at(f, m, center)?.distance;
    let g_at_c = distance_at(&g, m, center)?.distance;

    let ex = constants.exponents();
    let (t2, t3) = (ex.theta_tilde2, ex.theta_tilde3);
    let measure = inst.measure();
    let c3_den = f.p_norm(2.0).powf(t2)
        * inst.f_l1().powf(1.0 - t3 - t2)
        * measure.powf(t2 / 2.0 + (1.0 - m) / m)
        * eps.powf(t3);
    let c_tilde3_ratio = if c3_den > 0.0 { f_distance / c3_den } else { f64::INFINITY };
    let sym_diff_over_eps_quarter = if eps > 0.0 { 2.0 * outside_measure / eps.powf(0.25) } else { f64::INFINITY };

    let tol = (8.0 * inst.relative_h() * measure).powf(1.0 / m) * g.sup_norm();
    let exact = |x: f64| 1e-12 * x.abs();
    let holder = outside_measure.powf(1.0 / m - 0.5) * f.p_norm(2.0);
    let mut verdicts = vec![
        Verdict::le("f_holder", f_minus_g, holder, exact(holder)),
        Verdict::le("f_star_contraction", f_star_minus_g_star, f_minus_g, exact(f_minus_g)),
        Verdict::le("hl_gap_chain", hl_gap, energy_chain, inst.tol_energy()),
        Verdict::le("g_hardy_littlewood", g_distance, g_rhs, tol),
        Verdict::le("g_hardy_littlewood_printed", g_distance, g_rhs_printed, tol)
            .conditional_on("constant 1/(2^(p+1) e q) as printed; the consistent form uses 2^(p+1) e q"),
        Verdict::le("f_triangle", f_at_c, f_minus_g + g_at_c + f_star_minus_g_star, tol),
    ];
    if let Some(c) = constants.c_tilde3 {
        verdicts.push(
            Verdict::le("f_estimate", f_distance, c * c3_den, 0.0)
                .conditional_on("C̃₃ is a configured value, not a known constant"),
        );
    }
    Ok(FStabilityRecord {
        p,
        q,
        m,
        center,
        radius,
        outside_measure,
        sym_diff_over_eps_quarter,
        f_minus_g,
        f_star_minus_g_star,
        hl_gap,
        energy_chain,
        lambda_norm,
        g_distance,
        g_rhs,
        g_rhs_printed,
        f_distance,
        c_tilde3_ratio,
        tol,
        verdicts,
    })
}
