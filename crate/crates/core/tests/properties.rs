//! Invariants checked on randomly generated grids, fields and instances.

use std::sync::Arc;

use proptest::prelude::*;
use schwarz_stab::audit::{normalize, talenti_gap, Instance, Verdict};
use schwarz_stab::geometry::fraenkel_asymmetry;
use schwarz_stab::rearrangement::{
    decreasing_rearrangement, distribution_function, g_sub_h, hardy_littlewood_gap, quantitative_hl_deficit,
    schwarz_rearrangement, LpIntegrable,
};
use schwarz_stab::{DomainSpec, Error, GridDomain, ScalarField};

/// A random mask inside an empty one-cell frame, with at least one cell.
fn masked_domain() -> impl Strategy<Value = Arc<GridDomain>> {
    (1usize..10, 1usize..10, 0.05f64..2.0)
        .prop_flat_map(|(nx, ny, h)| (Just(nx), Just(ny), Just(h), prop::collection::vec(prop::bool::weighted(0.75), nx * ny)))
        .prop_map(|(nx, ny, h, inner)| {
            let (fx, fy) = (nx + 2, ny + 2);
            let mut mask = vec![false; fx * fy];
            for j in 0..ny {
                for i in 0..nx {
                    mask[(j + 1) * fx + i + 1] = inner[j * nx + i];
                }
            }
            mask[fx + 1] = true;
            Arc::new(GridDomain::from_mask(fx, fy, h, [-0.5, 0.25], mask).unwrap())
        })
}

fn field_pair() -> impl Strategy<Value = (ScalarField, ScalarField)> {
    masked_domain().prop_flat_map(|d| {
        let n = d.len();
        (Just(d), prop::collection::vec(-3.0f64..3.0, n), prop::collection::vec(-3.0f64..3.0, n)).prop_map(|(d, a, b)| {
            (ScalarField::new(d.clone(), a).unwrap(), ScalarField::new(d, b).unwrap())
        })
    })
}

/// A small solved instance: a disk or a rectangle with a positive cellwise
/// source.
fn small_instance() -> impl Strategy<Value = Instance> {
    let spec = prop_oneof![
        (0.5f64..1.5).prop_map(|r| DomainSpec::disk([0.1, -0.2], r)),
        (0.5f64..2.0, 0.5f64..2.0).prop_map(|(w, h)| DomainSpec::rectangle(0.0, 0.0, w, h)),
    ];
    (spec, 0.05f64..4.0, 0.0f64..3.0, 0.0f64..3.0).prop_map(|(spec, c0, cx, cy)| {
        let d = Arc::new(GridDomain::rasterize(&spec, 1.0 / 24.0).unwrap());
        let f = ScalarField::from_fn(d, |x| c0 + cx * x[0] * x[0] + cy * (x[1] > 0.3) as u8 as f64).unwrap();
        Instance::solve(f).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn hardy_littlewood_gap_is_nonnegative((h, g) in field_pair()) {
        prop_assert!(hardy_littlewood_gap(&h, &g).unwrap() >= 0.0);
    }

    #[test]
    fn g_h_attains_the_hardy_littlewood_bound((h, g) in field_pair()) {
        let gh = g_sub_h(&g, &h).unwrap();
        let top = h.p_norm(2.0) * g.p_norm(2.0);
        prop_assert!(hardy_littlewood_gap(&h, &gh).unwrap() <= 1e-12 * top.max(1.0));
        for p in [1.0, 2.0] {
            prop_assert!((gh.p_norm(p) - g.p_norm(p)).abs() <= 1e-12 * g.p_norm(p).max(1.0));
        }
    }

    #[test]
    fn quantitative_deficit_for_two_one((h, g) in field_pair()) {
        // a flat h* (repeated |h| values) makes θ_p infinite; that is reported, not a failure
        match quantitative_hl_deficit(&h, &g, 2.0, 1.0) {
            Ok(r) => {
                prop_assert!(r.pass, "{r:?}");
                prop_assert!(r.deficit_term >= 0.0);
            }
            Err(e) => prop_assert!(matches!(e, Error::Inadmissible(_)), "{e}"),
        }
    }

    #[test]
    fn rearrangements_are_equimeasurable((u, _) in field_pair(), p in 1.0f64..4.0) {
        let star = decreasing_rearrangement(&u);
        let sharp = schwarz_rearrangement(&u);
        let n = u.p_norm(p);
        prop_assert!((star.p_norm(p) - n).abs() <= 1e-12 * n.max(1e-300));
        prop_assert!((sharp.p_norm(p) - n).abs() <= 1e-12 * n.max(1e-300));
        prop_assert!(star.values().windows(2).all(|w| w[0] >= w[1]));
        prop_assert!((star.total() - u.domain().measure()).abs() <= 1e-12 * star.total());
    }

    #[test]
    fn distribution_is_nonincreasing_and_bounded((u, _) in field_pair()) {
        let mu = distribution_function(&u);
        let total = u.domain().measure();
        let top = u.sup_norm();
        let mut prev = f64::INFINITY;
        for k in 0..=20 {
            let m = mu.eval(top * k as f64 / 20.0);
            prop_assert!(m <= prev && m <= total + 1e-12 && m >= 0.0);
            prev = m;
        }
        prop_assert_eq!(mu.eval(top), 0.0);
    }

    #[test]
    fn verdict_logic(lhs in -10.0f64..10.0, rhs in -10.0f64..10.0, tol in 0.0f64..1.0) {
        let v = Verdict::le("x", lhs, rhs, tol);
        if lhs <= rhs + tol {
            prop_assert!(v.pass);
        }
        if lhs > rhs + tol + 1e-9 {
            prop_assert!(!v.pass);
            prop_assert!(v.counts_as_failure());
            prop_assert!(!v.clone().conditional_on("why").counts_as_failure());
        }
    }

    #[test]
    fn asymmetry_is_translation_invariant(dx in -3i32..3, dy in -3i32..3, w in 0.3f64..1.5) {
        let h = 1.0 / 32.0;
        let (ox, oy) = (dx as f64 * h, dy as f64 * h);
        let a = fraenkel_asymmetry(&GridDomain::rasterize(&DomainSpec::rectangle(0.0, 0.0, w, 0.5), h).unwrap());
        let b = fraenkel_asymmetry(&GridDomain::rasterize(&DomainSpec::rectangle(ox, oy, ox + w, oy + 0.5), h).unwrap());
        prop_assert!((0.0..2.0).contains(&a.alpha));
        prop_assert!((a.alpha - b.alpha).abs() <= 1e-12, "{} vs {}", a.alpha, b.alpha);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn talenti_holds_up_to_discretization(inst in small_instance()) {
        let tg = talenti_gap(&inst.u_star, &inst.sol).unwrap();
        prop_assert!(tg.pointwise_min >= -inst.tol_u(), "{tg:?} vs {}", inst.tol_u());
        prop_assert!(tg.eps_inf >= tg.pointwise_min);
    }

    #[test]
    fn normalization_identities(inst in small_instance()) {
        let nz = normalize(&inst).unwrap();
        prop_assert!(nz.record.max_rel_err <= 1e-12, "{:?}", nz.record);
        prop_assert!((nz.instance.measure() - 1.0).abs() <= 1e-12);
        prop_assert!((nz.instance.f_l1() - 1.0).abs() <= 1e-12);
        prop_assert!((nz.record.alpha.after - nz.record.alpha.before).abs() <= inst.tol_alpha());
    }

    #[test]
    fn energies_are_ordered(inst in small_instance()) {
        let eps = talenti_gap(&inst.u_star, &inst.sol).unwrap().eps_inf;
        let pz = schwarz_stab::audit::polya_szego_deficit(&inst, eps, &[]).unwrap();
        prop_assert!(pz.energy_sharp <= 1.02 * pz.energy_u, "{pz:?}");
        prop_assert!(pz.energy_gap.pass, "{:?}", pz.energy_gap);
    }
}
