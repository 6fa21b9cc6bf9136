mod common;

use chiral_gap_core::arithmetic::keyed_sample;
use chiral_gap_core::shift::{build_staircase, TestFunction};
use chiral_gap_core::tracekit::{compare_trace_representations, theta_fiber, DEFAULT_MAX_STEP};
use chiral_gap_core::zeta::{diagnostics, fit_affine, fit_residual, AffineMap, ZeroTable};
use common::*;

#[test]
fn golden_spectrum_matches_independent_enumeration() {
    let g = golden();
    let oracle = golden_levels();
    assert_eq!(g.spectrum.len(), oracle.len());
    for (k, (&v, &m)) in g
        .spectrum
        .values()
        .iter()
        .zip(g.spectrum.multiplicities())
        .enumerate()
    {
        assert_eq!(m, oracle[k].1, "multiplicity of level {k}");
        assert!(
            (v - oracle[k].0).abs() < 1e-9,
            "level {k}: {v} vs {}",
            oracle[k].0
        );
    }
    assert!((g.e_star - golden_scalar("e_star")).abs() < 1e-10);
    assert!((g.shifts.values()[0] - golden_scalar("shift_1")).abs() < 1e-14);
    assert!((g.shifts.values()[19] - golden_scalar("shift_20")).abs() < 1e-14);
}

#[test]
fn golden_staircase_is_the_spectrum() {
    let g = golden();
    let s = build_staircase(&g.spectrum);
    let jumps: Vec<(f64, u64)> = g
        .spectrum
        .values()
        .iter()
        .copied()
        .zip(g.spectrum.multiplicities().iter().copied())
        .collect();
    assert_eq!(s.jumps(), jumps.as_slice());
    // Recount by sorting the symmetric closure.
    let mut all: Vec<f64> = g
        .spectrum
        .symmetric_closure()
        .iter()
        .flat_map(|&(v, m)| std::iter::repeat_n(v, m as usize))
        .collect();
    all.sort_by(f64::total_cmp);
    for i in 0..400 {
        let x = -90.0 + 0.45 * i as f64 + 0.001;
        let recount = if x >= 0.0 {
            all.iter().filter(|&&v| v > 0.0 && v <= x).count() as i64
        } else {
            -(all.iter().filter(|&&v| v < 0.0 && v >= x).count() as i64)
        };
        assert_eq!(s.eval(x), recount, "at {x}");
    }
}

#[test]
fn golden_diagnostics_match_oracle() {
    let g = golden();
    let table = ZeroTable::embedded();
    let fit = fit_affine(g.spectrum.values(), &table, 20).unwrap();
    assert!(!fit.fallback);
    assert!((fit.map.a - golden_scalar("a")).abs() < 1e-6 * golden_scalar("a").abs());
    assert!((fit.map.b - golden_scalar("b")).abs() < 1e-6 * golden_scalar("b").abs());
    let report = diagnostics(&fit, &g.spectrum, &table, 20, 80.0).unwrap();
    assert!((report.mae - golden_scalar("mae")).abs() < 1e-7);
    assert!((report.max_abs - golden_scalar("max_abs")).abs() < 1e-7);
    assert!((report.e_step - golden_scalar("e_step")).abs() < 1e-7);
    let recomputed = report.deviations.iter().map(|d| d.abs()).sum::<f64>() / 20.0;
    assert_eq!(recomputed, report.mae);
    assert!((1.0..=40.0).contains(&report.mae));
}

#[test]
fn golden_fit_beats_random_perturbations() {
    let g = golden();
    let table = ZeroTable::embedded();
    let fit = fit_affine(g.spectrum.values(), &table, 20).unwrap();
    let (x, y) = (&g.spectrum.values()[..20], table.first(20).unwrap());
    let best = fit_residual(&fit.map, x, y);
    for i in 1..=100u64 {
        // δ spans 1e-6..1 relative to the fitted values.
        let delta = 10f64.powf(3.0 * keyed_sample(7, 1, i) - 3.0);
        let map = AffineMap {
            a: fit.map.a * (1.0 + delta * keyed_sample(7, 2, i)),
            b: fit.map.b + fit.map.b.abs() * delta * keyed_sample(7, 3, i),
        };
        assert!(best <= fit_residual(&map, x, y));
    }
}

#[test]
fn golden_theta_matches_double_loop() {
    let g = golden();
    let phi = TestFunction::gaussian(0.5).unwrap();
    let theta = theta_fiber(&phi, &g.bands, g.e_star, &g.shifts);
    assert!((theta - golden_scalar("theta_fiber")).abs() < 1e-9 * theta.abs());
    let report = compare_trace_representations(
        &phi,
        &g.bands,
        g.e_star,
        &g.ensemble,
        &g.family,
        &g.shifts,
        DEFAULT_MAX_STEP,
    )
    .unwrap();
    assert!(report.rel_gap < 1e-6, "{}", report.rel_gap);
    assert!(report.h_t <= 0.01);
    assert!(report.imag_residual.abs() < 1e-10);
}
