mod common;

use std::f64::consts::PI;
use std::time::Instant;

use chiral_gap_core::floquet::{
    build_fiber_matrix, compute_band_structure, fiber_eigenvalues, select_reference_energy,
    PotentialSpec, QuasiMomentumGrid,
};
use common::*;

#[test]
fn lowest_eigenvalue_at_zone_edge_matches_oracle() {
    let values = fiber_eigenvalues(&PotentialSpec::mathieu(), PI, 32, 1).unwrap();
    assert!(
        (values[0] - ORACLE_LOWEST_AT_PI).abs() < 1e-10,
        "{}",
        values[0]
    );
}

#[test]
fn golden_edges_match_oracle() {
    let bands = mathieu_bands(32, 201);
    for (n, (edge, &(lo, hi))) in bands.edges().iter().zip(&ORACLE_EDGES).enumerate() {
        assert!(
            (edge.lower - lo).abs() < 1e-8,
            "alpha_{n}: {} vs {lo}",
            edge.lower
        );
        assert!(
            (edge.upper - hi).abs() < 1e-8,
            "beta_{n}: {} vs {hi}",
            edge.upper
        );
    }
    assert!(bands.edges()[1].lower - bands.edges()[0].upper > 0.1);
    let e_star = select_reference_energy(&bands, 0).unwrap();
    assert!((e_star - ORACLE_E_STAR).abs() < 1e-8);
}

#[test]
fn truncation_convergence() {
    let coarse = mathieu_bands(32, 201);
    let fine = mathieu_bands(64, 201);
    for (a, b) in coarse.edges().iter().zip(fine.edges()) {
        assert!((a.lower - b.lower).abs() < 1e-8);
        assert!((a.upper - b.upper).abs() < 1e-8);
    }
}

#[test]
fn independent_negative_kappa_solves_agree() {
    let potential = PotentialSpec::mathieu();
    let bands = mathieu_bands(32, 201);
    for (j, &kappa) in bands.grid().nodes().iter().enumerate() {
        let direct = fiber_eigenvalues(&potential, kappa, 32, 8).unwrap();
        for (n, e) in direct.iter().enumerate() {
            assert!((e - bands.energy(n, j)).abs() < 1e-10, "n={n} j={j}");
        }
    }
}

#[test]
fn fiber_spectra_match_dense_oracle() {
    let potential = PotentialSpec::new(1.0, vec![2.0, -0.7, 0.3]).unwrap();
    for kappa in [0.0, 0.4, -1.3, PI] {
        let matrix = build_fiber_matrix(&potential, kappa, 16).unwrap();
        let mine = matrix.eigenvalues().unwrap();
        let oracle = dense_symmetric_eigenvalues(matrix.dim(), &dense(&matrix));
        assert_eq!(mine.len(), 33);
        for (a, b) in mine.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-9 * b.abs().max(1.0), "{a} vs {b}");
        }
    }
}

fn dense(m: &chiral_gap_core::eigen::SymmetricMatrix) -> Vec<f64> {
    let n = m.dim();
    (0..n * n).map(|k| m.get(k / n, k % n)).collect()
}

#[test]
fn free_potential_has_no_open_gaps() {
    let start = Instant::now();
    let grid = QuasiMomentumGrid::new(201, 1.0).unwrap();
    let bands = compute_band_structure(&PotentialSpec::free(1.0).unwrap(), &grid, 8, 5).unwrap();
    for pair in bands.edges().windows(2) {
        assert!(pair[1].lower - pair[0].upper < 1e-8);
    }
    assert!(bands.gaps().is_empty());
    assert!(start.elapsed().as_secs_f64() < 1.0);
}

#[test]
fn edges_interlace() {
    let bands = mathieu_bands(32, 201);
    for e in bands.edges() {
        assert!(e.lower <= e.upper);
    }
    for g in bands.gaps() {
        assert!(bands.edges()[g.index].upper < bands.edges()[g.index + 1].lower);
        assert_eq!(
            (g.lower, g.upper),
            (
                bands.edges()[g.index].upper,
                bands.edges()[g.index + 1].lower
            )
        );
    }
    // Only the first three Mathieu gaps exceed the open-gap tolerance.
    assert_eq!(
        bands.gaps().iter().map(|g| g.index).collect::<Vec<_>>(),
        vec![0, 1, 2]
    );
}
