#![allow(dead_code)]

use chiral_gap_core::arithmetic::{
    generate_primes, mass_shifts, sample_hecke_ensemble, CoefficientFamily, HeckeEnsemble,
    MassShifts, SamplingMode,
};
use chiral_gap_core::floquet::{
    compute_band_structure, select_reference_energy, BandStructure, PotentialSpec,
    QuasiMomentumGrid,
};
use chiral_gap_core::gapspec::{
    aggregate_spectrum, dirac_band_set, fiber_gap_eigenvalues, GapSpectrum,
};

/// Mathieu band edges `(α_n, β_n)` from 40-digit eigensolves of the M = 32
/// fiber at κ = 0 and κ = π (unchanged at M = 24).
pub const ORACLE_EDGES: [(f64, f64); 8] = [
    (-0.050603841998408659, 8.8570989513510169),
    (10.856778202313893, 39.469974548564299),
    (39.520577487705110, 88.832612469349462),
    (88.832933216957181, 157.91704740862392),
    (157.91704831148007, 246.74222089929216),
    (246.74222090072157, 355.30720588912719),
    (355.30720588912864, 483.61167108402080),
    (483.61167108402080, 631.65548580680554),
];
pub const ORACLE_E_STAR: f64 = 9.8569385768324548;
pub const ORACLE_LOWEST_AT_PI: f64 = 8.8570989513510169;

pub fn mathieu_bands(truncation: usize, n_kappa: usize) -> BandStructure {
    let grid = QuasiMomentumGrid::new(n_kappa, 1.0).unwrap();
    compute_band_structure(&PotentialSpec::mathieu(), &grid, truncation, 8).unwrap()
}

pub struct Golden {
    pub bands: BandStructure,
    pub e_star: f64,
    pub ensemble: HeckeEnsemble,
    pub family: CoefficientFamily,
    pub shifts: MassShifts,
    pub spectrum: GapSpectrum,
}

/// Default configuration: M = 32, 201 κ nodes, 8 bands, gap 0,
/// N_P = N_H = 20, ε = 0.35, seed 12345.
pub fn golden() -> Golden {
    golden_with(20, 20, 12345, SamplingMode::IidUniform)
}

pub fn golden_with(n_primes: usize, n_modes: usize, seed: u64, mode: SamplingMode) -> Golden {
    let bands = mathieu_bands(32, 201);
    let e_star = select_reference_energy(&bands, 0).unwrap();
    let primes = generate_primes(n_primes).unwrap();
    let ensemble = sample_hecke_ensemble(&primes, n_modes, seed, mode).unwrap();
    let family = CoefficientFamily::quadratic(0.35).unwrap();
    let shifts = mass_shifts(&ensemble, &family);
    let set = dirac_band_set(&bands, e_star).unwrap();
    let spectrum = aggregate_spectrum(&fiber_gap_eigenvalues(&bands, e_star, &shifts, &set));
    Golden {
        bands,
        e_star,
        ensemble,
        family,
        shifts,
        spectrum,
    }
}

fn fixture(name: &str) -> String {
    let path = format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).unwrap()
}

/// `(λ_k, m_k)` from the independent golden-run oracle.
pub fn golden_levels() -> Vec<(f64, u64)> {
    fixture("golden_spectrum.csv")
        .lines()
        .skip(1)
        .map(|l| {
            let (v, m) = l.split_once(',').unwrap();
            (v.parse().unwrap(), m.parse().unwrap())
        })
        .collect()
}

pub fn golden_scalar(name: &str) -> f64 {
    fixture("golden_scalars.csv")
        .lines()
        .skip(1)
        .find_map(|l| {
            l.strip_prefix(name)
                .and_then(|r| r.strip_prefix(','))
                .map(|v| v.parse().unwrap())
        })
        .unwrap_or_else(|| panic!("no scalar {name}"))
}

pub fn dense_symmetric_eigenvalues(dim: usize, row_major: &[f64]) -> Vec<f64> {
    let m = nalgebra::DMatrix::from_row_slice(dim, dim, row_major);
    let mut values: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}
