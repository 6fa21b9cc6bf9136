//! The in-memory experiment: bands, ensemble, mass shifts, gap filter,
//! staircase and zero alignment.

use chiral_gap_core::arithmetic::{
    generate_primes, mass_shifts, sample_hecke_ensemble, CoefficientFamily, HeckeEnsemble,
    MassShifts,
};
use chiral_gap_core::floquet::{
    compute_band_structure, select_reference_energy, BandStructure, PotentialSpec,
    QuasiMomentumGrid,
};
use chiral_gap_core::gapspec::{
    aggregate_spectrum, dirac_band_set, fiber_gap_eigenvalues, DiracBandSet, GapSpectrum,
};
use chiral_gap_core::shift::{build_staircase, Staircase};
use chiral_gap_core::zeta::{diagnostics, fit_affine, AffineFit, DiagnosticsReport, ZeroTable};

use crate::config::ExperimentConfig;
use crate::error::{in_module, io_at, ExpError};

pub const INSUFFICIENT_LEVELS_FLAG: &str = "insufficient_gap_eigenvalues";

#[derive(Debug, Clone)]
pub struct Alignment {
    pub fit: AffineFit,
    pub report: DiagnosticsReport,
}

#[derive(Debug, Clone)]
pub struct Pipeline {
    pub config: ExperimentConfig,
    pub potential: PotentialSpec,
    pub bands: BandStructure,
    pub e_star: f64,
    pub ensemble: HeckeEnsemble,
    pub family: CoefficientFamily,
    pub shifts: MassShifts,
    pub band_set: DiracBandSet,
    pub spectrum: GapSpectrum,
    pub staircase: Staircase,
    pub zeros: ZeroTable,
    /// `None` when fewer than `K` gap levels exist.
    pub alignment: Option<Alignment>,
}

pub fn load_zero_table(config: &ExperimentConfig) -> Result<ZeroTable, ExpError> {
    match &config.zeros {
        None => Ok(ZeroTable::embedded()),
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(io_at(path))?;
            ZeroTable::parse_csv(&text, &path.display().to_string()).map_err(in_module("zeta"))
        }
    }
}

pub fn band_structure(
    config: &ExperimentConfig,
) -> Result<(PotentialSpec, BandStructure), ExpError> {
    let potential = PotentialSpec::new(
        config.potential.period,
        config.potential.cosine_coefficients.clone(),
    )
    .map_err(in_module("floquet"))?;
    let grid =
        QuasiMomentumGrid::new(config.n_kappa, potential.period()).map_err(in_module("floquet"))?;
    let bands = compute_band_structure(&potential, &grid, config.truncation, config.n_bands)
        .map_err(in_module("floquet"))?;
    Ok((potential, bands))
}

impl Pipeline {
    pub fn run(config: &ExperimentConfig) -> Result<Self, ExpError> {
        config.validate()?;
        let (potential, bands) = band_structure(config)?;
        let e_star =
            select_reference_energy(&bands, config.gap_index).map_err(in_module("floquet"))?;

        let primes = generate_primes(config.n_primes).map_err(in_module("arithmetic"))?;
        let ensemble =
            sample_hecke_ensemble(&primes, config.n_modes, config.seed, config.mode.into())
                .map_err(in_module("arithmetic"))?;
        let family =
            CoefficientFamily::quadratic(config.epsilon).map_err(in_module("arithmetic"))?;
        let shifts = mass_shifts(&ensemble, &family);

        let band_set = dirac_band_set(&bands, e_star).map_err(in_module("gapspec"))?;
        let levels = fiber_gap_eigenvalues(&bands, e_star, &shifts, &band_set);
        let spectrum = aggregate_spectrum(&levels);
        let staircase = build_staircase(&spectrum);

        let zeros = load_zero_table(config)?;
        let alignment = if spectrum.len() >= config.fit_count {
            let fit = fit_affine(spectrum.values(), &zeros, config.fit_count)
                .map_err(in_module("zeta"))?;
            let report = diagnostics(&fit, &spectrum, &zeros, config.fit_count, config.window)
                .map_err(in_module("zeta"))?;
            Some(Alignment { fit, report })
        } else {
            None
        };

        Ok(Self {
            config: config.clone(),
            potential,
            bands,
            e_star,
            ensemble,
            family,
            shifts,
            band_set,
            spectrum,
            staircase,
            zeros,
            alignment,
        })
    }
}
