use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors raised by the numerical core.
///
/// Variants carry enough context to name the offending input; the std
/// companion crate prefixes them with the pipeline stage.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A configuration value violates a precondition.
    InvalidInput(&'static str),
    /// Plane-wave truncation smaller than the highest potential harmonic.
    TruncationTooSmall {
        truncation: usize,
        harmonics: usize,
    },
    /// More bands requested than the truncation resolves.
    TooManyBands {
        n_bands: usize,
        truncation: usize,
    },
    /// Quasi-momentum outside the Brillouin zone or not finite.
    QuasiMomentumOutOfRange(f64),
    /// QL iteration failed to converge.
    EigenNoConvergence {
        index: usize,
    },
    /// Eigensolve failed on the fiber with the given grid index.
    FiberSolve {
        fiber: usize,
    },
    /// The band structure has no open gap.
    NoOpenGaps,
    GapIndexOutOfRange {
        index: usize,
        open_gaps: usize,
    },
    /// The reference energy lies inside a band.
    EnergyInBand {
        energy: f64,
        band: usize,
    },
    /// Coefficient family with non-positive decay exponent.
    NotSummable {
        epsilon: f64,
    },
    PrimeNotInSet(u64),
    /// A local factor came too close to zero to choose a log branch.
    BranchAmbiguity {
        prime: u64,
        t: f64,
    },
    /// Zero table failed validation.
    InvalidZeroTable(&'static str),
    InsufficientZeros {
        requested: usize,
        available: usize,
    },
    InsufficientEigenvalues {
        requested: usize,
        available: usize,
    },
    /// Affine fit input where all eigenvalues coincide.
    DegenerateFit,
    /// Matrix-model caps exceed desk scale.
    ModelTooLarge {
        fibers: usize,
        modes: usize,
    },
    EmptyModel,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::TruncationTooSmall { truncation, harmonics } => write!(
                f,
                "plane-wave truncation M = {truncation} is below the highest potential harmonic R = {harmonics}"
            ),
            Error::TooManyBands { n_bands, truncation } => write!(
                f,
                "n_bands = {n_bands} exceeds 2M = {} resolved bands",
                2 * truncation
            ),
            Error::QuasiMomentumOutOfRange(k) => {
                write!(f, "quasi-momentum {k} is not finite or lies outside [-pi/L, pi/L]")
            }
            Error::EigenNoConvergence { index } => {
                write!(f, "QL iteration did not converge for eigenvalue {index}")
            }
            Error::FiberSolve { fiber } => {
                write!(f, "eigensolver did not converge on fiber j = {fiber}")
            }
            Error::NoOpenGaps => write!(
                f,
                "no open gaps in the band structure; increase the potential strength"
            ),
            Error::GapIndexOutOfRange { index, open_gaps } => write!(
                f,
                "gap index {index} out of range ({open_gaps} open gaps)"
            ),
            Error::EnergyInBand { energy, band } => {
                write!(f, "reference energy {energy} lies inside band {band}")
            }
            Error::NotSummable { epsilon } => write!(
                f,
                "Assumption B violated: epsilon = {epsilon} must be > 0 for summability"
            ),
            Error::PrimeNotInSet(p) => write!(f, "prime {p} is not in the truncation set"),
            Error::BranchAmbiguity { prime, t } => write!(
                f,
                "local factor for p = {prime} vanishes at t = {t}; log branch is ambiguous"
            ),
            Error::InvalidZeroTable(msg) => write!(f, "invalid zero table: {msg}"),
            Error::InsufficientZeros { requested, available } => write!(
                f,
                "insufficient zeros: requested {requested}, available {available}"
            ),
            Error::InsufficientEigenvalues { requested, available } => write!(
                f,
                "insufficient gap eigenvalues: requested {requested}, available {available}"
            ),
            Error::DegenerateFit => write!(f, "degenerate affine fit: eigenvalues coincide"),
            Error::ModelTooLarge { fibers, modes } => write!(
                f,
                "matrix model caps {fibers} x {modes} exceed 4096 fiber-mode pairs"
            ),
            Error::EmptyModel => write!(f, "matrix model has no fibers"),
        }
    }
}

impl core::error::Error for Error {}
