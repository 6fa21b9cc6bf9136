//! Floquet–Bloch bands of the even periodic Hill operator
//! `H = −d²/dy² + U(y)`, `U(y) = Σ_r c_r cos(2π r y / L)`.
//!
//! Each quasi-momentum fiber is discretized in the plane-wave basis
//! `e^{i(κ + 2πm/L)y}`, `m = −M..=M`: the kinetic term is diagonal and each
//! cosine harmonic `r` contributes `c_r / 2` on the `r`-th off-diagonals.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::eigen::SymmetricMatrix;
use crate::{Error, Result};

/// Gap widths at or below this are treated as closed.
pub const GAP_TOLERANCE: f64 = 1e-6;

/// Slack allowed on `|κ| ≤ π/L`.
const KAPPA_SLACK: f64 = 1e-12;

/// An even `L`-periodic potential given by its cosine coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    period: f64,
    /// `cosine_coefficients[r - 1]` is `c_r`.
    cosine_coefficients: Vec<f64>,
}

impl PotentialSpec {
    pub fn new(period: f64, cosine_coefficients: Vec<f64>) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidInput("period L must be positive and finite"));
        }
        if cosine_coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("cosine coefficients must be finite"));
        }
        Ok(Self {
            period,
            cosine_coefficients,
        })
    }

    /// `U(y) = 2 cos(2π y)` with `L = 1`.
    pub fn mathieu() -> Self {
        Self {
            period: 1.0,
            cosine_coefficients: alloc::vec![2.0],
        }
    }

    pub fn free(period: f64) -> Result<Self> {
        Self::new(period, Vec::new())
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn cosine_coefficients(&self) -> &[f64] {
        &self.cosine_coefficients
    }

    /// Highest harmonic with a nonzero coefficient (0 for the free case).
    pub fn harmonics(&self) -> usize {
        self.cosine_coefficients
            .iter()
            .rposition(|&c| c != 0.0)
            .map_or(0, |i| i + 1)
    }

    /// `c_r` for `r ≥ 1`, zero beyond the stored list.
    pub fn coefficient(&self, r: usize) -> f64 {
        if r == 0 {
            return 0.0;
        }
        self.cosine_coefficients.get(r - 1).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, y: f64) -> f64 {
        self.cosine_coefficients
            .iter()
            .enumerate()
            .map(|(i, c)| c * libm::cos(2.0 * PI * (i + 1) as f64 * y / self.period))
            .sum()
    }
}

/// Uniform quasi-momentum nodes on `[−π/L, π/L]`, endpoints and `0` included.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiMomentumGrid {
    period: f64,
    nodes: Vec<f64>,
}

impl QuasiMomentumGrid {
    /// `n_kappa` must be odd and at least 3. Nodes left of the center are
    /// stored as exact negations of the nodes right of it.
    pub fn new(n_kappa: usize, period: f64) -> Result<Self> {
        if n_kappa < 3 || n_kappa.is_multiple_of(2) {
            return Err(Error::InvalidInput("n_kappa must be odd and >= 3"));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidInput("period L must be positive and finite"));
        }
        let center = (n_kappa - 1) / 2;
        let kmax = PI / period;
        let mut nodes = alloc::vec![0.0; n_kappa];
        for i in 1..=center {
            let k = kmax * (i as f64 / center as f64);
            nodes[center + i] = k;
            nodes[center - i] = -k;
        }
        Ok(Self { period, nodes })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn center(&self) -> usize {
        (self.nodes.len() - 1) / 2
    }

    /// Index of `−κ_j`.
    pub fn mirror(&self, j: usize) -> usize {
        self.nodes.len() - 1 - j
    }

    pub fn step(&self) -> f64 {
        2.0 * PI / self.period / (self.nodes.len() - 1) as f64
    }

    /// Trapezoid weights; they sum to `2π/L`.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let h = self.step();
        let last = self.nodes.len() - 1;
        (0..self.nodes.len())
            .map(|j| if j == 0 || j == last { 0.5 * h } else { h })
            .collect()
    }
}

/// An open gap `(β_n, α_{n+1})` between bands `n` and `n + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapInterval {
    pub index: usize,
    pub lower: f64,
    pub upper: f64,
}

impl GapInterval {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }
}

/// Band range `[α_n, β_n]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandEdges {
    pub lower: f64,
    pub upper: f64,
}

/// Band functions `E_n(κ_j)` on a quasi-momentum grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BandStructure {
    grid: QuasiMomentumGrid,
    /// `bands[n][j]`.
    bands: Vec<Vec<f64>>,
    edges: Vec<BandEdges>,
    gaps: Vec<GapInterval>,
    truncation: usize,
}

impl BandStructure {
    /// Wraps precomputed band values, deriving edges and open gaps.
    ///
    /// Rows must have one value per grid node and be ordered per fiber.
    pub fn from_bands(
        grid: QuasiMomentumGrid,
        bands: Vec<Vec<f64>>,
        truncation: usize,
    ) -> Result<Self> {
        if bands.is_empty() {
            return Err(Error::InvalidInput(
                "band structure needs at least one band",
            ));
        }
        if bands.iter().any(|row| row.len() != grid.len()) {
            return Err(Error::InvalidInput("band rows must match the grid length"));
        }
        if bands.iter().flatten().any(|e| !e.is_finite()) {
            return Err(Error::InvalidInput("band energies must be finite"));
        }
        for pair in bands.windows(2) {
            if pair[0].iter().zip(&pair[1]).any(|(lo, hi)| lo > hi) {
                return Err(Error::InvalidInput(
                    "bands must be ascending in every fiber",
                ));
            }
        }
        let edges: Vec<BandEdges> = bands
            .iter()
            .map(|row| BandEdges {
                lower: row.iter().copied().fold(f64::INFINITY, f64::min),
                upper: row.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            })
            .collect();
        let gaps = edges
            .windows(2)
            .enumerate()
            .filter(|(_, pair)| pair[1].lower - pair[0].upper > GAP_TOLERANCE)
            .map(|(index, pair)| GapInterval {
                index,
                lower: pair[0].upper,
                upper: pair[1].lower,
            })
            .collect();
        Ok(Self {
            grid,
            bands,
            edges,
            gaps,
            truncation,
        })
    }

    pub fn grid(&self) -> &QuasiMomentumGrid {
        &self.grid
    }

    pub fn n_bands(&self) -> usize {
        self.bands.len()
    }

    pub fn band(&self, n: usize) -> &[f64] {
        &self.bands[n]
    }

    pub fn bands(&self) -> &[Vec<f64>] {
        &self.bands
    }

    pub fn energy(&self, n: usize, j: usize) -> f64 {
        self.bands[n][j]
    }

    pub fn edges(&self) -> &[BandEdges] {
        &self.edges
    }

    /// Open gaps only, in band order.
    pub fn gaps(&self) -> &[GapInterval] {
        &self.gaps
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn period(&self) -> f64 {
        self.grid.period()
    }
}

/// Plane-wave fiber matrix at quasi-momentum `kappa`, size `2M + 1`.
///
/// Row `i` corresponds to the plane wave `m = i − M`.
pub fn build_fiber_matrix(
    potential: &PotentialSpec,
    kappa: f64,
    truncation: usize,
) -> Result<SymmetricMatrix> {
    let harmonics = potential.harmonics();
    if truncation < harmonics {
        return Err(Error::TruncationTooSmall {
            truncation,
            harmonics,
        });
    }
    let kmax = PI / potential.period();
    if !kappa.is_finite() || libm::fabs(kappa) > kmax + KAPPA_SLACK {
        return Err(Error::QuasiMomentumOutOfRange(kappa));
    }
    let dim = 2 * truncation + 1;
    let mut matrix = SymmetricMatrix::zeros(dim);
    let reciprocal = 2.0 * PI / potential.period();
    for i in 0..dim {
        let m = i as f64 - truncation as f64;
        let k = kappa + reciprocal * m;
        matrix.set(i, i, k * k);
        for r in 1..=harmonics.min(dim - 1 - i) {
            let c = potential.coefficient(r);
            if c != 0.0 {
                matrix.set(i, i + r, 0.5 * c);
            }
        }
    }
    Ok(matrix)
}

/// The `n_bands` lowest eigenvalues of the fiber at `kappa`, ascending.
pub fn fiber_eigenvalues(
    potential: &PotentialSpec,
    kappa: f64,
    truncation: usize,
    n_bands: usize,
) -> Result<Vec<f64>> {
    if n_bands > 2 * truncation {
        return Err(Error::TooManyBands {
            n_bands,
            truncation,
        });
    }
    let mut values = build_fiber_matrix(potential, kappa, truncation)?.eigenvalues()?;
    values.truncate(n_bands);
    Ok(values)
}

/// Solves fibers with `κ_j ≥ 0` and fills `κ_j < 0` by mirror copy, so
/// `E_n(κ_j) = E_n(−κ_j)` holds bitwise.
pub fn compute_band_structure(
    potential: &PotentialSpec,
    grid: &QuasiMomentumGrid,
    truncation: usize,
    n_bands: usize,
) -> Result<BandStructure> {
    if n_bands == 0 {
        return Err(Error::InvalidInput("n_bands must be >= 1"));
    }
    if n_bands > 2 * truncation {
        return Err(Error::TooManyBands {
            n_bands,
            truncation,
        });
    }
    if grid.period() != potential.period() {
        return Err(Error::InvalidInput("grid and potential periods differ"));
    }
    let mut bands = alloc::vec![alloc::vec![0.0; grid.len()]; n_bands];
    for j in grid.center()..grid.len() {
        let values = match fiber_eigenvalues(potential, grid.nodes()[j], truncation, n_bands) {
            Ok(v) => v,
            Err(Error::EigenNoConvergence { .. }) => return Err(Error::FiberSolve { fiber: j }),
            Err(e) => return Err(e),
        };
        let mirror = grid.mirror(j);
        for (n, e) in values.into_iter().enumerate() {
            bands[n][j] = e;
            bands[n][mirror] = e;
        }
    }
    BandStructure::from_bands(grid.clone(), bands, truncation)
}

/// Midpoint of the `gap_index`-th open gap.
pub fn select_reference_energy(bands: &BandStructure, gap_index: usize) -> Result<f64> {
    let gaps = bands.gaps();
    if gaps.is_empty() {
        return Err(Error::NoOpenGaps);
    }
    gaps.get(gap_index)
        .map(GapInterval::midpoint)
        .ok_or(Error::GapIndexOutOfRange {
            index: gap_index,
            open_gaps: gaps.len(),
        })
}
