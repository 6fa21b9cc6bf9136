//! Zero ordinates, affine alignment and staircase mismatch diagnostics.

use alloc::string::String;
use alloc::vec::Vec;

use crate::gapspec::GapSpectrum;
use crate::shift::Staircase;
use crate::{Error, Result};

/// Bundled ordinates of the first 100 nontrivial zeros (9 decimals).
const EMBEDDED_ZEROS: &str = include_str!("../data/zeros.csv");
pub const MIN_TABLE_SIZE: usize = 100;
const FIRST_ZERO_GATE: (f64, f64) = (14.13, 14.14);

/// Ascending zero ordinates `γ_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroTable {
    ordinates: Vec<f64>,
    source: String,
}

impl ZeroTable {
    pub fn embedded() -> Self {
        Self::parse_csv(EMBEDDED_ZEROS, "embedded").expect("bundled zero table is valid")
    }

    /// Parses a one-column CSV with header `gamma`.
    pub fn parse_csv(text: &str, source: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        if lines.next() != Some("gamma") {
            return Err(Error::InvalidZeroTable("expected header `gamma`"));
        }
        let ordinates = lines
            .map(|l| {
                l.parse::<f64>()
                    .map_err(|_| Error::InvalidZeroTable("unparsable ordinate"))
            })
            .collect::<Result<Vec<f64>>>()?;
        Self::from_ordinates(ordinates, source)
    }

    pub fn from_ordinates(ordinates: Vec<f64>, source: &str) -> Result<Self> {
        if ordinates.len() < MIN_TABLE_SIZE {
            return Err(Error::InvalidZeroTable("fewer than 100 ordinates"));
        }
        if ordinates.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
            return Err(Error::InvalidZeroTable(
                "ordinates must be positive and finite",
            ));
        }
        if ordinates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidZeroTable(
                "ordinates must be strictly ascending",
            ));
        }
        let first = ordinates[0];
        if !(FIRST_ZERO_GATE.0 < first && first < FIRST_ZERO_GATE.1) {
            return Err(Error::InvalidZeroTable(
                "first ordinate outside (14.13, 14.14)",
            ));
        }
        Ok(Self {
            ordinates,
            source: String::from(source),
        })
    }

    pub fn ordinates(&self) -> &[f64] {
        &self.ordinates
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.ordinates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ordinates.is_empty()
    }

    /// The first `k` ordinates.
    pub fn first(&self, k: usize) -> Result<&[f64]> {
        self.ordinates.get(..k).ok_or(Error::InsufficientZeros {
            requested: k,
            available: self.ordinates.len(),
        })
    }
}

/// Orientation-preserving affine map `λ ↦ aλ + b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub a: f64,
    pub b: f64,
}

impl AffineMap {
    pub const IDENTITY: AffineMap = AffineMap { a: 1.0, b: 0.0 };

    pub fn apply(&self, x: f64) -> f64 {
        self.a * x + self.b
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineFit {
    pub map: AffineMap,
    /// Least squares gave `a ≤ 0`; the endpoint-slope fallback was used.
    pub fallback: bool,
}

/// `Σ_k (aλ_k + b − γ_k)²`.
pub fn fit_residual(map: &AffineMap, lambdas: &[f64], gammas: &[f64]) -> f64 {
    lambdas
        .iter()
        .zip(gammas)
        .map(|(&l, &g)| {
            let d = map.apply(l) - g;
            d * d
        })
        .sum()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Least-squares `(a, b)` matching the first `k` eigenvalues to the first
/// `k` zero ordinates.
pub fn fit_affine(lambdas: &[f64], zeros: &ZeroTable, k: usize) -> Result<AffineFit> {
    if k < 2 {
        return Err(Error::InvalidInput("affine fit needs K >= 2"));
    }
    let x = lambdas.get(..k).ok_or(Error::InsufficientEigenvalues {
        requested: k,
        available: lambdas.len(),
    })?;
    let y = zeros.first(k)?;
    let (mx, my) = (mean(x), mean(y));
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateFit);
    }
    let a = sxy / sxx;
    if a > 0.0 {
        return Ok(AffineFit {
            map: AffineMap { a, b: my - a * mx },
            fallback: false,
        });
    }
    let span = x[k - 1] - x[0];
    if span == 0.0 {
        return Err(Error::DegenerateFit);
    }
    let a = (y[k - 1] - y[0]) / span;
    Ok(AffineFit {
        map: AffineMap { a, b: my - a * mx },
        fallback: true,
    })
}

/// `∫ |A − B|` over `[0, T]` (sign +1) or `[−T, 0]` (sign −1), swept
/// outward from 0.
fn l1_mismatch_half(a: &Staircase, b: &Staircase, window: f64, sign: f64) -> f64 {
    let mut breaks: Vec<f64> = a
        .jumps()
        .iter()
        .chain(b.jumps())
        .map(|j| j.0)
        .filter(|&x| x < window)
        .collect();
    breaks.push(0.0);
    breaks.push(window);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    breaks
        .windows(2)
        .map(|w| {
            let mid = sign * (0.5 * (w[0] + w[1]));
            let height = (a.eval(mid) - b.eval(mid)).unsigned_abs() as f64;
            height * ((sign * w[1]) - (sign * w[0])).abs()
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepMismatch {
    /// `(1/2T) ∫_{−T}^{T} |ξ_A − ξ_Z|`.
    pub value: f64,
    pub negative_half: f64,
    pub positive_half: f64,
}

/// Normalized L¹ distance between the mapped model staircase (jumps
/// `m_k` at `±(aλ_k + b)`) and the zero staircase (unit jumps at `±γ_k`).
pub fn step_mismatch(
    model: &Staircase,
    zeros: &[f64],
    map: &AffineMap,
    window: f64,
) -> Result<StepMismatch> {
    if !(window > 0.0 && window.is_finite()) {
        return Err(Error::InvalidInput("staircase window T must be positive"));
    }
    let mapped = Staircase::from_jumps(model.jumps().iter().map(|&(x, w)| (map.apply(x), w)));
    let zero_staircase = Staircase::from_jumps(zeros.iter().map(|&g| (g, 1)));
    let positive_half = l1_mismatch_half(&mapped, &zero_staircase, window, 1.0);
    let negative_half = l1_mismatch_half(&mapped, &zero_staircase, window, -1.0);
    Ok(StepMismatch {
        value: (negative_half + positive_half) / (2.0 * window),
        negative_half,
        positive_half,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticFlag {
    AffineFallback,
    /// The window extends past the last tabulated zero.
    ZeroTableShorterThanWindow,
}

impl DiagnosticFlag {
    pub fn as_str(&self) -> &'static str {
        match self {
            DiagnosticFlag::AffineFallback => "affine_fallback",
            DiagnosticFlag::ZeroTableShorterThanWindow => "zero_table_shorter_than_window",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsReport {
    pub k: usize,
    pub map: AffineMap,
    /// `Δ_k = aλ_k + b − γ_k`.
    pub deviations: Vec<f64>,
    pub mae: f64,
    pub max_abs: f64,
    pub e_step: f64,
    pub window: f64,
    pub flags: Vec<DiagnosticFlag>,
}

pub fn diagnostics(
    fit: &AffineFit,
    spectrum: &GapSpectrum,
    zeros: &ZeroTable,
    k: usize,
    window: f64,
) -> Result<DiagnosticsReport> {
    let lambdas = spectrum
        .values()
        .get(..k)
        .ok_or(Error::InsufficientEigenvalues {
            requested: k,
            available: spectrum.len(),
        })?;
    let gammas = zeros.first(k)?;
    let deviations: Vec<f64> = lambdas
        .iter()
        .zip(gammas)
        .map(|(&l, &g)| fit.map.apply(l) - g)
        .collect();
    let mae = deviations.iter().map(|d| libm::fabs(*d)).sum::<f64>() / k as f64;
    let max_abs = deviations
        .iter()
        .fold(0.0_f64, |m, d| m.max(libm::fabs(*d)));
    let staircase = crate::shift::build_staircase(spectrum);
    let e_step = step_mismatch(&staircase, zeros.ordinates(), &fit.map, window)?.value;
    let mut flags = Vec::new();
    if fit.fallback {
        flags.push(DiagnosticFlag::AffineFallback);
    }
    if zeros.ordinates().last().is_some_and(|&g| g < window) {
        flags.push(DiagnosticFlag::ZeroTableShorterThanWindow);
    }
    Ok(DiagnosticsReport {
        k,
        map: fit.map,
        deviations,
        mae,
        max_abs,
        e_step,
        window,
        flags,
    })
}
