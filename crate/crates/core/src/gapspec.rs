//! Gap spectrum of the truncated arithmetic Dirac operator.
//!
//! Every fiber `(n, j, m)` contributes the pair `±(E_n(κ_j) − E* + m[m])`.
//! A value counts as a gap eigenvalue when it lies strictly inside a
//! bounded gap of the chiral band set `±([α_n, β_n] − E*)`.

use alloc::vec::Vec;

use crate::arithmetic::MassShifts;
use crate::floquet::BandStructure;
use crate::{Error, Result};

/// Minimum distance from every band image for a value to count as a gap
/// eigenvalue.
pub const MEMBERSHIP_MARGIN: f64 = 1e-8;
/// Positive values closer than this (after rounding) share one level.
pub const GROUPING_TOLERANCE: f64 = 1e-9;
const ROUNDING_SCALE: f64 = 1e12;

/// Closed intervals `±([α_n, β_n] − E*)`, sorted and merged.
#[derive(Debug, Clone, PartialEq)]
pub struct DiracBandSet {
    intervals: Vec<(f64, f64)>,
}

impl DiracBandSet {
    /// Merges `[lo, hi]` intervals (and their negations) into a sorted set.
    pub fn from_intervals(raw: &[(f64, f64)]) -> Self {
        let mut all: Vec<(f64, f64)> = raw
            .iter()
            .flat_map(|&(lo, hi)| [(lo, hi), (-hi, -lo)])
            .collect();
        all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(all.len());
        for (lo, hi) in all {
            match merged.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        Self { intervals: merged }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    /// Number of bounded gaps between consecutive intervals.
    pub fn gap_count(&self) -> usize {
        self.intervals.len().saturating_sub(1)
    }

    /// Bounded gaps `(hi_k, lo_{k+1})`.
    pub fn gaps(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.intervals.windows(2).map(|w| (w[0].1, w[1].0))
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.intervals.len();
        (0..n).all(|i| {
            let (lo, hi) = self.intervals[i];
            let (mlo, mhi) = self.intervals[n - 1 - i];
            lo == -mhi && hi == -mlo
        })
    }

    /// Index of the bounded gap holding `x` at distance greater than
    /// `margin` from both neighbouring intervals.
    ///
    /// Values beyond the outermost band image are unresolved (higher bands
    /// are not stored) and never match.
    pub fn gap_index(&self, x: f64, margin: f64) -> Option<usize> {
        let k = self.intervals.partition_point(|iv| iv.1 < x);
        if k == 0 || k == self.intervals.len() {
            return None;
        }
        let below = self.intervals[k - 1].1;
        let above = self.intervals[k].0;
        (x - below > margin && above - x > margin).then_some(k - 1)
    }
}

/// Chiral band set of `bands` around the reference energy `e_star`.
pub fn dirac_band_set(bands: &BandStructure, e_star: f64) -> Result<DiracBandSet> {
    if let Some(band) = bands
        .edges()
        .iter()
        .position(|e| e.lower <= e_star && e_star <= e.upper)
    {
        return Err(Error::EnergyInBand {
            energy: e_star,
            band,
        });
    }
    let raw: Vec<(f64, f64)> = bands
        .edges()
        .iter()
        .map(|e| (e.lower - e_star, e.upper - e_star))
        .collect();
    Ok(DiracBandSet::from_intervals(&raw))
}

/// Band `n`, grid node `j` (both 0-based) and mode `m` (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FiberIndex {
    pub n: usize,
    pub j: usize,
    pub m: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapEigenvalue {
    pub value: f64,
    pub fiber: FiberIndex,
    /// Index of the Dirac gap holding `value`.
    pub gap: usize,
}

/// Enumerates gap eigenvalues in `(n, j, m, sign)` order, `+` before `−`.
pub fn fiber_gap_eigenvalues(
    bands: &BandStructure,
    e_star: f64,
    shifts: &MassShifts,
    band_set: &DiracBandSet,
) -> Vec<GapEigenvalue> {
    let mut out = Vec::new();
    let last_gap = band_set.gap_count().saturating_sub(1);
    for n in 0..bands.n_bands() {
        for (j, &energy) in bands.band(n).iter().enumerate() {
            let q = energy - e_star;
            for (m, &mass) in shifts.values().iter().enumerate() {
                let v = q + mass;
                if let Some(gap) = band_set.gap_index(v, MEMBERSHIP_MARGIN) {
                    let fiber = FiberIndex { n, j, m: m + 1 };
                    out.push(GapEigenvalue {
                        value: v,
                        fiber,
                        gap,
                    });
                    out.push(GapEigenvalue {
                        value: -v,
                        fiber,
                        gap: last_gap - gap,
                    });
                }
            }
        }
    }
    out
}

/// Positive gap levels `λ_k` with multiplicities and contributing fibers.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GapSpectrum {
    values: Vec<f64>,
    multiplicities: Vec<u64>,
    fibers: Vec<Vec<FiberIndex>>,
}

impl GapSpectrum {
    /// Levels given directly, each with an empty provenance list.
    pub fn from_levels(values: Vec<f64>, multiplicities: Vec<u64>) -> Result<Self> {
        if values.len() != multiplicities.len() {
            return Err(Error::InvalidInput(
                "values and multiplicities differ in length",
            ));
        }
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0))
            || values.windows(2).any(|w| w[0] >= w[1])
            || multiplicities.contains(&0)
        {
            return Err(Error::InvalidInput(
                "levels must be positive, strictly ascending, with positive multiplicities",
            ));
        }
        let fibers = alloc::vec![Vec::new(); values.len()];
        Ok(Self {
            values,
            multiplicities,
            fibers,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn multiplicities(&self) -> &[u64] {
        &self.multiplicities
    }

    pub fn fibers(&self, k: usize) -> &[FiberIndex] {
        &self.fibers[k]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total_multiplicity(&self) -> u64 {
        self.multiplicities.iter().sum()
    }

    /// Full spectrum `{±λ_k}` ascending, with multiplicities.
    pub fn symmetric_closure(&self) -> Vec<(f64, u64)> {
        let neg = self
            .values
            .iter()
            .zip(&self.multiplicities)
            .rev()
            .map(|(&v, &m)| (-v, m));
        let pos = self
            .values
            .iter()
            .zip(&self.multiplicities)
            .map(|(&v, &m)| (v, m));
        neg.chain(pos).collect()
    }
}

fn round_level(v: f64) -> f64 {
    libm::round(v * ROUNDING_SCALE) / ROUNDING_SCALE
}

/// Groups the positive values into levels.
///
/// Values are rounded to 12 decimals, sorted, and a new level starts when a
/// value exceeds the first value of the current level by more than
/// [`GROUPING_TOLERANCE`]. The level's value is that first value.
pub fn aggregate_spectrum(values: &[GapEigenvalue]) -> GapSpectrum {
    let mut positive: Vec<(f64, FiberIndex)> = values
        .iter()
        .filter(|g| g.value > 0.0)
        .map(|g| (round_level(g.value), g.fiber))
        .collect();
    positive.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut spectrum = GapSpectrum::default();
    let mut start = f64::NAN;
    for (v, fiber) in positive {
        if spectrum.values.is_empty() || v - start > GROUPING_TOLERANCE {
            start = v;
            spectrum.values.push(v);
            spectrum.multiplicities.push(0);
            spectrum.fibers.push(Vec::new());
        }
        *spectrum.multiplicities.last_mut().expect("level exists") += 1;
        spectrum
            .fibers
            .last_mut()
            .expect("level exists")
            .push(fiber);
    }
    spectrum
}
