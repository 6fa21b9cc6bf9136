//! Odd spectral-shift staircases and the diagnostics built on them.
//!
//! Convention: `ξ = N_arith − N_glob`, so a new gap eigenvalue of
//! multiplicity `m` at `λ_k > 0` makes `ξ` jump by `+m`. The staircase is
//! right-continuous on `(0, ∞)`, `ξ(0) = 0` and `ξ(−λ) = −ξ(λ)`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::arithmetic::{local_factor_at, CoefficientFamily, HeckeEnsemble};
use crate::gapspec::GapSpectrum;
use crate::{Error, Result};

/// Odd piecewise-constant function with integer jumps at `±λ_k`.
///
/// Only the positive jump locations are stored.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Staircase {
    jumps: Vec<(f64, u64)>,
}

impl Staircase {
    /// Builds from arbitrary `(location, weight)` pairs.
    ///
    /// Locations enter through `|location|` (the odd extension makes `x` and
    /// `−x` the same jump pair); zero locations, zero weights and
    /// non-finite locations are dropped, coincident locations merged.
    pub fn from_jumps<I>(jumps: I) -> Self
    where
        I: IntoIterator<Item = (f64, u64)>,
    {
        let mut raw: Vec<(f64, u64)> = jumps
            .into_iter()
            .map(|(x, w)| (libm::fabs(x), w))
            .filter(|&(x, w)| x > 0.0 && x.is_finite() && w > 0)
            .collect();
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, u64)> = Vec::with_capacity(raw.len());
        for (x, w) in raw {
            match merged.last_mut() {
                Some(last) if last.0 == x => last.1 += w,
                _ => merged.push((x, w)),
            }
        }
        Self { jumps: merged }
    }

    /// Positive jump locations and weights, ascending.
    pub fn jumps(&self) -> &[(f64, u64)] {
        &self.jumps
    }

    pub fn is_empty(&self) -> bool {
        self.jumps.is_empty()
    }

    /// Sum of all positive-side weights.
    pub fn total(&self) -> u64 {
        self.jumps.iter().map(|j| j.1).sum()
    }

    pub fn eval(&self, lambda: f64) -> i64 {
        if lambda > 0.0 {
            self.count_up_to(lambda) as i64
        } else if lambda < 0.0 {
            -(self.count_up_to(-lambda) as i64)
        } else {
            0
        }
    }

    fn count_up_to(&self, x: f64) -> u64 {
        let k = self.jumps.partition_point(|j| j.0 <= x);
        self.jumps[..k].iter().map(|j| j.1).sum()
    }
}

/// Jump `+m_k` at each `λ_k`.
pub fn build_staircase(spectrum: &GapSpectrum) -> Staircase {
    Staircase {
        jumps: spectrum
            .values()
            .iter()
            .copied()
            .zip(spectrum.multiplicities().iter().copied())
            .collect(),
    }
}

pub fn eval_staircase(staircase: &Staircase, lambda: f64) -> i64 {
    staircase.eval(lambda)
}

/// Gaussian test function `φ(λ) = exp(−λ²/α²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFunction {
    alpha: f64,
}

impl TestFunction {
    pub fn gaussian(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidInput(
                "Assumption G violated: Gaussian width alpha must be positive",
            ));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn eval(&self, x: f64) -> f64 {
        let u = x / self.alpha;
        libm::exp(-(u * u))
    }

    /// `φ′(x) = −2x/α² · φ(x)`.
    pub fn derivative(&self, x: f64) -> f64 {
        -2.0 * x / (self.alpha * self.alpha) * self.eval(x)
    }

    /// `φ̂(t) = ∫ φ(x) e^{−itx} dx = α√π · exp(−α²t²/4)`.
    pub fn fourier(&self, t: f64) -> f64 {
        let u = 0.5 * self.alpha * t;
        self.alpha * libm::sqrt(PI) * libm::exp(-(u * u))
    }
}

/// Signed-jump pairing `Σ_k m_k (ψ(λ_k) − ψ(−λ_k))`.
///
/// This is `ψ` integrated against the signed measure
/// `Σ_k m_k (δ_{λ_k} − δ_{−λ_k})`; even probes give exactly zero.
pub fn krein_pairing<F: Fn(f64) -> f64>(staircase: &Staircase, probe: F) -> f64 {
    staircase
        .jumps()
        .iter()
        .map(|&(x, w)| w as f64 * (probe(x) - probe(-x)))
        .sum()
}

/// Uniform grid with nodes stored explicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformGrid {
    nodes: Vec<f64>,
}

impl UniformGrid {
    /// `count` nodes from `start` to `end` inclusive.
    pub fn new(start: f64, end: f64, count: usize) -> Result<Self> {
        if count < 2 || !(start < end) || !start.is_finite() || !end.is_finite() {
            return Err(Error::InvalidInput("grid needs count >= 2 and start < end"));
        }
        let h = (end - start) / (count - 1) as f64;
        let mut nodes: Vec<f64> = (0..count).map(|i| start + h * i as f64).collect();
        nodes[count - 1] = end;
        Ok(Self { nodes })
    }

    /// Grid on `[−half_width, half_width]` with spacing at most `max_step`,
    /// containing 0, with the negative half stored as exact negations.
    pub fn symmetric(half_width: f64, max_step: f64) -> Result<Self> {
        if !(half_width > 0.0 && max_step > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidInput(
                "symmetric grid needs positive width and step",
            ));
        }
        let half = libm::ceil(half_width / max_step).max(1.0) as usize;
        let h = half_width / half as f64;
        let mut nodes = alloc::vec![0.0; 2 * half + 1];
        for i in 1..=half {
            let t = if i == half { half_width } else { h * i as f64 };
            nodes[half + i] = t;
            nodes[half - i] = -t;
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.nodes[1] - self.nodes[0]
    }
}

/// `F(t) = Σ_{±λ_k} m_k φ(λ − t)` over the symmetric spectrum.
pub fn translated_trace(spectrum: &GapSpectrum, phi: &TestFunction, t: f64) -> f64 {
    spectrum
        .values()
        .iter()
        .zip(spectrum.multiplicities())
        .map(|(&x, &m)| m as f64 * (phi.eval(x - t) + phi.eval(-x - t)))
        .sum()
}

/// `F′(t)` from the closed-form Gaussian derivative.
pub fn translated_trace_derivative(spectrum: &GapSpectrum, phi: &TestFunction, t: f64) -> f64 {
    spectrum
        .values()
        .iter()
        .zip(spectrum.multiplicities())
        .map(|(&x, &m)| -(m as f64) * (phi.derivative(x - t) + phi.derivative(-x - t)))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StationaryKind {
    Max,
    Min,
}

impl StationaryKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            StationaryKind::Max => "max",
            StationaryKind::Min => "min",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryPoint {
    pub t: f64,
    pub kind: StationaryKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScanWarning {
    /// Grid step too large to separate neighbouring levels.
    CoarseGrid { step: f64, min_spacing: f64 },
    /// Test function wider than a quarter of the minimum level spacing.
    WideTestFunction { alpha: f64, min_spacing: f64 },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StationaryScan {
    pub roots: Vec<StationaryPoint>,
    pub warnings: Vec<ScanWarning>,
}

const BISECTION_TOLERANCE: f64 = 1e-10;

/// Locates stationary points of `F` on the grid and refines them by
/// bisection on `F′`.
pub fn stationary_scan(
    spectrum: &GapSpectrum,
    phi: &TestFunction,
    grid: &UniformGrid,
) -> StationaryScan {
    let mut scan = StationaryScan::default();
    if spectrum.is_empty() {
        return scan;
    }
    let closure = spectrum.symmetric_closure();
    let min_spacing = closure
        .windows(2)
        .map(|w| w[1].0 - w[0].0)
        .fold(f64::INFINITY, f64::min);
    let step = grid.step();
    if step > 0.5 * min_spacing {
        scan.warnings
            .push(ScanWarning::CoarseGrid { step, min_spacing });
    }
    if phi.alpha() > 0.25 * min_spacing {
        scan.warnings.push(ScanWarning::WideTestFunction {
            alpha: phi.alpha(),
            min_spacing,
        });
    }

    let fp = |t: f64| translated_trace_derivative(spectrum, phi, t);
    let nodes = grid.nodes();
    let values: Vec<f64> = nodes.iter().map(|&t| fp(t)).collect();
    for i in 0..nodes.len().saturating_sub(1) {
        let (a, b) = (values[i], values[i + 1]);
        if a == 0.0 {
            if i > 0 {
                let prev = values[i - 1];
                if prev != 0.0 && b != 0.0 && (prev > 0.0) != (b > 0.0) {
                    let kind = if prev > 0.0 {
                        StationaryKind::Max
                    } else {
                        StationaryKind::Min
                    };
                    scan.roots.push(StationaryPoint { t: nodes[i], kind });
                }
            }
            continue;
        }
        if b == 0.0 || (a > 0.0) == (b > 0.0) {
            continue;
        }
        let (mut lo, mut hi) = (nodes[i], nodes[i + 1]);
        let lo_positive = a > 0.0;
        while hi - lo > BISECTION_TOLERANCE {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let v = fp(mid);
            if v == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if (v > 0.0) == lo_positive {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let kind = if lo_positive {
            StationaryKind::Max
        } else {
            StationaryKind::Min
        };
        scan.roots.push(StationaryPoint {
            t: 0.5 * (lo + hi),
            kind,
        });
    }
    scan
}

/// Exploratory density `Re[(1/2πi) d/dt Σ_p log A_p(t)]` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftDensity {
    pub grid: Vec<f64>,
    /// `Σ_p log A_p(t)` with the phase tracked continuously from the node
    /// nearest `t = 0`.
    pub log_sum: Vec<Complex64>,
    pub density: Vec<f64>,
}

impl ShiftDensity {
    pub const LABEL: &'static str = "EXPLORATORY";
}

const BRANCH_FLOOR: f64 = 1e-12;

fn wrap_phase(mut d: f64) -> f64 {
    while d > PI {
        d -= 2.0 * PI;
    }
    while d <= -PI {
        d += 2.0 * PI;
    }
    d
}

/// Three-point derivative on a nonuniform ascending grid.
fn nonuniform_derivative(x: &[f64], f: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut out = alloc::vec![0.0; n];
    for i in 0..n {
        let (i0, i1, i2) = if i == 0 {
            (0, 1, 2)
        } else if i == n - 1 {
            (n - 3, n - 2, n - 1)
        } else {
            (i - 1, i, i + 1)
        };
        let (h1, h2) = (x[i1] - x[i0], x[i2] - x[i1]);
        let (c0, c1, c2) = if i == 0 {
            (
                -(2.0 * h1 + h2) / (h1 * (h1 + h2)),
                (h1 + h2) / (h1 * h2),
                -h1 / (h2 * (h1 + h2)),
            )
        } else if i == n - 1 {
            (
                h2 / (h1 * (h1 + h2)),
                -(h1 + h2) / (h1 * h2),
                (2.0 * h2 + h1) / (h2 * (h1 + h2)),
            )
        } else {
            (
                -h2 / (h1 * (h1 + h2)),
                (h2 - h1) / (h1 * h2),
                h1 / (h2 * (h1 + h2)),
            )
        };
        out[i] = c0 * f[i0] + c1 * f[i1] + c2 * f[i2];
    }
    out
}

pub fn arithmetic_shift_density(
    ensemble: &HeckeEnsemble,
    family: &CoefficientFamily,
    grid: &[f64],
) -> Result<ShiftDensity> {
    if grid.len() < 3 || grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidInput(
            "density grid needs >= 3 strictly ascending points",
        ));
    }
    let anchor = grid
        .iter()
        .enumerate()
        .min_by(|a, b| libm::fabs(*a.1).total_cmp(&libm::fabs(*b.1)))
        .map(|(i, _)| i)
        .expect("grid is nonempty");

    let n = grid.len();
    let mut log_modulus = alloc::vec![0.0; n];
    let mut phase = alloc::vec![0.0; n];
    let primes = ensemble.primes().as_slice();
    for (index, &p) in primes.iter().enumerate() {
        let factors: Vec<Complex64> = grid
            .iter()
            .map(|&t| local_factor_at(ensemble, family, index, t))
            .collect();
        for (&t, a) in grid.iter().zip(&factors) {
            if a.norm() < BRANCH_FLOOR {
                return Err(Error::BranchAmbiguity { prime: p, t });
            }
        }
        let args: Vec<f64> = factors.iter().map(|a| a.arg()).collect();
        let mut tracked = alloc::vec![0.0; n];
        tracked[anchor] = args[anchor];
        for i in (anchor + 1)..n {
            tracked[i] = tracked[i - 1] + wrap_phase(args[i] - args[i - 1]);
        }
        for i in (0..anchor).rev() {
            tracked[i] = tracked[i + 1] + wrap_phase(args[i] - args[i + 1]);
        }
        for i in 0..n {
            log_modulus[i] += libm::log(factors[i].norm());
            phase[i] += tracked[i];
        }
    }
    let derivative = nonuniform_derivative(grid, &phase);
    Ok(ShiftDensity {
        grid: grid.to_vec(),
        log_sum: log_modulus
            .iter()
            .zip(&phase)
            .map(|(&r, &i)| Complex64::new(r, i))
            .collect(),
        density: derivative.iter().map(|d| d / (2.0 * PI)).collect(),
    })
}
