//! Fiber trace `Θ(φ)` and its separated Fourier-side representation.
//!
//! With `φ̂(t) = ∫ φ(x) e^{−itx} dx`, the fiber sum
//! `Θ = 2 Σ_n Σ_j w_j (1/N_H) Σ_m φ(E_n(κ_j) − E* + m[m])` equals
//! `(1/π) ∫ φ̂(t) Σ_n G_n(t) A(t) dt`, where
//! `G_n(t) = Σ_j w_j e^{it(E_n(κ_j) − E*)}` and
//! `A(t) = (1/N_H) Σ_m e^{it m[m]}`. The fiber sum is the reference value;
//! the `1/π` prefactor is the one that reproduces it.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::arithmetic::{local_factor_at, CoefficientFamily, HeckeEnsemble, MassShifts};
use crate::floquet::BandStructure;
use crate::shift::{TestFunction, UniformGrid};
use crate::{Error, Result};

/// Prefactor of the separated representation.
pub const SEPARATED_PREFACTOR: f64 = 1.0 / PI;
/// Upper bound on the trapezoid step in `t`.
pub const DEFAULT_MAX_STEP: f64 = 0.01;
/// `T_t` is chosen so that `φ̂(T_t)` drops below this.
pub const FOURIER_CUTOFF: f64 = 1e-14;
/// The truncated tail of the `t` integral must stay below this.
pub const TAIL_TOLERANCE: f64 = 1e-10;

fn cis(x: f64) -> Complex64 {
    Complex64::new(libm::cos(x), libm::sin(x))
}

/// `2 Σ_n Σ_j w_j (1/N_H) Σ_m φ(E_n(κ_j) − E* + m[m])`.
pub fn theta_fiber(
    phi: &TestFunction,
    bands: &BandStructure,
    e_star: f64,
    shifts: &MassShifts,
) -> f64 {
    let weights = bands.grid().trapezoid_weights();
    let n_modes = shifts.len() as f64;
    let mut total = 0.0;
    for n in 0..bands.n_bands() {
        for (j, &energy) in bands.band(n).iter().enumerate() {
            let q = energy - e_star;
            let fiber: f64 = shifts.values().iter().map(|&m| phi.eval(q + m)).sum();
            total += weights[j] * fiber / n_modes;
        }
    }
    2.0 * total
}

/// Trapezoid quadrature of `e^{it(E_n(κ) − E*)}` over the κ grid.
pub fn geometric_factor(bands: &BandStructure, e_star: f64, n: usize, t: f64) -> Complex64 {
    let weights = bands.grid().trapezoid_weights();
    geometric_factor_with(&weights, bands.band(n), e_star, t)
}

/// Neumaier-compensated running sum.
#[derive(Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if libm::fabs(self.sum) >= libm::fabs(x) {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

fn geometric_factor_with(weights: &[f64], band: &[f64], e_star: f64, t: f64) -> Complex64 {
    let (mut re, mut im) = (CompensatedSum::default(), CompensatedSum::default());
    for (&e, &w) in band.iter().zip(weights) {
        let z = cis(t * (e - e_star)) * w;
        re.add(z.re);
        im.add(z.im);
    }
    Complex64::new(re.value(), im.value())
}

/// `A_joint(t)` and `A_prod(t)` on the nodes of `t_grid`.
pub fn arithmetic_factors(
    ensemble: &HeckeEnsemble,
    family: &CoefficientFamily,
    shifts: &MassShifts,
    t_grid: &[f64],
) -> (Vec<Complex64>, Vec<Complex64>) {
    let n_modes = shifts.len() as f64;
    let joint = t_grid
        .iter()
        .map(|&t| {
            let s: Complex64 = shifts.values().iter().map(|&m| cis(t * m)).sum();
            s / n_modes
        })
        .collect();
    let product = t_grid
        .iter()
        .map(|&t| {
            (0..ensemble.primes().len()).fold(Complex64::new(1.0, 0.0), |acc, i| {
                acc * local_factor_at(ensemble, family, i, t)
            })
        })
        .collect();
    (joint, product)
}

/// Symmetric `t` grid for a Gaussian test function.
///
/// The step keeps every alias `x ± 2π/h` of a fiber value at least `7α`
/// outside `[−max_abs_energy, max_abs_energy]`; `T_t` starts where
/// `φ̂ < 1e−14` and widens until the tail bound
/// `2 · total_mass · erfc(αT_t/2)` drops below `1e−10`.
pub fn trace_time_grid(
    phi: &TestFunction,
    max_abs_energy: f64,
    total_mass: f64,
    max_step: f64,
) -> Result<UniformGrid> {
    if !(max_step > 0.0) {
        return Err(Error::InvalidInput("t step must be positive"));
    }
    let alpha = phi.alpha();
    let step = max_step.min(2.0 * PI / (max_abs_energy + 7.0 * alpha));
    let peak = alpha * libm::sqrt(PI);
    let mut t_max = if peak > FOURIER_CUTOFF {
        2.0 / alpha * libm::sqrt(libm::log(peak / FOURIER_CUTOFF))
    } else {
        step
    };
    while 2.0 * total_mass * libm::erfc(0.5 * alpha * t_max) > TAIL_TOLERANCE {
        t_max *= 1.25;
    }
    UniformGrid::symmetric(t_max, step)
}

/// Geometric and arithmetic factors sampled on a common `t` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceFactors {
    pub t_grid: UniformGrid,
    /// `geometric[n][i]` is `G_n(t_i)`.
    pub geometric: Vec<Vec<Complex64>>,
    pub a_joint: Vec<Complex64>,
    pub a_prod: Vec<Complex64>,
}

impl TraceFactors {
    pub fn compute(
        bands: &BandStructure,
        e_star: f64,
        ensemble: &HeckeEnsemble,
        family: &CoefficientFamily,
        shifts: &MassShifts,
        t_grid: UniformGrid,
    ) -> Self {
        let weights = bands.grid().trapezoid_weights();
        let geometric = (0..bands.n_bands())
            .map(|n| {
                t_grid
                    .nodes()
                    .iter()
                    .map(|&t| geometric_factor_with(&weights, bands.band(n), e_star, t))
                    .collect()
            })
            .collect();
        let (a_joint, a_prod) = arithmetic_factors(ensemble, family, shifts, t_grid.nodes());
        Self {
            t_grid,
            geometric,
            a_joint,
            a_prod,
        }
    }

    /// `sup_t |A_joint(t) − A_prod(t)|`.
    pub fn euler_gap(&self) -> f64 {
        self.a_joint
            .iter()
            .zip(&self.a_prod)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparatedTrace {
    pub value: f64,
    /// Imaginary part of the quadrature; zero up to rounding.
    pub imag_residual: f64,
}

/// `(1/π) ∫ φ̂(t) (Σ_n G_n(t)) A_joint(t) dt` by the trapezoid rule.
pub fn theta_separated(phi: &TestFunction, factors: &TraceFactors) -> SeparatedTrace {
    let nodes = factors.t_grid.nodes();
    let last = nodes.len() - 1;
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, &t) in nodes.iter().enumerate() {
        let width = if i == 0 {
            nodes[1] - nodes[0]
        } else if i == last {
            nodes[last] - nodes[last - 1]
        } else {
            nodes[i + 1] - nodes[i - 1]
        };
        let g: Complex64 = factors.geometric.iter().map(|row| row[i]).sum();
        acc += g * factors.a_joint[i] * (phi.fourier(t) * 0.5 * width);
    }
    let value = acc * SEPARATED_PREFACTOR;
    SeparatedTrace {
        value: value.re,
        imag_residual: value.im,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceReport {
    pub theta_fiber: f64,
    pub theta_separated: f64,
    /// `|theta_fiber − theta_separated| / |theta_fiber|`.
    pub rel_gap: f64,
    pub euler_gap: f64,
    pub imag_residual: f64,
    pub t_max: f64,
    pub h_t: f64,
    pub prefactor: f64,
}

/// Runs the fiber sum and the separated quadrature on one configuration.
pub fn compare_trace_representations(
    phi: &TestFunction,
    bands: &BandStructure,
    e_star: f64,
    ensemble: &HeckeEnsemble,
    family: &CoefficientFamily,
    shifts: &MassShifts,
    max_step: f64,
) -> Result<TraceReport> {
    let max_shift = shifts
        .values()
        .iter()
        .fold(0.0_f64, |a, &m| a.max(libm::fabs(m)));
    let max_abs_energy = bands
        .bands()
        .iter()
        .flatten()
        .fold(0.0_f64, |a, &e| a.max(libm::fabs(e - e_star)))
        + max_shift;
    let total_mass = bands.n_bands() as f64 * 2.0 * PI / bands.period();
    let grid = trace_time_grid(phi, max_abs_energy, total_mass, max_step)?;
    let t_max = *grid.nodes().last().expect("grid is nonempty");
    let h_t = grid.step();
    let factors = TraceFactors::compute(bands, e_star, ensemble, family, shifts, grid);
    let fiber = theta_fiber(phi, bands, e_star, shifts);
    let separated = theta_separated(phi, &factors);
    let rel_gap = if fiber != 0.0 {
        libm::fabs(fiber - separated.value) / libm::fabs(fiber)
    } else {
        libm::fabs(separated.value)
    };
    Ok(TraceReport {
        theta_fiber: fiber,
        theta_separated: separated.value,
        rel_gap,
        euler_gap: factors.euler_gap(),
        imag_residual: separated.imag_residual,
        t_max,
        h_t,
        prefactor: SEPARATED_PREFACTOR,
    })
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Taylor coefficients `c_{p,r}`, `r = 1..=r_max`, of `log A_p(t)` at
/// `t = 0`: `c_r = κ_r i^r / r!` with `κ_r` the cumulants of
/// `η_p(λ[p][·])` under the empirical measure.
pub fn log_local_coefficients(
    ensemble: &HeckeEnsemble,
    family: &CoefficientFamily,
    p: u64,
    r_max: usize,
) -> Result<Vec<Complex64>> {
    if r_max == 0 || r_max > 6 {
        return Err(Error::InvalidInput("r_max must be in 1..=6"));
    }
    let index = ensemble
        .primes()
        .position(p)
        .ok_or(Error::PrimeNotInSet(p))?;
    let etas: Vec<f64> = ensemble
        .row(index)
        .iter()
        .map(|&l| family.eta(p, l))
        .collect();
    let n = etas.len() as f64;
    let mean = etas.iter().sum::<f64>() / n;
    // central[k] = (1/N) Σ (η − mean)^k
    let mut central = [0.0; 7];
    for &e in &etas {
        let d = e - mean;
        let mut pow = 1.0;
        for c in central.iter_mut().skip(1) {
            pow *= d;
            *c += pow;
        }
    }
    for c in central.iter_mut() {
        *c /= n;
    }
    central[0] = 1.0;
    central[1] = 0.0;
    let mut cumulants = [0.0; 7];
    cumulants[1] = mean;
    for order in 2..=r_max {
        let mut k_n = central[order];
        for k in 2..=order.saturating_sub(2) {
            k_n -= binomial(order - 1, k - 1) * cumulants[k] * central[order - k];
        }
        cumulants[order] = k_n;
    }
    let mut factorial = 1.0;
    let mut i_pow = Complex64::new(1.0, 0.0);
    let mut out = Vec::with_capacity(r_max);
    for (r, &kappa) in cumulants.iter().enumerate().take(r_max + 1).skip(1) {
        factorial *= r as f64;
        i_pow *= Complex64::new(0.0, 1.0);
        out.push(i_pow * (kappa / factorial));
    }
    Ok(out)
}
