//! Prime-indexed arithmetic data: primes, synthetic Hecke ensembles, the
//! quadratic coefficient family `η_p(λ) = p^{−(1+ε)} λ²`, mass shifts and
//! local factors `A_p(t)`.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::{Error, Result};

/// Ascending list of the first `N_P` primes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeSet {
    primes: Vec<u64>,
}

impl PrimeSet {
    pub fn as_slice(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn largest(&self) -> Option<u64> {
        self.primes.last().copied()
    }

    pub fn position(&self, p: u64) -> Option<usize> {
        self.primes.binary_search(&p).ok()
    }

    /// The first `k` primes of this set.
    pub fn prefix(&self, k: usize) -> PrimeSet {
        PrimeSet {
            primes: self.primes[..k.min(self.primes.len())].to_vec(),
        }
    }
}

/// The first `count` primes, by an Eratosthenes sieve sized from the
/// Rosser bound `p_n < n (ln n + ln ln n)` for `n ≥ 6`.
pub fn generate_primes(count: usize) -> Result<PrimeSet> {
    if count == 0 {
        return Err(Error::InvalidInput("N_P must be >= 1"));
    }
    let limit = if count < 6 {
        15
    } else {
        let n = count as f64;
        libm::ceil(n * (libm::log(n) + libm::log(libm::log(n)))) as usize + 1
    };
    let mut composite = alloc::vec![false; limit + 1];
    let mut primes = Vec::with_capacity(count);
    for i in 2..=limit {
        if composite[i] {
            continue;
        }
        primes.push(i as u64);
        if primes.len() == count {
            break;
        }
        let mut k = i * i;
        while k <= limit {
            composite[k] = true;
            k += i;
        }
    }
    debug_assert_eq!(primes.len(), count);
    Ok(PrimeSet { primes })
}

/// One step of the splitmix64 generator applied to `state`.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sample for prime `p` and 1-based mode `m`, in `[−1, 1)`.
///
/// Keyed by `(seed, p, m)` only, so any evaluation order gives the same
/// ensemble.
pub fn keyed_sample(seed: u64, p: u64, m: u64) -> f64 {
    let key = seed ^ p.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ m.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    let z = splitmix64(key);
    2.0 * ((z >> 11) as f64 / (1u64 << 53) as f64) - 1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingMode {
    /// Keyed splitmix64 uniforms on `[−1, 1)`.
    IidUniform,
    /// Every `T_p` acts by `1`.
    ConstantOne,
    /// Caller-provided samples (e.g. tabulated eigenvalues).
    Supplied,
}

/// Joint eigenvalue samples `λ[p][m]` for the primes of `S` and `N_H` modes.
#[derive(Debug, Clone, PartialEq)]
pub struct HeckeEnsemble {
    primes: PrimeSet,
    /// `samples[i][m]` for the `i`-th prime and 0-based mode `m`.
    samples: Vec<Vec<f64>>,
    seed: u64,
    mode: SamplingMode,
}

impl HeckeEnsemble {
    /// Builds an ensemble from explicit samples, one row per prime.
    pub fn from_samples(primes: PrimeSet, samples: Vec<Vec<f64>>) -> Result<Self> {
        if samples.len() != primes.len() {
            return Err(Error::InvalidInput("one sample row per prime required"));
        }
        let n_modes = samples.first().map_or(0, Vec::len);
        if n_modes == 0 || samples.iter().any(|row| row.len() != n_modes) {
            return Err(Error::InvalidInput(
                "sample rows must be nonempty and equal length",
            ));
        }
        if samples
            .iter()
            .flatten()
            .any(|x| !(x.is_finite() && libm::fabs(*x) <= 1.0))
        {
            return Err(Error::InvalidInput("Hecke samples must lie in [-1, 1]"));
        }
        Ok(Self {
            primes,
            samples,
            seed: 0,
            mode: SamplingMode::Supplied,
        })
    }

    pub fn primes(&self) -> &PrimeSet {
        &self.primes
    }

    pub fn n_modes(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn mode(&self) -> SamplingMode {
        self.mode
    }

    /// Samples of the `i`-th prime across all modes.
    pub fn row(&self, prime_index: usize) -> &[f64] {
        &self.samples[prime_index]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn sample(&self, prime_index: usize, mode: usize) -> f64 {
        self.samples[prime_index][mode]
    }

    /// Same primes, modes reordered so that new mode `k` is old mode
    /// `order[k]`.
    pub fn permute_modes(&self, order: &[usize]) -> Self {
        let samples = self
            .samples
            .iter()
            .map(|row| order.iter().map(|&m| row[m]).collect())
            .collect();
        Self {
            samples,
            ..self.clone()
        }
    }
}

pub fn sample_hecke_ensemble(
    primes: &PrimeSet,
    n_modes: usize,
    seed: u64,
    mode: SamplingMode,
) -> Result<HeckeEnsemble> {
    if n_modes == 0 {
        return Err(Error::InvalidInput("N_H must be >= 1"));
    }
    let samples = match mode {
        SamplingMode::IidUniform => primes
            .as_slice()
            .iter()
            .map(|&p| {
                (1..=n_modes as u64)
                    .map(|m| keyed_sample(seed, p, m))
                    .collect()
            })
            .collect(),
        SamplingMode::ConstantOne => alloc::vec![alloc::vec![1.0; n_modes]; primes.len()],
        SamplingMode::Supplied => {
            return Err(Error::InvalidInput(
                "supplied ensembles are built with from_samples",
            ))
        }
    };
    Ok(HeckeEnsemble {
        primes: primes.clone(),
        samples,
        seed,
        mode,
    })
}

/// Quadratic even family `η_p(λ) = p^{−(1+ε)} λ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientFamily {
    epsilon: f64,
}

impl CoefficientFamily {
    /// Rejects `ε ≤ 0`, where `Σ_p ‖η_p‖_∞` diverges.
    pub fn quadratic(epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::NotSummable { epsilon });
        }
        Ok(Self { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `‖η_p‖_∞` on `[−1, 1]`, i.e. `p^{−(1+ε)}`.
    pub fn sup_norm(&self, p: u64) -> f64 {
        libm::pow(p as f64, -(1.0 + self.epsilon))
    }

    pub fn eta(&self, p: u64, lambda: f64) -> f64 {
        self.sup_norm(p) * (lambda * lambda)
    }
}

pub fn eta_eval(family: &CoefficientFamily, p: u64, lambda: f64) -> f64 {
    family.eta(p, lambda)
}

/// Mass shift `m[m]` per mode.
#[derive(Debug, Clone, PartialEq)]
pub struct MassShifts(Vec<f64>);

impl MassShifts {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    /// `n_modes` zero shifts.
    pub fn zero(n_modes: usize) -> Self {
        Self(alloc::vec![0.0; n_modes])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `m[m] = Σ_{p∈S} η_p(λ[p][m])`, summed in ascending prime order.
pub fn mass_shifts(ensemble: &HeckeEnsemble, family: &CoefficientFamily) -> MassShifts {
    let primes = ensemble.primes().as_slice();
    let values = (0..ensemble.n_modes())
        .map(|m| {
            primes.iter().enumerate().fold(0.0, |acc, (i, &p)| {
                acc + family.eta(p, ensemble.sample(i, m))
            })
        })
        .collect();
    MassShifts(values)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummabilityReport {
    /// `Σ_{p∈S} p^{−(1+ε)}`.
    pub partial_sum: f64,
    /// `P_max^{−ε} / ε`, bounding `Σ_{n>P_max} n^{−(1+ε)}`.
    pub tail_bound: f64,
}

pub fn summability_report(
    family: &CoefficientFamily,
    primes: &PrimeSet,
) -> Result<SummabilityReport> {
    let epsilon = family.epsilon();
    if !(epsilon > 0.0) {
        return Err(Error::NotSummable { epsilon });
    }
    let largest = primes
        .largest()
        .ok_or(Error::InvalidInput("empty prime set"))?;
    let partial_sum = primes
        .as_slice()
        .iter()
        .fold(0.0, |acc, &p| acc + family.sup_norm(p));
    let tail_bound = libm::pow(largest as f64, -epsilon) / epsilon;
    Ok(SummabilityReport {
        partial_sum,
        tail_bound,
    })
}

/// Empirical local factor `A_p(t) = (1/N_H) Σ_m exp(i t η_p(λ[p][m]))`.
pub fn local_factor(
    ensemble: &HeckeEnsemble,
    family: &CoefficientFamily,
    p: u64,
    t: f64,
) -> Result<Complex64> {
    let index = ensemble
        .primes()
        .position(p)
        .ok_or(Error::PrimeNotInSet(p))?;
    Ok(local_factor_at(ensemble, family, index, t))
}

pub(crate) fn local_factor_at(
    ensemble: &HeckeEnsemble,
    family: &CoefficientFamily,
    prime_index: usize,
    t: f64,
) -> Complex64 {
    let p = ensemble.primes().as_slice()[prime_index];
    let (mut re, mut im) = (0.0, 0.0);
    for &lambda in ensemble.row(prime_index) {
        let phase = t * family.eta(p, lambda);
        re += libm::cos(phase);
        im += libm::sin(phase);
    }
    let n = ensemble.n_modes() as f64;
    Complex64::new(re / n, im / n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_prime(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
    }

    #[test]
    fn first_primes() {
        assert_eq!(generate_primes(1).unwrap().as_slice(), &[2]);
        assert_eq!(generate_primes(5).unwrap().as_slice(), &[2, 3, 5, 7, 11]);
        let twenty = generate_primes(20).unwrap();
        assert_eq!(twenty.largest(), Some(71));
        assert!(generate_primes(0).is_err());
    }

    #[test]
    fn primes_match_trial_division() {
        let ps = generate_primes(5000).unwrap();
        let brute: Vec<u64> = (2..).filter(|&n| is_prime(n)).take(5000).collect();
        assert_eq!(ps.as_slice(), brute.as_slice());
    }

    #[test]
    fn splitmix_sample_matches_reference() {
        // Independent bit-mix reimplementation (Python, arbitrary-precision ints).
        assert_eq!(keyed_sample(12345, 2, 1), 0.3803819561984241);
        assert_eq!(keyed_sample(12345, 3, 1), -0.7533152537518168);
        assert_eq!(keyed_sample(12345, 2, 2), 0.9097610505930933);
        assert_eq!(keyed_sample(54321, 71, 20), 0.3868356287188959);
    }

    #[test]
    fn splitmix_known_stream() {
        // Reference sequence of splitmix64 seeded with 1234567.
        let mut state: u64 = 1234567;
        let mut out = [0u64; 3];
        for o in &mut out {
            *o = splitmix64(state);
            state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        }
        assert_eq!(
            out,
            [
                6457827717110365317,
                3203168211198807973,
                9817491932198370423
            ]
        );
    }

    #[test]
    fn constant_one_ensemble() {
        let ps = generate_primes(4).unwrap();
        let ens = sample_hecke_ensemble(&ps, 7, 99, SamplingMode::ConstantOne).unwrap();
        assert!(ens.rows().iter().flatten().all(|&x| x == 1.0));
    }

    #[test]
    fn ensemble_rejects_zero_modes() {
        let ps = generate_primes(2).unwrap();
        assert!(sample_hecke_ensemble(&ps, 0, 1, SamplingMode::IidUniform).is_err());
    }

    #[test]
    fn eta_values() {
        let fam = CoefficientFamily::quadratic(0.35).unwrap();
        assert_eq!(eta_eval(&fam, 2, 0.0), 0.0);
        assert!((eta_eval(&fam, 2, 1.0) - 0.392292048948375343).abs() < 1e-15);
        assert_eq!(eta_eval(&fam, 3, -1.0), eta_eval(&fam, 3, 1.0));
        assert!(CoefficientFamily::quadratic(0.0).is_err());
        assert!(CoefficientFamily::quadratic(-1.0).is_err());
    }

    #[test]
    fn constant_one_mass_shift() {
        let ps = generate_primes(2).unwrap();
        let fam = CoefficientFamily::quadratic(0.35).unwrap();
        let ens = sample_hecke_ensemble(&ps, 5, 0, SamplingMode::ConstantOne).unwrap();
        let shifts = mass_shifts(&ens, &fam);
        // mpmath: 2^-1.35 + 3^-1.35
        for &m in shifts.values() {
            assert!((m - 0.619219119164525451).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_samples_give_zero_shifts() {
        let ps = generate_primes(3).unwrap();
        let ens = HeckeEnsemble::from_samples(ps, alloc::vec![alloc::vec![0.0; 4]; 3]).unwrap();
        let fam = CoefficientFamily::quadratic(0.35).unwrap();
        assert_eq!(mass_shifts(&ens, &fam), MassShifts::zero(4));
    }

    #[test]
    fn summability() {
        let fam = CoefficientFamily::quadratic(0.35).unwrap();
        let report = summability_report(&fam, &generate_primes(1).unwrap()).unwrap();
        assert!((report.partial_sum - 0.392292048948375343).abs() < 1e-15);
        let mut last = f64::INFINITY;
        for k in 1..30 {
            let r = summability_report(&fam, &generate_primes(k).unwrap()).unwrap();
            assert!(r.tail_bound <= last);
            last = r.tail_bound;
        }
    }

    #[test]
    fn local_factor_basics() {
        let ps = generate_primes(3).unwrap();
        let fam = CoefficientFamily::quadratic(0.35).unwrap();
        let ens = sample_hecke_ensemble(&ps, 50, 7, SamplingMode::IidUniform).unwrap();
        assert_eq!(
            local_factor(&ens, &fam, 3, 0.0).unwrap(),
            Complex64::new(1.0, 0.0)
        );
        assert_eq!(
            local_factor(&ens, &fam, 7, 1.0),
            Err(Error::PrimeNotInSet(7))
        );
        let one = sample_hecke_ensemble(&ps, 5, 7, SamplingMode::ConstantOne).unwrap();
        let a = local_factor(&one, &fam, 5, 2.5).unwrap();
        let expected = Complex64::new(0.0, 2.5 * fam.sup_norm(5)).exp();
        assert!((a - expected).norm() < 1e-15);
    }
}
