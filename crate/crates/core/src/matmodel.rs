//! Finite matrix models of the global and arithmetic Dirac operators.
//!
//! Both operators have the chiral block form `[[0, Q], [Q, 0]]` with `Q`
//! diagonal over (fiber, mode) pairs: `Q_glob = diag(q_i)` and
//! `Q_arith = diag(q_i + m[m])`, `q_i = E_n(κ_j) − E*`. Spectra are therefore
//! known in closed form; explicit sparse operators are built only for the
//! structural involution checks.
//!
//! Basis order: chiral block `s ∈ {0, 1}`, then fiber `i`, then mode `m`.

use alloc::vec::Vec;

use crate::arithmetic::{CoefficientFamily, HeckeEnsemble, MassShifts};
use crate::floquet::BandStructure;
use crate::shift::TestFunction;
use crate::{Error, Result};

/// Upper bound on `fibers × modes` in a model.
pub const MAX_FIBER_MODE_PAIRS: usize = 4096;

/// Row-sparse real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            rows: alloc::vec![Vec::new(); dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            rows: (0..dim).map(|i| alloc::vec![(i, 1.0)]).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Adds `value` to entry `(row, col)`.
    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        let entries = &mut self.rows[row];
        match entries.binary_search_by_key(&col, |e| e.0) {
            Ok(k) => entries[k].1 += value,
            Err(k) => entries.insert(k, (col, value)),
        }
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.rows[row]
            .binary_search_by_key(&col, |e| e.0)
            .map_or(0.0, |k| self.rows[row][k].1)
    }

    pub fn mul(&self, other: &SparseMatrix) -> SparseMatrix {
        let mut out = SparseMatrix::zeros(self.dim);
        for (r, entries) in self.rows.iter().enumerate() {
            for &(k, a) in entries {
                for &(c, b) in &other.rows[k] {
                    out.push(r, c, a * b);
                }
            }
        }
        out
    }

    pub fn add(&self, other: &SparseMatrix) -> SparseMatrix {
        let mut out = self.clone();
        for (r, entries) in other.rows.iter().enumerate() {
            for &(c, v) in entries {
                out.push(r, c, v);
            }
        }
        out
    }

    pub fn scale(&self, factor: f64) -> SparseMatrix {
        SparseMatrix {
            dim: self.dim,
            rows: self
                .rows
                .iter()
                .map(|row| row.iter().map(|&(c, v)| (c, v * factor)).collect())
                .collect(),
        }
    }

    /// Maximum absolute row sum. Equals the operator norm for matrices with
    /// at most one nonzero per row and column.
    pub fn inf_norm(&self) -> f64 {
        self.rows
            .iter()
            .map(|row| row.iter().map(|e| libm::fabs(e.1)).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.dim * self.dim];
        for (r, entries) in self.rows.iter().enumerate() {
            for &(c, v) in entries {
                out[r * self.dim + c] = v;
            }
        }
        out
    }
}

/// Limits on the number of fibers and modes kept in a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelCaps {
    pub max_fibers: usize,
    pub max_modes: usize,
}

impl Default for ModelCaps {
    fn default() -> Self {
        Self {
            max_fibers: 256,
            max_modes: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixModel {
    /// Selected `(n, j)` fibers.
    fibers: Vec<(usize, usize)>,
    /// `q_i = E_n(κ_j) − E*` per selected fiber.
    q: Vec<f64>,
    /// Selected 0-based mode indices.
    modes: Vec<usize>,
    mass: Vec<f64>,
    /// Index of the `κ → −κ` partner of each selected fiber.
    reflection: Vec<usize>,
}

/// Symmetric odd-count subset of `0..len` around the center.
fn symmetric_subset(len: usize, count: usize) -> Vec<usize> {
    let center = (len - 1) / 2;
    if count >= len {
        return (0..len).collect();
    }
    let count = if count.is_multiple_of(2) { count - 1 } else { count };
    let half = (count - 1) / 2;
    if half == 0 {
        return alloc::vec![center];
    }
    let mut out: Vec<usize> = (0..=half)
        .map(|i| (i * center + half / 2) / half)
        .flat_map(|d| [center - d, center + d])
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Builds the model, keeping all bands up to the fiber cap and a
/// mirror-symmetric set of κ nodes; modes are strided when capped.
pub fn assemble(
    bands: &BandStructure,
    e_star: f64,
    shifts: &MassShifts,
    caps: ModelCaps,
) -> Result<MatrixModel> {
    if caps.max_fibers == 0 || caps.max_modes == 0 {
        return Err(Error::InvalidInput("matrix model caps must be positive"));
    }
    if caps.max_fibers.saturating_mul(caps.max_modes) > MAX_FIBER_MODE_PAIRS {
        return Err(Error::ModelTooLarge {
            fibers: caps.max_fibers,
            modes: caps.max_modes,
        });
    }
    if bands.n_bands() == 0 || bands.grid().is_empty() || shifts.is_empty() {
        return Err(Error::EmptyModel);
    }
    let n_bands = bands.n_bands().min(caps.max_fibers);
    let per_band = (caps.max_fibers / n_bands).max(1);
    let nodes = symmetric_subset(bands.grid().len(), per_band);

    let mut fibers = Vec::with_capacity(n_bands * nodes.len());
    for n in 0..n_bands {
        for &j in &nodes {
            fibers.push((n, j));
        }
    }
    let q: Vec<f64> = fibers
        .iter()
        .map(|&(n, j)| bands.energy(n, j) - e_star)
        .collect();
    let reflection = fibers
        .iter()
        .map(|&(n, j)| {
            let mirror = bands.grid().mirror(j);
            fibers
                .iter()
                .position(|&f| f == (n, mirror))
                .expect("node subset is symmetric")
        })
        .collect();

    let total_modes = shifts.len();
    let modes: Vec<usize> = if total_modes <= caps.max_modes {
        (0..total_modes).collect()
    } else {
        (0..caps.max_modes)
            .map(|i| i * total_modes / caps.max_modes)
            .collect()
    };
    let mass = modes.iter().map(|&m| shifts.values()[m]).collect();
    Ok(MatrixModel {
        fibers,
        q,
        modes,
        mass,
        reflection,
    })
}

impl MatrixModel {
    /// Model from explicit fiber energies and masses; the reflection is the
    /// identity.
    pub fn from_parts(q: Vec<f64>, mass: Vec<f64>) -> Result<Self> {
        if q.is_empty() || mass.is_empty() {
            return Err(Error::EmptyModel);
        }
        if q.len().saturating_mul(mass.len()) > MAX_FIBER_MODE_PAIRS {
            return Err(Error::ModelTooLarge {
                fibers: q.len(),
                modes: mass.len(),
            });
        }
        Ok(Self {
            fibers: (0..q.len()).map(|i| (0, i)).collect(),
            reflection: (0..q.len()).collect(),
            modes: (0..mass.len()).collect(),
            q,
            mass,
        })
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn fibers(&self) -> &[(usize, usize)] {
        &self.fibers
    }

    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    /// Side length `2 · fibers · modes` of the full operators.
    pub fn dimension(&self) -> usize {
        2 * self.q.len() * self.mass.len()
    }

    fn block(&self) -> usize {
        self.q.len() * self.mass.len()
    }

    fn diagonal(&self, with_mass: bool) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.block());
        for &q in &self.q {
            for &m in &self.mass {
                out.push(if with_mass { q + m } else { q });
            }
        }
        out
    }

    fn closed_form(&self, with_mass: bool) -> Vec<f64> {
        let mut values: Vec<f64> = self
            .diagonal(with_mass)
            .into_iter()
            .flat_map(|x| [x, -x])
            .collect();
        values.sort_by(f64::total_cmp);
        values
    }

    /// `{±q_i}`, each with multiplicity `modes`, ascending.
    pub fn glob_spectrum(&self) -> Vec<f64> {
        self.closed_form(false)
    }

    /// `{±(q_i + m[m])}`, ascending.
    pub fn arith_spectrum(&self) -> Vec<f64> {
        self.closed_form(true)
    }

    fn chiral_operator(&self, with_mass: bool) -> SparseMatrix {
        let block = self.block();
        let mut d = SparseMatrix::zeros(2 * block);
        for (k, v) in self.diagonal(with_mass).into_iter().enumerate() {
            d.push(k, block + k, v);
            d.push(block + k, k, v);
        }
        d
    }

    pub fn d_glob(&self) -> SparseMatrix {
        self.chiral_operator(false)
    }

    pub fn d_arith(&self) -> SparseMatrix {
        self.chiral_operator(true)
    }

    /// `Γ = diag(+I, −I)`.
    pub fn gamma(&self) -> SparseMatrix {
        let block = self.block();
        let mut g = SparseMatrix::zeros(2 * block);
        for k in 0..block {
            g.push(k, k, 1.0);
            g.push(block + k, block + k, -1.0);
        }
        g
    }

    /// Fiber reflection `R` acting on one chiral block, as a permutation of
    /// `(fiber, mode)` pairs. The synthetic modes carry no structure for the
    /// idelic inversion, which therefore acts as the identity on them.
    fn reflection_index(&self, k: usize) -> usize {
        let h = self.mass.len();
        self.reflection[k / h] * h + k % h
    }

    /// `diag(R, R)`.
    pub fn reflection(&self) -> SparseMatrix {
        let block = self.block();
        let mut r = SparseMatrix::zeros(2 * block);
        for k in 0..block {
            let rk = self.reflection_index(k);
            r.push(k, rk, 1.0);
            r.push(block + k, block + rk, 1.0);
        }
        r
    }

    /// `J = [[0, R], [R, 0]]`, the off-diagonal reflection form.
    pub fn j_paper(&self) -> SparseMatrix {
        let block = self.block();
        let mut j = SparseMatrix::zeros(2 * block);
        for k in 0..block {
            let rk = self.reflection_index(k);
            j.push(k, block + rk, 1.0);
            j.push(block + k, rk, 1.0);
        }
        j
    }

    /// `Γ · diag(R, R)`: an involution that anticommutes with both operators.
    pub fn gamma_reflected(&self) -> SparseMatrix {
        self.gamma().mul(&self.reflection())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiralReport {
    /// `‖ΓD + DΓ‖` over both operators; zero by block structure.
    pub anticommutator_norm: f64,
    /// `‖Γ² − I‖`.
    pub gamma_square_defect: f64,
    /// `max_k |Λ_k + Λ_{rev(k)}|` over both sorted spectra.
    pub pairing_defect: f64,
    /// `‖Γ_R D + D Γ_R‖` for `Γ_R = Γ · diag(R, R)`.
    pub reflected_anticommutator_norm: f64,
    /// `‖J D J − D‖` for the off-diagonal reflection `J`: zero, it commutes.
    pub paper_j_commutator_norm: f64,
    /// `‖J D J + D‖`; equals `2 max|q + m|` when `J` commutes with `D`.
    pub paper_j_anticommutator_defect: f64,
    /// `max |q_i + m|`.
    pub max_abs_eigenvalue: f64,
}

fn pairing_defect(sorted: &[f64]) -> f64 {
    sorted
        .iter()
        .zip(sorted.iter().rev())
        .map(|(a, b)| libm::fabs(a + b))
        .fold(0.0, f64::max)
}

pub fn verify_chiral(model: &MatrixModel) -> ChiralReport {
    let gamma = model.gamma();
    let gamma_r = model.gamma_reflected();
    let j = model.j_paper();
    let dim = model.dimension();
    let mut report = ChiralReport {
        anticommutator_norm: 0.0,
        gamma_square_defect: gamma
            .mul(&gamma)
            .add(&SparseMatrix::identity(dim).scale(-1.0))
            .inf_norm(),
        pairing_defect: pairing_defect(&model.glob_spectrum())
            .max(pairing_defect(&model.arith_spectrum())),
        reflected_anticommutator_norm: 0.0,
        paper_j_commutator_norm: 0.0,
        paper_j_anticommutator_defect: 0.0,
        max_abs_eigenvalue: model
            .diagonal(true)
            .iter()
            .fold(0.0, |a, &x| a.max(libm::fabs(x))),
    };
    for d in [model.d_glob(), model.d_arith()] {
        let anti = gamma.mul(&d).add(&d.mul(&gamma)).inf_norm();
        report.anticommutator_norm = report.anticommutator_norm.max(anti);
        let anti_r = gamma_r.mul(&d).add(&d.mul(&gamma_r)).inf_norm();
        report.reflected_anticommutator_norm = report.reflected_anticommutator_norm.max(anti_r);
        let conj = j.mul(&d).mul(&j);
        report.paper_j_commutator_norm = report
            .paper_j_commutator_norm
            .max(conj.add(&d.scale(-1.0)).inf_norm());
    }
    let d = model.d_arith();
    report.paper_j_anticommutator_defect = j.mul(&d).mul(&j).add(&d).inf_norm();
    report
}

#[derive(Debug, Clone, PartialEq)]
pub struct KreinReport {
    /// `ξ_full(λ) = N_arith(λ) − N_glob(λ)` on the probe grid.
    pub xi_samples: Vec<(f64, i64)>,
    /// Net jumps of `ξ_full`, ascending, zero jumps dropped.
    pub jumps: Vec<(f64, i64)>,
    /// `Σ φ(Λ_arith) − Σ φ(Λ_glob)`.
    pub trace_difference: f64,
    /// `∫ φ dξ_full` by jump summation.
    pub jump_pairing: f64,
    pub krein_gap: f64,
}

fn counting(sorted: &[f64], x: f64) -> usize {
    sorted.partition_point(|&v| v <= x)
}

/// Merges two sorted spectra into net jumps `(location, +arith − glob)`.
fn net_jumps(arith: &[f64], glob: &[f64]) -> Vec<(f64, i64)> {
    let mut events: Vec<(f64, i64)> = arith
        .iter()
        .map(|&x| (x, 1))
        .chain(glob.iter().map(|&x| (x, -1)))
        .collect();
    events.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, i64)> = Vec::new();
    for (x, w) in events {
        match merged.last_mut() {
            Some(last) if last.0 == x => last.1 += w,
            _ => merged.push((x, w)),
        }
    }
    merged.retain(|j| j.1 != 0);
    merged
}

pub fn krein_from_counting(
    model: &MatrixModel,
    phi: &TestFunction,
    probe_grid: &[f64],
) -> KreinReport {
    let arith = model.arith_spectrum();
    let glob = model.glob_spectrum();
    let xi_samples = probe_grid
        .iter()
        .map(|&x| (x, counting(&arith, x) as i64 - counting(&glob, x) as i64))
        .collect();
    let jumps = net_jumps(&arith, &glob);
    let trace_difference = arith.iter().map(|&x| phi.eval(x)).sum::<f64>()
        - glob.iter().map(|&x| phi.eval(x)).sum::<f64>();
    let jump_pairing = jumps
        .iter()
        .map(|&(x, w)| w as f64 * phi.eval(x))
        .sum::<f64>();
    KreinReport {
        xi_samples,
        jumps,
        trace_difference,
        jump_pairing,
        krein_gap: libm::fabs(trace_difference - jump_pairing),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimeNorm {
    pub p: u64,
    /// `‖η_p(T_p)‖ = max_m |η_p(λ[p][m])|`.
    pub norm: f64,
    /// `‖η_p‖_∞ = p^{−(1+ε)}`.
    pub bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailNorm {
    /// Number of primes in `S_k`.
    pub prefix: usize,
    /// `‖M^{(S_max)} − M^{(S_k)}‖`.
    pub norm: f64,
    /// `Σ_{p ∈ S_max ∖ S_k} p^{−(1+ε)}`.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormReport {
    pub per_prime: Vec<PrimeNorm>,
    pub tails: Vec<TailNorm>,
    pub per_prime_ok: bool,
    pub tails_bounded: bool,
    pub tails_monotone: bool,
}

impl NormReport {
    pub fn all_ok(&self) -> bool {
        self.per_prime_ok && self.tails_bounded && self.tails_monotone
    }
}

/// Operator-norm checks for the diagonal Hecke model `T_p = diag(λ[p][·])`
/// over nested prefix sets `S_1 ⊂ S_2 ⊂ … ⊂ S_max`.
pub fn norm_bound_checks(
    family: &CoefficientFamily,
    ensemble: &HeckeEnsemble,
    prefixes: &[usize],
) -> Result<NormReport> {
    let primes = ensemble.primes().as_slice();
    if prefixes.windows(2).any(|w| w[0] >= w[1]) || prefixes.iter().any(|&k| k > primes.len()) {
        return Err(Error::InvalidInput(
            "prefix sizes must be strictly ascending and within the prime set",
        ));
    }
    let per_prime: Vec<PrimeNorm> = primes
        .iter()
        .enumerate()
        .map(|(i, &p)| PrimeNorm {
            p,
            norm: ensemble
                .row(i)
                .iter()
                .map(|&l| libm::fabs(family.eta(p, l)))
                .fold(0.0, f64::max),
            bound: family.sup_norm(p),
        })
        .collect();
    let tails: Vec<TailNorm> = prefixes
        .iter()
        .map(|&k| {
            let norm = (0..ensemble.n_modes())
                .map(|m| {
                    let s = (k..primes.len()).fold(0.0, |acc, i| {
                        acc + family.eta(primes[i], ensemble.sample(i, m))
                    });
                    libm::fabs(s)
                })
                .fold(0.0, f64::max);
            let bound = (k..primes.len()).fold(0.0, |acc, i| acc + family.sup_norm(primes[i]));
            TailNorm {
                prefix: k,
                norm,
                bound,
            }
        })
        .collect();
    Ok(NormReport {
        per_prime_ok: per_prime.iter().all(|x| x.norm <= x.bound),
        tails_bounded: tails.iter().all(|t| t.norm <= t.bound),
        tails_monotone: tails.windows(2).all(|w| w[1].norm <= w[0].norm),
        per_prime,
        tails,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn single_fiber_spectra() {
        let model = MatrixModel::from_parts(vec![1.0], vec![0.5]).unwrap();
        assert_eq!(model.glob_spectrum(), vec![-1.0, 1.0]);
        assert_eq!(model.arith_spectrum(), vec![-1.5, 1.5]);
        assert_eq!(model.dimension(), 2);
    }

    #[test]
    fn two_fiber_two_mode_spectrum() {
        let model = MatrixModel::from_parts(vec![1.0, 2.0], vec![0.0, 0.5]).unwrap();
        assert_eq!(
            model.arith_spectrum(),
            vec![-2.5, -2.0, -1.5, -1.0, 1.0, 1.5, 2.0, 2.5]
        );
        assert_eq!(
            model.glob_spectrum(),
            vec![-2.0, -2.0, -1.0, -1.0, 1.0, 1.0, 2.0, 2.0]
        );
    }

    #[test]
    fn caps_enforced() {
        assert_eq!(
            MatrixModel::from_parts(vec![1.0; 100], vec![0.0; 41]),
            Err(Error::ModelTooLarge {
                fibers: 100,
                modes: 41
            })
        );
        assert_eq!(
            MatrixModel::from_parts(vec![], vec![0.0]),
            Err(Error::EmptyModel)
        );
    }

    #[test]
    fn symmetric_subsets() {
        assert_eq!(symmetric_subset(9, 3), vec![0, 4, 8]);
        assert_eq!(symmetric_subset(9, 4), vec![0, 4, 8]);
        assert_eq!(symmetric_subset(9, 1), vec![4]);
        assert_eq!(symmetric_subset(5, 9), vec![0, 1, 2, 3, 4]);
        let s = symmetric_subset(201, 31);
        assert_eq!(s.len(), 31);
        assert!(s.iter().all(|&j| s.contains(&(200 - j))));
    }

    #[test]
    fn chiral_report_on_small_model() {
        let model = MatrixModel::from_parts(vec![1.0, -0.25], vec![0.5, 0.1]).unwrap();
        let report = verify_chiral(&model);
        assert_eq!(report.anticommutator_norm, 0.0);
        assert_eq!(report.gamma_square_defect, 0.0);
        assert_eq!(report.pairing_defect, 0.0);
        assert_eq!(report.paper_j_commutator_norm, 0.0);
        assert_eq!(report.paper_j_anticommutator_defect, 2.0 * 1.5);
    }

    #[test]
    fn krein_zero_mass() {
        let model = MatrixModel::from_parts(vec![1.0, 2.0], vec![0.0, 0.0]).unwrap();
        let phi = TestFunction::gaussian(0.5).unwrap();
        let report = krein_from_counting(&model, &phi, &[-3.0, -1.0, 0.0, 1.5, 3.0]);
        assert!(report.xi_samples.iter().all(|s| s.1 == 0));
        assert!(report.jumps.is_empty());
        assert_eq!(report.trace_difference, 0.0);
    }

    #[test]
    fn krein_single_fiber_by_hand() {
        let model = MatrixModel::from_parts(vec![1.0], vec![0.5]).unwrap();
        let phi = TestFunction::gaussian(0.3).unwrap();
        let report = krein_from_counting(&model, &phi, &[-1.2, 0.0, 1.2, 2.0]);
        let hand = (phi.eval(1.5) - phi.eval(1.0)) + (phi.eval(-1.5) - phi.eval(-1.0));
        assert!((report.trace_difference - hand).abs() < 1e-16);
        assert!((report.jump_pairing - hand).abs() < 1e-16);
        assert_eq!(
            report.xi_samples,
            vec![(-1.2, 1), (0.0, 0), (1.2, -1), (2.0, 0)]
        );
    }

    #[test]
    fn sparse_algebra() {
        let mut a = SparseMatrix::zeros(2);
        a.push(0, 1, 2.0);
        a.push(1, 0, 3.0);
        let b = a.mul(&a);
        assert_eq!(b.get(0, 0), 6.0);
        assert_eq!(b.get(1, 1), 6.0);
        assert_eq!(b.get(0, 1), 0.0);
        assert_eq!(a.add(&a.scale(-1.0)).inf_norm(), 0.0);
        assert_eq!(a.to_dense(), vec![0.0, 2.0, 3.0, 0.0]);
    }
}
