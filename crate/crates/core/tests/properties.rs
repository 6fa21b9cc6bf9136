mod common;

use std::sync::OnceLock;

use chiral_gap_core::arithmetic::{generate_primes, mass_shifts, CoefficientFamily, HeckeEnsemble};
use chiral_gap_core::floquet::{select_reference_energy, BandStructure};
use chiral_gap_core::gapspec::{
    aggregate_spectrum, dirac_band_set, fiber_gap_eigenvalues, MEMBERSHIP_MARGIN,
};
use chiral_gap_core::shift::Staircase;
use chiral_gap_core::zeta::{fit_affine, step_mismatch, AffineMap, ZeroTable};
use common::*;
use proptest::prelude::*;

fn bands() -> &'static (BandStructure, f64) {
    static CELL: OnceLock<(BandStructure, f64)> = OnceLock::new();
    CELL.get_or_init(|| {
        let b = mathieu_bands(32, 201);
        let e = select_reference_energy(&b, 0).unwrap();
        (b, e)
    })
}

fn ensemble(rows: Vec<Vec<f64>>) -> HeckeEnsemble {
    HeckeEnsemble::from_samples(generate_primes(rows.len()).unwrap(), rows).unwrap()
}

fn sample_rows(n_primes: usize, n_modes: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-1.0f64..=1.0, n_modes), n_primes)
}

fn jumps() -> impl Strategy<Value = Vec<(f64, u64)>> {
    prop::collection::vec((-60.0f64..60.0, 1u64..4), 0..25)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn staircase_is_odd(raw in jumps(), seed in any::<u64>()) {
        let s = Staircase::from_jumps(raw);
        let locations: Vec<f64> = s.jumps().iter().map(|j| j.0).collect();
        let mut state = seed;
        for _ in 0..1000 {
            state = chiral_gap_core::arithmetic::splitmix64(state);
            let x = 140.0 * ((state >> 11) as f64 / (1u64 << 53) as f64) - 70.0;
            if locations.contains(&x.abs()) {
                continue;
            }
            prop_assert_eq!(s.eval(-x), -s.eval(x));
        }
    }

    #[test]
    fn e_step_halves_agree_and_match_riemann_sum(
        raw in jumps(),
        zeros in prop::collection::vec(0.5f64..40.0, 1..15),
        a in 0.2f64..3.0,
        b in -5.0f64..5.0,
        window in 5.0f64..50.0,
    ) {
        let model = Staircase::from_jumps(raw);
        let map = AffineMap { a, b };
        let m = step_mismatch(&model, &zeros, &map, window).unwrap();
        prop_assert_eq!(m.negative_half, m.positive_half);

        let mapped = Staircase::from_jumps(model.jumps().iter().map(|&(x, w)| (map.apply(x), w)));
        let zs = Staircase::from_jumps(zeros.iter().map(|&g| (g, 1)));
        let n = 1_000_000;
        let h = 2.0 * window / n as f64;
        let mut riemann = 0.0;
        for i in 0..n {
            let x = -window + (i as f64 + 0.5) * h;
            riemann += (mapped.eval(x) - zs.eval(x)).abs() as f64;
        }
        riemann *= h / (2.0 * window);
        // Each breakpoint can misassign at most one cell.
        let breaks = 2.0 * (mapped.jumps().len() + zs.jumps().len()) as f64;
        let height = (mapped.total() + zs.total()) as f64;
        let tol = breaks * height * h / (2.0 * window) + 1e-12;
        prop_assert!((m.value - riemann).abs() <= tol, "{} vs {}", m.value, riemann);
    }

    #[test]
    fn affine_fit_is_equivariant(
        a_prime in 0.1f64..10.0,
        b_prime in -20.0f64..20.0,
        spread in prop::collection::vec(0.01f64..2.0, 20),
    ) {
        let table = ZeroTable::embedded();
        let mut lambdas = Vec::with_capacity(20);
        let mut acc = 0.0;
        for d in spread {
            acc += d;
            lambdas.push(acc);
        }
        let base = fit_affine(&lambdas, &table, 20).unwrap();
        let moved: Vec<f64> = lambdas.iter().map(|l| a_prime * l + b_prime).collect();
        let refit = fit_affine(&moved, &table, 20).unwrap();
        // (a, b) ∘ (a′, b′)⁻¹
        let a = base.map.a / a_prime;
        let b = base.map.b - base.map.a * b_prime / a_prime;
        prop_assert!((refit.map.a - a).abs() <= 1e-10 * a.abs().max(1.0));
        prop_assert!((refit.map.b - b).abs() <= 1e-10 * b.abs().max(1.0) * a_prime.max(1.0));
    }

    #[test]
    fn gap_values_are_symmetric_and_refilter_to_themselves(rows in sample_rows(4, 6), eps in 0.05f64..2.0) {
        let (b, e_star) = bands();
        let family = CoefficientFamily::quadratic(eps).unwrap();
        let shifts = mass_shifts(&ensemble(rows), &family);
        let set = dirac_band_set(b, *e_star).unwrap();
        let values = fiber_gap_eigenvalues(b, *e_star, &shifts, &set);
        let mut plus: Vec<f64> = values.iter().map(|v| v.value).collect();
        let mut minus: Vec<f64> = plus.iter().map(|v| -v).collect();
        plus.sort_by(f64::total_cmp);
        minus.sort_by(f64::total_cmp);
        prop_assert_eq!(&plus, &minus);
        for v in &values {
            prop_assert_eq!(set.gap_index(v.value, MEMBERSHIP_MARGIN), Some(v.gap));
        }
        let spectrum = aggregate_spectrum(&values);
        let closure = spectrum.symmetric_closure();
        for (x, y) in closure.iter().zip(closure.iter().rev()) {
            prop_assert_eq!(x.0, -y.0);
            prop_assert_eq!(x.1, y.1);
        }
    }

    #[test]
    fn mode_permutation_leaves_spectrum_unchanged(rows in sample_rows(3, 7), shuffle in Just((0..7).collect::<Vec<usize>>()).prop_shuffle()) {
        let (b, e_star) = bands();
        let family = CoefficientFamily::quadratic(0.35).unwrap();
        let ens = ensemble(rows);
        let permuted = ens.permute_modes(&shuffle);
        let (s1, s2) = (mass_shifts(&ens, &family), mass_shifts(&permuted, &family));
        for (k, &m) in shuffle.iter().enumerate() {
            prop_assert_eq!(s2.values()[k], s1.values()[m]);
        }
        let set = dirac_band_set(b, *e_star).unwrap();
        let a = aggregate_spectrum(&fiber_gap_eigenvalues(b, *e_star, &s1, &set));
        let c = aggregate_spectrum(&fiber_gap_eigenvalues(b, *e_star, &s2, &set));
        prop_assert_eq!(a.values(), c.values());
        prop_assert_eq!(a.multiplicities(), c.multiplicities());
    }

    #[test]
    fn larger_samples_never_lower_fiber_values(rows in sample_rows(4, 5), growth in prop::collection::vec(1.0f64..1.5, 20)) {
        let (b, e_star) = bands();
        let family = CoefficientFamily::quadratic(0.35).unwrap();
        let grown: Vec<Vec<f64>> = rows
            .iter()
            .enumerate()
            .map(|(i, row)| row.iter().enumerate().map(|(m, &l)| (l * growth[i * 5 + m]).clamp(-1.0, 1.0)).collect())
            .collect();
        let s1 = mass_shifts(&ensemble(rows), &family);
        let s2 = mass_shifts(&ensemble(grown), &family);
        for (x, y) in s1.values().iter().zip(s2.values()) {
            prop_assert!(*x >= 0.0 && y >= x);
        }
        for n in 0..b.n_bands() {
            for j in 0..b.grid().len() {
                let q = b.energy(n, j) - e_star;
                for (x, y) in s1.values().iter().zip(s2.values()) {
                    prop_assert!(q + y >= q + x);
                }
            }
        }
    }
}
