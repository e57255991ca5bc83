mod common;

use adiawalk::evolution::loglog_slope;
use adiawalk::integrators::*;
use adiawalk::linalg::*;
use adiawalk::schedules::Schedule;
use common::*;
use proptest::prelude::*;

fn kinds() -> Vec<IntegratorKind> {
    IntegratorKind::ALL_TAGS.iter().map(|t| t.parse().unwrap()).collect()
}

fn phases(u: &Unitary) -> Vec<f64> {
    normal_eig(u.matrix()).unwrap().phases()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn walks_are_unitary(seed in any::<u64>(), n in 2usize..=6, s in 0.0f64..=1.0, h in 0.01f64..10.0) {
        let pair = random_pair(seed, n);
        for kind in kinds() {
            let w = walk_operator(&pair, &Schedule::Linear, kind, h, s, 0.01).unwrap();
            let g = w.matrix().adjoint_matmul(w.matrix());
            prop_assert!(g.max_diff(&Matrix::identity(n)) <= 1e-10, "{kind}");
        }
    }

    // PF1 and the symmetric splitting are conjugate, so their spectra coincide.
    #[test]
    fn pf1_pf2_same_spectrum(seed in any::<u64>(), n in 2usize..=6, s in 0.0f64..=1.0, hx in 0.05f64..=1.0) {
        let pair = random_pair(seed, n);
        let h = hx / pair.alpha();
        let a = phases(&walk_operator(&pair, &Schedule::Linear, IntegratorKind::Pf1, h, s, 0.0).unwrap());
        let b = phases(&walk_operator(&pair, &Schedule::Linear, IntegratorKind::Pf2 { simplified: true }, h, s, 0.0).unwrap());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-11);
        }
    }

    #[test]
    fn coefficients_sum_to_one(order in prop::sample::select(vec![1u32, 2, 4, 6, 8])) {
        let (a, b) = suzuki_coefficients(order).unwrap().sums();
        prop_assert!((a - 1.0).abs() <= 1e-12 && (b - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn constants_are_consistent(seed in any::<u64>(), n in 2usize..=5) {
        let pair = random_pair(seed, n);
        let c = ProblemConstants::compute(&pair, 0.1).unwrap();
        prop_assert!(c.alpha >= 0.0);
        prop_assert!(c.double_commutator >= 0.0);
        // Δ* ≤ 2α for the actual minimum gap.
        let gaps = (0..=100).map(|i| {
            let e = hermitian_eig(&pair.hamiltonian(i as f64 / 100.0)).unwrap();
            e.values[1] - e.values[0]
        });
        prop_assert!(gaps.fold(f64::INFINITY, f64::min) <= 2.0 * c.alpha);
        for kind in kinds() {
            let h = recommended_step_size(&c, kind).unwrap();
            prop_assert!(h > 0.0 && h <= 1.0 / c.alpha * (1.0 + 1e-12));
        }
    }

    // A single exponential step over the whole s-interval of one walk, compared
    // with the converged time-ordered oracle.
    #[test]
    fn exp_step_local_error_is_small(seed in any::<u64>(), h in 0.05f64..0.5, t in 10.0f64..200.0, s0 in 0.0f64..0.9) {
        let pair = random_pair(seed, 3);
        let ds = h / t;
        let exact = exact_step(&pair, &Schedule::Linear, h, s0, ds, 1e-12).unwrap();
        let w = walk_operator(&pair, &Schedule::Linear, IntegratorKind::Exp, h, s0, ds).unwrap();
        let err = operator_norm(&(w.matrix() - exact.matrix()));
        prop_assert!(err <= 10.0 * h * h * pair.alpha() / t, "{} vs {}", err, h * h * pair.alpha() / t);
    }
}

/// Error of a splitting against e^{−ihH(f)} at fixed s, over halving h.
fn local_errors(pair: &Pair, kind: IntegratorKind, hs: &[f64]) -> Vec<f64> {
    let s = 0.37;
    let h_s = pair.hamiltonian(s);
    hs.iter()
        .map(|&h| {
            let exact = expm_i_hermitian(&h_s, h).unwrap();
            let w = walk_operator(pair, &Schedule::Linear, kind, h, s, 0.0).unwrap();
            operator_norm(&(w.matrix() - exact.matrix()))
        })
        .collect()
}

#[test]
fn splitting_error_orders() {
    let hs = [0.2, 0.1, 0.05, 0.025];
    for seed in 0..6 {
        let pair = random_pair(1000 + seed, 4);
        for (tag, p) in [("pf1", 1.0), ("spf1", 1.0), ("pf2", 2.0), ("spf2", 2.0), ("spf4", 4.0)] {
            let kind: IntegratorKind = tag.parse().unwrap();
            let errs = local_errors(&pair, kind, &hs);
            let slope = loglog_slope(&hs, &errs);
            assert!((slope - (p + 1.0)).abs() <= 0.3, "{tag} seed {seed}: slope {slope}, errors {errs:?}");
        }
        // Orders 6 and 8 reach round-off on the grid above; use larger steps.
        for (tag, p, big) in [("spf6", 6.0, [0.8, 0.4, 0.2]), ("spf8", 8.0, [1.0, 0.7, 0.5])] {
            let errs = local_errors(&pair, tag.parse().unwrap(), &big);
            let slope = loglog_slope(&big, &errs);
            assert!((slope - (p + 1.0)).abs() <= 0.6, "{tag} seed {seed}: slope {slope}, errors {errs:?}");
        }
    }
}

#[test]
fn exp_step_error_scales_quadratically() {
    let t = 100.0;
    let hs = [0.4, 0.2, 0.1, 0.05];
    for seed in 0..5 {
        let pair = random_pair(2000 + seed, 3);
        let errs: Vec<f64> = hs
            .iter()
            .map(|&h| {
                let ds = h / t;
                let exact = exact_step(&pair, &Schedule::Linear, h, 0.3, ds, 1e-13).unwrap();
                let w = walk_operator(&pair, &Schedule::Linear, IntegratorKind::Exp, h, 0.3, ds).unwrap();
                operator_norm(&(w.matrix() - exact.matrix()))
            })
            .collect();
        let slope = loglog_slope(&hs, &errs);
        assert!((slope - 2.0).abs() <= 0.2, "seed {seed}: slope {slope}");
    }
}

#[test]
fn suzuki_recursion_constant() {
    // The fourth-order Suzuki weight, known to many digits.
    assert!((suzuki_u(2) - 0.414_490_771_794_375_7).abs() < 1e-15);
    assert!(suzuki_coefficients(3).is_err());
}

#[test]
fn gapless_step_size_is_an_error() {
    let pair = random_pair(7, 3);
    let c = ProblemConstants::compute(&pair, 0.0).unwrap();
    let err = recommended_step_size(&c, IntegratorKind::Pf1).unwrap_err();
    assert!(err.is_numerical());
}
