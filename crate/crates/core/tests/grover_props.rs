use adiawalk::grover::*;
use adiawalk::integrators::{walk_operator, IntegratorKind};
use adiawalk::linalg::*;
use adiawalk::schedules::Schedule;
use proptest::prelude::*;

fn instance() -> impl Strategy<Value = GroverInstance> {
    (2u32..50, 0u32..20).prop_filter_map("N ≥ 2M", |(logn, logm)| {
        let n = 1u64 << logn;
        let m = 1u64 << logm.min(logn - 1);
        GroverInstance::new(n, m).ok()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn walk_gap_dominates_two_thirds_of_hamiltonian_gap(inst in instance()) {
        for i in 0..=1000 {
            let f = i as f64 / 1000.0;
            let (gh, gw) = gap_closed_forms(inst, f).unwrap();
            prop_assert!(gw >= 2.0 / 3.0 * gh - 1e-15, "f={} gapH={} gapW={}", f, gh, gw);
        }
    }

    #[test]
    fn closed_form_eigenvalues_match_numerics(logn in 2u32..30, logm in 0u32..10, f in 0.0f64..=1.0) {
        let n = 1u64 << logn;
        let m = 1u64 << logm.min(logn - 1);
        let inst = GroverInstance::new(n, m).unwrap();
        let pair = effective_hamiltonians(inst).unwrap();
        let w = walk_operator(&pair, &Schedule::Linear, IntegratorKind::Pf1, 1.0, f, 0.0).unwrap();
        let mut num: Vec<f64> = normal_eig(w.matrix()).unwrap().phases();
        let (a, b) = walk_eigenvalues(inst, f);
        let mut cf = vec![eigenphase(a), eigenphase(b)];
        num.sort_by(f64::total_cmp);
        cf.sort_by(f64::total_cmp);
        for (x, y) in num.iter().zip(&cf) {
            prop_assert!(phase_distance(*x, *y) <= 1e-10);
        }
        // Numerical gap agrees with the closed form.
        let gw = gap_closed_forms(inst, f).unwrap().1;
        prop_assert!((phase_distance(num[0], num[1]) - gw).abs() <= 1e-10);
    }

    #[test]
    fn angles_are_complementary(logn in 2u32..30, t in 1u64..500, p in 1.0f64..1.9) {
        let sched = Schedule::grover(1 << logn, p).unwrap();
        let a = qaoa_angles(&sched, t).unwrap();
        prop_assert_eq!(a.betas.len(), t as usize);
        for (b, g) in a.betas.iter().zip(&a.gammas) {
            prop_assert!((b + g - 1.0).abs() <= 1e-15);
        }
    }

    #[test]
    fn search_preserves_norm(inst in instance(), t in 1u64..2000) {
        let r = run_search(inst, &Schedule::Linear, t).unwrap();
        let norm: f64 = r.final_state.iter().map(|z| z.norm_sqr()).sum();
        prop_assert!((norm - 1.0).abs() <= 1e-12);
        prop_assert!((r.error.powi(2) + r.success_probability - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn every_schedule_converges_for_long_runs() {
    let inst = GroverInstance::new(64, 1).unwrap();
    for kind in [GroverScheduleKind::Power { p: 1.0 }, GroverScheduleKind::Power { p: 1.5 }, GroverScheduleKind::Linear, GroverScheduleKind::Composite] {
        let sched = kind.build(64).unwrap();
        let errs: Vec<f64> = [1_000u64, 10_000, 100_000].iter().map(|&t| run_search(inst, &sched, t).unwrap().error).collect();
        assert!(errs[2] < 0.02, "{}: {errs:?}", kind.label());
    }
}

#[test]
fn replay_reproduces_search() {
    let inst = GroverInstance::new(1 << 10, 2).unwrap();
    let sched = Schedule::grover(1 << 10, 1.0).unwrap();
    let direct = run_search(inst, &sched, 300).unwrap();
    let replay = replay_angles(inst, &qaoa_angles(&sched, 300).unwrap()).unwrap();
    assert!((direct.error - replay.error).abs() <= 1e-14);
}

#[test]
fn threshold_flag_and_validation() {
    let n = 1u64 << 12;
    let sched = Schedule::grover(n, 1.0).unwrap();
    let thr = power_threshold(n, 1.0).unwrap();
    let inst = GroverInstance::new(n, 1).unwrap();
    assert!(run_search(inst, &sched, (thr * 0.5) as u64).unwrap().below_threshold);
    assert!(!run_search(inst, &sched, (thr * 2.0) as u64).unwrap().below_threshold);
    assert!(GroverInstance::new(4, 3).is_err());
    assert!(GroverInstance::new(4, 0).is_err());
    assert!(min_steps(inst, &sched, 1.5).is_err());
}

#[test]
fn scaling_rows_sorted() {
    let rows = scaling_experiment(&[2, 1], &[1 << 8, 1 << 6], GroverScheduleKind::Power { p: 1.0 }, 0.2).unwrap();
    let keys: Vec<(u64, u64)> = rows.iter().map(|r| (r.n, r.m)).collect();
    assert_eq!(keys, vec![(64, 1), (64, 2), (256, 1), (256, 2)]);
    for r in &rows {
        let t = r.t_required.unwrap();
        let inst = GroverInstance::new(r.n, r.m).unwrap();
        let sched = Schedule::grover(r.n, 1.0).unwrap();
        assert!(run_search(inst, &sched, t).unwrap().error <= 0.2);
        if t > 1 {
            assert!(run_search(inst, &sched, t - 1).unwrap().error > 0.2);
        }
    }
}
