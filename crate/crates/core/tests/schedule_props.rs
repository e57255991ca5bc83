use adiawalk::schedules::*;
use proptest::prelude::*;

fn all_kinds(n: u64, p: f64) -> Vec<Schedule> {
    vec![Schedule::Linear, Schedule::Glue, Schedule::Composite, Schedule::grover(n, p).unwrap()]
}

/// Trapezoid rule; spectrally accurate for integrands that vanish with all derivatives at both ends.
fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|k| f(a + k as f64 * h)).sum();
    h * (inner + 0.5 * (f(a) + f(b)))
}

fn bump(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        (-1.0 / (t * (1.0 - t))).exp()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn endpoints_monotone_symmetric(logn in 1u32..40, p in 1.0f64..1.99) {
        let n = 1u64 << logn;
        for sched in all_kinds(n, p) {
            prop_assert!(sched.f(0.0).abs() <= 1e-10);
            prop_assert!((sched.f(1.0) - 1.0).abs() <= 1e-10);
            let mut prev = 0.0;
            for i in 0..=2000 {
                let s = i as f64 / 2000.0;
                let x = sched.eval(s).unwrap();
                prop_assert!(x.f >= prev - 1e-15, "{:?} not monotone at {}", sched.to_spec().kind, s);
                prop_assert!(x.df >= 0.0);
                // Every implemented schedule is point-symmetric about (1/2, 1/2).
                prop_assert!((sched.f(1.0 - s) - (1.0 - x.f)).abs() <= 1e-10);
                prev = x.f;
            }
        }
    }

    #[test]
    fn grover_schedule_solves_its_ode(logn in 2u32..24, p in 1.0f64..1.9) {
        let n = 1u64 << logn;
        let sched = Schedule::grover(n, p).unwrap();
        let d = grover_d_constant(n, p).unwrap();
        let delta = 1e-6;
        for i in 1..1000 {
            let s = i as f64 / 1000.0;
            // Centred difference of the value, independent of the analytic derivative.
            let fd = (sched.f(s + delta) - sched.f(s - delta)) / (2.0 * delta);
            let rhs = d * grover_gap_m1(sched.f(s), n as f64).powf(p);
            prop_assert!((fd - rhs).abs() <= 1e-6 * rhs.max(1.0), "s={} fd={} rhs={}", s, fd, rhs);
            let an = sched.eval(s).unwrap().df;
            prop_assert!((an - rhs).abs() <= 1e-9 * rhs.max(1.0));
        }
    }

    #[test]
    fn d_constant_matches_trapezoid(logn in 1u32..14, p in 1.0f64..1.99) {
        let n = 1u64 << logn;
        let nf = n as f64;
        // The integrand peaks at f = 1/2 with width ~1/√N; enough panels resolve it.
        let oracle = trapezoid(|f| grover_gap_m1(f, nf).powf(-p), 0.0, 1.0, 400_000);
        let d = grover_d_constant(n, p).unwrap();
        prop_assert!((d - oracle).abs() <= 1e-7 * d, "{} vs {}", d, oracle);
    }
}

#[test]
fn glue_constant_matches_trapezoid() {
    let oracle = trapezoid(bump, 0.0, 1.0, 20_000);
    assert!((glue_constant_ce() - oracle).abs() <= 1e-15, "{} vs {oracle}", glue_constant_ce());
}

#[test]
fn glue_derivative_matches_difference_quotient() {
    for i in 1..100 {
        let s = i as f64 / 100.0;
        let d = 1e-5;
        let fd = (Schedule::Glue.f(s + d) - Schedule::Glue.f(s - d)) / (2.0 * d);
        let an = Schedule::Glue.eval(s).unwrap().df;
        assert!((fd - an).abs() <= 1e-7 * an.max(1.0), "s={s}");
    }
}

#[test]
fn composite_flat_at_joints() {
    // Forward differences of orders 1..3 at each flat point, scaled by δ^(order+4),
    // keep shrinking as δ halves: faster than any tested power.
    for (s0, dir) in [(0.0, 1.0), (0.5, -1.0), (0.5, 1.0), (1.0, -1.0)] {
        for order in 1..=3usize {
            let mut prev = f64::INFINITY;
            let mut last = 0.0;
            for k in 3..=8 {
                let delta = 0.1 / 2f64.powi(k);
                let pts: Vec<f64> = (0..=order).map(|j| Schedule::Composite.f(s0 + dir * delta * j as f64)).collect();
                let diff = match order {
                    1 => pts[1] - pts[0],
                    2 => pts[2] - 2.0 * pts[1] + pts[0],
                    _ => pts[3] - 3.0 * pts[2] + 3.0 * pts[1] - pts[0],
                };
                let scaled = diff.abs() / delta.powi(order as i32 + 4);
                assert!(scaled <= prev, "s0={s0} dir={dir} order={order} k={k}");
                prev = scaled;
                last = diff.abs();
            }
            assert!(last <= 1e-20, "s0={s0} order={order}: {last}");
        }
    }
}

#[test]
fn spec_round_trip_and_validation() {
    for sched in all_kinds(256, 1.5) {
        let spec = sched.to_spec();
        let json = serde_json::to_string(&spec).unwrap();
        let back = Schedule::from_spec(&serde_json::from_str(&json).unwrap()).unwrap();
        for i in 0..=50 {
            let s = i as f64 / 50.0;
            assert!((back.f(s) - sched.f(s)).abs() <= 1e-15);
        }
    }
    assert!(serde_json::from_str::<ScheduleSpec>(r#"{"kind":"linear","extra":1}"#).is_err());
    assert!(Schedule::grover(256, 2.0).is_err());
    assert!(Schedule::grover(1, 1.0).is_err());
    assert!(Schedule::Linear.eval(1.5).is_err());
}
