use driftlab::bounds::bound_trials;
use driftlab::identifiability::{density_gap_scan, drift_gap_scan, random_measure, ScanGrid};
use driftlab::kernel::{check_log_gradient_identity, single_drift, smoothed_density, FD_STEP};
use driftlab::rng::trial_stream;
use driftlab::surrogate::{
    FirstOrderState, Initial, LinearDrive, MomentumVariant, SecondOrderOptions, SecondOrderState,
};
use driftlab::toy::frechet_distance;
use driftlab::{
    drift, friction_scaled_drift, run_trajectory, DiscreteMeasure, DriftConfig, Kernel,
    KernelFamily, SampleRole, SampleSet, Schedule, ScheduleKind, SurrogateParams,
};
use proptest::prelude::*;

fn family() -> impl Strategy<Value = KernelFamily> {
    prop_oneof![Just(KernelFamily::Laplace), Just(KernelFamily::Gaussian)]
}

fn point(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0..3.0f64, dim)
}

/// `(dim, p atoms, q atoms, query)`.
type Batches = (usize, Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<f64>);

fn batches() -> impl Strategy<Value = Batches> {
    (1usize..=4).prop_flat_map(|d| {
        (
            Just(d),
            prop::collection::vec(point(d), 1..8),
            prop::collection::vec(point(d), 1..8),
            point(d),
        )
    })
}

fn sets(p: &[Vec<f64>], q: &[Vec<f64>]) -> (SampleSet, SampleSet) {
    (
        SampleSet::new(p.to_vec(), SampleRole::TargetP).unwrap(),
        SampleSet::new(q.to_vec(), SampleRole::GeneratedQ).unwrap(),
    )
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Householder reflection `I - 2 v v^T / |v|^2` applied to `x`.
fn reflect(v: &[f64], x: &[f64]) -> Vec<f64> {
    let vv: f64 = v.iter().map(|a| a * a).sum();
    let vx: f64 = v.iter().zip(x).map(|(a, b)| a * b).sum();
    x.iter()
        .zip(v)
        .map(|(xi, vi)| xi - 2.0 * vx / vv * vi)
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    // Bandwidths from 0.5 keep exp(-d^2 / 2 tau^2) above the underflow
    // threshold on the [-3, 3]^d sampling box.
    #[test]
    fn kernel_symmetric_and_bounded(f in family(), tau in 0.5..5.0f64, x in point(3), y in point(3)) {
        let k = Kernel::new(f, tau).unwrap();
        let kxy = k.eval(&x, &y).unwrap();
        prop_assert_eq!(kxy, k.eval(&y, &x).unwrap());
        prop_assert!(kxy > 0.0 && kxy <= 1.0);
        prop_assert_eq!(k.eval(&x, &x).unwrap(), 1.0);
    }

    #[test]
    fn gaussian_gradient_bounded(tau in 0.1..5.0f64, x in point(4), y in point(4)) {
        let k = Kernel::gaussian(tau).unwrap();
        let g = k.grad_x(&x, &y).unwrap();
        let norm = g.iter().map(|a| a * a).sum::<f64>().sqrt();
        prop_assert!(norm <= 1.0 / (tau * std::f64::consts::E.sqrt()) * (1.0 + 1e-12));
    }

    #[test]
    fn gaussian_log_gradient_identity(seed in any::<u64>(), dim in 1usize..=4, atoms in 1usize..=10,
                                      tau in 0.5..2.0f64, x in point(4)) {
        let mu = random_measure(&mut trial_stream(seed, 0, 0), atoms, dim, 2.0).unwrap();
        let k = Kernel::gaussian(tau).unwrap();
        let r = check_log_gradient_identity(&k, &mu, &x[..dim], FD_STEP).unwrap();
        prop_assert!(r < 1e-4, "residual {}", r);
    }

    #[test]
    fn density_positive_and_single_atom_drift(f in family(), tau in 0.5..5.0f64,
                                              y in point(3), x in point(3)) {
        let k = Kernel::new(f, tau).unwrap();
        let mu = DiscreteMeasure::dirac(y.clone()).unwrap();
        prop_assert!(smoothed_density(&k, &mu, &x).unwrap() > 0.0);
        let v = single_drift(&k, &mu, &x, true).unwrap();
        for ((vi, yi), xi) in v.iter().zip(&y).zip(&x) {
            prop_assert_eq!(*vi, yi - xi);
        }
    }

    #[test]
    fn drift_translation_equivariant(f in family(), (d, p, q, x) in batches(), c in point(4)) {
        let cfg = DriftConfig::new(Kernel::new(f, 1.0).unwrap());
        let (ps, qs) = sets(&p, &q);
        let base = drift(&cfg, &ps, &qs, &x).unwrap();
        let shift = |v: &Vec<f64>| v.iter().zip(&c[..d]).map(|(a, b)| a + b).collect::<Vec<_>>();
        let (ps2, qs2) = sets(
            &p.iter().map(shift).collect::<Vec<_>>(),
            &q.iter().map(shift).collect::<Vec<_>>(),
        );
        let moved = drift(&cfg, &ps2, &qs2, &shift(&x)).unwrap();
        prop_assert!(dist(&base, &moved) < 1e-10, "{:?} vs {:?}", base, moved);
    }

    #[test]
    fn drift_rotation_equivariant(f in family(), (d, p, q, x) in batches(), v in point(4)) {
        let v = &v[..d];
        prop_assume!(v.iter().map(|a| a * a).sum::<f64>() > 1e-3);
        let cfg = DriftConfig::new(Kernel::new(f, 1.0).unwrap());
        let (ps, qs) = sets(&p, &q);
        let base = drift(&cfg, &ps, &qs, &x).unwrap();
        let (ps2, qs2) = sets(
            &p.iter().map(|a| reflect(v, a)).collect::<Vec<_>>(),
            &q.iter().map(|a| reflect(v, a)).collect::<Vec<_>>(),
        );
        let turned = drift(&cfg, &ps2, &qs2, &reflect(v, &x)).unwrap();
        prop_assert!(dist(&reflect(v, &base), &turned) < 1e-10);
    }

    #[test]
    fn drift_vanishes_when_p_equals_q(f in family(), (_d, p, _q, x) in batches()) {
        let cfg = DriftConfig { exclude_self: false, ..DriftConfig::new(Kernel::new(f, 1.0).unwrap()) };
        let (ps, qs) = sets(&p, &p);
        let v = drift(&cfg, &ps, &qs, &x).unwrap();
        prop_assert!(v.iter().all(|c| c.abs() < 1e-12), "{:?}", v);
    }

    #[test]
    fn friction_is_linear(f in family(), (_d, p, q, x) in batches(), gamma in 0.0..=1.0f64) {
        let cfg = DriftConfig::new(Kernel::new(f, 1.0).unwrap());
        let (ps, qs) = sets(&p, &q);
        let full = friction_scaled_drift(&cfg, &ps, &qs, &x, 0.0).unwrap();
        let damped = friction_scaled_drift(&cfg, &ps, &qs, &x, gamma).unwrap();
        for (a, b) in full.iter().zip(&damped) {
            prop_assert_eq!((1.0 - gamma) * a, *b);
        }
    }

    #[test]
    fn raw_two_particle_reduction(a in 1e-3..6.0f64, tau in 0.2..3.0f64) {
        let cfg = DriftConfig::raw(Kernel::laplace(tau).unwrap());
        let (ps, qs) = sets(&[vec![0.0]], &[vec![-a]]);
        let v = drift(&cfg, &ps, &qs, &[a]).unwrap()[0];
        let kt = (-a / tau).exp();
        let expected = a * (2.0 * kt * kt - kt);
        prop_assert!((v - expected).abs() < 1e-14 * a.max(1.0));
    }

    #[test]
    fn threshold_and_factorization(tau in 0.2..3.0f64, s in 1e-6..5.0f64) {
        let p = SurrogateParams::new(tau).unwrap();
        let a = s * tau;
        let star = tau * std::f64::consts::LN_2;
        if (a - star).abs() > 1e-12 * tau {
            prop_assert_eq!(p.lambda(a) > 1.0, a < star);
            prop_assert_eq!(p.k_d(a) > p.k_t(a) / 2.0, a < star);
        }
        let e = (-a / tau).exp();
        let lhs = p.surrogate_map(a) - a;
        prop_assert!((lhs - a * e * (2.0 * e - 1.0)).abs() < 1e-14 * a.max(1.0));
        prop_assert!(p.margin_eta(a) >= -0.125 - 1e-15 && p.margin_eta(a) <= 1.0);
    }

    #[test]
    fn multiplier_positive(tau in 0.2..3.0f64, s in 0.0..20.0f64, gamma in 0.0..=1.0f64) {
        let p = SurrogateParams::new(tau).unwrap();
        prop_assert!(p.lambda_gamma(s * tau, gamma) >= 0.875 - 1e-15);
    }

    #[test]
    fn monotone_trapping(tau in 0.2..3.0f64, frac in 1e-3..0.999f64, above in any::<bool>()) {
        let p = SurrogateParams::new(tau).unwrap();
        let star = p.fixed_points().1;
        let a0 = if above { star + frac * 9.0 * tau } else { frac * star };
        let rec = run_trajectory(
            &p,
            Initial::FirstOrder(FirstOrderState::new(a0).unwrap()),
            &Schedule::constant(0.0, 20).unwrap(),
            SecondOrderOptions::default(),
        ).unwrap();
        let a = rec.positions();
        for w in a.windows(2) {
            if above {
                prop_assert!(w[1] < w[0] && w[1] > star);
            } else {
                prop_assert!(w[1] > w[0] && w[1] < star);
            }
        }
    }

    #[test]
    fn heavy_ball_recurrence(x0 in -2.0..2.0f64, eta in -1.5..0.5f64, frozen in any::<bool>(),
                             kind in prop_oneof![Just(ScheduleKind::Linear), Just(ScheduleKind::Sine),
                                                 Just(ScheduleKind::Quadratic), Just(ScheduleKind::DelayedDefault)]) {
        let p = SurrogateParams::new(1.0).unwrap();
        let drive = if frozen { LinearDrive::Frozen(eta) } else { LinearDrive::Surrogate };
        let schedule = Schedule::new(kind, 100).unwrap();
        let mut state = SecondOrderState::new(x0).unwrap();
        let mut history = vec![x0, x0];
        for i in 0..100 {
            let g = schedule.gamma(i).unwrap();
            state = p.step_second_order(state, g, drive, MomentumVariant::HeavyBall).unwrap();
            let next = p.heavy_ball_position(&history, g, drive).unwrap();
            history.push(next);
            prop_assert!((state.x - next).abs() <= 1e-12 * state.x.abs().max(1.0));
        }
    }

    #[test]
    fn schedules_admissible_and_ordered(t in 3usize..400) {
        for kind in [ScheduleKind::Linear, ScheduleKind::Quadratic, ScheduleKind::Sine, ScheduleKind::DelayedDefault] {
            let g = Schedule::new(kind, t).unwrap().values();
            prop_assert_eq!(g[0], 0.0);
            prop_assert_eq!(g[t - 1], 1.0);
            prop_assert!(g.windows(2).all(|w| w[0] <= w[1]));
        }
        let r = |k| Schedule::new(k, t).unwrap().residual_sum();
        prop_assert!(r(ScheduleKind::Quadratic) > r(ScheduleKind::Linear));
        prop_assert!(r(ScheduleKind::Linear) > r(ScheduleKind::Sine));
    }

    #[test]
    fn frechet_symmetric(a in prop::collection::vec(point(2), 3..30), b in prop::collection::vec(point(2), 3..30)) {
        let sa = SampleSet::new(a, SampleRole::GeneratedQ).unwrap();
        let sb = SampleSet::new(b, SampleRole::TargetP).unwrap();
        let ab = frechet_distance(&sa, &sb).unwrap().fd;
        let ba = frechet_distance(&sb, &sa).unwrap().fd;
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - ba).abs() < 1e-9 * ab.max(1.0));
        prop_assert!(frechet_distance(&sa, &sa).unwrap().fd < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bound_chains_hold(seed in any::<u64>(), horizon in 2usize..150) {
        let p = SurrogateParams::new(1.0).unwrap();
        let kinds = [ScheduleKind::Linear, ScheduleKind::Quadratic, ScheduleKind::Sine, ScheduleKind::DelayedDefault];
        let rows = bound_trials(&p, &kinds, horizon, None, 8, seed).unwrap();
        prop_assert!(rows.iter().all(|r| r.holds));
    }

    #[test]
    fn identical_measures_have_no_gap(seed in any::<u64>(), dim in 1usize..=4, atoms in 1usize..=20, f in family()) {
        let mu = random_measure(&mut trial_stream(seed, 0, 0), atoms, dim, 2.0).unwrap();
        let k = Kernel::new(f, 1.0).unwrap();
        let res = [0, 61, 31, 11, 5][dim];
        let grid = ScanGrid::cube(dim, 5.0, res).unwrap();
        prop_assert!(drift_gap_scan(&k, &mu, &mu, &grid).unwrap().max_drift_norm < 1e-10);
        prop_assert!(density_gap_scan(&k, &mu, &mu, &grid).unwrap().max_density_gap < 1e-10);
    }
}
