use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use driftlab::bounds::bound_trials;
use driftlab::surrogate::{
    companion_spectral_radius, FirstOrderState, Initial, SecondOrderOptions, SecondOrderState,
};
use driftlab::{run_trajectory, Schedule, ScheduleKind, SurrogateParams};

fn trajectories(c: &mut Criterion) {
    let p = SurrogateParams::new(1.0).unwrap();
    let s = Schedule::linear(1000).unwrap();
    c.bench_function("first_order_T1000", |b| {
        b.iter(|| {
            let init = Initial::FirstOrder(FirstOrderState::new(black_box(0.08)).unwrap());
            run_trajectory(&p, init, &s, SecondOrderOptions::default()).unwrap()
        })
    });
    c.bench_function("second_order_T1000", |b| {
        b.iter(|| {
            let init = Initial::SecondOrder(SecondOrderState::new(black_box(0.08)).unwrap());
            run_trajectory(&p, init, &s, SecondOrderOptions::default()).unwrap()
        })
    });
}

fn spectral_grid(c: &mut Criterion) {
    c.bench_function("spectral_radius_200x200", |b| {
        b.iter(|| {
            let mut stable = 0;
            for i in 0..200 {
                let eta = -4.0 + 6.0 * i as f64 / 199.0;
                for j in 0..200 {
                    let beta = 0.999 * j as f64 / 199.0;
                    stable += (companion_spectral_radius(black_box(eta), beta) < 1.0) as usize;
                }
            }
            stable
        })
    });
}

fn bound_checks(c: &mut Criterion) {
    let p = SurrogateParams::new(1.0).unwrap();
    let kinds = [ScheduleKind::Linear, ScheduleKind::Sine];
    c.bench_function("bound_trials_200", |b| {
        b.iter(|| bound_trials(&p, &kinds, 100, None, 200, black_box(0)).unwrap())
    });
}

criterion_group!(benches, trajectories, spectral_grid, bound_checks);
criterion_main!(benches);
