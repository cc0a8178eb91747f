//! Benchmarks for the field-calculus, transport and transform kernels.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use surf_core::calculus::{partial_derivative, Axis};
use surf_core::coeffs::{derived_quantities, gc1_residual};
use surf_core::families::{make_constant, make_rotation};
use surf_core::frames::{integrate_frame, FrameState, SweepOrder, SystemSelector};
use surf_core::goursat::{solve_goursat, GoursatProblem, GoursatRhs};
use surf_core::grid::{GridSpec, ScalarField};
use surf_core::wcong::{backlund, BacklundKind};

fn bench_calculus(c: &mut Criterion) {
    let g = GridSpec::square(129, 0.0, 1.0 / 128.0).unwrap();
    let f = ScalarField::sample(g, |x, y| (x + 2.0 * y).sin() + x * y);
    c.bench_function("third_derivative_129", |b| {
        b.iter(|| partial_derivative(black_box(&f), Axis::X, 3).unwrap())
    });

    let rot = make_rotation(&|s| 0.2 * s.sin(), 0.3, g).unwrap();
    c.bench_function("gc1_residual_129", |b| {
        b.iter(|| gc1_residual(black_box(&rot)).unwrap())
    });
}

fn bench_transport(c: &mut Criterion) {
    let g = GridSpec::square(65, 0.0, 1.0 / 64.0).unwrap();
    let field = make_constant(-1.0, -1.0, 0.0, 0.0, g).unwrap();
    let d = derived_quantities(&field).unwrap();
    c.bench_function("integrate_wilczynski4_65", |b| {
        b.iter(|| {
            integrate_frame(
                black_box(&field),
                &d,
                SystemSelector::Wilczynski4,
                None,
                &FrameState::identity(4),
                SweepOrder::XThenY,
                1e-8,
            )
            .unwrap()
        })
    });
}

fn bench_goursat(c: &mut Criterion) {
    let g = GridSpec::square(65, 1.0, 1.0 / 64.0).unwrap();
    let p = GoursatProblem::from_fn(GoursatRhs::Liouville, &g, |x, y| {
        (2.0 / ((x + y) * (x + y))).ln()
    });
    c.bench_function("goursat_liouville_65", |b| {
        b.iter(|| solve_goursat(black_box(&p), &g).unwrap())
    });
}

fn bench_backlund(c: &mut Criterion) {
    let g = GridSpec::square(65, 0.0, 1.0 / 64.0).unwrap();
    let field = make_constant(1.0, 1.0, 1.5, 1.5, g).unwrap();
    c.bench_function("backlund_isothermal_65", |b| {
        b.iter(|| backlund(black_box(&field), BacklundKind::Isothermal, 0.5, None, 1e-8).unwrap())
    });
}

criterion_group! {
    name = kernels;
    config = Criterion::default().sample_size(20);
    targets = bench_calculus, bench_transport, bench_goursat, bench_backlund
}
criterion_main!(kernels);
