//! Benchmarks for the hot paths: standard-root computation and determinant
//! evaluation with cached Schur forms.

use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;
use pencil_core::{EllipticTuple, RMatrix};

fn fig1_tuple() -> EllipticTuple {
    EllipticTuple::new(
        RMatrix::from_row_slice(2, 2, &[5.0, 0.6, 0.6, 1.5]),
        RMatrix::from_row_slice(2, 2, &[0.25, -0.4, -0.4, -0.2]),
        RMatrix::identity(2, 2),
    )
    .unwrap()
}

fn bench_standard_root(c: &mut Criterion) {
    let t = fig1_tuple();
    c.bench_function("standard_root_2x2", |b| {
        b.iter(|| pencil_core::standard_root::compute_standard_root(std::hint::black_box(&t)))
    });
}

fn bench_det_eval(c: &mut Criterion) {
    let t = fig1_tuple();
    let ctx = pencil_core::exponent_solver::context_for(
        &t,
        pencil_core::BoundaryCondition::Mixed,
        4.5,
    )
    .unwrap();
    c.bench_function("det_m_cached_schur", |b| {
        b.iter(|| {
            pencil_core::bc_matrices::det_m(
                std::hint::black_box(&ctx),
                Complex64::new(0.6, 0.1),
                pencil_core::BoundaryCondition::Mixed,
            )
        })
    });
}

criterion_group!(benches, bench_standard_root, bench_det_eval);
criterion_main!(benches);
