use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;

use npch_bench::{random_spd, symmetric};
use npch_core::acceptance::hyperbolic_prototype;
use npch_core::bochner::{check_form4, standard_generators, TestMap};
use npch_core::cylinder::{relax_dirichlet, CylinderGrid, RelaxParams};
use npch_core::isometry::decay_ray;
use npch_core::npc::HyperbolicDisk;
use npch_core::spd::{spd_distance, sym_eig, GroupElement};
use npch_core::Geometry;

fn eig(c: &mut Criterion) {
    for n in [3, 5] {
        let s = symmetric(n, 1);
        c.bench_function(&format!("sym_eig/{n}"), |b| b.iter(|| sym_eig(black_box(&s))));
    }
}

fn distances(c: &mut Criterion) {
    let p = random_spd(3, 1);
    let q = random_spd(3, 2);
    c.bench_function("spd_distance/3", |b| {
        b.iter(|| spd_distance(black_box(&p), black_box(&q)))
    });
    let z = Complex64::new(0.3, -0.2);
    let w = Complex64::new(-0.5, 0.6);
    c.bench_function("disk_distance", |b| {
        b.iter(|| HyperbolicDisk.distance(black_box(&z), black_box(&w)))
    });
}

fn relax(c: &mut Criterion) {
    let proto = hyperbolic_prototype(1.0, 0.1).unwrap();
    let grid = CylinderGrid::with_aspect(4.0, 32, 1.0).unwrap();
    let start = proto.section(grid);
    let params = RelaxParams {
        max_sweeps: 10,
        tol: 0.0,
        omega: None,
    };
    let g = &**proto.space();
    c.bench_function("relax/h2_32x32_10_sweeps", |b| {
        b.iter(|| relax_dirichlet(g, black_box(start.clone()), &params).is_ok())
    });
}

fn decay(c: &mut Criterion) {
    let g = GroupElement::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
    c.bench_function("decay_ray/jordan2", |b| b.iter(|| decay_ray(black_box(&g), 40.0, 400)));
}

fn bochner(c: &mut Criterion) {
    let (_, generator) = standard_generators().remove(0);
    let m = TestMap::new(generator, 8).unwrap();
    c.bench_function("bochner/form4_mesh8", |b| b.iter(|| check_form4(black_box(&m))));
}

criterion_group!(benches, eig, distances, relax, decay, bochner);
criterion_main!(benches);
