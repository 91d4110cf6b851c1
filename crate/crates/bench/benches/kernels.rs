use criterion::{black_box, criterion_group, criterion_main, Criterion};
use uulab_core::periodic::return_distance;
use uulab_core::srb::SrbChain;
use uulab_core::{BinGrid, MapSpec, NoiseConfig, Real, Scalar, ShootConfig, Shooter, Vec3};

fn scalar_ops(c: &mut Criterion) {
    let x = Scalar::from_f64(0.123456789);
    c.bench_function("dd_sin_cos_2pi", |b| b.iter(|| black_box(x).sin_cos_2pi()));
    c.bench_function("dd_mul_add", |b| {
        b.iter(|| black_box(x) * black_box(x) + black_box(x))
    });
    c.bench_function("f64_sin_cos_2pi", |b| b.iter(|| black_box(0.123456789f64).sin_cos_2pi()));
}

fn map_step(c: &mut Criterion) {
    let spec = MapSpec::dissipative(0.1);
    let p = Vec3::from_f64(0.3, 0.6, 0.9);
    c.bench_function("map_apply_dd", |b| b.iter(|| spec.apply(black_box(p), false)));
    let pf = Vec3::new(0.3f64, 0.6, 0.9);
    c.bench_function("map_apply_f64", |b| b.iter(|| spec.apply(black_box(pf), false)));
    c.bench_function("map_inverse_dd", |b| b.iter(|| spec.apply_inverse(black_box(p), false)));
}

fn shooting(c: &mut Criterion) {
    let shooter = Shooter::new(MapSpec::conservative(0.1), ShootConfig::default()).unwrap();
    let mut y0 = 0i64;
    c.bench_function("shoot_one_level", |b| {
        b.iter(|| {
            y0 = y0 % 100_000 + 1;
            shooter.shoot(black_box(y0)).unwrap()
        })
    });
}

fn srb_step(c: &mut Criterion) {
    let cfg = NoiseConfig {
        burn_in: 0,
        ..NoiseConfig::default()
    };
    let mut chain = SrbChain::new(MapSpec::dissipative(0.1), &cfg).unwrap();
    c.bench_function("srb_step", |b| b.iter(|| chain.next()));
}

fn statistics(c: &mut Criterion) {
    let mut grid = BinGrid::new(200).unwrap();
    let (x, z, w) = (Scalar::from_f64(0.4), Scalar::from_f64(0.7), Scalar::ONE);
    c.bench_function("bin_add", |b| b.iter(|| grid.add(black_box(x), black_box(z), w)));
    let spec = MapSpec::conservative(0.05);
    let p = Vec3::new(0.21f64, 0.43, 0.65);
    c.bench_function("period3_return_distance_f64", |b| b.iter(|| return_distance(&spec, black_box(p), 3)));
}

criterion_group!(benches, scalar_ops, map_step, shooting, srb_step, statistics);
criterion_main!(benches);
