use std::sync::Arc;

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use u21_core::flag::{canonicalize, closure_size, orbits, Frame};
use u21_core::group::{hu_generators, SubgroupSpec};
use u21_core::pseries::{fixed_space, LevelGroup, Model, TorusCharacter};
use u21_core::scalar::rat;
use u21_core::{FieldConfig, GroupElement};

fn field(c: &mut Criterion) {
    let cfg = FieldConfig::with_window(3, 12).unwrap();
    let a = cfg.elem(0, 2, 1);
    let b = cfg.elem(-1, 1, 2);
    c.bench_function("field/mul_inv", |bch| bch.iter(|| black_box(&a).mul(black_box(&b)).inv().unwrap()));
}

fn flags(c: &mut Criterion) {
    let cfg = FieldConfig::with_window(3, 12).unwrap();
    let k = SubgroupSpec::Kn(1).generators(&cfg);
    let g = k.iter().fold(GroupElement::identity(&cfg), |acc, h| acc.mul(h));
    c.bench_function("flag/canonicalize_m3", |bch| bch.iter(|| canonicalize(&cfg, black_box(&g), 3).unwrap()));
    let gens = SubgroupSpec::Kn(1).generators(&cfg);
    c.bench_function("flag/orbits_k1_m2", |bch| {
        bch.iter(|| orbits(&cfg, Frame::for_level(1), 2, &gens, None, "K1", 10_000_000).unwrap())
    });
    let lg = hu_generators(&cfg, 1);
    c.bench_function("flag/closure_level1", |bch| {
        bch.iter(|| closure_size(&cfg, Frame::for_level(1), 1, &lg, 1_000_000).unwrap())
    });
}

fn spaces(c: &mut Criterion) {
    let cfg = FieldConfig::with_window(3, 12).unwrap();
    let chi = TorusCharacter::unramified(&cfg, (2, 3));
    c.bench_function("pseries/fixed_space_k2", |bch| {
        bch.iter(|| {
            let g = Arc::new(LevelGroup::kn(&cfg, 2));
            fixed_space(&cfg, &chi, g, 2, 10_000_000).unwrap().dim()
        })
    });
    let x = rat(2, 3);
    c.bench_function("pseries/theta_specialized_n2", |bch| {
        bch.iter(|| {
            let m = Model::new(&cfg, &chi);
            m.theta(2).unwrap().specialize(&x)
        })
    });
}

criterion_group!(benches, field, flags, spaces);
criterion_main!(benches);
