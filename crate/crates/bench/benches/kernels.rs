use criterion::{black_box, criterion_group, criterion_main, Criterion};

use frob_core::charsums::{self, CharSumConfig, Exclusion};
use frob_core::dynamics;
use frob_core::exactlin::{berlekamp_massey, charpoly, IntMatrix};
use frob_core::ff::{build_dlog, make_field_of_order};
use frob_core::hecke::{self, HeckeParams};
use frob_core::lattice::{self, BoltzmannData, SublatticeD};
use frob_core::spans::{self, ConstructibleSet};
use num_bigint::BigInt;
use num_rational::BigRational;

fn fields(c: &mut Criterion) {
    c.bench_function("dlog F_3^7", |b| {
        let f = make_field_of_order(2187).unwrap();
        b.iter(|| build_dlog(black_box(&f)).unwrap())
    });
}

fn exact(c: &mut Criterion) {
    let rows: Vec<Vec<i64>> = (0..12).map(|i| (0..12).map(|j| ((i * 7 + j * 3) % 11) as i64 - 5).collect()).collect();
    let m = IntMatrix::from_rows(&rows).unwrap();
    c.bench_function("charpoly 12x12", |b| b.iter(|| charpoly(black_box(&m)).unwrap()));
    let seq: Vec<BigRational> = (1..=40u32)
        .map(|k| BigRational::from_integer(BigInt::from(3).pow(k) - BigInt::from(-2).pow(k) + 5))
        .collect();
    c.bench_function("berlekamp-massey 40 terms", |b| b.iter(|| berlekamp_massey(black_box(&seq))));
}

fn hecke_kernels(c: &mut Criterion) {
    let p = HeckeParams::from_order(13, 2, 1).unwrap();
    c.bench_function("hecke family q=13", |b| b.iter(|| hecke::hecke_family(black_box(&p)).unwrap()));
    let p2 = HeckeParams::from_order(7, 3, 2).unwrap();
    c.bench_function("trace identities q=7 n=2", |b| b.iter(|| hecke::trace_identities(black_box(&p2), 1).unwrap()));
}

fn other_kernels(c: &mut Criterion) {
    c.bench_function("chebyshev fixed points N=9973", |b| b.iter(|| dynamics::cheb_fixed_points(black_box(9973), 1).unwrap()));
    let f = make_field_of_order(3).unwrap();
    let fr = spans::frobenius_graph(&ConstructibleSet::affine(&f, 1));
    c.bench_function("z table Fr A1 F_3 n,m<=4", |b| b.iter(|| spans::z_table(black_box(&fr), 4, 4).unwrap()));
    let model = BoltzmannData::random(&[2, 2], 1).unwrap();
    let lat = SublatticeD::nmk(3, 3, 1).unwrap();
    c.bench_function("graph contraction 3x3 sheared", |b| b.iter(|| lattice::partition_lattice(black_box(&model), &lat).unwrap()));
    c.bench_function("transfer matrix n=3", |b| b.iter(|| lattice::transfer_matrix(black_box(&model), 3).unwrap()));
    let mut cfg = CharSumConfig::new(9, 2, 3);
    cfg.exclusion = Exclusion::IncludeX;
    c.bench_function("X_n q=9 n=2", |b| b.iter(|| charsums::x_n_set(black_box(&cfg)).unwrap()));
}

criterion_group!(benches, fields, exact, hecke_kernels, other_kernels);
criterion_main!(benches);
