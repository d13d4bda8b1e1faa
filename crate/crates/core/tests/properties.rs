//! Property tests for the module invariants.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

use frob_core::charsums::{self, CharSumConfig, Exclusion, MatrixFunction};
use frob_core::dynamics;
use frob_core::exactlin::charpoly::eval_at_matrix;
use frob_core::exactlin::{berlekamp_massey, charpoly, numeric_roots, zeta_from_traces, IntMatrix, RatPoly};
use frob_core::ff::{build_dlog, embed, enumerate, extend_field, make_field_of_order, sqrt_count};
use frob_core::hecke::{self, HeckeParams};
use frob_core::lattice::{self, BoltzmannData, SublatticeD};
use frob_core::report::Status;
use frob_core::spans;
use frob_core::zeta::{self, Conj4Config};

fn int(v: i64) -> BigRational {
    BigRational::from_integer(v.into())
}

const ODD_ORDERS: [u64; 8] = [3, 5, 7, 9, 11, 13, 25, 27];

// ------------------------------------------------------------------ fields

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn square_roots_count_every_element_once(qi in 0..ODD_ORDERS.len()) {
        let f = make_field_of_order(ODD_ORDERS[qi]).unwrap();
        let total: u64 = enumerate(&f).unwrap().iter().map(|a| sqrt_count(a).unwrap() as u64).sum();
        prop_assert_eq!(total, f.size() as u64);
    }

    #[test]
    fn field_axioms(q in prop::sample::select(vec![2u64, 3, 4, 5, 8, 9, 16, 25, 27, 49]), a in 0u32..1000, b in 0u32..1000, c in 0u32..1000) {
        let f = make_field_of_order(q).unwrap();
        let s = f.size();
        let (a, b, c) = (f.element(a % s), f.element(b % s), f.element(c % s));
        prop_assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
        prop_assert_eq!(a.mul(&b).unwrap().mul(&c).unwrap(), a.mul(&b.mul(&c).unwrap()).unwrap());
        prop_assert_eq!(a.mul(&b.add(&c).unwrap()).unwrap(), a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap());
        prop_assert_eq!(a.sub(&b).unwrap().add(&b).unwrap(), a.clone());
        if !a.is_zero() {
            prop_assert_eq!(a.mul(&a.inv().unwrap()).unwrap(), f.one());
            prop_assert_eq!(a.pow(s as i64 - 1).unwrap(), f.one());
        }
    }

    #[test]
    fn frobenius_is_an_automorphism_fixing_the_base(q in prop::sample::select(vec![2u64, 3, 4, 5, 7]), n in 1u32..=3, a in 0u32..10_000, b in 0u32..10_000) {
        let base = make_field_of_order(q).unwrap();
        let ext = extend_field(&base, n).unwrap();
        let s = ext.size();
        let (a, b) = (ext.element(a % s), ext.element(b % s));
        let fr = |x: &frob_core::FieldElement| x.pow(q as i64).unwrap();
        if ext.is_tower() {
            // the built-in Frobenius of a tower is relative to its base
            prop_assert_eq!(a.frobenius(), fr(&a));
        }
        prop_assert_eq!(fr(&a.add(&b).unwrap()), fr(&a).add(&fr(&b)).unwrap());
        prop_assert_eq!(fr(&a.mul(&b).unwrap()), fr(&a).mul(&fr(&b)).unwrap());
        let mut it = a.clone();
        for _ in 0..n {
            it = fr(&it);
        }
        prop_assert_eq!(&it, &a);
        let fixed: Vec<u32> = enumerate(&ext).unwrap().into_iter().filter(|x| fr(x) == *x).map(|x| x.index()).collect();
        let mut embedded: Vec<u32> = enumerate(&base).unwrap().iter().map(|x| embed(x, &ext).unwrap().index()).collect();
        embedded.sort();
        prop_assert_eq!(fixed, embedded);
    }

    #[test]
    fn dlog_tables_are_deterministic(q in prop::sample::select(vec![4u64, 9, 25, 27, 32, 49])) {
        let (f1, f2) = (make_field_of_order(q).unwrap(), make_field_of_order(q).unwrap());
        prop_assert_eq!(f1.modulus(), f2.modulus());
        let (d1, d2) = (build_dlog(&f1).unwrap(), build_dlog(&f2).unwrap());
        prop_assert_eq!(d1.generator().index(), d2.generator().index());
        for i in 1..f1.size() {
            prop_assert_eq!(d1.dlog_raw(i), d2.dlog_raw(i));
        }
    }
}

// ------------------------------------------------------------ exact algebra

fn small_matrix() -> impl Strategy<Value = Vec<Vec<i64>>> {
    (3usize..=6).prop_flat_map(|n| prop::collection::vec(prop::collection::vec(-9i64..=9, n), n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn cayley_hamilton(rows in small_matrix()) {
        let m = IntMatrix::from_rows(&rows).unwrap();
        let p = charpoly(&m).unwrap();
        prop_assert_eq!(p.degree(), Some(rows.len()));
        let z = eval_at_matrix(&p, &m.to_rat());
        prop_assert!(z.data().iter().all(Zero::is_zero));
    }

    #[test]
    fn berlekamp_massey_predicts_exponential_sums(
        terms in prop::collection::vec((-6i64..=6, -4i64..=4), 1..=4),
        extra in 1usize..=4,
    ) {
        // a_k = Σ w_i λ_i^k
        let seq_len = 2 * terms.len() + extra;
        let seq: Vec<BigRational> = (1..=seq_len as u32)
            .map(|k| terms.iter().map(|&(lam, w)| int(w) * int(lam).pow(k as i32)).sum())
            .collect();
        let fit = 2 * terms.len();
        let out = berlekamp_massey(&seq[..fit]);
        let rec = out.recurrence().expect("2L terms determine an order ≤ L recurrence");
        prop_assert_eq!(rec.predict(&seq[..fit], extra), seq[fit..].to_vec());
    }

    #[test]
    fn zeta_of_sum_is_product(a in prop::collection::vec(-20i64..=20, 1..=8), b in prop::collection::vec(-20i64..=20, 1..=8)) {
        let n = a.len().min(b.len());
        let (a, b): (Vec<BigRational>, Vec<BigRational>) = (a[..n].iter().map(|&v| int(v)).collect(), b[..n].iter().map(|&v| int(v)).collect());
        let sum: Vec<BigRational> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        prop_assert_eq!(zeta_from_traces(&sum), zeta_from_traces(&a).mul(&zeta_from_traces(&b)));
    }

    #[test]
    fn numeric_roots_have_small_residuals(c in prop::collection::vec(-30i64..=30, 2..=8), lead in 1i64..=5) {
        let mut c = c;
        c.push(lead);
        let p = RatPoly::from_i64(&c);
        let roots = numeric_roots(&p, 1e-9).unwrap();
        prop_assert_eq!(roots.len(), c.len() - 1);
        let coeffs: Vec<f64> = c.iter().map(|&v| v as f64).collect();
        let norm = coeffs.iter().map(|v| v * v).sum::<f64>().sqrt();
        for z in roots {
            let val = coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &k| acc * z + k);
            let scale = norm * z.norm().max(1.0).powi(c.len() as i32 - 1);
            prop_assert!(val.norm() / scale < 1e-8, "residual {} at {}", val.norm() / scale, z);
        }
    }
}

// ------------------------------------------------------------------- Hecke

fn hecke_params() -> impl Strategy<Value = (u64, u32)> {
    prop::sample::select(vec![3u64, 5, 7, 9, 11, 13]).prop_flat_map(|q| (Just(q), 2u32..q as u32))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn structure_constants_close_the_algebra((q, t) in hecke_params(), xi in 0usize..64, yi in 0usize..64) {
        let p = HeckeParams::from_order(q, t, 1).unwrap();
        let fam = hecke::hecke_family(&p).unwrap();
        let s = q as u32;
        let (x, y) = (xi as u32 % s, yi as u32 % s);
        let lhs = fam.operator(x).mul(fam.operator(y));
        let mut rhs = IntMatrix::zeros(s as usize, s as usize);
        for z in 0..s {
            rhs = rhs.add(&fam.operator(z).scale(fam.operator(x).get(y as usize, z as usize)));
        }
        prop_assert_eq!(lhs, rhs);
        for c in [hecke::check_sum_identity(&fam), hecke::check_commutativity(&fam), hecke::check_klein_up_to_sign(&fam)] {
            prop_assert_eq!(c.status, Status::Pass, "{}", c.name);
        }
    }

    #[test]
    fn trace_identities_hold((q, t) in hecke_params(), n in 1u32..=2, seed in any::<u64>()) {
        prop_assume!(q.pow(n) <= 81);
        let p = HeckeParams::from_order(q, t, n).unwrap();
        let r = hecke::trace_identities(&p, seed).unwrap();
        prop_assert!(r.checks.iter().all(|c| c.status == Status::Pass));
        let qn = BigInt::from(q.pow(n));
        let expected = BigRational::new(qn.clone(), (&qn - 1) * (&qn - 1));
        prop_assert_eq!(r.trace_txd_expected, frob_core::exactlin::rat_to_string(&expected));
    }

    #[test]
    fn corrected_k1_sequence_vanishes((q, t) in prop::sample::select(vec![3u64, 5]).prop_flat_map(|q| (Just(q), 2u32..q as u32)), xi in 0u32..5) {
        let p = HeckeParams::from_order(q, t, 1).unwrap();
        let pts = p.generic_base_points();
        prop_assume!(!pts.is_empty());
        let x = pts[xi as usize % pts.len()];
        let seq = zeta::conjecture4_sequence(&Conj4Config { q, t, points: vec![x], n_max: 3 }).unwrap();
        prop_assert!(seq.iter().all(Zero::is_zero));
    }
}

// ---------------------------------------------------------------- dynamics

fn weil_block() -> impl Strategy<Value = (i64, i64)> {
    prop::sample::select(vec![2i64, 3, 4, 5, 7, 9]).prop_flat_map(|q| {
        let r = (2.0 * (q as f64).sqrt()).floor() as i64;
        (Just(q), -r..=r)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn torus_counts_multiply_over_blocks((q, a) in weil_block(), b in -2i64..=2, n in 1u32..=5) {
        let e1 = dynamics::torus_from_weil_poly(&RatPoly::from_i64(&[q, -a, 1])).unwrap();
        let e2 = dynamics::torus_from_weil_poly(&RatPoly::from_i64(&[q, -b, 1])).unwrap();
        let sum = dynamics::direct_sum(&e1, &e2);
        let c1 = dynamics::torus_fixed_count(&e1, n).unwrap();
        let c2 = dynamics::torus_fixed_count(&e2, n).unwrap();
        prop_assert_eq!(dynamics::torus_fixed_count(&sum, n).unwrap(), &c1 * &c2);
        prop_assert_eq!(c1 * c2, dynamics::block_count_formula(&[a, b], q, n));
        prop_assert!(dynamics::symplectic_scaling_check(&sum, q));
    }

    #[test]
    fn chebyshev_semigroup(a in 1u32..=8, b in 1u32..=8) {
        prop_assert!(dynamics::cheb_semigroup_check(a, b));
    }
}

// ------------------------------------------------------------------- spans

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn span_suite_on_random_spans(q in prop::sample::select(vec![2u64, 3]), seed in any::<u64>()) {
        let r = spans::span_suite(q, seed, 2, 2, 3).unwrap();
        for c in &r.checks {
            prop_assert_eq!(c.status, Status::Pass, "{} {:?}", c.name, c.witness);
        }
    }

    #[test]
    fn frobenius_rows_are_exponential_sums(q in prop::sample::select(vec![2u64, 3, 4])) {
        let f = make_field_of_order(q).unwrap();
        let fr = spans::frobenius_graph(&spans::ConstructibleSet::affine(&f, 1));
        let r = spans::observation_check(&fr, 3, 2, None).unwrap();
        prop_assert_eq!(r.checks[0].status, Status::Pass);
    }
}

// ----------------------------------------------------------------- lattice

fn unimodular2() -> impl Strategy<Value = [[i64; 2]; 2]> {
    // products of elementary moves
    prop::collection::vec((0u8..3, -3i64..=3), 1..=4).prop_map(|moves| {
        let mut u = [[1i64, 0], [0, 1]];
        for (kind, c) in moves {
            let e = match kind {
                0 => [[1, c], [0, 1]],
                1 => [[1, 0], [c, 1]],
                _ => [[0, 1], [1, 0]],
            };
            u = [
                [u[0][0] * e[0][0] + u[0][1] * e[1][0], u[0][0] * e[0][1] + u[0][1] * e[1][1]],
                [u[1][0] * e[0][0] + u[1][1] * e[1][0], u[1][0] * e[0][1] + u[1][1] * e[1][1]],
            ];
        }
        u
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn partition_function_ignores_the_basis(n in 1i64..=3, m in 1i64..=3, k in 0i64..3, u in unimodular2(), seed in any::<u64>()) {
        prop_assume!(k < n);
        let b = BoltzmannData::random(&[2, 2], seed).unwrap();
        let lat = SublatticeD::nmk(n, m, k).unwrap();
        let c = &lat.basis;
        let other: Vec<Vec<i64>> = (0..2).map(|i| (0..2).map(|j| c[i][0] * u[0][j] + c[i][1] * u[1][j]).collect()).collect();
        let lat2 = SublatticeD::new(other).unwrap();
        prop_assert_eq!(&lat2, &lat);
        let g1 = lattice::sublattice_graph(&lat).unwrap();
        prop_assert_eq!(lattice::partition_graph(&b, &g1).unwrap(), lattice::partition_lattice(&b, &lat2).unwrap());
    }

    #[test]
    fn transfer_matches_contraction(d1 in 1usize..=3, d2 in 1usize..=3, n in 1usize..=3, m in 1usize..=3, k in 0usize..3, seed in any::<u64>()) {
        prop_assume!(k < n);
        let b = BoltzmannData::random(&[d1, d2], seed).unwrap();
        let z = lattice::partition_lattice(&b, &SublatticeD::nmk(n as i64, m as i64, k as i64).unwrap()).unwrap();
        prop_assert_eq!(lattice::partition_sheared(&b, n, m as u32, k as u32).unwrap(), z);
    }

    #[test]
    fn two_reductions_match_three_dimensions(n1 in 1i64..=2, n2 in 1usize..=2, n3 in 1usize..=2, seed in any::<u64>()) {
        let b = BoltzmannData::random(&[2, 2, 2], seed).unwrap();
        let once = lattice::dimensional_reduction(&b, n3).unwrap();
        let twice = lattice::dimensional_reduction(&once, n2).unwrap();
        let lhs = lattice::partition_lattice(&twice, &SublatticeD::diagonal(&[n1]).unwrap()).unwrap();
        let rhs = lattice::partition_lattice(&b, &SublatticeD::diagonal(&[n1, n2 as i64, n3 as i64]).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}

// ---------------------------------------------------------------- charsums

fn xn_case() -> impl Strategy<Value = (u64, u32, u32)> {
    prop::sample::select(vec![(5u64, 1u32), (7, 1), (9, 1), (5, 2), (11, 1)]).prop_flat_map(|(q, n)| (Just(q), Just(n), 2u32..q as u32))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn xn_is_generator_independent_and_paired((q, n, x) in xn_case(), include in any::<bool>()) {
        let mut cfg = CharSumConfig::new(q, n, x);
        cfg.exclusion = if include { Exclusion::IncludeX } else { Exclusion::Literal };
        let a = charsums::x_n_set(&cfg).unwrap();
        cfg.generator_rank = 1;
        let b = charsums::x_n_set(&cfg).unwrap();
        prop_assert!(charsums::compare_multisets(&a.values, &b.values, 1e-9).unwrap().pass);
        prop_assert!(a.histogram_symmetric || a.pairing_defect <= 1e-9);
        if include {
            prop_assert!(a.max_imag <= 1e-9 && a.max_abs <= a.bound + 1e-9);
        }
    }

    #[test]
    fn rotation_products_stay_in_the_interval(q in 2u64..=9, n in 1u32..=3, theta in 0.0f64..std::f64::consts::TAU) {
        prop_assume!(q.pow(n) <= 400);
        let f = MatrixFunction::scaled_rotation(q as f64, theta);
        let r = charsums::xprime_n_set(&f, q, n).unwrap();
        let bound = 2.0 * (q as f64).powf(n as f64 / 2.0) + 1e-9;
        prop_assert!(r.values.iter().all(|z| z.im.abs() <= 1e-9 && z.re.abs() <= bound));
    }

    #[test]
    fn multiset_comparison_ignores_order(v in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..20), seed in any::<u64>()) {
        use rand::{seq::SliceRandom, SeedableRng};
        let a: Vec<Complex64> = v.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
        let mut b = a.clone();
        b.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let c = charsums::compare_multisets(&a, &b, 1e-12).unwrap();
        prop_assert!(c.pass);
        prop_assert_eq!(c.max_discrepancy, 0.0);
    }
}
