//! Acceptance run: one line per criterion.
//!
//! A few statements fail when read literally. Those are listed in
//! `DIVERGENCES`; for them the run requires the literal failure to reproduce
//! and the corrected reading to pass. Any other failure fails the run.

use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Pow;

use frob_core::charsums::{self, Exclusion};
use frob_core::dynamics;
use frob_core::exactlin::{rat_to_string, RatPoly};
use frob_core::ff::make_field_of_order;
use frob_core::hecke::{self, HeckeParams};
use frob_core::lattice::{self, BoltzmannData, SublatticeD};
use frob_core::report::{Check, Status};
use frob_core::spans::{self, ConstructibleSet};
use frob_core::zeta::{self, Conj4Config};

/// Criterion, the check that fails as stated, the check that passes in its
/// place, and why.
const DIVERGENCES: &[(u32, &str, &str, &str)] = &[
    (1, "property-3-klein-closure", "property-3-klein-up-to-sign", "T_0·T_1 = −T_t, so the group closes only up to sign"),
    (3, "property-5-lift-n2", "property-5-lift-n2-signed", "the lift carries a sign (−1)^(n+1)"),
    (
        9,
        "generic-tuples-exist[q=7]",
        "counts-equal[q=11]",
        "at q=7 the two quadratics in y defining E share a root for every admissible (t, x)",
    ),
    (11, "xn-real", "xn-real[include-x]", "dropping y = x leaves a non-real term; keeping it restores reality"),
    (11, "xn-weil-bound", "xn-weil-bound[include-x]", "the same missing term breaks the 2√(q^n) bound"),
];

struct Verdict {
    checks: Vec<Check>,
    note: String,
}

impl Verdict {
    fn new(checks: Vec<Check>, note: impl Into<String>) -> Self {
        Verdict { checks, note: note.into() }
    }
}

fn failed_names(checks: &[Check]) -> Vec<String> {
    let mut v: Vec<String> = checks.iter().filter(|c| c.status == Status::Fail).map(|c| c.name.clone()).collect();
    v.sort();
    v.dedup();
    v
}

/// Suffixes every check name with `[tag]`.
fn tagged(checks: Vec<Check>, tag: &str) -> Vec<Check> {
    checks
        .into_iter()
        .map(|mut c| {
            c.name = format!("{}[{tag}]", c.name);
            c
        })
        .collect()
}

fn rat(n: impl Into<BigInt>, d: impl Into<BigInt>) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn valid_params(q: u64) -> Vec<HeckeParams> {
    (0..q as u32).filter_map(|t| HeckeParams::from_order(q, t, 1).ok()).collect()
}

fn c1() -> frob_core::Result<Verdict> {
    let mut checks = Vec::new();
    let mut cases = 0;
    for q in [3, 5, 7, 9, 11, 13] {
        for p in valid_params(q) {
            let fam = hecke::hecke_family(&p)?;
            cases += 1;
            for c in [
                hecke::check_sum_identity(&fam),
                hecke::check_commutativity(&fam),
                hecke::check_involutions(&fam),
                hecke::check_klein_closure(&fam),
                hecke::check_klein_up_to_sign(&fam),
                hecke::check_structure_constants(&fam),
            ] {
                checks.push(c);
            }
        }
    }
    Ok(Verdict::new(checks, format!("{cases} (q,t) pairs")))
}

fn c2() -> frob_core::Result<Verdict> {
    let mut checks = Vec::new();
    let mut cases = 0;
    for q in [3, 5, 7, 9, 11, 13] {
        for p in valid_params(q) {
            let mut spectra = Vec::new();
            checks.push(hecke::check_spectral_bound(&p, &p.generic_points(), 1e-9, &mut spectra)?);
            // moment oracle: a real spectrum in [−2√q, 2√q] forces 0 ≤ Tr(T^{2k}) ≤ dim·(4q)^k
            let fam = hecke::hecke_family(&p)?;
            for x in p.generic_points() {
                let t = fam.operator(x);
                let t2 = t.mul(t);
                let dim = t.rows() as i128;
                let (m2, m4) = (t2.trace(), t2.trace_of_product(&t2));
                let q = q as i128;
                let ok = (0..=dim * 4 * q).contains(&m2) && (0..=dim * 16 * q * q).contains(&m4);
                checks.push(Check::from_outcome("even-moments", ok, None));
            }
            cases += 1;
        }
    }
    Ok(Verdict::new(checks, format!("{cases} (q,t) pairs")))
}

fn c3() -> frob_core::Result<Verdict> {
    let p = HeckeParams::from_order(5, 2, 1)?;
    let mut checks = Vec::new();
    for n in [2, 3] {
        let (literal, signed) = hecke::check_lift(&p, n, 1e-6)?;
        checks.push(literal);
        checks.push(signed);
    }
    Ok(Verdict::new(checks, "q=5 t=2, n=2,3"))
}

fn c4() -> frob_core::Result<Verdict> {
    let mut checks = Vec::new();
    for (q, n) in [(5u64, 1u32), (5, 2), (7, 1), (11, 1)] {
        let p = HeckeParams::from_order(q, 2, n)?;
        let r = hecke::trace_identities(&p, 7)?;
        checks.extend(r.checks.clone());
        let qn = BigInt::from(q).pow(n);
        let one = BigInt::from(1);
        let txd = rat(qn.clone(), (&qn - &one) * (&qn - &one));
        let d = rat(&qn * &qn * (&qn - 2), (&qn - &one) * (&qn - &one) * (&qn + &one));
        let ok = r.trace_d == rat_to_string(&d) && r.trace_txd.iter().all(|(_, v)| *v == rat_to_string(&txd));
        checks.push(Check::from_outcome("closed-forms", ok, None));
        if n == 1 {
            // stated values at n = 1: q/(q−1)² and q²(q−2)/((q−1)²(q+1))
            let qi = q as i64;
            let stated_txd = rat(qi, (qi - 1) * (qi - 1));
            let stated_d = rat(qi * qi * (qi - 2), (qi - 1) * (qi - 1) * (qi + 1));
            let ok = r.trace_d == rat_to_string(&stated_d) && r.trace_txd_expected == rat_to_string(&stated_txd);
            checks.push(Check::from_outcome("stated-values", ok, None));
        }
    }
    Ok(Verdict::new(checks, "(5,1) (5,2) (7,1) (11,1)"))
}

fn c5() -> frob_core::Result<Verdict> {
    let mut checks = Vec::new();
    let mut cases = 0;
    for q in [5u64, 7] {
        for p in valid_params(q) {
            let t = p.t().index();
            for x in p.generic_base_points() {
                let cfg = Conj4Config { q, t, points: vec![x], n_max: 3 };
                let seq = zeta::conjecture4_sequence(&cfg)?;
                let zero = seq.iter().all(|v| *v == BigRational::from_integer(0.into()));
                checks.push(Check::from_outcome("k1-vanishes", zero && seq.len() == 3, None));
                cases += 1;
            }
        }
    }
    let mut k2_notes = Vec::new();
    for points in [vec![3, 4], vec![3, 3]] {
        let k2 = zeta::conjecture4_experiment(&Conj4Config { q: 5, t: 2, points: points.clone(), n_max: 3 }, 7)?;
        checks.push(Check::from_outcome("k2-withheld-terms", k2.withheld.iter().all(|w| w.matches), None));
        k2_notes.push(format!(
            "x={points:?} sequence {:?} order {:?} ({} withheld)",
            k2.sequence,
            k2.recurrence.as_ref().map(|r| r.order),
            k2.withheld.len()
        ));
    }
    Ok(Verdict::new(checks, format!("k=1: {cases} (q,t,x) zero through n=3; k=2 report, q=5 t=2: {}", k2_notes.join("; "))))
}

fn c6() -> frob_core::Result<Verdict> {
    let mut checks = Vec::new();
    for q in [2u64, 3, 5, 7] {
        let r = zeta::product_formula_check(q, 12)?;
        checks.push(Check::from_outcome("product-identity", r.equal, None));
        // first coefficient of both sides is −q/(q−1)²
        let qi = q as i64;
        let c1 = zeta::product_formula_rhs(q, 12).coeff(1).clone();
        checks.push(Check::from_outcome("linear-coefficient", c1 == rat(-qi, (qi - 1) * (qi - 1)), None));
    }
    Ok(Verdict::new(checks, "order 12, q = 2,3,5,7"))
}

fn c7() -> frob_core::Result<Verdict> {
    let mut checks = Vec::new();
    for q in [2u64, 3, 4, 5, 7, 9] {
        let r = spans::radon_check(q)?;
        checks.extend(r.checks.clone());
        checks.push(Check::from_outcome("point-count", r.points as u64 == q * q + q + 1, None));
    }
    Ok(Verdict::new(checks, "P²(F_q), q = 2,3,4,5,7,9"))
}

fn c8() -> frob_core::Result<Verdict> {
    let mut checks = Vec::new();
    for q in [2u64, 3] {
        for seed in [1u64, 2] {
            checks.extend(spans::span_suite(q, seed, 5, 3, 3)?.checks);
        }
        let f = make_field_of_order(q)?;
        let fr = spans::frobenius_graph(&ConstructibleSet::affine(&f, 1));
        let t = spans::z_table(&fr, 4, 4)?;
        for n in 1..=4u32 {
            for m in 1..=4u32 {
                let expect = BigInt::from(q).pow(n.gcd(&m));
                checks.push(Check::from_outcome("frobenius-gcd", *t.get(n, m) == expect, None));
            }
        }
    }
    Ok(Verdict::new(checks, "F_2, F_3: 2 seeds × 5 trials, n,m ≤ 3; Z_Fr on A¹ for n,m ≤ 4"))
}

fn c9() -> frob_core::Result<Verdict> {
    let mut checks = Vec::new();
    // q = 7: every tuple, since at most 5·4! exist with distinct x_i ∉ {0, 1, t}
    let mut all7 = Vec::new();
    for t in 2..7u32 {
        let pool: Vec<u32> = (2..7).filter(|&v| v != t).collect();
        for x in permutations4(&pool) {
            all7.push(spans::prop1_curve_counts(7, t, x)?);
        }
    }
    let generic7 = all7.iter().filter(|r| r.degenerate.is_none()).count();
    checks.push(Check::from_outcome("generic-tuples-exist[q=7]", generic7 >= 10, None));
    checks.extend(all7.iter().filter(|r| r.degenerate.is_none()).map(|r| Check::from_outcome("counts-equal[q=7]", r.equal == Some(true), None)));
    let tuples = spans::prop1_random_tuples(11, 40, 11)?;
    let generic: Vec<_> = tuples.iter().filter(|r| r.degenerate.is_none()).collect();
    checks.push(Check::from_outcome("generic-tuples-exist[q=11]", generic.len() >= 10, None));
    for r in &generic {
        let levels: Vec<u32> = r.levels.iter().map(|l| l.level).collect();
        checks.push(Check::from_outcome("levels", levels == [1, 2], None));
        checks.push(Check::from_outcome("counts-equal[q=11]", r.equal == Some(true), None));
    }
    Ok(Verdict::new(
        checks,
        format!(
            "q=7: {generic7} of {} tuples generic (exhaustive); q=11: {} of {} seeded tuples generic",
            all7.len(),
            generic.len(),
            tuples.len()
        ),
    ))
}

fn permutations4(pool: &[u32]) -> Vec<[u32; 4]> {
    let mut out = Vec::new();
    for &a in pool {
        for &b in pool {
            for &c in pool {
                for &d in pool {
                    let x = [a, b, c, d];
                    if (0..4).all(|i| (0..i).all(|j| x[i] != x[j])) {
                        out.push(x);
                    }
                }
            }
        }
    }
    out
}

fn c10() -> frob_core::Result<Verdict> {
    let mut checks = Vec::new();
    let mut cases = 0;
    for dims in [[2usize, 2], [2, 3], [3, 2], [3, 3]] {
        let r = lattice::transfer_check(&dims, 5, 3, lattice::line_length_for(&dims, 3))?;
        cases += r.cases;
        checks.extend(r.checks);
    }
    let b2 = BoltzmannData::random(&[2, 3], 9)?;
    for n in [1, 2, 3] {
        let lats = (1..=3).map(|s| SublatticeD::diagonal(&[s])).collect::<frob_core::Result<Vec<_>>>()?;
        let rs = lattice::dimensional_reduction_check(&b2, n, &lats)?;
        checks.push(Check::from_outcome("reduction-d2", rs.iter().all(|c| c.equal), None));
    }
    let b3 = BoltzmannData::random(&[2, 2, 2], 9)?;
    for n in [1, 2] {
        let lats = [[1, 1], [1, 2], [2, 2]].iter().map(|s| SublatticeD::diagonal(s)).collect::<frob_core::Result<Vec<_>>>()?;
        let rs = lattice::dimensional_reduction_check(&b3, n, &lats)?;
        checks.push(Check::from_outcome("reduction-d3", rs.iter().all(|c| c.equal), None));
    }
    // span tables: Frobenius on A¹ has column order ≤ m_max
    for (q, n_max, m_max) in [(2u64, 7u32, 3u32), (3, 5, 2)] {
        let f = make_field_of_order(q)?;
        let fr = spans::frobenius_graph(&ConstructibleSet::affine(&f, 1));
        checks.extend(spans::observation_check(&fr, n_max, m_max, Some(m_max as usize))?.checks);
    }
    Ok(Verdict::new(checks, format!("{cases} graph/transfer cases; reduction d=2,3; rows and columns of all tables")))
}

fn c11() -> frob_core::Result<Verdict> {
    let mut checks = Vec::new();
    for (q, n) in [(5u64, 1u32), (5, 2), (7, 1), (9, 1)] {
        checks.extend(charsums::x_n_check(q, n, Exclusion::Literal, 1e-9)?.checks);
        checks.extend(tagged(charsums::x_n_check(q, n, Exclusion::IncludeX, 1e-9)?.checks, "include-x"));
    }
    Ok(Verdict::new(checks, "(5,1) (5,2) (7,1) (9,1), every x"))
}

fn c12() -> frob_core::Result<Verdict> {
    let mut checks = vec![
        dynamics::semigroup_table_check(8),
        dynamics::cheb_sweep_check(10_000)?,
        dynamics::elliptic_block_check(&[2, 3, 4, 5, 7, 8, 9, 11, 13])?,
    ];
    checks.extend(dynamics::torus_report(&RatPoly::from_i64(&[9, -6, 6, -2, 1]), 6)?.checks);
    Ok(Verdict::new(checks, "a,b ≤ 8; q^n ≤ 10^4; quadratic Weil polynomials"))
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> frob_core::Result<Verdict>); 12] = [
        (1, "Hecke exact properties", c1),
        (2, "Hecke spectral bound", c2),
        (3, "eigenvalue lift", c3),
        (4, "exact trace identities", c4),
        (5, "corrected traces, k=1 cancellation", c5),
        (6, "infinite-product identity", c6),
        (7, "Radon transform", c7),
        (8, "span calculus", c8),
        (9, "two elliptic curves, equal counts", c9),
        (10, "lattice models", c10),
        (11, "character sums", c11),
        (12, "dynamics", c12),
    ];
    let mut unexpected = 0;
    for (id, title, run) in criteria {
        let start = Instant::now();
        let verdict = run();
        let secs = start.elapsed().as_secs_f64();
        let v = match verdict {
            Ok(v) => v,
            Err(e) => {
                println!("criterion {id:>2} FAIL  {title}: error: {e} ({secs:.1}s)");
                unexpected += 1;
                continue;
            }
        };
        let failed = failed_names(&v.checks);
        let known: Vec<_> = DIVERGENCES.iter().filter(|d| d.0 == id).collect();
        let passes = |name: &str| v.checks.iter().any(|c| c.name == name) && !failed.iter().any(|f| f == name);
        if failed.is_empty() {
            println!("criterion {id:>2} PASS  {title}: {} ({secs:.1}s)", v.note);
            if !known.is_empty() {
                println!("             recorded divergence no longer reproduces: {:?}", known.iter().map(|d| d.1).collect::<Vec<_>>());
                unexpected += 1;
            }
            continue;
        }
        let explained = failed.iter().all(|f| known.iter().any(|d| d.1 == f)) && known.iter().all(|d| passes(d.2));
        println!("criterion {id:>2} FAIL  {title}: {} ({secs:.1}s)", v.note);
        println!("             failing checks: {}", failed.join(", "));
        if explained {
            for d in &known {
                println!("             {}: {}; {} passes", d.1, d.3, d.2);
            }
        } else {
            unexpected += 1;
            for c in v.checks.iter().filter(|c| c.status == Status::Fail).take(3) {
                println!("             witness {}: {}", c.name, c.witness.clone().unwrap_or_default());
            }
        }
    }
    if unexpected == 0 {
        println!("acceptance: every failure is a recorded literal-reading divergence");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {unexpected} unexpected outcome(s)");
        ExitCode::FAILURE
    }
}
