//! Fixed points of algebraic dynamical systems: Chebyshev maps on the
//! affine line (cubed for A³) and torus endomorphisms given by integer
//! matrices.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use serde_json::json;

use crate::error::{check_budget, Error, Result};
use crate::exactlin::matrix::det_bareiss;
use crate::exactlin::{charpoly, numeric_roots, IntMatrix, RatPoly};
use crate::report::Check;

/// Largest q^n for fixed-point enumeration.
pub const CHEB_MAX: u64 = 100_000;
/// Up to this degree the numeric side also runs generic polynomial root finding.
pub const CHEB_POLY_ROOTS_MAX: u64 = 40;

/// P_a with P_a(λ + λ^{-1}) = λ^a + λ^{-a}: P_0 = 2, P_1 = x, P_{k+1} = x P_k − P_{k−1}.
pub fn chebyshev_poly(a: u32) -> RatPoly {
    let mut prev = RatPoly::from_i64(&[2]);
    if a == 0 {
        return prev;
    }
    let mut cur = RatPoly::x();
    for _ in 1..a {
        let next = RatPoly::x().mul(&cur).sub(&prev);
        prev = cur;
        cur = next;
    }
    cur
}

/// P_a ∘ P_b = P_{ab}, exactly.
pub fn cheb_semigroup_check(a: u32, b: u32) -> bool {
    chebyshev_poly(a).compose(&chebyshev_poly(b)) == chebyshev_poly(a * b)
}

#[derive(Debug, Clone, Serialize)]
pub struct ChebFixedPoints {
    pub q: u64,
    pub n: u32,
    /// N = q^n
    pub degree: u64,
    /// distinct solutions of P_N(x) = x on one coordinate
    pub count: u64,
    /// points with x ∉ {2, −2}
    pub count_interior: u64,
    /// count³ on A³
    pub count_3d: u128,
    pub count_3d_interior: u128,
    /// sorted values 2cos(2πk/M), M ∈ {N−1, N+1}
    pub points: Vec<f64>,
    pub numeric_count: usize,
    pub numeric_max_deviation: f64,
    /// distinct roots found by generic polynomial root finding (small N only)
    #[serde(skip_serializing_if = "Option::is_none")]
    pub polynomial_roots_count: Option<usize>,
    pub agree: bool,
}

/// Angles k/M ∈ [0, 1/2] in lowest terms for ζ^M = 1, M ∈ {N−1, N+1}.
fn fixed_angles(big_n: u64) -> BTreeSet<(u64, u64)> {
    let mut s = BTreeSet::new();
    for m in [big_n - 1, big_n + 1] {
        for k in 0..=m / 2 {
            let g = k.gcd(&m);
            s.insert((k / g, m / g));
        }
    }
    s
}

/// Exact count of distinct ζ + ζ^{-1} with ζ^M = 1: ⌊M/2⌋ + 1.
fn classes(m: u64) -> u64 {
    m / 2 + 1
}

/// g(θ) = P_N(2cosθ) − 2cosθ and its θ-derivative, by the ladder
/// P_{2k} = P_k² − 2, P_{2k+1} = P_k P_{k+1} − x (no closed form).
fn g_and_dg(big_n: u64, theta: f64) -> (f64, f64) {
    let x = 2.0 * theta.cos();
    // (P_k, P_{k+1}) and their x-derivatives
    let (mut a, mut b) = (2.0, x);
    let (mut da, mut db) = (0.0, 1.0);
    for bit in (0..64 - big_n.leading_zeros()).rev() {
        let (ab, dab) = (a * b - x, da * b + a * db - 1.0);
        if (big_n >> bit) & 1 == 1 {
            (a, da) = (ab, dab);
            (b, db) = (b * b - 2.0, 2.0 * b * db);
        } else {
            (b, db) = (ab, dab);
            (a, da) = (a * a - 2.0, 2.0 * a * da);
        }
    }
    let dx = -2.0 * theta.sin();
    (a - x, (da - 1.0) * dx)
}

fn g_only(big_n: u64, theta: f64) -> f64 {
    g_and_dg(big_n, theta).0
}

fn bisect_root(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    // Illinois variant of regula falsi
    let (mut flo, mut fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return lo;
    }
    if fhi == 0.0 {
        return hi;
    }
    let mut side = 0;
    for _ in 0..100 {
        let mid = (lo * fhi - hi * flo) / (fhi - flo);
        let fm = f(mid);
        if fm == 0.0 || hi - lo < 1e-15 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = mid;
            fhi = fm;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
        if (hi - lo).abs() < 1e-14 * (1.0 + lo.abs()) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Real roots of P_N(x) − x in [−2, 2], located in θ by a sign scan on a grid
/// of width π/(8N); a cell with no sign change is searched for a close pair
/// through the sign of g at the zero of g'.
pub fn cheb_fixed_points_numeric(big_n: u64) -> Vec<f64> {
    let cells = 8 * big_n as usize;
    let h = std::f64::consts::PI / cells as f64;
    let g = |t: f64| g_only(big_n, t);
    let dg = |t: f64| g_and_dg(big_n, t).1;
    let mut roots = Vec::new();
    let end_tol = 1e-9;
    let (g0, _) = g_and_dg(big_n, 0.0);
    if g0.abs() < end_tol {
        roots.push(0.0);
    }
    let (gpi, _) = g_and_dg(big_n, std::f64::consts::PI);
    let pi_root = gpi.abs() < end_tol;
    let mut prev = g_and_dg(big_n, 0.0);
    for i in 0..cells {
        let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
        let cur = g_and_dg(big_n, b);
        let a_is_root = i == 0 && g0.abs() < end_tol;
        let b_is_end = i + 1 == cells;
        let (ga, gb) = (prev.0, cur.0);
        if b_is_end && pi_root {
            // the only root in the last cell is θ = π, recorded below
        } else if !a_is_root && (ga > 0.0) != (gb > 0.0) {
            roots.push(bisect_root(g, a, b));
        } else if (prev.1 > 0.0) != (cur.1 > 0.0) {
            let lo = if a_is_root { a + 1e-6 * h } else { a };
            let m = bisect_root(dg, lo, b);
            let gm = g(m);
            let ref_sign = if a_is_root { gb > 0.0 } else { ga > 0.0 };
            if (gm > 0.0) != ref_sign {
                if !a_is_root {
                    roots.push(bisect_root(g, a, m));
                }
                roots.push(bisect_root(g, m, b));
            }
        }
        prev = cur;
    }
    if pi_root {
        roots.push(std::f64::consts::PI);
    }
    let mut xs: Vec<f64> = roots.iter().map(|t| 2.0 * t.cos()).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs
}

/// Fixed points of P_{q^n} on one coordinate, exactly and numerically.
pub fn cheb_fixed_points(q: u64, n: u32) -> Result<ChebFixedPoints> {
    if q < 2 || n == 0 {
        return Err(Error::Invalid("need q ≥ 2 and n ≥ 1".into()));
    }
    let big_n = (q as u128).checked_pow(n).unwrap_or(u128::MAX);
    check_budget("q^n", big_n, CHEB_MAX as u128)?;
    let big_n = big_n as u64;
    let angles = fixed_angles(big_n);
    let count = angles.len() as u64;
    // the two families share exactly the classes of ζ with ζ^{gcd} = 1
    let formula = classes(big_n - 1) + classes(big_n + 1) - classes((big_n - 1).gcd(&(big_n + 1)));
    if formula != count {
        return Err(Error::Internal(format!("class count {count} differs from {formula}")));
    }
    let minus_two = angles.contains(&(1, 2));
    let count_interior = count - 1 - minus_two as u64;
    let mut points: Vec<f64> = angles
        .iter()
        .map(|&(k, m)| 2.0 * (2.0 * std::f64::consts::PI * k as f64 / m as f64).cos())
        .collect();
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let numeric = cheb_fixed_points_numeric(big_n);
    let dev = if numeric.len() == points.len() {
        numeric.iter().zip(&points).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    let polynomial_roots_count = if big_n <= CHEB_POLY_ROOTS_MAX {
        let f = chebyshev_poly(big_n as u32).sub(&RatPoly::x());
        let roots = numeric_roots(&f, 1e-9)?;
        let mut xs: Vec<f64> = roots.iter().map(|z| z.re).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        xs.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        Some(xs.len())
    } else {
        None
    };
    let agree = numeric.len() as u64 == count
        && dev <= 1e-8
        && polynomial_roots_count.map_or(true, |c| c as u64 == count);
    Ok(ChebFixedPoints {
        q,
        n,
        degree: big_n,
        count,
        count_interior,
        count_3d: (count as u128).pow(3),
        count_3d_interior: (count_interior as u128).pow(3),
        points,
        numeric_count: numeric.len(),
        numeric_max_deviation: dev,
        polynomial_roots_count,
        agree,
    })
}

// --------------------------------------------------------------- torus

#[derive(Debug, Clone, Serialize)]
pub struct TorusEndo {
    pub a: IntMatrix,
    pub g: usize,
    /// q read off the constant term q^g
    pub q: Option<i64>,
    /// traces a_i of the quadratic factors x² − a_i x + q, when found
    pub blocks: Vec<i64>,
    pub symplectic_unverified: bool,
}

impl TorusEndo {
    pub fn new(a: IntMatrix) -> Result<Self> {
        if !a.is_square() || a.rows() % 2 != 0 || a.rows() == 0 {
            return Err(Error::Dimension("torus endomorphism needs an even square matrix".into()));
        }
        let g = a.rows() / 2;
        Ok(TorusEndo { a, g, q: None, blocks: Vec::new(), symplectic_unverified: true })
    }
}

fn integer_root(v: &BigInt, g: u32) -> Option<BigInt> {
    if v.is_negative() {
        return None;
    }
    let r = v.nth_root(g);
    (r.pow(g) == *v).then_some(r)
}

/// Direct sum of [[0, −q], [1, a_i]] when p = ∏ (x² − a_i x + q) over Z,
/// otherwise the companion matrix with the flag set.
pub fn torus_from_weil_poly(p: &RatPoly) -> Result<TorusEndo> {
    let c = p
        .to_bigints()
        .ok_or_else(|| Error::Invalid("Weil polynomial must have integer coefficients".into()))?;
    let deg = p.degree().unwrap_or(0);
    if !p.is_monic() {
        return Err(Error::Invalid("Weil polynomial must be monic".into()));
    }
    if deg == 0 || deg % 2 == 1 {
        return Err(Error::Invalid(format!("Weil polynomial must have even positive degree, got {deg}")));
    }
    let g = deg / 2;
    let q = integer_root(&c[0], g as u32);
    if let Some(q) = q.as_ref().and_then(|q| q.to_i64()) {
        // a = α + β for two roots, so |a| ≤ 2 (1 + max |c_i|)
        let bound = 2 * (1 + c.iter().map(|v| v.abs()).max().unwrap().to_i64().unwrap_or(i64::MAX / 4));
        let bound = bound.min(1 << 20);
        let mut rest = c.clone();
        let mut blocks = Vec::new();
        'outer: while rest.len() > 1 {
            for a in -bound..=bound {
                let quad = [BigInt::from(q), BigInt::from(-a), BigInt::one()];
                if let Some(r) = crate::exactlin::poly::int_divexact(&rest, &quad) {
                    blocks.push(a);
                    rest = r;
                    continue 'outer;
                }
            }
            break;
        }
        if rest.len() == 1 {
            let n = 2 * g;
            let mut m = IntMatrix::zeros(n, n);
            for (i, &a) in blocks.iter().enumerate() {
                m.set(2 * i, 2 * i + 1, -q);
                m.set(2 * i + 1, 2 * i, 1);
                m.set(2 * i + 1, 2 * i + 1, a);
            }
            return Ok(TorusEndo { a: m, g, q: Some(q), blocks, symplectic_unverified: false });
        }
    }
    // companion matrix of x^d + c_{d−1} x^{d−1} + … + c_0
    let mut m = IntMatrix::zeros(deg, deg);
    for i in 1..deg {
        m.set(i, i - 1, 1);
    }
    for i in 0..deg {
        let v = c[i].to_i64().ok_or_else(|| Error::Invalid("coefficient too large".into()))?;
        m.set(i, deg - 1, -v);
    }
    Ok(TorusEndo {
        a: m,
        g,
        q: q.and_then(|v| v.to_i64()),
        blocks: Vec::new(),
        symplectic_unverified: true,
    })
}

fn big_matrix_pow(a: &IntMatrix, n: u32) -> Vec<Vec<BigInt>> {
    let k = a.rows();
    let base = a.to_big();
    let mut acc: Vec<Vec<BigInt>> = (0..k)
        .map(|i| (0..k).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    for _ in 0..n {
        acc = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| (0..k).map(|l| &acc[i][l] * &base[l][j]).sum())
                    .collect()
            })
            .collect();
    }
    acc
}

/// det(A^n − I), exactly.
pub fn torus_det(e: &TorusEndo, n: u32) -> BigInt {
    let mut m = big_matrix_pow(&e.a, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] -= 1;
    }
    det_bareiss(&m)
}

/// |det(A^n − I)|, the number of fixed points of the n-th iterate.
pub fn torus_fixed_count(e: &TorusEndo, n: u32) -> Result<BigInt> {
    if n == 0 {
        return Err(Error::Invalid("n must be at least 1".into()));
    }
    let d = torus_det(e, n);
    if d.is_zero() {
        return Err(Error::Degenerate(format!("det(A^{n} − I) = 0: fixed points are not isolated")));
    }
    Ok(d.abs())
}

/// Res(f, g) as the Sylvester determinant (coefficients constant first).
pub fn resultant(f: &[BigInt], g: &[BigInt]) -> BigInt {
    let (m, n) = (f.len() - 1, g.len() - 1);
    let size = m + n;
    if size == 0 {
        return BigInt::one();
    }
    let mut s = vec![vec![BigInt::zero(); size]; size];
    for i in 0..n {
        for (j, c) in f.iter().rev().enumerate() {
            s[i][i + j] = c.clone();
        }
    }
    for i in 0..m {
        for (j, c) in g.iter().rev().enumerate() {
            s[n + i][i + j] = c.clone();
        }
    }
    det_bareiss(&s)
}

/// ∏ (α_i^n − 1) over the eigenvalues of A, as Res(charpoly(A), x^n − 1).
pub fn torus_det_via_resultant(e: &TorusEndo, n: u32) -> Result<BigInt> {
    let cp = charpoly(&e.a)?;
    let f = cp.to_bigints().expect("integer matrix");
    let mut g = vec![BigInt::zero(); n as usize + 1];
    g[0] = BigInt::from(-1);
    g[n as usize] = BigInt::one();
    Ok(resultant(&f, &g))
}

/// ∏_blocks (q^n + 1 − s_n(a_i)) with s_0 = 2, s_1 = a, s_{k+1} = a s_k − q s_{k−1}.
pub fn block_count_formula(blocks: &[i64], q: i64, n: u32) -> BigInt {
    let qb = BigInt::from(q);
    blocks
        .iter()
        .map(|&a| {
            let ab = BigInt::from(a);
            let (mut s0, mut s1) = (BigInt::from(2), ab.clone());
            for _ in 1..n {
                let s2 = &ab * &s1 - &qb * &s0;
                s0 = s1;
                s1 = s2;
            }
            qb.pow(n) + 1 - s1
        })
        .product()
}

/// J = ⊕ [[0, 1], [−1, 0]].
pub fn standard_symplectic(dim: usize) -> IntMatrix {
    let mut j = IntMatrix::zeros(dim, dim);
    for b in 0..dim / 2 {
        j.set(2 * b, 2 * b + 1, 1);
        j.set(2 * b + 1, 2 * b, -1);
    }
    j
}

/// Aᵀ J A = q J.
pub fn symplectic_scaling_check(e: &TorusEndo, q: i64) -> bool {
    let n = e.a.rows();
    let j = standard_symplectic(n);
    let lhs = e.a.transpose().mul(&j).mul(&e.a);
    lhs == j.scale(q)
}

/// Block sum of two endomorphisms.
pub fn direct_sum(a: &TorusEndo, b: &TorusEndo) -> TorusEndo {
    let (n, m) = (a.a.rows(), b.a.rows());
    let mut out = IntMatrix::zeros(n + m, n + m);
    for i in 0..n {
        for j in 0..n {
            out.set(i, j, a.a.get(i, j));
        }
    }
    for i in 0..m {
        for j in 0..m {
            out.set(n + i, n + j, b.a.get(i, j));
        }
    }
    let mut blocks = a.blocks.clone();
    blocks.extend(&b.blocks);
    TorusEndo {
        a: out,
        g: a.g + b.g,
        q: if a.q == b.q { a.q } else { None },
        blocks,
        symplectic_unverified: a.symplectic_unverified || b.symplectic_unverified,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TorusLevel {
    pub n: u32,
    /// None when det(A^n − I) = 0
    pub count: Option<String>,
    pub via_resultant: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub via_blocks: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TorusReport {
    pub endo: TorusEndo,
    pub levels: Vec<TorusLevel>,
    pub checks: Vec<Check>,
}

/// Fixed-point counts of the torus endomorphism built from a Weil
/// polynomial, by determinant, resultant and (when split into quadratic
/// blocks) the trace recurrence.
pub fn torus_report(p: &RatPoly, n_max: u32) -> Result<TorusReport> {
    let e = torus_from_weil_poly(p)?;
    let mut levels = Vec::new();
    let mut bad = Vec::new();
    for n in 1..=n_max {
        let det = torus_det(&e, n);
        let res = torus_det_via_resultant(&e, n)?;
        let blocks = match (e.q, e.blocks.len() == e.g) {
            (Some(q), true) => Some(block_count_formula(&e.blocks, q, n)),
            _ => None,
        };
        if res != det || blocks.as_ref().is_some_and(|b| *b != det.abs()) {
            bad.push(json!({"n": n, "det": det.to_string(), "resultant": res.to_string(),
                "blocks": blocks.as_ref().map(|b| b.to_string())}));
        }
        levels.push(TorusLevel {
            n,
            count: (!det.is_zero()).then(|| det.abs().to_string()),
            via_resultant: res.to_string(),
            via_blocks: blocks.map(|b| b.to_string()),
        });
    }
    let mut checks = vec![Check::from_outcome("torus-count-routes-agree", bad.is_empty(), Some(json!(bad)))];
    match e.q {
        Some(q) if !e.symplectic_unverified => {
            checks.push(Check::from_outcome("torus-symplectic-scaling", symplectic_scaling_check(&e, q), None));
        }
        _ => checks.push(
            Check::report("torus-symplectic-scaling", json!(null)).with_detail("no symplectic basis constructed"),
        ),
    }
    Ok(TorusReport { endo: e, levels, checks })
}

/// P_a(P_b) = P_{ab} for all 1 ≤ a, b ≤ max.
pub fn semigroup_table_check(max: u32) -> Check {
    let bad: Vec<_> = (1..=max)
        .flat_map(|a| (1..=max).map(move |b| (a, b)))
        .filter(|&(a, b)| !cheb_semigroup_check(a, b))
        .map(|(a, b)| json!([a, b]))
        .collect();
    Check::from_outcome("chebyshev-semigroup", bad.is_empty(), Some(json!(bad)))
}

/// Every prime power N ≤ limit (each q^n with q a prime power is one).
pub fn prime_powers_up_to(limit: u64) -> Vec<u64> {
    let mut out = Vec::new();
    for p in 2..=limit {
        if crate::ff::is_prime(p) {
            let mut v = p;
            while v <= limit {
                out.push(v);
                v = match v.checked_mul(p) {
                    Some(x) => x,
                    None => break,
                };
            }
        }
    }
    out.sort_unstable();
    out
}

/// Exact enumeration against numeric root finding for every N = q^n ≤ limit.
pub fn cheb_sweep_check(limit: u64) -> Result<Check> {
    let mut bad = Vec::new();
    let mut cases = 0;
    for big_n in prime_powers_up_to(limit) {
        let r = cheb_fixed_points(big_n, 1)?;
        cases += 1;
        if !r.agree || r.count != big_n {
            bad.push(json!({"N": big_n, "count": r.count, "numeric": r.numeric_count,
                "deviation": r.numeric_max_deviation, "polynomial_roots": r.polynomial_roots_count}));
        }
    }
    Ok(Check::from_outcome("chebyshev-exact-vs-numeric", bad.is_empty(), Some(json!(bad)))
        .with_detail(format!("{cases} values of q^n up to {limit}")))
}

/// Quadratic Weil polynomials x² − ax + q: symplectic block and
/// |det(A − I)| = q + 1 − a.
pub fn elliptic_block_check(qs: &[i64]) -> Result<Check> {
    let mut bad = Vec::new();
    let mut cases = 0;
    for &q in qs {
        let bound = (2.0 * (q as f64).sqrt()).floor() as i64;
        for a in -bound..=bound {
            let e = torus_from_weil_poly(&RatPoly::from_i64(&[q, -a, 1]))?;
            let det = torus_det(&e, 1).abs();
            cases += 1;
            if !symplectic_scaling_check(&e, q) || det != BigInt::from(q + 1 - a) {
                bad.push(json!({"q": q, "a": a, "det": det.to_string()}));
            }
        }
    }
    Ok(Check::from_outcome("torus-elliptic-blocks", bad.is_empty(), Some(json!(bad)))
        .with_detail(format!("{cases} polynomials")))
}

/// Ratio helper for reports.
pub fn as_rational(v: &BigInt) -> BigRational {
    BigRational::from_integer(v.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chebyshev_examples() {
        assert_eq!(chebyshev_poly(1), RatPoly::x());
        assert_eq!(chebyshev_poly(2), RatPoly::from_i64(&[-2, 0, 1]));
        assert_eq!(chebyshev_poly(3), RatPoly::from_i64(&[0, -3, 0, 1]));
    }

    #[test]
    fn semigroup() {
        assert!(cheb_semigroup_check(2, 3));
        assert!(cheb_semigroup_check(2, 2));
        assert!(cheb_semigroup_check(1, 7));
    }

    #[test]
    fn fixed_point_examples() {
        let r = cheb_fixed_points(2, 1).unwrap();
        assert_eq!(r.count, 2);
        assert!((r.points[0] + 1.0).abs() < 1e-12 && (r.points[1] - 2.0).abs() < 1e-12);
        assert!(r.agree, "{r:?}");
        assert_eq!(cheb_fixed_points(2, 2).unwrap().count, 4);
        let r = cheb_fixed_points(3, 1).unwrap();
        assert_eq!(r.count, 3);
        assert_eq!(r.polynomial_roots_count, Some(3));
        assert!(r.agree);
    }

    #[test]
    fn numeric_scan_handles_close_pairs() {
        for big_n in [8u64, 27, 125, 243, 1024] {
            let r = cheb_fixed_points_numeric(big_n);
            assert_eq!(r.len() as u64, big_n, "N = {big_n}");
        }
    }

    #[test]
    fn elliptic_block() {
        let e = torus_from_weil_poly(&RatPoly::from_i64(&[2, -1, 1])).unwrap();
        assert_eq!(e.a, IntMatrix::from_rows(&[vec![0, -2], vec![1, 1]]).unwrap());
        assert!(symplectic_scaling_check(&e, 2));
        assert_eq!(torus_fixed_count(&e, 1).unwrap(), BigInt::from(2));
    }

    #[test]
    fn identity_is_degenerate() {
        let e = TorusEndo::new(IntMatrix::identity(2)).unwrap();
        assert!(matches!(torus_fixed_count(&e, 1), Err(Error::Degenerate(_))));
    }

    #[test]
    fn irreducible_quartic_falls_back() {
        // x⁴ + 2: constant 2 is not a square, so no x² − ax + q factors
        let e = torus_from_weil_poly(&RatPoly::from_i64(&[2, 0, 0, 0, 1])).unwrap();
        assert!(e.symplectic_unverified);
        assert_eq!(charpoly(&e.a).unwrap(), RatPoly::from_i64(&[2, 0, 0, 0, 1]));
    }

    #[test]
    fn symplectic_examples() {
        let d = TorusEndo::new(IntMatrix::from_rows(&[vec![2, 0], vec![0, 2]]).unwrap()).unwrap();
        assert!(symplectic_scaling_check(&d, 4));
        let u = TorusEndo::new(IntMatrix::from_rows(&[vec![1, 1], vec![0, 1]]).unwrap()).unwrap();
        assert!(symplectic_scaling_check(&u, 1));
    }

    #[test]
    fn resultant_matches_determinant() {
        let e = torus_from_weil_poly(&RatPoly::from_i64(&[3, -2, 1])).unwrap();
        for n in 1..=5 {
            assert_eq!(torus_det(&e, n), torus_det_via_resultant(&e, n).unwrap());
        }
    }

    #[test]
    fn suite_checks() {
        assert!(semigroup_table_check(5).passed());
        assert!(cheb_sweep_check(200).unwrap().passed());
        assert!(elliptic_block_check(&[2, 3, 5]).unwrap().passed());
        assert_eq!(prime_powers_up_to(10), vec![2, 3, 4, 5, 7, 8, 9]);
        let r = torus_report(&RatPoly::from_i64(&[9, -6, 6, -2, 1]), 4).unwrap();
        assert!(r.checks.iter().all(|c| c.status == crate::report::Status::Pass), "{:?}", r.checks);
        assert_eq!(r.endo.blocks.len(), 2);
    }
}
