//! Polynomial roots.
//!
//! The polynomial is split into square-free factors exactly first, so repeated
//! eigenvalues never reach the floating-point stage. Each factor then gets
//! exact real-root isolation (Descartes' rule on bisected intervals, refined
//! by exact sign evaluation) and an Aberth–Ehrlich iteration for the
//! remaining complex roots.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::poly::{int_divexact, primitive, squarefree_decomposition, RatPoly};
use crate::error::{Error, Result};

const ABERTH_MAX_ITER: usize = 2000;

/// A distinct root with its multiplicity.
#[derive(Debug, Clone, PartialEq)]
pub struct RootCluster {
    pub value: Complex64,
    pub multiplicity: usize,
    /// Certified real (found by exact isolation). The enclosing interval is
    /// `[lo, hi]`.
    pub real_bounds: Option<(f64, f64)>,
    /// Backward error |p(z)| / Σ|p_i||z|^i for the square-free factor.
    pub backward_error: f64,
    /// Degree of the square-free factor this root came from.
    pub factor_degree: usize,
}

fn sign_variations(c: &[BigInt]) -> usize {
    let mut last = 0i8;
    let mut v = 0;
    for x in c {
        let s = if x.is_positive() {
            1
        } else if x.is_negative() {
            -1
        } else {
            0
        };
        if s != 0 {
            if last != 0 && s != last {
                v += 1;
            }
            last = s;
        }
    }
    v
}

fn taylor_shift_one(c: &mut [BigInt]) {
    let n = c.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            let t = c[j + 1].clone();
            c[j] += t;
        }
    }
}

/// Descartes bound on the number of roots of g in (0, 1).
fn descartes_01(g: &[BigInt]) -> usize {
    let mut r: Vec<BigInt> = g.iter().rev().cloned().collect();
    taylor_shift_one(&mut r);
    sign_variations(&r)
}

fn bit_len(v: &BigInt) -> f64 {
    v.bits() as f64
}

/// k with every complex root of f strictly inside |z| < 2^k.
fn root_bound_exp(f: &[BigInt]) -> i64 {
    let d = f.len() - 1;
    let lead = bit_len(&f[d]) - 1.0;
    let mut m = f64::NEG_INFINITY;
    for i in 1..=d {
        let c = &f[d - i];
        if c.is_zero() {
            continue;
        }
        m = m.max((bit_len(c) - lead) / i as f64);
    }
    if m == f64::NEG_INFINITY {
        return 0;
    }
    // Fujiwara: |z| ≤ 2·max |a_{d-i}/a_d|^{1/i}
    (m.ceil() as i64) + 2
}

/// f(x) ↦ f(s·2^k·x) for s = ±1, as integer coefficients.
fn scale_poly(f: &[BigInt], k: i64, negate: bool) -> Vec<BigInt> {
    let d = f.len() - 1;
    f.iter()
        .enumerate()
        .map(|(i, c)| {
            let mut v = if k >= 0 {
                c << (k as usize * i)
            } else {
                c << ((-k) as usize * (d - i))
            };
            if negate && i % 2 == 1 {
                v = -v;
            }
            v
        })
        .collect()
}

/// Isolating data for one real root on the scaled (0,1) picture:
/// root lies in (c/2^j, (c+1)/2^j), or equals c/2^j exactly when `exact`.
#[derive(Debug, Clone)]
struct Iso {
    c: BigInt,
    j: u32,
    exact: bool,
}

fn isolate_01(g: Vec<BigInt>) -> Vec<Iso> {
    let mut out = Vec::new();
    let mut stack = vec![(primitive(&g), BigInt::zero(), 0u32)];
    while let Some((g, c, j)) = stack.pop() {
        if g.len() <= 1 {
            continue;
        }
        let v = descartes_01(&g);
        if v == 0 {
            continue;
        }
        if v == 1 {
            out.push(Iso { c, j, exact: false });
            continue;
        }
        let dg = g.len() - 1;
        let left: Vec<BigInt> = g
            .iter()
            .enumerate()
            .map(|(i, a)| a << (dg - i))
            .collect();
        let mut right = left.clone();
        taylor_shift_one(&mut right);
        if right[0].is_zero() {
            out.push(Iso {
                c: &c * 2 + 1,
                j: j + 1,
                exact: true,
            });
            right.remove(0);
        }
        stack.push((primitive(&right), &c * 2 + 1, j + 1));
        stack.push((primitive(&left), &c * 2, j + 1));
    }
    out
}

/// Sign of f(a / 2^e).
fn sign_at_dyadic(f: &[BigInt], a: &BigInt, e: u32) -> i32 {
    let d = f.len() - 1;
    let mut acc = f[d].clone();
    for i in (0..d).rev() {
        acc = acc * a + (&f[i] << (e as usize * (d - i)));
    }
    if acc.is_positive() {
        1
    } else if acc.is_negative() {
        -1
    } else {
        0
    }
}

/// Real roots of a square-free integer polynomial as enclosing intervals
/// (lo, hi) with hi − lo ≤ 2^{-bits}·2^k, k the root-bound exponent.
pub fn real_roots_isolated(f: &[BigInt], bits: u32) -> Vec<(f64, f64)> {
    let mut f = primitive(f);
    let mut out = Vec::new();
    if f.len() <= 1 {
        return out;
    }
    if f[0].is_zero() {
        out.push((0.0, 0.0));
        let k = f.iter().position(|c| !c.is_zero()).unwrap();
        f.drain(0..k);
    }
    if f.len() <= 1 {
        return out;
    }
    let k = root_bound_exp(&f);
    for negate in [false, true] {
        let g = scale_poly(&f, k, negate);
        let isos = isolate_01(g.clone());
        // exact dyadic roots are divided out so that no refinement interval
        // has a root at an endpoint
        let mut g_open = g.clone();
        for iso in isos.iter().filter(|i| i.exact) {
            let lin = vec![-iso.c.clone(), BigInt::one() << iso.j as usize];
            g_open = int_divexact(&g_open, &lin).expect("dyadic root divides exactly");
        }
        for iso in isos {
            let (lo_num, hi_num, e) = if iso.exact {
                (iso.c.clone(), iso.c.clone(), iso.j)
            } else {
                refine(&g_open, iso.c, iso.j, bits)
            };
            let to_f = |num: &BigInt| {
                let v = num.to_f64().unwrap_or(f64::INFINITY);
                v * 2f64.powi(k as i32 - e as i32)
            };
            let (lo, hi) = (to_f(&lo_num), to_f(&hi_num));
            if negate {
                out.push((-hi, -lo));
            } else {
                out.push((lo, hi));
            }
        }
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

/// Bisect (c/2^j, (c+1)/2^j) until its width is 2^{-bits}; returns
/// (lo numerator, hi numerator, exponent).
fn refine(g: &[BigInt], c: BigInt, j: u32, bits: u32) -> (BigInt, BigInt, u32) {
    let mut lo = c;
    let mut e = j;
    let s_lo = sign_at_dyadic(g, &lo, e);
    while e < bits {
        lo <<= 1;
        e += 1;
        let mid = &lo + 1;
        let s_mid = sign_at_dyadic(g, &mid, e);
        if s_mid == 0 {
            return (mid.clone(), mid, e);
        }
        if s_mid == s_lo {
            lo = mid;
        }
    }
    let hi = &lo + 1;
    (lo, hi, e)
}

fn eval_c(c: &[f64], z: Complex64) -> (Complex64, Complex64, f64) {
    let mut p = Complex64::zero();
    let mut dp = Complex64::zero();
    let mut abs = 0.0;
    let az = z.norm();
    for &a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
        abs = abs * az + a.abs();
    }
    (p, dp, abs)
}

/// Aberth–Ehrlich iteration on f64 coefficients (constant first), roots of
/// modulus at most about 1.
fn aberth(c: &[f64]) -> (Vec<Complex64>, bool) {
    let d = c.len() - 1;
    let mut z: Vec<Complex64> = (0..d)
        .map(|k| Complex64::from_polar(0.9, 2.0 * std::f64::consts::PI * k as f64 / d as f64 + 0.4))
        .collect();
    for _ in 0..ABERTH_MAX_ITER {
        let mut max_step: f64 = 0.0;
        for k in 0..d {
            let (p, dp, _) = eval_c(c, z[k]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let s: Complex64 = (0..d)
                .filter(|&j| j != k)
                .map(|j| Complex64::new(1.0, 0.0) / (z[k] - z[j]))
                .sum();
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            if w.is_finite() {
                z[k] -= w;
                max_step = max_step.max(w.norm() / z[k].norm().max(1e-300).max(1.0));
            }
        }
        if max_step < 1e-15 {
            return (z, true);
        }
    }
    (z, false)
}

fn backward_error(c: &[f64], z: Complex64) -> f64 {
    let (p, _, abs) = eval_c(c, z);
    if abs == 0.0 {
        0.0
    } else {
        p.norm() / abs
    }
}

/// Scaled f64 image g(y) = f(2^k y) / max, so that roots satisfy |y| < 1.
fn scaled_f64(f: &[BigInt], k: i64) -> Vec<f64> {
    let logs: Vec<f64> = f
        .iter()
        .enumerate()
        .map(|(i, c)| {
            if c.is_zero() {
                f64::NEG_INFINITY
            } else {
                bit_len(c) + (k * i as i64) as f64
            }
        })
        .collect();
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    f.iter()
        .enumerate()
        .map(|(i, c)| {
            if c.is_zero() {
                return 0.0;
            }
            let b = c.bits() as i64;
            let shift = (b - 60).max(0);
            let mant = (c >> shift as usize).to_f64().unwrap();
            let exp = shift + k * i as i64 - top as i64;
            mant * 2f64.powf(exp as f64)
        })
        .collect()
}

/// Distinct roots of a square-free integer polynomial.
fn squarefree_roots(f: &[BigInt], tol: f64) -> Result<Vec<RootCluster>> {
    let d = f.len() - 1;
    let k = root_bound_exp(f);
    let scaled = scaled_f64(f, k);
    let unit = 2f64.powi(k as i32);
    let reals = real_roots_isolated(f, 64);
    let mut out: Vec<RootCluster> = Vec::with_capacity(d);
    for &(lo, hi) in &reals {
        let v = 0.5 * (lo + hi);
        out.push(RootCluster {
            value: Complex64::new(v, 0.0),
            multiplicity: 1,
            real_bounds: Some((lo, hi)),
            backward_error: backward_error(&scaled, Complex64::new(v / unit, 0.0)),
            factor_degree: d,
        });
    }
    if reals.len() < d {
        let (zs, converged) = aberth(&scaled);
        let mut zs: Vec<Complex64> = zs.into_iter().map(|z| z * unit).collect();
        // drop the Aberth approximations nearest to the certified real roots
        for r in &out {
            if let Some((pos, _)) = zs
                .iter()
                .enumerate()
                .map(|(i, z)| (i, (z - r.value).norm()))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            {
                zs.swap_remove(pos);
            }
        }
        let mut bad = Vec::new();
        for z in zs {
            let be = backward_error(&scaled, z / unit);
            if !converged && be > tol {
                bad.push(format!("{z} (residual {be:.3e})"));
            }
            out.push(RootCluster {
                value: z,
                multiplicity: 1,
                real_bounds: None,
                backward_error: be,
                factor_degree: d,
            });
        }
        if !bad.is_empty() {
            return Err(Error::NoConvergence(format!(
                "Aberth iteration stopped after {ABERTH_MAX_ITER} sweeps; unresolved roots: {}",
                bad.join(", ")
            )));
        }
    }
    Ok(out)
}

/// Distinct roots with multiplicities, via exact square-free decomposition.
pub fn root_clusters(p: &RatPoly, tol: f64) -> Result<Vec<RootCluster>> {
    if p.is_zero() {
        return Err(Error::Invalid("roots of the zero polynomial".into()));
    }
    let mut out = Vec::new();
    for (factor, mult) in squarefree_decomposition(p) {
        for mut r in squarefree_roots(&factor, tol)? {
            r.multiplicity = mult;
            out.push(r);
        }
    }
    out.sort_by(|a, b| {
        (a.value.re, a.value.im)
            .partial_cmp(&(b.value.re, b.value.im))
            .unwrap()
    });
    Ok(out)
}

/// All complex roots repeated by multiplicity. Roots certified real by exact
/// isolation are returned on the real axis, as are roots whose imaginary
/// part is below `tol`.
pub fn numeric_roots(p: &RatPoly, tol: f64) -> Result<Vec<Complex64>> {
    let clusters = root_clusters(p, tol)?;
    let mut out = Vec::new();
    for c in clusters {
        let mut v = c.value;
        if v.im.abs() < tol {
            v.im = 0.0;
        }
        for _ in 0..c.multiplicity {
            out.push(v);
        }
    }
    Ok(out)
}

/// Exact count of distinct real roots.
pub fn count_distinct_real_roots(p: &RatPoly) -> usize {
    squarefree_decomposition(p)
        .iter()
        .map(|(f, _)| real_roots_isolated(f, 8).len())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted_re(v: Vec<Complex64>) -> Vec<f64> {
        let mut r: Vec<f64> = v.iter().map(|z| z.re).collect();
        r.sort_by(|a, b| a.partial_cmp(b).unwrap());
        r
    }

    #[test]
    fn quadratics() {
        let r = numeric_roots(&RatPoly::from_i64(&[-4, 0, 1]), 1e-12).unwrap();
        assert_eq!(sorted_re(r), vec![-2.0, 2.0]);
        let r = numeric_roots(&RatPoly::from_i64(&[-2, -1, 1]), 1e-12).unwrap();
        let r = sorted_re(r);
        assert!((r[0] + 1.0).abs() < 1e-14 && (r[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn complex_pair() {
        let r = numeric_roots(&RatPoly::from_i64(&[1, 0, 1]), 1e-12).unwrap();
        assert_eq!(r.len(), 2);
        for z in r {
            assert!((z.norm() - 1.0).abs() < 1e-12 && z.re.abs() < 1e-12);
        }
    }

    #[test]
    fn multiple_roots_stay_real() {
        // (x - 3)^4 (x + 1/2)^2 (x^2 - 2)
        let p = RatPoly::from_i64(&[-3, 1])
            .pow(4)
            .mul(&RatPoly::from_i64(&[1, 2]).pow(2))
            .mul(&RatPoly::from_i64(&[-2, 0, 1]));
        let r = numeric_roots(&p, 1e-12).unwrap();
        assert_eq!(r.len(), 8);
        assert!(r.iter().all(|z| z.im == 0.0));
        let re = sorted_re(r);
        let s2 = 2f64.sqrt();
        let expect = [-s2, -0.5, -0.5, s2, 3.0, 3.0, 3.0, 3.0];
        for (a, b) in re.iter().zip(expect) {
            assert!((a - b).abs() < 1e-13, "{a} vs {b}");
        }
    }

    #[test]
    fn wilkinson_like_clusters_are_resolved() {
        let mut p = RatPoly::one();
        for k in 1..=20 {
            p = p.mul(&RatPoly::from_i64(&[-k, 1]));
        }
        let r = sorted_re(numeric_roots(&p, 1e-12).unwrap());
        for (k, v) in r.iter().enumerate() {
            assert!((v - (k + 1) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn real_count_exact() {
        let p = RatPoly::from_i64(&[-1, 0, 0, 1]); // x^3 - 1
        assert_eq!(count_distinct_real_roots(&p), 1);
        let r = numeric_roots(&p, 1e-12).unwrap();
        assert_eq!(r.len(), 3);
        assert_eq!(r.iter().filter(|z| z.im == 0.0).count(), 1);
    }

    #[test]
    fn dyadic_root_next_to_isolating_interval() {
        // roots 2 − √2, 2, 2 + √2; after scaling, 2 is a split point
        let f: Vec<BigInt> = [-4, 10, -6, 1].iter().map(|&v| BigInt::from(v)).collect();
        let r = real_roots_isolated(&f, 64);
        let want = [2.0 - 2f64.sqrt(), 2.0, 2.0 + 2f64.sqrt()];
        assert_eq!(r.len(), 3);
        for ((lo, hi), w) in r.iter().zip(want) {
            assert!(*lo <= w + 1e-12 && w - 1e-12 <= *hi, "{lo} {hi} {w}");
            assert!(hi - lo < 1e-12);
        }
    }

}
