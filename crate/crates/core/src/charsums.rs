//! Character-sum multisets X_n and the Frobenius-twisted matrix products X'_n.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{check_budget, Error, Result};
use crate::ff::{build_dlog_with_rank, embed, extend_field, make_field_of_order, Field};
use crate::report::Check;

/// Largest q^n accepted by the X_n evaluator.
pub const XN_BUDGET: u128 = 3000;
/// Largest q^n accepted by the X'_n evaluator.
pub const XPRIME_BUDGET: u128 = 1_000_000;
/// |den(z)| below this counts as a pole.
pub const POLE_TOL: f64 = 1e-12;

/// Which y are left out of the sum. `Literal` drops {0, 1, x}; `IncludeX`
/// drops only {0, 1}. In both, y with a zero argument contributes χ(0) = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Exclusion {
    Literal,
    IncludeX,
}

#[derive(Debug, Clone)]
pub struct CharSumConfig {
    pub q: u64,
    pub n: u32,
    /// index of x in F_q
    pub x: u32,
    /// 0 = smallest generator of F_{q^n}^×
    pub generator_rank: usize,
    pub exclusion: Exclusion,
}

impl CharSumConfig {
    pub fn new(q: u64, n: u32, x: u32) -> Self {
        CharSumConfig { q, n, x, generator_rank: 0, exclusion: Exclusion::Literal }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct XnResult {
    pub q: u64,
    pub n: u32,
    pub x: String,
    pub exclusion: Exclusion,
    pub generator: String,
    /// X_n(j) for j = 1..q^n − 2, in character order
    #[serde(serialize_with = "ser_complex_vec")]
    pub values: Vec<Complex64>,
    pub max_imag: f64,
    pub max_abs: f64,
    pub bound: f64,
    /// max |X(j) − conj X(Q−1−j)|
    pub pairing_defect: f64,
    /// exact: the dlog histogram is symmetric under a ↦ −a
    pub histogram_symmetric: bool,
}

pub(crate) fn ser_complex_vec<S: serde::Serializer>(v: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

/// Powers of e^{2πi/m}, taken from the first octant so every entry has the
/// same accuracy.
fn roots_of_unity(m: usize) -> Vec<Complex64> {
    (0..m).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / m as f64)).collect()
}

fn field_for(q: u64, n: u32) -> Result<(Field, Field)> {
    let base = make_field_of_order(q)?;
    let ext = extend_field(&base, n)?;
    Ok((base, ext))
}

/// X_n = { Σ_y χ_j(y(1 − xy)/(1 − y)) : j = 1..Q−2 }, Q = q^n.
pub fn x_n_set(cfg: &CharSumConfig) -> Result<XnResult> {
    if cfg.q % 2 == 0 {
        return Err(Error::Invalid("q must be odd".into()));
    }
    if cfg.n == 0 {
        return Err(Error::Invalid("n must be at least 1".into()));
    }
    check_budget("q^n for character sums", (cfg.q as u128).saturating_pow(cfg.n), XN_BUDGET)?;
    let (base, ext) = field_for(cfg.q, cfg.n)?;
    if cfg.x as u64 >= cfg.q {
        return Err(Error::Invalid(format!("x index {} out of range for F_{}", cfg.x, cfg.q)));
    }
    let xb = base.element(cfg.x);
    if xb.is_zero() || xb == base.one() {
        return Err(Error::Invalid("x must lie in F_q \\ {0, 1}".into()));
    }
    let x = embed(&xb, &ext)?;
    let dl = build_dlog_with_rank(&ext, cfg.generator_rank)?;
    let big_q = ext.size() as usize;
    let order = big_q - 1;
    // histogram of discrete logs of the summand
    let mut hist = vec![0u64; order];
    let one = ext.one();
    for yi in 0..ext.size() {
        let y = ext.element(yi);
        if y.is_zero() || y == one || (cfg.exclusion == Exclusion::Literal && y == x) {
            continue;
        }
        let num = y.mul(&one.sub(&x.mul(&y)?)?)?;
        let v = num.div(&one.sub(&y)?)?;
        if let Some(a) = dl.dlog(&v) {
            hist[a as usize] += 1;
        }
    }
    let w = roots_of_unity(order);
    let values: Vec<Complex64> = (1..order)
        .map(|j| {
            hist.iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(a, &c)| w[(j * a) % order] * c as f64)
                .sum()
        })
        .collect();
    let histogram_symmetric = (1..order).all(|a| hist[a] == hist[order - a]);
    let max_imag = values.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let max_abs = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let pairing_defect = (0..values.len())
        .map(|i| (values[i] - values[values.len() - 1 - i].conj()).norm())
        .fold(0.0, f64::max);
    Ok(XnResult {
        q: cfg.q,
        n: cfg.n,
        x: xb.to_string(),
        exclusion: cfg.exclusion,
        generator: dl.generator().to_string(),
        values,
        max_imag,
        max_abs,
        bound: 2.0 * (big_q as f64).sqrt(),
        pairing_defect,
        histogram_symmetric,
    })
}

/// Sorted by real part, then imaginary part.
pub fn sorted_multiset(v: &[Complex64]) -> Vec<Complex64> {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct XnCheck {
    pub q: u64,
    pub n: u32,
    pub exclusion: Exclusion,
    pub cases: Vec<XnCaseSummary>,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, Serialize)]
pub struct XnCaseSummary {
    pub x: String,
    pub size: usize,
    pub max_imag: f64,
    pub max_abs: f64,
    pub bound: f64,
    pub generator_invariant: bool,
}

/// Size, reality, the 2√(q^n) bound, conjugate pairing and generator
/// independence over every x ∈ F_q ∖ {0, 1}.
pub fn x_n_check(q: u64, n: u32, exclusion: Exclusion, tol: f64) -> Result<XnCheck> {
    let mut cases = Vec::new();
    let mut bad_size = Vec::new();
    let mut bad_real = Vec::new();
    let mut bad_bound = Vec::new();
    let mut bad_pair = Vec::new();
    let mut bad_gen = Vec::new();
    let qn = (q as usize).pow(n);
    for xi in 0..q as u32 {
        let base = make_field_of_order(q)?;
        let xb = base.element(xi);
        if xb.is_zero() || xb == base.one() {
            continue;
        }
        let mut cfg = CharSumConfig::new(q, n, xi);
        cfg.exclusion = exclusion;
        let r = x_n_set(&cfg)?;
        cfg.generator_rank = 1;
        let r2 = x_n_set(&cfg)?;
        let cmp = compare_multisets(&r.values, &r2.values, tol)?;
        let wit = || json!({"x": r.x, "q": q, "n": n});
        if r.values.len() != qn - 2 {
            bad_size.push(wit());
        }
        if r.max_imag > tol {
            bad_real.push(json!({"x": r.x, "max_imag": r.max_imag}));
        }
        if r.max_abs > r.bound + tol {
            bad_bound.push(json!({"x": r.x, "max_abs": r.max_abs, "bound": r.bound}));
        }
        if !r.histogram_symmetric && r.pairing_defect > tol {
            bad_pair.push(json!({"x": r.x, "defect": r.pairing_defect}));
        }
        if !cmp.pass {
            bad_gen.push(json!({"x": r.x, "max_discrepancy": cmp.max_discrepancy}));
        }
        cases.push(XnCaseSummary {
            x: r.x.clone(),
            size: r.values.len(),
            max_imag: r.max_imag,
            max_abs: r.max_abs,
            bound: r.bound,
            generator_invariant: cmp.pass,
        });
    }
    let checks = vec![
        Check::from_outcome("xn-size", bad_size.is_empty(), Some(json!(bad_size))),
        Check::from_outcome("xn-real", bad_real.is_empty(), Some(json!(bad_real))),
        Check::from_outcome("xn-weil-bound", bad_bound.is_empty(), Some(json!(bad_bound))),
        Check::from_outcome("xn-conjugate-pairing", bad_pair.is_empty(), Some(json!(bad_pair))),
        Check::from_outcome("xn-generator-independence", bad_gen.is_empty(), Some(json!(bad_gen))),
    ];
    Ok(XnCheck { q, n, exclusion, cases, checks })
}

// ------------------------------------------------------------------ X'_n

/// Polynomial with complex coefficients, lowest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct CPoly(pub Vec<Complex64>);

impl CPoly {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.0.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatFun {
    pub num: CPoly,
    pub den: CPoly,
}

/// 2×2 matrix of rational functions in z.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixFunction {
    pub entries: [[RatFun; 2]; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoefJson {
    Real(f64),
    Complex([f64; 2]),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RatFunJson {
    pub num: Vec<CoefJson>,
    #[serde(default)]
    pub den: Option<Vec<CoefJson>>,
}

/// {"entries": [[f00, f01], [f10, f11]]}, each f = {"num": [...], "den": [...]}
/// with coefficients lowest degree first, as reals or [re, im].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixFunctionJson {
    pub entries: [[RatFunJson; 2]; 2],
}

fn cpoly(c: &[CoefJson]) -> Result<CPoly> {
    let v: Vec<Complex64> = c
        .iter()
        .map(|c| match *c {
            CoefJson::Real(r) => Complex64::new(r, 0.0),
            CoefJson::Complex([r, i]) => Complex64::new(r, i),
        })
        .collect();
    if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Invalid("non-finite coefficient".into()));
    }
    Ok(CPoly(v))
}

impl MatrixFunctionJson {
    pub fn build(&self) -> Result<MatrixFunction> {
        let f = |r: &RatFunJson| -> Result<RatFun> {
            let den = match &r.den {
                Some(d) => cpoly(d)?,
                None => CPoly(vec![Complex64::new(1.0, 0.0)]),
            };
            if den.0.iter().all(|c| c.norm() == 0.0) {
                return Err(Error::Invalid("zero denominator".into()));
            }
            Ok(RatFun { num: cpoly(&r.num)?, den })
        };
        let e = &self.entries;
        Ok(MatrixFunction { entries: [[f(&e[0][0])?, f(&e[0][1])?], [f(&e[1][0])?, f(&e[1][1])?]] })
    }
}

type M2 = [[Complex64; 2]; 2];

fn m2_mul(a: &M2, b: &M2) -> M2 {
    let mut c = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

impl MatrixFunction {
    pub fn constant(m: [[Complex64; 2]; 2]) -> Self {
        let one = CPoly(vec![Complex64::new(1.0, 0.0)]);
        let f = |c: Complex64| RatFun { num: CPoly(vec![c]), den: one.clone() };
        MatrixFunction { entries: [[f(m[0][0]), f(m[0][1])], [f(m[1][0]), f(m[1][1])]] }
    }

    /// √q times rotation by θ.
    pub fn scaled_rotation(q: f64, theta: f64) -> Self {
        let s = q.sqrt();
        let (c, si) = (theta.cos() * s, theta.sin() * s);
        Self::constant([[Complex64::new(c, 0.0), Complex64::new(-si, 0.0)], [Complex64::new(si, 0.0), Complex64::new(c, 0.0)]])
    }

    pub fn eval(&self, z: Complex64) -> Result<M2> {
        let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let f = &self.entries[i][j];
                let d = f.den.eval(z);
                if d.norm() < POLE_TOL {
                    return Err(Error::Invalid(format!("pole of entry ({i},{j}) at z = {} + {}i", z.re, z.im)));
                }
                m[i][j] = f.num.eval(z) / d;
            }
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct XprimeResult {
    pub q: u64,
    pub n: u32,
    /// value at z = e^{2πik/(Q−1)} for k = 1..Q−2
    #[serde(serialize_with = "ser_complex_vec")]
    pub values: Vec<Complex64>,
}

/// X'_n = { Trace(R(z)R(z^q)…R(z^{q^{n−1}})) : z^{Q−1} = 1, z ≠ 1 }.
pub fn xprime_n_set(r: &MatrixFunction, q: u64, n: u32) -> Result<XprimeResult> {
    if q < 2 || n == 0 {
        return Err(Error::Invalid("need q ≥ 2 and n ≥ 1".into()));
    }
    let big_q = (q as u128).saturating_pow(n);
    check_budget("q^n for X'_n", big_q, XPRIME_BUDGET)?;
    let order = big_q as u64 - 1;
    let w = |k: u64| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / order as f64);
    // R at every needed root, evaluated once
    let mut cache: Vec<Option<M2>> = vec![None; order as usize];
    let mut values = Vec::with_capacity(order as usize - 1);
    for k in 1..order {
        let mut acc = [[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)], [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]];
        let mut e = k;
        for _ in 0..n {
            let m = match cache[e as usize] {
                Some(m) => m,
                None => {
                    let m = r.eval(w(e))?;
                    cache[e as usize] = Some(m);
                    m
                }
            };
            acc = m2_mul(&acc, &m);
            e = ((e as u128 * q as u128) % order as u128) as u64;
        }
        values.push(acc[0][0] + acc[1][1]);
    }
    Ok(XprimeResult { q, n, values })
}

// ---------------------------------------------------------- comparison

#[derive(Debug, Clone, Serialize)]
pub struct MultisetComparison {
    pub pass: bool,
    pub tol: f64,
    pub max_discrepancy: f64,
    /// (a, matched b) realizing the maximum
    pub witness: Option<([f64; 2], [f64; 2])>,
}

/// Greedy nearest matching: each element of `a` in turn takes the closest
/// unused element of `b`.
pub fn compare_multisets(a: &[Complex64], b: &[Complex64], tol: f64) -> Result<MultisetComparison> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!("multiset sizes differ: {} vs {}", a.len(), b.len())));
    }
    let a = sorted_multiset(a);
    let b = sorted_multiset(b);
    let mut used = vec![false; b.len()];
    let mut max_d = 0.0f64;
    let mut witness = None;
    for x in &a {
        let (bi, d) = b
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, y)| (i, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("sizes are equal");
        used[bi] = true;
        if d > max_d || witness.is_none() {
            max_d = d;
            witness = Some(([x.re, x.im], [b[bi].re, b[bi].im]));
        }
    }
    Ok(MultisetComparison { pass: max_d <= tol, tol, max_discrepancy: max_d, witness })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    /// Direct double loop over characters and y, no histogram.
    fn brute(q: u64, x: i64, skip_x: bool) -> Vec<Complex64> {
        let p = q as i64;
        let g = (2..p).find(|&g| (1..p - 1).all(|k| modpow(g, k, p) != 1)).unwrap();
        let dl = |v: i64| (0..p - 1).find(|&k| modpow(g, k, p) == v).unwrap();
        (1..p - 1)
            .map(|j| {
                let mut s = Complex64::new(0.0, 0.0);
                for y in 2..p {
                    if skip_x && y == x {
                        continue;
                    }
                    let v = (y * (1 - x * y)).rem_euclid(p) * modpow((1 - y).rem_euclid(p), p - 2, p) % p;
                    if v != 0 {
                        s += Complex64::from_polar(1.0, 2.0 * PI * (j * dl(v)) as f64 / (p - 1) as f64);
                    }
                }
                s
            })
            .collect()
    }

    fn modpow(b: i64, e: i64, m: i64) -> i64 {
        (0..e).fold(1, |acc, _| acc * b % m)
    }

    #[test]
    fn matches_direct_sum() {
        for (q, x) in [(5u64, 2u32), (5, 3), (7, 3), (11, 6)] {
            for (excl, skip) in [(Exclusion::Literal, true), (Exclusion::IncludeX, false)] {
                let mut cfg = CharSumConfig::new(q, 1, x);
                cfg.exclusion = excl;
                let r = x_n_set(&cfg).unwrap();
                let b = brute(q, x as i64, skip);
                assert_eq!(r.values.len(), b.len());
                for (u, v) in r.values.iter().zip(&b) {
                    assert!((u - v).norm() < 1e-9, "q={q} x={x} {u} {v}");
                }
            }
        }
    }

    #[test]
    fn literal_sum_can_be_complex() {
        // x = 3 over F_5: y = x contributes χ(x(1+x)) = χ(2), not real
        let r = x_n_set(&CharSumConfig::new(5, 1, 3)).unwrap();
        assert!(r.max_imag > 0.5);
        let mut cfg = CharSumConfig::new(5, 1, 3);
        cfg.exclusion = Exclusion::IncludeX;
        assert!(x_n_set(&cfg).unwrap().max_imag < 1e-9);
    }

    #[test]
    fn included_variant_is_real_and_bounded() {
        for (q, n) in [(5, 1), (5, 2), (7, 1), (9, 1)] {
            let rep = x_n_check(q, n, Exclusion::IncludeX, 1e-9).unwrap();
            assert!(rep.checks.iter().all(|c| c.passed()), "{q} {n} {:?}", rep.checks);
        }
    }

    #[test]
    fn constant_matrix() {
        let r0 = [[c(1.0), c(2.0)], [c(-1.0), c(0.5)]];
        let r = xprime_n_set(&MatrixFunction::constant(r0), 3, 2).unwrap();
        assert_eq!(r.values.len(), 7);
        let sq = m2_mul(&r0, &r0);
        for v in &r.values {
            assert!((v - (sq[0][0] + sq[1][1])).norm() < 1e-12);
        }
    }

    #[test]
    fn frobenius_orbits() {
        // R(z) = [[z, 1], [0, 2 + z^2]]
        let j = MatrixFunctionJson {
            entries: [
                [RatFunJson { num: vec![CoefJson::Real(0.0), CoefJson::Real(1.0)], den: None }, RatFunJson { num: vec![CoefJson::Real(1.0)], den: None }],
                [RatFunJson { num: vec![CoefJson::Real(0.0)], den: None }, RatFunJson { num: vec![CoefJson::Real(2.0), CoefJson::Real(0.0), CoefJson::Real(1.0)], den: Some(vec![CoefJson::Real(3.0), CoefJson::Complex([0.0, 1.0])]) }],
            ],
        };
        let (q, n) = (3u64, 3u32);
        let r = xprime_n_set(&j.build().unwrap(), q, n).unwrap();
        let order = 26u64;
        for k in 1..order {
            let k2 = k * q % order;
            assert!((r.values[k as usize - 1] - r.values[k2 as usize - 1]).norm() < 1e-9);
        }
    }

    #[test]
    fn pole_reported() {
        // 1/(z + 1) has a pole at z = −1, a square root of unity for q = 3
        let f = RatFunJson { num: vec![CoefJson::Real(1.0)], den: Some(vec![CoefJson::Real(1.0), CoefJson::Real(1.0)]) };
        let one = || RatFunJson { num: vec![CoefJson::Real(1.0)], den: None };
        let j = MatrixFunctionJson { entries: [[f, one()], [one(), one()]] };
        let err = xprime_n_set(&j.build().unwrap(), 3, 1).unwrap_err();
        assert!(err.to_string().contains("pole"), "{err}");
    }

    #[test]
    fn rotation_bound() {
        let (q, n) = (5u64, 3u32);
        let r = xprime_n_set(&MatrixFunction::scaled_rotation(q as f64, 0.7), q, n).unwrap();
        let b = 2.0 * (q as f64).powf(n as f64 / 2.0);
        assert!(r.values.iter().all(|v| v.re.abs() <= b + 1e-9 && v.im.abs() < 1e-9));
    }

    #[test]
    fn comparison() {
        let a = vec![c(1.0), c(2.0), Complex64::new(0.0, 1.0)];
        let b = vec![Complex64::new(0.0, 1.0), c(1.0), c(2.0)];
        assert!(compare_multisets(&a, &a, 0.0).unwrap().pass);
        assert!(compare_multisets(&a, &b, 0.0).unwrap().pass);
        let tol = 1e-6;
        let mut p = b.clone();
        p[1] += 2.0 * tol;
        let r = compare_multisets(&a, &p, tol).unwrap();
        assert!(!r.pass && r.witness.is_some());
        assert!(compare_multisets(&a, &a[..2], tol).is_err());
    }
}
