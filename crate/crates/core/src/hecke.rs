//! Hecke operators T_x on functions on F_Q (Q = q^n), the tangent operator
//! T_tan and the denominator operator D = (Q + 1 − T_tan)^{-1}.
//!
//! Entries follow
//!
//! (T_x)_{yz} = #{w : w² = f_t(x,y,z)} − 2
//!              + [x = y]·(1 if x ∈ {0,1,t} else Q + 1)
//!              − Q·[x ∉ {0,1,t}, (y,z) ∈ {(t/x, 0), ((t−x)/(1−x), 1), (t(1−x)/(t−x), t)}]
//!
//! which makes Σ_x T_x = 1 and T_x T_y = Σ_z (T_x)_{yz} T_z hold exactly.
//! The correction terms are read with Q in place of q at level n.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::error::{check_budget, Error, Result};
use crate::exactlin::{rat_inverse, rat_to_string, solve_dixon, IntMatrix, RatMatrix, Spectrum, SpectrumSummary};
use crate::ff::{embed, extend_field, field_to_json, make_field_of_order, Field, FieldDesc, FieldElement, FieldJson};
use crate::report::{Check, Status};

/// Largest Q for which a whole family is held in memory.
pub const FAMILY_MAX: u64 = 300;
/// Largest Q for a single operator.
pub const OPERATOR_MAX: u64 = 4096;

#[derive(Debug, Clone)]
pub struct HeckeParams {
    base: Field,
    field: Field,
    t: FieldElement,
    level: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct HeckeParamsJson {
    pub q: u64,
    pub level: u32,
    pub size: u64,
    /// coordinates of t over the prime field
    pub t: Vec<u32>,
    pub field: FieldJson,
}

impl HeckeParams {
    /// `t` must live in `base`; the working field is the degree-`level`
    /// extension of `base`.
    pub fn new(base: &Field, t: &FieldElement, level: u32) -> Result<Self> {
        if base.p() == 2 {
            return Err(Error::EvenCharacteristic);
        }
        if **t.field() != **base {
            return Err(Error::FieldMismatch);
        }
        if t.index() <= 1 {
            return Err(Error::Invalid("t must differ from 0 and 1".into()));
        }
        if level == 0 {
            return Err(Error::Invalid("level must be at least 1".into()));
        }
        let field = extend_field(base, level)?;
        let t = embed(t, &field)?;
        Ok(HeckeParams { base: base.clone(), field, t, level })
    }

    /// Base field of order `q`; `t` is an enumeration index in it.
    pub fn from_order(q: u64, t: u32, level: u32) -> Result<Self> {
        let base = make_field_of_order(q)?;
        if t as u64 >= q {
            return Err(Error::Invalid(format!("t index {t} out of range for F_{q}")));
        }
        let te = base.element(t);
        HeckeParams::new(&base, &te, level)
    }

    pub fn at_level(&self, level: u32) -> Result<Self> {
        let t = self.base.element(self.t.index());
        HeckeParams::new(&self.base, &t, level)
    }

    pub fn base(&self) -> &Field {
        &self.base
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    /// t in the working field.
    pub fn t(&self) -> &FieldElement {
        &self.t
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn q(&self) -> u64 {
        self.base.size() as u64
    }

    /// Q = q^level, the size of the working field and of the matrices.
    pub fn size(&self) -> u64 {
        self.field.size() as u64
    }

    pub fn is_special(&self, x: u32) -> bool {
        x == 0 || x == 1 || x == self.t.index()
    }

    /// Indices of the base field inside the working field, outside {0, 1, t}.
    pub fn generic_base_points(&self) -> Vec<u32> {
        (0..self.base.size()).filter(|&x| !self.is_special(x)).collect()
    }

    pub fn generic_points(&self) -> Vec<u32> {
        (0..self.field.size()).filter(|&x| !self.is_special(x)).collect()
    }

    pub fn to_json(&self) -> HeckeParamsJson {
        HeckeParamsJson {
            q: self.q(),
            level: self.level,
            size: self.size(),
            t: self.t.abs_coeffs(),
            field: field_to_json(&self.field).expect("field descriptor serializes"),
        }
    }
}

/// f_t(x,y,z) = (xy+yz+zx−t)² + 4xyz(1+t−(x+y+z)).
pub fn f_t_eval(t: &FieldElement, x: &FieldElement, y: &FieldElement, z: &FieldElement) -> Result<FieldElement> {
    let f = x.field();
    for e in [t, y, z] {
        if **e.field() != **f {
            return Err(Error::FieldMismatch);
        }
    }
    let xy = x.mul(y)?;
    let s2 = xy.add(&y.mul(z)?)?.add(&z.mul(x)?)?.sub(t)?;
    let xyz = xy.mul(z)?;
    let lin = f.one().add(t)?.sub(&x.add(y)?.add(z)?)?;
    s2.mul(&s2)?.add(&f.from_int(4).mul(&xyz)?.mul(&lin)?)
}

/// One entry of T_x, evaluated straight from the formula.
pub fn hecke_entry(params: &HeckeParams, x: &FieldElement, y: &FieldElement, z: &FieldElement) -> Result<i64> {
    let f = params.field();
    for e in [x, y, z] {
        if **e.field() != **f {
            return Err(Error::FieldMismatch);
        }
    }
    let big_q = params.size() as i64;
    let t = params.t();
    let v = f_t_eval(t, x, y, z)?;
    let mut entry = crate::ff::sqrt_count(&v)? as i64 - 2;
    let special = params.is_special(x.index());
    if x == y {
        entry += if special { 1 } else { big_q + 1 };
    }
    if !special {
        let one = f.one();
        let zero = f.zero();
        let hits = [
            (t.div(x)?, zero),
            (t.sub(x)?.div(&one.sub(x)?)?, one.clone()),
            (t.mul(&one.sub(x)?)?.div(&t.sub(x)?)?, t.clone()),
        ];
        if hits.iter().any(|(yy, zz)| yy == y && zz == z) {
            entry -= big_q;
        }
    }
    Ok(entry)
}

/// Row kernel working on raw field indices. Writes f(z) = A z² + B z + C
/// for fixed (x, y) and fills a row in O(Q).
struct Kernel<'a> {
    f: &'a FieldDesc,
    t: u32,
    big_q: i64,
    one: u32,
    two: u32,
    four: u32,
}

impl<'a> Kernel<'a> {
    fn new(p: &'a HeckeParams) -> Self {
        let f: &FieldDesc = &p.field;
        let two = f.add(1, 1);
        Kernel {
            f,
            t: p.t.index(),
            big_q: p.size() as i64,
            one: 1,
            two,
            four: f.add(two, two),
        }
    }

    fn special(&self, x: u32) -> bool {
        x == 0 || x == 1 || x == self.t
    }

    /// (y, z) pairs that receive −Q in T_x.
    fn hits(&self, x: u32) -> Option<[(u32, u32); 3]> {
        if self.special(x) {
            return None;
        }
        let f = self.f;
        let (t, one) = (self.t, self.one);
        let omx = f.sub(one, x);
        let tmx = f.sub(t, x);
        Some([
            (f.mul(t, f.inv(x)), 0),
            (f.mul(tmx, f.inv(omx)), one),
            (f.mul(f.mul(t, omx), f.inv(tmx)), t),
        ])
    }

    fn row(&self, x: u32, y: u32, hits: &Option<[(u32, u32); 3]>, out: &mut [i64]) {
        let f = self.f;
        let xy = f.mul(x, y);
        let s = f.add(x, y);
        let d = f.sub(x, y);
        let a = f.mul(d, d);
        let xyt = f.sub(xy, self.t);
        let lin = f.sub(f.add(self.one, self.t), s);
        let b = f.add(f.mul(self.two, f.mul(s, xyt)), f.mul(self.four, f.mul(xy, lin)));
        let c = f.mul(xyt, xyt);
        for (z, slot) in out.iter_mut().enumerate() {
            let z = z as u32;
            let v = f.add(f.mul(f.add(f.mul(a, z), b), z), c);
            *slot = f.sqrt_count_raw(v) as i64 - 2;
        }
        if x == y {
            let shift = if self.special(x) { 1 } else { self.big_q + 1 };
            out.iter_mut().for_each(|v| *v += shift);
        }
        if let Some(h) = hits {
            for &(yy, zz) in h {
                if yy == y {
                    out[zz as usize] -= self.big_q;
                }
            }
        }
    }

    fn operator(&self, x: u32) -> IntMatrix {
        let n = self.big_q as usize;
        let hits = self.hits(x);
        let mut data = vec![0i64; n * n];
        for (y, row) in data.chunks_mut(n).enumerate() {
            self.row(x, y as u32, &hits, row);
        }
        IntMatrix::from_vec(n, n, data).expect("square")
    }
}

/// The matrix T_x for one x (an index of the working field).
pub fn hecke_operator(params: &HeckeParams, x: u32) -> Result<IntMatrix> {
    check_budget("Hecke operator dimension", params.size() as u128, OPERATOR_MAX as u128)?;
    if x as u64 >= params.size() {
        return Err(Error::Invalid(format!("x index {x} out of range")));
    }
    Ok(Kernel::new(params).operator(x))
}

#[derive(Debug, Clone)]
pub struct HeckeMatrix {
    pub x: FieldElement,
    pub m: IntMatrix,
}

#[derive(Debug, Clone)]
pub struct HeckeFamily {
    params: HeckeParams,
    mats: Vec<HeckeMatrix>,
}

impl HeckeFamily {
    pub fn params(&self) -> &HeckeParams {
        &self.params
    }

    pub fn matrices(&self) -> &[HeckeMatrix] {
        &self.mats
    }

    pub fn operator(&self, x: u32) -> &IntMatrix {
        &self.mats[x as usize].m
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }
}

/// All T_x, x ranging over the working field in enumeration order.
pub fn hecke_family(params: &HeckeParams) -> Result<HeckeFamily> {
    check_budget("Hecke family dimension", params.size() as u128, FAMILY_MAX as u128)?;
    let k = Kernel::new(params);
    let mats = (0..params.field.size())
        .map(|x| HeckeMatrix { x: params.field.element(x), m: k.operator(x) })
        .collect();
    Ok(HeckeFamily { params: params.clone(), mats })
}

// ---------------------------------------------------------------- checks

fn first_mismatch(a: &IntMatrix, b: &IntMatrix) -> Option<serde_json::Value> {
    a.first_difference(b)
        .map(|(i, j, u, v)| json!({"row": i, "col": j, "lhs": u, "rhs": v}))
}

pub fn check_commutativity(fam: &HeckeFamily) -> Check {
    let name = "property-1-commute";
    let n = fam.len();
    for a in 0..n {
        for b in a + 1..n {
            let (ta, tb) = (fam.operator(a as u32), fam.operator(b as u32));
            if let Some(w) = first_mismatch(&ta.mul(tb), &tb.mul(ta)) {
                return Check::fail(name, json!({"x1": a, "x2": b, "entry": w}));
            }
        }
    }
    Check::pass(name).with_detail(format!("{} pairs", n * n.saturating_sub(1) / 2))
}

pub fn check_sum_identity(fam: &HeckeFamily) -> Check {
    let name = "property-2-sum-identity";
    let n = fam.params.size() as usize;
    let mut s = IntMatrix::zeros(n, n);
    for h in &fam.mats {
        s = s.add(&h.m);
    }
    match first_mismatch(&s, &IntMatrix::identity(n)) {
        None => Check::pass(name),
        Some(w) => Check::fail(name, w),
    }
}

pub fn check_involutions(fam: &HeckeFamily) -> Check {
    let name = "property-3-involutions";
    let n = fam.params.size() as usize;
    let id = IntMatrix::identity(n);
    for s in [0, 1, fam.params.t.index()] {
        let m = fam.operator(s);
        if let Some(w) = first_mismatch(&m.mul(m), &id) {
            return Check::fail(name, json!({"x": s, "entry": w}));
        }
    }
    Check::pass(name)
}

/// Sign σ with a·b = σ·c, if any.
fn product_sign(a: &IntMatrix, b: &IntMatrix, c: &IntMatrix) -> Option<i64> {
    let p = a.mul(b);
    if p == *c {
        Some(1)
    } else if p == c.neg() {
        Some(-1)
    } else {
        None
    }
}

fn klein_signs(fam: &HeckeFamily) -> Vec<(String, Option<i64>)> {
    let t = fam.params.t.index();
    let (t0, t1, tt) = (fam.operator(0), fam.operator(1), fam.operator(t));
    vec![
        ("T_0 T_1 = T_t".to_string(), product_sign(t0, t1, tt)),
        ("T_0 T_t = T_1".to_string(), product_sign(t0, tt, t1)),
        ("T_1 T_t = T_0".to_string(), product_sign(t1, tt, t0)),
    ]
}

/// {1, T_0, T_1, T_t} closed under multiplication, as stated.
pub fn check_klein_closure(fam: &HeckeFamily) -> Check {
    let name = "property-3-klein-closure";
    let signs = klein_signs(fam);
    let bad: Vec<_> = signs
        .iter()
        .filter(|(_, s)| *s != Some(1))
        .map(|(rel, s)| json!({"relation": rel, "actual_sign": s}))
        .collect();
    if bad.is_empty() {
        Check::pass(name)
    } else {
        Check::fail(name, json!(bad))
    }
}

/// Same closure allowing each product to be ± the third element.
pub fn check_klein_up_to_sign(fam: &HeckeFamily) -> Check {
    let name = "property-3-klein-up-to-sign";
    let signs = klein_signs(fam);
    let ok = signs.iter().all(|(_, s)| s.is_some());
    let w = json!(signs
        .iter()
        .map(|(rel, s)| json!({"relation": rel, "sign": s}))
        .collect::<Vec<_>>());
    Check::from_outcome(name, ok, Some(w))
}

/// T_x T_y = Σ_z (T_x)_{yz} T_z for all x, y.
pub fn check_structure_constants(fam: &HeckeFamily) -> Check {
    let name = "property-6-structure-constants";
    let n = fam.len();
    for x in 0..n {
        let tx = fam.operator(x as u32);
        for y in 0..n {
            let lhs = tx.mul(fam.operator(y as u32));
            let mut rhs = IntMatrix::zeros(n, n);
            for z in 0..n {
                let c = tx.get(y, z);
                if c != 0 {
                    rhs = rhs.add(&fam.operator(z as u32).scale(c));
                }
            }
            if let Some(w) = first_mismatch(&lhs, &rhs) {
                return Check::fail(name, json!({"x": x, "y": y, "entry": w}));
            }
        }
    }
    Check::pass(name).with_detail(format!("{} products", n * n))
}

#[derive(Debug, Clone, Serialize)]
pub struct LabelledSpectrum {
    pub x: u32,
    pub summary: SpectrumSummary,
}

/// Spectrum real (certified by exact root isolation, else |Im| ≤ tol) and
/// inside [−2√Q − tol, 2√Q + tol] for each listed x.
pub fn check_spectral_bound(
    params: &HeckeParams,
    points: &[u32],
    tol: f64,
    spectra: &mut Vec<LabelledSpectrum>,
) -> Result<Check> {
    let name = "property-4-real-spectrum";
    let bound = 2.0 * (params.size() as f64).sqrt() + tol;
    let mut worst_im: f64 = 0.0;
    let mut worst_abs: f64 = 0.0;
    let mut bad = Vec::new();
    for &x in points {
        let s = Spectrum::of(&hecke_operator(params, x)?)?;
        let sm = s.summary();
        worst_im = worst_im.max(sm.max_abs_imag);
        worst_abs = worst_abs.max(sm.max_abs);
        if !(sm.certified_real || sm.max_abs_imag <= tol) || sm.max_abs > bound {
            bad.push(json!({"x": x, "max_abs_imag": sm.max_abs_imag, "max_abs": sm.max_abs, "bound": bound}));
        }
        spectra.push(LabelledSpectrum { x, summary: sm });
    }
    let w = json!({"points": points.len(), "max_abs_imag": worst_im, "max_abs": worst_abs, "bound": bound});
    Ok(if bad.is_empty() {
        Check::from_outcome(name, true, Some(w))
    } else {
        Check::fail(name, json!({"summary": w, "violations": bad}))
    })
}

/// s_n(ξ) = λ^n + λ̄^n where λ + λ̄ = ξ, λλ̄ = q.
pub fn weil_power_sum(xi: f64, q: f64, n: u32) -> f64 {
    let (mut s0, mut s1) = (2.0, xi);
    if n == 0 {
        return s0;
    }
    for _ in 1..n {
        let s2 = xi * s1 - q * s0;
        s0 = s1;
        s1 = s2;
    }
    s1
}

#[derive(Debug, Clone, Serialize)]
pub struct LiftOutcome {
    pub level: u32,
    pub x: u32,
    /// worst distance from s_n(ξ) to the spectrum of T_x^{(n)}
    pub max_distance: f64,
    /// worst distance from (−1)^{n+1} s_n(ξ) to the spectrum of T_x^{(n)}
    pub max_distance_signed: f64,
    pub lifted_spectrum: SpectrumSummary,
}

/// Compares s_n applied to the spectrum of T_x with the spectrum of T_x at level n for every
/// x in the base field outside {0, 1, t}.
pub fn lift_distances(params: &HeckeParams, level: u32) -> Result<Vec<LiftOutcome>> {
    let up = params.at_level(level)?;
    let base = params.at_level(1)?;
    let q = base.q() as f64;
    let sign = if level % 2 == 1 { 1.0 } else { -1.0 };
    let mut out = Vec::new();
    for x in base.generic_base_points() {
        let s1 = Spectrum::of(&hecke_operator(&base, x)?)?;
        let sn = Spectrum::of(&hecke_operator(&up, x)?)?;
        let (mut worst, mut worst_signed) = (0.0f64, 0.0f64);
        for c in &s1.clusters {
            let v = weil_power_sum(c.value.re, q, level);
            worst = worst.max(sn.distance_to(num_complex::Complex64::new(v, 0.0)));
            worst_signed = worst_signed.max(sn.distance_to(num_complex::Complex64::new(sign * v, 0.0)));
        }
        out.push(LiftOutcome {
            level,
            x,
            max_distance: worst,
            max_distance_signed: worst_signed,
            lifted_spectrum: sn.summary(),
        });
    }
    Ok(out)
}

/// The lift check as stated, and the variant with the sign (−1)^{n+1}.
pub fn check_lift(params: &HeckeParams, level: u32, tol: f64) -> Result<(Check, Check)> {
    let outcomes = lift_distances(params, level)?;
    let worst = outcomes.iter().map(|o| o.max_distance).fold(0.0, f64::max);
    let worst_s = outcomes.iter().map(|o| o.max_distance_signed).fold(0.0, f64::max);
    let per_x: Vec<_> = outcomes
        .iter()
        .map(|o| json!({"x": o.x, "max_distance": o.max_distance, "max_distance_signed": o.max_distance_signed}))
        .collect();
    let literal = Check::from_outcome(
        format!("property-5-lift-n{level}"),
        worst <= tol,
        Some(json!({"max_distance": worst, "tol": tol, "per_x": per_x})),
    );
    let signed = Check::from_outcome(
        format!("property-5-lift-n{level}-signed"),
        worst_s <= tol,
        Some(json!({"max_distance": worst_s, "tol": tol, "sign": if level % 2 == 1 { 1 } else { -1 }})),
    );
    Ok((literal, signed))
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub lift_levels: Vec<u32>,
    pub real_tol: f64,
    pub lift_tol: f64,
    /// Pairwise product checks run only up to this dimension.
    pub max_product_dim: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { lift_levels: Vec::new(), real_tol: 1e-9, lift_tol: 1e-6, max_product_dim: 64 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertyReport {
    pub params: HeckeParamsJson,
    pub checks: Vec<Check>,
    pub spectra: Vec<LabelledSpectrum>,
}

impl PropertyReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub fn verify_properties(fam: &HeckeFamily, opts: &VerifyOptions) -> Result<PropertyReport> {
    let p = &fam.params;
    let mut checks = Vec::new();
    let big = p.size() > opts.max_product_dim;
    let skipped = |name: &str| {
        Check {
            name: name.into(),
            status: Status::ReportOnly,
            detail: Some(format!("skipped: dimension {} above {}", p.size(), opts.max_product_dim)),
            witness: None,
        }
    };
    checks.push(if big { skipped("property-1-commute") } else { check_commutativity(fam) });
    checks.push(check_sum_identity(fam));
    checks.push(check_involutions(fam));
    checks.push(check_klein_closure(fam));
    checks.push(check_klein_up_to_sign(fam));
    let mut spectra = Vec::new();
    checks.push(check_spectral_bound(p, &p.generic_points(), opts.real_tol, &mut spectra)?);
    for &n in &opts.lift_levels {
        let (a, b) = check_lift(p, n, opts.lift_tol)?;
        checks.push(a);
        checks.push(b);
    }
    checks.push(if big { skipped("property-6-structure-constants") } else { check_structure_constants(fam) });
    Ok(PropertyReport { params: p.to_json(), checks, spectra })
}

// ------------------------------------------------------- T_tan and D

/// Σ_x T_x².
pub fn sum_of_squares(fam: &HeckeFamily) -> IntMatrix {
    let n = fam.params.size() as usize;
    let mut s = IntMatrix::zeros(n, n);
    for h in &fam.mats {
        s = s.add(&h.m.mul(&h.m));
    }
    s
}

/// Q·T_tan = −Σ T_x² + (Q² − 3Q − 1)·id, an integer matrix.
pub fn t_tan_scaled(fam: &HeckeFamily) -> IntMatrix {
    let q = fam.params.size() as i64;
    let n = q as usize;
    sum_of_squares(fam).neg().add(&IntMatrix::identity(n).scale(q * q - 3 * q - 1))
}

/// T_tan = −(1/Q) Σ T_x² + (Q − 3 − 1/Q)·id.
pub fn t_tan(fam: &HeckeFamily) -> RatMatrix {
    let q = BigInt::from(fam.params.size());
    t_tan_scaled(fam).to_rat().scale(&BigRational::new(1.into(), q))
}

/// D = (Q + 1 − T_tan)^{-1} by exact inversion.
pub fn d_operator(t_tan: &RatMatrix, q_n: u64) -> Result<RatMatrix> {
    let n = t_tan.rows();
    let shift = RatMatrix::identity(n).scale(&BigRational::from_integer((q_n + 1).into()));
    rat_inverse(&shift.sub(t_tan)).map_err(|e| match e {
        Error::Singular => Error::Singular,
        other => other,
    })
}

/// Checks on T_tan: commutation with every T_x, real spectrum within ±2√Q.
pub fn check_t_tan(fam: &HeckeFamily, tol: f64) -> Result<Vec<Check>> {
    let scaled = t_tan_scaled(fam);
    let mut checks = Vec::new();
    let mut bad = None;
    for h in &fam.mats {
        if let Some(w) = first_mismatch(&scaled.mul(&h.m), &h.m.mul(&scaled)) {
            bad = Some(json!({"x": h.x.index(), "entry": w}));
            break;
        }
    }
    checks.push(match bad {
        None => Check::pass("t-tan-commutes"),
        Some(w) => Check::fail("t-tan-commutes", w),
    });
    let s = Spectrum::of(&scaled)?;
    let q = fam.params.size() as f64;
    let sm = s.summary();
    // eigenvalues of Q·T_tan lie in Q·[−2√Q, 2√Q]
    let ok = (sm.certified_real || sm.max_abs_imag <= tol * q) && sm.max_abs <= q * (2.0 * q.sqrt() + tol);
    checks.push(Check::from_outcome(
        "t-tan-real-spectrum",
        ok,
        Some(json!({"max_abs": sm.max_abs / q, "bound": 2.0 * q.sqrt(), "certified_real": sm.certified_real})),
    ));
    Ok(checks)
}

/// Streams T_x one at a time; used where a whole family does not fit.
#[derive(Debug, Clone)]
pub struct HeckeOperators {
    params: HeckeParams,
}

impl HeckeOperators {
    pub fn new(params: &HeckeParams) -> Result<Self> {
        check_budget("Hecke operator dimension", params.size() as u128, OPERATOR_MAX as u128)?;
        Ok(HeckeOperators { params: params.clone() })
    }

    pub fn params(&self) -> &HeckeParams {
        &self.params
    }

    pub fn operator(&self, x: u32) -> IntMatrix {
        Kernel::new(&self.params).operator(x)
    }

    /// tr T_x for every x.
    pub fn traces(&self) -> Vec<i64> {
        let k = Kernel::new(&self.params);
        let n = self.params.field.size();
        (0..n)
            .map(|x| {
                let hits = k.hits(x);
                let mut row = vec![0i64; n as usize];
                (0..n)
                    .map(|y| {
                        k.row(x, y, &hits, &mut row);
                        row[y as usize]
                    })
                    .sum()
            })
            .collect()
    }

    /// Coordinates of Σ_y T_y² in the basis {T_z}: c_z = Σ_y (T_y)_{yz}.
    pub fn square_sum_coords(&self) -> Vec<i64> {
        let k = Kernel::new(&self.params);
        let n = self.params.field.size() as usize;
        let mut c = vec![0i64; n];
        let mut row = vec![0i64; n];
        for y in 0..n as u32 {
            k.row(y, y, &k.hits(y), &mut row);
            for (a, b) in c.iter_mut().zip(&row) {
                *a += b;
            }
        }
        c
    }
}

/// D in coordinates of the commutative algebra spanned by the T_z.
///
/// With property 6 the T_z are the regular representation of that algebra
/// and its unit is Σ_z e_z, so Q + 1 − T_tan = (1/Q)(ΣT_y² + (4Q+1)·id) is
/// the image of a = c + (4Q+1)·u, and D is the image of d with d·a = Q·u.
/// The product by a is the integer matrix A = Σ c_z T_z + (4Q+1)·id, so d
/// solves Aᵀ dᵀ = Q·1.
#[derive(Debug, Clone)]
pub struct DOperator {
    pub size: u64,
    pub coords: Vec<BigRational>,
    /// tr T_z
    pub traces: Vec<i64>,
    /// random vectors on which ΣT_y² = Σ c_z T_z was confirmed
    pub freivalds_rounds: usize,
    /// coords = numerators / denominator
    numerators: Vec<BigInt>,
    denominator: BigInt,
}

pub fn d_operator_algebra(ops: &HeckeOperators, seed: u64) -> Result<DOperator> {
    let p = &ops.params;
    let n = p.size() as usize;
    let big_q = n as i64;
    let k = Kernel::new(p);
    let c = ops.square_sum_coords();
    let traces = ops.traces();
    const ROUNDS: usize = 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vs: Vec<Vec<i64>> = (0..ROUNDS)
        .map(|_| (0..n).map(|_| rng.gen_range(-1000..=1000)).collect())
        .collect();
    let mut sq_v: Vec<Vec<i128>> = vec![vec![0; n]; ROUNDS];
    let mut a = vec![0i64; n * n];
    for z in 0..n {
        let tz = k.operator(z as u32);
        let cz = c[z];
        if cz != 0 {
            for (dst, &v) in a.iter_mut().zip(tz.data()) {
                *dst += cz * v;
            }
        }
        for (r, v) in vs.iter().enumerate() {
            let w = tz.mul_vec(v);
            let w: Vec<i64> = w.iter().map(|&x| x as i64).collect();
            for (acc, x) in sq_v[r].iter_mut().zip(tz.mul_vec(&w)) {
                *acc += x;
            }
        }
    }
    let shift = 4 * big_q + 1;
    for i in 0..n {
        a[i * n + i] += shift;
    }
    let a = IntMatrix::from_vec(n, n, a)?;
    for (r, v) in vs.iter().enumerate() {
        let lhs = a.mul_vec(v);
        for i in 0..n {
            if lhs[i] != sq_v[r][i] + shift as i128 * v[i] as i128 {
                return Err(Error::Internal(format!(
                    "structure constants do not reproduce the sum of squares (row {i})"
                )));
            }
        }
    }
    let rhs = vec![BigInt::from(big_q); n];
    let coords = solve_dixon(&a.transpose(), &rhs)?;
    let denominator = coords.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
    let numerators = coords.iter().map(|c| c.numer() * (&denominator / c.denom())).collect();
    Ok(DOperator { size: p.size(), coords, traces, freivalds_rounds: ROUNDS, numerators, denominator })
}

impl DOperator {
    fn pair(&self, v: impl Iterator<Item = BigInt>) -> BigRational {
        let num: BigInt = self.numerators.iter().zip(v).map(|(a, b)| a * b).sum();
        BigRational::new(num, self.denominator.clone())
    }

    pub fn trace(&self) -> BigRational {
        self.pair(self.traces.iter().map(|&t| BigInt::from(t)))
    }

    /// Trace(M_1 ⋯ M_k · D) for matrices M_i in the algebra.
    pub fn trace_with(&self, mats: &[&IntMatrix]) -> BigRational {
        let mut v: Vec<BigInt> = self.traces.iter().map(|&t| BigInt::from(t)).collect();
        for m in mats.iter().rev() {
            v = (0..m.rows())
                .map(|i| m.row(i).iter().zip(&v).map(|(&a, b)| b * a).sum())
                .collect();
        }
        self.pair(v.into_iter())
    }

    /// Trace(T_x D) for every listed x, streaming the rows of T_x.
    pub fn trace_with_each(&self, ops: &HeckeOperators, points: &[u32]) -> Vec<BigRational> {
        let k = Kernel::new(&ops.params);
        let n = self.size as usize;
        let mut row = vec![0i64; n];
        points
            .iter()
            .map(|&x| {
                let hits = k.hits(x);
                let w = (0..n).map(|y| {
                    k.row(x, y as u32, &hits, &mut row);
                    let dot: i128 = row.iter().zip(&self.traces).map(|(&a, &b)| a as i128 * b as i128).sum();
                    BigInt::from(dot)
                });
                self.pair(w)
            })
            .collect()
    }

    /// Σ d_z T_z as an explicit matrix.
    pub fn to_matrix(&self, fam: &HeckeFamily) -> RatMatrix {
        let n = self.size as usize;
        let mut out = RatMatrix::zeros(n, n);
        for (z, d) in self.coords.iter().enumerate() {
            if d.is_zero() {
                continue;
            }
            out = out.add(&fam.operator(z as u32).to_rat().scale(d));
        }
        out
    }
}

/// Q²(Q−2)/((Q−1)²(Q+1))
pub fn expected_trace_d(big_q: u64) -> BigRational {
    let q = BigInt::from(big_q);
    let one = BigInt::from(1);
    BigRational::new(&q * &q * (&q - 2), (&q - &one) * (&q - &one) * (&q + &one))
}

/// Q/(Q−1)²
pub fn expected_trace_txd(big_q: u64) -> BigRational {
    let q = BigInt::from(big_q);
    let qm = &q - 1;
    BigRational::new(q, &qm * &qm)
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceIdentityReport {
    pub q: u64,
    pub level: u32,
    pub size: u64,
    pub trace_d: String,
    pub trace_d_expected: String,
    pub trace_txd_expected: String,
    /// (x, Trace(T_x D)) for x outside {0, 1, t}
    pub trace_txd: Vec<(u32, String)>,
    pub checks: Vec<Check>,
}

/// Trace(D) and Trace(T_x D) for every x ∉ {0,1,t} of the working field,
/// through the algebra coordinates of D.
pub fn trace_identities(params: &HeckeParams, seed: u64) -> Result<TraceIdentityReport> {
    let ops = HeckeOperators::new(params)?;
    let d = d_operator_algebra(&ops, seed)?;
    let big_q = params.size();
    let td = d.trace();
    let etd = expected_trace_d(big_q);
    let ex = expected_trace_txd(big_q);
    let pts = params.generic_points();
    let vals = d.trace_with_each(&ops, &pts);
    let bad: Vec<_> = pts
        .iter()
        .zip(&vals)
        .filter(|(_, v)| **v != ex)
        .map(|(x, v)| json!({"x": x, "value": rat_to_string(v)}))
        .take(5)
        .collect();
    let checks = vec![
        Check::from_outcome(
            "trace-d",
            td == etd,
            Some(json!({"value": rat_to_string(&td), "expected": rat_to_string(&etd)})),
        ),
        Check::from_outcome(
            "trace-tx-d",
            bad.is_empty(),
            Some(json!({"points": pts.len(), "expected": rat_to_string(&ex), "mismatches": bad})),
        ),
    ];
    Ok(TraceIdentityReport {
        q: params.q(),
        level: params.level(),
        size: big_q,
        trace_d: rat_to_string(&td),
        trace_d_expected: rat_to_string(&etd),
        trace_txd_expected: rat_to_string(&ex),
        trace_txd: pts.iter().zip(&vals).map(|(&x, v)| (x, rat_to_string(v))).collect(),
        checks,
    })
}

/// Numeric value of an exact rational, for reports.
pub fn approx(v: &BigRational) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::make_field;

    fn fam(q: u64, t: u32) -> HeckeFamily {
        hecke_family(&HeckeParams::from_order(q, t, 1).unwrap()).unwrap()
    }

    #[test]
    fn f_t_examples() {
        let f5 = make_field(5, 1).unwrap();
        let e = |v| f5.from_int(v);
        assert_eq!(f_t_eval(&e(2), &e(1), &e(1), &e(1)).unwrap(), e(1));
        assert_eq!(f_t_eval(&e(2), &e(0), &e(0), &e(0)).unwrap(), e(4));
        let f7 = make_field(7, 1).unwrap();
        let g = |v| f7.from_int(v);
        assert_eq!(
            f_t_eval(&g(3), &g(1), &g(2), &g(3)).unwrap(),
            f_t_eval(&g(3), &g(3), &g(1), &g(2)).unwrap()
        );
    }

    #[test]
    fn row_kernel_matches_entry_formula() {
        for (q, t, n) in [(5u64, 2u32, 1u32), (7, 3, 1), (9, 4, 1), (5, 3, 2)] {
            let p = HeckeParams::from_order(q, t, n).unwrap();
            let f = p.field().clone();
            for x in 0..p.size() as u32 {
                let m = hecke_operator(&p, x).unwrap();
                for y in 0..p.size() as u32 {
                    for z in 0..p.size() as u32 {
                        let e = hecke_entry(&p, &f.element(x), &f.element(y), &f.element(z)).unwrap();
                        assert_eq!(m.get(y as usize, z as usize), e, "q={q} n={n} x={x} y={y} z={z}");
                    }
                }
            }
        }
    }

    #[test]
    fn diagonal_correction_for_special_x() {
        // x = y = 0, q = 5, t = 2: f = t² = 4 is a square, so 2 − 2 + 1
        let p = HeckeParams::from_order(5, 2, 1).unwrap();
        let f = p.field().clone();
        let z = f.element(0);
        assert_eq!(hecke_entry(&p, &z, &z, &z).unwrap(), 1);
    }

    #[test]
    fn q_correction_fires_three_times() {
        let p = HeckeParams::from_order(5, 2, 1).unwrap();
        let k = Kernel::new(&p);
        let hits = k.hits(3).unwrap();
        // t/x = 2/3 = 4, (t−x)/(1−x) = 4/3 = 3, t(1−x)/(t−x) = 1/4 = 4
        assert_eq!(hits, [(4, 0), (3, 1), (4, 2)]);
    }

    #[test]
    fn small_family_properties() {
        let f = fam(5, 2);
        assert!(check_sum_identity(&f).passed());
        assert!(check_commutativity(&f).passed());
        assert!(check_involutions(&f).passed());
        assert!(check_structure_constants(&f).passed());
        assert!(check_klein_up_to_sign(&f).passed());
    }

    #[test]
    fn weil_recurrence() {
        // λ = 1 + 2i, q = 5: λ² = −3 + 4i, s_2 = −6
        assert!((weil_power_sum(2.0, 5.0, 2) + 6.0).abs() < 1e-12);
        assert_eq!(weil_power_sum(2.0, 5.0, 1), 2.0);
    }

    #[test]
    fn algebra_route_matches_inverse() {
        let p = HeckeParams::from_order(5, 2, 1).unwrap();
        let f = hecke_family(&p).unwrap();
        let generic = d_operator(&t_tan(&f), 5).unwrap();
        let ops = HeckeOperators::new(&p).unwrap();
        let d = d_operator_algebra(&ops, 1).unwrap();
        assert_eq!(d.to_matrix(&f), generic);
        assert_eq!(d.trace(), generic.trace());
        assert_eq!(d.trace(), BigRational::new(25.into(), 32.into()));
        let t3 = f.operator(3);
        assert_eq!(d.trace_with(&[t3]), BigRational::new(5.into(), 16.into()));
        assert_eq!(d.trace_with(&[t3]), t3.to_rat().mul(&generic).trace());
    }

    #[test]
    fn expected_values() {
        assert_eq!(expected_trace_d(5), BigRational::new(75.into(), 96.into()));
        assert_eq!(expected_trace_txd(7), BigRational::new(7.into(), 36.into()));
    }
}
