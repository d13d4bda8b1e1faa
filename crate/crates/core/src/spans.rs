//! Correspondences between affine constructible sets over F_q and their
//! point-counting matrices over F_{q^n}.

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{seq::SliceRandom, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{check_budget, Error, Result};
use crate::exactlin::{exp_sum_decompose, holdout_check, table_recurrences_rat, ExpSumDecomposition, Holdout, IntMatrix, TableRecurrences};
use crate::exactlin::recurrence::berlekamp_massey;
use crate::ff::{extend_field, make_field_of_order, Field, FieldDesc};
use crate::hecke::HeckeFamily;
use crate::report::Check;

/// Candidate tuples allowed in one enumeration, unless overridden.
pub const POINT_BUDGET: u128 = 10_000_000;

static POINT_BUDGET_OVERRIDE: AtomicU64 = AtomicU64::new(0);

/// Process-wide override of the enumeration budget; 0 restores the default.
pub fn set_point_budget(n: u64) {
    POINT_BUDGET_OVERRIDE.store(n, Ordering::Relaxed);
}

pub fn point_budget() -> u128 {
    match POINT_BUDGET_OVERRIDE.load(Ordering::Relaxed) {
        0 => POINT_BUDGET,
        n => n as u128,
    }
}

// ------------------------------------------------------------ polynomials

/// Polynomial over F_q with coefficients stored as field indices. The same
/// indices are valid in every F_{q^n} built over F_q.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, u32>,
}

impl MPoly {
    pub fn zero(nvars: usize) -> Self {
        MPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(f: &FieldDesc, c: u32, nvars: usize) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(f, vec![0; nvars], c);
        p
    }

    pub fn var(f: &Field, i: usize, nvars: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(f, e, f.one().index());
        p
    }

    /// Σ c·x^e from (integer coefficient, exponents) pairs; integers are taken mod p.
    pub fn from_terms(f: &Field, nvars: usize, terms: &[(i64, Vec<u32>)]) -> Result<Self> {
        let mut p = Self::zero(nvars);
        for (c, e) in terms {
            if e.len() != nvars {
                return Err(Error::Dimension(format!("term has {} exponents, expected {nvars}", e.len())));
            }
            p.add_term(f, e.clone(), f.from_int(*c).index());
        }
        Ok(p)
    }

    fn add_term(&mut self, f: &FieldDesc, e: Vec<u32>, c: u32) {
        let v = self.terms.get(&e).map_or(c, |&old| f.add(old, c));
        if v == 0 {
            self.terms.remove(&e);
        } else {
            self.terms.insert(e, v);
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, u32)> {
        self.terms.iter().map(|(e, &c)| (e, c))
    }

    pub fn add(&self, f: &FieldDesc, o: &MPoly) -> MPoly {
        let mut r = self.clone();
        for (e, &c) in &o.terms {
            r.add_term(f, e.clone(), c);
        }
        r
    }

    pub fn neg(&self, f: &FieldDesc) -> MPoly {
        MPoly { nvars: self.nvars, terms: self.terms.iter().map(|(e, &c)| (e.clone(), f.neg(c))).collect() }
    }

    pub fn sub(&self, f: &FieldDesc, o: &MPoly) -> MPoly {
        self.add(f, &o.neg(f))
    }

    pub fn mul(&self, f: &FieldDesc, o: &MPoly) -> MPoly {
        let mut r = MPoly::zero(self.nvars);
        for (e1, &c1) in &self.terms {
            for (e2, &c2) in &o.terms {
                let e = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                r.add_term(f, e, f.mul(c1, c2));
            }
        }
        r
    }

    pub fn pow(&self, f: &Field, k: u32) -> MPoly {
        let mut r = MPoly::constant(f, f.one().index(), self.nvars);
        for _ in 0..k {
            r = r.mul(f, self);
        }
        r
    }

    /// Re-index into `nvars` variables, variable i becoming i + offset.
    pub fn shift(&self, offset: usize, nvars: usize) -> MPoly {
        let terms = self
            .terms
            .iter()
            .map(|(e, &c)| {
                let mut ne = vec![0; nvars];
                ne[offset..offset + e.len()].copy_from_slice(e);
                (ne, c)
            })
            .collect();
        MPoly { nvars, terms }
    }

    /// Value at a point of F_{q^n}^nvars, `ext` being a field built over F_q.
    pub fn eval(&self, ext: &FieldDesc, pt: &[u32]) -> u32 {
        let mut s = 0;
        for (e, &c) in &self.terms {
            let mut v = c;
            for (&x, &k) in pt.iter().zip(e) {
                if k > 0 {
                    v = ext.mul(v, ext.pow(x, k as i64).expect("positive exponent"));
                }
            }
            s = ext.add(s, v);
        }
        s
    }
}

// ------------------------------------------------------- constructible sets

#[derive(Clone, Debug)]
pub struct ConstructibleSet {
    pub field: Field,
    pub vars: Vec<String>,
    pub equations: Vec<MPoly>,
    pub inequations: Vec<MPoly>,
}

/// Points of a set over one extension, in enumeration order.
#[derive(Clone, Debug)]
pub struct PointSet {
    pub field: Field,
    pub points: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
}

impl PointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn index_of(&self, p: &[u32]) -> Option<usize> {
        self.index.get(p).copied()
    }
}

impl ConstructibleSet {
    pub fn affine(field: &Field, k: usize) -> Self {
        ConstructibleSet {
            field: field.clone(),
            vars: (0..k).map(|i| format!("x{i}")).collect(),
            equations: Vec::new(),
            inequations: Vec::new(),
        }
    }

    pub fn point(field: &Field) -> Self {
        Self::affine(field, 0)
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn with_equation(mut self, p: MPoly) -> Result<Self> {
        self.check_arity(&p)?;
        self.equations.push(p);
        Ok(self)
    }

    pub fn with_inequation(mut self, p: MPoly) -> Result<Self> {
        self.check_arity(&p)?;
        self.inequations.push(p);
        Ok(self)
    }

    fn check_arity(&self, p: &MPoly) -> Result<()> {
        if p.nvars() != self.nvars() {
            return Err(Error::Dimension(format!("polynomial in {} variables on a set with {}", p.nvars(), self.nvars())));
        }
        Ok(())
    }

    /// Same field, arity and defining polynomials; variable names are ignored.
    pub fn same_shape(&self, o: &ConstructibleSet) -> bool {
        *self.field == *o.field
            && self.nvars() == o.nvars()
            && self.equations == o.equations
            && self.inequations == o.inequations
    }

    pub fn product(&self, o: &ConstructibleSet) -> ConstructibleSet {
        let n = self.nvars() + o.nvars();
        let mut vars = self.vars.clone();
        vars.extend(o.vars.iter().map(|v| format!("{v}'")));
        let sh = |ps: &[MPoly], off: usize| ps.iter().map(|p| p.shift(off, n)).collect::<Vec<_>>();
        let mut equations = sh(&self.equations, 0);
        equations.extend(sh(&o.equations, self.nvars()));
        let mut inequations = sh(&self.inequations, 0);
        inequations.extend(sh(&o.inequations, self.nvars()));
        ConstructibleSet { field: self.field.clone(), vars, equations, inequations }
    }

    pub fn contains(&self, ext: &FieldDesc, p: &[u32]) -> bool {
        self.equations.iter().all(|e| e.eval(ext, p) == 0) && self.inequations.iter().all(|e| e.eval(ext, p) != 0)
    }

    /// All points over F_{q^n}.
    pub fn points(&self, n: u32) -> Result<PointSet> {
        let ext = extend_field(&self.field, n)?;
        self.points_in(&ext)
    }

    pub fn points_in(&self, ext: &Field) -> Result<PointSet> {
        let size = ext.size() as u128;
        let k = self.nvars() as u32;
        check_budget("point enumeration", size.saturating_pow(k), point_budget())?;
        let mut points = Vec::new();
        let mut cur = vec![0u32; k as usize];
        loop {
            if self.contains(ext, &cur) {
                points.push(cur.clone());
            }
            // odometer, last coordinate fastest
            let mut i = k as usize;
            loop {
                if i == 0 {
                    let index = points.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
                    return Ok(PointSet { field: ext.clone(), points, index });
                }
                i -= 1;
                cur[i] += 1;
                if cur[i] < ext.size() {
                    break;
                }
                cur[i] = 0;
            }
        }
    }
}

/// Points of a set over F_{q^n}.
pub fn points(s: &ConstructibleSet, n: u32) -> Result<Vec<Vec<u32>>> {
    Ok(s.points(n)?.points)
}

// ------------------------------------------------------------ correspondences

/// [A → X × Y] with integer weight.
#[derive(Clone, Debug)]
pub struct Span {
    pub source: ConstructibleSet,
    pub target: ConstructibleSet,
    pub apex: ConstructibleSet,
    pub to_source: Vec<MPoly>,
    pub to_target: Vec<MPoly>,
    pub weight: i64,
}

impl Span {
    pub fn new(
        source: ConstructibleSet,
        target: ConstructibleSet,
        apex: ConstructibleSet,
        to_source: Vec<MPoly>,
        to_target: Vec<MPoly>,
        weight: i64,
    ) -> Result<Self> {
        if to_source.len() != source.nvars() || to_target.len() != target.nvars() {
            return Err(Error::Dimension("projection lengths must match source and target arity".into()));
        }
        if to_source.iter().chain(&to_target).any(|p| p.nvars() != apex.nvars()) {
            return Err(Error::Dimension("projections must be polynomials in the apex variables".into()));
        }
        Ok(Span { source, target, apex, to_source, to_target, weight })
    }

    /// Adds to the apex the conditions that the projections land in source and target.
    pub fn closed(mut self) -> Self {
        let f = self.apex.field.clone();
        let pull = |p: &MPoly, maps: &[MPoly]| substitute(&f, p, maps, self.apex.nvars());
        let mut eqs: Vec<MPoly> = self.source.equations.iter().map(|p| pull(p, &self.to_source)).collect();
        eqs.extend(self.target.equations.iter().map(|p| pull(p, &self.to_target)));
        let mut ineqs: Vec<MPoly> = self.source.inequations.iter().map(|p| pull(p, &self.to_source)).collect();
        ineqs.extend(self.target.inequations.iter().map(|p| pull(p, &self.to_target)));
        self.apex.equations.extend(eqs.into_iter().filter(|p| !p.is_zero()));
        self.apex.inequations.extend(ineqs);
        self
    }
}

/// p(maps_1, …, maps_k) as a polynomial in `nvars` variables.
pub fn substitute(f: &Field, p: &MPoly, maps: &[MPoly], nvars: usize) -> MPoly {
    let mut r = MPoly::zero(nvars);
    for (e, c) in p.terms() {
        let mut t = MPoly::constant(f, c, nvars);
        for (m, &k) in maps.iter().zip(e) {
            t = t.mul(f, &m.pow(f, k));
        }
        r = r.add(f, &t);
    }
    r
}

#[derive(Clone, Debug)]
pub struct Correspondence {
    pub source: ConstructibleSet,
    pub target: ConstructibleSet,
    pub spans: Vec<Span>,
}

impl Correspondence {
    pub fn new(source: ConstructibleSet, target: ConstructibleSet, spans: Vec<Span>) -> Result<Self> {
        for s in &spans {
            if !s.source.same_shape(&source) || !s.target.same_shape(&target) {
                return Err(Error::Invalid("every span must share the correspondence signature".into()));
            }
        }
        Ok(Correspondence { source, target, spans })
    }

    pub fn single(span: Span) -> Self {
        Correspondence { source: span.source.clone(), target: span.target.clone(), spans: vec![span] }
    }

    pub fn scaled(&self, w: i64) -> Self {
        let mut c = self.clone();
        for s in &mut c.spans {
            s.weight *= w;
        }
        c
    }

    pub fn plus(&self, o: &Correspondence) -> Result<Self> {
        let mut spans = self.spans.clone();
        spans.extend(o.spans.iter().cloned());
        Correspondence::new(self.source.clone(), self.target.clone(), spans)
    }
}

fn vars_as_maps(f: &Field, k: usize, offset: usize, nvars: usize) -> Vec<MPoly> {
    (0..k).map(|i| MPoly::var(f, offset + i, nvars)).collect()
}

/// The graph of a polynomial map X → Y.
pub fn graph(x: &ConstructibleSet, y: &ConstructibleSet, map: Vec<MPoly>) -> Result<Correspondence> {
    let f = &x.field;
    let id = vars_as_maps(f, x.nvars(), 0, x.nvars());
    Ok(Correspondence::single(Span::new(x.clone(), y.clone(), x.clone(), id, map, 1)?.closed()))
}

/// The diagonal X ↪ X × X.
pub fn identity(x: &ConstructibleSet) -> Correspondence {
    let id = vars_as_maps(&x.field, x.nvars(), 0, x.nvars());
    Correspondence::single(Span::new(x.clone(), x.clone(), x.clone(), id.clone(), id, 1).expect("diagonal"))
}

/// Graph of the coordinatewise q-th power.
pub fn frobenius_graph(x: &ConstructibleSet) -> Correspondence {
    let f = &x.field;
    let q = f.size();
    let k = x.nvars();
    let id = vars_as_maps(f, k, 0, k);
    let fr = id.iter().map(|v| v.pow(f, q)).collect();
    Correspondence::single(Span::new(x.clone(), x.clone(), x.clone(), id, fr, 1).expect("frobenius"))
}

/// δ_X : X ⊗ X → 1 from the diagonal.
pub fn duality_delta(x: &ConstructibleSet) -> Correspondence {
    let f = &x.field;
    let k = x.nvars();
    let mut to_source = vars_as_maps(f, k, 0, k);
    to_source.extend(vars_as_maps(f, k, 0, k));
    Correspondence::single(
        Span::new(x.product(x), ConstructibleSet::point(f), x.clone(), to_source, Vec::new(), 1).expect("delta"),
    )
}

/// ε_X : 1 → X ⊗ X from the diagonal.
pub fn duality_epsilon(x: &ConstructibleSet) -> Correspondence {
    let f = &x.field;
    let k = x.nvars();
    let mut to_target = vars_as_maps(f, k, 0, k);
    to_target.extend(vars_as_maps(f, k, 0, k));
    Correspondence::single(
        Span::new(ConstructibleSet::point(f), x.product(x), x.clone(), Vec::new(), to_target, 1).expect("epsilon"),
    )
}

/// c1 ⊗ c2 on products.
pub fn tensor(c1: &Correspondence, c2: &Correspondence) -> Correspondence {
    let mut spans = Vec::new();
    for a in &c1.spans {
        for b in &c2.spans {
            let nv = a.apex.nvars() + b.apex.nvars();
            let sh = |ps: &[MPoly], off: usize| ps.iter().map(|p| p.shift(off, nv)).collect::<Vec<_>>();
            let mut to_source = sh(&a.to_source, 0);
            to_source.extend(sh(&b.to_source, a.apex.nvars()));
            let mut to_target = sh(&a.to_target, 0);
            to_target.extend(sh(&b.to_target, a.apex.nvars()));
            spans.push(Span {
                source: a.source.product(&b.source),
                target: a.target.product(&b.target),
                apex: a.apex.product(&b.apex),
                to_source,
                to_target,
                weight: a.weight * b.weight,
            });
        }
    }
    Correspondence {
        source: c1.source.product(&c2.source),
        target: c1.target.product(&c2.target),
        spans,
    }
}

/// c2 ∘ c1 : X → Z through the fibered product A ×_Y B.
pub fn compose(c1: &Correspondence, c2: &Correspondence) -> Result<Correspondence> {
    if !c1.target.same_shape(&c2.source) {
        return Err(Error::Invalid("middle objects of the composition differ".into()));
    }
    let f = c1.source.field.clone();
    let mut spans = Vec::new();
    for a in &c1.spans {
        for b in &c2.spans {
            let (na, nb) = (a.apex.nvars(), b.apex.nvars());
            let nv = na + nb;
            let mut apex = a.apex.product(&b.apex);
            for (p, r) in a.to_target.iter().zip(&b.to_source) {
                let e = p.shift(0, nv).sub(&f, &r.shift(na, nv));
                if !e.is_zero() {
                    apex.equations.push(e);
                }
            }
            spans.push(Span {
                source: c1.source.clone(),
                target: c2.target.clone(),
                apex,
                to_source: a.to_source.iter().map(|p| p.shift(0, nv)).collect(),
                to_target: b.to_target.iter().map(|p| p.shift(na, nv)).collect(),
                weight: a.weight * b.weight,
            });
        }
    }
    Ok(Correspondence { source: c1.source.clone(), target: c2.target.clone(), spans })
}

/// Matrix with rows indexed by X(F_{q^n}), columns by Y(F_{q^n}); entry (x,y)
/// sums weight · #{a ↦ (x,y)} over the spans.
pub fn phi_n(c: &Correspondence, n: u32) -> Result<IntMatrix> {
    let ext = extend_field(&c.source.field, n)?;
    let xs = c.source.points_in(&ext)?;
    let ys = c.target.points_in(&ext)?;
    phi_with(c, &ext, &xs, &ys)
}

fn phi_with(c: &Correspondence, ext: &Field, xs: &PointSet, ys: &PointSet) -> Result<IntMatrix> {
    let mut m = IntMatrix::zeros(xs.len(), ys.len());
    for s in &c.spans {
        for a in s.apex.points_in(ext)?.points {
            let (i, j) = project(s, ext, &a, xs, ys)?;
            m.add_at(i, j, s.weight);
        }
    }
    Ok(m)
}

fn project(s: &Span, ext: &FieldDesc, a: &[u32], xs: &PointSet, ys: &PointSet) -> Result<(usize, usize)> {
    let x: Vec<u32> = s.to_source.iter().map(|p| p.eval(ext, a)).collect();
    let y: Vec<u32> = s.to_target.iter().map(|p| p.eval(ext, a)).collect();
    let i = xs.index_of(&x).ok_or_else(|| Error::Invalid(format!("apex point {a:?} projects outside the source")))?;
    let j = ys.index_of(&y).ok_or_else(|| Error::Invalid(format!("apex point {a:?} projects outside the target")))?;
    Ok((i, j))
}

/// φ_n applied to a map pt → S: the vector of fiber counts over S(F_{q^n}).
pub fn fiber_counts(c: &Correspondence, n: u32) -> Result<Vec<i64>> {
    let m = phi_n(c, n)?;
    if m.rows() != 1 {
        return Err(Error::Invalid("expected a correspondence out of the point".into()));
    }
    Ok(m.row(0).to_vec())
}

// ---------------------------------------------------------------- traces

struct SparseRows(Vec<Vec<(usize, i64)>>);

impl SparseRows {
    fn from(m: &IntMatrix) -> Self {
        SparseRows(
            (0..m.rows())
                .map(|i| m.row(i).iter().enumerate().filter(|(_, v)| **v != 0).map(|(j, &v)| (j, v)).collect())
                .collect(),
        )
    }

    fn apply(&self, v: &[BigInt]) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); v.len()];
        for (i, vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            for &(j, w) in &self.0[i] {
                out[j] += vi * w;
            }
        }
        out
    }
}

/// Trace of the product of the given matrix powers, as an exact integer.
fn trace_of_word(word: &[(&IntMatrix, u32)]) -> BigInt {
    let n = word.first().map_or(0, |(m, _)| m.rows());
    let sparse: Vec<(SparseRows, u32)> = word.iter().map(|(m, k)| (SparseRows::from(m), *k)).collect();
    let mut tr = BigInt::zero();
    for x in 0..n {
        let mut v = vec![BigInt::zero(); n];
        v[x] = BigInt::one();
        for (s, k) in &sparse {
            for _ in 0..*k {
                v = s.apply(&v);
            }
        }
        tr += &v[x];
    }
    tr
}

/// Trace(M^m) for m = 1..=m_max.
pub fn power_traces(m: &IntMatrix, m_max: u32) -> Vec<BigInt> {
    let s = SparseRows::from(m);
    let n = m.rows();
    let mut out = vec![BigInt::zero(); m_max as usize];
    for x in 0..n {
        let mut v = vec![BigInt::zero(); n];
        v[x] = BigInt::one();
        for slot in out.iter_mut() {
            v = s.apply(&v);
            *slot += &v[x];
        }
    }
    out
}

fn require_endo(c: &Correspondence) -> Result<()> {
    if !c.source.same_shape(&c.target) {
        return Err(Error::Invalid("an endomorphism is required".into()));
    }
    Ok(())
}

/// Z_M(n,m) = Trace(φ_n(M)^m), 1 ≤ n ≤ n_max, 1 ≤ m ≤ m_max.
#[derive(Debug, Clone, Serialize)]
pub struct ZTable {
    pub n_max: u32,
    pub m_max: u32,
    #[serde(serialize_with = "ser_table")]
    pub values: Vec<Vec<BigInt>>,
}

fn ser_table<S: serde::Serializer>(v: &[Vec<BigInt>], s: S) -> std::result::Result<S::Ok, S::Error> {
    let t: Vec<Vec<String>> = v.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect();
    t.serialize(s)
}

impl ZTable {
    pub fn get(&self, n: u32, m: u32) -> &BigInt {
        &self.values[n as usize - 1][m as usize - 1]
    }

    /// Fixed n, varying m.
    pub fn row(&self, n: u32) -> Vec<BigInt> {
        self.values[n as usize - 1].clone()
    }

    /// Fixed m, varying n.
    pub fn column(&self, m: u32) -> Vec<BigInt> {
        self.values.iter().map(|r| r[m as usize - 1].clone()).collect()
    }
}

pub fn z_table(mcorr: &Correspondence, n_max: u32, m_max: u32) -> Result<ZTable> {
    require_endo(mcorr)?;
    let mut values = Vec::new();
    for n in 1..=n_max {
        values.push(power_traces(&phi_n(mcorr, n)?, m_max));
    }
    Ok(ZTable { n_max, m_max, values })
}

/// Points of the cyclic fibered power Ỹ^(m), counted by walking chains
/// (y_1, …, y_m) with π_2(y_i) = π_1(y_{i+1}) and π_2(y_m) = π_1(y_1).
pub fn z_fibered_oracle(mcorr: &Correspondence, n: u32, m: u32) -> Result<BigInt> {
    require_endo(mcorr)?;
    if mcorr.spans.len() != 1 {
        return Err(Error::Invalid("the fibered oracle needs a single span".into()));
    }
    if m == 0 {
        return Err(Error::Invalid("m must be at least 1".into()));
    }
    let s = &mcorr.spans[0];
    let ext = extend_field(&s.apex.field, n)?;
    let apex = s.apex.points_in(&ext)?;
    let ends: Vec<(Vec<u32>, Vec<u32>)> = apex
        .points
        .iter()
        .map(|a| {
            (
                s.to_source.iter().map(|p| p.eval(&ext, a)).collect(),
                s.to_target.iter().map(|p| p.eval(&ext, a)).collect(),
            )
        })
        .collect();
    // apex points grouped by their source value
    let mut by_source: HashMap<&[u32], Vec<usize>> = HashMap::new();
    for (j, e) in ends.iter().enumerate() {
        by_source.entry(&e.0).or_default().push(j);
    }
    check_budget(
        "fibered power",
        (by_source.len() as u128).saturating_mul(ends.len() as u128).saturating_mul(m as u128),
        point_budget(),
    )?;
    // For a fixed source value s of the first point, chains(y, l) counts
    // continuations of length l from target value y that close up at s.
    let mut count = 0u64;
    for (&s0, starts) in &by_source {
        let mut memo: HashMap<(&[u32], u32), u64> = HashMap::new();
        fn chains<'a>(
            ends: &'a [(Vec<u32>, Vec<u32>)],
            by_source: &HashMap<&'a [u32], Vec<usize>>,
            s0: &[u32],
            y: &'a [u32],
            left: u32,
            memo: &mut HashMap<(&'a [u32], u32), u64>,
        ) -> u64 {
            if left == 0 {
                return (y == s0) as u64;
            }
            if let Some(&v) = memo.get(&(y, left)) {
                return v;
            }
            let v = match by_source.get(y) {
                Some(next) => next.iter().map(|&j| chains(ends, by_source, s0, &ends[j].1, left - 1, memo)).sum(),
                None => 0,
            };
            memo.insert((y, left), v);
            v
        }
        for &i in starts {
            count += chains(&ends, &by_source, s0, &ends[i].1, m - 1, &mut memo);
        }
    }
    Ok(BigInt::from(count) * BigInt::from(s.weight).pow(m))
}

// --------------------------------------------------------------- sublattices

/// Λ_{n,m,k} = Z·(n,0) ⊕ Z·(k,m).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sublattice2 {
    pub n: u64,
    pub m: u64,
    pub k: u64,
}

impl Sublattice2 {
    pub fn new(n: u64, m: u64, k: u64) -> Result<Self> {
        if n == 0 || m == 0 || k >= n {
            return Err(Error::Invalid(format!("need n, m ≥ 1 and 0 ≤ k < n, got ({n},{m},{k})")));
        }
        Ok(Sublattice2 { n, m, k })
    }

    pub fn index(&self) -> u64 {
        self.n * self.m
    }

    /// Normal form of the lattice spanned by two independent vectors.
    pub fn spanned_by(v1: (i64, i64), v2: (i64, i64)) -> Result<Self> {
        let det = v1.0 as i128 * v2.1 as i128 - v1.1 as i128 * v2.0 as i128;
        if det == 0 {
            return Err(Error::Invalid("vectors are linearly dependent".into()));
        }
        let (b, d) = (v1.1 as i128, v2.1 as i128);
        let g = b.extended_gcd(&d);
        let m = g.gcd.abs();
        let sign = g.gcd.signum();
        // u·v1 + v·v2 has second coordinate m
        let (u, v) = (g.x * sign, g.y * sign);
        let w0 = u * v1.0 as i128 + v * v2.0 as i128;
        let n = det.abs() / m;
        let k = w0.rem_euclid(n);
        Sublattice2::new(n as u64, m as u64, k as u64)
    }
}

/// Trace(φ_n(M)^m φ_n(Fr)^k).
pub fn z_lattice(mcorr: &Correspondence, lat: Sublattice2) -> Result<BigInt> {
    require_endo(mcorr)?;
    let n = lat.n as u32;
    let m = phi_n(mcorr, n)?;
    let fr = phi_n(&frobenius_graph(&mcorr.source), n)?;
    Ok(trace_of_word(&[(&m, lat.m as u32), (&fr, lat.k as u32)]))
}

#[derive(Debug, Clone, Serialize)]
pub struct RayReport {
    pub gamma1: (i64, i64),
    pub gamma2: (i64, i64),
    pub lattices: Vec<Sublattice2>,
    pub sequence: Vec<String>,
    pub holdout: Holdout,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expsum: Option<ExpSumDecomposition>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expsum_error: Option<String>,
    pub checks: Vec<Check>,
}

/// Z_M(Z·γ1 ⊕ Z·jγ2) for j = 1..=n_max, with a recurrence fitted on all
/// but the last term.
pub fn ray_rationality(mcorr: &Correspondence, g1: (i64, i64), g2: (i64, i64), n_max: u32) -> Result<RayReport> {
    let mut lattices = Vec::new();
    let mut seq = Vec::new();
    for j in 1..=n_max as i64 {
        let lat = Sublattice2::spanned_by(g1, (j * g2.0, j * g2.1))?;
        seq.push(BigRational::from_integer(z_lattice(mcorr, lat)?));
        lattices.push(lat);
    }
    let holdout = holdout_check(&seq, 1);
    let (mut expsum, mut expsum_error) = (None, None);
    if let Some(r) = berlekamp_massey(&seq).recurrence() {
        match exp_sum_decompose(r, &seq) {
            Ok(d) => expsum = Some(d),
            Err(e) => expsum_error = Some(e.to_string()),
        }
    }
    let check = match holdout.matches {
        Some(ok) => Check::from_outcome("ray-withheld-prediction", ok, Some(json!(holdout))),
        None => Check::report("ray-withheld-prediction", json!(holdout)).with_detail("sequence too short to fit"),
    };
    Ok(RayReport {
        gamma1: g1,
        gamma2: g2,
        lattices,
        sequence: seq.iter().map(|v| v.to_string()).collect(),
        holdout,
        expsum,
        expsum_error,
        checks: vec![check],
    })
}

/// Recurrence with one withheld term along every row (fixed n) and column (fixed m).
pub fn table_recurrences(values: &[Vec<BigInt>]) -> TableRecurrences {
    let q: Vec<Vec<BigRational>> =
        values.iter().map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect()).collect();
    table_recurrences_rat(&q)
}

#[derive(Debug, Clone, Serialize)]
pub struct ObservationReport {
    /// row n: Trace(φ_n^m) for m = 1..2·dim φ_n + 2
    pub rows: Vec<Holdout>,
    /// column m: Z(n, m) for n = 1..n_max
    pub columns: Vec<Holdout>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column_order_bound: Option<usize>,
    pub checks: Vec<Check>,
}

/// Rows are extended far enough that the minimal recurrence of Trace(φ_n^m)
/// is forced. Columns have no intrinsic order bound; with a caller-supplied
/// bound B they are asserted when n_max ≥ 2B + 1, otherwise only reported.
pub fn observation_check(
    mcorr: &Correspondence,
    n_max: u32,
    m_max: u32,
    column_order_bound: Option<usize>,
) -> Result<ObservationReport> {
    require_endo(mcorr)?;
    let mut rows = Vec::new();
    for n in 1..=n_max {
        let phi = phi_n(mcorr, n)?;
        let len = (2 * phi.rows() + 2).max(m_max as usize) as u32;
        let seq: Vec<BigRational> = power_traces(&phi, len).into_iter().map(BigRational::from_integer).collect();
        rows.push(holdout_check(&seq, 1));
    }
    let table = z_table(mcorr, n_max, m_max)?;
    let columns: Vec<Holdout> = (1..=m_max)
        .map(|m| {
            let seq: Vec<BigRational> = table.column(m).into_iter().map(BigRational::from_integer).collect();
            holdout_check(&seq, 1)
        })
        .collect();
    let bad_rows: Vec<_> = rows
        .iter()
        .enumerate()
        .filter(|(_, h)| h.matches != Some(true))
        .map(|(i, h)| json!({"n": i + 1, "holdout": h}))
        .collect();
    let mut checks = vec![Check::from_outcome("rows-exponential-sums", bad_rows.is_empty(), Some(json!(bad_rows)))];
    let fits: Vec<_> = columns.iter().map(|h| h.recurrence.as_ref().map(|r| r.order)).collect();
    match column_order_bound {
        Some(b) if n_max as usize > 2 * b => {
            let bad: Vec<_> = columns
                .iter()
                .enumerate()
                .filter(|(_, h)| h.matches != Some(true) || h.recurrence.as_ref().is_some_and(|r| r.order > b))
                .map(|(i, h)| json!({"m": i + 1, "holdout": h}))
                .collect();
            checks.push(Check::from_outcome("columns-exponential-sums", bad.is_empty(), Some(json!(bad))));
        }
        _ => checks.push(
            Check::report("columns-exponential-sums", json!({"fitted_orders": fits}))
                .with_detail("no order bound covering the column length; fits reported only"),
        ),
    }
    Ok(ObservationReport { rows, columns, column_order_bound, checks })
}

// ------------------------------------------------------------------ Radon

#[derive(Debug, Clone, Serialize)]
pub struct RadonReport {
    pub q: u64,
    pub points: usize,
    pub lines: usize,
    pub identity_holds: bool,
    pub diagonal: Vec<i64>,
    pub checks: Vec<Check>,
}

/// Normalized representatives of P²(F_q): last nonzero coordinate 1.
pub fn projective_plane_points(f: &Field) -> Vec<[u32; 3]> {
    let one = f.one().index();
    let q = f.size();
    let mut pts = Vec::new();
    for a in 0..q {
        for b in 0..q {
            pts.push([a, b, one]);
        }
    }
    for a in 0..q {
        pts.push([a, one, 0]);
    }
    pts.push([one, 0, 0]);
    pts
}

/// Point-line incidence of P²(F_q) satisfies M·Mᵀ = q·I + J.
pub fn radon_check(q: u64) -> Result<RadonReport> {
    let f = make_field_of_order(q)?;
    let pts = projective_plane_points(&f);
    let lines = pts.clone();
    let mut m = IntMatrix::zeros(pts.len(), lines.len());
    for (i, p) in pts.iter().enumerate() {
        for (j, l) in lines.iter().enumerate() {
            let dot = (0..3).fold(0, |s, k| f.add(s, f.mul(p[k], l[k])));
            if dot == 0 {
                m.set(i, j, 1);
            }
        }
    }
    let mmt = m.mul(&m.transpose());
    let mut expected = IntMatrix::zeros(pts.len(), pts.len());
    for i in 0..pts.len() {
        for j in 0..pts.len() {
            expected.set(i, j, 1 + if i == j { q as i64 } else { 0 });
        }
    }
    let ok = mmt == expected;
    let witness = mmt.first_difference(&expected).map(|(i, j, a, b)| json!({"row": i, "col": j, "got": a, "expected": b}));
    let diagonal: Vec<i64> = (0..pts.len()).map(|i| mmt.get(i, i)).collect();
    let diag_ok = diagonal.iter().all(|&d| d == q as i64 + 1);
    Ok(RadonReport {
        q,
        points: pts.len(),
        lines: lines.len(),
        identity_holds: ok,
        checks: vec![
            Check::from_outcome("radon-mmt", ok, witness),
            Check::from_outcome("radon-lines-through-point", diag_ok, None),
        ],
        diagonal,
    })
}

// --------------------------------------------------------------- algebras

/// Structure constants c_{xyz} with e_x e_y = Σ_z c_{xyz} e_z.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureTensor {
    pub size: usize,
    data: Vec<i64>,
}

impl StructureTensor {
    pub fn zeros(size: usize) -> Self {
        StructureTensor { size, data: vec![0; size * size * size] }
    }

    pub fn get(&self, x: usize, y: usize, z: usize) -> i64 {
        self.data[(x * self.size + y) * self.size + z]
    }

    pub fn set(&mut self, x: usize, y: usize, z: usize, v: i64) {
        let s = self.size;
        self.data[(x * s + y) * s + z] = v;
    }

    /// Coefficients of e_x e_y.
    fn product(&self, x: usize, y: usize) -> &[i64] {
        let s = self.size;
        &self.data[(x * s + y) * s..(x * s + y + 1) * s]
    }

    /// (a·b) for coordinate vectors.
    fn mul_vec(&self, a: &[i128], b: &[i128]) -> Vec<i128> {
        let s = self.size;
        let mut out = vec![0i128; s];
        for x in 0..s {
            if a[x] == 0 {
                continue;
            }
            for y in 0..s {
                let w = a[x] * b[y];
                if w == 0 {
                    continue;
                }
                for (z, &c) in self.product(x, y).iter().enumerate() {
                    out[z] += w * c as i128;
                }
            }
        }
        out
    }
}

/// c_{xyz} = (T_x)_{yz} over the whole field.
pub fn hecke_structure_tensor(fam: &HeckeFamily) -> StructureTensor {
    let s = fam.params().size() as usize;
    let mut c = StructureTensor::zeros(s);
    for x in 0..s {
        let t = fam.operator(x as u32);
        for y in 0..s {
            for z in 0..s {
                c.set(x, y, z, t.get(y, z));
            }
        }
    }
    c
}

/// Multiplication X ⊗ X → X read off φ_n, rows being points of X × X.
pub fn structure_tensor_from_span(mult: &Correspondence, n: u32) -> Result<(StructureTensor, PointSet)> {
    let x = &mult.target;
    if !mult.source.same_shape(&x.product(x)) {
        return Err(Error::Invalid("multiplication must be a correspondence X ⊗ X → X".into()));
    }
    let ext = extend_field(&x.field, n)?;
    let xs = x.points_in(&ext)?;
    let pairs = mult.source.points_in(&ext)?;
    let m = phi_with(mult, &ext, &pairs, &xs)?;
    let k = x.nvars();
    let mut c = StructureTensor::zeros(xs.len());
    for (r, p) in pairs.points.iter().enumerate() {
        let a = xs.index_of(&p[..k]).expect("first factor lies in X");
        let b = xs.index_of(&p[k..]).expect("second factor lies in X");
        for z in 0..xs.len() {
            c.set(a, b, z, m.get(r, z));
        }
    }
    Ok((c, xs))
}

#[derive(Debug, Clone, Serialize)]
pub struct AlgebraReport {
    pub size: usize,
    /// "exact" or "randomized"
    pub method: String,
    pub commutative: bool,
    pub associative: bool,
    pub unital: bool,
    pub checks: Vec<Check>,
}

/// Above this size associativity is tested on random integer vectors.
pub const ALGEBRA_EXACT_MAX: usize = 48;

pub fn algebra_axiom_check(c: &StructureTensor, unit: &[i64], seed: u64) -> Result<AlgebraReport> {
    let s = c.size;
    if unit.len() != s {
        return Err(Error::Dimension(format!("unit has length {}, algebra has size {s}", unit.len())));
    }
    let mut comm_w = None;
    'c: for x in 0..s {
        for y in 0..x {
            for z in 0..s {
                if c.get(x, y, z) != c.get(y, x, z) {
                    comm_w = Some(json!({"x": x, "y": y, "z": z}));
                    break 'c;
                }
            }
        }
    }
    let u: Vec<i128> = unit.iter().map(|&v| v as i128).collect();
    let mut unit_w = None;
    'u: for y in 0..s {
        let mut e = vec![0i128; s];
        e[y] = 1;
        let (l, r) = (c.mul_vec(&u, &e), c.mul_vec(&e, &u));
        for z in 0..s {
            let want = (z == y) as i128;
            if l[z] != want || r[z] != want {
                unit_w = Some(json!({"y": y, "z": z}));
                break 'u;
            }
        }
    }
    let exact = s <= ALGEBRA_EXACT_MAX;
    let mut assoc_w = None;
    if exact {
        let basis = |i: usize| {
            let mut e = vec![0i128; s];
            e[i] = 1;
            e
        };
        'a: for x in 0..s {
            for y in 0..s {
                let xy = c.mul_vec(&basis(x), &basis(y));
                for z in 0..s {
                    let lhs = c.mul_vec(&xy, &basis(z));
                    let yz = c.mul_vec(&basis(y), &basis(z));
                    let rhs = c.mul_vec(&basis(x), &yz);
                    if lhs != rhs {
                        assoc_w = Some(json!({"x": x, "y": y, "z": z}));
                        break 'a;
                    }
                }
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..4 {
            let mut rv = || (0..s).map(|_| rng.gen_range(-3i128..=3)).collect::<Vec<_>>();
            let (a, b, d) = (rv(), rv(), rv());
            if c.mul_vec(&c.mul_vec(&a, &b), &d) != c.mul_vec(&a, &c.mul_vec(&b, &d)) {
                assoc_w = Some(json!("random triple"));
                break;
            }
        }
    }
    let checks = vec![
        Check::from_outcome("algebra-commutative", comm_w.is_none(), comm_w.clone()),
        Check::from_outcome("algebra-associative", assoc_w.is_none(), assoc_w.clone()),
        Check::from_outcome("algebra-unital", unit_w.is_none(), unit_w.clone()),
    ];
    Ok(AlgebraReport {
        size: s,
        method: if exact { "exact" } else { "randomized" }.into(),
        commutative: comm_w.is_none(),
        associative: assoc_w.is_none(),
        unital: unit_w.is_none(),
        checks,
    })
}

/// Group algebra of (F_q, +) via the graph (x, y) ↦ x + y, with unit e_0.
pub fn additive_group_algebra(q: u64) -> Result<(StructureTensor, Vec<i64>)> {
    let f = make_field_of_order(q)?;
    let x = ConstructibleSet::affine(&f, 1);
    let sum = MPoly::var(&f, 0, 2).add(&f, &MPoly::var(&f, 1, 2));
    let mult = graph(&x.product(&x), &x, vec![sum])?;
    let (c, xs) = structure_tensor_from_span(&mult, 1)?;
    let mut unit = vec![0; xs.len()];
    unit[xs.index_of(&[0]).expect("zero")] = 1;
    Ok((c, unit))
}

/// Group algebra of (F_q^×, ·) on {x ≠ 0}, with unit e_1.
pub fn multiplicative_group_algebra(q: u64) -> Result<(StructureTensor, Vec<i64>)> {
    let f = make_field_of_order(q)?;
    let x = ConstructibleSet::affine(&f, 1).with_inequation(MPoly::var(&f, 0, 1))?;
    let prod = MPoly::var(&f, 0, 2).mul(&f, &MPoly::var(&f, 1, 2));
    let mult = graph(&x.product(&x), &x, vec![prod])?;
    let (c, xs) = structure_tensor_from_span(&mult, 1)?;
    let mut unit = vec![0; xs.len()];
    unit[xs.index_of(&[f.one().index()]).expect("one")] = 1;
    Ok((c, unit))
}

// ------------------------------------------------------------- checks

/// φ_n(c2 ∘ c1) = φ_n(c1)·φ_n(c2).
pub fn functoriality_check(c1: &Correspondence, c2: &Correspondence, n: u32) -> Result<bool> {
    let lhs = phi_n(&compose(c1, c2)?, n)?;
    let rhs = phi_n(c1, n)?.try_mul(&phi_n(c2, n)?)?;
    Ok(lhs == rhs)
}

/// [X→S] = [Z→S] + [(X∖Z)→S] at level n, for Z = X ∩ {g = 0}.
pub fn scissor_check(x: &ConstructibleSet, s: &ConstructibleSet, map: &[MPoly], g: &MPoly, n: u32) -> Result<bool> {
    let f = &x.field;
    let pt = ConstructibleSet::point(f);
    let class = |apex: ConstructibleSet| -> Result<Vec<i64>> {
        let c = Correspondence::single(Span::new(pt.clone(), s.clone(), apex, Vec::new(), map.to_vec(), 1)?.closed());
        fiber_counts(&c, n)
    };
    let whole = class(x.clone())?;
    let closed = class(x.clone().with_equation(g.clone())?)?;
    let open = class(x.clone().with_inequation(g.clone())?)?;
    Ok(whole.iter().zip(closed.iter().zip(&open)).all(|(w, (a, b))| *w == a + b))
}

/// Both zig-zag composites of δ_X and ε_X against φ_n(id_X).
pub fn duality_check(x: &ConstructibleSet, n: u32) -> Result<bool> {
    let id = identity(x);
    let (d, e) = (duality_delta(x), duality_epsilon(x));
    let left = compose(&tensor(&id, &e), &tensor(&d, &id))?;
    let right = compose(&tensor(&e, &id), &tensor(&id, &d))?;
    let want = phi_n(&id, n)?;
    Ok(phi_n(&left, n)? == want && phi_n(&right, n)? == want)
}

// ---------------------------------------------------------- random spans

fn random_poly(f: &Field, rng: &mut ChaCha8Rng, nvars: usize, max_deg: u32, max_terms: usize) -> MPoly {
    let mut p = MPoly::zero(nvars);
    let nt = rng.gen_range(1..=max_terms);
    for _ in 0..nt {
        let e: Vec<u32> = (0..nvars).map(|_| rng.gen_range(0..=max_deg)).collect();
        if e.iter().sum::<u32>() > max_deg {
            continue;
        }
        let c = rng.gen_range(1..f.size());
        p.add_term(f, e, c);
    }
    p
}

/// Seeded random span on affine spaces of dimension ≤ 1 with an apex of
/// dimension ≤ 2, possibly cut by one equation or inequation.
pub fn random_span(f: &Field, rng: &mut ChaCha8Rng, x_dim: usize, y_dim: usize) -> Span {
    let a_dim = rng.gen_range(1..=2);
    let mut apex = ConstructibleSet::affine(f, a_dim);
    match rng.gen_range(0..3) {
        0 => apex.equations.push(random_poly(f, rng, a_dim, 2, 2)),
        1 => apex.inequations.push(random_poly(f, rng, a_dim, 1, 2)),
        _ => {}
    }
    let to_source = (0..x_dim).map(|_| random_poly(f, rng, a_dim, 2, 2)).collect();
    let to_target = (0..y_dim).map(|_| random_poly(f, rng, a_dim, 2, 2)).collect();
    let weight = [-2, -1, 1, 2, 3][rng.gen_range(0..5)];
    Span::new(ConstructibleSet::affine(f, x_dim), ConstructibleSet::affine(f, y_dim), apex, to_source, to_target, weight)
        .expect("arity consistent by construction")
}

pub fn random_correspondence(f: &Field, rng: &mut ChaCha8Rng, x_dim: usize, y_dim: usize) -> Correspondence {
    let k = rng.gen_range(1..=2);
    let spans = (0..k).map(|_| random_span(f, rng, x_dim, y_dim)).collect();
    Correspondence::new(ConstructibleSet::affine(f, x_dim), ConstructibleSet::affine(f, y_dim), spans)
        .expect("shared signature")
}

#[derive(Debug, Clone, Serialize)]
pub struct SpanSuiteReport {
    pub q: u64,
    pub seed: u64,
    pub trials: usize,
    pub n_max: u32,
    pub m_max: u32,
    pub checks: Vec<Check>,
}

/// Functoriality, scissor additivity, duality and table-versus-oracle on
/// seeded random spans over F_q.
pub fn span_suite(q: u64, seed: u64, trials: usize, n_max: u32, m_max: u32) -> Result<SpanSuiteReport> {
    let f = make_field_of_order(q)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut func_bad, mut sc_bad, mut z_bad) = (Vec::new(), Vec::new(), Vec::new());
    for trial in 0..trials {
        let c1 = random_correspondence(&f, &mut rng, 1, 1);
        let c2 = random_correspondence(&f, &mut rng, 1, 1);
        let single = Correspondence::single(random_span(&f, &mut rng, 1, 1));
        let x = ConstructibleSet::affine(&f, 2);
        let map = vec![random_poly(&f, &mut rng, 2, 2, 2)];
        let g = random_poly(&f, &mut rng, 2, 2, 2);
        let s = ConstructibleSet::affine(&f, 1);
        for n in 1..=n_max {
            if !functoriality_check(&c1, &c2, n)? {
                func_bad.push(json!({"trial": trial, "n": n}));
            }
            if !scissor_check(&x, &s, &map, &g, n)? {
                sc_bad.push(json!({"trial": trial, "n": n}));
            }
            let tr = power_traces(&phi_n(&single, n)?, m_max);
            for m in 1..=m_max {
                let oracle = z_fibered_oracle(&single, n, m)?;
                if oracle != tr[m as usize - 1] {
                    z_bad.push(json!({"trial": trial, "n": n, "m": m, "table": tr[m as usize - 1].to_string(), "oracle": oracle.to_string()}));
                }
            }
        }
    }
    let x1 = ConstructibleSet::affine(&f, 1);
    let dual_ok = (1..=n_max.min(2)).map(|n| duality_check(&x1, n)).collect::<Result<Vec<_>>>()?.iter().all(|&b| b);
    let to_check = |name: &str, bad: Vec<serde_json::Value>| Check::from_outcome(name, bad.is_empty(), Some(json!(bad)));
    Ok(SpanSuiteReport {
        q,
        seed,
        trials,
        n_max,
        m_max,
        checks: vec![
            to_check("functoriality", func_bad),
            to_check("scissor", sc_bad),
            to_check("z-table-equals-fibered-oracle", z_bad),
            Check::from_outcome("duality-zigzag", dual_ok, None),
        ],
    })
}

// ------------------------------------------------------- curve counts over random tuples

/// f_t(a, b, y) = A y² + B y + C.
fn quadratic_in_last(f: &FieldDesc, t: u32, a: u32, b: u32) -> [u32; 3] {
    let two = f.add(1, 1);
    let four = f.add(two, two);
    let d = f.sub(a, b);
    let qa = f.mul(d, d);
    let abt = f.sub(f.mul(a, b), t);
    let s = f.add(a, b);
    let one_t = f.add(1, t);
    let qb = f.add(f.mul(two, f.mul(s, abt)), f.mul(four, f.mul(f.mul(a, b), f.sub(one_t, s))));
    let qc = f.mul(abt, abt);
    [qa, qb, qc]
}

fn disc(f: &FieldDesc, g: [u32; 3]) -> u32 {
    let four = f.add(f.add(1, 1), f.add(1, 1));
    f.sub(f.mul(g[1], g[1]), f.mul(four, f.mul(g[0], g[2])))
}

/// Res of a y² + b y + c and a' y² + b' y + c'.
fn res_quadratics(f: &FieldDesc, g: [u32; 3], h: [u32; 3]) -> u32 {
    let ac = f.sub(f.mul(g[0], h[2]), f.mul(h[0], g[2]));
    let ab = f.sub(f.mul(g[0], h[1]), f.mul(h[0], g[1]));
    let bc = f.sub(f.mul(g[1], h[2]), f.mul(h[1], g[2]));
    f.sub(f.mul(ac, ac), f.mul(ab, bc))
}

#[derive(Debug, Clone, Serialize)]
pub struct Prop1Level {
    pub level: u32,
    pub e: u64,
    pub e_tilde: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Prop1Report {
    pub q: u64,
    pub t: u32,
    pub x: [u32; 4],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degenerate: Option<String>,
    pub levels: Vec<Prop1Level>,
    /// None for degenerate inputs
    pub equal: Option<bool>,
}

/// Why (t, x1..x4) fails to give two smooth genus-1 curves, if it does.
pub fn prop1_degeneracy(f: &FieldDesc, t: u32, x: [u32; 4]) -> Option<String> {
    if t == 0 || t == 1 {
        return Some("t ∈ {0, 1}".into());
    }
    for i in 0..4 {
        for j in 0..i {
            if x[i] == x[j] {
                return Some(format!("x{} = x{}", j + 1, i + 1));
            }
        }
    }
    let systems = [
        ("E", quadratic_in_last(f, t, x[0], x[1]), quadratic_in_last(f, t, x[2], x[3])),
        ("Ẽ", quadratic_in_last(f, t, x[0], x[2]), quadratic_in_last(f, t, x[1], x[3])),
    ];
    for (name, g, h) in systems {
        if disc(f, g) == 0 || disc(f, h) == 0 {
            return Some(format!("{name}: a quadratic in y has a double root"));
        }
        if res_quadratics(f, g, h) == 0 {
            return Some(format!("{name}: the two quadratics share a root"));
        }
    }
    None
}

/// #{(y, w, w')} with f_t(a,b,y) = w², f_t(y,c,d) = w'², by enumeration.
fn count_curve(ext: &FieldDesc, sq: &[u32], t: u32, a: u32, b: u32, c: u32, d: u32) -> u64 {
    let g = quadratic_in_last(ext, t, a, b);
    let h = quadratic_in_last(ext, t, c, d);
    let ev = |p: [u32; 3], y: u32| ext.add(ext.mul(ext.add(ext.mul(p[0], y), p[1]), y), p[2]);
    (0..ext.size()).map(|y| sq[ev(g, y) as usize] as u64 * sq[ev(h, y) as usize] as u64).sum()
}

/// Affine point counts of E and Ẽ over F_q and F_{q²}; both curves have the
/// same four points over y = ∞ when the input is non-degenerate.
pub fn prop1_curve_counts(q: u64, t: u32, x: [u32; 4]) -> Result<Prop1Report> {
    let f = make_field_of_order(q)?;
    if f.p() == 2 {
        return Err(Error::EvenCharacteristic);
    }
    if t >= f.size() || x.iter().any(|&v| v >= f.size()) {
        return Err(Error::Invalid("parameters must be field indices".into()));
    }
    let degenerate = prop1_degeneracy(&f, t, x);
    let mut levels = Vec::new();
    for level in [1u32, 2] {
        let ext = extend_field(&f, level)?;
        // number of w with w² = v, by squaring every element
        let mut sq = vec![0u32; ext.size() as usize];
        for w in 0..ext.size() {
            sq[ext.mul(w, w) as usize] += 1;
        }
        let e = count_curve(&ext, &sq, t, x[0], x[1], x[2], x[3]);
        let e_tilde = count_curve(&ext, &sq, t, x[0], x[2], x[1], x[3]);
        levels.push(Prop1Level { level, e, e_tilde });
    }
    let equal = degenerate.is_none().then(|| levels.iter().all(|l| l.e == l.e_tilde));
    Ok(Prop1Report { q, t, x, degenerate, levels, equal })
}

/// Seeded random tuples: t ∉ {0, 1} and four distinct x_i ∉ {0, 1, t}.
/// Other choices make a quadratic in y degenerate.
pub fn prop1_random_tuples(q: u64, count: usize, seed: u64) -> Result<Vec<Prop1Report>> {
    let f = make_field_of_order(q)?;
    if f.size() < 7 {
        return Err(Error::Invalid(format!("F_{q} has fewer than four points outside {{0, 1, t}}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let t = rng.gen_range(2..f.size());
            let pool: Vec<u32> = (2..f.size()).filter(|&v| v != t).collect();
            let picked: Vec<u32> = pool.choose_multiple(&mut rng, 4).copied().collect();
            prop1_curve_counts(q, t, [picked[0], picked[1], picked[2], picked[3]])
        })
        .collect()
}

// ---------------------------------------------------------------- JSON

/// Coefficient given as an integer (reduced mod p) or as a raw field index.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoefJson {
    Int(i64),
    Index { index: u32 },
}

/// Terms as [coefficient, [exponents]].
pub type PolyJson = Vec<(CoefJson, Vec<u32>)>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SetJson {
    pub vars: Vec<String>,
    #[serde(default)]
    pub equations: Vec<PolyJson>,
    #[serde(default)]
    pub inequations: Vec<PolyJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpanJson {
    pub apex: SetJson,
    pub to_source: Vec<PolyJson>,
    pub to_target: Vec<PolyJson>,
    #[serde(default = "one_i64")]
    pub weight: i64,
}

fn one_i64() -> i64 {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrespondenceJson {
    pub q: u64,
    pub source: SetJson,
    pub target: SetJson,
    pub spans: Vec<SpanJson>,
}

fn poly_from_json(f: &Field, nvars: usize, p: &PolyJson) -> Result<MPoly> {
    let mut r = MPoly::zero(nvars);
    for (c, e) in p {
        if e.len() != nvars {
            return Err(Error::Dimension(format!("term has {} exponents, expected {nvars}", e.len())));
        }
        let idx = match c {
            CoefJson::Int(v) => f.from_int(*v).index(),
            CoefJson::Index { index } => {
                if *index >= f.size() {
                    return Err(Error::Invalid(format!("coefficient index {index} outside F_{}", f.size())));
                }
                *index
            }
        };
        r.add_term(f, e.clone(), idx);
    }
    Ok(r)
}

fn set_from_json(f: &Field, s: &SetJson) -> Result<ConstructibleSet> {
    let k = s.vars.len();
    Ok(ConstructibleSet {
        field: f.clone(),
        vars: s.vars.clone(),
        equations: s.equations.iter().map(|p| poly_from_json(f, k, p)).collect::<Result<_>>()?,
        inequations: s.inequations.iter().map(|p| poly_from_json(f, k, p)).collect::<Result<_>>()?,
    })
}

impl CorrespondenceJson {
    pub fn build(&self) -> Result<Correspondence> {
        let f = make_field_of_order(self.q)?;
        let source = set_from_json(&f, &self.source)?;
        let target = set_from_json(&f, &self.target)?;
        let mut spans = Vec::new();
        for s in &self.spans {
            let apex = set_from_json(&f, &s.apex)?;
            let k = apex.nvars();
            let ts = s.to_source.iter().map(|p| poly_from_json(&f, k, p)).collect::<Result<_>>()?;
            let tt = s.to_target.iter().map(|p| poly_from_json(&f, k, p)).collect::<Result<_>>()?;
            spans.push(Span::new(source.clone(), target.clone(), apex, ts, tt, s.weight)?.closed());
        }
        Correspondence::new(source, target, spans)
    }
}
