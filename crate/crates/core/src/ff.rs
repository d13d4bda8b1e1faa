//! Finite fields F_{p^e} and towers F_q ⊂ F_{q^n}.
//!
//! An element is stored as an index `Σ c_i b^i` where `b` is the size of the
//! base field and `c_i` are base-field indices. Constants therefore come first
//! and index 0 is zero. Multiplication and addition go through exp/log/Zech
//! tables built once per field.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_budget, Error, Result};

/// Largest field for which tables are built.
pub const ENUM_BUDGET: u64 = 1_000_000;
/// Largest field for which a standalone discrete-log table is handed out.
pub const DLOG_BUDGET: u64 = 100_000;

const NONE: u32 = u32::MAX;

pub type Field = Arc<FieldDesc>;

pub struct FieldDesc {
    p: u32,
    abs_degree: u32,
    degree: u32,
    size: u32,
    base: Option<Field>,
    tower: bool,
    modulus: Vec<u32>,
    exp: Vec<u32>,
    log: Vec<u32>,
    zech: Vec<u32>,
    generator: u32,
}

impl fmt::Debug for FieldDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldDesc")
            .field("p", &self.p)
            .field("size", &self.size)
            .field("degree", &self.degree)
            .field("modulus", &self.modulus)
            .field("tower", &self.tower)
            .finish()
    }
}

impl PartialEq for FieldDesc {
    fn eq(&self, other: &Self) -> bool {
        if std::ptr::eq(self, other) {
            return true;
        }
        self.p == other.p
            && self.degree == other.degree
            && self.tower == other.tower
            && self.modulus == other.modulus
            && match (&self.base, &other.base) {
                (None, None) => true,
                (Some(a), Some(b)) => **a == **b,
                _ => false,
            }
    }
}

impl Eq for FieldDesc {}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Arithmetic on coefficient vectors over a base field given by raw indices.
struct PolyOver<'a> {
    base: &'a FieldDesc,
}

impl PolyOver<'_> {
    fn trim(v: &mut Vec<u32>) {
        while v.last() == Some(&0) {
            v.pop();
        }
    }

    fn rem(&self, a: &[u32], m: &[u32]) -> Vec<u32> {
        let mut r = a.to_vec();
        Self::trim(&mut r);
        let dm = m.len() - 1;
        let lead_inv = self.base.inv(m[dm]);
        while r.len() > dm {
            let top = r.len() - 1;
            let c = self.base.mul(r[top], lead_inv);
            let shift = top - dm;
            for (i, &mi) in m.iter().enumerate() {
                let prod = self.base.mul(c, mi);
                r[shift + i] = self.base.sub(r[shift + i], prod);
            }
            Self::trim(&mut r);
        }
        r
    }

    fn mulmod(&self, a: &[u32], b: &[u32], m: &[u32]) -> Vec<u32> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut prod = vec![0u32; a.len() + b.len() - 1];
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                let t = self.base.mul(ai, bj);
                prod[i + j] = self.base.add(prod[i + j], t);
            }
        }
        self.rem(&prod, m)
    }

    /// Trial division by every monic polynomial of degree 1..=deg/2.
    fn is_irreducible(&self, m: &[u32]) -> bool {
        let n = m.len() - 1;
        let b = self.base.size as u64;
        for d in 1..=n / 2 {
            let count = b.pow(d as u32);
            for idx in 0..count {
                let mut div = digits(idx, b, d);
                div.push(1);
                if self.rem(m, &div).is_empty() {
                    return false;
                }
            }
        }
        true
    }
}

fn digits(mut idx: u64, b: u64, len: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push((idx % b) as u32);
        idx /= b;
    }
    out
}

fn undigits(d: &[u32], b: u64) -> u32 {
    let mut idx = 0u64;
    for &c in d.iter().rev() {
        idx = idx * b + c as u64;
    }
    idx as u32
}

impl FieldDesc {
    fn new_prime(p: u32) -> Result<Field> {
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        check_budget("field size", p as u128, ENUM_BUDGET as u128)?;
        let mut f = FieldDesc {
            p,
            abs_degree: 1,
            degree: 1,
            size: p,
            base: None,
            tower: false,
            modulus: vec![0, 1],
            exp: Vec::new(),
            log: Vec::new(),
            zech: Vec::new(),
            generator: 0,
        };
        f.build_tables(|a, b| ((a as u64 * b as u64) % p as u64) as u32, |a| {
            if a + 1 == p {
                0
            } else {
                a + 1
            }
        });
        Ok(Arc::new(f))
    }

    fn new_extension(base: &Field, modulus: Vec<u32>, tower: bool) -> Result<Field> {
        let n = modulus.len() - 1;
        let size = (base.size as u64)
            .checked_pow(n as u32)
            .ok_or_else(|| Error::Budget {
                what: "field size".into(),
                needed: u128::MAX,
                limit: ENUM_BUDGET as u128,
            })?;
        check_budget("field size", size as u128, ENUM_BUDGET as u128)?;
        let mut f = FieldDesc {
            p: base.p,
            abs_degree: base.abs_degree * n as u32,
            degree: n as u32,
            size: size as u32,
            base: Some(base.clone()),
            tower,
            modulus,
            exp: Vec::new(),
            log: Vec::new(),
            zech: Vec::new(),
            generator: 0,
        };
        let b = base.size as u64;
        let ring = PolyOver { base };
        let m = f.modulus.clone();
        let slow_mul = |x: u32, y: u32| -> u32 {
            let dx = digits(x as u64, b, n);
            let dy = digits(y as u64, b, n);
            let r = ring.mulmod(&dx, &dy, &m);
            undigits(&r, b)
        };
        let add_one = |x: u32| -> u32 {
            let d0 = x % base.size;
            x - d0 + base.add(d0, 1)
        };
        f.build_tables(slow_mul, add_one);
        Ok(Arc::new(f))
    }

    fn build_tables(&mut self, slow_mul: impl Fn(u32, u32) -> u32, add_one: impl Fn(u32) -> u32) {
        let s = self.size as u64;
        let order = s - 1;
        let factors = prime_factors(order);
        let slow_pow = |g: u32, mut e: u64| -> u32 {
            let mut acc = 1u32;
            let mut base = g;
            while e > 0 {
                if e & 1 == 1 {
                    acc = slow_mul(acc, base);
                }
                base = slow_mul(base, base);
                e >>= 1;
            }
            acc
        };
        let mut generator = NONE;
        for g in 1..self.size {
            if factors.iter().all(|&r| slow_pow(g, order / r) != 1) {
                generator = g;
                break;
            }
        }
        assert!(generator != NONE, "no primitive element in a field of size {s}");
        self.generator = generator;
        let mut exp = Vec::with_capacity(order as usize);
        let mut log = vec![NONE; s as usize];
        let mut cur = 1u32;
        for k in 0..order as u32 {
            exp.push(cur);
            log[cur as usize] = k;
            cur = slow_mul(cur, generator);
        }
        let zech = (0..order as usize)
            .map(|k| {
                let v = add_one(exp[k]);
                if v == 0 {
                    NONE
                } else {
                    log[v as usize]
                }
            })
            .collect();
        self.exp = exp;
        self.log = log;
        self.zech = zech;
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// Number of elements.
    pub fn size(&self) -> u32 {
        self.size
    }

    /// Degree over the prime field.
    pub fn abs_degree(&self) -> u32 {
        self.abs_degree
    }

    /// Degree over the base field (equals `abs_degree` unless this is a tower).
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn base(&self) -> Option<&Field> {
        self.base.as_ref()
    }

    pub fn is_tower(&self) -> bool {
        self.tower
    }

    /// Size of the field the relative coefficients live in.
    pub fn base_size(&self) -> u32 {
        self.base.as_ref().map_or(self.p, |b| b.size)
    }

    /// Relative modulus, constant term first.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn generator_index(&self) -> u32 {
        self.generator
    }

    fn order(&self) -> u32 {
        self.size - 1
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        if self.base.is_none() {
            let s = a + b;
            return if s >= self.p { s - self.p } else { s };
        }
        if a == 0 {
            return b;
        }
        if b == 0 {
            return a;
        }
        let la = self.log[a as usize];
        let lb = self.log[b as usize];
        let d = if lb >= la { lb - la } else { lb + self.order() - la };
        let z = self.zech[d as usize];
        if z == NONE {
            return 0;
        }
        let e = la as u64 + z as u64;
        self.exp[(e % self.order() as u64) as usize]
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        if a == 0 {
            return 0;
        }
        if self.base.is_none() {
            return self.p - a;
        }
        if self.p == 2 {
            return a;
        }
        let half = self.order() / 2;
        let e = self.log[a as usize] as u64 + half as u64;
        self.exp[(e % self.order() as u64) as usize]
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        if self.base.is_none() {
            return ((a as u64 * b as u64) % self.p as u64) as u32;
        }
        let e = self.log[a as usize] as u64 + self.log[b as usize] as u64;
        self.exp[(e % self.order() as u64) as usize]
    }

    /// Inverse of a nonzero element. Panics on zero; use `try_div` for checked division.
    #[inline]
    pub fn inv(&self, a: u32) -> u32 {
        assert!(a != 0, "inverse of zero");
        let l = self.log[a as usize];
        self.exp[((self.order() - l) % self.order()) as usize]
    }

    pub fn try_div(&self, a: u32, b: u32) -> Result<u32> {
        if b == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(self.mul(a, self.inv(b)))
    }

    pub fn pow(&self, a: u32, e: i64) -> Result<u32> {
        if a == 0 {
            return match e.cmp(&0) {
                std::cmp::Ordering::Less => Err(Error::DivisionByZero),
                std::cmp::Ordering::Equal => Ok(1),
                std::cmp::Ordering::Greater => Ok(0),
            };
        }
        let ord = self.order() as i128;
        let k = (self.log[a as usize] as i128 * e as i128).rem_euclid(ord);
        Ok(self.exp[k as usize])
    }

    /// Discrete log with respect to the built-in generator.
    #[inline]
    pub fn log_of(&self, a: u32) -> Option<u32> {
        if a == 0 {
            None
        } else {
            Some(self.log[a as usize])
        }
    }

    #[inline]
    pub fn exp_of(&self, k: u64) -> u32 {
        self.exp[(k % self.order() as u64) as usize]
    }

    /// Whether `a` is a nonzero square (odd characteristic).
    #[inline]
    pub fn is_nonzero_square(&self, a: u32) -> bool {
        a != 0 && self.log[a as usize] % 2 == 0
    }

    /// Number of square roots, from the table. Odd characteristic only.
    #[inline]
    pub fn sqrt_count_raw(&self, a: u32) -> u8 {
        if a == 0 {
            1
        } else if self.log[a as usize] % 2 == 0 {
            2
        } else {
            0
        }
    }

    /// x ↦ x^b where b is the base-field size (the prime for non-towers).
    pub fn frobenius_raw(&self, a: u32) -> u32 {
        if a == 0 {
            return 0;
        }
        let e = self.log[a as usize] as u64 * self.base_size() as u64;
        self.exp[(e % self.order() as u64) as usize]
    }

    /// Base-p digits of an index: the coordinates over the prime field.
    pub fn abs_coeffs(&self, a: u32) -> Vec<u32> {
        digits(a as u64, self.p as u64, self.abs_degree as usize)
    }

    /// Relative coordinates: base-field indices.
    pub fn rel_coeffs(&self, a: u32) -> Vec<u32> {
        digits(a as u64, self.base_size() as u64, self.degree as usize)
    }

    pub fn from_rel_coeffs(&self, c: &[u32]) -> Result<u32> {
        if c.len() != self.degree as usize || c.iter().any(|&x| x >= self.base_size()) {
            return Err(Error::Invalid(format!(
                "coefficient vector {c:?} does not describe an element of a field of size {}",
                self.size
            )));
        }
        Ok(undigits(c, self.base_size() as u64))
    }

    pub fn element(self: &Arc<Self>, idx: u32) -> FieldElement {
        assert!(idx < self.size, "index {idx} out of range for field of size {}", self.size);
        FieldElement {
            field: self.clone(),
            idx,
        }
    }

    pub fn zero(self: &Arc<Self>) -> FieldElement {
        self.element(0)
    }

    pub fn one(self: &Arc<Self>) -> FieldElement {
        self.element(1)
    }

    /// Element from an integer, reduced mod p.
    pub fn from_int(self: &Arc<Self>, v: i64) -> FieldElement {
        let r = v.rem_euclid(self.p as i64) as u32;
        self.element(r)
    }
}

/// The field with `q` elements, for a prime power `q`.
pub fn make_field_of_order(q: u64) -> Result<Field> {
    let ps = prime_factors(q);
    if ps.len() != 1 {
        return Err(Error::Invalid(format!("{q} is not a prime power")));
    }
    let p = ps[0];
    let mut e = 0;
    let mut r = q;
    while r > 1 {
        r /= p;
        e += 1;
    }
    make_field(p, e)
}

/// Returns the prime field F_p or F_{p^e} with the smallest monic irreducible modulus.
pub fn make_field(p: u64, e: u32) -> Result<Field> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if e == 0 {
        return Err(Error::Invalid("extension degree must be at least 1".into()));
    }
    check_budget(
        "field size",
        (p as u128).saturating_pow(e),
        ENUM_BUDGET as u128,
    )?;
    let prime = FieldDesc::new_prime(p as u32)?;
    if e == 1 {
        return Ok(prime);
    }
    let m = smallest_irreducible(&prime, e as usize)?;
    FieldDesc::new_extension(&prime, m, false)
}

/// F_{p^e} with a caller-supplied modulus (checked for irreducibility).
pub fn make_field_with_modulus(p: u64, modulus: &[u32]) -> Result<Field> {
    let prime = make_field(p, 1)?;
    if modulus.len() <= 2 {
        if modulus == [0, 1] {
            return Ok(prime);
        }
        return Err(Error::Invalid(format!("modulus {modulus:?} is not a valid prime-field modulus")));
    }
    check_modulus(&prime, modulus)?;
    FieldDesc::new_extension(&prime, modulus.to_vec(), false)
}

fn check_modulus(base: &Field, modulus: &[u32]) -> Result<()> {
    if modulus.last() != Some(&1) || modulus.iter().any(|&c| c >= base.size) {
        return Err(Error::Invalid(format!("modulus {modulus:?} is not monic over a field of size {}", base.size)));
    }
    if !(PolyOver { base }).is_irreducible(modulus) {
        return Err(Error::Invalid(format!("modulus {modulus:?} is reducible")));
    }
    Ok(())
}

fn smallest_irreducible(base: &Field, n: usize) -> Result<Vec<u32>> {
    let b = base.size as u64;
    let ring = PolyOver { base };
    for idx in 0..b.pow(n as u32) {
        let mut m = digits(idx, b, n);
        m.push(1);
        if ring.is_irreducible(&m) {
            return Ok(m);
        }
    }
    Err(Error::Internal(format!("no irreducible polynomial of degree {n} over a field of size {b}")))
}

/// F_{q^n} built directly over `base`, so that F_q sits inside as the constants.
pub fn extend_field(base: &Field, n: u32) -> Result<Field> {
    if n == 0 {
        return Err(Error::Invalid("extension degree must be at least 1".into()));
    }
    if n == 1 {
        return Ok(base.clone());
    }
    check_budget(
        "field size",
        (base.size as u128).saturating_pow(n),
        ENUM_BUDGET as u128,
    )?;
    let m = smallest_irreducible(base, n as usize)?;
    FieldDesc::new_extension(base, m, true)
}

pub fn extend_field_with_modulus(base: &Field, rel_modulus: &[u32]) -> Result<Field> {
    if rel_modulus.len() < 2 {
        return Err(Error::Invalid("relative modulus must have degree at least 1".into()));
    }
    if rel_modulus.len() == 2 {
        return Ok(base.clone());
    }
    check_modulus(base, rel_modulus)?;
    FieldDesc::new_extension(base, rel_modulus.to_vec(), true)
}

/// All elements in index order: zero first, then the remaining constants.
pub fn enumerate(field: &Field) -> Result<Vec<FieldElement>> {
    check_budget("enumeration", field.size as u128, ENUM_BUDGET as u128)?;
    Ok((0..field.size).map(|i| field.element(i)).collect())
}

#[derive(Clone)]
pub struct FieldElement {
    field: Field,
    idx: u32,
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.idx == other.idx && *self.field == *other.field
    }
}

impl Eq for FieldElement {}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.field.degree == 1 && self.field.base.is_none() {
            write!(f, "{}", self.idx)
        } else {
            write!(f, "{:?}", self.field.rel_coeffs(self.idx))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Div,
}

pub fn field_op(a: &FieldElement, b: &FieldElement, op: FieldOp) -> Result<FieldElement> {
    a.same_field(b)?;
    let f = &a.field;
    let idx = match op {
        FieldOp::Add => f.add(a.idx, b.idx),
        FieldOp::Sub => f.sub(a.idx, b.idx),
        FieldOp::Mul => f.mul(a.idx, b.idx),
        FieldOp::Div => f.try_div(a.idx, b.idx)?,
    };
    Ok(f.element(idx))
}

impl FieldElement {
    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn index(&self) -> u32 {
        self.idx
    }

    pub fn is_zero(&self) -> bool {
        self.idx == 0
    }

    /// Relative coordinates over the base field.
    pub fn coeffs(&self) -> Vec<u32> {
        self.field.rel_coeffs(self.idx)
    }

    pub fn abs_coeffs(&self) -> Vec<u32> {
        self.field.abs_coeffs(self.idx)
    }

    fn same_field(&self, other: &FieldElement) -> Result<()> {
        if Arc::ptr_eq(&self.field, &other.field) || *self.field == *other.field {
            Ok(())
        } else {
            Err(Error::FieldMismatch)
        }
    }

    pub fn add(&self, o: &FieldElement) -> Result<FieldElement> {
        field_op(self, o, FieldOp::Add)
    }

    pub fn sub(&self, o: &FieldElement) -> Result<FieldElement> {
        field_op(self, o, FieldOp::Sub)
    }

    pub fn mul(&self, o: &FieldElement) -> Result<FieldElement> {
        field_op(self, o, FieldOp::Mul)
    }

    pub fn div(&self, o: &FieldElement) -> Result<FieldElement> {
        field_op(self, o, FieldOp::Div)
    }

    pub fn neg(&self) -> FieldElement {
        self.field.element(self.field.neg(self.idx))
    }

    pub fn inv(&self) -> Result<FieldElement> {
        self.field.one().div(self)
    }

    pub fn pow(&self, e: i64) -> Result<FieldElement> {
        Ok(self.field.element(self.field.pow(self.idx, e)?))
    }

    pub fn frobenius(&self) -> FieldElement {
        self.field.element(self.field.frobenius_raw(self.idx))
    }
}

/// Number of w with w² = a.
pub fn sqrt_count(a: &FieldElement) -> Result<u8> {
    if a.field.p == 2 {
        return Err(Error::EvenCharacteristic);
    }
    Ok(a.field.sqrt_count_raw(a.idx))
}

/// Constant embedding of an element of F_q into a tower F_{q^n} over it.
pub fn embed(x: &FieldElement, ext: &Field) -> Result<FieldElement> {
    if *x.field == **ext {
        return Ok(ext.element(x.idx));
    }
    let mut cur: &Field = ext;
    while cur.tower {
        cur = cur.base.as_ref().expect("tower has a base");
        if **cur == *x.field {
            return Ok(ext.element(x.idx));
        }
    }
    Err(Error::FieldMismatch)
}

pub struct DlogTable {
    field: Field,
    generator: FieldElement,
    table: Vec<u32>,
}

impl DlogTable {
    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn generator(&self) -> &FieldElement {
        &self.generator
    }

    pub fn dlog(&self, x: &FieldElement) -> Option<u32> {
        self.dlog_raw(x.idx)
    }

    #[inline]
    pub fn dlog_raw(&self, idx: u32) -> Option<u32> {
        match self.table[idx as usize] {
            NONE => None,
            v => Some(v),
        }
    }

    /// Number of nonzero entries.
    pub fn len(&self) -> usize {
        self.table.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Discrete-log table for the smallest generator.
pub fn build_dlog(field: &Field) -> Result<DlogTable> {
    build_dlog_with_rank(field, 0)
}

/// Discrete-log table for the `rank`-th smallest generator (0 = smallest).
pub fn build_dlog_with_rank(field: &Field, rank: usize) -> Result<DlogTable> {
    check_budget("discrete-log table", field.size as u128, DLOG_BUDGET as u128)?;
    let order = field.order() as u64;
    let mut found = 0usize;
    let mut g = NONE;
    for cand in 1..field.size {
        let l = field.log[cand as usize] as u64;
        if num_integer::gcd(l, order) == 1 {
            if found == rank {
                g = cand;
                break;
            }
            found += 1;
        }
    }
    if g == NONE {
        return Err(Error::Invalid(format!("field has fewer than {} generators", rank + 1)));
    }
    let mut table = vec![NONE; field.size as usize];
    let mut cur = 1u32;
    for k in 0..order as u32 {
        table[cur as usize] = k;
        cur = field.mul(cur, g);
    }
    Ok(DlogTable {
        field: field.clone(),
        generator: field.element(g),
        table,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerJson {
    pub n: u32,
    pub rel_modulus: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldJson {
    pub p: u64,
    pub e: u32,
    pub modulus: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tower: Option<TowerJson>,
}

pub fn field_to_json(f: &FieldDesc) -> Result<FieldJson> {
    if f.tower {
        let base = f.base.as_ref().expect("tower has a base");
        if base.tower {
            return Err(Error::Invalid("only single-level towers serialize".into()));
        }
        Ok(FieldJson {
            p: f.p as u64,
            e: f.abs_degree,
            modulus: base.modulus.clone(),
            tower: Some(TowerJson {
                n: f.degree,
                rel_modulus: f.modulus.clone(),
            }),
        })
    } else {
        Ok(FieldJson {
            p: f.p as u64,
            e: f.abs_degree,
            modulus: f.modulus.clone(),
            tower: None,
        })
    }
}

pub fn field_from_json(j: &FieldJson) -> Result<Field> {
    let base = make_field_with_modulus(j.p, &j.modulus)?;
    let f = match &j.tower {
        None => base,
        Some(t) => {
            if t.rel_modulus.len() != t.n as usize + 1 {
                return Err(Error::Invalid("relative modulus length does not match n".into()));
            }
            extend_field_with_modulus(&base, &t.rel_modulus)?
        }
    };
    if f.abs_degree != j.e {
        return Err(Error::Invalid(format!("declared e = {} but the moduli give {}", j.e, f.abs_degree)));
    }
    Ok(f)
}
