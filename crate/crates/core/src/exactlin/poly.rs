//! Univariate polynomials over Q, plus integer-polynomial helpers (modular
//! gcd, exact division, square-free decomposition).

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::matrix::{parse_rat, rat_to_string};
use super::modp::{self, PrimeStream};
use crate::error::{Error, Result};

/// Polynomial with rational coefficients, constant term first.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatPoly {
    coeffs: Vec<BigRational>,
}

impl fmt::Debug for RatPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for RatPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let (sign, mag) = if c.is_negative() { ("-", -c) } else { ("+", c.clone()) };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let show_coeff = !mag.is_one() || k == 0;
            if show_coeff {
                write!(f, "{}", rat_to_string(&mag))?;
            }
            match k {
                0 => {}
                1 => write!(f, "x")?,
                _ => write!(f, "x^{k}")?,
            }
        }
        Ok(())
    }
}

fn rat(v: i64) -> BigRational {
    BigRational::from_integer(v.into())
}

impl RatPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        RatPoly { coeffs }
    }

    pub fn from_i64(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&v| rat(v)).collect())
    }

    pub fn from_bigints(c: &[BigInt]) -> Self {
        Self::new(c.iter().map(|v| BigRational::from_integer(v.clone())).collect())
    }

    pub fn zero() -> Self {
        RatPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::from_i64(&[1])
    }

    pub fn x() -> Self {
        Self::from_i64(&[0, 1])
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> BigRational {
        self.coeffs.get(k).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn lead(&self) -> Option<&BigRational> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.lead().is_some_and(|c| c.is_one())
    }

    /// Integer coefficients, if all coefficients are integers.
    pub fn to_bigints(&self) -> Option<Vec<BigInt>> {
        self.coeffs
            .iter()
            .map(|c| if c.is_integer() { Some(c.numer().clone()) } else { None })
            .collect()
    }

    pub fn to_i64s(&self) -> Option<Vec<i64>> {
        self.to_bigints()?.iter().map(|c| c.to_i64()).collect()
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn add(&self, o: &RatPoly) -> RatPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }

    pub fn sub(&self, o: &RatPoly) -> RatPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) - o.coeff(k)).collect())
    }

    pub fn neg(&self) -> RatPoly {
        Self::new(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn scale(&self, s: &BigRational) -> RatPoly {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, o: &RatPoly) -> RatPoly {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn pow(&self, e: u32) -> RatPoly {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// self(inner(x)).
    pub fn compose(&self, inner: &RatPoly) -> RatPoly {
        let mut acc = Self::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(inner).add(&Self::constant(c.clone()));
        }
        acc
    }

    pub fn derivative(&self) -> RatPoly {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * rat(k as i64))
                .collect(),
        )
    }

    pub fn divrem(&self, d: &RatPoly) -> Result<(RatPoly, RatPoly)> {
        let dd = d.degree().ok_or(Error::DivisionByZero)?;
        let lead_inv = d.coeffs[dd].recip();
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return Ok((Self::zero(), self.clone()));
        }
        let mut q = vec![BigRational::zero(); r.len() - dd];
        for k in (dd..r.len()).rev() {
            let c = &r[k] * &lead_inv;
            if c.is_zero() {
                continue;
            }
            for (j, dc) in d.coeffs.iter().enumerate() {
                r[k - dd + j] -= &c * dc;
            }
            q[k - dd] = c;
        }
        r.truncate(dd);
        Ok((Self::new(q), Self::new(r)))
    }

    pub fn monic(&self) -> RatPoly {
        match self.lead() {
            None => Self::zero(),
            Some(l) => self.scale(&l.recip()),
        }
    }

    /// Monic gcd over Q.
    pub fn gcd(&self, o: &RatPoly) -> RatPoly {
        if self.is_zero() {
            return o.monic();
        }
        if o.is_zero() {
            return self.monic();
        }
        let g = gcd_int(&self.primitive_int(), &o.primitive_int());
        Self::from_bigints(&g).monic()
    }

    /// Primitive integer multiple with positive leading coefficient.
    pub fn primitive_int(&self) -> Vec<BigInt> {
        if self.is_zero() {
            return Vec::new();
        }
        let den = self
            .coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = self
            .coeffs
            .iter()
            .map(|c| c.numer() * (&den / c.denom()))
            .collect();
        primitive(&ints)
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(rat_to_string).collect()
    }

    pub fn from_strings(s: &[String]) -> Result<Self> {
        Ok(Self::new(s.iter().map(|v| parse_rat(v)).collect::<Result<_>>()?))
    }
}

pub(crate) fn trim_int(v: &mut Vec<BigInt>) {
    while v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
}

pub fn content(a: &[BigInt]) -> BigInt {
    a.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c))
}

/// Divides out the content and makes the leading coefficient positive.
pub fn primitive(a: &[BigInt]) -> Vec<BigInt> {
    let mut v = a.to_vec();
    trim_int(&mut v);
    if v.is_empty() {
        return v;
    }
    let mut c = content(&v);
    if v.last().unwrap().is_negative() {
        c = -c;
    }
    v.iter().map(|x| x / &c).collect()
}

pub fn int_derivative(a: &[BigInt]) -> Vec<BigInt> {
    a.iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * BigInt::from(k))
        .collect()
}

/// Exact quotient a / b over Z, or None when b does not divide a in Z[x].
pub fn int_divexact(a: &[BigInt], b: &[BigInt]) -> Option<Vec<BigInt>> {
    let mut b = b.to_vec();
    trim_int(&mut b);
    let db = b.len().checked_sub(1)?;
    let mut r = a.to_vec();
    trim_int(&mut r);
    if r.is_empty() {
        return Some(Vec::new());
    }
    if r.len() <= db {
        return None;
    }
    let lb = &b[db];
    let mut q = vec![BigInt::zero(); r.len() - db];
    for k in (db..r.len()).rev() {
        if r[k].is_zero() {
            continue;
        }
        let (c, rem) = r[k].div_rem(lb);
        if !rem.is_zero() {
            return None;
        }
        for (j, bc) in b.iter().enumerate() {
            r[k - db + j] -= &c * bc;
        }
        q[k - db] = c;
    }
    if r.iter().any(|c| !c.is_zero()) {
        return None;
    }
    trim_int(&mut q);
    Some(q)
}

fn trim_u64(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn gcd_mod(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    trim_u64(&mut a);
    trim_u64(&mut b);
    while !b.is_empty() {
        // a <- a mod b
        let db = b.len() - 1;
        let inv = modp::invmod(b[db], p);
        while a.len() > db {
            let k = a.len() - 1;
            let c = modp::mulmod(a[k], inv, p);
            for (j, &bc) in b.iter().enumerate() {
                let t = modp::mulmod(c, bc, p);
                a[k - db + j] = modp::submod(a[k - db + j], t, p);
            }
            trim_u64(&mut a);
        }
        std::mem::swap(&mut a, &mut b);
    }
    if let Some(&l) = a.last() {
        let inv = modp::invmod(l, p);
        for c in a.iter_mut() {
            *c = modp::mulmod(*c, inv, p);
        }
    }
    a
}

/// Gcd over Z of two integer polynomials, as a primitive polynomial with
/// positive leading coefficient. Computed modulo a stream of word primes and
/// accepted only after an exact division check.
pub fn gcd_int(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let a = primitive(a);
    let b = primitive(b);
    if a.is_empty() {
        return b;
    }
    if b.is_empty() {
        return a;
    }
    if a.len() == 1 || b.len() == 1 {
        return vec![BigInt::one()];
    }
    let gamma = a.last().unwrap().gcd(b.last().unwrap());
    let mut cand: Option<(usize, Vec<BigInt>, BigInt)> = None;
    let mut last_lift: Option<Vec<BigInt>> = None;
    for p in PrimeStream::new() {
        let la = modp::reduce_big(a.last().unwrap(), p);
        let lb = modp::reduce_big(b.last().unwrap(), p);
        if la == 0 || lb == 0 {
            continue;
        }
        let am: Vec<u64> = a.iter().map(|c| modp::reduce_big(c, p)).collect();
        let bm: Vec<u64> = b.iter().map(|c| modp::reduce_big(c, p)).collect();
        let g = gcd_mod(&am, &bm, p);
        let d = g.len() - 1;
        if d == 0 {
            return vec![BigInt::one()];
        }
        let gm = modp::reduce_big(&gamma, p);
        let scaled: Vec<u64> = g.iter().map(|&c| modp::mulmod(c, gm, p)).collect();
        let pb = BigInt::from(p);
        match &mut cand {
            Some((cd, _, _)) if d > *cd => continue,
            Some((cd, res, m)) if d == *cd => {
                // CRT: x ≡ res (mod m), x ≡ s (mod p)
                let minv = BigInt::from(modp::invmod(modp::reduce_big(m, p), p));
                for (r, &s) in res.iter_mut().zip(&scaled) {
                    let rp = modp::reduce_big(r, p);
                    let diff = BigInt::from(modp::submod(s, rp, p));
                    let t = (diff * &minv).mod_floor(&pb);
                    *r += &*m * t;
                }
                *m *= &pb;
            }
            _ => {
                cand = Some((d, scaled.iter().map(|&c| BigInt::from(c)).collect(), pb));
                last_lift = None;
                continue;
            }
        }
        let (_, res, m) = cand.as_ref().unwrap();
        let lifted: Vec<BigInt> = res.iter().map(|r| modp::symmetric(r, m)).collect();
        let h = primitive(&lifted);
        if last_lift.as_ref() == Some(&h)
            && int_divexact(&a, &h).is_some()
            && int_divexact(&b, &h).is_some()
        {
            return h;
        }
        last_lift = Some(h);
    }
    unreachable!("prime stream is infinite")
}

/// Square-free decomposition f = c · Π a_i^i (Yun). Returns primitive
/// integer factors of positive degree with their multiplicities.
pub fn squarefree_decomposition(f: &RatPoly) -> Vec<(Vec<BigInt>, usize)> {
    let mut out = Vec::new();
    if f.degree().unwrap_or(0) == 0 {
        return out;
    }
    let f = RatPoly::from_bigints(&f.primitive_int());
    let fp = f.derivative();
    let a0 = f.gcd(&fp);
    let mut b = f.divrem(&a0).unwrap().0;
    let c = fp.divrem(&a0).unwrap().0;
    let mut d = c.sub(&b.derivative());
    let mut i = 1usize;
    while b.degree().unwrap_or(0) > 0 {
        let a = b.gcd(&d);
        let nb = b.divrem(&a).unwrap().0;
        let nc = d.divrem(&a).unwrap().0;
        if a.degree().unwrap_or(0) > 0 {
            out.push((a.primitive_int(), i));
        }
        d = nc.sub(&nb.derivative());
        b = nb;
        i += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn display_and_eval() {
        let p = RatPoly::from_i64(&[-2, -1, 1]);
        assert_eq!(p.to_string(), "x^2 - x - 2");
        assert_eq!(p.eval(&rat(2)), rat(0));
        assert_eq!(p.eval(&rat(-1)), rat(0));
    }

    #[test]
    fn division_and_gcd() {
        let a = RatPoly::from_i64(&[-1, 0, 1]); // (x-1)(x+1)
        let b = RatPoly::from_i64(&[1, -2, 1]); // (x-1)^2
        assert_eq!(a.gcd(&b), RatPoly::from_i64(&[-1, 1]));
        let (q, r) = a.divrem(&RatPoly::from_i64(&[-1, 1])).unwrap();
        assert_eq!(q, RatPoly::from_i64(&[1, 1]));
        assert!(r.is_zero());
        assert_eq!(
            RatPoly::from_i64(&[1, 1]).gcd(&RatPoly::from_i64(&[2, 1])),
            RatPoly::one()
        );
    }

    #[test]
    fn integer_gcd_with_content_and_leading_coefficients() {
        // (2x+3)(x-5)^2 and (2x+3)(3x+1)
        let f = RatPoly::from_i64(&[3, 2]).mul(&RatPoly::from_i64(&[-5, 1]).pow(2));
        let g = RatPoly::from_i64(&[3, 2]).mul(&RatPoly::from_i64(&[1, 3]));
        let h = gcd_int(&f.to_bigints().unwrap(), &g.to_bigints().unwrap());
        assert_eq!(h, ints(&[3, 2]));
    }

    #[test]
    fn exact_division() {
        let a = ints(&[-6, 1, 1]); // (x+3)(x-2)
        assert_eq!(int_divexact(&a, &ints(&[3, 1])), Some(ints(&[-2, 1])));
        assert_eq!(int_divexact(&a, &ints(&[1, 2])), None);
    }

    #[test]
    fn yun_multiplicities() {
        // (x-1)^3 (x+2)^2 (x^2+1)
        let f = RatPoly::from_i64(&[-1, 1])
            .pow(3)
            .mul(&RatPoly::from_i64(&[2, 1]).pow(2))
            .mul(&RatPoly::from_i64(&[1, 0, 1]));
        let dec = squarefree_decomposition(&f);
        assert_eq!(
            dec,
            vec![(ints(&[1, 0, 1]), 1), (ints(&[2, 1]), 2), (ints(&[-1, 1]), 3)]
        );
    }

    #[test]
    fn compose_chebyshev_like() {
        let t2 = RatPoly::from_i64(&[-2, 0, 1]);
        let t4 = t2.compose(&t2);
        assert_eq!(t4, RatPoly::from_i64(&[2, 0, -4, 0, 1]));
    }
}
