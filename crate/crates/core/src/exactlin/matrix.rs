//! Dense exact matrices over Z (machine words, overflow-checked) and Q.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::modp::{self, LuMod, PrimeStream};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<i64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(IntMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::from_vec(r, c, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn add_at(&mut self, i: usize, j: usize, v: i64) {
        let e = &mut self.data[i * self.cols + j];
        *e = e.checked_add(v).expect("integer overflow in matrix entry");
    }

    pub fn row(&self, i: usize) -> &[i64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[i64] {
        &self.data
    }

    pub fn max_abs(&self) -> u64 {
        self.data.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn try_mul(&self, o: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != o.rows {
            return Err(Error::Dimension(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, o.rows, o.cols
            )));
        }
        let (n, k, m) = (self.rows, self.cols, o.cols);
        let bound = (self.max_abs() as u128) * (o.max_abs() as u128) * (k.max(1) as u128);
        let mut out = IntMatrix::zeros(n, m);
        if bound < i64::MAX as u128 {
            for i in 0..n {
                let orow = &mut out.data[i * m..(i + 1) * m];
                for l in 0..k {
                    let a = self.data[i * k + l];
                    if a == 0 {
                        continue;
                    }
                    let brow = &o.data[l * m..(l + 1) * m];
                    for (dst, &b) in orow.iter_mut().zip(brow) {
                        *dst += a * b;
                    }
                }
            }
        } else {
            let mut acc = vec![0i128; m];
            for i in 0..n {
                acc.iter_mut().for_each(|v| *v = 0);
                for l in 0..k {
                    let a = self.data[i * k + l] as i128;
                    if a == 0 {
                        continue;
                    }
                    for (dst, &b) in acc.iter_mut().zip(&o.data[l * m..(l + 1) * m]) {
                        *dst += a * b as i128;
                    }
                }
                for (j, v) in acc.iter().enumerate() {
                    out.data[i * m + j] = i64::try_from(*v).map_err(|_| {
                        Error::Invalid("integer overflow in matrix product".into())
                    })?;
                }
            }
        }
        Ok(out)
    }

    /// Product; panics on dimension mismatch or overflow.
    pub fn mul(&self, o: &IntMatrix) -> IntMatrix {
        self.try_mul(o).expect("matrix product")
    }

    pub fn mul_vec(&self, v: &[i64]) -> Vec<i128> {
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .map(|(&a, &b)| a as i128 * b as i128)
                    .sum()
            })
            .collect()
    }

    pub fn add(&self, o: &IntMatrix) -> IntMatrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&o.data)
                .map(|(a, b)| a.checked_add(*b).expect("overflow"))
                .collect(),
        }
    }

    pub fn sub(&self, o: &IntMatrix) -> IntMatrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&o.data)
                .map(|(a, b)| a.checked_sub(*b).expect("overflow"))
                .collect(),
        }
    }

    pub fn scale(&self, c: i64) -> IntMatrix {
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a.checked_mul(c).expect("overflow")).collect(),
        }
    }

    pub fn neg(&self) -> IntMatrix {
        self.scale(-1)
    }

    pub fn trace(&self) -> i128 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i) as i128).sum()
    }

    /// Trace of self·o without forming the product.
    pub fn trace_of_product(&self, o: &IntMatrix) -> i128 {
        assert_eq!((self.rows, self.cols), (o.cols, o.rows));
        let mut s = 0i128;
        for i in 0..self.rows {
            for (j, &a) in self.row(i).iter().enumerate() {
                if a != 0 {
                    s += a as i128 * o.get(j, i) as i128;
                }
            }
        }
        s
    }

    pub fn pow(&self, e: u32) -> Result<IntMatrix> {
        if !self.is_square() {
            return Err(Error::Dimension("power of a non-square matrix".into()));
        }
        let mut acc = IntMatrix::identity(self.rows);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.try_mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.try_mul(&base)?;
            }
        }
        Ok(acc)
    }

    pub fn to_big(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|&v| BigInt::from(v)).collect())
            .collect()
    }

    pub fn to_rat(&self) -> RatMatrix {
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| BigRational::from_integer(v.into())).collect(),
        }
    }

    /// First index pair where the matrices differ.
    pub fn first_difference(&self, o: &IntMatrix) -> Option<(usize, usize, i64, i64)> {
        if (self.rows, self.cols) != (o.rows, o.cols) {
            return Some((usize::MAX, usize::MAX, 0, 0));
        }
        self.data
            .iter()
            .zip(&o.data)
            .position(|(a, b)| a != b)
            .map(|k| (k / self.cols, k % self.cols, self.data[k], o.data[k]))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for i in 0..self.rows {
            let line: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigRational>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            data: vec![BigRational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigRational::one();
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<BigRational>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(RatMatrix { rows, cols, data })
    }

    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Result<Self> {
        Ok(IntMatrix::from_rows(rows)?.to_rat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigRational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn data(&self) -> &[BigRational] {
        &self.data
    }

    pub fn mul(&self, o: &RatMatrix) -> RatMatrix {
        assert_eq!(self.cols, o.rows, "dimension mismatch in product");
        let (n, k, m) = (self.rows, self.cols, o.cols);
        let mut out = RatMatrix::zeros(n, m);
        for i in 0..n {
            for l in 0..k {
                let a = &self.data[i * k + l];
                if a.is_zero() {
                    continue;
                }
                for j in 0..m {
                    let b = &o.data[l * m + j];
                    if !b.is_zero() {
                        out.data[i * m + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, o: &RatMatrix) -> RatMatrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &RatMatrix) -> RatMatrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, c: &BigRational) -> RatMatrix {
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    pub fn trace(&self) -> BigRational {
        (0..self.rows.min(self.cols))
            .map(|i| self.get(i, i).clone())
            .fold(BigRational::zero(), |a, b| a + b)
    }

    pub fn transpose(&self) -> RatMatrix {
        let mut t = RatMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j).clone();
            }
        }
        t
    }

    /// Least common multiple of all denominators.
    pub fn common_denominator(&self) -> BigInt {
        self.data.iter().fold(BigInt::one(), |acc, v| {
            num_integer::lcm(acc, v.denom().clone())
        })
    }

    /// `(L, L·M)` with L the common denominator.
    pub fn clear_denominators(&self) -> (BigInt, Vec<Vec<BigInt>>) {
        let l = self.common_denominator();
        let rows = (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| {
                        let v = self.get(i, j);
                        v.numer() * (&l / v.denom())
                    })
                    .collect()
            })
            .collect();
        (l, rows)
    }

    /// Integer matrix when every entry is an integer fitting in i64.
    pub fn to_int(&self) -> Option<IntMatrix> {
        let data: Option<Vec<i64>> = self
            .data
            .iter()
            .map(|v| if v.is_integer() { v.numer().to_i64() } else { None })
            .collect();
        Some(IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: data?,
        })
    }

    pub fn to_strings(&self) -> Vec<Vec<String>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| rat_to_string(self.get(i, j))).collect())
            .collect()
    }

    pub fn from_strings(rows: &[Vec<String>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::Dimension("ragged rows".into()));
            }
            for s in row {
                data.push(parse_rat(s)?);
            }
        }
        RatMatrix::from_vec(r, c, data)
    }
}

pub fn rat_to_string(v: &BigRational) -> String {
    if v.is_integer() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

pub fn parse_rat(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Invalid(format!("cannot parse rational {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(Error::DivisionByZero);
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Fraction-free determinant (Bareiss).
pub fn det_bareiss(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = m.to_vec();
    let mut sign = 1i32;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[k][k] * &a[i][j] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if sign < 0 {
        -d
    } else {
        d
    }
}

pub fn det_int(m: &IntMatrix) -> Result<BigInt> {
    if !m.is_square() {
        return Err(Error::Dimension("determinant of a non-square matrix".into()));
    }
    Ok(det_bareiss(&m.to_big()))
}

/// Exact inverse by fraction-free Gauss–Jordan elimination on [B | I] where
/// B is M with denominators cleared.
pub fn rat_inverse(m: &RatMatrix) -> Result<RatMatrix> {
    if !m.is_square() {
        return Err(Error::Dimension("inverse of a non-square matrix".into()));
    }
    let n = m.rows();
    let (l, b) = m.clear_denominators();
    let w = 2 * n;
    let mut a: Vec<Vec<BigInt>> = b
        .into_iter()
        .enumerate()
        .map(|(i, mut row)| {
            row.extend((0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }));
            row
        })
        .collect();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            let i = (k + 1..n).find(|&i| !a[i][k].is_zero()).ok_or(Error::Singular)?;
            a.swap(i, k);
        }
        let (pivot_row, akk) = (a[k].clone(), a[k][k].clone());
        for (i, row) in a.iter_mut().enumerate() {
            if i == k {
                continue;
            }
            let aik = row[k].clone();
            for j in 0..w {
                if j == k {
                    continue;
                }
                let v = (&akk * &row[j] - &aik * &pivot_row[j]) / &prev;
                row[j] = v;
            }
            row[k] = BigInt::zero();
        }
        prev = akk;
    }
    // Left block is now det·I (det = prev up to the row swaps, which are already absorbed).
    let mut out = RatMatrix::zeros(n, n);
    for i in 0..n {
        let d = &a[i][i];
        for j in 0..n {
            let v = BigRational::new(&a[i][n + j] * &l, d.clone());
            out.set(i, j, v);
        }
    }
    Ok(out)
}

/// Exact solution of A·x = b for nonsingular integer A via p-adic (Dixon)
/// lifting with rational reconstruction; verified exactly before returning.
pub fn solve_dixon(a: &IntMatrix, b: &[BigInt]) -> Result<Vec<BigRational>> {
    if !a.is_square() || a.rows() != b.len() {
        return Err(Error::Dimension("solve needs a square matrix and matching rhs".into()));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if (a.max_abs() as u128) * (n as u128) >= 1u128 << 64 {
        return Err(Error::Invalid("matrix entries too large for word-size lifting".into()));
    }
    let log_h: f64 = (0..n)
        .map(|j| {
            let s: f64 = (0..n).map(|i| (a.get(i, j) as f64).powi(2)).sum();
            0.5 * s.max(1.0).log2()
        })
        .sum();
    let log_b = {
        let s: f64 = b
            .iter()
            .map(|v| v.to_f64().unwrap_or(f64::MAX).powi(2))
            .sum();
        0.5 * s.max(1.0).log2()
    };
    let log_num = log_h + log_b;
    let need_bits = 2.0 * log_num.max(log_h) + 8.0;

    let mut primes = PrimeStream::new();
    let mut failed_bits = 0.0;
    let (p, lu) = loop {
        let p = primes.next().unwrap();
        let am: Vec<u64> = a.data().iter().map(|&v| modp::reduce_i64(v, p)).collect();
        if let Some(lu) = LuMod::new(&am, n, p) {
            break (p, lu);
        }
        failed_bits += (p as f64).log2();
        if failed_bits > log_h + 1.0 {
            return Err(Error::Singular);
        }
    };
    let steps_max = (need_bits / (p as f64).log2()).ceil() as usize + 1;
    let pb = BigInt::from(p);

    let mut r: Vec<i128> = b
        .iter()
        .map(|v| v.to_i128().ok_or_else(|| Error::Invalid("right-hand side too large".into())))
        .collect::<Result<_>>()?;
    let mut acc: Vec<BigInt> = vec![BigInt::zero(); n];
    let mut pk = BigInt::one();
    let mut next_try = 4usize;
    for step in 1..=steps_max {
        let rm: Vec<u64> = r.iter().map(|&v| v.rem_euclid(p as i128) as u64).collect();
        let x = lu.solve(&rm);
        for i in 0..n {
            acc[i] += &pk * x[i];
        }
        pk *= &pb;
        for (i, ri) in r.iter_mut().enumerate() {
            let mut s: i128 = 0;
            for (j, &xj) in x.iter().enumerate() {
                let aij = a.get(i, j);
                if aij != 0 {
                    s = s
                        .checked_add(aij as i128 * xj as i128)
                        .ok_or_else(|| Error::Internal("overflow in lifting residual".into()))?;
                }
            }
            let diff = ri
                .checked_sub(s)
                .ok_or_else(|| Error::Internal("overflow in lifting residual".into()))?;
            debug_assert_eq!(diff.rem_euclid(p as i128), 0);
            *ri = diff / p as i128;
        }
        if step == next_try || step == steps_max {
            next_try *= 2;
            if let Some(sol) = reconstruct_vector(&acc, &pk) {
                if verify_solution(a, b, &sol) {
                    return Ok(sol);
                }
            }
        }
    }
    Err(Error::Internal("p-adic lifting did not reach a verified solution".into()))
}

fn reconstruct_vector(acc: &[BigInt], m: &BigInt) -> Option<Vec<BigRational>> {
    let bound = (m / BigInt::from(2)).sqrt();
    let mut den = BigInt::one();
    let mut out = Vec::with_capacity(acc.len());
    for u in acc {
        let y = modp::symmetric(&(u * &den), m);
        if y.abs() <= bound {
            out.push(BigRational::new(y, den.clone()));
            continue;
        }
        let (a, b) = modp::rational_reconstruct(&(u * &den), m, &bound)?;
        out.push(BigRational::new(a, &b * &den));
        den *= b;
    }
    Some(out)
}

fn verify_solution(a: &IntMatrix, b: &[BigInt], x: &[BigRational]) -> bool {
    let den = x
        .iter()
        .fold(BigInt::one(), |acc, v| num_integer::lcm(acc, v.denom().clone()));
    let xi: Vec<BigInt> = x.iter().map(|v| v.numer() * (&den / v.denom())).collect();
    (0..a.rows()).all(|i| {
        let mut s = BigInt::zero();
        for (j, xj) in xi.iter().enumerate() {
            let aij = a.get(i, j);
            if aij != 0 {
                s += xj * aij;
            }
        }
        s == &b[i] * &den
    })
}


impl serde::Serialize for IntMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(self.rows()))?;
        for i in 0..self.rows() {
            seq.serialize_element(self.row(i))?;
        }
        seq.end()
    }
}

impl<'de> serde::Deserialize<'de> for IntMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<i64>> = serde::Deserialize::deserialize(d)?;
        IntMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}
