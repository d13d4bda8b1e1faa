//! Characteristic polynomials det(xI − M).
//!
//! Small matrices use the division-free Berkowitz recurrence over Z. Larger
//! ones go through Hessenberg reduction modulo enough 62-bit primes to cover
//! the coefficient bound, followed by Chinese remaindering.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::matrix::{IntMatrix, RatMatrix};
use super::modp::{self, PrimeStream};
use super::poly::RatPoly;
use crate::error::{Error, Result};

/// Above this dimension the multi-modular route is used.
pub const BERKOWITZ_MAX_DIM: usize = 24;

/// Berkowitz: coefficients of det(xI − A), constant term first.
pub fn berkowitz(a: &[Vec<BigInt>]) -> Vec<BigInt> {
    let n = a.len();
    if n == 0 {
        return vec![BigInt::one()];
    }
    // c holds coefficients highest degree first
    let mut c: Vec<BigInt> = vec![BigInt::one(), -a[0][0].clone()];
    for r in 1..n {
        // leading r×r block is a[0..r][0..r]; new row/col index r
        let row: Vec<&BigInt> = (0..r).map(|j| &a[r][j]).collect();
        let mut v: Vec<BigInt> = (0..r).map(|i| a[i][r].clone()).collect();
        let mut toeplitz = Vec::with_capacity(r + 2);
        toeplitz.push(BigInt::one());
        toeplitz.push(-a[r][r].clone());
        for _ in 0..r {
            let dot: BigInt = row.iter().zip(&v).map(|(x, y)| *x * y).sum();
            toeplitz.push(-dot);
            v = (0..r)
                .map(|i| (0..r).map(|j| &a[i][j] * &v[j]).sum())
                .collect();
        }
        // new c = T · c, T lower-triangular Toeplitz of size (r+2)×(r+1)
        let mut nc = vec![BigInt::zero(); r + 2];
        for (i, slot) in nc.iter_mut().enumerate() {
            for (j, cj) in c.iter().enumerate() {
                if i >= j {
                    *slot += &toeplitz[i - j] * cj;
                }
            }
        }
        c = nc;
    }
    c.reverse();
    c
}

/// Multi-modular characteristic polynomial of an integer matrix, constant
/// term first. Coefficients are bounded by (1+R)^n with R the largest
/// absolute row sum.
pub fn charpoly_multimodular(a: &[Vec<BigInt>]) -> Vec<BigInt> {
    let n = a.len();
    let r: f64 = a
        .iter()
        .map(|row| row.iter().map(|v| v.abs().to_f64().unwrap_or(f64::MAX)).sum::<f64>())
        .fold(0.0, f64::max);
    let bits = n as f64 * (1.0 + r).log2() + 2.0;
    let mut res: Vec<BigInt> = vec![BigInt::zero(); n + 1];
    let mut m = BigInt::one();
    let mut have = 0.0f64;
    for p in PrimeStream::new() {
        let am: Vec<u64> = a.iter().flatten().map(|v| modp::reduce_big(v, p)).collect();
        let cp = modp::charpoly_mod(&am, n, p);
        let pb = BigInt::from(p);
        if m.is_one() {
            res = cp.iter().map(|&c| BigInt::from(c)).collect();
        } else {
            let minv = BigInt::from(modp::invmod(modp::reduce_big(&m, p), p));
            for (r, &s) in res.iter_mut().zip(&cp) {
                let rp = modp::reduce_big(r, p);
                let diff = BigInt::from(modp::submod(s, rp, p));
                let t = (diff * &minv).mod_floor(&pb);
                *r += &m * t;
            }
        }
        m *= &pb;
        have += (p as f64).log2();
        if have > bits + 1.0 {
            break;
        }
    }
    res.iter().map(|r| modp::symmetric(r, &m)).collect()
}

pub fn charpoly_int(m: &IntMatrix) -> Result<Vec<BigInt>> {
    if !m.is_square() {
        return Err(Error::Dimension("characteristic polynomial of a non-square matrix".into()));
    }
    let big = m.to_big();
    Ok(if m.rows() <= BERKOWITZ_MAX_DIM {
        berkowitz(&big)
    } else {
        charpoly_multimodular(&big)
    })
}

/// Types that have an exact characteristic polynomial.
pub trait CharPoly {
    fn charpoly(&self) -> Result<RatPoly>;
}

impl CharPoly for IntMatrix {
    fn charpoly(&self) -> Result<RatPoly> {
        Ok(RatPoly::from_bigints(&charpoly_int(self)?))
    }
}

impl CharPoly for RatMatrix {
    fn charpoly(&self) -> Result<RatPoly> {
        if !self.is_square() {
            return Err(Error::Dimension("characteristic polynomial of a non-square matrix".into()));
        }
        let n = self.rows();
        // charpoly(A)(x) = L^{-n} charpoly(L·A)(L x)
        let (l, b) = self.clear_denominators();
        let cb = if n <= BERKOWITZ_MAX_DIM {
            berkowitz(&b)
        } else {
            charpoly_multimodular(&b)
        };
        let lr = BigRational::from_integer(l);
        let coeffs = cb
            .into_iter()
            .enumerate()
            .map(|(k, c)| {
                BigRational::from_integer(c) / num_traits::pow(lr.clone(), n - k)
            })
            .collect();
        Ok(RatPoly::new(coeffs))
    }
}

pub fn charpoly<M: CharPoly>(m: &M) -> Result<RatPoly> {
    m.charpoly()
}

/// Evaluates p(M) exactly; used for Cayley–Hamilton checks.
pub fn eval_at_matrix(p: &RatPoly, m: &RatMatrix) -> RatMatrix {
    let n = m.rows();
    let mut acc = RatMatrix::zeros(n, n);
    for c in p.coeffs().iter().rev() {
        acc = acc.mul(m).add(&RatMatrix::identity(n).scale(c));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn small_examples() {
        let i2 = IntMatrix::identity(2);
        assert_eq!(charpoly(&i2).unwrap(), RatPoly::from_i64(&[1, -2, 1]));
        let q = 7;
        let a = 3;
        let m = IntMatrix::from_rows(&[vec![0, -q], vec![1, a]]).unwrap();
        assert_eq!(charpoly(&m).unwrap(), RatPoly::from_i64(&[q, -a, 1]));
    }

    #[test]
    fn multimodular_agrees_with_berkowitz() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [3usize, 7, 15, 30] {
            let rows: Vec<Vec<i64>> = (0..n)
                .map(|_| (0..n).map(|_| rng.gen_range(-50..=50)).collect())
                .collect();
            let m = IntMatrix::from_rows(&rows).unwrap();
            let big = m.to_big();
            assert_eq!(berkowitz(&big), charpoly_multimodular(&big), "n = {n}");
        }
    }

    #[test]
    fn rational_matrix_cayley_hamilton() {
        let m = RatMatrix::from_vec(
            2,
            2,
            vec![
                BigRational::new(1.into(), 2.into()),
                BigRational::new(1.into(), 3.into()),
                BigRational::new((-2).into(), 5.into()),
                BigRational::from_integer(4.into()),
            ],
        )
        .unwrap();
        let p = charpoly(&m).unwrap();
        assert!(p.is_monic());
        let z = eval_at_matrix(&p, &m);
        assert_eq!(z, RatMatrix::zeros(2, 2));
    }
}
