//! Truncated power series with exact rational coefficients, and Padé
//! reconstruction.

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::matrix::rat_to_string;
use super::poly::RatPoly;
use crate::error::{Error, Result};

/// a_0 + a_1 t + … + a_N t^N, all arithmetic modulo t^{N+1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerSeries {
    coeffs: Vec<BigRational>,
}

fn int(v: i64) -> BigRational {
    BigRational::from_integer(v.into())
}

impl PowerSeries {
    pub fn new(order: usize, coeffs: Vec<BigRational>) -> Self {
        let mut c = coeffs;
        c.resize(order + 1, BigRational::zero());
        PowerSeries { coeffs: c }
    }

    pub fn from_i64(order: usize, c: &[i64]) -> Self {
        Self::new(order, c.iter().map(|&v| int(v)).collect())
    }

    pub fn from_poly(order: usize, p: &RatPoly) -> Self {
        Self::new(order, p.coeffs().iter().take(order + 1).cloned().collect())
    }

    pub fn one(order: usize) -> Self {
        Self::from_i64(order, &[1])
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> &BigRational {
        &self.coeffs[k]
    }

    fn common(&self, o: &PowerSeries) -> usize {
        self.order().min(o.order())
    }

    pub fn truncate(&self, order: usize) -> Self {
        Self::new(order, self.coeffs.iter().take(order + 1).cloned().collect())
    }

    pub fn add(&self, o: &PowerSeries) -> Self {
        let n = self.common(o);
        Self::new(n, (0..=n).map(|k| &self.coeffs[k] + &o.coeffs[k]).collect())
    }

    pub fn sub(&self, o: &PowerSeries) -> Self {
        let n = self.common(o);
        Self::new(n, (0..=n).map(|k| &self.coeffs[k] - &o.coeffs[k]).collect())
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        Self::new(self.order(), self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, o: &PowerSeries) -> Self {
        let n = self.common(o);
        let mut out = vec![BigRational::zero(); n + 1];
        for i in 0..=n {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..=n - i {
                out[i + j] += &self.coeffs[i] * &o.coeffs[j];
            }
        }
        Self::new(n, out)
    }

    pub fn inverse(&self) -> Result<Self> {
        if self.coeffs[0].is_zero() {
            return Err(Error::Invalid("series with zero constant term is not invertible".into()));
        }
        let n = self.order();
        let inv0 = self.coeffs[0].recip();
        let mut b = vec![BigRational::zero(); n + 1];
        b[0] = inv0.clone();
        for k in 1..=n {
            let mut s = BigRational::zero();
            for j in 1..=k {
                s += &self.coeffs[j] * &b[k - j];
            }
            b[k] = -s * &inv0;
        }
        Ok(Self::new(n, b))
    }

    /// exp(a), requires a_0 = 0. Uses n·b_n = Σ_{k=1..n} k·a_k·b_{n−k}.
    pub fn exp(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::Invalid("exp needs a zero constant term".into()));
        }
        let n = self.order();
        let mut b = vec![BigRational::zero(); n + 1];
        b[0] = BigRational::one();
        for m in 1..=n {
            let mut s = BigRational::zero();
            for k in 1..=m {
                if !self.coeffs[k].is_zero() {
                    s += int(k as i64) * &self.coeffs[k] * &b[m - k];
                }
            }
            b[m] = s / int(m as i64);
        }
        Ok(Self::new(n, b))
    }

    /// log(a), requires a_0 = 1. Uses n·b_n = n·a_n − Σ_{k=1..n−1} k·b_k·a_{n−k}.
    pub fn log(&self) -> Result<Self> {
        if !self.coeffs[0].is_one() {
            return Err(Error::Invalid("log needs constant term 1".into()));
        }
        let n = self.order();
        let mut b = vec![BigRational::zero(); n + 1];
        for m in 1..=n {
            let mut s = int(m as i64) * &self.coeffs[m];
            for k in 1..m {
                s -= int(k as i64) * &b[k] * &self.coeffs[m - k];
            }
            b[m] = s / int(m as i64);
        }
        Ok(Self::new(n, b))
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(rat_to_string).collect()
    }
}

/// exp(−Σ_{n=1..N} a_n t^n / n), to order N.
pub fn zeta_from_traces(traces: &[BigRational]) -> PowerSeries {
    let n = traces.len();
    let mut c = vec![BigRational::zero(); n + 1];
    for (k, a) in traces.iter().enumerate() {
        c[k + 1] = -a / int(k as i64 + 1);
    }
    PowerSeries::new(n, c).exp().expect("constant term is zero")
}

/// Exact Padé reconstruction P/Q with deg P ≤ num_deg, deg Q ≤ den_deg,
/// Q(0) = 1, such that Q·s − P vanishes through the full truncation order.
/// Returns the reduced pair, or None when no such pair exists.
pub fn pade(s: &PowerSeries, num_deg: usize, den_deg: usize) -> Result<Option<(RatPoly, RatPoly)>> {
    let n = s.order();
    if num_deg + den_deg + 1 > n + 1 {
        return Err(Error::Invalid(format!(
            "Padé ({num_deg},{den_deg}) needs order at least {} but the series has order {n}",
            num_deg + den_deg
        )));
    }
    // Unknowns q_1..q_M (q_0 = 1); equations for k = L+1..N:
    //   s_k + Σ_{j=1..M} q_j s_{k−j} = 0
    let m = den_deg;
    let rows: Vec<Vec<BigRational>> = (num_deg + 1..=n)
        .map(|k| {
            let mut row: Vec<BigRational> = (1..=m)
                .map(|j| if j <= k { s.coeff(k - j).clone() } else { BigRational::zero() })
                .collect();
            row.push(-s.coeff(k).clone());
            row
        })
        .collect();
    let Some(q_tail) = solve_consistent(rows, m) else {
        return Ok(None);
    };
    let mut q = vec![BigRational::one()];
    q.extend(q_tail);
    let q = RatPoly::new(q);
    let prod = PowerSeries::from_poly(n, &q).mul(s);
    let p = RatPoly::new(prod.coeffs().iter().take(num_deg + 1).cloned().collect());
    let g = p.gcd(&q);
    let (mut p, mut q) = if g.degree().unwrap_or(0) > 0 {
        (p.divrem(&g)?.0, q.divrem(&g)?.0)
    } else {
        (p, q)
    };
    let q0 = q.coeff(0);
    if !q0.is_one() && !q0.is_zero() {
        let inv = q0.recip();
        p = p.scale(&inv);
        q = q.scale(&inv);
    }
    Ok(Some((p, q)))
}

/// Any solution of an augmented linear system (last column is the rhs), or
/// None when inconsistent. Free variables are set to zero.
fn solve_consistent(mut rows: Vec<Vec<BigRational>>, nvars: usize) -> Option<Vec<BigRational>> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..nvars {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for v in rows[r].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= &f * pv;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if rows[r..].iter().any(|row| !row[nvars].is_zero()) {
        return None;
    }
    let mut x = vec![BigRational::zero(); nvars];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = rows[i][nvars].clone();
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn neg_log_geometric(order: usize, q: i64) -> PowerSeries {
        // −Σ (q t)^n / n
        let c = (0..=order)
            .map(|n| {
                if n == 0 {
                    BigRational::zero()
                } else {
                    -BigRational::new(num_traits::pow(num_bigint::BigInt::from(q), n), n.into())
                }
            })
            .collect();
        PowerSeries::new(order, c)
    }

    #[test]
    fn exp_log_inverse_pair() {
        let s = PowerSeries::from_i64(10, &[1, 1]);
        assert_eq!(s.log().unwrap().exp().unwrap(), s);
    }

    #[test]
    fn exp_of_log_one_minus_2t() {
        let e = neg_log_geometric(12, 2).exp().unwrap();
        assert_eq!(e, PowerSeries::from_i64(12, &[1, -2]));
    }

    #[test]
    fn product() {
        let a = PowerSeries::from_i64(6, &[1, 1]);
        let b = PowerSeries::from_i64(6, &[1, -1]);
        assert_eq!(a.mul(&b), PowerSeries::from_i64(6, &[1, 0, -1]));
    }

    #[test]
    fn preconditions() {
        assert!(PowerSeries::from_i64(3, &[1]).exp().is_err());
        assert!(PowerSeries::from_i64(3, &[2]).log().is_err());
    }

    #[test]
    fn zeta_examples() {
        let pow2: Vec<BigRational> = (1..=8).map(|n| int(1 << n)).collect();
        assert_eq!(zeta_from_traces(&pow2), PowerSeries::from_i64(8, &[1, -2]));
        let zeros = vec![BigRational::zero(); 6];
        assert_eq!(zeta_from_traces(&zeros), PowerSeries::one(6));
        // a_n = 2·3^n − 1 → (1−3t)²/(1−t)
        let a: Vec<BigRational> = (1..=9).map(|n| int(2 * 3i64.pow(n) - 1)).collect();
        let z = zeta_from_traces(&a);
        let num = PowerSeries::from_i64(9, &[1, -6, 9]);
        let den = PowerSeries::from_i64(9, &[1, -1]);
        assert_eq!(z, num.mul(&den.inverse().unwrap()));
    }

    #[test]
    fn pade_examples() {
        // 1/(1−t)^2 = Σ (n+1) t^n
        let s = PowerSeries::from_i64(8, &(1..=9).collect::<Vec<i64>>());
        let (p, q) = pade(&s, 0, 2).unwrap().unwrap();
        assert_eq!(p, RatPoly::one());
        assert_eq!(q, RatPoly::from_i64(&[1, -2, 1]));
        let s = PowerSeries::from_i64(8, &[1, -2]);
        let (p, q) = pade(&s, 1, 0).unwrap().unwrap();
        assert_eq!((p, q), (RatPoly::from_i64(&[1, -2]), RatPoly::one()));
        // a non-rational tail: 1/(1−t)^2 but with one coefficient disturbed
        let mut c: Vec<i64> = (1..=9).collect();
        c[7] += 1;
        assert_eq!(pade(&PowerSeries::from_i64(8, &c), 0, 2).unwrap(), None);
    }
}
