//! Splitting a recurrent sequence into Σ w_i λ_i^n.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use super::recurrence::Recurrence;
use super::roots::root_clusters;
use crate::error::{Error, Result};

const VANDERMONDE_COND_LIMIT: f64 = 1e13;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpSumTerm {
    pub lambda: [f64; 2],
    pub weight: [f64; 2],
    /// The weight rounded to an integer, when it is one within 1e-6.
    pub multiplicity: Option<i64>,
}

impl ExpSumTerm {
    pub fn lambda(&self) -> Complex64 {
        Complex64::new(self.lambda[0], self.lambda[1])
    }

    pub fn weight(&self) -> Complex64 {
        Complex64::new(self.weight[0], self.weight[1])
    }
}

/// a_n ≈ Σ w_i λ_i^n for n = 1, 2, … over the fitted prefix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpSumDecomposition {
    pub terms: Vec<ExpSumTerm>,
    /// max_n |Σ w_i λ_i^n − a_n| / max(1, |a_n|) over the prefix.
    pub reconstruction_error: f64,
    /// Ratio of largest to smallest pivot in the Vandermonde solve.
    pub condition_estimate: f64,
}

impl ExpSumDecomposition {
    pub fn eval(&self, n: u32) -> Complex64 {
        self.terms
            .iter()
            .map(|t| t.weight() * t.lambda().powu(n))
            .sum()
    }
}

fn solve_complex(mut a: Vec<Vec<Complex64>>, mut b: Vec<Complex64>) -> Result<(Vec<Complex64>, f64)> {
    let n = b.len();
    let mut max_piv: f64 = 0.0;
    let mut min_piv = f64::INFINITY;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[i][k].norm().partial_cmp(&a[j][k].norm()).unwrap())
            .unwrap();
        a.swap(k, p);
        b.swap(k, p);
        let piv = a[k][k];
        max_piv = max_piv.max(piv.norm());
        min_piv = min_piv.min(piv.norm());
        if piv.norm() == 0.0 {
            return Err(Error::IllConditioned("singular Vandermonde system".into()));
        }
        for i in k + 1..n {
            let f = a[i][k] / piv;
            for j in k..n {
                let t = a[k][j];
                a[i][j] -= f * t;
            }
            let t = b[k];
            b[i] -= f * t;
        }
    }
    let mut x = vec![Complex64::zero(); n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in i + 1..n {
            s -= a[i][j] * x[j];
        }
        x[i] = s / a[i][i];
    }
    Ok((x, max_piv / min_piv))
}

/// Roots of the recurrence's characteristic polynomial with weights solved
/// from the Vandermonde system on the first `order` terms; the sequence is
/// read as a_1, a_2, ….
pub fn exp_sum_decompose(rec: &Recurrence, prefix: &[BigRational]) -> Result<ExpSumDecomposition> {
    let r = rec.order();
    if r == 0 {
        return Ok(ExpSumDecomposition {
            terms: Vec::new(),
            reconstruction_error: prefix
                .iter()
                .map(|a| a.to_f64().unwrap_or(f64::INFINITY).abs())
                .fold(0.0, f64::max),
            condition_estimate: 1.0,
        });
    }
    if prefix.len() < r {
        return Err(Error::Invalid(format!("prefix of length {} is shorter than the order {r}", prefix.len())));
    }
    if !rec.fits(prefix) {
        return Err(Error::Invalid("recurrence does not fit the prefix".into()));
    }
    let clusters = root_clusters(&rec.characteristic(), 1e-12)?;
    if let Some(c) = clusters.iter().find(|c| c.multiplicity > 1) {
        return Err(Error::IllConditioned(format!(
            "characteristic root {} is repeated (multiplicity {}): not a pure exponential sum",
            c.value, c.multiplicity
        )));
    }
    if clusters.iter().any(|c| c.value.norm() == 0.0) {
        return Err(Error::IllConditioned("characteristic root 0: transient terms".into()));
    }
    let lambdas: Vec<Complex64> = clusters.iter().map(|c| c.value).collect();
    let a: Vec<Vec<Complex64>> = (1..=r)
        .map(|n| lambdas.iter().map(|l| l.powu(n as u32)).collect())
        .collect();
    let rhs: Vec<Complex64> = prefix[..r]
        .iter()
        .map(|v| Complex64::new(v.to_f64().unwrap_or(f64::NAN), 0.0))
        .collect();
    let (w, cond) = solve_complex(a, rhs)?;
    if !(cond < VANDERMONDE_COND_LIMIT) {
        return Err(Error::IllConditioned(format!(
            "Vandermonde pivot ratio {cond:.3e} exceeds {VANDERMONDE_COND_LIMIT:.0e}"
        )));
    }
    let terms: Vec<ExpSumTerm> = lambdas
        .iter()
        .zip(&w)
        .map(|(l, w)| {
            let m = w.re.round();
            let integral = (w - Complex64::new(m, 0.0)).norm() < 1e-6 * w.norm().max(1.0);
            ExpSumTerm {
                lambda: [l.re, l.im],
                weight: [w.re, w.im],
                multiplicity: if integral { Some(m as i64) } else { None },
            }
        })
        .collect();
    let mut dec = ExpSumDecomposition {
        terms,
        reconstruction_error: 0.0,
        condition_estimate: cond,
    };
    let mut err: f64 = 0.0;
    for (i, a) in prefix.iter().enumerate() {
        let av = a.to_f64().unwrap_or(f64::NAN);
        let got = dec.eval(i as u32 + 1);
        err = err.max((got - Complex64::new(av, 0.0)).norm() / av.abs().max(1.0));
    }
    dec.reconstruction_error = err;
    Ok(dec)
}

#[cfg(test)]
mod tests {
    use super::super::recurrence::berlekamp_massey;
    use super::*;

    fn seq(f: impl Fn(u32) -> i64, n: u32) -> Vec<BigRational> {
        (1..=n).map(|k| BigRational::from_integer(f(k).into())).collect()
    }

    fn sorted_terms(d: &ExpSumDecomposition) -> Vec<(f64, Option<i64>)> {
        let mut v: Vec<(f64, Option<i64>)> = d.terms.iter().map(|t| (t.lambda[0], t.multiplicity)).collect();
        v.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        v
    }

    #[test]
    fn two_pow_plus_one() {
        let s = seq(|n| 2i64.pow(n) + 1, 8);
        let r = berlekamp_massey(&s);
        let d = exp_sum_decompose(r.recurrence().unwrap(), &s).unwrap();
        let t = sorted_terms(&d);
        assert!((t[0].0 - 1.0).abs() < 1e-12 && (t[1].0 - 2.0).abs() < 1e-12);
        assert_eq!((t[0].1, t[1].1), (Some(1), Some(1)));
        assert!(d.reconstruction_error < 1e-12);
    }

    #[test]
    fn three_pow_minus_one() {
        let s = seq(|n| 3i64.pow(n) - 1, 8);
        let r = berlekamp_massey(&s);
        let d = exp_sum_decompose(r.recurrence().unwrap(), &s).unwrap();
        let t = sorted_terms(&d);
        assert_eq!((t[0].1, t[1].1), (Some(-1), Some(1)));
        assert!((t[1].0 - 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_sequence_empty() {
        let s = seq(|_| 0, 6);
        let r = berlekamp_massey(&s);
        let d = exp_sum_decompose(r.recurrence().unwrap(), &s).unwrap();
        assert!(d.terms.is_empty());
    }

    #[test]
    fn repeated_root_reported() {
        let s = seq(|n| n as i64 * 2i64.pow(n), 8);
        let r = berlekamp_massey(&s);
        assert!(matches!(
            exp_sum_decompose(r.recurrence().unwrap(), &s),
            Err(Error::IllConditioned(_))
        ));
    }
}
