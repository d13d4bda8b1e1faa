//! Exact Berlekamp–Massey over Q.

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::matrix::rat_to_string;

/// a_{n+r} = Σ_{i=1..r} c_i a_{n+r-i}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Recurrence {
    pub coeffs: Vec<BigRational>,
    pub prefix: Vec<BigRational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BmOutcome {
    Found(Recurrence),
    /// No recurrence of order ≤ `max_order` fits the prefix.
    NoneUpTo { max_order: usize },
}

impl BmOutcome {
    pub fn recurrence(&self) -> Option<&Recurrence> {
        match self {
            BmOutcome::Found(r) => Some(r),
            BmOutcome::NoneUpTo { .. } => None,
        }
    }
}

impl Recurrence {
    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    /// Whether the recurrence reproduces every term of `seq`.
    pub fn fits(&self, seq: &[BigRational]) -> bool {
        let r = self.order();
        (r..seq.len()).all(|n| self.next_from(&seq[n - r..n]) == seq[n])
    }

    fn next_from(&self, window: &[BigRational]) -> BigRational {
        let r = self.order();
        let mut s = BigRational::zero();
        for i in 1..=r {
            s += &self.coeffs[i - 1] * &window[r - i];
        }
        s
    }

    /// The next `count` terms after `seq`.
    pub fn predict(&self, seq: &[BigRational], count: usize) -> Vec<BigRational> {
        let r = self.order();
        let mut all = seq.to_vec();
        for _ in 0..count {
            let next = if r == 0 {
                BigRational::zero()
            } else {
                self.next_from(&all[all.len() - r..])
            };
            all.push(next);
        }
        all.split_off(seq.len())
    }

    /// Characteristic polynomial x^r − c_1 x^{r−1} − … − c_r, constant first.
    pub fn characteristic(&self) -> super::poly::RatPoly {
        let r = self.order();
        let mut c = vec![BigRational::zero(); r + 1];
        c[r] = BigRational::one();
        for i in 1..=r {
            c[r - i] = -self.coeffs[i - 1].clone();
        }
        super::poly::RatPoly::new(c)
    }

    pub fn to_json(&self) -> RecurrenceJson {
        RecurrenceJson {
            order: self.order(),
            coeffs: self.coeffs.iter().map(rat_to_string).collect(),
            fitted_on: self.prefix.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecurrenceJson {
    pub order: usize,
    pub coeffs: Vec<String>,
    pub fitted_on: usize,
}

/// Minimal linear recurrence of the whole sequence. A result of order L is
/// only reported when 2L ≤ len, the range in which it is uniquely determined.
pub fn berlekamp_massey(seq: &[BigRational]) -> BmOutcome {
    let n = seq.len();
    let mut c: Vec<BigRational> = vec![BigRational::one()];
    let mut b: Vec<BigRational> = vec![BigRational::one()];
    let mut l = 0usize;
    let mut m = 1usize;
    let mut bd = BigRational::one();
    for i in 0..n {
        let mut d = seq[i].clone();
        for j in 1..=l {
            d += &c[j] * &seq[i - j];
        }
        if d.is_zero() {
            m += 1;
            continue;
        }
        let coef = &d / &bd;
        let t = c.clone();
        if c.len() < b.len() + m {
            c.resize(b.len() + m, BigRational::zero());
        }
        for (j, bj) in b.iter().enumerate() {
            c[j + m] -= &coef * bj;
        }
        if 2 * l <= i {
            l = i + 1 - l;
            b = t;
            bd = d;
            m = 1;
        } else {
            m += 1;
        }
    }
    if 2 * l > n {
        return BmOutcome::NoneUpTo { max_order: n / 2 };
    }
    c.resize(l + 1, BigRational::zero());
    BmOutcome::Found(Recurrence {
        coeffs: c[1..].iter().map(|v| -v).collect(),
        prefix: seq.to_vec(),
    })
}

/// Fit on all but the last `hold` terms, then predict them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Holdout {
    pub length: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recurrence: Option<RecurrenceJson>,
    pub predicted: Vec<String>,
    pub actual: Vec<String>,
    /// None when the fitting window is too short to determine a recurrence
    pub matches: Option<bool>,
}

pub fn holdout_check(seq: &[BigRational], hold: usize) -> Holdout {
    let actual: Vec<String> = seq[seq.len().saturating_sub(hold)..].iter().map(rat_to_string).collect();
    let mut out = Holdout { length: seq.len(), recurrence: None, predicted: Vec::new(), actual, matches: None };
    if hold == 0 || seq.len() <= hold {
        return out;
    }
    let fit = &seq[..seq.len() - hold];
    if let BmOutcome::Found(r) = berlekamp_massey(fit) {
        let pred = r.predict(fit, hold);
        out.matches = Some(pred[..] == seq[seq.len() - hold..]);
        out.predicted = pred.iter().map(rat_to_string).collect();
        out.recurrence = Some(r.to_json());
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableRecurrences {
    pub rows: Vec<Holdout>,
    pub columns: Vec<Holdout>,
}

impl TableRecurrences {
    /// Every fitted line predicted its withheld term, and at least one line was fitted.
    pub fn all_predicted(&self) -> bool {
        let fitted: Vec<bool> = self.rows.iter().chain(&self.columns).filter_map(|h| h.matches).collect();
        !fitted.is_empty() && fitted.iter().all(|&b| b)
    }
}

/// Holdout check along every row and every column of a rectangular table.
pub fn table_recurrences_rat(values: &[Vec<BigRational>]) -> TableRecurrences {
    let rows = values.iter().map(|r| holdout_check(r, 1)).collect();
    let width = values.first().map_or(0, |r| r.len());
    let columns = (0..width)
        .map(|j| holdout_check(&values.iter().map(|r| r[j].clone()).collect::<Vec<_>>(), 1))
        .collect();
    TableRecurrences { rows, columns }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rs(v: &[i64]) -> Vec<BigRational> {
        v.iter().map(|&x| BigRational::from_integer(x.into())).collect()
    }

    #[test]
    fn geometric() {
        let r = berlekamp_massey(&rs(&[1, 2, 4, 8, 16]));
        let r = r.recurrence().unwrap();
        assert_eq!(r.coeffs, rs(&[2]));
    }

    #[test]
    fn three_pow_minus_one() {
        let seq = rs(&[2, 8, 26, 80, 242]);
        let r = berlekamp_massey(&seq);
        let r = r.recurrence().unwrap();
        assert_eq!(r.coeffs, rs(&[4, -3]));
        // independent Hankel oracle: solve [2 8; 8 26][c2 c1]' = [26 80]'
        // det = 52 - 64 = -12; c2 = (26*26 - 8*80)/-12 = -3; c1 = (2*80 - 8*26)/-12 = 4
        assert_eq!(r.predict(&seq, 1), rs(&[728]));
    }

    #[test]
    fn zero_sequence() {
        let r = berlekamp_massey(&rs(&[0, 0, 0, 0]));
        assert_eq!(r.recurrence().unwrap().order(), 0);
    }

    #[test]
    fn too_short_prefix_is_none() {
        // 1,0,0,0,0,1 needs order 6 > 3
        assert_eq!(
            berlekamp_massey(&rs(&[1, 0, 0, 0, 0, 1])),
            BmOutcome::NoneUpTo { max_order: 3 }
        );
    }
}
