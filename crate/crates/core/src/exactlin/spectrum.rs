//! Eigenvalues of exact matrices through their characteristic polynomials.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use super::charpoly::CharPoly;
use super::poly::RatPoly;
use super::roots::{root_clusters, RootCluster};
use crate::error::Result;

#[derive(Debug, Clone)]
pub struct Spectrum {
    pub charpoly: RatPoly,
    pub clusters: Vec<RootCluster>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumSummary {
    pub degree: usize,
    pub certified_real: bool,
    pub max_abs_imag: f64,
    /// Upper bound on |λ| (from isolating intervals for certified real roots).
    pub max_abs: f64,
    pub distinct: usize,
    /// multiplicity → number of distinct eigenvalues with that multiplicity
    pub multiplicity_histogram: BTreeMap<usize, usize>,
    /// degrees of the square-free factors that carry roots
    pub factor_degrees: Vec<usize>,
}

impl Spectrum {
    pub fn of<M: CharPoly>(m: &M) -> Result<Self> {
        let charpoly = m.charpoly()?;
        let clusters = root_clusters(&charpoly, 1e-10)?;
        Ok(Spectrum { charpoly, clusters })
    }

    pub fn degree(&self) -> usize {
        self.charpoly.degree().unwrap_or(0)
    }

    /// Every root was isolated on the real line by exact arithmetic.
    pub fn certified_real(&self) -> bool {
        let real: usize = self
            .clusters
            .iter()
            .filter(|c| c.real_bounds.is_some())
            .map(|c| c.multiplicity)
            .sum();
        real == self.degree()
    }

    pub fn max_abs_imag(&self) -> f64 {
        self.clusters
            .iter()
            .map(|c| if c.real_bounds.is_some() { 0.0 } else { c.value.im.abs() })
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.clusters
            .iter()
            .map(|c| match c.real_bounds {
                Some((lo, hi)) => lo.abs().max(hi.abs()),
                None => c.value.norm(),
            })
            .fold(0.0, f64::max)
    }

    /// Eigenvalues repeated by multiplicity, sorted by real part.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        let mut v: Vec<Complex64> = self
            .clusters
            .iter()
            .flat_map(|c| std::iter::repeat(c.value).take(c.multiplicity))
            .collect();
        v.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        v
    }

    /// Distance from `z` to the nearest eigenvalue.
    pub fn distance_to(&self, z: Complex64) -> f64 {
        self.clusters
            .iter()
            .map(|c| (c.value - z).norm())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn summary(&self) -> SpectrumSummary {
        let mut hist = BTreeMap::new();
        for c in &self.clusters {
            *hist.entry(c.multiplicity).or_insert(0) += 1;
        }
        let mut factor_degrees: Vec<usize> = self.clusters.iter().map(|c| c.factor_degree).collect();
        factor_degrees.sort_unstable();
        factor_degrees.dedup();
        SpectrumSummary {
            degree: self.degree(),
            certified_real: self.certified_real(),
            max_abs_imag: self.max_abs_imag(),
            max_abs: self.max_abs(),
            distinct: self.clusters.len(),
            multiplicity_histogram: hist,
            factor_degrees,
        }
    }
}
