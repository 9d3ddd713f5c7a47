//! Complex-valued functions on a finite abelian group.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{HofaError, Result};
use crate::group::{FiniteAbelianGroup, GroupElement};
use crate::partition::Partition;
use crate::reduce::pairwise_sum;

/// Unimodularity tolerance `| |v| - 1 | <= 1e-9`.
pub const UNIMODULAR_TOL: f64 = 1e-9;

/// A value table indexed by element index.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupFunction {
    group: FiniteAbelianGroup,
    values: Vec<Complex64>,
}

impl GroupFunction {
    pub fn from_values(group: FiniteAbelianGroup, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != group.order() {
            return Err(HofaError::Arity {
                expected: group.order(),
                got: values.len(),
            });
        }
        Ok(Self { group, values })
    }

    pub fn from_fn(group: &FiniteAbelianGroup, f: impl FnMut(usize) -> Complex64) -> Self {
        let values = (0..group.order()).map(f).collect();
        Self {
            group: group.clone(),
            values,
        }
    }

    pub fn from_real(group: &FiniteAbelianGroup, values: &[f64]) -> Result<Self> {
        Self::from_values(
            group.clone(),
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )
    }

    pub fn constant(group: &FiniteAbelianGroup, c: Complex64) -> Self {
        Self::from_fn(group, |_| c)
    }

    pub fn zeros(group: &FiniteAbelianGroup) -> Self {
        Self::constant(group, Complex64::new(0.0, 0.0))
    }

    /// Indicator of a set of element indices.
    pub fn indicator(group: &FiniteAbelianGroup, set: &[usize]) -> Result<Self> {
        let mut values = vec![Complex64::new(0.0, 0.0); group.order()];
        for &i in set {
            if i >= group.order() {
                return Err(crate::error::invalid(format!(
                    "element index {i} out of range"
                )));
            }
            values[i] = Complex64::new(1.0, 0.0);
        }
        Ok(Self {
            group: group.clone(),
            values,
        })
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn at(&self, x: &GroupElement) -> Result<Complex64> {
        Ok(self.values[self.group.index_of(x)?])
    }

    fn same_group(&self, other: &Self) -> Result<()> {
        if self.group != other.group {
            return Err(HofaError::GroupMismatch);
        }
        Ok(())
    }

    fn zip_with(
        &self,
        other: &Self,
        op: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        self.same_group(other)?;
        Ok(Self {
            group: self.group.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        })
    }

    pub fn map(&self, op: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            group: self.group.clone(),
            values: self.values.iter().map(|&v| op(v)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|v| v * c)
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: Complex64, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + c * b)
    }

    /// Normalised pairing `(1/|A|) sum_x f(x) conj(g(x))`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.same_group(other)?;
        Ok(inner_slices(&self.values, &other.values))
    }

    pub fn norm_sq(&self) -> f64 {
        inner_slices(&self.values, &self.values).re.max(0.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn mean(&self) -> Complex64 {
        pairwise_sum(&self.values) / self.values.len() as f64
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest pointwise distance to another function on the same group.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.same_group(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn is_unimodular(&self) -> bool {
        self.values
            .iter()
            .all(|v| (v.norm() - 1.0).abs() <= UNIMODULAR_TOL)
    }

    /// `x -> f(x + t)`.
    pub fn shift(&self, t: &GroupElement) -> Result<Self> {
        let t = self.group.index_of(t)?;
        Ok(self.shift_index(t))
    }

    pub(crate) fn shift_index(&self, t: usize) -> Self {
        Self::from_fn(&self.group, |x| self.values[self.group.add_index(x, t)])
    }

    /// Multiplicative derivative `x -> f(x + t) conj(f(x))`.
    ///
    /// Conjugation stands in for the inverse, which agrees on the unit
    /// circle. Inputs with zeros are accepted; pre-cocycle checks require
    /// unimodular input.
    pub fn delta(&self, t: &GroupElement) -> Result<Self> {
        let t = self.group.index_of(t)?;
        Ok(self.delta_index(t))
    }

    pub(crate) fn delta_index(&self, t: usize) -> Self {
        Self::from_fn(&self.group, |x| {
            self.values[self.group.add_index(x, t)] * self.values[x].conj()
        })
    }

    /// Direct character-sum transform `f^(xi) = <f, chi_xi>`.
    pub fn fourier(&self) -> FourierSpectrum {
        let g = &self.group;
        let l = g.exponent();
        let roots = g.roots_of_unity();
        let n = g.order();
        let coeffs: Vec<Complex64> = (0..n)
            .into_par_iter()
            .map(|xi| {
                let terms: Vec<Complex64> = (0..n)
                    .map(|x| self.values[x] * roots[g.pairing_with(l, xi, x)].conj())
                    .collect();
                pairwise_sum(&terms) / n as f64
            })
            .collect();
        FourierSpectrum {
            group: g.clone(),
            coeffs,
        }
    }

    /// Averages over the cells of a partition.
    pub fn conditional_expectation(&self, partition: &Partition) -> Result<Self> {
        if partition.group() != &self.group {
            return Err(HofaError::GroupMismatch);
        }
        let cells = partition.cells();
        let mut values = vec![Complex64::new(0.0, 0.0); self.values.len()];
        for cell in &cells {
            let part: Vec<Complex64> = cell.iter().map(|&i| self.values[i]).collect();
            let avg = pairwise_sum(&part) / cell.len() as f64;
            for &i in cell {
                values[i] = avg;
            }
        }
        Ok(Self {
            group: self.group.clone(),
            values,
        })
    }
}

pub(crate) fn inner_slices(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let prods: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x * y.conj()).collect();
    pairwise_sum(&prods) / a.len() as f64
}

/// Fourier coefficients indexed by the element index of `xi`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSpectrum {
    group: FiniteAbelianGroup,
    coeffs: Vec<Complex64>,
}

impl FourierSpectrum {
    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn get(&self, xi: &GroupElement) -> Result<Complex64> {
        Ok(self.coeffs[self.group.index_of(xi)?])
    }

    /// `sum_xi |f^(xi)|^2`.
    pub fn energy(&self) -> f64 {
        let sq: Vec<f64> = self.coeffs.iter().map(|c| c.norm_sqr()).collect();
        crate::reduce::pairwise_sum_real(&sq)
    }

    /// `f(x) = sum_xi f^(xi) chi_xi(x)`.
    pub fn inverse(&self) -> GroupFunction {
        let g = &self.group;
        let l = g.exponent();
        let roots = g.roots_of_unity();
        let n = g.order();
        let values: Vec<Complex64> = (0..n)
            .into_par_iter()
            .map(|x| {
                let terms: Vec<Complex64> = (0..n)
                    .map(|xi| self.coeffs[xi] * roots[g.pairing_with(l, xi, x)])
                    .collect();
                pairwise_sum(&terms)
            })
            .collect();
        GroupFunction {
            group: g.clone(),
            values,
        }
    }

    /// CSV rows `xi_index,re,im,magnitude` with a header line.
    pub fn write_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "xi_index,re,im,magnitude")?;
        for (i, c) in self.coeffs.iter().enumerate() {
            writeln!(out, "{},{:.16e},{:.16e},{:.16e}", i, c.re, c.im, c.norm())?;
        }
        Ok(())
    }
}
