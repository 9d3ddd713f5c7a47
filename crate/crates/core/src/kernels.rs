//! Kernels on `A x A`: the finite Hilbert-Schmidt algebra.
//!
//! A kernel `K` acts by `(K f)(x) = E_y K(x, y) f(y)`, so composition is
//! `(K1 K2)(x, y) = E_z K1(x, z) K2(z, y)`, the unit is `|A| [x = y]` and
//! the Hilbert-Schmidt inner product is `E_{x,y} K1 conj(K2)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, HofaError, Result};
use crate::gfunc::GroupFunction;
use crate::group::FiniteAbelianGroup;
use crate::limits::Limits;
use crate::phases::{
    phase_dictionary_with, prime_power_shape, EvaluatedFamily, PhaseSpan, PolynomialPhase,
};
use crate::reduce::pairwise_sum;

/// Tolerance for the self-adjointness precondition of the eigensolver.
pub const SELF_ADJOINT_TOL: f64 = 1e-9;
/// Eigenvalues closer than this are one eigenspace.
pub const EIGEN_CLUSTER_TOL: f64 = 1e-8;
/// Eigenvalues at most this large in magnitude count as zero.
pub const EIGEN_ZERO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    group: FiniteAbelianGroup,
    values: Vec<Complex64>,
}

impl Kernel {
    /// Row-major table, `values[x * |A| + y] = K(x, y)`.
    pub fn from_values(group: FiniteAbelianGroup, values: Vec<Complex64>) -> Result<Self> {
        let n = group.order();
        if values.len() != n * n {
            return Err(HofaError::Arity {
                expected: n * n,
                got: values.len(),
            });
        }
        Ok(Self { group, values })
    }

    pub fn from_fn(
        group: &FiniteAbelianGroup,
        mut f: impl FnMut(usize, usize) -> Complex64,
    ) -> Self {
        let n = group.order();
        let values = (0..n * n).map(|i| f(i / n, i % n)).collect();
        Self {
            group: group.clone(),
            values,
        }
    }

    pub fn zeros(group: &FiniteAbelianGroup) -> Self {
        Self::from_fn(group, |_, _| Complex64::new(0.0, 0.0))
    }

    /// The unit of composition, `|A| [x = y]`.
    pub fn identity(group: &FiniteAbelianGroup) -> Self {
        let n = group.order() as f64;
        Self::from_fn(group, |x, y| {
            Complex64::new(if x == y { n } else { 0.0 }, 0.0)
        })
    }

    /// `K(x, y) = f(x) conj(g(y))`.
    pub fn outer(f: &GroupFunction, g: &GroupFunction) -> Result<Self> {
        if f.group() != g.group() {
            return Err(HofaError::GroupMismatch);
        }
        let (a, b) = (f.values(), g.values());
        Ok(Self::from_fn(f.group(), |x, y| a[x] * b[y].conj()))
    }

    /// `K(x, y) = g(y - x)`, commuting with all translations.
    pub fn shift_invariant(g: &GroupFunction) -> Self {
        let group = g.group();
        Self::from_fn(group, |x, y| g.values()[group.sub_index(y, x)])
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn at(&self, x: usize, y: usize) -> Complex64 {
        self.values[x * self.group.order() + y]
    }

    fn same_group(&self, other: &Self) -> Result<()> {
        if self.group != other.group {
            return Err(HofaError::GroupMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_group(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        Self::from_values(self.group.clone(), values)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            group: self.group.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.same_group(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// `(K1 K2)(x, y) = E_z K1(x, z) K2(z, y)`, rows computed in parallel.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.same_group(other)?;
        let n = self.group.order();
        let inv = 1.0 / n as f64;
        let values: Vec<Complex64> = (0..n)
            .into_par_iter()
            .flat_map_iter(|x| {
                let row = &self.values[x * n..(x + 1) * n];
                (0..n).map(move |y| {
                    let terms: Vec<Complex64> =
                        (0..n).map(|z| row[z] * other.values[z * n + y]).collect();
                    pairwise_sum(&terms) * inv
                })
            })
            .collect();
        Self::from_values(self.group.clone(), values)
    }

    /// `K*(x, y) = conj(K(y, x))`.
    pub fn adjoint(&self) -> Self {
        let n = self.group.order();
        Self::from_fn(&self.group, |x, y| self.values[y * n + x].conj())
    }

    /// `E_{x,y} K1(x, y) conj(K2(x, y))`.
    pub fn hs_inner(&self, other: &Self) -> Result<Complex64> {
        self.same_group(other)?;
        let terms: Vec<Complex64> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .collect();
        Ok(pairwise_sum(&terms) / terms.len() as f64)
    }

    pub fn hs_norm(&self) -> f64 {
        self.hs_inner(self).expect("same group").re.max(0.0).sqrt()
    }

    /// `max |K(x, y) - conj(K(y, x))|`.
    pub fn self_adjoint_deviation(&self) -> f64 {
        self.max_abs_diff(&self.adjoint()).expect("same group")
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.self_adjoint_deviation() <= 1e-12
    }

    /// `(K f)(x) = E_y K(x, y) f(y)`.
    pub fn apply(&self, f: &GroupFunction) -> Result<GroupFunction> {
        if f.group() != &self.group {
            return Err(HofaError::GroupMismatch);
        }
        let n = self.group.order();
        let values: Vec<Complex64> = (0..n)
            .into_par_iter()
            .map(|x| {
                let terms: Vec<Complex64> = (0..n)
                    .map(|y| self.values[x * n + y] * f.values()[y])
                    .collect();
                pairwise_sum(&terms) / n as f64
            })
            .collect();
        GroupFunction::from_values(self.group.clone(), values)
    }
}

fn check_level(group: &FiniteAbelianGroup, k: u32) -> Result<()> {
    let (p, _) = prime_power_shape(group)
        .ok_or_else(|| invalid("kernel levels need Z_p^n with p an odd prime"))?;
    if k == 0 || k > p - 1 {
        return Err(invalid(format!("level {k} must lie in 1..={}", p - 1)));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MembershipReport {
    /// Largest L2 distance of `t -> K(x + t, y + t)` from the phase span.
    pub max_residual: f64,
    pub passed: bool,
}

/// Tests whether every diagonal slice `t -> K(x + t, y + t)` lies within
/// `tol` of the span of phases of degree `<= k - 1`.
///
/// The slice of `(x + s, y + s)` is a translate of the slice of `(x, y)`
/// and the span is translation invariant, so one anchor `(0, d)` per
/// diagonal orbit is checked.
pub fn ck_membership_report(kernel: &Kernel, k: u32, tol: f64) -> Result<MembershipReport> {
    check_level(&kernel.group, k)?;
    let span = PhaseSpan::new(&kernel.group, k - 1)?;
    let group = &kernel.group;
    let n = group.order();
    let residuals: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|d| {
            let slice: Vec<Complex64> = (0..n)
                .map(|t| kernel.at(t, group.add_index(d, t)))
                .collect();
            span.residual_values(&slice)
        })
        .collect();
    let max_residual = residuals.into_iter().fold(0.0, f64::max);
    Ok(MembershipReport {
        max_residual,
        passed: max_residual <= tol,
    })
}

pub fn ck_membership(kernel: &Kernel, k: u32, tol: f64) -> Result<bool> {
    Ok(ck_membership_report(kernel, k, tol)?.passed)
}

fn pair_kernel_by(f: &GroupFunction, g: &GroupFunction, k: u32, conj_g: bool) -> Result<Kernel> {
    if f.group() != g.group() {
        return Err(HofaError::GroupMismatch);
    }
    let group = f.group();
    check_level(group, k)?;
    let span = PhaseSpan::new(group, k - 1)?;
    let n = group.order();
    let (a, b) = (f.values(), g.values());
    // projected[d][s] = e(s, s + d)
    let projected: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|d| {
            let h: Vec<Complex64> = (0..n)
                .map(|t| {
                    let gv = b[group.add_index(d, t)];
                    a[t] * if conj_g { gv.conj() } else { gv }
                })
                .collect();
            span.project_values(&h)
        })
        .collect();
    Ok(Kernel::from_fn(group, |x, y| {
        projected[group.sub_index(y, x)][x]
    }))
}

/// `e(f, g)(x, y)`: the projection of `t -> f(x + t) g(y + t)` onto the
/// phases of degree `<= k - 1`, read at `t = 0`.
pub fn pair_kernel(f: &GroupFunction, g: &GroupFunction, k: u32) -> Result<Kernel> {
    pair_kernel_by(f, g, k, false)
}

/// As [`pair_kernel`] with `g` conjugated; `e(f, f)` is then self-adjoint.
pub fn pair_kernel_hermitian(f: &GroupFunction, g: &GroupFunction, k: u32) -> Result<Kernel> {
    pair_kernel_by(f, g, k, true)
}

/// One eigenvalue with an orthonormal basis of its eigenspace.
#[derive(Debug, Clone)]
pub struct Eigenspace {
    pub value: f64,
    pub vectors: Vec<GroupFunction>,
}

/// Nonzero spectrum of a self-adjoint kernel, ordered by descending
/// `|lambda|` (positive first on ties).
///
/// Eigenfunctions are orthonormal for the normalised inner product and
/// `K = sum lambda v (x) conj(v)`. Each is scaled so its first entry of
/// magnitude above `1e-8` is real and positive; inside a degenerate
/// eigenspace the basis is whatever the solver returns.
pub fn spectral_decomposition(kernel: &Kernel) -> Result<Vec<Eigenspace>> {
    let dev = kernel.self_adjoint_deviation();
    if dev > SELF_ADJOINT_TOL {
        return Err(HofaError::NotSelfAdjoint(dev));
    }
    let n = kernel.group.order();
    let m = DMatrix::from_fn(n, n, |x, y| {
        // symmetrise so the solver sees an exactly Hermitian matrix
        (kernel.at(x, y) + kernel.at(y, x).conj()) * 0.5 / n as f64
    });
    let eig = m.symmetric_eigen();
    let scale = (n as f64).sqrt();
    let mut pairs: Vec<(f64, Vec<Complex64>)> = (0..n)
        .filter(|&i| eig.eigenvalues[i].abs() > EIGEN_ZERO_TOL)
        .map(|i| {
            let col = eig.eigenvectors.column(i);
            let lead = col
                .iter()
                .find(|c| c.norm() > 1e-8)
                .copied()
                .unwrap_or(Complex64::new(1.0, 0.0));
            let rot = lead.conj() / lead.norm();
            (
                eig.eigenvalues[i],
                col.iter().map(|c| c * rot * scale).collect(),
            )
        })
        .collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite eigenvalues"));
    let mut spaces: Vec<Eigenspace> = Vec::new();
    let mut members: Vec<Vec<f64>> = Vec::new();
    for (value, vec) in pairs {
        let f = GroupFunction::from_values(kernel.group.clone(), vec)?;
        match spaces.last_mut() {
            Some(last) if (last.value - value).abs() <= EIGEN_CLUSTER_TOL => {
                last.vectors.push(f);
                members.last_mut().expect("parallel to spaces").push(value);
            }
            _ => {
                spaces.push(Eigenspace {
                    value,
                    vectors: vec![f],
                });
                members.push(vec![value]);
            }
        }
    }
    for (space, vals) in spaces.iter_mut().zip(&members) {
        space.value = vals.iter().sum::<f64>() / vals.len() as f64;
    }
    spaces.sort_by(|a, b| {
        b.value
            .abs()
            .partial_cmp(&a.value.abs())
            .expect("finite eigenvalues")
            .then(b.value.partial_cmp(&a.value).expect("finite eigenvalues"))
    });
    Ok(spaces)
}

/// `sum lambda v (x) conj(v)` over a spectrum.
pub fn reconstruct(group: &FiniteAbelianGroup, spectrum: &[Eigenspace]) -> Result<Kernel> {
    let mut k = Kernel::zeros(group);
    for space in spectrum {
        for v in &space.vectors {
            k = k.add(&Kernel::outer(v, v)?.scale(Complex64::new(space.value, 0.0)))?;
        }
    }
    Ok(k)
}

/// A phase matched to one eigenfunction.
#[derive(Debug, Clone)]
pub struct RecoveredPhase {
    pub eigenvalue: f64,
    pub phase: PolynomialPhase,
    pub correlation: Complex64,
}

/// For each eigenfunction of the nonzero spectrum, in spectral order, the
/// best correlated phase of degree `<= k` (constant term zero) not already
/// taken.
pub fn planted_phase_report(kernel: &Kernel, k: u32) -> Result<Vec<RecoveredPhase>> {
    planted_phase_report_with(kernel, k, &Limits::default())
}

pub fn planted_phase_report_with(
    kernel: &Kernel,
    k: u32,
    limits: &Limits,
) -> Result<Vec<RecoveredPhase>> {
    let (p, n) = prime_power_shape(&kernel.group)
        .ok_or_else(|| invalid("phase recovery needs Z_p^n with p an odd prime"))?;
    let family = EvaluatedFamily::new(phase_dictionary_with(p, n, k, limits)?)?;
    let spectrum = spectral_decomposition(kernel)?;
    let mut taken = vec![false; family.len()];
    let mut out = Vec::new();
    for space in &spectrum {
        for v in &space.vectors {
            let corr = family.correlations(v)?;
            let best = (0..family.len()).filter(|&i| !taken[i]).max_by(|&i, &j| {
                crate::phases::magnitude_key(corr[i])
                    .cmp(&crate::phases::magnitude_key(corr[j]))
                    .then_with(|| family.phases()[j].cmp(&family.phases()[i]))
            });
            if let Some(i) = best {
                taken[i] = true;
                out.push(RecoveredPhase {
                    eigenvalue: space.value,
                    phase: family.phases()[i].clone(),
                    correlation: corr[i],
                });
            }
        }
    }
    Ok(out)
}

pub fn planted_phase_recovery(kernel: &Kernel, k: u32) -> Result<Vec<PolynomialPhase>> {
    Ok(planted_phase_report(kernel, k)?
        .into_iter()
        .map(|r| r.phase)
        .collect())
}
