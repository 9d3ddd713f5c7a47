//! Finite sigma-algebras as partitions of a group.
//!
//! Joins, independence, weak orthogonality, coset projections and
//! relative orthonormality all reduce to exact finite linear algebra here.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{HofaError, Result};
use crate::gfunc::GroupFunction;
use crate::group::FiniteAbelianGroup;
use crate::reduce::pairwise_sum;

/// Tolerance for counting identities (exact rationals in principle).
pub const STRUCTURAL_TOL: f64 = 1e-12;
/// Tolerance for checks on accumulated function values.
pub const FUNCTION_TOL: f64 = 1e-9;

/// Cell labelling of the group elements, canonical: cells are numbered by
/// first occurrence in element-index order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    group: FiniteAbelianGroup,
    labels: Vec<usize>,
    cell_count: usize,
}

impl Partition {
    /// Canonicalises an arbitrary labelling.
    pub fn from_labels<L: Copy + Eq + std::hash::Hash>(
        group: &FiniteAbelianGroup,
        labels: &[L],
    ) -> Result<Self> {
        if labels.len() != group.order() {
            return Err(HofaError::Arity {
                expected: group.order(),
                got: labels.len(),
            });
        }
        let mut map = HashMap::new();
        let canon = labels
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(*l).or_insert(next)
            })
            .collect();
        Ok(Self {
            group: group.clone(),
            labels: canon,
            cell_count: map.len(),
        })
    }

    pub fn trivial(group: &FiniteAbelianGroup) -> Self {
        Self {
            group: group.clone(),
            labels: vec![0; group.order()],
            cell_count: 1,
        }
    }

    pub fn discrete(group: &FiniteAbelianGroup) -> Self {
        Self {
            group: group.clone(),
            labels: (0..group.order()).collect(),
            cell_count: group.order(),
        }
    }

    /// Partition into cosets of `subgroup` (element indices).
    pub fn coset_partition(group: &FiniteAbelianGroup, subgroup: &[usize]) -> Result<Self> {
        if !group.is_subgroup(subgroup) {
            return Err(HofaError::NotSubgroup);
        }
        let mut labels = vec![0usize; group.order()];
        for (c, coset) in group.cosets_of(subgroup).iter().enumerate() {
            for &m in &coset.members {
                labels[m] = c;
            }
        }
        Self::from_labels(group, &labels)
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn cell_count(&self) -> usize {
        self.cell_count
    }

    /// Cells as sorted index lists, in label order.
    pub fn cells(&self) -> Vec<Vec<usize>> {
        let mut cells = vec![Vec::new(); self.cell_count];
        for (i, &l) in self.labels.iter().enumerate() {
            cells[l].push(i);
        }
        cells
    }

    fn same_group(&self, other: &Self) -> Result<()> {
        if self.group != other.group {
            return Err(HofaError::GroupMismatch);
        }
        Ok(())
    }

    /// True iff every cell of `self` lies inside a cell of `coarser`.
    pub fn refines(&self, coarser: &Self) -> bool {
        if self.group != coarser.group {
            return false;
        }
        let mut image = vec![usize::MAX; self.cell_count];
        self.labels.iter().zip(&coarser.labels).all(|(&a, &b)| {
            if image[a] == usize::MAX {
                image[a] = b;
            }
            image[a] == b
        })
    }

    /// Common refinement.
    pub fn join(&self, other: &Self) -> Result<Self> {
        self.same_group(other)?;
        let pairs: Vec<(usize, usize)> = self
            .labels
            .iter()
            .copied()
            .zip(other.labels.iter().copied())
            .collect();
        Self::from_labels(&self.group, &pairs)
    }

    /// True iff `f` is measurable in `self`, i.e. constant on cells.
    pub fn measures(&self, f: &GroupFunction, tol: f64) -> bool {
        let mut first: Vec<Option<Complex64>> = vec![None; self.cell_count];
        f.values()
            .iter()
            .zip(&self.labels)
            .all(|(&v, &l)| match first[l] {
                None => {
                    first[l] = Some(v);
                    true
                }
                Some(w) => (v - w).norm() <= tol,
            })
    }

    /// Intersection counts `|C_a cap D_b|`, row-major over cells of `self`.
    fn intersection_counts(&self, other: &Self) -> Vec<usize> {
        let mut m = vec![0usize; self.cell_count * other.cell_count];
        for (&a, &b) in self.labels.iter().zip(&other.labels) {
            m[a * other.cell_count + b] += 1;
        }
        m
    }

    fn cell_sizes(&self) -> Vec<usize> {
        let mut s = vec![0usize; self.cell_count];
        for &l in &self.labels {
            s[l] += 1;
        }
        s
    }

    /// Weak orthogonality: for every cell indicator `1_C` of `self`,
    /// `E(1_C | other)` is constant on the cells of `self`.
    pub fn weakly_orthogonal(&self, other: &Self) -> Result<bool> {
        self.same_group(other)?;
        let counts = self.intersection_counts(other);
        let sizes = other.cell_sizes();
        let w = other.cell_count;
        // E(1_C | other)(x) = |C cap D(x)| / |D(x)|; its value at x only
        // depends on the cell D(x), so it suffices to compare, for each cell
        // C' of self, the values over the cells D meeting C'.
        let mut reference = vec![f64::NAN; self.cell_count * self.cell_count];
        for (&a_x, &b_x) in self.labels.iter().zip(&other.labels) {
            for c in 0..self.cell_count {
                let v = counts[c * w + b_x] as f64 / sizes[b_x] as f64;
                let slot = &mut reference[c * self.cell_count + a_x];
                if slot.is_nan() {
                    *slot = v;
                } else if (*slot - v).abs() > STRUCTURAL_TOL {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// `mu(C cap D) = mu(C) mu(D)` for all cells.
    pub fn independent_of(&self, other: &Self) -> Result<bool> {
        self.same_group(other)?;
        let n = self.group.order() as f64;
        let counts = self.intersection_counts(other);
        let sa = self.cell_sizes();
        let sb = other.cell_sizes();
        for a in 0..self.cell_count {
            for b in 0..other.cell_count {
                let joint = counts[a * other.cell_count + b] as f64 / n;
                let prod = (sa[a] as f64 / n) * (sb[b] as f64 / n);
                if (joint - prod).abs() > STRUCTURAL_TOL {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Coset averaging `T(f)(x) = (1/|H|) sum_{h in H} f(x + h)`.
pub fn coset_projection(f: &GroupFunction, subgroup: &[usize]) -> Result<GroupFunction> {
    let g = f.group();
    if !g.is_subgroup(subgroup) {
        return Err(HofaError::NotSubgroup);
    }
    let vals = f.values();
    let h = subgroup.len() as f64;
    Ok(GroupFunction::from_fn(g, |x| {
        let terms: Vec<Complex64> = subgroup.iter().map(|&s| vals[g.add_index(x, s)]).collect();
        pairwise_sum(&terms) / h
    }))
}

pub fn join(p1: &Partition, p2: &Partition) -> Result<Partition> {
    p1.join(p2)
}

pub fn weak_orthogonality_check(p1: &Partition, p2: &Partition) -> Result<bool> {
    p1.weakly_orthogonal(p2)
}

pub fn independence_check(p1: &Partition, p2: &Partition) -> Result<bool> {
    p1.independent_of(p2)
}

/// Largest deviation of `E(f_i conj f_j | P)` from the constant `delta_ij`,
/// restricted to the points where `mask` is true (all points if `None`).
pub fn relative_orthonormal_deviation(
    fs: &[GroupFunction],
    partition: &Partition,
    mask: Option<&[bool]>,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (i, fi) in fs.iter().enumerate() {
        for (j, fj) in fs.iter().enumerate() {
            let e = fi.mul(&fj.conj())?.conditional_expectation(partition)?;
            let target = if i == j { 1.0 } else { 0.0 };
            for (x, v) in e.values().iter().enumerate() {
                if mask.is_some_and(|m| !m[x]) {
                    continue;
                }
                worst = worst.max((v - Complex64::new(target, 0.0)).norm());
            }
        }
    }
    Ok(worst)
}

/// True iff `E(f_i conj f_j | P) = delta_ij` everywhere within 1e-9.
pub fn relative_orthonormal_check(fs: &[GroupFunction], partition: &Partition) -> Result<bool> {
    Ok(relative_orthonormal_deviation(fs, partition, None)? <= FUNCTION_TOL)
}
