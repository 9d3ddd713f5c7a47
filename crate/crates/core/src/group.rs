//! Finite abelian groups presented as products of cyclic groups.
//!
//! Elements are residue tuples; the canonical enumeration is mixed-radix
//! index order with the last factor varying fastest. Elements carry no
//! handle to their group, so every operation takes the group explicitly.

use std::collections::BTreeSet;
use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{HofaError, Result};
use crate::gfunc::GroupFunction;

/// Default cap on the order of a group.
pub const DEFAULT_ORDER_CAP: u128 = 10_000_000;

/// Groups up to this order get a precomputed addition table.
const ADD_TABLE_MAX_ORDER: usize = 1024;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiniteAbelianGroup {
    factors: Vec<usize>,
    strides: Vec<usize>,
    order: usize,
}

/// A residue tuple `(r_1, ..., r_m)` with `0 <= r_j < n_j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement(Vec<u32>);

impl GroupElement {
    pub fn residues(&self) -> &[u32] {
        &self.0
    }
}

/// A coset `representative + H` of a subgroup `H`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coset {
    /// Element indices of the subgroup, sorted.
    pub subgroup: Vec<usize>,
    /// Minimal-index element of the coset.
    pub representative: GroupElement,
    /// Element indices of the coset, sorted.
    pub members: Vec<usize>,
}

impl FiniteAbelianGroup {
    /// Builds `Z_{n_1} x ... x Z_{n_m}` with the default order cap.
    pub fn new(factors: &[i64]) -> Result<Self> {
        Self::with_cap(factors, DEFAULT_ORDER_CAP)
    }

    pub fn with_cap(factors: &[i64], cap: u128) -> Result<Self> {
        if factors.is_empty() {
            return Err(HofaError::EmptyFactors);
        }
        let mut order: u128 = 1;
        for &n in factors {
            if n < 1 {
                return Err(HofaError::InvalidFactor(n));
            }
            order = order.saturating_mul(n as u128);
        }
        if order > cap {
            return Err(HofaError::SizeCap {
                what: "group order",
                size: order,
                cap,
            });
        }
        let factors: Vec<usize> = factors.iter().map(|&n| n as usize).collect();
        let mut strides = vec![1usize; factors.len()];
        for j in (0..factors.len().saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * factors[j + 1];
        }
        Ok(Self {
            factors,
            strides,
            order: order as usize,
        })
    }

    /// Cyclic group `Z_n`.
    pub fn cyclic(n: usize) -> Result<Self> {
        Self::new(&[n as i64])
    }

    /// `Z_p^n`.
    pub fn power(p: usize, n: usize) -> Result<Self> {
        Self::new(&vec![p as i64; n])
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Builds an element, reducing each entry modulo its factor.
    pub fn element(&self, residues: &[i64]) -> Result<GroupElement> {
        self.check_arity(residues.len())?;
        Ok(GroupElement(
            residues
                .iter()
                .zip(&self.factors)
                .map(|(&r, &n)| r.rem_euclid(n as i64) as u32)
                .collect(),
        ))
    }

    /// Validates that `x` has the right arity and reduced residues.
    pub fn check(&self, x: &GroupElement) -> Result<()> {
        self.check_arity(x.0.len())?;
        for (&r, &n) in x.0.iter().zip(&self.factors) {
            if r as usize >= n {
                return Err(HofaError::Residue {
                    residue: r as u64,
                    factor: n,
                });
            }
        }
        Ok(())
    }

    fn check_arity(&self, got: usize) -> Result<()> {
        if got != self.factors.len() {
            return Err(HofaError::Arity {
                expected: self.factors.len(),
                got,
            });
        }
        Ok(())
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement(vec![0; self.factors.len()])
    }

    pub fn add(&self, x: &GroupElement, y: &GroupElement) -> Result<GroupElement> {
        self.check(x)?;
        self.check(y)?;
        Ok(GroupElement(
            x.0.iter()
                .zip(&y.0)
                .zip(&self.factors)
                .map(|((&a, &b), &n)| ((a as usize + b as usize) % n) as u32)
                .collect(),
        ))
    }

    pub fn neg(&self, x: &GroupElement) -> Result<GroupElement> {
        self.check(x)?;
        Ok(GroupElement(
            x.0.iter()
                .zip(&self.factors)
                .map(|(&a, &n)| ((n - a as usize) % n) as u32)
                .collect(),
        ))
    }

    pub fn sub(&self, x: &GroupElement, y: &GroupElement) -> Result<GroupElement> {
        self.add(x, &self.neg(y)?)
    }

    /// The sum map `(x_1, ..., x_k) -> x_1 + ... + x_k`.
    pub fn sum_map(&self, xs: &[GroupElement]) -> Result<GroupElement> {
        if xs.is_empty() {
            return Err(crate::error::invalid("sum map of an empty tuple"));
        }
        let mut acc = self.zero();
        for x in xs {
            acc = self.add(&acc, x)?;
        }
        Ok(acc)
    }

    /// Membership in `D_k = {(x_1..x_k) : x_1 + ... + x_k = 0}`.
    pub fn is_zero_sum(&self, xs: &[GroupElement]) -> Result<bool> {
        Ok(self.sum_map(xs)? == self.zero())
    }

    pub fn index_of(&self, x: &GroupElement) -> Result<usize> {
        self.check(x)?;
        Ok(self.index_unchecked(&x.0))
    }

    fn index_unchecked(&self, residues: &[u32]) -> usize {
        residues
            .iter()
            .zip(&self.strides)
            .map(|(&r, &s)| r as usize * s)
            .sum()
    }

    /// Element at a mixed-radix index. Panics if `index >= order`.
    pub fn element_at(&self, index: usize) -> GroupElement {
        assert!(index < self.order, "element index {index} out of range");
        GroupElement(
            self.strides
                .iter()
                .zip(&self.factors)
                .map(|(&s, &n)| ((index / s) % n) as u32)
                .collect(),
        )
    }

    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.order).map(|i| self.element_at(i))
    }

    /// Index of `element_at(i) + element_at(j)`.
    pub fn add_index(&self, i: usize, j: usize) -> usize {
        let mut out = 0;
        for (&s, &n) in self.strides.iter().zip(&self.factors) {
            let a = (i / s) % n;
            let b = (j / s) % n;
            out += ((a + b) % n) * s;
        }
        out
    }

    pub fn neg_index(&self, i: usize) -> usize {
        let mut out = 0;
        for (&s, &n) in self.strides.iter().zip(&self.factors) {
            let a = (i / s) % n;
            out += ((n - a) % n) * s;
        }
        out
    }

    pub fn sub_index(&self, i: usize, j: usize) -> usize {
        self.add_index(i, self.neg_index(j))
    }

    /// Closes a generator set under the group law; returns sorted indices.
    pub fn subgroup_closure(&self, generators: &[GroupElement]) -> Result<Vec<usize>> {
        let mut gens = Vec::with_capacity(generators.len());
        for g in generators {
            gens.push(self.index_of(g)?);
        }
        let mut members = BTreeSet::new();
        members.insert(0usize);
        let mut frontier = vec![0usize];
        while let Some(x) = frontier.pop() {
            for &g in &gens {
                let y = self.add_index(x, g);
                if members.insert(y) {
                    frontier.push(y);
                }
            }
        }
        // In a finite group closure under addition already contains inverses.
        Ok(members.into_iter().collect())
    }

    /// True iff the index set is a subgroup (non-empty, closed under +, -).
    pub fn is_subgroup(&self, indices: &[usize]) -> bool {
        if indices.is_empty() || indices.iter().any(|&i| i >= self.order) {
            return false;
        }
        let set: BTreeSet<usize> = indices.iter().copied().collect();
        set.contains(&0)
            && set.iter().all(|&a| {
                set.contains(&self.neg_index(a))
                    && set.iter().all(|&b| set.contains(&self.add_index(a, b)))
            })
    }

    /// Coset partition of the subgroup generated by `generators`, ordered
    /// by representative index.
    pub fn subgroup_cosets(&self, generators: &[GroupElement]) -> Result<Vec<Coset>> {
        let h = self.subgroup_closure(generators)?;
        Ok(self.cosets_of(&h))
    }

    /// Cosets of an index set already known to be a subgroup.
    pub(crate) fn cosets_of(&self, subgroup: &[usize]) -> Vec<Coset> {
        let mut seen = vec![false; self.order];
        let mut out = Vec::with_capacity(self.order / subgroup.len());
        for rep in 0..self.order {
            if seen[rep] {
                continue;
            }
            let mut members: Vec<usize> =
                subgroup.iter().map(|&h| self.add_index(rep, h)).collect();
            members.sort_unstable();
            for &m in &members {
                seen[m] = true;
            }
            out.push(Coset {
                subgroup: subgroup.to_vec(),
                representative: self.element_at(rep),
                members,
            });
        }
        out
    }

    /// Least common multiple of the factors; character values are
    /// `exp(2 pi i m / L)` for an integer `m`.
    pub fn exponent(&self) -> usize {
        self.factors.iter().fold(1usize, |l, &n| lcm(l, n))
    }

    /// Integer `m` in `[0, L)` with `chi_xi(x) = exp(2 pi i m / L)`.
    pub fn pairing(&self, xi: usize, x: usize) -> usize {
        let l = self.exponent();
        self.pairing_with(l, xi, x)
    }

    pub(crate) fn pairing_with(&self, l: usize, xi: usize, x: usize) -> usize {
        let mut m = 0usize;
        for (&s, &n) in self.strides.iter().zip(&self.factors) {
            let a = (xi / s) % n;
            let b = (x / s) % n;
            m = (m + (a * b % n) * (l / n)) % l;
        }
        m
    }

    /// Table of the `L`-th roots of unity.
    pub(crate) fn roots_of_unity(&self) -> Vec<Complex64> {
        roots_of_unity(self.exponent())
    }
}

pub(crate) fn roots_of_unity(l: usize) -> Vec<Complex64> {
    (0..l)
        .map(|m| Complex64::from_polar(1.0, TAU * m as f64 / l as f64))
        .collect()
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// The linear character `x -> exp(2 pi i sum_j xi_j x_j / n_j)`.
pub fn linear_character(group: &FiniteAbelianGroup, xi: &GroupElement) -> Result<GroupFunction> {
    let xi = group.index_of(xi)?;
    Ok(character_by_index(group, xi))
}

pub(crate) fn character_by_index(group: &FiniteAbelianGroup, xi: usize) -> GroupFunction {
    let l = group.exponent();
    let roots = roots_of_unity(l);
    let values = (0..group.order())
        .map(|x| roots[group.pairing_with(l, xi, x)])
        .collect();
    GroupFunction::from_values(group.clone(), values).expect("length matches order")
}

/// Addition table for hot loops; falls back to arithmetic on large groups.
#[derive(Debug, Clone)]
pub(crate) struct AddTable {
    group: FiniteAbelianGroup,
    table: Option<Vec<u32>>,
}

impl AddTable {
    pub(crate) fn new(group: &FiniteAbelianGroup) -> Self {
        let n = group.order();
        let table = (n <= ADD_TABLE_MAX_ORDER).then(|| {
            let mut t = vec![0u32; n * n];
            for i in 0..n {
                for j in 0..n {
                    t[i * n + j] = group.add_index(i, j) as u32;
                }
            }
            t
        });
        Self {
            group: group.clone(),
            table,
        }
    }

    #[inline]
    pub(crate) fn add(&self, i: usize, j: usize) -> usize {
        match &self.table {
            Some(t) => t[i * self.group.order() + j] as usize,
            None => self.group.add_index(i, j),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(f: &[i64]) -> FiniteAbelianGroup {
        FiniteAbelianGroup::new(f).unwrap()
    }

    #[test]
    fn make_group_orders() {
        assert_eq!(g(&[2]).order(), 2);
        assert_eq!(g(&[2, 3]).order(), 6);
        let h = g(&[5, 1]);
        assert_eq!(h.order(), 5);
        assert!(h.elements().all(|x| x.residues()[1] == 0));
    }

    #[test]
    fn make_group_errors() {
        assert_eq!(FiniteAbelianGroup::new(&[]), Err(HofaError::EmptyFactors));
        assert_eq!(
            FiniteAbelianGroup::new(&[3, 0]),
            Err(HofaError::InvalidFactor(0))
        );
        assert_eq!(
            FiniteAbelianGroup::new(&[-2]),
            Err(HofaError::InvalidFactor(-2))
        );
        assert!(matches!(
            FiniteAbelianGroup::new(&[10_000, 10_000]),
            Err(HofaError::SizeCap { .. })
        ));
    }

    #[test]
    fn addition_examples() {
        let z5 = g(&[5]);
        let s = z5
            .add(&z5.element(&[3]).unwrap(), &z5.element(&[4]).unwrap())
            .unwrap();
        assert_eq!(s, z5.element(&[2]).unwrap());
        let z23 = g(&[2, 3]);
        let x = z23.element(&[1, 2]).unwrap();
        assert_eq!(z23.add(&x, &x).unwrap(), z23.element(&[0, 1]).unwrap());
        assert_eq!(z23.add(&x, &z23.zero()).unwrap(), x);
        assert_eq!(z23.add(&z23.neg(&x).unwrap(), &x).unwrap(), z23.zero());
    }

    #[test]
    fn arity_and_range_checked() {
        let z23 = g(&[2, 3]);
        let bad = GroupElement(vec![1]);
        assert!(matches!(
            z23.add(&bad, &z23.zero()),
            Err(HofaError::Arity { .. })
        ));
        let out_of_range = GroupElement(vec![1, 3]);
        assert!(matches!(
            z23.index_of(&out_of_range),
            Err(HofaError::Residue { .. })
        ));
    }

    #[test]
    fn sum_map_and_zero_sum() {
        let z7 = g(&[7]);
        let e = |r| z7.element(&[r]).unwrap();
        assert_eq!(z7.sum_map(&[e(1), e(2), e(3)]).unwrap(), e(6));
        assert!(z7.is_zero_sum(&[e(1), e(2), e(4)]).unwrap());
        assert_eq!(z7.sum_map(&[e(0), e(0), e(0)]).unwrap(), z7.zero());
        assert!(z7.sum_map(&[]).is_err());
    }

    #[test]
    fn index_roundtrip_last_factor_fastest() {
        let h = g(&[3, 3, 2]);
        assert_eq!(h.element_at(1).residues(), &[0, 0, 1]);
        assert_eq!(h.element_at(2).residues(), &[0, 1, 0]);
        for i in 0..h.order() {
            assert_eq!(h.index_of(&h.element_at(i)).unwrap(), i);
        }
    }

    #[test]
    fn addition_is_commutative_and_associative_exhaustively() {
        for f in [
            vec![64],
            vec![2, 32],
            vec![4, 4, 4],
            vec![3, 7],
            vec![8, 1, 6],
        ] {
            let h = g(&f);
            let n = h.order();
            for a in 0..n {
                for b in 0..n {
                    let ab = h.add_index(a, b);
                    assert_eq!(ab, h.add_index(b, a));
                    for c in (0..n).step_by(7) {
                        assert_eq!(h.add_index(ab, c), h.add_index(a, h.add_index(b, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn index_arithmetic_matches_element_arithmetic() {
        let h = g(&[4, 3]);
        for i in 0..h.order() {
            for j in 0..h.order() {
                let s = h.add(&h.element_at(i), &h.element_at(j)).unwrap();
                assert_eq!(h.index_of(&s).unwrap(), h.add_index(i, j));
                let d = h.sub(&h.element_at(i), &h.element_at(j)).unwrap();
                assert_eq!(h.index_of(&d).unwrap(), h.sub_index(i, j));
            }
        }
    }

    #[test]
    fn coset_examples() {
        let z4 = g(&[4]);
        let e = |r| z4.element(&[r]).unwrap();
        let cs = z4.subgroup_cosets(&[e(2)]).unwrap();
        assert_eq!(cs.len(), 2);
        assert_eq!(cs[0].members, vec![0, 2]);
        assert_eq!(cs[1].members, vec![1, 3]);
        assert_eq!(cs[1].representative, e(1));
        let full = z4.subgroup_cosets(&[e(1)]).unwrap();
        assert_eq!(full.len(), 1);
        assert_eq!(full[0].members, vec![0, 1, 2, 3]);
        let trivial = z4.subgroup_cosets(&[]).unwrap();
        assert_eq!(trivial.len(), 4);
        assert!(trivial.iter().all(|c| c.members.len() == 1));
    }

    #[test]
    fn cosets_partition_the_group() {
        let h = g(&[2, 6]);
        for a in 0..h.order() {
            for b in 0..h.order() {
                let cs = h
                    .subgroup_cosets(&[h.element_at(a), h.element_at(b)])
                    .unwrap();
                let size = cs[0].members.len();
                assert!(cs.iter().all(|c| c.members.len() == size));
                assert_eq!(size * cs.len(), h.order());
                let mut all: Vec<usize> = cs.iter().flat_map(|c| c.members.clone()).collect();
                all.sort_unstable();
                assert_eq!(all, (0..h.order()).collect::<Vec<_>>());
                assert!(h.is_subgroup(&cs[0].subgroup));
            }
        }
    }

    #[test]
    fn is_subgroup_rejects_non_subgroups() {
        let z4 = g(&[4]);
        assert!(z4.is_subgroup(&[0, 2]));
        assert!(!z4.is_subgroup(&[0, 1]));
        assert!(!z4.is_subgroup(&[2]));
        assert!(!z4.is_subgroup(&[]));
    }

    #[test]
    fn z4_character_values() {
        let z4 = g(&[4]);
        let chi = linear_character(&z4, &z4.element(&[1]).unwrap()).unwrap();
        let expect = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, -1.0),
        ];
        for (v, e) in chi.values().iter().zip(expect) {
            assert!((v - e).norm() < 1e-15);
        }
        let triv = linear_character(&z4, &z4.zero()).unwrap();
        assert!(triv.values().iter().all(|v| *v == Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn z3_distinct_characters_orthogonal() {
        // Oracle: 1 + w + w^2 with w = exp(2 pi i / 3), summed directly.
        let z3 = g(&[3]);
        let c1 = linear_character(&z3, &z3.element(&[1]).unwrap()).unwrap();
        let c2 = linear_character(&z3, &z3.element(&[2]).unwrap()).unwrap();
        let direct: Complex64 = (0..3)
            .map(|x| Complex64::from_polar(1.0, TAU * (x as f64) * (1.0 - 2.0) / 3.0))
            .sum::<Complex64>()
            / 3.0;
        let ip = c1.inner(&c2).unwrap();
        assert!((ip - direct).norm() < 1e-15);
        assert!(ip.norm() < 1e-12);
    }

    #[test]
    fn characters_form_a_group_and_are_orthonormal() {
        for f in [vec![36], vec![6, 6], vec![2, 3, 6], vec![4, 9]] {
            let h = g(&f);
            let n = h.order();
            let chars: Vec<GroupFunction> = (0..n).map(|xi| character_by_index(&h, xi)).collect();
            for a in 0..n {
                for b in 0..n {
                    let prod = chars[a].mul(&chars[b]).unwrap();
                    let ab = &chars[h.add_index(a, b)];
                    for (u, v) in prod.values().iter().zip(ab.values()) {
                        assert!((u - v).norm() < 1e-12);
                    }
                    let ip = chars[a].inner(&chars[b]).unwrap();
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert!((ip - Complex64::new(want, 0.0)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn add_table_agrees_with_arithmetic() {
        let h = g(&[6, 5]);
        let t = AddTable::new(&h);
        for i in 0..h.order() {
            for j in 0..h.order() {
                assert_eq!(t.add(i, j), h.add_index(i, j));
            }
        }
    }
}
