//! The cube group `B_k`, its spider parameterisation, the multilinear form
//! over cubes, and face actions on vertex-indexed tuples of functions.
//!
//! Vertices of the `k`-cube are the subsets of `{1..k}` encoded as bit masks
//! (direction `i` is bit `i - 1`); vertex `0` is the empty set. Tuples indexed
//! by vertices are always stored in mask order.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, HofaError, Result};
use crate::gfunc::GroupFunction;
use crate::group::{AddTable, FiniteAbelianGroup, GroupElement};
use crate::limits::{ensure, pow_u128, Limits};
use crate::reduce::{pairwise_sum, PairwiseAccumulator};

/// Largest cube dimension accepted anywhere.
pub const MAX_CUBE_DIM: usize = 16;

/// Vertex/edge/face bookkeeping for the `k`-dimensional cube.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CubeIndex {
    k: usize,
}

impl CubeIndex {
    pub fn new(k: usize) -> Result<Self> {
        if k > MAX_CUBE_DIM {
            return Err(invalid(format!(
                "cube dimension {k} exceeds {MAX_CUBE_DIM}"
            )));
        }
        Ok(Self { k })
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn vertex_count(&self) -> usize {
        1 << self.k
    }

    pub fn vertices(&self) -> std::ops::Range<usize> {
        0..self.vertex_count()
    }

    /// `|v|`, the size of the subset.
    pub fn weight(v: usize) -> u32 {
        v.count_ones()
    }

    /// Edges as `(lower, upper)` with `upper = lower | bit`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for v in self.vertices() {
            for i in 0..self.k {
                if v & (1 << i) == 0 {
                    out.push((v, v | (1 << i)));
                }
            }
        }
        out
    }

    /// 2-faces as `(p, q, r, s)`: `q` and `r` flip one direction of `p`
    /// each, `s` flips both.
    pub fn two_faces(&self) -> Vec<[usize; 4]> {
        let mut out = Vec::new();
        for i in 0..self.k {
            for j in (i + 1)..self.k {
                let (bi, bj) = (1 << i, 1 << j);
                for p in self.vertices().filter(|p| p & (bi | bj) == 0) {
                    out.push([p, p | bi, p | bj, p | bi | bj]);
                }
            }
        }
        out
    }

    /// All faces of dimension `d`, each as a sorted vertex list.
    pub fn faces(&self, d: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for free in self.vertices().filter(|m| m.count_ones() as usize == d) {
            for base in self.vertices().filter(|b| b & free == 0) {
                let mut face: Vec<usize> = self.vertices().filter(|v| v & !free == base).collect();
                face.sort_unstable();
                out.push(face);
            }
        }
        out
    }

    pub fn is_edge(&self, e: (usize, usize)) -> bool {
        e.0 < self.vertex_count() && e.1 < self.vertex_count() && (e.0 ^ e.1).count_ones() == 1
    }
}

/// Spider map `delta_k(a_0..a_k)_v = a_0 + sum_{i in v} a_i`, returned in
/// mask order.
pub fn spider_map(
    group: &FiniteAbelianGroup,
    k: usize,
    coords: &[GroupElement],
) -> Result<Vec<GroupElement>> {
    if k == 0 {
        return Err(invalid("spider map needs k >= 1"));
    }
    let cube = CubeIndex::new(k)?;
    if coords.len() != k + 1 {
        return Err(HofaError::Arity {
            expected: k + 1,
            got: coords.len(),
        });
    }
    let idx: Vec<usize> = coords
        .iter()
        .map(|c| group.index_of(c))
        .collect::<Result<_>>()?;
    Ok(spider_indices(group, k, &idx)
        .into_iter()
        .take(cube.vertex_count())
        .map(|i| group.element_at(i))
        .collect())
}

pub(crate) fn spider_indices(group: &FiniteAbelianGroup, k: usize, coords: &[usize]) -> Vec<usize> {
    (0..1usize << k)
        .map(|v| {
            (0..k)
                .filter(|i| v & (1 << i) != 0)
                .fold(coords[0], |acc, i| group.add_index(acc, coords[i + 1]))
        })
        .collect()
}

/// True iff the tuple satisfies `a_p - a_q + a_s - a_r = 0` on every 2-face.
pub fn cube_membership(
    group: &FiniteAbelianGroup,
    k: usize,
    tuple: &[GroupElement],
) -> Result<bool> {
    let cube = CubeIndex::new(k)?;
    if tuple.len() != cube.vertex_count() {
        return Err(HofaError::Arity {
            expected: cube.vertex_count(),
            got: tuple.len(),
        });
    }
    let idx: Vec<usize> = tuple
        .iter()
        .map(|x| group.index_of(x))
        .collect::<Result<_>>()?;
    Ok(cube_membership_indices(group, &cube, &idx))
}

pub(crate) fn cube_membership_indices(
    group: &FiniteAbelianGroup,
    cube: &CubeIndex,
    idx: &[usize],
) -> bool {
    cube.two_faces().iter().all(|&[p, q, r, s]| {
        let lhs = group.add_index(idx[p], idx[s]);
        let rhs = group.add_index(idx[q], idx[r]);
        lhs == rhs
    })
}

/// The form `U~_k(f) = E over B_k of prod_v f_v(tau_v(x))`, summed over
/// spider coordinates.
pub fn tilde_u(fs: &[GroupFunction], k: usize) -> Result<Complex64> {
    tilde_u_with(fs, k, &Limits::default())
}

pub fn tilde_u_with(fs: &[GroupFunction], k: usize, limits: &Limits) -> Result<Complex64> {
    let cube = CubeIndex::new(k)?;
    if k == 0 {
        return Err(invalid("the cube form needs k >= 1"));
    }
    if fs.len() != cube.vertex_count() {
        return Err(HofaError::Arity {
            expected: cube.vertex_count(),
            got: fs.len(),
        });
    }
    let group = fs[0].group();
    if fs.iter().any(|f| f.group() != group) {
        return Err(HofaError::GroupMismatch);
    }
    ensure(
        "order^(k+1)",
        pow_u128(group.order(), k + 1),
        limits.cube_terms,
    )?;
    let slots: Vec<&[Complex64]> = fs.iter().map(|f| f.values()).collect();
    Ok(cube_sum(group, k, &slots))
}

/// Core summation. The last direction is split off: for each fixed
/// `(a_0, .., a_{k-1})` the product over vertices without direction `k` is
/// formed once, with the vertex positions walked in Gray-code order, and
/// reused across the `a_k` loop.
pub(crate) fn cube_sum(group: &FiniteAbelianGroup, k: usize, slots: &[&[Complex64]]) -> Complex64 {
    let n = group.order();
    let table = AddTable::new(group);
    let negs: Vec<usize> = (0..n).map(|i| group.neg_index(i)).collect();
    let half = 1usize << (k - 1);
    let top = half;
    let gray: Vec<usize> = (0..half).map(|j| j ^ (j >> 1)).collect();

    let per_a0 = |a0: usize| -> Complex64 {
        let mut acc = PairwiseAccumulator::new();
        let mut dirs = vec![0usize; k - 1];
        let mut pos = vec![0usize; half];
        loop {
            pos[0] = a0;
            for j in 1..half {
                let bit = j.trailing_zeros() as usize;
                let (v, prev) = (gray[j], gray[j - 1]);
                pos[v] = if v & (1 << bit) != 0 {
                    table.add(pos[prev], dirs[bit])
                } else {
                    table.add(pos[prev], negs[dirs[bit]])
                };
            }
            let lower = (0..half).fold(Complex64::new(1.0, 0.0), |p, v| p * slots[v][pos[v]]);
            for ak in 0..n {
                let mut prod = lower;
                for v in 0..half {
                    prod *= slots[v | top][table.add(pos[v], ak)];
                }
                acc.push(prod);
            }
            // odometer over a_1..a_{k-1}
            let mut d = 0;
            while d < dirs.len() {
                dirs[d] += 1;
                if dirs[d] < n {
                    break;
                }
                dirs[d] = 0;
                d += 1;
            }
            if d == dirs.len() {
                break;
            }
        }
        acc.total()
    };

    let parts: Vec<Complex64> = (0..n).into_par_iter().map(per_a0).collect();
    pairwise_sum(&parts) / (n as f64).powi(k as i32 + 1)
}

/// Relabels cube directions: slot `v` of the result holds the function at
/// the vertex obtained by sending direction `i` to `perm[i]`.
pub fn permute_directions(fs: &[GroupFunction], perm: &[usize]) -> Result<Vec<GroupFunction>> {
    let k = perm.len();
    if fs.len() != 1 << k {
        return Err(HofaError::Arity {
            expected: 1 << k,
            got: fs.len(),
        });
    }
    let mut seen = vec![false; k];
    for &p in perm {
        if p >= k || std::mem::replace(&mut seen[p], true) {
            return Err(invalid("direction map is not a permutation"));
        }
    }
    Ok((0..fs.len())
        .map(|v| {
            let image = (0..k)
                .filter(|i| v & (1 << i) != 0)
                .fold(0, |m, i| m | (1 << perm[i]));
            fs[image].clone()
        })
        .collect())
}

/// A point automorphism `sigma` of the group. It acts on functions by
/// `f -> f o sigma^{-1}`, so composition of descriptors matches composition
/// of actions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Automorphism {
    Identity,
    /// Acts on functions as `f -> shift(f, c)`, i.e. `sigma(x) = x - c`.
    Translation(GroupElement),
    /// `sigma(x) = table[x]` on element indices.
    Permutation(Vec<usize>),
}

impl Automorphism {
    /// Point map `x -> sigma(x)` on element indices.
    pub fn point_map(&self, group: &FiniteAbelianGroup) -> Result<Vec<usize>> {
        let n = group.order();
        match self {
            Automorphism::Identity => Ok((0..n).collect()),
            Automorphism::Translation(c) => {
                let c = group.index_of(c)?;
                Ok((0..n).map(|x| group.sub_index(x, c)).collect())
            }
            Automorphism::Permutation(table) => {
                if table.len() != n {
                    return Err(HofaError::Arity {
                        expected: n,
                        got: table.len(),
                    });
                }
                let mut seen = vec![false; n];
                for &t in table {
                    if t >= n || std::mem::replace(&mut seen[t], true) {
                        return Err(invalid("permutation descriptor is not a bijection"));
                    }
                }
                Ok(table.clone())
            }
        }
    }

    /// `(sigma f)(x) = f(sigma^{-1}(x))`.
    pub fn act(&self, f: &GroupFunction) -> Result<GroupFunction> {
        match self {
            Automorphism::Identity => Ok(f.clone()),
            Automorphism::Translation(c) => f.shift(c),
            Automorphism::Permutation(_) => {
                let map = self.point_map(f.group())?;
                let mut values = vec![Complex64::new(0.0, 0.0); map.len()];
                for (x, &sx) in map.iter().enumerate() {
                    values[sx] = f.values()[x];
                }
                GroupFunction::from_values(f.group().clone(), values)
            }
        }
    }

    pub fn inverse(&self, group: &FiniteAbelianGroup) -> Result<Self> {
        Ok(match self {
            Automorphism::Identity => Automorphism::Identity,
            Automorphism::Translation(c) => Automorphism::Translation(group.neg(c)?),
            Automorphism::Permutation(_) => {
                let map = self.point_map(group)?;
                let mut inv = vec![0; map.len()];
                for (x, &sx) in map.iter().enumerate() {
                    inv[sx] = x;
                }
                Automorphism::Permutation(inv)
            }
        })
    }

    /// `self o other` as a permutation descriptor.
    pub fn compose(&self, other: &Self, group: &FiniteAbelianGroup) -> Result<Self> {
        let a = self.point_map(group)?;
        let b = other.point_map(group)?;
        Ok(Automorphism::Permutation(b.iter().map(|&y| a[y]).collect()))
    }

    /// `[s1, s2] = s1 s2 s1^{-1} s2^{-1}`.
    pub fn commutator(&self, other: &Self, group: &FiniteAbelianGroup) -> Result<Self> {
        let a_inv = self.inverse(group)?;
        let b_inv = other.inverse(group)?;
        self.compose(other, group)?
            .compose(&a_inv, group)?
            .compose(&b_inv, group)
    }
}

/// `l(T, sigma)`: applies `sigma` to the slots whose vertex lies in `T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaceAction {
    pub vertices: Vec<usize>,
    pub sigma: Automorphism,
}

impl FaceAction {
    pub fn new(vertices: Vec<usize>, sigma: Automorphism) -> Self {
        Self { vertices, sigma }
    }

    pub fn apply(&self, fs: &[GroupFunction], dim: usize) -> Result<Vec<GroupFunction>> {
        apply_face_action(self, fs, dim)
    }
}

pub fn apply_face_action(
    act: &FaceAction,
    fs: &[GroupFunction],
    dim: usize,
) -> Result<Vec<GroupFunction>> {
    let cube = CubeIndex::new(dim)?;
    if fs.len() != cube.vertex_count() {
        return Err(HofaError::Arity {
            expected: cube.vertex_count(),
            got: fs.len(),
        });
    }
    if let Some(&bad) = act.vertices.iter().find(|&&v| v >= cube.vertex_count()) {
        return Err(invalid(format!("vertex {bad} is not in V_{dim}")));
    }
    fs.iter()
        .enumerate()
        .map(|(v, f)| {
            if act.vertices.contains(&v) {
                act.sigma.act(f)
            } else {
                Ok(f.clone())
            }
        })
        .collect()
}

/// Checks `l(e1,s1) l(e2,s2) l(e1,s1)^{-1} l(e2,s2)^{-1} = l(w, [s1,s2])`
/// where `w` is the common vertex of the two edges. Each slot operator is
/// compared on the delta basis of the function space, which determines the
/// product action.
pub fn commutator_check(
    group: &FiniteAbelianGroup,
    dim: usize,
    e1: (usize, usize),
    e2: (usize, usize),
    s1: &Automorphism,
    s2: &Automorphism,
) -> Result<bool> {
    let cube = CubeIndex::new(dim)?;
    if !cube.is_edge(e1) || !cube.is_edge(e2) {
        return Err(invalid("commutator check needs two edges of the cube"));
    }
    let a = [e1.0, e1.1];
    let common: Vec<usize> = [e2.0, e2.1].into_iter().filter(|v| a.contains(v)).collect();
    if common.len() != 1 {
        return Err(invalid(format!(
            "edges must meet in exactly one vertex, they share {}",
            common.len()
        )));
    }
    let w = common[0];
    let l1 = FaceAction::new(vec![e1.0, e1.1], s1.clone());
    let l2 = FaceAction::new(vec![e2.0, e2.1], s2.clone());
    let l1_inv = FaceAction::new(l1.vertices.clone(), s1.inverse(group)?);
    let l2_inv = FaceAction::new(l2.vertices.clone(), s2.inverse(group)?);
    let expected = FaceAction::new(vec![w], s1.commutator(s2, group)?);
    for y in 0..group.order() {
        let delta = GroupFunction::indicator(group, &[y])?;
        let tuple = vec![delta; cube.vertex_count()];
        let mut lhs = l2_inv.apply(&tuple, dim)?;
        lhs = l1_inv.apply(&lhs, dim)?;
        lhs = l2.apply(&lhs, dim)?;
        lhs = l1.apply(&lhs, dim)?;
        let rhs = expected.apply(&tuple, dim)?;
        if lhs != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Result of the cube diagnostics run by the `cube-check` command.
#[derive(Debug, Clone, Serialize)]
pub struct CubeCheckReport {
    pub k: usize,
    pub spider_image_size: u128,
    pub expected_image_size: u128,
    pub spider_injective: bool,
    pub spider_outputs_in_cube: bool,
    /// Number of vertex tuples satisfying all 2-face equations, when the
    /// exhaustive scan fits the envelope.
    pub kernel_size: Option<u128>,
    pub edge_actions: Vec<EdgeInvariance>,
    pub full_translation_max_deviation: f64,
    pub full_translation_preserved: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct EdgeInvariance {
    pub edge: (usize, usize),
    pub max_deviation: f64,
    pub preserved: bool,
}

/// Membership and invariance diagnostics on `group` for cube dimension `k`.
/// Invariance is probed with the supplied vertex tuples (one per trial).
pub fn cube_check_suite(
    group: &FiniteAbelianGroup,
    k: usize,
    trials: &[Vec<GroupFunction>],
    tol: f64,
) -> Result<CubeCheckReport> {
    let cube = CubeIndex::new(k)?;
    if k == 0 {
        return Err(invalid("cube checks need k >= 1"));
    }
    let n = group.order();
    let expected = pow_u128(n, k + 1);
    ensure("order^(k+1)", expected, 10_000_000)?;

    let mut seen = std::collections::HashSet::new();
    let mut all_members = true;
    let mut coords = vec![0usize; k + 1];
    loop {
        let image = spider_indices(group, k, &coords);
        all_members &= cube_membership_indices(group, &cube, &image);
        seen.insert(image);
        if !odometer(&mut coords, n) {
            break;
        }
    }

    let kernel_size = (pow_u128(n, cube.vertex_count()) <= 10_000_000).then(|| {
        let mut tuple = vec![0usize; cube.vertex_count()];
        let mut count = 0u128;
        loop {
            if cube_membership_indices(group, &cube, &tuple) {
                count += 1;
            }
            if !odometer(&mut tuple, n) {
                break;
            }
        }
        count
    });

    let mut edge_actions = Vec::new();
    for e in cube.edges() {
        let mut worst: f64 = 0.0;
        for fs in trials {
            let base = tilde_u(fs, k)?;
            for c in 1..n {
                let act = FaceAction::new(
                    vec![e.0, e.1],
                    Automorphism::Translation(group.element_at(c)),
                );
                let moved = tilde_u(&act.apply(fs, k)?, k)?;
                worst = worst.max((moved - base).norm());
            }
        }
        edge_actions.push(EdgeInvariance {
            edge: e,
            max_deviation: worst,
            preserved: worst <= tol,
        });
    }

    let mut full: f64 = 0.0;
    for fs in trials {
        let base = tilde_u(fs, k)?;
        for c in 1..n {
            let act = FaceAction::new(
                cube.vertices().collect(),
                Automorphism::Translation(group.element_at(c)),
            );
            full = full.max((tilde_u(&act.apply(fs, k)?, k)? - base).norm());
        }
    }

    Ok(CubeCheckReport {
        k,
        spider_image_size: seen.len() as u128,
        expected_image_size: expected,
        spider_injective: seen.len() as u128 == expected,
        spider_outputs_in_cube: all_members,
        kernel_size,
        edge_actions,
        full_translation_max_deviation: full,
        full_translation_preserved: full <= tol,
    })
}

/// Advances a base-`n` counter (first digit fastest); false on wrap-around.
pub(crate) fn odometer(digits: &mut [usize], n: usize) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < n {
            return true;
        }
        *d = 0;
    }
    false
}
