//! Octahedral norms of multi-variable functions and Gowers norms.
//!
//! `U_k(f)` has two independent routes: the octahedral norm of the sum-lift
//! `f(x_1 + .. + x_k)` evaluated straight from its defining integral, and the
//! cube form with alternating conjugation summed over spider coordinates.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::cube::{cube_sum, CubeIndex};
use crate::error::{invalid, HofaError, Result};
use crate::gfunc::GroupFunction;
use crate::group::{FiniteAbelianGroup, GroupElement};
use crate::limits::{ensure, pow_u128, Limits};
use crate::reduce::{pairwise_sum, PairwiseAccumulator};

/// Negative norm powers down to this value are rounding noise.
pub const NEGATIVE_CLAMP: f64 = -1e-12;

/// Singular values above this count toward the slice span.
pub const SLICE_RANK_TOL: f64 = 1e-9;

/// A function on `A^k`, row-major with `x_1` slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiFunction {
    group: FiniteAbelianGroup,
    arity: usize,
    values: Vec<Complex64>,
}

impl MultiFunction {
    pub fn from_values(
        group: FiniteAbelianGroup,
        arity: usize,
        values: Vec<Complex64>,
    ) -> Result<Self> {
        let want = pow_u128(group.order(), arity);
        if values.len() as u128 != want {
            return Err(HofaError::Arity {
                expected: want as usize,
                got: values.len(),
            });
        }
        Ok(Self {
            group,
            arity,
            values,
        })
    }

    pub fn constant(group: &FiniteAbelianGroup, arity: usize, c: Complex64) -> Result<Self> {
        let len = pow_u128(group.order(), arity);
        ensure("order^k", len, Limits::default().table_entries)?;
        Ok(Self {
            group: group.clone(),
            arity,
            values: vec![c; len as usize],
        })
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Value at a tuple of element indices.
    pub fn at(&self, xs: &[usize]) -> Complex64 {
        let n = self.group.order();
        self.values[xs.iter().fold(0, |acc, &x| acc * n + x)]
    }
}

/// `f_k(x_1, .., x_k) = f(x_1 + .. + x_k)`.
pub fn sum_lift(f: &GroupFunction, k: usize) -> Result<MultiFunction> {
    sum_lift_with(f, k, &Limits::default())
}

pub fn sum_lift_with(f: &GroupFunction, k: usize, limits: &Limits) -> Result<MultiFunction> {
    if k == 0 {
        return Err(invalid("sum lift needs k >= 1"));
    }
    let g = f.group();
    let n = g.order();
    let len = pow_u128(n, k);
    ensure("order^k", len, limits.table_entries)?;
    let len = len as usize;
    // sums[i] = index of the sum of the tuple with flat index i
    let mut sums = vec![0usize; len];
    let mut block = 1;
    for _ in 0..k {
        for i in (0..block).rev() {
            for x in 0..n {
                sums[i * n + x] = g.add_index(sums[i], x);
            }
        }
        block *= n;
    }
    let values = sums.iter().map(|&s| f.values()[s]).collect();
    Ok(MultiFunction {
        group: g.clone(),
        arity: k,
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OctahedralMethod {
    /// Enumerates all `2k` coordinates `x_{i,j}` of the defining integral.
    BruteForce,
    /// Averages out one direction at a time.
    Folding,
}

/// `O_k(F)`.
pub fn octahedral_norm(f: &MultiFunction) -> Result<f64> {
    octahedral_norm_with(f, OctahedralMethod::Folding, &Limits::default())
}

pub fn octahedral_norm_with(
    f: &MultiFunction,
    method: OctahedralMethod,
    limits: &Limits,
) -> Result<f64> {
    if f.arity == 0 {
        return Err(invalid("octahedral norm needs arity >= 1"));
    }
    let power = match method {
        OctahedralMethod::BruteForce => {
            ensure(
                "order^(2k)",
                pow_u128(f.group.order(), 2 * f.arity),
                limits.definition_terms,
            )?;
            octahedral_brute(f)
        }
        OctahedralMethod::Folding => {
            ensure(
                "order^(2k-1)",
                pow_u128(f.group.order(), 2 * f.arity - 1),
                limits.definition_terms,
            )?;
            octahedral_fold(&f.values, f.arity, f.group.order())
        }
    };
    root_of_power(power, f.arity)
}

/// Takes the `2^k`-th root of a norm power after clamping rounding noise.
pub(crate) fn root_of_power(power: f64, k: usize) -> Result<f64> {
    if power < NEGATIVE_CLAMP || !power.is_finite() {
        return Err(HofaError::Internal(format!(
            "norm power {power:e} is negative"
        )));
    }
    Ok(power.max(0.0).powf(1.0 / (1u64 << k) as f64))
}

/// The integrand product over `c in {0,1}^k` with conjugation iff `|c|` odd,
/// averaged over all `x_{i,j}`; parallel over the outermost coordinate pair.
fn octahedral_brute(f: &MultiFunction) -> f64 {
    let n = f.group.order();
    let k = f.arity;
    let strides: Vec<usize> = (0..k).map(|i| n.pow((k - 1 - i) as u32)).collect();
    let corners = 1usize << k;
    let total = crate::reduce::par_map_sum(n * n, |outer| {
        let mut acc = PairwiseAccumulator::new();
        let mut xs = vec![0usize; 2 * k];
        xs[0] = outer / n;
        xs[1] = outer % n;
        loop {
            let mut prod = Complex64::new(1.0, 0.0);
            for c in 0..corners {
                let idx: usize = (0..k)
                    .map(|i| {
                        let bit = (c >> (k - 1 - i)) & 1;
                        xs[2 * i + bit] * strides[i]
                    })
                    .sum();
                let v = f.values[idx];
                prod *= if c.count_ones() % 2 == 1 { v.conj() } else { v };
            }
            acc.push(prod);
            if !crate::cube::odometer(&mut xs[2..], n) {
                break;
            }
        }
        acc.total()
    });
    (total / (n as f64).powi(2 * k as i32)).re
}

/// `O_k(F)^{2^k} = E_{y,y'} O_{k-1}(F(., y) conj F(., y'))^{2^{k-1}}` down
/// to `O_1(G)^2 = |E G|^2`. Pairs `(y', y)` contribute the conjugate of
/// `(y, y')`, so only `y <= y'` is visited.
fn octahedral_fold(values: &[Complex64], k: usize, n: usize) -> f64 {
    if k == 1 {
        let m = pairwise_sum(values) / n as f64;
        return m.norm_sqr();
    }
    let inner = values.len() / n;
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|y| (y..n).map(move |z| (y, z))).collect();
    let term = |&(y, z): &(usize, usize)| -> f64 {
        let g: Vec<Complex64> = (0..inner)
            .map(|r| values[r * n + y] * values[r * n + z].conj())
            .collect();
        let v = octahedral_fold(&g, k - 1, n);
        if y == z {
            v
        } else {
            2.0 * v
        }
    };
    let parts: Vec<f64> = if values.len() > 4096 {
        pairs.par_iter().map(term).collect()
    } else {
        pairs.iter().map(term).collect()
    };
    crate::reduce::pairwise_sum_real(&parts) / (n * n) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GowersMethod {
    /// Cube form with alternating conjugation, `O(order^(k+1))`.
    Cube,
    /// Octahedral norm of the sum-lift from the defining integral.
    Definition,
}

/// `U_k(f)`.
pub fn gowers_u(f: &GroupFunction, k: usize, method: GowersMethod) -> Result<f64> {
    gowers_u_with(f, k, method, &Limits::default())
}

pub fn gowers_u_with(
    f: &GroupFunction,
    k: usize,
    method: GowersMethod,
    limits: &Limits,
) -> Result<f64> {
    if k == 0 {
        return Err(invalid("Gowers norm needs k >= 1"));
    }
    let n = f.group().order();
    match method {
        GowersMethod::Cube => {
            CubeIndex::new(k)?;
            ensure("order^(k+1)", pow_u128(n, k + 1), limits.cube_terms)?;
            let conj = f.conj();
            let slots: Vec<&[Complex64]> = (0..1usize << k)
                .map(|v| {
                    if v.count_ones() % 2 == 1 {
                        conj.values()
                    } else {
                        f.values()
                    }
                })
                .collect();
            root_of_power(cube_sum(f.group(), k, &slots).re, k)
        }
        GowersMethod::Definition => {
            ensure("order^(2k)", pow_u128(n, 2 * k), limits.definition_terms)?;
            let lifted = sum_lift_with(f, k, limits)?;
            octahedral_norm_with(&lifted, OctahedralMethod::BruteForce, limits)
        }
    }
}

/// True iff `O_k(F) <= eps`.
pub fn quasirandom_test(f: &MultiFunction, eps: f64) -> Result<bool> {
    if eps <= 0.0 {
        return Err(invalid("epsilon must be positive"));
    }
    Ok(octahedral_norm(f)? <= eps)
}

/// `slice(F, x)(x_1..x_{k-1}) = F(x_1..x_{k-1}, x)`.
pub fn slice(f: &MultiFunction, x: &GroupElement) -> Result<MultiFunction> {
    if f.arity < 2 {
        return Err(invalid("slices need arity >= 2"));
    }
    let x = f.group.index_of(x)?;
    Ok(slice_index(f, x))
}

fn slice_index(f: &MultiFunction, x: usize) -> MultiFunction {
    let n = f.group.order();
    let values = f.values.iter().skip(x).step_by(n).copied().collect();
    MultiFunction {
        group: f.group.clone(),
        arity: f.arity - 1,
        values,
    }
}

/// Dimension of the span of all slices: rank of the `order x order^(k-1)`
/// slice matrix, counting singular values above `1e-9`.
pub fn slice_span_dim(f: &MultiFunction) -> Result<usize> {
    if f.arity < 2 {
        return Err(invalid("slices need arity >= 2"));
    }
    let n = f.group.order();
    let cols = f.values.len() / n;
    let m = DMatrix::from_fn(n, cols, |x, r| f.values[r * n + x]);
    let sv = m.singular_values();
    Ok(sv.iter().filter(|&&s| s > SLICE_RANK_TOL).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::character_by_index;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn grp(f: &[i64]) -> FiniteAbelianGroup {
        FiniteAbelianGroup::new(f).unwrap()
    }

    fn quad_phase(p: usize) -> GroupFunction {
        let g = grp(&[p as i64]);
        GroupFunction::from_fn(&g, |x| {
            Complex64::from_polar(1.0, TAU * ((x * x) % p) as f64 / p as f64)
        })
    }

    fn random_fn(g: &FiniteAbelianGroup, rng: &mut ChaCha8Rng) -> GroupFunction {
        GroupFunction::from_fn(g, |_| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    #[test]
    fn sum_lift_examples() {
        let z2 = grp(&[2]);
        let f = GroupFunction::from_real(&z2, &[3.0, 7.0]).unwrap();
        let f2 = sum_lift(&f, 2).unwrap();
        let re: Vec<f64> = f2.values().iter().map(|v| v.re).collect();
        assert_eq!(re, vec![3.0, 7.0, 7.0, 3.0]);
        let one = GroupFunction::constant(&grp(&[3]), Complex64::new(1.0, 0.0));
        assert!(sum_lift(&one, 3)
            .unwrap()
            .values()
            .iter()
            .all(|v| *v == Complex64::new(1.0, 0.0)));
        // indicator of S lifts to the indicator of {x_1 + x_2 + x_3 in S}
        let z5 = grp(&[5]);
        let s = GroupFunction::indicator(&z5, &[0, 1]).unwrap();
        let lifted = sum_lift(&s, 3).unwrap();
        for a in 0..5 {
            for b in 0..5 {
                for c in 0..5 {
                    let want = if (a + b + c) % 5 <= 1 { 1.0 } else { 0.0 };
                    assert_eq!(lifted.at(&[a, b, c]).re, want);
                }
            }
        }
    }

    #[test]
    fn sum_lift_respects_size_cap() {
        let g = grp(&[10]);
        let f = GroupFunction::zeros(&g);
        assert!(matches!(sum_lift(&f, 8), Err(HofaError::SizeCap { .. })));
    }

    #[test]
    fn octahedral_examples() {
        let z3 = grp(&[3]);
        for method in [OctahedralMethod::BruteForce, OctahedralMethod::Folding] {
            let one = MultiFunction::constant(&z3, 3, Complex64::new(1.0, 0.0)).unwrap();
            assert!(
                (octahedral_norm_with(&one, method, &Limits::default()).unwrap() - 1.0).abs()
                    < 1e-12
            );
            let z2 = grp(&[2]);
            let ind = MultiFunction::from_values(
                z2,
                1,
                vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            )
            .unwrap();
            assert!(
                (octahedral_norm_with(&ind, method, &Limits::default()).unwrap() - 0.5).abs()
                    < 1e-15
            );
        }
    }

    #[test]
    fn product_of_unimodular_functions_has_norm_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let g = grp(&[5]);
        let f: Vec<Complex64> = (0..5)
            .map(|_| Complex64::from_polar(1.0, rng.gen_range(0.0..TAU)))
            .collect();
        let h: Vec<Complex64> = (0..5)
            .map(|_| Complex64::from_polar(1.0, rng.gen_range(0.0..TAU)))
            .collect();
        let values = (0..25).map(|i| f[i / 5] * h[i % 5]).collect();
        let m = MultiFunction::from_values(g, 2, values).unwrap();
        for method in [OctahedralMethod::BruteForce, OctahedralMethod::Folding] {
            assert!(
                (octahedral_norm_with(&m, method, &Limits::default()).unwrap() - 1.0).abs() < 1e-12
            );
        }
    }

    #[test]
    fn octahedral_paths_agree_on_random_tables() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for (factors, k) in [
            (vec![2], 4),
            (vec![3], 3),
            (vec![5], 2),
            (vec![2, 2], 3),
            (vec![7], 2),
            (vec![4], 1),
        ] {
            let g = grp(&factors);
            let len = g.order().pow(k as u32);
            let values = (0..len)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let m = MultiFunction::from_values(g, k, values).unwrap();
            let a =
                octahedral_norm_with(&m, OctahedralMethod::BruteForce, &Limits::default()).unwrap();
            let b =
                octahedral_norm_with(&m, OctahedralMethod::Folding, &Limits::default()).unwrap();
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn gowers_examples() {
        let z2 = grp(&[2]);
        let ind = GroupFunction::indicator(&z2, &[0]).unwrap();
        for m in [GowersMethod::Cube, GowersMethod::Definition] {
            assert!((gowers_u(&ind, 1, m).unwrap() - 0.5).abs() < 1e-15);
        }
        let q = quad_phase(5);
        let want = 5f64.powf(-0.25);
        for m in [GowersMethod::Cube, GowersMethod::Definition] {
            assert!((gowers_u(&q, 2, m).unwrap() - want).abs() < 1e-12);
            assert!((gowers_u(&q, 3, m).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn u2_matches_fourier_fourth_moment() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for factors in [vec![32], vec![4, 8], vec![3, 3], vec![2, 2, 2, 2, 2]] {
            let g = grp(&factors);
            let f = random_fn(&g, &mut rng);
            let fourth: f64 = f
                .fourier()
                .coeffs()
                .iter()
                .map(|c| c.norm_sqr().powi(2))
                .sum();
            let u2 = gowers_u(&f, 2, GowersMethod::Cube).unwrap();
            assert!((u2.powi(4) - fourth).abs() < 1e-9);
        }
    }

    #[test]
    fn gowers_paths_agree_and_are_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for factors in [vec![2], vec![3], vec![5], vec![2, 3], vec![7], vec![2, 2]] {
            let g = grp(&factors);
            let f = random_fn(&g, &mut rng);
            let mut prev = 0.0;
            for k in 1..=3 {
                let a = gowers_u(&f, k, GowersMethod::Cube).unwrap();
                let b = gowers_u(&f, k, GowersMethod::Definition).unwrap();
                assert!((a - b).abs() < 1e-9);
                assert!(a + 1e-12 >= prev);
                prev = a;
            }
        }
    }

    #[test]
    fn shift_and_modulation_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let g = grp(&[6]);
        let f = random_fn(&g, &mut rng);
        for k in 1..=3 {
            let base = gowers_u(&f, k, GowersMethod::Cube).unwrap();
            for t in g.elements() {
                let s = gowers_u(&f.shift(&t).unwrap(), k, GowersMethod::Cube).unwrap();
                assert!((s - base).abs() < 1e-9);
            }
            if k >= 2 {
                for xi in 0..6 {
                    let m = f.mul(&character_by_index(&g, xi)).unwrap();
                    assert!((gowers_u(&m, k, GowersMethod::Cube).unwrap() - base).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn definition_path_is_gated() {
        let f = quad_phase(5);
        assert!(matches!(
            gowers_u(&f, 9, GowersMethod::Definition),
            Err(HofaError::SizeCap {
                what: "order^(2k)",
                ..
            })
        ));
    }

    #[test]
    fn quasirandom_examples() {
        let g = grp(&[4]);
        let zero = MultiFunction::constant(&g, 2, Complex64::new(0.0, 0.0)).unwrap();
        assert!(quasirandom_test(&zero, 1e-6).unwrap());
        let one = MultiFunction::constant(&g, 2, Complex64::new(1.0, 0.0)).unwrap();
        assert!(!quasirandom_test(&one, 0.5).unwrap());
        assert!(quasirandom_test(&one, 0.0).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let z31 = grp(&[31]);
        let pm = GroupFunction::from_fn(&z31, |_| {
            Complex64::new(if rng.gen_bool(0.5) { 1.0 } else { -1.0 }, 0.0)
        });
        let lifted = sum_lift(&pm, 2).unwrap();
        let norm = octahedral_norm(&lifted).unwrap();
        assert!(norm < 0.5, "norm {norm}");
        assert!(quasirandom_test(&lifted, 0.5).unwrap());
    }

    #[test]
    fn slices_of_sum_lifts_are_translates() {
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let g = grp(&[5]);
        let f = random_fn(&g, &mut rng);
        let f3 = sum_lift(&f, 3).unwrap();
        for x in g.elements() {
            let s = slice(&f3, &x).unwrap();
            assert_eq!(s, sum_lift(&f.shift(&x).unwrap(), 2).unwrap());
        }
        let f1 = sum_lift(&f, 1).unwrap();
        assert!(slice(&f1, &g.zero()).is_err());
    }

    #[test]
    fn slice_span_counts_fourier_support() {
        // Oracle: slices of f_2 are the translates of f, whose span is the
        // span of the characters in the Fourier support.
        let g = grp(&[6]);
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for support in [vec![0usize], vec![1, 4], vec![0, 2, 3, 5], (0..6).collect()] {
            let mut f = GroupFunction::zeros(&g);
            for &xi in &support {
                let c = Complex64::new(rng.gen_range(0.5..1.0), rng.gen_range(-1.0..1.0));
                f = f.axpy(c, &character_by_index(&g, xi)).unwrap();
            }
            let nonzero = f
                .fourier()
                .coeffs()
                .iter()
                .filter(|c| c.norm() > 1e-9)
                .count();
            assert_eq!(nonzero, support.len());
            assert_eq!(
                slice_span_dim(&sum_lift(&f, 2).unwrap()).unwrap(),
                support.len()
            );
        }
        let one = MultiFunction::constant(&g, 3, Complex64::new(1.0, 0.0)).unwrap();
        assert_eq!(slice_span_dim(&one).unwrap(), 1);
    }

    #[test]
    fn phase_degree_controls_gowers_level() {
        for p in [3usize, 5, 7] {
            let g = grp(&[p as i64]);
            for d in 1..=3usize.min(p - 1) {
                let f = GroupFunction::from_fn(&g, |x| {
                    let v = (x as u64).pow(d as u32) % p as u64;
                    Complex64::from_polar(1.0, TAU * v as f64 / p as f64)
                });
                assert!((gowers_u(&f, d + 1, GowersMethod::Cube).unwrap() - 1.0).abs() < 1e-9);
                assert!(gowers_u(&f, d, GowersMethod::Cube).unwrap() < 1.0 - 1e-6);
            }
        }
    }
}
