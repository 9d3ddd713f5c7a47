//! Polynomial phases `x -> exp(2 pi i P(x) / p)` on `Z_p^n`.
//!
//! These are the finite order-`k` characters: unimodular, closed under
//! pointwise multiplication (coefficient addition), and each multiplicative
//! derivative drops the degree by one. Degrees stay below `p`, where
//! polynomial functions and reduced polynomials are in bijection.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, HofaError, Result};
use crate::gfunc::{inner_slices, GroupFunction};
use crate::group::{FiniteAbelianGroup, GroupElement};
use crate::limits::{ensure, pow_u128, Limits};

/// Exponent multi-index, one entry per variable.
pub type Monomial = Vec<u32>;

/// A polynomial over `Z_p` in `n` variables, read as a phase function.
///
/// Coefficients are reduced and zero coefficients are absent, so equality
/// of values is equality of functions. Phases are ordered by `p`, `n` and
/// then lexicographically by the dense coefficient vector, monomials taken
/// by degree and then exponent vector; it is the tie-break order used by
/// every ranking in the crate.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PolynomialPhase {
    p: u32,
    n: usize,
    coeffs: BTreeMap<Monomial, u32>,
}

fn graded(coeffs: &BTreeMap<Monomial, u32>) -> Vec<(u32, &Monomial, u32)> {
    let mut v: Vec<_> = coeffs
        .iter()
        .map(|(m, &c)| (m.iter().sum(), m, c))
        .collect();
    v.sort();
    v
}

impl Ord for PolynomialPhase {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.p, self.n).cmp(&(other.p, other.n)).then_with(|| {
            let (a, b) = (graded(&self.coeffs), graded(&other.coeffs));
            let (mut i, mut j) = (0, 0);
            // the first monomial where the dense vectors differ decides
            loop {
                match (a.get(i), b.get(j)) {
                    (None, None) => return Ordering::Equal,
                    (Some(_), None) => return Ordering::Greater,
                    (None, Some(_)) => return Ordering::Less,
                    (Some(x), Some(y)) => match (x.0, x.1).cmp(&(y.0, y.1)) {
                        Ordering::Less => return Ordering::Greater,
                        Ordering::Greater => return Ordering::Less,
                        Ordering::Equal if x.2 != y.2 => return x.2.cmp(&y.2),
                        Ordering::Equal => {
                            i += 1;
                            j += 1;
                        }
                    },
                }
            }
        })
    }
}

impl PartialOrd for PolynomialPhase {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn is_prime(p: u64) -> bool {
    p >= 2
        && (2..)
            .take_while(|d| d * d <= p)
            .all(|d| !p.is_multiple_of(d))
}

/// `Some((p, n))` when the group is `Z_p^n` for an odd prime `p`.
pub fn prime_power_shape(group: &FiniteAbelianGroup) -> Option<(u32, usize)> {
    let p = group.factors()[0];
    (group.factors().iter().all(|&f| f == p) && p > 2 && is_prime(p as u64))
        .then_some((p as u32, group.rank()))
}

fn require_shape(group: &FiniteAbelianGroup) -> Result<(u32, usize)> {
    prime_power_shape(group)
        .ok_or_else(|| invalid("polynomial phases live on Z_p^n with p an odd prime"))
}

impl PolynomialPhase {
    pub fn new(p: u32, n: usize, terms: impl IntoIterator<Item = (Monomial, i64)>) -> Result<Self> {
        if !is_prime(p as u64) || p == 2 {
            return Err(invalid(format!("{p} is not an odd prime")));
        }
        if n == 0 {
            return Err(invalid("phases need at least one variable"));
        }
        let mut coeffs = BTreeMap::new();
        for (m, c) in terms {
            if m.len() != n {
                return Err(HofaError::Arity {
                    expected: n,
                    got: m.len(),
                });
            }
            if m.iter().any(|&e| e >= p) {
                return Err(invalid(format!("exponent in {m:?} exceeds p - 1")));
            }
            let slot = coeffs.entry(m).or_insert(0u32);
            *slot = ((*slot as i64 + c).rem_euclid(p as i64)) as u32;
        }
        coeffs.retain(|_, c| *c != 0);
        Ok(Self { p, n, coeffs })
    }

    /// Single-variable phase from `[c_0, c_1, ..]` meaning `sum c_j x^j`.
    pub fn univariate(p: u32, coeffs: &[i64]) -> Result<Self> {
        Self::new(
            p,
            1,
            coeffs.iter().enumerate().map(|(j, &c)| (vec![j as u32], c)),
        )
    }

    pub fn zero(p: u32, n: usize) -> Result<Self> {
        Self::new(p, n, std::iter::empty())
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &BTreeMap<Monomial, u32> {
        &self.coeffs
    }

    /// Largest total degree of a present monomial; 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.coeffs
            .keys()
            .map(|m| m.iter().sum())
            .max()
            .unwrap_or(0)
    }

    pub fn group(&self) -> FiniteAbelianGroup {
        FiniteAbelianGroup::power(self.p as usize, self.n).expect("Z_p^n within the order cap")
    }

    /// Constant coefficient.
    pub fn constant_term(&self) -> u32 {
        self.coeffs.get(&vec![0; self.n]).copied().unwrap_or(0)
    }

    pub fn without_constant(&self) -> Self {
        let mut out = self.clone();
        out.coeffs.remove(&vec![0; self.n]);
        out
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        if self.p != other.p || self.n != other.n {
            return Err(HofaError::GroupMismatch);
        }
        Ok(())
    }

    /// Pointwise product of phases, i.e. the sum of polynomials.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        Self::new(
            self.p,
            self.n,
            self.coeffs
                .iter()
                .chain(&other.coeffs)
                .map(|(m, &c)| (m.clone(), c as i64)),
        )
    }

    /// Complex conjugate phase, i.e. the negated polynomial.
    pub fn conj(&self) -> Self {
        Self::new(
            self.p,
            self.n,
            self.coeffs.iter().map(|(m, &c)| (m.clone(), -(c as i64))),
        )
        .expect("same shape")
    }

    /// `P(x) mod p` for every element index of `Z_p^n`.
    pub fn residues(&self) -> Vec<u32> {
        let p = self.p as u64;
        let group = self.group();
        let powers: Vec<Vec<u64>> = (0..p)
            .map(|x| {
                let mut row = vec![1u64; p as usize];
                for e in 1..p as usize {
                    row[e] = row[e - 1] * x % p;
                }
                row
            })
            .collect();
        (0..group.order())
            .map(|i| {
                let x = group.element_at(i);
                let mut acc = 0u64;
                for (m, &c) in &self.coeffs {
                    let term = m.iter().zip(x.residues()).fold(c as u64, |t, (&e, &xv)| {
                        t * powers[xv as usize][e as usize] % p
                    });
                    acc = (acc + term) % p;
                }
                acc as u32
            })
            .collect()
    }

    /// The unimodular function `exp(2 pi i P(x) / p)` on `Z_p^n`.
    pub fn eval(&self) -> GroupFunction {
        let roots = roots(self.p);
        let values = self
            .residues()
            .into_iter()
            .map(|r| roots[r as usize])
            .collect();
        GroupFunction::from_values(self.group(), values).expect("length matches order")
    }

    /// The phase of `P(x + t) - P(x)`, expanded symbolically mod `p`.
    pub fn delta(&self, t: &GroupElement) -> Result<Self> {
        let group = self.group();
        group.check(t)?;
        let p = self.p as u64;
        let binom = binomials(self.p as usize);
        let tpow = |j: usize, e: usize| -> u64 {
            let tj = t.residues()[j] as u64;
            (0..e).fold(1u64, |acc, _| acc * tj % p)
        };
        let mut terms: Vec<(Monomial, i64)> = Vec::new();
        for (m, &c) in &self.coeffs {
            // prod_j (x_j + t_j)^{e_j} = prod_j sum_{a_j <= e_j} C(e_j, a_j) t_j^{e_j - a_j} x_j^{a_j}
            let mut partial: Vec<(Monomial, u64)> = vec![(Vec::with_capacity(self.n), c as u64)];
            for (j, &e) in m.iter().enumerate() {
                let e = e as usize;
                let mut next = Vec::with_capacity(partial.len() * (e + 1));
                for (mono, coef) in &partial {
                    for (a, &b) in binom[e].iter().enumerate().take(e + 1) {
                        let factor = b * tpow(j, e - a) % p;
                        let mut mm = mono.clone();
                        mm.push(a as u32);
                        next.push((mm, coef * factor % p));
                    }
                }
                partial = next;
            }
            terms.extend(partial.into_iter().map(|(mm, v)| (mm, v as i64)));
            terms.push((m.clone(), -(c as i64)));
        }
        Self::new(self.p, self.n, terms)
    }
}

/// `phase_eval`, checking the target group.
pub fn phase_eval(phase: &PolynomialPhase, group: &FiniteAbelianGroup) -> Result<GroupFunction> {
    if prime_power_shape(group) != Some((phase.p, phase.n)) {
        return Err(HofaError::GroupMismatch);
    }
    Ok(phase.eval())
}

pub fn phase_delta(phase: &PolynomialPhase, t: &GroupElement) -> Result<PolynomialPhase> {
    phase.delta(t)
}

fn roots(p: u32) -> Vec<Complex64> {
    (0..p)
        .map(|r| Complex64::from_polar(1.0, TAU * r as f64 / p as f64))
        .collect()
}

fn binomials(n: usize) -> Vec<Vec<u64>> {
    let mut c = vec![vec![0u64; n + 1]; n + 1];
    for i in 0..=n {
        c[i][0] = 1;
        for j in 1..=i {
            c[i][j] = c[i - 1][j - 1] + if j < i { c[i - 1][j] } else { 0 };
        }
    }
    c
}

/// Monomials in `n` variables with total degree in `[min_deg, max_deg]`
/// and every exponent below `p`, ordered by degree then exponent vector.
pub fn monomials(p: u32, n: usize, min_deg: u32, max_deg: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; n];
    loop {
        let d: u32 = cur.iter().sum();
        if d >= min_deg && d <= max_deg {
            out.push(cur.clone());
        }
        let mut j = n;
        loop {
            if j == 0 {
                out.sort_by_key(|m| (m.iter().sum::<u32>(), m.clone()));
                return out;
            }
            j -= 1;
            cur[j] += 1;
            if cur[j] < p && cur.iter().sum::<u32>() <= max_deg {
                break;
            }
            cur[j] = 0;
        }
    }
}

/// Every phase whose monomials come from `basis`, in sorted order.
fn all_combinations(
    p: u32,
    n: usize,
    basis: &[Monomial],
    limits: &Limits,
) -> Result<Vec<PolynomialPhase>> {
    ensure(
        "dictionary size",
        pow_u128(p as usize, basis.len()),
        limits.dictionary,
    )?;
    let mut out = Vec::new();
    let mut digits = vec![0usize; basis.len()];
    loop {
        let terms = basis
            .iter()
            .zip(&digits)
            .map(|(m, &c)| (m.clone(), c as i64));
        out.push(PolynomialPhase::new(p, n, terms)?);
        if !crate::cube::odometer(&mut digits, p as usize) {
            break;
        }
    }
    out.sort();
    Ok(out)
}

fn check_degree(p: u32, d: u32) -> Result<()> {
    if d >= p {
        return Err(invalid(format!("degree {d} must be below p = {p}")));
    }
    Ok(())
}

/// All phases of degree at most `max_degree` (constants included).
pub fn enumerate_phases(p: u32, n: usize, max_degree: u32) -> Result<Vec<PolynomialPhase>> {
    enumerate_phases_with(p, n, max_degree, &Limits::default())
}

pub fn enumerate_phases_with(
    p: u32,
    n: usize,
    max_degree: u32,
    limits: &Limits,
) -> Result<Vec<PolynomialPhase>> {
    check_degree(p, max_degree)?;
    PolynomialPhase::zero(p, n)?;
    all_combinations(p, n, &monomials(p, n, 0, max_degree), limits)
}

/// Phases of degree at most `max_degree` with zero constant term: one
/// representative per class modulo constant phase factors.
pub fn phase_dictionary(p: u32, n: usize, max_degree: u32) -> Result<Vec<PolynomialPhase>> {
    phase_dictionary_with(p, n, max_degree, &Limits::default())
}

pub fn phase_dictionary_with(
    p: u32,
    n: usize,
    max_degree: u32,
    limits: &Limits,
) -> Result<Vec<PolynomialPhase>> {
    check_degree(p, max_degree)?;
    PolynomialPhase::zero(p, n)?;
    all_combinations(p, n, &monomials(p, n, 1, max_degree), limits)
}

/// Representatives of `{deg <= k} / {deg <= k-1}`: phases built only from
/// degree-`k` monomials.
pub fn dual_representatives(p: u32, n: usize, k: u32) -> Result<Vec<PolynomialPhase>> {
    check_degree(p, k)?;
    PolynomialPhase::zero(p, n)?;
    all_combinations(p, n, &monomials(p, n, k, k), &Limits::default())
}

/// A family of phases evaluated once, for repeated correlation scans.
#[derive(Debug, Clone)]
pub struct EvaluatedFamily {
    p: u32,
    order: usize,
    phases: Vec<PolynomialPhase>,
    residues: Vec<u32>,
}

impl EvaluatedFamily {
    pub fn new(phases: Vec<PolynomialPhase>) -> Result<Self> {
        let first = phases
            .first()
            .ok_or_else(|| invalid("empty phase family"))?;
        let (p, n) = (first.p, first.n);
        if phases.iter().any(|f| f.p != p || f.n != n) {
            return Err(HofaError::GroupMismatch);
        }
        let order = first.group().order();
        let residues = phases.par_iter().flat_map_iter(|f| f.residues()).collect();
        Ok(Self {
            p,
            order,
            phases,
            residues,
        })
    }

    pub fn phases(&self) -> &[PolynomialPhase] {
        &self.phases
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn group(&self) -> FiniteAbelianGroup {
        self.phases[0].group()
    }

    pub fn values(&self, i: usize) -> Vec<Complex64> {
        let roots = roots(self.p);
        self.residues[i * self.order..(i + 1) * self.order]
            .iter()
            .map(|&r| roots[r as usize])
            .collect()
    }

    /// `<f, phase_i>` for every member, in family order.
    pub fn correlations(&self, f: &GroupFunction) -> Result<Vec<Complex64>> {
        if f.group() != &self.group() {
            return Err(HofaError::GroupMismatch);
        }
        let roots = roots(self.p);
        let vals = f.values();
        Ok((0..self.phases.len())
            .into_par_iter()
            .map(|i| {
                let row = &self.residues[i * self.order..(i + 1) * self.order];
                let terms: Vec<Complex64> = row
                    .iter()
                    .zip(vals)
                    .map(|(&r, &v)| v * roots[r as usize].conj())
                    .collect();
                crate::reduce::pairwise_sum(&terms) / self.order as f64
            })
            .collect())
    }
}

/// Magnitude key for ranking: quantised so exact ties up to rounding are
/// resolved by the lexicographic order of the phases.
pub(crate) fn magnitude_key(c: Complex64) -> i64 {
    (c.norm() * 1e12).round() as i64
}

/// `(phase, <f, phase>)` sorted by descending magnitude.
pub fn correlation_spectrum(
    f: &GroupFunction,
    family: &[PolynomialPhase],
) -> Result<Vec<(PolynomialPhase, Complex64)>> {
    if family.is_empty() {
        return Ok(Vec::new());
    }
    let fam = EvaluatedFamily::new(family.to_vec())?;
    let corr = fam.correlations(f)?;
    let mut out: Vec<(PolynomialPhase, Complex64)> = fam.phases.into_iter().zip(corr).collect();
    out.sort_by(|a, b| {
        magnitude_key(b.1)
            .cmp(&magnitude_key(a.1))
            .then_with(|| a.0.cmp(&b.0))
    });
    Ok(out)
}

/// Orthogonal projector onto the linear span of the phases of degree at
/// most `max_degree`, built by Gram-Schmidt over the phase dictionary.
#[derive(Debug, Clone)]
pub struct PhaseSpan {
    group: FiniteAbelianGroup,
    basis: Vec<Vec<Complex64>>,
}

impl PhaseSpan {
    pub fn new(group: &FiniteAbelianGroup, max_degree: u32) -> Result<Self> {
        let (p, n) = require_shape(group)?;
        let dict = phase_dictionary(p, n, max_degree)?;
        let order = group.order();
        let mut basis: Vec<Vec<Complex64>> = Vec::new();
        for phase in &dict {
            if basis.len() == order {
                break;
            }
            let mut v = phase.eval().into_values();
            // two passes of modified Gram-Schmidt
            for _ in 0..2 {
                for b in &basis {
                    let c = inner_slices(&v, b);
                    for (x, y) in v.iter_mut().zip(b) {
                        *x -= c * y;
                    }
                }
            }
            let norm = inner_slices(&v, &v).re.sqrt();
            if norm > 1e-8 {
                basis.push(v.into_iter().map(|x| x / norm).collect());
            }
        }
        Ok(Self {
            group: group.clone(),
            basis,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn project_values(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
        for b in &self.basis {
            let c = inner_slices(v, b);
            for (o, y) in out.iter_mut().zip(b) {
                *o += c * y;
            }
        }
        out
    }

    pub fn project(&self, f: &GroupFunction) -> Result<GroupFunction> {
        if f.group() != &self.group {
            return Err(HofaError::GroupMismatch);
        }
        GroupFunction::from_values(self.group.clone(), self.project_values(f.values()))
    }

    /// Normalised L2 distance from `v` to the span.
    pub fn residual_values(&self, v: &[Complex64]) -> f64 {
        let proj = self.project_values(v);
        let diff: Vec<Complex64> = v.iter().zip(&proj).map(|(a, b)| a - b).collect();
        inner_slices(&diff, &diff).re.max(0.0).sqrt()
    }
}

/// Outcome of a pre-cocycle test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrecocycleReport {
    pub unimodular: bool,
    /// Largest distance of `delta(f, t)` from the nearest scalar multiple of
    /// a phase of degree `<= k - 1`, over all shifts `t`.
    pub max_residual: f64,
    pub passed: bool,
}

/// Finite pre-cocycle test of order `k`: `f` is unimodular and every
/// `delta(f, t)` is within `tol` of `c * phase` for one phase of degree at
/// most `k - 1`.
pub fn precocycle_report(f: &GroupFunction, k: u32, tol: f64) -> Result<PrecocycleReport> {
    let (p, n) = require_shape(f.group())?;
    if k == 0 || k > p - 1 {
        return Err(invalid(format!(
            "pre-cocycle order {k} must lie in 1..={}",
            p - 1
        )));
    }
    let unimodular = f.is_unimodular();
    let family = EvaluatedFamily::new(phase_dictionary(p, n, k - 1)?)?;
    let order = f.group().order();
    let residuals: Vec<f64> = (0..order)
        .into_par_iter()
        .map(|t| {
            let g = f.delta_index(t);
            let corr = family.correlations(&g).expect("same group");
            let (best, c) = corr.iter().enumerate().fold((0, corr[0]), |acc, (i, &c)| {
                if c.norm() > acc.1.norm() {
                    (i, c)
                } else {
                    acc
                }
            });
            let diff: Vec<Complex64> = g
                .values()
                .iter()
                .zip(family.values(best))
                .map(|(a, b)| a - c * b)
                .collect();
            inner_slices(&diff, &diff).re.max(0.0).sqrt()
        })
        .collect();
    let max_residual = residuals.into_iter().fold(0.0, f64::max);
    Ok(PrecocycleReport {
        unimodular,
        max_residual,
        passed: unimodular && max_residual <= tol,
    })
}

pub fn precocycle_check(f: &GroupFunction, k: u32, tol: f64) -> Result<bool> {
    Ok(precocycle_report(f, k, tol)?.passed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::linear_character;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn phase(p: u32, c: &[i64]) -> PolynomialPhase {
        PolynomialPhase::univariate(p, c).unwrap()
    }

    #[test]
    fn construction_reduces_and_drops_zeros() {
        let f = phase(5, &[5, 7, -1]);
        assert_eq!(f.coeffs().len(), 2);
        assert_eq!(f.coeffs()[&vec![1]], 2);
        assert_eq!(f.coeffs()[&vec![2]], 4);
        assert_eq!(f.degree(), 2);
        assert_eq!(PolynomialPhase::zero(5, 2).unwrap().degree(), 0);
        assert!(PolynomialPhase::univariate(4, &[1]).is_err());
        assert!(PolynomialPhase::univariate(2, &[1]).is_err());
        assert!(PolynomialPhase::univariate(5, &[0, 0, 0, 0, 0, 1]).is_err());
    }

    #[test]
    fn eval_examples() {
        let q = phase(5, &[0, 0, 1]);
        let want = [0u32, 1, 4, 4, 1];
        assert_eq!(q.residues(), want);
        for (v, r) in q.eval().values().iter().zip(want) {
            assert!((v - Complex64::from_polar(1.0, TAU * r as f64 / 5.0)).norm() < 1e-15);
        }
        let c = phase(5, &[3]).eval();
        assert!(c
            .values()
            .iter()
            .all(|v| (v - Complex64::from_polar(1.0, TAU * 3.0 / 5.0)).norm() < 1e-15));
        let z5 = FiniteAbelianGroup::cyclic(5).unwrap();
        let lin = phase_eval(&phase(5, &[0, 1]), &z5).unwrap();
        let chi = linear_character(&z5, &z5.element(&[1]).unwrap()).unwrap();
        assert!(lin.max_abs_diff(&chi).unwrap() < 1e-15);
        assert!(phase_eval(&q, &FiniteAbelianGroup::cyclic(7).unwrap()).is_err());
    }

    #[test]
    fn delta_examples() {
        let z5 = FiniteAbelianGroup::cyclic(5).unwrap();
        let q = phase(5, &[0, 0, 1]);
        assert_eq!(
            q.delta(&z5.element(&[1]).unwrap()).unwrap(),
            phase(5, &[1, 2])
        );
        assert_eq!(
            q.delta(&z5.zero()).unwrap(),
            PolynomialPhase::zero(5, 1).unwrap()
        );
        // (x+2)^3 - x^3 = 6x^2 + 12x + 8 = 6x^2 + 5x + 1 mod 7
        let z7 = FiniteAbelianGroup::cyclic(7).unwrap();
        let cubic = phase(7, &[0, 0, 0, 1]);
        let d = cubic.delta(&z7.element(&[2]).unwrap()).unwrap();
        assert_eq!(d, phase(7, &[1, 5, 6]));
        let pointwise = cubic.eval().delta(&z7.element(&[2]).unwrap()).unwrap();
        assert!(d.eval().max_abs_diff(&pointwise).unwrap() < 1e-12);
    }

    #[test]
    fn multivariate_delta_matches_pointwise_delta() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (p, n) in [(3u32, 2usize), (5, 2), (3, 3)] {
            let mons = monomials(p, n, 0, p - 1);
            for _ in 0..10 {
                let f = PolynomialPhase::new(
                    p,
                    n,
                    mons.iter().map(|m| (m.clone(), rng.gen_range(0..p as i64))),
                )
                .unwrap();
                let g = f.group();
                for t in g.elements() {
                    let sym = f.delta(&t).unwrap().eval();
                    let num = f.eval().delta(&t).unwrap();
                    assert!(sym.max_abs_diff(&num).unwrap() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn monomial_counts() {
        assert_eq!(monomials(5, 1, 0, 2), vec![vec![0], vec![1], vec![2]]);
        assert_eq!(monomials(5, 2, 0, 2).len(), 6);
        assert_eq!(monomials(3, 2, 0, 4).len(), 9);
        assert_eq!(
            monomials(3, 2, 2, 2),
            vec![vec![0, 2], vec![1, 1], vec![2, 0]]
        );
    }

    #[test]
    fn enumeration_examples() {
        let all = enumerate_phases(5, 1, 2).unwrap();
        assert_eq!(all.len(), 125);
        let unique: std::collections::BTreeSet<_> = all.iter().cloned().collect();
        assert_eq!(unique.len(), 125);
        let reps = dual_representatives(5, 1, 2).unwrap();
        assert_eq!(reps.len(), 5);
        assert!(reps
            .iter()
            .all(|r| r.coeffs().keys().all(|m| m == &vec![2])));
        assert_eq!(enumerate_phases(5, 1, 0).unwrap().len(), 5);
        // 6 monomials of degree <= 2 in 2 variables
        assert_eq!(enumerate_phases(3, 2, 2).unwrap().len(), 729);
        assert_eq!(phase_dictionary(5, 1, 2).unwrap().len(), 25);
        assert!(enumerate_phases(5, 1, 5).is_err());
        assert!(matches!(
            enumerate_phases(7, 3, 3),
            Err(HofaError::SizeCap { .. })
        ));
    }

    #[test]
    fn phase_multiplication_is_the_group_law() {
        for p in [3u32, 5] {
            let all = enumerate_phases(p, 1, 2).unwrap();
            for a in &all {
                for b in all.iter().step_by(3) {
                    let lhs = a.mul(b).unwrap().eval();
                    let rhs = a.eval().mul(&b.eval()).unwrap();
                    assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn delta_drops_degree_and_iterates_to_constants() {
        for p in [5u32, 7] {
            let z = FiniteAbelianGroup::cyclic(p as usize).unwrap();
            for d in 1..=3u32 {
                for lead in 1..p as i64 {
                    let mut c = vec![0i64; d as usize + 1];
                    c[d as usize] = lead;
                    c[1] = 2;
                    let f = phase(p, &c);
                    for t in z.elements().skip(1) {
                        assert_eq!(f.delta(&t).unwrap().degree(), d - 1);
                    }
                    // d + 1 derivatives along a fixed shift pattern give 0;
                    // d derivatives give a constant.
                    let mut g = f.clone();
                    for s in 0..d {
                        g = g.delta(&z.element(&[(s + 1) as i64]).unwrap()).unwrap();
                    }
                    assert_eq!(g.degree(), 0);
                    assert!(g
                        .delta(&z.element(&[3]).unwrap())
                        .unwrap()
                        .coeffs()
                        .is_empty());
                }
            }
        }
    }

    #[test]
    fn distinct_phases_are_not_collinear() {
        for p in [3u32, 5, 7] {
            // phases differing by a constant are collinear, so one per class
            let all = phase_dictionary(p, 1, 2).unwrap();
            let fam = EvaluatedFamily::new(all.clone()).unwrap();
            for (i, a) in all.iter().enumerate() {
                let corr = fam.correlations(&a.eval()).unwrap();
                for (j, c) in corr.iter().enumerate() {
                    if i != j {
                        assert!(c.norm() < 1.0 - 1e-6);
                    }
                }
            }
        }
    }

    #[test]
    fn spectrum_examples() {
        let z5 = FiniteAbelianGroup::cyclic(5).unwrap();
        let family = enumerate_phases(5, 1, 2).unwrap();
        let phi = phase(5, &[0, 3, 2]);
        let top = &correlation_spectrum(&phi.eval(), &family).unwrap()[0];
        assert_eq!(top.0, phi);
        assert!((top.1 - Complex64::new(1.0, 0.0)).norm() < 1e-12);

        let dict = phase_dictionary(5, 1, 2).unwrap();
        let chi = linear_character(&z5, &z5.element(&[1]).unwrap()).unwrap();
        let spec = correlation_spectrum(&chi, &dict).unwrap();
        assert_eq!(spec[0].0, phase(5, &[0, 1]));
        assert!((spec[0].1.norm() - 1.0).abs() < 1e-12);
        for (f, c) in &spec[1..] {
            // orthogonal to other linear phases, Gauss-sum size otherwise
            let want = if f.degree() == 2 {
                5f64.powf(-0.5)
            } else {
                0.0
            };
            assert!((c.norm() - want).abs() < 1e-12);
        }
        // deterministic tie-break
        let quad_block: Vec<&PolynomialPhase> = spec[1..21].iter().map(|(f, _)| f).collect();
        let mut sorted = quad_block.clone();
        sorted.sort();
        assert_eq!(quad_block, sorted);

        let zero = GroupFunction::zeros(&z5);
        assert!(correlation_spectrum(&zero, &dict)
            .unwrap()
            .iter()
            .all(|(_, c)| c.norm() == 0.0));
    }

    #[test]
    fn span_dimensions() {
        let z7 = FiniteAbelianGroup::cyclic(7).unwrap();
        assert_eq!(PhaseSpan::new(&z7, 0).unwrap().dim(), 1);
        assert_eq!(PhaseSpan::new(&z7, 1).unwrap().dim(), 7);
        let z3sq = FiniteAbelianGroup::power(3, 2).unwrap();
        assert_eq!(PhaseSpan::new(&z3sq, 1).unwrap().dim(), 9);
    }

    #[test]
    fn precocycle_examples() {
        let z7 = FiniteAbelianGroup::cyclic(7).unwrap();
        let chi = linear_character(&z7, &z7.element(&[3]).unwrap()).unwrap();
        assert!(precocycle_check(&chi, 1, 1e-9).unwrap());
        let z5 = FiniteAbelianGroup::cyclic(5).unwrap();
        let quad = phase(5, &[1, 4, 2]).eval();
        let r = precocycle_report(&quad, 2, 1e-9).unwrap();
        assert!(r.passed && r.max_residual < 1e-9);
        assert!(!precocycle_check(&quad, 1, 1e-9).unwrap());

        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let random =
            GroupFunction::from_fn(&z7, |_| Complex64::from_polar(1.0, rng.gen_range(0.0..TAU)));
        let r = precocycle_report(&random, 2, 1e-9).unwrap();
        assert!(!r.passed);
        assert!(r.max_residual > 0.1, "residual {}", r.max_residual);

        let not_unimodular = GroupFunction::constant(&z5, Complex64::new(0.5, 0.0));
        assert!(!precocycle_check(&not_unimodular, 1, 1e-9).unwrap());
        assert!(precocycle_check(&quad, 5, 1e-9).is_err());
        assert!(precocycle_check(&quad, 0, 1e-9).is_err());
        assert!(precocycle_check(
            &GroupFunction::zeros(&FiniteAbelianGroup::cyclic(4).unwrap()),
            1,
            1e-9
        )
        .is_err());
    }
}
