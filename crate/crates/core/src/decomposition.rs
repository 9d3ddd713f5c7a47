//! Structured-plus-uniform decompositions `f = sum c_i atom_i + residual`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, HofaError, Result};
use crate::gfunc::GroupFunction;
use crate::gowers::{gowers_u_with, GowersMethod};
use crate::group::{character_by_index, GroupElement};
use crate::limits::Limits;
use crate::partition::Partition;
use crate::phases::{
    magnitude_key, phase_dictionary_with, prime_power_shape, EvaluatedFamily, PolynomialPhase,
};

/// Determinants at most this large leave a cell outside the Gram-Schmidt domain.
pub const GRAM_DET_TOL: f64 = 1e-9;

/// A dictionary element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Atom {
    /// Linear character `chi_xi` of an arbitrary finite abelian group.
    Character(GroupElement),
    /// Polynomial phase on `Z_p^n`.
    Phase(PolynomialPhase),
}

impl Atom {
    pub fn eval(&self, f: &GroupFunction) -> Result<GroupFunction> {
        match self {
            Atom::Character(xi) => crate::group::linear_character(f.group(), xi),
            Atom::Phase(phase) => crate::phases::phase_eval(phase, f.group()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Term {
    pub atom: Atom,
    pub coeff: Complex64,
}

/// One greedy selection.
#[derive(Debug, Clone)]
pub struct Step {
    pub phase: PolynomialPhase,
    pub correlation: Complex64,
    /// `||residual||_2` after the subtraction.
    pub residual_norm: f64,
}

#[derive(Debug, Clone)]
pub struct DecompositionResult {
    /// Ordered by non-increasing `|coeff|`.
    pub terms: Vec<Term>,
    pub residual: GroupFunction,
    /// `U_k` of the residual, `k` being `gowers_order`.
    pub residual_gowers: f64,
    pub gowers_order: usize,
    pub iterations: usize,
    /// False when the iteration budget ran out before the threshold was met.
    pub converged: bool,
    /// Selection history; empty for Fourier truncation.
    pub steps: Vec<Step>,
}

impl DecompositionResult {
    /// `sum coeff * atom`, without the residual.
    pub fn structured(&self) -> Result<GroupFunction> {
        let mut out = GroupFunction::zeros(self.residual.group());
        for t in &self.terms {
            out = out.axpy(t.coeff, &t.atom.eval(&self.residual)?)?;
        }
        Ok(out)
    }

    pub fn reconstruct(&self) -> Result<GroupFunction> {
        self.structured()?.add(&self.residual)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PursuitStats {
    /// Largest `|<phi, psi>|` between distinct dictionary members.
    pub max_cross_correlation: f64,
    /// `||f||^2 / delta^2 + 1`.
    pub iteration_bound: f64,
}

fn positive(delta: f64) -> Result<()> {
    if delta.is_nan() || delta <= 0.0 {
        return Err(invalid("delta must be positive"));
    }
    Ok(())
}

/// Keeps the characters with `|f^(xi)| >= delta`; characters are
/// orthonormal, so this is the exact orthogonal split and the residual
/// carries every coefficient below `delta`.
pub fn fourier_truncate(f: &GroupFunction, delta: f64) -> Result<DecompositionResult> {
    fourier_truncate_with(f, delta, &Limits::default())
}

pub fn fourier_truncate_with(
    f: &GroupFunction,
    delta: f64,
    limits: &Limits,
) -> Result<DecompositionResult> {
    positive(delta)?;
    let group = f.group();
    let spectrum = f.fourier();
    let mut chosen: Vec<usize> = (0..group.order())
        .filter(|&xi| spectrum.coeffs()[xi].norm() >= delta)
        .collect();
    chosen.sort_by_key(|&xi| (std::cmp::Reverse(magnitude_key(spectrum.coeffs()[xi])), xi));
    let mut residual = f.clone();
    let mut terms = Vec::with_capacity(chosen.len());
    for xi in chosen {
        let c = spectrum.coeffs()[xi];
        residual = residual.axpy(-c, &character_by_index(group, xi))?;
        terms.push(Term {
            atom: Atom::Character(group.element_at(xi)),
            coeff: c,
        });
    }
    let residual_gowers = gowers_u_with(&residual, 2, GowersMethod::Cube, limits)?;
    Ok(DecompositionResult {
        iterations: terms.len(),
        terms,
        residual,
        residual_gowers,
        gowers_order: 2,
        converged: true,
        steps: Vec::new(),
    })
}

/// Greedy pursuit over the phases of degree `<= k - 1` with zero constant
/// term.
///
/// Each step takes the phase of largest `|<residual, phi>|`, ties going to
/// the smaller phase, and subtracts its projection. It stops once that
/// correlation is below `delta` or after `max_iter` steps. Repeated
/// selections of one phase are merged into a single term.
pub fn matching_pursuit(
    f: &GroupFunction,
    k: usize,
    delta: f64,
    max_iter: usize,
) -> Result<DecompositionResult> {
    matching_pursuit_with(f, k, delta, max_iter, &Limits::default())
}

pub fn matching_pursuit_with(
    f: &GroupFunction,
    k: usize,
    delta: f64,
    max_iter: usize,
    limits: &Limits,
) -> Result<DecompositionResult> {
    positive(delta)?;
    let (p, n) = prime_power_shape(f.group())
        .ok_or_else(|| invalid("matching pursuit needs Z_p^n with p an odd prime"))?;
    if k == 0 || k > p as usize {
        return Err(invalid(format!("level {k} must lie in 1..={p}")));
    }
    let family = EvaluatedFamily::new(phase_dictionary_with(p, n, k as u32 - 1, limits)?)?;
    let mut residual = f.clone();
    let mut steps = Vec::new();
    let mut converged = false;
    while steps.len() < max_iter {
        let corr = family.correlations(&residual)?;
        let best = (0..corr.len())
            .max_by(|&i, &j| {
                magnitude_key(corr[i])
                    .cmp(&magnitude_key(corr[j]))
                    .then(j.cmp(&i))
            })
            .expect("dictionary is never empty");
        let c = corr[best];
        if c.norm() < delta {
            converged = true;
            break;
        }
        let phi = GroupFunction::from_values(f.group().clone(), family.values(best))?;
        residual = residual.axpy(-c, &phi)?;
        steps.push(Step {
            phase: family.phases()[best].clone(),
            correlation: c,
            residual_norm: residual.norm(),
        });
    }
    if !converged {
        let corr = family.correlations(&residual)?;
        converged = corr.iter().all(|c| c.norm() < delta);
    }
    let mut merged: Vec<(PolynomialPhase, Complex64)> = Vec::new();
    for s in &steps {
        match merged.iter_mut().find(|(ph, _)| ph == &s.phase) {
            Some(slot) => slot.1 += s.correlation,
            None => merged.push((s.phase.clone(), s.correlation)),
        }
    }
    merged.sort_by(|a, b| {
        magnitude_key(b.1)
            .cmp(&magnitude_key(a.1))
            .then_with(|| a.0.cmp(&b.0))
    });
    let residual_gowers = gowers_u_with(&residual, k, GowersMethod::Cube, limits)?;
    Ok(DecompositionResult {
        terms: merged
            .into_iter()
            .map(|(phase, coeff)| Term {
                atom: Atom::Phase(phase),
                coeff,
            })
            .collect(),
        residual,
        residual_gowers,
        gowers_order: k,
        iterations: steps.len(),
        converged,
        steps,
    })
}

/// Measured quantities behind the pursuit iteration bound.
pub fn pursuit_stats(f: &GroupFunction, k: usize, delta: f64) -> Result<PursuitStats> {
    positive(delta)?;
    let (p, n) = prime_power_shape(f.group())
        .ok_or_else(|| invalid("matching pursuit needs Z_p^n with p an odd prime"))?;
    let family = EvaluatedFamily::new(phase_dictionary_with(
        p,
        n,
        k as u32 - 1,
        &Limits::default(),
    )?)?;
    let mut worst: f64 = 0.0;
    for i in 0..family.len() {
        let phi = GroupFunction::from_values(f.group().clone(), family.values(i))?;
        let corr = family.correlations(&phi)?;
        for (j, c) in corr.iter().enumerate() {
            if j != i {
                worst = worst.max(c.norm());
            }
        }
    }
    Ok(PursuitStats {
        max_cross_correlation: worst,
        iteration_bound: f.norm_sq() / (delta * delta) + 1.0,
    })
}

/// Output of [`relative_gram_schmidt`].
#[derive(Debug, Clone)]
pub struct RelativeGramSchmidt {
    /// Points whose cell has a Gram matrix with `|det| > 1e-9`.
    pub domain: Vec<bool>,
    /// `coefficients[i][j]`, constant on cells and zero off the domain, with
    /// `outputs[i] = sum_j coefficients[i][j] * shifted[j]`. Lower
    /// triangular: output `i` only uses inputs `0..=i`.
    pub coefficients: Vec<Vec<GroupFunction>>,
    pub outputs: Vec<GroupFunction>,
}

/// Gram-Schmidt with coefficients measurable with respect to `partition`.
///
/// The inputs are `g_j(x) = f_j(x + t_j)`. On every cell the Gram matrix
/// `W_ij = E(g_i conj g_j | cell)` is factored as `L L*` and the outputs
/// are `L^{-1} g`, so `E(o_i conj o_j | P) = delta_ij` on the domain.
pub fn relative_gram_schmidt(
    fs: &[GroupFunction],
    shifts: &[GroupElement],
    partition: &Partition,
) -> Result<RelativeGramSchmidt> {
    let d = fs.len();
    if d == 0 {
        return Err(invalid("relative Gram-Schmidt needs at least one function"));
    }
    if shifts.len() != d {
        return Err(HofaError::Arity {
            expected: d,
            got: shifts.len(),
        });
    }
    let group = partition.group();
    let shifted: Vec<GroupFunction> = fs
        .iter()
        .zip(shifts)
        .map(|(f, t)| {
            if f.group() != group {
                return Err(HofaError::GroupMismatch);
            }
            f.shift(t)
        })
        .collect::<Result<_>>()?;
    let order = group.order();
    let zero = Complex64::new(0.0, 0.0);
    let mut domain = vec![false; order];
    let mut coeff_values = vec![vec![vec![zero; order]; d]; d];
    let mut out_values = vec![vec![zero; order]; d];
    for cell in partition.cells() {
        let size = cell.len() as f64;
        let w = DMatrix::from_fn(d, d, |i, j| {
            cell.iter()
                .map(|&x| shifted[i].values()[x] * shifted[j].values()[x].conj())
                .sum::<Complex64>()
                / size
        });
        let Some(chol) = w.clone().cholesky() else {
            continue;
        };
        let l = chol.l();
        let det: f64 = (0..d).map(|i| l[(i, i)].norm_sqr()).product();
        if det <= GRAM_DET_TOL {
            continue;
        }
        // W = L L*, so o = L^{-1} g has E(o o* | cell) = I
        let Some(lambda) = l.clone().try_inverse() else {
            continue;
        };
        for &x in &cell {
            domain[x] = true;
            for i in 0..d {
                let mut acc = zero;
                for j in 0..=i {
                    coeff_values[i][j][x] = lambda[(i, j)];
                    acc += lambda[(i, j)] * shifted[j].values()[x];
                }
                out_values[i][x] = acc;
            }
        }
    }
    let mk = |v: Vec<Complex64>| GroupFunction::from_values(group.clone(), v);
    Ok(RelativeGramSchmidt {
        domain,
        coefficients: coeff_values
            .into_iter()
            .map(|row| row.into_iter().map(mk).collect::<Result<_>>())
            .collect::<Result<_>>()?,
        outputs: out_values.into_iter().map(mk).collect::<Result<_>>()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gowers::gowers_u;
    use crate::group::{linear_character, FiniteAbelianGroup};
    use crate::partition::relative_orthonormal_deviation;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn grp(n: usize) -> FiniteAbelianGroup {
        FiniteAbelianGroup::cyclic(n).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn random_fn(g: &FiniteAbelianGroup, rng: &mut ChaCha8Rng) -> GroupFunction {
        GroupFunction::from_fn(g, |_| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    #[test]
    fn fourier_truncate_examples() {
        let z8 = grp(8);
        let chi = |r| linear_character(&z8, &z8.element(&[r]).unwrap()).unwrap();
        let f = chi(1).scale(c(0.9)).axpy(c(0.05), &chi(2)).unwrap();
        let d = fourier_truncate(&f, 0.5).unwrap();
        assert_eq!(d.terms.len(), 1);
        assert_eq!(d.terms[0].atom, Atom::Character(z8.element(&[1]).unwrap()));
        assert!((d.terms[0].coeff - c(0.9)).norm() < 1e-12);
        assert!(d.reconstruct().unwrap().max_abs_diff(&f).unwrap() < 1e-12);

        let d = fourier_truncate(&f, 0.95).unwrap();
        assert!(d.terms.is_empty());
        assert!(d.residual.max_abs_diff(&f).unwrap() == 0.0);
        assert!(fourier_truncate(&f, 0.0).is_err());
    }

    #[test]
    fn truncation_residual_and_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for n in [5usize, 8, 12] {
            let g = grp(n);
            let f = random_fn(&g, &mut rng);
            let d = fourier_truncate(&f, 0.3).unwrap();
            let spec = f.fourier();
            let small: f64 = spec
                .coeffs()
                .iter()
                .filter(|c| c.norm() < 0.3)
                .map(|c| c.norm_sqr().powi(2))
                .sum();
            assert!((d.residual_gowers - small.powf(0.25)).abs() < 1e-9);
            assert!(d.residual.fourier().coeffs().iter().all(|c| c.norm() < 0.3));
            let energy: f64 =
                d.terms.iter().map(|t| t.coeff.norm_sqr()).sum::<f64>() + d.residual.norm_sq();
            assert!((energy - f.norm_sq()).abs() < 1e-9);
            assert!(d.reconstruct().unwrap().max_abs_diff(&f).unwrap() < 1e-9);
            for w in d.terms.windows(2) {
                assert!(w[0].coeff.norm() >= w[1].coeff.norm());
            }
        }
    }

    #[test]
    fn pursuit_on_a_dictionary_member() {
        let phi = PolynomialPhase::univariate(7, &[0, 2, 3]).unwrap();
        let d = matching_pursuit(&phi.eval(), 3, 0.1, 10).unwrap();
        assert_eq!(d.terms.len(), 1);
        assert_eq!(d.terms[0].atom, Atom::Phase(phi));
        assert!((d.terms[0].coeff - c(1.0)).norm() < 1e-12);
        assert!(d.residual.sup_norm() < 1e-12);
        assert!(d.converged);
    }

    #[test]
    fn pursuit_recovers_two_planted_phases() {
        let z7 = grp(7);
        let a = PolynomialPhase::univariate(7, &[0, 0, 1]).unwrap();
        let b = PolynomialPhase::univariate(7, &[0, 1, 1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let noise = GroupFunction::from_fn(&z7, |_| {
            Complex64::from_polar(0.01 * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..TAU))
        });
        let f = a
            .eval()
            .axpy(c(0.3), &b.eval())
            .unwrap()
            .add(&noise)
            .unwrap();
        let d = matching_pursuit(&f, 3, 0.15, 100).unwrap();
        let coeff = |ph: &PolynomialPhase| {
            d.terms
                .iter()
                .find(|t| t.atom == Atom::Phase(ph.clone()))
                .map(|t| t.coeff)
                .expect("phase recovered")
        };
        assert!((coeff(&a) - c(1.0)).norm() <= 0.05);
        assert!((coeff(&b) - c(0.3)).norm() <= 0.05);
        assert!(d.reconstruct().unwrap().max_abs_diff(&f).unwrap() < 1e-9);
    }

    #[test]
    fn pursuit_rejects_random_unimodular() {
        let z11 = grp(11);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let f = GroupFunction::from_fn(&z11, |_| {
            Complex64::from_polar(1.0, rng.gen_range(0.0..TAU))
        });
        let d = matching_pursuit(&f, 2, 0.9, 100).unwrap();
        assert!(d.terms.is_empty());
        assert_eq!(d.iterations, 0);
        assert!(d.residual.max_abs_diff(&f).unwrap() == 0.0);
    }

    #[test]
    fn pursuit_invariants_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for p in [3usize, 5, 7] {
            for k in 1..=3 {
                let f = random_fn(&grp(p), &mut rng);
                let delta = 0.2;
                let d = matching_pursuit(&f, k, delta, 1000).unwrap();
                let stats = pursuit_stats(&f, k, delta).unwrap();
                assert!(d.converged);
                assert!((d.iterations as f64) <= stats.iteration_bound);
                assert!(d.reconstruct().unwrap().max_abs_diff(&f).unwrap() < 1e-9);
                let mut prev = f.norm();
                for s in &d.steps {
                    assert!(s.correlation.norm() >= delta);
                    assert!(s.residual_norm <= prev + 1e-12);
                    prev = s.residual_norm;
                }
                for w in d.terms.windows(2) {
                    assert!(w[0].coeff.norm() >= w[1].coeff.norm());
                }
                assert!(
                    (d.residual_gowers - gowers_u(&d.residual, k, GowersMethod::Cube).unwrap())
                        .abs()
                        < 1e-15
                );
            }
        }
    }

    #[test]
    fn pursuit_budget_is_flagged() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let f = random_fn(&grp(7), &mut rng);
        let d = matching_pursuit(&f, 2, 0.01, 1).unwrap();
        assert_eq!(d.iterations, 1);
        assert!(!d.converged);
        assert!(matching_pursuit(&f, 2, -1.0, 1).is_err());
        assert!(matching_pursuit(&f, 9, 0.1, 1).is_err());
        assert!(matching_pursuit(&random_fn(&grp(8), &mut rng), 2, 0.1, 1).is_err());
    }

    #[test]
    fn gram_schmidt_normalises_a_single_function() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let g = grp(6);
        let f = GroupFunction::from_fn(&g, |_| {
            Complex64::new(rng.gen_range(0.5..1.0), rng.gen_range(-1.0..1.0))
        });
        let r = relative_gram_schmidt(
            std::slice::from_ref(&f),
            &[g.zero()],
            &Partition::trivial(&g),
        )
        .unwrap();
        assert!(r.domain.iter().all(|&b| b));
        assert!(
            r.outputs[0]
                .max_abs_diff(&f.scale(c(1.0 / f.norm())))
                .unwrap()
                < 1e-12
        );
        assert!(r.coefficients[0][0]
            .values()
            .iter()
            .all(|v| (v - c(1.0 / f.norm())).norm() < 1e-12));
        assert!(relative_gram_schmidt(&[], &[], &Partition::trivial(&g)).is_err());
    }

    #[test]
    fn gram_schmidt_on_characters() {
        let z5 = grp(5);
        let chi = |r| linear_character(&z5, &z5.element(&[r]).unwrap()).unwrap();
        let r = relative_gram_schmidt(
            &[chi(1), chi(2)],
            &[z5.zero(), z5.zero()],
            &Partition::trivial(&z5),
        )
        .unwrap();
        assert!(r.outputs[0].max_abs_diff(&chi(1)).unwrap() < 1e-12);
        assert!(r.outputs[1].max_abs_diff(&chi(2)).unwrap() < 1e-12);
        assert!(r.coefficients[1][0].sup_norm() < 1e-12);
        assert!(r.coefficients[0][1].sup_norm() == 0.0);
        assert!(
            relative_orthonormal_deviation(&r.outputs, &Partition::trivial(&z5), None).unwrap()
                < 1e-12
        );
    }

    #[test]
    fn gram_schmidt_dependent_inputs() {
        let z5 = grp(5);
        let chi = linear_character(&z5, &z5.element(&[1]).unwrap()).unwrap();
        let r = relative_gram_schmidt(
            &[chi.clone(), chi.scale(c(2.0))],
            &[z5.zero(), z5.zero()],
            &Partition::trivial(&z5),
        )
        .unwrap();
        assert!(r.domain.iter().all(|&b| !b));
    }

    #[test]
    fn gram_schmidt_relative_to_cells() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let g = FiniteAbelianGroup::new(&[2, 6]).unwrap();
        let p = Partition::coset_partition(
            &g,
            &g.subgroup_closure(&[g.element(&[0, 2]).unwrap()]).unwrap(),
        )
        .unwrap();
        let fs: Vec<GroupFunction> = (0..3).map(|_| random_fn(&g, &mut rng)).collect();
        let shifts = vec![
            g.zero(),
            g.element(&[1, 1]).unwrap(),
            g.element(&[0, 5]).unwrap(),
        ];
        let r = relative_gram_schmidt(&fs, &shifts, &p).unwrap();
        assert!(r.domain.iter().all(|&b| b));
        assert!(relative_orthonormal_deviation(&r.outputs, &p, Some(&r.domain)).unwrap() < 1e-9);
        for (i, row) in r.coefficients.iter().enumerate() {
            for (j, lam) in row.iter().enumerate() {
                assert!(p.measures(lam, 1e-12));
                if j > i {
                    assert!(lam.sup_norm() == 0.0);
                }
            }
            let mut rebuilt = GroupFunction::zeros(&g);
            for (j, lam) in row.iter().enumerate() {
                rebuilt = rebuilt
                    .add(&lam.mul(&fs[j].shift(&shifts[j]).unwrap()).unwrap())
                    .unwrap();
            }
            assert!(rebuilt.max_abs_diff(&r.outputs[i]).unwrap() < 1e-12);
        }
    }
}
