//! Seeded generators of random polynomial forms.

use num_traits::Zero;
use rand::Rng;

use crate::cube::Cube;
use crate::flat::pairing::bubble;
use crate::form::{MultiIndex, PolyForm};
use crate::poly::Polynomial;
use crate::rational::{rat, Rational};

#[derive(Debug, Clone)]
pub struct RandomFormParams {
    /// Largest exponent of any single variable.
    pub max_degree_per_var: u32,
    /// Monomials per coefficient are drawn from `1..=max_terms`.
    pub max_terms: usize,
    /// Coefficients are `p/q` with `|p/q| <= bound` and `q <= max_den`.
    pub bound: i64,
    pub max_den: i64,
}

impl Default for RandomFormParams {
    fn default() -> Self {
        RandomFormParams {
            max_degree_per_var: 3,
            max_terms: 3,
            bound: 10,
            max_den: 9,
        }
    }
}

pub fn random_rational<R: Rng>(rng: &mut R, params: &RandomFormParams) -> Rational {
    let den = rng.random_range(1..=params.max_den);
    let num = rng.random_range(-params.bound * den..=params.bound * den);
    rat(num, den)
}

pub fn random_polynomial<R: Rng>(rng: &mut R, nvars: usize, params: &RandomFormParams) -> Polynomial {
    let count = rng.random_range(1..=params.max_terms);
    let mut terms = Vec::with_capacity(count);
    for _ in 0..count {
        let exps: Vec<u32> = (0..nvars)
            .map(|_| rng.random_range(0..=params.max_degree_per_var))
            .collect();
        terms.push((exps, random_rational(rng, params)));
    }
    Polynomial::from_terms(nvars, terms)
}

/// A random `k`-form where each basis element is present with probability 1/2
/// (at least one is always present when `k <= n`).
pub fn random_form<R: Rng>(rng: &mut R, n: usize, k: usize, params: &RandomFormParams) -> PolyForm {
    let indices = MultiIndex::all(n, k);
    if indices.is_empty() {
        return PolyForm::zero(n, k);
    }
    let forced = rng.random_range(0..indices.len());
    let mut terms = Vec::new();
    for (i, index) in indices.into_iter().enumerate() {
        if i == forced || rng.random_bool(0.5) {
            terms.push((index, random_polynomial(rng, n, params)));
        }
    }
    PolyForm::from_terms(n, k, terms).expect("generated indices are valid")
}

/// A random closed (hence exact) `k`-form `dη` for a random `(k-1)`-form `η`,
/// `k >= 1`, rescaled so its coefficients stay within `params.bound`.
pub fn random_closed_form<R: Rng>(rng: &mut R, n: usize, k: usize, params: &RandomFormParams) -> PolyForm {
    assert!(k >= 1, "closed forms are generated as differentials");
    let mut w = random_form(rng, n, k - 1, params).d();
    for _ in 0..16 {
        if !w.is_zero() {
            break;
        }
        w = random_form(rng, n, k - 1, params).d();
    }
    let largest = w
        .terms()
        .map(|(_, p)| p.max_abs_coefficient())
        .max()
        .unwrap_or_else(Rational::zero);
    let bound = Rational::from_integer(params.bound.into());
    if largest > bound {
        w.scale(&(bound / largest))
    } else {
        w
    }
}

/// `bubble * η` for a random `k`-form `η`: a test form vanishing to second
/// order on the boundary of `cube`.
pub fn random_compact_form<R: Rng>(rng: &mut R, cube: &Cube, k: usize, params: &RandomFormParams) -> PolyForm {
    random_form(rng, cube.dim(), k, params).mul_function(&bubble(cube))
}

/// A random polynomial map `R^n -> R^m`.
pub fn random_map<R: Rng>(rng: &mut R, n: usize, m: usize, params: &RandomFormParams) -> Vec<Polynomial> {
    (0..m).map(|_| random_polynomial(rng, n, params)).collect()
}
