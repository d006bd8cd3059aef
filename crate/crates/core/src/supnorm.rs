//! Upper and lower bounds for the sup seminorms of polynomial forms.
//!
//! Upper bounds come from the tensor-product Bernstein expansion of each
//! coefficient: on a box every polynomial is a convex combination of its
//! Bernstein coefficients, so their largest magnitude dominates the sup.
//! Lower bounds are attained values on a rational sample grid and always
//! carry the witness point. For polynomial coefficients the essential
//! supremum and the supremum coincide.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::cube::Cube;
use crate::error::{Error, Result};
use crate::form::PolyForm;
use crate::poly::Polynomial;
use crate::rational::{self, Rational, RationalJson};

/// `lower <= |w|_{K,∞} <= upper`, with `lower` attained at `witness`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormBound {
    pub lower: Rational,
    pub upper: Rational,
    pub witness: Vec<Rational>,
}

impl NormBound {
    pub fn zero(witness: Vec<Rational>) -> Self {
        NormBound {
            lower: Rational::zero(),
            upper: Rational::zero(),
            witness,
        }
    }

    pub fn is_tight(&self) -> bool {
        self.lower == self.upper
    }

    /// Component-wise sum; the witness of `self` is kept.
    pub fn plus(&self, other: &NormBound) -> NormBound {
        NormBound {
            lower: &self.lower + &other.lower,
            upper: &self.upper + &other.upper,
            witness: self.witness.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormBoundJson {
    pub lower: RationalJson,
    pub upper: RationalJson,
    pub witness: Vec<String>,
}

impl From<&NormBound> for NormBoundJson {
    fn from(b: &NormBound) -> Self {
        NormBoundJson {
            lower: (&b.lower).into(),
            upper: (&b.upper).into(),
            witness: b.witness.iter().map(rational::format).collect(),
        }
    }
}

impl TryFrom<&NormBoundJson> for NormBound {
    type Error = Error;

    fn try_from(j: &NormBoundJson) -> Result<NormBound> {
        Ok(NormBound {
            lower: (&j.lower).try_into()?,
            upper: (&j.upper).try_into()?,
            witness: j.witness.iter().map(|s| rational::parse(s)).collect::<Result<_>>()?,
        })
    }
}

/// Dense row-major coefficient tensor, last axis fastest, stored as integer
/// numerators over one shared positive denominator.
#[derive(Debug, Clone)]
struct Tensor {
    shape: Vec<usize>,
    data: Vec<BigInt>,
    denom: BigInt,
}

/// Rational matrix as integer rows over one shared denominator.
struct IntMatrix {
    rows: Vec<Vec<BigInt>>,
    denom: BigInt,
}

impl IntMatrix {
    fn new(rows: Vec<Vec<Rational>>) -> Self {
        let denom = rows.iter().flatten().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let rows = rows
            .iter()
            .map(|row| row.iter().map(|c| c.numer() * (&denom / c.denom())).collect())
            .collect();
        IntMatrix { rows, denom }
    }
}

impl Tensor {
    fn from_polynomial(p: &Polynomial, degrees: &[usize]) -> Tensor {
        let shape: Vec<usize> = degrees.iter().map(|d| d + 1).collect();
        let size = shape.iter().product();
        let denom = p.terms().fold(BigInt::one(), |acc, (_, c)| acc.lcm(c.denom()));
        let mut data = vec![BigInt::zero(); size];
        for (exps, c) in p.terms() {
            let mut idx = 0;
            for (a, &e) in exps.iter().enumerate() {
                idx = idx * shape[a] + e as usize;
            }
            data[idx] = c.numer() * (&denom / c.denom());
        }
        Tensor { shape, data, denom }
    }

    /// Applies `matrix` (rows = new length, cols = old length) along `axis`.
    fn apply_axis(&self, axis: usize, matrix: &IntMatrix) -> Tensor {
        let old_len = self.shape[axis];
        let new_len = matrix.rows.len();
        let outer: usize = self.shape[..axis].iter().product();
        let inner: usize = self.shape[axis + 1..].iter().product();
        let mut shape = self.shape.clone();
        shape[axis] = new_len;
        let mut data = vec![BigInt::zero(); outer * new_len * inner];
        for o in 0..outer {
            for r in 0..new_len {
                for (c, m) in matrix.rows[r].iter().enumerate().take(old_len) {
                    if m.is_zero() {
                        continue;
                    }
                    for i in 0..inner {
                        let src = &self.data[(o * old_len + c) * inner + i];
                        if !src.is_zero() {
                            data[(o * new_len + r) * inner + i] += m * src;
                        }
                    }
                }
            }
        }
        let mut out = Tensor { shape, data, denom: &self.denom * &matrix.denom };
        out.reduce();
        out
    }

    fn reduce(&mut self) {
        let g = self.data.iter().fold(self.denom.clone(), |acc, x| acc.gcd(x));
        if !g.is_one() && !g.is_zero() {
            self.data.iter_mut().for_each(|x| *x /= &g);
            self.denom /= &g;
        }
    }

    fn max_abs(&self) -> Rational {
        let top = self.data.iter().map(|c| c.abs()).max().unwrap_or_else(BigInt::zero);
        Rational::new(top, self.denom.clone())
    }

    fn values(&self) -> Vec<Rational> {
        self.data.iter().map(|c| Rational::new(c.clone(), self.denom.clone())).collect()
    }
}

fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn binom_r(n: usize, k: usize) -> Rational {
    Rational::from_integer(binomial(n, k))
}

/// Power basis in `x` to power basis in `t` under `x = lo + len t`.
fn affine_matrix(degree: usize, lo: &Rational, len: &Rational) -> Vec<Vec<Rational>> {
    let mut lo_pow = vec![Rational::one()];
    let mut len_pow = vec![Rational::one()];
    for _ in 0..degree {
        lo_pow.push(lo_pow.last().unwrap() * lo);
        len_pow.push(len_pow.last().unwrap() * len);
    }
    (0..=degree)
        .map(|j| {
            (0..=degree)
                .map(|i| {
                    if i < j {
                        Rational::zero()
                    } else {
                        binom_r(i, j) * &lo_pow[i - j] * &len_pow[j]
                    }
                })
                .collect()
        })
        .collect()
}

/// Power basis of degree `from` on `[0,1]` to Bernstein basis of degree `to >= from`.
fn bernstein_matrix(from: usize, to: usize) -> Vec<Vec<Rational>> {
    (0..=to)
        .map(|j| {
            (0..=from)
                .map(|i| {
                    if i > j {
                        Rational::zero()
                    } else {
                        binom_r(j, i) / binom_r(to, i)
                    }
                })
                .collect()
        })
        .collect()
}

/// De Casteljau halving of Bernstein coefficients: left or right half.
fn halving_matrix(degree: usize, right: bool) -> Vec<Vec<Rational>> {
    let two = rational::int(2);
    (0..=degree)
        .map(|j| {
            (0..=degree)
                .map(|i| {
                    if right {
                        if i < j {
                            Rational::zero()
                        } else {
                            binom_r(degree - j, i - j)
                                / num_traits::pow(two.clone(), degree - j)
                        }
                    } else if i > j {
                        Rational::zero()
                    } else {
                        binom_r(j, i) / num_traits::pow(two.clone(), j)
                    }
                })
                .collect()
        })
        .collect()
}

fn is_unit(cube: &Cube) -> bool {
    cube.lo().iter().all(Zero::is_zero) && (0..cube.dim()).all(|i| cube.length(i).is_one())
}

fn bernstein_tensor(p: &Polynomial, cube: &Cube, degrees: &[usize]) -> Tensor {
    let own: Vec<usize> = p.degrees().iter().map(|&d| d as usize).collect();
    let mut t = Tensor::from_polynomial(p, &own);
    if !is_unit(cube) {
        for axis in 0..cube.dim() {
            let m = IntMatrix::new(affine_matrix(own[axis], &cube.lo()[axis], &cube.length(axis)));
            t = t.apply_axis(axis, &m);
        }
    }
    for axis in 0..cube.dim() {
        t = t.apply_axis(axis, &IntMatrix::new(bernstein_matrix(own[axis], degrees[axis])));
    }
    t
}

/// Bernstein coefficients of `p` on `cube` (row-major over the
/// tensor-product basis, last variable fastest), at the polynomial's own
/// per-variable degrees.
pub fn bernstein_coefficients(p: &Polynomial, cube: &Cube) -> Vec<Rational> {
    let degrees: Vec<usize> = p.degrees().iter().map(|&d| d as usize).collect();
    bernstein_tensor(p, cube, &degrees).values()
}

/// As [`bernstein_coefficients`] after elevating to `degrees` (each at least
/// the polynomial's own degree in that variable).
pub fn bernstein_degree_elevate(p: &Polynomial, cube: &Cube, degrees: &[usize]) -> Result<Vec<Rational>> {
    if degrees.len() != cube.dim() {
        return Err(Error::DimensionMismatch {
            expected: cube.dim(),
            found: degrees.len(),
        });
    }
    if let Some(v) = (0..degrees.len()).find(|&v| (p.degree_in(v) as usize) > degrees[v]) {
        return Err(Error::InvalidArgument(format!(
            "target degree {} below polynomial degree {} in variable {}",
            degrees[v],
            p.degree_in(v),
            v + 1
        )));
    }
    Ok(bernstein_tensor(p, cube, degrees).values())
}

/// Rigorous upper bound of `sup |p|` on `cube`, bisecting every axis
/// `subdivision` times.
pub fn bernstein_bound(p: &Polynomial, cube: &Cube, subdivision: u32) -> Rational {
    if p.is_zero() {
        return Rational::zero();
    }
    if let Some(c) = p.as_constant() {
        return c.abs();
    }
    let degrees: Vec<usize> = p.degrees().iter().map(|&d| d as usize).collect();
    let root = bernstein_tensor(p, cube, &degrees);
    let mut best = root.max_abs();
    let mut level = vec![root];
    for _ in 0..subdivision {
        let mut next = Vec::with_capacity(level.len() << cube.dim());
        for t in &level {
            let mut parts = vec![t.clone()];
            for (axis, &d) in degrees.iter().enumerate() {
                if d == 0 {
                    continue;
                }
                let left = IntMatrix::new(halving_matrix(d, false));
                let right = IntMatrix::new(halving_matrix(d, true));
                parts = parts
                    .iter()
                    .flat_map(|q| [q.apply_axis(axis, &left), q.apply_axis(axis, &right)])
                    .collect();
            }
            next.extend(parts);
        }
        best = next.iter().map(Tensor::max_abs).max().unwrap_or_default();
        level = next;
    }
    best
}

/// Largest [`bernstein_bound`] over the coefficients of a form.
pub fn bernstein_bound_form(w: &PolyForm, cube: &Cube, subdivision: u32) -> Rational {
    w.terms()
        .map(|(_, c)| bernstein_bound(c, cube, subdivision))
        .max()
        .unwrap_or_else(Rational::zero)
}

/// Uniform rational grid with `per_axis` points per axis (corners included
/// when `per_axis >= 2`, the midpoint when `per_axis == 1`).
pub fn sample_grid(cube: &Cube, per_axis: usize) -> Vec<Vec<Rational>> {
    let axes: Vec<Vec<Rational>> = (0..cube.dim())
        .map(|a| {
            if per_axis == 1 {
                vec![cube.midpoint(a)]
            } else {
                let step = cube.length(a) / rational::int(per_axis as i64 - 1);
                (0..per_axis)
                    .map(|j| &cube.lo()[a] + &step * rational::int(j as i64))
                    .collect()
            }
        })
        .collect();
    let mut points = vec![Vec::new()];
    for axis in axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |x| {
                    let mut q = p.clone();
                    q.push(x.clone());
                    q
                })
            })
            .collect();
    }
    points
}

fn check_dims(w: &PolyForm, cube: &Cube, grid_per_axis: usize) -> Result<()> {
    if w.dim() != cube.dim() {
        return Err(Error::DimensionMismatch {
            expected: cube.dim(),
            found: w.dim(),
        });
    }
    if grid_per_axis == 0 {
        return Err(Error::InvalidArgument("grid_per_axis must be at least 1".into()));
    }
    Ok(())
}

/// Bounds for `|w|_{K,∞} = max_I sup_K |a_I|`.
pub fn sup_norm(w: &PolyForm, cube: &Cube, grid_per_axis: usize) -> Result<NormBound> {
    sup_norm_with(w, cube, grid_per_axis, 0)
}

/// [`sup_norm`] with `subdivision` bisection levels for the upper bound.
pub fn sup_norm_with(
    w: &PolyForm,
    cube: &Cube,
    grid_per_axis: usize,
    subdivision: u32,
) -> Result<NormBound> {
    check_dims(w, cube, grid_per_axis)?;
    let mut bound = NormBound::zero(cube.center());
    if w.is_zero() {
        return Ok(bound);
    }
    let grid = sample_grid(cube, grid_per_axis);
    let mut have_witness = false;
    for (_, coefficient) in w.terms() {
        let upper = bernstein_bound(coefficient, cube, subdivision);
        if upper > bound.upper {
            bound.upper = upper;
        }
        for point in &grid {
            let v = coefficient.eval(point).abs();
            if !have_witness || v > bound.lower {
                bound.lower = v;
                bound.witness = point.clone();
                have_witness = true;
            }
        }
    }
    Ok(bound)
}

/// Bounds for `|w|_{K,∞,∞} = |w|_{K,∞} + |dw|_{K,∞}`.
pub fn flat_seminorm(w: &PolyForm, cube: &Cube, grid_per_axis: usize) -> Result<NormBound> {
    let a = sup_norm(w, cube, grid_per_axis)?;
    let b = sup_norm(&w.d(), cube, grid_per_axis)?;
    Ok(a.plus(&b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::form::basis;
    use crate::rational::{int, rat};

    fn x1() -> Polynomial {
        Polynomial::var(1, 0)
    }

    #[test]
    fn bernstein_of_linear_and_constant() {
        let unit = Cube::unit(1);
        assert_eq!(bernstein_coefficients(&x1(), &unit), vec![int(0), int(1)]);
        let c = Polynomial::constant(1, rat(-3, 2));
        assert!(bernstein_degree_elevate(&c, &unit, &[3])
            .unwrap()
            .iter()
            .all(|b| *b == rat(-3, 2)));
    }

    #[test]
    fn bernstein_of_logistic_parabola() {
        // x(1 - x) has Bernstein coefficients (0, 1/2, 0) in degree 2.
        let p = &x1() - &(&x1() * &x1());
        let b = bernstein_coefficients(&p, &Cube::unit(1));
        assert_eq!(b, vec![int(0), rat(1, 2), int(0)]);
    }

    #[test]
    fn bernstein_on_shifted_interval() {
        // x on [1, 3] has Bernstein coefficients (1, 3).
        let cube = Cube::new(vec![int(1)], vec![int(3)]).unwrap();
        assert_eq!(bernstein_coefficients(&x1(), &cube), vec![int(1), int(3)]);
        assert!(bernstein_degree_elevate(&(&x1() * &x1()), &cube, &[1]).is_err());
    }

    #[test]
    fn subdivision_tightens() {
        let p = &x1() - &(&x1() * &x1());
        let cube = Cube::unit(1);
        let b0 = bernstein_bound(&p, &cube, 0);
        let b1 = bernstein_bound(&p, &cube, 1);
        let b3 = bernstein_bound(&p, &cube, 3);
        assert_eq!(b0, rat(1, 2));
        // One halving already reaches the exact maximum 1/4.
        assert_eq!(b1, rat(1, 4));
        assert!(b1 < b0 && b3 == b1);
    }

    #[test]
    fn x_dy_on_unit_square_is_tight() {
        let w = basis(2, &[1], int(1)).mul_function(&Polynomial::var(2, 0));
        let b = sup_norm(&w, &Cube::unit(2), 2).unwrap();
        assert_eq!(b.lower, int(1));
        assert_eq!(b.upper, int(1));
        assert_eq!(b.witness[0], int(1));
    }

    #[test]
    fn constant_form() {
        let w = basis(3, &[0, 2], rat(-5, 3));
        let b = sup_norm(&w, &Cube::unit(3), 1).unwrap();
        assert_eq!(b.lower, rat(5, 3));
        assert_eq!(b.upper, rat(5, 3));
    }

    #[test]
    fn logistic_parabola_norm() {
        let w = PolyForm::function(&x1() - &(&x1() * &x1()));
        for g in [3, 5, 9] {
            let b = sup_norm(&w, &Cube::unit(1), g).unwrap();
            assert_eq!(b.upper, rat(1, 2));
            assert!(b.lower >= rat(1, 4));
            assert_eq!(b.witness, vec![rat(1, 2)]);
        }
    }

    #[test]
    fn flat_seminorm_examples() {
        let w = basis(2, &[1], int(1)).mul_function(&Polynomial::var(2, 0));
        let b = flat_seminorm(&w, &Cube::unit(2), 2).unwrap();
        assert_eq!(b.lower, int(2));
        assert_eq!(b.upper, int(2));

        let closed = PolyForm::function(&Polynomial::var(2, 0) * &Polynomial::var(2, 1)).d();
        assert_eq!(
            flat_seminorm(&closed, &Cube::unit(2), 3).unwrap(),
            sup_norm(&closed, &Cube::unit(2), 3).unwrap()
        );
        let zero = flat_seminorm(&PolyForm::zero(2, 1), &Cube::unit(2), 2).unwrap();
        assert!(zero.upper.is_zero() && zero.lower.is_zero());
    }

    #[test]
    fn rejects_bad_arguments() {
        let w = basis(2, &[1], int(1));
        assert!(sup_norm(&w, &Cube::unit(3), 2).is_err());
        assert!(sup_norm(&w, &Cube::unit(2), 0).is_err());
    }

    #[test]
    fn json_round_trip() {
        let b = NormBound {
            lower: rat(1, 3),
            upper: rat(7, 2),
            witness: vec![rat(1, 2), int(0)],
        };
        let j = NormBoundJson::from(&b);
        let text = serde_json::to_string(&j).unwrap();
        let back: NormBoundJson = serde_json::from_str(&text).unwrap();
        assert_eq!(NormBound::try_from(&back).unwrap(), b);
    }
}
