use nalgebra::DMatrix;

use crate::cube::Cube;
use crate::error::{Error, Result};
use crate::flat::grid::GridForm;
use crate::form::PolyForm;
use crate::poly::Polynomial;
use crate::rational::{self, Rational};

/// Bits kept when rounding fitted Legendre coefficients to dyadic rationals.
pub const RATIONAL_BITS: u32 = 48;

#[derive(Debug, Clone)]
pub struct PolynomialFit {
    pub form: PolyForm,
    /// The grid box as an exact cube; the fit is meant to be used on it.
    pub cube: Cube,
    /// `max_I max_cell |fit - a_I|` at cell centers.
    pub residual: f64,
    pub degree: usize,
}

/// `P_0..=P_d` at `t`.
fn legendre_values(d: usize, t: f64) -> Vec<f64> {
    let mut out = vec![1.0, t];
    for j in 1..d {
        let j = j as f64;
        let next = ((2.0 * j + 1.0) * t * out[j as usize] - j * out[j as usize - 1]) / (j + 1.0);
        out.push(next);
    }
    out.truncate(d + 1);
    out
}

/// `m[k][j]` = coefficient of `t^k` in `P_j`, exactly.
fn legendre_monomials(d: usize) -> Vec<Vec<Rational>> {
    let zero = rational::int(0);
    let mut cols: Vec<Vec<Rational>> = vec![vec![zero.clone(); d + 1]; d + 1];
    cols[0][0] = rational::int(1);
    if d >= 1 {
        cols[1][1] = rational::int(1);
    }
    for j in 1..d {
        let a = rational::rat(2 * j as i64 + 1, j as i64 + 1);
        let b = rational::rat(j as i64, j as i64 + 1);
        let mut next = vec![zero.clone(); d + 1];
        for k in 0..=d {
            if k >= 1 {
                next[k] += &a * &cols[j][k - 1];
            }
            next[k] -= &b * &cols[j - 1][k];
        }
        cols[j + 1] = next;
    }
    // transpose to rows = powers
    (0..=d).map(|k| (0..=d).map(|j| cols[j][k].clone()).collect()).collect()
}

/// Applies `mat` (`out x in`) along `axis` of a row-major tensor.
fn apply_axis_f64(data: &[f64], shape: &[usize], axis: usize, mat: &DMatrix<f64>) -> Vec<f64> {
    let len = shape[axis];
    let out_len = mat.nrows();
    let inner: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let mut out = vec![0.0; outer * out_len * inner];
    for o in 0..outer {
        for r in 0..out_len {
            let dst = (o * out_len + r) * inner;
            for c in 0..len {
                let m = mat[(r, c)];
                if m == 0.0 {
                    continue;
                }
                let src = (o * len + c) * inner;
                for i in 0..inner {
                    out[dst + i] += m * data[src + i];
                }
            }
        }
    }
    out
}

fn apply_axis_exact(data: &[Rational], shape: &[usize], axis: usize, mat: &[Vec<Rational>]) -> Vec<Rational> {
    let len = shape[axis];
    let out_len = mat.len();
    let inner: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let mut out = vec![rational::int(0); outer * out_len * inner];
    for o in 0..outer {
        for r in 0..out_len {
            let dst = (o * out_len + r) * inner;
            for (c, m) in mat[r].iter().enumerate().take(len) {
                if rational::is_zero(m) {
                    continue;
                }
                let src = (o * len + c) * inner;
                for i in 0..inner {
                    if !rational::is_zero(&data[src + i]) {
                        out[dst + i] += m * &data[src + i];
                    }
                }
            }
        }
    }
    out
}

/// Least-squares fit of every coefficient in the tensor-product space of
/// per-variable degree `degree`, computed in the Legendre basis of the
/// centered coordinates and rationalized to exact monomial coefficients.
pub fn fit_polynomial(w: &GridForm, degree: usize) -> Result<PolynomialFit> {
    let n = w.dim();
    let res = w.resolution();
    let cols = degree + 1;
    let design = DMatrix::from_fn(res, cols, |i, j| {
        let t = 2.0 * (i as f64 + 0.5) / res as f64 - 1.0;
        legendre_values(degree, t)[j]
    });
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = smax * 1e-10;
    let rank = svd.singular_values.iter().filter(|&&s| s > eps).count();
    if rank < cols {
        return Err(Error::IllConditioned { rank, columns: cols });
    }
    let pinv = svd.pseudo_inverse(eps).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let to_monomial = legendre_monomials(degree);

    let cube = w.cube()?;
    let two = rational::int(2);
    let offset: Vec<Rational> = (0..n).map(|a| -(&cube.lo()[a] + &cube.hi()[a]) / cube.length(a)).collect();
    let scale: Vec<Rational> = (0..n).map(|a| &two / cube.length(a)).collect();

    let mut residual: f64 = 0.0;
    let mut terms = Vec::new();
    for (index, values) in w.coefficients() {
        let mut coeffs = values.to_vec();
        let mut shape = vec![res; n];
        for a in 0..n {
            coeffs = apply_axis_f64(&coeffs, &shape, a, &pinv);
            shape[a] = cols;
        }
        let mut fitted = coeffs.clone();
        for a in 0..n {
            fitted = apply_axis_f64(&fitted, &shape, a, &design);
            shape[a] = res;
        }
        for (f, v) in fitted.iter().zip(values) {
            residual = residual.max((f - v).abs());
        }

        let mut exact = coeffs
            .iter()
            .map(|&c| rational::from_f64_dyadic(c, RATIONAL_BITS))
            .collect::<Result<Vec<_>>>()?;
        let cshape = vec![cols; n];
        for a in 0..n {
            exact = apply_axis_exact(&exact, &cshape, a, &to_monomial);
        }
        let monomials = exact.into_iter().enumerate().filter(|(_, c)| !rational::is_zero(c)).map(|(flat, c)| {
            let mut exps = vec![0u32; n];
            let mut rest = flat;
            for a in (0..n).rev() {
                exps[a] = (rest % cols) as u32;
                rest /= cols;
            }
            (exps, c)
        });
        let in_t = Polynomial::from_terms(n, monomials);
        terms.push((index.clone(), in_t.affine_substitute(&offset, &scale)));
    }
    let form = PolyForm::from_terms(n, w.degree(), terms)?;
    Ok(PolynomialFit { form, cube, residual, degree })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flat::grid::sample;
    use crate::form::{basis, MultiIndex};

    #[test]
    fn legendre_tables_agree() {
        let m = legendre_monomials(4);
        // P_4 = (35 t^4 - 30 t^2 + 3) / 8
        assert_eq!(m[4][4], rational::rat(35, 8));
        assert_eq!(m[2][4], rational::rat(-30, 8));
        assert_eq!(m[0][4], rational::rat(3, 8));
        let v = legendre_values(4, 0.3);
        assert!((v[4] - (35.0 * 0.0081 - 30.0 * 0.09 + 3.0) / 8.0).abs() < 1e-15);
    }

    #[test]
    fn recovers_xy_exactly_enough() {
        let cube = Cube::unit(2);
        let xy = &Polynomial::var(2, 0) * &Polynomial::var(2, 1);
        let g = sample(&PolyForm::function(xy.clone()), &cube, 16).unwrap();
        let fit = fit_polynomial(&g, 1).unwrap();
        assert!(fit.residual <= 1e-9);
        let p = fit.form.coefficient(&MultiIndex::empty());
        for (e, c) in p.terms() {
            let target = if e == &vec![1, 1] { 1.0 } else { 0.0 };
            assert!((rational::to_f64(c) - target).abs() < 1e-12, "{e:?} {c}");
        }
    }

    #[test]
    fn constant_is_exact_and_rank_is_checked() {
        let g = sample(&basis(1, &[0], rational::rat(3, 4)), &Cube::unit(1), 10).unwrap();
        let fit = fit_polynomial(&g, 0).unwrap();
        assert_eq!(fit.residual, 0.0);
        assert_eq!(fit.form, basis(1, &[0], rational::rat(3, 4)));
        assert!(matches!(fit_polynomial(&g, 12), Err(Error::IllConditioned { .. })));
    }
}
