//! Polynomial differential forms `w = Σ a_I dx^I` on a cube in `R^n`.
//!
//! Multi-indices are stored 0-based and strictly increasing; the JSON wire
//! format and the `Display` output use the conventional coordinate names.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::rational::{Rational, RationalJson};

/// Strictly increasing list of 0-based coordinate indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(format!(
                "multi-index {indices:?} is not strictly increasing"
            )));
        }
        Ok(MultiIndex(indices))
    }

    pub fn empty() -> Self {
        MultiIndex(Vec::new())
    }

    pub fn single(i: usize) -> Self {
        MultiIndex(vec![i])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn last(&self) -> Option<usize> {
        self.0.last().copied()
    }

    /// Merges two index lists; returns the sign of the sorting permutation,
    /// or `None` when an index repeats.
    pub fn merge(a: &MultiIndex, b: &MultiIndex) -> Option<(i32, MultiIndex)> {
        let mut inversions = 0usize;
        for &i in &a.0 {
            for &j in &b.0 {
                if i == j {
                    return None;
                }
                if i > j {
                    inversions += 1;
                }
            }
        }
        let mut merged: Vec<usize> = a.0.iter().chain(&b.0).copied().collect();
        merged.sort_unstable();
        let sign = if inversions.is_multiple_of(2) { 1 } else { -1 };
        Some((sign, MultiIndex(merged)))
    }

    /// Removes `coord`, shifting higher indices down by one.
    fn drop_coord(&self, coord: usize) -> MultiIndex {
        MultiIndex(
            self.0
                .iter()
                .filter(|&&i| i != coord)
                .map(|&i| if i > coord { i - 1 } else { i })
                .collect(),
        )
    }

    /// All strictly increasing `k`-subsets of `0..n`.
    pub fn all(n: usize, k: usize) -> Vec<MultiIndex> {
        fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
            if cur.len() == k {
                out.push(MultiIndex(cur.clone()));
                return;
            }
            for i in start..n {
                cur.push(i);
                rec(i + 1, n, k, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        if k <= n {
            rec(0, n, k, &mut Vec::new(), &mut out);
        }
        out
    }

    /// 1-based labels, as used in files.
    pub fn to_one_based(&self) -> Vec<usize> {
        self.0.iter().map(|i| i + 1).collect()
    }

    pub fn from_one_based(indices: &[usize]) -> Result<Self> {
        if indices.contains(&0) {
            return Err(Error::Parse("multi-index entries are 1-based".into()));
        }
        MultiIndex::new(indices.iter().map(|i| i - 1).collect())
    }

    pub fn label(&self, n: usize) -> String {
        const NAMES: [&str; 4] = ["x", "y", "z", "w"];
        if self.0.is_empty() {
            return "1".into();
        }
        self.0
            .iter()
            .map(|&i| {
                if n <= 4 {
                    format!("d{}", NAMES[i])
                } else {
                    format!("dx{}", i + 1)
                }
            })
            .collect::<Vec<_>>()
            .join("^")
    }
}

/// A degree-`k` differential form on `R^n` with polynomial coefficients.
///
/// Canonical: zero coefficients are never stored, so structural equality is
/// form equality.
#[derive(Clone, PartialEq, Eq)]
pub struct PolyForm {
    dim: usize,
    degree: usize,
    terms: BTreeMap<MultiIndex, Polynomial>,
}

impl PolyForm {
    pub fn zero(dim: usize, degree: usize) -> Self {
        PolyForm {
            dim,
            degree,
            terms: BTreeMap::new(),
        }
    }

    /// A 0-form (function).
    pub fn function(p: Polynomial) -> Self {
        let dim = p.nvars();
        let mut f = Self::zero(dim, 0);
        f.insert(MultiIndex::empty(), p);
        f
    }

    pub fn constant(dim: usize, value: Rational) -> Self {
        Self::function(Polynomial::constant(dim, value))
    }

    /// `coefficient · dx^index`.
    pub fn term(index: MultiIndex, coefficient: Polynomial) -> Result<Self> {
        let dim = coefficient.nvars();
        Self::from_terms(dim, index.len(), [(index, coefficient)])
    }

    /// The basis 1-form `dx^i` (0-based).
    pub fn dx(dim: usize, i: usize) -> Self {
        Self::term(MultiIndex::single(i), Polynomial::one(dim)).expect("valid basis form")
    }

    pub fn from_terms<I>(dim: usize, degree: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, Polynomial)>,
    {
        if dim == 0 {
            return Err(Error::InvalidArgument("ambient dimension must be at least 1".into()));
        }
        let mut form = Self::zero(dim, degree);
        for (index, coefficient) in terms {
            if index.len() != degree {
                return Err(Error::DegreeMismatch {
                    expected: degree,
                    found: index.len(),
                });
            }
            if let Some(&bad) = index.indices().iter().find(|&&i| i >= dim) {
                return Err(Error::CoordinateOutOfRange { coord: bad + 1, dim });
            }
            if coefficient.nvars() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: coefficient.nvars(),
                });
            }
            form.insert(index, coefficient);
        }
        Ok(form)
    }

    fn insert(&mut self, index: MultiIndex, coefficient: Polynomial) {
        if coefficient.is_zero() {
            return;
        }
        match self.terms.get_mut(&index) {
            Some(existing) => {
                let sum = &*existing + &coefficient;
                if sum.is_zero() {
                    self.terms.remove(&index);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(index, coefficient);
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Polynomial)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, index: &MultiIndex) -> Polynomial {
        self.terms
            .get(index)
            .cloned()
            .unwrap_or_else(|| Polynomial::zero(self.dim))
    }

    fn check_same_shape(&self, other: &PolyForm) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch {
                expected: self.degree,
                found: other.degree,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &PolyForm) -> Result<PolyForm> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (i, c) in &other.terms {
            out.insert(i.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &PolyForm) -> Result<PolyForm> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> PolyForm {
        PolyForm {
            dim: self.dim,
            degree: self.degree,
            terms: self.terms.iter().map(|(i, c)| (i.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, factor: &Rational) -> PolyForm {
        let mut out = Self::zero(self.dim, self.degree);
        for (i, c) in &self.terms {
            out.insert(i.clone(), c.scale(factor));
        }
        out
    }

    /// Multiplies every coefficient by the function `f`.
    pub fn mul_function(&self, f: &Polynomial) -> PolyForm {
        let mut out = Self::zero(self.dim, self.degree);
        for (i, c) in &self.terms {
            out.insert(i.clone(), c * f);
        }
        out
    }

    pub fn wedge(&self, other: &PolyForm) -> Result<PolyForm> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let mut out = Self::zero(self.dim, self.degree + other.degree);
        for (ia, ca) in &self.terms {
            for (ib, cb) in &other.terms {
                if let Some((sign, index)) = MultiIndex::merge(ia, ib) {
                    let prod = ca * cb;
                    let prod = if sign < 0 { -&prod } else { prod };
                    out.insert(index, prod);
                }
            }
        }
        Ok(out)
    }

    /// Exterior derivative `d(a dx^I) = Σ_j ∂_j a dx^j ∧ dx^I`.
    pub fn d(&self) -> PolyForm {
        let mut out = Self::zero(self.dim, self.degree + 1);
        for (index, coefficient) in &self.terms {
            for j in 0..self.dim {
                if index.contains(j) {
                    continue;
                }
                let partial = coefficient.derivative(j);
                if partial.is_zero() {
                    continue;
                }
                let (sign, merged) =
                    MultiIndex::merge(&MultiIndex::single(j), index).expect("j not in index");
                out.insert(merged, if sign < 0 { -&partial } else { partial });
            }
        }
        out
    }

    /// Coefficient-wise partial derivative `∂w/∂x^coord`.
    pub fn partial(&self, coord: usize) -> PolyForm {
        let mut out = Self::zero(self.dim, self.degree);
        for (i, c) in &self.terms {
            out.insert(i.clone(), c.derivative(coord));
        }
        out
    }

    /// Splits `w = w1 ∧ dx^n + w2` along the last coordinate, where neither
    /// part contains `dx^n`. `w1` is `None` for 0-forms.
    pub fn split_last(&self) -> (Option<PolyForm>, PolyForm) {
        let last = self.dim - 1;
        let mut w2 = Self::zero(self.dim, self.degree);
        if self.degree == 0 {
            w2.terms = self.terms.clone();
            return (None, w2);
        }
        let mut w1 = Self::zero(self.dim, self.degree - 1);
        for (index, c) in &self.terms {
            if index.last() == Some(last) {
                // dx^I = dx^{I \ n} ∧ dx^n since n is the largest index.
                let mut rest = index.0.clone();
                rest.pop();
                w1.insert(MultiIndex(rest), c.clone());
            } else {
                w2.insert(index.clone(), c.clone());
            }
        }
        (Some(w1), w2)
    }

    fn require_no_differential(&self, coord: usize) -> Result<()> {
        if coord >= self.dim {
            return Err(Error::CoordinateOutOfRange {
                coord: coord + 1,
                dim: self.dim,
            });
        }
        if let Some(index) = self.terms.keys().find(|i| i.contains(coord)) {
            return Err(Error::ContainsDifferential {
                index: index.label(self.dim),
                coord: coord + 1,
            });
        }
        Ok(())
    }

    /// Substitutes `x^coord = value`, giving a form on the face cube in
    /// `n - 1` variables.
    pub fn restrict(&self, coord: usize, value: &Rational) -> Result<PolyForm> {
        self.require_no_differential(coord)?;
        if self.dim == 1 {
            return Err(Error::InvalidArgument(
                "cannot restrict a form on a 1-dimensional cube".into(),
            ));
        }
        let mut out = Self::zero(self.dim - 1, self.degree);
        for (index, c) in &self.terms {
            out.insert(index.drop_coord(coord), c.restrict(coord, value));
        }
        Ok(out)
    }

    /// Coefficient-wise `∫_tau^{x^coord} w(σ) dσ`.
    pub fn fiber_integrate(&self, coord: usize, tau: &Rational) -> Result<PolyForm> {
        self.require_no_differential(coord)?;
        let mut out = Self::zero(self.dim, self.degree);
        for (index, c) in &self.terms {
            out.insert(index.clone(), c.integrate_from(coord, tau));
        }
        Ok(out)
    }

    /// Views a form on the face cube as a form on the full cube that does not
    /// depend on the new last coordinate.
    pub fn include_from_face(&self) -> PolyForm {
        PolyForm {
            dim: self.dim + 1,
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .map(|(i, c)| (i.clone(), c.insert_var(self.dim)))
                .collect(),
        }
    }

    /// Pullback along the polynomial map `x -> (phi_1(x), ..., phi_m(x))`.
    pub fn pullback(&self, phi: &[Polynomial]) -> Result<PolyForm> {
        if phi.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: phi.len(),
            });
        }
        let source = phi.first().map(Polynomial::nvars).unwrap_or(0);
        if let Some(bad) = phi.iter().find(|p| p.nvars() != source) {
            return Err(Error::DimensionMismatch {
                expected: source,
                found: bad.nvars(),
            });
        }
        let differentials: Vec<PolyForm> = phi
            .iter()
            .map(|p| PolyForm::function(p.clone()).d())
            .collect();
        let mut out = Self::zero(source, self.degree);
        for (index, c) in &self.terms {
            let mut piece = PolyForm::function(c.compose(phi));
            for &i in index.indices() {
                piece = piece.wedge(&differentials[i])?;
            }
            out = out.add(&piece)?;
        }
        Ok(out)
    }

    /// Evaluates every coefficient at a point.
    pub fn eval(&self, point: &[Rational]) -> Vec<(MultiIndex, Rational)> {
        self.terms
            .iter()
            .map(|(i, c)| (i.clone(), c.eval(point)))
            .collect()
    }

    /// First nonzero term, used in diagnostics.
    pub fn first_term_label(&self) -> Option<String> {
        self.terms
            .iter()
            .next()
            .map(|(i, c)| format!("({c}) {}", i.label(self.dim)))
    }

    /// Largest per-variable degree over all coefficients.
    pub fn max_variable_degree(&self) -> u32 {
        self.terms
            .values()
            .flat_map(|c| c.degrees())
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Display for PolyForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(i, c)| {
                if i.is_empty() {
                    format!("{c}")
                } else if c.as_constant().is_some_and(|v| v.is_one()) {
                    i.label(self.dim)
                } else {
                    format!("({c}) {}", i.label(self.dim))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for PolyForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PolyForm[n={}, k={}]({})", self.dim, self.degree, self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonomialJson {
    pub exponents: Vec<u32>,
    pub num: String,
    pub den: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    /// 1-based, ascending.
    pub index: Vec<usize>,
    pub coefficient: Vec<MonomialJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyFormJson {
    pub ambient_dim: usize,
    pub degree: usize,
    pub terms: Vec<TermJson>,
}

impl From<&PolyForm> for PolyFormJson {
    fn from(w: &PolyForm) -> Self {
        PolyFormJson {
            ambient_dim: w.dim,
            degree: w.degree,
            terms: w
                .terms
                .iter()
                .map(|(index, p)| TermJson {
                    index: index.to_one_based(),
                    coefficient: p
                        .terms()
                        .map(|(e, c)| {
                            let r = RationalJson::from(c);
                            MonomialJson { exponents: e.clone(), num: r.num, den: r.den }
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

impl TryFrom<&PolyFormJson> for PolyForm {
    type Error = Error;

    fn try_from(json: &PolyFormJson) -> Result<PolyForm> {
        let n = json.ambient_dim;
        let mut terms = Vec::with_capacity(json.terms.len());
        for term in &json.terms {
            let index = MultiIndex::from_one_based(&term.index)?;
            let mut monomials = Vec::with_capacity(term.coefficient.len());
            for m in &term.coefficient {
                if m.exponents.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, found: m.exponents.len() });
                }
                let c = Rational::try_from(&RationalJson { num: m.num.clone(), den: m.den.clone() })?;
                monomials.push((m.exponents.clone(), c));
            }
            terms.push((index, Polynomial::from_terms(n, monomials)));
        }
        PolyForm::from_terms(n, json.degree, terms)
    }
}

/// Convenience for `value` as a rational coefficient of a basis element.
pub fn basis(dim: usize, index: &[usize], value: Rational) -> PolyForm {
    let index = MultiIndex::new(index.to_vec()).expect("strictly increasing basis index");
    PolyForm::term(index, Polynomial::constant(dim, value)).expect("valid basis term")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn x2() -> Polynomial {
        Polynomial::var(2, 0)
    }
    fn y2() -> Polynomial {
        Polynomial::var(2, 1)
    }
    fn dx() -> PolyForm {
        PolyForm::dx(2, 0)
    }
    fn dy() -> PolyForm {
        PolyForm::dx(2, 1)
    }
    fn dxdy() -> PolyForm {
        basis(2, &[0, 1], int(1))
    }

    #[test]
    fn add_examples() {
        assert_eq!(dx().add(&dx()).unwrap(), dx().scale(&int(2)));
        let w = dy().mul_function(&x2());
        assert_eq!(w.add(&PolyForm::zero(2, 1)).unwrap(), w);
        assert!(w.add(&w.neg()).unwrap().is_zero());
        assert!(matches!(dx().add(&dxdy()), Err(Error::DegreeMismatch { .. })));
        assert!(matches!(
            dx().add(&PolyForm::dx(3, 0)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn wedge_examples() {
        assert!(dx().wedge(&dx()).unwrap().is_zero());
        assert_eq!(dx().wedge(&dy()).unwrap(), dxdy());
        assert_eq!(dy().wedge(&dx()).unwrap(), dxdy().neg());
        let a = dx().mul_function(&x2());
        let b = dy().mul_function(&y2());
        assert_eq!(a.wedge(&b).unwrap(), dxdy().mul_function(&(&x2() * &y2())));
        assert!(dx().wedge(&PolyForm::dx(3, 0)).is_err());
    }

    #[test]
    fn exterior_derivative_examples() {
        let xy = PolyForm::function(&x2() * &y2());
        let expect = dx().mul_function(&y2()).add(&dy().mul_function(&x2())).unwrap();
        assert_eq!(xy.d(), expect);
        assert!(expect.d().is_zero());
        assert_eq!(dy().mul_function(&x2()).d(), dxdy());
    }

    #[test]
    fn split_last_examples() {
        let w = dy().mul_function(&x2()).add(&dx().mul_function(&y2())).unwrap();
        let (w1, w2) = w.split_last();
        assert_eq!(w1.unwrap(), PolyForm::function(x2()));
        assert_eq!(w2, dx().mul_function(&y2()));

        let (w1, w2) = dxdy().split_last();
        assert_eq!(w1.unwrap(), dx());
        assert!(w2.is_zero());

        let (w1, w2) = dx().mul_function(&y2()).split_last();
        assert!(w1.unwrap().is_zero());
        assert_eq!(w2, dx().mul_function(&y2()));
    }

    #[test]
    fn restrict_examples() {
        let half_minus_y = &Polynomial::constant(2, rat(1, 2)) - &y2();
        assert!(dx().mul_function(&half_minus_y).restrict(1, &rat(1, 2)).unwrap().is_zero());
        assert_eq!(
            dx().mul_function(&y2()).restrict(1, &int(1)).unwrap(),
            PolyForm::dx(1, 0)
        );
        let p = &(&x2() * &x2()) + &y2();
        assert_eq!(
            dx().mul_function(&p).restrict(1, &int(0)).unwrap(),
            PolyForm::dx(1, 0).mul_function(&Polynomial::monomial(vec![2], int(1)))
        );
        assert!(matches!(
            dy().restrict(1, &int(0)),
            Err(Error::ContainsDifferential { .. })
        ));
    }

    #[test]
    fn fiber_integrate_examples() {
        let w = PolyForm::function(x2()).fiber_integrate(1, &int(0)).unwrap();
        assert_eq!(w, PolyForm::function(&x2() * &y2()));
        let w = dx().fiber_integrate(1, &rat(1, 2)).unwrap();
        let y_minus_half = &y2() - &Polynomial::constant(2, rat(1, 2));
        assert_eq!(w, dx().mul_function(&y_minus_half));
        assert!(PolyForm::zero(2, 1).fiber_integrate(1, &int(0)).unwrap().is_zero());
        assert!(dy().fiber_integrate(1, &int(0)).is_err());
    }

    #[test]
    fn include_from_face_examples() {
        let x1 = Polynomial::var(1, 0);
        let w = PolyForm::dx(1, 0).mul_function(&x1);
        assert_eq!(w.include_from_face(), dx().mul_function(&x2()));
        assert_eq!(
            PolyForm::constant(1, int(3)).include_from_face(),
            PolyForm::constant(2, int(3))
        );
        assert!(PolyForm::zero(1, 1).include_from_face().is_zero());
    }

    #[test]
    fn pullback_examples() {
        // swap: (x, y) -> (y, x)
        let swapped = dx().pullback(&[y2(), x2()]).unwrap();
        assert_eq!(swapped, dy());
        // square: x -> x^2
        let x1 = Polynomial::var(1, 0);
        let sq = PolyForm::dx(1, 0).pullback(&[&x1 * &x1]).unwrap();
        assert_eq!(sq, PolyForm::dx(1, 0).mul_function(&x1.scale(&int(2))));
        assert!(dx().pullback(&[x2()]).is_err());
    }

    #[test]
    fn top_degree_and_beyond() {
        assert_eq!(MultiIndex::all(3, 2).len(), 3);
        assert!(MultiIndex::all(2, 3).is_empty());
        // Any 3-form on R^2 is zero.
        assert!(dxdy().wedge(&dx()).unwrap().is_zero());
        assert_eq!(dxdy().wedge(&dx()).unwrap().degree(), 3);
    }

    #[test]
    fn display_uses_coordinate_names() {
        let w = dy().mul_function(&x2());
        assert_eq!(w.to_string(), "(x) dy");
        assert_eq!(dxdy().to_string(), "dx^dy");
    }
}
