use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Float, One, Zero};
use serde::{Deserialize, Serialize};

use crate::cube::Cube;
use crate::error::{Error, Result};
use crate::form::{MultiIndex, PolyForm};
use crate::poly::Polynomial;
use crate::rational::{self, Rational};

/// A `k`-form whose coefficients are constant on each cell of a regular
/// `N^n` grid over a box.
///
/// Arrays are row-major with the first axis varying slowest. Absent
/// multi-indices are identically zero.
#[derive(Debug, Clone, PartialEq)]
pub struct GridForm {
    dim: usize,
    degree: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
    resolution: usize,
    coefficients: BTreeMap<MultiIndex, Vec<f64>>,
}

impl GridForm {
    pub fn new(
        degree: usize,
        lo: Vec<f64>,
        hi: Vec<f64>,
        resolution: usize,
        coefficients: BTreeMap<MultiIndex, Vec<f64>>,
    ) -> Result<Self> {
        let dim = lo.len();
        if dim == 0 || dim != hi.len() {
            return Err(Error::InvalidCube(format!(
                "lo has {} entries but hi has {}",
                lo.len(),
                hi.len()
            )));
        }
        for i in 0..dim {
            if !(lo[i].is_finite() && hi[i].is_finite() && lo[i] < hi[i]) {
                return Err(Error::InvalidCube(format!(
                    "edge {} is empty or degenerate: [{}, {}]",
                    i + 1,
                    lo[i],
                    hi[i]
                )));
            }
        }
        if resolution == 0 {
            return Err(Error::InvalidArgument("resolution must be at least 1".into()));
        }
        if degree > dim {
            return Err(Error::DegreeMismatch { expected: dim, found: degree });
        }
        let cells = checked_cells(resolution, dim)?;
        for (index, values) in &coefficients {
            if index.len() != degree {
                return Err(Error::DegreeMismatch { expected: degree, found: index.len() });
            }
            if let Some(&i) = index.indices().last() {
                if i >= dim {
                    return Err(Error::CoordinateOutOfRange { coord: i + 1, dim });
                }
            }
            if values.len() != cells {
                return Err(Error::InvalidArgument(format!(
                    "coefficient {} has {} values, expected {}",
                    index.label(dim),
                    values.len(),
                    cells
                )));
            }
            if let Some(v) = values.iter().find(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "coefficient {} contains non-finite value {v}",
                    index.label(dim)
                )));
            }
        }
        Ok(GridForm { dim, degree, lo, hi, resolution, coefficients })
    }

    pub fn zero(degree: usize, lo: Vec<f64>, hi: Vec<f64>, resolution: usize) -> Result<Self> {
        GridForm::new(degree, lo, hi, resolution, BTreeMap::new())
    }

    /// Builds a grid form by evaluating `f(index, center)` at every cell center
    /// for each of the given multi-indices.
    pub fn from_fn<F>(
        degree: usize,
        lo: Vec<f64>,
        hi: Vec<f64>,
        resolution: usize,
        indices: &[MultiIndex],
        f: F,
    ) -> Result<Self>
    where
        F: Fn(&MultiIndex, &[f64]) -> f64,
    {
        let grid = GridForm::zero(degree, lo, hi, resolution)?;
        let centers: Vec<Vec<f64>> = (0..grid.num_cells()).map(|c| grid.cell_center(c)).collect();
        let map = indices
            .iter()
            .map(|index| (index.clone(), centers.iter().map(|x| f(index, x)).collect()))
            .collect();
        GridForm::new(degree, grid.lo, grid.hi, resolution, map)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn num_cells(&self) -> usize {
        self.resolution.pow(self.dim as u32)
    }

    pub fn cell_width(&self, axis: usize) -> f64 {
        (self.hi[axis] - self.lo[axis]) / self.resolution as f64
    }

    pub fn max_cell_width(&self) -> f64 {
        (0..self.dim).map(|a| self.cell_width(a)).fold(0.0, f64::max)
    }

    pub fn min_edge(&self) -> f64 {
        (0..self.dim).map(|a| self.hi[a] - self.lo[a]).fold(f64::INFINITY, f64::min)
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|a| self.cell_width(a)).product()
    }

    /// Per-axis cell coordinates of a flat cell number.
    pub fn cell_coords(&self, cell: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim];
        let mut rest = cell;
        for a in (0..self.dim).rev() {
            out[a] = rest % self.resolution;
            rest /= self.resolution;
        }
        out
    }

    pub fn cell_index(&self, coords: &[usize]) -> usize {
        coords.iter().fold(0, |acc, &i| acc * self.resolution + i)
    }

    pub fn cell_center(&self, cell: usize) -> Vec<f64> {
        self.cell_coords(cell)
            .iter()
            .enumerate()
            .map(|(a, &i)| self.center_coordinate(a, i))
            .collect()
    }

    pub fn center_coordinate(&self, axis: usize, i: usize) -> f64 {
        self.lo[axis] + (i as f64 + 0.5) * self.cell_width(axis)
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (&MultiIndex, &[f64])> {
        self.coefficients.iter().map(|(k, v)| (k, v.as_slice()))
    }

    pub fn coefficient(&self, index: &MultiIndex) -> Option<&[f64]> {
        self.coefficients.get(index).map(Vec::as_slice)
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.values().all(|v| v.iter().all(|&x| x == 0.0))
    }

    /// Coefficient bound `max_I max_cell |a_I|`; the essential supremum of a
    /// piecewise-constant form.
    pub fn max_abs(&self) -> f64 {
        self.coefficients
            .values()
            .flat_map(|v| v.iter())
            .fold(0.0, |m, &x| m.max(x.abs()))
    }

    /// `max_I max_cell |a_I - b_I|` for forms on the same grid.
    pub fn max_abs_diff(&self, other: &GridForm) -> Result<f64> {
        self.check_same_grid(other)?;
        let mut out: f64 = 0.0;
        for index in self.coefficients.keys().chain(other.coefficients.keys()) {
            let a = self.coefficient(index);
            let b = other.coefficient(index);
            for c in 0..self.num_cells() {
                let x = a.map_or(0.0, |v| v[c]);
                let y = b.map_or(0.0, |v| v[c]);
                out = out.max((x - y).abs());
            }
        }
        Ok(out)
    }

    pub fn check_same_grid(&self, other: &GridForm) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch { expected: self.degree, found: other.degree });
        }
        if self.resolution != other.resolution || self.lo != other.lo || self.hi != other.hi {
            return Err(Error::InvalidArgument("grid forms live on different grids".into()));
        }
        Ok(())
    }

    /// Drops `cells` layers of cells on every side.
    pub fn crop(&self, cells: usize) -> Result<GridForm> {
        if cells == 0 {
            return Ok(self.clone());
        }
        if 2 * cells >= self.resolution {
            return Err(Error::InvalidArgument(format!(
                "cannot drop {cells} cells per side from resolution {}",
                self.resolution
            )));
        }
        let res = self.resolution - 2 * cells;
        let lo: Vec<f64> = (0..self.dim).map(|a| self.lo[a] + cells as f64 * self.cell_width(a)).collect();
        let hi: Vec<f64> = (0..self.dim).map(|a| self.hi[a] - cells as f64 * self.cell_width(a)).collect();
        let total = res.pow(self.dim as u32);
        let map = self
            .coefficients
            .iter()
            .map(|(index, values)| {
                let cropped = (0..total)
                    .map(|c| {
                        let mut rest = c;
                        let mut coords = vec![0; self.dim];
                        for a in (0..self.dim).rev() {
                            coords[a] = rest % res + cells;
                            rest /= res;
                        }
                        values[self.cell_index(&coords)]
                    })
                    .collect();
                (index.clone(), cropped)
            })
            .collect();
        GridForm::new(self.degree, lo, hi, res, map)
    }

    /// Multilinear interpolation of the cell-center values of `a_I`, clamped
    /// to the outermost centers. This continuous trace is what simplex
    /// integration sees.
    pub fn trace_value(&self, values: &[f64], point: &[f64]) -> f64 {
        let n = self.dim;
        let mut base = vec![0usize; n];
        let mut frac = vec![0.0; n];
        for a in 0..n {
            if self.resolution == 1 {
                continue;
            }
            let u = ((point[a] - self.lo[a]) / self.cell_width(a) - 0.5).clamp(0.0, (self.resolution - 1) as f64);
            let i = (u.floor() as usize).min(self.resolution - 2);
            base[a] = i;
            frac[a] = u - i as f64;
        }
        let mut total = 0.0;
        let mut coords = vec![0usize; n];
        for corner in 0..1usize << n {
            let mut weight = 1.0;
            for a in 0..n {
                let up = corner >> a & 1 == 1;
                if self.resolution == 1 {
                    if up {
                        weight = 0.0;
                    }
                    coords[a] = 0;
                    continue;
                }
                coords[a] = base[a] + up as usize;
                weight *= if up { frac[a] } else { 1.0 - frac[a] };
            }
            if weight != 0.0 {
                total += weight * values[self.cell_index(&coords)];
            }
        }
        total
    }

    /// True when `point` lies in the closed box (with a relative slack of `1e-12`).
    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dim
            && (0..self.dim).all(|a| {
                let slack = 1e-12 * (self.hi[a] - self.lo[a]);
                point[a] >= self.lo[a] - slack && point[a] <= self.hi[a] + slack
            })
    }

    /// The box as an exact rational cube (doubles convert exactly).
    pub fn cube(&self) -> Result<Cube> {
        let lo = self.lo.iter().map(|&x| rational::from_f64_exact(x)).collect::<Result<_>>()?;
        let hi = self.hi.iter().map(|&x| rational::from_f64_exact(x)).collect::<Result<_>>()?;
        Cube::new(lo, hi)
    }

    pub fn to_json(&self) -> GridFormJson {
        GridFormJson {
            ambient_dim: self.dim,
            degree: self.degree,
            resolution: self.resolution,
            cube: GridCubeJson { lo: self.lo.clone(), hi: self.hi.clone() },
            coefficients: self
                .coefficients
                .iter()
                .map(|(index, values)| (index_key(index), values.clone()))
                .collect(),
        }
    }
}

fn checked_cells(resolution: usize, dim: usize) -> Result<usize> {
    resolution
        .checked_pow(dim as u32)
        .filter(|&c| c <= 1 << 28)
        .ok_or_else(|| Error::InvalidArgument(format!("grid {resolution}^{dim} is too large")))
}

/// `"1-2"` style key with 1-based indices; `"0"` for the empty index.
pub fn index_key(index: &MultiIndex) -> String {
    if index.is_empty() {
        return "0".into();
    }
    index.to_one_based().iter().map(usize::to_string).collect::<Vec<_>>().join("-")
}

pub fn parse_index_key(key: &str) -> Result<MultiIndex> {
    if key == "0" {
        return Ok(MultiIndex::empty());
    }
    let parts = key
        .split('-')
        .map(|p| p.trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad index key {key:?}"))))
        .collect::<Result<Vec<_>>>()?;
    MultiIndex::from_one_based(&parts)
}

/// Evaluates a polynomial at a float point. Low degrees use floats directly;
/// high degrees (where monomial cancellation bites) go through exact
/// arithmetic on the exactly converted point.
pub fn eval_polynomial(p: &Polynomial, point: &[f64]) -> f64 {
    if p.total_degree() <= 16 {
        return p.eval_f64(point);
    }
    ExactEvaluator::new(p).eval(point)
}

/// Exact evaluation at dyadic points in integer arithmetic: the polynomial is
/// kept as integer numerators over one common denominator, and a point
/// `a / 2^s` contributes `a^k 2^(s (D - k))` per variable so that a single
/// division happens at the end.
struct ExactEvaluator {
    terms: Vec<(Vec<u32>, BigInt)>,
    denominator: BigInt,
    max_degree: Vec<u32>,
}

fn decode_dyadic(x: f64) -> (BigInt, u32) {
    let (mantissa, exponent, sign) = x.integer_decode();
    if mantissa == 0 {
        return (BigInt::zero(), 0);
    }
    let value = BigInt::from(sign) * BigInt::from(mantissa);
    if exponent >= 0 {
        (value << exponent as usize, 0)
    } else {
        let shift = (-exponent as u32).min(mantissa.trailing_zeros());
        (value >> shift as usize, -exponent as u32 - shift)
    }
}

impl ExactEvaluator {
    fn new(p: &Polynomial) -> Self {
        let denominator = p.terms().fold(BigInt::one(), |acc, (_, c)| acc.lcm(c.denom()));
        let terms = p.terms().map(|(e, c)| (e.clone(), c.numer() * (&denominator / c.denom()))).collect();
        ExactEvaluator { terms, denominator, max_degree: p.degrees() }
    }

    fn eval(&self, point: &[f64]) -> f64 {
        let decoded: Vec<(BigInt, u32)> = point.iter().map(|&x| decode_dyadic(x)).collect();
        let shift = decoded.iter().map(|(_, s)| *s).max().unwrap_or(0) as usize;
        let powers: Vec<Vec<BigInt>> = decoded
            .iter()
            .zip(&self.max_degree)
            .map(|((a, s), &d)| {
                let a = a << (shift - *s as usize);
                let mut row = Vec::with_capacity(d as usize + 1);
                let mut acc = BigInt::one();
                for k in 0..=d as usize {
                    row.push(&acc << (shift * (d as usize - k)));
                    acc *= &a;
                }
                row
            })
            .collect();
        let mut numerator = BigInt::zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (row, &k) in powers.iter().zip(e) {
                term *= &row[k as usize];
            }
            numerator += term;
        }
        let total_shift = shift * self.max_degree.iter().map(|&d| d as usize).sum::<usize>();
        rational::to_f64(&Rational::new_raw(numerator, &self.denominator << total_shift))
    }
}

/// Repeated evaluation of one polynomial on a box. The polynomial is
/// re-expanded in centered coordinates `t in [-1, 1]^n`; when the absolute
/// coefficient sum there is small the float rounding error is bounded by
/// `1e-16 * sum * (terms)`, otherwise evaluation falls back to exact arithmetic.
pub struct PolyEvaluator {
    exact: ExactEvaluator,
    centered: Option<Vec<(Vec<u32>, f64)>>,
    mid: Vec<f64>,
    inv_half: Vec<f64>,
}

impl PolyEvaluator {
    /// Largest centered coefficient sum evaluated in floating point.
    pub const FLOAT_LIMIT: f64 = 1e6;

    pub fn new(p: &Polynomial, cube: &Cube) -> Self {
        let n = cube.dim();
        let two = rational::int(2);
        let mid: Vec<_> = (0..n).map(|a| cube.midpoint(a)).collect();
        let half: Vec<_> = (0..n).map(|a| cube.length(a) / &two).collect();
        let centered = if p.total_degree() <= 1 || p.total_degree() > 48 {
            None
        } else {
            Some(p.affine_substitute(&mid, &half).to_f64_terms())
        };
        let centered = centered.filter(|terms| {
            let l1: f64 = terms.iter().map(|(_, c)| c.abs()).sum();
            l1.is_finite() && l1 <= Self::FLOAT_LIMIT
        });
        PolyEvaluator {
            exact: ExactEvaluator::new(p),
            centered,
            mid: mid.iter().map(rational::to_f64).collect(),
            inv_half: half.iter().map(|h| 1.0 / rational::to_f64(h)).collect(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match &self.centered {
            Some(terms) => {
                let t: Vec<f64> = x.iter().zip(&self.mid).zip(&self.inv_half).map(|((x, m), s)| (x - m) * s).collect();
                terms
                    .iter()
                    .map(|(e, c)| e.iter().zip(&t).fold(*c, |acc, (&k, &ti)| acc * ti.powi(k as i32)))
                    .sum()
            }
            None => self.exact.eval(x),
        }
    }
}

/// Cell-center sampling of a polynomial form on `cube`.
pub fn sample(w: &PolyForm, cube: &Cube, resolution: usize) -> Result<GridForm> {
    if w.dim() != cube.dim() {
        return Err(Error::DimensionMismatch { expected: cube.dim(), found: w.dim() });
    }
    let mut out = GridForm::zero(w.degree(), cube.lo_f64(), cube.hi_f64(), resolution)?;
    let centers: Vec<Vec<f64>> = (0..out.num_cells()).map(|c| out.cell_center(c)).collect();
    for (index, p) in w.terms() {
        let eval = PolyEvaluator::new(p, cube);
        let values = centers.iter().map(|x| eval.eval(x)).collect();
        out.coefficients.insert(index.clone(), values);
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridCubeJson {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridFormJson {
    pub ambient_dim: usize,
    pub degree: usize,
    pub resolution: usize,
    pub cube: GridCubeJson,
    pub coefficients: BTreeMap<String, Vec<f64>>,
}

impl TryFrom<&GridFormJson> for GridForm {
    type Error = Error;

    fn try_from(json: &GridFormJson) -> Result<GridForm> {
        if json.cube.lo.len() != json.ambient_dim {
            return Err(Error::DimensionMismatch { expected: json.ambient_dim, found: json.cube.lo.len() });
        }
        let map = json
            .coefficients
            .iter()
            .map(|(k, v)| Ok((parse_index_key(k)?, v.clone())))
            .collect::<Result<BTreeMap<_, _>>>()?;
        GridForm::new(json.degree, json.cube.lo.clone(), json.cube.hi.clone(), json.resolution, map)
    }
}
