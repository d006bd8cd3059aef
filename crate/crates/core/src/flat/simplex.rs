use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flat::grid::{eval_polynomial, GridForm};
use crate::form::{MultiIndex, PolyForm};

/// Simplices with smaller `m`-volume are rejected as degenerate.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;
/// Gauss–Legendre points per collapsed axis.
pub const QUADRATURE_ORDER: usize = 4;
/// Levels of uniform (Freudenthal) subdivision applied before quadrature.
pub const SUBDIVISION_LEVELS: usize = 2;

/// Oriented affine simplex; orientation follows the vertex order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Simplex {
    vertices: Vec<Vec<f64>>,
}

impl Simplex {
    pub fn new(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let n = vertices.first().map(Vec::len).unwrap_or(0);
        if n == 0 || vertices.iter().any(|v| v.len() != n) {
            return Err(Error::InvalidArgument("simplex vertices must share a positive dimension".into()));
        }
        if vertices.len() > n + 1 {
            return Err(Error::DegenerateSimplex { volume: 0.0 });
        }
        if let Some(v) = vertices.iter().find(|v| v.iter().any(|x| !x.is_finite())) {
            return Err(Error::InvalidArgument(format!("non-finite vertex {v:?}")));
        }
        let s = Simplex { vertices };
        if s.dim() > 0 {
            let volume = s.volume();
            if volume.is_nan() || volume <= DEGENERACY_THRESHOLD {
                return Err(Error::DegenerateSimplex { volume });
            }
        }
        Ok(s)
    }

    /// Number of vertices minus one.
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn ambient_dim(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    /// Edge vectors `v_i - v_0` as the columns of an `n x m` matrix.
    pub fn edge_matrix(&self) -> DMatrix<f64> {
        let n = self.ambient_dim();
        let m = self.dim();
        DMatrix::from_fn(n, m, |r, c| self.vertices[c + 1][r] - self.vertices[0][r])
    }

    /// `m`-dimensional volume `sqrt(det(E^T E)) / m!` (1 for a point).
    pub fn volume(&self) -> f64 {
        let m = self.dim();
        if m == 0 {
            return 1.0;
        }
        let e = self.edge_matrix();
        let gram = e.transpose() * &e;
        let factorial: f64 = (1..=m).map(|i| i as f64).product();
        gram.determinant().max(0.0).sqrt() / factorial
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                d = d.max(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt());
            }
        }
        d
    }

    /// Affine parametrization `v_0 + Σ t_j (v_j - v_0)`.
    pub fn point(&self, t: &[f64]) -> Vec<f64> {
        let mut x = self.vertices[0].clone();
        for (j, &tj) in t.iter().enumerate() {
            for (xi, (a, b)) in x.iter_mut().zip(self.vertices[j + 1].iter().zip(&self.vertices[0])) {
                *xi += tj * (a - b);
            }
        }
        x
    }
}

/// `∂[v_0..v_m] = Σ_i (-1)^i [v_0..v̂_i..v_m]`.
pub fn boundary(sigma: &Simplex) -> Vec<(f64, Simplex)> {
    if sigma.dim() == 0 {
        return Vec::new();
    }
    (0..sigma.vertices.len())
        .map(|i| {
            let mut vertices = sigma.vertices.clone();
            vertices.remove(i);
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            (sign, Simplex { vertices })
        })
        .collect()
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
fn gauss_unit(order: usize) -> Vec<(f64, f64)> {
    let rule: &[(f64, f64)] = match order {
        3 => &[(-0.7745966692414834, 0.5555555555555556), (0.0, 0.8888888888888888), (0.7745966692414834, 0.5555555555555556)],
        4 => &[
            (-0.8611363115940526, 0.3478548451374538),
            (-0.3399810435848563, 0.6521451548625461),
            (0.3399810435848563, 0.6521451548625461),
            (0.8611363115940526, 0.3478548451374538),
        ],
        _ => panic!("unsupported Gauss order {order}"),
    };
    rule.iter().map(|&(x, w)| ((1.0 + x) / 2.0, w / 2.0)).collect()
}

/// Quadrature on the reference simplex `{t >= 0, Σ t <= 1}`; weights sum to `1/m!`.
#[derive(Debug, Clone)]
pub struct SimplexRule {
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

/// Affine image `V_0 + Σ s_j (V_j - V_0)` of the reference simplex.
type AffinePiece = Vec<Vec<f64>>;

fn freudenthal_children(m: usize) -> Vec<AffinePiece> {
    // Kuhn simplices of the doubled reference simplex, in the ordered
    // coordinates y_j = Σ_{i>=j} t_i.
    let mut perms: Vec<Vec<usize>> = vec![vec![]];
    for k in 0..m {
        perms = perms
            .into_iter()
            .flat_map(|p| (0..=k).map(move |pos| {
                let mut q = p.clone();
                q.insert(pos, k);
                q
            }))
            .collect();
    }
    let to_t = |y: &[f64]| -> Vec<f64> { (0..m).map(|j| (y[j] - y.get(j + 1).copied().unwrap_or(0.0)) / 2.0).collect() };
    let mut out = Vec::new();
    for corner in 0..1usize << m {
        for perm in &perms {
            let mut y: Vec<f64> = (0..m).map(|i| (corner >> i & 1) as f64).collect();
            let mut verts = vec![y.clone()];
            for &axis in perm {
                y[axis] += 1.0;
                verts.push(y.clone());
            }
            let centroid: Vec<f64> =
                (0..m).map(|i| verts.iter().map(|v| v[i]).sum::<f64>() / (m + 1) as f64).collect();
            let inside = centroid[0] < 2.0
                && centroid[m - 1] > 0.0
                && centroid.windows(2).all(|p| p[0] > p[1]);
            if inside {
                out.push(verts.iter().map(|v| to_t(v)).collect());
            }
        }
    }
    out
}

fn compose(outer: &AffinePiece, inner: &AffinePiece) -> AffinePiece {
    inner
        .iter()
        .map(|s| {
            let mut p = outer[0].clone();
            for (j, &sj) in s.iter().enumerate() {
                for (pi, (a, b)) in p.iter_mut().zip(outer[j + 1].iter().zip(&outer[0])) {
                    *pi += sj * (a - b);
                }
            }
            p
        })
        .collect()
}

fn piece_jacobian(piece: &AffinePiece) -> f64 {
    let m = piece.len() - 1;
    DMatrix::from_fn(m, m, |r, c| piece[c + 1][r] - piece[0][r]).determinant().abs()
}

impl SimplexRule {
    pub fn new(m: usize, order: usize, levels: usize) -> Self {
        if m == 0 {
            return SimplexRule { nodes: vec![vec![]], weights: vec![1.0] };
        }
        let gauss = gauss_unit(order);
        // collapsed tensor rule on the reference simplex
        let mut base_nodes = Vec::new();
        let mut base_weights = Vec::new();
        for flat in 0..order.pow(m as u32) {
            let mut rest = flat;
            let mut u = vec![0.0; m];
            let mut w = 1.0;
            for ui in u.iter_mut() {
                let (x, wx) = gauss[rest % order];
                rest /= order;
                *ui = x;
                w *= wx;
            }
            let mut t = vec![0.0; m];
            let mut remaining = 1.0;
            for i in 0..m {
                t[i] = remaining * u[i];
                w *= (1.0 - u[i]).powi((m - 1 - i) as i32);
                remaining *= 1.0 - u[i];
            }
            base_nodes.push(t);
            base_weights.push(w);
        }
        let identity: AffinePiece =
            std::iter::once(vec![0.0; m]).chain((0..m).map(|j| (0..m).map(|i| (i == j) as u8 as f64).collect())).collect();
        let children = freudenthal_children(m);
        let mut pieces = vec![identity];
        for _ in 0..levels {
            pieces = pieces.iter().flat_map(|p| children.iter().map(move |c| compose(p, c))).collect();
        }
        let mut nodes = Vec::with_capacity(pieces.len() * base_nodes.len());
        let mut weights = Vec::with_capacity(nodes.capacity());
        for piece in &pieces {
            let jac = piece_jacobian(piece);
            for (s, &w) in base_nodes.iter().zip(&base_weights) {
                nodes.push(compose(piece, &vec![s.clone()]).remove(0));
                weights.push(w * jac);
            }
        }
        SimplexRule { nodes, weights }
    }

    pub fn standard(m: usize) -> Self {
        SimplexRule::new(m, QUADRATURE_ORDER, SUBDIVISION_LEVELS)
    }
}

/// Anything that can be integrated over an oriented simplex.
pub trait SimplexIntegrand {
    fn ambient_dim(&self) -> usize;
    fn form_degree(&self) -> usize;
    /// Multi-indices carrying (possibly) nonzero coefficients.
    fn indices(&self) -> Vec<MultiIndex>;
    /// Coefficient of `indices()[term]` at `x`.
    fn value(&self, term: usize, x: &[f64]) -> f64;
    /// Closed box the form lives on, if bounded.
    fn domain(&self) -> Option<(&[f64], &[f64])> {
        None
    }
    /// Coordinates along `axis` where the coefficients stop being smooth.
    fn breakpoints(&self, _axis: usize) -> Option<Vec<f64>> {
        None
    }
}

impl SimplexIntegrand for PolyForm {
    fn ambient_dim(&self) -> usize {
        self.dim()
    }

    fn form_degree(&self) -> usize {
        self.degree()
    }

    fn indices(&self) -> Vec<MultiIndex> {
        self.terms().map(|(i, _)| i.clone()).collect()
    }

    fn value(&self, term: usize, x: &[f64]) -> f64 {
        let (_, p) = self.terms().nth(term).expect("term in range");
        eval_polynomial(p, x)
    }
}

impl SimplexIntegrand for GridForm {
    fn ambient_dim(&self) -> usize {
        self.dim()
    }

    fn form_degree(&self) -> usize {
        self.degree()
    }

    fn indices(&self) -> Vec<MultiIndex> {
        self.coefficients().map(|(i, _)| i.clone()).collect()
    }

    fn value(&self, term: usize, x: &[f64]) -> f64 {
        let (_, values) = self.coefficients().nth(term).expect("term in range");
        self.trace_value(values, x)
    }

    fn domain(&self) -> Option<(&[f64], &[f64])> {
        Some((self.lo(), self.hi()))
    }

    fn breakpoints(&self, axis: usize) -> Option<Vec<f64>> {
        Some((0..self.resolution()).map(|i| self.center_coordinate(axis, i)).collect())
    }
}

fn check_inside<W: SimplexIntegrand + ?Sized>(w: &W, sigma: &Simplex) -> Result<()> {
    if let Some((lo, hi)) = w.domain() {
        for v in sigma.vertices() {
            let inside = (0..v.len()).all(|a| {
                let slack = 1e-12 * (hi[a] - lo[a]);
                v[a] >= lo[a] - slack && v[a] <= hi[a] + slack
            });
            if !inside {
                return Err(Error::SimplexOutsideDomain { vertex: v.clone() });
            }
        }
    }
    Ok(())
}

/// `∫_σ w` for a form of degree `dim σ`, by pulling back through the affine
/// parametrization. Segments through grid data are split where the trace
/// has kinks and integrated exactly; everything else uses the subdivided
/// collapsed Gauss rule.
pub fn integrate_over_simplex<W: SimplexIntegrand + ?Sized>(w: &W, sigma: &Simplex) -> Result<f64> {
    let rule = SimplexRule::standard(sigma.dim());
    integrate_with_rule(w, sigma, &rule)
}

pub fn integrate_with_rule<W: SimplexIntegrand + ?Sized>(w: &W, sigma: &Simplex, rule: &SimplexRule) -> Result<f64> {
    if w.ambient_dim() != sigma.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: w.ambient_dim(), found: sigma.ambient_dim() });
    }
    let m = sigma.dim();
    if w.form_degree() != m {
        return Err(Error::DegreeMismatch { expected: m, found: w.form_degree() });
    }
    check_inside(w, sigma)?;
    let indices = w.indices();
    if indices.is_empty() {
        return Ok(0.0);
    }
    let e = sigma.edge_matrix();
    let minors: Vec<f64> = indices
        .iter()
        .map(|index| {
            if m == 0 {
                return 1.0;
            }
            DMatrix::from_fn(m, m, |r, c| e[(index.indices()[r], c)]).determinant()
        })
        .collect();
    let integrand = |x: &[f64]| -> f64 {
        let mut total = 0.0;
        for (term, &mi) in minors.iter().enumerate() {
            if mi != 0.0 {
                total += mi * w.value(term, x);
            }
        }
        total
    };
    if m == 1 && w.breakpoints(0).is_some() {
        return Ok(integrate_segment_split(w, sigma, &integrand));
    }
    Ok(rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(t, wt)| wt * integrand(&sigma.point(t)))
        .sum())
}

fn integrate_segment_split<W: SimplexIntegrand + ?Sized>(w: &W, sigma: &Simplex, f: &dyn Fn(&[f64]) -> f64) -> f64 {
    let a = &sigma.vertices()[0];
    let b = &sigma.vertices()[1];
    let mut cuts = vec![0.0, 1.0];
    for axis in 0..a.len() {
        let delta = b[axis] - a[axis];
        if delta == 0.0 {
            continue;
        }
        for c in w.breakpoints(axis).unwrap_or_default() {
            let t = (c - a[axis]) / delta;
            if t > 0.0 && t < 1.0 {
                cuts.push(t);
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let gauss = gauss_unit(3);
    let mut total = 0.0;
    for piece in cuts.windows(2) {
        let (t0, t1) = (piece[0], piece[1]);
        let len = t1 - t0;
        if len <= 0.0 {
            continue;
        }
        for &(u, wt) in &gauss {
            total += wt * len * f(&sigma.point(&[t0 + u * len]));
        }
    }
    total
}

/// `∫_{∂σ} w` for a form of degree `dim σ - 1`.
pub fn boundary_integral<W: SimplexIntegrand + ?Sized>(w: &W, sigma: &Simplex) -> Result<f64> {
    if sigma.dim() == 0 {
        return Err(Error::InvalidArgument("a point has empty boundary".into()));
    }
    let rule = SimplexRule::standard(sigma.dim() - 1);
    let mut total = 0.0;
    for (sign, face) in boundary(sigma) {
        total += sign * integrate_with_rule(w, &face, &rule)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::form::basis;
    use crate::rational::int;

    #[test]
    fn reference_weights_sum_to_inverse_factorial() {
        for (m, expected) in [(1, 1.0), (2, 0.5), (3, 1.0 / 6.0)] {
            let rule = SimplexRule::standard(m);
            let sum: f64 = rule.weights.iter().sum();
            assert!((sum - expected).abs() < 1e-13, "m = {m}: {sum}");
            assert_eq!(rule.nodes.len(), (1 << (m * SUBDIVISION_LEVELS)) * QUADRATURE_ORDER.pow(m as u32));
        }
        // ∫_T t_1 t_2 = 1/24
        let rule = SimplexRule::standard(2);
        let v: f64 = rule.nodes.iter().zip(&rule.weights).map(|(t, w)| w * t[0] * t[1]).sum();
        assert!((v - 1.0 / 24.0).abs() < 1e-14);
    }

    #[test]
    fn line_and_area_integrals() {
        let dx = basis(2, &[0], int(1));
        let seg = Simplex::new(vec![vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert!((integrate_over_simplex(&dx, &seg).unwrap() - 1.0).abs() < 1e-14);
        let area = basis(2, &[0, 1], int(1));
        let tri = Simplex::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!((integrate_over_simplex(&area, &tri).unwrap() - 0.5).abs() < 1e-14);
        let flipped = Simplex::new(vec![vec![1.0, 0.0], vec![0.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!((integrate_over_simplex(&area, &flipped).unwrap() + 0.5).abs() < 1e-14);
        assert!(boundary_integral(&dx, &tri).unwrap().abs() < 1e-14);
    }

    #[test]
    fn degenerate_and_outside() {
        assert!(matches!(
            Simplex::new(vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]]),
            Err(Error::DegenerateSimplex { .. })
        ));
        let g = GridForm::zero(1, vec![0.0, 0.0], vec![1.0, 1.0], 4).unwrap();
        let seg = Simplex::new(vec![vec![0.5, 0.5], vec![1.5, 0.5]]).unwrap();
        assert!(matches!(integrate_over_simplex(&g, &seg), Err(Error::SimplexOutsideDomain { .. })));
    }
}
