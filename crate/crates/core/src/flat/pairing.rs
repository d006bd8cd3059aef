use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::cube::Cube;
use crate::error::{Error, Result};
use crate::flat::grid::GridForm;
use crate::form::{basis, MultiIndex, PolyForm};
use crate::poly::Polynomial;
use crate::rational::{self, Rational};

fn complement(index: &MultiIndex, n: usize) -> MultiIndex {
    MultiIndex::new((0..n).filter(|&i| !index.contains(i)).collect()).expect("increasing by construction")
}

/// Float copies of a polynomial form's coefficients, evaluated repeatedly.
struct FloatForm {
    terms: Vec<(MultiIndex, Polynomial)>,
}

impl FloatForm {
    fn new(alpha: &PolyForm) -> Self {
        FloatForm { terms: alpha.terms().map(|(i, p)| (i.clone(), p.clone())).collect() }
    }

    fn coefficient_at(&self, index: &MultiIndex, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .find(|(i, _)| i == index)
            .map_or(0.0, |(_, p)| super::grid::eval_polynomial(p, x))
    }
}

/// Midpoint-rule value of `∫ w ∧ α` over the grid box.
pub fn current_pairing(w: &GridForm, alpha: &PolyForm) -> Result<f64> {
    let n = w.dim();
    if alpha.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: alpha.dim() });
    }
    if alpha.degree() + w.degree() != n {
        return Err(Error::DegreeMismatch { expected: n - w.degree(), found: alpha.degree() });
    }
    let alpha = FloatForm::new(alpha);
    let vol = w.cell_volume();
    let mut total = 0.0;
    for (index, values) in w.coefficients() {
        let comp = complement(index, n);
        let (sign, _) = MultiIndex::merge(index, &comp).expect("complementary indices are disjoint");
        if !alpha.terms.iter().any(|(i, _)| *i == comp) {
            continue;
        }
        let mut sum = 0.0;
        for (c, &a) in values.iter().enumerate() {
            if a != 0.0 {
                sum += a * alpha.coefficient_at(&comp, &w.cell_center(c));
            }
        }
        total += sign as f64 * sum * vol;
    }
    Ok(total)
}

/// `⟨dw, β⟩ := (-1)^(k+1) ⟨w, dβ⟩`, the distributional differential.
pub fn weak_differential_pairing(w: &GridForm, beta: &PolyForm) -> Result<f64> {
    let sign = if w.degree().is_multiple_of(2) { -1.0 } else { 1.0 };
    Ok(sign * current_pairing(w, &beta.d())?)
}

/// Midpoint-rule `L^1` mass `Σ_J ∫ |b_J|` of a polynomial form on the grid.
pub fn l1_mass(grid: &GridForm, alpha: &PolyForm) -> f64 {
    let vol = grid.cell_volume();
    let float = FloatForm::new(alpha);
    (0..grid.num_cells())
        .map(|c| {
            let x = grid.cell_center(c);
            float.terms.iter().map(|(i, _)| float.coefficient_at(i, &x).abs()).sum::<f64>()
        })
        .sum::<f64>()
        * vol
}

/// Bubble `Π ((x_a - lo_a)(hi_a - x_a))^2 / (L_a/2)^4`: vanishes to second
/// order on the boundary and peaks at 1 in the center.
pub fn bubble(cube: &Cube) -> Polynomial {
    let n = cube.dim();
    let mut out = Polynomial::one(n);
    for a in 0..n {
        let x = Polynomial::var(n, a);
        let left = &x - &Polynomial::constant(n, cube.lo()[a].clone());
        let right = &Polynomial::constant(n, cube.hi()[a].clone()) - &x;
        let factor = &left * &right;
        let half = cube.length(a) / rational::int(2);
        let norm = Rational::from_integer(1.into()) / (&half * &half * &half * &half);
        out = &out * &(&factor * &factor).scale(&norm);
    }
    out
}

/// Fixed family of compactly supported `(n-k-1)`-forms used to test weak
/// closedness of a `k`-form: `bubble * q * dx^J` for every basis index `J`
/// and `q` in `{1, t_a, t_a^2}` with `t_a` the centered coordinate.
pub fn test_battery(cube: &Cube, degree: usize) -> Vec<PolyForm> {
    let n = cube.dim();
    let b = bubble(cube);
    let mut weights = vec![Polynomial::one(n)];
    for a in 0..n {
        let t = (&Polynomial::var(n, a).scale(&rational::int(2))
            - &Polynomial::constant(n, &cube.lo()[a] + &cube.hi()[a]))
            .scale(&(rational::int(1) / cube.length(a)));
        weights.push(&t * &t);
        weights.push(t);
    }
    let mut out = Vec::new();
    for index in MultiIndex::all(n, degree) {
        for q in &weights {
            out.push(basis(n, index.indices(), rational::int(1)).mul_function(&(&b * q)));
        }
    }
    out
}

/// `|⟨w, dα⟩| / (|w|_∞ · |dα|_1)`, a scale-free measure of how far `α`
/// detects non-closedness.
pub fn normalized_defect(w: &GridForm, alpha: &PolyForm) -> Result<f64> {
    let da = alpha.d();
    let norm = w.max_abs() * l1_mass(w, &da);
    if norm == 0.0 {
        return Ok(0.0);
    }
    Ok(current_pairing(w, &da)?.abs() / norm)
}

/// Largest normalized defect over the test battery; zero for top-degree forms.
pub fn weak_closedness_residual(w: &GridForm) -> Result<f64> {
    let n = w.dim();
    if w.degree() >= n || w.is_zero() {
        return Ok(0.0);
    }
    let cube = w.cube()?;
    let mut worst: f64 = 0.0;
    for alpha in test_battery(&cube, n - w.degree() - 1) {
        worst = worst.max(normalized_defect(w, &alpha)?);
    }
    Ok(worst)
}

/// Default weak-closedness tolerance `max(1e-6, 4 h^2)`. Sampled smooth
/// closed forms sit at roughly `0.4..1.3 h^2` (midpoint-rule error).
pub fn default_closedness_tolerance(w: &GridForm) -> f64 {
    let h = w.max_cell_width();
    1e-6_f64.max(4.0 * h * h)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComponentSummary {
    pub cells: usize,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocallyConstantReport {
    /// Largest jump between face-adjacent cells inside the domain: the
    /// discrete weak differential.
    pub jump_residual: f64,
    pub tolerance: f64,
    pub components: Vec<ComponentSummary>,
    /// Largest `max - min` over components.
    pub max_spread: f64,
    pub weakly_closed: bool,
    pub locally_constant: bool,
}

/// Checks that a function (0-form) with vanishing weak differential is
/// constant on each connected component of `mask` (all cells when `None`).
pub fn locally_constant_check(w: &GridForm, mask: Option<&[bool]>, tolerance: f64) -> Result<LocallyConstantReport> {
    if w.degree() != 0 {
        return Err(Error::DegreeMismatch { expected: 0, found: w.degree() });
    }
    let cells = w.num_cells();
    if let Some(m) = mask {
        if m.len() != cells {
            return Err(Error::InvalidArgument(format!("mask has {} entries, expected {cells}", m.len())));
        }
    }
    let inside = |c: usize| mask.is_none_or(|m| m[c]);
    let zeros = vec![0.0; cells];
    let values = w.coefficient(&MultiIndex::empty()).unwrap_or(&zeros);
    let n = w.dim();
    let res = w.resolution();
    let neighbors = |c: usize| {
        let coords = w.cell_coords(c);
        let mut out = Vec::with_capacity(2 * n);
        for a in 0..n {
            if coords[a] > 0 {
                let mut nb = coords.clone();
                nb[a] -= 1;
                out.push(w.cell_index(&nb));
            }
            if coords[a] + 1 < res {
                let mut nb = coords.clone();
                nb[a] += 1;
                out.push(w.cell_index(&nb));
            }
        }
        out
    };
    let mut jump: f64 = 0.0;
    let mut seen = vec![false; cells];
    let mut components = Vec::new();
    for start in 0..cells {
        if seen[start] || !inside(start) {
            continue;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut summary = ComponentSummary { cells: 0, min: f64::INFINITY, max: f64::NEG_INFINITY };
        while let Some(c) = queue.pop_front() {
            summary.cells += 1;
            summary.min = summary.min.min(values[c]);
            summary.max = summary.max.max(values[c]);
            for nb in neighbors(c) {
                if !inside(nb) {
                    continue;
                }
                jump = jump.max((values[nb] - values[c]).abs());
                if !seen[nb] {
                    seen[nb] = true;
                    queue.push_back(nb);
                }
            }
        }
        components.push(summary);
    }
    let max_spread = components.iter().map(|c| c.max - c.min).fold(0.0, f64::max);
    Ok(LocallyConstantReport {
        jump_residual: jump,
        tolerance,
        max_spread,
        weakly_closed: jump <= tolerance,
        locally_constant: max_spread <= 1e-6,
        components,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flat::grid::sample;
    use crate::rational::int;

    #[test]
    fn dx_against_bump_integrates_the_bump() {
        let cube = Cube::unit(1);
        let w = sample(&basis(1, &[0], int(1)), &cube, 512).unwrap();
        let f = PolyForm::function(bubble(&cube));
        // ∫_0^1 16 x^2 (1-x)^2 dx = 16/30
        let value = current_pairing(&w, &f).unwrap();
        assert!((value - 16.0 / 30.0).abs() < 1e-5, "{value}");
    }

    #[test]
    fn exact_form_is_weakly_closed() {
        let cube = Cube::unit(2);
        let eta = PolyForm::function(&Polynomial::var(2, 0) * &Polynomial::var(2, 1));
        let w = sample(&eta.d(), &cube, 64).unwrap();
        let r = weak_closedness_residual(&w).unwrap();
        assert!(r < default_closedness_tolerance(&w), "{r}");
        let not_closed = sample(&basis(2, &[1], int(1)).mul_function(&Polynomial::var(2, 0)), &cube, 64).unwrap();
        assert!(weak_closedness_residual(&not_closed).unwrap() > 1e-2);
    }

    #[test]
    fn components_of_a_mask() {
        let g = GridForm::from_fn(0, vec![0.0], vec![1.0], 8, &[MultiIndex::empty()], |_, x| if x[0] < 0.5 { 1.0 } else { 3.0 })
            .unwrap();
        let mask: Vec<bool> = (0..8).map(|c| c != 3 && c != 4).collect();
        let report = locally_constant_check(&g, Some(&mask), 1e-9).unwrap();
        assert_eq!(report.components.len(), 2);
        assert!(report.weakly_closed && report.locally_constant);
        let whole = locally_constant_check(&g, None, 1e-9).unwrap();
        assert!(!whole.weakly_closed && !whole.locally_constant);
    }
}
