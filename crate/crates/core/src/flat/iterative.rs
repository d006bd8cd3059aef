use serde::{Deserialize, Serialize};

use crate::cube::Cube;
use crate::error::{Error, Result};
use crate::flat::fit::fit_polynomial;
use crate::flat::grid::{sample, GridForm};
use crate::flat::mollify::{mollify, radius_limit, Mollifier};
use crate::flat::pairing::{default_closedness_tolerance, weak_closedness_residual};
use crate::form::PolyForm;
use crate::poincare::{bounded_primitive, closed_approx, verify_certificate};
use crate::rational;

/// Stages in a row without a residual decrease before giving up.
pub const STAGNATION_WINDOW: usize = 3;
/// Residuals at or below `CONVERGED * |w|_∞` stop the iteration early.
pub const CONVERGED: f64 = 1e-9;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterativeOptions {
    pub stages: usize,
    /// Mollifier radius per stage; defaults to [`geometric_radii`].
    pub radii: Option<Vec<f64>>,
    /// Fit degree per stage; defaults to `round(degree_factor * L / r_s)` capped
    /// at `max_degree`.
    pub degrees: Option<Vec<usize>>,
    pub degree_factor: f64,
    /// Defaults to 128, 12, 6, 4 for dimensions 1..=4.
    pub max_degree: Option<usize>,
    pub closedness_tolerance: Option<f64>,
    /// Adjacent-cell jumps above this fraction of `|w|_∞` mark the singular set
    /// excluded from the interior residual.
    pub jump_fraction: f64,
}

impl Default for IterativeOptions {
    fn default() -> Self {
        IterativeOptions {
            stages: 5,
            radii: None,
            degrees: None,
            degree_factor: 0.8,
            max_degree: None,
            closedness_tolerance: None,
            jump_fraction: 0.25,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: usize,
    pub radius: f64,
    pub degree: usize,
    /// `max |w - w_s|` over the common sub-grid.
    pub residual: f64,
    /// Same, restricted to cells farther than the largest radius from any jump.
    pub interior_residual: f64,
    pub fit_residual: f64,
    /// Upper bounds on `|w_s - w_{s-1}|` and `|θ_s|` on the common cube.
    pub increment_norm: f64,
    pub theta_norm: f64,
    pub certificate_verified: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualHistory {
    pub options: IterativeOptions,
    pub radii: Vec<f64>,
    pub degrees: Vec<usize>,
    pub closedness_residual: f64,
    pub closedness_tolerance: f64,
    pub input_norm: f64,
    pub common_lo: Vec<f64>,
    pub common_hi: Vec<f64>,
    pub common_resolution: usize,
    pub converged: bool,
    pub stages: Vec<StageRecord>,
}

impl ResidualHistory {
    pub fn residuals(&self) -> Vec<f64> {
        self.stages.iter().map(|s| s.residual).collect()
    }
}

#[derive(Debug, Clone)]
pub struct IterativeOutcome {
    /// `Σ θ_s` sampled on the common sub-grid.
    pub theta: GridForm,
    pub theta_form: PolyForm,
    /// Last closed polynomial approximation `w_S`.
    pub approximation: PolyForm,
    pub cube: Cube,
    pub history: ResidualHistory,
}

/// `first, first*ratio, first*ratio^2, ...`.
pub fn geometric_radii(first: f64, ratio: f64, stages: usize) -> Vec<f64> {
    (0..stages).map(|s| first * ratio.powi(s as i32)).collect()
}

/// Halving schedule starting at a tenth of the shortest edge.
pub fn default_radii(w: &GridForm, stages: usize) -> Vec<f64> {
    let first = (0.1 * w.min_edge()).min(0.99 * radius_limit(w));
    geometric_radii(first, 0.5, stages)
}

fn default_max_degree(n: usize) -> usize {
    match n {
        1 => 128,
        2 => 12,
        3 => 6,
        _ => 4,
    }
}

fn interior_mask(w: &GridForm, common: &GridForm, band: f64, threshold: f64) -> Vec<bool> {
    let n = w.dim();
    let mut jumps: Vec<Vec<f64>> = Vec::new();
    for (_, values) in w.coefficients() {
        for c in 0..w.num_cells() {
            let coords = w.cell_coords(c);
            for a in 0..n {
                if coords[a] + 1 >= w.resolution() {
                    continue;
                }
                let mut nb = coords.clone();
                nb[a] += 1;
                if (values[w.cell_index(&nb)] - values[c]).abs() > threshold {
                    let mut face = w.cell_center(c);
                    face[a] += w.cell_width(a) / 2.0;
                    jumps.push(face);
                }
            }
        }
    }
    (0..common.num_cells())
        .map(|c| {
            let x = common.cell_center(c);
            jumps.iter().all(|j| j.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) > band)
        })
        .collect()
}

fn masked_diff(a: &GridForm, b: &GridForm, mask: &[bool]) -> f64 {
    let mut out: f64 = 0.0;
    for (index, values) in a.coefficients() {
        let other = b.coefficient(index);
        for (c, v) in values.iter().enumerate() {
            if mask[c] {
                out = out.max((v - other.map_or(0.0, |o| o[c])).abs());
            }
        }
    }
    for (index, values) in b.coefficients() {
        if a.coefficient(index).is_none() {
            for (c, v) in values.iter().enumerate() {
                if mask[c] {
                    out = out.max(v.abs());
                }
            }
        }
    }
    out
}

/// Builds a primitive of a weakly closed grid form as a telescoping sum of
/// certified primitives of closed polynomial increments. Stage `s` mollifies
/// at radius `r_s`, fits a polynomial, projects it onto closed forms and
/// takes the bounded primitive of the change from the previous stage. All
/// comparisons happen on the sub-grid left after the largest mollification.
pub fn iterative_primitive(w: &GridForm, options: &IterativeOptions) -> Result<IterativeOutcome> {
    let n = w.dim();
    let k = w.degree();
    if k == 0 {
        return Err(Error::ZeroDegreePrimitive);
    }
    if options.stages == 0 {
        return Err(Error::InvalidArgument("at least one stage is required".into()));
    }
    let closedness_residual = weak_closedness_residual(w)?;
    let closedness_tolerance = options.closedness_tolerance.unwrap_or_else(|| default_closedness_tolerance(w));
    if closedness_residual > closedness_tolerance {
        return Err(Error::NotWeaklyClosed { residual: closedness_residual, tolerance: closedness_tolerance });
    }
    let radii = options.radii.clone().unwrap_or_else(|| default_radii(w, options.stages));
    if radii.len() != options.stages {
        return Err(Error::InvalidArgument(format!(
            "{} radii given for {} stages",
            radii.len(),
            options.stages
        )));
    }
    let limit = radius_limit(w);
    if let Some(&r) = radii.iter().find(|&&r| !(r > 0.0 && r < limit)) {
        return Err(Error::RadiusTooLarge { radius: r, limit });
    }
    let max_degree = options.max_degree.unwrap_or_else(|| default_max_degree(n));
    let degrees = match &options.degrees {
        Some(d) if d.len() != options.stages => {
            return Err(Error::InvalidArgument(format!("{} degrees given for {} stages", d.len(), options.stages)))
        }
        Some(d) => d.clone(),
        None => radii
            .iter()
            .map(|r| ((options.degree_factor * w.min_edge() / r).round() as usize).clamp(1, max_degree))
            .collect(),
    };

    let widths: Vec<f64> = (0..n).map(|a| w.cell_width(a)).collect();
    let crop_of = |r: f64| -> Result<usize> {
        let kernel = Mollifier::new(r, &widths)?;
        Ok((0..n).map(|a| kernel.support(a)).max().unwrap_or(0))
    };
    let mut common_crop = 0;
    for &r in &radii {
        common_crop = common_crop.max(crop_of(r)?);
    }
    let common = w.crop(common_crop)?;
    let cube = common.cube()?;
    let input_norm = common.max_abs();
    let largest = radii.iter().copied().fold(0.0, f64::max);
    let mask = interior_mask(w, &common, largest, options.jump_fraction * w.max_abs());
    let floor = CONVERGED * input_norm;

    let mut history = ResidualHistory {
        options: options.clone(),
        radii: radii.clone(),
        degrees: degrees.clone(),
        closedness_residual,
        closedness_tolerance,
        input_norm,
        common_lo: common.lo().to_vec(),
        common_hi: common.hi().to_vec(),
        common_resolution: common.resolution(),
        converged: false,
        stages: Vec::new(),
    };
    let mut previous = PolyForm::zero(n, k);
    let mut theta = PolyForm::zero(n, k - 1);
    let mut without_decrease = 0;

    for (s, (&radius, &degree)) in radii.iter().zip(&degrees).enumerate() {
        let smooth = mollify(w, radius)?;
        let smooth = smooth.crop((smooth.resolution() - common.resolution()) / 2)?;
        let fit = fit_polynomial(&smooth, degree)?;
        let ws = closed_approx(&fit.form, &cube)?.wprime;
        let increment = ws.sub(&previous)?;
        let step = bounded_primitive(&increment, &cube)?;
        let verified = verify_certificate(&step.certificate).verified;
        theta = theta.add(&step.theta)?;

        let approx = sample(&ws, &cube, common.resolution())?;
        let residual = common.max_abs_diff(&approx)?;
        let interior_residual = masked_diff(&common, &approx, &mask);
        history.stages.push(StageRecord {
            stage: s + 1,
            radius,
            degree,
            residual,
            interior_residual,
            fit_residual: fit.residual,
            increment_norm: rational::to_f64(&step.certificate.norm_input.upper),
            theta_norm: rational::to_f64(&step.certificate.norm_output.upper),
            certificate_verified: verified,
        });
        let last_two = history.stages.len() >= 2
            && history.stages[history.stages.len() - 1].residual >= history.stages[history.stages.len() - 2].residual;
        without_decrease = if last_two { without_decrease + 1 } else { 0 };
        previous = ws;
        if residual <= floor {
            history.converged = true;
            break;
        }
        if without_decrease >= STAGNATION_WINDOW {
            return Err(Error::Stagnation { stage: s + 1, residuals: history.residuals() });
        }
    }

    let theta_grid = sample(&theta, &cube, common.resolution())?;
    Ok(IterativeOutcome { theta: theta_grid, theta_form: theta, approximation: previous, cube, history })
}
