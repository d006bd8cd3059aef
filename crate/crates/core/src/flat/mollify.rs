use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flat::grid::GridForm;

/// Separable bump kernel `Π φ(x_a / r)`, `φ(z) = exp(-1/(1-z^2))`, sampled at
/// grid offsets and normalized to unit discrete mass.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Mollifier {
    pub radius: f64,
    /// Per-axis weights at offsets `-m_a..=m_a`; each row sums to 1.
    pub weights: Vec<Vec<f64>>,
}

impl Mollifier {
    pub fn new(radius: f64, cell_widths: &[f64]) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidArgument(format!("mollifier radius must be positive, got {radius}")));
        }
        let weights = cell_widths
            .iter()
            .map(|&h| {
                let m = (radius / h).floor() as usize;
                let mut row: Vec<f64> = (0..=2 * m)
                    .map(|i| {
                        let z = (i as f64 - m as f64) * h / radius;
                        if z.abs() < 1.0 {
                            (-1.0 / (1.0 - z * z)).exp()
                        } else {
                            0.0
                        }
                    })
                    .collect();
                let sum: f64 = row.iter().sum();
                row.iter_mut().for_each(|v| *v /= sum);
                row
            })
            .collect();
        Ok(Mollifier { radius, weights })
    }

    /// Half-width in cells along `axis`.
    pub fn support(&self, axis: usize) -> usize {
        (self.weights[axis].len() - 1) / 2
    }

    /// Total discrete mass, `1` up to rounding.
    pub fn mass(&self) -> f64 {
        self.weights.iter().map(|row| row.iter().sum::<f64>()).product()
    }

    pub fn min_weight(&self) -> f64 {
        self.weights.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Largest admissible radius for a grid: a quarter of its shortest edge.
pub fn radius_limit(w: &GridForm) -> f64 {
    w.min_edge() / 4.0
}

/// Convolves every coefficient with the bump of the given radius. The result
/// lives on the concentric sub-grid where the kernel never leaves the data.
pub fn mollify(w: &GridForm, radius: f64) -> Result<GridForm> {
    let limit = radius_limit(w);
    if radius >= limit {
        return Err(Error::RadiusTooLarge { radius, limit });
    }
    let n = w.dim();
    let widths: Vec<f64> = (0..n).map(|a| w.cell_width(a)).collect();
    let kernel = Mollifier::new(radius, &widths)?;
    let crop = (0..n).map(|a| kernel.support(a)).max().unwrap_or(0);
    let res = w.resolution();
    let out_res = res - 2 * crop;
    let lo: Vec<f64> = (0..n).map(|a| w.lo()[a] + crop as f64 * widths[a]).collect();
    let hi: Vec<f64> = (0..n).map(|a| w.hi()[a] - crop as f64 * widths[a]).collect();
    let mut map = BTreeMap::new();
    for (index, values) in w.coefficients() {
        let mut data = values.to_vec();
        let mut shape = vec![res; n];
        for (a, row) in kernel.weights.iter().enumerate() {
            data = convolve_axis(&data, &shape, a, row, crop);
            shape[a] = out_res;
        }
        map.insert(index.clone(), data);
    }
    GridForm::new(w.degree(), lo, hi, out_res, map)
}

/// One separable pass: output index `j` along `axis` reads input `j + crop + o`
/// for kernel offsets `o` in `-m..=m`.
fn convolve_axis(data: &[f64], shape: &[usize], axis: usize, row: &[f64], crop: usize) -> Vec<f64> {
    let len = shape[axis];
    let out_len = len - 2 * crop;
    let m = (row.len() - 1) / 2;
    let inner: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let mut out = vec![0.0; outer * out_len * inner];
    for o in 0..outer {
        for j in 0..out_len {
            let centre = j + crop;
            let dst = (o * out_len + j) * inner;
            for (t, &wt) in row.iter().enumerate() {
                if wt == 0.0 {
                    continue;
                }
                let src = (o * len + centre + t - m) * inner;
                for i in 0..inner {
                    out[dst + i] += wt * data[src + i];
                }
            }
        }
    }
    out
}
