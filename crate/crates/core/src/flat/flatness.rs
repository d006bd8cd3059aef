use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flat::grid::GridForm;
use crate::flat::simplex::{boundary_integral, Simplex, QUADRATURE_ORDER, SUBDIVISION_LEVELS};

/// Ratio growth from the largest-scale decile to the smallest that counts as
/// blow-up.
pub const BLOWUP_THRESHOLD: f64 = 10.0;
/// Fitted `max ratio ~ scale^p` exponents below this mark a form as not flat
/// when no bound `N'` is supplied. Jumps across a hyperplane give `p = -1`.
pub const EXPONENT_THRESHOLD: f64 = -0.5;
/// Relative vertex perturbation applied to the regular reference simplex.
pub const SHAPE_JITTER: f64 = 0.15;

const HALTON_BASES: [u32; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlatnessOptions {
    pub sample_count: usize,
    pub seed: u64,
    pub scale_range: (f64, f64),
    /// Bound to test against; estimated from the data when absent.
    pub nprime: Option<f64>,
    pub bins: usize,
}

impl Default for FlatnessOptions {
    fn default() -> Self {
        FlatnessOptions { sample_count: 2000, seed: 0, scale_range: (0.01, 0.3), nprime: None, bins: 10 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimplexRecord {
    pub scale: f64,
    pub vertices: Vec<Vec<f64>>,
    pub boundary_integral: f64,
    pub volume: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScaleBin {
    pub scale_lo: f64,
    pub scale_hi: f64,
    pub count: usize,
    pub median: f64,
    pub q90: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuadratureInfo {
    pub gauss_order: usize,
    pub subdivision_levels: usize,
    pub segments: String,
    pub trace: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Flat,
    NotFlat,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlatnessReport {
    pub ambient_dim: usize,
    pub degree: usize,
    pub resolution: usize,
    pub options: FlatnessOptions,
    pub quadrature: QuadratureInfo,
    /// `N`: largest coefficient magnitude.
    pub coefficient_bound: f64,
    /// `N'`: largest recorded ratio.
    pub max_ratio: f64,
    /// Largest ratio in the smallest-scale bin over that of the largest-scale bin.
    pub scale_blowup: Option<f64>,
    /// Least-squares slope of log(bin max) against log(bin scale), over bins
    /// whose max is above round-off.
    pub scale_exponent: Option<f64>,
    pub verdict: Verdict,
    /// True when the verdict came from the blow-up heuristic rather than a supplied `N'`.
    pub verdict_estimated: bool,
    pub skipped: usize,
    pub bins: Vec<ScaleBin>,
    pub records: Vec<SimplexRecord>,
}

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as f64;
    let mut inv = 1.0 / b;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base as u64) as f64 * inv;
        i /= base as u64;
        inv /= b;
    }
    out
}

/// Vertices of a regular `m`-simplex with unit edges, centered at the origin,
/// in `R^m`.
fn regular_simplex(m: usize) -> Vec<Vec<f64>> {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let centered: Vec<Vec<f64>> = (0..=m)
        .map(|i| (0..=m).map(|j| scale * ((i == j) as u8 as f64 - 1.0 / (m + 1) as f64)).collect())
        .collect();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for i in 1..=m {
        let mut v: Vec<f64> = (0..=m).map(|j| (j == i) as u8 as f64 - (j == 0) as u8 as f64).collect();
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        basis.push(v);
    }
    centered
        .iter()
        .map(|p| basis.iter().map(|b| p.iter().zip(b).map(|(x, y)| x * y).sum()).collect())
        .collect()
}

/// `n x m` matrix with orthonormal columns from a Gaussian draw.
fn random_frame(rng: &mut ChaCha8Rng, n: usize, m: usize) -> DMatrix<f64> {
    loop {
        let g = DMatrix::from_fn(n, m, |_, _| rng.sample::<f64, _>(StandardNormal));
        let qr = g.qr();
        let r = qr.r();
        if (0..m).all(|i| r[(i, i)].abs() > 1e-6) {
            return qr.q();
        }
    }
}

/// Whether every vertex coordinate stays clear of cell faces and the
/// cell-center planes where the trace has kinks.
fn in_general_position(w: &GridForm, vertices: &[Vec<f64>]) -> bool {
    vertices.iter().all(|v| {
        (0..w.dim()).all(|a| {
            let h = w.cell_width(a);
            let u = (v[a] - w.lo()[a]) / h * 2.0;
            (u - u.round()).abs() > 1e-9
        })
    })
}

struct Sampler<'a> {
    w: &'a GridForm,
    m: usize,
    reference: Vec<Vec<f64>>,
    shift: Vec<f64>,
    rng: ChaCha8Rng,
}

impl Sampler<'_> {
    fn draw(&mut self, i: usize, scale: f64) -> Option<Simplex> {
        let n = self.w.dim();
        let halton: Vec<f64> = (0..n)
            .map(|a| (radical_inverse(i as u64 + 1, HALTON_BASES[a % HALTON_BASES.len()]) + self.shift[a]).fract())
            .collect();
        for _ in 0..16 {
            let frame = random_frame(&mut self.rng, n, self.m);
            let local: Vec<Vec<f64>> = self
                .reference
                .iter()
                .map(|p| p.iter().map(|x| scale * (x + self.rng.random_range(-SHAPE_JITTER..SHAPE_JITTER))).collect())
                .collect();
            let centered: Vec<Vec<f64>> =
                local.iter().map(|p| (0..n).map(|r| (0..self.m).map(|c| frame[(r, c)] * p[c]).sum()).collect()).collect();
            let vertices: Vec<Vec<f64>> = centered
                .iter()
                .map(|p| {
                    (0..n)
                        .map(|a| {
                            let (lo, hi) = (self.w.lo()[a], self.w.hi()[a]);
                            let reach = centered.iter().map(|q| q[a].abs()).fold(0.0, f64::max);
                            let span = (hi - lo - 2.0 * reach).max(0.0);
                            lo + reach + halton[a] * span + p[a]
                        })
                        .collect()
                })
                .collect();
            if !vertices.iter().all(|v| self.w.contains(v)) || !in_general_position(self.w, &vertices) {
                continue;
            }
            if let Ok(s) = Simplex::new(vertices) {
                return Some(s);
            }
        }
        None
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let pos = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[pos]
}

fn fit_exponent(bins: &[ScaleBin], floor: f64) -> Option<f64> {
    let points: Vec<(f64, f64)> = bins
        .iter()
        .filter(|b| b.max > floor)
        .map(|b| ((b.scale_lo * b.scale_hi).sqrt().ln(), b.max.ln()))
        .collect();
    if points.len() < 3 {
        return None;
    }
    let k = points.len() as f64;
    let (mx, my) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / k, b + y / k));
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Samples seeded random `(k+1)`-simplices across `scale_range` (edge length,
/// stratified log-uniform; centers from a shifted Halton sequence; random
/// orientation) and records `|∫_∂σ w| / |σ|` for each.
pub fn flatness_check(w: &GridForm, options: &FlatnessOptions) -> Result<FlatnessReport> {
    let (a, b) = options.scale_range;
    if !(a > 0.0 && b >= a && b.is_finite()) {
        return Err(Error::InvalidArgument(format!("invalid scale range ({a}, {b})")));
    }
    let n = w.dim();
    let m = w.degree() + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let shift: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let count = if m > n { 0 } else { options.sample_count };
    let mut sampler = Sampler { w, m, reference: if m > n { Vec::new() } else { regular_simplex(m) }, shift, rng };

    let mut records = Vec::with_capacity(count);
    let mut skipped = 0;
    for i in 0..count {
        let u: f64 = sampler.rng.random();
        let scale = a * (b / a).powf((i as f64 + u) / count as f64);
        let Some(sigma) = sampler.draw(i, scale) else {
            skipped += 1;
            continue;
        };
        let integral = boundary_integral(w, &sigma)?;
        let volume = sigma.volume();
        records.push(SimplexRecord {
            scale,
            vertices: sigma.vertices().to_vec(),
            boundary_integral: integral,
            volume,
            ratio: integral.abs() / volume,
        });
    }

    let nbins = options.bins.max(1).min(records.len().max(1));
    let mut bins = Vec::new();
    for bin in 0..nbins {
        let start = bin * records.len() / nbins;
        let end = (bin + 1) * records.len() / nbins;
        let slice = &records[start..end];
        if slice.is_empty() {
            continue;
        }
        let mut ratios: Vec<f64> = slice.iter().map(|r| r.ratio).collect();
        ratios.sort_by(f64::total_cmp);
        bins.push(ScaleBin {
            scale_lo: slice[0].scale,
            scale_hi: slice[slice.len() - 1].scale,
            count: slice.len(),
            median: quantile(&ratios, 0.5),
            q90: quantile(&ratios, 0.9),
            max: *ratios.last().unwrap(),
        });
    }
    let max_ratio = records.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let scale_blowup = match (bins.first(), bins.last()) {
        (Some(small), Some(large)) if bins.len() > 1 && large.max > 0.0 => Some(small.max / large.max),
        _ => None,
    };
    let scale_exponent = fit_exponent(&bins, 1e-9 * w.max_abs().max(1.0));
    let (verdict, verdict_estimated) = match options.nprime {
        Some(x) => (if max_ratio <= x { Verdict::Flat } else { Verdict::NotFlat }, false),
        None => {
            let blown = scale_exponent.is_some_and(|p| p < EXPONENT_THRESHOLD);
            (if blown { Verdict::NotFlat } else { Verdict::Flat }, true)
        }
    };
    Ok(FlatnessReport {
        ambient_dim: n,
        degree: w.degree(),
        resolution: w.resolution(),
        options: options.clone(),
        quadrature: QuadratureInfo {
            gauss_order: QUADRATURE_ORDER,
            subdivision_levels: SUBDIVISION_LEVELS,
            segments: "split at trace kinks, 3-point Gauss per piece".into(),
            trace: "multilinear through cell centers".into(),
        },
        coefficient_bound: w.max_abs(),
        max_ratio,
        scale_blowup,
        scale_exponent,
        verdict,
        verdict_estimated,
        skipped,
        bins,
        records,
    })
}
