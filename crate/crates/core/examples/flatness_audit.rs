//! Boundary integrals over random simplices: smooth forms stay bounded,
//! jumps across a hyperplane blow up as the simplices shrink.

use poincare_linf::flat::{flatness_check, sample, FlatnessOptions, GridForm};
use poincare_linf::form::{basis, MultiIndex};
use poincare_linf::rational::int;
use poincare_linf::{Cube, Polynomial};

fn sign_form(axis: usize) -> poincare_linf::Result<GridForm> {
    GridForm::from_fn(1, vec![0.0; 2], vec![1.0; 2], 256, &[MultiIndex::single(axis)], |_, x| {
        if x[0] < 0.5 {
            -1.0
        } else {
            1.0
        }
    })
}

fn main() -> poincare_linf::Result<()> {
    let x_dy = basis(2, &[1], int(1)).mul_function(&Polynomial::var(2, 0));
    let cases = [
        ("x dy", sample(&x_dy, &Cube::unit(2), 256)?),
        ("sign(x - 1/2) dy", sign_form(1)?),
        ("sign(x - 1/2) dx", sign_form(0)?),
    ];
    let options = FlatnessOptions { sample_count: 2000, seed: 1, ..FlatnessOptions::default() };
    for (name, w) in &cases {
        let report = flatness_check(w, &options)?;
        println!(
            "{name}: N = {:.3}, N' = {:.4e}, blow-up {:.2}, exponent {}, verdict {:?}",
            report.coefficient_bound,
            report.max_ratio,
            report.scale_blowup.unwrap_or(f64::NAN),
            report.scale_exponent.map_or("-".into(), |p| format!("{p:.2}")),
            report.verdict
        );
        for bin in &report.bins {
            println!(
                "    scale {:.4}..{:.4}  n = {:>3}  median {:.3e}  max {:.3e}",
                bin.scale_lo, bin.scale_hi, bin.count, bin.median, bin.max
            );
        }
    }
    Ok(())
}
