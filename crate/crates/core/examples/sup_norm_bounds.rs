//! Certified sup-norm enclosures from Bernstein coefficients.

use poincare_linf::form::basis;
use poincare_linf::rational::{format, int, rat};
use poincare_linf::supnorm::{bernstein_bound, bernstein_coefficients, sup_norm, sup_norm_with};
use poincare_linf::{Cube, PolyForm, Polynomial};

fn main() -> poincare_linf::Result<()> {
    // 4x(1 - x) peaks at 1 in the middle of [0, 1], where no corner sees it.
    let x = Polynomial::var(1, 0);
    let p = (&x * &(&Polynomial::one(1) - &x)).scale(&int(4));
    let unit = Cube::unit(1);
    let coeffs: Vec<String> = bernstein_coefficients(&p, &unit).iter().map(format).collect();
    println!("Bernstein coefficients of {p}: {coeffs:?}");
    for level in 0..5 {
        println!("  subdivision {level}: upper bound {}", format(&bernstein_bound(&p, &unit, level)));
    }
    let b = sup_norm(&PolyForm::function(p), &unit, 5)?;
    println!("  sampled lower bound {} at {:?}", format(&b.lower), b.witness.iter().map(format).collect::<Vec<_>>());

    // Multilinear coefficients: the grid contains the corners, so the enclosure is exact.
    let x = Polynomial::var(2, 0);
    let y = Polynomial::var(2, 1);
    let w = basis(2, &[1], int(1)).mul_function(&(&(&x * &y) - &x.scale(&rat(1, 3))));
    let cube = Cube::new(vec![int(-1), int(0)], vec![rat(1, 2), int(2)])?;
    let b = sup_norm(&w, &cube, 2)?;
    println!("|{w}| on [-1, 1/2] x [0, 2]: [{}, {}] tight = {}", format(&b.lower), format(&b.upper), b.is_tight());

    let q = basis(2, &[0], int(1)).mul_function(&(&(&(&x * &x) * &y) - &y));
    for level in [0, 2, 4] {
        let b = sup_norm_with(&q, &Cube::unit(2), 5, level)?;
        println!("|{q}| subdivision {level}: [{}, {}]", format(&b.lower), format(&b.upper));
    }
    Ok(())
}
