//! Primitive of a discontinuous closed form by mollification, polynomial
//! fitting and certified primitives of the increments.

use poincare_linf::flat::{iterative_primitive, sample, GridForm, IterativeOptions};
use poincare_linf::form::MultiIndex;
use poincare_linf::{Cube, PolyForm, Polynomial};

fn main() -> poincare_linf::Result<()> {
    // sign(x - 1/2) dx = d|x - 1/2|
    let w = GridForm::from_fn(1, vec![0.0], vec![1.0], 1024, &[MultiIndex::single(0)], |_, x| {
        if x[0] < 0.5 {
            -1.0
        } else {
            1.0
        }
    })?;
    let out = iterative_primitive(&w, &IterativeOptions { stages: 5, ..IterativeOptions::default() })?;
    println!("common cube {:?}..{:?}", out.history.common_lo, out.history.common_hi);
    for s in &out.history.stages {
        println!(
            "stage {}: r = {:.4} degree {:>3} residual {:.4} interior {:.4e} fit {:.2e}",
            s.stage, s.radius, s.degree, s.residual, s.interior_residual, s.fit_residual
        );
    }
    let theta = out.theta.coefficient(&MultiIndex::empty()).expect("0-form");
    for x in [0.1, 0.3, 0.45, 0.5, 0.55, 0.7, 0.9] {
        let c = ((x - out.theta.lo()[0]) / out.theta.cell_width(0)) as usize;
        println!("  theta({x:.2}) = {:+.4}   |x - 1/2| = {:.4}", theta[c.min(theta.len() - 1)], (x - 0.5f64).abs());
    }

    // A smooth input: the residual falls well below 2^-s.
    let x = Polynomial::var(2, 0);
    let y = Polynomial::var(2, 1);
    let eta = PolyForm::function(&(&(&x * &x) * &y) - &(&y * &y));
    let g = sample(&eta.d(), &Cube::unit(2), 128)?;
    let out = iterative_primitive(&g, &IterativeOptions { stages: 4, ..IterativeOptions::default() })?;
    let norm = g.max_abs();
    let rel: Vec<String> = out.history.residuals().iter().map(|r| format!("{:.2e}", r / norm)).collect();
    println!("smooth d(x^2 y - y^2): relative residuals {}", rel.join(" "));
    Ok(())
}
