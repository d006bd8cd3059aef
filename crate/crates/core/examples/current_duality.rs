//! Forms as currents: pairings against compactly supported test forms,
//! weak closedness and the locally-constant check for functions.

use poincare_linf::flat::pairing::{
    current_pairing, default_closedness_tolerance, l1_mass, locally_constant_check, weak_closedness_residual,
};
use poincare_linf::flat::{sample, GridForm};
use poincare_linf::form::{basis, MultiIndex};
use poincare_linf::random::{random_compact_form, RandomFormParams};
use poincare_linf::rational::int;
use poincare_linf::{Cube, Polynomial};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> poincare_linf::Result<()> {
    let cube = Cube::unit(2);
    let x = Polynomial::var(2, 0);
    let closed = sample(&basis(2, &[0], int(1)).mul_function(&(&x * &x)), &cube, 256)?;
    let not_closed = sample(&basis(2, &[1], int(1)).mul_function(&x), &cube, 256)?;
    let h = 1.0 / 256.0;

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (name, w) in [("x^2 dx", &closed), ("x dy", &not_closed)] {
        let mut worst: f64 = 0.0;
        for _ in 0..10 {
            let alpha = random_compact_form(&mut rng, &cube, 0, &RandomFormParams::default());
            let da = alpha.d();
            worst = worst.max(current_pairing(w, &da)?.abs() / (h * w.max_abs() * l1_mass(w, &da)));
        }
        println!(
            "{name}: max |<w, da>| / (h |w| |da|_1) = {worst:.3e}; weak residual {:.3e} (tolerance {:.1e})",
            weak_closedness_residual(w)?,
            default_closedness_tolerance(w)
        );
    }

    // Piecewise constant with a gap: locally constant on each component.
    let f = GridForm::from_fn(0, vec![0.0; 2], vec![1.0; 2], 64, &[MultiIndex::empty()], |_, p| {
        if p[0] + p[1] < 1.0 {
            2.0
        } else {
            -1.0
        }
    })?;
    let mask: Vec<bool> = (0..f.num_cells())
        .map(|c| {
            let p = f.cell_center(c);
            (p[0] + p[1] - 1.0).abs() > 0.05
        })
        .collect();
    let report = locally_constant_check(&f, Some(&mask), 1e-12)?;
    println!(
        "step function off the diagonal band: {} components, weakly closed {}, locally constant {}",
        report.components.len(),
        report.weakly_closed,
        report.locally_constant
    );
    Ok(())
}
