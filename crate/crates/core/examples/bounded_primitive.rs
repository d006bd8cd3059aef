//! Primitives with sup-norm control, compared with the classical homotopy.

use poincare_linf::poincare::{bounded_primitive, constant, standard_primitive, verify_certificate};
use poincare_linf::random::{random_closed_form, RandomFormParams};
use poincare_linf::rational::{format, rat};
use poincare_linf::supnorm::sup_norm;
use poincare_linf::Cube;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> poincare_linf::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let params = RandomFormParams::default();
    println!("{:>2} {:>2} {:>12} {:>12} {:>12} {:>4}", "n", "k", "|w|", "|theta1|", "|theta|", "C");
    for (n, k) in [(2, 1), (2, 2), (3, 1), (3, 2), (3, 3), (4, 2)] {
        let w = random_closed_form(&mut rng, n, k, &params);
        let cube = Cube::unit(n);
        let p = bounded_primitive(&w, &cube)?;
        assert_eq!(p.theta.d(), w);
        let classical = sup_norm(&standard_primitive(&w, &cube)?, &cube, 3)?;
        println!(
            "{n:>2} {k:>2} {:>12.4} {:>12.4} {:>12.4} {:>4}  {}",
            poincare_linf::rational::to_f64(&p.certificate.norm_input.upper),
            poincare_linf::rational::to_f64(&classical.upper),
            poincare_linf::rational::to_f64(&p.certificate.norm_output.upper),
            format(&constant(n, k - 1)),
            if verify_certificate(&p.certificate).verified { "verified" } else { "NOT verified" }
        );
    }

    // On a longer box the constant scales with the longest edge.
    let cube = Cube::new(vec![rat(0, 1); 2], vec![rat(3, 1), rat(1, 2)])?;
    let w = poincare_linf::form::basis(2, &[0, 1], rat(1, 1));
    let p = bounded_primitive(&w, &cube)?;
    println!("on [0,3] x [0,1/2]: theta = {}, {}", p.theta, p.certificate);
    Ok(())
}
