//! Exact polynomial forms: wedge products, the exterior derivative and pullbacks.

use poincare_linf::form::basis;
use poincare_linf::rational::{int, rat};
use poincare_linf::{PolyForm, Polynomial};

fn main() -> poincare_linf::Result<()> {
    let x = Polynomial::var(3, 0);
    let y = Polynomial::var(3, 1);
    let z = Polynomial::var(3, 2);

    // a = x y dz, b = z^2 dx - 3/2 dy
    let a = basis(3, &[2], int(1)).mul_function(&(&x * &y));
    let b = basis(3, &[0], int(1))
        .mul_function(&(&z * &z))
        .add(&basis(3, &[1], rat(-3, 2)))?;
    println!("a      = {a}");
    println!("b      = {b}");
    println!("a ^ b  = {}", a.wedge(&b)?);
    println!("da     = {}", a.d());
    println!("d(da)  = {} (zero: {})", a.d().d(), a.d().d().is_zero());

    // d(a ^ b) = da ^ b - a ^ db for a 1-form a
    let lhs = a.wedge(&b)?.d();
    let rhs = a.d().wedge(&b)?.sub(&a.wedge(&b.d())?)?;
    println!("Leibniz holds: {}", lhs == rhs);

    // Pull dx ^ dy back along (r, t) -> (r(1 - t^2), 2rt).
    let r = Polynomial::var(2, 0);
    let t = Polynomial::var(2, 1);
    let one = Polynomial::one(2);
    let phi = vec![&r * &(&one - &(&t * &t)), (&r * &t).scale(&int(2))];
    let area = basis(2, &[0, 1], int(1));
    println!("phi*(dx^dy) = {}", area.pullback(&phi)?);

    let w = PolyForm::function(&(&x * &x) * &z).d();
    println!("d(phi*w) = phi*(dw) on a 3 -> 3 map: {}", {
        let psi = vec![&x + &y, &y * &z, x.clone()];
        w.pullback(&psi)?.d() == w.d().pullback(&psi)?
    });
    Ok(())
}
