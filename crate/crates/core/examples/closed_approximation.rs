//! Replace a form by a nearby closed one, with a certificate for the distance.

use poincare_linf::form::basis;
use poincare_linf::poincare::{closed_approx, closed_approx_with, constant, PoincareOptions, TauRule};
use poincare_linf::rational::{format, int};
use poincare_linf::{Cube, Polynomial};

fn main() -> poincare_linf::Result<()> {
    let x = Polynomial::var(2, 0);
    let y = Polynomial::var(2, 1);
    let cube = Cube::unit(2);

    let w = basis(2, &[1], int(1)).mul_function(&x);
    let c = closed_approx(&w, &cube)?;
    println!("w  = {w}\nw' = {}\ndw' = {}", c.wprime, c.wprime.d());
    println!("certificate: {}", c.certificate);
    for level in &c.trace.levels {
        println!(
            "  n = {} k = {} tau = {} C = {}",
            level.dim,
            level.degree,
            level.tau.as_ref().map_or("-".into(), format),
            format(&level.constant)
        );
    }

    println!("constants C(n, k):");
    for n in 1..=4 {
        let row: Vec<String> = (0..=n).map(|k| format(&constant(n, k))).collect();
        println!("  n = {n}: {}", row.join(" "));
    }

    // Off-center structure: scanning base points can shrink the defect.
    let w = basis(2, &[1], int(1)).mul_function(&(&(&x * &x) * &(&y * &y)));
    let mid = closed_approx(&w, &cube)?;
    let opts = PoincareOptions { tau: TauRule::Scan { candidates: 8 }, ..PoincareOptions::default() };
    let scan = closed_approx_with(&w, &cube, &opts)?;
    println!(
        "defect bound for {w}: midpoint {} scan {}",
        format(&mid.certificate.lhs().upper),
        format(&scan.certificate.lhs().upper)
    );
    Ok(())
}
