//! Writes sample inputs for the command-line tool into a directory.
//!
//! cargo run --example json_files -- inputs/
//! poincare-linf primitive inputs/area.json --cert inputs/cert.json
//! poincare-linf flat-check inputs/sign_dy.json --nprime 5
//! poincare-linf mollify-solve inputs/sign_dx.json --radii geometric:0.05:0.5

use std::path::PathBuf;

use poincare_linf::cli::write_json;
use poincare_linf::flat::{sample, GridForm};
use poincare_linf::form::{basis, MultiIndex, PolyFormJson};
use poincare_linf::rational::int;
use poincare_linf::{Cube, Polynomial};

fn sign_form(dim: usize, axis: usize, res: usize) -> poincare_linf::Result<GridForm> {
    GridForm::from_fn(1, vec![0.0; dim], vec![1.0; dim], res, &[MultiIndex::single(axis)], |_, x| {
        if x[0] < 0.5 {
            -1.0
        } else {
            1.0
        }
    })
}

fn main() -> poincare_linf::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "inputs".into()));
    std::fs::create_dir_all(&dir)?;
    let x_dy = basis(2, &[1], int(1)).mul_function(&Polynomial::var(2, 0));
    let files: Vec<(&str, serde_json::Value)> = vec![
        ("x_dy.json", serde_json::to_value(PolyFormJson::from(&x_dy))?),
        ("area.json", serde_json::to_value(PolyFormJson::from(&basis(2, &[0, 1], int(1))))?),
        ("x_dy_grid.json", serde_json::to_value(sample(&x_dy, &Cube::unit(2), 128)?.to_json())?),
        ("sign_dy.json", serde_json::to_value(sign_form(2, 1, 128)?.to_json())?),
        ("sign_dx.json", serde_json::to_value(sign_form(1, 0, 1024)?.to_json())?),
    ];
    for (name, value) in files {
        let path = dir.join(name);
        write_json(Some(&path), &value)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
