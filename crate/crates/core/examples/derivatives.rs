//! Grid functions, Wirtinger derivatives and the norms used by the estimates.

use cgo_stab::fields::{c1zbar_norm, dbar, dz, lp_norm};
use cgo_stab::{DiskGrid, GridFunction};
use std::sync::Arc;

fn main() -> cgo_stab::Result<()> {
    let grid = Arc::new(DiskGrid::new(1.0, 64, 128)?);
    // u = z² z̄ + e^z: ∂u/∂z = 2 z z̄ + e^z, ∂u/∂z̄ = z²
    let u = GridFunction::from_fn(&grid, |z| z * z * z.conj() + z.exp());
    let du = dz(&u)?;
    let dbu = dbar(&u)?;
    let ez = GridFunction::from_fn(&grid, |z| 2.0 * z * z.conj() + z.exp());
    let ebz = GridFunction::from_fn(&grid, |z| z * z);
    println!("max |dz u - exact|   = {:.3e}", du.sub(&ez)?.sup_norm());
    println!("max |dbar u - exact| = {:.3e}", dbu.sub(&ebz)?.sup_norm());

    println!("||u||_C1zbar = {:.6}", c1zbar_norm(&u)?);
    for p in [2.0, 4.0, 8.0] {
        println!("||u||_L{p} = {:.6}", lp_norm(&u, p)?);
    }
    println!("int u dA = {:.6}", u.integrate());
    Ok(())
}
