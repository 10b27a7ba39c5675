//! Solid Cauchy transform `T` and the right inverse property `∂_z̄ T u = u`.

use cgo_stab::cgo::{cauchy_t, cauchy_t_direct};
use cgo_stab::fields::dbar;
use cgo_stab::forward::make_bump;
use cgo_stab::{DiskGrid, GridFunction};
use num_complex::Complex64;
use std::sync::Arc;

fn main() -> cgo_stab::Result<()> {
    let grid = Arc::new(DiskGrid::default_unit());
    let one = GridFunction::constant(&grid, Complex64::new(1.0, 0.0));
    let t1 = cauchy_t(&one)?;
    let zbar = GridFunction::from_fn(&grid, |z| z.conj());
    println!("|T1 - zbar| = {:.3e}", t1.sub(&zbar)?.sup_norm());

    let u = make_bump(&grid, Complex64::new(0.2, 0.1), 0.4, 1.0, 3)?;
    let tu = cauchy_t(u.field())?;
    println!("|dbar T u - u| = {:.3e}", dbar(&tu)?.sub(u.field())?.sup_norm());

    // the plain midpoint sum keeps the singular cell error
    for n in [16, 32, 64] {
        let g = Arc::new(DiskGrid::new(1.0, n, 4 * n)?);
        let one = GridFunction::constant(&g, Complex64::new(1.0, 0.0));
        let zbar = GridFunction::from_fn(&g, |z| z.conj());
        let plain = cauchy_t_direct(&one)?.sub(&zbar)?.interior_sup_norm();
        let corrected = cauchy_t(&one)?.sub(&zbar)?.interior_sup_norm();
        println!("{}: |T1 - zbar| plain {plain:.3e}, corrected {corrected:.3e}", g.label());
    }
    Ok(())
}
