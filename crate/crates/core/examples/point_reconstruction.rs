//! Recovering `v(z₀)` from `(2/π)|λ| h⁽⁰⁾` along a growing `|λ|` schedule.

use cgo_stab::forward::make_bump;
use cgo_stab::reconstruct::reconstruct_point;
use cgo_stab::DiskGrid;
use num_complex::Complex64;
use std::sync::Arc;

fn main() -> cgo_stab::Result<()> {
    let grid = Arc::new(DiskGrid::new(1.0, 512, 512)?);
    let center = Complex64::new(0.1, 0.0);
    let v = make_bump(&grid, center, 0.4, 2.0, 3)?;
    let schedule: Vec<Complex64> = (0..8).map(|k| Complex64::new(10.0 * 2f64.powi(k), 0.0)).collect();
    let table = reconstruct_point(&v, center, &schedule)?;
    println!("truth {:?}", table.truth);
    for r in &table.rows {
        println!("|lambda| = {:>6}: estimate {:+.6} {:+.6}i, error {:.3e}", r.abs_lambda, r.estimate.0, r.estimate.1, r.error.unwrap());
    }
    if let Some(l) = table.truncated_at {
        println!("stopped at |lambda| = {l}: the grid no longer resolves the phase");
    }
    Ok(())
}
