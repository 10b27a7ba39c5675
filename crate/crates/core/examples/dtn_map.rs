//! Dirichlet-to-Neumann map of a bump potential, checked on a constant potential.

use cgo_stab::forward::{dtn_map, make_bump, read_dtn_cache, write_dtn_cache, ForwardSolver, Potential};
use cgo_stab::DiskGrid;
use num_complex::Complex64;
use std::sync::Arc;

fn mode(grid: &DiskGrid, n: i32) -> Vec<Complex64> {
    (0..grid.n_angular()).map(|j| Complex64::from_polar(1.0, n as f64 * grid.angle(j))).collect()
}

fn main() -> cgo_stab::Result<()> {
    let grid = Arc::new(DiskGrid::new(1.0, 64, 64)?);

    // for v = c the modes e^{inθ} are eigenvectors, eigenvalue √c I_n'(√c)/I_n(√c)
    let dtn = dtn_map(&Potential::constant(&grid, 4.0))?;
    for n in 0..4 {
        let f = mode(&grid, n);
        println!("v = 4, mode {n}: eigenvalue {:.8}", (dtn.apply(&f)[0] / f[0]).re);
    }

    let v = make_bump(&grid, Complex64::new(0.2, -0.1), 0.5, 10.0, 3)?;
    let solver = ForwardSolver::new(&v)?;
    println!("condition estimate {:.3e}", solver.condition());
    let phi = solver.dtn_map()?;
    println!("max column residual {:.3e}, asymmetry {:.3e}", phi.max_residual, phi.asymmetry());

    let eps = phi.difference(&dtn_map(&Potential::zero(&grid))?)?;
    println!("||Phi_v - Phi_0||: inf {:.6e}, weighted kernel {:.6e}", eps.op_norm_inf(), eps.norm1());

    let dir = std::env::temp_dir().join("cgo-stab-example");
    std::fs::create_dir_all(&dir)?;
    write_dtn_cache(&phi, &dir.join("bump"))?;
    let back = read_dtn_cache(&dir.join("bump"))?;
    println!("cached kernel identical: {}", back.kernel() == phi.kernel());
    Ok(())
}
