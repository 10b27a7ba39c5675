//! Polar grid on the disk and its quadrature weights.

use cgo_stab::DiskGrid;
use std::f64::consts::PI;

fn main() -> cgo_stab::Result<()> {
    let grid = DiskGrid::new(1.0, 32, 64)?;
    println!("{}: {} interior nodes, {} boundary nodes", grid.label(), grid.n_interior(), grid.n_boundary());

    let area: f64 = grid.area_weights().iter().sum();
    let length: f64 = grid.boundary_weights().iter().sum();
    println!("area   {area:.15}  (pi = {PI:.15})");
    println!("length {length:.15}  (2 pi = {:.15})", 2.0 * PI);

    // ∫ |z|² dA = π/2
    let second: f64 = grid.interior_nodes().iter().zip(grid.area_weights()).map(|(z, w)| z.norm_sqr() * w).sum();
    println!("int |z|^2 dA = {second:.15}, exact {:.15}", PI / 2.0);

    let z0 = num_complex::Complex64::new(0.3, 0.0);
    println!("max |z - z0| on the boundary for z0 = 0.3: {}", grid.max_boundary_distance(z0));
    Ok(())
}
