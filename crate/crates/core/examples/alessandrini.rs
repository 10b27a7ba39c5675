//! Volume and boundary sides of the Alessandrini identity for a pair of bumps.

use cgo_stab::cgo::CgoParams;
use cgo_stab::forward::{dtn_map, make_bump};
use cgo_stab::reconstruct::alessandrini_terms;
use cgo_stab::DiskGrid;
use num_complex::Complex64;
use std::sync::Arc;

fn main() -> cgo_stab::Result<()> {
    for (nr, na) in [(32, 128), (64, 256)] {
        let grid = Arc::new(DiskGrid::new(1.0, nr, na)?);
        let v1 = make_bump(&grid, Complex64::new(0.0, 0.0), 0.5, 1.0, 3)?;
        let v2 = v1.plus(1.0, &make_bump(&grid, Complex64::new(0.0, 0.0), 0.3, 1.0, 3)?)?;
        let (d1, d2) = (dtn_map(&v1)?, dtn_map(&v2)?);
        let p = CgoParams::new(Complex64::new(0.0, 0.0), Complex64::new(10.0, 0.0))?;
        let t = alessandrini_terms(&v1, &v2, &p, &d1, &d2)?;
        let split = t.i() - t.parts().iter().sum::<Complex64>();
        println!("{}: I = {:.6e}, J = {:.6e}, |I - J|/|I| = {:.3e}", grid.label(), t.i(), t.j(), t.relative_gap());
        println!("    I - (I1+I2+I3+I4) = {:.1e}, boundary scale {:.3e}", split.norm(), t.boundary_scale);
    }
    Ok(())
}
