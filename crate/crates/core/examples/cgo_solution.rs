//! Neumann series for `μ = 1 + g(vμ)` and the CGO solution `ψ = e^{λ(z−z₀)²} μ`.

use cgo_stab::cgo::{mu_equation_residual, psi, psi_residual, solve_mu, CgoParams};
use cgo_stab::forward::make_bump;
use cgo_stab::DiskGrid;
use num_complex::Complex64;
use std::sync::Arc;

fn main() -> cgo_stab::Result<()> {
    let grid = Arc::new(DiskGrid::new(1.0, 64, 256)?);
    let v = make_bump(&grid, Complex64::new(0.0, 0.0), 0.5, 1.0, 3)?;
    for lam in [5.0, 10.0, 20.0] {
        let p = CgoParams::new(Complex64::new(0.1, 0.05), Complex64::new(lam, 0.0))?;
        let sol = solve_mu(&v, &p, 1e-10, 64, false)?;
        println!(
            "|lambda| = {lam:>4}: {} terms, contraction {:.3e}, |mu - 1| = {:.3e}",
            sol.iterations,
            sol.contraction,
            sol.mu.sub(&sol.terms[0])?.sup_norm()
        );
        for (k, n) in sol.term_norms.iter().take(4).enumerate() {
            println!("    term {k}: {n:.3e}");
        }
        println!("    mu equation residual {:.3e}", mu_equation_residual(&sol, &v)?);
        let psi = psi(&sol);
        println!("    max |psi| {:.3e}, psi residual {:.3e}", psi.sup_norm(), psi_residual(&sol, &v)?);
    }
    Ok(())
}
