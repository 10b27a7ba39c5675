//! Small logarithmic stability sweep: `v₂ = v₁ + t·b` against `‖Φ₂ − Φ₁‖`.

use cgo_stab::harness::{run_stability_sweep, Config, NormVariant};

fn main() -> cgo_stab::Result<()> {
    let mut config = Config::default_config();
    config.set("grid.n_radial", "24")?;
    config.set("grid.n_angular", "48")?;
    config.set("sweep.t_count", "5")?;
    let report = run_stability_sweep(&config)?;
    println!("gamma {:.4e}, constants {:?}", report.gamma, report.constants);
    for norm in [NormVariant::Inf, NormVariant::One] {
        for r in report.rows_for(norm) {
            println!(
                "{:>3} t = {:.3e}  eps = {:.3e}  sup_err = {:.3e}  bound = {:.3e}  {}",
                norm.name(),
                r.t,
                r.eps,
                r.sup_err,
                r.bound_value,
                if r.passed { "ok" } else { "FAIL" }
            );
        }
    }
    Ok(())
}
