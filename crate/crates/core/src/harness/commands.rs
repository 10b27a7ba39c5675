//! Single-shot runs behind the `forward`, `cgo` and `reconstruct` subcommands.

use num_complex::Complex64;

use super::{grid_cells, Cell, Check, Config, Report, Table};
use crate::cgo::{self, CgoParams};
use crate::error::Result;
use crate::forward::{DtnMatrix, ForwardSolver, RESIDUAL_TOLERANCE};
use crate::reconstruct::{self, phase_budget};

/// Fourier modes whose Rayleigh quotients are tabulated by `forward`.
const FORWARD_MODES: usize = 8;
/// Upper bound on the relative `μ`-equation residual accepted by `cgo`.
pub const CGO_RESIDUAL_LIMIT: f64 = 0.1;

/// DtN map of `potential.v`; the table lists `⟨e_n, Φ e_n⟩/⟨e_n, e_n⟩` for `e_n = e^{inθ}`.
pub fn run_forward(config: &Config) -> Result<(Report, DtnMatrix)> {
    let grid = config.grid()?;
    let v = config.potential("potential.v")?.build(&grid)?;
    let solver = ForwardSolver::new(&v)?;
    let dtn = solver.dtn_map()?;
    let mut report = Report::new("forward");
    let mut table = Table::new("forward", &["mode", "rayleigh_re", "rayleigh_im", "radius", "n_radial", "n_angular"]);
    let w = grid.boundary_weights();
    for n in 0..=FORWARD_MODES.min(grid.n_angular() / 2) {
        let e: Vec<Complex64> = (0..grid.n_angular())
            .map(|j| Complex64::from_polar(1.0, n as f64 * grid.angle(j)))
            .collect();
        let phi = dtn.apply(&e);
        let num: Complex64 = e.iter().zip(&phi).zip(w).map(|((a, b), w)| a.conj() * b * w).sum();
        let den: f64 = e.iter().zip(w).map(|(a, w)| a.norm_sqr() * w).sum();
        let q = num / den;
        let mut row: Vec<Cell> = vec![n.into(), q.re.into(), q.im.into()];
        row.extend(grid_cells(&grid));
        table.push(row);
    }
    report.tables.push(table);
    report.checks.push(Check::new(
        "forward.residual",
        dtn.flagged_columns.is_empty(),
        dtn.max_residual,
        RESIDUAL_TOLERANCE,
        format!("{} DtN columns above the residual tolerance", dtn.flagged_columns.len()),
    ));
    report.meta("condition", solver.condition());
    report.meta("asymmetry", dtn.asymmetry());
    report.meta("max_residual", dtn.max_residual);
    report.meta("grid", grid.label());
    Ok((report, dtn))
}

/// Solves for `μ` at `cgo.z0`, `cgo.lambda` and tabulates the Neumann terms.
pub fn run_cgo(config: &Config) -> Result<Report> {
    let grid = config.grid()?;
    let v = config.potential("potential.v")?.build(&grid)?;
    let p = CgoParams::new(config.complex("cgo.z0")?, config.complex("cgo.lambda")?)?;
    let sol = cgo::solve_mu(&v, &p, config.f64("cgo.tol")?, config.usize("cgo.k_max")?, false)?;
    let residual = cgo::mu_equation_residual(&sol, &v)?;
    let budget = phase_budget(v.field(), &p);

    let mut report = Report::new("cgo");
    let mut table = Table::new(
        "cgo",
        &["k", "term_norm", "ratio", "radius", "n_radial", "n_angular", "need_radial", "need_angular"],
    );
    for (k, &norm) in sol.term_norms.iter().enumerate() {
        let ratio = if k > 0 && sol.term_norms[k - 1] > 0.0 { norm / sol.term_norms[k - 1] } else { f64::NAN };
        let mut row: Vec<Cell> = vec![k.into(), norm.into(), ratio.into()];
        row.extend(grid_cells(&grid));
        row.extend([budget.need_radial.into(), budget.need_angular.into()]);
        table.push(row);
    }
    report.tables.push(table);
    if !v.is_zero() {
        report.checks.push(Check::at_most(
            "cgo.equation_residual",
            residual,
            CGO_RESIDUAL_LIMIT,
            "sup |-4(dz + 2 lambda (z - z0)) dbar mu + v mu| / sup |v mu|",
        ));
    }
    report.meta("iterations", sol.iterations);
    report.meta("contraction", sol.contraction);
    report.meta("max_ratio", sol.max_ratio);
    report.meta("fixed_point_residual", sol.residual);
    report.meta("equation_residual", residual);
    report.meta("z0", (p.z0().re, p.z0().im));
    report.meta("lambda", (p.lambda().re, p.lambda().im));
    report.meta("grid", grid.label());
    Ok(report)
}

/// `(2/π)|λ| h⁽⁰⁾` at `reconstruct.z0` along the configured schedule.
pub fn run_reconstruct(config: &Config) -> Result<Report> {
    let grid = config.grid()?;
    let v = config.potential("potential.v")?.build(&grid)?;
    let z0 = config.complex("reconstruct.z0")?;
    let table = reconstruct::reconstruct_point(&v, z0, &config.schedule()?)?;
    let mut report = Report::new("reconstruct");
    let mut out = Table::new(
        "reconstruct",
        &[
            "abs_lambda", "lambda_re", "lambda_im", "estimate_re", "estimate_im", "error", "radius", "n_radial",
            "n_angular", "need_radial", "need_angular",
        ],
    );
    for r in &table.rows {
        let mut row: Vec<Cell> = vec![
            r.abs_lambda.into(),
            r.lambda.0.into(),
            r.lambda.1.into(),
            r.estimate.0.into(),
            r.estimate.1.into(),
            r.error.unwrap_or(f64::NAN).into(),
        ];
        row.extend(grid_cells(&grid));
        row.extend([r.budget.need_radial.into(), r.budget.need_angular.into()]);
        out.push(row);
    }
    report.tables.push(out);
    report.meta("z0", table.z0);
    report.meta("truth", table.truth);
    report.meta("truncated_at", table.truncated_at);
    report.meta("grid", grid.label());
    Ok(report)
}
