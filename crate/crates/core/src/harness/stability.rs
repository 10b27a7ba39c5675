//! Logarithmic stability sweep: `v₂ = v₁ + t·b` against the size of `Φ₂ − Φ₁`.

use num_complex::Complex64;
use serde::Serialize;

use super::{grid_cells, lemmas::max_resolved_lambda, Cell, Check, Config, Report, Table};
use crate::cgo::CgoParams;
use crate::error::{Error, Result};
use crate::fields::GridFunction;
use crate::forward::{self, DtnMatrix};
use crate::reconstruct::phase_budget;

/// Which operator norm of `Φ₂ − Φ₁` plays the role of `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NormVariant {
    /// `L^∞ → L^∞` norm, bound `C (log(3 + ε⁻¹))^{−1/2} log(3 log(3 + ε⁻¹))`.
    Inf,
    /// Log-weighted kernel norm, bound `C (log(3 + ε⁻¹))^{−α}`.
    One,
}

impl NormVariant {
    pub fn name(self) -> &'static str {
        match self {
            Self::Inf => "inf",
            Self::One => "one",
        }
    }

    /// Shape of the bound without its constant.
    pub fn shape(self, eps: f64, alpha: f64) -> f64 {
        let l = (3.0 + 1.0 / eps).ln();
        match self {
            Self::Inf => l.powf(-0.5) * (3.0 * l).ln(),
            Self::One => l.powf(-alpha),
        }
    }

    fn eps(self, diff: &DtnMatrix) -> f64 {
        match self {
            Self::Inf => diff.op_norm_inf(),
            Self::One => diff.norm1(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityRow {
    pub norm: NormVariant,
    pub t: f64,
    pub eps: f64,
    /// `‖v₂ − v₁‖_∞ = t ‖b‖_∞`, exact.
    pub sup_err: f64,
    /// `γ log(3 + ε⁻¹)` clipped to `[1, λ_max]`.
    pub lambda_used: f64,
    pub shape: f64,
    pub bound_value: f64,
    pub passed: bool,
    /// Largest DtN column residual of the perturbed solve.
    pub dtn_residual: f64,
    pub need_radial: usize,
    pub need_angular: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub rows: Vec<StabilityRow>,
    pub gamma: f64,
    pub alpha: f64,
    /// Largest `|λ|` the grid resolves over the whole disk.
    pub lambda_max: f64,
    /// Frozen constants, one per norm variant, fitted at the largest `ε`.
    pub constants: Vec<(NormVariant, f64)>,
    /// `(t, reason)` for rows left out of the table.
    pub excluded: Vec<(f64, String)>,
    pub grid: String,
    pub potentials: (String, String),
}

impl StabilityReport {
    pub fn rows_for(&self, norm: NormVariant) -> impl Iterator<Item = &StabilityRow> {
        self.rows.iter().filter(move |r| r.norm == norm)
    }

    /// `ε` strictly increasing in `t` for the given variant.
    pub fn monotone(&self, norm: NormVariant) -> bool {
        let eps: Vec<f64> = self.rows_for(norm).map(|r| r.eps).collect();
        eps.windows(2).all(|w| w[0] < w[1])
    }

    pub fn to_report(&self, grid: &crate::geometry::DiskGrid) -> Report {
        let mut report = Report::new("stability");
        let mut table = Table::new(
            "stability",
            &[
                "norm", "t", "eps", "sup_err", "lambda_used", "shape", "bound", "passed", "radius",
                "n_radial", "n_angular", "dtn_residual", "need_radial", "need_angular",
            ],
        );
        for r in &self.rows {
            let mut row: Vec<Cell> = vec![
                r.norm.name().into(),
                r.t.into(),
                r.eps.into(),
                r.sup_err.into(),
                r.lambda_used.into(),
                r.shape.into(),
                r.bound_value.into(),
                r.passed.into(),
            ];
            row.extend(grid_cells(grid));
            row.extend([r.dtn_residual.into(), r.need_radial.into(), r.need_angular.into()]);
            table.push(row);
        }
        report.tables.push(table);
        for &(norm, c) in &self.constants {
            let rows: Vec<&StabilityRow> = self.rows_for(norm).collect();
            let failed = rows.iter().filter(|r| !r.passed).count();
            let worst = rows.iter().map(|r| r.sup_err / r.bound_value).fold(0.0, f64::max);
            report.checks.push(Check::new(
                format!("stability.{}.bound", norm.name()),
                failed == 0 && !rows.is_empty(),
                worst,
                1.0,
                format!("max sup_err/bound over {} rows, C = {c:.6e} frozen at the largest eps", rows.len()),
            ));
            report.checks.push(Check::new(
                format!("stability.{}.monotone", norm.name()),
                self.monotone(norm),
                rows.len() as f64,
                rows.len() as f64,
                "eps strictly increasing in t",
            ));
        }
        report.meta("gamma", self.gamma);
        report.meta("alpha", self.alpha);
        report.meta("lambda_max", self.lambda_max);
        report.meta(
            "constants",
            self.constants.iter().map(|(n, c)| (n.name(), *c)).collect::<std::collections::BTreeMap<_, _>>(),
        );
        report.meta("excluded", &self.excluded);
        report.meta("grid", &self.grid);
        report.meta("potentials", &self.potentials);
        report
    }
}

/// Geometric grid `t_min … t_max` with `count` points.
fn t_grid(t_min: f64, t_max: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![t_max];
    }
    let ratio = (t_max / t_min).ln() / (count - 1) as f64;
    let mut t: Vec<f64> = (0..count).map(|k| t_min * (ratio * k as f64).exp()).collect();
    t[count - 1] = t_max;
    t
}

/// Forward-solves `v₁` and every `v₁ + t·b`, measures `ε = ‖Φ₂ − Φ₁‖` and tests
/// `‖v₂ − v₁‖_∞ ≤ C·shape(ε)` with `C` frozen at the largest `ε`.
pub fn run_stability_sweep(config: &Config) -> Result<StabilityReport> {
    let grid = config.grid()?;
    let v1_spec = config.potential("sweep.v1")?;
    let b_spec = config.potential("sweep.bump2")?;
    let b_sup = b_spec.exact_sup().ok_or_else(|| Error::Config {
        line: 0,
        message: "`sweep.bump2` must be a single bump so that sup |v2 - v1| is exact".into(),
    })?;
    let (t_min, t_max) = (config.f64("sweep.t_min")?, config.f64("sweep.t_max")?);
    let count = config.usize("sweep.t_count")?;
    if !(t_min > 0.0 && t_max >= t_min && count >= 1) {
        return Err(Error::Config { line: 0, message: "need 0 < sweep.t_min <= sweep.t_max and t_count >= 1".into() });
    }
    let gamma = config.gamma()?;
    let alpha = config.f64("sweep.alpha")?;
    if !(alpha > 0.0 && alpha < 0.2) {
        return Err(Error::Config { line: 0, message: "`sweep.alpha` must lie in (0, 1/5)".into() });
    }
    let norms = match config.string("sweep.norm")?.as_str() {
        "inf" => vec![NormVariant::Inf],
        "one" => vec![NormVariant::One],
        _ => vec![NormVariant::Inf, NormVariant::One],
    };
    let z0 = config.complex("sweep.z0")?;
    let lambda_max = max_resolved_lambda(&grid, z0);

    let v1 = v1_spec.build(&grid)?;
    let b = b_spec.build(&grid)?;
    let dtn1 = forward::dtn_map(&v1)?;

    // t = 0 gives ε = 0, where log(3 + ε⁻¹) is undefined
    let mut excluded = vec![(0.0, "t = 0: eps = 0, log(3 + 1/eps) undefined".to_string())];
    let mut measured = vec![];
    for t in t_grid(t_min, t_max, count) {
        let v2 = v1.plus(t, &b)?;
        let dtn2 = match forward::dtn_map(&v2) {
            Ok(d) => d,
            Err(e) => {
                log::warn!("forward solve failed at t = {t}: {e}");
                excluded.push((t, format!("forward solve failed: {e}")));
                continue;
            }
        };
        let diff = dtn2.difference(&dtn1)?;
        let eps: Vec<f64> = norms.iter().map(|n| n.eps(&diff)).collect();
        measured.push((t, eps, dtn2.max_residual));
    }

    let unit = GridFunction::constant(&grid, Complex64::new(1.0, 0.0));
    let mut rows = vec![];
    let mut constants = vec![];
    for (i, &norm) in norms.iter().enumerate() {
        let usable: Vec<_> = measured.iter().filter(|m| m.1[i] > 0.0).collect();
        for m in measured.iter().filter(|m| m.1[i] <= 0.0) {
            excluded.push((m.0, format!("{} norm: eps = 0", norm.name())));
        }
        let Some(anchor) = usable.iter().max_by(|a, b| a.1[i].total_cmp(&b.1[i])) else {
            continue;
        };
        let c = anchor.0 * b_sup / norm.shape(anchor.1[i], alpha);
        constants.push((norm, c));
        for &&(t, ref eps, residual) in &usable {
            let eps = eps[i];
            let sup_err = t * b_sup;
            let shape = norm.shape(eps, alpha);
            let bound_value = c * shape;
            let lambda_used = (gamma * (3.0 + 1.0 / eps).ln()).clamp(1.0, lambda_max.max(1.0));
            let budget = phase_budget(&unit, &CgoParams::new(z0, Complex64::new(lambda_used, 0.0))?);
            rows.push(StabilityRow {
                norm,
                t,
                eps,
                sup_err,
                lambda_used,
                shape,
                bound_value,
                // the anchor row meets its own bound up to rounding in C
                passed: sup_err <= bound_value * (1.0 + 1e-12),
                dtn_residual: residual,
                need_radial: budget.need_radial,
                need_angular: budget.need_angular,
            });
        }
    }
    rows.sort_by(|a, b| (a.norm.name(), a.t).partial_cmp(&(b.norm.name(), b.t)).expect("finite t"));
    Ok(StabilityReport {
        rows,
        gamma,
        alpha,
        lambda_max,
        constants,
        excluded,
        grid: grid.label(),
        potentials: (config.string("sweep.v1")?, config.string("sweep.bump2")?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_grid_is_geometric() {
        let t = t_grid(1e-3, 1e-1, 8);
        assert_eq!(t.len(), 8);
        assert!(t[0] == 1e-3 && t[7] == 1e-1);
        let r = t[1] / t[0];
        assert!(t.windows(2).all(|w| (w[1] / w[0] - r).abs() < 1e-12));
    }

    #[test]
    fn shapes_decrease_as_eps_shrinks() {
        for n in [NormVariant::Inf, NormVariant::One] {
            let s: Vec<f64> = [1e-2, 1e-4, 1e-8].iter().map(|&e| n.shape(e, 0.1)).collect();
            assert!(s[0] > s[1] && s[1] > s[2], "{n:?} {s:?}");
        }
    }

    #[test]
    fn small_sweep_passes() {
        let mut c = Config::default_config();
        c.set("grid.n_radial", "16").unwrap();
        c.set("grid.n_angular", "32").unwrap();
        c.set("sweep.t_count", "3").unwrap();
        let r = run_stability_sweep(&c).unwrap();
        assert_eq!(r.rows.len(), 6);
        assert!(r.rows.iter().all(|row| row.passed));
        assert!(r.monotone(NormVariant::Inf) && r.monotone(NormVariant::One));
        assert_eq!(r.excluded[0].0, 0.0);
        assert!(r.rows.iter().all(|row| row.lambda_used >= 1.0));
        assert!(r.to_report(&c.grid().unwrap()).passed());
    }
}
