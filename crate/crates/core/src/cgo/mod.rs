//! Complex geometrical optics solutions built on the quadratic phase `λ(z − z₀)²`.
//!
//! `g_{z₀,λ} = ¼ T T̄_{z₀,λ}`; μ solves `μ = 1 + g_{z₀,λ}(vμ)` by successive
//! approximation and `ψ = e^{λ(z−z₀)²} μ`.

mod cauchy;

pub use cauchy::{cauchy_t, cauchy_t_direct};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fields::{self, GridFunction};
use crate::forward::Potential;
use crate::geometry::DiskGrid;

pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_MAX_ITERATIONS: usize = 64;
/// Measured successive-term ratios at or above this abort the iteration.
pub const CONTRACTION_LIMIT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CgoParams {
    z0: (f64, f64),
    lambda: (f64, f64),
}

impl CgoParams {
    pub fn new(z0: Complex64, lambda: Complex64) -> Result<Self> {
        if !(z0.is_finite() && lambda.is_finite()) {
            return Err(Error::InvalidArgument("z0 and lambda must be finite".into()));
        }
        if lambda.norm() < 1.0 {
            return Err(Error::InvalidArgument(format!(
                "|lambda| must be >= 1, got {}",
                lambda.norm()
            )));
        }
        Ok(Self { z0: (z0.re, z0.im), lambda: (lambda.re, lambda.im) })
    }

    pub fn z0(&self) -> Complex64 {
        Complex64::new(self.z0.0, self.z0.1)
    }
    pub fn lambda(&self) -> Complex64 {
        Complex64::new(self.lambda.0, self.lambda.1)
    }
    pub fn abs_lambda(&self) -> f64 {
        self.lambda().norm()
    }

    /// Same `z₀`, `λ → −λ`.
    pub fn negated(&self) -> Self {
        Self { z0: self.z0, lambda: (-self.lambda.0, -self.lambda.1) }
    }

    /// `e_{λ,z₀}(z) = exp(λ(z−z₀)² − λ̄(z̄−z̄₀)²)`, unimodular by construction.
    pub fn phase(&self, z: Complex64) -> Complex64 {
        let s = z - self.z0();
        Complex64::from_polar(1.0, 2.0 * (self.lambda() * s * s).im)
    }

    /// `e^{λ(z−z₀)²}`.
    pub fn exp_factor(&self, z: Complex64) -> Complex64 {
        let s = z - self.z0();
        (self.lambda() * s * s).exp()
    }

    pub fn check_grid(&self, grid: &DiskGrid) -> Result<()> {
        if self.z0().norm() >= grid.radius() {
            return Err(Error::InvalidArgument(format!(
                "z0 = {} lies outside the disk of radius {}",
                self.z0(),
                grid.radius()
            )));
        }
        Ok(())
    }
}

/// `T̄_{z₀,λ}u(z) = −(e^{−λ(z−z₀)²+λ̄(z̄−z̄₀)²}/π) ∫_D e_{λ,z₀}(ζ) u(ζ)/(ζ̄ − z̄)`.
///
/// Boundary values are produced when `u` carries a boundary trace.
pub fn tbar(u: &GridFunction, p: &CgoParams) -> Result<GridFunction> {
    p.check_grid(u.grid())?;
    u.ensure_finite("tbar input")?;
    let g = u.grid().clone();
    let w = g.area_weights();
    let nodes = g.interior_nodes();
    let lam = p.lambda();
    let z0 = p.z0();

    let e_in: Vec<Complex64> = nodes.par_iter().map(|&z| p.phase(z)).collect();
    let f: Vec<Complex64> = u.values().iter().zip(&e_in).map(|(v, e)| v * e).collect();
    let q: Vec<Complex64> = f.iter().zip(w).map(|(f, w)| f.conj() * w).collect();
    let (s_in, s_out) = cauchy::ring_cauchy_sum(&g, &q, u.boundary().is_some());
    let sw = cauchy::weight_sums(&g);
    let uz = fields::dz(u)?;
    let uzb = fields::dbar(u)?;

    let vals = u.values();
    let values: Vec<Complex64> = (0..vals.len())
        .into_par_iter()
        .map(|k| {
            let s = nodes[k] - z0;
            let e = e_in[k];
            let f_z = e * (uz.values()[k] + 2.0 * lam * s * vals[k]);
            let f_zb = e * (uzb.values()[k] - 2.0 * lam.conj() * s.conj() * vals[k]);
            let local = s_in[k].conj() - f[k] * sw.interior[k].conj()
                + f_z * sw.defect[k].conj()
                + f_zb * w[k];
            -e.conj() * local / PI + vals[k] * nodes[k]
        })
        .collect();
    let boundary = match (u.boundary(), s_out, uz.boundary()) {
        (Some(ub), Some(s_out), Some(ub_z)) => Some(
            g.boundary_nodes()
                .iter()
                .enumerate()
                .map(|(j, &z)| {
                    let s = z - z0;
                    let e = p.phase(z);
                    let fz = e * ub[j];
                    let f_z = e * (ub_z[j] + 2.0 * lam * s * ub[j]);
                    let local = s_out[j].conj() - fz * sw.boundary[j].conj()
                        + f_z * sw.boundary_defect[j].conj();
                    -e.conj() * local / PI + ub[j] * z
                })
                .collect(),
        ),
        _ => None,
    };
    GridFunction::new(g, values, boundary)
}

/// Variant with the complex-conjugated kernel: `conj(T̄(conj u))`.
pub fn tbar_conj(u: &GridFunction, p: &CgoParams) -> Result<GridFunction> {
    Ok(tbar(&u.conj(), p)?.conj())
}

/// `g_{z₀,λ}u = ¼ T T̄_{z₀,λ} u` together with `∂_z̄ g_{z₀,λ}u = ¼ T̄_{z₀,λ}u`.
pub fn g_apply_parts(u: &GridFunction, p: &CgoParams) -> Result<(GridFunction, GridFunction)> {
    let tb = tbar(u, p)?;
    let gu = cauchy_t(&tb)?.scale(Complex64::new(0.25, 0.0));
    Ok((gu, tb.scale(Complex64::new(0.25, 0.0))))
}

pub fn g_apply(u: &GridFunction, p: &CgoParams) -> Result<GridFunction> {
    Ok(g_apply_parts(u, p)?.0)
}

/// Applies the operator with the conjugated kernel `conj(g_{z₀}(z, ζ, λ))`.
pub fn g_apply_conj(u: &GridFunction, p: &CgoParams) -> Result<GridFunction> {
    Ok(g_apply(&u.conj(), p)?.conj())
}

/// `g_{z₀}(z, ζ, λ)` by direct quadrature over the grid, with both poles of the
/// integrand subtracted in closed form. Spot-check route; O(N) per call.
pub fn g_kernel(grid: &DiskGrid, z: Complex64, zeta: Complex64, p: &CgoParams) -> Result<Complex64> {
    p.check_grid(grid)?;
    let tol = 1e-12 * grid.radius();
    if (z - zeta).norm() <= tol {
        return Err(Error::InvalidArgument("g_kernel needs z != zeta".into()));
    }
    if z.norm() > grid.radius() + tol || zeta.norm() > grid.radius() + tol {
        return Err(Error::InvalidArgument("g_kernel arguments must lie in the closed disk".into()));
    }
    let inv_e = |eta: Complex64| p.phase(eta).conj();
    let (ez, ezeta) = (inv_e(z), inv_e(zeta));
    let a = ez / (z.conj() - zeta.conj());
    let b = ezeta / (z - zeta);
    let sum: Complex64 = grid
        .interior_nodes()
        .iter()
        .zip(grid.area_weights())
        .filter(|(eta, _)| (**eta - z).norm() > tol && (**eta - zeta).norm() > tol)
        .map(|(&eta, &w)| {
            let full = inv_e(eta) / ((z - eta) * (eta.conj() - zeta.conj()));
            (full - a / (z - eta) - b / (eta.conj() - zeta.conj())) * w
        })
        .sum();
    // ∫_D dA/(z − η) = π z̄ and ∫_D dA/(η̄ − ζ̄) = −π ζ
    let total = sum + a * PI * z.conj() - b * PI * zeta;
    Ok(p.phase(zeta) * total / (4.0 * PI * PI))
}

/// `G_{z₀}(z, ζ, λ) = e^{λ(z−z₀)²} g_{z₀}(z, ζ, λ) e^{−λ(ζ−z₀)²}`.
pub fn green_kernel(grid: &DiskGrid, z: Complex64, zeta: Complex64, p: &CgoParams) -> Result<Complex64> {
    Ok(p.exp_factor(z) * g_kernel(grid, z, zeta, p)? / p.exp_factor(zeta))
}

#[derive(Debug, Clone)]
pub struct CgoSolution {
    pub params: CgoParams,
    pub mu: GridFunction,
    /// Neumann terms `(g v)^j 1`, `j = 0..=iterations`.
    pub terms: Vec<GridFunction>,
    /// `C¹_z̄` norms of the terms (the `∂_z̄` part uses `∂_z̄ g u = ¼ T̄ u`; the
    /// conjugated variant falls back to finite differences).
    pub term_norms: Vec<f64>,
    pub iterations: usize,
    /// `‖(g v)² 1‖ / ‖(g v) 1‖`.
    pub contraction: f64,
    /// Largest ratio of successive term norms seen.
    pub max_ratio: f64,
    /// `‖μ − 1 − g(vμ)‖_C`.
    pub residual: f64,
    pub conjugated: bool,
}

impl CgoSolution {
    /// `μ^{(k)} = Σ_{j ≤ k} (g v)^j 1`.
    pub fn partial_sum(&self, k: usize) -> GridFunction {
        let k = k.min(self.terms.len() - 1);
        let mut acc = self.terms[0].clone();
        for t in &self.terms[1..=k] {
            acc = acc.add(t).expect("terms share a grid");
        }
        acc
    }
}

fn apply_kernel(
    v: &GridFunction,
    u: &GridFunction,
    p: &CgoParams,
    conjugated: bool,
) -> Result<(GridFunction, f64)> {
    let w = v.mul(u)?;
    if conjugated {
        let gu = g_apply_conj(&w, p)?;
        let c1 = fields::c1zbar_norm(&gu)?;
        Ok((gu, c1))
    } else {
        let (gu, dgu) = g_apply_parts(&w, p)?;
        let c1 = gu.sup_norm().max(dgu.sup_norm());
        Ok((gu, c1))
    }
}

/// Solves `μ = 1 + g_{z₀,λ}(vμ)` (or its conjugated-kernel version) by successive
/// approximation until the sup norm of the increment drops below `tol`.
pub fn solve_mu(
    v: &Potential,
    p: &CgoParams,
    tol: f64,
    k_max: usize,
    conjugated: bool,
) -> Result<CgoSolution> {
    if !(tol > 0.0) || k_max == 0 {
        return Err(Error::InvalidArgument("tol must be positive and k_max >= 1".into()));
    }
    let grid = v.grid().clone();
    p.check_grid(&grid)?;
    let vf = v.field();
    let one = GridFunction::constant(&grid, Complex64::new(1.0, 0.0));
    let mut mu = one.clone();
    let mut terms = vec![one];
    let mut term_norms = vec![1.0];
    let mut contraction = 0.0;
    let mut max_ratio = 0.0_f64;
    let mut converged = false;
    let mut last_increment = f64::INFINITY;
    for k in 1..=k_max {
        let (t, c1) = apply_kernel(vf, terms.last().expect("nonempty"), p, conjugated)?;
        t.ensure_finite("Neumann term")?;
        last_increment = t.sup_norm();
        mu = mu.add(&t)?;
        let prev = term_norms[k - 1];
        if k >= 2 && prev > 0.0 {
            let ratio = c1 / prev;
            if k == 2 {
                contraction = ratio;
            }
            max_ratio = max_ratio.max(ratio);
            if ratio >= CONTRACTION_LIMIT {
                return Err(Error::NoContraction { ratio, limit: CONTRACTION_LIMIT });
            }
        }
        terms.push(t);
        term_norms.push(c1);
        if last_increment < tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::IterationLimit { iterations: k_max, increment: last_increment });
    }
    let (gmu, _) = apply_kernel(vf, &mu, p, conjugated)?;
    let residual = mu
        .sub(&gmu)?
        .map(|x| x - 1.0)
        .sup_norm();
    Ok(CgoSolution {
        params: *p,
        iterations: terms.len() - 1,
        mu,
        terms,
        term_norms,
        contraction,
        max_ratio,
        residual,
        conjugated,
    })
}

/// `ψ = e^{λ(z−z₀)²} μ`; for a conjugated solution `e^{conj(λ(z−z₀)²)} μ̄`.
pub fn psi(sol: &CgoSolution) -> GridFunction {
    let p = sol.params;
    sol.mu.map_with_node(|z, m| {
        let e = p.exp_factor(z);
        if sol.conjugated {
            e.conj() * m
        } else {
            e * m
        }
    })
}

/// Relative residual of `−4(∂_z + 2λ(z−z₀))∂_z̄ μ + vμ = 0` (plain) or
/// `−4(∂_z̄ + 2λ̄(z̄−z̄₀))∂_z μ̄ + vμ̄ = 0` (conjugated), sup over interior nodes
/// divided by `‖vμ‖_C`. Equals the `ψ` residual weighted pointwise by `|e^{λ(z−z₀)²}|⁻¹`.
///
/// The inner derivative is taken from `∂_z̄ g f = ¼ T̄ f` with `f = vμ`; only the outer
/// one is a finite difference. Differencing `μ` twice near the rim extrapolates the
/// oscillating phase through one-sided stencils and swamps the check.
pub fn mu_equation_residual(sol: &CgoSolution, v: &Potential) -> Result<f64> {
    let mu = &sol.mu;
    let p = sol.params;
    let lam = p.lambda();
    let vmu = v.field().mul(mu)?;
    let (d1, d2) = if sol.conjugated {
        let d1 = tbar_conj(&vmu, &p)?.scale(Complex64::new(0.25, 0.0));
        let d2 = fields::dbar(&d1)?;
        (d1, d2)
    } else {
        let d1 = tbar(&vmu, &p)?.scale(Complex64::new(0.25, 0.0));
        let d2 = fields::dz(&d1)?;
        (d1, d2)
    };
    let vmu = vmu.without_boundary();
    let nodes = mu.grid().interior_nodes();
    let z0 = p.z0();
    let num = (0..nodes.len())
        .map(|k| {
            let s = nodes[k] - z0;
            let shift = if sol.conjugated { 2.0 * lam.conj() * s.conj() } else { 2.0 * lam * s };
            (-4.0 * (d2.values()[k] + shift * d1.values()[k]) + vmu.values()[k]).norm()
        })
        .fold(0.0, f64::max);
    let den = vmu.sup_norm();
    Ok(if den > 0.0 { num / den } else { num })
}

/// `ψ` residual `−4∂²ψ/∂z∂z̄ + vψ` evaluated in factored form and measured relative
/// to `|e^{λ(z−z₀)²}|` pointwise; see [`mu_equation_residual`].
pub fn psi_residual(sol: &CgoSolution, v: &Potential) -> Result<f64> {
    mu_equation_residual(sol, v)
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn phase_is_unimodular_and_odd_in_lambda(
            zr in -1.0..1.0f64, zi in -1.0..1.0f64,
            ar in -0.5..0.5f64, ai in -0.5..0.5f64,
            lr in -50.0..50.0f64, li in -50.0..50.0f64,
        ) {
            prop_assume!(lr.hypot(li) > 1e-3);
            let p = CgoParams::new(Complex64::new(ar, ai), Complex64::new(lr, li)).unwrap();
            let z = Complex64::new(zr, zi);
            prop_assert!((p.phase(z).norm() - 1.0).abs() < 1e-12);
            prop_assert!((p.negated().phase(z) - p.phase(z).conj()).norm() < 1e-12);
            // e_{λ,z₀} = e^{λ(z−z₀)²} / conj(e^{λ(z−z₀)²})
            let e = p.exp_factor(z);
            prop_assert!((p.phase(z) - e / e.conj()).norm() < 1e-9);
        }
    }
}
