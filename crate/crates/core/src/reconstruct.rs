//! Oscillatory moments, stationary-phase point reconstruction and the
//! Alessandrini identity.
//!
//! Every moment is the plain area quadrature `Σ e_{λ,z₀} w ΔA`. The quadrature is
//! only trusted when the phase of `e_{λ,z₀}` is resolved on the support of `w`,
//! see [`phase_budget`].

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::cgo::{self, CgoParams, CgoSolution, DEFAULT_MAX_ITERATIONS, DEFAULT_TOLERANCE};
use crate::error::{Error, Result};
use crate::fields::GridFunction;
use crate::forward::{self, DtnMatrix, ForwardSolver, Potential};
use crate::geometry::DiskGrid;

/// Largest radial phase advance per cell, in radians.
pub const MAX_RADIAL_PHASE_STEP: f64 = 0.8 * PI;
/// Angular oversampling over the phase bandwidth, plus a fixed guard.
pub const ANGULAR_OVERSAMPLING: f64 = 1.1;
pub const ANGULAR_GUARD: usize = 16;
/// Relative `|I − J|` beyond which [`AlessandriniTerms::flagged`] is set.
pub const ALESSANDRINI_BUDGET: f64 = 0.1;

/// Grid needed to integrate `e_{λ,z₀} w` for a given support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseBudget {
    /// `max 4|λ||z − z₀||z|` over the support: the angular bandwidth of the phase.
    pub angular_bandwidth: f64,
    /// `max 4|λ||z − z₀|` over the support: the radial wavenumber.
    pub radial_wavenumber: f64,
    pub need_angular: usize,
    pub need_radial: usize,
}

impl PhaseBudget {
    pub fn fits(&self, grid: &DiskGrid) -> bool {
        grid.n_angular() >= self.need_angular && grid.n_radial() >= self.need_radial
    }
}

/// Resolution requirement for the phase of `e_{λ,z₀}` over the nodes where `w ≠ 0`.
pub fn phase_budget(w: &GridFunction, p: &CgoParams) -> PhaseBudget {
    let g = w.grid();
    let z0 = p.z0();
    let (mut ang, mut rad) = (0.0_f64, 0.0_f64);
    for (z, v) in g.interior_nodes().iter().zip(w.values()) {
        if *v != Complex64::new(0.0, 0.0) {
            let s = (z - z0).norm();
            ang = ang.max(s * z.norm());
            rad = rad.max(s);
        }
    }
    let lam = p.abs_lambda();
    let angular_bandwidth = 4.0 * lam * ang;
    let radial_wavenumber = 4.0 * lam * rad;
    let mut need_angular = (ANGULAR_OVERSAMPLING * angular_bandwidth).ceil() as usize + ANGULAR_GUARD;
    need_angular += need_angular % 2;
    let need_radial = ((radial_wavenumber * g.radius() / MAX_RADIAL_PHASE_STEP).ceil() as usize).max(1);
    PhaseBudget { angular_bandwidth, radial_wavenumber, need_angular, need_radial }
}

fn require_resolved(w: &GridFunction, p: &CgoParams) -> Result<()> {
    let b = phase_budget(w, p);
    let g = w.grid();
    if b.fits(g) {
        Ok(())
    } else {
        Err(Error::UnderResolvedPhase {
            abs_lambda: p.abs_lambda(),
            need_angular: b.need_angular,
            need_radial: b.need_radial,
            n_angular: g.n_angular(),
            n_radial: g.n_radial(),
        })
    }
}

/// `W_{z₀}(λ) = ∫_D e_{λ,z₀}(z) w(z) dRe z dIm z`.
pub fn oscillatory_moment(w: &GridFunction, p: &CgoParams) -> Result<Complex64> {
    p.check_grid(w.grid())?;
    w.ensure_finite("moment integrand")?;
    require_resolved(w, p)?;
    let g = w.grid();
    let terms: Vec<Complex64> = g
        .interior_nodes()
        .par_iter()
        .zip(w.values())
        .zip(g.area_weights())
        .map(|((&z, &v), &a)| {
            if v == Complex64::new(0.0, 0.0) {
                v
            } else {
                p.phase(z) * v * a
            }
        })
        .collect();
    // fixed summation order keeps the result independent of the thread count
    Ok(terms.iter().sum())
}

/// `h⁽⁰⁾_{z₀}(λ)`: the moment of `v` itself.
pub fn h0(v: &Potential, p: &CgoParams) -> Result<Complex64> {
    oscillatory_moment(v.field(), p)
}

fn check_solution(v: &Potential, sol: &CgoSolution) -> Result<()> {
    if sol.conjugated {
        return Err(Error::ParamMismatch("h needs the plain (unconjugated) solution".into()));
    }
    if !sol.mu.grid().same_as(v.grid()) {
        return Err(Error::GridMismatch("potential and CGO solution"));
    }
    Ok(())
}

/// `h_{z₀}(λ) = ∫ e_{λ,z₀} v μ`.
pub fn h_full(v: &Potential, sol: &CgoSolution) -> Result<Complex64> {
    check_solution(v, sol)?;
    oscillatory_moment(&v.field().mul(&sol.mu)?, &sol.params)
}

/// `h⁽ᵏ⁾_{z₀}(λ)` from the first `k + 1` Neumann terms of `sol`.
pub fn h_k(v: &Potential, sol: &CgoSolution, k: usize) -> Result<Complex64> {
    check_solution(v, sol)?;
    if k == 0 {
        return h0(v, &sol.params);
    }
    oscillatory_moment(&v.field().mul(&sol.partial_sum(k))?, &sol.params)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum MomentVariant {
    W,
    H0,
    HFull,
    HK(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentResult {
    pub z0: (f64, f64),
    pub lambda: (f64, f64),
    pub value: (f64, f64),
    pub variant: MomentVariant,
}

impl MomentResult {
    fn new(p: &CgoParams, value: Complex64, variant: MomentVariant) -> Self {
        let (z0, lam) = (p.z0(), p.lambda());
        Self {
            z0: (z0.re, z0.im),
            lambda: (lam.re, lam.im),
            value: (value.re, value.im),
            variant,
        }
    }

    pub fn w(w: &GridFunction, p: &CgoParams) -> Result<Self> {
        Ok(Self::new(p, oscillatory_moment(w, p)?, MomentVariant::W))
    }

    pub fn h0(v: &Potential, p: &CgoParams) -> Result<Self> {
        Ok(Self::new(p, h0(v, p)?, MomentVariant::H0))
    }

    pub fn h_full(v: &Potential, sol: &CgoSolution) -> Result<Self> {
        Ok(Self::new(&sol.params, h_full(v, sol)?, MomentVariant::HFull))
    }

    pub fn h_k(v: &Potential, sol: &CgoSolution, k: usize) -> Result<Self> {
        Ok(Self::new(&sol.params, h_k(v, sol, k)?, MomentVariant::HK(k)))
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.value.0, self.value.1)
    }
}

/// `(2/π)|λ| h`: the stationary-phase estimate of the potential at `z₀`.
pub fn stationary_phase_estimate(h: Complex64, p: &CgoParams) -> Complex64 {
    h * (2.0 / PI * p.abs_lambda())
}

#[derive(Debug, Clone, Serialize)]
pub struct ReconstructionRow {
    pub abs_lambda: f64,
    pub lambda: (f64, f64),
    pub estimate: (f64, f64),
    /// `|estimate − v(z₀)|` when the potential has an analytic description.
    pub error: Option<f64>,
    pub budget: PhaseBudget,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReconstructionTable {
    pub z0: (f64, f64),
    pub truth: Option<f64>,
    pub rows: Vec<ReconstructionRow>,
    /// First `|λ|` dropped because the grid could not resolve the phase.
    pub truncated_at: Option<f64>,
}

/// `(2/π)|λ| h⁽⁰⁾` along a schedule sorted by `|λ|`; stops at the first
/// under-resolved `λ` and records it.
pub fn reconstruct_point(
    v: &Potential,
    z0: Complex64,
    schedule: &[Complex64],
) -> Result<ReconstructionTable> {
    if schedule.windows(2).any(|w| w[0].norm() > w[1].norm()) {
        return Err(Error::InvalidArgument("lambda schedule must be sorted by |lambda|".into()));
    }
    let params = schedule
        .iter()
        .map(|&lam| CgoParams::new(z0, lam))
        .collect::<Result<Vec<_>>>()?;
    let truth = v.descriptor().eval(z0);
    let results: Vec<Result<ReconstructionRow>> = params
        .par_iter()
        .map(|p| {
            let est = stationary_phase_estimate(h0(v, p)?, p);
            let lam = p.lambda();
            Ok(ReconstructionRow {
                abs_lambda: p.abs_lambda(),
                lambda: (lam.re, lam.im),
                estimate: (est.re, est.im),
                error: truth.map(|t| (est - t).norm()),
                budget: phase_budget(v.field(), p),
            })
        })
        .collect();
    let mut rows = Vec::with_capacity(results.len());
    let mut truncated_at = None;
    for (p, r) in params.iter().zip(results) {
        match r {
            Ok(row) => rows.push(row),
            Err(Error::UnderResolvedPhase { .. }) => {
                log::warn!(
                    "schedule truncated at |lambda| = {}: phase not resolved on {}",
                    p.abs_lambda(),
                    v.grid().label()
                );
                truncated_at = Some(p.abs_lambda());
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(ReconstructionTable { z0: (z0.re, z0.im), truth, rows, truncated_at })
}

/// Both sides of the Alessandrini identity with the CGO pair
/// `ψ₂ = e^{λ(z−z₀)²} μ₂(z, λ)`, `ψ₁ = e^{−λ̄(z̄−z̄₀)²} μ̄₁(z, −λ)`.
#[derive(Debug, Clone, Serialize)]
pub struct AlessandriniTerms {
    pub i: (f64, f64),
    pub i1: (f64, f64),
    pub i2: (f64, f64),
    pub i3: (f64, f64),
    pub i4: (f64, f64),
    /// Boundary side, with `(Φ₂ − Φ₁)ψ₂` obtained from one difference solve.
    pub j: (f64, f64),
    /// Boundary side paired directly through the two DtN matrices.
    pub j_matrix: (f64, f64),
    /// `max |ψ_j|` on `∂D`: the amplification applied to any error in `Φ₂ − Φ₁`.
    pub boundary_scale: f64,
    /// Contractions of the two Neumann series (`μ₂`, `μ̄₁`).
    pub contraction: (f64, f64),
    pub flagged: bool,
}

fn pair(z: Complex64) -> (f64, f64) {
    (z.re, z.im)
}

impl AlessandriniTerms {
    pub fn i(&self) -> Complex64 {
        Complex64::new(self.i.0, self.i.1)
    }
    pub fn j(&self) -> Complex64 {
        Complex64::new(self.j.0, self.j.1)
    }
    pub fn parts(&self) -> [Complex64; 4] {
        [self.i1, self.i2, self.i3, self.i4].map(|(a, b)| Complex64::new(a, b))
    }
    /// `|I − J| / |I|`.
    pub fn relative_gap(&self) -> f64 {
        let i = self.i();
        let gap = (i - self.j()).norm();
        if i.norm() > 0.0 {
            gap / i.norm()
        } else {
            gap
        }
    }
}

fn same_grid(a: &DiskGrid, b: &DiskGrid, what: &'static str) -> Result<()> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(Error::GridMismatch(what))
    }
}

/// `I = ∫ e_{λ,z₀}(v₂ − v₁) μ₂ μ̄₁`, its four-term split, and the boundary side `J`.
///
/// `J` pairs `ψ₁` with `(Φ₂ − Φ₁)ψ₂`. Forming `Φ₂ψ₂ − Φ₁ψ₂` directly loses everything
/// once `|ψ|` on the boundary reaches `1/ε_machine`, so the product is taken as the
/// normal derivative of `w`, `(−Δ_h + v₁)w = (v₁ − v₂)u₂`, `w|∂D = 0`, where `u₂` is the
/// discrete solution with data `ψ₂`. In exact arithmetic this equals the matrix
/// pairing, which is still reported as `j_matrix`.
pub fn alessandrini_terms(
    v1: &Potential,
    v2: &Potential,
    p: &CgoParams,
    dtn1: &DtnMatrix,
    dtn2: &DtnMatrix,
) -> Result<AlessandriniTerms> {
    let g = v1.grid().clone();
    same_grid(&g, v2.grid(), "potentials")?;
    same_grid(&g, dtn1.grid(), "DtN map of v1")?;
    same_grid(&g, dtn2.grid(), "DtN map of v2")?;
    p.check_grid(&g)?;

    let (s2, s1) = rayon::join(
        || cgo::solve_mu(v2, p, DEFAULT_TOLERANCE, DEFAULT_MAX_ITERATIONS, false),
        || cgo::solve_mu(v1, &p.negated(), DEFAULT_TOLERANCE, DEFAULT_MAX_ITERATIONS, true),
    );
    let (s2, s1) = (s2?, s1?);

    let dv = v2.field().sub(v1.field())?;
    let one = Complex64::new(1.0, 0.0);
    let m2 = s2.mu.map(|m| m - one);
    let m1 = s1.mu.map(|m| m - one);
    let integral = |f: &GridFunction| -> Result<Complex64> {
        let prod = dv.mul(f)?;
        Ok(prod
            .values()
            .iter()
            .zip(g.interior_nodes())
            .zip(g.area_weights())
            .map(|((v, &z), w)| p.phase(z) * v * w)
            .sum())
    };
    let i = integral(&s2.mu.mul(&s1.mu)?)?;
    let i1 = integral(&GridFunction::constant(&g, one))?;
    let i2 = -integral(&m2.mul(&m1)?)?;
    let i3 = -i2 + integral(&m2)?;
    let i4 = -i2 + integral(&m1)?;

    let psi2 = cgo::psi(&s2);
    let psi1 = cgo::psi(&s1);
    let f2 = psi2.boundary().ok_or(Error::GridMismatch("CGO solution without boundary trace"))?;
    let f1 = psi1.boundary().ok_or(Error::GridMismatch("CGO solution without boundary trace"))?;
    let wb = g.boundary_weights();
    let boundary_pair = |a: &[Complex64]| -> Complex64 {
        f1.iter().zip(a).zip(wb).map(|((x, y), w)| x * y * w).sum()
    };

    let j = if dv.sup_norm() == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        let u2 = ForwardSolver::new(v2)?.solve(f2)?.u;
        let source = dv.mul(&u2)?.scale(-one);
        let zero = vec![Complex64::new(0.0, 0.0); g.n_boundary()];
        let w = ForwardSolver::new(v1)?.solve_with_source(&source, &zero)?.u;
        boundary_pair(&forward::normal_derivative(&w)?)
    };
    let j_matrix = boundary_pair(&dtn2.difference(dtn1)?.apply(f2));

    let boundary_scale = f1.iter().chain(f2).map(|x| x.norm()).fold(0.0, f64::max);
    let gap = (i - j).norm();
    let flagged = gap > ALESSANDRINI_BUDGET * i.norm().max(f64::MIN_POSITIVE);
    if flagged {
        log::warn!("Alessandrini gap {gap:.3e} exceeds {ALESSANDRINI_BUDGET} of |I| = {:.3e}", i.norm());
    }
    Ok(AlessandriniTerms {
        i: pair(i),
        i1: pair(i1),
        i2: pair(i2),
        i3: pair(i3),
        i4: pair(i4),
        j: pair(j),
        j_matrix: pair(j_matrix),
        boundary_scale,
        contraction: (s2.contraction, s1.contraction),
        flagged,
    })
}

/// Data-side estimate `(2/π)|λ| J(λ)` of `(v₂ − v₁)(z₀)`.
pub fn reconstruct_difference_from_dtn(
    dtn1: &DtnMatrix,
    dtn2: &DtnMatrix,
    v1: &Potential,
    v2: &Potential,
    z0: Complex64,
    lambda: Complex64,
) -> Result<Complex64> {
    let p = CgoParams::new(z0, lambda)?;
    let terms = alessandrini_terms(v1, v2, &p, dtn1, dtn2)?;
    Ok(stationary_phase_estimate(terms.j(), &p))
}
