use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::{self, GridFunction};
use crate::geometry::DiskGrid;

/// Compactly supported bump `A (1 − |z − c|²/ρ²)^p` on `|z − c| < ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: (f64, f64),
    pub rho: f64,
    pub amplitude: f64,
    pub power: u32,
}

impl Bump {
    pub fn center(&self) -> Complex64 {
        Complex64::new(self.center.0, self.center.1)
    }

    pub fn eval(&self, z: Complex64) -> f64 {
        let s = (z - self.center()).norm_sqr() / (self.rho * self.rho);
        if s >= 1.0 {
            0.0
        } else {
            self.amplitude * (1.0 - s).powi(self.power as i32)
        }
    }

    /// `∂v/∂z̄ = −A p (1 − s)^{p−1} (z − c)/ρ²`.
    pub fn dbar(&self, z: Complex64) -> Complex64 {
        let d = z - self.center();
        let s = d.norm_sqr() / (self.rho * self.rho);
        if s >= 1.0 {
            return Complex64::new(0.0, 0.0);
        }
        let p = self.power as i32;
        -d * (self.amplitude * p as f64 * (1.0 - s).powi(p - 1) / (self.rho * self.rho))
    }

    /// Closed-form maxima of `|v|`, `|∇v|` and the Hessian spectral norm.
    pub fn derivative_maxima(&self) -> [f64; 3] {
        let a = self.amplitude.abs();
        let p = self.power as f64;
        let rho2 = self.rho * self.rho;
        // |∇v| = 2 a p (1−s)^{p−1} √s / ρ, maximal at s = 1/(2p − 1)
        let s1 = 1.0 / (2.0 * p - 1.0);
        let grad = 2.0 * a * p * (1.0 - s1).powf(p - 1.0) * s1.sqrt() / self.rho;
        // Hessian eigenvalues: radial (2ap/ρ²)(1−s)^{p−2}((2p−1)s − 1), tangential −(2ap/ρ²)(1−s)^{p−1}
        let radial = |s: f64| (2.0 * a * p / rho2) * (1.0 - s).powf(p - 2.0) * ((2.0 * p - 1.0) * s - 1.0);
        // the radial eigenvalue is stationary at s = 3/(2p − 1); the tangential one peaks at s = 0
        let s2 = (3.0 / (2.0 * p - 1.0)).min(1.0);
        let hess = (2.0 * a * p / rho2).max(radial(0.0).abs()).max(radial(s2).abs());
        [a, grad, hess]
    }

    pub fn c2_norm(&self) -> f64 {
        let [a, b, c] = self.derivative_maxima();
        a.max(b).max(c)
    }

    /// Radius of the smallest origin-centred disk containing the support.
    pub fn reach(&self) -> f64 {
        self.center().norm() + self.rho
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PotentialDescriptor {
    Zero,
    Constant(f64),
    /// `Σ coef_k · bump_k`.
    Bumps(Vec<(f64, Bump)>),
    Sampled,
}

impl PotentialDescriptor {
    pub fn eval(&self, z: Complex64) -> Option<f64> {
        match self {
            Self::Zero => Some(0.0),
            Self::Constant(c) => Some(*c),
            Self::Bumps(terms) => Some(terms.iter().map(|(k, b)| k * b.eval(z)).sum()),
            Self::Sampled => None,
        }
    }

    /// Smallest `r` with `supp v ⊂ {|z − z0| ≤ r}`, when the support is known.
    pub fn support_radius_about(&self, z0: Complex64) -> Option<f64> {
        match self {
            Self::Zero => Some(0.0),
            Self::Bumps(terms) => Some(
                terms
                    .iter()
                    .filter(|(k, _)| *k != 0.0)
                    .map(|(_, b)| (b.center() - z0).norm() + b.rho)
                    .fold(0.0, f64::max),
            ),
            _ => None,
        }
    }
}

/// A real potential sampled on a grid together with its `C²` bound.
#[derive(Debug, Clone)]
pub struct Potential {
    field: GridFunction,
    c2_bound: f64,
    boundary_zero: bool,
    normal_derivative_zero: bool,
    descriptor: PotentialDescriptor,
}

impl Potential {
    pub fn zero(grid: &Arc<DiskGrid>) -> Self {
        Self {
            field: GridFunction::zeros(grid),
            c2_bound: 0.0,
            boundary_zero: true,
            normal_derivative_zero: true,
            descriptor: PotentialDescriptor::Zero,
        }
    }

    pub fn constant(grid: &Arc<DiskGrid>, c: f64) -> Self {
        Self {
            field: GridFunction::constant(grid, Complex64::new(c, 0.0)),
            c2_bound: c.abs(),
            boundary_zero: c == 0.0,
            normal_derivative_zero: true,
            descriptor: PotentialDescriptor::Constant(c),
        }
    }

    /// Linear combination of bumps; every support must stay strictly inside the disk.
    pub fn from_bumps(grid: &Arc<DiskGrid>, terms: &[(f64, Bump)]) -> Result<Self> {
        for (_, b) in terms {
            validate_bump(grid, b)?;
        }
        let descriptor = PotentialDescriptor::Bumps(terms.to_vec());
        let field = GridFunction::from_real_fn(grid, |z| descriptor.eval(z).unwrap_or(0.0));
        let c2_bound = terms.iter().map(|(k, b)| k.abs() * b.c2_norm()).sum();
        Ok(Self {
            field,
            c2_bound,
            boundary_zero: true,
            normal_derivative_zero: true,
            descriptor,
        })
    }

    /// Wraps arbitrary samples; the `C²` bound is estimated from discrete derivatives.
    pub fn from_samples(field: GridFunction) -> Result<Self> {
        field.ensure_finite("potential samples")?;
        if field.values().iter().any(|v| v.im != 0.0) {
            return Err(Error::InvalidArgument("potential samples must be real".into()));
        }
        let vz = fields::dbar(&field)?;
        let vzz = fields::dz(&vz)?;
        let vzbzb = fields::dbar(&vz)?;
        let grad = 2.0 * vz.sup_norm();
        let hess = vzz
            .values()
            .iter()
            .zip(vzbzb.values())
            .map(|(a, b)| 2.0 * a.norm() + 2.0 * b.norm())
            .fold(0.0, f64::max);
        let c2_bound = field.sup_norm().max(grad).max(hess);
        let boundary_zero = field
            .boundary()
            .map(|b| b.iter().all(|v| v.norm() == 0.0))
            .unwrap_or(false);
        Ok(Self {
            field,
            c2_bound,
            boundary_zero,
            normal_derivative_zero: false,
            descriptor: PotentialDescriptor::Sampled,
        })
    }

    /// Re-samples an analytic potential on another grid.
    pub fn resample(&self, grid: &Arc<DiskGrid>) -> Result<Self> {
        match &self.descriptor {
            PotentialDescriptor::Zero => Ok(Self::zero(grid)),
            PotentialDescriptor::Constant(c) => Ok(Self::constant(grid, *c)),
            PotentialDescriptor::Bumps(t) => Self::from_bumps(grid, t),
            PotentialDescriptor::Sampled => Err(Error::InvalidArgument(
                "sampled potentials cannot be moved to another grid".into(),
            )),
        }
    }

    /// `self + coef · other` for analytic descriptors.
    pub fn plus(&self, coef: f64, other: &Potential) -> Result<Self> {
        let grid = self.field.grid().clone();
        let mut terms = match &self.descriptor {
            PotentialDescriptor::Zero => vec![],
            PotentialDescriptor::Bumps(t) => t.clone(),
            _ => {
                return Err(Error::InvalidArgument("only bump potentials can be combined".into()))
            }
        };
        match &other.descriptor {
            PotentialDescriptor::Zero => {}
            PotentialDescriptor::Bumps(t) => {
                terms.extend(t.iter().map(|(k, b)| (k * coef, *b)));
            }
            _ => {
                return Err(Error::InvalidArgument("only bump potentials can be combined".into()))
            }
        }
        if terms.is_empty() {
            return Ok(Self::zero(&grid));
        }
        Self::from_bumps(&grid, &terms)
    }

    pub fn field(&self) -> &GridFunction {
        &self.field
    }
    pub fn grid(&self) -> &Arc<DiskGrid> {
        self.field.grid()
    }
    pub fn c2_bound(&self) -> f64 {
        self.c2_bound
    }
    pub fn boundary_zero(&self) -> bool {
        self.boundary_zero
    }
    pub fn normal_derivative_zero(&self) -> bool {
        self.normal_derivative_zero
    }
    pub fn descriptor(&self) -> &PotentialDescriptor {
        &self.descriptor
    }

    /// Exact value where the descriptor is analytic, nodal otherwise (nearest node).
    pub fn value_at(&self, z: Complex64) -> f64 {
        if let Some(v) = self.descriptor.eval(z) {
            return v;
        }
        let nodes = self.grid().interior_nodes();
        let k = nodes
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - z).norm().total_cmp(&(b.1 - z).norm()))
            .map(|(k, _)| k)
            .unwrap_or(0);
        self.field.values()[k].re
    }

    pub fn is_zero(&self) -> bool {
        self.field.sup_norm() == 0.0
    }

    /// Real samples on interior nodes.
    pub fn real_values(&self) -> Vec<f64> {
        self.field.values().iter().map(|v| v.re).collect()
    }
}

fn validate_bump(grid: &DiskGrid, b: &Bump) -> Result<()> {
    if !(b.rho > 0.0 && b.rho.is_finite()) {
        return Err(Error::InvalidArgument(format!("bump radius must be positive, got {}", b.rho)));
    }
    if b.power < 3 {
        return Err(Error::InvalidArgument(format!(
            "bump power must be at least 3 for C2 continuity, got {}",
            b.power
        )));
    }
    if !b.amplitude.is_finite() {
        return Err(Error::InvalidArgument("bump amplitude must be finite".into()));
    }
    if b.reach() >= grid.radius() {
        return Err(Error::InvalidArgument(format!(
            "bump support |c| + rho = {} touches the boundary (radius {})",
            b.reach(),
            grid.radius()
        )));
    }
    Ok(())
}

/// Single bump `amplitude (1 − |z − center|²/ρ²)^power`.
pub fn make_bump(
    grid: &Arc<DiskGrid>,
    center: Complex64,
    rho: f64,
    amplitude: f64,
    power: u32,
) -> Result<Potential> {
    let bump = Bump { center: (center.re, center.im), rho, amplitude, power };
    Potential::from_bumps(grid, &[(1.0, bump)])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Arc<DiskGrid> {
        Arc::new(DiskGrid::default_unit())
    }

    #[test]
    fn bump_examples() {
        let g = grid();
        let v = make_bump(&g, Complex64::new(0.0, 0.0), 0.5, 1.0, 3).unwrap();
        assert_eq!(v.value_at(Complex64::new(0.0, 0.0)), 1.0);
        assert_eq!(v.value_at(Complex64::new(0.5, 0.0)), 0.0);
        assert_eq!(v.value_at(Complex64::new(0.0, 0.99)), 0.0);
        assert!(v.boundary_zero() && v.normal_derivative_zero());

        let w = make_bump(&g, Complex64::new(0.3, 0.0), 0.2, -2.0, 3).unwrap();
        assert_eq!(w.value_at(Complex64::new(0.3, 0.0)).abs(), 2.0);
        assert!(w.field().sup_norm() <= 2.0);
    }

    #[test]
    fn sampled_dbar_matches_closed_form() {
        let g = grid();
        let v = make_bump(&g, Complex64::new(0.0, 0.0), 0.5, 1.0, 3).unwrap();
        let d = fields::dbar(v.field()).unwrap();
        for (z, dv) in g.interior_nodes().iter().zip(d.values()) {
            let bump = Bump { center: (0.0, 0.0), rho: 0.5, amplitude: 1.0, power: 3 };
            assert!((dv - bump.dbar(*z)).norm() < 1e-2, "{z}: {dv}");
            // the five-point radial stencil reaches two rings past the support
            if z.norm() > 0.5 + 2.0 * g.dr() {
                assert!(dv.norm() < 1e-3, "{z}: {dv}");
            }
        }
    }

    #[test]
    fn rejects_bad_bumps() {
        let g = grid();
        assert!(make_bump(&g, Complex64::new(0.6, 0.0), 0.4, 1.0, 3).is_err());
        assert!(make_bump(&g, Complex64::new(0.0, 0.0), 0.4, 1.0, 2).is_err());
        assert!(make_bump(&g, Complex64::new(0.0, 0.0), -0.4, 1.0, 3).is_err());
    }

    #[test]
    fn c2_bound_dominates_discrete_derivatives() {
        let g = grid();
        let v = make_bump(&g, Complex64::new(0.1, -0.2), 0.4, 1.5, 3).unwrap();
        let est = Potential::from_samples(v.field().clone()).unwrap();
        assert!(v.c2_bound() >= est.c2_bound() * 0.999, "{} vs {}", v.c2_bound(), est.c2_bound());
        // and the estimate is not far off
        assert!(est.c2_bound() > 0.8 * v.c2_bound());
    }

    #[test]
    fn gradient_maximum_matches_closed_form() {
        let b = Bump { center: (0.0, 0.0), rho: 0.5, amplitude: 1.0, power: 3 };
        let [_, grad, _] = b.derivative_maxima();
        let brute = (0..20000)
            .map(|k| 2.0 * b.dbar(Complex64::new(k as f64 / 20000.0 * 0.5, 0.0)).norm())
            .fold(0.0, f64::max);
        assert!((grad - brute).abs() < 1e-6 * grad);
    }
}
