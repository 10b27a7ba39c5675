//! Complex fields sampled on a [`DiskGrid`], Wirtinger derivatives and norms.

use num_complex::Complex64;
use rayon::prelude::*;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::DiskGrid;
use crate::spectral;

#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Arc<DiskGrid>,
    values: Vec<Complex64>,
    boundary: Option<Vec<Complex64>>,
}

impl GridFunction {
    pub fn new(
        grid: Arc<DiskGrid>,
        values: Vec<Complex64>,
        boundary: Option<Vec<Complex64>>,
    ) -> Result<Self> {
        if values.len() != grid.n_interior() {
            return Err(Error::GridMismatch("interior value count"));
        }
        if let Some(b) = &boundary {
            if b.len() != grid.n_boundary() {
                return Err(Error::GridMismatch("boundary value count"));
            }
        }
        Ok(Self { grid, values, boundary })
    }

    /// Samples `f` at every interior and boundary node.
    pub fn from_fn(grid: &Arc<DiskGrid>, f: impl Fn(Complex64) -> Complex64 + Sync) -> Self {
        let values = grid.interior_nodes().par_iter().map(|&z| f(z)).collect();
        let boundary = grid.boundary_nodes().iter().map(|&z| f(z)).collect();
        Self { grid: grid.clone(), values, boundary: Some(boundary) }
    }

    pub fn from_real_fn(grid: &Arc<DiskGrid>, f: impl Fn(Complex64) -> f64 + Sync) -> Self {
        Self::from_fn(grid, |z| Complex64::new(f(z), 0.0))
    }

    pub fn constant(grid: &Arc<DiskGrid>, c: Complex64) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![c; grid.n_interior()],
            boundary: Some(vec![c; grid.n_boundary()]),
        }
    }

    pub fn zeros(grid: &Arc<DiskGrid>) -> Self {
        Self::constant(grid, Complex64::new(0.0, 0.0))
    }

    pub fn grid(&self) -> &Arc<DiskGrid> {
        &self.grid
    }
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }
    pub fn boundary(&self) -> Option<&[Complex64]> {
        self.boundary.as_deref()
    }
    pub fn into_parts(self) -> (Vec<Complex64>, Option<Vec<Complex64>>) {
        (self.values, self.boundary)
    }

    pub fn without_boundary(mut self) -> Self {
        self.boundary = None;
        self
    }

    pub fn with_boundary(mut self, boundary: Vec<Complex64>) -> Result<Self> {
        if boundary.len() != self.grid.n_boundary() {
            return Err(Error::GridMismatch("boundary value count"));
        }
        self.boundary = Some(boundary);
        Ok(self)
    }

    pub fn check_same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch("fields live on different grids"))
        }
    }

    /// Rejects NaN/Inf anywhere.
    pub fn ensure_finite(&self, context: &'static str) -> Result<()> {
        if let Some(node) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { context, node });
        }
        if let Some(b) = &self.boundary {
            if let Some(k) = b.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { context, node: self.values.len() + k });
            }
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64 + Sync) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.par_iter().map(|&v| f(v)).collect(),
            boundary: self.boundary.as_ref().map(|b| b.iter().map(|&v| f(v)).collect()),
        }
    }

    /// Pointwise map that also sees the node coordinate.
    pub fn map_with_node(&self, f: impl Fn(Complex64, Complex64) -> Complex64 + Sync) -> Self {
        let values = self
            .values
            .par_iter()
            .zip(self.grid.interior_nodes().par_iter())
            .map(|(&v, &z)| f(z, v))
            .collect();
        let boundary = self.boundary.as_ref().map(|b| {
            b.iter()
                .zip(self.grid.boundary_nodes())
                .map(|(&v, &z)| f(z, v))
                .collect()
        });
        Self { grid: self.grid.clone(), values, boundary }
    }

    /// Pointwise combination; the boundary trace survives only if both sides carry one.
    pub fn zip_with(
        &self,
        other: &GridFunction,
        f: impl Fn(Complex64, Complex64) -> Complex64 + Sync,
    ) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .par_iter()
            .zip(other.values.par_iter())
            .map(|(&a, &b)| f(a, b))
            .collect();
        let boundary = match (&self.boundary, &other.boundary) {
            (Some(a), Some(b)) => Some(a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect()),
            _ => None,
        };
        Ok(Self { grid: self.grid.clone(), values, boundary })
    }

    pub fn add(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }
    pub fn sub(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }
    pub fn mul(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }
    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|v| v * c)
    }
    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    /// Max modulus over interior nodes and, when present, the boundary trace.
    pub fn sup_norm(&self) -> f64 {
        let inner = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let outer = self
            .boundary
            .as_ref()
            .map(|b| b.iter().map(|v| v.norm()).fold(0.0, f64::max))
            .unwrap_or(0.0);
        inner.max(outer)
    }

    pub fn interior_sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Area quadrature `Σ u w`.
    pub fn integrate(&self) -> Complex64 {
        self.values
            .iter()
            .zip(self.grid.area_weights())
            .map(|(&v, &w)| v * w)
            .sum()
    }
}

/// Weights of the first-derivative stencil at 0 on the given offsets (units of h).
fn fd_weights(offsets: &[f64]) -> Vec<f64> {
    let n = offsets.len();
    // Vandermonde rows x^m, solved by Gaussian elimination with partial pivoting
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|m| {
            let mut row: Vec<f64> = offsets.iter().map(|x| x.powi(m as i32)).collect();
            row.push(if m == 1 { 1.0 } else { 0.0 });
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs())).unwrap();
        a.swap(c, p);
        for r in 0..n {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..=n {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
    }
    (0..n).map(|c| a[c][n] / a[c][c]).collect()
}

/// Radial stencils for the last two rings and the rim.
struct RimStencils {
    inner: [f64; 5],
    outer: [f64; 5],
    rim: [f64; 5],
}

impl RimStencils {
    fn new(closed: bool) -> Self {
        let arr = |o: &[f64]| -> [f64; 5] { fd_weights(o).try_into().expect("five points") };
        if closed {
            // last entry is the boundary node at R
            RimStencils {
                inner: arr(&[-2.0, -1.0, 0.0, 1.0, 1.5]),
                outer: arr(&[-3.0, -2.0, -1.0, 0.0, 0.5]),
                rim: arr(&[-3.5, -2.5, -1.5, -0.5, 0.0]),
            }
        } else {
            RimStencils {
                inner: arr(&[-3.0, -2.0, -1.0, 0.0, 1.0]),
                outer: arr(&[-4.0, -3.0, -2.0, -1.0, 0.0]),
                rim: [0.0; 5],
            }
        }
    }
}

/// Radial and angular partial derivatives at every interior node, plus the rim
/// when `u` carries a boundary trace.
#[allow(clippy::type_complexity)]
fn polar_partials(
    u: &GridFunction,
) -> (Vec<Complex64>, Vec<Complex64>, Option<(Vec<Complex64>, Vec<Complex64>)>) {
    let g = u.grid();
    let nr = g.n_radial();
    let na = g.n_angular();
    let h = g.dr();
    let vals = u.values();

    let fwd = spectral::forward(na);
    let inv = spectral::inverse(na);
    let mut u_theta = vals.to_vec();
    u_theta.par_chunks_mut(na).for_each(|ring| {
        spectral::ring_derivative(ring, fwd.as_ref(), inv.as_ref());
    });

    let boundary = u.boundary();
    let st = RimStencils::new(boundary.is_some());
    // the five ring values entering the rim stencils, ending at the boundary if present
    let window = |j: usize| -> [Complex64; 5] {
        let last = nr - 1;
        let mut w = [Complex64::new(0.0, 0.0); 5];
        match boundary {
            Some(b) => {
                for (k, slot) in w.iter_mut().take(4).enumerate() {
                    *slot = vals[(last + k - 3) * na + j];
                }
                w[4] = b[j];
            }
            None => {
                for (k, slot) in w.iter_mut().enumerate() {
                    *slot = vals[(last + k - 4) * na + j];
                }
            }
        }
        w
    };
    let apply = |wts: &[f64; 5], w: [Complex64; 5]| -> Complex64 {
        wts.iter().zip(w).map(|(a, v)| v * *a).sum::<Complex64>() / h
    };
    let mut u_r = vec![Complex64::new(0.0, 0.0); vals.len()];
    u_r.par_chunks_mut(na).enumerate().for_each(|(i, out)| {
        for (j, slot) in out.iter_mut().enumerate() {
            // ring -1 - k is ring k seen across the origin
            let signed = |ring: isize| {
                if ring >= 0 {
                    vals[ring as usize * na + j]
                } else {
                    vals[(-ring - 1) as usize * na + (j + na / 2) % na]
                }
            };
            let ii = i as isize;
            *slot = if i + 2 < nr {
                // fourth order: near the pole the 1/r in the angular part of a second
                // Wirtinger derivative would otherwise eat one order
                (-signed(ii + 2) + 8.0 * signed(ii + 1) - 8.0 * signed(ii - 1) + signed(ii - 2))
                    / (12.0 * h)
            } else if i + 1 < nr {
                apply(&st.inner, window(j))
            } else {
                apply(&st.outer, window(j))
            };
        }
    });
    let rim = boundary.map(|b| {
        let mut b_theta = b.to_vec();
        spectral::ring_derivative(&mut b_theta, fwd.as_ref(), inv.as_ref());
        let b_r: Vec<Complex64> = (0..na).map(|j| apply(&st.rim, window(j))).collect();
        (b_r, b_theta)
    });
    (u_r, u_theta, rim)
}

fn wirtinger(u: &GridFunction, conjugate: bool) -> Result<GridFunction> {
    u.ensure_finite("wirtinger derivative input")?;
    let g = u.grid().clone();
    let (u_r, u_theta, rim) = polar_partials(u);
    let na = g.n_angular();
    let radii = g.ring_radii();
    let normals = g.outward_normals();
    let sign = if conjugate { -1.0 } else { 1.0 };
    let combine = |j: usize, r: f64, d_r: Complex64, d_theta: Complex64| {
        let e = if conjugate { normals[j].conj() } else { normals[j] };
        0.5 * e * (d_r + Complex64::new(0.0, sign / r) * d_theta)
    };
    let values: Vec<Complex64> = (0..u_r.len())
        .into_par_iter()
        .map(|k| combine(k % na, radii[k / na], u_r[k], u_theta[k]))
        .collect();
    let boundary = rim.map(|(b_r, b_theta)| {
        (0..na).map(|j| combine(j, g.radius(), b_r[j], b_theta[j])).collect()
    });
    GridFunction::new(g, values, boundary)
}

/// `∂/∂z̄ = ½ e^{iθ}(∂_r + (i/r)∂_θ)` on interior nodes, and on the rim when `u` has
/// a boundary trace.
pub fn dbar(u: &GridFunction) -> Result<GridFunction> {
    wirtinger(u, false)
}

/// `∂/∂z = ½ e^{−iθ}(∂_r − (i/r)∂_θ)`, same node set as [`dbar`].
pub fn dz(u: &GridFunction) -> Result<GridFunction> {
    wirtinger(u, true)
}

/// `max(‖u‖_C, ‖∂u/∂z̄‖_C)` over the node set.
pub fn c1zbar_norm(u: &GridFunction) -> Result<f64> {
    let d = dbar(u)?;
    Ok(u.sup_norm().max(d.sup_norm()))
}

/// `max(‖u‖_C, ‖∂u/∂z‖_C)` over the node set.
pub fn c1z_norm(u: &GridFunction) -> Result<f64> {
    let d = dz(u)?;
    Ok(u.sup_norm().max(d.sup_norm()))
}

pub fn lp_norm(u: &GridFunction, p: f64) -> Result<f64> {
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::InvalidArgument(format!("L^p norm needs 1 < p < inf, got {p}")));
    }
    u.ensure_finite("lp_norm input")?;
    let s: f64 = u
        .values()
        .iter()
        .zip(u.grid().area_weights())
        .map(|(v, w)| v.norm().powf(p) * w)
        .sum();
    Ok(s.powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> Arc<DiskGrid> {
        Arc::new(DiskGrid::default_unit())
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn dbar_examples() {
        let g = grid();
        let zbar = GridFunction::from_fn(&g, |z| z.conj());
        let d = dbar(&zbar).unwrap();
        assert!(d.values().iter().all(|v| (v - 1.0).norm() < 1e-6));
        let d = dbar(&zbar.clone().without_boundary()).unwrap();
        assert!(d.values().iter().all(|v| (v - 1.0).norm() < 1e-6));

        let zf = GridFunction::from_fn(&g, |z| z);
        assert!(dbar(&zf).unwrap().sup_norm() < 1e-6);

        let r2 = GridFunction::from_fn(&g, |z| c(z.norm_sqr(), 0.0));
        let d = dbar(&r2).unwrap();
        for (v, z) in d.values().iter().zip(g.interior_nodes()) {
            assert!((v - z).norm() < 1e-4);
        }
    }

    #[test]
    fn dz_examples() {
        let g = grid();
        let zf = GridFunction::from_fn(&g, |z| z);
        assert!(dz(&zf).unwrap().values().iter().all(|v| (v - 1.0).norm() < 1e-6));
        let zbar = GridFunction::from_fn(&g, |z| z.conj());
        assert!(dz(&zbar).unwrap().sup_norm() < 1e-6);
        let z2 = GridFunction::from_fn(&g, |z| z * z);
        let d = dz(&z2).unwrap();
        for (v, z) in d.values().iter().zip(g.interior_nodes()) {
            assert!((v - 2.0 * z).norm() < 1e-4);
        }
    }

    #[test]
    fn c1zbar_examples() {
        let g = grid();
        let one = GridFunction::constant(&g, c(1.0, 0.0));
        assert!((c1zbar_norm(&one).unwrap() - 1.0).abs() < 1e-12);
        let zbar = GridFunction::from_fn(&g, |z| z.conj());
        assert!((c1zbar_norm(&zbar).unwrap() - 1.0).abs() < 1e-6);
        // sup|4 z̄| is reached on the rim when the trace is known
        let f = GridFunction::from_fn(&g, |z| 2.0 * z.conj() * z.conj());
        assert!((c1zbar_norm(&f).unwrap() - 4.0).abs() < 1e-6);
        let inner = f.without_boundary();
        let expected = 4.0 * (1.0 - g.dr() / 2.0);
        assert!((c1zbar_norm(&inner).unwrap() - expected).abs() < 1e-6);
    }

    #[test]
    fn lp_examples() {
        let g = grid();
        let one = GridFunction::constant(&g, c(1.0, 0.0));
        assert!((lp_norm(&one, 2.0).unwrap() - PI.sqrt()).abs() < 1e-3);
        assert_eq!(lp_norm(&GridFunction::zeros(&g), 2.0).unwrap(), 0.0);
        let zf = GridFunction::from_fn(&g, |z| z);
        assert!((lp_norm(&zf, 2.0).unwrap() - (PI / 2.0).sqrt()).abs() < 1e-3);
        assert!(lp_norm(&one, 1.0).is_err());
        assert!(lp_norm(&one, f64::INFINITY).is_err());
    }

    #[test]
    fn non_finite_rejected() {
        let g = grid();
        let mut f = GridFunction::constant(&g, c(1.0, 0.0));
        f.values_mut()[17] = c(f64::NAN, 0.0);
        assert!(matches!(dbar(&f), Err(Error::NonFinite { node: 17, .. })));
    }

    #[test]
    fn mismatched_grids() {
        let a = GridFunction::zeros(&grid());
        let b = GridFunction::zeros(&Arc::new(DiskGrid::new(1.0, 32, 64).unwrap()));
        assert!(a.add(&b).is_err());
    }

    #[test]
    fn product_rule_residual_shrinks() {
        let mut prev = f64::INFINITY;
        for k in 0..3 {
            let g = Arc::new(DiskGrid::new(1.0, 16 << k, 32 << k).unwrap());
            let u = GridFunction::from_fn(&g, |z| (z * 1.3).exp() + z.conj() * z.conj());
            let v = GridFunction::from_fn(&g, |z| (z.conj() * c(0.0, 2.0)).sin() * z.norm_sqr());
            let lhs = dbar(&u.mul(&v).unwrap()).unwrap();
            let rhs = u
                .mul(&dbar(&v).unwrap())
                .unwrap()
                .add(&v.mul(&dbar(&u).unwrap()).unwrap())
                .unwrap();
            let res = lhs.sub(&rhs).unwrap().sup_norm();
            assert!(res < prev / 1.9, "level {k}: {res} vs {prev}");
            prev = res;
        }
    }
}
