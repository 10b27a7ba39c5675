//! Polar discretization of the disk `|z| < R`.
//!
//! Interior nodes sit on a midpoint-shifted radial lattice `r_i = (i + 1/2) Δr`,
//! `i = 0..n_radial`, crossed with `n_angular` uniform angles `θ_j = 2πj / n_angular`.
//! Boundary nodes use the same angles on `|z| = R`. Node `(i, j)` is stored at
//! flat index `i * n_angular + j` (ring-major).

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const MIN_RADIAL: usize = 8;
pub const MIN_ANGULAR: usize = 16;

/// Default resolution used by the harness and most checks.
pub const DEFAULT_RADIUS: f64 = 1.0;
pub const DEFAULT_N_RADIAL: usize = 64;
pub const DEFAULT_N_ANGULAR: usize = 256;

#[derive(Debug, Clone)]
pub struct DiskGrid {
    radius: f64,
    n_radial: usize,
    n_angular: usize,
    dr: f64,
    dtheta: f64,
    ring_radii: Vec<f64>,
    interior_nodes: Vec<Complex64>,
    area_weights: Vec<f64>,
    boundary_nodes: Vec<Complex64>,
    boundary_weights: Vec<f64>,
    outward_normals: Vec<Complex64>,
}

impl DiskGrid {
    pub fn new(radius: f64, n_radial: usize, n_angular: usize) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidGrid(format!("radius must be positive, got {radius}")));
        }
        if n_radial < MIN_RADIAL {
            return Err(Error::InvalidGrid(format!(
                "n_radial must be at least {MIN_RADIAL}, got {n_radial}"
            )));
        }
        if n_angular < MIN_ANGULAR || n_angular % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "n_angular must be even and at least {MIN_ANGULAR}, got {n_angular}"
            )));
        }

        let dr = radius / n_radial as f64;
        let dtheta = 2.0 * PI / n_angular as f64;
        let ring_radii: Vec<f64> = (0..n_radial).map(|i| (i as f64 + 0.5) * dr).collect();
        let angles: Vec<Complex64> = (0..n_angular)
            .map(|j| Complex64::from_polar(1.0, j as f64 * dtheta))
            .collect();

        let mut interior_nodes = Vec::with_capacity(n_radial * n_angular);
        let mut area_weights = Vec::with_capacity(n_radial * n_angular);
        for &r in &ring_radii {
            for &e in &angles {
                interior_nodes.push(e * r);
                area_weights.push(r * dr * dtheta);
            }
        }
        let boundary_nodes: Vec<Complex64> = angles.iter().map(|&e| e * radius).collect();
        let boundary_weights = vec![radius * dtheta; n_angular];

        Ok(Self {
            radius,
            n_radial,
            n_angular,
            dr,
            dtheta,
            ring_radii,
            interior_nodes,
            area_weights,
            boundary_nodes,
            boundary_weights,
            outward_normals: angles,
        })
    }

    pub fn default_unit() -> Self {
        Self::new(DEFAULT_RADIUS, DEFAULT_N_RADIAL, DEFAULT_N_ANGULAR)
            .expect("default grid parameters are valid")
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
    pub fn n_radial(&self) -> usize {
        self.n_radial
    }
    pub fn n_angular(&self) -> usize {
        self.n_angular
    }
    pub fn dr(&self) -> f64 {
        self.dr
    }
    pub fn dtheta(&self) -> f64 {
        self.dtheta
    }
    pub fn ring_radii(&self) -> &[f64] {
        &self.ring_radii
    }
    pub fn interior_nodes(&self) -> &[Complex64] {
        &self.interior_nodes
    }
    pub fn area_weights(&self) -> &[f64] {
        &self.area_weights
    }
    pub fn boundary_nodes(&self) -> &[Complex64] {
        &self.boundary_nodes
    }
    pub fn boundary_weights(&self) -> &[f64] {
        &self.boundary_weights
    }
    pub fn outward_normals(&self) -> &[Complex64] {
        &self.outward_normals
    }

    pub fn n_interior(&self) -> usize {
        self.interior_nodes.len()
    }
    pub fn n_boundary(&self) -> usize {
        self.boundary_nodes.len()
    }

    #[inline]
    pub fn index(&self, ring: usize, angle: usize) -> usize {
        ring * self.n_angular + angle
    }

    pub fn angle(&self, j: usize) -> f64 {
        j as f64 * self.dtheta
    }

    /// Identity check used when two fields meet in one operation.
    pub fn same_as(&self, other: &DiskGrid) -> bool {
        std::ptr::eq(self, other)
            || (self.radius == other.radius
                && self.n_radial == other.n_radial
                && self.n_angular == other.n_angular)
    }

    /// `max_{z ∈ ∂D} |z − z0|`.
    pub fn max_boundary_distance(&self, z0: Complex64) -> f64 {
        self.boundary_nodes
            .iter()
            .map(|b| (b - z0).norm())
            .fold(0.0, f64::max)
    }

    /// `L = max_{z ∈ ∂D, z0 ∈ D} |z − z0|`, which is the diameter `2R` for a disk.
    pub fn boundary_spread(&self) -> f64 {
        2.0 * self.radius
    }

    pub fn label(&self) -> String {
        format!("R{}-{}x{}", self.radius, self.n_radial, self.n_angular)
    }
}

pub fn build_disk_grid(radius: f64, n_radial: usize, n_angular: usize) -> Result<DiskGrid> {
    DiskGrid::new(radius, n_radial, n_angular)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert!(DiskGrid::new(0.0, 64, 256).is_err());
        assert!(DiskGrid::new(-1.0, 64, 256).is_err());
        assert!(DiskGrid::new(1.0, 7, 256).is_err());
        assert!(DiskGrid::new(1.0, 64, 15).is_err());
        assert!(DiskGrid::new(1.0, 64, 17).is_err());
        assert!(DiskGrid::new(f64::NAN, 64, 256).is_err());
    }

    #[test]
    fn area_and_circumference() {
        let g = DiskGrid::new(1.0, 64, 256).unwrap();
        assert_eq!(g.n_interior(), 64 * 256);
        let area: f64 = g.area_weights().iter().sum();
        assert!((area - PI).abs() / PI < 1e-3);
        let len: f64 = g.boundary_weights().iter().sum();
        assert!((len - 2.0 * PI).abs() / (2.0 * PI) < 1e-6);

        let g2 = DiskGrid::new(2.0, 64, 256).unwrap();
        let area2: f64 = g2.area_weights().iter().sum();
        assert!((area2 - 4.0 * PI).abs() / (4.0 * PI) < 1e-3);
    }

    #[test]
    fn refinement_does_not_increase_area_error() {
        let mut prev = f64::INFINITY;
        for k in 0..3 {
            let g = DiskGrid::new(1.0, 16 << k, 32 << k).unwrap();
            let err = (g.area_weights().iter().sum::<f64>() - PI).abs();
            assert!(err <= (prev / 2.0).max(1e-12), "level {k}: {err} vs {prev}");
            prev = err;
        }
    }

    #[test]
    fn nodes_distinct_and_inside() {
        let g = DiskGrid::new(1.5, 16, 32).unwrap();
        for z in g.interior_nodes() {
            assert!(z.norm() < g.radius());
        }
        for b in g.boundary_nodes() {
            assert!((b.norm() - 1.5).abs() < 1e-15);
        }
        let mut pts: Vec<Complex64> = g.interior_nodes().to_vec();
        pts.extend_from_slice(g.boundary_nodes());
        for a in 0..pts.len() {
            for b in (a + 1)..pts.len() {
                assert!((pts[a] - pts[b]).norm() > 1e-9);
            }
        }
        for (n, b) in g.outward_normals().iter().zip(g.boundary_nodes()) {
            assert!((n.norm() - 1.0).abs() < 1e-15);
            assert!((n * 1.5 - b).norm() < 1e-14);
        }
    }
}
