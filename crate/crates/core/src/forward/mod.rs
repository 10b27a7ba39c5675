//! Dirichlet problem `−Δu + v u = 0`, `u|∂D = f`, and the discrete
//! Dirichlet-to-Neumann map.
//!
//! The operator is discretised with a flux-form 2nd-order radial stencil on the
//! midpoint lattice (no node at the origin, zero flux through `r = 0`) and the
//! spectral second derivative in `θ`. The boundary flux and the normal derivative
//! share the one-sided stencil `u_r(R) ≈ (8 u_b − 9 u_{n−1} + u_{n−2}) / 3Δr`.

mod cache;
mod potential;

pub use cache::{read_dtn_cache, write_dtn_cache};
pub use potential::{make_bump, Bump, Potential, PotentialDescriptor};

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::GridFunction;
use crate::geometry::DiskGrid;
use crate::linalg::{BandedLu, BandedMatrix};
use crate::spectral;

/// Condition estimates beyond this abort the solve.
pub const CONDITION_LIMIT: f64 = 1e12;
/// Relative residual above which a DtN column is flagged.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;

/// Spectral second-derivative matrix entry for `n` equispaced periodic samples.
fn spectral_d2(n: usize, offset: usize) -> f64 {
    let h = 2.0 * PI / n as f64;
    if offset == 0 {
        -PI * PI / (3.0 * h * h) - 1.0 / 6.0
    } else {
        let sign = if offset % 2 == 0 { 1.0 } else { -1.0 };
        let s = (offset as f64 * h / 2.0).sin();
        -0.5 * sign / (s * s)
    }
}

#[derive(Debug, Clone)]
pub struct DirichletSolution {
    pub u: GridFunction,
    /// `‖L u − b‖_∞ / ‖b‖_∞` of the discrete system.
    pub residual: f64,
}

/// Factored discrete operator `−Δ_h + v` for one potential.
#[derive(Debug)]
pub struct ForwardSolver {
    grid: Arc<DiskGrid>,
    potential: Vec<f64>,
    lu: BandedLu,
    condition: f64,
}

impl ForwardSolver {
    pub fn new(potential: &Potential) -> Result<Self> {
        let grid = potential.grid().clone();
        let v = potential.real_values();
        let nr = grid.n_radial();
        let na = grid.n_angular();
        let h = grid.dr();
        let radius = grid.radius();
        let radii = grid.ring_radii();
        let d2: Vec<f64> = (0..na).map(|k| spectral_d2(na, k)).collect();

        let mut a = BandedMatrix::zeros(nr * na, na, na);
        for i in 0..nr {
            let r = radii[i];
            let inner_face = r - 0.5 * h;
            for j in 0..na {
                let row = i * na + j;
                for k in 0..na {
                    let off = (k + na - j) % na;
                    a.add(row, i * na + k, -d2[off] / (r * r));
                }
                a.add(row, row, v[row]);
                if i > 0 {
                    let c = inner_face / (r * h * h);
                    a.add(row, row, c);
                    a.add(row, row - na, -c);
                }
                if i + 1 < nr {
                    let c = (r + 0.5 * h) / (r * h * h);
                    a.add(row, row, c);
                    a.add(row, row + na, -c);
                } else {
                    // −(R/(r h)) u_r(R), with u_b moved to the right-hand side
                    let c = radius / (r * h) / (3.0 * h);
                    a.add(row, row, 9.0 * c);
                    a.add(row, row - na, -c);
                }
            }
        }
        let lu = a.factor().map_err(|_| Error::DirichletEigenvalue {
            condition: f64::INFINITY,
            threshold: CONDITION_LIMIT,
        })?;
        let condition = lu.condition_estimate();
        if !(condition.is_finite() && condition <= CONDITION_LIMIT) {
            return Err(Error::DirichletEigenvalue { condition, threshold: CONDITION_LIMIT });
        }
        Ok(Self { grid, potential: v, lu, condition })
    }

    pub fn grid(&self) -> &Arc<DiskGrid> {
        &self.grid
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    fn boundary_coupling(&self) -> f64 {
        let g = &self.grid;
        let r = g.ring_radii()[g.n_radial() - 1];
        8.0 * g.radius() / (r * g.dr()) / (3.0 * g.dr())
    }

    /// Matrix-free `(−Δ_h + v) u` with the boundary term, used for residual checks.
    fn apply(&self, u: &[f64], f: &[f64]) -> Vec<f64> {
        let g = &self.grid;
        let nr = g.n_radial();
        let na = g.n_angular();
        let h = g.dr();
        let radii = g.ring_radii();
        let fwd = spectral::forward(na);
        let inv = spectral::inverse(na);
        let mut out = vec![0.0; u.len()];
        let mut buf = vec![Complex64::new(0.0, 0.0); na];
        for i in 0..nr {
            let r = radii[i];
            for j in 0..na {
                buf[j] = Complex64::new(u[i * na + j], 0.0);
            }
            fwd.process(&mut buf);
            for (m, c) in buf.iter_mut().enumerate() {
                let k = spectral::wavenumber(m, na);
                // spectral D2 keeps the Nyquist mode with weight −(n/2)²
                let k2 = if 2 * m == na { (na as f64 / 2.0).powi(2) } else { k * k };
                *c *= k2 / na as f64;
            }
            inv.process(&mut buf);
            for j in 0..na {
                let row = i * na + j;
                let mut acc = buf[j].re / (r * r) + self.potential[row] * u[row];
                if i > 0 {
                    acc -= (r - 0.5 * h) / (r * h * h) * (u[row - na] - u[row]);
                }
                if i + 1 < nr {
                    acc -= (r + 0.5 * h) / (r * h * h) * (u[row + na] - u[row]);
                } else {
                    let ur = (8.0 * f[j] - 9.0 * u[row] + u[row - na]) / (3.0 * h);
                    acc -= g.radius() / (r * h) * ur;
                }
                out[row] = acc;
            }
        }
        out
    }

    fn solve_real(&self, f: &[f64]) -> (Vec<f64>, f64) {
        self.solve_real_with_source(&vec![0.0; self.grid.n_interior()], f)
    }

    fn solve_real_with_source(&self, source: &[f64], f: &[f64]) -> (Vec<f64>, f64) {
        let g = &self.grid;
        let na = g.n_angular();
        let top = (g.n_radial() - 1) * na;
        let c = self.boundary_coupling();
        let mut b = source.to_vec();
        for j in 0..na {
            b[top + j] += c * f[j];
        }
        let mut u = b.clone();
        self.lu.solve_in_place(&mut u);
        let lu_apply = self.apply(&u, f);
        let res = lu_apply
            .iter()
            .zip(source)
            .map(|(v, s)| (v - s).abs())
            .fold(0.0, f64::max);
        let scale = b.iter().map(|v| v.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        (u, res / scale)
    }

    /// Solves with complex Dirichlet data `f` on the boundary nodes.
    pub fn solve(&self, f: &[Complex64]) -> Result<DirichletSolution> {
        let zero = GridFunction::zeros(&self.grid);
        self.solve_with_source(&zero, f)
    }

    /// Solves `(−Δ_h + v) u = s` with `u|∂D = f`; the boundary trace of `s` is ignored.
    pub fn solve_with_source(&self, source: &GridFunction, f: &[Complex64]) -> Result<DirichletSolution> {
        let g = &self.grid;
        if f.len() != g.n_boundary() {
            return Err(Error::GridMismatch("Dirichlet data length"));
        }
        if !source.grid().same_as(g) {
            return Err(Error::GridMismatch("source on a different grid"));
        }
        if f.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("Dirichlet data must be finite".into()));
        }
        source.ensure_finite("Dirichlet source")?;
        let re: Vec<f64> = f.iter().map(|v| v.re).collect();
        let im: Vec<f64> = f.iter().map(|v| v.im).collect();
        let s_re: Vec<f64> = source.values().iter().map(|v| v.re).collect();
        let s_im: Vec<f64> = source.values().iter().map(|v| v.im).collect();
        let (ur, rr) = self.solve_real_with_source(&s_re, &re);
        let (ui, ri) = if im.iter().chain(&s_im).any(|v| *v != 0.0) {
            self.solve_real_with_source(&s_im, &im)
        } else {
            (vec![0.0; ur.len()], 0.0)
        };
        let values = ur.iter().zip(&ui).map(|(a, b)| Complex64::new(*a, *b)).collect();
        let u = GridFunction::new(g.clone(), values, Some(f.to_vec()))?;
        u.ensure_finite("Dirichlet solution")?;
        Ok(DirichletSolution { u, residual: rr.max(ri) })
    }

    /// Outward normal derivative on the boundary nodes.
    pub fn normal_derivative(&self, u: &GridFunction) -> Result<Vec<Complex64>> {
        normal_derivative(u)
    }

    pub fn dtn_map(&self) -> Result<DtnMatrix> {
        let g = self.grid.clone();
        let na = g.n_angular();
        let h = g.dr();
        let top = (g.n_radial() - 1) * na;
        let cols: Vec<(Vec<f64>, f64)> = (0..na)
            .into_par_iter()
            .map(|j| {
                let mut f = vec![0.0; na];
                f[j] = 1.0;
                let (u, res) = self.solve_real(&f);
                let col = (0..na)
                    .map(|k| (8.0 * f[k] - 9.0 * u[top + k] + u[top - na + k]) / (3.0 * h))
                    .collect();
                (col, res)
            })
            .collect();
        let flagged: Vec<usize> = cols
            .iter()
            .enumerate()
            .filter(|(_, (_, r))| !(*r <= RESIDUAL_TOLERANCE))
            .map(|(j, _)| j)
            .collect();
        let mut matrix = vec![Complex64::new(0.0, 0.0); na * na];
        for (j, (col, _)) in cols.iter().enumerate() {
            for k in 0..na {
                matrix[k * na + j] = Complex64::new(col[k], 0.0);
            }
        }
        let max_residual = cols.iter().map(|c| c.1).fold(0.0, f64::max);
        let mut dtn = DtnMatrix::from_matrix(g, matrix)?;
        dtn.flagged_columns = flagged;
        dtn.max_residual = max_residual;
        Ok(dtn)
    }
}

/// One-sided `(8 u_b − 9 u_{n−1} + u_{n−2}) / 3Δr`; requires a boundary trace.
pub fn normal_derivative(u: &GridFunction) -> Result<Vec<Complex64>> {
    let g = u.grid();
    let b = u
        .boundary()
        .ok_or_else(|| Error::InvalidArgument("normal derivative needs boundary values".into()))?;
    let na = g.n_angular();
    let top = (g.n_radial() - 1) * na;
    let h = g.dr();
    let v = u.values();
    Ok((0..na)
        .map(|k| (8.0 * b[k] - 9.0 * v[top + k] + v[top - na + k]) / (3.0 * h))
        .collect())
}

pub fn solve_dirichlet(potential: &Potential, f: &[Complex64]) -> Result<DirichletSolution> {
    ForwardSolver::new(potential)?.solve(f)
}

pub fn dtn_map(potential: &Potential) -> Result<DtnMatrix> {
    ForwardSolver::new(potential)?.dtn_map()
}

/// Discrete DtN operator on boundary nodes and its kernel `A(z, ζ) = M[z, ζ] / w_ζ`.
#[derive(Debug, Clone)]
pub struct DtnMatrix {
    grid: Arc<DiskGrid>,
    matrix: Vec<Complex64>,
    kernel: Vec<Complex64>,
    pub flagged_columns: Vec<usize>,
    pub max_residual: f64,
}

impl DtnMatrix {
    /// Builds from a row-major `n × n` matrix acting on nodal boundary values.
    pub fn from_matrix(grid: Arc<DiskGrid>, matrix: Vec<Complex64>) -> Result<Self> {
        let n = grid.n_boundary();
        if matrix.len() != n * n {
            return Err(Error::GridMismatch("DtN matrix size"));
        }
        let w = grid.boundary_weights();
        let kernel = matrix
            .iter()
            .enumerate()
            .map(|(idx, m)| m / w[idx % n])
            .collect();
        Ok(Self { grid, matrix, kernel, flagged_columns: vec![], max_residual: 0.0 })
    }

    /// Builds from kernel samples `A(z_k, ζ_j)`, row-major.
    pub fn from_kernel(grid: Arc<DiskGrid>, kernel: Vec<Complex64>) -> Result<Self> {
        let n = grid.n_boundary();
        if kernel.len() != n * n {
            return Err(Error::GridMismatch("DtN kernel size"));
        }
        let w = grid.boundary_weights();
        let matrix = kernel
            .iter()
            .enumerate()
            .map(|(idx, a)| a * w[idx % n])
            .collect();
        Ok(Self { grid, matrix, kernel, flagged_columns: vec![], max_residual: 0.0 })
    }

    pub fn grid(&self) -> &Arc<DiskGrid> {
        &self.grid
    }
    pub fn size(&self) -> usize {
        self.grid.n_boundary()
    }
    pub fn matrix(&self) -> &[Complex64] {
        &self.matrix
    }
    pub fn kernel(&self) -> &[Complex64] {
        &self.kernel
    }
    pub fn kernel_at(&self, row: usize, col: usize) -> Complex64 {
        self.kernel[row * self.size() + col]
    }

    pub fn apply(&self, f: &[Complex64]) -> Vec<Complex64> {
        let n = self.size();
        (0..n)
            .map(|k| {
                self.matrix[k * n..(k + 1) * n]
                    .iter()
                    .zip(f)
                    .map(|(m, x)| m * x)
                    .sum()
            })
            .collect()
    }

    /// `self − other`, the kernel of `Φ_self − Φ_other`.
    pub fn difference(&self, other: &DtnMatrix) -> Result<DtnMatrix> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch("DtN matrices on different grids"));
        }
        let matrix = self.matrix.iter().zip(&other.matrix).map(|(a, b)| a - b).collect();
        DtnMatrix::from_matrix(self.grid.clone(), matrix)
    }

    /// `L^∞ → L^∞` norm of the kernel operator: `max_z Σ_ζ |A(z, ζ)| w_ζ`.
    pub fn op_norm_inf(&self) -> f64 {
        let n = self.size();
        let w = self.grid.boundary_weights();
        (0..n)
            .map(|k| {
                self.kernel[k * n..(k + 1) * n]
                    .iter()
                    .zip(w)
                    .map(|(a, wj)| a.norm() * wj)
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// `sup_{x ≠ y} |A(x, y)| / log(3 + |x − y|⁻¹)` over distinct node pairs.
    pub fn norm1(&self) -> f64 {
        let n = self.size();
        let nodes = self.grid.boundary_nodes();
        let mut best = 0.0_f64;
        for k in 0..n {
            for j in 0..n {
                if j == k {
                    continue;
                }
                let d = (nodes[k] - nodes[j]).norm();
                best = best.max(self.kernel[k * n + j].norm() / (3.0 + 1.0 / d).ln());
            }
        }
        best
    }

    /// `Σ_{x ≠ y} log(3 + |x − y|⁻¹) w_y` over the densest row; the diagonal uses the
    /// nearest-neighbour distance.
    pub fn log_weight_constant(grid: &DiskGrid) -> f64 {
        let nodes = grid.boundary_nodes();
        let w = grid.boundary_weights();
        let n = nodes.len();
        let dmin = (nodes[1] - nodes[0]).norm();
        (0..n)
            .map(|k| {
                (0..n)
                    .map(|j| {
                        let d = if j == k { dmin } else { (nodes[k] - nodes[j]).norm() };
                        (3.0 + 1.0 / d).ln() * w[j]
                    })
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Max asymmetry `|A(z, ζ) − A(ζ, z)|` relative to `max |A|`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.size();
        let scale = self.kernel.iter().map(|a| a.norm()).fold(0.0, f64::max);
        let mut worst = 0.0_f64;
        for k in 0..n {
            for j in (k + 1)..n {
                worst = worst.max((self.kernel[k * n + j] - self.kernel[j * n + k]).norm());
            }
        }
        if scale > 0.0 {
            worst / scale
        } else {
            0.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(nr: usize, na: usize) -> Arc<DiskGrid> {
        Arc::new(DiskGrid::new(1.0, nr, na).unwrap())
    }

    fn harmonic(g: &DiskGrid, n: i32) -> Vec<Complex64> {
        (0..g.n_angular())
            .map(|j| Complex64::from_polar(1.0, n as f64 * g.angle(j)))
            .collect()
    }

    #[test]
    fn spectral_d2_row_sums_vanish() {
        for n in [16, 64, 256] {
            let s: f64 = (0..n).map(|k| spectral_d2(n, k)).sum();
            assert!(s.abs() < 1e-8 * n as f64 * n as f64, "{n}: {s}");
        }
    }

    #[test]
    fn constants_are_harmonic() {
        let g = grid(32, 64);
        let v = Potential::zero(&g);
        let sol = solve_dirichlet(&v, &vec![Complex64::new(1.0, 0.0); 64]).unwrap();
        for u in sol.u.values() {
            assert!((u - 1.0).norm() < 1e-10);
        }
        assert!(sol.residual < 1e-10);
    }

    #[test]
    fn first_harmonic_extends_linearly() {
        let g = grid(64, 128);
        let v = Potential::zero(&g);
        let f: Vec<Complex64> = (0..128).map(|j| Complex64::new(g.angle(j).cos(), 0.0)).collect();
        let sol = solve_dirichlet(&v, &f).unwrap();
        for (u, z) in sol.u.values().iter().zip(g.interior_nodes()) {
            assert!((u.re - z.re).abs() < 1e-4, "{z}: {u}");
        }
    }

    #[test]
    fn dtn_of_laplacian() {
        let g = grid(64, 64);
        let dtn = dtn_map(&Potential::zero(&g)).unwrap();
        assert!(dtn.flagged_columns.is_empty());
        let ones = vec![Complex64::new(1.0, 0.0); 64];
        assert!(dtn.apply(&ones).iter().all(|x| x.norm() < 1e-3));
        let f: Vec<Complex64> = (0..64).map(|j| Complex64::new(g.angle(j).cos(), 0.0)).collect();
        for (a, b) in dtn.apply(&f).iter().zip(&f) {
            assert!((a - b).norm() < 1e-3);
        }
        for n in 2..6 {
            let f = harmonic(&g, n);
            for (a, b) in dtn.apply(&f).iter().zip(&f) {
                assert!((a - b * n as f64).norm() < 2e-3 * n as f64);
            }
        }
    }

    #[test]
    fn kernel_recomposes_matrix_action() {
        let g = grid(16, 32);
        let v = make_bump(&g, Complex64::new(0.1, 0.0), 0.5, 2.0, 3).unwrap();
        let dtn = dtn_map(&v).unwrap();
        let f: Vec<Complex64> = (0..32).map(|j| Complex64::new((j as f64).sin(), 0.3)).collect();
        let direct = dtn.apply(&f);
        let w = g.boundary_weights();
        for k in 0..32 {
            let s: Complex64 = (0..32).map(|j| dtn.kernel_at(k, j) * f[j] * w[j]).sum();
            assert!((s - direct[k]).norm() < 1e-12 * (1.0 + direct[k].norm()));
        }
    }

    #[test]
    fn dtn_is_nearly_symmetric_for_real_potential() {
        let g = grid(32, 64);
        let v = make_bump(&g, Complex64::new(0.2, -0.1), 0.5, 3.0, 3).unwrap();
        let dtn = dtn_map(&v).unwrap();
        assert!(dtn.asymmetry() < 1e-2, "{}", dtn.asymmetry());
    }

    #[test]
    fn operator_norm_examples() {
        let g = grid(8, 16);
        let zero = DtnMatrix::from_kernel(g.clone(), vec![Complex64::new(0.0, 0.0); 256]).unwrap();
        assert_eq!(zero.op_norm_inf(), 0.0);
        assert_eq!(zero.norm1(), 0.0);
        let ones = DtnMatrix::from_kernel(g.clone(), vec![Complex64::new(1.0, 0.0); 256]).unwrap();
        assert!((ones.op_norm_inf() - 2.0 * PI).abs() < 1e-6);

        let nodes = g.boundary_nodes();
        let gv: Vec<Complex64> = nodes.iter().map(|z| z * z + 0.5).collect();
        let hv: Vec<Complex64> = nodes.iter().map(|z| z.conj() * 2.0 - 1.0).collect();
        let kernel: Vec<Complex64> =
            (0..256).map(|idx| gv[idx / 16] * hv[idx % 16]).collect();
        let rank1 = DtnMatrix::from_kernel(g.clone(), kernel).unwrap();
        let gmax = gv.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let hsum: f64 = hv.iter().zip(g.boundary_weights()).map(|(v, w)| v.norm() * w).sum();
        assert!((rank1.op_norm_inf() - gmax * hsum).abs() < 1e-6);

        let logk: Vec<Complex64> = (0..256)
            .map(|idx| {
                let (k, j) = (idx / 16, idx % 16);
                let d = (nodes[k] - nodes[j]).norm();
                Complex64::new(if k == j { 0.0 } else { (3.0 + 1.0 / d).ln() }, 0.0)
            })
            .collect();
        assert!((DtnMatrix::from_kernel(g.clone(), logk).unwrap().norm1() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_kernel_norm1_uses_farthest_pair() {
        let g = grid(8, 16);
        let ones = DtnMatrix::from_kernel(g.clone(), vec![Complex64::new(1.0, 0.0); 256]).unwrap();
        // brute-force enumeration of all distinct pairs
        let nodes = g.boundary_nodes();
        let mut brute = 0.0_f64;
        for a in nodes {
            for b in nodes {
                if a != b {
                    brute = brute.max(1.0 / (3.0 + 1.0 / (a - b).norm()).ln());
                }
            }
        }
        assert!((brute - 1.0 / 3.5_f64.ln()).abs() < 1e-12);
        assert!((ones.norm1() - brute).abs() < 1e-12);
    }

    #[test]
    fn difference_vanishes_with_perturbation() {
        let g = grid(16, 32);
        let v1 = make_bump(&g, Complex64::new(0.0, 0.0), 0.5, 1.0, 3).unwrap();
        let b = make_bump(&g, Complex64::new(0.2, 0.1), 0.3, 1.0, 3).unwrap();
        let d1 = dtn_map(&v1).unwrap();
        let mut prev = None;
        for t in [1e-1, 1e-2, 1e-3] {
            let v2 = v1.plus(t, &b).unwrap();
            let eps = dtn_map(&v2).unwrap().difference(&d1).unwrap().op_norm_inf();
            if let Some((pt, pe)) = prev {
                let ratio: f64 = eps / pe;
                let expected: f64 = t / pt;
                assert!((ratio / expected - 1.0).abs() < 0.1, "{ratio} vs {expected}");
            }
            prev = Some((t, eps));
        }
    }

    #[test]
    fn wrong_data_length_rejected() {
        let g = grid(8, 16);
        let s = ForwardSolver::new(&Potential::zero(&g)).unwrap();
        assert!(s.solve(&[Complex64::new(1.0, 0.0); 3]).is_err());
    }

    #[test]
    fn dirichlet_eigenvalue_detected() {
        // first Dirichlet eigenvalue of the unit disk is j_{0,1}² ≈ 5.7832;
        // find the discrete one by bisection on det sign via condition blow-up
        let g = grid(16, 16);
        let mut worst: f64 = 0.0;
        let mut hit = false;
        for k in 0..400 {
            let c = -5.70 - k as f64 * 0.0005;
            match ForwardSolver::new(&Potential::constant(&g, c)) {
                Ok(s) => worst = worst.max(s.condition()),
                Err(Error::DirichletEigenvalue { .. }) => {
                    hit = true;
                    break;
                }
                Err(e) => panic!("{e}"),
            }
        }
        assert!(hit || worst > 1e5, "no eigenvalue proximity seen, worst cond {worst}");
    }
}
