//! Solid Cauchy transforms on the polar grid.
//!
//! Ring-to-ring sums `Σ q(ζ)/(ζ − z)` are done in Fourier space: for a source
//! ring ρ and target ring r the kernel is a geometric series in `r/ρ` (or `ρ/r`),
//! so each target ring costs one pass over the source spectra and one inverse FFT.

use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::Result;
use crate::fields::{self, GridFunction};
use crate::geometry::DiskGrid;
use crate::spectral;

const SERIES_CUTOFF: f64 = 1e-18;

/// `S(z) = Σ_{ζ ≠ z} q(ζ) / (ζ − z)` over interior sources, evaluated at every
/// interior node and, on request, at the boundary nodes.
pub(crate) fn ring_cauchy_sum(
    grid: &DiskGrid,
    q: &[Complex64],
    with_boundary: bool,
) -> (Vec<Complex64>, Option<Vec<Complex64>>) {
    let na = grid.n_angular();
    let nr = grid.n_radial();
    let fwd = spectral::forward(na);
    let inv = spectral::inverse(na);

    // spectra rotated left by one so that bin m + 1 sits at index m
    let mut spectra = q.to_vec();
    spectra.par_chunks_mut(na).for_each(|ring| {
        fwd.process(ring);
        ring.rotate_left(1);
    });

    let radii = grid.ring_radii();
    let mut targets: Vec<f64> = radii.to_vec();
    if with_boundary {
        targets.push(grid.radius());
    }
    let nf = na as f64;
    let rings: Vec<Vec<Complex64>> = targets
        .par_iter()
        .enumerate()
        .map(|(t, &r)| {
            let mut acc = vec![Complex64::new(0.0, 0.0); na];
            for (i, &rho) in radii.iter().enumerate() {
                let a = &spectra[i * na..(i + 1) * na];
                if t == i {
                    for (m, (s, am)) in acc.iter_mut().zip(a).enumerate() {
                        *s += am * (((nf - 1.0) / 2.0 - m as f64) / (nf * rho));
                    }
                } else if r < rho {
                    let x = r / rho;
                    let mut p = 1.0 / (rho * (1.0 - x.powi(na as i32)));
                    let stop = p.abs() * SERIES_CUTOFF;
                    for (s, am) in acc.iter_mut().zip(a) {
                        *s += am * p;
                        p *= x;
                        if p < stop {
                            break;
                        }
                    }
                } else {
                    let y = rho / r;
                    let mut p = -1.0 / (r * (1.0 - y.powi(na as i32)));
                    let stop = p.abs() * SERIES_CUTOFF;
                    for (s, am) in acc.iter_mut().zip(a).rev() {
                        *s += am * p;
                        p *= y;
                        if p.abs() < stop {
                            break;
                        }
                    }
                }
            }
            inv.process(&mut acc);
            acc
        })
        .collect();
    let mut interior = Vec::with_capacity(nr * na);
    for ring in &rings[..nr] {
        interior.extend_from_slice(ring);
    }
    let boundary = if with_boundary { Some(rings[nr].clone()) } else { None };
    (interior, boundary)
}

/// Per-grid sums reused by every transform.
pub(crate) struct WeightSums {
    /// `S(w)` at interior nodes.
    pub interior: Vec<Complex64>,
    /// `S(w)` at boundary nodes.
    pub boundary: Vec<Complex64>,
    /// `∫_D (ζ̄ − z̄)/(ζ − z) − Σ_{ζ≠z} w (ζ̄ − z̄)/(ζ − z)`; the integral is `π z̄²/2`.
    pub defect: Vec<Complex64>,
    /// The same defect at boundary nodes.
    pub boundary_defect: Vec<Complex64>,
}

/// [`WeightSums`] cached per grid shape.
pub(crate) fn weight_sums(grid: &DiskGrid) -> Arc<WeightSums> {
    type Cache = Mutex<HashMap<(u64, usize, usize), Arc<WeightSums>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let key = (grid.radius().to_bits(), grid.n_radial(), grid.n_angular());
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().expect("cache poisoned").get(&key) {
        return hit.clone();
    }
    let nodes = grid.interior_nodes();
    let w: Vec<Complex64> = grid.area_weights().iter().map(|&w| Complex64::new(w, 0.0)).collect();
    let (interior, boundary) = ring_cauchy_sum(grid, &w, true);
    let wzb: Vec<Complex64> = w.iter().zip(nodes).map(|(w, z)| w * z.conj()).collect();
    let (s1, s1_out) = ring_cauchy_sum(grid, &wzb, true);
    let boundary = boundary.expect("boundary requested");
    let defect_at = |z: Complex64, s1: Complex64, s0: Complex64| {
        let zb = z.conj();
        PI * zb * zb / 2.0 - (s1 - zb * s0)
    };
    let defect = (0..nodes.len()).map(|k| defect_at(nodes[k], s1[k], interior[k])).collect();
    let boundary_defect = grid
        .boundary_nodes()
        .iter()
        .zip(s1_out.expect("boundary requested"))
        .zip(&boundary)
        .map(|((&z, s1), &s0)| defect_at(z, s1, s0))
        .collect();
    let entry = Arc::new(WeightSums { interior, boundary, defect, boundary_defect });
    cache.lock().expect("cache poisoned").insert(key, entry.clone());
    entry
}

/// Solid Cauchy transform `T u(z) = −(1/π) ∫_D u(ζ)/(ζ − z)` at interior and boundary
/// nodes, computed as `T(u − u(z))(z) + u(z) z̄`.
pub fn cauchy_t(u: &GridFunction) -> Result<GridFunction> {
    u.ensure_finite("cauchy_t input")?;
    let g = u.grid().clone();
    let w = g.area_weights();
    let q: Vec<Complex64> = u.values().iter().zip(w).map(|(v, w)| v * w).collect();
    let (s_in, s_out) = ring_cauchy_sum(&g, &q, true);
    let s_out = s_out.expect("boundary requested");
    let sw = weight_sums(&g);
    let uz = fields::dz(u)?;
    let uzb = fields::dbar(u)?;

    let vals = u.values();
    let values: Vec<Complex64> = (0..vals.len())
        .into_par_iter()
        .map(|k| {
            // the f_z part of the self cell is its area; the f_z̄ part carries the moment
            // defect, which also absorbs the quadrature error of the neighbouring cells
            let local = s_in[k] - vals[k] * sw.interior[k]
                + uz.values()[k] * w[k]
                + uzb.values()[k] * sw.defect[k];
            -local / PI + vals[k] * g.interior_nodes()[k].conj()
        })
        .collect();
    let na = g.n_angular();
    let boundary: Vec<Complex64> = match u.boundary() {
        Some(ub) => {
            let ub_zb = uzb.boundary().expect("dbar keeps the trace");
            (0..na)
                .map(|j| {
                    let local = s_out[j] - ub[j] * sw.boundary[j] + ub_zb[j] * sw.boundary_defect[j];
                    -local / PI + ub[j] * g.boundary_nodes()[j].conj()
                })
                .collect()
        }
        None => s_out.iter().map(|s| -s / PI).collect(),
    };
    GridFunction::new(g, values, Some(boundary))
}

/// Unsubtracted midpoint sum `−(1/π) Σ u w/(ζ − z)`; reference route for tests.
pub fn cauchy_t_direct(u: &GridFunction) -> Result<GridFunction> {
    let g = u.grid().clone();
    let q: Vec<Complex64> =
        u.values().iter().zip(g.area_weights()).map(|(v, w)| v * w).collect();
    let (s_in, s_out) = ring_cauchy_sum(&g, &q, true);
    GridFunction::new(
        g,
        s_in.iter().map(|s| -s / PI).collect(),
        s_out.map(|b| b.iter().map(|s| -s / PI).collect()),
    )
}
