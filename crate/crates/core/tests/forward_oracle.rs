mod common;

use cgo_stab::forward::{dtn_map, make_bump, solve_dirichlet, Potential};
use cgo_stab::DiskGrid;
use num_complex::Complex64;
use std::sync::Arc;

fn fourier_mode(g: &DiskGrid, n: i32) -> Vec<Complex64> {
    (0..g.n_angular()).map(|j| Complex64::from_polar(1.0, n as f64 * g.angle(j))).collect()
}

#[test]
fn constant_potential_eigenvalues_match_bessel_ratio() {
    let g = Arc::new(DiskGrid::new(1.0, 128, 64).unwrap());
    for c in [1.0, 4.0, 10.0] {
        let dtn = dtn_map(&Potential::constant(&g, c)).unwrap();
        for n in 0..=8 {
            let f = fourier_mode(&g, n);
            let image = dtn.apply(&f);
            let exact = common::bessel_i_log_derivative(n as u32, c.sqrt());
            for (a, b) in image.iter().zip(&f) {
                assert!(((a / b).re - exact).abs() < 1e-4 * exact, "c={c} n={n}");
                assert!((a / b).im.abs() < 1e-8);
            }
        }
    }
}

#[test]
fn radial_profile_of_constant_potential() {
    // u = I_0(√c r)/I_0(√c) for unit boundary data
    let g = Arc::new(DiskGrid::new(1.0, 64, 32).unwrap());
    let c: f64 = 4.0;
    let sol = solve_dirichlet(&Potential::constant(&g, c), &fourier_mode(&g, 0)).unwrap();
    let i0 = |x: f64| common::integrate(|t| (x * t.cos()).cosh(), 0.0, std::f64::consts::PI, 4, 16)
        / std::f64::consts::PI;
    for (u, z) in sol.u.values().iter().zip(g.interior_nodes()) {
        let exact = i0(c.sqrt() * z.norm()) / i0(c.sqrt());
        assert!((u.re - exact).abs() < 1e-4, "{z}: {u} vs {exact}");
    }
}

#[test]
fn dtn_is_monotone_in_the_potential() {
    // v1 ≤ v2 ⇒ Φ2 − Φ1 is positive semidefinite
    let g = Arc::new(DiskGrid::new(1.0, 32, 32).unwrap());
    let v1 = make_bump(&g, Complex64::new(0.1, 0.0), 0.6, 1.0, 3).unwrap();
    let bump = make_bump(&g, Complex64::new(-0.2, 0.2), 0.4, 2.0, 4).unwrap();
    let v2 = v1.plus(1.0, &bump).unwrap();
    let diff = dtn_map(&v2).unwrap().difference(&dtn_map(&v1).unwrap()).unwrap();
    let w = g.boundary_weights();
    for n in 0..8 {
        let f = fourier_mode(&g, n);
        let q: Complex64 =
            diff.apply(&f).iter().zip(&f).zip(w).map(|((a, b), wj)| a * b.conj() * wj).sum();
        assert!(q.re > -1e-8, "mode {n}: {q}");
    }
}
