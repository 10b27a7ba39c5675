//! Independent oracles used by the integration and acceptance tests.
#![allow(dead_code)]

use std::f64::consts::PI;

/// `x I_n'(x) / I_n(x)` from the power series of `I_n`.
pub fn bessel_i_log_derivative(n: u32, x: f64) -> f64 {
    let mut term = 1.0; // relative to (x/2)^n / n!
    let (mut num, mut den) = (0.0, 0.0);
    let q = 0.25 * x * x;
    for k in 0..200u32 {
        if k > 0 {
            term *= q / (k as f64 * (k + n) as f64);
        }
        num += (2 * k + n) as f64 * term;
        den += term;
        if term < 1e-18 * den {
            break;
        }
    }
    num / den
}

/// `J₀(x) = (1/π) ∫₀^π cos(x sin t) dt` by the trapezoid rule, which is spectrally
/// accurate for this periodic integrand.
pub fn bessel_j0(x: f64) -> f64 {
    let m = 64 + (2.0 * x.abs()) as usize;
    let h = PI / m as f64;
    let mut s = 0.5 * (1.0 + (x * PI.sin()).cos());
    for k in 1..m {
        s += (x * (k as f64 * h).sin()).cos();
    }
    s * h / PI
}

/// Gauss–Legendre nodes and weights on `[−1, 1]` by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
            let dt = p1 / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                let (mut q0, mut q1) = (1.0, t);
                for k in 2..=n {
                    let q2 = ((2 * k - 1) as f64 * t * q1 - (k - 1) as f64 * q0) / k as f64;
                    q0 = q1;
                    q1 = q2;
                }
                let dq = n as f64 * (t * q1 - q0) / (t * t - 1.0);
                x[i] = t;
                w[i] = 2.0 / ((1.0 - t * t) * dq * dq);
                break;
            }
        }
    }
    (x, w)
}

/// Composite Gauss–Legendre quadrature of `f` on `[a, b]` with `panels` panels.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut s = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            s += wi * f(lo + 0.5 * h * (xi + 1.0));
        }
    }
    0.5 * h * s
}

/// Log-log least-squares slope.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[test]
fn oracle_self_checks() {
    // I_0'(x)/I_0 = I_1/I_0; I_1(1)/I_0(1) = 0.4463899658965345
    assert!((bessel_i_log_derivative(0, 1.0) - 0.4463899658965345).abs() < 1e-12);
    assert!((bessel_i_log_derivative(3, 1e-8) - 3.0).abs() < 1e-12);
    assert!((bessel_j0(1.0) - 0.765197686557966551).abs() < 1e-14);
    assert!((bessel_j0(2.404825557695773)).abs() < 1e-14);
    let v = integrate(|x| x.exp(), 0.0, 1.0, 3, 8);
    assert!((v - (1f64.exp() - 1.0)).abs() < 1e-14);
}
