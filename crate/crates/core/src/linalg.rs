//! Real banded LU with partial pivoting (LAPACK `gbtrf`/`gbtrs` layout) and a
//! Hager–Higham 1-norm condition estimate.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    // column-major; A(i, j) lives at row kl + ku + i - j of column j
    ab: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        Self { n, kl, ku, ldab, ab: vec![0.0; ldab * n] }
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        (self.kl + self.ku + i - j) + j * self.ldab
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        i + self.ku >= j && j + self.kl >= i
    }

    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside band");
        let s = self.slot(i, j);
        self.ab[s] += value;
    }

    /// `y = A x` for the unfactored matrix.
    #[cfg(test)]
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for j in 0..self.n {
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            for (i, yi) in y.iter_mut().enumerate().take(hi + 1).skip(lo) {
                *yi += self.ab[self.slot(i, j)] * x[j];
            }
        }
        y
    }

    /// Max absolute column sum.
    pub fn norm1(&self) -> f64 {
        (0..self.n)
            .map(|j| {
                let lo = j.saturating_sub(self.ku);
                let hi = (j + self.kl).min(self.n - 1);
                (lo..=hi).map(|i| self.ab[self.slot(i, j)].abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn factor(mut self) -> Result<BandedLu> {
        let n = self.n;
        let kl = self.kl;
        let kv = self.ku + self.kl;
        let ldab = self.ldab;
        let anorm = self.norm1();
        let mut ipiv = vec![0usize; n];
        let mut ju = 0usize;
        let ab = &mut self.ab;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let col = j * ldab;
            let mut jp = 0;
            let mut best = ab[col + kv].abs();
            for i in 1..=km {
                let a = ab[col + kv + i].abs();
                if a > best {
                    best = a;
                    jp = i;
                }
            }
            ipiv[j] = j + jp;
            if best == 0.0 {
                return Err(Error::SingularPivot(j));
            }
            ju = ju.max((j + self.ku + jp).min(n - 1));
            if jp != 0 {
                // swap rows j and j + jp over columns j..=ju
                for c in j..=ju {
                    let a = (kv + j - c) + c * ldab;
                    let b = (kv + j + jp - c) + c * ldab;
                    ab.swap(a, b);
                }
            }
            if km > 0 {
                let piv = ab[col + kv];
                for i in 1..=km {
                    ab[col + kv + i] /= piv;
                }
                for c in (j + 1)..=ju {
                    let u = ab[(kv + j - c) + c * ldab];
                    if u != 0.0 {
                        let base = (kv + j - c) + c * ldab;
                        for i in 1..=km {
                            ab[base + i] -= ab[col + kv + i] * u;
                        }
                    }
                }
            }
        }
        Ok(BandedLu { n, kl, ku: self.ku, ldab, ab: self.ab, ipiv, anorm })
    }
}

#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    ab: Vec<f64>,
    ipiv: Vec<usize>,
    anorm: f64,
}

impl BandedLu {
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        let kv = self.kl + self.ku;
        let ldab = self.ldab;
        let ab = &self.ab;
        for j in 0..n.saturating_sub(1) {
            let lm = self.kl.min(n - 1 - j);
            let l = self.ipiv[j];
            if l != j {
                b.swap(l, j);
            }
            let bj = b[j];
            if bj != 0.0 {
                let col = j * ldab + kv;
                for k in 1..=lm {
                    b[j + k] -= ab[col + k] * bj;
                }
            }
        }
        for j in (0..n).rev() {
            let col = j * ldab;
            b[j] /= ab[col + kv];
            let bj = b[j];
            if bj != 0.0 {
                for i in j.saturating_sub(kv)..j {
                    b[i] -= ab[col + kv + i - j] * bj;
                }
            }
        }
    }

    pub fn solve_transpose_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        let kv = self.kl + self.ku;
        let ldab = self.ldab;
        let ab = &self.ab;
        for j in 0..n {
            let col = j * ldab;
            let mut s = b[j];
            for i in j.saturating_sub(kv)..j {
                s -= ab[col + kv + i - j] * b[i];
            }
            b[j] = s / ab[col + kv];
        }
        for j in (0..n.saturating_sub(1)).rev() {
            let lm = self.kl.min(n - 1 - j);
            let col = j * ldab + kv;
            let mut s = b[j];
            for k in 1..=lm {
                s -= ab[col + k] * b[j + k];
            }
            b[j] = s;
            let l = self.ipiv[j];
            if l != j {
                b.swap(l, j);
            }
        }
    }

    /// Estimated `κ₁(A) = ‖A‖₁ ‖A⁻¹‖₁` (Hager's method with Higham's refinements).
    pub fn condition_estimate(&self) -> f64 {
        let n = self.n;
        let mut x = vec![1.0 / n as f64; n];
        let mut est = 0.0;
        let mut last_sign: Option<Vec<f64>> = None;
        for _ in 0..5 {
            let mut y = x.clone();
            self.solve_in_place(&mut y);
            est = y.iter().map(|v| v.abs()).sum::<f64>();
            let sign: Vec<f64> = y.iter().map(|v| if *v >= 0.0 { 1.0 } else { -1.0 }).collect();
            if last_sign.as_ref() == Some(&sign) {
                break;
            }
            let mut z = sign.clone();
            self.solve_transpose_in_place(&mut z);
            let (jmax, zmax) = z
                .iter()
                .enumerate()
                .fold((0, 0.0), |acc, (i, v)| if v.abs() > acc.1 { (i, v.abs()) } else { acc });
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| a * b).sum();
            if zmax <= ztx {
                break;
            }
            x.iter_mut().for_each(|v| *v = 0.0);
            x[jmax] = 1.0;
            last_sign = Some(sign);
        }
        // alternative lower bound from a sign-alternating probe
        let mut alt: Vec<f64> = (0..n)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                s * (1.0 + i as f64 / (n.max(2) - 1) as f64)
            })
            .collect();
        self.solve_in_place(&mut alt);
        let alt_est = 2.0 * alt.iter().map(|v| v.abs()).sum::<f64>() / (3.0 * n as f64);
        self.anorm * est.max(alt_est)
    }
}
