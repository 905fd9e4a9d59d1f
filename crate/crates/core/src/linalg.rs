//! Dense complex factorization helpers shared by the conversions and the
//! interconnect reduction.

use nalgebra::{DMatrix, LU};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

/// Condition estimate above which a factorization counts as singular.
pub const CONDITION_LIMIT: f64 = 1e12;

/// LU factorization with partial pivoting plus a 1-norm condition estimate.
pub struct Factorized {
    lu: LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>,
    norm1: f64,
    n: usize,
}

impl Factorized {
    pub fn new(a: CMatrix) -> Self {
        let n = a.nrows();
        let norm1 = norm1(&a);
        Self {
            lu: a.lu(),
            norm1,
            n,
        }
    }

    pub fn solve(&self, b: &CMatrix) -> Option<CMatrix> {
        let x = self.lu.solve(b)?;
        x.iter()
            .all(|v| v.re.is_finite() && v.im.is_finite())
            .then_some(x)
    }

    /// Hager/Higham estimate of `||A||_1 * ||A^-1||_1`. Infinite when a pivot
    /// vanishes.
    pub fn condition_estimate(&self) -> f64 {
        if self.n == 0 {
            return 1.0;
        }
        let u = self.lu.u();
        if u.diagonal().iter().any(|d| d.norm() == 0.0) {
            return f64::INFINITY;
        }
        let l = self.lu.l();
        let p = self.lu.p();
        let n = self.n;
        let uh = u.adjoint();
        let lh = l.adjoint();
        let solve = |x: &CMatrix| self.lu.solve(x);
        let solve_adjoint = |x: &CMatrix| -> Option<CMatrix> {
            // A = P^T L U  =>  A^-H x = P^T L^-H U^-H x
            let y = uh.solve_lower_triangular(x)?;
            let mut z = lh.solve_upper_triangular(&y)?;
            p.inv_permute_rows(&mut z);
            Some(z)
        };

        let mut x = CMatrix::from_element(n, 1, Complex64::new(1.0 / n as f64, 0.0));
        let mut estimate = 0.0;
        for iteration in 0..5 {
            let Some(y) = solve(&x) else {
                return f64::INFINITY;
            };
            let y_norm: f64 = y.iter().map(|v| v.norm()).sum();
            if !y_norm.is_finite() {
                return f64::INFINITY;
            }
            if iteration > 0 && y_norm <= estimate {
                break;
            }
            estimate = y_norm;
            let xi = y.map(|v| {
                let m = v.norm();
                if m > 0.0 {
                    v / m
                } else {
                    Complex64::new(1.0, 0.0)
                }
            });
            let Some(z) = solve_adjoint(&xi) else {
                return f64::INFINITY;
            };
            let (j, zmax) = z
                .iter()
                .enumerate()
                .map(|(i, v)| (i, v.norm()))
                .fold((0, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
            let ztx = z
                .iter()
                .zip(x.iter())
                .map(|(a, b)| a.conj() * b)
                .sum::<Complex64>()
                .re;
            if iteration > 0 && zmax <= ztx {
                break;
            }
            x = CMatrix::zeros(n, 1);
            x[j] = Complex64::new(1.0, 0.0);
        }
        // Higham's alternating-sign probe guards against the estimator stalling.
        let mut probe = CMatrix::zeros(n, 1);
        for i in 0..n {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            probe[i] = Complex64::new(sign * (1.0 + i as f64 / (n.max(2) - 1) as f64), 0.0);
        }
        if let Some(w) = solve(&probe) {
            let alt = 2.0 * w.iter().map(|v| v.norm()).sum::<f64>() / (3.0 * n as f64);
            estimate = estimate.max(alt);
        }
        self.norm1 * estimate
    }
}

/// Maximum absolute column sum.
pub fn norm1(a: &CMatrix) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest singular value.
pub fn spectral_norm(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn condition_of_diagonal_matrix() {
        let a = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(1.0, 0.0),
            c(0.0, 1e-3),
            c(4.0, 0.0),
        ]));
        let cond = Factorized::new(a).condition_estimate();
        assert!((cond - 4e3).abs() / 4e3 < 1e-12);
    }

    #[test]
    fn condition_matches_explicit_inverse() {
        let a = CMatrix::from_fn(6, 6, |i, j| {
            c(
                ((i * 7 + j * 3) % 5) as f64 - 2.0,
                ((i + 2 * j) % 3) as f64 * 0.5,
            )
        }) + CMatrix::identity(6, 6) * c(3.0, 0.0);
        let exact = norm1(&a) * norm1(&a.clone().try_inverse().unwrap());
        let est = Factorized::new(a).condition_estimate();
        // the estimator is a lower bound that is almost always tight
        assert!(est <= exact * (1.0 + 1e-12));
        assert!(est >= exact / 3.0);
    }

    #[test]
    fn singular_matrix_reports_infinite_condition() {
        let a =
            CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)]);
        assert!(Factorized::new(a).condition_estimate() > CONDITION_LIMIT);
    }
}
