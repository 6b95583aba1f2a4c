//! Cyclic Jacobi eigensolver for small symmetric matrices.
//!
//! The matrices in this crate are at most 6×6, so the classical rotation
//! sweep converges in a handful of sweeps and gives eigenvectors that are
//! orthonormal to machine precision.

use nalgebra::SMatrix;

const MAX_SWEEPS: usize = 64;

/// Eigen-decomposition with eigenvalues sorted ascending and eigenvectors
/// stored as the matching columns.
#[derive(Clone, Debug)]
pub struct SymmetricEigen<const N: usize> {
    pub values: [f64; N],
    pub vectors: SMatrix<f64, N, N>,
}

impl<const N: usize> SymmetricEigen<N> {
    pub fn new(m: &SMatrix<f64, N, N>) -> Self {
        let mut a = (m + m.transpose()) * 0.5;
        let mut v = SMatrix::<f64, N, N>::identity();
        let scale = a.norm().max(f64::MIN_POSITIVE);

        for _ in 0..MAX_SWEEPS {
            let mut off = 0.0;
            for p in 0..N {
                for q in (p + 1)..N {
                    off += a[(p, q)] * a[(p, q)];
                }
            }
            if off.sqrt() <= 1e-17 * scale {
                break;
            }
            for p in 0..N {
                for q in (p + 1)..N {
                    let apq = a[(p, q)];
                    if apq.abs() <= f64::MIN_POSITIVE {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..N {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..N {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                    for k in 0..N {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
        }

        let mut order: [usize; N] = std::array::from_fn(|i| i);
        order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
        let values = std::array::from_fn(|k| a[(order[k], order[k])]);
        let vectors = SMatrix::<f64, N, N>::from_fn(|r, c| v[(r, order[c])]);
        Self { values, vectors }
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[N - 1]
    }
}

/// Ascending eigenvalues of a symmetric matrix.
pub fn eigenvalues<const N: usize>(m: &SMatrix<f64, N, N>) -> [f64; N] {
    SymmetricEigen::new(m).values
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Matrix3, Matrix6};

    #[test]
    fn diagonal_input_is_sorted() {
        let m = Matrix3::from_diagonal(&nalgebra::Vector3::new(3.0, -1.0, 2.0));
        assert_eq!(eigenvalues(&m), [-1.0, 2.0, 3.0]);
    }

    #[test]
    fn reconstructs_random_six_by_six() {
        let m = Matrix6::from_fn(|i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0 + (i + j) as f64 * 0.1);
        let m = (m + m.transpose()) * 0.5;
        let e = SymmetricEigen::new(&m);
        let d = Matrix6::from_diagonal(&nalgebra::Vector6::from_row_slice(&e.values));
        let back = e.vectors * d * e.vectors.transpose();
        assert!((back - m).norm() < 1e-13 * (1.0 + m.norm()));
        let gram = e.vectors.transpose() * e.vectors;
        assert!((gram - Matrix6::identity()).norm() < 1e-13);
        for k in 0..6 {
            let r = m * e.vectors.column(k) - e.vectors.column(k) * e.values[k];
            assert!(r.norm() < 1e-13 * (1.0 + m.norm()));
        }
    }

    #[test]
    fn repeated_eigenvalues() {
        let m = Matrix3::new(2.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, -4.0);
        assert_eq!(eigenvalues(&m), [-4.0, 2.0, 2.0]);
    }
}
