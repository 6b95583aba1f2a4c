//! Random inputs for property checks and the fuzzing harnesses.

use nalgebra::{Matrix3, Matrix4};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::curvature::{bianchi_project, CurvatureOperator};
use crate::lambda2::{haar_quaternion, selfdual_rotation_of, Lambda2Map};

/// Symmetric 6×6 matrix with independent standard Gaussian entries on and
/// above the diagonal.
pub fn random_symmetric<R: Rng + ?Sized>(rng: &mut R) -> CurvatureOperator {
    let mut m = Lambda2Map::zeros();
    for i in 0..6 {
        for j in i..6 {
            let x: f64 = rng.sample(StandardNormal);
            m[(i, j)] = x;
            m[(j, i)] = x;
        }
    }
    CurvatureOperator::from_symmetric(m)
}

/// Gaussian operator projected onto the 20-dimensional Bianchi space.
pub fn random_bianchi<R: Rng + ?Sized>(rng: &mut R) -> CurvatureOperator {
    bianchi_project(&random_symmetric(rng))
}

/// Bianchi-valid operator of unit Frobenius norm.
pub fn random_unit_bianchi<R: Rng + ?Sized>(rng: &mut R) -> CurvatureOperator {
    let r = random_bianchi(rng);
    r * (1.0 / r.norm())
}

pub fn random_symmetric4<R: Rng + ?Sized>(rng: &mut R) -> Matrix4<f64> {
    let a = Matrix4::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
    (a + a.transpose()) * 0.5
}

pub fn random_traceless4<R: Rng + ?Sized>(rng: &mut R) -> Matrix4<f64> {
    let a = random_symmetric4(rng);
    a - Matrix4::identity() * (a.trace() / 4.0)
}

/// Uniform random element of SO(3).
pub fn random_rotation3<R: Rng + ?Sized>(rng: &mut R) -> Matrix3<f64> {
    selfdual_rotation_of(haar_quaternion(rng))
}
