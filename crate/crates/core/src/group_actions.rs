//! Averaging over the quaternionic subgroups of SO(4), lifting rotations of
//! Λ²₊, and the constructive witness of the maximality argument.

use nalgebra::{Matrix3, Matrix4};
use serde::{Deserialize, Serialize};

use crate::cones::two_positive_margin;
use crate::curvature::{act, half_projection, matrix_rows, scalar, CurvatureOperator, OperatorDocument};
use crate::eigen::SymmetricEigen;
use crate::error::{Error, Result};
use crate::exec::{map_chunks, substream, Execution};
use crate::lambda2::{
    haar_quaternion, induced_map, restrict, s3_minus, s3_plus, Quaternion,
    Rotation4, Sign,
};

/// Which S³ factor of SO(4) to average over.
///
/// `Left` is the subgroup S³₋, which fixes Λ²₊; averaging over it keeps
/// `R_Id + R_W₊`. `Right` is S³₊, which fixes Λ²₋ and keeps `R_Id + R_W₋`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Factor {
    Left,
    Right,
}

impl Factor {
    pub fn element(self, q: Quaternion) -> Rotation4 {
        match self {
            Factor::Left => s3_minus(q),
            Factor::Right => s3_plus(q),
        }
        .expect("Haar samples are unit quaternions")
    }

    /// The Hodge eigenspace fixed pointwise by this factor.
    pub fn fixed_half(self) -> Sign {
        match self {
            Factor::Left => Sign::Plus,
            Factor::Right => Sign::Minus,
        }
    }
}

impl std::str::FromStr for Factor {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "left" => Ok(Factor::Left),
            "right" => Ok(Factor::Right),
            other => Err(format!("unknown factor {other:?} (expected left or right)")),
        }
    }
}

/// Monte-Carlo Haar average of `g.R` over `n` elements of the chosen factor.
pub fn average(r: &CurvatureOperator, factor: Factor, n: usize, seed: u64) -> Result<CurvatureOperator> {
    average_with(Execution::default(), r, factor, n, seed)
}

pub fn average_with(
    exec: Execution,
    r: &CurvatureOperator,
    factor: Factor,
    n: usize,
    seed: u64,
) -> Result<CurvatureOperator> {
    if n == 0 {
        return Err(Error::NoSamples);
    }
    r.check_bianchi()?;
    let partial = map_chunks(exec, n, |c, _, len| {
        let mut rng = substream(seed, c as u64);
        let mut acc = CurvatureOperator::zero();
        for _ in 0..len {
            acc = acc + act(&factor.element(haar_quaternion(&mut rng)), r);
        }
        acc
    });
    let total = partial.into_iter().fold(CurvatureOperator::zero(), |a, b| a + b);
    Ok(total * (1.0 / n as f64))
}

/// The exact limit of [`average`]: `R_Id + R_W₊` for `Left`, `R_Id + R_W₋`
/// for `Right`.
pub fn exact_average(r: &CurvatureOperator, factor: Factor) -> Result<CurvatureOperator> {
    half_projection(r, factor.fixed_half())
}

/// Unit quaternion with `selfdual_rotation_of(q) = rho`, chosen with
/// nonnegative first coordinate.
pub fn rotation_to_quaternion(rho: &Matrix3<f64>) -> Quaternion {
    let m = rho;
    let trace = m.trace();
    // Shepperd: pivot on the largest of w², x², y², z²
    let cands = [trace, m[(0, 0)], m[(1, 1)], m[(2, 2)]];
    let k = (0..4).max_by(|&a, &b| cands[a].total_cmp(&cands[b])).unwrap();
    let q = match k {
        0 => {
            let w = 0.5 * (1.0 + trace).max(0.0).sqrt();
            let f = 0.25 / w;
            Quaternion::new(w, (m[(2, 1)] - m[(1, 2)]) * f, (m[(0, 2)] - m[(2, 0)]) * f, (m[(1, 0)] - m[(0, 1)]) * f)
        }
        1 => {
            let x = 0.5 * (1.0 + m[(0, 0)] - m[(1, 1)] - m[(2, 2)]).max(0.0).sqrt();
            let f = 0.25 / x;
            Quaternion::new((m[(2, 1)] - m[(1, 2)]) * f, x, (m[(0, 1)] + m[(1, 0)]) * f, (m[(0, 2)] + m[(2, 0)]) * f)
        }
        2 => {
            let y = 0.5 * (1.0 - m[(0, 0)] + m[(1, 1)] - m[(2, 2)]).max(0.0).sqrt();
            let f = 0.25 / y;
            Quaternion::new((m[(0, 2)] - m[(2, 0)]) * f, (m[(0, 1)] + m[(1, 0)]) * f, y, (m[(1, 2)] + m[(2, 1)]) * f)
        }
        _ => {
            let z = 0.5 * (1.0 - m[(0, 0)] - m[(1, 1)] + m[(2, 2)]).max(0.0).sqrt();
            let f = 0.25 / z;
            Quaternion::new((m[(1, 0)] - m[(0, 1)]) * f, (m[(0, 2)] + m[(2, 0)]) * f, (m[(1, 2)] + m[(2, 1)]) * f, z)
        }
    };
    let q = q.normalized();
    let first_nonzero = [q.w, q.x, q.y, q.z].into_iter().find(|c| c.abs() > 1e-15).unwrap_or(1.0);
    if first_nonzero < 0.0 {
        -q
    } else {
        q
    }
}

/// Rotation `g ∈ SO(4)` acting on Λ²₊ as `rho` (in the ω₊ basis) and
/// trivially on Λ²₋.
pub fn lift_selfdual_rotation(rho: &Matrix3<f64>) -> Result<Rotation4> {
    if rho.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let residual = (rho.transpose() * rho - Matrix3::identity()).abs().max();
    if residual > 1e-10 {
        return Err(Error::NotOrthogonal { residual });
    }
    let det = rho.determinant();
    if det < 0.0 {
        return Err(Error::NotSpecialOrthogonal { det });
    }
    let g = s3_plus(rotation_to_quaternion(rho))?;
    let m = induced_map(&g);
    let residual = (restrict(&m, Sign::Plus) - rho)
        .abs()
        .max()
        .max((restrict(&m, Sign::Minus) - Matrix3::identity()).abs().max());
    if residual > 1e-10 {
        return Err(Error::LiftResidual { residual });
    }
    Ok(g)
}

#[derive(Clone, Debug, PartialEq)]
pub struct WitnessResult {
    pub witness: CurvatureOperator,
    /// The shift `|μ̃₁|` added along the identity.
    pub kappa: f64,
    pub g: Rotation4,
    /// `scal(witness) / 12`: the witness is `scale` times the unit-normalized
    /// CP² pattern.
    pub scale: f64,
}

#[derive(Serialize)]
struct WitnessDocument {
    witness: OperatorDocument,
    kappa: f64,
    scale: f64,
    g: Vec<Vec<f64>>,
    scal: f64,
    selfdual_spectrum: [f64; 3],
    antiselfdual_spectrum: [f64; 3],
}

impl WitnessResult {
    pub fn to_json(&self) -> String {
        let g: &Matrix4<f64> = self.g.matrix();
        let doc = WitnessDocument {
            witness: OperatorDocument::from_operator(&self.witness),
            kappa: self.kappa,
            scale: self.scale,
            g: matrix_rows(g),
            scal: scalar(&self.witness),
            selfdual_spectrum: crate::eigen::eigenvalues(&self.witness.block(Sign::Plus)),
            antiselfdual_spectrum: crate::eigen::eigenvalues(&self.witness.block(Sign::Minus)),
        };
        serde_json::to_string_pretty(&doc).expect("finite witness")
    }
}

/// Rotation of the ω₊ basis sending `v₁ ↦ v₂`, `v₂ ↦ −v₁`, `v₃ ↦ v₃`
/// for the orthonormal columns of `v`.
fn quarter_turn(v: &Matrix3<f64>) -> Matrix3<f64> {
    let turn = Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
    v * turn * v.transpose()
}

/// Builds a CP²-pattern operator from an operator whose self-dual
/// projection `R_Id + R_W₊` fails to be 2-nonnegative: rotate the two
/// negative eigendirections into each other, average, and shift by the
/// resulting double eigenvalue.
pub fn maximality_witness(r: &CurvatureOperator) -> Result<WitnessResult> {
    r.check_bianchi()?;
    let scal = scalar(r);
    if !(scal > 0.0) {
        return Err(Error::WitnessPrecondition(format!(
            "scalar curvature must be positive, got {scal}"
        )));
    }
    let e = half_projection(r, Sign::Plus)?;
    let block = e.block(Sign::Plus);
    let margin = two_positive_margin(&block);
    if margin >= 0.0 {
        return Err(Error::WitnessPrecondition(format!(
            "self-dual projection is 2-nonnegative (margin {margin})"
        )));
    }
    let eig = SymmetricEigen::new(&block);
    let [mu1, mu2, _] = eig.values;
    let mut frame = eig.vectors;
    if frame.determinant() < 0.0 {
        let c = -frame.column(2);
        frame.set_column(2, &c);
    }
    let (g, averaged) = if (mu2 - mu1).abs() <= 1e-10 * (1.0 + block.norm()) {
        (Rotation4::identity(), e)
    } else {
        let g = lift_selfdual_rotation(&quarter_turn(&frame))?;
        (g, (e + act(&g, &e)) * 0.5)
    };
    let kappa = (0.5 * (mu1 + mu2)).abs();
    let witness = averaged + CurvatureOperator::identity() * kappa;
    Ok(WitnessResult {
        scale: scalar(&witness) / 12.0,
        witness,
        kappa,
        g,
    })
}
