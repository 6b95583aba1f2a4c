//! Exterior algebra of ℝ⁴: bivectors, the Hodge star, the so(4) bracket and
//! the quaternionic double cover of SO(4).
//!
//! Bivector coordinates are always taken in the ordered orthonormal basis
//! `e12, e13, e14, e23, e24, e34`. Every matrix acting on Λ²ℝ⁴ in this crate
//! uses that order.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::{Matrix3, Matrix4, Matrix6, SMatrix, Vector3, Vector6};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vector4 = nalgebra::Vector4<f64>;

/// Linear map on Λ²ℝ⁴ in the fixed bivector basis.
pub type Lambda2Map = Matrix6<f64>;

/// 6×3 matrix whose columns are an orthonormal basis of Λ²₊ or Λ²₋.
pub type HalfBasis = SMatrix<f64, 6, 3>;

/// Index pairs of the bivector basis, in coordinate order.
pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Names of the basis bivectors as written in file headers.
pub const BASIS_LABEL: &str = "e12,e13,e14,e23,e24,e34";

/// Tolerance on orthogonality, unit norm and skewness checks.
pub const GROUP_TOL: f64 = 1e-12;

/// Orientation label for the Hodge eigenspaces Λ²₊ / Λ²₋.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

pub fn pair_index(a: usize, b: usize) -> Option<(usize, f64)> {
    if a == b {
        return None;
    }
    let (lo, hi, s) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    PAIRS.iter().position(|&p| p == (lo, hi)).map(|k| (k, s))
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Bivector(pub Vector6<f64>);

impl Bivector {
    pub fn new(c: [f64; 6]) -> Self {
        Bivector(Vector6::from_row_slice(&c))
    }

    pub fn zero() -> Self {
        Bivector(Vector6::zeros())
    }

    /// Basis bivector `e_a ∧ e_b` (zero-based indices, any order).
    pub fn basis(a: usize, b: usize) -> Self {
        let mut out = Self::zero();
        if let Some((k, s)) = pair_index(a, b) {
            out.0[k] = s;
        }
        out
    }

    pub fn unit(k: usize) -> Self {
        let mut out = Self::zero();
        out.0[k] = 1.0;
        out
    }

    pub fn coords(&self) -> &Vector6<f64> {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn apply(m: &Lambda2Map, b: &Bivector) -> Bivector {
        Bivector(m * b.0)
    }
}

impl Add for Bivector {
    type Output = Bivector;
    fn add(self, o: Bivector) -> Bivector {
        Bivector(self.0 + o.0)
    }
}

impl AddAssign for Bivector {
    fn add_assign(&mut self, o: Bivector) {
        self.0 += o.0;
    }
}

impl Sub for Bivector {
    type Output = Bivector;
    fn sub(self, o: Bivector) -> Bivector {
        Bivector(self.0 - o.0)
    }
}

impl Neg for Bivector {
    type Output = Bivector;
    fn neg(self) -> Bivector {
        Bivector(-self.0)
    }
}

impl Mul<f64> for Bivector {
    type Output = Bivector;
    fn mul(self, s: f64) -> Bivector {
        Bivector(self.0 * s)
    }
}

/// Element `re + i·im` of Λ²ℝ⁴ ⊗ ℂ.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct ComplexBivector {
    pub re: Bivector,
    pub im: Bivector,
}

impl ComplexBivector {
    pub fn new(re: Bivector, im: Bivector) -> Self {
        Self { re, im }
    }

    pub fn hermitian_norm2(&self) -> f64 {
        inner(&self.re, &self.re) + inner(&self.im, &self.im)
    }

    /// Complex-bilinear square `⟨ω, ω⟩ = |re|² − |im|² + 2i⟨re, im⟩`,
    /// returned as `(real, imaginary)`.
    pub fn bilinear_square(&self) -> (f64, f64) {
        (
            inner(&self.re, &self.re) - inner(&self.im, &self.im),
            2.0 * inner(&self.re, &self.im),
        )
    }
}

pub fn wedge(u: &Vector4, v: &Vector4) -> Bivector {
    Bivector(Vector6::from_fn(|k, _| {
        let (i, j) = PAIRS[k];
        u[i] * v[j] - u[j] * v[i]
    }))
}

pub fn inner(a: &Bivector, b: &Bivector) -> f64 {
    a.0.dot(&b.0)
}

/// Hodge star for the orientation `e1∧e2∧e3∧e4`.
pub fn hodge_star() -> Lambda2Map {
    let mut m = Lambda2Map::zeros();
    // e12 <-> e34, e14 <-> e23, e13 <-> -e24
    m[(5, 0)] = 1.0;
    m[(0, 5)] = 1.0;
    m[(3, 2)] = 1.0;
    m[(2, 3)] = 1.0;
    m[(4, 1)] = -1.0;
    m[(1, 4)] = -1.0;
    m
}

/// Orthogonal projector `(I ± *)/2` onto Λ²±.
pub fn projector(sign: Sign) -> Lambda2Map {
    (Lambda2Map::identity() + hodge_star() * sign.value()) * 0.5
}

/// The orthonormal triple ω₁±, ω₂±, ω₃± spanning Λ²±.
pub fn selfdual_basis(sign: Sign) -> [Bivector; 3] {
    let s = sign.value();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    [
        Bivector::new([r, 0.0, 0.0, 0.0, 0.0, s * r]),
        Bivector::new([0.0, r, 0.0, 0.0, -s * r, 0.0]),
        Bivector::new([0.0, 0.0, r, s * r, 0.0, 0.0]),
    ]
}

/// [`selfdual_basis`] as the columns of a 6×3 matrix.
pub fn half_basis(sign: Sign) -> HalfBasis {
    let b = selfdual_basis(sign);
    HalfBasis::from_columns(&[b[0].0, b[1].0, b[2].0])
}

/// Coordinates of `b` in the ω± basis.
pub fn half_coords(b: &Bivector, sign: Sign) -> Vector3<f64> {
    half_basis(sign).transpose() * b.0
}

/// Skew matrix of `x ↦ Σ b_ij (⟨e_i,x⟩e_j − ⟨e_j,x⟩e_i)`.
pub fn to_so4(b: &Bivector) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    for (k, &(i, j)) in PAIRS.iter().enumerate() {
        m[(j, i)] += b.0[k];
        m[(i, j)] -= b.0[k];
    }
    m
}

pub fn from_so4(m: &Matrix4<f64>) -> Result<Bivector> {
    let residual = (m + m.transpose()).abs().max();
    if !residual.is_finite() {
        return Err(Error::NonFinite);
    }
    if residual > GROUP_TOL {
        return Err(Error::NotSkew { residual });
    }
    Ok(Bivector(Vector6::from_fn(|k, _| {
        let (i, j) = PAIRS[k];
        0.5 * (m[(j, i)] - m[(i, j)])
    })))
}

/// Lie bracket of so(4) transported to Λ²ℝ⁴.
pub fn bracket(a: &Bivector, b: &Bivector) -> Bivector {
    let (ma, mb) = (to_so4(a), to_so4(b));
    let c = ma * mb - mb * ma;
    Bivector(Vector6::from_fn(|k, _| {
        let (i, j) = PAIRS[k];
        0.5 * (c[(j, i)] - c[(i, j)])
    }))
}

/// Matrix of `ad_a = [a, ·]` on Λ²ℝ⁴.
pub fn ad(a: &Bivector) -> Lambda2Map {
    let cols: Vec<Vector6<f64>> = (0..6).map(|k| bracket(a, &Bivector::unit(k)).0).collect();
    Lambda2Map::from_columns(&cols)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    /// Quaternion `x + iy + jz + kt` for the point `(x, y, z, t)` of ℝ⁴.
    pub fn from_vector(v: &Vector4) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn to_vector(self) -> Vector4 {
        Vector4::new(self.w, self.x, self.y, self.z)
    }

    pub fn norm(self) -> f64 {
        self.to_vector().norm()
    }

    pub fn conj(self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }

    pub fn normalized(self) -> Self {
        self.scale(1.0 / self.norm())
    }

    pub fn check_unit(self) -> Result<Self> {
        let norm = self.norm();
        if !norm.is_finite() {
            return Err(Error::NonFinite);
        }
        if (norm - 1.0).abs() > GROUP_TOL {
            return Err(Error::NonUnitQuaternion { norm });
        }
        Ok(self)
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, o: Quaternion) -> Quaternion {
        Quaternion::new(
            self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        )
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        self.scale(-1.0)
    }
}

/// Orthogonal 4×4 matrix; columns are the images of e1..e4.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation4(Matrix4<f64>);

impl Rotation4 {
    /// Accepts any orthogonal matrix, including orientation-reversing ones.
    pub fn new(m: Matrix4<f64>) -> Result<Self> {
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let residual = (m.transpose() * m - Matrix4::identity()).abs().max();
        if residual > GROUP_TOL {
            return Err(Error::NotOrthogonal { residual });
        }
        Ok(Rotation4(m))
    }

    /// Accepts only special orthogonal matrices.
    pub fn special(m: Matrix4<f64>) -> Result<Self> {
        let g = Self::new(m)?;
        if g.det() < 0.0 {
            return Err(Error::NotSpecialOrthogonal { det: g.det() });
        }
        Ok(g)
    }

    pub fn identity() -> Self {
        Rotation4(Matrix4::identity())
    }

    /// The orientation-reversing reflection `e4 ↦ −e4`.
    pub fn reflection() -> Self {
        Rotation4(Matrix4::from_diagonal(&Vector4::new(1.0, 1.0, 1.0, -1.0)))
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    pub fn det(&self) -> f64 {
        self.0.determinant()
    }

    pub fn is_special(&self) -> bool {
        self.det() > 0.0
    }

    pub fn apply(&self, v: &Vector4) -> Vector4 {
        self.0 * v
    }

    pub fn compose(&self, other: &Rotation4) -> Rotation4 {
        Rotation4(self.0 * other.0)
    }

    pub fn inverse(&self) -> Rotation4 {
        Rotation4(self.0.transpose())
    }
}

/// The rotation `x ↦ q1·x·q2⁻¹` of ℍ ≅ ℝ⁴.
pub fn quat_to_rot(q1: Quaternion, q2: Quaternion) -> Result<Rotation4> {
    let q1 = q1.check_unit()?;
    let q2 = q2.check_unit()?;
    Ok(quat_to_rot_unchecked(q1, q2))
}

pub(crate) fn quat_to_rot_unchecked(q1: Quaternion, q2: Quaternion) -> Rotation4 {
    let q2inv = q2.conj();
    let basis = [Quaternion::ONE, Quaternion::I, Quaternion::J, Quaternion::K];
    let cols: Vec<Vector4> = basis.iter().map(|&e| (q1 * e * q2inv).to_vector()).collect();
    Rotation4(Matrix4::from_columns(&cols))
}

/// Element of the subgroup S³₊: acts on Λ²₊ by rotation and fixes Λ²₋.
///
/// With the orientation `e1∧e2∧e3∧e4` and `ℍ ∋ x+iy+jz+kt`, this is left
/// multiplication `x ↦ q·x`.
pub fn s3_plus(q: Quaternion) -> Result<Rotation4> {
    quat_to_rot(q, Quaternion::ONE)
}

/// Element of the subgroup S³₋: acts on Λ²₋ by rotation and fixes Λ²₊.
///
/// Realized as right multiplication `x ↦ x·q⁻¹`.
pub fn s3_minus(q: Quaternion) -> Result<Rotation4> {
    quat_to_rot(Quaternion::ONE, q)
}

/// Matrix of `q ↦ (ω₊ coordinates of the action of s3_plus(q))`: the
/// standard rotation matrix of the unit quaternion `q`.
pub fn selfdual_rotation_of(q: Quaternion) -> Matrix3<f64> {
    let Quaternion { w, x, y, z } = q;
    Matrix3::new(
        w * w + x * x - y * y - z * z,
        2.0 * (x * y - w * z),
        2.0 * (x * z + w * y),
        2.0 * (x * y + w * z),
        w * w - x * x + y * y - z * z,
        2.0 * (y * z - w * x),
        2.0 * (x * z - w * y),
        2.0 * (y * z + w * x),
        w * w - x * x - y * y + z * z,
    )
}

/// The map `u ∧ v ↦ gu ∧ gv` on Λ²ℝ⁴.
pub fn induced_map(g: &Rotation4) -> Lambda2Map {
    let m = g.matrix();
    let cols: Vec<Vector6<f64>> = PAIRS
        .iter()
        .map(|&(a, b)| wedge(&m.column(a).into_owned(), &m.column(b).into_owned()).0)
        .collect();
    Lambda2Map::from_columns(&cols)
}

/// Checked version of [`induced_map`] for arbitrary 4×4 input.
pub fn induced_map_checked(m: Matrix4<f64>) -> Result<Lambda2Map> {
    Ok(induced_map(&Rotation4::new(m)?))
}

/// Restriction of a Λ² map to Λ²± in the ω± bases.
pub fn restrict(m: &Lambda2Map, sign: Sign) -> Matrix3<f64> {
    let b = half_basis(sign);
    b.transpose() * m * b
}

/// Haar-distributed unit quaternion (normalized Gaussian 4-vector).
pub fn haar_quaternion<R: Rng + ?Sized>(rng: &mut R) -> Quaternion {
    loop {
        let v = Vector4::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
        let n = v.norm();
        if n > 0.0 {
            return Quaternion::from_vector(&(v / n));
        }
    }
}

/// Haar-distributed element of SO(4).
pub fn haar_rotation<R: Rng + ?Sized>(rng: &mut R) -> Rotation4 {
    let q1 = haar_quaternion(rng);
    let q2 = haar_quaternion(rng);
    quat_to_rot_unchecked(q1, q2)
}
