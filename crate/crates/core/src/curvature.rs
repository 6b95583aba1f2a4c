//! Algebraic curvature operators on Λ²ℝ⁴.
//!
//! An operator is a symmetric 6×6 matrix in the bivector basis of
//! [`crate::lambda2`]. In the ω₊/ω₋ bases it has the block form
//! `[[A, B], [Bᵀ, C]]`; the first Bianchi identity is `tr A = tr C`,
//! `scal = 4 tr A`, `W± = A|C − (scal/12)·I`, and `B` carries the
//! traceless Ricci part.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use nalgebra::{Matrix3, Matrix4, Vector3};
use serde::{Deserialize, Serialize};

use crate::eigen::eigenvalues;
use crate::error::{Error, Result};
use crate::lambda2::{
    half_basis, hodge_star, induced_map, pair_index, wedge, Bivector, Lambda2Map, Rotation4,
    Sign, BASIS_LABEL, PAIRS,
};

/// Relative tolerance for the Bianchi-valid flag.
pub const BIANCHI_TOL: f64 = 1e-10;
/// Relative tolerance for symmetry of input matrices.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Tolerance on traces of the traceless decomposition blocks.
pub const TRACELESS_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvatureOperator(Lambda2Map);

impl CurvatureOperator {
    /// Validates symmetry; Bianchi validity is checked separately.
    pub fn new(m: Lambda2Map) -> Result<Self> {
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let residual = (m - m.transpose()).abs().max();
        if residual > SYMMETRY_TOL * (1.0 + m.norm()) {
            return Err(Error::NotSymmetric { residual });
        }
        Ok(Self::from_symmetric(m))
    }

    /// Validates symmetry and the first Bianchi identity.
    pub fn new_bianchi(m: Lambda2Map) -> Result<Self> {
        let r = Self::new(m)?;
        r.check_bianchi()?;
        Ok(r)
    }

    /// Symmetrizes `m` without checks.
    pub fn from_symmetric(m: Lambda2Map) -> Self {
        CurvatureOperator((m + m.transpose()) * 0.5)
    }

    pub fn identity() -> Self {
        CurvatureOperator(Lambda2Map::identity())
    }

    pub fn zero() -> Self {
        CurvatureOperator(Lambda2Map::zeros())
    }

    /// The Hodge star viewed as a (non-Bianchi) symmetric operator.
    pub fn star() -> Self {
        CurvatureOperator(hodge_star())
    }

    pub fn matrix(&self) -> &Lambda2Map {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// Trace inner product `tr(RᵀS)`.
    pub fn dot(&self, other: &CurvatureOperator) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn apply(&self, b: &Bivector) -> Bivector {
        Bivector(self.0 * b.0)
    }

    /// `R_{ijkl} = ⟨R(e_i∧e_j), e_k∧e_l⟩` with zero-based indices.
    pub fn component(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        match (pair_index(i, j), pair_index(k, l)) {
            (Some((a, s)), Some((b, t))) => s * t * self.0[(a, b)],
            _ => 0.0,
        }
    }

    /// Restriction to Λ²± in the ω± basis.
    pub fn block(&self, sign: Sign) -> Matrix3<f64> {
        let b = half_basis(sign);
        b.transpose() * self.0 * b
    }

    /// The off-diagonal block `⟨R ω₋_j, ω₊_i⟩`.
    pub fn mixed_block(&self) -> Matrix3<f64> {
        half_basis(Sign::Plus).transpose() * self.0 * half_basis(Sign::Minus)
    }

    pub fn bianchi_tolerance(&self) -> f64 {
        BIANCHI_TOL * (1.0 + self.norm())
    }

    pub fn is_bianchi_valid(&self) -> bool {
        bianchi_defect(self) <= self.bianchi_tolerance()
    }

    pub fn check_bianchi(&self) -> Result<()> {
        let defect = bianchi_defect(self);
        let tolerance = self.bianchi_tolerance();
        if defect > tolerance {
            return Err(Error::BianchiViolation { defect, tolerance });
        }
        Ok(())
    }

    pub fn square(&self) -> Self {
        CurvatureOperator::from_symmetric(self.0 * self.0)
    }
}

impl Add for CurvatureOperator {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        CurvatureOperator(self.0 + o.0)
    }
}

impl Sub for CurvatureOperator {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        CurvatureOperator(self.0 - o.0)
    }
}

impl Neg for CurvatureOperator {
    type Output = Self;
    fn neg(self) -> Self {
        CurvatureOperator(-self.0)
    }
}

impl Mul<f64> for CurvatureOperator {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        CurvatureOperator(self.0 * s)
    }
}

/// Largest cyclic sum `|R(x,y,z,t) + R(z,x,y,t) + R(y,z,x,t)|` over basis
/// 4-tuples.
pub fn bianchi_defect(r: &CurvatureOperator) -> f64 {
    let mut worst = 0.0f64;
    for x in 0..4 {
        for y in 0..4 {
            for z in 0..4 {
                for t in 0..4 {
                    let s = r.component(x, y, z, t)
                        + r.component(z, x, y, t)
                        + r.component(y, z, x, t);
                    worst = worst.max(s.abs());
                }
            }
        }
    }
    worst
}

/// `tr(R∘*)`; vanishes exactly on Bianchi-valid operators.
pub fn bianchi_trace(r: &CurvatureOperator) -> f64 {
    (r.0 * hodge_star()).trace()
}

/// Orthogonal projection onto the Bianchi kernel: `R − (tr(R∘*)/6)·*`.
pub fn bianchi_project(r: &CurvatureOperator) -> CurvatureOperator {
    CurvatureOperator(r.0 - hodge_star() * (bianchi_trace(r) / 6.0))
}

/// Ricci morphism `⟨ρ(R)x, y⟩ = Σᵢ ⟨R(x∧eᵢ), y∧eᵢ⟩`.
pub fn ricci(r: &CurvatureOperator) -> Matrix4<f64> {
    Matrix4::from_fn(|a, b| (0..4).map(|i| r.component(a, i, b, i)).sum())
}

/// Scalar curvature, twice the trace.
pub fn scalar(r: &CurvatureOperator) -> f64 {
    2.0 * r.0.trace()
}

/// `(A∧B)(x∧y) = ½(Ax∧By + Bx∧Ay)` for symmetric `A`, `B`.
pub fn wedge_sym(a: &Matrix4<f64>, b: &Matrix4<f64>) -> CurvatureOperator {
    let cols: Vec<_> = PAIRS
        .iter()
        .map(|&(i, j)| {
            let (ai, aj) = (a.column(i).into_owned(), a.column(j).into_owned());
            let (bi, bj) = (b.column(i).into_owned(), b.column(j).into_owned());
            (wedge(&ai, &bj) + wedge(&bi, &aj)).0 * 0.5
        })
        .collect();
    CurvatureOperator::from_symmetric(Lambda2Map::from_columns(&cols))
}

/// Irreducible pieces `scal`, `A₀`, `W₊`, `W₋` of an operator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decomposition {
    pub scal: f64,
    pub ric0: Matrix4<f64>,
    pub wplus: Matrix3<f64>,
    pub wminus: Matrix3<f64>,
}

impl Decomposition {
    pub fn zero() -> Self {
        Self {
            scal: 0.0,
            ric0: Matrix4::zeros(),
            wplus: Matrix3::zeros(),
            wminus: Matrix3::zeros(),
        }
    }

    pub fn scalar_only(scal: f64) -> Self {
        Self { scal, ..Self::zero() }
    }

    pub fn weyl(&self, sign: Sign) -> &Matrix3<f64> {
        match sign {
            Sign::Plus => &self.wplus,
            Sign::Minus => &self.wminus,
        }
    }

    /// Component operators `(R_Id, R₀, R_W₊, R_W₋)`.
    pub fn components(&self) -> [CurvatureOperator; 4] {
        [
            CurvatureOperator::identity() * (self.scal / 12.0),
            wedge_sym(&self.ric0, &Matrix4::identity()),
            embed_half(&self.wplus, Sign::Plus),
            embed_half(&self.wminus, Sign::Minus),
        ]
    }
}

/// Operator acting as `m` on Λ²± (ω± coordinates) and as zero elsewhere.
pub fn embed_half(m: &Matrix3<f64>, sign: Sign) -> CurvatureOperator {
    let b = half_basis(sign);
    CurvatureOperator::from_symmetric(b * m * b.transpose())
}

pub fn decompose(r: &CurvatureOperator) -> Result<Decomposition> {
    r.check_bianchi()?;
    let scal = scalar(r);
    let ric0 = ricci(r) - Matrix4::identity() * (scal / 4.0);
    let shift = Matrix3::identity() * (scal / 12.0);
    Ok(Decomposition {
        scal,
        ric0: (ric0 + ric0.transpose()) * 0.5,
        wplus: r.block(Sign::Plus) - shift,
        wminus: r.block(Sign::Minus) - shift,
    })
}

pub fn recompose(d: &Decomposition) -> Result<CurvatureOperator> {
    for (which, trace) in [
        ("traceless Ricci", d.ric0.trace()),
        ("W+", d.wplus.trace()),
        ("W-", d.wminus.trace()),
    ] {
        if trace.abs() > TRACELESS_TOL {
            return Err(Error::NotTraceless { which, trace });
        }
    }
    let [a, b, c, e] = d.components();
    Ok(a + b + c + e)
}

/// The projection `R ↦ R_Id + R_W±`.
pub fn half_projection(r: &CurvatureOperator, sign: Sign) -> Result<CurvatureOperator> {
    let d = decompose(r)?;
    let mut kept = Decomposition::scalar_only(d.scal);
    match sign {
        Sign::Plus => kept.wplus = d.wplus,
        Sign::Minus => kept.wminus = d.wminus,
    }
    recompose(&kept)
}

/// `⟨g.R(x∧y), z∧t⟩ = ⟨R(gx∧gy), gz∧gt⟩`, i.e. `Mᵀ R M` with
/// `M = induced_map(g)`. This is a right action:
/// `act(g, act(h, R)) = act(h·g, R)`.
pub fn act(g: &Rotation4, r: &CurvatureOperator) -> CurvatureOperator {
    let m = induced_map(g);
    CurvatureOperator::from_symmetric(m.transpose() * r.0 * m)
}

/// Sorted spectrum of a 3×3 symmetric block.
pub fn spectrum3(m: &Matrix3<f64>) -> [f64; 3] {
    eigenvalues(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelName {
    Sphere,
    Cp2,
    Cp2bar,
    S3xr,
    S2xs2,
    KaehlerWplus,
}

impl ModelName {
    pub const ALL: [ModelName; 6] = [
        ModelName::Sphere,
        ModelName::Cp2,
        ModelName::Cp2bar,
        ModelName::S3xr,
        ModelName::S2xs2,
        ModelName::KaehlerWplus,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelName::Sphere => "sphere",
            ModelName::Cp2 => "cp2",
            ModelName::Cp2bar => "cp2bar",
            ModelName::S3xr => "s3xr",
            ModelName::S2xs2 => "s2xs2",
            ModelName::KaehlerWplus => "kaehler_wplus",
        }
    }
}

impl fmt::Display for ModelName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ModelName::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::UnknownModel(s.to_string()))
    }
}

/// Named model operators. `scale` is the scalar curvature for `sphere`,
/// `cp2`, `cp2bar` and `kaehler_wplus`, and the inverse squared radius for
/// the products `s3xr` and `s2xs2`.
pub fn model(name: ModelName, scale: f64) -> Result<CurvatureOperator> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::NonPositiveScale(scale));
    }
    let op = match name {
        ModelName::Sphere => CurvatureOperator::identity() * (scale / 12.0),
        ModelName::Cp2 => cp2_blocks(scale),
        ModelName::Cp2bar => act(&Rotation4::reflection(), &cp2_blocks(scale)),
        ModelName::S3xr => diagonal_on_pairs(&[(0, 1), (0, 2), (1, 2)], scale),
        ModelName::S2xs2 => diagonal_on_pairs(&[(0, 1), (2, 3)], scale),
        ModelName::KaehlerWplus => recompose(&Decomposition {
            wplus: Matrix3::from_diagonal(&Vector3::new(scale / 6.0, -scale / 12.0, -scale / 12.0)),
            ..Decomposition::scalar_only(scale)
        })?,
    };
    Ok(op)
}

/// Kähler-form direction ω₁₊ carries `scal/4`; Λ²₋ carries `scal/12`.
fn cp2_blocks(scal: f64) -> CurvatureOperator {
    embed_half(&Matrix3::from_diagonal(&Vector3::new(scal / 4.0, 0.0, 0.0)), Sign::Plus)
        + embed_half(&(Matrix3::identity() * (scal / 12.0)), Sign::Minus)
}

fn diagonal_on_pairs(pairs: &[(usize, usize)], value: f64) -> CurvatureOperator {
    let mut m = Lambda2Map::zeros();
    for &(i, j) in pairs {
        let (k, _) = pair_index(i, j).expect("distinct indices");
        m[(k, k)] = value;
    }
    CurvatureOperator(m)
}

/// On-disk form of an operator: the basis label and the row-major matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OperatorDocument {
    pub basis: String,
    pub matrix: Vec<Vec<f64>>,
}

impl OperatorDocument {
    pub fn from_operator(r: &CurvatureOperator) -> Self {
        Self {
            basis: BASIS_LABEL.to_string(),
            matrix: matrix_rows(r.matrix()),
        }
    }

    /// Checks the basis label, shape and symmetry (not Bianchi validity).
    pub fn to_operator(&self) -> Result<CurvatureOperator> {
        if self.basis != BASIS_LABEL {
            return Err(Error::BasisMismatch {
                expected: BASIS_LABEL.to_string(),
                found: self.basis.clone(),
            });
        }
        if self.matrix.len() != 6 || self.matrix.iter().any(|row| row.len() != 6) {
            return Err(Error::MalformedMatrix("expected 6 rows of 6 numbers".into()));
        }
        let m = Lambda2Map::from_fn(|i, j| self.matrix[i][j]);
        CurvatureOperator::new(m)
    }
}

pub fn matrix_rows<const R: usize, const C: usize>(
    m: &nalgebra::SMatrix<f64, R, C>,
) -> Vec<Vec<f64>> {
    (0..R).map(|i| (0..C).map(|j| m[(i, j)]).collect()).collect()
}

/// Serializes to the operator JSON document. Floats use the shortest
/// representation that reads back to the identical `f64`.
pub fn operator_to_json(r: &CurvatureOperator) -> String {
    serde_json::to_string_pretty(&OperatorDocument::from_operator(r)).expect("finite matrix")
}

pub fn operator_from_json(text: &str) -> Result<CurvatureOperator> {
    let doc: OperatorDocument =
        serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))?;
    doc.to_operator()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::substream;
    use crate::lambda2::{haar_rotation, selfdual_basis};
    use crate::sampling::{random_bianchi, random_symmetric, random_traceless4};
    use rand_distr::{Distribution, StandardNormal};

    fn close(a: &CurvatureOperator, b: &CurvatureOperator, tol: f64) -> bool {
        (a.matrix() - b.matrix()).norm() <= tol
    }

    /// Evaluates the cyclic sum on general (non-basis) vectors, straight from
    /// the multilinear definition.
    fn cyclic_sum(r: &CurvatureOperator, x: &[f64; 4], y: &[f64; 4], z: &[f64; 4], t: &[f64; 4]) -> f64 {
        let v = |a: &[f64; 4]| crate::lambda2::Vector4::from_row_slice(a);
        let w = |a, b| wedge(&v(a), &v(b));
        let ev = |a, b, c, d| crate::lambda2::inner(&r.apply(&w(a, b)), &w(c, d));
        ev(x, y, z, t) + ev(z, x, y, t) + ev(y, z, x, t)
    }

    #[test]
    fn bianchi_defect_examples() {
        assert_eq!(bianchi_defect(&CurvatureOperator::identity()), 0.0);
        let star = CurvatureOperator::star();
        assert_eq!(bianchi_defect(&star), 3.0);
        let e = |i: usize| {
            let mut a = [0.0; 4];
            a[i] = 1.0;
            a
        };
        assert_eq!(cyclic_sum(&star, &e(0), &e(1), &e(2), &e(3)), 3.0);
    }

    #[test]
    fn bianchi_defect_vanishes_iff_star_trace_vanishes() {
        let mut rng = substream(21, 0);
        for _ in 0..1000 {
            let r = random_symmetric(&mut rng);
            // the defect is |tr(R∘*)|/2 exactly: only 1234-type cyclic sums survive
            assert!((bianchi_defect(&r) - bianchi_trace(&r).abs() / 2.0).abs() < 1e-12);
            let p = bianchi_project(&r);
            assert!(bianchi_defect(&p) <= 1e-12);
            assert!(bianchi_trace(&p).abs() <= 1e-12);
            assert!(close(&bianchi_project(&p), &p, 1e-14));
            // orthogonality of the removed part
            assert!((r - p).dot(&p).abs() < 1e-12 * (1.0 + r.norm() * r.norm()));
        }
    }

    #[test]
    fn bianchi_project_examples() {
        assert_eq!(bianchi_project(&CurvatureOperator::identity()), CurvatureOperator::identity());
        assert!(bianchi_project(&CurvatureOperator::star()).norm() < 1e-15);
    }

    #[test]
    fn ricci_examples() {
        assert_eq!(ricci(&CurvatureOperator::identity()), Matrix4::identity() * 3.0);
        assert_eq!(ricci(&CurvatureOperator::zero()), Matrix4::zeros());
        let cp2 = model(ModelName::Cp2, 12.0).unwrap();
        assert!((ricci(&cp2) - Matrix4::identity() * 3.0).norm() < 1e-14);
        let mut rng = substream(22, 0);
        for _ in 0..100 {
            let r = random_bianchi(&mut rng);
            let rc = ricci(&r);
            assert!((rc - rc.transpose()).norm() < 1e-14);
            assert!((rc.trace() - scalar(&r)).abs() < 1e-12);
        }
    }

    #[test]
    fn scalar_examples() {
        assert_eq!(scalar(&CurvatureOperator::identity()), 12.0);
        assert_eq!(scalar(&CurvatureOperator::zero()), 0.0);
        assert_eq!(scalar(&model(ModelName::S3xr, 1.0).unwrap()), 6.0);
    }

    #[test]
    fn wedge_sym_properties() {
        assert_eq!(
            wedge_sym(&Matrix4::identity(), &Matrix4::identity()),
            CurvatureOperator::identity()
        );
        let mut rng = substream(23, 0);
        for _ in 0..100 {
            let a0 = random_traceless4(&mut rng);
            let r = wedge_sym(&a0, &Matrix4::identity());
            assert!((ricci(&r) - a0).norm() < 1e-10);
            let a = Matrix4::from_fn(|_, _| StandardNormal.sample(&mut rng));
            let b = Matrix4::from_fn(|_, _| StandardNormal.sample(&mut rng));
            let ab = wedge_sym(&(a + a.transpose()), &(b + b.transpose()));
            assert!(bianchi_defect(&ab) <= 1e-12 * (1.0 + ab.norm()));
        }
    }

    #[test]
    fn decompose_examples() {
        let d = decompose(&CurvatureOperator::identity()).unwrap();
        assert_eq!(d.scal, 12.0);
        assert!(d.ric0.norm() < 1e-15);
        assert!(d.wplus.norm() < 1e-15 && d.wminus.norm() < 1e-15);

        let cp2 = decompose(&model(ModelName::Cp2, 12.0).unwrap()).unwrap();
        let spectrum = spectrum3(&cp2.wplus);
        for (got, want) in spectrum.iter().zip([-1.0, -1.0, 2.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(cp2.wminus.norm() < 1e-14);

        let s3 = decompose(&model(ModelName::S3xr, 1.0).unwrap()).unwrap();
        assert_eq!(s3.scal, 6.0);
        assert!(s3.wplus.norm() < 1e-15 && s3.wminus.norm() < 1e-15);
        let expect = Matrix4::from_diagonal(&nalgebra::Vector4::new(0.5, 0.5, 0.5, -1.5));
        assert!((s3.ric0 - expect).norm() < 1e-15);

        let mut rng = substream(24, 0);
        for _ in 0..100 {
            let a0 = random_traceless4(&mut rng);
            let d = decompose(&wedge_sym(&a0, &Matrix4::identity())).unwrap();
            assert!(d.scal.abs() < 1e-12);
            assert!((d.ric0 - a0).norm() < 1e-12);
            assert!(d.wplus.norm() < 1e-12 && d.wminus.norm() < 1e-12);
        }

        assert!(matches!(
            decompose(&CurvatureOperator::star()),
            Err(Error::BianchiViolation { .. })
        ));
        assert_eq!(decompose(&CurvatureOperator::zero()).unwrap(), Decomposition::zero());
    }

    #[test]
    fn decomposition_roundtrip_and_orthogonality() {
        let mut rng = substream(25, 0);
        for _ in 0..1000 {
            let r = random_bianchi(&mut rng);
            let d = decompose(&r).unwrap();
            assert!(d.ric0.trace().abs() < 1e-10);
            assert!(d.wplus.trace().abs() < 1e-10);
            assert!(d.wminus.trace().abs() < 1e-10);
            assert!(close(&recompose(&d).unwrap(), &r, 1e-10));
            let parts = d.components();
            for i in 0..4 {
                for j in (i + 1)..4 {
                    assert!(parts[i].dot(&parts[j]).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn component_dimensions() {
        // spans of the images of each piece: 1, 9, 5, 5
        let mut rng = substream(26, 0);
        let samples: Vec<Decomposition> = (0..40)
            .map(|_| decompose(&random_bianchi(&mut rng)).unwrap())
            .collect();
        let rank = |k: usize| {
            let rows: Vec<_> = samples
                .iter()
                .map(|d| {
                    let m = *d.components()[k].matrix();
                    nalgebra::RowSVector::<f64, 36>::from_iterator(m.iter().copied())
                })
                .collect();
            nalgebra::DMatrix::from_rows(&rows.iter().map(|r| nalgebra::RowDVector::from_iterator(36, r.iter().copied())).collect::<Vec<_>>())
                .rank(1e-9)
        };
        assert_eq!([rank(0), rank(1), rank(2), rank(3)], [1, 9, 5, 5]);
    }

    #[test]
    fn recompose_examples() {
        assert_eq!(
            recompose(&Decomposition::scalar_only(12.0)).unwrap(),
            CurvatureOperator::identity()
        );
        let d = Decomposition {
            wplus: Matrix3::from_diagonal(&Vector3::new(2.0, -1.0, -1.0)),
            ..Decomposition::zero()
        };
        let r = recompose(&d).unwrap();
        assert!(r.matrix().trace().abs() < 1e-15);
        assert!(r.block(Sign::Minus).norm() < 1e-15);
        let bad = Decomposition {
            wminus: Matrix3::identity(),
            ..Decomposition::zero()
        };
        assert!(matches!(recompose(&bad), Err(Error::NotTraceless { which: "W-", .. })));
    }

    #[test]
    fn ricci_of_scalar_plus_traceless() {
        let mut rng = substream(27, 0);
        for _ in 0..100 {
            let a0 = random_traceless4(&mut rng);
            let scal: f64 = StandardNormal.sample(&mut rng);
            let r = recompose(&Decomposition {
                scal,
                ric0: a0,
                ..Decomposition::zero()
            })
            .unwrap();
            assert!((ricci(&r) - (a0 + Matrix4::identity() * (scal / 4.0))).norm() < 1e-10);
        }
    }

    #[test]
    fn action_properties() {
        let mut rng = substream(28, 0);
        let r0 = random_bianchi(&mut rng);
        assert!(close(&act(&Rotation4::identity(), &r0), &r0, 1e-15));
        for _ in 0..100 {
            let g = haar_rotation(&mut rng);
            let h = haar_rotation(&mut rng);
            let r = random_bianchi(&mut rng);
            let gr = act(&g, &r);
            assert!((scalar(&gr) - scalar(&r)).abs() < 1e-10);
            assert!(gr.is_bianchi_valid());
            // right action: acting by h then by g equals acting by h·g
            assert!(close(&act(&g, &act(&h, &r)), &act(&h.compose(&g), &r), 1e-10));
            let (d, dg) = (decompose(&r).unwrap(), decompose(&gr).unwrap());
            for sign in [Sign::Plus, Sign::Minus] {
                let (a, b) = (spectrum3(d.weyl(sign)), spectrum3(dg.weyl(sign)));
                for k in 0..3 {
                    assert!((a[k] - b[k]).abs() < 1e-10);
                }
            }
            // orientation reversal swaps the Weyl spectra
            let fr = decompose(&act(&Rotation4::reflection(), &r)).unwrap();
            let (a, b) = (spectrum3(&fr.wplus), spectrum3(&d.wminus));
            for k in 0..3 {
                assert!((a[k] - b[k]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn models_are_valid() {
        for name in ModelName::ALL {
            let r = model(name, 3.0).unwrap();
            assert!(bianchi_defect(&r) <= 1e-12, "{name}");
            assert!((r.block(Sign::Plus).trace() - r.block(Sign::Minus).trace()).abs() < 1e-12);
        }
        assert_eq!(model(ModelName::Sphere, 12.0).unwrap(), CurvatureOperator::identity());
        let cp2 = model(ModelName::Cp2, 12.0).unwrap();
        assert!(close(&model(ModelName::KaehlerWplus, 12.0).unwrap(), &cp2, 1e-14));
        let bar = decompose(&model(ModelName::Cp2bar, 12.0).unwrap()).unwrap();
        assert!(bar.wplus.norm() < 1e-14);
        assert!(matches!(model(ModelName::Cp2, 0.0), Err(Error::NonPositiveScale(_))));
        assert!(matches!("cp3".parse::<ModelName>(), Err(Error::UnknownModel(_))));
        assert_eq!("kaehler_wplus".parse::<ModelName>().unwrap(), ModelName::KaehlerWplus);
        // Kähler form direction
        let w = selfdual_basis(Sign::Plus)[0];
        assert!((cp2.apply(&w) - w * 3.0).norm() < 1e-14);
    }

    #[test]
    fn operator_json_roundtrip_and_errors() {
        let mut rng = substream(29, 0);
        let r = random_bianchi(&mut rng);
        let back = operator_from_json(&operator_to_json(&r)).unwrap();
        assert_eq!(back, r);

        assert!(matches!(operator_from_json("{"), Err(Error::Json(_))));
        let mut doc = OperatorDocument::from_operator(&r);
        doc.basis = "e12,e13,e14,e23,e34,e24".into();
        assert!(matches!(doc.to_operator(), Err(Error::BasisMismatch { .. })));
        let mut doc = OperatorDocument::from_operator(&r);
        doc.matrix[0][1] += 1e-3;
        assert!(matches!(doc.to_operator(), Err(Error::NotSymmetric { .. })));
        let mut doc = OperatorDocument::from_operator(&r);
        doc.matrix.pop();
        assert!(matches!(doc.to_operator(), Err(Error::MalformedMatrix(_))));
    }
}
