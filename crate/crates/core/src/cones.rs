//! Membership margins for the curvature cones.
//!
//! For a Bianchi-valid operator the PIC₊ margin is `scal/6 − ν₊`, where
//! `ν₊` is the largest eigenvalue of `W₊`. The same number equals the sum of
//! the two smallest eigenvalues of the ω₊ block `scal/12·I + W₊`, and half
//! the minimum of the isotropic curvature over oriented orthonormal frames.

use std::fmt;

use nalgebra::{Matrix3, Matrix4};
use serde::{Deserialize, Serialize};

use crate::curvature::{decompose, scalar, CurvatureOperator};
use crate::eigen::{eigenvalues, SymmetricEigen};
use crate::error::{Error, Result};
use crate::exec::{map_chunks, substream, Execution};
use crate::lambda2::{
    bracket, half_basis, haar_rotation, hodge_star, inner, projector, to_so4, wedge, Bivector,
    ComplexBivector, Rotation4, Sign,
};

/// Relative tolerance used for boundary classification by default.
pub const DEFAULT_REL_TOL: f64 = 1e-9;

/// Steps of frame descent in [`min_isotropic`].
pub const POLISH_STEPS: usize = 500;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConeId {
    Scal,
    ICplus,
    ICminus,
    IC,
}

impl ConeId {
    pub const ALL: [ConeId; 4] = [ConeId::Scal, ConeId::ICplus, ConeId::ICminus, ConeId::IC];

    pub fn as_str(self) -> &'static str {
        match self {
            ConeId::Scal => "scal",
            ConeId::ICplus => "ic_plus",
            ConeId::ICminus => "ic_minus",
            ConeId::IC => "ic",
        }
    }
}

impl fmt::Display for ConeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `scal/6 − λ_max(W±)`: positive iff PIC±, nonnegative iff NNIC±.
pub fn pic_margin(r: &CurvatureOperator, sign: Sign) -> Result<f64> {
    let d = decompose(r)?;
    Ok(d.scal / 6.0 - eigenvalues(d.weyl(sign))[2])
}

/// Sum of the two smallest eigenvalues.
pub fn two_positive_margin(m: &Matrix3<f64>) -> f64 {
    let e = eigenvalues(m);
    e[0] + e[1]
}

/// Margin of `r` against `cone`; the sign convention of [`MembershipReport`].
pub fn margin(r: &CurvatureOperator, cone: ConeId) -> Result<f64> {
    match cone {
        ConeId::Scal => Ok(scalar(r)),
        ConeId::ICplus => pic_margin(r, Sign::Plus),
        ConeId::ICminus => pic_margin(r, Sign::Minus),
        ConeId::IC => Ok(pic_margin(r, Sign::Plus)?.min(pic_margin(r, Sign::Minus)?)),
    }
}

/// An oriented orthonormal frame of ℝ⁴ (columns of a rotation).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame4(Rotation4);

impl Frame4 {
    pub fn new(g: Rotation4) -> Result<Self> {
        if !g.is_special() {
            return Err(Error::NotSpecialOrthogonal { det: g.det() });
        }
        Ok(Frame4(g))
    }

    pub fn standard() -> Self {
        Frame4(Rotation4::identity())
    }

    pub fn rotation(&self) -> &Rotation4 {
        &self.0
    }

    fn column(&self, k: usize) -> crate::lambda2::Vector4 {
        self.0.matrix().column(k).into_owned()
    }

    /// The pair `(f1∧f3 − f2∧f4, f1∧f4 + f2∧f3)` spanning the real and
    /// imaginary parts of `(f1 + i f2) ∧ (f3 + i f4)`.
    pub fn isotropic_pair(&self) -> (Bivector, Bivector) {
        let f: [_; 4] = std::array::from_fn(|k| self.column(k));
        (
            wedge(&f[0], &f[2]) - wedge(&f[1], &f[3]),
            wedge(&f[0], &f[3]) + wedge(&f[1], &f[2]),
        )
    }
}

/// Hermitian value `⟨R ω, ω̄⟩` for `ω = (f1 + i f2) ∧ (f3 + i f4)`.
pub fn isotropic_value(r: &CurvatureOperator, f: &Frame4) -> f64 {
    let (u, v) = f.isotropic_pair();
    inner(&r.apply(&u), &u) + inner(&r.apply(&v), &v)
}

/// Isotropic value on Λ²±: for `Minus` the frame's last vector is flipped,
/// which places `ω` in Λ²₋ ⊗ ℂ.
pub fn isotropic_value_signed(r: &CurvatureOperator, f: &Frame4, sign: Sign) -> f64 {
    let (u, v) = signed_pair(f.rotation(), sign);
    inner(&r.apply(&u), &u) + inner(&r.apply(&v), &v)
}

fn signed_pair(g: &Rotation4, sign: Sign) -> (Bivector, Bivector) {
    let m = g.matrix();
    let s = sign.value();
    let f = |k: usize| m.column(k).into_owned();
    let f4 = f(3) * s;
    (
        wedge(&f(0), &f(2)) - wedge(&f(1), &f4),
        wedge(&f(0), &f4) + wedge(&f(1), &f(2)),
    )
}

fn frame_objective(r: &CurvatureOperator, g: &Rotation4, sign: Sign) -> f64 {
    let (u, v) = signed_pair(g, sign);
    inner(&r.apply(&u), &u) + inner(&r.apply(&v), &v)
}

/// Gradient of `t ↦ f(g·exp(tX))` over the basis bivectors `X = e_a∧e_b`.
fn frame_gradient(r: &CurvatureOperator, g: &Rotation4, sign: Sign) -> Bivector {
    let (u, v) = signed_pair(g, sign);
    let (ru, rv) = (r.apply(&u), r.apply(&v));
    // d/dt M(g exp tX) b0 = M(g) [x, b0] and M(g)[x, b0] = [g x, M(g) b0]
    let gm = g.matrix();
    let mut grad = Bivector::zero();
    for k in 0..6 {
        let (a, b) = crate::lambda2::PAIRS[k];
        let x = wedge(&gm.column(a).into_owned(), &gm.column(b).into_owned());
        grad.0[k] = 2.0 * (inner(&ru, &bracket(&x, &u)) + inner(&rv, &bracket(&x, &v)));
    }
    grad
}

/// Cayley map of a skew matrix; exactly orthogonal up to rounding.
fn cayley(x: &Matrix4<f64>) -> Matrix4<f64> {
    let i = Matrix4::identity();
    (i - x * 0.5).try_inverse().expect("I - X/2 is invertible for skew X") * (i + x * 0.5)
}

fn reorthonormalize(m: &Matrix4<f64>) -> Rotation4 {
    let q = m.qr();
    let mut qm = q.q();
    let r = q.r();
    for k in 0..4 {
        if r[(k, k)] < 0.0 {
            let c = -qm.column(k);
            qm.set_column(k, &c);
        }
    }
    Rotation4::new(qm).expect("QR factor is orthogonal")
}

/// Gradient descent on SO(4) with a backtracking (Armijo) step.
fn polish_frame(r: &CurvatureOperator, start: Rotation4, sign: Sign) -> (Rotation4, f64) {
    let mut g = start;
    let mut value = frame_objective(r, &g, sign);
    let mut step = 1.0 / (1.0 + r.norm());
    for _ in 0..POLISH_STEPS {
        let grad = frame_gradient(r, &g, sign);
        if grad.norm() <= 1e-15 * (1.0 + r.norm()) {
            break;
        }
        let x = to_so4(&grad);
        let slope = grad.norm().powi(2);
        let mut accepted = false;
        while step > 1e-18 {
            let trial = reorthonormalize(&(g.matrix() * cayley(&(x * -step))));
            let tv = frame_objective(r, &trial, sign);
            // Armijo condition; plain decrease lets the step sit near 2/L and stall
            if tv <= value - 0.25 * step * slope {
                g = trial;
                value = tv;
                accepted = true;
                step *= 2.0;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (g, value)
}

/// Estimated minimum of the isotropic value over oriented frames: Haar
/// samples (via two quaternions), optionally refined by local descent.
pub fn min_isotropic(
    r: &CurvatureOperator,
    sign: Sign,
    samples: usize,
    seed: u64,
    polish: bool,
) -> Result<f64> {
    min_isotropic_with(Execution::default(), r, sign, samples, seed, polish)
}

pub fn min_isotropic_with(
    exec: Execution,
    r: &CurvatureOperator,
    sign: Sign,
    samples: usize,
    seed: u64,
    polish: bool,
) -> Result<f64> {
    if samples == 0 {
        return Err(Error::NoSamples);
    }
    let best = map_chunks(exec, samples, |c, _, len| {
        let mut rng = substream(seed, c as u64);
        let mut best = (f64::INFINITY, Rotation4::identity());
        for _ in 0..len {
            let g = haar_rotation(&mut rng);
            let v = frame_objective(r, &g, sign);
            if v < best.0 {
                best = (v, g);
            }
        }
        best
    })
    .into_iter()
    .fold((f64::INFINITY, Rotation4::identity()), |a, b| if b.0 < a.0 { b } else { a });
    if !polish {
        return Ok(best.0);
    }
    Ok(polish_frame(r, best.1, sign).1.min(best.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub scal: f64,
    pub ic_plus: f64,
    pub ic_minus: f64,
    pub ic: f64,
    /// Comma-separated list of the satisfied conditions, `PIC` when both
    /// halves are strict, or `neither`.
    pub class: String,
}

impl MembershipReport {
    pub fn margin(&self, cone: ConeId) -> f64 {
        match cone {
            ConeId::Scal => self.scal,
            ConeId::ICplus => self.ic_plus,
            ConeId::ICminus => self.ic_minus,
            ConeId::IC => self.ic,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("finite margins")
    }
}

pub fn default_tolerance(r: &CurvatureOperator) -> f64 {
    DEFAULT_REL_TOL * (1.0 + r.norm())
}

fn half_class(m: f64, tol: f64, label: &str) -> Option<String> {
    if m > tol {
        Some(format!("PIC{label}"))
    } else if m >= -tol {
        Some(format!("NNIC{label}"))
    } else {
        None
    }
}

pub fn membership(r: &CurvatureOperator, tol: f64) -> Result<MembershipReport> {
    let d = decompose(r)?;
    let plus = d.scal / 6.0 - eigenvalues(&d.wplus)[2];
    let minus = d.scal / 6.0 - eigenvalues(&d.wminus)[2];
    let class = if plus > tol && minus > tol {
        "PIC".to_string()
    } else {
        let parts: Vec<String> = [half_class(plus, tol, "+"), half_class(minus, tol, "-")]
            .into_iter()
            .flatten()
            .collect();
        if parts.is_empty() {
            "neither".to_string()
        } else {
            parts.join(",")
        }
    };
    Ok(MembershipReport {
        scal: d.scal,
        ic_plus: plus,
        ic_minus: minus,
        ic: plus.min(minus),
        class,
    })
}

/// Largest `κ ≥ 0` with `R − κ·Id` still in `cone`.
///
/// Subtracting `κ·Id` lowers the scalar curvature by `12κ` and leaves the
/// Weyl parts alone, so the IC± margins drop by `2κ`.
pub fn inradius(r: &CurvatureOperator, cone: ConeId) -> Result<f64> {
    inradius_tol(r, cone, default_tolerance(r))
}

pub fn inradius_tol(r: &CurvatureOperator, cone: ConeId, tol: f64) -> Result<f64> {
    let m = margin(r, cone)?;
    if m < -tol {
        return Err(Error::OutsideCone {
            cone: cone.as_str(),
            margin: m,
        });
    }
    let kappa = match cone {
        ConeId::Scal => m / 12.0,
        _ => m / 2.0,
    };
    Ok(kappa.max(0.0))
}

/// Membership in `S = {ω ∈ Λ²±ℂ⁴ : tr(φ(ω)²) = 0}`.
pub fn in_wilking_set(w: &ComplexBivector, sign: Sign) -> bool {
    in_wilking_set_tol(w, sign, 1e-10)
}

pub fn in_wilking_set_tol(w: &ComplexBivector, sign: Sign, tol: f64) -> bool {
    let scale = tol * (1.0 + w.hermitian_norm2());
    let p = projector(sign);
    let inside = (Bivector::apply(&p, &w.re) - w.re).norm() <= scale
        && (Bivector::apply(&p, &w.im) - w.im).norm() <= scale;
    let (re, im) = wilking_trace(w);
    inside && re.abs() <= scale && im.abs() <= scale
}

/// `tr(φ(ω)²)` of the complex-linear extension of `φ`, as `(re, im)`.
pub fn wilking_trace(w: &ComplexBivector) -> (f64, f64) {
    let (a, b) = (to_so4(&w.re), to_so4(&w.im));
    ((a * a - b * b).trace(), (a * b + b * a).trace())
}

/// Hermitian evaluation `⟨R re, re⟩ + ⟨R im, im⟩`.
pub fn wilking_value(r: &CurvatureOperator, w: &ComplexBivector) -> f64 {
    inner(&r.apply(&w.re), &w.re) + inner(&r.apply(&w.im), &w.im)
}

/// Unit element `re + i·im` of the Wilking set built from an orthonormal
/// pair of Λ²± taken from the columns of `rot`.
pub fn wilking_element(rot: &Matrix3<f64>, sign: Sign) -> ComplexBivector {
    let b = half_basis(sign);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    ComplexBivector::new(
        Bivector(b * rot.column(0)) * r,
        Bivector(b * rot.column(1)) * r,
    )
}

/// Minimum of the Wilking evaluation over sampled unit elements of `S`.
pub fn wilking_min_sampled(r: &CurvatureOperator, sign: Sign, samples: usize, seed: u64) -> f64 {
    let mut rng = substream(seed, 0);
    (0..samples)
        .map(|_| wilking_value(r, &wilking_element(&crate::sampling::random_rotation3(&mut rng), sign)))
        .fold(f64::INFINITY, f64::min)
}

/// Exact minimum of the Wilking evaluation over unit elements of `S`:
/// half the 2-positivity margin of the ω± block.
pub fn wilking_min_exact(r: &CurvatureOperator, sign: Sign) -> f64 {
    let e = SymmetricEigen::new(&r.block(sign));
    let rot = e.vectors;
    wilking_value(r, &wilking_element(&rot, sign))
}

/// The standard-orientation check `*` commutes with the action of `g`.
pub fn preserves_orientation(g: &Rotation4) -> bool {
    let m = crate::lambda2::induced_map(g);
    (m * hodge_star() - hodge_star() * m).norm() < 1e-10
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::{act, model, ModelName};
    use crate::lambda2::{haar_quaternion, quat_to_rot, selfdual_basis};
    use crate::sampling::{random_bianchi, random_rotation3};

    fn quartic(r: &CurvatureOperator, f: &Frame4) -> f64 {
        // R_{1313}+R_{1414}+R_{2323}+R_{2424}−2R_{1234} in the frame
        let g = f.rotation();
        let fr = act(g, r);
        fr.component(0, 2, 0, 2) + fr.component(0, 3, 0, 3) + fr.component(1, 2, 1, 2)
            + fr.component(1, 3, 1, 3)
            - 2.0 * fr.component(0, 1, 2, 3)
    }

    #[test]
    fn pic_margin_examples() {
        let id = CurvatureOperator::identity();
        assert!((pic_margin(&id, Sign::Plus).unwrap() - 2.0).abs() < 1e-14);
        let cp2 = model(ModelName::Cp2, 12.0).unwrap();
        assert!(pic_margin(&cp2, Sign::Plus).unwrap().abs() < 1e-12);
        assert!((pic_margin(&cp2, Sign::Minus).unwrap() - 2.0).abs() < 1e-12);
        let s3 = model(ModelName::S3xr, 1.0).unwrap();
        assert!((pic_margin(&s3, Sign::Plus).unwrap() - 1.0).abs() < 1e-14);
        assert!(matches!(
            pic_margin(&CurvatureOperator::star(), Sign::Plus),
            Err(Error::BianchiViolation { .. })
        ));
    }

    #[test]
    fn two_positive_examples() {
        assert_eq!(two_positive_margin(&Matrix3::identity()), 2.0);
        let m = Matrix3::from_diagonal(&nalgebra::Vector3::new(-1.0, -1.0, 3.0));
        assert_eq!(two_positive_margin(&m), -2.0);
        let mut rng = substream(31, 0);
        for _ in 0..1000 {
            let r = random_bianchi(&mut rng);
            for sign in [Sign::Plus, Sign::Minus] {
                let a = two_positive_margin(&r.block(sign));
                assert!((a - pic_margin(&r, sign).unwrap()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn isotropic_value_examples() {
        let id = CurvatureOperator::identity();
        assert!((isotropic_value(&id, &Frame4::standard()) - 4.0).abs() < 1e-15);
        let s2 = model(ModelName::S2xs2, 1.0).unwrap();
        assert_eq!(isotropic_value(&s2, &Frame4::standard()), 0.0);
        assert!(Frame4::new(Rotation4::reflection()).is_err());

        let mut rng = substream(32, 0);
        for _ in 0..100 {
            let r = random_bianchi(&mut rng);
            let f = Frame4::new(haar_rotation(&mut rng)).unwrap();
            let (a, b) = (isotropic_value(&r, &f), quartic(&r, &f));
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
            assert_eq!(isotropic_value_signed(&r, &f, Sign::Plus), a);
            // the isotropic pair lies in Λ²₊
            let (u, v) = f.isotropic_pair();
            let p = projector(Sign::Plus);
            assert!((Bivector::apply(&p, &u) - u).norm() < 1e-12);
            assert!((Bivector::apply(&p, &v) - v).norm() < 1e-12);
            let (u, v) = signed_pair(f.rotation(), Sign::Minus);
            let p = projector(Sign::Minus);
            assert!((Bivector::apply(&p, &u) - u).norm() < 1e-12);
            assert!((Bivector::apply(&p, &v) - v).norm() < 1e-12);
        }
    }

    #[test]
    fn frame_gradient_matches_finite_differences() {
        let mut rng = substream(33, 0);
        for _ in 0..10 {
            let r = random_bianchi(&mut rng);
            let g = haar_rotation(&mut rng);
            for sign in [Sign::Plus, Sign::Minus] {
                let grad = frame_gradient(&r, &g, sign);
                for k in 0..6 {
                    let x = to_so4(&Bivector::unit(k));
                    let h = 1e-6;
                    let fp = frame_objective(&r, &Rotation4::new(g.matrix() * cayley(&(x * h))).unwrap(), sign);
                    let fm = frame_objective(&r, &Rotation4::new(g.matrix() * cayley(&(x * -h))).unwrap(), sign);
                    let fd = (fp - fm) / (2.0 * h);
                    assert!((fd - grad.0[k]).abs() < 1e-6 * (1.0 + r.norm()), "{fd} vs {}", grad.0[k]);
                }
            }
        }
    }

    #[test]
    fn min_isotropic_examples() {
        let id = CurvatureOperator::identity();
        let m = min_isotropic(&id, Sign::Plus, 10_000, 1, true).unwrap();
        assert!((m - 4.0).abs() < 1e-6);
        let cp2 = model(ModelName::Cp2, 12.0).unwrap();
        let m = min_isotropic(&cp2, Sign::Plus, 100_000, 2, true).unwrap();
        assert!(m.abs() < 1e-4, "{m}");
        assert!(matches!(min_isotropic(&id, Sign::Plus, 0, 1, false), Err(Error::NoSamples)));
    }

    #[test]
    fn min_isotropic_matches_two_positivity() {
        let mut rng = substream(34, 0);
        for i in 0..50 {
            let r = random_bianchi(&mut rng);
            for sign in [Sign::Plus, Sign::Minus] {
                let exact = 2.0 * two_positive_margin(&r.block(sign));
                let got = min_isotropic(&r, sign, 2_000, 100 + i, true).unwrap();
                assert!((got - exact).abs() < 1e-4, "{got} vs {exact}");
                assert!(got >= exact - 1e-10);
            }
        }
    }

    #[test]
    fn membership_examples() {
        let tol = 1e-9;
        let id = membership(&CurvatureOperator::identity(), tol).unwrap();
        assert!(id.scal > 0.0 && id.ic_plus > 0.0 && id.ic_minus > 0.0 && id.ic > 0.0);
        assert_eq!(id.class, "PIC");
        let s2 = membership(&model(ModelName::S2xs2, 1.0).unwrap(), tol).unwrap();
        assert!(s2.ic_plus.abs() < 1e-12 && s2.ic_minus.abs() < 1e-12);
        assert_eq!(s2.class, "NNIC+,NNIC-");
        let neg = membership(&(-CurvatureOperator::identity()), tol).unwrap();
        assert_eq!(neg.scal, -12.0);
        assert!(neg.ic_plus < 0.0 && neg.ic_minus < 0.0 && neg.ic < 0.0);
        assert_eq!(neg.class, "neither");
        let cp2 = membership(&model(ModelName::Cp2, 12.0).unwrap(), tol).unwrap();
        assert_eq!(cp2.class, "NNIC+,PIC-");
        let json: serde_json::Value = serde_json::from_str(&cp2.to_json()).unwrap();
        for key in ["scal", "ic_plus", "ic_minus", "ic", "class"] {
            assert!(json.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn inradius_examples() {
        let id = CurvatureOperator::identity();
        assert!((inradius(&id, ConeId::ICplus).unwrap() - 1.0).abs() < 1e-15);
        assert!((inradius(&id, ConeId::Scal).unwrap() - 1.0).abs() < 1e-15);
        let cp2 = model(ModelName::Cp2, 12.0).unwrap();
        assert!(inradius(&cp2, ConeId::ICplus).unwrap().abs() < 1e-12);
        assert!(matches!(
            inradius(&(-id), ConeId::IC),
            Err(Error::OutsideCone { .. })
        ));

        let mut rng = substream(35, 0);
        let mut tested = 0;
        while tested < 100 {
            let r = random_bianchi(&mut rng);
            let m = pic_margin(&r, Sign::Plus).unwrap();
            let r = if m < 0.0 { r + id * (-m / 2.0 + 0.5) } else { r };
            let k = inradius(&r, ConeId::ICplus).unwrap();
            let shifted = r - id * k;
            assert!(pic_margin(&shifted, Sign::Plus).unwrap().abs() < 1e-10);
            // bisection cross-check of the supremum
            let (mut lo, mut hi) = (0.0, 10.0 * (1.0 + r.norm()));
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if pic_margin(&(r - id * mid), Sign::Plus).unwrap() >= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            assert!((lo - k).abs() < 1e-10);
            tested += 1;
        }
    }

    #[test]
    fn wilking_set_examples() {
        let [w1, w2, _] = selfdual_basis(Sign::Plus);
        let w = ComplexBivector::new(w1, w2);
        assert!(in_wilking_set(&w, Sign::Plus));
        assert!(!in_wilking_set(&w, Sign::Minus));
        assert!((wilking_value(&CurvatureOperator::identity(), &w) - 2.0).abs() < 1e-15);
        let bad = ComplexBivector::new(w1, w1);
        assert!(!in_wilking_set(&bad, Sign::Plus));
        // tr(φ(ω)²) = −2 ⟨ω, ω⟩ for the bilinear extension
        let mut rng = substream(36, 0);
        for _ in 0..50 {
            let re = crate::sampling::random_symmetric(&mut rng).matrix().column(0).into_owned();
            let im = crate::sampling::random_symmetric(&mut rng).matrix().column(1).into_owned();
            let w = ComplexBivector::new(Bivector(re), Bivector(im));
            let (tr_re, tr_im) = wilking_trace(&w);
            let (sq_re, sq_im) = w.bilinear_square();
            assert!((tr_re + 2.0 * sq_re).abs() < 1e-12 * (1.0 + sq_re.abs()));
            assert!((tr_im + 2.0 * sq_im).abs() < 1e-12 * (1.0 + sq_im.abs()));
            let e = wilking_element(&random_rotation3(&mut rng), Sign::Minus);
            assert!(in_wilking_set(&e, Sign::Minus));
        }
    }

    #[test]
    fn wilking_minimum_tracks_two_positivity() {
        let mut rng = substream(37, 0);
        for i in 0..200 {
            let r = random_bianchi(&mut rng);
            let margin = two_positive_margin(&r.block(Sign::Plus));
            let exact = wilking_min_exact(&r, Sign::Plus);
            assert!((2.0 * exact - margin).abs() < 1e-10);
            let sampled = wilking_min_sampled(&r, Sign::Plus, 4000, i);
            assert!(sampled >= exact - 1e-12);
            if margin.abs() > 0.1 {
                assert_eq!(sampled.signum(), margin.signum());
            }
        }
    }

    #[test]
    fn invariance_and_orientation_swap() {
        let mut rng = substream(38, 0);
        for _ in 0..100 {
            let r = random_bianchi(&mut rng);
            let g = quat_to_rot(haar_quaternion(&mut rng), haar_quaternion(&mut rng)).unwrap();
            assert!(preserves_orientation(&g));
            assert!(!preserves_orientation(&Rotation4::reflection()));
            for sign in [Sign::Plus, Sign::Minus] {
                let a = pic_margin(&act(&g, &r), sign).unwrap();
                assert!((a - pic_margin(&r, sign).unwrap()).abs() < 1e-10);
                let b = pic_margin(&act(&Rotation4::reflection(), &r), sign).unwrap();
                assert!((b - pic_margin(&r, sign.flip()).unwrap()).abs() < 1e-10);
            }
            let rep = membership(&r, 1e-9).unwrap();
            assert_eq!(rep.ic, rep.ic_plus.min(rep.ic_minus));
        }
    }

    #[test]
    fn scalar_flat_nnic_plus_has_no_self_dual_weyl() {
        // with scal = 0 the margin is −ν₊, and a traceless W₊ ≠ 0 has ν₊ > 0
        let mut rng = substream(39, 0);
        for _ in 0..100 {
            let mut d = decompose(&random_bianchi(&mut rng)).unwrap();
            d.scal = 0.0;
            let flat = crate::curvature::recompose(&d).unwrap();
            let m = pic_margin(&flat, Sign::Plus).unwrap();
            assert!(m < 0.0);
            assert!(-m >= d.wplus.norm() / 6f64.sqrt() - 1e-12);
            d.wplus = Matrix3::zeros();
            let flat = crate::curvature::recompose(&d).unwrap();
            assert!(pic_margin(&flat, Sign::Plus).unwrap().abs() < 1e-12);
        }
    }
}
