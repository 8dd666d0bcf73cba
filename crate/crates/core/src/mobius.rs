//! 2×2 complex matrices acting as Möbius transformations, the five
//! one-parameter subgroups used to define Möbius solutions, and the Iwasawa
//! factorization of SL(2,ℂ).

use crate::geometry::ExtendedPoint;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::ops::Mul;
use thiserror::Error;

/// Tolerance for `det = 1` and unitarity checks.
pub const GROUP_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MobiusError {
    #[error("matrix is singular (det = {0})")]
    SingularMatrix(Complex64),
    #[error("matrix is not in SL(2,C): |det - 1| = {0:e}")]
    NotUnimodular(f64),
    #[error("no conjugator to the rotation field for {0:?}")]
    InvalidKind(KillingKind),
}

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Row-major `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2C {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Mat2C {
    pub const IDENTITY: Mat2C = Mat2C {
        a: ONE,
        b: ZERO,
        c: ZERO,
        d: ONE,
    };

    pub const fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat2C { a, b, c, d }
    }

    pub fn from_reals(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2C::new(a.into(), b.into(), c.into(), d.into())
    }

    /// From `[re a, im a, re b, im b, re c, im c, re d, im d]`.
    pub fn from_parts(p: [f64; 8]) -> Self {
        Mat2C::new(
            Complex64::new(p[0], p[1]),
            Complex64::new(p[2], p[3]),
            Complex64::new(p[4], p[5]),
            Complex64::new(p[6], p[7]),
        )
    }

    pub fn to_parts(&self) -> [f64; 8] {
        [
            self.a.re, self.a.im, self.b.re, self.b.im, self.c.re, self.c.im, self.d.re, self.d.im,
        ]
    }

    pub fn diag(a: Complex64, d: Complex64) -> Self {
        Mat2C::new(a, ZERO, ZERO, d)
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> Complex64 {
        self.a + self.d
    }

    pub fn inv(&self) -> Result<Mat2C, MobiusError> {
        let det = self.det();
        if det.norm() == 0.0 {
            return Err(MobiusError::SingularMatrix(det));
        }
        Ok(Mat2C::new(self.d / det, -self.b / det, -self.c / det, self.a / det))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Mat2C {
        Mat2C::new(self.a.conj(), self.c.conj(), self.b.conj(), self.d.conj())
    }

    pub fn scale(&self, s: Complex64) -> Mat2C {
        Mat2C::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    /// Largest entry modulus.
    pub fn max_norm(&self) -> f64 {
        [self.a, self.b, self.c, self.d]
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise distance to `other`.
    pub fn distance(&self, other: &Mat2C) -> f64 {
        [
            self.a - other.a,
            self.b - other.b,
            self.c - other.c,
            self.d - other.d,
        ]
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
    }

    pub fn is_special_linear(&self, tol: f64) -> bool {
        (self.det() - ONE).norm() <= tol
    }

    pub fn is_special_unitary(&self, tol: f64) -> bool {
        self.is_special_linear(tol) && (self.adjoint() * *self).distance(&Mat2C::IDENTITY) <= tol
    }

    /// The representative of `±A` whose first nonzero entry (row-major) has
    /// positive real part, or zero real part and positive imaginary part.
    pub fn canonical(&self) -> Mat2C {
        let lead = [self.a, self.b, self.c, self.d]
            .into_iter()
            .find(|z| *z != ZERO)
            .unwrap_or(ZERO);
        if lead.re < 0.0 || (lead.re == 0.0 && lead.im < 0.0) {
            self.scale(-ONE)
        } else {
            *self
        }
    }

    /// `f_A(z) = (az + b)/(cz + d)` on the extended plane.
    pub fn apply(&self, p: ExtendedPoint) -> ExtendedPoint {
        match p {
            ExtendedPoint::Infinity => {
                if self.c == ZERO {
                    ExtendedPoint::Infinity
                } else {
                    ExtendedPoint::Finite(self.a / self.c)
                }
            }
            ExtendedPoint::Finite(z) => {
                let den = self.c * z + self.d;
                if den == ZERO {
                    ExtendedPoint::Infinity
                } else {
                    ExtendedPoint::Finite((self.a * z + self.b) / den)
                }
            }
        }
    }

    /// `f_A` on a finite point, `None` at the pole.
    pub fn apply_finite(&self, z: Complex64) -> Option<Complex64> {
        self.apply(z.into()).finite()
    }

    /// `f_A'(z) = det A / (cz + d)²`.
    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let den = self.c * z + self.d;
        self.det() / (den * den)
    }

    /// The SU(2) matrix `A` acting as the isometry of the radius-`R` sphere
    /// `z ↦ R f_A(z/R)`. For `R = 1` this is `A` itself.
    pub fn rescaled_to_radius(&self, radius: f64) -> Mat2C {
        Mat2C::new(self.a, self.b * radius, self.c / radius, self.d)
    }
}

impl Mul for Mat2C {
    type Output = Mat2C;

    fn mul(self, o: Mat2C) -> Mat2C {
        Mat2C::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

impl fmt::Display for Mat2C {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

/// `mat_mul`, `mat_inv`, `mat_det` as free functions.
pub fn mat_mul(a: &Mat2C, b: &Mat2C) -> Mat2C {
    *a * *b
}

pub fn mat_inv(a: &Mat2C) -> Result<Mat2C, MobiusError> {
    a.inv()
}

pub fn mat_det(a: &Mat2C) -> Complex64 {
    a.det()
}

pub fn apply_mobius(a: &Mat2C, p: ExtendedPoint) -> ExtendedPoint {
    a.apply(p)
}

/// The five generators. `EllipticA/B/C` span su(2) (`X₁`, `X₂`, `X₃`),
/// `Hyperbolic` is `X₄ = diag(½, −½)` and `Parabolic` the nilpotent `X₅`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KillingKind {
    EllipticA,
    EllipticB,
    EllipticC,
    Hyperbolic,
    Parabolic,
}

impl KillingKind {
    pub const ALL: [KillingKind; 5] = [
        KillingKind::EllipticA,
        KillingKind::EllipticB,
        KillingKind::EllipticC,
        KillingKind::Hyperbolic,
        KillingKind::Parabolic,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            KillingKind::EllipticA => "elliptic-a",
            KillingKind::EllipticB => "elliptic-b",
            KillingKind::EllipticC => "elliptic-c",
            KillingKind::Hyperbolic => "hyperbolic",
            KillingKind::Parabolic => "parabolic",
        }
    }

    pub fn from_tag(tag: &str) -> Option<KillingKind> {
        KillingKind::ALL.into_iter().find(|k| k.tag() == tag)
    }

    pub fn is_elliptic(self) -> bool {
        matches!(
            self,
            KillingKind::EllipticA | KillingKind::EllipticB | KillingKind::EllipticC
        )
    }

    /// The Lie algebra generator.
    pub fn generator(self) -> Mat2C {
        match self {
            KillingKind::EllipticA => Mat2C::from_reals(0.0, 1.0, -1.0, 0.0),
            KillingKind::EllipticB => Mat2C::diag(I, -I),
            KillingKind::EllipticC => Mat2C::new(ZERO, I, I, ZERO),
            KillingKind::Hyperbolic => Mat2C::from_reals(0.5, 0.0, 0.0, -0.5),
            KillingKind::Parabolic => Mat2C::from_reals(0.0, 1.0, 0.0, 0.0),
        }
    }
}

impl fmt::Display for KillingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// `exp(t X)` in closed form.
pub fn exp_subgroup(kind: KillingKind, t: f64) -> Mat2C {
    let (s, c) = t.sin_cos();
    match kind {
        KillingKind::EllipticA => Mat2C::from_reals(c, s, -s, c),
        KillingKind::EllipticB => Mat2C::diag(Complex64::new(c, s), Complex64::new(c, -s)),
        KillingKind::EllipticC => Mat2C::new(c.into(), Complex64::new(0.0, s), Complex64::new(0.0, s), c.into()),
        KillingKind::Hyperbolic => Mat2C::from_reals((t / 2.0).exp(), 0.0, 0.0, (-t / 2.0).exp()),
        KillingKind::Parabolic => Mat2C::from_reals(1.0, t, 0.0, 1.0),
    }
}

/// Velocity of the flow of `exp(tX)` at `z`: `1 + z²`, `2iz`, `i(1 − z²)`,
/// `z` and `1` respectively.
pub fn killing_field(kind: KillingKind, z: Complex64) -> Complex64 {
    match kind {
        KillingKind::EllipticA => ONE + z * z,
        KillingKind::EllipticB => 2.0 * I * z,
        KillingKind::EllipticC => I * (ONE - z * z),
        KillingKind::Hyperbolic => z,
        KillingKind::Parabolic => ONE,
    }
}

/// `A = P·R·S` with `P = diag(e^{t/2}, e^{−t/2})`, `R` unipotent upper
/// triangular and `S ∈ SU(2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Iwasawa {
    pub diagonal: Mat2C,
    pub unipotent: Mat2C,
    pub unitary: Mat2C,
}

impl Iwasawa {
    pub fn product(&self) -> Mat2C {
        self.diagonal * self.unipotent * self.unitary
    }

    /// The hyperbolic parameter `t` of the diagonal factor.
    pub fn boost(&self) -> f64 {
        2.0 * self.diagonal.a.re.ln()
    }

    /// The off-diagonal entry of the unipotent factor.
    pub fn shear(&self) -> Complex64 {
        self.unipotent.b
    }
}

/// Iwasawa factorization by Gram–Schmidt on the rows, bottom row first, so
/// that `A = T·S` with `T` upper triangular with positive diagonal.
pub fn iwasawa_decompose(a: &Mat2C) -> Result<Iwasawa, MobiusError> {
    let det = a.det();
    let off = (det - ONE).norm();
    if off > 1e-9 {
        return Err(MobiusError::NotUnimodular(off));
    }
    // S's second row is the normalized second row of A.
    let t22 = (a.c.norm_sqr() + a.d.norm_sqr()).sqrt();
    if t22 == 0.0 {
        return Err(MobiusError::SingularMatrix(det));
    }
    let (s21, s22) = (a.c / t22, a.d / t22);
    // Component of the first row along the second.
    let t12 = a.a * s21.conj() + a.b * s22.conj();
    let (r1, r2) = (a.a - t12 * s21, a.b - t12 * s22);
    let t11 = (r1.norm_sqr() + r2.norm_sqr()).sqrt();
    if t11 == 0.0 {
        return Err(MobiusError::SingularMatrix(det));
    }
    let (s11, s12) = (r1 / t11, r2 / t11);
    // det A = t11·t22·det S with |det S| = 1, so det A = 1 forces
    // t11·t22 = 1 and det S = 1.
    Ok(Iwasawa {
        diagonal: Mat2C::from_reals(t11, 0.0, 0.0, t22),
        unipotent: Mat2C::new(ONE, t12 / t11, ZERO, ONE),
        unitary: Mat2C::new(s11, s12, s21, s22),
    })
}

/// An SU(2) matrix `A` whose Möbius map carries the rotation field `2iz`
/// onto the field of `kind`: if `ż = 2iz` then `w = f_A(z)` satisfies
/// `ẇ = killing_field(kind, w)`.
///
/// `EllipticA` gives `(1/√2)[[1, i], [i, 1]]`, which sends the fixed points
/// `0, ∞` to `i, −i`; `EllipticC` gives `(1/√2)[[1, −1], [1, 1]]`, sending
/// them to `−1, 1`. `EllipticB` is carried by the identity.
pub fn conjugator_to_rotation(kind: KillingKind) -> Result<Mat2C, MobiusError> {
    let h = FRAC_1_SQRT_2;
    match kind {
        KillingKind::EllipticA => Ok(Mat2C::new(h.into(), I * h, I * h, h.into())),
        KillingKind::EllipticB => Ok(Mat2C::IDENTITY),
        KillingKind::EllipticC => Ok(Mat2C::from_reals(h, -h, h, h)),
        other => Err(MobiusError::InvalidKind(other)),
    }
}

/// The conjugator of the one-parameter family `a = α₁ + iα₂`,
/// `b = α₂ + iα₁`, `α₁² + α₂² = ½`, parametrized by the angle of `(α₁, α₂)`.
pub fn elliptic_a_conjugator(phase: f64) -> Mat2C {
    let (s, c) = phase.sin_cos();
    let (a1, a2) = (FRAC_1_SQRT_2 * c, FRAC_1_SQRT_2 * s);
    let a = Complex64::new(a1, a2);
    let b = Complex64::new(a2, a1);
    Mat2C::new(a, b, -b.conj(), a.conj())
}

/// Conjugacy class of a Möbius map by its trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowClass {
    Identity,
    Elliptic,
    Parabolic,
    Hyperbolic,
    Loxodromic,
}

/// Trace classification of `A ∈ SL(2,ℂ)`: `±I` is the identity; real trace
/// with `|tr| < 2` elliptic, `= 2` parabolic, `> 2` hyperbolic; otherwise
/// loxodromic.
pub fn classify_flow(a: &Mat2C, tol: f64) -> FlowClass {
    if a.distance(&Mat2C::IDENTITY) <= tol || a.distance(&Mat2C::IDENTITY.scale(-ONE)) <= tol {
        return FlowClass::Identity;
    }
    let tr = a.trace();
    if tr.im.abs() > tol {
        return FlowClass::Loxodromic;
    }
    let t = tr.re.abs();
    if (t - 2.0).abs() <= tol {
        FlowClass::Parabolic
    } else if t < 2.0 {
        FlowClass::Elliptic
    } else {
        FlowClass::Hyperbolic
    }
}
