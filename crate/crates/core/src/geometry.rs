//! The conformal model of the sphere of radius `R` in stereographic
//! coordinates.
//!
//! `z = 0` is the south pole, `|z| = R` the equator (the geodesic circle) and
//! the point at infinity the north pole. Only the north pole needs a
//! distinguished value, [`ExtendedPoint::Infinity`]; the dynamics never
//! evaluates there.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;
use thiserror::Error;

/// Absolute tolerance (in units of `R` for separations and `R²` for
/// antipodal gaps) below which a pair is treated as singular by the
/// kernels themselves.
pub const PAIR_TOL: f64 = 1e-12;

/// Default width of the boundary bands in [`classify_region`], relative to `R`.
pub const REGION_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("sphere radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
}

/// Why a pair of bodies makes the potential undefined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularKind {
    Collision,
    Antipodal,
}

#[derive(Debug, Error, Clone, Copy, PartialEq)]
#[error("bodies {first} and {second} are singular ({kind:?})")]
pub struct SingularPair {
    pub first: usize,
    pub second: usize,
    pub kind: SingularKind,
}

/// The sphere of radius `R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceForm {
    radius: f64,
}

impl SpaceForm {
    pub fn new(radius: f64) -> Result<Self, GeometryError> {
        if radius.is_finite() && radius > 0.0 {
            Ok(SpaceForm { radius })
        } else {
            Err(GeometryError::InvalidRadius(radius))
        }
    }

    /// The unit sphere.
    pub fn unit() -> Self {
        SpaceForm { radius: 1.0 }
    }

    #[inline]
    pub fn radius(&self) -> f64 {
        self.radius
    }

    #[inline]
    pub fn radius_sq(&self) -> f64 {
        self.radius * self.radius
    }

    /// `|z|` of the southern tropic, `(√2 − 1)R`.
    pub fn southern_tropic(&self) -> f64 {
        (SQRT_2 - 1.0) * self.radius
    }

    /// `|z|` of the northern tropic, `R / (√2 − 1)`.
    pub fn northern_tropic(&self) -> f64 {
        self.radius / (SQRT_2 - 1.0)
    }
}

/// A point of the extended complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedPoint {
    Finite(Complex64),
    Infinity,
}

impl ExtendedPoint {
    pub fn finite(self) -> Option<Complex64> {
        match self {
            ExtendedPoint::Finite(z) => Some(z),
            ExtendedPoint::Infinity => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtendedPoint::Infinity)
    }
}

impl From<Complex64> for ExtendedPoint {
    fn from(z: Complex64) -> Self {
        ExtendedPoint::Finite(z)
    }
}

/// A point of the embedded sphere `x² + y² + w² = R²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint {
    pub x: f64,
    pub y: f64,
    pub w: f64,
}

impl SpherePoint {
    pub fn dot(&self, other: &SpherePoint) -> f64 {
        self.x * other.x + self.y * other.y + self.w * other.w
    }

    pub fn cross_norm(&self, other: &SpherePoint) -> f64 {
        let cx = self.y * other.w - self.w * other.y;
        let cy = self.w * other.x - self.x * other.w;
        let cz = self.x * other.y - self.y * other.x;
        (cx * cx + cy * cy + cz * cz).sqrt()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }
}

/// Labels of the poles, tropics, equator and the open bands between them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionLabel {
    #[serde(rename = "P_S")]
    SouthPole,
    #[serde(rename = "Omega1")]
    Omega1,
    #[serde(rename = "T_S")]
    SouthernTropic,
    #[serde(rename = "Omega2")]
    Omega2,
    #[serde(rename = "E_R")]
    Equator,
    #[serde(rename = "Omega3")]
    Omega3,
    #[serde(rename = "T_N")]
    NorthernTropic,
    #[serde(rename = "Omega4")]
    Omega4,
    #[serde(rename = "P_N")]
    NorthPole,
}

impl RegionLabel {
    /// The label of the antipodal region.
    pub fn mirror(self) -> RegionLabel {
        use RegionLabel::*;
        match self {
            SouthPole => NorthPole,
            Omega1 => Omega4,
            SouthernTropic => NorthernTropic,
            Omega2 => Omega3,
            Equator => Equator,
            Omega3 => Omega2,
            NorthernTropic => SouthernTropic,
            Omega4 => Omega1,
            NorthPole => SouthPole,
        }
    }

    pub fn tag(self) -> &'static str {
        use RegionLabel::*;
        match self {
            SouthPole => "P_S",
            Omega1 => "Omega1",
            SouthernTropic => "T_S",
            Omega2 => "Omega2",
            Equator => "E_R",
            Omega3 => "Omega3",
            NorthernTropic => "T_N",
            Omega4 => "Omega4",
            NorthPole => "P_N",
        }
    }
}

/// Collisions and antipodal pairs of a configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularReport {
    pub collision_pairs: Vec<(usize, usize)>,
    pub antipodal_pairs: Vec<(usize, usize)>,
    pub min_separation: f64,
    pub min_antipodal_gap: f64,
}

impl SingularReport {
    pub fn is_regular(&self) -> bool {
        self.collision_pairs.is_empty() && self.antipodal_pairs.is_empty()
    }
}

/// Conformal factor `λ(z) = 4R⁴ / (R² + |z|²)²` of the metric.
#[inline]
pub fn conformal_factor(z: Complex64, form: &SpaceForm) -> f64 {
    let r2 = form.radius_sq();
    let s = r2 + z.norm_sqr();
    4.0 * r2 * r2 / (s * s)
}

/// Inverse stereographic projection onto the sphere of radius `R`.
pub fn sphere_lift(p: ExtendedPoint, form: &SpaceForm) -> SpherePoint {
    let r = form.radius();
    match p {
        ExtendedPoint::Infinity => SpherePoint {
            x: 0.0,
            y: 0.0,
            w: r,
        },
        ExtendedPoint::Finite(z) => {
            let r2 = r * r;
            let m2 = z.norm_sqr();
            let s = r2 + m2;
            SpherePoint {
                x: 2.0 * r2 * z.re / s,
                y: 2.0 * r2 * z.im / s,
                w: r * (m2 - r2) / s,
            }
        }
    }
}

/// Great-circle distance between two points, in `[0, πR]`.
pub fn geodesic_distance(
    p1: impl Into<ExtendedPoint>,
    p2: impl Into<ExtendedPoint>,
    form: &SpaceForm,
) -> f64 {
    let a = sphere_lift(p1.into(), form);
    let b = sphere_lift(p2.into(), form);
    form.radius() * a.cross_norm(&b).atan2(a.dot(&b))
}

/// `cot(d/R)` for the geodesic distance `d` between `z1` and `z2`, from the
/// closed-form stereographic expression.
pub fn cot_geodesic(z1: Complex64, z2: Complex64, form: &SpaceForm) -> Result<f64, SingularPair> {
    let r = form.radius();
    let r2 = r * r;
    let sep = (z2 - z1).norm();
    let gap = (r2 + z2.conj() * z1).norm();
    if sep <= PAIR_TOL * r {
        return Err(SingularPair {
            first: 0,
            second: 1,
            kind: SingularKind::Collision,
        });
    }
    if gap <= PAIR_TOL * r2 {
        return Err(SingularPair {
            first: 0,
            second: 1,
            kind: SingularKind::Antipodal,
        });
    }
    Ok(cot_numerator(z1, z2, r2) / (2.0 * r * sep * gap))
}

/// `2(z₁z̄₂ + z₂z̄₁)R² + (|z₁|² − R²)(|z₂|² − R²)`.
#[inline]
pub(crate) fn cot_numerator(z1: Complex64, z2: Complex64, r2: f64) -> f64 {
    4.0 * (z1 * z2.conj()).re * r2 + (z1.norm_sqr() - r2) * (z2.norm_sqr() - r2)
}

/// The antipodal (geodesic conjugate) point `−R² z / |z|²`.
pub fn antipode(p: ExtendedPoint, form: &SpaceForm) -> ExtendedPoint {
    match p {
        ExtendedPoint::Infinity => ExtendedPoint::Finite(Complex64::new(0.0, 0.0)),
        ExtendedPoint::Finite(z) => {
            let m2 = z.norm_sqr();
            if m2 == 0.0 {
                ExtendedPoint::Infinity
            } else {
                ExtendedPoint::Finite(-z * (form.radius_sq() / m2))
            }
        }
    }
}

/// Reflection through the equator, `z ↦ R² / z̄`. Orientation reversing, but
/// it commutes with rotations about the polar axis, so it maps solutions
/// invariant under `ż = 2iz` to solutions of the same kind.
pub fn equator_reflection(z: Complex64, form: &SpaceForm) -> ExtendedPoint {
    let m2 = z.norm_sqr();
    if m2 == 0.0 {
        ExtendedPoint::Infinity
    } else {
        ExtendedPoint::Finite(z * (form.radius_sq() / m2))
    }
}

/// Collisions `|z_k − z_j| ≤ tol` and antipodal pairs `|R² + z̄_j z_k| ≤ tol·R²`.
pub fn detect_singular(positions: &[Complex64], form: &SpaceForm, tol: f64) -> SingularReport {
    let r2 = form.radius_sq();
    let mut report = SingularReport {
        collision_pairs: Vec::new(),
        antipodal_pairs: Vec::new(),
        min_separation: f64::INFINITY,
        min_antipodal_gap: f64::INFINITY,
    };
    for (k, &zk) in positions.iter().enumerate() {
        for (j, &zj) in positions.iter().enumerate().skip(k + 1) {
            let sep = (zk - zj).norm();
            let gap = (r2 + zj.conj() * zk).norm();
            report.min_separation = report.min_separation.min(sep);
            report.min_antipodal_gap = report.min_antipodal_gap.min(gap);
            if sep <= tol {
                report.collision_pairs.push((k, j));
            }
            if gap <= tol * r2 {
                report.antipodal_pairs.push((k, j));
            }
        }
    }
    report
}

/// Region of `p` by `|p|` against the poles, tropics and equator.
///
/// Boundary circles are matched in log-radius, `|ln(|z|/b)| ≤ tol/R`, so the
/// bands are exchanged exactly by the antipodal map. The south pole band is
/// `|z| ≤ tol` and the north pole band its image `|z| ≥ R²/tol`.
pub fn classify_region(p: ExtendedPoint, form: &SpaceForm, tol: f64) -> RegionLabel {
    use RegionLabel::*;
    let z = match p {
        ExtendedPoint::Infinity => return NorthPole,
        ExtendedPoint::Finite(z) => z,
    };
    let r = form.radius();
    let m = z.norm();
    if m <= tol {
        return SouthPole;
    }
    if tol > 0.0 && m >= r * r / tol {
        return NorthPole;
    }
    let band = tol / r;
    let boundaries = [
        (form.southern_tropic(), SouthernTropic),
        (r, Equator),
        (form.northern_tropic(), NorthernTropic),
    ];
    for (b, label) in boundaries {
        if (m / b).ln().abs() <= band {
            return label;
        }
    }
    if m < boundaries[0].0 {
        Omega1
    } else if m < r {
        Omega2
    } else if m < boundaries[2].0 {
        Omega3
    } else {
        Omega4
    }
}

/// [`classify_region`] with the default band `1e-9·R`.
pub fn region_of(z: Complex64, form: &SpaceForm) -> RegionLabel {
    classify_region(z.into(), form, REGION_TOL * form.radius())
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn point() -> impl Strategy<Value = Complex64> {
        (-4.0..4.0f64, -4.0..4.0f64).prop_map(|(re, im)| Complex64::new(re, im))
    }

    proptest! {
        #[test]
        fn metric_is_rotation_invariant(z in point(), theta in 0.0..(2.0 * PI), r in 0.3..3.0f64) {
            let form = SpaceForm::new(r).unwrap();
            let rotated = z * Complex64::from_polar(1.0, theta);
            let a = conformal_factor(z, &form);
            let b = conformal_factor(rotated, &form);
            prop_assert!((a - b).abs() <= 1e-14 * a);
            prop_assert!(a <= 4.0 && a > 0.0);
        }

        #[test]
        fn lift_lies_on_sphere(z in point(), r in 0.3..3.0f64) {
            let form = SpaceForm::new(r).unwrap();
            let p = sphere_lift(z.into(), &form);
            prop_assert!((p.norm_sq() - r * r).abs() <= 1e-12 * r * r);
        }

        #[test]
        fn antipode_is_involution_at_distance_pi_r(z in point(), r in 0.3..3.0f64) {
            prop_assume!(z.norm() > 1e-3);
            let form = SpaceForm::new(r).unwrap();
            let a = antipode(z.into(), &form);
            let back = antipode(a, &form).finite().unwrap();
            prop_assert!((back - z).norm() <= 1e-12 * z.norm().max(1.0));
            let d = geodesic_distance(z, a, &form);
            prop_assert!((d - PI * r).abs() <= 1e-10 * r);
        }

        #[test]
        fn regions_mirror_under_antipode(z in point(), r in 0.3..3.0f64) {
            prop_assume!(z.norm() > 1e-3);
            let form = SpaceForm::new(r).unwrap();
            let tol = REGION_TOL * r;
            let a = antipode(z.into(), &form);
            prop_assert_eq!(
                classify_region(a, &form, tol),
                classify_region(z.into(), &form, tol).mirror()
            );
        }

        #[test]
        fn distance_is_symmetric(z1 in point(), z2 in point()) {
            let form = SpaceForm::unit();
            let d12 = geodesic_distance(z1, z2, &form);
            let d21 = geodesic_distance(z2, z1, &form);
            prop_assert!((d12 - d21).abs() <= 1e-15);
            prop_assert!((0.0..=PI).contains(&d12));
        }
    }
}
