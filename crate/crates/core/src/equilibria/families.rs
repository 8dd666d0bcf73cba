//! The two-body, collinear three-body and square four-body families of
//! rotating solutions (field `2iz`), each reduced to a scalar equation
//! `F(α) = G(α)` in the position `α` of one body.

use super::roots::{bisect, golden_max, real_roots};
use super::{residual_elliptic, EquilibriaError, SolutionBranch, BRANCH_TOL};
use crate::geometry::SpaceForm;
use crate::mobius::KillingKind;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Masses within this relative distance of the critical mass are treated as
/// tangent.
const TANGENT_TOL: f64 = 1e-12;

/// `F(α) = (R² − α²) α / (R² + α²)²`, maximal `1/(4R)` at `α = (√2 − 1)R`.
pub fn two_body_f(alpha: f64, form: &SpaceForm) -> f64 {
    let r2 = form.radius_sq();
    let a2 = alpha * alpha;
    (r2 - a2) * alpha / ((r2 + a2) * (r2 + a2))
}

/// Coefficients (highest degree first) of the quartic in the position ratio
/// `λ = β/α` for two bodies at `α` and `λα` on the real axis:
/// `m₁(R² − α²)(R² + λ²α²)² + m₂ λ (R² − λ²α²)(R² + α²)² = 0`.
pub fn lambda_quartic(m1: f64, m2: f64, alpha: f64, form: &SpaceForm) -> [f64; 5] {
    let r2 = form.radius_sq();
    let a2 = alpha * alpha;
    let p = m1 * (r2 - a2);
    let q = m2 * (r2 + a2) * (r2 + a2);
    [p * a2 * a2, -q * a2, 2.0 * p * r2 * a2, q * r2, p * r2 * r2]
}

/// Real roots of [`lambda_quartic`], increasing.
pub fn two_body_lambda_roots(m1: f64, m2: f64, alpha: f64, form: &SpaceForm) -> Result<Vec<f64>, EquilibriaError> {
    let r = form.radius();
    if !(alpha > 0.0 && alpha < r) {
        return Err(EquilibriaError::InvalidInput(format!("alpha = {alpha} outside (0, {r})")));
    }
    if !(m1 > 0.0 && m2 > 0.0) {
        return Err(EquilibriaError::InvalidInput("masses must be positive".into()));
    }
    Ok(real_roots(&lambda_quartic(m1, m2, alpha, form)))
}

/// The two equal-mass two-body families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TwoBodyFamily {
    /// Partner at `−α`; `G = m^{1/3} / (4·2^{1/3} R²)`.
    Opposite,
    /// Partner at `R(α − R)/(α + R)`; `G = m / (8R⁴)`.
    Skew,
}

/// A scalar existence problem `F(α) = G(α)` on `α ∈ (0, R)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "problem", rename_all = "kebab-case")]
pub enum FgProblem {
    TwoBody { family: TwoBodyFamily, mass: f64 },
    /// Bodies `(α, 0, −α)` with masses `(m, M, m)`.
    Euler3 { mass: f64, central_mass: f64 },
    /// Four equal masses at `(α, −α, iα, −iα)`.
    Square4 { mass: f64 },
}

impl FgProblem {
    pub fn f(&self, alpha: f64, form: &SpaceForm) -> f64 {
        let r2 = form.radius_sq();
        match *self {
            FgProblem::TwoBody { .. } => two_body_f(alpha, form),
            FgProblem::Euler3 { .. } => 32.0 * (r2 * two_body_f(alpha, form)).powi(3),
            FgProblem::Square4 { mass } => {
                let a = alpha.abs();
                32.0 * r2 * r2 * r2 * a.powi(3) / (mass * (r2 + a * a).powi(6))
            }
        }
    }

    pub fn g(&self, alpha: f64, form: &SpaceForm) -> f64 {
        let r2 = form.radius_sq();
        match *self {
            FgProblem::TwoBody { family: TwoBodyFamily::Opposite, mass } => {
                mass.cbrt() / (4.0 * 2f64.cbrt() * r2)
            }
            FgProblem::TwoBody { family: TwoBodyFamily::Skew, mass } => mass / (8.0 * r2 * r2),
            FgProblem::Euler3 { mass, central_mass } => {
                let a2 = alpha * alpha;
                let c = (r2 - a2) / (r2 + a2);
                central_mass * c * c + mass / 4.0
            }
            FgProblem::Square4 { .. } => {
                let a2 = alpha * alpha;
                let r4 = r2 * r2;
                1.0 / (4.0 * (r2 - a2).abs().powi(3)) + 1.0 / (2.0 * (a2 * a2 + r4).powi(3)).sqrt()
            }
        }
    }

    pub fn h(&self, alpha: f64, form: &SpaceForm) -> f64 {
        self.f(alpha, form) - self.g(alpha, form)
    }

    /// The problem's mass parameter (the outer mass for `Euler3`).
    pub fn mass(&self) -> f64 {
        match *self {
            FgProblem::TwoBody { mass, .. } | FgProblem::Euler3 { mass, .. } | FgProblem::Square4 { mass } => mass,
        }
    }

    /// The value of the mass parameter for which `α` solves the equation
    /// (keeping the ratio `M/m` fixed for `Euler3`). Unimodal in `α`.
    pub fn critical_mass_at(&self, alpha: f64, form: &SpaceForm) -> f64 {
        let f = self.f(alpha, form);
        match *self {
            FgProblem::TwoBody { family: TwoBodyFamily::Opposite, .. } => {
                let r2 = form.radius_sq();
                128.0 * (r2 * f).powi(3)
            }
            FgProblem::TwoBody { family: TwoBodyFamily::Skew, .. } => 8.0 * form.radius_sq().powi(2) * f,
            FgProblem::Euler3 { mass, .. } => mass * f / self.g(alpha, form),
            FgProblem::Square4 { mass } => mass * f / self.g(alpha, form),
        }
    }

    fn tangent_alpha(&self, form: &SpaceForm) -> f64 {
        let r = form.radius();
        match self {
            FgProblem::TwoBody { .. } => (2f64.sqrt() - 1.0) * r,
            _ => golden_max(|a| self.critical_mass_at(a, form), 1e-6 * r, r * (1.0 - 1e-6), 1e-13 * r),
        }
    }

    fn validate(&self) -> Result<(), EquilibriaError> {
        let ok = match *self {
            FgProblem::Euler3 { mass, central_mass } => mass > 0.0 && central_mass > 0.0,
            _ => self.mass() > 0.0,
        };
        if ok && self.mass().is_finite() {
            Ok(())
        } else {
            Err(EquilibriaError::InvalidInput(format!("masses must be positive: {self:?}")))
        }
    }
}

/// One solution of `F(α) = G(α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intersection {
    pub alpha: f64,
    /// `false` at a tangential intersection.
    pub transversal: bool,
}

/// The intersections of `F` and `G` on `(0, R)` and the mass at which they
/// merge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FGAnalysis {
    pub problem: FgProblem,
    pub form: SpaceForm,
    /// Maximizer of [`FgProblem::critical_mass_at`], where the curves touch
    /// at the critical mass.
    pub alpha_tangent: f64,
    /// Largest mass parameter with a solution.
    pub mass_threshold: f64,
    pub intersections: Vec<Intersection>,
    /// `−R²/α` for every intersection.
    pub conjugate_roots: Vec<f64>,
}

impl FGAnalysis {
    pub fn new(problem: FgProblem, form: SpaceForm) -> Result<Self, EquilibriaError> {
        problem.validate()?;
        let r = form.radius();
        let alpha_tangent = problem.tangent_alpha(&form);
        let mass_threshold = problem.critical_mass_at(alpha_tangent, &form);
        let h = |a: f64| problem.h(a, &form);
        let mass = problem.mass();
        let intersections = if (mass - mass_threshold).abs() <= TANGENT_TOL * mass_threshold || (mass < mass_threshold && h(alpha_tangent) <= 0.0) {
            vec![Intersection {
                alpha: alpha_tangent,
                transversal: false,
            }]
        } else if mass < mass_threshold {
            // H < 0 at both ends of (0, R) and H > 0 at the tangency point
            vec![
                Intersection {
                    alpha: bisect(h, 0.0, alpha_tangent),
                    transversal: true,
                },
                Intersection {
                    alpha: bisect(h, alpha_tangent, r),
                    transversal: true,
                },
            ]
        } else {
            Vec::new()
        };
        let conjugate_roots = intersections.iter().map(|i| -form.radius_sq() / i.alpha).collect();
        Ok(FGAnalysis {
            problem,
            form,
            alpha_tangent,
            mass_threshold,
            intersections,
            conjugate_roots,
        })
    }

    pub fn f(&self, alpha: f64) -> f64 {
        self.problem.f(alpha, &self.form)
    }

    pub fn g(&self, alpha: f64) -> f64 {
        self.problem.g(alpha, &self.form)
    }

    pub fn is_tangent(&self) -> bool {
        self.intersections.len() == 1
    }
}

pub fn two_body_family_analysis(family: TwoBodyFamily, mass: f64, form: &SpaceForm) -> Result<FGAnalysis, EquilibriaError> {
    FGAnalysis::new(FgProblem::TwoBody { family, mass }, *form)
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `a` for the root below the tangency point, `b` for the one above.
fn side_label(index: usize) -> &'static str {
    if index == 0 {
        "a"
    } else {
        "b"
    }
}

fn checked(branches: Vec<SolutionBranch>) -> Result<Vec<SolutionBranch>, EquilibriaError> {
    if cfg!(debug_assertions) {
        for b in &branches {
            let rep = residual_elliptic(b.kind, &b.positions, &b.config()?)?;
            assert!(rep.max_abs <= BRANCH_TOL, "{} residual {:e}", b.family_label, rep.max_abs);
        }
    }
    Ok(branches)
}

/// Equal-mass two-body rotating solutions.
///
/// Family 1 pairs `α` with `−α`, family 2 with `R(α − R)/(α + R)`; each root
/// `α` of a family gives a branch `i` and its reflection `ii` through the
/// equator (`z ↦ R²/z̄` applied to both bodies). At the critical mass `2R³`
/// both families collapse onto the tangent pair `3.a`, `3.b`.
pub fn two_body_solve(mass: f64, form: &SpaceForm) -> Result<Vec<SolutionBranch>, EquilibriaError> {
    let r2 = form.radius_sq();
    let masses = vec![mass, mass];
    let opposite = two_body_family_analysis(TwoBodyFamily::Opposite, mass, form)?;
    let skew = two_body_family_analysis(TwoBodyFamily::Skew, mass, form)?;
    let rotating = |label: String, a: f64, b: f64, degenerate: bool| {
        SolutionBranch::new(KillingKind::EllipticB, label, *form, masses.clone(), vec![real(a), real(b)], degenerate)
    };
    let mut out = Vec::new();
    if opposite.is_tangent() {
        let a = opposite.intersections[0].alpha;
        out.push(rotating("3.a".into(), a, -a, true));
        out.push(rotating("3.b".into(), r2 / a, -r2 / a, true));
        return checked(out);
    }
    for (i, root) in opposite.intersections.iter().enumerate() {
        let a = root.alpha;
        out.push(rotating(format!("1.{}.i", side_label(i)), a, -a, false));
        out.push(rotating(format!("1.{}.ii", side_label(i)), r2 / a, -r2 / a, false));
    }
    let r = form.radius();
    for (i, root) in skew.intersections.iter().enumerate() {
        let a = root.alpha;
        let b = r * (a - r) / (a + r);
        out.push(rotating(format!("2.{}.i", side_label(i)), a, b, false));
        out.push(rotating(format!("2.{}.ii", side_label(i)), r2 / a, r2 / b, false));
    }
    checked(out)
}

/// `F − G` of the collinear three-body reduction; also defined for `α < 0`.
pub fn euler3_single_equation(alpha: f64, mass: f64, central_mass: f64, form: &SpaceForm) -> f64 {
    FgProblem::Euler3 { mass, central_mass }.h(alpha, form)
}

/// Collinear rotating solutions `(α, 0, −α)` with masses `(m, M, m)`.
///
/// Existence is decided by the sign of `max(F − G)`; the conjugate roots
/// `−R²/α` of the scalar equation are listed in the analysis but are not
/// configurations of the three-body problem (the central body would have to
/// move to the north pole).
pub fn euler3_solve(mass: f64, central_mass: f64, form: &SpaceForm) -> Result<(FGAnalysis, Vec<SolutionBranch>), EquilibriaError> {
    let analysis = FGAnalysis::new(FgProblem::Euler3 { mass, central_mass }, *form)?;
    let masses = vec![mass, central_mass, mass];
    let degenerate = analysis.is_tangent();
    let branches = analysis
        .intersections
        .iter()
        .enumerate()
        .map(|(i, root)| {
            let label = if degenerate { "euler.tan".to_string() } else { format!("euler.{}", side_label(i)) };
            let a = root.alpha;
            SolutionBranch::new(
                KillingKind::EllipticB,
                label,
                *form,
                masses.clone(),
                vec![real(a), real(0.0), real(-a)],
                degenerate,
            )
        })
        .collect();
    Ok((analysis, checked(branches)?))
}

/// `F − G` of the square reduction; depends on `|α|` only.
pub fn square4_single_equation(alpha: f64, mass: f64, form: &SpaceForm) -> f64 {
    FgProblem::Square4 { mass }.h(alpha, form)
}

/// Square rotating solutions `α·(1, −1, i, −i)` with equal masses, together
/// with their conjugates `(R²/α)·(1, −1, i, −i)` (labels ending in `.conj`).
pub fn square4_solve(mass: f64, form: &SpaceForm) -> Result<(FGAnalysis, Vec<SolutionBranch>), EquilibriaError> {
    let analysis = FGAnalysis::new(FgProblem::Square4 { mass }, *form)?;
    let r2 = form.radius_sq();
    let degenerate = analysis.is_tangent();
    let square = |s: f64| vec![real(s), real(-s), Complex64::new(0.0, s), Complex64::new(0.0, -s)];
    let mut out = Vec::new();
    for (i, root) in analysis.intersections.iter().enumerate() {
        let base = if degenerate { "square.tan".to_string() } else { format!("square.{}", side_label(i)) };
        for (label, s) in [(base.clone(), root.alpha), (format!("{base}.conj"), r2 / root.alpha)] {
            out.push(SolutionBranch::new(KillingKind::EllipticB, label, *form, vec![mass; 4], square(s), degenerate));
        }
    }
    Ok((analysis, checked(out)?))
}
