//! Möbius solutions: residual systems for every field kind, the special
//! two-, three- and four-body families, and the parabolic certificate.
//!
//! A configuration `z` moves as a Möbius solution of field `X` (meaning
//! `z_k(t) = f_t(z_k(0))` for the one-parameter group `f_t` of `X`) exactly
//! when, at `t = 0`,
//!
//! ```text
//! L_X(z_k) = Σ_{j≠k} m_j (|z_j|² + R²)² (R² + z̄_j z_k)(z_j − z_k) / (|z_j − z_k|³ |R² + z̄_j z_k|³)
//! ```
//!
//! for every body. The left-hand side `L_X` comes from substituting
//! `ż = X(z)`, `z̈ = X'(z) X(z)` into the equations of motion; the right-hand
//! side is [`interaction_sum`].

mod families;
pub mod roots;

pub use families::{
    euler3_single_equation, euler3_solve, lambda_quartic, square4_single_equation, square4_solve,
    two_body_f, two_body_family_analysis, two_body_lambda_roots, two_body_solve, FGAnalysis,
    FgProblem, Intersection, TwoBodyFamily,
};

use crate::dynamics::{
    angular_momentum, energy, integrate, interaction_sum, DynamicsError, IntegratorOptions,
    SystemConfig, SystemState,
};
use crate::geometry::{region_of, RegionLabel, SingularKind, SingularPair, SpaceForm, PAIR_TOL};
use crate::mobius::{exp_subgroup, killing_field, KillingKind};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Residual bound for accepting a configuration as a solution.
pub const BRANCH_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EquilibriaError {
    #[error(transparent)]
    Singular(#[from] SingularPair),
    #[error("{0:?} is not an elliptic field")]
    NotElliptic(KillingKind),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// Radial components `Re(z̄ w)/|z|` of both sides, per body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignDiagnostic {
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    /// Every body has `lhs` and `rhs` of strictly opposite sign, so no
    /// rescaling of the masses can balance them.
    pub opposite_signs: bool,
}

impl SignDiagnostic {
    fn new(lhs: Vec<f64>, rhs: Vec<f64>) -> Self {
        let opposite_signs = lhs.iter().zip(&rhs).all(|(l, r)| l * r < 0.0);
        SignDiagnostic {
            lhs,
            rhs,
            opposite_signs,
        }
    }
}

/// `LHS − RHS` of a residual system, per body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub kind: KillingKind,
    pub per_body: Vec<Complex64>,
    pub max_abs: f64,
    /// `max_k |residual_k| / max(1, |LHS_k|)`.
    pub max_scaled: f64,
    pub sign: Option<SignDiagnostic>,
}

impl ResidualReport {
    pub fn is_solution(&self, tol: f64) -> bool {
        self.max_abs <= tol
    }
}

/// Left-hand side `L_X(z)` of the residual system for `kind`.
pub fn residual_lhs(kind: KillingKind, z: Complex64, form: &SpaceForm) -> Complex64 {
    let r2 = form.radius_sq();
    let r6 = r2 * r2 * r2;
    let n2 = z.norm_sqr();
    let w = (r2 + n2).powi(4);
    let one = Complex64::new(1.0, 0.0);
    match kind {
        KillingKind::EllipticA => 16.0 * r6 * (one + z * z) * (r2 * z - z.conj()) / w,
        KillingKind::EllipticB => 32.0 * r6 * (n2 - r2) * z / w,
        KillingKind::EllipticC => 16.0 * r6 * (one - z * z) * (z.conj() + r2 * z) / w,
        KillingKind::Hyperbolic => 8.0 * r6 * (r2 - n2) * z / w,
        KillingKind::Parabolic => -16.0 * r6 * z.conj() / w,
    }
}

fn check_len(positions: &[Complex64], config: &SystemConfig) -> Result<(), EquilibriaError> {
    if positions.len() != config.len() {
        return Err(EquilibriaError::InvalidInput(format!(
            "{} positions for {} masses",
            positions.len(),
            config.len()
        )));
    }
    Ok(())
}

fn sides(
    kind: KillingKind,
    positions: &[Complex64],
    config: &SystemConfig,
) -> Result<(Vec<Complex64>, Vec<Complex64>), EquilibriaError> {
    check_len(positions, config)?;
    let form = config.form();
    let mut lhs = Vec::with_capacity(positions.len());
    let mut rhs = Vec::with_capacity(positions.len());
    for (k, &z) in positions.iter().enumerate() {
        lhs.push(residual_lhs(kind, z, form));
        rhs.push(interaction_sum(positions, config.masses(), form, k)?);
    }
    Ok((lhs, rhs))
}

fn report(kind: KillingKind, lhs: &[Complex64], rhs: &[Complex64], sign: Option<SignDiagnostic>) -> ResidualReport {
    let per_body: Vec<Complex64> = lhs.iter().zip(rhs).map(|(l, r)| l - r).collect();
    let max_abs = per_body.iter().map(|r| r.norm()).fold(0.0, f64::max);
    let max_scaled = per_body
        .iter()
        .zip(lhs)
        .map(|(r, l)| r.norm() / l.norm().max(1.0))
        .fold(0.0, f64::max);
    ResidualReport {
        kind,
        per_body,
        max_abs,
        max_scaled,
        sign,
    }
}

fn radial(z: Complex64, w: Complex64) -> f64 {
    let r = z.norm();
    if r == 0.0 {
        0.0
    } else {
        (z.conj() * w).re / r
    }
}

/// Residual of the elliptic system for `variant` (one of the three elliptic
/// kinds), with velocity convention `ż = X(z)`.
pub fn residual_elliptic(
    variant: KillingKind,
    positions: &[Complex64],
    config: &SystemConfig,
) -> Result<ResidualReport, EquilibriaError> {
    if !variant.is_elliptic() {
        return Err(EquilibriaError::NotElliptic(variant));
    }
    let (lhs, rhs) = sides(variant, positions, config)?;
    Ok(report(variant, &lhs, &rhs, None))
}

/// Residual of the hyperbolic system (`ż = z`), with the radial sign
/// diagnostic of both sides attached.
pub fn residual_hyperbolic(positions: &[Complex64], config: &SystemConfig) -> Result<ResidualReport, EquilibriaError> {
    let (lhs, rhs) = sides(KillingKind::Hyperbolic, positions, config)?;
    let sign = SignDiagnostic::new(
        positions.iter().zip(&lhs).map(|(z, l)| radial(*z, *l)).collect(),
        positions.iter().zip(&rhs).map(|(z, r)| radial(*z, *r)).collect(),
    );
    Ok(report(KillingKind::Hyperbolic, &lhs, &rhs, Some(sign)))
}

/// Residual of the parabolic system (`ż = 1`). On imaginary-axis
/// configurations the [`parabolic_certificate`] signs are attached.
pub fn residual_parabolic(positions: &[Complex64], config: &SystemConfig) -> Result<ResidualReport, EquilibriaError> {
    let (lhs, rhs) = sides(KillingKind::Parabolic, positions, config)?;
    let r = config.form().radius();
    let sign = if positions.iter().all(|z| z.re.abs() <= PAIR_TOL * r) {
        let betas: Vec<f64> = positions.iter().map(|z| z.im).collect();
        let cert = parabolic_certificate(&betas, config.masses(), config.form())?;
        Some(SignDiagnostic::new(cert.lhs, cert.rhs))
    } else {
        None
    };
    Ok(report(KillingKind::Parabolic, &lhs, &rhs, sign))
}

/// Residual of the system matching `kind`.
pub fn residual(kind: KillingKind, positions: &[Complex64], config: &SystemConfig) -> Result<ResidualReport, EquilibriaError> {
    match kind {
        KillingKind::Hyperbolic => residual_hyperbolic(positions, config),
        KillingKind::Parabolic => residual_parabolic(positions, config),
        elliptic => residual_elliptic(elliptic, positions, config),
    }
}

/// Both sides of the real-part equation that a parabolic solution through an
/// imaginary-axis configuration `z_l = iβ_l` would have to satisfy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParabolicCertificate {
    /// `−16R⁶ / (R² + β_k²)⁴`.
    pub lhs: Vec<f64>,
    /// `Σ_{j≠k} m_j (R² + β_j²)² (β_j − β_k)² / (|β_j − β_k|³ |R² + β_j β_k|³)`.
    pub rhs: Vec<f64>,
    /// Every `lhs` is negative and every `rhs` positive.
    pub contradiction: bool,
}

pub fn parabolic_certificate(
    betas: &[f64],
    masses: &[f64],
    form: &SpaceForm,
) -> Result<ParabolicCertificate, EquilibriaError> {
    if betas.len() != masses.len() || betas.len() < 2 {
        return Err(EquilibriaError::InvalidInput(format!(
            "{} betas for {} masses",
            betas.len(),
            masses.len()
        )));
    }
    let r = form.radius();
    let r2 = form.radius_sq();
    let r6 = r2 * r2 * r2;
    let mut lhs = Vec::with_capacity(betas.len());
    let mut rhs = Vec::with_capacity(betas.len());
    for (k, &bk) in betas.iter().enumerate() {
        lhs.push(-16.0 * r6 / (r2 + bk * bk).powi(4));
        let mut sum = 0.0;
        for (j, (&bj, &mj)) in betas.iter().zip(masses).enumerate() {
            if j == k {
                continue;
            }
            let d = (bj - bk).abs();
            let g = (r2 + bj * bk).abs();
            if d <= PAIR_TOL * r {
                return Err(pair(k, j, SingularKind::Collision).into());
            }
            if g <= PAIR_TOL * r2 {
                return Err(pair(k, j, SingularKind::Antipodal).into());
            }
            sum += mj * (r2 + bj * bj).powi(2) * d * d / (d.powi(3) * g.powi(3));
        }
        rhs.push(sum);
    }
    let contradiction = lhs.iter().all(|l| *l < 0.0) && rhs.iter().all(|r| *r > 0.0);
    Ok(ParabolicCertificate {
        lhs,
        rhs,
        contradiction,
    })
}

fn pair(k: usize, j: usize, kind: SingularKind) -> SingularPair {
    SingularPair {
        first: k.min(j),
        second: k.max(j),
        kind,
    }
}

/// Hyperbolic residual of the antisymmetric pair `(α, −α)` along an α grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicScan {
    pub mass: f64,
    pub radius: f64,
    pub alphas: Vec<f64>,
    /// Radial left-hand side at body 1.
    pub lhs: Vec<f64>,
    /// Radial right-hand side at body 1.
    pub rhs: Vec<f64>,
    /// Sign changes of `lhs − rhs` between consecutive grid points.
    pub sign_changes: usize,
    /// Both sides have opposite signs at every grid point.
    pub opposite_everywhere: bool,
}

/// Scans `samples` equally spaced `α ∈ [0.01R, 0.99R]` for two equal masses.
pub fn hyperbolic_sign_scan(mass: f64, form: &SpaceForm, samples: usize) -> Result<HyperbolicScan, EquilibriaError> {
    if samples < 2 {
        return Err(EquilibriaError::InvalidInput("need at least two samples".into()));
    }
    let config = SystemConfig::new(*form, vec![mass, mass])?;
    let r = form.radius();
    let (lo, hi) = (0.01 * r, 0.99 * r);
    let mut scan = HyperbolicScan {
        mass,
        radius: r,
        alphas: Vec::with_capacity(samples),
        lhs: Vec::with_capacity(samples),
        rhs: Vec::with_capacity(samples),
        sign_changes: 0,
        opposite_everywhere: true,
    };
    let mut last: Option<f64> = None;
    for i in 0..samples {
        let alpha = lo + (hi - lo) * i as f64 / (samples - 1) as f64;
        let rep = residual_hyperbolic(&[Complex64::new(alpha, 0.0), Complex64::new(-alpha, 0.0)], &config)?;
        let sign = rep.sign.expect("hyperbolic residual carries a sign diagnostic");
        let diff = sign.lhs[0] - sign.rhs[0];
        if last.is_some_and(|prev| (prev < 0.0) != (diff < 0.0)) {
            scan.sign_changes += 1;
        }
        last = Some(diff);
        scan.opposite_everywhere &= sign.opposite_signs;
        scan.alphas.push(alpha);
        scan.lhs.push(sign.lhs[0]);
        scan.rhs.push(sign.rhs[0]);
    }
    Ok(scan)
}

/// One solved initial configuration of a Möbius solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionBranch {
    pub kind: KillingKind,
    pub family_label: String,
    pub form: SpaceForm,
    pub masses: Vec<f64>,
    pub positions: Vec<Complex64>,
    /// `killing_field(kind, z_k)`.
    pub velocities: Vec<Complex64>,
    pub regions: Vec<RegionLabel>,
    /// Arises from a tangential intersection of the existence curves.
    pub degenerate: bool,
}

impl SolutionBranch {
    pub fn new(
        kind: KillingKind,
        family_label: impl Into<String>,
        form: SpaceForm,
        masses: Vec<f64>,
        positions: Vec<Complex64>,
        degenerate: bool,
    ) -> Self {
        SolutionBranch {
            kind,
            family_label: family_label.into(),
            velocities: positions.iter().map(|z| killing_field(kind, *z)).collect(),
            regions: positions.iter().map(|z| region_of(*z, &form)).collect(),
            form,
            masses,
            positions,
            degenerate,
        }
    }

    pub fn config(&self) -> Result<SystemConfig, EquilibriaError> {
        Ok(SystemConfig::new(self.form, self.masses.clone())?)
    }

    pub fn state(&self) -> SystemState {
        SystemState::new(0.0, self.positions.clone(), self.velocities.clone())
    }

    pub fn residual(&self) -> Result<ResidualReport, EquilibriaError> {
        residual(self.kind, &self.positions, &self.config()?)
    }

    /// The same branch with every position (and velocity) pushed through `f`.
    pub fn map_positions(&self, kind: KillingKind, label: impl Into<String>, f: impl Fn(Complex64) -> Complex64) -> Self {
        SolutionBranch::new(
            kind,
            label,
            self.form,
            self.masses.clone(),
            self.positions.iter().map(|z| f(*z)).collect(),
            self.degenerate,
        )
    }
}

/// Deviation of an integrated branch from the flow it should follow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    /// Largest residual of the matching system over all samples.
    pub max_residual: f64,
    /// Largest `|z_k(t) − f_t(z_k(0))|` over samples and bodies.
    pub max_flow_deviation: f64,
    /// Largest `| |z_k(t)| − |z_k(0)| |`, tracked for rotations about the
    /// polar axis only.
    pub max_radius_drift: Option<f64>,
    /// Position error at the final time.
    pub final_deviation: f64,
    pub energy_drift: f64,
    pub momentum_drift: f64,
    pub samples: usize,
}

/// Integrates `branch` over `[0, horizon]` and measures how well the
/// trajectory stays on the Möbius flow of its field.
pub fn verify_invariance(
    branch: &SolutionBranch,
    horizon: f64,
    opts: &IntegratorOptions,
) -> Result<InvarianceReport, EquilibriaError> {
    let config = branch.config()?;
    let initial = branch.state();
    let traj = integrate(&initial, &config, horizon, opts)?;
    let e0 = energy(&initial, &config)?;
    let j0 = angular_momentum(&initial, &config)?;
    let radii0: Vec<f64> = initial.positions.iter().map(|z| z.norm()).collect();
    let track_radius = branch.kind == KillingKind::EllipticB;
    let mut out = InvarianceReport {
        max_residual: 0.0,
        max_flow_deviation: 0.0,
        max_radius_drift: track_radius.then_some(0.0),
        final_deviation: 0.0,
        energy_drift: 0.0,
        momentum_drift: 0.0,
        samples: traj.samples.len(),
    };
    for s in &traj.samples {
        let flow = exp_subgroup(branch.kind, s.t);
        let mut deviation: f64 = 0.0;
        for (z0, z) in initial.positions.iter().zip(&s.positions) {
            let expected = flow.apply_finite(*z0).ok_or_else(|| {
                EquilibriaError::InvalidInput(format!("flow sends {z0} to infinity at t = {}", s.t))
            })?;
            deviation = deviation.max((z - expected).norm());
        }
        out.max_flow_deviation = out.max_flow_deviation.max(deviation);
        out.final_deviation = deviation;
        out.max_residual = out.max_residual.max(residual(branch.kind, &s.positions, &config)?.max_abs);
        if let Some(drift) = out.max_radius_drift.as_mut() {
            for (r0, z) in radii0.iter().zip(&s.positions) {
                *drift = drift.max((z.norm() - r0).abs());
            }
        }
        out.energy_drift = out.energy_drift.max((energy(s, &config)? - e0).abs() / e0.abs().max(1.0));
        out.momentum_drift = out
            .momentum_drift
            .max((angular_momentum(s, &config)? - j0).abs() / j0.abs().max(1.0));
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
