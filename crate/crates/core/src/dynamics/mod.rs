//! Cotangent potential, its gradient, the equations of motion and their
//! numerical integration.
//!
//! The equations of motion read
//!
//! ```text
//! m_k z̈_k − 2 m_k z̄_k ż_k² / (R² + |z_k|²) = (2 / λ(z_k)) ∂U/∂z̄_k
//! ```
//!
//! with `λ` the conformal factor. They are the Euler–Lagrange equations of
//! `L = ½ Σ m_k λ(z_k) |ż_k|² + U`, which gives the conserved energy
//! `E = ½ Σ m_k λ |ż_k|² − U` and, since `U` is invariant under
//! `z ↦ e^{iθ} z`, the angular momentum `J = Σ m_k λ Im(z̄_k ż_k)`.

pub mod ode;

use crate::geometry::{conformal_factor, cot_numerator, SingularKind, SingularPair, SpaceForm, PAIR_TOL};
use num_complex::Complex64;
use ode::{dopri5, OdeError, StepControl, StepStats};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("state has {positions} positions and {velocities} velocities for {bodies} bodies")]
    ShapeMismatch {
        bodies: usize,
        positions: usize,
        velocities: usize,
    },
    #[error(transparent)]
    Singular(#[from] SingularPair),
    #[error("bodies {first} and {second} approached a singularity ({kind:?}) at t = {t}")]
    SingularityApproached {
        first: usize,
        second: usize,
        kind: SingularKind,
        t: f64,
    },
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("step budget exhausted at t = {t}")]
    MaxStepsExceeded { t: f64 },
    #[error("end time {t_end} must exceed start time {t0}")]
    InvalidHorizon { t0: f64, t_end: f64 },
}

/// Radius and masses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    form: SpaceForm,
    masses: Vec<f64>,
}

impl SystemConfig {
    pub fn new(form: SpaceForm, masses: Vec<f64>) -> Result<Self, DynamicsError> {
        if masses.len() < 2 {
            return Err(DynamicsError::InvalidConfig(format!(
                "need at least two bodies, got {}",
                masses.len()
            )));
        }
        if let Some(m) = masses.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
            return Err(DynamicsError::InvalidConfig(format!(
                "masses must be positive, got {m}"
            )));
        }
        Ok(SystemConfig { form, masses })
    }

    pub fn form(&self) -> &SpaceForm {
        &self.form
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }
}

/// Positions and velocities at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    pub t: f64,
    pub positions: Vec<Complex64>,
    pub velocities: Vec<Complex64>,
}

impl SystemState {
    pub fn new(t: f64, positions: Vec<Complex64>, velocities: Vec<Complex64>) -> Self {
        SystemState {
            t,
            positions,
            velocities,
        }
    }

    pub fn at_rest(positions: Vec<Complex64>) -> Self {
        let n = positions.len();
        SystemState::new(0.0, positions, vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn check_shape(&self, config: &SystemConfig) -> Result<(), DynamicsError> {
        let n = config.len();
        if self.positions.len() != n || self.velocities.len() != n {
            return Err(DynamicsError::ShapeMismatch {
                bodies: n,
                positions: self.positions.len(),
                velocities: self.velocities.len(),
            });
        }
        Ok(())
    }

    /// Flattened `[re z, im z, re ż, im ż]` per body.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut y = Vec::with_capacity(4 * self.positions.len());
        for (z, v) in self.positions.iter().zip(&self.velocities) {
            y.extend_from_slice(&[z.re, z.im, v.re, v.im]);
        }
        y
    }

    pub fn from_flat(t: f64, y: &[f64]) -> Self {
        let (positions, velocities) = y
            .chunks_exact(4)
            .map(|c| (Complex64::new(c[0], c[1]), Complex64::new(c[2], c[3])))
            .unzip();
        SystemState::new(t, positions, velocities)
    }
}

/// `Σ_{j≠k} m_j (|z_j|² + R²)² (R² + z̄_j z_k)(z_j − z_k) / (|z_j − z_k|³ |R² + z̄_j z_k|³)`,
/// the right-hand side shared by every residual system and, up to the factor
/// `m_k (R² + |z_k|²) / (4R²)`, the gradient `∂U/∂z̄_k`.
pub fn interaction_sum(
    positions: &[Complex64],
    masses: &[f64],
    form: &SpaceForm,
    k: usize,
) -> Result<Complex64, SingularPair> {
    let r2 = form.radius_sq();
    let zk = positions[k];
    let mut sum = Complex64::new(0.0, 0.0);
    for (j, (&zj, &mj)) in positions.iter().zip(masses).enumerate() {
        if j == k {
            continue;
        }
        let diff = zj - zk;
        let conj_term = r2 + zj.conj() * zk;
        let sep = diff.norm();
        let gap = conj_term.norm();
        if sep <= PAIR_TOL * form.radius() {
            return Err(pair_error(k, j, SingularKind::Collision));
        }
        if gap <= PAIR_TOL * r2 {
            return Err(pair_error(k, j, SingularKind::Antipodal));
        }
        let weight = zj.norm_sqr() + r2;
        sum += mj * weight * weight * conj_term * diff / (sep.powi(3) * gap.powi(3));
    }
    Ok(sum)
}

fn pair_error(k: usize, j: usize, kind: SingularKind) -> SingularPair {
    SingularPair {
        first: k.min(j),
        second: k.max(j),
        kind,
    }
}

/// `U_R = (1/R) Σ_{k<j} m_k m_j cot(d_kj / R)`.
pub fn potential(positions: &[Complex64], config: &SystemConfig) -> Result<f64, SingularPair> {
    let form = config.form();
    let r = form.radius();
    let r2 = r * r;
    let m = config.masses();
    let mut u = 0.0;
    for k in 0..positions.len() {
        for j in k + 1..positions.len() {
            let (zk, zj) = (positions[k], positions[j]);
            let sep = (zj - zk).norm();
            let gap = (r2 + zj.conj() * zk).norm();
            if sep <= PAIR_TOL * r {
                return Err(pair_error(k, j, SingularKind::Collision));
            }
            if gap <= PAIR_TOL * r2 {
                return Err(pair_error(k, j, SingularKind::Antipodal));
            }
            u += m[k] * m[j] * cot_numerator(zk, zj, r2) / (2.0 * r * sep * gap);
        }
    }
    Ok(u / r)
}

/// The Wirtinger derivative `∂U/∂z̄_k` in closed form.
pub fn grad_potential(
    positions: &[Complex64],
    config: &SystemConfig,
    k: usize,
) -> Result<Complex64, SingularPair> {
    let r2 = config.form().radius_sq();
    let s = interaction_sum(positions, config.masses(), config.form(), k)?;
    Ok(s * (config.masses()[k] * (r2 + positions[k].norm_sqr()) / (4.0 * r2)))
}

/// Acceleration of a free particle along its geodesic, `2 z̄ ż² / (R² + |z|²)`.
#[inline]
pub fn geodesic_acceleration(z: Complex64, v: Complex64, form: &SpaceForm) -> Complex64 {
    2.0 * z.conj() * v * v / (form.radius_sq() + z.norm_sqr())
}

/// `z̈_k` from the equations of motion.
pub fn acceleration(state: &SystemState, config: &SystemConfig) -> Result<Vec<Complex64>, DynamicsError> {
    state.check_shape(config)?;
    let form = config.form();
    let masses = config.masses();
    (0..config.len())
        .map(|k| {
            let z = state.positions[k];
            let grad = grad_potential(&state.positions, config, k)?;
            let lambda = conformal_factor(z, form);
            Ok(geodesic_acceleration(z, state.velocities[k], form)
                + grad * (2.0 / (masses[k] * lambda)))
        })
        .collect()
}

pub fn kinetic_energy(state: &SystemState, config: &SystemConfig) -> f64 {
    let form = config.form();
    state
        .positions
        .iter()
        .zip(&state.velocities)
        .zip(config.masses())
        .map(|((z, v), m)| 0.5 * m * conformal_factor(*z, form) * v.norm_sqr())
        .sum()
}

/// `E = ½ Σ m_k λ(z_k) |ż_k|² − U_R`.
pub fn energy(state: &SystemState, config: &SystemConfig) -> Result<f64, DynamicsError> {
    state.check_shape(config)?;
    Ok(kinetic_energy(state, config) - potential(&state.positions, config)?)
}

/// `J = Σ m_k λ(z_k) Im(z̄_k ż_k)`.
pub fn angular_momentum(state: &SystemState, config: &SystemConfig) -> Result<f64, DynamicsError> {
    state.check_shape(config)?;
    let form = config.form();
    Ok(state
        .positions
        .iter()
        .zip(&state.velocities)
        .zip(config.masses())
        .map(|((z, v), m)| m * conformal_factor(*z, form) * (z.conj() * v).im)
        .sum())
}

/// Largest relative gap between [`grad_potential`] and the central
/// difference `½(∂_x + i∂_y) U`, over bodies.
pub fn validate_gradient(
    positions: &[Complex64],
    config: &SystemConfig,
    step: f64,
) -> Result<f64, SingularPair> {
    let mut work = positions.to_vec();
    let grads = (0..positions.len())
        .map(|k| grad_potential(positions, config, k))
        .collect::<Result<Vec<_>, _>>()?;
    let floor = 1e-12 * grads.iter().map(|g| g.norm()).fold(0.0, f64::max);
    let mut worst: f64 = 0.0;
    for (k, g) in grads.iter().enumerate() {
        let mut shifted = |delta: Complex64| {
            work[k] = positions[k] + delta;
            let u = potential(&work, config);
            work[k] = positions[k];
            u
        };
        let dx = (shifted(Complex64::new(step, 0.0))? - shifted(Complex64::new(-step, 0.0))?) / (2.0 * step);
        let dy = (shifted(Complex64::new(0.0, step))? - shifted(Complex64::new(0.0, -step))?) / (2.0 * step);
        let fd = Complex64::new(0.5 * dx, 0.5 * dy);
        worst = worst.max((g - fd).norm() / g.norm().max(floor).max(f64::MIN_POSITIVE));
    }
    Ok(worst)
}

/// Integration tolerances and the singularity guard.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Stop once a pair separation drops below `singular_tol·R` or an
    /// antipodal gap below `singular_tol·R²`.
    pub singular_tol: f64,
    pub max_steps: usize,
    pub max_step: Option<f64>,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            singular_tol: 1e-8,
            max_steps: 2_000_000,
            max_step: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub integrator: String,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub rhs_evals: usize,
    pub min_step: f64,
    pub max_step: f64,
    pub options: IntegratorOptions,
}

/// Accepted steps of one integration, starting with the initial state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<SystemState>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn first(&self) -> &SystemState {
        &self.samples[0]
    }

    pub fn last(&self) -> &SystemState {
        self.samples.last().expect("trajectory always holds the initial state")
    }
}

fn rhs(config: &SystemConfig, y: &[f64], dy: &mut [f64]) -> Result<(), DynamicsError> {
    let form = config.form();
    let masses = config.masses();
    let n = config.len();
    let mut positions = Vec::with_capacity(n);
    for c in y.chunks_exact(4) {
        positions.push(Complex64::new(c[0], c[1]));
    }
    for k in 0..n {
        let z = positions[k];
        let v = Complex64::new(y[4 * k + 2], y[4 * k + 3]);
        let grad = grad_potential(&positions, config, k)?;
        let a = geodesic_acceleration(z, v, form) + grad * (2.0 / (masses[k] * conformal_factor(z, form)));
        dy[4 * k] = v.re;
        dy[4 * k + 1] = v.im;
        dy[4 * k + 2] = a.re;
        dy[4 * k + 3] = a.im;
    }
    Ok(())
}

fn guard(positions: &[Complex64], form: &SpaceForm, tol: f64, t: f64) -> Result<(), DynamicsError> {
    let (r, r2) = (form.radius(), form.radius_sq());
    for (k, &zk) in positions.iter().enumerate() {
        for (j, &zj) in positions.iter().enumerate().skip(k + 1) {
            let kind = if (zk - zj).norm() <= tol * r {
                SingularKind::Collision
            } else if (r2 + zj.conj() * zk).norm() <= tol * r2 {
                SingularKind::Antipodal
            } else {
                continue;
            };
            return Err(DynamicsError::SingularityApproached {
                first: k,
                second: j,
                kind,
                t,
            });
        }
    }
    Ok(())
}

/// Integrates the equations of motion from `initial` to `t_end` with an
/// adaptive Dormand–Prince 5(4) pair, recording every accepted step.
pub fn integrate(
    initial: &SystemState,
    config: &SystemConfig,
    t_end: f64,
    opts: &IntegratorOptions,
) -> Result<Trajectory, DynamicsError> {
    initial.check_shape(config)?;
    if t_end.is_nan() || t_end <= initial.t {
        return Err(DynamicsError::InvalidHorizon {
            t0: initial.t,
            t_end,
        });
    }
    let form = *config.form();
    let ctl = StepControl {
        rel_tol: opts.rel_tol,
        abs_tol: opts.abs_tol,
        max_steps: opts.max_steps,
        initial_step: None,
        max_step: opts.max_step.unwrap_or(f64::INFINITY),
    };
    let mut samples = Vec::new();
    let stats: StepStats = dopri5(
        |_, y, dy| {
            rhs(config, y, dy).map_err(|e| match e {
                // a stage landed on the singular set
                DynamicsError::Singular(p) => DynamicsError::SingularityApproached {
                    first: p.first,
                    second: p.second,
                    kind: p.kind,
                    t: f64::NAN,
                },
                other => other,
            })
        },
        initial.t,
        &initial.to_flat(),
        t_end,
        &ctl,
        |t, y| {
            let state = SystemState::from_flat(t, y);
            guard(&state.positions, &form, opts.singular_tol, t)?;
            samples.push(state);
            Ok(())
        },
    )
    .map_err(|e| match e {
        OdeError::Stopped(DynamicsError::SingularityApproached {
            first,
            second,
            kind,
            t,
        }) if t.is_nan() => DynamicsError::SingularityApproached {
            first,
            second,
            kind,
            t: samples.last().map_or(initial.t, |s| s.t),
        },
        OdeError::Stopped(err) => err,
        OdeError::StepSizeUnderflow { t, h } => DynamicsError::StepSizeUnderflow { t, h },
        OdeError::MaxStepsExceeded { t } => DynamicsError::MaxStepsExceeded { t },
    })?;
    Ok(Trajectory {
        samples,
        meta: TrajectoryMeta {
            integrator: "dopri5".to_string(),
            accepted_steps: stats.accepted,
            rejected_steps: stats.rejected,
            rhs_evals: stats.rhs_evals,
            min_step: stats.min_step,
            max_step: stats.max_step,
            options: *opts,
        },
    })
}

/// Largest relative drift of energy and angular momentum along a trajectory,
/// each measured against `max(1, |initial value|)`.
pub fn conservation_drift(traj: &Trajectory, config: &SystemConfig) -> Result<(f64, f64), DynamicsError> {
    let e0 = energy(traj.first(), config)?;
    let j0 = angular_momentum(traj.first(), config)?;
    let mut de: f64 = 0.0;
    let mut dj: f64 = 0.0;
    for s in &traj.samples {
        de = de.max((energy(s, config)? - e0).abs() / e0.abs().max(1.0));
        dj = dj.max((angular_momentum(s, config)? - j0).abs() / j0.abs().max(1.0));
    }
    Ok((de, dj))
}
