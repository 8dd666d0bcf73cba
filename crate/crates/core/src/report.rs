//! Serialized forms: JSON problem and solution documents, CSV trajectories.
//!
//! Complex numbers are written as `[re, im]` pairs. A solution report is a
//! superset of a problem document, so solver output can be fed straight back
//! into verification.

use crate::dynamics::{angular_momentum, energy, DynamicsError, SystemConfig, SystemState, Trajectory};
use crate::equilibria::{EquilibriaError, SolutionBranch};
use crate::geometry::{GeometryError, RegionLabel, SpaceForm};
use crate::mobius::{killing_field, KillingKind};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("invalid document: {0}")]
    Invalid(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Equilibria(#[from] EquilibriaError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub fn to_pair(z: &Complex64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn from_pair(p: &[f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

/// Input for simulation and verification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemDocument {
    #[serde(rename = "R")]
    pub radius: f64,
    pub masses: Vec<f64>,
    pub positions: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocities: Option<Vec<[f64; 2]>>,
    #[serde(default, alias = "kind", skip_serializing_if = "Option::is_none")]
    pub field: Option<KillingKind>,
}

impl ProblemDocument {
    pub fn config(&self) -> Result<SystemConfig, ReportError> {
        let form = SpaceForm::new(self.radius)?;
        if self.positions.len() != self.masses.len() {
            return Err(ReportError::Invalid(format!(
                "{} positions for {} masses",
                self.positions.len(),
                self.masses.len()
            )));
        }
        if let Some(v) = &self.velocities {
            if v.len() != self.masses.len() {
                return Err(ReportError::Invalid(format!(
                    "{} velocities for {} masses",
                    v.len(),
                    self.masses.len()
                )));
            }
        }
        Ok(SystemConfig::new(form, self.masses.clone())?)
    }

    pub fn positions(&self) -> Vec<Complex64> {
        self.positions.iter().map(from_pair).collect()
    }

    /// Initial state at `t = 0`. Missing velocities come from `field`
    /// (`override_field` wins when given); with neither, bodies start at rest.
    pub fn state(&self, override_field: Option<KillingKind>) -> SystemState {
        let positions = self.positions();
        let velocities = match (&self.velocities, override_field.or(self.field)) {
            (Some(v), _) => v.iter().map(from_pair).collect(),
            (None, Some(kind)) => positions.iter().map(|z| killing_field(kind, *z)).collect(),
            (None, None) => vec![Complex64::new(0.0, 0.0); positions.len()],
        };
        SystemState::new(0.0, positions, velocities)
    }
}

/// One solver branch with its residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionReport {
    pub kind: KillingKind,
    pub family_label: String,
    #[serde(rename = "R")]
    pub radius: f64,
    pub masses: Vec<f64>,
    pub positions: Vec<[f64; 2]>,
    pub velocities: Vec<[f64; 2]>,
    pub regions: Vec<RegionLabel>,
    pub degenerate: bool,
    pub residual_max: f64,
}

impl SolutionReport {
    pub fn from_branch(branch: &SolutionBranch) -> Result<Self, ReportError> {
        let residual = branch.residual()?;
        Ok(SolutionReport {
            kind: branch.kind,
            family_label: branch.family_label.clone(),
            radius: branch.form.radius(),
            masses: branch.masses.clone(),
            positions: branch.positions.iter().map(to_pair).collect(),
            velocities: branch.velocities.iter().map(to_pair).collect(),
            regions: branch.regions.clone(),
            degenerate: branch.degenerate,
            residual_max: residual.max_abs,
        })
    }

    pub fn problem(&self) -> ProblemDocument {
        ProblemDocument {
            radius: self.radius,
            masses: self.masses.clone(),
            positions: self.positions.clone(),
            velocities: Some(self.velocities.clone()),
            field: Some(self.kind),
        }
    }
}

/// `t, re_z1, im_z1, …, re_zn, im_zn, re_v1, im_v1, …, re_vn, im_vn, energy, angmom`.
pub fn csv_header(n: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    for prefix in ["z", "v"] {
        for k in 1..=n {
            h.push(format!("re_{prefix}{k}"));
            h.push(format!("im_{prefix}{k}"));
        }
    }
    h.push("energy".into());
    h.push("angmom".into());
    h
}

/// Seventeen significant digits, enough to round-trip any `f64`.
fn full(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes every sample of `traj` with its energy and angular momentum.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, config: &SystemConfig, out: W) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(csv_header(config.len()))?;
    for s in &traj.samples {
        let mut row = vec![full(s.t)];
        for z in s.positions.iter().chain(&s.velocities) {
            row.push(full(z.re));
            row.push(full(z.im));
        }
        row.push(full(energy(s, config)?));
        row.push(full(angular_momentum(s, config)?));
        w.write_record(&row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// One parsed CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvSample {
    pub state: SystemState,
    pub energy: f64,
    pub angmom: f64,
}

/// Reads a file written by [`write_trajectory_csv`].
pub fn read_trajectory_csv<R: Read>(input: R) -> Result<Vec<CsvSample>, ReportError> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    let cols = headers.len();
    if cols < 7 || (cols - 3) % 4 != 0 {
        return Err(ReportError::Invalid(format!("unexpected column count {cols}")));
    }
    let n = (cols - 3) / 4;
    let expected = csv_header(n);
    if headers.iter().zip(&expected).any(|(a, b)| a.trim() != b) {
        return Err(ReportError::Invalid("unexpected header".into()));
    }
    let mut out = Vec::new();
    for record in r.records() {
        let record = record?;
        let v = record
            .iter()
            .map(|f| f.trim().parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| ReportError::Invalid(e.to_string()))?;
        let pair = |i: usize| Complex64::new(v[i], v[i + 1]);
        let positions = (0..n).map(|k| pair(1 + 2 * k)).collect();
        let velocities = (0..n).map(|k| pair(1 + 2 * n + 2 * k)).collect();
        out.push(CsvSample {
            state: SystemState::new(v[0], positions, velocities),
            energy: v[cols - 2],
            angmom: v[cols - 1],
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate, IntegratorOptions};
    use crate::equilibria::{residual, two_body_solve};

    #[test]
    fn header_layout() {
        assert_eq!(
            csv_header(2),
            ["t", "re_z1", "im_z1", "re_z2", "im_z2", "re_v1", "im_v1", "re_v2", "im_v2", "energy", "angmom"]
        );
    }

    #[test]
    fn problem_document_parsing() {
        let doc: ProblemDocument =
            serde_json::from_str(r#"{"R": 1.0, "masses": [1, 2], "positions": [[0.1, 0.0], [-0.2, 0.3]], "kind": "elliptic-b"}"#)
                .unwrap();
        assert_eq!(doc.field, Some(KillingKind::EllipticB));
        let s = doc.state(None);
        assert_eq!(s.velocities[1], Complex64::new(0.0, 2.0) * s.positions[1]);
        let at_rest = doc.state(Some(KillingKind::Parabolic));
        assert_eq!(at_rest.velocities[0], Complex64::new(1.0, 0.0));
        let bad: ProblemDocument = serde_json::from_str(r#"{"R": 1.0, "masses": [1, 2], "positions": [[0.1, 0.0]]}"#).unwrap();
        assert!(bad.config().is_err());
        let bad: ProblemDocument = serde_json::from_str(r#"{"R": -1.0, "masses": [1, 2], "positions": [[0.1, 0.0], [1, 1]]}"#).unwrap();
        assert!(bad.config().is_err());
    }

    #[test]
    fn solution_report_reads_as_problem() {
        let branch = &two_body_solve(1.0, &SpaceForm::unit()).unwrap()[0];
        let report = SolutionReport::from_branch(branch).unwrap();
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains(r#""kind":"elliptic-b""#) && json.contains(r#""regions":["Omega1","Omega1"]"#));
        let doc: ProblemDocument = serde_json::from_str(&json).unwrap();
        assert_eq!(doc, report.problem());
        let back: SolutionReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let branch = &two_body_solve(1.0, &SpaceForm::unit()).unwrap()[2];
        let config = branch.config().unwrap();
        let traj = integrate(&branch.state(), &config, 1.0, &IntegratorOptions::default()).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&traj, &config, &mut buf).unwrap();
        let rows = read_trajectory_csv(buf.as_slice()).unwrap();
        assert_eq!(rows.len(), traj.samples.len());
        for (row, s) in rows.iter().zip(&traj.samples) {
            assert_eq!(&row.state, s);
            assert_eq!(row.energy, energy(s, &config).unwrap());
            let a = residual(branch.kind, &row.state.positions, &config).unwrap();
            let b = residual(branch.kind, &s.positions, &config).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn csv_rejects_foreign_headers() {
        assert!(read_trajectory_csv("a,b,c\n1,2,3\n".as_bytes()).is_err());
    }
}
