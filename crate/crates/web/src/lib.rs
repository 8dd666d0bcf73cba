//! Browser bindings: each export takes and returns JSON strings so the page
//! needs no generated TypeScript types.

use mobius_nbody::dynamics::{conservation_drift, integrate, IntegratorOptions};
use mobius_nbody::equilibria::{
    euler3_solve, square4_solve, two_body_solve, FGAnalysis, FgProblem, SolutionBranch,
    TwoBodyFamily,
};
use mobius_nbody::geometry::sphere_lift;
use mobius_nbody::report::SolutionReport;
use mobius_nbody::SpaceForm;
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn parse_problem(problem: &str) -> Result<FgProblem, String> {
    serde_json::from_str(problem).map_err(err)
}

#[derive(Serialize)]
struct Curves {
    alpha: Vec<f64>,
    f: Vec<f64>,
    g: Vec<f64>,
    analysis: FGAnalysis,
}

/// Samples `F` and `G` on `(0, R)` and reports where they meet.
pub fn fg_curves(problem: &str, radius: f64, samples: usize) -> Result<String, String> {
    let form = SpaceForm::new(radius).map_err(err)?;
    let analysis = FGAnalysis::new(parse_problem(problem)?, form).map_err(err)?;
    let n = samples.clamp(2, 10_000);
    let alpha: Vec<f64> = (1..=n).map(|i| radius * i as f64 / (n + 1) as f64).collect();
    let f = alpha.iter().map(|a| analysis.f(*a)).collect();
    let g = alpha.iter().map(|a| analysis.g(*a)).collect();
    serde_json::to_string(&Curves { alpha, f, g, analysis }).map_err(err)
}

fn branches(problem: FgProblem, form: &SpaceForm) -> Result<Vec<SolutionBranch>, String> {
    match problem {
        FgProblem::TwoBody { family, mass } => two_body_solve(mass, form).map(|all| {
            // labels 1.* and 2.* belong to one family each; 3.* is the shared threshold pair
            let own = match family {
                TwoBodyFamily::Opposite => "1.",
                TwoBodyFamily::Skew => "2.",
            };
            all.into_iter()
                .filter(|b| b.family_label.starts_with(own) || b.family_label.starts_with("3."))
                .collect()
        }),
        FgProblem::Euler3 { mass, central_mass } => euler3_solve(mass, central_mass, form).map(|(_, b)| b),
        FgProblem::Square4 { mass } => square4_solve(mass, form).map(|(_, b)| b),
    }
    .map_err(err)
}

/// Every rotating branch of the problem, as solution reports.
pub fn solve(problem: &str, radius: f64) -> Result<String, String> {
    let form = SpaceForm::new(radius).map_err(err)?;
    let reports = branches(parse_problem(problem)?, &form)?
        .iter()
        .map(SolutionReport::from_branch)
        .collect::<Result<Vec<_>, _>>()
        .map_err(err)?;
    serde_json::to_string(&reports).map_err(err)
}

#[derive(Serialize)]
struct Animation {
    t: Vec<f64>,
    /// `frames[i][k]` is body `k` on the sphere at time `t[i]`.
    frames: Vec<Vec<[f64; 3]>>,
    energy_drift: f64,
    momentum_drift: f64,
}

/// Integrates a solution report and lifts every sample to the sphere.
pub fn simulate(report: &str, t_end: f64, samples: usize) -> Result<String, String> {
    let report: SolutionReport = serde_json::from_str(report).map_err(err)?;
    let doc = report.problem();
    let config = doc.config().map_err(err)?;
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err("t_end must be positive".into());
    }
    let opts = IntegratorOptions {
        max_step: Some(t_end / samples.clamp(10, 10_000) as f64),
        ..IntegratorOptions::default()
    };
    let traj = integrate(&doc.state(None), &config, t_end, &opts).map_err(err)?;
    let (energy_drift, momentum_drift) = conservation_drift(&traj, &config).map_err(err)?;
    let form = *config.form();
    let frames = traj
        .samples
        .iter()
        .map(|s| {
            s.positions
                .iter()
                .map(|z| {
                    let p = sphere_lift((*z).into(), &form);
                    [p.x, p.y, p.w]
                })
                .collect()
        })
        .collect();
    let t = traj.samples.iter().map(|s| s.t).collect();
    serde_json::to_string(&Animation {
        t,
        frames,
        energy_drift,
        momentum_drift,
    })
    .map_err(err)
}

#[wasm_bindgen(js_name = fgCurves)]
pub fn fg_curves_js(problem: &str, radius: f64, samples: usize) -> Result<String, JsError> {
    fg_curves(problem, radius, samples).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = solve)]
pub fn solve_js(problem: &str, radius: f64) -> Result<String, JsError> {
    solve(problem, radius).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = simulate)]
pub fn simulate_js(report: &str, t_end: f64, samples: usize) -> Result<String, JsError> {
    simulate(report, t_end, samples).map_err(|e| JsError::new(&e))
}
