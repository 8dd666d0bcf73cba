//! Dormand–Prince 5(4) with FSAL and a PI step-size controller.

/// Tolerances and limits for [`dopri5`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    pub initial_step: Option<f64>,
    pub max_step: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_steps: 2_000_000,
            initial_step: None,
            max_step: f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
    pub min_step: f64,
    pub max_step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OdeError<E> {
    /// The right-hand side or the observer refused to continue.
    Stopped(E),
    StepSizeUnderflow { t: f64, h: f64 },
    MaxStepsExceeded { t: f64 },
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;

fn weighted_rms(e: &[f64], y0: &[f64], y1: &[f64], ctl: &StepControl) -> f64 {
    let sum: f64 = e
        .iter()
        .zip(y0.iter().zip(y1))
        .map(|(ei, (a, b))| {
            let sc = ctl.abs_tol + ctl.rel_tol * a.abs().max(b.abs());
            (ei / sc).powi(2)
        })
        .sum();
    (sum / e.len() as f64).sqrt()
}

/// Integrates `y' = f(t, y)` from `t0` to `t_end` (`t_end > t0`). The
/// observer sees every accepted step, including the initial point, and may
/// stop the integration by returning an error.
pub fn dopri5<E, F, O>(
    mut f: F,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    ctl: &StepControl,
    mut observe: O,
) -> Result<StepStats, OdeError<E>>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), E>,
    O: FnMut(f64, &[f64]) -> Result<(), E>,
{
    let n = y0.len();
    let mut stats = StepStats {
        min_step: f64::INFINITY,
        ..StepStats::default()
    };
    let mut y = y0.to_vec();
    let mut t = t0;
    observe(t, &y).map_err(OdeError::Stopped)?;

    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    let mut err = vec![0.0; n];

    f(t, &y, &mut k1).map_err(OdeError::Stopped)?;
    stats.rhs_evals += 1;

    let span = t_end - t0;
    let mut h = match ctl.initial_step {
        Some(h) => h,
        None => {
            let h = initial_step(&mut f, t, &y, &k1, ctl, &mut stats).map_err(OdeError::Stopped)?;
            h.min(span)
        }
    }
    .min(ctl.max_step);
    let mut fac_old: f64 = 1e-4;
    let mut last_rejected = false;

    while t < t_end {
        if stats.accepted + stats.rejected >= ctl.max_steps {
            return Err(OdeError::MaxStepsExceeded { t });
        }
        if h <= 16.0 * f64::EPSILON * t.abs().max(1.0) {
            return Err(OdeError::StepSizeUnderflow { t, h });
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }

        for i in 0..n {
            ytmp[i] = y[i] + h * A21 * k1[i];
        }
        f(t + C2 * h, &ytmp, &mut k2).map_err(OdeError::Stopped)?;
        for i in 0..n {
            ytmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        f(t + C3 * h, &ytmp, &mut k3).map_err(OdeError::Stopped)?;
        for i in 0..n {
            ytmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        f(t + C4 * h, &ytmp, &mut k4).map_err(OdeError::Stopped)?;
        for i in 0..n {
            ytmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        f(t + C5 * h, &ytmp, &mut k5).map_err(OdeError::Stopped)?;
        for i in 0..n {
            ytmp[i] = y[i]
                + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        f(t + h, &ytmp, &mut k6).map_err(OdeError::Stopped)?;
        for i in 0..n {
            ynew[i] = y[i]
                + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        f(t + h, &ynew, &mut k7).map_err(OdeError::Stopped)?;
        stats.rhs_evals += 6;

        for i in 0..n {
            err[i] = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let e = weighted_rms(&err, &y, &ynew, ctl);
        let fac11 = e.powf(0.2 - BETA * 0.75);

        if e <= 1.0 {
            let fac = (fac11 / fac_old.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            fac_old = e.max(1e-4);
            stats.accepted += 1;
            stats.min_step = stats.min_step.min(h);
            stats.max_step = stats.max_step.max(h);
            t = if last { t_end } else { t + h };
            std::mem::swap(&mut y, &mut ynew);
            std::mem::swap(&mut k1, &mut k7);
            observe(t, &y).map_err(OdeError::Stopped)?;
            let mut h_new = (h / fac).min(ctl.max_step);
            if last_rejected {
                h_new = h_new.min(h);
            }
            last_rejected = false;
            h = h_new;
        } else {
            stats.rejected += 1;
            last_rejected = true;
            h /= (fac11 / SAFETY).min(1.0 / FAC_MIN);
        }
    }
    Ok(stats)
}

fn initial_step<E, F>(
    f: &mut F,
    t: f64,
    y: &[f64],
    f0: &[f64],
    ctl: &StepControl,
    stats: &mut StepStats,
) -> Result<f64, E>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), E>,
{
    let n = y.len();
    let scale = |i: usize| ctl.abs_tol + ctl.rel_tol * y[i].abs();
    let rms = |v: &[f64]| {
        ((0..n).map(|i| (v[i] / scale(i)).powi(2)).sum::<f64>() / n as f64).sqrt()
    };
    let d0 = rms(y);
    let d1 = rms(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let y1: Vec<f64> = (0..n).map(|i| y[i] + h0 * f0[i]).collect();
    let mut f1 = vec![0.0; n];
    f(t + h0, &y1, &mut f1)?;
    stats.rhs_evals += 1;
    let diff: Vec<f64> = (0..n).map(|i| f1[i] - f0[i]).collect();
    let d2 = rms(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    Ok((100.0 * h0).min(h1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(
        f: impl FnMut(f64, &[f64], &mut [f64]) -> Result<(), ()>,
        y0: &[f64],
        t_end: f64,
        rtol: f64,
    ) -> (Vec<f64>, StepStats) {
        let ctl = StepControl {
            rel_tol: rtol,
            abs_tol: rtol * 1e-2,
            ..StepControl::default()
        };
        let mut last = y0.to_vec();
        let stats = dopri5(f, 0.0, y0, t_end, &ctl, |_, y| {
            last = y.to_vec();
            Ok(())
        })
        .unwrap();
        (last, stats)
    }

    #[test]
    fn exponential_decay() {
        let (y, stats) = run(
            |_, y, dy| {
                dy[0] = -y[0];
                Ok(())
            },
            &[1.0],
            5.0,
            1e-10,
        );
        assert!((y[0] - (-5.0f64).exp()).abs() < 1e-11);
        assert!(stats.accepted > 5);
    }

    #[test]
    fn harmonic_oscillator_period() {
        let two_pi = 2.0 * std::f64::consts::PI;
        let (y, _) = run(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
                Ok(())
            },
            &[1.0, 0.0],
            two_pi,
            1e-11,
        );
        assert!((y[0] - 1.0).abs() < 1e-9 && y[1].abs() < 1e-9);
    }

    #[test]
    fn error_shrinks_with_tolerance() {
        let exact = 1.0 / (1.0 + 4.0f64);
        let rhs = |_: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = -y[0] * y[0];
            Ok(())
        };
        let (coarse, _) = run(rhs, &[1.0], 4.0, 1e-5);
        let (fine, _) = run(rhs, &[1.0], 4.0, 1e-10);
        assert!((fine[0] - exact).abs() < (coarse[0] - exact).abs());
        assert!((fine[0] - exact).abs() < 1e-10);
    }

    #[test]
    fn observer_can_stop() {
        let ctl = StepControl::default();
        let res = dopri5(
            |_, _y: &[f64], dy: &mut [f64]| {
                dy[0] = 1.0;
                Ok(())
            },
            0.0,
            &[0.0],
            10.0,
            &ctl,
            |t, _| if t > 1.0 { Err("stop") } else { Ok(()) },
        );
        assert_eq!(res, Err(OdeError::Stopped("stop")));
    }
}
