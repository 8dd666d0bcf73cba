use super::*;
use crate::dynamics::acceleration;
use crate::mobius::conjugator_to_rotation;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn form(r: f64) -> SpaceForm {
    SpaceForm::new(r).unwrap()
}

fn config(r: f64, masses: &[f64]) -> SystemConfig {
    SystemConfig::new(form(r), masses.to_vec()).unwrap()
}

#[test]
fn two_body_roots_frozen_at_unit_mass() {
    let unit = form(1.0);
    let a = two_body_family_analysis(TwoBodyFamily::Opposite, 1.0, &unit).unwrap();
    let roots: Vec<f64> = a.intersections.iter().map(|i| i.alpha).collect();
    assert!((roots[0] - 0.23331768838087596).abs() < 1e-14);
    assert!((roots[1] - 0.6216421923094606).abs() < 1e-14);
    let b = two_body_family_analysis(TwoBodyFamily::Skew, 1.0, &unit).unwrap();
    assert!((b.intersections[0].alpha - 0.13165249758739575).abs() < 1e-14);
    assert!((b.intersections[1].alpha - 0.7673269879789604).abs() < 1e-14);
    for i in a.intersections.iter().chain(&b.intersections) {
        assert!(i.transversal);
    }
}

#[test]
fn two_body_intersections_satisfy_f_equals_g() {
    for r in [0.5, 1.0, 2.0] {
        let fm = form(r);
        let r3 = r * r * r;
        for m in [0.1 * r3, r3, 1.9 * r3] {
            for fam in [TwoBodyFamily::Opposite, TwoBodyFamily::Skew] {
                let a = two_body_family_analysis(fam, m, &fm).unwrap();
                assert_eq!(a.intersections.len(), 2);
                assert!((a.mass_threshold - 2.0 * r3).abs() < 1e-12 * r3);
                for i in &a.intersections {
                    let g = a.g(i.alpha);
                    assert!((a.f(i.alpha) - g).abs() <= 1e-12 * g.abs().max(1.0));
                }
            }
        }
    }
}

#[test]
fn two_body_threshold_behavior() {
    let unit = form(1.0);
    let tangent = two_body_solve(2.0, &unit).unwrap();
    let labels: Vec<&str> = tangent.iter().map(|b| b.family_label.as_str()).collect();
    assert_eq!(labels, ["3.a", "3.b"]);
    let t = 2f64.sqrt() - 1.0;
    assert!((tangent[0].positions[0].re - t).abs() < 1e-15);
    assert!((tangent[0].positions[1].re + t).abs() < 1e-15);
    assert!((tangent[1].positions[0].re - 1.0 / t).abs() < 1e-14);
    assert!(tangent.iter().all(|b| b.degenerate));
    assert_eq!(tangent[0].regions, [RegionLabel::SouthernTropic, RegionLabel::SouthernTropic]);
    assert_eq!(tangent[1].regions, [RegionLabel::NorthernTropic, RegionLabel::NorthernTropic]);
    assert!(two_body_solve(3.0, &unit).unwrap().is_empty());
    assert!(two_body_solve(2.1, &unit).unwrap().is_empty());
}

#[test]
fn two_body_branches_are_solutions() {
    for r in [0.5, 1.0, 2.0] {
        let fm = form(r);
        let branches = two_body_solve(r * r * r, &fm).unwrap();
        let labels: Vec<&str> = branches.iter().map(|b| b.family_label.as_str()).collect();
        assert_eq!(labels, ["1.a.i", "1.a.ii", "1.b.i", "1.b.ii", "2.a.i", "2.a.ii", "2.b.i", "2.b.ii"]);
        for b in &branches {
            let rep = b.residual().unwrap();
            assert!(rep.max_abs <= BRANCH_TOL, "{} {:e}", b.family_label, rep.max_abs);
            assert!(!b.degenerate);
            for (z, v) in b.positions.iter().zip(&b.velocities) {
                assert_eq!(*v, c(0.0, 2.0) * z);
            }
        }
    }
}

#[test]
fn two_body_regions_follow_roots() {
    let b = two_body_solve(1.0, &form(1.0)).unwrap();
    assert_eq!(b[0].regions, [RegionLabel::Omega1, RegionLabel::Omega1]);
    assert_eq!(b[1].regions, [RegionLabel::Omega4, RegionLabel::Omega4]);
    assert_eq!(b[2].regions, [RegionLabel::Omega2, RegionLabel::Omega2]);
    assert_eq!(b[3].regions, [RegionLabel::Omega3, RegionLabel::Omega3]);
}

#[test]
fn non_solution_far_above_threshold() {
    let rep = residual_elliptic(KillingKind::EllipticB, &[c(0.9, 0.0), c(-0.9, 0.0)], &config(1.0, &[10.0, 10.0])).unwrap();
    assert!(rep.max_abs > 1.0);
    assert_eq!(rep.per_body.len(), 2);
    let max = rep.per_body.iter().map(|r| r.norm()).fold(0.0, f64::max);
    assert_eq!(rep.max_abs, max);
}

#[test]
fn residual_rejects_non_elliptic_variant() {
    let cfg = config(1.0, &[1.0, 1.0]);
    assert!(matches!(
        residual_elliptic(KillingKind::Parabolic, &[c(0.1, 0.0), c(0.2, 0.0)], &cfg),
        Err(EquilibriaError::NotElliptic(KillingKind::Parabolic))
    ));
    assert!(matches!(
        residual_elliptic(KillingKind::EllipticB, &[c(0.1, 0.0)], &cfg),
        Err(EquilibriaError::InvalidInput(_))
    ));
}

#[test]
fn rotating_branch_acceleration() {
    for b in two_body_solve(1.0, &form(1.0)).unwrap() {
        let a = acceleration(&b.state(), &b.config().unwrap()).unwrap();
        for (acc, z) in a.iter().zip(&b.positions) {
            assert!((acc + 4.0 * z).norm() <= 1e-10 * z.norm().max(1.0), "{}", b.family_label);
        }
    }
}

#[test]
fn lambda_roots_equal_masses() {
    let unit = form(1.0);
    for alpha in [0.2, 0.3, 0.7] {
        let roots = two_body_lambda_roots(1.0, 1.0, alpha, &unit).unwrap();
        let mut expected = [
            -1.0,
            1.0 / (alpha * alpha),
            (alpha - 1.0) / (alpha * (alpha + 1.0)),
            -(1.0 + alpha) / (alpha * (alpha - 1.0)),
        ];
        expected.sort_by(f64::total_cmp);
        assert_eq!(roots.len(), 4);
        for (r, e) in roots.iter().zip(expected) {
            assert!((r - e).abs() <= 1e-10, "{alpha}: {roots:?}");
        }
    }
    // near the equator the largest root is far outside ±10R²/α²
    let roots = two_body_lambda_roots(1.0, 1.0, 0.95, &unit).unwrap();
    assert_eq!(roots.len(), 4);
    assert!((roots[3] - 1.95 / (0.95 * 0.05)).abs() < 1e-9);
}

#[test]
fn lambda_roots_unequal_masses_satisfy_quartic() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let r = rng.gen_range(0.5..2.0);
        let fm = form(r);
        let alpha = rng.gen_range(0.02..0.98) * r;
        let (m1, m2) = (rng.gen_range(0.1..5.0), rng.gen_range(0.1..5.0));
        let q = lambda_quartic(m1, m2, alpha, &fm);
        for l in two_body_lambda_roots(m1, m2, alpha, &fm).unwrap() {
            let value = q.iter().fold(0.0, |acc, c| acc * l + c);
            let scale = q.iter().enumerate().map(|(i, c)| c.abs() * l.abs().powi(4 - i as i32)).sum::<f64>();
            assert!(value.abs() <= 1e-10 * scale, "{value:e} vs {scale:e}");
        }
    }
    assert!(two_body_lambda_roots(1.0, 1.0, 1.0, &form(1.0)).is_err());
    assert!(two_body_lambda_roots(-1.0, 1.0, 0.5, &form(1.0)).is_err());
}

#[test]
fn lambda_roots_reproduce_family_partners() {
    // the partner of each family root is a λ-root
    let unit = form(1.0);
    let skew = two_body_family_analysis(TwoBodyFamily::Skew, 1.0, &unit).unwrap();
    for i in &skew.intersections {
        let a = i.alpha;
        let beta = (a - 1.0) / (a + 1.0);
        let roots = two_body_lambda_roots(1.0, 1.0, a, &unit).unwrap();
        assert!(roots.iter().any(|l| (l * a - beta).abs() < 1e-10));
        assert!(roots.iter().any(|l| (l + 1.0).abs() < 1e-10));
    }
}

#[test]
fn euler3_has_no_roots_at_unit_masses() {
    let (analysis, branches) = euler3_solve(1.0, 1.0, &form(1.0)).unwrap();
    assert!(branches.is_empty());
    assert!(analysis.intersections.is_empty());
    let t = analysis.alpha_tangent;
    let best = roots::golden_max(|a| analysis.f(a) - analysis.g(a), 0.0, 1.0, 1e-12);
    assert!((analysis.f(best) - analysis.g(best) + 0.16397).abs() < 1e-5);
    assert!((analysis.mass_threshold - 0.7262).abs() < 1e-4);
    assert!((t - 0.4903).abs() < 1e-4);
}

#[test]
fn euler3_f_maximum() {
    for r in [0.5, 1.0, 2.0] {
        let fm = form(r);
        let p = FgProblem::Euler3 { mass: 1.0, central_mass: 1.0 };
        let t = (2f64.sqrt() - 1.0) * r;
        assert!((p.f(t, &fm) - r.powi(3) / 2.0).abs() < 1e-12 * r.powi(3));
        assert!(p.f(t * 1.01, &fm) < p.f(t, &fm) && p.f(t * 0.99, &fm) < p.f(t, &fm));
    }
}

#[test]
fn euler3_light_masses() {
    let unit = form(1.0);
    let (analysis, branches) = euler3_solve(0.1, 0.1, &unit).unwrap();
    assert_eq!(branches.len(), 2);
    assert!((branches[0].positions[0].re - 0.1661142870860256).abs() < 1e-13);
    assert!((branches[1].positions[0].re - 0.8189116324966249).abs() < 1e-13);
    for b in &branches {
        assert!(b.residual().unwrap().max_abs <= BRANCH_TOL);
    }
    for &x in &analysis.conjugate_roots {
        let g = analysis.g(x);
        assert!(euler3_single_equation(x, 0.1, 0.1, &unit).abs() <= 1e-10 * g.max(1.0));
        // the conjugate is not a three-body configuration
        let rep = residual_elliptic(KillingKind::EllipticB, &[c(x, 0.0), c(0.0, 0.0), c(-x, 0.0)], &config(1.0, &[0.1, 0.1, 0.1])).unwrap();
        assert!(rep.max_abs > 1e-3);
    }
}

#[test]
fn euler3_heavy_center_is_empty() {
    let (analysis, branches) = euler3_solve(0.1, 16.0, &form(1.0)).unwrap();
    assert!(branches.is_empty() && analysis.intersections.is_empty());
}

#[test]
fn euler3_at_threshold_is_tangent() {
    let unit = form(1.0);
    let probe = euler3_solve(1.0, 2.0, &unit).unwrap().0;
    let m = probe.mass_threshold;
    let (analysis, branches) = euler3_solve(m, 2.0 * m, &unit).unwrap();
    assert_eq!(branches.len(), 1);
    assert!(branches[0].degenerate && !analysis.intersections[0].transversal);
    assert_eq!(branches[0].family_label, "euler.tan");
    assert!(branches[0].residual().unwrap().max_abs <= 1e-6);
}

#[test]
fn square4_analytic_anchors() {
    for r in [1.0, 2.0] {
        let fm = form(r);
        let a = 3f64.sqrt() * r / 3.0;
        for m in [0.5, 1.0] {
            let p = FgProblem::Square4 { mass: m };
            let f = 81.0 * 3f64.sqrt() / (128.0 * m * r.powi(3));
            let g = 27.0 / (4.0 * r.powi(6)) * (1.0 / 8.0 + 1.0 / (5.0 * 5f64.sqrt()));
            assert!((p.f(a, &fm) - f).abs() <= 1e-12 * f.max(1.0));
            assert!((p.g(a, &fm) - g).abs() <= 1e-12 * g.max(1.0));
        }
    }
}

#[test]
fn square4_half_mass() {
    let unit = form(1.0);
    let (analysis, branches) = square4_solve(0.5, &unit).unwrap();
    assert!((analysis.alpha_tangent - 0.4874423537409194).abs() < 1e-7);
    assert!((analysis.mass_threshold - 0.8486736511292184).abs() < 1e-12);
    let labels: Vec<&str> = branches.iter().map(|b| b.family_label.as_str()).collect();
    assert_eq!(labels, ["square.a", "square.a.conj", "square.b", "square.b.conj"]);
    assert!((branches[0].positions[0].re - 0.3000008509184785).abs() < 1e-13);
    assert!((branches[2].positions[0].re - 0.6739673888590152).abs() < 1e-13);
    for b in &branches {
        assert!(b.residual().unwrap().max_abs <= BRANCH_TOL, "{}", b.family_label);
    }
    for x in &analysis.conjugate_roots {
        let g = analysis.g(*x);
        assert!(square4_single_equation(*x, 0.5, &unit).abs() <= 1e-10 * g.max(1.0));
    }
    assert!(square4_solve(1.0, &unit).unwrap().1.is_empty());
}

#[test]
fn fg_invariant_on_all_problems() {
    let fm = form(1.3);
    let problems = [
        FgProblem::TwoBody { family: TwoBodyFamily::Opposite, mass: 0.7 },
        FgProblem::TwoBody { family: TwoBodyFamily::Skew, mass: 3.0 },
        FgProblem::Euler3 { mass: 0.2, central_mass: 0.3 },
        FgProblem::Square4 { mass: 0.9 },
    ];
    for p in problems {
        let a = FGAnalysis::new(p, fm).unwrap();
        assert_eq!(a.intersections.len(), 2, "{p:?}");
        for i in &a.intersections {
            let g = a.g(i.alpha);
            assert!((a.f(i.alpha) - g).abs() <= 1e-12 * g.abs().max(1.0), "{p:?}");
        }
    }
    assert!(FGAnalysis::new(FgProblem::Square4 { mass: -1.0 }, fm).is_err());
}

#[test]
fn conjugation_transport_to_variant_a() {
    let unit = form(1.0);
    let a = conjugator_to_rotation(KillingKind::EllipticA).unwrap();
    let cc = conjugator_to_rotation(KillingKind::EllipticC).unwrap();
    for b in two_body_solve(1.0, &unit).unwrap() {
        for (kind, m) in [(KillingKind::EllipticA, a), (KillingKind::EllipticC, cc)] {
            let moved = b.map_positions(kind, b.family_label.clone(), |z| m.apply_finite(z).unwrap());
            let rep = moved.residual().unwrap();
            assert!(rep.max_abs <= 1e-8, "{} {kind:?} {:e}", b.family_label, rep.max_abs);
        }
    }
}

#[test]
fn hyperbolic_sides_have_opposite_signs() {
    let unit = form(1.0);
    let scan = hyperbolic_sign_scan(1.0, &unit, 200).unwrap();
    assert_eq!(scan.alphas.len(), 200);
    assert_eq!(scan.sign_changes, 0);
    assert!(scan.opposite_everywhere);
    assert!(scan.lhs.iter().all(|l| *l > 0.0) && scan.rhs.iter().all(|r| *r < 0.0));
}

#[test]
fn hyperbolic_residual_rotation_invariant() {
    let cfg = config(1.0, &[1.0, 2.0, 0.5]);
    let z = [c(0.3, 0.2), c(-0.7, 0.1), c(0.2, -1.4)];
    let base = residual_hyperbolic(&z, &cfg).unwrap().max_abs;
    for theta in [0.4, 2.0, 5.5] {
        let rot: Vec<_> = z.iter().map(|w| w * Complex64::from_polar(1.0, theta)).collect();
        assert!((residual_hyperbolic(&rot, &cfg).unwrap().max_abs - base).abs() <= 1e-12 * base.max(1.0));
    }
}

#[test]
fn parabolic_certificate_signs() {
    let unit = form(1.0);
    let cert = parabolic_certificate(&[0.0, 0.5], &[1.0, 1.0], &unit).unwrap();
    assert!(cert.contradiction);
    assert!(cert.lhs.iter().all(|l| *l < 0.0) && cert.rhs.iter().all(|r| *r > 0.0));
    let scaled = parabolic_certificate(&[0.0, 0.5], &[7.0, 7.0], &unit).unwrap();
    assert!(scaled.contradiction);
    assert!((scaled.rhs[0] - 7.0 * cert.rhs[0]).abs() < 1e-12);
    assert!(matches!(
        parabolic_certificate(&[0.3, 0.3], &[1.0, 1.0], &unit),
        Err(EquilibriaError::Singular(SingularPair { kind: SingularKind::Collision, .. }))
    ));
}

#[test]
fn parabolic_residual_on_imaginary_axis() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let n = rng.gen_range(2..=4);
        let betas: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let masses: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..3.0)).collect();
        let z: Vec<_> = betas.iter().map(|b| c(0.0, *b)).collect();
        let Ok(rep) = residual_parabolic(&z, &config(1.0, &masses)) else {
            continue;
        };
        assert!(rep.max_abs > 0.0);
        assert!(rep.sign.unwrap().opposite_signs);
    }
}

#[test]
fn invariance_along_two_body_flow() {
    let opts = IntegratorOptions::default();
    for b in two_body_solve(1.0, &form(1.0)).unwrap().iter().step_by(2) {
        let rep = verify_invariance(b, PI, &opts).unwrap();
        assert!(rep.final_deviation <= 1e-7, "{} {:e}", b.family_label, rep.final_deviation);
        assert!(rep.max_radius_drift.unwrap() <= 1e-7);
        assert!(rep.max_residual <= 1e-7);
        assert!(rep.energy_drift <= 1e-8 && rep.momentum_drift <= 1e-8);
    }
}

#[test]
fn perturbed_branch_leaves_the_flow() {
    let b = &two_body_solve(1.0, &form(1.0)).unwrap()[0];
    let perturbed = b.map_positions(b.kind, "perturbed", |z| if z.re > 0.0 { z + 1e-3 } else { z });
    let rep = verify_invariance(&perturbed, PI, &IntegratorOptions::default()).unwrap();
    assert!(rep.max_residual > 1e-4);
}

#[test]
fn hyperbolic_flow_scales_positions() {
    let g = exp_subgroup(KillingKind::Hyperbolic, 0.7);
    let z = c(0.3, -1.2);
    assert!((g.apply_finite(z).unwrap() - z * 0.7f64.exp()).norm() < 1e-15);
}
