use graphon_core::phase::{
    ansatz_graphon, ansatz_triangle, classify, critical_eps, discriminant, er_curve, lower_envelope,
    lower_parabola, phase23_boundary, phase2_graphon, phase2_natural_lower, phase3_dtau,
    phase3_lower_boundary, CLASSIFY_TOL,
};
use graphon_core::sqp::multistart;
use graphon_core::{AnsatzParams, DensityPair, MultistartConfig, PhaseLabel, SolverOptions};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn ansatz_matches_its_densities(
        eps in 0.2f64..0.8,
        c in 0.2f64..0.8,
        mu in -0.08f64..0.08,
        nu in -0.08f64..0.08,
    ) {
        let p = AnsatzParams { eps, c, mu, nu };
        let g = ansatz_graphon(p);
        prop_assume!(g.is_ok());
        let g = g.unwrap();
        prop_assert!((g.edge_density() - eps).abs() <= 1e-12);
        prop_assert!((g.triangle_density() - ansatz_triangle(eps, mu, nu)).abs() <= 1e-12);
    }

    #[test]
    fn phase2_graphon_hits_target(e in 0.01f64..0.99, f in 0.0f64..1.0) {
        let lo = phase2_natural_lower(e).max(0.0);
        let t = lo + f * (er_curve(e) - lo);
        let g = phase2_graphon(DensityPair::new(e, t).unwrap()).unwrap();
        prop_assert!((g.edge_density() - e).abs() <= 1e-12);
        prop_assert!((g.triangle_density() - t).abs() <= 1e-12);
    }
}

fn eps_grid(lo: f64, hi: f64, k: usize) -> impl Iterator<Item = f64> {
    (1..k).map(move |i| lo + (hi - lo) * i as f64 / k as f64)
}

/// Near e = 1/2 the lower root hugs the natural lower curve closer than the
/// scan resolves, so only the upper root is required.
#[test]
fn curves_are_ordered_below_critical_eps() {
    for e in eps_grid(0.5, 0.6295, 60) {
        let roots = phase23_boundary(e);
        assert!((1..=2).contains(&roots.len()), "e={e}: {roots:?}");
        let mut chain = vec![phase3_lower_boundary(e).unwrap().tau, phase2_natural_lower(e)];
        chain.extend(&roots);
        chain.push(er_curve(e));
        for w in chain.windows(2) {
            assert!(w[1] - w[0] >= -1e-9, "e={e}: {chain:?}");
        }
    }
}

#[test]
fn bipodal_envelope_lies_above_parabola() {
    for e in eps_grid(0.5, 2.0 / 3.0, 60) {
        let env = lower_envelope(e).unwrap();
        assert!(env > lower_parabola(e), "e={e}");
    }
    assert!(lower_envelope(0.5 + 1e-9).unwrap().abs() < 1e-8);
}

#[test]
fn boundary_roots_are_roots() {
    for e in eps_grid(0.5, 0.6295, 60) {
        for t in phase23_boundary(e) {
            let d = discriminant(e, t).unwrap();
            // lower roots sit in a logarithmic spike where one ulp of t moves D
            // by far more than 1e-8; there a sign change within a few ulps is required
            let dt = 8.0 * f64::EPSILON * t;
            let (dl, dr) = (discriminant(e, t - dt).unwrap(), discriminant(e, t + dt).unwrap());
            assert!(d.abs() < 1e-8 || dl * dr < 0.0, "e={e} t={t} D={d:e} [{dl:e}, {dr:e}]");
        }
    }
    // beyond the pinch-off the discriminant has no sign change
    assert!(phase23_boundary(critical_eps() + 1e-4).is_empty());
}

#[test]
fn envelope_minimizer_is_stationary() {
    for e in eps_grid(0.5, 0.99, 50) {
        let p = phase3_lower_boundary(e).unwrap();
        let c_max = (1.0 - e).sqrt();
        if p.c > 1e-6 && p.c < c_max - 1e-6 {
            assert!(phase3_dtau(e, p.c).abs() < 1e-8, "e={e} c={}", p.c);
        }
        assert!((0.0..=1.0 + 1e-12).contains(&p.alpha), "e={e}");
    }
}

/// Symmetric (c = 1/2, g11 = g22) minimizers exactly where the discriminant
/// says phase II, on a grid above e = 1/2 and below the ER curve.
#[test]
fn discriminant_predicts_optimizer_symmetry() {
    let opts = SolverOptions::default();
    let ms = MultistartConfig { l_c: 4, l_g: 4, ..Default::default() };
    for e in [0.52, 0.56, 0.6, 0.64, 0.68] {
        let lo = lower_envelope(e).unwrap();
        let hi = er_curve(e);
        for j in 0..4 {
            let t = lo + (hi - lo) * (j as f64 + 0.5) / 4.0;
            let target = DensityPair::new(e, t).unwrap();
            let label = classify(target, CLASSIFY_TOL);
            assert!(matches!(label, PhaseLabel::PhaseII | PhaseLabel::PhaseIII), "({e},{t}) {label}");
            let g = multistart(2, target, &ms, &opts).unwrap().best().minimizer.clone();
            let c = g.fractions();
            let u = g.upper();
            let symmetric = c.len() == 2 && (c[0] - 0.5).abs() < 1e-5 && (u[0] - u[2]).abs() < 1e-5;
            assert_eq!(symmetric, label == PhaseLabel::PhaseII, "({e},{t}) {label} {g:?}");
        }
    }
}
