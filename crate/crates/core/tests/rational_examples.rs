use std::f64::consts::TAU;

use magflow::catalog::{ex5_formulas, ex6_formulas, get_example, get_example_with, ExampleParams};
use magflow::geometry::{hamiltonian, BoundingBox, PhasePoint, SymMat2};
use magflow::legendre::{build_bundle, rational_integral_eval, RationalFlowBundle, ZFamily};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

fn sym(m: [f64; 3]) -> SymMat2 {
    SymMat2 {
        g11: m[0],
        g12: m[1],
        g22: m[2],
    }
}

type Explicit = (
    fn(f64, f64, f64, f64) -> [f64; 3],
    fn(f64, f64, f64) -> f64,
    fn(f64, f64, f64, f64, f64) -> (f64, f64),
    fn(f64, f64, f64, f64) -> (f64, f64),
);

fn compare(bundle: &RationalFlowBundle, explicit: Explicit, rho: (f64, f64), seed: u64) -> f64 {
    let (metric, omega, parts, momenta) = explicit;
    let (gamma, c) = (bundle.gamma, bundle.c);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut compared = 0;
    while compared < 100 {
        let (r, p, phi) = (
            rng.gen_range(rho.0..rho.1),
            rng.gen_range(0.0..TAU),
            rng.gen_range(0.0..TAU),
        );
        let g_b = bundle.metric_at(r, p).unwrap();
        let g_p = sym(metric(r, p, gamma, c));
        let scale = 1.0 + g_p.g11.abs().max(g_p.g22.abs());
        worst = worst.max(g_b.max_abs_diff(&g_p) / scale);
        worst = worst.max(rel(bundle.omega_at(r, p).unwrap(), omega(r, p, gamma)));
        let (pr, pp) = momenta(r, p, phi, gamma);
        let ph = PhasePoint::new(r, p, pr, pp);
        let h = hamiltonian(&bundle.system, &ph).unwrap();
        assert!(
            (h - 0.5 * c).abs() <= 1e-12 * c.max(1.0),
            "H = {h} at ({r},{p},{phi})"
        );
        let (n, d) = parts(r, p, pr, pp, gamma);
        let (Ok(from_bundle), true) =
            (rational_integral_eval(bundle, r, p, pr, pp), d.abs() > 1e-3)
        else {
            continue;
        };
        worst = worst.max(rel(from_bundle, n / d));
        compared += 1;
    }
    worst
}

#[test]
fn builder_reproduces_polynomial_example() {
    for (gamma, c) in [(1.0, 1.0), (0.6, 2.3), (-1.4, 0.7)] {
        let b = build_bundle(
            ZFamily::polynomial(2),
            gamma,
            c,
            BoundingBox::new((0.05, 3.0), (0.0, TAU)),
        )
        .unwrap();
        let explicit: Explicit = (
            ex5_formulas::metric,
            ex5_formulas::omega,
            ex5_formulas::integral_parts,
            ex5_formulas::momenta,
        );
        let worst = compare(&b, explicit, (0.05, 3.0), 5);
        assert!(worst <= 1e-10, "gamma={gamma} C={c}: {worst:e}");
    }
}

#[test]
fn builder_reproduces_logarithmic_example() {
    for (gamma, c) in [(1.0, 1.0), (0.6, 2.3), (-1.4, 0.7)] {
        let b = build_bundle(
            ZFamily::log_nu1(),
            gamma,
            c,
            BoundingBox::new((0.2, 3.0), (0.0, TAU)),
        )
        .unwrap();
        let explicit: Explicit = (
            ex6_formulas::metric,
            ex6_formulas::omega,
            ex6_formulas::integral_parts,
            ex6_formulas::momenta,
        );
        let worst = compare(&b, explicit, (0.2, 3.0), 6);
        assert!(worst <= 1e-10, "gamma={gamma} C={c}: {worst:e}");
    }
}

#[test]
fn explicit_momenta_lie_on_level_over_grids() {
    for (gamma, c) in [(1.0, 1.0), (2.0, 0.5)] {
        let params = ExampleParams {
            gamma,
            c,
            ..Default::default()
        };
        let e5 = get_example_with("ex5", &params).unwrap();
        let e6 = get_example_with("ex6", &params).unwrap();
        for i in 0..12 {
            for j in 0..12 {
                for k in 0..8 {
                    let (psi, phi) = (TAU * j as f64 / 12.0, TAU * k as f64 / 8.0);
                    let rho5 = -0.5 + 3.5 * i as f64 / 11.0;
                    if ex5_formulas::in_domain(rho5, psi) {
                        let (a, b) = ex5_formulas::momenta(rho5, psi, phi, gamma);
                        let h = hamiltonian(&e5.system, &PhasePoint::new(rho5, psi, a, b)).unwrap();
                        assert!((h - 0.5 * c).abs() <= 1e-12, "ex5 {h}");
                    }
                    let rho6 = 0.1 + 2.9 * i as f64 / 11.0;
                    let (a, b) = ex6_formulas::momenta(rho6, psi, phi, gamma);
                    let h = hamiltonian(&e6.system, &PhasePoint::new(rho6, psi, a, b)).unwrap();
                    assert!((h - 0.5 * c).abs() <= 1e-12, "ex6 {h}");
                }
            }
        }
    }
}

#[test]
fn catalog_entries_match_builder() {
    let e5 = get_example("ex5").unwrap();
    let b5 = build_bundle(
        ZFamily::polynomial(2),
        1.0,
        1.0,
        BoundingBox::new((0.05, 3.0), (0.0, TAU)),
    )
    .unwrap();
    for ph in &e5.sample_phases {
        let a = e5.integrals[0].eval(ph).unwrap();
        let b = b5.integral.eval(ph).unwrap();
        assert!(rel(a, b) < 1e-10);
        assert!(
            rel(
                hamiltonian(&e5.system, ph).unwrap(),
                hamiltonian(&b5.system, ph).unwrap()
            ) < 1e-12
        );
    }
}
