use std::f64::consts::TAU;

use magflow::catalog::get_example;
use magflow::flow::{convergence_order, integrate, TrajectoryConfig};
use magflow::geometry::{hamiltonian, PhasePoint};

const STEPS: [f64; 3] = [0.05, 0.025, 0.0125];

#[test]
fn rk4_drift_is_fourth_order_on_rational_examples() {
    for (name, idx) in [("ex5", 1), ("ex6", 1)] {
        let e = get_example(name).unwrap();
        let ph = e.sample_phases[idx];
        let f = &e.integrals[0];
        let of = convergence_order(&e.system, &ph, |p| f.eval(p), &STEPS, 10.0).unwrap();
        let oh =
            convergence_order(&e.system, &ph, |p| hamiltonian(&e.system, p), &STEPS, 10.0).unwrap();
        for o in [of, oh] {
            let order = o.order.unwrap();
            assert!((order - 4.0).abs() <= 0.5, "{name}: {o:?}");
        }
    }
}

#[test]
fn uniform_field_drifts_are_not_fourth_order() {
    // RK4 keeps linear invariants exactly and loses h⁶/72 of the energy per step on a rotation
    let e = get_example("ex1").unwrap();
    let ph = e.sample_phases[0];
    let f = &e.integrals[0];
    let of = convergence_order(&e.system, &ph, |p| f.eval(p), &[0.1, 0.05, 0.025], 10.0).unwrap();
    assert_eq!(of.order, None, "{of:?}");
    let oh = convergence_order(
        &e.system,
        &ph,
        |p| hamiltonian(&e.system, p),
        &[0.1, 0.05, 0.025],
        10.0,
    )
    .unwrap();
    assert!((oh.order.unwrap() - 5.0).abs() < 0.05, "{oh:?}");
    let predicted = 0.5 * 10.0 * 0.1f64.powi(5) / 72.0;
    assert!((oh.drifts[0] / predicted - 1.0).abs() < 0.01);
}

#[test]
fn larmor_orbit_closes() {
    for b in [1.0, 2.5] {
        let e = magflow::catalog::get_example_with(
            "ex1",
            &magflow::catalog::ExampleParams {
                b,
                ..Default::default()
            },
        )
        .unwrap();
        let ph = PhasePoint::new(0.0, 0.0, b, 0.0);
        let traj = integrate(
            &e.system,
            &ph,
            &TrajectoryConfig::adaptive(TAU / b, 1e-12, 1e-14),
        )
        .unwrap();
        let end = traj.last().to_array();
        let err = end
            .iter()
            .zip(ph.to_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-8, "B={b}: {err:e}");
    }
}
