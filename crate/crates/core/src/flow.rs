//! Integration of the magnetic geodesic flow and conservation diagnostics.
//!
//! The vector field is `q̇ = ∂H/∂p`, `ṗ₁ = −∂H/∂q¹ + Ω ∂H/∂p₂`,
//! `ṗ₂ = −∂H/∂q² − Ω ∂H/∂p₁`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ChartPoint, MagneticSystem, PhasePoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    FixedRk4 { step: f64 },
    EmbeddedRk45 { rel_tol: f64, abs_tol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryConfig {
    pub t_end: f64,
    pub method: Method,
    pub record_every: usize,
}

impl TrajectoryConfig {
    pub fn fixed(t_end: f64, step: f64) -> Self {
        Self {
            t_end,
            method: Method::FixedRk4 { step },
            record_every: 1,
        }
    }

    pub fn adaptive(t_end: f64, rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            t_end,
            method: Method::EmbeddedRk45 { rel_tol, abs_tol },
            record_every: 1,
        }
    }

    pub fn record_every(mut self, n: usize) -> Self {
        self.record_every = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return bad("t_end must be positive and finite");
        }
        if self.record_every == 0 {
            return bad("record_every must be at least 1");
        }
        match self.method {
            Method::FixedRk4 { step } if !(step > 0.0) => bad("step must be positive"),
            Method::EmbeddedRk45 { rel_tol, abs_tol } if !(rel_tol > 0.0 && abs_tol > 0.0) => {
                bad("tolerances must be positive")
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
}

/// The orbit left the chart domain at time `t` (last in-domain state is recorded).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DomainExit {
    pub t: f64,
    pub q1: f64,
    pub q2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PhasePoint>,
    pub stats: StepStats,
    pub exit: Option<DomainExit>,
}

impl Trajectory {
    pub fn last(&self) -> &PhasePoint {
        self.states
            .last()
            .expect("trajectory holds the initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self
            .times
            .last()
            .expect("trajectory holds the initial time")
    }

    pub fn completed(&self) -> bool {
        self.exit.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConservationReport {
    pub initial_value: f64,
    pub max_abs_drift: f64,
    pub drift_series: Vec<f64>,
}

impl ConservationReport {
    pub fn max_rel_drift(&self) -> f64 {
        self.max_abs_drift / self.initial_value.abs().max(f64::MIN_POSITIVE)
    }
}

/// Right-hand side `(q̇¹, q̇², ṗ₁, ṗ₂)` of the magnetic flow.
pub fn magnetic_rhs(system: &MagneticSystem, phase: &PhasePoint) -> Result<[f64; 4]> {
    let q = phase.q;
    let g = system.metric_checked(q)?;
    let inv = g.inverse().ok_or(Error::SingularMetric {
        q1: q.q1,
        q2: q.q2,
        det: g.det(),
    })?;
    let v = inv.mul_vec([phase.p1, phase.p2]);
    let [d1, d2] = system.metric.partials_at(q);
    // ∂H/∂qⁱ = −½ vᵀ (∂ᵢG) v with v = G⁻¹p
    let hq1 = -0.5 * d1.quad(v);
    let hq2 = -0.5 * d2.quad(v);
    let omega = system.field.at(q);
    Ok([v[0], v[1], -hq1 + omega * v[1], -hq2 - omega * v[0]])
}

fn axpy(y: &[f64; 4], h: f64, terms: &[(f64, &[f64; 4])]) -> [f64; 4] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..4 {
            out[i] += h * c * k[i];
        }
    }
    out
}

fn rhs_arr(system: &MagneticSystem, y: &[f64; 4]) -> Result<[f64; 4]> {
    let ph = PhasePoint::from_array(*y);
    if !ph.is_finite() {
        return Err(Error::Domain { q1: y[0], q2: y[1] });
    }
    magnetic_rhs(system, &ph)
}

fn is_domain_failure(e: &Error) -> bool {
    matches!(e, Error::Domain { .. } | Error::SingularMetric { .. })
}

fn rk4_step(system: &MagneticSystem, y: &[f64; 4], h: f64) -> Result<[f64; 4]> {
    let k1 = rhs_arr(system, y)?;
    let k2 = rhs_arr(system, &axpy(y, h, &[(0.5, &k1)]))?;
    let k3 = rhs_arr(system, &axpy(y, h, &[(0.5, &k2)]))?;
    let k4 = rhs_arr(system, &axpy(y, h, &[(1.0, &k3)]))?;
    Ok(axpy(
        y,
        h,
        &[
            (1.0 / 6.0, &k1),
            (1.0 / 3.0, &k2),
            (1.0 / 3.0, &k3),
            (1.0 / 6.0, &k4),
        ],
    ))
}

// Dormand–Prince 5(4)
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B5: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

struct Dp5Step {
    y: [f64; 4],
    k_last: [f64; 4],
    err: [f64; 4],
}

fn dp5_step(system: &MagneticSystem, y: &[f64; 4], k1: &[f64; 4], h: f64) -> Result<Dp5Step> {
    let k2 = rhs_arr(system, &axpy(y, h, &[(A2[0], k1)]))?;
    let k3 = rhs_arr(system, &axpy(y, h, &[(A3[0], k1), (A3[1], &k2)]))?;
    let k4 = rhs_arr(
        system,
        &axpy(y, h, &[(A4[0], k1), (A4[1], &k2), (A4[2], &k3)]),
    )?;
    let k5 = rhs_arr(
        system,
        &axpy(
            y,
            h,
            &[(A5[0], k1), (A5[1], &k2), (A5[2], &k3), (A5[3], &k4)],
        ),
    )?;
    let k6 = rhs_arr(
        system,
        &axpy(
            y,
            h,
            &[
                (A6[0], k1),
                (A6[1], &k2),
                (A6[2], &k3),
                (A6[3], &k4),
                (A6[4], &k5),
            ],
        ),
    )?;
    let y5 = axpy(
        y,
        h,
        &[
            (B5[0], k1),
            (B5[2], &k3),
            (B5[3], &k4),
            (B5[4], &k5),
            (B5[5], &k6),
        ],
    );
    let k7 = rhs_arr(system, &y5)?;
    let ks = [k1, &k2, &k3, &k4, &k5, &k6, &k7];
    let mut err = [0.0; 4];
    for (j, k) in ks.iter().enumerate() {
        let b5 = if j < 6 { B5[j] } else { 0.0 };
        let e = b5 - B4[j];
        for i in 0..4 {
            err[i] += h * e * k[i];
        }
    }
    Ok(Dp5Step {
        y: y5,
        k_last: k7,
        err,
    })
}

/// Integrates the flow from `phase0` up to `config.t_end`.
///
/// Leaving the chart domain ends the run with [`Trajectory::exit`] set rather
/// than an error.
pub fn integrate(
    system: &MagneticSystem,
    phase0: &PhasePoint,
    config: &TrajectoryConfig,
) -> Result<Trajectory> {
    config.validate()?;
    system.metric_checked(phase0.q)?;
    if !phase0.is_finite() {
        return Err(Error::InvalidConfig("initial phase is not finite".into()));
    }
    match config.method {
        Method::FixedRk4 { step } => integrate_rk4(system, phase0, config, step),
        Method::EmbeddedRk45 { rel_tol, abs_tol } => {
            integrate_dp5(system, phase0, config, rel_tol, abs_tol)
        }
    }
}

fn integrate_rk4(
    system: &MagneticSystem,
    phase0: &PhasePoint,
    config: &TrajectoryConfig,
    step: f64,
) -> Result<Trajectory> {
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![*phase0],
        stats: StepStats::default(),
        exit: None,
    };
    let n = (config.t_end / step - 1e-9).ceil().max(1.0) as usize;
    let mut y = phase0.to_array();
    let mut t = 0.0;
    for i in 0..n {
        let h = if i + 1 == n { config.t_end - t } else { step };
        let next = match rk4_step(system, &y, h) {
            Ok(v) if system.domain.contains(ChartPoint::new(v[0], v[1])) => v,
            Ok(_) => {
                traj.exit = Some(DomainExit {
                    t,
                    q1: y[0],
                    q2: y[1],
                });
                break;
            }
            Err(e) if is_domain_failure(&e) => {
                traj.exit = Some(DomainExit {
                    t,
                    q1: y[0],
                    q2: y[1],
                });
                break;
            }
            Err(e) => return Err(e),
        };
        y = next;
        t = if i + 1 == n {
            config.t_end
        } else {
            (i + 1) as f64 * step
        };
        traj.stats.accepted += 1;
        if traj.stats.accepted.is_multiple_of(config.record_every) || i + 1 == n {
            traj.times.push(t);
            traj.states.push(PhasePoint::from_array(y));
        }
    }
    finish(&mut traj, t, &y);
    Ok(traj)
}

fn finish(traj: &mut Trajectory, t: f64, y: &[f64; 4]) {
    if *traj.times.last().unwrap() < t {
        traj.times.push(t);
        traj.states.push(PhasePoint::from_array(*y));
    }
}

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

fn integrate_dp5(
    system: &MagneticSystem,
    phase0: &PhasePoint,
    config: &TrajectoryConfig,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<Trajectory> {
    let t_end = config.t_end;
    let h_min = 1e-12 * t_end;
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![*phase0],
        stats: StepStats::default(),
        exit: None,
    };
    let mut y = phase0.to_array();
    let mut k1 = rhs_arr(system, &y)?;
    let mut t = 0.0;
    let mut h = (1e-3 * t_end).min(1e-2);

    while t < t_end {
        let last = t + h >= t_end;
        let h_try = if last { t_end - t } else { h };
        match dp5_step(system, &y, &k1, h_try) {
            Ok(step) => {
                let err = (0..4).fold(0.0f64, |m, i| {
                    let sc = abs_tol + rel_tol * y[i].abs().max(step.y[i].abs());
                    m.max(step.err[i].abs() / sc)
                });
                if err <= 1.0 {
                    t = if last { t_end } else { t + h_try };
                    y = step.y;
                    k1 = step.k_last;
                    traj.stats.accepted += 1;
                    if traj.stats.accepted.is_multiple_of(config.record_every) || t >= t_end {
                        traj.times.push(t);
                        traj.states.push(PhasePoint::from_array(y));
                    }
                    let factor = if err == 0.0 {
                        MAX_FACTOR
                    } else {
                        (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
                    };
                    h = h_try * factor;
                } else {
                    traj.stats.rejected += 1;
                    h = h_try * (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, 1.0);
                    if h < h_min {
                        return Err(Error::StepFailure { t, h });
                    }
                }
            }
            Err(e) if is_domain_failure(&e) => {
                traj.stats.rejected += 1;
                h = 0.5 * h_try;
                if h < h_min {
                    traj.exit = Some(DomainExit {
                        t,
                        q1: y[0],
                        q2: y[1],
                    });
                    break;
                }
            }
            Err(e) => return Err(e),
        }
    }
    finish(&mut traj, t, &y);
    Ok(traj)
}

/// Evaluates `scalar` along the recorded states and reports its drift.
pub fn conservation_drift(
    trajectory: &Trajectory,
    scalar: impl Fn(&PhasePoint) -> Result<f64>,
) -> Result<ConservationReport> {
    let mut values = Vec::with_capacity(trajectory.states.len());
    for (t, s) in trajectory.times.iter().zip(&trajectory.states) {
        let v = scalar(s).map_err(|e| Error::Evaluation {
            t: *t,
            reason: e.to_string(),
        })?;
        if !v.is_finite() {
            return Err(Error::Evaluation {
                t: *t,
                reason: "non-finite value".into(),
            });
        }
        values.push(v);
    }
    let initial_value = values[0];
    let drift_series: Vec<f64> = values.iter().map(|v| v - initial_value).collect();
    let max_abs_drift = drift_series.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    Ok(ConservationReport {
        initial_value,
        max_abs_drift,
        drift_series,
    })
}

/// Result of a fixed-step convergence study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderEstimate {
    pub steps: Vec<f64>,
    pub drifts: Vec<f64>,
    /// `None` when a drift sits at rounding level and no slope can be fitted.
    pub order: Option<f64>,
}

/// Least-squares slope of `log(max drift)` against `log(step)` for fixed-step RK4.
pub fn convergence_order(
    system: &MagneticSystem,
    phase0: &PhasePoint,
    scalar: impl Fn(&PhasePoint) -> Result<f64>,
    steps: &[f64],
    t_end: f64,
) -> Result<OrderEstimate> {
    if steps.len() < 3 {
        return Err(Error::InvalidConfig(
            "need at least three step sizes".into(),
        ));
    }
    let ratio = steps[1] / steps[0];
    if steps
        .windows(2)
        .any(|w| ((w[1] / w[0]) / ratio - 1.0).abs() > 1e-9)
        || ratio == 1.0
    {
        return Err(Error::InvalidConfig(
            "step sizes must form a geometric progression".into(),
        ));
    }
    let mut drifts = Vec::with_capacity(steps.len());
    let mut scale = 0.0f64;
    for &h in steps {
        let traj = integrate(system, phase0, &TrajectoryConfig::fixed(t_end, h))?;
        let rep = conservation_drift(&traj, &scalar)?;
        scale = scale.max(rep.initial_value.abs());
        drifts.push(rep.max_abs_drift);
    }
    let floor = 1e-13 * scale.max(1.0);
    let order = if drifts.iter().any(|d| *d <= floor) {
        None
    } else {
        let xs: Vec<f64> = steps.iter().map(|h| h.ln()).collect();
        let ys: Vec<f64> = drifts.iter().map(|d| d.ln()).collect();
        Some(ls_slope(&xs, &ys))
    };
    Ok(OrderEstimate {
        steps: steps.to_vec(),
        drifts,
        order,
    })
}

pub(crate) fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{
        hamiltonian, BoundingBox, ChartDomain, MagneticField2Form, MetricTensorField, SymMat2,
    };
    use std::f64::consts::PI;

    fn planar(b: f64) -> MagneticSystem {
        MagneticSystem::new(
            "planar",
            MetricTensorField::euclidean(),
            MagneticField2Form::uniform(b),
            ChartDomain::everywhere().with_bbox(BoundingBox::new((-2.0, 2.0), (-2.0, 2.0))),
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn rhs_uniform_field() {
        let r = magnetic_rhs(&planar(1.0), &PhasePoint::new(0.0, 0.0, 1.0, 0.0)).unwrap();
        assert_eq!(r, [1.0, 0.0, 0.0, -1.0]);
    }

    #[test]
    fn rhs_free_motion() {
        let r = magnetic_rhs(&planar(0.0), &PhasePoint::new(0.3, -2.0, 0.7, -1.1)).unwrap();
        assert_eq!(r, [0.7, -1.1, 0.0, 0.0]);
    }

    #[test]
    fn straight_line_without_field() {
        let traj = integrate(
            &planar(0.0),
            &PhasePoint::new(0.0, 0.0, 1.0, 0.0),
            &TrajectoryConfig::fixed(1.0, 0.01),
        )
        .unwrap();
        let end = traj.last().to_array();
        for (a, b) in end.iter().zip([1.0, 0.0, 1.0, 0.0]) {
            assert!((a - b).abs() < 1e-13);
        }
        assert_eq!(traj.final_time(), 1.0);
    }

    #[test]
    fn larmor_orbit_closes_adaptive() {
        let s = planar(1.0);
        let p0 = PhasePoint::new(0.0, 0.0, 1.0, 0.0);
        let traj = integrate(&s, &p0, &TrajectoryConfig::adaptive(2.0 * PI, 1e-12, 1e-14)).unwrap();
        let end = traj.last().to_array();
        for (a, b) in end.iter().zip(p0.to_array()) {
            assert!((a - b).abs() < 1e-8, "{end:?}");
        }
        assert!(traj.stats.accepted > 10);
    }

    #[test]
    fn record_every_thins_output() {
        let s = planar(1.0);
        let p0 = PhasePoint::new(0.0, 0.0, 1.0, 0.0);
        let traj = integrate(
            &s,
            &p0,
            &TrajectoryConfig::fixed(1.0, 0.01).record_every(10),
        )
        .unwrap();
        assert_eq!(traj.states.len(), 11);
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn domain_exit_is_flagged_not_raised() {
        let mut s = planar(0.0);
        s.domain = ChartDomain::new(|q| q.q1 < 0.5);
        let p0 = PhasePoint::new(0.0, 0.0, 1.0, 0.0);
        for cfg in [
            TrajectoryConfig::fixed(2.0, 0.01),
            TrajectoryConfig::adaptive(2.0, 1e-10, 1e-12),
        ] {
            let traj = integrate(&s, &p0, &cfg).unwrap();
            let exit = traj.exit.expect("orbit leaves the half-plane");
            assert!(exit.t < 0.5 + 1e-9 && exit.t > 0.4);
            assert!(traj.last().q.q1 < 0.5);
        }
    }

    #[test]
    fn bad_start_is_an_error() {
        let mut s = planar(0.0);
        s.domain = ChartDomain::new(|q| q.q1 > 0.0);
        let r = integrate(
            &s,
            &PhasePoint::new(-1.0, 0.0, 1.0, 0.0),
            &TrajectoryConfig::fixed(1.0, 0.1),
        );
        assert!(matches!(r, Err(Error::Domain { .. })));
    }

    #[test]
    fn invalid_config_rejected() {
        let s = planar(0.0);
        let p0 = PhasePoint::new(0.0, 0.0, 1.0, 0.0);
        assert!(integrate(&s, &p0, &TrajectoryConfig::fixed(-1.0, 0.1)).is_err());
        assert!(integrate(&s, &p0, &TrajectoryConfig::fixed(1.0, 0.0)).is_err());
        assert!(integrate(&s, &p0, &TrajectoryConfig::adaptive(1.0, 0.0, 1e-9)).is_err());
    }

    fn curved() -> MagneticSystem {
        MagneticSystem::new(
            "curved",
            MetricTensorField::new(|q| SymMat2::scaled(2.0 + q.q2.cos())),
            MagneticField2Form::new(|q| 0.5 + 0.2 * q.q1.sin()),
            ChartDomain::everywhere(),
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn energy_conserved_with_fd_metric_partials() {
        let s = curved();
        let p0 = PhasePoint::new(0.1, 0.2, 0.9, -0.4);
        let traj = integrate(&s, &p0, &TrajectoryConfig::adaptive(10.0, 1e-11, 1e-13)).unwrap();
        let rep = conservation_drift(&traj, |ph| hamiltonian(&s, ph)).unwrap();
        assert!(rep.max_rel_drift() < 1e-9, "{}", rep.max_rel_drift());
    }

    #[test]
    fn time_reversal_with_flipped_field() {
        let s = curved();
        let p0 = PhasePoint::new(0.1, 0.2, 0.9, -0.4);
        let tol = 1e-11;
        let fwd = integrate(&s, &p0, &TrajectoryConfig::adaptive(5.0, tol, 1e-13)).unwrap();
        let end = fwd.last();
        let back_start = PhasePoint::new(end.q.q1, end.q.q2, -end.p1, -end.p2);
        let back = integrate(
            &s.with_reversed_field(),
            &back_start,
            &TrajectoryConfig::adaptive(5.0, tol, 1e-13),
        )
        .unwrap();
        let fin = back.last();
        let err = [
            fin.q.q1 - p0.q.q1,
            fin.q.q2 - p0.q.q2,
            -fin.p1 - p0.p1,
            -fin.p2 - p0.p2,
        ]
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(err < 10.0 * tol, "reversal error {err}");
    }

    #[test]
    fn drift_report_tracks_max() {
        let traj = Trajectory {
            times: vec![0.0, 1.0, 2.0],
            states: vec![
                PhasePoint::new(0.0, 0.0, 1.0, 0.0),
                PhasePoint::new(0.0, 0.0, 1.5, 0.0),
                PhasePoint::new(0.0, 0.0, 0.2, 0.0),
            ],
            stats: StepStats::default(),
            exit: None,
        };
        let rep = conservation_drift(&traj, |p| Ok(p.p1)).unwrap();
        assert_eq!(rep.initial_value, 1.0);
        assert!((rep.max_abs_drift - 0.8).abs() < 1e-15);
        assert_eq!(rep.drift_series.len(), 3);
    }

    #[test]
    fn drift_reports_undefined_scalar() {
        let traj = integrate(
            &planar(1.0),
            &PhasePoint::new(0.0, 0.0, 1.0, 0.0),
            &TrajectoryConfig::fixed(1.0, 0.1),
        )
        .unwrap();
        let err = conservation_drift(&traj, |p| {
            if p.p2 < -0.5 {
                Err(Error::NearPole { value: 0.0 })
            } else {
                Ok(1.0)
            }
        })
        .unwrap_err();
        assert!(matches!(err, Error::Evaluation { .. }));
    }

    #[test]
    fn rk4_energy_drift_is_fourth_order() {
        let s = curved();
        let p0 = PhasePoint::new(0.1, 0.2, 0.9, -0.4);
        let est =
            convergence_order(&s, &p0, |p| hamiltonian(&s, p), &[0.4, 0.2, 0.1], 10.0).unwrap();
        let order = est.order.unwrap();
        assert!(
            (order - 4.0).abs() < 0.5,
            "order {order}, drifts {:?}",
            est.drifts
        );
    }

    #[test]
    fn order_indeterminate_for_exact_invariant() {
        let s = planar(0.0);
        let p0 = PhasePoint::new(0.0, 0.0, 1.0, 0.0);
        let est = convergence_order(
            &s,
            &p0,
            |p| hamiltonian(&s, p),
            &[0.01, 0.005, 0.0025],
            0.01,
        )
        .unwrap();
        assert!(est.order.is_none());
    }

    #[test]
    fn order_requires_geometric_steps() {
        let s = planar(0.0);
        let p0 = PhasePoint::new(0.0, 0.0, 1.0, 0.0);
        assert!(convergence_order(&s, &p0, |p| Ok(p.p1), &[0.1, 0.05], 1.0).is_err());
        assert!(convergence_order(&s, &p0, |p| Ok(p.p1), &[0.1, 0.05, 0.02], 1.0).is_err());
    }
}
