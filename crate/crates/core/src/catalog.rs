//! Ready-to-run integrable systems with their integrals, verified domains and
//! on-level sample phases.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    phase_on_level, BoundingBox, ChartDomain, ChartPoint, GenericMetric, MagneticField2Form,
    MagneticSystem, MetricTensorField, PhasePoint,
};
use crate::hodograph::example3_system;
use crate::integrals::{FirstIntegral, IntegralKind, LevelValidity};
use crate::scalar::Scalar;

/// Names accepted by [`get_example`], in listing order.
pub const EXAMPLE_NAMES: [&str; 7] = ["ex1", "ex2", "ex2-recipe", "ex3", "ex4", "ex5", "ex6"];

/// Free constants of the catalog entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExampleParams {
    /// Uniform field strength of `ex1`.
    pub b: f64,
    pub gamma: f64,
    #[serde(rename = "C")]
    pub c: f64,
}

impl Default for ExampleParams {
    fn default() -> Self {
        Self {
            b: 1.0,
            gamma: 1.0,
            c: 1.0,
        }
    }
}

impl ExampleParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("B", self.b), ("gamma", self.gamma)] {
            if !v.is_finite() || v == 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be finite and nonzero"
                )));
            }
        }
        if !(self.c > 0.0) || !self.c.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "C must be positive, got {}",
                self.c
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: String,
    /// Coordinate names of the chart, e.g. `"x,y"`.
    pub chart: String,
    pub system: MagneticSystem,
    pub integrals: Vec<FirstIntegral>,
    pub verified_domain: ChartDomain,
    pub sample_phases: Vec<PhasePoint>,
    pub anchor: String,
}

impl CatalogEntry {
    pub fn energy_constant(&self) -> f64 {
        self.system.energy_constant
    }

    pub fn integral(&self, name: &str) -> Option<&FirstIntegral> {
        self.integrals.iter().find(|f| f.name == name)
    }
}

pub fn list_examples() -> Vec<&'static str> {
    EXAMPLE_NAMES.to_vec()
}

pub fn get_example(name: &str) -> Result<CatalogEntry> {
    get_example_with(name, &ExampleParams::default())
}

pub fn get_example_with(name: &str, params: &ExampleParams) -> Result<CatalogEntry> {
    params.validate()?;
    match name {
        "ex1" => ex1(params.b),
        "ex2" => ex2(),
        "ex2-recipe" => ex2_recipe(),
        "ex3" => ex3(),
        "ex4" => ex4(params.gamma, params.c),
        "ex5" => ex5(params.gamma, params.c),
        "ex6" => ex6(params.gamma, params.c),
        _ => Err(Error::UnknownExample(name.to_string())),
    }
}

fn phases_from(system: &MagneticSystem, starts: &[(f64, f64, f64)]) -> Result<Vec<PhasePoint>> {
    let c = system.energy_constant;
    starts
        .iter()
        .map(|&(q1, q2, phi)| phase_on_level(system, ChartPoint::new(q1, q2), phi, c))
        .collect()
}

fn entry(
    name: &str,
    chart: &str,
    system: MagneticSystem,
    integrals: Vec<FirstIntegral>,
    sample_phases: Vec<PhasePoint>,
    anchor: &str,
) -> CatalogEntry {
    CatalogEntry {
        name: name.into(),
        chart: chart.into(),
        verified_domain: system.domain.clone(),
        system,
        integrals,
        sample_phases,
        anchor: anchor.into(),
    }
}

fn ex1(b: f64) -> Result<CatalogEntry> {
    let domain = ChartDomain::everywhere()
        .with_bbox(BoundingBox::new((-PI, PI), (-PI, PI)))
        .with_periods([Some(TAU), Some(TAU)]);
    let system = MagneticSystem::new(
        "ex1",
        MetricTensorField::euclidean(),
        MagneticField2Form::uniform(b),
        domain,
        1.0,
    )?;
    let f = FirstIntegral::new(
        "F",
        IntegralKind::Transcendental,
        LevelValidity::AllLevels,
        move |ph: &PhasePoint| Ok((ph.p1 / b - ph.q.q2).cos()),
    )
    .with_partials(move |ph: &PhasePoint| {
        let s = (ph.p1 / b - ph.q.q2).sin();
        Ok([0.0, s, -s / b, 0.0])
    });
    let phases = phases_from(
        &system,
        &[
            (0.0, 0.0, 0.0),
            (0.5, -1.0, 1.0),
            (-2.0, 2.5, 2.5),
            (1.5, 1.5, 4.0),
        ],
    )?;
    Ok(entry(
        "ex1",
        "x,y",
        system,
        vec![f],
        phases,
        "flat torus in a uniform field",
    ))
}

struct Ex2Metric;

impl GenericMetric for Ex2Metric {
    fn components<T: Scalar>(&self, _x: T, y: T) -> [T; 3] {
        let lam = y.cos() + 2.0;
        [lam, T::cst(0.0), lam]
    }
}

fn ex2() -> Result<CatalogEntry> {
    let domain = ChartDomain::everywhere()
        .with_bbox(BoundingBox::new((0.0, TAU), (0.0, TAU)))
        .with_periods([Some(TAU), Some(TAU)]);
    let system = MagneticSystem::new(
        "ex2",
        MetricTensorField::from_generic(Ex2Metric),
        MagneticField2Form::new(|q| -q.q2.cos()),
        domain,
        1.0,
    )?;
    let f = FirstIntegral::new(
        "F1",
        IntegralKind::Linear,
        LevelValidity::AllLevels,
        |ph: &PhasePoint| Ok(ph.p1 + ph.q.q2.sin()),
    )
    .with_partials(|ph: &PhasePoint| Ok([0.0, ph.q.q2.cos(), 1.0, 0.0]));
    let phases = phases_from(
        &system,
        &[
            (0.0, 0.0, 0.3),
            (1.0, 2.0, 1.7),
            (3.0, 4.0, 3.3),
            (5.0, 5.5, 5.0),
        ],
    )?;
    Ok(entry(
        "ex2",
        "x,y",
        system,
        vec![f],
        phases,
        "conformal metric depending on one coordinate",
    ))
}

struct RecipeMetric;

impl GenericMetric for RecipeMetric {
    fn components<T: Scalar>(&self, _u: T, v: T) -> [T; 3] {
        let lam = (v * 2.0).sin() * 0.5 + 1.5;
        [lam, T::cst(0.0), lam]
    }
}

fn ex2_recipe() -> Result<CatalogEntry> {
    let domain = ChartDomain::everywhere()
        .with_bbox(BoundingBox::new((0.0, TAU), (0.0, TAU)))
        .with_periods([Some(TAU), Some(TAU)]);
    // f̃(v) = ½cos v, Ω = −f̃'(v)
    let system = MagneticSystem::new(
        "ex2-recipe",
        MetricTensorField::from_generic(RecipeMetric),
        MagneticField2Form::new(|q| 0.5 * q.q2.sin()),
        domain,
        1.0,
    )?;
    let f = FirstIntegral::new(
        "F",
        IntegralKind::Linear,
        LevelValidity::AllLevels,
        |ph: &PhasePoint| Ok(ph.p1 + 0.5 * ph.q.q2.cos()),
    )
    .with_partials(|ph: &PhasePoint| Ok([0.0, -0.5 * ph.q.q2.sin(), 1.0, 0.0]));
    let phases = phases_from(
        &system,
        &[
            (0.0, 0.5, 0.1),
            (2.0, 1.0, 2.0),
            (4.0, 3.0, 3.0),
            (1.0, 5.0, 5.5),
        ],
    )?;
    Ok(entry(
        "ex2-recipe",
        "u,v",
        system,
        vec![f],
        phases,
        "general metric and field admitting a linear integral",
    ))
}

/// Parameters and box of the shipped quadratic-integral example.
pub const EX3_ALPHA: f64 = 1.0;
pub const EX3_BETA: f64 = 0.0;
pub const EX3_BOX: ((f64, f64), (f64, f64)) = ((2.8, 4.6), (-0.6, 0.6));

fn ex3() -> Result<CatalogEntry> {
    let bbox = BoundingBox::new(EX3_BOX.0, EX3_BOX.1);
    let (system, f) = example3_system(EX3_ALPHA, EX3_BETA, bbox)?;
    let phases = phases_from(
        &system,
        &[
            (4.0, 0.0, 0.0),
            (4.0, 0.0, 1.57),
            (4.5, 0.0, 2.355),
            (3.5, 0.0, 0.785),
        ],
    )?;
    Ok(entry(
        "ex3",
        "X,Y",
        system,
        vec![f],
        phases,
        "quadratic integral on a fixed level",
    ))
}

struct Ex4Metric {
    scale: f64,
}

impl GenericMetric for Ex4Metric {
    fn components<T: Scalar>(&self, x: T, y: T) -> [T; 3] {
        let lam = (x * x + y * y).sqrt().recip() * self.scale;
        [lam, T::cst(0.0), lam]
    }
}

fn ex4(gamma: f64, c: f64) -> Result<CatalogEntry> {
    let domain = ChartDomain::new(|q: ChartPoint| q.q1.hypot(q.q2) > 1e-3)
        .with_bbox(BoundingBox::new((-2.0, 2.0), (-2.0, 2.0)));
    let system = MagneticSystem::new(
        "ex4",
        MetricTensorField::from_generic(Ex4Metric {
            scale: gamma * gamma / c,
        }),
        MagneticField2Form::new(move |q| -gamma / (2.0 * q.q1.hypot(q.q2))),
        domain,
        c,
    )?;
    let f = FirstIntegral::rational("F", LevelValidity::AllLevels, move |ph: &PhasePoint| {
        let (x, y, p1, p2) = (ph.q.q1, ph.q.q2, ph.p1, ph.p2);
        let r = x.hypot(y);
        let num = (r - x) * p1 - y * p2 + gamma * y;
        let den = y * p1 + (r - x) * p2 + gamma * r - gamma * x;
        Ok((num, den))
    });
    let f1 = FirstIntegral::new(
        "F1",
        IntegralKind::Linear,
        LevelValidity::AllLevels,
        move |ph: &PhasePoint| {
            let (x, y) = (ph.q.q1, ph.q.q2);
            Ok(-y * ph.p1 + x * ph.p2 - 0.5 * gamma * x.hypot(y))
        },
    )
    .with_partials(move |ph: &PhasePoint| {
        let (x, y) = (ph.q.q1, ph.q.q2);
        let r = x.hypot(y);
        Ok([
            ph.p2 - 0.5 * gamma * x / r,
            -ph.p1 - 0.5 * gamma * y / r,
            -y,
            x,
        ])
    });
    let phases = phases_from(
        &system,
        &[
            (-1.0, 0.5, 0.0),
            (-0.5, -1.0, 1.0),
            (0.3, 1.2, 2.0),
            (-1.5, -0.2, 4.0),
        ],
    )?;
    Ok(entry(
        "ex4",
        "x,y",
        system,
        vec![f, f1],
        phases,
        "superintegrable flat example at all levels",
    ))
}

/// Explicit metric and field of the `ν = 2` rational example.
pub mod ex5_formulas {
    use super::*;

    pub(super) struct Metric {
        pub gamma: f64,
        pub c: f64,
    }

    impl GenericMetric for Metric {
        fn components<T: Scalar>(&self, rho: T, psi: T) -> [T; 3] {
            let pref = (rho + 1.0) * (2.0 * self.gamma * self.gamma / self.c);
            let s4 = (psi * 4.0).sin();
            let c4 = (psi * 4.0).cos();
            let g22 = rho * 2.0 + rho * rho * 2.0 + (rho * 2.0 + 1.0) * c4 + 1.0;
            [pref * 2.0, pref * s4, pref * g22]
        }
    }

    pub fn metric(rho: f64, psi: f64, gamma: f64, c: f64) -> [f64; 3] {
        Metric { gamma, c }.components(rho, psi)
    }

    pub fn omega(_rho: f64, psi: f64, gamma: f64) -> f64 {
        gamma * (2.0 * psi).cos()
    }

    /// Numerator and denominator of the explicit integral.
    pub fn integral_parts(rho: f64, psi: f64, p_rho: f64, p_psi: f64, gamma: f64) -> (f64, f64) {
        let (sh, ch) = (0.5 * psi).sin_cos();
        let w = gamma * (1.0 + 2.0 * rho + (4.0 * psi).cos());
        let num = ch * (rho - 2.0 * rho * psi.cos() - (2.0 * psi).cos()) * p_rho
            + (1.5 * psi).sin() * p_psi
            + w * sh;
        let den = -sh * (rho + 2.0 * rho * psi.cos() - (2.0 * psi).cos()) * p_rho
            - (1.5 * psi).cos() * p_psi
            + w * ch;
        (num, den)
    }

    pub fn momenta(rho: f64, psi: f64, phi: f64, gamma: f64) -> (f64, f64) {
        let s = (gamma * gamma * (1.0 + rho)).sqrt();
        (
            -2.0 * s * (phi - psi).cos(),
            -s * ((phi + 3.0 * psi).sin() + (1.0 + 2.0 * rho) * (phi - psi).sin()),
        )
    }

    pub fn in_domain(rho: f64, psi: f64) -> bool {
        let c2 = (2.0 * psi).cos();
        rho > -1.0 && rho + c2 * c2 > 0.02
    }
}

/// Explicit metric and field of the `ν = 1` logarithmic rational example.
pub mod ex6_formulas {
    use super::*;

    pub(super) struct Metric {
        pub gamma: f64,
        pub c: f64,
    }

    impl GenericMetric for Metric {
        fn components<T: Scalar>(&self, rho: T, psi: T) -> [T; 3] {
            let q = rho + 1.0;
            let r4 = rho.powi(4);
            let pref = (r4 * q.powi(3) * (2.0 * self.c)).recip() * (self.gamma * self.gamma);
            let c2 = (psi * 2.0).cos();
            let s2 = (psi * 2.0).sin();
            let g11 = rho * q * 2.0 + 1.0 - (rho * 2.0 + 1.0) * c2;
            let g12 = -(rho * q * s2);
            let g22 = rho * rho * q * q * 2.0;
            [pref * g11, pref * g12, pref * g22]
        }
    }

    pub fn metric(rho: f64, psi: f64, gamma: f64, c: f64) -> [f64; 3] {
        Metric { gamma, c }.components(rho, psi)
    }

    pub fn omega(rho: f64, psi: f64, gamma: f64) -> f64 {
        -gamma * psi.cos() / (2.0 * rho * (rho + 1.0).powi(2))
    }

    pub fn integral_parts(rho: f64, psi: f64, p_rho: f64, p_psi: f64, gamma: f64) -> (f64, f64) {
        let (sh, ch) = (0.5 * psi).sin_cos();
        let q = rho + 1.0;
        let w = gamma * (1.0 + 2.0 * rho - (2.0 * psi).cos());
        let num = 2.0
            * rho
            * q
            * (p_rho * rho * q * (1.5 * psi).cos()
                + p_psi * (q + (1.0 + 2.0 * rho) * psi.cos()) * sh)
            + w * sh;
        let den = 2.0
            * rho
            * q
            * (-p_rho * rho * q * (1.5 * psi).sin()
                - p_psi * (q - (1.0 + 2.0 * rho) * psi.cos()) * ch)
            + w * ch;
        (num, den)
    }

    pub fn momenta(rho: f64, psi: f64, phi: f64, gamma: f64) -> (f64, f64) {
        let q = 1.0 + rho;
        (
            gamma * (-phi.cos() + (1.0 + 2.0 * rho) * (phi + 2.0 * psi).cos())
                / (2.0 * rho * rho * q.powf(1.5)),
            gamma * (phi + 2.0 * psi).sin() / (rho * q.sqrt()),
        )
    }

    pub fn in_domain(rho: f64, _psi: f64) -> bool {
        rho > 0.0
    }
}

fn rational_from_parts(
    name: &str,
    c: f64,
    parts: impl Fn(f64, f64, f64, f64) -> (f64, f64) + Send + Sync + 'static,
) -> FirstIntegral {
    FirstIntegral::rational(
        name,
        LevelValidity::FixedLevel(c),
        move |ph: &PhasePoint| Ok(parts(ph.q.q1, ph.q.q2, ph.p1, ph.p2)),
    )
}

fn explicit_phases(
    starts: &[(f64, f64, f64)],
    momenta: impl Fn(f64, f64, f64) -> (f64, f64),
) -> Vec<PhasePoint> {
    starts
        .iter()
        .map(|&(rho, psi, phi)| {
            let (p1, p2) = momenta(rho, psi, phi);
            PhasePoint::new(rho, psi, p1, p2)
        })
        .collect()
}

fn ex5(gamma: f64, c: f64) -> Result<CatalogEntry> {
    let domain = ChartDomain::new(|q: ChartPoint| ex5_formulas::in_domain(q.q1, q.q2))
        .with_bbox(BoundingBox::new((0.05, 3.0), (0.0, TAU)))
        .with_periods([None, Some(TAU)]);
    let system = MagneticSystem::new(
        "ex5",
        MetricTensorField::from_generic(ex5_formulas::Metric { gamma, c }),
        MagneticField2Form::new(move |q| ex5_formulas::omega(q.q1, q.q2, gamma)),
        domain,
        c,
    )?;
    let f = rational_from_parts("F", c, move |r, p, pr, pp| {
        ex5_formulas::integral_parts(r, p, pr, pp, gamma)
    });
    let phases = explicit_phases(
        &[
            (1.0, 0.3, 0.0),
            (1.0, 1.0, 1.5),
            (2.0, 2.0, 2.5),
            (1.5, 4.0, 1.5),
        ],
        |r, p, phi| ex5_formulas::momenta(r, p, phi, gamma),
    );
    Ok(entry(
        "ex5",
        "rho,psi",
        system,
        vec![f],
        phases,
        "rational integral from a polynomial solution",
    ))
}

fn ex6(gamma: f64, c: f64) -> Result<CatalogEntry> {
    let domain = ChartDomain::new(|q: ChartPoint| ex6_formulas::in_domain(q.q1, q.q2))
        .with_bbox(BoundingBox::new((0.2, 3.0), (0.0, TAU)))
        .with_periods([None, Some(TAU)]);
    let system = MagneticSystem::new(
        "ex6",
        MetricTensorField::from_generic(ex6_formulas::Metric { gamma, c }),
        MagneticField2Form::new(move |q| ex6_formulas::omega(q.q1, q.q2, gamma)),
        domain,
        c,
    )?;
    let f = rational_from_parts("F", c, move |r, p, pr, pp| {
        ex6_formulas::integral_parts(r, p, pr, pp, gamma)
    });
    let phases = explicit_phases(
        &[
            (1.0, 0.3, 0.0),
            (0.5, 1.0, 1.0),
            (2.0, 2.0, 2.5),
            (1.5, 4.0, 4.0),
        ],
        |r, p, phi| ex6_formulas::momenta(r, p, phi, gamma),
    );
    Ok(entry(
        "ex6",
        "rho,psi",
        system,
        vec![f],
        phases,
        "rational integral from a logarithmic solution",
    ))
}
