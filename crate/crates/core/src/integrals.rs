//! First integrals, the magnetic Poisson bracket and independence tests.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{hamiltonian, momentum_on_level, MagneticSystem, PhasePoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegralKind {
    Linear,
    Quadratic,
    Rational,
    Transcendental,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelValidity {
    AllLevels,
    /// Conserved on `{H = C/2}` only.
    FixedLevel(f64),
}

impl LevelValidity {
    pub fn holds_at(&self, c: f64) -> bool {
        match self {
            LevelValidity::AllLevels => true,
            LevelValidity::FixedLevel(c0) => (c - c0).abs() <= 1e-12 * c0.abs().max(1.0),
        }
    }
}

type PhaseFn = Arc<dyn Fn(&PhasePoint) -> Result<f64> + Send + Sync>;
type PhaseGrad = Arc<dyn Fn(&PhasePoint) -> Result<[f64; 4]> + Send + Sync>;
type PhaseParts = Arc<dyn Fn(&PhasePoint) -> Result<(f64, f64)> + Send + Sync>;

/// `|denominator|` below this makes a quotient integral report a pole.
pub const POLE_GUARD: f64 = 1e-8;
type PhaseGuard = Arc<dyn Fn(&PhasePoint) -> bool + Send + Sync>;

/// A phase-space function expected to Poisson-commute with `H`.
///
/// Gradients are ordered `(∂/∂q¹, ∂/∂q², ∂/∂p₁, ∂/∂p₂)`.
#[derive(Clone)]
pub struct FirstIntegral {
    pub name: String,
    pub kind: IntegralKind,
    pub validity: LevelValidity,
    eval: PhaseFn,
    partials: Option<PhaseGrad>,
    ratio: Option<PhaseParts>,
    guard: PhaseGuard,
}

impl fmt::Debug for FirstIntegral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FirstIntegral")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .field("validity", &self.validity)
            .field("analytic_partials", &self.partials.is_some())
            .finish()
    }
}

impl FirstIntegral {
    pub fn new(
        name: impl Into<String>,
        kind: IntegralKind,
        validity: LevelValidity,
        eval: impl Fn(&PhasePoint) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            kind,
            validity,
            eval: Arc::new(eval),
            partials: None,
            ratio: None,
            guard: Arc::new(|_| true),
        }
    }

    /// `F = N/D` from a function returning `(N, D)`; `|D| < 1e-8` is reported as a pole.
    pub fn rational(
        name: impl Into<String>,
        validity: LevelValidity,
        parts: impl Fn(&PhasePoint) -> Result<(f64, f64)> + Send + Sync + 'static,
    ) -> Self {
        let parts: PhaseParts = Arc::new(parts);
        let p = parts.clone();
        let mut out = Self::new(name, IntegralKind::Rational, validity, move |ph| {
            quotient(p(ph)?)
        });
        out.ratio = Some(parts);
        out
    }

    pub fn with_partials(
        mut self,
        partials: impl Fn(&PhasePoint) -> Result<[f64; 4]> + Send + Sync + 'static,
    ) -> Self {
        self.partials = Some(Arc::new(partials));
        self
    }

    pub fn with_guard(
        mut self,
        guard: impl Fn(&PhasePoint) -> bool + Send + Sync + 'static,
    ) -> Self {
        self.guard = Arc::new(guard);
        self
    }

    /// The Hamiltonian of `system`, with exact phase-space gradient.
    pub fn hamiltonian(system: &MagneticSystem) -> Self {
        let s1 = system.clone();
        let s2 = system.clone();
        Self::new(
            "H",
            IntegralKind::Quadratic,
            LevelValidity::AllLevels,
            move |ph| hamiltonian(&s1, ph),
        )
        .with_partials(move |ph| hamiltonian_gradient(&s2, ph))
    }

    /// `F + eps·q¹`, a deliberately broken copy.
    pub fn corrupted(&self, eps: f64) -> Self {
        if let Some(parts) = self.ratio.clone() {
            let mut out =
                Self::rational(format!("{}+{eps}q1", self.name), self.validity, move |ph| {
                    let (n, d) = parts(ph)?;
                    Ok((n + eps * ph.q.q1 * d, d))
                });
            out.guard = self.guard.clone();
            return out;
        }
        let inner = self.eval.clone();
        let mut out = Self {
            name: format!("{}+{eps}q1", self.name),
            eval: Arc::new(move |ph| Ok(inner(ph)? + eps * ph.q.q1)),
            partials: None,
            ..self.clone()
        };
        if let Some(p) = self.partials.clone() {
            out.partials = Some(Arc::new(move |ph| {
                let mut g = p(ph)?;
                g[0] += eps;
                Ok(g)
            }));
        }
        out
    }

    pub fn has_analytic_partials(&self) -> bool {
        self.partials.is_some()
    }

    pub fn accepts(&self, phase: &PhasePoint) -> bool {
        (self.guard)(phase)
    }

    pub fn eval(&self, phase: &PhasePoint) -> Result<f64> {
        if !self.accepts(phase) {
            return Err(Error::Guard(format!(
                "{} rejects {:?}",
                self.name,
                phase.to_array()
            )));
        }
        let v = (self.eval)(phase)?;
        if !v.is_finite() {
            return Err(Error::Guard(format!(
                "{} is not finite at {:?}",
                self.name,
                phase.to_array()
            )));
        }
        Ok(v)
    }

    /// Numerator and denominator of a quotient integral.
    pub fn ratio_parts(&self, phase: &PhasePoint) -> Option<Result<(f64, f64)>> {
        let parts = self.ratio.as_ref()?;
        if !self.accepts(phase) {
            return Some(Err(Error::Guard(format!(
                "{} rejects {:?}",
                self.name,
                phase.to_array()
            ))));
        }
        Some(parts(phase))
    }

    /// Analytic gradient if available, else Richardson-extrapolated central differences.
    pub fn gradient(&self, phase: &PhasePoint, h: f64) -> Result<[f64; 4]> {
        match &self.partials {
            Some(p) => {
                if !self.accepts(phase) {
                    return Err(Error::Guard(format!(
                        "{} rejects {:?}",
                        self.name,
                        phase.to_array()
                    )));
                }
                p(phase)
            }
            None => fd_gradient(|ph| self.eval(ph), phase, h),
        }
    }
}

fn quotient((n, d): (f64, f64)) -> Result<f64> {
    if !(d.abs() >= POLE_GUARD) {
        return Err(Error::NearPole { value: d.abs() });
    }
    Ok(n / d)
}

/// Central-difference gradient combining steps `h` and `h/2` (one Richardson step).
/// Each step is scaled by `max(1, |xᵢ|)`.
pub fn fd_gradient(
    f: impl Fn(&PhasePoint) -> Result<f64>,
    phase: &PhasePoint,
    h: f64,
) -> Result<[f64; 4]> {
    let x = phase.to_array();
    let mut g = [0.0; 4];
    for i in 0..4 {
        let hi = h * x[i].abs().max(1.0);
        let diff = |s: f64| -> Result<f64> {
            let mut xp = x;
            let mut xm = x;
            xp[i] += s;
            xm[i] -= s;
            Ok((f(&PhasePoint::from_array(xp))? - f(&PhasePoint::from_array(xm))?) / (2.0 * s))
        };
        let d1 = diff(hi)?;
        let d2 = diff(0.5 * hi)?;
        g[i] = (4.0 * d2 - d1) / 3.0;
    }
    Ok(g)
}

/// `(∂H/∂q¹, ∂H/∂q², ∂H/∂p₁, ∂H/∂p₂)`.
pub fn hamiltonian_gradient(system: &MagneticSystem, phase: &PhasePoint) -> Result<[f64; 4]> {
    let q = phase.q;
    let g = system.metric_checked(q)?;
    let inv = g.inverse().ok_or(Error::SingularMetric {
        q1: q.q1,
        q2: q.q2,
        det: g.det(),
    })?;
    let v = inv.mul_vec([phase.p1, phase.p2]);
    let [d1, d2] = system.metric.partials_at(q);
    Ok([-0.5 * d1.quad(v), -0.5 * d2.quad(v), v[0], v[1]])
}

/// Magnetic bracket of two functions given their gradients and `Ω`.
pub fn bracket_from_gradients(df: &[f64; 4], dg: &[f64; 4], omega: f64) -> f64 {
    let canonical = (df[0] * dg[2] - df[2] * dg[0]) + (df[1] * dg[3] - df[3] * dg[1]);
    canonical + omega * (df[2] * dg[3] - df[3] * dg[2])
}

/// `{F, H}_mg` at `phase`.
pub fn magnetic_bracket_fd(
    system: &MagneticSystem,
    f: &FirstIntegral,
    phase: &PhasePoint,
    h: f64,
) -> Result<f64> {
    system.check_domain(phase.q)?;
    let df = f.gradient(phase, h)?;
    let dh = hamiltonian_gradient(system, phase)?;
    Ok(bracket_from_gradients(&df, &dh, system.field.at(phase.q)))
}

/// Bracket used by the scans: `{F, H}_mg`, or for a quotient `F = N/D` the pole-free
/// `{arctan F, H}_mg = (D{N,H} − N{D,H}) / (N² + D²)`.
pub fn normalized_bracket_fd(
    system: &MagneticSystem,
    f: &FirstIntegral,
    phase: &PhasePoint,
    h: f64,
) -> Result<f64> {
    let Some(parts) = f.ratio_parts(phase) else {
        return magnetic_bracket_fd(system, f, phase, h);
    };
    system.check_domain(phase.q)?;
    let (n, d) = parts?;
    let norm = n * n + d * d;
    if !(norm.sqrt() >= POLE_GUARD) {
        return Err(Error::NearPole { value: norm.sqrt() });
    }
    let dn = fd_gradient(|ph| Ok(f.ratio_parts(ph).unwrap()?.0), phase, h)?;
    let dd = fd_gradient(|ph| Ok(f.ratio_parts(ph).unwrap()?.1), phase, h)?;
    let dh = hamiltonian_gradient(system, phase)?;
    let omega = system.field.at(phase.q);
    Ok(
        (d * bracket_from_gradients(&dn, &dh, omega) - n * bracket_from_gradients(&dd, &dh, omega))
            / norm,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BracketScanConfig {
    pub n1: usize,
    pub n2: usize,
    pub n_angles: usize,
    pub h: f64,
}

impl Default for BracketScanConfig {
    fn default() -> Self {
        Self {
            n1: 20,
            n2: 20,
            n_angles: 16,
            h: 1e-5,
        }
    }
}

impl BracketScanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n1 < 2 || self.n2 < 2 || self.n_angles < 2 {
            return Err(Error::InvalidConfig(
                "scan resolutions must be at least 2".into(),
            ));
        }
        if !(self.h > 0.0) {
            return Err(Error::InvalidConfig("FD step must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualReport {
    pub max: f64,
    pub rms: f64,
    pub count: usize,
    /// Samples dropped because the stencil left the domain or a guard fired.
    pub skipped: usize,
}

impl ResidualReport {
    pub fn from_values(values: &[f64], skipped: usize) -> Self {
        let count = values.len();
        let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let rms = if count == 0 {
            0.0
        } else {
            (values.iter().map(|v| v * v).sum::<f64>() / count as f64).sqrt()
        };
        Self {
            max,
            rms,
            count,
            skipped,
        }
    }
}

fn is_skippable(e: &Error) -> bool {
    matches!(
        e,
        Error::Domain { .. }
            | Error::SingularMetric { .. }
            | Error::Guard(_)
            | Error::NearPole { .. }
    )
}

/// Samples [`normalized_bracket_fd`] over the domain grid and `n_angles` momentum directions on `{H = c/2}`.
pub fn level_set_bracket_scan(
    system: &MagneticSystem,
    f: &FirstIntegral,
    c: f64,
    config: &BracketScanConfig,
) -> Result<ResidualReport> {
    config.validate()?;
    let points = system.domain.sample_grid(config.n1, config.n2);
    if points.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "no grid points inside the domain of '{}'",
            system.name
        )));
    }
    let angles: Vec<f64> = (0..config.n_angles)
        .map(|k| std::f64::consts::TAU * k as f64 / config.n_angles as f64)
        .collect();
    let per_point: Vec<Vec<Result<f64>>> = points
        .par_iter()
        .map(|q| {
            angles
                .iter()
                .map(|&phi| {
                    let (p1, p2) = momentum_on_level(system, *q, phi, c)?;
                    normalized_bracket_fd(system, f, &PhasePoint { q: *q, p1, p2 }, config.h)
                })
                .collect()
        })
        .collect();
    let mut values = Vec::with_capacity(points.len() * angles.len());
    let mut skipped = 0;
    for r in per_point.into_iter().flatten() {
        match r {
            Ok(v) => values.push(v),
            Err(e) if is_skippable(&e) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(ResidualReport::from_values(&values, skipped))
}

/// Numerical rank of the Jacobian of `fns` with respect to `(q¹, q², p₁, p₂)`.
pub fn functional_independence_rank(
    fns: &[&FirstIntegral],
    phase: &PhasePoint,
    h: f64,
) -> Result<usize> {
    let mut jac = DMatrix::<f64>::zeros(fns.len(), 4);
    for (i, f) in fns.iter().enumerate() {
        let g = fd_gradient(|ph| f.eval(ph), phase, h)?;
        for j in 0..4 {
            jac[(i, j)] = g[j];
        }
    }
    let sv = jac.singular_values();
    let largest = sv.iter().fold(0.0f64, |m, s| m.max(*s));
    if largest == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|s| **s > 1e-8 * largest).count())
}
