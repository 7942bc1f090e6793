//! Charts, metrics, magnetic 2-forms and the kinetic Hamiltonian on a 2-surface.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::{Dual, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartPoint {
    pub q1: f64,
    pub q2: f64,
}

impl ChartPoint {
    pub const fn new(q1: f64, q2: f64) -> Self {
        Self { q1, q2 }
    }

    pub fn is_finite(&self) -> bool {
        self.q1.is_finite() && self.q2.is_finite()
    }

    pub fn offset(&self, d1: f64, d2: f64) -> Self {
        Self::new(self.q1 + d1, self.q2 + d2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub q: ChartPoint,
    pub p1: f64,
    pub p2: f64,
}

impl PhasePoint {
    pub const fn new(q1: f64, q2: f64, p1: f64, p2: f64) -> Self {
        Self {
            q: ChartPoint::new(q1, q2),
            p1,
            p2,
        }
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.q.q1, self.q.q2, self.p1, self.p2]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// Symmetric 2x2 matrix `[[g11, g12], [g12, g22]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymMat2 {
    pub g11: f64,
    pub g12: f64,
    pub g22: f64,
}

impl SymMat2 {
    pub const fn new(g11: f64, g12: f64, g22: f64) -> Self {
        Self { g11, g12, g22 }
    }

    pub const fn identity() -> Self {
        Self::new(1.0, 0.0, 1.0)
    }

    pub fn scaled(lambda: f64) -> Self {
        Self::new(lambda, 0.0, lambda)
    }

    pub fn det(&self) -> f64 {
        self.g11 * self.g22 - self.g12 * self.g12
    }

    pub fn is_positive_definite(&self) -> bool {
        self.g11 > 0.0 && self.det() > 0.0
    }

    pub fn inverse(&self) -> Option<SymMat2> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        Some(SymMat2::new(
            self.g22 / det,
            -self.g12 / det,
            self.g11 / det,
        ))
    }

    pub fn mul_vec(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.g11 * v[0] + self.g12 * v[1],
            self.g12 * v[0] + self.g22 * v[1],
        ]
    }

    /// `vᵀ M v`
    pub fn quad(&self, v: [f64; 2]) -> f64 {
        self.g11 * v[0] * v[0] + 2.0 * self.g12 * v[0] * v[1] + self.g22 * v[1] * v[1]
    }

    /// Lower-triangular factor with positive diagonal: `(l11, l21, l22)`.
    pub fn cholesky(&self) -> Option<(f64, f64, f64)> {
        if !(self.g11 > 0.0) {
            return None;
        }
        let l11 = self.g11.sqrt();
        let l21 = self.g12 / l11;
        let rem = self.g22 - l21 * l21;
        if !(rem > 0.0) {
            return None;
        }
        Some((l11, l21, rem.sqrt()))
    }

    pub fn max_abs_diff(&self, other: &SymMat2) -> f64 {
        (self.g11 - other.g11)
            .abs()
            .max((self.g12 - other.g12).abs())
            .max((self.g22 - other.g22).abs())
    }
}

/// Closed-form metric written once over [`Scalar`]; evaluating it on [`Dual`]
/// gives exact first partials.
pub trait GenericMetric: Send + Sync + 'static {
    /// `[g11, g12, g22]` at `(q1, q2)`.
    fn components<T: Scalar>(&self, q1: T, q2: T) -> [T; 3];
}

type MetricFn = dyn Fn(ChartPoint) -> SymMat2 + Send + Sync;
type MetricPartialsFn = dyn Fn(ChartPoint) -> [SymMat2; 2] + Send + Sync;

#[derive(Clone)]
pub struct MetricTensorField {
    eval: Arc<MetricFn>,
    partials: Option<Arc<MetricPartialsFn>>,
}

impl fmt::Debug for MetricTensorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricTensorField")
            .field("analytic_partials", &self.partials.is_some())
            .finish()
    }
}

impl MetricTensorField {
    pub fn new(eval: impl Fn(ChartPoint) -> SymMat2 + Send + Sync + 'static) -> Self {
        Self {
            eval: Arc::new(eval),
            partials: None,
        }
    }

    /// Supplies analytic partials `[∂G/∂q1, ∂G/∂q2]`.
    pub fn with_partials(
        mut self,
        partials: impl Fn(ChartPoint) -> [SymMat2; 2] + Send + Sync + 'static,
    ) -> Self {
        self.partials = Some(Arc::new(partials));
        self
    }

    pub fn from_generic<M: GenericMetric>(metric: M) -> Self {
        let metric = Arc::new(metric);
        let m2 = Arc::clone(&metric);
        Self::new(move |q| {
            let [a, b, c] = metric.components(q.q1, q.q2);
            SymMat2::new(a, b, c)
        })
        .with_partials(move |q| {
            let [a, b, c] = m2.components(Dual::var(q.q1, 0), Dual::var(q.q2, 1));
            [
                SymMat2::new(a.d[0], b.d[0], c.d[0]),
                SymMat2::new(a.d[1], b.d[1], c.d[1]),
            ]
        })
    }

    pub fn euclidean() -> Self {
        Self::new(|_| SymMat2::identity()).with_partials(|_| [SymMat2::new(0.0, 0.0, 0.0); 2])
    }

    pub fn at(&self, q: ChartPoint) -> SymMat2 {
        (self.eval)(q)
    }

    pub fn has_analytic_partials(&self) -> bool {
        self.partials.is_some()
    }

    /// `[∂G/∂q1, ∂G/∂q2]`, analytic when available, otherwise central
    /// differences with step `1e-5 * max(1, |q_i|)`.
    pub fn partials_at(&self, q: ChartPoint) -> [SymMat2; 2] {
        if let Some(p) = &self.partials {
            return p(q);
        }
        let h1 = 1e-5 * q.q1.abs().max(1.0);
        let h2 = 1e-5 * q.q2.abs().max(1.0);
        let d = |a: SymMat2, b: SymMat2, h: f64| {
            SymMat2::new(
                (a.g11 - b.g11) / (2.0 * h),
                (a.g12 - b.g12) / (2.0 * h),
                (a.g22 - b.g22) / (2.0 * h),
            )
        };
        [
            d(self.at(q.offset(h1, 0.0)), self.at(q.offset(-h1, 0.0)), h1),
            d(self.at(q.offset(0.0, h2)), self.at(q.offset(0.0, -h2)), h2),
        ]
    }
}

/// Coefficient Ω of the closed 2-form `Ω dq¹∧dq²`.
#[derive(Clone)]
pub struct MagneticField2Form {
    omega: Arc<dyn Fn(ChartPoint) -> f64 + Send + Sync>,
}

impl fmt::Debug for MagneticField2Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("MagneticField2Form")
    }
}

impl MagneticField2Form {
    pub fn new(omega: impl Fn(ChartPoint) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            omega: Arc::new(omega),
        }
    }

    pub fn uniform(b: f64) -> Self {
        Self::new(move |_| b)
    }

    pub fn zero() -> Self {
        Self::uniform(0.0)
    }

    pub fn at(&self, q: ChartPoint) -> f64 {
        (self.omega)(q)
    }

    /// Field with Ω → −Ω (used for time reversal).
    pub fn negated(&self) -> Self {
        let inner = Arc::clone(&self.omega);
        Self::new(move |q| -inner(q))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub q1: (f64, f64),
    pub q2: (f64, f64),
}

impl BoundingBox {
    pub const fn new(q1: (f64, f64), q2: (f64, f64)) -> Self {
        Self { q1, q2 }
    }

    pub fn contains(&self, q: ChartPoint) -> bool {
        q.q1 >= self.q1.0 && q.q1 <= self.q1.1 && q.q2 >= self.q2.0 && q.q2 <= self.q2.1
    }

    /// Cell-centred `n1 x n2` sample grid, row-major in `q1`.
    pub fn grid(&self, n1: usize, n2: usize) -> Vec<ChartPoint> {
        let mut pts = Vec::with_capacity(n1 * n2);
        for i in 0..n1 {
            let q1 = self.q1.0 + (i as f64 + 0.5) / n1 as f64 * (self.q1.1 - self.q1.0);
            for j in 0..n2 {
                let q2 = self.q2.0 + (j as f64 + 0.5) / n2 as f64 * (self.q2.1 - self.q2.0);
                pts.push(ChartPoint::new(q1, q2));
            }
        }
        pts
    }
}

/// Strict membership predicate plus a sampling box and periodicity data.
#[derive(Clone)]
pub struct ChartDomain {
    predicate: Arc<dyn Fn(ChartPoint) -> bool + Send + Sync>,
    pub bbox: Option<BoundingBox>,
    pub periods: [Option<f64>; 2],
}

impl fmt::Debug for ChartDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChartDomain")
            .field("bbox", &self.bbox)
            .field("periods", &self.periods)
            .finish()
    }
}

impl ChartDomain {
    pub fn new(predicate: impl Fn(ChartPoint) -> bool + Send + Sync + 'static) -> Self {
        Self {
            predicate: Arc::new(predicate),
            bbox: None,
            periods: [None, None],
        }
    }

    pub fn everywhere() -> Self {
        Self::new(|_| true)
    }

    pub fn with_bbox(mut self, bbox: BoundingBox) -> Self {
        self.bbox = Some(bbox);
        self
    }

    pub fn with_periods(mut self, periods: [Option<f64>; 2]) -> Self {
        self.periods = periods;
        self
    }

    pub fn contains(&self, q: ChartPoint) -> bool {
        q.is_finite() && (self.predicate)(q)
    }

    /// Grid points of the sampling box accepted by the predicate.
    pub fn sample_grid(&self, n1: usize, n2: usize) -> Vec<ChartPoint> {
        match &self.bbox {
            Some(b) => b
                .grid(n1, n2)
                .into_iter()
                .filter(|q| self.contains(*q))
                .collect(),
            None => Vec::new(),
        }
    }
}

/// Metric, magnetic field, chart domain and the energy constant `C` of the
/// level `{H = C/2}` on which level-specific integrals hold.
#[derive(Debug, Clone)]
pub struct MagneticSystem {
    pub name: String,
    pub metric: MetricTensorField,
    pub field: MagneticField2Form,
    pub domain: ChartDomain,
    pub energy_constant: f64,
}

impl MagneticSystem {
    pub fn new(
        name: impl Into<String>,
        metric: MetricTensorField,
        field: MagneticField2Form,
        domain: ChartDomain,
        energy_constant: f64,
    ) -> Result<Self> {
        if !(energy_constant > 0.0) || !energy_constant.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "energy constant must be positive, got {energy_constant}"
            )));
        }
        Ok(Self {
            name: name.into(),
            metric,
            field,
            domain,
            energy_constant,
        })
    }

    /// Same system with Ω → −Ω.
    pub fn with_reversed_field(&self) -> Self {
        Self {
            field: self.field.negated(),
            ..self.clone()
        }
    }

    pub fn check_domain(&self, q: ChartPoint) -> Result<()> {
        if self.domain.contains(q) {
            Ok(())
        } else {
            Err(Error::Domain { q1: q.q1, q2: q.q2 })
        }
    }

    /// Metric at `q`, refusing points outside the domain or where it is not
    /// positive-definite.
    pub fn metric_checked(&self, q: ChartPoint) -> Result<SymMat2> {
        self.check_domain(q)?;
        let g = self.metric.at(q);
        if !g.is_positive_definite() || !g.det().is_finite() {
            return Err(Error::SingularMetric {
                q1: q.q1,
                q2: q.q2,
                det: g.det(),
            });
        }
        Ok(g)
    }

    /// Fraction of the `n x n` domain sample grid where the metric is positive-definite.
    pub fn positive_definite_fraction(&self, n: usize) -> f64 {
        let pts = self.domain.sample_grid(n, n);
        if pts.is_empty() {
            return 0.0;
        }
        let ok = pts
            .iter()
            .filter(|q| self.metric.at(**q).is_positive_definite())
            .count();
        ok as f64 / pts.len() as f64
    }
}

/// `H = ½ pᵀ G(q)⁻¹ p`.
pub fn hamiltonian(system: &MagneticSystem, phase: &PhasePoint) -> Result<f64> {
    let g = system.metric_checked(phase.q)?;
    let inv = g.inverse().ok_or(Error::SingularMetric {
        q1: phase.q.q1,
        q2: phase.q.q2,
        det: g.det(),
    })?;
    Ok(0.5 * inv.quad([phase.p1, phase.p2]))
}

/// Momenta on `{H = c/2}` at `q`: `p = √c · L (cos φ, sin φ)` with `G = L Lᵀ`.
pub fn momentum_on_level(
    system: &MagneticSystem,
    q: ChartPoint,
    phi: f64,
    c: f64,
) -> Result<(f64, f64)> {
    if !(c > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "energy constant must be positive, got {c}"
        )));
    }
    let g = system.metric_checked(q)?;
    let (l11, l21, l22) = g.cholesky().ok_or(Error::SingularMetric {
        q1: q.q1,
        q2: q.q2,
        det: g.det(),
    })?;
    let s = c.sqrt();
    let (sn, cs) = phi.sin_cos();
    Ok((s * l11 * cs, s * (l21 * cs + l22 * sn)))
}

/// Phase point on `{H = c/2}`.
pub fn phase_on_level(
    system: &MagneticSystem,
    q: ChartPoint,
    phi: f64,
    c: f64,
) -> Result<PhasePoint> {
    let (p1, p2) = momentum_on_level(system, q, phi, c)?;
    Ok(PhasePoint { q, p1, p2 })
}

/// Gaussian curvature via the Brioschi formula with central differences of
/// the metric components, combining steps `h` and `h/2` (one Richardson step).
pub fn gaussian_curvature_fd(system: &MagneticSystem, q: ChartPoint, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "step must be positive, got {h}"
        )));
    }
    for (d1, d2) in [
        (2.0 * h, 0.0),
        (-2.0 * h, 0.0),
        (0.0, 2.0 * h),
        (0.0, -2.0 * h),
    ] {
        system.check_domain(q.offset(d1, d2))?;
    }
    let g0 = system.metric_checked(q)?;
    Ok((4.0 * brioschi(system, q, g0, 0.5 * h) - brioschi(system, q, g0, h)) / 3.0)
}

fn brioschi(system: &MagneticSystem, q: ChartPoint, g0: SymMat2, h: f64) -> f64 {
    let m = |d1: f64, d2: f64| system.metric.at(q.offset(d1, d2));
    let (up, um, vp, vm) = (m(h, 0.0), m(-h, 0.0), m(0.0, h), m(0.0, -h));
    let (pp, pm, mp, mm) = (m(h, h), m(h, -h), m(-h, h), m(-h, -h));

    let (e, f, g) = (g0.g11, g0.g12, g0.g22);
    let e_u = (up.g11 - um.g11) / (2.0 * h);
    let e_v = (vp.g11 - vm.g11) / (2.0 * h);
    let f_u = (up.g12 - um.g12) / (2.0 * h);
    let f_v = (vp.g12 - vm.g12) / (2.0 * h);
    let g_u = (up.g22 - um.g22) / (2.0 * h);
    let g_v = (vp.g22 - vm.g22) / (2.0 * h);
    let e_vv = (vp.g11 - 2.0 * e + vm.g11) / (h * h);
    let g_uu = (up.g22 - 2.0 * g + um.g22) / (h * h);
    let f_uv = (pp.g12 - pm.g12 - mp.g12 + mm.g12) / (4.0 * h * h);

    let a = [
        [-0.5 * e_vv + f_uv - 0.5 * g_uu, 0.5 * e_u, f_u - 0.5 * e_v],
        [f_v - 0.5 * g_u, e, f],
        [0.5 * g_v, f, g],
    ];
    let b = [
        [0.0, 0.5 * e_v, 0.5 * g_u],
        [0.5 * e_v, e, f],
        [0.5 * g_u, f, g],
    ];
    let denom = g0.det() * g0.det();
    (det3(&a) - det3(&b)) / denom
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// `n` phase points on `{H = c/2}` with base points drawn uniformly from the
/// domain's sampling box (rejection against the predicate and positivity).
pub fn random_phases_on_level<R: Rng + ?Sized>(
    system: &MagneticSystem,
    c: f64,
    n: usize,
    rng: &mut R,
) -> Result<Vec<PhasePoint>> {
    let bbox = system.domain.bbox.ok_or_else(|| {
        Error::InvalidConfig(format!("system '{}' has no sampling box", system.name))
    })?;
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0usize;
    while out.len() < n {
        attempts += 1;
        if attempts > 1000 * (n + 1) {
            return Err(Error::InvalidConfig(format!(
                "could not sample {n} points inside the domain of '{}'",
                system.name
            )));
        }
        let q = ChartPoint::new(
            rng.gen_range(bbox.q1.0..bbox.q1.1),
            rng.gen_range(bbox.q2.0..bbox.q2.1),
        );
        let phi = rng.gen_range(0.0..std::f64::consts::TAU);
        match phase_on_level(system, q, phi, c) {
            Ok(ph) => out.push(ph),
            Err(Error::Domain { .. } | Error::SingularMetric { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn euclid() -> MagneticSystem {
        MagneticSystem::new(
            "euclid",
            MetricTensorField::euclidean(),
            MagneticField2Form::zero(),
            ChartDomain::everywhere().with_bbox(BoundingBox::new((-1.0, 1.0), (-1.0, 1.0))),
            1.0,
        )
        .unwrap()
    }

    fn conformal(lambda: impl Fn(ChartPoint) -> f64 + Send + Sync + 'static) -> MagneticSystem {
        MagneticSystem::new(
            "conformal",
            MetricTensorField::new(move |q| SymMat2::scaled(lambda(q))),
            MagneticField2Form::zero(),
            ChartDomain::everywhere(),
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn hamiltonian_of_euclidean_metric() {
        let h = hamiltonian(&euclid(), &PhasePoint::new(0.0, 0.0, 3.0, 4.0)).unwrap();
        assert_eq!(h, 12.5);
    }

    #[test]
    fn hamiltonian_of_conformal_metric() {
        let s = conformal(|_| 2.0);
        assert_eq!(
            hamiltonian(&s, &PhasePoint::new(0.3, 0.1, 2.0, 0.0)).unwrap(),
            1.0
        );
    }

    #[test]
    fn hamiltonian_refuses_outside_domain() {
        let mut s = euclid();
        s.domain = ChartDomain::new(|q| q.q1 > 0.0);
        let err = hamiltonian(&s, &PhasePoint::new(-1.0, 0.0, 1.0, 0.0)).unwrap_err();
        assert!(matches!(err, Error::Domain { .. }));
    }

    #[test]
    fn hamiltonian_refuses_indefinite_metric() {
        let s = MagneticSystem::new(
            "bad",
            MetricTensorField::new(|_| SymMat2::new(1.0, 2.0, 1.0)),
            MagneticField2Form::zero(),
            ChartDomain::everywhere(),
            1.0,
        )
        .unwrap();
        let err = hamiltonian(&s, &PhasePoint::new(0.0, 0.0, 1.0, 0.0)).unwrap_err();
        assert!(matches!(err, Error::SingularMetric { .. }));
    }

    #[test]
    fn nonpositive_energy_constant_is_rejected() {
        let r = MagneticSystem::new(
            "x",
            MetricTensorField::euclidean(),
            MagneticField2Form::zero(),
            ChartDomain::everywhere(),
            0.0,
        );
        assert!(r.is_err());
    }

    #[test]
    fn momentum_on_conformal_level() {
        let s = conformal(|q| 1.0 + q.q1 * q.q1);
        let q = ChartPoint::new(0.5, 0.2);
        let (c, phi) = (3.0, 0.7);
        let (p1, p2) = momentum_on_level(&s, q, phi, c).unwrap();
        let lam: f64 = 1.25;
        assert!((p1 - (c * lam).sqrt() * phi.cos()).abs() < 1e-14);
        assert!((p2 - (c * lam).sqrt() * phi.sin()).abs() < 1e-14);
    }

    #[test]
    fn momentum_identity_metric() {
        let (p1, p2) = momentum_on_level(&euclid(), ChartPoint::new(0.0, 0.0), 0.0, 2.0).unwrap();
        assert!((p1 - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(p2, 0.0);
    }

    #[test]
    fn momentum_on_general_metric_hits_level() {
        let s = MagneticSystem::new(
            "skew",
            MetricTensorField::new(|q| {
                SymMat2::new(2.0 + q.q1.sin(), 0.7 * q.q2.cos(), 3.0 + q.q1 * q.q2)
            }),
            MagneticField2Form::zero(),
            ChartDomain::everywhere(),
            1.0,
        )
        .unwrap();
        for k in 0..20 {
            let q = ChartPoint::new(0.1 * k as f64, -0.05 * k as f64);
            let phi = 0.37 * k as f64;
            let ph = phase_on_level(&s, q, phi, 1.7).unwrap();
            let h = hamiltonian(&s, &ph).unwrap();
            assert!((h - 0.85).abs() < 1e-14 * 0.85);
        }
    }

    #[test]
    fn curvature_of_euclidean_plane_is_zero() {
        let k = gaussian_curvature_fd(&euclid(), ChartPoint::new(0.2, -0.3), 1e-3).unwrap();
        assert!(k.abs() < 1e-8);
    }

    #[test]
    fn curvature_of_round_sphere_chart() {
        // stereographic chart of the unit sphere: Λ = 4 / (1 + r²)²
        let s = conformal(|q| 4.0 / (1.0 + q.q1 * q.q1 + q.q2 * q.q2).powi(2));
        let k = gaussian_curvature_fd(&s, ChartPoint::new(0.3, 0.4), 1e-3).unwrap();
        assert!((k - 1.0).abs() < 1e-5, "K = {k}");
    }

    #[test]
    fn curvature_needs_margin() {
        let mut s = euclid();
        s.domain = ChartDomain::new(|q| q.q1 < 1.0);
        let err = gaussian_curvature_fd(&s, ChartPoint::new(1.0 - 1e-3, 0.0), 1e-3).unwrap_err();
        assert!(matches!(err, Error::Domain { .. }));
    }

    #[test]
    fn fd_metric_partials_match_generic_partials() {
        struct M;
        impl GenericMetric for M {
            fn components<T: Scalar>(&self, x: T, y: T) -> [T; 3] {
                [(x * y).sin() + 2.0, x * 0.1, (y.sq() + 1.0).ln() + 1.5]
            }
        }
        let exact = MetricTensorField::from_generic(M);
        let fd_only = MetricTensorField::new(|q| {
            let [a, b, c] = M.components(q.q1, q.q2);
            SymMat2::new(a, b, c)
        });
        assert!(exact.has_analytic_partials() && !fd_only.has_analytic_partials());
        let q = ChartPoint::new(0.4, -1.2);
        let (a, b) = (exact.partials_at(q), fd_only.partials_at(q));
        assert!(a[0].max_abs_diff(&b[0]) < 1e-9);
        assert!(a[1].max_abs_diff(&b[1]) < 1e-9);
    }

    #[test]
    fn cholesky_reconstructs_matrix() {
        let g = SymMat2::new(4.0, 1.2, 2.5);
        let (l11, l21, l22) = g.cholesky().unwrap();
        assert!(l11 > 0.0 && l22 > 0.0);
        let back = SymMat2::new(l11 * l11, l11 * l21, l21 * l21 + l22 * l22);
        assert!(back.max_abs_diff(&g) < 1e-14);
    }
}
