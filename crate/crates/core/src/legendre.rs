//! Rational integrals from solutions `Z(ρ, ψ)` of the linear equation
//! `ρ(ρ+1)Z_ρρ + ρZ_ρ + Z_ψψ = 0`: solution families, the metric/field/integral
//! builder in the `(ρ, ψ)` chart, the map to conformal coordinates and the
//! Riemann invariants of the hyperbolic region.

use std::f64::consts::{FRAC_1_PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    BoundingBox, ChartDomain, ChartPoint, GenericMetric, MagneticField2Form, MagneticSystem,
    MetricTensorField, PhasePoint, SymMat2,
};
use crate::integrals::{FirstIntegral, LevelValidity, POLE_GUARD};
use crate::scalar::Scalar;
use crate::special::elliptic_ke_derivs;

/// Largest supported polynomial degree.
pub const MAX_DEGREE: usize = 60;
/// `|D|` below this is treated as degenerate.
pub const D_MIN: f64 = 1e-10;

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ZFamily {
    /// `P_k(ρ) cos(k(ψ+ψ₀))` with monic `P_k`, `P_k(0) = 0`.
    PolynomialCos {
        k: usize,
        #[serde(default)]
        psi0: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `ln(1+ρ)`.
    LogRadial {
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `(ρ ln|1+1/ρ| − 1) cos ψ`.
    LogNu1 {
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `(4/π)(E(−ρ) − K(−ρ)) cos(ψ/2)`.
    EllipticHalf {
        #[serde(default = "one")]
        amplitude: f64,
    },
}

/// `Z` and its partials up to second order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZJet<T> {
    pub z: T,
    pub zr: T,
    pub zp: T,
    pub zrr: T,
    pub zrp: T,
    pub zpp: T,
}

fn poly_jet<T: Scalar>(k: usize, rho: T) -> [T; 3] {
    // monic P_k from the ratio recursion c_{j+1}/c_j = (k+j)(k−j)/(j(j+1))
    let kf = k as f64;
    let mut coeffs = Vec::with_capacity(k);
    let mut c = 1.0;
    coeffs.push(c);
    for j in 1..k {
        let jf = j as f64;
        c *= (kf + jf) * (kf - jf) / (jf * (jf + 1.0));
        coeffs.push(c);
    }
    let lead = *coeffs.last().unwrap();
    let a: Vec<f64> = coeffs.iter().map(|c| c / lead).collect();
    let horner = |f: &dyn Fn(usize) -> f64, lo: usize| {
        let mut acc = T::cst(0.0);
        for j in (lo..=k).rev() {
            acc = acc * rho + f(j);
        }
        acc
    };
    // a[j−1] multiplies ρ^j
    let p = horner(&|j| a[j - 1], 1) * rho;
    let dp = horner(&|j| a[j - 1] * j as f64, 1);
    let ddp = if k >= 2 {
        horner(&|j| a[j - 1] * (j * (j - 1)) as f64, 2)
    } else {
        T::cst(0.0)
    };
    [p, dp, ddp]
}

fn elliptic_radial<T: Scalar>(rho: T) -> [T; 3] {
    let r = rho.re();
    let Ok((k, e)) = elliptic_ke_derivs(-r) else {
        let nan = T::cst(f64::NAN);
        return [nan, nan, nan];
    };
    let s = 4.0 * FRAC_1_PI;
    // d/dρ = −d/dm at m = −ρ
    let d: Vec<f64> = (0..4)
        .map(|n| s * if n % 2 == 0 { 1.0 } else { -1.0 } * (e[n] - k[n]))
        .collect();
    [
        rho.lift(&[d[0], d[1]]),
        rho.lift(&[d[1], d[2]]),
        rho.lift(&[d[2], d[3]]),
    ]
}

impl ZFamily {
    pub fn polynomial(k: usize) -> Self {
        ZFamily::PolynomialCos {
            k,
            psi0: 0.0,
            amplitude: 1.0,
        }
    }

    pub fn log_radial() -> Self {
        ZFamily::LogRadial { amplitude: 1.0 }
    }

    pub fn log_nu1() -> Self {
        ZFamily::LogNu1 { amplitude: 1.0 }
    }

    pub fn elliptic_half() -> Self {
        ZFamily::EllipticHalf { amplitude: 1.0 }
    }

    pub fn tag(&self) -> String {
        match self {
            ZFamily::PolynomialCos { k, .. } => format!("polynomial_cos(k={k})"),
            ZFamily::LogRadial { .. } => "log_radial".into(),
            ZFamily::LogNu1 { .. } => "log_nu1".into(),
            ZFamily::EllipticHalf { .. } => "elliptic_half".into(),
        }
    }

    fn amplitude(&self) -> f64 {
        match *self {
            ZFamily::PolynomialCos { amplitude, .. }
            | ZFamily::LogRadial { amplitude }
            | ZFamily::LogNu1 { amplitude }
            | ZFamily::EllipticHalf { amplitude } => amplitude,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let a = self.amplitude();
        if !a.is_finite() || a == 0.0 {
            return Err(Error::InvalidConfig(
                "amplitude must be finite and nonzero".into(),
            ));
        }
        if let ZFamily::PolynomialCos { k, psi0, .. } = *self {
            if k == 0 {
                return Err(Error::InvalidConfig("degree k must be at least 1".into()));
            }
            if k > MAX_DEGREE {
                return Err(Error::Overflow {
                    k,
                    limit: MAX_DEGREE,
                });
            }
            if !psi0.is_finite() {
                return Err(Error::InvalidConfig("psi0 must be finite".into()));
            }
        }
        Ok(())
    }

    /// Period in `ψ` of the metric, field and integral built from this family.
    pub fn psi_period(&self) -> f64 {
        match self {
            ZFamily::EllipticHalf { .. } => 2.0 * TAU,
            _ => TAU,
        }
    }

    /// Open `ρ`-interval on which `Z` is defined.
    pub fn rho_interval(&self) -> (f64, f64) {
        match self {
            ZFamily::LogNu1 { .. } => (0.0, f64::INFINITY),
            _ => (-1.0, f64::INFINITY),
        }
    }

    pub fn accepts(&self, rho: f64, psi: f64) -> bool {
        let (lo, hi) = self.rho_interval();
        rho > lo && rho < hi && psi.is_finite()
    }

    fn check(&self, rho: f64, psi: f64) -> Result<()> {
        if self.accepts(rho, psi) {
            Ok(())
        } else {
            Err(Error::Domain { q1: rho, q2: psi })
        }
    }

    /// Partials without a domain check; values outside the family's interval are NaN.
    pub fn jet<T: Scalar>(&self, rho: T, psi: T) -> ZJet<T> {
        let amp = self.amplitude();
        let ([r, r1, r2], [a, a1, a2]) = match *self {
            ZFamily::PolynomialCos { k, psi0, .. } => {
                let kf = k as f64;
                let th = (psi + psi0) * kf;
                let (c, s) = (th.cos(), th.sin());
                (poly_jet(k, rho), [c, -(s * kf), -(c * (kf * kf))])
            }
            ZFamily::LogRadial { .. } => {
                let inv = (rho + 1.0).recip();
                (
                    [(rho + 1.0).ln(), inv, -(inv * inv)],
                    [T::cst(1.0), T::cst(0.0), T::cst(0.0)],
                )
            }
            ZFamily::LogNu1 { .. } => {
                let l = (rho.recip() + 1.0).abs().ln();
                let q = rho + 1.0;
                let (c, s) = (psi.cos(), psi.sin());
                (
                    [rho * l - 1.0, l - q.recip(), -(rho * q * q).recip()],
                    [c, -s, -c],
                )
            }
            ZFamily::EllipticHalf { .. } => {
                let h = psi * 0.5;
                let (c, s) = (h.cos(), h.sin());
                (elliptic_radial(rho), [c, -(s * 0.5), -(c * 0.25)])
            }
        };
        ZJet {
            z: r * a * amp,
            zr: r1 * a * amp,
            zp: r * a1 * amp,
            zrr: r2 * a * amp,
            zrp: r1 * a1 * amp,
            zpp: r * a2 * amp,
        }
    }

    pub fn eval(&self, rho: f64, psi: f64) -> Result<ZJet<f64>> {
        self.check(rho, psi)?;
        Ok(self.jet(rho, psi))
    }
}

/// `ρ(ρ+1)Z_ρρ + ρZ_ρ + Z_ψψ`.
pub fn family_pde_residual(z: &ZFamily, rho: f64, psi: f64) -> Result<f64> {
    let j = z.eval(rho, psi)?;
    Ok(rho * (rho + 1.0) * j.zrr + rho * j.zr + j.zpp)
}

fn d_from_jet(j: &ZJet<f64>, rho: f64) -> f64 {
    let t = j.zp / rho - j.zrp;
    rho * (rho + 1.0) * j.zrr * j.zrr + t * t
}

/// `D = ρ(ρ+1)Z_ρρ² + (Z_ψ/ρ − Z_ρψ)²`.
pub fn condition_d(z: &ZFamily, rho: f64, psi: f64) -> Result<f64> {
    if rho == 0.0 {
        return Err(Error::Domain { q1: rho, q2: psi });
    }
    Ok(d_from_jet(&z.eval(rho, psi)?, rho))
}

/// Conformal coordinates `(x, y)` of the chart point `(ρ, ψ)`.
pub fn chart_to_xy(z: &ZFamily, rho: f64, psi: f64) -> Result<(f64, f64)> {
    if rho == 0.0 {
        return Err(Error::Domain { q1: rho, q2: psi });
    }
    let j = z.eval(rho, psi)?;
    let (s, c) = psi.sin_cos();
    Ok((-j.zr * c + j.zp / rho * s, j.zr * s + j.zp / rho * c))
}

fn bundle_metric<T: Scalar>(j: &ZJet<T>, rho: T, gamma: f64, c: f64) -> [T; 3] {
    let r2 = rho * rho;
    let r4 = r2 * r2;
    let pre = (rho + 1.0) * (gamma * gamma / c) / r4;
    let w = rho * j.zrp - j.zp;
    let zrr2 = j.zrr * j.zrr;
    let w2 = w * w;
    [
        pre * (r4 * zrr2 + w2),
        -(pre * r2 * j.zrr * w),
        pre * r2 * (r2 * (rho + 1.0).sq() * zrr2 + w2),
    ]
}

/// Coefficients of `F = (a₀p_ρ + a₁p_ψ + γD sin(ψ/2)) / (b₀p_ρ + b₁p_ψ + γD cos(ψ/2))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegralCoefficients {
    pub a0: f64,
    pub a1: f64,
    pub b0: f64,
    pub b1: f64,
    pub d: f64,
}

fn coefficients_from_jet(j: &ZJet<f64>, rho: f64, psi: f64) -> IntegralCoefficients {
    let (s, c) = (0.5 * psi).sin_cos();
    IntegralCoefficients {
        a0: rho * j.zrp * s + j.zpp * c + rho * j.zr * c - j.zp * s,
        b0: rho * j.zrp * c - j.zpp * s - rho * j.zr * s - j.zp * c,
        a1: -rho * j.zrr * s - j.zrp * c + j.zp / rho * c,
        b1: -rho * j.zrr * c + j.zrp * s - j.zp / rho * s,
        d: d_from_jet(j, rho),
    }
}

fn rational_parts(
    co: &IntegralCoefficients,
    gamma: f64,
    psi: f64,
    p_rho: f64,
    p_psi: f64,
) -> (f64, f64) {
    let (s, c) = (0.5 * psi).sin_cos();
    let num = co.a0 * p_rho + co.a1 * p_psi + gamma * co.d * s;
    let den = co.b0 * p_rho + co.b1 * p_psi + gamma * co.d * c;
    (num, den)
}

fn rational_value(
    co: &IntegralCoefficients,
    gamma: f64,
    psi: f64,
    p_rho: f64,
    p_psi: f64,
) -> Result<f64> {
    let (num, den) = rational_parts(co, gamma, psi, p_rho, p_psi);
    if !(den.abs() >= POLE_GUARD) {
        return Err(Error::NearPole { value: den.abs() });
    }
    Ok(num / den)
}

struct BundleMetric {
    family: ZFamily,
    gamma: f64,
    c: f64,
}

impl GenericMetric for BundleMetric {
    fn components<T: Scalar>(&self, q1: T, q2: T) -> [T; 3] {
        bundle_metric(&self.family.jet(q1, q2), q1, self.gamma, self.c)
    }
}

/// Serializable description of a bundle: family, constants and working box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleDescriptor {
    pub name: String,
    #[serde(flatten)]
    pub family: ZFamily,
    #[serde(default = "one")]
    pub gamma: f64,
    #[serde(default = "one", rename = "C")]
    pub c: f64,
    pub rho: [f64; 2],
    #[serde(default)]
    pub psi: Option<[f64; 2]>,
}

impl BundleDescriptor {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::InvalidConfig(format!("bundle descriptor: {e}")))
    }

    pub fn bbox(&self) -> BoundingBox {
        let psi = self.psi.unwrap_or([0.0, self.family.psi_period()]);
        BoundingBox::new((self.rho[0], self.rho[1]), (psi[0], psi[1]))
    }

    pub fn build(&self) -> Result<RationalFlowBundle> {
        let mut b = build_bundle(self.family, self.gamma, self.c, self.bbox())?;
        b.system.name = self.name.clone();
        b.name = self.name.clone();
        Ok(b)
    }
}

/// Metric, field and rational integral built from a family on a `(ρ, ψ)` box.
#[derive(Debug, Clone)]
pub struct RationalFlowBundle {
    pub name: String,
    pub family: ZFamily,
    pub gamma: f64,
    pub c: f64,
    pub bbox: BoundingBox,
    pub system: MagneticSystem,
    pub integral: FirstIntegral,
}

impl RationalFlowBundle {
    pub fn metric_at(&self, rho: f64, psi: f64) -> Result<SymMat2> {
        let j = self.family.eval(rho, psi)?;
        let [g11, g12, g22] = bundle_metric(&j, rho, self.gamma, self.c);
        Ok(SymMat2 { g11, g12, g22 })
    }

    pub fn omega_at(&self, rho: f64, psi: f64) -> Result<f64> {
        Ok(0.5 * self.gamma * self.family.eval(rho, psi)?.zrr)
    }

    pub fn coefficients_at(&self, rho: f64, psi: f64) -> Result<IntegralCoefficients> {
        if rho == 0.0 {
            return Err(Error::Domain { q1: rho, q2: psi });
        }
        Ok(coefficients_from_jet(
            &self.family.eval(rho, psi)?,
            rho,
            psi,
        ))
    }

    pub fn descriptor(&self) -> BundleDescriptor {
        BundleDescriptor {
            name: self.name.clone(),
            family: self.family,
            gamma: self.gamma,
            c: self.c,
            rho: [self.bbox.q1.0, self.bbox.q1.1],
            psi: Some([self.bbox.q2.0, self.bbox.q2.1]),
        }
    }
}

/// Value of the bundle's rational integral.
pub fn rational_integral_eval(
    bundle: &RationalFlowBundle,
    rho: f64,
    psi: f64,
    p_rho: f64,
    p_psi: f64,
) -> Result<f64> {
    let co = bundle.coefficients_at(rho, psi)?;
    rational_value(&co, bundle.gamma, psi, p_rho, p_psi)
}

/// Builds the system and its level-`C` rational integral on `bbox` (`q1 = ρ`, `q2 = ψ`).
///
/// The `ρ`-range must avoid `0` and `−1`. `D` is scanned on a 30×30 grid of the box and
/// any value below `1e-10` is reported as [`Error::DegenerateD`].
pub fn build_bundle(
    family: ZFamily,
    gamma: f64,
    c: f64,
    bbox: BoundingBox,
) -> Result<RationalFlowBundle> {
    family.validate()?;
    if !gamma.is_finite() || gamma == 0.0 {
        return Err(Error::InvalidConfig(
            "gamma must be finite and nonzero".into(),
        ));
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "energy constant must be positive, got {c}"
        )));
    }
    let (lo, hi) = bbox.q1;
    let (flo, fhi) = family.rho_interval();
    let branch_ok = (lo > 0.0 && hi > lo) || (lo > -1.0 && hi < 0.0 && hi > lo);
    if !branch_ok || lo <= flo || hi >= fhi || !(bbox.q2.1 > bbox.q2.0) {
        return Err(Error::Domain { q1: lo, q2: hi });
    }
    for q in bbox.grid(30, 30) {
        let d = condition_d(&family, q.q1, q.q2)?;
        if !(d.abs() >= D_MIN) {
            return Err(Error::DegenerateD {
                d,
                rho: q.q1,
                psi: q.q2,
            });
        }
    }
    let period = family.psi_period();
    let domain = ChartDomain::new(move |q: ChartPoint| {
        q.q1 > lo
            && q.q1 < hi
            && family.accepts(q.q1, q.q2)
            && d_from_jet(&family.jet(q.q1, q.q2), q.q1).abs() >= D_MIN
    })
    .with_bbox(bbox)
    .with_periods([None, Some(period)]);
    let metric = MetricTensorField::from_generic(BundleMetric { family, gamma, c });
    let field = MagneticField2Form::new(move |q| 0.5 * gamma * family.jet(q.q1, q.q2).zrr);
    let name = family.tag();
    let system = MagneticSystem::new(name.clone(), metric, field, domain, c)?;
    let integral =
        FirstIntegral::rational("F", LevelValidity::FixedLevel(c), move |ph: &PhasePoint| {
            let (rho, psi) = (ph.q.q1, ph.q.q2);
            if rho == 0.0 {
                return Err(Error::Domain { q1: rho, q2: psi });
            }
            let co = coefficients_from_jet(&family.eval(rho, psi)?, rho, psi);
            Ok(rational_parts(&co, gamma, psi, ph.p1, ph.p2))
        });
    Ok(RationalFlowBundle {
        name,
        family,
        gamma,
        c,
        bbox,
        system,
        integral,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiemannInvariantPair {
    pub r1: f64,
    pub r2: f64,
}

/// Principal branch `r₁ = ψ + 2 asin√(−ρ)`, `r₂ = ψ − 2 asin√(−ρ)` on `−1 < ρ < 0`.
pub fn riemann_invariants(rho: f64, psi: f64) -> Result<RiemannInvariantPair> {
    if !(rho * (rho + 1.0) < 0.0) || !psi.is_finite() {
        return Err(Error::Domain { q1: rho, q2: psi });
    }
    let s = (-rho).sqrt().asin();
    Ok(RiemannInvariantPair {
        r1: psi + 2.0 * s,
        r2: psi - 2.0 * s,
    })
}

/// `(ρ, ψ)` from the invariants.
pub fn from_riemann(r1: f64, r2: f64) -> (f64, f64) {
    let s = (0.25 * (r1 - r2)).sin();
    (-s * s, 0.5 * (r1 + r2))
}

/// Speeds with `(r_j)_y + λ_j (r_j)_x = 0`.
pub fn characteristic_speeds(r1: f64, r2: f64) -> Result<(f64, f64)> {
    let t1 = 0.25 * (3.0 * r1 + r2);
    let t2 = 0.25 * (r1 + 3.0 * r2);
    for t in [t1, t2] {
        let c = t.cos();
        if c.abs() < 1e-6 {
            return Err(Error::NearPole { value: c.abs() });
        }
    }
    Ok((t1.tan(), t2.tan()))
}

/// `ψ` of a conformal point for the family `ln(1+ρ)`, inverting the chart map
/// in closed form: `ρ = 1/√(x²+y²) − 1`, `cos ψ = −x/r`, `sin ψ = y/r`.
pub fn log_radial_inverse(x: f64, y: f64) -> Result<(f64, f64)> {
    let r = x.hypot(y);
    if r == 0.0 {
        return Err(Error::Domain { q1: x, q2: y });
    }
    Ok((1.0 / r - 1.0, y.atan2(-x)))
}
