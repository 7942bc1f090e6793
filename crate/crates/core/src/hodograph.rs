//! Quadratic-integral construction in conformal coordinates: the reduced
//! algebraic system for `(f, g)`, field reconstruction, the closed-form
//! solution at `α = β = 0`, the quasi-linear residual check and the explicit
//! example in the `(X, Y) = (f, g)` chart.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    BoundingBox, ChartDomain, ChartPoint, GenericMetric, MagneticField2Form, MagneticSystem,
    MetricTensorField, PhasePoint,
};
use crate::integrals::{FirstIntegral, IntegralKind, LevelValidity};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HodographConstants {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub zeta: f64,
}

impl HodographConstants {
    pub fn new(
        alpha: f64,
        beta: f64,
        gamma: f64,
        delta: f64,
        epsilon: f64,
        zeta: f64,
    ) -> Result<Self> {
        let k = Self {
            alpha,
            beta,
            gamma,
            delta,
            epsilon,
            zeta,
        };
        k.validate()?;
        Ok(k)
    }

    /// `ζ` only, everything else zero.
    pub fn zeta_only(zeta: f64) -> Self {
        Self {
            alpha: 0.0,
            beta: 0.0,
            gamma: 0.0,
            delta: 0.0,
            epsilon: 0.0,
            zeta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.alpha,
            self.beta,
            self.gamma,
            self.delta,
            self.epsilon,
            self.zeta,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(
                "hodograph constants must be finite".into(),
            ));
        }
        if self.zeta == 0.0 {
            return Err(Error::InvalidConfig("zeta must be nonzero".into()));
        }
        Ok(())
    }

    pub fn with_alpha_beta(&self, alpha: f64, beta: f64) -> Self {
        Self {
            alpha,
            beta,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraticSolutionPoint {
    pub f: f64,
    pub g: f64,
    #[serde(rename = "Lambda")]
    pub lambda: f64,
    pub u0: f64,
}

/// Left-hand sides `(R1, R2)` of the two relations for `(f, g)`.
pub fn algebraic_residual(k: &HodographConstants, x: f64, y: f64, f: f64, g: f64) -> (f64, f64) {
    let HodographConstants {
        alpha: a,
        beta: b,
        gamma: c,
        delta: d,
        epsilon: e,
        zeta: z,
    } = *k;
    let z2 = z * z;
    let r1 = -z2 * f * g * g - 12.0 * b * z * f * g - z2 * f * f * f + 26.0 * a * z * f * f
        - 192.0 * a * a * f
        + 6.0 * a * z * g * g
        + 64.0 * a * b * g
        - 32.0 * a * e
        + c * z
        + 2.0 * z * y;
    let r2 = z2 * f * f * g - 12.0 * a * z * f * g
        + z2 * g * g * g
        + 26.0 * b * z * g * g
        + 192.0 * b * b * g
        + 6.0 * b * z * f * f
        - 64.0 * a * b * f
        + 32.0 * b * e
        + d * z
        + 2.0 * z * x;
    (r1, r2)
}

/// `∂(R1, R2)/∂(f, g)` as `[[∂R1/∂f, ∂R1/∂g], [∂R2/∂f, ∂R2/∂g]]`.
pub fn algebraic_jacobian(
    k: &HodographConstants,
    _x: f64,
    _y: f64,
    f: f64,
    g: f64,
) -> [[f64; 2]; 2] {
    let (a, b, z) = (k.alpha, k.beta, k.zeta);
    let z2 = z * z;
    [
        [
            -z2 * g * g - 12.0 * b * z * g - 3.0 * z2 * f * f + 52.0 * a * z * f - 192.0 * a * a,
            -2.0 * z2 * f * g - 12.0 * b * z * f + 12.0 * a * z * g + 64.0 * a * b,
        ],
        [
            2.0 * z2 * f * g - 12.0 * a * z * g + 12.0 * b * z * f - 64.0 * a * b,
            z2 * f * f - 12.0 * a * z * f + 3.0 * z2 * g * g + 52.0 * b * z * g + 192.0 * b * b,
        ],
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NewtonOutcome {
    pub f: f64,
    pub g: f64,
    pub iterations: usize,
    pub residual: f64,
    /// 2-norm condition number of the Jacobian at the solution.
    pub condition: f64,
}

fn cond2(j: &[[f64; 2]; 2]) -> f64 {
    let (a, b, c, d) = (j[0][0], j[0][1], j[1][0], j[1][1]);
    let fro2 = a * a + b * b + c * c + d * d;
    let det = (a * d - b * c).abs();
    if det == 0.0 {
        return f64::INFINITY;
    }
    let disc = (fro2 * fro2 - 4.0 * det * det).max(0.0).sqrt();
    ((fro2 + disc) / (fro2 - disc).max(f64::MIN_POSITIVE)).sqrt()
}

fn res_norm(r: (f64, f64)) -> f64 {
    r.0.abs().max(r.1.abs())
}

pub const NEWTON_TOL: f64 = 1e-12;
pub const NEWTON_MAX_ITER: usize = 50;
const MAX_HALVINGS: usize = 30;

fn newton_direction(
    k: &HodographConstants,
    x: f64,
    y: f64,
    f: f64,
    g: f64,
    r: (f64, f64),
) -> Result<(f64, f64)> {
    let j = algebraic_jacobian(k, x, y, f, g);
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let scale = j.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(det.abs() > 1e-14 * scale * scale) {
        return Err(Error::SingularJacobian { det });
    }
    let df = (j[1][1] * r.0 - j[0][1] * r.1) / det;
    let dg = (-j[1][0] * r.0 + j[0][0] * r.1) / det;
    Ok((df, dg))
}

/// Damped Newton iteration for `R1 = R2 = 0` at a fixed chart point.
///
/// After reaching `tol`, up to three further full steps are taken while they
/// keep lowering the residual.
pub fn newton_solve(
    k: &HodographConstants,
    x: f64,
    y: f64,
    guess: (f64, f64),
    tol: f64,
    max_iter: usize,
) -> Result<NewtonOutcome> {
    k.validate()?;
    let (mut f, mut g) = guess;
    let mut r = algebraic_residual(k, x, y, f, g);
    let mut norm = res_norm(r);
    let mut iterations = 0;
    while norm > tol {
        if iterations >= max_iter {
            return Err(Error::NoConvergence {
                iterations,
                residual: norm,
            });
        }
        iterations += 1;
        let (df, dg) = newton_direction(k, x, y, f, g, r)?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let (fn_, gn) = (f - t * df, g - t * dg);
            let rn = algebraic_residual(k, x, y, fn_, gn);
            if res_norm(rn) < norm {
                f = fn_;
                g = gn;
                r = rn;
                norm = res_norm(rn);
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            return Err(Error::NoConvergence {
                iterations,
                residual: norm,
            });
        }
    }
    for _ in 0..3 {
        let Ok((df, dg)) = newton_direction(k, x, y, f, g, r) else {
            break;
        };
        let rn = algebraic_residual(k, x, y, f - df, g - dg);
        if res_norm(rn) >= norm {
            break;
        }
        f -= df;
        g -= dg;
        r = rn;
        norm = res_norm(rn);
    }
    Ok(NewtonOutcome {
        f,
        g,
        iterations,
        residual: norm,
        condition: cond2(&algebraic_jacobian(k, x, y, f, g)),
    })
}

/// `Λ` and `u₀` from `(f, g)`.
pub fn reconstruct_fields(k: &HodographConstants, f: f64, g: f64) -> (f64, f64) {
    let z = k.zeta;
    let lambda = (-z * f * f - z * g * g + 16.0 * k.alpha * f - 16.0 * k.beta * g) / (2.0 * z);
    let u0 = 4.0 * (2.0 * k.alpha * f + 2.0 * k.beta * g + k.epsilon) / z;
    (lambda, u0)
}

/// Exact solution for `α = β = 0`, with the magnetic coefficient `Ω`.
pub fn closed_form_abzero(
    k: &HodographConstants,
    x: f64,
    y: f64,
) -> Result<(QuadraticSolutionPoint, f64)> {
    k.validate()?;
    if k.alpha != 0.0 || k.beta != 0.0 {
        return Err(Error::InvalidConfig(
            "closed form requires alpha = beta = 0".into(),
        ));
    }
    let a = 2.0 * y + k.gamma;
    let b = 2.0 * x + k.delta;
    if a == 0.0 && b == 0.0 {
        return Err(Error::SingularPoint(format!(
            "2x+delta = 2y+gamma = 0 at ({x}, {y})"
        )));
    }
    let w = (k.zeta * (a * a + b * b)).cbrt();
    let pt = QuadraticSolutionPoint {
        f: a / w,
        g: -b / w,
        lambda: -w / (2.0 * k.zeta),
        u0: 4.0 * k.epsilon / k.zeta,
    };
    Ok((pt, -2.0 / (3.0 * w)))
}

/// Marches `(α, β)` from zero to the target values in steps of at most `max_step`,
/// starting from the closed form and re-solving with the previous solution as guess.
pub fn continuation_solve(
    k: &HodographConstants,
    x: f64,
    y: f64,
    max_step: f64,
) -> Result<NewtonOutcome> {
    k.validate()?;
    if !(max_step > 0.0) {
        return Err(Error::InvalidConfig(
            "continuation step must be positive".into(),
        ));
    }
    let base = k.with_alpha_beta(0.0, 0.0);
    let (start, _) = closed_form_abzero(&base, x, y)?;
    let n = (k.alpha.abs().max(k.beta.abs()) / max_step).ceil().max(1.0) as usize;
    let mut guess = (start.f, start.g);
    let mut out = None;
    for i in 1..=n {
        let s = i as f64 / n as f64;
        let stage = k.with_alpha_beta(s * k.alpha, s * k.beta);
        let sol = newton_solve(&stage, x, y, guess, NEWTON_TOL, NEWTON_MAX_ITER)?;
        guess = (sol.f, sol.g);
        out = Some(sol);
    }
    Ok(out.expect("at least one continuation stage"))
}

/// Pointwise solver near `(x0, y0)`: Newton seeded from a continuation solve
/// at the reference point.
pub fn newton_sampler(
    k: HodographConstants,
    x0: f64,
    y0: f64,
) -> Result<impl Fn(f64, f64) -> Result<QuadraticSolutionPoint>> {
    let reference = continuation_solve(&k, x0, y0, 0.02)?;
    let guess = (reference.f, reference.g);
    Ok(move |x: f64, y: f64| {
        let sol = newton_solve(&k, x, y, guess, NEWTON_TOL, NEWTON_MAX_ITER)?;
        let (lambda, u0) = reconstruct_fields(&k, sol.f, sol.g);
        Ok(QuadraticSolutionPoint {
            f: sol.f,
            g: sol.g,
            lambda,
            u0,
        })
    })
}

fn u_vec(p: &QuadraticSolutionPoint) -> [f64; 4] {
    [p.lambda, p.u0, p.f, p.g]
}

/// `A(U)U_x + B(U)U_y` with `U = (Λ, u₀, f, g)` and central differences of step `h`.
pub fn hodograph_pde_residual_fd(
    sampler: impl Fn(f64, f64) -> Result<QuadraticSolutionPoint>,
    x: f64,
    y: f64,
    h: f64,
) -> Result<[f64; 4]> {
    let u = sampler(x, y)?;
    let (xp, xm) = (u_vec(&sampler(x + h, y)?), u_vec(&sampler(x - h, y)?));
    let (yp, ym) = (u_vec(&sampler(x, y + h)?), u_vec(&sampler(x, y - h)?));
    let ux: Vec<f64> = (0..4).map(|i| (xp[i] - xm[i]) / (2.0 * h)).collect();
    let uy: Vec<f64> = (0..4).map(|i| (yp[i] - ym[i]) / (2.0 * h)).collect();
    let (l, f, g) = (u.lambda, u.f, u.g);
    let a = [
        [0.0, 0.0, 1.0, 0.0],
        [f, 0.0, l, 0.0],
        [2.0, 1.0, 0.0, 0.5 * g],
        [0.0, 0.0, 0.0, -0.5 * f],
    ];
    let b = [
        [0.0, 0.0, 0.0, 1.0],
        [-g, 0.0, 0.0, -l],
        [0.0, 0.0, -0.5 * g, 0.0],
        [2.0, -1.0, 0.5 * f, 0.0],
    ];
    let mut out = [0.0; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i] += a[i][j] * ux[j] + b[i][j] * uy[j];
        }
    }
    Ok(out)
}

/// `¼(g_x − f_y)` by central differences.
pub fn magnetic_from_fg(
    sampler: impl Fn(f64, f64) -> Result<QuadraticSolutionPoint>,
    x: f64,
    y: f64,
    h: f64,
) -> Result<f64> {
    let gx = (sampler(x + h, y)?.g - sampler(x - h, y)?.g) / (2.0 * h);
    let fy = (sampler(x, y + h)?.f - sampler(x, y - h)?.f) / (2.0 * h);
    Ok(0.25 * (gx - fy))
}

/// Coefficients of the explicit quadratic-integral example in the `(X, Y)` chart
/// (`ζ = 2`, `γ = δ = ε = 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Example3Bundle<T> {
    pub g11: T,
    pub g12: T,
    pub g22: T,
    pub omega: T,
    pub a11: T,
    pub a12: T,
    pub a22: T,
    pub b1: T,
    pub b2: T,
    pub c: T,
    pub r: T,
    pub s: T,
}

pub fn example3_r<T: Scalar>(x: T, y: T, a: f64, b: f64) -> T {
    x * x - x * (8.0 * a) + y * y + y * (8.0 * b)
}

pub fn example3_s<T: Scalar>(x: T, y: T, a: f64, b: f64) -> T {
    let (x2, y2) = (x * x, y * y);
    x2 * x2 * 3.0 - x2 * x * (44.0 * a)
        + (y2 + a * a * 34.0 + y * (10.0 * b) + b * b * 18.0) * x2 * 6.0
        - x * (12.0 * a) * (y2 * 5.0 + 24.0 * a * a + y * (48.0 * b) + 88.0 * b * b)
        + (y * 3.0 + 8.0 * b)
            * (y2 * y + y2 * (12.0 * b) + 256.0 * a * a * b + y * (36.0 * (a * a + b * b)))
}

pub fn example3_metric<T: Scalar>(x: T, y: T, a: f64, b: f64) -> [T; 3] {
    let r = example3_r(x, y, a, b);
    let (x2, y2) = (x * x, y * y);
    let brace11 =
        x2 * x2 * 9.0 + x2 * y2 * 10.0 + y2 * y2 - x2 * x * (156.0 * a) - x * y2 * (76.0 * a)
            + x2 * (964.0 * a * a)
            + y2 * (132.0 * a * a)
            - x * (2496.0 * a * a * a)
            + 2304.0 * a.powi(4)
            + y * (y2 * 3.0 + (x * 5.0 - 24.0 * a) * (x * 3.0 - 8.0 * a)) * (4.0 * b)
            + (y2 * 9.0 + (x * 3.0 - 8.0 * a).sq()) * (4.0 * b * b);
    let m = x * y - y * (3.0 * a) + x * (3.0 * b) - 8.0 * a * b;
    let n = (x - 6.0 * a) * (x - 2.0 * a) + (y + 2.0 * b) * (y + 6.0 * b);
    let brace22 =
        x2 * x2 - x2 * x * (12.0 * a) - x * (4.0 * a) * (y * 3.0 + 8.0 * b) * (y * 5.0 + 24.0 * b)
            + x2 * (y2 * 5.0 + 18.0 * a * a + y * (38.0 * b) + 66.0 * b * b) * 2.0
            + (y * 3.0 + 8.0 * b).sq() * ((y + 6.0 * b).sq() + 4.0 * a * a);
    [
        -(r / 2.0) * brace11,
        -(r * 4.0) * m * n,
        -(r / 2.0) * brace22,
    ]
}

pub fn example3_omega<T: Scalar>(x: T, y: T, a: f64, b: f64) -> T {
    -((x - 2.0 * a) * (x - 6.0 * a) + (y + 2.0 * b) * (y + 6.0 * b))
}

pub fn example3_bundle(x: f64, y: f64, a: f64, b: f64) -> Example3Bundle<f64> {
    let [g11, g12, g22] = example3_metric(x, y, a, b);
    let r = example3_r(x, y, a, b);
    let s = example3_s(x, y, a, b);
    let m = x * y - 3.0 * y * a + 3.0 * x * b - 8.0 * a * b;
    let n = (3.0 * x - 8.0 * a) * (x - 6.0 * a) + y * (y + 6.0 * b);
    Example3Bundle {
        g11,
        g12,
        g22,
        omega: example3_omega(x, y, a, b),
        a11: 16.0 * m * m,
        a22: 4.0 * n * n,
        a12: -16.0 * m * n,
        b1: 2.0
            * s
            * (-16.0 * x * a * b + x * x * (y + 6.0 * b) - y * (y + 6.0 * b) * (3.0 * y + 8.0 * b)),
        b2: s * (-2.0 * (x - 6.0 * a) * (3.0 * x * x - y * y - 8.0 * x * a) - 32.0 * y * a * b),
        c: s * s * (x * x + y * y - 4.0 * x * a + 12.0 * y * b),
        r,
        s,
    }
}

struct Example3Metric {
    alpha: f64,
    beta: f64,
}

impl GenericMetric for Example3Metric {
    fn components<T: Scalar>(&self, q1: T, q2: T) -> [T; 3] {
        example3_metric(q1, q2, self.alpha, self.beta)
    }
}

/// Smallest accepted `|S|` on the working domain.
pub const EXAMPLE3_S_MIN: f64 = 1e-6;
/// `|S²|` below this makes the integral report a pole.
pub const DENOMINATOR_GUARD: f64 = 1e-8;

/// Packaged example in the `(X, Y)` chart on the level `H = ½` (`C = 1`).
/// The domain is `{R < 0, |S| > 1e-6}`, where the metric is positive-definite; `bbox`
/// is the sampling box.
pub fn example3_system(
    alpha: f64,
    beta: f64,
    bbox: BoundingBox,
) -> Result<(MagneticSystem, FirstIntegral)> {
    let domain = ChartDomain::new(move |q: ChartPoint| {
        example3_r(q.q1, q.q2, alpha, beta) < 0.0
            && example3_s(q.q1, q.q2, alpha, beta).abs() > EXAMPLE3_S_MIN
    })
    .with_bbox(bbox);
    let system = MagneticSystem::new(
        "ex3",
        MetricTensorField::from_generic(Example3Metric { alpha, beta }),
        MagneticField2Form::new(move |q| example3_omega(q.q1, q.q2, alpha, beta)),
        domain,
        1.0,
    )?;
    let integral = FirstIntegral::new(
        "F",
        IntegralKind::Quadratic,
        LevelValidity::FixedLevel(1.0),
        move |ph: &PhasePoint| {
            let e = example3_bundle(ph.q.q1, ph.q.q2, alpha, beta);
            let den = e.s * e.s;
            if den.abs() < DENOMINATOR_GUARD {
                return Err(Error::NearPole { value: den });
            }
            let (p1, p2) = (ph.p1, ph.p2);
            Ok(
                (e.a11 * p1 * p1 + e.a12 * p1 * p2 + e.a22 * p2 * p2 + e.b1 * p1 + e.b2 * p2 + e.c)
                    / den,
            )
        },
    );
    Ok((system, integral))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{phase_on_level, SymMat2};
    use crate::integrals::{level_set_bracket_scan, BracketScanConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn k2() -> HodographConstants {
        HodographConstants::zeta_only(2.0)
    }

    #[test]
    fn residual_examples() {
        assert_eq!(algebraic_residual(&k2(), 1.0, 0.0, 0.0, -1.0), (0.0, 0.0));
        assert_eq!(algebraic_residual(&k2(), 0.0, 1.0, 1.0, 0.0), (0.0, 0.0));
        let k = HodographConstants::new(0.3, -0.7, 0.0, 0.0, 1.9, 1.4).unwrap();
        let (r1, r2) = algebraic_residual(&k, 0.0, 0.0, 0.0, 0.0);
        assert!((r1 + 32.0 * 0.3 * 1.9).abs() < 1e-13);
        assert!((r2 - 32.0 * -0.7 * 1.9).abs() < 1e-13);
    }

    #[test]
    fn zeta_zero_rejected() {
        assert!(HodographConstants::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0).is_err());
        assert!(newton_solve(
            &HodographConstants::zeta_only(0.0),
            1.0,
            0.0,
            (0.0, 0.0),
            1e-12,
            10
        )
        .is_err());
    }

    #[test]
    fn jacobian_matches_fd() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let mut r = || rng.gen_range(-1.5..1.5);
            let k = HodographConstants::new(r(), r(), r(), r(), r(), r() + 2.0).unwrap();
            let (x, y, f, g) = (r(), r(), r(), r());
            let j = algebraic_jacobian(&k, x, y, f, g);
            let h = 1e-6;
            let dfp = algebraic_residual(&k, x, y, f + h, g);
            let dfm = algebraic_residual(&k, x, y, f - h, g);
            let dgp = algebraic_residual(&k, x, y, f, g + h);
            let dgm = algebraic_residual(&k, x, y, f, g - h);
            let fd = [
                [(dfp.0 - dfm.0) / (2.0 * h), (dgp.0 - dgm.0) / (2.0 * h)],
                [(dfp.1 - dfm.1) / (2.0 * h), (dgp.1 - dgm.1) / (2.0 * h)],
            ];
            let scale = j.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
            for i in 0..2 {
                for l in 0..2 {
                    worst = worst.max((fd[i][l] - j[i][l]).abs() / scale);
                }
            }
        }
        assert!(worst < 1e-6, "{worst}");
    }

    #[test]
    fn jacobian_at_origin_and_translation_invariance() {
        assert_eq!(
            algebraic_jacobian(&k2(), 0.0, 0.0, 0.0, 0.0),
            [[0.0, 0.0], [0.0, 0.0]]
        );
        let k = HodographConstants::new(0.2, 0.1, 0.5, -0.3, 0.4, 1.5).unwrap();
        assert_eq!(
            algebraic_jacobian(&k, 0.0, 0.0, 0.3, 0.7),
            algebraic_jacobian(&k, 5.0, -2.0, 0.3, 0.7)
        );
    }

    #[test]
    fn reconstruct_examples() {
        assert_eq!(reconstruct_fields(&k2(), 0.0, -1.0), (-0.5, 0.0));
        let k = HodographConstants::new(0.0, 0.0, 0.0, 0.0, 1.0, 2.0).unwrap();
        assert_eq!(reconstruct_fields(&k, 0.0, 0.0), (0.0, 2.0));
        assert_eq!(reconstruct_fields(&k, 0.7, -3.1).1, 2.0);
    }

    #[test]
    fn closed_form_reference_point() {
        let (p, om) = closed_form_abzero(&k2(), 1.0, 0.0).unwrap();
        assert!(p.f.abs() < 1e-15 && (p.g + 1.0).abs() < 1e-15);
        assert!((p.lambda + 0.5).abs() < 1e-15 && p.u0 == 0.0);
        assert!((om + 1.0 / 3.0).abs() < 1e-15);
        assert!(matches!(
            closed_form_abzero(&k2(), 0.0, 0.0),
            Err(Error::SingularPoint(_))
        ));
        assert!(closed_form_abzero(&k2().with_alpha_beta(0.1, 0.0), 1.0, 0.0).is_err());
    }

    #[test]
    fn closed_form_swap_symmetry() {
        let k = HodographConstants::new(0.0, 0.0, 0.4, -0.6, 0.0, -1.0).unwrap();
        let (u, v) = (0.8, -0.35);
        let (p, _) = closed_form_abzero(&k, u - k.delta / 2.0, v - k.gamma / 2.0).unwrap();
        let (q, _) = closed_form_abzero(&k, v - k.delta / 2.0, u - k.gamma / 2.0).unwrap();
        assert!((p.f + q.g).abs() < 1e-15 && (p.g + q.f).abs() < 1e-15);
    }

    #[test]
    fn closed_form_solves_relations_and_pde() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let zeta = [2.0, -2.0, 1.0, -1.0][rng.gen_range(0..4)];
            let k = HodographConstants::new(
                0.0,
                0.0,
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                zeta,
            )
            .unwrap();
            let (x, y) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let Ok((p, _)) = closed_form_abzero(&k, x, y) else {
                continue;
            };
            let r = algebraic_residual(&k, x, y, p.f, p.g);
            assert!(res_norm(r) < 1e-12, "{r:?}");
            let (l, u0) = reconstruct_fields(&k, p.f, p.g);
            assert!((l - p.lambda).abs() < 1e-12 * (1.0 + l.abs()) && (u0 - p.u0).abs() < 1e-14);
        }
        let sampler = |x, y| closed_form_abzero(&k2(), x, y).map(|r| r.0);
        let res = hodograph_pde_residual_fd(sampler, 1.0, 0.5, 1e-4).unwrap();
        assert!(res.iter().all(|v| v.abs() < 1e-7), "{res:?}");
    }

    #[test]
    fn pde_residual_is_second_order() {
        let sampler = |x, y| closed_form_abzero(&k2(), x, y).map(|r| r.0);
        let norms: Vec<f64> = [1e-3, 5e-4, 2.5e-4]
            .iter()
            .map(|h| {
                hodograph_pde_residual_fd(sampler, 1.0, 0.5, *h)
                    .unwrap()
                    .iter()
                    .fold(0.0f64, |m, v| m.max(v.abs()))
            })
            .collect();
        for w in norms.windows(2) {
            let ratio = w[0] / w[1];
            assert!((ratio - 4.0).abs() < 0.5, "{norms:?}");
        }
    }

    #[test]
    fn constant_sampler_has_zero_residual() {
        let c = |_x: f64, _y: f64| {
            Ok(QuadraticSolutionPoint {
                f: 0.0,
                g: 0.0,
                lambda: 3.0,
                u0: -1.0,
            })
        };
        assert_eq!(
            hodograph_pde_residual_fd(c, 0.2, 0.3, 1e-3).unwrap(),
            [0.0; 4]
        );
        assert_eq!(magnetic_from_fg(c, 0.2, 0.3, 1e-3).unwrap(), 0.0);
    }

    #[test]
    fn magnetic_coefficient_matches_explicit_form() {
        let sampler = |x, y| closed_form_abzero(&k2(), x, y).map(|r| r.0);
        let om = magnetic_from_fg(sampler, 1.0, 0.0, 1e-4).unwrap();
        assert!((om + 1.0 / 3.0).abs() < 1e-7);
        let k = HodographConstants::new(0.0, 0.0, 0.3, -0.2, 0.5, -1.0).unwrap();
        let s2 = |x, y| closed_form_abzero(&k, x, y).map(|r| r.0);
        let (_, explicit) = closed_form_abzero(&k, 0.4, 0.9).unwrap();
        assert!((magnetic_from_fg(s2, 0.4, 0.9, 1e-4).unwrap() - explicit).abs() < 1e-7);
    }

    #[test]
    fn newton_recovers_closed_form() {
        let sol = newton_solve(&k2(), 1.0, 0.0, (0.1, -0.9), NEWTON_TOL, NEWTON_MAX_ITER).unwrap();
        assert!(sol.f.abs() < 1e-10 && (sol.g + 1.0).abs() < 1e-10);
        let exact =
            newton_solve(&k2(), 1.0, 0.0, (0.0, -1.0), NEWTON_TOL, NEWTON_MAX_ITER).unwrap();
        assert!(exact.iterations <= 1);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let zeta = [2.0, -2.0, 1.0, -1.0][rng.gen_range(0..4)];
            let k = HodographConstants::zeta_only(zeta);
            let (x, y) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let (p, _) = closed_form_abzero(&k, x, y).unwrap();
            let ang: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let d = rng.gen_range(0.0..0.3);
            let guess = (p.f + d * ang.cos(), p.g + d * ang.sin());
            let sol = newton_solve(&k, x, y, guess, NEWTON_TOL, NEWTON_MAX_ITER).unwrap();
            assert!(
                (sol.f - p.f).abs() < 1e-10 && (sol.g - p.g).abs() < 1e-10,
                "({x},{y}) zeta={zeta}"
            );
        }
    }

    #[test]
    fn newton_failure_modes() {
        assert!(matches!(
            newton_solve(&k2(), 1.0, 0.0, (0.0, 0.0), NEWTON_TOL, NEWTON_MAX_ITER),
            Err(Error::SingularJacobian { .. })
        ));
        assert!(matches!(
            newton_solve(&k2(), 1.0, 0.0, (3.0, 2.0), NEWTON_TOL, 1),
            Err(Error::NoConvergence { .. })
        ));
    }

    #[test]
    fn continuation_reaches_nonzero_alpha_beta() {
        let k = k2().with_alpha_beta(0.1, 0.05);
        let sol = continuation_solve(&k, 1.0, 0.0, 0.02).unwrap();
        assert!(sol.residual <= 1e-12);
        let direct = newton_solve(&k, 1.0, 0.0, (0.0, -1.0), NEWTON_TOL, NEWTON_MAX_ITER).unwrap();
        assert!((direct.f - sol.f).abs() < 1e-10 && (direct.g - sol.g).abs() < 1e-10);
    }

    #[test]
    fn continued_solution_satisfies_pde_and_has_field() {
        let k = k2().with_alpha_beta(0.1, 0.05);
        let sampler = newton_sampler(k, 1.0, 0.0).unwrap();
        let norms: Vec<f64> = [1e-3, 5e-4, 2.5e-4]
            .iter()
            .map(|h| {
                hodograph_pde_residual_fd(&sampler, 1.0, 0.0, *h)
                    .unwrap()
                    .iter()
                    .fold(0.0f64, |m, v| m.max(v.abs()))
            })
            .collect();
        assert!(
            norms[0] / norms[1] > 3.0 && norms[1] / norms[2] > 3.0,
            "{norms:?}"
        );
        let fine = hodograph_pde_residual_fd(&sampler, 1.0, 0.0, 1e-4).unwrap();
        assert!(fine.iter().all(|v| v.abs() < 1e-7), "{fine:?}");
        let om1 = magnetic_from_fg(&sampler, 1.0, 0.0, 1e-3).unwrap();
        let om2 = magnetic_from_fg(&sampler, 1.0, 0.0, 5e-4).unwrap();
        assert!(om1.abs() > 1e-2 && (om1 - om2).abs() < 1e-6);
    }

    // The example's chart is the hodograph image: x(X, Y), y(X, Y) solve the
    // two relations with (f, g) = (X, Y), ζ = 2 and γ = δ = ε = 0.
    fn chart_map(x: f64, y: f64, a: f64, b: f64) -> [[f64; 2]; 2] {
        // rows: (x_X, x_Y), (y_X, y_Y)
        [
            [
                -2.0 * x * y + 6.0 * a * y - 6.0 * b * x + 16.0 * a * b,
                -x * x + 6.0 * a * x - 3.0 * y * y - 26.0 * b * y - 48.0 * b * b,
            ],
            [
                y * y + 6.0 * b * y + 3.0 * x * x - 26.0 * a * x + 48.0 * a * a,
                2.0 * x * y + 6.0 * b * x - 6.0 * a * y - 16.0 * a * b,
            ],
        ]
    }

    #[test]
    fn example3_structure_from_hodograph() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let (a, b) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let (x, y) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let e = example3_bundle(x, y, a, b);
            let j = chart_map(x, y, a, b);
            let k = HodographConstants::zeta_only(2.0).with_alpha_beta(a, b);
            // conformal factor from field reconstruction
            let (lambda, _) = reconstruct_fields(&k, x, y);
            assert!((lambda + e.r / 2.0).abs() < 1e-12 * (1.0 + e.r.abs()));
            let jtj = SymMat2 {
                g11: j[0][0] * j[0][0] + j[1][0] * j[1][0],
                g12: j[0][0] * j[0][1] + j[1][0] * j[1][1],
                g22: j[0][1] * j[0][1] + j[1][1] * j[1][1],
            };
            let scale = 1.0 + lambda.abs() * (jtj.g11.abs() + jtj.g22.abs());
            assert!((e.g11 - lambda * jtj.g11).abs() < 1e-11 * scale);
            assert!((e.g12 - lambda * jtj.g12).abs() < 1e-11 * scale);
            assert!((e.g22 - lambda * jtj.g22).abs() < 1e-11 * scale);
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            assert!((e.s - det).abs() < 1e-11 * (1.0 + det.abs()));
            // two-form: ¼ d(f dx + g dy) pulled back
            let om = 0.25 * (j[0][1] - j[1][0]);
            assert!((e.omega - om).abs() < 1e-12 * (1.0 + om.abs()));
        }
    }

    #[test]
    fn example3_abzero_specialization() {
        for (x, y) in [(0.3, -1.2), (2.0, 0.5)] {
            let e = example3_bundle(x, y, 0.0, 0.0);
            assert!((e.r - (x * x + y * y)).abs() < 1e-14);
            assert!((e.omega + (x * x + y * y)).abs() < 1e-14);
            assert!((e.s - 3.0 * (x * x + y * y).powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn example3_momentum_map_is_transpose_jacobian() {
        let (a, b) = (0.4, -0.3);
        let (x, y, p1, p2) = (0.7, 0.2, 0.9, -1.3);
        let j = chart_map(x, y, a, b);
        let big_p1 = -2.0 * p1 * (x * y - 3.0 * y * a + 3.0 * x * b - 8.0 * a * b)
            + p2 * ((3.0 * x - 8.0 * a) * (x - 6.0 * a) + y * (y + 6.0 * b));
        let big_p2 = -x * x * p1 - (3.0 * y + 8.0 * b) * (y * p1 + 2.0 * p2 * a + 6.0 * p1 * b)
            + 2.0 * x * (y * p2 + 3.0 * p1 * a + 3.0 * p2 * b);
        assert!((big_p1 - (j[0][0] * p1 + j[1][0] * p2)).abs() < 1e-12);
        assert!((big_p2 - (j[0][1] * p1 + j[1][1] * p2)).abs() < 1e-12);
    }

    const EX3_ALPHA: f64 = 1.0;
    const EX3_BETA: f64 = 0.0;

    #[test]
    fn example3_integral_on_level() {
        let bbox = BoundingBox::new((2.8, 4.6), (-0.6, 0.6));
        let (s, f) = example3_system(EX3_ALPHA, EX3_BETA, bbox).unwrap();
        assert_eq!(s.positive_definite_fraction(10), 1.0);
        assert_eq!(s.domain.sample_grid(10, 10).len(), 100);
        let cfg = BracketScanConfig {
            n1: 10,
            n2: 10,
            n_angles: 8,
            h: 1e-5,
        };
        let on = level_set_bracket_scan(&s, &f, 1.0, &cfg).unwrap();
        assert!(on.max <= 1e-6 && on.count > 0, "{on:?}");
        let off = level_set_bracket_scan(&s, &f, 2.0, &cfg).unwrap();
        assert!(off.max > 1e-3, "{off:?}");
        let ph = phase_on_level(&s, ChartPoint::new(3.0, 0.0), 0.4, 1.0).unwrap();
        assert!(f.eval(&ph).unwrap().is_finite());
    }
}
