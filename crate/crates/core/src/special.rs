//! Gauss hypergeometric series, polynomial coefficients of the terminating
//! case, and complete elliptic integrals with their parameter derivatives.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

const MAX_TERMS: usize = 500;
const MAX_POLY_K: usize = 60;

fn nonpositive_integer(x: f64) -> Option<usize> {
    (x <= 0.0 && x.fract() == 0.0).then(|| (-x) as usize)
}

/// Value of `₂F₁(a, b; c; z)` and the number of series terms summed.
///
/// A nonpositive integer `a` or `b` makes the series a polynomial, which is
/// summed exactly for any `z`. Otherwise `|z| < 1` is required.
pub fn hyp2f1_terms(a: f64, b: f64, c: f64, z: f64) -> Result<(f64, usize)> {
    if nonpositive_integer(c).is_some() {
        return Err(Error::PoleInC { c });
    }
    let degree = match (nonpositive_integer(a), nonpositive_integer(b)) {
        (Some(n), Some(m)) => Some(n.min(m)),
        (Some(n), None) | (None, Some(n)) => Some(n),
        (None, None) => None,
    };
    if degree.is_none() && z.abs() >= 1.0 {
        return Err(Error::SeriesDivergence { terms: 0 });
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut n = 0usize;
    loop {
        if let Some(d) = degree {
            if n == d {
                return Ok((sum, n + 1));
            }
        }
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * z;
        sum += term;
        n += 1;
        if degree.is_none() && term.abs() < 1e-16 * sum.abs() {
            return Ok((sum, n + 1));
        }
        if n + 1 >= MAX_TERMS {
            return Err(Error::SeriesDivergence { terms: MAX_TERMS });
        }
    }
}

pub fn hyp2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    hyp2f1_terms(a, b, c, z).map(|(v, _)| v)
}

fn pochhammer(x: f64, n: usize) -> f64 {
    (0..n).fold(1.0, |p, i| p * (x + i as f64))
}

/// `dⁿ/dzⁿ ₂F₁(a, b; c; z)`.
pub fn hyp2f1_deriv(a: f64, b: f64, c: f64, z: f64, n: usize) -> Result<f64> {
    let scale = pochhammer(a, n) * pochhammer(b, n) / pochhammer(c, n);
    if scale == 0.0 {
        return Ok(0.0);
    }
    let nf = n as f64;
    Ok(scale * hyp2f1(a + nf, b + nf, c + nf, z)?)
}

/// Coefficients `c_1..c_k` with `ρ·₂F₁(1−k, 1+k; 2; −ρ) = Σ c_j ρ^j`.
pub fn terminating_poly_coeffs(k: usize) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::InvalidConfig("k must be at least 1".into()));
    }
    if k > MAX_POLY_K {
        return Err(Error::Overflow {
            k,
            limit: MAX_POLY_K,
        });
    }
    let kf = k as f64;
    let mut out = Vec::with_capacity(k);
    let mut c = 1.0;
    out.push(c);
    for j in 1..k {
        let jf = j as f64;
        c *= (kf + jf) * (kf - jf) / (jf * (jf + 1.0));
        out.push(c);
    }
    Ok(out)
}

fn agm_sum(m: f64) -> (f64, f64) {
    // returns (AGM(1, √(1−m)), Σ 2^{n−1} c_n²)
    let mut a = 1.0f64;
    let mut b = (1.0 - m).sqrt();
    let mut sum = 0.5 * m;
    let mut pow = 0.5;
    for _ in 0..64 {
        if (a - b).abs() < 1e-15 * a {
            break;
        }
        let c = 0.5 * (a - b);
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
        pow *= 2.0;
        sum += pow * c * c;
    }
    (a, sum)
}

/// Complete elliptic integral of the first kind, parameter convention `K(m)`.
pub fn elliptic_k(m: f64) -> Result<f64> {
    if !(m < 1.0) {
        return Err(Error::Domain { q1: m, q2: 0.0 });
    }
    Ok(FRAC_PI_2 / agm_sum(m).0)
}

/// Complete elliptic integral of the second kind, `E(m)` for `m ≤ 1`.
pub fn elliptic_e(m: f64) -> Result<f64> {
    if m == 1.0 {
        return Ok(1.0);
    }
    if !(m < 1.0) {
        return Err(Error::Domain { q1: m, q2: 0.0 });
    }
    let (a, sum) = agm_sum(m);
    Ok(FRAC_PI_2 / a * (1.0 - sum))
}

/// `[K, K′, K″, K‴]` and `[E, E′, E″, E‴]` with respect to `m`, for `m < 1`.
pub fn elliptic_ke_derivs(m: f64) -> Result<([f64; 4], [f64; 4])> {
    let k = elliptic_k(m)?;
    let e = elliptic_e(m)?;
    if m.abs() < 0.25 {
        let mut kd = [k, 0.0, 0.0, 0.0];
        let mut ed = [e, 0.0, 0.0, 0.0];
        for n in 1..4 {
            kd[n] = FRAC_PI_2 * hyp2f1_deriv(0.5, 0.5, 1.0, m, n)?;
            ed[n] = FRAC_PI_2 * hyp2f1_deriv(-0.5, 0.5, 1.0, m, n)?;
        }
        return Ok((kd, ed));
    }
    let w = m * (1.0 - m);
    let k1 = (e - (1.0 - m) * k) / (2.0 * w);
    let e1 = (e - k) / (2.0 * m);
    let k2 = (0.25 * k - (1.0 - 2.0 * m) * k1) / w;
    let e2 = -((1.0 - m) * e1 + 0.25 * e) / w;
    let k3 = -(2.0 * (1.0 - 2.0 * m) * k2 - 2.25 * k1) / w;
    let e3 = -((2.0 - 3.0 * m) * e2 - 0.75 * e1) / w;
    Ok(([k, k1, k2, k3], [e, e1, e2, e3]))
}
