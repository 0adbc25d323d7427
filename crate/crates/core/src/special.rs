//! Complex log-Gamma, the Binet integral and the positivity kernel `h`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::CompensatedSum;
pub use crate::quad::PrecisionPolicy;
use crate::quad;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// B_{2k} / (2k (2k-1)) for k = 1..=10.
const STIRLING: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
    43867.0 / 244_188.0,
    -174_611.0 / 125_400.0,
];

fn stirling(z: Complex64) -> Complex64 {
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut p = inv;
    for c in STIRLING {
        series += p * c;
        p *= inv2;
    }
    (z - 0.5) * z.ln() - z + LN_SQRT_2PI + series
}

/// ln Γ on Re z ≥ 0 by upward shifts and Stirling's series.
fn log_gamma_right(z: Complex64) -> Complex64 {
    let mut shift = Complex64::new(0.0, 0.0);
    let mut w = z;
    while w.norm() < 15.0 {
        shift += w.ln();
        w += 1.0;
    }
    stirling(w) - shift
}

/// Analytic log-Gamma on the closed right half-plane minus the origin.
///
/// This is the branch continuous from the positive real axis, so
/// `log_gamma(z + 1) - log_gamma(z) == ln z` holds with the principal `ln`.
pub fn log_gamma(z: Complex64) -> Result<Complex64> {
    if !(z.re >= 0.0) || z == Complex64::new(0.0, 0.0) {
        return Err(Error::Domain {
            func: "log_gamma",
            reason: format!("requires Re z >= 0 and z != 0, got {z}"),
        });
    }
    Ok(log_gamma_right(z))
}

/// A logarithm of Γ valid anywhere off the poles, determined modulo 2πi.
/// Only `exp` of the result is meaningful in the left half-plane.
pub(crate) fn log_gamma_any(z: Complex64) -> Complex64 {
    if z.re >= 0.0 {
        return log_gamma_right(z);
    }
    // Γ(z) Γ(1 - z) = π / sin(πz)
    Complex64::new(PI.ln(), 0.0) - ln_sin_pi(z) - log_gamma_right(1.0 - z)
}

/// ln sin(πz) modulo 2πi, without overflow for large |Im z|.
fn ln_sin_pi(z: Complex64) -> Complex64 {
    if z.im < 0.0 {
        return ln_sin_pi(z.conj()).conj();
    }
    // sin(πz) = (i/2) e^{-iπz} (1 - e^{2πiz})
    let i = Complex64::new(0.0, 1.0);
    let e = (2.0 * PI * i * z).exp();
    -i * PI * z + (1.0 - e).ln() + Complex64::new(0.5f64.ln(), PI / 2.0)
}

/// (1/(e^t - 1) - 1/t + 1/2) / t, bounded by 1/12.
fn binet_bracket(t: f64) -> f64 {
    if t < 0.1 {
        let t2 = t * t;
        // Σ B_{2n} t^{2n-2} / (2n)!
        1.0 / 12.0 - t2 / 720.0 + t2 * t2 / 30240.0 - t2 * t2 * t2 / 1_209_600.0
    } else {
        (1.0 / t.exp_m1() - 1.0 / t + 0.5) / t
    }
}

/// ln Γ(z) through Binet's first formula with adaptive quadrature.
pub fn binet_log_gamma(z: Complex64, policy: &PrecisionPolicy) -> Result<Complex64> {
    policy.validate()?;
    if !(z.re > 0.0) {
        return Err(Error::Domain {
            func: "binet_log_gamma",
            reason: format!("requires Re z > 0, got {z}"),
        });
    }
    let x = z.re;
    // tail bound (1/12) e^{-xT} / x
    let t_max = ((1.0 / (12.0 * policy.abs_tol * x)).ln().max(1.0)) / x;
    let mut breaks = vec![0.0];
    if z.im != 0.0 {
        // split at half periods of the oscillation
        let period = PI / z.im.abs();
        let mut s = period;
        while s < t_max && breaks.len() < 4000 {
            breaks.push(s);
            s += period;
        }
    }
    breaks.push(t_max);
    let inner = quad::integrate_with_breaks(
        |t: f64| (-z * t).exp() * binet_bracket(t),
        &breaks,
        policy,
    )?;
    Ok((z - 0.5) * z.ln() - z + LN_SQRT_2PI + inner.value)
}

fn series_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let mut s = CompensatedSum::new();
    for t in terms {
        s.add(t);
    }
    s.value()
}

/// u sinh u - 4 sinh²(u/2) = Σ_{k≥2} (2k-2) u^{2k} / (2k)!
fn a1(u: f64) -> f64 {
    if u > 1.0 {
        return u * u.sinh() - 4.0 * (0.5 * u).sinh().powi(2);
    }
    let u2 = u * u;
    let mut p = u2;
    let mut fact = 2.0;
    series_sum((2..20).map(|k| {
        let k = k as f64;
        p *= u2;
        fact *= (2.0 * k - 1.0) * (2.0 * k);
        (2.0 * k - 2.0) * p / fact
    }))
}

/// sinh(u)/u - 1
fn sinhc_m1(u: f64) -> f64 {
    if u > 1.0 {
        return u.sinh() / u - 1.0;
    }
    let u2 = u * u;
    let mut p = 1.0;
    let mut fact = 1.0;
    series_sum((1..20).map(|k| {
        let k = k as f64;
        p *= u2;
        fact *= 2.0 * k * (2.0 * k + 1.0);
        p / fact
    }))
}

/// v - 2 sin(v/2)
fn v_minus_chord(v: f64) -> f64 {
    if v.abs() > 1.0 {
        return v - 2.0 * (0.5 * v).sin();
    }
    let h = 0.5 * v;
    let h2 = h * h;
    let mut p = h;
    let mut fact = 1.0;
    -2.0 * series_sum((1..20).map(|k| {
        let k = k as f64;
        p *= -h2;
        fact *= 2.0 * k * (2.0 * k + 1.0);
        p / fact
    }))
}

/// h(w) = Re(1/(1 - e^{-w}) - 1/w - 1/2) for Re w ≥ 0.
///
/// Nonnegative, and zero exactly on the imaginary axis. Small arguments are
/// evaluated as a sum of separately nonnegative pieces so the result keeps
/// full relative accuracy as Re w → 0.
pub fn h_kernel(w: Complex64) -> Result<f64> {
    let (u, v) = (w.re, w.im.abs());
    if !(u >= 0.0) || !v.is_finite() {
        return Err(Error::Domain {
            func: "h_kernel",
            reason: format!("requires Re w >= 0, got {w}"),
        });
    }
    let k = (v / (2.0 * PI)).round();
    let pole_dist = Complex64::new(u, v - 2.0 * PI * k).norm();
    if w == Complex64::new(0.0, 0.0) || (k != 0.0 && pole_dist < 1e-300) {
        return Err(Error::PoleProximity {
            point: w.to_string(),
            pole: Complex64::new(0.0, 2.0 * PI * k).to_string(),
            distance: pole_dist,
        });
    }
    if u <= 1.0 {
        let sh = (0.5 * u).sinh();
        let sn = (0.5 * v).sin();
        let denom = 2.0 * sh * sh + 2.0 * sn * sn; // cosh u - cos v
        let chord = v_minus_chord(v);
        let bracket = a1(u) + v * v * sinhc_m1(u) + chord * (v + 2.0 * (0.5 * v).sin());
        let r2 = u * u + v * v;
        Ok((u * bracket / (2.0 * r2 * denom)).max(0.0))
    } else {
        let e1 = (-u).exp();
        let e2 = e1 * e1;
        let first = (1.0 - e2) / (2.0 * (1.0 + e2 - 2.0 * e1 * v.cos()));
        Ok((first - u / (u * u + v * v)).max(0.0))
    }
}

/// (2/π) Σ_{l=1}^{L} arctan(s/l)/l - ln s, which tends to the
/// Euler–Mascheroni constant as L → ∞ and then s → ∞.
pub fn euler_mascheroni_partial(s: f64, l_max: u64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(crate::error::invalid("s", "must be positive"));
    }
    if l_max < 1 {
        return Err(crate::error::invalid("L", "must be at least 1"));
    }
    let mut acc = CompensatedSum::new();
    // smallest terms first
    for l in (1..=l_max).rev() {
        let l = l as f64;
        acc.add((s / l).atan() / l);
    }
    Ok(2.0 / PI * acc.value() - s.ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn log_gamma_small_values() {
        assert!(log_gamma(c(1.0, 0.0)).unwrap().norm() < 1e-15);
        let half = log_gamma(c(0.5, 0.0)).unwrap();
        assert!((half.re - PI.sqrt().ln()).abs() < 1e-14);
        assert!(half.im.abs() < 1e-15);
        let five = log_gamma(c(5.0, 0.0)).unwrap();
        assert!((five.re - 24f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn log_gamma_on_imaginary_axis_matches_reflection() {
        // |Γ(i)|² = π / sinh π
        let lg = log_gamma(c(0.0, 1.0)).unwrap();
        let expected = (PI / PI.sinh()).ln();
        assert!((2.0 * lg.re - expected).abs() < 1e-13);
    }

    #[test]
    fn log_gamma_rejects_left_half_plane() {
        assert!(log_gamma(c(-0.1, 1.0)).is_err());
        assert!(log_gamma(c(0.0, 0.0)).is_err());
    }

    #[test]
    fn continuation_agrees_with_reflection_formula() {
        let z = c(-2.3, 0.7);
        let lhs = (log_gamma_any(z) + log_gamma_any(1.0 - z)).exp();
        let rhs = PI / (PI * z).sin();
        assert!((lhs - rhs).norm() < 1e-12 * rhs.norm());
        let z = c(-0.4, 30.0);
        let lhs = (log_gamma_any(z) - log_gamma_any(z + 1.0)).exp();
        assert!((lhs - 1.0 / z).norm() < 1e-12 / z.norm());
    }

    #[test]
    fn binet_matches_stirling_route() {
        let p = PrecisionPolicy::default();
        for z in [c(2.0, 0.0), c(5.0, 0.0), c(1.0, 1.0), c(0.3, -4.0), c(7.0, 12.0)] {
            let a = binet_log_gamma(z, &p).unwrap();
            let b = log_gamma(z).unwrap();
            assert!((a - b).norm() < 1e-10, "z={z}: {a} vs {b}");
        }
    }

    #[test]
    fn h_kernel_reference_values() {
        let v = h_kernel(c(1.0, 0.0)).unwrap();
        let direct = 1.0 / (1.0 - (-1f64).exp()) - 1.5;
        assert!((v - direct).abs() < 1e-15);
        assert_eq!(h_kernel(c(0.0, 3.0)).unwrap(), 0.0);
        assert!(h_kernel(c(0.0, 2.0 * PI)).is_err());
        assert!(h_kernel(c(-1.0, 0.0)).is_err());
    }

    #[test]
    fn h_kernel_small_real_part_keeps_relative_accuracy() {
        // Re w → 0: h ≈ Re(w) * ∂_u h(iv) with the derivative available in closed
        // form, 1/(4 sin²(v/2)) - 1/v²
        let v: f64 = 1.7;
        let u = 1e-9;
        let d = 1.0 / (4.0 * (0.5 * v).sin().powi(2)) - 1.0 / (v * v);
        let h = h_kernel(c(u, v)).unwrap();
        assert!((h / (u * d) - 1.0).abs() < 1e-7);
    }

    #[test]
    fn h_kernel_regimes_join_continuously() {
        for v in [0.0, 0.3, 2.0, 9.0] {
            let below = h_kernel(c(1.0, v)).unwrap();
            let above = h_kernel(c(1.0 + 1e-12, v)).unwrap();
            assert!((below - above).abs() < 1e-11, "v={v}");
        }
    }

    #[test]
    fn euler_mascheroni_small_case() {
        let v = euler_mascheroni_partial(1.0, 1).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
    }
}
