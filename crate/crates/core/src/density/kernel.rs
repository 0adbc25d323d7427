//! The Binet kernel g and its meromorphic continuation.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::model::check_phi_positive;
use crate::special::h_kernel;

/// B_{2n} / (2n)! for n = 1..=10.
const BERNOULLI_OVER_FACT: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30_240.0,
    -1.0 / 1_209_600.0,
    1.0 / 47_900_160.0,
    -691.0 / 1_307_674_368_000.0,
    1.0 / 74_724_249_600.0,
    -3617.0 / 10_670_622_842_880_000.0,
    43867.0 / 5_109_094_217_170_944_000.0,
    -174_611.0 / 802_857_662_698_291_200_000.0,
];

/// f(w) = 1/(1 − e^{−w}) − 1/w − 1/2, an odd meromorphic function.
pub(crate) fn f_odd(w: Complex64) -> Complex64 {
    if w.norm() < 1.0 {
        let w2 = w * w;
        let mut p = w;
        let mut s = Complex64::new(0.0, 0.0);
        for c in BERNOULLI_OVER_FACT {
            s += p * c;
            p *= w2;
        }
        return s;
    }
    if w.re < 0.0 {
        return -f_odd(-w);
    }
    1.0 / (1.0 - (-w).exp()) - 1.0 / w - 0.5
}

/// g(t) = (6/t) h(i e^{−iφ} t) for t > 0 and sin φ / 2 at t = 0.
pub fn g_real(t: f64, phi: f64) -> Result<f64> {
    check_phi_positive(phi)?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(invalid("t", format!("must be finite and nonnegative, got {t}")));
    }
    if t == 0.0 {
        return Ok(0.5 * phi.sin());
    }
    if t < 1e-3 {
        // Re τ^{2n−1} = (−1)^{n−1} t^{2n−1} sin((2n−1)φ), series of h divided by t
        let t2 = t * t;
        let mut s = 0.0;
        let mut p = 1.0;
        for (n, c) in BERNOULLI_OVER_FACT.iter().take(4).enumerate() {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            s += sign * c * p * ((2 * n + 1) as f64 * phi).sin();
            p *= t2;
        }
        return Ok(6.0 * s);
    }
    let tau = Complex64::new(t * phi.sin(), t * phi.cos());
    Ok(6.0 / t * h_kernel(tau)?)
}

/// Meromorphic continuation g(z) = (3/z)(f(i e^{−iφ} z) + f(−i e^{iφ} z)).
/// Simple poles at q_j = 2πj e^{−iφ} and their conjugates.
pub fn g_complex(z: Complex64, phi: f64) -> Result<Complex64> {
    check_phi_positive(phi)?;
    let tau = Complex64::new(0.0, 1.0) * Complex64::from_polar(1.0, -phi) * z;
    let sigma = Complex64::new(0.0, -1.0) * Complex64::from_polar(1.0, phi) * z;
    for w in [tau, sigma] {
        let k = (w.im / (2.0 * PI)).round();
        if k != 0.0 {
            let d = (w - Complex64::new(0.0, 2.0 * PI * k)).norm();
            if d < 1e-8 {
                return Err(Error::PoleProximity {
                    point: z.to_string(),
                    pole: format!("|q_{}|", k.abs()),
                    distance: d,
                });
            }
        }
    }
    if z.norm() < 1e-3 {
        // (3/z) Σ c_n (τ^{2n−1} + σ^{2n−1}) with τ^{2n−1} + σ^{2n−1} = 2 (−1)^{n−1} z^{2n−1} sin((2n−1)φ)
        let z2 = z * z;
        let mut s = Complex64::new(0.0, 0.0);
        let mut p = Complex64::new(1.0, 0.0);
        for (n, c) in BERNOULLI_OVER_FACT.iter().take(4).enumerate() {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            s += p * (sign * c * ((2 * n + 1) as f64 * phi).sin());
            p *= z2;
        }
        return Ok(6.0 * s);
    }
    Ok(3.0 / z * (f_odd(tau) + f_odd(sigma)))
}

/// Upper bound for sup_{t ≥ 0} g(t).
///
/// For t ≥ π, g(t) ≤ (3/t) coth(t sin φ / 2); on [0, π] the kernel is sampled
/// and inflated by one percent.
pub fn g_sup_bound(phi: f64) -> Result<f64> {
    check_phi_positive(phi)?;
    let tail = 3.0 / PI / (0.5 * PI * phi.sin()).tanh();
    let mut m: f64 = 0.0;
    for i in 0..=1000 {
        m = m.max(g_real(PI * i as f64 / 1000.0, phi)?);
    }
    Ok(tail.max(1.01 * m))
}

/// sup_{t ≥ a} g(t) ≤ (3/a) coth(a sin φ / 2) for a > 0.
pub(crate) fn g_tail_bound(a: f64, phi: f64) -> f64 {
    3.0 / a / (0.5 * a * phi.sin()).tanh()
}
