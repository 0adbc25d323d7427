//! Partition functions: Z₀, the cutoff product, the closed Gamma form, the
//! Binet integral, the Göppert-Mayer variant and derived quantities.
//!
//! All routes work in log space; [`PartitionValue::value`] may underflow at
//! large ρ while `ln_value` stays accurate.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::density::kernel::{g_real, g_tail_bound};
use crate::error::{invalid, Error, Result};
use crate::exec::{compensated_sum, Execution};
use crate::model::{check_phi, check_rho, t_phi};
use crate::quad::{self, PrecisionPolicy};
use crate::special::{log_gamma, log_gamma_any};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    ClosedForm,
    Product,
    Binet,
    LaplaceOfMeasure,
}

/// How a value was truncated and how large the neglected part may be.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Truncation {
    Exact,
    Product {
        l_max: u64,
        /// Euler–Maclaurin estimate of Σ_{l > l_max} ln(1 + h_l)
        tail: f64,
        /// error estimate for `tail`
        tail_error: f64,
    },
    Quadrature {
        t_max: f64,
        error: f64,
        subdivisions: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionValue {
    pub value: f64,
    pub ln_value: f64,
    pub route: Route,
    pub truncation: Truncation,
}

impl PartitionValue {
    pub(crate) fn from_ln(ln_value: f64, route: Route, truncation: Truncation) -> Self {
        Self {
            value: ln_value.exp(),
            ln_value,
            route,
            truncation,
        }
    }
}

/// ln(2 sinh πρ)
fn ln_two_sinh_pi(rho: f64) -> f64 {
    PI * rho + (-(-2.0 * PI * rho).exp()).ln_1p()
}

/// ln Z₀ = −3 ln(2 sinh πρ)
pub fn ln_z0(rho: f64) -> Result<f64> {
    check_rho(rho)?;
    Ok(-3.0 * ln_two_sinh_pi(rho))
}

/// Z₀ = (2 sinh πρ)^{−3}, the uncoupled three-dimensional oscillator.
/// ρ already absorbs η, which is accepted for interface symmetry.
pub fn z0(rho: f64, eta: f64) -> Result<f64> {
    if !(eta > 0.0) {
        return Err(invalid("eta", "must be positive"));
    }
    Ok(ln_z0(rho)?.exp())
}

/// Σ_{l=1}^∞ ln(1 + a(l)) for a(x) = O(1/x) or faster, as an exact sum up to
/// `l_max` plus an Euler–Maclaurin tail.
///
/// `f` is x ↦ ln(1 + a(x)) and `df` its derivative. `scale` marks where
/// `f` changes its decay rate, used as a quadrature break point.
pub(crate) struct LogProduct {
    pub head: f64,
    pub tail: f64,
    pub tail_error: f64,
}

pub(crate) fn log_product<F, D>(
    f: F,
    df: D,
    l_max: u64,
    scale: f64,
    policy: &PrecisionPolicy,
    exec: Execution,
) -> Result<LogProduct>
where
    F: Fn(f64) -> f64 + Sync + Send,
    D: Fn(f64) -> f64,
{
    if l_max < 1 {
        return Err(invalid("l_max", "must be at least 1"));
    }
    let terms = exec.map(l_max as usize, |i| f((i + 1) as f64));
    let head = compensated_sum(terms);
    let l = l_max as f64;
    // ∫_L^∞ f(x) dx with x = L/s
    let mut breaks = vec![0.0];
    let s_scale = l / scale;
    if s_scale > 0.0 && s_scale < 1.0 {
        for m in [0.1, 0.3, 1.0, 3.0] {
            let b = s_scale * m;
            if b < 1.0 {
                breaks.push(b);
            }
        }
    }
    breaks.push(1.0);
    let integral = quad::integrate_with_breaks(
        |s: f64| if s == 0.0 { 0.0 } else { f(l / s) * l / (s * s) },
        &breaks,
        &PrecisionPolicy {
            abs_tol: policy.abs_tol * 0.1,
            ..*policy
        },
    )?;
    let fl = f(l);
    let dfl = df(l);
    let tail = integral.value - 0.5 * fl - dfl / 12.0;
    // next Euler–Maclaurin term is f'''/720; for f ~ x^{-p} with p ≤ 2,
    // |f'''| ≤ 12 |f'|/x², so |f'|/(30 L²) leaves a factor two of margin
    let tail_error = dfl.abs() / (30.0 * l * l) + integral.error;
    Ok(LogProduct {
        head,
        tail,
        tail_error,
    })
}

pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(invalid("gamma", format!("must be positive and finite, got {gamma}")));
    }
    Ok(())
}

/// Cutoff partition function Z(β; γ)
/// = [2πρ e^{−2ρ ln(1+γ) sin φ} Π_l (1 + ρ²/l² + (4/π)(ρ/l) sin φ arctan(γρ/l))]^{−3}.
pub fn z_cutoff(
    rho: f64,
    phi: f64,
    gamma: f64,
    l_max: u64,
    policy: &PrecisionPolicy,
) -> Result<PartitionValue> {
    z_cutoff_with(rho, phi, gamma, l_max, policy, Execution::default())
}

pub fn z_cutoff_with(
    rho: f64,
    phi: f64,
    gamma: f64,
    l_max: u64,
    policy: &PrecisionPolicy,
    exec: Execution,
) -> Result<PartitionValue> {
    check_rho(rho)?;
    check_phi(phi)?;
    check_gamma(gamma)?;
    policy.validate()?;
    let s = phi.sin();
    let c = 4.0 / PI * s * rho;
    let gr = gamma * rho;
    let a = move |x: f64| rho * rho / (x * x) + c * (gr / x).atan() / x;
    let da = move |x: f64| {
        -2.0 * rho * rho / (x * x * x) - c * ((gr / x).atan() / (x * x) + gr / (x * (x * x + gr * gr)))
    };
    let prod = log_product(
        move |x| a(x).ln_1p(),
        move |x| da(x) / (1.0 + a(x)),
        l_max,
        gr.max(rho),
        policy,
        exec,
    )?;
    check_tail(&prod, policy, "cutoff product")?;
    let ln_bracket = (2.0 * PI * rho).ln() - 2.0 * rho * gamma.ln_1p() * s + prod.head + prod.tail;
    Ok(PartitionValue::from_ln(
        -3.0 * ln_bracket,
        Route::Product,
        Truncation::Product {
            l_max,
            tail: prod.tail,
            tail_error: prod.tail_error,
        },
    ))
}

fn check_tail(prod: &LogProduct, policy: &PrecisionPolicy, context: &str) -> Result<()> {
    // Z carries the bracket to the power −3
    let bound = 3.0 * prod.tail_error;
    if bound > policy.rel_tol.max(policy.abs_tol) {
        return Err(Error::Truncation {
            bound,
            tolerance: policy.rel_tol,
            context: format!("{context}: increase l_max"),
        });
    }
    Ok(())
}

/// Göppert-Mayer variant
/// [2πρ Π_l (1 + ρ²/l² + (4/π) sin φ (γ − (l/ρ) arctan(γρ/l)))]^{−3}.
pub fn z_goeppert_mayer(
    rho: f64,
    phi: f64,
    gamma: f64,
    l_max: u64,
    policy: &PrecisionPolicy,
) -> Result<PartitionValue> {
    check_rho(rho)?;
    check_phi(phi)?;
    check_gamma(gamma)?;
    policy.validate()?;
    let c = 4.0 / PI * phi.sin();
    let gr = gamma * rho;
    // γ − (x/ρ) arctan(γρ/x) = (γ/u)(u − arctan u), u = γρ/x
    let a = move |x: f64| {
        let u = gr / x;
        rho * rho / (x * x) + c * gamma / u * u_minus_atan(u)
    };
    let da = move |x: f64| {
        -2.0 * rho * rho / (x * x * x) + c * (-(gr / x).atan() / rho + gamma * x / (x * x + gr * gr))
    };
    let prod = log_product(
        move |x| a(x).ln_1p(),
        move |x| da(x) / (1.0 + a(x)),
        l_max,
        gr.max(rho),
        policy,
        Execution::default(),
    )?;
    check_tail(&prod, policy, "Goeppert-Mayer product")?;
    let ln_bracket = (2.0 * PI * rho).ln() + prod.head + prod.tail;
    Ok(PartitionValue::from_ln(
        -3.0 * ln_bracket,
        Route::Product,
        Truncation::Product {
            l_max,
            tail: prod.tail,
            tail_error: prod.tail_error,
        },
    ))
}

/// u − arctan u without cancellation for small u.
fn u_minus_atan(u: f64) -> f64 {
    if u > 0.1 {
        return u - u.atan();
    }
    let u2 = u * u;
    let mut p = u * u2;
    let mut s = 0.0;
    for k in 1..12 {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        s += sign * p / (2 * k + 1) as f64;
        p *= u2;
    }
    s
}

/// ln of the closed form (ρ/2π)^3 e^{−6ρ ln ρ sin φ} |Γ(iρ e^{−iφ})|^6.
fn ln_z_full(rho: f64, phi: f64) -> Result<f64> {
    let w = Complex64::new(0.0, rho) * Complex64::from_polar(1.0, -phi);
    let lg = log_gamma(w)?;
    Ok(3.0 * ((rho / (2.0 * PI)).ln() - 2.0 * rho * rho.ln() * phi.sin() + 2.0 * lg.re))
}

/// Z(β) with the cutoff removed, via the complex Gamma function.
pub fn z_full(rho: f64, phi: f64) -> Result<PartitionValue> {
    check_rho(rho)?;
    check_phi(phi)?;
    Ok(PartitionValue::from_ln(
        ln_z_full(rho, phi)?,
        Route::ClosedForm,
        Truncation::Exact,
    ))
}

/// Quadrature record of ∫₀^∞ e^{−tρ} g(t) dt.
pub(crate) struct BinetIntegral {
    pub value: f64,
    pub t_max: f64,
    pub error: f64,
    pub subdivisions: usize,
}

pub(crate) fn binet_integral(rho: f64, phi: f64, policy: &PrecisionPolicy) -> Result<BinetIntegral> {
    let tail_tol = 0.1 * policy.abs_tol;
    let mut t_max = 1.0;
    while g_tail_bound(t_max, phi) * (-rho * t_max).exp() / rho > tail_tol {
        t_max *= 1.25;
    }
    let breaks = peak_breaks(phi, t_max);
    let q = quad::integrate_with_breaks(
        |t: f64| (-rho * t).exp() * g_real(t, phi).unwrap_or(0.0),
        &breaks,
        policy,
    )?;
    Ok(BinetIntegral {
        value: q.value,
        t_max,
        error: q.error + tail_tol,
        subdivisions: q.subdivisions,
    })
}

/// Break points on [0, t_max] that bracket the near-real poles at
/// t = 2πj cos φ with geometrically growing panels of width ~2πj sin φ.
pub(crate) fn peak_breaks(phi: f64, t_max: f64) -> Vec<f64> {
    let mut pts = vec![0.0, t_max];
    let (s, c) = phi.sin_cos();
    let mut j = 1.0;
    while 2.0 * PI * j * c - PI * c < t_max && c > 0.0 {
        let center = 2.0 * PI * j * c;
        let width = 2.0 * PI * j * s;
        pts.push(center);
        let mut m = 1.0;
        while m * width < PI * c {
            pts.push(center - m * width);
            pts.push(center + m * width);
            m *= 4.0;
        }
        j += 1.0;
    }
    pts.retain(|&x| (0.0..=t_max).contains(&x));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// ln Z(β) = ∫₀^∞ e^{−tρ} g(t) dt − t_φ ρ.
pub fn log_z_binet(rho: f64, phi: f64, policy: &PrecisionPolicy) -> Result<f64> {
    Ok(z_binet(rho, phi, policy)?.ln_value)
}

/// [`log_z_binet`] with its quadrature record.
pub fn z_binet(rho: f64, phi: f64, policy: &PrecisionPolicy) -> Result<PartitionValue> {
    check_rho(rho)?;
    if phi == 0.0 {
        return Err(Error::RealAxisPoles(
            "the Binet integrand has poles on the real axis at phi = 0".into(),
        ));
    }
    if !(phi > 0.0 && phi < FRAC_PI_2) {
        return Err(invalid("phi", format!("must satisfy 0 < phi < pi/2, got {phi}")));
    }
    policy.validate()?;
    let b = binet_integral(rho, phi, policy)?;
    Ok(PartitionValue::from_ln(
        b.value - t_phi(phi) * rho,
        Route::Binet,
        Truncation::Quadrature {
            t_max: b.t_max,
            error: b.error,
            subdivisions: b.subdivisions,
        },
    ))
}

/// 3π − t_φ = 6[π sin²(φ/2) − (sin φ − φ cos φ)], evaluated without cancellation.
fn three_pi_minus_t_phi(phi: f64) -> f64 {
    let h = (0.5 * phi).sin();
    let d = if phi < 0.5 {
        // sin φ − φ cos φ = Σ_{k≥1} (−1)^{k+1} 2k φ^{2k+1} / (2k+1)!
        let p2 = phi * phi;
        let mut p = phi;
        let mut fact = 1.0;
        let mut s = 0.0;
        for k in 1..12 {
            p *= p2;
            fact *= (2 * k) as f64 * (2 * k + 1) as f64;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            s += sign * 2.0 * k as f64 * p / fact;
        }
        s
    } else {
        phi.sin() - phi * phi.cos()
    };
    6.0 * (PI * h * h - d)
}

/// ln(Z/Z₀) via the Binet route, accurate also when the ratio is close to 1.
pub fn log_ratio_to_z0(rho: f64, phi: f64, policy: &PrecisionPolicy) -> Result<f64> {
    check_rho(rho)?;
    check_phi(phi)?;
    if phi == 0.0 {
        return Ok(0.0);
    }
    let b = binet_integral(rho, phi, policy)?;
    Ok(three_pi_minus_t_phi(phi) * rho + b.value + 3.0 * (-(-2.0 * PI * rho).exp()).ln_1p())
}

/// F_ex = −(1/β) ln(Z(β)/Z₀(β)) with β = 2πρ/η.
pub fn excess_free_energy(rho: f64, phi: f64, eta: f64) -> Result<f64> {
    if !(eta > 0.0) {
        return Err(invalid("eta", "must be positive"));
    }
    let policy = PrecisionPolicy {
        abs_tol: 1e-30,
        rel_tol: 1e-11,
        max_refinements: 20_000,
    };
    let beta = 2.0 * PI * rho / eta;
    let l = log_ratio_to_z0(rho, phi, &policy)?;
    Ok(if l == 0.0 { 0.0 } else { -l / beta })
}

/// Z(β + it)/Z(β) by continuing the Gamma form to complex ρ.
pub fn char_function(rho: f64, phi: f64, t: f64, eta: f64) -> Result<Complex64> {
    check_rho(rho)?;
    check_phi(phi)?;
    if !(eta > 0.0) || !t.is_finite() {
        return Err(invalid("t", "t must be finite and eta positive"));
    }
    let r = Complex64::new(rho, eta * t / (2.0 * PI));
    let ln_z = |r: Complex64| {
        let i = Complex64::new(0.0, 1.0);
        let w1 = i * r * Complex64::from_polar(1.0, -phi);
        let w2 = -i * r * Complex64::from_polar(1.0, phi);
        3.0 * ((r / (2.0 * PI)).ln() - 2.0 * r * r.ln() * phi.sin() + log_gamma_any(w1) + log_gamma_any(w2))
    };
    Ok((ln_z(r) - ln_z(Complex64::new(rho, 0.0))).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn policy() -> PrecisionPolicy {
        PrecisionPolicy::default()
    }

    #[test]
    fn z0_reference() {
        let v = z0(1.0, 1.0).unwrap();
        let oracle = (2.0 * PI.sinh()).powi(-3);
        assert!((v / oracle - 1.0).abs() < 1e-14);
        assert!((v - 8.115e-5).abs() < 1e-8);
        let lv = ln_z0(30.0).unwrap();
        assert!((lv + 3.0 * PI * 30.0).abs() < 1e-12);
    }

    #[test]
    fn full_collapses_at_zero_angle() {
        for rho in [0.5, 1.0, 2.0] {
            let a = z_full(rho, 0.0).unwrap().ln_value;
            assert!((a - ln_z0(rho).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn cutoff_collapses_at_zero_angle() {
        let v = z_cutoff(1.0, 0.0, 10.0, 200, &policy()).unwrap();
        assert!((v.ln_value - ln_z0(1.0).unwrap()).abs() < 1e-11);
    }

    #[test]
    fn binet_matches_gamma() {
        for phi in [0.05, 0.3, 1.2] {
            for rho in [0.2, 1.0, 3.0] {
                let a = log_z_binet(rho, phi, &policy()).unwrap();
                let b = z_full(rho, phi).unwrap().ln_value;
                assert!((a - b).abs() < 1e-10, "phi={phi} rho={rho}: {a} {b}");
            }
        }
    }

    #[test]
    fn cutoff_truncation_consistent() {
        let a = z_cutoff(1.0, 0.3, 100.0, 10_000, &policy()).unwrap();
        let b = z_cutoff(1.0, 0.3, 100.0, 100_000, &policy()).unwrap();
        let tol = |v: &PartitionValue| match v.truncation {
            Truncation::Product { tail_error, .. } => 3.0 * tail_error,
            _ => unreachable!(),
        };
        assert!((a.ln_value - b.ln_value).abs() <= tol(&a) + tol(&b) + 1e-13);
    }

    #[test]
    fn cutoff_flags_short_product() {
        let p = PrecisionPolicy::new(1e-15, 1e-15, 100).unwrap();
        assert!(matches!(
            z_cutoff(1.0, 0.3, 1e4, 2, &p),
            Err(Error::Truncation { .. })
        ));
    }

    #[test]
    fn goeppert_mayer_limits() {
        let v = z_goeppert_mayer(1.0, 0.0, 10.0, 1000, &policy()).unwrap();
        assert!((v.ln_value - ln_z0(1.0).unwrap()).abs() < 1e-11);
        let vals: Vec<f64> = [1.0, 10.0, 100.0]
            .iter()
            .map(|&g| z_goeppert_mayer(1.0, 0.1, g, 20_000, &policy()).unwrap().ln_value)
            .collect();
        assert!(vals[0] > vals[1] && vals[1] > vals[2]);
    }

    #[test]
    fn u_minus_atan_branches_agree() {
        let a = u_minus_atan(0.1);
        let b = 0.1 - 0.1f64.atan();
        assert!((a - b).abs() < 1e-16);
    }

    #[test]
    fn three_pi_minus_slope_series() {
        for phi in [0.1, 0.49] {
            let direct = 3.0 * PI - t_phi(phi);
            assert!((three_pi_minus_t_phi(phi) - direct).abs() < 1e-13);
        }
        let tiny = three_pi_minus_t_phi(1e-8);
        assert!((tiny / (1.5 * PI * 1e-16) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn excess_free_energy_signs() {
        assert_eq!(excess_free_energy(2.0, 0.0, 1.0).unwrap(), 0.0);
        for rho in [5.0, 10.0] {
            assert!(excess_free_energy(rho, 0.2, 1.0).unwrap() < 0.0);
        }
    }

    #[test]
    fn char_function_properties() {
        let z = char_function(1.0, 0.3, 0.0, 1.0).unwrap();
        assert!((z - 1.0).norm() < 1e-14);
        for t in [0.5, 3.0, 20.0, 100.0] {
            assert!(char_function(1.0, 0.3, t, 1.0).unwrap().norm() <= 1.0 + 1e-12);
        }
        // zero coupling: ratio of sinh factors
        let t = 1.3;
        let r = Complex64::new(1.0, t / (2.0 * PI));
        let sh = |r: Complex64| (PI * r).sinh();
        let expected = (sh(Complex64::new(1.0, 0.0)) / sh(r)).powi(3);
        let v = char_function(1.0, 0.0, t, 1.0).unwrap();
        assert!((v - expected).norm() < 1e-11);
    }
}
