use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use oscidos::model::{omega_ground, phi_from_alpha, resonance_geometry, t_phi, ModelParams};
use oscidos::special::{binet_log_gamma, euler_mascheroni_partial, h_kernel, log_gamma};
use oscidos::PrecisionPolicy;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// ln Γ(x) for real x > 0 by the recurrence up to x ≥ 20 and a 6-term
/// Stirling series.
fn ln_gamma_real(mut x: f64) -> f64 {
    let mut shift = 0.0;
    while x < 20.0 {
        shift -= x.ln();
        x += 1.0;
    }
    let x2 = x * x;
    let series = 1.0 / (12.0 * x) - 1.0 / (360.0 * x * x2) + 1.0 / (1260.0 * x * x2 * x2)
        - 1.0 / (1680.0 * x * x2 * x2 * x2);
    shift + (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + series
}

#[test]
fn log_gamma_on_the_real_axis() {
    for x in [0.1, 0.5, 1.0, 3.7, 25.0] {
        let v = log_gamma(Complex64::new(x, 0.0)).unwrap();
        assert!((v.re - ln_gamma_real(x)).abs() < 1e-12 && v.im == 0.0, "x={x}");
    }
}

#[test]
fn log_gamma_modulus_on_critical_lines() {
    // |Γ(iy)|² = π/(y sinh πy), |Γ(1/2 + iy)|² = π/cosh πy
    for y in [0.3, 2.0, 9.0] {
        let a = log_gamma(Complex64::new(0.0, y)).unwrap().re;
        assert!((2.0 * a - (PI / (y * (PI * y).sinh())).ln()).abs() < 1e-12);
        let b = log_gamma(Complex64::new(0.5, y)).unwrap().re;
        assert!((2.0 * b - (PI / (PI * y).cosh()).ln()).abs() < 1e-12);
    }
}

#[test]
fn log_gamma_branch_is_continuous() {
    let p = PrecisionPolicy::default();
    for z in [Complex64::new(0.2, 30.0), Complex64::new(1.0, -4.0), Complex64::new(6.0, 0.5)] {
        let a = log_gamma(z).unwrap();
        assert!((log_gamma(z + 1.0).unwrap() - a - z.ln()).norm() < 1e-12);
        assert!((binet_log_gamma(z, &p).unwrap() - a).norm() < 1e-10);
        assert!((log_gamma(z.conj()).unwrap() - a.conj()).norm() < 1e-13);
    }
    assert!(log_gamma(Complex64::new(-0.5, 1.0)).is_err());
}

#[test]
fn h_kernel_values() {
    // h(u) = coth(u/2)/2 − 1/u on the real axis (u/12 − u³/720 near 0), 0 on the imaginary axis
    for u in [1e-6f64, 0.3, 1.0, 5.0] {
        let expect = if u < 1e-3 { u / 12.0 - u.powi(3) / 720.0 } else { 0.5 / (0.5 * u).tanh() - 1.0 / u };
        assert!((h_kernel(Complex64::new(u, 0.0)).unwrap() / expect - 1.0).abs() < 1e-9);
    }
    assert_eq!(h_kernel(Complex64::new(0.0, 1.7)).unwrap(), 0.0);
    assert!(h_kernel(Complex64::new(0.0, 2.0 * PI)).is_err());
}

#[test]
fn euler_mascheroni_limit() {
    let v = euler_mascheroni_partial(200.0, 2_000_000).unwrap();
    assert!((v - EULER_GAMMA).abs() < 5e-3);
    let w = euler_mascheroni_partial(2000.0, 20_000_000).unwrap();
    assert!((w - EULER_GAMMA).abs() < (v - EULER_GAMMA).abs());
}

#[test]
fn ground_state_and_lines() {
    assert!((t_phi(0.0) - 3.0 * PI).abs() < 1e-14);
    assert!((t_phi(FRAC_PI_2 - 1e-12) - 6.0).abs() < 1e-10);
    let params = ModelParams::new(0.4, 2.0, oscidos::model::Cutoff::Removed).unwrap();
    assert!((omega_ground(&params) - t_phi(0.4) * 2.0 / (2.0 * PI)).abs() < 1e-14);
    let geo = resonance_geometry(&params, 3).unwrap();
    for (j, p) in geo.physical_poles.iter().enumerate() {
        let j = (j + 1) as f64;
        assert!((p.re - geo.centers[j as usize - 1]).abs() < 1e-14);
        assert!((-2.0 * p.im - geo.widths[j as usize - 1]).abs() < 1e-14);
        assert!((geo.reduced_poles[j as usize - 1].norm() - 2.0 * PI * j).abs() < 1e-12);
    }
    let phi = phi_from_alpha(1.0 / 137.0, 1.0, 1.0).unwrap();
    assert!((phi.sin() - 1.0 / 411.0).abs() < 1e-16);
    assert!(phi_from_alpha(10.0, 1.0, 1.0).is_err());
}
