use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::ToPrimitive;
use oscidos::density::{
    binomial_row, coefficient_table, density_complex, g_real, jump_g2, jump_g2_numeric, lorentz_lines,
    lorentz_profile, phi_of_omega, rho_density, DensityOptions,
};
use oscidos::model::{omega_ground, ModelParams};
use oscidos::quad::GaussLegendre;
use oscidos::{Execution, PrecisionPolicy};

/// Fixed term count; the truncation check is disabled.
fn opts(t_max: f64, dt: f64, n_terms: usize) -> DensityOptions {
    DensityOptions {
        t_max,
        dt,
        n_terms: Some(n_terms),
        tolerance: f64::INFINITY,
        exec: Execution::default(),
    }
}

#[test]
fn coefficients_match_generating_function() {
    // Σ_j c_{jn} x^j = (−3 ln(1−x))^n, and the alternating table carries (−1)^{n−1}
    let table = coefficient_table(40).unwrap();
    let x: f64 = 0.1;
    let l = -3.0 * (1.0 - x).ln();
    for n in 1..=5 {
        let series: f64 = (1..=40).map(|j| table.c(j, n).to_f64().unwrap() * x.powi(j as i32)).sum();
        let tilde: f64 = (1..=40).map(|j| table.c_tilde(j, n).to_f64().unwrap() * x.powi(j as i32)).sum();
        let expect = l.powi(n as i32);
        assert!((series / expect - 1.0).abs() < 1e-13, "n={n}");
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        assert!((tilde / (sign * expect) - 1.0).abs() < 1e-13, "n={n}");
    }
}

#[test]
fn row_sums_are_line_masses() {
    let table = coefficient_table(12).unwrap();
    let mut fact = 1.0;
    let mut sums = [0.0; 13];
    for n in 1..=12 {
        fact *= n as f64;
        for (j, s) in sums.iter_mut().enumerate().skip(1) {
            *s += table.c(j, n).to_f64().unwrap() / fact;
        }
    }
    for (j, s) in sums.iter().enumerate().skip(1) {
        assert!((s - ((j + 1) * (j + 2) / 2) as f64).abs() < 1e-9);
        assert_eq!(binomial_row(j), ((j + 1) * (j + 2) / 2) as u64);
    }
}

#[test]
fn first_term_is_the_kernel() {
    let m = rho_density(0.4, &opts(4.0 * PI, 2.0 * PI / 256.0, 1)).unwrap();
    for i in [0, 17, 300, 511] {
        assert!((m.density[i] - g_real(m.t(i), 0.4).unwrap()).abs() < 1e-14);
    }
}

#[test]
fn second_term_matches_direct_convolution() {
    let phi = 0.4;
    let m = rho_density(phi, &opts(4.0 * PI, 2.0 * PI / 1024.0, 2)).unwrap();
    let gl = GaussLegendre::new(24);
    for i in [512, 1024, 1800] {
        let t = m.t(i);
        let direct = 0.5
            * (0..8)
                .map(|k| {
                    let (a, b) = (t * k as f64 / 8.0, t * (k + 1) as f64 / 8.0);
                    gl.integrate(a, b, |u| g_real(u, phi).unwrap() * g_real(t - u, phi).unwrap())
                })
                .sum::<f64>();
        assert!((m.terms[1][i] - direct).abs() < 1e-7 * direct.abs().max(1.0), "t={t}");
    }
}

#[test]
fn complex_continuation_agrees_on_real_axis() {
    let phi = 0.5;
    let m = rho_density(phi, &opts(2.0 * PI, 2.0 * PI / 2048.0, 8)).unwrap();
    let p = PrecisionPolicy::default();
    for i in [400, 1024, 1700] {
        let z = density_complex(Complex64::new(m.t(i), 0.0), phi, 8, &p).unwrap();
        assert!(z.im.abs() < 1e-10);
        assert!((z.re - m.density[i]).abs() < 1e-6 * m.density[i].abs().max(1.0), "i={i}");
    }
}

#[test]
fn lorentz_lines_have_unit_mass_and_match_poles() {
    let params = ModelParams::reduced(0.2).unwrap();
    let lines = lorentz_lines(&params, 3).unwrap();
    for line in &lines {
        // ∫ over ω_j ± 40Γ equals (2/π) arctan 40
        let (c, g) = (line.center, line.half_width);
        let gl = GaussLegendre::new(32);
        let mass: f64 = (0..80)
            .map(|k| {
                let a = c - 40.0 * g + k as f64 * g;
                gl.integrate(a, a + g, |w| line.profile(w))
            })
            .sum();
        assert!((mass - 2.0 / PI * 40f64.atan()).abs() < 1e-12);
        let w = c + 0.3 * g;
        let mero = lorentz_profile(line.j, &params, Complex64::new(w, 0.0)).unwrap();
        assert!((mero.re - line.profile(w)).abs() < 1e-14 && mero.im.abs() < 1e-14);
    }
    assert_eq!(lines.iter().map(|l| l.mass).collect::<Vec<_>>(), vec![3, 6, 10]);
}

#[test]
fn frequency_density_keeps_mass() {
    let phi = 0.5;
    let m = rho_density(phi, &opts(6.0 * PI, 2.0 * PI / 512.0, 10)).unwrap();
    let f = phi_of_omega(&m);
    assert!((f.omega_ground - omega_ground(&ModelParams::reduced(phi).unwrap())).abs() < 1e-15);
    let in_t: f64 = m.density.iter().sum::<f64>() * m.dt;
    let dw = f.omega[1] - f.omega[0];
    let in_w: f64 = f.value.iter().sum::<f64>() * dw;
    assert!((in_t - in_w).abs() < 1e-10 * in_t);
}

#[test]
fn cut_jump_residue_formula_matches_contour_difference() {
    let phi = 0.6;
    let p = PrecisionPolicy::default();
    for s in [1.5, 2.5] {
        let z = 2.0 * PI * s * Complex64::from_polar(1.0, -phi);
        let exact = jump_g2(z, phi).unwrap();
        let numeric = jump_g2_numeric(z, phi, &p).unwrap();
        assert!((exact - numeric).norm() < 1e-6 * exact.norm(), "s={s}: {exact} vs {numeric}");
        let up = jump_g2(z.conj(), phi).unwrap();
        assert!((up - exact.conj()).norm() < 1e-14 * exact.norm());
    }
}
