use std::f64::consts::PI;

use num_complex::Complex64;
use oscidos::quad::GaussLegendre;
use oscidos::transforms::{
    complete_monotonicity_check, fourier_of_measure, stieltjes_invert, stieltjes_to_fourier, stieltjes_transform,
    InversionOptions, Measure,
};
use oscidos::Error;

fn tent() -> Measure {
    Measure::from_density(|x| x * (2.0 - x) + 0.25, (0..=40).map(|i| i as f64 * 0.05).collect()).unwrap()
}

/// Integral of the piecewise-linear interpolant of `m` against `f`.
fn integrate_interpolant(m: &Measure, f: impl Fn(f64) -> Complex64) -> Complex64 {
    let gl = GaussLegendre::new(24);
    m.nodes
        .windows(2)
        .zip(m.values.windows(2))
        .map(|(x, p)| {
            gl.integrate(x[0], x[1], |s| {
                let w = p[0] + (p[1] - p[0]) * (s - x[0]) / (x[1] - x[0]);
                f(s) * w
            })
        })
        .sum()
}

#[test]
fn stieltjes_of_density_matches_quadrature() {
    let m = tent();
    for z in [Complex64::new(0.7, 0.4), Complex64::new(-1.0, 0.05), Complex64::new(3.0, -0.2)] {
        let direct = integrate_interpolant(&m, |x| 1.0 / (x - z));
        let v = stieltjes_transform(&m, z).unwrap();
        assert!((v - direct).norm() < 1e-12 * direct.norm(), "z={z}");
        let w = stieltjes_transform(&m, z.conj()).unwrap();
        assert!((w - v.conj()).norm() < 1e-14 * v.norm());
    }
}

#[test]
fn stieltjes_of_uniform_is_logarithm() {
    let m = Measure::from_density(|_| 1.0, vec![0.0, 1.0]).unwrap();
    let z = Complex64::new(0.3, 0.2);
    let expect = (1.0 - z).ln() - (-z).ln();
    assert!((stieltjes_transform(&m, z).unwrap() - expect).norm() < 1e-15);
    assert!(matches!(stieltjes_transform(&m, Complex64::new(0.5, 0.0)), Err(Error::Domain { .. })));
}

#[test]
fn fourier_of_density_matches_quadrature() {
    let m = tent();
    for t in [0.0, 1.3, 25.0] {
        let direct = integrate_interpolant(&m, |x| Complex64::new(0.0, -t * x).exp());
        assert!((fourier_of_measure(&m, t) - direct).norm() < 1e-12);
    }
}

#[test]
fn laplace_of_uniform() {
    let m = Measure::from_density(|_| 1.0, vec![0.0, 0.5, 1.0]).unwrap();
    for rho in [1e-6f64, 0.7, 40.0] {
        let expect = -(-rho).exp_m1() / rho;
        assert!((m.laplace(rho) / expect - 1.0).abs() < 1e-14);
    }
}

#[test]
fn inversion_recovers_cauchy_distribution() {
    // S(z) = 1/(c − iΓ − z) for z in the upper half plane
    let (c, g) = (2.0, 0.3);
    let f = |z: Complex64| Ok(1.0 / (Complex64::new(c, -g) - z));
    let opts = InversionOptions {
        breaks: vec![c],
        ..Default::default()
    };
    for t in [1.0, 2.0, 2.6] {
        let r = stieltjes_invert(f, t, &opts).unwrap();
        let expect = (((t - c) / g).atan() - ((opts.lower - c) / g).atan()) / PI;
        assert!((r.value - expect).abs() < 1e-4, "t={t}: {} vs {expect}", r.value);
    }
}

#[test]
fn fourier_from_stieltjes_of_atom_and_line() {
    // the line has mass Γ/(π|x|) beyond |x|; a wide window keeps that below 1e−4
    let opts = InversionOptions {
        breaks: vec![1.0, 2.0],
        lower: -300.0,
        upper: 300.0,
        ..Default::default()
    };
    let atom = |z: Complex64| Ok(1.0 / (1.0 - z));
    let line = |z: Complex64| Ok(1.0 / (Complex64::new(2.0, -0.3) - z));
    for t in [0.5, 1.0, 3.0] {
        let a = stieltjes_to_fourier(atom, t, &opts).unwrap();
        assert!((a.value - Complex64::new(0.0, -t).exp()).norm() < 1e-3, "t={t}");
        let l = stieltjes_to_fourier(line, t, &opts).unwrap();
        let expect = Complex64::new(-0.3 * t, -2.0 * t).exp();
        assert!((l.value - expect).norm() < 1e-3, "t={t}: {} vs {expect}", l.value);
    }
}

#[test]
fn monotonicity_check_is_scale_invariant() {
    let grid: Vec<f64> = (1..=30).map(|i| 0.2 * i as f64).collect();
    let a = complete_monotonicity_check(|b| Ok(1.0 / b), &grid, 6, 1e-10).unwrap();
    let b = complete_monotonicity_check(|b| Ok(1e12 / b), &grid, 6, 1e-10).unwrap();
    assert!(a.passed && b.passed);
    for (x, y) in a.orders.iter().zip(&b.orders) {
        assert!((x.worst - y.worst).abs() < 1e-12);
    }
}

#[test]
fn monotonicity_check_finds_sign_change() {
    let grid: Vec<f64> = (1..=30).map(|i| 0.1 * i as f64).collect();
    let f = |b: f64| Ok((-b).exp() - 0.9 * (-2.0 * b).exp());
    let r = complete_monotonicity_check(f, &grid, 4, 1e-10).unwrap();
    assert!(!r.passed);
    assert_eq!(r.first_failure().unwrap().order, 1);
    assert!(matches!(
        complete_monotonicity_check(f, &grid, 10, 1e-17),
        Err(Error::RoundoffDominated { .. })
    ));
}
