//! Model parameters and the derived resonance geometry.
//!
//! Units: ħ = k = c = 1. Frequencies are given in absolute terms together
//! with the oscillator frequency `eta`; the reduced variables `t` and `ρ`
//! are dimensionless.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Dimensionless ultraviolet cutoff γ = cC/η.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Cutoff {
    Finite(f64),
    Removed,
}

impl Cutoff {
    pub fn finite(self) -> Option<f64> {
        match self {
            Cutoff::Finite(g) => Some(g),
            Cutoff::Removed => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// coupling angle φ in radians, 0 ≤ φ < π/2
    pub phi: f64,
    /// oscillator frequency η > 0
    pub eta: f64,
    pub gamma_uv: Cutoff,
}

impl ModelParams {
    pub fn new(phi: f64, eta: f64, gamma_uv: Cutoff) -> Result<Self> {
        let p = Self { phi, eta, gamma_uv };
        p.validate()?;
        Ok(p)
    }

    /// η = 1, cutoff removed.
    pub fn reduced(phi: f64) -> Result<Self> {
        Self::new(phi, 1.0, Cutoff::Removed)
    }

    pub fn validate(&self) -> Result<()> {
        check_phi(self.phi)?;
        if !(self.eta > 0.0) || !self.eta.is_finite() {
            return Err(invalid("eta", format!("must be positive and finite, got {}", self.eta)));
        }
        if let Cutoff::Finite(g) = self.gamma_uv {
            if !(g > 0.0) || !g.is_finite() {
                return Err(invalid("gamma", format!("must be positive and finite, got {g}")));
            }
        }
        Ok(())
    }
}

pub(crate) fn check_phi(phi: f64) -> Result<()> {
    if !(0.0..FRAC_PI_2).contains(&phi) {
        return Err(invalid("phi", format!("must satisfy 0 <= phi < pi/2, got {phi}")));
    }
    Ok(())
}

/// φ restricted to (0, π/2], the range of the density routines.
pub(crate) fn check_phi_positive(phi: f64) -> Result<()> {
    if phi == 0.0 {
        return Err(Error::RealAxisPoles(
            "phi = 0 puts the poles of g on the positive real axis".into(),
        ));
    }
    if !(phi > 0.0 && phi <= FRAC_PI_2) {
        return Err(invalid("phi", format!("must satisfy 0 < phi <= pi/2, got {phi}")));
    }
    Ok(())
}

pub(crate) fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(invalid("rho", format!("must be positive and finite, got {rho}")));
    }
    Ok(())
}

/// ρ = ηβ/(2π).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedTemperature {
    pub rho: f64,
}

impl ReducedTemperature {
    pub fn new(rho: f64) -> Result<Self> {
        check_rho(rho)?;
        Ok(Self { rho })
    }

    pub fn from_beta(beta: f64, eta: f64) -> Result<Self> {
        Self::new(eta * beta / (2.0 * PI))
    }

    pub fn beta(&self, eta: f64) -> f64 {
        2.0 * PI * self.rho / eta
    }
}

/// sin φ + (π/2 − φ) cos φ
fn ground_factor(phi: f64) -> f64 {
    phi.sin() + (FRAC_PI_2 - phi) * phi.cos()
}

/// t_φ = 6 (sin φ + (π/2 − φ) cos φ)
pub fn t_phi(phi: f64) -> f64 {
    6.0 * ground_factor(phi)
}

/// ω_φ = (3/π)(sin φ + (π/2 − φ) cos φ) η, the location of the atom.
pub fn omega_ground(params: &ModelParams) -> f64 {
    3.0 / PI * ground_factor(params.phi) * params.eta
}

/// sin φ = η α / (3 ω_CF). Returns φ, or an error when the right side exceeds 1.
pub fn phi_from_alpha(alpha: f64, eta: f64, omega_compton: f64) -> Result<f64> {
    let s = eta * alpha / (3.0 * omega_compton);
    if !(0.0..1.0).contains(&s) {
        return Err(invalid("alpha", format!("sin phi = {s} is outside [0, 1)")));
    }
    Ok(s.asin())
}

/// Reduced pole q_j = 2πj e^{−iφ}.
pub fn reduced_pole(j: i64, phi: f64) -> Complex64 {
    2.0 * PI * j as f64 * Complex64::from_polar(1.0, -phi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceGeometry {
    pub omega_ground: f64,
    pub t_phi: f64,
    /// q_j for j = 1..=j_max; the conjugates are the reflected poles
    pub reduced_poles: Vec<Complex64>,
    /// p_j = ω_φ + jη e^{−iφ}
    pub physical_poles: Vec<Complex64>,
    /// full widths γ_j = 2jη sin φ
    pub widths: Vec<f64>,
    /// line centers ω_j = ω_φ + jη cos φ
    pub centers: Vec<f64>,
}

pub fn resonance_geometry(params: &ModelParams, j_max: usize) -> Result<ResonanceGeometry> {
    params.validate()?;
    if j_max < 1 {
        return Err(invalid("j_max", "must be at least 1"));
    }
    check_phi_positive(params.phi)?;
    let (phi, eta) = (params.phi, params.eta);
    let w0 = omega_ground(params);
    let rot = Complex64::from_polar(1.0, -phi);
    let js = 1..=j_max;
    Ok(ResonanceGeometry {
        omega_ground: w0,
        t_phi: t_phi(phi),
        reduced_poles: js.clone().map(|j| reduced_pole(j as i64, phi)).collect(),
        physical_poles: js.clone().map(|j| w0 + j as f64 * eta * rot).collect(),
        widths: js.clone().map(|j| 2.0 * j as f64 * eta * phi.sin()).collect(),
        centers: js.map(|j| w0 + j as f64 * eta * phi.cos()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_frequency_limits() {
        let p = ModelParams::reduced(0.0).unwrap();
        assert!((omega_ground(&p) - 1.5).abs() < 1e-15);
        let p = ModelParams::reduced(FRAC_PI_2 - 1e-12).unwrap();
        assert!((omega_ground(&p) - 3.0 / PI).abs() < 1e-11);
    }

    #[test]
    fn slope_matches_beta_omega() {
        for phi in [0.0, 0.3, 1.2] {
            for rho in [0.1, 1.0, 7.5] {
                for eta in [1.0, 2.5] {
                    let p = ModelParams::new(phi, eta, Cutoff::Removed).unwrap();
                    let beta = ReducedTemperature::new(rho).unwrap().beta(eta);
                    let lhs = t_phi(phi) * rho;
                    assert!((lhs - beta * omega_ground(&p)).abs() < 1e-13 * lhs);
                }
            }
        }
    }

    #[test]
    fn geometry_examples() {
        let p = ModelParams::reduced(0.3).unwrap();
        let g = resonance_geometry(&p, 3).unwrap();
        assert!((g.widths[0] - 0.591_040_413_322_2).abs() < 1e-12);
        assert!((g.centers[1] - (g.omega_ground + 2.0 * 0.3f64.cos())).abs() < 1e-15);
        for j in 0..3 {
            let lhs = g.physical_poles[j] - g.omega_ground;
            let rhs = g.reduced_poles[j] * (p.eta / (2.0 * PI));
            assert!((lhs - rhs).norm() < 1e-14);
            let w = 2.0 * (g.physical_poles[j].conj() - g.omega_ground).im;
            assert!((w - g.widths[j]).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_coupling_rejected_for_poles() {
        let p = ModelParams::reduced(0.0).unwrap();
        assert!(matches!(resonance_geometry(&p, 2), Err(Error::RealAxisPoles(_))));
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(ModelParams::new(FRAC_PI_2, 1.0, Cutoff::Removed).is_err());
        assert!(ModelParams::new(0.1, 0.0, Cutoff::Removed).is_err());
        assert!(ModelParams::new(0.1, 1.0, Cutoff::Finite(-1.0)).is_err());
        assert!(ReducedTemperature::new(0.0).is_err());
    }

    #[test]
    fn alpha_conversion_round_trip() {
        let phi = phi_from_alpha(0.3, 1.0, 1.0).unwrap();
        assert!((phi.sin() - 0.1).abs() < 1e-15);
    }
}
