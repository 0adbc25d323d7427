//! Lorentz lines ℓ_j and thermal peak shifts.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::coefficients::binomial_row;
use super::series::FrequencyDensity;
use crate::error::{invalid, Error, Result};
use crate::model::{check_phi_positive, omega_ground, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorentzLine {
    pub j: usize,
    /// ω_j = ω_φ + jη cos φ
    pub center: f64,
    /// jη sin φ
    pub half_width: f64,
    /// binomial(j+2, 2)
    pub mass: u64,
}

impl LorentzLine {
    pub fn new(j: usize, params: &ModelParams) -> Result<Self> {
        if j < 1 {
            return Err(invalid("j", "must be at least 1"));
        }
        check_phi_positive(params.phi)?;
        let jf = j as f64;
        Ok(Self {
            j,
            center: omega_ground(params) + jf * params.eta * params.phi.cos(),
            half_width: jf * params.eta * params.phi.sin(),
            mass: binomial_row(j),
        })
    }

    /// Unit-mass profile (1/π) Γ/((ω − ω_j)² + Γ²).
    pub fn profile(&self, omega: f64) -> f64 {
        let d = omega - self.center;
        self.half_width / (PI * (d * d + self.half_width * self.half_width))
    }

    /// p_j = ω_j − iΓ
    pub fn pole(&self) -> Complex64 {
        Complex64::new(self.center, -self.half_width)
    }
}

pub fn lorentz_lines(params: &ModelParams, j_max: usize) -> Result<Vec<LorentzLine>> {
    (1..=j_max).map(|j| LorentzLine::new(j, params)).collect()
}

/// ℓ_j(x) = −1/(2πi(x − p_j)) + 1/(2πi(x − p̄_j)), the meromorphic profile.
pub fn lorentz_profile(j: usize, params: &ModelParams, x: Complex64) -> Result<Complex64> {
    let line = LorentzLine::new(j, params)?;
    let p = line.pole();
    for pole in [p, p.conj()] {
        let d = (x - pole).norm();
        if d < 1e-12 * line.half_width.max(1.0) {
            return Err(Error::PoleProximity {
                point: x.to_string(),
                pole: pole.to_string(),
                distance: d,
            });
        }
    }
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    Ok(-1.0 / (two_pi_i * (x - p)) + 1.0 / (two_pi_i * (x - p.conj())))
}

/// Σ_{k ≤ k_max} binomial(k+2, 2) ℓ_k(ω).
pub fn lorentz_sum(params: &ModelParams, k_max: usize, omega: f64) -> Result<f64> {
    Ok(lorentz_lines(params, k_max)?
        .iter()
        .map(|l| l.mass as f64 * l.profile(omega))
        .sum())
}

/// Where the thermal peak shift is measured.
#[derive(Debug, Clone, Copy)]
pub enum PeakSource<'a> {
    /// the unit profile ℓ_j alone
    Lorentz,
    /// the sampled density φ(ω)
    Density(&'a FrequencyDensity),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakShift {
    /// argmax of e^{−βω} × profile, minus ω_j
    pub shift: f64,
    /// (−1 + √(1 − β²γ_j²/4))/β for the pure profile
    pub exact_root: f64,
    /// the interval (−βγ_j²/4, −βγ_j²/8)
    pub bracket: (f64, f64),
}

/// Shift of the maximum of e^{−βω} ℓ_j(ω) (or of e^{−βω} φ(ω) near ω_j).
/// Requires 2/β > γ_j = 2jη sin φ.
pub fn thermal_peak_shift(
    j: usize,
    params: &ModelParams,
    beta: f64,
    source: PeakSource<'_>,
) -> Result<PeakShift> {
    let line = LorentzLine::new(j, params)?;
    let gamma_j = 2.0 * line.half_width;
    if !(beta > 0.0) || !(2.0 / beta > gamma_j) {
        return Err(invalid(
            "beta",
            format!("need 2/beta > gamma_j = {gamma_j}, got beta = {beta}"),
        ));
    }
    let b2g2 = beta * beta * line.half_width * line.half_width;
    // (−1 + √(1 − b²Γ²))/β written without cancellation
    let exact_root = -b2g2 / (beta * (1.0 + (1.0 - b2g2).sqrt()));
    let bracket = (-beta * gamma_j * gamma_j / 4.0, -beta * gamma_j * gamma_j / 8.0);
    let shift = match source {
        PeakSource::Lorentz => exact_root,
        PeakSource::Density(f) => {
            let w = 0.5 * params.eta;
            let obj = |x: f64| (-beta * x).exp() * f.at(line.center + x);
            argmax(obj, -w, w)
        }
    };
    Ok(PeakShift {
        shift,
        exact_root,
        bracket,
    })
}

/// Grid scan followed by golden-section refinement.
fn argmax<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let n = 2000;
    let h = (b - a) / n as f64;
    let (mut best, mut bx) = (f64::NEG_INFINITY, a);
    for i in 0..=n {
        let x = a + i as f64 * h;
        let v = f(x);
        if v > best {
            best = v;
            bx = x;
        }
    }
    let (mut lo, mut hi) = ((bx - h).max(a), (bx + h).min(b));
    let r = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let x1 = hi - r * (hi - lo);
        let x2 = lo + r * (hi - lo);
        if f(x1) < f(x2) {
            lo = x1;
        } else {
            hi = x2;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(phi: f64) -> ModelParams {
        ModelParams::reduced(phi).unwrap()
    }

    #[test]
    fn complex_profile_matches_real_form() {
        let p = params(0.3);
        for j in 1..4 {
            let line = LorentzLine::new(j, &p).unwrap();
            for w in [0.0, line.center, line.center + 0.37, 10.0] {
                let c = lorentz_profile(j, &p, Complex64::new(w, 0.0)).unwrap();
                assert!((c.re - line.profile(w)).abs() < 1e-14);
                assert!(c.im.abs() < 1e-15);
            }
            let peak = line.profile(line.center);
            assert!((peak - 1.0 / (PI * line.half_width)).abs() < 1e-14);
        }
    }

    #[test]
    fn schwarz_symmetry_and_pole_guard() {
        let p = params(0.2);
        let z = Complex64::new(2.0, 0.4);
        let a = lorentz_profile(2, &p, z.conj()).unwrap();
        let b = lorentz_profile(2, &p, z).unwrap().conj();
        assert!((a - b).norm() < 1e-15);
        let pole = LorentzLine::new(2, &p).unwrap().pole();
        assert!(lorentz_profile(2, &p, pole).is_err());
    }

    #[test]
    fn unit_mass() {
        let p = params(0.1);
        let line = LorentzLine::new(1, &p).unwrap();
        // ∫ over ±R widths = (2/π) arctan R
        let r: f64 = 1e4;
        let gl = crate::quad::GaussLegendre::new(64);
        let mut total = 0.0;
        let n = 4000;
        // substitution ω = ω_j + Γ tan θ resolves the tails
        let th = r.atan();
        for k in 0..n {
            let a = -th + 2.0 * th * k as f64 / n as f64;
            let b = a + 2.0 * th / n as f64;
            total += gl.integrate(a, b, |t: f64| {
                let w = line.center + line.half_width * t.tan();
                line.profile(w) * line.half_width / t.cos().powi(2)
            });
        }
        let expected = 2.0 / PI * r.atan();
        assert!((total - expected).abs() < 1e-10);
        assert!((total - 1.0).abs() < 1e-4);
    }

    #[test]
    fn thermal_shift_in_bracket() {
        let p = params(0.05);
        let line = LorentzLine::new(1, &p).unwrap();
        for x in [0.1, 0.5, 0.9] {
            let beta = x / line.half_width;
            let s = thermal_peak_shift(1, &p, beta, PeakSource::Lorentz).unwrap();
            assert!(s.bracket.0 < s.shift && s.shift < s.bracket.1, "x={x}");
        }
        let beta = 0.1 / line.half_width;
        let s = thermal_peak_shift(1, &p, beta, PeakSource::Lorentz).unwrap();
        assert!((s.shift / s.bracket.1 - 1.0).abs() < 0.01);
        let tiny = thermal_peak_shift(1, &p, 1e-8, PeakSource::Lorentz).unwrap();
        assert!(tiny.shift.abs() < 1e-9);
        assert!(thermal_peak_shift(1, &p, 2.0 / line.half_width, PeakSource::Lorentz).is_err());
    }
}
