//! ϱ = Σ_n g^{*n}/n! on a uniform grid and the rescaled density φ(ω).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::kernel::{g_real, g_sup_bound};
use crate::error::{invalid, Error, Result};
use crate::exec::{CompensatedSum, Execution};
use crate::model::{check_phi_positive, omega_ground, t_phi, ModelParams};
use crate::partition::z_full;

/// Trapezoid convolution on a uniform grid starting at 0:
/// (h∗k)(t_i) ≈ Δt (Σ_{m=0}^{i} h_m k_{i−m} − (h_0 k_i + h_i k_0)/2).
pub fn convolve(h: &[f64], k: &[f64], dt: f64, exec: Execution) -> Result<Vec<f64>> {
    if h.len() != k.len() {
        return Err(Error::GridMismatch(format!(
            "operands have {} and {} samples",
            h.len(),
            k.len()
        )));
    }
    if !(dt > 0.0) {
        return Err(invalid("dt", "must be positive"));
    }
    Ok(exec.map(h.len(), |i| {
        if i == 0 {
            return 0.0;
        }
        let mut s = CompensatedSum::new();
        for m in 0..=i {
            s.add(h[m] * k[i - m]);
        }
        dt * (s.value() - 0.5 * (h[0] * k[i] + h[i] * k[0]))
    }))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateMeasure {
    pub phi: f64,
    pub eta: f64,
    /// location ω_φ of the atom
    pub atom_location: f64,
    pub atom_mass: f64,
    pub dt: f64,
    /// ϱ(t_i) at t_i = iΔt
    pub density: Vec<f64>,
    /// g^{*n}(t_i)/n! for n = 1..=n_terms
    #[serde(skip)]
    pub terms: Vec<Vec<f64>>,
    pub n_terms: usize,
    /// bound on Σ_{n > n_terms} g^{*n}/n! over the grid
    pub truncation_bound: f64,
}

impl StateMeasure {
    pub fn len(&self) -> usize {
        self.density.len()
    }

    pub fn is_empty(&self) -> bool {
        self.density.is_empty()
    }

    pub fn t(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }

    pub fn t_max(&self) -> f64 {
        self.t(self.len() - 1)
    }

    /// Linear interpolation of ϱ; zero for t < 0 and beyond the grid.
    pub fn density_at(&self, t: f64) -> f64 {
        interpolate(&self.density, self.dt, t)
    }

    /// A pure atom at 0, used for transform fixtures.
    pub fn atom_only(phi: f64, eta: f64, dt: f64, len: usize) -> Self {
        Self {
            phi,
            eta,
            atom_location: 0.0,
            atom_mass: 1.0,
            dt,
            density: vec![0.0; len],
            terms: Vec::new(),
            n_terms: 0,
            truncation_bound: 0.0,
        }
    }
}

pub(crate) fn interpolate(v: &[f64], dt: f64, t: f64) -> f64 {
    if t < 0.0 || v.is_empty() {
        return 0.0;
    }
    let x = t / dt;
    let i = x.floor() as usize;
    if i + 1 >= v.len() {
        return if i == v.len() - 1 && x == i as f64 { v[i] } else { 0.0 };
    }
    let f = x - i as f64;
    v[i] * (1.0 - f) + v[i + 1] * f
}

/// Grid and series controls for [`rho_density`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityOptions {
    pub t_max: f64,
    pub dt: f64,
    /// `None` picks the smallest n ≥ 15 meeting `tolerance`
    pub n_terms: Option<usize>,
    pub tolerance: f64,
    #[serde(skip)]
    pub exec: Execution,
}

impl DensityOptions {
    /// Δt = 2π/2048 and t_max = 2π(j_max + 1).
    pub fn for_lines(j_max: usize) -> Self {
        Self {
            t_max: 2.0 * PI * (j_max as f64 + 1.0),
            dt: 2.0 * PI / 2048.0,
            n_terms: None,
            tolerance: 1e-10,
            exec: Execution::default(),
        }
    }
}

/// Bound on sup_{t ≤ t_max} Σ_{n>N} g^{*n}(t)/n! for the exact convolutions.
///
/// Two estimates are combined. With G = sup g, g^{*n}(t) ≤ Gⁿ t^{n−1}/(n−1)!.
/// For any ρ₀ > 0, g^{*n}(t) ≤ G e^{ρ₀ t} L(ρ₀)^{n−1} with
/// L(ρ₀) = ∫ e^{−ρ₀ s} g(s) ds = ln Z(ρ₀) + t_φ ρ₀.
pub fn truncation_bound(phi: f64, t_max: f64, n_terms: usize) -> Result<f64> {
    let g = g_sup_bound(phi)?;
    Ok(norm_tail(g, t_max, n_terms).min(laplace_tail(phi, g, t_max, n_terms)?))
}

fn norm_tail(g: f64, t_max: f64, n: usize) -> f64 {
    // Σ_{m>n} g^m t^{m−1} / ((m−1)! m!), in logs
    let mut total = 0.0;
    let mut ln_term = 0.0;
    let lg = g.ln();
    let lt = t_max.ln();
    for m in 1..400usize {
        let mf = m as f64;
        ln_term += lg - mf.ln() + if m > 1 { lt - (mf - 1.0).ln() } else { 0.0 };
        // ln_term = m ln g + (m−1) ln t − ln m! − ln (m−1)!
        if m > n {
            let term = (ln_term).exp();
            total += term;
            if term < total * 1e-17 && mf > g * t_max {
                break;
            }
        }
    }
    if t_max == 0.0 {
        0.0
    } else {
        total
    }
}

fn laplace_tail(phi: f64, g: f64, t_max: f64, n: usize) -> Result<f64> {
    let mut best = f64::INFINITY;
    for k in 1..=32 {
        let rho0 = 0.25 * k as f64;
        let l = z_full(rho0, phi)?.ln_value + t_phi(phi) * rho0;
        if !(l > 0.0) {
            continue;
        }
        // Σ_{m>n} L^{m−1}/m!
        let mut ln_term = 0.0;
        let mut s = 0.0;
        for m in 1..400usize {
            let mf = m as f64;
            ln_term += if m > 1 { l.ln() } else { 0.0 } - mf.ln();
            if m > n {
                let term = ln_term.exp();
                s += term;
                if term < s * 1e-17 && mf > l {
                    break;
                }
            }
        }
        if s > 0.0 {
            best = best.min((g.ln() + rho0 * t_max + s.ln()).exp());
        }
    }
    Ok(best)
}

/// ϱ = Σ_{n=1}^{N} g^{*n}/n! on t_i = iΔt, 0 ≤ t_i ≤ t_max.
pub fn rho_density(phi: f64, opts: &DensityOptions) -> Result<StateMeasure> {
    rho_density_eta(phi, 1.0, opts)
}

pub fn rho_density_eta(phi: f64, eta: f64, opts: &DensityOptions) -> Result<StateMeasure> {
    check_phi_positive(phi)?;
    if !(opts.dt > 0.0) || !(opts.t_max > opts.dt) {
        return Err(invalid("dt", "need 0 < dt < t_max"));
    }
    if !(opts.tolerance > 0.0) {
        return Err(invalid("tolerance", "must be positive"));
    }
    let n_terms = match opts.n_terms {
        Some(0) => return Err(invalid("n_terms", "must be at least 1")),
        Some(n) => {
            let b = truncation_bound(phi, opts.t_max, n)?;
            if b > opts.tolerance {
                return Err(Error::Truncation {
                    bound: b,
                    tolerance: opts.tolerance,
                    context: format!("{n} series terms on t <= {}", opts.t_max),
                });
            }
            n
        }
        None => {
            let mut n = 15;
            while truncation_bound(phi, opts.t_max, n)? > opts.tolerance {
                n += 1;
                if n > 300 {
                    return Err(Error::Truncation {
                        bound: truncation_bound(phi, opts.t_max, n)?,
                        tolerance: opts.tolerance,
                        context: "no admissible term count up to 300".into(),
                    });
                }
            }
            n
        }
    };
    let bound = truncation_bound(phi, opts.t_max, n_terms)?;
    let len = (opts.t_max / opts.dt).round() as usize + 1;
    let g: Vec<f64> = opts
        .exec
        .map(len, |i| g_real(i as f64 * opts.dt, phi))
        .into_iter()
        .collect::<Result<_>>()?;
    let mut terms = Vec::with_capacity(n_terms);
    let mut power = g.clone();
    terms.push(g.clone());
    for n in 2..=n_terms {
        power = convolve(&g, &power, opts.dt, opts.exec)?;
        // g^{*n}/n! = g ∗ (g^{*(n−1)}/(n−1)!) / n
        for v in power.iter_mut() {
            *v /= n as f64;
        }
        terms.push(power.clone());
    }
    let density = (0..len)
        .map(|i| {
            let mut s = CompensatedSum::new();
            for t in &terms {
                s.add(t[i]);
            }
            s.value()
        })
        .collect();
    let params = ModelParams {
        phi,
        eta,
        gamma_uv: crate::model::Cutoff::Removed,
    };
    Ok(StateMeasure {
        phi,
        eta,
        atom_location: omega_ground(&params),
        atom_mass: 1.0,
        dt: opts.dt,
        density,
        terms,
        n_terms,
        truncation_bound: bound,
    })
}

/// φ(ω) = (2π/η) ϱ((2π/η)(ω − ω_φ)) sampled at ω_i = ω_φ + ηt_i/(2π).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrequencyDensity {
    pub omega: Vec<f64>,
    pub value: Vec<f64>,
    pub omega_ground: f64,
    pub eta: f64,
}

impl FrequencyDensity {
    /// Interpolated φ(ω), zero below ω_φ.
    pub fn at(&self, omega: f64) -> f64 {
        let d = self.omega.get(1).map_or(1.0, |w1| w1 - self.omega[0]);
        interpolate(&self.value, d, omega - self.omega_ground)
    }
}

pub fn phi_of_omega(measure: &StateMeasure) -> FrequencyDensity {
    let s = 2.0 * PI / measure.eta;
    FrequencyDensity {
        omega: (0..measure.len())
            .map(|i| measure.atom_location + measure.t(i) / s)
            .collect(),
        value: measure.density.iter().map(|v| s * v).collect(),
        omega_ground: measure.atom_location,
        eta: measure.eta,
    }
}
