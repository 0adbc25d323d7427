//! Cube-averaged photon modes on the lattice (1/N)ℤ³.
//!
//! Momenta are measured in units of η/c so that a mode's frequency is
//! ω = |k| and the cutoff indicator is χ = 1_{|k| < γ}.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exec::Execution;
use crate::quad::GaussLegendre;

/// Transverse unit vectors (e_θ, e_φ) of spherical coordinates around k.
///
/// On the z-axis the azimuth is taken as 0, so k = (0, 0, 1) gives
/// u₁ = (1, 0, 0) and u₂ = (0, 1, 0).
pub fn polarization(k: Vector3<f64>) -> Result<[Vector3<f64>; 2]> {
    let r = k.norm();
    if !(r > 0.0) || !r.is_finite() {
        return Err(invalid("k", "must be a finite nonzero vector"));
    }
    let rho = k.x.hypot(k.y);
    let (cp, sp) = if rho > 0.0 { (k.x / rho, k.y / rho) } else { (1.0, 0.0) };
    let (ct, st) = (k.z / r, rho / r);
    Ok([
        Vector3::new(ct * cp, ct * sp, -st),
        Vector3::new(-sp, cp, 0.0),
    ])
}

/// Averages over one lattice cube Λ_j.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    /// lower corner in units of 1/N
    pub index: [i64; 3],
    /// ω̄_j, the average of |k|
    pub omega: f64,
    /// ȳ_{σj}, the averages of χ u_σ / √ω
    pub y: [Vector3<f64>; 2],
    /// (χ̄)_j
    pub chi: f64,
    /// average of 1/√ω
    pub inv_sqrt_omega: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscreteModeSet {
    pub level: usize,
    /// cube volume V = N^{−3}
    pub volume: f64,
    pub gamma: f64,
    pub modes: Vec<Mode>,
}

/// Build limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeBuildOptions {
    /// maximal number of cubes
    pub budget: usize,
    /// octree depth for cubes at the origin or on the cutoff sphere
    pub refine_depth: usize,
    pub exec: Execution,
}

impl Default for ModeBuildOptions {
    fn default() -> Self {
        Self {
            budget: 4_000_000,
            refine_depth: 2,
            exec: Execution::default(),
        }
    }
}

impl DiscreteModeSet {
    /// A synthetic set, for oracle checks on small systems.
    pub fn from_modes(volume: f64, gamma: f64, modes: Vec<Mode>) -> Result<Self> {
        if modes.iter().any(|m| !(m.omega > 0.0)) {
            return Err(invalid("modes", "all averaged frequencies must be positive"));
        }
        Ok(Self {
            level: 0,
            volume,
            gamma,
            modes,
        })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }
}

#[derive(Default, Clone, Copy)]
struct CubeSums {
    omega: f64,
    y: [Vector3<f64>; 2],
    chi: f64,
    inv_sqrt: f64,
}

impl CubeSums {
    fn add(&mut self, o: &CubeSums) {
        self.omega += o.omega;
        self.y[0] += o.y[0];
        self.y[1] += o.y[1];
        self.chi += o.chi;
        self.inv_sqrt += o.inv_sqrt;
    }
}

/// Integrals over the cube [lo, lo + h]³ (not yet divided by the volume).
fn cube_integrals(lo: Vector3<f64>, h: f64, gamma: f64, depth: usize, gl: &GaussLegendre) -> CubeSums {
    let hi = lo.add_scalar(h);
    let touches_origin = (0..3).all(|i| lo[i] <= 0.0 && hi[i] >= 0.0);
    let near = (0..3)
        .map(|i| if lo[i] > 0.0 { lo[i] } else if hi[i] < 0.0 { hi[i] } else { 0.0 })
        .fold(0.0, |a, x| a + x * x)
        .sqrt();
    let far = (0..3)
        .map(|i| lo[i].abs().max(hi[i].abs()))
        .fold(0.0, |a, x| a + x * x)
        .sqrt();
    let straddles = near < gamma && far > gamma;
    if depth > 0 && (touches_origin || straddles) {
        let mut s = CubeSums::default();
        let h2 = 0.5 * h;
        for c in 0..8 {
            let off = Vector3::new((c & 1) as f64, ((c >> 1) & 1) as f64, ((c >> 2) & 1) as f64) * h2;
            s.add(&cube_integrals(lo + off, h2, gamma, depth - 1, gl));
        }
        return s;
    }
    let mut s = CubeSums::default();
    let pts: Vec<(f64, f64)> = gl.mapped(0.0, h).collect();
    for &(x, wx) in &pts {
        for &(y, wy) in &pts {
            for &(z, wz) in &pts {
                let k = lo + Vector3::new(x, y, z);
                let w = wx * wy * wz;
                let r = k.norm();
                s.omega += w * r;
                let inv = 1.0 / r.sqrt();
                s.inv_sqrt += w * inv;
                if r < gamma {
                    s.chi += w;
                    if let Ok(u) = polarization(k) {
                        s.y[0] += u[0] * (w * inv);
                        s.y[1] += u[1] * (w * inv);
                    }
                }
            }
        }
    }
    s
}

/// Cube averages for every cube of side 1/N meeting B(0, N) ∩ B(0, γ).
///
/// Cubes entirely outside the cutoff ball carry ȳ = 0 and χ̄ = 0; they do not
/// couple to the particle and are not generated.
pub fn build_mode_set(n: usize, gamma: f64, opts: &ModeBuildOptions) -> Result<DiscreteModeSet> {
    if n < 1 {
        return Err(invalid("N", "must be at least 1"));
    }
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(invalid("gamma", "must be positive and finite"));
    }
    let nf = n as f64;
    let radius = nf.min(gamma);
    let m = (radius * nf).ceil() as i64;
    let estimate = (4.0 / 3.0 * std::f64::consts::PI * (radius * nf + 2.0).powi(3)) as usize;
    if estimate > opts.budget {
        return Err(Error::Budget(format!(
            "about {estimate} cubes at N = {n}, gamma = {gamma} exceed the budget of {}",
            opts.budget
        )));
    }
    let h = 1.0 / nf;
    let mut corners = Vec::new();
    for i in -m..m {
        for j in -m..m {
            for k in -m..m {
                let lo = Vector3::new(i as f64, j as f64, k as f64) * h;
                let d2: f64 = (0..3)
                    .map(|a| {
                        let (l, u) = (lo[a], lo[a] + h);
                        let c = if l > 0.0 { l } else if u < 0.0 { u } else { 0.0 };
                        c * c
                    })
                    .sum();
                if d2 < radius * radius {
                    corners.push([i, j, k]);
                }
            }
        }
    }
    let gl = GaussLegendre::new(4);
    let vol = h * h * h;
    let modes = opts.exec.map_slice(&corners, |&idx| {
        let lo = Vector3::new(idx[0] as f64, idx[1] as f64, idx[2] as f64) * h;
        let s = cube_integrals(lo, h, gamma, opts.refine_depth, &gl);
        Mode {
            index: idx,
            omega: s.omega / vol,
            y: [s.y[0] / vol, s.y[1] / vol],
            chi: s.chi / vol,
            inv_sqrt_omega: s.inv_sqrt / vol,
        }
    });
    Ok(DiscreteModeSet {
        level: n,
        volume: vol,
        gamma,
        modes,
    })
}
