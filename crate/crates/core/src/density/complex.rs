//! Continuation of ϱ into the complex plane along straight segments,
//! residue probes at the poles q_j and the jump of g∗g across the cut rays.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::kernel::g_complex;
use crate::error::{invalid, Error, Result};
use crate::exec::Execution;
use crate::model::{check_phi_positive, reduced_pole};
use crate::quad::{self, GaussLegendre, PrecisionPolicy};

/// Panels on [0, 1] graded toward the points where g(uz) comes close to the
/// segment, with Gauss–Legendre nodes and barycentric interpolation weights.
struct PanelGrid {
    breaks: Vec<f64>,
    gl: GaussLegendre,
    bary: Vec<f64>,
}

impl PanelGrid {
    fn new(z: Complex64, phi: f64, p: usize) -> Self {
        let mut breaks = vec![0.0, 1.0];
        let r = z.norm();
        let m_max = ((3.0 * r) / (2.0 * PI)).ceil() as i64 + 1;
        for m in 1..=m_max {
            let q = reduced_pole(m, phi);
            for c in [q / z, q.conj() / z] {
                grade_toward(&mut breaks, c);
            }
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
        // cap panel widths so smooth oscillation is also resolved
        let w_max = (2.0 / r.max(1e-300)).min(0.1);
        let mut refined = vec![breaks[0]];
        for w in breaks.windows(2) {
            let k = ((w[1] - w[0]) / w_max).ceil().max(1.0) as usize;
            for i in 1..=k {
                refined.push(w[0] + (w[1] - w[0]) * i as f64 / k as f64);
            }
        }
        let gl = GaussLegendre::new(p);
        let bary = gl
            .nodes
            .iter()
            .zip(&gl.weights)
            .enumerate()
            .map(|(k, (&x, &w))| {
                let s = if k % 2 == 0 { 1.0 } else { -1.0 };
                s * ((1.0 - x * x) * w).sqrt()
            })
            .collect();
        Self {
            breaks: refined,
            gl,
            bary,
        }
    }

    fn panels(&self) -> usize {
        self.breaks.len() - 1
    }

    fn nodes(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.panels() * self.gl.len());
        for w in self.breaks.windows(2) {
            out.extend(self.gl.mapped(w[0], w[1]).map(|(x, _)| x));
        }
        out
    }

    fn panel_of(&self, x: f64) -> usize {
        let i = self.breaks.partition_point(|&b| b <= x);
        i.saturating_sub(1).min(self.panels() - 1)
    }

    /// Barycentric interpolation of node values `f` (panel-major) at x.
    fn interpolate(&self, f: &[Complex64], x: f64) -> Complex64 {
        let k = self.panel_of(x);
        let (a, b) = (self.breaks[k], self.breaks[k + 1]);
        let y = (2.0 * x - a - b) / (b - a);
        let p = self.gl.len();
        let vals = &f[k * p..(k + 1) * p];
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for i in 0..p {
            let d = y - self.gl.nodes[i];
            if d == 0.0 {
                return vals[i];
            }
            let w = self.bary[i] / d;
            num += vals[i] * w;
            den += w;
        }
        num / den
    }
}

fn grade_toward(breaks: &mut Vec<f64>, c: Complex64) {
    let x0 = c.re.clamp(0.0, 1.0);
    let d = (c - x0).norm().max(1e-12);
    if d >= 0.5 {
        return;
    }
    breaks.push(x0);
    let mut off = d;
    while off < 1.0 {
        for x in [x0 - off, x0 + off] {
            if x > 0.0 && x < 1.0 {
                breaks.push(x);
            }
        }
        off *= 3.0;
    }
}

fn check_segment(z: Complex64, phi: f64) -> Result<()> {
    check_phi_positive(phi)?;
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(invalid("z", "must be finite"));
    }
    if z.norm() >= 2.0 * PI && z.arg().abs() >= phi {
        return Err(Error::Domain {
            func: "density_complex",
            reason: format!("z = {z} lies on or beyond the cut rays arg z = ±{phi}"),
        });
    }
    Ok(())
}

fn nodes_per_panel(policy: &PrecisionPolicy) -> usize {
    if policy.rel_tol < 1e-11 {
        24
    } else {
        16
    }
}

/// g^{*n}(z)/n! for n = 1..=n_terms, each convolution integrated along the
/// segment [0, z].
pub fn density_complex_terms(
    z: Complex64,
    phi: f64,
    n_terms: usize,
    policy: &PrecisionPolicy,
    exec: Execution,
) -> Result<Vec<Complex64>> {
    check_segment(z, phi)?;
    if n_terms < 1 {
        return Err(invalid("n_terms", "must be at least 1"));
    }
    policy.validate()?;
    if z == Complex64::new(0.0, 0.0) {
        let mut t = vec![Complex64::new(0.0, 0.0); n_terms];
        t[0] = Complex64::new(0.5 * phi.sin(), 0.0);
        return Ok(t);
    }
    let grid = PanelGrid::new(z, phi, nodes_per_panel(policy));
    let mut targets = grid.nodes();
    targets.push(1.0);
    let n_nodes = targets.len() - 1;
    let g_at = |u: f64| g_complex(u * z, phi);
    let mut prev: Vec<Complex64> = exec
        .map_slice(&targets, |&s| g_at(s))
        .into_iter()
        .collect::<Result<_>>()?;
    let mut out = vec![prev[n_nodes]];
    let mut fact = 1.0;
    for n in 2..=n_terms {
        fact *= n as f64;
        let next: Vec<Complex64> = exec
            .map_slice(&targets, |&s| convolve_at(&grid, &prev[..n_nodes], s, z, phi))
            .into_iter()
            .collect::<Result<_>>()?;
        out.push(next[n_nodes] / fact);
        prev = next;
    }
    Ok(out)
}

/// F_n(s) = z ∫_0^s g(uz) F_{n−1}(s − u) du.
fn convolve_at(grid: &PanelGrid, prev: &[Complex64], s: f64, z: Complex64, phi: f64) -> Result<Complex64> {
    if s == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut pts: Vec<f64> = Vec::with_capacity(2 * grid.breaks.len() + 2);
    pts.push(0.0);
    pts.push(s);
    for &b in &grid.breaks {
        if b > 0.0 && b < s {
            pts.push(b);
            pts.push(s - b);
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    let mut acc = Complex64::new(0.0, 0.0);
    for w in pts.windows(2) {
        for (u, wt) in grid.gl.mapped(w[0], w[1]) {
            acc += g_complex(u * z, phi)? * grid.interpolate(prev, s - u) * wt;
        }
    }
    Ok(z * acc)
}

/// ϱ(z) = Σ_{n ≤ n_terms} g^{*n}(z)/n! inside the cone |arg z| < φ or the
/// disc |z| < 2π.
pub fn density_complex(z: Complex64, phi: f64, n_terms: usize, policy: &PrecisionPolicy) -> Result<Complex64> {
    let terms = density_complex_terms(z, phi, n_terms, policy, Execution::default())?;
    Ok(terms.iter().rev().sum())
}

/// Fit model for the limit r → 0 of (z − q)f(z) sampled at radii r.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtrapolationBasis {
    /// a + b r
    Linear,
    /// a + b r + c r ln r, for logarithmic remainders
    LogLinear,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidueEstimate {
    pub value: Complex64,
    pub radii: Vec<f64>,
    pub samples: Vec<Complex64>,
    /// difference to the fit without the largest radius
    pub spread: f64,
}

/// Extrapolates (z − pole) f(z) along z = pole + r·direction as r → 0.
pub fn residue_probe_fn<F>(
    f: F,
    pole: Complex64,
    direction: Complex64,
    radii: &[f64],
    basis: ExtrapolationBasis,
) -> Result<ResidueEstimate>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let k = match basis {
        ExtrapolationBasis::Linear => 2,
        ExtrapolationBasis::LogLinear => 3,
    };
    if radii.len() < k + 1 || radii.iter().any(|&r| !(r > 0.0)) {
        return Err(invalid("radii", format!("need at least {} positive radii", k + 1)));
    }
    let dir = direction / direction.norm();
    let samples: Vec<Complex64> = radii
        .iter()
        .map(|&r| Ok(r * dir * f(pole + r * dir)?))
        .collect::<Result<_>>()?;
    let value = fit_intercept(radii, &samples, basis);
    // refit without the largest radius
    let imax = radii
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let (r2, s2): (Vec<f64>, Vec<Complex64>) = radii
        .iter()
        .zip(&samples)
        .enumerate()
        .filter(|(i, _)| *i != imax)
        .map(|(_, (r, s))| (*r, *s))
        .unzip();
    let spread = if r2.len() >= k {
        (fit_intercept(&r2, &s2, basis) - value).norm()
    } else {
        0.0
    };
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(Error::NonConvergent("residue fit produced a non-finite value".into()));
    }
    if spread > 0.1 * value.norm().max(1e-300) {
        return Err(Error::NonConvergent(format!(
            "residue estimate {value} changes by {spread:e} when the largest radius is dropped"
        )));
    }
    Ok(ResidueEstimate {
        value,
        radii: radii.to_vec(),
        samples,
        spread,
    })
}

/// Least-squares intercept, real and imaginary parts fitted separately.
fn fit_intercept(r: &[f64], y: &[Complex64], basis: ExtrapolationBasis) -> Complex64 {
    let cols: Vec<Vec<f64>> = r
        .iter()
        .map(|&r| match basis {
            ExtrapolationBasis::Linear => vec![1.0, r],
            ExtrapolationBasis::LogLinear => vec![1.0, r, r * r.ln()],
        })
        .collect();
    let k = cols[0].len();
    let a = nalgebra::DMatrix::from_fn(r.len(), k, |i, j| cols[i][j]);
    let svd = a.svd(true, true);
    let re = nalgebra::DVector::from_iterator(y.len(), y.iter().map(|v| v.re));
    let im = nalgebra::DVector::from_iterator(y.len(), y.iter().map(|v| v.im));
    let x_re = svd.solve(&re, 1e-14).map(|v| v[0]).unwrap_or(f64::NAN);
    let x_im = svd.solve(&im, 1e-14).map(|v| v[0]).unwrap_or(f64::NAN);
    Complex64::new(x_re, x_im)
}

/// Default approach radii for [`residue_probe`].
pub fn default_radii() -> Vec<f64> {
    (0..7).map(|k| 0.2 * 0.6f64.powi(k)).collect()
}

/// lim (z − q_j) ϱ(z) approached from inside the cone along the normal
/// i e^{−iφ}. The exact value is −binomial(j+2, 2)/(2πi).
pub fn residue_probe(
    j: usize,
    phi: f64,
    n_terms: usize,
    radii: &[f64],
    policy: &PrecisionPolicy,
) -> Result<ResidueEstimate> {
    check_phi_positive(phi)?;
    if j < 1 || j > n_terms {
        return Err(invalid("j", format!("need 1 <= j <= n_terms, got j = {j}")));
    }
    let q = reduced_pole(j as i64, phi);
    let normal = Complex64::new(0.0, 1.0) * Complex64::from_polar(1.0, -phi);
    residue_probe_fn(
        |z| density_complex(z, phi, n_terms, policy),
        q,
        normal,
        radii,
        ExtrapolationBasis::LogLinear,
    )
}

/// Checks that z = s e^{∓iφ} with 2πj < s < 2π(j+1); returns (j, lower ray?).
fn ray_position(z: Complex64, phi: f64) -> Result<(usize, bool)> {
    check_phi_positive(phi)?;
    let s = z.norm();
    let arg = z.arg();
    let lower = (arg + phi).abs() <= 1e-9 * phi.max(1.0);
    let upper = (arg - phi).abs() <= 1e-9 * phi.max(1.0);
    if !(lower || upper) {
        return Err(Error::Domain {
            func: "jump_g2",
            reason: format!("z = {z} is not on the rays arg z = ±{phi}"),
        });
    }
    let x = s / (2.0 * PI);
    let j = x.floor();
    if j < 1.0 || x == j {
        return Err(Error::Domain {
            func: "jump_g2",
            reason: format!("|z|/2π = {x} must lie strictly between consecutive integers >= 1"),
        });
    }
    Ok((j as usize, lower))
}

/// Jump of g∗g across the cut: Σ_{l=1}^{j} (6/l) g(z − 2πl e^{−iφ}).
///
/// On the lower ray the jump is the value approached from the side of the
/// real axis minus the value from the far side; on the upper ray it is the
/// complex conjugate of the mirrored lower-ray jump.
pub fn jump_g2(z: Complex64, phi: f64) -> Result<Complex64> {
    let (j, lower) = ray_position(z, phi)?;
    if !lower {
        return Ok(jump_g2(z.conj(), phi)?.conj());
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for l in 1..=j {
        acc += 6.0 / l as f64 * g_complex(z - reduced_pole(l as i64, phi), phi)?;
    }
    Ok(acc)
}

/// F₊ − F₋ from two deformed integration paths along the ray, each passing
/// the poles q_l and z − q_l on semicircles on opposite sides.
pub fn jump_g2_numeric(z: Complex64, phi: f64, policy: &PrecisionPolicy) -> Result<Complex64> {
    let (j, lower) = ray_position(z, phi)?;
    if !lower {
        return Ok(jump_g2_numeric(z.conj(), phi, policy)?.conj());
    }
    let s = z.norm();
    let e = z / s;
    // singular points along the ray: (position, is pole of the first factor)
    let mut sing: Vec<(f64, bool)> = Vec::new();
    for l in 1..=j {
        sing.push((2.0 * PI * l as f64, true));
        sing.push((s - 2.0 * PI * l as f64, false));
    }
    sing.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut marks: Vec<f64> = vec![0.0];
    marks.extend(sing.iter().map(|p| p.0));
    marks.push(s);
    let gap = marks.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    if gap < 1e-6 {
        return Err(Error::PoleProximity {
            point: z.to_string(),
            pole: "coinciding singular points on the ray".into(),
            distance: gap,
        });
    }
    let d = 0.3 * gap;
    let path = |side: f64| -> Result<Complex64> {
        let integrand = |zeta: Complex64| -> Complex64 {
            match (g_complex(zeta, phi), g_complex(z - zeta, phi)) {
                (Ok(a), Ok(b)) => a * b,
                _ => Complex64::new(f64::NAN, f64::NAN),
            }
        };
        let mut total = Complex64::new(0.0, 0.0);
        let mut x = 0.0;
        for &(c, first) in &sing {
            total += quad::integrate(|t: f64| integrand(t * e) * e, x, c - d, policy)?.value;
            // the first factor's poles are passed on the side toward the real
            // axis for F₊, the second factor's poles on the other side
            let sigma = if first { side } else { -side };
            let arc = quad::integrate(
                |th: f64| {
                    let rot = Complex64::from_polar(1.0, -sigma * th);
                    let zeta = c * e - d * e * rot;
                    let dz = Complex64::new(0.0, sigma * d) * e * rot;
                    integrand(zeta) * dz
                },
                0.0,
                PI,
                policy,
            )?;
            total += arc.value;
            x = c + d;
        }
        total += quad::integrate(|t: f64| integrand(t * e) * e, x, s, policy)?.value;
        if !total.re.is_finite() || !total.im.is_finite() {
            return Err(Error::PoleProximity {
                point: z.to_string(),
                pole: "integration path".into(),
                distance: d,
            });
        }
        Ok(total)
    };
    Ok(path(1.0)? - path(-1.0)?)
}
