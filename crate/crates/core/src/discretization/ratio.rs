//! The ratio Z_N = Tr e^{−βH_N} / Tr e^{−βH_f,N} and its continuum limit.
//!
//! Units: η = c = 1, so ν_l = l/ρ and a mode of momentum k has frequency |k|.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Matrix3x2};

use super::linalg::{BlockMatrix, QuadraticOscillatorSystem};
use super::modes::DiscreteModeSet;
use crate::error::{invalid, Error, Result};
use crate::exec::{compensated_sum, Execution};
use crate::model::{check_phi, check_rho};
use crate::partition::{check_gamma, log_product, LogProduct, PartitionValue, Route, Truncation};
use crate::quad::PrecisionPolicy;

/// κ = 3 sin φ / (2π²), the coupling e²/(mc³) in these units.
fn kappa(phi: f64) -> f64 {
    3.0 * phi.sin() / (2.0 * PI * PI)
}

fn check_l(l: usize) -> Result<()> {
    if l < 1 {
        return Err(invalid("l", "must be at least 1"));
    }
    Ok(())
}

/// Per-mode data: ω̄_j and κV Σ_σ ȳ_σ ȳ_σᵀ.
struct Weighted {
    omega: Vec<f64>,
    p: Vec<Matrix3<f64>>,
}

impl Weighted {
    fn new(modes: &DiscreteModeSet, phi: f64) -> Self {
        let kv = kappa(phi) * modes.volume;
        Self {
            omega: modes.modes.iter().map(|m| m.omega).collect(),
            p: modes
                .modes
                .iter()
                .map(|m| (m.y[0] * m.y[0].transpose() + m.y[1] * m.y[1].transpose()) * kv)
                .collect(),
        }
    }

    fn s(&self, nu: f64) -> Matrix3<f64> {
        let nu2 = nu * nu;
        let mut acc = Matrix3::zeros();
        let mut comp = Matrix3::zeros();
        for (p, &w) in self.p.iter().zip(&self.omega) {
            // Kahan per entry: the sums run over up to 10⁶ cubes
            let y = p / (w * (w * w + nu2)) - comp;
            let t = acc + y;
            comp = (t - acc) - y;
            acc = t;
        }
        acc
    }

    fn omega_max(&self) -> f64 {
        self.omega.iter().copied().fold(0.0, f64::max)
    }

    /// M_k = Σ_j P_j ω̄_j^{2k−1}
    fn moments(&self, k_max: usize) -> Vec<Matrix3<f64>> {
        (0..k_max)
            .map(|k| {
                self.p
                    .iter()
                    .zip(&self.omega)
                    .fold(Matrix3::zeros(), |a, (p, &w)| a + p * w.powi(2 * k as i32 - 1))
            })
            .collect()
    }
}

/// S_{l,N} = κV Σ_j Σ_σ ȳ_{σj} ȳ_{σj}ᵀ / (ω̄_j (ω̄_j² + ν_l²)).
pub fn s_l_discrete(modes: &DiscreteModeSet, l: usize, rho: f64, phi: f64) -> Result<Matrix3<f64>> {
    check_l(l)?;
    check_rho(rho)?;
    check_phi(phi)?;
    Ok(Weighted::new(modes, phi).s(l as f64 / rho))
}

/// S_l = (4 sin φ/π)(ρ/l) arctan(γρ/l) I₃.
pub fn s_l_continuum(l: usize, rho: f64, phi: f64, gamma: f64) -> Result<Matrix3<f64>> {
    check_l(l)?;
    check_rho(rho)?;
    check_phi(phi)?;
    check_gamma(gamma)?;
    let r = rho / l as f64;
    Ok(Matrix3::identity() * (4.0 / PI * phi.sin() * r * (gamma * r).atan()))
}

/// (3ρ sin φ / 2π) V Σ_j χ̄_j / (ω̄_j² (ω̄_j + 1)), the exponent of the
/// mass renormalization factor.
pub fn renormalization_discrete(modes: &DiscreteModeSet, rho: f64, phi: f64) -> Result<f64> {
    check_rho(rho)?;
    check_phi(phi)?;
    let s = compensated_sum(modes.modes.iter().map(|m| m.chi / (m.omega * m.omega * (m.omega + 1.0))));
    Ok(3.0 * rho * phi.sin() / (2.0 * PI) * modes.volume * s)
}

/// 6ρ sin φ ln(1 + γ), the N → ∞ limit of [`renormalization_discrete`].
pub fn renormalization_continuum(rho: f64, phi: f64, gamma: f64) -> Result<f64> {
    check_rho(rho)?;
    check_phi(phi)?;
    check_gamma(gamma)?;
    Ok(6.0 * rho * phi.sin() * gamma.ln_1p())
}

/// Z_N = e^{E} (2πρ)^{−3} Π_l det((1 + ρ²/l²) I₃ + S_{l,N})^{−1}.
///
/// Factors with ν_l ≤ 2 max ω̄ are taken exactly; beyond that S_{l,N} is
/// expanded in powers of 1/ν_l² and the remaining product goes to an
/// Euler–Maclaurin tail.
pub fn z_n(
    modes: &DiscreteModeSet,
    rho: f64,
    phi: f64,
    l_max: usize,
    policy: &PrecisionPolicy,
    exec: Execution,
) -> Result<PartitionValue> {
    check_rho(rho)?;
    check_phi(phi)?;
    policy.validate()?;
    let data = Weighted::new(modes, phi);
    let w_max = data.omega_max();
    let mut l0 = l_max.max((2.0 * rho * w_max).ceil() as usize + 1);
    let tol = policy.rel_tol.max(policy.abs_tol);
    let mut attempts = 0;
    let prod = loop {
        let prod = ln_det_product(&data, rho, l0, policy, exec)?;
        if prod.tail_error <= tol {
            break prod;
        }
        attempts += 1;
        if attempts > 6 {
            return Err(Error::Truncation {
                bound: prod.tail_error,
                tolerance: tol,
                context: "discrete ratio product: increase l_max".into(),
            });
        }
        l0 *= 2;
    };
    let ln = renormalization_discrete(modes, rho, phi)? - 3.0 * (2.0 * PI * rho).ln() - prod.head - prod.tail;
    Ok(PartitionValue::from_ln(
        ln,
        Route::Product,
        Truncation::Product {
            l_max: l0 as u64,
            tail: prod.tail,
            tail_error: prod.tail_error,
        },
    ))
}

fn ln_det_product(
    data: &Weighted,
    rho: f64,
    l0: usize,
    policy: &PrecisionPolicy,
    exec: Execution,
) -> Result<LogProduct> {
    let w_max = data.omega_max();
    // (ω_max/ν)^{2K} < 1e−17 for ν ≥ ν_{l0}
    let q = (w_max * rho / l0 as f64).powi(2);
    let k_max = if q > 0.0 {
        ((-17.0 * std::f64::consts::LN_10) / q.ln()).ceil().max(1.0) as usize + 1
    } else {
        1
    };
    let moments = data.moments(k_max);
    let series = |nu: f64| {
        let inv = 1.0 / (nu * nu);
        let mut s = Matrix3::zeros();
        let mut ds = Matrix3::zeros();
        let mut p = inv;
        for (k, m) in moments.iter().enumerate() {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            s += m * (sign * p);
            ds -= m * (sign * p * (2 * k + 2) as f64 / nu);
            p *= inv;
        }
        (s, ds)
    };
    let l0f = l0 as f64;
    let e_of = |x: f64| -> Matrix3<f64> {
        let base = Matrix3::identity() * (rho * rho / (x * x));
        if x <= l0f {
            base + data.s(x / rho)
        } else {
            base + series(x / rho).0
        }
    };
    let f = |x: f64| ln_det_one_plus(&e_of(x));
    let df = |x: f64| {
        let a = Matrix3::identity() * (1.0 + rho * rho / (x * x)) + series(x / rho).0;
        let da = Matrix3::identity() * (-2.0 * rho * rho / (x * x * x)) + series(x / rho).1 / rho;
        a.try_inverse().map_or(f64::NAN, |ai| (ai * da).trace())
    };
    let prod = log_product(f, df, l0 as u64, rho * w_max.max(1.0), policy, exec)?;
    if !(prod.head.is_finite() && prod.tail.is_finite()) {
        return Err(Error::NonPositiveEigenvalue(f64::NAN));
    }
    Ok(prod)
}

/// ln det(I + E) without cancellation for small E.
fn ln_det_one_plus(e: &Matrix3<f64>) -> f64 {
    let minors = e[(0, 0)] * e[(1, 1)] - e[(0, 1)] * e[(1, 0)] + e[(0, 0)] * e[(2, 2)] - e[(0, 2)] * e[(2, 0)]
        + e[(1, 1)] * e[(2, 2)] - e[(1, 2)] * e[(2, 1)];
    (e.trace() + minors + e.determinant()).ln_1p()
}

/// The particle-field system as a block matrix with unit masses:
/// B = I₃ + Σ w wᵀ/ω̄², B_j = [w_{1j} w_{2j}], s_j = ω̄_j², where
/// w_{σj} = √(κVω̄_j) ȳ_{σj}. The B term is the mass renormalization.
pub fn coupled_block(modes: &DiscreteModeSet, phi: f64) -> Result<BlockMatrix> {
    check_phi(phi)?;
    let kv = kappa(phi) * modes.volume;
    let mut b = Matrix3::identity();
    let mut blocks = Vec::with_capacity(modes.len());
    let mut s = Vec::with_capacity(modes.len());
    for m in &modes.modes {
        let c = (kv * m.omega).sqrt();
        let bj = Matrix3x2::from_columns(&[m.y[0] * c, m.y[1] * c]);
        b += bj * bj.transpose() / (m.omega * m.omega);
        blocks.push(bj);
        s.push(m.omega * m.omega);
    }
    BlockMatrix::new(b, blocks, s)
}

/// Z_N by diagonalization: e^{E} Tr e^{−βH_N} / Tr e^{−βH_f,N}.
pub fn z_n_eigen(modes: &DiscreteModeSet, rho: f64, phi: f64) -> Result<f64> {
    let block = coupled_block(modes, phi)?;
    let n = block.dim();
    let beta = 2.0 * PI * rho;
    let coupled = QuadraticOscillatorSystem::new(vec![1.0; n], block.assemble())?;
    let ln_field: f64 = modes
        .modes
        .iter()
        .map(|m| -2.0 * super::linalg::ln_two_sinh_half(beta * m.omega))
        .sum();
    let ln = renormalization_discrete(modes, rho, phi)? + super::linalg::ln_trace_quadratic(&coupled, beta)? - ln_field;
    Ok(ln.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::modes::Mode;
    use crate::partition::z0;
    use nalgebra::Vector3;

    fn toy() -> DiscreteModeSet {
        let mode = |omega: f64, a: [f64; 3], b: [f64; 3], chi: f64| Mode {
            index: [0, 0, 0],
            omega,
            y: [Vector3::from(a), Vector3::from(b)],
            chi,
            inv_sqrt_omega: 1.0 / omega.sqrt(),
        };
        DiscreteModeSet::from_modes(
            0.5,
            3.0,
            vec![
                mode(0.7, [0.5, 0.2, -0.1], [0.0, 0.8, 0.3], 1.0),
                mode(1.6, [-0.3, 0.1, 0.6], [0.4, -0.2, 0.1], 0.8),
                mode(2.9, [0.2, 0.2, 0.2], [0.1, -0.5, 0.3], 0.3),
            ],
        )
        .unwrap()
    }

    #[test]
    fn continuum_shape() {
        let (rho, phi) = (0.8, 0.4);
        let big = s_l_continuum(3, rho, phi, 1e12).unwrap();
        assert!((big[(0, 0)] - 2.0 * rho / 3.0 * phi.sin()).abs() < 1e-10);
        assert_eq!(s_l_continuum(1, rho, 0.0, 10.0).unwrap(), Matrix3::zeros());
    }

    #[test]
    fn uncoupled_is_z0() {
        let mut set = toy();
        for m in &mut set.modes {
            m.y = [Vector3::zeros(), Vector3::zeros()];
            m.chi = 0.0;
        }
        let p = PrecisionPolicy::default();
        let z = z_n(&set, 0.9, 0.3, 50, &p, Execution::Sequential).unwrap().value;
        let z_ref = z0(0.9, 1.0).unwrap();
        assert!((z / z_ref - 1.0).abs() < 1e-11);
    }

    #[test]
    fn block_determinant_is_field_determinant() {
        let set = toy();
        let block = coupled_block(&set, 0.5).unwrap();
        let expect: f64 = set.modes.iter().map(|m| m.omega.powi(4)).product();
        let d = super::super::linalg::det_block(&block).unwrap();
        assert!((d / expect - 1.0).abs() < 1e-12);
    }

    #[test]
    fn toy_ratio_matches_eigen_route() {
        let set = toy();
        let p = PrecisionPolicy::default();
        for (rho, phi) in [(0.3, 0.2), (1.0, 0.7), (2.5, 1.2)] {
            let a = z_n(&set, rho, phi, 40, &p, Execution::Sequential).unwrap().value;
            let b = z_n_eigen(&set, rho, phi).unwrap();
            assert!((a / b - 1.0).abs() < 1e-10, "rho={rho} phi={phi}: {a} vs {b}");
        }
    }
}
