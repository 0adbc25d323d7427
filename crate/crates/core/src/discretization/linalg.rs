//! Quadratic oscillator systems: the trace formula and the block determinant.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix3, Matrix3x2};

use crate::error::{invalid, Error, Result};
use crate::exec::CompensatedSum;

/// H = Σ p_i²/(2m_i) + ½ xᵀAx with diagonal masses and symmetric A.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticOscillatorSystem {
    pub mass_diag: Vec<f64>,
    pub coupling: DMatrix<f64>,
}

impl QuadraticOscillatorSystem {
    pub fn new(mass_diag: Vec<f64>, coupling: DMatrix<f64>) -> Result<Self> {
        let n = mass_diag.len();
        if coupling.nrows() != n || coupling.ncols() != n {
            return Err(invalid("coupling", format!("must be {n}x{n}")));
        }
        if mass_diag.iter().any(|&m| !(m > 0.0)) {
            return Err(invalid("mass_diag", "masses must be positive"));
        }
        let asym = (&coupling - coupling.transpose()).amax();
        if asym > 1e-12 * coupling.amax().max(1.0) {
            return Err(invalid("coupling", "must be symmetric"));
        }
        Ok(Self {
            mass_diag,
            coupling,
        })
    }

    pub fn dim(&self) -> usize {
        self.mass_diag.len()
    }

    /// M^{−1/2} A M^{−1/2}
    pub fn dynamical_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| {
            self.coupling[(i, j)] / (self.mass_diag[i] * self.mass_diag[j]).sqrt()
        })
    }

    fn eigenvalues(&self) -> Result<Vec<f64>> {
        let k = self.dynamical_matrix();
        let scale = k.amax().max(f64::MIN_POSITIVE);
        let ev: Vec<f64> = k.symmetric_eigen().eigenvalues.iter().copied().collect();
        if let Some(&bad) = ev.iter().find(|&&l| !(l > 1e-14 * scale)) {
            return Err(Error::NonPositiveEigenvalue(bad));
        }
        Ok(ev)
    }
}

/// ln(2 sinh(x/2)) for x > 0 without overflow.
pub(crate) fn ln_two_sinh_half(x: f64) -> f64 {
    0.5 * x + (-(-x).exp()).ln_1p()
}

/// ln Tr e^{−βH} = −Σ_i ln(2 sinh(β√λ_i/2)).
pub fn ln_trace_quadratic(system: &QuadraticOscillatorSystem, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let ev = system.eigenvalues()?;
    let mut s = CompensatedSum::new();
    for l in ev {
        s.add(-ln_two_sinh_half(beta * l.sqrt()));
    }
    Ok(s.value())
}

/// Tr e^{−βH} = Π_i (2 sinh(β√λ_i/2))^{−1}, λ_i the eigenvalues of M^{−1/2}AM^{−1/2}.
pub fn trace_quadratic(system: &QuadraticOscillatorSystem, beta: f64) -> Result<f64> {
    Ok(ln_trace_quadratic(system, beta)?.exp())
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(invalid("beta", "must be positive and finite"));
    }
    Ok(())
}

fn ln_det_lu(m: DMatrix<f64>) -> Result<f64> {
    let d = m.lu().determinant();
    if !(d > 0.0) {
        return Err(Error::NonPositiveEigenvalue(d));
    }
    Ok(d.ln())
}

/// Σ_{l > L} l^{−s} by Euler–Maclaurin, accurate for L ≫ s.
pub(crate) fn zeta_tail(s: f64, l: f64) -> f64 {
    l.powf(1.0 - s) / (s - 1.0) - 0.5 * l.powf(-s) + s * l.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * l.powf(-s - 3.0) / 720.0
}

/// ln Tr e^{−βH} by the product form
/// β^{−n} det(K)^{−1/2} Π_l det(I + (β/2πl)² K)^{−1}, K = M^{−1/2}AM^{−1/2},
/// using LU determinants for l ≤ l_max and a trace expansion of the tail.
pub fn ln_trace_quadratic_product(system: &QuadraticOscillatorSystem, beta: f64, l_max: usize) -> Result<f64> {
    check_beta(beta)?;
    let k = system.dynamical_matrix();
    let n = system.dim();
    let id = DMatrix::<f64>::identity(n, n);
    // ‖K‖ bound by the largest absolute row sum
    let norm = (0..n)
        .map(|i| k.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let x_tail = (beta / (2.0 * PI * l_max as f64)).powi(2) * norm;
    if x_tail >= 0.25 {
        return Err(Error::Truncation {
            bound: x_tail,
            tolerance: 0.25,
            context: "product form: increase l_max so that (beta/2 pi L)^2 |K| < 1/4".into(),
        });
    }
    let mut acc = CompensatedSum::new();
    acc.add(-(n as f64) * beta.ln());
    acc.add(-0.5 * ln_det_lu(k.clone())?);
    for l in 1..=l_max {
        let x = (beta / (2.0 * PI * l as f64)).powi(2);
        acc.add(-ln_det_lu(&id + &k * x)?);
    }
    // Σ_{l>L} ln det(I + x_l K) = Σ_m (−1)^{m+1} tr(K^m)/m · (β/2π)^{2m} Σ_{l>L} l^{−2m}
    let c = (beta / (2.0 * PI)).powi(2);
    let mut power = k.clone();
    let mut cm = c;
    for m in 1..=60 {
        let mf = m as f64;
        let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
        let term = sign * power.trace() / mf * cm * zeta_tail(2.0 * mf, l_max as f64);
        acc.add(-term);
        if term.abs() < 1e-18 {
            break;
        }
        power = &power * &k;
        cm *= c;
    }
    Ok(acc.value())
}

/// Symmetric matrix [[B, B_1, …, B_L], [B_1ᵀ, s_1 I_2, 0, …], …].
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMatrix {
    pub b: Matrix3<f64>,
    pub blocks: Vec<Matrix3x2<f64>>,
    pub s: Vec<f64>,
}

impl BlockMatrix {
    pub fn new(b: Matrix3<f64>, blocks: Vec<Matrix3x2<f64>>, s: Vec<f64>) -> Result<Self> {
        if blocks.len() != s.len() {
            return Err(invalid("blocks", "need one scalar s_j per block"));
        }
        if (b - b.transpose()).amax() > 1e-12 * b.amax().max(1.0) {
            return Err(invalid("b", "must be symmetric"));
        }
        Ok(Self { b, blocks, s })
    }

    pub fn dim(&self) -> usize {
        3 + 2 * self.blocks.len()
    }

    pub fn assemble(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut a = DMatrix::zeros(n, n);
        a.view_mut((0, 0), (3, 3)).copy_from(&self.b);
        for (j, (bj, &sj)) in self.blocks.iter().zip(&self.s).enumerate() {
            let o = 3 + 2 * j;
            a.view_mut((0, o), (3, 2)).copy_from(bj);
            a.view_mut((o, 0), (2, 3)).copy_from(&bj.transpose());
            a[(o, o)] = sj;
            a[(o + 1, o + 1)] = sj;
        }
        a
    }
}

/// det Q = s_1² ⋯ s_L² det(B − Σ_j B_j B_jᵀ / s_j).
pub fn det_block(q: &BlockMatrix) -> Result<f64> {
    if let Some(j) = q.s.iter().position(|&s| s == 0.0) {
        return Err(invalid("s", format!("s_{} vanishes", j + 1)));
    }
    let mut schur = q.b;
    let mut prod = 1.0;
    for (bj, &sj) in q.blocks.iter().zip(&q.s) {
        schur -= bj * bj.transpose() / sj;
        prod *= sj * sj;
    }
    Ok(prod * schur.determinant())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_mode_trace() {
        let w: f64 = 1.7;
        let beta = 0.9;
        let sys = QuadraticOscillatorSystem::new(vec![1.0], DMatrix::from_element(1, 1, w * w)).unwrap();
        let t = trace_quadratic(&sys, beta).unwrap();
        assert!((t - 1.0 / (2.0 * (0.5 * beta * w).sinh())).abs() < 1e-14);
    }

    #[test]
    fn decoupled_pair_factorizes() {
        let sys = QuadraticOscillatorSystem::new(
            vec![1.0, 1.0],
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 4.0])),
        )
        .unwrap();
        let t = trace_quadratic(&sys, 1.3).unwrap();
        let single = |w: f64| 1.0 / (2.0 * (0.65 * w).sinh());
        assert!((t - single(1.0) * single(2.0)).abs() < 1e-14);
    }

    #[test]
    fn block_example() {
        let b1 = Matrix3x2::new(1.0, 0.0, 0.0, 1.0, 0.0, 0.0);
        let q = BlockMatrix::new(Matrix3::identity(), vec![b1], vec![2.0]).unwrap();
        assert!((det_block(&q).unwrap() - 1.0).abs() < 1e-15);
        assert!((q.assemble().determinant() - 1.0).abs() < 1e-14);
        let empty = BlockMatrix::new(Matrix3::from_diagonal_element(2.0), vec![], vec![]).unwrap();
        assert!((det_block(&empty).unwrap() - 8.0).abs() < 1e-15);
        let zero = BlockMatrix::new(Matrix3::identity(), vec![b1], vec![0.0]).unwrap();
        assert!(det_block(&zero).is_err());
    }

    #[test]
    fn non_positive_system_rejected() {
        let sys = QuadraticOscillatorSystem::new(
            vec![1.0, 1.0],
            DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]),
        )
        .unwrap();
        assert!(matches!(trace_quadratic(&sys, 1.0), Err(Error::NonPositiveEigenvalue(_))));
    }

    #[test]
    fn zeta_tail_reference() {
        // Σ_{l>20} l^{-2} = π²/6 − Σ_{l≤20} l^{-2}
        let head: f64 = (1..=20).map(|l| 1.0 / (l * l) as f64).sum();
        let exact = PI * PI / 6.0 - head;
        assert!((zeta_tail(2.0, 20.0) - exact).abs() < 1e-10);
    }
}
