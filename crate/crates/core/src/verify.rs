//! The acceptance suite: sixteen numbered checks with pinned tolerances.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix3, Matrix3x2};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::density::{
    binomial_row, coefficient_table, lorentz_sum, phi_of_omega, residue_probe, rho_density_eta, thermal_peak_shift,
    CoefficientTable, DensityOptions, FrequencyDensity, LorentzLine, PeakSource,
};
use crate::discretization::{
    build_mode_set, det_block, ln_trace_quadratic, ln_trace_quadratic_product, s_l_continuum, s_l_discrete, z_n,
    z_n_eigen, BlockMatrix, DiscreteModeSet, Mode, ModeBuildOptions, QuadraticOscillatorSystem,
};
use crate::error::Result;
use crate::exec::Execution;
use crate::model::{t_phi, Cutoff, ModelParams};
use crate::partition::{excess_free_energy, log_z_binet, z0, z_cutoff, z_full};
use crate::quad::PrecisionPolicy;
use crate::transforms::{
    complete_monotonicity_check, laplace_of_measure, stieltjes_invert, stieltjes_transform, InversionOptions, Measure,
};

/// One line of the suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub measured: f64,
    pub bound: f64,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    /// seed of the random instances in checks 10 and 11
    pub seed: u64,
    pub exec: Execution,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 20_240_601,
            exec: Execution::default(),
        }
    }
}

pub const CRITERIA: [(u8, &str); 16] = [
    (1, "route agreement"),
    (2, "phi = 0 collapse"),
    (3, "UV limit"),
    (4, "complete monotonicity"),
    (5, "density boundary value"),
    (6, "Laplace round trip"),
    (7, "coefficient identities"),
    (8, "Figure 1 reproduction"),
    (9, "residue probe"),
    (10, "determinant lemma"),
    (11, "trace formula"),
    (12, "Riemann-sum convergence"),
    (13, "Stieltjes inversion"),
    (14, "thermal peak shift"),
    (15, "low-temperature law"),
    (16, "vague convergence"),
];

fn result(id: u8, measured: f64, bound: f64, passed: bool, detail: String) -> CriterionResult {
    let name = CRITERIA[(id - 1) as usize].1.to_string();
    CriterionResult {
        id,
        name,
        measured,
        bound,
        passed: passed && measured.is_finite(),
        detail,
    }
}

fn failed(id: u8, bound: f64, err: crate::Error) -> CriterionResult {
    result(id, f64::NAN, bound, false, format!("error: {err}"))
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn fmt_seq(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ")
}

/// Runs criterion `id` (1..=16).
pub fn run_criterion(id: u8, cfg: &VerifyConfig) -> Option<CriterionResult> {
    let r = match id {
        1 => c01(),
        2 => c02(),
        3 => c03(),
        4 => c04(),
        5 => c05(cfg),
        6 => c06(cfg),
        7 => Ok(c07_table(&match coefficient_table(30) {
            Ok(t) => t,
            Err(e) => return Some(failed(7, 0.0, e)),
        })),
        8 => c08(cfg),
        9 => c09(),
        10 => Ok(c10(cfg)),
        11 => c11(cfg),
        12 => c12(cfg),
        13 => c13(),
        14 => c14(),
        15 => c15(),
        16 => c16(cfg),
        _ => return None,
    };
    Some(r.unwrap_or_else(|e| failed(id, f64::NAN, e)))
}

pub fn run_all(cfg: &VerifyConfig) -> Vec<CriterionResult> {
    (1..=16).filter_map(|id| run_criterion(id, cfg)).collect()
}

fn c01() -> Result<CriterionResult> {
    let policy = PrecisionPolicy::strict();
    let mut worst: f64 = 0.0;
    for phi in [0.01, 0.3, 1.2] {
        for rho in [0.1, 1.0, 5.0] {
            let a = z_full(rho, phi)?;
            let b = log_z_binet(rho, phi, &policy)?;
            worst = worst.max((1.0 - (b - a.ln_value).exp()).abs());
        }
    }
    Ok(result(1, worst, 1e-9, worst < 1e-9, "max |z_full - exp(ln Z_Binet)|/z_full over 9 points".into()))
}

fn c02() -> Result<CriterionResult> {
    let policy = PrecisionPolicy::default();
    let mut worst: f64 = 0.0;
    for rho in [0.5, 1.0, 2.0] {
        let exact = z0(rho, 1.0)?;
        worst = worst.max((z_full(rho, 0.0)?.value / exact - 1.0).abs());
        for gamma in [10.0, 1e3] {
            worst = worst.max((z_cutoff(rho, 0.0, gamma, 1000, &policy)?.value / exact - 1.0).abs());
        }
    }
    Ok(result(2, worst, 1e-10, worst < 1e-10, "max relative deviation from (2 sinh pi rho)^-3".into()))
}

fn c03() -> Result<CriterionResult> {
    let policy = PrecisionPolicy::default();
    let full = z_full(1.0, 0.3)?.value;
    let gaps = [1e2, 1e3, 1e4]
        .iter()
        .map(|&g| Ok((z_cutoff(1.0, 0.3, g, 2000, &policy)?.value / full - 1.0).abs()))
        .collect::<Result<Vec<_>>>()?;
    let last = gaps[2];
    Ok(result(
        3,
        last,
        1e-2,
        strictly_decreasing(&gaps) && last < 1e-2,
        format!("gaps at gamma = 1e2, 1e3, 1e4: {}", fmt_seq(&gaps)),
    ))
}

fn c04() -> Result<CriterionResult> {
    let grid: Vec<f64> = (0..40).map(|i| 0.2 + 0.1 * i as f64).collect();
    let mut worst = f64::INFINITY;
    let mut passed = true;
    for phi in [0.1, 0.5, 1.0] {
        let r = complete_monotonicity_check(|rho| Ok(z_full(rho, phi)?.value), &grid, 8, 1e-10)?;
        passed &= r.passed;
        worst = r.orders.iter().map(|o| o.worst).fold(worst, f64::min);
    }
    Ok(result(
        4,
        worst,
        -1e-10,
        passed,
        "min over k <= 8 of (-1)^k divided difference / scale; rho grid 0.2..4.1".into(),
    ))
}

fn c05(cfg: &VerifyConfig) -> Result<CriterionResult> {
    let mut worst: f64 = 0.0;
    for phi in [0.3, 1.0] {
        for eta in [1.0, 2.0] {
            let opts = DensityOptions {
                t_max: 1.0,
                dt: 1e-3,
                n_terms: Some(15),
                tolerance: 1e-10,
                exec: cfg.exec,
            };
            let m = rho_density_eta(phi, eta, &opts)?;
            let f = phi_of_omega(&m);
            worst = worst
                .max((m.density[0] - 0.5 * phi.sin()).abs())
                .max((f.value[0] - PI / eta * phi.sin()).abs());
        }
    }
    Ok(result(5, worst, 1e-8, worst < 1e-8, "rho(0) = sin(phi)/2 and phi(omega_phi) = (pi/eta) sin(phi)".into()))
}

fn c06(cfg: &VerifyConfig) -> Result<CriterionResult> {
    let phi = 0.3;
    let opts = DensityOptions {
        t_max: 20.0 * PI,
        dt: 2.0 * PI / 1024.0,
        n_terms: None,
        tolerance: 1e-10,
        exec: cfg.exec,
    };
    let m = rho_density_eta(phi, 1.0, &opts)?;
    let mut errs = Vec::new();
    for rho in [1.0, 2.0, 4.0] {
        let y = laplace_of_measure(&m, rho)?.value;
        let exact = (z_full(rho, phi)?.ln_value + t_phi(phi) * rho).exp();
        errs.push((y / exact - 1.0).abs());
    }
    let worst = errs.iter().copied().fold(0.0, f64::max);
    Ok(result(
        6,
        worst,
        1e-3,
        worst < 1e-3,
        format!("relative errors at rho = 1, 2, 4: {} ({} terms)", fmt_seq(&errs), m.n_terms),
    ))
}

/// Check 7 on a given table, so that a perturbed table can be fed in.
pub fn c07_table(table: &CoefficientTable) -> CriterionResult {
    let violation = table.first_identity_violation();
    let defect = table.max_identity_defect();
    let detail = match violation {
        None => format!("all rows j <= {} exact", table.j_max),
        Some(j) => format!("identity fails at j = {j}"),
    };
    result(7, defect, 0.0, violation.is_none(), detail)
}

fn trapezoid(f: &FrequencyDensity, lo: f64, hi: f64) -> f64 {
    let mut s = 0.0;
    for w in f.omega.windows(2).zip(f.value.windows(2)) {
        let ((a, b), (fa, fb)) = ((w.0[0], w.0[1]), (w.1[0], w.1[1]));
        if a >= lo && b <= hi {
            s += 0.5 * (b - a) * (fa + fb);
        }
    }
    s
}

fn c08(cfg: &VerifyConfig) -> Result<CriterionResult> {
    let phi = 0.01;
    let params = ModelParams::new(phi, 1.0, Cutoff::Removed)?;
    let opts = DensityOptions {
        t_max: 10.0 * PI,
        dt: 2.0 * PI / 2048.0,
        n_terms: Some(15),
        tolerance: 1e-10,
        exec: cfg.exec,
    };
    let m = rho_density_eta(phi, 1.0, &opts)?;
    let f = phi_of_omega(&m);
    let mut peak_err: f64 = 0.0;
    let mut mass_err: f64 = 0.0;
    let mut resid: f64 = 0.0;
    for j in 1..=4 {
        let line = LorentzLine::new(j, &params)?;
        let (lo, hi) = (line.center - 0.5, line.center + 0.5);
        let mut best = (f64::NEG_INFINITY, 0.0);
        let mut max_diff: f64 = 0.0;
        for (&w, &v) in f.omega.iter().zip(&f.value) {
            if w < lo || w > hi {
                continue;
            }
            if v > best.0 {
                best = (v, w);
            }
            max_diff = max_diff.max((v - lorentz_sum(&params, 15, w)?).abs());
        }
        peak_err = peak_err.max((best.1 - line.center).abs());
        mass_err = mass_err.max((trapezoid(&f, lo, hi) / binomial_row(j) as f64 - 1.0).abs());
        resid = resid.max(max_diff / best.0);
    }
    let passed = peak_err < 0.01 && mass_err < 0.03 && resid <= 0.05;
    Ok(result(
        8,
        peak_err,
        0.01,
        passed,
        format!("peak offset {peak_err:.2e} (< 0.01), mass error {mass_err:.2e} (< 0.03), Lorentz residual {resid:.2e} (<= 0.05)"),
    ))
}

fn c09() -> Result<CriterionResult> {
    let policy = PrecisionPolicy::default();
    let est = residue_probe(1, 0.3, 10, &crate::density::default_radii(), &policy)?;
    let exact = -3.0 / Complex64::new(0.0, 2.0 * PI);
    let rel = (est.value - exact).norm() / exact.norm();
    Ok(result(9, rel, 0.05, rel < 0.05, format!("estimate {:.6} vs exact {:.6}", est.value, exact)))
}

/// Random block instance: B = D + small symmetric noise, s_j ∈ [0.5, 2].
pub fn random_block(rng: &mut ChaCha8Rng) -> BlockMatrix {
    let l = rng.gen_range(0..=5);
    let mut b = Matrix3::from_fn(|_, _| rng.gen_range(-0.5..0.5));
    b = (b + b.transpose()) * 0.5 + Matrix3::identity() * 3.0;
    let blocks = (0..l).map(|_| Matrix3x2::from_fn(|_, _| rng.gen_range(-0.5..0.5))).collect();
    let s = (0..l).map(|_| rng.gen_range(0.5..2.0)).collect();
    BlockMatrix::new(b, blocks, s).expect("symmetric by construction")
}

fn c10(cfg: &VerifyConfig) -> CriterionResult {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let q = random_block(&mut rng);
        let dense = q.assemble().determinant();
        let d = det_block(&q).unwrap_or(f64::NAN);
        worst = worst.max((d / dense - 1.0).abs());
    }
    result(10, worst, 1e-10, worst < 1e-10, format!("100 random instances, L <= 5, seed {}", cfg.seed))
}

/// Three synthetic modes for the trace-formula check.
pub fn toy_mode_set() -> DiscreteModeSet {
    let mode = |omega: f64, a: [f64; 3], b: [f64; 3], chi: f64| Mode {
        index: [0, 0, 0],
        omega,
        y: [a.into(), b.into()],
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
    .expect("positive frequencies")
}

fn c11(cfg: &VerifyConfig) -> Result<CriterionResult> {
    let set = toy_mode_set();
    let policy = PrecisionPolicy::default();
    let mut toy: f64 = 0.0;
    for (rho, phi) in [(0.3, 0.2), (1.0, 0.7), (2.5, 1.2)] {
        let a = z_n(&set, rho, phi, 40, &policy, cfg.exec)?.value;
        let b = z_n_eigen(&set, rho, phi)?;
        toy = toy.max((a / b - 1.0).abs());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
    let mut random: f64 = 0.0;
    for _ in 0..20 {
        let x = DMatrix::from_fn(6, 6, |_, _| rng.gen_range(-1.0..1.0));
        let a = &x * x.transpose() + DMatrix::identity(6, 6) * 0.5;
        let masses = (0..6).map(|_| rng.gen_range(0.5..2.0)).collect();
        let sys = QuadraticOscillatorSystem::new(masses, a)?;
        let beta = rng.gen_range(0.3..3.0);
        let e = ln_trace_quadratic(&sys, beta)?;
        let p = ln_trace_quadratic_product(&sys, beta, 200)?;
        random = random.max((p - e).exp_m1().abs());
    }
    let passed = toy < 1e-10 && random < 1e-8;
    Ok(result(
        11,
        toy,
        1e-10,
        passed,
        format!("toy ratio vs eigenvalues {toy:.2e} (< 1e-10); random eigen vs product {random:.2e} (< 1e-8)"),
    ))
}

fn c12(cfg: &VerifyConfig) -> Result<CriterionResult> {
    let (rho, phi, gamma) = (0.5, 0.3, 5.0);
    let opts = ModeBuildOptions {
        exec: cfg.exec,
        ..Default::default()
    };
    let sets = [2, 4, 8]
        .iter()
        .map(|&n| build_mode_set(n, gamma, &opts))
        .collect::<Result<Vec<_>>>()?;
    let mut passed = true;
    let mut last: f64 = 0.0;
    let mut detail = format!("rho = {rho}, phi = {phi}, gamma = {gamma};");
    for l in [1, 2, 5] {
        let sc = s_l_continuum(l, rho, phi, gamma)?;
        let gaps = sets
            .iter()
            .map(|s| Ok((s_l_discrete(s, l, rho, phi)? - sc).norm()))
            .collect::<Result<Vec<_>>>()?;
        let rel = gaps[2] / sc.norm();
        passed &= strictly_decreasing(&gaps) && rel < 5e-2;
        last = last.max(rel);
        detail += &format!(" l = {l}: {} (rel {rel:.2e});", fmt_seq(&gaps));
    }
    Ok(result(12, last, 5e-2, passed, detail))
}

fn c13() -> Result<CriterionResult> {
    let mut worst: f64 = 0.0;
    let atom = Measure::point_mass(1.0, 1.0);
    let opts = InversionOptions {
        breaks: vec![1.0],
        ..Default::default()
    };
    for (t, expect) in [(0.5, 0.0), (1.5, 1.0)] {
        let v = stieltjes_invert(|z| stieltjes_transform(&atom, z), t, &opts)?.value;
        worst = worst.max((v - expect).abs());
    }
    let (c, g) = (2.0, 0.3);
    let nodes = (0..=2000).map(|i| i as f64 * 0.01).collect();
    let line = Measure::from_density(|x| g / (PI * ((x - c) * (x - c) + g * g)), nodes)?;
    let opts = InversionOptions {
        breaks: vec![0.0, c, 20.0],
        lower: -10.0,
        upper: 40.0,
        ..Default::default()
    };
    for t in [0.5, 1.5, 2.0, 2.5, 4.0, 10.0] {
        let v = stieltjes_invert(|z| stieltjes_transform(&line, z), t, &opts)?.value;
        worst = worst.max((v - line.cdf(t)).abs());
    }
    Ok(result(13, worst, 1e-3, worst < 1e-3, "sup CDF error: atom at 1 and a Lorentz line on [0, 20]".into()))
}

fn c14() -> Result<CriterionResult> {
    let params = ModelParams::new(0.3, 1.0, Cutoff::Removed)?;
    let mut margin = f64::INFINITY;
    let mut passed = true;
    for j in [1, 3] {
        let gamma_j = 2.0 * LorentzLine::new(j, &params)?.half_width;
        for x in [0.1, 0.5, 0.9] {
            let beta = 2.0 * x / gamma_j;
            let s = thermal_peak_shift(j, &params, beta, PeakSource::Lorentz)?;
            let (lo, hi) = s.bracket;
            passed &= s.shift > lo && s.shift < hi;
            margin = margin.min((s.shift - lo).min(hi - s.shift) / (hi - lo));
        }
    }
    Ok(result(
        14,
        margin,
        0.0,
        passed,
        "smallest distance of the shift to the bracket ends, relative to the bracket width".into(),
    ))
}

fn c15() -> Result<CriterionResult> {
    let phi = 1e-10;
    let mut dev = Vec::new();
    for rho in [10.0, 20.0, 40.0] {
        let r = excess_free_energy(2.0 * rho, phi, 1.0)? / excess_free_energy(rho, phi, 1.0)?;
        dev.push((r / 0.25 - 1.0).abs());
    }
    let last = dev[2];
    Ok(result(
        15,
        last,
        0.1,
        dev.iter().all(|&d| d < 0.1) && strictly_decreasing(&dev),
        format!("|F(2b)/F(b)/(1/4) - 1| at rho = 10, 20, 40: {}", fmt_seq(&dev)),
    ))
}

fn bump(x: f64, center: f64) -> f64 {
    let u = (x - center) / 0.45;
    if u.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u * u)).exp()
    }
}

fn c16(cfg: &VerifyConfig) -> Result<CriterionResult> {
    let centers = [2.5, 3.5];
    let mut passed = true;
    let mut last: f64 = 0.0;
    let mut detail = String::new();
    let mut gaps = vec![Vec::new(); 2];
    for phi in [0.1, 0.01, 0.001] {
        let opts = DensityOptions {
            t_max: 6.0 * PI,
            dt: if phi < 0.005 { 2.0 * PI / 4096.0 } else { 2.0 * PI / 2048.0 },
            n_terms: None,
            tolerance: 1e-8,
            exec: cfg.exec,
        };
        let m = rho_density_eta(phi, 1.0, &opts)?;
        let f = phi_of_omega(&m);
        for (k, &c) in centers.iter().enumerate() {
            let mut s = m.atom_mass * bump(m.atom_location, c);
            for w in f.omega.windows(2).zip(f.value.windows(2)) {
                s += 0.5 * (w.0[1] - w.0[0]) * (w.1[0] * bump(w.0[0], c) + w.1[1] * bump(w.0[1], c));
            }
            // μ₀ has mass binomial(j+2, 2) at (j + 3/2)η
            let exact = binomial_row(k + 1) as f64 * bump(c, c);
            gaps[k].push((s - exact).abs());
        }
    }
    for (k, g) in gaps.iter().enumerate() {
        passed &= strictly_decreasing(g);
        last = last.max(g[2] / g[1]);
        detail += &format!("bump at {}: {}; ", centers[k], fmt_seq(g));
    }
    detail += "measured: largest ratio of the last two gaps";
    Ok(result(16, last, 1.0, passed, detail))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    #[test]
    fn coefficient_mutation_is_caught() {
        let mut t = coefficient_table(30).unwrap();
        assert!(c07_table(&t).passed);
        t.c[1][0] += BigRational::new(BigInt::from(1), BigInt::from(1_000_000));
        t.recompute_row_sums();
        let r = c07_table(&t);
        assert!(!r.passed);
        assert!(r.detail.contains("j = 2"));
    }

    #[test]
    fn fast_criteria() {
        let cfg = VerifyConfig::default();
        for id in [2, 7, 10, 14] {
            let r = run_criterion(id, &cfg).unwrap();
            assert!(r.passed, "{r:?}");
        }
        assert!(run_criterion(17, &cfg).is_none());
    }
}
