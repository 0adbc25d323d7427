use std::f64::consts::PI;

use num_traits::ToPrimitive;
use serde_json::json;

use oscidos::density::{
    coefficient_table, lorentz_sum, phi_of_omega, rho_density_eta, DensityOptions, FrequencyDensity, LorentzLine,
    StateMeasure,
};
use oscidos::discretization::{build_mode_set, s_l_continuum, s_l_discrete, z_n, ModeBuildOptions};
use oscidos::model::{t_phi, Cutoff, ModelParams};
use oscidos::partition::{excess_free_energy, log_z_binet, z0, z_cutoff, z_full};
use oscidos::transforms::laplace_of_measure;
use oscidos::verify::{run_criterion, VerifyConfig, CRITERIA};
use oscidos::{Execution, PrecisionPolicy};

use crate::output::{col, Cell, Document, Table};
use crate::{Cli, Command, Common, Failure, Profile};

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

impl Common {
    fn policy(&self) -> PrecisionPolicy {
        match self.tolerance_profile {
            Profile::Fast => PrecisionPolicy::fast(),
            Profile::Strict => PrecisionPolicy::strict(),
        }
    }

    fn series_tolerance(&self) -> f64 {
        match self.tolerance_profile {
            Profile::Fast => 1e-6,
            Profile::Strict => 1e-10,
        }
    }

    fn params(&self) -> Result<ModelParams, Failure> {
        let cutoff = match self.gamma {
            Some(g) => Cutoff::Finite(g),
            None => Cutoff::Removed,
        };
        Ok(ModelParams::new(self.phi, self.eta, cutoff)?)
    }

    fn rhos(&self, default: f64) -> Result<Vec<f64>, Failure> {
        let v = match (self.rho, self.rho_range) {
            (Some(r), _) => vec![r],
            (None, Some((a, b, n))) => {
                if n == 1 {
                    vec![a]
                } else {
                    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
                }
            }
            (None, None) => vec![default],
        };
        if v.iter().any(|&r| !(r > 0.0) || !r.is_finite()) {
            return Err(usage("rho must be positive and finite"));
        }
        Ok(v)
    }

    fn density_options(&self, t_max: f64, dt: f64) -> Result<DensityOptions, Failure> {
        let opts = DensityOptions {
            t_max: self.tmax.unwrap_or(t_max),
            dt: self.dt.unwrap_or(dt),
            n_terms: self.terms,
            tolerance: self.series_tolerance(),
            exec: Execution::default(),
        };
        if !(opts.t_max > 0.0) || !(opts.dt > 0.0) || opts.dt > opts.t_max {
            return Err(usage("need 0 < dt <= tmax"));
        }
        Ok(opts)
    }

    fn json(&self) -> serde_json::Value {
        json!({
            "phi": self.phi,
            "eta": self.eta,
            "gamma": self.gamma,
            "tolerance_profile": format!("{:?}", self.tolerance_profile).to_lowercase(),
        })
    }
}

/// Builds the output document; the flag is false when verification failed.
pub fn dispatch(cli: &Cli) -> Result<(Document, bool), Failure> {
    let c = &cli.common;
    match &cli.command {
        Command::Partition => partition(c).map(|d| (d, true)),
        Command::Density => density(c).map(|d| (d, true)),
        Command::Lorentz { lines } => lorentz(c, *lines).map(|d| (d, true)),
        Command::Discretize { levels, l } => discretize(c, levels, l).map(|d| (d, true)),
        Command::Transform => transform(c).map(|d| (d, true)),
        Command::Verify { only } => verify(c, only),
    }
}

fn partition(c: &Common) -> Result<Document, Failure> {
    let params = c.params()?;
    let gamma = params.gamma_uv.finite().unwrap_or(1e3);
    let policy = c.policy();
    let rhos = c.rhos(1.0)?;
    let mut t = Table::new(
        "partition",
        vec![
            col("rho", "1"),
            col("Z0", "1"),
            col("Z_cutoff", "1"),
            col("Z", "1"),
            col("lnZ", "1"),
            col("lnZ_binet", "1"),
            col("F_ex", "hbar*freq"),
        ],
    );
    for rho in rhos {
        let full = z_full(rho, params.phi)?;
        t.push(vec![
            rho.into(),
            z0(rho, params.eta)?.into(),
            z_cutoff(rho, params.phi, gamma, 2000, &policy)?.value.into(),
            full.value.into(),
            full.ln_value.into(),
            // the Binet integrand has real-axis poles at φ = 0
            if params.phi > 0.0 { log_z_binet(rho, params.phi, &policy)? } else { f64::NAN }.into(),
            excess_free_energy(rho, params.phi, params.eta)?.into(),
        ]);
    }
    let mut p = c.json();
    p["gamma_used"] = json!(gamma);
    let mut doc = Document::new("partition", p);
    doc.tables.push(t);
    Ok(doc)
}

fn measure(c: &Common, params: &ModelParams, t_max: f64, dt: f64) -> Result<StateMeasure, Failure> {
    Ok(rho_density_eta(params.phi, params.eta, &c.density_options(t_max, dt)?)?)
}

fn interval_mass(f: &FrequencyDensity, lo: f64, hi: f64) -> f64 {
    f.omega
        .windows(2)
        .zip(f.value.windows(2))
        .filter(|(w, _)| w[0] >= lo && w[1] <= hi)
        .map(|(w, v)| 0.5 * (w[1] - w[0]) * (v[0] + v[1]))
        .sum()
}

fn lines_table(params: &ModelParams, f: &FrequencyDensity, count: usize) -> Result<Table, Failure> {
    let coeffs = coefficient_table(count.max(1))?;
    let mut t = Table::new(
        "lines",
        vec![
            col("j", "1"),
            col("omega_j", "freq"),
            col("gamma_j", "freq"),
            col("mass", "1"),
            col("interval_mass", "1"),
            col("peak_omega", "freq"),
        ],
    );
    let last = f.omega.last().copied().unwrap_or(0.0);
    for j in 1..=count {
        let line = LorentzLine::new(j, params)?;
        let (lo, hi) = (line.center - 0.5 * params.eta, line.center + 0.5 * params.eta);
        let (mass_measured, peak) = if hi <= last {
            let peak = f
                .omega
                .iter()
                .zip(&f.value)
                .filter(|(w, _)| **w >= lo && **w <= hi)
                .fold((f64::NEG_INFINITY, f64::NAN), |b, (&w, &v)| if v > b.0 { (v, w) } else { b })
                .1;
            (interval_mass(f, lo, hi), peak)
        } else {
            (f64::NAN, f64::NAN)
        };
        // the exact mass is Σ_n c_{jn}/n!
        let exact = coeffs.row_sums[j - 1].to_f64().unwrap_or(f64::NAN);
        t.push(vec![
            j.into(),
            line.center.into(),
            (2.0 * line.half_width).into(),
            exact.into(),
            mass_measured.into(),
            peak.into(),
        ]);
    }
    Ok(t)
}

fn density(c: &Common) -> Result<Document, Failure> {
    let params = c.params()?;
    let m = measure(c, &params, 10.0 * PI, 2.0 * PI / 2048.0)?;
    let f = phi_of_omega(&m);
    let mut t = Table::new(
        "density",
        vec![
            col("t", "1"),
            col("rho_density", "1"),
            col("omega", "freq"),
            col("phi_density", "1/freq"),
            col("lorentz_sum", "1/freq"),
            col("residual", "1/freq"),
        ],
    );
    let k_max = m.n_terms;
    for i in 0..m.len() {
        let l = lorentz_sum(&params, k_max, f.omega[i])?;
        t.push(vec![
            m.t(i).into(),
            m.density[i].into(),
            f.omega[i].into(),
            f.value[i].into(),
            l.into(),
            (f.value[i] - l).into(),
        ]);
    }
    let lines = ((f.omega.last().copied().unwrap_or(0.0) - m.atom_location) / params.eta).floor() as usize;
    let mut p = c.json();
    p["t_max"] = json!(m.t_max());
    p["dt"] = json!(m.dt);
    let mut doc = Document::new("density", p);
    doc.extra.insert(
        "atom".into(),
        json!({"omega": m.atom_location, "mass": m.atom_mass}),
    );
    doc.extra.insert("n_terms".into(), json!(m.n_terms));
    doc.extra.insert("truncation_bound".into(), json!(m.truncation_bound));
    doc.tables.push(t);
    doc.tables.push(lines_table(&params, &f, lines.saturating_sub(1).max(1))?);
    Ok(doc)
}

fn lorentz(c: &Common, lines: usize) -> Result<Document, Failure> {
    if lines < 1 {
        return Err(usage("--lines must be at least 1"));
    }
    let params = c.params()?;
    let m = measure(c, &params, 2.0 * PI * (lines as f64 + 1.0), 2.0 * PI / 2048.0)?;
    let f = phi_of_omega(&m);
    let mut doc = Document::new("lorentz", c.json());
    doc.extra.insert("n_terms".into(), json!(m.n_terms));
    doc.tables.push(lines_table(&params, &f, lines)?);
    Ok(doc)
}

fn discretize(c: &Common, levels: &[usize], ls: &[usize]) -> Result<Document, Failure> {
    let params = c.params()?;
    let gamma = params.gamma_uv.finite().unwrap_or(5.0);
    let rho = c.rhos(0.5)?[0];
    let policy = c.policy();
    let zc = z_cutoff(rho, params.phi, gamma, 2000, &policy)?.value;
    let mut t = Table::new(
        "discretize",
        vec![
            col("N", "1"),
            col("l", "1"),
            col("cubes", "1"),
            col("frobenius_gap", "1"),
            col("relative_gap", "1"),
            col("Z_N", "1"),
            col("Z_cutoff", "1"),
            col("Z_relative_gap", "1"),
        ],
    );
    for &n in levels {
        let set = build_mode_set(n, gamma, &ModeBuildOptions::default())?;
        let zn = z_n(&set, rho, params.phi, 20, &PrecisionPolicy::default(), Execution::default())?.value;
        for &l in ls {
            let sc = s_l_continuum(l, rho, params.phi, gamma)?;
            let gap = (s_l_discrete(&set, l, rho, params.phi)? - sc).norm();
            t.push(vec![
                n.into(),
                l.into(),
                set.len().into(),
                gap.into(),
                (gap / sc.norm()).into(),
                zn.into(),
                zc.into(),
                (zn / zc - 1.0).abs().into(),
            ]);
        }
    }
    let mut p = c.json();
    p["rho"] = json!(rho);
    p["gamma_used"] = json!(gamma);
    let mut doc = Document::new("discretize", p);
    doc.tables.push(t);
    Ok(doc)
}

fn transform(c: &Common) -> Result<Document, Failure> {
    let params = c.params()?;
    let m = measure(c, &params, 20.0 * PI, 2.0 * PI / 1024.0)?;
    let mut t = Table::new(
        "laplace",
        vec![
            col("rho", "1"),
            col("Y_measure", "1"),
            col("Y_closed_form", "1"),
            col("relative_error", "1"),
            col("tail_bound", "1"),
        ],
    );
    for rho in c.rhos(1.0)? {
        let y = laplace_of_measure(&m, rho)?;
        let exact = (z_full(rho, params.phi)?.ln_value + t_phi(params.phi) * rho).exp();
        t.push(vec![
            rho.into(),
            y.value.into(),
            exact.into(),
            (y.value / exact - 1.0).abs().into(),
            y.tail_bound.into(),
        ]);
    }
    let mut doc = Document::new("transform", c.json());
    doc.extra.insert("n_terms".into(), json!(m.n_terms));
    doc.tables.push(t);
    Ok(doc)
}

fn verify(c: &Common, only: &[u8]) -> Result<(Document, bool), Failure> {
    if let Some(bad) = only.iter().find(|&&id| !(1..=16).contains(&id)) {
        return Err(usage(format!("--only: criteria are numbered 1 to 16, got {bad}")));
    }
    let ids: Vec<u8> = if only.is_empty() { CRITERIA.iter().map(|c| c.0).collect() } else { only.to_vec() };
    let cfg = VerifyConfig {
        seed: c.seed,
        exec: Execution::default(),
    };
    let mut t = Table::new(
        "criteria",
        vec![
            col("id", "1"),
            col("name", "text"),
            col("measured", "1"),
            col("bound", "1"),
            col("passed", "bool"),
        ],
    );
    let mut results = Vec::new();
    for id in ids {
        let r = run_criterion(id, &cfg).expect("id checked above");
        eprintln!("[{}] {:>2} {}: {}", if r.passed { "pass" } else { "FAIL" }, r.id, r.name, r.detail);
        t.push(vec![
            (r.id as usize).into(),
            Cell::Text(r.name.clone()),
            r.measured.into(),
            r.bound.into(),
            Cell::Num(if r.passed { 1.0 } else { 0.0 }),
        ]);
        results.push(r);
    }
    let ok = results.iter().all(|r| r.passed);
    let mut p = c.json();
    p["seed"] = json!(c.seed);
    let mut doc = Document::new("verify", p);
    doc.extra.insert("passed".into(), json!(ok));
    doc.extra.insert("criteria".into(), serde_json::to_value(&results).map_err(|e| Failure::Numeric(e.to_string()))?);
    doc.tables.push(t);
    Ok((doc, ok))
}
