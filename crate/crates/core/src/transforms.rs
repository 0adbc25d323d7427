//! Laplace, Stieltjes and Fourier transforms of measures on the line,
//! Stieltjes inversion and a divided-difference test for complete monotonicity.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::density::{phi_of_omega, StateMeasure};
use crate::error::{invalid, Error, Result};
use crate::exec::CompensatedSum;
use crate::model::t_phi;
use crate::partition::z_full;
use crate::quad::{self, PrecisionPolicy};

/// Point masses plus a density that is linear between nodes and zero
/// outside [nodes[0], nodes[last]].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measure {
    pub atoms: Vec<(f64, f64)>,
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
}

impl Measure {
    pub fn new(atoms: Vec<(f64, f64)>, nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.len() != values.len() {
            return Err(invalid("values", "need one value per node"));
        }
        if nodes.len() == 1 {
            return Err(invalid("nodes", "a density needs at least two nodes"));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("nodes", "must be strictly increasing"));
        }
        if nodes.iter().chain(&values).any(|x| !x.is_finite())
            || atoms.iter().any(|(x, m)| !x.is_finite() || !m.is_finite())
        {
            return Err(invalid("measure", "entries must be finite"));
        }
        Ok(Self { atoms, nodes, values })
    }

    pub fn point_mass(location: f64, mass: f64) -> Self {
        Self {
            atoms: vec![(location, mass)],
            nodes: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Samples a density at the given nodes.
    pub fn from_density<F: Fn(f64) -> f64>(f: F, nodes: Vec<f64>) -> Result<Self> {
        let values = nodes.iter().map(|&x| f(x)).collect();
        Self::new(Vec::new(), nodes, values)
    }

    /// μ in the variable t of the Laplace representation: atom at 0.
    pub fn from_state_t(m: &StateMeasure) -> Self {
        let n = m.len();
        Self {
            atoms: vec![(0.0, m.atom_mass)],
            nodes: (0..n).map(|i| m.t(i)).collect(),
            values: m.density.clone(),
        }
    }

    /// μ in frequency ω = ω_φ + ηt/(2π), with density (2π/η)ϱ(t).
    pub fn from_state_omega(m: &StateMeasure) -> Self {
        let f = phi_of_omega(m);
        Self {
            atoms: vec![(m.atom_location, m.atom_mass)],
            nodes: f.omega,
            values: f.value,
        }
    }

    fn segments(&self) -> impl Iterator<Item = (f64, f64, f64, f64)> + '_ {
        self.nodes
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(x, v)| (x[0], x[1], v[0], v[1]))
    }

    pub fn total_mass(&self) -> f64 {
        self.cdf(f64::INFINITY)
    }

    /// μ((−∞, x]).
    pub fn cdf(&self, x: f64) -> f64 {
        let mut s = CompensatedSum::new();
        for &(a, m) in &self.atoms {
            if a <= x {
                s.add(m);
            }
        }
        for (a, b, pa, pb) in self.segments() {
            if x <= a {
                break;
            }
            if x >= b {
                s.add(0.5 * (b - a) * (pa + pb));
            } else {
                let px = pa + (pb - pa) * (x - a) / (b - a);
                s.add(0.5 * (x - a) * (pa + px));
            }
        }
        s.value()
    }

    fn support(&self) -> Option<(f64, f64)> {
        let xs = self.atoms.iter().map(|a| a.0).chain(self.nodes.iter().copied());
        xs.fold(None, |acc, x| match acc {
            None => Some((x, x)),
            Some((lo, hi)) => Some((lo.min(x), hi.max(x))),
        })
    }

    /// ∫ e^{−λx} dμ(x), exact for the piecewise-linear density.
    pub fn exp_transform(&self, lambda: Complex64) -> Complex64 {
        let mut re = CompensatedSum::new();
        let mut im = CompensatedSum::new();
        let mut add = |z: Complex64| {
            re.add(z.re);
            im.add(z.im);
        };
        for &(a, m) in &self.atoms {
            add(m * (-lambda * a).exp());
        }
        for (a, b, pa, pb) in self.segments() {
            add(segment_exp(a, b, pa, pb, lambda));
        }
        Complex64::new(re.value(), im.value())
    }

    /// ∫ e^{−ρx} dμ(x).
    pub fn laplace(&self, rho: f64) -> f64 {
        self.exp_transform(Complex64::new(rho, 0.0)).re
    }
}

/// ∫_a^b p(x) e^{−λx} dx for p linear with p(a) = pa, p(b) = pb.
fn segment_exp(a: f64, b: f64, pa: f64, pb: f64, lambda: Complex64) -> Complex64 {
    let h = b - a;
    let slope = (pb - pa) / h;
    let x = lambda * h;
    // E0 = ∫_0^h e^{−λu} du, E1 = ∫_0^h u e^{−λu} du
    let (e0, e1) = if x.norm() < 0.5 {
        let mut e0 = Complex64::new(0.0, 0.0);
        let mut e1 = Complex64::new(0.0, 0.0);
        let mut pow = Complex64::new(1.0, 0.0);
        let mut fact = 1.0;
        for n in 0..20 {
            e0 += pow / (fact * (n + 1) as f64);
            e1 += pow / (fact * (n + 2) as f64);
            pow *= -x;
            fact *= (n + 1) as f64;
        }
        (e0 * h, e1 * h * h)
    } else {
        let em = (-x).exp();
        let e0 = (1.0 - em) / lambda;
        (e0, (e0 - em * h) / lambda)
    };
    (-lambda * a).exp() * (e0 * pa + e1 * slope)
}

/// Laplace transform of a state measure with a bound on the part beyond the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceValue {
    pub value: f64,
    /// ∫_{t_max}^∞ e^{−ρt} dμ ≤ e^{−ρ t_max/2} Y(ρ/2)
    pub tail_bound: f64,
}

/// Y(ρ) = atom + ∫_0^∞ e^{−ρt} ϱ(t) dt over the measure's grid.
///
/// The tail bound uses Y(ρ/2) = Z(ρ/2) e^{t_φ ρ/2}; it must stay below
/// 1e−6 of the value.
pub fn laplace_of_measure(measure: &StateMeasure, rho: f64) -> Result<LaplaceValue> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(invalid("rho", "must be positive and finite"));
    }
    let value = Measure::from_state_t(measure).laplace(rho);
    if measure.density.iter().all(|&v| v == 0.0) {
        return Ok(LaplaceValue { value, tail_bound: 0.0 });
    }
    let half = 0.5 * rho;
    let ln_y = z_full(half, measure.phi)?.ln_value + t_phi(measure.phi) * half;
    let tail_bound = (ln_y - half * measure.t_max()).exp();
    if !(tail_bound <= 1e-6 * value.abs()) {
        return Err(Error::Truncation {
            bound: tail_bound,
            tolerance: 1e-6 * value.abs(),
            context: format!("Laplace transform at rho = {rho}: extend t_max beyond {}", measure.t_max()),
        });
    }
    Ok(LaplaceValue { value, tail_bound })
}

/// ∫ dμ(x)/(x − z).
pub fn stieltjes_transform(measure: &Measure, z: Complex64) -> Result<Complex64> {
    if let Some((lo, hi)) = measure.support() {
        let resolution = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
        if z.im.abs() <= resolution && z.re >= lo - resolution && z.re <= hi + resolution {
            return Err(Error::Domain {
                func: "stieltjes_transform",
                reason: format!("z = {z} lies on the support [{lo}, {hi}]"),
            });
        }
    }
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    let mut add = |w: Complex64| {
        re.add(w.re);
        im.add(w.im);
    };
    for &(a, m) in &measure.atoms {
        add(m / (a - z));
    }
    for (a, b, pa, pb) in measure.segments() {
        let slope = (pb - pa) / (b - a);
        let pz = pa + (z - a) * slope;
        add(pz * ((b - z).ln() - (a - z).ln()) + slope * (b - a));
    }
    Ok(Complex64::new(re.value(), im.value()))
}

/// ∫ e^{−itx} dμ(x).
pub fn fourier_of_measure(measure: &Measure, t: f64) -> Complex64 {
    measure.exp_transform(Complex64::new(0.0, t))
}

/// ε-schedule and window for the Stieltjes inversion integrals.
#[derive(Debug, Clone, PartialEq)]
pub struct InversionOptions {
    pub epsilons: Vec<f64>,
    /// upper limit shift: the CDF is read at t + δ
    pub delta: f64,
    /// integration window; contributions outside it are O(ε) and removed
    /// by the extrapolation
    pub lower: f64,
    pub upper: f64,
    /// points where the measure is expected to concentrate
    pub breaks: Vec<f64>,
    pub policy: PrecisionPolicy,
    /// maximal accepted extrapolation error
    pub tolerance: f64,
}

impl Default for InversionOptions {
    fn default() -> Self {
        Self {
            epsilons: vec![1e-1, 1e-2, 1e-3],
            delta: 0.0,
            lower: -10.0,
            upper: 50.0,
            breaks: Vec::new(),
            policy: PrecisionPolicy::new(1e-10, 1e-8, 20_000).expect("valid constants"),
            tolerance: 1e-2,
        }
    }
}

impl InversionOptions {
    fn validate(&self) -> Result<()> {
        if self.epsilons.is_empty() || self.epsilons.iter().any(|&e| !(e > 0.0)) {
            return Err(invalid("epsilons", "need at least one positive epsilon"));
        }
        if !(self.upper > self.lower) {
            return Err(invalid("upper", "window must be nonempty"));
        }
        self.policy.validate()
    }

    fn panels(&self, a: f64, b: f64) -> Vec<f64> {
        let mut pts = vec![a];
        for &p in &self.breaks {
            if p > a && p < b {
                pts.push(p);
            }
        }
        pts.push(b);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}

/// A limit ε → 0 obtained by polynomial extrapolation of the schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extrapolated<T> {
    pub value: T,
    /// change when the largest ε is dropped
    pub error: f64,
}

fn neville_at_zero(xs: &[f64], ys: &[Complex64]) -> Complex64 {
    let mut p = ys.to_vec();
    let n = xs.len();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (p[i + 1] * xs[i] - p[i] * xs[i + k]) / (xs[i] - xs[i + k]);
        }
    }
    p[0]
}

fn extrapolate(eps: &[f64], vals: &[Complex64], tolerance: f64) -> Result<Extrapolated<Complex64>> {
    let value = neville_at_zero(eps, vals);
    let error = if eps.len() > 1 {
        // schedules are ordered from the largest ε
        (value - neville_at_zero(&eps[1..], &vals[1..])).norm()
    } else {
        f64::INFINITY
    };
    if !value.re.is_finite() || !value.im.is_finite() || !(error <= tolerance) {
        return Err(Error::NonConvergent(format!(
            "epsilon extrapolation changed by {error:e} (tolerance {tolerance:e})"
        )));
    }
    Ok(Extrapolated { value, error })
}

/// μ((−∞, t]) from a Stieltjes transform f: (1/π)∫^{t+δ} Im f(s + iε) ds,
/// extrapolated to ε = 0 along the schedule.
pub fn stieltjes_invert<F>(f: F, t: f64, opts: &InversionOptions) -> Result<Extrapolated<f64>>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    opts.validate()?;
    let top = t + opts.delta;
    if !(top > opts.lower) {
        return Ok(Extrapolated { value: 0.0, error: 0.0 });
    }
    let panels = opts.panels(opts.lower, top);
    let mut vals = Vec::with_capacity(opts.epsilons.len());
    for &eps in &opts.epsilons {
        let mut failure = None;
        let r = quad::integrate_with_breaks(
            |s| match f(Complex64::new(s, eps)) {
                Ok(v) => v.im,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            },
            &panels,
            &opts.policy,
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
        vals.push(Complex64::new(r.value / std::f64::consts::PI, 0.0));
    }
    let e = extrapolate(&opts.epsilons, &vals, opts.tolerance)?;
    Ok(Extrapolated {
        value: e.value.re,
        error: e.error,
    })
}

/// ∫ e^{−itω} dμ(ω) from a Stieltjes transform:
/// (1/π)∫ e^{−itω} Im f(ω + iε) dω, extrapolated to ε = 0.
pub fn stieltjes_to_fourier<F>(f: F, t: f64, opts: &InversionOptions) -> Result<Extrapolated<Complex64>>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    opts.validate()?;
    let panels = opts.panels(opts.lower, opts.upper);
    let mut vals = Vec::with_capacity(opts.epsilons.len());
    for &eps in &opts.epsilons {
        let mut failure = None;
        let r = quad::integrate_with_breaks(
            |s| match f(Complex64::new(s, eps)) {
                Ok(v) => Complex64::new(0.0, -t * s).exp() * v.im,
                Err(e) => {
                    failure.get_or_insert(e);
                    Complex64::new(0.0, 0.0)
                }
            },
            &panels,
            &opts.policy,
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
        vals.push(r.value / std::f64::consts::PI);
    }
    extrapolate(&opts.epsilons, &vals, opts.tolerance)
}

/// Point set, values and error estimates of a batch of transform evaluations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformReport {
    pub points: Vec<f64>,
    pub values: Vec<Complex64>,
    pub errors: Vec<f64>,
    pub truncation: Vec<String>,
}

/// Laplace transform of a state measure at several ρ.
pub fn laplace_report(measure: &StateMeasure, rhos: &[f64]) -> Result<TransformReport> {
    let mut rep = TransformReport {
        points: rhos.to_vec(),
        values: Vec::with_capacity(rhos.len()),
        errors: Vec::with_capacity(rhos.len()),
        truncation: Vec::new(),
    };
    for &rho in rhos {
        let v = laplace_of_measure(measure, rho)?;
        rep.values.push(Complex64::new(v.value, 0.0));
        rep.errors.push(v.tail_bound);
    }
    if measure.n_terms > 0 {
        rep.truncation.push(format!(
            "series cut after {} terms, remainder at most {:e} on the grid",
            measure.n_terms, measure.truncation_bound
        ));
    }
    rep.truncation.push(format!("grid ends at t = {}", measure.t_max()));
    Ok(rep)
}

/// Outcome of the divided-difference test at one order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderCheck {
    pub order: usize,
    /// min over windows of (−1)^k Δ_k divided by its scale Σ|terms|
    pub worst: f64,
    pub worst_index: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub tolerance: f64,
    pub orders: Vec<OrderCheck>,
    pub passed: bool,
}

impl MonotonicityReport {
    pub fn first_failure(&self) -> Option<&OrderCheck> {
        self.orders.iter().find(|o| !o.passed)
    }
}

/// Checks (−1)^k f[β_i, …, β_{i+k}] ≥ −tolerance · Σ|terms| for k ≤ max_order.
///
/// Each divided difference is evaluated in the explicit form
/// Σ_m f(β_m)/Π_{l≠m}(β_m − β_l) with compensated summation; its scale is
/// the sum of the absolute terms, so the verdict does not depend on a
/// positive factor in f. A tolerance below the attainable rounding level
/// of order k (about 4k machine epsilons) is rejected.
pub fn complete_monotonicity_check<F>(
    f: F,
    beta_grid: &[f64],
    max_order: usize,
    tolerance: f64,
) -> Result<MonotonicityReport>
where
    F: Fn(f64) -> Result<f64>,
{
    if max_order > 10 {
        return Err(invalid("max_order", "at most 10"));
    }
    if beta_grid.len() < max_order + 1 {
        return Err(invalid("beta_grid", "needs more points than max_order"));
    }
    if beta_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("beta_grid", "must be strictly increasing"));
    }
    if !(tolerance >= 0.0) {
        return Err(invalid("tolerance", "must be nonnegative"));
    }
    let values = beta_grid.iter().map(|&b| f(b)).collect::<Result<Vec<_>>>()?;
    let mut orders = Vec::with_capacity(max_order + 1);
    for k in 0..=max_order {
        if k > 0 && tolerance < 4.0 * k as f64 * f64::EPSILON {
            return Err(Error::RoundoffDominated { order: k });
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let mut worst = f64::INFINITY;
        let mut worst_index = 0;
        for i in 0..beta_grid.len() - k {
            let xs = &beta_grid[i..=i + k];
            let mut s = CompensatedSum::new();
            let mut scale = 0.0;
            for m in 0..=k {
                let denom: f64 = (0..=k).filter(|&l| l != m).map(|l| xs[m] - xs[l]).product();
                let term = values[i + m] / denom;
                s.add(term);
                scale += term.abs();
            }
            let normalized = if scale > 0.0 { sign * s.value() / scale } else { 0.0 };
            if normalized < worst {
                worst = normalized;
                worst_index = i;
            }
        }
        orders.push(OrderCheck {
            order: k,
            worst,
            worst_index,
            passed: worst >= -tolerance,
        });
    }
    let passed = orders.iter().all(|o| o.passed);
    Ok(MonotonicityReport {
        grid: beta_grid.to_vec(),
        values,
        tolerance,
        orders,
        passed,
    })
}
