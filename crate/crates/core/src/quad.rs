//! Quadrature rules: Gauss–Legendre nodes and adaptive Gauss–Kronrod.

use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Tolerances for adaptive routines.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PrecisionPolicy {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_refinements: usize,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-12,
            max_refinements: 2000,
        }
    }
}

impl PrecisionPolicy {
    pub fn new(abs_tol: f64, rel_tol: f64, max_refinements: usize) -> Result<Self> {
        let p = Self {
            abs_tol,
            rel_tol,
            max_refinements,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(invalid("policy", "tolerances must be positive"));
        }
        if self.max_refinements < 1 {
            return Err(invalid("policy", "max_refinements must be at least 1"));
        }
        Ok(())
    }

    /// Looser settings for quick runs.
    pub fn fast() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-9,
            max_refinements: 500,
        }
    }

    pub fn strict() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-13,
            max_refinements: 5000,
        }
    }
}

/// Values that can be integrated: reals and complex numbers.
pub trait Integrand:
    Copy + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl Integrand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Integrand for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// Fixed Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on P_n, ascending order.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (c + h * x, h * w))
    }

    pub fn integrate<T: Integrand, F: FnMut(f64) -> T>(&self, a: f64, b: f64, mut f: F) -> T {
        let mut acc = T::zero();
        for (x, w) in self.mapped(a, b) {
            acc = acc + f(x) * w;
        }
        acc
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p, d)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<T: Integrand, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron = kron + s * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + s * WG[j / 2];
        }
    }
    let kron = kron * h;
    let gauss = gauss * h;
    (kron, (kron - gauss).magnitude())
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub subdivisions: usize,
}

struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Segment<T> {}
impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive Gauss–Kronrod (7, 15) integration over `[a, b]`.
pub fn integrate<T: Integrand, F: FnMut(f64) -> T>(
    f: F,
    a: f64,
    b: f64,
    policy: &PrecisionPolicy,
) -> Result<QuadResult<T>> {
    integrate_with_breaks(f, &[a, b], policy)
}

/// Like [`integrate`] but starts from the panels delimited by `points`
/// (sorted, at least two entries). Integrable kinks belong here.
pub fn integrate_with_breaks<T: Integrand, F: FnMut(f64) -> T>(
    mut f: F,
    points: &[f64],
    policy: &PrecisionPolicy,
) -> Result<QuadResult<T>> {
    if points.len() < 2 {
        return Err(invalid("points", "need at least two break points"));
    }
    let mut heap = BinaryHeap::new();
    for w in points.windows(2) {
        if w[1] == w[0] {
            continue;
        }
        let (value, error) = gk15(&mut f, w[0], w[1]);
        heap.push(Segment {
            a: w[0],
            b: w[1],
            value,
            error,
        });
    }
    let mut subdivisions = 0;
    loop {
        let (total, err) = sum_segments(&heap);
        let target = policy.abs_tol.max(policy.rel_tol * total.magnitude());
        if err <= target {
            return Ok(QuadResult {
                value: total,
                error: err,
                subdivisions,
            });
        }
        if subdivisions >= policy.max_refinements {
            return Err(Error::QuadratureNotConverged {
                subdivisions,
                error: err,
            });
        }
        let Some(worst) = heap.pop() else {
            return Ok(QuadResult {
                value: total,
                error: err,
                subdivisions,
            });
        };
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a.min(worst.b) || m >= worst.a.max(worst.b) {
            // interval cannot be split further in floating point
            return Err(Error::QuadratureNotConverged {
                subdivisions,
                error: err,
            });
        }
        let (v1, e1) = gk15(&mut f, worst.a, m);
        let (v2, e2) = gk15(&mut f, m, worst.b);
        heap.push(Segment {
            a: worst.a,
            b: m,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: m,
            b: worst.b,
            value: v2,
            error: e2,
        });
        subdivisions += 1;
    }
}

fn sum_segments<T: Integrand>(heap: &BinaryHeap<Segment<T>>) -> (T, f64) {
    // Sorted by left endpoint so the result does not depend on heap layout.
    let mut segs: Vec<&Segment<T>> = heap.iter().collect();
    segs.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut total = T::zero();
    let mut err = 0.0;
    for s in segs {
        total = total + s.value;
        err += s.error;
    }
    (total, err)
}
