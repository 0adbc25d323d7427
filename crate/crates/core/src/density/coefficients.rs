//! Exact coefficients c_{jn} and c̃_{jn} of the pole expansion of g^{*n}.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// c_{j1} = c̃_{j1} = 3/j, c_{j,n+1} = Σ_{k<j} c_{k1} c_{j−k,n},
/// c̃_{j,n+1} = −Σ_{k<j} c̃_{k1} c̃_{j−k,n}.
///
/// Indices are one-based in the accessors; entries with n > j vanish.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    pub j_max: usize,
    /// c[j−1][n−1] for 1 ≤ n ≤ j
    pub c: Vec<Vec<BigRational>>,
    pub c_tilde: Vec<Vec<BigRational>>,
    /// Σ_n c_{jn}/n!
    pub row_sums: Vec<BigRational>,
    /// Σ_n c̃_{jn}/n!
    pub tilde_row_sums: Vec<BigRational>,
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn coefficient_table(j_max: usize) -> Result<CoefficientTable> {
    if j_max < 1 {
        return Err(invalid("j_max", "must be at least 1"));
    }
    let first: Vec<BigRational> = (1..=j_max).map(|j| rat(3, j as i64)).collect();
    let mut c: Vec<Vec<BigRational>> = first.iter().map(|v| vec![v.clone()]).collect();
    let mut ct = c.clone();
    for n in 1..j_max {
        // fill column n+1 for all j > n
        for j in (n + 1)..=j_max {
            let mut s = BigRational::zero();
            let mut st = BigRational::zero();
            for k in 1..j {
                if j - k >= n {
                    s += &first[k - 1] * &c[j - k - 1][n - 1];
                    st += &first[k - 1] * &ct[j - k - 1][n - 1];
                }
            }
            c[j - 1].push(s);
            ct[j - 1].push(-st);
        }
    }
    let mut table = CoefficientTable {
        j_max,
        c,
        c_tilde: ct,
        row_sums: Vec::new(),
        tilde_row_sums: Vec::new(),
    };
    table.recompute_row_sums();
    Ok(table)
}

fn factorial_weighted_sum(row: &[BigRational]) -> BigRational {
    let mut fact = BigInt::one();
    let mut s = BigRational::zero();
    for (i, v) in row.iter().enumerate() {
        fact *= BigInt::from(i + 1);
        s += v / BigRational::from_integer(fact.clone());
    }
    s
}

impl CoefficientTable {
    pub fn c(&self, j: usize, n: usize) -> BigRational {
        self.entry(&self.c, j, n)
    }

    pub fn c_tilde(&self, j: usize, n: usize) -> BigRational {
        self.entry(&self.c_tilde, j, n)
    }

    fn entry(&self, t: &[Vec<BigRational>], j: usize, n: usize) -> BigRational {
        assert!((1..=self.j_max).contains(&j) && n >= 1, "index out of range");
        t[j - 1].get(n - 1).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn recompute_row_sums(&mut self) {
        self.row_sums = self.c.iter().map(|r| factorial_weighted_sum(r)).collect();
        self.tilde_row_sums = self.c_tilde.iter().map(|r| factorial_weighted_sum(r)).collect();
    }

    /// First row j (one-based) where an identity fails, if any.
    ///
    /// Identities: Σ_n c_{jn}/n! = binomial(j+2, 2) and the tilde sums equal
    /// (3, −3, 1, 0, 0, …).
    pub fn first_identity_violation(&self) -> Option<usize> {
        (1..=self.j_max).find(|&j| {
            self.row_sums[j - 1] != BigRational::from_integer(BigInt::from(binomial_row(j)))
                || self.tilde_row_sums[j - 1] != tilde_target(j)
        })
    }

    /// Largest |row sum − target| as f64, zero when all identities hold.
    pub fn max_identity_defect(&self) -> f64 {
        use num_traits::ToPrimitive;
        (1..=self.j_max)
            .map(|j| {
                let a = (&self.row_sums[j - 1] - BigRational::from_integer(BigInt::from(binomial_row(j)))).abs();
                let b = (&self.tilde_row_sums[j - 1] - tilde_target(j)).abs();
                a.to_f64().unwrap_or(f64::INFINITY).max(b.to_f64().unwrap_or(f64::INFINITY))
            })
            .fold(0.0, f64::max)
    }

    pub fn to_export(&self) -> CoefficientExport {
        CoefficientExport {
            j_max: self.j_max,
            c: self.c.iter().map(|r| r.iter().map(|v| v.to_string()).collect()).collect(),
            c_tilde: self
                .c_tilde
                .iter()
                .map(|r| r.iter().map(|v| v.to_string()).collect())
                .collect(),
            row_sums: self.row_sums.iter().map(|v| v.to_string()).collect(),
            tilde_row_sums: self.tilde_row_sums.iter().map(|v| v.to_string()).collect(),
        }
    }
}

/// Rationals rendered as "p/q" strings for serialization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoefficientExport {
    pub j_max: usize,
    pub c: Vec<Vec<String>>,
    pub c_tilde: Vec<Vec<String>>,
    pub row_sums: Vec<String>,
    pub tilde_row_sums: Vec<String>,
}

/// binomial(j+2, 2), the mass of the j-th line.
pub fn binomial_row(j: usize) -> u64 {
    let j = j as u64;
    (j + 1) * (j + 2) / 2
}

/// (−1)^{j+1} binomial(3, j)
fn tilde_target(j: usize) -> BigRational {
    let v = match j {
        1 => 3,
        2 => -3,
        3 => 1,
        _ => 0,
    };
    BigRational::from_integer(BigInt::from(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computed_entries() {
        let t = coefficient_table(4).unwrap();
        assert_eq!(t.c(2, 2), rat(9, 1));
        assert_eq!(t.c(3, 3), rat(27, 1));
        assert_eq!(t.c_tilde(2, 2), rat(-9, 1));
        assert_eq!(t.c(2, 3), rat(0, 1));
        // c_{3,2} = c_{11}c_{21} + c_{21}c_{11} = 2 · 3 · 3/2
        assert_eq!(t.c(3, 2), rat(9, 1));
        assert_eq!(t.row_sums[1], rat(6, 1));
        assert_eq!(t.row_sums[2], rat(10, 1));
        assert_eq!(t.tilde_row_sums[1], rat(-3, 1));
    }

    #[test]
    fn identities_hold_exactly() {
        let t = coefficient_table(30).unwrap();
        assert_eq!(t.first_identity_violation(), None);
        assert_eq!(t.max_identity_defect(), 0.0);
    }

    #[test]
    fn perturbation_is_detected() {
        let mut t = coefficient_table(5).unwrap();
        t.c[1][0] += rat(1, 1_000_000);
        t.recompute_row_sums();
        assert_eq!(t.first_identity_violation(), Some(2));
        assert!(t.max_identity_defect() > 0.0);
    }
}
