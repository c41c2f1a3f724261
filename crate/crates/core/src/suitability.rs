//! Factorability checks: Kaiser-Meyer-Olkin sampling adequacy and
//! Bartlett's test of sphericity.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{invert_spd, log_determinant, SymMatrix};
use crate::special::chi_square_sf;

pub const DEFAULT_KMO_THRESHOLD: f64 = 0.6;
pub const DEFAULT_BARTLETT_ALPHA: f64 = 0.05;

/// Overall KMO measure of sampling adequacy for a correlation matrix.
///
/// Partial correlations come from the inverse correlation matrix:
/// `a_ij = -q_ij / sqrt(q_ii q_jj)`.
pub fn kmo(r: &SymMatrix) -> Result<f64> {
    let p = r.dim();
    if p < 2 {
        return Err(Error::validation("KMO needs at least 2 variables"));
    }
    let q = invert_spd(r)?;
    let mut sum_r2 = 0.0;
    let mut sum_a2 = 0.0;
    for i in 0..p {
        for j in 0..p {
            if i == j {
                continue;
            }
            let rij = r.get(i, j);
            let aij = -q.get(i, j) / (q.get(i, i) * q.get(j, j)).sqrt();
            sum_r2 += rij * rij;
            sum_a2 += aij * aij;
        }
    }
    if sum_r2 == 0.0 {
        return Err(Error::DegenerateCorrelation);
    }
    Ok((sum_r2 / (sum_r2 + sum_a2)).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bartlett {
    pub chi2: f64,
    pub df: u32,
    pub p: f64,
}

/// Bartlett's test that `r` is an identity matrix, given `n` observations.
pub fn bartlett_sphericity(r: &SymMatrix, n: usize) -> Result<Bartlett> {
    let p = r.dim();
    if n <= p {
        return Err(Error::validation(format!(
            "Bartlett test needs more observations than variables (n={n}, p={p})"
        )));
    }
    let ln_det = log_determinant(r)?;
    let factor = n as f64 - 1.0 - (2.0 * p as f64 + 5.0) / 6.0;
    // ln|R| <= 0 for a correlation matrix; clamp rounding noise at identity.
    let chi2 = (-factor * ln_det).max(0.0);
    let df = (p * (p - 1) / 2) as u32;
    let p_value = chi_square_sf(chi2, df as f64)?;
    Ok(Bartlett {
        chi2,
        df,
        p: p_value,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub kmo_min: f64,
    pub bartlett_alpha: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            kmo_min: DEFAULT_KMO_THRESHOLD,
            bartlett_alpha: DEFAULT_BARTLETT_ALPHA,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub kmo_pass: bool,
    pub bartlett_pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuitabilityReport {
    pub kmo: f64,
    pub bartlett: Bartlett,
    pub verdict: Verdict,
}

impl SuitabilityReport {
    pub fn passed(&self) -> bool {
        self.verdict.kmo_pass && self.verdict.bartlett_pass
    }
}

/// Runs both tests and applies the pass thresholds.
pub fn assess(r: &SymMatrix, n: usize, thresholds: Thresholds) -> Result<SuitabilityReport> {
    let kmo = kmo(r)?;
    let bartlett = bartlett_sphericity(r, n)?;
    Ok(SuitabilityReport {
        kmo,
        bartlett,
        verdict: Verdict {
            kmo_pass: kmo >= thresholds.kmo_min,
            bartlett_pass: bartlett.p < thresholds.bartlett_alpha,
        },
    })
}

/// Human-readable p-value; anything below 1e-4 prints as `<0.0001`.
pub fn format_p_value(p: f64) -> String {
    if p < 1e-4 {
        "<0.0001".to_string()
    } else {
        format!("{p:.4}")
    }
}

impl fmt::Display for SuitabilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = |ok: bool| if ok { "pass" } else { "FAIL" };
        writeln!(
            f,
            "Kaiser-Meyer-Olkin measure of sampling adequacy  {:.3}  [{}]",
            self.kmo,
            mark(self.verdict.kmo_pass)
        )?;
        writeln!(f, "Bartlett's test of sphericity")?;
        writeln!(f, "  approx. chi-square  {:.3}", self.bartlett.chi2)?;
        writeln!(f, "  df                  {}", self.bartlett.df)?;
        write!(
            f,
            "  sig.                {}  [{}]",
            format_p_value(self.bartlett.p),
            mark(self.verdict.bartlett_pass)
        )
    }
}
