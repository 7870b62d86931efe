use std::collections::HashSet;

use super::ImageSet;
use crate::error::{Error, Result};
use crate::fit::fit_line;

/// Lyapunov spectrum of the continuous map and the derived dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumAnalytics {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    /// Kaplan-Yorke dimension `1 + lambda_plus / |lambda_minus|`.
    pub d_ky: f64,
}

/// The map is affine, so its Jacobian `[[2, 1/2], [1, 1/2]]` is constant and
/// the exponents are the logarithms of its eigenvalues `(5 ± √17) / 4`.
pub fn lyapunov_analytics() -> SpectrumAnalytics {
    let root = 17f64.sqrt();
    let lambda_plus = ((5.0 + root) / 4.0).ln();
    let lambda_minus = ((5.0 - root) / 4.0).ln();
    SpectrumAnalytics {
        lambda_plus,
        lambda_minus,
        d_ky: 1.0 + lambda_plus / lambda_minus.abs(),
    }
}

/// Box-counting fit over dyadic scales.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxCountEstimate {
    pub dimension: f64,
    pub intercept: f64,
    /// RMS residual of the log-log fit.
    pub residual: f64,
    /// `(m, occupied boxes of side 2^-m)` for every scale used.
    pub counts: Vec<(u32, usize)>,
}

/// Slope of `ln(occupied boxes)` against `ln(1/side)` for boxes of side
/// `2^-m` in `x` (the `y` range of length 2 holds `2^(m+1)` rows of boxes).
pub fn box_counting_dimension(image: &ImageSet, scales: &[u32]) -> Result<BoxCountEstimate> {
    if image.is_empty() {
        return Err(Error::Domain("box counting needs a non-empty image".into()));
    }
    let mut distinct: Vec<u32> = scales.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::Domain(format!(
            "box counting needs at least 3 distinct scales, got {}",
            distinct.len()
        )));
    }
    let n_q = image.n_q();
    if let Some(&m) = distinct.iter().find(|&&m| m > n_q) {
        return Err(Error::Domain(format!(
            "scale m={m} is finer than the lattice (n_q={n_q})"
        )));
    }
    let mut counts = Vec::with_capacity(distinct.len());
    for &m in &distinct {
        let shift = n_q - m;
        let boxes: HashSet<(u32, u32)> = image
            .points()
            .iter()
            .map(|p| (p.i >> shift, p.j >> shift))
            .collect();
        counts.push((m, boxes.len()));
    }
    let xs: Vec<f64> = counts.iter().map(|&(m, _)| m as f64 * std::f64::consts::LN_2).collect();
    let ys: Vec<f64> = counts.iter().map(|&(_, c)| (c as f64).ln()).collect();
    let fit = fit_line(&xs, &ys).expect("three distinct scales always fit");
    Ok(BoxCountEstimate {
        dimension: fit.slope,
        intercept: fit.intercept,
        residual: fit.residual,
        counts,
    })
}
