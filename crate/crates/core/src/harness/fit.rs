//! Least-squares order fits on log-log data.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

use super::config::NormKind;
use super::sweep::ErrorRecord;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderFit {
    pub slope: f64,
    /// Intercept of `log err = slope log x + intercept`.
    pub intercept: f64,
    /// Root mean square of the log residuals; large values flag a curve that is not a power law.
    pub residual: f64,
    pub points: usize,
}

/// Ordinary least squares of `ln y` against `ln x`.
pub fn fit_order(points: &[(f64, f64)]) -> Result<OrderFit> {
    if points.len() < 3 {
        return Err(Error::InvalidParameter(format!("need at least 3 points, got {}", points.len())));
    }
    if let Some(p) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())) {
        return Err(Error::InvalidParameter(format!("log-log fit needs positive finite data, got {p:?}")));
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("all abscissae coincide".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (lx.iter().zip(&ly).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum::<f64>() / n).sqrt();
    Ok(OrderFit { slope, intercept, residual, points: points.len() })
}

pub fn record_error(r: &ErrorRecord, norm: NormKind) -> Option<f64> {
    match norm {
        NormKind::Abs => r.err_abs,
        NormKind::Mod => r.err_mod,
        NormKind::H1 => r.err_h1,
    }
}

/// `(dt, max over eps of the error)`, sorted by decreasing `dt`.
pub fn uniform_envelope(records: &[ErrorRecord], norm: NormKind) -> Vec<(f64, f64)> {
    let mut m: BTreeMap<u64, f64> = BTreeMap::new();
    for r in records {
        if let Some(e) = record_error(r, norm) {
            let slot = m.entry(r.dt.to_bits()).or_insert(0.0);
            *slot = slot.max(e);
        }
    }
    let mut v: Vec<(f64, f64)> = m.into_iter().map(|(k, e)| (f64::from_bits(k), e)).collect();
    v.sort_by(|a, b| b.0.total_cmp(&a.0));
    v
}

/// `eps -> [(dt, error)]`, both sorted decreasingly.
pub fn per_eps_curves(records: &[ErrorRecord], norm: NormKind) -> Vec<(f64, Vec<(f64, f64)>)> {
    let mut m: BTreeMap<u64, Vec<(f64, f64)>> = BTreeMap::new();
    for r in records {
        if let Some(e) = record_error(r, norm) {
            m.entry(r.eps.to_bits()).or_default().push((r.dt, e));
        }
    }
    let mut v: Vec<(f64, Vec<(f64, f64)>)> = m
        .into_iter()
        .map(|(k, mut c)| {
            c.sort_by(|a, b| b.0.total_cmp(&a.0));
            (f64::from_bits(k), c)
        })
        .collect();
    v.sort_by(|a, b| b.0.total_cmp(&a.0));
    v
}

pub fn fit_uniform(records: &[ErrorRecord], norm: NormKind) -> Result<OrderFit> {
    fit_order(&uniform_envelope(records, norm))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let pts: Vec<(f64, f64)> = (4..=10).map(|k| 2f64.powi(-k)).map(|dt| (dt, 3.0 * dt * dt)).collect();
        let f = fit_order(&pts).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-10);
        assert!(f.residual < 1e-12);
    }

    #[test]
    fn floor_lowers_slope_and_shows_in_residual() {
        let pts: Vec<(f64, f64)> =
            (4..=14).map(|k| 2f64.powi(-k)).map(|dt| (dt, 1e-6 * dt * dt + 1e-14)).collect();
        let f = fit_order(&pts).unwrap();
        assert!(f.slope < 2.0 - 1e-3);
        assert!(f.residual > 1e-2, "{f:?}");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_order(&[(1.0, 1.0), (0.5, 0.5)]).is_err());
        assert!(fit_order(&[(1.0, 1.0), (0.5, 0.0), (0.25, 0.1)]).is_err());
        assert!(fit_order(&[(1.0, 1.0), (1.0, 0.5), (1.0, 0.1)]).is_err());
    }
}
