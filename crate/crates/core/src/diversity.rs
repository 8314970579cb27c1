//! Diversity order from the high-SNR slope of a BER curve.

use crate::engine::{BerCurve, BerPoint};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SlopeEstimate {
    /// `-10 * d log10(ber) / d snr_db`.
    pub diversity: f64,
    /// SNR span of the fitted points.
    pub window: (f64, f64),
    /// RMS residual of the fit in decades.
    pub residual: f64,
    pub points: usize,
}

/// Least-squares line through `(snr_db, log10 ber)`.
fn fit(points: &[&BerPoint]) -> Result<SlopeEstimate> {
    if points.len() < 3 {
        return Err(Error::InsufficientPoints(points.len()));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.snr_db).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.ber.log10()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientPoints(1));
    }
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(SlopeEstimate { diversity: -10.0 * slope, window: (lo, hi), residual: (rss / n).sqrt(), points: points.len() })
}

/// Fit over the points inside an SNR window with `0 < ber < 0.1`.
///
/// Without a window, the lowest-BER run of 3 to 5 consecutive points with
/// `ber` in `[10 / bits_simulated, 1e-2]` is used.
pub fn estimate_diversity(curve: &BerCurve, window: Option<(f64, f64)>) -> Result<SlopeEstimate> {
    match window {
        Some((lo, hi)) => {
            let pts: Vec<&BerPoint> =
                curve.points.iter().filter(|p| p.snr_db >= lo && p.snr_db <= hi && p.ber > 0.0 && p.ber < 0.1).collect();
            fit(&pts)
        }
        None => {
            let ok = |p: &BerPoint| p.bits_simulated > 0 && p.ber >= 10.0 / p.bits_simulated as f64 && p.ber <= 1e-2;
            // last maximal run of eligible points, trimmed to its 5 deepest
            let mut best: Option<(usize, usize)> = None;
            let mut start = None;
            for (i, p) in curve.points.iter().enumerate() {
                match (ok(p), start) {
                    (true, None) => start = Some(i),
                    (false, Some(s)) => {
                        if i - s >= 3 {
                            best = Some((s, i));
                        }
                        start = None;
                    }
                    _ => {}
                }
            }
            if let Some(s) = start {
                if curve.points.len() - s >= 3 {
                    best = Some((s, curve.points.len()));
                }
            }
            let (s, e) = best.ok_or(Error::InsufficientPoints(0))?;
            let s = s.max(e.saturating_sub(5));
            fit(&curve.points[s..e].iter().collect::<Vec<_>>())
        }
    }
}

/// Fit over every point whose BER lies in `[lo, hi]`.
pub fn estimate_diversity_in_band(curve: &BerCurve, lo: f64, hi: f64) -> Result<SlopeEstimate> {
    fit(&curve.points.iter().filter(|p| p.ber >= lo && p.ber <= hi).collect::<Vec<_>>())
}
