//! Closed-form gap and tail-bound calculators.

use std::collections::BTreeMap;
use std::f64::consts::LOG2_E;

use crate::error::{Error, Result};

/// Capacity, rate and gap figures plus the named terms that make up the gap.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GapReport {
    pub capacity: Option<f64>,
    pub rate: Option<f64>,
    pub gap: f64,
    pub terms: BTreeMap<String, f64>,
}

impl GapReport {
    pub fn from_terms(terms: impl IntoIterator<Item = (&'static str, f64)>) -> Self {
        let terms: BTreeMap<String, f64> = terms.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        let gap = terms.values().sum();
        Self { capacity: None, rate: None, gap, terms }
    }

    /// Attaches a capacity and sets `rate = capacity - gap`.
    pub fn with_capacity(mut self, capacity: f64) -> Self {
        self.capacity = Some(capacity);
        self.rate = Some(capacity - self.gap);
        self
    }

    pub fn term(&self, name: &str) -> Option<f64> {
        self.terms.get(name).copied()
    }
}

/// Bin-edge bound for continuous fading with full CSI: `gamma_1` is the
/// worst-bin loss from rounding gains down to the bin edge, `gamma_2` the
/// loss from the unbounded top bin. `edges` are gain thresholds `g_0 = 0 < ... < g_L`.
pub fn gap_csit_continuous(mean_gain: f64, rho: f64, edges: &[f64]) -> Result<GapReport> {
    if edges.len() < 2 || edges[0] != 0.0 {
        return Err(Error::InvalidParameter("edges must start at 0 and contain g_L".into()));
    }
    if edges.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("edges must be strictly increasing".into()));
    }
    if !(mean_gain > 0.0) || !(rho > 0.0) {
        return Err(Error::InvalidParameter("mean gain and rho must be positive".into()));
    }
    let gamma1 = edges.windows(2).map(|w| (1.0 + rho * (w[1] - w[0])).log2()).fold(0.0, f64::max);
    let gamma2 = LOG2_E * mean_gain / edges[edges.len() - 1];
    Ok(GapReport::from_terms([("gamma1", gamma1), ("gamma2", gamma2)]))
}

/// Exponential-law replacement for `gamma_2`: `log2(e) (E/g_L) e^{-g_L/E}`.
pub fn gap_rayleigh_csit(mean_gain: f64, g_top: f64) -> Result<f64> {
    if !(mean_gain > 0.0) || !(g_top > 0.0) {
        return Err(Error::InvalidParameter("arguments must be positive".into()));
    }
    Ok(LOG2_E * mean_gain / g_top * (-g_top / mean_gain).exp())
}

/// Chernoff bound `e^{-(n/2)(eps - ln(1+eps))}` on `P(chi2_n > (1+eps) n)`.
pub fn chernoff_chisq_tail(n: usize, eps: f64) -> Result<f64> {
    if !(eps > 0.0) || n == 0 {
        return Err(Error::InvalidParameter(format!("need eps > 0 and n >= 1 (got {eps}, {n})")));
    }
    Ok((-(n as f64 / 2.0) * (eps - eps.ln_1p())).exp())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverflowGap {
    /// `(n_out / n) log2(1 + P* h^2)` at the strongest state.
    pub leading: f64,
    /// Caller-supplied `o(n)/n`.
    pub sublinear: f64,
    /// Set when `sublinear` was left at its asymptotic default of zero.
    pub sublinear_asymptotic: bool,
}

impl OverflowGap {
    pub fn total(&self) -> f64 {
        self.leading + self.sublinear
    }
}

/// Rate loss from overflow slots in the best-effort permutation.
pub fn overflow_gap(n: usize, n_out: usize, peak_snr: f64, sublinear: Option<f64>) -> Result<OverflowGap> {
    if n == 0 || n_out > n {
        return Err(Error::InvalidParameter(format!("need n_out <= n, n >= 1 (got {n_out}, {n})")));
    }
    if !(peak_snr >= 0.0) {
        return Err(Error::InvalidParameter("peak SNR must be nonnegative".into()));
    }
    Ok(OverflowGap {
        leading: n_out as f64 / n as f64 * (1.0 + peak_snr).log2(),
        sublinear: sublinear.unwrap_or(0.0),
        sublinear_asymptotic: sublinear.is_none(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csit_continuous_examples() {
        let edges: Vec<f64> = (0..=10).map(|i| 0.5 * i as f64).collect();
        let r = gap_csit_continuous(1.0, 10.0, &edges).unwrap();
        assert!((r.term("gamma1").unwrap() - 6f64.log2()).abs() < 1e-12);
        assert!((r.term("gamma2").unwrap() - LOG2_E / 5.0).abs() < 1e-12);
        assert!((r.gap - 6f64.log2() - LOG2_E / 5.0).abs() < 1e-12);

        let r = gap_csit_continuous(1.0, 1.0, &[0.0, 100.0]).unwrap();
        assert!((r.term("gamma2").unwrap() - 0.01443).abs() < 1e-5);

        assert!(gap_csit_continuous(1.0, 1.0, &[0.0, 2.0, 1.0]).is_err());
        assert!(gap_csit_continuous(1.0, 1.0, &[0.5, 1.0]).is_err());
    }

    #[test]
    fn csit_gap_vanishes_with_fine_wide_grid() {
        let mut last = f64::INFINITY;
        for k in [2usize, 4, 8, 16] {
            // spacing 1/k^2 up to g_L = k^2
            let edges: Vec<f64> = (0..=k.pow(4)).map(|i| i as f64 / (k * k) as f64).collect();
            let r = gap_csit_continuous(1.0, 1.0, &edges).unwrap();
            assert!(r.gap < last);
            last = r.gap;
        }
        assert!(last < 0.015);
    }

    #[test]
    fn rayleigh_term() {
        let v = gap_rayleigh_csit(1.0, 5.0).unwrap();
        assert!((v - LOG2_E * 0.2 * (-5f64).exp()).abs() < 1e-15);
        assert!((v - 1.944e-3).abs() < 1e-6);
        for e in [0.5, 1.0, 3.0] {
            for g in [0.1, 1.0, 10.0, 50.0] {
                assert!(gap_rayleigh_csit(e, g).unwrap() <= LOG2_E * e / g);
            }
        }
        assert!(gap_rayleigh_csit(1.0, 800.0).unwrap() == 0.0);
    }

    #[test]
    fn chernoff_examples() {
        let v = chernoff_chisq_tail(1000, 0.2).unwrap();
        assert!((v / 1.45e-4 - 1.0).abs() < 0.01);
        assert!(chernoff_chisq_tail(10, 1e-9).unwrap() > 0.999_999);
        assert!(chernoff_chisq_tail(200, 0.2).unwrap() < chernoff_chisq_tail(100, 0.2).unwrap());
        assert!(chernoff_chisq_tail(100, 0.3).unwrap() < chernoff_chisq_tail(100, 0.2).unwrap());
        assert!(chernoff_chisq_tail(100, 0.0).is_err());
    }

    #[test]
    fn overflow_gap_examples() {
        let g = overflow_gap(10_000, 100, 15.0, None).unwrap();
        assert!((g.leading - 0.04).abs() < 1e-12);
        assert!(g.sublinear_asymptotic);
        let z = overflow_gap(100, 0, 15.0, Some(0.003)).unwrap();
        assert_eq!(z.total(), 0.003);
        let half = overflow_gap(10_000, 50, 15.0, None).unwrap();
        assert!((half.leading * 2.0 - g.leading).abs() < 1e-15);
        assert!(overflow_gap(10, 11, 1.0, None).is_err());
    }
}
