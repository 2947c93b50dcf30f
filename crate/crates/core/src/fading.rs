//! Fading laws, block-fading sequence generation and typicality tools.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, SimRng};

const PROB_SUM_TOL: f64 = 1e-12;
const INTEGRALITY_TOL: f64 = 1e-9;

/// Finite-support fading law. Support points are kept sorted by magnitude,
/// negative value first when two magnitudes tie.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteFadingDistribution {
    support: Vec<f64>,
    probs: Vec<f64>,
    cdf: Vec<f64>,
}

impl DiscreteFadingDistribution {
    pub fn new(support: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        if support.len() != probs.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} support values but {} probabilities",
                support.len(),
                probs.len()
            )));
        }
        if support.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDistribution("non-finite support value".into()));
        }
        if probs.iter().any(|&p| !(p >= 0.0 && p.is_finite())) {
            return Err(Error::InvalidDistribution("negative probability".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidDistribution(format!("probabilities sum to {total}")));
        }
        let mut pairs: Vec<(f64, f64)> = support.into_iter().zip(probs).collect();
        pairs.sort_by(|a, b| {
            a.0.abs()
                .partial_cmp(&b.0.abs())
                .unwrap()
                .then(a.0.partial_cmp(&b.0).unwrap())
        });
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidDistribution("repeated support value".into()));
        }
        let (support, probs): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let mut acc = 0.0;
        let cdf = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(Self { support, probs, cdf })
    }

    /// `count` uniformly spaced values on `[lo, hi]`, each with probability `1/count`.
    pub fn uniform_grid(count: usize, lo: f64, hi: f64) -> Result<Self> {
        if count == 0 || !(hi >= lo) {
            return Err(Error::InvalidDistribution("bad uniform grid".into()));
        }
        let support = if count == 1 {
            vec![lo]
        } else {
            let step = (hi - lo) / (count - 1) as f64;
            (0..count).map(|i| lo + step * i as f64).collect()
        };
        Self::new(support, vec![1.0 / count as f64; count])
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// Smallest nonzero probability.
    pub fn min_prob(&self) -> f64 {
        self.probs.iter().copied().filter(|&p| p > 0.0).fold(f64::INFINITY, f64::min)
    }

    /// Index of `value` in the sorted support.
    pub fn index_of(&self, value: f64) -> Option<usize> {
        self.support.iter().position(|&s| s == value)
    }

    fn draw(&self, rng: &mut SimRng) -> f64 {
        let u: f64 = rng.random();
        let idx = self.cdf.iter().position(|&c| u < c).unwrap_or(self.len() - 1);
        self.support[idx]
    }
}

/// Rayleigh magnitude law: `|h|^2` is exponential with the given mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayleighFading {
    mean_square_gain: f64,
}

impl RayleighFading {
    pub fn new(mean_square_gain: f64) -> Result<Self> {
        if !(mean_square_gain > 0.0 && mean_square_gain.is_finite()) {
            return Err(Error::InvalidParameter("mean square gain must be positive".into()));
        }
        Ok(Self { mean_square_gain })
    }

    pub fn unit() -> Self {
        Self { mean_square_gain: 1.0 }
    }

    pub fn mean_square_gain(&self) -> f64 {
        self.mean_square_gain
    }

    /// `P(|h| <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -(-x * x / self.mean_square_gain).exp_m1()
        }
    }

    /// Inverse of [`RayleighFading::cdf`].
    pub fn quantile(&self, p: f64) -> f64 {
        (-self.mean_square_gain * (-p).ln_1p()).sqrt()
    }

    fn draw(&self, rng: &mut SimRng) -> f64 {
        // 1 - u lies in (0, 1]
        let u: f64 = 1.0 - rng.random::<f64>();
        (-self.mean_square_gain * u.ln()).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FadingLaw {
    Discrete(DiscreteFadingDistribution),
    Rayleigh(RayleighFading),
}

impl FadingLaw {
    pub fn draw(&self, rng: &mut SimRng) -> f64 {
        match self {
            FadingLaw::Discrete(d) => d.draw(rng),
            FadingLaw::Rayleigh(r) => r.draw(rng),
        }
    }

    pub fn as_discrete(&self) -> Option<&DiscreteFadingDistribution> {
        match self {
            FadingLaw::Discrete(d) => Some(d),
            FadingLaw::Rayleigh(_) => None,
        }
    }
}

/// Fading law plus coherence length and antenna counts `(M, N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockFadingProcess {
    pub law: FadingLaw,
    pub coherence: usize,
    pub tx_antennas: usize,
    pub rx_antennas: usize,
}

impl BlockFadingProcess {
    pub fn siso(law: FadingLaw, coherence: usize) -> Self {
        Self { law, coherence, tx_antennas: 1, rx_antennas: 1 }
    }

    pub fn mimo(law: FadingLaw, coherence: usize, tx_antennas: usize, rx_antennas: usize) -> Self {
        Self { law, coherence, tx_antennas, rx_antennas }
    }

    fn blocks_for(&self, n: usize) -> Result<usize> {
        if self.coherence == 0 || !n.is_multiple_of(self.coherence) {
            return Err(Error::CoherenceMismatch { n, b: self.coherence });
        }
        Ok(n / self.coherence)
    }
}

/// One codeword's worth of channel states.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelRealization {
    Siso { coeffs: Vec<f64>, coherence: usize },
    /// `N x M` matrices, one per channel use.
    Mimo { matrices: Vec<DMatrix<f64>>, coherence: usize },
}

impl ChannelRealization {
    pub fn len(&self) -> usize {
        match self {
            ChannelRealization::Siso { coeffs, .. } => coeffs.len(),
            ChannelRealization::Mimo { matrices, .. } => matrices.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn coherence(&self) -> usize {
        match self {
            ChannelRealization::Siso { coherence, .. } | ChannelRealization::Mimo { coherence, .. } => *coherence,
        }
    }

    pub fn coeffs(&self) -> Option<&[f64]> {
        match self {
            ChannelRealization::Siso { coeffs, .. } => Some(coeffs),
            ChannelRealization::Mimo { .. } => None,
        }
    }

    /// Per-use matrices; a SISO realization is viewed as `1 x 1` matrices.
    pub fn matrices(&self) -> Vec<DMatrix<f64>> {
        match self {
            ChannelRealization::Siso { coeffs, .. } => {
                coeffs.iter().map(|&h| DMatrix::from_element(1, 1, h)).collect()
            }
            ChannelRealization::Mimo { matrices, .. } => matrices.clone(),
        }
    }
}

/// `n / b` independent draws, each held for `b` channel uses.
pub fn sample_block_fading(process: &BlockFadingProcess, n: usize, seed: u64) -> Result<ChannelRealization> {
    let blocks = process.blocks_for(n)?;
    let mut rng = rng_from_seed(seed);
    let mut coeffs = Vec::with_capacity(n);
    for _ in 0..blocks {
        let h = process.law.draw(&mut rng);
        coeffs.extend(std::iter::repeat_n(h, process.coherence));
    }
    Ok(ChannelRealization::Siso { coeffs, coherence: process.coherence })
}

/// Block-fading matrices with i.i.d. entries; entries are drawn row-major.
pub fn sample_mimo_block_fading(process: &BlockFadingProcess, n: usize, seed: u64) -> Result<ChannelRealization> {
    let blocks = process.blocks_for(n)?;
    let (m, nr) = (process.tx_antennas, process.rx_antennas);
    if m == 0 || nr == 0 {
        return Err(Error::InvalidParameter("antenna counts must be positive".into()));
    }
    let mut rng = rng_from_seed(seed);
    let mut matrices = Vec::with_capacity(n);
    for _ in 0..blocks {
        let entries: Vec<f64> = (0..m * nr).map(|_| process.law.draw(&mut rng)).collect();
        let h = DMatrix::from_row_slice(nr, m, &entries);
        matrices.extend(std::iter::repeat_n(h, process.coherence));
    }
    Ok(ChannelRealization::Mimo { matrices, coherence: process.coherence })
}

/// Sequence with exactly `n * mu_s` copies of each state, in uniformly random order.
pub fn sample_random_location(dist: &DiscreteFadingDistribution, n: usize, seed: u64) -> Result<ChannelRealization> {
    let counts = exact_composition(dist, n)?;
    let mut coeffs: Vec<f64> = dist
        .support()
        .iter()
        .zip(&counts)
        .flat_map(|(&h, &c)| std::iter::repeat_n(h, c))
        .collect();
    coeffs.shuffle(&mut rng_from_seed(seed));
    Ok(ChannelRealization::Siso { coeffs, coherence: 1 })
}

/// Per-state counts `n * mu_s`, required to be integers.
pub fn exact_composition(dist: &DiscreteFadingDistribution, n: usize) -> Result<Vec<usize>> {
    dist.probs()
        .iter()
        .map(|&p| {
            let c = p * n as f64;
            let r = c.round();
            if (c - r).abs() > INTEGRALITY_TOL * r.max(1.0) {
                Err(Error::NonIntegralComposition(c))
            } else {
                Ok(r as usize)
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypicalityReport {
    pub is_typical: bool,
    /// Occurrences of each support value, in support order.
    pub counts: Vec<usize>,
    /// `|n_k - n p_k|` per support value.
    pub deviations: Vec<f64>,
    /// Sum of the deviations.
    pub n_out: f64,
}

/// Robust typicality test: `|n_k - n p_k| <= delta n p_k` for every state.
pub fn robust_typicality_check(seq: &[f64], dist: &DiscreteFadingDistribution, delta: f64) -> Result<TypicalityReport> {
    let mut counts = vec![0usize; dist.len()];
    for &h in seq {
        let k = dist.index_of(h).ok_or(Error::OutOfSupport(h))?;
        counts[k] += 1;
    }
    let n = seq.len() as f64;
    let mut is_typical = true;
    let deviations: Vec<f64> = counts
        .iter()
        .zip(dist.probs())
        .map(|(&c, &p)| {
            let dev = (c as f64 - n * p).abs();
            if dev > delta * n * p * (1.0 + 1e-12) + 1e-12 {
                is_typical = false;
            }
            dev
        })
        .collect();
    let n_out = deviations.iter().sum();
    Ok(TypicalityReport { is_typical, counts, deviations, n_out })
}

/// Upper bound `2 chi exp(-delta^2 mu n / 3)` on the probability that an
/// i.i.d. sequence is not robustly typical. Not clamped; see
/// [`as_probability`] for the clamped value.
pub fn robust_typicality_prob_bound(chi: usize, delta: f64, mu: f64, n: usize) -> Result<f64> {
    if chi < 1 || !(delta >= 0.0) || !(mu > 0.0 && mu <= 1.0) || n < 1 {
        return Err(Error::InvalidParameter(format!(
            "typicality bound needs chi >= 1, delta >= 0, 0 < mu <= 1, n >= 1 (got {chi}, {delta}, {mu}, {n})"
        )));
    }
    Ok(2.0 * chi as f64 * (-delta * delta * mu * n as f64 / 3.0).exp())
}

pub fn as_probability(bound: f64) -> f64 {
    bound.min(1.0)
}

/// Shrinking typicality slack `delta' * n^{-(1 - gamma) / 2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaSchedule {
    pub scale: f64,
    pub gamma: f64,
}

impl Default for DeltaSchedule {
    fn default() -> Self {
        Self { scale: 1.0, gamma: 0.5 }
    }
}

impl DeltaSchedule {
    pub fn delta(&self, n: usize) -> f64 {
        self.scale * (n as f64).powf(-(1.0 - self.gamma) / 2.0)
    }

    /// Overflow budget `ceil(delta n)`, capped at `n`.
    pub fn n_out(&self, n: usize) -> usize {
        ((self.delta(n) * n as f64 - 1e-9).ceil().max(0.0) as usize).min(n)
    }
}

/// `log2 |T| <= n (entropy + eps)`, returned in bits.
pub fn weak_typical_cardinality_bound(entropy_rate: f64, eps: f64, n: usize) -> Result<f64> {
    if !(entropy_rate >= 0.0) || !(eps >= 0.0) {
        return Err(Error::InvalidParameter("entropy rate and epsilon must be nonnegative".into()));
    }
    Ok(n as f64 * (entropy_rate + eps))
}

/// Per-coefficient entropy `-sum mu log2 mu` in bits.
pub fn entropy_rate(law: &FadingLaw) -> Result<f64> {
    let dist = law
        .as_discrete()
        .ok_or_else(|| Error::InvalidDistribution("entropy rate needs a discrete law".into()))?;
    Ok(discrete_entropy(dist))
}

pub fn discrete_entropy(dist: &DiscreteFadingDistribution) -> f64 {
    let h: f64 = dist.probs().iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum();
    h.max(0.0)
}

/// On-disk description of a fading law.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DistributionFile {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default)]
    pub support: Option<Vec<f64>>,
    #[serde(default)]
    pub probs: Option<Vec<f64>>,
    /// Shorthand for a uniform law on `[min, max]` with `count` levels.
    #[serde(default)]
    pub uniform_grid: Option<UniformGrid>,
    #[serde(default)]
    pub mean_square_gain: Option<f64>,
    #[serde(default)]
    pub coherence_b: Option<usize>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct UniformGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl DistributionFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn law(&self) -> Result<FadingLaw> {
        let cfg = |m: &str| Error::Config(m.to_string());
        match self.kind.as_str() {
            "discrete" => {
                let dist = match (&self.support, &self.probs, &self.uniform_grid) {
                    (Some(s), Some(p), None) => DiscreteFadingDistribution::new(s.clone(), p.clone()),
                    (Some(s), None, None) => {
                        let k = s.len().max(1);
                        DiscreteFadingDistribution::new(s.clone(), vec![1.0 / k as f64; s.len()])
                    }
                    (None, None, Some(g)) => DiscreteFadingDistribution::uniform_grid(g.count, g.min, g.max),
                    _ => return Err(cfg("discrete law needs `support` (+ `probs`) or `uniform_grid`")),
                };
                dist.map(FadingLaw::Discrete).map_err(|e| Error::Config(e.to_string()))
            }
            "rayleigh" => RayleighFading::new(self.mean_square_gain.unwrap_or(1.0))
                .map(FadingLaw::Rayleigh)
                .map_err(|e| Error::Config(e.to_string())),
            other => Err(cfg(&format!("unknown fading type `{other}`"))),
        }
    }

    pub fn coherence(&self) -> usize {
        self.coherence_b.unwrap_or(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fair() -> DiscreteFadingDistribution {
        DiscreteFadingDistribution::new(vec![2.0, 1.0], vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn support_sorted_by_magnitude_negative_first() {
        let d = DiscreteFadingDistribution::new(vec![2.0, -1.0, 1.0, 0.5], vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(d.support(), &[0.5, -1.0, 1.0, 2.0]);
        assert_eq!(d.probs(), &[0.4, 0.2, 0.3, 0.1]);
    }

    #[test]
    fn distribution_validation() {
        assert!(DiscreteFadingDistribution::new(vec![1.0], vec![0.9]).is_err());
        assert!(DiscreteFadingDistribution::new(vec![1.0, 1.0], vec![0.5, 0.5]).is_err());
        assert!(DiscreteFadingDistribution::new(vec![1.0, 2.0], vec![1.5, -0.5]).is_err());
        assert!(DiscreteFadingDistribution::new(vec![], vec![]).is_err());
    }

    #[test]
    fn block_structure() {
        let p = BlockFadingProcess::siso(FadingLaw::Rayleigh(RayleighFading::unit()), 20);
        let r = sample_block_fading(&p, 40, 1).unwrap();
        let c = r.coeffs().unwrap();
        assert!(c[..20].iter().all(|&x| x == c[0]));
        assert!(c[20..].iter().all(|&x| x == c[20]));
        assert_ne!(c[0], c[20]);
        let whole = sample_block_fading(&BlockFadingProcess::siso(FadingLaw::Discrete(fair()), 8), 8, 3).unwrap();
        assert!(whole.coeffs().unwrap().iter().all(|&x| x == whole.coeffs().unwrap()[0]));
        assert_eq!(
            sample_block_fading(&p, 30, 1),
            Err(Error::CoherenceMismatch { n: 30, b: 20 })
        );
    }

    #[test]
    fn iid_frequencies_converge() {
        let p = BlockFadingProcess::siso(FadingLaw::Discrete(fair()), 1);
        let r = sample_block_fading(&p, 100_000, 11).unwrap();
        let ones = r.coeffs().unwrap().iter().filter(|&&x| x == 1.0).count() as f64 / 1e5;
        assert!((ones - 0.5).abs() < 0.01);
    }

    #[test]
    fn mimo_reduces_to_siso() {
        let law = FadingLaw::Discrete(fair());
        let siso = sample_block_fading(&BlockFadingProcess::siso(law.clone(), 4), 16, 5).unwrap();
        let mimo = sample_mimo_block_fading(&BlockFadingProcess::mimo(law, 4, 1, 1), 16, 5).unwrap();
        let a: Vec<f64> = mimo.matrices().iter().map(|m| m[(0, 0)]).collect();
        assert_eq!(a, siso.coeffs().unwrap());
    }

    #[test]
    fn mimo_entries_on_grid() {
        let grid = DiscreteFadingDistribution::uniform_grid(1000, -5.0, 5.0).unwrap();
        let proc_ = BlockFadingProcess::mimo(FadingLaw::Discrete(grid.clone()), 20, 2, 2);
        let r = sample_mimo_block_fading(&proc_, 40, 9).unwrap();
        let mats = r.matrices();
        assert_eq!(mats.len(), 40);
        assert_eq!(mats[0].shape(), (2, 2));
        assert_eq!(mats[0], mats[19]);
        assert_ne!(mats[0], mats[20]);
        let step = 10.0 / 999.0;
        for v in mats[0].iter().chain(mats[20].iter()) {
            assert!(grid.index_of(*v).is_some());
            let k = (v + 5.0) / step;
            assert!((k - k.round()).abs() < 1e-9);
        }
    }

    #[test]
    fn random_location_composition() {
        let r = sample_random_location(&fair(), 4, 2).unwrap();
        let c = r.coeffs().unwrap();
        assert_eq!(c.iter().filter(|&&x| x == 1.0).count(), 2);
        let d = DiscreteFadingDistribution::new(vec![1.0, 3.0], vec![0.3, 0.7]).unwrap();
        let r = sample_random_location(&d, 10, 2).unwrap();
        let rep = robust_typicality_check(r.coeffs().unwrap(), &d, 0.01).unwrap();
        assert_eq!(rep.counts, vec![3, 7]);
        assert!(rep.is_typical);
        assert_eq!(rep.n_out, 0.0);
        assert!(matches!(sample_random_location(&fair(), 5, 2), Err(Error::NonIntegralComposition(_))));
    }

    #[test]
    fn typicality_examples() {
        let d = fair();
        let mut seq = vec![1.0; 7];
        seq.extend(vec![2.0; 3]);
        let r = robust_typicality_check(&seq, &d, 0.1).unwrap();
        assert!(!r.is_typical);
        assert_eq!(r.deviations, vec![2.0, 2.0]);
        assert_eq!(r.n_out, 4.0);
        assert!(robust_typicality_check(&seq, &d, 0.4).unwrap().is_typical);
        assert_eq!(robust_typicality_check(&[1.0, 7.0], &d, 0.4), Err(Error::OutOfSupport(7.0)));
    }

    #[test]
    fn typicality_bound_examples() {
        let b = robust_typicality_prob_bound(2, 0.1, 0.5, 1000).unwrap();
        assert!((b - 4.0 * (-5.0f64 / 3.0).exp()).abs() < 1e-12);
        assert!((b - 0.7555).abs() < 1e-4);
        let b10 = robust_typicality_prob_bound(2, 0.1, 0.5, 10_000).unwrap();
        assert!((b10 / b - (-15.0f64).exp()).abs() < 1e-15);
        assert_eq!(robust_typicality_prob_bound(2, 0.0, 0.5, 10).unwrap(), 4.0);
        assert_eq!(as_probability(4.0), 1.0);
        assert!(robust_typicality_prob_bound(0, 0.1, 0.5, 10).is_err());
        assert!(robust_typicality_prob_bound(2, 0.1, 1.5, 10).is_err());
    }

    #[test]
    fn delta_schedule_shrinks() {
        let s = DeltaSchedule::default();
        assert!((s.delta(10_000) - 0.1).abs() < 1e-12);
        assert_eq!(s.n_out(10_000), 1000);
        assert!(s.n_out(1_000_000) as f64 / 1e6 < s.n_out(10_000) as f64 / 1e4);
    }

    #[test]
    fn entropy_and_cardinality() {
        let u = DiscreteFadingDistribution::uniform_grid(1000, -5.0, 5.0).unwrap();
        let h = entropy_rate(&FadingLaw::Discrete(u)).unwrap();
        assert!((h - 1000f64.log2()).abs() < 1e-12);
        assert!((h - 9.96578).abs() < 1e-5);
        let single = DiscreteFadingDistribution::new(vec![1.0], vec![1.0]).unwrap();
        assert_eq!(entropy_rate(&FadingLaw::Discrete(single)).unwrap(), 0.0);
        assert_eq!(entropy_rate(&FadingLaw::Discrete(fair())).unwrap(), 1.0);
        assert!(entropy_rate(&FadingLaw::Rayleigh(RayleighFading::unit())).is_err());
        assert_eq!(weak_typical_cardinality_bound(1.0, 0.0, 10).unwrap(), 10.0);
        let b = weak_typical_cardinality_bound(1000f64.log2(), 0.01, 100).unwrap();
        assert!((b - 997.578).abs() < 1e-3);
    }

    #[test]
    fn rayleigh_cdf_quantile() {
        let r = RayleighFading::new(2.0).unwrap();
        for p in [0.1, 0.5, 0.9, 1.0 - 1e-8] {
            assert!((r.cdf(r.quantile(p)) - p).abs() < 1e-12);
        }
        assert!(RayleighFading::new(0.0).is_err());
    }

    #[test]
    fn distribution_file_parsing() {
        let f = DistributionFile::parse("type = \"discrete\"\nsupport = [1.0, 2.0]\nprobs = [0.5, 0.5]\ncoherence_b = 20\n").unwrap();
        assert_eq!(f.coherence(), 20);
        assert!(matches!(f.law().unwrap(), FadingLaw::Discrete(_)));
        let r = DistributionFile::parse("type = \"rayleigh\"\nmean_square_gain = 2.0\n").unwrap();
        assert_eq!(r.law().unwrap(), FadingLaw::Rayleigh(RayleighFading::new(2.0).unwrap()));
        let g = DistributionFile::parse("type = \"discrete\"\nuniform_grid = { min = -5.0, max = 5.0, count = 1000 }\n").unwrap();
        assert_eq!(g.law().unwrap().as_discrete().unwrap().len(), 1000);
        assert!(DistributionFile::parse("type = \"weibull\"\n").unwrap().law().is_err());
        assert!(DistributionFile::parse("type = \"discrete\"\nbogus = 1\n").is_err());
    }
}
