//! Full-CSI SISO transceiver: permutation precoding, waterfilling gains,
//! per-symbol MMSE scaling and ellipsoidal decoding; plus SVD stream
//! decomposition for the MIMO variant.
//!
//! Index convention: `perm[i]` is the channel use that carries lattice
//! coordinate `i`. Per-use quantities (`d_diag`, `u_diag`) are indexed by
//! channel use, per-coordinate quantities (`sigma_diag`) by slot.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::fading::{sample_block_fading, BlockFadingProcess, DeltaSchedule, DiscreteFadingDistribution, FadingLaw};
use crate::lattice::{DecodingMetric, GeneratorSource, NestedLatticePair};
use crate::power::{csit_capacity_for, ergodic_capacity_csit, waterfill_scalar, WaterfillSolution};
use crate::rng::{rng_from_seed, substream};

/// Permutation that lists channel uses by nondecreasing `|h|` (stable).
pub fn design_permutation_sorted(h: &[f64]) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..h.len()).collect();
    perm.sort_by(|&a, &b| h[a].abs().partial_cmp(&h[b].abs()).unwrap());
    perm
}

/// Slot budgets `n p_k` rounded by largest remainder so they sum to `n`.
pub fn slot_budgets(dist: &DiscreteFadingDistribution, n: usize) -> Vec<usize> {
    let raw: Vec<f64> = dist.probs().iter().map(|p| p * n as f64).collect();
    let mut budgets: Vec<usize> = raw.iter().map(|r| (r + 1e-9).floor() as usize).collect();
    let mut short = n.saturating_sub(budgets.iter().sum());
    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = raw[a] - budgets[a] as f64;
        let fb = raw[b] - budgets[b] as f64;
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for &k in order.iter().cycle() {
        if short == 0 {
            break;
        }
        budgets[k] += 1;
        short -= 1;
    }
    budgets
}

/// Causal slot assignment. Each state owns a contiguous bank of slots,
/// banks ordered by `|h|`. A symbol takes the lowest free slot of its own
/// bank, else of the nearest weaker bank, else lands in the tail block of
/// the last `n_out` slots (or, once that is full, the highest free slot).
#[derive(Debug, Clone)]
pub struct BestEffortPermuter<'a> {
    dist: &'a DiscreteFadingDistribution,
    n: usize,
    n_out: usize,
    bank_start: Vec<usize>,
    bank_end: Vec<usize>,
    occupied: Vec<bool>,
    perm: Vec<usize>,
    received: usize,
    n_out_actual: usize,
}

impl<'a> BestEffortPermuter<'a> {
    pub fn new(dist: &'a DiscreteFadingDistribution, n: usize, n_out: usize) -> Self {
        let budgets = slot_budgets(dist, n);
        let mut bank_start = Vec::with_capacity(budgets.len());
        let mut bank_end = Vec::with_capacity(budgets.len());
        let mut acc = 0;
        for b in budgets {
            bank_start.push(acc);
            acc += b;
            bank_end.push(acc);
        }
        Self {
            dist,
            n,
            n_out: n_out.min(n),
            bank_start,
            bank_end,
            occupied: vec![false; n],
            perm: vec![usize::MAX; n],
            received: 0,
            n_out_actual: 0,
        }
    }

    fn first_free(&self, lo: usize, hi: usize) -> Option<usize> {
        (lo..hi).find(|&m| !self.occupied[m])
    }

    /// Places the next channel use and returns its slot.
    pub fn push(&mut self, h: f64) -> Result<usize> {
        if self.received == self.n {
            return Err(Error::InvalidParameter("more coefficients than slots".into()));
        }
        let k = self.dist.index_of(h).ok_or(Error::OutOfSupport(h))?;
        let mut slot = self.first_free(self.bank_start[k], self.bank_end[k]);
        if slot.is_none() {
            slot = (0..k).rev().find_map(|j| self.first_free(self.bank_start[j], self.bank_end[j]));
        }
        let slot = match slot {
            Some(m) => m,
            None => {
                self.n_out_actual += 1;
                self.first_free(self.n - self.n_out, self.n)
                    .or_else(|| (0..self.n).rev().find(|&m| !self.occupied[m]))
                    .expect("a free slot exists while received < n")
            }
        };
        self.occupied[slot] = true;
        self.perm[slot] = self.received;
        self.received += 1;
        Ok(slot)
    }

    pub fn finish(self) -> Result<BestEffortPermutation> {
        if self.received != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: self.received });
        }
        Ok(BestEffortPermutation { perm: self.perm, n_out_actual: self.n_out_actual, n_out_budget: self.n_out })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BestEffortPermutation {
    pub perm: Vec<usize>,
    /// Symbols that found no slot in their own or a weaker bank.
    pub n_out_actual: usize,
    pub n_out_budget: usize,
}

pub fn design_permutation_best_effort(h: &[f64], dist: &DiscreteFadingDistribution, n_out: usize) -> Result<BestEffortPermutation> {
    let mut p = BestEffortPermuter::new(dist, h.len(), n_out);
    for &v in h {
        p.push(v)?;
    }
    p.finish()
}

/// `x'[perm[i]] = D[perm[i]] x[i]`.
pub fn apply_precoder(x: &[f64], perm: &[usize], d_diag: &[f64]) -> Result<Vec<f64>> {
    let n = x.len();
    if perm.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: perm.len() });
    }
    if d_diag.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: d_diag.len() });
    }
    let mut out = vec![0.0; n];
    for (i, &t) in perm.iter().enumerate() {
        out[t] = d_diag[t] * x[i];
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricVariant {
    Exact,
    /// Last `n_out` slots widened to the full input variance.
    Inflated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsitTransceiverState {
    pub perm: Vec<usize>,
    pub d_diag: Vec<f64>,
    pub u_diag: Vec<f64>,
    pub sigma_diag: Vec<f64>,
    pub n_out: usize,
    pub rho: f64,
    pub noise_var: f64,
}

impl CsitTransceiverState {
    /// Builds the state for per-use gains `h` and powers `p`.
    pub fn new(h: &[f64], powers: &[f64], perm: Vec<usize>, rho: f64, noise_var: f64, n_out: usize) -> Result<Self> {
        let n = h.len();
        if powers.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: powers.len() });
        }
        if perm.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: perm.len() });
        }
        if !(rho > 0.0) {
            return Err(Error::NonPositivePower(rho));
        }
        if !(noise_var >= 0.0) {
            return Err(Error::InvalidParameter(format!("noise variance {noise_var}")));
        }
        let mut d_diag = Vec::with_capacity(n);
        let mut u_diag = Vec::with_capacity(n);
        for (&ht, &pt) in h.iter().zip(powers) {
            d_diag.push((pt / rho).sqrt());
            let snr = pt * ht * ht;
            u_diag.push(if snr > 0.0 { (rho * pt).sqrt() * ht / (noise_var + snr) } else { 0.0 });
        }
        let sigma_diag = perm
            .iter()
            .map(|&t| {
                let snr = powers[t] * h[t] * h[t];
                if snr > 0.0 {
                    rho * noise_var / (snr + noise_var)
                } else {
                    rho
                }
            })
            .collect();
        Ok(Self { perm, d_diag, u_diag, sigma_diag, n_out: n_out.min(n), rho, noise_var })
    }

    pub fn dimension(&self) -> usize {
        self.perm.len()
    }
}

/// `y'_i = U[perm[i]] y[perm[i]] + d_i`.
pub fn mmse_equalize(y: &[f64], state: &CsitTransceiverState, d: &[f64]) -> Result<Vec<f64>> {
    let n = state.dimension();
    for len in [y.len(), d.len()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, got: len });
        }
    }
    Ok(state.perm.iter().zip(d).map(|(&t, di)| state.u_diag[t] * y[t] + di).collect())
}

/// Diagonal of the decision-region covariance, per slot.
pub fn build_decision_metric(state: &CsitTransceiverState, variant: MetricVariant) -> Vec<f64> {
    let mut sigma = state.sigma_diag.clone();
    if variant == MetricVariant::Inflated {
        let n = sigma.len();
        let full = state.rho * state.noise_var.max(1.0);
        for s in &mut sigma[n - state.n_out..] {
            *s = full;
        }
    }
    sigma
}

/// Inverse-covariance decoding metric; the identity when the channel is noiseless.
pub fn decoding_metric(state: &CsitTransceiverState, variant: MetricVariant) -> DecodingMetric {
    if state.noise_var == 0.0 {
        return DecodingMetric::identity(state.dimension());
    }
    DecodingMetric::Diagonal(build_decision_metric(state, variant).iter().map(|s| 1.0 / s).collect())
}

/// Fixed ingredients of a SISO CSIT link at one SNR.
#[derive(Debug, Clone)]
pub struct SisoLink {
    pub pair: NestedLatticePair,
    pub dist: DiscreteFadingDistribution,
    pub coherence: usize,
    pub rho: f64,
    pub noise_var: f64,
    pub schedule: DeltaSchedule,
    pub waterfill: WaterfillSolution,
}

impl SisoLink {
    pub fn new(
        n: usize,
        q: u64,
        generator: GeneratorSource,
        dist: DiscreteFadingDistribution,
        coherence: usize,
        rho: f64,
        noise_var: f64,
    ) -> Result<Self> {
        let pair = NestedLatticePair::build(n, q, generator, rho)?;
        let waterfill = waterfill_scalar(&dist, rho)?;
        if coherence == 0 || !n.is_multiple_of(coherence) {
            return Err(Error::CoherenceMismatch { n, b: coherence });
        }
        Ok(Self { pair, dist, coherence, rho, noise_var, schedule: DeltaSchedule::default(), waterfill })
    }

    pub fn capacity(&self) -> f64 {
        csit_capacity_for(&self.dist, &self.waterfill)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub decoded_ok: bool,
    pub message: u64,
    pub decoded: u64,
    /// `z^T Sigma^{-1} z / n` for the effective noise (0 on a noiseless link).
    pub noise_metric: f64,
    pub n_out_actual: usize,
}

/// One codeword through encode, best-effort permutation, precoding, fading,
/// MMSE scaling, weighted decoding and mod-coarse recovery.
pub fn run_siso_trial(link: &SisoLink, seed: u64) -> Result<TrialOutcome> {
    let pair = &link.pair;
    let n = pair.dimension();
    let message = rng_from_seed(substream(seed, 0)).random_range(0..pair.q());
    let dither = pair.sample_dither(substream(seed, 1));
    let process = BlockFadingProcess::siso(FadingLaw::Discrete(link.dist.clone()), link.coherence);
    let channel = sample_block_fading(&process, n, substream(seed, 2))?;
    let h = channel.coeffs().expect("siso realization");

    let t = pair.codeword(message);
    let x = pair.encode(&t, &dither)?;
    let plan = design_permutation_best_effort(h, &link.dist, link.schedule.n_out(n))?;
    let powers: Vec<f64> = h.iter().map(|&v| link.waterfill.power_for(&link.dist, v)).collect::<Result<_>>()?;
    let state = CsitTransceiverState::new(h, &powers, plan.perm, link.rho, link.noise_var, plan.n_out_budget)?;
    let tx = apply_precoder(&x, &state.perm, &state.d_diag)?;

    let mut noise_rng = rng_from_seed(substream(seed, 3));
    let sd = link.noise_var.sqrt();
    let y: Vec<f64> = tx
        .iter()
        .zip(h)
        .map(|(xt, ht)| ht * xt + sd * noise_rng.sample::<f64, _>(StandardNormal))
        .collect();
    let y_eq = mmse_equalize(&y, &state, dither.as_slice())?;

    let noise_metric = if link.noise_var > 0.0 {
        (0..n)
            .map(|i| {
                let z = y_eq[i] - x[i] - dither.0[i];
                z * z / state.sigma_diag[i]
            })
            .sum::<f64>()
            / n as f64
    } else {
        0.0
    };
    let t_hat = pair.weighted_nearest_fine(&y_eq, &decoding_metric(&state, MetricVariant::Exact))?;
    let decoded = pair.recover_message(&t_hat)?;
    Ok(TrialOutcome { decoded_ok: decoded == message, message, decoded, noise_metric, n_out_actual: plan.n_out_actual })
}

/// SNR `rho` at which the waterfilling capacity equals `rate / backoff`.
pub fn snr_for_rate_fraction(dist: &DiscreteFadingDistribution, rate: f64, backoff: f64) -> Result<f64> {
    if !(backoff > 0.0 && backoff <= 1.0) || !(rate > 0.0) {
        return Err(Error::InvalidParameter(format!("rate {rate}, back-off {backoff}")));
    }
    let target = rate / backoff;
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    if ergodic_capacity_csit(dist, 2f64.powf(hi))? < target {
        return Err(Error::InvalidParameter(format!("capacity {target} out of reach")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ergodic_capacity_csit(dist, 2f64.powf(mid))? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(2f64.powf(hi))
}

/// `H = B L F^T` with `B` (N x N) and `F` (M x M) orthogonal and singular
/// values in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdParallel {
    pub b: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub f: DMatrix<f64>,
    /// Streams with nonzero gain.
    pub streams: usize,
}

impl SvdParallel {
    /// `N x M` matrix holding the singular values on its diagonal.
    pub fn l_matrix(&self) -> DMatrix<f64> {
        let mut l = DMatrix::zeros(self.b.nrows(), self.f.nrows());
        for (i, &s) in self.singular_values.iter().enumerate() {
            l[(i, i)] = s;
        }
        l
    }
}

pub fn mimo_svd_parallelize(h: &DMatrix<f64>) -> SvdParallel {
    let (rows, cols) = h.shape();
    let k = rows.min(cols);
    let svd = h.clone().svd(true, true);
    let u = svd.u.expect("left vectors requested");
    let vt = svd.v_t.expect("right vectors requested");
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap());
    let singular_values: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let left: Vec<DVector<f64>> = order.iter().map(|&i| u.column(i).into_owned()).collect();
    let right: Vec<DVector<f64>> = order.iter().map(|&i| vt.row(i).transpose()).collect();
    let tol = 1e-12 * singular_values.first().copied().unwrap_or(0.0).max(1.0);
    SvdParallel {
        b: complete_basis(left, rows),
        f: complete_basis(right, cols),
        streams: singular_values.iter().filter(|&&s| s > tol).count(),
        singular_values,
    }
}

/// Extends orthonormal columns to a full orthonormal basis by Gram-Schmidt
/// against the standard basis.
fn complete_basis(mut cols: Vec<DVector<f64>>, dim: usize) -> DMatrix<f64> {
    for e in 0..dim {
        if cols.len() == dim {
            break;
        }
        let mut v = DVector::zeros(dim);
        v[e] = 1.0;
        for _ in 0..2 {
            for c in &cols {
                let proj = c.dot(&v);
                v -= c * proj;
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            cols.push(v / norm);
        }
    }
    DMatrix::from_columns(&cols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fading::DiscreteFadingDistribution as D;
    use crate::rng::SimRng;

    fn two_state() -> D {
        D::new(vec![1.0, 2.0], vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn sorted_permutation_examples() {
        let p = design_permutation_sorted(&[3.0, 1.0, 2.0]);
        assert_eq!(p, vec![1, 2, 0]);
        assert_eq!(design_permutation_sorted(&[0.5, 1.0, 1.0, 4.0]), vec![0, 1, 2, 3]);
        assert_eq!(design_permutation_sorted(&[2.0, -1.0, 1.0]), vec![1, 2, 0]);
    }

    #[test]
    fn budgets_by_largest_remainder() {
        assert_eq!(slot_budgets(&two_state(), 4), vec![2, 2]);
        let d = D::new(vec![1.0, 2.0, 3.0], vec![1.0 / 3.0; 3]).unwrap();
        assert_eq!(slot_budgets(&d, 4), vec![2, 1, 1]);
        assert_eq!(slot_budgets(&d, 4).iter().sum::<usize>(), 4);
    }

    #[test]
    fn best_effort_exact_composition_matches_sorted() {
        let h = [2.0, 1.0, 1.0, 2.0];
        let be = design_permutation_best_effort(&h, &two_state(), 1).unwrap();
        assert_eq!(be.n_out_actual, 0);
        assert_eq!(be.perm, design_permutation_sorted(&h));
    }

    #[test]
    fn best_effort_overflow_into_weaker_bank() {
        // banks: |h|=1 -> slots 0,1; |h|=2 -> slots 2,3
        let be = design_permutation_best_effort(&[2.0, 2.0, 2.0, 1.0], &two_state(), 1).unwrap();
        assert_eq!(be.perm, vec![2, 3, 0, 1]);
        assert_eq!(be.n_out_actual, 0);
        let be = design_permutation_best_effort(&[2.0; 4], &two_state(), 1).unwrap();
        assert_eq!(be.perm, vec![2, 3, 0, 1]);
        assert_eq!(be.n_out_actual, 0);
    }

    #[test]
    fn best_effort_tail_when_no_weaker_bank() {
        let d = two_state();
        let mut p = BestEffortPermuter::new(&d, 4, 1);
        assert_eq!(p.push(1.0).unwrap(), 0);
        assert_eq!(p.push(1.0).unwrap(), 1);
        // weakest bank is full and has nothing below it
        assert_eq!(p.push(1.0).unwrap(), 3);
        assert_eq!(p.push(1.0).unwrap(), 2);
        let be = p.finish().unwrap();
        assert_eq!(be.n_out_actual, 2);
        assert!(design_permutation_best_effort(&[1.0, 3.0], &d, 0).is_err());
    }

    #[test]
    fn best_effort_is_a_bijection() {
        let d = D::new(vec![0.5, 1.0, 2.0], vec![0.2, 0.3, 0.5]).unwrap();
        let mut rng: SimRng = rng_from_seed(8);
        for _ in 0..100 {
            let h: Vec<f64> = (0..50).map(|_| d.support()[rng.random_range(0..3)]).collect();
            let be = design_permutation_best_effort(&h, &d, 10).unwrap();
            let mut seen = be.perm.clone();
            seen.sort_unstable();
            assert_eq!(seen, (0..50).collect::<Vec<_>>());
        }
    }

    #[test]
    fn precoder_examples() {
        let x = [0.3, -0.2, 0.1];
        assert_eq!(apply_precoder(&x, &[0, 1, 2], &[1.0; 3]).unwrap(), x.to_vec());
        assert_eq!(apply_precoder(&x, &[2, 0, 1], &[1.0, 2.0, 4.0]).unwrap(), vec![-0.2, 0.2, 1.2]);
        assert!(apply_precoder(&x, &[0, 1], &[1.0; 3]).is_err());

        let sol = waterfill_scalar(&two_state(), 1.0).unwrap();
        let st = CsitTransceiverState::new(&[1.0, 2.0], &sol.allocations, vec![0, 1], 1.0, 1.0, 0).unwrap();
        assert!((st.d_diag[0] - 0.625f64.sqrt()).abs() < 1e-12);
        assert!((st.d_diag[1] - 1.375f64.sqrt()).abs() < 1e-12);

        let single = D::new(vec![1.5], vec![1.0]).unwrap();
        let sol = waterfill_scalar(&single, 2.0).unwrap();
        let st = CsitTransceiverState::new(&[1.5; 3], &[sol.allocations[0]; 3], vec![0, 1, 2], 2.0, 1.0, 0).unwrap();
        assert!(st.d_diag.iter().all(|&d| (d - 1.0).abs() < 1e-12));
    }

    #[test]
    fn metric_variants() {
        let h = [1.0, 2.0, 2.0, 1.0];
        let pw = [0.625, 1.375, 1.375, 0.625];
        let st = CsitTransceiverState::new(&h, &pw, vec![0, 3, 1, 2], 1.0, 1.0, 1).unwrap();
        let exact = build_decision_metric(&st, MetricVariant::Exact);
        assert!((exact[0] - 1.0 / 1.625).abs() < 1e-12);
        assert!((exact[3] - 1.0 / 6.5).abs() < 1e-12);
        assert!(exact.windows(2).all(|w| w[0] >= w[1]));
        let infl = build_decision_metric(&st, MetricVariant::Inflated);
        assert_eq!(infl[3], 1.0);
        assert!(exact.iter().zip(&infl).all(|(a, b)| a <= b));
        let st0 = CsitTransceiverState { n_out: 0, ..st };
        assert_eq!(build_decision_metric(&st0, MetricVariant::Exact), build_decision_metric(&st0, MetricVariant::Inflated));
    }

    #[test]
    fn equalized_noise_variance_matches_sigma() {
        let (rho, h, p) = (2.0f64, 1.3f64, 1.7f64);
        let st = CsitTransceiverState::new(&[h], &[p], vec![0], rho, 1.0, 0).unwrap();
        let eta = (12.0 * rho).sqrt();
        let mut rng = rng_from_seed(21);
        let trials = 100_000;
        let mut acc = 0.0;
        for _ in 0..trials {
            let x = (rng.random::<f64>() - 0.5) * eta;
            let w: f64 = rng.sample(StandardNormal);
            let y = h * st.d_diag[0] * x + w;
            let z = mmse_equalize(&[y], &st, &[0.0]).unwrap()[0] - x;
            acc += z * z;
        }
        let var = acc / trials as f64;
        assert!((var / st.sigma_diag[0] - 1.0).abs() < 0.02, "{var} vs {}", st.sigma_diag[0]);
    }

    #[test]
    fn strong_channel_kills_self_noise() {
        let st = CsitTransceiverState::new(&[1e6], &[1.0], vec![0], 1.0, 1.0, 0).unwrap();
        let x = 0.37;
        let y = 1e6 * st.d_diag[0] * x;
        assert!((mmse_equalize(&[y], &st, &[0.0]).unwrap()[0] - x).abs() < 1e-9);
        let zero = mmse_equalize(&[0.0], &st, &[0.25]).unwrap();
        assert_eq!(zero, vec![0.25]);
    }

    #[test]
    fn noiseless_trials_always_decode() {
        let link = SisoLink::new(8, 17, GeneratorSource::Seeded(2), two_state(), 1, 0.5, 0.0).unwrap();
        for s in 0..50 {
            let r = run_siso_trial(&link, s).unwrap();
            assert!(r.decoded_ok, "seed {s}");
        }
    }

    #[test]
    fn trials_are_deterministic() {
        let link = SisoLink::new(8, 17, GeneratorSource::Seeded(2), two_state(), 2, 1.0, 1.0).unwrap();
        assert_eq!(run_siso_trial(&link, 5).unwrap(), run_siso_trial(&link, 5).unwrap());
    }

    #[test]
    fn high_snr_trials_decode() {
        let link = SisoLink::new(8, 17, GeneratorSource::Seeded(2), two_state(), 1, 1e4, 1.0).unwrap();
        let ok = (0..100).filter(|&s| run_siso_trial(&link, s).unwrap().decoded_ok).count();
        assert_eq!(ok, 100);
    }

    #[test]
    fn snr_inversion() {
        let d = two_state();
        let rho = snr_for_rate_fraction(&d, 0.25, 0.5).unwrap();
        assert!((ergodic_capacity_csit(&d, rho).unwrap() - 0.5).abs() < 1e-9);
        assert!(snr_for_rate_fraction(&d, 0.25, 0.0).is_err());
    }

    #[test]
    fn svd_reconstruction_and_order() {
        let mut rng = rng_from_seed(13);
        for (r, c) in [(2, 2), (3, 2), (2, 3), (4, 4), (1, 1)] {
            for _ in 0..50 {
                let h = DMatrix::from_fn(r, c, |_, _| rng.sample::<f64, _>(StandardNormal));
                let s = mimo_svd_parallelize(&h);
                assert!((&s.b * s.l_matrix() * s.f.transpose() - &h).norm() < 1e-10);
                assert!((s.b.transpose() * &s.b - DMatrix::identity(r, r)).norm() < 1e-10);
                assert!((s.f.transpose() * &s.f - DMatrix::identity(c, c)).norm() < 1e-10);
                assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
            }
        }
    }

    #[test]
    fn svd_of_diagonal_and_rank_deficient() {
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, 3.0]));
        let s = mimo_svd_parallelize(&h);
        assert!((s.singular_values[0] - 3.0).abs() < 1e-12 && (s.singular_values[1] - 1.0).abs() < 1e-12);
        for m in [&s.b, &s.f] {
            assert!(m.iter().all(|v| v.abs() < 1e-12 || (v.abs() - 1.0).abs() < 1e-12));
        }
        let rank1 = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let s = mimo_svd_parallelize(&rank1);
        assert_eq!(s.streams, 1);
        assert!((&s.b * s.l_matrix() * s.f.transpose() - &rank1).norm() < 1e-10);
    }
}
