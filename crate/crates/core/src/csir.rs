//! Receiver-only CSI scheme: per-use block MMSE scaling, block-metric
//! decoding, universality-gap accounting and the equal-probability
//! quantizer for continuous fading.

use std::f64::consts::LN_2;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::csit::TrialOutcome;
use crate::error::{Error, Result};
use crate::fading::{
    discrete_entropy, sample_mimo_block_fading, BlockFadingProcess, ChannelRealization,
    FadingLaw, RayleighFading,
};
use crate::gap::GapReport;
use crate::lattice::{DecodingMetric, GeneratorSource, NestedLatticePair, MAX_BLOCK};
use crate::numeric::{exp_e1, integrate};
use crate::power::{mimo_capacity_white, CapacityEstimate};
use crate::rng::{rng_from_seed, substream};

pub const BIN_REL_TOL: f64 = 1e-6;
const BIN_ABS_TOL: f64 = 1e-13;
const BIN_MAX_INTERVALS: usize = 200;

/// Per-use equalizers and decision-region matrices.
///
/// With noise variance `s2` and per-antenna power `rho'`:
/// `Psi = s2 I + rho' H^T H`, `Sigma = rho' s2 Psi^{-1}`,
/// `U = rho' H^T (s2 I + rho' H H^T)^{-1}`. For `s2 = 1` these are the
/// usual MMSE forms.
#[derive(Debug, Clone, PartialEq)]
pub struct CsirDecoderState {
    pub rho_prime: f64,
    pub noise_var: f64,
    pub equalizers: Vec<DMatrix<f64>>,
    pub sigma: Vec<DMatrix<f64>>,
    pub psi: Vec<DMatrix<f64>>,
}

impl CsirDecoderState {
    pub fn tx_antennas(&self) -> usize {
        self.sigma.first().map_or(0, |s| s.nrows())
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    /// Block-diagonal `Sigma^{-1}`; the identity on a noiseless link.
    pub fn decoding_metric(&self) -> DecodingMetric {
        let m = self.tx_antennas();
        if self.noise_var == 0.0 {
            return DecodingMetric::identity(m * self.len());
        }
        let scale = 1.0 / (self.rho_prime * self.noise_var);
        if m == 1 {
            return DecodingMetric::Diagonal(self.psi.iter().map(|p| p[(0, 0)] * scale).collect());
        }
        DecodingMetric::BlockDiagonal { block: m, blocks: self.psi.iter().map(|p| p * scale).collect() }
    }
}

pub fn build_csir_state(channel: &ChannelRealization, rho_prime: f64, noise_var: f64) -> Result<CsirDecoderState> {
    if !(rho_prime > 0.0) {
        return Err(Error::NonPositivePower(rho_prime));
    }
    if !(noise_var >= 0.0) {
        return Err(Error::InvalidParameter(format!("noise variance {noise_var}")));
    }
    let mats = channel.matrices();
    let mut equalizers = Vec::with_capacity(mats.len());
    let mut sigma = Vec::with_capacity(mats.len());
    let mut psi = Vec::with_capacity(mats.len());
    for h in &mats {
        let (n_rx, m) = h.shape();
        let p = DMatrix::identity(m, m) * noise_var + h.transpose() * h * rho_prime;
        if noise_var > 0.0 {
            let gram = DMatrix::identity(n_rx, n_rx) * noise_var + h * h.transpose() * rho_prime;
            let chol = gram.cholesky().ok_or(Error::NotPositiveDefinite)?;
            // U^T = rho' (gram)^{-1} H
            let u = chol.solve(&(h * rho_prime)).transpose();
            let p_inv = p.clone().cholesky().ok_or(Error::NotPositiveDefinite)?.inverse();
            sigma.push(p_inv * (rho_prime * noise_var));
            equalizers.push(u);
        } else {
            let u = h.clone().pseudo_inverse(1e-12).map_err(|e| Error::InvalidParameter(e.to_string()))?;
            sigma.push(DMatrix::zeros(m, m));
            equalizers.push(u);
        }
        psi.push(p);
    }
    Ok(CsirDecoderState { rho_prime, noise_var, equalizers, sigma, psi })
}

/// `y'_i = U_i y_i + d_i` for every channel use, stacked.
pub fn csir_equalize(y: &[DVector<f64>], state: &CsirDecoderState, dither: &[f64]) -> Result<Vec<f64>> {
    let m = state.tx_antennas();
    if y.len() != state.len() {
        return Err(Error::DimensionMismatch { expected: state.len(), got: y.len() });
    }
    if dither.len() != m * state.len() {
        return Err(Error::DimensionMismatch { expected: m * state.len(), got: dither.len() });
    }
    let mut out = Vec::with_capacity(dither.len());
    for (i, (yi, u)) in y.iter().zip(&state.equalizers).enumerate() {
        let v = u * yi;
        out.extend((0..m).map(|k| v[k] + dither[i * m + k]));
    }
    Ok(out)
}

pub fn decode_csir(y_eq: &[f64], state: &CsirDecoderState, pair: &NestedLatticePair) -> Result<u64> {
    let m = state.tx_antennas();
    if m > MAX_BLOCK {
        return Err(Error::UnsupportedBlockSize(m));
    }
    let t_hat = pair.weighted_nearest_fine(y_eq, &state.decoding_metric())?;
    pair.recover_message(&t_hat)
}

/// Fixed ingredients of a MIMO CSIR link.
#[derive(Debug, Clone)]
pub struct MimoLink {
    pub pair: NestedLatticePair,
    pub process: BlockFadingProcess,
    pub rho: f64,
    pub noise_var: f64,
}

impl MimoLink {
    /// `uses` channel uses, lattice dimension `uses * M`, per-dimension power `rho / M`.
    pub fn new(uses: usize, q: u64, generator: GeneratorSource, process: BlockFadingProcess, rho: f64, noise_var: f64) -> Result<Self> {
        let m = process.tx_antennas;
        if m == 0 || m > MAX_BLOCK {
            return Err(Error::UnsupportedBlockSize(m));
        }
        if process.coherence == 0 || !uses.is_multiple_of(process.coherence) {
            return Err(Error::CoherenceMismatch { n: uses, b: process.coherence });
        }
        let pair = NestedLatticePair::build(uses * m, q, generator, rho / m as f64)?;
        Ok(Self { pair, process, rho, noise_var })
    }

    pub fn uses(&self) -> usize {
        self.pair.dimension() / self.process.tx_antennas
    }

    pub fn rho_prime(&self) -> f64 {
        self.rho / self.process.tx_antennas as f64
    }
}

pub fn run_csir_trial(link: &MimoLink, seed: u64) -> Result<TrialOutcome> {
    let pair = &link.pair;
    let (m, n_rx) = (link.process.tx_antennas, link.process.rx_antennas);
    let uses = link.uses();
    let message = rng_from_seed(substream(seed, 0)).random_range(0..pair.q());
    let dither = pair.sample_dither(substream(seed, 1));
    let channel = sample_mimo_block_fading(&link.process, uses, substream(seed, 2))?;
    let state = build_csir_state(&channel, link.rho_prime(), link.noise_var)?;

    let x = pair.encode(&pair.codeword(message), &dither)?;
    let mut noise_rng = rng_from_seed(substream(seed, 3));
    let sd = link.noise_var.sqrt();
    let mats = channel.matrices();
    let y: Vec<DVector<f64>> = mats
        .iter()
        .enumerate()
        .map(|(i, h)| {
            let xi = DVector::from_column_slice(&x[i * m..(i + 1) * m]);
            let w = DVector::from_fn(n_rx, |_, _| sd * noise_rng.sample::<f64, _>(StandardNormal));
            h * xi + w
        })
        .collect();
    let y_eq = csir_equalize(&y, &state, dither.as_slice())?;

    let noise_metric = if link.noise_var > 0.0 {
        let z: Vec<f64> = (0..x.len()).map(|k| y_eq[k] - x[k] - dither.0[k]).collect();
        state.decoding_metric().quadratic_form(&z) / x.len() as f64
    } else {
        0.0
    };
    let decoded = decode_csir(&y_eq, &state, pair)?;
    Ok(TrialOutcome { decoded_ok: decoded == message, message, decoded, noise_metric, n_out_actual: 0 })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniversalityGap {
    pub gap_bits: f64,
    /// Same scaling applied to `log2 |S|`.
    pub cardinality_bound_bits: f64,
}

/// `(M N / b) H(h)` together with its support-size bound.
pub fn universality_gap(tx: usize, rx: usize, coherence: usize, law: &FadingLaw) -> Result<UniversalityGap> {
    let dist = law
        .as_discrete()
        .ok_or_else(|| Error::InvalidDistribution("universality gap needs a discrete law".into()))?;
    if coherence == 0 {
        return Err(Error::InvalidParameter("coherence length must be positive".into()));
    }
    let scale = (tx * rx) as f64 / coherence as f64;
    Ok(UniversalityGap {
        gap_bits: scale * discrete_entropy(dist),
        cardinality_bound_bits: scale * (dist.len() as f64).log2(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsirRate {
    pub capacity: CapacityEstimate,
    pub gap_bits: f64,
    /// `capacity - gap`; vanishing slack terms are not subtracted.
    pub rate: f64,
}

pub fn achievable_rate_csir(law: &FadingLaw, rho: f64, tx: usize, rx: usize, coherence: usize, draws: usize, seed: u64) -> Result<CsirRate> {
    let capacity = mimo_capacity_white(law, tx, rx, rho, draws, seed)?;
    let gap_bits = universality_gap(tx, rx, coherence, law)?.gap_bits;
    Ok(CsirRate { capacity, gap_bits, rate: capacity.mean - gap_bits })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Expurgation {
    pub feasible: bool,
    /// Factor by which the surviving codebooks' error probability may grow.
    pub error_multiplier: f64,
    pub surviving_fraction: f64,
}

/// Counting argument behind keeping one codebook for all typical channels:
/// needs `log2 |T| < log2 kappa < log2 |C|`.
pub fn expurgation_budget(kappa: u64, log2_typical: f64, log2_codebooks: f64) -> Result<Expurgation> {
    if kappa < 2 {
        return Err(Error::InvalidParameter(format!("kappa must be at least 2, got {kappa}")));
    }
    let lk = (kappa as f64).log2();
    Ok(Expurgation {
        feasible: lk > log2_typical && lk < log2_codebooks,
        error_multiplier: kappa as f64,
        surviving_fraction: (kappa - 1) as f64 / kappa as f64,
    })
}

/// Equal-probability magnitude quantizer with `L` finite bins and an open top bin.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizerDesign {
    pub levels: usize,
    /// `q_0 = 0 < q_1 < ... < q_L`.
    pub thresholds: Vec<f64>,
    /// `P(|h| > q_L)`.
    pub tail_mass: f64,
}

impl QuantizerDesign {
    pub fn top(&self) -> f64 {
        self.thresholds[self.levels]
    }
}

pub fn design_equalprob_quantizer(fading: &RayleighFading, levels: usize, top: f64) -> Result<QuantizerDesign> {
    if levels == 0 {
        return Err(Error::InvalidParameter("need at least one bin".into()));
    }
    if !(top > 0.0 && top.is_finite()) {
        return Err(Error::InvalidParameter(format!("top threshold {top}")));
    }
    let e = fading.mean_square_gain();
    let tail_mass = (-top * top / e).exp();
    let inner = 1.0 - tail_mass;
    let mut thresholds = Vec::with_capacity(levels + 1);
    thresholds.push(0.0);
    for l in 1..levels {
        thresholds.push(fading.quantile(l as f64 * inner / levels as f64));
    }
    thresholds.push(top);
    if thresholds.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("quantizer thresholds collapse".into()));
    }
    Ok(QuantizerDesign { levels, thresholds, tail_mass })
}

/// `E[log2(1 + rho g)]` for `g` exponential with mean `E`.
pub fn rayleigh_capacity(fading: &RayleighFading, rho: f64) -> f64 {
    let e = fading.mean_square_gain();
    exp_e1(1.0 / (rho * e)) / LN_2
}

/// Loss from rounding `|h|^2` down to `a` over `|h|^2 > a`, closed form.
fn tail_loss(e: f64, rho: f64, a: f64) -> f64 {
    let y = (a + 1.0 / rho) / e;
    (-a / e).exp() * exp_e1(y) / LN_2
}

/// `int_lo^hi log2((1 + rho g) / (1 + rho lo)) dF(g)` with `g ~ Exp(E)`.
fn bin_loss(e: f64, rho: f64, lo: f64, hi: f64) -> Result<f64> {
    let base = 1.0 + rho * lo;
    let f = |g: f64| (rho * (g - lo) / base).ln_1p() * (-g / e).exp() / e;
    Ok(integrate(f, lo, hi, BIN_REL_TOL, BIN_ABS_TOL, BIN_MAX_INTERVALS)? / LN_2)
}

/// Quantization gap for Rayleigh fading with receiver-only CSI: a
/// universality term `(1/b) log2(L+1)`, the top-bin loss and the loss of
/// the `L` finite bins.
pub fn gap_bound_csir_continuous(fading: &RayleighFading, rho: f64, coherence: usize, design: &QuantizerDesign) -> Result<GapReport> {
    if !(rho > 0.0) {
        return Err(Error::NonPositivePower(rho));
    }
    if coherence == 0 {
        return Err(Error::InvalidParameter("coherence length must be positive".into()));
    }
    let e = fading.mean_square_gain();
    let quant = ((design.levels + 1) as f64).log2() / coherence as f64;
    let top = design.top();
    let tail = tail_loss(e, rho, top * top);
    let mut bins = 0.0;
    for w in design.thresholds.windows(2) {
        bins += bin_loss(e, rho, w[0] * w[0], w[1] * w[1])?;
    }
    Ok(GapReport::from_terms([("term_quant", quant), ("term_tail", tail), ("term_bins", bins)])
        .with_capacity(rayleigh_capacity(fading, rho)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantizerOptimum {
    pub levels: usize,
    pub top: f64,
    pub report: GapReport,
}

/// Exhaustive grid search; ties go to the smaller `L`, then the smaller `q_L`.
pub fn optimize_quantizer(fading: &RayleighFading, rho: f64, coherence: usize, levels_grid: &[usize], top_grid: &[f64]) -> Result<QuantizerOptimum> {
    if levels_grid.is_empty() || top_grid.is_empty() {
        return Err(Error::InvalidParameter("empty quantizer grid".into()));
    }
    let mut points: Vec<(usize, f64)> = levels_grid.iter().flat_map(|&l| top_grid.iter().map(move |&t| (l, t))).collect();
    points.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.partial_cmp(&b.1).unwrap()));
    let evaluated: Vec<Result<GapReport>> = points
        .par_iter()
        .map(|&(l, t)| {
            let design = design_equalprob_quantizer(fading, l, t)?;
            gap_bound_csir_continuous(fading, rho, coherence, &design)
        })
        .collect();
    let mut best: Option<QuantizerOptimum> = None;
    for (&(levels, top), res) in points.iter().zip(evaluated) {
        let report = res?;
        if best.as_ref().is_none_or(|b| report.gap < b.report.gap) {
            best = Some(QuantizerOptimum { levels, top, report });
        }
    }
    Ok(best.expect("grid is nonempty"))
}

/// Default `L` grid: every integer in `1..=256`.
pub fn default_levels_grid() -> Vec<usize> {
    (1..=256).collect()
}

/// Default `q_L` grid: 64 points with tail mass log-spaced over `[1e-8, 0.5]`.
pub fn default_top_grid(fading: &RayleighFading) -> Vec<f64> {
    let (lo, hi) = (1e-8f64.ln(), 0.5f64.ln());
    (0..64)
        .map(|i| {
            let tail = (lo + (hi - lo) * i as f64 / 63.0).exp();
            fading.quantile(1.0 - tail)
        })
        .collect()
}

/// Symmetric PSD square root via eigendecomposition.
pub fn psd_sqrt(k: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !k.is_square() {
        return Err(Error::InvalidParameter("covariance must be square".into()));
    }
    let scale = k.amax().max(1.0);
    if (k - k.transpose()).amax() > 1e-10 * scale {
        return Err(Error::InvalidParameter("covariance must be symmetric".into()));
    }
    let eig = k.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|&v| v < -1e-10 * scale) {
        return Err(Error::InvalidParameter("covariance must be positive semidefinite".into()));
    }
    let roots = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose())
}

/// Shapes unit-power lattice blocks by `K^{1/2}`; `trace(K)` must not exceed `rho`.
pub fn colored_input_transform(k: &DMatrix<f64>, rho: f64, x_blocks: &[DVector<f64>]) -> Result<Vec<DVector<f64>>> {
    if k.trace() > rho * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!("trace {} exceeds power {rho}", k.trace())));
    }
    let root = psd_sqrt(k)?;
    x_blocks
        .iter()
        .map(|x| {
            if x.len() != root.ncols() {
                Err(Error::DimensionMismatch { expected: root.ncols(), got: x.len() })
            } else {
                Ok(&root * x)
            }
        })
        .collect()
}

/// `H K^{1/2}`.
pub fn effective_channel(h: &DMatrix<f64>, k: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let root = psd_sqrt(k)?;
    if h.ncols() != root.nrows() {
        return Err(Error::DimensionMismatch { expected: root.nrows(), got: h.ncols() });
    }
    Ok(h * root)
}

/// `1/2 log2 det(I_N + H K H^T)`.
pub fn colored_log_det(h: &DMatrix<f64>, k: &DMatrix<f64>) -> f64 {
    let n = h.nrows();
    0.5 * (DMatrix::identity(n, n) + h * k * h.transpose()).determinant().log2()
}
