//! Nested lattice pair built by Construction A over a prime field, with a
//! scaled cubic coarse lattice.
//!
//! The fine lattice is `eta * (q^-1 C + Z^n)` where `C = { beta * g mod q }`
//! is a one-dimensional code over `Z_q`; the coarse lattice is `eta * Z^n`,
//! so every fine point decomposes as a coset offset plus a coarse point. The
//! shaping region is the cube `(-eta/2, eta/2]^n`; rounding ties go toward
//! negative infinity, which is what puts `+eta/2` (and not `-eta/2`) inside
//! the region.

use std::io::Write;

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Tolerance used for integrality tests on scaled coordinates.
const MEMBERSHIP_TOL: f64 = 1e-9;

/// Largest block size accepted by the exact block closest-point search.
pub const MAX_BLOCK: usize = 4;

/// Where the Construction-A generator comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorSource {
    Explicit(Vec<u64>),
    /// Entries drawn i.i.d. uniform on `{0..q-1}`, redrawn if all zero.
    Seeded(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NestedLatticePair {
    n: usize,
    q: u64,
    generator: Vec<u64>,
    eta: f64,
    target_power: f64,
    pivot: usize,
    pivot_inv: u64,
}

/// A fine-lattice point together with the index of its coset modulo the
/// coarse lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticePoint {
    pub coords: Vec<f64>,
    pub coset_index: u64,
}

/// Common randomness shared by encoder and decoder.
#[derive(Debug, Clone, PartialEq)]
pub struct Dither(pub Vec<f64>);

impl Dither {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Quadratic form used by the closest-point decoder, `(y-t)^T W (y-t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum DecodingMetric {
    /// Diagonal `W`, one positive weight per coordinate.
    Diagonal(Vec<f64>),
    /// Block-diagonal `W` with square blocks of size `block`.
    BlockDiagonal { block: usize, blocks: Vec<DMatrix<f64>> },
}

impl DecodingMetric {
    pub fn identity(n: usize) -> Self {
        DecodingMetric::Diagonal(vec![1.0; n])
    }

    pub fn dimension(&self) -> usize {
        match self {
            DecodingMetric::Diagonal(w) => w.len(),
            DecodingMetric::BlockDiagonal { block, blocks } => block * blocks.len(),
        }
    }

    /// Evaluates `v^T W v`.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        match self {
            DecodingMetric::Diagonal(w) => w.iter().zip(v).map(|(w, v)| w * v * v).sum(),
            DecodingMetric::BlockDiagonal { block, blocks } => blocks
                .iter()
                .enumerate()
                .map(|(j, b)| {
                    let seg = &v[j * block..(j + 1) * block];
                    let mut acc = 0.0;
                    for r in 0..*block {
                        for c in 0..*block {
                            acc += seg[r] * b[(r, c)] * seg[c];
                        }
                    }
                    acc
                })
                .sum(),
        }
    }
}

pub fn is_prime(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    if q < 4 {
        return true;
    }
    if q.is_multiple_of(2) {
        return false;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= q {
        if q.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

fn mul_mod(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 * b as u128) % q as u128) as u64
}

fn inv_mod(a: u64, q: u64) -> u64 {
    // q prime: a^(q-2)
    let (mut base, mut exp, mut acc) = (a % q, q - 2, 1u64);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, q);
        }
        base = mul_mod(base, base, q);
        exp >>= 1;
    }
    acc
}

/// Rounds to the nearest integer, ties toward negative infinity.
#[inline]
fn round_half_down(x: f64) -> f64 {
    (x - 0.5).ceil()
}

impl NestedLatticePair {
    pub fn build(n: usize, q: u64, source: GeneratorSource, target_power: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("lattice dimension must be positive".into()));
        }
        if !is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        if !(target_power > 0.0 && target_power.is_finite()) {
            return Err(Error::NonPositivePower(target_power));
        }
        let generator = match source {
            GeneratorSource::Explicit(g) => {
                if g.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: g.len() });
                }
                g.into_iter().map(|x| x % q).collect::<Vec<_>>()
            }
            GeneratorSource::Seeded(seed) => {
                let mut rng = rng_from_seed(seed);
                loop {
                    let g: Vec<u64> = (0..n).map(|_| rng.random_range(0..q)).collect();
                    if g.iter().any(|&x| x != 0) {
                        break g;
                    }
                }
            }
        };
        let pivot = generator.iter().position(|&x| x != 0).ok_or(Error::ZeroGenerator)?;
        let pivot_inv = inv_mod(generator[pivot], q);
        Ok(Self {
            n,
            q,
            eta: (12.0 * target_power).sqrt(),
            generator,
            target_power,
            pivot,
            pivot_inv,
        })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn generator(&self) -> &[u64] {
        &self.generator
    }

    /// Coarse scaling; the coarse lattice is `eta * Z^n`.
    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn target_power(&self) -> f64 {
        self.target_power
    }

    /// Analytic second moment per dimension of the coarse lattice, `eta^2 / 12`.
    pub fn second_moment(&self) -> f64 {
        self.eta * self.eta / 12.0
    }

    pub fn codebook_size(&self) -> u64 {
        self.q
    }

    /// Bits per real dimension.
    pub fn rate(&self) -> f64 {
        (self.q as f64).log2() / self.n as f64
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: len });
        }
        Ok(())
    }

    fn codeword_residues(&self, beta: u64) -> Vec<u64> {
        self.generator.iter().map(|&g| mul_mod(g, beta, self.q)).collect()
    }

    /// `eta * ((g * beta) mod q) / q`, the coset offset in `[0, eta)^n`.
    pub fn coset_offset(&self, beta: u64) -> Vec<f64> {
        let q = self.q as f64;
        self.codeword_residues(beta % self.q)
            .into_iter()
            .map(|z| self.eta * z as f64 / q)
            .collect()
    }

    /// Coset representative of message `beta` inside the shaping region.
    pub fn codeword(&self, beta: u64) -> LatticePoint {
        let offset = self.coset_offset(beta);
        LatticePoint {
            coords: self.mod_coarse_unchecked(&offset),
            coset_index: beta % self.q,
        }
    }

    pub fn codebook(&self) -> Vec<LatticePoint> {
        (0..self.q).map(|b| self.codeword(b)).collect()
    }

    fn quantize_unchecked(&self, s: &[f64]) -> Vec<f64> {
        s.iter().map(|&x| self.eta * round_half_down(x / self.eta)).collect()
    }

    fn mod_coarse_unchecked(&self, s: &[f64]) -> Vec<f64> {
        let half = 0.5 * self.eta;
        s.iter()
            .map(|&x| {
                let mut r = x - self.eta * round_half_down(x / self.eta);
                // floating-point cancellation can land exactly on the excluded face
                if r <= -half {
                    r += self.eta;
                } else if r > half {
                    r -= self.eta;
                }
                r
            })
            .collect()
    }

    /// Nearest coarse-lattice point (per-coordinate rounding, ties toward -inf).
    pub fn quantize_coarse(&self, s: &[f64]) -> Result<Vec<f64>> {
        self.check_len(s.len())?;
        Ok(self.quantize_unchecked(s))
    }

    /// `s - Q(s)`, landing in `(-eta/2, eta/2]^n`.
    pub fn mod_coarse(&self, s: &[f64]) -> Result<Vec<f64>> {
        self.check_len(s.len())?;
        Ok(self.mod_coarse_unchecked(s))
    }

    fn integer_coords(&self, p: &[f64], scale: f64) -> Option<Vec<i64>> {
        p.iter()
            .map(|&x| {
                let v = x * scale;
                let r = v.round();
                ((v - r).abs() <= MEMBERSHIP_TOL * r.abs().max(1.0)).then_some(r as i64)
            })
            .collect()
    }

    pub fn is_coarse_point(&self, p: &[f64]) -> bool {
        p.len() == self.n && self.integer_coords(p, 1.0 / self.eta).is_some()
    }

    /// Coset index of a fine-lattice point, `None` if `p` is not on the fine lattice.
    pub fn coset_of(&self, p: &[f64]) -> Option<u64> {
        if p.len() != self.n {
            return None;
        }
        let z = self.integer_coords(p, self.q as f64 / self.eta)?;
        let q = self.q as i64;
        let residues: Vec<u64> = z.iter().map(|v| v.rem_euclid(q) as u64).collect();
        let beta = mul_mod(residues[self.pivot], self.pivot_inv, self.q);
        (self.codeword_residues(beta) == residues).then_some(beta)
    }

    pub fn is_fine_point(&self, p: &[f64]) -> bool {
        self.coset_of(p).is_some()
    }

    /// I.i.d. uniform coordinates on `[-eta/2, eta/2)`.
    pub fn sample_dither(&self, seed: u64) -> Dither {
        let mut rng = rng_from_seed(seed);
        Dither(
            (0..self.n)
                .map(|_| self.eta * (rng.random::<f64>() - 0.5))
                .collect(),
        )
    }

    /// Dithered channel input `x = [t - d] mod coarse`.
    pub fn encode(&self, t: &LatticePoint, d: &Dither) -> Result<Vec<f64>> {
        self.check_len(t.coords.len())?;
        self.check_len(d.0.len())?;
        if self.coset_of(&t.coords).is_none() {
            return Err(Error::NotFinePoint);
        }
        let diff: Vec<f64> = t.coords.iter().zip(&d.0).map(|(t, d)| t - d).collect();
        Ok(self.mod_coarse_unchecked(&diff))
    }

    /// Monte Carlo estimate of `(1/n) E||u||^2` for `u` uniform on the shaping region.
    pub fn second_moment_estimate(&self, samples: usize, seed: u64) -> Result<f64> {
        if samples == 0 {
            return Err(Error::InvalidParameter("at least one sample is required".into()));
        }
        let mut rng = rng_from_seed(seed);
        let mut acc = 0.0;
        for _ in 0..samples * self.n {
            let u = self.eta * (rng.random::<f64>() - 0.5);
            acc += u * u;
        }
        Ok(acc / (samples * self.n) as f64)
    }

    /// Maps a decoded fine point back to its message index via `[t] mod coarse`.
    pub fn recover_message(&self, t_hat: &LatticePoint) -> Result<u64> {
        self.check_len(t_hat.coords.len())?;
        let reduced = self.mod_coarse_unchecked(&t_hat.coords);
        self.coset_of(&reduced).ok_or(Error::NotFinePoint)
    }

    /// Fine-lattice point minimising `(y - t)^T W (y - t)`.
    ///
    /// For each coset the problem separates: coordinate-wise rounding is exact
    /// for a diagonal metric, and each block of a block-diagonal metric is
    /// solved by depth-first enumeration with radius pruning.
    pub fn weighted_nearest_fine(&self, y: &[f64], metric: &DecodingMetric) -> Result<LatticePoint> {
        self.check_len(y.len())?;
        if metric.dimension() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: metric.dimension() });
        }
        match metric {
            DecodingMetric::Diagonal(w) => {
                if w.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
                    return Err(Error::NotPositiveDefinite);
                }
                Ok(self.nearest_diagonal(y, w))
            }
            DecodingMetric::BlockDiagonal { block, blocks } => {
                if *block == 0 || *block > MAX_BLOCK {
                    return Err(Error::UnsupportedBlockSize(*block));
                }
                let factors = blocks
                    .iter()
                    .map(|b| upper_factor(b, *block, self.eta))
                    .collect::<Result<Vec<_>>>()?;
                Ok(self.nearest_block(y, *block, &factors))
            }
        }
    }

    fn nearest_diagonal(&self, y: &[f64], w: &[f64]) -> LatticePoint {
        let q = self.q as f64;
        let mut residues = vec![0u64; self.n];
        let mut best = (f64::INFINITY, 0u64);
        for beta in 0..self.q {
            let mut dist = 0.0;
            for i in 0..self.n {
                let o = self.eta * residues[i] as f64 / q;
                let r = y[i] - o;
                let e = r - self.eta * (r / self.eta).round();
                dist += w[i] * e * e;
                if dist >= best.0 {
                    break;
                }
            }
            if dist < best.0 {
                best = (dist, beta);
            }
            for (z, g) in residues.iter_mut().zip(&self.generator) {
                *z = (*z + g) % self.q;
            }
        }
        let beta = best.1;
        let offset = self.coset_offset(beta);
        let coords = y
            .iter()
            .zip(&offset)
            .map(|(&y, &o)| o + self.eta * ((y - o) / self.eta).round())
            .collect();
        LatticePoint { coords, coset_index: beta }
    }

    fn nearest_block(&self, y: &[f64], m: usize, factors: &[BlockFactor]) -> LatticePoint {
        let mut best: (f64, u64, Vec<[i64; MAX_BLOCK]>) = (f64::INFINITY, 0, Vec::new());
        let mut ks = Vec::with_capacity(factors.len());
        for beta in 0..self.q {
            let offset = self.coset_offset(beta);
            let mut total = 0.0;
            ks.clear();
            for (j, f) in factors.iter().enumerate() {
                let mut c = [0.0; MAX_BLOCK];
                for r in 0..m {
                    c[r] = (y[j * m + r] - offset[j * m + r]) / self.eta;
                }
                let (k, d) = f.closest(&c);
                total += d;
                ks.push(k);
                if total >= best.0 {
                    break;
                }
            }
            if total < best.0 {
                best = (total, beta, ks.clone());
            }
        }
        let (_, beta, ks) = best;
        let offset = self.coset_offset(beta);
        let mut coords = vec![0.0; self.n];
        for (j, k) in ks.iter().enumerate() {
            for r in 0..m {
                coords[j * m + r] = offset[j * m + r] + self.eta * k[r] as f64;
            }
        }
        LatticePoint { coords, coset_index: beta }
    }

    /// CSV dump of the codebook: `beta,coord_0,...,coord_{n-1}`.
    pub fn write_codebook_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let header: Vec<String> = std::iter::once("beta".to_string())
            .chain((0..self.n).map(|i| format!("coord_{i}")))
            .collect();
        writeln!(out, "{}", header.join(","))?;
        for p in self.codebook() {
            let row: Vec<String> = p.coords.iter().map(|c| format!("{c:.6}")).collect();
            writeln!(out, "{},{}", p.coset_index, row.join(","))?;
        }
        Ok(())
    }
}

/// Upper-triangular factor `G = eta * R` with `W = R^T R`, used by the block search.
#[derive(Debug, Clone)]
struct BlockFactor {
    m: usize,
    g: [[f64; MAX_BLOCK]; MAX_BLOCK],
}

fn upper_factor(w: &DMatrix<f64>, m: usize, eta: f64) -> Result<BlockFactor> {
    if w.nrows() != m || w.ncols() != m {
        return Err(Error::DimensionMismatch { expected: m, got: w.nrows() });
    }
    let sym_tol = 1e-9 * w.amax().max(1.0);
    for r in 0..m {
        for c in 0..r {
            if (w[(r, c)] - w[(c, r)]).abs() > sym_tol {
                return Err(Error::NotPositiveDefinite);
            }
        }
    }
    let chol = w.clone().cholesky().ok_or(Error::NotPositiveDefinite)?;
    let l = chol.l();
    let mut g = [[0.0; MAX_BLOCK]; MAX_BLOCK];
    for r in 0..m {
        for c in r..m {
            g[r][c] = eta * l[(c, r)];
        }
    }
    Ok(BlockFactor { m, g })
}

impl BlockFactor {
    /// Integer vector `k` minimising `||G (c - k)||^2`, with its distance.
    fn closest(&self, c: &[f64; MAX_BLOCK]) -> ([i64; MAX_BLOCK], f64) {
        let mut state = SearchState {
            k: [0; MAX_BLOCK],
            best_k: [0; MAX_BLOCK],
            best: f64::INFINITY,
        };
        self.descend(self.m - 1, 0.0, c, &mut state);
        (state.best_k, state.best)
    }

    fn descend(&self, level: usize, partial: f64, c: &[f64; MAX_BLOCK], st: &mut SearchState) {
        let gii = self.g[level][level];
        let mut center = c[level];
        for j in level + 1..self.m {
            center += self.g[level][j] * (c[j] - st.k[j] as f64) / gii;
        }
        let k0 = center.round() as i64;
        let step: i64 = if center >= k0 as f64 { 1 } else { -1 };
        // zig-zag k0, k0+s, k0-s, k0+2s, ...: |center - k| is nondecreasing along it
        let mut idx: i64 = 0;
        loop {
            let delta = if idx == 0 {
                0
            } else if idx % 2 == 1 {
                step * ((idx + 1) / 2)
            } else {
                -step * (idx / 2)
            };
            let k = k0 + delta;
            let e = center - k as f64;
            let d = partial + gii * gii * e * e;
            if d >= st.best {
                break;
            }
            st.k[level] = k;
            if level == 0 {
                st.best = d;
                st.best_k = st.k;
            } else {
                self.descend(level - 1, d, c, st);
            }
            idx += 1;
        }
    }
}

struct SearchState {
    k: [i64; MAX_BLOCK],
    best_k: [i64; MAX_BLOCK],
    best: f64,
}
