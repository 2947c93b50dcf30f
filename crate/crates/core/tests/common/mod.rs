#![allow(dead_code)]

use ergodic_lattice::lattice::{DecodingMetric, NestedLatticePair};
use nalgebra::DMatrix;
use rand::Rng;

/// Exhaustive closest fine point: every coset, every integer shift inside a
/// box that provably contains all points at least as close as the
/// per-coset rounding candidates.
pub fn brute_force_nearest(pair: &NestedLatticePair, y: &[f64], metric: &DecodingMetric) -> (u64, Vec<f64>, f64) {
    let n = pair.dimension();
    let eta = pair.eta();
    let mut v = vec![0.0; n];
    let mut dist = |p: &[f64]| {
        for i in 0..n {
            v[i] = y[i] - p[i];
        }
        metric.quadratic_form(&v)
    };
    let mut d0 = f64::INFINITY;
    for beta in 0..pair.q() {
        let off = pair.coset_offset(beta);
        let p: Vec<f64> = (0..n).map(|i| off[i] + eta * ((y[i] - off[i]) / eta).round()).collect();
        d0 = d0.min(dist(&p));
    }
    // the ellipsoid {v : v^T W v <= d0} fits in the box |v_i| <= sqrt(d0 (W^-1)_ii)
    let radius: Vec<f64> = match metric {
        DecodingMetric::Diagonal(w) => w.iter().map(|&wi| (d0 / wi).sqrt()).collect(),
        DecodingMetric::BlockDiagonal { blocks, .. } => blocks
            .iter()
            .flat_map(|b| {
                let inv = b.clone().try_inverse().expect("metric block is invertible");
                (0..b.nrows()).map(move |i| (d0 * inv[(i, i)]).sqrt()).collect::<Vec<_>>()
            })
            .collect(),
    };
    let mut best = (0u64, Vec::new(), f64::INFINITY);
    let mut p = vec![0.0; n];
    for beta in 0..pair.q() {
        let off = pair.coset_offset(beta);
        let ranges: Vec<(i64, i64)> = (0..n)
            .map(|i| {
                let lo = ((y[i] - radius[i] - off[i]) / eta).floor() as i64;
                let hi = ((y[i] + radius[i] - off[i]) / eta).ceil() as i64;
                (lo, hi)
            })
            .collect();
        let mut k: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        'odometer: loop {
            for i in 0..n {
                p[i] = off[i] + eta * k[i] as f64;
            }
            let d = dist(&p);
            if d < best.2 {
                best = (beta, p.clone(), d);
            }
            let mut j = 0;
            loop {
                if j == n {
                    break 'odometer;
                }
                k[j] += 1;
                if k[j] <= ranges[j].1 {
                    break;
                }
                k[j] = ranges[j].0;
                j += 1;
            }
        }
    }
    best
}

/// Symmetric matrix with eigenvalues in `[0.5, 2]`.
pub fn random_spd<R: Rng>(m: usize, rng: &mut R) -> DMatrix<f64> {
    let a = DMatrix::from_fn(m, m, |_, _| rng.random::<f64>() - 0.5);
    let q = a.qr().q();
    let eig = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(m, |_, _| 0.5 + 1.5 * rng.random::<f64>()));
    let w = &q * eig * q.transpose();
    (&w + w.transpose()) * 0.5
}

pub const SMALL_PRIMES: [u64; 7] = [2, 3, 5, 7, 11, 13, 17];
