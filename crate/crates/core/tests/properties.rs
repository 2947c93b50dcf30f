mod common;

use ergodic_lattice::csit::{design_permutation_best_effort, design_permutation_sorted};
use ergodic_lattice::fading::DiscreteFadingDistribution;
use ergodic_lattice::lattice::{DecodingMetric, GeneratorSource, NestedLatticePair};
use ergodic_lattice::power::{waterfill_scalar, waterfill_spacetime};
use ergodic_lattice::rng::rng_from_seed;
use proptest::prelude::*;
use rand::Rng;

fn pair_strategy() -> impl Strategy<Value = NestedLatticePair> {
    (1usize..=12, prop::sample::select(vec![2u64, 3, 5, 7, 11, 13, 17, 257]), any::<u64>(), 0.01f64..50.0)
        .prop_map(|(n, q, seed, rho)| NestedLatticePair::build(n, q, GeneratorSource::Seeded(seed), rho).unwrap())
}

fn pair_and_points(k: usize) -> impl Strategy<Value = (NestedLatticePair, Vec<Vec<f64>>)> {
    pair_strategy().prop_flat_map(move |pair| {
        let n = pair.dimension();
        let span = 6.0 * pair.eta();
        (Just(pair), prop::collection::vec(prop::collection::vec(-span..span, n), k))
    })
}

fn is_bijection(perm: &[usize]) -> bool {
    let mut seen = vec![false; perm.len()];
    perm.iter().all(|&p| p < perm.len() && !std::mem::replace(&mut seen[p], true))
}

proptest! {
    #[test]
    fn mod_is_idempotent_and_lands_in_voronoi((pair, pts) in pair_and_points(1)) {
        let m = pair.mod_coarse(&pts[0]).unwrap();
        let half = pair.eta() / 2.0;
        prop_assert!(m.iter().all(|&v| v > -half - 1e-12 && v <= half + 1e-12));
        let again = pair.mod_coarse(&m).unwrap();
        for (a, b) in m.iter().zip(&again) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn mod_distributes_over_addition((pair, pts) in pair_and_points(2)) {
        let (s, t) = (&pts[0], &pts[1]);
        let mt = pair.mod_coarse(t).unwrap();
        let lhs = pair.mod_coarse(&s.iter().zip(t).map(|(a, b)| a + b).collect::<Vec<_>>()).unwrap();
        let rhs = pair.mod_coarse(&s.iter().zip(&mt).map(|(a, b)| a + b).collect::<Vec<_>>()).unwrap();
        let eta = pair.eta();
        for (a, b) in lhs.iter().zip(&rhs) {
            // equal up to a coarse shift that only a boundary tie could produce
            let d = (a - b).abs();
            prop_assert!(d <= 1e-9 || (d - eta).abs() <= 1e-9);
        }
    }

    #[test]
    fn coarse_points_are_fine_points(pair in pair_strategy(), ks in prop::collection::vec(-50i64..50, 12)) {
        let lambda: Vec<f64> = ks[..pair.dimension()].iter().map(|&k| k as f64 * pair.eta()).collect();
        prop_assert!(pair.is_coarse_point(&lambda));
        prop_assert!(pair.is_fine_point(&lambda));
        prop_assert_eq!(pair.coset_of(&lambda), Some(0));
    }

    #[test]
    fn encode_then_undither_recovers_codeword(pair in pair_strategy(), beta in any::<u64>(), seed in any::<u64>()) {
        let beta = beta % pair.q();
        let t = pair.codeword(beta);
        let d = pair.sample_dither(seed);
        let x = pair.encode(&t, &d).unwrap();
        let y: Vec<f64> = x.iter().zip(d.as_slice()).map(|(a, b)| a + b).collect();
        let back = pair.mod_coarse(&y).unwrap();
        for (a, b) in back.iter().zip(&t.coords) {
            let diff = (a - b).abs();
            prop_assert!(diff <= 1e-9 || (diff - pair.eta()).abs() <= 1e-9);
        }
        let t_hat = pair.weighted_nearest_fine(&y, &DecodingMetric::identity(pair.dimension())).unwrap();
        prop_assert_eq!(pair.recover_message(&t_hat).unwrap(), beta);
    }

    #[test]
    fn decoder_matches_exhaustive_search(
        n in 1usize..=6,
        q in prop::sample::select(vec![2u64, 3, 5, 7, 11]),
        seed in any::<u64>(),
        block in any::<bool>(),
    ) {
        let mut rng = rng_from_seed(seed);
        let n = if block { 2 * n.div_ceil(2) } else { n };
        let pair = NestedLatticePair::build(n, q, GeneratorSource::Seeded(seed), 0.1).unwrap();
        let metric = if block {
            DecodingMetric::BlockDiagonal { block: 2, blocks: (0..n / 2).map(|_| common::random_spd(2, &mut rng)).collect() }
        } else {
            DecodingMetric::Diagonal((0..n).map(|_| rng.random_range(0.25..3.0)).collect())
        };
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.5..1.5) * pair.eta()).collect();
        let got = pair.weighted_nearest_fine(&y, &metric).unwrap();
        let (_, _, best) = common::brute_force_nearest(&pair, &y, &metric);
        let v: Vec<f64> = y.iter().zip(&got.coords).map(|(a, b)| a - b).collect();
        prop_assert!(pair.is_fine_point(&got.coords));
        prop_assert!((metric.quadratic_form(&v) - best).abs() <= 1e-12 * best.max(1.0));
    }

    #[test]
    fn scalar_waterfilling_satisfies_kkt(
        raw in prop::collection::vec((0.05f64..5.0, 0.01f64..1.0), 1..8),
        rho in 0.01f64..100.0,
    ) {
        let mut support: Vec<f64> = raw.iter().map(|r| r.0).collect();
        support.sort_by(f64::total_cmp);
        support.dedup();
        let probs: Vec<f64> = raw[..support.len()].iter().map(|r| r.1).collect();
        let mass: f64 = probs.iter().sum();
        let probs: Vec<f64> = probs.iter().map(|p| p / mass).collect();
        let dist = DiscreteFadingDistribution::new(support.clone(), probs.clone()).unwrap();
        let s = waterfill_scalar(&dist, rho).unwrap();
        let spent: f64 = s.allocations.iter().zip(&probs).map(|(a, p)| a * p).sum();
        prop_assert!((spent - rho).abs() <= 1e-8 * rho.max(1.0));
        for (h, a) in support.iter().zip(&s.allocations) {
            let floor = 1.0 / (h * h);
            prop_assert!(*a >= 0.0);
            if *a > 0.0 {
                prop_assert!((a + floor - s.water_level).abs() <= 1e-8 * s.water_level.max(1.0));
            } else {
                prop_assert!(floor >= s.water_level - 1e-8);
            }
        }
    }

    #[test]
    fn spacetime_waterfilling_spends_budget(
        streams in prop::collection::vec(prop::collection::vec(0.05f64..4.0, 1..20), 1..4),
        budget in 0.1f64..50.0,
    ) {
        let s = waterfill_spacetime(&streams, budget).unwrap();
        let spent: f64 = s.stream_powers.iter().sum();
        prop_assert!((spent - budget).abs() <= 1e-6 * budget.max(1.0));
        for (ls, ps) in streams.iter().zip(&s.allocations) {
            for (l, p) in ls.iter().zip(ps) {
                prop_assert!(*p <= (s.water_level - 1.0 / (l * l)).max(0.0) + 1e-12);
            }
        }
    }

    #[test]
    fn permutations_are_bijections(idx in prop::collection::vec(0usize..3, 1..300), frac in 0.0f64..0.5) {
        let dist = DiscreteFadingDistribution::new(vec![0.5, 1.0, 2.0], vec![0.2, 0.3, 0.5]).unwrap();
        let h: Vec<f64> = idx.iter().map(|&k| dist.support()[k]).collect();
        let sorted = design_permutation_sorted(&h);
        prop_assert!(is_bijection(&sorted));
        prop_assert!(sorted.windows(2).all(|w| h[w[0]] <= h[w[1]]));
        let n_out = (frac * h.len() as f64).ceil() as usize;
        let be = design_permutation_best_effort(&h, &dist, n_out).unwrap();
        prop_assert!(is_bijection(&be.perm));
        prop_assert!(be.n_out_actual <= h.len());
    }
}
