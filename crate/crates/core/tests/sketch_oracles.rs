use std::collections::HashMap;

use commlab::gf2hash::{FieldSpec, KWisePoly, SignHash};
use commlab::rng::SplitMix64;
use commlab::scalar::int;
use commlab::sketches::{F0Sketch, F2Sketch, MisraGries, MorrisCounter, Stream, StreamingSketch};
use commlab::Rational;
use num_bigint::BigInt;

fn second_moment(items: &[u64]) -> i64 {
    let mut counts: HashMap<u64, i64> = HashMap::new();
    for &j in items {
        *counts.entry(j).or_default() += 1;
    }
    counts.values().map(|c| c * c).sum()
}

fn random_stream(rng: &mut SplitMix64, universe: u64, max_len: usize) -> Vec<u64> {
    let len = 1 + rng.below_usize(max_len);
    (0..len).map(|_| 1 + rng.below(universe)).collect()
}

#[test]
fn basic_estimator_is_unbiased_over_the_whole_family() {
    let spec = FieldSpec::new(2).unwrap();
    let family: Vec<SignHash> = KWisePoly::family(spec, 4).map(SignHash::new).collect();
    assert_eq!(family.len(), 256);
    let mut rng = SplitMix64::new(77);
    let mut streams = vec![vec![1, 1, 2], vec![4, 4, 4, 4, 4, 4], vec![1, 2, 3, 4]];
    streams.extend((0..20).map(|_| random_stream(&mut rng, 4, 6)));
    for items in streams {
        let f2 = second_moment(&items);
        let mut sum = BigInt::from(0);
        let mut sum_sq = BigInt::from(0);
        for h in &family {
            let z: i64 = items.iter().map(|&j| h.sign_item(j).unwrap()).sum();
            sum += z * z;
            sum_sq += BigInt::from(z).pow(4);
        }
        assert_eq!(sum, BigInt::from(256 * f2), "stream {items:?}");
        assert!(sum_sq <= BigInt::from(3 * 256 * f2 * f2), "stream {items:?}");
    }
}

#[test]
fn sketch_counters_match_direct_sums() {
    let mut rng = SplitMix64::new(5);
    let mut sketch = F2Sketch::new(16, 12, 3, &mut rng).unwrap();
    let items = random_stream(&mut rng, 16, 64);
    sketch.feed(&items).unwrap();
    for (z, h) in sketch.counters().iter().zip(sketch.hashes()) {
        let direct: i64 = items.iter().map(|&j| h.sign_item(j).unwrap()).sum();
        assert_eq!(*z, direct);
    }
    let restored = F2Sketch::deserialize(&sketch.serialize()).unwrap();
    assert_eq!(restored.estimate(), sketch.estimate());
}

#[test]
fn distinct_count_is_exact_below_retention() {
    let mut rng = SplitMix64::new(9);
    for _ in 0..20 {
        let items = random_stream(&mut rng, 32, 40);
        let distinct = items.iter().collect::<std::collections::BTreeSet<_>>().len();
        let mut s = F0Sketch::new(32, 48, &mut rng).unwrap();
        s.feed(&items).unwrap();
        assert_eq!(s.estimate(), int(distinct as i64));
        assert_eq!(Stream::new(32, items).unwrap().moment(0), BigInt::from(distinct));
    }
}

#[test]
fn heavy_hitters_survive() {
    let mut rng = SplitMix64::new(21);
    for _ in 0..50 {
        let items = random_stream(&mut rng, 6, 200);
        let k = 2 + rng.below_usize(4);
        let mut mg = MisraGries::new(k).unwrap();
        items.iter().for_each(|&j| mg.update(j));
        let mut counts: HashMap<u64, usize> = HashMap::new();
        items.iter().for_each(|&j| *counts.entry(j).or_default() += 1);
        for (j, c) in counts {
            if c * k > items.len() {
                assert!(mg.candidates().contains(&j), "item {j} with count {c} of {}", items.len());
            }
        }
    }
}

#[test]
fn morris_mean_tracks_count() {
    let n = 100;
    let trials = 4000;
    let mut total = Rational::from_integer(0.into());
    for seed in 0..trials {
        let mut c = MorrisCounter::new(seed);
        (0..n).for_each(|_| c.touch());
        total += c.estimate();
    }
    let mean = commlab::scalar::rational_to_f64(&(total / int(trials as i64)));
    assert!((mean - n as f64).abs() < 0.1 * n as f64, "mean {mean}");
}
