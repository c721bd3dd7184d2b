use commlab::ann::{AnnIndex, AnnParams};
use commlab::bits::all_vectors;
use commlab::reductions::*;
use commlab::rng::SplitMix64;
use commlab::scalar::int;
use commlab::BitVector;

#[test]
fn index_to_disjointness_exhaustive() {
    for n in 1..=5 {
        for x in all_vectors(n) {
            for i in 1..=n {
                let inst = IndexInstance::new(x.clone(), i).unwrap();
                let (a, b) = index_to_disj(&inst);
                let overlap = a.iter().zip(b.iter()).any(|(u, v)| u && v);
                assert_eq!(!overlap, !x.get(i - 1));
                assert_eq!(disjoint(&a, &b), !inst.answer());
            }
        }
    }
}

#[test]
fn hamming_from_distinct_count_exhaustive() {
    for n in 1..=4 {
        for x in all_vectors(n) {
            for y in all_vectors(n) {
                let d = x.iter().zip(y.iter()).filter(|(u, v)| u != v).count();
                assert_eq!(gh_via_f0(&x, &y, exact_f0).unwrap(), int(d as i64));
            }
        }
    }
}

#[test]
fn disjointness_via_max_frequency_exhaustive() {
    for n in 1..=4 {
        for x in all_vectors(n) {
            for y in all_vectors(n) {
                let truth = x.iter().zip(y.iter()).all(|(u, v)| !(u && v));
                assert_eq!(disj_via_finfty(&x, &y, FinftyMode::Exact).unwrap(), truth);
                assert_eq!(disj_via_finfty(&x, &y, FinftyMode::Approx { seed: 8 }).unwrap(), truth);
            }
        }
    }
}

#[test]
fn codebook_pairs_are_far() {
    let cb = build_codebook(16, 2, 16, 7, 10_000).unwrap();
    let need = codebook_distance(2);
    for (i, a) in cb.vectors().iter().enumerate() {
        assert_eq!(a.count_ones(), 2);
        for b in &cb.vectors()[i + 1..] {
            assert!(a.hamming(b) >= need);
        }
    }
}

#[test]
fn welfare_values_by_brute_force() {
    let family = intersecting_family(8, 2, 3, 11, 10_000).unwrap();
    assert!(is_intersecting(&family, 2));
    let cases = [(vec![vec![0], vec![1]], 1u32, 3u32), (vec![vec![0, 2], vec![2]], 2, 4)];
    for (sets, plain, shifted) in cases {
        let inst = mdisj_to_welfare(sets.clone(), family.clone(), false).unwrap();
        assert_eq!(inst.optimal_welfare().unwrap().0, plain);
        let sub = mdisj_to_welfare(sets, family.clone(), true).unwrap();
        assert_eq!(sub.optimal_welfare().unwrap().0, shifted);
        for i in 0..2 {
            for s in 0..1u64 << 8 {
                for t in 0..1u64 << 8 {
                    if s & t == s {
                        assert!(sub.value(i, s) <= sub.value(i, t));
                    }
                    assert!(sub.value(i, s | t) <= sub.value(i, s) + sub.value(i, t));
                }
            }
        }
    }
}

#[test]
fn ann_answers_within_factor() {
    let mut rng = SplitMix64::new(3);
    let d = 32;
    let points: Vec<BitVector> = (0..16).map(|_| BitVector::from_u64(rng.next_u64() & 0xffff_ffff, d)).collect();
    let index = AnnIndex::new(points.clone(), AnnParams::new(1.0, 0.1), 17).unwrap();
    let mut good = 0;
    for t in 0..40 {
        let mut q = points[t % points.len()].clone();
        for _ in 0..3 {
            q.flip(rng.below_usize(d));
        }
        let best = points.iter().map(|p| p.hamming(&q)).min().unwrap();
        let ans = index.query(&q, t as u64).unwrap();
        assert!(ans.probes <= 1 + 5 + 1);
        if points[ans.point].hamming(&q) <= 2 * best {
            good += 1;
        }
    }
    assert!(good >= 34, "{good} of 40");
}
