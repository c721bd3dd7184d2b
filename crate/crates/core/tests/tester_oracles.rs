use commlab::protocols::Tape;
use commlab::rng::SplitMix64;
use commlab::scalar::ratio;
use commlab::testers::*;

fn bool_fn(n: usize, mask: u64) -> BoolFn {
    BoolFn::from_mask(n, mask).unwrap()
}

/// Monotone iff no pair `x subset y` has `f(x) > f(y)`.
fn monotone_by_pairs(f: &impl CubeFn) -> bool {
    (0..f.size()).all(|x| (0..f.size()).all(|y| x & y != x || f.at(x) <= f.at(y)))
}

#[test]
fn boolean_chain_exhaustive() {
    for n in 1..=3 {
        for mask in 0..1u64 << (1 << n) {
            let f = bool_fn(n, mask);
            let v = violation_slices(&f);
            let m = monotonize_bool(&f);
            assert!(monotone_by_pairs(&m.g));
            assert!(m.changes <= 2 * v.total());
            let dist = distance_to_monotone(&f).unwrap();
            assert!(dist <= m.changes);
            assert_eq!(dist, distance_by_matching(&f).unwrap());
            assert_eq!(v.probability, ratio(v.total() as i64, (n << (n - 1)) as i64));
        }
    }
}

#[test]
fn boolean_oracles_agree_at_four() {
    let mut rng = SplitMix64::new(44);
    for _ in 0..300 {
        let f = bool_fn(4, rng.next_u64() & 0xffff);
        assert_eq!(distance_to_monotone(&f).unwrap(), distance_by_matching(&f).unwrap());
        assert!(distance_to_monotone(&f).unwrap() <= 2 * violation_slices(&f).total());
    }
}

#[test]
fn ranged_chain_exhaustive() {
    for n in 1..=3usize {
        for r in 2..=4u32 {
            let size = 1usize << n;
            let total = (r as u64).pow(size as u32);
            for code in 0..total {
                let mut c = code;
                let table: Vec<u32> = (0..size).map(|_| { let v = (c % r as u64) as u32; c /= r as u64; v }).collect();
                let f = RangedFn::new(n, r, table).unwrap();
                let m = monotonize_ranged(&f);
                let bound = 2 * range_bits(r) as usize * violation_slices(&f).total();
                assert!(monotone_by_pairs(&m.g));
                assert!(m.changes <= bound, "{f}");
                let dist = distance_to_monotone(&f).unwrap();
                assert!(dist <= m.changes);
                assert_eq!(dist, distance_by_matching(&f).unwrap());
            }
        }
    }
}

#[test]
fn gadget_dichotomy_exhaustive() {
    for n in 1..=4 {
        for a in 0..1usize << n {
            for b in 0..1usize << n {
                let g = GadgetAB::new(n, a, b).unwrap();
                let h = gadget_h(&g, None);
                match g.intersection() {
                    0 => assert!(monotone_by_pairs(&h)),
                    1 => {
                        let i = (a & b).trailing_zeros() as usize;
                        assert!(8 * violation_slices(&h).counts[i] >= 1 << n);
                        assert!(8 * distance_by_matching(&h).unwrap() >= 1 << n);
                    }
                    _ => {}
                }
            }
        }
    }
}

#[test]
fn truncation_preserves_monotone_gadgets() {
    for a in 0..16 {
        for b in (0..16).filter(|b| b & a == 0) {
            let g = GadgetAB::new(4, a, b).unwrap();
            assert!(is_monotone(&gadget_h(&g, Some(TRUNCATION_C))));
        }
    }
}

#[test]
fn blr_probability_by_pair_count() {
    let and = BoolFn::from_fn(2, |x| x == 3).unwrap();
    let mut bad = 0;
    for x in 0..4usize {
        for y in 0..4usize {
            let f = |z: usize| z == 3;
            if f(x) ^ f(y) != f(x ^ y) {
                bad += 1;
            }
        }
    }
    assert_eq!(blr_rejection_probability(&and), ratio(bad, 16));
}

#[test]
fn edge_tester_frequency_matches_count() {
    let f = BoolFn::from_fn(2, |x| x != 3).unwrap();
    let p = violation_slices(&f).probability;
    let trials = 100_000;
    let mut tape = Tape::seeded(12);
    let rejected = (0..trials).filter(|_| !edge_test(&f, 1, &mut tape).unwrap().accepted).count();
    let freq = rejected as f64 / trials as f64;
    assert!((freq - commlab::scalar::rational_to_f64(&p)).abs() < 0.01, "freq {freq} vs {p}");
}

#[test]
fn one_sided_on_monotone_functions() {
    for mask in monotone_tables(3).unwrap() {
        let f = bool_fn(3, mask);
        for seed in 0..20 {
            assert!(edge_test(&f, 30, &mut Tape::seeded(seed)).unwrap().accepted);
        }
    }
}
