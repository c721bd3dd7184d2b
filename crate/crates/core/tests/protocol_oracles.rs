use commlab::analyzer::FunctionMatrix;
use commlab::bits::all_vectors;
use commlab::protocols::{equality_tape_len, gap_probability, run_cis, run_equality, CisInstance, Tape};
use commlab::scalar::{int, ratio};
use commlab::{BitVector, Rational};
use num_traits::{One, Zero};

fn tape_count(len: usize) -> u64 {
    1u64 << len
}

#[test]
fn equality_errors_by_full_enumeration() {
    for n in 1..=3 {
        for reps in 1..=2 {
            let len = equality_tape_len(n, reps);
            if len > 12 {
                continue;
            }
            for x in all_vectors(n) {
                for y in all_vectors(n) {
                    let fooled = (0..tape_count(len))
                        .filter(|&t| run_equality(&x, &y, &mut Tape::fixed(BitVector::from_u64(t, len)), reps).unwrap().output)
                        .count() as u64;
                    if x == y {
                        assert_eq!(fooled, tape_count(len));
                    } else {
                        assert_eq!(fooled * 4u64.pow(reps as u32), tape_count(len), "n={n} reps={reps}");
                    }
                }
            }
        }
    }
}

/// Weighted sum over all `r` of the mass where `<r, x> != <r, y>`, with
/// each coordinate of `r` set with probability `1 / (2L)`.
fn weighted_flip(d: usize, diff: usize, scale: u64) -> Rational {
    let p = ratio(1, 2 * scale as i64);
    let q = Rational::one() - p.clone();
    let mut total = Rational::zero();
    for r in 0..1u32 << d {
        let set = r.count_ones() as i32;
        let odd = (r & ((1 << diff) - 1)).count_ones() % 2 == 1;
        if odd {
            total += num_traits::pow(p.clone(), set as usize) * num_traits::pow(q.clone(), d - set as usize);
        }
    }
    total
}

#[test]
fn flip_probability_matches_weighted_enumeration() {
    for scale in 1..=4u64 {
        for d in 1..=6 {
            for diff in 0..=d.min(4) {
                assert_eq!(gap_probability(scale, diff as u64), weighted_flip(d, diff, scale), "L={scale} d={d} diff={diff}");
            }
        }
    }
    assert_eq!(gap_probability(2, 1), ratio(1, 4));
    assert_eq!(gap_probability(1, 3), ratio(1, 2));
    assert_eq!(gap_probability(3, 0), int(0));
}

fn is_clique(adj: &[BitVector], set: u64) -> bool {
    (0..adj.len()).all(|u| (0..adj.len()).all(|v| u == v || (set >> u) & 1 == 0 || (set >> v) & 1 == 0 || adj[u].get(v)))
}

fn is_independent(adj: &[BitVector], set: u64) -> bool {
    (0..adj.len()).all(|u| (0..adj.len()).all(|v| u == v || (set >> u) & 1 == 0 || (set >> v) & 1 == 0 || !adj[u].get(v)))
}

#[test]
fn clique_vs_independent_set_exhaustive() {
    for n in 1..=4usize {
        let width = if n <= 1 { 0 } else { usize::BITS as usize - (n - 1).leading_zeros() as usize };
        let bound = 4 * (width + 1).pow(2);
        let edges = n * (n - 1) / 2;
        for mask in 0..1u64 << edges {
            let adj = CisInstance::graph_from_mask(n, mask);
            let cliques: Vec<u64> = (0..1u64 << n).filter(|&s| is_clique(&adj, s)).collect();
            let indeps: Vec<u64> = (0..1u64 << n).filter(|&s| is_independent(&adj, s)).collect();
            for &c in &cliques {
                for &i in &indeps {
                    let inst = CisInstance::new(adj.clone(), BitVector::from_u64(c, n), BitVector::from_u64(i, n)).unwrap();
                    let out = run_cis(&inst);
                    assert_eq!(out.output, c & i == 0);
                    assert!(out.total_bits() <= bound);
                }
            }
        }
    }
}

#[test]
fn named_matrices_count_entries() {
    for n in 1..=3 {
        let eq = FunctionMatrix::equality(n);
        assert_eq!(eq.count(commlab::analyzer::Cell::One), 1 << n);
        let disj = FunctionMatrix::disjointness(n);
        assert_eq!(disj.count(commlab::analyzer::Cell::One), 3usize.pow(n as u32));
    }
}
