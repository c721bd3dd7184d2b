use commlab::analyzer::{min_cover, Cell, FunctionMatrix};
use commlab::polytopes::{cor_slack, fv_protocol_from_cover, lp_optimize, permutahedron_ef, LinearSystem};
use commlab::rng::SplitMix64;
use commlab::scalar::int;
use commlab::Rational;

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

#[test]
fn lp_optimum_equals_best_permutation() {
    let mut rng = SplitMix64::new(314);
    for n in 3..=4 {
        let sys: LinearSystem<Rational> = permutahedron_ef(n).unwrap();
        assert_eq!(sys.constraint_count(), n * n + 3 * n);
        for _ in 0..20 {
            let c: Vec<i64> = (0..n).map(|_| rng.below(21) as i64 - 10).collect();
            let brute = permutations(n)
                .iter()
                .map(|p| p.iter().zip(&c).map(|(&v, &w)| (v as i64 + 1) * w).sum::<i64>())
                .max()
                .unwrap();
            let obj: Vec<Rational> = c.iter().map(|&v| int(v)).collect();
            assert_eq!(lp_optimize(&sys, &obj).unwrap().value, int(brute), "objective {c:?}");
            let float: LinearSystem<f64> = permutahedron_ef(n).unwrap();
            let fobj: Vec<f64> = c.iter().map(|&v| v as f64).collect();
            assert!((lp_optimize(&float, &fobj).unwrap().value - brute as f64).abs() < 1e-6);
        }
    }
}

#[test]
fn single_precision_instantiation() {
    let sys: LinearSystem<f32> = permutahedron_ef(3).unwrap();
    let sol = lp_optimize(&sys, &[3.0, 2.0, 1.0]).unwrap();
    assert!((sol.value - 14.0).abs() < 1e-3);
}

#[test]
fn slack_entries_are_squares() {
    for n in 1..=3 {
        let s = cor_slack::<Rational>(n).unwrap();
        for sm in 0..1usize << n {
            for r in 0..1usize << n {
                let k = (sm & r).count_ones() as i64;
                assert_eq!(s.entries[sm][r], int((k - 1) * (k - 1)));
            }
        }
    }
}

#[test]
fn support_is_the_unique_disjointness_pattern() {
    for n in 1..=3 {
        let support = cor_slack::<Rational>(n).unwrap().support();
        let mu = FunctionMatrix::unique_disjointness(n);
        for sm in 0..1usize << n {
            for r in 0..1usize << n {
                let positive = support.get2(sm, r) == Cell::One;
                assert_eq!(positive, mu.get2(sm, r) != Cell::Zero);
            }
        }
    }
}

#[test]
fn cover_protocol_is_correct_everywhere() {
    for n in 1..=3 {
        let mu = FunctionMatrix::unique_disjointness(n);
        let cover = min_cover(&mu, true).unwrap();
        assert!(cover.size as f64 >= 1.5f64.powi(n as i32).ceil());
        let protocol = fv_protocol_from_cover(&mu, cover.rects.clone()).unwrap();
        for x in 0..1usize << n {
            for y in 0..1usize << n {
                let out = protocol.run(x, y);
                assert_eq!(out.prover_bits(), protocol.cost());
                match mu.get2(x, y) {
                    Cell::One => assert!(out.output),
                    Cell::Zero => assert!(!out.output),
                    Cell::Star => {}
                }
            }
        }
    }
}
