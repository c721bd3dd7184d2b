//! The acceptance criteria, each checked against an oracle written here
//! independently of the library code under test.

use std::time::{Duration, Instant};

use commlab::analyzer::{det_cc, max_box_ones, min_cover, verify_fooling_set, Cell, FunctionMatrix};
use commlab::ann::{ceil_log2, AnnIndex, AnnParams, DecisionTable};
use commlab::gf2hash::{FieldSpec, KWisePoly, SignHash};
use commlab::polytopes::{cor_slack, fv_protocol_from_cover, lp_optimize, permutahedron_ef, LinearSystem};
use commlab::protocols::{
    equality_tape_len, finfty_says_disjoint, gap_probability, name_width, run_cis, run_equality, streaming_to_oneway,
    CisInstance, Tape,
};
use commlab::reductions::{
    all_sparse, build_codebook, cs_decode, cs_encode, default_alpha, disj_via_finfty, intersecting_family,
    mdisj_to_welfare, toy_rows, toy_sensing, FinftyMode, GenieTopK, Partition, SensingMatrix,
};
use commlab::rng::{derive_seed, SplitMix64};
use commlab::scalar::{int, ratio};
use commlab::sketches::{f2_copies, ExactCounts, F2Sketch, StreamingSketch};
use commlab::testers::{
    blr_rejection_probability, blr_test, blr_test_trials, distance_by_matching, distance_to_linear, distance_to_monotone,
    gadget_h, monotonize_bool, monotonize_ranged, range_bits, tester_to_protocol, violation_slices, BoolFn, CubeFn,
    EdgeTester, GadgetAB, RangedFn,
};
use commlab::{BitVector, Error, Rational, Result};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::experiments::par_trials;
use crate::report::Report;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteConfig {
    /// Reduced Monte Carlo trial counts.
    pub quick: bool,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { quick: false, seed: 20_160_101 }
    }
}

impl SuiteConfig {
    fn trials(&self, full: usize, quick: usize) -> usize {
        if self.quick {
            quick
        } else {
            full
        }
    }

    fn seed_for(&self, id: usize) -> u64 {
        derive_seed(self.seed, id as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub pass: bool,
    pub detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Result<Check> {
    Ok(Check { pass, detail: detail.into() })
}

fn fail(detail: impl Into<String>) -> Result<Check> {
    check(false, detail)
}

pub struct Criterion {
    pub id: usize,
    pub name: &'static str,
    pub budget: Duration,
    run: fn(&SuiteConfig) -> Result<Check>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub id: usize,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "{} [{:>2}] {} ({:.2}s of {}s): {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs(),
            self.detail
        )
    }
}

pub fn criteria() -> Vec<Criterion> {
    let c = |id, name, secs, run| Criterion { id, name, budget: Duration::from_secs(secs), run };
    vec![
        c(1, "F2 basic estimator exact moments", 5, f2_exact as fn(&SuiteConfig) -> Result<Check>),
        c(2, "F2 Chebyshev guarantee", 30, f2_chebyshev),
        c(3, "equality protocol error by tape enumeration", 5, equality_exact),
        c(4, "biased inner-product flip probability", 10, gap_exact),
        c(5, "analyzer oracles", 60, analyzer_oracles),
        c(6, "multi-party disjointness counting", 60, mdisj_counting),
        c(7, "clique vs independent set protocol", 60, cis_exhaustive),
        c(8, "compressive sensing decode round trip", 10, cs_round_trip),
        c(9, "approximate nearest neighbor", 60, ann_trials),
        c(10, "permutahedron extended formulation", 30, permutahedron),
        c(11, "correlation polytope slack and cover", 60, correlation),
        c(12, "BLR linearity test", 60, blr),
        c(13, "monotonicity edge tester chain", 120, monotonicity),
        c(14, "gadget dichotomy and tester simulation", 120, gadget),
        c(15, "welfare reduction", 60, welfare),
        c(16, "streaming state hand-off", 30, adapter),
    ]
}

/// Criterion ids for a suite name; `all` runs every criterion.
pub fn suite_ids(name: &str) -> Result<Vec<usize>> {
    Ok(match name {
        "lecture1" => vec![1, 2, 16],
        "lecture3" => vec![3, 8],
        "lecture4" => vec![5, 7],
        "lecture5" => vec![10, 11],
        "lecture6" => vec![4, 9],
        "lecture7" => vec![6, 15],
        "lecture8" => vec![12, 13, 14],
        "all" => (1..=16).collect(),
        other => return Err(Error::Input(format!("unknown suite {other:?}"))),
    })
}

pub fn run_one(c: &Criterion, cfg: &SuiteConfig) -> Outcome {
    let start = Instant::now();
    let result = (c.run)(cfg);
    let elapsed = start.elapsed();
    let (mut pass, mut detail) = match result {
        Ok(ch) => (ch.pass, ch.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    if elapsed > c.budget {
        pass = false;
        detail = format!("over budget; {detail}");
    }
    Outcome { id: c.id, name: c.name, pass, detail, elapsed, budget: c.budget }
}

pub fn run(ids: &[usize], cfg: &SuiteConfig) -> Vec<Outcome> {
    criteria().iter().filter(|c| ids.contains(&c.id)).map(|c| run_one(c, cfg)).collect()
}

/// Report rows carry verdicts and details only; timing goes to stderr so
/// reports stay byte-identical across runs.
pub fn report(name: &str, cfg: &SuiteConfig, outcomes: &[Outcome]) -> Report {
    let mut r = Report::new("suite");
    r.config("suite", name).config("quick", cfg.quick).config("seed", cfg.seed);
    for o in outcomes {
        r.push(&format!("criterion_{}", o.id), if o.pass { "PASS" } else { "FAIL" }, true, &format!("{}: {}", o.name, o.detail));
    }
    r
}

// 1
fn f2_exact(_: &SuiteConfig) -> Result<Check> {
    let spec = FieldSpec::new(2)?;
    let family: Vec<SignHash> = KWisePoly::family(spec, 4).map(SignHash::new).collect();
    if family.len() != 256 {
        return fail(format!("family has {} members", family.len()));
    }
    let mut streams = 0;
    for code in 0..7u32.pow(4) {
        let counts: Vec<u32> = (0..4).map(|i| code / 7u32.pow(i) % 7).collect();
        let len: u32 = counts.iter().sum();
        if len == 0 || len > 6 {
            continue;
        }
        streams += 1;
        let items: Vec<u64> = counts.iter().enumerate().flat_map(|(j, &c)| std::iter::repeat_n(j as u64 + 1, c as usize)).collect();
        let f2 = int(counts.iter().map(|&c| (c * c) as i64).sum());
        let (mut sum, mut sum_sq) = (Rational::zero(), Rational::zero());
        for h in &family {
            let mut s = F2Sketch::with_hashes(4, vec![h.clone()], 1)?;
            s.feed(&items)?;
            let x = s.basic_estimates().remove(0);
            sum_sq += x.clone() * x.clone();
            sum += x;
        }
        let ex = sum / int(256);
        let ex2 = sum_sq / int(256);
        if ex != f2 {
            return fail(format!("counts {counts:?}: E[X] = {ex}, F2 = {f2}"));
        }
        if ex2 > int(3) * f2.clone() * f2.clone() {
            return fail(format!("counts {counts:?}: E[X^2] = {ex2} exceeds 3 F2^2"));
        }
    }
    check(true, format!("{streams} frequency vectors x 256 hashes"))
}

// 2
fn f2_chebyshev(cfg: &SuiteConfig) -> Result<Check> {
    let copies = f2_copies(&ratio(1, 2), &ratio(1, 5));
    if copies != 40 {
        return fail(format!("copy count {copies}"));
    }
    let seed = cfg.seed_for(2);
    let mut rng = SplitMix64::new(seed);
    let items: Vec<u64> = (0..64).map(|_| 1 + rng.below(16)).collect();
    let mut counts = [0i64; 17];
    items.iter().for_each(|&j| counts[j as usize] += 1);
    let f2 = int(counts.iter().map(|c| c * c).sum());
    let trials = cfg.trials(1000, 200);
    let misses: Vec<bool> = par_trials(seed, trials, |s| -> Result<bool> {
        let mut sketch = F2Sketch::new(16, copies, 1, &mut SplitMix64::new(s))?;
        sketch.feed(&items)?;
        let err = sketch.estimate() - f2.clone();
        Ok(err.abs() > f2.clone() / int(2))
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let rate = misses.iter().filter(|&&m| m).count() as f64 / trials as f64;
    check(rate <= 0.25, format!("miss rate {rate:.3} over {trials} trials, F2 = {f2}"))
}

// 3
fn equality_exact(_: &SuiteConfig) -> Result<Check> {
    let mut cases = 0;
    for n in 1..=3usize {
        for reps in 1..=3usize {
            let len = equality_tape_len(n, reps);
            if len > 12 {
                continue;
            }
            let total = 1u64 << len;
            for x in 0..1u64 << n {
                for y in 0..1u64 << n {
                    let (bx, by) = (BitVector::from_u64(x, n), BitVector::from_u64(y, n));
                    let mut accepted = 0u64;
                    for t in 0..total {
                        if run_equality(&bx, &by, &mut Tape::fixed(BitVector::from_u64(t, len)), reps)?.output {
                            accepted += 1;
                        }
                    }
                    let ok = if x == y { accepted == total } else { accepted * 4u64.pow(reps as u32) == total };
                    if !ok {
                        return fail(format!("n={n} reps={reps} x={x} y={y}: {accepted} of {total} tapes accept"));
                    }
                    cases += 1;
                }
            }
        }
    }
    check(true, format!("{cases} (pair, repetition) cases"))
}

// 4
fn gap_exact(_: &SuiteConfig) -> Result<Check> {
    let mut cases = 0;
    for scale in 1..=4i64 {
        let relevant = ratio(1, scale);
        for d in 1..=6usize {
            for diff in 0..=d.min(4) {
                // Two-stage draw: relevance mask, then a uniform bit per relevant coordinate.
                let mut mass = Rational::zero();
                for rel in 0..1u32 << d {
                    let k = rel.count_ones() as usize;
                    let w = num_traits::pow(relevant.clone(), k) * num_traits::pow(Rational::one() - relevant.clone(), d - k);
                    let each = w / int(1 << k);
                    let mut sub = rel;
                    loop {
                        if (sub & ((1 << diff) - 1)).count_ones() % 2 == 1 {
                            mass += each.clone();
                        }
                        if sub == 0 {
                            break;
                        }
                        sub = (sub - 1) & rel;
                    }
                }
                let closed = (Rational::one() - num_traits::pow(Rational::one() - ratio(1, scale), diff)) / int(2);
                let lib = gap_probability(scale as u64, diff as u64);
                if mass != closed || lib != closed {
                    return fail(format!("L={scale} d={d} diff={diff}: enumeration {mass}, closed {closed}, library {lib}"));
                }
                cases += 1;
            }
        }
    }
    check(true, format!("{cases} (L, d, distance) cases exact"))
}

// 5
fn analyzer_oracles(_: &SuiteConfig) -> Result<Check> {
    let eq2 = det_cc(&FunctionMatrix::equality(2))?;
    let disj1 = det_cc(&FunctionMatrix::disjointness(1))?;
    if eq2 != 3 || disj1 != 2 {
        return fail(format!("det_cc EQ2 = {eq2}, DISJ1 = {disj1}"));
    }
    for n in 1..=3usize {
        let eq = FunctionMatrix::equality(n);
        let size = min_cover(&eq, true)?.size;
        if size != 1 << n {
            return fail(format!("min 1-cover of EQ_{n} = {size}"));
        }
        let diag: Vec<(usize, usize)> = (0..1 << n).map(|x| (x, x)).collect();
        let anti: Vec<(usize, usize)> = (0..1 << n).map(|x| (x, x ^ ((1 << n) - 1))).collect();
        if !verify_fooling_set(&eq, &diag)? || !verify_fooling_set(&FunctionMatrix::disjointness(n), &anti)? {
            return fail(format!("fooling set rejected at n={n}"));
        }
    }
    check(true, "det_cc 3 and 2; covers 2, 4, 8; fooling sets valid")
}

/// Tuples of `k` subsets of `[n]` with every element in at most one set.
fn count_pairwise_disjoint(k: usize, n: usize) -> usize {
    let sets = 1usize << n;
    (0..sets.pow(k as u32))
        .filter(|&code| {
            let mut seen = 0usize;
            let mut c = code;
            for _ in 0..k {
                let s = c % sets;
                c /= sets;
                if seen & s != 0 {
                    return false;
                }
                seen |= s;
            }
            true
        })
        .count()
}

// 6
fn mdisj_counting(_: &SuiteConfig) -> Result<Check> {
    let mut notes = Vec::new();
    for k in 2..=3usize {
        for n in 1..=3usize {
            let m = FunctionMatrix::multi_disjointness(k, n)?;
            let ones = m.count(Cell::One);
            let oracle = count_pairwise_disjoint(k, n);
            if ones != oracle || oracle != (k + 1).pow(n as u32) {
                return fail(format!("k={k} n={n}: matrix {ones}, oracle {oracle}"));
            }
            let (best, _) = max_box_ones(&m)?;
            if best > k.pow(n as u32) {
                return fail(format!("k={k} n={n}: box with {best} ones"));
            }
            notes.push(format!("k{k}n{n}:{best}"));
        }
    }
    for n in 1..=3usize {
        let (best, _) = max_box_ones(&FunctionMatrix::unique_disjointness(n))?;
        if best != 1 << n {
            return fail(format!("UDISJ n={n}: max 1-rectangle {best}"));
        }
    }
    check(true, format!("max boxes {}", notes.join(" ")))
}

fn is_clique(n: usize, adj: &[BitVector], set: u64) -> bool {
    (0..n).all(|u| (u + 1..n).all(|v| (set >> u) & 1 == 0 || (set >> v) & 1 == 0 || adj[u].get(v)))
}

fn is_independent(n: usize, adj: &[BitVector], set: u64) -> bool {
    (0..n).all(|u| (u + 1..n).all(|v| (set >> u) & 1 == 0 || (set >> v) & 1 == 0 || !adj[u].get(v)))
}

// 7
fn cis_exhaustive(_: &SuiteConfig) -> Result<Check> {
    let mut total = 0usize;
    let mut worst = 0usize;
    for n in 1..=6usize {
        let w = name_width(n);
        let bound = 4 * (w + 1) * (w + 1);
        let edges = n * (n - 1) / 2;
        let per: Vec<Result<(usize, usize)>> = (0..1u64 << edges)
            .into_par_iter()
            .map(|mask| {
                let adj = CisInstance::graph_from_mask(n, mask);
                let cliques: Vec<u64> = (0..1u64 << n).filter(|&s| is_clique(n, &adj, s)).collect();
                let indeps: Vec<u64> = (0..1u64 << n).filter(|&s| is_independent(n, &adj, s)).collect();
                let (mut count, mut most) = (0, 0);
                for &c in &cliques {
                    for &i in &indeps {
                        let inst = CisInstance::new(adj.clone(), BitVector::from_u64(c, n), BitVector::from_u64(i, n))?;
                        let out = run_cis(&inst);
                        if out.output != (c & i == 0) || out.total_bits() > bound {
                            return Err(Error::Verification(format!(
                                "n={n} graph={mask} clique={c} indep={i}: output {} with {} bits",
                                out.output,
                                out.total_bits()
                            )));
                        }
                        count += 1;
                        most = most.max(out.total_bits());
                    }
                }
                Ok((count, most))
            })
            .collect();
        for r in per {
            match r {
                Ok((c, m)) => {
                    total += c;
                    worst = worst.max(m);
                }
                Err(e) => return fail(e.to_string()),
            }
        }
    }
    check(true, format!("{total} instances, most bits {worst}"))
}

// 8
fn cs_round_trip(cfg: &SuiteConfig) -> Result<Check> {
    let seed = cfg.seed_for(8);
    let cb = build_codebook(8, 2, 8, seed, 10_000)?;
    let a = SensingMatrix::random(24, 8, &mut SplitMix64::new(derive_seed(seed, 1)));
    let alpha = default_alpha(1);
    let k = BigInt::from(2);
    let mut runs = 0;
    for x1 in cb.vectors() {
        for x2 in cb.vectors() {
            let blocks = vec![x1.clone(), x2.clone()];
            let y = cs_encode(&blocks, &alpha)?;
            let oracle = GenieTopK::new(&a, y.clone(), &cb, alpha.clone(), 2);
            let trace = match cs_decode(&a.apply(&y), &a, &oracle, &cb, &alpha, 2) {
                Ok(t) => t,
                Err(e) => return fail(format!("decode failed: {e}")),
            };
            if trace.blocks != blocks {
                return fail(format!("recovered {:?} instead of {:?}", trace.blocks, blocks));
            }
            for step in &trace.steps {
                let budget = &k * num_traits::pow(alpha.clone(), step.block);
                let near_ok = BigInt::from(50) * &step.near <= budget;
                let far_ok = step.far.as_ref().is_none_or(|f| BigInt::from(25) * f >= BigInt::from(2) * &budget);
                if !near_ok || !far_ok {
                    return fail(format!("margin violated at block {}", step.block));
                }
            }
            runs += 1;
        }
    }
    let set = all_sparse(4, 2);
    let rows = toy_rows(set.len());
    let toy_seed = (0..1000u64).find(|&s| toy_sensing(&set, s).is_ok_and(|t| t.is_injective()));
    let Some(toy_seed) = toy_seed else {
        return fail("no injective toy matrix among 1000 seeds");
    };
    let toy = toy_sensing(&set, toy_seed)?;
    for x in &set {
        if toy.recover(&toy.measure(x))? != *x {
            return fail(format!("toy recovery failed for {x}"));
        }
    }
    check(rows == 8, format!("{runs} two-block decodes; toy sensing with {rows} rows, seed {toy_seed}"))
}

fn random_point(rng: &mut SplitMix64, d: usize) -> BitVector {
    BitVector::from_bools(&(0..d).map(|_| rng.next_bool()).collect::<Vec<_>>())
}

fn flip_distinct(v: &BitVector, count: usize, rng: &mut SplitMix64) -> BitVector {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    rng.shuffle(&mut idx);
    let mut out = v.clone();
    idx[..count].iter().for_each(|&i| out.flip(i));
    out
}

// 9
fn ann_trials(cfg: &SuiteConfig) -> Result<Check> {
    let (d, n, eps, delta) = (64usize, 32usize, 1.0, 0.1);
    let params = AnnParams::new(eps, delta);
    let trials = cfg.trials(200, 40);
    let seed = cfg.seed_for(9);
    let scale = 8u64;
    let far = ((1.0 + eps) * scale as f64) as usize;
    let decision: Vec<Result<bool>> = par_trials(seed, trials, |s| {
        let mut rng = SplitMix64::new(s);
        let q = random_point(&mut rng, d);
        let mut points: Vec<BitVector> = Vec::with_capacity(n);
        while points.len() < n - 1 {
            let p = random_point(&mut rng, d);
            if p.hamming(&q) > far {
                points.push(p);
            }
        }
        let planted = rng.below_usize(n);
        points.insert(planted, flip_distinct(&q, scale as usize, &mut rng));
        let table = DecisionTable::build(&points, scale, &params, derive_seed(s, 1))?;
        let near_ok = table.query(&q).is_some_and(|p| points[p].hamming(&q) <= far);
        let one_lookup = table.lookups() == 1;
        let q_far = loop {
            let c = random_point(&mut rng, d);
            if points.iter().all(|p| p.hamming(&c) > far) {
                break c;
            }
        };
        let far_ok = table.query(&q_far).is_none();
        if !one_lookup || table.lookups() != 2 {
            return Err(Error::Verification("a decision query used more than one lookup".into()));
        }
        Ok(near_ok && far_ok)
    });
    let max_probes = ceil_log2(d) + 1;
    let full: Vec<Result<(bool, usize)>> = par_trials(derive_seed(seed, 2), trials, |s| {
        let mut rng = SplitMix64::new(s);
        let points: Vec<BitVector> = (0..n).map(|_| random_point(&mut rng, d)).collect();
        let q = flip_distinct(&points[rng.below_usize(n)], 5, &mut rng);
        let best = points.iter().map(|p| p.hamming(&q)).min().unwrap();
        let index = AnnIndex::new(points, params.clone(), derive_seed(s, 1))?;
        let ans = index.query(&q, derive_seed(s, 2))?;
        let got = index.points()[ans.point].hamming(&q);
        Ok((got as f64 <= (1.0 + eps) * best as f64, ans.probes))
    });
    let mut dec_ok = 0;
    for r in decision {
        match r {
            Ok(ok) => dec_ok += ok as usize,
            Err(e) => return fail(e.to_string()),
        }
    }
    let (mut full_ok, mut probes) = (0, 0);
    for r in full {
        let (ok, p) = r?;
        full_ok += ok as usize;
        probes = probes.max(p);
    }
    let need = (9 * trials).div_ceil(10);
    check(
        dec_ok >= need && full_ok >= need && probes <= max_probes,
        format!("decision {dec_ok}/{trials}, full {full_ok}/{trials}, most probes {probes} (cap {max_probes})"),
    )
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    permutations(n - 1)
        .into_iter()
        .flat_map(|p| {
            (0..=p.len()).map(move |pos| {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                q
            })
        })
        .collect()
}

// 10
fn permutahedron(cfg: &SuiteConfig) -> Result<Check> {
    for n in 2..=5 {
        let sys: LinearSystem<Rational> = permutahedron_ef(n)?;
        if sys.constraint_count() != n * n + 3 * n {
            return fail(format!("n={n}: {} constraints", sys.constraint_count()));
        }
    }
    let mut rng = SplitMix64::new(cfg.seed_for(10));
    let objectives = cfg.trials(20, 5);
    for n in 3..=4 {
        let sys: LinearSystem<Rational> = permutahedron_ef(n)?;
        let perms = permutations(n);
        for _ in 0..objectives {
            let c: Vec<i64> = (0..n).map(|_| rng.below(41) as i64 - 20).collect();
            let brute = perms.iter().map(|p| p.iter().zip(&c).map(|(&v, &w)| (v as i64 + 1) * w).sum::<i64>()).max().unwrap();
            let obj: Vec<Rational> = c.iter().map(|&v| int(v)).collect();
            let got = lp_optimize(&sys, &obj)?.value;
            if got != int(brute) {
                return fail(format!("n={n} objective {c:?}: LP {got}, brute force {brute}"));
            }
        }
    }
    check(true, format!("{} objectives each at n = 3, 4", objectives))
}

// 11
fn correlation(_: &SuiteConfig) -> Result<Check> {
    let mut sizes = Vec::new();
    for n in 1..=3usize {
        let slack = cor_slack::<Rational>(n)?;
        let mu = FunctionMatrix::unique_disjointness(n);
        let support = slack.support();
        for s in 0..1usize << n {
            for r in 0..1usize << n {
                let k = (s & r).count_ones() as i64;
                if slack.entries[s][r] != int((k - 1) * (k - 1)) {
                    return fail(format!("n={n} S={s} R={r}: slack {}", slack.entries[s][r]));
                }
                if (support.get2(s, r) == Cell::One) != (mu.get2(s, r) != Cell::Zero) {
                    return fail(format!("n={n} S={s} R={r}: support disagrees with the unique-disjointness pattern"));
                }
            }
        }
        let cover = min_cover(&mu, true)?;
        let floor = 1.5f64.powi(n as i32).ceil() as usize;
        if cover.size < floor {
            return fail(format!("n={n}: cover of size {} below {floor}", cover.size));
        }
        let protocol = fv_protocol_from_cover(&mu, cover.rects.clone())?;
        for x in 0..1usize << n {
            for y in 0..1usize << n {
                let out = protocol.run(x, y);
                let wrong = match mu.get2(x, y) {
                    Cell::One => !out.output,
                    Cell::Zero => out.output,
                    Cell::Star => false,
                };
                if wrong || out.prover_bits() != protocol.cost() {
                    return fail(format!("n={n}: protocol wrong at ({x}, {y})"));
                }
            }
        }
        sizes.push(cover.size.to_string());
    }
    check(true, format!("min covers {}", sizes.join(", ")))
}

fn parity_distance(f: &BoolFn) -> usize {
    let n = f.arity();
    (0..1usize << n)
        .map(|a| (0..1usize << n).filter(|&x| f.value(x) != ((x & a).count_ones() % 2 == 1)).count())
        .min()
        .unwrap()
}

// 12
fn blr(cfg: &SuiteConfig) -> Result<Check> {
    let seeds = cfg.trials(100, 20) as u64;
    for n in 1..=4 {
        for a in 0..1usize << n {
            let f = BoolFn::linear(n, a);
            for s in 0..seeds {
                if !blr_test(&f, 0.25, &mut Tape::seeded(derive_seed(cfg.seed_for(12), s)))?.accepted {
                    return fail(format!("linear function {a} at n={n} rejected"));
                }
            }
        }
    }
    for mask in 0..16u64 {
        let f = BoolFn::from_mask(2, mask)?;
        let mut bad = 0i64;
        for x in 0..4usize {
            for y in 0..4usize {
                bad += (f.value(x) ^ f.value(y) != f.value(x ^ y)) as i64;
            }
        }
        let mut rejected = 0i64;
        for t in 0..16u64 {
            rejected += !blr_test_trials(&f, 1, &mut Tape::fixed(BitVector::from_u64(t, 4)))?.accepted as i64;
        }
        if rejected != bad || blr_rejection_probability(&f) != ratio(bad, 16) {
            return fail(format!("n=2 function {mask}: tapes {rejected}, pairs {bad}"));
        }
    }
    let runs = cfg.trials(500, 100);
    let mut worst = 1.0f64;
    for (num, den) in [(1i64, 8i64), (1, 4)] {
        let eps = num as f64 / den as f64;
        for mask in 0..256u64 {
            let f = BoolFn::from_mask(3, mask)?;
            let dist = parity_distance(&f);
            if dist != distance_to_linear(&f)? {
                return fail(format!("function {mask}: distance oracles disagree"));
            }
            if (dist as i64) * den < num * 8 {
                continue;
            }
            let rejections = par_trials(derive_seed(cfg.seed_for(12), mask), runs, |s| blr_test(&f, eps, &mut Tape::seeded(s)))
                .into_iter()
                .collect::<Result<Vec<_>>>()?
                .iter()
                .filter(|v| !v.accepted)
                .count();
            let rate = rejections as f64 / runs as f64;
            worst = worst.min(rate);
            if 3 * rejections < runs {
                return fail(format!("function {mask} at eps {eps}: rejection rate {rate:.3}"));
            }
        }
    }
    check(true, format!("lowest far-function rejection rate {worst:.3}"))
}

fn monotone_by_pairs(f: &impl CubeFn) -> bool {
    (0..f.size()).all(|x| (0..f.size()).all(|y| x & y != x || f.at(x) <= f.at(y)))
}

// 13
fn monotonicity(cfg: &SuiteConfig) -> Result<Check> {
    for mask in 0..256u64 {
        let f = BoolFn::from_mask(3, mask)?;
        let v = violation_slices(&f);
        let m = monotonize_bool(&f);
        let dist = distance_to_monotone(&f)?;
        if !monotone_by_pairs(&m.g) || m.changes > 2 * v.total() || dist > m.changes {
            return fail(format!("function {mask}: changes {}, distance {dist}, sum {}", m.changes, v.total()));
        }
        // All n 2^(n-1) (slice, rest) draws of one trial.
        let mut violated = 0i64;
        for i in 0..3 {
            for x in (0..8usize).filter(|x| x & (1 << i) == 0) {
                violated += (f.value(x) && !f.value(x | 1 << i)) as i64;
            }
        }
        if v.probability != ratio(violated, 12) || v.probability != ratio(v.total() as i64, 12) {
            return fail(format!("function {mask}: probability {} vs {violated}/12", v.probability));
        }
    }
    let f = BoolFn::from_fn(2, |x| x != 3)?;
    let p = commlab::scalar::rational_to_f64(&violation_slices(&f).probability);
    let trials = cfg.trials(100_000, 20_000);
    let mut tape = Tape::seeded(cfg.seed_for(13));
    let mut rejected = 0usize;
    for _ in 0..trials {
        rejected += !commlab::testers::edge_test(&f, 1, &mut tape)?.accepted as usize;
    }
    let freq = rejected as f64 / trials as f64;
    let se = (p * (1.0 - p) / trials as f64).sqrt();
    if (freq - p).abs() > 3.0 * se {
        return fail(format!("empirical single-trial rate {freq:.4} vs {p:.4}"));
    }
    let mut ranged = 0;
    for n in 1..=3usize {
        for r in 2..=4u32 {
            let size = 1usize << n;
            for code in 0..(r as u64).pow(size as u32) {
                let table: Vec<u32> = (0..size).map(|x| (code / (r as u64).pow(x as u32) % r as u64) as u32).collect();
                let f = RangedFn::new(n, r, table)?;
                let m = monotonize_ranged(&f);
                let bound = 2 * range_bits(r) as usize * violation_slices(&f).total();
                if !monotone_by_pairs(&m.g) || m.changes > bound {
                    return fail(format!("ranged {f}: changes {} over bound {bound}", m.changes));
                }
                ranged += 1;
            }
        }
    }
    check(true, format!("256 Boolean and {ranged} ranged functions; empirical rate {freq:.4} vs {p:.4}"))
}

// 14
fn gadget(cfg: &SuiteConfig) -> Result<Check> {
    for n in 1..=4usize {
        for a in 0..1usize << n {
            for b in 0..1usize << n {
                let g = GadgetAB::new(n, a, b)?;
                let h = gadget_h(&g, None);
                let ok = match (a & b).count_ones() {
                    0 => monotone_by_pairs(&h),
                    1 => 8 * distance_by_matching(&h)? >= 1 << n,
                    _ => true,
                };
                if !ok {
                    return fail(format!("n={n} A={a} B={b}"));
                }
            }
        }
    }
    let n = 8usize;
    let runs = cfg.trials(500, 100);
    let tester = EdgeTester::for_gadget(n);
    let results: Vec<Result<(bool, bool)>> = par_trials(cfg.seed_for(14), runs, |s| {
        let mut rng = SplitMix64::new(s);
        let intersecting = rng.next_bool();
        let mut a = 0usize;
        let mut b = 0usize;
        for e in 0..n {
            match rng.below(3) {
                0 => a |= 1 << e,
                1 => b |= 1 << e,
                _ => {}
            }
        }
        if intersecting {
            let e = rng.below_usize(n);
            a |= 1 << e;
            b |= 1 << e;
        }
        let run = tester_to_protocol(&tester, &GadgetAB::new(n, a, b)?, &mut Tape::seeded(derive_seed(s, 1)))?;
        Ok((run.outcome.output == !intersecting, run.outcome.total_bits() == 2 * run.queries))
    });
    let (mut right, mut comm_ok) = (0, true);
    for r in results {
        let (ok, comm) = r?;
        right += ok as usize;
        comm_ok &= comm;
    }
    check(3 * (runs - right) <= runs && comm_ok, format!("{right}/{runs} runs correct at n = 8; communication twice the queries: {comm_ok}"))
}

/// Classes `i != i'` of distinct partitions always share an item.
fn intersecting_oracle(family: &[Partition], k: usize) -> bool {
    family.iter().enumerate().all(|(j, p)| {
        family.iter().skip(j + 1).all(|q| {
            (0..k).all(|i| (0..k).all(|i2| i == i2 || p.iter().zip(q).any(|(&a, &b)| a == i && b == i2)))
        })
    })
}

// 15
fn welfare(cfg: &SuiteConfig) -> Result<Check> {
    let seed = cfg.seed_for(15);
    let (k, m, t) = (2usize, 10usize, 3usize);
    let family = intersecting_family(m, k, t, seed, 100_000)?;
    if !intersecting_oracle(&family, k) {
        return fail("family is not intersecting");
    }
    let mut pairs = 0;
    for s1 in 1..1usize << t {
        for s2 in 1..1usize << t {
            let sets: Vec<Vec<usize>> = [s1, s2].iter().map(|s| (0..t).filter(|j| (s >> j) & 1 == 1).collect()).collect();
            let common = s1 & s2 != 0;
            for subadditive in [false, true] {
                let inst = mdisj_to_welfare(sets.clone(), family.clone(), subadditive)?;
                let got = inst.optimal_welfare()?.0 as usize;
                let want = match (common, subadditive) {
                    (false, false) => 1,
                    (true, false) => k,
                    (false, true) => k + 1,
                    (true, true) => 2 * k,
                };
                if got != want {
                    return fail(format!("sets {sets:?} subadditive {subadditive}: welfare {got}, expected {want}"));
                }
            }
            pairs += 1;
        }
    }
    let small = intersecting_family(6, k, 2, derive_seed(seed, 1), 100_000)?;
    for s1 in 1..4usize {
        for s2 in 1..4usize {
            let sets: Vec<Vec<usize>> = [s1, s2].iter().map(|s| (0..2).filter(|j| (s >> j) & 1 == 1).collect()).collect();
            let inst = mdisj_to_welfare(sets, small.clone(), true)?;
            for i in 0..k {
                for x in 0..64u64 {
                    for y in 0..64u64 {
                        if inst.value(i, x | y) > inst.value(i, x) + inst.value(i, y) || (x & y == x && inst.value(i, x) > inst.value(i, y)) {
                            return fail(format!("player {i}: bundles {x}, {y} break subadditivity or monotonicity"));
                        }
                    }
                }
            }
        }
    }
    check(true, format!("{pairs} input pairs at m = {m}; shifted valuations checked at m = 6"))
}

// 16
fn adapter(cfg: &SuiteConfig) -> Result<Check> {
    let splits = cfg.trials(100, 30);
    for s in 0..splits as u64 {
        let seed = derive_seed(cfg.seed_for(16), s);
        let mut rng = SplitMix64::new(seed);
        let items: Vec<u64> = (0..64).map(|_| 1 + rng.below(16)).collect();
        let cut = rng.below_usize(items.len() + 1);
        let fresh = || F2Sketch::new(16, 8, 2, &mut SplitMix64::new(derive_seed(seed, 1)));
        let mut whole = fresh()?;
        whole.feed(&items)?;
        let mut head = fresh()?;
        head.feed(&items[..cut])?;
        let mut resumed = F2Sketch::deserialize(&head.serialize())?;
        resumed.feed(&items[cut..])?;
        if resumed.serialize() != whole.serialize() || resumed.estimate() != whole.estimate() {
            return fail(format!("F2 split {s} at {cut} diverged"));
        }
        let mut whole = ExactCounts::new(16);
        whole.feed(&items)?;
        let mut head = ExactCounts::new(16);
        head.feed(&items[..cut])?;
        let mut resumed = ExactCounts::deserialize(&head.serialize())?;
        resumed.feed(&items[cut..])?;
        if resumed.serialize() != whole.serialize() || resumed.estimate() != whole.estimate() {
            return fail(format!("F-infinity split {s} at {cut} diverged"));
        }
    }
    let mut inputs = 0;
    for n in 1..=4usize {
        for x in 0..1u64 << n {
            for y in 0..1u64 << n {
                let (bx, by) = (BitVector::from_u64(x, n), BitVector::from_u64(y, n));
                let truth = x & y == 0;
                let (out, _) = streaming_to_oneway(|| Ok(ExactCounts::new(n as u64)), &bx, &by, finfty_says_disjoint)?;
                let approx = disj_via_finfty(&bx, &by, FinftyMode::Approx { seed: derive_seed(cfg.seed_for(16), x << 8 | y) })?;
                if out.output != truth || disj_via_finfty(&bx, &by, FinftyMode::Exact)? != truth || approx != truth {
                    return fail(format!("n={n} x={x} y={y}"));
                }
                inputs += 1;
            }
        }
    }
    check(true, format!("{splits} splits bit-identical; {inputs} disjointness inputs correct"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names() {
        assert_eq!(suite_ids("lecture4").unwrap(), vec![5, 7]);
        assert_eq!(suite_ids("all").unwrap().len(), 16);
        assert!(suite_ids("lecture9").is_err());
        let ids: Vec<usize> = criteria().iter().map(|c| c.id).collect();
        assert_eq!(ids, (1..=16).collect::<Vec<_>>());
    }
}
