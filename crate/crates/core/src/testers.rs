//! Property testers on the hypercube `{0,1}^n`: BLR linearity, the edge
//! tester for monotonicity, exact distance oracles, monotonization, and the
//! `h_AB` gadget with its tester-to-protocol simulation.
//!
//! Points are bitmasks; bit `i` of `x` is coordinate `i + 1`.

use std::fmt;
use std::str::FromStr;

use crate::error::{input, Error, Result};
use crate::protocols::{ProtocolOutcome, Speaker, Tape, Transcript};
use crate::scalar::ratio;
use crate::Rational;

/// Default BLR trial constant: `t = ceil(12 / eps)`.
pub const BLR_CONSTANT: f64 = 12.0;
/// Default truncation constant for the smaller-range gadget.
pub const TRUNCATION_C: f64 = 3.0;

const MAX_SCAN_ARITY: usize = 16;

/// A function on the hypercube with values in `0..range`.
pub trait CubeFn {
    fn arity(&self) -> usize;
    fn range(&self) -> u32;
    fn at(&self, x: usize) -> u32;

    fn size(&self) -> usize {
        1 << self.arity()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BoolFn {
    n: usize,
    table: Vec<bool>,
}

impl BoolFn {
    pub fn new(n: usize, table: Vec<bool>) -> Result<Self> {
        if n > MAX_SCAN_ARITY || table.len() != 1 << n {
            return input(format!("table of length {} does not match arity {n}", table.len()));
        }
        Ok(BoolFn { n, table })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize) -> bool) -> Result<Self> {
        Self::new(n, (0..1usize << n).map(f).collect())
    }

    /// Table given as the bits of `mask` (bit `x` is `f(x)`), `n <= 6`.
    pub fn from_mask(n: usize, mask: u64) -> Result<Self> {
        if n > 6 {
            return input("mask form limited to n <= 6");
        }
        Self::from_fn(n, |x| (mask >> x) & 1 == 1)
    }

    /// `x -> <a, x> mod 2`.
    pub fn linear(n: usize, a: usize) -> Self {
        Self::from_fn(n, |x| (x & a).count_ones() % 2 == 1).expect("valid arity")
    }

    pub fn value(&self, x: usize) -> bool {
        self.table[x]
    }

    pub fn table(&self) -> &[bool] {
        &self.table
    }

    pub fn hamming(&self, other: &BoolFn) -> usize {
        self.table.iter().zip(&other.table).filter(|(a, b)| a != b).count()
    }

    pub fn to_ranged(&self) -> RangedFn {
        RangedFn { n: self.n, r: 2, table: self.table.iter().map(|&b| b as u32).collect() }
    }
}

impl CubeFn for BoolFn {
    fn arity(&self) -> usize {
        self.n
    }

    fn range(&self) -> u32 {
        2
    }

    fn at(&self, x: usize) -> u32 {
        self.table[x] as u32
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RangedFn {
    n: usize,
    r: u32,
    table: Vec<u32>,
}

impl RangedFn {
    pub fn new(n: usize, r: u32, table: Vec<u32>) -> Result<Self> {
        if n > MAX_SCAN_ARITY || table.len() != 1 << n {
            return input(format!("table of length {} does not match arity {n}", table.len()));
        }
        if r == 0 || table.iter().any(|&v| v >= r) {
            return input(format!("table entry outside 0..{r}"));
        }
        Ok(RangedFn { n, r, table })
    }

    pub fn table(&self) -> &[u32] {
        &self.table
    }

    pub fn hamming(&self, other: &RangedFn) -> usize {
        self.table.iter().zip(&other.table).filter(|(a, b)| a != b).count()
    }

    /// Boolean view when every entry is 0 or 1.
    pub fn to_bool(&self) -> Option<BoolFn> {
        self.table
            .iter()
            .all(|&v| v <= 1)
            .then(|| BoolFn { n: self.n, table: self.table.iter().map(|&v| v == 1).collect() })
    }
}

impl CubeFn for RangedFn {
    fn arity(&self) -> usize {
        self.n
    }

    fn range(&self) -> u32 {
        self.r
    }

    fn at(&self, x: usize) -> u32 {
        self.table[x]
    }
}

impl fmt::Display for RangedFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.n, self.r)?;
        let vals: Vec<String> = self.table.iter().map(u32::to_string).collect();
        writeln!(f, "{}", vals.join(" "))
    }
}

impl FromStr for RangedFn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut toks = s.split_whitespace().map(|t| t.parse::<u64>().map_err(|_| Error::Input(format!("bad integer {t:?}"))));
        let n = toks.next().ok_or_else(|| Error::Input("missing arity".into()))?? as usize;
        let r = toks.next().ok_or_else(|| Error::Input("missing range".into()))??;
        let table = toks.map(|v| v.map(|v| v as u32)).collect::<Result<Vec<_>>>()?;
        RangedFn::new(n, u32::try_from(r).map_err(|_| Error::Input("range too large".into()))?, table)
    }
}

impl fmt::Display for BoolFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.to_ranged().fmt(f)
    }
}

impl FromStr for BoolFn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let r: RangedFn = s.parse()?;
        if r.range() != 2 {
            return input("Boolean functions use range 2");
        }
        Ok(r.to_bool().expect("range 2 entries are bits"))
    }
}

pub fn blr_trials(eps: f64, constant: f64) -> usize {
    (constant / eps).ceil().max(1.0) as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TestVerdict {
    pub accepted: bool,
    pub trials: usize,
}

/// BLR with `ceil(12 / eps)` trials.
pub fn blr_test(f: &BoolFn, eps: f64, tape: &mut Tape) -> Result<TestVerdict> {
    blr_test_trials(f, blr_trials(eps, BLR_CONSTANT), tape)
}

/// Draws `x, y` uniformly and rejects on `f(x) + f(y) != f(x + y)` over F2.
pub fn blr_test_trials(f: &BoolFn, trials: usize, tape: &mut Tape) -> Result<TestVerdict> {
    for _ in 0..trials {
        let x = tape.below(f.size())?;
        let y = tape.below(f.size())?;
        if f.value(x) ^ f.value(y) != f.value(x ^ y) {
            return Ok(TestVerdict { accepted: false, trials });
        }
    }
    Ok(TestVerdict { accepted: true, trials })
}

/// Exact single-trial rejection probability over all `4^n` pairs.
pub fn blr_rejection_probability(f: &BoolFn) -> Rational {
    let size = f.size();
    let bad = (0..size)
        .flat_map(|x| (0..size).map(move |y| (x, y)))
        .filter(|&(x, y)| f.value(x) ^ f.value(y) != f.value(x ^ y))
        .count();
    ratio(bad as i64, (size * size) as i64)
}

/// Distance to the nearest homogeneous linear function.
pub fn distance_to_linear(f: &BoolFn) -> Result<usize> {
    if f.arity() > 5 {
        return Err(Error::Resource(format!("linear distance scan capped at n = 5, got {}", f.arity())));
    }
    Ok((0..f.size()).map(|a| f.hamming(&BoolFn::linear(f.arity(), a))).min().expect("at least one linear function"))
}

/// Per-slice violation counts `|A_i|` and the exact single-trial rejection
/// probability of the edge tester.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SliceViolations {
    pub counts: Vec<usize>,
    pub probability: Rational,
}

impl SliceViolations {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

pub fn violation_slices(f: &impl CubeFn) -> SliceViolations {
    let n = f.arity();
    let counts: Vec<usize> = (0..n)
        .map(|i| (0..f.size()).filter(|x| x & (1 << i) == 0 && f.at(*x) > f.at(x | (1 << i))).count())
        .collect();
    let total: usize = counts.iter().sum();
    let probability = if n == 0 { ratio(0, 1) } else { ratio(total as i64, (n << (n - 1)) as i64) };
    SliceViolations { counts, probability }
}

pub fn is_monotone(f: &impl CubeFn) -> bool {
    (0..f.arity()).all(|i| (0..f.size()).all(|x| x & (1 << i) != 0 || f.at(x) <= f.at(x | (1 << i))))
}

/// Uniform slice `i` and point with coordinate `i` cleared.
fn draw_edge(n: usize, tape: &mut Tape) -> Result<(usize, usize)> {
    let i = tape.below(n)?;
    let rest = tape.below(1 << (n - 1))?;
    let low = rest & ((1 << i) - 1);
    let x = low | ((rest >> i) << (i + 1));
    Ok((x, x | (1 << i)))
}

/// Edge tester: rejects when some sampled edge has `f(x) > f(x + e_i)`.
pub fn edge_test(f: &impl CubeFn, trials: usize, tape: &mut Tape) -> Result<TestVerdict> {
    if f.arity() == 0 {
        return Ok(TestVerdict { accepted: true, trials });
    }
    for _ in 0..trials {
        let (x, y) = draw_edge(f.arity(), tape)?;
        if f.at(x) > f.at(y) {
            return Ok(TestVerdict { accepted: false, trials });
        }
    }
    Ok(TestVerdict { accepted: true, trials })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monotonized<F> {
    pub g: F,
    /// Entries where `g` differs from the input.
    pub changes: usize,
    pub swaps: usize,
}

/// Swaps every violated edge of `table` whose endpoint values agree above
/// bit `level` and differ at it, one coordinate at a time.
fn sweep(n: usize, table: &mut [u32], level: u32) -> usize {
    let mut swaps = 0;
    for i in 0..n {
        for x in (0..table.len()).filter(|x| x & (1 << i) == 0) {
            let y = x | (1 << i);
            let (a, b) = (table[x], table[y]);
            if a > b && a >> (level + 1) == b >> (level + 1) && (a >> level) & 1 == 1 && (b >> level) & 1 == 0 {
                table.swap(x, y);
                swaps += 1;
            }
        }
    }
    swaps
}

/// Boolean monotonization: one pass over the coordinates swapping the
/// endpoints of violated edges.
pub fn monotonize_bool(f: &BoolFn) -> Monotonized<BoolFn> {
    let mut table: Vec<u32> = f.table.iter().map(|&b| b as u32).collect();
    let swaps = sweep(f.n, &mut table, 0);
    let g = BoolFn { n: f.n, table: table.iter().map(|&v| v == 1).collect() };
    assert!(is_monotone(&g), "single swap pass left a violation");
    Monotonized { changes: f.hamming(&g), g, swaps }
}

/// General range: one pass per bit of `ceil(log2 r)`, most significant
/// first, each fixing violations whose values first differ at that bit.
pub fn monotonize_ranged(f: &RangedFn) -> Monotonized<RangedFn> {
    let mut table = f.table.clone();
    let mut swaps = 0;
    for level in (0..range_bits(f.r)).rev() {
        swaps += sweep(f.n, &mut table, level);
    }
    let g = RangedFn { n: f.n, r: f.r, table };
    assert!(is_monotone(&g), "bit-level passes left a violation");
    Monotonized { changes: f.hamming(&g), g, swaps }
}

/// `ceil(log2 r)`, at least 1.
pub fn range_bits(r: u32) -> u32 {
    (u32::BITS - r.saturating_sub(1).leading_zeros()).max(1)
}

/// All monotone Boolean functions on `n <= 5` variables as truth-table
/// masks (bit `x` is `f(x)`).
pub fn monotone_tables(n: usize) -> Result<Vec<u64>> {
    if n > 5 {
        return Err(Error::Resource(format!("monotone enumeration capped at n = 5, got {n}")));
    }
    let mut fns = vec![0u64, 1u64];
    for k in 1..=n {
        let half = 1u32 << (k - 1);
        let mut next = Vec::new();
        for &lo in &fns {
            for &hi in &fns {
                if lo & !hi == 0 {
                    next.push(lo | (hi << half));
                }
            }
        }
        fns = next;
    }
    Ok(fns)
}

/// Exact distance to the monotone set. Boolean functions enumerate all
/// monotone functions (`n <= 5`); other ranges enumerate monotone
/// labelings by pruned search (`n <= 3`, `r <= 4`).
pub fn distance_to_monotone(f: &impl CubeFn) -> Result<usize> {
    if f.range() <= 2 {
        let mask = (0..f.size()).fold(0u64, |m, x| m | ((f.at(x) as u64) << x));
        return Ok(monotone_tables(f.arity())?.iter().map(|g| (g ^ mask).count_ones() as usize).min().expect("constants are monotone"));
    }
    if f.arity() > 3 || f.range() > 4 {
        return Err(Error::Resource(format!("labeling search capped at n = 3, r = 4; got n = {}, r = {}", f.arity(), f.range())));
    }
    let table: Vec<u32> = (0..f.size()).map(|x| f.at(x)).collect();
    let mut labels = vec![0u32; table.len()];
    let mut best = table.len();
    labeling_search(f.arity(), f.range(), &table, &mut labels, 0, 0, &mut best);
    Ok(best)
}

fn labeling_search(n: usize, r: u32, table: &[u32], labels: &mut [u32], x: usize, cost: usize, best: &mut usize) {
    if cost >= *best {
        return;
    }
    if x == table.len() {
        *best = cost;
        return;
    }
    // Index order is a linear extension of the subset order.
    let floor = (0..n).filter(|i| x & (1 << i) != 0).map(|i| labels[x ^ (1 << i)]).max().unwrap_or(0);
    for v in floor..r {
        labels[x] = v;
        labeling_search(n, r, table, labels, x + 1, cost + (v != table[x]) as usize, best);
    }
}

/// Exact distance for any range: the violated pairs `x < y`, `f(x) > f(y)`
/// form a partial order, and the distance equals its minimum vertex cover,
/// which equals a maximum matching of the split bipartite graph.
pub fn distance_by_matching(f: &impl CubeFn) -> Result<usize> {
    if f.arity() > 10 {
        return Err(Error::Resource(format!("matching oracle capped at n = 10, got {}", f.arity())));
    }
    let size = f.size();
    let adj: Vec<Vec<usize>> = (0..size)
        .map(|x| (0..size).filter(|&y| y != x && x & y == x && f.at(x) > f.at(y)).collect())
        .collect();
    let mut owner: Vec<Option<usize>> = vec![None; size];
    let mut matched = 0;
    for x in 0..size {
        let mut seen = vec![false; size];
        if augment(x, &adj, &mut owner, &mut seen) {
            matched += 1;
        }
    }
    Ok(matched)
}

fn augment(x: usize, adj: &[Vec<usize>], owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
    for &y in &adj[x] {
        if seen[y] {
            continue;
        }
        seen[y] = true;
        if owner[y].is_none_or(|o| augment(o, adj, owner, seen)) {
            owner[y] = Some(x);
            return true;
        }
    }
    false
}

/// Alice's set `A` and Bob's set `B` over `{1..n}`, stored as bitmasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GadgetAB {
    n: usize,
    a: usize,
    b: usize,
}

impl GadgetAB {
    pub fn new(n: usize, a: usize, b: usize) -> Result<Self> {
        if n > MAX_SCAN_ARITY || (a | b) >> n != 0 {
            return input(format!("sets must lie in 1..={n}"));
        }
        Ok(GadgetAB { n, a, b })
    }

    /// From 1-based element lists.
    pub fn from_sets(n: usize, a: &[usize], b: &[usize]) -> Result<Self> {
        let mask = |s: &[usize]| -> Result<usize> {
            s.iter().try_fold(0usize, |m, &e| {
                if e == 0 || e > n {
                    input(format!("element {e} outside 1..={n}"))
                } else {
                    Ok(m | 1 << (e - 1))
                }
            })
        };
        Self::new(n, mask(a)?, mask(b)?)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> usize {
        self.a
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn intersection(&self) -> usize {
        (self.a & self.b).count_ones() as usize
    }

    /// `2|S| + (-1)^{|S & A|} + (-1)^{|S & B|}`.
    pub fn h(&self, s: usize) -> i64 {
        combine(s, parity(s & self.a), parity(s & self.b))
    }
}

fn parity(x: usize) -> bool {
    x.count_ones() % 2 == 1
}

fn combine(s: usize, odd_a: bool, odd_b: bool) -> i64 {
    let sign = |odd: bool| if odd { -1 } else { 1 };
    2 * s.count_ones() as i64 + sign(odd_a) + sign(odd_b)
}

/// Full table of `h_AB`, optionally clamped to `[n - c sqrt n, n + c sqrt n]`.
pub fn gadget_h(g: &GadgetAB, truncate: Option<f64>) -> RangedFn {
    let n = g.n as f64;
    let (lo, hi) = match truncate {
        Some(c) => ((n - c * n.sqrt()).ceil() as i64, (n + c * n.sqrt()).floor() as i64),
        None => (i64::MIN, i64::MAX),
    };
    let table: Vec<u32> = (0..1usize << g.n).map(|s| g.h(s).clamp(lo, hi) as u32).collect();
    let r = table.iter().max().map_or(1, |&m| m + 1).max(2 * g.n as u32 + 3);
    RangedFn { n: g.n, r, table }
}

/// A query-based tester that chooses its queries from a public tape.
pub trait QueryTester {
    /// Next point to query, or `None` once the verdict is fixed.
    fn next_query(&mut self, tape: &mut Tape) -> Result<Option<usize>>;
    fn observe(&mut self, value: i64);
    fn accepts(&self) -> bool;
    fn queries(&self) -> usize;
}

/// The edge tester as a query machine: two queries per trial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeTester {
    n: usize,
    trials_left: usize,
    pending: Option<usize>,
    lower: Option<i64>,
    rejected: bool,
    queries: usize,
}

impl EdgeTester {
    pub fn new(n: usize, trials: usize) -> Self {
        EdgeTester { n, trials_left: if n == 0 { 0 } else { trials }, pending: None, lower: None, rejected: false, queries: 0 }
    }

    /// `t = 24n` trials, enough for distance `1/8`.
    pub fn for_gadget(n: usize) -> Self {
        Self::new(n, 24 * n)
    }
}

impl QueryTester for EdgeTester {
    fn next_query(&mut self, tape: &mut Tape) -> Result<Option<usize>> {
        if let Some(y) = self.pending.take() {
            self.queries += 1;
            return Ok(Some(y));
        }
        if self.rejected || self.trials_left == 0 {
            return Ok(None);
        }
        self.trials_left -= 1;
        let (x, y) = draw_edge(self.n, tape)?;
        self.pending = Some(y);
        self.lower = None;
        self.queries += 1;
        Ok(Some(x))
    }

    fn observe(&mut self, value: i64) {
        match self.lower.take() {
            None => self.lower = Some(value),
            Some(low) => self.rejected |= low > value,
        }
    }

    fn accepts(&self) -> bool {
        !self.rejected
    }

    fn queries(&self) -> usize {
        self.queries
    }
}

/// Runs a tester directly against a table.
pub fn run_tester<Q: QueryTester>(tester: &mut Q, f: &impl CubeFn, tape: &mut Tape) -> Result<bool> {
    while let Some(s) = tester.next_query(tape)? {
        tester.observe(f.at(s) as i64);
    }
    Ok(tester.accepts())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationRun {
    /// `true` means "disjoint".
    pub outcome: ProtocolOutcome,
    pub queries: usize,
}

/// Lock-step simulation of a tester on `h_AB`: per query both parties send
/// the parity of their intersection with `S`, evaluate `h_AB(S)` and feed
/// their own tester copy. Output "disjoint" iff the tester accepts.
pub fn tester_to_protocol<Q: QueryTester + Clone>(tester: &Q, g: &GadgetAB, tape: &mut Tape) -> Result<SimulationRun> {
    let (mut alice, mut bob) = (tester.clone(), tester.clone());
    let (mut tape_a, mut tape_b) = (tape.clone(), tape.clone());
    let mut transcript = Transcript::new();
    loop {
        let qa = alice.next_query(&mut tape_a)?;
        let qb = bob.next_query(&mut tape_b)?;
        assert_eq!(qa, qb, "tester copies diverged");
        let Some(s) = qa else { break };
        let bit_a = parity(s & g.a);
        let bit_b = parity(s & g.b);
        transcript.push_bit(Speaker::Alice, bit_a);
        transcript.push_bit(Speaker::Bob, bit_b);
        let value = combine(s, bit_a, bit_b);
        alice.observe(value);
        bob.observe(value);
    }
    assert_eq!(alice.accepts(), bob.accepts(), "tester copies disagree");
    assert_eq!(alice.queries(), bob.queries(), "tester copies diverged");
    *tape = tape_a;
    Ok(SimulationRun { outcome: ProtocolOutcome { output: alice.accepts(), transcript }, queries: alice.queries() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn not_x1(n: usize) -> BoolFn {
        BoolFn::from_fn(n, |x| x & 1 == 0).unwrap()
    }

    #[test]
    fn text_round_trip() {
        let f: RangedFn = "2 4\n0 1 3 2".parse().unwrap();
        assert_eq!(f.to_string().parse::<RangedFn>().unwrap(), f);
        assert!("2 4\n0 1 4 2".parse::<RangedFn>().is_err());
        assert!("2 2\n0 1 1".parse::<BoolFn>().is_err());
    }

    #[test]
    fn blr_linear_always_accepts() {
        let f = BoolFn::linear(3, 0b101);
        for seed in 0..50 {
            assert!(blr_test(&f, 0.25, &mut Tape::seeded(seed)).unwrap().accepted);
        }
        assert_eq!(blr_trials(0.25, BLR_CONSTANT), 48);
    }

    #[test]
    fn linear_distance_examples() {
        let and = BoolFn::from_fn(2, |x| x == 3).unwrap();
        assert_eq!(distance_to_linear(&and).unwrap(), 1);
        let not_parity = BoolFn::from_fn(2, |x| x.count_ones() % 2 == 0).unwrap();
        assert_eq!(distance_to_linear(&not_parity).unwrap(), 2);
    }

    #[test]
    fn slices_and_monotonize() {
        let f = not_x1(2);
        let v = violation_slices(&f);
        assert_eq!(v.counts, vec![2, 0]);
        assert_eq!(v.probability, ratio(1, 2));
        let m = monotonize_bool(&f);
        assert_eq!(m.changes, 4);
        assert_eq!(distance_to_monotone(&f).unwrap(), 2);
        assert_eq!(distance_by_matching(&f).unwrap(), 2);
    }

    #[test]
    fn dedekind_counts() {
        let counts: Vec<usize> = (0..=5).map(|n| monotone_tables(n).unwrap().len()).collect();
        assert_eq!(counts, vec![2, 3, 6, 20, 168, 7581]);
    }

    #[test]
    fn gadget_values() {
        let g = GadgetAB::from_sets(3, &[1], &[2]).unwrap();
        assert_eq!(g.h(0), 2);
        assert!(is_monotone(&gadget_h(&g, None)));
        let bad = GadgetAB::from_sets(3, &[1], &[1]).unwrap();
        assert!(!is_monotone(&gadget_h(&bad, None)));
    }

    #[test]
    fn simulation_counts_two_bits_per_query() {
        let g = GadgetAB::from_sets(4, &[1, 2], &[3]).unwrap();
        let run = tester_to_protocol(&EdgeTester::for_gadget(4), &g, &mut Tape::seeded(3)).unwrap();
        assert!(run.outcome.output);
        assert_eq!(run.queries, 2 * 24 * 4);
        assert_eq!(run.outcome.total_bits(), 2 * run.queries);
    }
}
