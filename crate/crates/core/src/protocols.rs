//! Two-party protocol simulation with exact bit accounting.
//!
//! Every message is appended to a [`Transcript`] tagged with its speaker.
//! Shared randomness comes from a [`Tape`] that both parties read in the
//! same order, so no bits are spent keeping them aligned.

use num_traits::One;
use serde_json::json;

use crate::bits::BitVector;
use crate::error::{input, Error, Result};
use crate::gf2hash::BiasedBits;
use crate::rng::SplitMix64;
use crate::scalar::{int, ratio, rational_from_f64};
use crate::sketches::StreamingSketch;
use crate::Rational;

/// Public random tape. Seeded tapes expose the SplitMix64 stream bit by bit,
/// least significant bit of each output first; fixed tapes replay a given
/// finite string and fail when exhausted.
#[derive(Debug, Clone)]
pub struct Tape {
    source: TapeSource,
    cursor: usize,
}

#[derive(Debug, Clone)]
enum TapeSource {
    Seeded { rng: SplitMix64, word: u64, left: u32 },
    Fixed(BitVector),
}

impl Tape {
    pub fn seeded(seed: u64) -> Self {
        Tape {
            source: TapeSource::Seeded { rng: SplitMix64::new(seed), word: 0, left: 0 },
            cursor: 0,
        }
    }

    pub fn fixed(bits: BitVector) -> Self {
        Tape { source: TapeSource::Fixed(bits), cursor: 0 }
    }

    /// Bits consumed so far.
    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn read_bit(&mut self) -> Result<bool> {
        let bit = match &mut self.source {
            TapeSource::Seeded { rng, word, left } => {
                if *left == 0 {
                    *word = rng.next_u64();
                    *left = 64;
                }
                let b = *word & 1 == 1;
                *word >>= 1;
                *left -= 1;
                b
            }
            TapeSource::Fixed(bits) => {
                if self.cursor >= bits.len() {
                    return Err(Error::Protocol(format!("tape exhausted after {} bits", bits.len())));
                }
                bits.get(self.cursor)
            }
        };
        self.cursor += 1;
        Ok(bit)
    }

    pub fn read_bits(&mut self, n: usize) -> Result<BitVector> {
        let mut v = BitVector::zeros(n);
        for i in 0..n {
            if self.read_bit()? {
                v.set(i, true);
            }
        }
        Ok(v)
    }

    /// Uniform value in `0..bound` by rejection on `ceil(log2 bound)` bits.
    pub fn below(&mut self, bound: usize) -> Result<usize> {
        if bound == 0 {
            return Err(Error::Input("empty range".into()));
        }
        let width = name_width(bound);
        loop {
            let mut v = 0usize;
            for i in 0..width {
                v |= (self.read_bit()? as usize) << i;
            }
            if v < bound {
                return Ok(v);
            }
        }
    }

    /// Next 64 bits as an integer, first bit least significant.
    pub fn read_u64(&mut self) -> Result<u64> {
        let mut v = 0u64;
        for i in 0..64 {
            v |= (self.read_bit()? as u64) << i;
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Speaker {
    Alice,
    Bob,
    Prover,
}

impl Speaker {
    fn letter(self) -> &'static str {
        match self {
            Speaker::Alice => "A",
            Speaker::Bob => "B",
            Speaker::Prover => "P",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Transcript {
    events: Vec<(Speaker, BitVector)>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, who: Speaker, bits: BitVector) {
        self.events.push((who, bits));
    }

    pub fn push_bit(&mut self, who: Speaker, bit: bool) {
        self.push(who, BitVector::from_bools(&[bit]));
    }

    pub fn events(&self) -> &[(Speaker, BitVector)] {
        &self.events
    }

    pub fn total(&self) -> usize {
        self.events.iter().map(|(_, b)| b.len()).sum()
    }

    pub fn bits_by(&self, who: Speaker) -> usize {
        self.events.iter().filter(|(w, _)| *w == who).map(|(_, b)| b.len()).sum()
    }

    pub fn to_json(&self) -> String {
        let events: Vec<_> = self
            .events
            .iter()
            .map(|(w, b)| json!({"who": w.letter(), "bits": b.to_string()}))
            .collect();
        json!({"events": events, "total": self.total()}).to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolOutcome {
    pub output: bool,
    pub transcript: Transcript,
}

impl ProtocolOutcome {
    pub fn alice_bits(&self) -> usize {
        self.transcript.bits_by(Speaker::Alice)
    }

    pub fn bob_bits(&self) -> usize {
        self.transcript.bits_by(Speaker::Bob)
    }

    pub fn prover_bits(&self) -> usize {
        self.transcript.bits_by(Speaker::Prover)
    }

    pub fn total_bits(&self) -> usize {
        self.transcript.total()
    }
}

/// Random inner-product equality test. Each repetition reads two `n`-bit
/// strings from the tape and Alice sends both parities; Bob announces the
/// answer, which is not charged.
pub fn run_equality(x: &BitVector, y: &BitVector, tape: &mut Tape, reps: usize) -> Result<ProtocolOutcome> {
    if x.len() != y.len() {
        return input(format!("input lengths {} and {} differ", x.len(), y.len()));
    }
    if reps == 0 {
        return input("at least one repetition is required");
    }
    let mut transcript = Transcript::new();
    let mut equal = true;
    for _ in 0..reps {
        let r1 = tape.read_bits(x.len())?;
        let r2 = tape.read_bits(x.len())?;
        let sent = [x.dot_mod2(&r1), x.dot_mod2(&r2)];
        transcript.push(Speaker::Alice, BitVector::from_bools(&sent));
        equal &= sent == [y.dot_mod2(&r1), y.dot_mod2(&r2)];
    }
    Ok(ProtocolOutcome { output: equal, transcript })
}

/// Tape bits consumed by [`run_equality`].
pub fn equality_tape_len(n: usize, reps: usize) -> usize {
    2 * n * reps
}

/// Graph with a clique held by Alice and an independent set held by Bob.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CisInstance {
    adjacency: Vec<BitVector>,
    clique: BitVector,
    indep: BitVector,
}

impl CisInstance {
    pub fn new(adjacency: Vec<BitVector>, clique: BitVector, indep: BitVector) -> Result<Self> {
        let n = adjacency.len();
        if clique.len() != n || indep.len() != n || adjacency.iter().any(|r| r.len() != n) {
            return input("adjacency rows and vertex sets must all have length n");
        }
        for u in 0..n {
            if adjacency[u].get(u) {
                return input(format!("self loop at vertex {u}"));
            }
            for v in 0..n {
                if adjacency[u].get(v) != adjacency[v].get(u) {
                    return input(format!("adjacency not symmetric at ({u}, {v})"));
                }
            }
        }
        let members = |s: &BitVector| s.iter_ones().collect::<Vec<_>>();
        for (i, &u) in members(&clique).iter().enumerate() {
            if members(&clique)[i + 1..].iter().any(|&v| !adjacency[u].get(v)) {
                return input("clique set is not a clique");
            }
        }
        for (i, &u) in members(&indep).iter().enumerate() {
            if members(&indep)[i + 1..].iter().any(|&v| adjacency[u].get(v)) {
                return input("independent set has an edge");
            }
        }
        Ok(CisInstance { adjacency, clique, indep })
    }

    /// Graph on `n` vertices whose edges are the set bits of `mask` over
    /// the pairs `(u, v)`, `u < v`, in lexicographic order.
    pub fn graph_from_mask(n: usize, mask: u64) -> Vec<BitVector> {
        let mut adj = vec![BitVector::zeros(n); n];
        let mut e = 0;
        for u in 0..n {
            for v in u + 1..n {
                if (mask >> e) & 1 == 1 {
                    adj[u].set(v, true);
                    adj[v].set(u, true);
                }
                e += 1;
            }
        }
        adj
    }

    pub fn vertices(&self) -> usize {
        self.adjacency.len()
    }

    pub fn clique(&self) -> &BitVector {
        &self.clique
    }

    pub fn indep(&self) -> &BitVector {
        &self.indep
    }

    pub fn adjacency(&self) -> &[BitVector] {
        &self.adjacency
    }
}

/// Bits needed to name one of `n` vertices.
pub fn name_width(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// Clique vs. independent set. Each round Alice names a clique vertex of
/// degree below half the current subgraph (or sends a NULL flag), and if
/// she cannot, Bob names an independent vertex of degree at least half.
/// The named vertex is checked against the other party's set and the
/// subgraph shrinks to its neighbors (Alice) or non-neighbors (Bob), the
/// vertex itself excluded. Output 1 means disjoint.
pub fn run_cis(inst: &CisInstance) -> ProtocolOutcome {
    let n = inst.vertices();
    let width = name_width(n);
    let mut alive = BitVector::ones(n);
    let mut transcript = Transcript::new();
    let degree = |v: usize, alive: &BitVector| inst.adjacency[v].and(alive).count_ones();
    let name = |v: usize| {
        let mut bits = BitVector::from_bools(&[true]).padded(width + 1);
        for i in 0..width {
            bits.set(i + 1, (v >> i) & 1 == 1);
        }
        bits
    };
    loop {
        let size = alive.count_ones();
        let low = inst
            .clique
            .and(&alive)
            .iter_ones()
            .find(|&v| 2 * degree(v, &alive) < size);
        if let Some(v) = low {
            transcript.push(Speaker::Alice, name(v));
            let hit = inst.indep.get(v);
            transcript.push_bit(Speaker::Bob, hit);
            if hit {
                return ProtocolOutcome { output: false, transcript };
            }
            alive = inst.adjacency[v].and(&alive);
            continue;
        }
        transcript.push_bit(Speaker::Alice, false);
        let high = inst
            .indep
            .and(&alive)
            .iter_ones()
            .find(|&v| 2 * degree(v, &alive) >= size);
        match high {
            Some(v) => {
                transcript.push(Speaker::Bob, name(v));
                let hit = inst.clique.get(v);
                transcript.push_bit(Speaker::Alice, hit);
                if hit {
                    return ProtocolOutcome { output: false, transcript };
                }
                let mut rest = inst.adjacency[v].complement().and(&alive);
                rest.set(v, false);
                alive = rest;
            }
            None => {
                transcript.push_bit(Speaker::Bob, false);
                return ProtocolOutcome { output: true, transcript };
            }
        }
    }
}

/// How many biased inner products the gap-Hamming protocol draws.
#[derive(Debug, Clone, PartialEq)]
pub enum SampleRule {
    /// `ceil(2 ln(2/delta) / h(eps)^2)`, the Hoeffding count for a margin of
    /// `h(eps)/2` on each side.
    Hoeffding,
    /// `ceil(c eps^-2 ln(2/delta))`.
    Constant(f64),
}

impl SampleRule {
    pub fn samples(&self, eps: f64, delta: f64) -> usize {
        let log = (2.0 / delta).ln();
        let s = match self {
            SampleRule::Hoeffding => 2.0 * log / gap_margin(eps).powi(2),
            SampleRule::Constant(c) => c * log / (eps * eps),
        };
        s.ceil().max(1.0) as usize
    }
}

/// `h(eps) = e^-2 (1 - e^-eps) / 2`, the provable lower bound on the
/// difference between far and near flip probabilities.
pub fn gap_margin(eps: f64) -> f64 {
    0.5 * (-2.0f64).exp() * (1.0 - (-eps).exp())
}

/// Probability that `<x, r> != <y, r>` when `d_H(x, y) = dist` and `r` has
/// independent coordinates that are 1 with probability `1/(2L)`:
/// `(1 - (1 - 1/L)^dist) / 2`.
pub fn gap_probability(scale: u64, dist: u64) -> Rational {
    let keep = Rational::one() - ratio(1, scale as i64);
    (Rational::one() - num_traits::pow(keep, dist as usize)) / int(2)
}

/// Decision threshold `(t + h(eps)/2) s` with `t = gap_probability(L, L)`.
pub fn gap_threshold(scale: u64, eps: f64, samples: usize) -> Rational {
    let margin = rational_from_f64(gap_margin(eps)) / int(2);
    (gap_probability(scale, scale) + margin) * int(samples as i64)
}

/// `s` random strings with coordinates 1 with probability `1/(2L)`; the
/// hash of `x` is the vector of its inner products with them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InnerProductHash {
    strings: Vec<BitVector>,
}

impl InnerProductHash {
    /// Reads one 64-bit seed per string from the tape.
    pub fn draw(d: usize, scale: u64, samples: usize, tape: &mut Tape) -> Result<Self> {
        if scale == 0 {
            return input("scale must be at least 1");
        }
        let strings = (0..samples)
            .map(|_| Ok(BiasedBits::new(d, 1, 2 * scale, tape.read_u64()?)?.vector()))
            .collect::<Result<Vec<_>>>()?;
        Ok(InnerProductHash { strings })
    }

    pub fn len(&self) -> usize {
        self.strings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strings.is_empty()
    }

    pub fn apply(&self, x: &BitVector) -> BitVector {
        let bits: Vec<bool> = self.strings.iter().map(|r| x.dot_mod2(r)).collect();
        BitVector::from_bools(&bits)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapHammingParams {
    pub scale: u64,
    pub eps: f64,
    pub delta: f64,
    pub rule: SampleRule,
}

impl GapHammingParams {
    pub fn new(scale: u64, eps: f64, delta: f64) -> Self {
        GapHammingParams { scale, eps, delta, rule: SampleRule::Hoeffding }
    }

    pub fn samples(&self) -> usize {
        self.rule.samples(self.eps, self.delta)
    }
}

/// Decides `d_H(x, y) <= L` against `d_H(x, y) >= (1 + eps) L`. Alice sends
/// the `s` hash bits of `x`; Bob accepts (output 1) when at most
/// [`gap_threshold`] of them differ from his own.
pub fn run_epsgh(x: &BitVector, y: &BitVector, params: &GapHammingParams, tape: &mut Tape) -> Result<ProtocolOutcome> {
    if x.len() != y.len() {
        return input("input lengths differ");
    }
    if params.scale == 0 || params.scale as usize > x.len() {
        return input(format!("scale {} outside 1..={}", params.scale, x.len()));
    }
    if !(params.eps > 0.0 && params.eps <= 1.0) {
        return input("eps must lie in (0, 1]");
    }
    let s = params.samples();
    let hash = InnerProductHash::draw(x.len(), params.scale, s, tape)?;
    let hx = hash.apply(x);
    let differ = hx.hamming(&hash.apply(y));
    let mut transcript = Transcript::new();
    transcript.push(Speaker::Alice, hx);
    let accept = int(differ as i64) <= gap_threshold(params.scale, params.eps, s);
    Ok(ProtocolOutcome { output: accept, transcript })
}

/// Alice runs a fresh sketch over the 1-coordinates of `x` and sends its
/// serialized state; Bob resumes it on the 1-coordinates of `y` and applies
/// `decide` to the final estimate. Also returns Bob's final sketch.
pub fn streaming_to_oneway<S, F, D>(factory: F, x: &BitVector, y: &BitVector, decide: D) -> Result<(ProtocolOutcome, S)>
where
    S: StreamingSketch,
    F: FnOnce() -> Result<S>,
    D: FnOnce(&Rational) -> bool,
{
    if x.len() != y.len() {
        return input("input lengths differ");
    }
    let items = |v: &BitVector| v.iter_ones().map(|i| i as u64 + 1).collect::<Vec<_>>();
    let mut alice = factory()?;
    alice.feed(&items(x))?;
    let state = alice.serialize();
    let mut message = BitVector::zeros(8 * state.len());
    for (i, byte) in state.iter().enumerate() {
        for b in 0..8 {
            message.set(8 * i + b, (byte >> b) & 1 == 1);
        }
    }
    let mut transcript = Transcript::new();
    transcript.push(Speaker::Alice, message);
    let mut bob = S::deserialize(&state).map_err(|e| Error::Protocol(format!("state hand-off: {e}")))?;
    bob.feed(&items(y))?;
    let output = decide(&bob.estimate());
    Ok((ProtocolOutcome { output, transcript }, bob))
}

/// Rejects the frequency answer above 4/3: disjoint inputs give `F_inf <= 1`.
pub fn finfty_says_disjoint(estimate: &Rational) -> bool {
    *estimate <= ratio(4, 3)
}

/// Looks for `t` tape seeds such that, on every input pair of length `n`,
/// at least 60% of the `t` deterministic runs answer correctly.
pub fn newman_search<P, T>(protocol: P, truth: T, n: usize, t: usize, budget: usize, seed: u64) -> Result<Vec<u64>>
where
    P: Fn(&BitVector, &BitVector, &mut Tape) -> Result<bool>,
    T: Fn(&BitVector, &BitVector) -> bool,
{
    if n > 4 || t == 0 {
        return input("Newman search needs n <= 4 and t >= 1");
    }
    let inputs: Vec<BitVector> = crate::bits::all_vectors(n).collect();
    let mut rng = SplitMix64::new(seed);
    for attempt in 1..=budget {
        let seeds: Vec<u64> = (0..t).map(|_| rng.next_u64()).collect();
        if newman_verify(&protocol, &truth, &inputs, &seeds)? {
            log::debug!("newman: verified tape set after {attempt} attempts");
            return Ok(seeds);
        }
    }
    Err(Error::SearchFailed { attempts: budget })
}

fn newman_verify<P, T>(protocol: &P, truth: &T, inputs: &[BitVector], seeds: &[u64]) -> Result<bool>
where
    P: Fn(&BitVector, &BitVector, &mut Tape) -> Result<bool>,
    T: Fn(&BitVector, &BitVector) -> bool,
{
    for x in inputs {
        for y in inputs {
            let want = truth(x, y);
            let mut correct = 0;
            for &s in seeds {
                if protocol(x, y, &mut Tape::seeded(s))? == want {
                    correct += 1;
                }
            }
            if 5 * correct < 3 * seeds.len() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `ceil(log2 t)` as used for prover certificates.
pub fn ceil_log2(t: usize) -> usize {
    name_width(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::all_vectors;
    use crate::sketches::ExactCounts;

    fn bv(s: &str) -> BitVector {
        s.parse().unwrap()
    }

    #[test]
    fn equality_error_by_tape_enumeration() {
        let (x, y) = (bv("10"), bv("11"));
        let accepted = all_vectors(equality_tape_len(2, 1))
            .filter(|t| run_equality(&x, &y, &mut Tape::fixed(t.clone()), 1).unwrap().output)
            .count();
        assert_eq!(accepted, 4);
        let out = run_equality(&x, &x, &mut Tape::seeded(5), 3).unwrap();
        assert!(out.output);
        assert_eq!(out.alice_bits(), 6);
        assert!(run_equality(&x, &bv("1"), &mut Tape::seeded(0), 1).is_err());
    }

    #[test]
    fn fixed_tape_runs_out() {
        let mut tape = Tape::fixed(bv("101"));
        assert_eq!(tape.read_bits(3).unwrap(), bv("101"));
        assert!(matches!(tape.read_bit(), Err(Error::Protocol(_))));
    }

    #[test]
    fn seeded_tape_matches_generator() {
        let mut tape = Tape::seeded(77);
        let mut rng = SplitMix64::new(77);
        assert_eq!(tape.read_u64().unwrap(), rng.next_u64());
        assert_eq!(tape.cursor(), 64);
    }

    #[test]
    fn cis_triangle_and_shared_vertex() {
        let tri = CisInstance::graph_from_mask(3, 0b111);
        let inst = CisInstance::new(tri.clone(), bv("110"), bv("001")).unwrap();
        let out = run_cis(&inst);
        assert!(out.output);
        let shared = CisInstance::new(tri, bv("011"), bv("001")).unwrap();
        let out = run_cis(&shared);
        assert!(!out.output);
        assert!(CisInstance::new(CisInstance::graph_from_mask(3, 0), bv("110"), bv("001")).is_err());
    }

    #[test]
    fn gap_probability_values() {
        assert_eq!(gap_probability(2, 2), ratio(3, 8));
        assert_eq!(gap_probability(1, 3), ratio(1, 2));
        assert_eq!(gap_probability(4, 0), ratio(0, 1));
    }

    #[test]
    fn epsgh_accepts_equal_inputs() {
        let x = BitVector::from_u64(0xDEAD_BEEF, 32);
        let params = GapHammingParams::new(4, 1.0, 0.1);
        let out = run_epsgh(&x, &x, &params, &mut Tape::seeded(1)).unwrap();
        assert!(out.output);
        assert_eq!(out.alice_bits(), params.samples());
    }

    #[test]
    fn adapter_disjointness_on_two_bits() {
        for x in all_vectors(2) {
            for y in all_vectors(2) {
                let (out, _) =
                    streaming_to_oneway(|| Ok(ExactCounts::new(2)), &x, &y, finfty_says_disjoint).unwrap();
                assert_eq!(out.output, x.and(&y).count_ones() == 0);
                assert_eq!(out.alice_bits(), 8 * (1 + 8 + 16));
            }
        }
    }

    /// Sketch whose state cannot be read back.
    struct Lossy;

    impl StreamingSketch for Lossy {
        fn update(&mut self, _: u64) -> Result<()> {
            Ok(())
        }
        fn serialize(&self) -> Vec<u8> {
            vec![0]
        }
        fn deserialize(_: &[u8]) -> Result<Self> {
            input("unreadable")
        }
        fn estimate(&self) -> Rational {
            int(0)
        }
    }

    #[test]
    fn adapter_reports_hand_off_failure() {
        let x = bv("1010");
        let res = streaming_to_oneway(|| Ok(Lossy), &x, &x, |_| true);
        assert!(matches!(res, Err(Error::Protocol(_))));
    }

    #[test]
    fn transcript_json_shape() {
        let mut t = Transcript::new();
        t.push(Speaker::Alice, bv("0110"));
        t.push_bit(Speaker::Prover, true);
        assert_eq!(t.to_json(), r#"{"events":[{"bits":"0110","who":"A"},{"bits":"1","who":"P"}],"total":5}"#);
    }

    #[test]
    fn newman_finds_tapes_for_equality() {
        let eq = |x: &BitVector, y: &BitVector, t: &mut Tape| Ok(run_equality(x, y, t, 1)?.output);
        let seeds = newman_search(eq, |x, y| x == y, 2, 12, 10_000, 9).unwrap();
        assert_eq!(seeds.len(), 12);
    }
}
