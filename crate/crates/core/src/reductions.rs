//! Executable reductions between communication problems and streaming or
//! sensing tasks, plus the combinatorial gadgets they rely on.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::bits::BitVector;
use crate::error::{input, resource, Error, Result};
use crate::protocols::Tape;
use crate::rng::SplitMix64;
use crate::scalar::{int, ratio};
use crate::sketches::Stream;
use crate::Rational;

/// Alice holds `x`, Bob holds a 1-based index `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexInstance {
    pub x: BitVector,
    pub i: usize,
}

impl IndexInstance {
    pub fn new(x: BitVector, i: usize) -> Result<Self> {
        if i == 0 || i > x.len() {
            return input(format!("index {i} outside 1..={}", x.len()));
        }
        Ok(IndexInstance { x, i })
    }

    pub fn answer(&self) -> bool {
        self.x.get(self.i - 1)
    }
}

pub fn disjoint(x: &BitVector, y: &BitVector) -> bool {
    x.and(y).count_ones() == 0
}

/// `(x, e_i)`: disjoint exactly when `x_i = 0`.
pub fn index_to_disj(inst: &IndexInstance) -> (BitVector, BitVector) {
    (inst.x.clone(), BitVector::basis(inst.x.len(), inst.i - 1))
}

/// Bit pair produced from one shared string `r`: Alice's `a = [d_H(x, r) < n/2]`
/// and Bob's `b = r_i`.
pub fn gh_bit_pair(inst: &IndexInstance, r: &BitVector) -> (bool, bool) {
    let n = inst.x.len();
    (2 * inst.x.hamming(r) < n, r.get(inst.i - 1))
}

/// Repeats the bit experiment `q * n` times with strings read from the tape.
/// `n` must be odd so the majority comparison never ties.
pub fn index_to_gh(inst: &IndexInstance, q: usize, tape: &mut Tape) -> Result<(BitVector, BitVector)> {
    let n = inst.x.len();
    if n.is_multiple_of(2) {
        return input(format!("index length {n} must be odd"));
    }
    if q == 0 {
        return input("blow-up factor must be positive");
    }
    let m = q * n;
    let (mut a, mut b) = (BitVector::zeros(m), BitVector::zeros(m));
    for t in 0..m {
        let r = tape.read_bits(n)?;
        let (x_bit, y_bit) = gh_bit_pair(inst, &r);
        a.set(t, x_bit);
        b.set(t, y_bit);
    }
    Ok((a, b))
}

/// The union stream: 1-coordinates of `x`, then of `y`, as items `i + 1`.
pub fn union_stream(x: &BitVector, y: &BitVector) -> Result<Stream> {
    if x.len() != y.len() {
        return input("input lengths differ");
    }
    Stream::from_indicator(x).concat(&Stream::from_indicator(y))
}

/// `2 F0 - |x| - |y|` with `F0` supplied by `estimator` on the union stream.
pub fn gh_via_f0<E>(x: &BitVector, y: &BitVector, estimator: E) -> Result<Rational>
where
    E: FnOnce(&Stream) -> Result<Rational>,
{
    let stream = union_stream(x, y)?;
    let f0 = estimator(&stream)?;
    Ok(f0 * int(2) - int(x.count_ones() as i64) - int(y.count_ones() as i64))
}

pub fn exact_f0(stream: &Stream) -> Result<Rational> {
    Ok(Rational::from_integer(stream.moment(0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FinftyMode {
    Exact,
    /// The exact value scaled by a seeded factor drawn from `[1/1.2, 1.2]`.
    Approx { seed: u64 },
}

/// Declares `x` and `y` disjoint when the (possibly approximate) maximum
/// frequency of the union stream is at most 4/3.
pub fn disj_via_finfty(x: &BitVector, y: &BitVector, mode: FinftyMode) -> Result<bool> {
    let stream = union_stream(x, y)?;
    let exact = int(stream.f_infinity() as i64);
    let answer = match mode {
        FinftyMode::Exact => exact,
        FinftyMode::Approx { seed } => {
            let (lo, hi) = (ratio(5, 6), ratio(6, 5));
            let u = ratio(SplitMix64::new(seed).below(1001) as i64, 1000);
            exact * (lo.clone() + (hi - lo) * u)
        }
    };
    Ok(answer <= ratio(4, 3))
}

/// Appends zeros to both strings up to length `n`.
pub fn pad_gh(x: &BitVector, y: &BitVector, n: usize) -> Result<(BitVector, BitVector)> {
    if x.len() != y.len() {
        return input("input lengths differ");
    }
    if x.len() > n {
        return input(format!("cannot pad length {} down to {n}", x.len()));
    }
    Ok((x.padded(n), y.padded(n)))
}

/// Required pairwise distance `ceil(k / 10)`, at least 1.
pub fn codebook_distance(k: usize) -> usize {
    k.div_ceil(10).max(1)
}

/// `k`-sparse 0/1 vectors of length `n` with pairwise distance at least
/// [`codebook_distance`]; the size is a power of two so codewords can be
/// indexed by bit strings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codebook {
    n: usize,
    k: usize,
    vectors: Vec<BitVector>,
}

impl Codebook {
    pub fn new(n: usize, k: usize, vectors: Vec<BitVector>) -> Result<Self> {
        if vectors.is_empty() || !vectors.len().is_power_of_two() {
            return input(format!("codebook size {} is not a power of two", vectors.len()));
        }
        if vectors.iter().any(|v| v.len() != n || v.count_ones() != k) {
            return input(format!("every codeword must be a {k}-sparse vector of length {n}"));
        }
        let dist = codebook_distance(k);
        for (i, a) in vectors.iter().enumerate() {
            if vectors[i + 1..].iter().any(|b| a.hamming(b) < dist) {
                return input(format!("codewords closer than {dist}"));
            }
        }
        Ok(Codebook { n, k, vectors })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn vectors(&self) -> &[BitVector] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Uniformly random `k`-subset of `0..n` as a vector.
pub fn random_sparse(n: usize, k: usize, rng: &mut SplitMix64) -> BitVector {
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = i + rng.below_usize(n - i);
        idx.swap(i, j);
    }
    BitVector::from_indices(n, idx[..k].iter().copied())
}

/// Rejection sampling of random `k`-sparse vectors until `target` mutually
/// far codewords are kept or `budget` samples are spent.
pub fn build_codebook(n: usize, k: usize, target: usize, seed: u64, budget: usize) -> Result<Codebook> {
    if !target.is_power_of_two() {
        return input(format!("target size {target} is not a power of two"));
    }
    if k == 0 || 2 * k > n {
        return input(format!("sparsity {k} must lie in 1..={}", n / 2));
    }
    let dist = codebook_distance(k);
    let mut rng = SplitMix64::new(seed);
    let mut kept: Vec<BitVector> = Vec::with_capacity(target);
    for _ in 0..budget {
        if kept.len() == target {
            break;
        }
        let v = random_sparse(n, k, &mut rng);
        if kept.iter().all(|w| w.hamming(&v) >= dist) {
            kept.push(v);
        }
    }
    if kept.len() < target {
        return Err(Error::Construction(format!(
            "kept {} of {target} codewords within {budget} samples",
            kept.len()
        )));
    }
    Codebook::new(n, k, kept)
}

/// Every `k`-sparse vector of length `n`, in increasing index order.
pub fn all_sparse(n: usize, k: usize) -> Vec<BitVector> {
    crate::bits::all_vectors(n).filter(|v| v.count_ones() == k).collect()
}

/// Random 0/1 sensing matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensingMatrix {
    n: usize,
    rows: Vec<BitVector>,
}

impl SensingMatrix {
    pub fn random(m: usize, n: usize, rng: &mut SplitMix64) -> Self {
        let rows = (0..m)
            .map(|_| {
                let bits: Vec<bool> = (0..n).map(|_| rng.next_bool()).collect();
                BitVector::from_bools(&bits)
            })
            .collect();
        SensingMatrix { n, rows }
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn apply_bits(&self, x: &BitVector) -> Vec<BigInt> {
        self.rows.iter().map(|r| BigInt::from(r.and(x).count_ones())).collect()
    }

    pub fn apply(&self, v: &[BigInt]) -> Vec<BigInt> {
        self.rows
            .iter()
            .map(|r| r.iter_ones().map(|i| &v[i]).sum())
            .collect()
    }
}

/// Rows `ceil(log2(|X|^3))`, with `|X|` floored at 2.
pub fn toy_rows(set_size: usize) -> usize {
    let cube = (set_size.max(2) as u128).pow(3);
    (128 - (cube - 1).leading_zeros()) as usize
}

/// Sensing of a known finite set `X` by a random matrix; recovery scans `X`.
#[derive(Debug, Clone)]
pub struct ToySensing {
    matrix: SensingMatrix,
    set: Vec<BitVector>,
}

impl ToySensing {
    pub fn matrix(&self) -> &SensingMatrix {
        &self.matrix
    }

    pub fn measure(&self, x: &BitVector) -> Vec<BigInt> {
        self.matrix.apply_bits(x)
    }

    /// The first member of `X` whose measurement is `b`.
    pub fn recover(&self, b: &[BigInt]) -> Result<BitVector> {
        self.set
            .iter()
            .find(|x| self.matrix.apply_bits(x) == b)
            .cloned()
            .ok_or(Error::NotFound)
    }

    /// No two members of `X` share a measurement.
    pub fn is_injective(&self) -> bool {
        let mut seen: Vec<Vec<BigInt>> = self.set.iter().map(|x| self.matrix.apply_bits(x)).collect();
        seen.sort();
        seen.windows(2).all(|w| w[0] != w[1])
    }
}

pub fn toy_sensing(set: &[BitVector], seed: u64) -> Result<ToySensing> {
    let n = set.first().map(BitVector::len).ok_or_else(|| Error::Input("empty set".into()))?;
    if set.iter().any(|x| x.len() != n) {
        return input("set members differ in length");
    }
    let m = toy_rows(set.len());
    let matrix = SensingMatrix::random(m, n, &mut SplitMix64::new(seed));
    Ok(ToySensing { matrix, set: set.to_vec() })
}

/// `y = sum_j alpha^j x_j` for blocks `j = 1..=B`.
pub fn cs_encode(blocks: &[BitVector], alpha: &BigInt) -> Result<Vec<BigInt>> {
    let n = blocks.first().map(BitVector::len).ok_or_else(|| Error::Input("no blocks".into()))?;
    if blocks.iter().any(|b| b.len() != n) {
        return input("blocks differ in length");
    }
    let mut y = vec![BigInt::zero(); n];
    let mut scale = BigInt::one();
    for block in blocks {
        scale *= alpha;
        for i in block.iter_ones() {
            y[i] += &scale;
        }
    }
    Ok(y)
}

/// `alpha = max(2, 200 c)` for an oracle with approximation constant `c`.
pub fn default_alpha(c: u64) -> BigInt {
    BigInt::from((200 * c).max(2))
}

pub fn l1(v: &[BigInt]) -> BigInt {
    v.iter().map(|x| x.abs()).sum()
}

fn l1_diff(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Sparse-recovery black box: sees only a measurement `A v`.
pub trait RecoveryOracle {
    fn recover(&self, measurement: &[BigInt]) -> Result<Vec<BigInt>>;
}

/// Best `k`-term approximation (largest magnitudes, lowest index on ties).
pub fn top_k(v: &[BigInt], k: usize) -> Vec<BigInt> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[b].abs().cmp(&v[a].abs()).then(a.cmp(&b)));
    let mut out = vec![BigInt::zero(); v.len()];
    for &i in order.iter().take(k) {
        out[i] = v[i].clone();
    }
    out
}

/// Test-harness oracle with approximation constant 1: it knows the encoded
/// signal `y` and returns the top-`k` projection of whichever residual
/// `y - sum_{i > j} alpha^i x_i` (over codewords `x_i`) matches the
/// measurement. The decoder never sees `y`.
pub struct GenieTopK<'a> {
    matrix: &'a SensingMatrix,
    signal: Vec<BigInt>,
    codebook: &'a Codebook,
    alpha: BigInt,
    blocks: usize,
}

impl<'a> GenieTopK<'a> {
    pub fn new(matrix: &'a SensingMatrix, signal: Vec<BigInt>, codebook: &'a Codebook, alpha: BigInt, blocks: usize) -> Self {
        GenieTopK { matrix, signal, codebook, alpha, blocks }
    }

    fn search(&self, residual: &[BigInt], block: usize, measurement: &[BigInt]) -> Option<Vec<BigInt>> {
        if self.matrix.apply(residual) == measurement {
            return Some(residual.to_vec());
        }
        if block == 0 {
            return None;
        }
        let scale = num_traits::pow(self.alpha.clone(), block);
        self.codebook.vectors().iter().find_map(|x| {
            let mut next = residual.to_vec();
            for i in x.iter_ones() {
                next[i] -= &scale;
            }
            self.search(&next, block - 1, measurement)
        })
    }
}

impl RecoveryOracle for GenieTopK<'_> {
    fn recover(&self, measurement: &[BigInt]) -> Result<Vec<BigInt>> {
        let v = self.search(&self.signal, self.blocks, measurement).ok_or(Error::NotFound)?;
        Ok(top_k(&v, self.codebook.k()))
    }
}

/// Exact oracle for residuals that are a single scaled codeword (or zero).
pub struct ExactScanOracle<'a> {
    matrix: &'a SensingMatrix,
    codebook: &'a Codebook,
    alpha: BigInt,
    blocks: usize,
}

impl<'a> ExactScanOracle<'a> {
    pub fn new(matrix: &'a SensingMatrix, codebook: &'a Codebook, alpha: BigInt, blocks: usize) -> Self {
        ExactScanOracle { matrix, codebook, alpha, blocks }
    }
}

impl RecoveryOracle for ExactScanOracle<'_> {
    fn recover(&self, measurement: &[BigInt]) -> Result<Vec<BigInt>> {
        let n = self.matrix.cols();
        if measurement.iter().all(Zero::is_zero) {
            return Ok(vec![BigInt::zero(); n]);
        }
        for j in 1..=self.blocks {
            let scale = num_traits::pow(self.alpha.clone(), j);
            for x in self.codebook.vectors() {
                let ax: Vec<BigInt> = self.matrix.apply_bits(x).into_iter().map(|v| v * &scale).collect();
                if ax == measurement {
                    let mut v = vec![BigInt::zero(); n];
                    for i in x.iter_ones() {
                        v[i] = scale.clone();
                    }
                    return Ok(v);
                }
            }
        }
        Err(Error::NotFound)
    }
}

/// One decoding step: the block index, the recovered codeword, its
/// distance to the oracle output and the runner-up distance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeStep {
    pub block: usize,
    pub codeword: usize,
    pub near: BigInt,
    pub far: Option<BigInt>,
    pub scale: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeTrace {
    /// Recovered codewords for blocks `1..=B`.
    pub blocks: Vec<BitVector>,
    /// Steps in decoding order (`j = B` first).
    pub steps: Vec<DecodeStep>,
}

/// Peels blocks from the most significant down. At block `j` the oracle is
/// applied to `A (y - z)`, the nearest scaled codeword is taken, and the
/// margins `near <= 0.02 k alpha^j` and `far >= 0.08 k alpha^j` are checked
/// before the codeword is subtracted.
pub fn cs_decode(
    measurement: &[BigInt],
    matrix: &SensingMatrix,
    oracle: &dyn RecoveryOracle,
    codebook: &Codebook,
    alpha: &BigInt,
    blocks: usize,
) -> Result<DecodeTrace> {
    let n = matrix.cols();
    let k = BigInt::from(codebook.k());
    let mut z = vec![BigInt::zero(); n];
    let mut found = vec![BitVector::zeros(n); blocks];
    let mut steps = Vec::with_capacity(blocks);
    for j in (1..=blocks).rev() {
        let az = matrix.apply(&z);
        let residual: Vec<BigInt> = measurement.iter().zip(&az).map(|(a, b)| a - b).collect();
        let w = oracle.recover(&residual)?;
        let scale = num_traits::pow(alpha.clone(), j);
        let mut dists: Vec<(BigInt, usize)> = codebook
            .vectors()
            .iter()
            .enumerate()
            .map(|(idx, x)| {
                let mut sx = vec![BigInt::zero(); n];
                for i in x.iter_ones() {
                    sx[i] = scale.clone();
                }
                (l1_diff(&w, &sx), idx)
            })
            .collect();
        dists.sort();
        let (near, codeword) = dists[0].clone();
        let far = dists.get(1).map(|d| d.0.clone());
        let budget = &k * &scale;
        if BigInt::from(50) * &near > budget {
            return Err(Error::Decode(format!("block {j}: nearest codeword at distance {near} exceeds 0.02 k alpha^j")));
        }
        if let Some(f) = &far {
            if BigInt::from(25) * f < BigInt::from(2) * &budget {
                return Err(Error::Decode(format!("block {j}: runner-up at distance {f} is below 0.08 k alpha^j")));
            }
        }
        let x = &codebook.vectors()[codeword];
        for i in x.iter_ones() {
            z[i] += &scale;
        }
        found[j - 1] = x.clone();
        steps.push(DecodeStep { block: j, codeword, near, far, scale });
    }
    Ok(DecodeTrace { blocks: found, steps })
}

/// Independent decodes used by the amplified variant: `ceil(log2 log2 n) + 3`.
pub fn majority_runs(n: usize) -> usize {
    let log = (n.max(2) as f64).log2();
    (log.log2().max(0.0)).ceil() as usize + 3
}

/// Runs `runs` independent decodes and takes a per-block plurality vote
/// (first-seen codeword wins ties). Failed runs abstain.
pub fn majority_decode<F>(runs: usize, mut decode_once: F) -> Result<Vec<BitVector>>
where
    F: FnMut(usize) -> Result<Vec<BitVector>>,
{
    let results: Vec<Vec<BitVector>> = (0..runs).filter_map(|r| decode_once(r).ok()).collect();
    let first = results.first().ok_or_else(|| Error::Decode("every decode run failed".into()))?;
    let blocks = first.len();
    Ok((0..blocks)
        .map(|b| {
            let mut tally: Vec<(BitVector, usize)> = Vec::new();
            for res in &results {
                match tally.iter_mut().find(|(v, _)| *v == res[b]) {
                    Some(entry) => entry.1 += 1,
                    None => tally.push((res[b].clone(), 1)),
                }
            }
            let top = tally.iter().map(|(_, c)| *c).max().unwrap();
            tally.into_iter().find(|(_, c)| *c == top).unwrap().0
        })
        .collect())
}

/// Partition of items `0..m` into `k` classes, as item -> class.
pub type Partition = Vec<usize>;

/// `k^2 t^2 e^{-m/k^2}`, the union bound on a random family failing.
pub fn intersecting_failure_bound(m: usize, k: usize, t: usize) -> f64 {
    let k2 = (k * k) as f64;
    k2 * (t * t) as f64 * (-(m as f64) / k2).exp()
}

/// Classes of different partitions held by different players meet.
pub fn is_intersecting(family: &[Partition], k: usize) -> bool {
    for (j, p) in family.iter().enumerate() {
        for q in &family[j + 1..] {
            for i in 0..k {
                for i2 in 0..k {
                    if i == i2 {
                        continue;
                    }
                    if !p.iter().zip(q).any(|(&a, &b)| a == i && b == i2) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Draws `t` uniformly random `k`-partitions of `m` items, redrawing the
/// whole family until it is intersecting.
pub fn intersecting_family(m: usize, k: usize, t: usize, seed: u64, budget: usize) -> Result<Vec<Partition>> {
    if k == 0 || t == 0 {
        return input("need at least one player and one partition");
    }
    let bound = intersecting_failure_bound(m, k, t);
    if bound >= 1.0 {
        log::warn!("failure bound {bound:.3} >= 1 for m={m}, k={k}, t={t}; construction may not succeed");
    }
    let mut rng = SplitMix64::new(seed);
    for _ in 0..budget {
        let family: Vec<Partition> = (0..t)
            .map(|_| (0..m).map(|_| rng.below_usize(k)).collect())
            .collect();
        if is_intersecting(&family, k) {
            return Ok(family);
        }
    }
    Err(Error::Construction(format!("no intersecting family within {budget} draws")))
}

/// Welfare maximization instance induced by a multi-party disjointness
/// input. Player `i` values a bundle at 1 when it contains class `i` of some
/// partition `j` in `S_i`; the subadditive variant adds 1 to every nonempty
/// bundle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WelfareInstance {
    pub k: usize,
    pub m: usize,
    /// Partitions as item -> class arrays.
    pub partitions: Vec<Partition>,
    /// Player inputs `S_i` as 0-based partition indices.
    pub sets: Vec<Vec<usize>>,
    pub subadditive: bool,
}

/// Allocation cap `k^m` for brute force.
pub const WELFARE_BUDGET: u64 = 3u64.pow(12);

impl WelfareInstance {
    pub fn new(sets: Vec<Vec<usize>>, partitions: Vec<Partition>, subadditive: bool) -> Result<Self> {
        let k = sets.len();
        let m = partitions.first().map_or(0, Vec::len);
        if k == 0 || partitions.is_empty() {
            return input("need players and partitions");
        }
        if partitions.iter().any(|p| p.len() != m || p.iter().any(|&c| c >= k)) {
            return input("partitions must assign each item to one of k classes");
        }
        if sets.iter().flatten().any(|&j| j >= partitions.len()) {
            return input("input set references a missing partition");
        }
        if !is_intersecting(&partitions, k) {
            return input("partition family is not intersecting");
        }
        Ok(WelfareInstance { k, m, partitions, sets, subadditive })
    }

    /// Bitmask of the items in class `i` of partition `j`.
    fn class_mask(&self, j: usize, i: usize) -> u64 {
        self.partitions[j]
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c == i)
            .fold(0, |m, (item, _)| m | 1 << item)
    }

    /// Value of the item bundle `bundle` (bitmask) to player `i`.
    pub fn value(&self, i: usize, bundle: u64) -> u32 {
        let happy = self.sets[i].iter().any(|&j| {
            let need = self.class_mask(j, i);
            bundle & need == need
        });
        happy as u32 + (self.subadditive && bundle != 0) as u32
    }

    /// Brute force over all `k^m` allocations; returns the best welfare and
    /// an allocation achieving it (item -> player).
    pub fn optimal_welfare(&self) -> Result<(u32, Vec<usize>)> {
        let total = (self.k as u64).checked_pow(self.m as u32).unwrap_or(u64::MAX);
        if total > WELFARE_BUDGET || self.m > 63 {
            return resource(format!("{total} allocations exceed the brute-force cap"));
        }
        let mut alloc = vec![0usize; self.m];
        let mut best = (0, alloc.clone());
        for code in 0..total {
            let mut c = code;
            for slot in alloc.iter_mut() {
                *slot = (c % self.k as u64) as usize;
                c /= self.k as u64;
            }
            let welfare: u32 = (0..self.k)
                .map(|i| {
                    let bundle = alloc.iter().enumerate().filter(|&(_, &p)| p == i).fold(0, |m, (t, _)| m | 1 << t);
                    self.value(i, bundle)
                })
                .sum();
            if code == 0 || welfare > best.0 {
                best = (welfare, alloc.clone());
            }
        }
        Ok(best)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: WelfareInstance =
            serde_json::from_str(text).map_err(|e| Error::Input(format!("welfare JSON: {e}")))?;
        Self::new(raw.sets, raw.partitions, raw.subadditive)
    }
}

/// `(sets, family)` to the welfare instance of the reduction.
pub fn mdisj_to_welfare(sets: Vec<Vec<usize>>, family: Vec<Partition>, subadditive: bool) -> Result<WelfareInstance> {
    WelfareInstance::new(sets, family, subadditive)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bv(s: &str) -> BitVector {
        s.parse().unwrap()
    }

    #[test]
    fn index_to_disj_examples() {
        let (x, y) = index_to_disj(&IndexInstance::new(bv("101"), 2).unwrap());
        assert_eq!(y, bv("010"));
        assert!(disjoint(&x, &y));
        let (x, y) = index_to_disj(&IndexInstance::new(bv("101"), 3).unwrap());
        assert_eq!(y, bv("001"));
        assert!(!disjoint(&x, &y));
    }

    #[test]
    fn index_to_gh_needs_odd_length() {
        let inst = IndexInstance::new(bv("10"), 1).unwrap();
        assert!(index_to_gh(&inst, 1, &mut Tape::seeded(0)).is_err());
        let inst = IndexInstance::new(bv("101"), 1).unwrap();
        let (a, b) = index_to_gh(&inst, 4, &mut Tape::seeded(0)).unwrap();
        assert_eq!((a.len(), b.len()), (12, 12));
    }

    #[test]
    fn hamming_through_distinct_count() {
        let d = gh_via_f0(&bv("110"), &bv("011"), exact_f0).unwrap();
        assert_eq!(d, int(2));
        let same = gh_via_f0(&bv("1011"), &bv("1011"), exact_f0).unwrap();
        assert_eq!(same, int(0));
    }

    #[test]
    fn finfty_examples() {
        assert!(disj_via_finfty(&bv("10"), &bv("01"), FinftyMode::Exact).unwrap());
        assert!(!disj_via_finfty(&bv("10"), &bv("10"), FinftyMode::Exact).unwrap());
        for seed in 0..50 {
            assert!(disj_via_finfty(&bv("10"), &bv("01"), FinftyMode::Approx { seed }).unwrap());
            assert!(!disj_via_finfty(&bv("11"), &bv("10"), FinftyMode::Approx { seed }).unwrap());
        }
    }

    #[test]
    fn padding() {
        let (x, y) = pad_gh(&bv("1010"), &bv("0110"), 8).unwrap();
        assert_eq!(x.hamming(&y), 2);
        assert_eq!(x.len(), 8);
        assert!(pad_gh(&bv("101"), &bv("101"), 2).is_err());
    }

    #[test]
    fn codebook_small_sparsity() {
        let cb = build_codebook(8, 2, 8, 1, 100).unwrap();
        assert_eq!(cb.len(), 8);
        assert!(build_codebook(8, 2, 6, 1, 100).is_err());
        assert!(matches!(build_codebook(8, 4, 64, 1, 50), Err(Error::Construction(_))));
    }

    #[test]
    fn toy_rows_formula() {
        assert_eq!(toy_rows(1), 3);
        assert_eq!(toy_rows(2), 3);
        assert_eq!(toy_rows(6), 8);
        assert_eq!(toy_rows(8), 9);
    }

    #[test]
    fn encode_closed_form() {
        let alpha = BigInt::from(200);
        let y = cs_encode(&[bv("1100"), bv("0101")], &alpha).unwrap();
        assert_eq!(l1(&y), BigInt::from(2 * (200 + 40000)));
        let single = cs_encode(&[bv("0110")], &BigInt::from(2)).unwrap();
        assert_eq!(single, vec![0, 2, 2, 0].into_iter().map(BigInt::from).collect::<Vec<_>>());
    }

    #[test]
    fn exact_oracle_single_block() {
        let cb = build_codebook(8, 2, 8, 3, 100).unwrap();
        let a = SensingMatrix::random(24, 8, &mut SplitMix64::new(5));
        let alpha = default_alpha(1);
        let x = cb.vectors()[5].clone();
        let y = cs_encode(std::slice::from_ref(&x), &alpha).unwrap();
        let oracle = ExactScanOracle::new(&a, &cb, alpha.clone(), 1);
        let trace = cs_decode(&a.apply(&y), &a, &oracle, &cb, &alpha, 1).unwrap();
        assert_eq!(trace.blocks, vec![x]);
        assert_eq!(trace.steps[0].near, BigInt::zero());
    }

    #[test]
    fn majority_vote() {
        let votes = [bv("10"), bv("01"), bv("01")];
        let out = majority_decode(3, |r| Ok(vec![votes[r].clone()])).unwrap();
        assert_eq!(out, vec![bv("01")]);
        assert_eq!(majority_runs(16), 5);
    }

    #[test]
    fn welfare_round_trip() {
        let family = intersecting_family(8, 2, 2, 4, 1000).unwrap();
        let inst = mdisj_to_welfare(vec![vec![0], vec![1]], family, false).unwrap();
        let back = WelfareInstance::from_json(&inst.to_json()).unwrap();
        assert_eq!(back, inst);
        assert_eq!(inst.optimal_welfare().unwrap().0, 1);
    }
}
