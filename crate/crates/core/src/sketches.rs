//! Streaming sketches: AMS second moment, bottom-k distinct counting, exact
//! frequency tables, Morris counting and Misra-Gries heavy hitters.
//!
//! Sketches that take part in the streaming-to-protocol adapter implement
//! [`StreamingSketch`]; their byte encoding is the memory whose length the
//! adapter charges to Alice.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{input, Error, Result};
use crate::gf2hash::{FieldSpec, KWisePoly, SignHash};
use crate::rng::SplitMix64;
use crate::scalar::{big_int, ceil_int, int, Scalar};
use crate::Rational;

const TAG_F2: u8 = 0xF2;
const TAG_F0: u8 = 0xF0;
const TAG_EXACT: u8 = 0xFE;

/// Sequence of items from the universe `1..=universe`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stream {
    universe: u64,
    items: Vec<u64>,
}

impl Stream {
    pub fn new(universe: u64, items: Vec<u64>) -> Result<Self> {
        if let Some(bad) = items.iter().find(|&&j| j == 0 || j > universe) {
            return input(format!("item {bad} outside 1..={universe}"));
        }
        Ok(Stream { universe, items })
    }

    /// Items `i + 1` for every set coordinate `i`, in increasing order.
    pub fn from_indicator(v: &crate::BitVector) -> Self {
        Stream {
            universe: v.len() as u64,
            items: v.iter_ones().map(|i| i as u64 + 1).collect(),
        }
    }

    pub fn universe(&self) -> u64 {
        self.universe
    }

    pub fn items(&self) -> &[u64] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn concat(&self, other: &Stream) -> Result<Stream> {
        if self.universe != other.universe {
            return input("universe mismatch");
        }
        let mut items = self.items.clone();
        items.extend_from_slice(&other.items);
        Ok(Stream { universe: self.universe, items })
    }

    pub fn frequencies(&self) -> HashMap<u64, u64> {
        let mut f = HashMap::new();
        for &j in &self.items {
            *f.entry(j).or_insert(0) += 1;
        }
        f
    }

    /// `sum_j f_j^k` for `k >= 1`, or the number of distinct items for `k = 0`.
    pub fn moment(&self, k: u32) -> BigInt {
        let f = self.frequencies();
        if k == 0 {
            return BigInt::from(f.len());
        }
        f.values().map(|&c| BigInt::from(c).pow(k)).sum()
    }

    pub fn f_infinity(&self) -> u64 {
        self.frequencies().values().copied().max().unwrap_or(0)
    }
}

/// Common surface of sketches whose state can be handed from Alice to Bob.
pub trait StreamingSketch: Sized {
    fn update(&mut self, item: u64) -> Result<()>;
    fn serialize(&self) -> Vec<u8>;
    fn deserialize(bytes: &[u8]) -> Result<Self>;
    fn estimate(&self) -> Rational;

    fn feed(&mut self, items: &[u64]) -> Result<()> {
        items.iter().try_for_each(|&j| self.update(j))
    }
}

/// Median of the `groups` consecutive group means. For an even number of
/// groups the lower median is returned.
pub fn median_of_means<T: Scalar>(values: &[T], groups: usize) -> Result<T> {
    if values.is_empty() || groups == 0 {
        return input("median of means of nothing");
    }
    if !values.len().is_multiple_of(groups) {
        return input(format!("{} values do not split into {groups} groups", values.len()));
    }
    let per = values.len() / groups;
    let size = T::from_usize(per).expect("group size fits scalar");
    let mut means: Vec<T> = values
        .chunks(per)
        .map(|c| c.iter().cloned().fold(T::zero(), |a, b| a + b) / size.clone())
        .collect();
    means.sort_by(|a, b| a.partial_cmp(b).expect("comparable estimates"));
    Ok(means.swap_remove((groups - 1) / 2))
}

/// Copies needed for relative error `eps` with failure `delta` by Chebyshev.
pub fn f2_copies(eps: &Rational, delta: &Rational) -> usize {
    let t = int(2) / (eps * eps * delta);
    ceil_int(&t).to_usize().expect("copy count fits usize")
}

/// Group count `ceil(24 ln(1/delta))` for median-of-means amplification.
pub fn median_groups(delta: f64) -> usize {
    (24.0 * (1.0 / delta).ln()).ceil().max(1.0) as usize
}

/// AMS sketch: `t` counters `Z_i = sum h_i(j)` over 4-wise independent
/// sign hashes, estimate `median_of_means(Z_i^2)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct F2Sketch {
    universe: u64,
    groups: usize,
    hashes: Vec<SignHash>,
    counters: Vec<i64>,
}

impl F2Sketch {
    pub fn with_hashes(universe: u64, hashes: Vec<SignHash>, groups: usize) -> Result<Self> {
        if hashes.is_empty() || groups == 0 || !hashes.len().is_multiple_of(groups) {
            return input(format!("{} copies do not split into {groups} groups", hashes.len()));
        }
        if let Some(h) = hashes.iter().find(|h| h.poly().spec().size() < universe) {
            return input(format!("hash `{}` cannot address {universe} items", h.poly()));
        }
        let counters = vec![0; hashes.len()];
        Ok(F2Sketch { universe, groups, hashes, counters })
    }

    /// `copies` independent cubic sign hashes over the smallest field covering the universe.
    pub fn new(universe: u64, copies: usize, groups: usize, rng: &mut SplitMix64) -> Result<Self> {
        let spec = FieldSpec::for_universe(universe)?;
        let hashes = (0..copies)
            .map(|_| KWisePoly::random(spec, 4, rng).map(SignHash::new))
            .collect::<Result<Vec<_>>>()?;
        Self::with_hashes(universe, hashes, groups)
    }

    /// Plain average of `ceil(2 / (eps^2 delta))` copies.
    pub fn for_accuracy(universe: u64, eps: &Rational, delta: &Rational, rng: &mut SplitMix64) -> Result<Self> {
        Self::new(universe, f2_copies(eps, delta), 1, rng)
    }

    pub fn copies(&self) -> usize {
        self.hashes.len()
    }

    pub fn groups(&self) -> usize {
        self.groups
    }

    pub fn counters(&self) -> &[i64] {
        &self.counters
    }

    pub fn hashes(&self) -> &[SignHash] {
        &self.hashes
    }

    /// Per-copy basic estimates `X_i = Z_i^2`.
    pub fn basic_estimates(&self) -> Vec<Rational> {
        self.counters
            .iter()
            .map(|&z| big_int(BigInt::from(z) * BigInt::from(z)))
            .collect()
    }
}

fn take<'a>(bytes: &mut &'a [u8], n: usize) -> Result<&'a [u8]> {
    if bytes.len() < n {
        return Err(Error::Input("truncated sketch state".into()));
    }
    let (head, rest) = bytes.split_at(n);
    *bytes = rest;
    Ok(head)
}

fn take_u32(bytes: &mut &[u8]) -> Result<u32> {
    Ok(u32::from_le_bytes(take(bytes, 4)?.try_into().unwrap()))
}

fn take_u64(bytes: &mut &[u8]) -> Result<u64> {
    Ok(u64::from_le_bytes(take(bytes, 8)?.try_into().unwrap()))
}

fn expect_tag(bytes: &mut &[u8], tag: u8) -> Result<()> {
    let found = take(bytes, 1)?[0];
    if found != tag {
        return input(format!("sketch tag {found:#x}, expected {tag:#x}"));
    }
    Ok(())
}

fn hash_lines(bytes: &[u8]) -> Result<Vec<KWisePoly>> {
    std::str::from_utf8(bytes)
        .map_err(|_| Error::Input("hash descriptors are not UTF-8".into()))?
        .lines()
        .map(str::parse)
        .collect()
}

impl StreamingSketch for F2Sketch {
    fn update(&mut self, item: u64) -> Result<()> {
        if item == 0 || item > self.universe {
            return input(format!("item {item} outside 1..={}", self.universe));
        }
        for (z, h) in self.counters.iter_mut().zip(&self.hashes) {
            *z += h.sign_item(item)?;
        }
        Ok(())
    }

    /// Tag, copy count (u32), group count (u32), universe (u64), counters
    /// (i64 each), then one hash descriptor line per copy. All integers
    /// little-endian.
    fn serialize(&self) -> Vec<u8> {
        let mut out = vec![TAG_F2];
        out.extend((self.hashes.len() as u32).to_le_bytes());
        out.extend((self.groups as u32).to_le_bytes());
        out.extend(self.universe.to_le_bytes());
        for z in &self.counters {
            out.extend(z.to_le_bytes());
        }
        for h in &self.hashes {
            out.extend(format!("{}\n", h.poly()).bytes());
        }
        out
    }

    fn deserialize(mut bytes: &[u8]) -> Result<Self> {
        let b = &mut bytes;
        expect_tag(b, TAG_F2)?;
        let t = take_u32(b)? as usize;
        let groups = take_u32(b)? as usize;
        let universe = take_u64(b)?;
        let counters = (0..t)
            .map(|_| Ok(i64::from_le_bytes(take(b, 8)?.try_into().unwrap())))
            .collect::<Result<Vec<_>>>()?;
        let hashes: Vec<SignHash> = hash_lines(b)?.into_iter().map(SignHash::new).collect();
        if hashes.len() != t {
            return input(format!("{} hash lines for {t} counters", hashes.len()));
        }
        let mut sk = F2Sketch::with_hashes(universe, hashes, groups)?;
        sk.counters = counters;
        Ok(sk)
    }

    fn estimate(&self) -> Rational {
        median_of_means(&self.basic_estimates(), self.groups).expect("layout checked at construction")
    }
}

/// Retention count `ceil(12 / eps^2)` for the bottom-k distinct counter.
pub fn f0_retention(eps: &Rational) -> usize {
    ceil_int(&(int(12) / (eps * eps))).to_usize().expect("retention fits usize")
}

/// Bottom-k distinct counter. Items are ranked by `h(j - 1) + 1` with a
/// pairwise polynomial `h(x) = a x + b`, `a != 0`, which permutes the
/// padded universe of size `2^w`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct F0Sketch {
    universe: u64,
    retain: usize,
    hash: KWisePoly,
    bottom: Vec<u64>,
}

impl F0Sketch {
    pub fn with_hash(universe: u64, retain: usize, hash: KWisePoly) -> Result<Self> {
        if retain == 0 {
            return input("retention count must be positive");
        }
        if hash.k() != 2 || hash.coeffs()[1] == 0 {
            return input("distinct counting needs a degree-1 polynomial with nonzero slope");
        }
        if hash.spec().size() < universe {
            return input(format!("hash cannot address {universe} items"));
        }
        Ok(F0Sketch { universe, retain, hash, bottom: Vec::new() })
    }

    pub fn new(universe: u64, retain: usize, rng: &mut SplitMix64) -> Result<Self> {
        let spec = FieldSpec::for_universe(universe)?;
        let a = 1 + rng.below(spec.size() - 1) as u32;
        let b = rng.below(spec.size()) as u32;
        Self::with_hash(universe, retain, KWisePoly::new(spec, vec![b, a])?)
    }

    pub fn padded_universe(&self) -> u64 {
        self.hash.spec().size()
    }

    pub fn bottom(&self) -> &[u64] {
        &self.bottom
    }

    pub fn retain(&self) -> usize {
        self.retain
    }
}

impl StreamingSketch for F0Sketch {
    fn update(&mut self, item: u64) -> Result<()> {
        if item == 0 || item > self.universe {
            return input(format!("item {item} outside 1..={}", self.universe));
        }
        let rank = self.hash.eval((item - 1) as u32)? as u64 + 1;
        if let Err(pos) = self.bottom.binary_search(&rank) {
            if pos < self.retain {
                self.bottom.insert(pos, rank);
                self.bottom.truncate(self.retain);
            }
        }
        Ok(())
    }

    fn serialize(&self) -> Vec<u8> {
        let mut out = vec![TAG_F0];
        out.extend((self.retain as u32).to_le_bytes());
        out.extend((self.bottom.len() as u32).to_le_bytes());
        out.extend(self.universe.to_le_bytes());
        for r in &self.bottom {
            out.extend(r.to_le_bytes());
        }
        out.extend(format!("{}\n", self.hash).bytes());
        out
    }

    fn deserialize(mut bytes: &[u8]) -> Result<Self> {
        let b = &mut bytes;
        expect_tag(b, TAG_F0)?;
        let retain = take_u32(b)? as usize;
        let len = take_u32(b)? as usize;
        let universe = take_u64(b)?;
        let bottom = (0..len).map(|_| take_u64(b)).collect::<Result<Vec<_>>>()?;
        let mut hashes = hash_lines(b)?;
        if hashes.len() != 1 || len > retain {
            return input("malformed distinct-count state");
        }
        let mut sk = F0Sketch::with_hash(universe, retain, hashes.remove(0))?;
        sk.bottom = bottom;
        Ok(sk)
    }

    /// `k * 2^w / v_k` once `k` ranks are retained, otherwise the exact
    /// number of distinct ranks seen (0 on an empty stream).
    fn estimate(&self) -> Rational {
        if self.bottom.len() < self.retain {
            return int(self.bottom.len() as i64);
        }
        let kth = self.bottom[self.retain - 1];
        Rational::new(
            BigInt::from(self.retain) * BigInt::from(self.padded_universe()),
            BigInt::from(kth),
        )
    }
}

/// Exact frequency table; its estimate is `F_inf`. Memory is one u64 per
/// universe element, which is the linear-space baseline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactCounts {
    counts: Vec<u64>,
}

impl ExactCounts {
    pub fn new(universe: u64) -> Self {
        ExactCounts { counts: vec![0; universe as usize] }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn f_infinity(&self) -> u64 {
        self.counts.iter().copied().max().unwrap_or(0)
    }
}

impl StreamingSketch for ExactCounts {
    fn update(&mut self, item: u64) -> Result<()> {
        if item == 0 || item > self.counts.len() as u64 {
            return input(format!("item {item} outside 1..={}", self.counts.len()));
        }
        self.counts[item as usize - 1] += 1;
        Ok(())
    }

    fn serialize(&self) -> Vec<u8> {
        let mut out = vec![TAG_EXACT];
        out.extend((self.counts.len() as u64).to_le_bytes());
        for c in &self.counts {
            out.extend(c.to_le_bytes());
        }
        out
    }

    fn deserialize(mut bytes: &[u8]) -> Result<Self> {
        let b = &mut bytes;
        expect_tag(b, TAG_EXACT)?;
        let n = take_u64(b)? as usize;
        let counts = (0..n).map(|_| take_u64(b)).collect::<Result<Vec<_>>>()?;
        if !b.is_empty() {
            return input("trailing bytes after frequency table");
        }
        Ok(ExactCounts { counts })
    }

    fn estimate(&self) -> Rational {
        int(self.f_infinity() as i64)
    }
}

/// Morris approximate counter: register `c` grows with probability `2^-c`.
#[derive(Debug, Clone)]
pub struct MorrisCounter {
    c: u32,
    rng: SplitMix64,
}

impl MorrisCounter {
    pub const MAX_EXPONENT: u32 = 64;

    pub fn new(seed: u64) -> Self {
        MorrisCounter { c: 0, rng: SplitMix64::new(seed) }
    }

    pub fn exponent(&self) -> u32 {
        self.c
    }

    /// Increments when the low `c` bits of a fresh draw are all zero.
    pub fn touch(&mut self) {
        if self.c >= Self::MAX_EXPONENT {
            return;
        }
        let draw = self.rng.next_u64();
        if self.c == 0 || draw & ((1u64 << self.c) - 1) == 0 {
            self.c += 1;
        }
    }

    pub fn estimate(&self) -> Rational {
        big_int((BigInt::one() << self.c) - 1)
    }
}

/// Misra-Gries summary with `k - 1` counters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MisraGries {
    k: usize,
    slots: Vec<(u64, u64)>,
    seen: u64,
}

impl MisraGries {
    pub fn new(k: usize) -> Result<Self> {
        if k < 2 {
            return input("Misra-Gries needs k >= 2");
        }
        Ok(MisraGries { k, slots: Vec::with_capacity(k - 1), seen: 0 })
    }

    pub fn update(&mut self, item: u64) {
        self.seen += 1;
        if let Some(slot) = self.slots.iter_mut().find(|(e, _)| *e == item) {
            slot.1 += 1;
        } else if self.slots.len() < self.k - 1 {
            self.slots.push((item, 1));
        } else {
            for slot in self.slots.iter_mut() {
                slot.1 -= 1;
            }
            self.slots.retain(|&(_, c)| c > 0);
        }
    }

    /// Elements currently holding a slot.
    pub fn candidates(&self) -> BTreeSet<u64> {
        self.slots.iter().map(|&(e, _)| e).collect()
    }

    /// Lower estimate of the frequency of `item`.
    pub fn counter(&self, item: u64) -> u64 {
        self.slots.iter().find(|(e, _)| *e == item).map_or(0, |&(_, c)| c)
    }

    pub fn seen(&self) -> u64 {
        self.seen
    }
}

/// Sum of `values` divided by their count, or zero for an empty slice.
pub fn mean(values: &[Rational]) -> Rational {
    if values.is_empty() {
        return Rational::zero();
    }
    values.iter().sum::<Rational>() / int(values.len() as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    fn two_field() -> FieldSpec {
        FieldSpec::new(2).unwrap()
    }

    #[test]
    fn f2_small_stream_values() {
        let stream = [1u64, 1, 2];
        let plus = SignHash::new(KWisePoly::new(two_field(), vec![0, 0, 0, 0]).unwrap());
        let mut sk = F2Sketch::with_hashes(2, vec![plus], 1).unwrap();
        assert_eq!(sk.estimate(), int(0));
        sk.feed(&stream).unwrap();
        assert_eq!(sk.estimate(), int(9));
        for poly in KWisePoly::family(two_field(), 4).step_by(37) {
            let mut sk = F2Sketch::with_hashes(2, vec![SignHash::new(poly)], 1).unwrap();
            sk.feed(&stream).unwrap();
            let x = sk.estimate();
            assert!(x == int(1) || x == int(9));
        }
    }

    #[test]
    fn median_of_means_examples() {
        let v: Vec<Rational> = [1, 1, 1, 2, 2, 2, 9, 9, 9].iter().map(|&x| int(x)).collect();
        assert_eq!(median_of_means(&v, 3).unwrap(), int(2));
        let groups: Vec<Rational> = [4, 5, 100].iter().map(|&x| int(x)).collect();
        assert_eq!(median_of_means(&groups, 3).unwrap(), int(5));
        assert_eq!(median_of_means(&[7.5f64; 6], 2).unwrap(), 7.5);
        assert_eq!(median_of_means(&[1.0f64, 2.0, 3.0, 4.0], 4).unwrap(), 2.0);
        assert!(median_of_means::<f64>(&[], 1).is_err());
    }

    #[test]
    fn copy_count() {
        assert_eq!(f2_copies(&ratio(1, 2), &ratio(1, 5)), 40);
        assert_eq!(f0_retention(&ratio(1, 2)), 48);
        assert_eq!(median_groups(0.01), 111);
    }

    #[test]
    fn serialized_size_contract() {
        let mut rng = SplitMix64::new(3);
        let sk = F2Sketch::new(16, 40, 1, &mut rng).unwrap();
        let bytes = sk.serialize();
        // 17 header bytes, 40 counters, 40 lines of "w=4 k=4 coeffs=a,b,c,d\n"
        // whose hex digits are single characters.
        assert_eq!(bytes.len(), 17 + 40 * 8 + 40 * 23);
        assert_eq!(F2Sketch::deserialize(&bytes).unwrap(), sk);
        assert!(F2Sketch::deserialize(&bytes[..20]).is_err());
        assert!(ExactCounts::deserialize(&bytes).is_err());
    }

    #[test]
    fn f0_duplicates_and_exact_mode() {
        let mut rng = SplitMix64::new(11);
        let mut sk = F0Sketch::new(8, 4, &mut rng).unwrap();
        assert_eq!(sk.estimate(), int(0));
        sk.feed(&[3, 3, 3, 3]).unwrap();
        assert_eq!(sk.estimate(), int(1));
        sk.feed(&[1, 5, 3]).unwrap();
        assert_eq!(sk.estimate(), int(3));
        let copy = F0Sketch::deserialize(&sk.serialize()).unwrap();
        assert_eq!(copy, sk);
    }

    #[test]
    fn morris_starts_at_zero() {
        let mut m = MorrisCounter::new(1);
        assert_eq!(m.estimate(), int(0));
        m.touch();
        assert_eq!(m.estimate(), int(1));
    }

    #[test]
    fn misra_gries_majority() {
        let mut mg = MisraGries::new(2).unwrap();
        for j in [1, 2, 1, 3, 1] {
            mg.update(j);
        }
        assert_eq!(mg.candidates(), BTreeSet::from([1]));
    }
}
