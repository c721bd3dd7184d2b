//! Approximate nearest neighbor in the Hamming cube from biased random
//! inner products, and the embeddings used by the lower-bound reductions.
//!
//! A [`DecisionTable`] answers "is some point within `L`?" with a single
//! bucket lookup. Materializing every bucket costs `n^Θ(1/eps^2)` space,
//! which is only affordable for short hashes; larger tables keep the
//! stored hashes and resolve a bucket on access, which returns exactly what
//! the materialized bucket would hold.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::OnceLock;

use num_traits::{ToPrimitive, Zero};

use crate::bits::BitVector;
use crate::error::{input, resource, Result};
use crate::protocols::{gap_threshold, InnerProductHash, SampleRule, Tape};
use crate::rng::{derive_seed, SplitMix64};
use crate::scalar::int;
use crate::Rational;

/// Longest hash for which buckets may be materialized.
pub const MAX_KEY_BITS: usize = 30;
/// Largest bucket radius enumerated at build time.
pub const MAX_RADIUS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BucketStore {
    /// Enumerate every key within the radius at build time; fails with a
    /// resource error beyond [`MAX_KEY_BITS`] or [`MAX_RADIUS`].
    Materialized,
    /// Resolve a bucket on access from the stored point hashes.
    Implicit,
    /// Materialize when within the caps, otherwise resolve on access.
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnParams {
    pub eps: f64,
    pub delta: f64,
    pub rule: SampleRule,
    pub store: BucketStore,
}

impl AnnParams {
    pub fn new(eps: f64, delta: f64) -> Self {
        AnnParams { eps, delta, rule: SampleRule::Hoeffding, store: BucketStore::Auto }
    }
}

#[derive(Debug)]
enum Buckets {
    Map(HashMap<BitVector, usize>),
    Implicit(Vec<BitVector>),
}

#[derive(Debug)]
pub struct DecisionTable {
    scale: u64,
    hash: InnerProductHash,
    threshold: Rational,
    radius: usize,
    buckets: Buckets,
    lookups: AtomicUsize,
}

fn for_each_within(key: &BitVector, radius: usize, start: usize, f: &mut dyn FnMut(&BitVector)) {
    f(key);
    if radius == 0 {
        return;
    }
    let mut flipped = key.clone();
    for i in start..key.len() {
        flipped.flip(i);
        for_each_within(&flipped, radius - 1, i + 1, f);
        flipped.flip(i);
    }
}

fn ball_size(s: usize, r: usize) -> u128 {
    let mut term = 1u128;
    let mut total = 1u128;
    for i in 1..=r.min(s) {
        term = term * (s - i + 1) as u128 / i as u128;
        total += term;
    }
    total
}

impl DecisionTable {
    /// Table for scale `L` with a hash of length `samples`, drawn from `seed`.
    pub fn with_samples(points: &[BitVector], scale: u64, eps: f64, samples: usize, store: BucketStore, seed: u64) -> Result<Self> {
        let d = points.first().map_or(0, BitVector::len);
        if points.iter().any(|p| p.len() != d) {
            return input("points differ in dimension");
        }
        if scale == 0 || (d > 0 && scale as usize > d) {
            return input(format!("scale {scale} outside 1..={d}"));
        }
        let hash = InnerProductHash::draw(d, scale, samples, &mut Tape::seeded(seed))?;
        let threshold = gap_threshold(scale, eps, samples);
        let radius = threshold.floor().to_integer().to_usize().unwrap_or(usize::MAX);
        let hashed: Vec<BitVector> = points.iter().map(|p| hash.apply(p)).collect();
        let feasible = samples <= MAX_KEY_BITS && radius <= MAX_RADIUS;
        let buckets = match (store, feasible) {
            (BucketStore::Materialized, false) => {
                return resource(format!(
                    "materializing {samples}-bit keys at radius {radius} exceeds the caps \
                     ({MAX_KEY_BITS} bits, radius {MAX_RADIUS}); raise eps or delta"
                ))
            }
            (BucketStore::Materialized, true) | (BucketStore::Auto, true) => {
                let mut map = HashMap::new();
                for (id, h) in hashed.iter().enumerate() {
                    for_each_within(h, radius, 0, &mut |key| {
                        map.entry(key.clone()).or_insert(id);
                    });
                }
                Buckets::Map(map)
            }
            _ => Buckets::Implicit(hashed),
        };
        Ok(DecisionTable { scale, hash, threshold, radius, buckets, lookups: AtomicUsize::new(0) })
    }

    /// Hash length `s` from the sample rule at failure `delta / n`, i.e. a
    /// `ln(2n/delta)` dependence.
    pub fn build(points: &[BitVector], scale: u64, params: &AnnParams, seed: u64) -> Result<Self> {
        let n = points.len().max(1) as f64;
        let samples = params.rule.samples(params.eps, params.delta / n);
        Self::with_samples(points, scale, params.eps, samples, params.store, seed)
    }

    pub fn scale(&self) -> u64 {
        self.scale
    }

    pub fn samples(&self) -> usize {
        self.hash.len()
    }

    pub fn threshold(&self) -> &Rational {
        &self.threshold
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn is_materialized(&self) -> bool {
        matches!(self.buckets, Buckets::Map(_))
    }

    /// Number of populated buckets when materialized, otherwise the number
    /// that would be populated (an upper bound computed from ball sizes).
    pub fn bucket_count(&self) -> u128 {
        match &self.buckets {
            Buckets::Map(m) => m.len() as u128,
            Buckets::Implicit(h) => h.len() as u128 * ball_size(self.samples(), self.radius),
        }
    }

    /// Bucket lookups served so far.
    pub fn lookups(&self) -> usize {
        self.lookups.load(Ordering::Relaxed)
    }

    /// Reads the single bucket `h_R(q)`.
    pub fn query(&self, q: &BitVector) -> Option<usize> {
        let key = self.hash.apply(q);
        self.lookups.fetch_add(1, Ordering::Relaxed);
        match &self.buckets {
            Buckets::Map(m) => m.get(&key).copied(),
            Buckets::Implicit(hashed) => hashed.iter().position(|h| h.hamming(&key) <= self.radius),
        }
    }
}

/// Result of a full nearest-neighbor query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnnAnswer {
    pub point: usize,
    /// Table lookups including the membership probe.
    pub probes: usize,
    /// Smallest scale at which a table answered, if any.
    pub scale: Option<u64>,
}

/// Binary search over scales, each probe served by one uniformly chosen
/// replica. Tables are built on first use.
#[derive(Debug)]
pub struct AnnIndex {
    points: Vec<BitVector>,
    params: AnnParams,
    seed: u64,
    replicas: usize,
    max_scale: u64,
    samples: usize,
    membership: HashMap<BitVector, usize>,
    tables: Vec<OnceLock<DecisionTable>>,
}

impl AnnIndex {
    /// `d` replicas per scale; hash length uses failure
    /// `delta / (n (ceil(log2 d) + 1))` so every probe of a query is covered.
    pub fn new(points: Vec<BitVector>, params: AnnParams, seed: u64) -> Result<Self> {
        let d = points.first().map_or(0, BitVector::len);
        let replicas = d.max(1);
        Self::with_replicas(points, params, seed, replicas)
    }

    pub fn with_replicas(points: Vec<BitVector>, params: AnnParams, seed: u64, replicas: usize) -> Result<Self> {
        if points.is_empty() {
            return input("index needs at least one point");
        }
        let d = points[0].len();
        if d == 0 || points.iter().any(|p| p.len() != d) {
            return input("points must share a positive dimension");
        }
        if replicas == 0 {
            return input("need at least one replica");
        }
        let max_scale = ((d as f64 / (1.0 + params.eps)).ceil() as u64).saturating_sub(1);
        let probes = ceil_log2(d) + 1;
        let delta = params.delta / (points.len() as f64 * probes as f64);
        let samples = params.rule.samples(params.eps, delta);
        let mut membership = HashMap::new();
        for (id, p) in points.iter().enumerate() {
            membership.entry(p.clone()).or_insert(id);
        }
        let tables = (0..max_scale as usize * replicas).map(|_| OnceLock::new()).collect();
        Ok(AnnIndex { points, params, seed, replicas, max_scale, samples, membership, tables })
    }

    pub fn points(&self) -> &[BitVector] {
        &self.points
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn max_scale(&self) -> u64 {
        self.max_scale
    }

    /// Decision table for `scale` and `replica`, building it if needed.
    pub fn table(&self, scale: u64, replica: usize) -> Result<&DecisionTable> {
        let slot = (scale as usize - 1) * self.replicas + replica;
        if let Some(t) = self.tables[slot].get() {
            return Ok(t);
        }
        let built = DecisionTable::with_samples(
            &self.points,
            scale,
            self.params.eps,
            self.samples,
            self.params.store,
            derive_seed(self.seed, slot as u64),
        )?;
        Ok(self.tables[slot].get_or_init(|| built))
    }

    /// Exact membership probe, then binary search over `L` in
    /// `1..=ceil(d/(1+eps)) - 1`. Falls back to point 0 when no table answers,
    /// which is within factor `1+eps` because every distance is at most `d`.
    pub fn query(&self, q: &BitVector, query_seed: u64) -> Result<AnnAnswer> {
        if q.len() != self.points[0].len() {
            return input("query dimension mismatch");
        }
        let mut probes = 1;
        if let Some(&id) = self.membership.get(q) {
            return Ok(AnnAnswer { point: id, probes, scale: Some(0) });
        }
        let mut rng = SplitMix64::new(query_seed);
        let (mut lo, mut hi) = (1u64, self.max_scale);
        let mut best: Option<(usize, u64)> = None;
        while lo <= hi {
            let mid = lo + (hi - lo) / 2;
            let replica = rng.below_usize(self.replicas);
            probes += 1;
            match self.table(mid, replica)?.query(q) {
                Some(p) => {
                    best = Some((p, mid));
                    hi = mid - 1;
                }
                None => lo = mid + 1,
            }
        }
        Ok(match best {
            Some((point, scale)) => AnnAnswer { point, probes, scale: Some(scale) },
            None => AnnAnswer { point: 0, probes, scale: None },
        })
    }
}

pub fn ceil_log2(x: usize) -> usize {
    crate::protocols::name_width(x)
}

/// Unary code: coordinate value `v` becomes `M v` ones followed by
/// `M (V - v)` zeros, so Hamming distance is `M` times the l1 distance.
pub fn l1_to_hamming(points: &[Vec<i64>], scale: usize, max_value: i64) -> Result<Vec<BitVector>> {
    if max_value < 0 {
        return input("maximum coordinate must be nonnegative");
    }
    let block = scale * max_value as usize;
    points
        .iter()
        .map(|p| {
            let mut v = BitVector::zeros(p.len() * block);
            for (c, &x) in p.iter().enumerate() {
                if x < 0 || x > max_value {
                    return input(format!("coordinate {x} outside 0..={max_value}"));
                }
                for t in 0..scale * x as usize {
                    v.set(c * block + t, true);
                }
            }
            Ok(v)
        })
        .collect()
}

/// Query `q = eps * chi_S` against the basis vectors `e_i`, `i` in `T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct L2Gadget {
    pub query: Vec<Rational>,
    pub points: Vec<Vec<Rational>>,
    /// Squared distance from the query to each point, in the order of `T`.
    pub squared_distances: Vec<Rational>,
    pub intersection: usize,
    /// `|S ∩ T| <= 1`.
    pub promise_holds: bool,
}

impl L2Gadget {
    pub fn min_squared_distance(&self) -> Option<&Rational> {
        self.squared_distances.iter().min()
    }
}

/// Builds the gadget over `{1..n}`; `S` must have `ceil(1/eps^2)` elements.
pub fn epsdisj_l2_gadget(s: &[usize], t: &[usize], n: usize, eps: &Rational) -> Result<L2Gadget> {
    if *eps <= Rational::zero() {
        return input("eps must be positive");
    }
    let need = (int(1) / (eps * eps)).ceil().to_integer().to_usize().unwrap_or(usize::MAX);
    if s.len() != need {
        return input(format!("|S| = {} but ceil(1/eps^2) = {need}", s.len()));
    }
    if s.iter().chain(t).any(|&i| i == 0 || i > n) {
        return input(format!("set element outside 1..={n}"));
    }
    let mut query = vec![Rational::zero(); n];
    for &i in s {
        query[i - 1] = eps.clone();
    }
    let points: Vec<Vec<Rational>> = t
        .iter()
        .map(|&i| {
            let mut e = vec![Rational::zero(); n];
            e[i - 1] = int(1);
            e
        })
        .collect();
    let squared_distances = points
        .iter()
        .map(|p| p.iter().zip(&query).map(|(a, b)| (a - b) * (a - b)).sum())
        .collect();
    let intersection = t.iter().filter(|i| s.contains(i)).count();
    Ok(L2Gadget { query, points, squared_distances, intersection, promise_holds: intersection <= 1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    #[test]
    fn single_point_found_by_itself() {
        let p = BitVector::from_u64(0b1011_0110, 8);
        let table = DecisionTable::with_samples(std::slice::from_ref(&p), 2, 1.0, 12, BucketStore::Materialized, 3).unwrap();
        assert!(table.is_materialized());
        assert_eq!(table.query(&p), Some(0));
        assert_eq!(table.lookups(), 1);
    }

    #[test]
    fn materialized_and_implicit_agree() {
        let mut rng = SplitMix64::new(8);
        let pts: Vec<BitVector> = (0..6).map(|_| BitVector::from_u64(rng.next_u64(), 16)).collect();
        let a = DecisionTable::with_samples(&pts, 3, 1.0, 14, BucketStore::Materialized, 1).unwrap();
        let b = DecisionTable::with_samples(&pts, 3, 1.0, 14, BucketStore::Implicit, 1).unwrap();
        for _ in 0..200 {
            let q = BitVector::from_u64(rng.next_u64(), 16);
            assert_eq!(a.query(&q), b.query(&q));
        }
    }

    #[test]
    fn materialization_caps() {
        let p = BitVector::zeros(8);
        let err = DecisionTable::with_samples(&[p], 2, 1.0, 40, BucketStore::Materialized, 0);
        assert!(matches!(err, Err(crate::Error::Resource(_))));
    }

    #[test]
    fn membership_short_circuits() {
        let pts = vec![BitVector::zeros(16), BitVector::ones(16)];
        let idx = AnnIndex::new(pts, AnnParams::new(1.0, 0.1), 4).unwrap();
        let ans = idx.query(&BitVector::ones(16), 0).unwrap();
        assert_eq!((ans.point, ans.probes), (1, 1));
    }

    #[test]
    fn unary_embedding() {
        let codes = l1_to_hamming(&[vec![0], vec![2]], 1, 2).unwrap();
        assert_eq!(codes[0].to_string(), "00");
        assert_eq!(codes[1].to_string(), "11");
        assert!(l1_to_hamming(&[vec![-1]], 1, 2).is_err());
    }

    #[test]
    fn l2_gadget_distances() {
        let half = ratio(1, 2);
        let g = epsdisj_l2_gadget(&[1, 2, 3, 4], &[5, 6], 8, &half).unwrap();
        assert!(g.squared_distances.iter().all(|d| *d == int(2)));
        let g = epsdisj_l2_gadget(&[1, 2, 3, 4], &[4, 6], 8, &half).unwrap();
        assert_eq!(g.min_squared_distance(), Some(&int(1)));
        assert!(epsdisj_l2_gadget(&[1, 2], &[3], 8, &half).is_err());
    }
}
