//! Arithmetic in GF(2^w), polynomial k-wise independent hash families,
//! sign hashes and biased random bit vectors.
//!
//! Field elements are `u32` values below `2^w`; bit `i` is the coefficient
//! of `x^i`. A universe element `j` (1-based) is encoded as the field
//! element `j - 1`.

use std::fmt;
use std::str::FromStr;

use crate::bits::BitVector;
use crate::error::{input, resource, Error, Result};
use crate::rng::SplitMix64;

/// Largest value of `2^(k*w)` that [`verify_kwise`] will enumerate.
pub const KWISE_BUDGET: u64 = 1 << 24;

const MODULI: [(u32, u32); 15] = [
    (2, 0b111),
    (3, 0b1011),
    (4, 0b1_0011),
    (5, 0b10_0101),
    (6, 0b100_0011),
    (7, 0b1000_0011),
    (8, 0x11B),
    (9, 0x211),
    (10, 0x409),
    (11, 0x805),
    (12, 0x1053),
    (13, 0x201B),
    (14, 0x4443),
    (15, 0x8003),
    (16, 0x1_100B),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    width: u32,
    modulus: u32,
}

impl FieldSpec {
    /// Field of width `w` using the built-in modulus, re-checked for
    /// irreducibility.
    pub fn new(width: u32) -> Result<Self> {
        let modulus = MODULI
            .iter()
            .find(|(w, _)| *w == width)
            .map(|(_, m)| *m)
            .ok_or_else(|| Error::Input(format!("field width {width} outside 2..=16")))?;
        Self::with_modulus(width, modulus)
    }

    pub fn with_modulus(width: u32, modulus: u32) -> Result<Self> {
        if !(2..=16).contains(&width) {
            return input(format!("field width {width} outside 2..=16"));
        }
        if modulus >> width != 1 {
            return input(format!("modulus {modulus:#b} does not have degree {width}"));
        }
        if !is_irreducible(modulus) {
            return input(format!("modulus {modulus:#b} is reducible"));
        }
        Ok(FieldSpec { width, modulus })
    }

    /// Smallest field (width at least 2) with one element per universe item.
    pub fn for_universe(n: u64) -> Result<Self> {
        let mut w = 2;
        while (1u64 << w) < n {
            w += 1;
        }
        Self::new(w)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn size(&self) -> u64 {
        1 << self.width
    }

    fn mask(&self) -> u32 {
        (1 << self.width) - 1
    }
}

fn degree(p: u64) -> u32 {
    63 - p.leading_zeros()
}

fn poly_rem(mut a: u64, b: u64) -> u64 {
    let db = degree(b);
    while a != 0 && degree(a) >= db {
        a ^= b << (degree(a) - db);
    }
    a
}

/// Trial division by every polynomial of degree 1 up to half the degree.
pub fn is_irreducible(modulus: u32) -> bool {
    let m = modulus as u64;
    if m < 4 {
        return m >= 2;
    }
    let d = degree(m);
    (2u64..1 << (d / 2 + 1)).all(|q| poly_rem(m, q) != 0)
}

/// Carry-less product of `a` and `b` reduced modulo the field polynomial.
pub fn gf_mul(a: u32, b: u32, spec: FieldSpec) -> u32 {
    let (mut a, mut b) = ((a & spec.mask()) as u64, (b & spec.mask()) as u64);
    let mut acc = 0u64;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
    }
    poly_rem(acc, spec.modulus as u64) as u32
}

/// Polynomial of degree at most `k - 1` over GF(2^w); `coeffs[i]` multiplies `x^i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct KWisePoly {
    spec: FieldSpec,
    coeffs: Vec<u32>,
}

impl KWisePoly {
    pub fn new(spec: FieldSpec, coeffs: Vec<u32>) -> Result<Self> {
        if !(1..=4).contains(&coeffs.len()) {
            return input(format!("independence order {} outside 1..=4", coeffs.len()));
        }
        if let Some(c) = coeffs.iter().find(|&&c| c > spec.mask()) {
            return input(format!("coefficient {c:#x} outside GF(2^{})", spec.width));
        }
        Ok(KWisePoly { spec, coeffs })
    }

    pub fn random(spec: FieldSpec, k: usize, rng: &mut SplitMix64) -> Result<Self> {
        let coeffs = (0..k).map(|_| rng.below(spec.size()) as u32).collect();
        Self::new(spec, coeffs)
    }

    /// The `index`-th member of the full family, reading `index` as `k`
    /// base-`2^w` digits with the constant term least significant.
    pub fn nth(spec: FieldSpec, k: usize, mut index: u64) -> Self {
        let coeffs = (0..k)
            .map(|_| {
                let c = (index & spec.mask() as u64) as u32;
                index >>= spec.width;
                c
            })
            .collect();
        KWisePoly { spec, coeffs }
    }

    /// Every polynomial of the family, `2^(k*w)` of them.
    pub fn family(spec: FieldSpec, k: usize) -> impl Iterator<Item = KWisePoly> {
        let total = 1u64 << (k as u32 * spec.width);
        (0..total).map(move |i| Self::nth(spec, k, i))
    }

    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    pub fn k(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn eval(&self, x: u32) -> Result<u32> {
        if x > self.spec.mask() {
            return input(format!("point {x} outside GF(2^{})", self.spec.width));
        }
        Ok(self.eval_unchecked(x))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, x: u32) -> u32 {
        self.coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| gf_mul(acc, x, self.spec) ^ c)
    }
}

impl fmt::Display for KWisePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let hex: Vec<String> = self.coeffs.iter().map(|c| format!("{c:x}")).collect();
        write!(f, "w={} k={} coeffs={}", self.spec.width, self.k(), hex.join(","))
    }
}

fn field<'a>(token: Option<&'a str>, key: &str) -> Result<&'a str> {
    token
        .and_then(|t| t.strip_prefix(key))
        .and_then(|t| t.strip_prefix('='))
        .ok_or_else(|| Error::Input(format!("expected `{key}=` field")))
}

impl FromStr for KWisePoly {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split_whitespace();
        let w: u32 = field(parts.next(), "w")?
            .parse()
            .map_err(|_| Error::Input("bad width".into()))?;
        let k: usize = field(parts.next(), "k")?
            .parse()
            .map_err(|_| Error::Input("bad order".into()))?;
        let coeffs = field(parts.next(), "coeffs")?
            .split(',')
            .map(|c| u32::from_str_radix(c, 16).map_err(|_| Error::Input(format!("bad hex {c:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if coeffs.len() != k {
            return input(format!("expected {k} coefficients, found {}", coeffs.len()));
        }
        KWisePoly::new(FieldSpec::new(w)?, coeffs)
    }
}

/// `+1` when the low bit of the polynomial value is 0, `-1` otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignHash {
    poly: KWisePoly,
}

impl SignHash {
    pub fn new(poly: KWisePoly) -> Self {
        SignHash { poly }
    }

    pub fn poly(&self) -> &KWisePoly {
        &self.poly
    }

    /// Sign of field element `x`.
    pub fn sign(&self, x: u32) -> Result<i64> {
        Ok(if self.poly.eval(x)? & 1 == 0 { 1 } else { -1 })
    }

    /// Sign of universe element `j` (1-based).
    pub fn sign_item(&self, j: u64) -> Result<i64> {
        if j == 0 || j > self.poly.spec.size() {
            return input(format!("item {j} outside the universe of GF(2^{})", self.poly.spec.width));
        }
        self.sign((j - 1) as u32)
    }
}

/// Checks that the value tuple at `points` is uniform over the whole
/// degree-`(k-1)` family by exhaustive enumeration. Passing more points
/// than `k` is allowed and tests independence beyond the family's order.
pub fn verify_kwise(spec: FieldSpec, k: usize, points: &[u32]) -> Result<bool> {
    if points.len() > 4 || k > 4 || k == 0 {
        return input(format!("{} points at order {k}", points.len()));
    }
    let mut sorted = points.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != points.len() || points.iter().any(|&p| p > spec.mask()) {
        return input("points must be distinct field elements");
    }
    let family_bits = k as u32 * spec.width;
    if family_bits > 24 {
        return resource(format!("2^{family_bits} polynomials exceeds the enumeration budget"));
    }
    let tuple_bits = points.len() as u32 * spec.width;
    let mut counts = vec![0u64; 1 << tuple_bits];
    for poly in KWisePoly::family(spec, k) {
        let key = points.iter().fold(0usize, |acc, &p| {
            (acc << spec.width) | poly.eval_unchecked(p) as usize
        });
        counts[key] += 1;
    }
    let expected = (1u64 << family_bits) >> tuple_bits;
    Ok(counts.iter().all(|&c| c == expected))
}

/// Seeded vector with each coordinate independently 1 with probability `numer/denom`.
///
/// Sampling is two-stage per coordinate: a coordinate is *relevant* with
/// probability `2p` (when `p <= 1/2`), and a relevant coordinate takes a
/// uniform bit. For `p > 1/2` a single Bernoulli(p) draw is used instead.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BiasedBits {
    pub d: usize,
    pub numer: u64,
    pub denom: u64,
    pub seed: u64,
}

impl BiasedBits {
    pub fn new(d: usize, numer: u64, denom: u64, seed: u64) -> Result<Self> {
        if denom == 0 || numer == 0 || numer > denom {
            return input(format!("probability {numer}/{denom} outside (0, 1]"));
        }
        Ok(BiasedBits { d, numer, denom, seed })
    }

    pub fn vector(&self) -> BitVector {
        let mut rng = SplitMix64::new(self.seed);
        let mut v = BitVector::zeros(self.d);
        for i in 0..self.d {
            let bit = if 2 * self.numer <= self.denom {
                rng.bernoulli(2 * self.numer, self.denom) && rng.next_bool()
            } else {
                rng.bernoulli(self.numer, self.denom)
            };
            if bit {
                v.set(i, true);
            }
        }
        v
    }
}

impl fmt::Display for BiasedBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d={} p={}/{} seed={}", self.d, self.numer, self.denom, self.seed)
    }
}

impl FromStr for BiasedBits {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |what: &str| Error::Input(format!("bad {what}"));
        let mut parts = s.split_whitespace();
        let d = field(parts.next(), "d")?.parse().map_err(|_| bad("dimension"))?;
        let (n, q) = field(parts.next(), "p")?
            .split_once('/')
            .ok_or_else(|| bad("probability"))?;
        let numer = n.parse().map_err(|_| bad("numerator"))?;
        let denom = q.parse().map_err(|_| bad("denominator"))?;
        let seed = field(parts.next(), "seed")?.parse().map_err(|_| bad("seed"))?;
        BiasedBits::new(d, numer, denom, seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf8() -> FieldSpec {
        FieldSpec::new(3).unwrap()
    }

    /// Schoolbook polynomial product then long division, written
    /// independently of `gf_mul`.
    fn slow_mul(a: u32, b: u32, modulus: u32, w: u32) -> u32 {
        let mut prod = [0u8; 32];
        for i in 0..w {
            for j in 0..w {
                prod[(i + j) as usize] ^= (((a >> i) & 1) & ((b >> j) & 1)) as u8;
            }
        }
        for deg in (w as usize..32).rev() {
            if prod[deg] == 1 {
                for t in 0..=w as usize {
                    prod[deg - w as usize + t] ^= ((modulus >> t) & 1) as u8;
                }
            }
        }
        (0..w).map(|i| (prod[i as usize] as u32) << i).sum()
    }

    #[test]
    fn table_moduli_are_irreducible() {
        for w in 2..=16 {
            FieldSpec::new(w).unwrap();
        }
        assert!(!is_irreducible(0b101)); // (x+1)^2
        assert!(FieldSpec::with_modulus(4, 0b10101).is_err());
    }

    #[test]
    fn mul_matches_long_division() {
        let f = gf8();
        assert_eq!(gf_mul(0b010, 0b110, f), 0b111);
        for w in 2..=6 {
            let s = FieldSpec::new(w).unwrap();
            for a in 0..1 << w {
                for b in 0..1 << w {
                    assert_eq!(gf_mul(a, b, s), slow_mul(a, b, s.modulus(), w));
                }
            }
        }
    }

    #[test]
    fn field_axioms_on_gf8() {
        let f = gf8();
        for a in 0..8 {
            assert_eq!(gf_mul(a, 1, f), a);
            assert_eq!(gf_mul(a, 0, f), 0);
            for b in 0..8 {
                assert_eq!(gf_mul(a, b, f), gf_mul(b, a, f));
                for c in 0..8 {
                    assert_eq!(gf_mul(gf_mul(a, b, f), c, f), gf_mul(a, gf_mul(b, c, f), f));
                    assert_eq!(gf_mul(a, b ^ c, f), gf_mul(a, b, f) ^ gf_mul(a, c, f));
                }
            }
        }
    }

    #[test]
    fn sign_examples() {
        let f = gf8();
        let zero = SignHash::new(KWisePoly::new(f, vec![0, 0]).unwrap());
        assert!((0..8).all(|x| zero.sign(x).unwrap() == 1));
        let ident = SignHash::new(KWisePoly::new(f, vec![0, 1]).unwrap());
        assert_eq!(ident.sign(0b010).unwrap(), 1);
        assert_eq!(ident.sign(0b011).unwrap(), -1);
        assert!(ident.sign(8).is_err());
    }

    #[test]
    fn sign_patterns_uniform_over_cubic_family() {
        let f = FieldSpec::new(2).unwrap();
        let mut counts = [0u32; 16];
        for poly in KWisePoly::family(f, 4) {
            let h = SignHash::new(poly);
            let key = (0..4).fold(0, |acc, x| (acc << 1) | (h.sign(x).unwrap() < 0) as usize);
            counts[key] += 1;
        }
        assert!(counts.iter().all(|&c| c == 16));
    }

    #[test]
    fn kwise_checks() {
        let f = FieldSpec::new(2).unwrap();
        assert!(verify_kwise(f, 4, &[0, 1, 2, 3]).unwrap());
        assert!(!verify_kwise(f, 2, &[0, 1, 2, 3]).unwrap());
        assert!(verify_kwise(f, 2, &[3]).unwrap());
        assert!(matches!(
            verify_kwise(FieldSpec::new(8).unwrap(), 4, &[0]),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn poly_text_round_trip() {
        let p = KWisePoly::new(FieldSpec::new(8).unwrap(), vec![0x1b, 0, 0xff, 7]).unwrap();
        assert_eq!(p.to_string(), "w=8 k=4 coeffs=1b,0,ff,7");
        assert_eq!(p.to_string().parse::<KWisePoly>().unwrap(), p);
    }

    #[test]
    fn biased_vectors() {
        let spec = BiasedBits::new(4, 1, 2, 42).unwrap();
        assert_eq!(spec.vector(), spec.vector());
        assert_eq!(BiasedBits::new(3, 1, 1, 5).unwrap().vector().to_string(), "111");
        assert_eq!(spec.to_string().parse::<BiasedBits>().unwrap(), spec);
        assert!(BiasedBits::new(3, 0, 2, 0).is_err());
    }
}
