//! Two-party sampling of a near-uniform element from the symmetric
//! difference of two sets, with explicit communication accounting.
//!
//! Alice expands a short seed into a sequence over the universe, both
//! parties turn it into a permutation (first-appearance order, then the
//! unused values by id), permute their characteristic vectors, and locate
//! the least differing index with a fingerprint-based subprotocol. The
//! permuted index maps back to the sampled element.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::token::TokenSet;

/// Parameter block tying the sequence length and generator error to the
/// statistical-distance budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingParams {
    pub k: usize,
    pub eps: f64,
    /// Sequence length: ceil(k * log2(3k / eps)).
    pub d: usize,
    /// Generator error: eps / (3 k d).
    pub alpha: f64,
    /// Error budget handed to the index subprotocol: eps / 3.
    pub subprotocol_error: f64,
}

impl SamplingParams {
    pub fn new(k: usize, eps: f64) -> Self {
        assert!(k >= 1, "universe must be non-empty");
        assert!(eps > 0.0 && eps < 1.0, "eps must be in (0,1)");
        let d = (k as f64 * (3.0 * k as f64 / eps).log2()).ceil() as usize;
        let alpha = eps / (3.0 * k as f64 * d as f64);
        SamplingParams {
            k,
            eps,
            d,
            alpha,
            subprotocol_error: eps / 3.0,
        }
    }
}

/// A length-`d` sequence of values in `[0, k)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceSample {
    pub entries: Vec<usize>,
}

/// How the shared sequence is produced and what its seed costs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceGenerator {
    /// Ideal generator; the transcript charges the raw sequence,
    /// d * ceil(log2 k) bits.
    TrueRandom,
    /// Keyed expansion of a `seed_bits`-bit seed; the transcript charges
    /// exactly the seed.
    KeyedPrf { seed_bits: usize },
}

impl SequenceGenerator {
    /// The default keyed-prf seed length for the given parameters:
    /// ceil(log2(k d / alpha)) * 4 bits.
    pub fn default_prf(params: &SamplingParams) -> Self {
        let bits = (params.k as f64 * params.d as f64 / params.alpha)
            .log2()
            .ceil() as usize
            * 4;
        SequenceGenerator::KeyedPrf { seed_bits: bits }
    }
}

fn ceil_log2(k: usize) -> usize {
    k.next_power_of_two().trailing_zeros() as usize
}

/// Bijection on `[0, k)` built from a sequence sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    pub forward: Vec<usize>,
}

impl Permutation {
    pub fn apply(&self, i: usize) -> usize {
        self.forward[i]
    }

    pub fn is_bijection(&self) -> bool {
        let k = self.forward.len();
        let mut seen = vec![false; k];
        for &v in &self.forward {
            if v >= k || seen[v] {
                return false;
            }
            seen[v] = true;
        }
        true
    }
}

/// Lists the distinct values of `x` in first-appearance order, then fills
/// with the values that never appear, in increasing id order.
pub fn permutation_from_sequence(x: &SequenceSample, k: usize) -> Permutation {
    let mut forward = Vec::with_capacity(k);
    let mut used = vec![false; k];
    for &e in &x.entries {
        assert!(e < k, "sequence entry {e} out of range {k}");
        if !used[e] {
            used[e] = true;
            forward.push(e);
        }
    }
    for v in 0..k {
        if !used[v] {
            forward.push(v);
        }
    }
    Permutation { forward }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    AliceToBob,
    BobToAlice,
}

/// Bit-level accounting of a protocol run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Transcript {
    pub bits_alice_to_bob: usize,
    pub bits_bob_to_alice: usize,
    pub messages: Vec<(Direction, usize)>,
}

impl Transcript {
    pub fn new() -> Self {
        Transcript::default()
    }

    pub fn send(&mut self, dir: Direction, bits: usize) {
        match dir {
            Direction::AliceToBob => self.bits_alice_to_bob += bits,
            Direction::BobToAlice => self.bits_bob_to_alice += bits,
        }
        self.messages.push((dir, bits));
    }

    pub fn total_bits(&self) -> usize {
        self.bits_alice_to_bob + self.bits_bob_to_alice
    }
}

const FINGERPRINT_PARITIES: usize = 7;

/// Parities of one shared random subset of the first `prefix` bits of each
/// string. The mask comes from the shared stream, so both parties see the
/// same subset.
fn parities(x: &TokenSet, y: &TokenSet, prefix: usize, shared: &mut ChaCha8Rng) -> (bool, bool) {
    let blocks = prefix.div_ceil(64);
    let mut px = false;
    let mut py = false;
    for b in 0..blocks {
        let mut mask: u64 = shared.random();
        let covered = prefix - b * 64;
        if covered < 64 {
            mask &= (1u64 << covered) - 1;
        }
        px ^= ((mask & x.blocks()[b]).count_ones() & 1) == 1;
        py ^= ((mask & y.blocks()[b]).count_ones() & 1) == 1;
    }
    (px, py)
}

/// One equality test over equal-length prefixes: equal inputs always agree;
/// unequal inputs collide with probability 2^-7 < 1/100. Costs 7 bits one
/// way plus a 1-bit reply.
pub fn fingerprint_equal(
    x: &TokenSet,
    y: &TokenSet,
    prefix: usize,
    shared: &mut ChaCha8Rng,
    t: &mut Transcript,
) -> bool {
    let mut equal = true;
    for _ in 0..FINGERPRINT_PARITIES {
        let (px, py) = parities(x, y, prefix, shared);
        if px != py {
            equal = false;
        }
    }
    t.send(Direction::AliceToBob, FINGERPRINT_PARITIES);
    t.send(Direction::BobToAlice, 1);
    equal
}

fn amplified_equal(
    x: &TokenSet,
    y: &TokenSet,
    prefix: usize,
    reps: usize,
    shared: &mut ChaCha8Rng,
    t: &mut Transcript,
) -> bool {
    let mut equal = true;
    for _ in 0..reps {
        let (px, py) = parities(x, y, prefix, shared);
        if px != py {
            equal = false;
        }
    }
    t.send(Direction::AliceToBob, reps);
    t.send(Direction::BobToAlice, 1);
    equal
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexVerdict {
    Index(usize),
    Equal,
}

/// Locates the least index where two equal-length bit strings differ, or
/// reports them equal, with failure probability at most `error`.
///
/// Binary search over prefixes with cheap one-sided fingerprints, then a
/// verification pass: the candidate bit is exchanged outright (so a returned
/// index always differs) and the prefix before it is rechecked with an
/// amplified fingerprint of ceil(log2(1/error)) + 7 parities. Any lie found
/// restarts the search with fresh randomness.
pub fn least_diff_index(
    x: &TokenSet,
    y: &TokenSet,
    error: f64,
    shared: &mut ChaCha8Rng,
    t: &mut Transcript,
) -> IndexVerdict {
    assert_eq!(x.width(), y.width(), "prefix lengths must match");
    assert!(error > 0.0 && error < 1.0);
    let k = x.width();
    if k == 0 {
        return IndexVerdict::Equal;
    }
    let reps = (1.0 / error).log2().ceil() as usize + 7;

    // each attempt fails with probability <= log2(k) * 2^-7; the budget is
    // far beyond anything reachable
    for _attempt in 0..10_000 {
        if fingerprint_equal(x, y, k, shared, t) {
            if amplified_equal(x, y, k, reps, shared, t) {
                return IndexVerdict::Equal;
            }
            continue;
        }
        // invariant: prefix of length hi differs (one-sided certainty),
        // prefix of length lo believed equal
        let mut lo = 0usize;
        let mut hi = k;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if fingerprint_equal(x, y, mid, shared, t) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let candidate = lo;
        // exchange the actual bits at the candidate position
        t.send(Direction::AliceToBob, 1);
        t.send(Direction::BobToAlice, 1);
        if x.contains(candidate) == y.contains(candidate) {
            continue;
        }
        if candidate == 0 || amplified_equal(x, y, candidate, reps, shared, t) {
            return IndexVerdict::Index(candidate);
        }
    }
    unreachable!("fingerprint retry budget exhausted");
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleOutcome {
    Element(usize),
    Empty,
}

fn expand_prf(seed_bytes: &[u8], k: usize, d: usize) -> SequenceSample {
    // absorb the seed into a 32-byte ChaCha key
    let mut key = [0u8; 32];
    let mut acc: u64 = 0x243f_6a88_85a3_08d3;
    for (i, &b) in seed_bytes.iter().enumerate() {
        acc = acc
            .rotate_left(9)
            .wrapping_add((b as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
            .wrapping_add(i as u64);
        key[i % 32] ^= acc as u8;
    }
    for chunk in key.chunks_mut(8) {
        acc ^= acc >> 31;
        acc = acc.wrapping_mul(0xbf58_476d_1ce4_e5b9);
        for byte in chunk.iter_mut() {
            *byte ^= acc as u8;
            acc = acc.rotate_left(8);
        }
    }
    let mut stream = ChaCha8Rng::from_seed(key);
    SequenceSample {
        entries: (0..d).map(|_| stream.random_range(0..k)).collect(),
    }
}

fn draw_sequence(
    gen: &SequenceGenerator,
    params: &SamplingParams,
    rng: &mut ChaCha8Rng,
    t: &mut Transcript,
) -> SequenceSample {
    match gen {
        SequenceGenerator::TrueRandom => {
            let x = SequenceSample {
                entries: (0..params.d)
                    .map(|_| rng.random_range(0..params.k))
                    .collect(),
            };
            t.send(Direction::AliceToBob, params.d * ceil_log2(params.k));
            x
        }
        SequenceGenerator::KeyedPrf { seed_bits } => {
            let nbytes = seed_bits.div_ceil(8);
            let mut seed = vec![0u8; nbytes];
            rng.fill(&mut seed[..]);
            if seed_bits % 8 != 0 {
                if let Some(last) = seed.last_mut() {
                    *last &= (1u8 << (seed_bits % 8)) - 1;
                }
            }
            t.send(Direction::AliceToBob, *seed_bits);
            expand_prf(&seed, params.k, params.d)
        }
    }
}

fn permute(set: &TokenSet, sigma: &Permutation) -> TokenSet {
    let k = set.width();
    let mut out = TokenSet::new(k);
    for i in 0..k {
        if set.contains(sigma.forward[i]) {
            out.insert(i);
        }
    }
    out
}

/// Runs the full sampling protocol on characteristic vectors `a` and `b`.
///
/// The output over protocol randomness is within `eps` total variation of
/// uniform on the symmetric difference; equal sets yield `Empty`.
pub fn sample_symdiff(
    a: &TokenSet,
    b: &TokenSet,
    eps: f64,
    gen: &SequenceGenerator,
    rng: &mut ChaCha8Rng,
) -> (SampleOutcome, Transcript) {
    assert_eq!(a.width(), b.width(), "universe widths must match");
    let k = a.width();
    let params = SamplingParams::new(k, eps);
    let mut t = Transcript::new();

    let x = draw_sequence(gen, &params, rng, &mut t);
    let sigma = permutation_from_sequence(&x, k);
    let pa = permute(a, &sigma);
    let pb = permute(b, &sigma);

    match least_diff_index(&pa, &pb, params.subprotocol_error, rng, &mut t) {
        IndexVerdict::Equal => (SampleOutcome::Empty, t),
        IndexVerdict::Index(i) => (SampleOutcome::Element(sigma.forward[i]), t),
    }
}

/// Probability that a fixed element of a size-`m` target set is the first
/// of the set to appear in a uniformly random length-`d` sequence over
/// `[0, k)`: (1/m) * (1 - (1 - m/k)^d).
pub fn first_appearance_probability(k: usize, d: usize, target_set_size: usize) -> f64 {
    assert!((1..=k).contains(&target_set_size));
    let m = target_set_size as f64;
    (1.0 / m) * (1.0 - (1.0 - m / k as f64).powi(d as i32))
}
