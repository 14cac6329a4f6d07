//! Seeded i.i.d. uniform costs on facets or vertex pairs.
//!
//! Costs are never stored. Each one is a keyed counter-based hash of the
//! canonical vertex tuple, so a complete complex with astronomically many
//! cells needs O(1) memory and any thread sees the same value.

use std::fmt;

use crate::error::{Error, Result};
use crate::simplex::{PureComplex, Simplex, Vertex};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Keyed pseudo-random function over a word sequence.
#[inline]
pub fn prf(key: u64, words: &[u64]) -> u64 {
    let mut h = mix64(key ^ GOLDEN);
    for (i, &w) in words.iter().enumerate() {
        h = mix64(h.wrapping_add(mix64(w.wrapping_add((i as u64 + 1).wrapping_mul(GOLDEN)))));
    }
    mix64(h ^ words.len() as u64)
}

/// Costs are integer multiples of this unit, which makes sums exact.
pub const TICK: f64 = 1.0 / (1u64 << 53) as f64;

/// Top 53 bits as a double in [0, 1).
#[inline]
pub fn unit_interval(h: u64) -> f64 {
    (h >> 11) as f64 * TICK
}

/// Converts an exact tick total into a cost. Summation order never matters.
#[inline]
pub fn ticks_to_cost(ticks: u128) -> f64 {
    ticks as f64 * TICK
}

/// Stable 64-bit tag for a purpose name (FNV-1a).
pub fn purpose_tag(name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Per-trial master seed: `PRF(master, purpose, trial)`.
pub fn derive_seed(master: u64, purpose: &str, trial: u64) -> u64 {
    prf(master, &[purpose_tag(purpose), trial])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Seed {
    pub master: u64,
    pub stream: u64,
}

impl Seed {
    pub fn new(master: u64, stream: u64) -> Self {
        Seed { master, stream }
    }

    /// The seed for trial `index` of an experiment tagged `purpose`.
    pub fn for_trial(master: u64, purpose: &str, index: u64) -> Self {
        Seed { master: derive_seed(master, purpose, index), stream: purpose_tag(purpose) }
    }
}

impl From<u64> for Seed {
    fn from(master: u64) -> Self {
        Seed { master, stream: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CostModel {
    /// Costs on the `d`-dimensional cells (facets with `d + 1` vertices).
    Facet(usize),
    /// Costs on vertex pairs; a complex pays for each distinct 1-skeleton edge.
    Edge,
}

impl CostModel {
    fn arity(&self) -> usize {
        match self {
            CostModel::Facet(d) => d + 1,
            CostModel::Edge => 2,
        }
    }

    fn tag(&self) -> u64 {
        match self {
            CostModel::Facet(d) => 0x0F00 + *d as u64,
            CostModel::Edge => 0x0E00,
        }
    }
}

impl fmt::Display for CostModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostModel::Facet(d) => write!(f, "facet(d={d})"),
            CostModel::Edge => f.write_str("edge"),
        }
    }
}

/// Deterministic cost assignment. Stateless, `Copy` and `Sync`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WeightOracle {
    seed: Seed,
    model: CostModel,
    key: u64,
}

impl WeightOracle {
    pub fn new(seed: impl Into<Seed>, model: CostModel) -> Self {
        let seed = seed.into();
        let key = mix64(mix64(seed.master) ^ seed.stream.wrapping_mul(GOLDEN) ^ model.tag());
        WeightOracle { seed, model, key }
    }

    pub fn facets(seed: impl Into<Seed>, d: usize) -> Self {
        Self::new(seed, CostModel::Facet(d))
    }

    pub fn edges(seed: impl Into<Seed>) -> Self {
        Self::new(seed, CostModel::Edge)
    }

    pub fn seed(&self) -> Seed {
        self.seed
    }

    pub fn model(&self) -> CostModel {
        self.model
    }

    /// Cost of an ascending vertex tuple in units of [`TICK`]. No checks.
    #[inline]
    pub fn raw_ticks(&self, sorted: &[Vertex]) -> u64 {
        let mut words = [0u64; crate::simplex::MAX_SIMPLEX_VERTICES];
        for (w, &v) in words.iter_mut().zip(sorted) {
            *w = v as u64;
        }
        prf(self.key, &words[..sorted.len()]) >> 11
    }

    /// Cost of an ascending vertex tuple of the right arity. No checks.
    #[inline]
    pub fn raw_cost(&self, sorted: &[Vertex]) -> f64 {
        self.raw_ticks(sorted) as f64 * TICK
    }

    #[inline]
    pub fn pair_ticks(&self, a: Vertex, b: Vertex) -> u64 {
        if a < b {
            self.raw_ticks(&[a, b])
        } else {
            self.raw_ticks(&[b, a])
        }
    }

    #[inline]
    pub fn pair_cost(&self, a: Vertex, b: Vertex) -> f64 {
        debug_assert_eq!(self.model, CostModel::Edge);
        if a < b {
            self.raw_cost(&[a, b])
        } else {
            self.raw_cost(&[b, a])
        }
    }

    pub fn simplex_cost(&self, s: &Simplex) -> Result<f64> {
        if s.len() != self.model.arity() {
            return Err(Error::WrongModel { simplex: *s, model: self.model.to_string() });
        }
        Ok(self.raw_cost(s.vertices()))
    }

    pub fn simplex_cost_logged(&self, s: &Simplex, log: &mut QueryLog) -> Result<f64> {
        let c = self.simplex_cost(s)?;
        log.record(*s);
        Ok(c)
    }

    /// Facet model: sum over facets. Edge model: sum over distinct 1-skeleton edges.
    pub fn complex_cost(&self, k: &PureComplex) -> Result<f64> {
        match self.model {
            CostModel::Facet(d) => {
                if k.dim() != d && !k.is_empty() {
                    return Err(Error::WrongModel { simplex: k.facets()[0], model: self.model.to_string() });
                }
                Ok(ticks_to_cost(k.facets().iter().map(|f| self.raw_ticks(f.vertices()) as u128).sum()))
            }
            CostModel::Edge => {
                if k.dim() < 1 && !k.is_empty() {
                    return Err(Error::WrongModel { simplex: k.facets()[0], model: self.model.to_string() });
                }
                Ok(ticks_to_cost(k.edges().iter().map(|&(a, b)| self.raw_ticks(&[a, b]) as u128).sum()))
            }
        }
    }
}

/// Every oracle query of one run, in order. Pair queries are packed into
/// words so that logs of millions of queries stay cheap; counts are computed
/// on demand by sorting.
#[derive(Clone, Debug, Default)]
pub struct QueryLog {
    pairs: Vec<u64>,
    others: Vec<Simplex>,
}

fn pack(s: &Simplex) -> u64 {
    let v = s.vertices();
    (u64::from(v[0]) << 32) | u64::from(v[1])
}

/// Lengths of the runs of equal values in sorted order.
fn multiplicities<T: Ord + Clone>(items: &[T]) -> Vec<u32> {
    let mut sorted = items.to_vec();
    sorted.sort_unstable();
    sorted.chunk_by(|a, b| a == b).map(|run| run.len() as u32).collect()
}

impl QueryLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, s: Simplex) {
        if s.len() == 2 {
            self.pairs.push(pack(&s));
        } else {
            self.others.push(s);
        }
    }

    pub fn count(&self, s: &Simplex) -> u32 {
        let c = if s.len() == 2 {
            let key = pack(s);
            self.pairs.iter().filter(|&&p| p == key).count()
        } else {
            self.others.iter().filter(|&o| o == s).count()
        };
        c as u32
    }

    pub fn max_count(&self) -> u32 {
        multiplicities(&self.pairs).into_iter().chain(multiplicities(&self.others)).max().unwrap_or(0)
    }

    pub fn distinct(&self) -> usize {
        multiplicities(&self.pairs).len() + multiplicities(&self.others).len()
    }

    pub fn total(&self) -> u64 {
        (self.pairs.len() + self.others.len()) as u64
    }

    pub fn merge(&mut self, other: &QueryLog) {
        self.pairs.extend_from_slice(&other.pairs);
        self.others.extend_from_slice(&other.others);
    }
}
