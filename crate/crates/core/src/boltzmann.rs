//! Metropolis flip chain on labeled 2-spheres with stationary law
//! proportional to `exp(-beta * W_S)` for one fixed weighing.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constructions::s_star;
use crate::cost::{derive_seed, ticks_to_cost, CostModel, Seed, WeightOracle};
use crate::error::{Error, Result};
use crate::simplex::{PureComplex, Simplex, Vertex};
use crate::verify::{verify, Outcome};

/// The 2-2 move replacing `uvx, uvy` by `uxy, vxy`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FlipMove {
    pub edge: (Vertex, Vertex),
    pub opposite: (Vertex, Vertex),
}

impl FlipMove {
    /// The move on `{u, v}` in `k`, reading off its two opposite vertices.
    pub fn on_edge(k: &PureComplex, u: Vertex, v: Vertex) -> Result<FlipMove> {
        let e = Simplex::edge(u, v);
        let opp: Vec<Vertex> =
            k.facets().iter().filter(|f| e.is_face_of(f)).map(|f| f.minus(&e).vertices()[0]).collect();
        match opp[..] {
            [x, y] => Ok(FlipMove { edge: (u.min(v), u.max(v)), opposite: (x.min(y), x.max(y)) }),
            _ => Err(Error::NotAnEdge(e)),
        }
    }

    /// The move undoing this one.
    pub fn reverse(&self) -> FlipMove {
        FlipMove { edge: self.opposite, opposite: self.edge }
    }

    fn removed(&self) -> [Simplex; 2] {
        let ((u, v), (x, y)) = (self.edge, self.opposite);
        [Simplex::triangle(u, v, x), Simplex::triangle(u, v, y)]
    }

    fn added(&self) -> [Simplex; 2] {
        let ((u, v), (x, y)) = (self.edge, self.opposite);
        [Simplex::triangle(u, x, y), Simplex::triangle(v, x, y)]
    }
}

impl fmt::Display for FlipMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "flip {}-{} -> {}-{}", self.edge.0, self.edge.1, self.opposite.0, self.opposite.1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FlipOutcome {
    Flipped(PureComplex),
    /// The new diagonal already exists, or the opposite vertices coincide.
    Rejected,
}

/// Applies `m` to `k`. Errors when the edge or the stated facets are absent.
pub fn diagonal_flip(k: &PureComplex, m: &FlipMove) -> Result<FlipOutcome> {
    let (u, v) = m.edge;
    let actual = FlipMove::on_edge(k, u, v)?;
    if actual.opposite != m.opposite {
        return Err(Error::InvalidParameter(format!("{m} does not match the facets around {u}-{v}")));
    }
    let (x, y) = m.opposite;
    if x == y || k.edges().contains(&(x, y)) {
        return Ok(FlipOutcome::Rejected);
    }
    let removed = m.removed();
    let facets = k.facets().iter().filter(|f| !removed.contains(f)).copied().chain(m.added());
    Ok(FlipOutcome::Flipped(PureComplex::new(2, k.n(), facets)?))
}

/// Inverse temperature; `Infinite` turns the chain into strict descent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Beta {
    Finite(f64),
    Infinite,
}

impl Beta {
    /// Metropolis acceptance probability for a cost change `delta`.
    pub fn acceptance(&self, delta: f64) -> f64 {
        match *self {
            Beta::Infinite => {
                if delta < 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Beta::Finite(b) => (-b * delta).exp().min(1.0),
        }
    }

    pub fn is_descent(&self) -> bool {
        matches!(self, Beta::Infinite)
    }
}

impl fmt::Display for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Beta::Finite(b) => write!(f, "{b}"),
            Beta::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Beta {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") {
            return Ok(Beta::Infinite);
        }
        match s.parse::<f64>() {
            Ok(b) if b.is_finite() && b >= 0.0 => Ok(Beta::Finite(b)),
            Ok(b) if b == f64::INFINITY => Ok(Beta::Infinite),
            _ => Err(Error::InvalidParameter(format!("beta must be a nonnegative real or inf, got {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepInfo {
    pub step: u64,
    /// The proposal was a legal flip.
    pub flippable: bool,
    pub accepted: bool,
    /// Cost change of the proposal (zero when not flippable).
    pub delta: f64,
}

/// A chain over one sphere. Edges are kept in a fixed-size array so a
/// uniform proposal is a uniform index; a flip rewrites its slot in place.
#[derive(Clone, Debug)]
pub struct ChainState {
    n: u32,
    beta: Beta,
    oracle: WeightOracle,
    rng: ChaCha8Rng,
    edges: Vec<(Vertex, Vertex)>,
    opposite: Vec<[Vertex; 2]>,
    slot: HashMap<(Vertex, Vertex), usize>,
    cost_ticks: u128,
    steps: u64,
    flips: u64,
    last: Option<FlipMove>,
}

fn key(a: Vertex, b: Vertex) -> (Vertex, Vertex) {
    (a.min(b), a.max(b))
}

impl ChainState {
    /// Starts from `s_star(n, 2)`.
    pub fn new(n: u32, beta: Beta, oracle: WeightOracle, seed: u64) -> Result<Self> {
        if n < 5 {
            return Err(Error::TooSmall(format!("the flip chain needs n >= 5, got {n}")));
        }
        Self::from_sphere(&s_star(n, 2)?.complex, beta, oracle, seed)
    }

    pub fn from_sphere(k: &PureComplex, beta: Beta, oracle: WeightOracle, seed: u64) -> Result<Self> {
        if oracle.model() != CostModel::Facet(2) {
            return Err(Error::WrongModel { simplex: Simplex::from_sorted(&[]), model: oracle.model().to_string() });
        }
        if verify(k)?.outcome != Outcome::Sphere2 {
            return Err(Error::WitnessNotSphere("flip chain start".into()));
        }
        let mut around: HashMap<(Vertex, Vertex), Vec<Vertex>> = HashMap::new();
        for f in k.facets() {
            let [a, b, c] = [f.vertices()[0], f.vertices()[1], f.vertices()[2]];
            around.entry((a, b)).or_default().push(c);
            around.entry((a, c)).or_default().push(b);
            around.entry((b, c)).or_default().push(a);
        }
        let mut edges: Vec<(Vertex, Vertex)> = around.keys().copied().collect();
        edges.sort_unstable();
        let opposite = edges.iter().map(|e| [around[e][0], around[e][1]]).collect();
        let slot = edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let cost_ticks = k.facets().iter().map(|f| oracle.raw_ticks(f.vertices()) as u128).sum();
        Ok(ChainState {
            n: k.n(),
            beta,
            rng: ChaCha8Rng::seed_from_u64(derive_seed(seed, "flip-chain", k.n() as u64)),
            oracle,
            edges,
            opposite,
            slot,
            cost_ticks,
            steps: 0,
            flips: 0,
            last: None,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn beta(&self) -> Beta {
        self.beta
    }

    pub fn cost(&self) -> f64 {
        ticks_to_cost(self.cost_ticks)
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn accepted(&self) -> u64 {
        self.flips
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.flips as f64 / self.steps as f64
        }
    }

    /// The most recent accepted flip.
    pub fn last_flip(&self) -> Option<FlipMove> {
        self.last
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn complex(&self) -> PureComplex {
        let mut facets: Vec<Simplex> = self
            .edges
            .iter()
            .zip(&self.opposite)
            .flat_map(|(&(u, v), o)| o.map(|x| Simplex::triangle(u, v, x)))
            .collect();
        facets.sort_unstable();
        facets.dedup();
        PureComplex::new(2, self.n, facets).expect("chain keeps a valid complex")
    }

    /// Cost recomputed from the facets.
    pub fn recomputed_cost(&self) -> f64 {
        self.oracle.complex_cost(&self.complex()).expect("facet model")
    }

    /// The move on edge slot `i`, or `None` when its diagonal already exists.
    fn proposal(&self, i: usize) -> Option<FlipMove> {
        let (u, v) = self.edges[i];
        let [x, y] = self.opposite[i];
        if x == y || self.slot.contains_key(&key(x, y)) {
            return None;
        }
        Some(FlipMove { edge: (u, v), opposite: key(x, y) })
    }

    /// Cost change of `m` in ticks.
    pub fn delta_ticks(&self, m: &FlipMove) -> i128 {
        let t = |s: &Simplex| self.oracle.raw_ticks(s.vertices()) as i128;
        m.added().iter().map(t).sum::<i128>() - m.removed().iter().map(t).sum::<i128>()
    }

    /// Applies a legal move unconditionally.
    pub fn apply(&mut self, m: &FlipMove) -> Result<()> {
        let (u, v) = m.edge;
        let (x, y) = m.opposite;
        let i = *self.slot.get(&key(u, v)).ok_or(Error::NotAnEdge(Simplex::edge(u, v)))?;
        let mut o = self.opposite[i];
        o.sort_unstable();
        if o != [x, y] {
            return Err(Error::InvalidParameter(format!("{m} does not match the facets around {u}-{v}")));
        }
        if x == y || self.slot.contains_key(&key(x, y)) {
            return Err(Error::WouldDegenerate(format!("{x}-{y} is already an edge")));
        }
        self.cost_ticks = (self.cost_ticks as i128 + self.delta_ticks(m)) as u128;
        // Each side edge swaps the vertex across the old diagonal for the other opposite vertex.
        for (a, b, old, new) in [(u, x, v, y), (v, x, u, y), (u, y, v, x), (v, y, u, x)] {
            let j = self.slot[&key(a, b)];
            let o = &mut self.opposite[j];
            let k = if o[0] == old { 0 } else { 1 };
            debug_assert_eq!(o[k], old);
            o[k] = new;
        }
        self.slot.remove(&key(u, v));
        self.edges[i] = key(x, y);
        self.opposite[i] = [u, v];
        self.slot.insert(key(x, y), i);
        self.flips += 1;
        self.last = Some(*m);
        Ok(())
    }

    /// One lazy Metropolis step with a uniform edge proposal.
    pub fn step(&mut self) -> StepInfo {
        self.steps += 1;
        let i = self.rng.gen_range(0..self.edges.len());
        let u: f64 = self.rng.gen();
        let Some(m) = self.proposal(i) else {
            return StepInfo { step: self.steps, flippable: false, accepted: false, delta: 0.0 };
        };
        let dt = self.delta_ticks(&m);
        let delta = dt as f64 * crate::cost::TICK;
        let accepted = match self.beta {
            Beta::Infinite => dt < 0,
            Beta::Finite(0.0) => true,
            Beta::Finite(_) => u < self.beta.acceptance(delta),
        };
        if accepted {
            self.apply(&m).expect("proposal is legal");
        }
        StepInfo { step: self.steps, flippable: true, accepted, delta }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TracePoint {
    pub step: u64,
    pub cost: f64,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainRun {
    pub beta: Beta,
    pub final_sphere: PureComplex,
    pub final_cost: f64,
    /// Every `thin`-th step, plus step 0.
    pub trace: Vec<TracePoint>,
    pub acceptance_rate: f64,
    /// Mean cost over the second half of the run.
    pub mean_cost: f64,
}

pub const BOOKKEEPING_CHECK: u64 = 10_000;

/// Runs `steps` steps from `s_star(n, 2)`. The incremental cost is checked
/// against a full recomputation every `BOOKKEEPING_CHECK` steps.
pub fn run_chain(n: u32, beta: Beta, o: &WeightOracle, steps: u64, seed: u64, thin: u64) -> Result<ChainRun> {
    let mut chain = ChainState::new(n, beta, *o, seed)?;
    let thin = thin.max(1);
    let mut trace = vec![TracePoint { step: 0, cost: chain.cost(), accepted: false }];
    let burn = steps / 2;
    let (mut sum, mut count) = (0.0, 0u64);
    for _ in 0..steps {
        let info = chain.step();
        if info.step % thin == 0 {
            trace.push(TracePoint { step: info.step, cost: chain.cost(), accepted: info.accepted });
        }
        if info.step > burn {
            sum += chain.cost();
            count += 1;
        }
        if info.step % BOOKKEEPING_CHECK == 0 {
            let full = chain.recomputed_cost();
            if (full - chain.cost()).abs() > 1e-9 {
                return Err(Error::InvalidParameter(format!("cost drift at step {}: {} vs {full}", info.step, chain.cost())));
            }
        }
    }
    let mean_cost = if count == 0 { chain.cost() } else { sum / count as f64 };
    Ok(ChainRun {
        beta,
        final_sphere: chain.complex(),
        final_cost: chain.cost(),
        trace,
        acceptance_rate: chain.acceptance_rate(),
        mean_cost,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostStat {
    pub beta: Beta,
    pub trials: usize,
    pub mean: f64,
    /// Standard error of `mean`; NaN with fewer than two trials.
    pub stderr: f64,
}

/// Mean equilibrium cost per `beta`. Trial `t` draws a fresh weighing from
/// `master` and reuses it across the grid, so neighboring temperatures are
/// compared on the same weighings.
pub fn boltzmann_cost_stats(n: u32, betas: &[Beta], trials: usize, steps: u64, master: u64) -> Result<Vec<CostStat>> {
    if trials == 0 {
        return Ok(Vec::new());
    }
    betas
        .iter()
        .map(|&beta| {
            let samples = (0..trials)
                .map(|t| {
                    let o = WeightOracle::facets(Seed::for_trial(master, "boltzmann-weights", t as u64), 2);
                    run_chain(n, beta, &o, steps, derive_seed(master, "boltzmann-chain", t as u64), steps.max(1))
                        .map(|r| r.mean_cost)
                })
                .collect::<Result<Vec<f64>>>()?;
            let mean = samples.iter().sum::<f64>() / trials as f64;
            let stderr = if trials < 2 {
                f64::NAN
            } else {
                let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
                (var / trials as f64).sqrt()
            };
            Ok(CostStat { beta, trials, mean, stderr })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::labeled_spheres;
    use crate::simplex::tests::tetra_boundary;

    fn bipyramid() -> PureComplex {
        s_star(5, 2).unwrap().complex
    }

    #[test]
    fn flip_on_bipyramid() {
        let k = bipyramid();
        let m = FlipMove::on_edge(&k, 3, 4).unwrap();
        assert_eq!(m.opposite, (1, 2));
        // {1,2} is not an edge of the bipyramid, so the move applies.
        let FlipOutcome::Flipped(out) = diagonal_flip(&k, &m).unwrap() else { panic!("rejected") };
        let expected =
            PureComplex::from_lists(2, 5, &[&[1, 2, 3], &[1, 2, 4], &[1, 4, 5], &[2, 4, 5], &[1, 3, 5], &[2, 3, 5]]).unwrap();
        assert_eq!(out, expected);
        assert_eq!(verify(&out).unwrap().outcome, Outcome::Sphere2);
        let FlipOutcome::Flipped(back) = diagonal_flip(&out, &m.reverse()).unwrap() else { panic!("rejected") };
        assert_eq!(back, k);
    }

    #[test]
    fn tetra_flips_are_rejected() {
        let k = tetra_boundary();
        for (u, v) in k.edges() {
            let m = FlipMove::on_edge(&k, u, v).unwrap();
            assert_eq!(diagonal_flip(&k, &m).unwrap(), FlipOutcome::Rejected);
        }
        assert!(matches!(FlipMove::on_edge(&bipyramid(), 1, 2), Err(Error::NotAnEdge(_))));
    }

    #[test]
    fn beta_parsing_and_acceptance() {
        assert_eq!("inf".parse::<Beta>().unwrap(), Beta::Infinite);
        assert_eq!("2.5".parse::<Beta>().unwrap(), Beta::Finite(2.5));
        assert!("-1".parse::<Beta>().is_err());
        assert!("nan".parse::<Beta>().is_err());
        let b = Beta::Finite(3.0);
        assert_eq!(b.acceptance(-0.2), 1.0);
        assert!((b.acceptance(0.2) - (-0.6f64).exp()).abs() < 1e-15);
        assert_eq!(Beta::Infinite.acceptance(0.0), 0.0);
        assert_eq!(Beta::Infinite.acceptance(-1e-9), 1.0);
    }

    #[test]
    fn reverse_flip_has_metropolis_ratio() {
        let o = WeightOracle::facets(5, 2);
        let b = Beta::Finite(2.0);
        let mut chain = ChainState::new(12, b, o, 1).unwrap();
        let mut checked = 0;
        for _ in 0..5000 {
            let info = chain.step();
            if !info.accepted {
                continue;
            }
            let back = chain.last_flip().unwrap().reverse();
            let undo = chain.delta_ticks(&back) as f64 * crate::cost::TICK;
            assert_eq!(undo, -info.delta);
            assert_eq!(b.acceptance(undo), (2.0 * info.delta).exp().min(1.0));
            checked += 1;
        }
        assert!(checked > 100);
    }

    #[test]
    fn chain_keeps_sphere_and_cost() {
        let o = WeightOracle::facets(9, 2);
        let mut chain = ChainState::new(20, Beta::Finite(1.0), o, 3).unwrap();
        for i in 0..20_000 {
            let info = chain.step();
            if info.accepted && i % 97 == 0 {
                let k = chain.complex();
                let v = verify(&k).unwrap();
                assert_eq!(v.outcome, Outcome::Sphere2);
                assert!(v.spanning);
                assert_eq!(k.num_facets(), 36);
                assert_eq!(k.edges().len(), 54);
            }
        }
        assert!((chain.recomputed_cost() - chain.cost()).abs() < 1e-9);
        assert!(chain.accepted() > 0);
    }

    #[test]
    fn flips_undo_exactly() {
        let o = WeightOracle::facets(2, 2);
        let mut chain = ChainState::new(15, Beta::Finite(0.0), o, 8).unwrap();
        let start = chain.complex();
        let start_cost = chain.cost();
        let mut done = Vec::new();
        while done.len() < 300 {
            if chain.step().accepted {
                done.push(chain.last_flip().unwrap());
            }
        }
        for m in done.iter().rev() {
            chain.apply(&m.reverse()).unwrap();
        }
        assert_eq!(chain.complex(), start);
        assert_eq!(chain.cost(), start_cost);
    }

    #[test]
    fn descent_never_increases_cost() {
        let o = WeightOracle::facets(4, 2);
        let r = run_chain(16, Beta::Infinite, &o, 20_000, 4, 100).unwrap();
        assert!(r.trace.windows(2).all(|w| w[1].cost <= w[0].cost));
        assert!(r.final_cost < r.trace[0].cost);
    }

    #[test]
    fn small_n_rejected() {
        assert!(matches!(ChainState::new(4, Beta::Finite(0.0), WeightOracle::facets(0, 2), 0), Err(Error::TooSmall(_))));
        assert!(ChainState::new(8, Beta::Finite(0.0), WeightOracle::edges(0), 0).is_err());
        assert!(boltzmann_cost_stats(8, &[Beta::Finite(0.0)], 0, 10, 0).unwrap().is_empty());
    }

    #[test]
    fn zero_beta_reaches_every_n6_sphere() {
        // Flip connectivity at n=6: beta=0 reaches all 195 labeled spheres.
        let support: HashMap<&PureComplex, usize> = labeled_spheres(6).unwrap().iter().map(|k| (k, 0)).collect();
        let mut chain = ChainState::new(6, Beta::Finite(0.0), WeightOracle::facets(0, 2), 11).unwrap();
        let mut seen = std::collections::HashSet::new();
        for _ in 0..200_000 {
            if chain.step().accepted {
                let k = chain.complex();
                assert!(support.contains_key(&k));
                seen.insert(k);
            }
        }
        assert_eq!(seen.len(), support.len());
    }
}
