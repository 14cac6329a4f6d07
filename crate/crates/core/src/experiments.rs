//! Batch Monte Carlo runs: scaling of construction costs, their spread, and
//! vertex degree statistics of sampled spheres.
//!
//! Trials run in parallel but results come back in `(n, trial)` order, so a
//! fixed master seed reproduces every row except `runtime_ms`.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::boltzmann::{Beta, ChainState};
use crate::constructions::{build_cone_sphere, tight_path_sphere, TourMethod};
use crate::cost::{derive_seed, CostModel, WeightOracle};
use crate::error::{Error, Result};
use crate::exact::{min_spanning_sphere_exact, MAX_SCAN_N};
use crate::lc::{certify_lc, lc_trace_for_cone_sphere, sample_lc_2sphere_with, LcSampling};
use crate::simplex::PureComplex;
pub use crate::stats::decimal;
use crate::stats::{fit_line, median, quartiles, stdev, LinearFit};
use crate::verify::{verify, Outcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Model {
    Facet,
    Edge,
}

impl Model {
    pub fn cost_model(&self, d: usize) -> CostModel {
        match self {
            Model::Facet => CostModel::Facet(d),
            Model::Edge => CostModel::Edge,
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Facet => "facet",
            Model::Edge => "edge",
        })
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "facet" => Ok(Model::Facet),
            "edge" => Ok(Model::Edge),
            _ => Err(Error::InvalidParameter(format!("unknown cost model `{s}`"))),
        }
    }
}

/// A construction: a pole/cycle sphere with a chosen tour heuristic, or the
/// tight-path sphere for edge costs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Tour(TourMethod),
    TightPath,
}

impl Method {
    pub fn default_for(model: Model) -> Method {
        match model {
            Model::Facet => Method::Tour(TourMethod::Greedy2Opt),
            Model::Edge => Method::TightPath,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Tour(t) => t.fmt(f),
            Method::TightPath => f.write_str("tightpath"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "tightpath" {
            return Ok(Method::TightPath);
        }
        s.parse().map(Method::Tour)
    }
}

/// A verified construction and its cost.
#[derive(Clone, Debug, PartialEq)]
pub struct Built {
    pub complex: PureComplex,
    pub cost: f64,
}

/// Builds with `method` under costs `o`, then verifies the result: the full
/// check for d=2 and an LC certificate replay in higher dimension.
pub fn construct(d: usize, n: u32, method: Method, o: &WeightOracle) -> Result<Built> {
    let (complex, cost) = match method {
        Method::TightPath => {
            if d != 2 {
                return Err(Error::UnsupportedDimension(d));
            }
            let t = tight_path_sphere(n, o)?;
            (t.complex, t.cost)
        }
        Method::Tour(t) => {
            let (s, cost) = build_cone_sphere(n, d, o, t)?;
            if d >= 3 {
                let trace = lc_trace_for_cone_sphere(&s.cycle, d)?;
                let v = certify_lc(&s.complex, &trace);
                if v.outcome != Outcome::CertifiedLC {
                    return Err(Error::InvalidParameter(format!("construction failed its certificate: {:?}", v.reason)));
                }
            }
            (s.complex, cost)
        }
    };
    if d == 2 {
        let v = verify(&complex)?;
        if v.outcome != Outcome::Sphere2 || !v.spanning {
            return Err(Error::InvalidParameter(format!("construction failed verification: {:?}", v.reason)));
        }
    }
    Ok(Built { complex, cost })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRecord {
    pub d: usize,
    pub model: Model,
    pub n: u32,
    pub trial: u64,
    pub seed: u64,
    pub method: String,
    pub cost: f64,
    pub facet_count: usize,
    pub runtime_ms: f64,
}

impl ExperimentRecord {
    pub const HEADER: [&'static str; 9] = ["d", "model", "n", "trial", "seed", "method", "cost", "facet_count", "runtime_ms"];

    /// Fields in `HEADER` order.
    pub fn fields(&self) -> [String; 9] {
        [
            self.d.to_string(),
            self.model.to_string(),
            self.n.to_string(),
            self.trial.to_string(),
            self.seed.to_string(),
            self.method.clone(),
            decimal(self.cost),
            self.facet_count.to_string(),
            decimal(self.runtime_ms),
        ]
    }
}

/// Seeds for every `(n, trial)` of a grid, checked for collisions.
fn trial_seeds(master: u64, purpose: &str, grid: &[u32], trials: usize) -> Result<Vec<(u32, u64, u64)>> {
    let mut jobs = Vec::with_capacity(grid.len() * trials);
    let mut seen = HashSet::with_capacity(grid.len() * trials);
    for &n in grid {
        for t in 0..trials as u64 {
            let seed = derive_seed(master, purpose, ((n as u64) << 32) | t);
            if !seen.insert(seed) {
                return Err(Error::InvalidParameter(format!("trial seed collision at n={n} trial={t}")));
            }
            jobs.push((n, t, seed));
        }
    }
    Ok(jobs)
}

fn check_grid(grid: &[u32]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty n grid".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("n grid must be strictly ascending".into()));
    }
    Ok(())
}

/// What each trial builds.
#[derive(Clone, Copy)]
struct TrialKind {
    d: usize,
    model: Model,
    method: Method,
    /// Use the exact minimum where enumeration is feasible.
    exact_small: bool,
}

fn run_trials(kind: TrialKind, purpose: &str, grid: &[u32], trials: usize, master: u64) -> Result<Vec<ExperimentRecord>> {
    let TrialKind { d, model, method, exact_small } = kind;
    let jobs = trial_seeds(master, purpose, grid, trials)?;
    jobs.into_par_iter()
        .map(|(n, trial, seed)| {
            let o = WeightOracle::new(seed, model.cost_model(d));
            let start = Instant::now();
            let (label, built) = if exact_small && d == 2 && model == Model::Facet && n <= MAX_SCAN_N {
                let (complex, cost) = min_spanning_sphere_exact(n, &o)?;
                ("exact-min".to_string(), Built { complex, cost })
            } else {
                (method.to_string(), construct(d, n, method, &o)?)
            };
            Ok(ExperimentRecord {
                d,
                model,
                n,
                trial,
                seed,
                method: label,
                cost: built.cost,
                facet_count: built.complex.num_facets(),
                runtime_ms: start.elapsed().as_secs_f64() * 1e3,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingConfig {
    pub d: usize,
    pub model: Model,
    pub grid: Vec<u32>,
    pub trials: usize,
    pub method: Method,
    pub seed: u64,
}

pub const MIN_SCALING_TRIALS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingRow {
    pub n: u32,
    pub trials: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingFit {
    pub rows: Vec<ScalingRow>,
    /// Least squares on `(ln n, ln median)`.
    pub fit: LinearFit,
    /// Grid point left out of the fit as transient; only with 3+ points.
    pub dropped: Option<u32>,
}

fn scaling_rows(records: &[ExperimentRecord], grid: &[u32]) -> Vec<ScalingRow> {
    grid.iter()
        .map(|&n| {
            let costs: Vec<f64> = records.iter().filter(|r| r.n == n).map(|r| r.cost).collect();
            let (q1, q3) = quartiles(&costs);
            ScalingRow { n, trials: costs.len(), median: median(&costs), q1, q3 }
        })
        .collect()
}

/// Fits the log-log slope of medians, leaving out the smallest `n` when the
/// grid has at least three points.
pub fn fit_scaling(rows: Vec<ScalingRow>) -> Result<ScalingFit> {
    let skip = usize::from(rows.len() >= 3);
    let used = &rows[skip..];
    let x: Vec<f64> = used.iter().map(|r| (r.n as f64).ln()).collect();
    let y: Vec<f64> = used.iter().map(|r| r.median.ln()).collect();
    let fit = fit_line(&x, &y).ok_or_else(|| Error::InvalidParameter("need two distinct grid points for a slope".into()))?;
    let dropped = (skip == 1).then(|| rows[0].n);
    Ok(ScalingFit { rows, fit, dropped })
}

pub fn exp_scaling(cfg: &ScalingConfig) -> Result<(Vec<ExperimentRecord>, ScalingFit)> {
    check_grid(&cfg.grid)?;
    if cfg.grid.len() < 2 {
        return Err(Error::InvalidParameter("scaling needs at least two grid points".into()));
    }
    if cfg.trials < MIN_SCALING_TRIALS {
        return Err(Error::InvalidParameter(format!("scaling needs at least {MIN_SCALING_TRIALS} trials")));
    }
    let purpose = format!("exp-scaling-d{}-{}-{}", cfg.d, cfg.model, cfg.method);
    let records = run_trials(
        TrialKind { d: cfg.d, model: cfg.model, method: cfg.method, exact_small: false },
        &purpose,
        &cfg.grid,
        cfg.trials,
        cfg.seed,
    )?;
    let fit = fit_scaling(scaling_rows(&records, &cfg.grid))?;
    Ok((records, fit))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConcentrationRow {
    pub n: u32,
    pub trials: usize,
    pub median: f64,
    /// `None` with a single trial.
    pub stdev: Option<f64>,
    pub ratio: Option<f64>,
    /// Exact minimum (small n) rather than a construction.
    pub exact: bool,
}

/// Spread of costs per `n`: the exact minimum for d=2 facet costs at
/// `n <= MAX_SCAN_N`, the default construction otherwise.
pub fn exp_concentration(
    d: usize,
    model: Model,
    grid: &[u32],
    trials: usize,
    seed: u64,
) -> Result<(Vec<ExperimentRecord>, Vec<ConcentrationRow>)> {
    check_grid(grid)?;
    if trials == 0 {
        return Err(Error::InvalidParameter("concentration needs at least one trial".into()));
    }
    let method = Method::default_for(model);
    let purpose = format!("exp-conc-d{d}-{model}");
    let records = run_trials(TrialKind { d, model, method, exact_small: true }, &purpose, grid, trials, seed)?;
    let rows = grid
        .iter()
        .map(|&n| {
            let rs: Vec<&ExperimentRecord> = records.iter().filter(|r| r.n == n).collect();
            let costs: Vec<f64> = rs.iter().map(|r| r.cost).collect();
            let med = median(&costs);
            let sd = stdev(&costs);
            ConcentrationRow {
                n,
                trials: costs.len(),
                median: med,
                stdev: sd,
                ratio: sd.map(|s| s / med),
                exact: rs.first().is_some_and(|r| r.method == "exact-min"),
            }
        })
        .collect();
    Ok((records, rows))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DegreeSampler {
    /// Locally constructible spheres from the adaptive folding sampler.
    Lc,
    /// Flip chain at inverse temperature `beta`, fresh weighing per sample.
    Boltzmann { beta: Beta, steps: u64 },
}

impl DegreeSampler {
    /// Flip-chain sampler with a run length that scales with the edge count.
    pub fn boltzmann(beta: Beta, n: u32) -> Self {
        DegreeSampler::Boltzmann { beta, steps: 200 * (3 * n as u64 - 6) }
    }
}

impl fmt::Display for DegreeSampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DegreeSampler::Lc => f.write_str("lc"),
            DegreeSampler::Boltzmann { beta, .. } => write!(f, "boltzmann({beta})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DegreeHistogram {
    pub n: u32,
    pub samples: usize,
    /// Degree to number of vertices with that degree, pooled over samples.
    pub counts: BTreeMap<usize, u64>,
}

impl DegreeHistogram {
    /// Counts indexed by degree.
    pub fn dense(&self) -> Vec<u64> {
        let max = self.counts.keys().copied().max().unwrap_or(0);
        (0..=max).map(|k| self.counts.get(&k).copied().unwrap_or(0)).collect()
    }
}

/// Vertex degrees of each sample, in sample order.
pub fn degree_samples(sampler: DegreeSampler, n: u32, samples: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if n < 6 {
        return Err(Error::TooSmall(format!("degree histograms need n >= 6, got {n}")));
    }
    (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let s = derive_seed(seed, "exp-degrees", i);
            let k = match sampler {
                DegreeSampler::Lc => sample_lc_2sphere_with(2 * n as usize - 4, s, LcSampling::Adaptive)?.0,
                DegreeSampler::Boltzmann { beta, steps } => {
                    let o = WeightOracle::facets(derive_seed(s, "exp-degrees-weights", 0), 2);
                    let mut chain = ChainState::new(n, beta, o, s)?;
                    for _ in 0..steps {
                        chain.step();
                    }
                    chain.complex()
                }
            };
            let mut deg = vec![0usize; n as usize];
            for (a, b) in k.edges() {
                deg[a as usize - 1] += 1;
                deg[b as usize - 1] += 1;
            }
            Ok(deg)
        })
        .collect()
}

pub fn exp_degree_histogram(sampler: DegreeSampler, n: u32, samples: usize, seed: u64) -> Result<DegreeHistogram> {
    let mut counts = BTreeMap::new();
    for deg in degree_samples(sampler, n, samples, seed)? {
        for k in deg {
            *counts.entry(k).or_insert(0) += 1;
        }
    }
    Ok(DegreeHistogram { n, samples, counts })
}
