mod config;
mod output;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use num_rational::Ratio;

use spansphere::boltzmann::{run_chain, Beta};
use spansphere::bounds::{bounds_report, BoundsParams};
use spansphere::exact::{enumerate_2spheres, min_spanning_sphere_exact, patch_exact};
use spansphere::experiments::{
    construct, decimal, exp_concentration, exp_degree_histogram, exp_scaling, DegreeSampler, ExperimentRecord, Method, Model,
    ScalingConfig,
};
use spansphere::lc::{certify_lc, LcTrace};
use spansphere::patcher::patch_2sphere;
use spansphere::{verify, PureComplex, WeightOracle};

use output::{Format, Report, Table};

/// Cheap spanning spheres under random costs: build, verify, bound and sample.
#[derive(Debug, Parser)]
#[command(name = "spansphere", version)]
struct Cli {
    /// Master seed for all randomness.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file for tables and complexes.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// File of `key=value` lines supplying flags not given on the command line.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check whether a complex file is a sphere.
    Verify {
        complex: PathBuf,
        /// LC trace certifying the complex (needed for sphericity in d=3).
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Build a cheap sphere and print its cost.
    Construct {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value = "facet")]
        model: Model,
        /// greedy, greedy2opt, exact or tightpath.
        #[arg(long)]
        method: Option<Method>,
    },
    /// Exact answers by exhaustive search at small n.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// First-moment thresholds, counting bounds and named constants.
    Bounds {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: u64,
        /// Entropy exponent as a rational, e.g. 8/21.
        #[arg(long)]
        beta: Option<Ratio<i64>>,
        #[arg(long)]
        b: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Patch a partial complex back into a spanning 2-sphere.
    Patch {
        /// The partial complex H.
        #[arg(long)]
        complex: PathBuf,
        /// A sphere containing H.
        #[arg(long)]
        witness: PathBuf,
        /// Separator size scale.
        #[arg(long)]
        s: usize,
    },
    /// Run the Metropolis flip chain.
    Boltzmann {
        #[arg(long)]
        n: u32,
        /// Inverse temperature, or `inf` for cost descent.
        #[arg(long)]
        beta: String,
        #[arg(long)]
        steps: u64,
        /// Record every `thin`-th step in the trace.
        #[arg(long, default_value_t = 1)]
        thin: u64,
        /// CSV file for the cost trace.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Batch experiments.
    #[command(subcommand)]
    Exp(ExpCommand),
}

#[derive(Debug, Subcommand)]
enum OracleCommand {
    /// Count labeled spanning 2-spheres and their isomorphism classes.
    Enumerate {
        #[arg(long)]
        n: u32,
    },
    /// Exact minimum cost spanning 2-sphere.
    Min {
        #[arg(long)]
        n: u32,
    },
    /// Fewest and cheapest facets completing a complex to a spanning sphere.
    Patch {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        complex: PathBuf,
    },
}

#[derive(Debug, Args)]
struct GridArgs {
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, default_value = "facet")]
    model: Model,
    /// Ascending sizes: `a,b,c` or `a..b` for doubling from a up to b.
    #[arg(long)]
    grid: String,
    #[arg(long)]
    trials: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SamplerName {
    Lc,
    Boltzmann,
}

#[derive(Debug, Subcommand)]
enum ExpCommand {
    /// Median cost per n and the fitted log-log slope.
    Scaling {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        method: Option<Method>,
    },
    /// Spread of the cost per n.
    Conc {
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Pooled vertex degree histogram of sampled spheres.
    Degrees {
        #[arg(long, value_enum, default_value_t = SamplerName::Lc)]
        sampler: SamplerName,
        #[arg(long, default_value = "0")]
        beta: String,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        samples: usize,
        /// Chain steps per sample for the flip-chain sampler.
        #[arg(long)]
        steps: Option<u64>,
    },
}

type Failure = Box<dyn std::error::Error>;

fn parse_grid(s: &str) -> Result<Vec<u32>, Failure> {
    if let Some((a, b)) = s.split_once("..") {
        let (mut n, hi): (u32, u32) = (a.trim().parse()?, b.trim().parse()?);
        let mut grid = Vec::new();
        while n <= hi && n > 0 {
            grid.push(n);
            n = n.checked_mul(2).ok_or("grid overflow")?;
        }
        return Ok(grid);
    }
    Ok(s.split(',').map(|t| t.trim().parse()).collect::<Result<_, _>>()?)
}

fn read_complex(path: &Path) -> Result<PureComplex, Failure> {
    Ok(fs::read_to_string(path)?.parse()?)
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text)?;
    Ok(())
}

fn say(format: Format, r: Report) {
    println!("{}", r.render(format));
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let fmt = cli.format;
    let out = cli.out.as_deref();
    let seed = cli.seed;
    match cli.command {
        Command::Verify { complex, trace } => {
            let k = read_complex(&complex)?;
            let v = match trace {
                Some(t) => {
                    let trace: LcTrace = fs::read_to_string(t)?.parse()?;
                    certify_lc(&k, &trace)
                }
                None => verify(&k)?,
            };
            let mut r = Report::new()
                .add("outcome", v.outcome)
                .add("spanning", v.spanning)
                .add("n", k.n())
                .add("facets", k.num_facets());
            if let Some(reason) = &v.reason {
                r = r.add("reason", format!("{reason:?}").replace(' ', ""));
            }
            say(fmt, r);
            Ok(v.passed())
        }
        Command::Construct { d, n, model, method } => {
            let method = method.unwrap_or(Method::default_for(model));
            let o = WeightOracle::new(seed, model.cost_model(d));
            let b = construct(d, n, method, &o)?;
            if let Some(p) = out {
                write_text(p, &b.complex.to_string())?;
            }
            say(fmt, Report::new().add("cost", decimal(b.cost)).add("facets", b.complex.num_facets()));
            Ok(true)
        }
        Command::Oracle(OracleCommand::Enumerate { n }) => {
            let e = enumerate_2spheres(n)?;
            say(
                fmt,
                Report::new().add("count", e.labeled_count).add("classes", e.classes.len()).add("orbit_sum", e.orbit_count()),
            );
            Ok(true)
        }
        Command::Oracle(OracleCommand::Min { n }) => {
            let (k, min) = min_spanning_sphere_exact(n, &WeightOracle::facets(seed, 2))?;
            if let Some(p) = out {
                write_text(p, &k.to_string())?;
            }
            say(fmt, Report::new().add("min", decimal(min)));
            Ok(true)
        }
        Command::Oracle(OracleCommand::Patch { n, complex }) => {
            let h = read_complex(&complex)?;
            let q = patch_exact(&h, n, &WeightOracle::facets(seed, 2))?;
            say(fmt, Report::new().add("rho", q.rho).add("patch", decimal(q.patch_cost)));
            Ok(true)
        }
        Command::Bounds { d, n, beta, b, delta } => {
            let mut p = BoundsParams::new(d, n);
            if let Some(x) = beta {
                p.beta = x;
            }
            if let Some(x) = b {
                p.b = x;
            }
            if let Some(x) = delta {
                p.delta = x;
            }
            let report = bounds_report(p)?.to_string();
            match fmt {
                Format::Csv => print!("{report}"),
                Format::Json => {
                    let pairs = report.lines().filter_map(|l| l.split_once('=')).fold(Report::new(), |r, (k, v)| r.add(k, v));
                    say(fmt, pairs);
                }
            }
            Ok(true)
        }
        Command::Patch { complex, witness, s } => {
            let h = read_complex(&complex)?;
            let w = read_complex(&witness)?;
            let k = w.facets().iter().filter(|f| !h.contains_facet(f)).count();
            match patch_2sphere(&h, &w, &WeightOracle::facets(seed, 2), s) {
                Ok(r) => {
                    if let Some(p) = out {
                        write_text(p, &r.final_sphere.to_string())?;
                    }
                    say(fmt, Report::new().add("patchcost", decimal(r.cost)).add("k", r.k).add("ok", true));
                    Ok(true)
                }
                Err(e) => {
                    eprintln!("patch failed: {e}");
                    say(fmt, Report::new().add("patchcost", "nan").add("k", k).add("ok", false));
                    Ok(false)
                }
            }
        }
        Command::Boltzmann { n, beta, steps, thin, trace } => {
            let beta: Beta = beta.parse()?;
            let o = WeightOracle::facets(spansphere::derive_seed(seed, "boltzmann-weights", 0), 2);
            let r = run_chain(n, beta, &o, steps, seed, thin)?;
            if let Some(p) = trace {
                let mut t = Table::new(&["step", "cost", "accepted"]);
                for pt in &r.trace {
                    t.push(vec![pt.step.to_string(), decimal(pt.cost), pt.accepted.to_string()]);
                }
                t.emit(Format::Csv, Some(&p))?;
            }
            if let Some(p) = out {
                write_text(p, &r.final_sphere.to_string())?;
            }
            say(
                fmt,
                Report::new()
                    .add("mode", if beta.is_descent() { "descent" } else { "sampler" })
                    .add("beta", beta)
                    .add("steps", steps)
                    .add("final_cost", decimal(r.final_cost))
                    .add("mean_cost", decimal(r.mean_cost))
                    .add("acceptance", decimal(r.acceptance_rate)),
            );
            Ok(true)
        }
        Command::Exp(ExpCommand::Scaling { grid, method }) => {
            let cfg = ScalingConfig {
                d: grid.d,
                model: grid.model,
                grid: parse_grid(&grid.grid)?,
                trials: grid.trials,
                method: method.unwrap_or(Method::default_for(grid.model)),
                seed,
            };
            let (records, fit) = exp_scaling(&cfg)?;
            let mut t = Table::new(&ExperimentRecord::HEADER);
            for r in &records {
                t.push(r.fields().to_vec());
            }
            t.emit(fmt, out)?;
            let mut summary = String::new();
            for row in &fit.rows {
                summary += &format!(
                    "n={} median={} q1={} q3={}\n",
                    row.n,
                    decimal(row.median),
                    decimal(row.q1),
                    decimal(row.q3)
                );
            }
            summary += &format!(
                "slope={} slope_se={} intercept={} intercept_se={} dropped={}\n",
                decimal(fit.fit.slope),
                decimal(fit.fit.slope_se),
                decimal(fit.fit.intercept),
                decimal(fit.fit.intercept_se),
                fit.dropped.map_or("none".to_string(), |n| n.to_string())
            );
            side_channel(out, &summary);
            Ok(true)
        }
        Command::Exp(ExpCommand::Conc { grid }) => {
            let (_, rows) = exp_concentration(grid.d, grid.model, &parse_grid(&grid.grid)?, grid.trials, seed)?;
            let mut t = Table::new(&["n", "trials", "median", "stdev", "stdev_over_median", "exact"]);
            for r in rows {
                t.push(vec![
                    r.n.to_string(),
                    r.trials.to_string(),
                    decimal(r.median),
                    r.stdev.map(decimal).unwrap_or_default(),
                    r.ratio.map(decimal).unwrap_or_default(),
                    r.exact.to_string(),
                ]);
            }
            t.emit(fmt, out)?;
            Ok(true)
        }
        Command::Exp(ExpCommand::Degrees { sampler, beta, n, samples, steps }) => {
            let sampler = match sampler {
                SamplerName::Lc => DegreeSampler::Lc,
                SamplerName::Boltzmann => {
                    let beta: Beta = beta.parse()?;
                    match steps {
                        Some(steps) => DegreeSampler::Boltzmann { beta, steps },
                        None => DegreeSampler::boltzmann(beta, n),
                    }
                }
            };
            let h = exp_degree_histogram(sampler, n, samples, seed)?;
            let mut t = Table::new(&["degree", "count"]);
            for (k, c) in &h.counts {
                t.push(vec![k.to_string(), c.to_string()]);
            }
            t.emit(fmt, out)?;
            side_channel(out, &format!("sampler={sampler} n={n} samples={samples}\n"));
            Ok(true)
        }
    }
}

/// Summaries go to stdout when the table went to a file, else to stderr.
fn side_channel(out: Option<&Path>, text: &str) {
    if out.is_some() {
        print!("{text}");
    } else {
        let _ = std::io::stderr().write_all(text.as_bytes());
    }
}

fn main() -> ExitCode {
    let args = match config::merge(&Cli::command(), std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = Cli::parse_from(args);
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
