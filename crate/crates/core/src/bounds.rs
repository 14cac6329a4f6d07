//! Closed-form calculators: uniform-sum tails, triangulation counts, the
//! first-moment lower threshold and the named constants.
//!
//! Large products are evaluated in log space, so `n` up to 10^6 is fine.

use std::f64::consts::{E, PI};
use std::fmt;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};

use crate::error::{Error, Result};
use crate::stats::decimal;

/// `ln m!` via log-gamma.
pub fn ln_factorial(m: u64) -> f64 {
    libm::lgamma(m as f64 + 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailBound {
    /// `L^m / m!`.
    pub exact_bound: f64,
    /// `(L e / m)^m`.
    pub stirling_bound: f64,
    pub ln_exact: f64,
    pub ln_stirling: f64,
}

/// Upper bounds on `Pr(U_1 + ... + U_m <= L)` for i.i.d. `U[0,1]`. The first
/// is the exact probability when `L <= 1`.
pub fn uniform_sum_tail(l: f64, m: u64) -> Result<TailBound> {
    if l.is_nan() || l < 0.0 || !l.is_finite() {
        return Err(Error::InvalidParameter(format!("L must be a finite non-negative number, got {l}")));
    }
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    let mf = m as f64;
    let ln_l = l.ln();
    let ln_exact = mf * ln_l - ln_factorial(m);
    let ln_stirling = mf * (ln_l + 1.0 - mf.ln());
    Ok(TailBound { exact_bound: ln_exact.exp(), stirling_bound: ln_stirling.exp(), ln_exact, ln_stirling })
}

/// `L^m / m!` in exact rational arithmetic.
pub fn uniform_sum_tail_exact(l: &BigRational, m: u32) -> BigRational {
    let fact: BigInt = (1..=m as u64).map(BigInt::from).product();
    l.pow(m as i32) / BigRational::from_integer(fact)
}

/// Counts of 2-sphere triangulations on `n` vertices, as natural logs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TutteCounts {
    pub n: u64,
    /// Asymptotic number of rooted unlabeled triangulations.
    pub ln_b: f64,
    /// Upper bound on labeled spanning 2-spheres, `(256 n / 27 e)^n`.
    pub ln_a_upper: f64,
    /// The asymptotic formula is only indicative for small `n`.
    pub indicative_only: bool,
}

/// Below this many vertices the asymptotic count is flagged as indicative.
pub const TUTTE_ASYMPTOTIC_FROM: u64 = 20;

pub fn tutte_counts(n: u64) -> Result<TutteCounts> {
    if n < 4 {
        return Err(Error::TooSmall(format!("n={n}, need at least 4")));
    }
    let nf = n as f64;
    let ln_gamma = (256.0f64 / 27.0).ln();
    let ln_b = ((1.5 * PI).sqrt() / 16.0).ln() - 2.5 * nf.ln() + (nf + 1.0) * ln_gamma;
    let ln_a_upper = nf * (256.0 * nf / (27.0 * E)).ln();
    Ok(TutteCounts { n, ln_b, ln_a_upper, indicative_only: n < TUTTE_ASYMPTOTIC_FROM })
}

/// Inputs of the first-moment lower bound for a family of `d`-spheres.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundsParams {
    pub d: usize,
    pub n: u64,
    /// Entropy exponent: at most `b^m m^(beta m)` members with `m` facets.
    pub beta: Ratio<i64>,
    pub b: f64,
    /// In `(0, 1)`; smaller values give a smaller threshold and a stronger tail.
    pub delta: f64,
}

impl BoundsParams {
    /// Defaults: `beta = 1/2` and `b = sqrt(128 / 27e)` for `d = 2` (from the
    /// labeled count), `beta = 8/21` for `d = 3`, `beta = 1` above, `b = 1`
    /// otherwise, and `delta = 1/2`.
    pub fn new(d: usize, n: u64) -> Self {
        let (beta, b) = match d {
            2 => (Ratio::new(1, 2), (128.0 / (27.0 * E)).sqrt()),
            3 => (Ratio::new(8, 21), 1.0),
            _ => (Ratio::from_integer(1), 1.0),
        };
        BoundsParams { d, n, beta, b, delta: 0.5 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FirstMoment {
    /// Fewest facets of a `d`-sphere on `n` vertices, `dn - (d-1)(d+2)`.
    pub m0: u64,
    /// `delta / (e b) * m0^(1 - beta)`: whp every member costs more than this.
    pub l: f64,
    /// `ln(delta^m0 / (1 - delta))`, the log of the failure probability bound.
    pub ln_failure: f64,
}

pub fn min_facets(d: usize, n: u64) -> Result<u64> {
    if d == 0 {
        return Err(Error::UnsupportedDimension(0));
    }
    let (d64, need) = (d as u64, (d as u64 - 1) * (d as u64 + 2));
    if d64 * n <= need {
        return Err(Error::InvalidParameter(format!("no {d}-sphere on {n} vertices")));
    }
    Ok(d64 * n - need)
}

pub fn first_moment_threshold(p: &BoundsParams) -> Result<FirstMoment> {
    let beta = ratio_f64(&p.beta);
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::InvalidParameter(format!("beta must lie in (0, 1], got {}", p.beta)));
    }
    if p.b.is_nan() || p.b <= 0.0 {
        return Err(Error::InvalidParameter(format!("b must be positive, got {}", p.b)));
    }
    if !(p.delta > 0.0 && p.delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0, 1), got {}", p.delta)));
    }
    let m0 = min_facets(p.d, p.n)?;
    let l = p.delta / (E * p.b) * (m0 as f64).powf(1.0 - beta);
    let ln_failure = m0 as f64 * p.delta.ln() - (1.0 - p.delta).ln();
    Ok(FirstMoment { m0, l, ln_failure })
}

fn ratio_f64(r: &Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `sqrt(e / (gamma n))`, the edge probability at which the cone cycle exists.
pub fn p_c(n: f64) -> f64 {
    (E / (256.0 / 27.0 * n)).sqrt()
}

/// Scaling exponents of the minimum cost of a `d`-sphere.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Exponents {
    /// `1 - beta_d`, from the first-moment lower bound.
    pub lower: Ratio<i64>,
    /// `1 - 1/d`, from the cone construction.
    pub upper: Ratio<i64>,
}

pub fn exponents(d: usize, beta: Ratio<i64>) -> Exponents {
    let one = Ratio::from_integer(1);
    Exponents { lower: one - beta, upper: one - Ratio::new(1, d as i64) }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NamedConstants {
    /// `sqrt(27 / (64 e))`, the d = 2 lower constant.
    pub alpha: f64,
    pub e_alpha_half: f64,
    /// `256/27`.
    pub gamma: Ratio<i64>,
    /// `9 / (4^(4/3) e^(2/3))`, the edge-model lower constant.
    pub edge_lower: f64,
    /// Known upper bounds on the `gamma_d` entropy constants.
    pub gamma_d: Vec<(usize, Ratio<i64>)>,
    /// Exponents for `d = 3` with `beta_3 = 8/21`.
    pub exponents_d3: Exponents,
}

pub fn named_constants() -> NamedConstants {
    let alpha = (27.0 / (64.0 * E)).sqrt();
    NamedConstants {
        alpha,
        e_alpha_half: E * alpha / 2.0,
        gamma: Ratio::new(256, 27),
        edge_lower: 9.0 / (4f64.powf(4.0 / 3.0) * E.powf(2.0 / 3.0)),
        gamma_d: vec![(3, Ratio::new(1, 3)), (4, Ratio::new(3, 4))],
        exponents_d3: exponents(3, Ratio::new(8, 21)),
    }
}

/// Everything the `bounds` command prints for one `(d, n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundsReport {
    pub params: BoundsParams,
    pub first_moment: FirstMoment,
    pub exponents: Exponents,
    pub tutte: Option<TutteCounts>,
    pub constants: NamedConstants,
}

pub fn bounds_report(params: BoundsParams) -> Result<BoundsReport> {
    let first_moment = first_moment_threshold(&params)?;
    let tutte = if params.d == 2 { Some(tutte_counts(params.n)?) } else { None };
    Ok(BoundsReport {
        exponents: exponents(params.d, params.beta),
        first_moment,
        tutte,
        constants: named_constants(),
        params,
    })
}

impl fmt::Display for BoundsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.params;
        writeln!(f, "d={}", p.d)?;
        writeln!(f, "n={}", p.n)?;
        writeln!(f, "beta={}", p.beta)?;
        writeln!(f, "b={}", decimal(p.b))?;
        writeln!(f, "delta={}", decimal(p.delta))?;
        writeln!(f, "m0={}", self.first_moment.m0)?;
        writeln!(f, "L={}", decimal(self.first_moment.l))?;
        writeln!(f, "ln_failure={}", decimal(self.first_moment.ln_failure))?;
        writeln!(f, "exponent_lower={}", self.exponents.lower)?;
        writeln!(f, "exponent_upper={}", self.exponents.upper)?;
        if let Some(t) = &self.tutte {
            writeln!(f, "ln_B={}", decimal(t.ln_b))?;
            writeln!(f, "ln_A_upper={}", decimal(t.ln_a_upper))?;
            writeln!(f, "tutte_indicative_only={}", t.indicative_only)?;
        }
        let c = &self.constants;
        writeln!(f, "alpha={}", decimal(c.alpha))?;
        writeln!(f, "e_alpha_half={}", decimal(c.e_alpha_half))?;
        writeln!(f, "gamma={}", c.gamma)?;
        writeln!(f, "edge_lower={}", decimal(c.edge_lower))?;
        writeln!(f, "p_c={}", decimal(p_c(p.n as f64)))?;
        for (d, g) in &c.gamma_d {
            writeln!(f, "gamma_{d}_upper={g}")?;
        }
        Ok(())
    }
}
