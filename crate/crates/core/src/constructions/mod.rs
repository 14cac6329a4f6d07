//! Explicit cheap spheres: the pole-and-cycle family with a TSP-chosen cycle,
//! and the greedy tight-path sphere for edge costs.

mod tight_path;
mod tsp;

pub use tight_path::{block_analysis, block_size, tight_path_from_word, tight_path_sphere, BlockStat, TightPath};
pub use tsp::{hamilton_heuristic, pole_edge_costs, DenseCosts, PoleEdgeCosts, TourCosts, TourMethod, Tour, EXACT_LIMIT};

use crate::cost::{CostModel, WeightOracle};
use crate::error::{Error, Result};
use crate::simplex::{PureComplex, Simplex, Vertex};

/// A member of the pole/cycle family: poles `1..=d`, a Hamilton cycle on
/// `d+1..=n`, and facets `{f_xy - {p}}` for every cycle edge `xy` and pole `p`,
/// where `f_xy` is the poles plus `x` and `y`.
#[derive(Clone, Debug, PartialEq)]
pub struct PoleCycleSphere {
    pub d: usize,
    pub poles: Vec<Vertex>,
    pub cycle: Vec<Vertex>,
    pub complex: PureComplex,
}

impl PoleCycleSphere {
    pub fn n(&self) -> u32 {
        self.complex.n()
    }
}

/// The standard member with cycle `d+1, d+2, ..., n`.
pub fn s_star(n: u32, d: usize) -> Result<PoleCycleSphere> {
    if d == 0 {
        return Err(Error::UnsupportedDimension(0));
    }
    if (n as usize) < d + 3 {
        return Err(Error::TooFewVertices { needed: d as u32 + 3, got: n });
    }
    let cycle: Vec<Vertex> = (d as u32 + 1..=n).collect();
    sphere_from_cycle(&cycle, d)
}

/// The pole/cycle sphere for an arbitrary cyclic order of `d+1..=n`.
pub fn sphere_from_cycle(cycle: &[Vertex], d: usize) -> Result<PoleCycleSphere> {
    if d == 0 || d + 2 > crate::simplex::MAX_SIMPLEX_VERTICES {
        return Err(Error::UnsupportedDimension(d));
    }
    if cycle.len() < 3 {
        return Err(Error::InvalidCycle(format!("length {} is below 3", cycle.len())));
    }
    let n = (d + cycle.len()) as u32;
    let mut seen = vec![false; n as usize + 1];
    for &v in cycle {
        if v <= d as u32 || v > n {
            return Err(Error::InvalidCycle(format!("vertex {v} is not in {}..={n}", d + 1)));
        }
        if std::mem::replace(&mut seen[v as usize], true) {
            return Err(Error::InvalidCycle(format!("vertex {v} repeated")));
        }
    }
    let poles: Vec<Vertex> = (1..=d as u32).collect();
    let mut facets = Vec::with_capacity(d * cycle.len());
    for i in 0..cycle.len() {
        let (x, y) = (cycle[i], cycle[(i + 1) % cycle.len()]);
        for &p in &poles {
            let mut verts: Vec<Vertex> = poles.iter().copied().filter(|&q| q != p).collect();
            verts.push(x.min(y));
            verts.push(x.max(y));
            facets.push(Simplex::from_sorted(&verts));
        }
    }
    Ok(PoleCycleSphere { d, poles, cycle: cycle.to_vec(), complex: PureComplex::new(d, n, facets)? })
}

/// Pole/cycle sphere whose cycle is a heuristic TSP tour under the induced
/// pair costs. Returns the sphere and its facet cost.
pub fn build_cone_sphere(n: u32, d: usize, oracle: &WeightOracle, method: TourMethod) -> Result<(PoleCycleSphere, f64)> {
    if oracle.model() != CostModel::Facet(d) {
        return Err(Error::WrongModel { simplex: Simplex::from_sorted(&[]), model: oracle.model().to_string() });
    }
    if (n as usize) < d + 3 {
        return Err(Error::TooFewVertices { needed: d as u32 + 3, got: n });
    }
    let costs = pole_edge_costs(oracle, n, d)?;
    let tour = hamilton_heuristic(&costs, method)?;
    let cycle: Vec<Vertex> = tour.order.iter().map(|&i| costs.vertex(i)).collect();
    let sphere = sphere_from_cycle(&cycle, d)?;
    let cost = oracle.complex_cost(&sphere.complex)?;
    debug_assert_eq!(cost, tour.cost, "tour cost and facet cost must agree exactly");
    Ok((sphere, cost))
}
