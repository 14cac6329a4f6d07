//! Hamilton cycles on complete graphs with symmetric costs.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use crate::cost::{ticks_to_cost, CostModel, WeightOracle, TICK};
use crate::error::{Error, Result};
use crate::simplex::{Simplex, Vertex, MAX_SIMPLEX_VERTICES};

/// Largest instance the subset dynamic program accepts.
pub const EXACT_LIMIT: usize = 14;

const NEIGHBORS: usize = 10;
const IMPROVEMENT_EPS: f64 = 1e-12;

/// Symmetric cost table over cities `0..cities()`.
pub trait TourCosts: Sync {
    fn cities(&self) -> usize;

    fn cost(&self, i: usize, j: usize) -> f64;

    /// Cyclic tour length. Implementations may sum exactly.
    fn tour_cost(&self, order: &[usize]) -> f64 {
        let k = order.len();
        (0..k).map(|i| self.cost(order[i], order[(i + 1) % k])).sum()
    }
}

/// A materialized table, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseCosts {
    n: usize,
    data: Vec<f64>,
}

impl DenseCosts {
    pub fn new(n: usize) -> Self {
        DenseCosts { n, data: vec![0.0; n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut t = Self::new(n);
        for i in 0..n {
            for j in i + 1..n {
                t.set(i, j, f(i, j));
            }
        }
        t
    }

    pub fn set(&mut self, i: usize, j: usize, c: f64) {
        self.data[i * self.n + j] = c;
        self.data[j * self.n + i] = c;
    }
}

impl TourCosts for DenseCosts {
    fn cities(&self) -> usize {
        self.n
    }

    fn cost(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }
}

/// Induced pair costs on the cycle vertices of a pole/cycle sphere:
/// `w_xy` is the summed cost of the `d` facets `f_xy - {p}`. Evaluated on
/// demand; city `i` is vertex `d + 1 + i`.
#[derive(Clone, Copy, Debug)]
pub struct PoleEdgeCosts {
    oracle: WeightOracle,
    d: usize,
    n: u32,
}

impl PoleEdgeCosts {
    pub fn vertex(&self, city: usize) -> Vertex {
        (self.d + 1 + city) as Vertex
    }

    /// The facets whose costs make up `w_xy`.
    pub fn facets_of(&self, x: Vertex, y: Vertex) -> Vec<Simplex> {
        let (lo, hi) = (x.min(y), x.max(y));
        (1..=self.d as Vertex)
            .map(|p| {
                let mut v: Vec<Vertex> = (1..=self.d as Vertex).filter(|&q| q != p).collect();
                v.push(lo);
                v.push(hi);
                Simplex::from_sorted(&v)
            })
            .collect()
    }

    #[inline]
    pub fn ticks(&self, i: usize, j: usize) -> u64 {
        let (x, y) = (self.vertex(i), self.vertex(j));
        let (lo, hi) = (x.min(y), x.max(y));
        let mut buf = [0 as Vertex; MAX_SIMPLEX_VERTICES];
        let d = self.d;
        let mut total = 0u64;
        for p in 1..=d as Vertex {
            let mut k = 0;
            for q in 1..=d as Vertex {
                if q != p {
                    buf[k] = q;
                    k += 1;
                }
            }
            buf[k] = lo;
            buf[k + 1] = hi;
            total += self.oracle.raw_ticks(&buf[..k + 2]);
        }
        total
    }
}

impl TourCosts for PoleEdgeCosts {
    fn cities(&self) -> usize {
        self.n as usize - self.d
    }

    #[inline]
    fn cost(&self, i: usize, j: usize) -> f64 {
        self.ticks(i, j) as f64 * TICK
    }

    fn tour_cost(&self, order: &[usize]) -> f64 {
        let k = order.len();
        ticks_to_cost((0..k).map(|i| self.ticks(order[i], order[(i + 1) % k]) as u128).sum())
    }
}

/// Pair costs `w_xy` on `d+1..=n` induced by facet costs.
pub fn pole_edge_costs(oracle: &WeightOracle, n: u32, d: usize) -> Result<PoleEdgeCosts> {
    if oracle.model() != CostModel::Facet(d) {
        return Err(Error::WrongModel { simplex: Simplex::from_sorted(&[]), model: oracle.model().to_string() });
    }
    if d == 0 || d + 2 > MAX_SIMPLEX_VERTICES {
        return Err(Error::UnsupportedDimension(d));
    }
    if (n as usize) < d + 3 {
        return Err(Error::TooFewVertices { needed: d as u32 + 3, got: n });
    }
    Ok(PoleEdgeCosts { oracle: *oracle, d, n })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TourMethod {
    /// Nearest-neighbour tour from city 0.
    Greedy,
    /// Nearest-neighbour tour improved by first-improvement 2-opt.
    Greedy2Opt,
    /// Optimal tour by dynamic programming over subsets.
    Exact,
}

impl TourMethod {
    pub const ALL: [TourMethod; 3] = [TourMethod::Greedy, TourMethod::Greedy2Opt, TourMethod::Exact];
}

impl fmt::Display for TourMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TourMethod::Greedy => "greedy",
            TourMethod::Greedy2Opt => "greedy2opt",
            TourMethod::Exact => "exact",
        })
    }
}

impl FromStr for TourMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(TourMethod::Greedy),
            "greedy2opt" => Ok(TourMethod::Greedy2Opt),
            "exact" => Ok(TourMethod::Exact),
            other => Err(Error::InvalidParameter(format!("unknown tour method `{other}`"))),
        }
    }
}

/// A Hamilton cycle, normalized to start at city 0 with `order[1] < order[last]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tour {
    pub order: Vec<usize>,
    pub cost: f64,
}

pub fn hamilton_heuristic<C: TourCosts + ?Sized>(costs: &C, method: TourMethod) -> Result<Tour> {
    let n = costs.cities();
    if n < 3 {
        return Err(Error::TooSmall(format!("a Hamilton cycle needs 3 cities, got {n}")));
    }
    let order = match method {
        TourMethod::Exact => {
            if n > EXACT_LIMIT {
                return Err(Error::TooLargeForExact { cities: n, limit: EXACT_LIMIT });
            }
            held_karp(costs)
        }
        TourMethod::Greedy => {
            let nbrs = neighbor_lists(costs, NEIGHBORS.min(n - 1));
            nearest_neighbor(costs, &nbrs)
        }
        TourMethod::Greedy2Opt => {
            let nbrs = neighbor_lists(costs, NEIGHBORS.min(n - 1));
            let mut order = nearest_neighbor(costs, &nbrs);
            two_opt(costs, &nbrs, &mut order, 50 * n);
            order
        }
    };
    let order = normalize(order);
    let cost = costs.tour_cost(&order);
    Ok(Tour { order, cost })
}

fn normalize(mut order: Vec<usize>) -> Vec<usize> {
    let start = order.iter().position(|&c| c == 0).expect("tour visits city 0");
    order.rotate_left(start);
    if order.len() > 2 && order[1] > order[order.len() - 1] {
        order[1..].reverse();
    }
    order
}

/// The `k` cheapest partners of every city, ascending by (cost, index).
fn neighbor_lists<C: TourCosts + ?Sized>(costs: &C, k: usize) -> Vec<Vec<(f64, usize)>> {
    let n = costs.cities();
    let mut lists: Vec<Vec<(f64, usize)>> = vec![Vec::with_capacity(k + 1); n];
    let insert = |list: &mut Vec<(f64, usize)>, entry: (f64, usize)| {
        if list.len() == k && !less(entry, list[k - 1]) {
            return;
        }
        let at = list.partition_point(|&e| less(e, entry));
        list.insert(at, entry);
        list.truncate(k);
    };
    for i in 0..n {
        for j in i + 1..n {
            let c = costs.cost(i, j);
            insert(&mut lists[i], (c, j));
            insert(&mut lists[j], (c, i));
        }
    }
    lists
}

#[inline]
fn less(a: (f64, usize), b: (f64, usize)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}

fn nearest_neighbor<C: TourCosts + ?Sized>(costs: &C, nbrs: &[Vec<(f64, usize)>]) -> Vec<usize> {
    let n = costs.cities();
    let mut unvisited: Vec<usize> = (1..n).collect();
    let mut slot: Vec<usize> = vec![usize::MAX; n];
    for (i, &c) in unvisited.iter().enumerate() {
        slot[c] = i;
    }
    let mut order = Vec::with_capacity(n);
    let mut cur = 0;
    order.push(cur);
    while !unvisited.is_empty() {
        // The first unvisited entry of a sorted candidate list is the nearest overall.
        let next = match nbrs[cur].iter().find(|&&(_, c)| slot[c] != usize::MAX) {
            Some(&(_, c)) => c,
            None => {
                let mut best = (f64::INFINITY, usize::MAX);
                for &c in &unvisited {
                    let e = (costs.cost(cur, c), c);
                    if less(e, best) {
                        best = e;
                    }
                }
                best.1
            }
        };
        let i = slot[next];
        let last = *unvisited.last().unwrap();
        unvisited.swap_remove(i);
        if last != next {
            slot[last] = i;
        }
        slot[next] = usize::MAX;
        order.push(next);
        cur = next;
    }
    order
}

/// First-improvement 2-opt over candidate lists with a work queue of
/// cities whose neighbourhood changed.
fn two_opt<C: TourCosts + ?Sized>(costs: &C, nbrs: &[Vec<(f64, usize)>], order: &mut [usize], max_swaps: usize) {
    let n = order.len();
    if n < 5 {
        return;
    }
    let mut pos = vec![0usize; n];
    for (i, &c) in order.iter().enumerate() {
        pos[c] = i;
    }
    let mut queued = vec![true; n];
    let mut queue: VecDeque<usize> = order.iter().copied().collect();
    let mut swaps = 0;

    while let Some(a) = queue.pop_front() {
        queued[a] = false;
        if swaps >= max_swaps {
            break;
        }
        'search: for forward in [true, false] {
            let step = |p: usize| if forward { (p + 1) % n } else { (p + n - 1) % n };
            let b = order[step(pos[a])];
            let d_ab = costs.cost(a, b);
            for &(d_ac, c) in &nbrs[a] {
                if d_ac >= d_ab - IMPROVEMENT_EPS {
                    break;
                }
                if c == b {
                    continue;
                }
                let d = order[step(pos[c])];
                if d == a {
                    continue;
                }
                let delta = d_ab + costs.cost(c, d) - d_ac - costs.cost(b, d);
                if delta > IMPROVEMENT_EPS {
                    if forward {
                        let (i, j) = (pos[b], pos[c]);
                        reverse(order, &mut pos, i, j);
                    } else {
                        let (i, j) = (pos[a], pos[d]);
                        reverse(order, &mut pos, i, j);
                    }
                    swaps += 1;
                    for x in [a, b, c, d] {
                        if !queued[x] {
                            queued[x] = true;
                            queue.push_back(x);
                        }
                    }
                    break 'search;
                }
            }
        }
    }
}

/// Reverses the circular segment running forward from position `i` to `j`,
/// or its complement when that is shorter (same cycle either way).
fn reverse(order: &mut [usize], pos: &mut [usize], i: usize, j: usize) {
    let n = order.len();
    let mut len = (j + n - i) % n + 1;
    let (mut lo, mut hi) = (i, j);
    if 2 * len > n {
        lo = (j + 1) % n;
        hi = (i + n - 1) % n;
        len = n - len;
    }
    for _ in 0..len / 2 {
        order.swap(lo, hi);
        pos[order[lo]] = lo;
        pos[order[hi]] = hi;
        lo = (lo + 1) % n;
        hi = (hi + n - 1) % n;
    }
}

fn held_karp<C: TourCosts + ?Sized>(costs: &C) -> Vec<usize> {
    let n = costs.cities();
    let m = n - 1; // city 0 is the fixed start
    let full = 1usize << m;
    let mut best = vec![f64::INFINITY; full * m];
    let mut parent = vec![usize::MAX; full * m];
    for j in 0..m {
        best[(1 << j) * m + j] = costs.cost(0, j + 1);
    }
    for set in 1..full {
        for j in 0..m {
            if set & (1 << j) == 0 {
                continue;
            }
            let cur = best[set * m + j];
            if !cur.is_finite() {
                continue;
            }
            for k in 0..m {
                if set & (1 << k) != 0 {
                    continue;
                }
                let next = set | (1 << k);
                let c = cur + costs.cost(j + 1, k + 1);
                if c < best[next * m + k] {
                    best[next * m + k] = c;
                    parent[next * m + k] = j;
                }
            }
        }
    }
    let last_set = full - 1;
    let mut end = 0;
    let mut best_total = f64::INFINITY;
    for j in 0..m {
        let c = best[last_set * m + j] + costs.cost(j + 1, 0);
        if c < best_total {
            best_total = c;
            end = j;
        }
    }
    let mut order = Vec::with_capacity(n);
    let (mut set, mut j) = (last_set, end);
    loop {
        order.push(j + 1);
        let p = parent[set * m + j];
        set &= !(1 << j);
        if p == usize::MAX {
            break;
        }
        j = p;
    }
    order.push(0);
    order.reverse();
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_table(n: usize, seed: u64) -> DenseCosts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DenseCosts::from_fn(n, |_, _| rng.gen::<f64>())
    }

    fn brute_force(costs: &DenseCosts) -> f64 {
        fn rec(c: &DenseCosts, path: &mut Vec<usize>, used: &mut [bool], best: &mut f64) {
            let n = c.cities();
            if path.len() == n {
                *best = best.min(c.tour_cost(path));
                return;
            }
            for v in 1..n {
                if !used[v] {
                    used[v] = true;
                    path.push(v);
                    rec(c, path, used, best);
                    path.pop();
                    used[v] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        let mut used = vec![false; costs.cities()];
        used[0] = true;
        rec(costs, &mut vec![0], &mut used, &mut best);
        best
    }

    fn is_permutation(order: &[usize], n: usize) -> bool {
        let mut seen = vec![false; n];
        order.len() == n && order.iter().all(|&c| c < n && !std::mem::replace(&mut seen[c], true))
    }

    #[test]
    fn three_cities_single_cycle() {
        let t = random_table(3, 1);
        for m in TourMethod::ALL {
            let tour = hamilton_heuristic(&t, m).unwrap();
            assert_eq!(tour.order, vec![0, 1, 2]);
        }
    }

    #[test]
    fn exact_finds_planted_tour() {
        // Cycle 0-1-2-3 costs 1 per edge; diagonals cost 10. Three distinct tours exist.
        let mut t = DenseCosts::new(4);
        for (i, j) in [(0, 1), (1, 2), (2, 3), (0, 3)] {
            t.set(i, j, 1.0);
        }
        t.set(0, 2, 10.0);
        t.set(1, 3, 10.0);
        let tour = hamilton_heuristic(&t, TourMethod::Exact).unwrap();
        assert_eq!(tour.order, vec![0, 1, 2, 3]);
        assert_eq!(tour.cost, 4.0);
    }

    #[test]
    fn method_ordering_on_random_instances() {
        for seed in 0..1000 {
            let t = random_table(8, seed);
            let g = hamilton_heuristic(&t, TourMethod::Greedy).unwrap();
            let g2 = hamilton_heuristic(&t, TourMethod::Greedy2Opt).unwrap();
            let ex = hamilton_heuristic(&t, TourMethod::Exact).unwrap();
            assert!(ex.cost <= g2.cost + 1e-12, "seed {seed}");
            assert!(g2.cost <= g.cost + 1e-12, "seed {seed}");
            assert!(is_permutation(&g2.order, 8));
            if seed < 100 {
                assert!((ex.cost - brute_force(&t)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn large_instances_produce_permutations() {
        let t = random_table(300, 5);
        let g = hamilton_heuristic(&t, TourMethod::Greedy).unwrap();
        let g2 = hamilton_heuristic(&t, TourMethod::Greedy2Opt).unwrap();
        assert!(is_permutation(&g.order, 300));
        assert!(is_permutation(&g2.order, 300));
        assert!(g2.cost < g.cost);
        assert!(matches!(hamilton_heuristic(&t, TourMethod::Exact), Err(Error::TooLargeForExact { .. })));
    }

    #[test]
    fn nearest_neighbor_matches_full_scan() {
        let t = random_table(60, 9);
        let order = hamilton_heuristic(&t, TourMethod::Greedy).unwrap().order;
        // Recompute the plain O(n^2) nearest-neighbour tour.
        let mut plain = vec![0usize];
        let mut used = [false; 60];
        used[0] = true;
        for _ in 1..60 {
            let cur = *plain.last().unwrap();
            let next = (0..60).filter(|&c| !used[c]).min_by(|&a, &b| t.cost(cur, a).total_cmp(&t.cost(cur, b))).unwrap();
            used[next] = true;
            plain.push(next);
        }
        assert_eq!(order, normalize(plain));
    }

    #[test]
    fn pole_edge_costs_expand_the_facet_sum() {
        let o = WeightOracle::facets(3, 2);
        let w = pole_edge_costs(&o, 5, 2).unwrap();
        // cities 0,1 are vertices 3,4
        let expected = o.simplex_cost(&Simplex::triangle(1, 3, 4)).unwrap() + o.simplex_cost(&Simplex::triangle(2, 3, 4)).unwrap();
        assert!((w.cost(0, 1) - expected).abs() < 1e-15);
        assert_eq!(w.cost(0, 1), w.cost(1, 0));

        let o1 = WeightOracle::facets(3, 1);
        let w1 = pole_edge_costs(&o1, 6, 1).unwrap();
        assert_eq!(w1.cost(0, 2), o1.simplex_cost(&Simplex::edge(2, 4)).unwrap());
        assert!(pole_edge_costs(&WeightOracle::edges(1), 6, 2).is_err());
    }

    #[test]
    fn pole_edge_cost_law() {
        // P(w <= t) = t^d / d! for t <= 1; d = 2, t = 1/2 gives 1/8.
        let o = WeightOracle::facets(17, 2);
        let w = pole_edge_costs(&o, 452, 2).unwrap();
        let mut hits = 0usize;
        let mut total = 0usize;
        'outer: for i in 0..450 {
            for j in i + 1..450 {
                total += 1;
                if w.cost(i, j) <= 0.5 {
                    hits += 1;
                }
                if total == 100_000 {
                    break 'outer;
                }
            }
        }
        let frac = hits as f64 / total as f64;
        assert!((frac - 0.125).abs() < 0.01, "fraction {frac}");
    }
}
