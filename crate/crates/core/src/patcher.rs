//! Patching a 2-sphere with some facets removed.
//!
//! Given `H` inside a sphere `S` with `P = S - H` missing, cut out the
//! interior `Q` of a short separating cycle `C`, fill `C` by a disc `D`
//! without interior vertices, and re-insert the freed vertices by barycentric
//! subdivision: first of every red facet (`P` and `D`), then of green facets
//! until `Q` is used up. Each matching stage works inside one color class of
//! the dual graph so no facet cost enters two competing subdivisions.

use std::collections::{HashMap, HashSet, VecDeque};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cost::{derive_seed, ticks_to_cost, CostModel, WeightOracle};
use crate::error::{Error, Result};
use crate::simplex::{PureComplex, Simplex, Vertex};
use crate::verify::{verify, Outcome};

/// Smallest accepted size scale.
pub const MIN_S: usize = 14;
/// Number of BFS roots tried by the separator search.
const ROOTS: usize = 12;

#[derive(Clone, Debug, PartialEq)]
pub struct SeparatorResult {
    pub cycle: Vec<Vertex>,
    /// Interior vertices of the smaller side, ascending.
    pub q_set: Vec<Vertex>,
    pub q: usize,
    pub s: usize,
    /// `|C| <= 28 sqrt(s)`.
    pub length_ok: bool,
    /// `s/14 <= q <= s`.
    pub window_ok: bool,
}

impl SeparatorResult {
    pub fn len(&self) -> usize {
        self.cycle.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycle.is_empty()
    }
}

/// Facet adjacency of a closed 2-manifold, indexed by facet and edge.
struct Dual<'a> {
    facets: &'a [Simplex],
    edge_id: HashMap<(Vertex, Vertex), usize>,
    facet_edges: Vec<[usize; 3]>,
    edge_facets: Vec<[usize; 2]>,
    /// One facet through each vertex, `usize::MAX` for unused labels.
    star_of: Vec<usize>,
}

fn key(a: Vertex, b: Vertex) -> (Vertex, Vertex) {
    (a.min(b), a.max(b))
}

fn facet_edges(f: &Simplex) -> [(Vertex, Vertex); 3] {
    let v = f.vertices();
    [(v[0], v[1]), (v[0], v[2]), (v[1], v[2])]
}

impl<'a> Dual<'a> {
    fn new(k: &'a PureComplex) -> Self {
        let facets = k.facets();
        let mut edge_id = HashMap::with_capacity(facets.len() * 2);
        let mut edge_facets: Vec<[usize; 2]> = Vec::with_capacity(facets.len() * 2);
        let mut star_of = vec![usize::MAX; k.n() as usize + 1];
        let facet_edges = facets
            .iter()
            .enumerate()
            .map(|(i, f)| {
                for &v in f.vertices() {
                    star_of[v as usize] = i;
                }
                facet_edges(f).map(|e| {
                    let id = *edge_id.entry(e).or_insert_with(|| {
                        edge_facets.push([usize::MAX; 2]);
                        edge_facets.len() - 1
                    });
                    let slot = &mut edge_facets[id];
                    if slot[0] == usize::MAX {
                        slot[0] = i;
                    } else {
                        slot[1] = i;
                    }
                    id
                })
            })
            .collect();
        Dual { facets, edge_id, facet_edges, edge_facets, star_of }
    }

    fn is_closed(&self) -> bool {
        self.edge_facets.iter().all(|p| p[1] != usize::MAX)
    }

    fn across(&self, i: usize, e: usize) -> usize {
        let p = self.edge_facets[e];
        if p[0] == i {
            p[1]
        } else {
            p[0]
        }
    }

    fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.facet_edges[i].into_iter().map(move |e| self.across(i, e))
    }
}

fn adjacency(k: &PureComplex) -> Vec<Vec<Vertex>> {
    let mut adj = vec![Vec::new(); k.n() as usize + 1];
    for (a, b) in k.edges() {
        adj[a as usize].push(b);
        adj[b as usize].push(a);
    }
    adj
}

/// A candidate cut: the cycle, its freed side and that side's facets.
struct Cut {
    cycle: Vec<Vertex>,
    q_set: Vec<Vertex>,
    inside: Vec<bool>,
}

/// Reusable marks for evaluating many cycles on one sphere.
struct Scratch {
    stamp: u32,
    cut: Vec<u32>,
    seen: Vec<u32>,
    on_cycle: Vec<u32>,
    queue: Vec<usize>,
}

/// Calls `visit` on the cut of every fundamental cycle of BFS trees from
/// `roots` whose smaller side has a size accepted by `size_ok`. Every simple
/// cycle in a triangulated sphere separates it into two discs; the side with
/// fewer interior vertices becomes `Q`.
fn for_each_cut(k: &PureComplex, dual: &Dual<'_>, roots: &[Vertex], size_ok: impl Fn(usize) -> bool, mut visit: impl FnMut(Cut)) {
    let adj = adjacency(k);
    let n = k.n() as usize;
    let edges = k.edges();
    let mut scratch = Scratch {
        stamp: 0,
        cut: vec![0; dual.edge_facets.len()],
        seen: vec![0; dual.facets.len()],
        on_cycle: vec![0; n + 1],
        queue: Vec::new(),
    };
    for &r in roots {
        let mut parent = vec![0 as Vertex; n + 1];
        let mut depth = vec![usize::MAX; n + 1];
        depth[r as usize] = 0;
        let mut queue = VecDeque::from([r]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u as usize] {
                if depth[v as usize] == usize::MAX {
                    depth[v as usize] = depth[u as usize] + 1;
                    parent[v as usize] = u;
                    queue.push_back(v);
                }
            }
        }
        for &(a, b) in &edges {
            if parent[b as usize] == a || parent[a as usize] == b {
                continue;
            }
            let (mut x, mut y) = (a, b);
            let (mut left, mut right) = (vec![x], vec![y]);
            while x != y {
                if depth[x as usize] >= depth[y as usize] {
                    x = parent[x as usize];
                    left.push(x);
                } else {
                    y = parent[y as usize];
                    right.push(y);
                }
            }
            right.pop();
            right.reverse();
            let mut cycle = left;
            cycle.extend(right);
            if cycle.len() < 3 {
                continue;
            }
            if let Some(c) = cut_along(k, dual, &mut scratch, cycle, &size_ok) {
                visit(c);
            }
        }
    }
}

fn cut_along(k: &PureComplex, dual: &Dual<'_>, sc: &mut Scratch, cycle: Vec<Vertex>, size_ok: &impl Fn(usize) -> bool) -> Option<Cut> {
    sc.stamp += 1;
    let t = sc.stamp;
    let l = cycle.len();
    for i in 0..l {
        sc.cut[*dual.edge_id.get(&key(cycle[i], cycle[(i + 1) % l]))?] = t;
        sc.on_cycle[cycle[i] as usize] = t;
    }
    let first = dual.edge_facets[dual.edge_id[&key(cycle[0], cycle[1])]][0];
    sc.seen[first] = t;
    sc.queue.clear();
    sc.queue.push(first);
    while let Some(i) = sc.queue.pop() {
        for e in dual.facet_edges[i] {
            if sc.cut[e] == t {
                continue;
            }
            let j = dual.across(i, e);
            if sc.seen[j] != t {
                sc.seen[j] = t;
                sc.queue.push(j);
            }
        }
    }
    let (mut in_a, mut in_b) = (0usize, 0usize);
    for v in 1..=k.n() as usize {
        let f = dual.star_of[v];
        if f == usize::MAX || sc.on_cycle[v] == t {
            continue;
        }
        if sc.seen[f] == t {
            in_a += 1;
        } else {
            in_b += 1;
        }
    }
    let side_a = in_a <= in_b;
    let q = in_a.min(in_b);
    if q == 0 || !size_ok(q) {
        return None;
    }
    let q_set = (1..=k.n())
        .filter(|&v| {
            let f = dual.star_of[v as usize];
            f != usize::MAX && sc.on_cycle[v as usize] != t && (sc.seen[f] == t) == side_a
        })
        .collect();
    let inside = (0..dual.facets.len()).map(|f| (sc.seen[f] == t) == side_a).collect();
    Some(Cut { cycle, q_set, inside })
}

/// `factor * s < n` and `s >= MIN_S`. The separator alone only needs a side
/// of size up to `s` to exist; the patcher asks for `n > 2s`.
fn check_scale(k: &PureComplex, s: usize, factor: usize) -> Result<()> {
    if s < MIN_S {
        return Err(Error::InvalidParameter(format!("s={s} is below the supported minimum {MIN_S}")));
    }
    if k.n() as usize <= factor * s {
        return Err(Error::TooSmall(format!("n={} must exceed {}s={}", k.n(), factor, factor * s)));
    }
    Ok(())
}

fn window(s: usize) -> (usize, usize) {
    (s.div_ceil(14), s)
}

fn spread_roots(n: u32) -> Vec<Vertex> {
    let count = ROOTS.min(n as usize);
    (0..count).map(|i| 1 + (i as u64 * n as u64 / count as u64) as Vertex).collect()
}

fn separator_result(cut: &Cut, s: usize) -> SeparatorResult {
    let (lo, hi) = window(s);
    let q = cut.q_set.len();
    SeparatorResult {
        cycle: cut.cycle.clone(),
        q_set: cut.q_set.clone(),
        q,
        s,
        length_ok: (cut.cycle.len() as f64) <= 28.0 * (s as f64).sqrt(),
        window_ok: (lo..=hi).contains(&q),
    }
}

/// A short cycle whose smaller side has between `s/14` and `s` interior
/// vertices. Prefers the largest such side, then the shortest cycle.
pub fn cycle_separator(k: &PureComplex, s: usize) -> Result<SeparatorResult> {
    check_scale(k, s, 1)?;
    let (lo, hi) = window(s);
    let dual = Dual::new(k);
    let mut best: Option<Cut> = None;
    for_each_cut(k, &dual, &spread_roots(k.n()), |q| (lo..=hi).contains(&q), |c| {
        if best.as_ref().is_none_or(|b| (c.q_set.len(), std::cmp::Reverse(c.cycle.len())) > (b.q_set.len(), std::cmp::Reverse(b.cycle.len()))) {
            best = Some(c);
        }
    });
    match best {
        Some(c) => Ok(separator_result(&c, s)),
        None => Err(Error::NoSeparatorFound(format!("no cycle frees between {lo} and {hi} vertices"))),
    }
}

/// Fan triangulation of a cycle from its least vertex.
pub fn retriangulate_cycle(cycle: &[Vertex]) -> Result<PureComplex> {
    if cycle.len() < 3 {
        return Err(Error::InvalidCycle(format!("length {} is below 3", cycle.len())));
    }
    let start = cycle.iter().enumerate().min_by_key(|(_, &v)| v).map(|(i, _)| i).expect("nonempty");
    let n = cycle.iter().copied().max().expect("nonempty");
    fan(cycle, start).map(|f| PureComplex::new(2, n, f)).expect("fan always exists")
}

fn fan(cycle: &[Vertex], apex: usize) -> Option<Vec<Simplex>> {
    let l = cycle.len();
    let at = |i: usize| cycle[(apex + i) % l];
    Some((1..l - 1).map(|i| Simplex::triangle(at(0), at(i), at(i + 1))).collect())
}

/// A triangulation of the polygon `cycle` none of whose chords is `forbidden`.
/// Fans are tried first (least apex id first), then any triangulation.
pub fn triangulate_avoiding(cycle: &[Vertex], forbidden: impl Fn(Vertex, Vertex) -> bool) -> Option<Vec<Simplex>> {
    let l = cycle.len();
    if l < 3 {
        return None;
    }
    let chord_ok = |i: usize, j: usize| -> bool {
        let gap = (j + l - i) % l;
        gap == 1 || gap == l - 1 || !forbidden(cycle[i], cycle[j])
    };
    let mut apexes: Vec<usize> = (0..l).collect();
    apexes.sort_by_key(|&i| cycle[i]);
    for a in apexes {
        if (2..l - 1).all(|t| chord_ok(a, (a + t) % l)) {
            return fan(cycle, a);
        }
    }
    // ok[i][j]: the sub-polygon i..=j can be triangulated with chord (i, j) allowed.
    let mut ok = vec![vec![false; l]; l];
    let mut split = vec![vec![0usize; l]; l];
    for i in 0..l - 1 {
        ok[i][i + 1] = true;
    }
    for len in 2..l {
        for i in 0..l - len {
            let j = i + len;
            if !chord_ok(i, j) {
                continue;
            }
            if let Some(t) = (i + 1..j).find(|&t| ok[i][t] && ok[t][j]) {
                ok[i][j] = true;
                split[i][j] = t;
            }
        }
    }
    if !ok[0][l - 1] {
        return None;
    }
    let mut out = Vec::with_capacity(l - 2);
    let mut stack = vec![(0, l - 1)];
    while let Some((i, j)) = stack.pop() {
        if j - i < 2 {
            continue;
        }
        let t = split[i][j];
        out.push(Simplex::triangle(cycle[i], cycle[t], cycle[j]));
        stack.push((i, t));
        stack.push((t, j));
    }
    Some(out)
}

/// Proper coloring of the facet adjacency graph with at most 4 colors:
/// a 2-coloring when the dual is bipartite, otherwise greedy (the dual of a
/// 2-sphere is cubic, so greedy never needs a fifth color).
pub fn dual_four_coloring(k: &PureComplex) -> Result<Vec<u8>> {
    if k.dim() != 2 {
        return Err(Error::UnsupportedDimension(k.dim()));
    }
    let dual = Dual::new(k);
    if !dual.is_closed() {
        return Err(Error::WitnessNotSphere("facet adjacency is not closed".into()));
    }
    let m = k.num_facets();
    let mut color = vec![u8::MAX; m];
    let mut bipartite = true;
    for s in 0..m {
        if color[s] != u8::MAX {
            continue;
        }
        color[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(i) = queue.pop_front() {
            for j in dual.neighbors(i) {
                if color[j] == u8::MAX {
                    color[j] = 1 - color[i];
                    queue.push_back(j);
                } else if color[j] == color[i] {
                    bipartite = false;
                }
            }
        }
    }
    if bipartite {
        return Ok(color);
    }
    color.iter_mut().for_each(|c| *c = u8::MAX);
    for i in 0..m {
        let mut used = [false; 5];
        for j in dual.neighbors(i) {
            if color[j] != u8::MAX {
                used[color[j] as usize] = true;
            }
        }
        color[i] = used.iter().position(|u| !u).expect("degree three") as u8;
    }
    Ok(color)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Red,
    Green,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Assignment {
    pub facet: Simplex,
    pub vertex: Vertex,
    pub stage: Stage,
    /// Color class of `facet` in the dual coloring of `S'`.
    pub color: u8,
    /// `X_{facet, vertex}`: cost of the three subdivision facets.
    pub cost: f64,
}

/// The intermediate sphere and matching behind a patch.
#[derive(Clone, Debug, PartialEq)]
pub struct PatchPlan {
    /// `S'`: the sphere with the inside of the separator replaced by `D`.
    pub intermediate: PureComplex,
    pub red: Vec<Simplex>,
    pub green: Vec<Simplex>,
    /// Color of each facet of `intermediate`, in its facet order.
    pub coloring: Vec<u8>,
    /// `G_0`: the largest green color class minus facets touching red ones.
    pub green0: Vec<Simplex>,
    pub matching: Vec<Assignment>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PatchResult {
    pub k: usize,
    pub separator: SeparatorResult,
    pub plan: PatchPlan,
    /// All facets of the subdivisions.
    pub patch: PureComplex,
    /// Cost of the patch facets not already in `H`.
    pub cost: f64,
    pub stage1_cost: f64,
    pub stage2_cost: f64,
    /// `W_P`, the cost of simply re-adding the missing facets.
    pub trivial_cost: f64,
    pub final_sphere: PureComplex,
}

fn subdivision(f: &Simplex, v: Vertex) -> [Simplex; 3] {
    let [a, b, c] = [f.vertices()[0], f.vertices()[1], f.vertices()[2]];
    [Simplex::triangle(a, b, v), Simplex::triangle(a, c, v), Simplex::triangle(b, c, v)]
}

fn x_ticks(o: &WeightOracle, f: &Simplex, v: Vertex) -> u128 {
    subdivision(f, v).iter().map(|t| o.raw_ticks(t.vertices()) as u128).sum()
}

/// Patches `h` (a subcomplex of the sphere `witness`) back into a spanning
/// sphere on `[n]` using separator scale `s`.
pub fn patch_2sphere(h: &PureComplex, witness: &PureComplex, o: &WeightOracle, s: usize) -> Result<PatchResult> {
    if o.model() != CostModel::Facet(2) {
        return Err(Error::WrongModel { simplex: Simplex::from_sorted(&[]), model: o.model().to_string() });
    }
    let verdict = verify(witness)?;
    if verdict.outcome != Outcome::Sphere2 || !verdict.spanning {
        return Err(Error::WitnessNotSphere(verdict.reason.map_or("not spanning".into(), |r| r.to_string())));
    }
    if !h.is_empty() && (h.dim() != 2 || !h.is_subcomplex_of(witness)) {
        return Err(Error::HNotSubcomplex);
    }
    let missing: Vec<Simplex> = witness.facets().iter().filter(|f| !h.contains_facet(f)).copied().collect();
    if missing.is_empty() {
        return Err(Error::EmptyPatch);
    }
    check_scale(witness, s, 2)?;
    let n = witness.n();
    let is_missing: HashSet<Simplex> = missing.iter().copied().collect();

    // Step 1: the cut that frees the most vertices beyond the red facets it leaves.
    let (lo, hi) = window(s);
    let dual = Dual::new(witness);
    let mut roots: Vec<Vertex> = missing.iter().take(ROOTS).map(|f| f.vertices()[0]).collect();
    roots.extend(spread_roots(n));
    roots.sort_unstable();
    roots.dedup();
    let missing_at: Vec<bool> = witness.facets().iter().map(|f| is_missing.contains(f)).collect();
    let mut best: Option<(i64, usize, Cut, Vec<Simplex>)> = None;
    for_each_cut(witness, &dual, &roots, |q| (lo..=hi).contains(&q), |cut| {
        // A chord may not already be an edge on the kept side.
        let chord_kept = |a: Vertex, b: Vertex| dual.edge_id.get(&key(a, b)).is_some_and(|&e| !cut.inside[dual.edge_facets[e][0]]);
        let Some(disc) = triangulate_avoiding(&cut.cycle, chord_kept) else {
            return;
        };
        let red = (0..missing_at.len()).filter(|&f| missing_at[f] && !cut.inside[f]).count() + disc.len();
        let score = cut.q_set.len() as i64 - red as i64;
        let better = match &best {
            None => true,
            Some((bs, bl, _, _)) => score > *bs || (score == *bs && cut.cycle.len() < *bl),
        };
        if better {
            best = Some((score, cut.cycle.len(), cut, disc));
        }
    });
    let Some((score, _, cut, disc)) = best else {
        return Err(Error::NoSeparatorFound(format!("no cycle frees between {lo} and {hi} vertices")));
    };
    if score < 0 {
        return Err(Error::PatchFailed(format!("best separator frees {} vertices for {} red facets", cut.q_set.len(), cut.q_set.len() as i64 - score)));
    }
    let separator = separator_result(&cut, s);
    let disc_set: HashSet<Simplex> = disc.iter().copied().collect();
    let kept = witness.facets().iter().zip(&cut.inside).filter(|(_, &i)| !i).map(|(f, _)| *f);
    let intermediate = PureComplex::new(2, n, kept.chain(disc.iter().copied()))?;
    let v = verify(&intermediate)?;
    if v.outcome != Outcome::Sphere2 {
        return Err(Error::PatchFailed(format!("intermediate complex is not a sphere: {:?}", v.reason)));
    }

    // Step 2: color, split Q, and match greedily.
    let coloring = dual_four_coloring(&intermediate)?;
    let facets = intermediate.facets();
    let is_red = |f: &Simplex| is_missing.contains(f) || disc_set.contains(f);
    let mut red_by_color: [Vec<Simplex>; 4] = Default::default();
    let mut green_by_color: [Vec<Simplex>; 4] = Default::default();
    let (mut red, mut green) = (Vec::new(), Vec::new());
    for (f, &c) in facets.iter().zip(&coloring) {
        if is_red(f) {
            red.push(*f);
            red_by_color[c as usize].push(*f);
        } else {
            green.push(*f);
            green_by_color[c as usize].push(*f);
        }
    }
    let red_edges: HashSet<(Vertex, Vertex)> = red.iter().flat_map(facet_edges).collect();
    let g1 = (0..4).max_by_key(|&c| (green_by_color[c].len(), std::cmp::Reverse(c))).expect("four classes");
    let green0: Vec<Simplex> =
        green_by_color[g1].iter().filter(|f| facet_edges(f).iter().all(|e| !red_edges.contains(e))).copied().collect();

    let mut q_order = cut.q_set.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(o.seed().master, "patch-partition", o.seed().stream));
    q_order.shuffle(&mut rng);
    let surplus = q_order.len() - red.len();
    let mut parts: [Vec<Vertex>; 4] = Default::default();
    let mut next = 0;
    for c in 0..4 {
        let quota = red_by_color[c].len() + surplus / 4 + usize::from(c < surplus % 4);
        parts[c] = q_order[next..next + quota].to_vec();
        parts[c].sort_unstable();
        next += quota;
    }

    let mut matching = Vec::with_capacity(q_order.len());
    let mut stage1: u128 = 0;
    let mut leftover: Vec<Vertex> = Vec::new();
    for c in 0..4 {
        let mut free = parts[c].clone();
        for f in &red_by_color[c] {
            let (slot, ticks) = free
                .iter()
                .enumerate()
                .map(|(i, &v)| (i, x_ticks(o, f, v)))
                .min_by_key(|&(i, t)| (t, free[i]))
                .expect("quota covers every red facet");
            let v = free.remove(slot);
            stage1 += ticks;
            matching.push(Assignment { facet: *f, vertex: v, stage: Stage::Red, color: c as u8, cost: ticks_to_cost(ticks) });
        }
        leftover.extend(free);
    }
    leftover.sort_unstable();
    if leftover.len() > green0.len() {
        return Err(Error::PatchFailed(format!("{} leftover vertices but only {} facets in G_0", leftover.len(), green0.len())));
    }
    let mut stage2: u128 = 0;
    let mut open: Vec<Simplex> = green0.clone();
    for v in leftover {
        let (slot, ticks) =
            open.iter().enumerate().map(|(i, f)| (i, x_ticks(o, f, v))).min_by_key(|&(i, t)| (t, open[i])).expect("checked size");
        let f = open.remove(slot);
        stage2 += ticks;
        matching.push(Assignment { facet: f, vertex: v, stage: Stage::Green, color: g1 as u8, cost: ticks_to_cost(ticks) });
    }

    let replaced: HashSet<Simplex> = matching.iter().map(|a| a.facet).collect();
    let patch_facets: Vec<Simplex> = matching.iter().flat_map(|a| subdivision(&a.facet, a.vertex)).collect();
    let final_sphere =
        PureComplex::new(2, n, facets.iter().filter(|f| !replaced.contains(f)).copied().chain(patch_facets.iter().copied()))?;
    let fv = verify(&final_sphere)?;
    if fv.outcome != Outcome::Sphere2 || !fv.spanning {
        return Err(Error::PatchFailed(format!("patched complex failed verification: {:?}", fv.reason)));
    }
    let patch = PureComplex::new(2, n, patch_facets)?;
    let cost = ticks_to_cost(patch.facets().iter().filter(|f| !h.contains_facet(f)).map(|f| o.raw_ticks(f.vertices()) as u128).sum());
    let trivial_cost = ticks_to_cost(missing.iter().map(|f| o.raw_ticks(f.vertices()) as u128).sum());
    Ok(PatchResult {
        k: missing.len(),
        separator,
        plan: PatchPlan { intermediate, red, green, coloring, green0, matching },
        patch,
        cost,
        stage1_cost: ticks_to_cost(stage1),
        stage2_cost: ticks_to_cost(stage2),
        trivial_cost,
        final_sphere,
    })
}
