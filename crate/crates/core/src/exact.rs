//! Ground truth at tiny scale: every labeled spanning 2-sphere on `[n]`.
//!
//! Enumeration grows a closed surface from a start triangle `{1, a, b}`,
//! always completing the smallest edge that lies in exactly one triangle.
//! Each sphere has a unique start (`a` is the smallest neighbor of 1 and `b`
//! the smaller apex over edge `{1, a}`), so it is produced exactly once.

use std::collections::HashMap;
use std::sync::OnceLock;

use rayon::prelude::*;

use crate::cost::{ticks_to_cost, CostModel, WeightOracle};
use crate::error::{Error, Result};
use crate::simplex::{PureComplex, Simplex, Vertex};

pub const MAX_ENUMERATION_N: u32 = 8;
pub const MAX_SCAN_N: u32 = 7;
pub const MAX_PATCH_N: u32 = 6;

const MAXV: usize = MAX_ENUMERATION_N as usize + 1;

struct Search {
    n: u32,
    target: usize,
    a: u32,
    b: u32,
    facets: Vec<[u32; 3]>,
    edge: [[u8; MAXV]; MAXV],
    /// Number of link vertices of `u` seen in exactly one facet with `u`.
    open: [u8; MAXV],
    used: [u8; MAXV],
}

impl Search {
    fn new(n: u32, a: u32, b: u32) -> Self {
        Search {
            n,
            target: 2 * n as usize - 4,
            a,
            b,
            facets: Vec::with_capacity(2 * n as usize),
            edge: [[0; MAXV]; MAXV],
            open: [0; MAXV],
            used: [0; MAXV],
        }
    }

    fn count(&self, x: u32, y: u32) -> u8 {
        self.edge[x as usize][y as usize]
    }

    /// Number of path components of the link of `u`, and whether `v` and `w`
    /// lie in the same one.
    fn link_components(&self, u: u32, v: u32, w: u32) -> (usize, bool) {
        let mut comp = [0usize; MAXV];
        for x in 1..=self.n {
            comp[x as usize] = x as usize;
        }
        fn root(comp: &mut [usize; MAXV], mut x: usize) -> usize {
            while comp[x] != x {
                x = comp[x];
            }
            x
        }
        let mut components = 0;
        for x in 1..=self.n {
            if x != u && self.count(u, x) > 0 {
                components += 1;
            }
        }
        for f in &self.facets {
            if let Some(pos) = f.iter().position(|&z| z == u) {
                let (p, q) = (f[(pos + 1) % 3] as usize, f[(pos + 2) % 3] as usize);
                let (rp, rq) = (root(&mut comp, p), root(&mut comp, q));
                if rp != rq {
                    comp[rp] = rq;
                    components -= 1;
                }
            }
        }
        let same = root(&mut comp, v as usize) == root(&mut comp, w as usize);
        (components, same)
    }

    fn can_add(&self, f: [u32; 3]) -> bool {
        if self.facets.len() >= self.target {
            return false;
        }
        let [x, y, z] = f;
        // Start-uniqueness filters on vertex 1.
        if x == 1 && (y < self.a || (y == self.a && z < self.b)) {
            return false;
        }
        if self.count(x, y) >= 2 || self.count(x, z) >= 2 || self.count(y, z) >= 2 {
            return false;
        }
        for (u, v, w) in [(x, y, z), (y, x, z), (z, x, y)] {
            if self.used[u as usize] > 0 && self.open[u as usize] == 0 {
                return false;
            }
            if self.count(u, v) > 0 && self.count(u, w) > 0 {
                let (components, same) = self.link_components(u, v, w);
                if same && components != 1 {
                    return false;
                }
            }
        }
        true
    }

    fn bump(&mut self, x: u32, y: u32, delta: i8) {
        let c = self.edge[x as usize][y as usize] as i8;
        let nc = c + delta;
        self.edge[x as usize][y as usize] = nc as u8;
        self.edge[y as usize][x as usize] = nc as u8;
        for u in [x, y] {
            let o = &mut self.open[u as usize];
            *o = (*o as i8 + (nc == 1) as i8 - (c == 1) as i8) as u8;
        }
    }

    fn push(&mut self, f: [u32; 3]) {
        let [x, y, z] = f;
        self.bump(x, y, 1);
        self.bump(x, z, 1);
        self.bump(y, z, 1);
        for v in f {
            self.used[v as usize] += 1;
        }
        self.facets.push(f);
    }

    fn pop(&mut self) {
        let f = self.facets.pop().expect("nonempty");
        let [x, y, z] = f;
        self.bump(x, y, -1);
        self.bump(x, z, -1);
        self.bump(y, z, -1);
        for v in f {
            self.used[v as usize] -= 1;
        }
    }

    fn open_edge(&self) -> Option<(u32, u32)> {
        for x in 1..=self.n {
            for y in x + 1..=self.n {
                if self.count(x, y) == 1 {
                    return Some((x, y));
                }
            }
        }
        None
    }

    fn run(&mut self, emit: &mut impl FnMut(&[[u32; 3]])) {
        let Some((p, q)) = self.open_edge() else {
            if self.facets.len() == self.target && (1..=self.n).all(|v| self.used[v as usize] > 0) {
                emit(&self.facets);
            }
            return;
        };
        for t in 1..=self.n {
            if t == p || t == q || self.facets.iter().any(|f| f.contains(&p) && f.contains(&q) && f.contains(&t)) {
                continue;
            }
            let mut f = [p, q, t];
            f.sort_unstable();
            if self.can_add(f) {
                self.push(f);
                self.run(emit);
                self.pop();
            }
        }
    }
}

fn to_complex(n: u32, facets: &[[u32; 3]]) -> PureComplex {
    PureComplex::from_facets_unchecked(2, n, facets.iter().map(|&[a, b, c]| Simplex::triangle(a, b, c)).collect())
}

/// Calls `emit` on every labeled spanning 2-sphere on `[n]`. Order is deterministic.
pub fn for_each_2sphere(n: u32, mut emit: impl FnMut(PureComplex)) -> Result<()> {
    check_range(n, MAX_ENUMERATION_N)?;
    for a in 2..=n {
        for b in a + 1..=n {
            let mut s = Search::new(n, a, b);
            s.push([1, a, b]);
            s.run(&mut |fs| emit(to_complex(n, fs)));
        }
    }
    Ok(())
}

fn check_range(n: u32, max: u32) -> Result<()> {
    if n < 4 {
        return Err(Error::TooSmall(format!("n={n}, need at least 4")));
    }
    if n > max {
        return Err(Error::TooLarge(format!("n={n}, limit is {max}")));
    }
    Ok(())
}

/// One isomorphism class of spanning 2-spheres.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereClass {
    /// Canonically relabeled representative.
    pub canonical: PureComplex,
    pub automorphisms: usize,
    /// Number of labeled spheres on `[n]` found in this class.
    pub labeled: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnumerationResult {
    pub n: u32,
    /// Labeled spheres found by backtracking.
    pub labeled_count: u64,
    /// Classes sorted by canonical representative.
    pub classes: Vec<SphereClass>,
}

impl EnumerationResult {
    /// `sum n!/|Aut|` over the classes; equals `labeled_count` when both are right.
    pub fn orbit_count(&self) -> u64 {
        let fact: u64 = (1..=self.n as u64).product();
        self.classes.iter().map(|c| fact / c.automorphisms as u64).sum()
    }
}

/// Enumerates labeled spheres and groups them into isomorphism classes.
/// Start triangles are searched in parallel.
pub fn enumerate_2spheres(n: u32) -> Result<EnumerationResult> {
    check_range(n, MAX_ENUMERATION_N)?;
    let starts: Vec<(u32, u32)> = (2..=n).flat_map(|a| (a + 1..=n).map(move |b| (a, b))).collect();
    let partial: Vec<HashMap<PureComplex, (usize, u64)>> = starts
        .par_iter()
        .map(|&(a, b)| {
            let mut classes: HashMap<PureComplex, (usize, u64)> = HashMap::new();
            let mut s = Search::new(n, a, b);
            s.push([1, a, b]);
            s.run(&mut |fs| {
                let (canon, aut) = canonical_form(&to_complex(n, fs));
                classes.entry(canon).or_insert((aut, 0)).1 += 1;
            });
            classes
        })
        .collect();
    let mut merged: HashMap<PureComplex, (usize, u64)> = HashMap::new();
    for part in partial {
        for (k, (aut, c)) in part {
            merged.entry(k).or_insert((aut, 0)).1 += c;
        }
    }
    let mut classes: Vec<SphereClass> =
        merged.into_iter().map(|(canonical, (automorphisms, labeled))| SphereClass { canonical, automorphisms, labeled }).collect();
    classes.sort_by(|x, y| x.canonical.facets().cmp(y.canonical.facets()));
    let labeled_count = classes.iter().map(|c| c.labeled).sum();
    Ok(EnumerationResult { n, labeled_count, classes })
}

/// Canonical relabeling of a closed connected 2-manifold and its number of
/// automorphisms.
///
/// Every ordered start triangle whose vertex degrees are lexicographically
/// smallest seeds a breadth-first relabeling across edges; the smallest
/// sorted facet list wins. Automorphisms act freely on ordered triangles, so
/// the number of winning starts is `|Aut|`.
pub fn canonical_form(k: &PureComplex) -> (PureComplex, usize) {
    let facets = k.facets();
    let mut across: HashMap<Simplex, [usize; 2]> = HashMap::with_capacity(facets.len() * 2);
    for (i, f) in facets.iter().enumerate() {
        for r in f.ridges() {
            let e = across.entry(r).or_insert([usize::MAX; 2]);
            if e[0] == usize::MAX {
                e[0] = i;
            } else {
                e[1] = i;
            }
        }
    }
    let n = k.n() as usize;
    let mut deg = vec![0usize; n + 1];
    for (a, b) in k.edges() {
        deg[a as usize] += 1;
        deg[b as usize] += 1;
    }
    let mut starts: Vec<[Vertex; 3]> = Vec::with_capacity(6 * facets.len());
    for f in facets {
        let v = f.vertices();
        for (x, y, z) in [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)] {
            starts.push([v[x], v[y], v[z]]);
        }
    }
    let key = |s: &[Vertex; 3]| (deg[s[0] as usize], deg[s[1] as usize], deg[s[2] as usize]);
    let best_key = starts.iter().map(key).min().expect("nonempty complex");
    starts.retain(|s| key(s) == best_key);

    let mut best: Option<Vec<[Vertex; 3]>> = None;
    let mut hits = 0;
    let mut label = vec![0 as Vertex; n + 1];
    let mut seen = vec![false; facets.len()];
    let mut queue = std::collections::VecDeque::with_capacity(facets.len());
    for s in starts {
        label.iter_mut().for_each(|l| *l = 0);
        seen.iter_mut().for_each(|x| *x = false);
        let start_facet = facets.binary_search(&Simplex::triangle(s[0], s[1], s[2])).expect("start is a facet");
        seen[start_facet] = true;
        let mut next = 1;
        for v in s {
            label[v as usize] = next;
            next += 1;
        }
        queue.clear();
        queue.push_back((start_facet, s));
        while let Some((fi, [x, y, z])) = queue.pop_front() {
            for (p, q) in [(x, y), (y, z), (z, x)] {
                let pair = across[&Simplex::edge(p, q)];
                let g = if pair[0] == fi { pair[1] } else { pair[0] };
                if g == usize::MAX || seen[g] {
                    continue;
                }
                seen[g] = true;
                let t = facets[g].minus(&Simplex::edge(p, q)).vertices()[0];
                if label[t as usize] == 0 {
                    label[t as usize] = next;
                    next += 1;
                }
                queue.push_back((g, [q, p, t]));
            }
        }
        let mut code: Vec<[Vertex; 3]> = facets
            .iter()
            .map(|f| {
                let mut t = [label[f.vertices()[0] as usize], label[f.vertices()[1] as usize], label[f.vertices()[2] as usize]];
                t.sort_unstable();
                t
            })
            .collect();
        code.sort_unstable();
        match &best {
            Some(b) if code > *b => {}
            Some(b) if code == *b => hits += 1,
            _ => {
                best = Some(code);
                hits = 1;
            }
        }
    }
    let code = best.expect("at least one start");
    let canon = PureComplex::from_facets_unchecked(2, k.n(), code.iter().map(|&[a, b, c]| Simplex::triangle(a, b, c)).collect());
    (canon, hits)
}

/// All labeled spanning 2-spheres on `[n]` for `n <= 7`, sorted by facet list. Cached.
pub fn labeled_spheres(n: u32) -> Result<&'static [PureComplex]> {
    static CACHE: [OnceLock<Vec<PureComplex>>; MAX_SCAN_N as usize + 1] = [const { OnceLock::new() }; MAX_SCAN_N as usize + 1];
    check_range(n, MAX_SCAN_N)?;
    Ok(CACHE[n as usize].get_or_init(|| {
        let mut all = Vec::new();
        for_each_2sphere(n, |k| all.push(k)).expect("range checked");
        all.sort_by(|x, y| x.facets().cmp(y.facets()));
        all
    }))
}

fn facet_ticks(o: &WeightOracle, k: &PureComplex) -> u128 {
    k.facets().iter().map(|f| o.raw_ticks(f.vertices()) as u128).sum()
}

fn require_triangle_costs(o: &WeightOracle) -> Result<()> {
    if o.model() != CostModel::Facet(2) {
        return Err(Error::WrongModel { simplex: Simplex::from_sorted(&[]), model: o.model().to_string() });
    }
    Ok(())
}

/// Minimizer of `spheres` under `o`; ties go to the earliest in canonical order.
pub fn min_over(spheres: &[PureComplex], o: &WeightOracle) -> Option<(PureComplex, f64)> {
    spheres
        .iter()
        .map(|k| (facet_ticks(o, k), k))
        .min_by(|(ca, ka), (cb, kb)| ca.cmp(cb).then_with(|| ka.facets().cmp(kb.facets())))
        .map(|(c, k)| (k.clone(), ticks_to_cost(c)))
}

/// Exact `M(S^2_n)` and its minimizer, by scanning every labeled sphere.
pub fn min_spanning_sphere_exact(n: u32, o: &WeightOracle) -> Result<(PureComplex, f64)> {
    require_triangle_costs(o)?;
    let all = labeled_spheres(n)?;
    Ok(min_over(all, o).expect("at least one sphere"))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PatchabilityQuery {
    pub h: PureComplex,
    pub n: u32,
    /// Fewest facets to add to `h` so that it contains a spanning sphere.
    pub rho: usize,
    /// Cheapest total cost of such an addition.
    pub patch_cost: f64,
}

/// Exact patch size and patch cost for a partial complex on `[n]`, `n <= 6`.
pub fn patch_exact(h: &PureComplex, n: u32, o: &WeightOracle) -> Result<PatchabilityQuery> {
    require_triangle_costs(o)?;
    check_range(n, MAX_PATCH_N)?;
    if !h.is_empty() && h.dim() != 2 {
        return Err(Error::UnsupportedDimension(h.dim()));
    }
    if h.facets().iter().any(|f| f.max_vertex().unwrap_or(0) > n) {
        return Err(Error::InvalidParameter(format!("complex uses vertices beyond {n}")));
    }
    let mut rho = usize::MAX;
    let mut best = u128::MAX;
    for s in labeled_spheres(n)? {
        let missing: Vec<&Simplex> = s.facets().iter().filter(|f| !h.contains_facet(f)).collect();
        rho = rho.min(missing.len());
        best = best.min(missing.iter().map(|f| o.raw_ticks(f.vertices()) as u128).sum());
    }
    Ok(PatchabilityQuery { h: h.clone(), n, rho, patch_cost: ticks_to_cost(best) })
}
