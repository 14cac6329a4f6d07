//! Locally constructible complexes.
//!
//! A trace starts from one simplex, attaches simplices along boundary ridges
//! with a fresh vertex (building a tree of simplices), and identifies pairs
//! of adjacent boundary ridges. A trace certifies a sphere in one of two ways:
//! it closes up (empty boundary) and the complex itself is the sphere, or it
//! stays a ball and the sphere is its boundary.

mod sample;

pub use sample::{noncrossing_matchings, random_noncrossing_matching, random_polygon_triangulation, sample_lc_2sphere, sample_lc_2sphere_with, LcSampling};

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::constructions::sphere_from_cycle;
use crate::error::{Error, Result};
use crate::simplex::{PureComplex, Simplex, Vertex};
use crate::verify::{check_sphere_like, Outcome, Reason, SphereVerdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LcMove {
    /// Glue `ridge + {vertex}` along a boundary ridge; `vertex` must be unused.
    Attach { ridge: Simplex, vertex: Vertex },
    /// Glue two boundary ridges sharing a codimension-one face. The two
    /// opposite vertices merge; the larger id is renamed to the smaller.
    Identify { a: Simplex, b: Simplex },
}

impl LcMove {
    /// The same move one dimension up, with `z` added to every simplex.
    pub fn coned(&self, z: Vertex) -> Result<LcMove> {
        Ok(match self {
            LcMove::Attach { ridge, vertex } => LcMove::Attach { ridge: ridge.with_vertex(z)?, vertex: *vertex },
            LcMove::Identify { a, b } => LcMove::Identify { a: a.with_vertex(z)?, b: b.with_vertex(z)? },
        })
    }
}

fn write_verts(f: &mut fmt::Formatter<'_>, s: &Simplex) -> fmt::Result {
    for (i, v) in s.vertices().iter().enumerate() {
        if i > 0 {
            f.write_str(" ")?;
        }
        write!(f, "{v}")?;
    }
    Ok(())
}

impl fmt::Display for LcMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LcMove::Attach { ridge, vertex } => {
                f.write_str("attach ")?;
                write_verts(f, ridge)?;
                write!(f, "|{vertex}")
            }
            LcMove::Identify { a, b } => {
                f.write_str("identify ")?;
                write_verts(f, a)?;
                f.write_str("|")?;
                write_verts(f, b)
            }
        }
    }
}

/// A growing pure complex together with its ridge multiplicities.
#[derive(Clone, Debug)]
pub struct LcState {
    d: usize,
    facets: Vec<Simplex>,
    index: HashMap<Simplex, usize>,
    ridges: HashMap<Simplex, u8>,
    incidence: HashMap<Vertex, Vec<usize>>,
    boundary_len: usize,
    merges: Vec<(Vertex, Vertex)>,
}

impl LcState {
    pub fn new(init: Simplex) -> Result<Self> {
        if init.len() < 2 {
            return Err(Error::UnsupportedDimension(0));
        }
        let mut s = LcState {
            d: init.len() - 1,
            facets: Vec::new(),
            index: HashMap::new(),
            ridges: HashMap::new(),
            incidence: HashMap::new(),
            boundary_len: 0,
            merges: Vec::new(),
        };
        s.insert(init);
        Ok(s)
    }

    fn insert(&mut self, f: Simplex) {
        let i = self.facets.len();
        self.facets.push(f);
        self.index.insert(f, i);
        for &v in f.vertices() {
            self.incidence.entry(v).or_default().push(i);
        }
        for r in f.ridges() {
            let c = self.ridges.entry(r).or_insert(0);
            *c += 1;
            if *c == 1 {
                self.boundary_len += 1;
            } else {
                self.boundary_len -= 1;
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn facets(&self) -> &[Simplex] {
        &self.facets
    }

    pub fn ridge_count(&self, r: &Simplex) -> u8 {
        self.ridges.get(r).copied().unwrap_or(0)
    }

    pub fn is_boundary(&self, r: &Simplex) -> bool {
        self.ridge_count(r) == 1
    }

    pub fn boundary_len(&self) -> usize {
        self.boundary_len
    }

    pub fn is_closed(&self) -> bool {
        self.boundary_len == 0
    }

    /// Boundary ridges in canonical order.
    pub fn boundary(&self) -> Vec<Simplex> {
        let mut b: Vec<Simplex> = self.ridges.iter().filter(|(_, &c)| c == 1).map(|(r, _)| *r).collect();
        b.sort_unstable();
        b
    }

    /// `(renamed, kept)` for every identification so far.
    pub fn merges(&self) -> &[(Vertex, Vertex)] {
        &self.merges
    }

    pub fn uses_vertex(&self, v: Vertex) -> bool {
        self.incidence.contains_key(&v)
    }

    /// Applies a move, leaving the state untouched on error.
    pub fn apply(&mut self, mv: &LcMove) -> Result<()> {
        match *mv {
            LcMove::Attach { ridge, vertex } => {
                if ridge.len() != self.d {
                    return Err(Error::WrongFacetSize { facet: ridge, expected: self.d });
                }
                if !self.is_boundary(&ridge) {
                    return Err(Error::RidgeNotOnBoundary(ridge));
                }
                if vertex == 0 {
                    return Err(Error::ZeroVertex);
                }
                if self.uses_vertex(vertex) {
                    return Err(Error::WouldDegenerate(format!("vertex {vertex} is already in use")));
                }
                self.insert(ridge.with_vertex(vertex)?);
                Ok(())
            }
            LcMove::Identify { a, b } => self.identify(a, b),
        }
    }

    fn identify(&mut self, a: Simplex, b: Simplex) -> Result<()> {
        for r in [a, b] {
            if r.len() != self.d {
                return Err(Error::WrongFacetSize { facet: r, expected: self.d });
            }
            if !self.is_boundary(&r) {
                return Err(Error::RidgeNotOnBoundary(r));
            }
        }
        if a == b || a.intersection(&b).len() + 1 != self.d {
            return Err(Error::RidgesNotAdjacent(a, b));
        }
        let x = a.minus(&b).vertices()[0];
        let y = b.minus(&a).vertices()[0];
        let (keep, gone) = (x.min(y), x.max(y));

        let affected = self.incidence.get(&gone).cloned().unwrap_or_default();
        let mut renamed = Vec::with_capacity(affected.len());
        for &i in &affected {
            let f = self.facets[i];
            if f.contains(keep) {
                return Err(Error::WouldDegenerate(format!("facet {f} would repeat vertex {keep}")));
            }
            let g = f.relabel(gone, keep)?;
            if self.index.contains_key(&g) {
                return Err(Error::WouldDegenerate(format!("facet {g} would appear twice")));
            }
            renamed.push(g);
        }
        let mut delta: HashMap<Simplex, i32> = HashMap::new();
        for &i in &affected {
            for r in self.facets[i].ridges() {
                *delta.entry(r).or_insert(0) -= 1;
            }
        }
        for g in &renamed {
            for r in g.ridges() {
                *delta.entry(r).or_insert(0) += 1;
            }
        }
        for (r, dc) in &delta {
            if self.ridge_count(r) as i32 + dc > 2 {
                return Err(Error::WouldDegenerate(format!("ridge {r} would lie in more than two facets")));
            }
        }

        for (&i, &g) in affected.iter().zip(&renamed) {
            let f = std::mem::replace(&mut self.facets[i], g);
            self.index.remove(&f);
            self.index.insert(g, i);
        }
        for (r, dc) in delta {
            let old = self.ridge_count(&r) as i32;
            let new = old + dc;
            self.boundary_len = self.boundary_len + (new == 1) as usize - (old == 1) as usize;
            if new == 0 {
                self.ridges.remove(&r);
            } else {
                self.ridges.insert(r, new as u8);
            }
        }
        self.incidence.remove(&gone);
        self.incidence.entry(keep).or_default().extend(affected);
        self.merges.push((gone, keep));
        Ok(())
    }

    /// The complex with its current labels; `n` is the largest label used.
    pub fn complex(&self) -> PureComplex {
        let n = self.incidence.keys().copied().max().unwrap_or(0);
        PureComplex::from_facets_unchecked(self.d, n, self.facets.clone())
    }

    /// The complex relabeled order-preservingly onto `1..=n`.
    pub fn extract(&self) -> PureComplex {
        compact(self.d, self.facets.clone())
    }

    /// The boundary relabeled order-preservingly onto `1..=n`.
    pub fn extract_boundary(&self) -> PureComplex {
        compact(self.d - 1, self.boundary())
    }
}

fn compact(d: usize, facets: Vec<Simplex>) -> PureComplex {
    let mut used: Vec<Vertex> = facets.iter().flat_map(|f| f.vertices().iter().copied()).collect();
    used.sort_unstable();
    used.dedup();
    let rank: HashMap<Vertex, Vertex> = used.iter().enumerate().map(|(i, &v)| (v, i as Vertex + 1)).collect();
    let facets = facets
        .iter()
        .map(|f| {
            let mut vs: Vec<Vertex> = f.vertices().iter().map(|v| rank[v]).collect();
            vs.sort_unstable();
            Simplex::from_sorted(&vs)
        })
        .collect();
    PureComplex::from_facets_unchecked(d, used.len() as u32, facets)
}

/// Functional form of [`LcState::apply`].
pub fn lc_apply(mut s: LcState, m: &LcMove) -> Result<LcState> {
    s.apply(m)?;
    Ok(s)
}

/// A move sequence from one simplex, with the sphere it certifies.
#[derive(Clone, Debug, PartialEq)]
pub struct LcTrace {
    /// Dimension of the simplices the trace glues.
    pub d: usize,
    pub init: Simplex,
    pub moves: Vec<LcMove>,
    /// The certified sphere, relabeled onto `1..=n`: the complex itself when
    /// the trace closes up, otherwise the boundary of the final ball.
    pub complex: PureComplex,
}

impl LcTrace {
    /// Replays the moves and records the resulting sphere candidate.
    pub fn new(init: Simplex, moves: Vec<LcMove>) -> Result<Self> {
        let state = replay(init, &moves)?;
        let complex = if state.is_closed() { state.extract() } else { state.extract_boundary() };
        Ok(LcTrace { d: init.len() - 1, init, moves, complex })
    }

    pub fn replay(&self) -> Result<LcState> {
        replay(self.init, &self.moves)
    }

    /// True if the trace closes up rather than certifying a boundary.
    pub fn is_closed(&self) -> bool {
        self.complex.dim() == self.d
    }

    /// Cones every simplex of the trace with `z`.
    pub fn coned(&self, z: Vertex) -> Result<LcTrace> {
        let moves = self.moves.iter().map(|m| m.coned(z)).collect::<Result<Vec<_>>>()?;
        LcTrace::new(self.init.with_vertex(z)?, moves)
    }

    pub fn num_attach(&self) -> usize {
        self.moves.iter().filter(|m| matches!(m, LcMove::Attach { .. })).count()
    }

    pub fn num_identify(&self) -> usize {
        self.moves.len() - self.num_attach()
    }
}

fn replay(init: Simplex, moves: &[LcMove]) -> Result<LcState> {
    let mut s = LcState::new(init)?;
    for m in moves {
        s.apply(m)?;
    }
    Ok(s)
}

impl fmt::Display for LcTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "lc d={}", self.d)?;
        f.write_str("init ")?;
        write_verts(f, &self.init)?;
        writeln!(f)?;
        for m in &self.moves {
            writeln!(f, "{m}")?;
        }
        Ok(())
    }
}

fn parse_verts(s: &str, line: usize) -> Result<Simplex> {
    let verts = s
        .split_whitespace()
        .map(|t| t.parse::<Vertex>().map_err(|e| Error::Parse { line, msg: format!("bad vertex {t:?}: {e}") }))
        .collect::<Result<Vec<_>>>()?;
    Simplex::new(&verts).map_err(|e| Error::Parse { line, msg: e.to_string() })
}

impl FromStr for LcTrace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty trace".into() })?;
        let d: usize = header
            .trim()
            .strip_prefix("lc d=")
            .and_then(|t| t.parse().ok())
            .ok_or(Error::Parse { line: 1, msg: format!("expected `lc d=<int>`, got {header:?}") })?;
        let (i, init_line) = lines.next().ok_or(Error::Parse { line: 2, msg: "missing init line".into() })?;
        let init = match init_line.trim().strip_prefix("init ") {
            Some(rest) => parse_verts(rest, i + 1)?,
            None => return Err(Error::Parse { line: i + 1, msg: "expected `init <vertices>`".into() }),
        };
        if init.len() != d + 1 {
            return Err(Error::Parse { line: i + 1, msg: format!("init needs {} vertices", d + 1) });
        }
        let mut moves = Vec::new();
        for (i, l) in lines {
            let l = l.trim();
            let (kind, rest) = l.split_once(' ').ok_or(Error::Parse { line: i + 1, msg: format!("bad move {l:?}") })?;
            let (left, right) = rest.split_once('|').ok_or(Error::Parse { line: i + 1, msg: "missing `|`".into() })?;
            let mv = match kind {
                "attach" => {
                    let new = parse_verts(right, i + 1)?;
                    if new.len() != 1 {
                        return Err(Error::Parse { line: i + 1, msg: "attach takes exactly one new vertex".into() });
                    }
                    LcMove::Attach { ridge: parse_verts(left, i + 1)?, vertex: new.vertices()[0] }
                }
                "identify" => LcMove::Identify { a: parse_verts(left, i + 1)?, b: parse_verts(right, i + 1)? },
                other => return Err(Error::Parse { line: i + 1, msg: format!("unknown move {other:?}") }),
            };
            moves.push(mv);
        }
        LcTrace::new(init, moves)
    }
}

/// LC trace for the pole/cycle sphere: a fan disc over the cycle with apex
/// `d`, closed by one identification, then coned by the poles `d-1, ..., 1`.
/// The result is a `(d+1)`-ball whose boundary is the sphere.
pub fn lc_trace_for_cone_sphere(cycle: &[Vertex], d: usize) -> Result<LcTrace> {
    let target = sphere_from_cycle(cycle, d)?;
    let apex = d as Vertex;
    let fresh = target.n() + 1;
    let l = cycle.len();
    let mut moves = Vec::with_capacity(l);
    for i in 1..l - 1 {
        moves.push(LcMove::Attach { ridge: Simplex::edge(apex, cycle[i]), vertex: cycle[i + 1] });
    }
    moves.push(LcMove::Attach { ridge: Simplex::edge(apex, cycle[l - 1]), vertex: fresh });
    moves.push(LcMove::Identify { a: Simplex::edge(apex, fresh), b: Simplex::edge(apex, cycle[0]) });
    let mut trace = LcTrace::new(Simplex::triangle(apex, cycle[0], cycle[1]), moves)?;
    for pole in (1..apex).rev() {
        trace = trace.coned(pole)?;
    }
    Ok(trace)
}

/// Checks that `trace` replays to exactly `k` and that the result passes the
/// closed-manifold checks. Success yields [`Outcome::CertifiedLC`].
pub fn certify_lc(k: &PureComplex, trace: &LcTrace) -> SphereVerdict {
    let spanning = k.is_spanning();
    let fail = |msg: String| SphereVerdict::rejected(Reason::InvalidCertificate(msg), spanning);
    let state = match trace.replay() {
        Ok(s) => s,
        Err(e) => return fail(format!("replay failed: {e}")),
    };
    let got = if state.is_closed() { state.extract() } else { state.extract_boundary() };
    if got.dim() != k.dim() || got.facets() != k.facets() {
        return fail("replay does not reproduce the complex".into());
    }
    if let Err(reason) = check_sphere_like(&got) {
        return SphereVerdict::rejected(reason, spanning);
    }
    SphereVerdict { outcome: Outcome::CertifiedLC, reason: None, spanning }
}
