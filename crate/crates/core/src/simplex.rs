//! Canonical simplices and pure simplicial complexes.
//!
//! A [`PureComplex`] is stored as its sorted facet list; every other face is
//! implied by downward closure. Vertex ids are dense integers starting at 1.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use crate::error::{Error, Result};

pub type Vertex = u32;

/// Largest vertex count a [`Simplex`] can hold. Enough for coned traces of
/// 5-spheres (facets of 7 vertices) with room to spare.
pub const MAX_SIMPLEX_VERTICES: usize = 8;

/// A simplex stored as a strictly increasing vertex list.
#[derive(Clone, Copy)]
pub struct Simplex {
    len: u8,
    verts: [Vertex; MAX_SIMPLEX_VERTICES],
}

impl Simplex {
    /// Builds a simplex from vertices in any order.
    pub fn new(vertices: &[Vertex]) -> Result<Self> {
        if vertices.len() > MAX_SIMPLEX_VERTICES {
            return Err(Error::TooManyVertices(vertices.len()));
        }
        let mut verts = [0; MAX_SIMPLEX_VERTICES];
        verts[..vertices.len()].copy_from_slice(vertices);
        let slice = &mut verts[..vertices.len()];
        slice.sort_unstable();
        for w in slice.windows(2) {
            if w[0] == w[1] {
                return Err(Error::RepeatedVertex(w[0]));
            }
        }
        if slice.first() == Some(&0) {
            return Err(Error::ZeroVertex);
        }
        Ok(Simplex { len: vertices.len() as u8, verts })
    }

    /// Caller guarantees `sorted` is strictly increasing and short enough.
    pub(crate) fn from_sorted(sorted: &[Vertex]) -> Self {
        debug_assert!(sorted.windows(2).all(|w| w[0] < w[1]));
        let mut verts = [0; MAX_SIMPLEX_VERTICES];
        verts[..sorted.len()].copy_from_slice(sorted);
        Simplex { len: sorted.len() as u8, verts }
    }

    pub fn edge(a: Vertex, b: Vertex) -> Self {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        Self::from_sorted(&[lo, hi])
    }

    pub fn triangle(a: Vertex, b: Vertex, c: Vertex) -> Self {
        let mut v = [a, b, c];
        v.sort_unstable();
        Self::from_sorted(&v)
    }

    #[inline]
    pub fn vertices(&self) -> &[Vertex] {
        &self.verts[..self.len as usize]
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Dimension, `|vertices| - 1`. The empty simplex has dimension -1.
    pub fn dim(&self) -> isize {
        self.len as isize - 1
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.vertices().binary_search(&v).is_ok()
    }

    pub fn is_face_of(&self, other: &Simplex) -> bool {
        self.vertices().iter().all(|v| other.contains(*v))
    }

    pub fn max_vertex(&self) -> Option<Vertex> {
        self.vertices().last().copied()
    }

    /// Adds a vertex; errors if it is already present.
    pub fn with_vertex(&self, v: Vertex) -> Result<Simplex> {
        if self.contains(v) {
            return Err(Error::RepeatedVertex(v));
        }
        let mut all: Vec<Vertex> = self.vertices().to_vec();
        all.push(v);
        Simplex::new(&all)
    }

    /// Removes a vertex if present.
    pub fn without_vertex(&self, v: Vertex) -> Simplex {
        let mut out = [0; MAX_SIMPLEX_VERTICES];
        let mut k = 0;
        for &u in self.vertices() {
            if u != v {
                out[k] = u;
                k += 1;
            }
        }
        Simplex { len: k as u8, verts: out }
    }

    /// Vertices of `self` not in `other`.
    pub fn minus(&self, other: &Simplex) -> Simplex {
        let kept: Vec<Vertex> = self.vertices().iter().copied().filter(|v| !other.contains(*v)).collect();
        Simplex::from_sorted(&kept)
    }

    pub fn intersection(&self, other: &Simplex) -> Simplex {
        let kept: Vec<Vertex> = self.vertices().iter().copied().filter(|v| other.contains(*v)).collect();
        Simplex::from_sorted(&kept)
    }

    /// Codimension-one faces, in lexicographic order of the dropped vertex.
    pub fn ridges(&self) -> impl Iterator<Item = Simplex> + '_ {
        self.vertices().iter().map(move |&v| self.without_vertex(v))
    }

    /// Replaces vertex `from` with `to`, re-sorting. Errors if `to` is already present.
    pub fn relabel(&self, from: Vertex, to: Vertex) -> Result<Simplex> {
        if !self.contains(from) {
            return Ok(*self);
        }
        self.without_vertex(from).with_vertex(to)
    }
}

impl PartialEq for Simplex {
    fn eq(&self, other: &Self) -> bool {
        self.vertices() == other.vertices()
    }
}

impl Eq for Simplex {}

impl Hash for Simplex {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.vertices().hash(state)
    }
}

impl PartialOrd for Simplex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Simplex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.vertices().cmp(other.vertices())
    }
}

impl fmt::Debug for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.vertices().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A pure `d`-dimensional complex on the ambient vertex range `1..=n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PureComplex {
    d: usize,
    n: u32,
    facets: Vec<Simplex>,
}

impl PureComplex {
    /// Validates and canonicalizes a facet list.
    pub fn new(d: usize, n: u32, facets: impl IntoIterator<Item = Simplex>) -> Result<Self> {
        let mut facets: Vec<Simplex> = facets.into_iter().collect();
        for f in &facets {
            if f.len() != d + 1 {
                return Err(Error::WrongFacetSize { facet: *f, expected: d + 1 });
            }
            if f.max_vertex().is_some_and(|m| m > n) {
                return Err(Error::VertexOutOfRange { facet: *f, n });
            }
        }
        facets.sort_unstable();
        for w in facets.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateFacet(w[0]));
            }
        }
        Ok(PureComplex { d, n, facets })
    }

    /// Convenience constructor from raw vertex lists.
    pub fn from_lists(d: usize, n: u32, facets: &[&[Vertex]]) -> Result<Self> {
        let simplices = facets.iter().map(|f| Simplex::new(f)).collect::<Result<Vec<_>>>()?;
        Self::new(d, n, simplices)
    }

    /// Builds from facets known to be valid and distinct; sorts them.
    pub(crate) fn from_facets_unchecked(d: usize, n: u32, mut facets: Vec<Simplex>) -> Self {
        facets.sort_unstable();
        debug_assert!(facets.windows(2).all(|w| w[0] != w[1]));
        debug_assert!(facets.iter().all(|f| f.len() == d + 1));
        PureComplex { d, n, facets }
    }

    pub fn empty(d: usize, n: u32) -> Self {
        PureComplex { d, n, facets: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Ambient vertex count.
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn facets(&self) -> &[Simplex] {
        &self.facets
    }

    pub fn num_facets(&self) -> usize {
        self.facets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facets.is_empty()
    }

    pub fn contains_facet(&self, f: &Simplex) -> bool {
        self.facets.binary_search(f).is_ok()
    }

    /// Same facets, different ambient vertex count.
    pub fn with_n(&self, n: u32) -> Result<Self> {
        Self::new(self.d, n, self.facets.iter().copied())
    }

    /// Sorted list of vertices appearing in some facet.
    pub fn used_vertices(&self) -> Vec<Vertex> {
        let set: BTreeSet<Vertex> = self.facets.iter().flat_map(|f| f.vertices().iter().copied()).collect();
        set.into_iter().collect()
    }

    /// True when every vertex in `1..=n` appears.
    pub fn is_spanning(&self) -> bool {
        self.used_vertices().len() == self.n as usize
    }

    /// All `k`-dimensional faces of the downward closure, sorted.
    pub fn faces(&self, k: usize) -> Vec<Simplex> {
        if k > self.d {
            return Vec::new();
        }
        let mut out: HashSet<Simplex> = HashSet::new();
        let mut buf = Vec::with_capacity(k + 1);
        for f in &self.facets {
            subsets_of_size(f.vertices(), k + 1, &mut buf, 0, &mut |s| {
                out.insert(Simplex::from_sorted(s));
            });
        }
        let mut v: Vec<Simplex> = out.into_iter().collect();
        v.sort_unstable();
        v
    }

    /// Edges of the 1-skeleton as sorted pairs.
    pub fn edges(&self) -> Vec<(Vertex, Vertex)> {
        self.faces(1).into_iter().map(|e| (e.vertices()[0], e.vertices()[1])).collect()
    }

    /// The `(d-1)`-faces contained in an odd number of facets.
    pub fn boundary_complex(&self) -> PureComplex {
        if self.d == 0 {
            return PureComplex::empty(0, self.n);
        }
        let mut parity: HashMap<Simplex, bool> = HashMap::new();
        for f in &self.facets {
            for r in f.ridges() {
                let e = parity.entry(r).or_insert(false);
                *e = !*e;
            }
        }
        let faces = parity.into_iter().filter(|(_, odd)| *odd).map(|(r, _)| r).collect();
        PureComplex::from_facets_unchecked(self.d - 1, self.n, faces)
    }

    /// `{ tau - sigma : tau facet, sigma subset of tau }`, a pure complex of dimension `d - |sigma|`.
    pub fn link(&self, sigma: &Simplex) -> Result<PureComplex> {
        if sigma.len() > self.d {
            return Err(Error::InvalidParameter(format!(
                "link of {sigma} requires dimension below {}",
                self.d
            )));
        }
        let faces = self.facets.iter().filter(|t| sigma.is_face_of(t)).map(|t| t.minus(sigma)).collect();
        Ok(PureComplex::from_facets_unchecked(self.d - sigma.len(), self.n, faces))
    }

    /// Joins every facet with the new vertex `z`.
    pub fn cone(&self, z: Vertex) -> Result<PureComplex> {
        if z == 0 {
            return Err(Error::ZeroVertex);
        }
        if self.facets.iter().any(|f| f.contains(z)) {
            return Err(Error::ConeVertexClash(z));
        }
        if self.d + 2 > MAX_SIMPLEX_VERTICES {
            return Err(Error::TooManyVertices(self.d + 2));
        }
        let facets = self.facets.iter().map(|f| f.with_vertex(z)).collect::<Result<Vec<_>>>()?;
        Ok(PureComplex::from_facets_unchecked(self.d + 1, self.n.max(z), facets))
    }

    /// Alternating sum of face counts over the downward closure.
    pub fn euler_characteristic(&self) -> i64 {
        if self.facets.is_empty() {
            return 0;
        }
        (0..=self.d)
            .map(|k| {
                let c = self.faces(k).len() as i64;
                if k % 2 == 0 {
                    c
                } else {
                    -c
                }
            })
            .sum()
    }

    /// Facet union; ambient `n` is the larger of the two.
    pub fn union(&self, other: &PureComplex) -> Result<PureComplex> {
        if self.d != other.d {
            return Err(Error::InvalidParameter("union of complexes of different dimension".into()));
        }
        let set: BTreeSet<Simplex> = self.facets.iter().chain(other.facets.iter()).copied().collect();
        Ok(PureComplex::from_facets_unchecked(self.d, self.n.max(other.n), set.into_iter().collect()))
    }

    /// Facets of `self` not in `other`.
    pub fn difference(&self, other: &PureComplex) -> PureComplex {
        let facets = self.facets.iter().filter(|f| !other.contains_facet(f)).copied().collect();
        PureComplex::from_facets_unchecked(self.d, self.n, facets)
    }

    pub fn is_subcomplex_of(&self, other: &PureComplex) -> bool {
        self.d == other.d && self.facets.iter().all(|f| other.contains_facet(f))
    }

    /// Applies a vertex relabeling (must be injective on used vertices).
    pub fn relabeled(&self, n: u32, map: impl Fn(Vertex) -> Vertex) -> Result<PureComplex> {
        let facets = self
            .facets
            .iter()
            .map(|f| Simplex::new(&f.vertices().iter().map(|&v| map(v)).collect::<Vec<_>>()))
            .collect::<Result<Vec<_>>>()?;
        PureComplex::new(self.d, n, facets)
    }
}

fn subsets_of_size(
    items: &[Vertex],
    k: usize,
    buf: &mut Vec<Vertex>,
    start: usize,
    emit: &mut impl FnMut(&[Vertex]),
) {
    if buf.len() == k {
        emit(buf);
        return;
    }
    let need = k - buf.len();
    for i in start..items.len() {
        if items.len() - i < need {
            break;
        }
        buf.push(items[i]);
        subsets_of_size(items, k, buf, i + 1, emit);
        buf.pop();
    }
}

impl fmt::Display for PureComplex {
    /// Text format: header `d=<d> n=<n>`, then one ascending facet per line.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "d={} n={}", self.d, self.n)?;
        for facet in &self.facets {
            let line: Vec<String> = facet.vertices().iter().map(|v| v.to_string()).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

impl FromStr for PureComplex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty input".into() })?;
        let mut d = None;
        let mut n = None;
        for tok in header.split_whitespace() {
            let bad = || Error::Parse { line: 1, msg: format!("bad header token `{tok}`") };
            match tok.split_once('=') {
                Some(("d", v)) => d = Some(v.parse::<usize>().map_err(|_| bad())?),
                Some(("n", v)) => n = Some(v.parse::<u32>().map_err(|_| bad())?),
                _ => return Err(bad()),
            }
        }
        let (d, n) = match (d, n) {
            (Some(d), Some(n)) => (d, n),
            _ => return Err(Error::Parse { line: 1, msg: "header must be `d=<int> n=<int>`".into() }),
        };
        let mut facets = Vec::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let verts = line
                .split_whitespace()
                .map(|t| t.parse::<Vertex>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
            facets.push(Simplex::new(&verts).map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?);
        }
        PureComplex::new(d, n, facets)
    }
}
