//! Sphere recognition for dimensions 2 and 3.
//!
//! For d = 2 the checks below characterize simplicial 2-spheres exactly. For
//! d = 3 they only certify a closed, connected 3-manifold with the Euler
//! characteristic of S^3; sphericity in that dimension needs an LC trace.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::simplex::{PureComplex, Simplex, Vertex};
use crate::unionfind::UnionFind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    Sphere2,
    ClosedManifold3,
    CertifiedLC,
    NotSphere,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Outcome::Sphere2 => "Sphere2",
            Outcome::ClosedManifold3 => "ClosedManifold3",
            Outcome::CertifiedLC => "CertifiedLC",
            Outcome::NotSphere => "NotSphere",
        };
        f.write_str(s)
    }
}

/// Why a complex was rejected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reason {
    TooSmall { used_vertices: usize },
    RidgeMultiplicity { ridge: Simplex, count: usize },
    BadLink { vertex: Vertex },
    Disconnected { components: usize },
    EulerCharacteristic { chi: i64, expected: i64 },
    /// An LC trace failed to replay or did not close up.
    InvalidCertificate(String),
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reason::TooSmall { used_vertices } => write!(f, "too small ({used_vertices} vertices used)"),
            Reason::RidgeMultiplicity { ridge, count } => write!(f, "ridge {ridge} lies in {count} facets"),
            Reason::BadLink { vertex } => write!(f, "link of vertex {vertex} is not a sphere"),
            Reason::Disconnected { components } => write!(f, "{components} connected components"),
            Reason::EulerCharacteristic { chi, expected } => write!(f, "euler characteristic {chi}, expected {expected}"),
            Reason::InvalidCertificate(msg) => write!(f, "invalid certificate: {msg}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SphereVerdict {
    pub outcome: Outcome,
    pub reason: Option<Reason>,
    pub spanning: bool,
}

impl SphereVerdict {
    pub fn is_sphere(&self) -> bool {
        matches!(self.outcome, Outcome::Sphere2 | Outcome::CertifiedLC)
    }

    /// Accepted by the verifier in any positive form.
    pub fn passed(&self) -> bool {
        self.outcome != Outcome::NotSphere
    }

    pub(crate) fn rejected(reason: Reason, spanning: bool) -> Self {
        SphereVerdict { outcome: Outcome::NotSphere, reason: Some(reason), spanning }
    }
}

/// Manifold checks for pure complexes of dimension 2 or 3.
pub fn verify(k: &PureComplex) -> Result<SphereVerdict> {
    let d = k.dim();
    if d != 2 && d != 3 {
        return Err(Error::UnsupportedDimension(d));
    }
    let spanning = k.is_spanning();
    let outcome = match check_sphere_like(k) {
        Ok(()) => {
            if d == 2 {
                Outcome::Sphere2
            } else {
                Outcome::ClosedManifold3
            }
        }
        Err(reason) => return Ok(SphereVerdict::rejected(reason, spanning)),
    };
    Ok(SphereVerdict { outcome, reason: None, spanning })
}

/// Checks a closed pure complex of dimension 1, 2 or 3 against the local and
/// global criteria used by [`verify`]. Dimension 1 means "single cycle".
pub(crate) fn check_sphere_like(k: &PureComplex) -> std::result::Result<(), Reason> {
    let d = k.dim();
    let used = k.used_vertices();
    if k.is_empty() || used.len() < d + 2 {
        return Err(Reason::TooSmall { used_vertices: used.len() });
    }
    let facets = k.facets();

    // Each ridge in exactly two facets; remember the facet pairs for connectivity.
    let mut ridge_owner: HashMap<Simplex, (usize, usize)> = HashMap::with_capacity(facets.len() * (d + 1));
    for (i, f) in facets.iter().enumerate() {
        for r in f.ridges() {
            let e = ridge_owner.entry(r).or_insert((i, usize::MAX));
            if e.0 != i && e.1 == usize::MAX {
                e.1 = i;
            } else if e.0 != i {
                return Err(Reason::RidgeMultiplicity { ridge: r, count: 3 });
            }
        }
    }
    for (r, (_, b)) in &ridge_owner {
        if *b == usize::MAX {
            return Err(Reason::RidgeMultiplicity { ridge: *r, count: 1 });
        }
    }

    let mut uf = UnionFind::new(facets.len());
    for (a, b) in ridge_owner.values() {
        uf.union(*a, *b);
    }
    let components = uf.count_sets();
    if components != 1 {
        return Err(Reason::Disconnected { components });
    }

    if d >= 2 {
        let mut incident: HashMap<Vertex, Vec<Simplex>> = HashMap::with_capacity(used.len());
        for f in facets {
            for &v in f.vertices() {
                incident.entry(v).or_default().push(f.without_vertex(v));
            }
        }
        for &v in &used {
            let link = PureComplex::from_facets_unchecked(d - 1, k.n(), incident.remove(&v).unwrap_or_default());
            if check_sphere_like(&link).is_err() {
                return Err(Reason::BadLink { vertex: v });
            }
        }
    }

    let chi = k.euler_characteristic();
    let expected = if d.is_multiple_of(2) { 2 } else { 0 };
    if chi != expected {
        return Err(Reason::EulerCharacteristic { chi, expected });
    }
    Ok(())
}
