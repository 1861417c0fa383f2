//! Patterns, subdivision and tiling certificates, and their verifier.
//!
//! A certificate lists one route per pattern arc. Routes are keyed by the
//! arc itself, and the pattern's arcs are always taken in lexicographic
//! order, so "the i-th length" means the length of the i-th arc in that order.

use crate::bitset::BitSet;
use crate::digraph::Digraph;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pattern {
    graph: Digraph,
    arcs: Vec<(usize, usize)>,
}

impl Pattern {
    /// Rejects patterns with isolated vertices.
    pub fn new(graph: Digraph) -> Result<Self> {
        if graph.n() == 0 {
            return Err(Error::input("pattern has no vertices"));
        }
        for v in 0..graph.n() {
            if graph.out_degree(v) + graph.in_degree(v) == 0 {
                return Err(Error::input(format!("pattern vertex {v} is isolated")));
            }
        }
        let arcs = graph.arcs().collect();
        Ok(Pattern { graph, arcs })
    }

    pub fn single_arc() -> Self {
        Pattern::new(Digraph::from_arcs(2, &[(0, 1)]).unwrap()).unwrap()
    }

    pub fn two_cycle() -> Self {
        Pattern::new(Digraph::from_arcs(2, &[(0, 1), (1, 0)]).unwrap()).unwrap()
    }

    /// `0 -> 1`, `0 -> 2`, `1 -> 2`.
    pub fn transitive_triangle() -> Self {
        Pattern::new(Digraph::from_arcs(3, &[(0, 1), (0, 2), (1, 2)]).unwrap()).unwrap()
    }

    /// Looks up a built-in pattern by name (`arc`, `2-cycle`, `tt3`).
    pub fn named(name: &str) -> Option<Self> {
        match name {
            "arc" | "single-arc" => Some(Self::single_arc()),
            "2-cycle" | "two-cycle" | "c2" => Some(Self::two_cycle()),
            "tt3" | "transitive-triangle" => Some(Self::transitive_triangle()),
            _ => None,
        }
    }

    pub fn graph(&self) -> &Digraph {
        &self.graph
    }

    /// Vertex count.
    pub fn s(&self) -> usize {
        self.graph.n()
    }

    /// Arc count.
    pub fn h(&self) -> usize {
        self.arcs.len()
    }

    pub fn arcs(&self) -> &[(usize, usize)] {
        &self.arcs
    }

    pub fn arc_index(&self, arc: (usize, usize)) -> Option<usize> {
        self.arcs.binary_search(&arc).ok()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubdivisionCert {
    /// `branch[x]` is the host vertex carrying pattern vertex `x`.
    pub branch: Vec<usize>,
    /// One route per pattern arc, in the pattern's arc order.
    pub routes: Vec<Vec<usize>>,
}

impl SubdivisionCert {
    pub fn lengths(&self) -> Vec<usize> {
        self.routes.iter().map(|r| r.len().saturating_sub(1)).collect()
    }

    /// All host vertices used (branch vertices and route vertices).
    pub fn vertex_set(&self, n: usize) -> BitSet {
        let mut s = BitSet::new(n);
        for &b in &self.branch {
            if b < n {
                s.insert(b);
            }
        }
        for r in &self.routes {
            for &v in r {
                if v < n {
                    s.insert(v);
                }
            }
        }
        s
    }

    pub fn order(&self, n: usize) -> usize {
        self.vertex_set(n).count()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TilingCert {
    pub parts: Vec<SubdivisionCert>,
    pub orders: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NotInjective { pattern_vertices: (usize, usize), host: usize },
    EndpointMismatch { arc: (usize, usize), expected: (usize, usize), got: (usize, usize) },
    NonArcStep { arc: (usize, usize), from: usize, to: usize },
    RepeatedVertex { arc: (usize, usize), vertex: usize },
    InteriorOverlap { vertex: usize, arcs: ((usize, usize), (usize, usize)) },
    InteriorHitsBranch { arc: (usize, usize), vertex: usize },
    NonSpanning { covered: usize, n: usize },
    LengthMismatch { arc: (usize, usize), expected: usize, got: usize },
    PartsOverlap { vertex: usize, parts: (usize, usize) },
    OrderMismatch { part: usize, expected: usize, got: usize },
    PartFailed { part: usize, violation: Box<Violation> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            NotInjective { pattern_vertices: (a, b), host } => {
                write!(f, "injectivity: pattern vertices {a} and {b} both map to {host}")
            }
            EndpointMismatch { arc, expected, got } => write!(
                f,
                "endpoint: route for arc {arc:?} runs {}..{}, expected {}..{}",
                got.0, got.1, expected.0, expected.1
            ),
            NonArcStep { arc, from, to } => write!(f, "non-arc step: route for arc {arc:?} uses {from}->{to}"),
            RepeatedVertex { arc, vertex } => write!(f, "not a path: route for arc {arc:?} repeats {vertex}"),
            InteriorOverlap { vertex, arcs } => {
                write!(f, "interior overlap: {vertex} inside routes for {:?} and {:?}", arcs.0, arcs.1)
            }
            InteriorHitsBranch { arc, vertex } => {
                write!(f, "interior overlap: route for arc {arc:?} passes branch vertex {vertex}")
            }
            NonSpanning { covered, n } => write!(f, "non-spanning: covers {covered} of {n} vertices"),
            LengthMismatch { arc, expected, got } => {
                write!(f, "length: route for arc {arc:?} has length {got}, expected {expected}")
            }
            PartsOverlap { vertex, parts } => {
                write!(f, "disjointness: vertex {vertex} in parts {} and {}", parts.0, parts.1)
            }
            OrderMismatch { part, expected, got } => {
                write!(f, "order: part {part} has {got} vertices, expected {expected}")
            }
            PartFailed { part, violation } => write!(f, "part {part}: {violation}"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Verdict {
    pub violations: Vec<Violation>,
}

impl Verdict {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn clauses(&self) -> Vec<String> {
        self.violations.iter().map(|v| v.to_string()).collect()
    }
}

fn check_shape(d: &Digraph, p: &Pattern, cert: &SubdivisionCert) -> Result<()> {
    if cert.branch.len() != p.s() {
        return Err(Error::input(format!(
            "certificate maps {} pattern vertices, pattern has {}",
            cert.branch.len(),
            p.s()
        )));
    }
    if cert.routes.len() != p.h() {
        return Err(Error::input(format!("certificate has {} routes, pattern has {} arcs", cert.routes.len(), p.h())));
    }
    for &b in &cert.branch {
        if b >= d.n() {
            return Err(Error::input(format!("branch vertex {b} outside 0..{}", d.n())));
        }
    }
    for (i, r) in cert.routes.iter().enumerate() {
        if r.is_empty() {
            return Err(Error::input(format!("empty route for arc {:?}", p.arcs()[i])));
        }
        if let Some(&v) = r.iter().find(|&&v| v >= d.n()) {
            return Err(Error::input(format!("route vertex {v} outside 0..{}", d.n())));
        }
    }
    Ok(())
}

/// Checks every clause and reports all violations found.
///
/// `required_lengths`, when given, is aligned with the pattern's arc order.
pub fn verify_subdivision(
    d: &Digraph,
    p: &Pattern,
    cert: &SubdivisionCert,
    require_spanning: bool,
    required_lengths: Option<&[usize]>,
) -> Result<Verdict> {
    check_shape(d, p, cert)?;
    if let Some(l) = required_lengths {
        if l.len() != p.h() {
            return Err(Error::input(format!("{} required lengths for {} arcs", l.len(), p.h())));
        }
    }
    let n = d.n();
    let mut out = Vec::new();

    let mut owner = vec![usize::MAX; n];
    let mut branch_set = BitSet::new(n);
    for (x, &b) in cert.branch.iter().enumerate() {
        if owner[b] != usize::MAX {
            out.push(Violation::NotInjective { pattern_vertices: (owner[b], x), host: b });
        } else {
            owner[b] = x;
        }
        branch_set.insert(b);
    }

    let mut interior_owner: Vec<Option<usize>> = vec![None; n];
    for (i, route) in cert.routes.iter().enumerate() {
        let arc = p.arcs()[i];
        let expected = (cert.branch[arc.0], cert.branch[arc.1]);
        let got = (route[0], *route.last().unwrap());
        if got != expected {
            out.push(Violation::EndpointMismatch { arc, expected, got });
        }
        let mut seen = BitSet::new(n);
        for &v in route {
            if !seen.insert(v) {
                out.push(Violation::RepeatedVertex { arc, vertex: v });
            }
        }
        for w in route.windows(2) {
            if !d.has_arc(w[0], w[1]) {
                out.push(Violation::NonArcStep { arc, from: w[0], to: w[1] });
            }
        }
        if route.len() > 2 {
            for &v in &route[1..route.len() - 1] {
                if branch_set.contains(v) {
                    out.push(Violation::InteriorHitsBranch { arc, vertex: v });
                }
                match interior_owner[v] {
                    Some(j) if j != i => {
                        out.push(Violation::InteriorOverlap { vertex: v, arcs: (p.arcs()[j], arc) });
                    }
                    _ => interior_owner[v] = Some(i),
                }
            }
        }
        if let Some(l) = required_lengths {
            if route.len() - 1 != l[i] {
                out.push(Violation::LengthMismatch { arc, expected: l[i], got: route.len() - 1 });
            }
        }
    }

    if require_spanning {
        let covered = cert.order(n);
        if covered != n {
            out.push(Violation::NonSpanning { covered, n });
        }
    }
    Ok(Verdict { violations: out })
}

pub fn verify_tiling(d: &Digraph, p: &Pattern, cert: &TilingCert) -> Result<Verdict> {
    if cert.parts.len() != cert.orders.len() {
        return Err(Error::input(format!("{} parts but {} declared orders", cert.parts.len(), cert.orders.len())));
    }
    let n = d.n();
    let mut out = Vec::new();
    let mut part_of: Vec<Option<usize>> = vec![None; n];
    let mut covered = 0;
    for (i, part) in cert.parts.iter().enumerate() {
        let v = verify_subdivision(d, p, part, false, None)?;
        out.extend(v.violations.into_iter().map(|x| Violation::PartFailed { part: i, violation: Box::new(x) }));
        let vs = part.vertex_set(n);
        let got = vs.count();
        if got != cert.orders[i] {
            out.push(Violation::OrderMismatch { part: i, expected: cert.orders[i], got });
        }
        for x in vs.iter() {
            match part_of[x] {
                Some(j) => out.push(Violation::PartsOverlap { vertex: x, parts: (j, i) }),
                None => {
                    part_of[x] = Some(i);
                    covered += 1;
                }
            }
        }
    }
    if covered != n {
        out.push(Violation::NonSpanning { covered, n });
    }
    Ok(Verdict { violations: out })
}

/// Doubles every edge of a simple undirected graph into a 2-cycle.
pub fn double_graph(n: usize, edges: &[(usize, usize)]) -> Result<Digraph> {
    let mut b = crate::digraph::DigraphBuilder::new(n);
    for &(u, v) in edges {
        if u == v {
            return Err(Error::input(format!("self-loop at {u} in undirected input")));
        }
        if u >= n || v >= n {
            return Err(Error::input(format!("edge {{{u},{v}}} outside 0..{n}")));
        }
        if b.has_arc(u, v) {
            return Err(Error::input(format!("repeated edge {{{u},{v}}}")));
        }
        b.ensure_arc(u, v);
        b.ensure_arc(v, u);
    }
    Ok(b.build())
}

#[derive(Serialize, Deserialize)]
struct RouteJson {
    arc: [usize; 2],
    route: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct CertJson {
    pattern: String,
    branch: Vec<[usize; 2]>,
    paths: Vec<RouteJson>,
}

#[derive(Serialize, Deserialize)]
struct TilingJson {
    orders: Vec<usize>,
    parts: Vec<CertJson>,
}

fn cert_to_json(p: &Pattern, c: &SubdivisionCert) -> CertJson {
    CertJson {
        pattern: p.graph().to_v1(),
        branch: c.branch.iter().enumerate().map(|(x, &b)| [x, b]).collect(),
        paths: p
            .arcs()
            .iter()
            .zip(&c.routes)
            .map(|(&(u, v), r)| RouteJson { arc: [u, v], route: r.clone() })
            .collect(),
    }
}

fn cert_from_json(j: CertJson) -> Result<(Pattern, SubdivisionCert)> {
    let p = Pattern::new(Digraph::parse_v1(&j.pattern)?)?;
    let mut branch = vec![usize::MAX; p.s()];
    for [x, b] in j.branch {
        if x >= p.s() || branch[x] != usize::MAX {
            return Err(Error::input(format!("bad branch entry for pattern vertex {x}")));
        }
        branch[x] = b;
    }
    if branch.contains(&usize::MAX) {
        return Err(Error::input("branch map does not cover every pattern vertex"));
    }
    let mut routes = vec![None; p.h()];
    for r in j.paths {
        let i = p
            .arc_index((r.arc[0], r.arc[1]))
            .ok_or_else(|| Error::input(format!("route for non-arc {:?}", r.arc)))?;
        if routes[i].is_some() {
            return Err(Error::input(format!("two routes for arc {:?}", r.arc)));
        }
        routes[i] = Some(r.route);
    }
    let routes = routes
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::input("some pattern arc has no route"))?;
    Ok((p, SubdivisionCert { branch, routes }))
}

pub fn subdivision_to_json(p: &Pattern, c: &SubdivisionCert) -> String {
    serde_json::to_string_pretty(&cert_to_json(p, c)).expect("serializable")
}

pub fn subdivision_from_json(s: &str) -> Result<(Pattern, SubdivisionCert)> {
    let j: CertJson = serde_json::from_str(s).map_err(|e| Error::input(format!("certificate JSON: {e}")))?;
    cert_from_json(j)
}

pub fn tiling_to_json(p: &Pattern, t: &TilingCert) -> String {
    let j = TilingJson { orders: t.orders.clone(), parts: t.parts.iter().map(|c| cert_to_json(p, c)).collect() };
    serde_json::to_string_pretty(&j).expect("serializable")
}

pub fn tiling_from_json(s: &str) -> Result<(Pattern, TilingCert)> {
    let j: TilingJson = serde_json::from_str(s).map_err(|e| Error::input(format!("tiling JSON: {e}")))?;
    let mut pattern = None;
    let mut parts = Vec::new();
    for c in j.parts {
        let (p, cert) = cert_from_json(c)?;
        match &pattern {
            None => pattern = Some(p),
            Some(q) if *q != p => return Err(Error::input("tiling parts use different patterns")),
            _ => {}
        }
        parts.push(cert);
    }
    let pattern = pattern.ok_or_else(|| Error::input("tiling certificate has no parts"))?;
    Ok((pattern, TilingCert { parts, orders: j.orders }))
}
