//! Loop-free digraphs on dense vertex labels `0..n`.
//!
//! Adjacency is kept twice, as out-rows and in-rows of a bit matrix, so that
//! neighbourhood intersections such as `N+(u) ∩ N-(v)` are word-parallel.
//! A [`Digraph`] is immutable; build one with [`DigraphBuilder`] or
//! [`Digraph::from_arcs`].
//!
//! The text interchange format ("digraph v1") is a header line `n m`
//! followed by `m` lines `u v`, one arc each, 0-based. Anything after `#`
//! on a line is ignored.

use crate::bitset::BitSet;
use crate::error::{Error, Result};

pub type VertexSet = BitSet;

#[derive(Clone, PartialEq, Eq)]
pub struct Digraph {
    n: usize,
    m: usize,
    out: Vec<BitSet>,
    inn: Vec<BitSet>,
}

impl std::fmt::Debug for Digraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Digraph(n={}, m={})", self.n, self.m)
    }
}

/// Mutable arc store used while generating or assembling a digraph.
#[derive(Clone)]
pub struct DigraphBuilder {
    n: usize,
    m: usize,
    out: Vec<BitSet>,
    inn: Vec<BitSet>,
}

impl DigraphBuilder {
    pub fn new(n: usize) -> Self {
        DigraphBuilder { n, m: 0, out: vec![BitSet::new(n); n], inn: vec![BitSet::new(n); n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn check(&self, u: usize, v: usize) -> Result<()> {
        if u >= self.n || v >= self.n {
            return Err(Error::input(format!("arc ({u},{v}) outside vertex range 0..{}", self.n)));
        }
        if u == v {
            return Err(Error::input(format!("self-loop at vertex {u}")));
        }
        Ok(())
    }

    /// Adds `u -> v`; a repeated arc is rejected.
    pub fn add_arc(&mut self, u: usize, v: usize) -> Result<()> {
        self.check(u, v)?;
        if self.out[u].contains(v) {
            return Err(Error::input(format!("parallel arc ({u},{v})")));
        }
        self.out[u].insert(v);
        self.inn[v].insert(u);
        self.m += 1;
        Ok(())
    }

    /// Adds `u -> v` unless present. Returns whether the arc is new.
    pub fn ensure_arc(&mut self, u: usize, v: usize) -> bool {
        assert!(u < self.n && v < self.n && u != v, "bad arc ({u},{v})");
        if self.out[u].insert(v) {
            self.inn[v].insert(u);
            self.m += 1;
            true
        } else {
            false
        }
    }

    pub fn remove_arc(&mut self, u: usize, v: usize) -> bool {
        if u < self.n && self.out[u].remove(v) {
            self.inn[v].remove(u);
            self.m -= 1;
            true
        } else {
            false
        }
    }

    pub fn has_arc(&self, u: usize, v: usize) -> bool {
        u < self.n && self.out[u].contains(v)
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.out[v].count()
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.inn[v].count()
    }

    pub fn out_set(&self, v: usize) -> &BitSet {
        &self.out[v]
    }

    pub fn in_set(&self, v: usize) -> &BitSet {
        &self.inn[v]
    }

    pub fn build(self) -> Digraph {
        Digraph { n: self.n, m: self.m, out: self.out, inn: self.inn }
    }
}

impl Digraph {
    pub fn from_arcs(n: usize, arcs: &[(usize, usize)]) -> Result<Self> {
        let mut b = DigraphBuilder::new(n);
        for &(u, v) in arcs {
            b.add_arc(u, v)?;
        }
        Ok(b.build())
    }

    pub fn empty(n: usize) -> Self {
        DigraphBuilder::new(n).build()
    }

    /// Complete digraph: every ordered pair of distinct vertices.
    pub fn complete(n: usize) -> Self {
        let mut b = DigraphBuilder::new(n);
        for u in 0..n {
            for v in 0..n {
                if u != v {
                    b.ensure_arc(u, v);
                }
            }
        }
        b.build()
    }

    /// Directed cycle `0 -> 1 -> ... -> n-1 -> 0`.
    pub fn cycle(n: usize) -> Self {
        let mut b = DigraphBuilder::new(n);
        for u in 0..n {
            b.ensure_arc(u, (u + 1) % n);
        }
        b.build()
    }

    /// Vertex-disjoint union; the second graph's labels are shifted by `self.n()`.
    pub fn disjoint_union(&self, other: &Digraph) -> Digraph {
        let mut b = DigraphBuilder::new(self.n + other.n);
        for (u, v) in self.arcs() {
            b.ensure_arc(u, v);
        }
        for (u, v) in other.arcs() {
            b.ensure_arc(u + self.n, v + self.n);
        }
        b.build()
    }

    pub fn to_builder(&self) -> DigraphBuilder {
        DigraphBuilder { n: self.n, m: self.m, out: self.out.clone(), inn: self.inn.clone() }
    }

    pub fn reverse(&self) -> Digraph {
        Digraph { n: self.n, m: self.m, out: self.inn.clone(), inn: self.out.clone() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arc_count(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn has_arc(&self, u: usize, v: usize) -> bool {
        u < self.n && self.out[u].contains(v)
    }

    #[inline]
    pub fn out_set(&self, v: usize) -> &BitSet {
        &self.out[v]
    }

    #[inline]
    pub fn in_set(&self, v: usize) -> &BitSet {
        &self.inn[v]
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.out[v].count()
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.inn[v].count()
    }

    /// `d+_X(v)` without range checks.
    #[inline]
    pub fn out_degree_in(&self, v: usize, x: &BitSet) -> usize {
        self.out[v].intersection_count(x)
    }

    /// `d-_X(v)` without range checks.
    #[inline]
    pub fn in_degree_in(&self, v: usize, x: &BitSet) -> usize {
        self.inn[v].intersection_count(x)
    }

    /// `min(d+_X(v), d-_X(v))`.
    pub fn semi_degree_in(&self, v: usize, x: &BitSet) -> usize {
        self.out_degree_in(v, x).min(self.in_degree_in(v, x))
    }

    /// Arcs in lexicographic order.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| self.out[u].iter().map(move |v| (u, v)))
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.n {
            return Err(Error::input(format!("vertex {v} outside 0..{}", self.n)));
        }
        Ok(())
    }

    fn check_set(&self, x: &VertexSet) -> Result<()> {
        if x.universe() != self.n {
            return Err(Error::input(format!(
                "vertex set over universe {} used with digraph on {} vertices",
                x.universe(),
                self.n
            )));
        }
        Ok(())
    }

    /// `N+(v) ∩ X`.
    pub fn out_neighbors(&self, v: usize, x: &VertexSet) -> Result<VertexSet> {
        self.check_vertex(v)?;
        self.check_set(x)?;
        Ok(self.out[v].intersection(x))
    }

    /// `N-(v) ∩ X`.
    pub fn in_neighbors(&self, v: usize, x: &VertexSet) -> Result<VertexSet> {
        self.check_vertex(v)?;
        self.check_set(x)?;
        Ok(self.inn[v].intersection(x))
    }

    /// Minimum over vertices of `min(d+, d-)`.
    pub fn min_semi_degree(&self) -> Result<usize> {
        if self.n == 0 {
            return Err(Error::input("minimum semi-degree of the empty digraph"));
        }
        Ok((0..self.n).map(|v| self.out_degree(v).min(self.in_degree(v))).min().unwrap())
    }

    /// Number of arcs `(x, y)` with `x ∈ X`, `y ∈ Y`.
    pub fn arc_count_between(&self, x: &VertexSet, y: &VertexSet) -> Result<usize> {
        self.check_set(x)?;
        self.check_set(y)?;
        Ok(self.count_between(x, y))
    }

    /// Unchecked form of [`Digraph::arc_count_between`].
    pub fn count_between(&self, x: &BitSet, y: &BitSet) -> usize {
        x.iter().map(|u| self.out[u].intersection_count(y)).sum()
    }

    /// Number of `u ∈ U` with both `v -> u` and `u -> v`.
    pub fn bidirectional_degree(&self, v: usize, u: &VertexSet) -> Result<usize> {
        self.check_vertex(v)?;
        self.check_set(u)?;
        Ok(self.bi_degree_in(v, u))
    }

    #[inline]
    pub fn bi_degree_in(&self, v: usize, u: &BitSet) -> usize {
        self.out[v].intersection3_count(&self.inn[v], u)
    }

    pub fn all(&self) -> VertexSet {
        BitSet::full(self.n)
    }

    pub fn set_of<I: IntoIterator<Item = usize>>(&self, it: I) -> VertexSet {
        BitSet::from_iter(self.n, it)
    }

    /// Checks that `path` is a directed path (distinct vertices, consecutive arcs).
    pub fn is_path(&self, path: &[usize]) -> bool {
        if path.is_empty() || path.iter().any(|&v| v >= self.n) {
            return false;
        }
        let mut seen = BitSet::new(self.n);
        for &v in path {
            if !seen.insert(v) {
                return false;
            }
        }
        path.windows(2).all(|w| self.has_arc(w[0], w[1]))
    }

    pub fn parse_v1(text: &str) -> Result<Digraph> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (ln, header) = lines.next().ok_or_else(|| Error::input("digraph v1: missing header line"))?;
        let nums = parse_pair(header, ln)?;
        let (n, m) = nums;
        let mut b = DigraphBuilder::new(n);
        let mut seen = 0usize;
        for (ln, line) in lines {
            let (u, v) = parse_pair(line, ln)?;
            b.add_arc(u, v).map_err(|e| match e {
                Error::Input(msg) => Error::input(format!("digraph v1 line {ln}: {msg}")),
                other => other,
            })?;
            seen += 1;
        }
        if seen != m {
            return Err(Error::input(format!("digraph v1: header declares {m} arcs, found {seen}")));
        }
        Ok(b.build())
    }

    pub fn to_v1(&self) -> String {
        let mut s = format!("{} {}\n", self.n, self.m);
        for (u, v) in self.arcs() {
            s.push_str(&format!("{u} {v}\n"));
        }
        s
    }
}

fn parse_pair(line: &str, ln: usize) -> Result<(usize, usize)> {
    let mut it = line.split_whitespace();
    let a = it.next().and_then(|t| t.parse::<usize>().ok());
    let b = it.next().and_then(|t| t.parse::<usize>().ok());
    match (a, b, it.next()) {
        (Some(a), Some(b), None) => Ok((a, b)),
        _ => Err(Error::input(format!("digraph v1 line {ln}: expected two non-negative integers, got {line:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_cycle() -> Digraph {
        Digraph::cycle(3)
    }

    #[test]
    fn neighbourhoods() {
        let c = three_cycle();
        assert_eq!(c.out_neighbors(0, &c.all()).unwrap().to_vec(), vec![1]);
        assert!(c.out_neighbors(0, &c.set_of([2])).unwrap().is_empty());
        assert_eq!(c.in_neighbors(0, &c.all()).unwrap().to_vec(), vec![2]);
        let k4 = Digraph::complete(4);
        assert_eq!(k4.out_neighbors(2, &k4.all()).unwrap().to_vec(), vec![0, 1, 3]);
        assert!(c.out_neighbors(3, &c.all()).unwrap_err().is_input());
    }

    #[test]
    fn semi_degree_examples() {
        assert_eq!(Digraph::complete(5).min_semi_degree().unwrap(), 4);
        assert_eq!(three_cycle().min_semi_degree().unwrap(), 1);
        let two_k4 = Digraph::complete(4).disjoint_union(&Digraph::complete(4));
        assert_eq!(two_k4.min_semi_degree().unwrap(), 3);
        assert!(Digraph::empty(0).min_semi_degree().is_err());
    }

    #[test]
    fn arc_counts() {
        let k4 = Digraph::complete(4);
        assert_eq!(k4.arc_count_between(&k4.set_of([0, 1]), &k4.set_of([2, 3])).unwrap(), 4);
        let c = three_cycle();
        assert_eq!(c.arc_count_between(&c.set_of([0, 1]), &c.set_of([0, 1])).unwrap(), 1);
        assert_eq!(c.arc_count_between(&c.set_of([]), &c.all()).unwrap(), 0);
    }

    #[test]
    fn bidirectional() {
        let k4 = Digraph::complete(4);
        assert_eq!(k4.bidirectional_degree(0, &k4.set_of([1, 2, 3])).unwrap(), 3);
        assert_eq!(three_cycle().bidirectional_degree(0, &three_cycle().all()).unwrap(), 0);
        let d = Digraph::from_arcs(3, &[(0, 1), (1, 0), (0, 2)]).unwrap();
        assert_eq!(d.bidirectional_degree(0, &d.set_of([1, 2])).unwrap(), 1);
    }

    #[test]
    fn rejects_bad_arcs() {
        assert!(Digraph::from_arcs(3, &[(0, 1), (0, 1)]).is_err());
        assert!(Digraph::from_arcs(3, &[(1, 1)]).is_err());
        assert!(Digraph::from_arcs(3, &[(0, 3)]).is_err());
        assert!(Digraph::from_arcs(3, &[(0, 1), (1, 0)]).is_ok());
    }

    #[test]
    fn v1_round_trip() {
        let text = "# a triangle\n3 3\n0 1\n1 2 # closing soon\n2 0\n";
        let d = Digraph::parse_v1(text).unwrap();
        assert_eq!(d, three_cycle());
        assert_eq!(Digraph::parse_v1(&d.to_v1()).unwrap(), d);
    }

    #[test]
    fn v1_errors() {
        assert!(Digraph::parse_v1("").is_err());
        assert!(Digraph::parse_v1("3 2\n0 1\n").is_err());
        assert!(Digraph::parse_v1("3 1\n0 x\n").is_err());
        assert!(Digraph::parse_v1("3 2\n0 1\n0 1\n").is_err());
        assert!(Digraph::parse_v1("2 1\n0 0\n").is_err());
    }
}
