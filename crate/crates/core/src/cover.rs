//! Short paths absorbing the leftover vertices of an extremal partition into
//! the dense blocks, plus the side-balancing paths the block embedders need.

use crate::bitset::BitSet;
use crate::classify::{ExtremalKind, ExtremalPartition};
use crate::digraph::Digraph;
use crate::error::{Error, Result};
use crate::matching::Bipartite;
use crate::rng::derive;
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Where a path starts and ends, by block index (0-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Role {
    Within(usize),
    Between(usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TaggedPath {
    pub path: Vec<usize>,
    pub role: Role,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct PathSystem {
    pub paths: Vec<TaggedPath>,
    /// Arcs from the larger leftover class into a block, and into it from the other block.
    pub m1: Vec<(usize, usize)>,
    pub m2: Vec<(usize, usize)>,
}

impl PathSystem {
    pub fn vertices(&self, n: usize) -> BitSet {
        BitSet::from_iter(n, self.paths.iter().flat_map(|p| p.path.iter().copied()))
    }

    pub fn with_role(&self, role: Role) -> impl Iterator<Item = &TaggedPath> {
        self.paths.iter().filter(move |p| p.role == role)
    }
}

struct Pick<'a> {
    d: &'a Digraph,
    used: BitSet,
    rng: ChaCha8Rng,
}

impl<'a> Pick<'a> {
    /// Random unused member of `pool` satisfying `ok`.
    fn one(&mut self, pool: &BitSet, ok: impl Fn(usize) -> bool) -> Option<usize> {
        let mut c: Vec<usize> = pool.difference(&self.used).iter().filter(|&v| ok(v)).collect();
        c.shuffle(&mut self.rng);
        let v = *c.first()?;
        self.used.insert(v);
        Some(v)
    }

    fn free(&self, pool: &BitSet) -> BitSet {
        pool.difference(&self.used)
    }

    fn take(&mut self, path: &[usize]) {
        for &v in path {
            self.used.insert(v);
        }
    }

    /// Maximum set of disjoint arcs from `from` to `to` among unused vertices.
    fn arcs(&mut self, from: &BitSet, to: &BitSet, want: usize) -> Vec<(usize, usize)> {
        let l: Vec<usize> = self.free(from).iter().collect();
        let r: Vec<usize> = self.free(to).iter().collect();
        let adj = l.iter().map(|&u| (0..r.len()).filter(|&j| r[j] != u && self.d.has_arc(u, r[j])).collect()).collect();
        let m = Bipartite::new(r.len(), adj).max_matching();
        let mut out: Vec<(usize, usize)> = l.iter().zip(&m.left).filter_map(|(&u, j)| j.map(|j| (u, r[j]))).collect();
        // Two arcs may share a vertex when `from` and `to` overlap.
        let mut seen = BitSet::new(self.d.n());
        out.retain(|&(u, v)| {
            if seen.contains(u) || seen.contains(v) {
                return false;
            }
            seen.insert(u);
            seen.insert(v);
            true
        });
        out.shuffle(&mut self.rng);
        out.truncate(want);
        for &(u, v) in &out {
            self.used.insert(u);
            self.used.insert(v);
        }
        out
    }
}

fn fail(stage: &str, what: impl Into<String>) -> Error {
    Error::stage(stage, what)
}

fn class_score(d: &Digraph, w: usize, ins: &BitSet, outs: &BitSet) -> f64 {
    let a = d.in_degree_in(w, ins) as f64 / ins.count().max(1) as f64;
    let b = d.out_degree_in(w, outs) as f64 / outs.count().max(1) as f64;
    a.min(b)
}

/// Splits leftovers by which block they are entered from: first those
/// entered from `x` and leaving to `y`, then the reverse.
fn split(d: &Digraph, rest: &BitSet, x: &BitSet, y: &BitSet) -> (Vec<usize>, Vec<usize>) {
    let mut a = Vec::new();
    let mut b = Vec::new();
    for w in rest.iter() {
        if class_score(d, w, x, y) >= class_score(d, w, y, x) {
            a.push(w);
        } else {
            b.push(w);
        }
    }
    (a, b)
}

/// Paths through every leftover vertex of a two-clique partition. Every path
/// starts and ends in the same clique and has length at most 4.
pub fn cover_exceptional_ec1(d: &Digraph, part: &ExtremalPartition, seed: u64) -> Result<PathSystem> {
    if part.kind != ExtremalKind::TwoCliques {
        return Err(Error::input("two-clique cover needs a two-clique partition"));
    }
    let n = d.n();
    let sets = part.sets(n);
    let (s31, s32) = split(d, &sets[2], &sets[0], &sets[1]);
    // Orient so that the first class is the larger one.
    let (x, y, big, small, xi, yi) = if s31.len() >= s32.len() {
        (&sets[0], &sets[1], s31, s32, 0, 1)
    } else {
        (&sets[1], &sets[0], s32, s31, 1, 0)
    };
    let mut p = Pick { d, used: sets[2].clone(), rng: derive(seed, 0xc1) };
    let mut sys = PathSystem::default();
    let r = big.len() - small.len();
    let mut big = big;
    big.shuffle(&mut p.rng);
    // Arcs leaving the larger class into `x`, then arcs entering it from `y`.
    let mut matched = Vec::new();
    for &w in &big {
        if matched.len() == r {
            break;
        }
        if let Some(t) = p.one(x, |t| d.has_arc(w, t)) {
            sys.m1.push((w, t));
            matched.push(w);
        } else if let Some(t) = p.one(y, |t| d.has_arc(t, w)) {
            sys.m2.push((t, w));
            matched.push(w);
        }
    }
    for &(w, t) in &sys.m1 {
        let a = p.one(x, |a| d.has_arc(a, w)).ok_or_else(|| fail("cover-ec1", "no in-neighbour for a matched leftover"))?;
        sys.paths.push(TaggedPath { path: vec![a, w, t], role: Role::Within(xi) });
    }
    for &(t, w) in &sys.m2 {
        let c = p.one(y, |c| d.has_arc(w, c)).ok_or_else(|| fail("cover-ec1", "no out-neighbour for a matched leftover"))?;
        sys.paths.push(TaggedPath { path: vec![t, w, c], role: Role::Within(yi) });
    }
    let mut rest: Vec<usize> = big.iter().copied().filter(|w| !matched.contains(w)).collect();
    let short = r - matched.len();
    if short > 0 {
        // Disjoint arcs from `y` back into `x` carry the remaining surplus.
        let back = p.arcs(y, x, short);
        if back.len() < short {
            return Err(fail("cover-ec1", format!("need {short} arcs back between the cliques, found {}", back.len())));
        }
        for (v, u) in back {
            let w = rest.pop().unwrap();
            let a = p.one(x, |a| d.has_arc(a, w)).ok_or_else(|| fail("cover-ec1", "no in-neighbour"))?;
            let b = p.one(y, |b| d.has_arc(w, b) && d.has_arc(b, v)).ok_or_else(|| fail("cover-ec1", "no link to a back arc"))?;
            sys.paths.push(TaggedPath { path: vec![a, w, b, v, u], role: Role::Within(xi) });
        }
    }
    debug_assert_eq!(rest.len(), small.len());
    for (k, (&u, &v)) in rest.iter().zip(&small).enumerate() {
        // u is entered from x and leaves to y; v the reverse.
        let path = if k % 2 == 0 {
            let a = p.one(y, |a| d.has_arc(a, v));
            let b = p.one(x, |b| d.has_arc(v, b) && d.has_arc(b, u));
            let c = p.one(y, |c| d.has_arc(u, c));
            (a.zip(b).zip(c)).map(|((a, b), c)| (vec![a, v, b, u, c], yi))
        } else {
            let a = p.one(x, |a| d.has_arc(a, u));
            let b = p.one(y, |b| d.has_arc(u, b) && d.has_arc(b, v));
            let c = p.one(x, |c| d.has_arc(v, c));
            (a.zip(b).zip(c)).map(|((a, b), c)| (vec![a, u, b, v, c], xi))
        };
        let (path, i) = path.ok_or_else(|| fail("cover-ec1", "cannot pair two leftovers"))?;
        sys.paths.push(TaggedPath { path, role: Role::Within(i) });
    }
    let bad = check_cover(d, part, &sys);
    if !bad.is_empty() {
        return Err(fail("cover-ec1", bad.join("; ")));
    }
    Ok(sys)
}

/// Paths through every leftover vertex of a bipartite partition, leaving
/// equally many free vertices on both sides.
pub fn cover_exceptional_ec2(d: &Digraph, part: &ExtremalPartition, seed: u64) -> Result<PathSystem> {
    if part.kind != ExtremalKind::Bipartite {
        return Err(Error::input("bipartite cover needs a bipartite partition"));
    }
    let n = d.n();
    let sets = part.sets(n);
    let mut p = Pick { d, used: sets[2].clone(), rng: derive(seed, 0xc2) };
    let mut sys = PathSystem::default();
    let (s31, s32) = split(d, &sets[2], &sets[0], &sets[1]);
    // Surplus side first.
    let (x, y, xi, yi, into_y, into_x) = if sets[0].count() >= sets[1].count() {
        (&sets[0], &sets[1], 0, 1, s31, s32)
    } else {
        (&sets[1], &sets[0], 1, 0, s32, s31)
    };
    let mut r = x.count() - y.count();
    // Leftovers entered from x may leave back into x, and leftovers leaving
    // to x may be entered from x; each such use absorbs one surplus vertex.
    for &w in &into_y {
        if r > 0 {
            if let Some(t) = p.one(x, |t| d.has_arc(w, t)) {
                let a = p.one(x, |a| d.has_arc(a, w)).ok_or_else(|| fail("cover-ec2", "no in-neighbour"))?;
                sys.m1.push((w, t));
                sys.paths.push(TaggedPath { path: vec![a, w, t], role: Role::Within(xi) });
                r -= 1;
                continue;
            }
        }
        let a = p.one(x, |a| d.has_arc(a, w));
        let b = p.one(y, |b| d.has_arc(w, b));
        let (a, b) = a.zip(b).ok_or_else(|| fail("cover-ec2", "leftover has no wrap across the sides"))?;
        sys.paths.push(TaggedPath { path: vec![a, w, b], role: Role::Between(xi, yi) });
    }
    for &w in &into_x {
        if r > 0 {
            if let Some(t) = p.one(x, |t| d.has_arc(t, w)) {
                let c = p.one(x, |c| d.has_arc(w, c)).ok_or_else(|| fail("cover-ec2", "no out-neighbour"))?;
                sys.m2.push((t, w));
                sys.paths.push(TaggedPath { path: vec![t, w, c], role: Role::Within(xi) });
                r -= 1;
                continue;
            }
        }
        let b = p.one(y, |b| d.has_arc(b, w));
        let a = p.one(x, |a| d.has_arc(w, a));
        let (b, a) = b.zip(a).ok_or_else(|| fail("cover-ec2", "leftover has no wrap across the sides"))?;
        sys.paths.push(TaggedPath { path: vec![b, w, a], role: Role::Between(yi, xi) });
    }
    if r > 0 {
        let inner = p.arcs(x, x, r);
        if inner.len() < r {
            return Err(fail("cover-ec2", format!("sides differ by {r} but only {} arcs inside the larger side", inner.len())));
        }
        for (u, v) in inner {
            let b = p.one(y, |b| d.has_arc(v, b)).ok_or_else(|| fail("cover-ec2", "no exit from an inner arc"))?;
            sys.paths.push(TaggedPath { path: vec![u, v, b], role: Role::Between(xi, yi) });
        }
    }
    let bad = check_cover(d, part, &sys);
    if !bad.is_empty() {
        return Err(fail("cover-ec2", bad.join("; ")));
    }
    Ok(sys)
}

/// Paths through every leftover vertex of a four-block partition, leaving
/// the two bipartite blocks balanced.
pub fn cover_exceptional_ec3(d: &Digraph, part: &ExtremalPartition, seed: u64) -> Result<PathSystem> {
    if part.kind != ExtremalKind::FourBlock {
        return Err(Error::input("four-block cover needs a four-block partition"));
    }
    let n = d.n();
    let w = part.sets(n);
    let mut p = Pick { d, used: w[4].clone(), rng: derive(seed, 0xc3) };
    let mut sys = PathSystem::default();
    let mut lean = 0i64; // vertices added to block 0 minus block 2
    let mut pairs = Vec::new();
    for v in w[4].iter() {
        let cands = [
            (class_score(d, v, &w[0], &w[2]), 0),
            (class_score(d, v, &w[2], &w[0]), 1),
            (class_score(d, v, &w[1], &w[3]), 2),
            (class_score(d, v, &w[3], &w[1]), 3),
        ];
        let best = cands.iter().fold((f64::MIN, 0), |acc, &c| if c.0 > acc.0 + 1e-12 { c } else { acc });
        pairs.push((v, best.1));
    }
    for &(v, pattern) in &pairs {
        let path = match pattern {
            // Entered from block 0, leaves to block 2.
            0 if lean <= 0 => chain(&mut p, &[&w[0]], v, &[&w[2], &w[3], &w[0]]).map(|x| (x, 0)),
            0 => chain(&mut p, &[&w[2], &w[3], &w[0]], v, &[&w[2]]).map(|x| (x, 2)),
            // Entered from block 2, leaves to block 0.
            1 if lean <= 0 => chain(&mut p, &[&w[0], &w[1], &w[2]], v, &[&w[0]]).map(|x| (x, 0)),
            1 => chain(&mut p, &[&w[2]], v, &[&w[0], &w[1], &w[2]]).map(|x| (x, 2)),
            _ => None,
        };
        match (pattern, path) {
            (0 | 1, Some((path, i))) => {
                lean += if i == 0 { 1 } else { -1 };
                sys.paths.push(TaggedPath { path, role: Role::Within(i) });
            }
            (0 | 1, None) => return Err(fail("cover-ec3", format!("no clique-side path through leftover {v}"))),
            _ => {}
        }
    }
    for &(v, pattern) in &pairs {
        let (from, to, fi, ti) = match pattern {
            2 => (&w[1], &w[3], 1, 3),
            3 => (&w[3], &w[1], 3, 1),
            _ => continue,
        };
        let a = p.one(from, |a| d.has_arc(a, v));
        let b = p.one(to, |b| d.has_arc(v, b));
        let (a, b) = a.zip(b).ok_or_else(|| fail("cover-ec3", format!("no wrap across the bipartite blocks for {v}")))?;
        sys.paths.push(TaggedPath { path: vec![a, v, b], role: Role::Between(fi, ti) });
    }
    let free2 = p.free(&w[1]).count() as i64;
    let free4 = p.free(&w[3]).count() as i64;
    let r = (free2 - free4).unsigned_abs() as usize;
    if r > 0 {
        let (x, y, xi, yi) = if free2 > free4 { (&w[1], &w[3], 1, 3) } else { (&w[3], &w[1], 3, 1) };
        let mut left = r;
        // First route surplus vertices through a clique block when they can be.
        for u in p.free(x).iter().collect::<Vec<_>>() {
            if left == 0 {
                break;
            }
            for c in [0usize, 2] {
                let (a, b) = (p.free(&w[c]).iter().find(|&a| d.has_arc(a, u)), p.free(&w[c]).iter().find(|&b| d.has_arc(u, b)));
                if let (Some(a), Some(b)) = (a, b) {
                    if a != b {
                        p.take(&[a, u, b]);
                        sys.paths.push(TaggedPath { path: vec![a, u, b], role: Role::Within(c) });
                        left -= 1;
                        break;
                    }
                }
            }
        }
        let inner = p.arcs(x, x, left);
        if inner.len() < left {
            return Err(fail("cover-ec3", format!("bipartite blocks differ by {left} with too few inner arcs")));
        }
        for (u, v) in inner {
            let b = p.one(y, |b| d.has_arc(v, b)).ok_or_else(|| fail("cover-ec3", "no exit from an inner arc"))?;
            sys.paths.push(TaggedPath { path: vec![u, v, b], role: Role::Between(xi, yi) });
        }
    }
    let bad = check_cover(d, part, &sys);
    if !bad.is_empty() {
        return Err(fail("cover-ec3", bad.join("; ")));
    }
    Ok(sys)
}

/// Builds `before.. v after..` with each slot drawn from its block so that
/// consecutive vertices are joined by arcs.
fn chain(p: &mut Pick<'_>, before: &[&BitSet], v: usize, after: &[&BitSet]) -> Option<Vec<usize>> {
    let d = p.d;
    let mut path = vec![v];
    let saved = p.used.clone();
    for set in before.iter().rev() {
        let head = path[0];
        match p.one(set, |a| d.has_arc(a, head)) {
            Some(a) => path.insert(0, a),
            None => {
                p.used = saved;
                return None;
            }
        }
    }
    for set in after {
        let tail = *path.last().unwrap();
        match p.one(set, |b| d.has_arc(tail, b)) {
            Some(b) => path.push(b),
            None => {
                p.used = saved;
                return None;
            }
        }
    }
    Some(path)
}

/// Re-checks a path system against its partition without trusting its builder.
pub fn check_cover(d: &Digraph, part: &ExtremalPartition, sys: &PathSystem) -> Vec<String> {
    let n = d.n();
    let sets = part.sets(n);
    let mut bad = Vec::new();
    let mut seen = BitSet::new(n);
    for (k, tp) in sys.paths.iter().enumerate() {
        if !d.is_path(&tp.path) {
            bad.push(format!("path {k} is not a path"));
        }
        for &v in &tp.path {
            if !seen.insert(v) {
                bad.push(format!("vertex {v} used twice"));
            }
        }
        let (s, t) = (tp.path[0], *tp.path.last().unwrap());
        let (i, j) = match tp.role {
            Role::Within(i) => (i, i),
            Role::Between(i, j) => (i, j),
        };
        if i >= sets.len() || j >= sets.len() || !sets[i].contains(s) || !sets[j].contains(t) {
            bad.push(format!("path {k} ends outside its blocks"));
        }
        if part.kind == ExtremalKind::TwoCliques && tp.path.len() > 5 {
            bad.push(format!("path {k} longer than 4"));
        }
    }
    let rest = if part.kind == ExtremalKind::FourBlock { &sets[4] } else { &sets[2] };
    if !rest.is_subset(&seen) {
        bad.push(format!("{} leftover vertices uncovered", rest.difference(&seen).count()));
    }
    let free = |i: usize| sets[i].difference(&seen).count();
    match part.kind {
        ExtremalKind::Bipartite if free(0) != free(1) => bad.push(format!("free sides differ: {} vs {}", free(0), free(1))),
        ExtremalKind::FourBlock if free(1) != free(3) => bad.push(format!("free bipartite blocks differ: {} vs {}", free(1), free(3))),
        _ => {}
    }
    bad
}

pub fn cover_exceptional(d: &Digraph, part: &ExtremalPartition, seed: u64) -> Result<PathSystem> {
    match part.kind {
        ExtremalKind::TwoCliques => cover_exceptional_ec1(d, part, seed),
        ExtremalKind::Bipartite => cover_exceptional_ec2(d, part, seed),
        ExtremalKind::FourBlock => cover_exceptional_ec3(d, part, seed),
    }
}
