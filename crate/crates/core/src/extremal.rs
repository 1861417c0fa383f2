//! Spanning subdivisions and tilings for the three extremal block structures.
//!
//! Every block is traversed by [`embed_block`]: cliques in clique mode, the
//! dense bipartite pairs in bipartite mode. Paths that visit another block
//! enter a block as prebuilt items, and threads through a block are routes
//! whose endpoints sit outside it.

use crate::bitset::BitSet;
use crate::classify::{ExtremalKind, ExtremalPartition};
use crate::cover::{cover_exceptional, PathSystem, Role};
use crate::digraph::Digraph;
use crate::embed::{choose_sides, elem, embed_block, sides_for_lengths, BlockSpec, Element, RouteSpec};
use crate::error::{Error, Result};
use crate::nonextremal::{check_lengths, check_orders};
use crate::params::ParameterLadder;
use crate::pattern::{verify_subdivision, verify_tiling, Pattern, SubdivisionCert, TilingCert};
use crate::rng::{derive, mix};
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

/// Full restarts, each with a fresh cover.
pub const ATTEMPTS: usize = 6;
const EMBED_ATTEMPTS: usize = 6;
/// Clique vertices with semi-degree inside their block below this fraction
/// are wrapped between two neighbours before the block is embedded.
pub const LOW_FRACTION: f64 = 0.5;

struct Work<'a> {
    d: &'a Digraph,
    sets: Vec<BitSet>,
    used: BitSet,
    sys: PathSystem,
    rng: ChaCha8Rng,
    seed: u64,
    calls: u64,
    low: f64,
}

impl<'a> Work<'a> {
    fn new(d: &'a Digraph, part: &ExtremalPartition, sys: PathSystem, low: f64, seed: u64) -> Self {
        let used = sys.vertices(d.n());
        Work { d, sets: part.sets(d.n()), used, sys, rng: derive(seed, 0xe7), seed, calls: 0, low }
    }

    fn next_seed(&mut self) -> u64 {
        self.calls += 1;
        mix(self.seed, self.calls)
    }

    fn free(&self, i: usize) -> Vec<usize> {
        self.sets[i].difference(&self.used).iter().collect()
    }

    fn take(&mut self, vs: &[usize]) {
        for &v in vs {
            self.used.insert(v);
        }
    }

    /// Free member of block `i` passing `ok` with the largest `key`.
    fn best(&mut self, i: usize, key: impl Fn(usize) -> usize, ok: impl Fn(usize) -> bool) -> Option<usize> {
        let mut c: Vec<usize> = self.free(i).into_iter().filter(|&v| ok(v)).collect();
        c.shuffle(&mut self.rng);
        c.sort_by_key(|&v| std::cmp::Reverse(key(v)));
        let v = *c.first()?;
        self.used.insert(v);
        Some(v)
    }

    fn weight(&self, keep: impl Fn(Role) -> bool) -> usize {
        self.sys.paths.iter().filter(|t| keep(t.role)).map(|t| t.path.len()).sum()
    }

    /// Free vertices plus cover paths of a clique block.
    fn clique_total(&self, i: usize) -> usize {
        self.free(i).len() + self.weight(|r| r == Role::Within(i))
    }

    fn bip_total(&self, ia: usize, ib: usize) -> usize {
        self.free(ia).len() + self.free(ib).len() + self.weight(|r| in_bip(r, ia, ib).is_some())
    }

    fn clique_spec(&mut self, i: usize, mut items: Vec<Element>) -> BlockSpec {
        let d = self.d;
        items.extend(self.sys.with_role(Role::Within(i)).map(|t| Element::new(t.path.clone(), false, false)));
        let set = self.sets[i].clone();
        let floor = self.low * set.count() as f64;
        for x in self.free(i) {
            if self.used.contains(x) || d.semi_degree_in(x, &set) as f64 >= floor {
                continue;
            }
            let saved = self.used.clone();
            self.used.insert(x);
            let u = self.best(i, |v| d.semi_degree_in(v, &set), |v| d.has_arc(v, x));
            let w = self.best(i, |v| d.semi_degree_in(v, &set), |v| d.has_arc(x, v));
            match (u, w) {
                (Some(u), Some(w)) => items.push(Element::new(vec![u, x, w], false, false)),
                _ => self.used = saved,
            }
        }
        BlockSpec { a: self.free(i), b: Vec::new(), clique: true, items }
    }

    fn bip_spec(&self, ia: usize, ib: usize, mut items: Vec<Element>) -> BlockSpec {
        for t in &self.sys.paths {
            if let Some((h, tl)) = in_bip(t.role, ia, ib) {
                items.push(Element::new(t.path.clone(), h, tl));
            }
        }
        BlockSpec { a: self.free(ia), b: self.free(ib), clique: false, items }
    }

    /// Branch vertices: side `false` from block `ia`, `true` from `ib`.
    fn branch(&mut self, sides: &[bool], ia: usize, ib: usize) -> Result<Vec<usize>> {
        let d = self.d;
        let mut f = Vec::with_capacity(sides.len());
        for &side in sides {
            let (i, other) = if side { (ib, ia) } else { (ia, ib) };
            let score = if ia == ib { self.sets[i].clone() } else { self.sets[other].clone() };
            let v = self
                .best(i, |v| d.semi_degree_in(v, &score), |_| true)
                .ok_or_else(|| Error::stage("branch", "a block has no free vertex for a branch vertex"))?;
            f.push(v);
        }
        Ok(f)
    }

    /// A path of length at most 2 from block `i` to block `j` through free vertices.
    fn bridge(&mut self, i: usize, j: usize) -> Option<Vec<usize>> {
        let d = self.d;
        let (si, sj) = (&self.sets[i], &self.sets[j]);
        let mut fi = self.free(i);
        let fj = self.free(j);
        fi.shuffle(&mut self.rng);
        let score = |u: usize, v: usize| d.semi_degree_in(u, si).min(d.semi_degree_in(v, sj));
        let direct = fi.iter().flat_map(|&u| fj.iter().map(move |&v| (u, v))).filter(|&(u, v)| d.has_arc(u, v)).max_by_key(|&(u, v)| score(u, v));
        if let Some((u, v)) = direct {
            self.take(&[u, v]);
            return Some(vec![u, v]);
        }
        let all = self.used.complement();
        let mut mids: Vec<usize> = all.iter().collect();
        mids.shuffle(&mut self.rng);
        for z in mids {
            let u = fi.iter().copied().filter(|&u| u != z && d.has_arc(u, z)).max_by_key(|&u| d.semi_degree_in(u, si));
            let v = fj.iter().copied().filter(|&v| v != z && d.has_arc(z, v)).max_by_key(|&v| d.semi_degree_in(v, sj));
            if let (Some(u), Some(v)) = (u, v) {
                if u != v {
                    self.take(&[u, z, v]);
                    return Some(vec![u, z, v]);
                }
            }
        }
        None
    }
}

/// Slot flags of a cover path inside the bipartite block `(ia, ib)`.
fn in_bip(r: Role, ia: usize, ib: usize) -> Option<(bool, bool)> {
    match r {
        Role::Within(i) if i == ia => Some((false, false)),
        Role::Within(i) if i == ib => Some((true, true)),
        Role::Between(i, j) if (i, j) == (ia, ib) => Some((false, true)),
        Role::Between(i, j) if (i, j) == (ib, ia) => Some((true, false)),
        _ => None,
    }
}

fn spec_total(s: &BlockSpec) -> usize {
    s.a.len() + s.b.len() + s.items.iter().map(Element::weight).sum::<usize>()
}

fn spanning_routes(p: &Pattern, f: &[usize], sides: &[bool], lengths: &[usize]) -> Vec<RouteSpec> {
    p.arcs().iter().enumerate().map(|(k, &(u, v))| RouteSpec::new(elem(f[u], sides[u]), elem(f[v], sides[v]), lengths[k] - 1)).collect()
}

/// Routes of one tiling part: arc 0 takes the bulk, the others one vertex each.
fn part_routes(p: &Pattern, f: &[usize], sides: &[bool], order: usize, group: usize) -> Vec<RouteSpec> {
    let inner = order - p.s();
    let h = p.h();
    let shares: Vec<usize> = if inner + 1 >= h {
        (0..h).map(|k| if k == 0 { inner + 1 - h } else { 1 }).collect()
    } else {
        (0..h).map(|k| inner / h + usize::from(k < inner % h)).collect()
    };
    p.arcs()
        .iter()
        .enumerate()
        .map(|(k, &(u, v))| {
            let mut r = RouteSpec::new(elem(f[u], sides[u]), elem(f[v], sides[v]), shares[k]);
            r.group = Some(group);
            r
        })
        .collect()
}

/// Members of `idx` whose orders have the largest sum not above `cap`.
fn best_subset(orders: &[usize], idx: &[usize], cap: usize) -> (usize, Vec<usize>) {
    let mut reach = vec![false; cap + 1];
    reach[0] = true;
    let mut took = vec![vec![false; cap + 1]; idx.len()];
    for (k, &j) in idx.iter().enumerate() {
        let o = orders[j];
        if o > cap {
            continue;
        }
        for v in (o..=cap).rev() {
            if !reach[v] && reach[v - o] {
                reach[v] = true;
                took[k][v] = true;
            }
        }
    }
    let best = (0..=cap).rev().find(|&v| reach[v]).unwrap_or(0);
    let mut v = best;
    let mut out = Vec::new();
    for k in (0..idx.len()).rev() {
        if took[k][v] {
            out.push(idx[k]);
            v -= orders[idx[k]];
        }
    }
    out.reverse();
    (best, out)
}

fn side_candidates(p: &Pattern, lengths: Option<&[usize]>) -> Vec<Vec<bool>> {
    let mut out: Vec<Vec<bool>> = Vec::new();
    let mut push = |s: Option<Vec<bool>>| {
        if let Some(s) = s {
            if !out.contains(&s) {
                out.push(s);
            }
        }
    };
    if let Some(l) = lengths {
        push(sides_for_lengths(p, l));
    }
    push(choose_sides(p, false));
    push(choose_sides(p, true));
    if p.s() <= 4 {
        for mask in 0..1u32 << p.s() {
            push(Some((0..p.s()).map(|i| mask >> i & 1 == 1).collect()));
        }
    }
    out
}

fn tag(kind: ExtremalKind, what: &str) -> String {
    format!("{}-{what}", kind.tag().to_ascii_lowercase())
}

/// Spanning subdivision with prescribed route lengths in a classified digraph.
pub fn solve_extremal_spanning(
    d: &Digraph,
    p: &Pattern,
    lengths: &[usize],
    part: &ExtremalPartition,
    ladder: &ParameterLadder,
    seed: u64,
) -> Result<SubdivisionCert> {
    check_lengths(d.n(), p, lengths)?;
    ladder.validate()?;
    let low = LOW_FRACTION.max(1.0 - 2.0 * ladder.eps.cbrt());
    let mut last = None;
    for attempt in 0..ATTEMPTS as u64 {
        let s = mix(seed, 300 + attempt);
        let sys = match cover_exceptional(d, part, s) {
            Ok(x) => x,
            Err(e) if e.is_input() => return Err(e),
            Err(e) => {
                last = Some(e);
                continue;
            }
        };
        let r = match part.kind {
            ExtremalKind::TwoCliques => {
                let mut out = Err(Error::stage("ec1", "no orientation tried"));
                for (x, y) in [(0, 1), (1, 0)] {
                    let mut w = Work::new(d, part, sys.clone(), low, mix(s, x as u64));
                    out = ec1_spanning(&mut w, p, lengths, x, y);
                    if out.is_ok() {
                        break;
                    }
                }
                out
            }
            ExtremalKind::Bipartite => ec2_spanning(&mut Work::new(d, part, sys, low, s), p, lengths),
            ExtremalKind::FourBlock => ec3_spanning(&mut Work::new(d, part, sys, low, s), p, lengths),
        };
        match r {
            Ok(cert) => {
                let v = verify_subdivision(d, p, &cert, true, Some(lengths))?;
                if !v.pass() {
                    return Err(Error::stage("verify", v.clauses().join("; ")));
                }
                return Ok(cert);
            }
            Err(e) if e.is_input() => return Err(e),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap())
}

/// Perfect tiling with parts of the given orders in a classified digraph.
pub fn solve_extremal_tiling(
    d: &Digraph,
    p: &Pattern,
    orders: &[usize],
    part: &ExtremalPartition,
    ladder: &ParameterLadder,
    seed: u64,
) -> Result<TilingCert> {
    check_orders(d.n(), p, orders)?;
    ladder.validate()?;
    let low = LOW_FRACTION.max(1.0 - 2.0 * ladder.eps.cbrt());
    let mut last = None;
    for attempt in 0..ATTEMPTS as u64 {
        let s = mix(seed, 400 + attempt);
        let sys = match cover_exceptional(d, part, s) {
            Ok(x) => x,
            Err(e) if e.is_input() => return Err(e),
            Err(e) => {
                last = Some(e);
                continue;
            }
        };
        let r = match part.kind {
            ExtremalKind::TwoCliques => {
                let mut out = Err(Error::stage("ec1", "no orientation tried"));
                for (x, y) in [(0, 1), (1, 0)] {
                    let mut w = Work::new(d, part, sys.clone(), low, mix(s, x as u64));
                    out = ec1_tiling(&mut w, p, orders, x, y);
                    if out.is_ok() {
                        break;
                    }
                }
                out
            }
            ExtremalKind::Bipartite => ec2_tiling(&mut Work::new(d, part, sys, low, s), p, orders),
            ExtremalKind::FourBlock => ec3_tiling(&mut Work::new(d, part, sys, low, s), p, orders),
        };
        match r {
            Ok(parts) => {
                let cert = TilingCert { parts, orders: orders.to_vec() };
                let v = verify_tiling(d, p, &cert)?;
                if !v.pass() {
                    return Err(Error::stage("verify", v.clauses().join("; ")));
                }
                return Ok(cert);
            }
            Err(e) if e.is_input() => return Err(e),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap())
}

/// Branch vertices in clique `x`; clique `y` is crossed once by a thread
/// that leaves and re-enters `x` through two short bridges.
fn ec1_spanning(w: &mut Work<'_>, p: &Pattern, lengths: &[usize], x: usize, y: usize) -> Result<SubdivisionCert> {
    let d = w.d;
    let sides = vec![false; p.s()];
    let f = w.branch(&sides, x, x)?;
    let p1 = w.bridge(x, y).ok_or_else(|| Error::stage("path-cover", "no short path from the first clique to the second"))?;
    let p2 = w.bridge(y, x).ok_or_else(|| Error::stage("path-cover", "no short path back between the cliques"))?;
    let sy = w.clique_spec(y, Vec::new());
    let inner = spec_total(&sy);
    let thread = embed_block(d, &sy, &[RouteSpec::new(Element::new(p1, false, false), Element::new(p2, false, false), inner)], w.next_seed(), EMBED_ATTEMPTS)?;
    let item = Element::new(thread.into_iter().next().unwrap(), false, false);
    let mut routes = spanning_routes(p, &f, &sides, lengths);
    let k = (0..routes.len()).max_by_key(|&k| (routes[k].interior, std::cmp::Reverse(k))).unwrap();
    if routes[k].interior <= item.weight() {
        return Err(Error::stage(
            "ec1-capacity",
            format!("the longest route has {} interior vertices, the crossing needs {}", routes[k].interior, item.weight() + 1),
        ));
    }
    routes[k].fixed.push(item);
    let sx = w.clique_spec(x, Vec::new());
    let r = embed_block(d, &sx, &routes, w.next_seed(), EMBED_ATTEMPTS)?;
    Ok(SubdivisionCert { branch: f, routes: r })
}

/// Embeds whole parts into cliques; when no subset of parts fills `x`
/// exactly, the rest of `x` rides as one thread inside a part hosted by `y`.
fn ec1_tiling(w: &mut Work<'_>, p: &Pattern, orders: &[usize], x: usize, y: usize) -> Result<Vec<SubdivisionCert>> {
    let d = w.d;
    let s = p.s();
    let all: Vec<usize> = (0..orders.len()).collect();
    let tx = w.clique_total(x);
    let (sum, exact) = best_subset(orders, &all, tx);
    let (ix, bridges) = if sum == tx {
        (exact, None)
    } else {
        let q1 = w.bridge(y, x).ok_or_else(|| Error::stage("path-cover", "no short path into the first clique"))?;
        let q2 = w.bridge(x, y).ok_or_else(|| Error::stage("path-cover", "no short path out of the first clique"))?;
        // The largest part stays in `y` to host the crossing.
        let host = (0..orders.len()).max_by_key(|&j| (orders[j], std::cmp::Reverse(j))).unwrap();
        let others: Vec<usize> = all.iter().copied().filter(|&j| j != host).collect();
        let (_, ix) = best_subset(orders, &others, w.clique_total(x));
        (ix, Some((q1, q2)))
    };
    let iy: Vec<usize> = all.iter().copied().filter(|j| !ix.contains(j)).collect();
    if iy.is_empty() && w.clique_total(y) > 0 {
        return Err(Error::stage("ec1-split", "every part fits the first clique but the second is not empty"));
    }
    let sides = vec![false; s];
    let mut branch: Vec<Option<Vec<usize>>> = vec![None; orders.len()];
    let mut routes = Vec::new();
    for &j in &ix {
        let f = w.branch(&sides, x, x)?;
        routes.extend(part_routes(p, &f, &sides, orders[j], j));
        branch[j] = Some(f);
    }
    let sx = w.clique_spec(x, Vec::new());
    let mut extra = Vec::new();
    if let Some((q1, q2)) = bridges {
        let used: usize = ix.iter().map(|&j| orders[j] - s).sum();
        let r = spec_total(&sx).checked_sub(used).ok_or_else(|| Error::stage("ec1-split", "bridges left too few vertices in the first clique"))?;
        routes.push(RouteSpec::new(Element::new(q1, false, false), Element::new(q2, false, false), r));
    }
    let rx = embed_block(d, &sx, &routes, w.next_seed(), EMBED_ATTEMPTS)?;
    let mut out: Vec<Option<SubdivisionCert>> = vec![None; orders.len()];
    let mut it = rx.into_iter();
    for &j in &ix {
        out[j] = Some(SubdivisionCert { branch: branch[j].take().unwrap(), routes: it.by_ref().take(p.h()).collect() });
    }
    if let Some(thread) = it.next() {
        extra.push(Element::new(thread, false, false));
    }
    let mut routes = Vec::new();
    for &j in &iy {
        let f = w.branch(&sides, y, y)?;
        routes.extend(part_routes(p, &f, &sides, orders[j], j));
        branch[j] = Some(f);
    }
    let sy = w.clique_spec(y, extra);
    if !routes.is_empty() || spec_total(&sy) > 0 {
        let ry = embed_block(d, &sy, &routes, w.next_seed(), EMBED_ATTEMPTS)?;
        let mut it = ry.into_iter();
        for &j in &iy {
            out[j] = Some(SubdivisionCert { branch: branch[j].take().unwrap(), routes: it.by_ref().take(p.h()).collect() });
        }
    }
    Ok(out.into_iter().map(Option::unwrap).collect())
}

/// One bipartite block holds everything; side choices are tried in turn.
fn ec2_spanning(w: &mut Work<'_>, p: &Pattern, lengths: &[usize]) -> Result<SubdivisionCert> {
    let mut last = Error::stage("ec2", "no side assignment");
    for sides in side_candidates(p, Some(lengths)) {
        let saved = w.used.clone();
        let r = w.branch(&sides, 0, 1).and_then(|f| {
            let spec = w.bip_spec(0, 1, Vec::new());
            let routes = spanning_routes(p, &f, &sides, lengths);
            embed_block(w.d, &spec, &routes, w.next_seed(), EMBED_ATTEMPTS).map(|r| SubdivisionCert { branch: f, routes: r })
        });
        match r {
            Ok(c) => return Ok(c),
            Err(e) => {
                w.used = saved;
                last = e;
            }
        }
    }
    Err(last)
}

fn ec2_tiling(w: &mut Work<'_>, p: &Pattern, orders: &[usize]) -> Result<Vec<SubdivisionCert>> {
    let idx: Vec<usize> = (0..orders.len()).collect();
    Ok(bip_tiling(w, p, orders, &idx, (0, 1), Vec::new())?.into_iter().map(|(_, c)| c).collect())
}

/// Side assignments tried per tiling: uniform ones first, then mixed.
const SIDE_COMBOS: usize = 32;

/// Tries side assignments for the parts `idx` of the bipartite block.
fn bip_tiling(
    w: &mut Work<'_>,
    p: &Pattern,
    orders: &[usize],
    idx: &[usize],
    block: (usize, usize),
    extra: Vec<Element>,
) -> Result<Vec<(usize, SubdivisionCert)>> {
    let cands = side_candidates(p, None);
    let m = idx.len();
    let mut combos: Vec<Vec<usize>> = (0..cands.len()).map(|c| vec![c; m]).collect();
    let mut code = 0usize;
    while combos.len() < SIDE_COMBOS && m > 1 {
        let mut c = Vec::with_capacity(m);
        let mut x = code;
        for _ in 0..m {
            c.push(x % cands.len());
            x /= cands.len();
        }
        if x > 0 {
            break;
        }
        if !combos.contains(&c) {
            combos.push(c);
        }
        code += 1;
    }
    let mut last = Error::stage("bipartite", "no side assignment");
    for combo in combos {
        let saved = w.used.clone();
        let sides: Vec<&[bool]> = combo.iter().map(|&c| cands[c].as_slice()).collect();
        match bip_parts(w, p, orders, idx, &sides, block, extra.clone()) {
            Ok(parts) => return Ok(parts),
            Err(e) => {
                w.used = saved;
                last = e;
            }
        }
    }
    Err(last)
}

/// Embeds the parts `idx` into the bipartite block `(ia, ib)` with extra items.
fn bip_parts(
    w: &mut Work<'_>,
    p: &Pattern,
    orders: &[usize],
    idx: &[usize],
    sides: &[&[bool]],
    (ia, ib): (usize, usize),
    extra: Vec<Element>,
) -> Result<Vec<(usize, SubdivisionCert)>> {
    let mut branch = Vec::new();
    let mut routes = Vec::new();
    for (&j, s) in idx.iter().zip(sides) {
        let f = w.branch(s, ia, ib)?;
        routes.extend(part_routes(p, &f, s, orders[j], j));
        branch.push(f);
    }
    let spec = w.bip_spec(ia, ib, extra);
    let r = embed_block(w.d, &spec, &routes, w.next_seed(), EMBED_ATTEMPTS)?;
    let mut it = r.into_iter();
    Ok(idx.iter().zip(branch).map(|(&j, f)| (j, SubdivisionCert { branch: f, routes: it.by_ref().take(p.h()).collect() })).collect())
}

fn ec3_spanning(w: &mut Work<'_>, p: &Pattern, lengths: &[usize]) -> Result<SubdivisionCert> {
    let first_clique = w.clique_total(0) >= w.free(1).len();
    let mut last = Error::stage("ec3", "no case tried");
    for clique in [first_clique, !first_clique] {
        let saved = w.used.clone();
        let r = if clique { ec3_span_in_clique(w, p, lengths) } else { ec3_span_in_bipartite(w, p, lengths) };
        match r {
            Ok(c) => return Ok(c),
            Err(e) => {
                w.used = saved;
                last = e;
            }
        }
    }
    Err(last)
}

/// Branch vertices in the first clique; the second clique and the
/// bipartite block each become one long item.
fn ec3_span_in_clique(w: &mut Work<'_>, p: &Pattern, lengths: &[usize]) -> Result<SubdivisionCert> {
    let d = w.d;
    let (s0, s2) = (w.sets[0].clone(), w.sets[2].clone());
    let sides = vec![false; p.s()];
    let f = w.branch(&sides, 0, 0)?;
    let missing = || Error::stage("ec3-connect", "a bipartite block ran out of connectors");
    let y1 = w.best(1, |v| d.out_degree_in(v, &s2), |_| true).ok_or_else(missing)?;
    let y2 = w.best(3, |v| d.in_degree_in(v, &s2), |_| true).ok_or_else(missing)?;
    let u = w.best(1, |v| d.in_degree_in(v, &s0), |_| true).ok_or_else(missing)?;
    let v = w.best(3, |x| d.out_degree_in(x, &s0), |_| true).ok_or_else(missing)?;
    let spec3 = w.clique_spec(2, Vec::new());
    let t3 = embed_block(d, &spec3, &[RouteSpec::new(Element::a(y1), Element::a(y2), spec_total(&spec3))], w.next_seed(), EMBED_ATTEMPTS)?;
    let specb = w.bip_spec(1, 3, Vec::new());
    let tb = embed_block(d, &specb, &[RouteSpec::new(Element::a(u), Element::b(v), spec_total(&specb))], w.next_seed(), EMBED_ATTEMPTS)?;
    let extra = vec![Element::new(t3[0].clone(), false, false), Element::new(tb[0].clone(), false, false)];
    let spec1 = w.clique_spec(0, extra);
    let routes = spanning_routes(p, &f, &sides, lengths);
    let r = embed_block(d, &spec1, &routes, w.next_seed(), EMBED_ATTEMPTS)?;
    Ok(SubdivisionCert { branch: f, routes: r })
}

/// Branch vertices in the bipartite block; each clique becomes one item
/// entered and left through the bipartite sides.
fn ec3_span_in_bipartite(w: &mut Work<'_>, p: &Pattern, lengths: &[usize]) -> Result<SubdivisionCert> {
    let d = w.d;
    let extra = ec3_clique_threads(w, 1, 1)?;
    let mut last = Error::stage("ec3", "no side assignment");
    for sides in side_candidates(p, Some(lengths)) {
        let saved = w.used.clone();
        let r = w.branch(&sides, 1, 3).and_then(|f| {
            let spec = w.bip_spec(1, 3, extra.clone());
            let routes = spanning_routes(p, &f, &sides, lengths);
            embed_block(d, &spec, &routes, w.next_seed(), EMBED_ATTEMPTS).map(|r| SubdivisionCert { branch: f, routes: r })
        });
        match r {
            Ok(c) => return Ok(c),
            Err(e) => {
                w.used = saved;
                last = e;
            }
        }
    }
    Err(last)
}

/// Splits the remaining clique vertices into `k1` threads of the first
/// clique (entered from the fourth block, leaving to the second) and `k3`
/// threads of the third (second to fourth), as bipartite-block items.
/// `routes1`/`routes3` are extra routes that share each clique.
fn ec3_threads_with(
    w: &mut Work<'_>,
    k1: usize,
    k3: usize,
    mut routes1: Vec<RouteSpec>,
    mut routes3: Vec<RouteSpec>,
) -> Result<(Vec<Element>, Vec<Vec<usize>>, Vec<Vec<usize>>)> {
    let d = w.d;
    let (s0, s2) = (w.sets[0].clone(), w.sets[2].clone());
    let missing = || Error::stage("ec3-connect", "a bipartite block ran out of connectors");
    let mut extra = Vec::new();
    let mut out = (Vec::new(), Vec::new());
    for (c, k, routes, slot) in [(0usize, k1, &mut routes1, 0usize), (2, k3, &mut routes3, 1)] {
        let set = if c == 0 { &s0 } else { &s2 };
        let base = routes.len();
        let mut ends = Vec::new();
        for _ in 0..k {
            // Clique 0 is entered from block 3 and left to block 1; clique 2 the reverse.
            let (from, to) = if c == 0 { (3, 1) } else { (1, 3) };
            let a = w.best(from, |v| d.out_degree_in(v, set), |_| true).ok_or_else(missing)?;
            let b = w.best(to, |v| d.in_degree_in(v, set), |_| true).ok_or_else(missing)?;
            ends.push((a, b));
        }
        let spec = w.clique_spec(c, Vec::new());
        let fixed: usize = routes.iter().map(|r| r.interior).sum();
        let left = spec_total(&spec).checked_sub(fixed).ok_or_else(|| Error::stage("ec3-split", "clique smaller than its parts"))?;
        if k == 0 && left > 0 {
            return Err(Error::stage("ec3-split", "clique vertices left without a thread"));
        }
        for (t, &(a, b)) in ends.iter().enumerate() {
            let share = left / k + usize::from(t < left % k);
            routes.push(RouteSpec::new(Element::a(a), Element::a(b), share));
        }
        if routes.is_empty() {
            continue;
        }
        let r = embed_block(d, &spec, routes, w.next_seed(), EMBED_ATTEMPTS)?;
        let (parts, threads) = r.split_at(base);
        for t in threads {
            extra.push(Element::new(t.clone(), c == 0, c != 0));
        }
        if slot == 0 {
            out.0 = parts.to_vec();
        } else {
            out.1 = parts.to_vec();
        }
    }
    Ok((extra, out.0, out.1))
}

fn ec3_clique_threads(w: &mut Work<'_>, k1: usize, k3: usize) -> Result<Vec<Element>> {
    ec3_threads_with(w, k1, k3, Vec::new(), Vec::new()).map(|r| r.0)
}

/// Whole parts go into the two cliques and the bipartite block; leftover
/// clique vertices travel as threads inside bipartite parts.
fn ec3_tiling(w: &mut Work<'_>, p: &Pattern, orders: &[usize]) -> Result<Vec<SubdivisionCert>> {
    let s = p.s();
    let all: Vec<usize> = (0..orders.len()).collect();
    let (t1, t3) = (w.clique_total(0), w.clique_total(2));
    let t2 = w.bip_total(1, 3);
    // Candidate splits, fewest leftover clique vertices first.
    let mut cands = Vec::new();
    for first in [true, false] {
        for (c1, c3) in [(t1, t3), (t1, 0), (0, t3), (0, 0)] {
            let (i1, i3) = if first {
                let (_, i1) = best_subset(orders, &all, c1);
                let rest: Vec<usize> = all.iter().copied().filter(|j| !i1.contains(j)).collect();
                (i1, best_subset(orders, &rest, c3).1)
            } else {
                let (_, i3) = best_subset(orders, &all, c3);
                let rest: Vec<usize> = all.iter().copied().filter(|j| !i3.contains(j)).collect();
                (best_subset(orders, &rest, c1).1, i3)
            };
            let i2: Vec<usize> = all.iter().copied().filter(|j| !i1.contains(j) && !i3.contains(j)).collect();
            let r1 = t1 - i1.iter().map(|&j| orders[j]).sum::<usize>();
            let r3 = t3 - i3.iter().map(|&j| orders[j]).sum::<usize>();
            let ok = if i2.is_empty() { r1 == 0 && r3 == 0 && t2 == 0 } else { true };
            if ok && !cands.iter().any(|c: &(usize, Vec<usize>, Vec<usize>, Vec<usize>)| c.1 == i1 && c.2 == i3) {
                cands.push((r1 + r3, i1, i3, i2));
            }
        }
    }
    cands.sort_by_key(|c| c.0);
    let mut last = Error::stage("ec3-split", "no split of the parts over the blocks");
    for (_, i1, i3, i2) in cands {
        let saved = w.used.clone();
        match ec3_tile_split(w, p, orders, &i1, &i3, &i2, s) {
            Ok(c) => return Ok(c),
            Err(e) => {
                w.used = saved;
                last = e;
            }
        }
    }
    Err(last)
}

fn ec3_tile_split(w: &mut Work<'_>, p: &Pattern, orders: &[usize], i1: &[usize], i3: &[usize], i2: &[usize], s: usize) -> Result<Vec<SubdivisionCert>> {
    let sides0 = vec![false; s];
    let mut out: Vec<Option<SubdivisionCert>> = vec![None; orders.len()];
    let mut clique_routes = [Vec::new(), Vec::new()];
    let mut clique_branch = [Vec::new(), Vec::new()];
    for (slot, (idx, c)) in [(i1, 0usize), (i3, 2)].into_iter().enumerate() {
        for &j in idx {
            let f = w.branch(&sides0, c, c)?;
            clique_routes[slot].extend(part_routes(p, &f, &sides0, orders[j], j));
            clique_branch[slot].push((j, f));
        }
    }
    let r1 = w.clique_total(0) - clique_routes[0].iter().map(|r| r.interior).sum::<usize>();
    let r3 = w.clique_total(2) - clique_routes[1].iter().map(|r| r.interior).sum::<usize>();
    // Several leftover vertices share one thread once the bipartite sides run low.
    // One 3-path per leftover vertex while the bipartite sides can spare the
    // connectors and no cover path needs a longer thread.
    let cap = w.free(1).len().min(w.free(3).len()) / 4;
    let k = |r: usize, c: usize, parts: &[usize]| {
        let bare = parts.is_empty() && w.sys.with_role(Role::Within(c)).next().is_some();
        if r <= cap && !bare {
            r
        } else {
            // Two threads let the bipartite embedder move one for parity.
            r.min(2)
        }
    };
    let (k1, k3) = (k(r1, 0, i1), k(r3, 2, i3));
    let [ra, rb] = clique_routes;
    let (extra, pa, pb) = ec3_threads_with(w, k1, k3, ra, rb)?;
    for (slot, routes) in [pa, pb].into_iter().enumerate() {
        let mut it = routes.into_iter();
        for (j, f) in std::mem::take(&mut clique_branch[slot]) {
            out[j] = Some(SubdivisionCert { branch: f, routes: it.by_ref().take(p.h()).collect() });
        }
    }
    if !i2.is_empty() {
        for (j, c) in bip_tiling(w, p, orders, i2, (1, 3), extra)? {
            out[j] = Some(c);
        }
    }
    if out.iter().any(Option::is_none) {
        return Err(Error::stage(&tag(ExtremalKind::FourBlock, "split"), "a part was not placed"));
    }
    Ok(out.into_iter().map(Option::unwrap).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subset_sums() {
        let o = [5, 7, 3, 9];
        assert_eq!(best_subset(&o, &[0, 1, 2, 3], 12), (12, vec![0, 1]));
        let (s, idx) = best_subset(&o, &[0, 1, 2, 3], 11);
        assert_eq!(s, 10);
        assert_eq!(idx.iter().map(|&j| o[j]).sum::<usize>(), 10);
        assert_eq!(best_subset(&o, &[1, 3], 6), (0, vec![]));
    }
}
