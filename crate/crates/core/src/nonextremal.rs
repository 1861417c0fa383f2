//! Solver for hosts presumed stable: a small skeleton carrying absorbing
//! routes, then a path cover of the leftover spliced into those routes.

use crate::absorb::{self, absorb_path, absorbs, Absorber, AbsorberFamily, FamilyOptions};
use crate::bitset::BitSet;
use crate::digraph::Digraph;
use crate::error::{Error, Result};
use crate::hampath::hamiltonian_path;
use crate::params::ParameterLadder;
use crate::pattern::{verify_subdivision, verify_tiling, Pattern, SubdivisionCert, TilingCert};
use crate::rng::{derive, mix};
use crate::trace::Trace;
use rand::seq::SliceRandom;
use rand::Rng;

/// Absorbers wanted per absorbing route when room allows.
const PER_ROUTE: usize = 5;

#[derive(Clone, Debug)]
pub struct NonExtremalOptions {
    pub attempts: usize,
    pub fill_attempts: usize,
    pub family: FamilyOptions,
}

impl Default for NonExtremalOptions {
    fn default() -> Self {
        NonExtremalOptions {
            attempts: 6,
            fill_attempts: 16,
            family: FamilyOptions {
                rounds: 400,
                target: usize::MAX,
                retries: 2,
                coverage_samples: 200,
                require_coverage: false,
            },
        }
    }
}

/// A route that still has to swallow `deficit` leftover vertices.
#[derive(Clone, Debug)]
pub struct Piece {
    pub part: usize,
    pub arc: usize,
    pub absorbers: Vec<Absorber>,
    pub deficit: usize,
}

#[derive(Clone, Debug)]
pub struct Skeleton {
    pub certs: Vec<SubdivisionCert>,
    pub pieces: Vec<Piece>,
    pub family: AbsorberFamily,
    pub used: BitSet,
}

impl Skeleton {
    pub fn size(&self) -> usize {
        self.used.count()
    }
}

fn mark(used: &mut BitSet, path: &[usize]) {
    for &v in path {
        used.insert(v);
    }
}

fn mark_interior(used: &mut BitSet, path: &[usize]) {
    if path.len() > 2 {
        mark(used, &path[1..path.len() - 1]);
    }
}

/// Injective placement of pattern vertices on vertices outside `blocked`.
/// Arcs flagged in `direct` must be host arcs between their images.
fn place_branch(d: &Digraph, p: &Pattern, direct: &[bool], blocked: &BitSet, rng: &mut impl Rng) -> Option<Vec<usize>> {
    let mut free: Vec<usize> = blocked.complement().iter().collect();
    if free.len() < p.s() {
        return None;
    }
    free.shuffle(rng);
    let mut f = Vec::with_capacity(p.s());
    let mut budget = 20_000u32;
    fn go(
        d: &Digraph,
        p: &Pattern,
        direct: &[bool],
        free: &[usize],
        f: &mut Vec<usize>,
        budget: &mut u32,
    ) -> bool {
        let x = f.len();
        if x == p.s() {
            return true;
        }
        for &c in free.iter().take(64) {
            if *budget == 0 {
                return false;
            }
            *budget -= 1;
            if f.contains(&c) {
                continue;
            }
            let ok = p.arcs().iter().enumerate().all(|(i, &(a, b))| {
                if !direct[i] {
                    true
                } else if a == x && b < x {
                    d.has_arc(c, f[b])
                } else if b == x && a < x {
                    d.has_arc(f[a], c)
                } else {
                    true
                }
            });
            if ok {
                f.push(c);
                if go(d, p, direct, free, f, budget) {
                    return true;
                }
                f.pop();
            }
        }
        false
    }
    go(d, p, direct, &free, &mut f, &mut budget).then_some(f)
}

/// A `from -> to` path of exactly `len` arcs with interior outside `blocked`.
pub fn exact_path(d: &Digraph, from: usize, to: usize, len: usize, blocked: &BitSet, rng: &mut impl Rng) -> Option<Vec<usize>> {
    let ok = |x: usize| x != from && x != to && !blocked.contains(x);
    match len {
        0 => None,
        1 => d.has_arc(from, to).then(|| vec![from, to]),
        2 => {
            let mut c: Vec<usize> = d.out_set(from).intersection(d.in_set(to)).iter().filter(|&x| ok(x)).collect();
            c.shuffle(rng);
            c.first().map(|&x| vec![from, x, to])
        }
        3 => {
            let ins: BitSet = d.in_set(to).clone();
            let mut xs: Vec<usize> = d.out_set(from).iter().filter(|&x| ok(x)).collect();
            xs.shuffle(rng);
            for x in xs {
                let mut ys: Vec<usize> = d.out_set(x).intersection(&ins).iter().filter(|&y| ok(y) && y != x).collect();
                if let Some(&y) = ys.choose(rng) {
                    ys.clear();
                    return Some(vec![from, x, y, to]);
                }
            }
            None
        }
        _ => {
            for _ in 0..20 {
                let mut local = blocked.clone();
                let mut path = vec![from];
                let mut cur = from;
                let mut stuck = false;
                for _ in 0..len - 3 {
                    let c: Vec<usize> =
                        d.out_set(cur).iter().filter(|&x| ok(x) && !local.contains(x)).collect();
                    match c.choose(rng) {
                        Some(&x) => {
                            local.insert(x);
                            path.push(x);
                            cur = x;
                        }
                        None => {
                            stuck = true;
                            break;
                        }
                    }
                }
                if stuck {
                    continue;
                }
                local.insert(from);
                if let Some(tail) = exact_path(d, cur, to, 3, &local, rng) {
                    path.extend_from_slice(&tail[1..]);
                    return Some(path);
                }
            }
            None
        }
    }
}

/// Splits `total` absorbers over routes with the given capacities, round robin.
fn spread(total: usize, caps: &[usize]) -> Vec<usize> {
    let mut f = vec![0; caps.len()];
    let mut left = total;
    for limit in [PER_ROUTE, usize::MAX] {
        let mut progress = true;
        while left > 0 && progress {
            progress = false;
            for (i, &c) in caps.iter().enumerate() {
                if left > 0 && f[i] < c.min(limit) {
                    f[i] += 1;
                    left -= 1;
                    progress = true;
                }
            }
        }
    }
    f
}

/// Builds the family in `available`, partitions it over the routes and links each part.
fn absorbing_paths(
    d: &Digraph,
    used: &BitSet,
    caps: &[usize],
    ladder: &ParameterLadder,
    seed: u64,
    opts: &NonExtremalOptions,
) -> Result<AbsorberFamily> {
    if let Some(i) = caps.iter().position(|&c| c == 0) {
        return Err(Error::stage("skeleton", format!("route {i} is too short to carry an absorber")));
    }
    let want: usize = caps.iter().map(|&c| c.min(PER_ROUTE)).sum();
    let mut fo = opts.family.clone();
    fo.target = want;
    let available = used.complement();
    let mut fam = absorb::build_absorber_family(d, &available, ladder, mix(seed, 11), &fo)?;
    if fam.members.len() < caps.len() {
        return Err(Error::stage(
            "absorber-family",
            format!("{} absorbers for {} absorbing routes", fam.members.len(), caps.len()),
        ));
    }
    let sizes = spread(fam.members.len(), caps);
    fam.members.truncate(sizes.iter().sum());
    let (linked, _) = absorb::partition_and_link(d, &fam, &sizes, used, ladder, mix(seed, 12), &fo).map_err(|e| match e {
        Error::Input(m) => Error::stage("partition", m),
        e => e,
    })?;
    Ok(linked)
}

/// Skeleton for a spanning subdivision with prescribed lengths (pattern arc order).
pub fn build_skeleton_spanning(
    d: &Digraph,
    p: &Pattern,
    lengths: &[usize],
    ladder: &ParameterLadder,
    seed: u64,
    opts: &NonExtremalOptions,
) -> Result<Skeleton> {
    let n = d.n();
    check_lengths(n, p, lengths)?;
    let cut = ladder.alpha * n as f64;
    let mut order: Vec<usize> = (0..p.h()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(lengths[i]), i));
    let long: Vec<usize> = order.iter().copied().filter(|&i| lengths[i] as f64 >= cut).collect();
    let short: Vec<usize> = order.iter().copied().filter(|&i| (lengths[i] as f64) < cut).collect();
    let short_sum: usize = short.iter().map(|&i| lengths[i]).sum();
    if short_sum as f64 > ladder.beta * n as f64 {
        return Err(Error::input(format!(
            "short arcs need {short_sum} > beta n = {:.1} vertices",
            ladder.beta * n as f64
        )));
    }
    if long.is_empty() {
        return Err(Error::input("no arc is long enough to carry an absorbing route"));
    }
    let mut rng = derive(seed, 1);
    let direct: Vec<bool> = lengths.iter().map(|&l| l == 1).collect();
    let mut used = BitSet::new(n);
    let branch = place_branch(d, p, &direct, &used, &mut rng)
        .ok_or_else(|| Error::stage("branch", "no placement honours the length-1 arcs"))?;
    mark(&mut used, &branch);
    let mut routes = vec![Vec::new(); p.h()];
    for &i in &short {
        let (a, b) = p.arcs()[i];
        let r = exact_path(d, branch[a], branch[b], lengths[i], &used, &mut rng).ok_or_else(|| {
            Error::stage("short-path", format!("no path of length {} for arc {:?}", lengths[i], p.arcs()[i]))
        })?;
        mark_interior(&mut used, &r);
        routes[i] = r;
    }
    let caps: Vec<usize> = long.iter().map(|&i| lengths[i].saturating_sub(3) / 6).collect();
    let fam = absorbing_paths(d, &used, &caps, ladder, seed, opts)?;
    mark(&mut used, &fam.linked.concat());
    let mut pieces = Vec::new();
    for (j, &i) in long.iter().enumerate() {
        let (a, b) = p.arcs()[i];
        let l = &fam.linked[j];
        let r = attach(d, branch[a], l, branch[b], &mut used, &mut rng)?;
        if r.len() - 1 > lengths[i] {
            return Err(Error::stage("skeleton", format!("absorbing route for arc {:?} already too long", p.arcs()[i])));
        }
        let absorbers = fam.parts[j].iter().map(|&m| fam.members[m]).collect();
        pieces.push(Piece { part: 0, arc: i, absorbers, deficit: lengths[i] - (r.len() - 1) });
        routes[i] = r;
    }
    Ok(Skeleton { certs: vec![SubdivisionCert { branch, routes }], pieces, family: fam, used })
}

/// `u -> .. -> L -> .. -> w` with connectors of length at most 3.
fn attach(d: &Digraph, u: usize, l: &[usize], w: usize, used: &mut BitSet, rng: &mut impl Rng) -> Result<Vec<usize>> {
    let head = absorb::connect(d, u, l[0], used, rng)
        .ok_or_else(|| Error::stage("skeleton", format!("no short connector from branch vertex {u} into its route")))?;
    mark_interior(used, &head);
    let tail = absorb::connect(d, *l.last().unwrap(), w, used, rng)
        .ok_or_else(|| Error::stage("skeleton", format!("no short connector from a route into branch vertex {w}")))?;
    mark_interior(used, &tail);
    let mut r = head[..head.len() - 1].to_vec();
    r.extend_from_slice(l);
    r.extend_from_slice(&tail[1..]);
    Ok(r)
}

pub(crate) fn check_lengths(n: usize, p: &Pattern, lengths: &[usize]) -> Result<()> {
    if lengths.len() != p.h() || lengths.contains(&0) {
        return Err(Error::input(format!("need {} positive lengths", p.h())));
    }
    let sum: usize = lengths.iter().sum();
    if sum + p.s() != n + p.h() {
        return Err(Error::input(format!(
            "lengths sum to {sum}; a spanning subdivision of this pattern needs {}",
            (n + p.h()).saturating_sub(p.s())
        )));
    }
    Ok(())
}

struct Assignment {
    piece: usize,
    absorber: Absorber,
    segment: Vec<usize>,
}

fn pick_absorber(d: &Digraph, piece: &Piece, c: usize, e: usize) -> Option<Absorber> {
    piece.absorbers.iter().copied().find(|a| absorbs(d, a, c, e))
}

/// Covers `rest` by one segment per piece with positive deficit, each
/// segment absorbable by one of its piece's absorbers.
fn fill_segments(d: &Digraph, rest: &BitSet, pieces: &[Piece], rng: &mut impl Rng, attempts: usize) -> Result<Vec<Assignment>> {
    let rv: Vec<usize> = rest.iter().collect();
    let active: Vec<usize> = (0..pieces.len()).filter(|&i| pieces[i].deficit > 0).collect();
    let need: usize = active.iter().map(|&i| pieces[i].deficit).sum();
    if need != rv.len() {
        return Err(Error::stage("completion", format!("{} leftover vertices, routes can take {need}", rv.len())));
    }
    if rv.is_empty() {
        return Ok(vec![]);
    }
    if active.is_empty() {
        return Err(Error::stage("path-cover", "leftover vertices but nothing can absorb them"));
    }
    // One Hamiltonian path of the leftover, cut into consecutive segments.
    for _ in 0..attempts {
        let mut order = active.clone();
        order.shuffle(rng);
        let first = &pieces[order[0]];
        let last = &pieces[*order.last().unwrap()];
        let a0 = *first.absorbers.choose(rng).unwrap();
        let a1 = *last.absorbers.choose(rng).unwrap();
        let starts: Vec<usize> = d.out_set(a0[1]).intersection(rest).iter().collect();
        let ends: Vec<usize> = d.in_set(a1[2]).intersection(rest).iter().collect();
        let (Some(&s), Some(&e)) = (starts.choose(rng), ends.choose(rng)) else { continue };
        if (s == e) != (rv.len() == 1) {
            continue;
        }
        let Some(path) = hamiltonian_path(d, &rv, Some(s), Some(e), rng) else { continue };
        let mut at = 0;
        let mut out = Vec::new();
        for &pi in &order {
            let seg = path[at..at + pieces[pi].deficit].to_vec();
            at += pieces[pi].deficit;
            match pick_absorber(d, &pieces[pi], seg[0], *seg.last().unwrap()) {
                Some(a) => out.push(Assignment { piece: pi, absorber: a, segment: seg }),
                None => break,
            }
        }
        if out.len() == order.len() {
            return Ok(out);
        }
    }
    // Fallback: one path per piece on a random split of the leftover.
    for _ in 0..attempts {
        let mut order = active.clone();
        order.shuffle(rng);
        let mut left = rest.clone();
        let mut out = Vec::new();
        for (k, &pi) in order.iter().enumerate() {
            let piece = &pieces[pi];
            let is_last = k + 1 == order.len();
            match segment_for(d, &left, piece, is_last, rng) {
                Some((a, seg)) => {
                    for &v in &seg {
                        left.remove(v);
                    }
                    out.push(Assignment { piece: pi, absorber: a, segment: seg });
                }
                None => break,
            }
        }
        if out.len() == order.len() {
            return Ok(out);
        }
    }
    Err(Error::stage("path-cover", "could not cover the leftover by absorbable paths"))
}

fn segment_for(d: &Digraph, left: &BitSet, piece: &Piece, is_last: bool, rng: &mut impl Rng) -> Option<(Absorber, Vec<usize>)> {
    let k = piece.deficit;
    for _ in 0..24 {
        let a = *piece.absorbers.choose(rng)?;
        let cs: Vec<usize> = d.out_set(a[1]).intersection(left).iter().collect();
        let es: Vec<usize> = d.in_set(a[2]).intersection(left).iter().collect();
        let c = *cs.choose(rng)?;
        let e = if k == 1 {
            if !es.contains(&c) {
                continue;
            }
            c
        } else {
            match es.iter().filter(|&&x| x != c).copied().collect::<Vec<_>>().choose(rng) {
                Some(&e) => e,
                None => continue,
            }
        };
        let verts: Vec<usize> = if is_last {
            left.iter().collect()
        } else {
            let mut others: Vec<usize> = left.iter().filter(|&v| v != c && v != e).collect();
            others.shuffle(rng);
            let mut v: Vec<usize> = others.into_iter().take(k.saturating_sub(if k == 1 { 1 } else { 2 })).collect();
            v.push(c);
            if e != c {
                v.push(e);
            }
            v
        };
        if verts.len() != k {
            return None;
        }
        if let Some(seg) = hamiltonian_path(d, &verts, Some(c), Some(e), rng) {
            return Some((a, seg));
        }
    }
    None
}

fn apply(skel: &mut Skeleton, fills: Vec<Assignment>) -> Result<()> {
    for f in fills {
        let piece = &skel.pieces[f.piece];
        let route = &mut skel.certs[piece.part].routes[piece.arc];
        *route = absorb_path(route, &f.absorber, &f.segment).map_err(|e| Error::stage("absorb", e.to_string()))?;
    }
    Ok(())
}

/// Absorbs the leftover into the skeleton's routes.
pub fn complete_spanning(d: &Digraph, mut skel: Skeleton, seed: u64, attempts: usize) -> Result<SubdivisionCert> {
    let rest = skel.used.complement();
    let mut rng = derive(seed, 2);
    let fills = fill_segments(d, &rest, &skel.pieces, &mut rng, attempts)?;
    apply(&mut skel, fills)?;
    Ok(skel.certs.remove(0))
}

/// Full non-extremal pipeline for spanning subdivisions, with restarts.
pub fn solve_spanning_nonextremal(
    d: &Digraph,
    p: &Pattern,
    lengths: &[usize],
    ladder: &ParameterLadder,
    seed: u64,
    opts: &NonExtremalOptions,
    trace: &mut Trace,
) -> Result<SubdivisionCert> {
    check_lengths(d.n(), p, lengths)?;
    let mut last = None;
    for attempt in 0..opts.attempts.max(1) {
        let s = mix(seed, 100 + attempt as u64);
        let r = trace
            .time("skeleton", || build_skeleton_spanning(d, p, lengths, ladder, s, opts))
            .and_then(|skel| {
                trace.note("family", format!("absorbers={} skeleton={}", skel.family.members.len(), skel.size()));
                trace.time("completion", || complete_spanning(d, skel, s, opts.fill_attempts))
            });
        match r {
            Ok(cert) => {
                let v = verify_subdivision(d, p, &cert, true, Some(lengths))?;
                if v.pass() {
                    return Ok(cert);
                }
                return Err(Error::stage("verify", v.clauses().join("; ")));
            }
            Err(e) if e.is_input() => return Err(e),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap())
}

/// Skeleton for a perfect tiling: exact small parts, absorbing large parts.
pub fn build_skeleton_tiling(
    d: &Digraph,
    p: &Pattern,
    orders: &[usize],
    ladder: &ParameterLadder,
    seed: u64,
    opts: &NonExtremalOptions,
) -> Result<Skeleton> {
    let n = d.n();
    check_orders(n, p, orders)?;
    let cut = ladder.alpha * n as f64;
    let small_sum: usize = orders.iter().filter(|&&o| (o as f64) < cut).sum();
    if small_sum as f64 > ladder.beta * n as f64 {
        return Err(Error::input(format!("small parts need {small_sum} > beta n = {:.1} vertices", ladder.beta * n as f64)));
    }
    let mut rng = derive(seed, 3);
    let mut used = BitSet::new(n);
    let mut certs = Vec::with_capacity(orders.len());
    for &o in orders {
        let direct = vec![o == p.s(); p.h()];
        let f = place_branch(d, p, &direct, &used, &mut rng).ok_or_else(|| Error::stage("branch", "no branch placement"))?;
        mark(&mut used, &f);
        certs.push(SubdivisionCert { branch: f, routes: vec![Vec::new(); p.h()] });
    }
    let large: Vec<usize> = (0..orders.len()).filter(|&i| orders[i] as f64 >= cut).collect();
    let mut pieces = Vec::new();
    let mut fam = AbsorberFamily::default();
    if !large.is_empty() {
        let caps: Vec<usize> =
            large.iter().map(|&i| orders[i].saturating_sub(p.s() + 2 * (p.h() - 1) + 2) / 6).collect();
        fam = absorbing_paths(d, &used, &caps, ladder, seed, opts)?;
        mark(&mut used, &fam.linked.concat());
        for (j, &i) in large.iter().enumerate() {
            let (a, b) = p.arcs()[0];
            let f = certs[i].branch.clone();
            certs[i].routes[0] = attach(d, f[a], &fam.linked[j], f[b], &mut used, &mut rng)?;
            for (k, &(a, b)) in p.arcs().iter().enumerate().skip(1) {
                let r = absorb::connect(d, f[a], f[b], &used, &mut rng)
                    .ok_or_else(|| Error::stage("skeleton", format!("no short route for arc {:?}", (a, b))))?;
                mark_interior(&mut used, &r);
                certs[i].routes[k] = r;
            }
            let have = certs[i].order(n);
            if have > orders[i] {
                return Err(Error::stage("skeleton", format!("part {i} skeleton has {have} > {} vertices", orders[i])));
            }
            let absorbers = fam.parts[j].iter().map(|&m| fam.members[m]).collect();
            pieces.push(Piece { part: i, arc: 0, absorbers, deficit: orders[i] - have });
        }
    }
    for i in (0..orders.len()).filter(|i| !large.contains(i)) {
        small_part(d, p, orders[i], &mut certs[i], &mut used, &mut rng)?;
    }
    Ok(Skeleton { certs, pieces, family: fam, used })
}

/// Routes a part exactly: every arc but the last as short as possible, the
/// last arc absorbing the remaining interior budget.
fn small_part(d: &Digraph, p: &Pattern, order: usize, cert: &mut SubdivisionCert, used: &mut BitSet, rng: &mut impl Rng) -> Result<()> {
    let f = cert.branch.clone();
    let mut budget = order - p.s();
    let h = p.h();
    for (k, &(a, b)) in p.arcs().iter().enumerate() {
        let r = if k + 1 < h {
            let mut found = None;
            for len in 1..=budget.min(3) + 1 {
                if let Some(r) = exact_path(d, f[a], f[b], len, used, rng) {
                    found = Some(r);
                    break;
                }
            }
            found
        } else {
            exact_path(d, f[a], f[b], budget + 1, used, rng)
        }
        .ok_or_else(|| Error::stage("short-path", format!("no route for arc {:?} within budget {budget}", (a, b))))?;
        budget -= r.len() - 2;
        mark_interior(used, &r);
        cert.routes[k] = r;
    }
    Ok(())
}

pub(crate) fn check_orders(n: usize, p: &Pattern, orders: &[usize]) -> Result<()> {
    if orders.is_empty() {
        return Err(Error::input("no part orders given"));
    }
    let sum: usize = orders.iter().sum();
    if sum != n {
        return Err(Error::input(format!("part orders sum to {sum}, host has {n} vertices")));
    }
    if let Some(&o) = orders.iter().find(|&&o| o < p.s()) {
        return Err(Error::input(format!("part order {o} below the pattern's {} vertices", p.s())));
    }
    Ok(())
}

pub fn solve_tiling_nonextremal(
    d: &Digraph,
    p: &Pattern,
    orders: &[usize],
    ladder: &ParameterLadder,
    seed: u64,
    opts: &NonExtremalOptions,
    trace: &mut Trace,
) -> Result<TilingCert> {
    check_orders(d.n(), p, orders)?;
    let mut last = None;
    for attempt in 0..opts.attempts.max(1) {
        let s = mix(seed, 200 + attempt as u64);
        let r = trace.time("skeleton", || build_skeleton_tiling(d, p, orders, ladder, s, opts)).and_then(|mut skel| {
            trace.note("family", format!("absorbers={} skeleton={}", skel.family.members.len(), skel.size()));
            trace.time("completion", || {
                let rest = skel.used.complement();
                let mut rng = derive(s, 4);
                let fills = fill_segments(d, &rest, &skel.pieces, &mut rng, opts.fill_attempts)?;
                apply(&mut skel, fills)?;
                Ok(TilingCert { parts: skel.certs, orders: orders.to_vec() })
            })
        });
        match r {
            Ok(cert) => {
                let v = verify_tiling(d, p, &cert)?;
                if v.pass() {
                    return Ok(cert);
                }
                return Err(Error::stage("verify", v.clauses().join("; ")));
            }
            Err(e) if e.is_input() => return Err(e),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_arc_on_complete() {
        let d = Digraph::complete(200);
        let p = Pattern::single_arc();
        let l = [199];
        let ladder = ParameterLadder::default();
        let opts = NonExtremalOptions::default();
        let skel = build_skeleton_spanning(&d, &p, &l, &ladder, 1, &opts).unwrap();
        assert_eq!(skel.pieces.len(), 1);
        assert!(skel.size() as f64 <= (ladder.gamma + ladder.beta) * 200.0 + 4.0);
        let cert = complete_spanning(&d, skel, 1, 8).unwrap();
        assert!(verify_subdivision(&d, &p, &cert, true, Some(&l)).unwrap().pass());
    }

    #[test]
    fn two_cycle_long_and_short() {
        let d = Digraph::complete(200);
        let p = Pattern::two_cycle();
        let l = [196, 4];
        let mut t = Trace::default();
        let c = solve_spanning_nonextremal(&d, &p, &l, &ParameterLadder::default(), 2, &Default::default(), &mut t).unwrap();
        assert_eq!(c.lengths(), vec![196, 4]);
        assert!(build_skeleton_spanning(&d, &p, &[100, 100 - 1], &ParameterLadder::default(), 1, &Default::default()).is_err());
    }

    #[test]
    fn short_sum_over_budget_is_input_error() {
        let d = Digraph::complete(200);
        let p = Pattern::transitive_triangle();
        let e = build_skeleton_spanning(&d, &p, &[170, 15, 15], &ParameterLadder::default(), 1, &Default::default());
        assert!(e.unwrap_err().is_input());
    }

    #[test]
    fn tiling_on_complete() {
        let d = Digraph::complete(200);
        let p = Pattern::two_cycle();
        let ladder = ParameterLadder::default();
        let mut t = Trace::default();
        for orders in [vec![100, 100], vec![3, 197], vec![200]] {
            let c = solve_tiling_nonextremal(&d, &p, &orders, &ladder, 5, &Default::default(), &mut t).unwrap();
            assert!(verify_tiling(&d, &p, &c).unwrap().pass());
        }
    }

    #[test]
    fn exact_paths() {
        let d = Digraph::complete(30);
        let mut rng = derive(1, 1);
        for len in 1..10 {
            let r = exact_path(&d, 0, 1, len, &BitSet::from_iter(30, [0, 1]), &mut rng).unwrap();
            assert!(d.is_path(&r) && r.len() == len + 1);
        }
    }
}
