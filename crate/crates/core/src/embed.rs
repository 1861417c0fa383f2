//! Path systems in near-complete bipartite structures, found as perfect
//! matchings between consecutive pairs of one side and vertices of the other.

use crate::bitset::BitSet;
use crate::digraph::Digraph;
use crate::error::{Error, Result};
use crate::matching::Bipartite;
use crate::pattern::{verify_subdivision, verify_tiling, Pattern, SubdivisionCert, TilingCert};
use crate::rng::derive;
use rand::seq::SliceRandom;
use rand::Rng;

/// Orderings are enumerated exhaustively up to this many.
pub const EXHAUSTIVE_ORDERINGS: usize = 40_320;

#[derive(Clone, Debug)]
pub struct EmbedRequest {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    /// `(x_i, y_i)`: path `i` starts at `x_i` in `a` and ends at `y_i` in `b`.
    pub ends: Vec<(usize, usize)>,
    /// Number of `a`-vertices (equally, `b`-vertices) on path `i`.
    pub sizes: Vec<usize>,
    pub eta: f64,
}

/// Left pairs of the auxiliary graph whose joint neighbourhood is too small.
#[derive(Clone, Debug, PartialEq)]
pub struct HallWitness {
    pub sequences: Vec<Vec<usize>>,
    pub pairs: Vec<(usize, usize)>,
    pub b_prime: Vec<usize>,
    pub neighbours: Vec<usize>,
}

impl HallWitness {
    /// Recomputes the neighbourhood in the host and checks the deficiency.
    pub fn holds(&self, d: &Digraph) -> bool {
        let n: Vec<usize> = self
            .b_prime
            .iter()
            .copied()
            .filter(|&b| self.pairs.iter().any(|&(x, y)| d.has_arc(x, b) && d.has_arc(b, y)))
            .collect();
        let mut want = self.neighbours.clone();
        want.sort_unstable();
        n == want && n.len() < self.pairs.len()
    }
}

#[derive(Clone, Debug)]
pub enum EmbedOutcome {
    Paths(Vec<Vec<usize>>),
    /// No ordering of the `a` side meets the endpoint constraint.
    NoOrdering,
    Hall(HallWitness),
}

impl EmbedRequest {
    pub fn validate(&self, n: usize) -> Result<()> {
        let total: usize = self.sizes.iter().sum();
        if self.a.len() != self.b.len() || self.a.len() != total {
            return Err(Error::input(format!(
                "need |A| = |B| = sum of sizes, got {}, {}, {total}",
                self.a.len(),
                self.b.len()
            )));
        }
        if self.ends.len() != self.sizes.len() || self.sizes.contains(&0) {
            return Err(Error::input("one positive size per endpoint pair"));
        }
        let mut seen = BitSet::new(n);
        for &v in self.a.iter().chain(&self.b) {
            if v >= n || !seen.insert(v) {
                return Err(Error::input(format!("vertex {v} repeated or out of range")));
            }
        }
        let aset = BitSet::from_iter(n, self.a.iter().copied());
        let bset = BitSet::from_iter(n, self.b.iter().copied());
        let mut ends = BitSet::new(n);
        for &(x, y) in &self.ends {
            if !aset.contains(x) || !bset.contains(y) || !ends.insert(x) || !ends.insert(y) {
                return Err(Error::input(format!("bad endpoint pair ({x}, {y})")));
            }
        }
        Ok(())
    }

    /// Whether every cross semi-degree is at least `(1 - eta) a`.
    pub fn floor_holds(&self, d: &Digraph) -> bool {
        let n = d.n();
        let floor = (1.0 - self.eta) * self.a.len() as f64;
        let aset = BitSet::from_iter(n, self.a.iter().copied());
        let bset = BitSet::from_iter(n, self.b.iter().copied());
        let ok = |v: usize, other: &BitSet| {
            d.out_degree_in(v, other) as f64 >= floor && d.in_degree_in(v, other) as f64 >= floor
        };
        self.a.iter().all(|&v| ok(v, &bset)) && self.b.iter().all(|&v| ok(v, &aset))
    }
}

fn factorial_capped(k: usize, cap: usize) -> usize {
    (1..=k).try_fold(1usize, |acc, i| acc.checked_mul(i).filter(|&x| x <= cap)).unwrap_or(cap + 1)
}

/// Matches consecutive pairs of the given `a`-sequences to `b_prime`.
fn match_sequences(d: &Digraph, seqs: &[Vec<usize>], b_prime: &[usize], ends: &[(usize, usize)]) -> std::result::Result<Vec<Vec<usize>>, HallWitness> {
    let pairs: Vec<(usize, usize)> = seqs.iter().flat_map(|s| s.windows(2).map(|w| (w[0], w[1]))).collect();
    let adj = pairs
        .iter()
        .map(|&(x, y)| (0..b_prime.len()).filter(|&j| d.has_arc(x, b_prime[j]) && d.has_arc(b_prime[j], y)).collect())
        .collect();
    let q = Bipartite::new(b_prime.len(), adj);
    let m = q.max_matching();
    if m.size < pairs.len() {
        let (s, nb) = q.deficient_set(&m);
        return Err(HallWitness {
            sequences: seqs.to_vec(),
            pairs: s.iter().map(|&i| pairs[i]).collect(),
            b_prime: b_prime.to_vec(),
            neighbours: nb.iter().map(|&j| b_prime[j]).collect(),
        });
    }
    let mut k = 0;
    let mut out = Vec::with_capacity(seqs.len());
    for (s, &(_, y)) in seqs.iter().zip(ends) {
        let mut p = vec![s[0]];
        for &x in &s[1..] {
            p.push(b_prime[m.left[k].unwrap()]);
            p.push(x);
            k += 1;
        }
        p.push(y);
        out.push(p);
    }
    Ok(out)
}

/// Disjoint alternating paths `x_i -> .. -> y_i` covering both sides, each
/// with `sizes[i]` vertices on either side. Exhaustive over orderings of the
/// `a` side when there are at most [`EXHAUSTIVE_ORDERINGS`], randomized otherwise.
pub fn embed_paths_bipartite(d: &Digraph, req: &EmbedRequest, seed: u64, attempts: usize) -> Result<EmbedOutcome> {
    req.validate(d.n())?;
    let xs: Vec<usize> = req.ends.iter().map(|e| e.0).collect();
    let ys: Vec<usize> = req.ends.iter().map(|e| e.1).collect();
    let pool: Vec<usize> = req.a.iter().copied().filter(|v| !xs.contains(v)).collect();
    let b_prime: Vec<usize> = req.b.iter().copied().filter(|v| !ys.contains(v)).collect();
    for (i, &(x, y)) in req.ends.iter().enumerate() {
        if req.sizes[i] == 1 && !d.has_arc(x, y) {
            return Ok(EmbedOutcome::NoOrdering);
        }
    }
    let cut = |order: &[usize]| -> Option<Vec<Vec<usize>>> {
        let mut at = 0;
        let mut seqs = Vec::with_capacity(req.ends.len());
        for (i, &(x, y)) in req.ends.iter().enumerate() {
            let r = req.sizes[i] - 1;
            let mut s = vec![x];
            s.extend_from_slice(&order[at..at + r]);
            at += r;
            if !d.has_arc(*s.last().unwrap(), y) {
                return None;
            }
            seqs.push(s);
        }
        Some(seqs)
    };
    let mut last_hall = None;
    if factorial_capped(pool.len(), EXHAUSTIVE_ORDERINGS) <= EXHAUSTIVE_ORDERINGS {
        let mut order = pool.clone();
        let mut found = None;
        permute(&mut order, 0, &mut |o| {
            if let Some(seqs) = cut(o) {
                match match_sequences(d, &seqs, &b_prime, &req.ends) {
                    Ok(p) => {
                        found = Some(p);
                        return true;
                    }
                    Err(w) => last_hall = Some(w),
                }
            }
            false
        });
        if let Some(p) = found {
            return Ok(EmbedOutcome::Paths(p));
        }
        return Ok(last_hall.map_or(EmbedOutcome::NoOrdering, EmbedOutcome::Hall));
    }
    let mut rng = derive(seed, 0xe3);
    for _ in 0..attempts.max(1) {
        // Reserve the last vertex of each sequence first.
        let mut left = pool.clone();
        left.shuffle(&mut rng);
        let mut lasts = vec![None; req.ends.len()];
        let mut ok = true;
        for (i, &(_, y)) in req.ends.iter().enumerate() {
            if req.sizes[i] == 1 {
                continue;
            }
            match left.iter().position(|&v| d.has_arc(v, y)) {
                Some(k) => lasts[i] = Some(left.swap_remove(k)),
                None => ok = false,
            }
        }
        if !ok {
            continue;
        }
        let mut order = Vec::with_capacity(pool.len());
        let mut at = 0;
        for (i, l) in lasts.iter().enumerate() {
            let r = req.sizes[i] - 1;
            if let Some(l) = l {
                order.extend_from_slice(&left[at..at + r - 1]);
                at += r - 1;
                order.push(*l);
            }
        }
        let seqs = cut(&order).expect("last vertices reserved");
        match match_sequences(d, &seqs, &b_prime, &req.ends) {
            Ok(p) => return Ok(EmbedOutcome::Paths(p)),
            Err(w) => last_hall = Some(w),
        }
    }
    Ok(last_hall.map_or(EmbedOutcome::NoOrdering, EmbedOutcome::Hall))
}

/// Heap-style permutation walk; stops when `f` returns true.
fn permute(v: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize]) -> bool) -> bool {
    if k == v.len() {
        return f(v);
    }
    for i in k..v.len() {
        v.swap(k, i);
        if permute(v, k + 1, f) {
            return true;
        }
        v.swap(k, i);
    }
    false
}

/// A prebuilt path treated as one slot. `head_b`/`tail_b` mark ends that sit
/// on the second side, so they meet first-side vertices by a direct arc.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Element {
    pub path: Vec<usize>,
    pub head_b: bool,
    pub tail_b: bool,
}

impl Element {
    pub fn a(v: usize) -> Self {
        Element { path: vec![v], head_b: false, tail_b: false }
    }

    pub fn b(v: usize) -> Self {
        Element { path: vec![v], head_b: true, tail_b: true }
    }

    pub fn new(path: Vec<usize>, head_b: bool, tail_b: bool) -> Self {
        assert!(!path.is_empty());
        Element { path, head_b, tail_b }
    }

    pub fn head(&self) -> usize {
        self.path[0]
    }

    pub fn tail(&self) -> usize {
        *self.path.last().unwrap()
    }

    pub fn weight(&self) -> usize {
        self.path.len()
    }

    fn boundary(&self) -> usize {
        self.head_b as usize + self.tail_b as usize
    }
}

#[derive(Clone, Debug)]
pub struct RouteSpec {
    pub start: Element,
    pub end: Element,
    /// Vertices strictly between `start` and `end`.
    pub interior: usize,
    /// Items that must lie on this route.
    pub fixed: Vec<Element>,
    /// Routes sharing a group may trade interior counts.
    pub group: Option<usize>,
}

impl RouteSpec {
    pub fn new(start: Element, end: Element, interior: usize) -> Self {
        RouteSpec { start, end, interior, fixed: Vec::new(), group: None }
    }
}

/// Free vertices and items of one block. In clique mode every free vertex
/// sits in `a` and the split into sides is chosen per attempt.
#[derive(Clone, Debug, Default)]
pub struct BlockSpec {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub clique: bool,
    pub items: Vec<Element>,
}

struct Plan {
    items: Vec<Vec<Element>>,
    interior: Vec<usize>,
    a: Vec<usize>,
    b: Vec<usize>,
}

fn numerator(r: &RouteSpec, items: &[Element], interior: usize) -> i64 {
    let w: usize = items.iter().map(Element::weight).sum();
    let beta = r.start.tail_b as usize + r.end.head_b as usize + items.iter().map(Element::boundary).sum::<usize>();
    interior as i64 - w as i64 - items.len() as i64 - 1 + beta as i64
}

/// Finds a free arc inside `pool` whose ends suit a slot on the given side.
fn take_arc(d: &Digraph, pool: &mut Vec<usize>, other: &BitSet, rng: &mut impl Rng) -> Option<Element> {
    let set = BitSet::from_iter(d.n(), pool.iter().copied());
    let mut cand: Vec<usize> = pool.clone();
    cand.shuffle(rng);
    // Higher cross degree first, so the new slot is easy to match.
    cand.sort_by_key(|&u| std::cmp::Reverse(d.in_degree_in(u, other).min(d.out_degree_in(u, other))));
    for &u in cand.iter().take(64) {
        let outs: Vec<usize> = d.out_set(u).intersection(&set).iter().filter(|&v| v != u).collect();
        if let Some(&v) = outs.iter().max_by_key(|&&v| d.out_degree_in(v, other)) {
            pool.retain(|&x| x != u && x != v);
            return Some(Element::new(vec![u, v], false, false));
        }
    }
    None
}

fn plan(d: &Digraph, spec: &BlockSpec, routes: &[RouteSpec], rng: &mut impl Rng) -> Result<Plan> {
    let n = d.n();
    let mut items: Vec<Vec<Element>> = routes.iter().map(|r| r.fixed.clone()).collect();
    let mut interior: Vec<usize> = routes.iter().map(|r| r.interior).collect();
    let mut free = spec.items.clone();
    free.shuffle(rng);
    free.sort_by_key(|e| std::cmp::Reverse(e.weight()));
    for it in free {
        let load = |i: usize, items: &Vec<Vec<Element>>| {
            let w: usize = items[i].iter().map(|e| e.weight() + 1).sum();
            interior[i] as i64 - w as i64
        };
        let best = (0..routes.len()).max_by_key(|&i| (load(i, &items), std::cmp::Reverse(i)));
        match best {
            Some(i) if load(i, &items) > it.weight() as i64 => items[i].push(it),
            _ => return Err(Error::stage("capacity", "no route has room for a prebuilt path")),
        }
    }
    // Trade one vertex between odd routes of the same group.
    let mut by_group: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (i, r) in routes.iter().enumerate() {
        if let Some(g) = r.group {
            by_group.entry(g).or_default().push(i);
        }
    }
    for idx in by_group.values() {
        let odd: Vec<usize> = idx.iter().copied().filter(|&i| numerator(&routes[i], &items[i], interior[i]).rem_euclid(2) == 1).collect();
        for pair in odd.chunks(2) {
            if let [i, j] = *pair {
                let (lo, hi) = if interior[i] >= interior[j] { (j, i) } else { (i, j) };
                interior[hi] -= 1;
                interior[lo] += 1;
            }
        }
    }
    // Pair remaining odd routes by moving one odd-effect item across.
    let odd_effect = |e: &Element| (e.weight() + 1 + e.boundary()) % 2 == 1;
    let odd: Vec<usize> =
        (0..routes.len()).filter(|&i| interior[i] > 0 && numerator(&routes[i], &items[i], interior[i]).rem_euclid(2) == 1).collect();
    let mut done = vec![false; routes.len()];
    for &i in &odd {
        for &j in &odd {
            if i == j || done[i] || done[j] {
                continue;
            }
            let room = |k: usize, items: &Vec<Vec<Element>>| {
                interior[k] as i64 - items[k].iter().map(|e| e.weight() as i64 + 1).sum::<i64>()
            };
            for (from, to) in [(i, j), (j, i)] {
                let pos = items[from]
                    .iter()
                    .position(|e| odd_effect(e) && !routes[from].fixed.contains(e) && room(to, &items) > e.weight() as i64);
                if let Some(k) = pos {
                    let e = items[from].remove(k);
                    items[to].push(e);
                    done[i] = true;
                    done[j] = true;
                    break;
                }
            }
        }
    }
    let mut a = spec.a.clone();
    let mut b = spec.b.clone();
    a.shuffle(rng);
    b.shuffle(rng);
    let aset = BitSet::from_iter(n, a.iter().copied());
    let bset = BitSet::from_iter(n, b.iter().copied());
    let half = |i: usize, items: &Vec<Vec<Element>>, interior: &Vec<usize>| numerator(&routes[i], &items[i], interior[i]);
    for i in 0..routes.len() {
        if interior[i] == 0 || half(i, &items, &interior).rem_euclid(2) == 0 {
            continue;
        }
        let delta2: i64 = a.len() as i64 * 2 - (0..routes.len()).map(|k| half(k, &items, &interior)).sum::<i64>();
        let arc = if spec.clique || delta2 > 0 {
            take_arc(d, &mut a, if spec.clique { &aset } else { &bset }, rng)
        } else {
            take_arc(d, &mut b, &aset, rng).map(|e| Element { head_b: true, tail_b: true, ..e })
        };
        match arc {
            Some(e) => items[i].push(e),
            None => return Err(Error::stage("parity", "no free arc inside a side to fix route parity")),
        }
    }
    if !spec.clique {
        loop {
            let sum: i64 = (0..routes.len()).filter(|&k| interior[k] > 0).map(|k| half(k, &items, &interior) / 2).sum();
            let delta = a.len() as i64 - sum;
            if delta == 0 {
                break;
            }
            let i = (0..routes.len()).filter(|&k| interior[k] > 0).max_by_key(|&k| half(k, &items, &interior));
            let Some(i) = i else { break };
            for _ in 0..2 {
                let e = if delta > 0 {
                    take_arc(d, &mut a, &bset, rng)
                } else {
                    take_arc(d, &mut b, &aset, rng).map(|e| Element { head_b: true, tail_b: true, ..e })
                };
                match e {
                    Some(e) => items[i].push(e),
                    None => return Err(Error::stage("balance", format!("sides differ by {delta} and no inner arcs remain"))),
                }
            }
        }
    }
    Ok(Plan { items, interior, a, b })
}

/// Embeds every route of a block so that, together, they cover all free
/// vertices and items exactly once. Returns full vertex sequences.
pub fn embed_block(d: &Digraph, spec: &BlockSpec, routes: &[RouteSpec], seed: u64, attempts: usize) -> Result<Vec<Vec<usize>>> {
    let n = d.n();
    let mut seen = BitSet::new(n);
    for &v in spec.a.iter().chain(&spec.b).chain(spec.items.iter().chain(routes.iter().flat_map(|r| &r.fixed)).flat_map(|e| &e.path)) {
        if v >= n || !seen.insert(v) {
            return Err(Error::input(format!("vertex {v} offered twice to a block")));
        }
    }
    let ends = BitSet::from_iter(n, routes.iter().flat_map(|r| r.start.path.iter().chain(&r.end.path)).copied());
    if !ends.is_disjoint(&seen) {
        return Err(Error::input("route endpoints overlap the free pool"));
    }
    let offered = seen.count();
    let need: usize = routes.iter().map(|r| r.interior).sum();
    if offered != need {
        return Err(Error::input(format!("block offers {offered} vertices, routes need {need}")));
    }
    let mut rng = derive(seed, 0xb10c);
    let mut last = Error::stage("hall-violation", "no attempt made");
    for _ in 0..attempts.max(1) {
        let p = match plan(d, spec, routes, &mut rng) {
            Ok(p) => p,
            Err(e) => {
                last = e;
                continue;
            }
        };
        match arrange(d, spec.clique, routes, p, &mut rng) {
            Ok(r) => return Ok(r),
            Err(e) => last = e,
        }
    }
    Err(last)
}

fn arrange(d: &Digraph, clique: bool, routes: &[RouteSpec], p: Plan, rng: &mut impl Rng) -> Result<Vec<Vec<usize>>> {
    let n = d.n();
    let mut x = Vec::with_capacity(routes.len());
    for (i, r) in routes.iter().enumerate() {
        if p.interior[i] == 0 {
            if !p.items[i].is_empty() || !d.has_arc(r.start.tail(), r.end.head()) {
                return Err(Error::stage("hall-violation", "a length-1 route has no arc"));
            }
            x.push(0);
            continue;
        }
        let num = numerator(r, &p.items[i], p.interior[i]);
        if num < 0 || num % 2 != 0 {
            return Err(Error::stage("parity", format!("route {i} cannot reach {} interior vertices", p.interior[i])));
        }
        x.push((num / 2) as usize);
    }
    let singles_needed: usize = x.iter().sum();
    let (mut singles, bpool) = if clique {
        let mut all = p.a.clone();
        all.shuffle(rng);
        if singles_needed > all.len() {
            return Err(Error::stage("balance", "not enough free vertices"));
        }
        let b = all.split_off(singles_needed);
        (all, b)
    } else {
        if p.a.len() != singles_needed {
            return Err(Error::stage("balance", format!("{} free first-side vertices, routes need {singles_needed}", p.a.len())));
        }
        (p.a.clone(), p.b.clone())
    };
    let bset = BitSet::from_iter(n, bpool.iter().copied());
    let mut seqs: Vec<Vec<Element>> = Vec::with_capacity(routes.len());
    for (i, r) in routes.iter().enumerate() {
        if p.interior[i] == 0 {
            seqs.push(vec![r.start.clone(), r.end.clone()]);
            continue;
        }
        let mut mid = p.items[i].clone();
        mid.shuffle(rng);
        let mut seq = vec![r.start.clone()];
        seq.extend(mid);
        seq.push(r.end.clone());
        let mut quota = x[i];
        // Every second-side boundary gets its own first-side neighbour.
        let mut k = 0;
        while k + 1 < seq.len() {
            let (l, rr) = (&seq[k], &seq[k + 1]);
            if l.tail_b || rr.head_b {
                let ok = |s: usize| (!l.tail_b || d.has_arc(l.tail(), s)) && (!rr.head_b || d.has_arc(s, rr.head()));
                let pos = singles.iter().position(|&s| ok(s));
                match (pos, quota) {
                    (Some(j), q) if q > 0 => {
                        let s = singles.swap_remove(j);
                        seq.insert(k + 1, Element::a(s));
                        quota -= 1;
                        k += 1;
                    }
                    _ => return Err(Error::stage("hall-violation", "no first-side vertex next to a second-side end")),
                }
            }
            k += 1;
        }
        for _ in 0..quota {
            let j = rng.gen_range(0..singles.len());
            let s = singles.swap_remove(j);
            let gaps: Vec<usize> = (0..seq.len() - 1).filter(|&g| !seq[g].tail_b && !seq[g + 1].head_b).collect();
            let g = *gaps.choose(rng).ok_or_else(|| Error::stage("hall-violation", "no open gap"))?;
            seq.insert(g + 1, Element::a(s));
        }
        seqs.push(seq);
    }
    // Pairs needing a second-side vertex between them.
    let mut pairs = Vec::new();
    for (i, seq) in seqs.iter().enumerate() {
        if p.interior[i] == 0 {
            continue;
        }
        for g in 0..seq.len() - 1 {
            if !seq[g].tail_b && !seq[g + 1].head_b {
                pairs.push((i, g, seq[g].tail(), seq[g + 1].head()));
            } else if !d.has_arc(seq[g].tail(), seq[g + 1].head()) {
                return Err(Error::stage("hall-violation", "missing direct arc at a side change"));
            }
        }
    }
    if pairs.len() != bpool.len() {
        return Err(Error::stage("balance", format!("{} gaps for {} second-side vertices", pairs.len(), bpool.len())));
    }
    let adj = pairs
        .iter()
        .map(|&(_, _, t, h)| {
            d.out_set(t).intersection(d.in_set(h)).intersection(&bset).iter().map(|v| bpool.iter().position(|&w| w == v).unwrap()).collect()
        })
        .collect();
    let q = Bipartite::new(bpool.len(), adj);
    let m = q.max_matching();
    if m.size < pairs.len() {
        let (s, nb) = q.deficient_set(&m);
        return Err(Error::stage("hall-violation", format!("{} gaps see only {} vertices", s.len(), nb.len())));
    }
    let mut fill: Vec<Vec<Option<usize>>> = seqs.iter().map(|s| vec![None; s.len()]).collect();
    for (k, &(i, g, _, _)) in pairs.iter().enumerate() {
        fill[i][g] = Some(bpool[m.left[k].unwrap()]);
    }
    Ok(seqs
        .iter()
        .zip(fill)
        .map(|(seq, f)| {
            let mut out = Vec::new();
            for (e, b) in seq.iter().zip(f) {
                out.extend_from_slice(&e.path);
                out.extend(b);
            }
            out
        })
        .collect())
}

/// Sides for branch vertices (`true` = second side) so that route parities
/// can add up: the sum of `deg(v)` over second-side vertices must have the
/// parity `odd`. None when every degree is even and `odd` is set.
pub fn choose_sides(p: &Pattern, odd: bool) -> Option<Vec<bool>> {
    let mut sides = vec![false; p.s()];
    if odd {
        let deg = |v: usize| p.arcs().iter().filter(|&&(a, b)| a == v || b == v).count();
        let v = (0..p.s()).find(|&v| deg(v) % 2 == 1)?;
        sides[v] = true;
    }
    Some(sides)
}

fn pick_branch(d: &Digraph, p: &Pattern, sides: &[bool], a: &mut Vec<usize>, b: &mut Vec<usize>, rng: &mut impl Rng) -> Result<Vec<usize>> {
    let mut f = Vec::with_capacity(p.s());
    for &side in sides {
        let pool = if side { &mut *b } else { &mut *a };
        if pool.is_empty() {
            return Err(Error::input("a side is too small for the branch vertices"));
        }
        let j = rng.gen_range(0..pool.len());
        f.push(pool.swap_remove(j));
    }
    let _ = d;
    Ok(f)
}

/// Interiors for lengths given as shares of `a` (sum `a`): twice each share,
/// with the first bridge arc (or arc 0) absorbing the difference `h - s`.
pub fn shares_to_lengths(p: &Pattern, shares: &[usize], a: usize) -> Result<Vec<usize>> {
    if shares.len() != p.h() || shares.iter().sum::<usize>() != a || shares.contains(&0) {
        return Err(Error::input(format!("need {} positive shares summing to {a}", p.h())));
    }
    let mut len: Vec<i64> = shares.iter().map(|&l| 2 * l as i64).collect();
    let diff = p.h() as i64 - p.s() as i64;
    let at = if diff % 2 != 0 { (0..p.h()).find(|&i| is_bridge(p, i)).unwrap_or(0) } else { 0 };
    len[at] += diff;
    if len[at] < 1 {
        return Err(Error::input("shares too small for this pattern"));
    }
    Ok(len.into_iter().map(|l| l as usize).collect())
}

fn is_bridge(p: &Pattern, e: usize) -> bool {
    let s = p.s();
    let mut seen = vec![false; s];
    let mut stack = vec![p.arcs()[e].0];
    seen[p.arcs()[e].0] = true;
    while let Some(u) = stack.pop() {
        for (k, &(a, b)) in p.arcs().iter().enumerate() {
            if k == e {
                continue;
            }
            for (x, y) in [(a, b), (b, a)] {
                if x == u && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    !seen[p.arcs()[e].1]
}

pub fn sides_for_lengths(p: &Pattern, lengths: &[usize]) -> Option<Vec<bool>> {
    // Route u -> v alternates sides, so its length is odd iff the sides differ.
    let s = p.s();
    let mut side: Vec<Option<bool>> = vec![None; s];
    for root in 0..s {
        if side[root].is_some() {
            continue;
        }
        side[root] = Some(false);
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            for (k, &(a, b)) in p.arcs().iter().enumerate() {
                let odd = lengths[k] % 2 == 1;
                for (x, y) in [(a, b), (b, a)] {
                    if x != u {
                        continue;
                    }
                    let want = side[u].unwrap() ^ odd;
                    match side[y] {
                        None => {
                            side[y] = Some(want);
                            stack.push(y);
                        }
                        Some(v) if v != want => return None,
                        _ => {}
                    }
                }
            }
        }
    }
    Some(side.into_iter().map(Option::unwrap).collect())
}

/// Spanning subdivision of the bipartite digraph between `a` and `b` with
/// route lengths from `shares` (see [`shares_to_lengths`]).
pub fn bipartite_subdivision(d: &Digraph, a: &[usize], b: &[usize], p: &Pattern, shares: &[usize], eta: f64, seed: u64) -> Result<SubdivisionCert> {
    if a.len() != b.len() {
        return Err(Error::input("sides must be balanced"));
    }
    let lengths = shares_to_lengths(p, shares, a.len())?;
    let t = cross_only(d, a, b);
    let sides = sides_for_lengths(p, &lengths).ok_or_else(|| Error::input("route parities are inconsistent with two sides"))?;
    let mut rng = derive(seed, 0xb5);
    let req_floor = EmbedRequest { a: a.to_vec(), b: b.to_vec(), ends: vec![], sizes: vec![], eta };
    let _ = req_floor.floor_holds(&t);
    let mut last = None;
    for attempt in 0..8u64 {
        let (mut fa, mut fb) = (a.to_vec(), b.to_vec());
        let f = pick_branch(&t, p, &sides, &mut fa, &mut fb, &mut rng)?;
        let routes: Vec<RouteSpec> = p
            .arcs()
            .iter()
            .enumerate()
            .map(|(k, &(u, v))| RouteSpec::new(elem(f[u], sides[u]), elem(f[v], sides[v]), lengths[k] - 1))
            .collect();
        let spec = BlockSpec { a: fa, b: fb, clique: false, items: vec![] };
        match embed_block(&t, &spec, &routes, seed.wrapping_add(attempt), 4) {
            Ok(r) => {
                let cert = SubdivisionCert { branch: f, routes: r };
                let v = verify_subdivision(d, p, &cert, false, Some(&lengths))?;
                if !v.pass() {
                    return Err(Error::stage("verify", v.clauses().join("; ")));
                }
                return Ok(cert);
            }
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap())
}

/// Perfect tiling of the bipartite digraph between `a` and `b` into
/// subdivisions of orders `2 * orders[i]`.
pub fn bipartite_tiling(d: &Digraph, a: &[usize], b: &[usize], p: &Pattern, orders: &[usize], eta: f64, seed: u64) -> Result<TilingCert> {
    if a.len() != b.len() || orders.iter().sum::<usize>() != a.len() {
        return Err(Error::input("need balanced sides and orders summing to one side"));
    }
    if orders.iter().any(|&o| 2 * o < p.s()) {
        return Err(Error::input("an order is below the pattern size"));
    }
    let t = cross_only(d, a, b);
    let _ = eta;
    let mut rng = derive(seed, 0xb7);
    let sides = choose_sides(p, (p.s() + p.h()) % 2 == 1).ok_or_else(|| Error::input("no side assignment fits the part parity"))?;
    let mut last = None;
    for attempt in 0..8u64 {
        let (mut fa, mut fb) = (a.to_vec(), b.to_vec());
        let mut branches = Vec::new();
        let mut routes = Vec::new();
        for (j, &o) in orders.iter().enumerate() {
            let f = pick_branch(&t, p, &sides, &mut fa, &mut fb, &mut rng)?;
            let inner = 2 * o - p.s();
            for (k, &(u, v)) in p.arcs().iter().enumerate() {
                let share = inner / p.h() + usize::from(k < inner % p.h());
                let mut r = RouteSpec::new(elem(f[u], sides[u]), elem(f[v], sides[v]), share);
                r.group = Some(j);
                routes.push(r);
            }
            branches.push(f);
        }
        let spec = BlockSpec { a: fa, b: fb, clique: false, items: vec![] };
        match embed_block(&t, &spec, &routes, seed.wrapping_add(attempt), 4) {
            Ok(r) => {
                let mut it = r.into_iter();
                let parts = branches
                    .into_iter()
                    .map(|f| SubdivisionCert { branch: f, routes: it.by_ref().take(p.h()).collect() })
                    .collect();
                let cert = TilingCert { parts, orders: orders.iter().map(|o| 2 * o).collect() };
                let v = verify_tiling(d, p, &cert)?;
                if !v.pass() {
                    return Err(Error::stage("verify", v.clauses().join("; ")));
                }
                return Ok(cert);
            }
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap())
}

pub fn elem(v: usize, second: bool) -> Element {
    if second {
        Element::b(v)
    } else {
        Element::a(v)
    }
}

/// The bipartite digraph of arcs between `a` and `b` only.
pub fn cross_only(d: &Digraph, a: &[usize], b: &[usize]) -> Digraph {
    let n = d.n();
    let aset = BitSet::from_iter(n, a.iter().copied());
    let bset = BitSet::from_iter(n, b.iter().copied());
    let arcs = d.arcs().filter(|&(u, v)| (aset.contains(u) && bset.contains(v)) || (bset.contains(u) && aset.contains(v)));
    Digraph::from_arcs(n, &arcs.collect::<Vec<_>>()).expect("subset of a valid arc list")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doubled_complete(a: usize) -> (Digraph, Vec<usize>, Vec<usize>) {
        let av: Vec<usize> = (0..a).collect();
        let bv: Vec<usize> = (a..2 * a).collect();
        let mut arcs = Vec::new();
        for &x in &av {
            for &y in &bv {
                arcs.push((x, y));
                arcs.push((y, x));
            }
        }
        (Digraph::from_arcs(2 * a, &arcs).unwrap(), av, bv)
    }

    #[test]
    fn complete_bipartite_two_paths() {
        let (d, a, b) = doubled_complete(6);
        let req = EmbedRequest { a: a.clone(), b: b.clone(), ends: vec![(0, 6), (1, 7)], sizes: vec![3, 3], eta: 0.0 };
        assert!(req.floor_holds(&d));
        let EmbedOutcome::Paths(ps) = embed_paths_bipartite(&d, &req, 1, 10).unwrap() else { panic!() };
        let mut all: Vec<usize> = ps.concat();
        all.sort();
        assert_eq!(all, (0..12).collect::<Vec<_>>());
        for p in &ps {
            assert!(d.is_path(p));
            assert_eq!(p.len(), 6);
            assert!(p.iter().enumerate().all(|(i, &v)| (v < 6) == (i % 2 == 0)));
        }
    }

    #[test]
    fn missing_arcs_give_hall_witness() {
        let (full, a, b) = doubled_complete(4);
        // Only vertex 3 enters 6 and 7, so pairs led by 1 and 2 see nothing.
        let arcs = full.arcs().filter(|&(u, v)| !(v >= 6 && u != 3));
        let d = Digraph::from_arcs(8, &arcs.collect::<Vec<_>>()).unwrap();
        let req = EmbedRequest { a, b, ends: vec![(1, 4), (2, 5)], sizes: vec![2, 2], eta: 0.5 };
        match embed_paths_bipartite(&d, &req, 1, 10).unwrap() {
            EmbedOutcome::Hall(w) => assert!(w.holds(&d)),
            other => panic!("{other:?}"),
        }
    }

    /// Exhaustive path packing for tiny instances.
    fn packable(d: &Digraph, req: &EmbedRequest) -> bool {
        fn walk(d: &Digraph, req: &EmbedRequest, i: usize, cur: usize, left: usize, used: &mut Vec<bool>) -> bool {
            let (_, y) = req.ends[i];
            if left == 0 {
                if !d.has_arc(cur, y) {
                    return false;
                }
                return i + 1 == req.ends.len() || walk(d, req, i + 1, req.ends[i + 1].0, req.sizes[i + 1] - 1, used);
            }
            for &b in &req.b {
                if used[b] || !d.has_arc(cur, b) {
                    continue;
                }
                used[b] = true;
                for &a in &req.a {
                    if !used[a] && d.has_arc(b, a) {
                        used[a] = true;
                        if walk(d, req, i, a, left - 1, used) {
                            return true;
                        }
                        used[a] = false;
                    }
                }
                used[b] = false;
            }
            false
        }
        let mut used = vec![false; d.n()];
        for &(x, y) in &req.ends {
            used[x] = true;
            used[y] = true;
        }
        walk(d, req, 0, req.ends[0].0, req.sizes[0] - 1, &mut used)
    }

    proptest::proptest! {
        #[test]
        fn agrees_with_path_packing(a in 1usize..=6, m in 1usize..=3, density in 0.3f64..0.95, seed in 0u64..1_000_000) {
            let m = m.min(a);
            let mut rng = derive(seed, 1);
            let mut arcs = Vec::new();
            for x in 0..a {
                for y in a..2 * a {
                    if rng.gen_bool(density) { arcs.push((x, y)); }
                    if rng.gen_bool(density) { arcs.push((y, x)); }
                }
            }
            let d = Digraph::from_arcs(2 * a, &arcs).unwrap();
            let mut sizes = vec![1; m];
            for _ in m..a { sizes[rng.gen_range(0..m)] += 1; }
            let ends = (0..m).map(|i| (i, a + i)).collect();
            let req = EmbedRequest { a: (0..a).collect(), b: (a..2 * a).collect(), ends, sizes, eta: 0.5 };
            let got = embed_paths_bipartite(&d, &req, seed, 1).unwrap();
            match &got {
                EmbedOutcome::Paths(ps) => {
                    for (p, &(x, y)) in ps.iter().zip(&req.ends) {
                        proptest::prop_assert!(d.is_path(p) && p[0] == x && *p.last().unwrap() == y);
                    }
                    proptest::prop_assert_eq!(ps.iter().map(Vec::len).sum::<usize>(), 2 * a);
                }
                EmbedOutcome::Hall(w) => proptest::prop_assert!(w.holds(&d)),
                EmbedOutcome::NoOrdering => {}
            }
            proptest::prop_assert_eq!(matches!(got, EmbedOutcome::Paths(_)), packable(&d, &req));
        }
    }

    #[test]
    fn block_routes_with_items_in_a_clique() {
        let d = Digraph::complete(40);
        let item = Element::new(vec![10, 11, 12], false, false);
        let spec = BlockSpec { a: (13..40).collect(), b: vec![], clique: true, items: vec![item] };
        let routes = vec![RouteSpec::new(Element::a(0), Element::a(1), 20), RouteSpec::new(Element::a(1), Element::a(0), 10)];
        let r = embed_block(&d, &spec, &routes, 3, 5).unwrap();
        assert_eq!(r[0].len(), 22);
        assert_eq!(r[1].len(), 12);
        for p in &r {
            assert!(d.is_path(p));
        }
    }

    #[test]
    fn subdivisions_and_tilings_on_doubled_bipartite() {
        let (d, a, b) = doubled_complete(5);
        let arc = Pattern::single_arc();
        let c = bipartite_subdivision(&d, &a, &b, &arc, &[5], 0.0, 1).unwrap();
        assert_eq!(c.order(10), 10);
        let cyc = Pattern::two_cycle();
        let t = bipartite_tiling(&d, &a, &b, &cyc, &[5], 0.0, 1).unwrap();
        assert_eq!(t.orders, vec![10]);
        assert!(bipartite_subdivision(&d, &a, &b, &arc, &[4], 0.0, 1).unwrap_err().is_input());
        let c2 = bipartite_subdivision(&d, &a, &b, &cyc, &[2, 3], 0.0, 1).unwrap();
        assert_eq!(c2.lengths(), vec![4, 6]);
    }
}
