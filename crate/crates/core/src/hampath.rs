//! Hamiltonian paths of induced subdigraphs.
//!
//! Three engines: a subset DP for up to [`EXACT_LIMIT`] vertices, a budgeted
//! depth-first search that can prove absence only when it finishes, and an
//! insertion/exchange local search for the large dense leftovers met by the
//! solvers. All of them accept optional fixed first and last vertices.

use crate::bitset::BitSet;
use crate::digraph::Digraph;
use rand::seq::SliceRandom;
use rand::Rng;

pub const EXACT_LIMIT: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Search<T> {
    Found(T),
    Absent,
    Exhausted,
}

impl<T> Search<T> {
    pub fn found(self) -> Option<T> {
        match self {
            Search::Found(t) => Some(t),
            _ => None,
        }
    }
}

/// Subset DP over `verts` (at most [`EXACT_LIMIT`] of them).
pub fn held_karp(d: &Digraph, verts: &[usize], start: Option<usize>, end: Option<usize>) -> Option<Vec<usize>> {
    let k = verts.len();
    assert!(k <= EXACT_LIMIT, "subset DP limited to {EXACT_LIMIT} vertices");
    if k == 0 {
        return if start.is_none() && end.is_none() { Some(vec![]) } else { None };
    }
    let local = |v: usize| verts.iter().position(|&x| x == v);
    let s = match start {
        Some(v) => Some(local(v)?),
        None => None,
    };
    let e = match end {
        Some(v) => Some(local(v)?),
        None => None,
    };
    if k == 1 {
        return Some(vec![verts[0]]);
    }
    if s.is_some() && s == e {
        return None;
    }
    let out: Vec<u32> = (0..k)
        .map(|i| (0..k).filter(|&j| d.has_arc(verts[i], verts[j])).fold(0u32, |m, j| m | (1 << j)))
        .collect();
    let full = (1u32 << k) - 1;
    let mut dp = vec![0u32; 1 << k];
    match s {
        Some(s) => dp[1 << s] = 1 << s,
        None => (0..k).for_each(|i| dp[1 << i] = 1 << i),
    }
    let e_bit = e.map(|e| 1u32 << e);
    for mask in 1..=full {
        let ends = dp[mask as usize];
        if ends == 0 {
            continue;
        }
        let mut it = ends;
        while it != 0 {
            let v = it.trailing_zeros() as usize;
            it &= it - 1;
            let mut nxt = out[v] & !mask;
            if let Some(eb) = e_bit {
                // The fixed end may only be appended last.
                if mask | eb != full {
                    nxt &= !eb;
                }
            }
            while nxt != 0 {
                let u = nxt.trailing_zeros();
                nxt &= nxt - 1;
                dp[(mask | (1 << u)) as usize] |= 1 << u;
            }
        }
    }
    let finals = dp[full as usize] & e_bit.unwrap_or(full);
    if finals == 0 {
        return None;
    }
    let mut cur = finals.trailing_zeros() as usize;
    let mut mask = full;
    let mut rev = vec![cur];
    while mask.count_ones() > 1 {
        let prev = mask ^ (1 << cur);
        let cand = dp[prev as usize] & in_mask(&out, cur);
        let p = cand.trailing_zeros() as usize;
        debug_assert!(cand != 0);
        rev.push(p);
        mask = prev;
        cur = p;
    }
    rev.reverse();
    Some(rev.into_iter().map(|i| verts[i]).collect())
}

fn in_mask(out: &[u32], v: usize) -> u32 {
    out.iter().enumerate().filter(|(_, &o)| o >> v & 1 == 1).fold(0, |m, (i, _)| m | (1 << i))
}

/// Depth-first search extending by the vertex with fewest onward options.
/// `budget` counts search nodes and is decremented in place.
pub fn dfs_path(
    d: &Digraph,
    verts: &[usize],
    start: Option<usize>,
    end: Option<usize>,
    budget: &mut u64,
) -> Search<Vec<usize>> {
    let n = d.n();
    let set = BitSet::from_iter(n, verts.iter().copied());
    if start.is_some_and(|s| !set.contains(s)) || end.is_some_and(|e| !set.contains(e)) {
        return Search::Absent;
    }
    if verts.is_empty() {
        return Search::Found(vec![]);
    }
    let firsts: Vec<usize> = match start {
        Some(s) => vec![s],
        None => verts.to_vec(),
    };
    let mut exhausted = false;
    for f in firsts {
        let mut path = vec![f];
        let mut left = set.clone();
        left.remove(f);
        match extend(d, &mut path, &mut left, end, budget) {
            Search::Found(()) => return Search::Found(path),
            Search::Exhausted => {
                exhausted = true;
                break;
            }
            Search::Absent => {}
        }
    }
    if exhausted {
        Search::Exhausted
    } else {
        Search::Absent
    }
}

fn extend(d: &Digraph, path: &mut Vec<usize>, left: &mut BitSet, end: Option<usize>, budget: &mut u64) -> Search<()> {
    if *budget == 0 {
        return Search::Exhausted;
    }
    *budget -= 1;
    let last = *path.last().unwrap();
    if left.is_empty() {
        return if end.is_none_or(|e| e == last) { Search::Found(()) } else { Search::Absent };
    }
    let remaining = left.count();
    let mut cands: Vec<(usize, usize)> = d
        .out_set(last)
        .intersection(left)
        .iter()
        .filter(|&v| remaining == 1 || Some(v) != end)
        .map(|v| (d.out_set(v).intersection_count(left), v))
        .collect();
    cands.sort_unstable();
    for (_, v) in cands {
        path.push(v);
        left.remove(v);
        let r = extend(d, path, left, end, budget);
        if !matches!(r, Search::Absent) {
            return r;
        }
        left.insert(v);
        path.pop();
    }
    Search::Absent
}

/// Exact answer when `verts` is small enough for the DP, otherwise the
/// budgeted search.
pub fn hamiltonian_path_exact(
    d: &Digraph,
    verts: &[usize],
    start: Option<usize>,
    end: Option<usize>,
    budget: u64,
) -> Search<Vec<usize>> {
    if verts.len() <= EXACT_LIMIT {
        match held_karp(d, verts, start, end) {
            Some(p) => Search::Found(p),
            None => Search::Absent,
        }
    } else {
        let mut b = budget;
        dfs_path(d, verts, start, end, &mut b)
    }
}

/// Local search for a Hamiltonian path of `D[verts]`.
///
/// Works on a cycle through a virtual vertex that stands for the outside
/// world: it may enter anywhere unless the first vertex is fixed and leave
/// from anywhere unless the last vertex is fixed. Vertices are inserted
/// between consecutive cycle vertices; stuck vertices displace a short
/// segment, which goes back into the pool.
pub fn heuristic_path<R: Rng>(
    d: &Digraph,
    verts: &[usize],
    start: Option<usize>,
    end: Option<usize>,
    rng: &mut R,
    restarts: usize,
) -> Option<Vec<usize>> {
    let k = verts.len();
    if k == 0 {
        return (start.is_none() && end.is_none()).then(Vec::new);
    }
    let pos = |v: usize| verts.iter().position(|&x| x == v);
    let s = match start {
        Some(v) => Some(pos(v)?),
        None => None,
    };
    let e = match end {
        Some(v) => Some(pos(v)?),
        None => None,
    };
    if k == 1 {
        return Some(vec![verts[0]]);
    }
    if s.is_some() && s == e {
        return None;
    }
    let z = k;
    let mut local = vec![usize::MAX; d.n()];
    for (i, &v) in verts.iter().enumerate() {
        local[v] = i;
    }
    let mut out = vec![BitSet::new(k + 1); k + 1];
    for i in 0..k {
        for j in d.out_set(verts[i]).iter() {
            if local[j] != usize::MAX {
                out[i].insert(local[j]);
            }
        }
    }
    for i in 0..k {
        if s.is_none() || s == Some(i) {
            out[z].insert(i);
        }
        if e.is_none() || e == Some(i) {
            out[i].insert(z);
        }
    }
    let mut search = CycleSearch { out, k, pinned: BitSet::new(k + 1) };
    search.pinned.insert(z);
    if let Some(s) = s {
        search.pinned.insert(s);
    }
    if let Some(e) = e {
        search.pinned.insert(e);
    }
    for _ in 0..restarts.max(1) {
        if let Some(cyc) = search.run(s, e, rng) {
            let zi = cyc.iter().position(|&x| x == z).unwrap();
            let path: Vec<usize> = cyc[zi + 1..].iter().chain(cyc[..zi].iter()).map(|&i| verts[i]).collect();
            debug_assert!(d.is_path(&path));
            return Some(path);
        }
    }
    None
}

struct CycleSearch {
    out: Vec<BitSet>,
    k: usize,
    pinned: BitSet,
}

impl CycleSearch {
    fn arc(&self, a: usize, b: usize) -> bool {
        self.out[a].contains(b)
    }

    fn initial(&self, s: Option<usize>, e: Option<usize>, rng: &mut impl Rng) -> Option<Vec<usize>> {
        let z = self.k;
        match (s, e) {
            (Some(s), Some(e)) => {
                // Shortest s -> e route, avoiding the virtual vertex.
                let mut prev = vec![usize::MAX; self.k];
                let mut queue = std::collections::VecDeque::from([s]);
                prev[s] = s;
                while let Some(u) = queue.pop_front() {
                    if u == e {
                        break;
                    }
                    let mut nb: Vec<usize> = self.out[u].iter().filter(|&v| v < self.k && prev[v] == usize::MAX).collect();
                    nb.shuffle(rng);
                    for v in nb {
                        prev[v] = u;
                        queue.push_back(v);
                    }
                }
                if prev[e] == usize::MAX {
                    return None;
                }
                let mut route = vec![e];
                while *route.last().unwrap() != s {
                    route.push(prev[*route.last().unwrap()]);
                }
                route.push(z);
                route.reverse();
                Some(route)
            }
            (Some(s), None) => Some(vec![z, s]),
            (None, Some(e)) => Some(vec![z, e]),
            (None, None) => Some(vec![z, rng.gen_range(0..self.k)]),
        }
    }

    fn run(&self, s: Option<usize>, e: Option<usize>, rng: &mut impl Rng) -> Option<Vec<usize>> {
        let k = self.k;
        let mut cyc = self.initial(s, e, rng)?;
        let mut on = BitSet::new(k + 1);
        cyc.iter().for_each(|&v| {
            on.insert(v);
        });
        let mut pool: Vec<usize> = (0..k).filter(|&v| !on.contains(v)).collect();
        pool.shuffle(rng);
        let mut stall = 0usize;
        let limit = 200 * k + 500;
        let mut steps = 0usize;
        while let Some(w) = pool.pop() {
            steps += 1;
            if steps > limit {
                return None;
            }
            if let Some(i) = self.insertion_point(&cyc, w, rng) {
                cyc.insert(i + 1, w);
                on.insert(w);
                stall = 0;
                continue;
            }
            // Displace a segment of 1..=3 vertices strictly between c[i] and c[j].
            let m = cyc.len();
            if stall > 4 * k + pool.len() {
                return None;
            }
            let mut options = Vec::new();
            for i in 0..m {
                if !self.arc(cyc[i], w) {
                    continue;
                }
                for gap in 1..=3usize {
                    if gap >= m {
                        break;
                    }
                    let j = (i + gap + 1) % m;
                    if !self.arc(w, cyc[j]) {
                        continue;
                    }
                    let seg: Vec<usize> = (1..=gap).map(|t| (i + t) % m).collect();
                    if seg.iter().any(|&p| self.pinned.contains(cyc[p])) {
                        continue;
                    }
                    options.push((i, gap));
                }
            }
            stall += 1;
            if options.is_empty() || stall <= pool.len() + 1 {
                // Retry once the rest of the pool has had a turn.
                pool.insert(0, w);
                continue;
            }
            let min_gap = options.iter().map(|o| o.1).min().unwrap();
            options.retain(|o| o.1 == min_gap);
            let &(i, gap) = options.choose(rng).unwrap();
            let mut removed = Vec::with_capacity(gap);
            let mut next = Vec::with_capacity(m - gap + 1);
            for (p, &v) in cyc.iter().enumerate() {
                let off = (p + m - i) % m;
                if off >= 1 && off <= gap {
                    removed.push(v);
                } else {
                    next.push(v);
                    if p == i {
                        next.push(w);
                    }
                }
            }
            cyc = next;
            on.insert(w);
            for v in removed {
                on.remove(v);
                pool.insert(rng.gen_range(0..=pool.len()), v);
            }
        }
        Some(cyc)
    }

    fn insertion_point(&self, cyc: &[usize], w: usize, rng: &mut impl Rng) -> Option<usize> {
        let m = cyc.len();
        let off = rng.gen_range(0..m);
        (0..m).map(|t| (t + off) % m).find(|&i| self.arc(cyc[i], w) && self.arc(w, cyc[(i + 1) % m]))
    }
}

/// Exact search for small vertex sets, local search otherwise.
pub fn hamiltonian_path<R: Rng>(
    d: &Digraph,
    verts: &[usize],
    start: Option<usize>,
    end: Option<usize>,
    rng: &mut R,
) -> Option<Vec<usize>> {
    if verts.len() <= EXACT_LIMIT {
        held_karp(d, verts, start, end)
    } else {
        heuristic_path(d, verts, start, end, rng, 8)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn all(n: usize) -> Vec<usize> {
        (0..n).collect()
    }

    #[test]
    fn complete_and_disconnected() {
        let k5 = Digraph::complete(5);
        let p = held_karp(&k5, &all(5), None, None).unwrap();
        assert!(k5.is_path(&p) && p.len() == 5);
        let two = Digraph::complete(3).disjoint_union(&Digraph::complete(3));
        assert!(held_karp(&two, &all(6), None, None).is_none());
        let mut b = 1000;
        assert_eq!(dfs_path(&two, &all(6), None, None, &mut b), Search::Absent);
    }

    #[test]
    fn five_cycle_wraps_around() {
        let c = Digraph::cycle(5);
        // First vertex 3 is the successor of last vertex 2.
        assert_eq!(held_karp(&c, &all(5), Some(3), Some(2)), Some(vec![3, 4, 0, 1, 2]));
        assert_eq!(held_karp(&c, &all(5), Some(2), Some(3)), None);
    }

    #[test]
    fn endpoints_respected_on_subsets() {
        let d = Digraph::complete(8);
        let verts = [1, 3, 5, 7];
        let p = held_karp(&d, &verts, Some(5), Some(1)).unwrap();
        assert_eq!((p[0], p[3]), (5, 1));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let q = heuristic_path(&d, &verts, Some(5), Some(1), &mut rng, 2).unwrap();
        assert_eq!((q[0], q[3], q.len()), (5, 1, 4));
    }

    #[test]
    fn heuristic_on_dense_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 120;
        let mut b = crate::digraph::DigraphBuilder::new(n);
        for u in 0..n {
            for v in 0..n {
                if u != v && rng.gen_bool(0.5) {
                    b.ensure_arc(u, v);
                }
            }
        }
        let d = b.build();
        let p = heuristic_path(&d, &all(n), None, None, &mut rng, 4).unwrap();
        assert!(d.is_path(&p) && p.len() == n);
        let q = heuristic_path(&d, &all(n), Some(0), Some(1), &mut rng, 4).unwrap();
        assert!(d.is_path(&q) && q.len() == n && q[0] == 0 && q[n - 1] == 1);
    }

    #[test]
    fn dp_agrees_with_dfs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let n = rng.gen_range(2..8);
            let mut b = crate::digraph::DigraphBuilder::new(n);
            for u in 0..n {
                for v in 0..n {
                    if u != v && rng.gen_bool(0.4) {
                        b.ensure_arc(u, v);
                    }
                }
            }
            let d = b.build();
            let s = rng.gen_bool(0.5).then(|| rng.gen_range(0..n));
            let e = rng.gen_bool(0.5).then(|| rng.gen_range(0..n));
            let hk = held_karp(&d, &all(n), s, e);
            let mut budget = u64::MAX;
            let df = dfs_path(&d, &all(n), s, e, &mut budget);
            assert_eq!(hk.is_some(), matches!(df, Search::Found(_)));
            if let Some(p) = hk {
                assert!(d.is_path(&p) && p.len() == n);
                assert!(s.is_none_or(|s| p[0] == s) && e.is_none_or(|e| p[n - 1] == e));
            }
        }
    }
}
