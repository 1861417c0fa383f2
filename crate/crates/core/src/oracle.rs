//! Brute-force searches for tiny hosts: spanning subdivisions, perfect
//! tilings, absorber enumeration and Hamiltonian paths.
//!
//! Every search takes a node budget. Running out is reported as
//! [`Search::Exhausted`], which is never conflated with [`Search::Absent`].

use crate::bitset::BitSet;
use crate::digraph::Digraph;
use crate::error::{Error, Result};
use crate::hampath::{self, Search};
use crate::pattern::{Pattern, SubdivisionCert, TilingCert};

pub const DEFAULT_CAP: usize = 10;
pub const DEFAULT_BUDGET: u64 = 50_000_000;

#[derive(Clone, Copy, Debug)]
pub struct OracleConfig {
    /// Largest host accepted without an explicit budget.
    pub cap: usize,
    /// `None` means [`DEFAULT_BUDGET`] and enforces `cap`.
    pub budget: Option<u64>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { cap: DEFAULT_CAP, budget: None }
    }
}

impl OracleConfig {
    fn admit(&self, n: usize) -> Result<u64> {
        match self.budget {
            Some(b) => Ok(b),
            None if n <= self.cap => Ok(DEFAULT_BUDGET),
            None => Err(Error::input(format!("host has {n} vertices, oracle cap is {} without a budget", self.cap))),
        }
    }
}

/// Pattern automorphisms that also preserve the per-arc length demands.
fn automorphisms(p: &Pattern, lengths: Option<&[usize]>) -> Vec<Vec<usize>> {
    let s = p.s();
    let g = p.graph();
    let mut found = Vec::new();
    let mut perm: Vec<usize> = (0..s).collect();
    permute(&mut perm, 0, &mut |pi: &[usize]| {
        if pi.iter().enumerate().all(|(i, &x)| i == x) {
            return;
        }
        let ok = p.arcs().iter().enumerate().all(|(i, &(a, b))| {
            g.has_arc(pi[a], pi[b])
                && lengths.is_none_or(|l| l[i] == l[p.arc_index((pi[a], pi[b])).unwrap()])
        });
        if ok {
            found.push(pi.to_vec());
        }
    });
    found
}

fn permute(v: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, f);
        v.swap(k, i);
    }
}

struct Ctx<'a> {
    d: &'a Digraph,
    p: &'a Pattern,
    budget: u64,
    exhausted: bool,
}

impl Ctx<'_> {
    fn tick(&mut self) -> bool {
        if self.budget == 0 {
            self.exhausted = true;
            return false;
        }
        self.budget -= 1;
        true
    }

    /// Host vertices ordered by descending semi-degree.
    fn branch_order(&self) -> Vec<usize> {
        let mut v: Vec<usize> = (0..self.d.n()).collect();
        v.sort_by_key(|&x| std::cmp::Reverse(self.d.out_degree(x).min(self.d.in_degree(x))));
        v
    }

    /// Routes arcs `idx..` of the pattern given branch map `f`.
    /// `interior_left` is the exact number of interior vertices still to place.
    fn route(
        &mut self,
        f: &[usize],
        idx: usize,
        used: &mut BitSet,
        interior_left: usize,
        lengths: Option<&[usize]>,
        routes: &mut Vec<Vec<usize>>,
    ) -> bool {
        if idx == self.p.h() {
            return interior_left == 0;
        }
        let (a, b) = self.p.arcs()[idx];
        let last = idx + 1 == self.p.h();
        let want = match lengths {
            Some(l) => Some(l[idx] - 1),
            None if last => Some(interior_left),
            None => None,
        };
        if want.is_some_and(|w| w > interior_left) {
            return false;
        }
        let mut path = vec![f[a]];
        let target = f[b];
        self.walk(f, idx, &mut path, target, want, used, interior_left, lengths, routes)
    }

    #[allow(clippy::too_many_arguments)]
    fn walk(
        &mut self,
        f: &[usize],
        idx: usize,
        path: &mut Vec<usize>,
        target: usize,
        want: Option<usize>,
        used: &mut BitSet,
        interior_left: usize,
        lengths: Option<&[usize]>,
        routes: &mut Vec<Vec<usize>>,
    ) -> bool {
        if !self.tick() {
            return false;
        }
        let cur = *path.last().unwrap();
        let inner = path.len() - 1;
        if self.d.has_arc(cur, target) && want.is_none_or(|w| w == inner) {
            path.push(target);
            routes.push(path.clone());
            if self.route(f, idx + 1, used, interior_left - inner, lengths, routes) {
                return true;
            }
            routes.pop();
            path.pop();
            if self.exhausted {
                return false;
            }
        }
        if want.is_some_and(|w| inner >= w) || inner >= interior_left {
            return false;
        }
        let free = used.complement();
        let mut cands: Vec<(usize, usize)> = self
            .d
            .out_set(cur)
            .intersection(&free)
            .iter()
            .map(|v| (self.d.out_set(v).intersection_count(&free), v))
            .collect();
        cands.sort_unstable();
        for (_, v) in cands {
            used.insert(v);
            path.push(v);
            let ok = self.walk(f, idx, path, target, want, used, interior_left, lengths, routes);
            path.pop();
            used.remove(v);
            if ok {
                return true;
            }
            if self.exhausted {
                return false;
            }
        }
        false
    }
}

fn lex_le(a: &[usize], b: &[usize]) -> bool {
    a <= b
}

/// Exhaustive search for a spanning subdivision of `p` in `d`.
///
/// `lengths`, when given, is aligned with the pattern's arc order and must
/// sum to `n - s + h`.
pub fn find_spanning_subdivision_exact(
    d: &Digraph,
    p: &Pattern,
    lengths: Option<&[usize]>,
    cfg: OracleConfig,
) -> Result<Search<SubdivisionCert>> {
    let n = d.n();
    let budget = cfg.admit(n)?;
    if let Some(l) = lengths {
        if l.len() != p.h() || l.contains(&0) {
            return Err(Error::input("lengths must be positive, one per pattern arc"));
        }
        let sum: usize = l.iter().sum();
        if sum + p.s() != n + p.h() {
            return Err(Error::input(format!(
                "lengths sum to {sum}, a spanning subdivision needs n - s + h = {}",
                (n + p.h()).saturating_sub(p.s())
            )));
        }
    }
    if p.s() > n {
        return Ok(Search::Absent);
    }
    let autos = automorphisms(p, lengths);
    let mut ctx = Ctx { d, p, budget, exhausted: false };
    let order = ctx.branch_order();
    let mut f = Vec::with_capacity(p.s());
    let mut used = BitSet::new(n);
    let mut found = None;
    assign(&mut ctx, &order, &autos, &mut f, &mut used, &mut |ctx, f, used| {
        let mut routes = Vec::new();
        if ctx.route(f, 0, used, n - p.s(), lengths, &mut routes) {
            found = Some(SubdivisionCert { branch: f.to_vec(), routes });
            true
        } else {
            false
        }
    });
    Ok(match found {
        Some(c) => Search::Found(c),
        None if ctx.exhausted => Search::Exhausted,
        None => Search::Absent,
    })
}

/// Enumerates injective branch maps, skipping those that an automorphism
/// maps to a lexicographically smaller one.
fn assign(
    ctx: &mut Ctx<'_>,
    order: &[usize],
    autos: &[Vec<usize>],
    f: &mut Vec<usize>,
    used: &mut BitSet,
    leaf: &mut impl FnMut(&mut Ctx<'_>, &[usize], &mut BitSet) -> bool,
) -> bool {
    if ctx.exhausted {
        return false;
    }
    if f.len() == ctx.p.s() {
        let canonical = autos.iter().all(|pi| {
            let g: Vec<usize> = pi.iter().map(|&x| f[x]).collect();
            lex_le(f, &g)
        });
        return canonical && leaf(ctx, f, used);
    }
    for &v in order {
        if used.contains(v) {
            continue;
        }
        if !ctx.tick() {
            return false;
        }
        used.insert(v);
        f.push(v);
        let ok = assign(ctx, order, autos, f, used, leaf);
        f.pop();
        used.remove(v);
        if ok {
            return true;
        }
    }
    false
}

/// Exhaustive search for a perfect tiling with the given part orders.
pub fn find_perfect_tiling_exact(
    d: &Digraph,
    p: &Pattern,
    orders: &[usize],
    cfg: OracleConfig,
) -> Result<Search<TilingCert>> {
    let n = d.n();
    let budget = cfg.admit(n)?;
    if orders.iter().sum::<usize>() != n {
        return Err(Error::input(format!("part orders sum to {}, host has {n} vertices", orders.iter().sum::<usize>())));
    }
    if orders.iter().any(|&o| o < p.s()) {
        return Ok(Search::Absent);
    }
    let autos = automorphisms(p, None);
    let mut ctx = Ctx { d, p, budget, exhausted: false };
    let order = ctx.branch_order();
    let mut used = BitSet::new(n);
    let mut parts = Vec::new();
    let ok = tile(&mut ctx, &order, &autos, orders, &mut used, &mut parts);
    Ok(if ok {
        Search::Found(TilingCert { parts, orders: orders.to_vec() })
    } else if ctx.exhausted {
        Search::Exhausted
    } else {
        Search::Absent
    })
}

fn tile(
    ctx: &mut Ctx<'_>,
    order: &[usize],
    autos: &[Vec<usize>],
    orders: &[usize],
    used: &mut BitSet,
    parts: &mut Vec<SubdivisionCert>,
) -> bool {
    let i = parts.len();
    if i == orders.len() {
        return true;
    }
    // Parts of equal order are interchangeable: their first branch vertices increase.
    let floor = (i > 0 && orders[i - 1] == orders[i]).then(|| parts[i - 1].branch[0]);
    let mut f = Vec::new();
    let s = ctx.p.s();
    let mut result = None;
    assign(ctx, order, autos, &mut f, used, &mut |ctx, f, used| {
        if floor.is_some_and(|fl| f[0] <= fl) {
            return false;
        }
        let mut routes = Vec::new();
        if !ctx.route(f, 0, used, orders[i] - s, None, &mut routes) {
            return false;
        }
        let cert = SubdivisionCert { branch: f.to_vec(), routes };
        let mut mine = BitSet::new(ctx.d.n());
        for r in &cert.routes {
            for &v in &r[1..r.len() - 1] {
                mine.insert(v);
            }
        }
        used.union_with(&mine);
        parts.push(cert);
        if tile(ctx, order, autos, orders, used, parts) {
            result = Some(());
            return true;
        }
        parts.pop();
        used.difference_with(&mine);
        false
    });
    result.is_some()
}

/// All absorbers of `(u, v)`: 4-paths `z1 z2 z3 z4` avoiding `u, v` with
/// `z2 -> u` and `v -> z3`.
pub fn enumerate_absorbers(d: &Digraph, u: usize, v: usize) -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    let mut avoid = BitSet::new(d.n());
    avoid.insert(u);
    avoid.insert(v);
    for z2 in d.in_set(u).iter().filter(|&x| !avoid.contains(x)) {
        for z3 in d.out_set(z2).intersection(d.out_set(v)).iter().filter(|&x| !avoid.contains(x)) {
            for z1 in d.in_set(z2).iter() {
                if avoid.contains(z1) || z1 == z3 {
                    continue;
                }
                for z4 in d.out_set(z3).iter() {
                    if avoid.contains(z4) || z4 == z2 || z4 == z1 {
                        continue;
                    }
                    out.push([z1, z2, z3, z4]);
                }
            }
        }
    }
    out
}

/// `|enumerate_absorbers(d, u, v)|` by inclusion-exclusion over the middle arc.
pub fn count_absorbers(d: &Digraph, u: usize, v: usize) -> u64 {
    let n = d.n();
    let mut total = 0u64;
    for z2 in d.in_set(u).iter().filter(|&x| x != u && x != v) {
        for z3 in d.out_set(z2).intersection(d.out_set(v)).iter().filter(|&x| x != u && x != v) {
            let mut skip = BitSet::new(n);
            for x in [u, v, z2, z3] {
                skip.insert(x);
            }
            let a = d.in_set(z2).difference(&skip);
            let b = d.out_set(z3).difference(&skip);
            total += (a.count() * b.count() - a.intersection_count(&b)) as u64;
        }
    }
    total
}

/// Hamiltonian path of the whole host, optionally with fixed first and last vertex.
pub fn hamiltonian_path_exact(d: &Digraph, endpoints: Option<(usize, usize)>, budget: u64) -> Search<Vec<usize>> {
    let all: Vec<usize> = (0..d.n()).collect();
    let (s, e) = match endpoints {
        Some((a, b)) => (Some(a), Some(b)),
        None => (None, None),
    };
    hampath::hamiltonian_path_exact(d, &all, s, e, budget)
}
