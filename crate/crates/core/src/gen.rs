//! Instance generators. Every output is re-measured before it is returned.

use crate::classify::ExtremalKind;
use crate::digraph::{Digraph, DigraphBuilder};
use crate::params::ParameterLadder;
use crate::error::{Error, Result};
use crate::rng::derive;
use rand::seq::SliceRandom;
use rand::Rng;

/// Density of Bernoulli arcs added on top of the permutation template.
pub const EXTRA_ARC_P: f64 = 0.05;

/// Adds `k` arc-disjoint loopless permutations to `b`, avoiding existing arcs.
fn add_permutations(b: &mut DigraphBuilder, k: usize, rng: &mut impl Rng) -> Result<()> {
    let n = b.n();
    let bad = |b: &DigraphBuilder, i: usize, j: usize| i == j || b.has_arc(i, j);
    for _ in 0..k {
        let mut placed = false;
        for _ in 0..50 {
            let mut s: Vec<usize> = (0..n).collect();
            s.shuffle(rng);
            let mut ok = true;
            for i in 0..n {
                if !bad(b, i, s[i]) {
                    continue;
                }
                let mut fixed = false;
                for _ in 0..8 * n {
                    let j = rng.gen_range(0..n);
                    if !bad(b, i, s[j]) && !bad(b, j, s[i]) {
                        s.swap(i, j);
                        fixed = true;
                        break;
                    }
                }
                if !fixed {
                    ok = false;
                    break;
                }
            }
            if ok {
                for (i, &j) in s.iter().enumerate() {
                    b.ensure_arc(i, j);
                }
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::input("could not place another arc-disjoint permutation"));
        }
    }
    Ok(())
}

/// Random digraph with minimum semi-degree at least `d`.
pub fn random_min_semidegree(n: usize, d: usize, seed: u64) -> Result<Digraph> {
    random_min_semidegree_with(n, d, EXTRA_ARC_P, seed)
}

pub fn random_min_semidegree_with(n: usize, d: usize, extra: f64, seed: u64) -> Result<Digraph> {
    if n == 0 {
        return Err(Error::input("need at least one vertex"));
    }
    if d > n - 1 {
        return Err(Error::input(format!("semi-degree {d} impossible on {n} vertices")));
    }
    if !(0.0..=1.0).contains(&extra) {
        return Err(Error::input("extra arc probability must lie in [0, 1]"));
    }
    if d == n - 1 {
        return Ok(Digraph::complete(n));
    }
    let mut rng = derive(seed, 0x6e6e);
    let mut b = DigraphBuilder::new(n);
    if 2 * d < n {
        add_permutations(&mut b, d, &mut rng)?;
    } else {
        // Sparse complement: remove n-1-d permutations from the complete digraph.
        let mut gone = DigraphBuilder::new(n);
        add_permutations(&mut gone, n - 1 - d, &mut rng)?;
        for u in 0..n {
            for v in 0..n {
                if u != v && !gone.has_arc(u, v) {
                    b.ensure_arc(u, v);
                }
            }
        }
    }
    for u in 0..n {
        for v in 0..n {
            if u != v && !b.has_arc(u, v) && rng.gen_bool(extra) {
                b.ensure_arc(u, v);
            }
        }
    }
    let g = b.build();
    let got = if n == 1 { 0 } else { g.min_semi_degree()? };
    if got < d {
        return Err(Error::stage("generate", format!("measured semi-degree {got} below {d}")));
    }
    Ok(g)
}

/// Two disjoint complete digraphs on `n/2` vertices each.
pub fn tightness_witness(n: usize) -> Result<Digraph> {
    if n % 2 == 1 || n < 4 {
        return Err(Error::input(format!("tightness witness needs even n >= 4, got {n}")));
    }
    let k = Digraph::complete(n / 2);
    Ok(Digraph::disjoint_union(&k, &k))
}

/// Ground truth of a planted instance, in the classifier's block layout.
#[derive(Clone, Debug)]
pub struct Planted {
    pub kind: ExtremalKind,
    pub parts: Vec<Vec<usize>>,
}

/// Default number of exceptional vertices for a planted instance.
pub fn default_exceptional(kind: ExtremalKind, n: usize) -> usize {
    match kind {
        ExtremalKind::FourBlock => 2,
        _ => 2 * n.div_ceil(200),
    }
}

/// Planted instance of the given kind with semi-degree at least `n/2`.
pub fn planted_extremal(kind: ExtremalKind, n: usize, ladder: &ParameterLadder, noise: f64, seed: u64) -> Result<(Digraph, Planted)> {
    planted_extremal_with(kind, n, default_exceptional(kind, n), ladder, noise, seed)
}

/// As [`planted_extremal`] with `t` exceptional vertices.
pub fn planted_extremal_with(kind: ExtremalKind, n: usize, t: usize, ladder: &ParameterLadder, noise: f64, seed: u64) -> Result<(Digraph, Planted)> {
    ladder.validate()?;
    if n % 2 == 1 || t % 2 == 1 || t + 16 > n {
        return Err(Error::input(format!("planted instances need even n >= t + 16 and even t (n={n}, t={t})")));
    }
    if !(0.0..=0.1).contains(&noise) {
        return Err(Error::input("noise must lie in [0, 0.1]"));
    }
    let mut rng = derive(seed, 0x91a7);
    // Blocks are laid out on 0..n, then relabelled at random.
    let mut sizes = Vec::new();
    let (blocks, dense, one_way, free, out_fix, in_fix): (usize, Vec<usize>, Vec<(usize, usize)>, Vec<(usize, usize)>, Vec<(usize, usize)>, Vec<(usize, usize)>);
    match kind {
        ExtremalKind::TwoCliques | ExtremalKind::Bipartite => {
            let m = (n - t) / 2;
            sizes.extend([m, m, t / 2, t / 2]);
            blocks = 4;
            if kind == ExtremalKind::TwoCliques {
                dense = vec![0, 1];
                one_way = vec![(0, 2), (2, 1), (1, 3), (3, 0), (2, 3), (3, 2)];
                free = vec![(0, 1), (1, 0)];
            } else {
                dense = vec![];
                one_way = vec![(0, 1), (1, 0), (0, 2), (2, 1), (1, 3), (3, 0), (2, 3), (3, 2)];
                free = vec![(0, 0), (1, 1)];
            }
            out_fix = free.clone();
            in_fix = free.clone();
        }
        ExtremalKind::FourBlock => {
            let rest = n - t;
            let ab = rest / 2 - 1;
            let a = ab.div_ceil(2);
            let b = ab - a;
            if b < 4 {
                return Err(Error::input("n too small for four blocks"));
            }
            sizes.extend([a, b + 2, a, b, t]);
            blocks = 5;
            dense = vec![0, 2];
            one_way = vec![(0, 1), (1, 2), (2, 3), (3, 0), (1, 3), (3, 1), (4, 0), (4, 1), (2, 4), (3, 4)];
            free = vec![(2, 0), (1, 1)];
            out_fix = vec![(0, 2), (1, 1), (3, 3), (4, 3)];
            in_fix = vec![(0, 2), (1, 1), (3, 3), (0, 4)];
        }
    }
    let mut label = Vec::with_capacity(n);
    for (i, &s) in sizes.iter().enumerate() {
        label.extend(std::iter::repeat_n(i, s));
    }
    debug_assert_eq!(label.len(), n);
    let mut b = DigraphBuilder::new(n);
    for u in 0..n {
        for v in 0..n {
            if u == v {
                continue;
            }
            let (x, y) = (label[u], label[v]);
            if (x == y && dense.contains(&x)) || one_way.contains(&(x, y)) {
                b.ensure_arc(u, v);
            }
        }
    }
    let members = |i: usize| -> Vec<usize> { (0..n).filter(|&v| label[v] == i).collect() };
    match kind {
        ExtremalKind::TwoCliques => {
            // Perfect matchings both ways between the cliques.
            let (a, c) = (members(0), members(1));
            let mut p = c.clone();
            p.shuffle(&mut rng);
            for (&u, &v) in a.iter().zip(&p) {
                b.ensure_arc(u, v);
            }
            p.shuffle(&mut rng);
            for (&u, &v) in p.iter().zip(&a) {
                b.ensure_arc(u, v);
            }
        }
        ExtremalKind::FourBlock => {
            // Two matchings back from the third block and a cycle in the second.
            let (w1, w2, w3) = (members(0), members(1), members(2));
            let k = w1.len();
            let mut p: Vec<usize> = (0..k).collect();
            p.shuffle(&mut rng);
            for s in [1, 2] {
                for i in 0..k {
                    b.ensure_arc(w3[p[i]], w1[p[(i + s) % k]]);
                }
            }
            let mut c = w2.clone();
            c.shuffle(&mut rng);
            for i in 0..c.len() {
                b.ensure_arc(c[i], c[(i + 1) % c.len()]);
            }
        }
        ExtremalKind::Bipartite => {}
    }
    if noise > 0.0 {
        for u in 0..n {
            for v in 0..n {
                if u != v && !b.has_arc(u, v) && free.contains(&(label[u], label[v])) && rng.gen_bool(noise) {
                    b.ensure_arc(u, v);
                }
            }
        }
    }
    repair(&mut b, &label, n.div_ceil(2), &out_fix, &in_fix, &mut rng)?;
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let g = b.build();
    let arcs: Vec<(usize, usize)> = g.arcs().map(|(u, v)| (perm[u], perm[v])).collect();
    let g = Digraph::from_arcs(n, &arcs)?;
    let got = g.min_semi_degree()?;
    if got < n / 2 {
        return Err(Error::stage("generate", format!("planted instance has semi-degree {got} below {}", n / 2)));
    }
    let mut parts: Vec<Vec<usize>> = vec![Vec::new(); if blocks == 4 { 3 } else { 5 }];
    for v in 0..n {
        let i = if blocks == 4 { label[v].min(2) } else { label[v] };
        parts[i].push(perm[v]);
    }
    for p in &mut parts {
        p.sort_unstable();
    }
    Ok((g, Planted { kind, parts }))
}

/// Adds arcs between the listed block pairs until every semi-degree reaches `need`.
fn repair(b: &mut DigraphBuilder, label: &[usize], need: usize, out_fix: &[(usize, usize)], in_fix: &[(usize, usize)], rng: &mut impl Rng) -> Result<()> {
    let n = label.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    for &v in &order {
        while b.out_degree(v) < need {
            let pick = order
                .iter()
                .copied()
                .filter(|&u| u != v && !b.has_arc(v, u) && out_fix.contains(&(label[v], label[u])))
                .min_by_key(|&u| (b.in_degree(u) >= need, b.in_degree(u)));
            match pick {
                Some(u) => b.ensure_arc(v, u),
                None => return Err(Error::stage("generate", format!("cannot raise out-degree of a block-{} vertex", label[v]))),
            };
        }
        while b.in_degree(v) < need {
            let pick = order
                .iter()
                .copied()
                .filter(|&u| u != v && !b.has_arc(u, v) && in_fix.contains(&(label[u], label[v])))
                .min_by_key(|&u| (b.out_degree(u) >= need, b.out_degree(u)));
            match pick {
                Some(u) => b.ensure_arc(u, v),
                None => return Err(Error::stage("generate", format!("cannot raise in-degree of a block-{} vertex", label[v]))),
            };
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floors_are_met() {
        for (n, d) in [(8, 4), (9, 5), (30, 10), (200, 110), (50, 0), (7, 6)] {
            let g = random_min_semidegree(n, d, 3).unwrap();
            assert!(g.min_semi_degree().unwrap() >= d, "n={n} d={d}");
        }
        assert_eq!(random_min_semidegree(7, 6, 1).unwrap().arc_count(), 42);
        assert!(random_min_semidegree(5, 5, 1).unwrap_err().is_input());
    }

    #[test]
    fn same_seed_same_graph() {
        let a = random_min_semidegree(60, 33, 9).unwrap();
        let b = random_min_semidegree(60, 33, 9).unwrap();
        let c = random_min_semidegree(60, 33, 10).unwrap();
        assert_eq!(a.to_v1(), b.to_v1());
        assert_ne!(a.to_v1(), c.to_v1());
    }

    #[test]
    fn witness_shape() {
        let w = tightness_witness(8).unwrap();
        assert_eq!(w.min_semi_degree().unwrap(), 3);
        assert!(tightness_witness(7).is_err());
    }

    #[test]
    fn planted_kinds_meet_the_floor() {
        let l = ParameterLadder::default();
        for kind in [ExtremalKind::TwoCliques, ExtremalKind::Bipartite, ExtremalKind::FourBlock] {
            for n in [60, 200] {
                let (g, truth) = planted_extremal(kind, n, &l, 0.0, 5).unwrap();
                assert!(g.min_semi_degree().unwrap() >= n / 2, "{kind:?} n={n}");
                assert_eq!(truth.parts.iter().map(Vec::len).sum::<usize>(), n);
            }
        }
        let (a, _) = planted_extremal(ExtremalKind::FourBlock, 100, &l, 0.01, 3).unwrap();
        let (b, _) = planted_extremal(ExtremalKind::FourBlock, 100, &l, 0.01, 3).unwrap();
        assert_eq!(a.to_v1(), b.to_v1());
    }
}
