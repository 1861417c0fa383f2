//! Refinement of an extremal witness into one of three block structures.

use crate::bitset::BitSet;
use crate::digraph::Digraph;
use crate::error::{Error, Result};
use crate::params::ParameterLadder;
use crate::stability::EcWitness;
use serde::Serialize;

/// Multiplicative slack on every size window and degree floor.
pub const WINDOW_SLACK: f64 = 1.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ExtremalKind {
    #[serde(rename = "EC1")]
    TwoCliques,
    #[serde(rename = "EC2")]
    Bipartite,
    #[serde(rename = "EC3")]
    FourBlock,
}

impl ExtremalKind {
    pub fn tag(self) -> &'static str {
        match self {
            ExtremalKind::TwoCliques => "EC1",
            ExtremalKind::Bipartite => "EC2",
            ExtremalKind::FourBlock => "EC3",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ec1" => Some(ExtremalKind::TwoCliques),
            "ec2" => Some(ExtremalKind::Bipartite),
            "ec3" => Some(ExtremalKind::FourBlock),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PartitionStats {
    pub overlap: usize,
    pub moves: usize,
    pub eps: f64,
    pub eps1: f64,
    pub eps_prime: f64,
    pub slack: f64,
}

/// `parts` holds three blocks (two main sides plus leftovers) or five
/// (four blocks plus leftovers). `exceptional[i]` are the vertices removed
/// from main block `i` for low degree.
#[derive(Clone, Debug, Serialize)]
pub struct ExtremalPartition {
    pub kind: ExtremalKind,
    pub parts: Vec<Vec<usize>>,
    pub exceptional: Vec<Vec<usize>>,
    pub stats: PartitionStats,
}

impl ExtremalPartition {
    pub fn sets(&self, n: usize) -> Vec<BitSet> {
        self.parts.iter().map(|p| BitSet::from_iter(n, p.iter().copied())).collect()
    }

    /// Part index of every vertex.
    pub fn labels(&self, n: usize) -> Vec<usize> {
        let mut l = vec![usize::MAX; n];
        for (i, p) in self.parts.iter().enumerate() {
            for &v in p {
                l[v] = i;
            }
        }
        l
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }

    /// Every violated invariant clause of the partition's kind.
    pub fn violations(&self, d: &Digraph, ladder: &ParameterLadder) -> Vec<String> {
        check(d, self.kind, &self.sets(d.n()), ladder)
    }
}

fn min_in(d: &Digraph, v: usize, s: &BitSet) -> usize {
    d.semi_degree_in(v, s)
}

fn low(d: &Digraph, w: &BitSet, thr: f64) -> BitSet {
    BitSet::from_iter(w.universe(), w.iter().filter(|&v| (min_in(d, v, w) as f64) <= thr * w.count() as f64))
}

fn low_bi(d: &Digraph, w: &BitSet, other: &BitSet, thr: f64) -> BitSet {
    BitSet::from_iter(w.universe(), w.iter().filter(|&v| (d.bi_degree_in(v, other) as f64) <= thr * other.count() as f64))
}

fn move_to(v: usize, sets: &mut [&mut BitSet], to: usize) {
    for (i, s) in sets.iter_mut().enumerate() {
        if i == to {
            s.insert(v);
        } else {
            s.remove(v);
        }
    }
}

/// Repeats `step` (one vertex move) until it declines; more than `n` moves
/// in total is an error.
fn settle(n: usize, moves: &mut usize, mut step: impl FnMut() -> Option<()>) -> Result<()> {
    while step().is_some() {
        *moves += 1;
        if *moves > n {
            return Err(Error::stage("classify", "migration did not settle within n moves"));
        }
    }
    Ok(())
}

/// Refines `w` into a block structure and machine-checks it.
pub fn classify_extremal(d: &Digraph, w: &EcWitness, ladder: &ParameterLadder) -> Result<ExtremalPartition> {
    ladder.validate()?;
    let n = d.n();
    if w.u1.universe() != n || w.u2.universe() != n {
        return Err(Error::input("witness does not match the digraph"));
    }
    let nf = n as f64;
    let thr = ladder.exceptional_fraction();
    let u0 = w.u1.intersection(&w.u2);
    let mut moves = 0;
    let all = BitSet::full(n);
    let (kind, parts, exceptional) = if u0.count() as f64 <= ladder.eps1 * nf {
        let mut w1 = w.u1.difference(&u0);
        let mut w2 = w.u2.difference(&u0);
        let mut r = all.difference(&w1.union(&w2));
        settle(n, &mut moves, || {
            let e1 = low(d, &w1, thr);
            let e2 = low(d, &w2, thr);
            let to2 = e1.union(&r).iter().find(|&x| min_in(d, x, &w2) as f64 > thr * w2.count() as f64);
            if let Some(x) = to2 {
                move_to(x, &mut [&mut w1, &mut w2, &mut r], 1);
                return Some(());
            }
            let to1 = e2.union(&r).iter().find(|&y| min_in(d, y, &w1) as f64 > thr * w1.count() as f64);
            let y = to1?;
            move_to(y, &mut [&mut w1, &mut w2, &mut r], 0);
            Some(())
        })?;
        let e1 = low(d, &w1, thr);
        let e2 = low(d, &w2, thr);
        w1.difference_with(&e1);
        w2.difference_with(&e2);
        let w3 = all.difference(&w1.union(&w2));
        (ExtremalKind::TwoCliques, vec![w1, w2, w3], vec![e1, e2])
    } else if u0.count() as f64 >= (0.5 - ladder.eps1) * nf {
        let mut w1 = u0.clone();
        let mut w2 = all.difference(&u0);
        settle(n, &mut moves, || {
            let e1 = low_bi(d, &w1, &w2, thr);
            let e2 = low_bi(d, &w2, &w1, thr);
            // A vertex looking like the other side moves there.
            if let Some(x) = e1.iter().find(|&x| d.bi_degree_in(x, &w1) as f64 > thr * w1.count() as f64) {
                move_to(x, &mut [&mut w1, &mut w2], 1);
                return Some(());
            }
            let y = e2.iter().find(|&y| d.bi_degree_in(y, &w2) as f64 > thr * w2.count() as f64)?;
            move_to(y, &mut [&mut w1, &mut w2], 0);
            Some(())
        })?;
        let e1 = low_bi(d, &w1, &w2, thr);
        let e2 = low_bi(d, &w2, &w1, thr);
        w1.difference_with(&e1);
        w2.difference_with(&e2);
        let w3 = all.difference(&w1.union(&w2));
        (ExtremalKind::Bipartite, vec![w1, w2, w3], vec![e1, e2])
    } else {
        let mut w1 = w.u1.difference(&u0);
        let mut w3 = w.u2.difference(&u0);
        let mut w4 = u0.clone();
        let mut w2 = all.difference(&w.u1.union(&w.u2));
        let mut rest = BitSet::new(n);
        settle(n, &mut moves, || {
            let e1 = low(d, &w1, thr);
            let e3 = low(d, &w3, thr);
            let pool = w2.union(&w4).union(&rest);
            let to3 = e1.union(&pool).iter().find(|&x| min_in(d, x, &w3) as f64 > thr * w3.count() as f64);
            if let Some(x) = to3 {
                move_to(x, &mut [&mut w1, &mut w2, &mut w3, &mut w4, &mut rest], 2);
                return Some(());
            }
            let y = e3.union(&pool).iter().find(|&y| min_in(d, y, &w1) as f64 > thr * w1.count() as f64)?;
            move_to(y, &mut [&mut w1, &mut w2, &mut w3, &mut w4, &mut rest], 0);
            Some(())
        })?;
        let e1 = low(d, &w1, thr);
        let e3 = low(d, &w3, thr);
        w1.difference_with(&e1);
        w3.difference_with(&e3);
        rest = all.difference(&w1.union(&w2).union(&w3).union(&w4));
        settle(n, &mut moves, || {
            let e2 = low_bi(d, &w2, &w4, thr);
            let e4 = low_bi(d, &w4, &w2, thr);
            let pool = e2.union(&e4).union(&rest);
            let to2 = pool.iter().find(|&x| !w2.contains(x) && d.bi_degree_in(x, &w4) as f64 > thr * w4.count() as f64);
            if let Some(x) = to2 {
                move_to(x, &mut [&mut w1, &mut w2, &mut w3, &mut w4, &mut rest], 1);
                return Some(());
            }
            let y = pool.iter().find(|&y| !w4.contains(y) && d.bi_degree_in(y, &w2) as f64 > thr * w2.count() as f64)?;
            move_to(y, &mut [&mut w1, &mut w2, &mut w3, &mut w4, &mut rest], 3);
            Some(())
        })?;
        let e2 = low_bi(d, &w2, &w4, thr);
        let e4 = low_bi(d, &w4, &w2, thr);
        w2.difference_with(&e2);
        w4.difference_with(&e4);
        let w5 = all.difference(&w1.union(&w2).union(&w3).union(&w4));
        (ExtremalKind::FourBlock, vec![w1, w2, w3, w4, w5], vec![e1, e2, e3, e4])
    };
    let bad = check(d, kind, &parts, ladder);
    if !bad.is_empty() {
        return Err(Error::stage("classify", format!("{} invariant failed: {}", kind.tag(), bad.join("; "))));
    }
    Ok(ExtremalPartition {
        kind,
        parts: parts.iter().map(BitSet::to_vec).collect(),
        exceptional: exceptional.iter().map(BitSet::to_vec).collect(),
        stats: PartitionStats {
            overlap: u0.count(),
            moves,
            eps: ladder.eps,
            eps1: ladder.eps1,
            eps_prime: ladder.eps_prime,
            slack: WINDOW_SLACK,
        },
    })
}

/// Violated clauses of `kind` for the given parts, at the ladder's values.
pub fn check(d: &Digraph, kind: ExtremalKind, parts: &[BitSet], ladder: &ParameterLadder) -> Vec<String> {
    let n = d.n() as f64;
    let eps = ladder.eps;
    let k = WINDOW_SLACK;
    let root = (10.0 * eps).sqrt();
    let cube = eps.cbrt();
    let mut bad = Vec::new();
    let size = |p: &BitSet| p.count() as f64;
    match kind {
        ExtremalKind::TwoCliques | ExtremalKind::Bipartite => {
            if parts.len() != 3 {
                return vec![format!("expected 3 parts, got {}", parts.len())];
            }
            for i in 0..2 {
                let w = size(&parts[i]);
                if w == 0.0 || (w - (0.5 - eps) * n).abs() > k * root * w {
                    bad.push(format!("|W{}| = {w} outside (1/2 - eps)n +- sqrt(10 eps)|W{}|", i + 1, i + 1));
                }
            }
            let cap = 2.0 * root * size(&parts[0]).max(size(&parts[1]));
            if size(&parts[2]) > k * cap {
                bad.push(format!("|W3| = {} above {cap:.1}", size(&parts[2])));
            }
            for i in 0..2 {
                let (own, other) = (&parts[i], &parts[1 - i]);
                let mut weak = 0;
                for v in own.iter() {
                    let (deg, base, floor_div) = if kind == ExtremalKind::TwoCliques {
                        (d.semi_degree_in(v, own) as f64, size(own), 2.0)
                    } else {
                        (d.semi_degree_in(v, other) as f64, size(other), 8.0)
                    };
                    if deg < (1.0 - 10.0 * eps.sqrt()) * base {
                        weak += 1;
                    }
                    if deg * k < cube * base / floor_div {
                        bad.push(format!("W{} vertex {v} has semi-degree {deg} below the exceptional floor", i + 1));
                    }
                }
                let allowed = if kind == ExtremalKind::TwoCliques { 10.0 * eps.sqrt() } else { 10.0 * root } * size(own);
                if weak as f64 > k * allowed {
                    bad.push(format!("W{} has {weak} weak vertices, allowed {allowed:.1}", i + 1));
                }
            }
            let cap_deg = if kind == ExtremalKind::TwoCliques { cube * n / 2.0 } else { 2.0 * cube * n };
            let dir = (1.0 - 2.0 * cube) * n / 2.0;
            for w in parts[2].iter() {
                let (w1, w2) = (&parts[0], &parts[1]);
                let a = d.out_degree_in(w, w1) as f64 > dir && d.in_degree_in(w, w2) as f64 > dir;
                let b = d.in_degree_in(w, w1) as f64 > dir && d.out_degree_in(w, w2) as f64 > dir;
                if !a && !b {
                    bad.push(format!("W3 vertex {w} has neither degree pattern"));
                }
                for (i, p) in [w1, w2].into_iter().enumerate() {
                    if d.semi_degree_in(w, p) as f64 > k * cap_deg {
                        bad.push(format!("W3 vertex {w} has semi-degree {} into W{}", d.semi_degree_in(w, p), i + 1));
                    }
                }
            }
        }
        ExtremalKind::FourBlock => {
            if parts.len() != 5 {
                return vec![format!("expected 5 parts, got {}", parts.len())];
            }
            let s: Vec<f64> = parts.iter().map(size).collect();
            if s[4] > k * 4.0 * root * n {
                bad.push(format!("|W5| = {} too large", s[4]));
            }
            for (i, lo_hi) in [(0, 0.75), (1, 0.25), (2, 0.75), (3, 0.25)] {
                let lo = cube * n - root * n;
                let hi = (0.5 - lo_hi * ladder.eps1) * n + root * n;
                if s[i] == 0.0 || s[i] * k < lo || s[i] > k * hi {
                    bad.push(format!("|W{}| = {} outside its window", i + 1, s[i]));
                }
            }
            for (i, j) in [(0, 2), (1, 3)] {
                if (s[i] - s[j]).abs() > k * 2.0 * ladder.eps_prime * n {
                    bad.push(format!("|W{}| - |W{}| = {} beyond 2 eps' n", i + 1, j + 1, s[i] - s[j]));
                }
            }
            for i in [0, 2] {
                for v in parts[i].iter() {
                    let deg = d.semi_degree_in(v, &parts[i]) as f64;
                    if deg * k < cube * s[i] / 2.0 {
                        bad.push(format!("W{} vertex {v} below the exceptional floor", i + 1));
                    }
                }
            }
            for (i, j) in [(1, 3), (3, 1)] {
                for v in parts[i].iter() {
                    let deg = d.semi_degree_in(v, &parts[j]) as f64;
                    if deg * k < cube * s[j] / 8.0 {
                        bad.push(format!("W{} vertex {v} below the exceptional floor into W{}", i + 1, j + 1));
                    }
                }
            }
            for w in parts[4].iter() {
                let fits = [(0, 2), (2, 0), (1, 3), (3, 1)].iter().any(|&(a, b)| {
                    let t = (1.0 - cube) * s[a] / k;
                    (d.out_degree_in(w, &parts[a]) as f64 >= t && d.in_degree_in(w, &parts[b]) as f64 >= t)
                        || (d.in_degree_in(w, &parts[a]) as f64 >= t && d.out_degree_in(w, &parts[b]) as f64 >= t)
                });
                if !fits {
                    bad.push(format!("W5 vertex {w} has no degree pattern"));
                }
                for (j, cap) in [(0, cube * n / 2.0), (2, cube * n / 2.0), (1, 2.0 * cube * n), (3, 2.0 * cube * n)] {
                    if d.semi_degree_in(w, &parts[j]) as f64 > k * cap {
                        bad.push(format!("W5 vertex {w} too attached to W{}", j + 1));
                    }
                }
            }
            for i in 0..4 {
                let j = (i + 1) % 4;
                let e = d.count_between(&parts[i], &parts[j]) as f64;
                let need = s[i] * s[j] - k * ladder.eps_prime * n * n / 2.0;
                if e < need {
                    bad.push(format!("e(W{}, W{}) = {e} below {need:.0}", i + 1, j + 1));
                }
            }
        }
    }
    bad
}

/// Fraction of vertices placed in the same main block as `truth`, maximised
/// over the label symmetries of the kind. Leftover blocks are ignored.
pub fn agreement(kind: ExtremalKind, got: &[Vec<usize>], truth: &[Vec<usize>], n: usize) -> f64 {
    let label = |parts: &[Vec<usize>]| {
        let mut l = vec![usize::MAX; n];
        for (i, p) in parts.iter().enumerate() {
            for &v in p {
                l[v] = i;
            }
        }
        l
    };
    let g = label(got);
    let t = label(truth);
    let perms: Vec<Vec<usize>> = match kind {
        ExtremalKind::FourBlock => vec![vec![0, 1, 2, 3], vec![2, 3, 0, 1]],
        _ => vec![vec![0, 1], vec![1, 0]],
    };
    let main = perms[0].len();
    let scored: Vec<usize> = (0..n).filter(|&v| t[v] < main).collect();
    if scored.is_empty() {
        return 1.0;
    }
    perms
        .iter()
        .map(|p| scored.iter().filter(|&&v| g[v] < main && p[g[v]] == t[v]).count() as f64 / scored.len() as f64)
        .fold(0.0, f64::max)
}
