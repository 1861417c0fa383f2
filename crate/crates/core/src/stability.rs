//! One-sided detection of the extremal structure and robust expansion checks.
//!
//! A witness is a pair of large sets `U1, U2` with few arcs from `U1` to
//! `U2`. The search alternates best responses: with `U2` fixed, the best
//! `U1` of a given size is the set of vertices sending fewest arcs into
//! `U2`, and symmetrically. Failing to find a witness proves nothing.

use crate::bitset::BitSet;
use crate::digraph::{Digraph, VertexSet};
use crate::error::{Error, Result};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EcWitness {
    pub u1: VertexSet,
    pub u2: VertexSet,
    pub eps_prime_bits: u64,
    pub arc_count: usize,
    pub overlap: usize,
}

impl EcWitness {
    pub fn eps_prime(&self) -> f64 {
        f64::from_bits(self.eps_prime_bits)
    }

    /// Re-checks both size floors and the arc bound at `eps_prime`.
    pub fn holds(&self, d: &Digraph, eps_prime: f64) -> bool {
        let n = d.n() as f64;
        let floor = (0.5 - eps_prime) * n;
        let e = d.count_between(&self.u1, &self.u2);
        e == self.arc_count
            && self.u1.count() as f64 >= floor - 1e-9
            && self.u2.count() as f64 >= floor - 1e-9
            && (e as f64) <= (eps_prime * n).powi(2) + 1e-9
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityReport {
    pub verdict: String,
    pub witness: Option<WitnessJson>,
    pub eps_prime: f64,
    pub seed: u64,
    pub restarts: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessJson {
    pub u1: Vec<usize>,
    pub u2: Vec<usize>,
    pub arc_count: usize,
    pub overlap: usize,
}

impl StabilityReport {
    pub fn new(w: Option<&EcWitness>, eps_prime: f64, seed: u64, restarts: usize) -> Self {
        StabilityReport {
            verdict: if w.is_some() { "extremal" } else { "presumed-stable" }.to_string(),
            witness: w.map(|w| WitnessJson {
                u1: w.u1.to_vec(),
                u2: w.u2.to_vec(),
                arc_count: w.arc_count,
                overlap: w.overlap,
            }),
            eps_prime,
            seed,
            restarts,
        }
    }
}

/// `k` members of `pool` with the smallest scores; ties broken by `noise`.
fn smallest(k: usize, n: usize, score: impl Fn(usize) -> usize, noise: &[u32]) -> BitSet {
    let mut v: Vec<usize> = (0..n).collect();
    v.sort_by_key(|&x| (score(x), noise[x]));
    BitSet::from_iter(n, v.into_iter().take(k))
}

fn polish(d: &Digraph, k: usize, mut u1: BitSet, mut u2: BitSet, noise: &[u32]) -> (BitSet, BitSet, usize) {
    let n = d.n();
    let mut best = d.count_between(&u1, &u2);
    for _ in 0..64 {
        let next1 = smallest(k, n, |x| d.out_degree_in(x, &u2), noise);
        let next2 = smallest(k, n, |y| d.in_degree_in(y, &next1), noise);
        let e = d.count_between(&next1, &next2);
        if e >= best {
            break;
        }
        best = e;
        u1 = next1;
        u2 = next2;
    }
    (u1, u2, best)
}

fn one_restart(d: &Digraph, k: usize, restart: usize, seed: u64) -> (usize, BitSet, BitSet) {
    let n = d.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (restart as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let noise: Vec<u32> = (0..n).map(|_| rng.gen()).collect();
    let (u1, u2) = match restart {
        0 => {
            // Degree seed: low out-degree vertices send, low in-degree vertices receive.
            let u1 = smallest(k, n, |x| d.out_degree(x), &noise);
            let u2 = smallest(k, n, |y| d.in_degree(y), &noise);
            (u1, u2)
        }
        r if r % 2 == 1 => {
            // A typical sender avoids U2, so U2 starts as its non-out-neighbours.
            let v = rng.gen_range(0..n);
            let u2 = smallest(k, n, |y| d.has_arc(v, y) as usize, &noise);
            let u1 = smallest(k, n, |x| d.out_degree_in(x, &u2), &noise);
            (u1, u2)
        }
        _ => {
            let v = rng.gen_range(0..n);
            let u1 = smallest(k, n, |x| d.has_arc(x, v) as usize, &noise);
            let u2 = smallest(k, n, |y| d.in_degree_in(y, &u1), &noise);
            (u1, u2)
        }
    };
    let (u1, u2, e) = polish(d, k, u1, u2, &noise);
    (e, u1, u2)
}

/// Randomised local search for an extremal witness at `eps_prime`.
pub fn find_ec_witness(d: &Digraph, eps_prime: f64, restarts: usize, seed: u64) -> Result<Option<EcWitness>> {
    if !(eps_prime > 0.0 && eps_prime < 0.5) {
        return Err(Error::input(format!("eps_prime must lie in (0, 1/2), got {eps_prime}")));
    }
    let n = d.n();
    if n == 0 {
        return Ok(None);
    }
    let k = ((0.5 - eps_prime) * n as f64 - 1e-9).ceil().max(1.0) as usize;
    let best = (0..restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let (e, u1, u2) = one_restart(d, k, r, seed);
            (e, r, u1, u2)
        })
        .min_by_key(|t| (t.0, t.1))
        .unwrap();
    let (e, _, u1, u2) = best;
    let w = EcWitness { overlap: u1.intersection_count(&u2), u1, u2, eps_prime_bits: eps_prime.to_bits(), arc_count: e };
    Ok(w.holds(d, eps_prime).then_some(w))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RobustParams {
    pub nu: f64,
    pub tau: f64,
}

impl RobustParams {
    pub fn new(nu: f64, tau: f64) -> Result<Self> {
        if !(nu > 0.0 && nu <= tau && tau < 1.0) {
            return Err(Error::input(format!("need 0 < nu <= tau < 1, got nu={nu}, tau={tau}")));
        }
        Ok(RobustParams { nu, tau })
    }
}

/// Vertices with at least `nu * n` in-neighbours in `s`.
pub fn robust_out_neighborhood(d: &Digraph, s: &VertexSet, nu: f64) -> VertexSet {
    let need = nu * d.n() as f64 - 1e-9;
    BitSet::from_iter(d.n(), (0..d.n()).filter(|&x| d.in_degree_in(x, s) as f64 >= need))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExpanderVerdict {
    /// No violation among the tested sets; exhaustive only for tiny hosts.
    Pass { tested: usize, exhaustive: bool },
    Counterexample(VertexSet),
}

pub const EXHAUSTIVE_LIMIT: usize = 18;
/// Hosts with at most this many in-range sets are also checked exhaustively.
pub const EXHAUSTIVE_SETS: f64 = 300_000.0;

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn check_robust_outexpander(d: &Digraph, params: RobustParams, sample_count: usize, seed: u64) -> ExpanderVerdict {
    let n = d.n();
    let nf = n as f64;
    let lo = params.tau * nf;
    let hi = (1.0 - params.tau) * nf;
    let in_range = |k: usize| (k as f64) > lo + 1e-9 && (k as f64) < hi - 1e-9;
    let violates = |s: &BitSet| {
        let r = robust_out_neighborhood(d, s, params.nu).count() as f64;
        r + 1e-9 < s.count() as f64 + params.nu * nf
    };
    let mut tested = 0;
    let sizes: Vec<usize> = (0..=n).filter(|&k| in_range(k)).collect();
    let total: f64 = sizes.iter().map(|&k| binomial(n, k)).sum();
    if n <= EXHAUSTIVE_LIMIT || (n < 64 && total <= EXHAUSTIVE_SETS) {
        for &k in &sizes {
            if k == 0 {
                continue;
            }
            // Gosper's hack over k-subsets of 0..n.
            let mut mask: u64 = (1u64 << k) - 1;
            while mask < (1u64 << n) {
                let s = BitSet::from_iter(n, (0..n).filter(|&i| mask >> i & 1 == 1));
                tested += 1;
                if violates(&s) {
                    return ExpanderVerdict::Counterexample(s);
                }
                let c = mask & mask.wrapping_neg();
                let r = mask + c;
                mask = (((r ^ mask) >> 2) / c) | r;
            }
        }
        return ExpanderVerdict::Pass { tested, exhaustive: true };
    }
    let mut family: Vec<BitSet> = Vec::new();
    for v in 0..n {
        family.push(d.out_set(v).clone());
    }
    let mut by_in: Vec<usize> = (0..n).collect();
    by_in.sort_by_key(|&x| (d.in_degree(x), x));
    let mut by_out: Vec<usize> = (0..n).collect();
    by_out.sort_by_key(|&x| (d.out_degree(x), x));
    for k in (0..=n).filter(|&k| in_range(k)) {
        for order in [&by_in, &by_out] {
            family.push(BitSet::from_iter(n, order[..k].iter().copied()));
            family.push(BitSet::from_iter(n, order[n - k..].iter().copied()));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if !sizes.is_empty() {
        let mut all: Vec<usize> = (0..n).collect();
        for _ in 0..sample_count {
            let k = *sizes.choose(&mut rng).unwrap();
            all.shuffle(&mut rng);
            family.push(BitSet::from_iter(n, all[..k].iter().copied()));
        }
    }
    for s in family.into_iter().filter(|s| in_range(s.count())) {
        tested += 1;
        if violates(&s) {
            return ExpanderVerdict::Counterexample(s);
        }
    }
    ExpanderVerdict::Pass { tested, exhaustive: false }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_cliques_have_witness() {
        let d = Digraph::complete(200).disjoint_union(&Digraph::complete(200));
        let w = find_ec_witness(&d, 0.05, 4, 1).unwrap().expect("witness");
        assert_eq!(w.arc_count, 0);
        assert!(w.holds(&d, 0.05));
        assert!(w.holds(&d, 0.2));
    }

    #[test]
    fn complete_has_none() {
        let d = Digraph::complete(400);
        assert!(find_ec_witness(&d, 0.05, 4, 1).unwrap().is_none());
        assert!(find_ec_witness(&d, 0.5, 4, 1).is_err());
    }

    #[test]
    fn robust_neighbourhoods() {
        let k10 = Digraph::complete(10);
        let s = k10.set_of(0..5);
        assert_eq!(robust_out_neighborhood(&k10, &s, 0.3).count(), 10);
        assert!(robust_out_neighborhood(&k10, &k10.set_of([]), 0.3).is_empty());
        let c = Digraph::cycle(7);
        assert_eq!(robust_out_neighborhood(&c, &c.set_of([3]), 1.0 / 7.0).to_vec(), vec![4]);
    }

    #[test]
    fn expander_examples() {
        let p = RobustParams::new(0.1, 0.1).unwrap();
        assert!(matches!(check_robust_outexpander(&Digraph::complete(20), p, 50, 1), ExpanderVerdict::Pass { .. }));
        let two = Digraph::complete(10).disjoint_union(&Digraph::complete(10));
        assert!(matches!(check_robust_outexpander(&two, p, 50, 1), ExpanderVerdict::Counterexample(_)));
        let tight = RobustParams::new(0.1, 0.45).unwrap();
        // Only |S| = 10 is in range: one component is a counterexample, found exhaustively.
        assert!(matches!(check_robust_outexpander(&two, tight, 0, 1), ExpanderVerdict::Counterexample(_)));
        let v = check_robust_outexpander(&Digraph::complete(20), tight, 0, 1);
        assert_eq!(v, ExpanderVerdict::Pass { tested: 184_756, exhaustive: true });
        assert!(RobustParams::new(0.3, 0.2).is_err());
    }
}
