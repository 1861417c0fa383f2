//! Absorbers, random absorber families, partitioning and linking.
//!
//! An absorber is a 4-path `z1 z2 z3 z4`. It absorbs a pair `(u, v)` when
//! `z2 -> u` and `v -> z3` are arcs and neither `u` nor `v` lies on it; any
//! `u..v` path can then be spliced in between `z2` and `z3`.

use crate::bitset::BitSet;
use crate::digraph::Digraph;
use crate::error::{Error, Result};
use crate::params::ParameterLadder;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

pub type Absorber = [usize; 4];

pub fn is_four_path(d: &Digraph, a: &Absorber) -> bool {
    d.is_path(a)
}

pub fn absorbs(d: &Digraph, a: &Absorber, u: usize, v: usize) -> bool {
    !a.contains(&u) && !a.contains(&v) && d.has_arc(a[1], u) && d.has_arc(v, a[2])
}

/// Splices `q` (a `u..v` path) into `l` between the absorber's middle vertices.
pub fn absorb_path(l: &[usize], a: &Absorber, q: &[usize]) -> Result<Vec<usize>> {
    if q.is_empty() {
        return Err(Error::input("cannot absorb an empty path"));
    }
    let i = l
        .iter()
        .position(|&x| x == a[0])
        .filter(|&i| i + 3 < l.len() && l[i..i + 4] == a[..])
        .ok_or_else(|| Error::input(format!("absorber {a:?} is not a contiguous segment of the path")))?;
    let on_l: std::collections::HashSet<usize> = l.iter().copied().collect();
    if let Some(&x) = q.iter().find(|x| on_l.contains(x)) {
        return Err(Error::input(format!("vertex {x} lies on both the path and the absorbed segment")));
    }
    let mut out = Vec::with_capacity(l.len() + q.len());
    out.extend_from_slice(&l[..i + 2]);
    out.extend_from_slice(q);
    out.extend_from_slice(&l[i + 2..]);
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct FamilyOptions {
    /// Independent sampling rounds merged into one family. One round is the
    /// plain randomized construction; more rounds grow small families.
    pub rounds: usize,
    /// Stop adding rounds once this many absorbers are collected.
    pub target: usize,
    pub retries: usize,
    pub coverage_samples: usize,
    /// Fail (instead of returning the best family) when coverage is incomplete.
    pub require_coverage: bool,
}

impl Default for FamilyOptions {
    fn default() -> Self {
        FamilyOptions { rounds: 1, target: usize::MAX, retries: 5, coverage_samples: 200, require_coverage: true }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Coverage {
    pub sampled: usize,
    pub covered: usize,
    pub uncovered: Option<(usize, usize)>,
}

impl Coverage {
    pub fn complete(&self) -> bool {
        self.covered == self.sampled
    }
}

#[derive(Clone, Debug, Default)]
pub struct AbsorberFamily {
    pub members: Vec<Absorber>,
    /// Indices into `members`, one list per part, in path order.
    pub parts: Vec<Vec<usize>>,
    /// `links[i][j]` joins the end of absorber `j` to the start of absorber `j + 1` in part `i`,
    /// endpoints included.
    pub links: Vec<Vec<Vec<usize>>>,
    pub linked: Vec<Vec<usize>>,
    /// Size of the first round's raw sample, before any discarding.
    pub first_sample: usize,
    pub coverage: Coverage,
    pub part_coverage: Vec<Coverage>,
    /// Attempt (0-based) that produced this family.
    pub attempt: usize,
}

impl AbsorberFamily {
    pub fn vertex_set(&self, n: usize) -> BitSet {
        BitSet::from_iter(n, self.members.iter().flat_map(|a| a.iter().copied()))
    }

    /// Machine check of the structural postconditions.
    pub fn check(&self, d: &Digraph, ladder: &ParameterLadder) -> std::result::Result<(), String> {
        let n = d.n();
        let mut seen = BitSet::new(n);
        for a in &self.members {
            if !is_four_path(d, a) {
                return Err(format!("{a:?} is not a 4-path"));
            }
            for &z in a {
                if !seen.insert(z) {
                    return Err(format!("absorbers share vertex {z}"));
                }
            }
        }
        if self.members.len() as f64 > ladder.gamma * n as f64 {
            return Err(format!("{} absorbers exceed gamma n", self.members.len()));
        }
        for (i, links) in self.links.iter().enumerate() {
            for p in links {
                if p.len() < 2 || p.len() > 4 || !d.is_path(p) {
                    return Err(format!("part {i}: bad connector {p:?}"));
                }
            }
        }
        let mut used = BitSet::new(n);
        for (i, l) in self.linked.iter().enumerate() {
            if !d.is_path(l) {
                return Err(format!("linked path {i} is not a path"));
            }
            for &x in l {
                if !used.insert(x) {
                    return Err(format!("linked paths share vertex {x}"));
                }
            }
            for &m in &self.parts[i] {
                let a = &self.members[m];
                if !l.windows(4).any(|w| w == a) {
                    return Err(format!("absorber {a:?} missing from linked path {i}"));
                }
            }
        }
        Ok(())
    }
}

/// Draws `k` ordered 4-tuples of distinct vertices from `pool`.
fn sample_tuples(pool: &[usize], rng: &mut ChaCha8Rng, ladder: &ParameterLadder) -> Vec<Absorber> {
    let m = pool.len();
    if m < 4 {
        return vec![];
    }
    let mf = m as f64;
    let trials = (mf * (mf - 1.0) * (mf - 2.0) * (mf - 3.0)) as u64;
    let p = (ladder.gamma1.powi(3) / mf.powi(3)).min(1.0);
    let k = Binomial::new(trials, p).map(|b| b.sample(rng)).unwrap_or(0) as usize;
    (0..k)
        .map(|_| {
            let mut t = [0usize; 4];
            let mut i = 0;
            while i < 4 {
                let x = pool[rng.gen_range(0..m)];
                if !t[..i].contains(&x) {
                    t[i] = x;
                    i += 1;
                }
            }
            t
        })
        .collect()
}

fn absorbs_something(d: &Digraph, a: &Absorber, pool: &BitSet) -> bool {
    let mut outside = pool.clone();
    for &z in a {
        outside.remove(z);
    }
    d.out_set(a[1]).intersection_count(&outside) > 0 && d.in_set(a[2]).intersection_count(&outside) > 0
}

/// Samples pairs from `pool` and reports how many are absorbed by `members`.
pub fn sample_coverage(d: &Digraph, members: &[Absorber], pool: &[usize], samples: usize, rng: &mut impl Rng) -> Coverage {
    let mut cov = Coverage { sampled: 0, covered: 0, uncovered: None };
    if pool.is_empty() {
        return cov;
    }
    for _ in 0..samples {
        let u = pool[rng.gen_range(0..pool.len())];
        let v = pool[rng.gen_range(0..pool.len())];
        cov.sampled += 1;
        if members.iter().any(|a| absorbs(d, a, u, v)) {
            cov.covered += 1;
        } else if cov.uncovered.is_none() {
            cov.uncovered = Some((u, v));
        }
    }
    cov
}

/// Random disjoint absorber family inside `available`.
///
/// Each round includes every ordered 4-tuple of available vertices
/// independently with probability `gamma1^3 / m^3` (`m = |available|`),
/// then drops tuples that are not absorbing 4-paths, tuples meeting another
/// sampled tuple, and tuples meeting absorbers kept from earlier rounds.
pub fn build_absorber_family(
    d: &Digraph,
    available: &BitSet,
    ladder: &ParameterLadder,
    seed: u64,
    opts: &FamilyOptions,
) -> Result<AbsorberFamily> {
    let pool: Vec<usize> = available.iter().collect();
    if pool.len() < 8 {
        return Err(Error::stage("absorber-family", format!("only {} vertices available, need at least 8", pool.len())));
    }
    let cap = (ladder.gamma * d.n() as f64).floor() as usize;
    let mut best: Option<AbsorberFamily> = None;
    for attempt in 0..=opts.retries {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt as u64).wrapping_mul(0x2545_F491_4F6C_DD1D));
        let mut members: Vec<Absorber> = Vec::new();
        let mut used = BitSet::new(d.n());
        let mut first_sample = None;
        for _ in 0..opts.rounds.max(1) {
            let sample = sample_tuples(&pool, &mut rng, ladder);
            first_sample.get_or_insert(sample.len());
            let mut hits = vec![0u32; d.n()];
            for t in &sample {
                for &z in t {
                    hits[z] += 1;
                }
            }
            for t in sample {
                if members.len() >= cap {
                    break;
                }
                let alone = t.iter().all(|&z| hits[z] == 1 && !used.contains(z));
                if alone && is_four_path(d, &t) && absorbs_something(d, &t, available) {
                    t.iter().for_each(|&z| {
                        used.insert(z);
                    });
                    members.push(t);
                }
            }
            if members.len() >= opts.target.min(cap) {
                break;
            }
        }
        let rest: Vec<usize> = pool.iter().copied().filter(|&v| !used.contains(v)).collect();
        let coverage = sample_coverage(d, &members, &rest, opts.coverage_samples, &mut rng);
        let fam = AbsorberFamily {
            members,
            first_sample: first_sample.unwrap_or(0),
            coverage,
            attempt,
            ..Default::default()
        };
        let done = fam.coverage.complete() && !fam.members.is_empty();
        let better = best.as_ref().is_none_or(|b| {
            (fam.coverage.covered, fam.members.len()) > (b.coverage.covered, b.members.len())
        });
        if done {
            return Ok(fam);
        }
        if better {
            best = Some(fam);
        }
    }
    let best = best.unwrap();
    if opts.require_coverage || best.members.is_empty() {
        let detail = match best.coverage.uncovered {
            Some((u, v)) => format!("pair ({u},{v}) has no absorber after {} attempts", opts.retries + 1),
            None => "empty absorber family".to_string(),
        };
        return Err(Error::stage("coverage", detail));
    }
    Ok(best)
}

/// Shortest `b -> a` path of length at most 3 whose interior avoids `blocked`.
/// Candidates are scanned in a seeded random order.
pub fn connect(d: &Digraph, b: usize, a: usize, blocked: &BitSet, rng: &mut impl Rng) -> Option<Vec<usize>> {
    if d.has_arc(b, a) {
        return Some(vec![b, a]);
    }
    let free = blocked.complement();
    let mut outs: Vec<usize> = d.out_set(b).intersection(&free).iter().filter(|&x| x != a).collect();
    outs.shuffle(rng);
    if let Some(&x) = outs.iter().find(|&&x| d.has_arc(x, a)) {
        return Some(vec![b, x, a]);
    }
    let ins = d.in_set(a).intersection(&free);
    for &x in &outs {
        let mut cand: Vec<usize> = d.out_set(x).intersection(&ins).iter().filter(|&y| y != b && y != x).collect();
        if cand.is_empty() {
            continue;
        }
        cand.shuffle(rng);
        return Some(vec![b, x, cand[0], a]);
    }
    None
}

#[derive(Clone, Debug)]
pub struct PartitionReport {
    /// Whether `|F| >= gamma^2 n`; reported, not enforced.
    pub gamma_floor_met: bool,
}

/// Splits the family into parts of the given sizes and links each part into
/// one path, using connectors of length at most 3 through vertices outside
/// `blocked`, the family, and earlier connectors.
pub fn partition_and_link(
    d: &Digraph,
    fam: &AbsorberFamily,
    sizes: &[usize],
    blocked: &BitSet,
    ladder: &ParameterLadder,
    seed: u64,
    opts: &FamilyOptions,
) -> Result<(AbsorberFamily, PartitionReport)> {
    let f = fam.members.len();
    if sizes.iter().sum::<usize>() != f {
        return Err(Error::input(format!("part sizes sum to {}, family has {f}", sizes.iter().sum::<usize>())));
    }
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::input("every part needs at least one absorber"));
    }
    if sizes.len() > 1 {
        let lo = ladder.beta * f as f64;
        let hi = (1.0 - ladder.beta) * f as f64;
        if let Some(&s) = sizes.iter().find(|&&s| !(s as f64 > lo && (s as f64) < hi)) {
            return Err(Error::input(format!("part size {s} outside ({lo:.2}, {hi:.2})")));
        }
    }
    let report = PartitionReport { gamma_floor_met: f as f64 >= ladder.gamma.powi(2) * d.n() as f64 };
    let n = d.n();
    let fam_set = fam.vertex_set(n);
    let pool: Vec<usize> = blocked.union(&fam_set).complement().iter().collect();
    let mut best: Option<AbsorberFamily> = None;
    let mut last_err = None;
    for attempt in 0..=opts.retries {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (0xA5A5_0000 + attempt as u64));
        let mut order: Vec<usize> = (0..f).collect();
        order.shuffle(&mut rng);
        let mut parts = Vec::new();
        let mut at = 0;
        for &s in sizes {
            parts.push(order[at..at + s].to_vec());
            at += s;
        }
        let part_coverage: Vec<Coverage> = parts
            .iter()
            .map(|p| {
                let ms: Vec<Absorber> = p.iter().map(|&i| fam.members[i]).collect();
                sample_coverage(d, &ms, &pool, opts.coverage_samples, &mut rng)
            })
            .collect();
        let mut taken = blocked.union(&fam_set);
        let mut links = Vec::new();
        let mut linked = Vec::new();
        let mut failed = None;
        'parts: for (pi, p) in parts.iter().enumerate() {
            let mut path: Vec<usize> = fam.members[p[0]].to_vec();
            let mut plinks = Vec::new();
            for w in p.windows(2) {
                let b = fam.members[w[0]][3];
                let a = fam.members[w[1]][0];
                match connect(d, b, a, &taken, &mut rng) {
                    Some(c) => {
                        for &x in &c[1..c.len() - 1] {
                            taken.insert(x);
                        }
                        path.extend_from_slice(&c[1..c.len() - 1]);
                        path.extend_from_slice(&fam.members[w[1]]);
                        plinks.push(c);
                    }
                    None => {
                        failed = Some(format!("part {pi}: no connector of length <= 3 from {b} to {a}"));
                        break 'parts;
                    }
                }
            }
            links.push(plinks);
            linked.push(path);
        }
        if let Some(e) = failed {
            last_err = Some(e);
            continue;
        }
        let cand = AbsorberFamily {
            members: fam.members.clone(),
            parts,
            links,
            linked,
            first_sample: fam.first_sample,
            coverage: fam.coverage.clone(),
            part_coverage,
            attempt,
        };
        let covered: usize = cand.part_coverage.iter().map(|c| c.covered).sum();
        let complete = cand.part_coverage.iter().all(|c| c.complete());
        if complete {
            return Ok((cand, report));
        }
        if best.as_ref().is_none_or(|b| b.part_coverage.iter().map(|c| c.covered).sum::<usize>() < covered) {
            best = Some(cand);
        }
    }
    match best {
        Some(b) if !opts.require_coverage => Ok((b, report)),
        Some(b) => {
            let (pi, c) = b.part_coverage.iter().enumerate().find(|(_, c)| !c.complete()).unwrap();
            let (u, v) = c.uncovered.unwrap();
            Err(Error::stage("coverage", format!("part {pi} has no absorber for ({u},{v})")))
        }
        None => Err(Error::stage("link", last_err.unwrap_or_default())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn absorbs_examples() {
        let k6 = Digraph::complete(6);
        assert!(absorbs(&k6, &[0, 1, 2, 3], 4, 5));
        let mut b = k6.to_builder();
        b.remove_arc(1, 4);
        assert!(!absorbs(&b.build(), &[0, 1, 2, 3], 4, 5));
        assert!(!absorbs(&k6, &[0, 1, 2, 3], 0, 5));
    }

    #[test]
    fn absorb_path_examples() {
        let a = [0, 1, 2, 3];
        assert_eq!(absorb_path(&[0, 1, 2, 3], &a, &[4]).unwrap(), vec![0, 1, 4, 2, 3]);
        assert_eq!(absorb_path(&[0, 1, 2, 3], &a, &[4, 5]).unwrap(), vec![0, 1, 4, 5, 2, 3]);
        assert!(absorb_path(&[0, 1, 2, 3], &a, &[4, 2]).unwrap_err().is_input());
        assert!(absorb_path(&[0, 2, 1, 3], &a, &[4]).is_err());
    }

    #[test]
    fn family_on_complete() {
        let d = Digraph::complete(300);
        let ladder = ParameterLadder::default();
        let fam = build_absorber_family(&d, &d.all(), &ladder, 5, &FamilyOptions::default()).unwrap();
        assert!(!fam.members.is_empty());
        assert!(fam.coverage.complete());
        fam.check(&d, &ladder).unwrap();
        assert!(build_absorber_family(&Digraph::complete(7), &BitSet::full(7), &ladder, 1, &FamilyOptions::default())
            .is_err());
    }

    #[test]
    fn partition_twelve_into_two() {
        let d = Digraph::complete(300);
        let ladder = ParameterLadder::default();
        let members: Vec<Absorber> = (0..12).map(|i| [4 * i, 4 * i + 1, 4 * i + 2, 4 * i + 3]).collect();
        let fam = AbsorberFamily { members, ..Default::default() };
        let opts = FamilyOptions::default();
        let (p, _) = partition_and_link(&d, &fam, &[6, 6], &BitSet::new(300), &ladder, 3, &opts).unwrap();
        assert_eq!(p.linked.len(), 2);
        assert!(p.links.iter().all(|l| l.len() == 5 && l.iter().all(|c| c.len() <= 4)));
        p.check(&d, &ladder).unwrap();
        let (one, _) = partition_and_link(&d, &fam, &[12], &BitSet::new(300), &ladder, 3, &opts).unwrap();
        assert_eq!(one.linked.len(), 1);
        let forty: Vec<Absorber> = (0..40).map(|i| [4 * i, 4 * i + 1, 4 * i + 2, 4 * i + 3]).collect();
        let big = AbsorberFamily { members: forty, ..Default::default() };
        assert!(partition_and_link(&d, &big, &[39, 1], &BitSet::new(300), &ladder, 3, &opts).unwrap_err().is_input());
    }
}
