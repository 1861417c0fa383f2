//! One test per acceptance criterion; each prints a single PASS/FAIL line.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;
use std::time::{Duration, Instant};
use subdiv_core::absorb::{absorb_path, absorbs, build_absorber_family, partition_and_link, FamilyOptions};
use subdiv_core::classify::{agreement, classify_extremal, ExtremalKind};
use subdiv_core::embed::{embed_paths_bipartite, EmbedOutcome, EmbedRequest};
use subdiv_core::gen::{planted_extremal, random_min_semidegree, tightness_witness};
use subdiv_core::harness::{run_experiment, ExperimentConfig};
use subdiv_core::hampath::Search;
use subdiv_core::oracle::{count_absorbers, find_perfect_tiling_exact, find_spanning_subdivision_exact, OracleConfig};
use subdiv_core::params::ParameterLadder;
use subdiv_core::pattern::{subdivision_to_json, tiling_to_json};
use subdiv_core::solve::{solve, Solution, SolveOptions, Task};
use subdiv_core::stability::find_ec_witness;
use subdiv_core::{BitSet, Digraph, Pattern, SubdivisionCert};

const KINDS: [ExtremalKind; 3] = [ExtremalKind::TwoCliques, ExtremalKind::Bipartite, ExtremalKind::FourBlock];

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn report(id: u32, ok: bool, limit: Duration, started: Instant, detail: String) {
    let t = started.elapsed();
    let pass = ok && t <= limit;
    println!("criterion {id}: {} {detail} ({:.1}s, limit {}s)", if pass { "PASS" } else { "FAIL" }, t.as_secs_f64(), limit.as_secs());
    assert!(ok, "criterion {id}: {detail}");
    assert!(t <= limit, "criterion {id}: took {t:?}, limit {limit:?}");
}

/// Independent subdivision check: branch injective, routes are host paths
/// between the right branch vertices, interiors disjoint from everything.
fn check_subdivision(d: &Digraph, p: &Pattern, c: &SubdivisionCert, spanning: bool) -> Result<usize, String> {
    if c.branch.len() != p.s() || c.routes.len() != p.h() {
        return Err("shape".into());
    }
    let mut seen = HashSet::new();
    for &b in &c.branch {
        if b >= d.n() || !seen.insert(b) {
            return Err(format!("branch vertex {b} repeated or out of range"));
        }
    }
    for (&(x, y), r) in p.arcs().iter().zip(&c.routes) {
        if r.len() < 2 || r[0] != c.branch[x] || r[r.len() - 1] != c.branch[y] {
            return Err(format!("route for ({x},{y}) has wrong ends"));
        }
        for w in r.windows(2) {
            if !d.has_arc(w[0], w[1]) {
                return Err(format!("missing arc {}->{}", w[0], w[1]));
            }
        }
        for &v in &r[1..r.len() - 1] {
            if !seen.insert(v) {
                return Err(format!("vertex {v} used twice"));
            }
        }
    }
    if spanning && seen.len() != d.n() {
        return Err(format!("covers {} of {} vertices", seen.len(), d.n()));
    }
    Ok(seen.len())
}

fn check_solution(d: &Digraph, p: &Pattern, task: &Task, sol: &Solution) -> Result<(), String> {
    match (task, sol) {
        (Task::Spanning(l), Solution::Spanning(c)) => {
            check_subdivision(d, p, c, true)?;
            if let Some(l) = l {
                let got: Vec<usize> = c.routes.iter().map(|r| r.len() - 1).collect();
                if &got != l {
                    return Err(format!("lengths {got:?}, wanted {l:?}"));
                }
            }
            Ok(())
        }
        (Task::Tiling(orders), Solution::Tiling(t)) => {
            if &t.orders != orders || t.parts.len() != orders.len() {
                return Err("orders".into());
            }
            let mut all = HashSet::new();
            for (c, &o) in t.parts.iter().zip(orders) {
                let k = check_subdivision(d, p, c, false)?;
                if k != o {
                    return Err(format!("part of order {k}, wanted {o}"));
                }
                let verts = c.branch.iter().copied().chain(c.routes.iter().flat_map(|r| r.iter().copied()));
                for v in verts.collect::<HashSet<_>>() {
                    if !all.insert(v) {
                        return Err(format!("parts share {v}"));
                    }
                }
            }
            if all.len() != d.n() {
                return Err("tiling does not cover the host".into());
            }
            Ok(())
        }
        _ => Err("solution kind mismatch".into()),
    }
}

#[test]
fn criterion_01_every_emitted_certificate_reverifies() {
    let t = Instant::now();
    let l = ParameterLadder::default();
    let (mut emitted, mut bad) = (0, Vec::new());
    let mut record = |d: &Digraph, p: &Pattern, task: &Task, sol: &Solution| {
        emitted += 1;
        if let Err(e) = check_solution(d, p, task, sol) {
            bad.push(e);
        }
    };
    for seed in 0..40u64 {
        let n = 6 + (seed as usize % 5);
        let d = random_min_semidegree(n, n.div_ceil(2), seed).unwrap();
        for p in [Pattern::single_arc(), Pattern::two_cycle()] {
            let task = Task::Spanning(None);
            if let Ok(Search::Found(c)) = find_spanning_subdivision_exact(&d, &p, None, OracleConfig::default()) {
                record(&d, &p, &task, &Solution::Spanning(c));
            }
            let orders = vec![n / 2, n - n / 2];
            if let Ok(Search::Found(c)) = find_perfect_tiling_exact(&d, &p, &orders, OracleConfig::default()) {
                record(&d, &p, &Task::Tiling(orders), &Solution::Tiling(c));
            }
            if let Ok(sol) = solve(&d, &p, &task, &l, seed, &SolveOptions::default()).result {
                record(&d, &p, &task, &sol);
            }
        }
    }
    for seed in 0..3u64 {
        let d = random_min_semidegree(120, 66, seed).unwrap();
        for p in [Pattern::single_arc(), Pattern::two_cycle(), Pattern::transitive_triangle()] {
            for task in [Task::Spanning(None), Task::Tiling(vec![60, 60])] {
                if let Ok(sol) = solve(&d, &p, &task, &l, seed, &SolveOptions::default()).result {
                    record(&d, &p, &task, &sol);
                }
            }
        }
        for kind in KINDS {
            let (d, _) = planted_extremal(kind, 120, &l, 0.0, seed).unwrap();
            for task in [Task::Spanning(None), Task::Tiling(vec![60, 60])] {
                if let Ok(sol) = solve(&d, &Pattern::two_cycle(), &task, &l, seed, &SolveOptions::default()).result {
                    record(&d, &Pattern::two_cycle(), &task, &sol);
                }
            }
        }
    }
    let ok = bad.is_empty() && emitted > 0;
    report(1, ok, Duration::from_secs(60), t, format!("{emitted} certificates, {} violations {:?}", bad.len(), bad.first()));
}

#[test]
fn criterion_02_dense_small_digraphs_have_hamiltonian_paths() {
    let t = Instant::now();
    let mut found = 0;
    let mut degree_ok = true;
    let mut bad = Vec::new();
    let arc = Pattern::single_arc();
    for i in 0..500u64 {
        let n = 6 + (i as usize % 4);
        let d = random_min_semidegree(n, n.div_ceil(2), 1000 + i).unwrap();
        degree_ok &= d.min_semi_degree().unwrap() >= n.div_ceil(2);
        match find_spanning_subdivision_exact(&d, &arc, None, OracleConfig::default()).unwrap() {
            Search::Found(c) => match check_subdivision(&d, &arc, &c, true) {
                Ok(_) => found += 1,
                Err(e) => bad.push(e),
            },
            _ => bad.push(format!("instance {i}: none found")),
        }
    }
    report(2, found == 500 && degree_ok, Duration::from_secs(120), t, format!("{found}/500 found, semi-degree floor held: {degree_ok} {:?}", bad.first()));
}

#[test]
fn criterion_03_tightness_witnesses_have_no_spanning_subdivision() {
    let t = Instant::now();
    let mut ok = 0;
    let mut notes = Vec::new();
    for n in [6, 8, 10] {
        let d = tightness_witness(n).unwrap();
        if d.min_semi_degree().unwrap() != n / 2 - 1 {
            notes.push(format!("n={n}: semi-degree {}", d.min_semi_degree().unwrap()));
            continue;
        }
        for p in [Pattern::single_arc(), Pattern::two_cycle()] {
            match find_spanning_subdivision_exact(&d, &p, None, OracleConfig::default()).unwrap() {
                Search::Absent => ok += 1,
                other => notes.push(format!("n={n} h={}: {:?}", p.h(), other.found().is_some())),
            }
        }
    }
    report(3, ok == 6, Duration::from_secs(30), t, format!("{ok}/6 certified infeasible {notes:?}"));
}

#[test]
fn criterion_04_absorption_algebra() {
    let t = Instant::now();
    let mut r = rng(4);
    let mut failures = 0;
    for _ in 0..10_000 {
        let n = r.gen_range(8..40);
        let mut verts: Vec<usize> = (0..n).collect();
        verts.shuffle(&mut r);
        let ql = r.gen_range(1..=n - 4);
        let ll = r.gen_range(4..=n - ql);
        let l = verts[..ll].to_vec();
        let q = verts[ll..ll + ql].to_vec();
        let at = r.gen_range(0..=ll - 4);
        let a = [l[at], l[at + 1], l[at + 2], l[at + 3]];
        let mut arcs: Vec<(usize, usize)> = l.windows(2).chain(q.windows(2)).map(|w| (w[0], w[1])).collect();
        arcs.push((a[1], q[0]));
        arcs.push((q[ql - 1], a[2]));
        for _ in 0..n {
            let (u, v) = (r.gen_range(0..n), r.gen_range(0..n));
            if u != v {
                arcs.push((u, v));
            }
        }
        arcs.sort_unstable();
        arcs.dedup();
        let d = Digraph::from_arcs(n, &arcs).unwrap();
        let good = absorbs(&d, &a, q[0], q[ql - 1])
            && match absorb_path(&l, &a, &q) {
                Ok(out) => {
                    out.len() == ll + ql
                        && out[0] == l[0]
                        && out[out.len() - 1] == l[ll - 1]
                        && d.is_path(&out)
                        && out.iter().collect::<HashSet<_>>().len() == ll + ql
                }
                Err(_) => false,
            };
        failures += !good as usize;
    }
    let k20 = Digraph::complete(20);
    let mut min_count = u64::MAX;
    for u in 0..20 {
        for v in 0..20 {
            if u != v {
                min_count = min_count.min(count_absorbers(&k20, u, v));
            }
        }
    }
    // Ordered 4-tuples of the 18 other vertices.
    let exact = 18 * 17 * 16 * 15;
    let ok = failures == 0 && min_count >= 160 && min_count == exact;
    report(4, ok, Duration::from_secs(60), t, format!("{failures} failed trials of 10000, min absorbers on K20 {min_count} (>= 160)"));
}

#[test]
fn criterion_05_absorber_pipeline_on_k300() {
    let t = Instant::now();
    let d = Digraph::complete(300);
    let l = ParameterLadder::default();
    let opts = FamilyOptions::default();
    let mut good = 0;
    let mut notes = Vec::new();
    for seed in 0..20u64 {
        let res = build_absorber_family(&d, &d.all(), &l, seed, &opts).and_then(|fam| {
            let f = fam.members.len();
            let sizes = if f >= 2 { vec![f / 2, f - f / 2] } else { vec![f] };
            partition_and_link(&d, &fam, &sizes, &BitSet::new(300), &l, seed, &opts).map(|(p, _)| p)
        });
        let fam = match res {
            Ok(f) => f,
            Err(e) => {
                notes.push(format!("seed {seed}: {e}"));
                continue;
            }
        };
        let mut used = HashSet::new();
        let disjoint = fam.members.iter().flatten().all(|&z| used.insert(z));
        let small = fam.members.len() as f64 <= l.gamma * 300.0;
        let short = fam.links.iter().flatten().all(|c| c.len() <= 4 && d.is_path(c));
        let mut r = rng(seed);
        let free: Vec<usize> = (0..300).filter(|v| !used.contains(v)).collect();
        let covered = (0..200).all(|_| {
            let (u, v) = (free[r.gen_range(0..free.len())], free[r.gen_range(0..free.len())]);
            fam.parts.iter().all(|part| part.iter().any(|&i| {
                let a = fam.members[i];
                !a.contains(&u) && !a.contains(&v) && d.has_arc(a[1], u) && d.has_arc(v, a[2])
            }))
        });
        if disjoint && small && short && covered && fam.check(&d, &l).is_ok() {
            good += 1;
        } else {
            notes.push(format!("seed {seed}: disjoint {disjoint} small {small} short {short} covered {covered}"));
        }
    }
    report(5, good >= 19, Duration::from_secs(180), t, format!("{good}/20 seeds {notes:?}"));
}

/// Exhaustive alternating path packing for tiny instances.
fn packable(d: &Digraph, req: &EmbedRequest) -> bool {
    fn walk(d: &Digraph, req: &EmbedRequest, i: usize, cur: usize, left: usize, used: &mut Vec<bool>) -> bool {
        if left == 0 {
            if !d.has_arc(cur, req.ends[i].1) {
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

fn random_request(r: &mut ChaCha8Rng, a: usize, m: usize) -> (Vec<usize>, Vec<(usize, usize)>) {
    let mut sizes = vec![1; m];
    for _ in m..a {
        sizes[r.gen_range(0..m)] += 1;
    }
    let mut av: Vec<usize> = (0..a).collect();
    let mut bv: Vec<usize> = (a..2 * a).collect();
    av.shuffle(r);
    bv.shuffle(r);
    (sizes, (0..m).map(|i| (av[i], bv[i])).collect())
}

fn paths_valid(d: &Digraph, req: &EmbedRequest, ps: &[Vec<usize>]) -> bool {
    let a = req.a.len();
    let mut seen = HashSet::new();
    ps.len() == req.ends.len()
        && ps.iter().zip(&req.ends).zip(&req.sizes).all(|((p, &(x, y)), &s)| {
            p.len() == 2 * s && p[0] == x && p[p.len() - 1] == y && d.is_path(p) && p.iter().enumerate().all(|(i, &v)| (v < a) == (i % 2 == 0))
        })
        && ps.iter().flatten().all(|&v| seen.insert(v))
        && seen.len() == 2 * a
}

#[test]
fn criterion_06_bipartite_path_embedder() {
    let t = Instant::now();
    let mut r = rng(6);
    let mut agree = 0;
    for _ in 0..200 {
        let a = r.gen_range(1..=6);
        let m = r.gen_range(1..=3usize).min(a);
        let density = r.gen_range(0.3..0.95);
        let mut arcs = Vec::new();
        for x in 0..a {
            for y in a..2 * a {
                if r.gen_bool(density) {
                    arcs.push((x, y));
                }
                if r.gen_bool(density) {
                    arcs.push((y, x));
                }
            }
        }
        let d = Digraph::from_arcs(2 * a, &arcs).unwrap();
        let (sizes, ends) = random_request(&mut r, a, m);
        let req = EmbedRequest { a: (0..a).collect(), b: (a..2 * a).collect(), ends, sizes, eta: 0.5 };
        let got = embed_paths_bipartite(&d, &req, r.gen(), 1).unwrap();
        let sound = match &got {
            EmbedOutcome::Paths(ps) => paths_valid(&d, &req, ps),
            EmbedOutcome::Hall(w) => w.holds(&d),
            EmbedOutcome::NoOrdering => true,
        };
        agree += (sound && matches!(got, EmbedOutcome::Paths(_)) == packable(&d, &req)) as usize;
    }

    let (a, m, eta) = (50, 3, 0.1);
    let (mut success, mut valid_fail, mut generated) = (0, 0, 0);
    let mut notes = Vec::new();
    while generated < 100 {
        let mut arcs = Vec::new();
        for x in 0..a {
            for y in a..2 * a {
                if !r.gen_bool(0.02) {
                    arcs.push((x, y));
                }
                if !r.gen_bool(0.02) {
                    arcs.push((y, x));
                }
            }
        }
        let d = Digraph::from_arcs(2 * a, &arcs).unwrap();
        let (sizes, ends) = random_request(&mut r, a, m);
        let req = EmbedRequest { a: (0..a).collect(), b: (a..2 * a).collect(), ends, sizes, eta };
        if !req.floor_holds(&d) {
            continue;
        }
        generated += 1;
        match embed_paths_bipartite(&d, &req, r.gen(), 20).unwrap() {
            EmbedOutcome::Paths(ps) if paths_valid(&d, &req, &ps) => success += 1,
            EmbedOutcome::Paths(_) => notes.push("invalid paths".to_string()),
            EmbedOutcome::Hall(w) if w.holds(&d) => valid_fail += 1,
            other => notes.push(format!("{other:?}")),
        }
    }
    let ok = agree == 200 && success >= 99 && notes.is_empty();
    report(
        6,
        ok,
        Duration::from_secs(120),
        t,
        format!("(a) {agree}/200 agree with brute force; (b) {success}/100 embedded, {valid_fail} Hall certificates, {} bad {:?}", notes.len(), notes.first()),
    );
}

#[test]
fn criterion_07_planted_classification() {
    let t = Instant::now();
    let l = ParameterLadder::default();
    let n = 400;
    let mut lines = Vec::new();
    let mut ok = true;
    for kind in KINDS {
        let (mut right, mut worst) = (0, 1.0f64);
        for seed in 0..20u64 {
            let (d, truth) = planted_extremal(kind, n, &l, 0.0, seed).unwrap();
            let part = find_ec_witness(&d, l.eps_prime, 16, seed).unwrap().and_then(|w| classify_extremal(&d, &w, &l).ok());
            match part {
                Some(p) if p.kind == kind => {
                    right += 1;
                    worst = worst.min(agreement(kind, &p.parts, &truth.parts, n));
                }
                _ => worst = 0.0,
            }
        }
        ok &= right == 20 && worst >= 0.95;
        lines.push(format!("{}: {right}/20 kind, worst agreement {worst:.3}", kind.tag()));
    }
    report(7, ok, Duration::from_secs(180), t, lines.join("; "));
}

#[test]
fn criterion_08_nonextremal_end_to_end() {
    let t = Instant::now();
    let l = ParameterLadder::default();
    let n = 200;
    let mut ok = true;
    let mut lines = Vec::new();
    for (p, lengths) in [(Pattern::single_arc(), vec![199]), (Pattern::two_cycle(), vec![100, 100]), (Pattern::transitive_triangle(), vec![67, 67, 66])] {
        let (mut certs, mut staged, mut bad) = (0, 0, 0);
        for seed in 0..10u64 {
            let d = random_min_semidegree(n, 110, seed).unwrap();
            let task = Task::Spanning(Some(lengths.clone()));
            match solve(&d, &p, &task, &l, seed, &SolveOptions::default()).result {
                Ok(sol) if check_solution(&d, &p, &task, &sol).is_ok() => certs += 1,
                Ok(_) => bad += 1,
                Err(e) if e.stage_tag().is_some_and(|s| s != "verify") => staged += 1,
                Err(_) => bad += 1,
            }
        }
        ok &= certs >= 9 && bad == 0;
        lines.push(format!("h={}: {certs}/10 certs, {staged} staged failures, {bad} bad", p.h()));
    }
    report(8, ok, Duration::from_secs(300), t, lines.join("; "));
}

#[test]
fn criterion_09_extremal_end_to_end() {
    let t = Instant::now();
    let l = ParameterLadder::default();
    let n = 200;
    let mut ok = true;
    let mut lines = Vec::new();
    for kind in KINDS {
        for (p, task) in [(Pattern::single_arc(), Task::Spanning(Some(vec![n - 1]))), (Pattern::two_cycle(), Task::Tiling(vec![n / 2, n / 2]))] {
            let mut certs = 0;
            let mut routes = HashSet::new();
            for seed in 0..10u64 {
                let (d, _) = planted_extremal(kind, n, &l, 0.0, seed).unwrap();
                let r = solve(&d, &p, &task, &l, seed, &SolveOptions::default());
                routes.insert(r.route.tag());
                if let Ok(sol) = r.result {
                    certs += check_solution(&d, &p, &task, &sol).is_ok() as usize;
                }
            }
            ok &= certs >= 9;
            let mode = if matches!(task, Task::Tiling(_)) { "tiling" } else { "spanning" };
            let mut routes: Vec<_> = routes.into_iter().collect();
            routes.sort();
            lines.push(format!("{} {mode}: {certs}/10 via {routes:?}", kind.tag()));
        }
    }
    report(9, ok, Duration::from_secs(300), t, lines.join("; "));
}

#[test]
fn criterion_10_determinism() {
    let t = Instant::now();
    let l = ParameterLadder::default();
    let render = |sol: &Solution, p: &Pattern| match sol {
        Solution::Spanning(c) => subdivision_to_json(p, c),
        Solution::Tiling(c) => tiling_to_json(p, c),
    };
    let mut same = 0;
    let mut cases = 0;
    let mut runs: Vec<(Digraph, Pattern, Task)> = Vec::new();
    runs.push((random_min_semidegree(120, 66, 7).unwrap(), Pattern::transitive_triangle(), Task::Spanning(None)));
    runs.push((random_min_semidegree(120, 66, 8).unwrap(), Pattern::two_cycle(), Task::Tiling(vec![50, 70])));
    for kind in KINDS {
        runs.push((planted_extremal(kind, 120, &l, 0.0, 9).unwrap().0, Pattern::two_cycle(), Task::Tiling(vec![60, 60])));
    }
    for (d, p, task) in &runs {
        cases += 1;
        let a = solve(d, p, task, &l, 42, &SolveOptions::default()).result;
        let b = solve(d, p, task, &l, 42, &SolveOptions::default()).result;
        same += match (a, b) {
            (Ok(x), Ok(y)) => (render(&x, p) == render(&y, p)) as usize,
            (Err(x), Err(y)) => (x == y) as usize,
            _ => 0,
        };
    }
    let cfg = ExperimentConfig::from_json(
        r#"{"seed": 10, "rows": [
            {"generator": {"kind": "random", "n": 8}, "pattern": "arc", "repeats": 6},
            {"generator": {"kind": "random", "n": 100, "d": 55}, "pattern": "2-cycle", "repeats": 2},
            {"generator": {"kind": "planted", "class": "ec2", "n": 100}, "pattern": "arc", "orders": [50, 50]}]}"#,
    )
    .unwrap();
    let r1 = run_experiment(&cfg, &l).unwrap();
    let r2 = run_experiment(&cfg, &l).unwrap();
    let strip = |csv: String| csv.lines().map(|x| x.rsplit_once(',').unwrap().0.to_string()).collect::<Vec<_>>();
    let reports_same = r1.hash() == r2.hash() && strip(r1.to_csv()) == strip(r2.to_csv()) && !r1.rows.is_empty();
    let ok = same == cases && reports_same;
    report(10, ok, Duration::from_secs(60), t, format!("{same}/{cases} solver runs identical, reports identical: {reports_same}"));
}
