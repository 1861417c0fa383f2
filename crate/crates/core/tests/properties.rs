use proptest::prelude::*;
use std::collections::HashSet;
use subdiv_core::absorb::{absorb_path, build_absorber_family, FamilyOptions};
use subdiv_core::classify::{classify_extremal, ExtremalKind};
use subdiv_core::cover::{check_cover, cover_exceptional};
use subdiv_core::gen::planted_extremal;
use subdiv_core::hampath::Search;
use subdiv_core::oracle::{enumerate_absorbers, find_spanning_subdivision_exact, hamiltonian_path_exact, OracleConfig};
use subdiv_core::params::ParameterLadder;
use subdiv_core::pattern::{double_graph, verify_subdivision};
use subdiv_core::stability::{check_robust_outexpander, find_ec_witness, robust_out_neighborhood, ExpanderVerdict, RobustParams};
use subdiv_core::{BitSet, Digraph, Pattern, SubdivisionCert};

fn digraph_from_bits(n: usize, bits: &[bool]) -> Digraph {
    let pairs = (0..n).flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v)));
    let arcs: Vec<(usize, usize)> = pairs.zip(bits.iter().cycle()).filter(|(_, &b)| b).map(|(a, _)| a).collect();
    Digraph::from_arcs(n, &arcs).unwrap()
}

fn arb_digraph(max_n: usize) -> impl Strategy<Value = Digraph> {
    (1..=max_n).prop_flat_map(|n| proptest::collection::vec(any::<bool>(), n * (n - 1).max(1)).prop_map(move |b| digraph_from_bits(n, &b)))
}

/// Straight from the definition, without the library verifier.
fn raw_valid(d: &Digraph, p: &Pattern, c: &SubdivisionCert) -> bool {
    let mut seen = HashSet::new();
    c.branch.len() == p.s()
        && c.routes.len() == p.h()
        && c.branch.iter().all(|&b| b < d.n() && seen.insert(b))
        && p.arcs().iter().zip(&c.routes).all(|(&(x, y), r)| {
            r.len() >= 2
                && r[0] == c.branch[x]
                && r[r.len() - 1] == c.branch[y]
                && r.windows(2).all(|w| w[0] < d.n() && w[1] < d.n() && d.has_arc(w[0], w[1]))
                && r[1..r.len() - 1].iter().all(|&v| seen.insert(v))
        })
        && seen.len() == d.n()
}

#[test]
fn arc_counts_match_degree_sums_on_every_small_digraph() {
    for n in 1..=4usize {
        let m = n * (n - 1);
        for mask in 0u32..(1 << m) {
            let bits: Vec<bool> = (0..m).map(|i| mask >> i & 1 == 1).collect();
            let d = digraph_from_bits(n, &bits);
            for x in 0u32..(1 << n) {
                let xs = d.set_of((0..n).filter(|&v| x >> v & 1 == 1));
                let sum: usize = xs.iter().map(|v| d.out_degree(v)).sum();
                assert_eq!(d.arc_count_between(&xs, &d.all()).unwrap(), sum);
            }
        }
    }
}

#[test]
fn doubled_graphs_keep_the_minimum_degree() {
    for n in 2..=5usize {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        for mask in 0u32..(1 << pairs.len()) {
            let edges: Vec<(usize, usize)> = pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect();
            let mut deg = vec![0; n];
            for &(u, v) in &edges {
                deg[u] += 1;
                deg[v] += 1;
            }
            let d = double_graph(n, &edges).unwrap();
            assert_eq!(d.min_semi_degree().unwrap(), *deg.iter().min().unwrap());
        }
    }
}

#[test]
fn oracle_matches_hamiltonian_search_on_every_four_vertex_digraph() {
    let arc = Pattern::single_arc();
    for mask in 0u32..(1 << 12) {
        let bits: Vec<bool> = (0..12).map(|i| mask >> i & 1 == 1).collect();
        let d = digraph_from_bits(4, &bits);
        let a = find_spanning_subdivision_exact(&d, &arc, None, OracleConfig::default()).unwrap();
        let b = hamiltonian_path_exact(&d, None, u64::MAX);
        assert_eq!(matches!(a, Search::Found(_)), matches!(b, Search::Found(_)));
    }
}

#[test]
fn absorber_families_on_k300_track_the_expected_sample_size() {
    let d = Digraph::complete(300);
    let l = ParameterLadder::default();
    let opts = FamilyOptions { retries: 0, require_coverage: false, ..Default::default() };
    // Each ordered 4-tuple of distinct vertices is drawn with probability gamma1^3 / n^3.
    let mean = l.gamma1.powi(3) * (299.0 * 298.0 * 297.0) / (300.0f64 * 300.0);
    let sd = mean.sqrt();
    let mut inside = 0;
    for seed in 0..200u64 {
        // On a complete host every sampled tuple survives, so failure means an empty sample.
        let size = match build_absorber_family(&d, &d.all(), &l, seed, &opts) {
            Ok(f) => {
                f.check(&d, &l).unwrap();
                f.first_sample
            }
            Err(e) => {
                assert_eq!(e.stage_tag(), Some("coverage"), "{e}");
                0
            }
        };
        inside += ((size as f64 - mean).abs() <= 3.0 * sd) as usize;
    }
    assert!(inside >= 198, "{inside}/200 within three standard deviations of {mean:.2}");
}

#[test]
fn planted_partitions_satisfy_their_invariants_and_covers_check_out() {
    let l = ParameterLadder::default();
    for kind in [ExtremalKind::TwoCliques, ExtremalKind::Bipartite, ExtremalKind::FourBlock] {
        for seed in 0..4u64 {
            let (d, _) = planted_extremal(kind, 160, &l, 0.0, seed).unwrap();
            let w = find_ec_witness(&d, l.eps_prime, 16, seed).unwrap().expect("planted hosts have a witness");
            let part = classify_extremal(&d, &w, &l).unwrap();
            assert!(part.violations(&d, &l).is_empty(), "{:?}", part.violations(&d, &l));
            assert!(part.stats.moves <= d.n());
            let sys = cover_exceptional(&d, &part, seed).unwrap();
            assert!(check_cover(&d, &part, &sys).is_empty(), "{:?}", check_cover(&d, &part, &sys));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn degree_sums_equal_arc_count(d in arb_digraph(9)) {
        let outs: usize = (0..d.n()).map(|v| d.out_degree(v)).sum();
        let ins: usize = (0..d.n()).map(|v| d.in_degree(v)).sum();
        prop_assert_eq!(outs, d.arc_count());
        prop_assert_eq!(ins, d.arc_count());
        for v in 0..d.n() {
            prop_assert_eq!(d.out_degree(v), (0..d.n()).filter(|&u| d.has_arc(v, u)).count());
        }
    }

    #[test]
    fn bidirectional_degree_is_bounded(d in arb_digraph(9), mask in any::<u16>()) {
        let u = d.set_of((0..d.n()).filter(|&v| mask >> v & 1 == 1));
        for v in 0..d.n() {
            let bi = d.bidirectional_degree(v, &u).unwrap();
            prop_assert!(bi <= d.out_degree_in(v, &u).min(d.in_degree_in(v, &u)));
        }
    }

    #[test]
    fn verifier_agrees_with_a_raw_check(d in arb_digraph(7), h in 1usize..=2, seed in any::<u64>(), flip in any::<usize>()) {
        let p = if h == 1 { Pattern::single_arc() } else { Pattern::two_cycle() };
        if let Search::Found(c) = find_spanning_subdivision_exact(&d, &p, None, OracleConfig::default()).unwrap() {
            let v = verify_subdivision(&d, &p, &c, true, None).unwrap();
            prop_assert!(v.pass() && raw_valid(&d, &p, &c));
            let total: usize = c.routes.iter().map(|r| r.len() - 1).sum();
            prop_assert_eq!(total, d.n() - p.s() + p.h());
            let mut t = c.clone();
            let r = seed as usize % t.routes.len();
            let i = flip % t.routes[r].len();
            t.routes[r][i] = (t.routes[r][i] + 1 + seed as usize % d.n().max(2)) % d.n();
            let v = verify_subdivision(&d, &p, &t, true, None).unwrap();
            prop_assert_eq!(v.pass(), raw_valid(&d, &p, &t));
        }
    }

    #[test]
    fn absorber_enumeration_matches_a_quadruple_loop(d in arb_digraph(8), u in 0usize..8, v in 0usize..8) {
        let n = d.n();
        prop_assume!(u < n && v < n && u != v);
        let mut want = Vec::new();
        for a in 0..n { for b in 0..n { for c in 0..n { for e in 0..n {
            let z = [a, b, c, e];
            let distinct = z.iter().collect::<HashSet<_>>().len() == 4;
            if distinct && !z.contains(&u) && !z.contains(&v)
                && d.has_arc(a, b) && d.has_arc(b, c) && d.has_arc(c, e) && d.has_arc(b, u) && d.has_arc(v, c) {
                want.push(z);
            }
        }}}}
        let mut got = enumerate_absorbers(&d, u, v);
        got.sort_unstable();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn witnesses_revalidate_and_stay_valid_for_larger_eps(seed in any::<u64>(), n in 20usize..60) {
        let k = n / 2;
        let d = Digraph::complete(k).disjoint_union(&Digraph::complete(n - k));
        let w = find_ec_witness(&d, 0.1, 4, seed).unwrap().expect("two cliques");
        prop_assert!(w.holds(&d, 0.1));
        for eps in [0.15, 0.2, 0.3] {
            prop_assert!(w.holds(&d, eps));
        }
    }

    #[test]
    fn robust_neighbourhood_is_monotone(d in arb_digraph(12), a in any::<u16>(), b in any::<u16>(), nu in 0.05f64..0.5) {
        let s = d.set_of((0..d.n()).filter(|&v| a >> v & 1 == 1));
        let t = d.set_of((0..d.n()).filter(|&v| (a | b) >> v & 1 == 1));
        let rs = robust_out_neighborhood(&d, &s, nu);
        let rt = robust_out_neighborhood(&d, &t, nu);
        prop_assert!(rs.is_subset(&rt));
    }

    #[test]
    fn complete_digraphs_are_robust_expanders(n in 5usize..=50, nu in 0.01f64..=0.2, seed in any::<u64>()) {
        let d = Digraph::complete(n);
        let v = check_robust_outexpander(&d, RobustParams::new(nu, nu).unwrap(), 200, seed);
        let pass = matches!(v, ExpanderVerdict::Pass { .. });
        prop_assert!(pass);
    }

    #[test]
    fn absorbing_preserves_endpoints_and_count(len in 4usize..20, qlen in 1usize..10, at in any::<usize>()) {
        let l: Vec<usize> = (0..len).collect();
        let q: Vec<usize> = (len..len + qlen).collect();
        let i = at % (len - 3);
        let a = [l[i], l[i + 1], l[i + 2], l[i + 3]];
        let out = absorb_path(&l, &a, &q).unwrap();
        prop_assert_eq!(out.len(), len + qlen);
        prop_assert_eq!(out[0], l[0]);
        prop_assert_eq!(out[out.len() - 1], l[len - 1]);
        let set: BitSet = BitSet::from_iter(len + qlen, out.iter().copied());
        prop_assert_eq!(set.count(), len + qlen);
    }
}
