//! Maximum bipartite matching (Hopcroft–Karp) with a Hall-violation witness.

use std::collections::VecDeque;

const NIL: usize = usize::MAX;

/// Bipartite graph given by left adjacency lists into `0..right`.
#[derive(Clone, Debug)]
pub struct Bipartite {
    pub right: usize,
    pub adj: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matching {
    /// Right partner of each left node, if any.
    pub left: Vec<Option<usize>>,
    pub size: usize,
}

impl Bipartite {
    pub fn new(right: usize, adj: Vec<Vec<usize>>) -> Self {
        Bipartite { right, adj }
    }

    pub fn left(&self) -> usize {
        self.adj.len()
    }

    pub fn max_matching(&self) -> Matching {
        let nl = self.left();
        let mut ml = vec![NIL; nl];
        let mut mr = vec![NIL; self.right];
        let mut dist = vec![0usize; nl];
        let mut size = 0;
        loop {
            // Layer free left nodes.
            let mut q = VecDeque::new();
            for u in 0..nl {
                if ml[u] == NIL {
                    dist[u] = 0;
                    q.push_back(u);
                } else {
                    dist[u] = usize::MAX;
                }
            }
            let mut found = false;
            while let Some(u) = q.pop_front() {
                for &v in &self.adj[u] {
                    let w = mr[v];
                    if w == NIL {
                        found = true;
                    } else if dist[w] == usize::MAX {
                        dist[w] = dist[u] + 1;
                        q.push_back(w);
                    }
                }
            }
            if !found {
                break;
            }
            let mut it = vec![0usize; nl];
            for u in 0..nl {
                if ml[u] == NIL && self.augment(u, &mut ml, &mut mr, &mut dist, &mut it) {
                    size += 1;
                }
            }
        }
        Matching { left: ml.into_iter().map(|v| (v != NIL).then_some(v)).collect(), size }
    }

    /// Iterative layered DFS from `root`.
    fn augment(&self, root: usize, ml: &mut [usize], mr: &mut [usize], dist: &mut [usize], it: &mut [usize]) -> bool {
        let mut stack = vec![root];
        while let Some(&u) = stack.last() {
            if it[u] < self.adj[u].len() {
                let v = self.adj[u][it[u]];
                it[u] += 1;
                let w = mr[v];
                if w == NIL {
                    // Flip the alternating path recorded on the stack.
                    let mut v = v;
                    while let Some(x) = stack.pop() {
                        let prev = ml[x];
                        ml[x] = v;
                        mr[v] = x;
                        v = prev;
                    }
                    return true;
                }
                if dist[w] == dist[u] + 1 {
                    stack.push(w);
                }
            } else {
                dist[u] = usize::MAX;
                stack.pop();
            }
        }
        false
    }

    /// Left set reachable by alternating paths from unmatched left nodes,
    /// with its neighbourhood. When the matching is maximum and not left
    /// perfect, `|neighbours| < |set|`.
    pub fn deficient_set(&self, m: &Matching) -> (Vec<usize>, Vec<usize>) {
        let mut mr = vec![NIL; self.right];
        for (u, v) in m.left.iter().enumerate() {
            if let Some(v) = v {
                mr[*v] = u;
            }
        }
        let mut seen_l = vec![false; self.left()];
        let mut seen_r = vec![false; self.right];
        let mut q: VecDeque<usize> = (0..self.left()).filter(|&u| m.left[u].is_none()).collect();
        for &u in &q {
            seen_l[u] = true;
        }
        while let Some(u) = q.pop_front() {
            for &v in &self.adj[u] {
                if !seen_r[v] {
                    seen_r[v] = true;
                    let w = mr[v];
                    if w != NIL && !seen_l[w] {
                        seen_l[w] = true;
                        q.push_back(w);
                    }
                }
            }
        }
        let s = (0..self.left()).filter(|&u| seen_l[u]).collect();
        let n = (0..self.right).filter(|&v| seen_r[v]).collect();
        (s, n)
    }

    /// Recomputes the neighbourhood of a left set from scratch.
    pub fn neighbourhood(&self, set: &[usize]) -> Vec<usize> {
        let mut seen = vec![false; self.right];
        for &u in set {
            for &v in &self.adj[u] {
                seen[v] = true;
            }
        }
        (0..self.right).filter(|&v| seen[v]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(g: &Bipartite) -> usize {
        fn go(g: &Bipartite, u: usize, used: &mut Vec<bool>) -> usize {
            if u == g.left() {
                return 0;
            }
            let mut best = go(g, u + 1, used);
            for &v in &g.adj[u] {
                if !used[v] {
                    used[v] = true;
                    best = best.max(1 + go(g, u + 1, used));
                    used[v] = false;
                }
            }
            best
        }
        go(g, 0, &mut vec![false; g.right])
    }

    #[test]
    fn small_cases() {
        let g = Bipartite::new(2, vec![vec![0], vec![0], vec![0, 1]]);
        let m = g.max_matching();
        assert_eq!(m.size, 2);
        let (s, n) = g.deficient_set(&m);
        assert!(n.len() < s.len());
        assert_eq!(g.neighbourhood(&s), n);
        let empty = Bipartite::new(0, vec![]);
        assert_eq!(empty.max_matching().size, 0);
    }

    proptest! {
        #[test]
        fn matches_brute_force(nl in 0usize..7, nr in 0usize..7, bits in proptest::collection::vec(any::<bool>(), 49)) {
            let adj: Vec<Vec<usize>> = (0..nl).map(|u| (0..nr).filter(|&v| bits[u * 7 + v]).collect()).collect();
            let g = Bipartite::new(nr, adj);
            let m = g.max_matching();
            prop_assert_eq!(m.size, brute(&g));
            let mut used = vec![false; nr];
            for (u, v) in m.left.iter().enumerate() {
                if let Some(v) = v {
                    prop_assert!(g.adj[u].contains(v));
                    prop_assert!(!used[*v]);
                    used[*v] = true;
                }
            }
            if m.size < nl {
                let (s, n) = g.deficient_set(&m);
                prop_assert!(n.len() < s.len());
                prop_assert_eq!(g.neighbourhood(&s), n);
            }
        }
    }
}
