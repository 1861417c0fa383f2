//! Routing between the non-extremal pipeline and the extremal engine.

use crate::classify::{classify_extremal, ExtremalKind, ExtremalPartition};
use crate::digraph::Digraph;
use crate::error::{Error, Result};
use crate::extremal::{solve_extremal_spanning, solve_extremal_tiling};
use crate::nonextremal::{solve_spanning_nonextremal, solve_tiling_nonextremal, NonExtremalOptions};
use crate::params::ParameterLadder;
use crate::pattern::{verify_subdivision, verify_tiling, Pattern, SubdivisionCert, TilingCert};
use crate::rng::mix;
use crate::stability::find_ec_witness;
use crate::trace::Trace;

/// Local-search restarts for the extremal witness.
pub const WITNESS_RESTARTS: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Task {
    /// Route lengths aligned with the pattern's arcs; `None` uses [`default_lengths`].
    Spanning(Option<Vec<usize>>),
    Tiling(Vec<usize>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    Stable,
    Extremal(ExtremalKind),
}

impl Route {
    pub fn tag(self) -> &'static str {
        match self {
            Route::Stable => "stable",
            Route::Extremal(k) => k.tag(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Solution {
    Spanning(SubdivisionCert),
    Tiling(TilingCert),
}

#[derive(Clone, Debug, Default)]
pub struct SolveOptions {
    /// Skip the non-extremal pipeline and require this extremal kind.
    pub force_extremal: Option<ExtremalKind>,
    pub nonextremal: NonExtremalOptions,
}

#[derive(Debug)]
pub struct SolveReport {
    pub route: Route,
    pub partition: Option<ExtremalPartition>,
    pub result: Result<Solution>,
    pub trace: Trace,
}

/// Arc 0 takes everything but two vertices per other arc.
pub fn default_lengths(n: usize, p: &Pattern) -> Result<Vec<usize>> {
    let (s, h) = (p.s(), p.h());
    if n + 2 < s + h + 1 {
        return Err(Error::input(format!("{n} vertices are too few for default lengths of this pattern")));
    }
    Ok((0..h).map(|k| if k == 0 { n + 2 - s - h } else { 2 }).collect())
}

/// Re-verifies a solution; the one place a solver result is accepted.
pub fn verify_solution(d: &Digraph, p: &Pattern, task: &Task, sol: &Solution) -> Result<Vec<String>> {
    let v = match (task, sol) {
        (Task::Spanning(l), Solution::Spanning(c)) => verify_subdivision(d, p, c, true, l.as_deref())?,
        (Task::Tiling(orders), Solution::Tiling(t)) => {
            if &t.orders != orders {
                return Ok(vec![format!("declared orders {:?} differ from the task's {orders:?}", t.orders)]);
            }
            verify_tiling(d, p, t)?
        }
        _ => return Ok(vec!["solution kind does not match the task".into()]),
    };
    Ok(v.clauses())
}

fn run_extremal(d: &Digraph, p: &Pattern, task: &Task, part: &ExtremalPartition, ladder: &ParameterLadder, seed: u64) -> Result<Solution> {
    match task {
        Task::Spanning(l) => {
            let l = match l {
                Some(l) => l.clone(),
                None => default_lengths(d.n(), p)?,
            };
            solve_extremal_spanning(d, p, &l, part, ladder, seed).map(Solution::Spanning)
        }
        Task::Tiling(o) => solve_extremal_tiling(d, p, o, part, ladder, seed).map(Solution::Tiling),
    }
}

fn run_stable(d: &Digraph, p: &Pattern, task: &Task, ladder: &ParameterLadder, seed: u64, opts: &SolveOptions, trace: &mut Trace) -> Result<Solution> {
    match task {
        Task::Spanning(l) => {
            let l = match l {
                Some(l) => l.clone(),
                None => default_lengths(d.n(), p)?,
            };
            solve_spanning_nonextremal(d, p, &l, ladder, seed, &opts.nonextremal, trace).map(Solution::Spanning)
        }
        Task::Tiling(o) => solve_tiling_nonextremal(d, p, o, ladder, seed, &opts.nonextremal, trace).map(Solution::Tiling),
    }
}

/// Classifies `d`, then solves on the extremal route when a partition is
/// found and on the stable route otherwise. An extremal failure falls back
/// to the stable route unless a kind is forced; if both fail, the extremal
/// error is reported.
pub fn solve(d: &Digraph, p: &Pattern, task: &Task, ladder: &ParameterLadder, seed: u64, opts: &SolveOptions) -> SolveReport {
    let mut trace = Trace::default();
    if let Err(e) = ladder.validate() {
        return SolveReport { route: Route::Stable, partition: None, result: Err(e), trace };
    }
    let witness = trace.time("witness", || find_ec_witness(d, ladder.eps_prime, WITNESS_RESTARTS, mix(seed, 1)));
    let witness = match witness {
        Ok(w) => w,
        Err(e) => return SolveReport { route: Route::Stable, partition: None, result: Err(e), trace },
    };
    let partition = match &witness {
        Some(w) => {
            let r = trace.time("classify", || classify_extremal(d, w, ladder));
            match r {
                Ok(part) => Some(part),
                Err(e) => {
                    trace.note("classify", e.to_string());
                    if opts.force_extremal.is_some() {
                        return SolveReport { route: Route::Stable, partition: None, result: Err(e), trace };
                    }
                    None
                }
            }
        }
        None => {
            trace.note("witness", "none found");
            None
        }
    };
    if let Some(k) = opts.force_extremal {
        let got = partition.as_ref().map(|p| p.kind);
        if got != Some(k) {
            let what = got.map_or("no extremal structure", |g| g.tag());
            let e = Error::stage("classify", format!("forced {} but found {what}", k.tag()));
            return SolveReport { route: Route::Extremal(k), partition, result: Err(e), trace };
        }
    }
    let Some(part) = partition else {
        let result = run_stable(d, p, task, ladder, mix(seed, 2), opts, &mut trace);
        return checked(d, p, task, SolveReport { route: Route::Stable, partition: None, result, trace });
    };
    let route = Route::Extremal(part.kind);
    let r = trace.time("extremal", || run_extremal(d, p, task, &part, ladder, mix(seed, 3)));
    let result = match r {
        Ok(s) => Ok(s),
        Err(e) if e.is_input() || opts.force_extremal.is_some() => Err(e),
        Err(e) => {
            trace.note("extremal", e.to_string());
            match run_stable(d, p, task, ladder, mix(seed, 2), opts, &mut trace) {
                Ok(s) => {
                    return checked(d, p, task, SolveReport { route: Route::Stable, partition: Some(part), result: Ok(s), trace });
                }
                Err(f) => {
                    trace.note("stable", f.to_string());
                    Err(e)
                }
            }
        }
    };
    checked(d, p, task, SolveReport { route, partition: Some(part), result, trace })
}

fn checked(d: &Digraph, p: &Pattern, task: &Task, mut r: SolveReport) -> SolveReport {
    if let Ok(sol) = &r.result {
        match verify_solution(d, p, task, sol) {
            Ok(bad) if bad.is_empty() => {}
            Ok(bad) => r.result = Err(Error::stage("verify", bad.join("; "))),
            Err(e) => r.result = Err(e),
        }
    }
    r
}
