//! Executable forms of the structural facts the class solvers rely on. Each
//! check returns a description of the first violation found.

use std::collections::BTreeSet;

use crate::catalog;
use crate::matching::occurs;
use crate::model::{ConstraintGraph, Instance, Value, Var};
use crate::propagate::{enforce_sac, trace_sets, Trace};
use crate::transform::{btp_merge_fixpoint, ns_eliminate};

use super::construct::check_vminus_degree;

fn linked(trace: &Trace, p: Var, q: Var) -> bool {
    trace
        .steps
        .iter()
        .any(|s| (s.source == p && s.target == q) || (s.source == q && s.target == p))
}

/// For the instance reduced by probing `x` and its trace: every inner
/// variable has at most two non-trivial constraints, each to a variable it
/// exchanged a removal with; the inner variables induce a forest; no path
/// through inner variables joins two outer endpoints.
pub fn q1_probe_structure(reduced: &Instance, trace: &Trace, x: Var) -> Result<(), String> {
    let (_, inner) = trace_sets(trace, x);
    let graph = reduced.constraint_graph();
    for &p in &inner {
        let ns = graph.neighbours(p);
        if ns.len() > 2 {
            return Err(format!("inner variable {p} has {} non-trivial constraints", ns.len()));
        }
        if let Some(q) = ns.iter().find(|&&q| !linked(trace, p, q)) {
            return Err(format!("non-trivial constraint ({p},{q}) not on the trace"));
        }
    }
    if !graph.is_forest_within(&inner) {
        return Err("cycle of non-trivial constraints among inner variables".into());
    }
    for comp in graph.components_within(&inner) {
        let exits: usize = comp
            .iter()
            .map(|&p| graph.neighbours(p).iter().filter(|q| !inner.contains(q)).count())
            .sum();
        if exits > 1 {
            return Err(format!("path through inner variables {comp:?} joins two outer variables"));
        }
    }
    Ok(())
}

/// After neighbourhood-substitutable values are removed from the probed
/// instance: every component of non-trivial constraints meeting `s` is a
/// star centred in `s`, and `s` with its neighbours has no non-trivial
/// constraint to the remaining variables.
pub fn r8_star_structure(reduced: &Instance, s: &BTreeSet<Var>) -> Result<(), String> {
    let graph = reduced.constraint_graph();
    for comp in graph.components() {
        if comp.len() < 2 || comp.is_disjoint(s) {
            continue;
        }
        let edges: Vec<(Var, Var)> = graph
            .edges()
            .into_iter()
            .filter(|(a, _)| comp.contains(a))
            .collect();
        let centred = comp
            .iter()
            .filter(|c| s.contains(c))
            .any(|&c| edges.iter().all(|&(a, b)| a == c || b == c));
        if !centred {
            return Err(format!("component {comp:?} is not a star centred in S"));
        }
    }
    let x1 = closed_neighbourhood(&graph, s);
    for &p in x1.difference(s) {
        if let Some(q) = graph.neighbours(p).iter().find(|q| !x1.contains(q)) {
            return Err(format!("constraint ({p},{q}) crosses the partition"));
        }
    }
    Ok(())
}

pub(crate) fn closed_neighbourhood(graph: &ConstraintGraph, s: &BTreeSet<Var>) -> BTreeSet<Var> {
    let mut out = s.clone();
    for &p in s {
        out.extend(graph.neighbours(p).iter().copied());
    }
    out
}

/// Where the R7- procedure branches: the middle variable of an M̂
/// occurrence (or a V₂ occurrence when M̂ is absent), the value at which its
/// two positive edges meet, and the two end variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BranchPoint {
    pub pattern: &'static str,
    pub mid: Var,
    pub value: Value,
    pub ends: (Var, Var),
}

pub fn branch_point(inst: &Instance) -> Option<BranchPoint> {
    ["Mhat", "V2"].into_iter().find_map(|name| {
        let pat = catalog::pattern(name);
        let w = occurs(pat, inst, true)?;
        let (mid, value) = w.image(pat.point("m.m3").expect("meet point"));
        let end = |v: &str| w.var_map[pat.var_index(v).expect("end variable")];
        Some(BranchPoint { pattern: name, mid, value, ends: (end("x"), end("y")) })
    })
}

/// After probing a branch point of R7-: every non-trivial constraint with
/// a variable of `s` in its scope is the one on `{y,z}`.
pub fn r7m_near_trivial(reduced: &Instance, s: &BTreeSet<Var>, y: Var, z: Var) -> Result<(), String> {
    let graph = reduced.constraint_graph();
    for (a, b) in graph.edges() {
        let touches = s.contains(&a) || s.contains(&b);
        if touches && (a.min(b), a.max(b)) != (y.min(z), y.max(z)) {
            return Err(format!("non-trivial constraint ({a},{b}) touches S"));
        }
    }
    Ok(())
}

/// Alternate neighbourhood-substitution elimination and SAC until neither
/// removes anything.
pub fn ns_sac_fixpoint(inst: &Instance) -> Instance {
    let mut cur = enforce_sac(inst);
    loop {
        if cur.has_empty_domain() {
            return cur;
        }
        let (next, log) = ns_eliminate(&cur);
        if log.is_empty() {
            return cur;
        }
        cur = enforce_sac(&next);
    }
}

/// A T3-free instance brought to the SAC and NS-free fixpoint is T4-free.
pub fn t3_implies_t4_free(inst: &Instance) -> Result<(), String> {
    let reduced = ns_sac_fixpoint(inst);
    if reduced.has_empty_domain() {
        return Ok(());
    }
    match occurs(catalog::pattern("T4"), &reduced, false) {
        Some(w) => Err(format!("T4 occurs after reduction: {}", super::describe_witness(&w))),
        None => Ok(()),
    }
}

/// A SAC instance merged to BTP convergence has V⁻ only at variables of
/// degree at most two.
pub fn q2_merged_vminus(inst: &Instance) -> Result<(), String> {
    let (merged, _) = btp_merge_fixpoint(inst);
    check_vminus_degree(&merged).map_err(|e| e.to_string())
}
