//! Arc consistency with trace recording, singleton probes and SAC.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::model::{Instance, Value, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PropagateError {
    #[error("value {value} not in domain of variable {var}")]
    BadProbe { var: Var, value: Value },
}

/// One revision that removed something: values of `target` left without
/// support at `source`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Step {
    pub source: Var,
    pub target: Var,
    pub removed: BTreeSet<Value>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Trace {
    pub steps: Vec<Step>,
}

impl Trace {
    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    /// Apply the recorded removals to `start`, stopping at the first empty
    /// domain.
    pub fn replay(&self, start: &Instance) -> Instance {
        let mut out = start.clone();
        for s in &self.steps {
            for &v in &s.removed {
                if out.remove_value_mut(s.target, v).is_err() {
                    return out;
                }
            }
            if out.domain(s.target).is_empty() {
                return out;
            }
        }
        out
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.steps {
            let vals: Vec<String> = s.removed.iter().map(|v| v.to_string()).collect();
            writeln!(f, "{} -> {} : {{{}}}", s.source, s.target, vals.join(","))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Wipeout,
    Survived,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeResult {
    pub outcome: Outcome,
    /// The arc consistent instance after the assignment, if it survived.
    pub reduced: Option<Instance>,
    pub trace: Trace,
}

impl ProbeResult {
    pub fn survived(&self) -> bool {
        self.outcome == Outcome::Survived
    }
}

/// Order in which pending arcs are taken from the queue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Schedule {
    #[default]
    Fifo,
    Lifo,
}

/// Remove from `D(y)` every value without support in `D(x)`.
pub fn revise(inst: &mut Instance, x: Var, y: Var) -> BTreeSet<Value> {
    let removed: BTreeSet<Value> = if inst.domain(x).is_empty() {
        inst.domain(y).clone()
    } else if inst.trivial(x, y) {
        BTreeSet::new()
    } else {
        inst.domain(y)
            .iter()
            .copied()
            .filter(|&b| !inst.has_support(y, b, x))
            .collect()
    };
    for &b in &removed {
        inst.remove_value_mut(y, b).expect("value taken from the domain");
    }
    removed
}

struct Queue {
    arcs: VecDeque<(Var, Var)>,
    pending: Vec<bool>,
    n: usize,
    schedule: Schedule,
}

impl Queue {
    fn new(n: usize, schedule: Schedule) -> Self {
        Queue { arcs: VecDeque::new(), pending: vec![false; n * n], n, schedule }
    }

    fn push(&mut self, x: Var, y: Var) {
        let k = x * self.n + y;
        if !self.pending[k] {
            self.pending[k] = true;
            self.arcs.push_back((x, y));
        }
    }

    fn pop(&mut self) -> Option<(Var, Var)> {
        let arc = match self.schedule {
            Schedule::Fifo => self.arcs.pop_front(),
            Schedule::Lifo => self.arcs.pop_back(),
        }?;
        self.pending[arc.0 * self.n + arc.1] = false;
        Some(arc)
    }
}

fn adjacency(inst: &Instance) -> Vec<Vec<Var>> {
    let mut adj = vec![Vec::new(); inst.num_vars()];
    for (x, y) in inst.constrained_pairs() {
        adj[x].push(y);
        adj[y].push(x);
    }
    for a in &mut adj {
        a.sort_unstable();
    }
    adj
}

/// Run the queue to a fixpoint. Returns false on wipeout, in which case
/// `inst` has been replaced by the all-empty instance.
fn propagate(inst: &mut Instance, queue: &mut Queue, adj: &[Vec<Var>], trace: &mut Trace) -> bool {
    while let Some((x, y)) = queue.pop() {
        let removed = revise(inst, x, y);
        if removed.is_empty() {
            continue;
        }
        trace.steps.push(Step { source: x, target: y, removed });
        if inst.domain(y).is_empty() {
            inst.wipe_out();
            return false;
        }
        for &z in &adj[y] {
            if z != x {
                queue.push(y, z);
            }
        }
    }
    true
}

fn all_arcs(queue: &mut Queue, adj: &[Vec<Var>]) {
    for (x, ns) in adj.iter().enumerate() {
        for &y in ns {
            queue.push(x, y);
        }
    }
}

/// AC fixpoint under the default FIFO schedule.
pub fn enforce_ac(inst: &Instance) -> (Instance, Trace) {
    enforce_ac_with(inst, Schedule::Fifo)
}

/// AC fixpoint. A wipeout yields the instance with every domain empty, so
/// the result does not depend on the schedule.
pub fn enforce_ac_with(inst: &Instance, schedule: Schedule) -> (Instance, Trace) {
    let mut out = inst.clone();
    let mut trace = Trace::default();
    if out.has_empty_domain() {
        out.wipe_out();
        return (out, trace);
    }
    let adj = adjacency(&out);
    let mut queue = Queue::new(out.num_vars(), schedule);
    all_arcs(&mut queue, &adj);
    propagate(&mut out, &mut queue, &adj, &mut trace);
    (out, trace)
}

/// True iff every value has a support at every other variable.
pub fn is_ac(inst: &Instance) -> bool {
    let (out, _) = enforce_ac(inst);
    out == *inst && !inst.has_empty_domain()
}

/// Assign `x := v` and re-establish arc consistency. Arcs leaving `x` are
/// revised first.
pub fn singleton_probe(inst: &Instance, x: Var, v: Value) -> Result<ProbeResult, PropagateError> {
    if x >= inst.num_vars() || !inst.domain(x).contains(&v) {
        return Err(PropagateError::BadProbe { var: x, value: v });
    }
    let mut out = inst.clone();
    out.assign_mut(x, v).expect("checked above");
    let mut trace = Trace::default();
    if out.has_empty_domain() {
        return Ok(ProbeResult { outcome: Outcome::Wipeout, reduced: None, trace });
    }
    let adj = adjacency(&out);
    let mut queue = Queue::new(out.num_vars(), Schedule::Fifo);
    for &y in &adj[x] {
        queue.push(x, y);
    }
    all_arcs(&mut queue, &adj);
    let ok = propagate(&mut out, &mut queue, &adj, &mut trace);
    Ok(ProbeResult {
        outcome: if ok { Outcome::Survived } else { Outcome::Wipeout },
        reduced: ok.then_some(out),
        trace,
    })
}

/// Assign `x := v` in an arc consistent instance and restore AC, seeding
/// only the arcs leaving `x`. `None` on wipeout.
pub fn propagate_assignment(inst: &Instance, x: Var, v: Value) -> Option<Instance> {
    let mut out = inst.clone();
    out.assign_mut(x, v).ok()?;
    if out.has_empty_domain() {
        return None;
    }
    let adj = adjacency(&out);
    let mut queue = Queue::new(out.num_vars(), Schedule::Fifo);
    for &y in &adj[x] {
        queue.push(x, y);
    }
    let mut trace = Trace::default();
    propagate(&mut out, &mut queue, &adj, &mut trace).then_some(out)
}

fn probe_survives(inst: &Instance, x: Var, v: Value) -> bool {
    singleton_probe(inst, x, v).map(|r| r.survived()).unwrap_or(false)
}

/// Counters from a SAC run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SacStats {
    pub probes: usize,
    pub removals: usize,
}

/// Greatest SAC sub-instance (all domains empty if there is none).
pub fn enforce_sac(inst: &Instance) -> Instance {
    enforce_sac_stats(inst).0
}

/// SAC-1: probe points in canonical order, remove the first failing one,
/// restore AC and rescan from the start.
pub fn enforce_sac_stats(inst: &Instance) -> (Instance, SacStats) {
    let mut stats = SacStats::default();
    let (mut cur, _) = enforce_ac(inst);
    'scan: loop {
        if cur.has_empty_domain() {
            return (cur, stats);
        }
        for x in cur.vars() {
            let values: Vec<Value> = cur.domain(x).iter().copied().collect();
            for v in values {
                stats.probes += 1;
                if !probe_survives(&cur, x, v) {
                    stats.removals += 1;
                    cur.remove_value_mut(x, v).expect("value in domain");
                    cur = enforce_ac(&cur).0;
                    continue 'scan;
                }
            }
        }
        return (cur, stats);
    }
}

/// SAC with probes of a round run in parallel on `jobs` threads. Every
/// failing point of a round is removed before the next; the fixpoint is the
/// same as the sequential one.
pub fn enforce_sac_parallel(inst: &Instance, jobs: usize) -> (Instance, SacStats) {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .expect("thread pool");
    let mut stats = SacStats::default();
    let (mut cur, _) = enforce_ac(inst);
    loop {
        if cur.has_empty_domain() {
            return (cur, stats);
        }
        let points: Vec<(Var, Value)> = cur
            .vars()
            .flat_map(|x| cur.domain(x).iter().map(move |&v| (x, v)))
            .collect();
        stats.probes += points.len();
        let snapshot = &cur;
        let failing: Vec<(Var, Value)> = pool.install(|| {
            points
                .par_iter()
                .filter(|&&(x, v)| !probe_survives(snapshot, x, v))
                .copied()
                .collect()
        });
        if failing.is_empty() {
            return (cur, stats);
        }
        stats.removals += failing.len();
        for (x, v) in failing {
            cur.remove_value_mut(x, v).expect("value in domain");
        }
        cur = enforce_ac(&cur).0;
    }
}

/// True iff no domain is empty and every point survives its probe.
pub fn is_sac(inst: &Instance) -> bool {
    !inst.has_empty_domain()
        && inst
            .vars()
            .all(|x| inst.domain(x).iter().all(|&v| probe_survives(inst, x, v)))
}

/// `S`: the probed variable plus every variable whose domain was reduced.
/// `S_inner`: every variable that was the source of a removal.
pub fn trace_sets(trace: &Trace, x: Var) -> (BTreeSet<Var>, BTreeSet<Var>) {
    let mut s = BTreeSet::from([x]);
    let mut inner = BTreeSet::new();
    for step in &trace.steps {
        s.insert(step.target);
        inner.insert(step.source);
    }
    (s, inner)
}
