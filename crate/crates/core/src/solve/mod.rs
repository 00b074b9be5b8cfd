//! Deciding and solving instances: a MAC oracle, a generic SAC-backed
//! constructor, an acyclic solver and one procedure per tractable class.

mod classes;
mod construct;
mod dispatch;
pub mod lemmas;
mod oracle;
mod r5;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::matching::OccurrenceWitness;
use crate::model::{Assignment, Instance, ModelError, Value, Var};
use crate::transform::TransformError;

pub use classes::{solve_q1, solve_q2, solve_r7m, solve_r8, solve_t3};
pub use construct::{sac_construct, solve_acyclic, vminus_construct};
pub use dispatch::{auto_solve, classify, solve_class, Classification, SolverClass};
pub use oracle::oracle_solve;
pub use r5::{repair_r5, solve_r5, solve_r5_repair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Sat,
    Unsat,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Sat => "sat",
            Status::Unsat => "unsat",
        })
    }
}

/// The procedure that produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Oracle,
    SacConstruct,
    Acyclic,
    VMinus,
    Q1,
    Q2,
    R5,
    R5Repair,
    R8,
    R7m,
    T3,
    /// A pattern class decided by SAC and solved with [`sac_construct`].
    SacClass(&'static str),
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Oracle => f.write_str("oracle"),
            Method::SacConstruct => f.write_str("sac_construct"),
            Method::Acyclic => f.write_str("solve_acyclic"),
            Method::VMinus => f.write_str("vminus_construct"),
            Method::Q1 => f.write_str("solve_q1"),
            Method::Q2 => f.write_str("solve_q2"),
            Method::R5 => f.write_str("solve_r5"),
            Method::R5Repair => f.write_str("solve_r5(repair)"),
            Method::R8 => f.write_str("solve_r8"),
            Method::R7m => f.write_str("solve_r7m"),
            Method::T3 => f.write_str("solve_t3"),
            Method::SacClass(p) => write!(f, "sac_construct({p})"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct SolveStats {
    /// Singleton probes, including those made while enforcing SAC.
    pub probes: usize,
    /// Search nodes (oracle only).
    pub nodes: usize,
    /// Variables removed in each round of a reduction loop, as indices of
    /// the input instance.
    pub rounds: Vec<BTreeSet<Var>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveReport {
    pub status: Status,
    pub certificate: Option<Assignment>,
    pub method: Method,
    pub stats: SolveStats,
    /// Diagnostics about unusual paths taken.
    pub notes: Vec<String>,
}

impl SolveReport {
    fn sat(method: Method, certificate: Assignment, stats: SolveStats) -> Self {
        SolveReport { status: Status::Sat, certificate: Some(certificate), method, stats, notes: Vec::new() }
    }

    fn unsat(method: Method, stats: SolveStats) -> Self {
        SolveReport { status: Status::Unsat, certificate: None, method, stats, notes: Vec::new() }
    }

    pub fn is_sat(&self) -> bool {
        self.status == Status::Sat
    }
}

impl fmt::Display for SolveReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.status)?;
        if let Some(c) = &self.certificate {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("pattern {pattern} occurs: {witness}")]
    PatternOccurs { pattern: &'static str, witness: String },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("structural lemma violated: {0}")]
    LemmaViolation(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Transform(#[from] TransformError),
}

pub(crate) fn describe_witness(w: &OccurrenceWitness<Value>) -> String {
    let parts: Vec<String> = w
        .var_map
        .iter()
        .zip(&w.point_map)
        .map(|(x, pts)| {
            let vals: Vec<String> = pts.iter().map(|v| v.to_string()).collect();
            format!("x{x}:{{{}}}", vals.join(","))
        })
        .collect();
    parts.join(" ")
}

/// Reject inputs in which the named catalog pattern occurs.
pub(crate) fn require_free(name: &'static str, inst: &Instance) -> Result<(), SolveError> {
    let pat = crate::catalog::pattern(name);
    match crate::matching::occurs(pat, inst, false) {
        Some(w) => Err(SolveError::PatternOccurs { pattern: name, witness: describe_witness(&w) }),
        None => Ok(()),
    }
}

/// A sub-instance together with the original index of each variable.
#[derive(Debug, Clone)]
pub(crate) struct Sub {
    pub inst: Instance,
    pub map: Vec<Var>,
}

impl Sub {
    pub fn whole(inst: Instance) -> Self {
        let map = inst.vars().collect();
        Sub { inst, map }
    }

    /// Keep the local variables in `keep`.
    pub fn keep(&self, keep: &BTreeSet<Var>) -> Sub {
        let inst = self.inst.project(keep).expect("local indices");
        let map = keep.iter().map(|&x| self.map[x]).collect();
        Sub { inst, map }
    }

    /// Drop the local variables in `drop`.
    pub fn without(&self, drop: &BTreeSet<Var>) -> Sub {
        let keep = self.inst.vars().filter(|x| !drop.contains(x)).collect();
        self.keep(&keep)
    }

    pub fn original(&self, local: &BTreeSet<Var>) -> BTreeSet<Var> {
        local.iter().map(|&x| self.map[x]).collect()
    }
}

/// Fail with a lemma violation unless `s` solves `inst`.
pub(crate) fn check_certificate(inst: &Instance, s: &Assignment, what: &str) -> Result<(), SolveError> {
    if inst.verify_solution(s)? {
        Ok(())
    } else {
        Err(SolveError::LemmaViolation(format!("{what}: assignment does not solve the instance")))
    }
}
