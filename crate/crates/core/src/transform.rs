//! Satisfiability-preserving reductions: neighbourhood substitution,
//! BTP-merging and constraint deletion.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::model::{Assignment, Instance, ModelError, Value, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("values {a} and {b} of variable {var} must be distinct")]
    SameValue { var: Var, a: Value, b: Value },
    #[error("values {a} and {b} of variable {var} are not BTP-mergeable")]
    NotMergeable { var: Var, a: Value, b: Value },
    #[error("merged value {value} of variable {var} has no valid expansion")]
    NoExpansion { var: Var, value: Value },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransformRecord {
    /// `value` removed from `D(var)` because `by` can replace it.
    NsRemoved { var: Var, value: Value, by: Value },
    /// `a` and `b` replaced by the fresh value `into`.
    Merged { var: Var, a: Value, b: Value, into: Value },
    ConstraintDeleted { x: Var, y: Var },
}

impl fmt::Display for TransformRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            TransformRecord::NsRemoved { var, value, by } => {
                write!(f, "ns_removed x{var}={value} by {by}")
            }
            TransformRecord::Merged { var, a, b, into } => {
                write!(f, "merged x{var} {a},{b} -> {into}")
            }
            TransformRecord::ConstraintDeleted { x, y } => write!(f, "constraint_deleted x{x} x{y}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TransformLog {
    pub records: Vec<TransformRecord>,
}

impl TransformLog {
    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn extend(&mut self, other: TransformLog) {
        self.records.extend(other.records);
    }

    /// Apply every record in order.
    pub fn replay(&self, inst: &Instance) -> Result<Instance, TransformError> {
        let mut cur = inst.clone();
        for r in &self.records {
            cur = apply(&cur, r)?;
        }
        Ok(cur)
    }

    /// Map a solution of the transformed instance back to a solution of
    /// `original`. Merged values are expanded newest first; a deleted
    /// constraint is not repaired here.
    pub fn expand_solution(
        &self,
        original: &Instance,
        solution: &Assignment,
    ) -> Result<Assignment, TransformError> {
        let mut stages = vec![original.clone()];
        for r in &self.records {
            let next = apply(stages.last().expect("non-empty"), r)?;
            stages.push(next);
        }
        let mut s = solution.clone();
        for (k, r) in self.records.iter().enumerate().rev() {
            if let TransformRecord::Merged { var, a, b, into } = *r {
                if s.get(var) != Some(into) {
                    continue;
                }
                let before = &stages[k];
                let pick = [a, b].into_iter().find(|&v| {
                    s.iter()
                        .filter(|&(y, _)| y != var)
                        .all(|(y, w)| before.allowed(var, v, y, w))
                });
                match pick {
                    Some(v) => s.set(var, v),
                    None => return Err(TransformError::NoExpansion { var, value: into }),
                }
            }
        }
        Ok(s)
    }
}

impl fmt::Display for TransformLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.records {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

fn apply(inst: &Instance, r: &TransformRecord) -> Result<Instance, TransformError> {
    match *r {
        TransformRecord::NsRemoved { var, value, .. } => Ok(inst.remove_value(var, value)?),
        TransformRecord::Merged { var, a, b, .. } => Ok(btp_merge(inst, var, a, b)?.0),
        TransformRecord::ConstraintDeleted { x, y } => delete_constraint(inst, x, y),
    }
}

fn check_pair(inst: &Instance, x: Var, a: Value, b: Value) -> Result<(), TransformError> {
    if x >= inst.num_vars() {
        return Err(ModelError::UnknownVariable(x).into());
    }
    for v in [a, b] {
        if !inst.domain(x).contains(&v) {
            return Err(ModelError::ValueNotInDomain { var: x, value: v }.into());
        }
    }
    if a == b {
        return Err(TransformError::SameValue { var: x, a, b });
    }
    Ok(())
}

/// True iff `b` is compatible with everything `a` is compatible with.
pub fn is_ns(inst: &Instance, x: Var, a: Value, b: Value) -> Result<bool, TransformError> {
    check_pair(inst, x, a, b)?;
    Ok(ns_unchecked(inst, x, a, b))
}

fn ns_unchecked(inst: &Instance, x: Var, a: Value, b: Value) -> bool {
    inst.neighbours(x).into_iter().all(|y| {
        inst.domain(y)
            .iter()
            .all(|&c| !inst.allowed(x, a, y, c) || inst.allowed(x, b, y, c))
    })
}

/// First `(x,a,b)` in lexicographic order such that `a` can be removed in
/// favour of `b`. Of two mutually substitutable values the smaller is kept.
fn first_ns(inst: &Instance) -> Option<(Var, Value, Value)> {
    for x in inst.vars() {
        for &a in inst.domain(x) {
            for &b in inst.domain(x) {
                if a == b || !ns_unchecked(inst, x, a, b) {
                    continue;
                }
                if a < b && ns_unchecked(inst, x, b, a) {
                    continue;
                }
                return Some((x, a, b));
            }
        }
    }
    None
}

/// Remove substitutable values until none remain.
pub fn ns_eliminate(inst: &Instance) -> (Instance, TransformLog) {
    let mut cur = inst.clone();
    let mut log = TransformLog::default();
    while let Some((x, a, b)) = first_ns(&cur) {
        cur.remove_value_mut(x, a).expect("value in domain");
        log.records.push(TransformRecord::NsRemoved { var: x, value: a, by: b });
    }
    (cur, log)
}

/// A broken triangle on `a,b`: `c` at `y` and `d` at `z` with `ad, bc, cd`
/// allowed and `ac, bd` forbidden.
fn broken_triangle(inst: &Instance, x: Var, a: Value, b: Value, nbrs: &[Var]) -> bool {
    for &y in nbrs {
        for &c in inst.domain(y) {
            if inst.allowed(x, a, y, c) || !inst.allowed(x, b, y, c) {
                continue;
            }
            for &z in nbrs {
                if z == y {
                    continue;
                }
                let found = inst.domain(z).iter().any(|&d| {
                    inst.allowed(x, a, z, d) && !inst.allowed(x, b, z, d) && inst.allowed(y, c, z, d)
                });
                if found {
                    return true;
                }
            }
        }
    }
    false
}

fn mergeable_unchecked(inst: &Instance, x: Var, a: Value, b: Value) -> bool {
    // forbidden pairs can only sit on non-trivial constraints of x
    let nbrs = inst.neighbours(x);
    !broken_triangle(inst, x, a, b, &nbrs) && !broken_triangle(inst, x, b, a, &nbrs)
}

/// True iff no broken triangle exists on `a,b` in either orientation.
pub fn btp_mergeable(inst: &Instance, x: Var, a: Value, b: Value) -> Result<bool, TransformError> {
    check_pair(inst, x, a, b)?;
    Ok(mergeable_unchecked(inst, x, a, b))
}

/// Replace `a,b` by a fresh value `max(D(x))+1` whose compatibilities are
/// the union of theirs.
pub fn btp_merge(inst: &Instance, x: Var, a: Value, b: Value) -> Result<(Instance, TransformLog), TransformError> {
    check_pair(inst, x, a, b)?;
    if !mergeable_unchecked(inst, x, a, b) {
        return Err(TransformError::NotMergeable { var: x, a, b });
    }
    let fresh = inst.domain(x).iter().next_back().expect("non-empty") + 1;
    let compatible: BTreeSet<(Var, Value)> = inst
        .vars()
        .filter(|&y| y != x)
        .flat_map(|y| inst.domain(y).iter().map(move |&c| (y, c)))
        .filter(|&(y, c)| inst.allowed(x, a, y, c) || inst.allowed(x, b, y, c))
        .collect();
    let mut out = inst.clone();
    out.add_value_with(x, fresh, |y, c| compatible.contains(&(y, c)));
    out.remove_value_mut(x, a)?;
    out.remove_value_mut(x, b)?;
    let log = TransformLog {
        records: vec![TransformRecord::Merged { var: x, a, b, into: fresh }],
    };
    Ok((out, log))
}

fn first_mergeable(inst: &Instance) -> Option<(Var, Value, Value)> {
    for x in inst.vars() {
        let dom: Vec<Value> = inst.domain(x).iter().copied().collect();
        for (i, &a) in dom.iter().enumerate() {
            for &b in &dom[i + 1..] {
                if mergeable_unchecked(inst, x, a, b) {
                    return Some((x, a, b));
                }
            }
        }
    }
    None
}

/// Merge the first mergeable pair in lexicographic order until none remain.
pub fn btp_merge_fixpoint(inst: &Instance) -> (Instance, TransformLog) {
    let mut cur = inst.clone();
    let mut log = TransformLog::default();
    while let Some((x, a, b)) = first_mergeable(&cur) {
        let (next, l) = btp_merge(&cur, x, a, b).expect("found mergeable");
        cur = next;
        log.extend(l);
    }
    (cur, log)
}

/// Replace `R(x,y)` by the trivial constraint.
pub fn delete_constraint(inst: &Instance, x: Var, y: Var) -> Result<Instance, TransformError> {
    inst.is_trivial(x, y)?;
    let mut out = inst.clone();
    out.clear_constraint(x, y);
    Ok(out)
}
