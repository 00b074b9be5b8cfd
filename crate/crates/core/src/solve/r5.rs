use crate::model::{Assignment, Instance, Value, Var};
use crate::propagate::enforce_sac_stats;
use crate::transform::delete_constraint;

use super::construct::construct_from_sac;
use super::{check_certificate, require_free, Method, SolveError, SolveReport, SolveStats};

fn sac_or_unsat(inst: &Instance, method: Method) -> Result<Result<(Instance, SolveStats), SolveReport>, SolveError> {
    require_free("R5", inst)?;
    let mut stats = SolveStats::default();
    let (sac, st) = enforce_sac_stats(inst);
    stats.probes += st.probes;
    if sac.has_empty_domain() {
        return Ok(Err(SolveReport::unsat(method, stats)));
    }
    Ok(Ok((sac, stats)))
}

/// R5-free instances, certificate from [`super::sac_construct`].
pub fn solve_r5(inst: &Instance) -> Result<SolveReport, SolveError> {
    let (sac, mut stats) = match sac_or_unsat(inst, Method::R5)? {
        Ok(v) => v,
        Err(r) => return Ok(r),
    };
    let s = construct_from_sac(&sac, &mut stats)
        .ok_or_else(|| SolveError::LemmaViolation("R5-free SAC instance has no greedy SAC construction".into()))?;
    check_certificate(inst, &s, "solve_r5")?;
    Ok(SolveReport::sat(Method::R5, s, stats))
}

/// R5-free instances, certificate built by deleting every constraint and
/// repairing the trivial solution while the constraints are put back.
pub fn solve_r5_repair(inst: &Instance) -> Result<SolveReport, SolveError> {
    let (sac, stats) = match sac_or_unsat(inst, Method::R5Repair)? {
        Ok(v) => v,
        Err(r) => return Ok(r),
    };
    let pairs: Vec<(Var, Var)> = sac.constrained_pairs().collect();
    let mut stages = vec![sac];
    for &(x, y) in &pairs {
        let next = delete_constraint(stages.last().expect("non-empty"), x, y)?;
        stages.push(next);
    }
    let last = stages.last().expect("non-empty");
    let mut s: Assignment = last
        .vars()
        .map(|x| (x, *last.domain(x).first().expect("non-empty")))
        .collect();
    for (k, &(x, y)) in pairs.iter().enumerate().rev() {
        s = repair_r5(&stages[k], &s, x, y)?;
    }
    check_certificate(inst, &s, "solve_r5 repair")?;
    Ok(SolveReport::sat(Method::R5Repair, s, stats))
}

fn compatible(inst: &Instance, s: &Assignment, x: Var, v: Value) -> bool {
    s.iter()
        .filter(|&(w, _)| w != x)
        .all(|(w, e)| inst.allowed(x, v, w, e))
}

/// Turn a solution of `inst` without `R(x,y)` into a solution of `inst`,
/// changing at most the values of `x`, `y` and one other variable.
pub fn repair_r5(inst: &Instance, s: &Assignment, x: Var, y: Var) -> Result<Assignment, SolveError> {
    let value = |v: Var| {
        s.get(v)
            .ok_or_else(|| SolveError::Precondition(format!("variable {v} is unassigned")))
    };
    let (a, b) = (value(x)?, value(y)?);
    if inst.allowed(x, a, y, b) {
        return Ok(s.clone());
    }
    let cs: Vec<Value> = inst.supports(y, b, x).collect();
    let mut out = s.clone();
    if let Some(&c) = cs.iter().find(|&&c| compatible(inst, s, x, c)) {
        out.set(x, c);
        return Ok(out);
    }
    let c = *cs
        .first()
        .ok_or_else(|| SolveError::Precondition(format!("value {b} of variable {y} has no support at {x}")))?;
    let w = s
        .iter()
        .map(|(w, _)| w)
        .find(|&w| w != x && w != y && !inst.allowed(x, c, w, s.get(w).expect("assigned")))
        .expect("c is blocked by some variable");
    let e = value(w)?;
    let pair = inst.supports(x, a, y).find_map(|d| {
        inst.supports(x, a, w)
            .find(|&g| inst.allowed(y, d, w, g))
            .map(|g| (d, g))
    });
    let (d, g) = pair.ok_or_else(|| {
        SolveError::Precondition(format!("no compatible pair at ({y},{w}) for value {a} of {x}"))
    })?;
    out.set(y, d);
    if !inst.allowed(y, d, w, e) {
        out.set(w, g);
    }
    if !inst.is_consistent(&out) {
        return Err(SolveError::Precondition(format!(
            "repair of constraint ({x},{y}) failed; instance is not SAC or contains R5"
        )));
    }
    Ok(out)
}
