use crate::model::{Assignment, Instance, Var};
use crate::propagate::{enforce_ac, propagate_assignment};

use super::{Method, SolveReport, SolveStats};

/// Complete backtracking search maintaining arc consistency. Branches on the
/// smallest domain with more than one value (ties by index), values in
/// ascending order.
pub fn oracle_solve(inst: &Instance) -> SolveReport {
    let mut stats = SolveStats::default();
    let (root, _) = enforce_ac(inst);
    if root.has_empty_domain() {
        return SolveReport::unsat(Method::Oracle, stats);
    }
    match search(&root, &mut stats) {
        Some(s) => SolveReport::sat(Method::Oracle, s, stats),
        None => SolveReport::unsat(Method::Oracle, stats),
    }
}

fn branch_var(inst: &Instance) -> Option<Var> {
    inst.vars()
        .filter(|&x| inst.domain(x).len() > 1)
        .min_by_key(|&x| (inst.domain(x).len(), x))
}

fn search(inst: &Instance, stats: &mut SolveStats) -> Option<Assignment> {
    stats.nodes += 1;
    let Some(x) = branch_var(inst) else {
        // Arc consistent with singleton domains: every pair is allowed.
        return Some(
            inst.vars()
                .map(|y| (y, *inst.domain(y).first().expect("non-empty")))
                .collect(),
        );
    };
    for &v in inst.domain(x) {
        if let Some(next) = propagate_assignment(inst, x, v) {
            if let Some(s) = search(&next, stats) {
                return Some(s);
            }
        }
    }
    None
}
