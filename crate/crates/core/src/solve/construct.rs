use std::collections::{BTreeSet, VecDeque};

use crate::catalog;
use crate::matching::occurs_at;
use crate::model::{Assignment, Instance, PointRef, Var};
use crate::propagate::{enforce_sac_stats, is_ac, is_sac, singleton_probe};

use super::{describe_witness, Method, SolveError, SolveReport, SolveStats, Sub};

/// Greedy construction on a SAC instance of a SAC-decided class: give each
/// variable in turn the first value whose assignment keeps the instance SAC.
pub fn sac_construct(inst: &Instance) -> Result<SolveReport, SolveError> {
    if !is_sac(inst) {
        return Err(SolveError::Precondition("instance is not singleton arc consistent".into()));
    }
    let mut stats = SolveStats::default();
    Ok(match construct_from_sac(inst, &mut stats) {
        Some(s) => SolveReport::sat(Method::SacConstruct, s, stats),
        None => {
            let mut r = SolveReport::unsat(Method::SacConstruct, stats);
            r.notes.push("no value kept the instance SAC; the instance is not decided by SAC".into());
            r
        }
    })
}

pub(crate) fn construct_from_sac(inst: &Instance, stats: &mut SolveStats) -> Option<Assignment> {
    let mut cur = inst.clone();
    let mut s = Assignment::new();
    for x in inst.vars() {
        let mut chosen = None;
        for &v in cur.domain(x) {
            let mut trial = cur.clone();
            trial.assign_mut(x, v).expect("value in domain");
            let (next, st) = enforce_sac_stats(&trial);
            stats.probes += st.probes;
            if !next.has_empty_domain() {
                chosen = Some((v, next));
                break;
            }
        }
        let (v, next) = chosen?;
        s.set(x, v);
        cur = next;
    }
    Some(s)
}

/// Solve an arc consistent instance whose non-trivial constraints form a
/// forest: each tree is rooted at its smallest variable, which takes its
/// first value, and every child takes the first support of its parent.
pub fn solve_acyclic(inst: &Instance) -> Result<SolveReport, SolveError> {
    if inst.has_empty_domain() {
        return Err(SolveError::Precondition("empty domain".into()));
    }
    if !inst.constraint_graph().is_forest() {
        return Err(SolveError::Precondition("constraint graph has a cycle".into()));
    }
    if !is_ac(inst) {
        return Err(SolveError::Precondition("instance is not arc consistent".into()));
    }
    let s = acyclic_assign(inst)?;
    Ok(SolveReport::sat(Method::Acyclic, s, SolveStats::default()))
}

/// Tree walk used by the class solvers. Fails with a lemma violation when
/// the structure the caller relied on is missing.
pub(crate) fn acyclic_assign(inst: &Instance) -> Result<Assignment, SolveError> {
    let graph = inst.constraint_graph();
    if !graph.is_forest() {
        return Err(SolveError::LemmaViolation("expected a forest of non-trivial constraints".into()));
    }
    let mut s = Assignment::new();
    for root in inst.vars() {
        if s.get(root).is_some() {
            continue;
        }
        let first = inst
            .domain(root)
            .first()
            .copied()
            .ok_or_else(|| SolveError::LemmaViolation(format!("variable {root} has an empty domain")))?;
        s.set(root, first);
        let mut queue = VecDeque::from([root]);
        while let Some(p) = queue.pop_front() {
            let pv = s.get(p).expect("assigned");
            for &c in graph.neighbours(p) {
                if s.get(c).is_some() {
                    continue;
                }
                let v = inst.supports(p, pv, c).next().ok_or_else(|| {
                    SolveError::LemmaViolation(format!("value {pv} of variable {p} has no support at {c}"))
                })?;
                s.set(c, v);
                queue.push_back(c);
            }
        }
    }
    Ok(s)
}

/// Reject instances in which V⁻ is centred at a variable of degree three or
/// more.
pub(crate) fn check_vminus_degree(inst: &Instance) -> Result<(), SolveError> {
    let pat = catalog::pattern("V-");
    let centre = PointRef::new(0, 0);
    let graph = inst.constraint_graph();
    for x in inst.vars().filter(|&x| graph.degree(x) >= 3) {
        for &v in inst.domain(x) {
            if let Some(w) = occurs_at(pat, centre, x, v, inst, false).expect("valid anchor") {
                return Err(SolveError::Precondition(format!(
                    "V- centred at variable {x} (degree {}): {}",
                    graph.degree(x),
                    describe_witness(&w)
                )));
            }
        }
    }
    Ok(())
}

/// Build a solution from independent partial solutions, for SAC instances
/// in which V⁻ occurs only at variables of degree at most two.
pub fn vminus_construct(inst: &Instance) -> Result<SolveReport, SolveError> {
    if inst.has_empty_domain() || !is_sac(inst) {
        return Err(SolveError::Precondition("instance is not singleton arc consistent".into()));
    }
    check_vminus_degree(inst)?;
    let mut stats = SolveStats::default();
    let s = vminus_assign(inst, &mut stats)?;
    super::check_certificate(inst, &s, "vminus_construct")?;
    Ok(SolveReport::sat(Method::VMinus, s, stats))
}

pub(crate) fn vminus_assign(inst: &Instance, stats: &mut SolveStats) -> Result<Assignment, SolveError> {
    let mut active: BTreeSet<Var> = inst.vars().collect();
    let mut s = Assignment::new();
    let degree = |active: &BTreeSet<Var>, x: Var| {
        active.iter().filter(|&&y| y != x && !inst.trivial(x, y)).count()
    };
    while let Some(&x1) = active.iter().find(|&&x| degree(&active, x) >= 3) {
        let a1 = *inst.domain(x1).first().expect("non-empty");
        let mut chain = vec![(x1, a1)];
        loop {
            let (xk, ak) = *chain.last().expect("non-empty");
            let next = active.iter().copied().find(|&y| {
                !chain.iter().any(|&(c, _)| c == y)
                    && inst.domain(y).iter().any(|&b| !inst.allowed(xk, ak, y, b))
            });
            let Some(y) = next else { break };
            let a = inst.supports(xk, ak, y).next().ok_or_else(|| {
                SolveError::LemmaViolation(format!("value {ak} of variable {xk} has no support at {y}"))
            })?;
            chain.push((y, a));
        }
        let fixed: BTreeSet<Var> = chain.iter().map(|&(x, _)| x).collect();
        for (x, a) in chain {
            s.set(x, a);
        }
        for x in &fixed {
            active.remove(x);
        }
        stats.rounds.push(fixed);
    }
    if !active.is_empty() {
        let rest = Sub::whole(inst.clone()).keep(&active);
        let part = degree_two_assign(&rest.inst, stats)?;
        s.extend_mapped(&part, &rest.map);
        stats.rounds.push(active);
    }
    Ok(s)
}

/// SAC instances of maximum degree two: paths directly, cycles after
/// probing one of their variables.
fn degree_two_assign(inst: &Instance, stats: &mut SolveStats) -> Result<Assignment, SolveError> {
    let mut s = Assignment::new();
    let whole = Sub::whole(inst.clone());
    for comp in inst.constraint_graph().components() {
        let part = whole.keep(&comp);
        let local = if part.inst.constraint_graph().is_forest() {
            acyclic_assign(&part.inst)?
        } else {
            let v = *part.inst.domain(0).first().expect("non-empty");
            stats.probes += 1;
            let probe = singleton_probe(&part.inst, 0, v).expect("value in domain");
            let reduced = probe
                .reduced
                .ok_or_else(|| SolveError::LemmaViolation("probe on a cycle wiped out".into()))?;
            acyclic_assign(&reduced)?
        };
        s.extend_mapped(&local, &part.map);
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::gen_kcoloring;
    use crate::solve::Status;

    #[test]
    fn trivial_instance_takes_first_values() {
        let inst = Instance::new(vec![vec![3, 5], vec![2], vec![7, 9]]);
        let r = sac_construct(&inst).unwrap();
        let s = r.certificate.unwrap();
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![(0, 3), (1, 2), (2, 7)]);
        let r = vminus_construct(&inst).unwrap();
        assert_eq!(r.certificate.unwrap(), s);
        assert_eq!(r.stats.rounds.len(), 1);
    }

    #[test]
    fn acyclic_chain_of_implications() {
        // x0 = 1 -> x1 = 1 -> x2 = 1, encoded by forbidding (1,0).
        let mut inst = Instance::new(vec![vec![0, 1]; 3]);
        inst.forbid(0, 1, [(1, 0)]).unwrap();
        inst.forbid(1, 2, [(1, 0)]).unwrap();
        inst.remove_value_mut(0, 0).unwrap();
        let (inst, _) = crate::propagate::enforce_ac(&inst);
        let s = solve_acyclic(&inst).unwrap().certificate.unwrap();
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![(0, 1), (1, 1), (2, 1)]);
    }

    #[test]
    fn acyclic_rejects_cycles() {
        let inst = gen_kcoloring(3, 3);
        assert!(matches!(solve_acyclic(&inst), Err(SolveError::Precondition(_))));
    }

    #[test]
    fn star_is_solved() {
        let mut inst = Instance::new(vec![vec![1, 2, 3]; 4]);
        for leaf in 1..4 {
            inst.forbid(0, leaf, [(1, 1), (2, 2), (3, 3)]).unwrap();
        }
        let s = solve_acyclic(&inst).unwrap().certificate.unwrap();
        assert!(inst.verify_solution(&s).unwrap());
    }

    #[test]
    fn sac_construct_on_even_cycle() {
        let mut inst = Instance::new(vec![vec![1, 2]; 4]);
        for (x, y) in [(0, 1), (1, 2), (2, 3), (0, 3)] {
            inst.forbid(x, y, [(1, 1), (2, 2)]).unwrap();
        }
        let r = sac_construct(&inst).unwrap();
        assert_eq!(r.status, Status::Sat);
        assert!(inst.verify_solution(r.certificate.as_ref().unwrap()).unwrap());
        let r = vminus_construct(&inst).unwrap();
        assert!(inst.verify_solution(r.certificate.as_ref().unwrap()).unwrap());
    }

    #[test]
    fn vminus_rejects_degree_three_centre() {
        // Variable 0 has three neighbours and conflicts with values at two.
        let mut inst = Instance::new(vec![vec![1, 2]; 4]);
        for y in 1..4 {
            inst.forbid(0, y, [(1, 1), (2, 2)]).unwrap();
        }
        match vminus_construct(&inst) {
            Err(SolveError::Precondition(msg)) => assert!(msg.contains("variable 0")),
            other => panic!("expected a precondition error, got {other:?}"),
        }
    }
}
