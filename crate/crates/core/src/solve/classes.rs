use std::collections::BTreeSet;

use crate::catalog;
use crate::matching::occurs;
use crate::model::{Assignment, Instance, Value, Var};
use crate::propagate::{enforce_sac_stats, singleton_probe, trace_sets, ProbeResult};
use crate::transform::{btp_merge_fixpoint, ns_eliminate};

use super::construct::{acyclic_assign, check_vminus_degree, construct_from_sac, vminus_assign};
use super::lemmas::{self, closed_neighbourhood};
use super::{check_certificate, describe_witness, require_free, Method, SolveError, SolveReport, SolveStats, Sub};

/// SAC closure of the input, or `None` after a wipeout.
fn sac_closure(inst: &Instance, stats: &mut SolveStats) -> Option<Instance> {
    let (out, st) = enforce_sac_stats(inst);
    stats.probes += st.probes;
    (!out.has_empty_domain()).then_some(out)
}

fn lemma(r: Result<(), String>) -> Result<(), SolveError> {
    if cfg!(debug_assertions) {
        r.map_err(SolveError::LemmaViolation)
    } else {
        Ok(())
    }
}

fn probe_sac(inst: &Instance, x: Var, v: Value, stats: &mut SolveStats) -> Result<(ProbeResult, Instance), SolveError> {
    stats.probes += 1;
    let probe = singleton_probe(inst, x, v).expect("value in domain");
    let reduced = probe
        .reduced
        .clone()
        .ok_or_else(|| SolveError::LemmaViolation(format!("probe ({x},{v}) of a SAC instance wiped out")))?;
    Ok((probe, reduced))
}

fn construct_or_fail(inst: &Instance, stats: &mut SolveStats, class: &str) -> Result<Assignment, SolveError> {
    construct_from_sac(inst, stats).ok_or_else(|| {
        SolveError::LemmaViolation(format!("SAC instance of class {class} has no greedy SAC construction"))
    })
}

fn first_value(inst: &Instance, x: Var) -> Value {
    *inst.domain(x).first().expect("non-empty domain")
}

/// Q1-free instances. Decides by repeatedly probing the first variable and
/// dropping the inner variables of the trace; the certificate comes from
/// [`super::sac_construct`].
pub fn solve_q1(inst: &Instance) -> Result<SolveReport, SolveError> {
    require_free("Q1", inst)?;
    let mut stats = SolveStats::default();
    let Some(sac) = sac_closure(inst, &mut stats) else {
        return Ok(SolveReport::unsat(Method::Q1, stats));
    };
    let mut notes = Vec::new();
    let mut sub = Sub::whole(sac.clone());
    while sub.inst.num_vars() > 0 {
        let v = first_value(&sub.inst, 0);
        let (probe, reduced) = probe_sac(&sub.inst, 0, v, &mut stats)?;
        lemma(lemmas::q1_probe_structure(&reduced, &probe.trace, 0))?;
        let (_, inner) = trace_sets(&probe.trace, 0);
        let drop = if inner.is_empty() {
            notes.push(format!("probe of x{}={v} propagated nothing; variable fixed", sub.map[0]));
            BTreeSet::from([0])
        } else {
            inner
        };
        stats.rounds.push(sub.original(&drop));
        sub = sub.without(&drop);
    }
    let s = construct_or_fail(&sac, &mut stats, "Q1")?;
    check_certificate(inst, &s, "solve_q1")?;
    let mut r = SolveReport::sat(Method::Q1, s, stats);
    r.notes = notes;
    Ok(r)
}

/// R8-free instances. Each round probes the first variable, removes
/// neighbourhood-substitutable values, solves the stars around the trace
/// and continues on the untouched rest.
pub fn solve_r8(inst: &Instance) -> Result<SolveReport, SolveError> {
    require_free("R8", inst)?;
    let mut stats = SolveStats::default();
    let Some(sac) = sac_closure(inst, &mut stats) else {
        return Ok(SolveReport::unsat(Method::R8, stats));
    };
    let mut s = Assignment::new();
    let mut sub = Sub::whole(sac);
    while sub.inst.num_vars() > 0 {
        let v = first_value(&sub.inst, 0);
        let (probe, reduced) = probe_sac(&sub.inst, 0, v, &mut stats)?;
        let (in_trace, _) = trace_sets(&probe.trace, 0);
        let (cleaned, _) = ns_eliminate(&reduced);
        lemma(lemmas::r8_star_structure(&cleaned, &in_trace))?;
        let x1 = closed_neighbourhood(&cleaned.constraint_graph(), &in_trace);
        let cleaned = Sub { inst: cleaned, map: sub.map.clone() };
        let stars = cleaned.keep(&x1);
        let part = acyclic_assign(&stars.inst)?;
        s.extend_mapped(&part, &stars.map);
        stats.rounds.push(stars.map.iter().copied().collect());
        sub = cleaned.without(&x1);
    }
    check_certificate(inst, &s, "solve_r8")?;
    Ok(SolveReport::sat(Method::R8, s, stats))
}

/// R7--free instances. Probes the meet value of an M̂ occurrence (or of V₂
/// when M̂ is absent), recurses on the variables untouched by propagation
/// and stitches the probed part back. V₂-free leftovers go to
/// [`super::sac_construct`].
pub fn solve_r7m(inst: &Instance) -> Result<SolveReport, SolveError> {
    require_free("R7-", inst)?;
    let mut stats = SolveStats::default();
    let Some(sac) = sac_closure(inst, &mut stats) else {
        return Ok(SolveReport::unsat(Method::R7m, stats));
    };
    let s = r7m_rec(&Sub::whole(sac), &mut stats)?;
    check_certificate(inst, &s, "solve_r7m")?;
    Ok(SolveReport::sat(Method::R7m, s, stats))
}

fn r7m_rec(sub: &Sub, stats: &mut SolveStats) -> Result<Assignment, SolveError> {
    let inst = &sub.inst;
    if inst.num_vars() == 0 {
        return Ok(Assignment::new());
    }
    let Some(b) = lemmas::branch_point(inst) else {
        stats.rounds.push(sub.map.iter().copied().collect());
        return construct_or_fail(inst, stats, "V2-free").map(|s| {
            let mut out = Assignment::new();
            out.extend_mapped(&s, &sub.map);
            out
        });
    };
    let (probe, reduced) = probe_sac(inst, b.mid, b.value, stats)?;
    let (in_trace, _) = trace_sets(&probe.trace, b.mid);
    lemma(lemmas::r7m_near_trivial(&reduced, &in_trace, b.ends.0, b.ends.1))?;
    stats.rounds.push(sub.original(&in_trace));
    let mut s = r7m_rec(&sub.without(&in_trace), stats)?;
    // Local view of the recursive solution, then extend over the trace.
    let mut local = Assignment::new();
    for x in inst.vars().filter(|x| !in_trace.contains(x)) {
        local.set(x, s.get(sub.map[x]).expect("solved by recursion"));
    }
    for &p in &in_trace {
        let v = reduced
            .domain(p)
            .iter()
            .copied()
            .find(|&v| local.iter().all(|(q, w)| reduced.allowed(p, v, q, w)))
            .ok_or_else(|| SolveError::LemmaViolation(format!("no consistent value for variable {} after branching", sub.map[p])))?;
        local.set(p, v);
    }
    for &p in &in_trace {
        s.set(sub.map[p], local.get(p).expect("set above"));
    }
    Ok(s)
}

/// Q2-free instances: SAC, BTP-merging to convergence, independent partial
/// solutions, then expansion of merged values.
pub fn solve_q2(inst: &Instance) -> Result<SolveReport, SolveError> {
    require_free("Q2", inst)?;
    let mut stats = SolveStats::default();
    let Some(sac) = sac_closure(inst, &mut stats) else {
        return Ok(SolveReport::unsat(Method::Q2, stats));
    };
    let (merged, log) = btp_merge_fixpoint(&sac);
    check_vminus_degree(&merged).map_err(|e| SolveError::LemmaViolation(e.to_string()))?;
    let s = vminus_assign(&merged, &mut stats)?;
    let s = log.expand_solution(&sac, &s)?;
    check_certificate(inst, &s, "solve_q2")?;
    let mut r = SolveReport::sat(Method::Q2, s, stats);
    if !log.is_empty() {
        r.notes.push(format!("{} BTP merges", log.records.len()));
    }
    Ok(r)
}

/// T3-free instances: SAC and neighbourhood substitution to a common
/// fixpoint, after which T4 cannot occur.
pub fn solve_t3(inst: &Instance) -> Result<SolveReport, SolveError> {
    require_free("T3", inst)?;
    let mut stats = SolveStats::default();
    let Some(sac) = sac_closure(inst, &mut stats) else {
        return Ok(SolveReport::unsat(Method::T3, stats));
    };
    let reduced = lemmas::ns_sac_fixpoint(&sac);
    if reduced.has_empty_domain() {
        return Err(SolveError::LemmaViolation("SAC lost after removing substitutable values".into()));
    }
    if let Some(w) = occurs(catalog::pattern("T4"), &reduced, false) {
        return Err(SolveError::LemmaViolation(format!(
            "T4 occurs in the SAC, NS-free reduction: {}",
            describe_witness(&w)
        )));
    }
    let s = construct_or_fail(&reduced, &mut stats, "T3")?;
    check_certificate(inst, &s, "solve_t3")?;
    Ok(SolveReport::sat(Method::T3, s, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{gen_kcoloring, gen_pattern_free};
    use crate::solve::{oracle_solve, Status};

    type Solver = fn(&Instance) -> Result<SolveReport, SolveError>;

    const SOLVERS: [(&str, Solver); 5] =
        [("Q1", solve_q1), ("Q2", solve_q2), ("R8", solve_r8), ("R7-", solve_r7m), ("T3", solve_t3)];

    #[test]
    fn empty_and_trivial_instances() {
        let trivial = Instance::new(vec![vec![2, 4], vec![1]]);
        for (name, solve) in SOLVERS {
            let r = solve(&Instance::default()).unwrap();
            assert_eq!(r.status, Status::Sat, "{name}");
            let r = solve(&trivial).unwrap();
            assert_eq!(r.certificate.unwrap().iter().collect::<Vec<_>>(), vec![(0, 2), (1, 1)], "{name}");
        }
    }

    #[test]
    fn rejects_instances_containing_the_pattern() {
        let k4 = gen_kcoloring(4, 3);
        for (name, solve) in SOLVERS {
            if name == "T3" {
                continue;
            }
            assert!(matches!(solve(&k4), Err(SolveError::PatternOccurs { .. })), "{name}");
        }
    }

    #[test]
    fn agree_with_oracle_on_a_few_random_instances() {
        for (name, solve) in SOLVERS {
            let pat = catalog::pattern(name);
            for seed in 0..15 {
                let p = crate::instances::GenParams {
                    n_vars: 5,
                    domain_size: 3,
                    constraint_density: 0.5,
                    tightness: 0.5,
                    seed,
                };
                let Some(inst) = gen_pattern_free(pat, &p, 200).unwrap() else { continue };
                let r = solve(&inst).unwrap_or_else(|e| panic!("{name} seed {seed}: {e}"));
                assert_eq!(r.status, oracle_solve(&inst).status, "{name} seed {seed}");
            }
        }
    }
}
