use sacpat::catalog;
use sacpat::instances::{counterexamples, gen_implication_gadget, gen_kcoloring, gen_pad_all, gen_pattern_free};
use sacpat::propagate::{enforce_sac, is_sac};
use sacpat::solve::{oracle_solve, solve_class, solve_q1, solve_r8, SolverClass, Status};
use sacpat::verify::sweep_params;

fn pattern_free(name: &str, base_seed: u64, count: usize) -> Vec<sacpat::model::Instance> {
    let pat = catalog::pattern(name);
    (0..10_000)
        .filter_map(|i| gen_pattern_free(pat, &sweep_params(i, base_seed), 50).unwrap())
        .take(count)
        .collect()
}

#[test]
fn sac_survivors_are_solved() {
    for class in SolverClass::ORDER {
        let name = class.pattern().unwrap();
        for inst in pattern_free(name, 100, 60) {
            let survives = !enforce_sac(&inst).has_empty_domain();
            let r = solve_class(&inst, class, false).unwrap_or_else(|e| panic!("{class}: {e}"));
            assert_eq!(r.status == Status::Sat, survives, "{class}");
            if let Some(s) = &r.certificate {
                assert!(inst.verify_solution(s).unwrap(), "{class}");
            }
            assert_eq!(solve_class(&inst, class, false).unwrap(), r, "{class} not deterministic");
        }
    }
}

#[test]
fn r5_repair_path_agrees() {
    for inst in pattern_free("R5", 200, 60) {
        let plain = solve_class(&inst, SolverClass::R5, false).unwrap();
        let repair = solve_class(&inst, SolverClass::R5, true).unwrap();
        assert_eq!(plain.status, repair.status);
        if let Some(s) = &repair.certificate {
            assert!(inst.verify_solution(s).unwrap());
        }
    }
}

#[test]
fn q1_rounds_partition_the_variables() {
    for inst in pattern_free("Q1", 300, 60) {
        let r = solve_q1(&inst).unwrap();
        if r.status == Status::Unsat {
            continue;
        }
        let mut seen = std::collections::BTreeSet::new();
        for round in &r.stats.rounds {
            assert!(!round.is_empty());
            assert!(round.is_disjoint(&seen));
            seen.extend(round.iter().copied());
        }
        assert_eq!(seen.len(), inst.num_vars());
    }
}

#[test]
fn r8_rounds_start_at_the_first_remaining_variable() {
    for inst in pattern_free("R8", 400, 60) {
        let r = solve_r8(&inst).unwrap();
        if r.status == Status::Unsat {
            continue;
        }
        let mut remaining: std::collections::BTreeSet<_> = inst.vars().collect();
        for round in &r.stats.rounds {
            let first = *remaining.first().unwrap();
            assert!(round.contains(&first));
            for x in round {
                assert!(remaining.remove(x));
            }
        }
        assert!(remaining.is_empty());
        assert!(r.stats.rounds.len() <= inst.num_vars());
    }
}

#[test]
fn padding_keeps_counterexamples_sac_and_unsat() {
    for k in [1, 3, 5] {
        for (name, inst) in counterexamples() {
            let padded = gen_pad_all(&inst, k).unwrap();
            assert!(is_sac(&padded), "{name} k={k}");
            assert_eq!(oracle_solve(&padded).status, Status::Unsat, "{name} k={k}");
        }
    }
    let triangle = gen_pad_all(&gen_kcoloring(3, 3), 3).unwrap();
    assert_eq!(oracle_solve(&triangle).status, Status::Sat);
}

#[test]
fn gadgets_are_sac_and_unsat() {
    for biconditional in [false, true] {
        let g = gen_implication_gadget(biconditional);
        assert!(is_sac(&g));
        assert_eq!(oracle_solve(&g).status, Status::Unsat);
    }
}
