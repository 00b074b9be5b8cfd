use std::collections::BTreeSet;

use proptest::prelude::*;

use sacpat::catalog::list_patterns;
use sacpat::instances::{gen_random, GenParams};
use sacpat::matching::{drop_dangling, merge_first, occurs, verify_witness};
use sacpat::model::{parse_instance, serialize_instance, Instance, Pattern};
use sacpat::propagate::{enforce_ac, enforce_ac_with, enforce_sac, enforce_sac_parallel, is_ac, is_sac, Schedule};
use sacpat::solve::{auto_solve, oracle_solve};
use sacpat::transform::{btp_merge_fixpoint, delete_constraint, ns_eliminate};

fn params(max_vars: usize) -> impl Strategy<Value = GenParams> {
    (0..=max_vars, 1..=4usize, 0.0..=1.0f64, 0.0..=1.0f64, any::<u64>()).prop_map(|(n, d, density, tightness, seed)| {
        GenParams { n_vars: n, domain_size: d, constraint_density: density, tightness, seed }
    })
}

fn instance(max_vars: usize) -> impl Strategy<Value = Instance> {
    params(max_vars).prop_map(|p| gen_random(&p).unwrap())
}

fn catalog_pattern() -> impl Strategy<Value = (&'static str, &'static Pattern)> {
    (0..list_patterns().len()).prop_map(|i| {
        let e = &list_patterns()[i];
        (e.name, &e.pattern)
    })
}

fn points(inst: &Instance) -> Vec<(usize, i64)> {
    inst.vars().flat_map(|x| inst.domain(x).iter().map(move |&v| (x, v))).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn serialization_round_trips(inst in instance(6)) {
        let text = serialize_instance(&inst);
        let back = parse_instance(&text).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(serialize_instance(&back), text);
    }

    #[test]
    fn generators_are_pure(p in params(6)) {
        prop_assert_eq!(serialize_instance(&gen_random(&p).unwrap()), serialize_instance(&gen_random(&p).unwrap()));
    }

    #[test]
    fn projection_composes(inst in instance(6), s_bits in any::<u8>(), t_bits in any::<u8>()) {
        let s: BTreeSet<usize> = inst.vars().filter(|&x| s_bits >> x & 1 == 1).collect();
        let t: BTreeSet<usize> = s.iter().copied().filter(|&x| t_bits >> x & 1 == 1).collect();
        let outer = inst.project(&s).unwrap();
        // Positions of t inside the projection onto s.
        let local: BTreeSet<usize> = s.iter().enumerate().filter(|(_, x)| t.contains(x)).map(|(i, _)| i).collect();
        prop_assert_eq!(outer.project(&local).unwrap(), inst.project(&t).unwrap());
    }

    #[test]
    fn value_removal_only_shrinks(inst in instance(5), pick in any::<prop::sample::Index>()) {
        let pts = points(&inst);
        prop_assume!(!pts.is_empty());
        let (x, v) = pts[pick.index(pts.len())];
        let smaller = inst.remove_value(x, v).unwrap();
        prop_assert!(smaller.invariants_hold());
        for y in inst.vars() {
            if y == x {
                prop_assert!(!smaller.domain(x).contains(&v));
            } else {
                prop_assert_eq!(smaller.domain(y), inst.domain(y));
            }
        }
        let pts = points(&smaller);
        for &(y, a) in &pts {
            for &(z, b) in pts.iter().filter(|p| p.0 != y) {
                prop_assert!(!smaller.allowed(y, a, z, b) || inst.allowed(y, a, z, b));
            }
        }
    }

    #[test]
    fn value_removal_creates_no_occurrence((_, pat) in catalog_pattern(), inst in instance(5)) {
        prop_assume!(occurs(pat, &inst, false).is_none());
        for (x, v) in points(&inst) {
            prop_assert!(occurs(pat, &inst.remove_value(x, v).unwrap(), false).is_none());
        }
    }

    #[test]
    fn witnesses_verify((_, pat) in catalog_pattern(), inst in instance(5), strict in any::<bool>()) {
        if let Some(w) = occurs(pat, &inst, strict) {
            prop_assert!(verify_witness(pat, &inst, &w, strict));
        }
    }

    #[test]
    fn strict_occurrence_implies_plain((_, pat) in catalog_pattern(), inst in instance(5)) {
        if occurs(pat, &inst, true).is_some() {
            prop_assert!(occurs(pat, &inst, false).is_some());
        }
    }

    #[test]
    fn sign_conflicts_make_strictness_irrelevant(inst in instance(5)) {
        for name in ["T1", "M3", "Trestle", "Q1", "Q2"] {
            let pat = sacpat::catalog::pattern(name);
            prop_assert_eq!(occurs(pat, &inst, true).is_some(), occurs(pat, &inst, false).is_some(), "{}", name);
        }
    }

    #[test]
    fn merged_pattern_occurrence_implies_original((_, pat) in catalog_pattern(), inst in instance(5)) {
        if let Some(merged) = merge_first(pat) {
            if occurs(&merged, &inst, false).is_some() {
                prop_assert!(occurs(pat, &inst, false).is_some());
            }
        }
    }

    #[test]
    fn dangling_points_are_redundant_under_ac((_, pat) in catalog_pattern(), inst in instance(5)) {
        let (ac, _) = enforce_ac(&inst);
        // Variables map injectively, so a pattern that decays completely only
        // agrees on instances with room for all its variables.
        prop_assume!(!ac.has_empty_domain() && ac.num_vars() >= pat.num_vars());
        prop_assert_eq!(occurs(pat, &ac, false).is_some(), occurs(&drop_dangling(pat), &ac, false).is_some());
    }

    #[test]
    fn ac_closure_ignores_schedule(inst in instance(6)) {
        let (fifo, trace) = enforce_ac_with(&inst, Schedule::Fifo);
        let (lifo, _) = enforce_ac_with(&inst, Schedule::Lifo);
        prop_assert_eq!(fifo.has_empty_domain(), lifo.has_empty_domain());
        if !fifo.has_empty_domain() {
            prop_assert_eq!(&fifo, &lifo);
            prop_assert!(is_ac(&fifo));
            prop_assert_eq!(enforce_ac(&fifo).0, fifo.clone());
        }
        prop_assert_eq!(trace.replay(&inst).has_empty_domain(), fifo.has_empty_domain());
    }

    #[test]
    fn sac_closure_is_sac_idempotent_and_parallel_safe(inst in instance(6), jobs in 1..4usize) {
        let sac = enforce_sac(&inst);
        let (par, _) = enforce_sac_parallel(&inst, jobs);
        prop_assert_eq!(sac.has_empty_domain(), par.has_empty_domain());
        if !sac.has_empty_domain() {
            prop_assert!(is_sac(&sac));
            prop_assert_eq!(&par, &sac);
            prop_assert_eq!(&enforce_sac(&sac), &sac);
            prop_assert_eq!(&enforce_ac(&sac).0, &sac);
        }
    }

    #[test]
    fn consistency_keeps_every_solution(inst in instance(6)) {
        if let Some(s) = oracle_solve(&inst).certificate {
            for closed in [enforce_ac(&inst).0, enforce_sac(&inst)] {
                prop_assert!(s.iter().all(|(x, v)| closed.domain(x).contains(&v)));
            }
        }
    }

    #[test]
    fn sac_preserves_pattern_freedom((name, pat) in catalog_pattern(), inst in instance(6)) {
        prop_assume!(occurs(pat, &inst, false).is_none());
        prop_assert!(occurs(pat, &enforce_sac(&inst), false).is_none(), "{}", name);
    }

    #[test]
    fn substitution_preserves_sac_and_replays(inst in instance(6)) {
        let sac = enforce_sac(&inst);
        prop_assume!(!sac.has_empty_domain());
        let (reduced, log) = ns_eliminate(&sac);
        prop_assert!(is_sac(&reduced));
        prop_assert_eq!(log.replay(&sac).unwrap(), reduced);
    }

    #[test]
    fn substitution_and_merging_keep_satisfiability(inst in instance(6)) {
        let status = oracle_solve(&inst).status;
        prop_assert_eq!(oracle_solve(&ns_eliminate(&inst).0).status, status);
        let (merged, log) = btp_merge_fixpoint(&inst);
        prop_assert_eq!(log.replay(&inst).unwrap(), merged.clone());
        let r = oracle_solve(&merged);
        prop_assert_eq!(r.status, status);
        if let Some(s) = r.certificate {
            prop_assert!(inst.verify_solution(&log.expand_solution(&inst, &s).unwrap()).unwrap());
        }
    }

    #[test]
    fn deleting_a_constraint_keeps_solutions(inst in instance(6), pick in any::<prop::sample::Index>()) {
        let pairs: Vec<_> = inst.constrained_pairs().collect();
        prop_assume!(!pairs.is_empty());
        let (x, y) = pairs[pick.index(pairs.len())];
        let looser = delete_constraint(&inst, x, y).unwrap();
        if let Some(s) = oracle_solve(&inst).certificate {
            prop_assert!(looser.verify_solution(&s).unwrap());
        }
    }

    #[test]
    fn auto_solve_is_correct_and_deterministic(inst in instance(6)) {
        let r = auto_solve(&inst);
        prop_assert_eq!(r.status, oracle_solve(&inst).status);
        if let Some(s) = &r.certificate {
            prop_assert!(inst.verify_solution(s).unwrap());
        }
        prop_assert_eq!(auto_solve(&inst), r);
    }
}
