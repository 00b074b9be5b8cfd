//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use sacpat::catalog::{self, list_patterns};
use sacpat::instances::{counterexamples, gen_implication_gadget, gen_pattern_free, gen_random, GenParams};
use sacpat::matching::occurs;
use sacpat::model::{Instance, Pattern};
use sacpat::propagate::{enforce_sac, is_sac, singleton_probe, trace_sets};
use sacpat::solve::lemmas;
use sacpat::solve::{oracle_solve, SolverClass, Status};
use sacpat::transform::{btp_merge_fixpoint, ns_eliminate};
use sacpat::verify::{self, soundness_sweep, sweep_params, SweepReport};

const SWEEP_SIZE: usize = 500;
const SWEEP_SEED: u64 = 20_160_101;
const LEMMA_SAMPLES: usize = 100;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

const MAX_DRAWS: u64 = 20_000;

/// Pattern-free instances from the sweep parameters, in draw order.
fn pattern_free_stream(pat: &Pattern, base_seed: u64) -> impl Iterator<Item = Instance> + '_ {
    (0..MAX_DRAWS).filter_map(move |i| gen_pattern_free(pat, &sweep_params(i, base_seed), 50).expect("valid parameters"))
}

/// Fully forbidding instances of 1 to 7 variables. Some patterns (V under
/// non-strict matching) are absent only from instances like these.
fn forbidding_stream(pat: &Pattern, base_seed: u64) -> impl Iterator<Item = Instance> + '_ {
    (0..MAX_DRAWS).filter_map(move |i| {
        let p = GenParams {
            n_vars: 1 + (i % 7) as usize,
            domain_size: 2 + (i % 3) as usize,
            constraint_density: 1.0,
            tightness: 1.0,
            seed: base_seed.wrapping_add(i),
        };
        gen_pattern_free(pat, &p, 1).expect("valid parameters")
    })
}

/// SAC closures with no empty domain of pattern-free instances.
fn sac_stream(pat: &Pattern, base_seed: u64) -> impl Iterator<Item = Instance> + '_ {
    pattern_free_stream(pat, base_seed)
        .map(|i| enforce_sac(&i))
        .filter(|i| !i.has_empty_domain())
}

fn counterexample_suite() -> Verdict {
    let start = Instant::now();
    let spaces = [81u128, 5184, 1024];
    let mut bad = Vec::new();
    for ((name, inst), space) in counterexamples().into_iter().zip(spaces) {
        if inst.search_space() != space {
            bad.push(format!("{name} search space {}", inst.search_space()));
        }
        if !(is_sac(&inst) && enforce_sac(&inst) == inst) {
            bad.push(format!("{name} not SAC"));
        }
        if oracle_solve(&inst).status != Status::Unsat {
            bad.push(format!("{name} satisfiable"));
        }
    }
    let elapsed = start.elapsed();
    let fast = elapsed < Duration::from_secs(5);
    verdict(
        bad.is_empty() && fast,
        format!("3 instances SAC and unsat, {:.2}s (limit 5s) {}", elapsed.as_secs_f64(), bad.join("; ")),
    )
}

fn occurrence_facts() -> Verdict {
    let checks = verify::occurrence_checks(false);
    let failed: Vec<_> = checks.iter().filter(|c| !c.passed()).map(|c| c.name.clone()).collect();
    verdict(
        checks.len() == 18 && failed.is_empty(),
        format!("{} checks (15 presence, 3 absence), failed: {failed:?}", checks.len()),
    )
}

fn soundness(reports: &[SweepReport]) -> Verdict {
    let mut parts = Vec::new();
    let mut ok = true;
    for r in reports {
        ok &= r.rows.len() >= SWEEP_SIZE && r.mismatches() == 0 && r.bad_certificates() == 0;
        parts.push(format!("{}:{}/{} sat, {} mismatch", r.class, r.sat_count(), r.rows.len(), r.mismatches()));
    }
    verdict(ok, parts.join(", "))
}

fn sac_decides(reports: &[SweepReport]) -> Verdict {
    let survivors: usize = reports.iter().map(|r| r.rows.iter().filter(|x| x.sac_nonempty).count()).sum();
    let violations: usize = reports.iter().map(SweepReport::sac_violations).sum();
    verdict(violations == 0, format!("{survivors} SAC survivors, {violations} unsatisfiable among them"))
}

/// Probes with a non-empty trace on SAC Q1-free instances.
fn q1_lemmas() -> (usize, Vec<String>) {
    let mut samples = 0;
    let mut errors = Vec::new();
    for inst in sac_stream(catalog::pattern("Q1"), 1) {
        for x in inst.vars() {
            for &v in inst.domain(x) {
                let probe = singleton_probe(&inst, x, v).expect("value in domain");
                let reduced = probe.reduced.as_ref().expect("SAC instance");
                if probe.trace.is_empty() {
                    continue;
                }
                samples += 1;
                if let Err(e) = lemmas::q1_probe_structure(reduced, &probe.trace, x) {
                    errors.push(e);
                }
            }
        }
        if samples >= 5 * LEMMA_SAMPLES {
            break;
        }
    }
    (samples, errors)
}

fn r8_lemmas() -> (usize, Vec<String>) {
    let mut samples = 0;
    let mut errors = Vec::new();
    for inst in sac_stream(catalog::pattern("R8"), 2) {
        for x in inst.vars() {
            for &v in inst.domain(x) {
                let probe = singleton_probe(&inst, x, v).expect("value in domain");
                if probe.trace.is_empty() {
                    continue;
                }
                samples += 1;
                let (s, _) = trace_sets(&probe.trace, x);
                let (cleaned, _) = ns_eliminate(probe.reduced.as_ref().expect("SAC instance"));
                if let Err(e) = lemmas::r8_star_structure(&cleaned, &s) {
                    errors.push(e);
                }
            }
        }
        if samples >= 5 * LEMMA_SAMPLES {
            break;
        }
    }
    (samples, errors)
}

/// Branch points found in SAC R7--free instances, split by pattern.
fn r7m_lemmas() -> (usize, usize, Vec<String>) {
    let (mut mhat, mut v2) = (0, 0);
    let mut errors = Vec::new();
    for inst in sac_stream(catalog::pattern("R7-"), 3).take(5000) {
        let Some(b) = lemmas::branch_point(&inst) else { continue };
        if b.pattern == "Mhat" {
            mhat += 1;
        } else {
            v2 += 1;
        }
        let probe = singleton_probe(&inst, b.mid, b.value).expect("value in domain");
        let (s, _) = trace_sets(&probe.trace, b.mid);
        if let Err(e) = lemmas::r7m_near_trivial(probe.reduced.as_ref().expect("SAC instance"), &s, b.ends.0, b.ends.1) {
            errors.push(e);
        }
        if mhat >= LEMMA_SAMPLES && v2 >= LEMMA_SAMPLES {
            break;
        }
    }
    (mhat, v2, errors)
}

/// SAC T3-free instances; the second count is those containing T4 before
/// neighbourhood substitution.
fn t3_lemma() -> (usize, usize, Vec<String>) {
    let t4 = catalog::pattern("T4");
    let (mut samples, mut with_t4) = (0, 0);
    let mut errors = Vec::new();
    for inst in sac_stream(catalog::pattern("T3"), 4).take(2 * LEMMA_SAMPLES) {
        samples += 1;
        with_t4 += usize::from(occurs(t4, &inst, false).is_some());
        if let Err(e) = lemmas::t3_implies_t4_free(&inst) {
            errors.push(e);
        }
    }
    (samples, with_t4, errors)
}

/// SAC Q2-free instances; the second count is those that needed merging.
fn q2_lemma() -> (usize, usize, Vec<String>) {
    let (mut samples, mut merged) = (0, 0);
    let mut errors = Vec::new();
    for inst in sac_stream(catalog::pattern("Q2"), 5).take(2 * LEMMA_SAMPLES) {
        samples += 1;
        merged += usize::from(!btp_merge_fixpoint(&inst).1.is_empty());
        if let Err(e) = lemmas::q2_merged_vminus(&inst) {
            errors.push(e);
        }
    }
    (samples, merged, errors)
}

fn lemma_suites() -> Verdict {
    let (q1, q1_err) = q1_lemmas();
    let (r8, r8_err) = r8_lemmas();
    let (mhat, v2, r7_err) = r7m_lemmas();
    let (t3, t3_t4, t3_err) = t3_lemma();
    let (q2, q2_merged, q2_err) = q2_lemma();
    let errors: Vec<&String> = q1_err.iter().chain(&r8_err).chain(&r7_err).chain(&t3_err).chain(&q2_err).collect();
    let enough = [q1, r8, mhat, v2, t3, q2].iter().all(|&n| n >= LEMMA_SAMPLES);
    let mut detail = format!(
        "Q1 probes {q1}, R8 probes {r8}, R7- branches Mhat {mhat} V2 {v2}, T3 {t3} ({t3_t4} with T4), Q2 {q2} ({q2_merged} merged); {} violations",
        errors.len()
    );
    if let Some(e) = errors.first() {
        detail.push_str(&format!(", first: {e}"));
    }
    verdict(enough && errors.is_empty(), detail)
}

fn transform_soundness() -> Verdict {
    let mut failures = Vec::new();
    let (mut ns_n, mut btp_n) = (0, 0);
    for i in 0..SWEEP_SIZE as u64 {
        let inst = gen_random(&sweep_params(i, 6)).expect("valid parameters");
        let status = oracle_solve(&inst).status;
        let (ns, _) = ns_eliminate(&inst);
        ns_n += 1;
        if oracle_solve(&ns).status != status {
            failures.push(format!("ns changed satisfiability at draw {i}"));
        }
        let (merged, log) = btp_merge_fixpoint(&inst);
        btp_n += 1;
        let merged_report = oracle_solve(&merged);
        if merged_report.status != status {
            failures.push(format!("btp changed satisfiability at draw {i}"));
        }
        if let Some(s) = merged_report.certificate {
            let back = log.expand_solution(&inst, &s);
            if !back.map(|b| inst.verify_solution(&b).unwrap_or(false)).unwrap_or(false) {
                failures.push(format!("btp expansion failed at draw {i}"));
            }
        }
    }
    let q2 = catalog::pattern("Q2");
    let mut q2_n = 0;
    for inst in pattern_free_stream(q2, 7).take(200) {
        q2_n += 1;
        if occurs(q2, &btp_merge_fixpoint(&inst).0, false).is_some() {
            failures.push("btp merging introduced Q2".into());
        }
    }
    if q2_n < 200 {
        failures.push(format!("only {q2_n} Q2-free instances"));
    }
    let mut sac_n = 0;
    let mut topped_up = Vec::new();
    for e in list_patterns() {
        let mut drawn: Vec<Instance> = pattern_free_stream(&e.pattern, 8).take(200).collect();
        if drawn.len() < 200 {
            topped_up.push(e.name);
            drawn.extend(forbidding_stream(&e.pattern, 9).take(200 - drawn.len()));
        }
        if drawn.len() < 200 {
            failures.push(format!("only {} {}-free instances", drawn.len(), e.name));
        }
        for inst in drawn {
            sac_n += 1;
            if occurs(&e.pattern, &enforce_sac(&inst), false).is_some() {
                failures.push(format!("SAC introduced {}", e.name));
            }
        }
    }
    verdict(
        failures.is_empty(),
        format!(
            "ns {ns_n}, btp {btp_n}, Q2-free merges {q2_n}, SAC on pattern-free {sac_n} ({} patterns, fully forbidding draws for {topped_up:?}); failures: {failures:?}",
            list_patterns().len()
        ),
    )
}

fn catalog_validation() -> Verdict {
    let checks = verify::catalog_checks(list_patterns());
    let failed: Vec<_> = checks.iter().filter(|c| !c.passed()).map(|c| c.name.clone()).collect();
    verdict(failed.is_empty(), format!("{} checks, failed: {failed:?}", checks.len()))
}

fn gadget() -> Verdict {
    let g = gen_implication_gadget(false);
    let sac = is_sac(&g);
    let start = Instant::now();
    let r = oracle_solve(&g);
    let elapsed = start.elapsed();
    verdict(
        g.num_vars() == 310 && sac && r.status == Status::Unsat && elapsed < Duration::from_secs(60),
        format!(
            "{} variables, SAC {sac}, oracle {} in {:.2}s ({} nodes)",
            g.num_vars(),
            r.status,
            elapsed.as_secs_f64(),
            r.stats.nodes
        ),
    )
}

fn run_verify_paper() -> (i32, Vec<u8>) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = sacpat_cli::run(["sacpat", "verify-paper"], &mut out, &mut err);
    (code, out)
}

fn sweeps() -> Vec<SweepReport> {
    SolverClass::ORDER
        .into_iter()
        .map(|c| soundness_sweep(c, SWEEP_SIZE, SWEEP_SEED, jobs()))
        .collect()
}

fn determinism(first: &[SweepReport]) -> Verdict {
    let (code_a, a) = run_verify_paper();
    let (code_b, b) = run_verify_paper();
    let second = sweeps();
    let same_sweeps = first.iter().zip(&second).all(|(x, y)| x.to_string() == y.to_string());
    verdict(
        code_a == 0 && code_b == 0 && a == b && same_sweeps,
        format!(
            "verify-paper {} bytes identical {}, sweep reports identical {same_sweeps}",
            a.len(),
            a == b
        ),
    )
}

fn main() -> ExitCode {
    let mut failed = BTreeSet::new();
    let mut clock = Instant::now();
    let mut report = |id: u8, title: &str, v: Verdict| {
        let secs = clock.elapsed().as_secs_f64();
        clock = Instant::now();
        println!("[{}] {id} {title} ({secs:.1}s): {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        if !v.pass {
            failed.insert(id);
        }
    };
    report(1, "counterexample suite", counterexample_suite());
    report(2, "occurrence facts", occurrence_facts());
    let reports = sweeps();
    report(3, "class solvers agree with the oracle", soundness(&reports));
    report(4, "SAC decides the classes", sac_decides(&reports));
    report(5, "lemma suites", lemma_suites());
    report(6, "transform soundness", transform_soundness());
    report(7, "catalog self-validation", catalog_validation());
    report(8, "implication gadget", gadget());
    report(9, "determinism", determinism(&reports));
    if failed.is_empty() {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
