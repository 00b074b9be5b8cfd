//! Self-checking reports: the counterexample facts and catalog validation,
//! and the oracle-equivalence sweep over pattern-free random instances.

use std::fmt;

use rayon::prelude::*;

use crate::catalog::{self, CatalogEntry, Family};
use crate::instances::{counterexamples, gen_pattern_free, GenParams};
use crate::matching::{is_irreducible, is_monotone, occurs, occurs_in_pattern};
use crate::propagate::{enforce_sac, is_sac};
use crate::solve::{oracle_solve, solve_class, SolverClass, Status};

/// One checked fact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub observed: String,
}

impl Check {
    fn new(name: impl Into<String>, expected: impl ToString, observed: impl ToString) -> Self {
        Check { name: name.into(), expected: expected.to_string(), observed: observed.to_string() }
    }

    pub fn passed(&self) -> bool {
        self.expected == self.observed
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        for c in &self.checks {
            let mark = if c.passed() { "PASS" } else { "FAIL" };
            writeln!(f, "{mark}  {:<width$}  expected {:<8} observed {}", c.name, c.expected, c.observed)?;
        }
        let failed = self.failures().count();
        writeln!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// Counterexample instances: SAC, unsatisfiable, search space sizes.
pub fn counterexample_checks() -> Vec<Check> {
    let spaces = [81u128, 5184, 1024];
    let mut out = Vec::new();
    for ((name, inst), space) in counterexamples().into_iter().zip(spaces) {
        out.push(Check::new(format!("{name}: search space"), space, inst.search_space()));
        out.push(Check::new(format!("{name}: SAC"), "yes", yes_no(is_sac(&inst) && enforce_sac(&inst) == inst)));
        out.push(Check::new(format!("{name}: satisfiable"), "no", yes_no(oracle_solve(&inst).status == Status::Sat)));
    }
    out
}

/// Absence of T1 and M3 from I34 and of Trestle from I5; presence of the
/// five SAC-solvable degree-3/degree-2 patterns in all three instances.
pub fn occurrence_checks(strict_points: bool) -> Vec<Check> {
    let [k4, i34, i5] = counterexamples();
    let mut out = Vec::new();
    for (pat, (name, inst)) in [("T1", &i34), ("M3", &i34), ("Trestle", &i5)] {
        let found = occurs(catalog::pattern(pat), inst, strict_points).is_some();
        out.push(Check::new(format!("{pat} in {name}"), "absent", if found { "present" } else { "absent" }));
    }
    for pat in ["Q1", "Q2", "R5", "R8", "R7-"] {
        for (name, inst) in [&k4, &i34, &i5] {
            let found = occurs(catalog::pattern(pat), inst, strict_points).is_some();
            out.push(Check::new(format!("{pat} in {name}"), "present", if found { "present" } else { "absent" }));
        }
    }
    out
}

/// Monotonicity and irreducibility of the candidate patterns, and the
/// containments between catalog patterns.
pub fn catalog_checks(entries: &[CatalogEntry]) -> Vec<Check> {
    let mut out = Vec::new();
    for e in entries.iter().filter(|e| matches!(e.family, Family::Degree3 | Family::Degree2)) {
        out.push(Check::new(format!("{}: monotone", e.name), "yes", yes_no(is_monotone(&e.pattern))));
        out.push(Check::new(format!("{}: irreducible", e.name), "yes", yes_no(is_irreducible(&e.pattern))));
    }
    let find = |n: &str| entries.iter().find(|e| e.name == n).map(|e| &e.pattern);
    for (small, big) in [("T4", "R8"), ("T5", "R8"), ("V2", "T4"), ("R7-", "R7")] {
        let found = match (find(small), find(big)) {
            (Some(p), Some(q)) => occurs_in_pattern(p, q, false).is_some(),
            _ => false,
        };
        out.push(Check::new(format!("{small} inside {big}"), "yes", yes_no(found)));
    }
    out
}

/// The full self-check over the bundled catalog.
pub fn verify_paper(strict_points: bool) -> Report {
    let mut checks = counterexample_checks();
    checks.extend(occurrence_checks(strict_points));
    checks.extend(catalog_checks(catalog::list_patterns()));
    Report { checks }
}

/// Generator parameters for sweep index `i`: sizes cycle through n in 4..=7
/// and d in 2..=4, density and tightness through {0.3,0.5,0.7}².
pub fn sweep_params(i: u64, base_seed: u64) -> GenParams {
    const LEVELS: [f64; 3] = [0.3, 0.5, 0.7];
    GenParams {
        n_vars: 4 + (i % 4) as usize,
        domain_size: 2 + (i % 3) as usize,
        constraint_density: LEVELS[(i % 3) as usize],
        tightness: LEVELS[((i / 3) % 3) as usize],
        seed: base_seed.wrapping_add(i),
    }
}

/// One instance of the sweep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepRow {
    pub seed: u64,
    pub params: String,
    pub oracle: Status,
    /// Class solver status, or its error message.
    pub class: Result<Status, String>,
    pub certificate_ok: bool,
    /// SAC closure has no empty domain.
    pub sac_nonempty: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepReport {
    pub class: SolverClass,
    pub rows: Vec<SweepRow>,
    /// Generator calls that found no pattern-free instance.
    pub rejected: usize,
}

impl SweepReport {
    pub fn mismatches(&self) -> usize {
        self.rows.iter().filter(|r| r.class.as_ref().ok() != Some(&r.oracle)).count()
    }

    pub fn bad_certificates(&self) -> usize {
        self.rows.iter().filter(|r| !r.certificate_ok).count()
    }

    /// Instances whose SAC closure is non-empty although they are unsat.
    pub fn sac_violations(&self) -> usize {
        self.rows.iter().filter(|r| r.sac_nonempty && r.oracle == Status::Unsat).count()
    }

    pub fn sat_count(&self) -> usize {
        self.rows.iter().filter(|r| r.oracle == Status::Sat).count()
    }
}

impl fmt::Display for SweepReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rows {
            let class = match &r.class {
                Ok(s) => s.to_string(),
                Err(e) => format!("error: {e}"),
            };
            writeln!(
                f,
                "{} seed={} {} oracle={} class={} cert={} sac={}",
                self.class,
                r.seed,
                r.params,
                r.oracle,
                class,
                if r.certificate_ok { "ok" } else { "bad" },
                if r.sac_nonempty { "nonempty" } else { "wipeout" },
            )?;
        }
        writeln!(
            f,
            "{}: {} instances, {} sat, {} rejected draws, {} mismatches, {} bad certificates, {} SAC violations",
            self.class,
            self.rows.len(),
            self.sat_count(),
            self.rejected,
            self.mismatches(),
            self.bad_certificates(),
            self.sac_violations()
        )
    }
}

/// Draw `count` instances free of the class pattern and compare the class
/// solver against the oracle on each. Solving runs on `jobs` threads; rows
/// keep draw order.
pub fn soundness_sweep(class: SolverClass, count: usize, base_seed: u64, jobs: usize) -> SweepReport {
    let name = class.pattern().expect("class solver");
    let pat = catalog::pattern(name);
    let mut drawn = Vec::with_capacity(count);
    let mut rejected = 0;
    let mut i = 0;
    while drawn.len() < count {
        let p = sweep_params(i, base_seed);
        i += 1;
        match gen_pattern_free(pat, &p, 50).expect("valid parameters") {
            Some(inst) => drawn.push((p, inst)),
            None => rejected += 1,
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .expect("thread pool");
    let rows = pool.install(|| {
        drawn
            .par_iter()
            .map(|(p, inst)| {
                let oracle = oracle_solve(inst).status;
                let report = solve_class(inst, class, false);
                let certificate_ok = match &report {
                    Ok(r) => r.certificate.as_ref().is_none_or(|s| inst.verify_solution(s).unwrap_or(false)),
                    Err(_) => true,
                };
                SweepRow {
                    seed: p.seed,
                    params: format!(
                        "n={} d={} density={} tightness={}",
                        p.n_vars, p.domain_size, p.constraint_density, p.tightness
                    ),
                    oracle,
                    class: report.map(|r| r.status).map_err(|e| e.to_string()),
                    certificate_ok,
                    sac_nonempty: !enforce_sac(inst).has_empty_domain(),
                }
            })
            .collect()
    });
    SweepReport { class, rows, rejected }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_shape() {
        let r = verify_paper(false);
        // 3 x 3 instance facts, 3 absences, 15 presences, 24 catalog rows, 4 containments.
        assert_eq!(r.checks.len(), 9 + 3 + 15 + 24 + 4);
        assert!(r.all_passed(), "{r}");
    }

    #[test]
    fn corrupted_transcription_is_caught() {
        let mut entries = catalog::list_patterns().to_vec();
        let q1 = entries.iter_mut().find(|e| e.name == "Q1").unwrap();
        // Dropping the negative edges breaks monotonicity.
        q1.pattern = crate::model::parse_pattern(
            "pat 1\nvar w w1\nvar m m1 m2 m3\nvar z z1\nvar u u1\npos w.w1 m.m3\npos m.m1 z.z1\npos m.m2 u.u1\n",
        )
        .unwrap();
        let failed: Vec<String> = catalog_checks(&entries)
            .into_iter()
            .filter(|c| !c.passed())
            .map(|c| c.name)
            .collect();
        assert!(failed.contains(&"Q1: monotone".to_string()), "{failed:?}");
    }

    #[test]
    fn sweep_is_reproducible() {
        let a = soundness_sweep(SolverClass::Q1, 20, 7, 1);
        let b = soundness_sweep(SolverClass::Q1, 20, 7, 3);
        assert_eq!(a.to_string(), b.to_string());
        assert_eq!(a.mismatches(), 0);
    }
}
