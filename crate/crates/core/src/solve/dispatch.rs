use std::fmt;
use std::str::FromStr;

use crate::catalog::{self, list_patterns};
use crate::matching::occurs;
use crate::model::Instance;
use crate::propagate::enforce_sac_stats;

use super::construct::construct_from_sac;
use super::{
    oracle_solve, require_free, solve_q1, solve_q2, solve_r5, solve_r5_repair, solve_r7m, solve_r8,
    solve_t3, Method, SolveError, SolveReport, SolveStats,
};

/// A solving procedure selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverClass {
    Q1,
    R8,
    R7m,
    Q2,
    R5,
    T3,
    T2,
    T4,
    T5,
    Oracle,
}

impl SolverClass {
    /// Class solvers in dispatch order.
    pub const ORDER: [SolverClass; 9] = [
        SolverClass::Q1,
        SolverClass::R8,
        SolverClass::R7m,
        SolverClass::Q2,
        SolverClass::R5,
        SolverClass::T3,
        SolverClass::T2,
        SolverClass::T4,
        SolverClass::T5,
    ];

    /// The catalog pattern whose absence the solver needs.
    pub fn pattern(self) -> Option<&'static str> {
        Some(match self {
            SolverClass::Q1 => "Q1",
            SolverClass::R8 => "R8",
            SolverClass::R7m => "R7-",
            SolverClass::Q2 => "Q2",
            SolverClass::R5 => "R5",
            SolverClass::T3 => "T3",
            SolverClass::T2 => "T2",
            SolverClass::T4 => "T4",
            SolverClass::T5 => "T5",
            SolverClass::Oracle => return None,
        })
    }
}

impl fmt::Display for SolverClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverClass::Q1 => "q1",
            SolverClass::R8 => "r8",
            SolverClass::R7m => "r7m",
            SolverClass::Q2 => "q2",
            SolverClass::R5 => "r5",
            SolverClass::T3 => "t3",
            SolverClass::T2 => "t2",
            SolverClass::T4 => "t4",
            SolverClass::T5 => "t5",
            SolverClass::Oracle => "oracle",
        })
    }
}

impl FromStr for SolverClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SolverClass::ORDER
            .into_iter()
            .chain([SolverClass::Oracle])
            .find(|c| c.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown solver class `{s}`"))
    }
}

/// Run one solver. `repair` selects the constraint-deletion certificate
/// for R5.
pub fn solve_class(inst: &Instance, class: SolverClass, repair: bool) -> Result<SolveReport, SolveError> {
    match class {
        SolverClass::Q1 => solve_q1(inst),
        SolverClass::R8 => solve_r8(inst),
        SolverClass::R7m => solve_r7m(inst),
        SolverClass::Q2 => solve_q2(inst),
        SolverClass::R5 if repair => solve_r5_repair(inst),
        SolverClass::R5 => solve_r5(inst),
        SolverClass::T3 => solve_t3(inst),
        SolverClass::T2 | SolverClass::T4 | SolverClass::T5 => {
            sac_class(inst, class.pattern().expect("class pattern"))
        }
        SolverClass::Oracle => Ok(oracle_solve(inst)),
    }
}

fn sac_class(inst: &Instance, name: &'static str) -> Result<SolveReport, SolveError> {
    require_free(name, inst)?;
    let mut stats = SolveStats::default();
    let (sac, st) = enforce_sac_stats(inst);
    stats.probes += st.probes;
    let method = Method::SacClass(name);
    if sac.has_empty_domain() {
        return Ok(SolveReport::unsat(method, stats));
    }
    let s = construct_from_sac(&sac, &mut stats).ok_or_else(|| {
        SolveError::LemmaViolation(format!("SAC instance of class {name} has no greedy SAC construction"))
    })?;
    super::check_certificate(inst, &s, "sac_construct")?;
    Ok(SolveReport::sat(method, s, stats))
}

/// Occurrence status of every catalog pattern and the applicable solvers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub occurrences: Vec<(&'static str, bool)>,
    pub applicable: Vec<SolverClass>,
}

impl Classification {
    pub fn occurs(&self, name: &str) -> Option<bool> {
        let entry = catalog::get_pattern(name).ok()?;
        self.occurrences.iter().find(|(n, _)| *n == entry.name).map(|&(_, o)| o)
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, present) in &self.occurrences {
            writeln!(f, "{name:<8} {}", if *present { "present" } else { "absent" })?;
        }
        let names: Vec<String> = self.applicable.iter().map(|c| c.to_string()).collect();
        writeln!(f, "applicable: {}", if names.is_empty() { "none".into() } else { names.join(" ") })
    }
}

pub fn classify(inst: &Instance, strict_points: bool) -> Classification {
    let occurrences: Vec<(&'static str, bool)> = list_patterns()
        .iter()
        .map(|e| (e.name, occurs(&e.pattern, inst, strict_points).is_some()))
        .collect();
    let present = |n: &str| occurrences.iter().any(|&(m, o)| m == n && o);
    let applicable = SolverClass::ORDER
        .into_iter()
        .filter(|c| !present(c.pattern().expect("class pattern")))
        .collect();
    Classification { occurrences, applicable }
}

/// First applicable class solver in dispatch order, else the oracle.
pub fn auto_solve(inst: &Instance) -> SolveReport {
    let class = SolverClass::ORDER.into_iter().find(|c| {
        let name = c.pattern().expect("class pattern");
        occurs(catalog::pattern(name), inst, false).is_none()
    });
    if let Some(c) = class {
        match solve_class(inst, c, false) {
            Ok(r) => return r,
            Err(e) => {
                let mut r = oracle_solve(inst);
                r.notes.push(format!("{c} failed ({e}); fell back to the oracle"));
                return r;
            }
        }
    }
    oracle_solve(inst)
}
