//! Named patterns with metadata. Each pattern is also shipped as a `.pat`
//! file under `crates/core/patterns/`.

use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

use crate::matching;
use crate::model::{parse_pattern, Pattern};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SacSolvable {
    Yes,
    No,
    Open,
}

impl fmt::Display for SacSolvable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SacSolvable::Yes => "yes",
            SacSolvable::No => "no",
            SacSolvable::Open => "open",
        })
    }
}

/// Where a pattern comes from, by role.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// Irreducible monotone patterns with a degree-3 variable.
    Degree3,
    /// Irreducible monotone patterns on a path of three constraints.
    Degree2,
    /// Subpattern of R7 that is proven SAC-solvable.
    Subpattern,
    /// Maximal irreducible tractable patterns on two connected constraints.
    TwoConstraint,
    /// Branching patterns used when solving R7-.
    Branching,
    /// Helper patterns for merging and shape arguments.
    Auxiliary,
    /// Patterns known not to be solved by SAC.
    NotSac,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Degree3 => "degree-3 monotone",
            Family::Degree2 => "degree-2 monotone",
            Family::Subpattern => "subpattern",
            Family::TwoConstraint => "two-constraint",
            Family::Branching => "branching",
            Family::Auxiliary => "auxiliary",
            Family::NotSac => "not solved by SAC",
        })
    }
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: &'static str,
    /// File stem under `patterns/` and ASCII alias.
    pub file: &'static str,
    pub pattern: Pattern,
    pub monotone: bool,
    pub sac_solvable: SacSolvable,
    pub family: Family,
}

impl CatalogEntry {
    /// Irreducibility is only claimed for non-auxiliary entries.
    pub fn claims_irreducible(&self) -> bool {
        !matches!(self.family, Family::Branching | Family::Auxiliary)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown pattern `{0}`")]
pub struct UnknownPattern(pub String);

struct Raw {
    name: &'static str,
    file: &'static str,
    text: &'static str,
    sac: SacSolvable,
    family: Family,
}

macro_rules! raw {
    ($name:expr, $file:literal, $sac:ident, $fam:ident) => {
        Raw {
            name: $name,
            file: $file,
            text: include_str!(concat!("../patterns/", $file, ".pat")),
            sac: SacSolvable::$sac,
            family: Family::$fam,
        }
    };
}

const RAW: [Raw; 25] = [
    raw!("Q1", "Q1", Yes, Degree3),
    raw!("Q2", "Q2", Yes, Degree3),
    raw!("R1", "R1", Open, Degree2),
    raw!("R2", "R2", Open, Degree2),
    raw!("R3", "R3", Open, Degree2),
    raw!("R4", "R4", Open, Degree2),
    raw!("R5", "R5", Yes, Degree2),
    raw!("R6", "R6", Open, Degree2),
    raw!("R7", "R7", Open, Degree2),
    raw!("R8", "R8", Yes, Degree2),
    raw!("R9", "R9", Open, Degree2),
    raw!("R10", "R10", Open, Degree2),
    raw!("R7-", "R7m", Yes, Subpattern),
    raw!("T1", "T1", No, TwoConstraint),
    raw!("T2", "T2", Yes, TwoConstraint),
    raw!("T3", "T3", Yes, TwoConstraint),
    raw!("T4", "T4", Yes, TwoConstraint),
    raw!("T5", "T5", Yes, TwoConstraint),
    raw!("V", "V", Open, Auxiliary),
    raw!("V-", "Vminus", Yes, Auxiliary),
    raw!("V2", "V2", Yes, Branching),
    raw!("Mhat", "Mhat", No, Branching),
    raw!("M3", "M3", No, NotSac),
    raw!("Trestle", "Trestle", No, NotSac),
    raw!("BTP", "BTP", Open, Auxiliary),
];

fn entries() -> &'static [CatalogEntry] {
    static CATALOG: OnceLock<Vec<CatalogEntry>> = OnceLock::new();
    CATALOG.get_or_init(|| {
        RAW.iter()
            .map(|r| {
                let pattern = parse_pattern(r.text)
                    .unwrap_or_else(|e| panic!("bundled pattern {} is malformed: {e}", r.name));
                CatalogEntry {
                    name: r.name,
                    file: r.file,
                    monotone: matching::is_monotone(&pattern),
                    pattern,
                    sac_solvable: r.sac,
                    family: r.family,
                }
            })
            .collect()
    })
}

/// All entries in fixed order.
pub fn list_patterns() -> &'static [CatalogEntry] {
    entries()
}

fn normalize(name: &str) -> String {
    name.trim()
        .replace('⁻', "-")
        .replace('₂', "2")
        .replace('\u{302}', "hat")
        .to_ascii_lowercase()
}

/// Look up by display name or file alias, case-insensitively. `M̂`, `V⁻`
/// and `V₂` are accepted.
pub fn get_pattern(name: &str) -> Result<&'static CatalogEntry, UnknownPattern> {
    let key = normalize(name);
    entries()
        .iter()
        .find(|e| normalize(e.name) == key || e.file.to_ascii_lowercase() == key)
        .ok_or_else(|| UnknownPattern(name.to_string()))
}

/// Shorthand for the pattern of a known entry; panics on an unknown name.
pub fn pattern(name: &str) -> &'static Pattern {
    &get_pattern(name).expect("catalog name").pattern
}

/// Entries drawn as the irreducible monotone candidates.
pub fn candidate_names() -> impl Iterator<Item = &'static str> {
    entries()
        .iter()
        .filter(|e| matches!(e.family, Family::Degree3 | Family::Degree2))
        .map(|e| e.name)
}
