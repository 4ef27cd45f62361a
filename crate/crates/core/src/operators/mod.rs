//! The transformation catalog: semantic-preserving structure (S1–S12), API
//! call (A1–A8) and renaming (N1–N2) operators, plus the semantic-altering
//! bug operators (B1–B5) used to build paired mutants.
//!
//! Every operator exposes its applicable [`Location`]s and a recipe that
//! rewrites the tree at one location. Statement lineage is reconciled after
//! each rewrite: statements whose header changed and statements that were
//! removed are reported as replaced, new statements receive fresh ids.

pub mod api;
pub mod bugs;
pub mod catalog;
pub mod rename;
pub mod structure;
mod util;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::python::ast::{walk_stmts_mut, LineageId};
use crate::python::lineage::fingerprints;
use crate::python::parse_module;
use crate::unit::ProgramUnit;

pub use bugs::{inject_bugs, BugEdit, MutantPair, MutationRecord};
pub use util::Cx;

pub type OpRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    Structure,
    ApiCall,
    Renaming,
    Bug,
}

macro_rules! operator_ids {
    ($($id:ident => $name:literal, $family:ident;)*) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum OperatorId {
            $($id,)*
        }

        impl OperatorId {
            pub const ALL: &'static [OperatorId] = &[$(OperatorId::$id,)*];

            pub fn code(self) -> &'static str {
                match self {
                    $(OperatorId::$id => stringify!($id),)*
                }
            }

            /// Descriptive recipe name, e.g. `AddNestedFor`.
            pub fn name(self) -> &'static str {
                match self {
                    $(OperatorId::$id => $name,)*
                }
            }

            pub fn family(self) -> Family {
                match self {
                    $(OperatorId::$id => Family::$family,)*
                }
            }
        }

        impl FromStr for OperatorId {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $(stringify!($id) | $name => Ok(OperatorId::$id),)*
                    other => Err(format!("unknown operator '{other}'")),
                }
            }
        }
    };
}

operator_ids! {
    S1 => "AddNestedFor", Structure;
    S2 => "AddNestedIf", Structure;
    S3 => "AddNestedWhile", Structure;
    S4 => "AddThread", Structure;
    S5 => "AddTryExcept", Structure;
    S6 => "CreateFunction", Structure;
    S7 => "CreateModuleDependencies", Structure;
    S8 => "IntroduceDecorator", Structure;
    S9 => "ReplaceNumpy", Structure;
    S10 => "TransformAugAssignment", Structure;
    S11 => "TransformLoopToRecursion", Structure;
    S12 => "TransformPrimToCompound", Structure;
    A1 => "AddBase64", ApiCall;
    A2 => "AddCrypto", ApiCall;
    A3 => "AddDatetime", ApiCall;
    A4 => "AddDateutil", ApiCall;
    A5 => "AddHttp", ApiCall;
    A6 => "AddScipy", ApiCall;
    A7 => "AddSklearn", ApiCall;
    A8 => "AddTime", ApiCall;
    N1 => "RenameVariable", Renaming;
    N2 => "RenameFunction", Renaming;
    B1 => "SwapArithmetic", Bug;
    B2 => "SwapComparison", Bug;
    B3 => "SwapLogic", Bug;
    B4 => "ReverseBoolean", Bug;
    B5 => "ChangeVariableType", Bug;
}

impl OperatorId {
    /// The 22 semantic-preserving operators.
    pub fn semantic() -> impl Iterator<Item = OperatorId> {
        Self::ALL.iter().copied().filter(|o| o.family() != Family::Bug)
    }

    pub fn bugs() -> impl Iterator<Item = OperatorId> {
        Self::ALL.iter().copied().filter(|o| o.family() == Family::Bug)
    }
}

impl fmt::Display for OperatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl Serialize for OperatorId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.code())
    }
}

impl<'de> Deserialize<'de> for OperatorId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Where an operator applies: the anchor statement (by lineage), an optional
/// node path inside it and, for name-based operators, the target name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Location {
    pub file: String,
    pub lineage: LineageId,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub path: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    pub description: String,
}

impl Location {
    pub fn new(file: &str, lineage: LineageId, description: impl Into<String>) -> Self {
        Location {
            file: file.to_string(),
            lineage,
            path: Vec::new(),
            target: None,
            description: description.into(),
        }
    }

    pub fn with_target(mut self, target: &str) -> Self {
        self.target = Some(target.to_string());
        self
    }

    pub fn with_path(mut self, path: Vec<usize>) -> Self {
        self.path = path;
        self
    }

    /// Identity used for de-duplication; the description is derived data.
    pub fn key(&self) -> (&str, LineageId, &[usize], Option<&str>) {
        (&self.file, self.lineage, &self.path, self.target.as_deref())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NameKind {
    Variable,
    Function,
    Class,
}

/// An identifier invented by an operator, eligible for naturalization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticName {
    pub name: String,
    pub kind: NameKind,
    /// Usage role, e.g. `batch`, `flag`, `queue`, `thread`.
    pub role: String,
    /// Identifiers from the surrounding code that describe the value.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hints: Vec<String>,
    /// Name as first generated, when naturalization changed it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated: Option<String>,
}

impl SyntheticName {
    pub fn new(name: &str, kind: NameKind, role: &str, hints: Vec<String>) -> Self {
        SyntheticName {
            name: name.to_string(),
            kind,
            role: role.to_string(),
            hints,
            generated: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformationRecord {
    pub operator: OperatorId,
    pub location: Location,
    pub iteration: u32,
    pub rng_seed: u64,
    pub replaced_lineage_ids: BTreeSet<LineageId>,
    pub inserted_lineage_ids: BTreeSet<LineageId>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub synthetic: Vec<SyntheticName>,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum OperatorError {
    #[error("operator {0} is not applicable at {1}")]
    NotApplicable(OperatorId, String),
    #[error("operator {0} failed: {1}")]
    TransformFailed(OperatorId, String),
    #[error("units are not related by lineage: {0}")]
    LineageMismatch(String),
    #[error("need {needed} distinct bug sites, found {available}")]
    InsufficientSites { needed: usize, available: usize },
    #[error("mutant does not parse: {0}")]
    StillbornMutant(String),
    #[error("no killed mutant after {attempts} attempts")]
    SurvivingMutant { attempts: usize },
    #[error("test execution failed: {0}")]
    Runner(String),
}

/// Semantic-preserving operators with at least one location, in catalog
/// order. Operators without locations are omitted.
pub fn applicable_operators(unit: &ProgramUnit) -> Vec<(OperatorId, Vec<Location>)> {
    let mut unit = unit.clone();
    let cx = Cx::prepare(&mut unit);
    OperatorId::semantic()
        .map(|op| (op, locations_for(op, &unit, &cx)))
        .filter(|(_, locs)| !locs.is_empty())
        .collect()
}

/// Locations of a single operator.
pub fn operator_locations(unit: &ProgramUnit, op: OperatorId) -> Vec<Location> {
    let mut unit = unit.clone();
    let cx = Cx::prepare(&mut unit);
    locations_for(op, &unit, &cx)
}

pub(crate) fn locations_for(op: OperatorId, unit: &ProgramUnit, cx: &Cx) -> Vec<Location> {
    match op.family() {
        Family::Structure => structure::locations(op, unit, cx),
        Family::ApiCall => api::locations(op, unit, cx),
        Family::Renaming => rename::locations(op, unit, cx),
        Family::Bug => Vec::new(),
    }
}

/// Applies `op` at `loc` with a generator seeded by `seed`. The result is a
/// new unit plus the record describing the edit; `iteration` is left at 0
/// for the caller to fill in.
pub fn apply_operator(
    unit: &ProgramUnit,
    op: OperatorId,
    loc: &Location,
    seed: u64,
) -> Result<(ProgramUnit, TransformationRecord), OperatorError> {
    if op.family() == Family::Bug {
        return Err(OperatorError::NotApplicable(op, "bug operators are applied via inject_bugs".into()));
    }
    let before = unit_fingerprints(unit);
    let mut out = unit.clone();
    let cx = Cx::prepare(&mut out);
    let current = locations_for(op, &out, &cx);
    let Some(loc) = current.iter().find(|l| l.key() == loc.key()).cloned() else {
        return Err(OperatorError::NotApplicable(op, loc.description.clone()));
    };
    let mut rng = OpRng::seed_from_u64(seed);
    let synthetic = match op.family() {
        Family::Structure => structure::apply(op, &mut out, &cx, &loc, &mut rng)?,
        Family::ApiCall => api::apply(op, &mut out, &cx, &loc, &mut rng)?,
        Family::Renaming => rename::apply(op, &mut out, &cx, &loc, &mut rng)?,
        Family::Bug => unreachable!(),
    };
    check_reparses(&out).map_err(|m| OperatorError::TransformFailed(op, m))?;
    let (replaced, inserted) = reconcile_lineage(&before, &mut out);
    Ok((
        out,
        TransformationRecord {
            operator: op,
            location: loc,
            iteration: 0,
            rng_seed: seed,
            replaced_lineage_ids: replaced,
            inserted_lineage_ids: inserted,
            synthetic,
        },
    ))
}

/// Every modified file must emit text that parses back to the same tree.
pub(crate) fn check_reparses(unit: &ProgramUnit) -> Result<(), String> {
    for (path, f) in unit.files() {
        if f.original.is_some() {
            continue;
        }
        let text = f.text();
        match parse_module(&text) {
            Ok(m) if m == f.module => {}
            Ok(_) => return Err(format!("{path}: emitted text does not round-trip")),
            Err(e) => return Err(format!("{path}: {e}")),
        }
    }
    Ok(())
}

/// Header fingerprints of all statements in the unit, keyed by lineage.
pub fn unit_fingerprints(unit: &ProgramUnit) -> BTreeMap<LineageId, String> {
    let mut out = BTreeMap::new();
    for (_, f) in unit.files() {
        out.extend(fingerprints(&f.module.body));
    }
    out
}

/// Gives fresh ids to new statements and to statements whose header changed,
/// returning (replaced, inserted) id sets relative to `before`.
pub fn reconcile_lineage(
    before: &BTreeMap<LineageId, String>,
    unit: &mut ProgramUnit,
) -> (BTreeSet<LineageId>, BTreeSet<LineageId>) {
    let mut replaced = BTreeSet::new();
    let mut seen = BTreeSet::new();
    for path in unit.manifest.source_files.clone() {
        let Some(f) = unit.sources.get_mut(&path) else {
            continue;
        };
        walk_stmts_mut(&mut f.module.body, &mut |s| {
            let Some(id) = s.lineage else {
                return;
            };
            if !seen.insert(id) {
                s.lineage = None;
                return;
            }
            if let Some(fp) = before.get(&id) {
                if *fp != crate::python::lineage::header_fingerprint(s) {
                    replaced.insert(id);
                    s.lineage = None;
                }
            }
        });
    }
    for id in before.keys() {
        if !seen.contains(id) {
            replaced.insert(*id);
        }
    }
    let start = unit.next_lineage.max(before.keys().map(|l| l.0).max().unwrap_or(0));
    unit.next_lineage = start;
    unit.assign_lineage();
    let inserted = (start + 1..=unit.next_lineage).map(LineageId).collect();
    (replaced, inserted)
}

/// Lineage ids present in both units, excluding ids any record reports as
/// replaced and ids whose statement header no longer matches.
pub fn shared_statements(
    original: &ProgramUnit,
    transformed: &ProgramUnit,
    history: &[TransformationRecord],
) -> Result<BTreeSet<LineageId>, OperatorError> {
    if original.manifest.id != transformed.manifest.id {
        return Err(OperatorError::LineageMismatch(format!(
            "'{}' vs '{}'",
            original.manifest.id, transformed.manifest.id
        )));
    }
    let a = unit_fingerprints(original);
    let b = unit_fingerprints(transformed);
    let replaced: BTreeSet<LineageId> = history
        .iter()
        .flat_map(|r| r.replaced_lineage_ids.iter().copied())
        .collect();
    Ok(a.iter()
        .filter(|(id, fp)| b.get(id) == Some(fp) && !replaced.contains(id))
        .map(|(id, _)| *id)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_round_trip() {
        assert_eq!(OperatorId::ALL.len(), 27);
        assert_eq!(OperatorId::semantic().count(), 22);
        for op in OperatorId::ALL {
            assert_eq!(op.code().parse::<OperatorId>().unwrap(), *op);
            assert_eq!(op.name().parse::<OperatorId>().unwrap(), *op);
        }
        let json = serde_json::to_string(&OperatorId::S10).unwrap();
        assert_eq!(json, "\"S10\"");
    }

    #[test]
    fn identity_shares_everything() {
        let u = ProgramUnit::from_source("u", "def f(x):\n    y = x + 1\n    return y\n").unwrap();
        let shared = shared_statements(&u, &u.clone(), &[]).unwrap();
        assert_eq!(shared.len(), 3);
    }

    #[test]
    fn unrelated_units_are_rejected() {
        let a = ProgramUnit::from_source("a", "x = 1\n").unwrap();
        let b = ProgramUnit::from_source("b", "x = 1\n").unwrap();
        assert!(matches!(
            shared_statements(&a, &b, &[]),
            Err(OperatorError::LineageMismatch(_))
        ));
    }
}
