//! Finite groupoids stored as full composition tables.
//!
//! Composition follows the convention `gh` defined iff `source(g) == range(h)`,
//! with `range(gh) = range(g)` and `source(gh) = source(h)`.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::par::{self, Execution};

const NONE: u32 = u32::MAX;
const MAX_REPORTED: usize = 256;

#[derive(Clone, Debug)]
pub struct FiniteGroupoid {
    unit_names: Vec<String>,
    arrow_names: Vec<String>,
    range: Vec<usize>,
    source: Vec<usize>,
    table: Vec<u32>,
    inverse: Vec<usize>,
    unit_arrow: Vec<usize>,
    by_range: Vec<Vec<usize>>,
    by_source: Vec<Vec<usize>>,
    index: HashMap<String, usize>,
}

/// Unvalidated groupoid tables, as read from a spec file.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawGroupoid {
    pub units: Vec<String>,
    pub arrows: Vec<RawArrow>,
    /// `[g, h, gh]` entries.
    pub compose: Vec<[String; 3]>,
    pub inverse: Vec<[String; 2]>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawArrow {
    pub id: String,
    /// Source unit.
    pub src: String,
    /// Range unit.
    pub dst: String,
}

/// Structural defects that prevent the tables from being read at all.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("no units declared")]
    NoUnits,
    #[error("duplicate unit id {0:?}")]
    DuplicateUnit(String),
    #[error("duplicate arrow id {0:?}")]
    DuplicateArrow(String),
    #[error("arrow {arrow:?} refers to unknown unit {unit:?}")]
    UnknownUnit { arrow: String, unit: String },
    #[error("{context} refers to unknown arrow {id:?}")]
    UnknownArrow { context: String, id: String },
    #[error("conflicting composition entries for ({left}, {right})")]
    ConflictingComposition { left: String, right: String },
    #[error("conflicting inverse entries for {0:?}")]
    ConflictingInverse(String),
    #[error("arrow {0:?} has no inverse entry")]
    MissingInverse(String),
}

/// One violated groupoid axiom with the witnessing arrows.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "axiom", rename_all = "kebab-case")]
pub enum Violation {
    MissingIdentity { unit: String },
    AmbiguousIdentity { unit: String, arrows: Vec<String> },
    NonComposableEntry { left: String, right: String },
    MissingComposition { left: String, right: String },
    RangeSource { left: String, right: String, result: String },
    LeftIdentity { arrow: String },
    RightIdentity { arrow: String },
    LeftInverse { arrow: String },
    RightInverse { arrow: String },
    Associativity { first: String, second: String, third: String },
}

impl Violation {
    pub fn axiom(&self) -> &'static str {
        match self {
            Violation::MissingIdentity { .. } => "missing-identity",
            Violation::AmbiguousIdentity { .. } => "ambiguous-identity",
            Violation::NonComposableEntry { .. } => "non-composable-entry",
            Violation::MissingComposition { .. } => "missing-composition",
            Violation::RangeSource { .. } => "range-source",
            Violation::LeftIdentity { .. } => "left-identity",
            Violation::RightIdentity { .. } => "right-identity",
            Violation::LeftInverse { .. } => "left-inverse",
            Violation::RightInverse { .. } => "right-inverse",
            Violation::Associativity { .. } => "associativity",
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub units: usize,
    pub arrows: usize,
    pub composable_pairs: usize,
    pub checked_triples: u64,
    /// Total number of violations found; only the first few are listed.
    pub violation_count: usize,
    pub violations: Vec<Violation>,
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.valid {
            return write!(f, "valid groupoid ({} units, {} arrows)", self.units, self.arrows);
        }
        write!(f, "{} violation(s)", self.violation_count)?;
        if let Some(v) = self.violations.first() {
            write!(f, ", first: {v:?}")?;
        }
        Ok(())
    }
}

pub struct ValidationOutcome {
    pub report: ValidationReport,
    pub groupoid: Option<FiniteGroupoid>,
}

/// Everything except the composition table, for programmatic construction.
#[derive(Clone, Debug)]
pub struct GroupoidParts {
    pub unit_names: Vec<String>,
    pub arrow_names: Vec<String>,
    pub range: Vec<usize>,
    pub source: Vec<usize>,
    pub inverse: Vec<usize>,
    pub unit_arrow: Vec<usize>,
}

/// Checks the raw tables and, if every axiom holds, promotes them to a
/// [`FiniteGroupoid`].
pub fn validate_groupoid(raw: &RawGroupoid) -> Result<ValidationOutcome, ParseError> {
    if raw.units.is_empty() {
        return Err(ParseError::NoUnits);
    }
    let mut unit_index = HashMap::new();
    for (i, u) in raw.units.iter().enumerate() {
        if unit_index.insert(u.clone(), i).is_some() {
            return Err(ParseError::DuplicateUnit(u.clone()));
        }
    }
    let n = raw.arrows.len();
    let mut index = HashMap::new();
    let mut range = Vec::with_capacity(n);
    let mut source = Vec::with_capacity(n);
    for (i, a) in raw.arrows.iter().enumerate() {
        if index.insert(a.id.clone(), i).is_some() {
            return Err(ParseError::DuplicateArrow(a.id.clone()));
        }
        let lookup = |u: &String| {
            unit_index.get(u).copied().ok_or_else(|| ParseError::UnknownUnit {
                arrow: a.id.clone(),
                unit: u.clone(),
            })
        };
        source.push(lookup(&a.src)?);
        range.push(lookup(&a.dst)?);
    }
    let arrow = |context: &str, id: &String| {
        index.get(id).copied().ok_or_else(|| ParseError::UnknownArrow {
            context: context.to_string(),
            id: id.clone(),
        })
    };

    let mut violations = Vec::new();
    let mut table = vec![NONE; n * n];
    for entry in &raw.compose {
        let l = arrow("compose entry", &entry[0])?;
        let r = arrow("compose entry", &entry[1])?;
        let res = arrow("compose entry", &entry[2])?;
        let slot = &mut table[l * n + r];
        if *slot != NONE && *slot as usize != res {
            return Err(ParseError::ConflictingComposition {
                left: entry[0].clone(),
                right: entry[1].clone(),
            });
        }
        if source[l] != range[r] {
            violations.push(Violation::NonComposableEntry {
                left: entry[0].clone(),
                right: entry[1].clone(),
            });
            continue;
        }
        *slot = res as u32;
    }

    let mut inverse: Vec<Option<usize>> = vec![None; n];
    for entry in &raw.inverse {
        let a = arrow("inverse entry", &entry[0])?;
        let b = arrow("inverse entry", &entry[1])?;
        match inverse[a] {
            Some(prev) if prev != b => return Err(ParseError::ConflictingInverse(entry[0].clone())),
            _ => inverse[a] = Some(b),
        }
    }
    // A pair [a, b] also declares b's inverse unless b has its own entry.
    for entry in &raw.inverse {
        let a = index[&entry[0]];
        let b = index[&entry[1]];
        if inverse[b].is_none() {
            inverse[b] = Some(a);
        }
    }
    let inverse: Vec<usize> = inverse
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| ParseError::MissingInverse(raw.arrows[i].id.clone())))
        .collect::<Result<_, _>>()?;

    let mut unit_arrow = vec![usize::MAX; raw.units.len()];
    for (u, name) in raw.units.iter().enumerate() {
        let candidates: Vec<usize> = (0..n)
            .filter(|&e| range[e] == u && source[e] == u && table[e * n + e] == e as u32)
            .collect();
        match candidates.len() {
            1 => unit_arrow[u] = candidates[0],
            0 => violations.push(Violation::MissingIdentity { unit: name.clone() }),
            _ => violations.push(Violation::AmbiguousIdentity {
                unit: name.clone(),
                arrows: candidates.iter().map(|&e| raw.arrows[e].id.clone()).collect(),
            }),
        }
    }

    let g = FiniteGroupoid::assemble(
        GroupoidParts {
            unit_names: raw.units.clone(),
            arrow_names: raw.arrows.iter().map(|a| a.id.clone()).collect(),
            range,
            source,
            inverse,
            unit_arrow,
        },
        table,
    );
    let report = g.check_axioms_with(violations, Execution::default());
    let groupoid = report.valid.then_some(g);
    Ok(ValidationOutcome { report, groupoid })
}

impl FiniteGroupoid {
    /// Builds and exhaustively validates a groupoid from its parts and a
    /// composition rule, which is only consulted on composable pairs.
    pub fn from_parts<F>(parts: GroupoidParts, compose: F) -> Result<Self, ValidationReport>
    where
        F: Fn(usize, usize) -> usize + Sync,
    {
        let n = parts.arrow_names.len();
        let range = &parts.range;
        let source = &parts.source;
        let rows = par::map_range(n, Execution::default(), |a| {
            (0..n)
                .map(|b| {
                    if source[a] == range[b] {
                        compose(a, b) as u32
                    } else {
                        NONE
                    }
                })
                .collect::<Vec<u32>>()
        });
        let table = rows.concat();
        let g = Self::assemble(parts, table);
        let report = g.check_axioms();
        if report.valid {
            Ok(g)
        } else {
            Err(report)
        }
    }

    fn assemble(parts: GroupoidParts, table: Vec<u32>) -> Self {
        let nu = parts.unit_names.len();
        let mut by_range = vec![Vec::new(); nu];
        let mut by_source = vec![Vec::new(); nu];
        for a in 0..parts.arrow_names.len() {
            by_range[parts.range[a]].push(a);
            by_source[parts.source[a]].push(a);
        }
        let index = parts
            .arrow_names
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        FiniteGroupoid {
            unit_names: parts.unit_names,
            arrow_names: parts.arrow_names,
            range: parts.range,
            source: parts.source,
            table,
            inverse: parts.inverse,
            unit_arrow: parts.unit_arrow,
            by_range,
            by_source,
            index,
        }
    }

    /// Exhaustive scan of identity, inverse, range/source and associativity.
    pub fn check_axioms(&self) -> ValidationReport {
        self.check_axioms_with(Vec::new(), Execution::default())
    }

    fn check_axioms_with(&self, mut violations: Vec<Violation>, exec: Execution) -> ValidationReport {
        let n = self.num_arrows();
        let name = |a: usize| self.arrow_names[a].clone();
        let has_units = self.unit_arrow.iter().all(|&e| e != usize::MAX);
        let mut composable = 0usize;
        for a in 0..n {
            for &b in &self.by_range[self.source[a]] {
                composable += 1;
                match self.compose(a, b) {
                    None => violations.push(Violation::MissingComposition { left: name(a), right: name(b) }),
                    Some(c) => {
                        if self.range[c] != self.range[a] || self.source[c] != self.source[b] {
                            violations.push(Violation::RangeSource {
                                left: name(a),
                                right: name(b),
                                result: name(c),
                            });
                        }
                    }
                }
            }
        }
        if has_units {
            for a in 0..n {
                if self.compose(a, self.unit_arrow[self.source[a]]) != Some(a) {
                    violations.push(Violation::RightIdentity { arrow: name(a) });
                }
                if self.compose(self.unit_arrow[self.range[a]], a) != Some(a) {
                    violations.push(Violation::LeftIdentity { arrow: name(a) });
                }
                let inv = self.inverse[a];
                if self.compose(a, inv) != Some(self.unit_arrow[self.range[a]]) {
                    violations.push(Violation::RightInverse { arrow: name(a) });
                }
                if self.compose(inv, a) != Some(self.unit_arrow[self.source[a]]) {
                    violations.push(Violation::LeftInverse { arrow: name(a) });
                }
            }
        }
        let per_arrow = par::map_range(n, exec, |a| {
            let mut found = Vec::new();
            let mut checked = 0u64;
            for &b in &self.by_range[self.source[a]] {
                let Some(ab) = self.compose(a, b) else { continue };
                for &c in &self.by_range[self.source[b]] {
                    checked += 1;
                    let (Some(bc), Some(ab_c)) = (self.compose(b, c), self.compose(ab, c)) else {
                        continue;
                    };
                    if self.compose(a, bc) != Some(ab_c) && found.len() < MAX_REPORTED {
                        found.push((a, b, c));
                    }
                }
            }
            (found, checked)
        });
        let mut checked_triples = 0;
        for (found, checked) in per_arrow {
            checked_triples += checked;
            violations.extend(found.into_iter().map(|(a, b, c)| Violation::Associativity {
                first: name(a),
                second: name(b),
                third: name(c),
            }));
        }
        let violation_count = violations.len();
        violations.truncate(MAX_REPORTED);
        ValidationReport {
            valid: violation_count == 0,
            units: self.num_units(),
            arrows: n,
            composable_pairs: composable,
            checked_triples,
            violation_count,
            violations,
        }
    }

    pub fn num_units(&self) -> usize {
        self.unit_names.len()
    }

    pub fn num_arrows(&self) -> usize {
        self.arrow_names.len()
    }

    pub fn range(&self, a: usize) -> usize {
        self.range[a]
    }

    pub fn source(&self, a: usize) -> usize {
        self.source[a]
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn unit_arrow(&self, u: usize) -> usize {
        self.unit_arrow[u]
    }

    pub fn is_unit_arrow(&self, a: usize) -> bool {
        self.range[a] == self.source[a] && self.unit_arrow[self.range[a]] == a
    }

    pub fn is_composable(&self, a: usize, b: usize) -> bool {
        self.source[a] == self.range[b]
    }

    pub fn compose(&self, a: usize, b: usize) -> Option<usize> {
        let c = self.table[a * self.num_arrows() + b];
        (c != NONE).then_some(c as usize)
    }

    /// Composition of a pair known to be composable.
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.compose(a, b)
            .unwrap_or_else(|| panic!("{} and {} are not composable", self.arrow_names[a], self.arrow_names[b]))
    }

    /// Arrows `a` with `range(a) == u`.
    pub fn with_range(&self, u: usize) -> &[usize] {
        &self.by_range[u]
    }

    /// Arrows `a` with `source(a) == u`.
    pub fn with_source(&self, u: usize) -> &[usize] {
        &self.by_source[u]
    }

    /// Isotropy group at `u`, in arrow order.
    pub fn isotropy(&self, u: usize) -> Vec<usize> {
        self.by_range[u].iter().copied().filter(|&a| self.source[a] == u).collect()
    }

    pub fn arrow_name(&self, a: usize) -> &str {
        &self.arrow_names[a]
    }

    pub fn unit_name(&self, u: usize) -> &str {
        &self.unit_names[u]
    }

    pub fn arrow_names(&self) -> &[String] {
        &self.arrow_names
    }

    pub fn unit_names(&self) -> &[String] {
        &self.unit_names
    }

    pub fn arrow_by_name(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn unit_by_name(&self, name: &str) -> Option<usize> {
        self.unit_names.iter().position(|u| u == name)
    }

    /// All composable pairs `(a, b)` in lexicographic index order.
    /// Orbit label of each unit: the smallest unit joined to it by an arrow.
    pub fn unit_orbits(&self) -> Vec<usize> {
        (0..self.num_units())
            .map(|u| self.with_range(u).iter().map(|&a| self.source(a)).min().unwrap_or(u))
            .collect()
    }

    pub fn composable_pairs(&self) -> Vec<(usize, usize)> {
        (0..self.num_arrows())
            .flat_map(|a| self.by_range[self.source[a]].iter().map(move |&b| (a, b)))
            .collect()
    }

    pub fn to_raw(&self) -> RawGroupoid {
        let n = self.num_arrows();
        RawGroupoid {
            units: self.unit_names.clone(),
            arrows: (0..n)
                .map(|a| RawArrow {
                    id: self.arrow_names[a].clone(),
                    src: self.unit_names[self.source[a]].clone(),
                    dst: self.unit_names[self.range[a]].clone(),
                })
                .collect(),
            compose: self
                .composable_pairs()
                .into_iter()
                .map(|(a, b)| {
                    [
                        self.arrow_names[a].clone(),
                        self.arrow_names[b].clone(),
                        self.arrow_names[self.mul(a, b)].clone(),
                    ]
                })
                .collect(),
            inverse: (0..n)
                .map(|a| [self.arrow_names[a].clone(), self.arrow_names[self.inverse[a]].clone()])
                .collect(),
        }
    }

    /// A group viewed as a one-unit groupoid. `mul` and `inv` act on indices
    /// `0..names.len()`; `identity` is the neutral element.
    pub fn from_group<M, I>(
        unit: &str,
        names: Vec<String>,
        identity: usize,
        mul: M,
        inv: I,
    ) -> Result<Self, ValidationReport>
    where
        M: Fn(usize, usize) -> usize + Sync,
        I: Fn(usize) -> usize,
    {
        let n = names.len();
        FiniteGroupoid::from_parts(
            GroupoidParts {
                unit_names: vec![unit.to_string()],
                arrow_names: names,
                range: vec![0; n],
                source: vec![0; n],
                inverse: (0..n).map(inv).collect(),
                unit_arrow: vec![identity],
            },
            mul,
        )
    }

    /// The pair groupoid on `n` units: one arrow `(i, j)` from `j` to `i`.
    pub fn pair(n: usize) -> Self {
        let idx = |i: usize, j: usize| i * n + j;
        FiniteGroupoid::from_parts(
            GroupoidParts {
                unit_names: (0..n).map(|i| format!("u{i}")).collect(),
                arrow_names: (0..n * n).map(|a| format!("({},{})", a / n, a % n)).collect(),
                range: (0..n * n).map(|a| a / n).collect(),
                source: (0..n * n).map(|a| a % n).collect(),
                inverse: (0..n * n).map(|a| idx(a % n, a / n)).collect(),
                unit_arrow: (0..n).map(|i| idx(i, i)).collect(),
            },
            |a, b| idx(a / n, b % n),
        )
        .expect("pair groupoid")
    }
}
