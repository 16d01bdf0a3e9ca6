//! Solver states `M || Γ`: the trail with decision annotations and reasons,
//! and the store of learned clauses.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::program::{Atom, Literal, Program, RuleId};

/// A set of literals kept sorted by (atom id, polarity).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Clause(Vec<Literal>);

impl Clause {
    pub fn new(lits: impl IntoIterator<Item = Literal>) -> Self {
        let mut v: Vec<Literal> = lits.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Clause(v)
    }

    pub fn literals(&self) -> &[Literal] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, lit: Literal) -> bool {
        self.0.binary_search(&lit).is_ok()
    }

    pub fn is_tautology(&self) -> bool {
        self.0.windows(2).any(|w| w[0].atom() == w[1].atom())
    }

    pub fn iter(&self) -> impl Iterator<Item = Literal> + '_ {
        self.0.iter().copied()
    }

    pub fn is_satisfied_by(&self, truth: impl Fn(Atom) -> bool) -> bool {
        self.0.iter().any(|l| truth(l.atom()) == l.is_positive())
    }

    pub fn render(&self, p: &Program) -> String {
        if self.0.is_empty() {
            return "\u{22a5}".into();
        }
        self.0.iter().map(|&l| p.literal_name(l)).collect::<Vec<_>>().join(" v ")
    }
}

impl FromIterator<Literal> for Clause {
    fn from_iter<I: IntoIterator<Item = Literal>>(iter: I) -> Self {
        Clause::new(iter)
    }
}

pub type ClauseId = u64;

/// Why an implied literal is on the trail. Payloads are fixed when the
/// literal is derived, so reason clauses are reproducible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Reason {
    /// Unit Propagate LP over a program rule.
    Rule(RuleId),
    /// Unit Propagate LP over a clause of the store.
    Clause(ClauseId),
    /// All Rules Cancelled: one falsified body literal per rule with the head.
    Cancelled { witnesses: Vec<(RuleId, Literal)> },
    /// Backchain True through the only rule whose body is not falsified.
    BackchainTrue { rule: RuleId, witnesses: Vec<(RuleId, Literal)> },
    BackchainFalse { rule: RuleId },
    /// Unfounded with the snapshot of the unfounded set and one falsified
    /// literal per externally supporting rule.
    Unfounded { set: Vec<Atom>, witnesses: Vec<(RuleId, Literal)> },
    /// Asserted by Backjump LP; `id` is filled in once Learn LP stores the
    /// clause.
    Backjump { clause: Clause, id: Option<ClauseId> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrailEntry {
    pub literal: Literal,
    /// `None` for decision literals.
    pub reason: Option<Reason>,
    pub level: u32,
}

impl TrailEntry {
    pub fn is_decision(&self) -> bool {
        self.reason.is_none()
    }
}

/// The record M.
#[derive(Debug, Clone, Default)]
pub struct Trail {
    entries: Vec<TrailEntry>,
    /// Per literal code: trail position.
    position: Vec<Option<u32>>,
    clashes: usize,
    level: u32,
}

impl Trail {
    pub fn new(num_atoms: usize) -> Self {
        Trail {
            entries: Vec::new(),
            position: vec![None; 2 * num_atoms],
            clashes: 0,
            level: 0,
        }
    }

    #[inline]
    fn slot(lit: Literal) -> usize {
        2 * lit.atom().index() + usize::from(!lit.is_positive())
    }

    pub fn entries(&self) -> &[TrailEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn last(&self) -> Option<&TrailEntry> {
        self.entries.last()
    }

    #[inline]
    pub fn has(&self, lit: Literal) -> bool {
        self.position[Self::slot(lit)].is_some()
    }

    /// The complement of `lit` is on the trail.
    #[inline]
    pub fn falsifies(&self, lit: Literal) -> bool {
        self.has(!lit)
    }

    #[inline]
    pub fn is_assigned(&self, atom: Atom) -> bool {
        self.has(atom.pos()) || self.has(atom.neg())
    }

    pub fn position(&self, lit: Literal) -> Option<usize> {
        self.position[Self::slot(lit)].map(|p| p as usize)
    }

    pub fn decision_level(&self) -> u32 {
        self.level
    }

    pub fn has_decision(&self) -> bool {
        self.level > 0
    }

    pub fn is_consistent(&self) -> bool {
        self.clashes == 0
    }

    pub fn is_complete(&self, num_atoms: usize) -> bool {
        (0..num_atoms as u32).all(|a| self.is_assigned(Atom(a)))
    }

    /// Appends `lit`; a decision when `reason` is `None`. Appending the
    /// complement of a trail literal makes the trail inconsistent.
    pub fn assign(&mut self, lit: Literal, reason: Option<Reason>) -> Result<()> {
        if self.has(lit) {
            return Err(Error::AlreadyAssigned(format!("{lit:?}")));
        }
        if reason.is_none() {
            self.level += 1;
        }
        if self.has(!lit) {
            self.clashes += 1;
        }
        self.position[Self::slot(lit)] = Some(self.entries.len() as u32);
        self.entries.push(TrailEntry { literal: lit, reason, level: self.level });
        Ok(())
    }

    /// Keeps only the entries with level at most `level`.
    pub fn truncate_to_level(&mut self, level: u32) {
        let keep = self.entries.partition_point(|e| e.level <= level);
        for e in self.entries.drain(keep..) {
            if self.position[Self::slot(!e.literal)].is_some() {
                self.clashes -= 1;
            }
            self.position[Self::slot(e.literal)] = None;
        }
        self.level = self.level.min(level);
    }

    pub fn clear(&mut self) {
        for e in self.entries.drain(..) {
            self.position[Self::slot(e.literal)] = None;
        }
        self.clashes = 0;
        self.level = 0;
    }

    /// Backjump LP: truncate to the prefix of entries with level `level`
    /// or less, then assert `lit` with `reason`.
    pub fn backjump_to(&mut self, level: u32, lit: Literal, reason: Reason) -> Result<()> {
        if self.is_consistent() {
            return Err(Error::TrailConsistent);
        }
        if level >= self.level {
            return Err(Error::BackjumpLevel { level, current: self.level });
        }
        let keep = self.entries.partition_point(|e| e.level <= level);
        if self.position(lit).is_some_and(|p| p < keep) {
            return Err(Error::AlreadyAssigned(format!("{lit:?}")));
        }
        self.truncate_to_level(level);
        self.assign(lit, Some(reason))
    }

    pub fn entry_mut(&mut self, index: usize) -> &mut TrailEntry {
        &mut self.entries[index]
    }

    /// Atoms assigned true, in id order.
    pub fn true_atoms(&self) -> Vec<Atom> {
        let mut v: Vec<Atom> = self
            .entries
            .iter()
            .filter(|e| e.literal.is_positive())
            .map(|e| e.literal.atom())
            .collect();
        v.sort();
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClauseOrigin {
    /// Added by Learn LP from a derivation over Π and entailed clauses.
    Learned,
    /// Enumeration device, or learned from a derivation that used one.
    Blocking,
}

#[derive(Debug, Clone)]
pub struct StoredClause {
    pub id: ClauseId,
    pub clause: Clause,
    pub activity: f64,
    pub origin: ClauseOrigin,
}

/// The set Γ.
#[derive(Debug, Clone, Default)]
pub struct ClauseStore {
    clauses: Vec<StoredClause>,
    next_id: ClauseId,
}

impl ClauseStore {
    pub fn iter(&self) -> impl Iterator<Item = &StoredClause> {
        self.clauses.iter()
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn get(&self, id: ClauseId) -> Option<&StoredClause> {
        self.clauses
            .binary_search_by_key(&id, |c| c.id)
            .ok()
            .map(|i| &self.clauses[i])
    }

    pub fn get_mut(&mut self, id: ClauseId) -> Option<&mut StoredClause> {
        self.clauses
            .binary_search_by_key(&id, |c| c.id)
            .ok()
            .map(move |i| &mut self.clauses[i])
    }

    pub fn find(&self, clause: &Clause) -> Option<ClauseId> {
        self.clauses.iter().find(|c| &c.clause == clause).map(|c| c.id)
    }

    /// Adds `clause` unless an equal one is present; returns the new id.
    pub fn insert(&mut self, clause: Clause, origin: ClauseOrigin) -> Option<ClauseId> {
        if self.find(&clause).is_some() {
            return None;
        }
        let id = self.next_id;
        self.next_id += 1;
        self.clauses.push(StoredClause { id, clause, activity: 0.0, origin });
        Some(id)
    }

    pub(crate) fn remove(&mut self, id: ClauseId) -> Option<StoredClause> {
        let i = self.clauses.binary_search_by_key(&id, |c| c.id).ok()?;
        Some(self.clauses.remove(i))
    }
}

/// A state `M || Γ`, or FailState when `failed` is set.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub trail: Trail,
    pub store: ClauseStore,
    pub failed: bool,
}

impl SolverState {
    pub fn new(p: &Program) -> Self {
        SolverState {
            trail: Trail::new(p.num_atoms()),
            store: ClauseStore::default(),
            failed: false,
        }
    }

    /// Store clauses that are currently the reason of a trail entry.
    pub fn pinned(&self) -> BTreeSet<ClauseId> {
        self.trail
            .entries()
            .iter()
            .filter_map(|e| match &e.reason {
                Some(Reason::Clause(id)) => Some(*id),
                Some(Reason::Backjump { id: Some(id), .. }) => Some(*id),
                _ => None,
            })
            .collect()
    }

    pub fn render(&self, p: &Program) -> String {
        render_state(p, self, Notation::Ascii)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Notation {
    /// `a^d c -b || {}`
    Ascii,
    /// `a^Δ c ¬b || ∅`
    Unicode,
}

pub fn render_trail(p: &Program, t: &Trail, notation: Notation) -> String {
    let mut out = String::new();
    for (i, e) in t.entries().iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        if !e.literal.is_positive() {
            out.push(if notation == Notation::Ascii { '-' } else { '¬' });
        }
        out.push_str(p.name(e.literal.atom()));
        if e.is_decision() {
            out.push_str(if notation == Notation::Ascii { "^d" } else { "^Δ" });
        }
    }
    if t.is_empty() && notation == Notation::Unicode {
        out.push('∅');
    }
    out
}

pub fn render_state(p: &Program, s: &SolverState, notation: Notation) -> String {
    if s.failed {
        return "FailState".into();
    }
    let mut out = render_trail(p, &s.trail, notation);
    if !out.is_empty() {
        out.push(' ');
    }
    out.push_str("|| ");
    if s.store.is_empty() && notation == Notation::Unicode {
        out.push('∅');
        return out;
    }
    out.push('{');
    for (i, c) in s.store.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{}", c.clause.render(p));
    }
    out.push('}');
    out
}
