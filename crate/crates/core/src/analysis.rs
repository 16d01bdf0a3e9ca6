//! Backjump LP and Learn LP: reason clauses, first-UIP resolution, backjump
//! levels and the learn-after-backjump discipline.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::program::{Literal, Program};
use crate::rules::Transition;
use crate::state::{Clause, ClauseId, ClauseOrigin, ClauseStore, Reason, SolverState, TrailEntry};

/// Result of analysing an inconsistent trail.
#[derive(Debug, Clone, PartialEq)]
pub struct ConflictAnalysis {
    pub learned: Clause,
    /// The literal asserted after the backjump; the only literal of
    /// `learned` falsified at `conflict_level`.
    pub asserting: Literal,
    pub backjump_level: u32,
    pub conflict_level: u32,
    /// Trail positions resolved on, in order, starting from the reason of
    /// the last entry.
    pub derivation: Vec<usize>,
    /// Store clauses that served as reasons during resolution.
    pub used_clauses: Vec<ClauseId>,
    /// Every literal of the conflict clause is falsified at level 0: the
    /// program together with the store has no answer set.
    pub at_root: bool,
}

/// The clause form of the justification of an implied entry. It contains
/// the entry's literal and, at the time of derivation, every other literal
/// is falsified.
pub fn reason_clause(p: &Program, store: &ClauseStore, entry: &TrailEntry) -> Result<Clause> {
    let lit = entry.literal;
    let reason = entry.reason.as_ref().ok_or(Error::DecisionHasNoReason(0))?;
    let clause = match reason {
        Reason::Rule(r) | Reason::BackchainFalse { rule: r } => {
            let rule = p.rule(*r);
            Clause::new(std::iter::once(rule.head.pos()).chain(rule.body.iter().map(|&l| !l)))
        }
        Reason::Clause(id) => store.get(*id).ok_or(Error::ClauseAbsent(*id))?.clause.clone(),
        Reason::Cancelled { witnesses } | Reason::Unfounded { witnesses, .. } => {
            Clause::new(std::iter::once(lit).chain(witnesses.iter().map(|w| w.1)))
        }
        Reason::BackchainTrue { rule, witnesses } => {
            let head = p.rule(*rule).head;
            Clause::new([lit, head.neg()].into_iter().chain(witnesses.iter().map(|w| w.1)))
        }
        Reason::Backjump { clause, .. } => clause.clone(),
    };
    debug_assert!(clause.contains(lit) && !clause.is_tautology());
    Ok(clause)
}

/// First-UIP analysis of the inconsistent trail of `s`.
pub fn analyze_conflict(p: &Program, s: &SolverState) -> Result<ConflictAnalysis> {
    let t = &s.trail;
    if t.is_consistent() || !t.has_decision() {
        return Err(Error::NoConflict);
    }
    let last = t.last().expect("inconsistent trail is non-empty");
    if !t.has(!last.literal) {
        return Err(Error::NoConflict);
    }
    let mut used_clauses = Vec::new();
    let note_clause = |e: &TrailEntry, used: &mut Vec<ClauseId>| match &e.reason {
        Some(Reason::Clause(id)) | Some(Reason::Backjump { id: Some(id), .. }) => used.push(*id),
        _ => {}
    };

    note_clause(last, &mut used_clauses);
    let mut clause: BTreeSet<Literal> = reason_clause(p, &s.store, last)?.iter().collect();
    // Position of the entry falsifying a clause literal.
    let falsifier = |l: Literal| t.position(!l).expect("conflict clause literals are falsified");
    let level_of = |l: Literal| t.entries()[falsifier(l)].level;

    let conflict_level = clause.iter().map(|&l| level_of(l)).max().unwrap_or(0);
    let mut derivation = Vec::new();
    if conflict_level > 0 {
        loop {
            let at_level: Vec<Literal> =
                clause.iter().copied().filter(|&l| level_of(l) == conflict_level).collect();
            if at_level.len() == 1 {
                break;
            }
            let pivot = at_level.into_iter().max_by_key(|&l| falsifier(l)).unwrap();
            let pos = falsifier(pivot);
            let entry = &t.entries()[pos];
            if entry.is_decision() {
                return Err(Error::DecisionHasNoReason(pos));
            }
            note_clause(entry, &mut used_clauses);
            let reason = reason_clause(p, &s.store, entry)?;
            clause.remove(&pivot);
            clause.extend(reason.iter().filter(|&l| l != entry.literal));
            derivation.push(pos);
        }
    }

    let learned = Clause::new(clause.iter().copied());
    let asserting = learned
        .iter()
        .max_by_key(|&l| falsifier(l))
        .expect("conflict clause is non-empty");
    let backjump_level = learned
        .iter()
        .filter(|&l| l != asserting)
        .map(level_of)
        .max()
        .unwrap_or(0);
    Ok(ConflictAnalysis {
        learned,
        asserting,
        backjump_level,
        conflict_level,
        derivation,
        used_clauses,
        at_root: conflict_level == 0,
    })
}

/// Applies Backjump LP for `a`, then Learn LP unless the state reached is
/// semi-terminal (or `learn` is off). When the learned clause is already in
/// the store it is not added again; the asserted entry is tied to the
/// stored copy instead.
///
/// For a conflict at the root the asserted literal is one whose complement
/// survives in the level-0 prefix, so the resulting trail is inconsistent
/// without decisions and Fail follows.
pub fn backjump_and_learn(
    s: &mut SolverState,
    a: &ConflictAnalysis,
    learn: bool,
    origin: ClauseOrigin,
    semi_terminal: &dyn Fn(&SolverState) -> bool,
) -> Result<(Vec<Transition>, Option<ClauseId>)> {
    let backjump = Transition::Backjump {
        level: a.backjump_level,
        literal: a.asserting,
        clause: a.learned.clone(),
        derivation: a.derivation.clone(),
    };
    s.trail.backjump_to(
        a.backjump_level,
        a.asserting,
        Reason::Backjump { clause: a.learned.clone(), id: None },
    )?;
    let mut applied = vec![backjump];
    if !learn || semi_terminal(s) {
        return Ok((applied, None));
    }
    let top = s.trail.len() - 1;
    let new_id = s.store.insert(a.learned.clone(), origin);
    let id = new_id.or_else(|| s.store.find(&a.learned));
    if let Some(Reason::Backjump { id: slot, .. }) = &mut s.trail.entry_mut(top).reason {
        *slot = id;
    }
    if new_id.is_some() {
        applied.push(Transition::Learn { clause: a.learned.clone() });
    }
    Ok((applied, new_id))
}

/// Generic application of a Backjump LP or Learn LP edge.
pub(crate) fn apply_backjump_or_learn(s: &mut SolverState, t: &Transition) -> Result<()> {
    match t {
        Transition::Backjump { level, literal, clause, .. } => {
            let id = s.store.find(clause);
            s.trail
                .backjump_to(*level, *literal, Reason::Backjump { clause: clause.clone(), id })
        }
        Transition::Learn { clause } => {
            if let Some(id) = s.store.insert(clause.clone(), ClauseOrigin::Learned) {
                let top = s.trail.len().checked_sub(1);
                if let Some(top) = top {
                    if let Some(Reason::Backjump { clause: c, id: slot }) = &mut s.trail.entry_mut(top).reason {
                        if c == clause {
                            *slot = Some(id);
                        }
                    }
                }
            }
            Ok(())
        }
        _ => unreachable!("not a backjump or learn transition"),
    }
}
