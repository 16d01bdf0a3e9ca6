//! The transition rules: applicability, enumeration and application.
//!
//! Every `scan_*` function visits the available transitions of one rule in a
//! fixed order and stops as soon as the visitor returns `false`, so the
//! engine can take the first one without materializing the rest. The public
//! per-rule functions collect the full sequence.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::program::{Atom, Literal, Program, RuleId};
use crate::state::{Clause, ClauseId, Reason, SolverState, Trail};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RuleKind {
    Decide,
    UnitPropagateLP,
    AllRulesCancelled,
    BackchainTrue,
    BackchainFalse,
    Unfounded,
    BackjumpLP,
    LearnLP,
    Fail,
    Restart,
    ForgetLP,
}

impl RuleKind {
    pub const ALL: [RuleKind; 11] = [
        RuleKind::Decide,
        RuleKind::UnitPropagateLP,
        RuleKind::AllRulesCancelled,
        RuleKind::BackchainTrue,
        RuleKind::BackchainFalse,
        RuleKind::Unfounded,
        RuleKind::BackjumpLP,
        RuleKind::LearnLP,
        RuleKind::Fail,
        RuleKind::Restart,
        RuleKind::ForgetLP,
    ];

    /// Rules that count for semi-terminality (everything but Learn LP,
    /// Restart and Forget LP).
    pub const BASIC: [RuleKind; 8] = [
        RuleKind::BackjumpLP,
        RuleKind::Fail,
        RuleKind::UnitPropagateLP,
        RuleKind::AllRulesCancelled,
        RuleKind::BackchainTrue,
        RuleKind::BackchainFalse,
        RuleKind::Unfounded,
        RuleKind::Decide,
    ];

    /// Rules that extend the trail by one implied literal.
    pub const PROPAGATING: [RuleKind; 5] = [
        RuleKind::UnitPropagateLP,
        RuleKind::AllRulesCancelled,
        RuleKind::BackchainTrue,
        RuleKind::BackchainFalse,
        RuleKind::Unfounded,
    ];

    pub fn is_basic(self) -> bool {
        Self::BASIC.contains(&self)
    }

    pub fn name(self) -> &'static str {
        match self {
            RuleKind::Decide => "Decide",
            RuleKind::UnitPropagateLP => "UnitPropagateLP",
            RuleKind::AllRulesCancelled => "AllRulesCancelled",
            RuleKind::BackchainTrue => "BackchainTrue",
            RuleKind::BackchainFalse => "BackchainFalse",
            RuleKind::Unfounded => "Unfounded",
            RuleKind::BackjumpLP => "BackjumpLP",
            RuleKind::LearnLP => "LearnLP",
            RuleKind::Fail => "Fail",
            RuleKind::Restart => "Restart",
            RuleKind::ForgetLP => "ForgetLP",
        }
    }
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RuleKind {
    type Err = Error;

    /// Accepts the full names and the short forms `d`, `up`, `arc`, `bt`,
    /// `bf`, `unf`, `bj`, `learn`, `fail`, `restart`, `forget`.
    fn from_str(s: &str) -> Result<Self> {
        let k = match s {
            "Decide" | "d" => RuleKind::Decide,
            "UnitPropagateLP" | "up" => RuleKind::UnitPropagateLP,
            "AllRulesCancelled" | "arc" => RuleKind::AllRulesCancelled,
            "BackchainTrue" | "bt" => RuleKind::BackchainTrue,
            "BackchainFalse" | "bf" => RuleKind::BackchainFalse,
            "Unfounded" | "unf" => RuleKind::Unfounded,
            "BackjumpLP" | "bj" => RuleKind::BackjumpLP,
            "LearnLP" | "learn" => RuleKind::LearnLP,
            "Fail" | "fail" => RuleKind::Fail,
            "Restart" | "restart" => RuleKind::Restart,
            "ForgetLP" | "forget" => RuleKind::ForgetLP,
            other => return Err(Error::TierSpec(format!("unknown rule `{other}`"))),
        };
        Ok(k)
    }
}

/// A labeled edge of the transition graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Transition {
    /// UP, ARC, BT, BF or Unfounded: `M -> M l`.
    Derive { kind: RuleKind, literal: Literal, reason: Reason },
    Decide(Literal),
    Fail,
    Restart,
    Forget { id: ClauseId, clause: Clause },
    /// `P l^Δ Q -> P l'`, justified by `clause` obtained by resolving the
    /// reasons of the trail entries listed in `derivation`.
    Backjump { level: u32, literal: Literal, clause: Clause, derivation: Vec<usize> },
    Learn { clause: Clause },
}

impl Transition {
    pub fn kind(&self) -> RuleKind {
        match self {
            Transition::Derive { kind, .. } => *kind,
            Transition::Decide(_) => RuleKind::Decide,
            Transition::Fail => RuleKind::Fail,
            Transition::Restart => RuleKind::Restart,
            Transition::Forget { .. } => RuleKind::ForgetLP,
            Transition::Backjump { .. } => RuleKind::BackjumpLP,
            Transition::Learn { .. } => RuleKind::LearnLP,
        }
    }

    pub fn literal(&self) -> Option<Literal> {
        match self {
            Transition::Derive { literal, .. } | Transition::Backjump { literal, .. } => Some(*literal),
            Transition::Decide(l) => Some(*l),
            _ => None,
        }
    }
}

/// Lowest-index body literal of `rule` whose complement is on the trail.
pub fn falsified_witness(p: &Program, t: &Trail, rule: RuleId) -> Option<Literal> {
    p.rule(rule).body.iter().copied().find(|&l| t.falsifies(l))
}

fn body_falsified(p: &Program, t: &Trail, rule: RuleId) -> bool {
    falsified_witness(p, t, rule).is_some()
}

pub fn scan_unit_propagate(p: &Program, s: &SolverState, visit: &mut dyn FnMut(Transition) -> bool) {
    let t = &s.trail;
    for (i, r) in p.rules().iter().enumerate() {
        if !t.has(r.head.pos()) && r.body.iter().all(|&l| t.has(l)) {
            let tr = Transition::Derive {
                kind: RuleKind::UnitPropagateLP,
                literal: r.head.pos(),
                reason: Reason::Rule(i),
            };
            if !visit(tr) {
                return;
            }
        }
    }
    for c in s.store.iter() {
        if c.clause.iter().any(|l| t.has(l)) {
            continue;
        }
        let open: Vec<Literal> = c.clause.iter().filter(|&l| !t.falsifies(l)).collect();
        // A clause falsified outright lets any of its literals play the
        // remaining one.
        let candidates: Vec<Literal> = match open.len() {
            0 => c.clause.iter().collect(),
            1 => open,
            _ => continue,
        };
        for l in candidates {
            let tr = Transition::Derive {
                kind: RuleKind::UnitPropagateLP,
                literal: l,
                reason: Reason::Clause(c.id),
            };
            if !visit(tr) {
                return;
            }
        }
    }
}

pub fn scan_all_rules_cancelled(p: &Program, s: &SolverState, visit: &mut dyn FnMut(Transition) -> bool) {
    let t = &s.trail;
    'atoms: for a in p.atoms() {
        if t.has(a.neg()) {
            continue;
        }
        let mut witnesses = Vec::with_capacity(p.head_index(a).len());
        for &ri in p.head_index(a) {
            match falsified_witness(p, t, ri) {
                Some(w) => witnesses.push((ri, w)),
                None => continue 'atoms,
            }
        }
        let tr = Transition::Derive {
            kind: RuleKind::AllRulesCancelled,
            literal: a.neg(),
            reason: Reason::Cancelled { witnesses },
        };
        if !visit(tr) {
            return;
        }
    }
}

pub fn scan_backchain_true(p: &Program, s: &SolverState, visit: &mut dyn FnMut(Transition) -> bool) {
    let t = &s.trail;
    for a in p.atoms() {
        if !t.has(a.pos()) {
            continue;
        }
        let mut survivor = None;
        let mut witnesses = Vec::new();
        let mut open = 0;
        for &ri in p.head_index(a) {
            match falsified_witness(p, t, ri) {
                Some(w) => witnesses.push((ri, w)),
                None => {
                    open += 1;
                    survivor = Some(ri);
                }
            }
        }
        let (1, Some(rule)) = (open, survivor) else {
            continue;
        };
        for &l in &p.rule(rule).body {
            if t.has(l) {
                continue;
            }
            let tr = Transition::Derive {
                kind: RuleKind::BackchainTrue,
                literal: l,
                reason: Reason::BackchainTrue { rule, witnesses: witnesses.clone() },
            };
            if !visit(tr) {
                return;
            }
        }
    }
}

pub fn scan_backchain_false(p: &Program, s: &SolverState, visit: &mut dyn FnMut(Transition) -> bool) {
    let t = &s.trail;
    for (i, r) in p.rules().iter().enumerate() {
        if !t.has(r.head.neg()) {
            continue;
        }
        let mut missing = r.body.iter().copied().filter(|&l| !t.has(l));
        let (Some(l), None) = (missing.next(), missing.next()) else {
            continue;
        };
        if t.has(!l) {
            continue;
        }
        let tr = Transition::Derive {
            kind: RuleKind::BackchainFalse,
            literal: !l,
            reason: Reason::BackchainFalse { rule: i },
        };
        if !visit(tr) {
            return;
        }
    }
}

/// The greatest unfounded set of `p` with respect to the consistent trail
/// `t`, without the atoms that are already false on `t`.
///
/// Computed from below: an atom is founded when some rule for it has a body
/// not falsified by `t` whose positive atoms are all founded; everything
/// never founded is unfounded.
pub fn greatest_unfounded_set(p: &Program, t: &Trail) -> Result<Vec<Atom>> {
    if !t.is_consistent() {
        return Err(Error::TrailInconsistent);
    }
    let n = p.num_atoms();
    let mut founded = vec![false; n];
    // Per rule: number of distinct positive body atoms not yet founded, or
    // None if the body is falsified.
    let mut waiting: Vec<Option<usize>> = Vec::with_capacity(p.rules().len());
    let mut watchers: Vec<Vec<RuleId>> = vec![Vec::new(); n];
    let mut queue = Vec::new();
    for (i, r) in p.rules().iter().enumerate() {
        if body_falsified(p, t, i) {
            waiting.push(None);
            continue;
        }
        let mut pos: Vec<Atom> = r.pos_body().collect();
        pos.sort_unstable();
        pos.dedup();
        for &b in &pos {
            watchers[b.index()].push(i);
        }
        waiting.push(Some(pos.len()));
        if pos.is_empty() && !founded[r.head.index()] {
            founded[r.head.index()] = true;
            queue.push(r.head);
        }
    }
    while let Some(a) = queue.pop() {
        for &ri in &watchers[a.index()] {
            let Some(count) = waiting[ri].as_mut() else { continue };
            *count -= 1;
            let head = p.rule(ri).head;
            if *count == 0 && !founded[head.index()] {
                founded[head.index()] = true;
                queue.push(head);
            }
        }
    }
    Ok(p
        .atoms()
        .filter(|&a| !founded[a.index()] && !t.has(a.neg()))
        .collect())
}

/// One falsified literal per rule that supports `set` from outside (head in
/// the set, no positive body atom in it).
pub fn external_witnesses(p: &Program, t: &Trail, set: &[Atom]) -> Vec<(RuleId, Literal)> {
    let mut member = vec![false; p.num_atoms()];
    for a in set {
        member[a.index()] = true;
    }
    let mut out = Vec::new();
    for &a in set {
        for &ri in p.head_index(a) {
            if p.rule(ri).pos_body().any(|b| member[b.index()]) {
                continue;
            }
            if let Some(w) = falsified_witness(p, t, ri) {
                out.push((ri, w));
            }
        }
    }
    out
}

pub fn scan_unfounded(p: &Program, s: &SolverState, visit: &mut dyn FnMut(Transition) -> bool) {
    if !s.trail.is_consistent() {
        return;
    }
    let set = greatest_unfounded_set(p, &s.trail).expect("consistent trail");
    let Some(&a) = set.first() else { return };
    let witnesses = external_witnesses(p, &s.trail, &set);
    visit(Transition::Derive {
        kind: RuleKind::Unfounded,
        literal: a.neg(),
        reason: Reason::Unfounded { set, witnesses },
    });
}

/// Chooses the literal for Decide.
pub trait Brancher {
    /// An unassigned literal, or `None` when the trail is complete.
    fn pick(&mut self, p: &Program, t: &Trail) -> Option<Literal>;
}

/// Lowest-id unassigned atom, positive polarity.
#[derive(Debug, Clone, Copy, Default)]
pub struct StaticBrancher;

impl Brancher for StaticBrancher {
    fn pick(&mut self, p: &Program, t: &Trail) -> Option<Literal> {
        p.atoms().find(|&a| !t.is_assigned(a)).map(Atom::pos)
    }
}

pub fn unit_propagate_lp(p: &Program, s: &SolverState) -> Vec<Transition> {
    collect(p, s, scan_unit_propagate)
}

pub fn all_rules_cancelled(p: &Program, s: &SolverState) -> Vec<Transition> {
    collect(p, s, scan_all_rules_cancelled)
}

pub fn backchain_true(p: &Program, s: &SolverState) -> Vec<Transition> {
    collect(p, s, scan_backchain_true)
}

pub fn backchain_false(p: &Program, s: &SolverState) -> Vec<Transition> {
    collect(p, s, scan_backchain_false)
}

pub fn unfounded(p: &Program, s: &SolverState) -> Vec<Transition> {
    collect(p, s, scan_unfounded)
}

type Scanner = fn(&Program, &SolverState, &mut dyn FnMut(Transition) -> bool);

fn collect(p: &Program, s: &SolverState, scan: Scanner) -> Vec<Transition> {
    let mut out = Vec::new();
    if !s.failed {
        scan(p, s, &mut |t| {
            out.push(t);
            true
        });
    }
    out
}

pub fn decide(p: &Program, s: &SolverState, brancher: &mut dyn Brancher) -> Option<Transition> {
    if s.failed || !s.trail.is_consistent() {
        return None;
    }
    brancher.pick(p, &s.trail).map(Transition::Decide)
}

pub fn fail(s: &SolverState) -> Option<Transition> {
    (!s.failed && !s.trail.is_consistent() && !s.trail.has_decision()).then_some(Transition::Fail)
}

pub fn restart(s: &SolverState) -> Result<Transition> {
    if s.trail.is_empty() {
        return Err(Error::EmptyTrail);
    }
    Ok(Transition::Restart)
}

pub fn forget(s: &SolverState, id: ClauseId) -> Result<Transition> {
    let c = s.store.get(id).ok_or(Error::ClauseAbsent(id))?;
    if s.pinned().contains(&id) {
        return Err(Error::ClausePinned(id));
    }
    Ok(Transition::Forget { id, clause: c.clause.clone() })
}

/// First available transition of `kind`, in enumeration order. Backjump LP
/// and Learn LP are produced by conflict analysis, Restart and Forget LP by
/// the engine's policies; for those this returns `None`.
pub fn first_of(p: &Program, s: &SolverState, kind: RuleKind, brancher: &mut dyn Brancher) -> Option<Transition> {
    if s.failed {
        return None;
    }
    let scan: Scanner = match kind {
        RuleKind::UnitPropagateLP => scan_unit_propagate,
        RuleKind::AllRulesCancelled => scan_all_rules_cancelled,
        RuleKind::BackchainTrue => scan_backchain_true,
        RuleKind::BackchainFalse => scan_backchain_false,
        RuleKind::Unfounded => scan_unfounded,
        RuleKind::Decide => return decide(p, s, brancher),
        RuleKind::Fail => return fail(s),
        _ => return None,
    };
    let mut found = None;
    scan(p, s, &mut |t| {
        found = Some(t);
        false
    });
    found
}

/// Whether any transition of basic rule `kind` applies.
pub fn is_applicable(p: &Program, s: &SolverState, kind: RuleKind) -> bool {
    match kind {
        RuleKind::BackjumpLP => !s.failed && !s.trail.is_consistent() && s.trail.has_decision(),
        RuleKind::Fail => fail(s).is_some(),
        RuleKind::Decide => {
            !s.failed && s.trail.is_consistent() && !s.trail.is_complete(p.num_atoms())
        }
        _ => first_of(p, s, kind, &mut StaticBrancher).is_some(),
    }
}

/// No rule among `enabled` (restricted to basic rules) applies.
pub fn is_semi_terminal(p: &Program, s: &SolverState, enabled: &dyn Fn(RuleKind) -> bool) -> bool {
    if s.failed {
        return false;
    }
    if !s.trail.is_consistent() {
        return !(enabled(RuleKind::BackjumpLP) || enabled(RuleKind::Fail));
    }
    RuleKind::BASIC
        .iter()
        .filter(|&&k| enabled(k))
        .all(|&k| !is_applicable(p, s, k))
}

/// Applies a Derive, Decide, Fail, Restart or Forget LP transition.
pub fn apply(s: &mut SolverState, t: &Transition) -> Result<()> {
    if s.failed {
        return Err(Error::Failed);
    }
    match t {
        Transition::Derive { literal, reason, .. } => s.trail.assign(*literal, Some(reason.clone())),
        Transition::Decide(l) => s.trail.assign(*l, None),
        Transition::Fail => {
            s.failed = true;
            Ok(())
        }
        Transition::Restart => {
            if s.trail.is_empty() {
                return Err(Error::EmptyTrail);
            }
            s.trail.clear();
            Ok(())
        }
        Transition::Forget { id, .. } => {
            if s.pinned().contains(id) {
                return Err(Error::ClausePinned(*id));
            }
            s.store.remove(*id).map(|_| ()).ok_or(Error::ClauseAbsent(*id))
        }
        Transition::Backjump { .. } | Transition::Learn { .. } => {
            crate::analysis::apply_backjump_or_learn(s, t)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{ClauseOrigin, Notation};

    const P1: &str = "a :- not b. b :- not a. c :- a. d :- d. d :- b, not b.";

    fn state(p: &Program, trail: &[&str]) -> SolverState {
        let mut s = SolverState::new(p);
        for item in trail {
            let (name, decision) = match item.strip_suffix("^d") {
                Some(n) => (n, true),
                None => (*item, false),
            };
            let lit = p.parse_literal(name).unwrap();
            let reason = if decision { None } else { Some(Reason::Rule(0)) };
            s.trail.assign(lit, reason).unwrap();
        }
        s
    }

    fn derived(p: &Program, ts: &[Transition]) -> Vec<String> {
        ts.iter().map(|t| p.literal_name(t.literal().unwrap())).collect()
    }

    #[test]
    fn unit_propagate_examples() {
        let p = Program::parse(P1).unwrap();
        let ts = unit_propagate_lp(&p, &state(&p, &["a^d"]));
        assert_eq!(derived(&p, &ts), ["c"]);
        assert_eq!(ts[0], Transition::Derive {
            kind: RuleKind::UnitPropagateLP,
            literal: p.parse_literal("c").unwrap(),
            reason: Reason::Rule(2),
        });

        let q = Program::parse("a.").unwrap();
        assert_eq!(derived(&q, &unit_propagate_lp(&q, &state(&q, &[]))), ["a"]);

        let mut s = state(&p, &[]);
        let id = s.store.insert(Clause::new([p.parse_literal("-d").unwrap()]), ClauseOrigin::Learned).unwrap();
        let ts = unit_propagate_lp(&p, &s);
        assert_eq!(derived(&p, &ts), ["-d"]);
        assert!(matches!(ts[0], Transition::Derive { reason: Reason::Clause(i), .. } if i == id));
    }

    #[test]
    fn unit_propagate_on_falsified_clause_and_conflicting_head() {
        let p = Program::parse("a. b :- a.").unwrap();
        let mut s = state(&p, &["-a^d"]);
        // a. with -a on the trail derives a, making the trail inconsistent.
        let ts = unit_propagate_lp(&p, &s);
        assert_eq!(derived(&p, &ts), ["a"]);
        s.store.insert(Clause::new([p.parse_literal("a").unwrap()]), ClauseOrigin::Learned);
        assert_eq!(derived(&p, &unit_propagate_lp(&p, &s)), ["a", "a"]);
    }

    #[test]
    fn all_rules_cancelled_examples() {
        let p = Program::parse(P1).unwrap();
        let ts = all_rules_cancelled(&p, &state(&p, &["a^d", "c"]));
        assert_eq!(derived(&p, &ts), ["-b"]);
        let Transition::Derive { reason: Reason::Cancelled { witnesses }, .. } = &ts[0] else { panic!() };
        assert_eq!(witnesses, &vec![(1, p.parse_literal("-a").unwrap())]);

        let q = Program::parse("a :- not b.").unwrap();
        assert_eq!(derived(&q, &all_rules_cancelled(&q, &state(&q, &[]))), ["-b"]);

        assert!(all_rules_cancelled(&p, &state(&p, &[])).is_empty());
    }

    #[test]
    fn backchain_true_examples() {
        let p = Program::parse("a :- b. a :- c.").unwrap();
        let ts = backchain_true(&p, &state(&p, &["a^d", "-b"]));
        assert_eq!(derived(&p, &ts), ["c"]);
        let Transition::Derive { reason: Reason::BackchainTrue { rule, witnesses }, .. } = &ts[0] else {
            panic!()
        };
        assert_eq!(*rule, 1);
        assert_eq!(witnesses, &vec![(0, p.parse_literal("b").unwrap())]);
        assert!(backchain_true(&p, &state(&p, &["a^d"])).is_empty());

        let q = Program::parse("a :- b.").unwrap();
        assert_eq!(derived(&q, &backchain_true(&q, &state(&q, &["a^d"]))), ["b"]);
    }

    #[test]
    fn backchain_false_examples() {
        let p = Program::parse("a :- b, c.").unwrap();
        assert_eq!(derived(&p, &backchain_false(&p, &state(&p, &["-a^d", "b"]))), ["-c"]);
        let p = Program::parse("a :- b.").unwrap();
        assert_eq!(derived(&p, &backchain_false(&p, &state(&p, &["-a^d"]))), ["-b"]);
        let p = Program::parse("a :- not b.").unwrap();
        assert_eq!(derived(&p, &backchain_false(&p, &state(&p, &["-a^d"]))), ["b"]);
    }

    #[test]
    fn unfounded_examples() {
        let p = Program::parse(P1).unwrap();
        let d = p.atom("d").unwrap();
        let s = state(&p, &["a^d", "c", "-b"]);
        assert_eq!(greatest_unfounded_set(&p, &s.trail).unwrap(), vec![d]);
        let ts = unfounded(&p, &s);
        assert_eq!(derived(&p, &ts), ["-d"]);
        let Transition::Derive { reason: Reason::Unfounded { set, witnesses }, .. } = &ts[0] else { panic!() };
        assert_eq!(set, &vec![d]);
        // d :- b, not b supports d from outside; b is its falsified literal.
        assert_eq!(witnesses, &vec![(4, p.parse_literal("b").unwrap())]);

        let s = state(&p, &["a^d", "c", "-b", "d^d"]);
        assert_eq!(derived(&p, &unfounded(&p, &s)), ["-d"]);

        // Nothing is unfounded at the empty trail: d :- b, not b is not yet
        // falsified.
        assert!(unfounded(&p, &state(&p, &[])).is_empty());

        let q = Program::parse("a :- b. b :- a.").unwrap();
        assert_eq!(greatest_unfounded_set(&q, &state(&q, &[]).trail).unwrap(), vec![Atom(0), Atom(1)]);
        assert!(greatest_unfounded_set(&q, &state(&q, &["a", "-a"]).trail).is_err());
    }

    #[test]
    fn decide_examples() {
        let p = Program::parse(P1).unwrap();
        let t = decide(&p, &state(&p, &[]), &mut StaticBrancher);
        assert_eq!(t, Some(Transition::Decide(p.parse_literal("a").unwrap())));
        assert_eq!(decide(&p, &state(&p, &["a^d", "c", "-b", "-d"]), &mut StaticBrancher), None);
        assert_eq!(decide(&p, &state(&p, &["a^d", "-a"]), &mut StaticBrancher), None);
    }

    #[test]
    fn fail_examples() {
        let p = Program::parse("a :- not a.").unwrap();
        assert_eq!(fail(&state(&p, &["a", "-a"])), Some(Transition::Fail));
        assert_eq!(fail(&state(&p, &["a^d", "-a"])), None);
        assert_eq!(fail(&state(&p, &["-a", "a"])), Some(Transition::Fail));
    }

    #[test]
    fn restart_and_forget() {
        let p = Program::parse(P1).unwrap();
        let mut s = state(&p, &["a^d", "c"]);
        let id = s.store.insert(Clause::new([p.parse_literal("-d").unwrap()]), ClauseOrigin::Learned).unwrap();
        let t = restart(&s).unwrap();
        apply(&mut s, &t).unwrap();
        assert_eq!(crate::state::render_state(&p, &s, Notation::Ascii), "|| {-d}");
        assert_eq!(restart(&s), Err(Error::EmptyTrail));
        let t = forget(&s, id).unwrap();
        apply(&mut s, &t).unwrap();
        assert_eq!(s.render(&p), "|| {}");
        assert_eq!(forget(&s, id), Err(Error::ClauseAbsent(id)));

        let id = s.store.insert(Clause::new([p.parse_literal("-d").unwrap()]), ClauseOrigin::Learned).unwrap();
        s.trail.assign(p.parse_literal("-d").unwrap(), Some(Reason::Clause(id))).unwrap();
        assert_eq!(forget(&s, id), Err(Error::ClausePinned(id)));
    }

    #[test]
    fn semi_terminal_detection() {
        let p = Program::parse(P1).unwrap();
        let all = |_: RuleKind| true;
        assert!(is_semi_terminal(&p, &state(&p, &["a^d", "c", "-b", "-d"]), &all));
        assert!(!is_semi_terminal(&p, &state(&p, &["a^d", "c", "-b"]), &all));
        let no_unf_no_decide = |k: RuleKind| k != RuleKind::Unfounded && k != RuleKind::Decide;
        assert!(is_semi_terminal(&p, &state(&p, &["a^d", "c", "-b"]), &no_unf_no_decide));
    }

    #[test]
    fn rule_kind_names() {
        for k in RuleKind::ALL {
            assert_eq!(k.name().parse::<RuleKind>().unwrap(), k);
        }
        assert_eq!("unf".parse::<RuleKind>().unwrap(), RuleKind::Unfounded);
        assert!("zap".parse::<RuleKind>().is_err());
    }
}
