//! Trace files and their independent verification.
//!
//! A trace is a JSON-lines file: one [`TraceEvent`] per line followed by a
//! terminal marker. The verifier replays the events from `∅ || ∅` on its own
//! trail representation and recomputes every applicability condition from
//! the program and the payloads. It shares only the data types (program,
//! literals, clauses) with the engine.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::engine::Strategy;
use crate::error::{Error, Result};
use crate::oracle;
use crate::program::{Atom, Literal, Program, RuleId};
use crate::rules::{RuleKind, Transition};
use crate::state::{Clause, Reason, SolverState};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub rule: RuleId,
    pub lit: String,
}

/// Justification of an event; the variant is fixed per rule kind.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Payload {
    /// Unit Propagate LP through a program rule.
    Rule { rule: RuleId },
    /// Unit Propagate LP through a stored clause, Learn LP and Forget LP.
    Clause { clause: Vec<String> },
    Cancelled { witnesses: Vec<Witness> },
    /// Backchain True (with witnesses for the other rules) and Backchain
    /// False (without).
    Backchain {
        rule: RuleId,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        witnesses: Vec<Witness>,
    },
    Unfounded { set: Vec<String>, witnesses: Vec<Witness> },
    /// `derivation` lists the trail positions (0-based) resolved on,
    /// starting from the reason of the last trail entry.
    Backjump {
        level: u32,
        clause: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        derivation: Option<Vec<usize>>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceEvent {
    /// 1-based position in the trace.
    pub idx: usize,
    pub rule: RuleKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lit: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<Payload>,
    /// The state after the event, for debugging; checked when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub digest: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndKind {
    SemiTerminal,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceEnd {
    pub end: EndKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answer_set: Option<Vec<String>>,
}

impl TraceEnd {
    pub fn semi_terminal(p: &Program, atoms: &[Atom]) -> Self {
        TraceEnd {
            end: EndKind::SemiTerminal,
            answer_set: Some(atoms.iter().map(|&a| p.name(a).to_string()).collect()),
        }
    }

    pub fn fail() -> Self {
        TraceEnd { end: EndKind::Fail, answer_set: None }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
    pub end: Option<TraceEnd>,
}

impl Trace {
    pub fn to_jsonl(&self) -> String {
        let mut out = Vec::new();
        write_trace(self, &mut out).expect("writing to memory");
        String::from_utf8(out).expect("JSON is UTF-8")
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        read_trace(text.as_bytes())
    }

    /// Drops the digests, e.g. before mutating events.
    pub fn without_digests(&self) -> Self {
        let mut t = self.clone();
        for e in &mut t.events {
            e.digest = None;
        }
        t
    }
}

pub fn write_trace(trace: &Trace, sink: &mut dyn Write) -> Result<()> {
    for e in &trace.events {
        let line = serde_json::to_string(e).map_err(|e| Error::Io(e.to_string()))?;
        writeln!(sink, "{line}")?;
    }
    if let Some(end) = &trace.end {
        let line = serde_json::to_string(end).map_err(|e| Error::Io(e.to_string()))?;
        writeln!(sink, "{line}")?;
    }
    Ok(())
}

/// Reads events and an optional terminal marker. Blank lines are skipped;
/// anything after the marker is an error.
pub fn read_trace(source: impl BufRead) -> Result<Trace> {
    let mut trace = Trace::default();
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        let n = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| Error::TraceRecord { line: n, message };
        if trace.end.is_some() {
            return Err(bad("record after the terminal marker".into()));
        }
        let value: serde_json::Value = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
        if value.get("end").is_some() {
            trace.end = Some(serde_json::from_value(value).map_err(|e| bad(e.to_string()))?);
        } else {
            trace.events.push(serde_json::from_value(value).map_err(|e| bad(e.to_string()))?);
        }
    }
    Ok(trace)
}

fn witnesses(p: &Program, ws: &[(RuleId, Literal)]) -> Vec<Witness> {
    ws.iter().map(|&(rule, l)| Witness { rule, lit: p.literal_name(l) }).collect()
}

fn clause_names(p: &Program, c: &Clause) -> Vec<String> {
    c.iter().map(|l| p.literal_name(l)).collect()
}

/// The event for `t` taken in state `s` (before it is applied).
pub fn event_from_transition(p: &Program, idx: usize, t: &Transition, s: &SolverState) -> TraceEvent {
    let payload = match t {
        Transition::Derive { reason, .. } => Some(match reason {
            Reason::Rule(rule) => Payload::Rule { rule: *rule },
            Reason::Clause(id) => {
                let c = &s.store.get(*id).expect("reason clause is stored").clause;
                Payload::Clause { clause: clause_names(p, c) }
            }
            Reason::Cancelled { witnesses: ws } => Payload::Cancelled { witnesses: witnesses(p, ws) },
            Reason::BackchainTrue { rule, witnesses: ws } => {
                Payload::Backchain { rule: *rule, witnesses: witnesses(p, ws) }
            }
            Reason::BackchainFalse { rule } => Payload::Backchain { rule: *rule, witnesses: Vec::new() },
            Reason::Unfounded { set, witnesses: ws } => Payload::Unfounded {
                set: set.iter().map(|&a| p.name(a).to_string()).collect(),
                witnesses: witnesses(p, ws),
            },
            Reason::Backjump { .. } => unreachable!("backjump reasons come from Backjump LP"),
        }),
        Transition::Backjump { level, clause, derivation, .. } => Some(Payload::Backjump {
            level: *level,
            clause: clause_names(p, clause),
            derivation: Some(derivation.clone()),
        }),
        Transition::Learn { clause } | Transition::Forget { clause, .. } => {
            Some(Payload::Clause { clause: clause_names(p, clause) })
        }
        Transition::Decide(_) | Transition::Fail | Transition::Restart => None,
    };
    TraceEvent {
        idx,
        rule: t.kind(),
        lit: t.literal().map(|l| p.literal_name(l)),
        payload,
        digest: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Syntactic,
    /// Also checks Learn LP and Backjump LP clauses for entailment with the
    /// brute-force oracle.
    Semantic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct VerifyOptions {
    pub mode: Mode,
    /// Accept a trace without a terminal marker.
    pub prefix_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Valid { warnings: Vec<String> },
    /// `step` is the 1-based event index; one past the last event for
    /// problems with the terminal marker.
    Invalid { step: usize, reason: String },
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Conformance {
    Conformant,
    NonConformant { step: usize, reason: String },
}

impl Conformance {
    pub fn is_conformant(&self) -> bool {
        matches!(self, Conformance::Conformant)
    }
}

#[derive(Debug, Clone)]
struct Entry {
    lit: Literal,
    level: u32,
    /// `None` for decisions.
    reason: Option<Clause>,
    /// Derived by clause propagation or asserted by a backjump: the entry
    /// pins its reason clause while that clause is stored.
    from_store: bool,
}

/// The verifier's own model of a state.
#[derive(Debug, Clone)]
struct Replay<'p> {
    p: &'p Program,
    slot: Vec<bool>,
    entries: Vec<Entry>,
    clashes: usize,
    store: Vec<Clause>,
    failed: bool,
    last_backjump: Option<Clause>,
}

fn key(l: Literal) -> usize {
    2 * l.atom().index() + usize::from(!l.is_positive())
}

type Check<T = ()> = std::result::Result<T, String>;

impl<'p> Replay<'p> {
    fn new(p: &'p Program) -> Self {
        Replay {
            p,
            slot: vec![false; 2 * p.num_atoms()],
            entries: Vec::new(),
            clashes: 0,
            store: Vec::new(),
            failed: false,
            last_backjump: None,
        }
    }

    fn has(&self, l: Literal) -> bool {
        self.slot[key(l)]
    }

    fn falsifies(&self, l: Literal) -> bool {
        self.has(!l)
    }

    fn assigned(&self, a: Atom) -> bool {
        self.has(a.pos()) || self.has(a.neg())
    }

    fn level(&self) -> u32 {
        self.entries.last().map_or(0, |e| e.level)
    }

    fn consistent(&self) -> bool {
        self.clashes == 0
    }

    fn has_decision(&self) -> bool {
        self.entries.iter().any(|e| e.reason.is_none())
    }

    fn complete(&self) -> bool {
        self.p.atoms().all(|a| self.assigned(a))
    }

    fn push(&mut self, lit: Literal, reason: Option<Clause>, from_store: bool) {
        let level = self.level() + u32::from(reason.is_none());
        if self.has(!lit) {
            self.clashes += 1;
        }
        self.slot[key(lit)] = true;
        self.entries.push(Entry { lit, level, reason, from_store });
    }

    fn truncate(&mut self, len: usize) {
        while self.entries.len() > len {
            let e = self.entries.pop().expect("non-empty");
            self.slot[key(e.lit)] = false;
            if self.has(!e.lit) {
                self.clashes -= 1;
            }
        }
    }

    fn true_atoms(&self) -> Vec<Atom> {
        self.p.atoms().filter(|&a| self.has(a.pos())).collect()
    }

    fn render(&self) -> String {
        if self.failed {
            return "FailState".into();
        }
        let mut parts: Vec<String> = self
            .entries
            .iter()
            .map(|e| {
                let d = if e.reason.is_none() { "^d" } else { "" };
                format!("{}{d}", self.p.literal_name(e.lit))
            })
            .collect();
        let clauses: Vec<String> = self.store.iter().map(|c| c.render(self.p)).collect();
        parts.push(format!("|| {{{}}}", clauses.join(", ")));
        parts.join(" ")
    }

    fn rule_clause(&self, r: RuleId) -> Clause {
        let rule = self.p.rule(r);
        std::iter::once(rule.head.pos()).chain(rule.body.iter().map(|&l| !l)).collect()
    }

    fn body_true(&self, r: RuleId) -> bool {
        self.p.rule(r).body.iter().all(|&l| self.has(l))
    }

    fn body_false(&self, r: RuleId) -> bool {
        self.p.rule(r).body.iter().any(|&l| self.falsifies(l))
    }

    // Applicability of each basic rule, computed without payloads.

    fn up_applicable(&self) -> bool {
        let rules = (0..self.p.rules().len()).any(|r| self.body_true(r) && !self.has(self.p.rule(r).head.pos()));
        rules
            || self.store.iter().any(|c| {
                !c.iter().any(|l| self.has(l)) && c.iter().filter(|&l| !self.falsifies(l)).count() <= 1
            })
    }

    fn arc_applicable(&self) -> bool {
        self.p
            .atoms()
            .any(|a| !self.has(a.neg()) && self.p.head_index(a).iter().all(|&r| self.body_false(r)))
    }

    fn bt_applicable(&self) -> bool {
        self.p.atoms().filter(|&a| self.has(a.pos())).any(|a| {
            let open: Vec<RuleId> = self.p.head_index(a).iter().copied().filter(|&r| !self.body_false(r)).collect();
            open.len() == 1 && !self.body_true(open[0])
        })
    }

    fn bf_applicable(&self) -> bool {
        (0..self.p.rules().len()).any(|r| {
            let rule = self.p.rule(r);
            if !self.has(rule.head.neg()) {
                return false;
            }
            let missing: Vec<Literal> = rule.body.iter().copied().filter(|&l| !self.has(l)).collect();
            missing.len() == 1 && !self.has(!missing[0])
        })
    }

    /// Greatest unfounded set by removal: start from every atom and drop
    /// atoms with a rule whose body is not falsified and has no positive
    /// atom left in the set.
    fn greatest_unfounded(&self) -> Vec<Atom> {
        let mut member = vec![true; self.p.num_atoms()];
        loop {
            let mut changed = false;
            for (r, rule) in self.p.rules().iter().enumerate() {
                if member[rule.head.index()]
                    && !self.body_false(r)
                    && rule.pos_body().all(|b| !member[b.index()])
                {
                    member[rule.head.index()] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        self.p.atoms().filter(|a| member[a.index()]).collect()
    }

    fn unfounded_applicable(&self) -> bool {
        self.consistent() && self.greatest_unfounded().iter().any(|&a| !self.has(a.neg()))
    }

    fn decide_applicable(&self) -> bool {
        !self.complete()
    }

    fn applicable(&self, kind: RuleKind) -> bool {
        if self.failed {
            return false;
        }
        if !self.consistent() {
            return match kind {
                RuleKind::BackjumpLP => self.has_decision(),
                RuleKind::Fail => !self.has_decision(),
                _ => false,
            };
        }
        match kind {
            RuleKind::UnitPropagateLP => self.up_applicable(),
            RuleKind::AllRulesCancelled => self.arc_applicable(),
            RuleKind::BackchainTrue => self.bt_applicable(),
            RuleKind::BackchainFalse => self.bf_applicable(),
            RuleKind::Unfounded => self.unfounded_applicable(),
            RuleKind::Decide => self.decide_applicable(),
            _ => false,
        }
    }

    fn semi_terminal(&self, enabled: &dyn Fn(RuleKind) -> bool) -> bool {
        !self.failed && RuleKind::BASIC.iter().filter(|&&k| enabled(k)).all(|&k| !self.applicable(k))
    }

    // Event checking.

    fn lit(&self, s: &str) -> Check<Literal> {
        self.p.parse_literal(s).map_err(|e| e.to_string())
    }

    fn clause(&self, lits: &[String]) -> Check<Clause> {
        lits.iter().map(|s| self.lit(s)).collect()
    }

    fn witness(&self, w: &Witness) -> Check<(RuleId, Literal)> {
        if w.rule >= self.p.rules().len() {
            return Err(format!("no rule {}", w.rule));
        }
        let l = self.lit(&w.lit)?;
        if !self.p.rule(w.rule).body.contains(&l) {
            return Err(format!("{} is not in the body of rule {}", w.lit, w.rule));
        }
        if !self.falsifies(l) {
            return Err(format!("witness {} of rule {} is not falsified", w.lit, w.rule));
        }
        Ok((w.rule, l))
    }

    /// Witnesses must cover exactly the rules in `rules`, once each.
    fn witness_cover(&self, ws: &[Witness], rules: &BTreeSet<RuleId>) -> Check<Vec<Literal>> {
        let mut seen = BTreeSet::new();
        let mut lits = Vec::new();
        for w in ws {
            let (r, l) = self.witness(w)?;
            if !rules.contains(&r) {
                return Err(format!("rule {r} needs no witness here"));
            }
            if !seen.insert(r) {
                return Err(format!("rule {r} witnessed twice"));
            }
            lits.push(l);
        }
        if let Some(r) = rules.iter().find(|r| !seen.contains(r)) {
            return Err(format!("rule {r} has no witness"));
        }
        Ok(lits)
    }

    fn derived(&self, e: &TraceEvent) -> Check<Literal> {
        let s = e.lit.as_deref().ok_or("missing literal")?;
        let l = self.lit(s)?;
        if self.has(l) {
            return Err(format!("{s} is already on the trail"));
        }
        Ok(l)
    }

    fn no_payload(e: &TraceEvent) -> Check {
        match e.payload {
            None => Ok(()),
            Some(_) => Err(format!("{} takes no payload", e.rule)),
        }
    }

    fn propagation_pre(&self) -> Check {
        if !self.consistent() {
            return Err("the trail is inconsistent".into());
        }
        Ok(())
    }

    /// Checks `e` against the current state and applies it.
    fn step(&mut self, e: &TraceEvent, answers: Option<&[Vec<Atom>]>, warnings: &mut Vec<String>) -> Check {
        if self.failed {
            return Err("no transition leaves FailState".into());
        }
        let backjump_before = self.last_backjump.take();
        match e.rule {
            RuleKind::Decide => {
                Self::no_payload(e)?;
                self.propagation_pre()?;
                let l = self.derived(e)?;
                if self.assigned(l.atom()) {
                    return Err(format!("{} is already assigned", self.p.name(l.atom())));
                }
                self.push(l, None, false);
            }
            RuleKind::UnitPropagateLP => {
                self.propagation_pre()?;
                let l = self.derived(e)?;
                match &e.payload {
                    Some(Payload::Rule { rule }) => {
                        let r = *rule;
                        if r >= self.p.rules().len() {
                            return Err(format!("no rule {r}"));
                        }
                        if l != self.p.rule(r).head.pos() {
                            return Err(format!("{} is not the head of rule {r}", e.lit.as_deref().unwrap_or("")));
                        }
                        if !self.body_true(r) {
                            return Err(format!("the body of rule {r} is not satisfied"));
                        }
                        let reason = self.rule_clause(r);
                        self.push(l, Some(reason), false);
                    }
                    Some(Payload::Clause { clause }) => {
                        let c = self.clause(clause)?;
                        if !self.store.contains(&c) {
                            return Err("clause is not in the store".into());
                        }
                        if !c.contains(l) {
                            return Err("literal is not in the clause".into());
                        }
                        if c.iter().any(|x| x != l && !self.falsifies(x)) {
                            return Err("clause is not unit".into());
                        }
                        self.push(l, Some(c), true);
                    }
                    _ => return Err("expected a rule or clause payload".into()),
                }
            }
            RuleKind::AllRulesCancelled => {
                self.propagation_pre()?;
                let l = self.derived(e)?;
                if l.is_positive() {
                    return Err("All Rules Cancelled derives a negative literal".into());
                }
                let Some(Payload::Cancelled { witnesses }) = &e.payload else {
                    return Err("expected a cancelled payload".into());
                };
                let rules: BTreeSet<RuleId> = self.p.head_index(l.atom()).iter().copied().collect();
                let lits = self.witness_cover(witnesses, &rules)?;
                let reason = std::iter::once(l).chain(lits).collect();
                self.push(l, Some(reason), false);
            }
            RuleKind::BackchainTrue => {
                self.propagation_pre()?;
                let l = self.derived(e)?;
                let Some(Payload::Backchain { rule, witnesses }) = &e.payload else {
                    return Err("expected a backchain payload".into());
                };
                let r = *rule;
                if r >= self.p.rules().len() {
                    return Err(format!("no rule {r}"));
                }
                let head = self.p.rule(r).head;
                if !self.has(head.pos()) {
                    return Err(format!("head {} is not true", self.p.name(head)));
                }
                if !self.p.rule(r).body.contains(&l) {
                    return Err(format!("literal is not in the body of rule {r}"));
                }
                let others: BTreeSet<RuleId> = self.p.head_index(head).iter().copied().filter(|&x| x != r).collect();
                let lits = self.witness_cover(witnesses, &others)?;
                let reason = [l, head.neg()].into_iter().chain(lits).collect();
                self.push(l, Some(reason), false);
            }
            RuleKind::BackchainFalse => {
                self.propagation_pre()?;
                let l = self.derived(e)?;
                let Some(Payload::Backchain { rule, witnesses }) = &e.payload else {
                    return Err("expected a backchain payload".into());
                };
                if !witnesses.is_empty() {
                    return Err("Backchain False takes no witnesses".into());
                }
                let r = *rule;
                if r >= self.p.rules().len() {
                    return Err(format!("no rule {r}"));
                }
                let rule = self.p.rule(r);
                if !self.has(rule.head.neg()) {
                    return Err(format!("head {} is not false", self.p.name(rule.head)));
                }
                if !rule.body.contains(&!l) {
                    return Err(format!("complement of the literal is not in the body of rule {r}"));
                }
                if rule.body.iter().any(|&b| b != !l && !self.has(b)) {
                    return Err(format!("the rest of the body of rule {r} is not satisfied"));
                }
                let reason = self.rule_clause(r);
                self.push(l, Some(reason), false);
            }
            RuleKind::Unfounded => {
                self.propagation_pre()?;
                let l = self.derived(e)?;
                let Some(Payload::Unfounded { set, witnesses }) = &e.payload else {
                    return Err("expected an unfounded payload".into());
                };
                if l.is_positive() {
                    return Err("Unfounded derives a negative literal".into());
                }
                let mut member = vec![false; self.p.num_atoms()];
                for name in set {
                    let a = self.p.atom(name).ok_or_else(|| format!("unknown atom {name}"))?;
                    member[a.index()] = true;
                }
                if !member[l.atom().index()] {
                    return Err("atom is not in the unfounded set".into());
                }
                let external: BTreeSet<RuleId> = (0..self.p.rules().len())
                    .filter(|&r| {
                        let rule = self.p.rule(r);
                        member[rule.head.index()] && rule.pos_body().all(|b| !member[b.index()])
                    })
                    .collect();
                let lits = self
                    .witness_cover(witnesses, &external)
                    .map_err(|m| format!("set is not unfounded: {m}"))?;
                let reason = std::iter::once(l).chain(lits).collect();
                self.push(l, Some(reason), false);
            }
            RuleKind::BackjumpLP => {
                if self.consistent() {
                    return Err("Backjump LP needs an inconsistent trail".into());
                }
                if !self.has_decision() {
                    return Err("Backjump LP needs a decision".into());
                }
                let Some(Payload::Backjump { level, clause, derivation }) = &e.payload else {
                    return Err("expected a backjump payload".into());
                };
                let level = *level;
                if level >= self.level() {
                    return Err(format!("level {level} is not below the current level {}", self.level()));
                }
                let s = e.lit.as_deref().ok_or("missing literal")?;
                let l = self.lit(s)?;
                let c = self.clause(clause)?;
                if !c.contains(l) {
                    return Err("asserted literal is not in the clause".into());
                }
                let keep = self.entries.iter().take_while(|x| x.level <= level).count();
                let prefix: BTreeSet<usize> =
                    self.entries[..keep].iter().map(|x| key(x.lit)).collect();
                if prefix.contains(&key(l)) {
                    return Err("asserted literal is already in the prefix".into());
                }
                if let Some(x) = c.iter().find(|&x| x != l && !prefix.contains(&key(!x))) {
                    return Err(format!("{} is not falsified by the prefix", self.p.literal_name(x)));
                }
                match derivation {
                    Some(d) => {
                        let got = self.resolve(d)?;
                        if got != c {
                            return Err(format!("derivation yields {}, not {}", got.render(self.p), c.render(self.p)));
                        }
                    }
                    None => warnings.push(format!("step {}: backjump clause accepted without a derivation", e.idx)),
                }
                if let Some(answers) = answers {
                    if !answers.iter().all(|i| oracle::satisfies(i, &c)) {
                        return Err(format!("{} is not entailed by the program", c.render(self.p)));
                    }
                    let decisions: Clause = std::iter::once(l)
                        .chain(self.entries[..keep].iter().filter(|x| x.reason.is_none()).map(|x| !x.lit))
                        .collect();
                    if !answers.iter().all(|i| oracle::satisfies(i, &decisions)) {
                        return Err("asserted literal does not follow from the remaining decisions".into());
                    }
                }
                self.truncate(keep);
                self.push_at(l, level, c.clone());
                self.last_backjump = Some(c);
            }
            RuleKind::LearnLP => {
                let Some(Payload::Clause { clause }) = &e.payload else {
                    return Err("expected a clause payload".into());
                };
                if e.lit.is_some() {
                    return Err("Learn LP derives no literal".into());
                }
                let c = self.clause(clause)?;
                if self.store.contains(&c) {
                    return Err("clause is already in the store".into());
                }
                if backjump_before.as_ref() != Some(&c) {
                    warnings.push(format!("step {}: learned clause accepted without a derivation", e.idx));
                }
                if let Some(answers) = answers {
                    if !answers.iter().all(|i| oracle::satisfies(i, &c)) {
                        return Err(format!("{} is not entailed by the program", c.render(self.p)));
                    }
                }
                self.store.push(c);
            }
            RuleKind::Fail => {
                Self::no_payload(e)?;
                if e.lit.is_some() {
                    return Err("Fail derives no literal".into());
                }
                if self.consistent() || self.has_decision() {
                    return Err("Fail needs an inconsistent trail without decisions".into());
                }
                self.failed = true;
            }
            RuleKind::Restart => {
                Self::no_payload(e)?;
                if e.lit.is_some() {
                    return Err("Restart derives no literal".into());
                }
                if self.entries.is_empty() {
                    return Err("Restart needs a non-empty trail".into());
                }
                self.truncate(0);
            }
            RuleKind::ForgetLP => {
                let Some(Payload::Clause { clause }) = &e.payload else {
                    return Err("expected a clause payload".into());
                };
                if e.lit.is_some() {
                    return Err("Forget LP derives no literal".into());
                }
                let c = self.clause(clause)?;
                let Some(pos) = self.store.iter().position(|x| *x == c) else {
                    return Err("clause is not in the store".into());
                };
                if self.entries.iter().any(|x| x.from_store && x.reason.as_ref() == Some(&c)) {
                    return Err("clause is the reason of a trail entry".into());
                }
                self.store.remove(pos);
            }
        }
        if let Some(d) = &e.digest {
            let got = self.render();
            if *d != got {
                return Err(format!("digest `{d}` does not match `{got}`"));
            }
        }
        Ok(())
    }

    fn push_at(&mut self, lit: Literal, level: u32, reason: Clause) {
        if self.has(!lit) {
            self.clashes += 1;
        }
        self.slot[key(lit)] = true;
        self.entries.push(Entry { lit, level, reason: Some(reason), from_store: true });
    }

    /// Resolves the reason of the last entry with the reasons of the
    /// entries at `positions`, in order.
    fn resolve(&self, positions: &[usize]) -> Check<Clause> {
        let last = self.entries.last().ok_or("empty trail")?;
        let mut c: BTreeSet<Literal> = last.reason.as_ref().ok_or("the last entry is a decision")?.iter().collect();
        for &pos in positions {
            let x = self.entries.get(pos).ok_or(format!("no trail position {pos}"))?;
            let r = x.reason.as_ref().ok_or(format!("position {pos} is a decision"))?;
            if !c.remove(&!x.lit) {
                return Err(format!("position {pos} does not resolve"));
            }
            c.extend(r.iter().filter(|&y| y != x.lit));
        }
        Ok(c.into_iter().collect())
    }
}

fn answer_cache(p: &Program, mode: Mode) -> Result<Option<Vec<Vec<Atom>>>> {
    match mode {
        Mode::Syntactic => Ok(None),
        Mode::Semantic => Ok(Some(oracle::answer_sets(p)?)),
    }
}

/// Checks every event of `trace` for edge legality from `∅ || ∅` and the
/// terminal marker against the final state.
///
/// Fails only when semantic mode is requested for a program too large for
/// the oracle.
pub fn verify_trace(p: &Program, trace: &Trace, options: VerifyOptions) -> Result<Verdict> {
    let answers = answer_cache(p, options.mode)?;
    let mut replay = Replay::new(p);
    let mut warnings = Vec::new();
    for (i, e) in trace.events.iter().enumerate() {
        let step = i + 1;
        if e.idx != step {
            return Ok(Verdict::Invalid { step, reason: format!("index {} out of sequence", e.idx) });
        }
        if let Err(reason) = replay.step(e, answers.as_deref(), &mut warnings) {
            return Ok(Verdict::Invalid { step, reason });
        }
    }
    let step = trace.events.len() + 1;
    let invalid = |reason: &str| Ok(Verdict::Invalid { step, reason: reason.to_string() });
    match &trace.end {
        None if options.prefix_ok => {}
        None => return invalid("missing terminal marker"),
        Some(TraceEnd { end: EndKind::Fail, answer_set }) => {
            if answer_set.is_some() {
                return invalid("a failed run has no answer set");
            }
            if !replay.failed {
                return invalid("the final state is not FailState");
            }
        }
        Some(TraceEnd { end: EndKind::SemiTerminal, answer_set }) => {
            if !replay.consistent() || !replay.semi_terminal(&|_| true) {
                return invalid("the final state is not semi-terminal");
            }
            let mut claimed = Vec::new();
            for name in answer_set.as_deref().unwrap_or_default() {
                match p.atom(name) {
                    Some(a) => claimed.push(a),
                    None => return invalid(&format!("unknown atom {name}")),
                }
            }
            claimed.sort();
            if claimed != replay.true_atoms() {
                return invalid("the answer set does not match the final trail");
            }
        }
    }
    Ok(Verdict::Valid { warnings })
}

/// Checks that every event is taken from the highest tier of `strategy`
/// that has an applicable transition, that Learn LP follows every
/// Backjump LP whose successor is not semi-terminal, and that Learn LP
/// only ever learns the clause of the Backjump LP right before it. Intra-tier order is
/// not enforced. Assumes the trace is valid; an illegal edge is reported
/// as non-conformance.
pub fn check_strategy_conformance(p: &Program, trace: &Trace, strategy: &Strategy) -> Conformance {
    let mut replay = Replay::new(p);
    let mut warnings = Vec::new();
    let enabled = |k: RuleKind| strategy.is_enabled(k);
    let mut owes_learn: Option<usize> = None;
    for (i, e) in trace.events.iter().enumerate() {
        let step = i + 1;
        let non = |reason: String| Conformance::NonConformant { step, reason };
        if let Some(bj) = owes_learn.take() {
            if e.rule != RuleKind::LearnLP {
                return non(format!("Backjump LP at step {bj} is not followed by Learn LP"));
            }
        }
        if e.rule.is_basic() {
            let Some(tier) = strategy.tier_of(e.rule) else {
                return non(format!("{} is not part of the strategy", e.rule));
            };
            for higher in &strategy.tiers()[..tier] {
                if let Some(k) = higher.iter().find(|&&k| replay.applicable(k)) {
                    return non(format!("{k} outranks {} and is applicable", e.rule));
                }
            }
        }
        if e.rule == RuleKind::LearnLP && strategy.learn_after_backjump {
            let paired = match &e.payload {
                Some(Payload::Clause { clause }) => {
                    replay.last_backjump.is_some() && replay.clause(clause).ok() == replay.last_backjump
                }
                _ => false,
            };
            if !paired {
                return non("Learn LP does not learn the clause of the preceding Backjump LP".into());
            }
        }
        if let Err(reason) = replay.step(e, None, &mut warnings) {
            return non(format!("illegal edge: {reason}"));
        }
        if e.rule == RuleKind::BackjumpLP
            && strategy.learn_after_backjump
            && !replay.semi_terminal(&enabled)
            && replay.last_backjump.as_ref().is_some_and(|c| !replay.store.contains(c))
        {
            owes_learn = Some(step);
        }
    }
    if let Some(bj) = owes_learn {
        return Conformance::NonConformant {
            step: trace.events.len() + 1,
            reason: format!("Backjump LP at step {bj} is not followed by Learn LP"),
        };
    }
    Conformance::Conformant
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{solve, SolveConfig};

    const P1: &str = "a :- not b. b :- not a. c :- a. d :- d. d :- b, not b.";

    /// The sup-style run written by hand: the backjump clause is the unit
    /// `{-d}` at level 1 and is learned even though the successor is
    /// semi-terminal.
    const SUP_STYLE: &str = r#"{"idx":1,"rule":"Decide","lit":"a"}
{"idx":2,"rule":"UnitPropagateLP","lit":"c","payload":{"type":"rule","rule":2}}
{"idx":3,"rule":"AllRulesCancelled","lit":"-b","payload":{"type":"cancelled","witnesses":[{"rule":1,"lit":"-a"}]}}
{"idx":4,"rule":"Decide","lit":"d"}
{"idx":5,"rule":"Unfounded","lit":"-d","payload":{"type":"unfounded","set":["d"],"witnesses":[{"rule":4,"lit":"b"}]}}
{"idx":6,"rule":"BackjumpLP","lit":"-d","payload":{"type":"backjump","level":1,"clause":["-d"]}}
{"idx":7,"rule":"LearnLP","payload":{"type":"clause","clause":["-d"]}}
{"end":"semi_terminal","answer_set":["a","c"]}
"#;

    fn smodelscc_trace(p: &Program) -> Trace {
        let mut cfg = SolveConfig::new(Strategy::smodelscc());
        cfg.digests = true;
        solve(p, &cfg).trace
    }

    #[test]
    fn round_trip() {
        let p = Program::parse(P1).unwrap();
        let t = smodelscc_trace(&p);
        let text = t.to_jsonl();
        assert_eq!(text.lines().count(), 5);
        assert_eq!(Trace::from_jsonl(&text).unwrap(), t);
        assert_eq!(Trace::from_jsonl("").unwrap(), Trace::default());
        assert_eq!(Trace::default().to_jsonl(), "");
        let hand = Trace::from_jsonl(SUP_STYLE).unwrap();
        assert_eq!(Trace::from_jsonl(&hand.to_jsonl()).unwrap(), hand);
    }

    #[test]
    fn corrupt_lines_report_their_number() {
        let mut text = smodelscc_trace(&Program::parse(P1).unwrap()).to_jsonl();
        text = text.replacen("\"rule\":\"UnitPropagateLP\"", "\"rule\":\"Propagate\"", 1);
        assert!(matches!(Trace::from_jsonl(&text), Err(Error::TraceRecord { line: 2, .. })));
        assert!(matches!(Trace::from_jsonl("{}\n{\"idx\":"), Err(Error::TraceRecord { line: 1, .. })));
        let after_end = "{\"end\":\"fail\"}\n{\"idx\":1,\"rule\":\"Fail\"}\n";
        assert!(matches!(Trace::from_jsonl(after_end), Err(Error::TraceRecord { line: 2, .. })));
    }

    #[test]
    fn engine_trace_is_valid() {
        let p = Program::parse(P1).unwrap();
        let t = smodelscc_trace(&p);
        for mode in [Mode::Syntactic, Mode::Semantic] {
            let v = verify_trace(&p, &t, VerifyOptions { mode, prefix_ok: false }).unwrap();
            assert_eq!(v, Verdict::Valid { warnings: vec![] });
        }
    }

    #[test]
    fn mutated_literal_is_invalid_at_step_two() {
        let p = Program::parse(P1).unwrap();
        let mut t = smodelscc_trace(&p).without_digests();
        t.events[1].lit = Some("d".into());
        let v = verify_trace(&p, &t, VerifyOptions::default()).unwrap();
        assert!(matches!(v, Verdict::Invalid { step: 2, .. }), "{v:?}");
    }

    #[test]
    fn hand_written_sup_trace() {
        let p = Program::parse(P1).unwrap();
        let t = Trace::from_jsonl(SUP_STYLE).unwrap();
        let opts = VerifyOptions { mode: Mode::Semantic, prefix_ok: false };
        let Verdict::Valid { warnings } = verify_trace(&p, &t, opts).unwrap() else { panic!() };
        assert_eq!(warnings.len(), 1, "{warnings:?}");
        assert!(check_strategy_conformance(&p, &t, &Strategy::sup()).is_conformant());
        assert!(matches!(
            check_strategy_conformance(&p, &t, &Strategy::smodelscc()),
            Conformance::NonConformant { step: 4, .. }
        ));
    }

    #[test]
    fn smodelscc_path_is_not_sup() {
        let p = Program::parse(P1).unwrap();
        let t = smodelscc_trace(&p);
        assert!(check_strategy_conformance(&p, &t, &Strategy::smodelscc()).is_conformant());
        let Conformance::NonConformant { step, reason } = check_strategy_conformance(&p, &t, &Strategy::sup()) else {
            panic!()
        };
        assert_eq!(step, 4);
        assert!(reason.contains("Decide"), "{reason}");
    }

    #[test]
    fn terminal_marker_is_required() {
        let p = Program::parse(P1).unwrap();
        let mut t = smodelscc_trace(&p);
        t.end = None;
        assert!(!verify_trace(&p, &t, VerifyOptions::default()).unwrap().is_valid());
        let opts = VerifyOptions { prefix_ok: true, ..Default::default() };
        assert!(verify_trace(&p, &t, opts).unwrap().is_valid());
        t.events.pop();
        t.end = Some(TraceEnd::semi_terminal(&p, &[Atom(0), Atom(2)]));
        assert!(matches!(verify_trace(&p, &t, VerifyOptions::default()).unwrap(), Verdict::Invalid { step: 4, .. }));
    }

    #[test]
    fn learn_discipline_is_enforced() {
        let p = Program::parse("a :- not a.").unwrap();
        let t = solve(&p, &SolveConfig::default()).trace;
        assert!(verify_trace(&p, &t, VerifyOptions::default()).unwrap().is_valid());
        assert!(check_strategy_conformance(&p, &t, &Strategy::smodelscc()).is_conformant());
        let mut skipped = t.clone();
        skipped.events.retain(|e| e.rule != RuleKind::LearnLP);
        for (i, e) in skipped.events.iter_mut().enumerate() {
            e.idx = i + 1;
        }
        assert!(matches!(
            check_strategy_conformance(&p, &skipped, &Strategy::smodelscc()),
            Conformance::NonConformant { step: 4, .. }
        ));
    }

    #[test]
    fn semantic_mode_rejects_unentailed_learning() {
        let p = Program::parse(P1).unwrap();
        let mut t = Trace::from_jsonl(SUP_STYLE).unwrap();
        t.events.truncate(3);
        t.events.push(TraceEvent {
            idx: 4,
            rule: RuleKind::LearnLP,
            lit: None,
            payload: Some(Payload::Clause { clause: vec!["a".into()] }),
            digest: None,
        });
        t.end = None;
        let opts = VerifyOptions { mode: Mode::Syntactic, prefix_ok: true };
        assert!(verify_trace(&p, &t, opts).unwrap().is_valid());
        let opts = VerifyOptions { mode: Mode::Semantic, prefix_ok: true };
        assert!(matches!(verify_trace(&p, &t, opts).unwrap(), Verdict::Invalid { step: 4, .. }));
    }
}
