//! Drives the transition system under a priority schedule.
//!
//! A [`Strategy`] lists tiers of basic rules, highest priority first. Each
//! step applies the first available transition of the highest tier that has
//! one. An inconsistent trail is always handled first: Backjump LP (paired
//! with Learn LP) when there is a decision to undo, Fail otherwise.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{analyze_conflict, backjump_and_learn};
use crate::error::{Error, Result};
use crate::program::{Atom, Literal, Program};
use crate::rules::{self, Brancher, RuleKind, StaticBrancher, Transition};
use crate::state::{Clause, ClauseId, ClauseOrigin, SolverState, Trail};
use crate::trace::{event_from_transition, Trace, TraceEnd, TraceEvent};

/// Intra-tier order; tiers are scanned in this order regardless of how
/// they were written.
const CANONICAL: [RuleKind; 8] = [
    RuleKind::BackjumpLP,
    RuleKind::Fail,
    RuleKind::UnitPropagateLP,
    RuleKind::AllRulesCancelled,
    RuleKind::BackchainTrue,
    RuleKind::BackchainFalse,
    RuleKind::Unfounded,
    RuleKind::Decide,
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Strategy {
    name: String,
    tiers: Vec<Vec<RuleKind>>,
    pub learn_after_backjump: bool,
}

impl Strategy {
    /// `{BackjumpLP, Fail} >> {UP, ARC, BT, BF} >> {Unfounded} >> {Decide}`
    pub fn smodelscc() -> Self {
        use RuleKind::*;
        Strategy {
            name: "smodelscc".into(),
            tiers: vec![
                vec![BackjumpLP, Fail],
                vec![UnitPropagateLP, AllRulesCancelled, BackchainTrue, BackchainFalse],
                vec![Unfounded],
                vec![Decide],
            ],
            learn_after_backjump: true,
        }
    }

    /// `{BackjumpLP, Fail} >> {UP, ARC, BT, BF} >> {Decide} >> {Unfounded}`
    pub fn sup() -> Self {
        use RuleKind::*;
        Strategy {
            name: "sup".into(),
            tiers: vec![
                vec![BackjumpLP, Fail],
                vec![UnitPropagateLP, AllRulesCancelled, BackchainTrue, BackchainFalse],
                vec![Decide],
                vec![Unfounded],
            ],
            learn_after_backjump: true,
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "smodelscc" => Ok(Self::smodelscc()),
            "sup" => Ok(Self::sup()),
            other => Err(Error::UnknownStrategy(other.to_string())),
        }
    }

    /// Builds a strategy from tiers; every basic rule must appear exactly
    /// once and the first tier must be exactly `{BackjumpLP, Fail}`.
    pub fn custom(tiers: Vec<Vec<RuleKind>>) -> Result<Self> {
        let mut seen = Vec::new();
        for k in tiers.iter().flatten() {
            if !k.is_basic() {
                return Err(Error::TierSpec(format!("{k} is not a basic rule")));
            }
            if seen.contains(k) {
                return Err(Error::TierSpec(format!("{k} appears more than once")));
            }
            seen.push(*k);
        }
        if let Some(missing) = RuleKind::BASIC.iter().find(|k| !seen.contains(k)) {
            return Err(Error::TierSpec(format!("{missing} is missing")));
        }
        let first: Vec<RuleKind> = tiers.first().cloned().unwrap_or_default();
        if first.len() != 2 || !first.contains(&RuleKind::BackjumpLP) || !first.contains(&RuleKind::Fail) {
            return Err(Error::TierSpec("the first tier must be BackjumpLP+Fail".into()));
        }
        if tiers.iter().any(Vec::is_empty) {
            return Err(Error::TierSpec("empty tier".into()));
        }
        let name = tiers
            .iter()
            .map(|t| t.iter().map(|k| k.name()).collect::<Vec<_>>().join("+"))
            .collect::<Vec<_>>()
            .join(",");
        Ok(Strategy { name: format!("custom:{name}"), tiers, learn_after_backjump: true })
    }

    /// Parses `smodelscc`, `sup` or `custom:<tiers>` where tiers are
    /// separated by `,` and rules within a tier by `+`, e.g.
    /// `custom:bj+fail,up+arc+bt+bf,d,unf`.
    pub fn parse(spec: &str) -> Result<Self> {
        let Some(body) = spec.strip_prefix("custom:") else {
            return Self::preset(spec);
        };
        let tiers = body
            .split(',')
            .map(|tier| tier.split('+').map(|k| k.trim().parse()).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::custom(tiers)
    }

    /// The same schedule with `kind` removed. Used for experiments such as
    /// running without Unfounded; such a strategy is not a valid custom spec.
    pub fn without(&self, kind: RuleKind) -> Self {
        let tiers: Vec<Vec<RuleKind>> = self
            .tiers
            .iter()
            .map(|t| t.iter().copied().filter(|&k| k != kind).collect::<Vec<_>>())
            .filter(|t| !t.is_empty())
            .collect();
        Strategy {
            name: format!("{}-{}", self.name, kind),
            tiers,
            learn_after_backjump: self.learn_after_backjump,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn tiers(&self) -> &[Vec<RuleKind>] {
        &self.tiers
    }

    pub fn tier_of(&self, kind: RuleKind) -> Option<usize> {
        self.tiers.iter().position(|t| t.contains(&kind))
    }

    pub fn is_enabled(&self, kind: RuleKind) -> bool {
        self.tier_of(kind).is_some()
    }

    pub fn is_semi_terminal(&self, p: &Program, s: &SolverState) -> bool {
        rules::is_semi_terminal(p, s, &|k| self.is_enabled(k))
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.tiers.iter().enumerate() {
            if i > 0 {
                f.write_str(" >> ")?;
            }
            let names: Vec<&str> = t.iter().map(|k| k.name()).collect();
            write!(f, "{{{}}}", names.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HeuristicPolicy {
    /// Lowest-id unassigned atom, positive.
    #[default]
    Static,
    /// Highest activity (ties by id), negative polarity. Atoms of learned
    /// clauses are bumped; activities decay by 0.95 per conflict.
    Activity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Heuristic {
    pub policy: HeuristicPolicy,
    pub seed: u64,
}

/// VSIDS-style brancher. The seed only perturbs initial activities below
/// the first bump, so it only breaks ties.
#[derive(Debug, Clone)]
pub struct ActivityBrancher {
    activity: Vec<f64>,
    increment: f64,
}

impl ActivityBrancher {
    const DECAY: f64 = 0.95;

    pub fn new(num_atoms: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let activity = (0..num_atoms).map(|_| rng.gen_range(0.0..1e-6)).collect();
        ActivityBrancher { activity, increment: 1.0 }
    }

    pub fn bump(&mut self, atom: Atom) {
        let a = &mut self.activity[atom.index()];
        *a += self.increment;
        if *a > 1e100 {
            for x in &mut self.activity {
                *x *= 1e-100;
            }
            self.increment *= 1e-100;
        }
    }

    pub fn decay(&mut self) {
        self.increment /= Self::DECAY;
    }
}

impl Brancher for ActivityBrancher {
    fn pick(&mut self, p: &Program, t: &Trail) -> Option<Literal> {
        p.atoms()
            .filter(|&a| !t.is_assigned(a))
            .fold(None, |best: Option<Atom>, a| match best {
                Some(b) if self.activity[b.index()] >= self.activity[a.index()] => Some(b),
                _ => Some(a),
            })
            .map(Atom::neg)
    }
}

#[derive(Debug, Clone)]
enum DecisionBrancher {
    Static(StaticBrancher),
    Activity(ActivityBrancher),
}

impl Brancher for DecisionBrancher {
    fn pick(&mut self, p: &Program, t: &Trail) -> Option<Literal> {
        match self {
            DecisionBrancher::Static(b) => b.pick(p, t),
            DecisionBrancher::Activity(b) => b.pick(p, t),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ForgetPolicy {
    Off,
    /// Cap the store at four clauses per program rule.
    #[default]
    Scaled,
    Cap(usize),
}

/// Restart and forget policies.
///
/// Restarts follow the Luby sequence in units of conflicts and only fire
/// when a clause was learned since the previous restart. Forgetting keeps
/// clauses of length two or less and blocking clauses, and evicts the
/// lowest-activity unpinned clauses once the store exceeds its cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RestartForgetPolicy {
    pub luby_unit: Option<u64>,
    pub forget: ForgetPolicy,
}

impl RestartForgetPolicy {
    pub const DEFAULT_LUBY_UNIT: u64 = 64;

    fn cap(&self, p: &Program) -> Option<usize> {
        match self.forget {
            ForgetPolicy::Off => None,
            ForgetPolicy::Scaled => Some(4 * p.rules().len()),
            ForgetPolicy::Cap(k) => Some(k),
        }
    }
}

/// The `i`-th element (1-based) of 1, 1, 2, 1, 1, 2, 4, 1, ...
pub fn luby(i: u64) -> u64 {
    assert!(i >= 1);
    let mut i = i;
    loop {
        // Smallest k with i <= 2^k - 1.
        let k = 64 - i.leading_zeros() as u64;
        if i == (1 << k) - 1 {
            return 1 << (k - 1);
        }
        i -= (1 << (k - 1)) - 1;
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolveConfig {
    pub strategy: Option<Strategy>,
    pub heuristic: Heuristic,
    pub policy: RestartForgetPolicy,
    /// Attach rendered states to trace events.
    pub digests: bool,
}

impl SolveConfig {
    pub fn new(strategy: Strategy) -> Self {
        SolveConfig { strategy: Some(strategy), ..Default::default() }
    }

    fn strategy(&self) -> Strategy {
        self.strategy.clone().unwrap_or_else(Strategy::smodelscc)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub steps: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub conflicts: u64,
    pub learned: u64,
    pub restarts: u64,
    pub forgets: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    AnswerSet(Vec<Atom>),
    Unsatisfiable,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LearnedClause {
    pub clause: Clause,
    pub origin: ClauseOrigin,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub verdict: Verdict,
    pub trace: Trace,
    pub stats: Stats,
    /// Clauses added by Learn LP during this run.
    pub learned: Vec<LearnedClause>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Applied,
    SemiTerminal,
    Failed,
}

pub struct Engine<'p> {
    program: &'p Program,
    strategy: Strategy,
    policy: RestartForgetPolicy,
    digests: bool,
    brancher: DecisionBrancher,
    state: SolverState,
    events: Vec<TraceEvent>,
    stats: Stats,
    learned: Vec<LearnedClause>,
    luby_index: u64,
    conflicts_since_restart: u64,
    learned_since_restart: u64,
    clause_increment: f64,
}

impl<'p> Engine<'p> {
    const CLAUSE_DECAY: f64 = 0.999;

    pub fn new(program: &'p Program, config: &SolveConfig) -> Self {
        let brancher = match config.heuristic.policy {
            HeuristicPolicy::Static => DecisionBrancher::Static(StaticBrancher),
            HeuristicPolicy::Activity => {
                DecisionBrancher::Activity(ActivityBrancher::new(program.num_atoms(), config.heuristic.seed))
            }
        };
        Engine {
            program,
            strategy: config.strategy(),
            policy: config.policy,
            digests: config.digests,
            brancher,
            state: SolverState::new(program),
            events: Vec::new(),
            stats: Stats::default(),
            learned: Vec::new(),
            luby_index: 1,
            conflicts_since_restart: 0,
            learned_since_restart: 0,
            clause_increment: 1.0,
        }
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn strategy(&self) -> &Strategy {
        &self.strategy
    }

    pub fn events(&self) -> &[TraceEvent] {
        &self.events
    }

    /// Adds an enumeration blocking clause; the trail must be empty.
    pub fn add_blocking_clause(&mut self, clause: Clause) -> Option<ClauseId> {
        assert!(self.state.trail.is_empty(), "blocking clauses are added between runs");
        self.state.store.insert(clause, ClauseOrigin::Blocking)
    }

    /// Resets to `∅ || Γ`, keeping the store.
    pub fn reset(&mut self) {
        self.state.trail.clear();
        self.state.failed = false;
        self.events.clear();
        self.stats = Stats::default();
    }

    fn apply_and_record(&mut self, t: Transition) {
        let p = self.program;
        let ev = event_from_transition(p, self.events.len() + 1, &t, &self.state);
        rules::apply(&mut self.state, &t).expect("engine transitions are applicable");
        self.push_event(ev, &t);
    }

    fn push_event(&mut self, mut ev: TraceEvent, t: &Transition) {
        match t {
            Transition::Decide(_) => self.stats.decisions += 1,
            Transition::Derive { .. } => self.stats.propagations += 1,
            Transition::Restart => self.stats.restarts += 1,
            Transition::Forget { .. } => self.stats.forgets += 1,
            Transition::Learn { .. } => self.stats.learned += 1,
            _ => {}
        }
        if self.digests {
            ev.digest = Some(self.state.render(self.program));
        }
        self.events.push(ev);
    }

    fn resolve_conflict(&mut self) {
        let p = self.program;
        let analysis = analyze_conflict(p, &self.state).expect("inconsistent trail with a decision");
        self.stats.conflicts += 1;
        self.conflicts_since_restart += 1;

        let mut origin = ClauseOrigin::Learned;
        for &id in &analysis.used_clauses {
            if let Some(c) = self.state.store.get_mut(id) {
                c.activity += self.clause_increment;
                if c.origin == ClauseOrigin::Blocking {
                    origin = ClauseOrigin::Blocking;
                }
            }
        }
        self.clause_increment /= Self::CLAUSE_DECAY;
        if let DecisionBrancher::Activity(b) = &mut self.brancher {
            for l in analysis.learned.iter() {
                b.bump(l.atom());
            }
            b.decay();
        }

        let strategy = &self.strategy;
        let pre = self.state.clone();
        let (applied, new_id) = backjump_and_learn(
            &mut self.state,
            &analysis,
            strategy.learn_after_backjump,
            origin,
            &|s| strategy.is_semi_terminal(p, s),
        )
        .expect("analysis yields a legal backjump");

        // Rebuild events against the states each edge starts from.
        let mut replay = pre;
        for t in &applied {
            let mut ev = event_from_transition(p, self.events.len() + 1, t, &replay);
            rules::apply(&mut replay, t).expect("replayed backjump");
            if self.digests {
                ev.digest = Some(replay.render(p));
            }
            if let Transition::Learn { clause } = t {
                self.stats.learned += 1;
                self.learned.push(LearnedClause { clause: clause.clone(), origin });
                self.learned_since_restart += 1;
            }
            self.events.push(ev);
        }
        if let Some(id) = new_id {
            if let Some(c) = self.state.store.get_mut(id) {
                c.activity = self.clause_increment;
            }
        }
        if applied.len() == 2 {
            self.maintain();
        }
    }

    /// Forget and restart after a completed Backjump/Learn pair.
    fn maintain(&mut self) {
        if let Some(cap) = self.policy.cap(self.program) {
            if self.state.store.len() > cap {
                let pinned = self.state.pinned();
                let mut victims: Vec<(f64, ClauseId)> = self
                    .state
                    .store
                    .iter()
                    .filter(|c| c.origin == ClauseOrigin::Learned && c.clause.len() > 2 && !pinned.contains(&c.id))
                    .map(|c| (c.activity, c.id))
                    .collect();
                victims.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                let excess = self.state.store.len() - cap;
                for (_, id) in victims.into_iter().take(excess) {
                    let t = rules::forget(&self.state, id).expect("unpinned clause");
                    self.apply_and_record(t);
                }
            }
        }
        if let Some(unit) = self.policy.luby_unit {
            if self.conflicts_since_restart >= unit * luby(self.luby_index)
                && self.learned_since_restart > 0
                && !self.state.trail.is_empty()
            {
                self.apply_and_record(Transition::Restart);
                self.luby_index += 1;
                self.conflicts_since_restart = 0;
                self.learned_since_restart = 0;
            }
        }
    }

    pub fn step(&mut self) -> StepOutcome {
        if self.state.failed {
            return StepOutcome::Failed;
        }
        self.stats.steps += 1;
        if !self.state.trail.is_consistent() {
            if self.state.trail.has_decision() {
                self.resolve_conflict();
            } else {
                self.apply_and_record(Transition::Fail);
            }
            return StepOutcome::Applied;
        }
        let p = self.program;
        for tier in self.strategy.tiers.clone() {
            for kind in CANONICAL.iter().copied().filter(|k| tier.contains(k)) {
                if let Some(t) = rules::first_of(p, &self.state, kind, &mut self.brancher) {
                    self.apply_and_record(t);
                    return StepOutcome::Applied;
                }
            }
        }
        self.stats.steps -= 1;
        StepOutcome::SemiTerminal
    }

    /// Runs from `∅ || Γ` to a semi-terminal state or FailState.
    pub fn solve(&mut self) -> SolveResult {
        self.reset();
        let first_learned = self.learned.len();
        let verdict = loop {
            match self.step() {
                StepOutcome::Applied => continue,
                StepOutcome::SemiTerminal => break Verdict::AnswerSet(self.state.trail.true_atoms()),
                StepOutcome::Failed => break Verdict::Unsatisfiable,
            }
        };
        let end = match &verdict {
            Verdict::AnswerSet(atoms) => TraceEnd::semi_terminal(self.program, atoms),
            Verdict::Unsatisfiable => TraceEnd::fail(),
        };
        SolveResult {
            verdict,
            trace: Trace { events: self.events.clone(), end: Some(end) },
            stats: self.stats,
            learned: self.learned[first_learned..].to_vec(),
        }
    }
}

pub fn solve(p: &Program, config: &SolveConfig) -> SolveResult {
    Engine::new(p, config).solve()
}

#[derive(Debug, Clone, Default)]
pub struct Enumeration {
    pub answer_sets: Vec<Vec<Atom>>,
    pub learned: Vec<LearnedClause>,
    pub stats: Stats,
}

/// The clause excluding exactly the interpretation `atoms`.
pub fn blocking_clause(p: &Program, atoms: &[Atom]) -> Clause {
    p.atoms()
        .map(|a| if atoms.contains(&a) { a.neg() } else { a.pos() })
        .collect()
}

/// All answer sets by repeated solving, blocking each one found. The store,
/// including learned clauses, carries over between runs.
pub fn enumerate(p: &Program, config: &SolveConfig) -> Enumeration {
    let mut engine = Engine::new(p, config);
    let mut out = Enumeration::default();
    loop {
        let r = engine.solve();
        out.learned.extend(r.learned);
        let s = r.stats;
        out.stats.steps += s.steps;
        out.stats.decisions += s.decisions;
        out.stats.propagations += s.propagations;
        out.stats.conflicts += s.conflicts;
        out.stats.learned += s.learned;
        out.stats.restarts += s.restarts;
        out.stats.forgets += s.forgets;
        let Verdict::AnswerSet(atoms) = r.verdict else { break };
        let block = blocking_clause(p, &atoms);
        out.answer_sets.push(atoms);
        if block.is_empty() {
            break;
        }
        engine.reset();
        engine.add_blocking_clause(block);
    }
    out
}
