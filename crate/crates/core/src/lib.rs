//! Answer set solving as navigation of a transition system.
//!
//! States are pairs `M || Γ` of a trail and a store of learned clauses.
//! Transition rules (propagation, Decide, Unfounded, Backjump LP, Learn LP,
//! Fail, Restart, Forget LP) are edges; a [`engine::Strategy`] ranks them in
//! tiers, and the two presets reproduce the `smodelscc` and `sup` solvers.
//! Every run yields a trace that [`trace::verify_trace`] re-checks without
//! the engine, and [`oracle`] provides brute-force ground truth.
//!
//! ```
//! use aspnav::{engine, Program};
//!
//! let p = Program::parse("a :- not b. b :- not a. c :- a.").unwrap();
//! let r = engine::solve(&p, &engine::SolveConfig::default());
//! assert_eq!(r.verdict, engine::Verdict::AnswerSet(vec![p.atom("a").unwrap(), p.atom("c").unwrap()]));
//! ```

pub mod analysis;
pub mod engine;
pub mod error;
pub mod oracle;
pub mod program;
pub mod rules;
pub mod state;
pub mod trace;

pub use engine::{enumerate, solve, SolveConfig, SolveResult, Strategy, Verdict};
pub use error::{Error, ParseError, Result};
pub use program::{Atom, Literal, Program, Rule};
pub use rules::{RuleKind, Transition};
pub use state::{Clause, SolverState};
pub use trace::{Trace, TraceEvent};
