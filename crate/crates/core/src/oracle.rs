//! Brute-force semantics: reducts, least models, answer sets, supported
//! models and clause entailment by exhaustive enumeration. Deliberately
//! naive; it is the ground truth the solver is tested against.

use crate::error::{Error, Result};
use crate::program::{Atom, Program, Rule};
use crate::state::Clause;

/// Enumeration guard.
pub const MAX_ATOMS: usize = 24;

/// The set of true atoms, sorted by id.
pub type Interpretation = Vec<Atom>;

type Mask = u32;

fn to_mask(i: &[Atom]) -> Mask {
    i.iter().fold(0, |m, a| m | (1 << a.0))
}

fn from_mask(m: Mask, n: usize) -> Interpretation {
    (0..n as u32).filter(|a| m & (1 << a) != 0).map(Atom).collect()
}

fn guard(p: &Program) -> Result<()> {
    if p.num_atoms() > MAX_ATOMS {
        return Err(Error::TooManyAtoms(p.num_atoms()));
    }
    Ok(())
}

/// Gelfond-Lifschitz reduct: drop the rules with a negative body atom in
/// `i`, strip the negative bodies of the rest.
pub fn reduct(p: &Program, i: &[Atom]) -> Program {
    let rules = p
        .rules()
        .iter()
        .filter(|r| r.neg_body().all(|a| !i.contains(&a)))
        .map(|r| Rule::new(r.head, r.pos_body().map(Atom::pos)))
        .collect();
    Program::new(p.names().to_vec(), rules)
}

/// Least fixpoint of the immediate consequence operator.
pub fn least_model(p: &Program) -> Result<Interpretation> {
    if !p.is_negation_free() {
        return Err(Error::NotNegationFree);
    }
    let mut model = vec![false; p.num_atoms()];
    loop {
        let mut changed = false;
        for r in p.rules() {
            if !model[r.head.index()] && r.pos_body().all(|a| model[a.index()]) {
                model[r.head.index()] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    Ok(p.atoms().filter(|a| model[a.index()]).collect())
}

struct MaskRule {
    head: Mask,
    pos: Mask,
    neg: Mask,
}

fn mask_rules(p: &Program) -> Vec<MaskRule> {
    p.rules()
        .iter()
        .map(|r| MaskRule {
            head: 1 << r.head.0,
            pos: r.pos_body().fold(0, |m, a| m | (1 << a.0)),
            neg: r.neg_body().fold(0, |m, a| m | (1 << a.0)),
        })
        .collect()
}

/// Least model of the reduct of `rules` with respect to `x`.
fn reduct_least_model(rules: &[MaskRule], x: Mask) -> Mask {
    let mut m: Mask = 0;
    loop {
        let next = rules
            .iter()
            .filter(|r| r.neg & x == 0 && r.pos & !m == 0)
            .fold(m, |acc, r| acc | r.head);
        if next == m {
            return m;
        }
        m = next;
    }
}

fn candidates(n: usize) -> impl Iterator<Item = Mask> {
    0..(1u64 << n) as Mask
}

fn sorted(sets: impl Iterator<Item = Interpretation>) -> Vec<Interpretation> {
    let mut v: Vec<Interpretation> = sets.collect();
    v.sort();
    v
}

pub fn is_answer_set(p: &Program, i: &[Atom]) -> Result<bool> {
    let lm = least_model(&reduct(p, i))?;
    Ok(lm == i)
}

/// All answer sets, sorted lexicographically.
pub fn answer_sets(p: &Program) -> Result<Vec<Interpretation>> {
    guard(p)?;
    let rules = mask_rules(p);
    let n = p.num_atoms();
    Ok(sorted(
        candidates(n)
            .filter(|&x| reduct_least_model(&rules, x) == x)
            .map(|x| from_mask(x, n)),
    ))
}

/// Classical models in which every true atom heads a rule whose body
/// holds, sorted lexicographically.
pub fn supported_models(p: &Program) -> Result<Vec<Interpretation>> {
    guard(p)?;
    let rules = mask_rules(p);
    let n = p.num_atoms();
    let holds = |r: &MaskRule, x: Mask| r.pos & !x == 0 && r.neg & x == 0;
    Ok(sorted(candidates(n).filter(|&x| {
            let model = rules.iter().all(|r| !holds(r, x) || r.head & x != 0);
            let supported = rules
                .iter()
                .filter(|r| holds(r, x))
                .fold(0, |acc, r| acc | r.head);
            model && supported == x
        })
        .map(|x| from_mask(x, n))))
}

pub fn satisfies(i: &[Atom], c: &Clause) -> bool {
    let m = to_mask(i);
    c.is_satisfied_by(|a| m & (1 << a.0) != 0)
}

/// Every answer set of `p` satisfies `c`.
pub fn entails_clause(p: &Program, c: &Clause) -> Result<bool> {
    Ok(answer_sets(p)?.iter().all(|i| satisfies(i, c)))
}
