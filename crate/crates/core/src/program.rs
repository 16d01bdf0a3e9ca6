//! Ground normal logic programs: atoms, literals, rules, the text front end
//! and the static analyses over the positive dependency graph.

use std::collections::HashMap;
use std::fmt;
use std::ops::Not;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::error::{Error, ParseError, Result};

/// Dense atom index, `0..n` within one [`Program`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom(pub u32);

impl Atom {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn pos(self) -> Literal {
        Literal::new(self, true)
    }

    #[inline]
    #[allow(clippy::should_implement_trait)]
    pub fn neg(self) -> Literal {
        Literal::new(self, false)
    }
}

/// A signed atom. Ordered by atom id, positive before negative, which is the
/// canonical order used for clauses.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal(u32);

impl Literal {
    #[inline]
    pub fn new(atom: Atom, positive: bool) -> Self {
        Literal((atom.0 << 1) | u32::from(!positive))
    }

    #[inline]
    pub fn atom(self) -> Atom {
        Atom(self.0 >> 1)
    }

    #[inline]
    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    #[inline]
    pub fn complement(self) -> Self {
        Literal(self.0 ^ 1)
    }
}

impl Not for Literal {
    type Output = Literal;

    fn not(self) -> Literal {
        self.complement()
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_positive() {
            write!(f, "{}", self.atom().0)
        } else {
            write!(f, "-{}", self.atom().0)
        }
    }
}

pub type RuleId = usize;

/// `head :- body.` Body literals keep their source order (duplicates
/// removed); the positive and negative bodies are views over it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub head: Atom,
    pub body: Vec<Literal>,
}

impl Rule {
    pub fn new(head: Atom, body: impl IntoIterator<Item = Literal>) -> Self {
        let mut lits: Vec<Literal> = Vec::new();
        for l in body {
            if !lits.contains(&l) {
                lits.push(l);
            }
        }
        Rule { head, body: lits }
    }

    pub fn pos_body(&self) -> impl Iterator<Item = Atom> + '_ {
        self.body.iter().filter(|l| l.is_positive()).map(|l| l.atom())
    }

    pub fn neg_body(&self) -> impl Iterator<Item = Atom> + '_ {
        self.body.iter().filter(|l| !l.is_positive()).map(|l| l.atom())
    }

    pub fn is_negation_free(&self) -> bool {
        self.body.iter().all(|l| l.is_positive())
    }
}

/// An immutable ground normal program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    names: Vec<String>,
    ids: HashMap<String, Atom>,
    rules: Vec<Rule>,
    head_index: Vec<Vec<RuleId>>,
}

impl Program {
    /// Builds a program over the given atom names. Every atom referenced by
    /// a rule must be below `names.len()`.
    pub fn new(names: Vec<String>, rules: Vec<Rule>) -> Self {
        let ids = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), Atom(i as u32)))
            .collect();
        let mut head_index = vec![Vec::new(); names.len()];
        for (i, r) in rules.iter().enumerate() {
            assert!(r.head.index() < names.len(), "rule head outside atom universe");
            assert!(r.body.iter().all(|l| l.atom().index() < names.len()));
            head_index[r.head.index()].push(i);
        }
        Program {
            names,
            ids,
            rules,
            head_index,
        }
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        Parser::new(text).program()
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, id: RuleId) -> &Rule {
        &self.rules[id]
    }

    pub fn num_atoms(&self) -> usize {
        self.names.len()
    }

    pub fn atoms(&self) -> impl ExactSizeIterator<Item = Atom> {
        (0..self.names.len() as u32).map(Atom)
    }

    pub fn name(&self, atom: Atom) -> &str {
        &self.names[atom.index()]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn atom(&self, name: &str) -> Option<Atom> {
        self.ids.get(name).copied()
    }

    /// Indices of the rules with head `atom`, in source order.
    pub fn head_index(&self, atom: Atom) -> &[RuleId] {
        &self.head_index[atom.index()]
    }

    pub fn rules_with_head(&self, atom: Atom) -> Result<Vec<&Rule>> {
        let ids = self
            .head_index
            .get(atom.index())
            .ok_or_else(|| Error::UnknownAtom(format!("#{}", atom.0)))?;
        Ok(ids.iter().map(|&i| &self.rules[i]).collect())
    }

    pub fn rules_with_head_named(&self, name: &str) -> Result<Vec<&Rule>> {
        let atom = self
            .atom(name)
            .ok_or_else(|| Error::UnknownAtom(name.to_string()))?;
        self.rules_with_head(atom)
    }

    pub fn is_negation_free(&self) -> bool {
        self.rules.iter().all(Rule::is_negation_free)
    }

    /// `a` or `-a`.
    pub fn literal_name(&self, lit: Literal) -> String {
        if lit.is_positive() {
            self.name(lit.atom()).to_string()
        } else {
            format!("-{}", self.name(lit.atom()))
        }
    }

    /// Inverse of [`Program::literal_name`].
    pub fn parse_literal(&self, text: &str) -> Result<Literal> {
        let (positive, name) = match text.strip_prefix('-') {
            Some(rest) => (false, rest),
            None => (true, text),
        };
        let atom = self
            .atom(name)
            .ok_or_else(|| Error::UnknownAtom(name.to_string()))?;
        Ok(Literal::new(atom, positive))
    }

    /// Strongly connected components of the positive dependency graph
    /// (edge head -> b for every positive body atom b). Components are
    /// sorted internally and ordered by their smallest atom id.
    pub fn positive_sccs(&self) -> Vec<Component> {
        let mut graph = DiGraph::<Atom, ()>::with_capacity(self.num_atoms(), self.rules.len());
        let nodes: Vec<_> = self.atoms().map(|a| graph.add_node(a)).collect();
        let mut self_loop = vec![false; self.num_atoms()];
        for r in &self.rules {
            for b in r.pos_body() {
                graph.update_edge(nodes[r.head.index()], nodes[b.index()], ());
                if b == r.head {
                    self_loop[b.index()] = true;
                }
            }
        }
        let mut comps: Vec<Component> = tarjan_scc(&graph)
            .into_iter()
            .map(|scc| {
                let mut atoms: Vec<Atom> = scc.into_iter().map(|n| graph[n]).collect();
                atoms.sort();
                let cyclic = atoms.len() > 1 || self_loop[atoms[0].index()];
                Component { atoms, cyclic }
            })
            .collect();
        comps.sort_by_key(|c| c.atoms[0]);
        comps
    }

    /// True iff the positive dependency graph is acyclic.
    pub fn is_tight(&self) -> bool {
        self.positive_sccs().iter().all(|c| !c.cyclic)
    }

    pub fn display_rule(&self, id: RuleId) -> RuleDisplay<'_> {
        RuleDisplay { program: self, rule: &self.rules[id] }
    }
}

/// One strongly connected component; `cyclic` when it contains an edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub atoms: Vec<Atom>,
    pub cyclic: bool,
}

pub struct RuleDisplay<'a> {
    program: &'a Program,
    rule: &'a Rule,
}

impl fmt::Display for RuleDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.program.name(self.rule.head))?;
        for (i, l) in self.rule.body.iter().enumerate() {
            f.write_str(if i == 0 { " :- " } else { ", " })?;
            if !l.is_positive() {
                f.write_str("not ")?;
            }
            f.write_str(self.program.name(l.atom()))?;
        }
        f.write_str(".")
    }
}

/// Prints one statement per line in the input grammar.
impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rules.len() {
            writeln!(f, "{}", self.display_rule(i))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Ident(String),
    Not,
    If,
    Comma,
    Dot,
}

struct Parser<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
    names: Vec<String>,
    ids: HashMap<String, Atom>,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser {
            chars: text.chars().peekable(),
            line: 1,
            column: 1,
            names: Vec::new(),
            ids: HashMap::new(),
        }
    }

    fn error(&self, line: usize, column: usize, message: impl Into<String>) -> ParseError {
        ParseError { line, column, message: message.into() }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    /// Next token with its starting position, or `None` at end of input.
    fn token(&mut self) -> Result<Option<(Token, usize, usize)>, ParseError> {
        loop {
            match self.chars.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('%') => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                _ => break,
            }
        }
        let (line, column) = (self.line, self.column);
        let Some(c) = self.bump() else {
            return Ok(None);
        };
        let tok = match c {
            ',' => Token::Comma,
            '.' => Token::Dot,
            ':' => {
                if self.chars.peek() == Some(&'-') {
                    self.bump();
                    Token::If
                } else {
                    return Err(self.error(line, column, "expected `:-`"));
                }
            }
            'a'..='z' => {
                let mut s = String::from(c);
                while let Some(&n) = self.chars.peek() {
                    if n.is_ascii_alphanumeric() || n == '_' {
                        s.push(n);
                        self.bump();
                    } else {
                        break;
                    }
                }
                if s == "not" {
                    Token::Not
                } else {
                    Token::Ident(s)
                }
            }
            other => return Err(self.error(line, column, format!("unexpected character `{other}`"))),
        };
        Ok(Some((tok, line, column)))
    }

    fn intern(&mut self, name: String) -> Atom {
        if let Some(&a) = self.ids.get(&name) {
            return a;
        }
        let a = Atom(self.names.len() as u32);
        self.ids.insert(name.clone(), a);
        self.names.push(name);
        a
    }

    fn expect_ident(&mut self, what: &str) -> Result<Atom, ParseError> {
        match self.token()? {
            Some((Token::Ident(s), _, _)) => Ok(self.intern(s)),
            Some((t, l, c)) => Err(self.error(l, c, format!("expected {what}, found {}", describe(&t)))),
            None => Err(self.error(self.line, self.column, format!("expected {what}, found end of input"))),
        }
    }

    fn program(mut self) -> Result<Program, ParseError> {
        let mut rules = Vec::new();
        loop {
            let head = match self.token()? {
                None => break,
                Some((Token::Ident(s), _, _)) => self.intern(s),
                Some((t, l, c)) => {
                    return Err(self.error(l, c, format!("expected rule head, found {}", describe(&t))))
                }
            };
            let mut body = Vec::new();
            match self.token()? {
                Some((Token::Dot, _, _)) => {}
                Some((Token::If, _, _)) => loop {
                    let lit = match self.token()? {
                        Some((Token::Not, _, _)) => self.expect_ident("atom after `not`")?.neg(),
                        Some((Token::Ident(s), _, _)) => self.intern(s).pos(),
                        Some((t, l, c)) => {
                            return Err(self.error(l, c, format!("expected body literal, found {}", describe(&t))))
                        }
                        None => return Err(self.error(self.line, self.column, "unterminated rule")),
                    };
                    body.push(lit);
                    match self.token()? {
                        Some((Token::Comma, _, _)) => continue,
                        Some((Token::Dot, _, _)) => break,
                        Some((t, l, c)) => {
                            return Err(self.error(l, c, format!("expected `,` or `.`, found {}", describe(&t))))
                        }
                        None => return Err(self.error(self.line, self.column, "unterminated rule")),
                    }
                },
                Some((t, l, c)) => {
                    return Err(self.error(l, c, format!("expected `:-` or `.`, found {}", describe(&t))))
                }
                None => return Err(self.error(self.line, self.column, "unterminated rule")),
            }
            rules.push(Rule::new(head, body));
        }
        Ok(Program::new(self.names, rules))
    }
}

fn describe(t: &Token) -> String {
    match t {
        Token::Ident(s) => format!("`{s}`"),
        Token::Not => "`not`".into(),
        Token::If => "`:-`".into(),
        Token::Comma => "`,`".into(),
        Token::Dot => "`.`".into(),
    }
}
