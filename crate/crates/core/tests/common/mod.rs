//! Random ground programs shared by the integration tests.
#![allow(dead_code)]

use aspnav::{Atom, Program, Rule};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const P1: &str = "a :- not b. b :- not a. c :- a. d :- d. d :- b, not b.";
pub const P2: &str = "a :- not a.";

#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub max_atoms: usize,
    pub max_rules: usize,
    pub max_body: usize,
    /// Positive body atoms precede the head, so the program is tight.
    pub tight: bool,
}

impl Shape {
    pub const SMALL: Shape = Shape { max_atoms: 8, max_rules: 16, max_body: 3, tight: false };
    pub const TIGHT: Shape = Shape { tight: true, ..Shape::SMALL };
}

fn build(n: usize, rules: Vec<(u32, Vec<(u32, bool)>)>) -> Program {
    let names = (0..n).map(|i| format!("p{i}")).collect();
    let rules = rules
        .into_iter()
        .map(|(h, body)| Rule::new(Atom(h), body.into_iter().map(|(a, pos)| if pos { Atom(a).pos() } else { Atom(a).neg() })))
        .collect();
    Program::new(names, rules)
}

pub fn random_program(rng: &mut impl Rng, shape: Shape) -> Program {
    let n = rng.gen_range(1..=shape.max_atoms);
    let m = rng.gen_range(0..=shape.max_rules);
    let rules = (0..m)
        .map(|_| {
            let head = rng.gen_range(0..n as u32);
            let len = rng.gen_range(0..=shape.max_body);
            let body = (0..len)
                .filter_map(|_| {
                    let positive = rng.gen_bool(0.5);
                    if positive && shape.tight {
                        (head > 0).then(|| (rng.gen_range(0..head), true))
                    } else {
                        Some((rng.gen_range(0..n as u32), positive))
                    }
                })
                .collect();
            (head, body)
        })
        .collect();
    build(n, rules)
}

/// `count` programs from a fixed seed.
pub fn corpus(seed: u64, count: usize, shape: Shape) -> Vec<Program> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_program(&mut rng, shape)).collect()
}

pub fn arb_program(shape: Shape) -> impl Strategy<Value = Program> {
    (1..=shape.max_atoms).prop_flat_map(move |n| {
        let lit = (0..n as u32, any::<bool>());
        let rule = (0..n as u32, prop::collection::vec(lit, 0..=shape.max_body));
        prop::collection::vec(rule, 0..=shape.max_rules).prop_map(move |rules| {
            let rules = rules
                .into_iter()
                .map(|(h, body)| {
                    let body = body.into_iter().filter(|&(a, pos)| !(shape.tight && pos && a >= h)).collect();
                    (h, body)
                })
                .collect();
            build(n, rules)
        })
    })
}
