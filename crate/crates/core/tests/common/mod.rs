//! Random small systems and brute-force oracles that share no code with the
//! solver: beliefs are plain strings, bridge rules and management are
//! re-implemented directly, and acceptability is tested on every subset.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use rmcs::config::parse_system;
use rmcs::engine::{BeliefState, Observation, Rmcs};
use rmcs::term::Term;

pub const ATOMS: [&str; 6] = ["a", "b", "c", "d", "e", "-a"];
pub const READINGS: [&str; 2] = ["x", "y"];

#[derive(Debug, Clone)]
pub struct Program {
    pub facts: BTreeSet<String>,
    /// `(head, positive body, negative body)`
    pub rules: Vec<(String, Vec<String>, Vec<String>)>,
}

impl Program {
    pub fn text(&self) -> String {
        let mut parts: Vec<String> = self.facts.iter().cloned().collect();
        for (h, pos, neg) in &self.rules {
            let body: Vec<String> = pos.iter().cloned().chain(neg.iter().map(|b| format!("not {b}"))).collect();
            if body.is_empty() {
                parts.push(h.clone());
            } else {
                parts.push(format!("{h} <- {}", body.join(", ")));
            }
        }
        parts.join("; ")
    }
}

#[derive(Debug, Clone)]
pub enum Lit {
    Context { context: usize, atom: String, naf: bool },
    Sensor { reading: String, naf: bool },
}

#[derive(Debug, Clone)]
pub struct Rule {
    pub context: usize,
    pub delete: bool,
    pub atom: String,
    pub body: Vec<Lit>,
}

#[derive(Debug, Clone)]
pub struct RandomSystem {
    pub asp: Vec<bool>,
    pub kbs: Vec<Program>,
    pub rules: Vec<Rule>,
}

fn pick<R: Rng>(rng: &mut R, items: &[&str]) -> String {
    items.choose(rng).expect("non-empty").to_string()
}

pub fn random_program<R: Rng>(rng: &mut R, max_facts: usize, max_rules: usize) -> Program {
    let mut facts: BTreeSet<String> = (0..rng.gen_range(0..=max_facts)).map(|_| pick(rng, &ATOMS)).collect();
    let mut rules = Vec::new();
    for _ in 0..rng.gen_range(0..=max_rules) {
        let pos: Vec<String> = (0..rng.gen_range(0..=2)).map(|_| pick(rng, &ATOMS)).collect();
        let neg: Vec<String> = (0..rng.gen_range(0..=2)).map(|_| pick(rng, &ATOMS)).collect();
        let head = pick(rng, &ATOMS);
        // a rule with an empty body is a fact
        if pos.is_empty() && neg.is_empty() {
            facts.insert(head);
        } else {
            rules.push((head, pos, neg));
        }
    }
    Program { facts, rules }
}

/// At most two contexts and four ground bridge rules over [`ATOMS`].
pub fn random_system<R: Rng>(rng: &mut R) -> RandomSystem {
    let n = rng.gen_range(1..=2);
    let asp: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
    let kbs = asp
        .iter()
        .map(|&asp| if asp { random_program(rng, 2, 3) } else { random_program(rng, 3, 0) })
        .collect();
    let rules = (0..rng.gen_range(0..=4))
        .map(|_| Rule {
            context: rng.gen_range(0..n),
            delete: rng.gen_bool(0.25),
            atom: pick(rng, &ATOMS),
            body: (0..rng.gen_range(0..=2))
                .map(|_| {
                    if rng.gen_bool(0.8) {
                        Lit::Context {
                            context: rng.gen_range(0..n),
                            atom: pick(rng, &ATOMS),
                            naf: rng.gen_bool(0.4),
                        }
                    } else {
                        Lit::Sensor {
                            reading: pick(rng, &READINGS),
                            naf: rng.gen_bool(0.4),
                        }
                    }
                })
                .collect(),
        })
        .collect();
    RandomSystem { asp, kbs, rules }
}

pub fn random_reading<R: Rng>(rng: &mut R) -> BTreeSet<String> {
    READINGS.iter().filter(|_| rng.gen_bool(0.5)).map(|s| s.to_string()).collect()
}

impl RandomSystem {
    pub fn text(&self) -> String {
        let mut out = String::from("sensor s { lang: x/0, y/0 }\n");
        for (i, kb) in self.kbs.iter().enumerate() {
            out.push_str(&format!("context c{i} {{\n  logic: {}\n", if self.asp[i] { "asp" } else { "identity" }));
            let kb = kb.text();
            if !kb.is_empty() {
                out.push_str(&format!("  kb: {kb}\n"));
            }
            out.push_str("  ops: add; del\n  bridge:\n");
            for r in self.rules.iter().filter(|r| r.context == i) {
                let body: Vec<String> = r
                    .body
                    .iter()
                    .map(|l| match l {
                        Lit::Context { context, atom, naf } => {
                            format!("{}c{context}:{atom}", if *naf { "not " } else { "" })
                        }
                        Lit::Sensor { reading, naf } => format!("{}s@{reading}", if *naf { "not " } else { "" }),
                    })
                    .collect();
                let op = if r.delete { "del" } else { "add" };
                out.push_str(&format!("    {op}({}) <- {};\n", r.atom, body.join(", ")));
            }
            out.push_str("}\n");
        }
        out
    }

    pub fn build(&self) -> Rmcs {
        let text = self.text();
        parse_system(&text).unwrap_or_else(|e| panic!("{e}\n{text}")).build()
    }

    pub fn ground_rule_count(&self) -> usize {
        self.rules.len()
    }
}

pub fn observation(reading: &BTreeSet<String>) -> Observation {
    Observation::new(vec![reading.iter().map(|r| Term::sym(r.as_str())).collect()])
}

pub type State = Vec<BTreeSet<String>>;

pub fn state_strings(b: &BeliefState) -> State {
    b.sets().iter().map(|s| s.iter().map(|x| x.to_string()).collect()).collect()
}

fn complement(a: &str) -> String {
    a.strip_prefix('-').map(str::to_string).unwrap_or_else(|| format!("-{a}"))
}

fn least_model(facts: &BTreeSet<String>, rules: &[(String, Vec<String>)]) -> BTreeSet<String> {
    let mut m = facts.clone();
    loop {
        let before = m.len();
        for (h, pos) in rules {
            if pos.iter().all(|p| m.contains(p)) {
                m.insert(h.clone());
            }
        }
        if m.len() == before {
            return m;
        }
    }
}

/// Gelfond-Lifschitz check of `s` against `p`, plus classical consistency.
pub fn is_answer_set(p: &Program, s: &BTreeSet<String>) -> bool {
    let reduct: Vec<(String, Vec<String>)> = p
        .rules
        .iter()
        .filter(|(_, _, neg)| neg.iter().all(|n| !s.contains(n)))
        .map(|(h, pos, _)| (h.clone(), pos.clone()))
        .collect();
    least_model(&p.facts, &reduct) == *s && s.iter().all(|a| !s.contains(&complement(a)))
}

/// Every subset of [`ATOMS`] that is an answer set of `p`.
pub fn answer_sets_by_subsets(p: &Program) -> BTreeSet<BTreeSet<String>> {
    subsets().filter(|s| is_answer_set(p, s)).collect()
}

pub fn subsets() -> impl Iterator<Item = BTreeSet<String>> {
    (0u32..1 << ATOMS.len()).map(|mask| {
        ATOMS
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, a)| a.to_string())
            .collect()
    })
}

fn body_holds(body: &[Lit], state: &State, reading: &BTreeSet<String>) -> bool {
    body.iter().all(|l| match l {
        Lit::Context { context, atom, naf } => state[*context].contains(atom) != *naf,
        Lit::Sensor { reading: r, naf } => reading.contains(r) != *naf,
    })
}

/// Knowledge base of context `i` after management under `state`: deletions
/// first, then additions.
pub fn managed(sys: &RandomSystem, i: usize, kb: &Program, state: &State, reading: &BTreeSet<String>) -> Program {
    let fired: Vec<&Rule> = sys
        .rules
        .iter()
        .filter(|r| r.context == i && body_holds(&r.body, state, reading))
        .collect();
    let mut facts = kb.facts.clone();
    for r in fired.iter().filter(|r| r.delete) {
        facts.remove(&r.atom);
    }
    for r in fired.iter().filter(|r| !r.delete) {
        facts.insert(r.atom.clone());
    }
    Program {
        facts,
        rules: kb.rules.clone(),
    }
}

pub fn accepts(sys: &RandomSystem, i: usize, kb: &Program, s: &BTreeSet<String>) -> bool {
    if sys.asp[i] {
        is_answer_set(kb, s)
    } else {
        kb.facts == *s
    }
}

/// Equilibria by testing every state in the product of powersets.
pub fn equilibria_oracle(sys: &RandomSystem, kbs: &[Program], reading: &BTreeSet<String>) -> BTreeSet<State> {
    let n = sys.asp.len();
    let all: Vec<BTreeSet<String>> = subsets().collect();
    let mut out = BTreeSet::new();
    let mut idx = vec![0usize; n];
    loop {
        let state: State = idx.iter().map(|&k| all[k].clone()).collect();
        if (0..n).all(|i| accepts(sys, i, &managed(sys, i, &kbs[i], &state, reading), &state[i])) {
            out.insert(state);
        }
        let mut pos = 0;
        loop {
            if pos == n {
                return out;
            }
            idx[pos] += 1;
            if idx[pos] < all.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Every run of `sys` over `trace`, as sequences of states.
pub fn runs_oracle(sys: &RandomSystem, trace: &[BTreeSet<String>]) -> Vec<Vec<State>> {
    fn go(
        sys: &RandomSystem,
        kbs: &[Program],
        trace: &[BTreeSet<String>],
        prefix: &mut Vec<State>,
        out: &mut Vec<Vec<State>>,
    ) {
        let Some((reading, rest)) = trace.split_first() else {
            out.push(prefix.clone());
            return;
        };
        for state in equilibria_oracle(sys, kbs, reading) {
            let next: Vec<Program> = (0..kbs.len()).map(|i| managed(sys, i, &kbs[i], &state, reading)).collect();
            prefix.push(state);
            go(sys, &next, rest, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(sys, &sys.kbs, trace, &mut Vec::new(), &mut out);
    out
}
