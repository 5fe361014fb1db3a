//! Equilibrium checking and search.
//!
//! The search does not enumerate belief states. It first bounds, for every
//! context, the beliefs it could possibly hold: any knowledge base the
//! management function can produce is contained in the old one plus what
//! the heads of still-viable bridge rules may add, and the logic's universe
//! of that bound covers every acceptable belief set. Rules with a positive
//! body atom outside these bounds can never fire and are discarded, which
//! may shrink the bounds again; this repeats until nothing changes.
//!
//! What is left to guess is the truth value of each context atom still
//! mentioned by a viable rule. Each guess fixes all `app_i`, hence all
//! `kb'_i`; the belief sets of each context are then the members of
//! `ACC_i(kb'_i)` that agree with the guess, and every combination of them
//! is an equilibrium.

use std::collections::{BTreeMap, BTreeSet};

use super::{BeliefState, EngineError, Rmcs};
use crate::bridge::{app_heads, ground_schemas, BridgeAtom, BridgeRule, GroundingEnv, Operation};
use crate::engine::Observation;
use crate::kb::{BeliefSet, KbElement, KnowledgeBase};
use crate::management::{apply_management, may_add};
use crate::term::Belief;

/// Bound on the number of guessed bridge atoms (`2^16` guesses).
pub const DEFAULT_SEARCH_LIMIT: usize = 16;

fn check_state(m: &Rmcs, state: &BeliefState) -> Result<(), EngineError> {
    if state.len() != m.contexts.len() {
        return Err(EngineError::StateArity {
            expected: m.contexts.len(),
            found: state.len(),
        });
    }
    Ok(())
}

/// Ground bridge rules of every context for the given (prepared)
/// observation.
pub fn ground_rules(m: &Rmcs, obs: &Observation, step: usize) -> Result<Vec<Vec<BridgeRule>>, EngineError> {
    let contexts = m.context_names();
    let sensors = m.sensor_names();
    let now = m.now(obs, step);
    m.contexts
        .iter()
        .zip(&m.bridge)
        .map(|(c, schemas)| {
            let env = GroundingEnv {
                contexts: &contexts,
                sensors: &sensors,
                obs,
                now,
                horizon: m.horizon,
                domains: &c.domains,
            };
            ground_schemas(schemas, &env).map_err(|source| EngineError::Grounding {
                context: c.name.clone(),
                source,
            })
        })
        .collect()
}

fn manage(
    m: &Rmcs,
    i: usize,
    heads: &BTreeSet<Operation>,
    kb: &KnowledgeBase,
    now: i64,
) -> Result<KnowledgeBase, EngineError> {
    apply_management(heads, kb, &m.contexts[i].mng, now).map_err(|source| EngineError::Management {
        context: m.contexts[i].name.clone(),
        source,
    })
}

fn accept(m: &Rmcs, i: usize, kb: &KnowledgeBase) -> Result<Vec<BeliefSet>, EngineError> {
    m.contexts[i].logic.acc(kb).map_err(|source| EngineError::Logic {
        context: m.contexts[i].name.clone(),
        source,
    })
}

/// `B` is an equilibrium iff `S_i ∈ ACC_i(mng_i(app_i(B,Obs), kb_i))` for
/// every context `i`.
pub fn check_equilibrium(
    m: &Rmcs,
    obs: &Observation,
    state: &BeliefState,
    step: usize,
) -> Result<bool, EngineError> {
    check_state(m, state)?;
    let obs = m.prepare(obs, step)?;
    let rules = ground_rules(m, &obs, step)?;
    let now = m.now(&obs, step);
    for (i, kb) in m.kbs.iter().enumerate() {
        let heads = app_heads(&rules[i], state, &obs)?;
        let kb2 = manage(m, i, &heads, kb, now)?;
        if !accept(m, i, &kb2)?.contains(&state.sets()[i]) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `KB^B`, the knowledge bases generated by an equilibrium.
pub fn generated_kbs(
    m: &Rmcs,
    obs: &Observation,
    state: &BeliefState,
    step: usize,
) -> Result<Vec<KnowledgeBase>, EngineError> {
    check_state(m, state)?;
    let obs = m.prepare(obs, step)?;
    let rules = ground_rules(m, &obs, step)?;
    let now = m.now(&obs, step);
    let mut out = Vec::new();
    for (i, kb) in m.kbs.iter().enumerate() {
        let heads = app_heads(&rules[i], state, &obs)?;
        let kb2 = manage(m, i, &heads, kb, now)?;
        if !accept(m, i, &kb2)?.contains(&state.sets()[i]) {
            return Err(EngineError::NotAnEquilibrium);
        }
        out.push(kb2);
    }
    Ok(out)
}

/// A ground rule with its sensor literals already evaluated.
struct Viable {
    head: Operation,
    body: Vec<(usize, Belief, bool)>,
}

/// All equilibria of `m` under `obs`, in canonical order.
pub fn equilibria(m: &Rmcs, obs: &Observation, step: usize) -> Result<Vec<BeliefState>, EngineError> {
    equilibria_limited(m, obs, step, DEFAULT_SEARCH_LIMIT)
}

pub(crate) fn equilibria_limited(
    m: &Rmcs,
    obs: &Observation,
    step: usize,
    limit: usize,
) -> Result<Vec<BeliefState>, EngineError> {
    let obs = m.prepare(obs, step)?;
    let now = m.now(&obs, step);
    let n = m.contexts.len();
    let mut viable: Vec<Vec<Viable>> = Vec::with_capacity(n);
    for rules in ground_rules(m, &obs, step)? {
        let mut keep = Vec::new();
        'rule: for r in rules {
            let mut body = Vec::new();
            for lit in &r.body {
                match &lit.atom {
                    BridgeAtom::Sensor { sensor, datum } => {
                        let reading = obs
                            .reading(*sensor)
                            .ok_or(crate::bridge::BridgeError::SensorOutOfRange(*sensor))?;
                        if reading.contains(datum) == lit.naf {
                            continue 'rule;
                        }
                    }
                    BridgeAtom::Context { context, belief } => {
                        if *context >= n {
                            return Err(crate::bridge::BridgeError::ContextOutOfRange(*context).into());
                        }
                        body.push((*context, belief.clone(), lit.naf));
                    }
                }
            }
            keep.push(Viable { head: r.head, body });
        }
        viable.push(keep);
    }

    // shrink possible beliefs and viable rules to a common fixpoint
    let mut possible: Vec<BTreeSet<Belief>>;
    loop {
        possible = (0..n)
            .map(|i| {
                let heads: BTreeSet<Operation> = viable[i].iter().map(|r| r.head.clone()).collect();
                let mut bound = m.kbs[i].clone();
                bound.extend(may_add(&heads, &m.kbs[i], &m.contexts[i].mng).into_iter().map(KbElement::fact));
                m.contexts[i].logic.universe(&bound)
            })
            .collect();
        let before: usize = viable.iter().map(Vec::len).sum();
        for rules in &mut viable {
            rules.retain(|r| r.body.iter().all(|(c, b, naf)| *naf || possible[*c].contains(b)));
        }
        if viable.iter().map(Vec::len).sum::<usize>() == before {
            break;
        }
    }
    for rules in &mut viable {
        for r in rules.iter_mut() {
            r.body.retain(|(c, b, _)| possible[*c].contains(b));
        }
    }

    let atoms: Vec<(usize, Belief)> = viable
        .iter()
        .flatten()
        .flat_map(|r| r.body.iter().map(|(c, b, _)| (*c, b.clone())))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if atoms.len() > limit {
        return Err(EngineError::SearchSpaceExceeded {
            atoms: atoms.len(),
            limit,
        });
    }
    let index: BTreeMap<&(usize, Belief), usize> = atoms.iter().enumerate().map(|(k, a)| (a, k)).collect();
    let viable: Vec<Vec<(Operation, Vec<(usize, bool)>)>> = viable
        .into_iter()
        .map(|rules| {
            rules
                .into_iter()
                .map(|r| {
                    let lits = r.body.into_iter().map(|(c, b, naf)| (index[&(c, b)], naf)).collect();
                    (r.head, lits)
                })
                .collect()
        })
        .collect();

    let mut cache: Vec<BTreeMap<BTreeSet<Operation>, Vec<BeliefSet>>> = vec![BTreeMap::new(); n];
    let mut found = BTreeSet::new();
    for mask in 0u64..(1u64 << atoms.len()) {
        let truth = |k: usize| mask & (1 << k) != 0;
        let mut choices: Vec<Vec<BeliefSet>> = Vec::with_capacity(n);
        for i in 0..n {
            let heads: BTreeSet<Operation> = viable[i]
                .iter()
                .filter(|(_, lits)| lits.iter().all(|(k, naf)| truth(*k) != *naf))
                .map(|(h, _)| h.clone())
                .collect();
            if !cache[i].contains_key(&heads) {
                let kb2 = manage(m, i, &heads, &m.kbs[i], now)?;
                let acc = accept(m, i, &kb2)?;
                cache[i].insert(heads.clone(), acc);
            }
            let agreeing: Vec<BeliefSet> = cache[i][&heads]
                .iter()
                .filter(|s| {
                    atoms
                        .iter()
                        .enumerate()
                        .filter(|(_, (c, _))| *c == i)
                        .all(|(k, (_, b))| s.contains(b) == truth(k))
                })
                .cloned()
                .collect();
            if agreeing.is_empty() {
                break;
            }
            choices.push(agreeing);
        }
        if choices.len() < n {
            continue;
        }
        let mut partial = vec![Vec::new()];
        for options in &choices {
            let mut next = Vec::with_capacity(partial.len() * options.len());
            for p in &partial {
                for s in options {
                    let mut q: Vec<BeliefSet> = p.clone();
                    q.push(s.clone());
                    next.push(q);
                }
            }
            partial = next;
        }
        found.extend(partial.into_iter().map(BeliefState::new));
    }
    log::debug!(
        "step {step}: {} guessed atoms, {} equilibria",
        atoms.len(),
        found.len()
    );
    Ok(found.into_iter().collect())
}
