//! Existential and universal belief queries over all runs of a finite
//! observation sequence, and projection onto the beliefs relevant to a
//! query.

use std::collections::BTreeSet;
use std::fmt;

use crate::bridge::{app_heads, BridgeAtom, BridgeRule};
use crate::engine::{
    enumerate_runs, ground_rules, BeliefState, EngineError, Observation, Rmcs, DEFAULT_SEARCH_LIMIT,
};
use crate::kb::{BeliefSet, KbElement, KnowledgeBase};
use crate::management::{apply_management, may_add};
use crate::term::Belief;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exists,
    Forall,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exists => "exists",
            Mode::Forall => "forall",
        })
    }
}

/// Does `belief` appear in context `context` at some step of some (every)
/// run?
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub mode: Mode,
    pub context: usize,
    pub belief: Belief,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub holds: bool,
    pub runs: usize,
    /// For existential queries that hold: run index and step index of the
    /// first occurrence found.
    pub witness: Option<(usize, usize)>,
    /// Set when no run exists; a universal query then holds vacuously.
    pub no_runs: bool,
}

/// `RB_j(M, i:b)`: every belief some ground rule body asks context `j`
/// about, plus `b` itself when `i = j`.
pub fn relevant_beliefs(rules: &[Vec<BridgeRule>], i: usize, b: &Belief, j: usize) -> BTreeSet<Belief> {
    let mut out: BTreeSet<Belief> = rules
        .iter()
        .flatten()
        .flat_map(|r| &r.body)
        .filter_map(|l| match &l.atom {
            BridgeAtom::Context { context, belief } if *context == j => Some(belief.clone()),
            _ => None,
        })
        .collect();
    if i == j {
        out.insert(b.clone());
    }
    out
}

/// Component-wise intersection with the relevant beliefs for `i:b`.
pub fn project(state: &BeliefState, rules: &[Vec<BridgeRule>], i: usize, b: &Belief) -> BeliefState {
    BeliefState::new(
        state
            .sets()
            .iter()
            .enumerate()
            .map(|(j, s)| s.intersection(&relevant_beliefs(rules, i, b, j)))
            .collect(),
    )
}

fn holds_in(state: &BeliefState, q: &Query) -> bool {
    state.get(q.context).is_some_and(|s| s.contains(&q.belief))
}

/// Decide `q` by enumerating every run induced by `trace`.
pub fn decide(m: &Rmcs, trace: &[Observation], q: &Query, bound: usize) -> Result<Verdict, EngineError> {
    let runs = enumerate_runs(m, trace, bound)?;
    let occurrence = |r: &crate::engine::Run| r.steps.iter().position(|eq| holds_in(&eq.state, q));
    let verdict = match q.mode {
        Mode::Exists => {
            let witness = runs
                .iter()
                .enumerate()
                .find_map(|(k, r)| occurrence(r).map(|s| (k, s)));
            Verdict {
                holds: witness.is_some(),
                runs: runs.len(),
                witness,
                no_runs: runs.is_empty(),
            }
        }
        Mode::Forall => Verdict {
            holds: runs.iter().all(|r| occurrence(r).is_some()),
            runs: runs.len(),
            witness: None,
            no_runs: runs.is_empty(),
        },
    };
    Ok(verdict)
}

/// Decide `q` over runs built from projected equilibrium checks: every
/// belief state in the product of the contexts' possible belief sets is
/// tested against `S_i ∈ ACC_i(mng_i(app_i(B|RB, Obs), kb_i))`. Only usable
/// on very small systems; it exists to cross-check [`decide`].
pub fn decide_by_projection(
    m: &Rmcs,
    trace: &[Observation],
    q: &Query,
    bound: usize,
) -> Result<Verdict, EngineError> {
    let mut path = Vec::new();
    let mut runs = 0usize;
    let mut witness = None;
    let mut all_hold = true;
    projected_runs(m, &m.kbs, trace, 0, q, bound, &mut path, &mut |path| {
        let hit = path.iter().position(|s| holds_in(s, q));
        if let (Some(s), None) = (hit, witness) {
            witness = Some((runs, s));
        }
        all_hold &= hit.is_some();
        runs += 1;
    })?;
    Ok(match q.mode {
        Mode::Exists => Verdict {
            holds: witness.is_some(),
            runs,
            witness,
            no_runs: runs == 0,
        },
        Mode::Forall => Verdict {
            holds: all_hold,
            runs,
            witness: None,
            no_runs: runs == 0,
        },
    })
}

#[allow(clippy::too_many_arguments)]
fn projected_runs(
    m: &Rmcs,
    kbs: &[KnowledgeBase],
    trace: &[Observation],
    k: usize,
    q: &Query,
    bound: usize,
    path: &mut Vec<BeliefState>,
    visit: &mut dyn FnMut(&[BeliefState]),
) -> Result<usize, EngineError> {
    if k == trace.len() {
        visit(path);
        return Ok(1);
    }
    let system = m.with_kbs(kbs.to_vec());
    let obs = system.prepare(&trace[k], k)?;
    let rules = ground_rules(&system, &obs, k)?;
    let now = system.now(&obs, k);

    let mut universes = Vec::new();
    for (i, c) in system.contexts.iter().enumerate() {
        let heads = rules[i].iter().map(|r| r.head.clone()).collect();
        let mut bound_kb = kbs[i].clone();
        bound_kb.extend(may_add(&heads, &kbs[i], &c.mng).into_iter().map(KbElement::fact));
        universes.push(c.logic.universe(&bound_kb).into_iter().collect::<Vec<_>>());
    }
    let bits: usize = universes.iter().map(Vec::len).sum();
    if bits > DEFAULT_SEARCH_LIMIT {
        return Err(EngineError::SearchSpaceExceeded {
            atoms: bits,
            limit: DEFAULT_SEARCH_LIMIT,
        });
    }
    let mut total = 0usize;
    for mask in 0u64..(1u64 << bits) {
        let mut offset = 0;
        let sets: Vec<BeliefSet> = universes
            .iter()
            .map(|u| {
                let s = u
                    .iter()
                    .enumerate()
                    .filter(|(x, _)| mask & (1 << (offset + x)) != 0)
                    .map(|(_, b)| b.clone())
                    .collect();
                offset += u.len();
                s
            })
            .collect();
        let state = BeliefState::new(sets);
        let projected = project(&state, &rules, q.context, &q.belief);
        let mut next_kbs = Vec::new();
        let mut ok = true;
        for (i, c) in system.contexts.iter().enumerate() {
            let heads = app_heads(&rules[i], &projected, &obs)?;
            let kb2 = apply_management(&heads, &kbs[i], &c.mng, now).map_err(|source| EngineError::Management {
                context: c.name.clone(),
                source,
            })?;
            let acc = c.logic.acc(&kb2).map_err(|source| EngineError::Logic {
                context: c.name.clone(),
                source,
            })?;
            if !acc.contains(&state.sets()[i]) {
                ok = false;
                break;
            }
            next_kbs.push(kb2);
        }
        if !ok {
            continue;
        }
        path.push(state);
        total += projected_runs(m, &next_kbs, trace, k + 1, q, bound, path, visit)?;
        path.pop();
        if total > bound {
            return Err(EngineError::RunBoundExceeded { bound });
        }
    }
    Ok(total)
}
