use super::solve::equilibria_limited;
use super::{generated_kbs, EngineError, FullEquilibrium, Observation, Rmcs, DEFAULT_SEARCH_LIMIT};
use crate::kb::KnowledgeBase;

pub const DEFAULT_MAX_RUNS: usize = 4096;

/// What to do when a step has several equilibria.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Policy {
    /// Take the canonically least one.
    #[default]
    First,
    /// Fail with [`EngineError::Ambiguous`].
    Strict,
}

/// A sequence of full equilibria, one per observation.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Run {
    pub steps: Vec<FullEquilibrium>,
}

fn full_equilibria(
    m: &Rmcs,
    obs: &Observation,
    step_index: usize,
) -> Result<Vec<FullEquilibrium>, EngineError> {
    let obs = m.prepare(obs, step_index)?;
    equilibria_limited(m, &obs, step_index, DEFAULT_SEARCH_LIMIT)?
        .into_iter()
        .map(|state| {
            let kbs = generated_kbs(m, &obs, &state, step_index)?;
            Ok(FullEquilibrium { state, kbs })
        })
        .collect()
}

/// One full equilibrium of `m` under `obs`, chosen by `policy`.
pub fn step(
    m: &Rmcs,
    obs: &Observation,
    step_index: usize,
    policy: Policy,
) -> Result<FullEquilibrium, EngineError> {
    let mut all = full_equilibria(m, obs, step_index)?;
    match (all.len(), policy) {
        (0, _) => Err(EngineError::NoEquilibrium { step: step_index }),
        (1, _) | (_, Policy::First) => Ok(all.swap_remove(0)),
        (count, Policy::Strict) => Err(EngineError::Ambiguous {
            step: step_index,
            count,
        }),
    }
}

/// The run induced by `trace`, threading generated knowledge bases forward.
pub fn run(m: &Rmcs, trace: &[Observation], policy: Policy) -> Result<Run, EngineError> {
    let mut current = m.clone();
    let mut steps = Vec::with_capacity(trace.len());
    for (k, obs) in trace.iter().enumerate() {
        let eq = step(&current, obs, k, policy)?;
        log::info!("step {k} done");
        current.kbs = eq.kbs.clone();
        steps.push(eq);
    }
    Ok(Run { steps })
}

/// Every run induced by `trace`, by depth-first branching over the
/// equilibria of each step. Fails once more than `bound` runs exist.
pub fn enumerate_runs(m: &Rmcs, trace: &[Observation], bound: usize) -> Result<Vec<Run>, EngineError> {
    let mut out = Vec::new();
    let mut prefix = Vec::new();
    explore(m, &m.kbs, trace, 0, bound, &mut prefix, &mut out)?;
    Ok(out)
}

fn explore(
    m: &Rmcs,
    kbs: &[KnowledgeBase],
    trace: &[Observation],
    k: usize,
    bound: usize,
    prefix: &mut Vec<FullEquilibrium>,
    out: &mut Vec<Run>,
) -> Result<(), EngineError> {
    if k == trace.len() {
        if out.len() == bound {
            return Err(EngineError::RunBoundExceeded { bound });
        }
        out.push(Run {
            steps: prefix.clone(),
        });
        return Ok(());
    }
    let system = m.with_kbs(kbs.to_vec());
    for eq in full_equilibria(&system, &trace[k], k)? {
        let next = eq.kbs.clone();
        prefix.push(eq);
        explore(m, &next, trace, k + 1, bound, prefix, out)?;
        prefix.pop();
    }
    Ok(())
}
