//! Reactive multi-context systems: assembly, equilibria, full equilibria
//! and runs over observation sequences.

mod run;
mod solve;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::bridge::{BridgeError, BridgeSchema, Domain, GroundingError};
use crate::kb::{BeliefSet, KnowledgeBase};
use crate::logic::{Logic, LogicError};
use crate::management::{ManagementConfig, ManagementError};
use crate::term::Term;

pub use run::{enumerate_runs, run, step, Policy, Run, DEFAULT_MAX_RUNS};
pub use solve::{check_equilibrium, equilibria, generated_kbs, ground_rules, DEFAULT_SEARCH_LIMIT};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("grounding bridge rules of `{context}`: {source}")]
    Grounding {
        context: String,
        source: GroundingError,
    },
    #[error("management of `{context}`: {source}")]
    Management {
        context: String,
        source: ManagementError,
    },
    #[error("logic of `{context}`: {source}")]
    Logic { context: String, source: LogicError },
    #[error(transparent)]
    Bridge(#[from] BridgeError),
    #[error("{atoms} undetermined bridge atoms exceed the search limit of {limit}")]
    SearchSpaceExceeded { atoms: usize, limit: usize },
    #[error("no equilibrium at step {step}")]
    NoEquilibrium { step: usize },
    #[error("{count} equilibria at step {step}")]
    Ambiguous { step: usize, count: usize },
    #[error("more than {bound} runs")]
    RunBoundExceeded { bound: usize },
    #[error("observation has {found} readings, the system has {expected} sensors")]
    ObservationArity { expected: usize, found: usize },
    #[error("belief state has {found} components, the system has {expected} contexts")]
    StateArity { expected: usize, found: usize },
    #[error("belief state is not an equilibrium")]
    NotAnEquilibrium,
}

/// Observation language of a sensor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SensorLanguage {
    Integers,
    /// Atoms `name/arity`, optionally classically negated.
    Signatures(Vec<Signature>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    pub negated: bool,
    pub name: String,
    pub arity: usize,
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("-")?;
        }
        write!(f, "{}/{}", self.name, self.arity)
    }
}

impl fmt::Display for SensorLanguage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SensorLanguage::Integers => f.write_str("integers"),
            SensorLanguage::Signatures(sigs) => {
                let s: Vec<String> = sigs.iter().map(ToString::to_string).collect();
                f.write_str(&s.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sensor {
    pub name: String,
    pub language: SensorLanguage,
    /// The time sensor: reads `now(t)` and is filled in with `now(step)`
    /// when an observation leaves it empty.
    pub auto_time: bool,
}

impl Sensor {
    pub fn new(name: impl Into<String>, language: SensorLanguage) -> Self {
        Sensor {
            name: name.into(),
            language,
            auto_time: false,
        }
    }

    pub fn time(name: impl Into<String>) -> Self {
        Sensor {
            name: name.into(),
            language: SensorLanguage::Signatures(vec![Signature {
                negated: false,
                name: "now".into(),
                arity: 1,
            }]),
            auto_time: true,
        }
    }

    pub fn accepts(&self, t: &Term) -> bool {
        match &self.language {
            SensorLanguage::Integers => matches!(t, Term::Int(_)),
            SensorLanguage::Signatures(sigs) => {
                let (negated, atom) = match t {
                    Term::Compound { functor, args } if functor == crate::term::NEG_FUNCTOR && args.len() == 1 => {
                        (true, &args[0])
                    }
                    other => (false, other),
                };
                atom.functor().is_some_and(|name| {
                    sigs.iter()
                        .any(|s| s.negated == negated && s.name == name && s.arity == atom.arity())
                })
            }
        }
    }
}

/// One reading per sensor.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Observation {
    readings: Vec<BTreeSet<Term>>,
}

impl Observation {
    pub fn new(readings: Vec<BTreeSet<Term>>) -> Self {
        Observation { readings }
    }

    pub fn empty(sensors: usize) -> Self {
        Observation::new(vec![BTreeSet::new(); sensors])
    }

    pub fn reading(&self, sensor: usize) -> Option<&BTreeSet<Term>> {
        self.readings.get(sensor)
    }

    pub fn reading_mut(&mut self, sensor: usize) -> Option<&mut BTreeSet<Term>> {
        self.readings.get_mut(sensor)
    }

    pub fn readings(&self) -> &[BTreeSet<Term>] {
        &self.readings
    }

    pub fn len(&self) -> usize {
        self.readings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.readings.is_empty()
    }
}

/// One belief set per context.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BeliefState(Vec<BeliefSet>);

impl BeliefState {
    pub fn new(sets: Vec<BeliefSet>) -> Self {
        BeliefState(sets)
    }

    pub fn get(&self, context: usize) -> Option<&BeliefSet> {
        self.0.get(context)
    }

    pub fn sets(&self) -> &[BeliefSet] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct FullEquilibrium {
    pub state: BeliefState,
    pub kbs: Vec<KnowledgeBase>,
}

#[derive(Debug, Clone)]
pub struct Context {
    pub name: String,
    pub logic: Arc<dyn Logic>,
    pub mng: ManagementConfig,
    /// Domains of the variables in this context's bridge schemas.
    pub domains: BTreeMap<String, Domain>,
}

impl Context {
    pub fn new(name: impl Into<String>, logic: Arc<dyn Logic>, mng: ManagementConfig) -> Self {
        Context {
            name: name.into(),
            logic,
            mng,
            domains: BTreeMap::new(),
        }
    }
}

/// An rMCS `⟨C, BR, KB⟩` over sensors, with the grounding horizon for its
/// bridge schemas.
#[derive(Debug, Clone)]
pub struct Rmcs {
    pub contexts: Vec<Context>,
    pub bridge: Vec<Vec<BridgeSchema>>,
    pub kbs: Vec<KnowledgeBase>,
    pub sensors: Vec<Sensor>,
    pub horizon: i64,
}

pub const DEFAULT_HORIZON: i64 = 1;

impl Rmcs {
    pub fn context_names(&self) -> Vec<String> {
        self.contexts.iter().map(|c| c.name.clone()).collect()
    }

    pub fn sensor_names(&self) -> Vec<String> {
        self.sensors.iter().map(|s| s.name.clone()).collect()
    }

    pub fn context_index(&self, name: &str) -> Option<usize> {
        self.contexts.iter().position(|c| c.name == name)
    }

    pub fn sensor_index(&self, name: &str) -> Option<usize> {
        self.sensors.iter().position(|s| s.name == name)
    }

    pub fn time_sensor(&self) -> Option<usize> {
        self.sensors.iter().position(|s| s.auto_time)
    }

    /// Fill in `now(step)` for an empty time-sensor reading.
    pub fn prepare(&self, obs: &Observation, step: usize) -> Result<Observation, EngineError> {
        if obs.len() != self.sensors.len() {
            return Err(EngineError::ObservationArity {
                expected: self.sensors.len(),
                found: obs.len(),
            });
        }
        let mut obs = obs.clone();
        if let Some(t) = self.time_sensor() {
            let r = obs.reading_mut(t).expect("arity checked");
            if r.is_empty() {
                r.insert(Term::compound("now", vec![Term::Int(step as i64)]));
            }
        }
        Ok(obs)
    }

    /// Current time: the time sensor's `now(t)`, else the step index.
    pub fn now(&self, obs: &Observation, step: usize) -> i64 {
        self.time_sensor()
            .and_then(|t| obs.reading(t))
            .and_then(|r| {
                r.iter().find_map(|t| match t {
                    Term::Compound { functor, args } if functor == "now" && args.len() == 1 => args[0].as_int(),
                    _ => None,
                })
            })
            .unwrap_or(step as i64)
    }

    /// The same system with different knowledge bases.
    pub fn with_kbs(&self, kbs: Vec<KnowledgeBase>) -> Rmcs {
        Rmcs {
            kbs,
            ..self.clone()
        }
    }
}
