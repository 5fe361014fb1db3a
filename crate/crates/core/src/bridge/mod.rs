//! Bridge rules: ground rules, their satisfaction against a belief state and
//! an observation, and schemas with variables that ground into them.

mod ground;
mod schema;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::engine::{BeliefState, Observation};
use crate::term::{Belief, Term};

pub use ground::{
    ground_schema, ground_schemas, unresolved_variables, Domain, GroundingEnv, GroundingError,
};
pub(crate) use schema::schema as schema_item;
pub use schema::{
    parse_schema, ArithOp, BridgeSchema, CmpOp, ContextRef, Guard, Pattern, SchemaAtom,
    SchemaLiteral,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BridgeError {
    #[error("context index {0} out of range")]
    ContextOutOfRange(usize),
    #[error("sensor index {0} out of range")]
    SensorOutOfRange(usize),
}

/// `c:b` or `s@o`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BridgeAtom {
    Context { context: usize, belief: Belief },
    Sensor { sensor: usize, datum: Term },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BridgeLiteral {
    pub atom: BridgeAtom,
    pub naf: bool,
}

impl BridgeLiteral {
    pub fn context(context: usize, belief: Belief) -> Self {
        BridgeLiteral {
            atom: BridgeAtom::Context { context, belief },
            naf: false,
        }
    }

    pub fn sensor(sensor: usize, datum: Term) -> Self {
        BridgeLiteral {
            atom: BridgeAtom::Sensor { sensor, datum },
            naf: false,
        }
    }

    pub fn negated(mut self) -> Self {
        self.naf = !self.naf;
        self
    }
}

/// A ground management operation such as `add(p(1),1,s1)` or `incr`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Operation {
    pub name: String,
    pub args: Vec<Term>,
}

impl Operation {
    pub fn new(name: impl Into<String>, args: Vec<Term>) -> Self {
        Operation {
            name: name.into(),
            args,
        }
    }

    pub fn from_term(t: &Term) -> Option<Operation> {
        match t {
            Term::Int(_) => None,
            Term::Sym(s) => Some(Operation::new(s.clone(), Vec::new())),
            Term::Compound { functor, args } => Some(Operation::new(functor.clone(), args.clone())),
        }
    }

    pub fn to_term(&self) -> Term {
        Term::compound(self.name.clone(), self.args.clone())
    }
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_term())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BridgeRule {
    pub head: Operation,
    pub body: Vec<BridgeLiteral>,
}

impl BridgeRule {
    pub fn new(head: Operation, body: Vec<BridgeLiteral>) -> Self {
        BridgeRule { head, body }
    }

    /// Render with context and sensor names instead of indices.
    pub fn display<'a>(&'a self, contexts: &'a [String], sensors: &'a [String]) -> RuleDisplay<'a> {
        RuleDisplay {
            rule: self,
            contexts,
            sensors,
        }
    }
}

pub struct RuleDisplay<'a> {
    rule: &'a BridgeRule,
    contexts: &'a [String],
    sensors: &'a [String],
}

impl fmt::Display for RuleDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <-", self.rule.head)?;
        for (i, lit) in self.rule.body.iter().enumerate() {
            f.write_str(if i == 0 { " " } else { ", " })?;
            if lit.naf {
                f.write_str("not ")?;
            }
            match &lit.atom {
                BridgeAtom::Context { context, belief } => {
                    let name = self.contexts.get(*context).map(String::as_str).unwrap_or("?");
                    write!(f, "{name}:{belief}")?;
                }
                BridgeAtom::Sensor { sensor, datum } => {
                    let name = self.sensors.get(*sensor).map(String::as_str).unwrap_or("?");
                    write!(f, "{name}@{datum}")?;
                }
            }
        }
        Ok(())
    }
}

pub fn literal_satisfied(
    lit: &BridgeLiteral,
    state: &BeliefState,
    obs: &Observation,
) -> Result<bool, BridgeError> {
    let holds = match &lit.atom {
        BridgeAtom::Context { context, belief } => state
            .get(*context)
            .ok_or(BridgeError::ContextOutOfRange(*context))?
            .contains(belief),
        BridgeAtom::Sensor { sensor, datum } => obs
            .reading(*sensor)
            .ok_or(BridgeError::SensorOutOfRange(*sensor))?
            .contains(datum),
    };
    Ok(holds != lit.naf)
}

pub fn applicable(
    rule: &BridgeRule,
    state: &BeliefState,
    obs: &Observation,
) -> Result<bool, BridgeError> {
    for lit in &rule.body {
        if !literal_satisfied(lit, state, obs)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `app_i(B, Obs)`: heads of the applicable rules among `rules`.
pub fn app_heads<'a, I>(
    rules: I,
    state: &BeliefState,
    obs: &Observation,
) -> Result<BTreeSet<Operation>, BridgeError>
where
    I: IntoIterator<Item = &'a BridgeRule>,
{
    let mut heads = BTreeSet::new();
    for r in rules {
        if applicable(r, state, obs)? {
            heads.insert(r.head.clone());
        }
    }
    Ok(heads)
}
