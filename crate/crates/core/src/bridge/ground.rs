//! Grounding of bridge-rule schemas against the current observation and a
//! finite time bound.
//!
//! Variables are split in two groups. Global variables occur in the head or
//! in a positive literal; each global substitution yields one ground rule.
//! Variables occurring only under `not` (and in guards) are local: a naf
//! literal mentioning them is replaced by the conjunction of its instances
//! over all local substitutions that pass the local guards, so
//! `not c:idle(K,T'), T' < T+3` reads "no `c:idle(K,T')` with `T' < T+3`".
//!
//! Positive sensor literals bind their variables from the current reading.
//! Every other variable ranges over a declared domain. Variables with the
//! `time` domain range over `0..=now+horizon`, and arithmetic over them that
//! appears inside a literal must stay within the same bound.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use super::schema::{ArithOp, BridgeSchema, CmpOp, ContextRef, Guard, Pattern, SchemaAtom};
use super::{BridgeAtom, BridgeLiteral, BridgeRule, Operation};
use crate::engine::Observation;
use crate::term::{Belief, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroundingError {
    #[error("variable {variable} in `{schema}` has no finite domain and is not bound by a sensor literal")]
    Unresolvable { variable: String, schema: String },
    #[error("guard `{guard}` compares non-integer values")]
    NonIntegerGuard { guard: String },
    #[error("arithmetic on non-integer values in `{expr}`")]
    NonIntegerArithmetic { expr: String },
    #[error("integer overflow in `{expr}`")]
    Overflow { expr: String },
    #[error("unknown context `{0}`")]
    UnknownContext(String),
    #[error("unknown sensor `{0}`")]
    UnknownSensor(String),
    #[error("`{0}` is not a belief")]
    NotABelief(String),
    #[error("`{0}` is not an operation")]
    NotAnOperation(String),
}

/// Finite value range of a schema variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Domain {
    /// Time points `0..=now+horizon`.
    Time,
    /// Inclusive integer range.
    Range(i64, i64),
    Set(Vec<Term>),
}

impl Domain {
    fn values(&self, bound: i64) -> Vec<Term> {
        match self {
            Domain::Time => (0..=bound).map(Term::Int).collect(),
            Domain::Range(a, b) => (*a..=*b).map(Term::Int).collect(),
            Domain::Set(v) => v.clone(),
        }
    }

    fn contains(&self, t: &Term, bound: i64) -> bool {
        match (self, t) {
            (Domain::Time, Term::Int(n)) => (0..=bound).contains(n),
            (Domain::Range(a, b), Term::Int(n)) => (*a..=*b).contains(n),
            (Domain::Set(v), _) => v.contains(t),
            _ => false,
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Time => f.write_str("time"),
            Domain::Range(a, b) => write!(f, "{a}..{b}"),
            Domain::Set(v) => {
                f.write_str("{")?;
                for (i, t) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{t}")?;
                }
                f.write_str("}")
            }
        }
    }
}

/// Everything grounding depends on besides the schema itself.
#[derive(Debug, Clone, Copy)]
pub struct GroundingEnv<'a> {
    pub contexts: &'a [String],
    pub sensors: &'a [String],
    pub obs: &'a Observation,
    pub now: i64,
    pub horizon: i64,
    pub domains: &'a BTreeMap<String, Domain>,
}

impl GroundingEnv<'_> {
    fn bound(&self) -> i64 {
        self.now.saturating_add(self.horizon)
    }

    fn is_time_var(&self, v: &str) -> bool {
        matches!(self.domains.get(v), Some(Domain::Time))
    }

    fn context_index(&self, name: &str) -> Result<usize, GroundingError> {
        self.contexts
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| GroundingError::UnknownContext(name.to_string()))
    }

    fn sensor_index(&self, name: &str) -> Result<usize, GroundingError> {
        self.sensors
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| GroundingError::UnknownSensor(name.to_string()))
    }
}

type Binding = BTreeMap<String, Term>;

pub fn ground_schemas(
    schemas: &[BridgeSchema],
    env: &GroundingEnv<'_>,
) -> Result<Vec<BridgeRule>, GroundingError> {
    let mut out = BTreeSet::new();
    for s in schemas {
        out.extend(ground_schema(s, env)?);
    }
    Ok(out.into_iter().collect())
}

/// Splits the variables of a schema into global and local ones.
fn classify(schema: &BridgeSchema) -> (BTreeSet<String>, BTreeSet<String>) {
    let mut global = schema.head.vars();
    for lit in schema.body.iter().filter(|l| !l.naf) {
        global.extend(lit.vars());
    }
    let mut local = BTreeSet::new();
    for lit in schema.body.iter().filter(|l| l.naf) {
        local.extend(lit.vars().into_iter().filter(|v| !global.contains(v)));
    }
    // variables that occur in guards only behave like head variables
    for g in &schema.guards {
        global.extend(g.vars().into_iter().filter(|v| !local.contains(v)));
    }
    (global, local)
}

/// Variables that neither have a domain nor are bound by a positive sensor
/// literal; grounding fails on them.
pub fn unresolved_variables(schema: &BridgeSchema, domains: &BTreeMap<String, Domain>) -> Vec<String> {
    let (global, local) = classify(schema);
    global
        .iter()
        .chain(local.iter())
        .filter(|v| !domains.contains_key(*v) && !(global.contains(*v) && sensor_bindable(schema, v)))
        .cloned()
        .collect()
}

pub fn ground_schema(
    schema: &BridgeSchema,
    env: &GroundingEnv<'_>,
) -> Result<Vec<BridgeRule>, GroundingError> {
    let (global, local) = classify(schema);
    let (local_guards, global_guards): (Vec<&Guard>, Vec<&Guard>) = schema
        .guards
        .iter()
        .partition(|g| g.vars().iter().any(|v| local.contains(v)));

    if let Some(v) = unresolved_variables(schema, env.domains).into_iter().next() {
        return Err(GroundingError::Unresolvable {
            variable: v,
            schema: schema.to_string(),
        });
    }

    let bound = env.bound();
    let mut out = BTreeSet::new();
    for binding in sensor_bindings(schema, env)? {
        let mut partial = vec![binding];
        for v in &global {
            let mut next = Vec::new();
            for b in partial {
                match (b.get(v), env.domains.get(v)) {
                    (Some(t), Some(d)) => {
                        if d.contains(t, bound) {
                            next.push(b);
                        }
                    }
                    (Some(_), None) => next.push(b),
                    (None, Some(d)) => {
                        for val in d.values(bound) {
                            let mut b2 = b.clone();
                            b2.insert(v.clone(), val);
                            next.push(b2);
                        }
                    }
                    (None, None) => unreachable!("resolvability checked above"),
                }
            }
            partial = next;
        }
        'subst: for b in partial {
            for g in &global_guards {
                if !eval_guard(g, &b)? {
                    continue 'subst;
                }
            }
            if !in_time_range(&schema.head, &b, env)? {
                continue;
            }
            let mut body = Vec::new();
            for lit in &schema.body {
                let lit_vars = lit.vars();
                if lit.naf && lit_vars.iter().any(|v| local.contains(v)) {
                    continue;
                }
                match instantiate_literal(&lit.atom, lit.naf, &b, env)? {
                    Some(l) => body.push(l),
                    None => continue 'subst,
                }
            }
            for lb in local_bindings(&local, &local_guards, &b, env)? {
                for lit in schema.body.iter().filter(|l| l.naf) {
                    if !lit.vars().iter().any(|v| local.contains(v)) {
                        continue;
                    }
                    // an out-of-range local instance contributes no conjunct
                    if let Some(l) = instantiate_literal(&lit.atom, true, &lb, env)? {
                        body.push(l);
                    }
                }
            }
            let mut seen = BTreeSet::new();
            body.retain(|l| seen.insert(l.clone()));
            let head_term = eval(&schema.head, &b)?;
            let head = Operation::from_term(&head_term)
                .ok_or_else(|| GroundingError::NotAnOperation(head_term.to_string()))?;
            out.insert(BridgeRule::new(head, body));
        }
    }
    Ok(out.into_iter().collect())
}

fn sensor_bindable(schema: &BridgeSchema, v: &str) -> bool {
    schema.body.iter().any(|l| {
        if l.naf {
            return false;
        }
        match &l.atom {
            SchemaAtom::Sensor { datum, .. } => {
                let mut vs = BTreeSet::new();
                datum.collect_matchable_vars(&mut vs);
                vs.contains(v)
            }
            SchemaAtom::Context { .. } => false,
        }
    })
}

/// Bindings from matching positive sensor literals against current readings.
fn sensor_bindings(
    schema: &BridgeSchema,
    env: &GroundingEnv<'_>,
) -> Result<Vec<Binding>, GroundingError> {
    let mut out = vec![Binding::new()];
    for lit in schema.body.iter().filter(|l| !l.naf) {
        let SchemaAtom::Sensor { sensor, datum } = &lit.atom else {
            continue;
        };
        if datum.vars().is_empty() {
            continue;
        }
        let idx = env.sensor_index(sensor)?;
        let empty = BTreeSet::new();
        let reading = env.obs.reading(idx).unwrap_or(&empty);
        let mut next = Vec::new();
        for b in &out {
            for t in reading {
                let mut b2 = b.clone();
                if match_pattern(datum, t, &mut b2) {
                    next.push(b2);
                }
            }
        }
        out = next;
    }
    Ok(out)
}

/// Structural match; arithmetic subterms whose variables are not yet bound
/// match anything, the instantiated literal is checked against the
/// reading at satisfaction time anyway.
fn match_pattern(p: &Pattern, t: &Term, b: &mut Binding) -> bool {
    match p {
        Pattern::Var(v) => match b.get(v) {
            Some(bound) => bound == t,
            None => {
                b.insert(v.clone(), t.clone());
                true
            }
        },
        Pattern::Int(n) => *t == Term::Int(*n),
        Pattern::Sym(s) => matches!(t, Term::Sym(x) if x == s),
        Pattern::Compound { functor, args } => match t {
            Term::Compound { functor: f, args: a } if f == functor && a.len() == args.len() => {
                args.iter().zip(a).all(|(p, t)| match_pattern(p, t, b))
            }
            _ => false,
        },
        Pattern::Arith { .. } => match eval(p, b) {
            Ok(v) => v == *t,
            Err(_) => true,
        },
    }
}

fn local_bindings(
    local: &BTreeSet<String>,
    guards: &[&Guard],
    base: &Binding,
    env: &GroundingEnv<'_>,
) -> Result<Vec<Binding>, GroundingError> {
    if local.is_empty() {
        return Ok(Vec::new());
    }
    let bound = env.bound();
    let mut partial = vec![base.clone()];
    for v in local {
        let dom = &env.domains[v];
        let mut next = Vec::new();
        for b in &partial {
            for val in dom.values(bound) {
                let mut b2 = b.clone();
                b2.insert(v.clone(), val);
                next.push(b2);
            }
        }
        partial = next;
    }
    let mut out = Vec::new();
    'subst: for b in partial {
        for g in guards {
            if !eval_guard(g, &b)? {
                continue 'subst;
            }
        }
        out.push(b);
    }
    Ok(out)
}

/// `None` when a time-dependent position falls outside `0..=now+horizon`.
fn instantiate_literal(
    atom: &SchemaAtom,
    naf: bool,
    b: &Binding,
    env: &GroundingEnv<'_>,
) -> Result<Option<BridgeLiteral>, GroundingError> {
    let atom = match atom {
        SchemaAtom::Context { context, belief } => {
            if !in_time_range(belief, b, env)? {
                return Ok(None);
            }
            let name = match context {
                ContextRef::Name(n) => n.clone(),
                ContextRef::Var(v) => match &b[v] {
                    Term::Sym(s) => s.clone(),
                    other => return Err(GroundingError::UnknownContext(other.to_string())),
                },
            };
            let t = eval(belief, b)?;
            BridgeAtom::Context {
                context: env.context_index(&name)?,
                belief: Belief::from_term(&t)
                    .ok_or_else(|| GroundingError::NotABelief(t.to_string()))?,
            }
        }
        SchemaAtom::Sensor { sensor, datum } => {
            if !in_time_range(datum, b, env)? {
                return Ok(None);
            }
            BridgeAtom::Sensor {
                sensor: env.sensor_index(sensor)?,
                datum: eval(datum, b)?,
            }
        }
    };
    Ok(Some(BridgeLiteral { atom, naf }))
}

/// Every arithmetic subterm over time variables must denote a time point.
fn in_time_range(p: &Pattern, b: &Binding, env: &GroundingEnv<'_>) -> Result<bool, GroundingError> {
    match p {
        Pattern::Compound { args, .. } => {
            for a in args {
                if !in_time_range(a, b, env)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Pattern::Arith { .. } => {
            if !p.vars().iter().any(|v| env.is_time_var(v)) {
                return Ok(true);
            }
            match eval(p, b)? {
                Term::Int(n) => Ok((0..=env.bound()).contains(&n)),
                _ => Ok(false),
            }
        }
        _ => Ok(true),
    }
}

fn eval(p: &Pattern, b: &Binding) -> Result<Term, GroundingError> {
    match p {
        Pattern::Var(v) => Ok(b
            .get(v)
            .cloned()
            .expect("every variable is bound before evaluation")),
        Pattern::Int(n) => Ok(Term::Int(*n)),
        Pattern::Sym(s) => Ok(Term::Sym(s.clone())),
        Pattern::Compound { functor, args } => Ok(Term::Compound {
            functor: functor.clone(),
            args: args.iter().map(|a| eval(a, b)).collect::<Result<_, _>>()?,
        }),
        Pattern::Arith { op, lhs, rhs } => {
            let (Term::Int(x), Term::Int(y)) = (eval(lhs, b)?, eval(rhs, b)?) else {
                return Err(GroundingError::NonIntegerArithmetic {
                    expr: p.to_string(),
                });
            };
            let r = match op {
                ArithOp::Add => x.checked_add(y),
                ArithOp::Sub => x.checked_sub(y),
            };
            r.map(Term::Int).ok_or_else(|| GroundingError::Overflow {
                expr: p.to_string(),
            })
        }
    }
}

fn eval_guard(g: &Guard, b: &Binding) -> Result<bool, GroundingError> {
    let l = eval(&g.lhs, b)?;
    let r = eval(&g.rhs, b)?;
    match g.op {
        CmpOp::Eq => return Ok(l == r),
        CmpOp::Ne => return Ok(l != r),
        _ => {}
    }
    let (Term::Int(x), Term::Int(y)) = (l, r) else {
        return Err(GroundingError::NonIntegerGuard {
            guard: g.to_string(),
        });
    };
    Ok(match g.op {
        CmpOp::Lt => x < y,
        CmpOp::Le => x <= y,
        CmpOp::Gt => x > y,
        CmpOp::Ge => x >= y,
        CmpOp::Eq | CmpOp::Ne => unreachable!(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bridge::parse_schema;

    struct Fixture {
        contexts: Vec<String>,
        sensors: Vec<String>,
        obs: Observation,
        domains: BTreeMap<String, Domain>,
    }

    impl Fixture {
        fn new(contexts: &[&str], sensors: &[(&str, &[&str])]) -> Self {
            Fixture {
                contexts: contexts.iter().map(|s| s.to_string()).collect(),
                sensors: sensors.iter().map(|(s, _)| s.to_string()).collect(),
                obs: Observation::new(
                    sensors
                        .iter()
                        .map(|(_, r)| r.iter().map(|t| t.parse().unwrap()).collect())
                        .collect(),
                ),
                domains: BTreeMap::new(),
            }
        }

        fn domain(mut self, var: &str, d: Domain) -> Self {
            self.domains.insert(var.to_string(), d);
            self
        }

        fn ground(&self, schema: &str, now: i64, horizon: i64) -> Result<Vec<String>, GroundingError> {
            let env = GroundingEnv {
                contexts: &self.contexts,
                sensors: &self.sensors,
                obs: &self.obs,
                now,
                horizon,
                domains: &self.domains,
            };
            let rules = ground_schema(&parse_schema(schema).unwrap(), &env)?;
            Ok(rules
                .iter()
                .map(|r| r.display(&self.contexts, &self.sensors).to_string())
                .collect())
        }
    }

    #[test]
    fn frame_schema_instances() {
        let fx = Fixture::new(&["c"], &[]).domain("T", Domain::Time);
        assert_eq!(
            fx.ground("add(p(T+1)) <- c:p(T), not c:-p(T+1)", 1, 0).unwrap(),
            vec!["add(p(1)) <- c:p(0), not c:-p(1)"]
        );
        assert_eq!(
            fx.ground("add(p(T+1)) <- c:p(T), not c:-p(T+1)", 2, 0).unwrap(),
            vec![
                "add(p(1)) <- c:p(0), not c:-p(1)",
                "add(p(2)) <- c:p(1), not c:-p(2)"
            ]
        );
    }

    #[test]
    fn temperature_guards_consume_reading() {
        let fx = Fixture::new(&["kt"], &[("tmp", &["16"])]);
        assert_eq!(
            fx.ground("setTemp(cold) <- tmp@T, T <= 45", 0, 1).unwrap(),
            vec!["setTemp(cold) <- tmp@16"]
        );
        assert!(fx.ground("setTemp(hot) <- tmp@T, 45 < T", 0, 1).unwrap().is_empty());
    }

    #[test]
    fn empty_schema_set() {
        let fx = Fixture::new(&["c"], &[]);
        let env = GroundingEnv {
            contexts: &fx.contexts,
            sensors: &fx.sensors,
            obs: &fx.obs,
            now: 0,
            horizon: 1,
            domains: &fx.domains,
        };
        assert!(ground_schemas(&[], &env).unwrap().is_empty());
    }

    #[test]
    fn sensor_matching_binds_structure() {
        let fx = Fixture::new(&["hu"], &[("pos", &["enters(kitchen)", "leaves(bed)"])]);
        assert_eq!(
            fx.ground("setPos(P) <- pos@enters(P)", 0, 1).unwrap(),
            vec!["setPos(kitchen) <- pos@enters(kitchen)"]
        );
    }

    #[test]
    fn context_domains_are_enumerated() {
        let fx = Fixture::new(&["kt", "ig"], &[])
            .domain("P", Domain::Set(vec![Term::sym("on"), Term::sym("off")]))
            .domain("T", Domain::Set(vec![Term::sym("cold"), Term::sym("hot")]));
        let rules = fx
            .ground("extVal(oven(P,T)) <- kt:pw(P), kt:tm(T)", 0, 1)
            .unwrap();
        assert_eq!(rules.len(), 4);
        assert!(rules.contains(&"extVal(oven(on,hot)) <- kt:pw(on), kt:tm(hot)".to_string()));
    }

    #[test]
    fn local_naf_variables_expand_to_a_conjunction() {
        let fx = Fixture::new(&["ctl"], &[("t", &["now(1)"])])
            .domain("T'", Domain::Time);
        assert_eq!(
            fx.ground("add(mark(T)) <- t@now(T), not ctl:mark(T'), T' < T", 1, 0)
                .unwrap(),
            vec!["add(mark(1)) <- t@now(1), not ctl:mark(0)"]
        );
        // no local instance: the naf part is vacuous
        let fx = Fixture::new(&["ctl"], &[("t", &["now(0)"])]).domain("T'", Domain::Time);
        assert_eq!(
            fx.ground("add(mark(T)) <- t@now(T), not ctl:mark(T'), T' < T", 0, 0)
                .unwrap(),
            vec!["add(mark(0)) <- t@now(0)"]
        );
    }

    #[test]
    fn context_variables_resolve_to_names() {
        let fx = Fixture::new(&["ctl", "d1", "d2"], &[])
            .domain("K", Domain::Set(vec![Term::sym("d1"), Term::sym("d2")]))
            .domain("E", Domain::Set(vec![Term::sym("fire")]));
        assert_eq!(
            fx.ground("add(suspicion(K)) <- K:susp(E)", 0, 1).unwrap(),
            vec![
                "add(suspicion(d1)) <- d1:susp(fire)",
                "add(suspicion(d2)) <- d2:susp(fire)"
            ]
        );
        let bad = Fixture::new(&["ctl"], &[])
            .domain("K", Domain::Set(vec![Term::sym("nope")]))
            .domain("E", Domain::Set(vec![Term::sym("fire")]));
        assert!(matches!(
            bad.ground("add(suspicion(K)) <- K:susp(E)", 0, 1),
            Err(GroundingError::UnknownContext(_))
        ));
    }

    #[test]
    fn errors() {
        let fx = Fixture::new(&["c"], &[]);
        assert!(matches!(
            fx.ground("add(p(X)) <- c:q(X)", 0, 1),
            Err(GroundingError::Unresolvable { .. })
        ));
        let fx = Fixture::new(&["c"], &[])
            .domain("X", Domain::Set(vec![Term::sym("a")]));
        assert!(matches!(
            fx.ground("add(p(X)) <- c:q(X), X < 3", 0, 1),
            Err(GroundingError::NonIntegerGuard { .. })
        ));
        assert!(matches!(
            fx.ground("add(p(X+1)) <- c:q(X)", 0, 1),
            Err(GroundingError::NonIntegerArithmetic { .. })
        ));
        let fx = Fixture::new(&["c"], &[])
            .domain("X", Domain::Range(i64::MAX, i64::MAX));
        assert!(matches!(
            fx.ground("add(p(X+1)) <- c:q(X)", 0, 1),
            Err(GroundingError::Overflow { .. })
        ));
    }

    #[test]
    fn window_deletion_schema() {
        let fx = Fixture::new(&["d"], &[("t", &["now(4)"])])
            .domain("P", Domain::Set(vec![Term::sym("temp")]))
            .domain("Z", Domain::Range(2, 2))
            .domain("T'", Domain::Time);
        assert_eq!(
            fx.ground("del(P,T') <- t@now(T), d:win(P,Z), T' < T-Z", 4, 0)
                .unwrap(),
            vec![
                "del(temp,0) <- t@now(4), d:win(temp,2)",
                "del(temp,1) <- t@now(4), d:win(temp,2)"
            ]
        );
    }
}
