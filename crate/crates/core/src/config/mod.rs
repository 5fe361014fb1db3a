//! Text formats: system configurations and observation traces.
//!
//! ```text
//! horizon 1
//! sensor tmp { lang: integers }
//! sensor t auto-time { lang: now/1 }
//! context kt {
//!   logic: identity
//!   kb: pw(off)
//!   ops: setTemp = replace(tm)
//!   bridge:
//!     setTemp(cold) <- tmp@T, T <= 45;
//!     setTemp(hot) <- tmp@T, 45 < T
//! }
//! ```
//!
//! A context body is a sequence of `section: item; item; ...` blocks with
//! the sections `logic`, `kb`, `ops`, `ranking`, `functional`, `domain`,
//! `window`, `buffer`, `expire` and `bridge`.

mod trace;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::bridge::{schema_item, unresolved_variables, BridgeSchema, ContextRef, Domain, SchemaAtom};
use crate::consistency::{ConsistencyPolicy, FunctionalDecl};
use crate::engine::{Context, Rmcs, Sensor, SensorLanguage, Signature, DEFAULT_HORIZON};
use crate::kb::{kb_element, KnowledgeBase};
use crate::logic::{AnswerSetLogic, IdentityLogic, Logic};
use crate::management::{handler_decl, Expiry, Handler, ManagementConfig};
use crate::syntax::{end_position, tokenize, Cursor, ParseError, Tok};
use crate::term::{term, Term};

pub use trace::{format_trace, parse_trace};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("duplicate {kind} `{name}`")]
    Duplicate { kind: &'static str, name: String },
    #[error("context `{context}`: unknown sensor `{sensor}`")]
    UnknownSensor { context: String, sensor: String },
    #[error("context `{context}`: unknown context `{target}`")]
    UnknownContext { context: String, target: String },
    #[error("context `{context}`: operation `{op}` has no handler")]
    UnknownOperation { context: String, op: String },
    #[error("context `{context}`: variable {variable} in `{schema}` is unsafe: give it a domain or bind it with a positive sensor literal")]
    UnsafeVariable {
        context: String,
        variable: String,
        schema: String,
    },
    #[error("context `{context}`: {message}")]
    Invalid { context: String, message: String },
    #[error("more than one auto-time sensor")]
    SeveralTimeSensors,
    #[error("step {step}: reading `{term}` is outside the language of sensor `{sensor}`")]
    OutOfLanguage {
        step: usize,
        sensor: String,
        term: String,
    },
    #[error("step {step}: unknown sensor `{sensor}`")]
    TraceSensor { step: usize, sensor: String },
    #[error("observation blocks must be numbered 0, 1, 2, ...; found {found} where {expected} was due")]
    NonContiguous { expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogicKind {
    Identity,
    Asp,
}

impl LogicKind {
    pub fn instantiate(self) -> Arc<dyn Logic> {
        match self {
            LogicKind::Identity => Arc::new(IdentityLogic),
            LogicKind::Asp => Arc::new(AnswerSetLogic::default()),
        }
    }
}

impl fmt::Display for LogicKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LogicKind::Identity => "identity",
            LogicKind::Asp => "asp",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextConfig {
    pub name: String,
    pub logic: LogicKind,
    pub kb: KnowledgeBase,
    pub mng: ManagementConfig,
    pub domains: Vec<(String, Domain)>,
    pub bridge: Vec<BridgeSchema>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemConfig {
    pub horizon: i64,
    pub sensors: Vec<Sensor>,
    pub contexts: Vec<ContextConfig>,
}

impl SystemConfig {
    pub fn build(&self) -> Rmcs {
        Rmcs {
            contexts: self
                .contexts
                .iter()
                .map(|c| Context {
                    name: c.name.clone(),
                    logic: c.logic.instantiate(),
                    mng: c.mng.clone(),
                    domains: c.domains.iter().cloned().collect(),
                })
                .collect(),
            bridge: self.contexts.iter().map(|c| c.bridge.clone()).collect(),
            kbs: self.contexts.iter().map(|c| c.kb.clone()).collect(),
            sensors: self.sensors.clone(),
            horizon: self.horizon,
        }
    }
}

const SECTIONS: &[&str] = &[
    "logic", "kb", "ops", "ranking", "functional", "domain", "window", "buffer", "expire", "bridge",
];

fn section_start(cur: &Cursor<'_>) -> Option<&'static str> {
    match (cur.peek(), cur.peek_at(1)) {
        (Some(Tok::Ident(k)), Some(Tok::Colon)) => SECTIONS.iter().copied().find(|s| s == k),
        _ => None,
    }
}

fn keyword(cur: &mut Cursor<'_>, word: &str) -> Result<(), ParseError> {
    match cur.peek() {
        Some(Tok::Ident(s)) if s == word => {
            cur.bump();
            Ok(())
        }
        _ => Err(cur.unexpected(&format!("`{word}`"))),
    }
}

fn nonneg(cur: &mut Cursor<'_>, what: &str) -> Result<i64, ParseError> {
    let pos = cur.position();
    let n = cur.int()?;
    if n < 0 {
        return Err(ParseError::new(pos.0, pos.1, format!("{what} must not be negative")));
    }
    Ok(n)
}

/// `pred/arity`
fn signature(cur: &mut Cursor<'_>) -> Result<(String, usize), ParseError> {
    let p = cur.ident()?;
    cur.expect(&Tok::Slash)?;
    let a = nonneg(cur, "arity")?;
    Ok((p, a as usize))
}

fn sensor(cur: &mut Cursor<'_>) -> Result<Sensor, ParseError> {
    let name = cur.ident()?;
    let mut auto_time = false;
    if matches!(cur.peek(), Some(Tok::Ident(s)) if s == "auto") {
        cur.bump();
        cur.expect(&Tok::Minus)?;
        keyword(cur, "time")?;
        auto_time = true;
    }
    cur.expect(&Tok::LBrace)?;
    keyword(cur, "lang")?;
    cur.expect(&Tok::Colon)?;
    let language = if matches!(cur.peek(), Some(Tok::Ident(s)) if s == "integers") {
        cur.bump();
        SensorLanguage::Integers
    } else {
        let mut sigs = Vec::new();
        loop {
            let negated = cur.eat(&Tok::Minus);
            let (name, arity) = signature(cur)?;
            sigs.push(Signature { negated, name, arity });
            if !cur.eat(&Tok::Comma) {
                break;
            }
        }
        SensorLanguage::Signatures(sigs)
    };
    cur.eat(&Tok::Semi);
    cur.expect(&Tok::RBrace)?;
    Ok(Sensor {
        name,
        language,
        auto_time,
    })
}

fn domain(cur: &mut Cursor<'_>) -> Result<(String, Domain), ParseError> {
    let var = match cur.bump() {
        Some(Tok::Var(v)) => v.clone(),
        _ => return Err(cur.error("expected a variable")),
    };
    keyword(cur, "in")?;
    let d = match cur.peek() {
        Some(Tok::Ident(s)) if s == "time" => {
            cur.bump();
            Domain::Time
        }
        Some(Tok::LBrace) => {
            cur.bump();
            let mut items = Vec::new();
            if !cur.eat(&Tok::RBrace) {
                loop {
                    items.push(term(cur)?);
                    if !cur.eat(&Tok::Comma) {
                        break;
                    }
                }
                cur.expect(&Tok::RBrace)?;
            }
            Domain::Set(items)
        }
        _ => {
            let pos = cur.position();
            let a = cur.int()?;
            cur.expect(&Tok::DotDot)?;
            let b = cur.int()?;
            if a > b {
                return Err(ParseError::new(pos.0, pos.1, format!("empty range {a}..{b}")));
            }
            Domain::Range(a, b)
        }
    };
    Ok((var, d))
}

fn functional(cur: &mut Cursor<'_>) -> Result<FunctionalDecl, ParseError> {
    let pos = cur.position();
    let (p, a) = signature(cur)?;
    let mut positions = Vec::new();
    while cur.eat(&Tok::At) {
        positions.push(nonneg(cur, "position")? as usize);
    }
    if positions.is_empty() {
        return Err(cur.unexpected("`@` and a value position"));
    }
    FunctionalDecl::new(p, a, positions).map_err(|e| ParseError::new(pos.0, pos.1, e.to_string()))
}

fn context(cur: &mut Cursor<'_>) -> Result<ContextConfig, ParseError> {
    let name = cur.ident()?;
    cur.expect(&Tok::LBrace)?;
    let mut logic = None;
    let mut kb = KnowledgeBase::new();
    let mut mng = ManagementConfig::default();
    let mut functional_decls = Vec::new();
    let mut domains = Vec::new();
    let mut bridge = Vec::new();
    let mut section: Option<&'static str> = None;
    loop {
        if cur.eat(&Tok::RBrace) {
            break;
        }
        if let Some(s) = section_start(cur) {
            cur.bump();
            cur.bump();
            section = Some(s);
            continue;
        }
        if cur.eat(&Tok::Semi) {
            continue;
        }
        match section {
            None => return Err(cur.unexpected("a section such as `logic:`")),
            Some("logic") => {
                let pos = cur.position();
                logic = Some(match cur.ident()?.as_str() {
                    "identity" => LogicKind::Identity,
                    "asp" => LogicKind::Asp,
                    other => {
                        return Err(ParseError::new(pos.0, pos.1, format!("unknown logic `{other}`")))
                    }
                });
            }
            Some("kb") => {
                kb.insert(kb_element(cur)?);
            }
            Some("ops") => mng.handlers.push(handler_decl(cur)?),
            Some("ranking") => {
                mng.ranking.push(cur.ident()?);
                while cur.eat(&Tok::Gt) {
                    mng.ranking.push(cur.ident()?);
                }
            }
            Some("functional") => {
                functional_decls.push(functional(cur)?);
                while cur.eat(&Tok::Comma) {
                    functional_decls.push(functional(cur)?);
                }
            }
            Some("domain") => domains.push(domain(cur)?),
            Some("window") => mng.window = cur.ident()?,
            Some("buffer") => mng.buffer = cur.ident()?,
            Some("expire") => {
                let (predicate, arity) = signature(cur)?;
                let slack = if matches!(cur.peek(), Some(Tok::Ident(s)) if s == "after") {
                    cur.bump();
                    nonneg(cur, "expiry slack")?
                } else {
                    1
                };
                mng.expiry.push(Expiry {
                    predicate,
                    arity,
                    slack,
                });
            }
            Some("bridge") => bridge.push(schema_item(cur)?),
            Some(other) => unreachable!("section {other}"),
        }
        if !(cur.eat(&Tok::Semi) || matches!(cur.peek(), Some(Tok::RBrace)) || section_start(cur).is_some()) {
            return Err(cur.unexpected("`;`"));
        }
    }
    mng.policy = ConsistencyPolicy::new(functional_decls);
    Ok(ContextConfig {
        name,
        logic: logic.unwrap_or(LogicKind::Identity),
        kb,
        mng,
        domains,
        bridge,
    })
}

/// Parse and validate a system configuration.
pub fn parse_system(text: &str) -> Result<SystemConfig, ConfigError> {
    let toks = tokenize(text)?;
    let mut cur = Cursor::new(&toks, end_position(text));
    let mut cfg = SystemConfig {
        horizon: DEFAULT_HORIZON,
        sensors: Vec::new(),
        contexts: Vec::new(),
    };
    while !cur.at_end() {
        let pos = cur.position();
        match cur.ident()?.as_str() {
            "horizon" => cfg.horizon = nonneg(&mut cur, "horizon")?,
            "sensor" => cfg.sensors.push(sensor(&mut cur)?),
            "context" => cfg.contexts.push(context(&mut cur)?),
            other => {
                return Err(ParseError::new(
                    pos.0,
                    pos.1,
                    format!("expected `horizon`, `sensor` or `context`, found `{other}`"),
                )
                .into())
            }
        }
    }
    validate(&cfg)?;
    Ok(cfg)
}

/// Cross-reference and safety checks.
pub fn validate(cfg: &SystemConfig) -> Result<(), ConfigError> {
    let mut seen = BTreeSet::new();
    for s in &cfg.sensors {
        if !seen.insert(s.name.as_str()) {
            return Err(ConfigError::Duplicate {
                kind: "sensor",
                name: s.name.clone(),
            });
        }
    }
    if cfg.sensors.iter().filter(|s| s.auto_time).count() > 1 {
        return Err(ConfigError::SeveralTimeSensors);
    }
    let sensors: BTreeSet<&str> = cfg.sensors.iter().map(|s| s.name.as_str()).collect();
    let mut contexts = BTreeSet::new();
    for c in &cfg.contexts {
        if !contexts.insert(c.name.as_str()) {
            return Err(ConfigError::Duplicate {
                kind: "context",
                name: c.name.clone(),
            });
        }
    }
    for c in &cfg.contexts {
        let invalid = |message: String| ConfigError::Invalid {
            context: c.name.clone(),
            message,
        };
        let mut ops = BTreeSet::new();
        for d in &c.mng.handlers {
            if !ops.insert(d.op.as_str()) {
                return Err(ConfigError::Duplicate {
                    kind: "operation",
                    name: d.op.clone(),
                });
            }
        }
        let mut vars = BTreeSet::new();
        for (v, _) in &c.domains {
            if !vars.insert(v.as_str()) {
                return Err(ConfigError::Duplicate {
                    kind: "domain",
                    name: v.clone(),
                });
            }
        }
        if c.logic == LogicKind::Identity {
            if let Some(e) = c.kb.elements().find(|e| !e.is_fact()) {
                return Err(invalid(format!("identity logic admits only facts, found `{e}`")));
            }
        }
        for s in &c.mng.ranking {
            if !sensors.contains(s.as_str()) {
                return Err(ConfigError::UnknownSensor {
                    context: c.name.clone(),
                    sensor: s.clone(),
                });
            }
        }
        let has_restore = c.mng.handlers.iter().any(|d| d.handler == Handler::EmptyBuffer);
        let has_window = c
            .kb
            .facts()
            .any(|f| f.predicate() == c.mng.window && f.arity() == 2)
            || c.bridge.iter().any(|s| {
                s.op_name() == Some("set")
                    && matches!(&s.head, crate::bridge::Pattern::Compound { args, .. }
                        if matches!(args.first(), Some(crate::bridge::Pattern::Compound { functor, .. }) if *functor == c.mng.window))
            });
        if has_restore && !has_window {
            log::warn!(
                "context `{}` restores its buffer but declares no `{}` facts; every buffered reading will be kept",
                c.name,
                c.mng.window
            );
        }
        let domains: BTreeMap<String, Domain> = c.domains.iter().cloned().collect();
        for s in &c.bridge {
            let op = s.op_name().unwrap_or_default();
            if !ops.contains(op) {
                return Err(ConfigError::UnknownOperation {
                    context: c.name.clone(),
                    op: op.to_string(),
                });
            }
            if let Some(v) = unresolved_variables(s, &domains).into_iter().next() {
                return Err(ConfigError::UnsafeVariable {
                    context: c.name.clone(),
                    variable: v,
                    schema: s.to_string(),
                });
            }
            for lit in &s.body {
                match &lit.atom {
                    SchemaAtom::Sensor { sensor, .. } if !sensors.contains(sensor.as_str()) => {
                        return Err(ConfigError::UnknownSensor {
                            context: c.name.clone(),
                            sensor: sensor.clone(),
                        })
                    }
                    SchemaAtom::Context {
                        context: ContextRef::Name(n),
                        ..
                    } if !contexts.contains(n.as_str()) => {
                        return Err(ConfigError::UnknownContext {
                            context: c.name.clone(),
                            target: n.clone(),
                        })
                    }
                    SchemaAtom::Context {
                        context: ContextRef::Var(v),
                        ..
                    } => {
                        let Some(Domain::Set(names)) = domains.get(v) else {
                            return Err(invalid(format!(
                                "context variable {v} needs a domain listing context names"
                            )));
                        };
                        for n in names {
                            if !matches!(n, Term::Sym(s) if contexts.contains(s.as_str())) {
                                return Err(ConfigError::UnknownContext {
                                    context: c.name.clone(),
                                    target: n.to_string(),
                                });
                            }
                        }
                    }
                    _ => {}
                }
            }
        }
    }
    Ok(())
}

impl fmt::Display for SystemConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "horizon {}", self.horizon)?;
        for s in &self.sensors {
            let auto = if s.auto_time { " auto-time" } else { "" };
            writeln!(f, "sensor {}{auto} {{ lang: {} }}", s.name, s.language)?;
        }
        for c in &self.contexts {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl fmt::Display for ContextConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let defaults = ManagementConfig::default();
        writeln!(f, "context {} {{", self.name)?;
        writeln!(f, "  logic: {}", self.logic)?;
        if !self.kb.is_empty() {
            writeln!(f, "  kb: {}", self.kb)?;
        }
        if !self.mng.handlers.is_empty() {
            let ops: Vec<String> = self.mng.handlers.iter().map(ToString::to_string).collect();
            writeln!(f, "  ops: {}", ops.join("; "))?;
        }
        if !self.mng.ranking.is_empty() {
            writeln!(f, "  ranking: {}", self.mng.ranking.join(" > "))?;
        }
        if !self.mng.policy.functional().is_empty() {
            let decls: Vec<String> = self.mng.policy.functional().iter().map(ToString::to_string).collect();
            writeln!(f, "  functional: {}", decls.join(", "))?;
        }
        if !self.domains.is_empty() {
            let ds: Vec<String> = self.domains.iter().map(|(v, d)| format!("{v} in {d}")).collect();
            writeln!(f, "  domain: {}", ds.join("; "))?;
        }
        if self.mng.window != defaults.window {
            writeln!(f, "  window: {}", self.mng.window)?;
        }
        if self.mng.buffer != defaults.buffer {
            writeln!(f, "  buffer: {}", self.mng.buffer)?;
        }
        if !self.mng.expiry.is_empty() {
            let es: Vec<String> = self.mng.expiry.iter().map(ToString::to_string).collect();
            writeln!(f, "  expire: {}", es.join("; "))?;
        }
        if !self.bridge.is_empty() {
            writeln!(f, "  bridge:")?;
            for (i, s) in self.bridge.iter().enumerate() {
                let sep = if i + 1 < self.bridge.len() { ";" } else { "" };
                writeln!(f, "    {s}{sep}")?;
            }
        }
        writeln!(f, "}}")
    }
}
