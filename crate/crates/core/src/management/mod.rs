//! Deterministic management functions built from a fixed set of operation
//! handlers.
//!
//! A batch is applied in phases: `set`, then `del`/`delAll`, then
//! replace-style setters, `incr`, additions (plain, input facts and the
//! ranked merge of sourced additions), buffering, buffer restore, alarms,
//! and finally expiry of declared retention predicates.

mod merge;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::bridge::Operation;
use crate::consistency::ConsistencyPolicy;
use crate::kb::KnowledgeBase;
use crate::syntax::{end_position, tokenize, Cursor, ParseError, Tok};
use crate::term::{term, Belief, Term};

pub use merge::{merge_prioritized_adds, restore_buffer, SourcedItem};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ManagementError {
    #[error("unknown operation `{0}`")]
    UnknownOperation(String),
    #[error("operation `{op}` expects {expected}")]
    BadArguments { op: String, expected: &'static str },
    #[error("source `{0}` is not covered by the sensor ranking")]
    UnrankedSource(String),
    #[error("source `{sensor}` reports conflicting `{a}` and `{b}` at time {time}")]
    SourceConflict {
        sensor: String,
        a: String,
        b: String,
        time: i64,
    },
    #[error("malformed buffer entry `{0}`")]
    MalformedBuffer(String),
}

/// Built-in behaviour bound to an operation name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Handler {
    /// `add(b)`, `add(b,t)` (adds `b@t`) and `add(b,t,s)` (ranked merge).
    Add,
    /// `del(b)` removes the fact `b`; `del(p,t)` removes every `p`-fact
    /// tagged `t`.
    Del,
    /// `delAll(p,a1,..,ak)` removes every `p`-fact whose first arguments
    /// are `a1..ak`.
    DelAll,
    /// `set(b)` replaces all facts that agree with `b` on everything but the
    /// last argument.
    Set,
    /// `now(t)` becomes `now(t+1)`.
    Incr,
    /// Single-argument setter for `predicate/1`. Without a setter in the
    /// batch the old value survives if `keep`, otherwise the default (if
    /// any) is written. With several setters the first value listed in
    /// `prefer` wins; without preferences all values are written.
    Replace {
        predicate: String,
        keep: bool,
        default: Option<Term>,
        prefer: Vec<Term>,
    },
    /// Input facts: all facts of the listed signatures are dropped and the
    /// operation arguments become the new ones.
    Input { signatures: Vec<(String, usize)> },
    /// `bf(b,t,s)` stores a reading in the buffer.
    Buffer,
    /// Restores buffered readings within their window.
    EmptyBuffer,
    /// `alarm(e)` adds `alarm(e)`.
    Alarm,
}

impl Handler {
    /// The handler an operation gets when declared by name alone.
    pub fn builtin(name: &str) -> Option<Handler> {
        Some(match name {
            "add" => Handler::Add,
            "del" => Handler::Del,
            "delAll" => Handler::DelAll,
            "set" => Handler::Set,
            "incr" => Handler::Incr,
            "bf" => Handler::Buffer,
            "empty.buffer" => Handler::EmptyBuffer,
            "alarm" => Handler::Alarm,
            _ => return None,
        })
    }

    fn keyword(&self) -> &'static str {
        match self {
            Handler::Add => "add",
            Handler::Del => "del",
            Handler::DelAll => "delAll",
            Handler::Set => "set",
            Handler::Incr => "incr",
            Handler::Replace { .. } => "replace",
            Handler::Input { .. } => "input",
            Handler::Buffer => "bf",
            Handler::EmptyBuffer => "empty.buffer",
            Handler::Alarm => "alarm",
        }
    }
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

impl fmt::Display for Handler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Handler::Replace {
                predicate,
                keep,
                default,
                prefer,
            } => {
                write!(f, "replace({predicate}")?;
                if *keep {
                    f.write_str(",keep")?;
                }
                if let Some(d) = default {
                    write!(f, ",default({d})")?;
                }
                if !prefer.is_empty() {
                    write!(f, ",prefer({})", join(prefer))?;
                }
                f.write_str(")")
            }
            Handler::Input { signatures } => {
                let sigs: Vec<String> = signatures.iter().map(|(p, a)| format!("{p}/{a}")).collect();
                write!(f, "input({})", sigs.join(","))
            }
            other => f.write_str(other.keyword()),
        }
    }
}

/// `name` or `name = handler`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HandlerDecl {
    pub op: String,
    pub handler: Handler,
}

impl fmt::Display for HandlerDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if Handler::builtin(&self.op).as_ref() == Some(&self.handler) {
            f.write_str(&self.op)
        } else {
            write!(f, "{} = {}", self.op, self.handler)
        }
    }
}

pub fn parse_handler_decl(text: &str) -> Result<HandlerDecl, ParseError> {
    let toks = tokenize(text)?;
    let mut cur = Cursor::new(&toks, end_position(text));
    let d = handler_decl(&mut cur)?;
    cur.finish()?;
    Ok(d)
}

pub(crate) fn handler_decl(cur: &mut Cursor<'_>) -> Result<HandlerDecl, ParseError> {
    let pos = cur.position();
    let op = cur.ident()?;
    if !cur.eat(&Tok::Eq) {
        let handler = Handler::builtin(&op).ok_or_else(|| {
            ParseError::new(pos.0, pos.1, format!("`{op}` is not a built-in operation; bind it with `{op} = ...`"))
        })?;
        return Ok(HandlerDecl { op, handler });
    }
    let kpos = cur.position();
    let kind = cur.ident()?;
    let handler = match kind.as_str() {
        "replace" => {
            cur.expect(&Tok::LParen)?;
            let predicate = cur.ident()?;
            let (mut keep, mut default, mut prefer) = (false, None, Vec::new());
            while cur.eat(&Tok::Comma) {
                let opos = cur.position();
                match cur.ident()?.as_str() {
                    "keep" => keep = true,
                    "default" => {
                        cur.expect(&Tok::LParen)?;
                        default = Some(term(cur)?);
                        cur.expect(&Tok::RParen)?;
                    }
                    "prefer" => {
                        cur.expect(&Tok::LParen)?;
                        prefer.push(term(cur)?);
                        while cur.eat(&Tok::Comma) {
                            prefer.push(term(cur)?);
                        }
                        cur.expect(&Tok::RParen)?;
                    }
                    other => {
                        return Err(ParseError::new(
                            opos.0,
                            opos.1,
                            format!("unknown replace option `{other}`"),
                        ))
                    }
                }
            }
            cur.expect(&Tok::RParen)?;
            Handler::Replace {
                predicate,
                keep,
                default,
                prefer,
            }
        }
        "input" => {
            cur.expect(&Tok::LParen)?;
            let mut signatures = Vec::new();
            loop {
                let p = cur.ident()?;
                cur.expect(&Tok::Slash)?;
                let a = cur.int()?;
                if a < 0 {
                    return Err(cur.error("negative arity"));
                }
                signatures.push((p, a as usize));
                if !cur.eat(&Tok::Comma) {
                    break;
                }
            }
            cur.expect(&Tok::RParen)?;
            Handler::Input { signatures }
        }
        other => Handler::builtin(other).ok_or_else(|| {
            ParseError::new(kpos.0, kpos.1, format!("unknown handler `{other}`"))
        })?,
    };
    Ok(HandlerDecl { op, handler })
}

/// Facts of `predicate/arity` whose time tag lies more than `slack` steps
/// in the past are dropped after every update.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expiry {
    pub predicate: String,
    pub arity: usize,
    pub slack: i64,
}

impl fmt::Display for Expiry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{} after {}", self.predicate, self.arity, self.slack)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManagementConfig {
    pub handlers: Vec<HandlerDecl>,
    /// Source names, highest priority first.
    pub ranking: Vec<String>,
    pub policy: ConsistencyPolicy,
    /// Predicate holding current window sizes, `win(p,x)`.
    pub window: String,
    /// Predicate of buffered readings, `bf(b,t,s)`.
    pub buffer: String,
    pub expiry: Vec<Expiry>,
}

impl Default for ManagementConfig {
    fn default() -> Self {
        ManagementConfig {
            handlers: Vec::new(),
            ranking: Vec::new(),
            policy: ConsistencyPolicy::classical(),
            window: "win".to_string(),
            buffer: "bf".to_string(),
            expiry: Vec::new(),
        }
    }
}

impl ManagementConfig {
    pub fn with_handlers<I: IntoIterator<Item = HandlerDecl>>(handlers: I) -> Self {
        ManagementConfig {
            handlers: handlers.into_iter().collect(),
            ..Default::default()
        }
    }

    pub fn handler(&self, op: &str) -> Option<&Handler> {
        self.handlers.iter().find(|d| d.op == op).map(|d| &d.handler)
    }

    pub fn ops(&self) -> impl Iterator<Item = &str> {
        self.handlers.iter().map(|d| d.op.as_str())
    }

    pub fn rank(&self, source: &str) -> Option<usize> {
        self.ranking.iter().position(|s| s == source)
    }
}

fn bad(op: &Operation, expected: &'static str) -> ManagementError {
    ManagementError::BadArguments {
        op: op.to_string(),
        expected,
    }
}

fn belief_arg(op: &Operation, t: &Term, expected: &'static str) -> Result<Belief, ManagementError> {
    Belief::from_term(t).ok_or_else(|| bad(op, expected))
}

fn int_arg(op: &Operation, t: &Term, expected: &'static str) -> Result<i64, ManagementError> {
    t.as_int().ok_or_else(|| bad(op, expected))
}

fn sym_arg<'a>(op: &Operation, t: &'a Term, expected: &'static str) -> Result<&'a str, ManagementError> {
    match t {
        Term::Sym(s) => Ok(s),
        _ => Err(bad(op, expected)),
    }
}

/// An `add` operation after argument checking.
enum Addition {
    Plain(Belief),
    Sourced(SourcedItem),
}

fn parse_add(op: &Operation) -> Result<Addition, ManagementError> {
    const EXPECTED: &str = "a belief, optionally followed by a time and a source";
    match op.args.as_slice() {
        [b] => Ok(Addition::Plain(belief_arg(op, b, EXPECTED)?)),
        [b, t] => Ok(Addition::Plain(
            belief_arg(op, b, EXPECTED)?.tagged(int_arg(op, t, EXPECTED)?),
        )),
        [b, t, s] => Ok(Addition::Sourced(SourcedItem {
            belief: belief_arg(op, b, EXPECTED)?,
            time: int_arg(op, t, EXPECTED)?,
            source: sym_arg(op, s, EXPECTED)?.to_string(),
        })),
        _ => Err(bad(op, EXPECTED)),
    }
}

/// Key of `set(b)`: predicate, polarity and all arguments but the last.
fn set_key(b: &Belief) -> (String, bool, Vec<Term>) {
    let args = b.args();
    let prefix = args[..args.len().saturating_sub(1)].to_vec();
    (b.predicate().to_string(), b.is_negated(), prefix)
}

/// `mng(batch, kb)`; `now` is the current time point.
pub fn apply_management(
    batch: &BTreeSet<Operation>,
    kb: &KnowledgeBase,
    cfg: &ManagementConfig,
    now: i64,
) -> Result<KnowledgeBase, ManagementError> {
    let mut by_handler: BTreeMap<&str, Vec<&Operation>> = BTreeMap::new();
    for op in batch {
        let h = cfg
            .handler(&op.name)
            .ok_or_else(|| ManagementError::UnknownOperation(op.name.clone()))?;
        by_handler.entry(h.keyword()).or_default().push(op);
    }
    let ops_of = |k: &str| by_handler.get(k).cloned().unwrap_or_default();
    let mut kb = kb.clone();

    // (1) set
    let mut sets = Vec::new();
    for op in ops_of("set") {
        match op.args.as_slice() {
            [b] if b.arity() > 0 => sets.push(belief_arg(op, b, "a compound belief")?),
            _ => return Err(bad(op, "a compound belief")),
        }
    }
    let keys: BTreeSet<_> = sets.iter().map(set_key).collect();
    kb.retain_facts(|f| f.arity() == 0 || !keys.contains(&set_key(f)));
    for b in sets {
        kb.insert_fact(b);
    }

    // (2) del, delAll
    for op in ops_of("del") {
        match op.args.as_slice() {
            [b] => {
                let b = belief_arg(op, b, "a belief, or a predicate and a time")?;
                kb.remove_fact(&b);
            }
            [p, t] => {
                let p = sym_arg(op, p, "a belief, or a predicate and a time")?.to_string();
                let t = int_arg(op, t, "a belief, or a predicate and a time")?;
                kb.retain_facts(|f| !(f.predicate() == p && f.time_tag() == Some(t)));
            }
            _ => return Err(bad(op, "a belief, or a predicate and a time")),
        }
    }
    for op in ops_of("delAll") {
        let Some((p, prefix)) = op.args.split_first() else {
            return Err(bad(op, "a predicate followed by leading arguments"));
        };
        let p = sym_arg(op, p, "a predicate followed by leading arguments")?.to_string();
        kb.retain_facts(|f| {
            !(f.predicate() == p && f.arity() >= prefix.len() && f.args()[..prefix.len()] == *prefix)
        });
    }

    // (3) replace-style setters, in declaration order
    for d in &cfg.handlers {
        let Handler::Replace {
            predicate,
            keep,
            default,
            prefer,
        } = &d.handler
        else {
            continue;
        };
        let mut values = BTreeSet::new();
        for op in batch.iter().filter(|o| o.name == d.op) {
            match op.args.as_slice() {
                [v] => {
                    values.insert(v.clone());
                }
                _ => return Err(bad(op, "exactly one value")),
            }
        }
        let is_target = |f: &Belief| !f.is_negated() && f.predicate() == predicate && f.arity() == 1;
        let old: Vec<Term> = kb.facts().filter(|f| is_target(f)).map(|f| f.args()[0].clone()).collect();
        let chosen: Vec<Term> = if values.is_empty() {
            if *keep && !old.is_empty() {
                old
            } else {
                default.iter().cloned().collect()
            }
        } else if let Some(p) = prefer.iter().find(|p| values.contains(*p)) {
            vec![p.clone()]
        } else {
            values.into_iter().collect()
        };
        kb.retain_facts(|f| !is_target(f));
        for v in chosen {
            let fact = Term::compound(predicate.clone(), vec![v]);
            kb.insert_fact(Belief::positive(fact).expect("compound"));
        }
    }

    // (4) incr
    if !ops_of("incr").is_empty() {
        let clocks: Vec<Belief> = kb
            .facts()
            .filter(|f| !f.is_negated() && f.predicate() == "now" && f.arity() == 1)
            .cloned()
            .collect();
        for c in clocks {
            if let Some(t) = c.args()[0].as_int() {
                kb.remove_fact(&c);
                let next = t.checked_add(1).ok_or_else(|| bad(ops_of("incr")[0], "a representable successor time"))?;
                kb.insert_fact(Belief::positive(Term::compound("now", vec![Term::Int(next)])).expect("compound"));
            }
        }
    }

    // (5) input facts, plain additions, ranked merge
    for d in &cfg.handlers {
        let Handler::Input { signatures } = &d.handler else {
            continue;
        };
        let declared = |b: &Belief| {
            signatures
                .iter()
                .any(|(p, a)| b.predicate() == p && b.arity() == *a)
        };
        let mut incoming = Vec::new();
        for op in batch.iter().filter(|o| o.name == d.op) {
            let b = match op.args.as_slice() {
                [b] => belief_arg(op, b, "one belief of a declared input signature")?,
                _ => return Err(bad(op, "one belief of a declared input signature")),
            };
            if !declared(&b) {
                return Err(bad(op, "one belief of a declared input signature"));
            }
            incoming.push(b);
        }
        kb.retain_facts(|f| !declared(f));
        for b in incoming {
            kb.insert_fact(b);
        }
    }
    let mut sourced = Vec::new();
    for op in ops_of("add") {
        match parse_add(op)? {
            Addition::Plain(b) => {
                kb.insert_fact(b);
            }
            Addition::Sourced(item) => sourced.push(item),
        }
    }
    kb = merge_prioritized_adds(&sourced, &kb, cfg)?;

    // (6) buffering
    for op in ops_of("bf") {
        let [b, t, s] = op.args.as_slice() else {
            return Err(bad(op, "a belief, a time and a source"));
        };
        belief_arg(op, b, "a belief, a time and a source")?;
        int_arg(op, t, "a belief, a time and a source")?;
        sym_arg(op, s, "a belief, a time and a source")?;
        let entry = Term::compound(cfg.buffer.clone(), vec![b.clone(), t.clone(), s.clone()]);
        kb.insert_fact(Belief::positive(entry).expect("compound"));
    }

    // (7) buffer restore
    if !ops_of("empty.buffer").is_empty() {
        kb = restore_buffer(&kb, cfg, now)?;
    }

    // (8) alarms
    for op in ops_of("alarm") {
        if op.args.is_empty() {
            return Err(bad(op, "at least one argument"));
        }
        kb.insert_fact(Belief::positive(op.to_term()).expect("compound"));
    }

    // (9) expiry
    for e in &cfg.expiry {
        kb.retain_facts(|f| {
            !(!f.is_negated()
                && f.predicate() == e.predicate
                && f.arity() == e.arity
                && f.time_tag().is_some_and(|t| t < now.saturating_sub(e.slack)))
        });
    }
    Ok(kb)
}

/// Every fact `apply_management` could add for some sub-batch of `batch`.
///
/// Used to over-approximate the knowledge bases a context may end up with,
/// so it only needs to be a superset.
pub fn may_add(batch: &BTreeSet<Operation>, kb: &KnowledgeBase, cfg: &ManagementConfig) -> BTreeSet<Belief> {
    let mut out = BTreeSet::new();
    for d in &cfg.handlers {
        if let Handler::Replace {
            predicate,
            default: Some(v),
            ..
        } = &d.handler
        {
            out.insert(Belief::positive(Term::compound(predicate.clone(), vec![v.clone()])).expect("compound"));
        }
    }
    for op in batch {
        let Some(h) = cfg.handler(&op.name) else {
            continue;
        };
        match h {
            Handler::Add => match parse_add(op) {
                Ok(Addition::Plain(b)) => {
                    out.insert(b);
                }
                Ok(Addition::Sourced(item)) => {
                    out.insert(item.belief.tagged(item.time));
                }
                Err(_) => {}
            },
            Handler::Set | Handler::Input { .. } => {
                if let Some(b) = op.args.first().and_then(Belief::from_term) {
                    out.insert(b);
                }
            }
            Handler::Replace { predicate, .. } => {
                if let [v] = op.args.as_slice() {
                    out.insert(Belief::positive(Term::compound(predicate.clone(), vec![v.clone()])).expect("compound"));
                }
            }
            Handler::Buffer => {
                out.insert(Belief::positive(Term::compound(cfg.buffer.clone(), op.args.clone())).expect("compound"));
            }
            Handler::EmptyBuffer => {
                for f in kb.facts() {
                    if let Some(item) = merge::buffer_item(f, cfg) {
                        out.insert(item.belief.tagged(item.time));
                    }
                }
            }
            Handler::Alarm => {
                if !op.args.is_empty() {
                    out.insert(Belief::positive(op.to_term()).expect("compound"));
                }
            }
            Handler::Incr | Handler::Del | Handler::DelAll => {}
        }
    }
    // `incr` also advances a clock written by `set` in the same update
    if batch.iter().any(|o| cfg.handler(&o.name) == Some(&Handler::Incr)) {
        let clocks: Vec<i64> = kb
            .facts()
            .chain(out.iter())
            .filter(|f| !f.is_negated() && f.predicate() == "now" && f.arity() == 1)
            .filter_map(|f| f.args()[0].as_int()?.checked_add(1))
            .collect();
        for t in clocks {
            out.insert(Belief::positive(Term::compound("now", vec![Term::Int(t)])).expect("compound"));
        }
    }
    // a buffer restore may bring back entries buffered in the same update
    if batch.iter().any(|o| cfg.handler(&o.name) == Some(&Handler::EmptyBuffer)) {
        for b in out.clone() {
            if let Some(item) = merge::buffer_item(&b, cfg) {
                out.insert(item.belief.tagged(item.time));
            }
        }
    }
    out
}
