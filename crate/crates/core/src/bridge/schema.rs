//! Bridge-rule schemas: rules with variables, integer arithmetic and
//! comparison guards, standing for the set of their ground instances.
//!
//! Surface syntax: `op(args) <- lit, ..., guard, ...` where a literal is
//! `ctx:belief`, `sensor@term` or `not` followed by either, and a guard is
//! `expr cmp expr` with `cmp` one of `< <= = != > >=`. Variables start with
//! an uppercase letter; a variable may also stand for a context name.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::syntax::{end_position, tokenize, Cursor, ParseError, Tok};
use crate::term::{Term, NEG_FUNCTOR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ArithOp {
    Add,
    Sub,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pattern {
    Var(String),
    Int(i64),
    Sym(String),
    Compound { functor: String, args: Vec<Pattern> },
    Arith {
        op: ArithOp,
        lhs: Box<Pattern>,
        rhs: Box<Pattern>,
    },
}

impl Pattern {
    pub fn var(name: &str) -> Pattern {
        Pattern::Var(name.to_string())
    }

    pub fn from_term(t: &Term) -> Pattern {
        match t {
            Term::Int(n) => Pattern::Int(*n),
            Term::Sym(s) => Pattern::Sym(s.clone()),
            Term::Compound { functor, args } => Pattern::Compound {
                functor: functor.clone(),
                args: args.iter().map(Pattern::from_term).collect(),
            },
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Pattern::Var(v) => {
                out.insert(v.clone());
            }
            Pattern::Int(_) | Pattern::Sym(_) => {}
            Pattern::Compound { args, .. } => args.iter().for_each(|a| a.collect_vars(out)),
            Pattern::Arith { lhs, rhs, .. } => {
                lhs.collect_vars(out);
                rhs.collect_vars(out);
            }
        }
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    /// Variables that a match against a ground term can bind, i.e. those not
    /// nested under arithmetic.
    pub fn collect_matchable_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Pattern::Var(v) => {
                out.insert(v.clone());
            }
            Pattern::Compound { args, .. } => {
                args.iter().for_each(|a| a.collect_matchable_vars(out))
            }
            _ => {}
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Var(v) => f.write_str(v),
            Pattern::Int(n) => write!(f, "{n}"),
            Pattern::Sym(s) => f.write_str(s),
            Pattern::Compound { functor, args } if functor == NEG_FUNCTOR && args.len() == 1 => {
                write!(f, "-{}", args[0])
            }
            Pattern::Compound { functor, args } => {
                write!(f, "{functor}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Pattern::Arith { op, lhs, rhs } => {
                let sym = match op {
                    ArithOp::Add => "+",
                    ArithOp::Sub => "-",
                };
                write!(f, "{lhs}{sym}")?;
                if matches!(**rhs, Pattern::Arith { .. }) {
                    write!(f, "({rhs})")
                } else {
                    write!(f, "{rhs}")
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ContextRef {
    Name(String),
    Var(String),
}

impl fmt::Display for ContextRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContextRef::Name(s) | ContextRef::Var(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SchemaAtom {
    Context { context: ContextRef, belief: Pattern },
    Sensor { sensor: String, datum: Pattern },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SchemaLiteral {
    pub atom: SchemaAtom,
    pub naf: bool,
}

impl SchemaLiteral {
    pub fn vars(&self) -> BTreeSet<String> {
        match &self.atom {
            SchemaAtom::Context { context, belief } => {
                let mut v = belief.vars();
                if let ContextRef::Var(x) = context {
                    v.insert(x.clone());
                }
                v
            }
            SchemaAtom::Sensor { datum, .. } => datum.vars(),
        }
    }
}

impl fmt::Display for SchemaLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.naf {
            f.write_str("not ")?;
        }
        match &self.atom {
            SchemaAtom::Context { context, belief } => write!(f, "{context}:{belief}"),
            SchemaAtom::Sensor { sensor, datum } => write!(f, "{sensor}@{datum}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ne,
    Gt,
    Ge,
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Guard {
    pub lhs: Pattern,
    pub op: CmpOp,
    pub rhs: Pattern,
}

impl Guard {
    pub fn vars(&self) -> BTreeSet<String> {
        let mut v = self.lhs.vars();
        self.rhs.collect_vars(&mut v);
        v
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.op, self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BridgeSchema {
    pub head: Pattern,
    pub body: Vec<SchemaLiteral>,
    pub guards: Vec<Guard>,
}

impl BridgeSchema {
    pub fn vars(&self) -> BTreeSet<String> {
        let mut v = self.head.vars();
        for l in &self.body {
            v.extend(l.vars());
        }
        for g in &self.guards {
            v.extend(g.vars());
        }
        v
    }

    /// Operation name of the head.
    pub fn op_name(&self) -> Option<&str> {
        match &self.head {
            Pattern::Sym(s) => Some(s),
            Pattern::Compound { functor, .. } => Some(functor),
            _ => None,
        }
    }

    pub fn is_ground(&self) -> bool {
        self.vars().is_empty()
    }
}

impl fmt::Display for BridgeSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <-", self.head)?;
        let items = self
            .body
            .iter()
            .map(ToString::to_string)
            .chain(self.guards.iter().map(ToString::to_string));
        for (i, item) in items.enumerate() {
            f.write_str(if i == 0 { " " } else { ", " })?;
            f.write_str(&item)?;
        }
        Ok(())
    }
}

impl FromStr for BridgeSchema {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_schema(s)
    }
}

pub fn parse_schema(text: &str) -> Result<BridgeSchema, ParseError> {
    let toks = tokenize(text)?;
    let mut cur = Cursor::new(&toks, end_position(text));
    let s = schema(&mut cur)?;
    cur.finish()?;
    Ok(s)
}

pub(crate) fn schema(cur: &mut Cursor<'_>) -> Result<BridgeSchema, ParseError> {
    let head_pos = cur.position();
    let head = expr(cur)?;
    if !matches!(head, Pattern::Sym(_) | Pattern::Compound { .. })
        || matches!(&head, Pattern::Compound { functor, .. } if functor == NEG_FUNCTOR)
    {
        return Err(ParseError::new(
            head_pos.0,
            head_pos.1,
            format!("`{head}` is not an operation"),
        ));
    }
    let mut body = Vec::new();
    let mut guards = Vec::new();
    if cur.eat(&Tok::Arrow) {
        if matches!(cur.peek(), None | Some(Tok::Semi) | Some(Tok::RBrace)) {
            return Ok(BridgeSchema { head, body, guards });
        }
        loop {
            match body_item(cur)? {
                BodyItem::Lit(l) => body.push(l),
                BodyItem::Guard(g) => guards.push(g),
            }
            if !cur.eat(&Tok::Comma) {
                break;
            }
        }
    }
    Ok(BridgeSchema { head, body, guards })
}

enum BodyItem {
    Lit(SchemaLiteral),
    Guard(Guard),
}

fn body_item(cur: &mut Cursor<'_>) -> Result<BodyItem, ParseError> {
    let naf = matches!(cur.peek(), Some(Tok::Ident(s)) if s == "not")
        && matches!(cur.peek_at(1), Some(Tok::Ident(_) | Tok::Var(_)));
    if naf {
        cur.bump();
    }
    // `name:` / `Var:` opens a context literal, `name@` a sensor literal
    match (cur.peek(), cur.peek_at(1)) {
        (Some(Tok::Ident(c)), Some(Tok::Colon)) => {
            let context = ContextRef::Name(c.clone());
            cur.bump();
            cur.bump();
            let belief = expr(cur)?;
            return Ok(BodyItem::Lit(SchemaLiteral {
                atom: SchemaAtom::Context { context, belief },
                naf,
            }));
        }
        (Some(Tok::Var(c)), Some(Tok::Colon)) => {
            let context = ContextRef::Var(c.clone());
            cur.bump();
            cur.bump();
            let belief = expr(cur)?;
            return Ok(BodyItem::Lit(SchemaLiteral {
                atom: SchemaAtom::Context { context, belief },
                naf,
            }));
        }
        (Some(Tok::Ident(s)), Some(Tok::At)) => {
            let sensor = s.clone();
            cur.bump();
            cur.bump();
            let datum = expr(cur)?;
            return Ok(BodyItem::Lit(SchemaLiteral {
                atom: SchemaAtom::Sensor { sensor, datum },
                naf,
            }));
        }
        _ => {}
    }
    if naf {
        return Err(cur.unexpected("context or sensor literal after `not`"));
    }
    let lhs = expr(cur)?;
    let op = match cur.bump() {
        Some(Tok::Lt) => CmpOp::Lt,
        Some(Tok::Le) => CmpOp::Le,
        Some(Tok::Eq) => CmpOp::Eq,
        Some(Tok::Ne) => CmpOp::Ne,
        Some(Tok::Gt) => CmpOp::Gt,
        Some(Tok::Ge) => CmpOp::Ge,
        _ => return Err(cur.error("expected a literal or a comparison guard")),
    };
    let rhs = expr(cur)?;
    Ok(BodyItem::Guard(Guard { lhs, op, rhs }))
}

/// `primary (("+" | "-") primary)*`, left associative.
pub(crate) fn expr(cur: &mut Cursor<'_>) -> Result<Pattern, ParseError> {
    let mut lhs = primary(cur)?;
    loop {
        let op = match cur.peek() {
            Some(Tok::Plus) => ArithOp::Add,
            Some(Tok::Minus) => ArithOp::Sub,
            _ => return Ok(lhs),
        };
        cur.bump();
        let rhs = primary(cur)?;
        lhs = Pattern::Arith {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        };
    }
}

fn primary(cur: &mut Cursor<'_>) -> Result<Pattern, ParseError> {
    match cur.peek() {
        Some(Tok::Minus) => match cur.peek_at(1) {
            Some(Tok::Int(_)) => Ok(Pattern::Int(cur.int()?)),
            Some(Tok::Ident(_) | Tok::Var(_)) => {
                cur.bump();
                let inner = primary(cur)?;
                Ok(Pattern::Compound {
                    functor: NEG_FUNCTOR.to_string(),
                    args: vec![inner],
                })
            }
            _ => {
                cur.bump();
                Err(cur.unexpected("integer, symbol or variable after `-`"))
            }
        },
        Some(Tok::Int(n)) => {
            let n = *n;
            cur.bump();
            Ok(Pattern::Int(n))
        }
        Some(Tok::Var(v)) => {
            let v = v.clone();
            cur.bump();
            Ok(Pattern::Var(v))
        }
        Some(Tok::LParen) => {
            cur.bump();
            let e = expr(cur)?;
            cur.expect(&Tok::RParen)?;
            Ok(e)
        }
        Some(Tok::Ident(_)) => {
            let name = cur.ident()?;
            if cur.eat(&Tok::LParen) {
                let mut args = vec![expr(cur)?];
                while cur.eat(&Tok::Comma) {
                    args.push(expr(cur)?);
                }
                cur.expect(&Tok::RParen)?;
                Ok(Pattern::Compound {
                    functor: name,
                    args,
                })
            } else {
                Ok(Pattern::Sym(name))
            }
        }
        _ => Err(cur.unexpected("term or expression")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_schema() {
        let s = parse_schema("add(p(T+1)) <- c:p(T), not c:-p(T+1)").unwrap();
        assert_eq!(s.body.len(), 2);
        assert!(s.body[1].naf);
        assert_eq!(s.to_string(), "add(p(T+1)) <- c:p(T), not c:-p(T+1)");
        assert_eq!(s.vars(), ["T".to_string()].into());
    }

    #[test]
    fn guards_and_sensor_literals() {
        let s = parse_schema("setTemp(hot) <- tmp@T, 45 < T").unwrap();
        assert_eq!(s.guards.len(), 1);
        assert_eq!(s.to_string(), "setTemp(hot) <- tmp@T, 45 < T");
    }

    #[test]
    fn empty_body_and_context_variables() {
        let s = parse_schema("incr <-").unwrap();
        assert!(s.body.is_empty());
        assert_eq!(s.to_string(), "incr <-");
        let s = parse_schema("add(suspicion(K)) <- K:susp(E)").unwrap();
        assert!(matches!(
            &s.body[0].atom,
            SchemaAtom::Context { context: ContextRef::Var(k), .. } if k == "K"
        ));
    }

    #[test]
    fn arithmetic_is_left_associative() {
        let s = parse_schema("del(P,T') <- t@now(T), d:win(P,Z), T' < T-Z+1").unwrap();
        assert_eq!(s.guards[0].rhs.to_string(), "T-Z+1");
        let again = parse_schema(&s.to_string()).unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn rejects_bad_heads_and_literals() {
        assert!(parse_schema("X <- a:b").is_err());
        assert!(parse_schema("op <- not 3 < 4").is_err());
        assert!(parse_schema("op <- a:b,").is_err());
    }
}
