//! Ground terms and beliefs.
//!
//! Terms are the common currency of knowledge bases, belief sets, sensor
//! readings and operation arguments. The derived ordering is canonical:
//! integers sort before symbols, symbols before compounds, and each kind is
//! compared lexicographically. All tie-breaking in the engine (equilibrium
//! order, report order) follows from it.
//!
//! Classical negation is encoded in term positions as the unary compound
//! `-(t)`, printed `-t`. A [`Belief`] carries it as a flag instead.

use std::fmt;
use std::str::FromStr;

use crate::syntax::{end_position, tokenize, Cursor, ParseError, Tok};

/// Functor used to embed a classically negated belief in a term.
pub const NEG_FUNCTOR: &str = "-";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Int(i64),
    Sym(String),
    Compound { functor: String, args: Vec<Term> },
}

impl Term {
    pub fn sym(name: impl Into<String>) -> Term {
        Term::Sym(name.into())
    }

    pub fn compound(functor: impl Into<String>, args: Vec<Term>) -> Term {
        let functor = functor.into();
        if args.is_empty() {
            Term::Sym(functor)
        } else {
            Term::Compound { functor, args }
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Term::Int(n) => Some(*n),
            _ => None,
        }
    }

    /// Functor name of a symbol or compound.
    pub fn functor(&self) -> Option<&str> {
        match self {
            Term::Int(_) => None,
            Term::Sym(s) => Some(s),
            Term::Compound { functor, .. } => Some(functor),
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Compound { args, .. } => args,
            _ => &[],
        }
    }

    pub fn arity(&self) -> usize {
        self.args().len()
    }

    pub fn depth(&self) -> usize {
        1 + self.args().iter().map(Term::depth).max().unwrap_or(0)
    }

    /// Append `extra` as a final argument: `p` becomes `p(extra)`,
    /// `p(a)` becomes `p(a,extra)`.
    pub fn with_extra_arg(&self, extra: Term) -> Option<Term> {
        match self {
            Term::Int(_) => None,
            Term::Sym(s) => Some(Term::compound(s.clone(), vec![extra])),
            Term::Compound { functor, args } => {
                let mut args = args.clone();
                args.push(extra);
                Some(Term::compound(functor.clone(), args))
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Int(n) => write!(f, "{n}"),
            Term::Sym(s) => f.write_str(s),
            Term::Compound { functor, args } if functor == NEG_FUNCTOR && args.len() == 1 => {
                write!(f, "-{}", args[0])
            }
            Term::Compound { functor, args } => {
                write!(f, "{functor}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl FromStr for Term {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_term(s)
    }
}

/// Parse a single ground term.
///
/// Grammar: `symbol | integer | symbol "(" term ("," term)* ")"`, with a
/// leading `-` for negative integers and classically negated atoms.
pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let toks = tokenize(text)?;
    let mut cur = Cursor::new(&toks, end_position(text));
    let t = term(&mut cur)?;
    cur.finish()?;
    Ok(t)
}

pub(crate) fn term(cur: &mut Cursor<'_>) -> Result<Term, ParseError> {
    match cur.peek() {
        Some(Tok::Minus) => match cur.peek_at(1) {
            Some(Tok::Int(_)) => Ok(Term::Int(cur.int()?)),
            Some(Tok::Ident(_)) => {
                cur.bump();
                let inner = term(cur)?;
                Ok(Term::compound(NEG_FUNCTOR, vec![inner]))
            }
            _ => {
                cur.bump();
                Err(cur.unexpected("integer or symbol after `-`"))
            }
        },
        Some(Tok::Int(n)) => {
            let n = *n;
            cur.bump();
            Ok(Term::Int(n))
        }
        Some(Tok::Ident(_)) => {
            let name = cur.ident()?;
            if cur.eat(&Tok::LParen) {
                let mut args = vec![term(cur)?];
                while cur.eat(&Tok::Comma) {
                    args.push(term(cur)?);
                }
                cur.expect(&Tok::RParen)?;
                Ok(Term::compound(name, args))
            } else {
                Ok(Term::Sym(name))
            }
        }
        Some(Tok::Var(v)) => Err(cur.error(format!("variable `{v}` in ground term"))),
        _ => Err(cur.unexpected("term")),
    }
}

/// A ground belief: an atom with an optional classical-negation flag.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Belief {
    atom: Term,
    negated: bool,
}

impl Belief {
    /// Build a belief; the atom must be a symbol or a compound.
    pub fn new(atom: Term, negated: bool) -> Option<Belief> {
        match &atom {
            Term::Int(_) => None,
            Term::Compound { functor, .. } if functor == NEG_FUNCTOR => None,
            _ => Some(Belief { atom, negated }),
        }
    }

    pub fn positive(atom: Term) -> Option<Belief> {
        Belief::new(atom, false)
    }

    pub fn atom(&self) -> &Term {
        &self.atom
    }

    pub fn is_negated(&self) -> bool {
        self.negated
    }

    pub fn predicate(&self) -> &str {
        self.atom.functor().expect("belief atoms are never integers")
    }

    pub fn arity(&self) -> usize {
        self.atom.arity()
    }

    pub fn args(&self) -> &[Term] {
        self.atom.args()
    }

    /// The complementary literal `¬b` / `b`.
    pub fn complement(&self) -> Belief {
        Belief {
            atom: self.atom.clone(),
            negated: !self.negated,
        }
    }

    /// Interpret a term as a belief, unwrapping the `-(t)` negation encoding.
    pub fn from_term(t: &Term) -> Option<Belief> {
        match t {
            Term::Compound { functor, args } if functor == NEG_FUNCTOR && args.len() == 1 => {
                Belief::new(args[0].clone(), true)
            }
            other => Belief::new(other.clone(), false),
        }
    }

    pub fn to_term(&self) -> Term {
        if self.negated {
            Term::compound(NEG_FUNCTOR, vec![self.atom.clone()])
        } else {
            self.atom.clone()
        }
    }

    /// Time-tagged form `p@t`, encoded by appending `t` as the last argument.
    pub fn tagged(&self, time: i64) -> Belief {
        Belief {
            atom: self
                .atom
                .with_extra_arg(Term::Int(time))
                .expect("belief atoms are never integers"),
            negated: self.negated,
        }
    }

    /// Final integer argument, i.e. the time tag of a tagged belief.
    pub fn time_tag(&self) -> Option<i64> {
        self.args().last().and_then(Term::as_int)
    }
}

impl fmt::Display for Belief {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("-")?;
        }
        write!(f, "{}", self.atom)
    }
}

impl FromStr for Belief {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_belief(s)
    }
}

pub fn parse_belief(text: &str) -> Result<Belief, ParseError> {
    let toks = tokenize(text)?;
    let mut cur = Cursor::new(&toks, end_position(text));
    let b = belief(&mut cur)?;
    cur.finish()?;
    Ok(b)
}

pub(crate) fn belief(cur: &mut Cursor<'_>) -> Result<Belief, ParseError> {
    let pos = cur.position();
    let t = term(cur)?;
    Belief::from_term(&t)
        .ok_or_else(|| ParseError::new(pos.0, pos.1, format!("`{t}` is not a belief")))
}
