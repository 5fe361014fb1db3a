//! Knowledge-base elements, knowledge bases and belief sets.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::syntax::{end_position, tokenize, Cursor, ParseError, Tok};
use crate::term::{belief, Belief};

/// A ground rule `head <- pos_1, ..., not neg_1, ...`. Facts have empty bodies.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KbElement {
    pub head: Belief,
    pub pos: Vec<Belief>,
    pub neg: Vec<Belief>,
}

impl KbElement {
    pub fn fact(head: Belief) -> Self {
        KbElement {
            head,
            pos: Vec::new(),
            neg: Vec::new(),
        }
    }

    pub fn rule(head: Belief, pos: Vec<Belief>, neg: Vec<Belief>) -> Self {
        KbElement { head, pos, neg }
    }

    pub fn is_fact(&self) -> bool {
        self.pos.is_empty() && self.neg.is_empty()
    }

    /// Every belief mentioned by the element.
    pub fn beliefs(&self) -> impl Iterator<Item = &Belief> {
        std::iter::once(&self.head)
            .chain(self.pos.iter())
            .chain(self.neg.iter())
    }
}

impl fmt::Display for KbElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if self.is_fact() {
            return Ok(());
        }
        f.write_str(" <- ")?;
        let body = self
            .pos
            .iter()
            .map(ToString::to_string)
            .chain(self.neg.iter().map(|b| format!("not {b}")));
        for (i, lit) in body.enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str(&lit)?;
        }
        Ok(())
    }
}

impl FromStr for KbElement {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let toks = tokenize(s)?;
        let mut cur = Cursor::new(&toks, end_position(s));
        let e = kb_element(&mut cur)?;
        cur.finish()?;
        Ok(e)
    }
}

pub(crate) fn kb_element(cur: &mut Cursor<'_>) -> Result<KbElement, ParseError> {
    let head = belief(cur)?;
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    if cur.eat(&Tok::Arrow) {
        loop {
            if matches!(cur.peek(), Some(Tok::Ident(s)) if s == "not")
                && !matches!(cur.peek_at(1), Some(Tok::LParen | Tok::Comma | Tok::Semi) | None)
            {
                cur.bump();
                neg.push(belief(cur)?);
            } else {
                pos.push(belief(cur)?);
            }
            if !cur.eat(&Tok::Comma) {
                break;
            }
        }
    }
    Ok(KbElement { head, pos, neg })
}

/// A finite set of KB elements.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KnowledgeBase {
    elements: BTreeSet<KbElement>,
}

impl KnowledgeBase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_facts<I: IntoIterator<Item = Belief>>(facts: I) -> Self {
        facts.into_iter().map(KbElement::fact).collect()
    }

    pub fn insert(&mut self, e: KbElement) -> bool {
        self.elements.insert(e)
    }

    pub fn insert_fact(&mut self, b: Belief) -> bool {
        self.elements.insert(KbElement::fact(b))
    }

    pub fn remove_fact(&mut self, b: &Belief) -> bool {
        self.elements.remove(&KbElement::fact(b.clone()))
    }

    pub fn contains_fact(&self, b: &Belief) -> bool {
        self.elements.contains(&KbElement::fact(b.clone()))
    }

    /// Remove every fact whose head satisfies `pred`; rules are left alone.
    pub fn retain_facts<F: FnMut(&Belief) -> bool>(&mut self, mut keep: F) {
        self.elements.retain(|e| !e.is_fact() || keep(&e.head));
    }

    pub fn elements(&self) -> impl Iterator<Item = &KbElement> {
        self.elements.iter()
    }

    pub fn facts(&self) -> impl Iterator<Item = &Belief> {
        self.elements.iter().filter(|e| e.is_fact()).map(|e| &e.head)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn is_negation_free(&self) -> bool {
        self.elements.iter().all(|e| e.neg.is_empty())
    }

    /// Every belief occurring anywhere in the KB.
    pub fn vocabulary(&self) -> BTreeSet<Belief> {
        self.elements
            .iter()
            .flat_map(|e| e.beliefs().cloned())
            .collect()
    }

    pub fn union(&self, other: &KnowledgeBase) -> KnowledgeBase {
        self.elements.union(&other.elements).cloned().collect()
    }
}

impl FromIterator<KbElement> for KnowledgeBase {
    fn from_iter<I: IntoIterator<Item = KbElement>>(iter: I) -> Self {
        KnowledgeBase {
            elements: iter.into_iter().collect(),
        }
    }
}

impl Extend<KbElement> for KnowledgeBase {
    fn extend<I: IntoIterator<Item = KbElement>>(&mut self, iter: I) {
        self.elements.extend(iter)
    }
}

impl<'a> IntoIterator for &'a KnowledgeBase {
    type Item = &'a KbElement;
    type IntoIter = std::collections::btree_set::Iter<'a, KbElement>;

    fn into_iter(self) -> Self::IntoIter {
        self.elements.iter()
    }
}

impl fmt::Display for KnowledgeBase {
    /// Elements in canonical order, separated by `; `.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.elements.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

/// Parse `e1; e2; ...` (a trailing `;` is allowed).
pub fn parse_kb(text: &str) -> Result<KnowledgeBase, ParseError> {
    let toks = tokenize(text)?;
    let mut cur = Cursor::new(&toks, end_position(text));
    let mut kb = KnowledgeBase::new();
    while !cur.at_end() {
        kb.insert(kb_element(&mut cur)?);
        if !cur.eat(&Tok::Semi) {
            break;
        }
    }
    cur.finish()?;
    Ok(kb)
}

/// A finite set of beliefs.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BeliefSet(pub BTreeSet<Belief>);

impl BeliefSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&self, b: &Belief) -> bool {
        self.0.contains(b)
    }

    pub fn insert(&mut self, b: Belief) -> bool {
        self.0.insert(b)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Belief> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_subset(&self, other: &BeliefSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn intersection(&self, other: &BTreeSet<Belief>) -> BeliefSet {
        BeliefSet(self.0.intersection(other).cloned().collect())
    }
}

impl FromIterator<Belief> for BeliefSet {
    fn from_iter<I: IntoIterator<Item = Belief>>(iter: I) -> Self {
        BeliefSet(iter.into_iter().collect())
    }
}

impl fmt::Display for BeliefSet {
    /// Beliefs in canonical order, separated by `, `.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, b) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_syntax_roundtrip() {
        let e: KbElement = "emergency <- oven(on,hot), not humanPos(kitchen)"
            .parse()
            .unwrap();
        assert_eq!(e.pos.len(), 1);
        assert_eq!(e.neg.len(), 1);
        assert_eq!(e.to_string(), "emergency <- oven(on,hot), not humanPos(kitchen)");
        let again: KbElement = e.to_string().parse().unwrap();
        assert_eq!(again, e);
    }

    #[test]
    fn not_as_a_plain_symbol() {
        // `not` directly followed by a separator is an ordinary atom
        let e: KbElement = "a <- not".parse().unwrap();
        assert_eq!(e.pos.len(), 1);
    }

    #[test]
    fn kb_printing_is_sorted() {
        let kb = parse_kb("tm(cold); pw(on);").unwrap();
        assert_eq!(kb.to_string(), "pw(on); tm(cold)");
        assert!(kb.elements().all(KbElement::is_fact));
    }

    #[test]
    fn retain_facts_keeps_rules() {
        let mut kb = parse_kb("a; b <- a; c").unwrap();
        kb.retain_facts(|_| false);
        assert_eq!(kb.to_string(), "b <- a");
    }
}
