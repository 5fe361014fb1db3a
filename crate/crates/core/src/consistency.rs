//! Pluggable notion of when two beliefs are inconsistent with each other.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::term::Belief;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("functional declaration {predicate}/{arity}: value position {position} is out of range")]
pub struct DeclarationError {
    pub predicate: String,
    pub arity: usize,
    pub position: usize,
}

/// `pred/arity@pos...`: a predicate that holds for at most one value
/// combination per assignment of its remaining (key) positions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FunctionalDecl {
    predicate: String,
    arity: usize,
    value_positions: BTreeSet<usize>,
}

impl FunctionalDecl {
    pub fn new(
        predicate: impl Into<String>,
        arity: usize,
        value_positions: impl IntoIterator<Item = usize>,
    ) -> Result<Self, DeclarationError> {
        let predicate = predicate.into();
        let value_positions: BTreeSet<usize> = value_positions.into_iter().collect();
        if let Some(&position) = value_positions.iter().find(|&&p| p >= arity) {
            return Err(DeclarationError {
                predicate,
                arity,
                position,
            });
        }
        Ok(FunctionalDecl {
            predicate,
            arity,
            value_positions,
        })
    }

    pub fn predicate(&self) -> &str {
        &self.predicate
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn value_positions(&self) -> &BTreeSet<usize> {
        &self.value_positions
    }

    fn matches(&self, b: &Belief) -> bool {
        !b.is_negated() && b.predicate() == self.predicate && b.arity() == self.arity
    }

    fn clashes(&self, a: &Belief, b: &Belief) -> bool {
        if !self.matches(a) || !self.matches(b) {
            return false;
        }
        let (xs, ys) = (a.args(), b.args());
        let mut differs_on_value = false;
        for (i, (x, y)) in xs.iter().zip(ys).enumerate() {
            if self.value_positions.contains(&i) {
                differs_on_value |= x != y;
            } else if x != y {
                return false;
            }
        }
        differs_on_value
    }
}

impl fmt::Display for FunctionalDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.predicate, self.arity)?;
        for p in &self.value_positions {
            write!(f, "@{p}")?;
        }
        Ok(())
    }
}

/// Classical negation clashes plus declared functional predicates.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConsistencyPolicy {
    functional: Vec<FunctionalDecl>,
}

impl ConsistencyPolicy {
    pub fn new(functional: Vec<FunctionalDecl>) -> Self {
        ConsistencyPolicy { functional }
    }

    /// Only classical clashes count.
    pub fn classical() -> Self {
        Self::default()
    }

    pub fn functional(&self) -> &[FunctionalDecl] {
        &self.functional
    }

    /// True iff `a` and `b` are complementary literals, or both are positive
    /// instances of a functional predicate that agree on every key position
    /// and differ on some value position.
    pub fn conflicts(&self, a: &Belief, b: &Belief) -> bool {
        if a.atom() == b.atom() {
            return a.is_negated() != b.is_negated();
        }
        self.functional.iter().any(|d| d.clashes(a, b))
    }

    /// Whether a set contains a conflicting pair.
    pub fn is_consistent<'a, I>(&self, beliefs: I) -> bool
    where
        I: IntoIterator<Item = &'a Belief>,
    {
        let v: Vec<&Belief> = beliefs.into_iter().collect();
        for (i, a) in v.iter().enumerate() {
            for b in &v[i + 1..] {
                if self.conflicts(a, b) {
                    return false;
                }
            }
        }
        true
    }
}

/// Free-function form of [`ConsistencyPolicy::conflicts`].
pub fn conflicts(a: &Belief, b: &Belief, policy: &ConsistencyPolicy) -> bool {
    policy.conflicts(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::parse_belief;
    use proptest::prelude::*;

    fn b(s: &str) -> Belief {
        parse_belief(s).unwrap()
    }

    fn tm_policy() -> ConsistencyPolicy {
        ConsistencyPolicy::new(vec![FunctionalDecl::new("tm", 1, [0]).unwrap()])
    }

    #[test]
    fn classical_clash() {
        assert!(conflicts(&b("p(1)"), &b("-p(1)"), &ConsistencyPolicy::classical()));
        assert!(!conflicts(&b("p(1)"), &b("-p(2)"), &ConsistencyPolicy::classical()));
    }

    #[test]
    fn functional_clash() {
        assert!(conflicts(&b("tm(cold)"), &b("tm(hot)"), &tm_policy()));
        assert!(!conflicts(&b("tm(cold)"), &b("tm(hot)"), &ConsistencyPolicy::classical()));
    }

    #[test]
    fn unrelated_predicates() {
        assert!(!conflicts(&b("pw(on)"), &b("tm(hot)"), &tm_policy()));
    }

    #[test]
    fn key_positions_must_agree() {
        let p = ConsistencyPolicy::new(vec![FunctionalDecl::new("win", 2, [1]).unwrap()]);
        assert!(p.conflicts(&b("win(p,3)"), &b("win(p,5)")));
        assert!(!p.conflicts(&b("win(p,3)"), &b("win(q,5)")));
    }

    #[test]
    fn declaration_positions_below_arity() {
        assert!(FunctionalDecl::new("tm", 1, [1]).is_err());
        assert_eq!(FunctionalDecl::new("f", 3, [2, 1]).unwrap().to_string(), "f/3@1@2");
    }

    fn arb_belief() -> impl Strategy<Value = Belief> {
        (
            prop::sample::select(vec!["tm", "pw", "p"]),
            prop::collection::vec(prop::sample::select(vec!["on", "off", "a"]), 0..3),
            any::<bool>(),
        )
            .prop_map(|(p, args, neg)| {
                let args = args.into_iter().map(crate::term::Term::sym).collect();
                Belief::new(crate::term::Term::compound(p, args), neg).unwrap()
            })
    }

    proptest! {
        #[test]
        fn symmetric_and_irreflexive(x in arb_belief(), y in arb_belief()) {
            let policy = ConsistencyPolicy::new(vec![
                FunctionalDecl::new("tm", 1, [0]).unwrap(),
                FunctionalDecl::new("pw", 2, [1]).unwrap(),
            ]);
            prop_assert_eq!(policy.conflicts(&x, &y), policy.conflicts(&y, &x));
            prop_assert!(!policy.conflicts(&x, &x));
        }
    }
}
