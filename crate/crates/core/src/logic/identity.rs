use std::collections::BTreeSet;

use super::{Logic, LogicError};
use crate::kb::{BeliefSet, KnowledgeBase};
use crate::term::Belief;

/// `ACC_id(kb) = {kb}` over fact-only knowledge bases.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityLogic;

pub fn acc_identity(kb: &KnowledgeBase) -> Result<BeliefSet, LogicError> {
    kb.elements()
        .map(|e| {
            if e.is_fact() {
                Ok(e.head.clone())
            } else {
                Err(LogicError::NotAFact(e.to_string()))
            }
        })
        .collect()
}

impl Logic for IdentityLogic {
    fn name(&self) -> &str {
        "identity"
    }

    fn universe(&self, kb: &KnowledgeBase) -> BTreeSet<Belief> {
        kb.vocabulary()
    }

    fn acc(&self, kb: &KnowledgeBase) -> Result<Vec<BeliefSet>, LogicError> {
        Ok(vec![acc_identity(kb)?])
    }
}
