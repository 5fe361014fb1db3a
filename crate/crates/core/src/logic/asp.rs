//! Ground answer-set semantics by exhaustive guess-and-check.
//!
//! Every answer set contains the program's facts and is contained in the
//! heads of its rules, so only the non-fact heads are guessed. A candidate
//! `S` is kept iff `least_model(gl_reduct(kb, S)) = S` and `S` holds no
//! complementary pair `p`, `-p`.

use std::collections::BTreeSet;

use super::{Logic, LogicError};
use crate::consistency::ConsistencyPolicy;
use crate::kb::{BeliefSet, KbElement, KnowledgeBase};
use crate::term::Belief;

/// Default bound on the number of guessed atoms.
pub const DEFAULT_MAX_ATOMS: usize = 20;

#[derive(Debug, Clone, Copy)]
pub struct AnswerSetLogic {
    pub max_atoms: usize,
}

impl Default for AnswerSetLogic {
    fn default() -> Self {
        AnswerSetLogic {
            max_atoms: DEFAULT_MAX_ATOMS,
        }
    }
}

impl Logic for AnswerSetLogic {
    fn name(&self) -> &str {
        "asp"
    }

    fn universe(&self, kb: &KnowledgeBase) -> BTreeSet<Belief> {
        kb.vocabulary()
    }

    fn acc(&self, kb: &KnowledgeBase) -> Result<Vec<BeliefSet>, LogicError> {
        answer_sets(kb, self.max_atoms)
    }
}

/// Gelfond-Lifschitz reduct of `kb` with respect to `candidate`.
pub fn gl_reduct(kb: &KnowledgeBase, candidate: &BeliefSet) -> KnowledgeBase {
    kb.elements()
        .filter(|e| !e.neg.iter().any(|b| candidate.contains(b)))
        .map(|e| KbElement::rule(e.head.clone(), e.pos.clone(), Vec::new()))
        .collect()
}

/// Least fixpoint of the immediate-consequence operator.
pub fn least_model(kb: &KnowledgeBase) -> Result<BeliefSet, LogicError> {
    if let Some(e) = kb.elements().find(|e| !e.neg.is_empty()) {
        return Err(LogicError::NotNegationFree(e.to_string()));
    }
    let rules: Vec<&KbElement> = kb.elements().collect();
    let mut model = BeliefSet::new();
    loop {
        let mut changed = false;
        for r in &rules {
            if !model.contains(&r.head) && r.pos.iter().all(|b| model.contains(b)) {
                model.insert(r.head.clone());
                changed = true;
            }
        }
        if !changed {
            return Ok(model);
        }
    }
}

/// All answer sets of a ground program, in canonical order.
pub fn answer_sets(kb: &KnowledgeBase, max_atoms: usize) -> Result<Vec<BeliefSet>, LogicError> {
    let facts: BTreeSet<Belief> = kb.facts().cloned().collect();
    let guessed: Vec<Belief> = kb
        .elements()
        .filter(|e| !e.is_fact())
        .map(|e| e.head.clone())
        .filter(|h| !facts.contains(h))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if guessed.len() > max_atoms {
        return Err(LogicError::UniverseTooLarge {
            atoms: guessed.len(),
            limit: max_atoms,
        });
    }

    let classical = ConsistencyPolicy::classical();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << guessed.len()) {
        let mut candidate = BeliefSet(facts.clone());
        for (i, b) in guessed.iter().enumerate() {
            if mask & (1 << i) != 0 {
                candidate.insert(b.clone());
            }
        }
        if least_model(&gl_reduct(kb, &candidate))? == candidate
            && classical.is_consistent(candidate.iter())
        {
            out.push(candidate);
        }
    }
    out.sort();
    Ok(out)
}
