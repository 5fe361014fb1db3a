//! Context logics: a logic maps a knowledge base to its acceptable belief sets.

mod asp;
mod identity;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::kb::{BeliefSet, KnowledgeBase};
use crate::term::Belief;

pub use asp::{answer_sets, gl_reduct, least_model, AnswerSetLogic, DEFAULT_MAX_ATOMS};
pub use identity::{acc_identity, IdentityLogic};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("identity logic accepts only facts, found rule `{0}`")]
    NotAFact(String),
    #[error("least model requires a negation-free program, found `{0}`")]
    NotNegationFree(String),
    #[error("{atoms} undetermined atoms exceed the enumeration guard of {limit}")]
    UniverseTooLarge { atoms: usize, limit: usize },
}

/// A logic `(KB_L, BS_L, ACC_L)`.
///
/// Implementations must keep `acc(kb)` within the powerset of
/// `universe(kb)`, and `universe` must be monotone in `kb`; the equilibrium
/// search relies on both to prune bridge rules.
pub trait Logic: fmt::Debug + Send + Sync {
    fn name(&self) -> &str;

    fn universe(&self, kb: &KnowledgeBase) -> BTreeSet<Belief>;

    /// Acceptable belief sets, in canonical order without duplicates.
    fn acc(&self, kb: &KnowledgeBase) -> Result<Vec<BeliefSet>, LogicError>;
}
