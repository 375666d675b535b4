use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Binding, QueryCandidate, Term, TriplePattern};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroundError {
    #[error("variable ?{0} has no value in the binding")]
    UnboundVariable(String),
    #[error("variable ?{0} is bound to a literal in predicate position")]
    LiteralPredicate(String),
}

/// A triple pattern with every variable substituted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroundedTriple(TriplePattern);

impl GroundedTriple {
    pub fn subject(&self) -> &Term {
        &self.0.subject
    }

    pub fn predicate(&self) -> &Term {
        &self.0.predicate
    }

    pub fn object(&self) -> &Term {
        &self.0.object
    }

    pub fn terms(&self) -> [&Term; 3] {
        self.0.terms()
    }

    pub fn into_pattern(self) -> TriplePattern {
        self.0
    }
}

fn substitute(term: &Term, b: &Binding) -> Result<Term, GroundError> {
    match term {
        Term::Variable { value } => b
            .get(value)
            .cloned()
            .ok_or_else(|| GroundError::UnboundVariable(value.clone())),
        t => Ok(t.clone()),
    }
}

/// Substitutes `b`'s values into `q`'s patterns, keeping pattern order.
pub fn ground_patterns(q: &QueryCandidate, b: &Binding) -> Result<Vec<GroundedTriple>, GroundError> {
    q.patterns
        .iter()
        .map(|p| {
            let predicate = substitute(&p.predicate, b)?;
            if matches!(predicate, Term::Literal { .. }) {
                return Err(GroundError::LiteralPredicate(
                    p.predicate.value().to_string(),
                ));
            }
            Ok(GroundedTriple(TriplePattern {
                subject: substitute(&p.subject, b)?,
                predicate,
                object: substitute(&p.object, b)?,
            }))
        })
        .collect()
}
