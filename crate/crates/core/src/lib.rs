//! Answer validation for knowledge-graph question answering.
//!
//! Query candidates from a KGQA system are executed against a knowledge
//! graph, verbalized into text, scored by a (question, answer) pair
//! classifier and filtered; ranked-retrieval metrics compare the lists
//! before and after filtering.

pub mod classifier;
pub mod dataset;
pub mod kg;
pub mod pipeline;
pub mod qa;
pub mod sparql;
pub mod synthetic;
pub mod verbalize;

pub use classifier::{BaselineModel, ClassificationReport, ClassifierError, PairScore, Scorer};
pub use dataset::{DatasetError, LabeledQaPair, PairLabel, VanillaRecord};
pub use kg::{KgError, MockGraph, QueryBackend, ResultSet};
pub use pipeline::{PipelineError, QualityReport, RankedAnswerList, RelevanceJudgment};
pub use qa::{CandidateList, KgqaBackend, QaError};
pub use sparql::{parse_query, Binding, ParseError, QueryCandidate, Term, TriplePattern};
pub use verbalize::{AnswerText, VerbalizationMode};
