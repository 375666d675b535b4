use kgav::classifier::ClassifierError;
use kgav::dataset::DatasetError;
use kgav::kg::KgError;
use kgav::pipeline::PipelineError;
use kgav::qa::QaError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("backend error: {0}")]
    Backend(String),
    #[error("data error: {0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Backend(_) => 3,
            CliError::Data(_) => 4,
        }
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        CliError::Data(format!("{}: {e}", path.display()))
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::InvalidConfig(_) => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<ClassifierError> for CliError {
    fn from(e: ClassifierError) -> Self {
        match e {
            ClassifierError::InvalidConfig(_) => CliError::Config(e.to_string()),
            ClassifierError::RemoteUnavailable(_) | ClassifierError::RemoteProtocolError(_) => {
                CliError::Backend(e.to_string())
            }
            ClassifierError::Dataset(d) => d.into(),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<KgError> for CliError {
    fn from(e: KgError) -> Self {
        CliError::Backend(e.to_string())
    }
}

impl From<QaError> for CliError {
    fn from(e: QaError) -> Self {
        CliError::Backend(e.to_string())
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::InvalidConfig(_) => CliError::Config(e.to_string()),
            PipelineError::Classifier(c) => c.into(),
            PipelineError::MismatchedQuestions(_) => CliError::Data(e.to_string()),
            _ => CliError::Backend(e.to_string()),
        }
    }
}
