use thiserror::Error;

/// Errors shared by every module.
///
/// `Input` means the caller handed us something malformed or outside an
/// operation's preconditions. `Stage` is a solver giving up at a named
/// pipeline stage; the tag is stable and surfaces in CLI messages.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),
    #[error("solver failure [{stage}]: {detail}")]
    Stage { stage: String, detail: String },
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn stage(stage: &str, detail: impl Into<String>) -> Self {
        Error::Stage { stage: stage.to_string(), detail: detail.into() }
    }

    pub fn is_input(&self) -> bool {
        matches!(self, Error::Input(_))
    }

    pub fn stage_tag(&self) -> Option<&str> {
        match self {
            Error::Stage { stage, .. } => Some(stage),
            Error::Input(_) => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
