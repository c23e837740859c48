use thiserror::Error;

use crate::model::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the regime a routine supports.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("tier index {index} out of range for a {tiers}-tier network")]
    TierIndex { index: usize, tiers: usize },

    #[error("invalid network: {}", format_violations(.0))]
    InvalidNetwork(Vec<Violation>),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
