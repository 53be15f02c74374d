use thiserror::Error;

use crate::intervals::PartialTwoStage;

/// Errors raised by estimators, resampling and interval procedures.
#[derive(Debug, Error)]
pub enum VwaError {
    /// An argument violates a precondition (empty data, non-finite value, bad index, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Every kernel weight is zero, so the weighted average is undefined.
    /// `deleted` names the removed neighbor for leave-one-out computations.
    #[error("degenerate neighborhood at current value {current} (deleted index: {deleted:?})")]
    DegenerateNeighborhood { current: f64, deleted: Option<usize> },

    /// The variance scale needed for studentization is zero.
    #[error("degenerate scale: {0}")]
    DegenerateScale(String),

    /// Too few resampling replications had a positive weight sum.
    #[error("resampling degeneracy: {valid} valid replications, {dropped} dropped")]
    ResamplingDegeneracy { valid: usize, dropped: usize },

    /// The sample source ran dry before the two-stage procedure had enough neighbors.
    #[error("insufficient data: needed {} neighbors, source supplied {}", .partial.required_neighbors, .partial.drawn)]
    InsufficientData { partial: Box<PartialTwoStage> },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl VwaError {
    /// Degeneracies that a simulation counts as dropped runs.
    pub fn is_degeneracy(&self) -> bool {
        matches!(
            self,
            VwaError::DegenerateNeighborhood { .. }
                | VwaError::DegenerateScale(_)
                | VwaError::ResamplingDegeneracy { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, VwaError>;

pub(crate) fn domain(msg: impl Into<String>) -> VwaError {
    VwaError::Domain(msg.into())
}
