//! Top-level error type for the pipeline and the binary.

use std::path::PathBuf;

use thiserror::Error;

use crate::auxiliary::AuxError;
use crate::branch::BranchError;
use crate::ford::FordError;
use crate::group::GroupError;
use crate::pipeline::Stage;
use crate::spec_file::SpecError;
use crate::transfer::TransferError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Ford(#[from] FordError),
    #[error(transparent)]
    Aux(#[from] AuxError),
    #[error(transparent)]
    Branch(#[from] BranchError),
    #[error(transparent)]
    Transfer(#[from] TransferError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("stage {stage}: {source}")]
    Stage { stage: Stage, source: Box<Error> },
}

impl Error {
    pub fn in_stage(self, stage: Stage) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }
}
