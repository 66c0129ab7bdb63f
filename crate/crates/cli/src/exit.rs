//! Process exit codes and the mapping from errors onto them.

use std::fmt;

use tae_core::TaeError;

pub const VERIFY_FAILED: u8 = 1;
pub const INPUT_ERROR: u8 = 2;
pub const DIVERGED: u8 = 3;
pub const UNSUPPORTED: u8 = 4;

/// An error that carries its own exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

fn code_for_core(err: &TaeError) -> u8 {
    match err {
        TaeError::NumericalDivergence { .. }
        | TaeError::EmptyCluster { .. }
        | TaeError::RankDeficient { .. } => DIVERGED,
        _ => INPUT_ERROR,
    }
}

/// First explicit code found along the error chain; anything unclassified
/// (I/O, parsing) is an input error.
pub fn code_for(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(f) = cause.downcast_ref::<Failure>() {
            return f.code;
        }
        if let Some(e) = cause.downcast_ref::<TaeError>() {
            return code_for_core(e);
        }
    }
    INPUT_ERROR
}

#[cfg(test)]
mod tests {
    use super::*;
    use anyhow::Context;

    #[test]
    fn codes_follow_the_chain() {
        let diverged: anyhow::Result<()> = Err(TaeError::NumericalDivergence { cluster: 1 }.into());
        assert_eq!(
            code_for(&diverged.context("training").unwrap_err()),
            DIVERGED
        );
        let bad = anyhow::Error::from(TaeError::MissingColumn("a".into()));
        assert_eq!(code_for(&bad), INPUT_ERROR);
        let unsupported = anyhow::Error::from(Failure::new(UNSUPPORTED, "no"));
        assert_eq!(code_for(&unsupported), UNSUPPORTED);
        assert_eq!(code_for(&anyhow::anyhow!("plain")), INPUT_ERROR);
    }
}
