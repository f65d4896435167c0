// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised by the core model.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter violates its type invariant. The string names the field.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },
    /// Gaussian sampling kept producing non-physical (non-positive) values.
    #[error("process-variation sampling of `{0}` rejected 100 draws in a row")]
    PathologicalSigma(&'static str),
    /// Bisection could not bracket the requested switching probability.
    #[error("target switching probability {target} unreachable within current bounds")]
    Unreachable { target: f64 },
    /// p1 = p2 = 0: every state is absorbing.
    #[error("absorbing chain: p1 + p2 must be positive")]
    AbsorbingChain,
    /// A bit source ran dry before an instruction could complete.
    #[error("bit source exhausted")]
    SourceExhausted,
    #[error("invalid range: lo must be strictly below hi")]
    InvalidRange,
    #[error("requested zero bits")]
    EmptyStream,
}

pub(crate) fn check(cond: bool, name: &'static str, reason: &'static str) -> crate::Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, reason })
    }
}
