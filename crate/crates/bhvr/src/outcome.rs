//! Terminal results of behavior executions.
//!
//! There is no `Running` variant: liveness is observable only as "has not
//! yet returned". A cancelled execution yields no outcome at all.

use serde::{Deserialize, Serialize};

use crate::Ticks;

/// What a single execution of a behavior produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome<T> {
    Success(T),
    Failure(BehaviorError),
}

impl<T> Outcome<T> {
    pub fn is_success(&self) -> bool {
        matches!(self, Outcome::Success(_))
    }

    pub fn is_failure(&self) -> bool {
        matches!(self, Outcome::Failure(_))
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Outcome<U> {
        match self {
            Outcome::Success(v) => Outcome::Success(f(v)),
            Outcome::Failure(e) => Outcome::Failure(e),
        }
    }

    /// The success value, if any.
    pub fn value(self) -> Option<T> {
        match self {
            Outcome::Success(v) => Some(v),
            Outcome::Failure(_) => None,
        }
    }

    pub fn error(&self) -> Option<&BehaviorError> {
        match self {
            Outcome::Success(_) => None,
            Outcome::Failure(e) => Some(e),
        }
    }

    #[track_caller]
    pub fn unwrap_success(self) -> T {
        match self {
            Outcome::Success(v) => v,
            Outcome::Failure(e) => panic!("expected Success, got Failure: {e}"),
        }
    }

    #[track_caller]
    pub fn unwrap_failure(self) -> BehaviorError {
        match self {
            Outcome::Success(_) => panic!("expected Failure, got Success"),
            Outcome::Failure(e) => e,
        }
    }
}

/// Failure classes carried by [`BehaviorError`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ErrorKind {
    /// An action body reported failure.
    ActionFailed,
    /// A sensing behavior (a test, or a sensor it relies on) failed.
    /// Distinct from a condition successfully returning `false`.
    ConditionFailed,
    /// A bounded retry or alternative list ran out of options.
    Exhausted,
    /// An actuating behavior was executed in a test position.
    ActuationInTestPosition,
}

/// Structured failure value. Errors compose by propagation, never by
/// merging: every `Failure` outcome carries exactly one of these.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[error("{kind:?} in `{source_node}` at t={time}: {message}")]
pub struct BehaviorError {
    pub kind: ErrorKind,
    /// Name of the action or node that raised the failure.
    #[serde(rename = "source")]
    pub source_node: String,
    pub message: String,
    /// Virtual time at which the failure was raised.
    pub time: Ticks,
}

impl BehaviorError {
    pub fn new(
        kind: ErrorKind,
        source_node: impl Into<String>,
        message: impl Into<String>,
        time: Ticks,
    ) -> Self {
        BehaviorError {
            kind,
            source_node: source_node.into(),
            message: message.into(),
            time,
        }
    }
}
