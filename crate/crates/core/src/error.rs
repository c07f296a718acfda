// Copyright 2026 The capacitary Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate horizon: {0}")]
    DegenerateHorizon(String),

    #[error("point {value} outside the domain [{lo}, {hi}] of {what}")]
    OutOfDomain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("singular quadrature: {0}")]
    SingularQuadrature(String),

    #[error("requested accuracy {requested:e} not reached (estimate {achieved:e}) in {what}")]
    Accuracy {
        what: &'static str,
        requested: f64,
        achieved: f64,
    },

    #[error("{0} is undefined at the boundary (u = 0)")]
    BoundaryPoint(&'static str),

    #[error("{0} is undefined at a critical point of the potential")]
    CriticalPoint(&'static str),

    #[error("truncated domain: {0}")]
    Truncation(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("snapshot format: {0}")]
    Format(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
