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

//! Numerical laboratory for sub-static harmonic triples.

pub mod error;
pub mod field3d;
pub mod conformal;
pub mod geometry;
pub mod interp;
pub mod monotone;
pub mod quadrature;
pub mod radial;
pub mod selftest;
pub mod tolerances;

pub use error::{Error, Result};

/// Guide chapters, compiled as doctests so their examples stay current.
#[cfg(doctest)]
pub mod guide {
    #[doc = include_str!("../../../README.md")]
    pub struct Readme;
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/radial.md")]
    pub struct Radial;
    #[doc = include_str!("../../../book/src/monotone.md")]
    pub struct Monotone;
    #[doc = include_str!("../../../book/src/conformal.md")]
    pub struct Conformal;
    #[doc = include_str!("../../../book/src/field3d.md")]
    pub struct Field3d;
    #[doc = include_str!("../../../book/src/cli.md")]
    pub struct Cli;
    #[doc = include_str!("../../../book/src/verdicts.md")]
    pub struct Verdicts;
}
