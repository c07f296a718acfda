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

//! Tolerances shared by the verification routines, the self-test and the
//! acceptance suite. Every threshold a verdict is judged against lives here.

/// Default relative tolerance for the radial quadratures.
pub const QUADRATURE: f64 = 1e-13;

/// Sub-static eigenvalue margin, scaled by `1 + |u Ric|`.
pub const SUBSTATIC: f64 = 1e-9;

/// Scalar flatness of the spatial Schwarzschild metric.
pub const SCALAR_FLAT: f64 = 1e-10;

/// Trace identity `R = Ric_rr + (n-1) Ric_tt`.
pub const TRACE_IDENTITY: f64 = 1e-12;

/// Asymptotic flatness, `|f(1e6 r0) - 1|`.
pub const ASYMPTOTIC_FLATNESS: f64 = 1e-3;

/// Schwarzschild potential against the closed form.
pub const SCHWARZSCHILD_POTENTIAL: f64 = 1e-8;

/// Pairwise relative spread of the three capacity estimates.
pub const CAPACITY_SPREAD: f64 = 1e-4;

/// Capacity against the Schwarzschild mass.
pub const CAPACITY_MASS: f64 = 1e-6;

/// Relative constancy of `F_beta` on Schwarzschild.
pub const F_CONSTANCY: f64 = 1e-6;

/// `F_beta(1)` against the closed boundary value.
pub const F_AT_ONE: f64 = 1e-8;

/// Analytic first derivative against the centered difference:
/// `max(abs, rel * |F|)`.
pub const DERIVATIVE_ABS: f64 = 1e-6;
pub const DERIVATIVE_REL: f64 = 1e-4;

/// Analytic second derivative against the second centered difference.
pub const SECOND_DERIVATIVE_ABS: f64 = 1e-5;
pub const SECOND_DERIVATIVE_REL: f64 = 1e-3;

/// Monotonicity: finite-difference derivative must stay below this.
pub const MONOTONE: f64 = 1e-6;

/// Convexity: consecutive secant slopes may decrease by at most this.
pub const CONVEX: f64 = 1e-6;

/// Relation between `F_beta` and `Phi_beta`.
pub const F_PHI_RELATION: f64 = 1e-10;

/// Penrose margin sign and equality.
pub const PENROSE: f64 = 1e-8;

/// Penrose margin for the flat exterior (strict case).
pub const PENROSE_FLAT: f64 = 1e-6;

/// Pointwise conformal identities (gradient norm relation).
pub const CONFORMAL_POINTWISE: f64 = 1e-10;

/// `|grad phi|_g = 0.5` on Schwarzschild `n = 3, m = 1`.
pub const CYLINDER_GRADIENT: f64 = 1e-8;

/// `|hess phi|^2_g` on the exact cylinder.
pub const CYLINDER_HESSIAN: f64 = 1e-9;

/// Refined Kato margin floor.
pub const KATO: f64 = 1e-10;

/// Gradient floor below which the Kato check is not evaluated.
pub const KATO_GRADIENT_FLOOR: f64 = 1e-8;

/// Floor of the `div Y` integrand on sub-static inputs.
pub const DIV_Y: f64 = 1e-9;

/// Relative residual of the integral identities at default resolution.
pub const IDENTITY: f64 = 1e-5;

/// Denominator floor in relative residuals.
pub const IDENTITY_SCALE_FLOOR: f64 = 1e-9;

/// Residuals below this are treated as converged in refinement studies.
pub const IDENTITY_ROUNDOFF: f64 = 1e-10;

/// `Phi'` representation: `max(abs, rel * |Phi|)`.
pub const PHI_PRIME_ABS: f64 = 1e-6;
pub const PHI_PRIME_REL: f64 = 1e-3;

/// Monotone quotient `Phi'(s) / sinh(s)` may decrease by at most this.
pub const QUOTIENT: f64 = 1e-8;

/// Grid capacity against the mass (single center, 96^3).
pub const FIELD_CAPACITY: f64 = 0.02;

/// Grid `F_beta` constancy across levels.
pub const FIELD_F_CONSTANCY: f64 = 0.03;

/// Mesh against coarea estimator.
pub const FIELD_ESTIMATORS: f64 = 0.02;

/// Flux conservation for the surface integral of `|Du|`.
pub const FIELD_FLUX: f64 = 0.02;

/// ADM mass from the flux integral.
pub const ADM_FLUX: f64 = 0.02;

/// ADM mass for two centers at the largest radius.
pub const ADM_TWO_CENTER: f64 = 0.03;
