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

//! The cylindrical conformal setting `g = (1−u²)^{2/(n−2)} g₀`,
//! `φ = log((1+u)/(1−u))`.
//!
//! Every quantity is obtained from `g₀`-data of the radial triple through
//! closed conversion formulas; nothing is differentiated numerically.
//! Frame components refer to the `g₀`-orthonormal frame (radial first).

use crate::error::{Error, Result};
use crate::geometry::radial_hessian;
use crate::monotone::{beta_threshold, finish_curve, CurveSample, MonotoneCurve, Parameterization};
use crate::quadrature::simpson;
use crate::radial::{Level, RadialTriple};
use crate::tolerances;

/// Smallest level of `φ` at which `1/sinh φ` quantities are evaluated.
pub const S_MIN: f64 = 1e-3;
/// Simpson panels used by the integral identities at default resolution.
pub const DEFAULT_PANELS: usize = 64;

/// Pointwise conformal data at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformalState {
    pub r: f64,
    pub u: f64,
    pub one_minus_u: f64,
    pub phi: f64,
    /// `|∇φ|_g`.
    pub grad_phi_norm: f64,
    /// `|∇²φ|²_g`.
    pub hess_phi_norm2: f64,
    /// `|∇|∇φ|_g|²_g`.
    pub grad_of_grad_norm2: f64,
    /// `∇²φ(∇φ, ∇φ)`.
    pub hess_phi_grad_grad: f64,
    /// `Ric_g(∇φ, ∇φ)`.
    pub ricci_grad_grad: f64,
    /// `Q(∇φ, ∇φ)`; absent at `u = 0` where `coth φ` is singular.
    pub q_phi_phi: Option<f64>,
    /// Mean curvature of `{φ = φ(r)}` in `g` with respect to `∇φ/|∇φ|`.
    pub mean_curv_g: f64,
    /// `|Du|` in `g₀`.
    pub du_norm: f64,
    /// `g`-area of the level sphere through `r`.
    pub area_g: f64,
    /// `dμ_g/dr` integrated over the sphere of radius `r`.
    pub volume_density: f64,
}

impl ConformalState {
    /// `|∇φ|²_g − 4|Du|²(1−u²)^{−2(n−1)/(n−2)}`, relative to `|∇φ|²_g`,
    /// evaluated from `|Du|` independently of `grad_phi_norm`.
    pub fn star_defect(&self, n: f64) -> f64 {
        let omu2 = self.one_minus_u * (1.0 + self.u);
        let rhs = 4.0 * self.du_norm * self.du_norm * omu2.powf(-2.0 * (n - 1.0) / (n - 2.0));
        let lhs = self.grad_phi_norm * self.grad_phi_norm;
        (lhs - rhs).abs() / lhs.max(rhs).max(f64::MIN_POSITIVE)
    }
}

/// `φ = log((1+u)/(1−u))` from `u` and `1 − u`.
pub fn phi_of(u: f64, one_minus_u: f64) -> f64 {
    2.0 * u.atanh().min(0.5 * ((1.0 + u) / one_minus_u).ln())
}

/// Evaluates the conformal state at radius `r`.
pub fn conformal_state(triple: &RadialTriple, r: f64) -> Result<ConformalState> {
    let (u, omu) = triple.potential(r)?;
    Ok(state_from(triple, r, u, omu))
}

fn state_from(triple: &RadialTriple, r: f64, u: f64, omu: f64) -> ConformalState {
    let n = triple.dimension().as_f64();
    let profile = triple.profile();
    let k = triple.flux_constant();
    let area_s = triple.dimension().sphere_area();
    let omu2 = omu * (1.0 + u);
    let a = 2.0 * u / omu2;
    let a_prime = 2.0 * (1.0 + u * u) / (omu2 * omu2);
    let du = triple.du_norm(r);
    let sqrt_f = profile.f(r).max(0.0).sqrt();
    let (h_rad, h_tan) = radial_hessian(profile, k, r);
    let curv = profile.curvature_unchecked(r);

    let phi = if omu > 0.5 { 2.0 * u.atanh() } else { ((1.0 + u) / omu).ln() };
    let grad = 2.0 * du * omu2.powf(-(n - 1.0) / (n - 2.0));
    // ∇²φ in the g-orthonormal frame is c·T.
    let c = 2.0 / omu2 * omu2.powf(-2.0 / (n - 2.0));
    let t_rad = h_rad + (n - 1.0) / (n - 2.0) * a * du * du;
    let t_tan = h_tan - a * du * du / (n - 2.0);
    let hess2 = c * c * (t_rad * t_rad + (n - 1.0) * t_tan * t_tan);
    let hess_nn = c * t_rad;
    let hess_grad_grad = grad * grad * hess_nn;
    // |∇φ|_g = G(r); |∇G|_g = (1−u²)^{−1/(n−2)} √f |G'|.
    let g_prime = grad * ((1.0 - n) / r + (n - 1.0) / (n - 2.0) * a * triple.du_dr(r));
    let grad_of_grad = omu2.powf(-1.0 / (n - 2.0)) * sqrt_f * g_prime.abs();
    // Ric_g(e,e) for the g₀-unit radial vector e under g = e^{2w}g₀,
    // w = log(1−u²)/(n−2).
    let ric_g0_frame = curv.ricci_radial + a * h_rad + (n - 1.0) / (n - 2.0) * a_prime * du * du;
    let ricci_grad_grad = grad * grad * omu2.powf(-2.0 / (n - 2.0)) * ric_g0_frame;
    let q = (u > 0.0).then(|| ricci_grad_grad - (1.0 + u * u) / (2.0 * u) * hess_grad_grad);
    let area_g = omu2.powf((n - 1.0) / (n - 2.0)) * area_s * r.powf(n - 1.0);
    let volume_density = omu2.powf(n / (n - 2.0)) * area_s * r.powf(n - 1.0) / sqrt_f;
    ConformalState {
        r,
        u,
        one_minus_u: omu,
        phi,
        grad_phi_norm: grad,
        hess_phi_norm2: hess2,
        grad_of_grad_norm2: grad_of_grad * grad_of_grad,
        hess_phi_grad_grad: hess_grad_grad,
        ricci_grad_grad,
        q_phi_phi: q,
        mean_curv_g: -hess_nn / grad,
        du_norm: du,
        area_g,
        volume_density,
    }
}

/// `|∇²φ|²_g` from the expansion in `|D²u|²`, `D²u(Du,Du)` and `|Du|⁴`.
pub fn hess_phi_norm2_expansion(triple: &RadialTriple, state: &ConformalState) -> f64 {
    let n = triple.dimension().as_f64();
    let (h_rad, h_tan) = radial_hessian(triple.profile(), triple.flux_constant(), state.r);
    let d2u2 = h_rad * h_rad + (n - 1.0) * h_tan * h_tan;
    let du = state.du_norm;
    let u = state.u;
    let omu2 = state.one_minus_u * (1.0 + u);
    4.0 * omu2.powf(-2.0 * n / (n - 2.0)) * d2u2
        + 16.0 * n / (n - 2.0) * u * omu2.powf(-(3.0 * n - 2.0) / (n - 2.0)) * h_rad * du * du
        + 16.0 * n * (n - 1.0) / ((n - 2.0) * (n - 2.0))
            * u
            * u
            * omu2.powf(-4.0 * (n - 1.0) / (n - 2.0))
            * du.powi(4)
}

/// Refined Kato margin `|∇²φ|² − (n/(n−1))|∇|∇φ||²`.
pub fn kato_check(n: usize, state: &ConformalState) -> Result<f64> {
    if !(state.grad_phi_norm > 0.0) {
        return Err(Error::CriticalPoint("refined Kato inequality"));
    }
    let n = n as f64;
    Ok(state.hess_phi_norm2 - n / (n - 1.0) * state.grad_of_grad_norm2)
}

/// `[(β−2)|∇|∇φ||² + |∇²φ|² + Q(∇φ,∇φ)]`.
fn bochner_bracket(beta: f64, state: &ConformalState, q: f64) -> f64 {
    (beta - 2.0) * state.grad_of_grad_norm2 + state.hess_phi_norm2 + q
}

/// `div_g Y_β = β|∇φ|^{β−2}[(β−2)|∇|∇φ||² + |∇²φ|² + Q(∇φ,∇φ)]/sinh φ`.
pub fn div_y_integrand(state: &ConformalState, beta: f64) -> Result<f64> {
    let q = state.q_phi_phi.ok_or(Error::BoundaryPoint("div Y"))?;
    if !(state.phi > 0.0) {
        return Err(Error::BoundaryPoint("div Y"));
    }
    if !(state.grad_phi_norm > 0.0) {
        return Err(Error::CriticalPoint("div Y"));
    }
    Ok(beta * state.grad_phi_norm.powf(beta - 2.0) * bochner_bracket(beta, state, q) / state.phi.sinh())
}

fn state_at_s(triple: &RadialTriple, s: f64) -> Result<ConformalState> {
    let level = Level::from_s(s)?;
    let r = triple.radius_at(level)?;
    Ok(state_from(triple, r, level.t, level.one_minus_t))
}

/// `Φ_β(s) = ∫_{φ=s} |∇φ|^{β+1}_g dσ_g`.
pub fn phi_beta(triple: &RadialTriple, beta: f64, s: f64) -> Result<f64> {
    if !(beta >= 0.0) {
        return Err(Error::InvalidParameter(format!("β must be ≥ 0, got {beta}")));
    }
    let st = state_at_s(triple, s)?;
    Ok(st.grad_phi_norm.powf(beta + 1.0) * st.area_g)
}

/// `Ψ_β(s) = ∫_{φ=s} |∇φ|^β_g H_g / sinh φ dσ_g`.
pub fn psi_beta(triple: &RadialTriple, beta: f64, s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::BoundaryPoint("Ψ_β"));
    }
    let st = state_at_s(triple, s)?;
    Ok(st.grad_phi_norm.powf(beta) * st.mean_curv_g * st.area_g / s.sinh())
}

/// `Φ'_β(s) = −β sinh(s) Ψ_β(s)`.
pub fn phi_beta_prime(triple: &RadialTriple, beta: f64, s: f64) -> Result<f64> {
    Ok(-beta * s.sinh() * psi_beta(triple, beta, s)?)
}

/// Centered difference of `Φ_β` with step `1e-4·min(s, 1)`.
pub fn phi_beta_fd(triple: &RadialTriple, beta: f64, s: f64) -> Result<f64> {
    let h = 1e-4 * s.min(1.0);
    Ok((phi_beta(triple, beta, s + h)? - phi_beta(triple, beta, s - h)?) / (2.0 * h))
}

/// `Φ_β` sampled on an `s` grid.
pub fn phi_curve(triple: &RadialTriple, beta: f64, ss: &[f64]) -> Result<MonotoneCurve> {
    let samples: Vec<CurveSample> = ss
        .iter()
        .map(|&s| {
            let value = phi_beta(triple, beta, s)?;
            let analytic = phi_beta_prime(triple, beta, s)?;
            let fd = phi_beta_fd(triple, beta, s)?;
            let tol = tolerances::PHI_PRIME_ABS.max(tolerances::PHI_PRIME_REL * value.abs());
            Ok(CurveSample {
                x: s,
                t: Level::from_s(s)?.t,
                value,
                analytic_derivative: analytic,
                fd_derivative: fd,
                derivative_mismatch: (analytic - fd).abs() > tol,
            })
        })
        .collect::<Result<_>>()?;
    let phi0 = phi_beta(triple, beta, 0.0)?;
    Ok(finish_curve(
        beta,
        Parameterization::S,
        samples,
        triple.label().to_string(),
        beta < beta_threshold(triple.dimension()),
        crate::monotone::verdict_tolerance(phi0),
    ))
}

/// `s` corresponding to `τ`.
pub fn s_of_tau(tau: f64) -> f64 {
    let (a, b) = ((tau + 1.0).sqrt(), (tau - 1.0).sqrt());
    ((a + b) / (a - b)).ln()
}

/// Boundary-versus-volume comparison of an integral identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityResidual {
    pub s_low: f64,
    pub s_high: f64,
    pub lhs_boundary: f64,
    pub rhs_volume: f64,
    pub residual: f64,
    pub relative_residual: f64,
    pub panels: usize,
}

impl IdentityResidual {
    fn new(s_low: f64, s_high: f64, lhs: f64, rhs: f64, panels: usize) -> Self {
        let residual = (lhs - rhs).abs();
        let scale = lhs.abs().max(rhs.abs()).max(tolerances::IDENTITY_SCALE_FLOOR);
        Self {
            s_low,
            s_high,
            lhs_boundary: lhs,
            rhs_volume: rhs,
            residual,
            relative_residual: residual / scale,
            panels,
        }
    }

    /// Residual at the roundoff level, where refinement cannot help.
    pub fn at_roundoff(&self) -> bool {
        self.residual
            <= tolerances::IDENTITY_ROUNDOFF * self.lhs_boundary.abs().max(self.rhs_volume.abs()).max(1.0)
    }
}

fn check_window(s_low: f64, s_high: f64) -> Result<()> {
    if !(s_low >= S_MIN && s_high > s_low) || !s_high.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "need {S_MIN} ≤ s_low < s_high, got [{s_low}, {s_high}]"
        )));
    }
    Ok(())
}

/// Integrates a state functional against `dμ_g` over `{s_low < φ < s_high}`
/// through the coarea factorization `dμ_g = dσ_g ds/|∇φ|_g`, with composite
/// Simpson in `s`.
fn volume_integral<F>(triple: &RadialTriple, s_low: f64, s_high: f64, panels: usize, f: F) -> Result<f64>
where
    F: Fn(&ConformalState) -> Result<f64>,
{
    let failure = std::cell::RefCell::new(None);
    let value = simpson(
        |x: f64| match state_at_s(triple, x.exp())
            .and_then(|st| Ok(f(&st)? * st.area_g / st.grad_phi_norm * st.phi))
        {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        s_low.ln(),
        s_high.ln(),
        panels,
    );
    match failure.into_inner() {
        Some(e) => Err(e),
        None if value.is_finite() => Ok(value),
        None => Err(Error::Accuracy { what: "identity volume integral", requested: 0.0, achieved: value }),
    }
}

/// `Ψ_β(s) − Ψ_β(S)` against `∫|∇φ|^{β−2}[(β−2)|∇|∇φ||² + |∇²φ|² + Q]/sinh φ dμ_g`.
pub fn integral_identity_residual(
    triple: &RadialTriple,
    beta: f64,
    s_low: f64,
    s_high: f64,
) -> Result<IdentityResidual> {
    integral_identity_residual_with(triple, beta, s_low, s_high, DEFAULT_PANELS)
}

pub fn integral_identity_residual_with(
    triple: &RadialTriple,
    beta: f64,
    s_low: f64,
    s_high: f64,
    panels: usize,
) -> Result<IdentityResidual> {
    check_window(s_low, s_high)?;
    if !(beta > beta_threshold(triple.dimension())) {
        return Err(Error::InvalidParameter(format!(
            "the identity needs β > (n−2)/(n−1), got {beta}"
        )));
    }
    let lhs = psi_beta(triple, beta, s_low)? - psi_beta(triple, beta, s_high)?;
    let rhs = volume_integral(triple, s_low, s_high, panels, |st| {
        let q = st.q_phi_phi.ok_or(Error::BoundaryPoint("Q"))?;
        Ok(st.grad_phi_norm.powf(beta - 2.0) * bochner_bracket(beta, st, q) / st.phi.sinh())
    })?;
    Ok(IdentityResidual::new(s_low, s_high, lhs, rhs, panels))
}

/// `Φ_β(S)/sinh S − Φ_β(s)/sinh s` against
/// `∫|∇φ|^{β−2}[β∇²φ(∇φ,∇φ) − coth φ |∇φ|⁴]/sinh φ dμ_g`.
pub fn x_identity_residual(
    triple: &RadialTriple,
    beta: f64,
    s_low: f64,
    s_high: f64,
    panels: usize,
) -> Result<IdentityResidual> {
    check_window(s_low, s_high)?;
    let lhs = phi_beta(triple, beta, s_high)? / s_high.sinh() - phi_beta(triple, beta, s_low)? / s_low.sinh();
    let rhs = volume_integral(triple, s_low, s_high, panels, |st| {
        let g = st.grad_phi_norm;
        let coth = 1.0 / st.phi.tanh();
        Ok(g.powf(beta - 2.0) * (beta * st.hess_phi_grad_grad - coth * g.powi(4)) / st.phi.sinh())
    })?;
    Ok(IdentityResidual::new(s_low, s_high, lhs, rhs, panels))
}

/// Samples of `Φ'_β(s)/sinh s = −βΨ_β(s)` and whether they are
/// nondecreasing within `tol`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotientReport {
    pub samples: Vec<(f64, f64)>,
    pub min_increment: f64,
    pub nondecreasing: bool,
}

pub fn monotone_quotient_check(triple: &RadialTriple, beta: f64, ss: &[f64]) -> Result<QuotientReport> {
    let samples: Vec<(f64, f64)> = ss
        .iter()
        .map(|&s| Ok((s, -beta * psi_beta(triple, beta, s)?)))
        .collect::<Result<_>>()?;
    let min_increment = samples.windows(2).map(|w| w[1].1 - w[0].1).fold(f64::INFINITY, f64::min);
    Ok(QuotientReport { samples, min_increment, nondecreasing: min_increment >= -tolerances::QUOTIENT })
}

/// Boundedness and far-field limits of the conformal cylinder.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderReport {
    pub sup_grad_phi: f64,
    pub sup_hess_phi: f64,
    pub sup_area_g: f64,
    /// `(2C)^{−1/(n−2)}(n−2)`.
    pub grad_limit_expected: f64,
    pub grad_at_far: f64,
    /// `(2C)^{(n−1)/(n−2)}|S^{n−1}|`.
    pub area_limit_expected: f64,
    pub area_at_far: f64,
    /// Observed `|∇²φ|²_g` at `r = 10³ r0`.
    pub hess2_at_far: f64,
    /// The value `(n−1)(15n−1)(n−2)²(2C)^{−4/(n−2)}` stated for the limit of
    /// `|∇²φ|²_g`; recorded for comparison only.
    pub hess2_stated_limit: f64,
    /// The observed value is far from the stated limit.
    pub hess2_discrepancy: bool,
}

pub fn cylinder_limit_check(triple: &RadialTriple) -> Result<CylinderReport> {
    let n = triple.dimension().as_f64();
    let c = triple.capacity_value();
    let r0 = triple.r0();
    let radii = crate::geometry::log_grid(r0 * (1.0 + 1e-6), triple.r_max(), 200);
    let mut sup = (0.0f64, 0.0f64, 0.0f64);
    for &r in &radii {
        let st = conformal_state(triple, r)?;
        sup.0 = sup.0.max(st.grad_phi_norm);
        sup.1 = sup.1.max(st.hess_phi_norm2.sqrt());
        sup.2 = sup.2.max(st.area_g);
    }
    let far = conformal_state(triple, triple.r_max())?;
    let mid = conformal_state(triple, 1e3 * r0)?;
    let hess2_stated_limit = (n - 1.0) * (15.0 * n - 1.0) * (n - 2.0).powi(2) * (2.0 * c).powf(-4.0 / (n - 2.0));
    Ok(CylinderReport {
        sup_grad_phi: sup.0,
        sup_hess_phi: sup.1,
        sup_area_g: sup.2,
        grad_limit_expected: (2.0 * c).powf(-1.0 / (n - 2.0)) * (n - 2.0),
        grad_at_far: far.grad_phi_norm,
        area_limit_expected: (2.0 * c).powf((n - 1.0) / (n - 2.0)) * triple.dimension().sphere_area(),
        area_at_far: far.area_g,
        hess2_at_far: mid.hess_phi_norm2,
        hess2_stated_limit,
        hess2_discrepancy: (mid.hess_phi_norm2 - hess2_stated_limit).abs() > 0.5 * hess2_stated_limit,
    })
}
