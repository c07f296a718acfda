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

//! Monotone level-set quantities `F_β`, their derivatives and the
//! capacitary Penrose inequality.
//!
//! With `τ = (1+t²)/(1−t²)` and `t` a value of the potential,
//! `F_β(τ) = (1+τ)^{β(n−1)/(n−2)} ∫_{u=t} |Du|^{β+1} dσ`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Dimension;
use crate::radial::{Level, RadialTriple};
use crate::tolerances;

/// Independent variable of a sampled curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parameterization {
    Tau,
    S,
}

/// One row of a [`MonotoneCurve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSample {
    /// `τ` or `s`.
    pub x: f64,
    /// Level of the potential.
    pub t: f64,
    pub value: f64,
    pub analytic_derivative: f64,
    pub fd_derivative: f64,
    /// Analytic and finite-difference derivatives disagree beyond tolerance.
    pub derivative_mismatch: bool,
}

/// Sampled curve with its verdicts.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCurve {
    pub beta: f64,
    pub parameterization: Parameterization,
    pub samples: Vec<CurveSample>,
    pub label: String,
    pub resolution: usize,
    /// `β` lies below `(n−2)/(n−1)`, where no monotonicity is asserted.
    pub no_theorem: bool,
    pub verdict_tol: f64,
    /// Every finite-difference derivative is at most `verdict_tol`.
    pub nonincreasing: bool,
    /// Consecutive secant slopes are nondecreasing within `verdict_tol`.
    pub convex: bool,
}

impl MonotoneCurve {
    pub fn max_fd_derivative(&self) -> f64 {
        self.samples.iter().map(|s| s.fd_derivative).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smallest increment between consecutive secant slopes.
    pub fn min_slope_increment(&self) -> f64 {
        secant_increments(&self.samples).fold(f64::INFINITY, f64::min)
    }
}

fn secant_increments(samples: &[CurveSample]) -> impl Iterator<Item = f64> + '_ {
    let slopes: Vec<f64> = samples
        .windows(2)
        .map(|w| (w[1].value - w[0].value) / (w[1].x - w[0].x))
        .collect();
    (1..slopes.len()).map(move |i| slopes[i] - slopes[i - 1])
}

/// Threshold `(n−2)/(n−1)` of the monotonicity theorem.
pub fn beta_threshold(n: Dimension) -> f64 {
    let n = n.as_f64();
    (n - 2.0) / (n - 1.0)
}

fn exponent(n: f64, beta: f64) -> f64 {
    beta * (n - 1.0) / (n - 2.0)
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("β must be ≥ 0, got {beta}")));
    }
    Ok(())
}

/// Radial data on the level `{u = t(τ)}`.
struct LevelData {
    n: f64,
    r: f64,
    level: Level,
    du: f64,
    area: f64,
    /// `H − ((n−1)/(n−2))·2u|Du|/(1−u²)`.
    bracket: f64,
}

fn level_data(triple: &RadialTriple, level: Level) -> Result<LevelData> {
    let n = triple.dimension().as_f64();
    let r = triple.radius_at(level)?;
    let du = triple.du_norm(r);
    let area = triple.dimension().sphere_area() * r.powf(n - 1.0);
    let h = (n - 1.0) * triple.profile().f(r).max(0.0).sqrt() / r;
    let bracket = h - (n - 1.0) / (n - 2.0) * 2.0 * level.t / level.one_minus_t2() * du;
    Ok(LevelData { n, r, level, du, area, bracket })
}

/// `F_β(τ)`.
pub fn f_beta(triple: &RadialTriple, beta: f64, tau: f64) -> Result<f64> {
    check_beta(beta)?;
    let level = Level::from_tau(tau)?;
    let d = level_data(triple, level)?;
    Ok((1.0 + tau).powf(exponent(d.n, beta)) * d.du.powf(beta + 1.0) * d.area)
}

/// `F_β(1) = 2^{β(n−1)/(n−2)}(n−2)^{β+1}C^{β+1}|S|^{β+1}/|∂M|^β`.
pub fn f_beta_at_one_closed_form(triple: &RadialTriple, beta: f64) -> f64 {
    let dim = triple.dimension();
    let n = dim.as_f64();
    let s = dim.sphere_area();
    let c = triple.capacity_value();
    let boundary = s * triple.r0().powf(n - 1.0);
    2f64.powf(exponent(n, beta)) * (n - 2.0).powf(beta + 1.0) * c.powf(beta + 1.0) * s.powf(beta + 1.0)
        / boundary.powf(beta)
}

/// `F'_β(τ)` from the first-variation formula.
pub fn f_beta_prime(triple: &RadialTriple, beta: f64, tau: f64) -> Result<f64> {
    check_beta(beta)?;
    if !(tau > 1.0) {
        return Err(Error::InvalidParameter(format!("F' needs τ > 1, got {tau}")));
    }
    let d = level_data(triple, Level::from_tau(tau)?)?;
    Ok(-beta * (tau + 1.0).powf(exponent(d.n, beta) - 1.5) / (tau - 1.0).sqrt()
        * d.du.powf(beta)
        * d.bracket
        * d.area)
}

/// `F''_β(τ)`. On spheres `D^T|Du| = 0` and `|h|² = H²/(n−1)`, so only the
/// bracket and sub-static terms survive.
pub fn f_beta_second(triple: &RadialTriple, beta: f64, tau: f64) -> Result<f64> {
    check_beta(beta)?;
    if !(tau > 1.0) {
        return Err(Error::InvalidParameter(format!("F'' needs τ > 1, got {tau}")));
    }
    let d = level_data(triple, Level::from_tau(tau)?)?;
    let c = triple.profile().curvature_unchecked(d.r);
    let (hess_rad, _) = crate::geometry::radial_hessian(triple.profile(), triple.flux_constant(), d.r);
    let substatic = c.ricci_radial - hess_rad / d.level.t;
    let weight = d.du.powf(beta - 1.0) * d.area;
    let threshold = (d.n - 2.0) / (d.n - 1.0);
    Ok(beta * (tau + 1.0).powf(exponent(d.n, beta) - 3.0) / (tau - 1.0)
        * ((beta - threshold) * weight * d.bracket * d.bracket + weight * substatic))
}

/// Step of the centered first difference at `τ`: `1e-4`, shrunk to
/// `1e-3(τ−1)` near the boundary so the stencil stays inside `τ > 1`
/// without amplifying roundoff in `F`.
pub fn fd_step_first(tau: f64) -> f64 {
    (1e-3 * (tau - 1.0)).min(1e-4)
}

/// Step of the centered second difference at `τ`.
pub fn fd_step_second(tau: f64) -> f64 {
    1e-2 * (tau - 1.0).min(1.0)
}

pub fn f_beta_fd_first(triple: &RadialTriple, beta: f64, tau: f64) -> Result<f64> {
    let h = fd_step_first(tau);
    Ok((f_beta(triple, beta, tau + h)? - f_beta(triple, beta, tau - h)?) / (2.0 * h))
}

pub fn f_beta_fd_second(triple: &RadialTriple, beta: f64, tau: f64) -> Result<f64> {
    let h = fd_step_second(tau);
    let (a, b, c) = (
        f_beta(triple, beta, tau - h)?,
        f_beta(triple, beta, tau)?,
        f_beta(triple, beta, tau + h)?,
    );
    Ok((a - 2.0 * b + c) / (h * h))
}

/// Geometric grid on `τ − 1 ∈ [1e-3, 1e3]` with 200 points.
pub fn default_tau_grid() -> Vec<f64> {
    tau_grid(1e-3, 1e3, 200)
}

/// Geometric grid on `τ − 1 ∈ [lo, hi]`.
pub fn tau_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    crate::geometry::log_grid(lo, hi, count).into_iter().map(|x| 1.0 + x).collect()
}

/// Samples `F_β` with both derivative columns and issues verdicts.
pub fn monotone_curve(triple: &RadialTriple, beta: f64, taus: &[f64]) -> Result<MonotoneCurve> {
    check_beta(beta)?;
    let samples: Vec<CurveSample> = taus
        .par_iter()
        .map(|&tau| {
            let value = f_beta(triple, beta, tau)?;
            let analytic = f_beta_prime(triple, beta, tau)?;
            let fd = f_beta_fd_first(triple, beta, tau)?;
            let tol = tolerances::DERIVATIVE_ABS.max(tolerances::DERIVATIVE_REL * value.abs());
            Ok(CurveSample {
                x: tau,
                t: Level::from_tau(tau)?.t,
                value,
                analytic_derivative: analytic,
                fd_derivative: fd,
                derivative_mismatch: (analytic - fd).abs() > tol,
            })
        })
        .collect::<Result<_>>()?;
    let f1 = f_beta(triple, beta, 1.0)?;
    Ok(finish_curve(
        beta,
        Parameterization::Tau,
        samples,
        triple.label().to_string(),
        beta < beta_threshold(triple.dimension()),
        verdict_tolerance(f1),
    ))
}

/// `max(10·tol_q·|F(1)|, 1e-6)`: the finite-difference column carries
/// noise well above the quadrature tolerance, so the verdict never drops
/// below the criterion floor.
pub fn verdict_tolerance(f_at_one: f64) -> f64 {
    (10.0 * tolerances::QUADRATURE * f_at_one.abs()).max(tolerances::MONOTONE)
}

pub(crate) fn finish_curve(
    beta: f64,
    parameterization: Parameterization,
    samples: Vec<CurveSample>,
    label: String,
    no_theorem: bool,
    verdict_tol: f64,
) -> MonotoneCurve {
    let nonincreasing = samples.iter().all(|s| s.fd_derivative <= verdict_tol);
    let convex = secant_increments(&samples).all(|d| d >= -verdict_tol);
    MonotoneCurve {
        beta,
        parameterization,
        resolution: samples.len(),
        samples,
        label,
        no_theorem,
        verdict_tol,
        nonincreasing,
        convex,
    }
}

/// Limit of `F_β` as `τ → ∞` and its numerical counterpart at `τ = 10³`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitReport {
    pub closed_form: f64,
    pub numeric: f64,
    pub rel_diff: f64,
    /// Disagreement above one percent.
    pub flagged: bool,
}

/// `lim F_β = (n−2)^{β+1} C^{1−β/(n−2)} |S^{n−1}|`.
pub fn limit_f(triple: &RadialTriple, beta: f64) -> Result<LimitReport> {
    check_beta(beta)?;
    let dim = triple.dimension();
    let n = dim.as_f64();
    let c = triple.capacity_value();
    let closed_form = (n - 2.0).powf(beta + 1.0) * c.powf(1.0 - beta / (n - 2.0)) * dim.sphere_area();
    let numeric = f_beta(triple, beta, 1e3)?;
    let rel_diff = (numeric - closed_form).abs() / closed_form.abs();
    if rel_diff > 0.05 {
        return Err(Error::Truncation(format!(
            "F_β(10³) differs from its limit by {:.2}%",
            100.0 * rel_diff
        )));
    }
    Ok(LimitReport { closed_form, numeric, rel_diff, flagged: rel_diff > 0.01 })
}

/// Capacitary Penrose inequality `C ≥ ½(|∂M|/|S^{n−1}|)^{(n−2)/(n−1)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenroseReport {
    pub capacity: f64,
    pub boundary_area: f64,
    pub rhs: f64,
    pub margin: f64,
    pub tol: f64,
    pub equality: bool,
}

/// Evaluates the inequality for a connected boundary.
pub fn penrose_check(
    n: Dimension,
    capacity: f64,
    boundary_area: f64,
    boundary_components: usize,
    tol: f64,
) -> Result<PenroseReport> {
    if boundary_components != 1 {
        return Err(Error::Unsupported(format!(
            "boundary has {boundary_components} components; the inequality needs a connected boundary"
        )));
    }
    if !(boundary_area > 0.0) {
        return Err(Error::InvalidParameter(format!("boundary area must be positive, got {boundary_area}")));
    }
    let nf = n.as_f64();
    let rhs = 0.5 * (boundary_area / n.sphere_area()).powf((nf - 2.0) / (nf - 1.0));
    let margin = capacity - rhs;
    Ok(PenroseReport { capacity, boundary_area, rhs, margin, tol, equality: margin.abs() < tol })
}

/// Penrose report of a radial triple, whose boundary is the sphere `r = r0`.
pub fn penrose_radial(triple: &RadialTriple) -> Result<PenroseReport> {
    let dim = triple.dimension();
    let area = dim.sphere_area() * triple.r0().powf(dim.as_f64() - 1.0);
    penrose_check(dim, triple.capacity()?.agreed_value, area, 1, tolerances::PENROSE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{flat_profile, reissner_nordstrom_profile, schwarzschild_profile};
    use crate::radial::solve_default;
    use std::f64::consts::PI;

    fn dim(n: usize) -> Dimension {
        Dimension::new(n).unwrap()
    }

    fn schwarzschild(n: usize, m: f64) -> RadialTriple {
        solve_default(&schwarzschild_profile(dim(n), m).unwrap()).unwrap()
    }

    fn rn(q: f64) -> RadialTriple {
        solve_default(&reissner_nordstrom_profile(dim(3), 1.0, q).unwrap()).unwrap()
    }

    #[test]
    fn schwarzschild_f_is_constant() {
        let t = schwarzschild(3, 1.0);
        for tau in [1.0, 1.5, 3.0, 10.0, 50.0] {
            assert!((f_beta(&t, 1.0, tau).unwrap() - 4.0 * PI).abs() < 1e-10);
        }
    }

    #[test]
    fn f_at_one_matches_closed_form() {
        for t in [schwarzschild(4, 0.7), rn(0.3), rn(0.5)] {
            for beta in [0.5, 1.0, 2.5] {
                let v = f_beta(&t, beta, 1.0).unwrap();
                let c = f_beta_at_one_closed_form(&t, beta);
                assert!((v - c).abs() < tolerances::F_AT_ONE * c);
            }
        }
    }

    #[test]
    fn beta_zero_is_flux() {
        let t = rn(0.3);
        let flux = t.flux_constant() * 4.0 * PI;
        for tau in [1.0, 2.0, 100.0] {
            assert!((f_beta(&t, 0.0, tau).unwrap() - flux).abs() < 1e-12 * flux);
        }
        assert_eq!(f_beta_prime(&t, 0.0, 2.0).unwrap(), 0.0);
        assert_eq!(f_beta_second(&t, 0.0, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn schwarzschild_derivatives_vanish() {
        let t = schwarzschild(3, 1.0);
        assert!(f_beta_prime(&t, 1.0, 3.0).unwrap().abs() < 1e-8);
        assert!(f_beta_second(&t, 1.0, 3.0).unwrap().abs() < 1e-7);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for t in [rn(0.3), rn(0.5), schwarzschild(4, 1.0)] {
            for beta in [0.5, 1.0, 2.0] {
                for tau in [1.001, 1.1, 2.0, 10.0, 500.0] {
                    let f = f_beta(&t, beta, tau).unwrap();
                    let a1 = f_beta_prime(&t, beta, tau).unwrap();
                    let d1 = f_beta_fd_first(&t, beta, tau).unwrap();
                    let tol1 = tolerances::DERIVATIVE_ABS.max(tolerances::DERIVATIVE_REL * f.abs());
                    assert!((a1 - d1).abs() < tol1, "{} β={beta} τ={tau}: {a1} vs {d1}", t.label());
                    let a2 = f_beta_second(&t, beta, tau).unwrap();
                    let d2 = f_beta_fd_second(&t, beta, tau).unwrap();
                    let tol2 = tolerances::SECOND_DERIVATIVE_ABS.max(tolerances::SECOND_DERIVATIVE_REL * f.abs());
                    assert!((a2 - d2).abs() < tol2, "{} β={beta} τ={tau}: {a2} vs {d2}", t.label());
                }
            }
        }
    }

    #[test]
    fn derivatives_reject_tau_one() {
        let t = schwarzschild(3, 1.0);
        assert!(f_beta_prime(&t, 1.0, 1.0).is_err());
        assert!(f_beta(&t, 1.0, 0.9).is_err());
    }

    #[test]
    fn threshold_curve_is_flat_and_flagged_below() {
        let t = schwarzschild(3, 1.0);
        let c = monotone_curve(&t, 0.5, &tau_grid(1e-3, 1e3, 40)).unwrap();
        assert!(c.nonincreasing && c.convex && !c.no_theorem);
        assert!(monotone_curve(&t, 0.4, &tau_grid(1e-2, 1e2, 5)).unwrap().no_theorem);
    }

    #[test]
    fn limits() {
        let t = schwarzschild(3, 1.0);
        let l = limit_f(&t, 1.0).unwrap();
        assert!((l.closed_form - 4.0 * PI).abs() < 1e-12);
        assert!(!l.flagged);
        let t4 = schwarzschild(4, 0.5);
        let l4 = limit_f(&t4, 2.0).unwrap();
        assert!((l4.closed_form - 8.0 * 2.0 * PI * PI).abs() < 1e-9);
        assert!(l4.rel_diff < 1e-8);
        let flat = solve_default(&flat_profile(dim(3), 1.0).unwrap()).unwrap();
        assert!(!limit_f(&flat, 1.0).unwrap().flagged);
    }

    #[test]
    fn penrose_examples() {
        let p = penrose_radial(&schwarzschild(3, 1.0)).unwrap();
        assert!((p.boundary_area - 16.0 * PI).abs() < 1e-12);
        assert!((p.rhs - 1.0).abs() < 1e-12);
        assert!(p.margin.abs() < tolerances::PENROSE && p.equality);
        let p5 = penrose_radial(&schwarzschild(5, 0.5)).unwrap();
        assert!((p5.rhs - 0.5).abs() < 1e-12 && p5.margin.abs() < tolerances::PENROSE);
        let flat = solve_default(&flat_profile(dim(3), 1.0).unwrap()).unwrap();
        let pf = penrose_radial(&flat).unwrap();
        assert!((pf.margin - 0.5).abs() < tolerances::PENROSE_FLAT);
        assert!(matches!(penrose_check(dim(3), 1.0, 1.0, 2, 1e-8), Err(Error::Unsupported(_))));
    }
}
