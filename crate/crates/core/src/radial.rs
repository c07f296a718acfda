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

//! Harmonic potentials of rotationally symmetric triples.
//!
//! For `g₀ = f⁻¹dr² + r²g_S` the capacitary potential satisfies
//! `u' = K f^{−1/2} r^{1−n}` with `K = 1/I(∞)`, where
//! `I(r) = ∫_{r0}^{r} f^{−1/2} s^{1−n} ds`. The integral is taken in the
//! variable `w = √(s − r0)`, which removes the square-root singularity at a
//! horizon, and the part beyond `r_max` is taken in `x = 1/s`.

use crate::error::{Error, Result};
use crate::geometry::{BoundaryKind, CurvaturePoint, Dimension, WarpProfile};
use crate::interp::MonotoneCubic;
use crate::quadrature::integrate;
use crate::tolerances;

/// Default outer radius of the tabulated region, in units of `r0`.
pub const DEFAULT_R_MAX_FACTOR: f64 = 1e4;
/// Smallest admissible `r_max / r0`.
pub const MIN_R_MAX_FACTOR: f64 = 1e3;
const KNOTS: usize = 240;

/// A value `t ∈ [0, 1)` of the potential together with `1 − t`, each
/// computed without cancellation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    pub t: f64,
    pub one_minus_t: f64,
}

impl Level {
    pub fn from_t(t: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&t) {
            return Err(Error::OutOfDomain { what: "potential level", value: t, lo: 0.0, hi: 1.0 });
        }
        Ok(Self { t, one_minus_t: 1.0 - t })
    }

    /// `t = √((τ−1)/(τ+1))`.
    pub fn from_tau(tau: f64) -> Result<Self> {
        if !(tau >= 1.0) || !tau.is_finite() {
            return Err(Error::InvalidParameter(format!("τ must be ≥ 1, got {tau}")));
        }
        let t = ((tau - 1.0) / (tau + 1.0)).sqrt();
        Ok(Self { t, one_minus_t: (2.0 / (tau + 1.0)) / (1.0 + t) })
    }

    /// `t = tanh(s/2)`, the level `{φ = s}` of the conformal setting.
    pub fn from_s(s: f64) -> Result<Self> {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::InvalidParameter(format!("s must be ≥ 0, got {s}")));
        }
        let e = (-s).exp();
        Ok(Self { t: (0.5 * s).tanh(), one_minus_t: 2.0 * e / (1.0 + e) })
    }

    /// `τ = (1+t²)/(1−t²)`.
    pub fn tau(&self) -> f64 {
        (1.0 + self.t * self.t) / (self.one_minus_t * (1.0 + self.t))
    }

    /// `1 − t²`.
    pub fn one_minus_t2(&self) -> f64 {
        self.one_minus_t * (1.0 + self.t)
    }
}

/// Rotationally symmetric harmonic triple with its tabulated potential.
#[derive(Debug, Clone)]
pub struct RadialTriple {
    profile: WarpProfile,
    r_max: f64,
    w: Vec<f64>,
    /// `I` and `I(∞) − I` at the knots, each accumulated from its own end.
    cum_i: Vec<f64>,
    cum_j: Vec<f64>,
    i_inf: f64,
    flux_constant: f64,
    tail: f64,
    tail_analytic: f64,
    tail_correction_bound: f64,
    normalization_error: f64,
    u_table: MonotoneCubic,
}

/// Three estimates of the capacity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityEstimate {
    pub flux_at_boundary: f64,
    pub flux_at_infinity: f64,
    pub dirichlet_energy: f64,
    pub agreed_value: f64,
    pub max_rel_spread: f64,
    /// Spread above the consistency tolerance.
    pub inconsistent: bool,
}

/// Far-field residuals `|r^{n−2}(1−u) − C|` and `|r^{n−1}u'/(n−2) − C|`.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticReport {
    pub radii: Vec<f64>,
    pub value_residuals: Vec<f64>,
    pub derivative_residuals: Vec<f64>,
    pub max_value_residual: f64,
    pub max_derivative_residual: f64,
    /// Both residual sequences are nonincreasing along increasing radii.
    pub decaying: bool,
}

/// Solves `Δu = 0`, `u(r0) = 0`, `u → 1` for a warped profile.
pub fn solve_radial_potential(profile: &WarpProfile, r_max: f64, tol: f64) -> Result<RadialTriple> {
    let r0 = profile.r0();
    if !(r_max >= MIN_R_MAX_FACTOR * r0) || !r_max.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "r_max = {r_max} must be at least {MIN_R_MAX_FACTOR}·r0 = {}",
            MIN_R_MAX_FACTOR * r0
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    profile.validate(&[])?;
    if profile.boundary() == BoundaryKind::Horizon && !(profile.f_over_gap(r0) > 0.0) {
        return Err(Error::SingularQuadrature("horizon zero of f is not simple".into()));
    }
    let rel = 0.1 * tol;
    let w_max = (r_max - r0).sqrt();
    let mut w = Vec::with_capacity(KNOTS + 1);
    w.push(0.0);
    let w_min = 1e-7 * w_max;
    let ratio = (w_max / w_min).powf(1.0 / (KNOTS - 1) as f64);
    for i in 0..KNOTS {
        w.push(if i + 1 == KNOTS { w_max } else { w_min * ratio.powi(i as i32) });
    }
    let g = |x: f64| integrand_w(profile, x);
    let mut pieces = Vec::with_capacity(KNOTS);
    let mut err = 0.0;
    for k in 0..KNOTS {
        let p = integrate(g, w[k], w[k + 1], 0.0, rel)?;
        err += p.error;
        pieces.push(p.value);
    }
    let tail_q = integrate(|x| tail_integrand(profile, x), 0.0, 1.0 / r_max, 0.0, rel)?;
    err += tail_q.error;
    let tail = tail_q.value;
    let mut cum_i = vec![0.0; KNOTS + 1];
    for k in 0..KNOTS {
        cum_i[k + 1] = cum_i[k] + pieces[k];
    }
    let mut cum_j = vec![0.0; KNOTS + 1];
    cum_j[KNOTS] = tail;
    for k in (0..KNOTS).rev() {
        cum_j[k] = cum_j[k + 1] + pieces[k];
    }
    let i_inf = cum_j[0];
    let normalization_error = err / i_inf;
    if normalization_error > tol {
        return Err(Error::Accuracy {
            what: "potential normalization",
            requested: tol,
            achieved: normalization_error,
        });
    }
    let n = profile.dimension().as_f64();
    let k = 1.0 / i_inf;
    let tail_analytic = r_max.powf(2.0 - n) / (n - 2.0);
    let delta = profile.one_minus_f(r_max).abs();
    let tail_correction_bound = tail_analytic * ((1.0 - delta).max(f64::MIN_POSITIVE).powf(-0.5) - 1.0);
    let values: Vec<f64> = (0..=KNOTS)
        .map(|i| if cum_i[i] < cum_j[i] { cum_i[i] * k } else { 1.0 - cum_j[i] * k })
        .collect();
    let slopes: Vec<f64> = w.iter().map(|&x| k * g(x)).collect();
    let u_table = MonotoneCubic::new(w.clone(), values, Some(slopes))?;
    Ok(RadialTriple {
        profile: profile.clone(),
        r_max,
        w,
        cum_i,
        cum_j,
        i_inf,
        flux_constant: k,
        tail,
        tail_analytic,
        tail_correction_bound,
        normalization_error,
        u_table,
    })
}

/// Convenience constructor with the default outer radius and tolerance.
pub fn solve_default(profile: &WarpProfile) -> Result<RadialTriple> {
    solve_radial_potential(profile, DEFAULT_R_MAX_FACTOR * profile.r0(), tolerances::QUADRATURE)
}

/// `dI/dw` at `r = r0 + w²`.
fn integrand_w(p: &WarpProfile, w: f64) -> f64 {
    let r = p.r0() + w * w;
    let n = p.dimension().get() as i32;
    match p.boundary() {
        BoundaryKind::Horizon => 2.0 * r.powi(1 - n) / p.f_over_gap(r).sqrt(),
        BoundaryKind::Excised => 2.0 * w * r.powi(1 - n) / p.f(r).sqrt(),
    }
}

/// `dI/dx` at `r = 1/x`, oriented so that the tail is `∫_0^{1/r}`.
fn tail_integrand(p: &WarpProfile, x: f64) -> f64 {
    let n = p.dimension().get() as i32;
    if x == 0.0 {
        return if n == 3 { 1.0 } else { 0.0 };
    }
    x.powi(n - 3) / (1.0 - p.one_minus_f(1.0 / x)).sqrt()
}

impl RadialTriple {
    pub fn profile(&self) -> &WarpProfile {
        &self.profile
    }

    pub fn dimension(&self) -> Dimension {
        self.profile.dimension()
    }

    pub fn r0(&self) -> f64 {
        self.profile.r0()
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// `K` in `|Du| = K r^{1−n}`.
    pub fn flux_constant(&self) -> f64 {
        self.flux_constant
    }

    /// `K/(n−2)`.
    pub fn capacity_value(&self) -> f64 {
        self.flux_constant / (self.dimension().as_f64() - 2.0)
    }

    pub fn label(&self) -> &str {
        &self.profile.label
    }

    /// `I(∞) = 1/K`.
    pub fn total_integral(&self) -> f64 {
        self.i_inf
    }

    /// Exact tail `∫_{r_max}^∞ f^{−1/2} s^{1−n} ds`.
    pub fn tail(&self) -> f64 {
        self.tail
    }

    /// The flat-space tail `r_max^{2−n}/(n−2)` and a bound on its deviation
    /// from the exact tail derived from `sup |f − 1|` beyond `r_max`.
    pub fn tail_analytic(&self) -> (f64, f64) {
        (self.tail_analytic, self.tail_correction_bound)
    }

    /// Relative quadrature error estimate of `I(∞)`.
    pub fn normalization_error(&self) -> f64 {
        self.normalization_error
    }

    /// Monotone spline `w ↦ u` with `w = √(r − r0)`.
    pub fn u_table(&self) -> &MonotoneCubic {
        &self.u_table
    }

    /// Knot index `k` with `w[k] ≤ x ≤ w[k+1]`.
    fn segment(&self, x: f64) -> usize {
        self.w.partition_point(|&k| k <= x).clamp(1, self.w.len() - 1) - 1
    }

    fn g(&self, w: f64) -> f64 {
        integrand_w(&self.profile, w)
    }

    fn rel(&self) -> f64 {
        1e-14
    }

    /// `(I, I(∞) − I)` at `r0 + w²`, for `w` within the table.
    fn integrals_at_w(&self, w: f64) -> Result<(f64, f64)> {
        let k = self.segment(w);
        let g = |x| self.g(x);
        let left = integrate(g, self.w[k], w, 0.0, self.rel())?.value;
        let right = integrate(g, w, self.w[k + 1], 0.0, self.rel())?.value;
        Ok((self.cum_i[k] + left, self.cum_j[k + 1] + right))
    }

    fn tail_at(&self, x: f64) -> Result<f64> {
        Ok(integrate(|y| tail_integrand(&self.profile, y), 0.0, x, 0.0, self.rel())?.value)
    }

    /// `(u, 1 − u)` at radius `r ≥ r0`.
    pub fn potential(&self, r: f64) -> Result<(f64, f64)> {
        let r0 = self.r0();
        if !(r >= r0) || r.is_nan() {
            return Err(Error::OutOfDomain { what: "radius", value: r, lo: r0, hi: f64::INFINITY });
        }
        if r.is_infinite() {
            return Ok((1.0, 0.0));
        }
        let k = self.flux_constant;
        if r <= self.r_max {
            let (i, j) = self.integrals_at_w((r - r0).sqrt().min(*self.w.last().unwrap()))?;
            Ok(if i < j { (i * k, 1.0 - i * k) } else { (1.0 - j * k, j * k) })
        } else {
            let j = self.tail_at(1.0 / r)?;
            Ok((1.0 - j * k, j * k))
        }
    }

    pub fn u(&self, r: f64) -> Result<f64> {
        Ok(self.potential(r)?.0)
    }

    pub fn one_minus_u(&self, r: f64) -> Result<f64> {
        Ok(self.potential(r)?.1)
    }

    /// `|Du| = K r^{1−n}`.
    pub fn du_norm(&self, r: f64) -> f64 {
        self.flux_constant * r.powf(1.0 - self.dimension().as_f64())
    }

    /// `du/dr = K f^{−1/2} r^{1−n}`.
    pub fn du_dr(&self, r: f64) -> f64 {
        self.du_norm(r) / self.profile.f(r).sqrt()
    }

    /// Curvature at `r` together with the Hessian of the potential.
    pub fn curvature_point(&self, r: f64) -> Result<CurvaturePoint> {
        let mut c = self.profile.curvature_at(r)?;
        let (a, b) = crate::geometry::radial_hessian(&self.profile, self.flux_constant, r);
        c.hessian_radial = Some(a);
        c.hessian_tangential = Some(b);
        Ok(c)
    }

    /// Radius of the level set `{u = t}`, by safeguarded Newton iteration on
    /// the quadrature-defined potential started from the spline inverse.
    pub fn radius_at(&self, level: Level) -> Result<f64> {
        if level.t <= 0.0 {
            return Ok(self.r0());
        }
        if !(level.one_minus_t > 0.0) {
            return Err(Error::OutOfDomain { what: "potential level", value: level.t, lo: 0.0, hi: 1.0 });
        }
        let k = self.flux_constant;
        let omu_max = self.cum_j[self.w.len() - 1] * k;
        if level.one_minus_t <= omu_max {
            let target = level.one_minus_t / k;
            let x = newton_bracketed(
                |x| Ok((self.tail_at(x)? - target, tail_integrand(&self.profile, x))),
                0.0,
                1.0 / self.r_max,
                1.0 / self.r_max,
            )?;
            return Ok(1.0 / x);
        }
        let low = level.t < 0.5;
        // Knot values increase in `I` and decrease in `J`.
        let idx = if low {
            let target = level.t / k;
            self.cum_i.partition_point(|&v| v <= target)
        } else {
            let target = level.one_minus_t / k;
            self.cum_j.partition_point(|&v| v > target)
        }
        .clamp(1, self.w.len() - 1)
            - 1;
        let (a, b) = (self.w[idx], self.w[idx + 1]);
        let guess = self.u_table.inverse(level.t).unwrap_or(0.5 * (a + b)).clamp(a, b);
        let g = |x| self.g(x);
        let w = newton_bracketed(
            |x| {
                let res = if low {
                    self.cum_i[idx] + integrate(g, a, x, 0.0, self.rel())?.value - level.t / k
                } else {
                    level.one_minus_t / k
                        - (self.cum_j[idx + 1] + integrate(g, x, b, 0.0, self.rel())?.value)
                };
                Ok((res, self.g(x)))
            },
            a,
            b,
            guess,
        )?;
        Ok(self.r0() + w * w)
    }

    /// Flux `∫_{r=a}|Du| dσ / ((n−2)|S|)` with `|Du|` measured by centered
    /// differences of the tabulated potential.
    pub fn measured_flux(&self, a: f64) -> Result<f64> {
        let n = self.dimension().as_f64();
        let h = 1e-3 * (a - self.r0()).min(a);
        let (_, lo) = self.potential(a - h)?;
        let (_, hi) = self.potential(a + h)?;
        let du = (lo - hi) / (2.0 * h) * self.profile.f(a).sqrt();
        Ok(du * a.powf(n - 1.0) / (n - 2.0))
    }

    /// Capacity from the boundary flux, the measured flux at `r_max` and the
    /// Dirichlet energy.
    pub fn capacity(&self) -> Result<CapacityEstimate> {
        let n = self.dimension().as_f64();
        let r0 = self.r0();
        let k = self.flux_constant;
        let flux_at_boundary = k * r0.powf(1.0 - n) * r0.powf(n - 1.0) / (n - 2.0);
        let flux_at_infinity = self.measured_flux(self.r_max)?;
        // ∫|Du|² dμ/((n−2)|S|) = K²/(n−2) ∫ f^{−1/2} r^{1−n} dr, taken in one
        // global pass independent of the table's partition.
        let w_max = (self.r_max - r0).sqrt();
        let body = integrate(|x| self.g(x), 0.0, w_max, 0.0, 1e-13)?.value;
        let tail = integrate(|x| tail_integrand(&self.profile, x), 0.0, 1.0 / self.r_max, 0.0, 1e-13)?.value;
        let dirichlet_energy = k * k * (body + tail) / (n - 2.0);
        let vals = [flux_at_boundary, flux_at_infinity, dirichlet_energy];
        let mut spread: f64 = 0.0;
        for i in 0..3 {
            for j in i + 1..3 {
                let d = (vals[i] - vals[j]).abs() / vals[i].abs().max(vals[j].abs());
                spread = spread.max(d);
            }
        }
        Ok(CapacityEstimate {
            flux_at_boundary,
            flux_at_infinity,
            dirichlet_energy,
            agreed_value: flux_at_boundary,
            max_rel_spread: spread,
            inconsistent: spread > tolerances::CAPACITY_SPREAD,
        })
    }

    /// Residuals of the far-field expansion `u = 1 − C r^{2−n} + …` and of
    /// its radial derivative.
    pub fn asymptotic_expansion_check(&self, radii: &[f64]) -> Result<AsymptoticReport> {
        let n = self.dimension().as_f64();
        let c = self.capacity_value();
        let mut vr = Vec::with_capacity(radii.len());
        let mut dr = Vec::with_capacity(radii.len());
        for &r in radii {
            let omu = self.one_minus_u(r)?;
            vr.push((r.powf(n - 2.0) * omu - c).abs());
            dr.push((r.powf(n - 1.0) * self.du_dr(r) / (n - 2.0) - c).abs());
        }
        let mono = |v: &[f64]| v.windows(2).all(|p| p[1] <= p[0] * (1.0 + 1e-9) + 1e-14);
        let mut order: Vec<usize> = (0..radii.len()).collect();
        order.sort_by(|&a, &b| radii[a].total_cmp(&radii[b]));
        let sorted = |v: &[f64]| order.iter().map(|&i| v[i]).collect::<Vec<_>>();
        let decaying = mono(&sorted(&vr)) && mono(&sorted(&dr));
        Ok(AsymptoticReport {
            radii: radii.to_vec(),
            max_value_residual: vr.iter().cloned().fold(0.0, f64::max),
            max_derivative_residual: dr.iter().cloned().fold(0.0, f64::max),
            value_residuals: vr,
            derivative_residuals: dr,
            decaying,
        })
    }
}

/// Newton iteration for an increasing function on `[a, b]` with a sign
/// change, falling back to bisection whenever a step leaves the bracket.
fn newton_bracketed<F>(eval: F, mut a: f64, mut b: f64, x0: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<(f64, f64)>,
{
    let mut x = x0.clamp(a, b);
    for iteration in 0..200 {
        let (res, slope) = eval(x)?;
        if res == 0.0 {
            return Ok(x);
        }
        if res < 0.0 {
            a = x;
        } else {
            b = x;
        }
        let mut next = x - res / slope;
        if !(next > a && next < b) || !next.is_finite() {
            next = 0.5 * (a + b);
        }
        let step = (next - x).abs();
        x = next;
        if step <= 4.0 * f64::EPSILON * x.abs() || b - a <= 4.0 * f64::EPSILON * b.abs() {
            return Ok(x);
        }
        if iteration == 199 {
            return Err(Error::NonConvergence { iterations: 200, residual: res.abs() });
        }
    }
    unreachable!("loop returns")
}
