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

//! Warped-product metrics `g₀ = f⁻¹ dr² + r² g_S` and their curvature.
//!
//! All tensors are reported in the orthonormal frame `{√f ∂_r, r⁻¹ e_i}`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::radial::RadialTriple;
use crate::tolerances;

/// Manifold dimension, at least three.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dimension(usize);

impl Dimension {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParameter(format!(
                "dimension must be at least 3, got {n}"
            )));
        }
        Ok(Self(n))
    }

    pub fn get(self) -> usize {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64
    }

    /// Area of the unit sphere `S^{n-1}`.
    pub fn sphere_area(self) -> f64 {
        unit_sphere_area(self.0 - 1)
    }
}

/// Area of the unit `d`-sphere in `R^{d+1}`.
pub fn unit_sphere_area(d: usize) -> f64 {
    match d {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (d as f64 - 1.0) * unit_sphere_area(d - 2),
    }
}

/// Closed-form family of warping functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileKind {
    /// `f = 1 − 2m r^{2−n}`.
    Schwarzschild { m: f64 },
    /// `f = 1 − 2m r^{2−n} + q² r^{2(2−n)}`.
    ReissnerNordstrom { m: f64, q: f64 },
    /// `f ≡ 1`: the exterior of a round ball in Euclidean space.
    Flat,
}

/// Nature of the inner boundary `{r = r0}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    /// Simple zero of `f`.
    Horizon,
    /// `f(r0) > 0`; the region `r < r0` is removed.
    Excised,
}

/// Warping function with analytic derivatives and its inner radius.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpProfile {
    kind: ProfileKind,
    n: Dimension,
    r0: f64,
    /// `r0^{n−2}` and the inner root in `X = r^{n−2}` of the numerator of `f`.
    x_plus: f64,
    x_minus: f64,
    pub label: String,
}

fn ipow(x: f64, k: usize) -> f64 {
    x.powi(k as i32)
}

/// `f(r) = 1 − 2m r^{2−n}`, horizon at `r0 = (2m)^{1/(n−2)}`.
pub fn schwarzschild_profile(n: Dimension, m: f64) -> Result<WarpProfile> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::InvalidParameter(format!("mass must be positive, got {m}")));
    }
    let k = n.get() - 2;
    let r0 = (2.0 * m).powf(1.0 / k as f64);
    Ok(WarpProfile {
        kind: ProfileKind::Schwarzschild { m },
        n,
        r0,
        x_plus: 2.0 * m,
        x_minus: 0.0,
        label: format!("schwarzschild(n={}, m={m})", n.get()),
    })
}

/// `f(r) = 1 − 2m r^{2−n} + q² r^{2(2−n)}`, horizon at the outer root,
/// located by bisection.
pub fn reissner_nordstrom_profile(n: Dimension, m: f64, q: f64) -> Result<WarpProfile> {
    if !(m > 0.0 && m.is_finite()) || !q.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "need m > 0 and finite q, got m={m}, q={q}"
        )));
    }
    if q == 0.0 {
        let mut p = schwarzschild_profile(n, m)?;
        p.kind = ProfileKind::ReissnerNordstrom { m, q };
        p.label = format!("reissner-nordstrom(n={}, m={m}, q=0)", n.get());
        return Ok(p);
    }
    let q2 = q * q;
    if q2 >= m * m {
        return Err(Error::DegenerateHorizon(format!(
            "q² = {q2} ≥ m² = {}: no simple positive root",
            m * m
        )));
    }
    let k = n.get() - 2;
    let inv_k = 1.0 / k as f64;
    let f = |r: f64| {
        let x = ipow(r, k);
        1.0 - 2.0 * m / x + q2 / (x * x)
    };
    // f is minimal at X = q²/m and increasing beyond.
    let mut a = (q2 / m).powf(inv_k);
    let mut b = 10.0 * (2.0 * m).powf(inv_k);
    if !(f(a) < 0.0 && f(b) > 0.0) {
        return Err(Error::DegenerateHorizon("outer root not bracketed".into()));
    }
    while b - a > 1e-15 * b {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if f(mid) > 0.0 {
            b = mid;
        } else {
            a = mid;
        }
    }
    let r0 = if f(a).abs() < f(b).abs() { a } else { b };
    let x_plus = ipow(r0, k);
    Ok(WarpProfile {
        kind: ProfileKind::ReissnerNordstrom { m, q },
        n,
        r0,
        x_plus,
        x_minus: q2 / x_plus,
        label: format!("reissner-nordstrom(n={}, m={m}, q={q})", n.get()),
    })
}

/// `f ≡ 1` outside the ball of radius `r0`.
pub fn flat_profile(n: Dimension, r0: f64) -> Result<WarpProfile> {
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {r0}")));
    }
    Ok(WarpProfile {
        kind: ProfileKind::Flat,
        n,
        r0,
        x_plus: 0.0,
        x_minus: 0.0,
        label: format!("flat(n={}, r0={r0})", n.get()),
    })
}

impl WarpProfile {
    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn dimension(&self) -> Dimension {
        self.n
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn boundary(&self) -> BoundaryKind {
        match self.kind {
            ProfileKind::Flat => BoundaryKind::Excised,
            _ => BoundaryKind::Horizon,
        }
    }

    fn k(&self) -> usize {
        self.n.get() - 2
    }

    fn mq2(&self) -> (f64, f64) {
        match self.kind {
            ProfileKind::Schwarzschild { m } => (m, 0.0),
            ProfileKind::ReissnerNordstrom { m, q } => (m, q * q),
            ProfileKind::Flat => (0.0, 0.0),
        }
    }

    /// Mass parameter `m` (zero for the flat profile).
    pub fn mass(&self) -> f64 {
        self.mq2().0
    }

    pub fn f(&self, r: f64) -> f64 {
        1.0 - self.one_minus_f(r)
    }

    /// `1 − f`, without cancellation.
    pub fn one_minus_f(&self, r: f64) -> f64 {
        let (m, q2) = self.mq2();
        let x = ipow(r, self.k());
        2.0 * m / x - q2 / (x * x)
    }

    pub fn f_prime(&self, r: f64) -> f64 {
        let (m, q2) = self.mq2();
        let k = self.k() as f64;
        let x = ipow(r, self.k());
        2.0 * k * (m - q2 / x) / (x * r)
    }

    pub fn f_second(&self, r: f64) -> f64 {
        let (m, q2) = self.mq2();
        let k = self.k() as f64;
        let x = ipow(r, self.k());
        (-2.0 * m * k * (k + 1.0) + 2.0 * k * (2.0 * k + 1.0) * q2 / x) / (x * r * r)
    }

    /// `f(r) / (r − r0)` for horizons, evaluated from the factored form so
    /// that it stays accurate as `r → r0`. Equals `f'(r0)` at the horizon.
    pub fn f_over_gap(&self, r: f64) -> f64 {
        match self.boundary() {
            BoundaryKind::Excised => self.f(r) / (r - self.r0),
            BoundaryKind::Horizon => {
                let k = self.k();
                // (r^k − r0^k)/(r − r0)
                let mut sum = 0.0;
                let mut term = ipow(r, k - 1);
                let ratio = self.r0 / r;
                for _ in 0..k {
                    sum += term;
                    term *= ratio;
                }
                let x = ipow(r, k);
                sum * (x - self.x_minus) / (x * x)
            }
        }
    }

    /// Orthonormal-frame Ricci and scalar curvature at `r > r0`.
    pub fn curvature_at(&self, r: f64) -> Result<CurvaturePoint> {
        if !(r > self.r0) || !r.is_finite() {
            return Err(Error::OutOfDomain {
                what: "curvature radius",
                value: r,
                lo: self.r0,
                hi: f64::INFINITY,
            });
        }
        Ok(self.curvature_unchecked(r))
    }

    pub(crate) fn curvature_unchecked(&self, r: f64) -> CurvaturePoint {
        let n = self.n.as_f64();
        let fp = self.f_prime(r);
        let omf = self.one_minus_f(r);
        CurvaturePoint {
            r,
            ricci_radial: -(n - 1.0) * fp / (2.0 * r),
            ricci_tangential: -fp / (2.0 * r) + (n - 2.0) * omf / (r * r),
            scalar: (n - 1.0) * ((n - 2.0) * omf / (r * r) - fp / r),
            hessian_radial: None,
            hessian_tangential: None,
        }
    }

    /// Checks the profile invariants: simple zero (or positive value) at
    /// `r0`, positivity on `samples`, and asymptotic flatness.
    pub fn validate(&self, samples: &[f64]) -> Result<()> {
        let r0 = self.r0;
        match self.boundary() {
            BoundaryKind::Horizon => {
                if self.f(r0).abs() > 1e-12 || !(self.f_prime(r0) > 0.0) {
                    return Err(Error::DegenerateHorizon(format!(
                        "f(r0) = {:e}, f'(r0) = {:e}",
                        self.f(r0),
                        self.f_prime(r0)
                    )));
                }
            }
            BoundaryKind::Excised => {
                if !(self.f(r0) > 0.0) {
                    return Err(Error::DegenerateHorizon("f(r0) ≤ 0 at excised boundary".into()));
                }
            }
        }
        if let Some(&r) = samples.iter().find(|&&r| r > r0 && !(self.f(r) > 0.0)) {
            return Err(Error::InvalidParameter(format!("f({r}) ≤ 0")));
        }
        let far = self.one_minus_f(1e6 * r0).abs();
        if far >= tolerances::ASYMPTOTIC_FLATNESS {
            return Err(Error::InvalidParameter(format!(
                "|f − 1| = {far:e} at 10⁶ r0 exceeds the flatness tolerance"
            )));
        }
        Ok(())
    }
}

/// Curvature data at one radius. Hessian entries are present only when a
/// potential is attached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvaturePoint {
    pub r: f64,
    pub ricci_radial: f64,
    pub ricci_tangential: f64,
    pub scalar: f64,
    pub hessian_radial: Option<f64>,
    pub hessian_tangential: Option<f64>,
}

impl CurvaturePoint {
    /// `scalar − (Ric_rad + (n−1) Ric_tan)`.
    pub fn trace_defect(&self, n: Dimension) -> f64 {
        self.scalar - (self.ricci_radial + (n.as_f64() - 1.0) * self.ricci_tangential)
    }
}

/// Orthonormal-frame Hessian `(radial, tangential)` of a radial function
/// with `|Du| = k r^{1−n}`.
pub fn radial_hessian(profile: &WarpProfile, flux_constant: f64, r: f64) -> (f64, f64) {
    let n = profile.n.as_f64();
    let tan = flux_constant * r.powf(-n) * profile.f(r).max(0.0).sqrt();
    (-(n - 1.0) * tan, tan)
}

/// Entries `(radial, tangential)` of `u Ric − D²u` for a radial function
/// with value `u` and `|Du| = k r^{1−n}` at `r`.
pub fn substatic_entries(profile: &WarpProfile, r: f64, u: f64, flux_constant: f64) -> (f64, f64) {
    let c = profile.curvature_unchecked(r);
    let (h_rad, h_tan) = radial_hessian(profile, flux_constant, r);
    (u * c.ricci_radial - h_rad, u * c.ricci_tangential - h_tan)
}

/// Smallest eigenvalue of `u Ric − D²u` at sampled radii.
#[derive(Debug, Clone, PartialEq)]
pub struct SubStaticReport {
    pub samples: Vec<(f64, f64)>,
    pub global_min: f64,
    pub tol: f64,
    pub is_substatic: bool,
}

/// Evaluates `u Ric − D²u` on `r_samples`; the tolerance is
/// `1e-9·(1 + max |u Ric|)`.
pub fn substatic_check(triple: &RadialTriple, r_samples: &[f64]) -> Result<SubStaticReport> {
    let profile = triple.profile();
    let (lo, hi) = (profile.r0(), triple.r_max());
    let mut samples = Vec::with_capacity(r_samples.len());
    let mut scale: f64 = 0.0;
    for &r in r_samples {
        if !(r >= lo && r <= hi) {
            return Err(Error::OutOfDomain { what: "sub-static sample radius", value: r, lo, hi });
        }
        let u = triple.u(r)?;
        let c = profile.curvature_unchecked(r);
        scale = scale.max((u * c.ricci_radial).abs()).max((u * c.ricci_tangential).abs());
        let (a, b) = substatic_entries(profile, r, u, triple.flux_constant());
        samples.push((r, a.min(b)));
    }
    let global_min = samples.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let tol = tolerances::SUBSTATIC * (1.0 + scale);
    Ok(SubStaticReport { samples, global_min, tol, is_substatic: global_min >= -tol })
}

/// `count` logarithmically spaced radii in `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| {
            if i + 1 == count {
                hi
            } else {
                (a + (b - a) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dim(n: usize) -> Dimension {
        Dimension::new(n).unwrap()
    }

    #[test]
    fn dimension_rejects_two() {
        assert!(Dimension::new(2).is_err());
    }

    #[test]
    fn sphere_areas() {
        assert!((dim(3).sphere_area() - 4.0 * PI).abs() < 1e-14);
        assert!((dim(4).sphere_area() - 2.0 * PI * PI).abs() < 1e-14);
        assert!((dim(5).sphere_area() - 8.0 * PI * PI / 3.0).abs() < 1e-13);
    }

    #[test]
    fn schwarzschild_examples() {
        let p = schwarzschild_profile(dim(3), 1.0).unwrap();
        assert_eq!(p.r0(), 2.0);
        assert!((p.f(4.0) - 0.5).abs() < 1e-15);
        assert!(p.f(2.0).abs() < 1e-15);
        assert!((p.f_prime(2.0) - 0.5).abs() < 1e-15);
        let p4 = schwarzschild_profile(dim(4), 0.5).unwrap();
        assert_eq!(p4.r0(), 1.0);
        for r in [1.5, 3.0, 10.0] {
            assert!((p4.f(r) - (1.0 - 1.0 / (r * r))).abs() < 1e-15);
        }
        assert!(schwarzschild_profile(dim(3), 0.0).is_err());
        assert!(schwarzschild_profile(dim(3), -1.0).is_err());
    }

    #[test]
    fn reissner_nordstrom_examples() {
        let p = reissner_nordstrom_profile(dim(3), 1.0, 0.0).unwrap();
        let s = schwarzschild_profile(dim(3), 1.0).unwrap();
        assert_eq!(p.r0(), s.r0());
        assert_eq!(p.f(3.0), s.f(3.0));
        let rn = reissner_nordstrom_profile(dim(3), 1.0, 0.5).unwrap();
        let oracle = 1.0 + (1.0f64 - 0.25).sqrt();
        assert!((rn.r0() - oracle).abs() < 1e-13 * oracle);
        assert!(matches!(
            reissner_nordstrom_profile(dim(3), 1.0, 1.1),
            Err(Error::DegenerateHorizon(_))
        ));
        assert!(matches!(
            reissner_nordstrom_profile(dim(3), 1.0, 1.0),
            Err(Error::DegenerateHorizon(_))
        ));
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let profiles = [
            schwarzschild_profile(dim(3), 1.0).unwrap(),
            schwarzschild_profile(dim(5), 0.7).unwrap(),
            reissner_nordstrom_profile(dim(3), 1.0, 0.3).unwrap(),
            reissner_nordstrom_profile(dim(4), 1.0, 0.6).unwrap(),
        ];
        for p in &profiles {
            for r in [1.3 * p.r0(), 3.0 * p.r0(), 20.0 * p.r0()] {
                let h = 1e-4 * r;
                let d1 = (p.f(r + h) - p.f(r - h)) / (2.0 * h);
                let d2 = (p.f_prime(r + h) - p.f_prime(r - h)) / (2.0 * h);
                assert!((d1 - p.f_prime(r)).abs() < 1e-7 * (1.0 + p.f_prime(r).abs()));
                assert!((d2 - p.f_second(r)).abs() < 1e-7 * (1.0 + p.f_second(r).abs()));
            }
        }
    }

    #[test]
    fn f_over_gap_is_accurate_near_horizon() {
        for p in [
            schwarzschild_profile(dim(4), 0.8).unwrap(),
            reissner_nordstrom_profile(dim(3), 1.0, 0.5).unwrap(),
        ] {
            let r0 = p.r0();
            assert!((p.f_over_gap(r0) - p.f_prime(r0)).abs() < 1e-12);
            let r = 1.7 * r0;
            assert!((p.f_over_gap(r) - p.f(r) / (r - r0)).abs() < 1e-13);
        }
    }

    #[test]
    fn schwarzschild_is_scalar_flat() {
        for n in 3..=6 {
            let p = schwarzschild_profile(dim(n), 1.3).unwrap();
            for r in log_grid(1.0001 * p.r0(), 1e4 * p.r0(), 20) {
                let c = p.curvature_at(r).unwrap();
                assert!(c.scalar.abs() < tolerances::SCALAR_FLAT, "n={n} r={r}");
                assert!(c.trace_defect(dim(n)).abs() < tolerances::TRACE_IDENTITY);
            }
        }
    }

    #[test]
    fn flat_profile_has_no_curvature() {
        let p = flat_profile(dim(3), 1e-9).unwrap();
        let c = p.curvature_at(2.0).unwrap();
        assert_eq!((c.ricci_radial, c.ricci_tangential, c.scalar), (0.0, 0.0, 0.0));
        assert_eq!(substatic_entries(&p, 2.0, 1.0, 0.0), (0.0, 0.0));
    }

    #[test]
    fn curvature_rejects_interior_points() {
        let p = schwarzschild_profile(dim(3), 1.0).unwrap();
        assert!(matches!(p.curvature_at(2.0), Err(Error::OutOfDomain { .. })));
    }

    /// Independent oracle: Ricci of `f⁻¹dr² + r²(dθ² + sin²θ dφ²)` in
    /// coordinates via Christoffel symbols obtained by finite differences.
    #[test]
    fn ricci_matches_coordinate_computation() {
        let p = reissner_nordstrom_profile(dim(3), 1.0, 0.4).unwrap();
        let metric = |x: [f64; 3]| -> [f64; 3] {
            let (r, th) = (x[0], x[1]);
            [1.0 / p.f(r), r * r, (r * th.sin()).powi(2)]
        };
        let h = 1e-4;
        let dg = |x: [f64; 3], k: usize| -> [f64; 3] {
            let mut a = x;
            let mut b = x;
            a[k] += h;
            b[k] -= h;
            let (ga, gb) = (metric(a), metric(b));
            [0, 1, 2].map(|i| (ga[i] - gb[i]) / (2.0 * h))
        };
        // Christoffel symbols of a diagonal metric.
        let gamma = |x: [f64; 3]| -> [[[f64; 3]; 3]; 3] {
            let g = metric(x);
            let d = [dg(x, 0), dg(x, 1), dg(x, 2)];
            let mut c = [[[0.0; 3]; 3]; 3];
            for (l, cl) in c.iter_mut().enumerate() {
                for i in 0..3 {
                    for j in 0..3 {
                        let mut s = 0.0;
                        if l == i {
                            s += d[j][l];
                        }
                        if l == j {
                            s += d[i][l];
                        }
                        if i == j {
                            s -= d[l][i];
                        }
                        cl[i][j] = 0.5 * s / g[l];
                    }
                }
            }
            c
        };
        let x = [3.1, 1.1, 0.3];
        let g0 = gamma(x);
        let dgamma = |k: usize| {
            let mut a = x;
            let mut b = x;
            a[k] += h;
            b[k] -= h;
            let (ga, gb) = (gamma(a), gamma(b));
            let mut out = [[[0.0; 3]; 3]; 3];
            for l in 0..3 {
                for i in 0..3 {
                    for j in 0..3 {
                        out[l][i][j] = (ga[l][i][j] - gb[l][i][j]) / (2.0 * h);
                    }
                }
            }
            out
        };
        let dk = [dgamma(0), dgamma(1), dgamma(2)];
        let ricci = |i: usize, j: usize| {
            let mut s = 0.0;
            for k in 0..3 {
                s += dk[k][k][i][j] - dk[j][k][i][k];
                for l in 0..3 {
                    s += g0[k][k][l] * g0[l][i][j] - g0[k][j][l] * g0[l][i][k];
                }
            }
            s
        };
        let g = metric(x);
        let c = p.curvature_at(x[0]).unwrap();
        assert!((ricci(0, 0) / g[0] - c.ricci_radial).abs() < 1e-6);
        assert!((ricci(1, 1) / g[1] - c.ricci_tangential).abs() < 1e-6);
        assert!((ricci(2, 2) / g[2] - c.ricci_tangential).abs() < 1e-6);
    }
}
