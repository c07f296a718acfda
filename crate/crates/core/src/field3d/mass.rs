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

//! ADM mass of `g₀ = w⁴δ` on coordinate spheres centered at the origin.
//!
//! With `h = g₀`, the flux integrand `(∂ⱼhᵢⱼ − ∂ᵢhⱼⱼ)νⁱ` is `−2∂_ν w⁴`, so
//! `m(r) = −(1/8π)∫ ∂_ν(w⁴) dσ_δ`. For the Ricci form, the curvature of
//! `w⁴δ` in coordinates is
//! `Ricᵢⱼ = −2wᵢⱼ/w + 6wᵢwⱼ/w² − (2Δw/w + 2|∇w|²/w²)δᵢⱼ` and `R = −8Δw/w⁵`,
//! and with `X = r ν`, `ν_h = w⁻²ν`, `dσ_h = w⁴dσ_δ`,
//! `m_I(r) = −(1/8π)∫ r w²(Ric_νν − ½R w⁴) dσ_δ`.

use std::f64::consts::PI;

use super::{dist, ConformalFactorSpec, ScalarField3D};
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

const POLAR_NODES: usize = 48;
const AZIMUTH_NODES: usize = 96;

/// Both mass estimates at one radius, each with an error bar from the
/// change between `r` and `2r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassEstimate {
    pub radius: f64,
    pub m_flux: f64,
    pub m_ricci: f64,
    /// Richardson estimate `2|m(r) − m(2r)|` for a `1/r` remainder, times
    /// a safety factor of 1.5.
    pub flux_error: f64,
    pub ricci_error: f64,
}

impl MassEstimate {
    /// The two estimates agree within their combined error bars.
    pub fn agree(&self) -> bool {
        (self.m_flux - self.m_ricci).abs() <= self.flux_error + self.ricci_error + 1e-12
    }
}

/// `∫_{|x−c|=r} f(x, ν) dσ_δ` by Gauss–Legendre in `cos θ` times the
/// midpoint rule in the azimuth.
pub(crate) fn sphere_integral<F: Fn([f64; 3], [f64; 3]) -> f64>(center: [f64; 3], r: f64, f: F) -> f64 {
    let (nodes, weights) = gauss_legendre(POLAR_NODES);
    let dphi = 2.0 * PI / AZIMUTH_NODES as f64;
    let mut total = 0.0;
    for (z, wz) in nodes.iter().zip(&weights) {
        let rho = (1.0 - z * z).sqrt();
        for k in 0..AZIMUTH_NODES {
            let phi = (k as f64 + 0.5) * dphi;
            let nu = [rho * phi.cos(), rho * phi.sin(), *z];
            total += wz * dphi * f([center[0] + r * nu[0], center[1] + r * nu[1], center[2] + r * nu[2]], nu);
        }
    }
    total * r * r
}

fn masses_at(spec: &ConformalFactorSpec, r: f64) -> (f64, f64) {
    let flux = sphere_integral([0.0; 3], r, |x, nu| {
        let w = spec.w(x);
        let g = spec.grad_w(x);
        4.0 * w.powi(3) * (g[0] * nu[0] + g[1] * nu[1] + g[2] * nu[2])
    });
    let ricci = sphere_integral([0.0; 3], r, |x, nu| {
        let w = spec.w(x);
        let g = spec.grad_w(x);
        let hw = spec.hess_w(x);
        let lap = hw[0][0] + hw[1][1] + hw[2][2];
        let g2 = g[0] * g[0] + g[1] * g[1] + g[2] * g[2];
        let gn = g[0] * nu[0] + g[1] * nu[1] + g[2] * nu[2];
        let mut hnn = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                hnn += hw[i][j] * nu[i] * nu[j];
            }
        }
        let ric_nn = -2.0 * hnn / w + 6.0 * gn * gn / (w * w) - 2.0 * lap / w - 2.0 * g2 / (w * w);
        let scalar = -8.0 * lap / w.powi(5);
        r * w * w * (ric_nn - 0.5 * scalar * w.powi(4))
    });
    (-flux / (8.0 * PI), -ricci / (8.0 * PI))
}

/// Mass estimates on coordinate spheres of the given radii. The sphere and
/// its double must enclose every center and excision.
pub fn adm_mass(spec: &ConformalFactorSpec, radii: &[f64]) -> Result<Vec<MassEstimate>> {
    radii
        .iter()
        .map(|&r| {
            let reach = spec
                .excisions
                .iter()
                .map(|e| dist(e.center, [0.0; 3]) + e.radius)
                .chain(spec.centers.iter().map(|c| dist(*c, [0.0; 3])))
                .fold(0.0, f64::max);
            if !(r > reach) || !r.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "sphere of radius {r} must enclose the excisions (reach {reach})"
                )));
            }
            let (mf, mr) = masses_at(spec, r);
            let (mf2, mr2) = masses_at(spec, 2.0 * r);
            Ok(MassEstimate {
                radius: r,
                m_flux: mf,
                m_ricci: mr,
                flux_error: 3.0 * (mf - mf2).abs(),
                ricci_error: 3.0 * (mr - mr2).abs(),
            })
        })
        .collect()
}

impl ScalarField3D {
    /// [`adm_mass`] restricted to spheres that fit in the grid with two
    /// spacings to spare.
    pub fn adm_mass(&self, radii: &[f64]) -> Result<Vec<MassEstimate>> {
        let limit = self.grid.half_extent - 2.0 * self.grid.h();
        if let Some(r) = radii.iter().find(|r| **r > limit) {
            return Err(Error::Truncation(format!("sphere of radius {r} exceeds the grid (limit {limit})")));
        }
        adm_mass(&self.spec, radii)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_center_flux_mass_is_m_w_cubed() {
        let spec = ConformalFactorSpec::single_center(1.0).unwrap();
        let est = adm_mass(&spec, &[20.0]).unwrap()[0];
        let w: f64 = 1.0 + 1.0 / 40.0;
        assert!((est.m_flux - w.powi(3)).abs() < 1e-12);
        assert!((est.m_ricci - 1.0).abs() < 1e-12);
    }

    #[test]
    fn flat_masses_vanish() {
        let spec = ConformalFactorSpec::flat_ball(1.0).unwrap();
        let est = adm_mass(&spec, &[5.0]).unwrap()[0];
        assert_eq!(est.m_flux, 0.0);
        assert_eq!(est.m_ricci, 0.0);
    }

    #[test]
    fn two_centers_tend_to_total_mass() {
        let spec = ConformalFactorSpec::two_centers(0.5, 0.5, 4.0).unwrap();
        let est = adm_mass(&spec, &[50.0, 200.0]).unwrap();
        assert!((est[1].m_flux - 1.0).abs() < 0.03);
        assert!((est[1].m_ricci - 1.0).abs() < 0.03);
        assert!(est.iter().all(|e| e.agree()));
    }

    #[test]
    fn sphere_must_enclose_excisions() {
        let spec = ConformalFactorSpec::two_centers(0.5, 0.5, 4.0).unwrap();
        assert!(adm_mass(&spec, &[1.0]).is_err());
    }
}
