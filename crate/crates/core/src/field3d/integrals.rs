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

//! `F_β` on grid level sets, by mesh quadrature and by a coarea estimator.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::{extract_level, NodeKind, ScalarField3D};
use crate::error::{Error, Result};
use crate::monotone::{finish_curve, CurveSample, MonotoneCurve, Parameterization};
use crate::radial::Level;

/// Relative agreement expected of grid estimates of `F_β`.
pub const DISCRETIZATION: f64 = 0.03;

/// `(1+τ)^{2β}|Du|^{β+1}` at a point where `u = t`; the exponent
/// `β(n−1)/(n−2)` is `2β` in three dimensions.
fn density(t: f64, du: f64, beta: f64) -> Result<f64> {
    let tau = Level::from_t(t)?.tau();
    Ok((1.0 + tau).powf(2.0 * beta) * du.powf(beta + 1.0))
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!("β must be ≥ 0, got {beta}")));
    }
    Ok(())
}

/// `F_β(τ(t))` by quadrature over the extracted mesh.
pub fn surface_integral_f(field: &ScalarField3D, t: f64, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let surface = extract_level(field, t)?;
    let tau = Level::from_t(t)?.tau();
    Ok((1.0 + tau).powf(2.0 * beta) * surface.integrate(|du| du.powf(beta + 1.0)))
}

/// `F_β(τ(t))` from `∫ K_δ(u − t) f |Du| dμ`, with `f` the integrand of
/// `F_β` and `K_δ` the raised-cosine kernel of half-width `δ` and unit mass.
/// By the coarea formula this is the `K_δ`-average of `F_β` over the band.
pub fn coarea_integral_f(field: &ScalarField3D, t: f64, delta: f64, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    if !(delta > 0.0 && t - delta > 0.0 && t + delta < 1.0) {
        return Err(Error::InvalidParameter(format!("band [{}, {}] must lie in (0, 1)", t - delta, t + delta)));
    }
    let g = field.grid;
    let h3 = g.h().powi(3);
    let terms: Vec<Result<f64>> = (0..g.len())
        .into_par_iter()
        .filter_map(|p| {
            let u = field.values[p];
            if (u - t).abs() >= delta || matches!(field.kinds[p], NodeKind::Inside(_) | NodeKind::Pinned) {
                return None;
            }
            if field.kinds[p] == NodeKind::Outer {
                return Some(Err(Error::Truncation(format!("band around {t} reaches the grid boundary"))));
            }
            let Some(du) = field.node_du(p) else {
                return Some(Err(Error::Truncation(format!("band around {t} touches an excision"))));
            };
            let kernel = (1.0 + (PI * (u - t) / delta).cos()) / (2.0 * delta);
            let w = field.spec.w(g.point_of(p));
            Some(density(u, du, beta).map(|f| kernel * f * du * w.powi(6) * h3))
        })
        .collect();
    // Deterministic order: the filtered sequence is ordered by node index.
    let mut total = 0.0;
    for t in terms {
        total += t?;
    }
    Ok(total)
}

/// `F_β` across grid levels.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldScan {
    /// Samples on regular levels only. The analytic derivative column is
    /// not computed on grids and holds NaN.
    pub curve: MonotoneCurve,
    /// Levels skipped as near-critical.
    pub skipped: Vec<f64>,
    /// `(max − min)/mean` of the sampled values.
    pub relative_spread: f64,
    /// The data are not known to be sub-static, so the verdict carries no
    /// theorem.
    pub informational: bool,
}

impl FieldScan {
    /// Smallest and largest skipped level.
    pub fn gap(&self) -> Option<(f64, f64)> {
        let lo = self.skipped.iter().copied().reduce(f64::min)?;
        let hi = self.skipped.iter().copied().reduce(f64::max)?;
        Some((lo, hi))
    }
}

/// Samples `F_β` on the given levels, skipping near-critical ones. The
/// derivative column is the three-point difference in `τ` across the
/// neighboring regular samples.
pub fn monotonicity_scan(field: &ScalarField3D, beta: f64, levels: &[f64]) -> Result<FieldScan> {
    check_beta(beta)?;
    let mut levels = levels.to_vec();
    levels.sort_by(f64::total_cmp);
    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for &t in &levels {
        let surface = extract_level(field, t)?;
        if surface.near_critical() {
            skipped.push(t);
            continue;
        }
        let tau = Level::from_t(t)?.tau();
        let value = (1.0 + tau).powf(2.0 * beta) * surface.integrate(|du| du.powf(beta + 1.0));
        points.push((tau, t, value));
    }
    if points.is_empty() {
        return Err(Error::CriticalPoint("every level of the scan"));
    }
    let k = points.len();
    let samples: Vec<CurveSample> = (0..k)
        .map(|i| {
            let fd = if k < 2 {
                0.0
            } else {
                let (a, b) = (i.saturating_sub(1), (i + 1).min(k - 1));
                (points[b].2 - points[a].2) / (points[b].0 - points[a].0)
            };
            CurveSample {
                x: points[i].0,
                t: points[i].1,
                value: points[i].2,
                analytic_derivative: f64::NAN,
                fd_derivative: fd,
                derivative_mismatch: false,
            }
        })
        .collect();
    let (lo, hi) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.2), hi.max(p.2)));
    let mean = points.iter().map(|p| p.2).sum::<f64>() / k as f64;
    let span = (points[k - 1].0 - points[0].0).max(1.0);
    let informational = !field.spec.is_schwarzschild();
    let curve = finish_curve(
        beta,
        Parameterization::Tau,
        samples,
        "field3d".to_string(),
        beta < 0.5,
        DISCRETIZATION * hi.abs() / span,
    );
    Ok(FieldScan { curve, skipped, relative_spread: (hi - lo) / mean, informational })
}
