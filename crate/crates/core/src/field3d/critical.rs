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

//! Detection of interior critical points of the grid potential.
//!
//! A node is a candidate when `|Du|` is a minimum over its 3³ neighborhood
//! and lies below `0.05` times the median of `|Du|` over nodes of the same
//! potential band. Adjacent candidates are merged.

use std::collections::BTreeMap;

use super::{extract_level, ScalarField3D};
use crate::error::{Error, Result};

/// Width of the potential bands used for the median.
const BAND: f64 = 0.01;

/// A detected critical point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub node: usize,
    pub position: [f64; 3],
    /// Critical value of the potential.
    pub value: f64,
    /// `|Du|_{g₀}` at the node.
    pub du: f64,
    /// `|Du|` over the band median.
    pub ratio: f64,
}

/// Component counts on either side of a critical value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MorseTransition {
    pub critical_value: f64,
    pub below: f64,
    pub above: f64,
    pub components_below: usize,
    pub components_above: usize,
}

pub fn find_critical_points(field: &ScalarField3D) -> Vec<CriticalPoint> {
    let g = field.grid;
    let du: Vec<Option<f64>> = (0..g.len()).map(|p| field.node_du(p)).collect();
    let band = |u: f64| (u / BAND).floor() as i64;
    let mut bands: BTreeMap<i64, Vec<f64>> = BTreeMap::new();
    for (p, d) in du.iter().enumerate() {
        if let Some(d) = d {
            bands.entry(band(field.values[p])).or_default().push(*d);
        }
    }
    let medians: BTreeMap<i64, f64> = bands
        .into_iter()
        .map(|(k, mut v)| {
            v.sort_by(f64::total_cmp);
            (k, v[v.len() / 2])
        })
        .collect();

    let n = g.n as isize;
    let mut candidates: Vec<(usize, f64, f64)> = Vec::new();
    for (p, d) in du.iter().enumerate() {
        let Some(d) = *d else { continue };
        let median = medians[&band(field.values[p])];
        if d >= super::NEAR_CRITICAL_RATIO * median {
            continue;
        }
        let (i, j, k) = g.unindex(p);
        let mut is_min = true;
        'nb: for dk in -1isize..=1 {
            for dj in -1isize..=1 {
                for di in -1isize..=1 {
                    let (a, b, c) = (i as isize + di, j as isize + dj, k as isize + dk);
                    if a < 0 || b < 0 || c < 0 || a >= n || b >= n || c >= n {
                        is_min = false;
                        break 'nb;
                    }
                    match du[g.index(a as usize, b as usize, c as usize)] {
                        Some(q) if q >= d => {}
                        _ => {
                            is_min = false;
                            break 'nb;
                        }
                    }
                }
            }
        }
        if is_min {
            candidates.push((p, d, d / median));
        }
    }

    // Merge candidates within one lattice step of each other.
    let mut cluster_of: Vec<usize> = Vec::new();
    for (idx, &(p, _, _)) in candidates.iter().enumerate() {
        let (i, j, k) = g.unindex(p);
        let near = (0..idx).find(|&o| {
            let (a, b, c) = g.unindex(candidates[o].0);
            i.abs_diff(a) <= 1 && j.abs_diff(b) <= 1 && k.abs_diff(c) <= 1
        });
        cluster_of.push(near.map_or(idx, |o| cluster_of[o]));
    }
    let mut best: BTreeMap<usize, (usize, f64, f64)> = BTreeMap::new();
    for (idx, &c) in candidates.iter().enumerate() {
        let e = best.entry(cluster_of[idx]).or_insert(c);
        if c.1 < e.1 {
            *e = c;
        }
    }
    best.into_values()
        .map(|(p, d, ratio)| CriticalPoint { node: p, position: g.point_of(p), value: field.values[p], du: d, ratio })
        .collect()
}

/// Counts level-set components at `value ∓ offset`.
pub fn morse_transition(field: &ScalarField3D, point: &CriticalPoint, offset: f64) -> Result<MorseTransition> {
    if !(offset > 0.0) {
        return Err(Error::InvalidParameter(format!("offset must be positive, got {offset}")));
    }
    let below = point.value - offset;
    let above = point.value + offset;
    Ok(MorseTransition {
        critical_value: point.value,
        below,
        above,
        components_below: extract_level(field, below)?.component_count(),
        components_above: extract_level(field, above)?.component_count(),
    })
}
