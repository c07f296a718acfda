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

//! Face-flux discretization of `∇·(w²∇u)` and a Jacobi-preconditioned
//! conjugate residual solver.
//!
//! Equations are assembled without the `h²` factor: for an active node `p`,
//! `A_pp = Σ a_f/θ_f` and `A_pq = −a_f`, with `a_f = w²` at the face
//! midpoint. A neighbor inside an excision contributes a cut face at
//! fraction `θ` of the spacing where `u = 0`. The matrix is symmetric
//! positive definite.

use rayon::prelude::*;

use super::{midpoint, ConformalFactorSpec, Grid, NodeKind};
use crate::error::{Error, Result};

/// Cut fractions below this pin the node to zero.
const THETA_MIN: f64 = 1e-2;

/// Fixed chunk length for reductions, so sums do not depend on thread count.
const CHUNK: usize = 1 << 14;

/// Iteration record of one or more solves.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolverStats {
    pub iterations: usize,
    /// `max |Δ_{g₀}u|` over active nodes at exit of the last solve.
    pub final_residual: f64,
    /// Preconditioned residual norm `(r, M⁻¹r)^{1/2}` per iteration of each
    /// solve. Conjugate residual keeps each run nonincreasing.
    pub history: Vec<Vec<f64>>,
}

impl SolverStats {
    pub(crate) fn merge(&mut self, other: SolverStats) {
        self.iterations += other.iterations;
        self.final_residual = other.final_residual;
        self.history.extend(other.history);
    }

    /// Largest relative increase between consecutive entries of any run.
    pub fn max_history_increase(&self) -> f64 {
        self.history
            .iter()
            .flat_map(|run| run.windows(2).map(|w| (w[1] - w[0]) / w[0]))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub(crate) struct System {
    grid: Grid,
    kinds: Vec<NodeKind>,
    /// Coefficient of the face between `p` and `p + stride[d]`.
    face: [Vec<f64>; 3],
    diag: Vec<f64>,
    /// Sum of cut-face coefficients `a_f/θ` (and pinned faces) per node.
    cut: Vec<f64>,
    rhs: Vec<f64>,
    /// `1/(w⁶h²)`, converting equation residuals to `Δ_{g₀}u`.
    scale: Vec<f64>,
    outer_constant: f64,
}

fn cut_fraction(a: [f64; 3], b: [f64; 3], c: [f64; 3], r: f64) -> f64 {
    // Smallest s in (0, 1] with |a + s(b − a) − c| = r, with a outside.
    let d = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let e = [a[0] - c[0], a[1] - c[1], a[2] - c[2]];
    let qa = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
    let qb = 2.0 * (d[0] * e[0] + d[1] * e[1] + d[2] * e[2]);
    let qc = e[0] * e[0] + e[1] * e[1] + e[2] * e[2] - r * r;
    let disc = (qb * qb - 4.0 * qa * qc).max(0.0);
    // Stable smaller root.
    let q = -0.5 * (qb - disc.sqrt());
    let s = qc / q;
    s.clamp(0.0, 1.0)
}

fn chunked_sum<F: Fn(usize) -> f64 + Sync>(len: usize, f: F) -> f64 {
    let partial: Vec<f64> = (0..len.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| (c * CHUNK..((c + 1) * CHUNK).min(len)).map(&f).sum())
        .collect();
    partial.iter().sum()
}

impl System {
    pub(crate) fn assemble(spec: &ConformalFactorSpec, grid: Grid, c: f64) -> Self {
        let n = grid.n;
        let len = grid.len();
        let strides = [1, n, n * n];
        let mut kinds: Vec<NodeKind> = (0..len)
            .into_par_iter()
            .map(|p| {
                let (i, j, k) = grid.unindex(p);
                let x = grid.point(i, j, k);
                if let Some(e) = spec.excisions.iter().position(|e| e.level(x) <= 0.0) {
                    NodeKind::Inside(e as u8)
                } else if grid.on_boundary(i, j, k) {
                    NodeKind::Outer
                } else {
                    NodeKind::Active
                }
            })
            .collect();

        let theta_of = |kinds: &[NodeKind], p: usize, q: usize| -> Option<f64> {
            match kinds[q] {
                NodeKind::Inside(e) => {
                    let e = spec.excisions[e as usize];
                    Some(cut_fraction(grid.point_of(p), grid.point_of(q), e.center, e.radius))
                }
                NodeKind::Pinned => Some(1.0),
                _ => None,
            }
        };
        let pin: Vec<usize> = (0..len)
            .into_par_iter()
            .filter(|&p| {
                kinds[p] == NodeKind::Active
                    && strides.iter().any(|&s| {
                        [p + s, p - s]
                            .iter()
                            .any(|&q| theta_of(&kinds, p, q).is_some_and(|t| t < THETA_MIN))
                    })
            })
            .collect();
        for p in pin {
            kinds[p] = NodeKind::Pinned;
        }

        let face: [Vec<f64>; 3] = std::array::from_fn(|d| {
            (0..len)
                .into_par_iter()
                .map(|p| {
                    let (i, j, k) = grid.unindex(p);
                    let idx = [i, j, k];
                    if idx[d] + 1 >= n {
                        return 0.0;
                    }
                    let mid = midpoint(grid.point_of(p), grid.point_of(p + strides[d]));
                    spec.w(mid).powi(2)
                })
                .collect()
        });

        let h = grid.h();
        let rows: Vec<(f64, f64, f64)> = (0..len)
            .into_par_iter()
            .map(|p| {
                if kinds[p] != NodeKind::Active {
                    return (0.0, 0.0, 0.0);
                }
                let mut diag = 0.0;
                let mut cut = 0.0;
                for d in 0..3 {
                    for (q, a) in [(p + strides[d], face[d][p]), (p - strides[d], face[d][p - strides[d]])] {
                        match theta_of(&kinds, p, q) {
                            Some(t) => {
                                diag += a / t;
                                cut += a / t;
                            }
                            None => diag += a,
                        }
                    }
                }
                let w = spec.w(grid.point_of(p));
                (diag, cut, 1.0 / (w.powi(6) * h * h))
            })
            .collect();
        let mut sys = System {
            grid,
            kinds,
            face,
            diag: rows.iter().map(|r| r.0).collect(),
            cut: rows.iter().map(|r| r.1).collect(),
            scale: rows.iter().map(|r| r.2).collect(),
            rhs: vec![0.0; len],
            outer_constant: c,
        };
        sys.rebuild_rhs(spec, c);
        sys
    }

    fn outer_value(&self, spec: &ConformalFactorSpec, c: f64, p: usize) -> f64 {
        spec.far_field(c, self.grid.point_of(p))
    }

    fn rebuild_rhs(&mut self, spec: &ConformalFactorSpec, c: f64) {
        let n = self.grid.n;
        let strides = [1, n, n * n];
        let rhs: Vec<f64> = (0..self.grid.len())
            .into_par_iter()
            .map(|p| {
                if self.kinds[p] != NodeKind::Active {
                    return 0.0;
                }
                let mut b = 0.0;
                for d in 0..3 {
                    for (q, a) in [(p + strides[d], self.face[d][p]), (p - strides[d], self.face[d][p - strides[d]])] {
                        if self.kinds[q] == NodeKind::Outer {
                            b += a * self.outer_value(spec, c, q);
                        }
                    }
                }
                b
            })
            .collect();
        self.rhs = rhs;
        self.outer_constant = c;
    }

    pub(crate) fn kinds(&self) -> &[NodeKind] {
        &self.kinds
    }

    pub(crate) fn outer_constant(&self) -> f64 {
        self.outer_constant
    }

    /// Far-field model clipped to `[0, 1]` on active nodes, Dirichlet data
    /// elsewhere.
    pub(crate) fn initial_guess(&self, spec: &ConformalFactorSpec) -> Vec<f64> {
        (0..self.grid.len())
            .into_par_iter()
            .map(|p| match self.kinds[p] {
                NodeKind::Active => self.outer_value(spec, self.outer_constant, p).clamp(0.0, 1.0),
                NodeKind::Outer => self.outer_value(spec, self.outer_constant, p),
                _ => 0.0,
            })
            .collect()
    }

    pub(crate) fn set_outer_constant(&mut self, spec: &ConformalFactorSpec, c: f64, values: &mut [f64]) {
        self.rebuild_rhs(spec, c);
        for (p, v) in values.iter_mut().enumerate() {
            if self.kinds[p] == NodeKind::Outer {
                *v = self.outer_value(spec, c, p);
            }
        }
    }

    /// `y = A x` on active rows, for `x` vanishing off the active set.
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.grid.n;
        let slab = n * n;
        y.par_chunks_mut(slab).enumerate().for_each(|(k, out)| {
            for (off, yp) in out.iter_mut().enumerate() {
                let p = k * slab + off;
                if self.kinds[p] != NodeKind::Active {
                    *yp = 0.0;
                    continue;
                }
                let mut acc = self.diag[p] * x[p];
                acc -= self.face[0][p] * x[p + 1] + self.face[0][p - 1] * x[p - 1];
                acc -= self.face[1][p] * x[p + n] + self.face[1][p - n] * x[p - n];
                acc -= self.face[2][p] * x[p + slab] + self.face[2][p - slab] * x[p - slab];
                *yp = acc;
            }
        });
    }

    fn true_residual(&self, values: &[f64]) -> Vec<f64> {
        let masked: Vec<f64> = values
            .par_iter()
            .zip(self.kinds.par_iter())
            .map(|(v, k)| if *k == NodeKind::Active { *v } else { 0.0 })
            .collect();
        let mut ax = vec![0.0; values.len()];
        self.apply(&masked, &mut ax);
        (0..values.len())
            .into_par_iter()
            .map(|p| if self.kinds[p] == NodeKind::Active { self.rhs[p] - ax[p] } else { 0.0 })
            .collect()
    }

    fn max_scaled(&self, r: &[f64]) -> f64 {
        r.par_iter().zip(self.scale.par_iter()).map(|(r, s)| (r * s).abs()).reduce(|| 0.0, f64::max)
    }

    /// Jacobi-preconditioned conjugate residual. Restarts from the true
    /// residual when the recursive one has converged but the true one has not.
    pub(crate) fn solve(&self, values: &mut [f64], tol: f64, max_iterations: usize) -> Result<SolverStats> {
        let len = values.len();
        let inv: Vec<f64> = self.diag.iter().map(|d| if *d > 0.0 { 1.0 / d } else { 0.0 }).collect();
        let mut stats = SolverStats::default();
        let dot = |a: &[f64], b: &[f64]| chunked_sum(len, |i| a[i] * b[i]);
        loop {
            let mut r = self.true_residual(values);
            let res = self.max_scaled(&r);
            stats.final_residual = res;
            if res < tol {
                return Ok(stats);
            }
            if stats.iterations >= max_iterations {
                return Err(Error::NonConvergence { iterations: stats.iterations, residual: res });
            }
            let mut z: Vec<f64> = r.iter().zip(&inv).map(|(r, m)| r * m).collect();
            let mut az = vec![0.0; len];
            self.apply(&z, &mut az);
            let mut p = z.clone();
            let mut ap = az.clone();
            let mut q = vec![0.0; len];
            let mut gamma = dot(&z, &az);
            let mut run = vec![dot(&r, &z).sqrt()];
            let mut converged = false;
            while stats.iterations < max_iterations {
                q.par_iter_mut().zip(ap.par_iter().zip(inv.par_iter())).for_each(|(q, (a, m))| *q = a * m);
                let denom = dot(&ap, &q);
                if !(denom > 0.0) || !(gamma > 0.0) {
                    break;
                }
                let alpha = gamma / denom;
                values
                    .par_iter_mut()
                    .zip(p.par_iter())
                    .zip(self.kinds.par_iter())
                    .for_each(|((x, p), k)| {
                        if *k == NodeKind::Active {
                            *x += alpha * p
                        }
                    });
                r.par_iter_mut().zip(ap.par_iter()).for_each(|(r, a)| *r -= alpha * a);
                z.par_iter_mut().zip(q.par_iter()).for_each(|(z, q)| *z -= alpha * q);
                stats.iterations += 1;
                run.push(dot(&r, &z).max(0.0).sqrt());
                if self.max_scaled(&r) < 0.5 * tol {
                    converged = true;
                    break;
                }
                self.apply(&z, &mut az);
                let gamma_new = dot(&z, &az);
                let beta = gamma_new / gamma;
                gamma = gamma_new;
                p.par_iter_mut().zip(z.par_iter()).for_each(|(p, z)| *p = z + beta * *p);
                ap.par_iter_mut().zip(az.par_iter()).for_each(|(a, z)| *a = z + beta * *a);
            }
            stats.history.push(run);
            if !converged && stats.iterations >= max_iterations {
                let res = self.max_scaled(&self.true_residual(values));
                return Err(Error::NonConvergence { iterations: stats.iterations, residual: res });
            }
        }
    }

    /// Flux of `w²∇u` into the excisions, through cut and pinned faces,
    /// divided by `4π`.
    pub(crate) fn flux_capacity(&self, values: &[f64]) -> f64 {
        let h = self.grid.h();
        chunked_sum(values.len(), |p| self.cut[p] * values[p]) * h / (4.0 * std::f64::consts::PI)
    }
}
