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

//! Harmonic potentials of conformally flat metrics `g₀ = w⁴δ` on `R³` minus
//! excised balls, with `w = 1 + Σ mᵢ/(2|x − xᵢ|)`.
//!
//! The Laplace–Beltrami operator is `Δ_{g₀}u = w⁻⁶ ∇·(w² ∇u)`, discretized
//! by face fluxes on a uniform Cartesian grid.

mod critical;
mod integrals;
mod level;
mod mass;
mod snapshot;
mod solver;

use std::f64::consts::PI;

pub use critical::{find_critical_points, morse_transition, CriticalPoint, MorseTransition};
pub use integrals::{coarea_integral_f, monotonicity_scan, surface_integral_f, FieldScan, DISCRETIZATION};
pub use level::{extract_level, LevelSurface, NEAR_CRITICAL_RATIO};
pub use mass::{adm_mass, MassEstimate};
pub use snapshot::{read_snapshot, write_snapshot, Snapshot};
pub use solver::SolverStats;

use crate::error::{Error, Result};

/// A ball removed from the domain, with `u = 0` on its boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Excision {
    pub center: [f64; 3],
    pub radius: f64,
}

impl Excision {
    /// Signed distance, negative inside.
    pub fn level(&self, x: [f64; 3]) -> f64 {
        dist(x, self.center) - self.radius
    }
}

/// Point masses of the conformal factor and the excised balls.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalFactorSpec {
    pub centers: Vec<[f64; 3]>,
    pub masses: Vec<f64>,
    pub excisions: Vec<Excision>,
}

pub(crate) fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

impl ConformalFactorSpec {
    pub fn new(centers: Vec<[f64; 3]>, masses: Vec<f64>, excisions: Vec<Excision>) -> Result<Self> {
        if centers.len() != masses.len() {
            return Err(Error::InvalidParameter("one mass per center is required".into()));
        }
        if let Some(m) = masses.iter().find(|m| !(**m > 0.0 && m.is_finite())) {
            return Err(Error::InvalidParameter(format!("masses must be positive, got {m}")));
        }
        if excisions.is_empty() {
            return Err(Error::InvalidParameter("at least one excision is required".into()));
        }
        for (i, a) in excisions.iter().enumerate() {
            if !(a.radius > 0.0) {
                return Err(Error::InvalidParameter("excision radii must be positive".into()));
            }
            for b in &excisions[i + 1..] {
                if dist(a.center, b.center) <= 2.0 * a.radius.max(b.radius) {
                    return Err(Error::InvalidParameter(
                        "excisions closer than their diameters".into(),
                    ));
                }
            }
        }
        for c in &centers {
            if !excisions.iter().any(|e| e.level(*c) < 0.0) {
                return Err(Error::InvalidParameter(
                    "every mass center must lie inside an excision".into(),
                ));
            }
        }
        Ok(Self { centers, masses, excisions })
    }

    /// Isotropic Schwarzschild of mass `m`, excised at the horizon `|x| = m/2`.
    pub fn single_center(m: f64) -> Result<Self> {
        Self::new(vec![[0.0; 3]], vec![m], vec![Excision { center: [0.0; 3], radius: 0.5 * m }])
    }

    /// Flat space (`w ≡ 1`) outside a ball.
    pub fn flat_ball(radius: f64) -> Result<Self> {
        Self::new(vec![], vec![], vec![Excision { center: [0.0; 3], radius }])
    }

    /// Two centers on the `x` axis at `±separation/2`, each excised at
    /// radius `mᵢ/2`.
    pub fn two_centers(m1: f64, m2: f64, separation: f64) -> Result<Self> {
        let a = [-0.5 * separation, 0.0, 0.0];
        let b = [0.5 * separation, 0.0, 0.0];
        Self::new(
            vec![a, b],
            vec![m1, m2],
            vec![Excision { center: a, radius: 0.5 * m1 }, Excision { center: b, radius: 0.5 * m2 }],
        )
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Mass-weighted center, or the centroid of the excisions without masses.
    pub fn barycenter(&self) -> [f64; 3] {
        let mut c = [0.0; 3];
        let (pts, wts): (Vec<[f64; 3]>, Vec<f64>) = if self.masses.is_empty() {
            (self.excisions.iter().map(|e| e.center).collect(), vec![1.0; self.excisions.len()])
        } else {
            (self.centers.clone(), self.masses.clone())
        };
        let total: f64 = wts.iter().sum();
        for (p, w) in pts.iter().zip(&wts) {
            for d in 0..3 {
                c[d] += w * p[d] / total;
            }
        }
        c
    }

    pub fn w(&self, x: [f64; 3]) -> f64 {
        1.0 + self
            .centers
            .iter()
            .zip(&self.masses)
            .map(|(c, m)| 0.5 * m / dist(x, *c))
            .sum::<f64>()
    }

    /// `∂ᵢw`.
    pub fn grad_w(&self, x: [f64; 3]) -> [f64; 3] {
        let mut g = [0.0; 3];
        for (c, m) in self.centers.iter().zip(&self.masses) {
            let d = dist(x, *c);
            for i in 0..3 {
                g[i] -= 0.5 * m * (x[i] - c[i]) / d.powi(3);
            }
        }
        g
    }

    /// `∂ᵢ∂ⱼw`.
    pub fn hess_w(&self, x: [f64; 3]) -> [[f64; 3]; 3] {
        let mut h = [[0.0; 3]; 3];
        for (c, m) in self.centers.iter().zip(&self.masses) {
            let d = dist(x, *c);
            let y = [x[0] - c[0], x[1] - c[1], x[2] - c[2]];
            for i in 0..3 {
                for j in 0..3 {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    h[i][j] += 0.5 * m * (3.0 * y[i] * y[j] / d.powi(5) - delta / d.powi(3));
                }
            }
        }
        h
    }

    /// Capacity guess used to seed the far-field closure.
    fn capacity_guess(&self) -> f64 {
        if self.masses.is_empty() {
            self.excisions.iter().map(|e| e.radius).sum()
        } else {
            self.total_mass()
        }
    }

    /// `g₀`-area `∫ w⁴ dσ_δ` of each excision boundary.
    pub fn boundary_areas(&self) -> Vec<f64> {
        self.excisions
            .iter()
            .map(|e| mass::sphere_integral(e.center, e.radius, |x, _| self.w(x).powi(4)))
            .collect()
    }

    /// Far-field model `1 − C/(|x − x_c| + M/2)`.
    pub fn far_field(&self, c: f64, x: [f64; 3]) -> f64 {
        1.0 - c / (dist(x, self.barycenter()) + 0.5 * self.total_mass())
    }

    /// Single center excised at its horizon, or a flat ball: the potential is
    /// the Schwarzschild (or flat) one and the triple is sub-static.
    pub fn is_schwarzschild(&self) -> bool {
        self.exact_potential([0.0, 0.0, 1e3]).is_some()
    }

    /// Closed-form potential for a single center or a flat ball.
    pub fn exact_potential(&self, x: [f64; 3]) -> Option<f64> {
        match (self.masses.len(), self.excisions.len()) {
            (0, 1) => {
                let e = self.excisions[0];
                Some(1.0 - e.radius / dist(x, e.center))
            }
            (1, 1) if self.excisions[0].center == self.centers[0]
                && (self.excisions[0].radius - 0.5 * self.masses[0]).abs() < 1e-15 =>
            {
                let m = self.masses[0];
                Some(1.0 - m / (dist(x, self.centers[0]) + 0.5 * m))
            }
            _ => None,
        }
    }
}

/// Uniform lattice with `n` nodes per axis on `[−L, L]³`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub n: usize,
    pub half_extent: f64,
}

impl Grid {
    pub fn new(n: usize, half_extent: f64) -> Result<Self> {
        if n < 8 || !(half_extent > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 8 nodes per axis and positive extent, got {n}, {half_extent}"
            )));
        }
        Ok(Self { n, half_extent })
    }

    pub fn h(&self) -> f64 {
        2.0 * self.half_extent / (self.n - 1) as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_extent + self.h() * i as f64
    }

    pub fn point(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        [self.coord(i), self.coord(j), self.coord(k)]
    }

    /// Linear index with `x` fastest.
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.n * (j + self.n * k)
    }

    pub fn unindex(&self, p: usize) -> (usize, usize, usize) {
        (p % self.n, (p / self.n) % self.n, p / (self.n * self.n))
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn on_boundary(&self, i: usize, j: usize, k: usize) -> bool {
        let e = self.n - 1;
        i == 0 || j == 0 || k == 0 || i == e || j == e || k == e
    }
}

/// Parameters of [`solve_field`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Target for `max |Δ_{g₀}u|` over active nodes.
    pub tol: f64,
    pub max_iterations: usize,
    /// Far-field closure iterations.
    pub closure_iterations: usize,
    /// Relative change of the capacity that ends the closure.
    pub closure_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iterations: 20_000, closure_iterations: 3, closure_tol: 1e-3 }
    }
}

/// Role of a lattice node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Active,
    /// Outer face of the box, holding far-field Dirichlet data.
    Outer,
    /// Inside the excision with the given index.
    Inside(u8),
    /// Outside, but so close to an excision that it is held at zero.
    Pinned,
}

/// Discrete harmonic potential on a grid.
#[derive(Debug, Clone)]
pub struct ScalarField3D {
    pub spec: ConformalFactorSpec,
    pub grid: Grid,
    pub values: Vec<f64>,
    pub kinds: Vec<NodeKind>,
    /// `max |Δ_{g₀}u|` over active nodes at exit.
    pub residual_norm: f64,
    pub stats: SolverStats,
    /// Capacity from the discrete flux, one entry per closure pass.
    pub capacity_history: Vec<f64>,
    /// Constant `C` of the outer Dirichlet data in the final pass.
    pub outer_constant: f64,
}

impl ScalarField3D {
    /// Capacity from the final discrete flux.
    pub fn capacity(&self) -> f64 {
        *self.capacity_history.last().expect("at least one closure pass")
    }

    pub fn is_active(&self, p: usize) -> bool {
        self.kinds[p] == NodeKind::Active
    }

    /// Discrete flux `∑ w²(u_out − u_in) h` through the faces of the index
    /// box `[lo, hi]³`, divided by `4π`.
    pub fn box_capacity(&self, lo: usize, hi: usize) -> Result<f64> {
        let g = self.grid;
        if lo == 0 || hi + 1 >= g.n || lo >= hi {
            return Err(Error::Truncation(format!("flux box [{lo}, {hi}] leaves the grid")));
        }
        let h = g.h();
        let mut flux = 0.0;
        for a in lo..=hi {
            for b in lo..=hi {
                for axis in 0..3 {
                    for (inner, outer) in [(lo, lo - 1), (hi, hi + 1)] {
                        let idx = |c: usize| match axis {
                            0 => g.index(c, a, b),
                            1 => g.index(a, c, b),
                            _ => g.index(a, b, c),
                        };
                        let (pi, po) = (idx(inner), idx(outer));
                        let mid = midpoint(g.point_of(pi), g.point_of(po));
                        let aw = self.spec.w(mid).powi(2);
                        flux += aw * (self.values[po] - self.values[pi]) * h;
                    }
                }
            }
        }
        Ok(flux / (4.0 * PI))
    }

    /// Trilinear interpolation of `u`.
    pub fn sample(&self, x: [f64; 3]) -> Option<f64> {
        let g = self.grid;
        let h = g.h();
        let mut idx = [0usize; 3];
        let mut frac = [0.0; 3];
        for d in 0..3 {
            let s = (x[d] + g.half_extent) / h;
            if !(s >= 0.0 && s <= (g.n - 1) as f64) {
                return None;
            }
            let i = (s.floor() as usize).min(g.n - 2);
            idx[d] = i;
            frac[d] = s - i as f64;
        }
        let mut v = 0.0;
        for c in 0..8 {
            let (dx, dy, dz) = (c & 1, (c >> 1) & 1, (c >> 2) & 1);
            let wgt = (if dx == 1 { frac[0] } else { 1.0 - frac[0] })
                * (if dy == 1 { frac[1] } else { 1.0 - frac[1] })
                * (if dz == 1 { frac[2] } else { 1.0 - frac[2] });
            v += wgt * self.values[g.index(idx[0] + dx, idx[1] + dy, idx[2] + dz)];
        }
        Some(v)
    }

    /// Coordinate gradient of `u` at a node by centered differences; `None`
    /// when a neighbor is not active.
    pub fn node_gradient(&self, p: usize) -> Option<[f64; 3]> {
        let g = self.grid;
        let (i, j, k) = g.unindex(p);
        if g.on_boundary(i, j, k) {
            return None;
        }
        let h = g.h();
        let strides = [1, g.n, g.n * g.n];
        let mut out = [0.0; 3];
        for d in 0..3 {
            let (a, b) = (p + strides[d], p - strides[d]);
            if self.kinds[a] != NodeKind::Active || self.kinds[b] != NodeKind::Active {
                return None;
            }
            out[d] = (self.values[a] - self.values[b]) / (2.0 * h);
        }
        Some(out)
    }

    /// `|Du|_{g₀} = w⁻²|∇u|` at a node.
    pub fn node_du(&self, p: usize) -> Option<f64> {
        let gr = self.node_gradient(p)?;
        let w = self.spec.w(self.grid.point_of(p));
        Some((gr[0] * gr[0] + gr[1] * gr[1] + gr[2] * gr[2]).sqrt() / (w * w))
    }

    /// Capacitary Penrose report from the grid capacity and the boundary
    /// area; requires a single excision.
    pub fn penrose(&self, tol: f64) -> Result<crate::monotone::PenroseReport> {
        let areas = self.spec.boundary_areas();
        let dim = crate::geometry::Dimension::new(3)?;
        crate::monotone::penrose_check(dim, self.capacity(), areas.iter().sum(), areas.len(), tol)
    }

    /// `0 ≤ u < 1` on every active node.
    pub fn values_in_range(&self) -> bool {
        self.values.iter().zip(&self.kinds).all(|(v, k)| *k != NodeKind::Active || (0.0..1.0).contains(v))
    }

    /// `u` is nondecreasing along rays leaving each excision along the six
    /// coordinate directions, checked at lattice spacing.
    pub fn radial_monotonicity_spot_check(&self) -> bool {
        let g = self.grid;
        let h = g.h();
        self.spec.excisions.iter().all(|e| {
            let dirs = [[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, -1.0]];
            dirs.iter().all(|d| {
                let mut prev = -1.0;
                let mut s = e.radius + h;
                loop {
                    let x = [e.center[0] + s * d[0], e.center[1] + s * d[1], e.center[2] + s * d[2]];
                    let Some(v) = self.sample(x) else { return true };
                    if self.spec.excisions.iter().any(|o| o.level(x) < h) && s > e.radius + 1.5 * h {
                        // Entered the neighborhood of another excision.
                        return true;
                    }
                    if v < prev - 1e-12 {
                        return false;
                    }
                    prev = v;
                    s += 0.5 * h;
                }
            })
        })
    }
}

impl Grid {
    pub fn point_of(&self, p: usize) -> [f64; 3] {
        let (i, j, k) = self.unindex(p);
        self.point(i, j, k)
    }
}

pub(crate) fn midpoint(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])]
}

/// Solves `Δ_{g₀}u = 0` with `u = 0` on the excisions and far-field data on
/// the box, iterating the far-field constant against the measured flux.
pub fn solve_field(spec: &ConformalFactorSpec, grid: Grid, options: SolveOptions) -> Result<ScalarField3D> {
    let l = grid.half_extent;
    let h = grid.h();
    for e in &spec.excisions {
        if e.center.iter().any(|c| c.abs() + e.radius >= l - 2.0 * h) {
            return Err(Error::Truncation("excision overlaps the grid boundary".into()));
        }
        if e.radius < 1.5 * h {
            return Err(Error::InvalidParameter(format!(
                "excision radius {} is under 1.5 grid spacings",
                e.radius
            )));
        }
    }
    let mut c_est = spec.capacity_guess();
    let mut system = solver::System::assemble(spec, grid, c_est);
    let mut values = system.initial_guess(spec);
    let mut history = Vec::new();
    let mut stats = SolverStats::default();
    let mut residual = f64::INFINITY;
    for pass in 0..options.closure_iterations.max(1) {
        if pass > 0 {
            system.set_outer_constant(spec, c_est, &mut values);
        }
        let s = system.solve(&mut values, options.tol, options.max_iterations)?;
        residual = s.final_residual;
        stats.merge(s);
        let c_new = system.flux_capacity(&values);
        history.push(c_new);
        let change = (c_new - c_est).abs() / c_new.abs();
        c_est = c_new;
        if change < options.closure_tol {
            break;
        }
    }
    Ok(ScalarField3D {
        spec: spec.clone(),
        grid,
        kinds: system.kinds().to_vec(),
        values,
        residual_norm: residual,
        stats,
        capacity_history: history,
        outer_constant: system.outer_constant(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        assert!(ConformalFactorSpec::two_centers(0.5, 0.5, 0.4).is_err());
        assert!(ConformalFactorSpec::new(vec![[0.0; 3]], vec![-1.0], vec![Excision { center: [0.0; 3], radius: 1.0 }]).is_err());
        assert!(ConformalFactorSpec::new(vec![[3.0, 0.0, 0.0]], vec![1.0], vec![Excision { center: [0.0; 3], radius: 1.0 }]).is_err());
        assert!(ConformalFactorSpec::flat_ball(0.0).is_err());
    }

    #[test]
    fn w_derivatives_match_differences() {
        let spec = ConformalFactorSpec::two_centers(0.7, 0.3, 3.0).unwrap();
        let x = [0.4, -0.9, 1.3];
        let h = 1e-5;
        let g = spec.grad_w(x);
        let hw = spec.hess_w(x);
        for d in 0..3 {
            let mut a = x;
            let mut b = x;
            a[d] += h;
            b[d] -= h;
            assert!(((spec.w(a) - spec.w(b)) / (2.0 * h) - g[d]).abs() < 1e-8);
            let (ga, gb) = (spec.grad_w(a), spec.grad_w(b));
            for e in 0..3 {
                assert!(((ga[e] - gb[e]) / (2.0 * h) - hw[d][e]).abs() < 1e-7);
            }
        }
        assert!((hw[0][0] + hw[1][1] + hw[2][2]).abs() < 1e-12);
    }

    #[test]
    fn isotropic_potential_is_schwarzschild() {
        let spec = ConformalFactorSpec::single_center(2.0).unwrap();
        assert!(spec.is_schwarzschild());
        let x = [1.0, 2.0, 2.0];
        // (1 − m/2ρ)/(1 + m/2ρ) with ρ = 3.
        let expected = (1.0 - 1.0 / 3.0) / (1.0 + 1.0 / 3.0);
        assert!((spec.exact_potential(x).unwrap() - expected).abs() < 1e-15);
        assert!(!ConformalFactorSpec::two_centers(0.5, 0.5, 4.0).unwrap().is_schwarzschild());
    }

    #[test]
    fn horizon_area_is_sixteen_pi() {
        let spec = ConformalFactorSpec::single_center(1.0).unwrap();
        let area = spec.boundary_areas()[0];
        assert!((area - 16.0 * PI).abs() < 1e-12 * area);
    }

    #[test]
    fn grid_indexing_round_trips() {
        let g = Grid::new(9, 2.0).unwrap();
        for p in [0, 17, 400, g.len() - 1] {
            let (i, j, k) = g.unindex(p);
            assert_eq!(g.index(i, j, k), p);
        }
        assert_eq!(g.coord(0), -2.0);
        assert!((g.coord(8) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn excision_must_clear_the_box() {
        let spec = ConformalFactorSpec::single_center(1.0).unwrap();
        let err = solve_field(&spec, Grid::new(16, 0.6).unwrap(), SolveOptions::default());
        assert!(matches!(err, Err(Error::Truncation(_))));
    }

    #[test]
    fn iteration_cap_is_reported() {
        let spec = ConformalFactorSpec::single_center(1.0).unwrap();
        let opts = SolveOptions { max_iterations: 3, ..SolveOptions::default() };
        let err = solve_field(&spec, Grid::new(24, 3.0).unwrap(), opts);
        assert!(matches!(err, Err(Error::NonConvergence { .. })));
    }
}
