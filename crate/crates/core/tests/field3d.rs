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


//! Grid potentials on coarse lattices. The full-resolution checks live in
//! the acceptance suite.

use std::f64::consts::PI;
use std::sync::OnceLock;

use capacitary::field3d::*;
use capacitary::Error;

fn single(n: usize) -> &'static ScalarField3D {
    static F65: OnceLock<ScalarField3D> = OnceLock::new();
    static F33: OnceLock<ScalarField3D> = OnceLock::new();
    let cell = if n == 65 { &F65 } else { &F33 };
    cell.get_or_init(|| {
        let spec = ConformalFactorSpec::single_center(1.0).unwrap();
        solve_field(&spec, Grid::new(n, 4.0).unwrap(), SolveOptions::default()).unwrap()
    })
}

#[test]
fn flat_ball_capacity_is_radius() {
    let spec = ConformalFactorSpec::flat_ball(1.0).unwrap();
    let f = solve_field(&spec, Grid::new(64, 5.0).unwrap(), SolveOptions::default()).unwrap();
    assert!((f.capacity() - 1.0).abs() < 0.01, "{}", f.capacity());
    let x = [2.0, 1.0, 0.5];
    let exact = spec.exact_potential(x).unwrap();
    assert!((f.sample(x).unwrap() - exact).abs() < 5e-3);
}

#[test]
fn single_center_invariants() {
    let f = single(65);
    assert!(f.residual_norm < SolveOptions::default().tol);
    assert!(f.values_in_range());
    assert!(f.radial_monotonicity_spot_check());
    assert!(f.stats.max_history_increase() <= 0.0, "{}", f.stats.max_history_increase());
    assert!((f.capacity() - 1.0).abs() < 0.02);
}

#[test]
fn flux_is_the_same_through_nested_boxes() {
    let f = single(65);
    let c = f.capacity();
    for (lo, hi) in [(16, 48), (8, 56), (2, 62)] {
        assert!((f.box_capacity(lo, hi).unwrap() - c).abs() < 1e-6 * c);
    }
    assert!(f.box_capacity(0, 64).is_err());
}

#[test]
fn refinement_reduces_capacity_error() {
    let coarse = (single(33).capacity() - 1.0).abs();
    let fine = (single(65).capacity() - 1.0).abs();
    assert!(fine <= 0.5 * coarse, "{coarse} -> {fine}");
}

#[test]
fn level_mesh_is_a_closed_sphere() {
    let s = extract_level(single(65), 0.5).unwrap();
    assert_eq!(s.component_count(), 1);
    assert_eq!(s.euler, vec![2]);
    assert!(!s.near_critical());
    // Areal radius 2/(1 − t²) of Schwarzschild with m = 1.
    let exact = 4.0 * PI * (2.0f64 / 0.75).powi(2);
    assert!((s.area() / exact - 1.0).abs() < 0.02);
}

#[test]
fn level_outside_the_grid_is_truncated() {
    let f = single(65);
    assert!(matches!(extract_level(f, 0.8), Err(Error::Truncation(_))));
    assert!(extract_level(f, 1.5).is_err());
}

#[test]
fn zero_beta_integral_is_the_flux() {
    let f = single(65);
    let f0 = surface_integral_f(f, 0.5, 0.0).unwrap();
    assert!((f0 / (4.0 * PI * f.capacity()) - 1.0).abs() < 0.02);
}

#[test]
fn coarea_estimator_matches_mesh() {
    let f = single(65);
    let mesh = surface_integral_f(f, 0.5, 1.0).unwrap();
    let coarea = coarea_integral_f(f, 0.5, 0.05, 1.0).unwrap();
    assert!((mesh / coarea - 1.0).abs() < 0.02);
    assert!(coarea_integral_f(f, 0.02, 0.05, 1.0).is_err());
}

#[test]
fn scan_is_flat_on_schwarzschild() {
    let scan = monotonicity_scan(single(65), 1.0, &[0.3, 0.4, 0.5, 0.6, 0.7]).unwrap();
    assert!(scan.skipped.is_empty());
    assert!(!scan.informational);
    assert!(scan.relative_spread < DISCRETIZATION);
    assert!(find_critical_points(single(65)).is_empty());
}

#[test]
fn snapshot_round_trip() {
    let f = single(33);
    let dir = tempfile_dir();
    let path = dir.join("single.grid");
    write_snapshot(&path, f).unwrap();
    let snap = read_snapshot(&path).unwrap();
    assert_eq!(snap.values, f.values);
    assert_eq!(snap.grid, f.grid);
    assert_eq!(snap.excisions, f.spec.excisions);
    std::fs::remove_dir_all(dir).unwrap();
}

fn tempfile_dir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("capacitary-field3d-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn field_mass_respects_the_grid() {
    let f = single(33);
    assert!(matches!(f.adm_mass(&[10.0]), Err(Error::Truncation(_))));
    let est = f.adm_mass(&[3.0]).unwrap();
    assert!((est[0].m_ricci - 1.0).abs() < 1e-10);
}

#[test]
fn penrose_on_the_grid() {
    let f = single(65);
    let report = f.penrose(capacitary::tolerances::FIELD_CAPACITY).unwrap();
    assert!((report.rhs - 1.0).abs() < 1e-12);
    assert!(report.equality);
    let two = ConformalFactorSpec::two_centers(0.5, 0.5, 4.0).unwrap();
    assert_eq!(two.boundary_areas().len(), 2);
}
