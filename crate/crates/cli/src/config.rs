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

//! Experiment configuration: TOML with every key optional and unknown keys
//! rejected. Command-line flags override file values.

use std::path::{Path, PathBuf};

use capacitary::conformal::S_MIN;
use capacitary::field3d::{ConformalFactorSpec, Grid};
use capacitary::geometry::{flat_profile, reissner_nordstrom_profile, schwarzschild_profile, Dimension, WarpProfile};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileName {
    Schwarzschild,
    ReissnerNordstrom,
    Flat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TripleConfig {
    pub kind: ProfileName,
    pub n: usize,
    pub m: f64,
    pub q: f64,
    /// Boundary radius of the flat exterior.
    pub r0: f64,
    /// Truncation radius over `r0`.
    pub r_max_factor: f64,
}

impl Default for TripleConfig {
    fn default() -> Self {
        Self { kind: ProfileName::Schwarzschild, n: 3, m: 1.0, q: 0.0, r0: 1.0, r_max_factor: 1e4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    /// Geometric grid on `τ − 1`.
    pub tau_min: f64,
    pub tau_max: f64,
    pub tau_count: usize,
    /// Geometric grid on `s`.
    pub s_min: f64,
    pub s_max: f64,
    pub s_count: usize,
    /// Radii per table or curvature listing, geometric from `r0` to `r_max`.
    pub radius_count: usize,
    /// Random radii for the pointwise conformal checks.
    pub samples: usize,
    /// `[s_low, s_high]` windows of the integral identities.
    pub windows: Vec<[f64; 2]>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            tau_min: 1e-3,
            tau_max: 1e3,
            tau_count: 200,
            s_min: 0.05,
            s_max: 10.0,
            s_count: 60,
            radius_count: 200,
            samples: 1000,
            windows: vec![[0.1, 2.0], [0.5, 6.0]],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToleranceConfig {
    /// Relative tolerance of the radial quadratures.
    pub quadrature: f64,
    /// Target for `max |Δ_{g₀}u|` of the grid solver.
    pub solver: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self { quadrature: capacitary::tolerances::QUADRATURE, solver: 1e-8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    SingleCenter,
    TwoCenters,
    FlatBall,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldConfig {
    pub kind: FieldKind,
    /// Mass of the single center, or of the first of two.
    pub m: f64,
    pub m2: f64,
    pub separation: f64,
    /// Radius of the flat ball.
    pub radius: f64,
    pub nodes: usize,
    pub half_extent: f64,
    pub levels: Vec<f64>,
    /// Coordinate radii of the ADM mass spheres.
    pub mass_radii: Vec<f64>,
    pub snapshot: bool,
}

impl Default for FieldConfig {
    fn default() -> Self {
        Self {
            kind: FieldKind::SingleCenter,
            m: 1.0,
            m2: 0.5,
            separation: 4.0,
            radius: 1.0,
            nodes: 96,
            half_extent: 4.0,
            levels: vec![0.3, 0.4, 0.5, 0.6, 0.7],
            mass_radii: vec![25.0, 50.0, 100.0, 200.0],
            snapshot: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub beta: Vec<f64>,
    pub triple: TripleConfig,
    pub grids: GridConfig,
    pub tolerances: ToleranceConfig,
    pub field: FieldConfig,
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            beta: vec![1.0],
            triple: TripleConfig::default(),
            grids: GridConfig::default(),
            tolerances: ToleranceConfig::default(),
            field: FieldConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {msg}"))
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Canonical serialization.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// SHA-256 of the canonical form without the output location, so the
    /// same experiment hashes alike wherever it is written.
    pub fn experiment_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut c = self.clone();
        c.output = OutputConfig::default();
        Sha256::digest(c.canonical().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn profile(&self) -> Result<WarpProfile, CliError> {
        let t = &self.triple;
        let n = Dimension::new(t.n).map_err(|e| invalid("triple.n", e))?;
        let p = match t.kind {
            ProfileName::Schwarzschild => schwarzschild_profile(n, t.m),
            ProfileName::ReissnerNordstrom => reissner_nordstrom_profile(n, t.m, t.q),
            ProfileName::Flat => flat_profile(n, t.r0),
        };
        p.map_err(|e| invalid("triple", e))
    }

    pub fn field_spec(&self) -> Result<ConformalFactorSpec, CliError> {
        let f = &self.field;
        let s = match f.kind {
            FieldKind::SingleCenter => ConformalFactorSpec::single_center(f.m),
            FieldKind::TwoCenters => ConformalFactorSpec::two_centers(f.m, f.m2, f.separation),
            FieldKind::FlatBall => ConformalFactorSpec::flat_ball(f.radius),
        };
        s.map_err(|e| invalid("field", e))
    }

    pub fn field_grid(&self) -> Result<Grid, CliError> {
        Grid::new(self.field.nodes, self.field.half_extent).map_err(|e| invalid("field.nodes", e))
    }

    /// Checks every parameter before any computation runs.
    pub fn validate(&self) -> Result<(), CliError> {
        self.profile()?;
        self.field_spec()?;
        self.field_grid()?;
        if self.beta.is_empty() || self.beta.iter().any(|b| !(*b >= 0.0 && b.is_finite())) {
            return Err(invalid("beta", "needs at least one finite value ≥ 0"));
        }
        let g = &self.grids;
        if !(g.tau_min > 0.0 && g.tau_max > g.tau_min) || g.tau_count < 3 {
            return Err(invalid("grids.tau_*", "need 0 < tau_min < tau_max and tau_count ≥ 3"));
        }
        if !(g.s_min > 0.0 && g.s_max > g.s_min) || g.s_count < 3 {
            return Err(invalid("grids.s_*", "need 0 < s_min < s_max and s_count ≥ 3"));
        }
        if g.radius_count < 2 || g.samples == 0 {
            return Err(invalid("grids", "radius_count ≥ 2 and samples ≥ 1 are required"));
        }
        if let Some(w) = g.windows.iter().find(|w| !(w[0] >= S_MIN && w[1] > w[0])) {
            return Err(invalid("grids.windows", format!("window {w:?} needs {S_MIN} ≤ s_low < s_high")));
        }
        let t = &self.tolerances;
        if !(t.quadrature > 0.0 && t.solver > 0.0) {
            return Err(invalid("tolerances", "must be positive"));
        }
        if !(self.triple.r_max_factor >= capacitary::radial::MIN_R_MAX_FACTOR) {
            return Err(invalid("triple.r_max_factor", format!("must be ≥ {}", capacitary::radial::MIN_R_MAX_FACTOR)));
        }
        if self.field.levels.iter().any(|l| !(*l > 0.0 && *l < 1.0)) {
            return Err(invalid("field.levels", "levels lie in (0, 1)"));
        }
        if self.field.mass_radii.iter().any(|r| !(*r > 0.0)) {
            return Err(invalid("field.mass_radii", "radii must be positive"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_the_default() {
        assert_eq!(ExperimentConfig::from_toml("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn canonical_form_round_trips() {
        let c = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::from_toml(&c.canonical()).unwrap(), c);
    }

    #[test]
    fn hash_ignores_the_output_directory() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        b.output.dir = PathBuf::from("elsewhere");
        assert_eq!(a.experiment_hash(), b.experiment_hash());
        b.seed += 1;
        assert_ne!(a.experiment_hash(), b.experiment_hash());
    }

    #[test]
    fn unknown_keys_are_rejected_with_location() {
        let err = ExperimentConfig::from_toml("[triple]\nkind = \"flat\"\nmass = 2\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("mass") && msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn validation_names_the_field() {
        let mut c = ExperimentConfig::default();
        c.triple.n = 2;
        assert!(c.validate().unwrap_err().to_string().contains("triple.n"));
        let mut c = ExperimentConfig::default();
        c.grids.windows = vec![[0.0, 1.0]];
        assert!(c.validate().unwrap_err().to_string().contains("grids.windows"));
    }
}
