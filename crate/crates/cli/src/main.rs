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

//! `capacitary`: configuration-driven experiment runner.
//!
//! Exit codes: 0 when every verdict passes, 2 when a theorem-backed verdict
//! fails, 3 on a computational or usage error or a failed numerical target.

mod config;
mod emit;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::config::ExperimentConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Compute(#[from] capacitary::Error),

    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Schwarzschild triple: potential, curvature, capacity and sub-static check.
    Schwarzschild,
    /// Triple of the configured profile: potential, curvature and capacity.
    Radial,
    /// Monotone quantity `F_β` along the levels of the potential.
    Monotone,
    /// Capacitary Penrose inequality.
    Penrose,
    /// Pointwise conformal inequalities and the `Φ_β` curves.
    ConformalCheck,
    /// Boundary-versus-volume integral identities.
    Identity,
    /// Grid solve of the conformally flat potential with level-set analysis.
    Field3d,
    /// ADM mass from the flux and Ricci integrals.
    Adm,
    /// Full invariant suite.
    Selftest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Schwarzschild => "schwarzschild",
            Command::Radial => "radial",
            Command::Monotone => "monotone",
            Command::Penrose => "penrose",
            Command::ConformalCheck => "conformal-check",
            Command::Identity => "identity",
            Command::Field3d => "field3d",
            Command::Adm => "adm",
            Command::Selftest => "selftest",
        }
    }

    /// Subcommands driven by the grid solver rather than a radial triple.
    fn uses_field(self) -> bool {
        matches!(self, Command::Field3d | Command::Adm | Command::Selftest)
    }
}

#[derive(Debug, Parser)]
#[command(name = "capacitary", version, about = "Capacitary monotonicity experiments")]
pub struct Cli {
    /// TOML experiment configuration; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Comma-separated exponents `β`.
    #[arg(long, global = true, value_delimiter = ',', num_args = 1..)]
    beta: Option<Vec<f64>>,
    /// Dimension of the radial triple.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Mass of the triple, or of the first grid center.
    #[arg(long, global = true)]
    m: Option<f64>,
    /// Charge of the Reissner–Nordström triple.
    #[arg(long, global = true)]
    q: Option<f64>,
    /// Solver tolerance for grid subcommands, quadrature tolerance otherwise.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Nodes per axis for grid subcommands, `τ` samples otherwise.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Seed of the sample-point draws.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

impl Cli {
    /// Effective configuration: file values overridden by flags.
    fn effective_config(&self) -> Result<ExperimentConfig, CliError> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        let field = self.command.uses_field();
        if self.command == Command::Schwarzschild {
            c.triple.kind = config::ProfileName::Schwarzschild;
        }
        if let Some(dir) = &self.out {
            c.output.dir = dir.clone();
        }
        if let Some(beta) = &self.beta {
            c.beta = beta.clone();
        }
        if let Some(n) = self.n {
            c.triple.n = n;
        }
        if let Some(m) = self.m {
            if field {
                c.field.m = m;
            } else {
                c.triple.m = m;
            }
        }
        if let Some(q) = self.q {
            c.triple.q = q;
        }
        if let Some(tol) = self.tol {
            if field {
                c.tolerances.solver = tol;
            } else {
                c.tolerances.quadrature = tol;
            }
        }
        if let Some(grid) = self.grid {
            if field {
                c.field.nodes = grid;
            } else {
                c.grids.tau_count = grid;
            }
        }
        if let Some(seed) = self.seed {
            c.seed = seed;
        }
        c.validate()?;
        Ok(c)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 3 } else { 0 });
        }
    };
    let outcome = cli.effective_config().and_then(|config| {
        let bundle = run::run(cli.command, &config)?;
        emit::emit(&bundle, &config, cli.command)?;
        Ok(bundle)
    });
    match outcome {
        Ok(bundle) => {
            let code = bundle.exit_code();
            for v in bundle.verdicts.iter().filter(|v| !v.passed) {
                eprintln!("FAIL {} (value {:e}, tolerance {:e})", v.name, v.value, v.tolerance);
            }
            println!(
                "{}: {} verdicts, {} failed; results in {}",
                cli.command.name(),
                bundle.verdicts.len(),
                bundle.verdicts.iter().filter(|v| !v.passed).count(),
                bundle.out_dir.display()
            );
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
