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

//! Subcommand drivers. Each builds a [`ResultBundle`] from a validated
//! configuration and performs no output besides optional snapshots.

use capacitary::conformal::{
    conformal_state, cylinder_limit_check, div_y_integrand, hess_phi_norm2_expansion, integral_identity_residual_with,
    kato_check, monotone_quotient_check, phi_curve, x_identity_residual, IdentityResidual, DEFAULT_PANELS, S_MIN,
};
use capacitary::field3d::{
    adm_mass, extract_level, find_critical_points, morse_transition, solve_field, surface_integral_f, write_snapshot,
    ConformalFactorSpec, SolveOptions,
};
use capacitary::geometry::{log_grid, substatic_check, ProfileKind, SubStaticReport};
use capacitary::monotone::{beta_threshold, limit_f, monotone_curve, penrose_radial, tau_grid, MonotoneCurve};
use capacitary::radial::{solve_radial_potential, RadialTriple};
use capacitary::selftest::{self, SelftestOptions};
use capacitary::tolerances as tol;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{ExperimentConfig, FieldKind};
use crate::emit::{Cell, ResultBundle, Table, Verdict};
use crate::{CliError, Command};

/// Offset of the levels compared on either side of a critical value.
const MORSE_OFFSET: f64 = 0.02;

pub fn run(command: Command, config: &ExperimentConfig) -> Result<ResultBundle, CliError> {
    let mut bundle = ResultBundle { out_dir: config.output.dir.clone(), ..Default::default() };
    let b = &mut bundle;
    match command {
        Command::Schwarzschild => schwarzschild(b, config)?,
        Command::Radial => radial(b, config).map(|_| ())?,
        Command::Monotone => monotone(b, config)?,
        Command::Penrose => penrose(b, config)?,
        Command::ConformalCheck => conformal(b, config)?,
        Command::Identity => identity(b, config)?,
        Command::Field3d => field3d(b, config)?,
        Command::Adm => adm(b, config)?,
        Command::Selftest => selftest_suite(b, config)?,
    }
    Ok(bundle)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Radii strictly inside the domain of the triple.
fn radii(triple: &RadialTriple, count: usize) -> Vec<f64> {
    log_grid(triple.r0() * (1.0 + 1e-3), triple.r_max(), count)
}

fn solve_triple(config: &ExperimentConfig) -> Result<RadialTriple, CliError> {
    let profile = config.profile()?;
    let r_max = config.triple.r_max_factor * profile.r0();
    Ok(solve_radial_potential(&profile, r_max, config.tolerances.quadrature)?)
}

fn substatic(triple: &RadialTriple, config: &ExperimentConfig, bundle: &mut ResultBundle) -> Result<SubStaticReport, CliError> {
    let report = substatic_check(triple, &radii(triple, config.grids.radius_count))?;
    bundle
        .report("substatic")
        .num("global_min", report.global_min)
        .num("tolerance", report.tol)
        .text("is_substatic", report.is_substatic);
    Ok(report)
}

/// Potential, curvature and capacity tables shared by the radial commands.
fn radial(bundle: &mut ResultBundle, config: &ExperimentConfig) -> Result<(RadialTriple, SubStaticReport), CliError> {
    let triple = solve_triple(config)?;
    let sub = substatic(&triple, config, bundle)?;
    let mut table = Table::new(
        "radial.csv",
        &["r", "u", "du", "ricci_radial", "ricci_tangential", "scalar", "trace_defect", "substatic_min"],
    );
    let n = triple.dimension();
    let mut trace = 0.0f64;
    for &(r, smin) in &sub.samples {
        let c = triple.curvature_point(r)?;
        let defect = c.trace_defect(n);
        trace = trace.max(defect.abs());
        table.push(vec![
            r.into(),
            triple.u(r)?.into(),
            triple.du_norm(r).into(),
            c.ricci_radial.into(),
            c.ricci_tangential.into(),
            c.scalar.into(),
            defect.into(),
            smin.into(),
        ]);
    }
    bundle.tables.push(table);

    let cap = triple.capacity()?;
    let r0 = triple.r0();
    let asym = triple.asymptotic_expansion_check(&[10.0 * r0, 100.0 * r0, 1000.0 * r0])?;
    bundle
        .report("triple")
        .text("label", triple.label())
        .text("n", n.get())
        .num("r0", r0)
        .num("r_max", triple.r_max())
        .num("flux_constant", triple.flux_constant())
        .num("normalization_error", triple.normalization_error());
    bundle
        .report("capacity")
        .num("flux_at_boundary", cap.flux_at_boundary)
        .num("flux_at_infinity", cap.flux_at_infinity)
        .num("dirichlet_energy", cap.dirichlet_energy)
        .num("agreed_value", cap.agreed_value)
        .num("max_rel_spread", cap.max_rel_spread)
        .num("max_value_residual", asym.max_value_residual)
        .num("max_derivative_residual", asym.max_derivative_residual)
        .text("expansion_decaying", asym.decaying);
    bundle.below("capacity: estimates agree", cap.max_rel_spread, tol::CAPACITY_SPREAD, false);
    bundle.below("curvature: trace identity", trace, tol::TRACE_IDENTITY * (1.0 + max_abs_scalar(&triple, &sub)?), false);
    bundle.holds("capacity: far-field expansion residuals decay", asym.decaying, false);
    Ok((triple, sub))
}

fn max_abs_scalar(triple: &RadialTriple, sub: &SubStaticReport) -> Result<f64, CliError> {
    let mut m = 0.0f64;
    for &(r, _) in &sub.samples {
        let c = triple.curvature_point(r)?;
        m = m.max(c.ricci_radial.abs()).max(c.ricci_tangential.abs());
    }
    Ok(m)
}

fn schwarzschild(bundle: &mut ResultBundle, config: &ExperimentConfig) -> Result<(), CliError> {
    let (triple, sub) = radial(bundle, config)?;
    let m = config.triple.m;
    let k = (triple.dimension().get() - 2) as i32;
    let r0 = triple.r0();
    let mut potential = 0.0f64;
    let mut scalar = 0.0f64;
    for &(r, _) in &sub.samples {
        let exact = (1.0 - (r0 / r).powi(k)).max(0.0).sqrt();
        potential = potential.max((triple.u(r)? - exact).abs());
        scalar = scalar.max(triple.curvature_point(r)?.scalar.abs());
    }
    bundle.below("schwarzschild: closed-form potential", potential, tol::SCHWARZSCHILD_POTENTIAL, false);
    bundle.below("schwarzschild: scalar flat", scalar, tol::SCALAR_FLAT, true);
    bundle.below("schwarzschild: capacity = mass", rel(triple.capacity()?.agreed_value, m), tol::CAPACITY_MASS, true);
    bundle.nonnegative("schwarzschild: sub-static", sub.global_min, sub.tol, true);
    Ok(())
}

fn curve_rows(table: &mut Table, curve: &MonotoneCurve) {
    for s in &curve.samples {
        let mut flags = Vec::new();
        if s.derivative_mismatch {
            flags.push("derivative_mismatch");
        }
        if curve.no_theorem {
            flags.push("no_theorem");
        }
        table.push(vec![
            curve.beta.into(),
            s.x.into(),
            s.t.into(),
            s.value.into(),
            s.analytic_derivative.into(),
            s.fd_derivative.into(),
            flags.join(";").into(),
        ]);
    }
}

fn monotone(bundle: &mut ResultBundle, config: &ExperimentConfig) -> Result<(), CliError> {
    let triple = solve_triple(config)?;
    let sub = substatic(&triple, config, bundle)?;
    let g = &config.grids;
    let taus = tau_grid(g.tau_min, g.tau_max, g.tau_count);
    let mut table = Table::new("monotone.csv", &["beta", "tau", "t", "F", "dF_analytic", "dF_fd", "flags"]);
    for &beta in &config.beta {
        let curve = monotone_curve(&triple, beta, &taus)?;
        curve_rows(&mut table, &curve);
        let label = format!("monotone β={beta}");
        let report = bundle.report(label.clone());
        report
            .num("max_dF_fd", curve.max_fd_derivative())
            .num("min_slope_increment", curve.min_slope_increment())
            .num("verdict_tolerance", curve.verdict_tol)
            .text("nonincreasing", curve.nonincreasing)
            .text("convex", curve.convex)
            .text("theorem_applies", sub.is_substatic && !curve.no_theorem);
        match limit_f(&triple, beta) {
            Ok(l) => {
                report.num("limit_closed_form", l.closed_form).num("limit_numeric", l.numeric).text("limit_flagged", l.flagged);
            }
            Err(e) => {
                report.text("limit", e);
            }
        }
        let mismatches = curve.samples.iter().filter(|s| s.derivative_mismatch).count();
        bundle.below(format!("{label}: derivative columns agree"), mismatches as f64, 0.0, false);
        // Outside the theorem the curve is reported without a verdict.
        if sub.is_substatic && !curve.no_theorem {
            bundle.below(format!("{label}: nonincreasing"), curve.max_fd_derivative(), curve.verdict_tol, true);
            bundle.nonnegative(format!("{label}: convex"), curve.min_slope_increment(), curve.verdict_tol, true);
        }
    }
    bundle.tables.push(table);
    Ok(())
}

fn penrose(bundle: &mut ResultBundle, config: &ExperimentConfig) -> Result<(), CliError> {
    let triple = solve_triple(config)?;
    let sub = substatic(&triple, config, bundle)?;
    let p = penrose_radial(&triple)?;
    let mut table = Table::new("penrose.csv", &["capacity", "area", "rhs", "margin"]);
    table.push(vec![p.capacity.into(), p.boundary_area.into(), p.rhs.into(), p.margin.into()]);
    bundle.tables.push(table);
    bundle
        .report("penrose")
        .num("capacity", p.capacity)
        .num("area", p.boundary_area)
        .num("rhs", p.rhs)
        .num("margin", p.margin)
        .num("tolerance", p.tol)
        .text("equality", p.equality);
    bundle.nonnegative("penrose: capacity ≥ area bound", p.margin, p.tol, sub.is_substatic);
    if matches!(triple.profile().kind(), ProfileKind::Schwarzschild { .. }) {
        bundle.below("penrose: equality on Schwarzschild", p.margin.abs(), p.tol, true);
    }
    Ok(())
}

fn conformal(bundle: &mut ResultBundle, config: &ExperimentConfig) -> Result<(), CliError> {
    let triple = solve_triple(config)?;
    let sub = substatic(&triple, config, bundle)?;
    let n = triple.dimension();
    let threshold = beta_threshold(n);
    let (r0, r1) = (triple.r0(), triple.r_max());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut table = Table::new(
        "conformal.csv",
        &["r", "u", "phi", "grad_phi", "hess_phi2", "grad_grad2", "kato_margin", "star_defect", "expansion_defect"],
    );
    let (mut star, mut kato, mut expansion, mut div_y) = (0.0f64, f64::INFINITY, 0.0f64, f64::INFINITY);
    let div_betas: Vec<f64> = config.beta.iter().copied().filter(|b| *b >= threshold).collect();
    for _ in 0..config.grids.samples {
        let r = r0 * (r1 / r0).powf(rng.gen_range(0.0..1.0)).max(1.0 + 1e-9);
        let st = conformal_state(&triple, r)?;
        let defect = st.star_defect(n.as_f64());
        let margin = if st.grad_phi_norm > tol::KATO_GRADIENT_FLOOR { kato_check(n.get(), &st)? } else { f64::NAN };
        let e = hess_phi_norm2_expansion(&triple, &st);
        let exp_defect = (e - st.hess_phi_norm2).abs() / e.abs().max(1.0);
        star = star.max(defect);
        kato = kato.min(if margin.is_nan() { f64::INFINITY } else { margin });
        expansion = expansion.max(exp_defect);
        if sub.is_substatic && st.phi >= S_MIN {
            for &beta in &div_betas {
                div_y = div_y.min(div_y_integrand(&st, beta)?);
            }
        }
        table.push(vec![
            r.into(),
            st.u.into(),
            st.phi.into(),
            st.grad_phi_norm.into(),
            st.hess_phi_norm2.into(),
            st.grad_of_grad_norm2.into(),
            margin.into(),
            defect.into(),
            exp_defect.into(),
        ]);
    }
    bundle.tables.push(table);
    bundle.below("conformal: gradient identity", star, tol::CONFORMAL_POINTWISE, false);
    bundle.nonnegative("conformal: refined Kato", kato, tol::KATO, true);
    bundle.below("conformal: |∇²φ|² expansion", expansion, tol::CONFORMAL_POINTWISE, false);
    if sub.is_substatic && !div_betas.is_empty() {
        bundle.nonnegative("conformal: div Y ≥ 0", div_y, tol::DIV_Y, true);
    }

    let g = &config.grids;
    let ss = log_grid(g.s_min, g.s_max, g.s_count);
    let mut phi_table = Table::new("phi.csv", &["beta", "s", "t", "Phi", "dPhi_analytic", "dPhi_fd", "flags"]);
    for &beta in &config.beta {
        let curve = phi_curve(&triple, beta, &ss)?;
        curve_rows(&mut phi_table, &curve);
        let mismatches = curve.samples.iter().filter(|s| s.derivative_mismatch).count();
        bundle.below(format!("conformal β={beta}: Φ' representation"), mismatches as f64, 0.0, false);
        if sub.is_substatic {
            let q = monotone_quotient_check(&triple, beta, &ss)?;
            bundle.nonnegative(format!("conformal β={beta}: monotone quotient"), q.min_increment, tol::QUOTIENT, true);
        }
    }
    bundle.tables.push(phi_table);

    if matches!(triple.profile().kind(), ProfileKind::Schwarzschild { .. }) {
        let c = cylinder_limit_check(&triple)?;
        bundle
            .report("cylinder")
            .num("sup_grad_phi", c.sup_grad_phi)
            .num("sup_hess_phi", c.sup_hess_phi)
            .num("sup_area_g", c.sup_area_g)
            .num("grad_limit_expected", c.grad_limit_expected)
            .num("grad_at_far", c.grad_at_far)
            .num("area_limit_expected", c.area_limit_expected)
            .num("area_at_far", c.area_at_far)
            .num("hess2_at_far", c.hess2_at_far)
            .num("hess2_stated_limit", c.hess2_stated_limit)
            .text("hess2_discrepancy", c.hess2_discrepancy);
    }
    Ok(())
}

fn identity_row(table: &mut Table, r: &IdentityResidual) {
    table.push(vec![
        r.s_low.into(),
        r.s_high.into(),
        r.lhs_boundary.into(),
        r.rhs_volume.into(),
        r.residual.into(),
        r.relative_residual.into(),
    ]);
}

fn identity(bundle: &mut ResultBundle, config: &ExperimentConfig) -> Result<(), CliError> {
    let triple = solve_triple(config)?;
    let threshold = beta_threshold(triple.dimension());
    let header = ["s_low", "s_high", "lhs", "rhs", "residual", "relative_residual"];
    let score = |r: &IdentityResidual| if r.at_roundoff() { 0.0 } else { r.relative_residual };
    let mut skipped = Vec::new();
    for &beta in &config.beta {
        let mut x_table = Table::new(format!("identity_x_beta{beta}.csv"), &header);
        for w in &config.grids.windows {
            let x = x_identity_residual(&triple, beta, w[0], w[1], DEFAULT_PANELS)?;
            identity_row(&mut x_table, &x);
            bundle.below(format!("identity β={beta}: X identity on [{}, {}]", w[0], w[1]), score(&x), tol::IDENTITY, false);
        }
        bundle.tables.push(x_table);
        // The Bochner identity needs β above the threshold.
        if beta <= threshold {
            skipped.push(beta.to_string());
            continue;
        }
        let mut table = Table::new(format!("identity_integral_beta{beta}.csv"), &header);
        for w in &config.grids.windows {
            let coarse = integral_identity_residual_with(&triple, beta, w[0], w[1], DEFAULT_PANELS / 2)?;
            let fine = integral_identity_residual_with(&triple, beta, w[0], w[1], DEFAULT_PANELS)?;
            identity_row(&mut table, &fine);
            let window = format!("[{}, {}]", w[0], w[1]);
            bundle.below(format!("identity β={beta}: integral identity on {window}"), score(&fine), tol::IDENTITY, false);
            let halving = fine.at_roundoff() || fine.residual <= 0.5 * coarse.residual;
            bundle.holds(format!("identity β={beta}: residual halves under refinement on {window}"), halving, false);
        }
        bundle.tables.push(table);
    }
    bundle
        .report("identity")
        .num("beta_threshold", threshold)
        .text("panels", DEFAULT_PANELS)
        .text("integral_identity_skipped_beta", skipped.join(";"));
    Ok(())
}

fn field3d(bundle: &mut ResultBundle, config: &ExperimentConfig) -> Result<(), CliError> {
    let spec = config.field_spec()?;
    let grid = config.field_grid()?;
    let options = SolveOptions { tol: config.tolerances.solver, ..SolveOptions::default() };
    let field = solve_field(&spec, grid, options)?;
    let schwarzschild = spec.is_schwarzschild();
    let single_center = schwarzschild && spec.masses.len() == 1;
    bundle
        .report("field")
        .text("nodes", grid.n)
        .num("half_extent", grid.half_extent)
        .num("total_mass", spec.total_mass())
        .num("capacity", field.capacity())
        .num("outer_constant", field.outer_constant)
        .num("residual", field.residual_norm)
        .text("iterations", field.stats.iterations);
    bundle.below("field3d: residual", field.residual_norm, options.tol, false);
    bundle.holds("field3d: 0 ≤ u < 1", field.values_in_range(), true);
    // Closed-form capacity: the mass for one center, the radius for a flat ball.
    let exact_capacity = if single_center { spec.total_mass() } else { spec.excisions[0].radius };
    if schwarzschild {
        bundle.below("field3d: capacity matches closed form", rel(field.capacity(), exact_capacity), tol::FIELD_CAPACITY, false);
    }

    let mut levels = Table::new(
        "levels.csv",
        &["t", "beta", "F", "area", "components", "euler", "du_margin", "flags"],
    );
    let mut regular: Vec<Vec<f64>> = vec![Vec::new(); config.beta.len()];
    for &t in &config.field.levels {
        match extract_level(&field, t) {
            Ok(level) => {
                let euler: Vec<String> = level.euler.iter().map(i64::to_string).collect();
                let flag = if level.near_critical() { "near_critical" } else { "" };
                for (i, &beta) in config.beta.iter().enumerate() {
                    let f = surface_integral_f(&field, t, beta)?;
                    if !level.near_critical() {
                        regular[i].push(f);
                    }
                    levels.push(vec![
                        t.into(),
                        beta.into(),
                        f.into(),
                        level.area().into(),
                        level.component_count().into(),
                        euler.join(";").into(),
                        level.du_margin.into(),
                        flag.into(),
                    ]);
                }
            }
            Err(capacitary::Error::Truncation(_)) => {
                for &beta in &config.beta {
                    let nan = Cell::Num(f64::NAN);
                    levels.push(vec![
                        t.into(),
                        beta.into(),
                        nan.clone(),
                        nan.clone(),
                        Cell::Int(0),
                        "".into(),
                        nan,
                        "truncated".into(),
                    ]);
                }
            }
            Err(e) => return Err(e.into()),
        }
    }
    bundle.tables.push(levels);
    if single_center {
        for (values, beta) in regular.iter().zip(&config.beta) {
            if values.len() < 2 {
                continue;
            }
            let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
            bundle.below(format!("field3d β={beta}: F constant across levels"), (hi - lo) / lo.abs(), tol::FIELD_F_CONSTANCY, false);
        }
    }

    let critical = find_critical_points(&field);
    let mut table = Table::new("critical.csv", &["x", "y", "z", "value", "du", "ratio", "components_below", "components_above"]);
    for cp in &critical {
        let (below, above) = match morse_transition(&field, cp, MORSE_OFFSET) {
            Ok(m) => (Cell::from(m.components_below), Cell::from(m.components_above)),
            Err(_) => (Cell::Text("NA".into()), Cell::Text("NA".into())),
        };
        let [x, y, z] = cp.position;
        table.push(vec![x.into(), y.into(), z.into(), cp.value.into(), cp.du.into(), cp.ratio.into(), below, above]);
    }
    bundle.tables.push(table);
    if schwarzschild {
        bundle.below("field3d: no interior critical points", critical.len() as f64, 0.0, false);
    }

    if config.field.snapshot {
        let dir = &config.output.dir;
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
        write_snapshot(&dir.join("field.snap"), &field)?;
        bundle.report("snapshot").text("file", "field.snap");
    }
    Ok(())
}

fn adm(bundle: &mut ResultBundle, config: &ExperimentConfig) -> Result<(), CliError> {
    let spec: ConformalFactorSpec = config.field_spec()?;
    let estimates = adm_mass(&spec, &config.field.mass_radii)?;
    let mut table = Table::new("adm.csv", &["radius", "m_flux", "m_ricci", "flux_error", "ricci_error"]);
    for e in &estimates {
        table.push(vec![e.radius.into(), e.m_flux.into(), e.m_ricci.into(), e.flux_error.into(), e.ricci_error.into()]);
        bundle.holds(format!("adm r={}: estimates agree within error bars", e.radius), e.agree(), false);
    }
    bundle.tables.push(table);
    let total = spec.total_mass();
    if let Some(far) = estimates.iter().max_by(|a, b| a.radius.total_cmp(&b.radius)) {
        bundle.report("adm").num("total_mass", total).num("m_flux", far.m_flux).num("m_ricci", far.m_ricci);
        if total > 0.0 {
            let target = if config.field.kind == FieldKind::TwoCenters { tol::ADM_TWO_CENTER } else { tol::ADM_FLUX };
            bundle.below("adm: flux mass = total mass", rel(far.m_flux, total), target, false);
            bundle.below("adm: Ricci mass = total mass", rel(far.m_ricci, total), target, false);
        } else {
            bundle.below("adm: masses vanish", far.m_flux.abs().max(far.m_ricci.abs()), 1e-12, false);
        }
    }
    Ok(())
}

fn selftest_suite(bundle: &mut ResultBundle, config: &ExperimentConfig) -> Result<(), CliError> {
    let options = SelftestOptions { seed: config.seed, field_grid: config.field.nodes, ..SelftestOptions::default() };
    let report = selftest::run(options)?;
    let mut table = Table::new("selftest.csv", &["module", "name", "value", "tolerance", "passed", "theorem_backed"]);
    for c in &report.checks {
        table.push(vec![
            c.module.into(),
            c.name.clone().into(),
            c.value.into(),
            c.tolerance.into(),
            c.passed.into(),
            c.theorem_backed.into(),
        ]);
        // Informational entries carry no tolerance and no verdict.
        if !c.tolerance.is_nan() {
            bundle.verdicts.push(Verdict {
                name: format!("{}: {}", c.module, c.name),
                value: c.value,
                tolerance: c.tolerance,
                passed: c.passed,
                theorem_backed: c.theorem_backed,
            });
        }
    }
    bundle.tables.push(table);
    bundle.report("selftest").text("checks", report.checks.len()).text("elapsed_ms", report.elapsed.as_millis());
    Ok(())
}
