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

//! The invariant suite behind `capacitary selftest`.
//!
//! Every check records the observed quantity, the threshold it is judged
//! against and whether a theorem backs the expectation. Checks without a
//! theorem are informational and never fail the suite.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::conformal::{
    conformal_state, cylinder_limit_check, div_y_integrand, hess_phi_norm2_expansion, integral_identity_residual_with,
    kato_check, monotone_quotient_check, phi_beta, phi_beta_fd, phi_beta_prime, s_of_tau, x_identity_residual,
    DEFAULT_PANELS,
};
use crate::error::Result;
use crate::field3d::{
    adm_mass, coarea_integral_f, extract_level, solve_field, surface_integral_f, ConformalFactorSpec, Grid,
    SolveOptions,
};
use crate::geometry::{
    flat_profile, log_grid, reissner_nordstrom_profile, schwarzschild_profile, substatic_check, Dimension,
};
use crate::monotone::{
    default_tau_grid, f_beta, f_beta_at_one_closed_form, f_beta_fd_second, f_beta_second, limit_f,
    monotone_curve, penrose_radial,
};
use crate::radial::{solve_default, Level, RadialTriple};
use crate::tolerances as tol;

/// One verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub module: &'static str,
    pub name: String,
    /// Observed quantity compared against `tolerance`.
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// A failing check contradicts a theorem rather than a numerical target.
    pub theorem_backed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestReport {
    pub checks: Vec<Check>,
    pub elapsed: Duration,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelftestOptions {
    pub seed: u64,
    /// Nodes per axis of the single-center grid.
    pub field_grid: usize,
    /// Random radii per fixture for the pointwise conformal checks.
    pub pointwise_samples: usize,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        Self { seed: 7, field_grid: 96, pointwise_samples: 10_000 }
    }
}

struct Recorder(Vec<Check>);

impl Recorder {
    /// `value ≤ tolerance`.
    fn below(&mut self, module: &'static str, name: impl Into<String>, value: f64, tolerance: f64, theorem: bool) {
        let passed = value <= tolerance;
        self.0.push(Check { module, name: name.into(), value, tolerance, passed, theorem_backed: theorem });
    }

    /// `value ≥ −tolerance`.
    fn nonnegative(&mut self, module: &'static str, name: impl Into<String>, value: f64, tolerance: f64, theorem: bool) {
        let passed = value >= -tolerance;
        self.0.push(Check { module, name: name.into(), value, tolerance, passed, theorem_backed: theorem });
    }

    /// Recorded without a verdict.
    fn info(&mut self, module: &'static str, name: impl Into<String>, value: f64) {
        self.0.push(Check { module, name: name.into(), value, tolerance: f64::NAN, passed: true, theorem_backed: false });
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn dim(n: usize) -> Dimension {
    Dimension::new(n).expect("n ≥ 3")
}

struct Fixtures {
    schwarzschild: Vec<(usize, f64, RadialTriple)>,
    rn: RadialTriple,
    flat: RadialTriple,
}

fn fixtures() -> Result<Fixtures> {
    let schwarzschild = [(3, 1.0), (4, 1.0), (5, 0.5)]
        .into_iter()
        .map(|(n, m)| Ok((n, m, solve_default(&schwarzschild_profile(dim(n), m)?)?)))
        .collect::<Result<_>>()?;
    Ok(Fixtures {
        schwarzschild,
        rn: solve_default(&reissner_nordstrom_profile(dim(3), 1.0, 0.3)?)?,
        flat: solve_default(&flat_profile(dim(3), 1.0)?)?,
    })
}

/// Runs every check. Errors are computational failures, not failed verdicts.
pub fn run(options: SelftestOptions) -> Result<SelftestReport> {
    let start = Instant::now();
    let mut rec = Recorder(Vec::new());
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let fx = fixtures()?;
    geometry_checks(&mut rec, &fx)?;
    radial_checks(&mut rec, &fx, &mut rng)?;
    monotone_checks(&mut rec, &fx, &mut rng)?;
    conformal_checks(&mut rec, &fx, &mut rng, options.pointwise_samples)?;
    field_checks(&mut rec, options.field_grid)?;
    Ok(SelftestReport { checks: rec.0, elapsed: start.elapsed() })
}

fn geometry_checks(rec: &mut Recorder, fx: &Fixtures) -> Result<()> {
    for (n, m, triple) in &fx.schwarzschild {
        let p = triple.profile();
        let radii = log_grid(p.r0() * 1.001, p.r0() * 1e4, 200);
        let mut scalar = 0.0f64;
        let mut trace = 0.0f64;
        for &r in &radii {
            let c = p.curvature_at(r)?;
            scalar = scalar.max(c.scalar.abs());
            trace = trace.max(c.trace_defect(dim(*n)));
        }
        let label = format!("schwarzschild n={n} m={m}");
        rec.below("geometry", format!("{label}: scalar flat"), scalar, tol::SCALAR_FLAT, true);
        rec.below("geometry", format!("{label}: trace identity"), trace, tol::TRACE_IDENTITY, true);
        rec.below(
            "geometry",
            format!("{label}: asymptotically flat"),
            p.one_minus_f(1e6 * p.r0()).abs(),
            tol::ASYMPTOTIC_FLATNESS,
            true,
        );
        let sub = substatic_check(triple, &radii)?;
        rec.nonnegative("geometry", format!("{label}: sub-static"), sub.global_min, sub.tol, true);
    }
    for (name, triple) in [("reissner-nordstrom q=0.3", &fx.rn), ("flat exterior", &fx.flat)] {
        let radii = log_grid(triple.r0() * 1.001, triple.r0() * 1e4, 200);
        rec.info("geometry", format!("{name}: sub-static minimum"), substatic_check(triple, &radii)?.global_min);
    }
    Ok(())
}

fn radial_checks(rec: &mut Recorder, fx: &Fixtures, rng: &mut ChaCha8Rng) -> Result<()> {
    for (n, m, triple) in &fx.schwarzschild {
        let label = format!("schwarzschild n={n} m={m}");
        let k = (*n - 2) as i32;
        let r0 = triple.r0();
        let mut err = 0.0f64;
        // `1 − 2m r^{2−n}` written as `1 − (r0/r)^{n−2}`, exact at the
        // rounded horizon radius.
        for r in log_grid(r0, 1e3, 400) {
            let exact = (1.0 - (r0 / r).powi(k)).max(0.0).sqrt();
            err = err.max((triple.u(r)? - exact).abs());
        }
        rec.below("radial", format!("{label}: closed-form potential"), err, tol::SCHWARZSCHILD_POTENTIAL, false);
        let cap = triple.capacity()?;
        rec.below("radial", format!("{label}: capacity spread"), cap.max_rel_spread, tol::CAPACITY_SPREAD, false);
        rec.below("radial", format!("{label}: capacity = mass"), rel(cap.agreed_value, *m), tol::CAPACITY_MASS, true);
    }
    for (name, triple) in [("reissner-nordstrom q=0.3", &fx.rn), ("flat exterior", &fx.flat)] {
        let cap = triple.capacity()?;
        rec.below("radial", format!("{name}: capacity spread"), cap.max_rel_spread, tol::CAPACITY_SPREAD, false);
        let table = triple.u_table();
        let increasing = table.values().windows(2).all(|w| w[1] > w[0]);
        let in_range = table.values().iter().all(|u| (0.0..1.0).contains(u));
        rec.below("radial", format!("{name}: table increasing in [0, 1)"), f64::from(u8::from(!(increasing && in_range))), 0.0, true);
        let kappa = triple.flux_constant();
        let mut dev = 0.0f64;
        for _ in 0..10 {
            let a = triple.r0() * (1.0 + rng.gen_range(0.01..50.0));
            dev = dev.max(rel(triple.measured_flux(a)?, kappa));
        }
        rec.below("radial", format!("{name}: flux conservation"), dev, tol::CAPACITY_SPREAD, true);
    }
    rec.below("radial", "flat exterior: u(2) = 1/2", (fx.flat.u(2.0)? - 0.5).abs(), tol::SCHWARZSCHILD_POTENTIAL, false);
    let asym = fx.schwarzschild[0].2.asymptotic_expansion_check(&[10.0, 100.0, 1000.0])?;
    rec.below("radial", "schwarzschild n=3: expansion residual decays", f64::from(u8::from(!asym.decaying)), 0.0, false);
    Ok(())
}

fn monotone_checks(rec: &mut Recorder, fx: &Fixtures, rng: &mut ChaCha8Rng) -> Result<()> {
    let taus = default_tau_grid();
    let (_, _, s3) = &fx.schwarzschild[0];
    for beta in [0.5, 1.0, 2.0, 3.0] {
        let constant = 4.0 * PI;
        let mut dev = 0.0f64;
        for &tau in taus.iter().chain(std::iter::once(&1.0)) {
            dev = dev.max(rel(f_beta(s3, beta, tau)?, constant));
        }
        rec.below("monotone", format!("schwarzschild n=3 β={beta}: F constant"), dev, tol::F_CONSTANCY, true);
    }
    for (n, m, triple) in &fx.schwarzschild {
        for beta in [(*n as f64 - 2.0) / (*n as f64 - 1.0), 1.0, 2.0] {
            let label = format!("schwarzschild n={n} m={m} β={beta:.4}");
            let curve = monotone_curve(triple, beta, &taus)?;
            rec.below("monotone", format!("{label}: F' ≤ 0"), curve.max_fd_derivative(), tol::MONOTONE, true);
            rec.nonnegative("monotone", format!("{label}: convex"), curve.min_slope_increment(), tol::CONVEX, true);
            let mismatches = curve.samples.iter().filter(|s| s.derivative_mismatch).count();
            rec.below("monotone", format!("{label}: F' matches differences"), mismatches as f64, 0.0, false);
            let f1 = f_beta(triple, beta, 1.0)?;
            rec.below("monotone", format!("{label}: F(1) closed form"), rel(f1, f_beta_at_one_closed_form(triple, beta)), tol::F_AT_ONE, false);
        }
        let pen = penrose_radial(triple)?;
        rec.below("monotone", format!("schwarzschild n={n} m={m}: Penrose equality"), pen.margin.abs(), tol::PENROSE, true);
    }
    for (name, triple) in [("schwarzschild n=3", s3), ("reissner-nordstrom q=0.3", &fx.rn)] {
        let mut worst = 0.0f64;
        for tau in [1.5, 3.0, 10.0, 50.0] {
            let f = f_beta(triple, 1.0, tau)?;
            let d = (f_beta_second(triple, 1.0, tau)? - f_beta_fd_second(triple, 1.0, tau)?).abs();
            worst = worst.max(d / tol::SECOND_DERIVATIVE_ABS.max(tol::SECOND_DERIVATIVE_REL * f.abs()));
        }
        rec.below("monotone", format!("{name}: F'' matches differences"), worst, 1.0, false);
        let curve = monotone_curve(triple, 1.0, &taus)?;
        let mismatches = curve.samples.iter().filter(|s| s.derivative_mismatch).count();
        rec.below("monotone", format!("{name} β=1: F' matches differences"), mismatches as f64, 0.0, false);
    }
    let rn_curve = monotone_curve(&fx.rn, 1.0, &taus)?;
    rec.info("monotone", "reissner-nordstrom q=0.3 β=1: max F'", rn_curve.max_fd_derivative());
    let flat_pen = penrose_radial(&fx.flat)?;
    rec.below("monotone", "flat exterior: Penrose margin 1/2", (flat_pen.margin - 0.5).abs(), tol::PENROSE_FLAT, false);
    let lim = limit_f(s3, 1.0)?;
    rec.below("monotone", "schwarzschild n=3 β=1: limit 4π", rel(lim.closed_form, 4.0 * PI), tol::F_CONSTANCY, false);
    let mut round = 0.0f64;
    let mut relation = 0.0f64;
    for _ in 0..20 {
        let tau = 1.0 + 10f64.powf(rng.gen_range(-3.0..3.0));
        let level = Level::from_tau(tau)?;
        round = round.max((level.tau() - tau).abs() / tau);
        for triple in [s3, &fx.rn] {
            let n = triple.dimension().as_f64();
            let f = f_beta(triple, 1.0, tau)?;
            let phi = phi_beta(triple, 1.0, s_of_tau(tau))?;
            relation = relation.max(rel(2f64.powf(1.0 / (n - 2.0) - 1.0) * phi, f));
        }
    }
    rec.below("monotone", "τ ↔ t round trip", round, 1e-12, false);
    rec.below("monotone", "F and Φ related", relation, tol::F_PHI_RELATION, false);
    Ok(())
}

fn conformal_checks(rec: &mut Recorder, fx: &Fixtures, rng: &mut ChaCha8Rng, samples: usize) -> Result<()> {
    let (_, _, s3) = &fx.schwarzschild[0];
    let mut fixtures: Vec<(String, &RadialTriple, bool)> = fx
        .schwarzschild
        .iter()
        .map(|(n, m, t)| (format!("schwarzschild n={n} m={m}"), t, true))
        .collect();
    fixtures.push(("reissner-nordstrom q=0.3".into(), &fx.rn, false));
    fixtures.push(("flat exterior".into(), &fx.flat, false));

    for (name, triple, substatic) in &fixtures {
        let n = triple.dimension();
        let (r0, r1) = (triple.r0(), triple.r_max());
        let mut star = 0.0f64;
        let mut kato = f64::INFINITY;
        let mut expansion = 0.0f64;
        let mut div_y = f64::INFINITY;
        for _ in 0..samples {
            let r = r0 * (r1 / r0).powf(rng.gen_range(0.0..1.0)).max(1.0 + 1e-9);
            let st = conformal_state(triple, r)?;
            star = star.max(st.star_defect(n.as_f64()));
            if st.grad_phi_norm > tol::KATO_GRADIENT_FLOOR {
                kato = kato.min(kato_check(n.get(), &st)?);
            }
            let e = hess_phi_norm2_expansion(triple, &st);
            expansion = expansion.max((e - st.hess_phi_norm2).abs() / e.abs().max(1.0));
            if *substatic && st.phi >= crate::conformal::S_MIN {
                let threshold = crate::monotone::beta_threshold(n);
                for beta in [threshold, 1.0, 2.0] {
                    div_y = div_y.min(div_y_integrand(&st, beta)?);
                }
            }
        }
        rec.below("conformal", format!("{name}: gradient identity"), star, tol::CONFORMAL_POINTWISE, false);
        rec.nonnegative("conformal", format!("{name}: refined Kato"), kato, tol::KATO, true);
        rec.below("conformal", format!("{name}: |∇²φ|² expansion"), expansion, tol::CONFORMAL_POINTWISE, false);
        if *substatic {
            rec.nonnegative("conformal", format!("{name}: div Y ≥ 0"), div_y, tol::DIV_Y, true);
        }

        let beta = 1.0;
        let ss = log_grid(0.05, 10.0, 40);
        let mut worst = 0.0f64;
        for &s in &ss {
            let phi = phi_beta(triple, beta, s)?;
            let d = (phi_beta_prime(triple, beta, s)? - phi_beta_fd(triple, beta, s)?).abs();
            worst = worst.max(d / tol::PHI_PRIME_ABS.max(tol::PHI_PRIME_REL * phi.abs()));
        }
        rec.below("conformal", format!("{name}: Φ' representation"), worst, 1.0, false);
        if *substatic {
            let q = monotone_quotient_check(triple, beta, &ss)?;
            rec.nonnegative("conformal", format!("{name}: monotone quotient"), q.min_increment, tol::QUOTIENT, true);
        }
        for (lo, hi) in [(0.1, 2.0), (0.5, 6.0)] {
            let coarse = integral_identity_residual_with(triple, 1.0, lo, hi, DEFAULT_PANELS / 2)?;
            let fine = integral_identity_residual_with(triple, 1.0, lo, hi, DEFAULT_PANELS)?;
            let value = if fine.at_roundoff() { 0.0 } else { fine.relative_residual };
            rec.below("conformal", format!("{name}: integral identity on [{lo}, {hi}]"), value, tol::IDENTITY, false);
            let halving = fine.at_roundoff() || fine.residual <= 0.5 * coarse.residual;
            rec.below("conformal", format!("{name}: identity residual halves on [{lo}, {hi}]"), f64::from(u8::from(!halving)), 0.0, false);
            let x = x_identity_residual(triple, 1.0, lo, hi, DEFAULT_PANELS)?;
            let value = if x.at_roundoff() { 0.0 } else { x.relative_residual };
            rec.below("conformal", format!("{name}: X identity on [{lo}, {hi}]"), value, tol::IDENTITY, false);
        }
    }

    let mut grad = 0.0f64;
    for r in log_grid(2.0 * 1.0001, 1e4, 200) {
        grad = grad.max((conformal_state(s3, r)?.grad_phi_norm - 0.5).abs());
    }
    rec.below("conformal", "schwarzschild n=3: |∇φ|_g = 1/2", grad, tol::CYLINDER_GRADIENT, true);
    let mut hess = 0.0f64;
    for r in [3.0, 10.0, 100.0] {
        hess = hess.max(conformal_state(s3, r)?.hess_phi_norm2.abs());
    }
    rec.below("conformal", "schwarzschild n=3: ∇²φ = 0", hess, tol::CYLINDER_HESSIAN, true);
    let cyl = cylinder_limit_check(s3)?;
    rec.below("conformal", "schwarzschild n=3: cylinder gradient limit", rel(cyl.grad_at_far, cyl.grad_limit_expected), 1e-6, false);
    rec.below("conformal", "schwarzschild n=3: cylinder area limit", rel(cyl.area_at_far, cyl.area_limit_expected), 1e-3, false);
    rec.info("conformal", "schwarzschild n=3: |∇²φ|² at far radius", cyl.hess2_at_far);
    Ok(())
}

fn field_checks(rec: &mut Recorder, n: usize) -> Result<()> {
    let spec = ConformalFactorSpec::single_center(1.0)?;
    let options = SolveOptions::default();
    let field = solve_field(&spec, Grid::new(n, 4.0)?, options)?;
    let m = "field3d";
    rec.below(m, "single center: residual", field.residual_norm, options.tol, false);
    rec.below(m, "single center: capacity = mass", rel(field.capacity(), 1.0), tol::FIELD_CAPACITY, false);
    rec.below(m, "single center: 0 ≤ u < 1", f64::from(u8::from(!field.values_in_range())), 0.0, true);
    rec.below(m, "single center: u increases outward", f64::from(u8::from(!field.radial_monotonicity_spot_check())), 0.0, true);
    rec.below(m, "single center: residual history nonincreasing", field.stats.max_history_increase().max(0.0), 0.0, false);
    let g = field.grid.n;
    let mut flux = 0.0f64;
    for (lo, hi) in [(g / 4, g - 1 - g / 4), (g / 8, g - 1 - g / 8), (2, g - 3)] {
        flux = flux.max(rel(field.box_capacity(lo, hi)?, field.capacity()));
    }
    rec.below(m, "single center: flux through nested boxes", flux, 1e-6, false);

    let level = extract_level(&field, 0.5)?;
    let exact_area = 4.0 * PI * (2.0f64 / 0.75).powi(2);
    rec.below(m, "single center: one component at t = 1/2", (level.component_count() as f64 - 1.0).abs(), 0.0, false);
    rec.below(m, "single center: Euler characteristic 2", level.euler.iter().map(|e| (e - 2).abs()).sum::<i64>() as f64, 0.0, false);
    rec.below(m, "single center: level area", rel(level.area(), exact_area), tol::FIELD_CAPACITY, false);

    let values: Vec<f64> = [0.3, 0.5, 0.7].iter().map(|&t| surface_integral_f(&field, t, 1.0)).collect::<Result<_>>()?;
    let (lo, hi) = values.iter().fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
    rec.below(m, "single center: F constant across levels", (hi - lo) / lo, tol::FIELD_F_CONSTANCY, true);
    let coarea = coarea_integral_f(&field, 0.5, 0.05, 1.0)?;
    rec.below(m, "single center: mesh and coarea estimators", rel(values[1], coarea), tol::FIELD_ESTIMATORS, false);
    let f0 = surface_integral_f(&field, 0.5, 0.0)?;
    rec.below(m, "single center: ∫|Du| equals the flux", rel(f0, 4.0 * PI * field.capacity()), tol::FIELD_FLUX, false);

    let mass = adm_mass(&spec, &[100.0, 200.0])?;
    let far = mass[1];
    rec.below(m, "single center: ADM flux mass", rel(far.m_flux, 1.0), tol::ADM_FLUX, false);
    rec.below(m, "single center: Ricci mass", rel(far.m_ricci, 1.0), tol::ADM_FLUX, false);
    let disagreement = mass.iter().map(|e| (e.m_flux - e.m_ricci).abs() - e.flux_error - e.ricci_error).fold(f64::NEG_INFINITY, f64::max);
    rec.below(m, "single center: mass estimates agree within error bars", disagreement, 0.0, false);
    let flat = adm_mass(&ConformalFactorSpec::flat_ball(1.0)?, &[10.0])?[0];
    rec.below(m, "flat: ADM masses vanish", flat.m_flux.abs().max(flat.m_ricci.abs()), 1e-12, false);
    Ok(())
}
