//! Seeded property suites behind `coupled-fv verify`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coupling::{make_linear_coupling, CouplingModel, FluxFamily, Gamma};
use crate::diagnostics::{check_max_principle, entropy_residuals, Entropy, MAX_PRINCIPLE_TOL};
use crate::exec::Execution;
use crate::flux::{directional_flux, directional_flux_u, wave_speed_bound, FluxKind, NumericalFlux};
use crate::io::config::{InitialData, MeshSource, RunConfig};
use crate::presets::preset;
use crate::scheme::{Problem, RunError};

pub const DEFAULT_SEED: u64 = 20240917;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    FluxAxioms,
    WellBalanced,
    MaxPrinciple,
    Entropy,
    Conservation,
    Convergence,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::FluxAxioms,
        Suite::WellBalanced,
        Suite::MaxPrinciple,
        Suite::Entropy,
        Suite::Conservation,
        Suite::Convergence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::FluxAxioms => "flux-axioms",
            Suite::WellBalanced => "well-balanced",
            Suite::MaxPrinciple => "max-principle",
            Suite::Entropy => "entropy",
            Suite::Conservation => "conservation",
            Suite::Convergence => "convergence",
        }
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
#[error("unknown suite `{0}`")]
pub struct UnknownSuite(pub String);

impl FromStr for Suite {
    type Err = UnknownSuite;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| UnknownSuite(s.to_string()))
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    AtMost(f64),
    AtLeast(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: Bound,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound: Bound::AtMost(limit),
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound: Bound::AtLeast(limit),
        }
    }

    pub fn pass(&self) -> bool {
        match self.bound {
            Bound::AtMost(l) => self.value <= l,
            Bound::AtLeast(l) => self.value >= l,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
    /// Extra lines printed under the table.
    pub notes: Vec<String>,
}

impl SuiteReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(Check::pass)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "suite {}", self.suite)?;
        for c in &self.checks {
            let (rel, lim) = match c.bound {
                Bound::AtMost(l) => ("<=", l),
                Bound::AtLeast(l) => (">=", l),
            };
            writeln!(
                f,
                "  {:<4} {:<48} {:>14.6e} {rel} {:.3e}",
                if c.pass() { "PASS" } else { "FAIL" },
                c.name,
                c.value,
                lim
            )?;
        }
        for n in &self.notes {
            writeln!(f, "  {n}")?;
        }
        write!(f, "{}", if self.pass() { "all checks passed" } else { "some checks FAILED" })
    }
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<SuiteReport, RunError> {
    let mut report = SuiteReport {
        suite,
        checks: Vec::new(),
        notes: Vec::new(),
    };
    match suite {
        Suite::FluxAxioms => report.checks = flux_axiom_checks(seed, 1000),
        Suite::WellBalanced => {
            for (name, n) in [("two-domain", 50), ("three-domain", 50)] {
                let drift = well_balanced_drift(name, n, 0.5, 100)?;
                report
                    .checks
                    .push(Check::at_most(format!("{name} {n}x{n} drift over 100 steps"), drift, 1e-11));
            }
        }
        Suite::MaxPrinciple => {
            let out = random_data_run("two-domain", 50, seed, 200)?;
            report.checks.push(Check::at_least(
                "two-domain 50x50 worst margin over 200 steps",
                check_max_principle(&out.log),
                -MAX_PRINCIPLE_TOL,
            ));
        }
        Suite::Entropy => {
            for kind in [FluxKind::Rusanov, FluxKind::Godunov] {
                let mut c = preset("burgers-1d").expect("shipped preset");
                c.scheme.flux = kind;
                c.run.t_end = 0.4;
                c.run.snapshots.clear();
                let out = crate::scheme::run(&c)?;
                report.checks.push(Check::at_most(
                    format!("burgers-1d {kind} max entropy residual"),
                    out.log.max_entropy_residual().unwrap_or(f64::NAN),
                    1e-10,
                ));
            }
            let mut c = sized_preset("two-domain", 40);
            c.run.t_end = 1.0;
            c.run.snapshots.clear();
            let out = crate::scheme::run(&c)?;
            report.checks.push(Check::at_most(
                "two-domain 40x40 to t=1 max entropy residual",
                out.log.max_entropy_residual().unwrap_or(f64::NAN),
                1e-10,
            ));
        }
        Suite::Conservation => {
            let mut identity = 0.0f64;
            let out = random_data_observed("two-domain", 50, seed, 200, |p, rec| {
                identity = identity.max(convex_combination_residual(p, rec));
            })?;
            report.checks.push(Check::at_most(
                "local conservation |sum a C0(u) - w| over 200 steps",
                out.log.max_conservation_residual(),
                1e-10,
            ));
            report
                .checks
                .push(Check::at_most("convex-combination identities", identity, 1e-11));
        }
        Suite::Convergence => {
            let study = convergence_study(&[25, 50, 100], 400, Execution::default())?;
            for (n, e) in study.resolutions.iter().zip(&study.errors) {
                report.notes.push(format!("n = {n:>4}  L1 error = {e:.6e}"));
            }
            report
                .checks
                .push(Check::at_least("fitted L1 convergence order", study.order, 0.5));
        }
    }
    Ok(report)
}

/// Coupling models exercised by the flux property checks: both preset models
/// and one with a nonlinear γ, which takes the general extremum search.
pub fn probe_models() -> Vec<(&'static str, CouplingModel)> {
    let two = make_linear_coupling(
        vec![Gamma::linear(1.0), Gamma::linear(2.0)],
        vec![
            FluxFamily::burgers([1.0, 1.0]),
            FluxFamily::Quadratic {
                direction: [1.0, 1.0],
                shift: 0.9,
            },
        ],
    )
    .expect("valid model");
    let three = make_linear_coupling(
        vec![Gamma::linear(1.0), Gamma::linear(2.0), Gamma::linear(3.0)],
        vec![
            FluxFamily::burgers([1.0, 0.0]),
            FluxFamily::burgers([0.5, 0.0]),
            FluxFamily::burgers([0.0, 1.0]),
        ],
    )
    .expect("valid model");
    let cubic = make_linear_coupling(
        vec![
            Gamma::CubicPlusLinear {
                cubic: 0.5,
                linear: 1.0,
            },
            Gamma::linear(2.0),
        ],
        vec![
            FluxFamily::burgers([1.0, -0.5]),
            FluxFamily::Linear { velocity: [0.3, 0.7] },
        ],
    )
    .expect("valid model");
    vec![("two-domain", two), ("three-domain", three), ("cubic", cubic)]
}

/// A uniform point of the simplex hull with `l` components.
pub fn random_color(rng: &mut impl Rng, l: usize) -> Vec<f64> {
    // sorted uniforms give a uniform point of the (l+1)-simplex
    let mut cuts: Vec<f64> = (0..l).map(|_| rng.gen::<f64>()).collect();
    cuts.push(0.0);
    cuts.push(1.0);
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2).skip(1).map(|w| w[1] - w[0]).collect()
}

pub fn random_normal(rng: &mut impl Rng) -> [f64; 2] {
    let a = rng.gen_range(0.0..std::f64::consts::TAU);
    [a.cos(), a.sin()]
}

/// Consistency, conservation and monotonicity of both flux kinds on
/// `samples` seeded random instances, plus the Godunov brute-force oracle.
pub fn flux_axiom_checks(seed: u64, samples: usize) -> Vec<Check> {
    let mut checks = Vec::new();
    for kind in [FluxKind::Rusanov, FluxKind::Godunov] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut cons, mut conv, mut mono_l, mut mono_r, mut oracle) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
        let models = probe_models();
        for i in 0..samples {
            let (_, model) = &models[i % models.len()];
            let flux = NumericalFlux::new(kind, model.clone());
            let v = random_color(&mut rng, model.num_components());
            let nu = random_normal(&mut rng);
            let (a, b) = (rng.gen_range(-1.0..2.0), rng.gen_range(-1.0..2.0));
            let wa = model.c0(a, &v);
            let wb = model.c0(b, &v);
            let phi = directional_flux(model, wa, &v, nu).expect("model inverts");
            let g = |x: f64, y: f64, n: [f64; 2]| flux.eval(x, y, &v, n).expect("model inverts");
            cons = cons
                .max((g(wa, wa, nu) - phi).abs())
                .max((flux.eval_u(a, a, &v, nu).g - directional_flux_u(model, a, &v, nu)).abs());
            conv = conv.max((g(wa, wb, nu) + g(wb, wa, [-nu[0], -nu[1]])).abs());
            let d = 1e-4;
            let base = g(wa, wb, nu);
            mono_l = mono_l.min(g(wa + d, wb, nu) - base);
            mono_r = mono_r.min(base - g(wa, wb + d, nu));
            if kind == FluxKind::Godunov {
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                let n = 10_000;
                let vals = (0..=n).map(|j| directional_flux_u(model, lo + (hi - lo) * j as f64 / n as f64, &v, nu));
                let brute = if a <= b {
                    vals.fold(f64::INFINITY, f64::min)
                } else {
                    vals.fold(f64::NEG_INFINITY, f64::max)
                };
                oracle = oracle.max((flux.eval_u(a, b, &v, nu).g - brute).abs());
            }
        }
        checks.push(Check::at_most(format!("{kind} consistency"), cons, 1e-12));
        checks.push(Check::at_most(format!("{kind} conservation"), conv, 1e-12));
        checks.push(Check::at_least(format!("{kind} nondecreasing in left state"), mono_l, -1e-10));
        checks.push(Check::at_least(format!("{kind} nonincreasing in right state"), mono_r, -1e-10));
        if kind == FluxKind::Godunov {
            checks.push(Check::at_most("godunov vs 10^4-point oracle", oracle, 1e-6));
        }
    }
    checks
}

/// A preset on an `n × n` mesh.
pub fn sized_preset(name: &str, n: usize) -> RunConfig {
    let mut c = preset(name).expect("shipped preset");
    if let MeshSource::Cartesian { bbox, .. } = c.mesh.source {
        c.mesh.source = MeshSource::Cartesian { nx: n, ny: n, bbox };
    }
    c
}

/// Worst `|u − u*|` over `steps` steps from `u ≡ u*` on a preset geometry.
pub fn well_balanced_drift(name: &str, n: usize, u_star: f64, steps: usize) -> Result<f64, RunError> {
    let mut c = sized_preset(name, n);
    c.run.initial = InitialData::Constant(u_star);
    c.run.snapshots.clear();
    c.run.entropy_diagnostics = false;
    let mut p = Problem::from_config(&c)?;
    // no wave moves fast enough to matter; step a fixed count
    p.reference = Some(u_star);
    p.max_steps = Some(steps);
    p.t_end = f64::MAX;
    let out = crate::scheme::run_problem(&p)?;
    assert_eq!(out.steps, steps);
    Ok(out.log.max_well_balanced_drift().unwrap_or(0.0))
}

fn random_problem(name: &str, n: usize, seed: u64, steps: usize) -> Result<Problem, RunError> {
    let mut c = sized_preset(name, n);
    c.run.initial = InitialData::Random {
        lo: 0.0,
        hi: 1.0,
        seed,
    };
    c.run.snapshots.clear();
    c.run.entropy_diagnostics = false;
    let mut p = Problem::from_config(&c)?;
    p.max_steps = Some(steps);
    p.t_end = f64::MAX;
    Ok(p)
}

/// `steps` steps from seeded random data in `[0, 1]`.
pub fn random_data_run(name: &str, n: usize, seed: u64, steps: usize) -> Result<crate::scheme::RunOutput, RunError> {
    crate::scheme::run_problem(&random_problem(name, n, seed, steps)?)
}

pub fn random_data_observed(
    name: &str,
    n: usize,
    seed: u64,
    steps: usize,
    mut observe: impl FnMut(&Problem, &crate::scheme::StepRecord),
) -> Result<crate::scheme::RunOutput, RunError> {
    let p = random_problem(name, n, seed, steps)?;
    p.run_observed(|_, rec| observe(&p, rec))
}

/// Worst violation of `w_K = Σ α w_{K,e}` and `w^{n+1}_K = Σ α w^{n+1,−}_{K,e}`.
pub fn convex_combination_residual(p: &Problem, rec: &crate::scheme::StepRecord) -> f64 {
    let mut worst = 0.0f64;
    for k in 0..p.mesh.num_cells() {
        let (mut a, mut b) = (0.0, 0.0);
        for f in p.mesh.face_range(k) {
            a += p.dual.fractions[f] * rec.w_face[f];
            b += p.dual.fractions[f] * rec.w_face_next[f];
        }
        worst = worst.max((a - rec.w_cell[k]).abs()).max((b - rec.w_cell_next[k]).abs());
    }
    worst
}

/// Worst local CFL coefficient `|g(wL,wR) − g(wL,wL)| / |wR − wL| · τ|e|/(α|K|)`.
pub fn local_cfl_coefficient(p: &Problem, rec: &crate::scheme::StepRecord) -> f64 {
    let mut worst = 0.0f64;
    for (f, face) in p.mesh.faces().iter().enumerate() {
        let Some(nf) = face.neighbor_face else { continue };
        let (wl, wr) = (rec.w_face[f], rec.w_face[nf]);
        if (wr - wl).abs() <= 1e-12 {
            continue;
        }
        let g = rec.face_flux(&p.mesh, f);
        let mu = rec.tau * p.mesh.edge(face.edge).length / (p.dual.fractions[f] * p.mesh.cell(face.cell).area);
        worst = worst.max((g - rec.phi_face[f]).abs() / (wr - wl).abs() * mu);
    }
    worst
}

/// Smooth single-domain problem used by the convergence study: a sine bump of
/// height 1/2 on the unit square under Burgers flux along (1, 1), before the
/// shock forms.
pub fn convergence_config(n: usize) -> RunConfig {
    let mut c = preset("burgers-1d").expect("shipped preset");
    let bbox = crate::mesh::BoundingBox::new(0.0, 0.0, 1.0, 1.0);
    c.mesh.source = MeshSource::Cartesian { nx: n, ny: n, bbox };
    c.coupling.fluxes = vec![FluxFamily::burgers([1.0, 1.0])];
    c.run.initial = InitialData::SinBump {
        bbox,
        amplitude: 0.5,
        base: 0.0,
    };
    c.run.t_end = CONVERGENCE_TIME;
    c.run.snapshots.clear();
    c.run.entropy_diagnostics = false;
    c
}

pub const CONVERGENCE_TIME: f64 = 0.3;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub resolutions: Vec<usize>,
    pub errors: Vec<f64>,
    /// Least-squares slope of `log(error)` against `log(h)`.
    pub order: f64,
}

/// Solution at `t_end` on an `n × n` grid of the convergence problem.
pub fn convergence_solution(n: usize, exec: Execution) -> Result<Vec<f64>, RunError> {
    let mut p = Problem::from_config(&convergence_config(n))?;
    p.exec = exec;
    let out = crate::scheme::run_problem(&p)?;
    Ok(out.snapshots.last().expect("final snapshot").u.clone())
}

/// L¹ distance between an `n × n` solution and the block averages of an
/// `m × m` reference on the unit square (`n` divides `m`).
pub fn l1_against_reference(coarse: &[f64], n: usize, reference: &[f64], m: usize) -> f64 {
    assert_eq!(m % n, 0, "reference resolution must be a multiple");
    let r = m / n;
    let mut err = 0.0;
    for j in 0..n {
        for i in 0..n {
            let mut avg = 0.0;
            for jj in 0..r {
                for ii in 0..r {
                    avg += reference[(j * r + jj) * m + i * r + ii];
                }
            }
            avg /= (r * r) as f64;
            err += (coarse[j * n + i] - avg).abs();
        }
    }
    err / (n * n) as f64
}

pub fn fitted_order(resolutions: &[usize], errors: &[f64]) -> f64 {
    let xs: Vec<f64> = resolutions.iter().map(|&n| (1.0 / n as f64).ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let k = xs.len() as f64;
    let (xm, ym) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    sxy / sxx
}

pub fn convergence_study(levels: &[usize], reference: usize, exec: Execution) -> Result<ConvergenceStudy, RunError> {
    let fine = convergence_solution(reference, exec)?;
    let mut errors = Vec::with_capacity(levels.len());
    for &n in levels {
        errors.push(l1_against_reference(&convergence_solution(n, exec)?, n, &fine, reference));
    }
    Ok(ConvergenceStudy {
        resolutions: levels.to_vec(),
        order: fitted_order(levels, &errors),
        errors,
    })
}

/// Largest subcell entropy residual of one step.
pub fn step_entropy_max(p: &Problem, rec: &crate::scheme::StepRecord) -> f64 {
    entropy_residuals(rec, &p.mesh, &p.dual, &p.color, &p.flux, &Entropy::quadratic(), p.exec)
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Wave-speed bound of every edge under the problem's data range.
pub fn max_wave_speed(p: &Problem) -> f64 {
    p.mesh
        .edges()
        .iter()
        .enumerate()
        .map(|(e, edge)| wave_speed_bound(&p.flux.model, p.color.get(e), edge.normal, p.initial.range()))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn random_colors_lie_in_the_simplex() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for l in 0..4 {
            for _ in 0..100 {
                let v = random_color(&mut rng, l);
                assert_eq!(v.len(), l);
                assert!(v.iter().all(|&x| x >= 0.0) && v.iter().sum::<f64>() <= 1.0 + 1e-15);
            }
        }
    }

    #[test]
    fn block_average_error_of_identical_fields_is_zero() {
        let fine: Vec<f64> = (0..16).map(|i| i as f64).collect();
        let coarse = vec![
            (0.0 + 1.0 + 4.0 + 5.0) / 4.0,
            (2.0 + 3.0 + 6.0 + 7.0) / 4.0,
            (8.0 + 9.0 + 12.0 + 13.0) / 4.0,
            (10.0 + 11.0 + 14.0 + 15.0) / 4.0,
        ];
        assert_eq!(l1_against_reference(&coarse, 2, &fine, 4), 0.0);
    }

    #[test]
    fn order_of_exact_power_law() {
        let n = [10, 20, 40];
        let e: Vec<f64> = n.iter().map(|&n| 3.0 / (n as f64).powi(2)).collect();
        assert!((fitted_order(&n, &e) - 2.0).abs() < 1e-12);
    }
}
