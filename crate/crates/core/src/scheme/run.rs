use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{init_state, SchemeError, Simulation, SolverState, StepRecord};
use crate::coupling::{
    build_color_field, make_linear_coupling, ColorError, ColorField, CouplingError, DomainLayout, RootOptions,
};
use crate::diagnostics::{DiagnosticsLog, Monitor};
use crate::exec::Execution;
use crate::flux::NumericalFlux;
use crate::io::config::{InitialData, MeshSource, RunConfig};
use crate::mesh::{build_cartesian_mesh, derive_dual, load_mesh, DualError, DualGeometry, MeshError, PrimalMesh};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("mesh: {0}")]
    Mesh(#[from] MeshError),
    #[error("dual mesh: {0}")]
    Dual(#[from] DualError),
    #[error("coupling: {0}")]
    Coupling(#[from] CouplingError),
    #[error("color field: {0}")]
    Color(#[from] ColorError),
    #[error("setup: {0}")]
    Setup(SchemeError),
    #[error("step {step} at t = {t}: {source}")]
    Step {
        step: usize,
        t: f64,
        source: SchemeError,
        /// Snapshots and diagnostics gathered before the failure.
        partial: Box<RunOutput>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub snapshots: Vec<Snapshot>,
    pub log: DiagnosticsLog,
    pub steps: usize,
    /// False when the run stopped on an error before `t_end`.
    pub complete: bool,
}

/// A fully assembled problem: geometry, coupling, initial state and run
/// controls.
#[derive(Debug, Clone)]
pub struct Problem {
    pub mesh: PrimalMesh,
    pub dual: DualGeometry,
    pub color: ColorField,
    pub flux: NumericalFlux,
    pub initial: SolverState,
    pub cfl_number: f64,
    pub max_dt: f64,
    pub t_end: f64,
    /// Requested snapshot times; `t_end` is always added.
    pub snapshots: Vec<f64>,
    pub cfl_guard: bool,
    pub entropy_diagnostics: bool,
    pub exec: Execution,
    /// Reference constant for well-balanced drift tracking.
    pub reference: Option<f64>,
    /// Stop after this many steps (the final state is snapshotted).
    pub max_steps: Option<usize>,
}

/// Initial cell values for a configured data family.
pub fn initial_values(
    mesh: &PrimalMesh,
    data: &InitialData,
    quadrature: super::InitQuadrature,
) -> Result<SolverState, SchemeError> {
    match *data {
        InitialData::Random { lo, hi, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = (0..mesh.num_cells())
                .map(|_| if hi > lo { rng.gen_range(lo..hi) } else { lo })
                .collect();
            SolverState::from_values(0.0, u)
        }
        ref d => init_state(mesh, |x, y| d.eval(x, y).unwrap_or(f64::NAN), quadrature),
    }
}

impl Problem {
    pub fn from_config(config: &RunConfig) -> Result<Self, RunError> {
        let mesh = match &config.mesh.source {
            MeshSource::Cartesian { nx, ny, bbox } => build_cartesian_mesh(*nx, *ny, *bbox)?,
            MeshSource::File(path) => load_mesh(path)?,
        };
        let dual = derive_dual(&mesh, &config.mesh.dual)?;
        let w_reg = config.layout.w_reg.resolve(mesh.max_edge_length());
        let layout = DomainLayout::new(config.layout.regions.clone(), w_reg);
        let color = build_color_field(&mesh, &layout, config.layout.quadrature_order)?;
        let roots = RootOptions {
            tol: config.scheme.tol_root,
            ..RootOptions::default()
        };
        let model = make_linear_coupling(config.coupling.gammas.clone(), config.coupling.fluxes.clone())?
            .with_root_options(roots);
        let mut flux = NumericalFlux::new(config.scheme.flux, model);
        flux.godunov_samples = config.scheme.godunov_samples;
        let initial =
            initial_values(&mesh, &config.run.initial, config.scheme.init_quadrature).map_err(RunError::Setup)?;
        Ok(Problem {
            mesh,
            dual,
            color,
            flux,
            initial,
            cfl_number: config.scheme.cfl_number,
            max_dt: config.scheme.max_dt,
            t_end: config.run.t_end,
            snapshots: config.run.snapshots.clone(),
            cfl_guard: config.scheme.cfl_guard,
            entropy_diagnostics: config.run.entropy_diagnostics,
            exec: Execution::default(),
            reference: None,
            max_steps: None,
        })
    }

    pub fn simulation(&self) -> Result<Simulation<'_>, SchemeError> {
        Ok(Simulation::new(&self.mesh, &self.dual, &self.color, &self.flux, self.initial.range())?
            .with_execution(self.exec)
            .with_cfl_guard(self.cfl_guard))
    }

    /// Snapshot times: the requested ones and `t_end`, sorted and deduplicated.
    pub fn snapshot_times(&self) -> Vec<f64> {
        let mut times: Vec<f64> = self.snapshots.iter().copied().filter(|&t| t <= self.t_end).collect();
        times.push(self.t_end);
        times.sort_by(f64::total_cmp);
        times.dedup();
        times
    }

    /// Runs to `t_end`, calling `observer` after every step.
    pub fn run_observed(
        &self,
        mut observer: impl FnMut(&SolverState, &StepRecord),
    ) -> Result<RunOutput, RunError> {
        let sim = self.simulation().map_err(RunError::Setup)?;
        let tau_cfl = sim.dt(self.cfl_number).map_err(RunError::Setup)?.min(self.max_dt);
        // an overflowing speed bound would otherwise stall the loop at τ = 0
        if !(tau_cfl > 0.0) {
            return Err(RunError::Setup(SchemeError::BadStep(tau_cfl)));
        }
        let mut monitor = Monitor::new(self.entropy_diagnostics, self.exec);
        if let Some(r) = self.reference {
            monitor = monitor.with_reference(r);
        }
        let mut out = RunOutput {
            snapshots: Vec::new(),
            log: DiagnosticsLog::default(),
            steps: 0,
            complete: false,
        };
        let mut state = self.initial.clone();
        'targets: for target in self.snapshot_times() {
            while state.t < target {
                if self.max_steps.is_some_and(|n| out.steps >= n) {
                    break 'targets;
                }
                let remaining = target - state.t;
                // land exactly on the target instead of leaving a sliver
                let hit = remaining <= tau_cfl * (1.0 + 1e-12);
                let tau = if hit { remaining } else { tau_cfl };
                match sim.step(&state, tau) {
                    Ok((mut next, record)) => {
                        if hit {
                            next.t = target;
                        }
                        monitor.record(next.t, &record, &self.mesh, &self.dual, &self.color, &self.flux);
                        observer(&next, &record);
                        state = next;
                        out.steps += 1;
                    }
                    Err(source) => {
                        out.snapshots.push(Snapshot {
                            t: state.t,
                            u: state.u.clone(),
                        });
                        out.log = monitor.log;
                        return Err(RunError::Step {
                            step: out.steps,
                            t: state.t,
                            source,
                            partial: Box::new(out),
                        });
                    }
                }
            }
            out.snapshots.push(Snapshot {
                t: state.t,
                u: state.u.clone(),
            });
        }
        if self.max_steps.is_some_and(|n| out.steps >= n) && out.snapshots.last().map(|s| s.t) != Some(state.t) {
            out.snapshots.push(Snapshot {
                t: state.t,
                u: state.u.clone(),
            });
        }
        out.complete = state.t >= self.t_end;
        out.log = monitor.log;
        Ok(out)
    }
}

pub fn run_problem(problem: &Problem) -> Result<RunOutput, RunError> {
    problem.run_observed(|_, _| {})
}

/// Builds the problem described by `config` and runs it.
pub fn run(config: &RunConfig) -> Result<RunOutput, RunError> {
    run_problem(&Problem::from_config(config)?)
}
