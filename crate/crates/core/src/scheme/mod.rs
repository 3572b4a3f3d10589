//! The explicit well-balanced finite volume update.
//!
//! One step reconstructs the subcell states `w_{K,e} = C_0(u_K, v_e)`, applies
//! the flux balance
//!
//! ```text
//! w^{n+1}_K = w_K − τ/|K| (Σ_e g_{e,K} |e| − Σ_e f(w_{K,e}, v_e)·ν_{K,e} |e|)
//! ```
//!
//! and recovers `u^{n+1}_K` from `Σ_e α_{K,e} C_0(u, v_e) = w^{n+1}_K`. The two
//! sums are accumulated separately and subtracted, so that a constant state
//! produces identical sums and is preserved bit for bit.

mod run;

use crate::coupling::{solve_increasing, ColorField, CouplingModel, RootError};
use crate::exec::{self, Execution};
use crate::flux::{directional_flux_u, wave_speed_bound, FluxValue, NumericalFlux};
use crate::mesh::{triangle_area, DualGeometry, PrimalMesh};

pub use run::{run, run_problem, Problem, RunError, RunOutput, Snapshot};

/// Slack on the post-hoc subcell range check.
pub const CFL_GUARD_SLACK: f64 = 1e-9;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum SchemeError {
    #[error("initial data is not finite in cell {cell}")]
    NonFiniteInitial { cell: usize },
    #[error("cfl_number {0} out of (0,1]")]
    CflRange(f64),
    #[error("state has {got} values, mesh has {expected} cells")]
    StateLength { got: usize, expected: usize },
    #[error("color field does not match the mesh or model: {0}")]
    ColorMismatch(String),
    #[error("root solve failed in cell {cell}: {source}")]
    Root { cell: usize, source: RootError },
    #[error("CFL violation detected in cell {cell}: subcell state {value} outside [{lo}, {hi}]")]
    CflViolation { cell: usize, value: f64, lo: f64, hi: f64 },
    #[error("time step must be finite and non-negative, got {0}")]
    BadStep(f64),
}

/// Quadrature used for initial cell averages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitQuadrature {
    /// Value at the area centroid.
    #[default]
    Centroid,
    /// Edge-midpoint rule on the fan of triangles from the centroid; exact for
    /// quadratic data.
    SubcellFan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub t: f64,
    pub u: Vec<f64>,
    /// `m = inf u⁰`.
    pub m: f64,
    /// `M = sup u⁰`.
    pub big_m: f64,
}

impl SolverState {
    /// A state whose bounds are taken from `u` itself.
    pub fn from_values(t: f64, u: Vec<f64>) -> Result<Self, SchemeError> {
        if let Some(cell) = u.iter().position(|x| !x.is_finite()) {
            return Err(SchemeError::NonFiniteInitial { cell });
        }
        let m = u.iter().copied().fold(f64::INFINITY, f64::min);
        let big_m = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(SolverState { t, u, m, big_m })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.m, self.big_m)
    }
}

/// Cell averages of `u0`.
pub fn init_state(
    mesh: &PrimalMesh,
    u0: impl Fn(f64, f64) -> f64,
    quadrature: InitQuadrature,
) -> Result<SolverState, SchemeError> {
    let u = (0..mesh.num_cells())
        .map(|k| {
            let cell = mesh.cell(k);
            let c = cell.centroid;
            match quadrature {
                InitQuadrature::Centroid => u0(c[0], c[1]),
                InitQuadrature::SubcellFan => {
                    let mut s = 0.0;
                    for f in mesh.face_range(k) {
                        let (a, b) = mesh.face_endpoints(f);
                        let mid = |p: [f64; 2], q: [f64; 2]| u0(0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1]));
                        s += triangle_area(c, a, b) * (mid(c, a) + mid(a, b) + mid(b, c)) / 3.0;
                    }
                    s / cell.area
                }
            }
        })
        .collect();
    SolverState::from_values(0.0, u)
}

/// Subcell states of one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct Subcells {
    /// `w_{K,e}` per face.
    pub w_face: Vec<f64>,
    /// `w_K` per cell.
    pub w_cell: Vec<f64>,
}

pub fn reconstruct_subcell(
    state: &SolverState,
    mesh: &PrimalMesh,
    dual: &DualGeometry,
    color: &ColorField,
    model: &CouplingModel,
) -> Subcells {
    let faces = mesh.faces();
    let w_face: Vec<f64> = faces
        .iter()
        .map(|face| model.c0(state.u[face.cell], color.get(face.edge)))
        .collect();
    let w_cell = (0..mesh.num_cells())
        .map(|k| weighted_sum(mesh.face_range(k), &dual.fractions, &w_face))
        .collect();
    Subcells { w_face, w_cell }
}

#[inline]
fn weighted_sum(range: std::ops::Range<usize>, alpha: &[f64], values: &[f64]) -> f64 {
    let mut s = 0.0;
    for f in range {
        s += alpha[f] * values[f];
    }
    s
}

/// Everything a single step produces.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub tau: f64,
    /// `w^n_{K,e}`.
    pub w_face: Vec<f64>,
    /// `w^{n+1,−}_{K,e}`.
    pub w_face_next: Vec<f64>,
    /// `w^n_K`.
    pub w_cell: Vec<f64>,
    /// `w^{n+1}_K`.
    pub w_cell_next: Vec<f64>,
    /// `u^n_K`.
    pub u_prev: Vec<f64>,
    /// `u^{n+1}_K`.
    pub u_next: Vec<f64>,
    /// Consistent flux `f(w_{K,e}, v_e)·ν_{K,e}` per face.
    pub phi_face: Vec<f64>,
    /// Numerical flux per edge, oriented along the edge normal.
    pub edge_flux: Vec<FluxValue>,
}

impl StepRecord {
    /// `g_{e,K}` seen from face `f`.
    pub fn face_flux(&self, mesh: &PrimalMesh, f: usize) -> f64 {
        let face = &mesh.faces()[f];
        face.orientation * self.edge_flux[face.edge].g
    }
}

/// Per-run invariants of the step: geometry, model and the data bounds.
#[derive(Debug, Clone)]
pub struct Simulation<'a> {
    pub mesh: &'a PrimalMesh,
    pub dual: &'a DualGeometry,
    pub color: &'a ColorField,
    pub flux: &'a NumericalFlux,
    pub exec: Execution,
    /// Whether the post-hoc subcell range check raises errors.
    pub cfl_guard: bool,
    range: (f64, f64),
    /// `τ` at unit Courant number.
    tau_unit: f64,
    /// `[C_0(m, v_e), C_0(M, v_e)]` per face.
    w_bounds: Vec<(f64, f64)>,
    normals: Vec<[f64; 2]>,
    lengths: Vec<f64>,
    /// `Σ α` of cells whose faces all carry the same color, so that the
    /// inversion needs one `C_0` evaluation instead of one per face.
    uniform_alpha: Vec<Option<f64>>,
}

impl<'a> Simulation<'a> {
    /// Prepares a simulation over the data range `[m, M]`.
    pub fn new(
        mesh: &'a PrimalMesh,
        dual: &'a DualGeometry,
        color: &'a ColorField,
        flux: &'a NumericalFlux,
        range: (f64, f64),
    ) -> Result<Self, SchemeError> {
        color
            .check_mesh(mesh)
            .map_err(|e| SchemeError::ColorMismatch(e.to_string()))?;
        if color.components() != flux.model.num_components() {
            return Err(SchemeError::ColorMismatch(format!(
                "field has {} components, model expects {}",
                color.components(),
                flux.model.num_components()
            )));
        }
        let model = &flux.model;
        let normals: Vec<[f64; 2]> = (0..mesh.num_faces()).map(|f| mesh.outward_normal(f)).collect();
        let lengths: Vec<f64> = mesh.faces().iter().map(|f| mesh.edge(f.edge).length).collect();
        let speeds: Vec<f64> = mesh
            .edges()
            .iter()
            .enumerate()
            .map(|(e, edge)| wave_speed_bound(model, color.get(e), edge.normal, range))
            .collect();
        let mut tau_unit = f64::INFINITY;
        for (f, face) in mesh.faces().iter().enumerate() {
            let s = speeds[face.edge];
            if s > 0.0 {
                let t = dual.fractions[f] * mesh.cell(face.cell).area / lengths[f] / s;
                tau_unit = tau_unit.min(t);
            }
        }
        let w_bounds = mesh
            .faces()
            .iter()
            .map(|face| {
                let v = color.get(face.edge);
                (model.c0(range.0, v), model.c0(range.1, v))
            })
            .collect();
        let uniform_alpha = (0..mesh.num_cells())
            .map(|k| {
                let mut r = mesh.face_range(k);
                let first = color.get(mesh.faces()[r.start].edge);
                r.all(|f| color.get(mesh.faces()[f].edge) == first)
                    .then(|| mesh.face_range(k).map(|f| dual.fractions[f]).sum())
            })
            .collect();
        Ok(Simulation {
            mesh,
            dual,
            color,
            flux,
            exec: Execution::default(),
            cfl_guard: true,
            range,
            tau_unit,
            w_bounds,
            normals,
            lengths,
            uniform_alpha,
        })
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn with_cfl_guard(mut self, on: bool) -> Self {
        self.cfl_guard = on;
        self
    }

    pub fn model(&self) -> &CouplingModel {
        &self.flux.model
    }

    pub fn range(&self) -> (f64, f64) {
        self.range
    }

    /// `τ = cfl · min_{K,e} α|K| / (|e| · speed)`; infinite when no wave moves.
    pub fn dt(&self, cfl_number: f64) -> Result<f64, SchemeError> {
        if !(cfl_number > 0.0 && cfl_number <= 1.0) {
            return Err(SchemeError::CflRange(cfl_number));
        }
        Ok(cfl_number * self.tau_unit)
    }

    pub fn step(&self, state: &SolverState, tau: f64) -> Result<(SolverState, StepRecord), SchemeError> {
        let mesh = self.mesh;
        if state.u.len() != mesh.num_cells() {
            return Err(SchemeError::StateLength {
                got: state.u.len(),
                expected: mesh.num_cells(),
            });
        }
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(SchemeError::BadStep(tau));
        }
        let model = self.model();
        let faces = mesh.faces();
        let alpha = &self.dual.fractions;
        let u = &state.u;
        let exec = self.exec;
        let nf = mesh.num_faces();

        let mut w_face = vec![0.0; nf];
        exec::fill(exec, &mut w_face, |f| model.c0(u[faces[f].cell], self.color.get(faces[f].edge)));
        let mut phi_face = vec![0.0; nf];
        exec::fill(exec, &mut phi_face, |f| {
            directional_flux_u(model, u[faces[f].cell], self.color.get(faces[f].edge), self.normals[f])
        });
        let mut w_cell = vec![0.0; mesh.num_cells()];
        exec::fill(exec, &mut w_cell, |k| weighted_sum(mesh.face_range(k), alpha, &w_face));

        let mut edge_flux = vec![
            FluxValue {
                g: 0.0,
                lambda: 0.0,
                u_star: 0.0
            };
            mesh.num_edges()
        ];
        exec::fill(exec, &mut edge_flux, |e| {
            let edge = mesh.edge(e);
            let ul = u[edge.left];
            match edge.right {
                Some(r) => self.flux.eval_u(ul, u[r], self.color.get(e), edge.normal),
                // copy ghost: the consistent flux of the interior subcell
                None => FluxValue {
                    g: directional_flux_u(model, ul, self.color.get(e), edge.normal),
                    lambda: 0.0,
                    u_star: ul,
                },
            }
        });

        let mut w_face_next = vec![0.0; nf];
        exec::fill(exec, &mut w_face_next, |f| {
            let face = &faces[f];
            let g = face.orientation * edge_flux[face.edge].g;
            let mu = tau * self.lengths[f] / (alpha[f] * mesh.cell(face.cell).area);
            w_face[f] - mu * (g - phi_face[f])
        });

        let mut cell_next = vec![(0.0, 0.0); mesh.num_cells()];
        let roots = model.root_options();
        let funcs = model.functions();
        exec::try_fill(exec, &mut cell_next, |k| {
            let range = mesh.face_range(k);
            let (mut sg, mut sphi) = (0.0, 0.0);
            for f in range.clone() {
                let g = faces[f].orientation * edge_flux[faces[f].edge].g;
                sg += g * self.lengths[f];
                sphi += phi_face[f] * self.lengths[f];
            }
            let w_next = w_cell[k] - tau / mesh.cell(k).area * (sg - sphi);
            let u_next = solve_increasing(
                |x| {
                    if let Some(a) = self.uniform_alpha[k] {
                        let v = self.color.get(faces[range.start].edge);
                        return (a * funcs.c0(x, v), a * funcs.dc0_du(x, v));
                    }
                    let (mut s, mut d) = (0.0, 0.0);
                    for f in range.clone() {
                        let v = self.color.get(faces[f].edge);
                        s += alpha[f] * funcs.c0(x, v);
                        d += alpha[f] * funcs.dc0_du(x, v);
                    }
                    (s, d)
                },
                w_next,
                u[k],
                roots,
            )
            .map_err(|source| SchemeError::Root { cell: k, source })?;
            Ok((w_next, u_next))
        })?;
        let (w_cell_next, u_next): (Vec<f64>, Vec<f64>) = cell_next.into_iter().unzip();

        if self.cfl_guard {
            for (f, &w) in w_face_next.iter().enumerate() {
                let (lo, hi) = self.w_bounds[f];
                if !(w >= lo - CFL_GUARD_SLACK && w <= hi + CFL_GUARD_SLACK) {
                    return Err(SchemeError::CflViolation {
                        cell: faces[f].cell,
                        value: w,
                        lo,
                        hi,
                    });
                }
            }
        }

        let next = SolverState {
            t: state.t + tau,
            u: u_next.clone(),
            m: state.m,
            big_m: state.big_m,
        };
        let record = StepRecord {
            tau,
            w_face,
            w_face_next,
            w_cell,
            w_cell_next,
            u_prev: state.u.clone(),
            u_next,
            phi_face,
            edge_flux,
        };
        Ok((next, record))
    }
}

/// Stable time step for `state` under the given Courant number; `max_dt` caps
/// the result when no wave moves.
#[allow(clippy::too_many_arguments)]
pub fn compute_dt(
    state: &SolverState,
    mesh: &PrimalMesh,
    dual: &DualGeometry,
    color: &ColorField,
    flux: &NumericalFlux,
    cfl_number: f64,
    max_dt: f64,
) -> Result<f64, SchemeError> {
    let sim = Simulation::new(mesh, dual, color, flux, state.range())?;
    Ok(sim.dt(cfl_number)?.min(max_dt))
}

/// One step from `state` with time step `τ`.
pub fn step(
    state: &SolverState,
    mesh: &PrimalMesh,
    dual: &DualGeometry,
    color: &ColorField,
    flux: &NumericalFlux,
    tau: f64,
) -> Result<(SolverState, StepRecord), SchemeError> {
    Simulation::new(mesh, dual, color, flux, state.range())?.step(state, tau)
}
