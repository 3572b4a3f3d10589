//! Computable certificates of a run: maximum principle margins, subcell
//! entropy residuals, the oscillation sum, well-balanced drift, and front
//! speeds.

use crate::coupling::quadrature::adaptive_simpson;
use crate::coupling::{ColorField, CouplingModel};
use crate::exec::{self, Execution};
use crate::flux::{FluxKind, NumericalFlux};
use crate::mesh::{BoundingBox, DualGeometry, PrimalMesh};
use crate::scheme::{Snapshot, StepRecord};

/// Residual above which a subcell entropy inequality counts as violated.
pub const ENTROPY_TOL: f64 = 1e-10;
/// Slack of the discrete maximum principle.
pub const MAX_PRINCIPLE_TOL: f64 = 1e-11;
const ENTROPY_FLUX_TOL: f64 = 1e-13;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("well-balanced check needs constant initial data equal to u* = {u_star}")]
    NonConstantInitial { u_star: f64 },
    #[error("no snapshots to inspect")]
    NoSnapshots,
    #[error("level set {threshold} not found in the window at t = {t}")]
    LevelSetAbsent { threshold: f64, t: f64 },
    #[error("front speed needs at least two snapshots at distinct times")]
    TooFewSnapshots,
}

/// A convex entropy `U` with its first two derivatives.
#[derive(Debug, Clone, Copy)]
pub struct Entropy {
    pub value: fn(f64) -> f64,
    pub deriv: fn(f64) -> f64,
    pub second: fn(f64) -> f64,
}

impl Entropy {
    /// `U(w) = w²/2`.
    pub fn quadratic() -> Self {
        Entropy {
            value: |w| 0.5 * w * w,
            deriv: |w| w,
            second: |_| 1.0,
        }
    }
}

/// Entropy flux `F(u, v)·ν = ∫_0^u U'(C_0(θ, v)) ∂_θ C(θ, v)·ν dθ`.
pub fn entropy_flux_u(model: &CouplingModel, entropy: &Entropy, u: f64, v: &[f64], nu: [f64; 2]) -> f64 {
    adaptive_simpson(
        |t| {
            let d = model.dflux_du(t, v);
            (entropy.deriv)(model.c0(t, v)) * (d[0] * nu[0] + d[1] * nu[1])
        },
        0.0,
        u,
        ENTROPY_FLUX_TOL,
    )
}

/// Subcell entropy residuals
/// `U(w^{n+1,−}_{K,e}) − U(w_{K,e}) + τ|e|/(α|K|) (G_{e,K} − F(w_{K,e}, v_e)·ν_{K,e})`
/// per face. The numerical entropy flux `G` matches the flux kind: the
/// λ-diffusive form for Rusanov and the entropy flux at the extremizing state
/// for Godunov.
pub fn entropy_residuals(
    record: &StepRecord,
    mesh: &PrimalMesh,
    dual: &DualGeometry,
    color: &ColorField,
    flux: &NumericalFlux,
    entropy: &Entropy,
    exec: Execution,
) -> Vec<f64> {
    let model = &flux.model;
    let faces = mesh.faces();
    let u = &record.u_prev;
    let mut f_face = vec![0.0; mesh.num_faces()];
    exec::fill(exec, &mut f_face, |f| {
        entropy_flux_u(model, entropy, u[faces[f].cell], color.get(faces[f].edge), mesh.outward_normal(f))
    });
    let mut left_face = vec![usize::MAX; mesh.num_edges()];
    for (f, face) in faces.iter().enumerate() {
        if face.orientation > 0.0 {
            left_face[face.edge] = f;
        }
    }
    let mut g_edge = vec![0.0; mesh.num_edges()];
    exec::fill(exec, &mut g_edge, |e| {
        let lf = left_face[e];
        let Some(rf) = faces[lf].neighbor_face else {
            return f_face[lf];
        };
        let fv = record.edge_flux[e];
        match flux.kind {
            FluxKind::Rusanov => {
                let (fl, fr) = (f_face[lf], -f_face[rf]);
                let (wl, wr) = (record.w_face[lf], record.w_face[rf]);
                0.5 * (fl + fr) - 0.5 * fv.lambda * ((entropy.value)(wr) - (entropy.value)(wl))
            }
            FluxKind::Godunov => {
                if u[faces[lf].cell] == u[faces[rf].cell] {
                    f_face[lf]
                } else {
                    entropy_flux_u(model, entropy, fv.u_star, color.get(e), mesh.edge(e).normal)
                }
            }
        }
    });
    let mut out = vec![0.0; mesh.num_faces()];
    exec::fill(exec, &mut out, |f| {
        let face = &faces[f];
        let mu = record.tau * mesh.edge(face.edge).length / (dual.fractions[f] * mesh.cell(face.cell).area);
        let g = face.orientation * g_edge[face.edge];
        (entropy.value)(record.w_face_next[f]) - (entropy.value)(record.w_face[f]) + mu * (g - f_face[f])
    });
    out
}

/// `Σ_K Σ_e α_{K,e} |w^{n+1}_K − w^{n+1,−}_{K,e}|² |K|` with `ψ ≡ 1`.
pub fn oscillation_increment(record: &StepRecord, mesh: &PrimalMesh, dual: &DualGeometry) -> f64 {
    let mut s = 0.0;
    for k in 0..mesh.num_cells() {
        let mut c = 0.0;
        for f in mesh.face_range(k) {
            let d = record.w_cell_next[k] - record.w_face_next[f];
            c += dual.fractions[f] * d * d;
        }
        s += c * mesh.cell(k).area;
    }
    s
}

/// Worst signed margin of `u^{n+1}_K` inside the range of `u^n` over the cell
/// and its edge neighbors.
pub fn max_principle_margin(record: &StepRecord, mesh: &PrimalMesh) -> f64 {
    let mut worst = f64::INFINITY;
    for k in 0..mesh.num_cells() {
        let (mut lo, mut hi) = (record.u_prev[k], record.u_prev[k]);
        for face in mesh.cell_faces(k) {
            if let Some(n) = face.neighbor {
                lo = lo.min(record.u_prev[n]);
                hi = hi.max(record.u_prev[n]);
            }
        }
        let u = record.u_next[k];
        worst = worst.min(hi - u).min(u - lo);
    }
    worst
}

/// `max_K |Σ_e α_{K,e} C_0(u^{n+1}_K, v_e) − w^{n+1}_K|`.
pub fn conservation_residual(
    record: &StepRecord,
    mesh: &PrimalMesh,
    dual: &DualGeometry,
    color: &ColorField,
    model: &CouplingModel,
) -> f64 {
    let mut worst = 0.0f64;
    for k in 0..mesh.num_cells() {
        let mut s = 0.0;
        for f in mesh.face_range(k) {
            s += dual.fractions[f] * model.c0(record.u_next[k], color.get(mesh.faces()[f].edge));
        }
        worst = worst.max((s - record.w_cell_next[k]).abs());
    }
    worst
}

/// `min U''` over `samples` points of `[w_min, w_max]`.
pub fn convexity_modulus(entropy: &Entropy, (w_min, w_max): (f64, f64), samples: usize) -> f64 {
    let n = samples.max(2) - 1;
    (0..=n)
        .map(|i| (entropy.second)(w_min + (w_max - w_min) * i as f64 / n as f64))
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepDiagnostics {
    /// Time after the step.
    pub t: f64,
    pub tau: f64,
    pub max_principle_margin: f64,
    /// `None` when entropy monitoring is off.
    pub entropy_residual_max: Option<f64>,
    pub oscillation_increment: f64,
    pub oscillation_sum: f64,
    pub conservation_residual: f64,
    /// `max_K |u^{n+1}_K − u*|` when armed with a reference state.
    pub well_balanced_drift: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsLog {
    pub steps: Vec<StepDiagnostics>,
    /// Convexity modulus of the entropy over the realized `w` range.
    pub sigma_u: f64,
    w_range: (f64, f64),
}

impl Default for DiagnosticsLog {
    fn default() -> Self {
        DiagnosticsLog {
            steps: Vec::new(),
            sigma_u: f64::NAN,
            w_range: (f64::INFINITY, f64::NEG_INFINITY),
        }
    }
}

impl DiagnosticsLog {
    pub fn oscillation_sum(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.oscillation_sum)
    }

    pub fn max_entropy_residual(&self) -> Option<f64> {
        self.steps
            .iter()
            .filter_map(|s| s.entropy_residual_max)
            .reduce(f64::max)
    }

    pub fn max_conservation_residual(&self) -> f64 {
        self.steps.iter().map(|s| s.conservation_residual).fold(0.0, f64::max)
    }

    pub fn max_well_balanced_drift(&self) -> Option<f64> {
        self.steps.iter().filter_map(|s| s.well_balanced_drift).reduce(f64::max)
    }

    pub fn w_range(&self) -> (f64, f64) {
        self.w_range
    }
}

/// Accumulates a [`DiagnosticsLog`] step by step.
#[derive(Debug, Clone)]
pub struct Monitor {
    pub entropy: Entropy,
    pub entropy_enabled: bool,
    pub reference: Option<f64>,
    pub exec: Execution,
    pub log: DiagnosticsLog,
}

impl Monitor {
    pub fn new(entropy_enabled: bool, exec: Execution) -> Self {
        Monitor {
            entropy: Entropy::quadratic(),
            entropy_enabled,
            reference: None,
            exec,
            log: DiagnosticsLog::default(),
        }
    }

    /// Arms well-balanced drift tracking against the constant `u_star`.
    pub fn with_reference(mut self, u_star: f64) -> Self {
        self.reference = Some(u_star);
        self
    }

    pub fn record(
        &mut self,
        t: f64,
        record: &StepRecord,
        mesh: &PrimalMesh,
        dual: &DualGeometry,
        color: &ColorField,
        flux: &NumericalFlux,
    ) -> &StepDiagnostics {
        let entropy_residual_max = self.entropy_enabled.then(|| {
            entropy_residuals(record, mesh, dual, color, flux, &self.entropy, self.exec)
                .into_iter()
                .fold(f64::NEG_INFINITY, f64::max)
        });
        let inc = oscillation_increment(record, mesh, dual);
        let sum = self.log.oscillation_sum() + inc;
        for &w in record.w_face.iter().chain(&record.w_face_next) {
            self.log.w_range.0 = self.log.w_range.0.min(w);
            self.log.w_range.1 = self.log.w_range.1.max(w);
        }
        self.log.sigma_u = convexity_modulus(&self.entropy, self.log.w_range, 64);
        let drift = self
            .reference
            .map(|r| record.u_next.iter().map(|u| (u - r).abs()).fold(0.0, f64::max));
        self.log.steps.push(StepDiagnostics {
            t,
            tau: record.tau,
            max_principle_margin: max_principle_margin(record, mesh),
            entropy_residual_max,
            oscillation_increment: inc,
            oscillation_sum: sum,
            conservation_residual: conservation_residual(record, mesh, dual, color, &flux.model),
            well_balanced_drift: drift,
        });
        self.log.steps.last().expect("just pushed")
    }
}

/// The accumulated oscillation sum of a completed run.
pub fn oscillation_sum(log: &DiagnosticsLog) -> f64 {
    log.oscillation_sum()
}

/// Worst maximum-principle margin over all steps; a run passes when it is at
/// least `−1e−11`. An empty log gives `+∞`.
pub fn check_max_principle(log: &DiagnosticsLog) -> f64 {
    log.steps
        .iter()
        .map(|s| s.max_principle_margin)
        .fold(f64::INFINITY, f64::min)
}

/// `max_{n,K} |u_K − u*|` over the snapshots of a run started from `u ≡ u*`.
pub fn check_well_balanced(snapshots: &[Snapshot], u_star: f64) -> Result<f64, DiagnosticsError> {
    let first = snapshots.first().ok_or(DiagnosticsError::NoSnapshots)?;
    if first.u.iter().any(|&u| u != u_star) {
        return Err(DiagnosticsError::NonConstantInitial { u_star });
    }
    Ok(snapshots
        .iter()
        .flat_map(|s| s.u.iter())
        .map(|u| (u - u_star).abs())
        .fold(0.0, f64::max))
}

/// Mean position, projected on `direction`, of the points where the level set
/// `field = threshold` crosses the segments joining adjacent cell centroids
/// inside `window`.
pub fn level_set_position(
    mesh: &PrimalMesh,
    field: &[f64],
    threshold: f64,
    direction: [f64; 2],
    window: &BoundingBox,
) -> Option<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for edge in mesh.edges() {
        let Some(r) = edge.right else { continue };
        let (a, b) = (mesh.cell(edge.left).centroid, mesh.cell(r).centroid);
        if !window.contains(a) || !window.contains(b) {
            continue;
        }
        let (fa, fb) = (field[edge.left], field[r]);
        if (fa >= threshold) == (fb >= threshold) {
            continue;
        }
        let s = (threshold - fa) / (fb - fa);
        let p = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
        sum += p[0] * direction[0] + p[1] * direction[1];
        count += 1;
    }
    (count > 0).then(|| sum / count as f64)
}

/// Least-squares speed of the level set `threshold` along the unit `direction`.
pub fn front_speed(
    mesh: &PrimalMesh,
    snapshots: &[(f64, &[f64])],
    threshold: f64,
    direction: [f64; 2],
    window: &BoundingBox,
) -> Result<f64, DiagnosticsError> {
    let mut pts = Vec::with_capacity(snapshots.len());
    for &(t, field) in snapshots {
        let x = level_set_position(mesh, field, threshold, direction, window)
            .ok_or(DiagnosticsError::LevelSetAbsent { threshold, t })?;
        pts.push((t, x));
    }
    let n = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let xm = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = pts.iter().map(|p| (p.0 - tm) * (p.0 - tm)).sum();
    if pts.len() < 2 || stt == 0.0 {
        return Err(DiagnosticsError::TooFewSnapshots);
    }
    let stx: f64 = pts.iter().map(|p| (p.0 - tm) * (p.1 - xm)).sum();
    Ok(stx / stt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::{make_linear_coupling, FluxFamily, Gamma};
    use crate::mesh::build_cartesian_mesh;
    use approx::assert_abs_diff_eq;

    #[test]
    fn entropy_flux_of_burgers() {
        // U = w²/2, f = w²/2: F(w) = ∫ w · w dw = w³/3
        let m = make_linear_coupling(vec![Gamma::linear(1.0)], vec![FluxFamily::burgers([1.0, 0.0])]).unwrap();
        let e = Entropy::quadratic();
        assert_abs_diff_eq!(entropy_flux_u(&m, &e, 0.9, &[], [1.0, 0.0]), 0.243, epsilon = 1e-14);
        assert_abs_diff_eq!(entropy_flux_u(&m, &e, -2.0, &[], [0.0, 1.0]), 0.0, epsilon = 0.0);
    }

    #[test]
    fn entropy_flux_with_scaled_gamma() {
        // C_0 = 2u, C = (2u)²/2: F = ∫ 2θ · 4θ dθ = 8u³/3
        let m = make_linear_coupling(
            vec![Gamma::linear(1.0), Gamma::linear(2.0)],
            vec![FluxFamily::burgers([1.0, 0.0]); 2],
        )
        .unwrap();
        let e = Entropy::quadratic();
        assert_abs_diff_eq!(entropy_flux_u(&m, &e, 0.5, &[1.0], [1.0, 0.0]), 1.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn well_balanced_guard() {
        let s = vec![Snapshot {
            t: 0.0,
            u: vec![0.5, 0.6],
        }];
        assert!(check_well_balanced(&s, 0.5).is_err());
        let s = vec![Snapshot {
            t: 0.0,
            u: vec![0.5, 0.5],
        }];
        assert_eq!(check_well_balanced(&s, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn stationary_front() {
        let m = build_cartesian_mesh(10, 1, BoundingBox::new(0.0, 0.0, 1.0, 0.1)).unwrap();
        let u: Vec<f64> = (0..10).map(|i| if i < 4 { 1.0 } else { 0.0 }).collect();
        let window = BoundingBox::new(0.0, 0.0, 1.0, 0.1);
        let x = level_set_position(&m, &u, 0.5, [1.0, 0.0], &window).unwrap();
        assert_abs_diff_eq!(x, 0.4, epsilon = 1e-15);
        let v = front_speed(&m, &[(0.0, &u), (1.0, &u)], 0.5, [1.0, 0.0], &window).unwrap();
        assert_eq!(v, 0.0);
        let zero = vec![0.0; 10];
        assert!(front_speed(&m, &[(0.0, &zero), (1.0, &u)], 0.5, [1.0, 0.0], &window).is_err());
    }

    #[test]
    fn convexity_of_quadratic_entropy() {
        assert_eq!(convexity_modulus(&Entropy::quadratic(), (-1.0, 3.0), 64), 1.0);
    }
}
