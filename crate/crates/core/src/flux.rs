//! Two-point monotone numerical fluxes.
//!
//! Both fluxes are evaluated in the `u` parametrization: on a fixed color
//! vector the map `u ↦ w = C_0(u, v)` is increasing, so the interval between
//! two states and the extremum of the directional flux over it can be found
//! without inverting `C_0`. The `w`-argument entry points invert first.

use std::fmt;
use std::str::FromStr;

use crate::coupling::{CouplingModel, RootError};

/// Safety factor on the local wave speed of the Rusanov flux.
pub const RUSANOV_SAFETY: f64 = 1.01;
/// Safety factor on the global wave speed of the CFL law.
pub const CFL_SAFETY: f64 = 1.05;
pub const DEFAULT_GODUNOV_SAMPLES: usize = 64;
pub const DEFAULT_WAVE_SPEED_SAMPLES: usize = 64;
/// Golden-section stopping width, measured in `w`.
const GOLDEN_TOL: f64 = 1e-10;
/// Spacing of the `u` lattice sampled for Rusanov speeds on general models.
const LAMBDA_LATTICE: f64 = 1.0 / 64.0;
const LAMBDA_MAX_POINTS: f64 = 4096.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FluxKind {
    #[default]
    Rusanov,
    Godunov,
}

impl fmt::Display for FluxKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FluxKind::Rusanov => "rusanov",
            FluxKind::Godunov => "godunov",
        })
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
#[error("unknown flux kind `{0}` (expected rusanov or godunov)")]
pub struct UnknownFluxKind(pub String);

impl FromStr for FluxKind {
    type Err = UnknownFluxKind;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "rusanov" => Ok(FluxKind::Rusanov),
            "godunov" => Ok(FluxKind::Godunov),
            other => Err(UnknownFluxKind(other.to_string())),
        }
    }
}

/// A numerical flux value together with the data its entropy flux needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxValue {
    pub g: f64,
    /// Rusanov diffusion coefficient (0 for Godunov).
    pub lambda: f64,
    /// Godunov extremizing state in `u` (the left state for Rusanov).
    pub u_star: f64,
}

#[inline]
fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// `φ(w) = f(w, v) · ν`.
pub fn directional_flux(model: &CouplingModel, w: f64, v: &[f64], nu: [f64; 2]) -> Result<f64, RootError> {
    Ok(dot(model.eval_flux_w(w, v)?, nu))
}

/// `φ` as a function of `u`.
#[inline]
pub fn directional_flux_u(model: &CouplingModel, u: f64, v: &[f64], nu: [f64; 2]) -> f64 {
    dot(model.flux_u(u, v), nu)
}

/// `dφ/dw` at `w = C_0(u, v)`.
#[inline]
pub fn directional_speed_u(model: &CouplingModel, u: f64, v: &[f64], nu: [f64; 2]) -> f64 {
    dot(model.dflux_du(u, v), nu) / model.dc0_du(u, v)
}

/// `dφ/du`.
#[inline]
fn directional_slope_u(model: &CouplingModel, u: f64, v: &[f64], nu: [f64; 2]) -> f64 {
    dot(model.dflux_du(u, v), nu)
}

/// `sup |dφ/dw|` over `samples` evenly spaced `u` in `[m, M]`, times 1.05.
pub fn wave_speed_bound(model: &CouplingModel, v: &[f64], nu: [f64; 2], range: (f64, f64)) -> f64 {
    wave_speed_bound_sampled(model, v, nu, range, DEFAULT_WAVE_SPEED_SAMPLES)
}

pub fn wave_speed_bound_sampled(
    model: &CouplingModel,
    v: &[f64],
    nu: [f64; 2],
    (m, big_m): (f64, f64),
    samples: usize,
) -> f64 {
    let n = samples.max(2) - 1;
    let mut s = 0.0f64;
    for i in 0..=n {
        let u = if i == n { big_m } else { m + (big_m - m) * i as f64 / n as f64 };
        s = s.max(directional_speed_u(model, u, v, nu).abs());
    }
    CFL_SAFETY * s
}

/// Local Rusanov speed `1.01 · sup |dφ/dw|` over `u` in `[lo, hi]`.
fn local_speed(model: &CouplingModel, lo: f64, hi: f64, v: &[f64], nu: [f64; 2]) -> f64 {
    let mut s = directional_speed_u(model, lo, v, nu)
        .abs()
        .max(directional_speed_u(model, hi, v, nu).abs());
    if !model.affine_flux_derivative() && hi > lo {
        // lattice points inside the interval: the sample set grows with the
        // interval, keeping the speed monotone under inclusion
        let mut step = LAMBDA_LATTICE;
        while (hi - lo) / step > LAMBDA_MAX_POINTS {
            step *= 2.0;
        }
        let mut k = (lo / step).floor() + 1.0;
        while k * step < hi {
            s = s.max(directional_speed_u(model, k * step, v, nu).abs());
            k += 1.0;
        }
    }
    RUSANOV_SAFETY * s
}

/// Minimizer of `psi` over `[lo, hi]`.
fn minimize(
    psi: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    samples: usize,
    w_scale: f64,
) -> f64 {
    let n = samples.max(2);
    let at = |i: usize| if i == n { hi } else { lo + (hi - lo) * i as f64 / n as f64 };
    let mut best = (lo, psi(lo));
    let mut best_i = 0;
    for i in 1..=n {
        let u = at(i);
        let p = psi(u);
        if p < best.1 {
            best = (u, p);
            best_i = i;
        }
    }
    // golden section on the bracketing sample cell
    let (mut a, mut b) = (at(best_i.saturating_sub(1)), at((best_i + 1).min(n)));
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (psi(c), psi(d));
    let mut iter = 0;
    while (b - a) * w_scale > GOLDEN_TOL && iter < 200 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = psi(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = psi(d);
        }
        iter += 1;
    }
    for u in [c, d] {
        let p = psi(u);
        if p < best.1 {
            best = (u, p);
        }
    }
    best.0
}

/// Numerical flux bound to a coupling model.
#[derive(Debug, Clone)]
pub struct NumericalFlux {
    pub kind: FluxKind,
    pub model: CouplingModel,
    /// Sampling resolution of the general Godunov extremum search.
    pub godunov_samples: usize,
}

impl NumericalFlux {
    pub fn new(kind: FluxKind, model: CouplingModel) -> Self {
        NumericalFlux {
            kind,
            model,
            godunov_samples: DEFAULT_GODUNOV_SAMPLES,
        }
    }

    /// `g(w_L, w_R; v, ν)` for states given through `u` on the common color `v`.
    pub fn eval_u(&self, u_l: f64, u_r: f64, v: &[f64], nu: [f64; 2]) -> FluxValue {
        let m = &self.model;
        if u_l == u_r {
            return FluxValue {
                g: directional_flux_u(m, u_l, v, nu),
                lambda: 0.0,
                u_star: u_l,
            };
        }
        let (lo, hi) = if u_l < u_r { (u_l, u_r) } else { (u_r, u_l) };
        match self.kind {
            FluxKind::Rusanov => {
                let lambda = local_speed(m, lo, hi, v, nu);
                let fl = directional_flux_u(m, u_l, v, nu);
                let fr = directional_flux_u(m, u_r, v, nu);
                let wl = m.c0(u_l, v);
                let wr = m.c0(u_r, v);
                FluxValue {
                    g: 0.5 * (fl + fr) - 0.5 * (lambda * (wr - wl)),
                    lambda,
                    u_star: u_l,
                }
            }
            FluxKind::Godunov => {
                // minimize σφ: σ = 1 for the min branch, −1 for the max branch
                let sigma = if u_l < u_r { 1.0 } else { -1.0 };
                let psi = |u: f64| sigma * directional_flux_u(m, u, v, nu);
                let u_star = if m.affine_flux_derivative() {
                    self.quadratic_argmin(&psi, lo, hi, sigma, v, nu)
                } else {
                    let w_scale = m.dc0_du(lo, v).max(m.dc0_du(hi, v));
                    minimize(&psi, lo, hi, self.godunov_samples, w_scale)
                };
                FluxValue {
                    g: sigma * psi(u_star),
                    lambda: 0.0,
                    u_star,
                }
            }
        }
    }

    /// Argmin of a quadratic-in-`u` objective over `[lo, hi]`: an endpoint or
    /// the interior critical point.
    fn quadratic_argmin(
        &self,
        psi: &impl Fn(f64) -> f64,
        lo: f64,
        hi: f64,
        sigma: f64,
        v: &[f64],
        nu: [f64; 2],
    ) -> f64 {
        let m = &self.model;
        let mut best = if psi(lo) <= psi(hi) { lo } else { hi };
        let dl = sigma * directional_slope_u(m, lo, v, nu);
        let dh = sigma * directional_slope_u(m, hi, v, nu);
        if dl < 0.0 && dh > 0.0 {
            let crit = (lo + (hi - lo) * (dl / (dl - dh))).clamp(lo, hi);
            if psi(crit) < psi(best) {
                best = crit;
            }
        }
        best
    }

    /// `g(w_L, w_R; v, ν)` on `w` arguments.
    pub fn eval(&self, w_l: f64, w_r: f64, v: &[f64], nu: [f64; 2]) -> Result<f64, RootError> {
        let u_l = self.model.invert_c0_single(w_l, v)?;
        let u_r = if w_r == w_l {
            u_l
        } else {
            self.model.invert_c0_single(w_r, v)?
        };
        Ok(self.eval_u(u_l, u_r, v, nu).g)
    }
}

pub fn rusanov(model: &CouplingModel, w_l: f64, w_r: f64, v: &[f64], nu: [f64; 2]) -> Result<f64, RootError> {
    NumericalFlux::new(FluxKind::Rusanov, model.clone()).eval(w_l, w_r, v, nu)
}

pub fn godunov(model: &CouplingModel, w_l: f64, w_r: f64, v: &[f64], nu: [f64; 2]) -> Result<f64, RootError> {
    NumericalFlux::new(FluxKind::Godunov, model.clone()).eval(w_l, w_r, v, nu)
}
