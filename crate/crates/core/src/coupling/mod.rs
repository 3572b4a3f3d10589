//! Coupling model of an `(L+1)`-component problem.
//!
//! Each component `l` carries a strictly increasing map `γ_l` from the common
//! unknown `u` to its conserved variable, and a flux family `A^l(w)`. A color
//! vector `v` in the simplex hull blends the components through the coupling
//! functions `C_0(u, v)` (conserved variable) and `C_i(u, v)` (flux).

mod color;
mod layout;
pub mod quadrature;
mod root;

use std::fmt;
use std::sync::Arc;

pub use color::{build_color_field, ColorError, ColorField, ColorVector};
pub use layout::{smoothstep, DomainLayout, Shape};
pub use root::{solve_increasing, RootError, RootOptions};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum CouplingError {
    #[error("need at least one component")]
    NoComponents,
    #[error("{gammas} gamma maps but {fluxes} flux families")]
    LengthMismatch { gammas: usize, fluxes: usize },
    #[error("gamma {index} is not strictly increasing near u = {u}")]
    NonMonotoneGamma { index: usize, u: f64 },
    #[error("d C0 / du is not positive at u = {u}, v = {v:?}")]
    NonMonotoneC0 { u: f64, v: Vec<f64> },
    #[error("vertex consistency fails for component {index} at u = {u}")]
    Inconsistent { index: usize, u: f64 },
    #[error("color vector has {got} components, model expects {expected}")]
    ColorLength { got: usize, expected: usize },
    #[error(transparent)]
    Root(#[from] RootError),
}

/// Strictly increasing map `γ_l : u ↦ w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gamma {
    /// `slope · u + offset`.
    Linear { slope: f64, offset: f64 },
    /// `cubic · u³ + linear · u`.
    CubicPlusLinear { cubic: f64, linear: f64 },
}

impl Gamma {
    pub fn linear(slope: f64) -> Self {
        Gamma::Linear { slope, offset: 0.0 }
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        match *self {
            Gamma::Linear { slope, offset } => slope * u + offset,
            Gamma::CubicPlusLinear { cubic, linear } => cubic * u * u * u + linear * u,
        }
    }

    #[inline]
    pub fn deriv(&self, u: f64) -> f64 {
        match *self {
            Gamma::Linear { slope, .. } => slope,
            Gamma::CubicPlusLinear { cubic, linear } => 3.0 * cubic * u * u + linear,
        }
    }

    fn is_linear(&self) -> bool {
        matches!(self, Gamma::Linear { .. })
    }
}

impl fmt::Display for Gamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gamma::Linear { slope, offset } if offset == 0.0 => write!(f, "linear({slope:?})"),
            Gamma::Linear { slope, offset } => write!(f, "linear({slope:?}, {offset:?})"),
            Gamma::CubicPlusLinear { cubic, linear } => write!(f, "cubic({cubic:?}, {linear:?})"),
        }
    }
}

/// Flux family `A^l(w)` of one component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FluxFamily {
    /// `w · velocity`.
    Linear { velocity: [f64; 2] },
    /// `(w − shift)² / 2 · direction`.
    Quadratic { direction: [f64; 2], shift: f64 },
}

impl FluxFamily {
    pub fn burgers(direction: [f64; 2]) -> Self {
        FluxFamily::Quadratic { direction, shift: 0.0 }
    }

    #[inline]
    pub fn eval(&self, w: f64) -> [f64; 2] {
        match *self {
            FluxFamily::Linear { velocity } => [w * velocity[0], w * velocity[1]],
            FluxFamily::Quadratic { direction, shift } => {
                let s = 0.5 * (w - shift) * (w - shift);
                [s * direction[0], s * direction[1]]
            }
        }
    }

    #[inline]
    pub fn deriv(&self, w: f64) -> [f64; 2] {
        match *self {
            FluxFamily::Linear { velocity } => velocity,
            FluxFamily::Quadratic { direction, shift } => [(w - shift) * direction[0], (w - shift) * direction[1]],
        }
    }
}

impl fmt::Display for FluxFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            FluxFamily::Linear { velocity: [a, b] } => write!(f, "linear({a:?}, {b:?})"),
            FluxFamily::Quadratic {
                direction: [a, b],
                shift,
            } => write!(f, "quadratic({a:?}, {b:?}, {shift:?})"),
        }
    }
}

/// Evaluators of the coupling functions. Implement this to supply coupling
/// functions outside the linear family; [`CouplingModel::custom`] validates
/// them by probing.
pub trait CouplingFunctions: Send + Sync + fmt::Debug {
    /// `L`, the number of non-reference components.
    fn num_components(&self) -> usize;
    fn c0(&self, u: f64, v: &[f64]) -> f64;
    fn dc0_du(&self, u: f64, v: &[f64]) -> f64;
    /// `(C_1, C_2)`.
    fn flux(&self, u: f64, v: &[f64]) -> [f64; 2];
    fn dflux_du(&self, u: f64, v: &[f64]) -> [f64; 2];
    /// `∂C_i / ∂v_l` for `l` in `1..=L`.
    fn dflux_dv(&self, u: f64, v: &[f64], l: usize) -> [f64; 2];
    /// `γ_l(u)` and `A^l(w)`; used for vertex consistency probes.
    fn gamma(&self, l: usize, u: f64) -> f64;
    fn component_flux(&self, l: usize, w: f64) -> [f64; 2];
    /// True when `w ↦ f(w, v)` has a derivative affine in `u` for every fixed
    /// `v`, so that directional flux extrema can be located in closed form.
    fn affine_flux_derivative(&self) -> bool {
        false
    }
}

/// The linear family `C_0 = (1 − Σv) γ_0(u) + Σ v_l γ_l(u)`,
/// `C_i = (1 − Σv) a_i^0(γ_0(u)) + Σ v_l a_i^l(γ_l(u))`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearCoupling {
    pub gammas: Vec<Gamma>,
    pub fluxes: Vec<FluxFamily>,
}

impl LinearCoupling {
    #[inline]
    fn weight(&self, v: &[f64], l: usize) -> f64 {
        if l == 0 {
            1.0 - v.iter().sum::<f64>()
        } else {
            v[l - 1]
        }
    }
}

impl CouplingFunctions for LinearCoupling {
    fn num_components(&self) -> usize {
        self.gammas.len() - 1
    }

    #[inline]
    fn c0(&self, u: f64, v: &[f64]) -> f64 {
        let mut s = self.weight(v, 0) * self.gammas[0].eval(u);
        for (l, g) in self.gammas.iter().enumerate().skip(1) {
            s += v[l - 1] * g.eval(u);
        }
        s
    }

    #[inline]
    fn dc0_du(&self, u: f64, v: &[f64]) -> f64 {
        let mut s = self.weight(v, 0) * self.gammas[0].deriv(u);
        for (l, g) in self.gammas.iter().enumerate().skip(1) {
            s += v[l - 1] * g.deriv(u);
        }
        s
    }

    #[inline]
    fn flux(&self, u: f64, v: &[f64]) -> [f64; 2] {
        let mut s = [0.0; 2];
        for (l, (g, a)) in self.gammas.iter().zip(&self.fluxes).enumerate() {
            let c = self.weight(v, l);
            let f = a.eval(g.eval(u));
            s[0] += c * f[0];
            s[1] += c * f[1];
        }
        s
    }

    #[inline]
    fn dflux_du(&self, u: f64, v: &[f64]) -> [f64; 2] {
        let mut s = [0.0; 2];
        for (l, (g, a)) in self.gammas.iter().zip(&self.fluxes).enumerate() {
            let c = self.weight(v, l) * g.deriv(u);
            let f = a.deriv(g.eval(u));
            s[0] += c * f[0];
            s[1] += c * f[1];
        }
        s
    }

    fn dflux_dv(&self, u: f64, _v: &[f64], l: usize) -> [f64; 2] {
        let fl = self.fluxes[l].eval(self.gammas[l].eval(u));
        let f0 = self.fluxes[0].eval(self.gammas[0].eval(u));
        [fl[0] - f0[0], fl[1] - f0[1]]
    }

    fn gamma(&self, l: usize, u: f64) -> f64 {
        self.gammas[l].eval(u)
    }

    fn component_flux(&self, l: usize, w: f64) -> [f64; 2] {
        self.fluxes[l].eval(w)
    }

    fn affine_flux_derivative(&self) -> bool {
        // with linear γ, C_0 is linear in u and C_i is at most quadratic
        self.gammas.iter().all(Gamma::is_linear)
    }
}

/// Range of `u` probed when validating monotonicity at construction.
pub const PROBE_RANGE: (f64, f64) = (-10.0, 10.0);

#[derive(Debug, Clone)]
pub struct CouplingModel {
    functions: Arc<dyn CouplingFunctions>,
    linear: Option<LinearCoupling>,
    root: RootOptions,
}

impl PartialEq for CouplingModel {
    fn eq(&self, other: &Self) -> bool {
        self.linear.is_some() && self.linear == other.linear && self.root == other.root
    }
}

/// Builds the linear coupling model from `L+1` gamma maps and flux families.
pub fn make_linear_coupling(gammas: Vec<Gamma>, fluxes: Vec<FluxFamily>) -> Result<CouplingModel, CouplingError> {
    if gammas.is_empty() {
        return Err(CouplingError::NoComponents);
    }
    if gammas.len() != fluxes.len() {
        return Err(CouplingError::LengthMismatch {
            gammas: gammas.len(),
            fluxes: fluxes.len(),
        });
    }
    let linear = LinearCoupling { gammas, fluxes };
    check_gammas(&linear, PROBE_RANGE)?;
    Ok(CouplingModel {
        functions: Arc::new(linear.clone()),
        linear: Some(linear),
        root: RootOptions::default(),
    })
}

fn probe_grid((lo, hi): (f64, f64)) -> impl Iterator<Item = f64> {
    const N: usize = 200;
    (0..=N).map(move |i| lo + (hi - lo) * i as f64 / N as f64)
}

fn check_gammas(f: &dyn CouplingFunctions, range: (f64, f64)) -> Result<(), CouplingError> {
    for l in 0..=f.num_components() {
        let mut prev = f64::NEG_INFINITY;
        for u in probe_grid(range) {
            let g = f.gamma(l, u);
            if !(g > prev) {
                return Err(CouplingError::NonMonotoneGamma { index: l, u });
            }
            prev = g;
        }
    }
    Ok(())
}

fn vertex(l: usize, big_l: usize) -> Vec<f64> {
    let mut v = vec![0.0; big_l];
    if l > 0 {
        v[l - 1] = 1.0;
    }
    v
}

impl CouplingModel {
    /// Wraps user-supplied coupling functions, checking monotonicity of `γ_l`
    /// and `C_0` and vertex consistency on a probe grid over `range`.
    pub fn custom(functions: Arc<dyn CouplingFunctions>, range: (f64, f64)) -> Result<Self, CouplingError> {
        let big_l = functions.num_components();
        check_gammas(functions.as_ref(), range)?;
        for u in probe_grid(range) {
            for l in 0..=big_l {
                let v = vertex(l, big_l);
                let g = functions.gamma(l, u);
                let a = functions.component_flux(l, g);
                let c = functions.flux(u, &v);
                let tol = 1e-12 * (1.0 + g.abs() + a[0].abs() + a[1].abs());
                if (functions.c0(u, &v) - g).abs() > tol || (c[0] - a[0]).abs() > tol || (c[1] - a[1]).abs() > tol {
                    return Err(CouplingError::Inconsistent { index: l, u });
                }
                if !(functions.dc0_du(u, &v) > 0.0) {
                    return Err(CouplingError::NonMonotoneC0 { u, v });
                }
            }
            if big_l > 0 {
                let v = vec![1.0 / (big_l as f64 + 1.0); big_l];
                if !(functions.dc0_du(u, &v) > 0.0) {
                    return Err(CouplingError::NonMonotoneC0 { u, v });
                }
            }
        }
        Ok(CouplingModel {
            functions,
            linear: None,
            root: RootOptions::default(),
        })
    }

    pub fn with_root_options(mut self, root: RootOptions) -> Self {
        self.root = root;
        self
    }

    pub fn root_options(&self) -> &RootOptions {
        &self.root
    }

    /// The linear-family parameters, when the model was built from them.
    pub fn linear(&self) -> Option<&LinearCoupling> {
        self.linear.as_ref()
    }

    pub fn functions(&self) -> &dyn CouplingFunctions {
        self.functions.as_ref()
    }

    /// `L`.
    pub fn num_components(&self) -> usize {
        self.functions.num_components()
    }

    pub fn affine_flux_derivative(&self) -> bool {
        self.functions.affine_flux_derivative()
    }

    pub fn check_color(&self, v: &[f64]) -> Result<(), CouplingError> {
        if v.len() != self.num_components() {
            return Err(CouplingError::ColorLength {
                got: v.len(),
                expected: self.num_components(),
            });
        }
        Ok(())
    }

    #[inline]
    pub fn c0(&self, u: f64, v: &[f64]) -> f64 {
        self.functions.c0(u, v)
    }

    #[inline]
    pub fn dc0_du(&self, u: f64, v: &[f64]) -> f64 {
        self.functions.dc0_du(u, v)
    }

    /// `(C_1(u, v), C_2(u, v))`.
    #[inline]
    pub fn flux_u(&self, u: f64, v: &[f64]) -> [f64; 2] {
        self.functions.flux(u, v)
    }

    #[inline]
    pub fn dflux_du(&self, u: f64, v: &[f64]) -> [f64; 2] {
        self.functions.dflux_du(u, v)
    }

    /// Source coefficient `ℓ_i^l = ∂C_i / ∂v_l`, `l` in `1..=L`.
    pub fn dflux_dv(&self, u: f64, v: &[f64], l: usize) -> [f64; 2] {
        self.functions.dflux_dv(u, v, l)
    }

    /// Solves `C_0(u, v) = w`.
    pub fn invert_c0_single(&self, w: f64, v: &[f64]) -> Result<f64, RootError> {
        self.invert_c0_single_from(w, v, 0.0)
    }

    pub fn invert_c0_single_from(&self, w: f64, v: &[f64], guess: f64) -> Result<f64, RootError> {
        let f = self.functions.as_ref();
        solve_increasing(|u| (f.c0(u, v), f.dc0_du(u, v)), w, guess, &self.root)
    }

    /// Solves `Σ α_e C_0(u, v_e) = w_target` over `(α_e, v_e)` pairs.
    pub fn invert_c0_weighted(&self, w_target: f64, pairs: &[(f64, &[f64])]) -> Result<f64, RootError> {
        self.invert_c0_weighted_from(w_target, pairs, 0.0)
    }

    pub fn invert_c0_weighted_from(
        &self,
        w_target: f64,
        pairs: &[(f64, &[f64])],
        guess: f64,
    ) -> Result<f64, RootError> {
        let f = self.functions.as_ref();
        solve_increasing(
            |u| {
                let mut s = 0.0;
                let mut d = 0.0;
                for &(a, v) in pairs {
                    s += a * f.c0(u, v);
                    d += a * f.dc0_du(u, v);
                }
                (s, d)
            },
            w_target,
            guess,
            &self.root,
        )
    }

    /// `f(w, v) = C(u(w, v), v)`.
    pub fn eval_flux_w(&self, w: f64, v: &[f64]) -> Result<[f64; 2], RootError> {
        let u = self.invert_c0_single(w, v)?;
        Ok(self.flux_u(u, v))
    }

    /// `∂f/∂w = ∂_u C / ∂_u C_0` at `u(w, v)`.
    pub fn eval_dflux_dw(&self, w: f64, v: &[f64]) -> Result<[f64; 2], RootError> {
        let u = self.invert_c0_single(w, v)?;
        Ok(self.dflux_dw_at_u(u, v))
    }

    #[inline]
    pub fn dflux_dw_at_u(&self, u: f64, v: &[f64]) -> [f64; 2] {
        let d = self.dflux_du(u, v);
        let c = self.dc0_du(u, v);
        [d[0] / c, d[1] / c]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn two_domain() -> CouplingModel {
        make_linear_coupling(
            vec![Gamma::linear(1.0), Gamma::linear(2.0)],
            vec![
                FluxFamily::burgers([1.0, 1.0]),
                FluxFamily::Quadratic {
                    direction: [1.0, 1.0],
                    shift: 0.9,
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn linear_closed_form() {
        let m = two_domain();
        assert_eq!(m.c0(3.0, &[0.5]), 4.5);
        assert_eq!(m.c0(-1.25, &[0.0]), -1.25);
    }

    #[test]
    fn three_component_vertex() {
        let b = FluxFamily::burgers([1.0, 0.0]);
        let m = make_linear_coupling(
            vec![Gamma::linear(1.0), Gamma::linear(2.0), Gamma::linear(3.0)],
            vec![b, b, b],
        )
        .unwrap();
        assert_eq!(m.c0(1.7, &[0.0, 1.0]), 3.0 * 1.7);
    }

    #[test]
    fn inversions() {
        let m = two_domain();
        assert_abs_diff_eq!(m.invert_c0_single(3.0, &[0.5]).unwrap(), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(m.invert_c0_single(5.0, &[0.0]).unwrap(), 5.0, epsilon = 1e-14);
        let u = m
            .invert_c0_weighted(3.0, &[(0.5, &[0.0][..]), (0.5, &[1.0][..])])
            .unwrap();
        assert_abs_diff_eq!(u, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn cubic_gamma_inversion() {
        let m = make_linear_coupling(
            vec![
                Gamma::CubicPlusLinear {
                    cubic: 1.0,
                    linear: 1.0,
                },
                Gamma::linear(1.0),
            ],
            vec![FluxFamily::burgers([1.0, 0.0]); 2],
        )
        .unwrap();
        let u = m.invert_c0_single(10.0, &[0.0]).unwrap();
        assert_abs_diff_eq!(u, 2.0, epsilon = 1e-13);
        assert!((m.c0(u, &[0.0]) - 10.0).abs() <= 1e-11);
        assert!(!m.affine_flux_derivative());
    }

    #[test]
    fn two_domain_fluxes() {
        let m = two_domain();
        assert_eq!(m.eval_flux_w(1.0, &[0.0]).unwrap(), [0.5, 0.5]);
        let f = m.eval_flux_w(2.0, &[1.0]).unwrap();
        assert_abs_diff_eq!(f[0], 0.605, epsilon = 1e-14);
        assert_abs_diff_eq!(f[1], 0.605, epsilon = 1e-14);
        assert_eq!(m.eval_dflux_dw(1.0, &[0.0]).unwrap(), [1.0, 1.0]);
        let d = m.eval_dflux_dw(2.0, &[1.0]).unwrap();
        assert_abs_diff_eq!(d[0], 1.1, epsilon = 1e-14);
    }

    #[test]
    fn rejects_decreasing_gamma() {
        let err = make_linear_coupling(
            vec![Gamma::linear(1.0), Gamma::linear(-2.0)],
            vec![FluxFamily::burgers([1.0, 0.0]); 2],
        )
        .unwrap_err();
        assert!(matches!(err, CouplingError::NonMonotoneGamma { index: 1, .. }));
        let err = make_linear_coupling(
            vec![Gamma::CubicPlusLinear {
                cubic: 1.0,
                linear: -3.0,
            }],
            vec![FluxFamily::burgers([1.0, 0.0])],
        )
        .unwrap_err();
        assert!(matches!(err, CouplingError::NonMonotoneGamma { index: 0, .. }));
    }

    #[test]
    fn rejects_length_mismatch() {
        assert_eq!(
            make_linear_coupling(vec![Gamma::linear(1.0)], vec![]).unwrap_err(),
            CouplingError::LengthMismatch { gammas: 1, fluxes: 0 }
        );
    }

    #[test]
    fn custom_model_round_trips_through_validation() {
        let lin = LinearCoupling {
            gammas: vec![Gamma::linear(1.0), Gamma::linear(2.0)],
            fluxes: vec![FluxFamily::burgers([1.0, 0.0]); 2],
        };
        let m = CouplingModel::custom(Arc::new(lin), (-5.0, 5.0)).unwrap();
        assert_eq!(m.c0(1.0, &[0.5]), 1.5);
        assert!(m.linear().is_none());
    }

    #[test]
    fn display_forms() {
        assert_eq!(Gamma::linear(2.0).to_string(), "linear(2.0)");
        assert_eq!(
            FluxFamily::Quadratic {
                direction: [1.0, 1.0],
                shift: 0.9
            }
            .to_string(),
            "quadratic(1.0, 1.0, 0.9)"
        );
    }
}
