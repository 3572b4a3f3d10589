use std::ops::Deref;

use super::layout::DomainLayout;
use super::quadrature::gauss_legendre;
use crate::mesh::PrimalMesh;

/// Slack allowed before a color vector is projected back onto the simplex.
const SIMPLEX_SLACK: f64 = 1e-12;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ColorError {
    #[error("color vector {v:?} is outside the simplex")]
    OutsideSimplex { v: Vec<f64> },
    #[error("regions overlap on edge {edge}: color components sum to {sum}")]
    Overlap { edge: usize, sum: f64 },
    #[error("indicator of region {region} on edge {edge} is {value}, outside [0, 1]")]
    IndicatorRange { edge: usize, region: usize, value: f64 },
    #[error("quadrature order must be positive")]
    ZeroOrder,
    #[error("color field has {got} edges, mesh has {expected}")]
    EdgeCount { got: usize, expected: usize },
}

/// A point of the simplex hull `{v : v_l ≥ 0, Σ v_l ≤ 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorVector(Vec<f64>);

/// Projects `v` onto the simplex when it lies outside by at most the slack.
fn project(v: &mut [f64]) -> bool {
    for x in v.iter_mut() {
        if !(*x >= -SIMPLEX_SLACK && *x <= 1.0 + SIMPLEX_SLACK) {
            return false;
        }
        *x = x.clamp(0.0, 1.0);
    }
    let s: f64 = v.iter().sum();
    if s > 1.0 + SIMPLEX_SLACK {
        return false;
    }
    if s > 1.0 {
        v.iter_mut().for_each(|x| *x /= s);
    }
    true
}

impl ColorVector {
    pub fn new(mut v: Vec<f64>) -> Result<Self, ColorError> {
        if project(&mut v) {
            Ok(ColorVector(v))
        } else {
            Err(ColorError::OutsideSimplex { v })
        }
    }

    pub fn zero(components: usize) -> Self {
        ColorVector(vec![0.0; components])
    }

    /// Simplex vertex `e_l` for `l` in `1..=L`; `l = 0` gives the origin.
    pub fn vertex(components: usize, l: usize) -> Self {
        let mut v = vec![0.0; components];
        if l > 0 {
            v[l - 1] = 1.0;
        }
        ColorVector(v)
    }

    /// Weight of the reference component, `1 − Σ v_l`.
    pub fn reference_weight(&self) -> f64 {
        1.0 - self.0.iter().sum::<f64>()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for ColorVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// One color vector per mesh edge, stored flat.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorField {
    components: usize,
    values: Vec<f64>,
}

impl ColorField {
    pub fn uniform(num_edges: usize, v: &ColorVector) -> Self {
        ColorField {
            components: v.len(),
            values: v.iter().copied().cycle().take(num_edges * v.len()).collect(),
        }
    }

    pub fn from_vectors(vectors: Vec<ColorVector>, components: usize) -> Result<Self, ColorError> {
        let mut values = Vec::with_capacity(vectors.len() * components);
        for v in vectors {
            if v.len() != components {
                return Err(ColorError::OutsideSimplex { v: v.into_inner() });
            }
            values.extend_from_slice(&v);
        }
        Ok(ColorField { components, values })
    }

    /// `L`.
    pub fn components(&self) -> usize {
        self.components
    }

    pub fn num_edges(&self) -> usize {
        if self.components == 0 {
            usize::MAX
        } else {
            self.values.len() / self.components
        }
    }

    /// Checks the field against a mesh's edge count. A field with zero
    /// components fits every mesh.
    pub fn check_mesh(&self, mesh: &PrimalMesh) -> Result<(), ColorError> {
        if self.components > 0 && self.num_edges() != mesh.num_edges() {
            return Err(ColorError::EdgeCount {
                got: self.num_edges(),
                expected: mesh.num_edges(),
            });
        }
        Ok(())
    }

    #[inline]
    pub fn get(&self, edge: usize) -> &[f64] {
        &self.values[edge * self.components..(edge + 1) * self.components]
    }

    /// True when every edge carries the same vector.
    pub fn is_uniform(&self) -> bool {
        let c = self.components;
        c == 0 || self.values.chunks(c).all(|v| v == &self.values[..c])
    }
}

/// Averages the regularized indicators of `layout` along each edge with a
/// Gauss–Legendre rule of the given order.
pub fn build_color_field(
    mesh: &PrimalMesh,
    layout: &DomainLayout,
    quadrature_order: usize,
) -> Result<ColorField, ColorError> {
    if quadrature_order == 0 {
        return Err(ColorError::ZeroOrder);
    }
    let (nodes, weights) = gauss_legendre(quadrature_order);
    let big_l = layout.num_components();
    let mut values = Vec::with_capacity(mesh.num_edges() * big_l);
    let mut v = vec![0.0; big_l];
    for (e, edge) in mesh.edges().iter().enumerate() {
        let a = mesh.vertices()[edge.vertices[0]];
        let b = mesh.vertices()[edge.vertices[1]];
        for (l, slot) in v.iter_mut().enumerate() {
            let mut s = 0.0;
            for (x, w) in nodes.iter().zip(&weights) {
                let t = 0.5 * (x + 1.0);
                let p = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
                s += 0.5 * w * layout.indicator(l, p);
            }
            if !(-SIMPLEX_SLACK..=1.0 + SIMPLEX_SLACK).contains(&s) {
                return Err(ColorError::IndicatorRange {
                    edge: e,
                    region: l + 1,
                    value: s,
                });
            }
            *slot = s;
        }
        if !project(&mut v) {
            return Err(ColorError::Overlap {
                edge: e,
                sum: v.iter().sum(),
            });
        }
        values.extend_from_slice(&v);
    }
    Ok(ColorField {
        components: big_l,
        values,
    })
}
