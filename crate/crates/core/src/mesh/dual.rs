use super::{triangle_area, Point, PrimalMesh};

/// Rule placing the internal node `x_K = Σ β_{K,ϑ} x_ϑ` of each cell.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum BetaRule {
    /// Area centroid of the polygon. Coincides with the vertex average on
    /// triangles and parallelograms.
    #[default]
    Centroid,
    /// Equal weights `1/n` on the `n` vertices.
    UniformVertexWeights,
    /// One positive weight per vertex of each cell, summing to one.
    Explicit(Vec<Vec<f64>>),
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum DualError {
    #[error("internal node of cell {cell} is not strictly inside the cell; use the centroid rule")]
    NodeOutsideCell { cell: usize },
    #[error("explicit weights for cell {cell}: {reason}")]
    BadWeights { cell: usize, reason: String },
    #[error("explicit weights given for {given} cells, mesh has {expected}")]
    WeightCount { given: usize, expected: usize },
}

/// Internal nodes and subcell volume fractions of the dual mesh.
///
/// Subcell `E(x_K, e)` is the triangle spanned by edge `e` and `x_K`; the dual
/// cell of an edge is the union of the subcells on either side.
#[derive(Debug, Clone, PartialEq)]
pub struct DualGeometry {
    /// `x_K` per cell.
    pub nodes: Vec<Point>,
    /// `|E(x_K, e)|` per face.
    pub subcell_areas: Vec<f64>,
    /// `α_{K,e}` per face.
    pub fractions: Vec<f64>,
    /// `|K*(e)|` per edge.
    pub dual_volumes: Vec<f64>,
}

impl DualGeometry {
    pub fn fraction(&self, face: usize) -> f64 {
        self.fractions[face]
    }
}

pub fn derive_dual(mesh: &PrimalMesh, rule: &BetaRule) -> Result<DualGeometry, DualError> {
    if let BetaRule::Explicit(w) = rule {
        if w.len() != mesh.num_cells() {
            return Err(DualError::WeightCount {
                given: w.len(),
                expected: mesh.num_cells(),
            });
        }
    }
    let mut nodes = Vec::with_capacity(mesh.num_cells());
    let mut subcell_areas = vec![0.0; mesh.num_faces()];
    let mut fractions = vec![0.0; mesh.num_faces()];
    let mut dual_volumes = vec![0.0; mesh.num_edges()];

    for k in 0..mesh.num_cells() {
        let cell = mesh.cell(k);
        let pts = mesh.cell_points(k);
        let node = match rule {
            BetaRule::Centroid => cell.centroid,
            BetaRule::UniformVertexWeights => {
                let n = pts.len() as f64;
                let s = pts.iter().fold([0.0, 0.0], |a, p| [a[0] + p[0], a[1] + p[1]]);
                [s[0] / n, s[1] / n]
            }
            BetaRule::Explicit(all) => {
                let w = &all[k];
                if w.len() != pts.len() {
                    return Err(DualError::BadWeights {
                        cell: k,
                        reason: format!("{} weights for {} vertices", w.len(), pts.len()),
                    });
                }
                if w.iter().any(|&b| !(b > 0.0 && b < 1.0)) {
                    return Err(DualError::BadWeights {
                        cell: k,
                        reason: "weights must lie in (0, 1)".into(),
                    });
                }
                let total: f64 = w.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(DualError::BadWeights {
                        cell: k,
                        reason: format!("weights sum to {total}"),
                    });
                }
                pts.iter()
                    .zip(w)
                    .fold([0.0, 0.0], |a, (p, &b)| [a[0] + b * p[0], a[1] + b * p[1]])
            }
        };
        let range = mesh.face_range(k);
        let mut total = 0.0;
        for f in range.clone() {
            let (a, b) = mesh.face_endpoints(f);
            let area = triangle_area(node, a, b);
            if !(area > 0.0) {
                return Err(DualError::NodeOutsideCell { cell: k });
            }
            subcell_areas[f] = area;
            total += area;
        }
        for f in range {
            fractions[f] = subcell_areas[f] / total;
            dual_volumes[mesh.faces()[f].edge] += subcell_areas[f];
        }
        nodes.push(node);
    }
    Ok(DualGeometry {
        nodes,
        subcell_areas,
        fractions,
        dual_volumes,
    })
}
