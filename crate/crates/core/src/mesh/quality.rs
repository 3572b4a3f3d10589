use super::{DualGeometry, PrimalMesh};

/// Constants of the three mesh non-degeneracy conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityThresholds {
    /// Upper bound `C` on `h_K p_K / |K|`.
    pub shape: f64,
    /// Lower bound `C1` on `|e| / h`.
    pub edge_min: f64,
    /// Upper bound `C2` on `|e| / h`.
    pub edge_max: f64,
    /// Lower bound `c` on `|E(x_K, e)| / h²`.
    pub subcell_min: f64,
}

impl Default for QualityThresholds {
    fn default() -> Self {
        QualityThresholds {
            shape: 100.0,
            edge_min: 1e-3,
            edge_max: 10.0,
            subcell_min: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshQualityReport {
    pub max_shape_ratio: f64,
    pub worst_shape_cell: usize,
    pub min_edge_ratio: f64,
    pub max_edge_ratio: f64,
    pub min_subcell_ratio: f64,
    pub shape_ok: bool,
    pub edge_ok: bool,
    pub subcell_ok: bool,
    pub thresholds: QualityThresholds,
}

impl MeshQualityReport {
    pub fn pass(&self) -> bool {
        self.shape_ok && self.edge_ok && self.subcell_ok
    }
}

pub fn validate_mesh(
    mesh: &PrimalMesh,
    dual: &DualGeometry,
    thresholds: QualityThresholds,
) -> MeshQualityReport {
    let h = mesh.h();
    let mut max_shape_ratio = 0.0;
    let mut worst_shape_cell = 0;
    for (k, c) in mesh.cells().iter().enumerate() {
        let r = c.size * c.perimeter / c.area;
        if r > max_shape_ratio {
            max_shape_ratio = r;
            worst_shape_cell = k;
        }
    }
    let (mut min_edge_ratio, mut max_edge_ratio) = (f64::INFINITY, 0.0f64);
    for e in mesh.edges() {
        let r = e.length / h;
        min_edge_ratio = min_edge_ratio.min(r);
        max_edge_ratio = max_edge_ratio.max(r);
    }
    let min_subcell_ratio = dual
        .subcell_areas
        .iter()
        .fold(f64::INFINITY, |m, &a| m.min(a / (h * h)));
    MeshQualityReport {
        max_shape_ratio,
        worst_shape_cell,
        min_edge_ratio,
        max_edge_ratio,
        min_subcell_ratio,
        shape_ok: max_shape_ratio <= thresholds.shape,
        edge_ok: min_edge_ratio >= thresholds.edge_min && max_edge_ratio <= thresholds.edge_max,
        subcell_ok: min_subcell_ratio >= thresholds.subcell_min,
        thresholds,
    }
}
