//! Polygonal primal meshes and the dual geometry derived from them.
//!
//! A [`PrimalMesh`] stores counter-clockwise polygonal cells over a shared
//! vertex list. Edges and cell/edge adjacency are derived at construction and
//! never read from input. Each (cell, edge) pair is a *face*; faces are stored
//! contiguously per cell in the cell's vertex order, and every per-subcell
//! quantity in the crate (volume fractions, subcell states) is indexed by face.

mod dual;
mod quality;
mod text;

use std::collections::HashMap;

pub use dual::{derive_dual, BetaRule, DualError, DualGeometry};
pub use quality::{validate_mesh, MeshQualityReport, QualityThresholds};
pub use text::{load_mesh, parse_mesh, write_mesh_text};

/// Space dimension handled by the geometry kernels.
pub const DIM: usize = 2;

pub type Point = [f64; 2];

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("cell {cell} has fewer than 3 vertices")]
    TooFewVertices { cell: usize },
    #[error("cell {cell} references vertex {index}, but only {count} vertices exist")]
    VertexIndex {
        cell: usize,
        index: usize,
        count: usize,
    },
    #[error("cell {cell} repeats vertex {index}")]
    RepeatedVertex { cell: usize, index: usize },
    #[error("negative area cell {cell}")]
    NegativeArea { cell: usize },
    #[error("zero area cell {cell}")]
    ZeroArea { cell: usize },
    #[error("non-simple polygon in cell {cell}")]
    NonSimple { cell: usize },
    #[error("edge ({a}, {b}) is shared by more than two cells (cell {cell})")]
    OverSharedEdge { a: usize, b: usize, cell: usize },
    #[error("cells {first} and {second} traverse edge ({a}, {b}) in the same direction")]
    InconsistentOrientation {
        a: usize,
        b: usize,
        first: usize,
        second: usize,
    },
    #[error("degenerate bounding box")]
    DegenerateBox,
    #[error("cartesian mesh needs at least one cell in each direction")]
    EmptyGrid,
    #[error("mesh has no cells")]
    Empty,
    #[error("i/o error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub xmin: f64,
    pub ymin: f64,
    pub xmax: f64,
    pub ymax: f64,
}

impl BoundingBox {
    pub fn new(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> Self {
        BoundingBox {
            xmin,
            ymin,
            xmax,
            ymax,
        }
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, p: Point) -> bool {
        p[0] >= self.xmin && p[0] <= self.xmax && p[1] >= self.ymin && p[1] <= self.ymax
    }

    pub fn is_valid(&self) -> bool {
        [self.xmin, self.ymin, self.xmax, self.ymax]
            .iter()
            .all(|c| c.is_finite())
            && self.xmax > self.xmin
            && self.ymax > self.ymin
    }
}

/// A mesh edge. `vertices` are listed in the traversal order of the left cell,
/// and `normal` is the unit normal pointing from `left` towards `right`.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub vertices: [usize; 2],
    pub left: usize,
    pub right: Option<usize>,
    pub length: f64,
    pub normal: [f64; 2],
    pub midpoint: Point,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.right.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    /// Counter-clockwise vertex loop.
    pub vertices: Vec<usize>,
    pub area: f64,
    /// `p_K`, the sum of the edge lengths.
    pub perimeter: f64,
    /// `h_K`, the characteristic length entering the non-degeneracy ratios.
    /// Taken as the exterior perimeter of the cell.
    pub size: f64,
    pub centroid: Point,
}

/// One (cell, edge) incidence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Face {
    pub cell: usize,
    pub edge: usize,
    /// +1 when the cell is the left cell of the edge, -1 otherwise.
    pub orientation: f64,
    pub neighbor: Option<usize>,
    /// Index of the matching face on the neighbor cell.
    pub neighbor_face: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrimalMesh {
    dimension: usize,
    vertices: Vec<Point>,
    cells: Vec<Cell>,
    edges: Vec<Edge>,
    faces: Vec<Face>,
    face_offsets: Vec<usize>,
    h: f64,
}

fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

/// Signed area of a polygon (shoelace formula); positive when counter-clockwise.
pub fn signed_area(points: &[Point]) -> f64 {
    let n = points.len();
    let mut s = 0.0;
    for i in 0..n {
        s += cross(points[i], points[(i + 1) % n]);
    }
    0.5 * s
}

/// Signed area of the triangle (a, b, c).
pub fn triangle_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * cross(sub(b, a), sub(c, a))
}

fn polygon_centroid(points: &[Point], area: f64) -> Point {
    let n = points.len();
    let (mut cx, mut cy) = (0.0, 0.0);
    for i in 0..n {
        let p = points[i];
        let q = points[(i + 1) % n];
        let c = cross(p, q);
        cx += (p[0] + q[0]) * c;
        cy += (p[1] + q[1]) * c;
    }
    [cx / (6.0 * area), cy / (6.0 * area)]
}

fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = cross(sub(p2, p1), sub(q1, p1));
    let d2 = cross(sub(p2, p1), sub(q2, p1));
    let d3 = cross(sub(q2, q1), sub(p1, q1));
    let d4 = cross(sub(q2, q1), sub(p2, q1));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on_segment = |a: Point, b: Point, p: Point| {
        p[0] >= a[0].min(b[0])
            && p[0] <= a[0].max(b[0])
            && p[1] >= a[1].min(b[1])
            && p[1] <= a[1].max(b[1])
    };
    (d1 == 0.0 && on_segment(p1, p2, q1))
        || (d2 == 0.0 && on_segment(p1, p2, q2))
        || (d3 == 0.0 && on_segment(q1, q2, p1))
        || (d4 == 0.0 && on_segment(q1, q2, p2))
}

fn is_simple(points: &[Point]) -> bool {
    let n = points.len();
    for i in 0..n {
        let (a1, a2) = (points[i], points[(i + 1) % n]);
        for j in (i + 1)..n {
            // adjacent edges share a vertex by construction
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (b1, b2) = (points[j], points[(j + 1) % n]);
            if segments_intersect(a1, a2, b1, b2) {
                return false;
            }
        }
    }
    true
}

impl PrimalMesh {
    /// Builds a mesh from a vertex list and counter-clockwise vertex loops,
    /// deriving edges, normals, adjacency and per-cell measures.
    pub fn from_polygons(vertices: Vec<Point>, cells: Vec<Vec<usize>>) -> Result<Self, MeshError> {
        if cells.is_empty() {
            return Err(MeshError::Empty);
        }
        let nv = vertices.len();
        let mut cell_records = Vec::with_capacity(cells.len());
        for (k, loop_) in cells.iter().enumerate() {
            if loop_.len() < 3 {
                return Err(MeshError::TooFewVertices { cell: k });
            }
            for (j, &i) in loop_.iter().enumerate() {
                if i >= nv {
                    return Err(MeshError::VertexIndex {
                        cell: k,
                        index: i,
                        count: nv,
                    });
                }
                if loop_[..j].contains(&i) {
                    return Err(MeshError::RepeatedVertex { cell: k, index: i });
                }
            }
            let pts: Vec<Point> = loop_.iter().map(|&i| vertices[i]).collect();
            let area = signed_area(&pts);
            if area < 0.0 {
                return Err(MeshError::NegativeArea { cell: k });
            }
            if area == 0.0 || !area.is_finite() {
                return Err(MeshError::ZeroArea { cell: k });
            }
            if !is_simple(&pts) {
                return Err(MeshError::NonSimple { cell: k });
            }
            let perimeter: f64 = (0..pts.len())
                .map(|i| {
                    let d = sub(pts[(i + 1) % pts.len()], pts[i]);
                    d[0].hypot(d[1])
                })
                .sum();
            cell_records.push(Cell {
                vertices: loop_.clone(),
                area,
                perimeter,
                size: perimeter,
                centroid: polygon_centroid(&pts, area),
            });
        }

        let mut edges: Vec<Edge> = Vec::new();
        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        let mut faces = Vec::new();
        let mut face_offsets = Vec::with_capacity(cells.len() + 1);
        face_offsets.push(0);
        for (k, loop_) in cells.iter().enumerate() {
            let n = loop_.len();
            for j in 0..n {
                let (a, b) = (loop_[j], loop_[(j + 1) % n]);
                let key = (a.min(b), a.max(b));
                match lookup.get(&key) {
                    None => {
                        let (pa, pb) = (vertices[a], vertices[b]);
                        let d = sub(pb, pa);
                        let length = d[0].hypot(d[1]);
                        lookup.insert(key, edges.len());
                        faces.push(Face {
                            cell: k,
                            edge: edges.len(),
                            orientation: 1.0,
                            neighbor: None,
                            neighbor_face: None,
                        });
                        edges.push(Edge {
                            vertices: [a, b],
                            left: k,
                            right: None,
                            length,
                            normal: [d[1] / length, -d[0] / length],
                            midpoint: [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])],
                        });
                    }
                    Some(&e) => {
                        let edge = &mut edges[e];
                        if edge.right.is_some() {
                            return Err(MeshError::OverSharedEdge { a, b, cell: k });
                        }
                        if edge.vertices == [a, b] {
                            return Err(MeshError::InconsistentOrientation {
                                a,
                                b,
                                first: edge.left,
                                second: k,
                            });
                        }
                        edge.right = Some(k);
                        faces.push(Face {
                            cell: k,
                            edge: e,
                            orientation: -1.0,
                            neighbor: Some(edge.left),
                            neighbor_face: None,
                        });
                    }
                }
            }
            face_offsets.push(faces.len());
        }
        // link faces across interior edges
        let mut left_face = vec![usize::MAX; edges.len()];
        for (f, face) in faces.iter().enumerate() {
            if face.orientation > 0.0 {
                left_face[face.edge] = f;
            }
        }
        for f in 0..faces.len() {
            if faces[f].orientation < 0.0 {
                let lf = left_face[faces[f].edge];
                faces[f].neighbor_face = Some(lf);
                faces[lf].neighbor_face = Some(f);
                faces[lf].neighbor = Some(faces[f].cell);
            }
        }
        let h = cell_records.iter().map(|c| c.size).fold(0.0, f64::max);
        Ok(PrimalMesh {
            dimension: DIM,
            vertices,
            cells: cell_records,
            edges,
            faces,
            face_offsets,
            h,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, k: usize) -> &Cell {
        &self.cells[k]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    /// Face indices of cell `k`, in the cell's stored edge order.
    pub fn face_range(&self, k: usize) -> std::ops::Range<usize> {
        self.face_offsets[k]..self.face_offsets[k + 1]
    }

    pub fn cell_faces(&self, k: usize) -> &[Face] {
        &self.faces[self.face_range(k)]
    }

    /// Outward unit normal `ν_{K,e}` of a face.
    pub fn outward_normal(&self, f: usize) -> [f64; 2] {
        let face = &self.faces[f];
        let n = self.edges[face.edge].normal;
        if face.orientation > 0.0 {
            n
        } else {
            [-n[0], -n[1]]
        }
    }

    /// `h = sup_K h_K`.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn max_edge_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).fold(0.0, f64::max)
    }

    pub fn bounding_box(&self) -> BoundingBox {
        let mut b = BoundingBox::new(f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.vertices {
            b.xmin = b.xmin.min(p[0]);
            b.ymin = b.ymin.min(p[1]);
            b.xmax = b.xmax.max(p[0]);
            b.ymax = b.ymax.max(p[1]);
        }
        b
    }

    pub fn cell_points(&self, k: usize) -> Vec<Point> {
        self.cells[k].vertices.iter().map(|&i| self.vertices[i]).collect()
    }

    /// The two endpoints of the edge behind face `f`, in the cell's
    /// counter-clockwise order.
    pub fn face_endpoints(&self, f: usize) -> (Point, Point) {
        let face = &self.faces[f];
        let [a, b] = self.edges[face.edge].vertices;
        if face.orientation > 0.0 {
            (self.vertices[a], self.vertices[b])
        } else {
            (self.vertices[b], self.vertices[a])
        }
    }

    /// `Σ_e |e| ν_{K,e}` for cell `k`; zero up to round-off for closed polygons.
    pub fn normal_closure(&self, k: usize) -> [f64; 2] {
        let mut s = [0.0, 0.0];
        for f in self.face_range(k) {
            let n = self.outward_normal(f);
            let l = self.edges[self.faces[f].edge].length;
            s[0] += l * n[0];
            s[1] += l * n[1];
        }
        s
    }
}

/// Axis-aligned `nx × ny` quadrilateral mesh of `bbox`. Vertices are numbered
/// row by row and cell `(i, j)` gets index `j * nx + i`.
pub fn build_cartesian_mesh(nx: usize, ny: usize, bbox: BoundingBox) -> Result<PrimalMesh, MeshError> {
    if nx == 0 || ny == 0 {
        return Err(MeshError::EmptyGrid);
    }
    if !bbox.is_valid() {
        return Err(MeshError::DegenerateBox);
    }
    let xs: Vec<f64> = (0..=nx)
        .map(|i| if i == nx { bbox.xmax } else { bbox.xmin + bbox.width() * (i as f64) / (nx as f64) })
        .collect();
    let ys: Vec<f64> = (0..=ny)
        .map(|j| if j == ny { bbox.ymax } else { bbox.ymin + bbox.height() * (j as f64) / (ny as f64) })
        .collect();
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for &y in &ys {
        for &x in &xs {
            vertices.push([x, y]);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut cells = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            cells.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    PrimalMesh::from_polygons(vertices, cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit() -> BoundingBox {
        BoundingBox::new(0.0, 0.0, 1.0, 1.0)
    }

    #[test]
    fn single_unit_square() {
        let m = build_cartesian_mesh(1, 1, unit()).unwrap();
        assert_eq!(m.num_cells(), 1);
        assert_eq!(m.num_edges(), 4);
        assert_eq!(m.cell(0).area, 1.0);
        assert_eq!(m.cell(0).perimeter, 4.0);
        assert!(m.edges().iter().all(Edge::is_boundary));
    }

    #[test]
    fn two_cells_share_one_edge() {
        let m = build_cartesian_mesh(2, 1, BoundingBox::new(0.0, 0.0, 2.0, 1.0)).unwrap();
        assert_eq!(m.num_cells(), 2);
        let interior: Vec<&Edge> = m.edges().iter().filter(|e| !e.is_boundary()).collect();
        assert_eq!(interior.len(), 1);
        let e = interior[0];
        assert_eq!(e.length, 1.0);
        assert_eq!((e.left, e.right), (0, Some(1)));
        assert_eq!(e.normal, [1.0, 0.0]);
    }

    #[test]
    fn reference_grid_measures() {
        let m = build_cartesian_mesh(100, 100, BoundingBox::new(-1.0, -1.0, 1.0, 1.0)).unwrap();
        assert_eq!(m.num_cells(), 10_000);
        for c in m.cells() {
            assert_relative_eq!(c.area, 4e-4, max_relative = 1e-10);
        }
        for e in m.edges() {
            assert_relative_eq!(e.length, 0.02, max_relative = 1e-10);
        }
        let total: f64 = m.cells().iter().map(|c| c.area).sum();
        assert_relative_eq!(total, 4.0, max_relative = 1e-10);
    }

    #[test]
    fn closed_polygon_identity_and_symmetric_adjacency() {
        let m = build_cartesian_mesh(7, 5, BoundingBox::new(-0.3, 0.1, 2.2, 1.7)).unwrap();
        for k in 0..m.num_cells() {
            let s = m.normal_closure(k);
            assert!(s[0].abs() <= 1e-12 * m.cell(k).perimeter);
            assert!(s[1].abs() <= 1e-12 * m.cell(k).perimeter);
            for f in m.face_range(k) {
                let face = m.faces()[f];
                if let Some(nf) = face.neighbor_face {
                    let other = m.faces()[nf];
                    assert_eq!(other.neighbor, Some(k));
                    assert_eq!(other.neighbor_face, Some(f));
                    assert_eq!(other.edge, face.edge);
                    assert_eq!(other.orientation, -face.orientation);
                }
            }
        }
    }

    #[test]
    fn rejects_clockwise_cells() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let err = PrimalMesh::from_polygons(v, vec![vec![0, 3, 2, 1]]).unwrap_err();
        assert_eq!(err.to_string(), "negative area cell 0");
    }

    #[test]
    fn rejects_bow_tie() {
        let v = vec![[0.0, 0.0], [0.0, 1.0], [2.0, 0.0], [2.0, 2.0]];
        // the self-intersecting loop still has positive net area
        let err = PrimalMesh::from_polygons(v, vec![vec![0, 1, 2, 3]]).unwrap_err();
        assert!(matches!(err, MeshError::NonSimple { cell: 0 }), "{err:?}");
    }

    #[test]
    fn rejects_degenerate_box_and_empty_grid() {
        assert_eq!(
            build_cartesian_mesh(2, 2, BoundingBox::new(0.0, 0.0, 0.0, 1.0)).unwrap_err(),
            MeshError::DegenerateBox
        );
        assert_eq!(build_cartesian_mesh(0, 2, unit()).unwrap_err(), MeshError::EmptyGrid);
    }

    #[test]
    fn rejects_overlapping_orientation() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]];
        let err =
            PrimalMesh::from_polygons(v, vec![vec![0, 1, 2, 3], vec![0, 1, 4]]).unwrap_err();
        assert!(matches!(err, MeshError::InconsistentOrientation { .. }), "{err:?}");
    }
}
