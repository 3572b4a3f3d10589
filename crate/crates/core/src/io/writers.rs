//! Field and diagnostics writers. All floats are written with 17 significant
//! digits so that files are byte-stable and diffable.

use std::fmt::Write as _;
use std::path::Path;

use crate::coupling::{ColorField, CouplingModel};
use crate::diagnostics::DiagnosticsLog;
use crate::mesh::{DualGeometry, PrimalMesh};

use super::config::OutputFormat;

#[derive(Debug, thiserror::Error)]
pub enum WriteError {
    #[error("field `{name}` has {got} values, mesh has {expected} cells")]
    FieldLength {
        name: String,
        got: usize,
        expected: usize,
    },
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Per-cell output fields: `u`, `w_K`, and the cell averages of the color
/// components.
#[derive(Debug, Clone, PartialEq)]
pub struct CellFields {
    pub u: Vec<f64>,
    pub w: Vec<f64>,
    /// `v[l][k]`: component `l+1` in cell `k`.
    pub v: Vec<Vec<f64>>,
}

impl CellFields {
    pub fn new(mesh: &PrimalMesh, dual: &DualGeometry, color: &ColorField, model: &CouplingModel, u: &[f64]) -> Self {
        let mut w = vec![0.0; mesh.num_cells()];
        let mut v = vec![vec![0.0; mesh.num_cells()]; color.components()];
        for k in 0..mesh.num_cells() {
            for f in mesh.face_range(k) {
                let a = dual.fractions[f];
                let ve = color.get(mesh.faces()[f].edge);
                w[k] += a * model.c0(u[k], ve);
                for (l, x) in ve.iter().enumerate() {
                    v[l][k] += a * x;
                }
            }
        }
        CellFields { u: u.to_vec(), w, v }
    }

    fn check(&self, mesh: &PrimalMesh) -> Result<(), WriteError> {
        let n = mesh.num_cells();
        let named = [("u", &self.u), ("w", &self.w)]
            .into_iter()
            .map(|(s, x)| (s.to_string(), x.len()))
            .chain(self.v.iter().enumerate().map(|(l, x)| (format!("v_{}", l + 1), x.len())));
        for (name, got) in named {
            if got != n {
                return Err(WriteError::FieldLength { name, got, expected: n });
            }
        }
        Ok(())
    }
}

#[inline]
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn snapshot_csv(mesh: &PrimalMesh, fields: &CellFields) -> Result<String, WriteError> {
    fields.check(mesh)?;
    let mut s = String::from("cell_id,centroid_x,centroid_y,u,w");
    for l in 0..fields.v.len() {
        let _ = write!(s, ",v_{}", l + 1);
    }
    s.push('\n');
    for (k, cell) in mesh.cells().iter().enumerate() {
        let _ = write!(
            s,
            "{k},{},{},{},{}",
            num(cell.centroid[0]),
            num(cell.centroid[1]),
            num(fields.u[k]),
            num(fields.w[k])
        );
        for comp in &fields.v {
            let _ = write!(s, ",{}", num(comp[k]));
        }
        s.push('\n');
    }
    Ok(s)
}

/// VTK legacy ASCII unstructured grid with polygon cells and cell scalars.
pub fn snapshot_vtk(mesh: &PrimalMesh, fields: &CellFields, title: &str) -> Result<String, WriteError> {
    fields.check(mesh)?;
    let mut s = String::from("# vtk DataFile Version 3.0\n");
    let title: String = title.chars().filter(|c| *c != '\n').take(255).collect();
    let _ = writeln!(s, "{title}\nASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {} double", mesh.vertices().len());
    for p in mesh.vertices() {
        let _ = writeln!(s, "{} {} 0", num(p[0]), num(p[1]));
    }
    let size: usize = mesh.cells().iter().map(|c| c.vertices.len() + 1).sum();
    let _ = writeln!(s, "CELLS {} {size}", mesh.num_cells());
    for c in mesh.cells() {
        let _ = write!(s, "{}", c.vertices.len());
        for i in &c.vertices {
            let _ = write!(s, " {i}");
        }
        s.push('\n');
    }
    let _ = writeln!(s, "CELL_TYPES {}", mesh.num_cells());
    for _ in mesh.cells() {
        // VTK_POLYGON
        s.push_str("7\n");
    }
    let _ = writeln!(s, "CELL_DATA {}", mesh.num_cells());
    let mut scalar = |name: &str, data: &[f64]| {
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for x in data {
            let _ = writeln!(s, "{}", num(*x));
        }
    };
    scalar("u", &fields.u);
    scalar("w", &fields.w);
    for (l, comp) in fields.v.iter().enumerate() {
        scalar(&format!("v_{}", l + 1), comp);
    }
    Ok(s)
}

fn write_file(path: &Path, text: &str) -> Result<(), WriteError> {
    std::fs::write(path, text).map_err(|source| WriteError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_snapshot(
    mesh: &PrimalMesh,
    fields: &CellFields,
    path: impl AsRef<Path>,
    format: OutputFormat,
) -> Result<(), WriteError> {
    let text = match format {
        OutputFormat::Csv => snapshot_csv(mesh, fields)?,
        OutputFormat::VtkLegacy => snapshot_vtk(mesh, fields, "coupled-fv snapshot")?,
    };
    write_file(path.as_ref(), &text)
}

pub const DIAGNOSTICS_HEADER: &str =
    "t,tau,max_principle_margin,entropy_residual_max,oscillation_increment,oscillation_sum";

/// One row per step. A step without entropy monitoring leaves that column empty.
pub fn diagnostics_csv(log: &DiagnosticsLog) -> String {
    let mut s = format!("{DIAGNOSTICS_HEADER}\n");
    for r in &log.steps {
        let entropy = r.entropy_residual_max.map(num).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{entropy},{},{}",
            num(r.t),
            num(r.tau),
            num(r.max_principle_margin),
            num(r.oscillation_increment),
            num(r.oscillation_sum)
        );
    }
    s
}

pub fn write_diagnostics(log: &DiagnosticsLog, path: impl AsRef<Path>) -> Result<(), WriteError> {
    write_file(path.as_ref(), &diagnostics_csv(log))
}
