use std::fs;

use coupled_fv::diagnostics::check_max_principle;
use coupled_fv::io::config::{InitialData, MeshSource, OutputFormat};
use coupled_fv::io::{parse_config_str, write_diagnostics, write_snapshot, CellFields};
use coupled_fv::mesh::{load_mesh, parse_mesh, write_mesh_text, PrimalMesh};
use coupled_fv::presets::preset;
use coupled_fv::scheme::{run_problem, Problem};

/// Quads on an `n × n` grid over [−1, 1]², every other one split in two
/// triangles.
fn mixed_mesh(n: usize) -> PrimalMesh {
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::new();
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([-1.0 + 2.0 * i as f64 / n as f64, -1.0 + 2.0 * j as f64 / n as f64]);
        }
    }
    let mut cells = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if (i + j) % 2 == 0 {
                cells.push(vec![a, b, c]);
                cells.push(vec![a, c, d]);
            } else {
                cells.push(vec![a, b, c, d]);
            }
        }
    }
    PrimalMesh::from_polygons(vertices, cells).unwrap()
}

#[test]
fn mesh_text_round_trips() {
    let m = mixed_mesh(5);
    let text = write_mesh_text(&m);
    let back = parse_mesh(&text).unwrap();
    assert_eq!(back, m);
    assert_eq!(write_mesh_text(&back), text);
}

#[test]
fn run_on_a_mesh_file_writes_stable_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let mesh_path = dir.path().join("mixed.mesh");
    fs::write(&mesh_path, write_mesh_text(&mixed_mesh(12))).unwrap();
    assert_eq!(load_mesh(&mesh_path).unwrap().num_cells(), 6 * 12 * 3);

    let mut c = preset("two-domain").unwrap();
    c.mesh.source = MeshSource::File(mesh_path.clone());
    c.run.initial = InitialData::Random {
        lo: 0.0,
        hi: 1.0,
        seed: 11,
    };
    c.run.t_end = 0.2;
    c.run.snapshots = vec![0.0, 0.1];
    // the file path survives a trip through the config text
    let c = parse_config_str(&coupled_fv::io::serialize_config(&c)).unwrap();

    let write_all = |sub: &str| {
        let p = Problem::from_config(&c).unwrap();
        let out = run_problem(&p).unwrap();
        let target = dir.path().join(sub);
        fs::create_dir(&target).unwrap();
        for (i, s) in out.snapshots.iter().enumerate() {
            let fields = CellFields::new(&p.mesh, &p.dual, &p.color, &p.flux.model, &s.u);
            write_snapshot(&p.mesh, &fields, target.join(format!("{i}.csv")), OutputFormat::Csv).unwrap();
            write_snapshot(&p.mesh, &fields, target.join(format!("{i}.vtk")), OutputFormat::VtkLegacy).unwrap();
        }
        write_diagnostics(&out.log, target.join("diagnostics.csv")).unwrap();
        out
    };
    let a = write_all("a");
    let b = write_all("b");
    assert_eq!(a, b);
    assert_eq!(a.snapshots.iter().map(|s| s.t).collect::<Vec<_>>(), vec![0.0, 0.1, 0.2]);
    assert!(check_max_principle(&a.log) >= -1e-11);
    for name in ["0.csv", "1.csv", "2.csv", "0.vtk", "2.vtk", "diagnostics.csv"] {
        let x = fs::read(dir.path().join("a").join(name)).unwrap();
        let y = fs::read(dir.path().join("b").join(name)).unwrap();
        assert_eq!(x, y, "{name} differs between identical runs");
    }
    let diag = fs::read_to_string(dir.path().join("a/diagnostics.csv")).unwrap();
    assert_eq!(diag.lines().count(), a.steps + 1);
    let csv = fs::read_to_string(dir.path().join("a/2.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6 * 12 * 3 + 1);
    assert!(csv.starts_with("cell_id,centroid_x,centroid_y,u,w,v_1\n"));
}

#[test]
fn missing_mesh_file_is_reported() {
    let mut c = preset("burgers-1d").unwrap();
    c.mesh.source = MeshSource::File("/nonexistent/dir/x.mesh".into());
    let err = Problem::from_config(&c).unwrap_err();
    assert!(err.to_string().contains("x.mesh"), "{err}");
}
