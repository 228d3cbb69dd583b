//! Run artifacts read back by independent parsers.

use std::collections::HashMap;
use std::path::Path;

use compat_dg::config::RunConfig;
use compat_dg::driver::run;
use compat_dg::io::SERIES_HEADER;
use vtkio::model::{Attribute, CellType, DataSet, Piece, VertexNumbers};

const CONFIG: &str = r#"
system = "maxwellglm"
degree = 2
final_time = 0.02

[mesh]
kind = "jittered"
nx = 4
ny = 4
bbox = [-0.5, 0.5, -0.5, 0.5]
jitter = 0.2
seed = 3

[time]
policy = "fixed"
dt = 0.01

[scenario]
kind = "gaussian"
sigma = 0.2
e0 = [0.2, 0.0, 1.0]
p0 = 0.5

[output]
series_every = 1
vtk_every = 1
"#;

fn run_once(dir: &Path) -> RunConfig {
    let cfg = RunConfig::parse(CONFIG, Path::new("artifacts.toml")).unwrap();
    run(&cfg, dir, dir).unwrap();
    cfg
}

#[test]
fn vtk_dumps_parse_with_vtkio() {
    let dir = tempfile::tempdir().unwrap();
    run_once(dir.path());
    let vtk = vtkio::Vtk::import(dir.path().join("vtk/fields_000002.vtk")).unwrap();
    let DataSet::UnstructuredGrid { pieces, .. } = vtk.data else { panic!("not an unstructured grid") };
    let Piece::Inline(piece) = &pieces[0] else { panic!("expected an inline piece") };
    let n_tri = 2 * 4 * 4;
    assert_eq!(piece.cells.types.len(), n_tri);
    assert!(piece.cells.types.iter().all(|t| *t == CellType::Triangle));
    let VertexNumbers::Legacy { num_cells, vertices } = &piece.cells.cell_verts else { panic!("legacy cells") };
    assert_eq!((*num_cells as usize, vertices.len()), (n_tri, 4 * n_tri));
    let points: Vec<f64> = piece.points.clone().cast_into().unwrap();
    assert_eq!(points.len(), 3 * 3 * n_tri);

    let mut arrays = HashMap::new();
    for a in &piece.data.point {
        let Attribute::DataArray(d) = a else { panic!("unexpected field attribute") };
        let v: Vec<f64> = d.data.clone().cast_into().unwrap();
        assert!(v.iter().all(|x| x.is_finite()));
        arrays.insert(d.name.clone(), v);
    }
    let mut names: Vec<_> = arrays.keys().cloned().collect();
    names.sort();
    assert_eq!(names, ["B", "E", "p", "q"]);
    assert_eq!(arrays["p"].len(), 3 * n_tri);
    assert_eq!(arrays["E"].len(), 9 * n_tri);

    // Continuous fields agree at duplicated points.
    let key = |i: usize| ((points[3 * i] * 1e9).round() as i64, (points[3 * i + 1] * 1e9).round() as i64);
    let mut first: HashMap<(i64, i64), f64> = HashMap::new();
    let mut shared = 0;
    for i in 0..3 * n_tri {
        let p = arrays["p"][i];
        if let Some(&q) = first.get(&key(i)) {
            assert!((p - q).abs() < 1e-12, "p differs at a shared point: {p} vs {q}");
            shared += 1;
        } else {
            first.insert(key(i), p);
        }
    }
    assert!(shared > 0);
}

#[test]
fn series_and_coefficient_files_have_fixed_headers() {
    let dir = tempfile::tempdir().unwrap();
    run_once(dir.path());
    let series = std::fs::read_to_string(dir.path().join("series.csv")).unwrap();
    let mut lines = series.lines();
    assert_eq!(lines.next(), Some(SERIES_HEADER));
    assert_eq!(SERIES_HEADER, "step,t,energy,eps_c,eps_d,cg_iters,residual");
    assert_eq!(lines.count(), 3);
    let coeffs = std::fs::read_to_string(dir.path().join("vtk/fields_000002.csv")).unwrap();
    assert!(coeffs.starts_with("# maxwellglm\nfield,space,node,values\nB,dg,0,"));
}

#[test]
fn repeated_runs_produce_identical_dumps() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_once(a.path());
    run_once(b.path());
    for f in ["vtk/fields_000002.vtk", "vtk/fields_000002.csv", "series.csv"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}
