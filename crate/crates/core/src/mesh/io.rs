//! Plain-text mesh format.
//!
//! ```text
//! ndim=2 nv=<n> ne=<m>
//! x y          (n lines)
//! i j k        (m lines, 0-based vertex indices)
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::SimplexMesh;
use crate::error::{Error, Result};

/// Reads a mesh and checks orientation and conformity. Periodic pairing is not
/// stored in the file; call [`SimplexMesh::make_periodic`] afterwards.
pub fn read_mesh(path: impl AsRef<Path>) -> Result<SimplexMesh> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_mesh(&text, path)
}

pub(crate) fn parse_mesh(text: &str, path: &Path) -> Result<SimplexMesh> {
    let err = |line: usize, msg: String| Error::Parse { path: path.to_path_buf(), line, msg };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    let (mut ndim, mut nv, mut ne) = (None, None, None);
    for tok in header.split_whitespace() {
        let (key, value) = tok.split_once('=').ok_or_else(|| err(hline, format!("expected key=value, got `{tok}`")))?;
        let value: usize = value.parse().map_err(|_| err(hline, format!("bad integer in `{tok}`")))?;
        match key {
            "ndim" => ndim = Some(value),
            "nv" => nv = Some(value),
            "ne" => ne = Some(value),
            _ => return Err(err(hline, format!("unknown header key `{key}`"))),
        }
    }
    let missing = |k: &str| err(hline, format!("header lacks `{k}`"));
    if ndim.ok_or_else(|| missing("ndim"))? != 2 {
        return Err(err(hline, "only ndim=2 is supported".into()));
    }
    let nv = nv.ok_or_else(|| missing("nv"))?;
    let ne = ne.ok_or_else(|| missing("ne"))?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = lines.next().ok_or_else(|| err(0, format!("expected {nv} vertices")))?;
        let v: Vec<f64> = l
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| err(ln, format!("bad coordinate `{t}`"))))
            .collect::<Result<_>>()?;
        if v.len() != 2 || !v.iter().all(|x| x.is_finite()) {
            return Err(err(ln, "expected two finite coordinates".into()));
        }
        vertices.push([v[0], v[1]]);
    }
    let mut triangles = Vec::with_capacity(ne);
    for _ in 0..ne {
        let (ln, l) = lines.next().ok_or_else(|| err(0, format!("expected {ne} triangles")))?;
        let t: Vec<usize> = l
            .split_whitespace()
            .map(|s| s.parse::<usize>().map_err(|_| err(ln, format!("bad vertex index `{s}`"))))
            .collect::<Result<_>>()?;
        if t.len() != 3 {
            return Err(err(ln, "expected three vertex indices".into()));
        }
        if let Some(&bad) = t.iter().find(|&&i| i >= nv) {
            return Err(err(ln, format!("vertex index {bad} out of range")));
        }
        triangles.push([t[0], t[1], t[2]]);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(err(ln, "trailing content after the last triangle".into()));
    }
    SimplexMesh::new(vertices, triangles)
}

/// Writes the mesh with round-trip exact coordinates.
pub fn write_mesh(mesh: &SimplexMesh, path: impl AsRef<Path>) -> Result<()> {
    let mut s = String::new();
    let _ = writeln!(s, "ndim=2 nv={} ne={}", mesh.n_vertices(), mesh.n_triangles());
    for v in &mesh.vertices {
        let _ = writeln!(s, "{:?} {:?}", v[0], v[1]);
    }
    for t in &mesh.triangles {
        let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
    }
    fs::write(path, s)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<SimplexMesh> {
        parse_mesh(s, Path::new("mem"))
    }

    #[test]
    fn two_triangles() {
        let m = parse("ndim=2 nv=4 ne=2\n0 0\n1 0\n1 1\n0 1\n0 1 2\n0 2 3\n").unwrap();
        assert_eq!(m.n_triangles(), 2);
    }

    #[test]
    fn parse_error_names_line() {
        let e = parse("ndim=2 nv=3 ne=1\n0 0\n1 x\n0 1\n0 1 2\n").unwrap_err();
        match e {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn edge_shared_three_times_is_rejected() {
        let e = parse("ndim=2 nv=5 ne=3\n0 0\n1 0\n0 1\n1 1\n0 -1\n0 1 2\n1 3 2\n2 1 4\n").unwrap_err();
        assert!(matches!(e, Error::Conformity(..)), "{e}");
    }

    #[test]
    fn round_trip() {
        let m = SimplexMesh::generate_jittered(4, 3, super::super::BoundingBox::square(0.0, 1.0), true, 0.2, 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.txt");
        write_mesh(&m, &p).unwrap();
        let r = read_mesh(&p).unwrap();
        assert_eq!(r.vertices, m.vertices);
        assert_eq!(r.triangles, m.triangles);
    }
}
