//! Legacy ASCII VTK export.
//!
//! Every element gets its own three points, so DG discontinuities survive.
//! Fields are sampled at the element vertices.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;
use crate::refelem::REF_VERTICES;
use crate::scenarios::State;
use crate::spaces::{DgSpace, FemSpace, FieldDg, FieldFem};

pub enum VtkField<'a> {
    Dg(&'a str, &'a FieldDg),
    Fem(&'a str, &'a FieldFem),
}

fn write_values(s: &mut String, name: &str, m: usize, samples: impl Iterator<Item = Vec<f64>>) {
    if m == 1 {
        writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default").unwrap();
        for v in samples {
            writeln!(s, "{:.16e}", v[0]).unwrap();
        }
    } else {
        writeln!(s, "VECTORS {name} double").unwrap();
        for v in samples {
            let z = if m > 2 { v[2] } else { 0.0 };
            writeln!(s, "{:.16e} {:.16e} {:.16e}", v[0], v[1], z).unwrap();
        }
    }
}

/// Renders an unstructured grid with point data for `fields`.
pub fn render_vtk(dg: &DgSpace, fem: &FemSpace, fields: &[VtkField], title: &str) -> String {
    let ne = dg.n_elements();
    let mut s = String::new();
    writeln!(s, "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID").unwrap();
    writeln!(s, "POINTS {} double", 3 * ne).unwrap();
    for map in &dg.maps {
        for r in REF_VERTICES {
            let x = map.map(r);
            writeln!(s, "{:.16e} {:.16e} 0", x[0], x[1]).unwrap();
        }
    }
    writeln!(s, "CELLS {ne} {}", 4 * ne).unwrap();
    for e in 0..ne {
        writeln!(s, "3 {} {} {}", 3 * e, 3 * e + 1, 3 * e + 2).unwrap();
    }
    writeln!(s, "CELL_TYPES {ne}").unwrap();
    for _ in 0..ne {
        writeln!(s, "5").unwrap();
    }
    if !fields.is_empty() {
        writeln!(s, "POINT_DATA {}", 3 * ne).unwrap();
    }
    let at_vertices = || (0..ne).flat_map(|e| REF_VERTICES.iter().map(move |&r| (e, r)));
    for f in fields {
        match *f {
            VtkField::Dg(name, u) => write_values(&mut s, name, u.m, at_vertices().map(|(e, r)| dg.eval(u, e, r))),
            VtkField::Fem(name, u) => write_values(&mut s, name, u.m, at_vertices().map(|(e, r)| fem.eval(u, e, r))),
        }
    }
    s
}

/// Writes every field of `state`.
pub fn export_vtk(dg: &DgSpace, fem: &FemSpace, state: &State, path: &Path) -> Result<()> {
    let (d, f) = state.fields();
    let fields: Vec<VtkField> =
        d.into_iter().map(|(n, u)| VtkField::Dg(n, u)).chain(f.into_iter().map(|(n, u)| VtkField::Fem(n, u))).collect();
    std::fs::write(path, render_vtk(dg, fem, &fields, state.system().name()))?;
    Ok(())
}
