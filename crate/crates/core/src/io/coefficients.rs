//! Raw coefficient dump for exact restart.
//!
//! One line per node: `field,space,node,c0[,c1,c2]`, where `node` is the
//! element-major DG node index or the global FEM node index. Values use the
//! shortest round-tripping decimal form, so a reload is bit-exact.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scenarios::State;

pub const COEFFICIENTS_HEADER: &str = "field,space,node,values";

pub fn render_coefficients(state: &State) -> String {
    let mut s = String::new();
    writeln!(s, "# {}", state.system().name()).unwrap();
    writeln!(s, "{COEFFICIENTS_HEADER}").unwrap();
    let mut row = |name: &str, space: &str, i: usize, v: &[f64]| {
        write!(s, "{name},{space},{i}").unwrap();
        for x in v {
            write!(s, ",{x:e}").unwrap();
        }
        s.push('\n');
    };
    let (dg, fem) = state.fields();
    for (name, u) in dg {
        for (i, v) in u.values.chunks(u.m).enumerate() {
            row(name, "dg", i, v);
        }
    }
    for (name, u) in fem {
        for (i, v) in u.values.chunks(u.m).enumerate() {
            row(name, "fem", i, v);
        }
    }
    s
}

pub fn write_coefficients(state: &State, path: &Path) -> Result<()> {
    std::fs::write(path, render_coefficients(state))?;
    Ok(())
}

/// Fills a copy of `template` from a dump. Every node of every field must be
/// present exactly once, and the system must match.
pub fn read_coefficients(text: &str, template: &State) -> Result<State> {
    let bad = |line: usize, msg: String| Error::Parse { path: "<coefficients>".into(), line, msg };
    let mut state = template.clone();
    let system = state.system().name();
    let (mut dg, mut fem) = state.fields_mut();
    let mut seen: Vec<Vec<bool>> = dg
        .iter()
        .map(|(_, u)| vec![false; u.values.len() / u.m])
        .chain(fem.iter().map(|(_, u)| vec![false; u.values.len() / u.m]))
        .collect();
    let mut header_seen = false;
    for (i, line) in text.lines().enumerate() {
        let ln = i + 1;
        if let Some(name) = line.strip_prefix("# ") {
            if name.trim() != system {
                return Err(bad(ln, format!("dump is for `{}`, expected `{system}`", name.trim())));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        if !header_seen {
            if line != COEFFICIENTS_HEADER {
                return Err(bad(ln, "unexpected header".into()));
            }
            header_seen = true;
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() < 4 {
            return Err(bad(ln, format!("expected at least 4 fields, found {}", f.len())));
        }
        let node: usize = f[2].parse().map_err(|e| bad(ln, format!("node index: {e}")))?;
        let (slot, target): (usize, &mut [f64]) = match f[1] {
            "dg" => {
                let k = dg.iter().position(|(n, _)| *n == f[0]).ok_or_else(|| bad(ln, format!("no DG field `{}`", f[0])))?;
                let u = &mut dg[k].1;
                let m = u.m;
                (k, u.values.get_mut(node * m..(node + 1) * m).ok_or_else(|| bad(ln, format!("node {node} out of range")))?)
            }
            "fem" => {
                let k = fem.iter().position(|(n, _)| *n == f[0]).ok_or_else(|| bad(ln, format!("no FEM field `{}`", f[0])))?;
                let u = &mut fem[k].1;
                let m = u.m;
                (dg.len() + k, u.values.get_mut(node * m..(node + 1) * m).ok_or_else(|| bad(ln, format!("node {node} out of range")))?)
            }
            other => return Err(bad(ln, format!("unknown space `{other}`"))),
        };
        if f.len() - 3 != target.len() {
            return Err(bad(ln, format!("expected {} components, found {}", target.len(), f.len() - 3)));
        }
        for (t, s) in target.iter_mut().zip(&f[3..]) {
            *t = s.parse().map_err(|e| bad(ln, format!("value `{s}`: {e}")))?;
        }
        if std::mem::replace(&mut seen[slot][node], true) {
            return Err(bad(ln, format!("node {node} of `{}` given twice", f[0])));
        }
    }
    if seen.iter().flatten().any(|s| !s) {
        return Err(Error::Invalid("coefficient dump is missing nodes".into()));
    }
    Ok(state)
}
