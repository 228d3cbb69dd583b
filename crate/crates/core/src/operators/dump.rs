//! Triplet text dumps (`row col value`, 0-based) of the assembled matrices.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::CompatibleOperators;
use crate::error::Result;

/// Global FEM mass matrix.
pub fn write_mass_triplets(ops: &CompatibleOperators, path: impl AsRef<Path>) -> Result<()> {
    let mut s = String::new();
    for (i, j, v) in ops.mass.triplet_iter() {
        let _ = writeln!(s, "{i} {j} {v:.17e}");
    }
    fs::write(path, s)?;
    Ok(())
}

/// Direction-`m` slice of `K`, with global DG rows and global FEM columns.
pub fn write_k_slice(ops: &CompatibleOperators, m: usize, path: impl AsRef<Path>) -> Result<()> {
    let mut s = String::new();
    for e in 0..ops.n_elements() {
        let k = ops.k_block(e, m);
        let dofs = ops.fem.dofs(e);
        for c in 0..ops.n_loc() {
            for (p, &gp) in dofs.iter().enumerate() {
                let _ = writeln!(s, "{} {gp} {:.17e}", ops.dg.offset(e) + c, k[(c, p)]);
            }
        }
    }
    fs::write(path, s)?;
    Ok(())
}

/// Block-diagonal DG mass matrix.
pub fn write_d_blocks(ops: &CompatibleOperators, path: impl AsRef<Path>) -> Result<()> {
    let mut s = String::new();
    for e in 0..ops.n_elements() {
        let d = ops.d_block(e);
        let o = ops.dg.offset(e);
        for i in 0..ops.n_loc() {
            for j in 0..ops.n_loc() {
                let _ = writeln!(s, "{} {} {:.17e}", o + i, o + j, d[(i, j)]);
            }
        }
    }
    fs::write(path, s)?;
    Ok(())
}
