use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Preconditioner {
    None,
    Jacobi,
}

#[derive(Clone, Debug, PartialEq, serde::Deserialize, serde::Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct CgConfig {
    pub rel_tol: f64,
    /// Guard for a vanishing right-hand side.
    pub abs_tol: f64,
    /// Defaults to `20 · n` when unset.
    pub max_iter: Option<usize>,
    pub preconditioner: Preconditioner,
}

impl Default for CgConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-13, abs_tol: 1e-300, max_iter: None, preconditioner: Preconditioner::Jacobi }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CgReport {
    pub iterations: usize,
    /// Final `‖b − A x‖ / ‖b‖`, recomputed from the returned iterate.
    pub residual: f64,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Preconditioned conjugate gradients for an SPD action `apply(x, y): y = A x`.
///
/// `x` holds the warm start on entry. When the iteration limit is hit, `x` holds
/// the iterate with the smallest residual and the report is not `converged`.
/// Non-finite values abort with [`Error::NonFinite`].
pub fn cg_solve(
    mut apply: impl FnMut(&[f64], &mut [f64]),
    b: &[f64],
    x: &mut [f64],
    diag: Option<&[f64]>,
    cfg: &CgConfig,
) -> Result<CgReport> {
    let n = b.len();
    assert_eq!(x.len(), n, "solution and right-hand side differ in length");
    if cfg.rel_tol <= 0.0 {
        return Err(Error::Config(format!("CG rel_tol must be positive, got {}", cfg.rel_tol)));
    }
    let max_iter = cfg.max_iter.unwrap_or(20 * n.max(1));
    let b_norm = norm(b);
    if b_norm <= cfg.abs_tol {
        x.fill(0.0);
        return Ok(CgReport { iterations: 0, residual: 0.0, converged: true });
    }
    let target = cfg.rel_tol * b_norm;
    let inv_diag: Option<Vec<f64>> = match (cfg.preconditioner, diag) {
        (Preconditioner::Jacobi, Some(d)) => Some(d.iter().map(|v| 1.0 / v).collect()),
        _ => None,
    };
    let precond = |r: &[f64], z: &mut [f64]| match &inv_diag {
        Some(inv) => z.iter_mut().zip(r.iter().zip(inv)).for_each(|(z, (r, d))| *z = r * d),
        None => z.copy_from_slice(r),
    };

    let mut r = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    let mut best = x.to_vec();
    let mut best_res = f64::INFINITY;
    let mut iterations = 0;
    // Outer loop restarts from the true residual whenever the recurrence claims
    // convergence but the recomputed residual disagrees.
    for _restart in 0..5 {
        apply(x, &mut q);
        r.iter_mut().zip(b.iter().zip(&q)).for_each(|(r, (b, q))| *r = b - q);
        let mut res = norm(&r);
        if !res.is_finite() {
            return Err(Error::NonFinite(iterations));
        }
        if res < best_res {
            best_res = res;
            best.copy_from_slice(x);
        }
        if res <= target {
            return Ok(CgReport { iterations, residual: res / b_norm, converged: true });
        }
        precond(&r, &mut z);
        p.copy_from_slice(&z);
        let mut rz = dot(&r, &z);
        while iterations < max_iter {
            iterations += 1;
            apply(&p, &mut q);
            let pq = dot(&p, &q);
            if !pq.is_finite() {
                return Err(Error::NonFinite(iterations));
            }
            if pq <= 0.0 {
                log::warn!("CG: non-positive curvature {pq:e} at iteration {iterations}");
                break;
            }
            let alpha = rz / pq;
            x.iter_mut().zip(&p).for_each(|(x, p)| *x += alpha * p);
            r.iter_mut().zip(&q).for_each(|(r, q)| *r -= alpha * q);
            res = norm(&r);
            if !res.is_finite() {
                return Err(Error::NonFinite(iterations));
            }
            if res < best_res {
                best_res = res;
                best.copy_from_slice(x);
            }
            if res <= target {
                break;
            }
            precond(&r, &mut z);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            p.iter_mut().zip(&z).for_each(|(p, z)| *p = z + beta * *p);
        }
        if iterations >= max_iter {
            break;
        }
        // recurrence says converged (or curvature broke down): verify
        best_res = f64::INFINITY;
    }
    // Fall back to the best iterate seen; its residual is the recurrence value, so recompute.
    if best_res.is_finite() {
        x.copy_from_slice(&best);
    }
    apply(x, &mut q);
    let res = b.iter().zip(&q).map(|(b, q)| (b - q) * (b - q)).sum::<f64>().sqrt();
    let converged = res <= target;
    if !converged {
        log::warn!("CG stopped after {iterations} iterations at relative residual {:e}", res / b_norm);
    }
    Ok(CgReport { iterations, residual: res / b_norm, converged })
}
