//! Pointwise and functional checks of the discrete vector calculus identities.

use super::{embed3, CompatibleOperators, Nabla};
use crate::refelem::trace_points;
use crate::spaces::{FieldDg, FieldFem};

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, b| a.max(b.abs()))
}

/// Largest jump of `w · dir(edge)` across interior (and periodic) edges, sampled
/// at `N + 2` Gauss points. `dir` receives the unit tangent of the edge as seen
/// from the first element.
fn max_trace_jump(ops: &CompatibleOperators, w: &FieldDg, dir: impl Fn([f64; 2]) -> [f64; 2]) -> f64 {
    let n_pts = ops.degree() + 2;
    let mut worst = 0.0f64;
    for e in 0..ops.n_elements() {
        for k in 0..3 {
            let Some(nb) = ops.conn.neighbors[e][k] else { continue };
            // each edge once
            if (nb.triangle, nb.local_edge) < (e, k) {
                continue;
            }
            let rule = trace_points(k, n_pts);
            let map = &ops.dg.maps[e];
            let j = &map.jacobian;
            let t = [j[(0, 0)] * rule.tangent[0] + j[(0, 1)] * rule.tangent[1], j[(1, 0)] * rule.tangent[0] + j[(1, 1)] * rule.tangent[1]];
            let len = t[0].hypot(t[1]);
            let d = dir([t[0] / len, t[1] / len]);
            for (&s, &r) in rule.params.iter().zip(&rule.points) {
                let a = ops.dg.eval(w, e, r);
                let b = ops.dg.eval(w, nb.triangle, crate::refelem::edge_point(nb.local_edge, 1.0 - s));
                let jump = d[0] * (a[0] - b[0]) + d[1] * (a[1] - b[1]);
                worst = worst.max(jump.abs());
            }
        }
    }
    worst
}

impl CompatibleOperators {
    /// Tangential jump of `primary_grad(z)` across edges.
    pub fn tangential_grad_jump(&self, z: &FieldFem) -> f64 {
        max_trace_jump(self, &self.primary_grad(z), |t| t)
    }

    /// Normal jump of the in-plane part of `primary_curl(a)` across edges.
    pub fn normal_curl_jump(&self, a: &FieldFem) -> f64 {
        max_trace_jump(self, &self.primary_curl(a), |t| [t[1], -t[0]])
    }

    /// `max |∫ ∂_x ψ (∂_y Z)_h − ∫ ∂_y ψ (∂_x Z)_h|` for a scalar FEM field.
    pub fn schwarz_commutator(&self, z: &FieldFem) -> f64 {
        let g = self.primary_grad(z);
        let swap = |keep: usize, slot: usize| {
            let mut w = self.dg.zeros(2);
            for (o, i) in w.values.chunks_exact_mut(2).zip(g.values.chunks_exact(2)) {
                o[slot] = i[keep];
            }
            w
        };
        let a = self.dual(Nabla::Grad, &swap(1, 0));
        let b = self.dual(Nabla::Grad, &swap(0, 1));
        let diff: Vec<f64> = a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect();
        max_abs(&diff)
    }

    /// `max |Cᵀ(G z)|`: dual curl of a primary gradient.
    pub fn curl_grad_residual(&self, z: &FieldFem) -> f64 {
        max_abs(&self.dual(Nabla::Curl, &embed3(&self.primary_grad(z))).values)
    }

    /// `max |Gᵀ(C a)|`: dual divergence of a primary curl.
    pub fn div_curl_residual(&self, a: &FieldFem) -> f64 {
        max_abs(&self.dual_div_rhs(&self.primary_curl(a)).values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{BoundingBox, SimplexMesh};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identities_hold_for_random_data() {
        let mesh = SimplexMesh::generate_jittered(5, 5, BoundingBox::square(0.0, 1.0), true, 0.2, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1709);
        for n in 0..4 {
            let ops = CompatibleOperators::assemble(mesh.clone(), n).unwrap();
            let mut z = ops.fem.zeros(1);
            z.values.iter_mut().for_each(|v| *v = rng.gen_range(0.0..1e-3));
            let mut a = ops.fem.zeros(3);
            a.values.iter_mut().for_each(|v| *v = rng.gen_range(0.0..1e-3));
            assert!(ops.tangential_grad_jump(&z) < 1e-12);
            assert!(ops.normal_curl_jump(&a) < 1e-12);
            assert!(ops.schwarz_commutator(&z) < 1e-12);
            assert!(ops.curl_grad_residual(&z) < 1e-12);
            assert!(ops.div_curl_residual(&a) < 1e-12);
        }
    }

    #[test]
    fn jump_detector_sees_discontinuities() {
        let mesh = SimplexMesh::generate_structured(4, 4, BoundingBox::square(0.0, 1.0), true).unwrap();
        let ops = CompatibleOperators::assemble(mesh, 1).unwrap();
        let mut w = ops.dg.zeros(2);
        w.element_mut(0).iter_mut().for_each(|v| *v = 1.0);
        assert!(max_trace_jump(&ops, &w, |t| t) > 0.1);
        assert!(max_trace_jump(&ops, &w, |t| [t[1], -t[0]]) > 0.1);
    }
}
