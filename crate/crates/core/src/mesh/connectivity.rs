use super::{EdgeTag, SimplexMesh};
use crate::error::{Error, Result};

/// The triangle across one local edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbor {
    pub triangle: usize,
    /// Local index of the shared edge inside `triangle`.
    pub local_edge: usize,
    /// Translation that maps points on our edge onto the neighbor's copy. Zero
    /// for interior edges, a domain period across a periodic pair.
    pub shift: [f64; 2],
}

impl Neighbor {
    /// Shared edges are always traversed in opposite directions, so the edge
    /// parameter `s` on one side corresponds to `1 - s` on the other.
    pub fn reversed(&self) -> bool {
        true
    }
}

/// Per-triangle adjacency: `neighbors[t][k]` is the triangle across local edge `k`.
#[derive(Clone, Debug)]
pub struct Connectivity {
    pub neighbors: Vec<[Option<Neighbor>; 3]>,
}

impl Connectivity {
    pub fn neighbor_count(&self, t: usize) -> usize {
        self.neighbors[t].iter().filter(|n| n.is_some()).count()
    }
}

/// Builds neighbor tables. With `require_periodic`, any boundary edge that lacks
/// a periodic partner is an error.
pub fn build_connectivity(mesh: &SimplexMesh, require_periodic: bool) -> Result<Connectivity> {
    let mut neighbors = vec![[None; 3]; mesh.n_triangles()];
    for edge in &mesh.edges {
        let (t0, k0) = edge.triangles[0];
        match edge.tag {
            EdgeTag::Interior => {
                let (t1, k1) = edge.triangles[1];
                neighbors[t0][k0] = Some(Neighbor { triangle: t1, local_edge: k1, shift: [0.0; 2] });
                neighbors[t1][k1] = Some(Neighbor { triangle: t0, local_edge: k0, shift: [0.0; 2] });
            }
            EdgeTag::Periodic(o) => {
                let other = &mesh.edges[o];
                let (t1, k1) = other.triangles[0];
                // vertex 0 of this edge sits on vertex 1 of the partner after the shift
                let a = mesh.vertices[edge.vertices[0]];
                let b = mesh.vertices[other.vertices[1]];
                let shift = [b[0] - a[0], b[1] - a[1]];
                neighbors[t0][k0] = Some(Neighbor { triangle: t1, local_edge: k1, shift });
            }
            EdgeTag::Boundary => {
                if require_periodic {
                    return Err(Error::DanglingBoundary(edge.vertices[0], edge.vertices[1]));
                }
            }
        }
    }
    Ok(Connectivity { neighbors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::BoundingBox;

    #[test]
    fn two_triangle_square() {
        let m = SimplexMesh::generate_structured(1, 1, BoundingBox::square(0.0, 1.0), false).unwrap();
        let c = build_connectivity(&m, false).unwrap();
        assert_eq!(c.neighbor_count(0), 1);
        assert_eq!(c.neighbor_count(1), 1);
        assert!(build_connectivity(&m, true).is_err());
    }

    #[test]
    fn periodic_eight_triangles_have_three_neighbors() {
        let m = SimplexMesh::generate_structured(2, 2, BoundingBox::square(0.0, 1.0), true).unwrap();
        let c = build_connectivity(&m, true).unwrap();
        assert!((0..8).all(|t| c.neighbor_count(t) == 3));
    }

    #[test]
    fn shared_edges_match_after_shift_and_reversal() {
        let m = SimplexMesh::generate_jittered(5, 4, BoundingBox::square(0.0, 1.0), true, 0.2, 3).unwrap();
        let c = build_connectivity(&m, true).unwrap();
        for t in 0..m.n_triangles() {
            for k in 0..3 {
                let n = c.neighbors[t][k].unwrap();
                let tri = m.triangles[t];
                let nt = m.triangles[n.triangle];
                let p0 = m.vertices[tri[k]];
                let q1 = m.vertices[nt[(n.local_edge + 1) % 3]];
                assert!((p0[0] + n.shift[0] - q1[0]).abs() < 1e-12);
                assert!((p0[1] + n.shift[1] - q1[1]).abs() < 1e-12);
            }
        }
    }
}
