use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};

/// Affine map `x = v0 + J (ξ, η)` from the reference triangle.
#[derive(Clone, Copy, Debug)]
pub struct AffineMap {
    pub origin: Vector2<f64>,
    pub jacobian: Matrix2<f64>,
    /// `J⁻¹`; reference gradients map to physical ones by `J⁻ᵀ`.
    pub inverse: Matrix2<f64>,
    pub det: f64,
}

impl AffineMap {
    pub fn from_triangle(tri: &[[f64; 2]; 3]) -> Result<Self> {
        let origin = Vector2::new(tri[0][0], tri[0][1]);
        let jacobian = Matrix2::new(
            tri[1][0] - tri[0][0],
            tri[2][0] - tri[0][0],
            tri[1][1] - tri[0][1],
            tri[2][1] - tri[0][1],
        );
        let det = jacobian.determinant();
        let scale = jacobian.norm_squared();
        if det.abs() <= 1e-14 * scale {
            return Err(Error::DegenerateTriangle(usize::MAX, 0.5 * det));
        }
        let inverse = Matrix2::new(jacobian[(1, 1)], -jacobian[(0, 1)], -jacobian[(1, 0)], jacobian[(0, 0)]) / det;
        Ok(Self { origin, jacobian, inverse, det })
    }

    pub fn abs_det(&self) -> f64 {
        self.det.abs()
    }

    pub fn map(&self, r: [f64; 2]) -> [f64; 2] {
        let x = self.origin + self.jacobian * Vector2::new(r[0], r[1]);
        [x[0], x[1]]
    }

    pub fn inverse_map(&self, x: [f64; 2]) -> [f64; 2] {
        let r = self.inverse * (Vector2::new(x[0], x[1]) - self.origin);
        [r[0], r[1]]
    }

    /// Physical gradient from a reference gradient.
    #[inline]
    pub fn grad(&self, g: [f64; 2]) -> [f64; 2] {
        let m = &self.inverse;
        [m[(0, 0)] * g[0] + m[(1, 0)] * g[1], m[(0, 1)] * g[0] + m[(1, 1)] * g[1]]
    }
}
