//! Quadrature on the reference triangle `{ξ, η ≥ 0, ξ + η ≤ 1}` and on [0, 1].

use crate::error::{Error, Result};

/// Highest polynomial degree for which [`quadrature`] builds a rule.
pub const MAX_EXACTNESS: usize = 30;

/// Points and positive weights on the reference triangle; weights sum to 1/2.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub exactness: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, f: impl Fn([f64; 2]) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&p, &w)| w * f(p)).sum()
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1], by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre needs at least one point");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, z);
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_and_derivative(n, z);
        let wi = 2.0 / ((1.0 - z * z) * d * d);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_and_derivative(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (z * p - p0) / (z * z - 1.0);
    (p, d)
}

/// Gauss–Legendre rule mapped to [0, 1]; weights sum to 1.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    (x.iter().map(|t| 0.5 * (t + 1.0)).collect(), w.iter().map(|t| 0.5 * t).collect())
}

/// A rule integrating every polynomial of total degree ≤ `exactness` exactly.
///
/// Symmetric tabulated rules cover degrees up to 5; higher degrees use a
/// collapsed (Duffy) product of Gauss–Legendre rules.
pub fn quadrature(exactness: usize) -> Result<QuadratureRule> {
    if exactness > MAX_EXACTNESS {
        return Err(Error::UnsupportedExactness(exactness, MAX_EXACTNESS));
    }
    let (points, weights) = match exactness {
        0 | 1 => (vec![[1.0 / 3.0; 2]], vec![0.5]),
        2 => {
            let (a, b) = (1.0 / 6.0, 2.0 / 3.0);
            (vec![[a, a], [b, a], [a, b]], vec![1.0 / 6.0; 3])
        }
        3 | 4 => {
            let mut p = Vec::new();
            let mut w = Vec::new();
            for (a, wa) in [
                (0.445_948_490_915_964_886_32, 0.223_381_589_678_011_465_70),
                (0.091_576_213_509_770_743_46, 0.109_951_743_655_321_867_64),
            ] {
                orbit3(&mut p, &mut w, a, 0.5 * wa);
            }
            (p, w)
        }
        5 => {
            let s15 = 15f64.sqrt();
            let mut p = vec![[1.0 / 3.0; 2]];
            let mut w = vec![9.0 / 80.0];
            orbit3(&mut p, &mut w, (6.0 - s15) / 21.0, (155.0 - s15) / 2400.0);
            orbit3(&mut p, &mut w, (6.0 + s15) / 21.0, (155.0 + s15) / 2400.0);
            (p, w)
        }
        k => collapsed(k),
    };
    Ok(QuadratureRule { points, weights, exactness })
}

fn orbit3(p: &mut Vec<[f64; 2]>, w: &mut Vec<f64>, a: f64, weight: f64) {
    let b = 1.0 - 2.0 * a;
    p.extend([[a, a], [b, a], [a, b]]);
    w.extend([weight; 3]);
}

/// ξ = u, η = (1 - u) v over the unit square, Jacobian 1 - u.
fn collapsed(k: usize) -> (Vec<[f64; 2]>, Vec<f64>) {
    let (u, wu) = gauss_legendre_unit((k + 2).div_ceil(2));
    let (v, wv) = gauss_legendre_unit((k + 1).div_ceil(2));
    let mut p = Vec::with_capacity(u.len() * v.len());
    let mut w = Vec::with_capacity(u.len() * v.len());
    for (&ui, &wi) in u.iter().zip(&wu) {
        for (&vj, &wj) in v.iter().zip(&wv) {
            p.push([ui, (1.0 - ui) * vj]);
            w.push(wi * wj * (1.0 - ui));
        }
    }
    (p, w)
}

/// Quadrature on one edge of the reference triangle.
#[derive(Clone, Debug)]
pub struct EdgeRule {
    /// Edge parameter in (0, 1), measured from the edge's first vertex.
    pub params: Vec<f64>,
    pub points: Vec<[f64; 2]>,
    /// Weights on [0, 1]; multiply by the physical edge length.
    pub weights: Vec<f64>,
    /// Reference-space direction from the first to the second edge vertex.
    pub tangent: [f64; 2],
}

pub const REF_VERTICES: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

/// Point on local edge `edge` (from vertex `edge` to vertex `edge + 1`) at parameter `s`.
pub fn edge_point(edge: usize, s: f64) -> [f64; 2] {
    let a = REF_VERTICES[edge];
    let b = REF_VERTICES[(edge + 1) % 3];
    [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]
}

/// `n_points` Gauss–Legendre points on local edge `edge`.
pub fn trace_points(edge: usize, n_points: usize) -> EdgeRule {
    assert!(edge < 3, "local edge index {edge} out of range");
    let (params, weights) = gauss_legendre_unit(n_points);
    let points = params.iter().map(|&s| edge_point(edge, s)).collect();
    let a = REF_VERTICES[edge];
    let b = REF_VERTICES[(edge + 1) % 3];
    EdgeRule { params, points, weights, tangent: [b[0] - a[0], b[1] - a[1]] }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// ∫_T ξ^a η^b = a! b! / (a + b + 2)!
    fn monomial_integral(a: usize, b: usize) -> f64 {
        let f = |n: usize| (1..=n).map(|i| i as f64).product::<f64>();
        f(a) * f(b) / f(a + b + 2)
    }

    #[test]
    fn centroid_rule() {
        let q = quadrature(1).unwrap();
        assert_eq!(q.points, vec![[1.0 / 3.0; 2]]);
        assert_eq!(q.weights, vec![0.5]);
    }

    #[test]
    fn three_point_integrates_xi_eta() {
        let q = quadrature(2).unwrap();
        assert!((q.integrate(|p| p[0] * p[1]) - 1.0 / 24.0).abs() < 1e-16);
    }

    #[test]
    fn monomial_sweep() {
        for k in 0..=MAX_EXACTNESS {
            let q = quadrature(k).unwrap();
            assert!(q.weights.iter().all(|&w| w > 0.0), "degree {k}");
            assert!(q.points.iter().all(|p| p[0] >= 0.0 && p[1] >= 0.0 && p[0] + p[1] <= 1.0));
            for a in 0..=k {
                for b in 0..=k - a {
                    let exact = monomial_integral(a, b);
                    let got = q.integrate(|p| p[0].powi(a as i32) * p[1].powi(b as i32));
                    assert!(((got - exact) / exact).abs() < 1e-13, "k={k} a={a} b={b}: {got} vs {exact}");
                }
            }
        }
        assert!(quadrature(MAX_EXACTNESS + 1).is_err());
    }

    #[test]
    fn gauss_legendre_moments() {
        for n in 1..20 {
            let (x, w) = gauss_legendre(n);
            for d in 0..2 * n {
                let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(d as i32)).sum();
                let exact = if d % 2 == 1 { 0.0 } else { 2.0 / (d as f64 + 1.0) };
                assert!((got - exact).abs() < 1e-14, "n={n} d={d}");
            }
        }
    }

    #[test]
    fn edge_points() {
        let r = trace_points(1, 1);
        assert!((r.points[0][0] - 0.5).abs() < 1e-16 && (r.points[0][1] - 0.5).abs() < 1e-16);
        let r = trace_points(0, 5);
        for i in 0..5 {
            assert!((r.points[i][0] + r.points[4 - i][0] - 1.0).abs() < 1e-15);
            assert_eq!(r.points[i][1], 0.0);
        }
    }
}
