//! Triangle quadrature built from collapsed Gauss-Legendre rules.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const MAX_DEGREE: usize = 12;

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre<T: Scalar>(n: usize) -> (Vec<T>, Vec<T>) {
    let mut nodes = vec![0.0f64; n];
    let mut weights = vec![0.0f64; n];
    for k in 0..n {
        // Chebyshev-like initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        nodes[k] = 0.5 * (1.0 - x);
        weights[k] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes.into_iter().map(T::lit).collect(), weights.into_iter().map(T::lit).collect())
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Quadrature rule on the reference triangle `(0,0), (1,0), (0,1)`.
#[derive(Debug, Clone)]
pub struct TriangleRule<T> {
    /// Reference coordinates `(xi, eta)`.
    pub points: Vec<[T; 2]>,
    /// Weights summing to the reference area `1/2`.
    pub weights: Vec<T>,
    pub degree: usize,
}

impl<T: Scalar> TriangleRule<T> {
    /// A rule exact for all polynomials of total degree `<= degree`.
    pub fn new(degree: usize) -> Result<Self> {
        if degree == 0 || degree > MAX_DEGREE {
            return Err(Error::InvalidArgument(format!(
                "quadrature degree must be in 1..={MAX_DEGREE}, got {degree}"
            )));
        }
        // the Duffy Jacobian (1 - u) raises the degree in u by one
        let n = (degree + 3) / 2;
        let (x, w) = gauss_legendre::<T>(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                let u = x[a];
                let v = x[b];
                points.push([u, (T::one() - u) * v]);
                weights.push(w[a] * w[b] * (T::one() - u));
            }
        }
        Ok(Self { points, weights, degree })
    }

    /// Integrates `f` over the triangle with the given vertices.
    pub fn integrate(&self, tri: &[[T; 2]; 3], mut f: impl FnMut(T, T) -> T) -> T {
        let [p, q, r] = *tri;
        let jac = ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1])).abs();
        let mut sum = T::zero();
        for (pt, &w) in self.points.iter().zip(&self.weights) {
            let (x, y) = map_point(tri, pt[0], pt[1]);
            sum += w * f(x, y);
        }
        sum * jac
    }
}

#[inline]
pub(crate) fn map_point<T: Scalar>(tri: &[[T; 2]; 3], xi: T, eta: T) -> (T, T) {
    let [p, q, r] = *tri;
    (
        p[0] + xi * (q[0] - p[0]) + eta * (r[0] - p[0]),
        p[1] + xi * (q[1] - p[1]) + eta * (r[1] - p[1]),
    )
}

/// Integrates `f` over a triangle with a rule exact to `degree`.
pub fn quadrature_integrate<T: Scalar>(tri: &[[T; 2]; 3], f: impl FnMut(T, T) -> T, degree: usize) -> Result<T> {
    Ok(TriangleRule::new(degree)?.integrate(tri, f))
}
