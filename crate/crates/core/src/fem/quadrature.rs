//! Gauss rules on the interval and collapsed (Duffy) rules on the reference triangle
//! `{(xi, eta) : xi, eta >= 0, xi + eta <= 1}`.

use crate::error::{Error, Result};

/// Largest triangle exactness degree accepted by [`build_quadrature`].
pub const MAX_QUADRATURE_DEGREE: usize = 60;

/// Gauss-Legendre points and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let weight = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = weight;
        w[n - 1 - i] = weight;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// `(P_n(z), P_n'(z))` by the three-term recurrence.
pub fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    (p1, n * (z * p1 - p0) / (z * z - 1.0))
}

/// Gauss-Lobatto-Legendre points on `[-1, 1]`, ascending, endpoints included.
pub fn gauss_lobatto(n_intervals: usize) -> Vec<f64> {
    let n = n_intervals;
    if n == 0 {
        return vec![0.0];
    }
    let mut x: Vec<f64> = (0..=n)
        .map(|i| -(std::f64::consts::PI * i as f64 / n as f64).cos())
        .collect();
    let mut p = vec![vec![0.0; n + 1]; n + 1];
    for _ in 0..200 {
        let old = x.clone();
        for (i, &xi) in x.iter().enumerate() {
            p[i][0] = 1.0;
            if n >= 1 {
                p[i][1] = xi;
            }
            for k in 2..=n {
                p[i][k] = ((2 * k - 1) as f64 * xi * p[i][k - 1] - (k - 1) as f64 * p[i][k - 2])
                    / k as f64;
            }
        }
        for i in 0..=n {
            x[i] = old[i] - (old[i] * p[i][n] - p[i][n - 1]) / ((n + 1) as f64 * p[i][n]);
        }
        let change = x.iter().zip(&old).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if change < 1e-16 {
            break;
        }
    }
    x[0] = -1.0;
    x[n] = 1.0;
    // enforce exact symmetry
    for i in 0..n.div_ceil(2) {
        let s = 0.5 * (x[n - i] - x[i]);
        x[i] = -s;
        x[n - i] = s;
    }
    if n.is_multiple_of(2) {
        x[n / 2] = 0.0;
    }
    x
}

#[derive(Clone, Debug)]
pub struct QuadratureRule {
    /// Points in reference coordinates `(xi, eta)`.
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points as barycentric triples `(1 - xi - eta, xi, eta)`.
    pub fn barycentric(&self) -> Vec<[f64; 3]> {
        self.points.iter().map(|p| [1.0 - p[0] - p[1], p[0], p[1]]).collect()
    }

    pub fn integrate(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(p[0], p[1])).sum()
    }
}

/// Rule exact for polynomials of total degree `d`; weights are positive and sum to `1/2`.
pub fn build_quadrature(d: usize) -> Result<QuadratureRule> {
    if d > MAX_QUADRATURE_DEGREE {
        return Err(Error::UnsupportedQuadrature(d));
    }
    if d <= 1 {
        return Ok(QuadratureRule { points: vec![[1.0 / 3.0, 1.0 / 3.0]], weights: vec![0.5], degree: d });
    }
    // xi = x (1 - y), eta = y: degree d in x, d + 1 in y once the Jacobian is included
    let (gx, wx) = gauss_legendre((d + 2) / 2);
    let (gy, wy) = gauss_legendre((d + 3) / 2);
    let mut points = Vec::with_capacity(gx.len() * gy.len());
    let mut weights = Vec::with_capacity(gx.len() * gy.len());
    for (yj, wj) in gy.iter().zip(&wy) {
        let y = 0.5 * (yj + 1.0);
        for (xi, wi) in gx.iter().zip(&wx) {
            let x = 0.5 * (xi + 1.0);
            points.push([x * (1.0 - y), y]);
            weights.push(0.25 * wi * wj * (1.0 - y));
        }
    }
    Ok(QuadratureRule { points, weights, degree: d })
}

/// Exact integral of `xi^a eta^b` over the reference triangle: `a! b! / (a + b + 2)!`.
pub fn monomial_integral(a: usize, b: usize) -> f64 {
    let mut r = 1.0;
    // a! b! / (a+b+2)! = 1 / ((a+b+2)(a+b+1) C(a+b, a))
    for i in 1..=b {
        r *= i as f64 / (a + i) as f64;
    }
    r / ((a + b + 2) * (a + b + 1)) as f64
}
