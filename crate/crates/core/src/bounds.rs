//! Explicit analytic bounds.
//!
//! * A lower bound on the number of eigenvalues below 1, from Dirichlet boxes
//!   `(-alpha pi, 0) x (-beta pi, beta pi)` placed inside the guide.
//! * An existence certificate: a trial function `psi_n + eps phi` on the reference
//!   half-guide with `b_theta(psi, psi) - |psi|^2 < 0`, which forces `lambda_1 < 1`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fem::quadrature::gauss_legendre;
use crate::geometry::check_angle;

/// `cos^2 theta / (4 (1 - alpha sin theta)^2) + j^2 / alpha^2`.
pub fn box_eigenvalue(theta: f64, j: usize, alpha: f64) -> Result<f64> {
    check_angle(theta)?;
    let (s, c) = theta.sin_cos();
    if !(alpha > 0.0 && alpha * s < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "box width alpha = {alpha} outside (0, 1/sin theta) = (0, {})",
            1.0 / s
        )));
    }
    let jf = j as f64;
    Ok(c * c / (4.0 * (1.0 - alpha * s).powi(2)) + jf * jf / (alpha * alpha))
}

/// `Z = 4^{1/3} j^{2/3} sin^{2/3} theta`, which equals `alpha* sin theta`.
pub fn z_value(theta: f64, j: usize) -> f64 {
    (4.0 * j as f64 * j as f64 * theta.sin().powi(2)).cbrt()
}

/// The small-angle box width `alpha* = 4^{1/3} j^{2/3} sin^{-1/3} theta`.
pub fn optimal_alpha(theta: f64, j: usize) -> Result<f64> {
    check_angle(theta)?;
    if j == 0 {
        return Err(Error::InvalidParameter("eigenvalue index starts at 1".into()));
    }
    let alpha = (4.0 * (j * j) as f64 / theta.sin()).cbrt();
    if alpha * theta.sin() >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "alpha* = {alpha} does not fit the guide at theta = {theta}, j = {j}"
        )));
    }
    Ok(alpha)
}

/// First root of `(1/(1 - Z)^2 + Z) / 4 = 1` on `(0, 1)`; the left side is increasing there.
pub fn z_root() -> f64 {
    let g = |z: f64| 0.25 * (1.0 / (1.0 - z).powi(2) + z) - 1.0;
    let (mut lo, mut hi) = (0.0, 1.0 - 1e-12);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CountBound {
    pub theta: f64,
    pub z_root: f64,
    /// `z_root^{3/2} / (2 sin theta)`.
    pub continuous: f64,
    /// Largest `j` with `Z(theta, j) <= z_root`: at least this many eigenvalues lie below 1.
    pub j_min: usize,
}

pub fn count_lower_bound(theta: f64) -> Result<CountBound> {
    check_angle(theta)?;
    let zr = z_root();
    let continuous = zr.powf(1.5) * 0.5 / theta.sin();
    let mut j = continuous.floor() as usize;
    while j > 0 && z_value(theta, j) > zr {
        j -= 1;
    }
    while z_value(theta, j + 1) <= zr {
        j += 1;
    }
    Ok(CountBound { theta, z_root: zr, continuous, j_min: j })
}

/// `chi(s)`: 1 for `s <= 0`, 0 for `s >= 1`, `1 - s^3 (10 - 15 s + 6 s^2)` between (C^2).
pub fn cutoff(s: f64) -> f64 {
    if s <= 0.0 {
        1.0
    } else if s >= 1.0 {
        0.0
    } else {
        1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
    }
}

pub fn cutoff_derivative(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        0.0
    } else {
        -30.0 * s * s * (1.0 - s) * (1.0 - s)
    }
}

/// `int_0^1 chi'(s)^2 ds`.
pub const CUTOFF_ENERGY: f64 = 10.0 / 7.0;

/// Bump supported in `(-pi, 0)`, equal to 1 on the middle third.
pub fn bump(x: f64) -> f64 {
    let t = 3.0 * (x + PI) / PI;
    if t <= 1.0 {
        1.0 - cutoff(t)
    } else if t <= 2.0 {
        1.0
    } else {
        cutoff(t - 2.0)
    }
}

pub fn bump_derivative(x: f64) -> f64 {
    let t = 3.0 * (x + PI) / PI;
    let dt = 3.0 / PI;
    if t <= 1.0 {
        -cutoff_derivative(t) * dt
    } else if t <= 2.0 {
        0.0
    } else {
        cutoff_derivative(t - 2.0) * dt
    }
}

/// `K_theta = (int chi'^2) pi tan^2 theta`, so that `Q(psi_n) <= K_theta / (2n)`.
pub fn k_theta(theta: f64) -> f64 {
    CUTOFF_ENERGY * PI * theta.tan().powi(2)
}

/// Value and gradient of a trial function at a point of the reference half-guide.
type Jet = (f64, f64, f64);

fn psi_n(n: f64, x: f64, y: f64) -> Jet {
    let (s, c) = y.sin_cos();
    let chi = cutoff(x / n);
    (chi * s, cutoff_derivative(x / n) / n * s, chi * c)
}

fn phi(x: f64, y: f64) -> Jet {
    // f(y) = eta(y - pi) cos(y - pi)
    let (e, de) = (bump(x), bump_derivative(x));
    let (sy, cy) = (y - PI).sin_cos();
    let f = bump(y - PI) * cy;
    let df = bump_derivative(y - PI) * cy - bump(y - PI) * sy;
    (e * f, de * f, e * df)
}

/// Integrates `g(x, y)` over the reference half-guide restricted to `x < x_max`,
/// panel by panel so that every spline breakpoint is a panel edge.
fn integrate_half_guide(x_max: f64, points: usize, g: impl Fn(f64, f64) -> f64) -> f64 {
    let (gx, gw) = gauss_legendre(points);
    let nodes: Vec<(f64, f64)> = gx.iter().zip(&gw).map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w)).collect();
    let h = PI / 3.0;
    let mut total = 0.0;
    // corner triangle {-pi < x < 0, 0 < y < x + pi}: squares below the diagonal and
    // lower-right triangles on it
    for i in 0..3 {
        let x0 = -PI + i as f64 * h;
        for j in 0..=i {
            let y0 = j as f64 * h;
            for &(a, wa) in &nodes {
                for &(b, wb) in &nodes {
                    total += if j < i {
                        wa * wb * h * h * g(x0 + a * h, y0 + b * h)
                    } else {
                        wa * wb * h * h * a * g(x0 + a * h, y0 + a * b * h)
                    };
                }
            }
        }
    }
    // straight part (0, x_max) x (0, pi)
    if x_max > 0.0 {
        for &(a, wa) in &nodes {
            for &(b, wb) in &nodes {
                total += wa * wb * x_max * PI * g(a * x_max, b * PI);
            }
        }
    }
    total
}

fn converged(x_max: f64, g: impl Fn(f64, f64) -> f64) -> Result<f64> {
    let coarse = integrate_half_guide(x_max, 16, &g);
    let fine = integrate_half_guide(x_max, 32, &g);
    if (coarse - fine).abs() > 1e-8 {
        return Err(Error::Unresolved(format!(
            "certificate quadrature disagrees by {:.3e} under refinement",
            (coarse - fine).abs()
        )));
    }
    Ok(fine)
}

/// The shifted form `b_theta(u, v) - (u, v)` for two trial jets.
fn shifted(t2: f64, u: Jet, v: Jet) -> f64 {
    t2 * u.1 * v.1 + u.2 * v.2 - u.0 * v.0
}

/// All pieces of `Q(psi_n + eps phi) = Q(psi_n) + 2 eps b(psi_n, phi) + eps^2 Q(phi)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Certificate {
    pub theta: f64,
    pub n: usize,
    pub epsilon: f64,
    pub k_theta: f64,
    /// `int_{-pi}^0 eta^2 cos^2`.
    pub gamma: f64,
    /// `Q(psi_n)`.
    pub q_psi: f64,
    /// `b(psi_n, phi)`, which should equal `-gamma`.
    pub cross: f64,
    /// `D = Q(phi)`.
    pub q_phi: f64,
    /// `Q(psi_n + eps phi)` integrated directly.
    pub value: f64,
}

impl Certificate {
    pub fn certifies(&self) -> bool {
        self.value < 0.0
    }

    /// `Q(psi_n) + 2 eps b + eps^2 D`, for comparison with the direct value.
    pub fn expanded(&self) -> f64 {
        self.q_psi + 2.0 * self.epsilon * self.cross + self.epsilon * self.epsilon * self.q_phi
    }
}

/// `int_{-pi}^0 eta(x)^2 cos^2 x dx` by panel Gauss quadrature.
pub fn gamma() -> f64 {
    let (gx, gw) = gauss_legendre(32);
    let h = PI / 3.0;
    (0..3)
        .map(|p| {
            let x0 = -PI + p as f64 * h;
            gx.iter()
                .zip(&gw)
                .map(|(t, w)| {
                    let x = x0 + 0.5 * (t + 1.0) * h;
                    0.5 * h * w * (bump(x) * x.cos()).powi(2)
                })
                .sum::<f64>()
        })
        .sum()
}

/// `D = Q(phi)`, independent of `n`.
pub fn phi_energy(theta: f64) -> Result<f64> {
    check_angle(theta)?;
    let t2 = theta.tan().powi(2);
    converged(0.0, |x, y| {
        let p = phi(x, y);
        shifted(t2, p, p)
    })
}

/// The step-size rule `eps = Gamma / D`, which turns `-2 Gamma eps + D eps^2` into `-Gamma eps`.
pub fn epsilon_rule(theta: f64) -> Result<f64> {
    let d = phi_energy(theta)?;
    let g = gamma();
    Ok(if d > 0.0 { g / d } else { 1.0 })
}

/// Smallest `n` with `K_theta / (2n) <= Gamma eps / 2`, which guarantees `Q <= -Gamma eps / 2`.
pub fn sufficient_n(theta: f64, epsilon: f64) -> Result<usize> {
    check_angle(theta)?;
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter("epsilon must be positive".into()));
    }
    Ok((k_theta(theta) / (gamma() * epsilon)).ceil().max(1.0) as usize)
}

/// Evaluates every term of the certificate for the given `n` and `epsilon`.
pub fn existence_certificate(theta: f64, n: usize, epsilon: f64) -> Result<Certificate> {
    check_angle(theta)?;
    if n == 0 || !(epsilon >= 0.0) {
        return Err(Error::InvalidParameter("certificate needs n >= 1 and epsilon >= 0".into()));
    }
    let t2 = theta.tan().powi(2);
    let nf = n as f64;
    let x_max = nf;
    let q_psi = converged(x_max, |x, y| {
        let p = psi_n(nf, x, y);
        shifted(t2, p, p)
    })?;
    let cross = converged(0.0, |x, y| shifted(t2, psi_n(nf, x, y), phi(x, y)))?;
    let q_phi = phi_energy(theta)?;
    let value = converged(x_max, |x, y| {
        let (a, b) = (psi_n(nf, x, y), phi(x, y));
        let u = (a.0 + epsilon * b.0, a.1 + epsilon * b.1, a.2 + epsilon * b.2);
        shifted(t2, u, u)
    })?;
    Ok(Certificate { theta, n, epsilon, k_theta: k_theta(theta), gamma: gamma(), q_psi, cross, q_phi, value })
}
