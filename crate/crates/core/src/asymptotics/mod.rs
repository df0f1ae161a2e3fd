//! Small-angle asymptotics: Airy zeros, the reverse-Airy model problem, the
//! Born-Oppenheimer reduction and the two-term eigenvalue law
//! `lambda_j ~ 1/4 + 2 theta^{2/3} z_A(j) / (4 pi sqrt 2)^{2/3}`.

pub mod airy;
pub mod tridiagonal;

use std::f64::consts::{PI, SQRT_2};

pub use airy::{airy, airy_ai, airy_ai_prime, airy_zero, AiryZeroTable};
pub use tridiagonal::SymTridiagonal;

use crate::error::{Error, Result};
use crate::geometry::check_angle;

/// `(4 pi sqrt 2)^{2/3}`, the scale of the Born-Oppenheimer well.
pub fn well_scale() -> f64 {
    (4.0 * PI * SQRT_2).powf(2.0 / 3.0)
}

/// Coefficient of `theta^{2/3}` in the two-term law for the `j`-th eigenvalue.
pub fn two_term_slope(j: usize) -> Result<f64> {
    Ok(2.0 * airy_zero(j)? / well_scale())
}

/// `1/4 + 2 theta^{2/3} z_A(j) / (4 pi sqrt 2)^{2/3}`; only meaningful for small `theta`.
pub fn two_term_eigenvalue(theta: f64, j: usize) -> Result<f64> {
    check_angle(theta)?;
    Ok(0.25 + theta.powf(2.0 / 3.0) * two_term_slope(j)?)
}

/// Corner exponent `pi / omega` with `omega = 2 (pi - theta)`.
pub fn singular_exponent(theta: f64) -> Result<f64> {
    check_angle(theta)?;
    Ok(PI / (2.0 * (PI - theta)))
}

/// Closed-form eigenpair of `-h^2 psi'' - u psi = E psi` on `(-inf, 0)`, `psi(0) = 0`.
#[derive(Clone, Copy, Debug)]
pub struct AiryEigenpair {
    pub h: f64,
    pub j: usize,
    pub zero: f64,
    pub energy: f64,
}

impl AiryEigenpair {
    /// `A(u h^{-2/3} + z_A(j))` with `A(X) = Ai(-X)`.
    pub fn eigenfunction(&self, u: f64) -> f64 {
        airy_ai(-(u * self.h.powf(-2.0 / 3.0) + self.zero))
    }
}

pub fn model_airy_eigen(h: f64, j: usize) -> Result<AiryEigenpair> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("semiclassical parameter must be positive, got {h}")));
    }
    let zero = airy_zero(j)?;
    Ok(AiryEigenpair { h, j, zero, energy: h.powf(2.0 / 3.0) * zero })
}

/// Centered finite differences for the Airy model problem on `(-length, 0)` with
/// Dirichlet ends and uniform spacing `spacing`; returns the `count` smallest eigenvalues.
pub fn airy_fd_eigenvalues(h: f64, count: usize, length: f64, spacing: f64) -> Result<Vec<f64>> {
    if !(h > 0.0 && length > 0.0 && spacing > 0.0 && spacing < length) {
        return Err(Error::InvalidParameter("Airy finite differences need h, length, spacing > 0".into()));
    }
    let n = (length / spacing).round() as usize - 1;
    let delta = length / (n + 1) as f64;
    let c = h * h / (delta * delta);
    let diag = (1..=n).map(|i| 2.0 * c + (length - i as f64 * delta)).collect();
    let t = SymTridiagonal::new(diag, vec![-c; n - 1]);
    Ok(t.smallest(count))
}

/// Born-Oppenheimer potential: the first transverse eigenvalue at abscissa `u`.
pub fn bo_potential(u: f64, theta: f64) -> Result<f64> {
    check_angle(theta)?;
    if u <= -PI * SQRT_2 {
        return Err(Error::InvalidParameter(format!("u = {u} is left of the corner -pi sqrt 2")));
    }
    Ok(potential(u, theta.cos().powi(2)))
}

fn potential(u: f64, c2: f64) -> f64 {
    if u < 0.0 {
        let d = u + PI * SQRT_2;
        2.0 * c2 * PI * PI / (4.0 * d * d)
    } else {
        c2
    }
}

/// Condition imposed at the singular end `u = -pi sqrt 2`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LeftBoundary {
    #[default]
    Dirichlet,
    Neumann,
}

/// Graded grid on `(-pi sqrt 2, right)`: spacing `min(h0 + growth d, h_max)` at distance `d` from `u = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoGrid {
    pub h0: f64,
    pub growth: f64,
    pub h_max: f64,
    pub right: f64,
    pub left: LeftBoundary,
}

impl BoGrid {
    /// Spacing `theta / 40` at the well bottom, never coarser than `theta / 20`:
    /// the local wavelength scales with `sin theta`.
    pub fn for_angle(theta: f64) -> Self {
        BoGrid {
            h0: theta / 40.0,
            growth: 0.05,
            h_max: theta / 20.0,
            right: 2.0 * PI * SQRT_2,
            left: LeftBoundary::Dirichlet,
        }
    }

    /// Same grading with every spacing halved.
    pub fn halved(&self) -> Self {
        BoGrid { h0: self.h0 / 2.0, growth: self.growth / 2.0, h_max: self.h_max / 2.0, ..*self }
    }

    fn spacing(&self, d: f64) -> f64 {
        (self.h0 + self.growth * d).min(self.h_max).max(self.h0)
    }

    /// Ascending nodes including both ends and `u = 0`.
    pub fn nodes(&self) -> Vec<f64> {
        let side = |end: f64| {
            let mut out = vec![0.0];
            let mut d = 0.0;
            loop {
                let step = self.spacing(d);
                if d + 1.5 * step >= end {
                    out.push(end);
                    break;
                }
                d += step;
                out.push(d);
            }
            out
        };
        let mut nodes: Vec<f64> = side(PI * SQRT_2).iter().rev().map(|d| -d).collect();
        nodes.extend(side(self.right).into_iter().skip(1));
        nodes
    }

    fn validate(&self) -> Result<()> {
        if !(self.h0 > 0.0 && self.growth >= 0.0 && self.h_max > 0.0 && self.right > 0.0) {
            return Err(Error::InvalidParameter("grid spacings and right end must be positive".into()));
        }
        Ok(())
    }
}

/// The discretized operator `-2 sin^2(theta) d^2/du^2 + Lambda(u)` with Dirichlet at `u = right`.
///
/// Piecewise-linear elements with lumped mass, which on a graded grid is the
/// centered three-point scheme. The potential is sampled at quarter points of
/// each element so the jump at `u = 0` is seen from the correct side.
#[derive(Clone, Debug)]
pub struct BoModel {
    pub theta: f64,
    pub nodes: Vec<f64>,
    pub operator: SymTridiagonal,
}

impl BoModel {
    pub fn new(theta: f64, grid: &BoGrid) -> Result<Self> {
        check_angle(theta)?;
        grid.validate()?;
        let nodes = grid.nodes();
        let a = 2.0 * theta.sin().powi(2);
        let c2 = theta.cos().powi(2);
        let n = nodes.len();
        let mut stiff_diag = vec![0.0; n];
        let mut stiff_off = vec![0.0; n - 1];
        let mut mass = vec![0.0; n];
        let mut pot = vec![0.0; n];
        for e in 0..n - 1 {
            let (u0, u1) = (nodes[e], nodes[e + 1]);
            let h = u1 - u0;
            stiff_diag[e] += a / h;
            stiff_diag[e + 1] += a / h;
            stiff_off[e] = -a / h;
            mass[e] += h / 2.0;
            mass[e + 1] += h / 2.0;
            pot[e] += h / 2.0 * potential(u0 + h / 4.0, c2);
            pot[e + 1] += h / 2.0 * potential(u1 - h / 4.0, c2);
        }
        let first = match grid.left {
            LeftBoundary::Dirichlet => 1,
            LeftBoundary::Neumann => 0,
        };
        let free = first..n - 1;
        let diag = free.clone().map(|i| (stiff_diag[i] + pot[i]) / mass[i]).collect();
        let off = free
            .clone()
            .skip(1)
            .map(|i| stiff_off[i - 1] / (mass[i - 1] * mass[i]).sqrt())
            .collect();
        Ok(BoModel { theta, nodes, operator: SymTridiagonal::new(diag, off) })
    }

    /// Discrete eigenvalues below the barrier `cos^2 theta`.
    pub fn bound_states(&self) -> Vec<f64> {
        self.operator.below(self.theta.cos().powi(2))
    }
}

/// Born-Oppenheimer eigenvalues below `cos^2 theta`, computed on `grid` and on the
/// halved grid; the finer values are returned once both agree to `1e-4`.
pub fn solve_bo(theta: f64, grid: &BoGrid) -> Result<Vec<f64>> {
    let coarse = BoModel::new(theta, grid)?.bound_states();
    let fine = BoModel::new(theta, &grid.halved())?.bound_states();
    let worst = coarse.iter().zip(&fine).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if worst > 1e-4 {
        return Err(Error::Unresolved(format!(
            "grid too coarse: eigenvalues move by {worst:.3e} when the spacing is halved"
        )));
    }
    Ok(fine)
}

/// One row of the asymptotic comparison table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prediction {
    pub theta: f64,
    pub j: usize,
    pub two_term: f64,
    pub bo_value: Option<f64>,
    pub fem_value: Option<f64>,
}

impl Prediction {
    /// `fem_value - two_term` when a finite-element value is present.
    pub fn gap(&self) -> Option<f64> {
        self.fem_value.map(|f| f - self.two_term)
    }
}

/// Two-term and Born-Oppenheimer predictions for `j = 1..=count`, paired with `fem` values.
pub fn predictions(theta: f64, count: usize, fem: &[f64]) -> Result<Vec<Prediction>> {
    let bo = solve_bo(theta, &BoGrid::for_angle(theta))?;
    (1..=count)
        .map(|j| {
            Ok(Prediction {
                theta,
                j,
                two_term: two_term_eigenvalue(theta, j)?,
                bo_value: bo.get(j - 1).copied(),
                fem_value: fem.get(j - 1).copied(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    const Z1: f64 = 2.338_107_410_459_767;

    #[test]
    fn two_term_values() {
        let theta = 0.01 * FRAC_PI_2;
        let expected = 0.25 + 2.0 * theta.powf(2.0 / 3.0) * Z1 / (4.0 * PI * SQRT_2).powf(2.0 / 3.0);
        assert!((two_term_eigenvalue(theta, 1).unwrap() - expected).abs() < 1e-12);
        assert!((two_term_slope(1).unwrap() - 0.686_664_422_250_101_7).abs() < 1e-10);
        assert!((two_term_eigenvalue(1e-12, 3).unwrap() - 0.25).abs() < 1e-7);
        for j in 1..6 {
            for t in [0.01, 0.1, 0.5] {
                let a = two_term_eigenvalue(t, j).unwrap();
                assert!(two_term_eigenvalue(t, j + 1).unwrap() > a);
                assert!(two_term_eigenvalue(t * 1.1, j).unwrap() > a);
            }
        }
        assert!(two_term_eigenvalue(0.0, 1).is_err());
    }

    #[test]
    fn exponent() {
        assert!((singular_exponent(0.0226 * FRAC_PI_2).unwrap() - 0.5057).abs() < 1e-4);
        assert!((singular_exponent(FRAC_PI_2 - 1e-9).unwrap() - 1.0).abs() < 1e-8);
        assert!((singular_exponent(1e-9).unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn potential_branches() {
        for theta in [0.1, 0.7, 1.3] {
            let c2 = f64::cos(theta).powi(2);
            assert!((bo_potential(-1e-14, theta).unwrap() - c2 / 4.0).abs() < 1e-12);
            assert_eq!(bo_potential(0.0, theta).unwrap(), c2);
        }
        let v = bo_potential(1.0, PI / 6.0).unwrap();
        assert!((v - 0.75).abs() < 1e-15);
        let v = bo_potential(-PI * SQRT_2 / 2.0, PI / 4.0).unwrap();
        assert!((v - 0.5).abs() < 1e-14);
        assert!(bo_potential(-PI * SQRT_2, 0.5).is_err());
    }

    #[test]
    fn airy_closed_form() {
        let e = model_airy_eigen(1.0, 1).unwrap();
        assert!((e.energy - Z1).abs() < 1e-10);
        let e = model_airy_eigen(0.001, 2).unwrap();
        assert!((e.energy - 0.01 * 4.087_949_444_130_971).abs() < 1e-10);
        assert!(e.eigenfunction(0.0).abs() < 1e-10);
        assert!(model_airy_eigen(0.0, 1).is_err());
    }

    #[test]
    fn airy_eigenfunction_solves_the_equation() {
        let pair = model_airy_eigen(0.1, 2).unwrap();
        let d = 1e-4;
        for u in [-0.3, -0.1, -0.02] {
            let f = |x: f64| pair.eigenfunction(x);
            let second = (f(u + d) - 2.0 * f(u) + f(u - d)) / (d * d);
            let lhs = -pair.h * pair.h * second - u * f(u);
            assert!((lhs - pair.energy * f(u)).abs() < 1e-5, "u={u}");
        }
    }

    #[test]
    fn finite_differences_match_closed_form() {
        let fd = airy_fd_eigenvalues(0.1, 1, 50.0, 1e-3).unwrap();
        assert!((fd[0] - 0.1f64.powf(2.0 / 3.0) * Z1).abs() < 1e-4, "{}", fd[0]);
        for h in [0.1, 0.05] {
            let fd = airy_fd_eigenvalues(h, 5, 50.0, 1e-3).unwrap();
            for (j, e) in fd.iter().enumerate() {
                let exact = model_airy_eigen(h, j + 1).unwrap().energy;
                assert!((e - exact).abs() < 1e-3, "h={h} j={}", j + 1);
            }
        }
    }

    #[test]
    fn grid_contains_corner_ends_and_origin() {
        let g = BoGrid::for_angle(0.05);
        let nodes = g.nodes();
        assert_eq!(nodes[0], -PI * SQRT_2);
        assert_eq!(*nodes.last().unwrap(), g.right);
        assert!(nodes.contains(&0.0));
        assert!(nodes.windows(2).all(|w| w[1] > w[0]));
        let near = nodes.windows(2).find(|w| w[0] == 0.0).unwrap();
        assert!(near[1] - near[0] <= 0.005 + 1e-15);
        assert!(near[1] - near[0] <= g.h0 * (1.0 + 1e-12));
        assert!(g.halved().nodes().len() > nodes.len());
    }

    #[test]
    fn born_oppenheimer_small_angle() {
        let theta = 0.02 * FRAC_PI_2;
        let bo = solve_bo(theta, &BoGrid::for_angle(theta)).unwrap();
        assert!(bo.len() >= 3);
        assert!(bo.windows(2).all(|w| w[1] > w[0]));
        assert!(bo.iter().all(|&l| l < theta.cos().powi(2) && l > 0.25));
        let two = two_term_eigenvalue(theta, 1).unwrap();
        assert!((bo[0] - two).abs() <= 0.05 * (two - 0.25), "bo {} two-term {two}", bo[0]);
    }

    #[test]
    fn born_oppenheimer_above_quarter() {
        for frac in [0.005, 0.02, 0.1, 0.3, 0.6, 0.9] {
            let theta = frac * FRAC_PI_2;
            let bo = solve_bo(theta, &BoGrid::for_angle(theta)).unwrap();
            if frac <= 0.3 {
                assert!(!bo.is_empty(), "theta={theta}");
            }
            assert!(bo.first().is_none_or(|&l| l > 0.25), "theta={theta}");
        }
    }

    #[test]
    fn left_condition_is_irrelevant() {
        let theta = 0.05 * FRAC_PI_2;
        let grid = BoGrid::for_angle(theta);
        let d = BoModel::new(theta, &grid).unwrap().bound_states();
        let n = BoModel::new(theta, &BoGrid { left: LeftBoundary::Neumann, ..grid }).unwrap().bound_states();
        assert_eq!(d.len(), n.len());
        for (a, b) in d.iter().zip(&n) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn coarse_grid_is_detected() {
        let grid = BoGrid { h0: 0.5, growth: 0.0, h_max: 0.5, right: 4.0, left: LeftBoundary::Dirichlet };
        assert!(matches!(solve_bo(0.05, &grid), Err(Error::Unresolved(_))));
    }
}
