//! Nodal Lagrange bases of degree 1 to 6 on the reference triangle.
//!
//! The basis is built from an orthonormal Dubiner expansion and a generalized
//! Vandermonde matrix, which keeps the Kronecker property accurate for every
//! node family. Nodes are ordered: three vertices, then the interior nodes of
//! edges `0->1`, `1->2`, `2->0` (each in traversal order), then cell-interior nodes.

use faer::linalg::solvers::DenseSolveCore;
use faer::Mat;

use super::quadrature::gauss_lobatto;
use crate::error::{Error, Result};

pub const MAX_DEGREE: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum NodeFamily {
    /// Lobatto points on the edges, warp-and-blend inside.
    #[default]
    GaussLobatto,
    Equispaced,
}

#[derive(Clone, Debug)]
pub struct ReferenceBasis {
    pub degree: usize,
    pub family: NodeFamily,
    /// Nodes in reference coordinates `(xi, eta)`.
    pub nodes: Vec<[f64; 2]>,
    /// Row `i` holds the Dubiner coefficients of the `i`-th Lagrange function.
    coefficients: Mat<f64>,
}

pub fn n_nodes(k: usize) -> usize {
    (k + 1) * (k + 2) / 2
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Orthonormal Jacobi polynomial `P_n^{(alpha, 0)}` on `[-1, 1]`.
fn jacobi(x: f64, alpha: usize, n: usize) -> f64 {
    jacobi_ab(x, alpha, 0, n)
}

/// Orthonormal Jacobi `P_n^{(alpha, beta)}` for integer parameters.
fn jacobi_ab(x: f64, alpha: usize, beta: usize, n: usize) -> f64 {
    let (a, b) = (alpha as f64, beta as f64);
    let gamma0 = 2f64.powf(a + b + 1.0) / (a + b + 1.0) * factorial(alpha) * factorial(beta)
        / factorial(alpha + beta);
    let p0 = 1.0 / gamma0.sqrt();
    if n == 0 {
        return p0;
    }
    let gamma1 = (a + 1.0) * (b + 1.0) / (a + b + 3.0) * gamma0;
    let p1 = ((a + b + 2.0) * x / 2.0 + (a - b) / 2.0) / gamma1.sqrt();
    let mut prev = p0;
    let mut cur = p1;
    let mut a_old = 2.0 / (2.0 + a + b) * ((a + 1.0) * (b + 1.0) / (a + b + 3.0)).sqrt();
    for i in 1..n {
        let i = i as f64;
        let h1 = 2.0 * i + a + b;
        let a_new = 2.0 / (h1 + 2.0)
            * ((i + 1.0) * (i + 1.0 + a + b) * (i + 1.0 + a) * (i + 1.0 + b)
                / (h1 + 1.0)
                / (h1 + 3.0))
                .sqrt();
        let b_new = -(a * a - b * b) / h1 / (h1 + 2.0);
        let next = (-a_old * prev + (x - b_new) * cur) / a_new;
        prev = cur;
        cur = next;
        a_old = a_new;
    }
    cur
}

fn jacobi_derivative(x: f64, alpha: usize, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        ((n * (n + alpha + 1)) as f64).sqrt() * jacobi_ab(x, alpha + 1, 1, n - 1)
    }
}

fn mode_indices(k: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..=k).flat_map(move |i| (0..=(k - i)).map(move |j| (i, j)))
}

/// Collapsed coordinates `(a, b)` of the point `(r, s)` in `[-1, 1]^2` reference form.
fn collapse(r: f64, s: f64) -> (f64, f64) {
    let a = if (1.0 - s).abs() > 1e-14 { 2.0 * (1.0 + r) / (1.0 - s) - 1.0 } else { -1.0 };
    (a, s)
}

/// Dubiner mode values at a point in `(xi, eta)` coordinates.
pub fn dubiner_values(k: usize, p: [f64; 2]) -> Vec<f64> {
    let (r, s) = (2.0 * p[0] - 1.0, 2.0 * p[1] - 1.0);
    let (a, b) = collapse(r, s);
    mode_indices(k)
        .map(|(i, j)| {
            std::f64::consts::SQRT_2
                * jacobi(a, 0, i)
                * jacobi(b, 2 * i + 1, j)
                * (1.0 - b).powi(i as i32)
        })
        .collect()
}

/// Dubiner mode gradients with respect to `(xi, eta)`.
pub fn dubiner_gradients(k: usize, p: [f64; 2]) -> Vec<[f64; 2]> {
    let (r, s) = (2.0 * p[0] - 1.0, 2.0 * p[1] - 1.0);
    let (a, b) = collapse(r, s);
    mode_indices(k)
        .map(|(i, j)| {
            let fa = jacobi(a, 0, i);
            let dfa = jacobi_derivative(a, 0, i);
            let gb = jacobi(b, 2 * i + 1, j);
            let dgb = jacobi_derivative(b, 2 * i + 1, j);
            let half = 0.5 * (1.0 - b);
            let mut dr = dfa * gb;
            let mut ds = dfa * gb * 0.5 * (1.0 + a);
            if i > 0 {
                dr *= half.powi(i as i32 - 1);
                ds *= half.powi(i as i32 - 1);
            }
            let mut tmp = dgb * half.powi(i as i32);
            if i > 0 {
                tmp -= 0.5 * i as f64 * gb * half.powi(i as i32 - 1);
            }
            ds += fa * tmp;
            let scale = 2f64.powf(i as f64 + 0.5);
            // d/dxi = 2 d/dr
            [2.0 * scale * dr, 2.0 * scale * ds]
        })
        .collect()
}

/// Warp function of the warp-and-blend construction (equispaced to Lobatto shift).
fn warp_factor(k: usize, r: f64) -> f64 {
    let lgl = gauss_lobatto(k);
    let req: Vec<f64> = (0..=k).map(|i| -1.0 + 2.0 * i as f64 / k as f64).collect();
    let mut warp = 0.0;
    for i in 0..=k {
        let mut l = 1.0;
        for j in 0..=k {
            if j != i {
                l *= (r - req[j]) / (req[i] - req[j]);
            }
        }
        warp += l * (lgl[i] - req[i]);
    }
    if r.abs() < 1.0 - 1e-10 {
        warp / (1.0 - r * r)
    } else {
        0.0
    }
}

/// Warp-and-blend node set with the standard optimized blending parameters.
fn warp_blend_nodes(k: usize) -> Vec<[f64; 3]> {
    const ALPHA_OPT: [f64; 7] = [0.0, 0.0, 0.0, 1.4152, 0.1001, 0.2751, 0.9800];
    let alpha = ALPHA_OPT[k];
    let sqrt3 = 3f64.sqrt();
    let mut out = Vec::new();
    for n in 0..=k {
        for m in 0..=(k - n) {
            let l1 = n as f64 / k as f64;
            let l3 = m as f64 / k as f64;
            let l2 = 1.0 - l1 - l3;
            let mut x = -l2 + l3;
            let mut y = (-l2 - l3 + 2.0 * l1) / sqrt3;
            let w1 = 4.0 * l2 * l3 * warp_factor(k, l3 - l2) * (1.0 + (alpha * l1).powi(2));
            let w2 = 4.0 * l1 * l3 * warp_factor(k, l1 - l3) * (1.0 + (alpha * l2).powi(2));
            let w3 = 4.0 * l1 * l2 * warp_factor(k, l2 - l1) * (1.0 + (alpha * l3).powi(2));
            let (c2, s2) = ((2.0 * std::f64::consts::PI / 3.0).cos(), (2.0 * std::f64::consts::PI / 3.0).sin());
            let (c3, s3) = ((4.0 * std::f64::consts::PI / 3.0).cos(), (4.0 * std::f64::consts::PI / 3.0).sin());
            x += w1 + c2 * w2 + c3 * w3;
            y += s2 * w2 + s3 * w3;
            // back to barycentric coordinates of the equilateral triangle
            let b1 = (sqrt3 * y + 1.0) / 3.0;
            let b2 = (-3.0 * x - sqrt3 * y + 2.0) / 6.0;
            let b3 = (3.0 * x - sqrt3 * y + 2.0) / 6.0;
            // equilateral vertices (-1,-1/sqrt3), (1,-1/sqrt3), (0,2/sqrt3) carry b2, b3, b1
            out.push([b2, b3, b1]);
        }
    }
    out
}

fn equispaced_nodes(k: usize) -> Vec<[f64; 3]> {
    let mut out = Vec::new();
    for j in 0..=k {
        for i in 0..=(k - j) {
            let (xi, eta) = (i as f64 / k as f64, j as f64 / k as f64);
            out.push([1.0 - xi - eta, xi, eta]);
        }
    }
    out
}

/// Orders barycentric nodes as vertices, edges, interior; snaps boundary coordinates to zero.
fn order_nodes(k: usize, bary: Vec<[f64; 3]>) -> Vec<[f64; 2]> {
    let tol = 1e-10;
    let mut vertices = [[0.0; 2]; 3];
    let mut edges: [Vec<[f64; 2]>; 3] = Default::default();
    let mut interior = Vec::new();
    for b in bary {
        let zero: Vec<bool> = b.iter().map(|v| v.abs() < tol).collect();
        let xi = if zero[1] { 0.0 } else { b[1] };
        let eta = if zero[2] { 0.0 } else { b[2] };
        // snap so that nodes on edge 1->2 satisfy xi + eta = 1 exactly
        let (xi, eta) = if zero[0] { (xi, 1.0 - xi) } else { (xi, eta) };
        let p = [xi, eta];
        match zero.iter().filter(|z| **z).count() {
            2 => {
                let v = (0..3).find(|&i| !zero[i]).unwrap();
                vertices[v] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]][v];
            }
            1 => {
                let e = if zero[2] { 0 } else if zero[0] { 1 } else { 2 };
                edges[e].push(p);
            }
            _ => interior.push(p),
        }
    }
    edges[0].sort_by(|a, b| a[0].total_cmp(&b[0]));
    edges[1].sort_by(|a, b| a[1].total_cmp(&b[1]));
    edges[2].sort_by(|a, b| b[1].total_cmp(&a[1]));
    debug_assert!(edges.iter().all(|e| e.len() == k - 1));
    let mut nodes = vertices.to_vec();
    for e in edges {
        nodes.extend(e);
    }
    nodes.extend(interior);
    nodes
}

/// Nodes of the requested family in canonical order.
pub fn reference_nodes(k: usize, family: NodeFamily) -> Result<Vec<[f64; 2]>> {
    if !(1..=MAX_DEGREE).contains(&k) {
        return Err(Error::UnsupportedDegree(k));
    }
    let bary = match family {
        NodeFamily::GaussLobatto if k >= 3 => warp_blend_nodes(k),
        _ => equispaced_nodes(k),
    };
    Ok(order_nodes(k, bary))
}

pub fn build_basis(k: usize) -> Result<ReferenceBasis> {
    build_basis_with(k, NodeFamily::GaussLobatto)
}

pub fn build_basis_with(k: usize, family: NodeFamily) -> Result<ReferenceBasis> {
    let nodes = reference_nodes(k, family)?;
    let np = nodes.len();
    let vandermonde = Mat::from_fn(np, np, |i, j| dubiner_values(k, nodes[i])[j]);
    // phi_i = sum_j C_ij psi_j with V C^T = I
    let inv = vandermonde.partial_piv_lu().inverse();
    let coefficients = inv.transpose().to_owned();
    Ok(ReferenceBasis { degree: k, family, nodes, coefficients })
}

impl ReferenceBasis {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of nodes strictly inside each edge.
    pub fn nodes_per_edge(&self) -> usize {
        self.degree - 1
    }

    pub fn nodes_interior(&self) -> usize {
        self.len() - 3 - 3 * self.nodes_per_edge()
    }

    pub fn values(&self, p: [f64; 2]) -> Vec<f64> {
        let modes = dubiner_values(self.degree, p);
        (0..self.len())
            .map(|i| (0..modes.len()).map(|j| self.coefficients[(i, j)] * modes[j]).sum())
            .collect()
    }

    pub fn gradients(&self, p: [f64; 2]) -> Vec<[f64; 2]> {
        let modes = dubiner_gradients(self.degree, p);
        (0..self.len())
            .map(|i| {
                let mut g = [0.0; 2];
                for (j, m) in modes.iter().enumerate() {
                    let c = self.coefficients[(i, j)];
                    g[0] += c * m[0];
                    g[1] += c * m[1];
                }
                g
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cardinalities() {
        for k in 1..=6 {
            let b = build_basis(k).unwrap();
            assert_eq!(b.len(), n_nodes(k));
            assert_eq!(b.nodes_interior(), n_nodes(k) - 3 * k);
        }
        assert_eq!(build_basis(6).unwrap().len(), 28);
        assert!(matches!(build_basis(0), Err(Error::UnsupportedDegree(0))));
        assert!(build_basis(7).is_err());
    }

    #[test]
    fn low_degree_nodes() {
        let b = build_basis(1).unwrap();
        assert_eq!(b.nodes, vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        let b = build_basis(2).unwrap();
        assert_eq!(&b.nodes[3..], &[[0.5, 0.0], [0.5, 0.5], [0.0, 0.5]]);
        // hat functions
        let v = b.values([0.25, 0.25]);
        assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        let v = build_basis(1).unwrap().values([0.2, 0.3]);
        for (got, want) in v.iter().zip([0.5, 0.2, 0.3]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn edge_nodes_follow_lobatto_points() {
        for k in 3..=6 {
            let b = build_basis(k).unwrap();
            let lgl = gauss_lobatto(k);
            for (i, node) in b.nodes[3..3 + (k - 1)].iter().enumerate() {
                assert!((node[0] - 0.5 * (lgl[i + 1] + 1.0)).abs() < 1e-14, "k={k}");
                assert_eq!(node[1], 0.0);
            }
            // edge 1->2 runs from (1,0) to (0,1)
            for node in &b.nodes[3 + (k - 1)..3 + 2 * (k - 1)] {
                assert_eq!(node[0] + node[1], 1.0);
            }
            // interior nodes strictly inside
            for node in &b.nodes[3 + 3 * (k - 1)..] {
                assert!(node[0] > 1e-3 && node[1] > 1e-3 && node[0] + node[1] < 1.0 - 1e-3);
            }
        }
    }

    #[test]
    fn kronecker_property() {
        for family in [NodeFamily::GaussLobatto, NodeFamily::Equispaced] {
            for k in 1..=6 {
                let b = build_basis_with(k, family).unwrap();
                for (j, &node) in b.nodes.iter().enumerate() {
                    for (i, v) in b.values(node).iter().enumerate() {
                        let want = if i == j { 1.0 } else { 0.0 };
                        assert!((v - want).abs() < 1e-10, "k={k} i={i} j={j} v={v}");
                    }
                }
            }
        }
    }

    #[test]
    fn degree_six_reproduces_sixth_powers() {
        let b = build_basis(6).unwrap();
        let f = |p: [f64; 2]| p[0].powi(6) + 0.3 * p[0].powi(2) * p[1].powi(4) - p[1];
        let coeffs: Vec<f64> = b.nodes.iter().map(|&p| f(p)).collect();
        for p in [[0.1, 0.2], [0.7, 0.05], [0.33, 0.33], [0.0, 1.0]] {
            let v: f64 = b.values(p).iter().zip(&coeffs).map(|(a, c)| a * c).sum();
            assert!((v - f(p)).abs() < 1e-10);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        for k in 1..=6 {
            let b = build_basis(k).unwrap();
            let p = [0.23, 0.41];
            let h = 1e-6;
            let g = b.gradients(p);
            let vx1 = b.values([p[0] + h, p[1]]);
            let vx0 = b.values([p[0] - h, p[1]]);
            let vy1 = b.values([p[0], p[1] + h]);
            let vy0 = b.values([p[0], p[1] - h]);
            for i in 0..b.len() {
                assert!((g[i][0] - (vx1[i] - vx0[i]) / (2.0 * h)).abs() < 1e-6, "k={k}");
                assert!((g[i][1] - (vy1[i] - vy0[i]) / (2.0 * h)).abs() < 1e-6, "k={k}");
            }
            // gradients at the collapsed vertex remain finite and sum to zero
            let gv = b.gradients([0.0, 1.0]);
            let sx: f64 = gv.iter().map(|g| g[0]).sum();
            let sy: f64 = gv.iter().map(|g| g[1]).sum();
            assert!(sx.abs() < 1e-9 && sy.abs() < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn partition_of_unity(k in 1usize..=6, x in 0.0f64..1.0, t in 0.0f64..1.0, equi in any::<bool>()) {
            let family = if equi { NodeFamily::Equispaced } else { NodeFamily::GaussLobatto };
            let b = build_basis_with(k, family).unwrap();
            let p = [x * (1.0 - t), t];
            let s: f64 = b.values(p).iter().sum();
            prop_assert!((s - 1.0).abs() < 1e-12);
            let g = b.gradients(p);
            prop_assert!(g.iter().map(|g| g[0]).sum::<f64>().abs() < 1e-10);
            prop_assert!(g.iter().map(|g| g[1]).sum::<f64>().abs() < 1e-10);
        }
    }
}
