//! Global numbering and assembly of the anisotropic stiffness and mass matrices.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::basis::ReferenceBasis;
use super::quadrature::QuadratureRule;
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};
use crate::geometry::{Formulation, Mesh};

/// Global degree-of-freedom numbering: vertices, then edge nodes, then cell-interior nodes.
#[derive(Clone, Debug)]
pub struct DofMap {
    pub degree: usize,
    pub n_global: usize,
    pub nodes_per_element: usize,
    element_dofs: Vec<usize>,
    /// Physical position of every global node.
    pub coords: Vec<[f64; 2]>,
    /// Nodes on Dirichlet or artificial edges.
    pub essential: Vec<bool>,
    /// Global index to reduced index; `None` for eliminated nodes.
    pub reduced: Vec<Option<usize>>,
    /// Reduced index to global index.
    pub free: Vec<usize>,
}

impl DofMap {
    pub fn new(mesh: &Mesh, basis: &ReferenceBasis) -> DofMap {
        let k = basis.degree;
        let per_edge = k - 1;
        let per_cell = basis.nodes_interior();
        let nv = mesh.n_vertices();
        let mut edge_index: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &mesh.triangles {
            for l in 0..3 {
                let (a, b) = (tri[l], tri[(l + 1) % 3]);
                let n = edge_index.len();
                edge_index.entry((a.min(b), a.max(b))).or_insert(n);
            }
        }
        let ne = edge_index.len();
        let n_global = nv + ne * per_edge + mesh.n_triangles() * per_cell;
        let np = basis.len();
        let mut element_dofs = Vec::with_capacity(np * mesh.n_triangles());
        let mut coords = vec![[f64::NAN; 2]; n_global];
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let start = element_dofs.len();
            element_dofs.extend_from_slice(tri);
            for l in 0..3 {
                let (a, b) = (tri[l], tri[(l + 1) % 3]);
                let e = edge_index[&(a.min(b), a.max(b))];
                for i in 0..per_edge {
                    let g = if a < b { i } else { per_edge - 1 - i };
                    element_dofs.push(nv + e * per_edge + g);
                }
            }
            for i in 0..per_cell {
                element_dofs.push(nv + ne * per_edge + t * per_cell + i);
            }
            let [p0, p1, p2] = tri.map(|v| mesh.vertices[v]);
            for (local, &g) in element_dofs[start..].iter().enumerate() {
                if coords[g][0].is_nan() {
                    let [xi, eta] = basis.nodes[local];
                    coords[g] = [
                        p0[0] + xi * (p1[0] - p0[0]) + eta * (p2[0] - p0[0]),
                        p0[1] + xi * (p1[1] - p0[1]) + eta * (p2[1] - p0[1]),
                    ];
                }
            }
        }
        let mut essential = vec![false; n_global];
        for (e, tag) in &mesh.boundary_edges {
            if !tag.is_essential() {
                continue;
            }
            essential[e[0]] = true;
            essential[e[1]] = true;
            if let Some(&idx) = edge_index.get(&(e[0].min(e[1]), e[0].max(e[1]))) {
                for i in 0..per_edge {
                    essential[nv + idx * per_edge + i] = true;
                }
            }
        }
        let mut reduced = vec![None; n_global];
        let mut free = Vec::new();
        for g in 0..n_global {
            if !essential[g] {
                reduced[g] = Some(free.len());
                free.push(g);
            }
        }
        DofMap { degree: k, n_global, nodes_per_element: np, element_dofs, coords, essential, reduced, free }
    }

    /// Global dofs of element `t` in local node order.
    pub fn element(&self, t: usize) -> &[usize] {
        &self.element_dofs[t * self.nodes_per_element..(t + 1) * self.nodes_per_element]
    }

    pub fn n_elements(&self) -> usize {
        self.element_dofs.len() / self.nodes_per_element
    }

    /// Number of unknowns after elimination.
    pub fn n_dofs(&self) -> usize {
        self.free.len()
    }

    /// Reduced vector to full nodal vector, zero on eliminated nodes.
    pub fn expand(&self, reduced: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.n_global];
        for (r, &g) in self.free.iter().enumerate() {
            full[g] = reduced[r];
        }
        full
    }

    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&g| full[g]).collect()
    }

    /// Sidecar text: `reduced_index global_index u v` for every unknown.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (r, &g) in self.free.iter().enumerate() {
            let [u, v] = self.coords[g];
            let _ = writeln!(s, "{r} {g} {u:.16e} {v:.16e}");
        }
        s
    }
}

/// Reference-element integrals of products of basis functions and their derivatives.
#[derive(Clone, Debug)]
pub struct ReferenceMatrices {
    pub mass: Vec<f64>,
    pub dxx: Vec<f64>,
    /// Symmetrized mixed term `K_xy + K_yx`.
    pub dxy: Vec<f64>,
    pub dyy: Vec<f64>,
    pub np: usize,
}

impl ReferenceMatrices {
    pub fn new(basis: &ReferenceBasis, quad: &QuadratureRule) -> Self {
        let np = basis.len();
        let mut r = ReferenceMatrices {
            mass: vec![0.0; np * np],
            dxx: vec![0.0; np * np],
            dxy: vec![0.0; np * np],
            dyy: vec![0.0; np * np],
            np,
        };
        for (p, w) in quad.points.iter().zip(&quad.weights) {
            let v = basis.values(*p);
            let g = basis.gradients(*p);
            for i in 0..np {
                for j in 0..np {
                    let idx = i * np + j;
                    r.mass[idx] += w * v[i] * v[j];
                    r.dxx[idx] += w * g[i][0] * g[j][0];
                    r.dxy[idx] += w * (g[i][0] * g[j][1] + g[i][1] * g[j][0]);
                    r.dyy[idx] += w * g[i][1] * g[j][1];
                }
            }
        }
        for m in [&mut r.mass, &mut r.dxx, &mut r.dxy, &mut r.dyy] {
            for i in 0..np {
                for j in (i + 1)..np {
                    let avg = 0.5 * (m[i * np + j] + m[j * np + i]);
                    m[i * np + j] = avg;
                    m[j * np + i] = avg;
                }
            }
        }
        r
    }
}

/// Element stiffness and mass for an affine triangle with gradient weights `(cx, cy)`.
pub fn element_matrices(
    reference: &ReferenceMatrices,
    vertices: [[f64; 2]; 3],
    (cx, cy): (f64, f64),
    element: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let [p0, p1, p2] = vertices;
    let j = [[p1[0] - p0[0], p2[0] - p0[0]], [p1[1] - p0[1], p2[1] - p0[1]]];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    if !(det > 0.0) {
        return Err(Error::DegenerateElement { element, det });
    }
    // B = J^{-T}; G = B^T diag(cx, cy) B
    let b = [[j[1][1] / det, -j[1][0] / det], [-j[0][1] / det, j[0][0] / det]];
    let g00 = cx * b[0][0] * b[0][0] + cy * b[1][0] * b[1][0];
    let g01 = cx * b[0][0] * b[0][1] + cy * b[1][0] * b[1][1];
    let g11 = cx * b[0][1] * b[0][1] + cy * b[1][1] * b[1][1];
    let n = reference.np * reference.np;
    let mut s = vec![0.0; n];
    let mut m = vec![0.0; n];
    for idx in 0..n {
        s[idx] = det * (g00 * reference.dxx[idx] + g01 * reference.dxy[idx] + g11 * reference.dyy[idx]);
        m[idx] = det * reference.mass[idx];
    }
    Ok((s, m))
}

/// Sorted row patterns from element connectivity.
fn sparsity(dofs: &DofMap) -> Vec<Vec<usize>> {
    let mut incidence: Vec<Vec<u32>> = vec![Vec::new(); dofs.n_global];
    for t in 0..dofs.n_elements() {
        for &g in dofs.element(t) {
            incidence[g].push(t as u32);
        }
    }
    incidence
        .iter()
        .map(|elements| {
            let mut row: Vec<usize> =
                elements.iter().flat_map(|&t| dofs.element(t as usize).iter().copied()).collect();
            row.sort_unstable();
            row.dedup();
            row
        })
        .collect()
}

/// Stiffness and mass before boundary elimination.
pub fn assemble_unconstrained(
    mesh: &Mesh,
    basis: &ReferenceBasis,
    quad: &QuadratureRule,
    coefficients: (f64, f64),
) -> Result<(CsrMatrix, CsrMatrix, DofMap)> {
    let dofs = DofMap::new(mesh, basis);
    let reference = ReferenceMatrices::new(basis, quad);
    let pattern = sparsity(&dofs);
    let mut s = CsrMatrix::from_pattern(pattern);
    let mut m = s.clone();
    let np = basis.len();
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let vertices = tri.map(|v| mesh.vertices[v]);
        let (se, me) = element_matrices(&reference, vertices, coefficients, t)?;
        let ids = dofs.element(t);
        for i in 0..np {
            for j in 0..np {
                s.add(ids[i], ids[j], se[i * np + j]);
                m.add(ids[i], ids[j], me[i * np + j]);
            }
        }
    }
    Ok((s, m, dofs))
}

/// Reduced symmetric system after deleting Dirichlet and artificial-boundary unknowns.
#[derive(Clone, Debug)]
pub struct AssembledSystem {
    pub s: CsrMatrix,
    pub m: CsrMatrix,
    pub dof_map: DofMap,
    pub coefficients: (f64, f64),
}

impl AssembledSystem {
    pub fn n_dofs(&self) -> usize {
        self.s.n
    }
}

pub fn assemble(
    mesh: &Mesh,
    basis: &ReferenceBasis,
    quad: &QuadratureRule,
    theta: f64,
    formulation: Formulation,
) -> Result<AssembledSystem> {
    crate::geometry::check_angle(theta)?;
    assemble_with_coefficients(mesh, basis, quad, formulation.coefficients(theta))
}

pub fn assemble_with_coefficients(
    mesh: &Mesh,
    basis: &ReferenceBasis,
    quad: &QuadratureRule,
    coefficients: (f64, f64),
) -> Result<AssembledSystem> {
    if quad.degree < 2 * basis.degree {
        return Err(Error::UnsupportedQuadrature(quad.degree));
    }
    let (s, m, dof_map) = assemble_unconstrained(mesh, basis, quad, coefficients)?;
    let s = s.restrict(&dof_map.reduced);
    let m = m.restrict(&dof_map.reduced);
    Ok(AssembledSystem { s, m, dof_map, coefficients })
}
