//! Evaluation of finite-element functions at arbitrary points.

use super::assembly::DofMap;
use super::basis::ReferenceBasis;
use crate::error::{Error, Result};
use crate::geometry::Mesh;

/// Uniform bucket grid over triangle bounding boxes.
#[derive(Clone, Debug)]
pub struct PointLocator {
    origin: [f64; 2],
    cell: [f64; 2],
    dims: [usize; 2],
    buckets: Vec<Vec<usize>>,
}

impl PointLocator {
    pub fn new(mesh: &Mesh) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in &mesh.vertices {
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        let extent = [(hi[0] - lo[0]).max(1e-300), (hi[1] - lo[1]).max(1e-300)];
        let target = (mesh.n_triangles() as f64 / 2.0).max(1.0);
        let aspect = extent[0] / extent[1];
        let nx = ((target * aspect).sqrt().ceil() as usize).clamp(1, 4096);
        let ny = ((target / aspect).sqrt().ceil() as usize).clamp(1, 4096);
        let cell = [extent[0] / nx as f64, extent[1] / ny as f64];
        let mut buckets = vec![Vec::new(); nx * ny];
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let mut tlo = [f64::INFINITY; 2];
            let mut thi = [f64::NEG_INFINITY; 2];
            for &v in tri {
                for d in 0..2 {
                    tlo[d] = tlo[d].min(mesh.vertices[v][d]);
                    thi[d] = thi[d].max(mesh.vertices[v][d]);
                }
            }
            let i0 = (((tlo[0] - lo[0]) / cell[0]).floor().max(0.0) as usize).min(nx - 1);
            let i1 = (((thi[0] - lo[0]) / cell[0]).floor().max(0.0) as usize).min(nx - 1);
            let j0 = (((tlo[1] - lo[1]) / cell[1]).floor().max(0.0) as usize).min(ny - 1);
            let j1 = (((thi[1] - lo[1]) / cell[1]).floor().max(0.0) as usize).min(ny - 1);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    buckets[j * nx + i].push(t);
                }
            }
        }
        PointLocator { origin: lo, cell, dims: [nx, ny], buckets }
    }

    /// Containing triangle and reference coordinates; boundary points resolve to a touching triangle.
    pub fn locate(&self, mesh: &Mesh, p: [f64; 2]) -> Option<(usize, [f64; 2])> {
        let fi = (p[0] - self.origin[0]) / self.cell[0];
        let fj = (p[1] - self.origin[1]) / self.cell[1];
        let tol = 1e-9;
        if fi < -tol || fj < -tol || fi > self.dims[0] as f64 + tol || fj > self.dims[1] as f64 + tol {
            return None;
        }
        let i = (fi.floor().max(0.0) as usize).min(self.dims[0] - 1);
        let j = (fj.floor().max(0.0) as usize).min(self.dims[1] - 1);
        let mut best: Option<(usize, [f64; 2], f64)> = None;
        for &t in &self.buckets[j * self.dims[0] + i] {
            let [p0, p1, p2] = mesh.triangles[t].map(|v| mesh.vertices[v]);
            let a = [[p1[0] - p0[0], p2[0] - p0[0]], [p1[1] - p0[1], p2[1] - p0[1]]];
            let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
            let dx = p[0] - p0[0];
            let dy = p[1] - p0[1];
            let xi = (a[1][1] * dx - a[0][1] * dy) / det;
            let eta = (-a[1][0] * dx + a[0][0] * dy) / det;
            let worst = xi.min(eta).min(1.0 - xi - eta);
            if worst >= -1e-10 && best.as_ref().is_none_or(|b| worst > b.2) {
                best = Some((t, [xi, eta], worst));
            }
        }
        best.map(|(t, r, _)| (t, [r[0].clamp(0.0, 1.0), r[1].clamp(0.0, 1.0)]))
    }
}

/// A finite-element function given by nodal values in global (unreduced) numbering.
pub struct FeFunction<'a> {
    pub mesh: &'a Mesh,
    pub basis: &'a ReferenceBasis,
    pub dofs: &'a DofMap,
    pub values: Vec<f64>,
    locator: PointLocator,
}

impl<'a> FeFunction<'a> {
    pub fn new(mesh: &'a Mesh, basis: &'a ReferenceBasis, dofs: &'a DofMap, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), dofs.n_global);
        FeFunction { mesh, basis, dofs, values, locator: PointLocator::new(mesh) }
    }

    /// From a reduced vector (eliminated nodes are zero).
    pub fn from_reduced(mesh: &'a Mesh, basis: &'a ReferenceBasis, dofs: &'a DofMap, reduced: &[f64]) -> Self {
        Self::new(mesh, basis, dofs, dofs.expand(reduced))
    }

    pub fn try_value(&self, p: [f64; 2]) -> Option<f64> {
        let (t, r) = self.locator.locate(self.mesh, p)?;
        let phi = self.basis.values(r);
        Some(self.dofs.element(t).iter().zip(&phi).map(|(&g, f)| self.values[g] * f).sum())
    }

    pub fn value(&self, p: [f64; 2]) -> Result<f64> {
        self.try_value(p).ok_or(Error::OutsideDomain(p[0], p[1]))
    }

    pub fn value_and_gradient(&self, p: [f64; 2]) -> Result<(f64, [f64; 2])> {
        let (t, r) = self.locator.locate(self.mesh, p).ok_or(Error::OutsideDomain(p[0], p[1]))?;
        let [p0, p1, p2] = self.mesh.triangles[t].map(|v| self.mesh.vertices[v]);
        let j = [[p1[0] - p0[0], p2[0] - p0[0]], [p1[1] - p0[1], p2[1] - p0[1]]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let phi = self.basis.values(r);
        let grads = self.basis.gradients(r);
        let mut value = 0.0;
        let mut gref = [0.0; 2];
        for (local, &g) in self.dofs.element(t).iter().enumerate() {
            let c = self.values[g];
            value += c * phi[local];
            gref[0] += c * grads[local][0];
            gref[1] += c * grads[local][1];
        }
        let gx = (j[1][1] * gref[0] - j[1][0] * gref[1]) / det;
        let gy = (-j[0][1] * gref[0] + j[0][0] * gref[1]) / det;
        Ok((value, [gx, gy]))
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        self.locator.locate(self.mesh, p).is_some()
    }
}

/// Field values at the requested points; fails on the first point outside the mesh.
pub fn evaluate_field(
    mesh: &Mesh,
    basis: &ReferenceBasis,
    dofs: &DofMap,
    values: &[f64],
    points: &[[f64; 2]],
) -> Result<Vec<f64>> {
    let f = FeFunction::new(mesh, basis, dofs, values.to_vec());
    points.iter().map(|&p| f.value(p)).collect()
}

/// Nodal interpolant of `f` in global numbering.
pub fn interpolate(dofs: &DofMap, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    dofs.coords.iter().map(|p| f(p[0], p[1])).collect()
}
