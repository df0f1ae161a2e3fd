//! High-order Lagrange finite elements on triangles.

pub mod assembly;
pub mod basis;
pub mod field;
pub mod quadrature;
pub mod sparse;

pub use assembly::{assemble, assemble_unconstrained, AssembledSystem, DofMap};
pub use basis::{build_basis, build_basis_with, NodeFamily, ReferenceBasis};
pub use field::{evaluate_field, interpolate, FeFunction, PointLocator};
pub use quadrature::{build_quadrature, QuadratureRule};
pub use sparse::CsrMatrix;

use crate::error::Result;
use crate::geometry::{mesh_for, DomainSpec, Mesh};

/// Default quadrature exactness for degree `k`.
pub fn default_quadrature_degree(k: usize) -> usize {
    13.max(2 * k + 1)
}

/// Discretization parameters shared by the drivers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FemParams {
    pub level: usize,
    pub degree: usize,
    /// `None` selects [`default_quadrature_degree`].
    pub quad_degree: Option<usize>,
    pub family: NodeFamily,
}

impl FemParams {
    pub fn new(level: usize, degree: usize) -> Self {
        FemParams { level, degree, quad_degree: None, family: NodeFamily::GaussLobatto }
    }
}

/// Mesh, reference basis and reduced system for one configuration.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub spec: DomainSpec,
    pub mesh: Mesh,
    pub basis: ReferenceBasis,
    pub system: AssembledSystem,
}

pub fn discretize(spec: &DomainSpec, params: &FemParams) -> Result<Discretization> {
    let mesh = mesh_for(spec, params.level)?;
    discretize_mesh(spec, mesh, params)
}

pub fn discretize_mesh(spec: &DomainSpec, mesh: Mesh, params: &FemParams) -> Result<Discretization> {
    let basis = build_basis_with(params.degree, params.family)?;
    let quad = build_quadrature(params.quad_degree.unwrap_or(default_quadrature_degree(params.degree)))?;
    let system = assemble(&mesh, &basis, &quad, spec.theta, spec.formulation)?;
    Ok(Discretization { spec: *spec, mesh, basis, system })
}

impl Discretization {
    pub fn function(&self, reduced: &[f64]) -> FeFunction<'_> {
        FeFunction::from_reduced(&self.mesh, &self.basis, &self.system.dof_map, reduced)
    }
}
