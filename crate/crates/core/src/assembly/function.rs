//! Finite element functions: a dof map plus a global coefficient vector.

use std::sync::Arc;

use super::dofmap::DofMap;
use super::mesh::SimplicialMesh;
use crate::fiat::{element, make_quadrature};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct CoefficientFunction {
    pub dofmap: Arc<DofMap>,
    pub values: Vec<f64>,
}

impl CoefficientFunction {
    pub fn new(dofmap: Arc<DofMap>, values: Vec<f64>) -> Result<Self> {
        if values.len() != dofmap.num_dofs {
            return Err(Error::IncompatibleShapes(format!(
                "{} values for a space with {} dofs",
                values.len(),
                dofmap.num_dofs
            )));
        }
        Ok(CoefficientFunction { dofmap, values })
    }

    pub fn zeros(dofmap: Arc<DofMap>) -> Self {
        let values = vec![0.0; dofmap.num_dofs];
        CoefficientFunction { dofmap, values }
    }

    /// Nodal interpolant of `f(x, component)`.
    pub fn interpolate<F>(dofmap: Arc<DofMap>, mesh: &SimplicialMesh, f: F) -> Result<Self>
    where
        F: Fn(&[f64], usize) -> f64,
    {
        let coords = dofmap.dof_coordinates(mesh)?;
        let comps = dofmap.dof_components();
        let values = coords.iter().zip(&comps).map(|(x, &c)| f(x, c)).collect();
        Ok(CoefficientFunction { dofmap, values })
    }

    /// Local coefficient vector on `cell`.
    pub fn restrict(&self, cell: usize) -> Vec<f64> {
        self.dofmap.cell_dofs(cell).iter().map(|&g| self.values[g]).collect()
    }

    /// `||u_h - u||_{L2}` by quadrature of exactness `degree` on every cell.
    pub fn l2_error<F>(&self, mesh: &SimplicialMesh, exact: F, degree: usize) -> Result<f64>
    where
        F: Fn(&[f64], usize) -> f64,
    {
        let spec = self.dofmap.spec.element;
        let basis = element(spec)?;
        let rule = make_quadrature(spec.cell, degree)?;
        let tab = basis.tabulate(&rule.points, 0)?;
        let nc = tab.num_components;
        let mut total = 0.0;
        for c in 0..mesh.num_cells() {
            let geom = mesh.cell_geometry(c)?;
            let local = self.restrict(c);
            for (q, (x, &w)) in rule.points.iter().zip(&rule.weights).enumerate() {
                let xp = geom.map(x);
                for comp in 0..nc {
                    let uh: f64 = local.iter().enumerate().map(|(i, u)| u * tab.value(i, q, comp)).sum();
                    let e = uh - exact(&xp, comp);
                    total += w * geom.det.abs() * e * e;
                }
            }
        }
        Ok(total.sqrt())
    }
}
