//! Dirichlet conditions by row replacement.

use super::dofmap::DofMap;
use super::mesh::SimplicialMesh;
use super::sparse::CsrMatrix;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct DirichletBc {
    pub dofs: Vec<usize>,
    pub values: Vec<f64>,
}

impl DirichletBc {
    /// Boundary dofs whose node satisfies `predicate`, with values
    /// `value(x, component)`.
    pub fn new<P, V>(dofmap: &DofMap, mesh: &SimplicialMesh, predicate: P, value: V) -> Result<Self>
    where
        P: Fn(&[f64]) -> bool,
        V: Fn(&[f64], usize) -> f64,
    {
        let coords = dofmap.dof_coordinates(mesh)?;
        let nc = dofmap.spec.value_size;
        let dofs: Vec<usize> = dofmap
            .boundary_dofs(mesh)
            .into_iter()
            .filter(|&g| predicate(&coords[g]))
            .collect();
        if dofs.is_empty() {
            log::warn!("Dirichlet predicate selects no boundary dofs");
        }
        let values = dofs.iter().map(|&g| value(&coords[g], g % nc)).collect();
        Ok(DirichletBc { dofs, values })
    }

    pub fn from_dofs(dofs: Vec<usize>, values: Vec<f64>) -> Self {
        if dofs.is_empty() {
            log::warn!("Dirichlet condition without dofs");
        }
        DirichletBc { dofs, values }
    }

    /// Replace constrained rows by identity rows and set `b` to the boundary
    /// values. With `symmetric`, constrained columns are eliminated too and
    /// their contribution moved to the right-hand side.
    pub fn apply(&self, a: &mut CsrMatrix, b: &mut [f64], symmetric: bool) -> Result<()> {
        if a.nrows != b.len() || a.nrows != a.ncols {
            return Err(Error::IncompatibleShapes(format!(
                "system {}x{} with right-hand side of length {}",
                a.nrows,
                a.ncols,
                b.len()
            )));
        }
        let mut fixed: Vec<Option<f64>> = vec![None; a.nrows];
        for (&d, &v) in self.dofs.iter().zip(&self.values) {
            fixed[d] = Some(v);
        }
        for i in 0..a.nrows {
            let (cols, vals) = a.row_mut(i);
            if let Some(v) = fixed[i] {
                for (&j, x) in cols.iter().zip(vals.iter_mut()) {
                    *x = if j == i { 1.0 } else { 0.0 };
                }
                b[i] = v;
            } else if symmetric {
                for (&j, x) in cols.iter().zip(vals.iter_mut()) {
                    if let Some(v) = fixed[j] {
                        b[i] -= *x * v;
                        *x = 0.0;
                    }
                }
            }
        }
        Ok(())
    }
}
