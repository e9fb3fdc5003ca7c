//! Quadrature-based tensor representation: the reference tensor keeps a
//! quadrature-point axis and the geometry tensor is evaluated per point.

use serde::{Deserialize, Serialize};

use super::geometry::CellGeometry;
use super::layout::classify;
use super::plan::{build_geometry_term, GeometryTerm};
use super::reference::{integrand_degree, tabulate_term};
use crate::fiat::{make_quadrature, QuadratureRule};
use crate::form::CanonicalForm;
use crate::par::ExecPolicy;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureTerm {
    /// `[primary][secondary][point]`, weights included.
    pub values: Vec<f64>,
    pub secondary_size: usize,
    pub geometry: GeometryTerm,
}

#[derive(Clone, Debug)]
pub struct QuadratureKernel {
    pub rule: QuadratureRule,
    pub rows: usize,
    pub terms: Vec<QuadratureTerm>,
}

/// Quadrature exactness needed to integrate every monomial exactly on affine
/// cells.
pub fn exact_degree(form: &CanonicalForm) -> usize {
    form.monomials.iter().map(|m| integrand_degree(form, m)).max().unwrap_or(0)
}

pub fn build_quadrature_kernel(form: &CanonicalForm, degree: Option<usize>, policy: ExecPolicy) -> Result<QuadratureKernel> {
    let rule = make_quadrature(form.cell, degree.unwrap_or_else(|| exact_degree(form)))?;
    let rows = form.arguments.iter().map(|a| a.element.dimension()).product();
    let mut terms = Vec::with_capacity(form.monomials.len());
    for m in &form.monomials {
        let layout = classify(form, m)?;
        let values = tabulate_term(form, m, &layout, &rule, false, policy)?;
        terms.push(QuadratureTerm {
            values,
            secondary_size: layout.secondary_size(),
            geometry: build_geometry_term(m, &layout),
        });
    }
    Ok(QuadratureKernel { rule, rows, terms })
}

impl QuadratureKernel {
    pub fn num_points(&self) -> usize {
        self.rule.len()
    }

    /// Element tensor from per-point geometry (`point_geometry[q]` is the
    /// geometry seen at quadrature point `q`).
    pub fn element_tensor_per_point(
        &self,
        point_geometry: &[CellGeometry],
        coefficients: &[Vec<f64>],
    ) -> Result<Vec<f64>> {
        let nq = self.rule.len();
        if point_geometry.len() != nq {
            return Err(Error::IncompatibleShapes(format!(
                "{} point geometries for {nq} quadrature points",
                point_geometry.len()
            )));
        }
        if let Some(g) = point_geometry.iter().find(|g| g.dim != self.rule.cell.dim()) {
            return Err(Error::CellMismatch {
                element: self.rule.cell.to_string(),
                mesh: format!("{}-dimensional cell", g.dim),
            });
        }
        let mut out = vec![0.0; self.rows];
        for t in &self.terms {
            let s = t.secondary_size;
            // G[alpha][q]
            let mut g = vec![0.0; s * nq];
            let mut gq = vec![0.0; s];
            for (q, geom) in point_geometry.iter().enumerate() {
                t.geometry.evaluate_into(geom, coefficients, &mut gq)?;
                for a in 0..s {
                    g[a * nq + q] = gq[a];
                }
            }
            for (i, o) in out.iter_mut().enumerate() {
                let row = &t.values[i * s * nq..(i + 1) * s * nq];
                *o += row.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>();
            }
        }
        Ok(out)
    }

    /// Element tensor on an affine cell (constant geometry at every point).
    pub fn element_tensor(&self, geom: &CellGeometry, coefficients: &[Vec<f64>]) -> Result<Vec<f64>> {
        let per_point = vec![geom.clone(); self.rule.len()];
        self.element_tensor_per_point(&per_point, coefficients)
    }

    /// `|I_K| * sum_k |A_k| * N_q`.
    pub fn contraction_maps(&self) -> usize {
        self.rows * self.terms.iter().map(|t| t.secondary_size).sum::<usize>() * self.rule.len()
    }
}
