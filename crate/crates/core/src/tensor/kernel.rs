//! Compiled forms and the flattened matrix-vector kernel.

use serde::{Deserialize, Serialize};

use super::geometry::CellGeometry;
use super::layout::classify;
use super::plan::{build_geometry_term, GeometryTerm};
use super::reference::{integrand_degree, tabulate_term, ReferenceTerm};
use crate::fiat::make_quadrature;
use crate::form::CanonicalForm;
use crate::par::ExecPolicy;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompiledTerm {
    pub reference: ReferenceTerm,
    pub geometry: GeometryTerm,
}

/// `Ā⁰` with one row per primary multi-index and the secondary entries of
/// all terms concatenated column-wise, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlattenedKernel {
    pub rows: usize,
    pub cols: usize,
    pub matrix: Vec<f64>,
    /// Column offset of each term.
    pub term_offsets: Vec<usize>,
}

impl FlattenedKernel {
    pub fn from_terms(terms: &[CompiledTerm]) -> Self {
        let rows = terms.first().map_or(1, |t| t.reference.primary_size());
        let mut term_offsets = Vec::with_capacity(terms.len());
        let mut cols = 0;
        for t in terms {
            term_offsets.push(cols);
            cols += t.reference.secondary_size();
        }
        let mut matrix = vec![0.0; rows * cols];
        for (t, &off) in terms.iter().zip(&term_offsets) {
            let s = t.reference.secondary_size();
            for i in 0..rows {
                matrix[i * cols + off..i * cols + off + s].copy_from_slice(&t.reference.values[i * s..(i + 1) * s]);
            }
        }
        FlattenedKernel {
            rows,
            cols,
            matrix,
            term_offsets,
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.matrix[i * self.cols..(i + 1) * self.cols]
    }

    /// `a = Ā⁰ g`.
    pub fn matvec(&self, g: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        self.matvec_into(g, &mut out);
        out
    }

    pub fn matvec_into(&self, g: &[f64], out: &mut [f64]) {
        debug_assert_eq!(g.len(), self.cols);
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(self.row(i), g);
        }
    }

    /// `A = Ā⁰ G` for a block of cells; `gs` holds one geometry vector per
    /// cell and the result one element tensor per cell. Each entry is
    /// accumulated in the same order as [`matvec`](Self::matvec), so the two
    /// agree bit for bit.
    pub fn matmat(&self, gs: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.rows]; gs.len()];
        for i in 0..self.rows {
            let row = self.row(i);
            for (c, g) in gs.iter().enumerate() {
                out[c][i] = dot(row, g);
            }
        }
        out
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + x * y)
}

/// How the contraction `A0 : G_K` is carried out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EvaluationMode {
    /// Nested loops over terms and secondary indices.
    Direct,
    /// Flattened matrix-vector product.
    MatVec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompiledForm {
    pub form: CanonicalForm,
    pub signature: String,
    pub terms: Vec<CompiledTerm>,
    pub kernel: FlattenedKernel,
}

pub fn compile(form: &CanonicalForm) -> Result<CompiledForm> {
    compile_with(form, ExecPolicy::default())
}

/// Compile a canonical form to its reference tensors and geometry plans.
pub fn compile_with(form: &CanonicalForm, policy: ExecPolicy) -> Result<CompiledForm> {
    let mut terms = Vec::with_capacity(form.monomials.len());
    for m in &form.monomials {
        let layout = classify(form, m)?;
        let degree = integrand_degree(form, m);
        let rule = make_quadrature(form.cell, degree)?;
        let values = tabulate_term(form, m, &layout, &rule, true, policy)?;
        let mut reference = ReferenceTerm {
            primary_dims: layout.primary_dims.clone(),
            secondary: layout.secondary.clone(),
            values,
            rational: None,
            quadrature_degree: degree,
        };
        reference.snap();
        let geometry = build_geometry_term(m, &layout);
        terms.push(CompiledTerm { reference, geometry });
    }
    let kernel = FlattenedKernel::from_terms(&terms);
    Ok(CompiledForm {
        form: form.clone(),
        signature: form.signature(),
        terms,
        kernel,
    })
}

impl CompiledForm {
    pub fn arity(&self) -> usize {
        self.form.arity()
    }

    pub fn primary_dims(&self) -> Vec<usize> {
        self.form.arguments.iter().map(|a| a.element.dimension()).collect()
    }

    /// `|I_K|`.
    pub fn num_entries(&self) -> usize {
        self.kernel.rows
    }

    /// `sum_k |A_k|`, the length of the flattened geometry vector.
    pub fn geometry_size(&self) -> usize {
        self.kernel.cols
    }

    /// Concatenated geometry vector `g_K`.
    pub fn geometry_vector(&self, geom: &CellGeometry, coefficients: &[Vec<f64>]) -> Result<Vec<f64>> {
        let mut g = vec![0.0; self.kernel.cols];
        self.geometry_vector_into(geom, coefficients, &mut g)?;
        Ok(g)
    }

    pub fn geometry_vector_into(&self, geom: &CellGeometry, coefficients: &[Vec<f64>], g: &mut [f64]) -> Result<()> {
        if geom.dim != self.form.dim() {
            return Err(Error::CellMismatch {
                element: self.form.cell.to_string(),
                mesh: format!("{}-dimensional cell", geom.dim),
            });
        }
        for (t, &off) in self.terms.iter().zip(&self.kernel.term_offsets) {
            let s = t.geometry.size();
            t.geometry.evaluate_into(geom, coefficients, &mut g[off..off + s])?;
        }
        Ok(())
    }

    /// Element tensor, flattened row-major over the primary indices.
    pub fn element_tensor(
        &self,
        geom: &CellGeometry,
        coefficients: &[Vec<f64>],
        mode: EvaluationMode,
    ) -> Result<Vec<f64>> {
        let g = self.geometry_vector(geom, coefficients)?;
        Ok(match mode {
            EvaluationMode::MatVec => self.kernel.matvec(&g),
            EvaluationMode::Direct => self.contract_direct(&g),
        })
    }

    /// `A_i = sum_k sum_alpha A0_{k,i alpha} G_{k,alpha}` by explicit loops.
    pub fn contract_direct(&self, g: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.kernel.rows];
        for (t, &off) in self.terms.iter().zip(&self.kernel.term_offsets) {
            let s = t.reference.secondary_size();
            for (i, o) in out.iter_mut().enumerate() {
                for a in 0..s {
                    *o += t.reference.values[i * s + a] * g[off + a];
                }
            }
        }
        out
    }
}
