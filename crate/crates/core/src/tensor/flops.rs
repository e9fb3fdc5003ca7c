//! Multiply-add pair (MAP) count models.

use serde::{Deserialize, Serialize};

use super::kernel::CompiledForm;
use crate::form::{BoundKind, CanonicalForm, FunctionSlot};

/// Direct contraction `|I_K| * sum_k |A_k|`; the flattened product costs the
/// same.
pub fn direct_maps(compiled: &CompiledForm) -> usize {
    compiled.kernel.rows * compiled.kernel.cols
}

/// Cost of evaluating the geometry tensor: each entry sums
/// `prod aux` products of its inverse-Jacobian factors.
pub fn geometry_maps(compiled: &CompiledForm) -> usize {
    compiled
        .terms
        .iter()
        .map(|t| {
            let g = &t.geometry;
            let aux: usize = g.aux_ranges.iter().product();
            g.size() * aux * g.jacobian_factors.len().saturating_sub(1).max(1)
        })
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureModel {
    pub points: usize,
    /// `N_q |I_K| sum_mono (prod spatial ranges) (m - 1)`; `N_q n0^2 d` for
    /// Poisson.
    pub leading: usize,
    /// Leading term plus mapping reference gradients (`N_q n d^2` per
    /// differentiated element), evaluating coefficients at the points
    /// (`N_q n` per coefficient) and weighting/accumulating (`2 N_q |I_K|`).
    pub full: usize,
}

/// Cost of evaluating the element tensor by quadrature directly on the cell
/// with `points` quadrature points.
pub fn quadrature_model(form: &CanonicalForm, points: usize) -> QuadratureModel {
    let d = form.dim();
    let entries: usize = form.arguments.iter().map(|a| a.element.dimension()).product();
    let per_entry: usize = form
        .monomials
        .iter()
        .map(|m| {
            let spatial: usize = m
                .indices
                .iter()
                .filter(|b| b.kind == BoundKind::Spatial)
                .map(|b| b.range)
                .product();
            spatial * m.factors.len().saturating_sub(1).max(1)
        })
        .sum();
    let leading = points * entries * per_entry;
    let mut differentiated = Vec::new();
    let mut coefficients = Vec::new();
    for m in &form.monomials {
        for f in &m.factors {
            let e = form.element_of(f.function);
            if !f.derivatives.is_empty() && !differentiated.contains(&e) {
                differentiated.push(e);
            }
            if let FunctionSlot::Coefficient(c) = f.function {
                if !coefficients.contains(&c) {
                    coefficients.push(c);
                }
            }
        }
    }
    let transform: usize = differentiated.iter().map(|e| e.dimension() * d * d).sum();
    let coef: usize = coefficients.iter().map(|&c| form.coefficients[c].element.dimension()).sum();
    QuadratureModel {
        points,
        leading,
        full: leading + points * (transform + coef + 2 * entries),
    }
}
