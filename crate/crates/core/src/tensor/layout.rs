//! Classification of a monomial's indices into secondary and auxiliary
//! index sets.
//!
//! Every derivative occurrence contributes a secondary axis over reference
//! directions. A bound spatial index that appears both as a component and as
//! a derivative direction is a secondary axis over spatial directions; one
//! that appears only in components is summed inside the reference tensor, and
//! one that appears only in derivative directions is summed inside the
//! geometry tensor. Each coefficient contributes a secondary axis over its
//! local basis. Secondary axes are ordered: reference directions (by factor
//! and position), spatial indices, then coefficient axes.

use serde::{Deserialize, Serialize};

use crate::form::{BasisIndex, BoundKind, CanonicalForm, IndexValue, Monomial};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SecondaryAxis {
    /// Reference direction `X_a` of derivative `position` of factor `factor`.
    Reference { factor: usize, position: usize, range: usize },
    /// Spatial direction shared by a component and a derivative.
    Spatial { bound: usize, range: usize },
    /// Local basis index of coefficient `coefficient`.
    Coefficient { coefficient: usize, bound: usize, range: usize },
}

impl SecondaryAxis {
    pub fn range(&self) -> usize {
        match *self {
            SecondaryAxis::Reference { range, .. }
            | SecondaryAxis::Spatial { range, .. }
            | SecondaryAxis::Coefficient { range, .. } => range,
        }
    }

    pub fn is_coefficient(&self) -> bool {
        matches!(self, SecondaryAxis::Coefficient { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Secondary(usize),
    /// Summed in the reference tensor.
    AuxReference(usize),
    /// Summed in the geometry tensor.
    AuxGeometry(usize),
}

#[derive(Clone, Debug)]
pub struct TermLayout {
    pub primary_dims: Vec<usize>,
    pub secondary: Vec<SecondaryAxis>,
    pub roles: Vec<Role>,
    /// Ranges of indices summed in the reference tensor.
    pub aux_reference: Vec<usize>,
    /// Ranges of indices summed in the geometry tensor.
    pub aux_geometry: Vec<usize>,
    /// `deriv_axes[f][p]`: secondary axis of derivative `p` of factor `f`.
    pub deriv_axes: Vec<Vec<usize>>,
}

impl TermLayout {
    pub fn secondary_dims(&self) -> Vec<usize> {
        self.secondary.iter().map(|a| a.range()).collect()
    }

    pub fn secondary_size(&self) -> usize {
        self.secondary.iter().map(|a| a.range()).product()
    }

    pub fn primary_size(&self) -> usize {
        self.primary_dims.iter().product()
    }
}

pub fn classify(form: &CanonicalForm, m: &Monomial) -> Result<TermLayout> {
    let d = form.dim();
    let nb = m.indices.len();
    let mut in_component = vec![false; nb];
    let mut in_derivative = vec![false; nb];
    for f in &m.factors {
        if f.derivatives.len() > 1 {
            return Err(Error::UnsupportedDerivativeOrder(f.derivatives.len()));
        }
        if let Some(IndexValue::Bound(b)) = f.component {
            in_component[b] = true;
        }
        for v in &f.derivatives {
            if let IndexValue::Bound(b) = v {
                in_derivative[*b] = true;
            }
        }
    }
    let mut secondary = Vec::new();
    let mut deriv_axes = Vec::with_capacity(m.factors.len());
    for (fi, f) in m.factors.iter().enumerate() {
        let mut axes = Vec::new();
        for p in 0..f.derivatives.len() {
            axes.push(secondary.len());
            secondary.push(SecondaryAxis::Reference {
                factor: fi,
                position: p,
                range: d,
            });
        }
        deriv_axes.push(axes);
    }
    let mut roles = vec![Role::AuxReference(usize::MAX); nb];
    for b in 0..nb {
        if m.indices[b].kind == BoundKind::Spatial && in_component[b] && in_derivative[b] {
            roles[b] = Role::Secondary(secondary.len());
            secondary.push(SecondaryAxis::Spatial {
                bound: b,
                range: m.indices[b].range,
            });
        }
    }
    let mut aux_reference = Vec::new();
    let mut aux_geometry = Vec::new();
    for b in 0..nb {
        match m.indices[b].kind {
            BoundKind::CoefficientBasis(c) => {
                roles[b] = Role::Secondary(secondary.len());
                secondary.push(SecondaryAxis::Coefficient {
                    coefficient: c,
                    bound: b,
                    range: m.indices[b].range,
                });
            }
            BoundKind::Spatial if in_component[b] && in_derivative[b] => {}
            BoundKind::Spatial if in_derivative[b] => {
                roles[b] = Role::AuxGeometry(aux_geometry.len());
                aux_geometry.push(m.indices[b].range);
            }
            BoundKind::Spatial => {
                roles[b] = Role::AuxReference(aux_reference.len());
                aux_reference.push(m.indices[b].range);
            }
        }
    }
    for f in &m.factors {
        if let BasisIndex::Bound(b) = f.basis {
            debug_assert!(matches!(roles[b], Role::Secondary(_)));
        }
    }
    Ok(TermLayout {
        primary_dims: form.arguments.iter().map(|a| a.element.dimension()).collect(),
        secondary,
        roles,
        aux_reference,
        aux_geometry,
        deriv_axes,
    })
}

/// Advance a row-major multi-index; returns `false` after the last one.
pub(crate) fn next_multi(idx: &mut [usize], dims: &[usize]) -> bool {
    for k in (0..idx.len()).rev() {
        idx[k] += 1;
        if idx[k] < dims[k] {
            return true;
        }
        idx[k] = 0;
    }
    false
}

/// Row-major unflattening of `flat` over `dims`.
pub(crate) fn unflatten(mut flat: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = flat % dims[k];
        flat /= dims[k];
    }
}
