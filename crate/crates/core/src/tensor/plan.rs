//! Geometry plans: symbolic recipes for `G_K` per term.

use serde::{Deserialize, Serialize};

use super::geometry::CellGeometry;
use super::layout::{next_multi, Role, SecondaryAxis, TermLayout};
use crate::form::{IndexValue, Monomial};
use crate::{Error, Result};

/// Spatial index of an inverse-Jacobian entry `dX_a / dx_s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpatialIndex {
    Fixed(usize),
    Secondary(usize),
    Aux(usize),
}

/// One `dX_a / dx_s` factor; `a` is always a secondary reference axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JacobianFactor {
    pub reference_axis: usize,
    pub spatial: SpatialIndex,
}

/// `G^alpha = c |det F'| prod_coef w[alpha] sum_{beta'} prod dX/dx`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryTerm {
    pub constant: f64,
    pub secondary: Vec<SecondaryAxis>,
    pub jacobian_factors: Vec<JacobianFactor>,
    /// Ranges of the indices summed inside `G`.
    pub aux_ranges: Vec<usize>,
}

pub fn build_geometry_term(m: &Monomial, layout: &TermLayout) -> GeometryTerm {
    let mut jacobian_factors = Vec::new();
    for (fi, f) in m.factors.iter().enumerate() {
        for (p, v) in f.derivatives.iter().enumerate() {
            let spatial = match *v {
                IndexValue::Fixed(c) => SpatialIndex::Fixed(c),
                IndexValue::Bound(b) => match layout.roles[b] {
                    Role::Secondary(ax) => SpatialIndex::Secondary(ax),
                    Role::AuxGeometry(k) => SpatialIndex::Aux(k),
                    Role::AuxReference(_) => unreachable!("derivative index classified as reference-only"),
                },
            };
            jacobian_factors.push(JacobianFactor {
                reference_axis: layout.deriv_axes[fi][p],
                spatial,
            });
        }
    }
    GeometryTerm {
        constant: m.constant,
        secondary: layout.secondary.clone(),
        jacobian_factors,
        aux_ranges: layout.aux_geometry.clone(),
    }
}

impl GeometryTerm {
    pub fn secondary_dims(&self) -> Vec<usize> {
        self.secondary.iter().map(|a| a.range()).collect()
    }

    pub fn size(&self) -> usize {
        self.secondary.iter().map(|a| a.range()).product()
    }

    /// Evaluate into `out` (length [`size`](Self::size)) in row-major
    /// secondary order. `coefficients[c]` holds the local expansion
    /// coefficients of coefficient `c`.
    pub fn evaluate_into(&self, geom: &CellGeometry, coefficients: &[Vec<f64>], out: &mut [f64]) -> Result<()> {
        let dims = self.secondary_dims();
        let geo_axes: Vec<usize> = (0..dims.len()).filter(|&k| !self.secondary[k].is_coefficient()).collect();
        let geo_dims: Vec<usize> = geo_axes.iter().map(|&k| dims[k]).collect();
        for ax in &self.secondary {
            if let SecondaryAxis::Coefficient { coefficient, range, .. } = *ax {
                let w = coefficients
                    .get(coefficient)
                    .ok_or_else(|| Error::MissingCoefficient(format!("coefficient {coefficient}")))?;
                if w.len() != range {
                    return Err(Error::MissingCoefficient(format!(
                        "coefficient {coefficient} has {} values, expected {range}",
                        w.len()
                    )));
                }
            }
        }
        // Jacobian part over the non-coefficient axes
        let geo_size: usize = geo_dims.iter().product();
        let mut jac = vec![0.0; geo_size];
        let mut alpha = vec![0usize; dims.len()];
        let mut ga = vec![0usize; geo_dims.len()];
        let mut beta = vec![0usize; self.aux_ranges.len()];
        let scale = self.constant * geom.det.abs();
        for j in jac.iter_mut() {
            for (n, &k) in geo_axes.iter().enumerate() {
                alpha[k] = ga[n];
            }
            beta.iter_mut().for_each(|b| *b = 0);
            let mut sum = 0.0;
            loop {
                let mut prod = 1.0;
                for jf in &self.jacobian_factors {
                    let a = alpha[jf.reference_axis];
                    let s = match jf.spatial {
                        SpatialIndex::Fixed(c) => c,
                        SpatialIndex::Secondary(ax) => alpha[ax],
                        SpatialIndex::Aux(k) => beta[k],
                    };
                    prod *= geom.inverse[a][s];
                }
                sum += prod;
                if !next_multi(&mut beta, &self.aux_ranges) {
                    break;
                }
            }
            *j = scale * sum;
            next_multi(&mut ga, &geo_dims);
        }
        // outer product with coefficient values
        alpha.iter_mut().for_each(|a| *a = 0);
        for o in out.iter_mut() {
            let mut gi = 0;
            let mut w = 1.0;
            for (k, ax) in self.secondary.iter().enumerate() {
                match *ax {
                    SecondaryAxis::Coefficient { coefficient, .. } => w *= coefficients[coefficient][alpha[k]],
                    _ => gi = gi * dims[k] + alpha[k],
                }
            }
            *o = w * jac[gi];
            next_multi(&mut alpha, &dims);
        }
        Ok(())
    }

    pub fn evaluate(&self, geom: &CellGeometry, coefficients: &[Vec<f64>]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.size()];
        self.evaluate_into(geom, coefficients, &mut out)?;
        Ok(out)
    }

    /// Human-readable formula, e.g.
    /// `G[a0,a1] = det F' sum_b0 dX_a0/dx_b0 dX_a1/dx_b0`.
    pub fn formula(&self) -> String {
        let names: Vec<String> = (0..self.secondary.len()).map(|k| format!("a{k}")).collect();
        let mut s = String::new();
        if names.is_empty() {
            s.push_str("G = ");
        } else {
            s.push_str(&format!("G[{}] = ", names.join(",")));
        }
        if self.constant != 1.0 {
            s.push_str(&format!("{} * ", self.constant));
        }
        for (k, ax) in self.secondary.iter().enumerate() {
            if let SecondaryAxis::Coefficient { coefficient, .. } = ax {
                s.push_str(&format!("w{coefficient}[{}] * ", names[k]));
            }
        }
        s.push_str("det F'");
        if !self.aux_ranges.is_empty() {
            let b: Vec<String> = (0..self.aux_ranges.len()).map(|k| format!("b{k}")).collect();
            s.push_str(&format!(" * sum_{{{}}}", b.join(",")));
        }
        for jf in &self.jacobian_factors {
            let sp = match jf.spatial {
                SpatialIndex::Fixed(c) => c.to_string(),
                SpatialIndex::Secondary(ax) => names[ax].clone(),
                SpatialIndex::Aux(k) => format!("b{k}"),
            };
            s.push_str(&format!(" dX_{}/dx_{}", names[jf.reference_axis], sp));
        }
        s
    }
}
