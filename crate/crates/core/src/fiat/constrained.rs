//! Subspaces of the prime basis cut out by linear constraints.

use nalgebra::DMatrix;

use super::cell::CellShape;
use super::prime::PrimeBasis;
use super::quadrature::{gauss_jacobi, make_quadrature};
use crate::{Error, Result};

/// Linear functional imposed to vanish on the constrained space.
#[derive(Clone, Debug, PartialEq)]
pub enum Constraint {
    /// Integral over the reference cell.
    CellIntegral,
    /// Moment against the Legendre polynomial of `degree` along a local edge,
    /// parametrized from its first to its second vertex.
    EdgeLegendreMoment { edge: usize, degree: usize },
    /// Value at a reference point.
    PointValue(Vec<f64>),
}

/// Singular-value cutoff, relative to `max(sigma_max, 1)`, for the null space.
const NULL_TOL: f64 = 1e-10;

impl Constraint {
    /// Row of `L`: the functional applied to every member of `basis`.
    fn row(&self, basis: &PrimeBasis) -> Result<Vec<f64>> {
        let n = basis.dimension();
        let q = basis.degree();
        let mut row = vec![0.0; n];
        match self {
            Constraint::CellIntegral => {
                let rule = make_quadrature(basis.cell().shape(), q)?;
                for (x, w) in rule.points.iter().zip(&rule.weights) {
                    for (r, psi) in row.iter_mut().zip(basis.evaluate(x)) {
                        *r += w * psi.value;
                    }
                }
            }
            Constraint::EdgeLegendreMoment { edge, degree } => {
                let cell = basis.cell();
                if cell.shape() == CellShape::Interval {
                    return Err(Error::UnsupportedCell("edge moments need a triangle or tetrahedron".into()));
                }
                let verts = cell
                    .entities(1)
                    .get(*edge)
                    .ok_or_else(|| Error::UnsupportedCell(format!("no local edge {edge}")))?;
                let a = &cell.vertices()[verts[0]];
                let b = &cell.vertices()[verts[1]];
                let (ts, ws) = gauss_jacobi((q + degree) / 2 + 1, 0.0);
                for (t, w) in ts.iter().zip(&ws) {
                    let s = 0.5 * (1.0 + t);
                    let x: Vec<f64> = a.iter().zip(b).map(|(ai, bi)| ai + s * (bi - ai)).collect();
                    let p = legendre(*degree, *t);
                    for (r, psi) in row.iter_mut().zip(basis.evaluate(&x)) {
                        *r += 0.5 * w * p * psi.value;
                    }
                }
            }
            Constraint::PointValue(x) => {
                for (r, psi) in row.iter_mut().zip(basis.evaluate(x)) {
                    *r = psi.value;
                }
            }
        }
        Ok(row)
    }
}

fn legendre(n: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return 1.0;
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Orthonormal basis of the members of `basis` annihilated by every
/// constraint. The constraints must be linearly independent on `basis`.
pub fn constrain(basis: &PrimeBasis, constraints: &[Constraint]) -> Result<PrimeBasis> {
    let n = basis.dimension();
    let nc = constraints.len();
    if nc == 0 {
        return Ok(basis.clone());
    }
    if nc > n {
        return Err(Error::DependentConstraints { rank: n, expected: nc });
    }
    // pad to square so the SVD returns a full right singular basis
    let mut l = DMatrix::zeros(n, n);
    for (i, c) in constraints.iter().enumerate() {
        for (j, v) in c.row(basis)?.into_iter().enumerate() {
            l[(i, j)] = v;
        }
    }
    let svd = l.svd(false, true);
    let vt = svd.v_t.expect("requested right singular vectors");
    let smax = svd.singular_values.max();
    let keep: Vec<usize> = (0..n)
        .filter(|&k| svd.singular_values[k] <= NULL_TOL * smax.max(1.0))
        .collect();
    let rank = n - keep.len();
    if rank < nc {
        return Err(Error::DependentConstraints { rank, expected: nc });
    }
    let mut t = DMatrix::zeros(keep.len(), n);
    for (r, &k) in keep.iter().enumerate() {
        t.set_row(r, &vt.row(k));
    }
    Ok(basis.with_transform(t))
}
