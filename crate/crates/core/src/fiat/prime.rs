//! Orthonormal prime bases on reference simplices.
//!
//! The full basis of `P_q` is the collapsed-coordinate Jacobi family evaluated
//! with three-term recurrences in the biunit coordinates `x = 2X - 1`. Basis
//! functions are ordered hierarchically by total degree and scaled so that
//! they are orthonormal on the unit reference simplex. A constrained subspace
//! is represented by an orthonormal row transform applied to the full basis.

use nalgebra::DMatrix;

use super::cell::{CellShape, ReferenceCell};
use super::jet::Jet;
use crate::{Error, Result};

/// Highest polynomial degree accepted for bases.
pub const MAX_DEGREE: usize = 8;

pub fn polynomial_dimension(dim: usize, degree: usize) -> usize {
    match dim {
        1 => degree + 1,
        2 => (degree + 1) * (degree + 2) / 2,
        3 => (degree + 1) * (degree + 2) * (degree + 3) / 6,
        _ => 0,
    }
}

#[derive(Clone, Debug)]
pub struct PrimeBasis {
    cell: ReferenceCell,
    degree: usize,
    /// Rows express each member in terms of the full orthonormal basis.
    transform: Option<DMatrix<f64>>,
}

pub fn build_prime_basis(cell: &ReferenceCell, degree: usize) -> Result<PrimeBasis> {
    // extra headroom above MAX_DEGREE for quadrature-degree helpers
    if degree > 2 * MAX_DEGREE {
        return Err(Error::DegreeUnsupported(format!(
            "prime basis degree {degree} exceeds {}",
            2 * MAX_DEGREE
        )));
    }
    Ok(PrimeBasis {
        cell: cell.clone(),
        degree,
        transform: None,
    })
}

impl PrimeBasis {
    pub(crate) fn with_transform(&self, transform: DMatrix<f64>) -> PrimeBasis {
        let composed = match &self.transform {
            Some(t) => transform * t,
            None => transform,
        };
        PrimeBasis {
            cell: self.cell.clone(),
            degree: self.degree,
            transform: Some(composed),
        }
    }

    pub fn cell(&self) -> &ReferenceCell {
        &self.cell
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Dimension of the full polynomial space `P_q`.
    pub fn full_dimension(&self) -> usize {
        polynomial_dimension(self.cell.dim(), self.degree)
    }

    pub fn dimension(&self) -> usize {
        match &self.transform {
            Some(t) => t.nrows(),
            None => self.full_dimension(),
        }
    }

    pub fn is_constrained(&self) -> bool {
        self.transform.is_some()
    }

    /// Values and reference gradients of every member at `point`.
    pub fn evaluate(&self, point: &[f64]) -> Vec<Jet> {
        let full = orthonormal_jets(self.cell.shape(), self.degree, point);
        match &self.transform {
            None => full,
            Some(t) => (0..t.nrows())
                .map(|i| {
                    full.iter()
                        .enumerate()
                        .fold(Jet::constant(0.0), |acc, (j, psi)| acc + psi.scale(t[(i, j)]))
                })
                .collect(),
        }
    }

    /// `n x npoints` matrix of values.
    pub fn tabulate_values(&self, points: &[Vec<f64>]) -> DMatrix<f64> {
        let n = self.dimension();
        let mut m = DMatrix::zeros(n, points.len());
        for (p, x) in points.iter().enumerate() {
            for (i, jet) in self.evaluate(x).iter().enumerate() {
                m[(i, p)] = jet.value;
            }
        }
        m
    }
}

fn jrc(a: f64, b: f64, n: f64) -> (f64, f64, f64) {
    let an = (2.0 * n + 1.0 + a + b) * (2.0 * n + 2.0 + a + b) / (2.0 * (n + 1.0) * (n + 1.0 + a + b));
    let bn = (a * a - b * b) * (2.0 * n + 1.0 + a + b)
        / (2.0 * (n + 1.0) * (2.0 * n + a + b) * (n + 1.0 + a + b));
    let cn = (n + a) * (n + b) * (2.0 * n + 2.0 + a + b) / ((n + 1.0) * (n + 1.0 + a + b) * (2.0 * n + a + b));
    (an, bn, cn)
}

fn tri_idx(p: usize, q: usize) -> usize {
    (p + q) * (p + q + 1) / 2 + q
}

fn tet_idx(p: usize, q: usize, r: usize) -> usize {
    let s = p + q + r;
    s * (s + 1) * (s + 2) / 6 + (q + r) * (q + r + 1) / 2 + r
}

/// Full orthonormal basis of degree `n` at `point` (unit-simplex coordinates).
pub(crate) fn orthonormal_jets(shape: CellShape, n: usize, point: &[f64]) -> Vec<Jet> {
    match shape {
        CellShape::Interval => interval_jets(n, point),
        CellShape::Triangle => triangle_jets(n, point),
        CellShape::Tetrahedron => tetrahedron_jets(n, point),
    }
}

fn interval_jets(n: usize, point: &[f64]) -> Vec<Jet> {
    let x = Jet::variable(point[0], 0, 2.0, -1.0);
    let mut out = vec![Jet::constant(1.0); n + 1];
    if n >= 1 {
        out[1] = x;
    }
    for p in 1..n {
        let pf = p as f64;
        out[p + 1] = (x * out[p]).scale((2.0 * pf + 1.0) / (pf + 1.0)) - out[p - 1].scale(pf / (pf + 1.0));
    }
    for (p, v) in out.iter_mut().enumerate() {
        *v = v.scale((2.0 * p as f64 + 1.0).sqrt());
    }
    out
}

fn triangle_jets(n: usize, point: &[f64]) -> Vec<Jet> {
    let x = Jet::variable(point[0], 0, 2.0, -1.0);
    let y = Jet::variable(point[1], 1, 2.0, -1.0);
    let mut r = vec![Jet::constant(0.0); polynomial_dimension(2, n)];
    r[0] = Jet::constant(1.0);
    if n > 0 {
        let f1 = (x.scale(2.0) + y + 1.0).scale(0.5);
        let f2 = (-y + 1.0).scale(0.5);
        let f3 = f2 * f2;
        r[tri_idx(1, 0)] = f1;
        for p in 1..n {
            let pf = p as f64;
            let a = (2.0 * pf + 1.0) / (pf + 1.0);
            let b = pf / (pf + 1.0);
            r[tri_idx(p + 1, 0)] = (f1 * r[tri_idx(p, 0)]).scale(a) - (f3 * r[tri_idx(p - 1, 0)]).scale(b);
        }
        for p in 0..n {
            let pf = p as f64;
            let c = (y.scale(3.0 + 2.0 * pf) + (1.0 + 2.0 * pf)).scale(0.5);
            r[tri_idx(p, 1)] = r[tri_idx(p, 0)] * c;
        }
        for p in 0..n.saturating_sub(1) {
            for q in 1..(n - p) {
                let (a1, a2, a3) = jrc(2.0 * p as f64 + 1.0, 0.0, q as f64);
                r[tri_idx(p, q + 1)] = (y.scale(a1) + a2) * r[tri_idx(p, q)] - r[tri_idx(p, q - 1)].scale(a3);
            }
        }
    }
    // the factor sqrt(2^d) moves orthonormality from the biunit to the unit simplex
    for p in 0..=n {
        for q in 0..=(n - p) {
            let s = ((p as f64 + 0.5) * ((p + q) as f64 + 1.0)).sqrt();
            let k = tri_idx(p, q);
            r[k] = r[k].scale(s * 2.0);
        }
    }
    r
}

fn tetrahedron_jets(n: usize, point: &[f64]) -> Vec<Jet> {
    let x = Jet::variable(point[0], 0, 2.0, -1.0);
    let y = Jet::variable(point[1], 1, 2.0, -1.0);
    let z = Jet::variable(point[2], 2, 2.0, -1.0);
    let mut r = vec![Jet::constant(0.0); polynomial_dimension(3, n)];
    r[0] = Jet::constant(1.0);
    if n > 0 {
        let factor1 = (x.scale(2.0) + y + z + 2.0).scale(0.5);
        let yz = (y + z).scale(0.5);
        let factor2 = yz * yz;
        let factor3 = (y.scale(2.0) + z + 1.0).scale(0.5);
        let factor4 = (-z + 1.0).scale(0.5);
        let factor5 = factor4 * factor4;

        r[tet_idx(1, 0, 0)] = factor1;
        for p in 1..n {
            let pf = p as f64;
            let a1 = (2.0 * pf + 1.0) / (pf + 1.0);
            let a2 = pf / (pf + 1.0);
            r[tet_idx(p + 1, 0, 0)] =
                (factor1 * r[tet_idx(p, 0, 0)]).scale(a1) - (factor2 * r[tet_idx(p - 1, 0, 0)]).scale(a2);
        }
        for p in 0..n {
            let pf = p as f64;
            let c = (y + 1.0).scale(pf) + (y.scale(3.0) + z + 2.0).scale(0.5);
            r[tet_idx(p, 1, 0)] = r[tet_idx(p, 0, 0)] * c;
        }
        for p in 0..n.saturating_sub(1) {
            for q in 1..(n - p) {
                let (aq, bq, cq) = jrc(2.0 * p as f64 + 1.0, 0.0, q as f64);
                let qm = factor3.scale(aq) + factor4.scale(bq);
                let qm1 = factor5.scale(cq);
                r[tet_idx(p, q + 1, 0)] = qm * r[tet_idx(p, q, 0)] - qm1 * r[tet_idx(p, q - 1, 0)];
            }
        }
        for p in 0..n {
            for q in 0..(n - p) {
                let s = (p + q) as f64;
                let c = z.scale(2.0 + s) + (1.0 + s);
                r[tet_idx(p, q, 1)] = r[tet_idx(p, q, 0)] * c;
            }
        }
        for p in 0..n.saturating_sub(1) {
            for q in 0..(n - p - 1) {
                for rr in 1..(n - p - q) {
                    let (ar, br, cr) = jrc(2.0 * (p + q) as f64 + 2.0, 0.0, rr as f64);
                    r[tet_idx(p, q, rr + 1)] =
                        (z.scale(ar) + br) * r[tet_idx(p, q, rr)] - r[tet_idx(p, q, rr - 1)].scale(cr);
                }
            }
        }
    }
    for p in 0..=n {
        for q in 0..=(n - p) {
            for rr in 0..=(n - p - q) {
                let s = ((p as f64 + 0.5) * ((p + q) as f64 + 1.0) * ((p + q + rr) as f64 + 1.5)).sqrt();
                let k = tet_idx(p, q, rr);
                r[k] = r[k].scale(s * 8f64.sqrt());
            }
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiat::quadrature::make_quadrature;

    fn gram_deviation(shape: CellShape, degree: usize) -> f64 {
        let cell = ReferenceCell::new(shape);
        let basis = build_prime_basis(&cell, degree).unwrap();
        let rule = make_quadrature(shape, 2 * degree).unwrap();
        let n = basis.dimension();
        let mut gram = DMatrix::<f64>::zeros(n, n);
        for (x, w) in rule.points.iter().zip(&rule.weights) {
            let psi = basis.evaluate(x);
            for i in 0..n {
                for j in 0..n {
                    gram[(i, j)] += w * psi[i].value * psi[j].value;
                }
            }
        }
        (gram - DMatrix::identity(n, n)).abs().max()
    }

    #[test]
    fn orthonormal_on_every_cell() {
        for shape in [CellShape::Interval, CellShape::Triangle, CellShape::Tetrahedron] {
            for q in 0..=MAX_DEGREE {
                let dev = gram_deviation(shape, q);
                assert!(dev < 1e-11, "{shape} q={q}: {dev:e}");
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let h = 1e-6;
        for shape in [CellShape::Interval, CellShape::Triangle, CellShape::Tetrahedron] {
            let cell = ReferenceCell::new(shape);
            let basis = build_prime_basis(&cell, 4).unwrap();
            let x: Vec<f64> = [0.21, 0.17, 0.33][..cell.dim()].to_vec();
            let base = basis.evaluate(&x);
            for l in 0..cell.dim() {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[l] += h;
                xm[l] -= h;
                let (fp, fm) = (basis.evaluate(&xp), basis.evaluate(&xm));
                for i in 0..basis.dimension() {
                    let fd = (fp[i].value - fm[i].value) / (2.0 * h);
                    assert!((fd - base[i].grad[l]).abs() < 1e-6 * (1.0 + fd.abs()), "{shape} {i} {l}");
                }
            }
        }
    }

    #[test]
    fn hierarchical_ordering() {
        let cell = ReferenceCell::new(CellShape::Triangle);
        let p3 = build_prime_basis(&cell, 3).unwrap();
        let p1 = build_prime_basis(&cell, 1).unwrap();
        let x = [0.3, 0.4];
        let a = p3.evaluate(&x);
        let b = p1.evaluate(&x);
        for i in 0..3 {
            assert!((a[i].value - b[i].value).abs() < 1e-14);
        }
    }

    #[test]
    fn dimension_counts() {
        assert_eq!(polynomial_dimension(2, 2), 6);
        assert_eq!(polynomial_dimension(3, 5), 56);
        assert_eq!(polynomial_dimension(1, 3), 4);
    }
}
