//! Collapsed-coordinate Gauss–Jacobi rules on reference simplices.

use nalgebra::{DMatrix, SymmetricEigen};

use super::cell::{CellShape, ReferenceCell};
use crate::{Error, Result};

/// Highest polynomial exactness a rule can be requested for.
pub const MAX_QUADRATURE_DEGREE: usize = 40;

#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub cell: CellShape,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn integrate<F: Fn(&[f64]) -> f64>(&self, f: F) -> f64 {
        self.points.iter().zip(&self.weights).map(|(x, w)| w * f(x)).sum()
    }
}

/// Gauss–Jacobi nodes and weights for the weight `(1 - x)^a` on `[-1, 1]`,
/// computed from the Jacobi matrix (Golub–Welsch) and polished by Newton steps.
pub fn gauss_jacobi(n: usize, a: f64) -> (Vec<f64>, Vec<f64>) {
    let b = 0.0;
    let mut jm = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        jm[(k, k)] = if k == 0 {
            (b - a) / (a + b + 2.0)
        } else {
            (b * b - a * a) / ((2.0 * kf + a + b) * (2.0 * kf + a + b + 2.0))
        };
        if k + 1 < n {
            let m = kf + 1.0;
            let s = 2.0 * m + a + b;
            let beta = (4.0 * m * (m + a) * (m + b) * (m + a + b) / (s * s * (s + 1.0) * (s - 1.0))).sqrt();
            jm[(k, k + 1)] = beta;
            jm[(k + 1, k)] = beta;
        }
    }
    let eig = SymmetricEigen::new(jm);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut nodes: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = jacobi_with_derivative(n, a, b, *x);
            if dp != 0.0 {
                *x -= p / dp;
            }
        }
    }
    // Christoffel weights; the Gamma-function prefactor is 1 when b = 0
    let weights = nodes
        .iter()
        .map(|&x| {
            let (_, dp) = jacobi_with_derivative(n, a, b, x);
            2f64.powf(a + b + 1.0) / ((1.0 - x * x) * dp * dp)
        })
        .collect();
    (nodes, weights)
}

/// Jacobi polynomial `P_n^{(a,b)}` and its derivative at `x`.
fn jacobi_with_derivative(n: usize, a: f64, b: f64, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p0 = 1.0;
    let mut p1 = 0.5 * (a - b + (a + b + 2.0) * x);
    for k in 2..=n {
        let kf = k as f64;
        let c = 2.0 * kf + a + b;
        let a1 = 2.0 * kf * (kf + a + b) * (c - 2.0);
        let a2 = (c - 1.0) * (a * a - b * b);
        let a3 = (c - 2.0) * (c - 1.0) * c;
        let a4 = 2.0 * (kf + a - 1.0) * (kf + b - 1.0) * c;
        let p2 = ((a2 + a3 * x) * p1 - a4 * p0) / a1;
        p0 = p1;
        p1 = p2;
    }
    // d/dx P_n^{(a,b)} = (n+a+b+1)/2 P_{n-1}^{(a+1,b+1)}
    let dp = 0.5 * (n as f64 + a + b + 1.0) * jacobi_with_derivative(n - 1, a + 1.0, b + 1.0, x).0;
    (p1, dp)
}

/// Quadrature rule on the reference cell exact for polynomials of total degree
/// `degree`.
pub fn make_quadrature(shape: CellShape, degree: usize) -> Result<QuadratureRule> {
    if degree > MAX_QUADRATURE_DEGREE {
        return Err(Error::DegreeUnsupported(format!(
            "quadrature exactness {degree} exceeds {MAX_QUADRATURE_DEGREE}"
        )));
    }
    let n = degree / 2 + 1;
    let (points, weights) = match shape {
        CellShape::Interval => {
            let (x, w) = gauss_jacobi(n, 0.0);
            let points = x.iter().map(|&xi| vec![0.5 * (1.0 + xi)]).collect();
            let weights = w.iter().map(|&wi| 0.5 * wi).collect();
            (points, weights)
        }
        CellShape::Triangle => {
            let (xa, wa) = gauss_jacobi(n, 0.0);
            let (xb, wb) = gauss_jacobi(n, 1.0);
            let mut points = Vec::with_capacity(n * n);
            let mut weights = Vec::with_capacity(n * n);
            for (i, &eta) in xb.iter().enumerate() {
                for (j, &xi) in xa.iter().enumerate() {
                    points.push(vec![0.25 * (1.0 + xi) * (1.0 - eta), 0.5 * (1.0 + eta)]);
                    weights.push(wa[j] * wb[i] / 8.0);
                }
            }
            (points, weights)
        }
        CellShape::Tetrahedron => {
            let (xa, wa) = gauss_jacobi(n, 0.0);
            let (xb, wb) = gauss_jacobi(n, 1.0);
            let (xc, wc) = gauss_jacobi(n, 2.0);
            let mut points = Vec::with_capacity(n * n * n);
            let mut weights = Vec::with_capacity(n * n * n);
            for (k, &zeta) in xc.iter().enumerate() {
                for (i, &eta) in xb.iter().enumerate() {
                    for (j, &xi) in xa.iter().enumerate() {
                        points.push(vec![
                            0.125 * (1.0 + xi) * (1.0 - eta) * (1.0 - zeta),
                            0.25 * (1.0 + eta) * (1.0 - zeta),
                            0.5 * (1.0 + zeta),
                        ]);
                        weights.push(wa[j] * wb[i] * wc[k] / 64.0);
                    }
                }
            }
            (points, weights)
        }
    };
    let rule = QuadratureRule {
        cell: shape,
        points,
        weights,
        degree,
    };
    verify_top_degree(&rule)?;
    Ok(rule)
}

/// Exact integral of `X^a` over the unit reference simplex.
pub fn monomial_integral(exponents: &[usize]) -> f64 {
    let d = exponents.len();
    let total: usize = exponents.iter().sum();
    let mut value = 1.0;
    for &a in exponents {
        for k in 1..=a {
            value *= k as f64;
        }
    }
    for k in 1..=(total + d) {
        value /= k as f64;
    }
    value
}

/// All exponent tuples of length `dim` with total degree exactly `degree`.
pub fn exponents_of_degree(dim: usize, degree: usize) -> Vec<Vec<usize>> {
    if dim == 1 {
        return vec![vec![degree]];
    }
    let mut out = Vec::new();
    for first in (0..=degree).rev() {
        for mut rest in exponents_of_degree(dim - 1, degree - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn verify_top_degree(rule: &QuadratureRule) -> Result<()> {
    let cell = ReferenceCell::new(rule.cell);
    let sum: f64 = rule.weights.iter().sum();
    if (sum - cell.volume()).abs() > 1e-12 {
        return Err(Error::DegreeUnsupported(format!("weights sum to {sum}")));
    }
    for e in exponents_of_degree(cell.dim(), rule.degree) {
        let q = rule.integrate(|x| x.iter().zip(&e).map(|(xi, &k)| xi.powi(k as i32)).product());
        let exact = monomial_integral(&e);
        if (q - exact).abs() > 1e-12 * exact.max(1.0) {
            return Err(Error::DegreeUnsupported(format!(
                "rule of degree {} fails on monomial {:?}",
                rule.degree, e
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_up_to_requested_degree() {
        for shape in [CellShape::Interval, CellShape::Triangle, CellShape::Tetrahedron] {
            for degree in [0, 1, 2, 3, 5, 8, 12] {
                let rule = make_quadrature(shape, degree).unwrap();
                for k in 0..=degree {
                    for e in exponents_of_degree(shape.dim(), k) {
                        let q = rule.integrate(|x| x.iter().zip(&e).map(|(xi, &p)| xi.powi(p as i32)).product());
                        let exact = monomial_integral(&e);
                        assert!((q - exact).abs() < 1e-13, "{shape} {degree} {e:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn points_lie_inside_cell() {
        let rule = make_quadrature(CellShape::Tetrahedron, 9).unwrap();
        assert_eq!(rule.len(), 125);
        for x in &rule.points {
            assert!(x.iter().all(|&c| c > 0.0) && x.iter().sum::<f64>() < 1.0);
        }
        assert!(rule.weights.iter().all(|&w| w > 0.0));
    }

    #[test]
    fn highest_degree_is_accepted_and_beyond_rejected() {
        assert!(make_quadrature(CellShape::Triangle, MAX_QUADRATURE_DEGREE).is_ok());
        assert!(make_quadrature(CellShape::Triangle, MAX_QUADRATURE_DEGREE + 1).is_err());
    }

    #[test]
    fn gauss_legendre_two_points() {
        let (x, w) = gauss_jacobi(2, 0.0);
        let r = 1.0 / 3f64.sqrt();
        assert!((x[0] + r).abs() < 1e-15 && (x[1] - r).abs() < 1e-15);
        assert!((w[0] - 1.0).abs() < 1e-14 && (w[1] - 1.0).abs() < 1e-14);
    }
}
