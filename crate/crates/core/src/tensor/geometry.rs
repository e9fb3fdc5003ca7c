//! Affine cell geometry.

use crate::{Error, Result};

/// Affine map `x = F'X + b` of a simplex with vertices `v_0..v_d`, where the
/// columns of `F'` are `v_k - v_0`.
#[derive(Clone, Debug, PartialEq)]
pub struct CellGeometry {
    pub dim: usize,
    pub vertices: Vec<Vec<f64>>,
    /// `jacobian[r][c] = dx_r / dX_c`.
    pub jacobian: [[f64; 3]; 3],
    /// `inverse[a][s] = dX_a / dx_s`.
    pub inverse: [[f64; 3]; 3],
    pub det: f64,
}

impl CellGeometry {
    pub fn new(vertices: &[Vec<f64>]) -> Result<Self> {
        let d = vertices.len().saturating_sub(1);
        if !(1..=3).contains(&d) || vertices.iter().any(|v| v.len() != d) {
            return Err(Error::UnsupportedCell(format!(
                "{} vertices of dimension {}",
                vertices.len(),
                vertices.first().map_or(0, |v| v.len())
            )));
        }
        let mut j = [[0.0; 3]; 3];
        let mut scale: f64 = 0.0;
        for c in 0..d {
            for r in 0..d {
                j[r][c] = vertices[c + 1][r] - vertices[0][r];
                scale = scale.max(j[r][c].abs());
            }
        }
        let det = match d {
            1 => j[0][0],
            2 => j[0][0] * j[1][1] - j[0][1] * j[1][0],
            _ => {
                j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1]) - j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0])
                    + j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0])
            }
        };
        if det.abs() <= 1e-14 * scale.powi(d as i32) || !det.is_finite() || scale == 0.0 {
            return Err(Error::DegenerateCell(det));
        }
        let mut k = [[0.0; 3]; 3];
        match d {
            1 => k[0][0] = 1.0 / det,
            2 => {
                k[0][0] = j[1][1] / det;
                k[0][1] = -j[0][1] / det;
                k[1][0] = -j[1][0] / det;
                k[1][1] = j[0][0] / det;
            }
            _ => {
                for r in 0..3 {
                    for c in 0..3 {
                        // cofactor of j[c][r]
                        let (r1, r2) = ((c + 1) % 3, (c + 2) % 3);
                        let (c1, c2) = ((r + 1) % 3, (r + 2) % 3);
                        k[r][c] = (j[r1][c1] * j[r2][c2] - j[r1][c2] * j[r2][c1]) / det;
                    }
                }
            }
        }
        Ok(CellGeometry {
            dim: d,
            vertices: vertices.to_vec(),
            jacobian: j,
            inverse: k,
            det,
        })
    }

    /// Reference cell mapped by the identity.
    pub fn reference(dim: usize) -> Self {
        let mut vertices = vec![vec![0.0; dim]];
        for k in 0..dim {
            let mut v = vec![0.0; dim];
            v[k] = 1.0;
            vertices.push(v);
        }
        Self::new(&vertices).expect("reference simplex is valid")
    }

    pub fn map(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|r| self.vertices[0][r] + (0..self.dim).map(|c| self.jacobian[r][c] * x[c]).sum::<f64>())
            .collect()
    }

    /// `|det F'| / d!`.
    pub fn volume(&self) -> f64 {
        self.det.abs() / (1..=self.dim).product::<usize>() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_a_skewed_tetrahedron() {
        let g = CellGeometry::new(&[
            vec![0.1, 0.2, -0.3],
            vec![1.3, 0.1, 0.2],
            vec![0.4, 1.1, 0.0],
            vec![-0.2, 0.3, 0.9],
        ])
        .unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let p: f64 = (0..3).map(|s| g.inverse[a][s] * g.jacobian[s][b]).sum();
                assert!((p - if a == b { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn degenerate_cells_are_rejected() {
        let r = CellGeometry::new(&[vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]]);
        assert!(matches!(r, Err(Error::DegenerateCell(_))));
    }

    #[test]
    fn map_and_volume() {
        let g = CellGeometry::new(&[vec![1.0, 1.0], vec![3.0, 1.0], vec![1.0, 2.0]]).unwrap();
        assert_eq!(g.map(&[0.5, 0.5]), vec![2.0, 1.5]);
        assert!((g.volume() - 1.0).abs() < 1e-15);
        assert_eq!(CellGeometry::reference(3).det, 1.0);
    }
}
