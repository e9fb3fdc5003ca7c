use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellShape {
    Interval,
    Triangle,
    Tetrahedron,
}

impl CellShape {
    pub fn dim(self) -> usize {
        match self {
            CellShape::Interval => 1,
            CellShape::Triangle => 2,
            CellShape::Tetrahedron => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CellShape::Interval => "interval",
            CellShape::Triangle => "triangle",
            CellShape::Tetrahedron => "tetrahedron",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "interval" => Ok(CellShape::Interval),
            "triangle" => Ok(CellShape::Triangle),
            "tetrahedron" => Ok(CellShape::Tetrahedron),
            other => Err(Error::UnsupportedCell(other.to_string())),
        }
    }

    pub fn from_dim(dim: usize) -> Result<Self> {
        match dim {
            1 => Ok(CellShape::Interval),
            2 => Ok(CellShape::Triangle),
            3 => Ok(CellShape::Tetrahedron),
            d => Err(Error::UnsupportedCell(format!("simplex of dimension {d}"))),
        }
    }
}

impl std::fmt::Display for CellShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Reference simplex with its sub-entity incidence.
///
/// Local entity numbering: entity `k` of dimension `d - 1` is the one opposite
/// vertex `k`, and tetrahedron edges run in reverse lexicographic order
/// `(2,3), (1,3), (1,2), (0,3), (0,2), (0,1)`. Every entity is stored as a
/// sorted tuple of local vertex numbers.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceCell {
    shape: CellShape,
    vertices: Vec<Vec<f64>>,
    topology: Vec<Vec<Vec<usize>>>,
}

impl ReferenceCell {
    pub fn new(shape: CellShape) -> Self {
        let (vertices, topology): (Vec<Vec<f64>>, Vec<Vec<Vec<usize>>>) = match shape {
            CellShape::Interval => (
                vec![vec![0.0], vec![1.0]],
                vec![vec![vec![0], vec![1]], vec![vec![0, 1]]],
            ),
            CellShape::Triangle => (
                vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
                vec![
                    vec![vec![0], vec![1], vec![2]],
                    vec![vec![1, 2], vec![0, 2], vec![0, 1]],
                    vec![vec![0, 1, 2]],
                ],
            ),
            CellShape::Tetrahedron => (
                vec![
                    vec![0.0, 0.0, 0.0],
                    vec![1.0, 0.0, 0.0],
                    vec![0.0, 1.0, 0.0],
                    vec![0.0, 0.0, 1.0],
                ],
                vec![
                    vec![vec![0], vec![1], vec![2], vec![3]],
                    vec![
                        vec![2, 3],
                        vec![1, 3],
                        vec![1, 2],
                        vec![0, 3],
                        vec![0, 2],
                        vec![0, 1],
                    ],
                    vec![vec![1, 2, 3], vec![0, 2, 3], vec![0, 1, 3], vec![0, 1, 2]],
                    vec![vec![0, 1, 2, 3]],
                ],
            ),
        };
        ReferenceCell {
            shape,
            vertices,
            topology,
        }
    }

    pub fn shape(&self) -> CellShape {
        self.shape
    }

    pub fn dim(&self) -> usize {
        self.shape.dim()
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    /// Entities of topological dimension `dim`, each a sorted vertex tuple.
    pub fn entities(&self, dim: usize) -> &[Vec<usize>] {
        &self.topology[dim]
    }

    pub fn num_entities(&self, dim: usize) -> usize {
        self.topology[dim].len()
    }

    /// Reference measure `1/d!`.
    pub fn volume(&self) -> f64 {
        1.0 / (1..=self.dim()).product::<usize>() as f64
    }
}
