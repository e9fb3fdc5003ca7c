//! Simplicial meshes with globally numbered sub-entities.
//!
//! Every edge and face is identified by its sorted tuple of global vertex
//! ids, and entities of one dimension are numbered in lexicographic order of
//! those tuples. The alignment of a cell's local entity records how the
//! cell's local vertex order relates to the sorted global order: an edge has
//! alignment 0 when its local endpoints appear in increasing global order,
//! and a face has the code of the rank tuple of its local vertices, with
//! codes `0..6` assigned to `(0,1,2), (0,2,1), (2,0,1), (1,0,2), (1,2,0),
//! (2,1,0)`.

use std::collections::HashSet;

use log::warn;

use crate::fiat::{CellShape, ReferenceCell};
use crate::par::{self, ExecPolicy};
use crate::tensor::CellGeometry;
use crate::{Error, Result};

/// Rank tuples in the order of their face alignment code.
pub const FACE_RANK_CODES: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [2, 0, 1], [1, 0, 2], [1, 2, 0], [2, 1, 0]];

#[derive(Clone, Debug)]
pub struct SimplicialMesh {
    dim: usize,
    coordinates: Vec<Vec<f64>>,
    cells: Vec<Vec<usize>>,
    /// `entities[k]`: sorted vertex tuples of the entities of dimension `k`
    /// for `0 < k < dim`.
    entities: Vec<Vec<Vec<usize>>>,
    /// `cell_entities[k][c * n_local + e]`: global id of local entity `e`.
    cell_entities: Vec<Vec<usize>>,
    edge_alignment: Vec<u8>,
    face_alignment: Vec<u8>,
    reference: ReferenceCell,
}

impl SimplicialMesh {
    /// Build a mesh; cells with negative orientation get their last two
    /// vertices swapped.
    pub fn new(coordinates: Vec<Vec<f64>>, cells: Vec<Vec<usize>>) -> Result<Self> {
        Self::with_policy(coordinates, cells, ExecPolicy::default())
    }

    pub fn with_policy(coordinates: Vec<Vec<f64>>, mut cells: Vec<Vec<usize>>, policy: ExecPolicy) -> Result<Self> {
        let dim = coordinates.first().map_or(0, |x| x.len());
        if coordinates.iter().any(|x| x.len() != dim) {
            return Err(Error::InvalidMesh("vertices of mixed dimension".into()));
        }
        let shape = CellShape::from_dim(dim)?;
        let nv = coordinates.len();
        let mut seen = HashSet::with_capacity(cells.len());
        let mut used = vec![false; nv];
        for (c, cell) in cells.iter_mut().enumerate() {
            if cell.len() != dim + 1 {
                return Err(Error::InvalidMesh(format!("cell {c} has {} vertices, expected {}", cell.len(), dim + 1)));
            }
            if let Some(&v) = cell.iter().find(|&&v| v >= nv) {
                return Err(Error::InvalidMesh(format!("cell {c} references vertex {v} of {nv}")));
            }
            let mut key = cell.clone();
            key.sort_unstable();
            if key.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::ZeroVolumeCell(c));
            }
            if !seen.insert(key) {
                return Err(Error::InvalidMesh(format!("duplicate cell {c}")));
            }
            let verts: Vec<Vec<f64>> = cell.iter().map(|&v| coordinates[v].clone()).collect();
            let geom = CellGeometry::new(&verts).map_err(|_| Error::ZeroVolumeCell(c))?;
            if geom.det < 0.0 {
                cell.swap(dim - 1, dim);
            }
            for &v in cell.iter() {
                used[v] = true;
            }
        }
        let dangling = used.iter().filter(|u| !**u).count();
        if dangling > 0 {
            warn!("mesh has {dangling} vertices not used by any cell");
        }
        let reference = ReferenceCell::new(shape);
        let mut entities = vec![Vec::new(); dim + 1];
        let mut cell_entities = vec![Vec::new(); dim + 1];
        entities[0] = (0..nv).map(|v| vec![v]).collect();
        cell_entities[0] = cells.iter().flatten().copied().collect();
        for k in 1..dim {
            let (ents, ids) = number_entities(&cells, reference.entities(k), policy);
            entities[k] = ents;
            cell_entities[k] = ids;
        }
        cell_entities[dim] = (0..cells.len()).collect();
        let mut edge_alignment = Vec::new();
        let mut face_alignment = Vec::new();
        if dim >= 2 {
            for cell in &cells {
                for e in reference.entities(1) {
                    edge_alignment.push(u8::from(cell[e[0]] > cell[e[1]]));
                }
            }
        }
        if dim == 3 {
            for cell in &cells {
                for f in reference.entities(2) {
                    face_alignment.push(face_code([cell[f[0]], cell[f[1]], cell[f[2]]]));
                }
            }
        }
        Ok(SimplicialMesh {
            dim,
            coordinates,
            cells,
            entities,
            cell_entities,
            edge_alignment,
            face_alignment,
            reference,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> CellShape {
        self.reference.shape()
    }

    pub fn reference(&self) -> &ReferenceCell {
        &self.reference
    }

    pub fn coordinates(&self) -> &[Vec<f64>] {
        &self.coordinates
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn num_vertices(&self) -> usize {
        self.coordinates.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    /// Number of entities of topological dimension `k`.
    pub fn num_entities(&self, k: usize) -> usize {
        match k {
            0 => self.num_vertices(),
            k if k == self.dim => self.num_cells(),
            k => self.entities[k].len(),
        }
    }

    pub fn num_edges(&self) -> usize {
        if self.dim >= 1 {
            self.num_entities(1)
        } else {
            0
        }
    }

    pub fn num_faces(&self) -> usize {
        if self.dim >= 2 {
            self.num_entities(2)
        } else {
            0
        }
    }

    /// Sorted vertex tuple of entity `id` of dimension `k`.
    pub fn entity_vertices(&self, k: usize, id: usize) -> Vec<usize> {
        if k == self.dim {
            let mut v = self.cells[id].clone();
            v.sort_unstable();
            v
        } else {
            self.entities[k][id].clone()
        }
    }

    /// Global id of local entity `local` of dimension `k` in `cell`.
    pub fn entity_id(&self, k: usize, cell: usize, local: usize) -> usize {
        let n = self.reference.num_entities(k);
        self.cell_entities[k][cell * n + local]
    }

    pub fn vertex_id(&self, cell: usize, local: usize) -> usize {
        self.cells[cell][local]
    }

    pub fn edge_id(&self, cell: usize, local: usize) -> usize {
        self.entity_id(1, cell, local)
    }

    pub fn face_id(&self, cell: usize, local: usize) -> usize {
        self.entity_id(2, cell, local)
    }

    pub fn edge_alignment(&self, cell: usize, local: usize) -> usize {
        self.edge_alignment[cell * self.reference.num_entities(1) + local] as usize
    }

    pub fn face_alignment(&self, cell: usize, local: usize) -> usize {
        self.face_alignment[cell * self.reference.num_entities(2) + local] as usize
    }

    pub fn cell_geometry(&self, cell: usize) -> Result<CellGeometry> {
        let verts: Vec<Vec<f64>> = self.cells[cell].iter().map(|&v| self.coordinates[v].clone()).collect();
        CellGeometry::new(&verts)
    }

    pub fn volume(&self) -> f64 {
        (0..self.num_cells())
            .map(|c| self.cell_geometry(c).map_or(0.0, |g| g.volume()))
            .sum()
    }

    /// `(cell, local facet)` for every facet belonging to exactly one cell.
    pub fn boundary_facets(&self) -> Vec<(usize, usize)> {
        let d = self.dim;
        let nf = self.reference.num_entities(d - 1);
        let mut count = vec![0u32; self.num_entities(d - 1)];
        for c in 0..self.num_cells() {
            for f in 0..nf {
                count[self.entity_id(d - 1, c, f)] += 1;
            }
        }
        let mut out = Vec::new();
        for c in 0..self.num_cells() {
            for f in 0..nf {
                if count[self.entity_id(d - 1, c, f)] == 1 {
                    out.push((c, f));
                }
            }
        }
        out
    }
}

/// Alignment code of a face whose cell-local vertices have global ids `g`.
pub fn face_code(g: [usize; 3]) -> u8 {
    let mut rank = [0usize; 3];
    for k in 0..3 {
        rank[k] = g.iter().filter(|&&x| x < g[k]).count();
    }
    FACE_RANK_CODES
        .iter()
        .position(|r| *r == rank)
        .expect("ranks of three distinct ids form a permutation") as u8
}

fn number_entities(cells: &[Vec<usize>], local: &[Vec<usize>], policy: ExecPolicy) -> (Vec<Vec<usize>>, Vec<usize>) {
    let n_local = local.len();
    let mut keyed: Vec<(Vec<usize>, usize)> = Vec::with_capacity(cells.len() * n_local);
    for (c, cell) in cells.iter().enumerate() {
        for (e, lv) in local.iter().enumerate() {
            let mut t: Vec<usize> = lv.iter().map(|&v| cell[v]).collect();
            t.sort_unstable();
            keyed.push((t, c * n_local + e));
        }
    }
    par::sort_unstable_by_key(policy, &mut keyed, |(t, slot)| (t.clone(), *slot));
    let mut ids = vec![0usize; cells.len() * n_local];
    let mut entities: Vec<Vec<usize>> = Vec::new();
    for (t, slot) in keyed {
        if entities.last() != Some(&t) {
            entities.push(t);
        }
        ids[slot] = entities.len() - 1;
    }
    (entities, ids)
}

/// `[0,1]` split into `n` intervals.
pub fn unit_interval(n: usize) -> Result<SimplicialMesh> {
    let coords = (0..=n).map(|i| vec![i as f64 / n as f64]).collect();
    let cells = (0..n).map(|i| vec![i, i + 1]).collect();
    SimplicialMesh::new(coords, cells)
}

/// `[0,1]^2` split into `n x n` squares of two triangles each.
pub fn unit_square(n: usize) -> Result<SimplicialMesh> {
    let h = 1.0 / n as f64;
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut coords = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            coords.push(vec![i as f64 * h, j as f64 * h]);
        }
    }
    let mut cells = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (v0, v1, v2, v3) = (id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
            cells.push(vec![v0, v1, v3]);
            cells.push(vec![v0, v3, v2]);
        }
    }
    SimplicialMesh::new(coords, cells)
}

/// `[0,1]^3` split into `n^3` cubes of six tetrahedra each.
pub fn unit_cube(n: usize) -> Result<SimplicialMesh> {
    box_mesh([1.0, 1.0, 1.0], [n, n, n])
}

/// Box `[0,lx] x [0,ly] x [0,lz]` with `nx x ny x nz` cubes of six
/// tetrahedra sharing the main diagonal.
pub fn box_mesh(lengths: [f64; 3], n: [usize; 3]) -> Result<SimplicialMesh> {
    let [nx, ny, nz] = n;
    let id = |i: usize, j: usize, k: usize| (k * (ny + 1) + j) * (nx + 1) + i;
    let mut coords = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                coords.push(vec![
                    lengths[0] * i as f64 / nx as f64,
                    lengths[1] * j as f64 / ny as f64,
                    lengths[2] * k as f64 / nz as f64,
                ]);
            }
        }
    }
    let mut cells = Vec::with_capacity(6 * nx * ny * nz);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let v = |a: usize, b: usize, c: usize| id(i + a, j + b, k + c);
                let (v0, v7) = (v(0, 0, 0), v(1, 1, 1));
                // paths from v0 to v7 along the three axes in every order
                let steps = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
                for s in steps {
                    let mut p = [0usize; 3];
                    let mut tet = vec![v0];
                    for &ax in &s[..2] {
                        p[ax] = 1;
                        tet.push(v(p[0], p[1], p[2]));
                    }
                    tet.push(v7);
                    cells.push(tet);
                }
            }
        }
    }
    SimplicialMesh::new(coords, cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn face_codes_cover_all_permutations() {
        let mut codes: Vec<u8> = [[1, 2, 3], [1, 3, 2], [3, 1, 2], [2, 1, 3], [2, 3, 1], [3, 2, 1]]
            .iter()
            .map(|g| face_code(*g))
            .collect();
        assert_eq!(codes, vec![0, 1, 2, 3, 4, 5]);
        codes.sort_unstable();
        codes.dedup();
        assert_eq!(codes.len(), 6);
    }

    #[test]
    fn unit_square_counts() {
        let m = unit_square(1).unwrap();
        assert_eq!((m.num_vertices(), m.num_edges(), m.num_cells()), (4, 5, 2));
        assert_eq!(m.boundary_facets().len(), 4);
        let m = unit_square(3).unwrap();
        assert!((m.volume() - 1.0).abs() < 1e-14);
        assert_eq!(m.num_edges(), 33);
    }

    #[test]
    fn unit_cube_is_positively_oriented_and_fills_the_cube() {
        let m = unit_cube(2).unwrap();
        assert_eq!(m.num_cells(), 48);
        assert!((m.volume() - 1.0).abs() < 1e-14);
        for c in 0..m.num_cells() {
            assert!(m.cell_geometry(c).unwrap().det > 0.0);
        }
        // Euler characteristic of a ball: V - E + F - C = 1
        let chi = m.num_vertices() as i64 - m.num_edges() as i64 + m.num_faces() as i64 - m.num_cells() as i64;
        assert_eq!(chi, 1);
    }

    #[test]
    fn invalid_meshes() {
        let tri = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        assert!(matches!(SimplicialMesh::new(tri.clone(), vec![vec![0, 1, 3]]), Err(Error::InvalidMesh(_))));
        assert!(matches!(
            SimplicialMesh::new(tri.clone(), vec![vec![0, 1, 2], vec![2, 1, 0]]),
            Err(Error::InvalidMesh(_))
        ));
        let flat = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]];
        assert!(matches!(SimplicialMesh::new(flat, vec![vec![0, 1, 2]]), Err(Error::ZeroVolumeCell(0))));
    }

    #[test]
    fn negatively_oriented_cell_is_flipped() {
        let tri = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let m = SimplicialMesh::new(tri, vec![vec![0, 2, 1]]).unwrap();
        assert!(m.cell_geometry(0).unwrap().det > 0.0);
    }
}
