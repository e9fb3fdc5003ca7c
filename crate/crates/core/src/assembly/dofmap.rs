//! Local-to-global mappings generated from an element's entity node lists.

use std::fmt::Write as _;

use super::mesh::{SimplicialMesh, FACE_RANK_CODES};
use crate::fiat::nodal::face_lattice_coordinates;
use crate::fiat::{element, ElementSpec};
use crate::{Error, Result};

/// Description of how an element's nodes are distributed over the mesh
/// entities, from which the local-to-global mapping is generated.
#[derive(Clone, Debug, PartialEq)]
pub struct DofMapSpec {
    pub element: ElementSpec,
    pub dim: usize,
    /// `entity_nodes[k][e]`: local scalar node numbers on local entity `e`
    /// of dimension `k`, in position order.
    pub entity_nodes: Vec<Vec<Vec<usize>>>,
    /// Scalar nodes per entity of each dimension.
    pub nodes_per_entity: Vec<usize>,
    /// Row `a` maps a local edge position to the global position for edge
    /// alignment `a`.
    pub edge_reordering: Vec<Vec<usize>>,
    /// Row `c` maps a local face position to the global position for face
    /// alignment code `c`.
    pub face_reordering: Vec<Vec<usize>>,
    pub value_size: usize,
}

impl DofMapSpec {
    pub fn new(spec: ElementSpec) -> Result<Self> {
        let basis = element(spec)?;
        let nodes = basis.scalar_nodes();
        let dim = spec.cell.dim();
        let nodes_per_entity = nodes.nodes_per_entity();
        let q = spec.degree;
        let k_edge = nodes_per_entity.get(1).copied().unwrap_or(0);
        let edge_reordering = if dim >= 2 {
            vec![(0..k_edge).collect(), (0..k_edge).rev().collect()]
        } else {
            Vec::new()
        };
        let face_reordering = if dim == 3 && spec.is_continuous() {
            face_tables(q)
        } else {
            Vec::new()
        };
        Ok(DofMapSpec {
            element: spec,
            dim,
            entity_nodes: nodes.entity_nodes.clone(),
            nodes_per_entity,
            edge_reordering,
            face_reordering,
            value_size: spec.value_size(),
        })
    }

    pub fn scalar_dimension(&self) -> usize {
        self.nodes_per_entity
            .iter()
            .zip(&self.entity_nodes)
            .map(|(n, ents)| n * ents.len())
            .sum()
    }

    /// Entity dimensions that carry shared nodes; discontinuous elements keep
    /// everything on the cell.
    fn shared(&self, k: usize) -> bool {
        self.element.is_continuous() && k < self.dim
    }

    /// Source text of the mapping in the style of generated code.
    pub fn generate_code(&self) -> String {
        let mut s = String::from("void nodemap(int nodes[], const Cell& cell, const Mesh& mesh)\n{\n");
        let tables = [("edge", &self.edge_reordering), ("face", &self.face_reordering)];
        for (name, table) in tables {
            if table.first().is_some_and(|r| r.len() > 1) {
                let rows: Vec<String> = table.iter().map(|r| brace(r)).collect();
                let _ = writeln!(
                    s,
                    "  static unsigned int {name}_reordering[{}][{}] = {{{}}};",
                    rows.len(),
                    table[0].len(),
                    rows.join(", ")
                );
            }
        }
        let names = ["vertex", "edge", "face"];
        let counts = ["numVertices", "numEdges", "numFaces"];
        let mut offset_declared = false;
        let mut alignment_declared = false;
        let mut previous: Option<usize> = None;
        for k in 0..=self.dim {
            let per = self.nodes_per_entity[k];
            if per == 0 || self.entity_nodes[k].iter().all(|e| e.is_empty()) {
                continue;
            }
            if let Some(p) = previous {
                let step = if self.nodes_per_entity[p] == 1 { String::new() } else { format!("{}*", self.nodes_per_entity[p]) };
                if offset_declared {
                    let _ = writeln!(s, "  offset = offset + {step}mesh.{}();", counts[p]);
                } else {
                    let _ = writeln!(s, "  int offset = {step}mesh.{}();", counts[p]);
                    offset_declared = true;
                }
            }
            previous = if self.shared(k) { Some(k) } else { None };
            for (e, nodes) in self.entity_nodes[k].iter().enumerate() {
                let reorder = self.shared(k) && k > 0 && per > 1;
                if reorder {
                    let decl = if alignment_declared { "" } else { "int " };
                    alignment_declared = true;
                    let _ = writeln!(s, "  {decl}alignment = cell.{}Alignment({e});", names[k]);
                }
                for (p, &local) in nodes.iter().enumerate() {
                    let rhs = if k == 0 && self.shared(k) {
                        format!("cell.vertexID({e})")
                    } else {
                        let id = if self.shared(k) { format!("cell.{}ID({e})", names[k]) } else { "cell.id()".into() };
                        let base = if per == 1 { id } else { format!("{per}*{id}") };
                        let head = if offset_declared { format!("offset + {base}") } else { base };
                        if reorder {
                            format!("{head} + {}_reordering[alignment][{p}]", names[k])
                        } else if per == 1 {
                            head
                        } else {
                            format!("{head} + {p}")
                        }
                    };
                    let _ = writeln!(s, "  nodes[{local}] = {rhs};");
                }
            }
        }
        s.push_str("}\n");
        s
    }
}

fn brace(v: &[usize]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("{{{}}}", parts.join(", "))
}

/// Face reordering rows for the six alignment codes: local position `p`
/// with barycentric weights `b` on the cell-local face vertices sits at the
/// global position whose weights are `b` permuted by the rank tuple.
fn face_tables(degree: usize) -> Vec<Vec<usize>> {
    let lattice: Vec<[usize; 3]> = face_lattice_coordinates(degree)
        .into_iter()
        .map(|(i, j)| [degree - i - j, i, j])
        .collect();
    FACE_RANK_CODES
        .iter()
        .map(|rank| {
            lattice
                .iter()
                .map(|b| {
                    let mut g = [0usize; 3];
                    for k in 0..3 {
                        g[rank[k]] = b[k];
                    }
                    lattice.iter().position(|x| *x == g).expect("lattice is closed under permutation")
                })
                .collect()
        })
        .collect()
}

/// Generated mapping of every cell's local dofs to global dofs. Vector
/// elements are blocked by node: global dof `node * value_size + component`.
#[derive(Clone, Debug)]
pub struct DofMap {
    pub spec: DofMapSpec,
    /// Local dimension `n0` (including components).
    pub local_dimension: usize,
    pub num_dofs: usize,
    cell_dofs: Vec<usize>,
}

impl DofMap {
    pub fn cell_dofs(&self, cell: usize) -> &[usize] {
        &self.cell_dofs[cell * self.local_dimension..(cell + 1) * self.local_dimension]
    }

    pub fn num_cells(&self) -> usize {
        self.cell_dofs.len() / self.local_dimension.max(1)
    }

    /// Physical coordinates of every global dof (components share a point).
    pub fn dof_coordinates(&self, mesh: &SimplicialMesh) -> Result<Vec<Vec<f64>>> {
        let basis = element(self.spec.element)?;
        let points = &basis.nodes().points;
        let mut out = vec![Vec::new(); self.num_dofs];
        for c in 0..mesh.num_cells() {
            let geom = mesh.cell_geometry(c)?;
            for (l, &g) in self.cell_dofs(c).iter().enumerate() {
                if out[g].is_empty() {
                    out[g] = geom.map(&points[l]);
                }
            }
        }
        Ok(out)
    }

    /// Component of every global dof.
    pub fn dof_components(&self) -> Vec<usize> {
        (0..self.num_dofs).map(|g| g % self.spec.value_size).collect()
    }

    /// Dofs whose nodes lie on boundary facets.
    pub fn boundary_dofs(&self, mesh: &SimplicialMesh) -> Vec<usize> {
        let d = mesh.dim();
        let reference = mesh.reference();
        let nc = self.spec.value_size;
        let mut mark = vec![false; self.num_dofs];
        for (c, f) in mesh.boundary_facets() {
            let facet = &reference.entities(d - 1)[f];
            let dofs = self.cell_dofs(c);
            for k in 0..d {
                for (e, verts) in reference.entities(k).iter().enumerate() {
                    if !verts.iter().all(|v| facet.contains(v)) {
                        continue;
                    }
                    for &node in &self.spec.entity_nodes[k][e] {
                        for comp in 0..nc {
                            mark[dofs[node * nc + comp]] = true;
                        }
                    }
                }
            }
        }
        (0..self.num_dofs).filter(|&g| mark[g]).collect()
    }
}

pub fn generate_dofmap(spec: ElementSpec, mesh: &SimplicialMesh) -> Result<DofMap> {
    if spec.cell != mesh.shape() {
        return Err(Error::CellMismatch {
            element: spec.cell.to_string(),
            mesh: mesh.shape().to_string(),
        });
    }
    let ds = DofMapSpec::new(spec)?;
    let d = ds.dim;
    let nc = ds.value_size;
    let n_scalar = ds.scalar_dimension();
    let local_dimension = n_scalar * nc;
    // offsets of each dimension's global block
    let mut offsets = vec![0usize; d + 1];
    let mut total = 0;
    for k in 0..=d {
        offsets[k] = total;
        let per = ds.nodes_per_entity[k];
        let count = if ds.shared(k) { mesh.num_entities(k) } else if k == d { mesh.num_cells() } else { 0 };
        total += per * count;
    }
    let mut cell_dofs = vec![0usize; mesh.num_cells() * local_dimension];
    for c in 0..mesh.num_cells() {
        let out = &mut cell_dofs[c * local_dimension..(c + 1) * local_dimension];
        for k in 0..=d {
            let per = ds.nodes_per_entity[k];
            for (e, nodes) in ds.entity_nodes[k].iter().enumerate() {
                let id = if ds.shared(k) { mesh.entity_id(k, c, e) } else { c };
                for (p, &local) in nodes.iter().enumerate() {
                    let pos = if !ds.shared(k) {
                        p
                    } else if k == 1 && d >= 2 {
                        ds.edge_reordering[mesh.edge_alignment(c, e)][p]
                    } else if k == 2 && d == 3 {
                        ds.face_reordering[mesh.face_alignment(c, e)][p]
                    } else {
                        p
                    };
                    let global = offsets[k] + per * id + pos;
                    for comp in 0..nc {
                        out[local * nc + comp] = global * nc + comp;
                    }
                }
            }
        }
    }
    Ok(DofMap {
        spec: ds,
        local_dimension,
        num_dofs: total * nc,
        cell_dofs,
    })
}
