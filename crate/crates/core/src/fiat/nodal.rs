//! Nodal bases obtained by solving the Vandermonde system against the prime
//! basis, and their tabulation at arbitrary reference points.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::cell::{CellShape, ReferenceCell};
use super::prime::{build_prime_basis, PrimeBasis, MAX_DEGREE};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ElementFamily {
    Lagrange,
    DiscontinuousLagrange,
    VectorLagrange,
}

impl ElementFamily {
    pub fn name(self) -> &'static str {
        match self {
            ElementFamily::Lagrange => "Lagrange",
            ElementFamily::DiscontinuousLagrange => "Discontinuous Lagrange",
            ElementFamily::VectorLagrange => "Vector Lagrange",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name.trim() {
            "Lagrange" | "CG" | "P" => Some(ElementFamily::Lagrange),
            "Discontinuous Lagrange" | "DG" => Some(ElementFamily::DiscontinuousLagrange),
            "Vector Lagrange" => Some(ElementFamily::VectorLagrange),
            _ => None,
        }
    }
}

/// Finite element description: family, cell and polynomial degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ElementSpec {
    pub family: ElementFamily,
    pub cell: CellShape,
    pub degree: usize,
}

impl ElementSpec {
    pub fn new(family: ElementFamily, cell: CellShape, degree: usize) -> Self {
        ElementSpec { family, cell, degree }
    }

    pub fn lagrange(cell: CellShape, degree: usize) -> Self {
        Self::new(ElementFamily::Lagrange, cell, degree)
    }

    pub fn vector_lagrange(cell: CellShape, degree: usize) -> Self {
        Self::new(ElementFamily::VectorLagrange, cell, degree)
    }

    pub fn discontinuous(cell: CellShape, degree: usize) -> Self {
        Self::new(ElementFamily::DiscontinuousLagrange, cell, degree)
    }

    /// 1 for scalar elements, the cell dimension for vector elements.
    pub fn value_size(&self) -> usize {
        match self.family {
            ElementFamily::VectorLagrange => self.cell.dim(),
            _ => 1,
        }
    }

    pub fn scalar_dimension(&self) -> usize {
        super::prime::polynomial_dimension(self.cell.dim(), self.degree)
    }

    /// Local space dimension `n0` (counting vector components).
    pub fn dimension(&self) -> usize {
        self.scalar_dimension() * self.value_size()
    }

    pub fn is_continuous(&self) -> bool {
        self.family != ElementFamily::DiscontinuousLagrange
    }

    /// Short text used in signatures and dumps, e.g. `Lagrange(triangle,2)`.
    pub fn tag(&self) -> String {
        format!("{}({},{})", self.family.name(), self.cell.name(), self.degree)
    }
}

/// Point-evaluation functionals grouped by the entity they belong to.
#[derive(Clone, Debug)]
pub struct NodeSet {
    pub points: Vec<Vec<f64>>,
    pub components: Vec<usize>,
    /// `(topological dim, local entity, position within the entity tuple)`.
    pub entity: Vec<(usize, usize, usize)>,
    /// `entity_nodes[dim][entity]` lists node numbers in position order.
    pub entity_nodes: Vec<Vec<Vec<usize>>>,
}

impl NodeSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Nodes per entity of each dimension, e.g. `[1, 4, 6, 4]` for P5 on a
    /// tetrahedron.
    pub fn nodes_per_entity(&self) -> Vec<usize> {
        self.entity_nodes
            .iter()
            .map(|ents| ents.first().map_or(0, |e| e.len()))
            .collect()
    }
}

/// Equispaced lattice points strictly inside the simplex spanned by `verts`,
/// ordered with the last barycentric weight varying slowest.
pub fn interior_lattice(verts: &[Vec<f64>], degree: usize) -> Vec<Vec<f64>> {
    let k = verts.len() - 1;
    let dim = verts[0].len();
    let q = degree as f64;
    let mut out = Vec::new();
    let point = |weights: &[usize]| -> Vec<f64> {
        let mut x = verts[0].clone();
        for (j, &wj) in weights.iter().enumerate() {
            for c in 0..dim {
                x[c] += wj as f64 / q * (verts[j + 1][c] - verts[0][c]);
            }
        }
        x
    };
    match k {
        0 => out.push(verts[0].clone()),
        1 => {
            for i in 1..degree {
                out.push(point(&[i]));
            }
        }
        2 => {
            for j in 1..degree {
                for i in 1..degree {
                    if i + j < degree {
                        out.push(point(&[i, j]));
                    }
                }
            }
        }
        3 => {
            for l in 1..degree {
                for j in 1..degree {
                    for i in 1..degree {
                        if i + j + l < degree {
                            out.push(point(&[i, j, l]));
                        }
                    }
                }
            }
        }
        _ => unreachable!("simplices up to dimension 3"),
    }
    out
}

/// Lattice coordinates `(i, j)` of the face-interior points in the order used
/// by [`interior_lattice`] for a 2-simplex.
pub fn face_lattice_coordinates(degree: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for j in 1..degree {
        for i in 1..degree {
            if i + j < degree {
                out.push((i, j));
            }
        }
    }
    out
}

/// Node set of the scalar Lagrange element, before vector expansion.
fn scalar_nodes(cell: &ReferenceCell, family: ElementFamily, degree: usize) -> NodeSet {
    let d = cell.dim();
    let mut points = Vec::new();
    let mut entity = Vec::new();
    let mut entity_nodes: Vec<Vec<Vec<usize>>> = (0..=d).map(|k| vec![Vec::new(); cell.num_entities(k)]).collect();
    let discontinuous = family == ElementFamily::DiscontinuousLagrange;
    if degree == 0 {
        let centroid: Vec<f64> = (0..d)
            .map(|c| cell.vertices().iter().map(|v| v[c]).sum::<f64>() / (d + 1) as f64)
            .collect();
        points.push(centroid);
        entity.push((d, 0, 0));
        entity_nodes[d][0].push(0);
    } else {
        for dim in 0..=d {
            for (e, verts) in cell.entities(dim).iter().enumerate() {
                let coords: Vec<Vec<f64>> = verts.iter().map(|&v| cell.vertices()[v].clone()).collect();
                for x in interior_lattice(&coords, degree) {
                    let id = points.len();
                    points.push(x);
                    if discontinuous {
                        let pos = entity_nodes[d][0].len();
                        entity.push((d, 0, pos));
                        entity_nodes[d][0].push(id);
                    } else {
                        let pos = entity_nodes[dim][e].len();
                        entity.push((dim, e, pos));
                        entity_nodes[dim][e].push(id);
                    }
                }
            }
        }
    }
    let components = vec![0; points.len()];
    NodeSet {
        points,
        components,
        entity,
        entity_nodes,
    }
}

/// Expand a scalar node set componentwise; node `k` component `c` becomes
/// node `k * ncomp + c`.
fn expand_components(scalar: &NodeSet, ncomp: usize) -> NodeSet {
    if ncomp == 1 {
        return scalar.clone();
    }
    let mut points = Vec::new();
    let mut components = Vec::new();
    let mut entity = Vec::new();
    for (k, x) in scalar.points.iter().enumerate() {
        let (dim, e, pos) = scalar.entity[k];
        for c in 0..ncomp {
            points.push(x.clone());
            components.push(c);
            entity.push((dim, e, pos * ncomp + c));
        }
    }
    let entity_nodes = scalar
        .entity_nodes
        .iter()
        .map(|ents| {
            ents.iter()
                .map(|nodes| nodes.iter().flat_map(|&k| (0..ncomp).map(move |c| k * ncomp + c)).collect())
                .collect()
        })
        .collect();
    NodeSet {
        points,
        components,
        entity,
        entity_nodes,
    }
}

#[derive(Clone, Debug)]
pub struct NodalBasis {
    spec: ElementSpec,
    prime: PrimeBasis,
    /// Scalar coefficients: `Phi_i = sum_j alpha[(i, j)] Psi_j`.
    alpha: DMatrix<f64>,
    scalar_nodes: NodeSet,
    nodes: NodeSet,
    condition: f64,
}

/// Solve `V alpha^T = I` for the given prime basis and scalar node set.
fn solve_vandermonde(prime: &PrimeBasis, nodes: &NodeSet) -> Result<(DMatrix<f64>, f64)> {
    let n = prime.dimension();
    if nodes.len() != n {
        return Err(Error::DegenerateNodeSet(format!(
            "{} nodes for a space of dimension {n}",
            nodes.len()
        )));
    }
    let v = prime.tabulate_values(&nodes.points).transpose();
    let sv = v.singular_values();
    let smax = sv.max();
    let smin = sv.min();
    if smin <= 1e-12 * smax.max(1.0) {
        return Err(Error::DegenerateNodeSet(format!("singular Vandermonde matrix (sigma_min = {smin:e})")));
    }
    let condition = smax / smin;
    if condition > 1e8 {
        log::warn!("Vandermonde condition number {condition:e}");
    }
    let lu = v.clone().lu();
    let vinv = lu
        .solve(&DMatrix::identity(n, n))
        .ok_or_else(|| Error::DegenerateNodeSet("LU factorization failed".into()))?;
    Ok((vinv.transpose(), condition))
}

pub fn build_nodal_basis(spec: ElementSpec) -> Result<NodalBasis> {
    if spec.degree > MAX_DEGREE {
        return Err(Error::DegreeUnsupported(format!("element degree {} > {MAX_DEGREE}", spec.degree)));
    }
    if spec.degree == 0 && spec.family != ElementFamily::DiscontinuousLagrange {
        return Err(Error::DegreeUnsupported("continuous Lagrange requires degree >= 1".into()));
    }
    let cell = ReferenceCell::new(spec.cell);
    let prime = build_prime_basis(&cell, spec.degree)?;
    let scalar = scalar_nodes(&cell, spec.family, spec.degree);
    NodalBasis::from_nodes(spec, prime, scalar)
}

impl NodalBasis {
    /// Build from an explicit scalar node set (used for custom placements).
    pub fn from_nodes(spec: ElementSpec, prime: PrimeBasis, scalar_nodes: NodeSet) -> Result<Self> {
        let (alpha, condition) = solve_vandermonde(&prime, &scalar_nodes)?;
        let nodes = expand_components(&scalar_nodes, spec.value_size());
        Ok(NodalBasis {
            spec,
            prime,
            alpha,
            scalar_nodes,
            nodes,
            condition,
        })
    }

    pub fn spec(&self) -> ElementSpec {
        self.spec
    }

    pub fn prime(&self) -> &PrimeBasis {
        &self.prime
    }

    pub fn alpha(&self) -> &DMatrix<f64> {
        &self.alpha
    }

    pub fn nodes(&self) -> &NodeSet {
        &self.nodes
    }

    pub fn scalar_nodes(&self) -> &NodeSet {
        &self.scalar_nodes
    }

    pub fn condition_number(&self) -> f64 {
        self.condition
    }

    pub fn dimension(&self) -> usize {
        self.nodes.len()
    }

    pub fn value_size(&self) -> usize {
        self.spec.value_size()
    }

    pub fn dim(&self) -> usize {
        self.spec.cell.dim()
    }

    /// `max |V alpha^T - I|`.
    pub fn vandermonde_residual(&self) -> f64 {
        let v = self.prime.tabulate_values(&self.scalar_nodes.points).transpose();
        let r = v * self.alpha.transpose() - DMatrix::identity(self.alpha.nrows(), self.alpha.nrows());
        r.abs().max()
    }

    /// Tabulate values (`order = 0`) or values and first reference derivatives
    /// (`order = 1`) at `points`.
    pub fn tabulate(&self, points: &[Vec<f64>], order: usize) -> Result<Tabulation> {
        if order > 1 {
            return Err(Error::UnsupportedDerivativeOrder(order));
        }
        let ns = self.alpha.nrows();
        let nc = self.value_size();
        let d = self.dim();
        let np = points.len();
        let n = ns * nc;
        let mut values = vec![0.0; n * np * nc];
        let mut derivs = if order == 1 { vec![0.0; n * np * nc * d] } else { Vec::new() };
        for (p, x) in points.iter().enumerate() {
            let psi = self.prime.evaluate(x);
            for k in 0..ns {
                let mut v = 0.0;
                let mut g = [0.0; 3];
                for (j, jet) in psi.iter().enumerate() {
                    let a = self.alpha[(k, j)];
                    v += a * jet.value;
                    for l in 0..d {
                        g[l] += a * jet.grad[l];
                    }
                }
                for c in 0..nc {
                    let i = k * nc + c;
                    values[(i * np + p) * nc + c] = v;
                    if order == 1 {
                        for l in 0..d {
                            derivs[((i * np + p) * nc + c) * d + l] = g[l];
                        }
                    }
                }
            }
        }
        Ok(Tabulation {
            num_basis: n,
            num_points: np,
            num_components: nc,
            dim: d,
            order,
            values,
            derivs,
        })
    }
}

/// Dense basis tabulation.
///
/// Layout (row-major): values are indexed `[basis][point][component]`, first
/// derivatives `[basis][point][component][direction]`, where `direction` is a
/// reference coordinate `X_l`. Vector elements number basis functions as
/// `node * value_size + component`; function `i` is nonzero only in component
/// `i % value_size`.
#[derive(Clone, Debug)]
pub struct Tabulation {
    pub num_basis: usize,
    pub num_points: usize,
    pub num_components: usize,
    pub dim: usize,
    pub order: usize,
    pub values: Vec<f64>,
    pub derivs: Vec<f64>,
}

impl Tabulation {
    #[inline]
    pub fn value(&self, basis: usize, point: usize, comp: usize) -> f64 {
        self.values[(basis * self.num_points + point) * self.num_components + comp]
    }

    #[inline]
    pub fn deriv(&self, basis: usize, point: usize, comp: usize, dir: usize) -> f64 {
        self.derivs[((basis * self.num_points + point) * self.num_components + comp) * self.dim + dir]
    }
}

/// Shared, memoized nodal basis for `spec`.
pub fn element(spec: ElementSpec) -> Result<Arc<NodalBasis>> {
    static CACHE: OnceLock<Mutex<HashMap<ElementSpec, Arc<NodalBasis>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(b) = cache.lock().expect("element cache poisoned").get(&spec) {
        return Ok(b.clone());
    }
    let basis = Arc::new(build_nodal_basis(spec)?);
    cache
        .lock()
        .expect("element cache poisoned")
        .insert(spec, basis.clone());
    Ok(basis)
}
