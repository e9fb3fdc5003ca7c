//! Oracles shared by the integration tests: element tensors computed by
//! straightforward quadrature on the physical cell, and random affine cells.

#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::HashMap;

use formc::assembly::{generate_dofmap, SimplicialMesh};
use formc::fiat::{element, make_quadrature, CellShape, ElementSpec};
use formc::form::{deriv, dot, grad, lower, transp, CanonicalForm, Expr, Index, DX};
use formc::tensor::CellGeometry;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TestCase {
    Mass,
    Poisson,
    Convection,
    Strain,
}

pub const ALL_CASES: [TestCase; 4] = [TestCase::Mass, TestCase::Poisson, TestCase::Convection, TestCase::Strain];

impl TestCase {
    pub fn element(self, cell: CellShape, degree: usize) -> ElementSpec {
        match self {
            TestCase::Mass | TestCase::Poisson => ElementSpec::lagrange(cell, degree),
            TestCase::Convection | TestCase::Strain => ElementSpec::vector_lagrange(cell, degree),
        }
    }

    pub fn form(self, cell: CellShape, degree: usize) -> CanonicalForm {
        let e = self.element(cell, degree);
        let (v, u) = (Expr::test(e), Expr::trial(e));
        let f = match self {
            TestCase::Mass => v * u * DX,
            TestCase::Poisson => dot(&grad(&v), &grad(&u)) * DX,
            TestCase::Convection => {
                let w = Expr::coefficient(0, e, "w");
                let (i, j) = (Index::new(), Index::new());
                v.comp(i) * w.comp(j) * deriv(&u.comp(i), j) * DX
            }
            TestCase::Strain => {
                let eps = |x: &Expr| 0.5 * (grad(x) + transp(&grad(x)));
                dot(&eps(&v), &eps(&u)) * DX
            }
        };
        lower(&f).expect("test-case form lowers")
    }

    pub fn num_coefficients(self) -> usize {
        usize::from(self == TestCase::Convection)
    }

    pub fn is_symmetric(self) -> bool {
        self != TestCase::Convection
    }
}

/// Element tensor `[test][trial]` by quadrature of physical-space integrands.
pub fn physical_element_tensor(
    case: TestCase,
    spec: ElementSpec,
    geom: &CellGeometry,
    coefficients: &[Vec<f64>],
) -> Vec<f64> {
    let d = geom.dim;
    let basis = element(spec).unwrap();
    let rule = make_quadrature(spec.cell, 3 * spec.degree + 2).unwrap();
    let tab = basis.tabulate(&rule.points, 1).unwrap();
    let n = tab.num_basis;
    let nc = tab.num_components;
    // physical gradient d phi_b[c] / dx_s at point q
    let grad_x = |b: usize, q: usize, c: usize, s: usize| -> f64 {
        (0..d).map(|a| tab.deriv(b, q, c, a) * geom.inverse[a][s]).sum()
    };
    let mut out = vec![0.0; n * n];
    for (q, &w) in rule.weights.iter().enumerate() {
        let dx = w * geom.det.abs();
        let wval: Vec<f64> = if case == TestCase::Convection {
            (0..nc)
                .map(|c| (0..n).map(|k| coefficients[0][k] * tab.value(k, q, c)).sum())
                .collect()
        } else {
            Vec::new()
        };
        for i in 0..n {
            for j in 0..n {
                let v = match case {
                    TestCase::Mass => tab.value(i, q, 0) * tab.value(j, q, 0),
                    TestCase::Poisson => (0..d).map(|s| grad_x(i, q, 0, s) * grad_x(j, q, 0, s)).sum(),
                    TestCase::Convection => {
                        let mut acc = 0.0;
                        for c in 0..nc {
                            for s in 0..d {
                                acc += tab.value(i, q, c) * wval[s] * grad_x(j, q, c, s);
                            }
                        }
                        acc
                    }
                    TestCase::Strain => {
                        let mut acc = 0.0;
                        for r in 0..d {
                            for s in 0..d {
                                let ev = 0.5 * (grad_x(i, q, r, s) + grad_x(i, q, s, r));
                                let eu = 0.5 * (grad_x(j, q, r, s) + grad_x(j, q, s, r));
                                acc += ev * eu;
                            }
                        }
                        acc
                    }
                };
                out[i * n + j] += dx * v;
            }
        }
    }
    out
}

/// Random non-degenerate simplex; about half of them have negative
/// orientation.
pub fn random_cell(rng: &mut ChaCha8Rng, dim: usize) -> CellGeometry {
    loop {
        let mut verts = vec![(0..dim).map(|_| rng.random_range(-2.0..2.0)).collect::<Vec<f64>>()];
        for k in 0..dim {
            let mut v = verts[0].clone();
            for (c, x) in v.iter_mut().enumerate() {
                let base = if c == k { 1.0 } else { 0.0 };
                *x += base + rng.random_range(-0.4..0.4);
            }
            verts.push(v);
        }
        if rng.random_bool(0.5) {
            verts.swap(1, 2.min(dim));
        }
        if let Ok(g) = CellGeometry::new(&verts) {
            if g.det.abs() > 0.2 {
                return g;
            }
        }
    }
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Same mesh with globally renumbered vertices and shuffled cell-local
/// vertex orders, so that every edge and face alignment occurs.
pub fn scrambled_mesh(mesh: &SimplicialMesh, rng: &mut ChaCha8Rng) -> SimplicialMesh {
    let nv = mesh.num_vertices();
    let mut perm: Vec<usize> = (0..nv).collect();
    perm.shuffle(rng);
    let mut coords = vec![Vec::new(); nv];
    for (old, &new) in perm.iter().enumerate() {
        coords[new] = mesh.coordinates()[old].clone();
    }
    let cells = mesh
        .cells()
        .iter()
        .map(|c| {
            let mut c: Vec<usize> = c.iter().map(|&v| perm[v]).collect();
            c.shuffle(rng);
            c
        })
        .collect();
    SimplicialMesh::new(coords, cells).unwrap()
}

/// Worst deviations of a Lagrange basis from its defining properties:
/// `(nodal identity, Vandermonde residual, partition of unity, relative
/// finite-difference gradient error)`.
pub fn basis_defects(spec: ElementSpec, rng: &mut ChaCha8Rng) -> [f64; 4] {
    let basis = element(spec).unwrap();
    let d = spec.cell.dim();
    let nodes = &basis.nodes().points;
    let at_nodes = basis.tabulate(nodes, 0).unwrap();
    let mut nodal: f64 = 0.0;
    for j in 0..at_nodes.num_basis {
        for (p, &comp) in basis.nodes().components.iter().enumerate() {
            let expected = if j == p { 1.0 } else { 0.0 };
            nodal = nodal.max((at_nodes.value(j, p, comp) - expected).abs());
        }
    }
    let points: Vec<Vec<f64>> = (0..20).map(|_| random_reference_point(rng, d)).collect();
    let tab = basis.tabulate(&points, 1).unwrap();
    let mut unity: f64 = 0.0;
    for p in 0..points.len() {
        for c in 0..tab.num_components {
            let s: f64 = (0..tab.num_basis).map(|i| tab.value(i, p, c)).sum();
            unity = unity.max((s - 1.0).abs());
        }
    }
    let h = 1e-6;
    let mut fd: f64 = 0.0;
    for (p, x) in points.iter().take(10).enumerate() {
        for l in 0..d {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[l] += h;
            xm[l] -= h;
            let tp = basis.tabulate(std::slice::from_ref(&xp), 0).unwrap();
            let tm = basis.tabulate(std::slice::from_ref(&xm), 0).unwrap();
            for i in 0..tab.num_basis {
                for c in 0..tab.num_components {
                    let approx = (tp.value(i, 0, c) - tm.value(i, 0, c)) / (2.0 * h);
                    let exact = tab.deriv(i, p, c, l);
                    fd = fd.max((approx - exact).abs() / exact.abs().max(1.0));
                }
            }
        }
    }
    [nodal, basis.vandermonde_residual(), unity, fd]
}

/// Uniformly distributed point of the reference simplex.
pub fn random_reference_point(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..dim).map(|_| rng.random_range(0.0..1.0)).collect();
        if x.iter().sum::<f64>() < 1.0 {
            return x;
        }
    }
}

/// 6 A0 for P2 Poisson, rows i1, columns i2, entries (11, 12, 21, 22).
pub const A0_P2: [[[i64; 4]; 6]; 6] = [
    [[3, 3, 3, 3], [1, 0, 1, 0], [0, 1, 0, 1], [0, 0, 0, 0], [0, -4, 0, -4], [-4, 0, -4, 0]],
    [[1, 1, 0, 0], [3, 0, 0, 0], [0, -1, 0, 0], [0, 4, 0, 0], [0, 0, 0, 0], [-4, -4, 0, 0]],
    [[0, 0, 1, 1], [0, 0, -1, 0], [0, 0, 0, 3], [0, 0, 4, 0], [0, 0, -4, -4], [0, 0, 0, 0]],
    [[0, 0, 0, 0], [0, 0, 4, 0], [0, 4, 0, 0], [8, 4, 4, 8], [-8, -4, -4, 0], [0, -4, -4, -8]],
    [[0, 0, -4, -4], [0, 0, 0, 0], [0, -4, 0, -4], [-8, -4, -4, 0], [8, 4, 4, 8], [0, 4, 4, 0]],
    [[-4, -4, 0, 0], [-4, 0, -4, 0], [0, 0, 0, 0], [0, -4, -4, -8], [0, 4, 4, 0], [8, 4, 4, 8]],
];

/// Upper triangle of 6 abar for P2 Poisson, row-major over i1 <= i2.
pub const A0_P2_SYMMETRIC: [[i64; 3]; 21] = [
    [3, 6, 3], [1, 1, 0], [0, 1, 1], [0, 0, 0], [0, -4, -4], [-4, -4, 0],
    [3, 0, 0], [0, -1, 0], [0, 4, 0], [0, 0, 0], [-4, -4, 0],
    [0, 0, 3], [0, 4, 0], [0, -4, -4], [0, 0, 0],
    [8, 8, 8], [-8, -8, 0], [0, -8, -8],
    [8, 8, 8], [0, 8, 0],
    [8, 8, 8],
];

/// Largest distance between the physical positions that different cells
/// assign to one global dof. Panics if two dofs of one component share a
/// point or a dof is never used.
pub fn dof_placement_spread(spec: ElementSpec, mesh: &SimplicialMesh) -> f64 {
    let dm = generate_dofmap(spec, mesh).unwrap();
    let basis = element(spec).unwrap();
    let mut placed: Vec<Option<Vec<f64>>> = vec![None; dm.num_dofs];
    let mut spread: f64 = 0.0;
    for c in 0..mesh.num_cells() {
        let geom = mesh.cell_geometry(c).unwrap();
        for (l, &g) in dm.cell_dofs(c).iter().enumerate() {
            let x = geom.map(&basis.nodes().points[l]);
            match &placed[g] {
                None => placed[g] = Some(x),
                Some(y) => spread = spread.max(max_abs_diff(&x, y)),
            }
        }
    }
    let mut by_point: HashMap<Vec<i64>, usize> = HashMap::new();
    for (g, x) in placed.iter().enumerate() {
        let x = x.as_ref().expect("every dof is used");
        let mut key: Vec<i64> = x.iter().map(|v| (v * 1e9).round() as i64).collect();
        key.push((g % spec.value_size()) as i64);
        assert!(by_point.insert(key, g).is_none(), "{}: two dofs at one point", spec.tag());
    }
    spread
}

pub fn assert_continuous(spec: ElementSpec, mesh: &SimplicialMesh) {
    let spread = dof_placement_spread(spec, mesh);
    assert!(spread < 1e-12, "{} dof placed {spread:e} apart", spec.tag());
}

/// The two-tetrahedron mesh sharing the face through vertices 1, 2, 3.
pub fn two_tets() -> SimplicialMesh {
    let coords = vec![
        vec![0.0, 0.0, 0.0],
        vec![1.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0],
        vec![0.0, 0.0, 1.0],
        vec![1.0, 1.0, 1.0],
    ];
    SimplicialMesh::new(coords, vec![vec![0, 1, 2, 3], vec![1, 2, 3, 4]]).unwrap()
}
