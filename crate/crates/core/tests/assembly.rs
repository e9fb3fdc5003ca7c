mod common;

use std::sync::Arc;

use common::*;
use formc::assembly::io::{read_matrix_market, read_mesh, read_vector, write_matrix_market, write_mesh, write_vector};
use formc::assembly::problems::{mass_form, poisson_form, solve_elasticity, solve_poisson};
use formc::assembly::*;
use formc::fiat::{CellShape, ElementSpec};
use formc::opt::{optimize, OptimizeOptions};
use formc::tensor::compile;
use formc::{Error, ExecPolicy};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TRI: CellShape = CellShape::Triangle;
const TET: CellShape = CellShape::Tetrahedron;

#[test]
fn mesh_entity_counts() {
    let m = unit_square(1).unwrap();
    assert_eq!((m.num_vertices(), m.num_edges(), m.num_cells()), (4, 5, 2));
    let t = two_tets();
    assert_eq!(t.num_faces(), 7);
    assert_eq!(t.num_edges(), 9);
    let shared: Vec<usize> = (0..4).map(|f| t.face_id(0, f)).filter(|id| (0..4).any(|g| t.face_id(1, g) == *id)).collect();
    assert_eq!(shared.len(), 1);
}

#[test]
fn negative_orientation_is_normalized() {
    let coords = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
    let m = SimplicialMesh::new(coords, vec![vec![0, 2, 1]]).unwrap();
    assert!(m.cell_geometry(0).unwrap().det > 0.0);
}

#[test]
fn invalid_meshes_are_rejected() {
    let coords = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0], vec![0.0, 1.0]];
    assert!(matches!(
        SimplicialMesh::new(coords.clone(), vec![vec![0, 1, 2]]),
        Err(Error::ZeroVolumeCell(0))
    ));
    assert!(matches!(
        SimplicialMesh::new(coords.clone(), vec![vec![0, 1, 3], vec![3, 1, 0]]),
        Err(Error::InvalidMesh(_))
    ));
    assert!(matches!(SimplicialMesh::new(coords, vec![vec![0, 1, 7]]), Err(Error::InvalidMesh(_))));
}

#[test]
fn dangling_vertex_is_allowed() {
    let coords = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![5.0, 5.0]];
    let m = SimplicialMesh::new(coords, vec![vec![0, 1, 2]]).unwrap();
    assert_eq!(m.num_vertices(), 4);
}

#[test]
fn p1_and_p2_tetrahedron_maps() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mesh = scrambled_mesh(&unit_cube(2).unwrap(), &mut rng);
    let p1 = generate_dofmap(ElementSpec::lagrange(TET, 1), &mesh).unwrap();
    let p2 = generate_dofmap(ElementSpec::lagrange(TET, 2), &mesh).unwrap();
    assert_eq!(p1.num_dofs, mesh.num_vertices());
    assert_eq!(p2.num_dofs, mesh.num_vertices() + mesh.num_edges());
    for c in 0..mesh.num_cells() {
        for t in 0..4 {
            assert_eq!(p1.cell_dofs(c)[t], mesh.vertex_id(c, t));
            assert_eq!(p2.cell_dofs(c)[t], mesh.vertex_id(c, t));
        }
        for e in 0..6 {
            assert_eq!(p2.cell_dofs(c)[4 + e], mesh.num_vertices() + mesh.edge_id(c, e));
        }
    }
}

#[test]
fn dofs_on_shared_entities_coincide() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for degree in 1..=5 {
        for _ in 0..12 {
            assert_continuous(ElementSpec::lagrange(TET, degree), &scrambled_mesh(&two_tets(), &mut rng));
        }
        assert_continuous(ElementSpec::lagrange(TRI, degree), &scrambled_mesh(&unit_square(3).unwrap(), &mut rng));
        assert_continuous(ElementSpec::lagrange(TET, degree), &scrambled_mesh(&unit_cube(1).unwrap(), &mut rng));
    }
    assert_continuous(ElementSpec::vector_lagrange(TET, 3), &scrambled_mesh(&unit_cube(1).unwrap(), &mut rng));
}

#[test]
fn discontinuous_elements_share_nothing() {
    let mesh = unit_square(2).unwrap();
    let dm = generate_dofmap(ElementSpec::discontinuous(TRI, 2), &mesh).unwrap();
    assert_eq!(dm.num_dofs, 6 * mesh.num_cells());
    let mut all: Vec<usize> = (0..mesh.num_cells()).flat_map(|c| dm.cell_dofs(c).to_vec()).collect();
    all.sort_unstable();
    assert_eq!(all, (0..dm.num_dofs).collect::<Vec<_>>());
}

#[test]
fn dofmap_rejects_other_cell_shapes() {
    let err = generate_dofmap(ElementSpec::lagrange(TET, 1), &unit_square(1).unwrap()).unwrap_err();
    assert!(matches!(err, Error::CellMismatch { .. }));
}

#[test]
fn p1_poisson_on_two_triangles_matches_manual_scatter() {
    let mesh = unit_square(1).unwrap();
    let spec = ElementSpec::lagrange(TRI, 1);
    let dm = generate_dofmap(spec, &mesh).unwrap();
    let compiled = compile(&poisson_form(spec).unwrap()).unwrap();
    let a = assemble(&compiled, None, &mesh, &[&dm, &dm], &[], &AssemblyOptions::default())
        .unwrap()
        .into_matrix()
        .unwrap();
    let mut oracle = vec![vec![0.0; 4]; 4];
    for c in 0..2 {
        let ae = physical_element_tensor(TestCase::Poisson, spec, &mesh.cell_geometry(c).unwrap(), &[]);
        let vs = &mesh.cells()[c];
        for i in 0..3 {
            for j in 0..3 {
                oracle[vs[i]][vs[j]] += ae[i * 3 + j];
            }
        }
    }
    let dense = a.to_dense();
    for i in 0..4 {
        assert!(max_abs_diff(&dense[i], &oracle[i]) < 1e-14);
    }
}

#[test]
fn mass_sum_and_stiffness_nullspace() {
    for (mesh, cell) in [(unit_square(4).unwrap(), TRI), (unit_cube(2).unwrap(), TET)] {
        for degree in 1..=3 {
            let spec = ElementSpec::lagrange(cell, degree);
            let dm = generate_dofmap(spec, &mesh).unwrap();
            let opts = AssemblyOptions::default();
            let m = assemble(&compile(&mass_form(spec).unwrap()).unwrap(), None, &mesh, &[&dm, &dm], &[], &opts)
                .unwrap()
                .into_matrix()
                .unwrap();
            assert!((m.sum() - 1.0).abs() < 1e-12);
            let k = assemble(&compile(&poisson_form(spec).unwrap()).unwrap(), None, &mesh, &[&dm, &dm], &[], &opts)
                .unwrap()
                .into_matrix()
                .unwrap();
            assert!(max_abs(&k.matvec(&vec![1.0; dm.num_dofs])) < 1e-12);
            assert!(k.asymmetry() < 1e-10);
        }
    }
}

#[test]
fn action_equals_matrix_vector_product() {
    let mesh = unit_square(2).unwrap();
    let spec = ElementSpec::lagrange(TRI, 2);
    let dm = Arc::new(generate_dofmap(spec, &mesh).unwrap());
    let opts = AssemblyOptions::default();
    let compiled = compile(&poisson_form(spec).unwrap()).unwrap();
    let a = assemble(&compiled, None, &mesh, &[&dm, &dm], &[], &opts).unwrap().into_matrix().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let u = CoefficientFunction::new(dm.clone(), random_vector(&mut rng, dm.num_dofs)).unwrap();
    let w = assemble_action(&compiled, &mesh, &dm, &[], Some(&u), &opts).unwrap();
    assert!(max_abs_diff(&w, &a.matvec(&u.values)) < 1e-10);
    let zero = CoefficientFunction::zeros(dm.clone());
    assert!(max_abs(&assemble_action(&compiled, &mesh, &dm, &[], Some(&zero), &opts).unwrap()) == 0.0);
    let ones = CoefficientFunction::new(dm.clone(), vec![1.0; dm.num_dofs]).unwrap();
    let mass = compile(&mass_form(spec).unwrap()).unwrap();
    let s: f64 = assemble_action(&mass, &mesh, &dm, &[], Some(&ones), &opts).unwrap().iter().sum();
    assert!((s - 1.0).abs() < 1e-12);
    assert!(matches!(
        assemble_action(&compiled, &mesh, &dm, &[], None, &opts),
        Err(Error::MissingCoefficient(_))
    ));
}

#[test]
fn assembly_modes_agree_for_all_test_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for (base, cell) in [(unit_square(3).unwrap(), TRI), (unit_cube(1).unwrap(), TET)] {
        let mesh = scrambled_mesh(&base, &mut rng);
        for case in ALL_CASES {
            let degree = 2;
            let spec = case.element(cell, degree);
            let compiled = compile(&case.form(cell, degree)).unwrap();
            let schedule = optimize(&compiled, OptimizeOptions::default()).unwrap();
            let dm = Arc::new(generate_dofmap(spec, &mesh).unwrap());
            let coefs: Vec<CoefficientFunction> = (0..case.num_coefficients())
                .map(|_| CoefficientFunction::new(dm.clone(), random_vector(&mut rng, dm.num_dofs)).unwrap())
                .collect();
            let coef_refs: Vec<&CoefficientFunction> = coefs.iter().collect();
            let mats: Vec<CsrMatrix> = AssemblyMode::ALL
                .iter()
                .map(|&mode| {
                    assemble(&compiled, Some(&schedule), &mesh, &[&dm, &dm], &coef_refs, &AssemblyOptions::mode(mode))
                        .unwrap()
                        .into_matrix()
                        .unwrap()
                })
                .collect();
            for m in &mats[1..] {
                assert!(max_abs_diff(&m.values, &mats[0].values) < 1e-10, "{case:?} {cell}");
            }
            if case.is_symmetric() {
                assert!(mats[0].asymmetry() < 1e-10);
            }
        }
    }
}

#[test]
fn parallel_and_sequential_assembly_are_identical() {
    let mesh = unit_cube(3).unwrap();
    let spec = ElementSpec::lagrange(TET, 2);
    let dm = generate_dofmap(spec, &mesh).unwrap();
    let compiled = compile(&poisson_form(spec).unwrap()).unwrap();
    let run = |policy| {
        let opts = AssemblyOptions {
            policy,
            block_size: 37,
            ..Default::default()
        };
        assemble(&compiled, None, &mesh, &[&dm, &dm], &[], &opts).unwrap().into_matrix().unwrap()
    };
    assert_eq!(run(ExecPolicy::Parallel), run(ExecPolicy::Sequential));
}

#[test]
fn assembly_errors() {
    let mesh = unit_square(1).unwrap();
    let spec = ElementSpec::lagrange(TRI, 1);
    let dm = generate_dofmap(spec, &mesh).unwrap();
    let compiled = compile(&poisson_form(spec).unwrap()).unwrap();
    let err = assemble(&compiled, None, &mesh, &[&dm, &dm], &[], &AssemblyOptions::mode(AssemblyMode::Schedule));
    assert!(matches!(err, Err(Error::NoSchedule)));
    let cube = unit_cube(1).unwrap();
    let err = assemble(&compiled, None, &cube, &[&dm, &dm], &[], &AssemblyOptions::default());
    assert!(matches!(err, Err(Error::CellMismatch { .. })));
    let conv = compile(&TestCase::Convection.form(TRI, 1)).unwrap();
    let vdm = generate_dofmap(TestCase::Convection.element(TRI, 1), &mesh).unwrap();
    let err = assemble(&conv, None, &mesh, &[&vdm, &vdm], &[], &AssemblyOptions::default());
    assert!(matches!(err, Err(Error::MissingCoefficient(_))));
    assert!("simd".parse::<AssemblyMode>().is_err());
    assert_eq!("schedule".parse::<AssemblyMode>().unwrap(), AssemblyMode::Schedule);
}

#[test]
fn dirichlet_rows_and_boundary_data() {
    let mesh = unit_square(3).unwrap();
    let spec = ElementSpec::lagrange(TRI, 2);
    let dm = Arc::new(generate_dofmap(spec, &mesh).unwrap());
    let compiled = compile(&mass_form(spec).unwrap()).unwrap();
    let mut a = assemble(&compiled, None, &mesh, &[&dm, &dm], &[], &AssemblyOptions::default())
        .unwrap()
        .into_matrix()
        .unwrap();
    let mut b = vec![0.0; dm.num_dofs];
    let g = |x: &[f64], _: usize| 1.0 + x[0] - 2.0 * x[1];
    let bc = DirichletBc::new(&dm, &mesh, |_| true, g).unwrap();
    // boundary of a unit_square(3) P2 space: 4 * 3 * 2 nodes
    assert_eq!(bc.dofs.len(), 24);
    bc.apply(&mut a, &mut b, false).unwrap();
    for &d in &bc.dofs {
        let (cols, vals) = a.row(d);
        let nz: Vec<(usize, f64)> = cols.iter().zip(vals).filter(|(_, v)| **v != 0.0).map(|(c, v)| (*c, *v)).collect();
        assert_eq!(nz, vec![(d, 1.0)]);
    }
    // an all-boundary mesh: every dof of a single P1 cell is constrained
    let one = unit_square(1).unwrap();
    let p1 = Arc::new(generate_dofmap(ElementSpec::lagrange(TRI, 1), &one).unwrap());
    let m1 = compile(&mass_form(ElementSpec::lagrange(TRI, 1)).unwrap()).unwrap();
    let mut a1 = assemble(&m1, None, &one, &[&p1, &p1], &[], &AssemblyOptions::default())
        .unwrap()
        .into_matrix()
        .unwrap();
    let mut b1 = vec![0.0; p1.num_dofs];
    let bc1 = DirichletBc::new(&p1, &one, |_| true, g).unwrap();
    bc1.apply(&mut a1, &mut b1, true).unwrap();
    let x = solve_cg(&a1, &b1, CgOptions::default()).unwrap().x;
    let coords = p1.dof_coordinates(&one).unwrap();
    for (xi, c) in x.iter().zip(&coords) {
        assert!((xi - g(c, 0)).abs() < 1e-14);
    }
}

#[test]
fn empty_dirichlet_selection_is_not_an_error() {
    let mesh = unit_square(2).unwrap();
    let dm = generate_dofmap(ElementSpec::lagrange(TRI, 1), &mesh).unwrap();
    let bc = DirichletBc::new(&dm, &mesh, |x| x[0] > 5.0, |_, _| 0.0).unwrap();
    assert!(bc.dofs.is_empty());
}

#[test]
fn cg_on_p1_poisson() {
    let sol = solve_poisson(2, 8, 1, &AssemblyOptions::default(), 1e-10).unwrap();
    assert!(sol.relative_residual <= 1e-10);
    assert!(sol.l2_error < 4e-2);
}

#[test]
fn p1_poisson_converges_at_second_order() {
    let errs: Vec<f64> = [8, 16, 32]
        .iter()
        .map(|&n| solve_poisson(2, n, 1, &AssemblyOptions::default(), 1e-10).unwrap().l2_error)
        .collect();
    for w in errs.windows(2) {
        let rate = (w[0] / w[1]).log2();
        assert!((rate - 2.0).abs() < 0.1, "rate {rate}");
    }
}

#[test]
fn elasticity_operator_is_symmetric_with_rigid_translations_in_kernel() {
    let sol = solve_elasticity(4.0, [4, 1, 1], 1, &AssemblyOptions::default()).unwrap();
    let k = &sol.stiffness;
    assert!(k.asymmetry() < 1e-10);
    for dir in 0..3 {
        let t: Vec<f64> = (0..k.nrows).map(|g| if g % 3 == dir { 1.0 } else { 0.0 }).collect();
        assert!(max_abs(&k.matvec(&t)) < 1e-10);
    }
    // the beam sags under its own weight
    let uz: f64 = sol.displacement.values.iter().skip(2).step_by(3).sum();
    assert!(uz < 0.0 && sol.max_displacement > 0.0);
}

#[test]
fn file_formats_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = unit_cube(1).unwrap();
    write_mesh(dir.path().join("m.txt"), &mesh).unwrap();
    let back = read_mesh(dir.path().join("m.txt")).unwrap();
    assert_eq!(back.cells(), mesh.cells());
    let spec = ElementSpec::lagrange(TET, 1);
    let dm = generate_dofmap(spec, &mesh).unwrap();
    let a = assemble(&compile(&poisson_form(spec).unwrap()).unwrap(), None, &mesh, &[&dm, &dm], &[], &AssemblyOptions::default())
        .unwrap()
        .into_matrix()
        .unwrap();
    write_matrix_market(dir.path().join("a.mtx"), &a).unwrap();
    assert_eq!(read_matrix_market(dir.path().join("a.mtx")).unwrap(), a);
    let v = a.diagonal();
    write_vector(dir.path().join("v.txt"), &v).unwrap();
    assert_eq!(read_vector(dir.path().join("v.txt")).unwrap(), v);
}
