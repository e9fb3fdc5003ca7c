#![allow(clippy::needless_range_loop)]

mod common;

use common::*;
use formc::fiat::{CellShape, ElementSpec};
use formc::form::{dot, grad, lower, mult, Expr, DX};
use formc::tensor::flops::{direct_maps, quadrature_model};
use formc::tensor::{build_quadrature_kernel, compile, CellGeometry, EvaluationMode, SecondaryAxis};
use formc::ExecPolicy;
use num_rational::Rational64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TRI: CellShape = CellShape::Triangle;
const TET: CellShape = CellShape::Tetrahedron;

#[test]
fn p2_poisson_reference_tensor_matches_table() {
    let c = compile(&TestCase::Poisson.form(TRI, 2)).unwrap();
    assert_eq!(c.terms.len(), 1);
    let r = &c.terms[0].reference;
    assert_eq!(r.primary_dims, vec![6, 6]);
    assert_eq!(r.secondary_dims(), vec![2, 2]);
    let exact = r.rational.as_ref().expect("entries snap to rationals");
    for i1 in 0..6 {
        for i2 in 0..6 {
            for a in 0..4 {
                let p = (i1 * 6 + i2) * 4 + a;
                let want = A0_P2[i1][i2][a];
                assert_eq!(exact[p] * Rational64::from(6), Rational64::from(want), "({i1},{i2},{a})");
                assert!((6.0 * r.values[p] - want as f64).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn poisson_reference_tensor_is_symmetric_under_joint_swap() {
    for (cell, q) in [(TRI, 3), (TET, 2)] {
        let c = compile(&TestCase::Poisson.form(cell, q)).unwrap();
        let r = &c.terms[0].reference;
        let n = r.primary_dims[0];
        let d = r.secondary_dims()[0];
        let exact = r.rational.as_ref().unwrap();
        for i in 0..n {
            for j in 0..n {
                for a in 0..d {
                    for b in 0..d {
                        let p = ((i * n + j) * d + a) * d + b;
                        let s = ((j * n + i) * d + b) * d + a;
                        assert_eq!(exact[p], exact[s]);
                    }
                }
            }
        }
    }
}

#[test]
fn p1_mass_reference_tensor() {
    let c = compile(&TestCase::Mass.form(TRI, 1)).unwrap();
    let r = &c.terms[0].reference;
    assert_eq!(r.rank(), 2);
    // independent oracle: physical quadrature on the reference cell
    let oracle = physical_element_tensor(TestCase::Mass, ElementSpec::lagrange(TRI, 1), &CellGeometry::reference(2), &[]);
    for i in 0..3 {
        for j in 0..3 {
            let want = if i == j { 2.0 / 24.0 } else { 1.0 / 24.0 };
            assert!((r.values[i * 3 + j] - want).abs() < 1e-15);
            assert!((oracle[i * 3 + j] - want).abs() < 1e-14);
        }
    }
}

#[test]
fn index_counts_of_the_worked_examples() {
    let c = compile(&TestCase::Poisson.form(TRI, 2)).unwrap();
    assert_eq!(c.terms[0].reference.rank(), 4);
    assert_eq!(c.terms[0].geometry.secondary.len(), 2);
    assert_eq!((c.num_entries(), c.geometry_size()), (36, 4));
    assert_eq!(direct_maps(&c), 144);

    // stabilization: dot(mult(grad(v), w), mult(grad(U), w)) on vector P1
    let e = ElementSpec::vector_lagrange(TET, 1);
    let (v, u, w) = (Expr::test(e), Expr::trial(e), Expr::coefficient(0, e, "w"));
    let f = lower(&(dot(&mult(&grad(&v), &w), &mult(&grad(&u), &w)) * DX)).unwrap();
    let c = compile(&f).unwrap();
    assert_eq!(c.terms.len(), 1);
    assert_eq!(c.terms[0].reference.rank(), 8);
    assert_eq!(c.terms[0].geometry.secondary.len(), 6);
    let coef_axes = c.terms[0].reference.secondary.iter().filter(|a| a.is_coefficient()).count();
    assert_eq!(coef_axes, 2);

    let c = compile(&TestCase::Convection.form(TET, 1)).unwrap();
    assert_eq!(c.terms[0].geometry.secondary.len(), 3);
    let kinds: Vec<&str> = c.terms[0]
        .geometry
        .secondary
        .iter()
        .map(|a| match a {
            SecondaryAxis::Reference { .. } => "ref",
            SecondaryAxis::Spatial { .. } => "spatial",
            SecondaryAxis::Coefficient { .. } => "coef",
        })
        .collect();
    assert_eq!(kinds, ["ref", "spatial", "coef"]);

    let c = compile(&TestCase::Mass.form(TET, 1)).unwrap();
    assert_eq!(c.terms[0].geometry.size(), 1);
    assert_eq!(direct_maps(&c), 16);
    let c = compile(&TestCase::Mass.form(TRI, 1)).unwrap();
    assert_eq!(direct_maps(&c), 9);
}

#[test]
fn p1_poisson_on_reference_triangle() {
    let c = compile(&TestCase::Poisson.form(TRI, 1)).unwrap();
    let a = c.element_tensor(&CellGeometry::reference(2), &[], EvaluationMode::MatVec).unwrap();
    let want = [1.0, -0.5, -0.5, -0.5, 0.5, 0.0, -0.5, 0.0, 0.5];
    let oracle = physical_element_tensor(TestCase::Poisson, ElementSpec::lagrange(TRI, 1), &CellGeometry::reference(2), &[]);
    assert!(max_abs_diff(&a, &want) < 1e-15);
    assert!(max_abs_diff(&oracle, &want) < 1e-14);
}

#[test]
fn geometry_tensor_for_identity_and_scaled_cells() {
    let c = compile(&TestCase::Poisson.form(TRI, 1)).unwrap();
    let g = c.geometry_vector(&CellGeometry::reference(2), &[]).unwrap();
    assert_eq!(g, vec![1.0, 0.0, 0.0, 1.0]);
    let h = 0.37;
    let scaled = CellGeometry::new(&[vec![0.0, 0.0], vec![h, 0.0], vec![0.0, h]]).unwrap();
    let gs = c.geometry_vector(&scaled, &[]).unwrap();
    assert!(max_abs_diff(&g, &gs) < 1e-15);
    let m = compile(&TestCase::Mass.form(TRI, 1)).unwrap();
    assert_eq!(m.geometry_vector(&scaled, &[]).unwrap(), vec![h * h]);
}

#[test]
fn geometry_tensor_matches_finite_difference_jacobian() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let c = compile(&TestCase::Poisson.form(TRI, 1)).unwrap();
    for _ in 0..20 {
        let geom = random_cell(&mut rng, 2);
        // F' by central differences of the affine map, then invert by hand
        let h = 1e-4;
        let mut jac = [[0.0; 2]; 2];
        for c in 0..2 {
            let mut xp = vec![0.3, 0.3];
            let mut xm = xp.clone();
            xp[c] += h;
            xm[c] -= h;
            let (fp, fm) = (geom.map(&xp), geom.map(&xm));
            for r in 0..2 {
                jac[r][c] = (fp[r] - fm[r]) / (2.0 * h);
            }
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let k = [[jac[1][1] / det, -jac[0][1] / det], [-jac[1][0] / det, jac[0][0] / det]];
        let mut want = [0.0; 4];
        for a in 0..2 {
            for b in 0..2 {
                want[a * 2 + b] = det.abs() * (0..2).map(|s| k[a][s] * k[b][s]).sum::<f64>();
            }
        }
        let g = c.geometry_vector(&geom, &[]).unwrap();
        assert!(max_abs_diff(&g, &want) < 1e-9);
    }
}

#[test]
fn affine_and_quadrature_paths_agree_with_physical_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in ALL_CASES {
        for cell in [TRI, TET] {
            let dim = cell.dim();
            let degrees: &[usize] = if matches!(case, TestCase::Mass | TestCase::Poisson) { &[1, 2, 3] } else { &[1, 2] };
            for &q in degrees {
                let form = case.form(cell, q);
                let c = compile(&form).unwrap();
                let qk = build_quadrature_kernel(&form, None, ExecPolicy::Sequential).unwrap();
                let spec = case.element(cell, q);
                for _ in 0..3 {
                    let geom = random_cell(&mut rng, dim);
                    let coefs: Vec<Vec<f64>> = (0..case.num_coefficients())
                        .map(|_| random_vector(&mut rng, spec.dimension()))
                        .collect();
                    let a = c.element_tensor(&geom, &coefs, EvaluationMode::MatVec).unwrap();
                    let b = c.element_tensor(&geom, &coefs, EvaluationMode::Direct).unwrap();
                    let aq = qk.element_tensor(&geom, &coefs).unwrap();
                    let o = physical_element_tensor(case, spec, &geom, &coefs);
                    let scale = max_abs(&o).max(1.0);
                    assert!(max_abs_diff(&a, &o) < 1e-10 * scale, "{case:?} {cell} q={q}");
                    assert!(max_abs_diff(&a, &b) < 1e-12 * scale);
                    assert!(max_abs_diff(&a, &aq) < 1e-10 * scale);
                }
            }
        }
    }
}

#[test]
fn translation_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let c = compile(&TestCase::Strain.form(TET, 1)).unwrap();
    let geom = random_cell(&mut rng, 3);
    let shifted: Vec<Vec<f64>> = geom.vertices.iter().map(|v| v.iter().map(|x| x + 5.25).collect()).collect();
    let g2 = CellGeometry::new(&shifted).unwrap();
    let a = c.element_tensor(&geom, &[], EvaluationMode::MatVec).unwrap();
    let b = c.element_tensor(&g2, &[], EvaluationMode::MatVec).unwrap();
    assert!(max_abs_diff(&a, &b) < 1e-12);
}

#[test]
fn two_dimensional_poisson_is_scale_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let c = compile(&TestCase::Poisson.form(TRI, 2)).unwrap();
    for _ in 0..10 {
        let geom = random_cell(&mut rng, 2);
        let s = 0.125;
        let scaled: Vec<Vec<f64>> = geom.vertices.iter().map(|v| v.iter().map(|x| x * s).collect()).collect();
        let a = c.element_tensor(&geom, &[], EvaluationMode::MatVec).unwrap();
        let b = c.element_tensor(&CellGeometry::new(&scaled).unwrap(), &[], EvaluationMode::MatVec).unwrap();
        assert!(max_abs_diff(&a, &b) < 1e-12 * max_abs(&a));
    }
}

#[test]
fn convection_is_linear_in_the_coefficient() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let c = compile(&TestCase::Convection.form(TRI, 2)).unwrap();
    let n = ElementSpec::vector_lagrange(TRI, 2).dimension();
    let geom = random_cell(&mut rng, 2);
    let (w1, w2) = (random_vector(&mut rng, n), random_vector(&mut rng, n));
    let (s, t) = (1.5, -0.25);
    let mix: Vec<f64> = w1.iter().zip(&w2).map(|(a, b)| s * a + t * b).collect();
    let a1 = c.element_tensor(&geom, &[w1], EvaluationMode::MatVec).unwrap();
    let a2 = c.element_tensor(&geom, &[w2], EvaluationMode::MatVec).unwrap();
    let am = c.element_tensor(&geom, &[mix], EvaluationMode::MatVec).unwrap();
    let lin: Vec<f64> = a1.iter().zip(&a2).map(|(a, b)| s * a + t * b).collect();
    assert!(max_abs_diff(&am, &lin) < 1e-12);
}

#[test]
fn batched_matches_per_cell() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let c = compile(&TestCase::Poisson.form(TET, 2)).unwrap();
    let gs: Vec<Vec<f64>> = (0..17).map(|_| c.geometry_vector(&random_cell(&mut rng, 3), &[]).unwrap()).collect();
    let batch = c.kernel.matmat(&gs);
    for (g, a) in gs.iter().zip(&batch) {
        assert_eq!(&c.kernel.matvec(g), a);
    }
}

#[test]
fn zero_geometry_gives_zero_tensor() {
    let c = compile(&TestCase::Strain.form(TRI, 2)).unwrap();
    let a = c.kernel.matvec(&vec![0.0; c.geometry_size()]);
    assert!(a.iter().all(|&x| x == 0.0));
}

#[test]
fn p0_mass_is_cell_volume() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let e = ElementSpec::discontinuous(TET, 0);
    let f = lower(&(Expr::test(e) * Expr::trial(e) * DX)).unwrap();
    let c = compile(&f).unwrap();
    let qk = build_quadrature_kernel(&f, Some(0), ExecPolicy::Sequential).unwrap();
    let geom = random_cell(&mut rng, 3);
    let a = c.element_tensor(&geom, &[], EvaluationMode::MatVec).unwrap();
    assert!((a[0] - geom.volume()).abs() < 1e-14);
    assert!((qk.element_tensor(&geom, &[]).unwrap()[0] - geom.volume()).abs() < 1e-14);
}

#[test]
fn quadrature_model_exceeds_tensor_model_for_p3_poisson_3d() {
    let form = TestCase::Poisson.form(TET, 3);
    let c = compile(&form).unwrap();
    let qk = build_quadrature_kernel(&form, None, ExecPolicy::Sequential).unwrap();
    let quad = quadrature_model(&form, qk.num_points());
    assert!(quad.leading as f64 / direct_maps(&c) as f64 >= 1.0);
    assert!(quad.full > quad.leading);
}

#[test]
fn missing_coefficient_is_reported() {
    let c = compile(&TestCase::Convection.form(TRI, 1)).unwrap();
    let err = c.geometry_vector(&CellGeometry::reference(2), &[]).unwrap_err();
    assert!(matches!(err, formc::Error::MissingCoefficient(_)));
    let err = c.geometry_vector(&CellGeometry::reference(2), &[vec![1.0; 2]]).unwrap_err();
    assert!(matches!(err, formc::Error::MissingCoefficient(_)));
}

#[test]
fn cell_of_the_wrong_dimension_is_rejected() {
    let form = TestCase::Poisson.form(TRI, 1);
    let c = compile(&form).unwrap();
    let qk = build_quadrature_kernel(&form, None, ExecPolicy::Sequential).unwrap();
    let tet = CellGeometry::reference(3);
    assert!(matches!(c.element_tensor(&tet, &[], EvaluationMode::MatVec), Err(formc::Error::CellMismatch { .. })));
    assert!(matches!(qk.element_tensor(&tet, &[]), Err(formc::Error::CellMismatch { .. })));
}

#[test]
fn degenerate_cell_is_rejected() {
    let err = CellGeometry::new(&[vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap_err();
    assert!(matches!(err, formc::Error::DegenerateCell(_)));
}

#[test]
fn parallel_and_sequential_compilation_agree() {
    let form = TestCase::Strain.form(TET, 2);
    let a = formc::tensor::compile_with(&form, ExecPolicy::Parallel).unwrap();
    let b = formc::tensor::compile_with(&form, ExecPolicy::Sequential).unwrap();
    assert_eq!(a.kernel, b.kernel);
}

#[test]
fn latex_lists_every_entry() {
    let c = compile(&TestCase::Mass.form(TRI, 1)).unwrap();
    let tex = formc::tensor::latex::render(&c);
    assert!(tex.contains("\\frac{1}{12}"));
    assert!(tex.contains("\\frac{1}{24}"));
    assert_eq!(tex.matches("$a^0_{").count(), 9);
}

#[test]
fn geometry_formula_for_poisson() {
    let c = compile(&TestCase::Poisson.form(TRI, 1)).unwrap();
    let f = c.terms[0].geometry.formula();
    assert_eq!(f, "G[a0,a1] = det F' * sum_{b0} dX_a0/dx_b0 dX_a1/dx_b0");
}
