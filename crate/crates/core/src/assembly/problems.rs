//! Ready-made forms and the demo problems: Poisson with a manufactured
//! solution and static linear elasticity on a box.

use std::f64::consts::PI;
use std::sync::Arc;

use super::assemble::{assemble, AssemblyMode, AssemblyOptions};
use super::bc::DirichletBc;
use super::dofmap::generate_dofmap;
use super::function::CoefficientFunction;
use super::mesh::{box_mesh, unit_cube, unit_square, SimplicialMesh};
use super::sparse::{solve_cg, CgOptions, CsrMatrix};
use crate::fiat::{CellShape, ElementSpec};
use crate::form::{dot, grad, lower, mult, trace, transp, CanonicalForm, Expr, DX};
use crate::opt::{optimize, EvaluationSchedule, OptimizeOptions};
use crate::tensor::{compile_with, CompiledForm};
use crate::Result;

pub fn mass_form(spec: ElementSpec) -> Result<CanonicalForm> {
    let (v, u) = (Expr::test(spec), Expr::trial(spec));
    lower(&(dot(&v, &u) * DX))
}

pub fn poisson_form(spec: ElementSpec) -> Result<CanonicalForm> {
    let (v, u) = (Expr::test(spec), Expr::trial(spec));
    lower(&(dot(&grad(&v), &grad(&u)) * DX))
}

/// `L(v) = int v . f dx` with `f` a coefficient in the same space.
pub fn source_form(spec: ElementSpec) -> Result<CanonicalForm> {
    let v = Expr::test(spec);
    let f = Expr::coefficient(0, spec, "f");
    lower(&(dot(&v, &f) * DX))
}

/// `a(v, U) = int grad v : sigma(U) dx` for an isotropic material.
pub fn elasticity_form(spec: ElementSpec, young: f64, poisson_ratio: f64) -> Result<CanonicalForm> {
    let mu = young / (2.0 * (1.0 + poisson_ratio));
    let lmbda = young * poisson_ratio / ((1.0 + poisson_ratio) * (1.0 - 2.0 * poisson_ratio));
    let d = spec.cell.dim();
    let (v, u) = (Expr::test(spec), Expr::trial(spec));
    let eps = |x: &Expr| 0.5 * (grad(x) + transp(&grad(x)));
    let sigma = 2.0 * mu * eps(&u) + lmbda * mult(&trace(&eps(&u)), &Expr::identity(d));
    lower(&(dot(&grad(&v), &sigma) * DX))
}

fn compile_for(form: &CanonicalForm, options: &AssemblyOptions) -> Result<(CompiledForm, Option<EvaluationSchedule>)> {
    let compiled = compile_with(form, options.policy)?;
    let schedule = if options.mode == AssemblyMode::Schedule {
        Some(optimize(&compiled, OptimizeOptions::detect(&compiled, options.policy)?)?)
    } else {
        None
    };
    Ok((compiled, schedule))
}

#[derive(Clone, Debug)]
pub struct PoissonSolution {
    pub mesh: SimplicialMesh,
    pub u: CoefficientFunction,
    pub l2_error: f64,
    pub cg_iterations: usize,
    pub relative_residual: f64,
}

/// Exact solution `prod_k sin(pi x_k)`.
pub fn manufactured_solution(x: &[f64]) -> f64 {
    x.iter().map(|&xi| (PI * xi).sin()).product()
}

/// Solve `-lap u = f` on the unit square (or cube) with `n` subdivisions per
/// side, `u = 0` on the boundary and `f` chosen so that
/// [`manufactured_solution`] is exact.
pub fn solve_poisson(dim: usize, n: usize, degree: usize, options: &AssemblyOptions, rtol: f64) -> Result<PoissonSolution> {
    let (mesh, cell) = match dim {
        2 => (unit_square(n)?, CellShape::Triangle),
        _ => (unit_cube(n)?, CellShape::Tetrahedron),
    };
    let spec = ElementSpec::lagrange(cell, degree);
    let dofmap = Arc::new(generate_dofmap(spec, &mesh)?);
    let scale = dim as f64 * PI * PI;
    let f = CoefficientFunction::interpolate(dofmap.clone(), &mesh, |x, _| scale * manufactured_solution(x))?;
    let (a_form, a_sched) = compile_for(&poisson_form(spec)?, options)?;
    let (l_form, l_sched) = compile_for(&source_form(spec)?, options)?;
    let mut a = assemble(&a_form, a_sched.as_ref(), &mesh, &[&dofmap, &dofmap], &[], options)?.into_matrix()?;
    let mut b = assemble(&l_form, l_sched.as_ref(), &mesh, &[&dofmap], &[&f], options)?.into_vector()?;
    let bc = DirichletBc::new(&dofmap, &mesh, |_| true, |_, _| 0.0)?;
    bc.apply(&mut a, &mut b, true)?;
    let sol = solve_cg(
        &a,
        &b,
        CgOptions {
            rtol,
            policy: options.policy,
            ..Default::default()
        },
    )?;
    let u = CoefficientFunction::new(dofmap, sol.x)?;
    let l2_error = u.l2_error(&mesh, |x, _| manufactured_solution(x), 2 * degree + 4)?;
    Ok(PoissonSolution {
        mesh,
        u,
        l2_error,
        cg_iterations: sol.iterations,
        relative_residual: sol.relative_residual,
    })
}

#[derive(Clone, Debug)]
pub struct ElasticitySolution {
    pub mesh: SimplicialMesh,
    pub stiffness: CsrMatrix,
    pub displacement: CoefficientFunction,
    pub cg_iterations: usize,
    pub max_displacement: f64,
}

/// A beam `[0, L] x [0, 1] x [0, 1]` clamped at both ends and loaded by its
/// own weight, discretized with vector P1 (or higher) elements.
pub fn solve_elasticity(length: f64, n: [usize; 3], degree: usize, options: &AssemblyOptions) -> Result<ElasticitySolution> {
    let mesh = box_mesh([length, 1.0, 1.0], n)?;
    let spec = ElementSpec::vector_lagrange(CellShape::Tetrahedron, degree);
    let dofmap = Arc::new(generate_dofmap(spec, &mesh)?);
    let (a_form, a_sched) = compile_for(&elasticity_form(spec, 10.0, 0.3)?, options)?;
    let (l_form, l_sched) = compile_for(&source_form(spec)?, options)?;
    let gravity = CoefficientFunction::interpolate(dofmap.clone(), &mesh, |_, c| if c == 2 { -1.0 } else { 0.0 })?;
    let stiffness = assemble(&a_form, a_sched.as_ref(), &mesh, &[&dofmap, &dofmap], &[], options)?.into_matrix()?;
    let mut a = stiffness.clone();
    let mut b = assemble(&l_form, l_sched.as_ref(), &mesh, &[&dofmap], &[&gravity], options)?.into_vector()?;
    let tol = 1e-12 * length;
    let bc = DirichletBc::new(&dofmap, &mesh, |x| x[0] < tol || x[0] > length - tol, |_, _| 0.0)?;
    bc.apply(&mut a, &mut b, true)?;
    let sol = solve_cg(
        &a,
        &b,
        CgOptions {
            rtol: 1e-10,
            policy: options.policy,
            ..Default::default()
        },
    )?;
    let max_displacement = sol.x.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(ElasticitySolution {
        mesh,
        stiffness,
        displacement: CoefficientFunction::new(dofmap, sol.x)?,
        cg_iterations: sol.iterations,
        max_displacement,
    })
}
