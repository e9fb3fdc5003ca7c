//! Global assembly: element tensors are computed in parallel over blocks of
//! cells, then scattered into the global tensor sequentially.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::dofmap::DofMap;
use super::function::CoefficientFunction;
use super::mesh::SimplicialMesh;
use super::sparse::CsrMatrix;
use crate::opt::EvaluationSchedule;
use crate::par::{self, ExecPolicy};
use crate::tensor::{build_quadrature_kernel, compile_with, CompiledForm, QuadratureKernel};
use crate::{Error, Result};

/// How element tensors are evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssemblyMode {
    /// Flattened `A0 g_K` product.
    #[default]
    Tensor,
    /// Runtime quadrature over reference tabulations.
    Quadrature,
    /// The optimized straight-line schedule.
    Schedule,
}

impl AssemblyMode {
    pub const ALL: [AssemblyMode; 3] = [AssemblyMode::Tensor, AssemblyMode::Quadrature, AssemblyMode::Schedule];

    pub fn name(self) -> &'static str {
        match self {
            AssemblyMode::Tensor => "tensor",
            AssemblyMode::Quadrature => "quadrature",
            AssemblyMode::Schedule => "schedule",
        }
    }
}

impl FromStr for AssemblyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AssemblyMode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Format(format!("unknown assembly mode '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AssemblyOptions {
    pub mode: AssemblyMode,
    pub policy: ExecPolicy,
    /// Cells whose element tensors are held at once before scattering.
    pub block_size: usize,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        AssemblyOptions {
            mode: AssemblyMode::Tensor,
            policy: ExecPolicy::default(),
            block_size: 2048,
        }
    }
}

impl AssemblyOptions {
    pub fn mode(mode: AssemblyMode) -> Self {
        AssemblyOptions { mode, ..Default::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GlobalTensor {
    Scalar(f64),
    Vector(Vec<f64>),
    Matrix(CsrMatrix),
}

impl GlobalTensor {
    pub fn rank(&self) -> usize {
        match self {
            GlobalTensor::Scalar(_) => 0,
            GlobalTensor::Vector(_) => 1,
            GlobalTensor::Matrix(_) => 2,
        }
    }

    pub fn into_matrix(self) -> Result<CsrMatrix> {
        match self {
            GlobalTensor::Matrix(m) => Ok(m),
            other => Err(Error::IncompatibleShapes(format!("expected a matrix, got rank {}", other.rank()))),
        }
    }

    pub fn into_vector(self) -> Result<Vec<f64>> {
        match self {
            GlobalTensor::Vector(v) => Ok(v),
            other => Err(Error::IncompatibleShapes(format!("expected a vector, got rank {}", other.rank()))),
        }
    }

    pub fn into_scalar(self) -> Result<f64> {
        match self {
            GlobalTensor::Scalar(s) => Ok(s),
            other => Err(Error::IncompatibleShapes(format!("expected a scalar, got rank {}", other.rank()))),
        }
    }
}

enum Evaluator<'a> {
    Tensor(&'a CompiledForm),
    Quadrature(QuadratureKernel),
    Schedule(&'a CompiledForm, &'a EvaluationSchedule),
}

impl Evaluator<'_> {
    fn element_tensor(&self, mesh: &SimplicialMesh, cell: usize, coefficients: &[&CoefficientFunction]) -> Result<Vec<f64>> {
        let geom = mesh.cell_geometry(cell)?;
        let coefs: Vec<Vec<f64>> = coefficients.iter().map(|f| f.restrict(cell)).collect();
        match self {
            Evaluator::Tensor(c) => Ok(c.kernel.matvec(&c.geometry_vector(&geom, &coefs)?)),
            Evaluator::Quadrature(q) => q.element_tensor(&geom, &coefs),
            Evaluator::Schedule(c, s) => Ok(s.evaluate(&c.geometry_vector(&geom, &coefs)?)),
        }
    }
}

fn check_inputs(
    compiled: &CompiledForm,
    mesh: &SimplicialMesh,
    dofmaps: &[&DofMap],
    coefficients: &[&CoefficientFunction],
) -> Result<()> {
    let form = &compiled.form;
    if form.cell != mesh.shape() {
        return Err(Error::CellMismatch {
            element: form.cell.to_string(),
            mesh: mesh.shape().to_string(),
        });
    }
    if dofmaps.len() != form.arity() {
        return Err(Error::IncompatibleShapes(format!(
            "{} dof maps for a form of arity {}",
            dofmaps.len(),
            form.arity()
        )));
    }
    for (j, (dm, arg)) in dofmaps.iter().zip(&form.arguments).enumerate() {
        if dm.spec.element != arg.element || dm.num_cells() != mesh.num_cells() {
            return Err(Error::IncompatibleShapes(format!(
                "dof map {j} is for {} on {} cells, argument '{}' needs {}",
                dm.spec.element.tag(),
                dm.num_cells(),
                arg.name,
                arg.element.tag()
            )));
        }
    }
    if coefficients.len() < form.coefficients.len() {
        return Err(Error::MissingCoefficient(form.coefficients[coefficients.len()].name.clone()));
    }
    if coefficients.len() > form.coefficients.len() {
        return Err(Error::IncompatibleShapes(format!(
            "{} coefficients given, form declares {}",
            coefficients.len(),
            form.coefficients.len()
        )));
    }
    for (f, info) in coefficients.iter().zip(&form.coefficients) {
        if f.dofmap.spec.element != info.element || f.dofmap.num_cells() != mesh.num_cells() {
            return Err(Error::IncompatibleShapes(format!(
                "coefficient '{}' needs {}, got {}",
                info.name,
                info.element.tag(),
                f.dofmap.spec.element.tag()
            )));
        }
    }
    Ok(())
}

/// Assemble the global tensor of a compiled form over `mesh`.
///
/// `dofmaps[j]` numbers the dofs of argument `j`; `coefficients[c]` supplies
/// the `c`-th declared coefficient. The `schedule` is only needed for
/// [`AssemblyMode::Schedule`].
pub fn assemble(
    compiled: &CompiledForm,
    schedule: Option<&EvaluationSchedule>,
    mesh: &SimplicialMesh,
    dofmaps: &[&DofMap],
    coefficients: &[&CoefficientFunction],
    options: &AssemblyOptions,
) -> Result<GlobalTensor> {
    check_inputs(compiled, mesh, dofmaps, coefficients)?;
    let evaluator = match options.mode {
        AssemblyMode::Tensor => Evaluator::Tensor(compiled),
        AssemblyMode::Quadrature => {
            Evaluator::Quadrature(build_quadrature_kernel(&compiled.form, None, options.policy)?)
        }
        AssemblyMode::Schedule => {
            let s = schedule.ok_or(Error::NoSchedule)?;
            if s.rows != compiled.num_entries() || s.geometry_len != compiled.geometry_size() {
                return Err(Error::IncompatibleShapes("schedule does not belong to this form".into()));
            }
            Evaluator::Schedule(compiled, s)
        }
    };
    let mut out = match compiled.arity() {
        0 => GlobalTensor::Scalar(0.0),
        1 => GlobalTensor::Vector(vec![0.0; dofmaps[0].num_dofs]),
        2 => GlobalTensor::Matrix(CsrMatrix::from_dofmaps(dofmaps[0], dofmaps[1])),
        r => return Err(Error::IncompatibleShapes(format!("assembly of arity {r} forms"))),
    };
    let block = options.block_size.max(1);
    let ncells = mesh.num_cells();
    let mut start = 0;
    while start < ncells {
        let len = block.min(ncells - start);
        let tensors = par::map_range(options.policy, len, |k| {
            evaluator.element_tensor(mesh, start + k, coefficients)
        });
        for (k, ae) in tensors.into_iter().enumerate() {
            let ae = ae?;
            let c = start + k;
            match &mut out {
                GlobalTensor::Scalar(s) => *s += ae[0],
                GlobalTensor::Vector(v) => {
                    for (&i, a) in dofmaps[0].cell_dofs(c).iter().zip(&ae) {
                        v[i] += a;
                    }
                }
                GlobalTensor::Matrix(m) => {
                    let rows = dofmaps[0].cell_dofs(c);
                    let cols = dofmaps[1].cell_dofs(c);
                    let n1 = cols.len();
                    for (a, &i) in rows.iter().enumerate() {
                        for (b, &j) in cols.iter().enumerate() {
                            m.add(i, j, ae[a * n1 + b]);
                        }
                    }
                }
            }
        }
        start += len;
    }
    Ok(out)
}

/// Assemble the action of a bilinear form on `u`: the vector `A u`, computed
/// from the linear form obtained by turning the trial function into a
/// coefficient.
pub fn assemble_action(
    bilinear: &CompiledForm,
    mesh: &SimplicialMesh,
    test: &DofMap,
    coefficients: &[&CoefficientFunction],
    u: Option<&CoefficientFunction>,
    options: &AssemblyOptions,
) -> Result<Vec<f64>> {
    if bilinear.arity() != 2 {
        return Err(Error::IncompatibleShapes(format!(
            "action of a form of arity {}",
            bilinear.arity()
        )));
    }
    let u = u.ok_or_else(|| Error::MissingCoefficient(bilinear.form.arguments[1].name.clone()))?;
    let action = compile_with(&bilinear.form.action()?, options.policy)?;
    let mut all: Vec<&CoefficientFunction> = coefficients.to_vec();
    all.push(u);
    let mut opts = *options;
    if opts.mode == AssemblyMode::Schedule {
        opts.mode = AssemblyMode::Tensor;
    }
    assemble(&action, None, mesh, &[test], &all, &opts)?.into_vector()
}
