//! Optimization of `A^K = A0 : G_K` into a straight-line schedule: symmetry
//! reduction, complexity-reducing relations between the rows of the
//! flattened reference tensor, and a minimum spanning tree over them.

pub mod mst;
pub mod reduce;
pub mod relation;
pub mod schedule;

pub use mst::{minimum_spanning_tree, Edge, SpanningTree};
pub use reduce::{detect_output_symmetry, flatten_and_reduce, ContractionVectors};
pub use relation::{relation, weight, Relation};
pub use schedule::{emit_schedule, verify_schedule, EvaluationSchedule, MapCertificate, Operation, VerificationReport};

use crate::par::ExecPolicy;
use crate::tensor::CompiledForm;
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OptimizeOptions {
    pub symmetric_output: bool,
    pub symmetric_geometry: bool,
    pub policy: ExecPolicy,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions {
            symmetric_output: false,
            symmetric_geometry: true,
            policy: ExecPolicy::default(),
        }
    }
}

impl OptimizeOptions {
    /// Defaults, with output symmetry switched on when the element tensor is
    /// found symmetric on sample cells.
    pub fn detect(compiled: &CompiledForm, policy: ExecPolicy) -> Result<Self> {
        Ok(OptimizeOptions {
            symmetric_output: detect_output_symmetry(compiled)?,
            symmetric_geometry: true,
            policy,
        })
    }
}

/// Reduce, build the spanning tree and emit the schedule.
pub fn optimize(compiled: &CompiledForm, options: OptimizeOptions) -> Result<EvaluationSchedule> {
    let vectors = flatten_and_reduce(compiled, options.symmetric_output, options.symmetric_geometry)?;
    let tree = minimum_spanning_tree(&vectors, options.policy);
    Ok(emit_schedule(&vectors, &tree))
}
