//! Tensor representation `A^K = A0 : G_K` of compiled forms.

pub mod flops;
pub mod geometry;
pub mod kernel;
pub mod latex;
pub mod layout;
pub mod plan;
pub mod quadrature;
pub mod reference;

pub use geometry::CellGeometry;
pub use kernel::{compile, compile_with, CompiledForm, CompiledTerm, EvaluationMode, FlattenedKernel};
pub use layout::SecondaryAxis;
pub use plan::{GeometryTerm, JacobianFactor, SpatialIndex};
pub use quadrature::{build_quadrature_kernel, QuadratureKernel};
pub use reference::ReferenceTerm;
