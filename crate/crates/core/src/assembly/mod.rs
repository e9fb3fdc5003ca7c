//! Meshes, dof maps, global assembly and a small linear-algebra layer.

pub mod assemble;
pub mod bc;
pub mod dofmap;
pub mod function;
pub mod io;
pub mod mesh;
pub mod problems;
pub mod sparse;

pub use assemble::{assemble, assemble_action, AssemblyMode, AssemblyOptions, GlobalTensor};
pub use bc::DirichletBc;
pub use dofmap::{generate_dofmap, DofMap, DofMapSpec};
pub use function::CoefficientFunction;
pub use mesh::{box_mesh, unit_cube, unit_interval, unit_square, SimplicialMesh};
pub use sparse::{solve_cg, CgOptions, CgSolution, CsrMatrix};
