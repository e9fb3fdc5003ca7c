//! Reference cells, prime and nodal bases, and quadrature.

pub mod cell;
pub mod constrained;
pub mod jet;
pub mod nodal;
pub mod prime;
pub mod quadrature;

pub use cell::{CellShape, ReferenceCell};
pub use constrained::{constrain, Constraint};
pub use nodal::{build_nodal_basis, element, ElementFamily, ElementSpec, NodalBasis, NodeSet, Tabulation};
pub use prime::{build_prime_basis, polynomial_dimension, PrimeBasis, MAX_DEGREE};
pub use quadrature::{make_quadrature, QuadratureRule};
