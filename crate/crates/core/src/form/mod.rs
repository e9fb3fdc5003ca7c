//! Form language, canonical monomial form, and the form-file parser.

pub mod canonical;
pub mod expr;
pub mod parser;

pub use canonical::{
    lower, BasisIndex, BoundIndex, BoundKind, CanonicalFactor, CanonicalForm, FunctionInfo, FunctionSlot,
    IndexValue, Monomial,
};
pub use expr::{abs, deriv, div, dot, grad, inner, mult, trace, transp, Expr, Form, Index, IndexTerm, Measure, DX};
pub use parser::{parse_form_file, FormFile};
