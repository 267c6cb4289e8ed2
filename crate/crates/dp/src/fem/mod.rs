//! P1 finite elements on simplicial meshes: meshes, quadrature, nodal
//! fields, integration, and Dirichlet handling.

pub mod field;
pub mod io;
pub mod mesh;
pub mod quadrature;

pub use field::{integrate, DiscreteField};
pub use mesh::{BoxDomain, DofMap, Mesh};
pub use quadrature::{QuadratureRule, DEFAULT_DEGREE};
