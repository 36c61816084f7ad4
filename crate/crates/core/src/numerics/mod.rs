//! Small numerical building blocks shared by the geometry and Laplace code.

pub mod fd;
pub mod linalg;
pub mod quad;
