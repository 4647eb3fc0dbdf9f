//! Standing waves of the defocusing nonlinear Schrödinger equation with a point
//! interaction at the origin, in two and three dimensions.

pub mod error;
pub mod evolution;
pub mod field;
pub mod form;
pub mod grid;
pub mod groundstate;
pub mod io;
pub mod linalg;
pub mod ode;
pub mod optim;
pub mod origin;
pub mod quadrature;
pub mod special;
pub mod verify;

pub use error::{Error, Result};
pub use field::{radial_gradient_norm_sq, radial_gradient_norm_sq_with, DecomposedField, TailBound, Truncated, C64};
pub use form::{Cogradient, Discretization, FormEvaluation};
pub use grid::{build_grid, build_grid_with_shape, GridSpec, RadialGrid};
pub use special::{Dim, InteractionParams};
