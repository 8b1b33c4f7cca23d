//! Secant/tangent span machinery for cubic hypersurfaces over ℚ, together
//! with second fundamental form and Hessian classifiers and a certified
//! Newton–Kantorovich solver for smooth real points.

pub mod forms;
pub mod geometry;
pub mod io;
pub mod cli;
pub mod newton;
pub mod span;
