//! Nestline packs irregular polygonal pieces onto a fixed-width strip,
//! minimizing the used length. Pieces rotate freely.
//!
//! The pipeline has two stages. A raster bottom-left heuristic builds feasible
//! axis-aligned layouts from many random insertion orders ([`seeding`]). The
//! best layouts then seed a smooth nonlinear program in which every pair of
//! convex parts from different pieces is kept apart by its own movable
//! separation line ([`model`]); an augmented Lagrangian method with a
//! projected quasi-Newton inner loop drives it to a local optimum
//! ([`solver`]).

pub mod geometry;
pub mod instance;
pub mod model;
pub mod report;
pub mod seeding;
pub mod solver;
pub mod svg;

pub use geometry::{Piece, Placement, Point};
pub use instance::NestingInstance;
