//! Weighted Jacobi operator toolkit for closed triangle meshes in
//! density-weighted Euclidean space.

pub mod ambient;
pub mod bounds;
pub mod cli;
pub mod config;
pub mod immersion;
pub mod linalg;
pub mod mesh;
pub mod operators;
pub mod par;
pub mod report;
pub mod spectrum;
