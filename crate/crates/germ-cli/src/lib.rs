//! Problem-file parsing, pipeline orchestration
//! (decompose -> certify -> verify higher order -> solve -> report),
//! and report emission for the germ solver.

pub mod parse;
pub mod pipeline;
pub mod problem;
pub mod report;
