pub mod graph;
pub mod model;
pub mod patterns;
pub mod session;
pub mod analysis;
pub mod service;
