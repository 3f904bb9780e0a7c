//! Open-domain dialogue engine.

pub mod kg;
pub mod nlu;
pub mod text;
pub mod candidate;
pub mod memory;
pub mod retrieval;
pub mod flow;
pub mod ranker;
pub mod config;
pub mod modules;
pub mod postprocess;
pub mod resources;
pub mod engine;
pub mod http;
