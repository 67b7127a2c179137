pub mod batch;
pub mod fairness;
pub mod geo;
pub mod ingest;
pub mod learning;
pub mod pipeline;
pub mod scoring;
pub mod service;
pub mod streams;
pub mod synthetic;
pub mod text_it;
