pub mod cli;
pub mod infer;
pub mod lang;
pub mod lm;
pub mod metrics;
pub mod olympics;
pub mod seed;
pub mod synthesis;
