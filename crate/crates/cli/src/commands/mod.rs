pub mod evaluate;
pub mod features;
pub mod report;
pub mod route;
pub mod stats;
pub mod synth;
pub mod train;
pub mod validate;
