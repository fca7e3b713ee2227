pub mod dataset;
pub mod imaging;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod synth;
pub mod transforms;
