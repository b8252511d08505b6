pub mod audio;
pub mod distance;
pub mod encoder;
pub mod harness;
pub mod metrics;
pub mod seed;
pub mod synth;
pub mod transform;

#[cfg(test)]
mod testutil;
