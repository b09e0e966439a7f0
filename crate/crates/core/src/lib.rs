//! Neural gas synthesis of BVH body-motion clips, with kinematic features,
//! generative-quality metrics and a random-forest evaluation harness.

pub mod bvh;
pub mod motion;
pub mod seed;
pub mod ngn;
pub mod features;
pub mod metrics;
pub mod classify;
pub mod experiment;
pub mod toy;
pub mod cli;
