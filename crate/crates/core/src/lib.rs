//! Analytic engine, optimizer and Monte Carlo oracle for the sense-and-predict
//! cognitive-radio MAC over Poisson networks.

pub mod analytic;
pub mod cli;
pub mod error;
pub mod model;
pub mod numerics;
pub mod optimizer;
pub mod simulator;
