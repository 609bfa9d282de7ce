#![no_std]
extern crate alloc;

pub mod axioms;
pub mod calibration;
pub mod distributions;
pub mod dynamic;
pub mod error;
pub mod markov;
pub mod numeric;
pub mod rng;
pub mod scenario;
pub mod static_risk;

pub use distributions::{DiscreteDistribution, EmpiricalSample, GaussianParams, ReturnModel, WeibullParams};
pub use error::{Result, RiskError};
