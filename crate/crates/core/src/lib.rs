//! Variational geometric information bottleneck toolkit.
//!
//! Stochastic bottleneck encoders trained with an information term, a KL
//! compression term and an input-Jacobian curvature penalty, together with
//! the estimators used to analyse them (Hutchinson curvature probes,
//! participation-ratio and nearest-neighbour intrinsic dimension, plug-in
//! mutual information) and an experiment harness for sweeps, Pareto
//! frontiers and efficiency analytics.

pub mod autodiff;
pub mod data;
pub mod geometry;
pub mod harness;
pub mod infometrics;
pub mod nets;
