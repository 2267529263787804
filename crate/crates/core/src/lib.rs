//! Finite-dimensional models of noncommutative covering projections.

#![allow(clippy::needless_range_loop)]

pub mod action;
pub mod circle;
pub mod connections;
pub mod dixmier;
pub mod error;
pub mod frames;
pub mod linalg;
pub mod torus;

pub use error::{Error, Result};
