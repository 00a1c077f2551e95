//! Core numerics for learning continuous-time PDE dynamics on unstructured
//! point sets.
//!
//! The state at `N` measurement positions is advanced by a coupled ODE system
//! whose right-hand side is a message-passing network over the Delaunay graph
//! of the positions. This crate holds everything that does not touch the
//! filesystem or the clock:
//!
//! - [`geometry`]: Bowyer–Watson Delaunay triangulation and the neighbor graph.
//! - [`nn`]: dense tanh MLPs with hand-written vector-Jacobian products, and Rprop.
//! - [`mpnn`]: the learned differential and its VJPs.
//! - [`odeint`]: Euler/RK4/Dormand–Prince integration, adjoint and backprop gradients.
//! - [`datagen`]: random Fourier initial conditions, finite-difference reference
//!   solvers and the sampling/perturbation pipeline.
//! - [`metrics`]: MSE loss and relative error.
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature. All transcendental functions go through `libm`, so results do not
//! depend on the platform C library.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod datagen;
mod error;
pub mod geometry;
pub mod metrics;
pub mod mpnn;
pub mod nn;
pub mod odeint;

pub use error::{Error, Result};
