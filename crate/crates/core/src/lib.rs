//! Spectral geometry of adiabatically modulated periodic Schrödinger
//! operators on the line.
//!
//! The operator family is -d^2/dx^2 + V(x - z) + W(eps x) with V 1-periodic
//! and W 2 pi periodic. The crate computes, for the unperturbed periodic
//! part, transfer matrices, the discriminant, band edges and the Bloch
//! quasi-momentum; for the slow geometry at a fixed energy, the complex
//! momentum kappa(zeta) = k(E - W(zeta)), its branch points, the band/gap
//! decomposition of one slow period with its combinatorial indices,
//! tunneling actions and Stokes lines; and for the dynamics, Lyapunov
//! exponents of matrix cocycles and of the full quasi-periodic equation,
//! with a verification harness comparing the measured exponent against the
//! action-sum prediction (1/4 pi) sum_j S_j.

pub mod actions;
pub mod bands;
pub mod branch_points;
pub mod cocycle;
pub mod decomposition;
pub mod error;
pub mod indices;
pub mod mat2;
pub mod momentum;
pub mod potential;
pub mod problem;
pub mod quad;
pub mod quasimomentum;
pub mod roots;
pub mod slow;
pub mod stokes;
pub mod transfer;

pub use error::{Error, Result};
pub use potential::PotentialSpec;
pub use problem::{epsilon_from_index, AdiabaticProblem, GOLDEN_RATIO};
pub use slow::SlowPotential;
