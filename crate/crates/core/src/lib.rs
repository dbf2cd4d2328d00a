//! Biorthogonal quantum mechanics for small non-Hermitian systems, with a
//! worked application: dynamical quantum phase transitions in the
//! non-Hermitian SSH chain.
//!
//! Layers, bottom up:
//! - [`kernel`]: complex dense linear algebra (biorthogonal eigensystems,
//!   matrix exponential action, principal square root);
//! - [`state`]: left/right state pairs, expansions, observables, and the
//!   refined measurement postulates with complex probabilities;
//! - [`dynamics`]: non-unitary evolution, Loschmidt amplitude/echo, and
//!   the total/dynamical/geometric phase split;
//! - [`ssh`]: the non-Hermitian SSH Bloch Hamiltonian, closed-form band
//!   eigenpairs, and PT-phase classification;
//! - [`dqpt`]: quench analysis — Fisher zeros, critical modes and times,
//!   rate function, dynamical winding number;
//! - [`cli`]: batch front-end emitting deterministic CSV/JSON/SVG.

pub mod cli;
pub mod dqpt;
pub mod dynamics;
pub mod error;
pub mod kernel;
pub mod ssh;
pub mod state;

pub use error::{Error, Result};
pub use kernel::{BiorthEigensystem, CMatrix};
pub use state::BiorthState;
