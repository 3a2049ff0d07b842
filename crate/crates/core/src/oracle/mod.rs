//! Small-system exact references for the analytic pipeline.
//!
//! Two independent routes build the ground state without going through the
//! generating function:
//!
//! - [`pair_basis`]: the BCS product state over `(k, N-k)` pairs in a
//!   `2^{n_pairs}` occupation basis. Isolates the detection and counting
//!   algebra from the lattice physics.
//! - [`real_space`]: dense exact diagonalization of the lattice Hamiltonian
//!   in the `2^N` site basis with fermionic signs. Audits the Fourier and
//!   Bogoliubov step, including how the `k = 0` and `k = N/2` modes are
//!   handled.
//!
//! Both feed [`number_distribution`] and [`binomial_thinning`], which model
//! a detector that registers each particle independently.

pub mod check;
mod fock;
pub mod pair_basis;
pub mod real_space;

pub use fock::{binomial_thinning, number_distribution, FockState, ModeBasis, NumberDistribution};
pub use pair_basis::{pair_basis_ground_state, MAX_ORACLE_PAIRS};
pub use real_space::{real_space_ground_state, RealSpaceGround, MAX_ORACLE_SITES};
