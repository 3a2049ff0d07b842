//! Exact counting statistics for the one-dimensional transverse XY chain.
//!
//! The chain is solved by Fourier and Bogoliubov transformation into
//! independent `(k, N-k)` mode pairs. Every pair is either empty or doubly
//! occupied in the ground state, so a detector with efficiency `kappa` sees
//! 0, 1 or 2 counts per pair and the full counting distribution is a fold of
//! trinomial factors.
//!
//! Modules:
//! - [`spectrum`]: Bogoliubov pair occupations `v_k^2` and energies.
//! - [`counting`]: distributions by recursion and by the generating polynomial.
//! - [`moments`]: moment recurrences, cumulants, derivative sweeps.
//! - [`oracle`]: small-system exact diagonalization used to validate the above.
//!
//! Parallel grid evaluation is provided through [`exec::Exec`]; with the
//! `parallel` feature disabled every path runs sequentially.

pub mod counting;
pub mod error;
pub mod exec;
pub mod moments;
pub mod oracle;
pub mod params;
pub mod spectrum;

pub use counting::{
    distribution, distribution_from_polynomial, every_second_distribution, generating_polynomial,
    pair_probs, CountDistribution, CountMode, PairDetection,
};
pub use error::{Error, Result};
pub use exec::Exec;
pub use moments::{
    cumulants_from_distribution, derivative_sweep, ferromagnetic_mean, mean_by_recurrence,
    parity_contrast, variance_exact, variance_paper_recurrence, Classification, MomentSet,
    SweepOptions, SweepRecord,
};
pub use params::{MagneticSign, ModelParams};
pub use spectrum::{build_spectrum, spectral_gap, PairEntry, PairSpectrum};
