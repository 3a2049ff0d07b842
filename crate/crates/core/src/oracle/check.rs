//! Deviations between the analytic pipeline and the oracles.

use serde::Serialize;

use crate::counting::{distribution, every_second_distribution};
use crate::error::Result;
use crate::oracle::fock::{binomial_thinning, number_distribution};
use crate::oracle::pair_basis::pair_basis_ground_state;
use crate::oracle::real_space::{even_sites, real_space_ground_state};
use crate::params::ModelParams;
use crate::spectrum::build_spectrum;

/// Max entrywise gap between the pair-basis oracle and the recursion over
/// the first `n_pairs` pairs. `perturb` is applied to the `v_sq` fed to the
/// recursion only, so anything but the identity should be caught.
pub fn pair_basis_deviation(
    params: &ModelParams,
    n_pairs: usize,
    perturb: impl Fn(f64) -> f64,
) -> Result<f64> {
    let spectrum = build_spectrum(params)?;
    let state = pair_basis_ground_state(&spectrum, n_pairs)?;
    let oracle = binomial_thinning(&number_distribution(&state, None)?, params.kappa)?;
    let analytic = distribution(&spectrum.map_v_sq(perturb), params.kappa, n_pairs)?;
    Ok(analytic.max_abs_diff(oracle.probs()))
}

#[derive(Debug, Clone, Serialize)]
pub struct RealSpaceCheck {
    pub n_sites: usize,
    pub max_dev: f64,
    pub degenerate: bool,
    pub gap: f64,
}

/// Lattice ground state against the total-count recursion over all `N/2`
/// pairs. For a degenerate ground space the first basis vector is used and
/// `degenerate` is set.
pub fn real_space_deviation(params: &ModelParams) -> Result<RealSpaceCheck> {
    let ground = real_space_ground_state(params)?;
    let oracle = ground.distribution(params.kappa, None)?;
    let analytic = distribution(&build_spectrum(params)?, params.kappa, params.n_pairs())?;
    Ok(RealSpaceCheck {
        n_sites: params.n_sites,
        max_dev: analytic.max_abs_diff(oracle.probs()),
        degenerate: ground.degenerate(),
        gap: ground.gap,
    })
}

/// Lattice ground state counted on even sites against the every-second
/// product.
pub fn every_second_real_space_deviation(params: &ModelParams) -> Result<RealSpaceCheck> {
    let ground = real_space_ground_state(params)?;
    let mask = even_sites(params.n_sites);
    let oracle = ground.distribution(params.kappa, Some(&mask))?;
    let analytic = every_second_distribution(&build_spectrum(params)?, params.kappa)?;
    Ok(RealSpaceCheck {
        n_sites: params.n_sites,
        max_dev: analytic.max_abs_diff(oracle.probs()),
        degenerate: ground.degenerate(),
        gap: ground.gap,
    })
}
