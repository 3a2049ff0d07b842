//! Bogoliubov pair spectrum of the periodic XY fermion chain.
//!
//! With `Phi_k = 2 pi k / N`, `x_k = cos Phi_k - g` and
//! `Lambda_k = sqrt(x_k^2 + gamma^2 sin^2 Phi_k)`, the ground state occupies
//! pair `(k, N-k)` with probability
//!
//! ```text
//! v_k^2 = (1 - x_k / Lambda_k) / 2
//! ```
//!
//! and the quasiparticle energy is `eps_k = 2 Lambda_k`. The branch is the
//! one for which `v_k^2 -> 1` as `g -> infinity`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::params::ModelParams;

/// Below this `Lambda_k` the mode sits exactly on a Fermi point.
pub const DEGENERATE_LAMBDA: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairEntry {
    /// `2 pi k / N`, in `(0, pi]`.
    pub phi: f64,
    pub v_sq: f64,
    /// Quasiparticle energy `2 Lambda_k` in units of `J`.
    pub epsilon: f64,
    /// Gapless mode, `v_sq` pinned to one half.
    pub degenerate: bool,
}

impl PairEntry {
    pub fn u_sq(&self) -> f64 {
        1.0 - self.v_sq
    }
}

/// Pair data for `k = 1..=N/2`.
///
/// The `k = 0` mode is left out and `k = N/2` is kept as an ordinary entry,
/// following the product form of the generating function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSpectrum {
    entries: Vec<PairEntry>,
    params: Option<ModelParams>,
}

impl PairSpectrum {
    /// Spectrum from raw pair occupations, for tests and oracles. Angles are
    /// laid out as if `N = 2 * v_sq.len()`; energies are not meaningful.
    pub fn from_v_sq(v_sq: &[f64]) -> Result<Self> {
        let n_sites = 2 * v_sq.len();
        let entries = v_sq
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                if !(0.0..=1.0).contains(&v) {
                    return Err(invalid("v_sq", format!("{v} not in [0, 1]")));
                }
                Ok(PairEntry {
                    phi: 2.0 * PI * (i + 1) as f64 / n_sites as f64,
                    v_sq: v,
                    epsilon: f64::NAN,
                    degenerate: false,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            entries,
            params: None,
        })
    }

    pub fn entries(&self) -> &[PairEntry] {
        &self.entries
    }

    pub fn v_sq(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.v_sq)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of sites this spectrum describes.
    pub fn n_sites(&self) -> usize {
        self.params.map_or(2 * self.entries.len(), |p| p.n_sites)
    }

    pub fn params(&self) -> Option<&ModelParams> {
        self.params.as_ref()
    }

    pub fn has_degenerate(&self) -> bool {
        self.entries.iter().any(|e| e.degenerate)
    }

    /// Copy with every `v_sq` passed through `f` (clamped to `[0, 1]`).
    /// Used for fault injection in the oracle check.
    pub fn map_v_sq(&self, f: impl Fn(f64) -> f64) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|e| PairEntry {
                v_sq: f(e.v_sq).clamp(0.0, 1.0),
                ..*e
            })
            .collect();
        Self {
            entries,
            params: self.params,
        }
    }
}

/// Occupation, energy and degeneracy flag of one pair.
pub fn pair_entry(phi: f64, gamma: f64, g: f64) -> PairEntry {
    let (s, c) = phi.sin_cos();
    let x = c - g;
    let y = gamma * s;
    let lambda = x.hypot(y);
    if lambda < DEGENERATE_LAMBDA {
        return PairEntry {
            phi,
            v_sq: 0.5,
            epsilon: 2.0 * lambda,
            degenerate: true,
        };
    }
    // (1 - x/L)/2 loses all digits when x ~ L > 0; use (L - x) = y^2 / (L + x).
    let v_sq = if x > 0.0 {
        y * y / (2.0 * lambda * (lambda + x))
    } else {
        0.5 * (1.0 - x / lambda)
    };
    PairEntry {
        phi,
        v_sq: v_sq.clamp(0.0, 1.0),
        epsilon: 2.0 * lambda,
        degenerate: false,
    }
}

pub fn build_spectrum(params: &ModelParams) -> Result<PairSpectrum> {
    params.validate()?;
    let n = params.n_sites;
    let entries = (1..=n / 2)
        .map(|k| pair_entry(2.0 * PI * k as f64 / n as f64, params.gamma, params.g))
        .collect();
    Ok(PairSpectrum {
        entries,
        params: Some(*params),
    })
}

/// Smallest quasiparticle energy on the `k = 1..=N/2` grid.
pub fn spectral_gap(params: &ModelParams) -> Result<f64> {
    let spectrum = build_spectrum(params)?;
    Ok(spectrum
        .entries
        .iter()
        .map(|e| e.epsilon)
        .fold(f64::INFINITY, f64::min))
}
