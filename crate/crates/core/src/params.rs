use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Sign of the spin coupling in the equivalent XY chain.
///
/// Only the reported mean differs between the two: the ferromagnetic chain
/// reports `1/2 - m/N` per site, the variance is shared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MagneticSign {
    #[default]
    Antiferromagnetic,
    Ferromagnetic,
}

/// Chain and detector parameters, energies in units of the coupling `J`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Number of sites `N`, even and at least 2.
    pub n_sites: usize,
    /// Anisotropy: 0 is the XX chain, 1 the transverse Ising chain.
    pub gamma: f64,
    /// Reduced transverse field `h/J`.
    pub g: f64,
    /// Detection efficiency in `[0, 1]`.
    pub kappa: f64,
    #[serde(default)]
    pub magnetic_sign: MagneticSign,
}

impl ModelParams {
    pub fn new(n_sites: usize, gamma: f64, g: f64, kappa: f64) -> Result<Self> {
        let p = Self {
            n_sites,
            gamma,
            g,
            kappa,
            magnetic_sign: MagneticSign::Antiferromagnetic,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_sign(mut self, sign: MagneticSign) -> Self {
        self.magnetic_sign = sign;
        self
    }

    pub fn with_g(mut self, g: f64) -> Self {
        self.g = g;
        self
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 2 || !self.n_sites.is_multiple_of(2) {
            return Err(invalid(
                "n_sites",
                format!("{} is not an even integer >= 2", self.n_sites),
            ));
        }
        if !self.gamma.is_finite() {
            return Err(invalid("gamma", "must be finite"));
        }
        if !self.g.is_finite() {
            return Err(invalid("g", "must be finite"));
        }
        check_kappa(self.kappa)
    }

    /// Number of `(k, N-k)` pairs in the total-count product, `N/2`.
    pub fn n_pairs(&self) -> usize {
        self.n_sites / 2
    }
}

pub(crate) fn check_kappa(kappa: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&kappa) {
        return Err(invalid("kappa", format!("{kappa} not in [0, 1]")));
    }
    Ok(())
}
