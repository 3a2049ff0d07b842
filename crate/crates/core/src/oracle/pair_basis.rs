use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::oracle::fock::{FockState, ModeBasis};
use crate::spectrum::PairSpectrum;

pub const MAX_ORACLE_PAIRS: usize = 14;

/// `prod_k (u_k |00>_k + i v_k |11>_k)` over the first `n_pairs` pairs.
///
/// Bit `k` of a basis index marks pair `k` as doubly occupied. The Fourier
/// transform preserves particle number, so the pair occupation statistics
/// are those of the lattice fermions.
pub fn pair_basis_ground_state(spectrum: &PairSpectrum, n_pairs: usize) -> Result<FockState> {
    if n_pairs > MAX_ORACLE_PAIRS {
        return Err(Error::OracleTooLarge {
            size: n_pairs,
            limit: MAX_ORACLE_PAIRS,
        });
    }
    if n_pairs == 0 || n_pairs > spectrum.len() {
        return Err(Error::PairCount {
            requested: n_pairs,
            available: spectrum.len(),
        });
    }
    let factors: Vec<(Complex64, Complex64)> = spectrum
        .v_sq()
        .take(n_pairs)
        .map(|v| {
            (
                Complex64::new((1.0 - v).sqrt(), 0.0),
                Complex64::new(0.0, v.sqrt()),
            )
        })
        .collect();
    let amplitudes = (0..1usize << n_pairs)
        .map(|s| {
            factors
                .iter()
                .enumerate()
                .map(|(k, &(u, iv))| if s >> k & 1 == 1 { iv } else { u })
                .product()
        })
        .collect();
    FockState::new(amplitudes, n_pairs, ModeBasis::Pairs)
}
