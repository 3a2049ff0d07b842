use num_complex::Complex64;

use crate::counting::{CountDistribution, CountMode};
use crate::error::{invalid, Error, Result};
use crate::params::check_kappa;

/// What one bit of a basis index stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeBasis {
    /// Lattice site, ordered by site index. Carries one fermion.
    Sites,
    /// `(k, N-k)` momentum pair, either empty or doubly occupied.
    Pairs,
}

impl ModeBasis {
    pub fn particles_per_mode(self) -> usize {
        match self {
            ModeBasis::Sites => 1,
            ModeBasis::Pairs => 2,
        }
    }
}

/// Normalized state in an occupation basis of `n_modes` modes; bit `j` of
/// the index is the occupation of mode `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    amplitudes: Vec<Complex64>,
    n_modes: usize,
    basis: ModeBasis,
}

impl FockState {
    pub fn new(amplitudes: Vec<Complex64>, n_modes: usize, basis: ModeBasis) -> Result<Self> {
        if amplitudes.len() != 1 << n_modes {
            return Err(invalid(
                "amplitudes",
                format!("length {} is not 2^{n_modes}", amplitudes.len()),
            ));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(invalid("amplitudes", format!("norm {norm} is not 1")));
        }
        Ok(Self {
            amplitudes,
            n_modes,
            basis,
        })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dimension(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn basis(&self) -> ModeBasis {
        self.basis
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Distribution of the true particle number before detection.
#[derive(Debug, Clone, PartialEq)]
pub struct NumberDistribution {
    pub probs: Vec<f64>,
}

/// Marginal of the total occupation of the masked modes; `None` counts all.
pub fn number_distribution(state: &FockState, mask: Option<&[bool]>) -> Result<NumberDistribution> {
    let n = state.n_modes;
    let bits: u64 = match mask {
        None => (1u64 << n) - 1,
        Some(m) if m.len() != n => {
            return Err(Error::MaskLength {
                got: m.len(),
                expected: n,
            })
        }
        Some(m) => m
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .fold(0, |acc, (j, _)| acc | 1 << j),
    };
    let weight = state.basis.particles_per_mode();
    let mut probs = vec![0.0; weight * bits.count_ones() as usize + 1];
    for (s, a) in state.amplitudes.iter().enumerate() {
        probs[weight * (s as u64 & bits).count_ones() as usize] += a.norm_sqr();
    }
    Ok(NumberDistribution { probs })
}

/// Each of `n` particles is detected independently with probability
/// `kappa`: `p(m) = sum_n P(n) C(n, m) kappa^m (1 - kappa)^(n - m)`.
pub fn binomial_thinning(nd: &NumberDistribution, kappa: f64) -> Result<CountDistribution> {
    check_kappa(kappa)?;
    let len = nd.probs.len();
    let mut out = vec![0.0; len];
    let mut row = vec![0.0f64; len];
    for (n, &pn) in nd.probs.iter().enumerate() {
        // Pascal row n.
        row[n] = 1.0;
        for m in (1..n).rev() {
            row[m] += row[m - 1];
        }
        row[0] = 1.0;
        if pn == 0.0 {
            continue;
        }
        for (m, c) in row.iter().enumerate().take(n + 1) {
            out[m] += pn * c * kappa.powi(m as i32) * (1.0 - kappa).powi((n - m) as i32);
        }
    }
    Ok(CountDistribution::new(out, CountMode::Total, None))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis_state(n_modes: usize, index: usize, basis: ModeBasis) -> FockState {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_modes];
        amps[index] = Complex64::new(1.0, 0.0);
        FockState::new(amps, n_modes, basis).unwrap()
    }

    #[test]
    fn vacuum_and_full_states() {
        let vac = basis_state(4, 0, ModeBasis::Sites);
        assert_eq!(
            number_distribution(&vac, None).unwrap().probs,
            [1.0, 0.0, 0.0, 0.0, 0.0]
        );
        let full = basis_state(6, 0b111111, ModeBasis::Sites);
        let even = [true, false, true, false, true, false];
        let nd = number_distribution(&full, Some(&even)).unwrap();
        assert_eq!(nd.probs, [0.0, 0.0, 0.0, 1.0]);
        assert!(matches!(
            number_distribution(&full, Some(&even[..4])),
            Err(Error::MaskLength { .. })
        ));
    }

    #[test]
    fn pair_modes_count_double() {
        let s = basis_state(3, 0b101, ModeBasis::Pairs);
        assert_eq!(
            number_distribution(&s, None).unwrap().probs,
            [0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]
        );
    }

    #[test]
    fn rejects_unnormalized() {
        let amps = vec![Complex64::new(0.5, 0.0); 4];
        assert!(FockState::new(amps.clone(), 2, ModeBasis::Sites).is_ok());
        assert!(FockState::new(amps[..2].to_vec(), 2, ModeBasis::Sites).is_err());
        assert!(FockState::new(vec![Complex64::new(1.0, 0.0); 4], 2, ModeBasis::Sites).is_err());
    }

    #[test]
    fn thinning_examples() {
        let nd = NumberDistribution {
            probs: vec![0.2, 0.3, 0.5],
        };
        assert_eq!(binomial_thinning(&nd, 1.0).unwrap().probs(), &nd.probs[..]);
        assert_eq!(
            binomial_thinning(&nd, 0.0).unwrap().probs(),
            &[1.0, 0.0, 0.0]
        );
        let two = NumberDistribution {
            probs: vec![0.0, 0.0, 1.0],
        };
        assert_eq!(
            binomial_thinning(&two, 0.5).unwrap().probs(),
            &[0.25, 0.5, 0.25]
        );
    }

    #[test]
    fn thinning_is_linear_in_the_mixture() {
        let a = NumberDistribution {
            probs: vec![0.1, 0.0, 0.6, 0.3, 0.0],
        };
        let b = NumberDistribution {
            probs: vec![0.0, 0.25, 0.25, 0.0, 0.5],
        };
        let w = 0.35;
        let mix = NumberDistribution {
            probs: a
                .probs
                .iter()
                .zip(&b.probs)
                .map(|(x, y)| w * x + (1.0 - w) * y)
                .collect(),
        };
        for kappa in [0.0, 0.3, 0.77, 1.0] {
            let ta = binomial_thinning(&a, kappa).unwrap();
            let tb = binomial_thinning(&b, kappa).unwrap();
            let tm = binomial_thinning(&mix, kappa).unwrap();
            for m in 0..5 {
                let expect = w * ta.probs()[m] + (1.0 - w) * tb.probs()[m];
                assert!((tm.probs()[m] - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn thinning_large_occupation_stays_normalized() {
        let mut probs = vec![0.0; 65];
        probs[64] = 1.0;
        let d = binomial_thinning(&NumberDistribution { probs }, 0.37).unwrap();
        assert!((d.total() - 1.0).abs() < 1e-12);
        assert!((d.mean() - 64.0 * 0.37).abs() < 1e-10);
    }
}
