//! Full counting distributions.
//!
//! Each `(k, N-k)` pair is empty with probability `1 - v_k^2` and doubly
//! occupied with probability `v_k^2`. A detector of efficiency `kappa`
//! registers each particle independently, so one pair yields the trinomial
//!
//! ```text
//! P0 = 1 - 2 kappa v^2 + kappa^2 v^2
//! P1 = 2 kappa v^2 - 2 kappa^2 v^2
//! P2 = kappa^2 v^2
//! ```
//!
//! and the distribution over `M + 1` pairs follows from the one over `M`
//! pairs by `p(m, M+1) = sum_i P_i p(m - i, M)`, starting from the point mass
//! `p(m, 0) = delta_{m,0}`.
//!
//! The generating function `Q(lambda) = prod_k (1 - 2 lambda kappa v_k^2 +
//! lambda^2 kappa^2 v_k^2)` gives the same distribution through
//! `p(m) = (-1)^m / m! * d^m Q / d lambda^m` at `lambda = 1`. That route sums
//! alternating binomial terms and is only kept as a cross-check; it loses
//! all precision somewhere past 60 pairs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{check_kappa, ModelParams};
use crate::spectrum::PairSpectrum;

/// Negative entries below this from the polynomial route mean cancellation.
pub const CANCELLATION_TOL: f64 = 1e-9;

/// Probabilities of detecting 0, 1 or 2 particles from one mode pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairDetection {
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
}

impl PairDetection {
    pub fn mean(&self) -> f64 {
        self.p1 + 2.0 * self.p2
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.p1 + 4.0 * self.p2 - m * m
    }
}

/// Binomial thinning of a pair occupied with probability `v_sq`.
///
/// Written in the thinned form `p0 = (1 - v^2) + v^2 (1 - kappa)^2` so every
/// entry is a sum of nonnegative terms and `p1` vanishes exactly at
/// `kappa = 1`.
pub fn pair_probs(v_sq: f64, kappa: f64) -> PairDetection {
    debug_assert!((0.0..=1.0).contains(&v_sq) && (0.0..=1.0).contains(&kappa));
    let miss = 1.0 - kappa;
    PairDetection {
        p0: (1.0 - v_sq) + v_sq * miss * miss,
        p1: 2.0 * v_sq * kappa * miss,
        p2: v_sq * kappa * kappa,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMode {
    /// All sites.
    #[default]
    Total,
    /// Even sites only.
    EverySecond,
}

impl CountMode {
    /// Pairs entering the product for an `n_sites` chain.
    pub fn n_pairs(self, n_sites: usize) -> usize {
        match self {
            CountMode::Total => n_sites / 2,
            CountMode::EverySecond => n_sites / 4,
        }
    }
}

/// Probability vector `p(0..=m_max)` with its low moments cached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountDistribution {
    probs: Vec<f64>,
    mode: CountMode,
    params: Option<ModelParams>,
    mean: f64,
    variance: f64,
    parity_sum: f64,
}

impl CountDistribution {
    pub fn new(probs: Vec<f64>, mode: CountMode, params: Option<ModelParams>) -> Self {
        let mean: f64 = probs.iter().enumerate().map(|(m, p)| m as f64 * p).sum();
        let variance = probs
            .iter()
            .enumerate()
            .map(|(m, p)| {
                let d = m as f64 - mean;
                d * d * p
            })
            .sum();
        let parity_sum =
            probs.iter().step_by(2).sum::<f64>() - probs.iter().skip(1).step_by(2).sum::<f64>();
        Self {
            probs,
            mode,
            params,
            mean,
            variance,
            parity_sum,
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }

    pub fn mode(&self) -> CountMode {
        self.mode
    }

    /// Parameters the distribution was computed for, when known.
    pub fn params(&self) -> Option<&ModelParams> {
        self.params.as_ref()
    }

    pub fn max_count(&self) -> usize {
        self.probs.len().saturating_sub(1)
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    /// `variance / mean`, `None` for a zero mean.
    pub fn fano(&self) -> Option<f64> {
        (self.mean > 0.0).then(|| self.variance / self.mean)
    }

    /// `sum_m (-1)^m p(m)`.
    pub fn parity_sum(&self) -> f64 {
        self.parity_sum
    }

    /// Largest absolute entrywise difference, padding the shorter vector with zeros.
    pub fn max_abs_diff(&self, other: &[f64]) -> f64 {
        let n = self.probs.len().max(other.len());
        (0..n)
            .map(|i| (self.probs.get(i).unwrap_or(&0.0) - other.get(i).unwrap_or(&0.0)).abs())
            .fold(0.0, f64::max)
    }
}

fn check_pairs(spectrum: &PairSpectrum, n_pairs: usize) -> Result<()> {
    if n_pairs == 0 || n_pairs > spectrum.len() {
        return Err(Error::PairCount {
            requested: n_pairs,
            available: spectrum.len(),
        });
    }
    Ok(())
}

/// Fold the trinomial of each `v_sq` into a point mass at zero.
pub fn fold_pairs(v_sq: impl IntoIterator<Item = f64>, kappa: f64) -> Vec<f64> {
    let v_sq = v_sq.into_iter();
    let mut probs = Vec::with_capacity(2 * v_sq.size_hint().0 + 1);
    probs.push(1.0);
    for v in v_sq {
        let pd = pair_probs(v, kappa);
        let len = probs.len();
        probs.extend([0.0, 0.0]);
        // In place from the top so p(m-1), p(m-2) are still the old values.
        for m in (0..len + 2).rev() {
            let mut acc = if m < len { pd.p0 * probs[m] } else { 0.0 };
            if m >= 1 && m - 1 < len {
                acc += pd.p1 * probs[m - 1];
            }
            if m >= 2 && m - 2 < len {
                acc += pd.p2 * probs[m - 2];
            }
            probs[m] = acc;
        }
    }
    probs
}

fn snapshot(spectrum: &PairSpectrum, kappa: f64) -> Option<ModelParams> {
    spectrum.params().map(|p| p.with_kappa(kappa))
}

/// Total-count distribution over the first `n_pairs` pairs of `spectrum`.
pub fn distribution(
    spectrum: &PairSpectrum,
    kappa: f64,
    n_pairs: usize,
) -> Result<CountDistribution> {
    check_kappa(kappa)?;
    check_pairs(spectrum, n_pairs)?;
    let probs = fold_pairs(spectrum.v_sq().take(n_pairs), kappa);
    Ok(CountDistribution::new(
        probs,
        CountMode::Total,
        snapshot(spectrum, kappa),
    ))
}

/// Distribution of counts on the even sites only.
///
/// Same pair factors as the total count, with the product cut at `k = N/4`.
pub fn every_second_distribution(spectrum: &PairSpectrum, kappa: f64) -> Result<CountDistribution> {
    check_kappa(kappa)?;
    let n_sites = spectrum.n_sites();
    if !n_sites.is_multiple_of(4) {
        return Err(Error::NotDivisibleByFour(n_sites));
    }
    let n_pairs = CountMode::EverySecond.n_pairs(n_sites);
    check_pairs(spectrum, n_pairs)?;
    let probs = fold_pairs(spectrum.v_sq().take(n_pairs), kappa);
    Ok(CountDistribution::new(
        probs,
        CountMode::EverySecond,
        snapshot(spectrum, kappa),
    ))
}

/// Coefficients `c_j` of `Q(lambda) = sum_j c_j lambda^j`.
pub fn generating_polynomial(
    spectrum: &PairSpectrum,
    kappa: f64,
    n_pairs: usize,
) -> Result<Vec<f64>> {
    check_kappa(kappa)?;
    check_pairs(spectrum, n_pairs)?;
    let mut coeffs = vec![1.0];
    for v in spectrum.v_sq().take(n_pairs) {
        let (a, b) = (-2.0 * kappa * v, kappa * kappa * v);
        let mut next = vec![0.0; coeffs.len() + 2];
        for (j, &c) in coeffs.iter().enumerate() {
            next[j] += c;
            next[j + 1] += a * c;
            next[j + 2] += b * c;
        }
        coeffs = next;
    }
    Ok(coeffs)
}

/// `p(m) = (-1)^m sum_{j >= m} c_j C(j, m)`, i.e. the Taylor coefficients
/// of `Q` about `lambda = 1` with alternating sign.
///
/// Negative entries above `-CANCELLATION_TOL` are rounding and are clamped
/// to zero; anything more negative is reported as an error.
pub fn distribution_from_polynomial(coeffs: &[f64]) -> Result<CountDistribution> {
    let degree = coeffs.len().saturating_sub(1);
    let mut probs = vec![0.0; coeffs.len()];
    // Pascal row C(j, 0..=j), rebuilt incrementally for each j.
    let mut binom = vec![0.0; coeffs.len()];
    for (j, &c) in coeffs.iter().enumerate() {
        binom[j] = 1.0;
        for m in (1..j).rev() {
            binom[m] += binom[m - 1];
        }
        binom[0] = 1.0;
        for m in 0..=j {
            probs[m] += c * binom[m];
        }
    }
    for (m, p) in probs.iter_mut().enumerate() {
        if m % 2 == 1 {
            *p = -*p;
        }
        if *p < -CANCELLATION_TOL {
            return Err(Error::Cancellation { m, value: *p });
        }
        *p = p.max(0.0);
    }
    debug_assert_eq!(probs.len(), degree + 1);
    Ok(CountDistribution::new(probs, CountMode::Total, None))
}

/// `prod_k (1 - 4 kappa (1 - kappa) v_k^2)`, the generating function at
/// `lambda = 2`, which equals `sum_m (-1)^m p(m)`.
pub fn parity_product(v_sq: impl IntoIterator<Item = f64>, kappa: f64) -> f64 {
    v_sq.into_iter()
        .map(|v| 1.0 - 4.0 * kappa * (1.0 - kappa) * v)
        .product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::build_spectrum;
    use proptest::prelude::*;

    fn close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < tol, "{a:?} vs {b:?}");
        }
    }

    fn spectrum(n: usize, gamma: f64, g: f64) -> PairSpectrum {
        build_spectrum(&ModelParams::new(n, gamma, g, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn pair_probs_examples() {
        assert_eq!(
            pair_probs(0.0, 0.37),
            PairDetection {
                p0: 1.0,
                p1: 0.0,
                p2: 0.0
            }
        );
        assert_eq!(
            pair_probs(0.25, 1.0),
            PairDetection {
                p0: 0.75,
                p1: 0.0,
                p2: 0.25
            }
        );
        assert_eq!(
            pair_probs(1.0, 0.5),
            PairDetection {
                p0: 0.25,
                p1: 0.5,
                p2: 0.25
            }
        );
    }

    #[test]
    fn single_fold_is_the_pair() {
        let s = spectrum(8, 1.0, 0.5);
        let d = distribution(&s, 0.7, 1).unwrap();
        let pd = pair_probs(s.entries()[0].v_sq, 0.7);
        close(d.probs(), &[pd.p0, pd.p1, pd.p2], 1e-15);
        assert_eq!(d.max_count(), 2);
    }

    #[test]
    fn perfect_detection_has_no_odd_counts() {
        let s = spectrum(64, 0.6, 0.8);
        let d = distribution(&s, 1.0, 32).unwrap();
        for (m, p) in d.probs().iter().enumerate() {
            if m % 2 == 1 {
                assert_eq!(*p, 0.0);
            }
        }
        assert!((d.parity_sum() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_pair_counts() {
        let s = spectrum(8, 1.0, 0.5);
        assert!(matches!(
            distribution(&s, 0.5, 0),
            Err(Error::PairCount { .. })
        ));
        assert!(matches!(
            distribution(&s, 0.5, 5),
            Err(Error::PairCount { .. })
        ));
        assert!(distribution(&s, 1.5, 2).is_err());
    }

    #[test]
    fn every_second_requires_multiple_of_four() {
        let s = spectrum(10, 1.0, 0.5);
        assert_eq!(
            every_second_distribution(&s, 0.5).unwrap_err(),
            Error::NotDivisibleByFour(10)
        );
    }

    #[test]
    fn every_second_blind_detector() {
        let s = spectrum(16, 1.0, 0.3);
        let d = every_second_distribution(&s, 0.0).unwrap();
        assert_eq!(d.probs()[0], 1.0);
        assert!(d.probs()[1..].iter().all(|&p| p == 0.0));
        assert_eq!(d.mode(), CountMode::EverySecond);
    }

    #[test]
    fn every_second_eight_sites_is_two_factor_product() {
        let s = spectrum(8, 1.0, 0.0);
        let d = every_second_distribution(&s, 0.6).unwrap();
        // Direct expansion of the two-factor product.
        let a = pair_probs(s.entries()[0].v_sq, 0.6);
        let b = pair_probs(s.entries()[1].v_sq, 0.6);
        let expect = [
            a.p0 * b.p0,
            a.p0 * b.p1 + a.p1 * b.p0,
            a.p0 * b.p2 + a.p1 * b.p1 + a.p2 * b.p0,
            a.p1 * b.p2 + a.p2 * b.p1,
            a.p2 * b.p2,
        ];
        close(d.probs(), &expect, 1e-15);
    }

    #[test]
    fn polynomial_examples() {
        let s = PairSpectrum::from_v_sq(&[0.5]).unwrap();
        let c = generating_polynomial(&s, 1.0, 1).unwrap();
        close(&c, &[1.0, -1.0, 0.5], 0.0 + 1e-300);
        let d = distribution_from_polynomial(&c).unwrap();
        close(d.probs(), &[0.5, 0.0, 0.5], 1e-15);
    }

    #[test]
    fn polynomial_at_one_is_zero_count_probability() {
        let s = spectrum(20, 0.8, 1.3);
        let c = generating_polynomial(&s, 0.6, 10).unwrap();
        assert_eq!(c[0], 1.0);
        let d = distribution(&s, 0.6, 10).unwrap();
        assert!((c.iter().sum::<f64>() - d.probs()[0]).abs() < 1e-12);
    }

    #[test]
    fn polynomial_route_matches_recursion() {
        // N = 12, gamma = 1, g = 2, kappa = 0.7.
        let s = spectrum(12, 1.0, 2.0);
        let c = generating_polynomial(&s, 0.7, 6).unwrap();
        let poly = distribution_from_polynomial(&c).unwrap();
        let rec = distribution(&s, 0.7, 6).unwrap();
        assert!(rec.max_abs_diff(poly.probs()) < 1e-8);
        assert!((poly.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn polynomial_route_breaks_down_at_high_degree() {
        let s = spectrum(400, 1.0, 0.3);
        let c = generating_polynomial(&s, 0.9, 200).unwrap();
        assert!(matches!(
            distribution_from_polynomial(&c),
            Err(Error::Cancellation { .. })
        ));
    }

    #[test]
    fn normalized_at_large_n() {
        let s = spectrum(4000, 1.0, 1.0);
        for kappa in [0.1, 0.9, 1.0] {
            let d = distribution(&s, kappa, 2000).unwrap();
            assert!((d.total() - 1.0).abs() < 1e-10);
            assert!(d.probs().iter().all(|&p| p >= 0.0));
        }
    }

    proptest! {
        #[test]
        fn pair_probs_are_a_distribution(v in 0.0..=1.0f64, kappa in 0.0..=1.0f64) {
            let pd = pair_probs(v, kappa);
            prop_assert!(pd.p0 >= 0.0 && pd.p1 >= 0.0 && pd.p2 >= 0.0);
            prop_assert!((pd.p0 + pd.p1 + pd.p2 - 1.0).abs() < 1e-14);
            // Same numbers as the unthinned-pair expansion.
            prop_assert!((pd.p0 - (1.0 - 2.0 * kappa * v + kappa * kappa * v)).abs() < 1e-14);
            prop_assert!((pd.p1 - (2.0 * kappa * v - 2.0 * kappa * kappa * v)).abs() < 1e-14);
        }

        #[test]
        fn fold_order_does_not_matter(v in prop::collection::vec(0.0..=1.0f64, 1..40), kappa in 0.0..=1.0f64, seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut shuffled = v.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let a = fold_pairs(v.iter().copied(), kappa);
            let b = fold_pairs(shuffled.iter().copied(), kappa);
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn distribution_invariants(n in 1usize..200, gamma in -1.5..1.5f64, g in -3.0..3.0f64, kappa in 0.0..=1.0f64, mode_total in any::<bool>()) {
            let n_sites = 4 * n;
            let s = spectrum(n_sites, gamma, g);
            let (d, pairs) = if mode_total {
                (distribution(&s, kappa, s.len()).unwrap(), s.len())
            } else {
                (every_second_distribution(&s, kappa).unwrap(), n_sites / 4)
            };
            prop_assert_eq!(d.probs().len(), 2 * pairs + 1);
            prop_assert!(d.probs().iter().all(|&p| p >= 0.0));
            prop_assert!((d.total() - 1.0).abs() < 1e-10);
            let closed = parity_product(s.v_sq().take(pairs), kappa);
            prop_assert!((d.parity_sum() - closed).abs() < 1e-10);
            // Mean is 2 kappa sum v^2, linear in kappa.
            let sum_v: f64 = s.v_sq().take(pairs).sum();
            prop_assert!((d.mean() - 2.0 * kappa * sum_v).abs() < 1e-9 * (1.0 + sum_v));
        }

        #[test]
        // The monomial route loses about a digit per pair; past ~8 pairs the
        // worst case over this grid is no longer within 1e-8.
        fn polynomial_agrees_up_to_eight_pairs(pairs in 1usize..=8, gamma in 0.0..=1.0f64, g in 0.0..3.0f64, kappa in 0.0..=1.0f64) {
            let s = spectrum(2 * pairs, gamma, g);
            let c = generating_polynomial(&s, kappa, pairs).unwrap();
            let poly = distribution_from_polynomial(&c).unwrap();
            let rec = distribution(&s, kappa, pairs).unwrap();
            prop_assert!(rec.max_abs_diff(poly.probs()) < 1e-8);
        }
    }
}
