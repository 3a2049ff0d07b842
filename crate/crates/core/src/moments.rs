//! Moments, cumulants and field sweeps of the counting distributions.

use serde::{Deserialize, Serialize};

use crate::counting::{fold_pairs, pair_probs, CountDistribution, CountMode};
use crate::error::{invalid, Error, Result};
use crate::exec::Exec;
use crate::params::{check_kappa, MagneticSign, ModelParams};
use crate::spectrum::{build_spectrum, PairSpectrum};

/// Fano factors within this distance of 1 count as Poissonian.
pub const POISSON_TOL: f64 = 1e-9;
/// Parity contrast above which a distribution is called even/odd split.
pub const DEFAULT_SPLIT_THRESHOLD: f64 = 0.1;
pub const DEFAULT_FD_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    pub mean: f64,
    pub variance: f64,
    /// `variance / mean`; `None` when the mean vanishes.
    pub fano: Option<f64>,
    /// Cumulants of order 2, 3 and 4.
    pub cumulants: [f64; 3],
    pub parity_sum: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    SubPoissonian,
    SuperPoissonian,
    PoissonianWithinTol,
    /// No Fano factor: the reported mean is zero.
    Undefined,
}

impl Classification {
    pub fn from_fano(fano: Option<f64>, tol: f64) -> Self {
        match fano {
            None => Classification::Undefined,
            Some(f) if (f - 1.0).abs() <= tol => Classification::PoissonianWithinTol,
            Some(f) if f < 1.0 => Classification::SubPoissonian,
            Some(_) => Classification::SuperPoissonian,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Classification::SubPoissonian => "sub_poissonian",
            Classification::SuperPoissonian => "super_poissonian",
            Classification::PoissonianWithinTol => "poissonian_within_tol",
            Classification::Undefined => "undefined",
        }
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
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

/// `m_{M+1} = m_M + 2 kappa v_{M+1}^2`, run over the first `n_pairs` pairs.
pub fn mean_by_recurrence(spectrum: &PairSpectrum, kappa: f64, n_pairs: usize) -> Result<f64> {
    check_kappa(kappa)?;
    check_pairs(spectrum, n_pairs)?;
    Ok(spectrum
        .v_sq()
        .take(n_pairs)
        .fold(0.0, |m, v| m + 2.0 * kappa * v))
}

/// Sum of the trinomial variances of independent pairs,
/// `2 kappa v^2 + 2 kappa^2 v^2 (1 - 2 v^2)` each.
pub fn variance_exact(spectrum: &PairSpectrum, kappa: f64, n_pairs: usize) -> Result<f64> {
    check_kappa(kappa)?;
    check_pairs(spectrum, n_pairs)?;
    Ok(spectrum
        .v_sq()
        .take(n_pairs)
        .map(|v| pair_probs(v, kappa).variance())
        .sum())
}

/// `var_{M+1} = var_M + 4 kappa^2 v^2 (1 - v^2)`.
///
/// Agrees with [`variance_exact`] only at `kappa = 1`; below that it misses
/// the single-count term of partially detected pairs.
pub fn variance_paper_recurrence(
    spectrum: &PairSpectrum,
    kappa: f64,
    n_pairs: usize,
) -> Result<f64> {
    check_kappa(kappa)?;
    check_pairs(spectrum, n_pairs)?;
    Ok(spectrum
        .v_sq()
        .take(n_pairs)
        .fold(0.0, |var, v| var + 4.0 * kappa * kappa * v * (1.0 - v)))
}

pub fn cumulants_from_distribution(dist: &CountDistribution) -> MomentSet {
    let mean = dist.mean();
    let (mut mu2, mut mu3, mut mu4) = (0.0, 0.0, 0.0);
    for (m, &p) in dist.probs().iter().enumerate() {
        let d = m as f64 - mean;
        let d2 = d * d;
        mu2 += d2 * p;
        mu3 += d2 * d * p;
        mu4 += d2 * d2 * p;
    }
    MomentSet {
        mean,
        variance: mu2,
        fano: (mean > 0.0).then(|| mu2 / mean),
        cumulants: [mu2, mu3, mu4 - 3.0 * mu2 * mu2],
        parity_sum: dist.parity_sum(),
    }
}

/// Per-site mean of the ferromagnetic chain from the antiferromagnetic one.
/// The variance is unchanged.
pub fn ferromagnetic_mean(mean_per_site: f64) -> f64 {
    0.5 - mean_per_site
}

/// `sum_m (-1)^m p(m)`: 1 for pure even support, near 0 once missed
/// detections have washed out the pairing.
pub fn parity_contrast(dist: &CountDistribution) -> f64 {
    dist.parity_sum()
}

pub fn is_split(contrast: f64, threshold: f64) -> bool {
    contrast > threshold
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub count_mode: CountMode,
    /// Central finite-difference step in `g`.
    pub step: f64,
    pub poisson_tol: f64,
    pub split_threshold: f64,
    pub exec: Exec,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            count_mode: CountMode::Total,
            step: DEFAULT_FD_STEP,
            poisson_tol: POISSON_TOL,
            split_threshold: DEFAULT_SPLIT_THRESHOLD,
            exec: Exec::default(),
        }
    }
}

/// One grid point of a field sweep. Per-site quantities are divided by `N`;
/// for the ferromagnetic sign `mean_per_site` and `d_mean_dg` are already
/// transformed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub params: ModelParams,
    pub count_mode: CountMode,
    pub moments: MomentSet,
    pub mean_per_site: f64,
    pub var_per_site: f64,
    /// Fano factor of the reported mean, `None` when that mean is zero.
    pub fano: Option<f64>,
    pub d_mean_dg: f64,
    pub d_var_dg: f64,
    pub fd_step: f64,
    pub classification: Classification,
    pub parity_contrast: f64,
    pub split: bool,
    /// Within `10 * fd_step` of `g = 1`, where the derivative of the mean
    /// diverges and the finite difference under-resolves it.
    pub near_critical: bool,
}

/// Pair count for `mode`, rejecting every-second counting on `N % 4 != 0`.
pub fn mode_pairs(mode: CountMode, n_sites: usize) -> Result<usize> {
    if mode == CountMode::EverySecond && !n_sites.is_multiple_of(4) {
        return Err(Error::NotDivisibleByFour(n_sites));
    }
    Ok(mode.n_pairs(n_sites))
}

/// Per-site mean and variance at field `g` from the recurrences.
fn per_site(params: &ModelParams, n_pairs: usize) -> Result<(f64, f64)> {
    let spectrum = build_spectrum(params)?;
    let n = params.n_sites as f64;
    let mean = mean_by_recurrence(&spectrum, params.kappa, n_pairs)? / n;
    let var = variance_exact(&spectrum, params.kappa, n_pairs)? / n;
    Ok((mean, var))
}

/// Evaluate a single sweep point.
pub fn sweep_point(params: &ModelParams, opts: &SweepOptions) -> Result<SweepRecord> {
    params.validate()?;
    let n_pairs = mode_pairs(opts.count_mode, params.n_sites)?;
    let n = params.n_sites as f64;
    let spectrum = build_spectrum(params)?;
    let dist = CountDistribution::new(
        fold_pairs(spectrum.v_sq().take(n_pairs), params.kappa),
        opts.count_mode,
        Some(*params),
    );
    let moments = cumulants_from_distribution(&dist);

    let h = opts.step;
    let (m_hi, v_hi) = per_site(&params.with_g(params.g + h), n_pairs)?;
    let (m_lo, v_lo) = per_site(&params.with_g(params.g - h), n_pairs)?;
    let mut d_mean_dg = (m_hi - m_lo) / (2.0 * h);
    let d_var_dg = (v_hi - v_lo) / (2.0 * h);

    let var_per_site = moments.variance / n;
    let mut mean_per_site = moments.mean / n;
    let fano = match params.magnetic_sign {
        MagneticSign::Antiferromagnetic => moments.fano,
        MagneticSign::Ferromagnetic => {
            mean_per_site = ferromagnetic_mean(mean_per_site);
            d_mean_dg = -d_mean_dg;
            // The transformed mean is a magnetization and may be negative;
            // compare the variance against its magnitude.
            (mean_per_site != 0.0).then(|| var_per_site / mean_per_site.abs())
        }
    };

    let contrast = parity_contrast(&dist);
    Ok(SweepRecord {
        params: *params,
        count_mode: opts.count_mode,
        moments,
        mean_per_site,
        var_per_site,
        fano,
        d_mean_dg,
        d_var_dg,
        fd_step: h,
        classification: Classification::from_fano(fano, opts.poisson_tol),
        parity_contrast: contrast,
        split: is_split(contrast, opts.split_threshold),
        near_critical: (params.g - 1.0).abs() < 10.0 * h,
    })
}

/// Central-difference sweep over a strictly increasing field grid.
pub fn derivative_sweep(
    template: &ModelParams,
    g_grid: &[f64],
    opts: &SweepOptions,
) -> Result<Vec<SweepRecord>> {
    template.validate()?;
    mode_pairs(opts.count_mode, template.n_sites)?;
    if g_grid.is_empty() {
        return Err(invalid("g_grid", "empty"));
    }
    if g_grid.iter().any(|g| !g.is_finite()) {
        return Err(invalid("g_grid", "non-finite value"));
    }
    if !(opts.step > 0.0 && opts.step.is_finite()) {
        return Err(invalid(
            "step",
            format!("{} is not a positive step", opts.step),
        ));
    }
    for w in g_grid.windows(2) {
        let spacing = w[1] - w[0];
        if spacing <= 0.0 {
            return Err(invalid("g_grid", "not strictly increasing"));
        }
        if opts.step >= spacing {
            return Err(invalid(
                "step",
                format!("{} not below grid spacing {spacing}", opts.step),
            ));
        }
    }
    opts.exec
        .map(g_grid, |&g| sweep_point(&template.with_g(g), opts))
        .into_iter()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::{distribution, every_second_distribution, parity_product};
    use proptest::prelude::*;

    fn spectrum(n: usize, gamma: f64, g: f64) -> PairSpectrum {
        build_spectrum(&ModelParams::new(n, gamma, g, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn blind_detector_has_zero_mean() {
        let s = spectrum(20, 1.0, 0.5);
        assert_eq!(mean_by_recurrence(&s, 0.0, 10).unwrap(), 0.0);
        assert_eq!(variance_exact(&s, 0.0, 10).unwrap(), 0.0);
        assert_eq!(variance_paper_recurrence(&s, 0.0, 10).unwrap(), 0.0);
    }

    #[test]
    fn ising_zero_field_mean_is_half_per_site() {
        // v^2 = sin^2(phi/2) averages to 1/2 over the band.
        let n = 20000;
        let s = spectrum(n, 1.0, 0.0);
        let m = mean_by_recurrence(&s, 1.0, n / 2).unwrap() / n as f64;
        assert!((m - 0.5).abs() < 1e-3, "{m}");
        let d = distribution(&spectrum(600, 1.0, 0.0), 1.0, 300).unwrap();
        assert!(
            (mean_by_recurrence(&spectrum(600, 1.0, 0.0), 1.0, 300).unwrap() - d.mean()).abs()
                < 1e-10
        );
    }

    #[test]
    fn strong_field_mean_is_kappa_per_site() {
        let s = spectrum(200, 0.4, 1e5);
        let m = mean_by_recurrence(&s, 0.3, 100).unwrap() / 200.0;
        assert!((m - 0.3).abs() < 1e-8);
    }

    #[test]
    fn variance_examples() {
        let full = PairSpectrum::from_v_sq(&[1.0]).unwrap();
        let empty = PairSpectrum::from_v_sq(&[0.0]).unwrap();
        assert_eq!(variance_exact(&full, 1.0, 1).unwrap(), 0.0);
        assert_eq!(variance_exact(&empty, 0.7, 1).unwrap(), 0.0);
        // Binomial(2, 1/2) on a full pair.
        assert!((variance_exact(&full, 0.5, 1).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(variance_paper_recurrence(&full, 0.5, 1).unwrap(), 0.0);
        let half = PairSpectrum::from_v_sq(&[0.3]).unwrap();
        assert!((variance_exact(&half, 1.0, 1).unwrap() - 4.0 * 0.3 * 0.7).abs() < 1e-15);
    }

    #[test]
    fn variance_matches_distribution_at_300_sites() {
        let s = spectrum(300, 1.0, 0.5);
        let d = distribution(&s, 0.9, 150).unwrap();
        assert!((variance_exact(&s, 0.9, 150).unwrap() - d.variance()).abs() < 1e-10);
    }

    #[test]
    fn cumulant_examples() {
        let point = CountDistribution::new(vec![1.0, 0.0, 0.0], CountMode::Total, None);
        let m = cumulants_from_distribution(&point);
        assert_eq!(m.cumulants, [0.0; 3]);
        assert_eq!(m.parity_sum, 1.0);
        assert_eq!(m.fano, None);

        let pair = CountDistribution::new(vec![0.25, 0.5, 0.25], CountMode::Total, None);
        let m = cumulants_from_distribution(&pair);
        assert_eq!(m.mean, 1.0);
        assert_eq!(m.variance, 0.5);
        assert_eq!(m.parity_sum, 0.0);
        assert_eq!(m.cumulants[1], 0.0);
        // Binomial(2, 1/2): kappa_4 = n p q (1 - 6 p q) = -1/4.
        assert!((m.cumulants[2] + 0.25).abs() < 1e-15);
    }

    #[test]
    fn perfect_detection_is_fully_split() {
        let s = spectrum(100, 0.8, 0.3);
        let d = distribution(&s, 1.0, 50).unwrap();
        assert!((parity_contrast(&d) - 1.0).abs() < 1e-14);
        assert!(is_split(parity_contrast(&d), DEFAULT_SPLIT_THRESHOLD));
    }

    #[test]
    fn ferromagnetic_transform() {
        assert_eq!(ferromagnetic_mean(0.5), 0.0);
        assert!((ferromagnetic_mean(0.3) - 0.2).abs() < 1e-16);
    }

    #[test]
    fn ferromagnetic_classification_flips_once() {
        // gamma = 0.5, kappa = 1: the variance overtakes |1/2 - m/N| at small
        // field and falls below it past g ~ 0.65.
        let template = ModelParams::new(300, 0.5, 0.0, 1.0)
            .unwrap()
            .with_sign(MagneticSign::Ferromagnetic);
        let grid: Vec<f64> = (1..=40).map(|i| 0.05 * i as f64).collect();
        let recs = derivative_sweep(&template, &grid, &SweepOptions::default()).unwrap();
        let flips = recs
            .windows(2)
            .filter(|w| w[0].classification != w[1].classification)
            .count();
        assert_eq!(flips, 1);
        let first_sub = recs
            .iter()
            .find(|r| r.classification == Classification::SubPoissonian)
            .unwrap();
        assert!(
            first_sub.params.g > 0.5 && first_sub.params.g < 0.8,
            "{}",
            first_sub.params.g
        );
        // Variance is shared with the antiferromagnetic chain.
        let afm = sweep_point(
            &template
                .with_sign(MagneticSign::Antiferromagnetic)
                .with_g(0.7),
            &SweepOptions::default(),
        )
        .unwrap();
        let fm = sweep_point(&template.with_g(0.7), &SweepOptions::default()).unwrap();
        assert_eq!(afm.var_per_site, fm.var_per_site);
        assert_eq!(fm.mean_per_site, 0.5 - afm.mean_per_site);
        assert_eq!(fm.d_mean_dg, -afm.d_mean_dg);
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        let t = ModelParams::new(40, 1.0, 0.0, 1.0).unwrap();
        let o = SweepOptions::default();
        assert!(derivative_sweep(&t, &[], &o).is_err());
        assert!(derivative_sweep(&t, &[0.5, 0.4], &o).is_err());
        assert!(derivative_sweep(&t, &[0.5, 0.5005], &o).is_err());
        assert!(derivative_sweep(&t, &[0.5, f64::NAN], &o).is_err());
        assert!(derivative_sweep(&t, &[0.5], &SweepOptions { step: 0.0, ..o }).is_err());
        let t10 = ModelParams::new(10, 1.0, 0.0, 1.0).unwrap();
        let every = SweepOptions {
            count_mode: CountMode::EverySecond,
            ..o
        };
        assert!(matches!(
            derivative_sweep(&t10, &[0.5], &every),
            Err(Error::NotDivisibleByFour(10))
        ));
    }

    #[test]
    fn sweep_flags_points_near_criticality() {
        let t = ModelParams::new(100, 1.0, 0.0, 1.0).unwrap();
        let recs = derivative_sweep(&t, &[0.5, 0.995, 1.0, 1.2], &SweepOptions::default()).unwrap();
        let flags: Vec<bool> = recs.iter().map(|r| r.near_critical).collect();
        assert_eq!(flags, [false, true, true, false]);
    }

    #[test]
    fn xx_mean_is_flat_above_saturation() {
        let t = ModelParams::new(400, 0.0, 0.0, 1.0).unwrap();
        let recs = derivative_sweep(&t, &[1.2, 1.5, 3.0], &SweepOptions::default()).unwrap();
        for r in recs {
            assert_eq!(r.d_mean_dg, 0.0);
            assert_eq!(r.var_per_site, 0.0);
        }
    }

    #[test]
    fn ising_variance_derivative_jumps_at_criticality() {
        let t = ModelParams::new(4000, 1.0, 0.0, 1.0).unwrap();
        let opts = SweepOptions {
            step: 1e-4,
            ..Default::default()
        };
        let recs = derivative_sweep(&t, &[0.98, 1.02], &opts).unwrap();
        // Below g = 1 the variance barely moves, above it drops steeply.
        let jump = recs[1].d_var_dg - recs[0].d_var_dg;
        assert!(jump < -0.2, "{jump}");
    }

    #[test]
    fn sequential_and_parallel_sweeps_agree() {
        let t = ModelParams::new(120, 0.7, 0.0, 0.8).unwrap();
        let grid: Vec<f64> = (0..25).map(|i| 0.1 * i as f64).collect();
        let a = derivative_sweep(
            &t,
            &grid,
            &SweepOptions {
                exec: Exec::Sequential,
                ..Default::default()
            },
        )
        .unwrap();
        let b = derivative_sweep(
            &t,
            &grid,
            &SweepOptions {
                exec: Exec::Parallel,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn every_second_records_use_quarter_product() {
        let t = ModelParams::new(40, 1.0, 0.3, 0.9).unwrap();
        let opts = SweepOptions {
            count_mode: CountMode::EverySecond,
            ..Default::default()
        };
        let r = sweep_point(&t, &opts).unwrap();
        let d = every_second_distribution(&build_spectrum(&t).unwrap(), 0.9).unwrap();
        assert!((r.moments.mean - d.mean()).abs() < 1e-12);
        assert_eq!(r.count_mode, CountMode::EverySecond);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn recurrences_match_distribution(half in 1usize..=300, gamma in -1.5..1.5f64, g in -3.0..3.0f64, kappa in 0.0..=1.0f64) {
            let n = 2 * half;
            let s = spectrum(n, gamma, g);
            let d = distribution(&s, kappa, half).unwrap();
            prop_assert!((mean_by_recurrence(&s, kappa, half).unwrap() - d.mean()).abs() < 1e-10);
            prop_assert!((variance_exact(&s, kappa, half).unwrap() - d.variance()).abs() < 1e-10);
            let contrast = parity_contrast(&d);
            prop_assert!((contrast - parity_product(s.v_sq(), kappa)).abs() < 1e-10);
            prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&contrast));
            let m = cumulants_from_distribution(&d);
            prop_assert!(m.variance >= 0.0);
        }

        #[test]
        fn simplified_variance_is_exact_at_full_efficiency(v in prop::collection::vec(0.0..=1.0f64, 1..100)) {
            let s = PairSpectrum::from_v_sq(&v).unwrap();
            let a = variance_paper_recurrence(&s, 1.0, v.len()).unwrap();
            let b = variance_exact(&s, 1.0, v.len()).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn mean_is_linear_in_kappa(half in 1usize..200, gamma in 0.0..1.5f64, g in 0.0..3.0f64, k1 in 0.01..=1.0f64, frac in 0.0..=1.0f64) {
            let s = spectrum(2 * half, gamma, g);
            let k2 = frac * k1;
            let m1 = mean_by_recurrence(&s, k1, half).unwrap();
            let m2 = mean_by_recurrence(&s, k2, half).unwrap();
            prop_assert!((m2 - (k2 / k1) * m1).abs() < 1e-10 * (1.0 + m1));
        }
    }
}
