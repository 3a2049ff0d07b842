//! The four subcommands. Each computes its records on the worker pool, in
//! grid order, and renders them single-threaded.

use fcs_core::counting::parity_product;
use fcs_core::moments::{is_split, mode_pairs, sweep_point, DEFAULT_SPLIT_THRESHOLD};
use fcs_core::oracle::check::{
    every_second_real_space_deviation, pair_basis_deviation, real_space_deviation,
};
use fcs_core::oracle::{MAX_ORACLE_PAIRS, MAX_ORACLE_SITES};
use fcs_core::{
    build_spectrum, distribution, Classification, CountMode, Exec, MagneticSign, ModelParams,
    SweepOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::error::{CliError, Result};
use crate::output::{float, opt_float, render, render_csv, render_json, sibling, CsvRecord, Sink};

/// Pair-basis deviations above this fail the oracle check.
pub const ORACLE_TOL: f64 = 1e-10;
/// Largest pair count used by the pair-basis part of the oracle check.
pub const ORACLE_CHECK_PAIRS: usize = 8;

/// Parameter points in lexicographic order of (gamma, g, kappa, N) indices.
pub fn grid_points(cfg: &RunConfig) -> Result<Vec<ModelParams>> {
    let mut out =
        Vec::with_capacity(cfg.gamma.len() * cfg.g.len() * cfg.kappa.len() * cfg.sites.len());
    for &gamma in &cfg.gamma {
        for &g in &cfg.g {
            for &kappa in &cfg.kappa {
                for &n in &cfg.sites {
                    out.push(ModelParams::new(n, gamma, g, kappa)?.with_sign(cfg.magnetic.into()));
                }
            }
        }
    }
    Ok(out)
}

fn collect<T>(results: Vec<Result<T>>) -> Result<Vec<T>> {
    results.into_iter().collect()
}

/// Drop the exactly-zero tail so that, e.g., `kappa = 0` gives a single row.
fn support(probs: &[f64]) -> &[f64] {
    let end = probs.iter().rposition(|&p| p != 0.0).map_or(1, |i| i + 1);
    &probs[..end]
}

// ---- dist ----

#[derive(Debug, Clone, Serialize)]
pub struct DistRecord {
    pub gamma: f64,
    pub g: f64,
    pub kappa: f64,
    #[serde(rename = "N")]
    pub n_sites: usize,
    pub mode: CountMode,
    pub mean: f64,
    pub variance: f64,
    /// `p(m)` for `m = 0..probs.len()`; the zero tail is trimmed.
    pub probs: Vec<f64>,
}

impl CsvRecord for DistRecord {
    const HEADER: &'static [&'static str] = &["gamma", "g", "kappa", "N", "m", "x", "p"];

    fn write_rows(&self, out: &mut Vec<Vec<String>>) {
        let n = self.n_sites as f64;
        for (m, &p) in self.probs.iter().enumerate() {
            out.push(vec![
                float(self.gamma),
                float(self.g),
                float(self.kappa),
                self.n_sites.to_string(),
                m.to_string(),
                float((m as f64 - self.mean) / n + 1.0),
                float(p),
            ]);
        }
    }
}

pub fn dist_records(cfg: &RunConfig) -> Result<Vec<DistRecord>> {
    let mode: CountMode = cfg.mode.into();
    let points = grid_points(cfg)?;
    collect(Exec::Parallel.map(&points, |p| {
        let spectrum = build_spectrum(p)?;
        let d = distribution(&spectrum, p.kappa, mode_pairs(mode, p.n_sites)?)?;
        Ok(DistRecord {
            gamma: p.gamma,
            g: p.g,
            kappa: p.kappa,
            n_sites: p.n_sites,
            mode,
            mean: d.mean(),
            variance: d.variance(),
            probs: support(d.probs()).to_vec(),
        })
    }))
}

pub fn cmd_dist(cfg: &RunConfig) -> Result<()> {
    let sink = Sink::open(cfg.out.as_deref())?;
    let records = dist_records(cfg)?;
    sink.write(&render(cfg, &records))
}

// ---- sweep ----

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub gamma: f64,
    pub g: f64,
    pub kappa: f64,
    #[serde(rename = "N")]
    pub n_sites: usize,
    pub mean_per_site: f64,
    pub var_per_site: f64,
    pub fano: Option<f64>,
    pub d_mean_dg: f64,
    pub d_var_dg: f64,
    pub classification: Classification,
    pub parity_contrast: f64,
    pub mode: CountMode,
    pub magnetic: MagneticSign,
    pub cumulants: [f64; 3],
    pub split: bool,
    pub near_critical: bool,
}

impl CsvRecord for SweepRow {
    const HEADER: &'static [&'static str] = &[
        "gamma",
        "g",
        "kappa",
        "N",
        "mean_per_site",
        "var_per_site",
        "fano",
        "d_mean_dg",
        "d_var_dg",
        "classification",
        "parity_contrast",
    ];

    fn write_rows(&self, out: &mut Vec<Vec<String>>) {
        out.push(vec![
            float(self.gamma),
            float(self.g),
            float(self.kappa),
            self.n_sites.to_string(),
            float(self.mean_per_site),
            float(self.var_per_site),
            opt_float(self.fano),
            float(self.d_mean_dg),
            float(self.d_var_dg),
            self.classification.to_string(),
            float(self.parity_contrast),
        ]);
    }
}

pub fn sweep_options(cfg: &RunConfig) -> SweepOptions {
    SweepOptions {
        count_mode: cfg.mode.into(),
        step: cfg.fd_step,
        ..SweepOptions::default()
    }
}

fn check_field_grid(g: &[f64], step: f64) -> Result<()> {
    for w in g.windows(2) {
        if w[1] <= w[0] {
            return Err(CliError::Invalid(
                "g grid must be strictly increasing".into(),
            ));
        }
        if w[1] - w[0] <= step {
            return Err(CliError::Invalid(format!(
                "fd-step {step} is not below the g spacing {}",
                w[1] - w[0]
            )));
        }
    }
    Ok(())
}

pub fn sweep_rows(cfg: &RunConfig) -> Result<Vec<SweepRow>> {
    check_field_grid(&cfg.g, cfg.fd_step)?;
    let opts = sweep_options(cfg);
    let points = grid_points(cfg)?;
    collect(Exec::Parallel.map(&points, |p| {
        let r = sweep_point(p, &opts)?;
        Ok(SweepRow {
            gamma: p.gamma,
            g: p.g,
            kappa: p.kappa,
            n_sites: p.n_sites,
            mean_per_site: r.mean_per_site,
            var_per_site: r.var_per_site,
            fano: r.fano,
            d_mean_dg: r.d_mean_dg,
            d_var_dg: r.d_var_dg,
            classification: r.classification,
            parity_contrast: r.parity_contrast,
            mode: r.count_mode,
            magnetic: p.magnetic_sign,
            cumulants: r.moments.cumulants,
            split: r.split,
            near_critical: r.near_critical,
        })
    }))
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<()> {
    let sink = Sink::open(cfg.out.as_deref())?;
    let rows = sweep_rows(cfg)?;
    sink.write(&render(cfg, &rows))
}

// ---- oracle-check ----

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    PairBasis,
    RealSpace,
    EverySecondRealSpace,
}

impl Route {
    fn as_str(self) -> &'static str {
        match self {
            Route::PairBasis => "pair_basis",
            Route::RealSpace => "real_space",
            Route::EverySecondRealSpace => "every_second_real_space",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// Measured and reported, not gated.
    Reported,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleRow {
    pub route: Route,
    pub gamma: f64,
    pub g: f64,
    pub kappa: f64,
    #[serde(rename = "N")]
    pub n_sites: usize,
    pub n_pairs: usize,
    pub max_dev: f64,
    pub tolerance: Option<f64>,
    pub status: Status,
    /// Real-space routes: degenerate ground space, first basis vector used.
    pub degenerate: Option<bool>,
    pub gap: Option<f64>,
}

impl CsvRecord for OracleRow {
    const HEADER: &'static [&'static str] = &[
        "route",
        "gamma",
        "g",
        "kappa",
        "N",
        "n_pairs",
        "max_dev",
        "tolerance",
        "status",
        "degenerate",
        "gap",
    ];

    fn write_rows(&self, out: &mut Vec<Vec<String>>) {
        let status = match self.status {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Reported => "reported",
        };
        out.push(vec![
            self.route.as_str().to_string(),
            float(self.gamma),
            float(self.g),
            float(self.kappa),
            self.n_sites.to_string(),
            self.n_pairs.to_string(),
            float(self.max_dev),
            opt_float(self.tolerance),
            status.to_string(),
            self.degenerate.map_or_else(String::new, |d| d.to_string()),
            opt_float(self.gap),
        ]);
    }
}

/// Pair-basis points: `points` random draws with `gamma in [0, 1]`,
/// `g in [0, 3]`, `kappa in [0, 1]`, `1..=8` pairs, followed by every
/// configured point whose chain fits in the pair basis.
pub fn pair_basis_points(cfg: &RunConfig) -> Result<Vec<(ModelParams, usize)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or(0));
    let mut out = Vec::new();
    for _ in 0..cfg.points.unwrap_or(0) {
        let n_pairs = rng.gen_range(1..=ORACLE_CHECK_PAIRS);
        let gamma = rng.gen_range(0.0..=1.0);
        let g = rng.gen_range(0.0..=3.0);
        let kappa = rng.gen_range(0.0..=1.0);
        out.push((ModelParams::new(2 * n_pairs, gamma, g, kappa)?, n_pairs));
    }
    for p in grid_points(cfg)? {
        let n_pairs = p.n_sites / 2;
        if n_pairs <= ORACLE_CHECK_PAIRS.min(MAX_ORACLE_PAIRS) {
            out.push((p, n_pairs));
        }
    }
    Ok(out)
}

pub fn oracle_rows(cfg: &RunConfig) -> Result<Vec<OracleRow>> {
    let shift = cfg.corrupt_v_sq.unwrap_or(0.0);
    let pair_points = pair_basis_points(cfg)?;
    let mut rows = collect(Exec::Parallel.map(&pair_points, |(p, n_pairs)| {
        let dev = pair_basis_deviation(p, *n_pairs, |v| v + shift)?;
        Ok(OracleRow {
            route: Route::PairBasis,
            gamma: p.gamma,
            g: p.g,
            kappa: p.kappa,
            n_sites: p.n_sites,
            n_pairs: *n_pairs,
            max_dev: dev,
            tolerance: Some(ORACLE_TOL),
            status: if dev < ORACLE_TOL {
                Status::Pass
            } else {
                Status::Fail
            },
            degenerate: None,
            gap: None,
        })
    }))?;

    // Dense lattice solves, one at a time.
    for p in grid_points(cfg)? {
        if p.n_sites > MAX_ORACLE_SITES {
            return Err(CliError::Invalid(format!(
                "real-space oracle is limited to N <= {MAX_ORACLE_SITES}, got {}",
                p.n_sites
            )));
        }
        let mut checks = vec![(Route::RealSpace, p.n_sites / 2, real_space_deviation(&p)?)];
        if p.n_sites % 4 == 0 {
            checks.push((
                Route::EverySecondRealSpace,
                p.n_sites / 4,
                every_second_real_space_deviation(&p)?,
            ));
        }
        for (route, n_pairs, c) in checks {
            rows.push(OracleRow {
                route,
                gamma: p.gamma,
                g: p.g,
                kappa: p.kappa,
                n_sites: p.n_sites,
                n_pairs,
                max_dev: c.max_dev,
                tolerance: None,
                status: Status::Reported,
                degenerate: Some(c.degenerate),
                gap: Some(c.gap),
            });
        }
    }
    Ok(rows)
}

pub fn cmd_oracle_check(cfg: &RunConfig) -> Result<()> {
    let sink = Sink::open(cfg.out.as_deref())?;
    let rows = oracle_rows(cfg)?;
    sink.write(&render(cfg, &rows))?;
    let failures: Vec<String> = rows
        .iter()
        .filter(|r| r.status == Status::Fail)
        .map(|r| {
            format!(
                "{} gamma={} g={} kappa={} N={} n_pairs={} max_dev={:e}",
                r.route.as_str(),
                r.gamma,
                r.g,
                r.kappa,
                r.n_sites,
                r.n_pairs,
                r.max_dev
            )
        })
        .collect();
    if failures.is_empty() {
        return Ok(());
    }
    const SHOWN: usize = 10;
    let mut msg = format!(
        "{} point(s) above {ORACLE_TOL:e}:\n  {}",
        failures.len(),
        failures[..failures.len().min(SHOWN)].join("\n  ")
    );
    if failures.len() > SHOWN {
        msg.push_str(&format!(
            "\n  ... and {} more in the report",
            failures.len() - SHOWN
        ));
    }
    Err(CliError::Verification(msg))
}

// ---- splitting ----

#[derive(Debug, Clone, Serialize)]
pub struct SplitRecord {
    pub gamma: f64,
    pub g: f64,
    pub kappa: f64,
    #[serde(rename = "N")]
    pub n_sites: usize,
    pub parity_contrast: f64,
    /// `prod_k (1 - 4 kappa (1 - kappa) v_k^2)`.
    pub closed_form: f64,
    pub split: bool,
    pub mean: f64,
    pub variance: f64,
    pub probs: Vec<f64>,
}

impl CsvRecord for SplitRecord {
    const HEADER: &'static [&'static str] = &[
        "gamma",
        "g",
        "kappa",
        "N",
        "parity_contrast",
        "closed_form",
        "split",
        "mean",
        "variance",
    ];

    fn write_rows(&self, out: &mut Vec<Vec<String>>) {
        out.push(vec![
            float(self.gamma),
            float(self.g),
            float(self.kappa),
            self.n_sites.to_string(),
            float(self.parity_contrast),
            float(self.closed_form),
            self.split.to_string(),
            float(self.mean),
            float(self.variance),
        ]);
    }
}

/// The per-`m` table written next to the splitting summary in CSV mode.
struct SplitDist<'a>(&'a SplitRecord);

impl CsvRecord for SplitDist<'_> {
    const HEADER: &'static [&'static str] = &["gamma", "g", "kappa", "N", "m", "p"];

    fn write_rows(&self, out: &mut Vec<Vec<String>>) {
        let r = self.0;
        for (m, &p) in r.probs.iter().enumerate() {
            out.push(vec![
                float(r.gamma),
                float(r.g),
                float(r.kappa),
                r.n_sites.to_string(),
                m.to_string(),
                float(p),
            ]);
        }
    }
}

pub fn split_records(cfg: &RunConfig) -> Result<Vec<SplitRecord>> {
    let mode: CountMode = cfg.mode.into();
    let points = grid_points(cfg)?;
    collect(Exec::Parallel.map(&points, |p| {
        let n_pairs = mode_pairs(mode, p.n_sites)?;
        let spectrum = build_spectrum(p)?;
        let d = distribution(&spectrum, p.kappa, n_pairs)?;
        let contrast = d.parity_sum();
        Ok(SplitRecord {
            gamma: p.gamma,
            g: p.g,
            kappa: p.kappa,
            n_sites: p.n_sites,
            parity_contrast: contrast,
            closed_form: parity_product(spectrum.v_sq().take(n_pairs), p.kappa),
            split: is_split(contrast, DEFAULT_SPLIT_THRESHOLD),
            mean: d.mean(),
            variance: d.variance(),
            probs: support(d.probs()).to_vec(),
        })
    }))
}

/// CSV writes the summary to `--out` and the distributions to
/// `<stem>_dist.<ext>` (both to standard output, separated by a blank line,
/// without `--out`). JSON writes one document.
pub fn cmd_splitting(cfg: &RunConfig) -> Result<()> {
    match cfg.format {
        Format::Json => {
            let sink = Sink::open(cfg.out.as_deref())?;
            let records = split_records(cfg)?;
            sink.write(&render_json(cfg, &records))
        }
        Format::Csv => {
            let dist_path = cfg.out.as_deref().map(|p| sibling(p, "dist"));
            let summary_sink = Sink::open(cfg.out.as_deref())?;
            let dist_sink = Sink::open(dist_path.as_deref())?;
            let records = split_records(cfg)?;
            let dists: Vec<SplitDist> = records.iter().map(SplitDist).collect();
            let summary = render_csv(cfg, &records);
            let table = render_csv(cfg, &dists);
            match (summary_sink, dist_sink) {
                (Sink::Stdout, Sink::Stdout) => Sink::Stdout.write(&format!("{summary}\n{table}")),
                (a, b) => {
                    a.write(&summary)?;
                    b.write(&table)
                }
            }
        }
    }
}
