//! Monte Carlo harness: zero statistics of random trigonometric polynomials,
//! homology-match and certification rates against the closed-form bounds,
//! and orthant convergence tables.
//!
//! Trials are independent. Trial `i` draws its field from
//! `substream_seed(seed, i)`, results are collected in trial order and all
//! tallies are integers, so outputs do not depend on the number of threads.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::admissibility::{PatternSet, Status, Validator, DEFAULT_DEPTH};
use crate::bounds::{bound_1d_periodic, bound_2d_periodic};
use crate::cubical::sign_grid;
use crate::error::{Error, Result};
use crate::homology::{approx_betti, homology_match, reference_betti, reference_resolution};
use crate::orthant::{
    asymptotic_functional, prop41_limit, FunctionalValue, OrthantMethod, StencilPattern,
};
use crate::random_fields::{trig_coeffs, Coefficients, Realization, Realization1D};
use crate::rng::substream_seed;

/// 97.5% standard normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExperimentKind {
    ZeroStats,
    Homology1D,
    Homology2D,
    OrthantConvergence,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::ZeroStats => "zero-stats",
            ExperimentKind::Homology1D => "homology-1d",
            ExperimentKind::Homology2D => "homology-2d",
            ExperimentKind::OrthantConvergence => "orthant-convergence",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        [
            Self::ZeroStats,
            Self::Homology1D,
            Self::Homology2D,
            Self::OrthantConvergence,
        ]
        .into_iter()
        .find(|k| k.name() == name)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown experiment kind {name:?}")))
    }
}

fn default_trials() -> usize {
    1000
}

fn default_depth() -> usize {
    DEFAULT_DEPTH
}

fn default_samples() -> u64 {
    1_000_000
}

/// Experiment configuration, read from JSON.
///
/// The field is either the trigonometric polynomial of degree `N` (`n`, with
/// `n_list` for zero statistics) or explicit `coeffs` in the coefficient file
/// format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default, rename = "N")]
    pub n: Option<usize>,
    #[serde(default, rename = "N_list")]
    pub n_list: Vec<usize>,
    #[serde(default)]
    pub coeffs: Option<serde_json::Value>,
    #[serde(default, rename = "M")]
    pub m_list: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_depth", rename = "D")]
    pub depth: usize,
    #[serde(default)]
    pub seed: u64,
    /// Absolute tolerance; defaults to `1e-12 sqrt(A0)`.
    #[serde(default)]
    pub zero_tol: Option<f64>,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub pattern: Option<String>,
    #[serde(default)]
    pub deltas: Vec<f64>,
    #[serde(default = "default_samples")]
    pub samples: u64,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        Self {
            kind,
            n: None,
            n_list: Vec::new(),
            coeffs: None,
            m_list: Vec::new(),
            trials: default_trials(),
            depth: default_depth(),
            seed: 0,
            zero_tol: None,
            output: None,
            pattern: None,
            deltas: Vec::new(),
            samples: default_samples(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text)?;
        c.check()?;
        Ok(c)
    }

    pub fn check(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(msg.to_string()));
        if self.trials == 0 {
            return bad("trials must be >= 1");
        }
        match self.kind {
            ExperimentKind::Homology1D | ExperimentKind::Homology2D => {
                let min = if self.kind == ExperimentKind::Homology2D {
                    3
                } else {
                    1
                };
                if self.m_list.is_empty() || self.m_list.iter().any(|m| *m < min) {
                    return Err(Error::InvalidArgument(format!(
                        "M list must be nonempty with entries >= {min}"
                    )));
                }
            }
            ExperimentKind::ZeroStats => {
                if self.n.is_none() && self.n_list.is_empty() {
                    return bad("zero statistics need N or N_list");
                }
            }
            ExperimentKind::OrthantConvergence => {
                if self.deltas.is_empty() || self.deltas.windows(2).any(|w| w[1] >= w[0]) {
                    return bad("deltas must be nonempty and strictly decreasing");
                }
                if self.pattern.is_none() {
                    return bad("orthant convergence needs a pattern");
                }
            }
        }
        Ok(())
    }

    fn dim(&self) -> usize {
        match self.kind {
            ExperimentKind::Homology2D => 2,
            ExperimentKind::OrthantConvergence => self
                .pattern
                .as_deref()
                .and_then(|p| StencilPattern::from_name(p).ok())
                .map_or(1, |p| p.dim()),
            _ => 1,
        }
    }

    /// The configured field.
    pub fn coefficients(&self) -> Result<Coefficients> {
        let c = match (&self.coeffs, self.n) {
            (Some(v), _) => Coefficients::from_json(&v.to_string())?,
            (None, Some(n)) => trig_coeffs(self.dim(), n)?,
            (None, None) => return Err(Error::InvalidArgument("config needs N or coeffs".into())),
        };
        if c.dim() != self.dim() {
            return Err(Error::InvalidArgument(format!(
                "{}D coefficients for a {}D experiment",
                c.dim(),
                self.dim()
            )));
        }
        Ok(c)
    }
}

/// `1e-12 sqrt(A0)`, the default near-zero tolerance.
pub fn default_zero_tol(c: &Coefficients) -> f64 {
    let a0 = match c {
        Coefficients::OneD(c) => c.moments().get(0),
        Coefficients::TwoD(c) => c.moments().get(0, 0),
    };
    1e-12 * a0.sqrt()
}

/// Wilson score interval for `k` successes in `n` trials; `(0, 1)` when
/// `n = 0`.
pub fn wilson(k: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let (k, n) = (k as f64, n as f64);
    let p = k / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellRecord {
    #[serde(rename = "M")]
    pub m: usize,
    pub certified: bool,
    pub degenerate: bool,
    #[serde(rename = "match")]
    pub matched: bool,
    pub unresolved: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: usize,
    pub seed: u64,
    pub cells: Vec<CellRecord>,
    pub zeros: Option<usize>,
    pub min_gap: Option<f64>,
}

/// One CSV row of a homology experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub experiment: String,
    pub dim: usize,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    #[serde(rename = "M")]
    pub m: usize,
    pub trials: usize,
    pub seed: u64,
    pub rate_match: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub rate_certified: f64,
    pub cert_lo: f64,
    pub cert_hi: f64,
    pub bound: Option<f64>,
    pub degenerate: usize,
    pub unresolved: usize,
}

impl SummaryRow {
    /// Trials entering the rates.
    pub fn resolved(&self) -> usize {
        self.trials - self.degenerate - self.unresolved
    }
}

/// Certified trial whose homology disagrees with the resolved reference.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SoundnessException {
    pub index: usize,
    pub seed: u64,
    #[serde(rename = "M")]
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroSummary {
    #[serde(rename = "N")]
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub mean_zeros: f64,
    pub sd_zeros: f64,
    /// Trials with an odd zero count (a tangency below grid resolution).
    pub odd_counts: usize,
    pub mean_min_gap: f64,
    pub q05_min_gap: f64,
    /// Least `M` with `L / M` below the 5th percentile of minimal gaps.
    #[serde(rename = "M95")]
    pub m95: usize,
    /// Kac-Rice expectation `2 sqrt(A1 / A0)`.
    pub expected_zeros: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrthantSummary {
    pub pattern: String,
    pub limit: f64,
    pub rows: Vec<FunctionalValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checksums {
    #[serde(rename = "B")]
    pub b: usize,
    #[serde(rename = "I4")]
    pub i4: usize,
    #[serde(rename = "I")]
    pub i: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub version: String,
    pub checksums: Checksums,
    #[serde(rename = "D")]
    pub depth: usize,
    pub zero_tol: f64,
}

impl Metadata {
    fn new(patterns: &PatternSet, depth: usize, zero_tol: f64) -> Self {
        let s = patterns.survivors();
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            checksums: Checksums {
                b: s.b,
                i4: s.i4,
                i: s.i,
            },
            depth,
            zero_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub metadata: Metadata,
    pub experiment: String,
    #[serde(default)]
    pub rows: Vec<SummaryRow>,
    #[serde(default)]
    pub soundness_exceptions: Vec<SoundnessException>,
    #[serde(default)]
    pub zero_stats: Vec<ZeroSummary>,
    #[serde(default)]
    pub orthant: Option<OrthantSummary>,
}

impl Summary {
    fn empty(kind: ExperimentKind, metadata: Metadata) -> Self {
        Self {
            metadata,
            experiment: kind.name().to_string(),
            rows: Vec::new(),
            soundness_exceptions: Vec::new(),
            zero_stats: Vec::new(),
            orthant: None,
        }
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<Summary> {
    config.check()?;
    let patterns = PatternSet::builtin();
    match config.kind {
        ExperimentKind::ZeroStats => {
            let ns: Vec<usize> = if config.n_list.is_empty() {
                config.n.into_iter().collect()
            } else {
                config.n_list.clone()
            };
            let stats = ns
                .iter()
                .map(|&n| zero_stats(n, config.trials, config.seed))
                .collect::<Result<Vec<_>>>()?;
            let mut s = Summary::empty(
                config.kind,
                Metadata::new(patterns, config.depth, config.zero_tol.unwrap_or(0.0)),
            );
            s.zero_stats = stats;
            Ok(s)
        }
        ExperimentKind::Homology1D | ExperimentKind::Homology2D => {
            let c = config.coefficients()?;
            homology_experiment(
                &c,
                config.n,
                &config.m_list,
                config.trials,
                config.depth,
                config.seed,
                config.zero_tol,
            )
        }
        ExperimentKind::OrthantConvergence => {
            let c = config.coefficients()?;
            let pattern = StencilPattern::from_name(config.pattern.as_deref().unwrap_or_default())?;
            let o = orthant_convergence(pattern, &c, &config.deltas, config.samples, config.seed)?;
            let mut s = Summary::empty(config.kind, Metadata::new(patterns, config.depth, 0.0));
            s.orthant = Some(o);
            Ok(s)
        }
    }
}

/// Zeros of a 1D realization on one period: sign changes on a uniform grid
/// of `grid` points (evaluated by FFT), refined by bisection to `1e-12`.
pub fn find_zeros(r: &Realization1D, grid: usize) -> Vec<f64> {
    let l = r.period();
    let mut buf = vec![Complex::new(0.0, 0.0); grid];
    for (k, c, s) in r.terms() {
        // a (g cos + h sin) = Re[(g - i h) e^{i k x}]
        buf[k % grid] += Complex::new(c, -s);
    }
    FftPlanner::new().plan_fft_inverse(grid).process(&mut buf);
    let values: Vec<f64> = buf.iter().map(|z| z.re).collect();
    let h = l / grid as f64;
    let mut zeros = Vec::new();
    for j in 0..grid {
        let (v0, v1) = (values[j], values[(j + 1) % grid]);
        if v0 == 0.0 {
            zeros.push(j as f64 * h);
            continue;
        }
        if v0.signum() == v1.signum() || v1 == 0.0 {
            continue;
        }
        let (mut a, mut b) = (j as f64 * h, (j + 1) as f64 * h);
        let sa = v0.signum();
        while b - a > 1e-12 {
            let mid = 0.5 * (a + b);
            let v = r.value(mid);
            if v == 0.0 {
                a = mid;
                b = mid;
                break;
            }
            if v.signum() == sa {
                a = mid;
            } else {
                b = mid;
            }
        }
        zeros.push(0.5 * (a + b));
    }
    zeros
}

/// Smallest distance between cyclically consecutive zeros.
pub fn min_cyclic_gap(zeros: &[f64], period: f64) -> Option<f64> {
    if zeros.len() < 2 {
        return None;
    }
    let wrap = period - zeros[zeros.len() - 1] + zeros[0];
    zeros
        .windows(2)
        .map(|w| w[1] - w[0])
        .chain([wrap])
        .min_by(f64::total_cmp)
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn zero_stats(n: usize, trials: usize, seed: u64) -> Result<ZeroSummary> {
    let c = match trig_coeffs(1, n)? {
        Coefficients::OneD(c) => c,
        Coefficients::TwoD(_) => unreachable!(),
    };
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    let grid = 50 * n;
    let per_trial: Vec<(usize, Option<f64>)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let r = c.draw(substream_seed(seed, i as u64));
            let z = find_zeros(&r, grid);
            (z.len(), min_cyclic_gap(&z, r.period()))
        })
        .collect();
    let counts: Vec<f64> = per_trial.iter().map(|(k, _)| *k as f64).collect();
    let t = trials as f64;
    let mean = counts.iter().sum::<f64>() / t;
    let sd = if trials > 1 {
        (counts.iter().map(|k| (k - mean).powi(2)).sum::<f64>() / (t - 1.0)).sqrt()
    } else {
        0.0
    };
    let mut gaps: Vec<f64> = per_trial.iter().filter_map(|(_, g)| *g).collect();
    gaps.sort_by(f64::total_cmp);
    let (mean_gap, q05) = if gaps.is_empty() {
        (f64::INFINITY, f64::INFINITY)
    } else {
        (
            gaps.iter().sum::<f64>() / gaps.len() as f64,
            quantile(&gaps, 0.05),
        )
    };
    let m95 = if q05.is_finite() {
        (c.period() / q05).floor() as usize + 1
    } else {
        1
    };
    let mom = c.moments();
    Ok(ZeroSummary {
        n,
        trials,
        seed,
        mean_zeros: mean,
        sd_zeros: sd,
        odd_counts: per_trial.iter().filter(|(k, _)| k % 2 == 1).count(),
        mean_min_gap: mean_gap,
        q05_min_gap: q05,
        m95,
        expected_zeros: 2.0 * (mom.get(1) / mom.get(0)).sqrt() * 2.0 * std::f64::consts::PI
            / c.period(),
    })
}

/// Runs every `M` on one trial. The reference homology is computed once per
/// trial, at the resolution demanded by the largest `M`.
pub fn homology_trial(
    c: &Coefficients,
    m_list: &[usize],
    validator: &Validator<'_>,
    index: usize,
    seed: u64,
) -> Result<TrialRecord> {
    let r = c.draw(seed);
    let m_max = *m_list.iter().max().expect("nonempty M list");
    let reference = match reference_betti(&r, reference_resolution(m_max, r.max_frequency())) {
        Ok(b) => Some(b),
        Err(Error::Unresolved { .. }) => None,
        Err(e) => return Err(e),
    };
    let zero_tol = validator.zero_tol;
    let cells = m_list
        .iter()
        .map(|&m| {
            let grid = sign_grid(&r, m, zero_tol)?;
            let outcome = match &r {
                Realization::OneD(r) => validator.validate_1d(r, m)?,
                Realization::TwoD(r) => validator.validate_2d(r, m)?,
            };
            let degenerate = grid.zero_count() > 0 || outcome.status == Status::Degenerate;
            let matched = match (&reference, degenerate) {
                (Some(b), false) => homology_match(&approx_betti(&r, m, zero_tol)?, b),
                _ => false,
            };
            Ok(CellRecord {
                m,
                certified: outcome.status == Status::Certified && !degenerate,
                degenerate,
                matched,
                unresolved: reference.is_none(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrialRecord {
        index,
        seed,
        cells,
        zeros: None,
        min_gap: None,
    })
}

pub fn run_homology_trials(
    c: &Coefficients,
    m_list: &[usize],
    trials: usize,
    depth: usize,
    seed: u64,
    zero_tol: f64,
) -> Result<Vec<TrialRecord>> {
    if m_list.is_empty() {
        return Err(Error::InvalidArgument("M list must be nonempty".into()));
    }
    let validator = Validator::new(depth)
        .with_zero_tol(zero_tol)
        .first_violation_only(true);
    (0..trials)
        .into_par_iter()
        .map(|i| homology_trial(c, m_list, &validator, i, substream_seed(seed, i as u64)))
        .collect()
}

/// Leading-order lower bound for the field at resolution `m`, if the moment
/// conditions hold.
pub fn bound_for(c: &Coefficients, m: usize) -> Option<f64> {
    match c {
        Coefficients::OneD(c) => bound_1d_periodic(&c.moments(), m).ok().map(|b| b.bound),
        Coefficients::TwoD(c) => bound_2d_periodic(&c.moments(), m).ok().map(|b| b.bound),
    }
}

pub fn summarize(
    c: &Coefficients,
    n: Option<usize>,
    m_list: &[usize],
    records: &[TrialRecord],
    seed: u64,
) -> (Vec<SummaryRow>, Vec<SoundnessException>) {
    let kind = if c.dim() == 1 {
        ExperimentKind::Homology1D
    } else {
        ExperimentKind::Homology2D
    };
    let mut exceptions = Vec::new();
    let rows = m_list
        .iter()
        .enumerate()
        .map(|(j, &m)| {
            let cells: Vec<(&TrialRecord, &CellRecord)> =
                records.iter().map(|t| (t, &t.cells[j])).collect();
            let degenerate = cells.iter().filter(|(_, c)| c.degenerate).count();
            let unresolved = cells
                .iter()
                .filter(|(_, c)| c.unresolved && !c.degenerate)
                .count();
            let used: Vec<&CellRecord> = cells
                .iter()
                .filter(|(_, c)| !c.degenerate && !c.unresolved)
                .map(|(_, c)| *c)
                .collect();
            let k_match = used.iter().filter(|c| c.matched).count();
            let k_cert = used.iter().filter(|c| c.certified).count();
            for (t, cell) in &cells {
                if cell.certified && !cell.matched && !cell.unresolved {
                    exceptions.push(SoundnessException {
                        index: t.index,
                        seed: t.seed,
                        m,
                    });
                }
            }
            let rate = |k: usize| {
                if used.is_empty() {
                    0.0
                } else {
                    k as f64 / used.len() as f64
                }
            };
            let (ci_lo, ci_hi) = wilson(k_match, used.len(), Z95);
            let (cert_lo, cert_hi) = wilson(k_cert, used.len(), Z95);
            SummaryRow {
                experiment: kind.name().to_string(),
                dim: c.dim(),
                n,
                m,
                trials: records.len(),
                seed,
                rate_match: rate(k_match),
                ci_lo,
                ci_hi,
                rate_certified: rate(k_cert),
                cert_lo,
                cert_hi,
                bound: bound_for(c, m),
                degenerate,
                unresolved,
            }
        })
        .collect();
    (rows, exceptions)
}

pub fn homology_experiment(
    c: &Coefficients,
    n: Option<usize>,
    m_list: &[usize],
    trials: usize,
    depth: usize,
    seed: u64,
    zero_tol: Option<f64>,
) -> Result<Summary> {
    let tol = zero_tol.unwrap_or_else(|| default_zero_tol(c));
    let records = run_homology_trials(c, m_list, trials, depth, seed, tol)?;
    let (rows, exceptions) = summarize(c, n, m_list, &records, seed);
    let kind = if c.dim() == 1 {
        ExperimentKind::Homology1D
    } else {
        ExperimentKind::Homology2D
    };
    let mut s = Summary::empty(kind, Metadata::new(PatternSet::builtin(), depth, tol));
    s.rows = rows;
    s.soundness_exceptions = exceptions;
    Ok(s)
}

pub fn orthant_convergence(
    pattern: StencilPattern,
    c: &Coefficients,
    deltas: &[f64],
    samples: u64,
    seed: u64,
) -> Result<OrthantSummary> {
    if deltas.is_empty() || deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument(
            "deltas must be nonempty and strictly decreasing".into(),
        ));
    }
    let n = pattern.signs().len();
    let rows = deltas
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            let method = OrthantMethod::auto(n, samples, substream_seed(seed, i as u64));
            asymptotic_functional(c, pattern, d, method)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OrthantSummary {
        pattern: pattern.name().to_string(),
        limit: prop41_limit(&pattern.signs(), &pattern.v1_limit())?,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// From the file extension; CSV unless it ends in `.json`.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

#[derive(Serialize)]
struct OrthantCsvRow<'a> {
    experiment: &'a str,
    pattern: &'a str,
    delta: f64,
    probability: f64,
    prob_stderr: f64,
    det: f64,
    lambda1: f64,
    functional: f64,
    functional_stderr: f64,
    limit: f64,
}

/// Serializes a summary. CSV starts with `#` metadata lines, then the table
/// for the experiment kind.
pub fn render(summary: &Summary, format: Format) -> Result<Vec<u8>> {
    if format == Format::Json {
        let mut out = serde_json::to_vec_pretty(summary)?;
        out.push(b'\n');
        return Ok(out);
    }
    let md = &summary.metadata;
    let mut out = Vec::new();
    writeln!(out, "# nodal-core {}", md.version)?;
    writeln!(out, "# experiment {}", summary.experiment)?;
    writeln!(
        out,
        "# patterns B={} I4={} I={}",
        md.checksums.b, md.checksums.i4, md.checksums.i
    )?;
    writeln!(out, "# D={} zero_tol={:e}", md.depth, md.zero_tol)?;
    for e in &summary.soundness_exceptions {
        writeln!(
            out,
            "# soundness-exception trial={} seed={} M={}",
            e.index, e.seed, e.m
        )?;
    }
    {
        let mut w = csv::Writer::from_writer(&mut out);
        if let Some(o) = &summary.orthant {
            for r in &o.rows {
                w.serialize(OrthantCsvRow {
                    experiment: &summary.experiment,
                    pattern: &o.pattern,
                    delta: r.delta,
                    probability: r.probability.estimate,
                    prob_stderr: r.probability.stderr,
                    det: r.det,
                    lambda1: r.lambda1,
                    functional: r.functional,
                    functional_stderr: r.functional_stderr,
                    limit: o.limit,
                })?;
            }
        } else if !summary.zero_stats.is_empty() {
            for z in &summary.zero_stats {
                w.serialize(z)?;
            }
        } else {
            if summary.rows.is_empty() {
                w.write_record(HOMOLOGY_COLUMNS)?;
            }
            for r in &summary.rows {
                w.serialize(r)?;
            }
        }
        w.flush()?;
    }
    Ok(out)
}

pub const HOMOLOGY_COLUMNS: [&str; 15] = [
    "experiment",
    "dim",
    "N",
    "M",
    "trials",
    "seed",
    "rate_match",
    "ci_lo",
    "ci_hi",
    "rate_certified",
    "cert_lo",
    "cert_hi",
    "bound",
    "degenerate",
    "unresolved",
];

pub fn write_results(summary: &Summary, path: &Path, format: Format) -> Result<()> {
    std::fs::write(path, render(summary, format)?)?;
    Ok(())
}

/// Reads a JSON summary.
pub fn read_results(path: &Path) -> Result<Summary> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

/// Reads the rows of a homology CSV, skipping `#` metadata lines.
pub fn read_rows_csv(path: &Path) -> Result<Vec<SummaryRow>> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)?;
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_examples() {
        let (lo, hi) = wilson(0, 0, Z95);
        assert_eq!((lo, hi), (0.0, 1.0));
        let (lo, hi) = wilson(50, 100, Z95);
        assert!((lo - 0.4038).abs() < 1e-4 && (hi - 0.5962).abs() < 1e-4);
        let (lo, hi) = wilson(100, 100, Z95);
        assert!(hi == 1.0 && (lo - 0.9630).abs() < 1e-4);
        let (lo, _) = wilson(0, 10, Z95);
        assert_eq!(lo, 0.0);
    }

    #[test]
    fn zeros_of_known_polynomial() {
        let c = crate::random_fields::CoeffSeq1D::trig(3).unwrap();
        // u = cos 3x
        let r = Realization1D::from_parts(c, vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0], 0).unwrap();
        let z = find_zeros(&r, 150);
        assert_eq!(z.len(), 6);
        for (j, x) in z.iter().enumerate() {
            let want = (2 * j + 1) as f64 * std::f64::consts::PI / 6.0;
            assert!((x - want).abs() < 1e-11, "{x} vs {want}");
        }
        let gap = min_cyclic_gap(&z, r.period()).unwrap();
        assert!((gap - std::f64::consts::PI / 3.0).abs() < 1e-11);
    }

    #[test]
    fn zero_counts_are_even_and_deterministic() {
        let a = zero_stats(6, 200, 3).unwrap();
        assert_eq!(a.odd_counts, 0);
        assert_eq!(a, zero_stats(6, 200, 3).unwrap());
        assert!((a.mean_zeros / a.expected_zeros - 1.0).abs() < 0.05);
    }

    #[test]
    fn quantile_interpolates() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 0.5), 3.0);
        assert!((quantile(&v, 0.05) - 1.2).abs() < 1e-15);
    }

    #[test]
    fn config_parsing() {
        let c = ExperimentConfig::from_json(
            r#"{"kind":"Homology1D","N":5,"M":[4,8],"trials":10,"seed":1}"#,
        )
        .unwrap();
        assert_eq!(c.depth, DEFAULT_DEPTH);
        assert_eq!(c.m_list, vec![4, 8]);
        assert!(ExperimentConfig::from_json(r#"{"kind":"Homology2D","N":3,"M":[2]}"#).is_err());
        assert!(
            ExperimentConfig::from_json(r#"{"kind":"Homology1D","N":3,"M":[2],"trials":0}"#)
                .is_err()
        );
        assert!(
            ExperimentConfig::from_json(r#"{"kind":"Homology1D","N":3,"M":[2],"bogus":1}"#).is_ok()
        );
    }

    #[test]
    fn undersampled_trials_mismatch() {
        let c = trig_coeffs(1, 5).unwrap();
        let s = homology_experiment(&c, Some(5), &[2, 40], 100, 6, 11, None).unwrap();
        assert!(s.rows[0].rate_match < 0.5, "{:?}", s.rows[0]);
        assert!(s.rows[1].rate_match > 0.9);
        assert!(s.soundness_exceptions.is_empty());
        assert!(s.rows[0].bound.unwrap() < 0.0);
    }

    #[test]
    fn csv_and_json_round_trip() {
        let c = trig_coeffs(1, 4).unwrap();
        let s = homology_experiment(&c, Some(4), &[3, 9], 20, 4, 5, None).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let json = dir.path().join("s.json");
        let csv_path = dir.path().join("s.csv");
        write_results(&s, &json, Format::Json).unwrap();
        write_results(&s, &csv_path, Format::Csv).unwrap();
        assert_eq!(read_results(&json).unwrap(), s);
        assert_eq!(read_rows_csv(&csv_path).unwrap(), s.rows);
        let text = std::fs::read_to_string(&csv_path).unwrap();
        assert!(text.contains("# patterns B=66 I4=92 I=90"));
        let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
        assert_eq!(header, HOMOLOGY_COLUMNS.join(","));
        assert_eq!(
            render(&s, Format::Csv).unwrap(),
            render(&s, Format::Csv).unwrap()
        );
    }

    #[test]
    fn orthant_table_approaches_limit() {
        let c = trig_coeffs(1, 3).unwrap();
        let o =
            orthant_convergence(StencilPattern::Crossover1D, &c, &[0.2, 0.05, 0.01], 0, 1).unwrap();
        let err: Vec<f64> = o
            .rows
            .iter()
            .map(|r| (r.functional - o.limit).abs())
            .collect();
        assert!(err[0] > err[1] && err[1] > err[2]);
        assert!(err[2] / o.limit < 0.05);
    }
}
