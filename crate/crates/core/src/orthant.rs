//! Gaussian orthant probabilities for sign patterns on small point stencils,
//! their small-`delta` asymptotics, and numeric checks of the covariance
//! spectral expansions.
//!
//! A stencil is a list of points at offsets `p_j * delta / 2` (integer `p_j`)
//! with a required sign `s_j` at each point. For a stationary field with
//! covariance `r`, the values at the points form a Gaussian vector with
//! covariance `C(delta)_{ij} = r(p_i - p_j)`. As `delta -> 0`, `C` degenerates
//! and the orthant probability `P(delta) = P{s_j Z_j >= 0}` decays like a
//! power of `delta` governed by `det C` and the smallest eigenvalue branch.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::random_fields::Coefficients;
use crate::rng::{standard_normal, substream};

/// Symmetric covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix {
    m: DMatrix<f64>,
}

impl CovMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::InvalidArgument(
                "covariance must be a nonempty square matrix".into(),
            ));
        }
        let scale = m.amax().max(f64::MIN_POSITIVE);
        for i in 0..m.nrows() {
            for j in 0..i {
                if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidArgument(format!(
                        "covariance not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { m })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument(
                "covariance rows must all have length n".into(),
            ));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn n(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)]
    }

    pub fn correlation(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)] / (self.m[(i, i)] * self.m[(j, j)]).sqrt()
    }

    /// Eigenvalues ascending with matching unit eigenvectors.
    pub fn eigen(&self) -> (Vec<f64>, Vec<DVector<f64>>) {
        let e = SymmetricEigen::new(self.m.clone());
        let mut idx: Vec<usize> = (0..self.n()).collect();
        idx.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
        let vals = idx.iter().map(|&i| e.eigenvalues[i]).collect();
        let vecs = idx
            .iter()
            .map(|&i| e.eigenvectors.column(i).into_owned())
            .collect();
        (vals, vecs)
    }

    /// Lower factor `F` with `F F^t = C`: Cholesky, or the symmetric square
    /// root from the eigendecomposition when Cholesky fails (semidefinite).
    pub fn factor(&self) -> Result<DMatrix<f64>> {
        if let Some(ch) = self.m.clone().cholesky() {
            return Ok(ch.l());
        }
        let e = SymmetricEigen::new(self.m.clone());
        let tol = -1e-12 * self.m.amax();
        if e.eigenvalues.iter().any(|v| *v < tol) {
            return Err(Error::Factorization(format!(
                "matrix is not positive semidefinite (min eigenvalue {})",
                e.eigenvalues.min()
            )));
        }
        let sqrt = DMatrix::from_diagonal(&e.eigenvalues.map(|v| v.max(0.0).sqrt()));
        Ok(&e.eigenvectors * sqrt)
    }
}

/// `C_ij = r(p_i - p_j)` for points of the field's dimension.
pub fn pattern_cov(coeffs: &Coefficients, points: &[Vec<f64>]) -> Result<CovMatrix> {
    let n = points.len();
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one point".into()));
    }
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let lag: Vec<f64> = points[i]
                .iter()
                .zip(&points[j])
                .map(|(a, b)| a - b)
                .collect();
            if lag.len() != coeffs.dim() {
                return Err(Error::InvalidArgument(
                    "point dimension does not match the field".into(),
                ));
            }
            let v = coeffs.covariance(&lag)?;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    CovMatrix::new(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrthantEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: u64,
}

fn check_signs(signs: &[i8], cov: &CovMatrix) -> Result<()> {
    if signs.len() != cov.n() {
        return Err(Error::InvalidArgument(format!(
            "{} signs for a {}x{} covariance",
            signs.len(),
            cov.n(),
            cov.n()
        )));
    }
    if signs.iter().any(|s| *s != 1 && *s != -1) {
        return Err(Error::InvalidArgument("signs must be +1 or -1".into()));
    }
    Ok(())
}

const MC_BATCH: u64 = 1 << 16;

/// Hit-or-miss estimate of `P{s_j Z_j >= 0 for all j}`. Batch `b` draws from
/// ChaCha stream `b` under `seed`, so the result does not depend on the
/// number of worker threads.
pub fn orthant_mc(
    signs: &[i8],
    cov: &CovMatrix,
    samples: u64,
    seed: u64,
) -> Result<OrthantEstimate> {
    check_signs(signs, cov)?;
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be positive".into()));
    }
    let f = cov.factor()?;
    let n = cov.n();
    let s: Vec<f64> = signs.iter().map(|v| *v as f64).collect();
    let batches = samples.div_ceil(MC_BATCH);
    let hits: u64 = (0..batches)
        .into_par_iter()
        .map(|b| {
            let count = MC_BATCH.min(samples - b * MC_BATCH);
            let mut rng = substream(seed, b);
            let mut e = vec![0.0; n];
            let mut hits = 0u64;
            for _ in 0..count {
                for v in e.iter_mut() {
                    *v = standard_normal(&mut rng);
                }
                let inside = (0..n).all(|i| {
                    let z: f64 = (0..=i).map(|j| f[(i, j)] * e[j]).sum::<f64>()
                        + (i + 1..n).map(|j| f[(i, j)] * e[j]).sum::<f64>();
                    s[i] * z >= 0.0
                });
                hits += inside as u64;
            }
            hits
        })
        .sum();
    let p = hits as f64 / samples as f64;
    Ok(OrthantEstimate {
        estimate: p,
        stderr: (p * (1.0 - p) / samples as f64).sqrt(),
        samples,
    })
}

/// Radial estimator. Writing the orthant as the cone `{S F x >= 0}` and
/// integrating the Gaussian density along rays gives
///
/// `P = Gamma(n/2) / (2 pi^{n/2} (n-1)!) det(C)^{-1/2} E[(w^t G w)^{-n/2}]`
///
/// with `G = (S C S)^{-1}` and `w` uniform on the simplex. In the eigenbasis
/// `w^t G w = sum_k (w . S v_k)^2 / lambda_k`. The integrand stays bounded
/// relative to its mean as `C` degenerates along a direction with
/// `S v_1 > 0`, so tiny probabilities keep a small relative error.
pub fn orthant_radial(
    signs: &[i8],
    cov: &CovMatrix,
    samples: u64,
    seed: u64,
) -> Result<OrthantEstimate> {
    check_signs(signs, cov)?;
    if samples < 2 {
        return Err(Error::InvalidArgument(
            "the radial estimator needs at least two samples".into(),
        ));
    }
    let n = cov.n();
    let (vals, vecs) = cov.eigen();
    if vals[0] <= 0.0 {
        return Err(Error::Factorization(format!(
            "radial estimator needs a positive-definite covariance (min eigenvalue {})",
            vals[0]
        )));
    }
    let lmin = vals[0];
    let u: Vec<Vec<f64>> = vecs
        .iter()
        .map(|v| v.iter().zip(signs).map(|(a, s)| a * *s as f64).collect())
        .collect();
    let weights: Vec<f64> = vals.iter().map(|l| lmin / l).collect();
    let batches = samples.div_ceil(MC_BATCH);
    let (sum, sum2): (f64, f64) = (0..batches)
        .into_par_iter()
        .map(|b| {
            let count = MC_BATCH.min(samples - b * MC_BATCH);
            let mut rng = substream(seed, b);
            let mut w = vec![0.0; n];
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..count {
                for x in w.iter_mut() {
                    *x = rng.sample::<f64, _>(Exp1);
                }
                let total: f64 = w.iter().sum();
                let q: f64 = u
                    .iter()
                    .zip(&weights)
                    .map(|(uk, wk)| {
                        let d: f64 = uk.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / total;
                        wk * d * d
                    })
                    .sum();
                let f = q.powf(-(n as f64) / 2.0);
                s1 += f;
                s2 += f * f;
            }
            (s1, s2)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let nf = samples as f64;
    let mean = sum / nf;
    let var = (sum2 / nf - mean * mean).max(0.0) * nf / (nf - 1.0);
    // (lmin q)^{-n/2} was sampled, so the prefactor carries lmin^{n/2}
    let log_scale = ln_cone_constant(n) + (n as f64 / 2.0) * lmin.ln()
        - 0.5 * vals.iter().map(|l| l.ln()).sum::<f64>();
    let scale = log_scale.exp();
    Ok(OrthantEstimate {
        estimate: mean * scale,
        stderr: (var / nf).sqrt() * scale,
        samples,
    })
}

/// `ln( Gamma(n/2) / (2 pi^{n/2} (n-1)!) )`.
fn ln_cone_constant(n: usize) -> f64 {
    let nf = n as f64;
    ln_gamma(nf / 2.0) - std::f64::consts::LN_2 - nf / 2.0 * PI.ln() - ln_gamma(nf)
}

/// Exact orthant probability for `n <= 3` from the arcsine formulas.
pub fn orthant_exact_small(signs: &[i8], cov: &CovMatrix) -> Result<f64> {
    check_signs(signs, cov)?;
    let n = cov.n();
    let rho = |i: usize, j: usize| -> Result<f64> {
        let r = signs[i] as f64 * signs[j] as f64 * cov.correlation(i, j);
        if !(r.abs() < 1.0) {
            return Err(Error::DegenerateCorrelation(r));
        }
        Ok(r)
    };
    match n {
        1 => Ok(0.5),
        2 => Ok(0.25 + rho(0, 1)?.asin() / (2.0 * PI)),
        3 => Ok(0.125 + (rho(0, 1)?.asin() + rho(0, 2)?.asin() + rho(1, 2)?.asin()) / (4.0 * PI)),
        _ => Err(Error::InvalidArgument(format!(
            "exact formula only for n <= 3, got {n}"
        ))),
    }
}

/// Limit of `P(delta) sqrt(det C / lambda_1^n)` when the eigenvector of the
/// vanishing branch tends to `v1` and `s_j v1_j > 0` for all `j`.
pub fn prop41_limit(signs: &[i8], v1: &[f64]) -> Result<f64> {
    if signs.len() != v1.len() || v1.is_empty() {
        return Err(Error::InvalidArgument(
            "signs and v1 must have the same nonzero length".into(),
        ));
    }
    if v1.iter().any(|v| *v == 0.0) {
        return Err(Error::InvalidArgument("v1 has a zero component".into()));
    }
    let aligned = signs.iter().zip(v1).all(|(s, v)| *s as f64 * v > 0.0);
    let flipped = signs.iter().zip(v1).all(|(s, v)| *s as f64 * v < 0.0);
    if !aligned && !flipped {
        return Err(Error::InvalidArgument(
            "signs do not agree with the sign pattern of v1".into(),
        ));
    }
    let n = v1.len();
    let norm: f64 = v1.iter().map(|v| v * v).sum::<f64>().sqrt();
    let prod: f64 = v1.iter().map(|v| (v / norm).abs()).product();
    Ok(ln_cone_constant(n).exp() / prod)
}

/// Point stencils whose covariance expansions are tabulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StencilPattern {
    /// `(0, delta/2, delta)` on a line, signs `+ - +`.
    Crossover1D,
    /// Three points on a vertical line, signs `+ - +`.
    Line,
    /// Three points on a horizontal line.
    LineTransposed,
    /// Corners of the square of side `delta`, alternating.
    BigSquare,
    /// Corners of a subsquare of side `delta/2`, alternating.
    UnitSquare,
    /// Parallelogram `(0,0), (1,0), (2,1), (1,1)` in units of `delta/2`.
    Parallelogram,
    ParallelogramTransposed,
    /// Parallelogram `(0,0), (1,0), (2,2), (1,2)`.
    LongParallelogram,
    LongParallelogramTransposed,
    /// Four corners positive, centre negative.
    FivePoint,
}

impl StencilPattern {
    pub const ALL: [StencilPattern; 10] = [
        StencilPattern::Crossover1D,
        StencilPattern::Line,
        StencilPattern::LineTransposed,
        StencilPattern::BigSquare,
        StencilPattern::UnitSquare,
        StencilPattern::Parallelogram,
        StencilPattern::ParallelogramTransposed,
        StencilPattern::LongParallelogram,
        StencilPattern::LongParallelogramTransposed,
        StencilPattern::FivePoint,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StencilPattern::Crossover1D => "crossover",
            StencilPattern::Line => "line",
            StencilPattern::LineTransposed => "line-t",
            StencilPattern::BigSquare => "big-square",
            StencilPattern::UnitSquare => "unit-square",
            StencilPattern::Parallelogram => "parallelogram",
            StencilPattern::ParallelogramTransposed => "parallelogram-t",
            StencilPattern::LongParallelogram => "long-parallelogram",
            StencilPattern::LongParallelogramTransposed => "long-parallelogram-t",
            StencilPattern::FivePoint => "five-point",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| {
                let names: Vec<_> = Self::ALL.iter().map(|p| p.name()).collect();
                Error::InvalidArgument(format!(
                    "unknown pattern {name:?}; known: {}",
                    names.join(", ")
                ))
            })
    }

    pub fn dim(self) -> usize {
        if self == StencilPattern::Crossover1D {
            1
        } else {
            2
        }
    }

    /// Offsets in units of `delta / 2`.
    pub fn offsets(self) -> Vec<[i32; 2]> {
        let t = |v: Vec<[i32; 2]>| v.into_iter().map(|[a, b]| [b, a]).collect();
        match self {
            StencilPattern::Crossover1D => vec![[0, 0], [1, 0], [2, 0]],
            StencilPattern::Line => vec![[0, 0], [0, 1], [0, 2]],
            StencilPattern::LineTransposed => t(Self::Line.offsets()),
            StencilPattern::BigSquare => vec![[0, 0], [2, 0], [2, 2], [0, 2]],
            StencilPattern::UnitSquare => vec![[0, 0], [1, 0], [1, 1], [0, 1]],
            StencilPattern::Parallelogram => vec![[0, 0], [1, 0], [2, 1], [1, 1]],
            StencilPattern::ParallelogramTransposed => t(Self::Parallelogram.offsets()),
            StencilPattern::LongParallelogram => vec![[0, 0], [1, 0], [2, 2], [1, 2]],
            StencilPattern::LongParallelogramTransposed => t(Self::LongParallelogram.offsets()),
            StencilPattern::FivePoint => vec![[0, 0], [2, 0], [2, 2], [0, 2], [1, 1]],
        }
    }

    pub fn signs(self) -> Vec<i8> {
        match self {
            StencilPattern::Crossover1D | StencilPattern::Line | StencilPattern::LineTransposed => {
                vec![1, -1, 1]
            }
            StencilPattern::FivePoint => vec![1, 1, 1, 1, -1],
            _ => vec![1, -1, 1, -1],
        }
    }

    pub fn v1_limit(self) -> Vec<f64> {
        match self.signs().len() {
            3 => [1.0, -2.0, 1.0].iter().map(|v| v / 6f64.sqrt()).collect(),
            4 => vec![0.5, -0.5, 0.5, -0.5],
            _ => [1.0, 1.0, 1.0, 1.0, -4.0]
                .iter()
                .map(|v| v / (2.0 * 5f64.sqrt()))
                .collect(),
        }
    }

    /// Physical points at scale `delta`.
    pub fn points(self, delta: f64) -> Vec<Vec<f64>> {
        self.offsets()
            .into_iter()
            .map(|[a, b]| {
                let p = vec![a as f64 * delta / 2.0, b as f64 * delta / 2.0];
                if self.dim() == 1 {
                    p[..1].to_vec()
                } else {
                    p
                }
            })
            .collect()
    }

    /// Leading terms of `det C(delta)` and the eigenvalues, from the scaled
    /// moments `R`. Eigenvalues are listed as: the branch whose eigenvector
    /// tends to `v1`, then the rest ascending.
    pub fn expected_expansion(self, coeffs: &Coefficients) -> Result<SpectralExpansion> {
        let w2 = (2.0 * PI / coeffs.period()).powi(2);
        let v1_limit = self.v1_limit();
        let (det_exponent, det, exps, lams): (u32, f64, Vec<u32>, Vec<f64>) = match (self, coeffs) {
            (StencilPattern::Crossover1D, Coefficients::OneD(c)) => {
                let a = c.moments();
                let r = |l: i32| w2.powi(l) * a.get(l as usize);
                let gap = r(0) * r(2) - r(1) * r(1);
                (
                    6,
                    r(1) * gap / 64.0,
                    vec![4, 2, 0],
                    vec![gap / (96.0 * r(0)), r(1) / 2.0, 3.0 * r(0)],
                )
            }
            (StencilPattern::Crossover1D, _) => {
                return Err(Error::InvalidArgument(
                    "the crossover stencil needs a 1D field".into(),
                ))
            }
            (_, Coefficients::TwoD(c)) => {
                let m = c.moments().scaled(c.period());
                // transposed stencils swap the roles of the axes
                let transposed = matches!(
                    self,
                    StencilPattern::LineTransposed
                        | StencilPattern::ParallelogramTransposed
                        | StencilPattern::LongParallelogramTransposed
                );
                let r = |p: usize, q: usize| if transposed { m.get(q, p) } else { m.get(p, q) };
                let (r00, r01, r10, r11, r20, r02) =
                    (r(0, 0), r(0, 1), r(1, 0), r(1, 1), r(2, 0), r(0, 2));
                let (lo, hi) = (r01.min(r10), r01.max(r10));
                match self {
                    StencilPattern::Line | StencilPattern::LineTransposed => {
                        let gap = r00 * r02 - r01 * r01;
                        (
                            6,
                            r01 * gap / 64.0,
                            vec![4, 2, 0],
                            vec![gap / (96.0 * r00), r01 / 2.0, 3.0 * r00],
                        )
                    }
                    StencilPattern::BigSquare => (
                        8,
                        r00 * r01 * r10 * r11,
                        vec![4, 2, 2, 0],
                        vec![r11 / 4.0, lo, hi, 4.0 * r00],
                    ),
                    StencilPattern::UnitSquare => (
                        8,
                        r00 * r01 * r10 * r11 / 256.0,
                        vec![4, 2, 2, 0],
                        vec![r11 / 64.0, lo / 4.0, hi / 4.0, 4.0 * r00],
                    ),
                    StencilPattern::Parallelogram | StencilPattern::ParallelogramTransposed => {
                        let x = r00 * r11 + r00 * r20 - r10 * r10;
                        let s = (r01 * r01 + 4.0 * r10 * r10).sqrt();
                        (
                            8,
                            r01 * r10 * x / 256.0,
                            vec![4, 2, 2, 0],
                            vec![
                                x / (64.0 * r00),
                                r01 * r10 / (2.0 * r01 + 4.0 * r10 + 2.0 * s),
                                (r01 + 2.0 * r10 + s) / 8.0,
                                4.0 * r00,
                            ],
                        )
                    }
                    StencilPattern::LongParallelogram
                    | StencilPattern::LongParallelogramTransposed => {
                        let x = 4.0 * r00 * r11 + r00 * r20 - r10 * r10;
                        let s = (4.0 * r01 * r01 + r10 * r10).sqrt();
                        (
                            8,
                            r01 * r10 * x / 64.0,
                            vec![4, 2, 2, 0],
                            vec![
                                x / (64.0 * r00),
                                r01 * r10 / (2.0 * r01 + r10 + s),
                                (2.0 * r01 + r10 + s) / 4.0,
                                4.0 * r00,
                            ],
                        )
                    }
                    StencilPattern::FivePoint => {
                        let rs = r00 * (r02 + 2.0 * r11 + r20) - (r01 + r10).powi(2);
                        (
                            12,
                            r01 * r10 * r11 * rs / 64.0,
                            vec![4, 4, 2, 2, 0],
                            vec![rs / (80.0 * r00), r11 / 4.0, lo, hi, 5.0 * r00],
                        )
                    }
                    StencilPattern::Crossover1D => unreachable!(),
                }
            }
            (_, Coefficients::OneD(_)) => {
                return Err(Error::InvalidArgument(format!(
                    "pattern {} needs a 2D field",
                    self.name()
                )))
            }
        };
        Ok(SpectralExpansion {
            det_exponent,
            det_coefficient: Some(det),
            eigen_exponents: exps,
            eigen_coefficients: lams.into_iter().map(Some).collect(),
            v1_limit,
        })
    }
}

/// Leading-order behaviour of `det C(delta)` and its eigenvalues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralExpansion {
    pub det_exponent: u32,
    pub det_coefficient: Option<f64>,
    /// Branch of `v1` first, then the remaining eigenvalues ascending.
    pub eigen_exponents: Vec<u32>,
    pub eigen_coefficients: Vec<Option<f64>>,
    pub v1_limit: Vec<f64>,
}

/// Spectral data of `C(delta)` with the `v1` branch identified.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSample {
    pub delta: f64,
    pub det: f64,
    /// `v1` branch first, then the rest ascending.
    pub eigenvalues: Vec<f64>,
    /// Unit eigenvector of the `v1` branch, oriented to overlap `v1_limit`
    /// positively.
    pub v1: Vec<f64>,
    /// `|<v1, previous v1>|` (or with `v1_limit` for the first sample).
    pub overlap: f64,
}

/// Tracks the `v1` eigenvalue branch across a decreasing `delta` sequence by
/// maximal eigenvector overlap.
pub fn spectral_track(
    coeffs: &Coefficients,
    pattern: StencilPattern,
    deltas: &[f64],
) -> Result<Vec<SpectralSample>> {
    let limit = DVector::from_vec(pattern.v1_limit());
    let mut prev = limit.clone();
    let mut out = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let cov = pattern_cov(coeffs, &pattern.points(delta))?;
        let (vals, vecs) = cov.eigen();
        let (best, overlap) = vecs
            .iter()
            .enumerate()
            .map(|(i, v)| (i, v.dot(&prev).abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        let mut v1 = vecs[best].clone();
        if v1.dot(&limit) < 0.0 {
            v1 = -v1;
        }
        let mut eigenvalues = vec![vals[best]];
        eigenvalues.extend(
            vals.iter()
                .enumerate()
                .filter(|(i, _)| *i != best)
                .map(|(_, v)| *v),
        );
        out.push(SpectralSample {
            delta,
            det: vals.iter().product(),
            eigenvalues,
            v1: v1.iter().copied().collect(),
            overlap,
        });
        prev = v1;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub pattern: StencilPattern,
    pub det_slope: f64,
    pub eigen_slopes: Vec<f64>,
    /// Fitted over expected coefficient at the smallest `delta`.
    pub det_ratio: Option<f64>,
    pub eigen_ratios: Vec<Option<f64>>,
    /// Distance of `v1(delta_min)` from `v1_limit`.
    pub v1_error: f64,
    pub exponents_ok: bool,
    pub coefficients_ok: bool,
    pub v1_ok: bool,
    /// The `v1` branch could not be followed unambiguously.
    pub ambiguous: bool,
}

impl ExpansionReport {
    pub fn passed(&self) -> bool {
        self.exponents_ok && self.coefficients_ok && self.v1_ok && !self.ambiguous
    }
}

pub const SLOPE_TOL: f64 = 0.1;
pub const COEFF_TOL: f64 = 0.02;
pub const V1_TOL: f64 = 1e-2;

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// `delta = 0.1 * 2^-j`, `j = 0..count`.
pub fn default_deltas(count: usize) -> Vec<f64> {
    (0..count).map(|j| 0.1 * 0.5f64.powi(j as i32)).collect()
}

pub fn expansion_check(
    coeffs: &Coefficients,
    pattern: StencilPattern,
    deltas: &[f64],
    expected: &SpectralExpansion,
) -> Result<ExpansionReport> {
    if deltas.len() < 2 || deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Expansion(
            "need at least two strictly decreasing deltas".into(),
        ));
    }
    let samples = spectral_track(coeffs, pattern, deltas)?;
    let n = expected.eigen_exponents.len();
    if samples[0].eigenvalues.len() != n {
        return Err(Error::Expansion(
            "expected expansion has the wrong size".into(),
        ));
    }
    let det_slope = loglog_slope(deltas, &samples.iter().map(|s| s.det).collect::<Vec<_>>());
    let eigen_slopes: Vec<f64> = (0..n)
        .map(|k| {
            loglog_slope(
                deltas,
                &samples.iter().map(|s| s.eigenvalues[k]).collect::<Vec<_>>(),
            )
        })
        .collect();
    let last = samples.last().expect("nonempty");
    let dmin = last.delta;
    let det_ratio = expected
        .det_coefficient
        .map(|c| last.det / dmin.powi(expected.det_exponent as i32) / c);
    let eigen_ratios: Vec<Option<f64>> = expected
        .eigen_coefficients
        .iter()
        .zip(&expected.eigen_exponents)
        .zip(&last.eigenvalues)
        .map(|((c, e), v)| c.map(|c| v / dmin.powi(*e as i32) / c))
        .collect();
    let v1_error = last
        .v1
        .iter()
        .zip(&expected.v1_limit)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let exponents_ok = (det_slope - expected.det_exponent as f64).abs() <= SLOPE_TOL
        && eigen_slopes
            .iter()
            .zip(&expected.eigen_exponents)
            .all(|(s, e)| (s - *e as f64).abs() <= SLOPE_TOL);
    let coefficients_ok = det_ratio
        .into_iter()
        .chain(eigen_ratios.iter().flatten().copied())
        .all(|r| (r - 1.0).abs() <= COEFF_TOL);
    let ambiguous = samples.iter().any(|s| s.overlap < 0.9);
    Ok(ExpansionReport {
        pattern,
        det_slope,
        eigen_slopes,
        det_ratio,
        eigen_ratios,
        v1_error,
        exponents_ok,
        coefficients_ok,
        v1_ok: v1_error <= V1_TOL,
        ambiguous,
    })
}

/// How `P(delta)` is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrthantMethod {
    /// Arcsine formulas; `n <= 3` only.
    Exact,
    HitOrMiss {
        samples: u64,
        seed: u64,
    },
    Radial {
        samples: u64,
        seed: u64,
    },
}

impl OrthantMethod {
    /// Exact for `n <= 3`, radial sampling otherwise.
    pub fn auto(n: usize, samples: u64, seed: u64) -> Self {
        if n <= 3 {
            OrthantMethod::Exact
        } else {
            OrthantMethod::Radial { samples, seed }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalValue {
    pub delta: f64,
    pub probability: OrthantEstimate,
    pub det: f64,
    pub lambda1: f64,
    /// `P(delta) sqrt(det C / lambda_1^n)`.
    pub functional: f64,
    pub functional_stderr: f64,
}

pub fn orthant_probability(
    signs: &[i8],
    cov: &CovMatrix,
    method: OrthantMethod,
) -> Result<OrthantEstimate> {
    match method {
        OrthantMethod::Exact => Ok(OrthantEstimate {
            estimate: orthant_exact_small(signs, cov)?,
            stderr: 0.0,
            samples: 0,
        }),
        OrthantMethod::HitOrMiss { samples, seed } => orthant_mc(signs, cov, samples, seed),
        OrthantMethod::Radial { samples, seed } => orthant_radial(signs, cov, samples, seed),
    }
}

pub fn asymptotic_functional(
    coeffs: &Coefficients,
    pattern: StencilPattern,
    delta: f64,
    method: OrthantMethod,
) -> Result<FunctionalValue> {
    let cov = pattern_cov(coeffs, &pattern.points(delta))?;
    let spec = spectral_track(coeffs, pattern, &[delta])?.remove(0);
    if spec.eigenvalues.iter().any(|v| *v <= 0.0) {
        return Err(Error::Factorization(format!(
            "C(delta) is not positive definite at delta = {delta}"
        )));
    }
    let probability = orthant_probability(&pattern.signs(), &cov, method)?;
    let n = cov.n() as i32;
    let scale = (spec.det / spec.eigenvalues[0].powi(n)).sqrt();
    Ok(FunctionalValue {
        delta,
        probability,
        det: spec.det,
        lambda1: spec.eigenvalues[0],
        functional: probability.estimate * scale,
        functional_stderr: probability.stderr * scale,
    })
}
