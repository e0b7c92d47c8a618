//! Random periodic Fourier series in one and two dimensions.
//!
//! A one-dimensional field on `[0, L]` is
//!
//! ```text
//! u(x) = sum_{k=0}^{K} a_k (g_{2k} cos(2 pi k x / L) + g_{2k-1} sin(2 pi k x / L))
//! ```
//!
//! and a two-dimensional field on `[0, L]^2` is the product-basis series with
//! four Gaussian weights `g_{k,l,1..4}` per frequency pair. Coefficient
//! sequences are always finite; the truncation order `K` is recorded.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, standard_normal};

/// Coefficients `a_0..a_K` of a one-dimensional random periodic series.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffSeq1D {
    period: f64,
    a: Vec<f64>,
}

impl CoeffSeq1D {
    pub fn new(period: f64, a: Vec<f64>) -> Result<Self> {
        check_period(period)?;
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidCoefficients("non-finite coefficient".into()));
        }
        let nonzero = a.iter().filter(|v| **v != 0.0).count();
        if nonzero < 2 {
            return Err(Error::InvalidCoefficients(format!(
                "at least two coefficients must be nonzero, found {nonzero}"
            )));
        }
        Ok(Self { period, a })
    }

    /// Random trigonometric polynomial of degree `n` on `[0, 2 pi]`:
    /// `a_k = 1` for `1 <= k <= n`, `a_0 = 0`.
    pub fn trig(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "degree N must be >= 2, got {n}"
            )));
        }
        let mut a = vec![1.0; n + 1];
        a[0] = 0.0;
        Self::new(TAU, a)
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.a
    }

    /// Truncation order `K`.
    pub fn order(&self) -> usize {
        self.a.len() - 1
    }

    /// Largest frequency with a nonzero coefficient.
    pub fn max_frequency(&self) -> usize {
        self.a.iter().rposition(|v| *v != 0.0).unwrap_or(0)
    }

    pub fn moments(&self) -> SpectralMoments1D {
        let mut m = [0.0; 4];
        for (k, a) in self.a.iter().enumerate() {
            let k2 = (k * k) as f64;
            let a2 = a * a;
            m[0] += a2;
            m[1] += k2 * a2;
            m[2] += k2 * k2 * a2;
            m[3] += k2 * k2 * k2 * a2;
        }
        SpectralMoments1D { a: m }
    }

    /// Spatial covariance `r(lag) = sum a_k^2 cos(2 pi k lag / L)`.
    pub fn covariance(&self, lag: f64) -> f64 {
        let w = TAU * lag / self.period;
        self.a
            .iter()
            .enumerate()
            .map(|(k, a)| a * a * (w * k as f64).cos())
            .sum()
    }

    /// Draws `g_0..g_{2K}` i.i.d. standard normal from the seeded generator.
    pub fn draw(&self, seed: u64) -> Realization1D {
        let mut rng = rng_from_seed(seed);
        let g = (0..2 * self.order() + 1)
            .map(|_| standard_normal(&mut rng))
            .collect();
        Realization1D {
            coeffs: self.clone(),
            g,
            seed,
        }
    }
}

/// Coefficients `a_{k,l}`, `0 <= k, l <= K`, of a doubly periodic series.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffSeq2D {
    period: f64,
    a: Vec<Vec<f64>>,
}

impl CoeffSeq2D {
    pub fn new(period: f64, a: Vec<Vec<f64>>) -> Result<Self> {
        check_period(period)?;
        let n = a.len();
        if n == 0 || a.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidCoefficients(
                "coefficient array must be square".into(),
            ));
        }
        if a.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidCoefficients("non-finite coefficient".into()));
        }
        let s = Self { period, a };
        if !s.satisfies_nondegeneracy() {
            return Err(Error::InvalidCoefficients(
                "need nonzero a[k1][l1], a[k2][l2] with k1,l1 >= 1, k1 != k2, l1 != l2, \
                 k1^2+l1^2 != k2^2+l2^2"
                    .into(),
            ));
        }
        Ok(s)
    }

    pub fn trig(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "degree N must be >= 2, got {n}"
            )));
        }
        let a = (0..=n)
            .map(|k| {
                (0..=n)
                    .map(|l| if k >= 1 && l >= 1 { 1.0 } else { 0.0 })
                    .collect()
            })
            .collect();
        Self::new(TAU, a)
    }

    /// The two-frequency condition that makes every leading covariance
    /// coefficient nonzero.
    pub fn satisfies_nondegeneracy(&self) -> bool {
        let nz: Vec<(usize, usize)> = self
            .a
            .iter()
            .enumerate()
            .flat_map(|(k, row)| {
                row.iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(move |(l, _)| (k, l))
            })
            .collect();
        nz.iter().any(|&(k1, l1)| {
            k1 >= 1
                && l1 >= 1
                && nz
                    .iter()
                    .any(|&(k2, l2)| k1 != k2 && l1 != l2 && k1 * k1 + l1 * l1 != k2 * k2 + l2 * l2)
        })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn coeffs(&self) -> &[Vec<f64>] {
        &self.a
    }

    pub fn order(&self) -> usize {
        self.a.len() - 1
    }

    pub fn max_frequency(&self) -> usize {
        let mut m = 0;
        for (k, row) in self.a.iter().enumerate() {
            for (l, v) in row.iter().enumerate() {
                if *v != 0.0 {
                    m = m.max(k).max(l);
                }
            }
        }
        m
    }

    pub fn moments(&self) -> SpectralMoments2D {
        let mut m = [[0.0; 3]; 3];
        for (k, row) in self.a.iter().enumerate() {
            let k2 = (k * k) as f64;
            for (l, a) in row.iter().enumerate() {
                let l2 = (l * l) as f64;
                let a2 = a * a;
                for (p, mp) in m.iter_mut().enumerate() {
                    for (q, mpq) in mp.iter_mut().enumerate() {
                        if p + q <= 2 {
                            *mpq += k2.powi(p as i32) * l2.powi(q as i32) * a2;
                        }
                    }
                }
            }
        }
        SpectralMoments2D { a: m }
    }

    pub fn covariance(&self, lag: [f64; 2]) -> f64 {
        let w0 = TAU * lag[0] / self.period;
        let w1 = TAU * lag[1] / self.period;
        let mut sum = 0.0;
        for (k, row) in self.a.iter().enumerate() {
            let ck = (w0 * k as f64).cos();
            for (l, a) in row.iter().enumerate() {
                if *a != 0.0 {
                    sum += a * a * ck * (w1 * l as f64).cos();
                }
            }
        }
        sum
    }

    pub fn draw(&self, seed: u64) -> Realization2D {
        let mut rng = rng_from_seed(seed);
        let n = self.a.len();
        let g = (0..n)
            .map(|_| {
                (0..n)
                    .map(|_| {
                        let mut w = [0.0; 4];
                        for v in &mut w {
                            *v = standard_normal(&mut rng);
                        }
                        w
                    })
                    .collect()
            })
            .collect();
        Realization2D::assemble(self.clone(), g, seed)
    }
}

fn check_period(period: f64) -> Result<()> {
    if !(period.is_finite() && period > 0.0) {
        return Err(Error::InvalidCoefficients(format!(
            "period must be positive, got {period}"
        )));
    }
    Ok(())
}

/// `A_l = sum k^{2l} a_k^2` for `l = 0..=3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralMoments1D {
    pub a: [f64; 4],
}

impl SpectralMoments1D {
    pub fn get(&self, l: usize) -> f64 {
        self.a[l]
    }

    /// `A_0 A_2 - A_1^2`, strictly positive when two distinct frequencies are
    /// present.
    pub fn gap(&self) -> f64 {
        self.a[0] * self.a[2] - self.a[1] * self.a[1]
    }
}

/// `A_{p,q} = sum k^{2p} l^{2q} a_{k,l}^2` for `p + q <= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralMoments2D {
    a: [[f64; 3]; 3],
}

impl SpectralMoments2D {
    /// Panics if `p + q > 2`.
    pub fn get(&self, p: usize, q: usize) -> f64 {
        assert!(p + q <= 2, "moment A_({p},{q}) is not tracked");
        self.a[p][q]
    }

    /// Moments scaled to the covariance expansion: `R_{p,q} = (2 pi / L)^{2p+2q} A_{p,q}`.
    pub fn scaled(&self, period: f64) -> SpectralMoments2D {
        let w2 = (TAU / period).powi(2);
        let mut a = self.a;
        for (p, row) in a.iter_mut().enumerate() {
            for (q, v) in row.iter_mut().enumerate() {
                *v *= w2.powi((p + q) as i32);
            }
        }
        SpectralMoments2D { a }
    }
}

/// One sample of a one-dimensional random series.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization1D {
    coeffs: CoeffSeq1D,
    g: Vec<f64>,
    seed: u64,
}

impl Realization1D {
    pub fn from_parts(coeffs: CoeffSeq1D, g: Vec<f64>, seed: u64) -> Result<Self> {
        let want = 2 * coeffs.order() + 1;
        if g.len() != want {
            return Err(Error::InvalidArgument(format!(
                "expected {want} Gaussian weights, got {}",
                g.len()
            )));
        }
        Ok(Self { coeffs, g, seed })
    }

    pub fn coeffs(&self) -> &CoeffSeq1D {
        &self.coeffs
    }

    pub fn weights(&self) -> &[f64] {
        &self.g
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn period(&self) -> f64 {
        self.coeffs.period
    }

    pub fn evaluate(&self, x: f64) -> Result<f64> {
        if !(0.0..=self.period()).contains(&x) {
            return Err(Error::OutOfDomain {
                point: vec![x],
                period: self.period(),
            });
        }
        Ok(self.value(x))
    }

    /// Series value without the domain check; periodic in `x`.
    pub fn value(&self, x: f64) -> f64 {
        let w = TAU * x / self.period();
        let mut sum = 0.0;
        for (k, a) in self.coeffs.a.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            let t = w * k as f64;
            let mut term = self.g[2 * k] * t.cos();
            if k > 0 {
                term += self.g[2 * k - 1] * t.sin();
            }
            sum += a * term;
        }
        sum
    }

    /// Values at `x_j = j L / n` for `j = 0..=n`.
    ///
    /// Angles are reduced exactly (`k j mod n`) so the result is exactly
    /// periodic: entry `n` equals entry `0`.
    pub fn sample_uniform(&self, n: usize) -> Vec<f64> {
        let table = TrigTable::new(n);
        let terms: Vec<(usize, f64, f64)> = self
            .coeffs
            .a
            .iter()
            .enumerate()
            .filter(|(_, a)| **a != 0.0)
            .map(|(k, a)| {
                let s = if k > 0 { self.g[2 * k - 1] } else { 0.0 };
                (k, a * self.g[2 * k], a * s)
            })
            .collect();
        (0..=n)
            .map(|j| {
                terms
                    .iter()
                    .map(|&(k, c, s)| {
                        let m = (k * j) % n;
                        c * table.cos[m] + s * table.sin[m]
                    })
                    .sum()
            })
            .collect()
    }

    /// `sup |u'|` bound: `sum |a_k| (2 pi k / L) (|g_{2k}| + |g_{2k-1}|)`.
    pub fn slope_bound(&self) -> f64 {
        let w = TAU / self.period();
        self.coeffs
            .a
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, a)| a.abs() * w * k as f64 * (self.g[2 * k].abs() + self.g[2 * k - 1].abs()))
            .sum()
    }

    /// `sum |a_k| (|g_{2k}| + |g_{2k-1}|)`, a bound on `sup |u|`.
    pub fn amplitude_bound(&self) -> f64 {
        self.coeffs
            .a
            .iter()
            .enumerate()
            .map(|(k, a)| {
                let s = if k > 0 { self.g[2 * k - 1].abs() } else { 0.0 };
                a.abs() * (self.g[2 * k].abs() + s)
            })
            .sum()
    }

    /// `(k, a_k g_{2k}, a_k g_{2k-1})` for every nonzero coefficient.
    pub(crate) fn terms(&self) -> Vec<(usize, f64, f64)> {
        self.coeffs
            .a
            .iter()
            .enumerate()
            .filter(|(_, a)| **a != 0.0)
            .map(|(k, a)| {
                let s = if k > 0 { self.g[2 * k - 1] } else { 0.0 };
                (k, a * self.g[2 * k], a * s)
            })
            .collect()
    }

    /// The field `-u`.
    pub fn negated(&self) -> Self {
        Self {
            coeffs: self.coeffs.clone(),
            g: self.g.iter().map(|v| -v).collect(),
            seed: self.seed,
        }
    }

    /// The field `x -> u(L - x)`.
    pub fn reflected(&self) -> Self {
        let mut g = self.g.clone();
        for k in 1..=self.coeffs.order() {
            g[2 * k - 1] = -g[2 * k - 1];
        }
        Self {
            coeffs: self.coeffs.clone(),
            g,
            seed: self.seed,
        }
    }
}

/// One sample of a doubly periodic random series.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization2D {
    coeffs: CoeffSeq2D,
    g: Vec<Vec<[f64; 4]>>,
    seed: u64,
    // (k, l, a g1, a g2, a g3, a g4) for every nonzero coefficient
    terms: Vec<(usize, usize, [f64; 4])>,
}

impl Realization2D {
    fn assemble(coeffs: CoeffSeq2D, g: Vec<Vec<[f64; 4]>>, seed: u64) -> Self {
        let mut terms = Vec::new();
        for (k, row) in coeffs.a.iter().enumerate() {
            for (l, a) in row.iter().enumerate() {
                if *a != 0.0 {
                    let w = g[k][l];
                    terms.push((k, l, [a * w[0], a * w[1], a * w[2], a * w[3]]));
                }
            }
        }
        Self {
            coeffs,
            g,
            seed,
            terms,
        }
    }

    pub fn from_parts(coeffs: CoeffSeq2D, g: Vec<Vec<[f64; 4]>>, seed: u64) -> Result<Self> {
        let n = coeffs.a.len();
        if g.len() != n || g.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidArgument(format!(
                "Gaussian weight array must have shape {n}x{n}x4"
            )));
        }
        Ok(Self::assemble(coeffs, g, seed))
    }

    pub fn coeffs(&self) -> &CoeffSeq2D {
        &self.coeffs
    }

    pub fn weights(&self) -> &[Vec<[f64; 4]>] {
        &self.g
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn period(&self) -> f64 {
        self.coeffs.period
    }

    pub fn evaluate(&self, x: [f64; 2]) -> Result<f64> {
        let l = self.period();
        if !(0.0..=l).contains(&x[0]) || !(0.0..=l).contains(&x[1]) {
            return Err(Error::OutOfDomain {
                point: x.to_vec(),
                period: l,
            });
        }
        Ok(self.value(x))
    }

    pub fn value(&self, x: [f64; 2]) -> f64 {
        let w0 = TAU * x[0] / self.period();
        let w1 = TAU * x[1] / self.period();
        self.terms
            .iter()
            .map(|&(k, l, c)| {
                let (s0, c0) = (w0 * k as f64).sin_cos();
                let (s1, c1) = (w1 * l as f64).sin_cos();
                c[0] * c0 * c1 + c[1] * c0 * s1 + c[2] * s0 * c1 + c[3] * s0 * s1
            })
            .sum()
    }

    /// Values at `(i L / n, j L / n)`, stored `j * (n + 1) + i` (first
    /// coordinate fastest).
    pub fn sample_uniform(&self, n: usize) -> Vec<f64> {
        let table = TrigTable::new(n);
        let mut out = vec![0.0; (n + 1) * (n + 1)];
        let kmax = self.coeffs.order();
        let mut p = vec![[0.0; 2]; kmax + 1];
        for i in 0..=n {
            // fold the x1 dependence first, then sweep x2
            for v in p.iter_mut() {
                *v = [0.0; 2];
            }
            for &(k, l, c) in &self.terms {
                let (ck, sk) = table.cs(k, i as i64);
                p[l][0] += c[0] * ck + c[2] * sk;
                p[l][1] += c[1] * ck + c[3] * sk;
            }
            for j in 0..=n {
                let mut v = 0.0;
                for (l, pl) in p.iter().enumerate() {
                    if pl[0] != 0.0 || pl[1] != 0.0 {
                        let (cl, sl) = table.cs(l, j as i64);
                        v += pl[0] * cl + pl[1] * sl;
                    }
                }
                out[j * (n + 1) + i] = v;
            }
        }
        out
    }

    /// Per-axis slope bounds `(G_1, G_2)` with
    /// `|u(x) - u(y)| <= G_1 |x_1 - y_1| + G_2 |x_2 - y_2|`.
    pub fn slope_bounds(&self) -> [f64; 2] {
        let w = TAU / self.period();
        let mut g = [0.0; 2];
        for &(k, l, c) in &self.terms {
            let s: f64 = c.iter().map(|v| v.abs()).sum();
            g[0] += w * k as f64 * s;
            g[1] += w * l as f64 * s;
        }
        g
    }

    pub fn amplitude_bound(&self) -> f64 {
        self.terms
            .iter()
            .map(|(_, _, c)| c.iter().map(|v| v.abs()).sum::<f64>())
            .sum()
    }

    pub(crate) fn terms(&self) -> &[(usize, usize, [f64; 4])] {
        &self.terms
    }

    pub fn negated(&self) -> Self {
        let g = self
            .g
            .iter()
            .map(|row| row.iter().map(|w| w.map(|v| -v)).collect())
            .collect();
        Self::assemble(self.coeffs.clone(), g, self.seed)
    }

    /// The field `x -> u(L - x_1, x_2)`.
    pub fn reflect_x1(&self) -> Self {
        let g = self
            .g
            .iter()
            .map(|row| row.iter().map(|w| [w[0], w[1], -w[2], -w[3]]).collect())
            .collect();
        Self::assemble(self.coeffs.clone(), g, self.seed)
    }

    /// The field `x -> u(x_2, x_1)`.
    pub fn transpose(&self) -> Self {
        let n = self.g.len();
        let a = (0..n)
            .map(|k| (0..n).map(|l| self.coeffs.a[l][k]).collect())
            .collect();
        let g = (0..n)
            .map(|k| {
                (0..n)
                    .map(|l| {
                        let w = self.g[l][k];
                        [w[0], w[2], w[1], w[3]]
                    })
                    .collect()
            })
            .collect();
        let coeffs = CoeffSeq2D {
            period: self.coeffs.period,
            a,
        };
        Self::assemble(coeffs, g, self.seed)
    }
}

/// `cos(2 pi m / n)`, `sin(2 pi m / n)` for `m = 0..n`.
#[derive(Debug, Clone)]
pub(crate) struct TrigTable {
    n: usize,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl TrigTable {
    pub(crate) fn new(n: usize) -> Self {
        let n = n.max(1);
        let (sin, cos) = (0..n)
            .map(|m| (TAU * m as f64 / n as f64).sin_cos())
            .unzip();
        Self { n, cos, sin }
    }

    #[inline]
    pub(crate) fn cs(&self, k: usize, j: i64) -> (f64, f64) {
        let m = ((k as i64 * j).rem_euclid(self.n as i64)) as usize;
        (self.cos[m], self.sin[m])
    }
}

/// Coefficients of either dimension.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficients {
    OneD(CoeffSeq1D),
    TwoD(CoeffSeq2D),
}

impl Coefficients {
    pub fn dim(&self) -> usize {
        match self {
            Coefficients::OneD(_) => 1,
            Coefficients::TwoD(_) => 2,
        }
    }

    pub fn period(&self) -> f64 {
        match self {
            Coefficients::OneD(c) => c.period(),
            Coefficients::TwoD(c) => c.period(),
        }
    }

    pub fn max_frequency(&self) -> usize {
        match self {
            Coefficients::OneD(c) => c.max_frequency(),
            Coefficients::TwoD(c) => c.max_frequency(),
        }
    }

    pub fn draw(&self, seed: u64) -> Realization {
        match self {
            Coefficients::OneD(c) => Realization::OneD(c.draw(seed)),
            Coefficients::TwoD(c) => Realization::TwoD(c.draw(seed)),
        }
    }

    /// Covariance at a lag of matching dimension.
    pub fn covariance(&self, lag: &[f64]) -> Result<f64> {
        match (self, lag) {
            (Coefficients::OneD(c), [d]) => Ok(c.covariance(*d)),
            (Coefficients::TwoD(c), [d0, d1]) => Ok(c.covariance([*d0, *d1])),
            _ => Err(Error::InvalidArgument(format!(
                "lag of dimension {} for a {}D field",
                lag.len(),
                self.dim()
            ))),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: CoeffFile = serde_json::from_str(text)?;
        file.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&CoeffFile::from(self)).expect("coefficients serialize")
    }
}

/// Random trigonometric polynomial coefficients of degree `n`.
pub fn trig_coeffs(dim: usize, n: usize) -> Result<Coefficients> {
    match dim {
        1 => Ok(Coefficients::OneD(CoeffSeq1D::trig(n)?)),
        2 => Ok(Coefficients::TwoD(CoeffSeq2D::trig(n)?)),
        _ => Err(Error::InvalidArgument(format!(
            "dimension must be 1 or 2, got {dim}"
        ))),
    }
}

/// A realization of either dimension.
#[derive(Debug, Clone, PartialEq)]
pub enum Realization {
    OneD(Realization1D),
    TwoD(Realization2D),
}

impl Realization {
    pub fn dim(&self) -> usize {
        match self {
            Realization::OneD(_) => 1,
            Realization::TwoD(_) => 2,
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            Realization::OneD(r) => r.seed(),
            Realization::TwoD(r) => r.seed(),
        }
    }

    pub fn period(&self) -> f64 {
        match self {
            Realization::OneD(r) => r.period(),
            Realization::TwoD(r) => r.period(),
        }
    }

    pub fn max_frequency(&self) -> usize {
        match self {
            Realization::OneD(r) => r.coeffs().max_frequency(),
            Realization::TwoD(r) => r.coeffs().max_frequency(),
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        match (self, x) {
            (Realization::OneD(r), [x0]) => r.evaluate(*x0),
            (Realization::TwoD(r), [x0, x1]) => r.evaluate([*x0, *x1]),
            _ => Err(Error::InvalidArgument(format!(
                "point of dimension {} for a {}D field",
                x.len(),
                self.dim()
            ))),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: RealizationFile = serde_json::from_str(text)?;
        file.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&RealizationFile::from(self)).expect("realization serializes")
    }
}

/// Shared-value `a`/`g` payload: nested arrays whose depth depends on `dim`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum Nested {
    One(Vec<f64>),
    Two(Vec<Vec<f64>>),
    Three(Vec<Vec<Vec<f64>>>),
}

/// On-disk coefficient file: `{dim, L, K, a}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct CoeffFile {
    dim: usize,
    #[serde(rename = "L")]
    period: f64,
    #[serde(rename = "K")]
    order: usize,
    a: Nested,
}

impl From<&Coefficients> for CoeffFile {
    fn from(c: &Coefficients) -> Self {
        match c {
            Coefficients::OneD(c) => CoeffFile {
                dim: 1,
                period: c.period,
                order: c.order(),
                a: Nested::One(c.a.clone()),
            },
            Coefficients::TwoD(c) => CoeffFile {
                dim: 2,
                period: c.period,
                order: c.order(),
                a: Nested::Two(c.a.clone()),
            },
        }
    }
}

impl TryFrom<CoeffFile> for Coefficients {
    type Error = Error;

    fn try_from(f: CoeffFile) -> Result<Self> {
        let c = match (f.dim, f.a) {
            (1, Nested::One(a)) => Coefficients::OneD(CoeffSeq1D::new(f.period, a)?),
            (2, Nested::Two(a)) => Coefficients::TwoD(CoeffSeq2D::new(f.period, a)?),
            (d, _) => {
                return Err(Error::InvalidCoefficients(format!(
                    "coefficient array shape does not match dim={d}"
                )))
            }
        };
        let order = match &c {
            Coefficients::OneD(c) => c.order(),
            Coefficients::TwoD(c) => c.order(),
        };
        if order != f.order {
            return Err(Error::InvalidCoefficients(format!(
                "K={} but the coefficient array has order {order}",
                f.order
            )));
        }
        Ok(c)
    }
}

/// On-disk realization: the coefficient file plus `{seed, g}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct RealizationFile {
    #[serde(flatten)]
    coeffs: CoeffFile,
    seed: u64,
    g: Nested,
}

impl From<&Realization> for RealizationFile {
    fn from(r: &Realization) -> Self {
        match r {
            Realization::OneD(r) => RealizationFile {
                coeffs: (&Coefficients::OneD(r.coeffs.clone())).into(),
                seed: r.seed,
                g: Nested::One(r.g.clone()),
            },
            Realization::TwoD(r) => RealizationFile {
                coeffs: (&Coefficients::TwoD(r.coeffs.clone())).into(),
                seed: r.seed,
                g: Nested::Three(
                    r.g.iter()
                        .map(|row| row.iter().map(|w| w.to_vec()).collect())
                        .collect(),
                ),
            },
        }
    }
}

impl TryFrom<RealizationFile> for Realization {
    type Error = Error;

    fn try_from(f: RealizationFile) -> Result<Self> {
        let coeffs = Coefficients::try_from(f.coeffs)?;
        match (coeffs, f.g) {
            (Coefficients::OneD(c), Nested::One(g)) => {
                Ok(Realization::OneD(Realization1D::from_parts(c, g, f.seed)?))
            }
            (Coefficients::TwoD(c), Nested::Three(g)) => {
                let mut rows = Vec::with_capacity(g.len());
                for row in g {
                    let mut out = Vec::with_capacity(row.len());
                    for w in row {
                        let w: [f64; 4] = w.try_into().map_err(|_| {
                            Error::InvalidArgument("each g[k][l] must have 4 entries".into())
                        })?;
                        out.push(w);
                    }
                    rows.push(out);
                }
                Ok(Realization::TwoD(Realization2D::from_parts(
                    c, rows, f.seed,
                )?))
            }
            _ => Err(Error::InvalidArgument(
                "g array shape does not match dim".into(),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_moment_1d(a: &[f64], l: u32) -> f64 {
        let mut s = 0.0;
        for k in 0..a.len() {
            let mut p = 1.0;
            for _ in 0..2 * l {
                p *= k as f64;
            }
            s += p * a[k] * a[k];
        }
        s
    }

    #[test]
    fn trig_coeffs_shapes() {
        let c = CoeffSeq1D::trig(3).unwrap();
        assert_eq!(c.coeffs(), &[0.0, 1.0, 1.0, 1.0]);
        assert_eq!(c.period(), TAU);
        let c2 = CoeffSeq2D::trig(2).unwrap();
        assert_eq!(
            c2.coeffs(),
            &[
                vec![0.0, 0.0, 0.0],
                vec![0.0, 1.0, 1.0],
                vec![0.0, 1.0, 1.0]
            ]
        );
        assert!(trig_coeffs(1, 1).is_err());
        assert!(trig_coeffs(2, 1).is_err());
        assert!(trig_coeffs(3, 4).is_err());
    }

    #[test]
    fn rejects_single_nonzero() {
        assert!(CoeffSeq1D::new(1.0, vec![0.0, 1.0]).is_err());
        assert!(CoeffSeq1D::new(-1.0, vec![1.0, 1.0]).is_err());
        // a single frequency pair is degenerate in 2D
        assert!(CoeffSeq2D::new(1.0, vec![vec![0.0, 0.0], vec![0.0, 1.0]]).is_err());
        // k1 = l1 = 1 with (0, 2): k differ, l differ, 2 != 4
        let a = vec![vec![0.0, 0.0, 1.0], vec![0.0, 1.0, 0.0], vec![0.0; 3]];
        assert!(CoeffSeq2D::new(1.0, a).is_ok());
        // (1,2) and (2,1): equal radii
        let a = vec![vec![0.0; 3], vec![0.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]];
        assert!(CoeffSeq2D::new(1.0, a).is_err());
    }

    #[test]
    fn moments_trig_1d() {
        let m = CoeffSeq1D::trig(3).unwrap().moments();
        assert_eq!(m.a, [3.0, 14.0, 98.0, 794.0]);
        for n in 2..20 {
            assert_eq!(CoeffSeq1D::trig(n).unwrap().moments().get(0), n as f64);
        }
    }

    #[test]
    fn moments_trig_2d() {
        let m = CoeffSeq2D::trig(3).unwrap().moments();
        assert_eq!(m.get(0, 0), 9.0);
        assert_eq!(m.get(1, 0), 42.0);
        assert_eq!(m.get(0, 1), 42.0);
        assert_eq!(m.get(1, 1), 196.0);
        assert_eq!(m.get(2, 0), 294.0);
        assert_eq!(m.get(0, 2), 294.0);
    }

    #[test]
    fn moments_match_brute_force() {
        let a = vec![0.3, -1.2, 0.0, 2.5, 0.7, -0.01];
        let c = CoeffSeq1D::new(3.0, a.clone()).unwrap();
        let m = c.moments();
        for l in 0..4 {
            let b = brute_moment_1d(&a, l as u32);
            assert!((m.get(l) - b).abs() <= 1e-12 * b.abs());
        }
    }

    #[test]
    fn single_cosine_realization() {
        let c = CoeffSeq1D::new(1.0, vec![0.0, 1.0, 1.0]).unwrap();
        let mut g = vec![0.0; 5];
        g[2] = 1.0;
        let r = Realization1D::from_parts(c.clone(), g, 0).unwrap();
        assert!((r.evaluate(0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((r.evaluate(0.5).unwrap() + 1.0).abs() < 1e-15);
        let zero = Realization1D::from_parts(c, vec![0.0; 5], 0).unwrap();
        for x in [0.0, 0.1, 0.77, 1.0] {
            assert_eq!(zero.evaluate(x).unwrap(), 0.0);
        }
    }

    #[test]
    fn evaluate_rejects_outside() {
        let r = CoeffSeq1D::trig(3).unwrap().draw(1);
        assert!(r.evaluate(-1e-9).is_err());
        assert!(r.evaluate(TAU + 1e-9).is_err());
        let r2 = CoeffSeq2D::trig(2).unwrap().draw(1);
        assert!(r2.evaluate([0.5, 7.0]).is_err());
    }

    #[test]
    fn periodicity() {
        for seed in 0..20 {
            let r = CoeffSeq1D::trig(7).unwrap().draw(seed);
            let (a, b) = (r.evaluate(0.0).unwrap(), r.evaluate(r.period()).unwrap());
            assert!((a - b).abs() <= 1e-12 * r.amplitude_bound());
        }
    }

    #[test]
    fn draw_is_deterministic() {
        let c = CoeffSeq1D::trig(5).unwrap();
        assert_eq!(c.draw(99).weights(), c.draw(99).weights());
        assert_ne!(c.draw(99).weights(), c.draw(100).weights());
        let c2 = CoeffSeq2D::trig(3).unwrap();
        assert_eq!(c2.draw(5), c2.draw(5));
    }

    #[test]
    fn covariance_basics() {
        let c = CoeffSeq1D::trig(3).unwrap();
        assert_eq!(c.covariance(0.0), 3.0);
        for d in [0.1, 0.37, 2.0] {
            assert_eq!(c.covariance(d), c.covariance(-d));
        }
        let c2 = CoeffSeq2D::trig(3).unwrap();
        assert_eq!(c2.covariance([0.0, 0.0]), 9.0);
        assert_eq!(c2.covariance([0.2, -0.3]), c2.covariance([-0.2, 0.3]));
    }

    #[test]
    fn covariance_taylor_remainder_is_sixth_order() {
        // r(d) - (A0 - A1 d^2/2 + A2 d^4/24) ~ -A3 d^6 / 720 for L = 2 pi
        let c = CoeffSeq1D::trig(3).unwrap();
        let m = c.moments();
        let rem = |d: f64| {
            c.covariance(d) - (m.get(0) - m.get(1) * d * d / 2.0 + m.get(2) * d.powi(4) / 24.0)
        };
        let (d1, d2) = (1e-2, 1e-3);
        let r1 = rem(d1) / d1.powi(6);
        let expected = -m.get(3) / 720.0;
        assert!(
            (r1 - expected).abs() < 0.01 * expected.abs(),
            "{r1} vs {expected}"
        );
        // at 1e-3 the remainder is ~1e-18, below rounding of r itself
        assert!(rem(d2).abs() < 1e-13);
    }

    #[test]
    fn sample_uniform_matches_evaluate() {
        let r = CoeffSeq1D::new(2.5, vec![0.5, 1.0, -0.3, 0.8])
            .unwrap()
            .draw(3);
        let v = r.sample_uniform(40);
        for (j, vj) in v.iter().enumerate() {
            let x = j as f64 * 2.5 / 40.0;
            assert!((vj - r.evaluate(x).unwrap()).abs() < 1e-12);
        }
        assert_eq!(v[0], v[40]);
        let r2 = CoeffSeq2D::trig(3).unwrap().draw(8);
        let n = 12;
        let v2 = r2.sample_uniform(n);
        for j in 0..=n {
            for i in 0..=n {
                let x = [i as f64 * TAU / n as f64, j as f64 * TAU / n as f64];
                assert!((v2[j * (n + 1) + i] - r2.evaluate(x).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn symmetry_operations() {
        let r = CoeffSeq2D::trig(3).unwrap().draw(4);
        let l = r.period();
        let x = [0.7, 2.1];
        let v = r.value(x);
        assert!((r.reflect_x1().value([l - x[0], x[1]]) - v).abs() < 1e-12);
        assert!((r.transpose().value([x[1], x[0]]) - v).abs() < 1e-12);
        assert!((r.negated().value(x) + v).abs() < 1e-12);
        let r1 = CoeffSeq1D::trig(4).unwrap().draw(4);
        assert!((r1.reflected().value(l - 1.3) - r1.value(1.3)).abs() < 1e-12);
    }

    #[test]
    fn slope_bound_dominates_finite_differences() {
        let r = CoeffSeq2D::trig(3).unwrap().draw(11);
        let g = r.slope_bounds();
        let h = 1e-4;
        for i in 0..50 {
            let x = [0.1 * i as f64, 0.05 * i as f64];
            let dx = (r.value([x[0] + h, x[1]]) - r.value(x)) / h;
            let dy = (r.value([x[0], x[1] + h]) - r.value(x)) / h;
            assert!(dx.abs() <= g[0] && dy.abs() <= g[1]);
        }
    }

    #[test]
    fn json_round_trip() {
        let c = trig_coeffs(2, 3).unwrap();
        assert_eq!(Coefficients::from_json(&c.to_json()).unwrap(), c);
        let r = c.draw(17);
        assert_eq!(Realization::from_json(&r.to_json()).unwrap(), r);
        let r1 = trig_coeffs(1, 4).unwrap().draw(2);
        assert_eq!(Realization::from_json(&r1.to_json()).unwrap(), r1);
    }

    #[test]
    fn coefficient_file_k_mismatch() {
        let text = r#"{"dim":1,"L":1.0,"K":5,"a":[0,1,1]}"#;
        assert!(Coefficients::from_json(text).is_err());
        let ok = r#"{"dim":1,"L":1.0,"K":2,"a":[0,1,1]}"#;
        assert!(Coefficients::from_json(ok).is_ok());
    }
}
