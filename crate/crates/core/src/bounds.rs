//! Closed-form probability lower bounds for correct homology and the
//! trigonometric-polynomial scaling laws.
//!
//! All bounds are leading order: the `O(1/M^3)` remainders are dropped and
//! every [`BoundResult`] says so.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::random_fields::{SpectralMoments1D, SpectralMoments2D};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub bound: f64,
    pub m: usize,
    pub constants: Vec<(String, f64)>,
    /// The `O(1/M^3)` remainder is omitted.
    pub leading_only: bool,
}

impl BoundResult {
    fn new(bound: f64, m: usize, constants: Vec<(&str, f64)>, leading_only: bool) -> Self {
        Self {
            bound,
            m,
            constants: constants
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            leading_only,
        }
    }

    /// A nonpositive lower bound says nothing.
    pub fn vacuous(&self) -> bool {
        self.bound <= 0.0
    }

    pub fn constant(&self, name: &str) -> Option<f64> {
        self.constants
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| *v)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let constants: serde_json::Map<String, serde_json::Value> = self
            .constants
            .iter()
            .map(|(k, v)| (k.clone(), (*v).into()))
            .collect();
        serde_json::json!({
            "bound": self.bound,
            "M": self.m,
            "constants": constants,
            "vacuous": self.vacuous(),
            "leading_only": self.leading_only,
        })
    }
}

/// `(A0 A2 - A1^2) / (A0^{3/2} A1^{1/2})`.
pub fn moment_ratio_1d(m: &SpectralMoments1D) -> Result<f64> {
    let (a0, a1) = (m.get(0), m.get(1));
    let gap = m.gap();
    if !(a0 > 0.0 && a1 > 0.0 && gap > 0.0) {
        return Err(Error::Moments(format!(
            "need A0 > 0, A1 > 0 and A0 A2 - A1^2 > 0 (A0={a0}, A1={a1}, gap={gap})"
        )));
    }
    Ok(gap / (a0.powf(1.5) * a1.sqrt()))
}

/// `(A20 + A11 + A02)^2 / (A00 A01 A10 A11)^{1/2}`.
pub fn moment_ratio_2d(m: &SpectralMoments2D) -> Result<f64> {
    let den = [m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1)];
    if den.iter().any(|v| *v <= 0.0) {
        return Err(Error::Moments(format!(
            "A00, A01, A10, A11 must be positive, got {den:?}"
        )));
    }
    let num = m.get(2, 0) + m.get(1, 1) + m.get(0, 2);
    Ok(num * num / den.iter().product::<f64>().sqrt())
}

/// Coefficient of `delta^3` in the double-crossover probability of a
/// periodic 1D series.
pub fn c0_periodic(m: &SpectralMoments1D, l: f64) -> Result<f64> {
    Ok(PI * PI / (16.0 * l.powi(3)) * moment_ratio_1d(m)?)
}

/// `1 - 8 C0 (b - a)^3 / (3 M^2)`.
pub fn bound_1d_generic(c0: f64, length: f64, m: usize) -> BoundResult {
    let bound = 1.0 - 8.0 * c0 * length.powi(3) / (3.0 * (m * m) as f64);
    BoundResult::new(bound, m, vec![("C0", c0)], false)
}

/// `1 - (pi^2 / 6 M^2) (A0 A2 - A1^2) / (A0^{3/2} A1^{1/2})`.
pub fn bound_1d_periodic(m: &SpectralMoments1D, mm: usize) -> Result<BoundResult> {
    let ratio = moment_ratio_1d(m)?;
    let bound = 1.0 - PI * PI / (6.0 * (mm * mm) as f64) * ratio;
    Ok(BoundResult::new(bound, mm, vec![("ratio", ratio)], true))
}

pub fn c1_c2_periodic(m: &SpectralMoments2D, l: f64) -> Result<(f64, f64)> {
    let x = moment_ratio_2d(m)?;
    let c1 = 41.0 * PI * PI / (12.0 * l.powi(3)) * x;
    let c2 = 115.0 * PI * PI / (24.0 * l.powi(4)) * x;
    Ok((c1, c2))
}

/// `1 - (24 C1 L^3 + 20 C2 L^4) / (3 M^2)` on a square domain of side `L`.
pub fn bound_2d_generic(c1: f64, c2: f64, l: f64, m: usize) -> BoundResult {
    let bound = 1.0 - (24.0 * c1 * l.powi(3) + 20.0 * c2 * l.powi(4)) / (3.0 * (m * m) as f64);
    BoundResult::new(bound, m, vec![("C1", c1), ("C2", c2)], false)
}

/// `1 - (1067 pi^2 / 18 M^2) X`.
pub fn bound_2d_periodic(m: &SpectralMoments2D, mm: usize) -> Result<BoundResult> {
    let x = moment_ratio_2d(m)?;
    let bound = 1.0 - 1067.0 * PI * PI / (18.0 * (mm * mm) as f64) * x;
    Ok(BoundResult::new(bound, mm, vec![("ratio", x)], true))
}

/// Torus variant: the boundary term disappears and only interior cells count.
pub fn bound_2d_torus(c2: f64, l: f64, m: usize) -> BoundResult {
    let bound = 1.0 - 4.0 * c2 * l.powi(4) / (m * m) as f64;
    BoundResult::new(bound, m, vec![("C2", c2)], false)
}

/// Moment ratio of the random trigonometric polynomial of degree `n`.
pub fn closed_form_scaling(dim: usize, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("N must be >= 2, got {n}")));
    }
    let n = n as f64;
    match dim {
        1 => Ok(6f64.sqrt() / 180.0
            * (n - 1.0)
            * (8.0 * n + 11.0)
            * ((n + 1.0) * (2.0 * n + 1.0)).sqrt()),
        2 => Ok((46.0 * n * n + 51.0 * n - 7.0).powi(2) / 900.0),
        _ => Err(Error::InvalidArgument(format!(
            "dimension must be 1 or 2, got {dim}"
        ))),
    }
}

/// Least `M >= 1` with `bound_fn(M) >= target`, for a bound nondecreasing in
/// `M` that tends to 1.
pub fn min_m(bound_fn: impl Fn(usize) -> f64, target: f64) -> Result<usize> {
    if !(target < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "target must be < 1, got {target}"
        )));
    }
    let mut hi = 1usize;
    while bound_fn(hi) < target {
        if hi > 1 << 40 {
            return Err(Error::InvalidArgument(
                "bound does not reach the target".into(),
            ));
        }
        hi *= 2;
    }
    let mut lo = hi / 2;
    if lo == 0 || bound_fn(lo) >= target {
        return Ok(hi.min(if lo == 0 { 1 } else { lo }));
    }
    // bound(lo) < target <= bound(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if bound_fn(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
