//! Dyadic search for forbidden sign patterns.
//!
//! All sample points of a grid cell at depth `D` lie on a lattice of spacing
//! `delta / 2^(D+1)`, including the half-side shifts used by the interior
//! criterion. The search walks the dyadic tree depth first. A subtree is
//! skipped when a second-order Taylor bound around its centre proves the
//! field has no zero on the region the subtree samples: every stencil there
//! then has a single sign, matches no pattern (all patterns mix signs) and
//! carries no zero flag. Skipped stencils still count as checked.

use std::collections::BTreeSet;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::patterns::{Lib, PatternId, PatternLibrary, PatternSet};
use crate::cubical::Sign;
use crate::error::{Error, Result};
use crate::random_fields::{Realization1D, Realization2D, TrigTable};

pub const DEFAULT_DEPTH: usize = 6;

/// Relative rounding slack accepted when checking that a region lies in the
/// domain (grid endpoints like `M * (L / M)` can overshoot `L` by an ulp).
const DOMAIN_SLACK: f64 = 1e-12;

// relative slack on the Taylor bound and absolute evaluation error per unit
// of amplitude
const BOUND_SLACK: f64 = 1e-9;
const EVAL_EPS: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Certified,
    NotCertified,
    Degenerate,
}

/// Half-side shift of an interior subsquare.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Shift {
    None,
    Left,
    Right,
    Down,
    Up,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Violation {
    /// Grid cell: `k` in 1D, `k2 * M + k1` in 2D.
    pub square: usize,
    pub level: usize,
    pub pattern: PatternId,
    pub shift: Shift,
    /// Lower-left lattice coordinates of the offending subsquare.
    pub position: [i64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationOutcome {
    pub status: Status,
    pub max_depth_checked: usize,
    pub violations: Vec<Violation>,
    /// Distinct sample points with `|u| <= zero_tol`.
    pub zero_flag_count: usize,
    /// Stencils covered, including those in skipped subtrees.
    pub stencils_checked: u64,
    pub boundary_squares: usize,
    pub interior_squares: usize,
}

impl ValidationOutcome {
    pub fn is_certified(&self) -> bool {
        self.status == Status::Certified
    }

    /// Violations are listed with pattern ids like `"B:7"` and lattice
    /// positions in units of `side / 2^(D+1)`.
    pub fn to_json(&self) -> serde_json::Value {
        let violations: Vec<serde_json::Value> = self
            .violations
            .iter()
            .map(|v| {
                serde_json::json!({
                    "square": v.square,
                    "level": v.level,
                    "pattern": v.pattern.to_string(),
                    "shift": format!("{:?}", v.shift),
                    "position": v.position,
                })
            })
            .collect();
        serde_json::json!({
            "status": self.status,
            "max_depth_checked": self.max_depth_checked,
            "zero_flag_count": self.zero_flag_count,
            "stencils_checked": self.stencils_checked,
            "boundary_squares": self.boundary_squares,
            "interior_squares": self.interior_squares,
            "violations": violations,
        })
    }
}

#[derive(Default)]
struct Acc {
    violations: Vec<Violation>,
    zeros: BTreeSet<(i64, i64)>,
    stencils: u64,
    boundary: usize,
    interior: usize,
}

impl Acc {
    fn finish(mut self, depth: usize) -> ValidationOutcome {
        self.violations.sort();
        let status = if !self.zeros.is_empty() {
            Status::Degenerate
        } else if !self.violations.is_empty() {
            Status::NotCertified
        } else {
            Status::Certified
        };
        ValidationOutcome {
            status,
            max_depth_checked: depth,
            violations: self.violations,
            zero_flag_count: self.zeros.len(),
            stencils_checked: self.stencils,
            boundary_squares: self.boundary,
            interior_squares: self.interior,
        }
    }
}

/// Trigonometric values on an integer lattice, either exactly periodic
/// (grid validation) or affine in physical coordinates (single cells).
enum Angles {
    Table(TrigTable),
    Affine { origin: [f64; 2], w: f64, h: f64 },
}

impl Angles {
    #[inline]
    fn cs(&self, axis: usize, k: usize, i: i64) -> (f64, f64) {
        match self {
            Angles::Table(t) => t.cs(k, i),
            Angles::Affine { origin, w, h } => {
                let (s, c) = (w * k as f64 * (origin[axis] + i as f64 * h)).sin_cos();
                (c, s)
            }
        }
    }
}

/// Scale-dependent constants of a probe.
struct Scale {
    /// Angular frequency per lattice unit for frequency 1.
    omega: f64,
    /// Half the second-derivative bound along lattice directions.
    half_hess: f64,
    eps: f64,
}

struct Probe1 {
    terms: Vec<(usize, f64, f64)>,
    angles: Angles,
    scale: Scale,
}

impl Probe1 {
    fn new(r: &Realization1D, angles: Angles, omega: f64) -> Self {
        let terms = r.terms();
        let hess: f64 = terms
            .iter()
            .map(|&(k, c, s)| (c.abs() + s.abs()) * (omega * k as f64).powi(2))
            .sum();
        let scale = Scale {
            omega,
            half_hess: 0.5 * hess,
            eps: EVAL_EPS * r.amplitude_bound(),
        };
        Self {
            terms,
            angles,
            scale,
        }
    }

    fn value(&self, i: i64) -> f64 {
        self.terms
            .iter()
            .map(|&(k, c, s)| {
                let (ck, sk) = self.angles.cs(0, k, i);
                c * ck + s * sk
            })
            .sum()
    }

    fn jet(&self, i: i64) -> (f64, f64) {
        let (mut u, mut du) = (0.0, 0.0);
        for &(k, c, s) in &self.terms {
            let (ck, sk) = self.angles.cs(0, k, i);
            u += c * ck + s * sk;
            du += self.scale.omega * k as f64 * (s * ck - c * sk);
        }
        (u, du)
    }
}

struct Probe2 {
    terms: Vec<(usize, usize, [f64; 4])>,
    angles: Angles,
    scale: Scale,
}

impl Probe2 {
    fn new(r: &Realization2D, angles: Angles, omega: f64) -> Self {
        let terms = r.terms().to_vec();
        let hess: f64 = terms
            .iter()
            .map(|&(k, l, c)| {
                let s: f64 = c.iter().map(|v| v.abs()).sum();
                s * (omega * (k + l) as f64).powi(2)
            })
            .sum();
        let scale = Scale {
            omega,
            half_hess: 0.5 * hess,
            eps: EVAL_EPS * r.amplitude_bound(),
        };
        Self {
            terms,
            angles,
            scale,
        }
    }

    fn value(&self, i: i64, j: i64) -> f64 {
        self.terms
            .iter()
            .map(|&(k, l, c)| {
                let (cx, sx) = self.angles.cs(0, k, i);
                let (cy, sy) = self.angles.cs(1, l, j);
                c[0] * cx * cy + c[1] * cx * sy + c[2] * sx * cy + c[3] * sx * sy
            })
            .sum()
    }

    fn jet(&self, i: i64, j: i64) -> [f64; 3] {
        let mut out = [0.0; 3];
        let w = self.scale.omega;
        for &(k, l, c) in &self.terms {
            let (cx, sx) = self.angles.cs(0, k, i);
            let (cy, sy) = self.angles.cs(1, l, j);
            out[0] += c[0] * cx * cy + c[1] * cx * sy + c[2] * sx * cy + c[3] * sx * sy;
            out[1] +=
                w * k as f64 * (-c[0] * sx * cy - c[1] * sx * sy + c[2] * cx * cy + c[3] * cx * sy);
            out[2] +=
                w * l as f64 * (-c[0] * cx * sy + c[1] * cx * cy - c[2] * sx * sy + c[3] * sx * cy);
        }
        out
    }
}

/// Nodes in a full subtree rooted at `level`.
fn subtree_nodes(level: usize, depth: usize) -> u64 {
    ((1u64 << (2 * (depth - level + 1))) - 1) / 3
}

/// Configured validation run.
#[derive(Debug, Clone, Copy)]
pub struct Validator<'a> {
    pub patterns: &'a PatternSet,
    pub depth: usize,
    pub zero_tol: f64,
    /// Stop at the first violation instead of listing all of them.
    pub first_violation_only: bool,
}

impl Default for Validator<'static> {
    fn default() -> Self {
        Self::new(DEFAULT_DEPTH)
    }
}

impl Validator<'static> {
    pub fn new(depth: usize) -> Self {
        Self {
            patterns: PatternSet::builtin(),
            depth,
            zero_tol: 0.0,
            first_violation_only: false,
        }
    }
}

impl<'a> Validator<'a> {
    pub fn with_patterns<'b>(self, patterns: &'b PatternSet) -> Validator<'b> {
        Validator {
            patterns,
            depth: self.depth,
            zero_tol: self.zero_tol,
            first_violation_only: self.first_violation_only,
        }
    }

    pub fn with_zero_tol(mut self, zero_tol: f64) -> Self {
        self.zero_tol = zero_tol;
        self
    }

    pub fn first_violation_only(mut self, yes: bool) -> Self {
        self.first_violation_only = yes;
        self
    }

    fn lattice_steps(&self) -> Result<i64> {
        if self.depth > 40 {
            return Err(Error::InvalidArgument(format!(
                "depth {} is too large",
                self.depth
            )));
        }
        Ok(1i64 << (self.depth + 1))
    }

    fn stop(&self, acc: &Acc) -> bool {
        self.first_violation_only && !acc.violations.is_empty()
    }

    /// Dyadic admissibility of `[alpha, beta]`.
    pub fn interval(&self, r: &Realization1D, alpha: f64, beta: f64) -> Result<ValidationOutcome> {
        let l = r.period();
        let slack = DOMAIN_SLACK * l;
        if !(-slack <= alpha && alpha < beta && beta <= l + slack) {
            return Err(Error::InvalidArgument(format!(
                "interval [{alpha}, {beta}] must be a nonempty subset of [0, {l}]"
            )));
        }
        let steps = self.lattice_steps()?;
        let h = (beta - alpha) / steps as f64;
        let w = TAU / l;
        let probe = Probe1::new(
            r,
            Angles::Affine {
                origin: [alpha, 0.0],
                w,
                h,
            },
            w * h,
        );
        let mut acc = Acc::default();
        self.visit1(&probe, &mut acc, 0, 0, 0, steps);
        Ok(acc.finish(self.depth))
    }

    pub fn validate_1d(&self, r: &Realization1D, m: usize) -> Result<ValidationOutcome> {
        if m < 1 {
            return Err(Error::InvalidArgument("M must be >= 1".into()));
        }
        let steps = self.lattice_steps()?;
        let n = m as i64 * steps;
        let probe = Probe1::new(r, Angles::Table(TrigTable::new(n as usize)), TAU / n as f64);
        let mut acc = Acc::default();
        for k in 0..m {
            if self.stop(&acc) {
                break;
            }
            self.visit1(&probe, &mut acc, k, k as i64 * steps, 0, steps);
        }
        Ok(acc.finish(self.depth))
    }

    fn visit1(&self, p: &Probe1, acc: &mut Acc, square: usize, o: i64, level: usize, side: i64) {
        let half = side / 2;
        let (u, du) = p.jet(o + half);
        let r = half as f64;
        let bound = du.abs() * r + p.scale.half_hess * r * r;
        if u.abs() > bound * (1.0 + BOUND_SLACK) + self.zero_tol + p.scale.eps {
            acc.stencils += subtree_nodes(level, self.depth);
            return;
        }
        acc.stencils += 1;
        let v = [p.value(o), u, p.value(o + side)];
        let mut degenerate = false;
        for (t, x) in v.iter().enumerate() {
            if x.abs() <= self.zero_tol {
                acc.zeros.insert((o + t as i64 * half, 0));
                degenerate = true;
            }
        }
        if !degenerate && super::double_crossover(v[0], v[1], v[2]) {
            let num = if v[1] < 0.0 { 1 } else { 2 };
            acc.violations.push(Violation {
                square,
                level,
                pattern: PatternId {
                    lib: Lib::Crossover,
                    num,
                },
                shift: Shift::None,
                position: [o, 0],
            });
        }
        if level < self.depth && !self.stop(acc) {
            self.visit1(p, acc, square, o, level + 1, half);
            if !self.stop(acc) {
                self.visit1(p, acc, square, o + half, level + 1, half);
            }
        }
    }

    fn square_probe(
        &self,
        r: &Realization2D,
        corner: [f64; 2],
        side: f64,
    ) -> Result<(Probe2, i64)> {
        let steps = self.lattice_steps()?;
        let h = side / steps as f64;
        let w = TAU / r.period();
        Ok((
            Probe2::new(
                r,
                Angles::Affine {
                    origin: corner,
                    w,
                    h,
                },
                w * h,
            ),
            steps,
        ))
    }

    fn check_square(r: &Realization2D, corner: [f64; 2], side: f64, margin: f64) -> Result<()> {
        let l = r.period();
        let slack = DOMAIN_SLACK * l;
        let ok = side > 0.0
            && corner
                .iter()
                .all(|c| *c - margin >= -slack && *c + side + margin <= l + slack);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "square at {corner:?} with side {side} (margin {margin}) is not inside [0, {l}]^2"
            )))
        }
    }

    /// B-admissibility of one square to the configured depth.
    pub fn b_square(
        &self,
        r: &Realization2D,
        corner: [f64; 2],
        side: f64,
    ) -> Result<ValidationOutcome> {
        Self::check_square(r, corner, side, 0.0)?;
        let (probe, steps) = self.square_probe(r, corner, side)?;
        let mut acc = Acc::default();
        self.visit2(
            &probe,
            &mut acc,
            &self.patterns.b,
            false,
            0,
            [0, 0],
            0,
            steps,
        );
        Ok(acc.finish(self.depth))
    }

    /// I-admissibility of one square; its closed `side / 2` neighbourhood
    /// must lie in the domain.
    pub fn i_square(
        &self,
        r: &Realization2D,
        corner: [f64; 2],
        side: f64,
    ) -> Result<ValidationOutcome> {
        Self::check_square(r, corner, side, side / 2.0)?;
        let (probe, steps) = self.square_probe(r, corner, side)?;
        let mut acc = Acc::default();
        self.visit2(
            &probe,
            &mut acc,
            &self.patterns.i,
            true,
            0,
            [0, 0],
            0,
            steps,
        );
        Ok(acc.finish(self.depth))
    }

    pub fn validate_2d(&self, r: &Realization2D, m: usize) -> Result<ValidationOutcome> {
        if m < 3 {
            return Err(Error::InvalidArgument("2D validation needs M >= 3".into()));
        }
        let steps = self.lattice_steps()?;
        let n = m as i64 * steps;
        let probe = Probe2::new(r, Angles::Table(TrigTable::new(n as usize)), TAU / n as f64);
        let mut acc = Acc::default();
        'outer: for k2 in 0..m {
            for k1 in 0..m {
                if self.stop(&acc) {
                    break 'outer;
                }
                let boundary = k1 == 0 || k2 == 0 || k1 == m - 1 || k2 == m - 1;
                let (lib, shifted) = if boundary {
                    acc.boundary += 1;
                    (&self.patterns.b, false)
                } else {
                    acc.interior += 1;
                    (&self.patterns.i, true)
                };
                let origin = [k1 as i64 * steps, k2 as i64 * steps];
                self.visit2(
                    &probe,
                    &mut acc,
                    lib,
                    shifted,
                    k2 * m + k1,
                    origin,
                    0,
                    steps,
                );
            }
        }
        Ok(acc.finish(self.depth))
    }

    #[allow(clippy::too_many_arguments)]
    fn visit2(
        &self,
        p: &Probe2,
        acc: &mut Acc,
        lib: &PatternLibrary,
        shifted: bool,
        square: usize,
        o: [i64; 2],
        level: usize,
        side: i64,
    ) {
        let half = side / 2;
        let [u, ux, uy] = p.jet(o[0] + half, o[1] + half);
        let r = if shifted { side } else { half } as f64;
        let bound = (ux.abs() + uy.abs()) * r + p.scale.half_hess * r * r;
        let per_node = if shifted { 5 } else { 1 };
        if u.abs() > bound * (1.0 + BOUND_SLACK) + self.zero_tol + p.scale.eps {
            acc.stencils += per_node * subtree_nodes(level, self.depth);
            return;
        }
        acc.stencils += per_node;

        // samples at offsets (a - 1) * half, a in 0..5, per axis
        let mut grid = [[Sign::Plus; 5]; 5];
        let range = if shifted { 0..5 } else { 1..4 };
        for b in range.clone() {
            for a in range.clone() {
                if shifted && (a == 0 || a == 4) && (b == 0 || b == 4) {
                    continue;
                }
                let (x, y) = (o[0] + (a as i64 - 1) * half, o[1] + (b as i64 - 1) * half);
                let v = if a == 2 && b == 2 { u } else { p.value(x, y) };
                let s = Sign::classify(v, self.zero_tol);
                if s == Sign::Zero {
                    acc.zeros.insert((x, y));
                }
                grid[b][a] = s;
            }
        }
        let shifts: &[(Shift, usize, usize)] = if shifted {
            &[
                (Shift::None, 1, 1),
                (Shift::Left, 0, 1),
                (Shift::Right, 2, 1),
                (Shift::Down, 1, 0),
                (Shift::Up, 1, 2),
            ]
        } else {
            &[(Shift::None, 1, 1)]
        };
        for &(shift, ax, by) in shifts {
            let mut mask = 0u16;
            let mut degenerate = false;
            for y in 0..3 {
                for x in 0..3 {
                    match grid[by + y][ax + x] {
                        Sign::Plus => mask |= 1 << (3 * y + x),
                        Sign::Minus => {}
                        Sign::Zero => degenerate = true,
                    }
                }
            }
            if degenerate {
                continue;
            }
            for id in lib.matches(mask) {
                let dx = (ax as i64 - 1) * half;
                let dy = (by as i64 - 1) * half;
                acc.violations.push(Violation {
                    square,
                    level,
                    pattern: *id,
                    shift,
                    position: [o[0] + dx, o[1] + dy],
                });
            }
        }
        if level < self.depth {
            for (dx, dy) in [(0, 0), (half, 0), (0, half), (half, half)] {
                if self.stop(acc) {
                    return;
                }
                self.visit2(
                    p,
                    acc,
                    lib,
                    shifted,
                    square,
                    [o[0] + dx, o[1] + dy],
                    level + 1,
                    half,
                );
            }
        }
    }

    fn own_stencil(
        &self,
        r: &Realization2D,
        corner: [f64; 2],
        side: f64,
        lib: &PatternLibrary,
    ) -> bool {
        let mut mask = 0u16;
        for y in 0..3 {
            for x in 0..3 {
                let pt = [
                    corner[0] + x as f64 * side / 2.0,
                    corner[1] + y as f64 * side / 2.0,
                ];
                match Sign::classify(r.value(pt), self.zero_tol) {
                    Sign::Plus => mask |= 1 << (3 * y + x),
                    Sign::Minus => {}
                    Sign::Zero => return false,
                }
            }
        }
        lib.matches(mask).is_empty()
    }
}

/// Depth-`d` dyadic admissibility of an interval (strict signs).
pub fn interval_admissible(
    r: &Realization1D,
    interval: [f64; 2],
    d: usize,
) -> Result<ValidationOutcome> {
    Validator::new(d).interval(r, interval[0], interval[1])
}

pub fn b_admissible(
    r: &Realization2D,
    corner: [f64; 2],
    side: f64,
    d: usize,
) -> Result<ValidationOutcome> {
    Validator::new(d).b_square(r, corner, side)
}

pub fn i_admissible(
    r: &Realization2D,
    corner: [f64; 2],
    side: f64,
    d: usize,
) -> Result<ValidationOutcome> {
    Validator::new(d).i_square(r, corner, side)
}

/// The square's own 3x3 stencil avoids `I4`; a zero-flagged sample counts
/// as a failure.
pub fn i4_admissible(r: &Realization2D, corner: [f64; 2], side: f64) -> bool {
    let v = Validator::new(0);
    v.own_stencil(r, corner, side, &v.patterns.i4)
}

pub fn i5_admissible(r: &Realization2D, corner: [f64; 2], side: f64) -> bool {
    let v = Validator::new(0);
    v.own_stencil(r, corner, side, &v.patterns.i5)
}

pub fn validate_1d(r: &Realization1D, m: usize, d: usize) -> Result<ValidationOutcome> {
    Validator::new(d).validate_1d(r, m)
}

pub fn validate_2d(r: &Realization2D, m: usize, d: usize) -> Result<ValidationOutcome> {
    Validator::new(d).validate_2d(r, m)
}
