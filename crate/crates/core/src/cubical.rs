//! Sign grids on the equidistant `M`-discretization and the cubical sets
//! `Q_M^+`, `Q_M^-` built from them.
//!
//! Grid indices run over `{0..M}^d`. Cell `k` occupies `[k, k+1]^d` in index
//! space, so a grid with `M + 1` samples per axis yields `(M + 1)^d` cells.
//! 2D arrays are stored with the first coordinate fastest:
//! `idx = k2 * (M + 1) + k1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::random_fields::Realization;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
    /// `|u| <= zero_tol`; belongs to both cubical sets.
    Zero,
}

impl Sign {
    pub fn classify(v: f64, zero_tol: f64) -> Sign {
        if v > zero_tol {
            Sign::Plus
        } else if v < -zero_tol {
            Sign::Minus
        } else {
            Sign::Zero
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
            Sign::Zero => Sign::Zero,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
            Sign::Zero => '0',
        }
    }

    pub fn from_char(c: char) -> Option<Sign> {
        match c {
            '+' => Some(Sign::Plus),
            '-' => Some(Sign::Minus),
            '0' => Some(Sign::Zero),
            _ => None,
        }
    }

    /// Compatible with `sigma u >= 0`.
    pub fn admits(self, sigma: Polarity) -> bool {
        match (self, sigma) {
            (Sign::Zero, _) => true,
            (Sign::Plus, Polarity::Plus) | (Sign::Minus, Polarity::Minus) => true,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarity {
    Plus,
    Minus,
}

impl Polarity {
    pub fn sigma(self) -> f64 {
        match self {
            Polarity::Plus => 1.0,
            Polarity::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignGrid {
    dim: usize,
    m: usize,
    signs: Vec<Sign>,
    zero_count: usize,
}

impl SignGrid {
    pub fn from_signs(dim: usize, m: usize, signs: Vec<Sign>) -> Result<Self> {
        check_dim(dim)?;
        if m < 1 {
            return Err(Error::InvalidArgument("M must be >= 1".into()));
        }
        let want = (m + 1).pow(dim as u32);
        if signs.len() != want {
            return Err(Error::InvalidArgument(format!(
                "sign array has {} entries, expected {want}",
                signs.len()
            )));
        }
        let zero_count = signs.iter().filter(|s| **s == Sign::Zero).count();
        Ok(Self {
            dim,
            m,
            signs,
            zero_count,
        })
    }

    pub fn from_values(dim: usize, m: usize, values: &[f64], zero_tol: f64) -> Result<Self> {
        let signs = values
            .iter()
            .map(|v| Sign::classify(*v, zero_tol))
            .collect();
        Self::from_signs(dim, m, signs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Samples per axis, `M + 1`.
    pub fn side(&self) -> usize {
        self.m + 1
    }

    pub fn signs(&self) -> &[Sign] {
        &self.signs
    }

    pub fn zero_count(&self) -> usize {
        self.zero_count
    }

    pub fn get(&self, k: &[usize]) -> Sign {
        match *k {
            [k1] => self.signs[k1],
            [k1, k2] => self.signs[k2 * self.side() + k1],
            _ => panic!("index dimension mismatch"),
        }
    }

    pub fn negated(&self) -> Self {
        Self {
            signs: self.signs.iter().map(|s| s.flip()).collect(),
            ..self.clone()
        }
    }

    /// One string per row (fixed second coordinate); a single row in 1D.
    pub fn rows(&self) -> Vec<String> {
        self.signs
            .chunks(self.side())
            .map(|r| r.iter().map(|s| s.as_char()).collect())
            .collect()
    }

    pub fn to_json(&self) -> String {
        let file = SignGridFile {
            dim: self.dim,
            m: self.m,
            rows: self.rows(),
        };
        serde_json::to_string_pretty(&file).expect("sign grid serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SignGridFile = serde_json::from_str(text)?;
        let mut signs = Vec::new();
        for row in &file.rows {
            for c in row.chars() {
                signs.push(Sign::from_char(c).ok_or_else(|| {
                    Error::InvalidArgument(format!("invalid sign character {c:?}"))
                })?);
            }
        }
        Self::from_signs(file.dim, file.m, signs)
    }
}

#[derive(Serialize, Deserialize)]
struct SignGridFile {
    dim: usize,
    #[serde(rename = "M")]
    m: usize,
    rows: Vec<String>,
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 1 || dim == 2 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "dimension must be 1 or 2, got {dim}"
        )))
    }
}

/// Samples `r` at `x_k = k L / M` and classifies each value against `zero_tol`.
pub fn sign_grid(r: &Realization, m: usize, zero_tol: f64) -> Result<SignGrid> {
    if m < 1 {
        return Err(Error::InvalidArgument("M must be >= 1".into()));
    }
    let values = match r {
        Realization::OneD(r) => r.sample_uniform(m),
        Realization::TwoD(r) => r.sample_uniform(m),
    };
    SignGrid::from_values(r.dim(), m, &values, zero_tol)
}

/// Top-dimensional cells of `Q_M^+` or `Q_M^-` as an occupancy array over
/// `{0..M}^d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CubicalSet {
    dim: usize,
    side: usize,
    cells: Vec<bool>,
}

impl CubicalSet {
    /// Occupancy array with `side` cells per axis.
    pub fn from_cells(dim: usize, side: usize, cells: Vec<bool>) -> Result<Self> {
        check_dim(dim)?;
        if cells.len() != side.pow(dim as u32) {
            return Err(Error::InvalidArgument(
                "cell array does not match side^dim".into(),
            ));
        }
        Ok(Self { dim, side, cells })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Cells per axis (`M + 1` for a cubical approximation).
    pub fn side(&self) -> usize {
        self.side
    }

    pub fn occupancy(&self) -> &[bool] {
        &self.cells
    }

    pub fn contains(&self, k: &[usize]) -> bool {
        match *k {
            [k1] => self.cells[k1],
            [k1, k2] => self.cells[k2 * self.side + k1],
            _ => false,
        }
    }

    pub fn len(&self) -> usize {
        self.cells.iter().filter(|c| **c).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.cells.iter().any(|c| *c)
    }

    /// Cell indices in storage order.
    pub fn cell_indices(&self) -> Vec<Vec<usize>> {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, c)| **c)
            .map(|(i, _)| match self.dim {
                1 => vec![i],
                _ => vec![i % self.side, i / self.side],
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "dim": self.dim, "side": self.side, "cells": self.cell_indices() })
            .to_string()
    }
}

pub fn cubical_approx(grid: &SignGrid, sigma: Polarity) -> CubicalSet {
    CubicalSet {
        dim: grid.dim,
        side: grid.side(),
        cells: grid.signs.iter().map(|s| s.admits(sigma)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random_fields::{CoeffSeq1D, Realization1D};

    fn cos_field(l: f64) -> Realization {
        let c = CoeffSeq1D::new(l, vec![0.0, 1.0, 1.0]).unwrap();
        let g = vec![0.0, 0.0, 1.0, 0.0, 0.0];
        Realization::OneD(Realization1D::from_parts(c, g, 0).unwrap())
    }

    fn signs_of(s: &str) -> Vec<Sign> {
        s.chars().map(|c| Sign::from_char(c).unwrap()).collect()
    }

    #[test]
    fn cosine_signs() {
        let g = sign_grid(&cos_field(1.0), 3, 0.0).unwrap();
        assert_eq!(g.signs(), signs_of("+--+").as_slice());
        let g = sign_grid(&cos_field(1.0), 4, 1e-12).unwrap();
        assert_eq!(g.signs(), signs_of("+0-0+").as_slice());
        assert_eq!(g.zero_count(), 2);
    }

    #[test]
    fn approx_1d_by_hand() {
        let g = SignGrid::from_signs(1, 3, signs_of("+--+")).unwrap();
        let p = cubical_approx(&g, Polarity::Plus);
        let m = cubical_approx(&g, Polarity::Minus);
        assert_eq!(p.cell_indices(), vec![vec![0], vec![3]]);
        assert_eq!(m.cell_indices(), vec![vec![1], vec![2]]);
    }

    #[test]
    fn all_plus_and_zero_cells() {
        let g = SignGrid::from_signs(2, 2, vec![Sign::Plus; 9]).unwrap();
        assert_eq!(cubical_approx(&g, Polarity::Plus).len(), 9);
        assert!(cubical_approx(&g, Polarity::Minus).is_empty());
        let mut s = vec![Sign::Plus; 9];
        s[4] = Sign::Zero;
        let g = SignGrid::from_signs(2, 2, s).unwrap();
        assert!(cubical_approx(&g, Polarity::Plus).contains(&[1, 1]));
        assert!(cubical_approx(&g, Polarity::Minus).contains(&[1, 1]));
    }

    #[test]
    fn negation_swaps_sets() {
        let g = SignGrid::from_signs(1, 4, signs_of("+-0-+")).unwrap();
        assert_eq!(
            cubical_approx(&g.negated(), Polarity::Plus),
            cubical_approx(&g, Polarity::Minus)
        );
    }

    #[test]
    fn sign_grid_json_round_trip() {
        let g = SignGrid::from_signs(2, 2, signs_of("+-0-++--+")).unwrap();
        assert_eq!(g.rows(), vec!["+-0", "-++", "--+"]);
        assert_eq!(SignGrid::from_json(&g.to_json()).unwrap(), g);
    }

    #[test]
    fn refinement_preserves_samples() {
        let c = crate::random_fields::trig_coeffs(2, 3).unwrap();
        for seed in 0..5 {
            let r = c.draw(seed);
            let a = sign_grid(&r, 7, 0.0).unwrap();
            let b = sign_grid(&r, 14, 0.0).unwrap();
            if a.zero_count() + b.zero_count() > 0 {
                continue;
            }
            for k2 in 0..=7 {
                for k1 in 0..=7 {
                    assert_eq!(a.get(&[k1, k2]), b.get(&[2 * k1, 2 * k2]));
                }
            }
        }
    }
}
