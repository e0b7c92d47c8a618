//! Betti numbers of cubical sets and a fine-grid reference for the homology
//! of the true nodal domains.
//!
//! Homology is taken with field coefficients. Planar cubical sets are
//! torsion-free with `beta_2 = 0`, so `beta_0` (connected components of the
//! vertex-edge graph) and the Euler characteristic determine everything:
//! `beta_1 = beta_0 - (V - E + F)`.

use serde::{Deserialize, Serialize};

use crate::cubical::{cubical_approx, sign_grid, CubicalSet, Polarity};
use crate::error::{Error, Result};
use crate::random_fields::Realization;

/// Face closure of a cubical set, stored as occupancy arrays.
///
/// With `n` cells per axis: vertices are indexed over `{0..n}^d`; in 2D,
/// horizontal edge `(i, j)` joins vertices `(i, j)` and `(i+1, j)`, vertical
/// edge `(i, j)` joins `(i, j)` and `(i, j+1)`.
#[derive(Debug, Clone)]
pub struct CubicalComplex {
    dim: usize,
    side: usize,
    vertices: Vec<bool>,
    h_edges: Vec<bool>,
    v_edges: Vec<bool>,
    faces: Vec<bool>,
}

impl CubicalComplex {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_vertices(&self) -> usize {
        count(&self.vertices)
    }

    pub fn num_edges(&self) -> usize {
        count(&self.h_edges) + count(&self.v_edges)
    }

    /// Top cells in 2D; zero in 1D (edges are the top cells there).
    pub fn num_faces(&self) -> usize {
        count(&self.faces)
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices() as i64 - self.num_edges() as i64 + self.num_faces() as i64
    }

    pub fn vertices(&self) -> Vec<Vec<usize>> {
        let w = self.side + 1;
        indices(&self.vertices, w, self.dim)
    }
}

fn count(v: &[bool]) -> usize {
    v.iter().filter(|b| **b).count()
}

fn indices(v: &[bool], w: usize, dim: usize) -> Vec<Vec<usize>> {
    v.iter()
        .enumerate()
        .filter(|(_, b)| **b)
        .map(|(i, _)| {
            if dim == 1 {
                vec![i]
            } else {
                vec![i % w, i / w]
            }
        })
        .collect()
}

pub fn close_faces(cs: &CubicalSet) -> CubicalComplex {
    let n = cs.side();
    let cells = cs.occupancy();
    if cs.dim() == 1 {
        let mut vertices = vec![false; n + 1];
        for (k, _) in cells.iter().enumerate().filter(|(_, c)| **c) {
            vertices[k] = true;
            vertices[k + 1] = true;
        }
        return CubicalComplex {
            dim: 1,
            side: n,
            vertices,
            h_edges: cells.to_vec(),
            v_edges: Vec::new(),
            faces: Vec::new(),
        };
    }
    let w = n + 1;
    let mut vertices = vec![false; w * w];
    let mut h_edges = vec![false; n * w];
    let mut v_edges = vec![false; w * n];
    for j in 0..n {
        for i in 0..n {
            if !cells[j * n + i] {
                continue;
            }
            for (di, dj) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                vertices[(j + dj) * w + i + di] = true;
            }
            // h_edges indexed j * n + i over j in 0..=n; v_edges j * w + i over j in 0..n
            h_edges[j * n + i] = true;
            h_edges[(j + 1) * n + i] = true;
            v_edges[j * w + i] = true;
            v_edges[j * w + i + 1] = true;
        }
    }
    CubicalComplex {
        dim: 2,
        side: n,
        vertices,
        h_edges,
        v_edges,
        faces: cells.to_vec(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct BettiVector {
    pub b0: usize,
    pub b1: usize,
}

impl BettiVector {
    pub fn new(b0: usize, b1: usize) -> Self {
        Self { b0, b1 }
    }
}

/// Betti vectors of `N^+` and `N^-` (or their approximations).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct BettiPair {
    pub plus: BettiVector,
    pub minus: BettiVector,
}

impl BettiPair {
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "plus": [self.plus.b0, self.plus.b1],
            "minus": [self.minus.b0, self.minus.b1],
        })
        .to_string()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct F {
            plus: [usize; 2],
            minus: [usize; 2],
        }
        let f: F = serde_json::from_str(text)?;
        Ok(Self {
            plus: BettiVector::new(f.plus[0], f.plus[1]),
            minus: BettiVector::new(f.minus[0], f.minus[1]),
        })
    }
}

struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = p;
            x = p;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb) as usize] = ra.min(rb);
        }
    }
}

pub fn betti(c: &CubicalComplex) -> BettiVector {
    let w = c.side + 1;
    let mut uf = UnionFind::new(c.vertices.len());
    if c.dim == 1 {
        for (k, _) in c.h_edges.iter().enumerate().filter(|(_, e)| **e) {
            uf.union(k as u32, k as u32 + 1);
        }
    } else {
        let n = c.side;
        for j in 0..w {
            for i in 0..n {
                if c.h_edges[j * n + i] {
                    uf.union((j * w + i) as u32, (j * w + i + 1) as u32);
                }
            }
        }
        for j in 0..n {
            for i in 0..w {
                if c.v_edges[j * w + i] {
                    uf.union((j * w + i) as u32, ((j + 1) * w + i) as u32);
                }
            }
        }
    }
    let b0 = (0..c.vertices.len())
        .filter(|&v| c.vertices[v] && uf.find(v as u32) == v as u32)
        .count();
    if c.dim == 1 {
        return BettiVector::new(b0, 0);
    }
    let b1 = b0 as i64 - c.euler_characteristic();
    debug_assert!(b1 >= 0);
    BettiVector::new(b0, b1 as usize)
}

pub fn betti_of(cs: &CubicalSet) -> BettiVector {
    betti(&close_faces(cs))
}

/// Betti numbers of `Q_M^+` and `Q_M^-` at resolution `m`.
pub fn approx_betti(r: &Realization, m: usize, zero_tol: f64) -> Result<BettiPair> {
    let grid = sign_grid(r, m, zero_tol)?;
    Ok(BettiPair {
        plus: betti_of(&cubical_approx(&grid, Polarity::Plus)),
        minus: betti_of(&cubical_approx(&grid, Polarity::Minus)),
    })
}

/// Default reference resolution: `max(8 M, 16 N_freq)`.
pub fn reference_resolution(m: usize, max_frequency: usize) -> usize {
    (8 * m).max(16 * max_frequency).max(1)
}

/// Reference homology from `Q_{M_ref}^±`, accepted only if it agrees with
/// `Q_{2 M_ref}^±`.
pub fn reference_betti(r: &Realization, m_ref: usize) -> Result<BettiPair> {
    let coarse = approx_betti(r, m_ref, 0.0)?;
    let fine = approx_betti(r, 2 * m_ref, 0.0)?;
    if coarse != fine {
        return Err(Error::Unresolved {
            coarse: m_ref,
            fine: 2 * m_ref,
        });
    }
    Ok(coarse)
}

pub fn homology_match(a: &BettiPair, b: &BettiPair) -> bool {
    a.plus == b.plus && a.minus == b.minus
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random_fields::{CoeffSeq1D, CoeffSeq2D, Realization1D, Realization2D};

    fn set2(side: usize, cells: &[(usize, usize)]) -> CubicalSet {
        let mut occ = vec![false; side * side];
        for &(i, j) in cells {
            occ[j * side + i] = true;
        }
        CubicalSet::from_cells(2, side, occ).unwrap()
    }

    fn vef(cs: &CubicalSet) -> (usize, usize, usize) {
        let c = close_faces(cs);
        (c.num_vertices(), c.num_edges(), c.num_faces())
    }

    #[test]
    fn face_counts() {
        assert_eq!(vef(&set2(3, &[(1, 1)])), (4, 4, 1));
        assert_eq!(vef(&set2(3, &[(0, 0), (1, 0)])), (6, 7, 2));
        assert_eq!(vef(&set2(3, &[(0, 0), (1, 1)])), (7, 8, 2));
    }

    #[test]
    fn betti_examples() {
        let full: Vec<_> = (0..4).flat_map(|j| (0..4).map(move |i| (i, j))).collect();
        assert_eq!(betti_of(&set2(4, &full)), BettiVector::new(1, 0));
        let ring: Vec<_> = full
            .iter()
            .copied()
            .filter(|&(i, j)| i < 3 && j < 3 && (i, j) != (1, 1))
            .collect();
        assert_eq!(betti_of(&set2(4, &ring)), BettiVector::new(1, 1));
        assert_eq!(
            betti_of(&set2(3, &[(0, 0), (1, 1)])),
            BettiVector::new(1, 0)
        );
        assert_eq!(betti_of(&set2(3, &[])), BettiVector::new(0, 0));
        assert_eq!(
            betti_of(&set2(4, &[(0, 0), (2, 2)])),
            BettiVector::new(2, 0)
        );
    }

    #[test]
    fn betti_1d_counts_runs() {
        let cs = CubicalSet::from_cells(1, 6, vec![true, false, true, true, false, true]).unwrap();
        assert_eq!(betti_of(&cs), BettiVector::new(3, 0));
    }

    fn cos_1d() -> Realization {
        let c = CoeffSeq1D::new(1.0, vec![0.0, 1.0, 1.0]).unwrap();
        let g = vec![0.0, 0.0, 1.0, 0.0, 0.0];
        Realization::OneD(Realization1D::from_parts(c, g, 0).unwrap())
    }

    #[test]
    fn reference_cosine_1d() {
        let b = reference_betti(&cos_1d(), 64).unwrap();
        assert_eq!(b.plus, BettiVector::new(2, 0));
        assert_eq!(b.minus, BettiVector::new(1, 0));
    }

    #[test]
    fn reference_constant() {
        let c = CoeffSeq1D::new(1.0, vec![1.0, 1.0]).unwrap();
        let r = Realization::OneD(Realization1D::from_parts(c, vec![1.0, 0.0, 0.0], 0).unwrap());
        let b = reference_betti(&r, 16).unwrap();
        assert_eq!(b.plus, BettiVector::new(1, 0));
        assert_eq!(b.minus, BettiVector::new(0, 0));
    }

    #[test]
    fn reference_cosine_bands_2d() {
        let a = vec![
            vec![0.0, 0.0, 0.0],
            vec![1.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        let c = CoeffSeq2D::new(1.0, a).unwrap();
        let mut g = vec![vec![[0.0; 4]; 3]; 3];
        g[1][0][0] = 1.0;
        let r = Realization::TwoD(Realization2D::from_parts(c, g, 0).unwrap());
        let b = reference_betti(&r, 64).unwrap();
        assert_eq!(b.plus, BettiVector::new(2, 0));
        assert_eq!(b.minus, BettiVector::new(1, 0));
    }

    #[test]
    fn match_examples() {
        let p = |a: (usize, usize), b: (usize, usize)| BettiPair {
            plus: BettiVector::new(a.0, a.1),
            minus: BettiVector::new(b.0, b.1),
        };
        assert!(homology_match(&p((1, 0), (1, 0)), &p((1, 0), (1, 0))));
        assert!(!homology_match(&p((2, 0), (1, 0)), &p((1, 0), (1, 0))));
        assert!(homology_match(&p((1, 1), (1, 0)), &p((1, 1), (1, 0))));
    }

    #[test]
    fn betti_json_round_trip() {
        let b = BettiPair {
            plus: BettiVector::new(3, 1),
            minus: BettiVector::new(2, 0),
        };
        assert_eq!(b.to_json(), r#"{"minus":[2,0],"plus":[3,1]}"#);
        assert_eq!(BettiPair::from_json(&b.to_json()).unwrap(), b);
    }
}
