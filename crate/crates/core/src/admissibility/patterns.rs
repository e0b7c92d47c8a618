//! Forbidden sign-pattern libraries on the 3x3 square stencil.
//!
//! Stencil position `(x, y)`, `x, y in {0, 1, 2}` in half-side units, has
//! index `3 * y + x`. A full sign assignment is a 9-bit mask with bit `i` set
//! when position `i` is positive.

use std::fmt;
use std::sync::OnceLock;

use crate::cubical::Sign;
use crate::error::{Error, Result};

pub const B_SURVIVORS: usize = 66;
pub const I4_SURVIVORS: usize = 92;
pub const I_SURVIVORS: usize = 90;

const B_BASE: usize = 7;
const I4_BASE: usize = 16;
const I5_BASE: usize = 1;

const BUILTIN: &str = include_str!("../../data/patterns.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Lib {
    B,
    I4,
    I5,
    /// One-dimensional double crossover (`+ - +` or `- + -`).
    Crossover,
}

impl Lib {
    fn parse(s: &str) -> Option<Lib> {
        match s {
            "B" => Some(Lib::B),
            "I4" => Some(Lib::I4),
            "I5" => Some(Lib::I5),
            _ => None,
        }
    }
}

impl fmt::Display for Lib {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Lib::B => "B",
            Lib::I4 => "I4",
            Lib::I5 => "I5",
            Lib::Crossover => "X",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PatternId {
    pub lib: Lib,
    pub num: u32,
}

impl fmt::Display for PatternId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.lib, self.num)
    }
}

/// Constraint mask on the stencil: positions in `care` must have the sign
/// given by `plus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SignPattern {
    care: u16,
    plus: u16,
}

impl SignPattern {
    /// From nine characters in `{+, -, .}`, index `3 * y + x`.
    pub fn from_cells(cells: &[char; 9]) -> Option<Self> {
        let (mut care, mut plus) = (0u16, 0u16);
        for (i, c) in cells.iter().enumerate() {
            match c {
                '+' => {
                    care |= 1 << i;
                    plus |= 1 << i;
                }
                '-' => care |= 1 << i,
                '.' => {}
                _ => return None,
            }
        }
        Some(Self { care, plus })
    }

    pub fn constrained(&self) -> u32 {
        self.care.count_ones()
    }

    pub fn matches(&self, mask: u16) -> bool {
        (mask ^ self.plus) & self.care == 0
    }

    pub fn flipped(&self) -> Self {
        Self {
            care: self.care,
            plus: !self.plus & self.care,
        }
    }

    fn permuted(&self, perm: &[usize; 9]) -> Self {
        let (mut care, mut plus) = (0, 0);
        for (i, &p) in perm.iter().enumerate() {
            care |= ((self.care >> i) & 1) << p;
            plus |= ((self.plus >> i) & 1) << p;
        }
        Self { care, plus }
    }

    /// All images under the dihedral group of the square and sign flip.
    pub fn orbit(&self) -> Vec<SignPattern> {
        let mut out: Vec<SignPattern> = dihedral_perms()
            .iter()
            .flat_map(|p| {
                let q = self.permuted(p);
                [q, q.flipped()]
            })
            .collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn canonical(&self) -> SignPattern {
        self.orbit()[0]
    }

    /// Three rows bottom to top.
    pub fn rows(&self) -> [String; 3] {
        let ch = |i: usize| {
            if self.care >> i & 1 == 0 {
                '.'
            } else if self.plus >> i & 1 == 1 {
                '+'
            } else {
                '-'
            }
        };
        [0, 1, 2].map(|y| (0..3).map(|x| ch(3 * y + x)).collect())
    }
}

/// The eight symmetries of the square as permutations of stencil indices.
pub fn dihedral_perms() -> [[usize; 9]; 8] {
    let rot = |(x, y): (usize, usize)| (2 - y, x);
    let refl = |(x, y): (usize, usize)| (2 - x, y);
    let mut out = [[0; 9]; 8];
    for (g, perm) in out.iter_mut().enumerate() {
        for (i, slot) in perm.iter_mut().enumerate() {
            let mut p = (i % 3, i / 3);
            for _ in 0..g % 4 {
                p = rot(p);
            }
            if g >= 4 {
                p = refl(p);
            }
            *slot = 3 * p.1 + p.0;
        }
    }
    out
}

/// A closed pattern library with a lookup table over all 512 stencils.
#[derive(Debug, Clone)]
pub struct PatternLibrary {
    name: String,
    base: Vec<(PatternId, SignPattern)>,
    closure: Vec<(PatternId, SignPattern)>,
    table: Vec<Vec<PatternId>>,
}

impl PatternLibrary {
    pub fn new(name: impl Into<String>, base: Vec<(PatternId, SignPattern)>) -> Self {
        let closure: Vec<(PatternId, SignPattern)> = base
            .iter()
            .flat_map(|(id, p)| p.orbit().into_iter().map(move |q| (*id, q)))
            .collect();
        let table = (0u16..512)
            .map(|mask| {
                let mut ids: Vec<PatternId> = closure
                    .iter()
                    .filter(|(_, p)| p.matches(mask))
                    .map(|(id, _)| *id)
                    .collect();
                ids.sort();
                ids.dedup();
                ids
            })
            .collect();
        Self {
            name: name.into(),
            base,
            closure,
            table,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn base_patterns(&self) -> &[(PatternId, SignPattern)] {
        &self.base
    }

    pub fn closure(&self) -> &[(PatternId, SignPattern)] {
        &self.closure
    }

    pub fn union(&self, other: &PatternLibrary, name: impl Into<String>) -> PatternLibrary {
        let mut base = self.base.clone();
        base.extend(other.base.iter().copied());
        PatternLibrary::new(name, base)
    }

    /// Base pattern ids matched by the full sign assignment `mask`.
    #[inline]
    pub fn matches(&self, mask: u16) -> &[PatternId] {
        &self.table[mask as usize & 511]
    }

    pub fn count_surviving(&self) -> usize {
        self.table.iter().filter(|ids| ids.is_empty()).count()
    }
}

/// The three libraries plus the interior union `I = I4 + I5`.
#[derive(Debug, Clone)]
pub struct PatternSet {
    pub b: PatternLibrary,
    pub i4: PatternLibrary,
    pub i5: PatternLibrary,
    pub i: PatternLibrary,
}

impl PatternSet {
    /// The library shipped with the crate.
    pub fn builtin() -> &'static PatternSet {
        static SET: OnceLock<PatternSet> = OnceLock::new();
        SET.get_or_init(|| load_patterns(BUILTIN).expect("shipped pattern file is valid"))
    }

    pub fn builtin_text() -> &'static str {
        BUILTIN
    }

    pub fn survivors(&self) -> Survivors {
        Survivors {
            b: self.b.count_surviving(),
            i4: self.i4.count_surviving(),
            i: self.i.count_surviving(),
        }
    }

    pub fn verify(&self) -> Result<()> {
        let base = [(&self.b, B_BASE), (&self.i4, I4_BASE), (&self.i5, I5_BASE)];
        for (lib, want) in base {
            if lib.base.len() != want {
                return Err(Error::ChecksumMismatch {
                    library: format!("{} base patterns", lib.name),
                    got: lib.base.len(),
                    expected: want,
                });
            }
        }
        let s = self.survivors();
        for (name, got, want) in [
            ("B", s.b, B_SURVIVORS),
            ("I4", s.i4, I4_SURVIVORS),
            ("I", s.i, I_SURVIVORS),
        ] {
            if got != want {
                return Err(Error::ChecksumMismatch {
                    library: name.into(),
                    got,
                    expected: want,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Survivors {
    pub b: usize,
    pub i4: usize,
    pub i: usize,
}

/// Parses a pattern file without checking survivor counts.
pub fn parse_patterns(text: &str) -> Result<PatternSet> {
    let mut libs: [Vec<(PatternId, SignPattern)>; 3] = Default::default();
    let mut seen = std::collections::HashMap::new();
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with("//"))
        .collect();
    let err = |line: usize, msg: String| Error::PatternParse { line, msg };
    let mut it = lines.into_iter();
    while let Some((line, header)) = it.next() {
        let rest = header
            .strip_prefix('#')
            .ok_or_else(|| err(line, format!("expected `#<lib>:<id>`, found {header:?}")))?;
        let (lib, num) = rest
            .split_once(':')
            .ok_or_else(|| err(line, "header must be `#<lib>:<id>`".into()))?;
        let lib = Lib::parse(lib.trim()).ok_or_else(|| {
            err(
                line,
                format!("unknown library {lib:?} (expected B, I4 or I5)"),
            )
        })?;
        let num: u32 = num
            .trim()
            .parse()
            .map_err(|_| err(line, format!("invalid pattern id {num:?}")))?;
        let mut cells = ['.'; 9];
        for y in 0..3 {
            let (row_line, row) = it
                .next()
                .ok_or_else(|| err(line, "pattern needs three rows".into()))?;
            let chars: Vec<char> = row.chars().collect();
            if chars.len() != 3 || row.starts_with('#') {
                return Err(err(
                    row_line,
                    format!("expected three of `+-.`, found {row:?}"),
                ));
            }
            cells[3 * y..3 * y + 3].copy_from_slice(&chars);
        }
        let pattern = SignPattern::from_cells(&cells)
            .ok_or_else(|| err(line, "pattern rows may only contain `+`, `-`, `.`".into()))?;
        if pattern.constrained() < 3 {
            return Err(err(
                line,
                "a pattern must constrain at least three positions".into(),
            ));
        }
        let id = PatternId { lib, num };
        if let Some(prev) = seen.insert((lib, pattern), id) {
            return Err(err(line, format!("{id} repeats {prev}")));
        }
        let slot = match lib {
            Lib::B => 0,
            Lib::I4 => 1,
            _ => 2,
        };
        if libs[slot].iter().any(|(other, _)| *other == id) {
            return Err(err(line, format!("duplicate id {id}")));
        }
        libs[slot].push((id, pattern));
    }
    let [b, i4, i5] = libs;
    let b = PatternLibrary::new("B", b);
    let i4 = PatternLibrary::new("I4", i4);
    let i5 = PatternLibrary::new("I5", i5);
    let i = i4.union(&i5, "I");
    Ok(PatternSet { b, i4, i5, i })
}

/// Parses a pattern file and rejects it unless the survivor counts match.
pub fn load_patterns(text: &str) -> Result<PatternSet> {
    let set = parse_patterns(text)?;
    set.verify()?;
    Ok(set)
}

/// Stencil signs as a 9-bit mask, or `None` if any sign is zero-flagged.
pub fn stencil_mask(values: &[Sign; 9]) -> Option<u16> {
    let mut mask = 0;
    for (i, s) in values.iter().enumerate() {
        match s {
            Sign::Plus => mask |= 1 << i,
            Sign::Minus => {}
            Sign::Zero => return None,
        }
    }
    Some(mask)
}

/// Marker for a stencil containing a zero-flagged sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Degenerate;

/// All library patterns present in a full stencil.
pub fn forbidden_in_stencil(
    values: &[Sign; 9],
    lib: &PatternLibrary,
) -> std::result::Result<Vec<PatternId>, Degenerate> {
    stencil_mask(values)
        .map(|m| lib.matches(m).to_vec())
        .ok_or(Degenerate)
}
