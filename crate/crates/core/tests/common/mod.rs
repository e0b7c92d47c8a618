#![allow(dead_code)]

use std::collections::VecDeque;

/// Betti numbers of a union of closed unit squares on a `side x side` board
/// by flood fill: components are 8-connected filled cells, holes are bounded
/// 4-connected components of the empty cells of the board padded by one ring.
pub fn flood_fill_betti(side: usize, filled: &[bool]) -> (usize, usize) {
    let at = |i: isize, j: isize| -> bool {
        i >= 0
            && j >= 0
            && (i as usize) < side
            && (j as usize) < side
            && filled[j as usize * side + i as usize]
    };
    let count = |want: bool, diag: bool, lo: isize, hi: isize| -> usize {
        let w = (hi - lo) as usize;
        let mut seen = vec![false; w * w];
        let mut comps = 0;
        for j0 in lo..hi {
            for i0 in lo..hi {
                let idx = |i: isize, j: isize| (j - lo) as usize * w + (i - lo) as usize;
                if at(i0, j0) != want || seen[idx(i0, j0)] {
                    continue;
                }
                comps += 1;
                seen[idx(i0, j0)] = true;
                let mut queue = VecDeque::from([(i0, j0)]);
                while let Some((i, j)) = queue.pop_front() {
                    for dj in -1..=1 {
                        for di in -1..=1 {
                            if (di == 0 && dj == 0) || (!diag && di != 0 && dj != 0) {
                                continue;
                            }
                            let (a, b) = (i + di, j + dj);
                            if a < lo
                                || b < lo
                                || a >= hi
                                || b >= hi
                                || at(a, b) != want
                                || seen[idx(a, b)]
                            {
                                continue;
                            }
                            seen[idx(a, b)] = true;
                            queue.push_back((a, b));
                        }
                    }
                }
            }
        }
        comps
    };
    let s = side as isize;
    let b0 = count(true, true, 0, s);
    // the padded ring makes the unbounded complement a single component
    let b1 = count(false, false, -1, s + 1) - 1;
    (b0, b1)
}
