mod common;

use common::flood_fill_betti;
use nodal_core::cubical::{cubical_approx, Polarity, Sign, SignGrid};
use nodal_core::homology::{betti_of, close_faces};
use proptest::prelude::*;

fn grid(m: usize, bits: &[bool]) -> SignGrid {
    let signs = bits
        .iter()
        .map(|b| if *b { Sign::Plus } else { Sign::Minus })
        .collect();
    SignGrid::from_signs(2, m, signs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn union_find_matches_flood_fill(m in 1usize..9, seed in prop::collection::vec(any::<bool>(), 81)) {
        let side = m + 1;
        let bits = &seed[..side * side];
        let g = grid(m, bits);
        for pol in [Polarity::Plus, Polarity::Minus] {
            let q = cubical_approx(&g, pol);
            let b = betti_of(&q);
            let (b0, b1) = flood_fill_betti(side, q.occupancy());
            prop_assert_eq!((b.b0, b.b1), (b0, b1));
            let chi = close_faces(&q).euler_characteristic();
            prop_assert_eq!(chi, b0 as i64 - b1 as i64);
        }
    }

    #[test]
    fn zero_flags_enter_both_sets(m in 1usize..6, cells in prop::collection::vec(0u8..3, 49)) {
        let side = m + 1;
        let signs: Vec<Sign> = cells[..side * side]
            .iter()
            .map(|c| [Sign::Plus, Sign::Minus, Sign::Zero][*c as usize])
            .collect();
        let g = SignGrid::from_signs(2, m, signs.clone()).unwrap();
        let plus = cubical_approx(&g, Polarity::Plus);
        let minus = cubical_approx(&g, Polarity::Minus);
        for (i, s) in signs.iter().enumerate() {
            prop_assert_eq!(plus.occupancy()[i], *s != Sign::Minus);
            prop_assert_eq!(minus.occupancy()[i], *s != Sign::Plus);
        }
    }
}
