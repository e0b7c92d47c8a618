use nodal_core::admissibility::{
    b_admissible, interval_admissible, validate_1d, validate_2d, Status,
};
use nodal_core::random_fields::{CoeffSeq1D, CoeffSeq2D};
use proptest::prelude::*;

fn status_1d(n: usize, seed: u64, m: usize, d: usize) -> (Status, Status) {
    let r = CoeffSeq1D::trig(n).unwrap().draw(seed);
    let a = validate_1d(&r, m, d).unwrap().status;
    let b = validate_1d(&r.negated(), m, d).unwrap().status;
    (a, b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn polarity_1d(n in 2usize..8, seed in any::<u64>(), m in 1usize..30) {
        let (a, b) = status_1d(n, seed, m, 6);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn reflection_1d(n in 2usize..8, seed in any::<u64>(), m in 1usize..30) {
        let r = CoeffSeq1D::trig(n).unwrap().draw(seed);
        let a = validate_1d(&r, m, 5).unwrap();
        let b = validate_1d(&r.reflected(), m, 5).unwrap();
        prop_assert_eq!(a.status, b.status);
        prop_assert_eq!(a.violations.len(), b.violations.len());
    }

    #[test]
    fn depth_monotone_1d(n in 2usize..8, seed in any::<u64>(), m in 1usize..30) {
        let r = CoeffSeq1D::trig(n).unwrap().draw(seed);
        if validate_1d(&r, m, 6).unwrap().is_certified() {
            for d in 0..6 {
                prop_assert!(validate_1d(&r, m, d).unwrap().is_certified());
            }
        }
    }

    #[test]
    fn certified_positive_interval_stays_positive(n in 2usize..8, seed in any::<u64>(), m in 4usize..30) {
        let r = CoeffSeq1D::trig(n).unwrap().draw(seed);
        let h = r.period() / m as f64;
        for k in 0..m {
            let (a, b) = (k as f64 * h, (k + 1) as f64 * h);
            let (ua, ub) = (r.value(a), r.value(b));
            if ua.signum() != ub.signum() || !interval_admissible(&r, [a, b], 6).unwrap().is_certified() {
                continue;
            }
            for j in 0..=1000 {
                let v = r.value(a + (b - a) * j as f64 / 1000.0);
                prop_assert!(v * ua.signum() >= 0.0, "sign change inside certified interval {k} at sample {j}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn polarity_and_symmetry_2d(n in 2usize..4, seed in any::<u64>(), m in 3usize..10) {
        let r = CoeffSeq2D::trig(n).unwrap().draw(seed);
        let s = validate_2d(&r, m, 3).unwrap().status;
        prop_assert_eq!(validate_2d(&r.negated(), m, 3).unwrap().status, s);
        prop_assert_eq!(validate_2d(&r.reflect_x1(), m, 3).unwrap().status, s);
        prop_assert_eq!(validate_2d(&r.transpose(), m, 3).unwrap().status, s);
    }

    #[test]
    fn depth_monotone_2d(seed in any::<u64>(), m in 8usize..16) {
        let r = CoeffSeq2D::trig(2).unwrap().draw(seed);
        if validate_2d(&r, m, 4).unwrap().is_certified() {
            for d in 0..4 {
                prop_assert!(validate_2d(&r, m, d).unwrap().is_certified());
            }
        }
    }

    #[test]
    fn b_admissible_positive_corners_stay_positive(seed in any::<u64>(), m in 6usize..16) {
        let r = CoeffSeq2D::trig(2).unwrap().draw(seed);
        let h = r.period() / m as f64;
        for k2 in 0..m {
            for k1 in 0..m {
                let c = [k1 as f64 * h, k2 as f64 * h];
                let corners = [c, [c[0] + h, c[1]], [c[0] + h, c[1] + h], [c[0], c[1] + h]].map(|p| r.value(p));
                let sign = corners[0].signum();
                if corners.iter().any(|v| v.signum() != sign) || !b_admissible(&r, c, h, 5).unwrap().is_certified() {
                    continue;
                }
                for j in 0..32 {
                    for i in 0..32 {
                        let p = [c[0] + h * i as f64 / 31.0, c[1] + h * j as f64 / 31.0];
                        prop_assert!(r.value(p) * sign >= 0.0, "square ({k1}, {k2}) changes sign at ({i}, {j})");
                    }
                }
            }
        }
    }
}
