use nalgebra::DMatrix;
use nodal_core::orthant::{orthant_exact_small, orthant_mc, orthant_radial, CovMatrix};
use nodal_core::random_fields::{CoeffSeq1D, CoeffSeq2D};
use proptest::prelude::*;

#[test]
fn one_point_moments_1d() {
    let c = CoeffSeq1D::new(3.0, vec![0.0, 1.0, 0.5, 0.25]).unwrap();
    let n = 20_000;
    let (x, h) = (0.7, 0.3);
    let (mut s, mut s2, mut sxy) = (0.0, 0.0, 0.0);
    for seed in 0..n {
        let r = c.draw(seed);
        let (u, v) = (r.value(x), r.value(x + h));
        s += u;
        s2 += u * u;
        sxy += u * v;
    }
    let nf = n as f64;
    let a0 = c.covariance(0.0);
    assert!((s / nf).abs() < 4.0 * (a0 / nf).sqrt());
    // var(u^2) = 2 a0^2 for a centred Gaussian
    assert!((s2 / nf - a0).abs() < 4.0 * a0 * (2.0 / nf).sqrt());
    let r = c.covariance(h);
    assert!((sxy / nf - r).abs() < 4.0 * a0 * (2.0 / nf).sqrt());
}

#[test]
fn one_point_moments_2d() {
    let c = CoeffSeq2D::trig(3).unwrap();
    let n = 10_000;
    let (p, q) = ([1.0, 2.0], [1.2, 1.9]);
    let (mut s2, mut sxy) = (0.0, 0.0);
    for seed in 0..n {
        let r = c.draw(seed);
        let u = r.value(p);
        s2 += u * u;
        sxy += u * r.value(q);
    }
    let nf = n as f64;
    let a0 = c.covariance([0.0, 0.0]);
    assert!((s2 / nf - a0).abs() < 4.0 * a0 * (2.0 / nf).sqrt());
    let r = c.covariance([q[0] - p[0], q[1] - p[1]]);
    assert!((sxy / nf - r).abs() < 4.0 * a0 * (2.0 / nf).sqrt());
}

fn gram(v: &[f64]) -> CovMatrix {
    let a = DMatrix::from_row_slice(3, 3, v);
    CovMatrix::new(&a * a.transpose() + DMatrix::identity(3, 3) * 0.05).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn estimators_agree_with_exact(v in prop::collection::vec(-1.0f64..1.0, 9), s in prop::collection::vec(prop::bool::ANY, 3), seed in any::<u64>()) {
        let cov = gram(&v);
        let signs: Vec<i8> = s.iter().map(|b| if *b { 1 } else { -1 }).collect();
        let exact = orthant_exact_small(&signs, &cov).unwrap();
        let mc = orthant_mc(&signs, &cov, 100_000, seed).unwrap();
        prop_assert!((mc.estimate - exact).abs() < 5.0 * mc.stderr + 1e-3, "mc {:?} exact {}", mc, exact);
        let rad = orthant_radial(&signs, &cov, 50_000, seed).unwrap();
        prop_assert!((rad.estimate - exact).abs() < 5.0 * rad.stderr + 1e-3, "radial {:?} exact {}", rad, exact);
    }

    #[test]
    fn complementary_orthants_sum_to_one(v in prop::collection::vec(-1.0f64..1.0, 9)) {
        let cov = gram(&v);
        let total: f64 = (0..8)
            .map(|b: u32| {
                let signs: Vec<i8> = (0..3).map(|i| if b >> i & 1 == 1 { 1 } else { -1 }).collect();
                orthant_exact_small(&signs, &cov).unwrap()
            })
            .sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }
}

#[test]
fn doubling_samples_shrinks_stderr() {
    let cov = gram(&[1.0, 0.2, 0.0, 0.3, 1.0, 0.1, 0.0, -0.4, 1.0]);
    let a = orthant_mc(&[1, 1, -1], &cov, 200_000, 1).unwrap();
    let b = orthant_mc(&[1, 1, -1], &cov, 400_000, 2).unwrap();
    let ratio = a.stderr / b.stderr;
    assert!((ratio / 2f64.sqrt() - 1.0).abs() < 0.2, "{ratio}");
    let a = orthant_radial(&[1, 1, -1], &cov, 200_000, 1).unwrap();
    let b = orthant_radial(&[1, 1, -1], &cov, 400_000, 2).unwrap();
    let ratio = a.stderr / b.stderr;
    assert!((ratio / 2f64.sqrt() - 1.0).abs() < 0.2, "{ratio}");
}
