use critfpp::lattice::{position, Region, SiteCoord, SiteRows, SiteSet};
use critfpp::stats::{fit_line, ks_normal, ks_two_sample, tv_distance, Histogram, MomentAccumulator};
use proptest::prelude::*;

/// Ball membership from floating vertex geometry, independent of the integer test.
fn ball_brute(r: f64) -> SiteSet {
    let m = (r.ceil() as i32) * 2 + 2;
    let mut out = SiteSet::new();
    for x in -m..=m {
        for y in -m..=m {
            let (px, py) = position(SiteCoord::new(x, y));
            let inside = (0..6).all(|k| {
                let a = (30.0 + 60.0 * k as f64).to_radians();
                let (vx, vy) = (px + a.cos() / 3f64.sqrt(), py + a.sin() / 3f64.sqrt());
                (vx * vx + vy * vy).sqrt() <= r + 1e-9
            });
            if inside {
                out.insert(SiteCoord::new(x, y));
            }
        }
    }
    out
}

fn rel_eq(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #[test]
    fn ball_matches_vertex_geometry(r in 0.0f64..14.0) {
        prop_assert_eq!(Region::ball(r).sites(), ball_brute(r));
    }

    #[test]
    fn balls_are_nested(r in 0.0f64..30.0, dr in 0.0f64..5.0) {
        let small = SiteRows::ball(SiteCoord::ORIGIN, r);
        let big = SiteRows::ball(SiteCoord::ORIGIN, r + dr);
        prop_assert!(small.difference(&big).is_empty());
    }

    #[test]
    fn external_boundary_is_adjacent_and_outside(r in 1.0f64..20.0) {
        let ball = SiteRows::ball(SiteCoord::ORIGIN, r);
        for s in ball.external_boundary().iter() {
            prop_assert!(!ball.contains(s));
            prop_assert!(s.neighbors().iter().any(|&t| ball.contains(t)));
        }
    }

    #[test]
    fn merge_is_associative(a in prop::collection::vec(-1e3f64..1e3, 0..50),
                            b in prop::collection::vec(-1e3f64..1e3, 0..50),
                            c in prop::collection::vec(-1e3f64..1e3, 0..50)) {
        let acc = |v: &[f64]| v.iter().copied().collect::<MomentAccumulator>();
        let (x, y, z) = (acc(&a), acc(&b), acc(&c));
        let mut left = x.clone();
        left.merge(&y);
        left.merge(&z);
        let mut yz = y.clone();
        yz.merge(&z);
        let mut right = x.clone();
        right.merge(&yz);
        prop_assert_eq!(left.n, right.n);
        prop_assert!(rel_eq(left.mean, right.mean, 1e-12));
        prop_assert!(rel_eq(left.m2, right.m2, 1e-12));
        // and agrees with one pass over the concatenation
        let all: Vec<f64> = a.iter().chain(&b).chain(&c).copied().collect();
        let flat = acc(&all);
        prop_assert!(rel_eq(left.mean, flat.mean, 1e-10));
        prop_assert!(rel_eq(left.m2, flat.m2, 1e-9));
    }

    #[test]
    fn tv_is_a_metric(a in prop::collection::vec(0i64..6, 1..40),
                      b in prop::collection::vec(0i64..6, 1..40),
                      c in prop::collection::vec(0i64..6, 1..40)) {
        let h = |v: &[i64]| v.iter().copied().collect::<Histogram>();
        let (x, y, z) = (h(&a), h(&b), h(&c));
        let d = |p: &Histogram, q: &Histogram| tv_distance(p, q).unwrap();
        prop_assert!(d(&x, &x).abs() < 1e-15);
        prop_assert!((d(&x, &y) - d(&y, &x)).abs() < 1e-15);
        prop_assert!((0.0..=1.0).contains(&d(&x, &y)));
        prop_assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z) + 1e-12);
    }

    #[test]
    fn histogram_counts_everything(v in prop::collection::vec(-5i64..5, 0..100)) {
        let h: Histogram = v.iter().copied().collect();
        prop_assert_eq!(h.total(), v.len() as u64);
    }

    #[test]
    fn r_squared_in_unit_interval(ys in prop::collection::vec(-10f64..10.0, 3..30)) {
        let xs: Vec<f64> = (0..ys.len()).map(|i| i as f64).collect();
        let f = fit_line(&xs, &ys).unwrap();
        prop_assert!((0.0..=1.0).contains(&f.r_squared));
    }

    #[test]
    fn ks_p_falls_as_shift_grows(shift in 0.0f64..1.0) {
        // deterministic normal quantile grid shifted by growing amounts
        let grid: Vec<f64> = (1..400).map(|i| probit(i as f64 / 400.0)).collect();
        let p = |s: f64| ks_normal(&grid.iter().map(|x| x + s).collect::<Vec<_>>()).unwrap().1;
        prop_assert!(p(shift + 0.05) <= p(shift) + 1e-12);
        let q = |s: f64| ks_two_sample(&grid, &grid.iter().map(|x| x + s).collect::<Vec<_>>()).unwrap().1;
        prop_assert!(q(shift + 0.05) <= q(shift) + 1e-12);
    }
}

/// Standard normal quantile by bisection on erfc, enough for a test grid.
fn probit(p: f64) -> f64 {
    let cdf = |x: f64| 0.5 * erfc(-x / std::f64::consts::SQRT_2);
    let (mut lo, mut hi) = (-10.0, 10.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < p {
            lo = mid
        } else {
            hi = mid
        }
    }
    0.5 * (lo + hi)
}

/// Complementary error function (Numerical Recipes Chebyshev fit, 1.2e-7 relative).
fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let r = t * (-z * z - 1.26551223
        + t * (1.00002368
            + t * (0.37409196
                + t * (0.09678418
                    + t * (-0.18628806
                        + t * (0.27886807 + t * (-1.13520398 + t * (1.48851587 + t * (-0.82215223 + t * 0.17087277)))))))))
        .exp();
    if x >= 0.0 {
        r
    } else {
        2.0 - r
    }
}

#[test]
fn ks_normal_accepts_normal_grid_and_rejects_shift() {
    let grid: Vec<f64> = (1..2000).map(|i| probit(i as f64 / 2000.0)).collect();
    assert!(ks_normal(&grid).unwrap().1 > 0.99);
    let shifted: Vec<f64> = grid.iter().map(|x| x + 0.5).collect();
    assert!(ks_normal(&shifted).unwrap().1 < 1e-6);
}
