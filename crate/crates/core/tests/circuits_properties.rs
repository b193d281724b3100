use critfpp::circuits::{
    color_switch, color_switch_inverse, loop_count_n, m_and_innermost_blue, rho, s_x_in, SxExact, SxMode,
};
use critfpp::config::{enumerate_region, Color, ConfigSource};
use critfpp::experiments::mj_samples;
use critfpp::fpp::AnnulusGeometry;
use critfpp::lattice::{Region, SiteCoord, SiteRows, SiteSet};
use critfpp::stats::{tv_distance, Histogram};

#[test]
fn greedy_s_x_against_exhaustive_oracle() {
    let region = Region::Annulus { inner: 1.0, outer: 3.0 }.sites();
    let colorings = enumerate_region(&region, &ConfigSource::constant(Color::Blue)).unwrap();
    for x in [0u32, 1] {
        let exact = SxExact::new(x, 1.0, 3.0).unwrap();
        for bits in 0..colorings.total() {
            let c = colorings.config(bits);
            let g = s_x_in(&c, x, 1.0, 3.0, SxMode::Greedy).unwrap();
            let e = exact.eval(&c).unwrap().count;
            assert!(g.count <= e, "x {x}, coloring {bits}: greedy above the maximum");
            if x == 1 || !g.lower_bound {
                assert_eq!(g.count, e, "x {x}, coloring {bits}");
            }
        }
    }
}

#[test]
fn crossing_time_equals_circuit_count_on_random_colorings() {
    for (r, big_r, reps) in [(2.0, 8.0, 10_000u64), (4.0, 16.0, 10_000), (8.0, 64.0, 10_000)] {
        let g = AnnulusGeometry::new(r, big_r).unwrap();
        let mut seen = Histogram::new();
        for seed in 0..reps {
            let src = ConfigSource::hashed(seed);
            let t = g.passage(&src, false).unwrap().time;
            let (n, dec) = rho(&src, r, big_r).unwrap();
            assert_eq!(t, n, "A({r}, {big_r}) seed {seed}");
            dec.validate(&src, &Region::Annulus { inner: r, outer: big_r }.resolve()).unwrap();
            seen.push(t as i64);
        }
        // the check is only meaningful if nonzero counts occur
        assert!(seen.survival(1) > 0.0, "A({r}, {big_r}) never had a circuit");
    }
}

fn stored_with_blue_boundary(seed: u64, big_r: f64) -> ConfigSource {
    let ball = SiteRows::ball(SiteCoord::ORIGIN, big_r).to_set();
    ConfigSource::hashed(seed).materialize(&ball, Color::Blue)
}

#[test]
fn color_switch_round_trip_on_random_colorings() {
    let (r, big_r) = (2.0, 12.0);
    let ball = SiteRows::ball(SiteCoord::ORIGIN, big_r).to_set();
    let mut nonzero = 0;
    for seed in 0..3000 {
        let src = stored_with_blue_boundary(seed, big_r);
        let (n, _) = rho(&src, r, big_r).unwrap();
        let image = color_switch(&src, r, big_r).unwrap();
        assert_eq!(loop_count_n(&image, r, big_r).unwrap().0, n, "seed {seed}");
        let back = color_switch_inverse(&image, r, big_r).unwrap();
        assert!(ball.iter().all(|&s| back.color_at(s) == src.color_at(s)), "seed {seed}");
        nonzero += (n > 0) as u32;
    }
    assert!(nonzero > 30);
}

#[test]
fn crossing_time_and_loop_count_share_a_law() {
    // independent seed streams, so agreement is statistical
    let (r, big_r) = (4.0, 16.0);
    let g = AnnulusGeometry::new(r, big_r).unwrap();
    let t: Histogram = (0..10_000u64).map(|s| g.passage(&ConfigSource::hashed(s), false).unwrap().time as i64).collect();
    let n: Histogram = (0..10_000u64)
        .map(|s| loop_count_n(&stored_with_blue_boundary(1 << 40 | s, big_r), r, big_r).unwrap().0 as i64)
        .collect();
    let d = tv_distance(&t, &n).unwrap();
    assert!(d < 0.02, "tv {d}");
}

#[test]
fn m_of_j_examples_and_censoring() {
    let blue = ConfigSource::constant(Color::Blue);
    assert_eq!(m_and_innermost_blue(&blue, 4, 2).unwrap().0, 4);
    // a yellow ray through the first two dyadic annuli blocks every blue circuit there
    let ray: SiteSet = (0..=32).map(|x| SiteCoord::new(x, 0)).collect();
    let src = blue.with_overrides(&ray, Color::Yellow);
    assert_eq!(m_and_innermost_blue(&src, 3, 5).unwrap().0, 5);
    // censored samples never exceed the cap and flag exactly the capped replicas
    for (d, capped) in mj_samples(3, 2, 200, 9, 1).unwrap() {
        assert!(d <= 2);
        assert_eq!(capped, d == 2);
    }
    assert!(m_and_innermost_blue(&blue, 10, 10).is_err());
}
