use critfpp::config::ConfigSource;
use critfpp::experiments::shape_identity_exhaustive;
use critfpp::shape::{self, edge_endpoints};
use critfpp::stats::ks_two_sample;

#[test]
fn identity_on_every_coloring_of_a_small_ball() {
    let (checked, matched, bad) = shape_identity_exhaustive(3.0).unwrap();
    assert!(checked > 5000, "only {checked} colorings defined both sides");
    assert_eq!(matched, checked, "{bad:?}");
}

#[test]
fn identity_on_seeded_windows() {
    for n in [1, 2] {
        let mut fitted = 0;
        for seed in 0..400 {
            if let Some(m) = shape::identity_check(&ConfigSource::hashed(seed), n, 16.0, 64.0).unwrap() {
                assert!(m.matched, "n {n} seed {seed}");
                fitted += 1;
            }
        }
        assert!(fitted > 0);
    }
}

#[test]
fn boundaries_are_closed_simple_and_ordered() {
    for seed in 0..300 {
        let Ok(s) = shape::wet_sample(&ConfigSource::hashed(seed), 1, 16.0, 64.0) else { continue };
        assert!(0.0 < s.r_in && s.r_in <= s.r_out);
        // consecutive edges share an endpoint and the cycle closes
        let pts: Vec<_> = s.boundary.iter().map(|&e| edge_endpoints(e)).collect();
        for (k, &(_, b)) in pts.iter().enumerate() {
            let (a, _) = pts[(k + 1) % pts.len()];
            assert!((a.0 - b.0).abs() < 1e-9 && (a.1 - b.1).abs() < 1e-9, "seed {seed}");
        }
        // no vertex is visited twice
        let mut keys: Vec<(i64, i64)> = pts.iter().map(|p| ((p.0 .0 * 1e6).round() as i64, (p.0 .1 * 1e6).round() as i64)).collect();
        keys.sort();
        let len = keys.len();
        keys.dedup();
        assert_eq!(keys.len(), len, "seed {seed}");
    }
}

#[test]
fn wet_hull_and_cluster_loop_share_a_law() {
    let reps = 8000u64;
    let wet: Vec<f64> = (0..reps)
        .filter_map(|s| shape::wet_sample(&ConfigSource::hashed(s), 1, 32.0, 64.0).ok())
        .map(|v| v.ratio())
        .collect();
    let proxy: Vec<f64> = (0..reps)
        .filter_map(|s| shape::proxy_sample(&ConfigSource::hashed(s | 1 << 40), 1, 32.0, 64.0).ok())
        .map(|v| v.ratio())
        .collect();
    assert!(wet.len() > 1000 && proxy.len() > 1000);
    let (d, p) = ks_two_sample(&wet, &proxy).unwrap();
    assert!(p > 1e-3, "KS distance {d}, p {p}");
}
