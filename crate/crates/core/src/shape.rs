//! Wet regions `{v : T(0, v) ≤ n}`, their hole-filled hulls, and the circuit
//! description of their outer boundaries.

use serde::Serialize;

use crate::circuits::innermost_around;
use crate::circuits::trace::{flood, trace_outer_edges, Scratch};
use crate::config::{Color, ConfigSource};
use crate::error::{Error, Result};
use crate::fpp::ZeroOneSearch;
use crate::lattice::{Hexagon, Region, SiteCoord, SiteRows};

/// Oriented hexagon edge: the site on the inside and the direction it faces.
pub type Edge = (SiteCoord, u8);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapeSample {
    pub n: u32,
    pub r_in: f64,
    pub r_out: f64,
    pub site_count: usize,
    /// Counterclockwise edge cycle, rotated to start at its smallest edge.
    pub boundary: Vec<Edge>,
}

impl ShapeSample {
    pub fn ratio(&self) -> f64 {
        self.r_out / self.r_in
    }
}

/// `W(n)` and its hole-filled hull inside `window`.
pub fn w_set(source: &ConfigSource, n: u32, window: &Region) -> Result<(SiteRows, SiteRows)> {
    let rows = window.resolve();
    if !rows.contains(SiteCoord::ORIGIN) {
        return Err(Error::OriginNotInside);
    }
    let mut search = ZeroOneSearch::new(source, &rows)?;
    search.add_source(SiteCoord::ORIGIN)?;
    let mut wet = Vec::new();
    search.run(|v, d| {
        if d > n {
            return true;
        }
        wet.push(v);
        false
    })?;
    // only sites with label ≤ n were expanded
    if search.window_hit() {
        return Err(Error::WindowOverflow);
    }
    let w = SiteRows::from_sites(&wet);
    let filled = fill_holes(&w);
    Ok((w, filled))
}

/// The set together with every finite component of its complement.
pub fn fill_holes(set: &SiteRows) -> SiteRows {
    let Some((xmin, xmax, ymin, ymax)) = set.bounds() else {
        return SiteRows::default();
    };
    let mut sc = Scratch::around(set, 1).expect("nonempty");
    const OUT: u8 = 1;
    let in_box = |s: SiteCoord| s.x >= xmin - 1 && s.x <= xmax + 1 && s.y >= ymin - 1 && s.y <= ymax + 1;
    flood(&mut sc, [SiteCoord::new(xmin - 1, ymin - 1)], OUT, in_box, |_, s| !set.contains(s));
    let mut inside = Vec::new();
    for y in ymin..=ymax {
        for x in xmin..=xmax {
            let s = SiteCoord::new(x, y);
            if !sc.has(s, OUT) {
                inside.push(s);
            }
        }
    }
    SiteRows::from_sites(&inside)
}

/// Outer edge cycle of a hexagon union, canonically rotated.
pub fn outer_boundary(set: &SiteRows) -> Vec<Edge> {
    let Some(start) = set.rightmost() else {
        return Vec::new();
    };
    let mut edges = trace_outer_edges(start, |s| set.contains(s));
    let lead = edges.iter().enumerate().min_by_key(|(_, e)| **e).map(|(i, _)| i).unwrap_or(0);
    edges.rotate_left(lead);
    edges
}

/// Endpoints of an oriented edge in the plane, counterclockwise about its hexagon.
pub fn edge_endpoints(e: Edge) -> ((f64, f64), (f64, f64)) {
    let h = Hexagon { center: e.0 };
    let k = e.1 as usize;
    (h.vertex(k + 5), h.vertex(k))
}

fn segment_distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let t = (-(a.0 * dx + a.1 * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
    (a.0 + t * dx).hypot(a.1 + t * dy)
}

/// Inner and outer radii of the outer boundary of a filled region containing the origin.
pub fn boundary_and_radii(n: u32, filled: &SiteRows) -> Result<ShapeSample> {
    if !filled.contains(SiteCoord::ORIGIN) {
        return Err(Error::OriginNotInside);
    }
    let boundary = outer_boundary(filled);
    let mut r_in = f64::INFINITY;
    let mut r_out: f64 = 0.0;
    for &e in &boundary {
        let (a, b) = edge_endpoints(e);
        r_in = r_in.min(segment_distance(a, b));
        r_out = r_out.max(a.0.hypot(a.1)).max(b.0.hypot(b.1));
    }
    Ok(ShapeSample { n, r_in, r_out, site_count: filled.len(), boundary })
}

/// Hull of the `n`-th innermost disjoint yellow circuit with its touching blue clusters.
///
/// A yellow origin hexagon counts as the first circuit.
pub fn circuit_hull(source: &ConfigSource, n: u32, window: &Region) -> Result<SiteRows> {
    if n < 1 {
        return Err(Error::InvalidArgument("circuit index starts at 1".into()));
    }
    let rows = window.resolve();
    if !rows.contains(SiteCoord::ORIGIN) {
        return Err(Error::OriginNotInside);
    }
    let mut hull: Option<SiteRows> = None;
    for k in 1..=n {
        let circuit: Vec<SiteCoord> = match &hull {
            None if source.color_at(SiteCoord::ORIGIN) == Color::Yellow => vec![SiteCoord::ORIGIN],
            _ => {
                let core = hull.clone().unwrap_or_else(|| SiteRows::from_sites(&[SiteCoord::ORIGIN]));
                let shell = core.external_boundary();
                let c = innermost_around(
                    source,
                    &rows,
                    Color::Yellow,
                    &rows,
                    |s| core.contains(s),
                    shell.iter(),
                    core.rightmost().expect("nonempty core"),
                )
                .ok_or(Error::CircuitNotFound(k))?;
                c.sites
            }
        };
        let mut sc = Scratch::around(&rows, 2).expect("nonempty window");
        const BLUE: u8 = 1;
        let starts = circuit.iter().flat_map(|s| s.neighbors());
        let attached = flood(&mut sc, starts, BLUE, |s| rows.contains(s), |_, s| source.color_at(s) == Color::Blue);
        if attached.escaped {
            return Err(Error::WindowOverflow);
        }
        let mut sites = circuit;
        sites.extend(attached.visited);
        let mut union = SiteRows::from_sites(&sites);
        if let Some(h) = &hull {
            union = union.union(h);
        }
        let filled = fill_holes(&union);
        if filled.inner_boundary().iter().any(|s| s.neighbors().iter().any(|w| !rows.contains(*w))) {
            return Err(Error::WindowOverflow);
        }
        hull = Some(filled);
    }
    Ok(hull.expect("n ≥ 1"))
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryMatch {
    /// Outer boundary of the circuit hull.
    pub circuit: Vec<Edge>,
    /// Outer boundary of the filled wet region.
    pub wet: Vec<Edge>,
    pub matched: bool,
}

/// Compare the outer boundary of the `n`-th circuit hull with that of the filled `W(n)`.
pub fn nth_circuit_boundary(source: &ConfigSource, n: u32, window: &Region) -> Result<BoundaryMatch> {
    let hull = circuit_hull(source, n, window)?;
    let (_, filled) = w_set(source, n, window)?;
    let circuit = outer_boundary(&hull);
    let wet = outer_boundary(&filled);
    let matched = circuit == wet;
    Ok(BoundaryMatch { circuit, wet, matched })
}

/// Filled hull of the `m`-th innermost cluster around the origin.
///
/// The first cluster is the origin's own; each next one is the opposite-colored
/// cluster wrapped around the previous hull.
pub fn cluster_hull(source: &ConfigSource, m: u32, window: &Region) -> Result<SiteRows> {
    if m < 1 {
        return Err(Error::InvalidArgument("cluster index starts at 1".into()));
    }
    let rows = window.resolve();
    if !rows.contains(SiteCoord::ORIGIN) {
        return Err(Error::OriginNotInside);
    }
    let mut hull: Option<SiteRows> = None;
    for _ in 0..m {
        let seed = match &hull {
            None => SiteCoord::ORIGIN,
            Some(h) => h.rightmost().expect("nonempty hull").step(0),
        };
        if !rows.contains(seed) {
            return Err(Error::WindowOverflow);
        }
        let color = source.color_at(seed);
        let mut sc = Scratch::around(&rows, 2).expect("nonempty window");
        let cluster = flood(&mut sc, [seed], 1, |s| rows.contains(s), |_, s| source.color_at(s) == color);
        if cluster.escaped {
            return Err(Error::WindowOverflow);
        }
        let mut union = SiteRows::from_sites(&cluster.visited);
        if let Some(h) = &hull {
            union = union.union(h);
        }
        hull = Some(fill_holes(&union));
    }
    Ok(hull.expect("m ≥ 1"))
}

/// Cluster loop with the law of the filled-wet-region boundary at time `n`.
///
/// Switching colors outside each successive circuit turns the hull boundary into a
/// cluster loop: the `n`-th when the origin is yellow, the `(n+1)`-th when it is blue.
pub fn cluster_loop_proxy(source: &ConfigSource, n: u32, window: &Region) -> Result<ShapeSample> {
    let m = if source.color_at(SiteCoord::ORIGIN) == Color::Yellow { n } else { n + 1 };
    boundary_and_radii(n, &cluster_hull(source, m, window)?)
}

/// Filled wet region sample, retrying on doubling windows up to `max_radius`.
pub fn wet_sample(source: &ConfigSource, n: u32, start_radius: f64, max_radius: f64) -> Result<ShapeSample> {
    with_growing_window(start_radius, max_radius, |w| {
        let (_, filled) = w_set(source, n, w)?;
        if filled.is_empty() {
            return Err(Error::OriginNotInside);
        }
        boundary_and_radii(n, &filled)
    })
}

/// Same retry rule as [`wet_sample`] for the cluster-loop proxy.
pub fn proxy_sample(source: &ConfigSource, n: u32, start_radius: f64, max_radius: f64) -> Result<ShapeSample> {
    with_growing_window(start_radius, max_radius, |w| cluster_loop_proxy(source, n, w))
}

/// Boundary identity on doubling windows; `Ok(None)` when the hull never fits.
///
/// A circuit missing from a window may still exist in a larger one, so that case
/// also grows the window.
pub fn identity_check(source: &ConfigSource, n: u32, start_radius: f64, max_radius: f64) -> Result<Option<BoundaryMatch>> {
    match with_growing_window(start_radius, max_radius, |w| nth_circuit_boundary(source, n, w)) {
        Ok(m) => Ok(Some(m)),
        Err(Error::WindowOverflow | Error::CircuitNotFound(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn with_growing_window<T>(start: f64, max: f64, mut f: impl FnMut(&Region) -> Result<T>) -> Result<T> {
    let mut r = start;
    loop {
        match f(&Region::ball(r)) {
            Err(Error::WindowOverflow | Error::CircuitNotFound(_)) if r * 2.0 <= max => r *= 2.0,
            other => return other,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::SQRT3;

    fn yellow() -> ConfigSource {
        ConfigSource::constant(Color::Yellow)
    }

    #[test]
    fn constant_configurations() {
        let w = Region::ball(8.0);
        let (w1, f1) = w_set(&yellow(), 1, &w).unwrap();
        assert_eq!(w1.iter().collect::<Vec<_>>(), vec![SiteCoord::ORIGIN]);
        assert_eq!(f1.len(), 1);
        let (w0, _) = w_set(&yellow(), 0, &w).unwrap();
        assert!(w0.is_empty());
        let blue = ConfigSource::constant(Color::Blue);
        assert!(matches!(w_set(&blue, 1, &w), Err(Error::WindowOverflow)));
        assert!(matches!(nth_circuit_boundary(&blue, 1, &w), Err(Error::CircuitNotFound(1))));
        let m = nth_circuit_boundary(&yellow(), 1, &w).unwrap();
        assert!(m.matched);
        assert_eq!(m.circuit.len(), 6);
    }

    #[test]
    fn single_hexagon_radii() {
        let s = boundary_and_radii(1, &SiteRows::from_sites(&[SiteCoord::ORIGIN])).unwrap();
        assert_eq!(s.boundary.len(), 6);
        assert!((s.r_in - 0.5).abs() < 1e-12);
        assert!((s.r_out - 1.0 / SQRT3).abs() < 1e-12);
    }

    #[test]
    fn ball_radii() {
        let b3 = SiteRows::ball(SiteCoord::ORIGIN, 3.0);
        let s = boundary_and_radii(1, &b3).unwrap();
        assert!(s.r_in >= 2.0 - 1.0 / SQRT3);
        assert!(s.r_in <= s.r_out && s.r_out <= 3.0 + 1e-12);
        assert!(matches!(
            boundary_and_radii(1, &SiteRows::from_sites(&[SiteCoord::new(3, 0)])),
            Err(Error::OriginNotInside)
        ));
    }

    #[test]
    fn holes_are_filled() {
        let ring: Vec<SiteCoord> = SiteCoord::ORIGIN.neighbors().to_vec();
        let filled = fill_holes(&SiteRows::from_sites(&ring));
        assert_eq!(filled.len(), 7);
        assert!(filled.contains(SiteCoord::ORIGIN));
    }

    #[test]
    fn seeded_identity() {
        let mut checked = 0;
        for seed in 0..200 {
            let src = ConfigSource::hashed(seed);
            for n in 1..=2 {
                if let Some(m) = identity_check(&src, n, 16.0, 128.0).unwrap() {
                    assert!(m.matched, "seed {seed} n {n}");
                    checked += 1;
                }
            }
        }
        // most hulls outgrow a radius-128 window
        assert!(checked > 30, "{checked}");
    }
}
