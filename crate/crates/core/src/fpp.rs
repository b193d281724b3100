//! Passage times by 0-1 breadth-first search over site weights.

use std::collections::VecDeque;

use serde::Serialize;

use crate::config::ConfigSource;
use crate::error::{Error, Result};
use crate::grid::TiledGrid;
use crate::lattice::{hex_max_norm9, nearest_site, Region, SiteCoord, SiteRows, SiteSet, DIRS};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PassageResult {
    pub time: u32,
    pub geodesic: Option<Vec<SiteCoord>>,
    pub explored: usize,
    /// The window edge was reached at a label below `time`; the true
    /// unrestricted time may be smaller.
    pub window_hit: bool,
}

const UNSEEN: u16 = u16::MAX;
const NO_PARENT: u8 = 0xFE;
const SOURCE: u8 = 0xFF;
const UNKNOWN: u8 = 0xFF;

#[derive(Clone, Copy)]
struct Cell {
    dist: u16,
    parent: u8,
    weight: u8,
}

const EMPTY: Cell = Cell { dist: UNSEEN, parent: NO_PARENT, weight: UNKNOWN };

/// Multi-source 0-1 BFS confined to a window. Sites pop in nondecreasing label order.
pub struct ZeroOneSearch<'a> {
    source: &'a ConfigSource,
    window: &'a SiteRows,
    grid: TiledGrid<Cell>,
    deque: VecDeque<(SiteCoord, u16)>,
    explored: usize,
    /// Smallest label among expanded sites with a neighbor outside the window.
    edge_label: Option<u32>,
}

impl<'a> ZeroOneSearch<'a> {
    pub fn new(source: &'a ConfigSource, window: &'a SiteRows) -> Result<Self> {
        let (xmin, xmax, ymin, ymax) = window.bounds().ok_or(Error::TargetUnreachable)?;
        Ok(Self {
            source,
            window,
            grid: TiledGrid::new(xmin, xmax, ymin, ymax, EMPTY),
            deque: VecDeque::new(),
            explored: 0,
            edge_label: None,
        })
    }

    #[inline]
    fn weight(&mut self, s: SiteCoord) -> u8 {
        let source = self.source;
        let cell = self.grid.get_mut(s);
        if cell.weight == UNKNOWN {
            cell.weight = source.weight(s) as u8;
        }
        cell.weight
    }

    /// Start a path at `s`; its label is its own weight.
    pub fn add_source(&mut self, s: SiteCoord) -> Result<()> {
        if !self.window.contains(s) {
            return Err(Error::InvalidArgument(format!("source {s:?} outside the window")));
        }
        let w = self.weight(s) as u16;
        let cell = self.grid.get_mut(s);
        if w < cell.dist {
            cell.dist = w;
            cell.parent = SOURCE;
            if w == 0 {
                self.deque.push_front((s, 0));
            } else {
                self.deque.push_back((s, w));
            }
        }
        Ok(())
    }

    /// Pop sites in label order until `stop` returns true; returns that site and label.
    pub fn run<F: FnMut(SiteCoord, u32) -> bool>(&mut self, mut stop: F) -> Result<Option<(SiteCoord, u32)>> {
        while let Some((v, d)) = self.deque.pop_front() {
            if d > self.grid.get(v).dist {
                continue;
            }
            self.explored += 1;
            if stop(v, d as u32) {
                return Ok(Some((v, d as u32)));
            }
            for (k, &(dx, dy)) in DIRS.iter().enumerate() {
                let w = SiteCoord::new(v.x + dx, v.y + dy);
                if !self.window.contains(w) {
                    self.edge_label.get_or_insert(d as u32);
                    continue;
                }
                let t = self.weight(w) as u16;
                let nd = d + t;
                if nd == UNSEEN {
                    return Err(Error::DegenerateInput("passage time exceeds label range".into()));
                }
                let cell = self.grid.get_mut(w);
                if nd < cell.dist {
                    cell.dist = nd;
                    cell.parent = k as u8;
                    if t == 0 {
                        self.deque.push_front((w, nd));
                    } else {
                        self.deque.push_back((w, nd));
                    }
                }
            }
        }
        Ok(None)
    }

    /// Final label of `s` once it has been popped; otherwise an upper bound or `None`.
    pub fn label(&self, s: SiteCoord) -> Option<u32> {
        let d = self.grid.get(s).dist;
        (d != UNSEEN).then_some(d as u32)
    }

    /// Site sequence from a source to `s` along parent links.
    pub fn path_to(&self, s: SiteCoord) -> Vec<SiteCoord> {
        let mut path = vec![s];
        let mut cur = s;
        loop {
            let p = self.grid.get(cur).parent;
            if p == SOURCE || p == NO_PARENT {
                break;
            }
            let (dx, dy) = DIRS[p as usize];
            cur = SiteCoord::new(cur.x - dx, cur.y - dy);
            path.push(cur);
        }
        path.reverse();
        path
    }

    pub fn explored(&self) -> usize {
        self.explored
    }

    /// Some expanded site touched the window edge.
    pub fn window_hit(&self) -> bool {
        self.edge_label.is_some()
    }

    /// The window edge was reached below label `time`, so a path leaving the
    /// window might have been cheaper than `time`.
    pub fn window_hit_below(&self, time: u32) -> bool {
        self.edge_label.is_some_and(|l| l < time)
    }
}

fn search_to<I, F>(source: &ConfigSource, window: &SiteRows, from: I, is_target: F, want_path: bool) -> Result<PassageResult>
where
    I: IntoIterator<Item = SiteCoord>,
    F: Fn(SiteCoord) -> bool,
{
    let mut search = ZeroOneSearch::new(source, window)?;
    for s in from {
        search.add_source(s)?;
    }
    let (hit, time) = search.run(|v, _| is_target(v))?.ok_or(Error::TargetUnreachable)?;
    Ok(PassageResult {
        time,
        geodesic: want_path.then(|| search.path_to(hit)),
        explored: search.explored(),
        window_hit: search.window_hit_below(time),
    })
}

/// Least site-weight sum over window paths from `from` to `to`, both endpoints counted.
pub fn passage_time(
    source: &ConfigSource,
    from: &SiteSet,
    to: &SiteSet,
    window: &Region,
    want_path: bool,
) -> Result<PassageResult> {
    if from.is_empty() || to.is_empty() {
        return Err(Error::InvalidArgument("empty source or target set".into()));
    }
    let rows = window.resolve();
    if !to.iter().any(|&s| rows.contains(s)) {
        return Err(Error::TargetUnreachable);
    }
    search_to(source, &rows, from.iter().copied(), |v| to.contains(&v), want_path)
}

/// Passage time from the origin to the external boundary of `B(n)`.
pub fn c_n(source: &ConfigSource, n: u32) -> Result<PassageResult> {
    c_n_with_path(source, n, false)
}

pub fn c_n_with_path(source: &ConfigSource, n: u32, want_path: bool) -> Result<PassageResult> {
    if n < 1 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let window = SiteRows::ball(SiteCoord::ORIGIN, n as f64 + 2.0);
    let target = SiteRows::ball(SiteCoord::ORIGIN, n as f64).external_boundary();
    search_to(source, &window, [SiteCoord::ORIGIN], |v| target.contains(v), want_path)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CnScan {
    /// `values[n - 1]` is `c_n`.
    pub values: Vec<u32>,
    pub explored: usize,
}

impl CnScan {
    pub fn get(&self, n: u32) -> u32 {
        self.values[n as usize - 1]
    }
}

/// `c_1, …, c_nmax` from a single search; each equals [`c_n`] on the same coloring.
pub fn c_n_scan(source: &ConfigSource, nmax: u32) -> Result<CnScan> {
    if nmax < 1 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    // any path to the first site outside B(n) stays inside B(n + 2)
    let window = SiteRows::ball(SiteCoord::ORIGIN, nmax as f64 + 2.0);
    let mut search = ZeroOneSearch::new(source, &window)?;
    search.add_source(SiteCoord::ORIGIN)?;
    let mut values = Vec::with_capacity(nmax as usize);
    search.run(|v, d| {
        let reach9 = hex_max_norm9(v.x as i64, v.y as i64);
        // v lies outside B(n) iff 9n² < reach9
        while values.len() < nmax as usize {
            let n = values.len() as i64 + 1;
            if 9 * n * n < reach9 {
                values.push(d);
            } else {
                break;
            }
        }
        values.len() == nmax as usize
    })?;
    if values.len() < nmax as usize {
        return Err(Error::TargetUnreachable);
    }
    Ok(CnScan { values, explored: search.explored() })
}

/// Window scale for the infinite-lattice searches. Smaller windows change a
/// few percent of the reported times at criticality, whatever `n` is.
pub const DEFAULT_WINDOW_FACTOR: f64 = 24.0;

/// Passage time from the origin to the halfplane `Re(v) ≥ n` inside a bounding box.
pub fn b0n(source: &ConfigSource, n: u32, window_factor: f64) -> Result<PassageResult> {
    b0n_with_path(source, n, window_factor, false)
}

pub fn b0n_with_path(source: &ConfigSource, n: u32, window_factor: f64, want_path: bool) -> Result<PassageResult> {
    if n < 1 || !(window_factor > 0.0) {
        return Err(Error::InvalidArgument("need n ≥ 1 and a positive window factor".into()));
    }
    let window = Region::HalfplaneWindow { n: n as f64, window_factor }.resolve();
    let two_n = 2 * n as i64;
    search_to(source, &window, [SiteCoord::ORIGIN], |v| 2 * v.x as i64 + v.y as i64 >= two_n, want_path)
}

/// Passage time from the origin to the site nearest `n·u`, within `B(DEFAULT_WINDOW_FACTOR · n)`.
pub fn t0nu(source: &ConfigSource, n: u32, u: (f64, f64)) -> Result<PassageResult> {
    t0nu_in(source, n, u, DEFAULT_WINDOW_FACTOR)
}

/// [`t0nu`] inside `B(window_factor · n)`.
pub fn t0nu_in(source: &ConfigSource, n: u32, u: (f64, f64), window_factor: f64) -> Result<PassageResult> {
    if n < 1 || !(window_factor > 1.0) {
        return Err(Error::InvalidArgument("need n ≥ 1 and a window factor above 1".into()));
    }
    let norm = (u.0 * u.0 + u.1 * u.1).sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("direction has modulus {norm}, expected 1")));
    }
    let target = nearest_site((n as f64 * u.0, n as f64 * u.1));
    let window = SiteRows::ball(SiteCoord::ORIGIN, window_factor * n as f64);
    search_to(source, &window, [SiteCoord::ORIGIN], |v| v == target, false)
}

/// Precomputed sets for the annulus crossing time `T′(r, R)`.
#[derive(Debug, Clone)]
pub struct AnnulusGeometry {
    pub r: f64,
    pub big_r: f64,
    /// `A(r, R)`.
    pub annulus: SiteRows,
    /// Sites of `ΔB(r)` inside the annulus.
    pub sources: Vec<SiteCoord>,
    /// Sites of `B(R)` adjacent to its complement, inside the annulus.
    pub targets: SiteRows,
}

impl AnnulusGeometry {
    pub fn new(r: f64, big_r: f64) -> Result<Self> {
        if !(r >= 1.0 && r < big_r) {
            return Err(Error::InvalidAnnulus { r, big_r });
        }
        let inner = SiteRows::ball(SiteCoord::ORIGIN, r);
        let outer = SiteRows::ball(SiteCoord::ORIGIN, big_r);
        let annulus = outer.difference(&inner);
        let sources = inner.external_boundary().intersection(&annulus).iter().collect();
        let targets = outer.inner_boundary().intersection(&annulus);
        Ok(Self { r, big_r, annulus, sources, targets })
    }

    pub fn passage(&self, source: &ConfigSource, want_path: bool) -> Result<PassageResult> {
        if self.sources.is_empty() || self.targets.is_empty() {
            return Err(Error::TargetUnreachable);
        }
        search_to(source, &self.annulus, self.sources.iter().copied(), |v| self.targets.contains(v), want_path)
    }
}

/// Least passage time across `A(r, R)`.
pub fn t_prime(source: &ConfigSource, r: f64, big_r: f64) -> Result<PassageResult> {
    AnnulusGeometry::new(r, big_r)?.passage(source, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Color;
    use crate::lattice::{ball_sites, region_external_boundary};

    fn yellow() -> ConfigSource {
        ConfigSource::constant(Color::Yellow)
    }

    fn blue() -> ConfigSource {
        ConfigSource::constant(Color::Blue)
    }

    #[test]
    fn generic_passage_examples() {
        let from: SiteSet = [SiteCoord::ORIGIN].into_iter().collect();
        let to = region_external_boundary(&Region::ball(3.0));
        let w = Region::ball(6.0);
        assert_eq!(passage_time(&blue(), &from, &to, &w, false).unwrap().time, 0);
        let r = passage_time(&yellow(), &from, &to, &w, true).unwrap();
        assert_eq!(r.time, 4);
        assert_eq!(r.geodesic.unwrap().len(), 4);
        assert_eq!(passage_time(&yellow(), &from, &from, &w, false).unwrap().time, 1);
        let far: SiteSet = [SiteCoord::new(50, 0)].into_iter().collect();
        assert_eq!(passage_time(&yellow(), &from, &far, &w, false), Err(Error::TargetUnreachable));
    }

    #[test]
    fn c_n_examples() {
        assert_eq!(c_n(&blue(), 100).unwrap().time, 0);
        assert_eq!(c_n(&yellow(), 3).unwrap().time, 4);
        let scan = c_n_scan(&yellow(), 20).unwrap();
        for n in 1..=20 {
            assert_eq!(scan.get(n), c_n(&yellow(), n).unwrap().time, "n = {n}");
        }
    }

    #[test]
    fn scan_matches_single_queries_on_random_colorings() {
        for seed in 0..20 {
            let src = ConfigSource::hashed(seed);
            let scan = c_n_scan(&src, 40).unwrap();
            for n in [1, 2, 3, 7, 16, 25, 40] {
                assert_eq!(scan.get(n), c_n(&src, n).unwrap().time);
            }
            assert!(scan.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn b0n_and_t0nu_examples() {
        assert_eq!(b0n(&blue(), 50, 3.0).unwrap().time, 0);
        assert_eq!(b0n(&yellow(), 3, 3.0).unwrap().time, 4);
        assert_eq!(t0nu(&blue(), 9, (0.0, 1.0)).unwrap().time, 0);
        assert_eq!(t0nu(&yellow(), 3, (1.0, 0.0)).unwrap().time, 4);
        assert!(t0nu(&yellow(), 3, (2.0, 0.0)).is_err());
    }

    #[test]
    fn t_prime_examples() {
        assert_eq!(t_prime(&blue(), 1.0, 3.0).unwrap().time, 0);
        let g = AnnulusGeometry::new(1.0, 3.0).unwrap();
        let r = g.passage(&yellow(), true).unwrap();
        assert_eq!(r.time, 2);
        let path = r.geodesic.unwrap();
        assert_eq!(path.len(), 2);
        assert_eq!(path[0].norm2(), 1);
        assert_eq!(path[1].norm2(), 3);
        assert!(matches!(t_prime(&blue(), 3.0, 3.0), Err(Error::InvalidAnnulus { .. })));
    }

    #[test]
    fn geodesic_weight_matches_time() {
        for seed in 0..30 {
            let src = ConfigSource::hashed(seed);
            let r = c_n_with_path(&src, 24, true).unwrap();
            let path = r.geodesic.unwrap();
            assert_eq!(path.iter().map(|&s| src.weight(s)).sum::<u32>(), r.time);
            assert_eq!(path[0], SiteCoord::ORIGIN);
            assert!(path.windows(2).all(|w| w[0].is_adjacent(w[1])));
            let ball = ball_sites(SiteCoord::ORIGIN, 24.0);
            assert!(!ball.contains(path.last().unwrap()));
            let distinct: SiteSet = path.iter().copied().collect();
            assert_eq!(distinct.len(), path.len());
        }
    }
}
