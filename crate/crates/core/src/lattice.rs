//! Triangular lattice sites and their dual hexagons.
//!
//! Sites use axial coordinates: `(x, y)` sits at `x + y·e^{iπ/3}`. Hexagons
//! are oriented with vertices at `30° + k·60°` and circumradius `1/√3`, so
//! each hexagon edge bisects a lattice bond. Vertex `k` of the hexagon at
//! `v` is the centroid of the triangle `v, v+δ_k, v+δ_{k+1}`, which keeps
//! every vertex on the one-third lattice and makes disc containment an
//! integer computation.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

pub type SiteSet = BTreeSet<SiteCoord>;

pub const SQRT3: f64 = 1.732_050_807_568_877_2;
pub const HEX_CIRCUMRADIUS: f64 = 1.0 / SQRT3;
pub const HEX_INRADIUS: f64 = 0.5;

/// Neighbor offsets in counterclockwise order starting at angle 0.
pub const DIRS: [(i32, i32); 6] = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)];

/// Hexagon vertices times three, vertex `k` at angle `30° + 60°·k`.
pub const VERTEX_THIRDS: [(i32, i32); 6] = [(1, 1), (-1, 2), (-2, 1), (-1, -1), (1, -2), (2, -1)];

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
pub struct SiteCoord {
    pub x: i32,
    pub y: i32,
}

impl SiteCoord {
    pub const ORIGIN: SiteCoord = SiteCoord { x: 0, y: 0 };

    #[inline]
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn step(self, dir: usize) -> Self {
        let (dx, dy) = DIRS[dir];
        Self::new(self.x + dx, self.y + dy)
    }

    /// Squared Euclidean norm `x² + xy + y²`, exact.
    #[inline]
    pub fn norm2(self) -> i64 {
        axial_norm2(self.x as i64, self.y as i64)
    }

    #[inline]
    pub fn position(self) -> (f64, f64) {
        position(self)
    }

    pub fn neighbors(self) -> [SiteCoord; 6] {
        neighbors(self)
    }

    #[inline]
    pub fn is_adjacent(self, other: SiteCoord) -> bool {
        let d = (other.x - self.x, other.y - self.y);
        DIRS.contains(&d)
    }
}

impl std::ops::Sub for SiteCoord {
    type Output = SiteCoord;
    fn sub(self, o: SiteCoord) -> SiteCoord {
        SiteCoord::new(self.x - o.x, self.y - o.y)
    }
}

impl std::ops::Add for SiteCoord {
    type Output = SiteCoord;
    fn add(self, o: SiteCoord) -> SiteCoord {
        SiteCoord::new(self.x + o.x, self.y + o.y)
    }
}

#[inline]
pub fn axial_norm2(x: i64, y: i64) -> i64 {
    x * x + x * y + y * y
}

/// Embedded position `(x + y/2, y·√3/2)`.
#[inline]
pub fn position(site: SiteCoord) -> (f64, f64) {
    let (x, y) = (site.x as f64, site.y as f64);
    (x + 0.5 * y, 0.5 * SQRT3 * y)
}

pub fn neighbors(site: SiteCoord) -> [SiteCoord; 6] {
    std::array::from_fn(|k| site.step(k))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hexagon {
    pub center: SiteCoord,
}

impl Hexagon {
    pub fn vertex(&self, k: usize) -> (f64, f64) {
        let (a, b) = VERTEX_THIRDS[k % 6];
        let (cx, cy) = position(self.center);
        let (ax, ay) = (a as f64 / 3.0, b as f64 / 3.0);
        (cx + ax + 0.5 * ay, cy + 0.5 * SQRT3 * ay)
    }

    pub fn vertices(&self) -> [(f64, f64); 6] {
        std::array::from_fn(|k| self.vertex(k))
    }
}

/// Largest `9·|vertex|²` over the hexagon at axial offset `(dx, dy)`.
#[inline]
pub fn hex_max_norm9(dx: i64, dy: i64) -> i64 {
    VERTEX_THIRDS
        .iter()
        .map(|&(a, b)| axial_norm2(3 * dx + a as i64, 3 * dy + b as i64))
        .max()
        .unwrap()
}

/// Whether every vertex of the hexagon at offset `(dx, dy)` lies in the closed disc of radius `r`.
#[inline]
pub fn hex_in_disc(dx: i64, dy: i64, r: f64) -> bool {
    (hex_max_norm9(dx, dy) as f64) <= 9.0 * r * r
}

type Spans = Vec<(i32, i32)>;

fn normalize(mut v: Spans) -> Spans {
    v.retain(|&(a, b)| a <= b);
    v.sort_unstable();
    let mut out: Spans = Vec::with_capacity(v.len());
    for (a, b) in v {
        match out.last_mut() {
            Some(last) if a <= last.1.saturating_add(1) => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

fn intersect(a: &[(i32, i32)], b: &[(i32, i32)]) -> Spans {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let lo = a[i].0.max(b[j].0);
        let hi = a[i].1.min(b[j].1);
        if lo <= hi {
            out.push((lo, hi));
        }
        if a[i].1 < b[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

fn subtract(a: &[(i32, i32)], b: &[(i32, i32)]) -> Spans {
    let mut out = Vec::new();
    for &(mut lo, hi) in a {
        for &(c, d) in b {
            if d < lo || c > hi {
                continue;
            }
            if c > lo {
                out.push((lo, c - 1));
            }
            lo = lo.max(d.saturating_add(1));
            if lo > hi {
                break;
            }
        }
        if lo <= hi {
            out.push((lo, hi));
        }
    }
    out
}

/// A finite site set stored as sorted x-spans per row.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SiteRows {
    y0: i32,
    rows: Vec<Spans>,
}

impl SiteRows {
    fn from_rows(y0: i32, rows: Vec<Spans>) -> Self {
        let mut rows: Vec<Spans> = rows.into_iter().map(normalize).collect();
        let first = rows.iter().position(|r| !r.is_empty());
        let Some(first) = first else {
            return Self::default();
        };
        let last = rows.iter().rposition(|r| !r.is_empty()).unwrap();
        rows.truncate(last + 1);
        rows.drain(..first);
        Self { y0: y0 + first as i32, rows }
    }

    pub fn from_sites<'a>(sites: impl IntoIterator<Item = &'a SiteCoord>) -> Self {
        let sites: Vec<SiteCoord> = sites.into_iter().copied().collect();
        let Some(ymin) = sites.iter().map(|s| s.y).min() else {
            return Self::default();
        };
        let ymax = sites.iter().map(|s| s.y).max().unwrap();
        let mut rows = vec![Vec::new(); (ymax - ymin + 1) as usize];
        for s in sites {
            rows[(s.y - ymin) as usize].push((s.x, s.x));
        }
        Self::from_rows(ymin, rows)
    }

    /// Sites whose hexagon lies in the closed disc of radius `r` about `center`.
    pub fn ball(center: SiteCoord, r: f64) -> Self {
        if !(r >= 0.0) {
            return Self::default();
        }
        let ymax = (2.0 * r / SQRT3).ceil() as i64 + 1;
        let mut rows = Vec::with_capacity((2 * ymax + 1) as usize);
        for dy in -ymax..=ymax {
            let c0 = (-dy).div_euclid(2);
            let best = [c0, c0 + 1].into_iter().find(|&dx| hex_in_disc(dx, dy, r));
            let Some(best) = best else {
                rows.push(Vec::new());
                continue;
            };
            // containment along a row is an interval around the row's closest point
            let reach = r.ceil() as i64 + 2;
            let (mut lo, mut hi) = (best, best + reach);
            while hi - lo > 1 {
                let mid = (lo + hi) / 2;
                if hex_in_disc(mid, dy, r) {
                    lo = mid
                } else {
                    hi = mid
                }
            }
            let right = lo;
            let (mut lo, mut hi) = (best - reach, best);
            while hi - lo > 1 {
                let mid = (lo + hi) / 2;
                if hex_in_disc(mid, dy, r) {
                    hi = mid
                } else {
                    lo = mid
                }
            }
            let left = hi;
            rows.push(vec![(center.x + left as i32, center.x + right as i32)]);
        }
        Self::from_rows(center.y - ymax as i32, rows)
    }

    /// Sites whose center lies in the Euclidean rectangle `[x0, x1] × [y0, y1]`.
    pub fn euclidean_box(min: (f64, f64), max: (f64, f64)) -> Self {
        let h = 0.5 * SQRT3;
        let ylo = (min.1 / h).ceil() as i64;
        let yhi = (max.1 / h).floor() as i64;
        if ylo > yhi {
            return Self::default();
        }
        let rows = (ylo..=yhi)
            .map(|y| {
                let a = (min.0 - 0.5 * y as f64).ceil() as i32;
                let b = (max.0 - 0.5 * y as f64).floor() as i32;
                vec![(a, b)]
            })
            .collect();
        Self::from_rows(ylo as i32, rows)
    }

    #[inline]
    fn row(&self, y: i32) -> &[(i32, i32)] {
        let i = y as i64 - self.y0 as i64;
        if i < 0 || i >= self.rows.len() as i64 {
            &[]
        } else {
            &self.rows[i as usize]
        }
    }

    #[inline]
    pub fn contains(&self, s: SiteCoord) -> bool {
        self.row(s.y).iter().any(|&(a, b)| a <= s.x && s.x <= b)
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rows
            .iter()
            .flatten()
            .map(|&(a, b)| (b - a + 1) as usize)
            .sum()
    }

    /// `(xmin, xmax, ymin, ymax)`, or `None` when empty.
    pub fn bounds(&self) -> Option<(i32, i32, i32, i32)> {
        if self.rows.is_empty() {
            return None;
        }
        let xmin = self.rows.iter().filter_map(|r| r.first()).map(|s| s.0).min()?;
        let xmax = self.rows.iter().filter_map(|r| r.last()).map(|s| s.1).max()?;
        Some((xmin, xmax, self.y0, self.y0 + self.rows.len() as i32 - 1))
    }

    /// Site maximizing `2x + y` (then `x`); its `+x` neighbor lies outside the set.
    pub fn rightmost(&self) -> Option<SiteCoord> {
        self.rows
            .iter()
            .enumerate()
            .filter_map(|(i, spans)| spans.last().map(|&(_, b)| SiteCoord::new(b, self.y0 + i as i32)))
            .max_by_key(|s| (2 * s.x as i64 + s.y as i64, s.x))
    }

    /// Row-major iteration.
    pub fn iter(&self) -> impl Iterator<Item = SiteCoord> + '_ {
        self.rows.iter().enumerate().flat_map(move |(i, spans)| {
            let y = self.y0 + i as i32;
            spans
                .iter()
                .flat_map(move |&(a, b)| (a..=b).map(move |x| SiteCoord::new(x, y)))
        })
    }

    pub fn to_set(&self) -> SiteSet {
        self.iter().collect()
    }

    fn zip_rows(&self, other: &Self, f: impl Fn(&[(i32, i32)], &[(i32, i32)]) -> Spans) -> Self {
        let (Some(a), Some(b)) = (self.bounds(), other.bounds()) else {
            let (lo, hi) = match (self.bounds(), other.bounds()) {
                (Some(a), None) => (a.2, a.3),
                (None, Some(b)) => (b.2, b.3),
                _ => return Self::default(),
            };
            let rows = (lo..=hi).map(|y| f(self.row(y), other.row(y))).collect();
            return Self::from_rows(lo, rows);
        };
        let lo = a.2.min(b.2);
        let hi = a.3.max(b.3);
        let rows = (lo..=hi).map(|y| f(self.row(y), other.row(y))).collect();
        Self::from_rows(lo, rows)
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.zip_rows(other, subtract)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        self.zip_rows(other, intersect)
    }

    pub fn union(&self, other: &Self) -> Self {
        self.zip_rows(other, |a, b| {
            let mut v = a.to_vec();
            v.extend_from_slice(b);
            normalize(v)
        })
    }

    /// Sites outside the set adjacent to at least one site in it.
    pub fn external_boundary(&self) -> Self {
        let Some((_, _, ymin, ymax)) = self.bounds() else {
            return Self::default();
        };
        let rows = (ymin - 1..=ymax + 1)
            .map(|y| {
                let mut near: Spans = Vec::new();
                near.extend(self.row(y).iter().map(|&(a, b)| (a - 1, b + 1)));
                // (x, y-1) and (x+1, y-1) are neighbors of (x, y)
                near.extend(self.row(y - 1).iter().map(|&(a, b)| (a - 1, b)));
                // (x, y+1) and (x-1, y+1) are neighbors of (x, y)
                near.extend(self.row(y + 1).iter().map(|&(a, b)| (a, b + 1)));
                subtract(&normalize(near), self.row(y))
            })
            .collect();
        Self::from_rows(ymin - 1, rows)
    }

    /// Sites of the set with at least one neighbor outside it.
    pub fn inner_boundary(&self) -> Self {
        let Some((_, _, ymin, ymax)) = self.bounds() else {
            return Self::default();
        };
        let rows = (ymin..=ymax)
            .map(|y| {
                let row = self.row(y);
                let own: Spans = row.iter().map(|&(a, b)| (a + 1, b - 1)).collect();
                let below: Spans = self.row(y - 1).iter().map(|&(a, b)| (a, b - 1)).collect();
                let above: Spans = self.row(y + 1).iter().map(|&(a, b)| (a + 1, b)).collect();
                let interior = intersect(&intersect(&normalize(own), &normalize(below)), &normalize(above));
                subtract(row, &interior)
            })
            .collect();
        Self::from_rows(ymin, rows)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Region {
    Ball { center: SiteCoord, radius: f64 },
    Annulus { inner: f64, outer: f64 },
    HalfplaneWindow { n: f64, window_factor: f64 },
    /// Euclidean rectangle on site centers.
    Box { min: (f64, f64), max: (f64, f64) },
}

impl Region {
    pub fn ball(radius: f64) -> Self {
        Region::Ball { center: SiteCoord::ORIGIN, radius }
    }

    pub fn resolve(&self) -> SiteRows {
        match *self {
            Region::Ball { center, radius } => SiteRows::ball(center, radius),
            Region::Annulus { inner, outer } => SiteRows::ball(SiteCoord::ORIGIN, outer)
                .difference(&SiteRows::ball(SiteCoord::ORIGIN, inner)),
            Region::HalfplaneWindow { n, window_factor } => {
                let (min, max) = halfplane_window_box(n, window_factor);
                SiteRows::euclidean_box(min, max)
            }
            Region::Box { min, max } => SiteRows::euclidean_box(min, max),
        }
    }

    pub fn sites(&self) -> SiteSet {
        self.resolve().to_set()
    }
}

/// Euclidean window used for the halfplane passage time.
pub fn halfplane_window_box(n: f64, window_factor: f64) -> ((f64, f64), (f64, f64)) {
    let f = window_factor;
    ((-f * n, -f * n), ((1.0 + f) * n, f * n))
}

/// `B(center, r)` in lexicographic order.
pub fn ball_sites(center: SiteCoord, r: f64) -> SiteSet {
    SiteRows::ball(center, r).to_set()
}

/// External site boundary of an arbitrary finite site set.
pub fn external_boundary(region: &SiteSet) -> SiteSet {
    let mut out = SiteSet::new();
    for s in region {
        for w in s.neighbors() {
            if !region.contains(&w) {
                out.insert(w);
            }
        }
    }
    out
}

pub fn region_external_boundary(region: &Region) -> SiteSet {
    region.resolve().external_boundary().to_set()
}

/// Sites of `region` with a neighbor outside it.
pub fn inner_boundary(region: &SiteSet) -> SiteSet {
    let lookup: HashSet<SiteCoord> = region.iter().copied().collect();
    region
        .iter()
        .copied()
        .filter(|s| s.neighbors().iter().any(|w| !lookup.contains(w)))
        .collect()
}

/// Site nearest to a point; ties go to the lexicographically smallest `(x, y)`.
pub fn nearest_site(point: (f64, f64)) -> SiteCoord {
    let h = 0.5 * SQRT3;
    let yc = (point.1 / h).floor() as i32;
    let mut best: Option<(f64, SiteCoord)> = None;
    for y in yc - 1..=yc + 2 {
        let xc = (point.0 - 0.5 * y as f64).floor() as i32;
        for x in xc - 1..=xc + 2 {
            let s = SiteCoord::new(x, y);
            let (px, py) = position(s);
            let d = (px - point.0).powi(2) + (py - point.1).powi(2);
            let better = match best {
                None => true,
                Some((bd, bs)) => {
                    let tol = 1e-12 * (1.0 + bd);
                    d < bd - tol || ((d - bd).abs() <= tol && s < bs)
                }
            };
            if better {
                best = Some((d, s));
            }
        }
    }
    best.unwrap().1
}
