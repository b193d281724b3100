//! Boundary tracing and loop extraction on hexagon unions.

use std::collections::HashMap;

use crate::grid::TiledGrid;
use crate::lattice::{SiteCoord, SiteRows};

/// Signed winding of the closed site polygon `cycle` about the site `p`.
///
/// Counts crossings of the horizontal ray from `p` toward `+x`; exact in integers
/// because adjacent sites differ by at most one row.
pub fn winding_about(cycle: &[SiteCoord], p: SiteCoord) -> i32 {
    let mut w = 0;
    let n = cycle.len();
    for i in 0..n {
        let a = cycle[i] - p;
        let b = cycle[(i + 1) % n] - p;
        if a.y <= 0 && b.y > 0 {
            // a.y == 0 and the crossing point is a itself
            if 2 * a.x + a.y > 0 {
                w += 1;
            }
        } else if b.y <= 0 && a.y > 0 && 2 * b.x + b.y > 0 {
            w -= 1;
        }
    }
    w
}

pub fn winding(cycle: &[SiteCoord]) -> i32 {
    winding_about(cycle, SiteCoord::ORIGIN)
}

/// Walk the outer boundary of the connected hexagon union `inside`, counterclockwise.
///
/// `start` must maximize `2x + y` over the union so that its `+x` edge is exterior.
/// Returns the sites met on the inner side (or the outer side) of each edge, with
/// consecutive repeats collapsed.
pub fn trace_outer<F: Fn(SiteCoord) -> bool>(start: SiteCoord, inside: F, outer_side: bool) -> Vec<SiteCoord> {
    debug_assert!(inside(start) && !inside(start.step(0)));
    let mut walk: Vec<SiteCoord> = Vec::new();
    let (mut v, mut k) = (start, 0usize);
    loop {
        let s = if outer_side { v.step(k) } else { v };
        if walk.last() != Some(&s) {
            walk.push(s);
        }
        let next = v.step((k + 1) % 6);
        if inside(next) {
            v = next;
            k = (k + 5) % 6;
        } else {
            k = (k + 1) % 6;
        }
        if v == start && k == 0 {
            break;
        }
    }
    if walk.len() > 1 && walk.first() == walk.last() {
        walk.pop();
    }
    walk
}

/// Oriented hexagon edges `(site, dir)` of the outer boundary, same walk as [`trace_outer`].
pub fn trace_outer_edges<F: Fn(SiteCoord) -> bool>(start: SiteCoord, inside: F) -> Vec<(SiteCoord, u8)> {
    let mut edges = Vec::new();
    let (mut v, mut k) = (start, 0usize);
    loop {
        edges.push((v, k as u8));
        let next = v.step((k + 1) % 6);
        if inside(next) {
            v = next;
            k = (k + 5) % 6;
        } else {
            k = (k + 1) % 6;
        }
        if v == start && k == 0 {
            break;
        }
    }
    edges
}

/// Erase sub-loops of a closed walk that do not wind around the origin and
/// return the first simple loop that does.
pub fn extract_loop(walk: &[SiteCoord]) -> Option<Vec<SiteCoord>> {
    if walk.is_empty() {
        return None;
    }
    let mut stack: Vec<SiteCoord> = Vec::with_capacity(walk.len());
    let mut pos: HashMap<SiteCoord, usize> = HashMap::with_capacity(walk.len());
    for &s in walk.iter().chain(std::iter::once(&walk[0])) {
        if let Some(&i) = pos.get(&s) {
            let sub = &stack[i..];
            if winding(sub) != 0 {
                return Some(sub.to_vec());
            }
            for t in stack.drain(i + 1..) {
                pos.remove(&t);
            }
        } else {
            pos.insert(s, stack.len());
            stack.push(s);
        }
    }
    None
}

/// Flood scratch over a bounded rectangle.
pub struct Scratch {
    pub grid: TiledGrid<u8>,
}

impl Scratch {
    pub fn around(rows: &SiteRows, margin: i32) -> Option<Self> {
        let (xmin, xmax, ymin, ymax) = rows.bounds()?;
        Some(Self { grid: TiledGrid::new(xmin - margin, xmax + margin, ymin - margin, ymax + margin, 0) })
    }

    #[inline]
    pub fn has(&self, s: SiteCoord, bit: u8) -> bool {
        self.grid.get(s) & bit != 0
    }

    #[inline]
    pub fn mark(&mut self, s: SiteCoord, bit: u8) {
        *self.grid.get_mut(s) |= bit;
    }
}

/// Outcome of a flood fill.
pub struct Flood {
    pub visited: Vec<SiteCoord>,
    /// Site maximizing `2x + y`, a valid [`trace_outer`] start.
    pub rightmost: Option<SiteCoord>,
    /// Some visited site has a neighbor failing `within`.
    pub escaped: bool,
}

/// Mark `bit` on every site reachable from `starts` through sites satisfying `passable`.
/// Neighbors failing `within` are never entered and set `escaped`.
pub fn flood<W, P>(scratch: &mut Scratch, starts: impl IntoIterator<Item = SiteCoord>, bit: u8, within: W, passable: P) -> Flood
where
    W: Fn(SiteCoord) -> bool,
    P: Fn(&Scratch, SiteCoord) -> bool,
{
    flood_impl(scratch, starts, bit, within, passable, false)
}

/// [`flood`] that stops at the first escape; `visited` is then partial.
pub fn flood_until_escape<W, P>(scratch: &mut Scratch, starts: impl IntoIterator<Item = SiteCoord>, bit: u8, within: W, passable: P) -> Flood
where
    W: Fn(SiteCoord) -> bool,
    P: Fn(&Scratch, SiteCoord) -> bool,
{
    flood_impl(scratch, starts, bit, within, passable, true)
}

fn flood_impl<W, P>(
    scratch: &mut Scratch,
    starts: impl IntoIterator<Item = SiteCoord>,
    bit: u8,
    within: W,
    passable: P,
    stop_on_escape: bool,
) -> Flood
where
    W: Fn(SiteCoord) -> bool,
    P: Fn(&Scratch, SiteCoord) -> bool,
{
    let mut stack: Vec<SiteCoord> = Vec::new();
    let mut visited = Vec::new();
    for s in starts {
        if within(s) && !scratch.has(s, bit) && passable(scratch, s) {
            scratch.mark(s, bit);
            stack.push(s);
        }
    }
    let mut escaped = false;
    let mut rightmost: Option<SiteCoord> = None;
    while let Some(v) = stack.pop() {
        visited.push(v);
        if rightmost.map_or(true, |r| (2 * v.x + v.y, v.x) > (2 * r.x + r.y, r.x)) {
            rightmost = Some(v);
        }
        for w in v.neighbors() {
            if !within(w) {
                escaped = true;
                if stop_on_escape {
                    return Flood { visited, rightmost, escaped };
                }
                continue;
            }
            if !scratch.has(w, bit) && passable(scratch, w) {
                scratch.mark(w, bit);
                stack.push(w);
            }
        }
    }
    Flood { visited, rightmost, escaped }
}
