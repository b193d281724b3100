//! Monochromatic circuits around the origin: peeling, counts and color switching.

pub mod exact;
pub mod trace;

use std::collections::{BTreeMap, HashSet};

use serde::Serialize;

use crate::config::{Color, ConfigSource};
use crate::error::{Error, Result};
use crate::lattice::{Region, SiteCoord, SiteRows, SiteSet};

pub use exact::CycleCatalog;
use trace::{extract_loop, flood, flood_until_escape, trace_outer, winding, winding_about, Scratch};

const EXTERIOR: u8 = 1;
const CORE: u8 = 2;
const FILL: u8 = 4;
const INTERIOR: u8 = 8;
const ON_CIRCUIT: u8 = 16;

/// A simple cycle of same-colored sites winding once around the origin.
///
/// Yellow circuits run counterclockwise and blue ones clockwise; the sequence
/// starts at its lexicographically smallest site.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Circuit {
    pub sites: Vec<SiteCoord>,
    pub color: Color,
    pub orientation: i8,
}

impl Circuit {
    fn from_loop(mut sites: Vec<SiteCoord>, color: Color) -> Self {
        let w = winding(&sites);
        debug_assert!(w == 1 || w == -1, "winding {w}");
        let orientation: i8 = if color == Color::Yellow { 1 } else { -1 };
        if w != orientation as i32 {
            sites.reverse();
        }
        let first = sites.iter().enumerate().min_by_key(|(_, s)| **s).map(|(i, _)| i).unwrap_or(0);
        sites.rotate_left(first);
        Self { sites, color, orientation }
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn site_set(&self) -> SiteSet {
        self.sites.iter().copied().collect()
    }

    /// Whether `p` lies strictly inside (off the circuit, winding nonzero).
    pub fn encloses(&self, p: SiteCoord) -> bool {
        !self.sites.contains(&p) && winding_about(&self.sites, p) != 0
    }

    /// Cyclic adjacency, distinct sites, single winding, uniform color under `source`.
    pub fn check(&self, source: &ConfigSource) -> Result<()> {
        let n = self.sites.len();
        let bad = |why: &str| Err(Error::DegenerateInput(format!("circuit invalid: {why}")));
        if n < 3 {
            return bad("fewer than three sites");
        }
        if (0..n).any(|i| !self.sites[i].is_adjacent(self.sites[(i + 1) % n])) {
            return bad("consecutive sites not adjacent");
        }
        if self.site_set().len() != n {
            return bad("repeated site");
        }
        if winding(&self.sites).abs() != 1 {
            return bad("does not wind once around the origin");
        }
        if self.sites.iter().any(|&s| source.color_at(s) != self.color) {
            return bad("mixed colors");
        }
        Ok(())
    }
}

/// Nested circuits from the outside in, with the domains left after each peel.
#[derive(Debug, Clone, Serialize)]
pub struct CircuitDecomposition {
    pub circuits: Vec<Circuit>,
    /// `domains[k]` is the component of the origin left after removing circuit `k`;
    /// `domains[0]` is the starting domain, so there is one more domain than circuit.
    #[serde(skip)]
    pub domains: Vec<SiteRows>,
}

impl CircuitDecomposition {
    pub fn count(&self) -> u32 {
        self.circuits.len() as u32
    }

    /// Nesting, disjointness, containment in `within`, and per-circuit validity.
    pub fn validate(&self, source: &ConfigSource, within: &SiteRows) -> Result<()> {
        let bad = |why: String| Err(Error::DegenerateInput(format!("decomposition invalid: {why}")));
        if self.domains.len() != self.circuits.len() + 1 {
            return bad("domain count mismatch".into());
        }
        for (k, c) in self.circuits.iter().enumerate() {
            c.check(source)?;
            if c.sites.iter().any(|&s| !within.contains(s)) {
                return bad(format!("circuit {k} leaves the annulus"));
            }
            if c.sites.iter().any(|&s| !self.domains[k].contains(s)) {
                return bad(format!("circuit {k} not inside the previous domain"));
            }
            if c.sites.iter().any(|&s| self.domains[k + 1].contains(s)) {
                return bad(format!("circuit {k} meets the next domain"));
            }
            if !self.domains[k + 1].contains(SiteCoord::ORIGIN) {
                return bad(format!("domain {} lost the origin", k + 1));
            }
        }
        Ok(())
    }
}

#[inline]
fn selected(source: &ConfigSource, constraint: &SiteRows, color: Color, v: SiteCoord) -> bool {
    v != SiteCoord::ORIGIN && constraint.contains(v) && source.color_at(v) == color
}

/// Outermost circuit of `color` surrounding the origin with all sites in `domain ∩ constraint`.
///
/// Floods the complement of the colored sites from the domain's edge; the circuit is
/// the shell around the origin's component of what the flood could not reach.
pub fn outermost_circuit(source: &ConfigSource, domain: &SiteRows, color: Color, constraint: &SiteRows) -> Option<Circuit> {
    if !domain.contains(SiteCoord::ORIGIN) {
        return None;
    }
    let mut sc = Scratch::around(domain, 2)?;
    let within = |w: SiteCoord| domain.contains(w);
    flood(&mut sc, domain.inner_boundary().iter(), EXTERIOR, within, |_, w| !selected(source, constraint, color, w));
    if sc.has(SiteCoord::ORIGIN, EXTERIOR) {
        return None;
    }
    let core = flood(&mut sc, [SiteCoord::ORIGIN], CORE, within, |sc, w| !sc.has(w, EXTERIOR));
    let walk = trace_outer(core.rightmost?, |s| sc.has(s, CORE), false);
    debug_assert!(walk.iter().all(|&s| selected(source, constraint, color, s)));
    extract_loop(&walk).map(|l| Circuit::from_loop(l, color))
}

/// Innermost circuit of `color` in `domain ∩ constraint` around a filled core.
///
/// `core` must contain the origin; `core_shell` lists the core's external boundary and
/// `core_rightmost` its `2x + y` maximizer. Returns `None` when the complement of the
/// colored sites connects the core to the domain's edge.
pub fn innermost_around<C: Fn(SiteCoord) -> bool>(
    source: &ConfigSource,
    domain: &SiteRows,
    color: Color,
    constraint: &SiteRows,
    core: C,
    core_shell: impl IntoIterator<Item = SiteCoord>,
    core_rightmost: SiteCoord,
) -> Option<Circuit> {
    let mut sc = Scratch::around(domain, 2)?;
    let f = flood_until_escape(
        &mut sc,
        core_shell,
        FILL,
        |w| domain.contains(w),
        |_, w| !core(w) && !selected(source, constraint, color, w),
    );
    if f.escaped {
        return None;
    }
    let start = match f.rightmost {
        Some(r) if (2 * r.x + r.y, r.x) > (2 * core_rightmost.x + core_rightmost.y, core_rightmost.x) => r,
        _ => core_rightmost,
    };
    let walk = trace_outer(start, |s| core(s) || sc.has(s, FILL), true);
    if walk.iter().any(|&s| !selected(source, constraint, color, s)) {
        // the core itself reaches the domain edge
        return None;
    }
    extract_loop(&walk).map(|l| Circuit::from_loop(l, color))
}

/// Innermost circuit of `color` in `domain ∩ constraint` surrounding every site of `seeds`.
pub fn innermost_circuit(
    source: &ConfigSource,
    domain: &SiteRows,
    color: Color,
    constraint: &SiteRows,
    seeds: &SiteSet,
) -> Option<Circuit> {
    let rows = SiteRows::from_sites(seeds);
    let rightmost = rows.rightmost()?;
    let shell = rows.external_boundary();
    innermost_around(source, domain, color, constraint, |s| rows.contains(s), shell.iter(), rightmost)
}

/// Component of the origin in `domain` minus the circuit.
fn inside_of(domain: &SiteRows, circuit: &Circuit) -> SiteRows {
    let mut sc = Scratch::around(domain, 2).expect("nonempty domain");
    for &s in &circuit.sites {
        sc.mark(s, ON_CIRCUIT);
    }
    let f = flood(&mut sc, [SiteCoord::ORIGIN], INTERIOR, |w| domain.contains(w), |sc, w| !sc.has(w, ON_CIRCUIT));
    SiteRows::from_sites(&f.visited)
}

/// Peel outermost circuits, taking colors from `color_of(k)` for the `k`-th circuit.
pub fn peel(
    source: &ConfigSource,
    domain: SiteRows,
    constraint: &SiteRows,
    color_of: impl Fn(usize) -> Color,
) -> CircuitDecomposition {
    let mut circuits = Vec::new();
    let mut domains = vec![domain];
    loop {
        let d = domains.last().unwrap();
        let Some(c) = outermost_circuit(source, d, color_of(circuits.len()), constraint) else {
            break;
        };
        let next = inside_of(d, &c);
        circuits.push(c);
        domains.push(next);
    }
    CircuitDecomposition { circuits, domains }
}

fn check_annulus(r: f64, big_r: f64) -> Result<()> {
    if r >= 1.0 && r < big_r {
        Ok(())
    } else {
        Err(Error::InvalidAnnulus { r, big_r })
    }
}

fn annulus_rows(r: f64, big_r: f64) -> (SiteRows, SiteRows) {
    let outer = SiteRows::ball(SiteCoord::ORIGIN, big_r);
    let annulus = Region::Annulus { inner: r, outer: big_r }.resolve();
    (outer, annulus)
}

/// Largest number of disjoint yellow circuits around the origin inside `A(r, R)`.
pub fn rho(source: &ConfigSource, r: f64, big_r: f64) -> Result<(u32, CircuitDecomposition)> {
    check_annulus(r, big_r)?;
    let (outer, annulus) = annulus_rows(r, big_r);
    let d = peel(source, outer, &annulus, |_| Color::Yellow);
    debug_assert!(d.validate(source, &annulus).is_ok(), "{:?}", d.validate(source, &annulus));
    Ok((d.count(), d))
}

fn require_blue_boundary(source: &ConfigSource, big_r: f64) -> Result<()> {
    let shell = SiteRows::ball(SiteCoord::ORIGIN, big_r).external_boundary();
    if shell.iter().any(|s| source.color_at(s) != Color::Blue) {
        return Err(Error::MissingBoundaryCondition { big_r });
    }
    Ok(())
}

/// Length of the alternating yellow, blue, yellow, … chain of nested circuits in `A(r, R)`.
/// Needs an all-blue external boundary of `B(R)`.
pub fn loop_count_n(source: &ConfigSource, r: f64, big_r: f64) -> Result<(u32, CircuitDecomposition)> {
    check_annulus(r, big_r)?;
    require_blue_boundary(source, big_r)?;
    let (outer, annulus) = annulus_rows(r, big_r);
    let d = peel(source, outer, &annulus, alternating);
    debug_assert!(d.validate(source, &annulus).is_ok(), "{:?}", d.validate(source, &annulus));
    Ok((d.count(), d))
}

fn alternating(k: usize) -> Color {
    if k % 2 == 0 {
        Color::Yellow
    } else {
        Color::Blue
    }
}

/// Flip colors on `D_1∖D_2, D_3∖D_4, …` (and `D_n` when `n` is odd), restricted to the annulus.
fn switch_layers(source: &ConfigSource, d: &CircuitDecomposition, r: f64, big_r: f64) -> ConfigSource {
    let (outer, annulus) = annulus_rows(r, big_r);
    let support = outer.union(&outer.external_boundary());
    let mut colors: BTreeMap<SiteCoord, Color> = support.iter().map(|s| (s, source.color_at(s))).collect();
    let n = d.circuits.len();
    for i in (1..=n).step_by(2) {
        let layer = if i < n { d.domains[i].difference(&d.domains[i + 1]) } else { d.domains[i].clone() };
        for s in layer.intersection(&annulus).iter() {
            let c = colors.get_mut(&s).expect("layer inside the ball");
            *c = c.flip();
        }
    }
    ConfigSource::stored(colors, Color::Blue)
}

/// The switching map from `{ρ = n}` to `{N = n}`; the result is stored over `B(R) ∪ ΔB(R)`.
pub fn color_switch(source: &ConfigSource, r: f64, big_r: f64) -> Result<ConfigSource> {
    check_annulus(r, big_r)?;
    require_blue_boundary(source, big_r)?;
    let (_, d) = rho(source, r, big_r)?;
    Ok(switch_layers(source, &d, r, big_r))
}

/// Inverse of [`color_switch`]: peel the alternating chain and flip the same layers.
pub fn color_switch_inverse(source: &ConfigSource, r: f64, big_r: f64) -> Result<ConfigSource> {
    let (_, d) = loop_count_n(source, r, big_r)?;
    Ok(switch_layers(source, &d, r, big_r))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SxMode {
    Exact,
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SxResult {
    pub count: u32,
    /// Set when greedy peeling skipped a circuit, so `count` may undershoot.
    pub lower_bound: bool,
}

/// Region cap for exact `S_x`.
pub const SX_EXACT_CAP: usize = 20;

/// Default search annulus for `S_x`: everything from the origin's hexagon out to
/// eight times the touching radius. Widening to 32 times moves `P[S_x ≥ 1]` by
/// about two points.
pub fn sx_region(x: u32) -> (f64, f64) {
    (1.0, 8.0 * (x as f64).exp2())
}

/// Sites whose hexagon shares an edge with the boundary of `B(2^x)`.
pub fn sx_touch_set(x: u32) -> SiteRows {
    let ball = SiteRows::ball(SiteCoord::ORIGIN, (x as f64).exp2());
    ball.inner_boundary().union(&ball.external_boundary())
}

/// Disjoint yellow circuits around the origin meeting the boundary of `B(2^x)`.
pub fn s_x(source: &ConfigSource, x: u32, mode: SxMode) -> Result<SxResult> {
    let (r, big_r) = sx_region(x);
    s_x_in(source, x, r, big_r, mode)
}

/// [`s_x`] with circuits confined to `A(r, R)`.
pub fn s_x_in(source: &ConfigSource, x: u32, r: f64, big_r: f64, mode: SxMode) -> Result<SxResult> {
    check_annulus(r, big_r)?;
    match mode {
        SxMode::Exact => SxExact::new(x, r, big_r)?.eval(source),
        SxMode::Greedy => Ok(s_x_greedy(source, x, r, big_r)),
    }
}

fn s_x_greedy(source: &ConfigSource, x: u32, r: f64, big_r: f64) -> SxResult {
    let touch = sx_touch_set(x);
    let ball = SiteRows::ball(SiteCoord::ORIGIN, (x as f64).exp2());
    let (outer, annulus) = annulus_rows(r, big_r);
    let mut domain = outer;
    let mut out = SxResult { count: 0, lower_bound: false };
    while let Some(c) = outermost_circuit(source, &domain, Color::Yellow, &annulus) {
        if c.sites.iter().any(|&s| touch.contains(s)) {
            out.count += 1;
        } else if ball.contains(c.sites[0]) {
            // strictly inside the touch band; everything further in is too
            break;
        } else {
            out.lower_bound = true;
        }
        domain = inside_of(&domain, &c);
    }
    out
}

/// Precomputed exact `S_x` over a small annulus.
pub struct SxExact {
    catalog: CycleCatalog,
}

impl SxExact {
    pub fn new(x: u32, r: f64, big_r: f64) -> Result<Self> {
        check_annulus(r, big_r)?;
        let region = Region::Annulus { inner: r, outer: big_r }.sites();
        let touch = sx_touch_set(x);
        let catalog = CycleCatalog::new(&region, SX_EXACT_CAP, |_, c| c.iter().any(|&s| touch.contains(s)))?;
        Ok(Self { catalog })
    }

    pub fn eval(&self, source: &ConfigSource) -> Result<SxResult> {
        let yellow = self.catalog.color_mask(source, Color::Yellow);
        Ok(SxResult { count: self.catalog.max_disjoint(yellow), lower_bound: false })
    }
}

/// Largest dyadic level searched. Level 13 spans radius 2^14 and costs about a second.
pub const MAX_DYADIC_LEVEL: u32 = 13;

/// First `k ≥ j` whose dyadic annulus `A(2^k, 2^(k+1))` holds a blue circuit around the
/// origin, with the innermost such circuit.
pub fn m_and_innermost_blue(source: &ConfigSource, j: u32, cap: u32) -> Result<(u32, Circuit)> {
    if cap < 1 {
        return Err(Error::InvalidArgument("cap must be at least 1".into()));
    }
    if j + cap - 1 > MAX_DYADIC_LEVEL {
        return Err(Error::InvalidArgument(format!("dyadic levels above {MAX_DYADIC_LEVEL} exceed the memory budget")));
    }
    for k in j..j + cap {
        if let Some(c) = innermost_blue_in_dyadic(source, k) {
            return Ok((k, c));
        }
    }
    Err(Error::SearchCapExceeded { first: j, last: j + cap - 1 })
}

/// Innermost blue circuit around the origin with sites in `A(2^k, 2^(k+1))`, if any.
pub fn innermost_blue_in_dyadic(source: &ConfigSource, k: u32) -> Option<Circuit> {
    let inner = SiteRows::ball(SiteCoord::ORIGIN, (k as f64).exp2());
    let outer = SiteRows::ball(SiteCoord::ORIGIN, (k as f64 + 1.0).exp2());
    let annulus = outer.difference(&inner);
    let shell = inner.external_boundary();
    innermost_around(
        source,
        &outer,
        Color::Blue,
        &annulus,
        |s| inner.contains(s),
        shell.iter(),
        inner.rightmost()?,
    )
}

/// Sites of a set of circuits, for disjointness checks.
pub fn union_sites(circuits: &[Circuit]) -> HashSet<SiteCoord> {
    circuits.iter().flat_map(|c| c.sites.iter().copied()).collect()
}
