//! Site colorings: hashed Bernoulli(1/2), constant, stored, with override layers.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{SiteCoord, SiteRows, SiteSet};
use crate::mix::{site_bits, site_key};

/// Largest region [`enumerate_region`] will expand.
pub const ENUMERATION_CAP: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Color {
    Blue,
    Yellow,
}

impl Color {
    /// Passage weight of the site: 0 for Blue, 1 for Yellow.
    #[inline]
    pub fn weight(self) -> u32 {
        match self {
            Color::Blue => 0,
            Color::Yellow => 1,
        }
    }

    #[inline]
    pub fn flip(self) -> Color {
        match self {
            Color::Blue => Color::Yellow,
            Color::Yellow => Color::Blue,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Color::Blue => "blue",
            Color::Yellow => "yellow",
        }
    }

    pub fn parse(s: &str) -> Option<Color> {
        match s.to_ascii_lowercase().as_str() {
            "blue" | "b" | "0" => Some(Color::Blue),
            "yellow" | "y" | "1" => Some(Color::Yellow),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub enum Base {
    Hashed { seed: u64, key: u64 },
    Constant(Color),
    /// Explicit colors; sites missing from the map read `fill`.
    Stored { colors: Arc<BTreeMap<SiteCoord, Color>>, fill: Color },
}

#[derive(Debug, Clone)]
enum Layer {
    Uniform { sites: Arc<SiteRows>, color: Color },
    /// Yellow iff bit `index[site]` of `bits` is set.
    Pattern { index: Arc<HashMap<SiteCoord, u32>>, bits: u64 },
}

impl Layer {
    #[inline]
    fn color_at(&self, site: SiteCoord) -> Option<Color> {
        match self {
            Layer::Uniform { sites, color } => sites.contains(site).then_some(*color),
            Layer::Pattern { index, bits } => index.get(&site).map(|&i| {
                if (bits >> i) & 1 == 1 {
                    Color::Yellow
                } else {
                    Color::Blue
                }
            }),
        }
    }
}

/// An immutable coloring of the whole lattice.
#[derive(Debug, Clone)]
pub struct ConfigSource {
    base: Base,
    layers: Vec<Layer>,
}

impl ConfigSource {
    pub fn hashed(seed: u64) -> Self {
        Self { base: Base::Hashed { seed, key: site_key(seed) }, layers: Vec::new() }
    }

    pub fn constant(color: Color) -> Self {
        Self { base: Base::Constant(color), layers: Vec::new() }
    }

    pub fn stored(colors: BTreeMap<SiteCoord, Color>, fill: Color) -> Self {
        Self { base: Base::Stored { colors: Arc::new(colors), fill }, layers: Vec::new() }
    }

    pub fn base(&self) -> &Base {
        &self.base
    }

    pub fn seed(&self) -> Option<u64> {
        match self.base {
            Base::Hashed { seed, .. } => Some(seed),
            _ => None,
        }
    }

    #[inline]
    pub fn color_at(&self, site: SiteCoord) -> Color {
        for layer in self.layers.iter().rev() {
            if let Some(c) = layer.color_at(site) {
                return c;
            }
        }
        match &self.base {
            Base::Hashed { key, .. } => {
                if site_bits(*key, site.x, site.y) >> 63 == 1 {
                    Color::Yellow
                } else {
                    Color::Blue
                }
            }
            Base::Constant(c) => *c,
            Base::Stored { colors, fill } => colors.get(&site).copied().unwrap_or(*fill),
        }
    }

    #[inline]
    pub fn weight(&self, site: SiteCoord) -> u32 {
        self.color_at(site).weight()
    }

    pub fn with_overrides(&self, region: &SiteSet, color: Color) -> Self {
        self.with_override_rows(SiteRows::from_sites(region), color)
    }

    pub fn with_override_rows(&self, region: SiteRows, color: Color) -> Self {
        let mut out = self.clone();
        if !region.is_empty() {
            out.layers.push(Layer::Uniform { sites: Arc::new(region), color });
        }
        out
    }

    fn with_pattern(&self, index: Arc<HashMap<SiteCoord, u32>>, bits: u64) -> Self {
        let mut out = self.clone();
        out.layers.push(Layer::Pattern { index, bits });
        out
    }

    /// Collapse to a stored source over `region` (other sites read `fill`).
    pub fn materialize(&self, region: &SiteSet, fill: Color) -> Self {
        let colors = region.iter().map(|&s| (s, self.color_at(s))).collect();
        Self::stored(colors, fill)
    }

    /// `x y color` lines for the sites of `region`, lexicographic order.
    pub fn to_text(&self, region: &SiteSet) -> String {
        let mut out = String::new();
        for &s in region {
            let _ = writeln!(out, "{} {} {}", s.x, s.y, self.color_at(s).name());
        }
        out
    }
}

/// Parse `x y color` lines; `#` starts a comment. Unlisted sites read `fill`.
pub fn parse_stored(text: &str, fill: Color) -> Result<ConfigSource> {
    let mut colors = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |reason: &str| Error::Parse { line: i + 1, reason: reason.to_string() };
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(bad("expected `x y color`"));
        }
        let x: i32 = parts[0].parse().map_err(|_| bad("bad x coordinate"))?;
        let y: i32 = parts[1].parse().map_err(|_| bad("bad y coordinate"))?;
        let c = Color::parse(parts[2]).ok_or_else(|| bad("color must be blue or yellow"))?;
        colors.insert(SiteCoord::new(x, y), c);
    }
    Ok(ConfigSource::stored(colors, fill))
}

/// All `2^k` colorings of `region` over `base`; bit `i` colors the `i`-th site in lexicographic order.
pub fn enumerate_region(region: &SiteSet, base: &ConfigSource) -> Result<RegionEnumeration> {
    if region.len() > ENUMERATION_CAP {
        return Err(Error::RegionTooLarge { size: region.len(), cap: ENUMERATION_CAP });
    }
    let sites: Vec<SiteCoord> = region.iter().copied().collect();
    let index = sites.iter().enumerate().map(|(i, &s)| (s, i as u32)).collect();
    Ok(RegionEnumeration {
        total: 1u64 << sites.len(),
        sites,
        index: Arc::new(index),
        base: base.clone(),
        next: 0,
    })
}

pub struct RegionEnumeration {
    sites: Vec<SiteCoord>,
    index: Arc<HashMap<SiteCoord, u32>>,
    base: ConfigSource,
    next: u64,
    total: u64,
}

impl RegionEnumeration {
    pub fn sites(&self) -> &[SiteCoord] {
        &self.sites
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// The coloring with bit pattern `bits`.
    pub fn config(&self, bits: u64) -> ConfigSource {
        self.base.with_pattern(self.index.clone(), bits)
    }
}

impl Iterator for RegionEnumeration {
    type Item = ConfigSource;

    fn next(&mut self) -> Option<ConfigSource> {
        if self.next >= self.total {
            return None;
        }
        let c = self.config(self.next);
        self.next += 1;
        Some(c)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = (self.total - self.next) as usize;
        (n, Some(n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{ball_sites, region_external_boundary, Region};
    use crate::mix::derive_seed;

    #[test]
    fn constant_and_determinism() {
        let c = ConfigSource::constant(Color::Blue);
        assert_eq!(c.color_at(SiteCoord::new(17, -3)), Color::Blue);
        let h = ConfigSource::hashed(42);
        for x in -20..20 {
            let s = SiteCoord::new(x, 3 * x - 1);
            assert_eq!(h.color_at(s), h.clone().color_at(s));
        }
    }

    #[test]
    fn hashed_yellow_frequency() {
        let h = ConfigSource::hashed(1);
        let mut yellow = 0u64;
        for x in 0..1000 {
            for y in 0..1000 {
                yellow += h.weight(SiteCoord::new(x - 500, y - 500)) as u64;
            }
        }
        let f = yellow as f64 / 1e6;
        assert!((f - 0.5).abs() < 0.0016, "frequency {f}");
    }

    #[test]
    fn adjacent_pairs_look_independent() {
        // chi-square on 2x2 table of horizontal neighbor pairs, 1 dof
        let h = ConfigSource::hashed(7);
        let mut table = [[0f64; 2]; 2];
        for i in 0..1_000_000i32 {
            let s = SiteCoord::new(2 * (i % 2000), i / 2000);
            let a = h.weight(s) as usize;
            let b = h.weight(s.step(0)) as usize;
            table[a][b] += 1.0;
        }
        let n: f64 = table.iter().flatten().sum();
        let rows = [table[0][0] + table[0][1], table[1][0] + table[1][1]];
        let cols = [table[0][0] + table[1][0], table[0][1] + table[1][1]];
        let mut chi2 = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                let e = rows[a] * cols[b] / n;
                chi2 += (table[a][b] - e).powi(2) / e;
            }
        }
        // 0.999 quantile of chi-square with one degree of freedom
        assert!(chi2 < 10.828, "chi2 = {chi2}");
    }

    #[test]
    fn replicas_use_distinct_seeds() {
        let a = ConfigSource::hashed(derive_seed(9, 0));
        let b = ConfigSource::hashed(derive_seed(9, 1));
        let differ = (0..256).filter(|&x| a.color_at(SiteCoord::new(x, 0)) != b.color_at(SiteCoord::new(x, 0))).count();
        assert!(differ > 90 && differ < 166);
    }

    #[test]
    fn overrides_layering() {
        let base = ConfigSource::hashed(3);
        let boundary = region_external_boundary(&Region::ball(8.0));
        let blue = base.with_overrides(&boundary, Color::Blue);
        assert!(boundary.iter().all(|&s| blue.color_at(s) == Color::Blue));
        let inner = ball_sites(SiteCoord::ORIGIN, 8.0);
        assert!(inner.iter().all(|&s| blue.color_at(s) == base.color_at(s)));

        let noop = base.with_overrides(&SiteSet::new(), Color::Yellow);
        assert!(inner.iter().all(|&s| noop.color_at(s) == base.color_at(s)));

        let a: SiteSet = ball_sites(SiteCoord::ORIGIN, 3.0);
        let b: SiteSet = ball_sites(SiteCoord::new(2, 0), 3.0);
        let stacked = base.with_overrides(&a, Color::Yellow).with_overrides(&b, Color::Blue);
        for s in a.union(&b) {
            let want = if b.contains(s) { Color::Blue } else { Color::Yellow };
            assert_eq!(stacked.color_at(*s), want);
        }
    }

    #[test]
    fn enumeration_counts() {
        let base = ConfigSource::constant(Color::Blue);
        let two: SiteSet = [SiteCoord::new(0, 0), SiteCoord::new(1, 0)].into_iter().collect();
        let patterns: std::collections::BTreeSet<Vec<Color>> = enumerate_region(&two, &base)
            .unwrap()
            .map(|c| two.iter().map(|&s| c.color_at(s)).collect())
            .collect();
        assert_eq!(patterns.len(), 4);

        let ann = Region::Annulus { inner: 1.0, outer: 3.0 }.sites();
        let e = enumerate_region(&ann, &base).unwrap();
        assert_eq!(e.count(), 262_144);

        let big = ball_sites(SiteCoord::ORIGIN, 4.0);
        assert!(big.len() > 30);
        assert!(matches!(enumerate_region(&big, &base), Err(Error::RegionTooLarge { .. })));
    }

    #[test]
    fn enumeration_outside_reads_base() {
        let base = ConfigSource::hashed(11);
        let region = ball_sites(SiteCoord::ORIGIN, 2.0);
        let e = enumerate_region(&region, &base).unwrap();
        let c = e.config(0b101);
        let far = SiteCoord::new(10, 10);
        assert_eq!(c.color_at(far), base.color_at(far));
        let sites = e.sites();
        assert_eq!(c.color_at(sites[0]), Color::Yellow);
        assert_eq!(c.color_at(sites[1]), Color::Blue);
        assert_eq!(c.color_at(sites[2]), Color::Yellow);
    }

    #[test]
    fn text_round_trip() {
        let src = ConfigSource::hashed(5);
        let region = ball_sites(SiteCoord::ORIGIN, 4.0);
        let text = format!("# dump\n{}", src.to_text(&region));
        let back = parse_stored(&text, Color::Blue).unwrap();
        assert!(region.iter().all(|&s| back.color_at(s) == src.color_at(s)));
        assert!(matches!(parse_stored("1 2 green", Color::Blue), Err(Error::Parse { line: 1, .. })));
    }
}
