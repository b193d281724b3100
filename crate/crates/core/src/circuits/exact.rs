//! Brute-force circuit families on small regions.

use std::collections::{HashMap, HashSet};

use crate::config::{Color, ConfigSource};
use crate::error::{Error, Result};
use crate::lattice::{position, SiteCoord, SiteSet};

use super::trace::winding;

/// Region size limit for cycle enumeration.
pub const CATALOG_CAP: usize = 30;

/// Every simple cycle of a small region that surrounds the origin, as site bitmasks.
#[derive(Debug, Clone)]
pub struct CycleCatalog {
    sites: Vec<SiteCoord>,
    index: HashMap<SiteCoord, usize>,
    /// One cyclic order per distinct site set.
    cycles: Vec<(u64, Vec<SiteCoord>)>,
    /// Inclusion-minimal qualifying masks with their enclosed areas.
    minimal: Vec<(u64, f64)>,
}

fn polygon_area(cycle: &[SiteCoord]) -> f64 {
    let n = cycle.len();
    let mut a = 0.0;
    for i in 0..n {
        let (x0, y0) = position(cycle[i]);
        let (x1, y1) = position(cycle[(i + 1) % n]);
        a += x0 * y1 - x1 * y0;
    }
    0.5 * a.abs()
}

impl CycleCatalog {
    /// Enumerate cycles of `region` surrounding the origin; keep those passing `qualifies`.
    pub fn new<Q: Fn(u64, &[SiteCoord]) -> bool>(region: &SiteSet, cap: usize, qualifies: Q) -> Result<Self> {
        let cap = cap.min(CATALOG_CAP);
        if region.len() > cap {
            return Err(Error::RegionTooLarge { size: region.len(), cap });
        }
        let sites: Vec<SiteCoord> = region.iter().copied().filter(|&s| s != SiteCoord::ORIGIN).collect();
        let index: HashMap<SiteCoord, usize> = sites.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let adj: Vec<Vec<usize>> = sites
            .iter()
            .map(|s| s.neighbors().iter().filter_map(|w| index.get(w).copied()).collect())
            .collect();

        let mut seen: HashSet<u64> = HashSet::new();
        let mut cycles = Vec::new();
        let mut path: Vec<usize> = Vec::new();
        for start in 0..sites.len() {
            path.clear();
            path.push(start);
            dfs(start, 1u64 << start, &adj, &sites, &mut path, &mut seen, &mut cycles);
        }

        let qualifying: Vec<(u64, f64)> = cycles
            .iter()
            .filter(|(m, c)| qualifies(*m, c))
            .map(|(m, c)| (*m, polygon_area(c)))
            .collect();
        let minimal = qualifying
            .iter()
            .copied()
            .filter(|&(m, _)| !qualifying.iter().any(|&(o, _)| o != m && o & !m == 0))
            .collect();
        Ok(Self { sites, index, cycles, minimal })
    }

    pub fn sites(&self) -> &[SiteCoord] {
        &self.sites
    }

    /// All cycles surrounding the origin, qualifying or not.
    pub fn cycles(&self) -> &[(u64, Vec<SiteCoord>)] {
        &self.cycles
    }

    pub fn mask_of(&self, sites: impl IntoIterator<Item = SiteCoord>) -> u64 {
        sites.into_iter().filter_map(|s| self.index.get(&s)).fold(0, |m, &i| m | 1 << i)
    }

    /// Sites of the catalog region with the given color.
    pub fn color_mask(&self, source: &ConfigSource, color: Color) -> u64 {
        self.sites
            .iter()
            .enumerate()
            .filter(|(_, &s)| source.color_at(s) == color)
            .fold(0, |m, (i, _)| m | 1 << i)
    }

    /// Largest number of pairwise disjoint qualifying cycles inside `allowed`.
    pub fn max_disjoint(&self, allowed: u64) -> u32 {
        let mut avail: Vec<(u64, f64)> = self.minimal.iter().copied().filter(|&(m, _)| m & !allowed == 0).collect();
        // disjoint cycles around the origin are nested, so a family is a chain by area
        avail.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let mut best = vec![1u32; avail.len()];
        for i in 0..avail.len() {
            for j in 0..i {
                if avail[i].0 & avail[j].0 == 0 && avail[j].1 < avail[i].1 {
                    best[i] = best[i].max(best[j] + 1);
                }
            }
        }
        best.into_iter().max().unwrap_or(0)
    }
}

fn dfs(
    start: usize,
    used: u64,
    adj: &[Vec<usize>],
    sites: &[SiteCoord],
    path: &mut Vec<usize>,
    seen: &mut HashSet<u64>,
    out: &mut Vec<(u64, Vec<SiteCoord>)>,
) {
    let last = *path.last().unwrap();
    for &w in &adj[last] {
        if w == start && path.len() >= 3 {
            if !seen.contains(&used) {
                let cycle: Vec<SiteCoord> = path.iter().map(|&i| sites[i]).collect();
                if winding(&cycle) != 0 {
                    seen.insert(used);
                    out.push((used, cycle));
                }
            }
            continue;
        }
        if w <= start || used & (1 << w) != 0 {
            continue;
        }
        path.push(w);
        dfs(start, used | 1 << w, adj, sites, path, seen, out);
        path.pop();
    }
}
