//! Exhaustive verification suites over all colorings of a small annulus.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::circuits::{color_switch, color_switch_inverse, loop_count_n, rho, CycleCatalog};
use crate::config::{enumerate_region, Color, ConfigSource};
use crate::error::Result;
use crate::fpp::AnnulusGeometry;
use crate::lattice::{region_external_boundary, Region, SiteCoord, SiteSet};

/// A coloring on which two computations disagreed, in the stored text format.
#[derive(Debug, Clone, Serialize)]
pub struct Mismatch {
    pub config: String,
    pub left: u32,
    pub right: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub total: u64,
    pub agree: u64,
    pub oracle_agree: u64,
    pub mismatches: Vec<Mismatch>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.agree == self.total && self.oracle_agree == self.total
    }
}

fn annulus(r: f64, big_r: f64) -> SiteSet {
    Region::Annulus { inner: r, outer: big_r }.sites()
}

/// Base coloring for enumeration: blue everywhere, so `ΔB(R)` is blue.
fn blue_base() -> ConfigSource {
    ConfigSource::constant(Color::Blue)
}

const KEEP_MISMATCHES: usize = 5;

/// `T′(r, R) = ρ(r, R)` on every annulus coloring, with `ρ` also checked
/// against the brute-force disjoint-family oracle.
pub fn prop_equality(r: f64, big_r: f64) -> Result<IdentityReport> {
    let region = annulus(r, big_r);
    let geometry = AnnulusGeometry::new(r, big_r)?;
    let catalog = CycleCatalog::new(&region, 30, |_, _| true)?;
    let colorings = enumerate_region(&region, &blue_base())?;
    let mut report = IdentityReport { total: colorings.total(), agree: 0, oracle_agree: 0, mismatches: Vec::new() };
    for bits in 0..colorings.total() {
        let src = colorings.config(bits);
        let t = geometry.passage(&src, false)?.time;
        let (p, _) = rho(&src, r, big_r)?;
        let oracle = catalog.max_disjoint(catalog.color_mask(&src, Color::Yellow));
        if t == p {
            report.agree += 1;
        }
        if p == oracle {
            report.oracle_agree += 1;
        }
        if (t != p || p != oracle) && report.mismatches.len() < KEEP_MISMATCHES {
            let right = if t != p { p } else { oracle };
            let left = if t != p { t } else { p };
            report.mismatches.push(Mismatch { config: src.to_text(&region), left, right });
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct DistributionReport {
    pub total: u64,
    pub t_prime: BTreeMap<u32, u64>,
    pub loops: BTreeMap<u32, u64>,
}

impl DistributionReport {
    pub fn passed(&self) -> bool {
        self.t_prime == self.loops
    }
}

/// Histograms of `T′(r, R)` and `N(r, R)` over all annulus colorings with blue `ΔB(R)`.
pub fn distribution_equality(r: f64, big_r: f64) -> Result<DistributionReport> {
    let region = annulus(r, big_r);
    let geometry = AnnulusGeometry::new(r, big_r)?;
    let colorings = enumerate_region(&region, &blue_base())?;
    let mut report = DistributionReport { total: colorings.total(), t_prime: BTreeMap::new(), loops: BTreeMap::new() };
    for bits in 0..colorings.total() {
        let src = colorings.config(bits);
        *report.t_prime.entry(geometry.passage(&src, false)?.time).or_default() += 1;
        *report.loops.entry(loop_count_n(&src, r, big_r)?.0).or_default() += 1;
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct BijectionReport {
    pub total: u64,
    /// Per `n`: (#{ρ = n}, #{N = n}, #distinct images, #images with N = n, #round trips).
    pub by_n: BTreeMap<u32, [u64; 5]>,
}

impl BijectionReport {
    pub fn passed(&self) -> bool {
        self.by_n.values().all(|&[rho_n, n_n, distinct, hits, back]| {
            rho_n == n_n && distinct == rho_n && hits == rho_n && back == rho_n
        })
    }
}

fn annulus_bits(src: &ConfigSource, sites: &[SiteCoord]) -> u64 {
    sites
        .iter()
        .enumerate()
        .filter(|(_, &s)| src.color_at(s) == Color::Yellow)
        .fold(0, |m, (i, _)| m | 1 << i)
}

/// The switching map restricted to `{ρ = n}` is injective into `{N = n}`, the two
/// sets have equal size, and the inverse construction recovers every coloring.
pub fn bijection(r: f64, big_r: f64) -> Result<BijectionReport> {
    let region = annulus(r, big_r);
    let colorings = enumerate_region(&region, &blue_base())?;
    let sites: Vec<SiteCoord> = colorings.sites().to_vec();
    let shell = region_external_boundary(&Region::ball(big_r));
    let mut by_n: BTreeMap<u32, [u64; 5]> = BTreeMap::new();
    let mut images: BTreeMap<u32, Vec<u64>> = BTreeMap::new();
    for bits in 0..colorings.total() {
        let src = colorings.config(bits);
        let (p, _) = rho(&src, r, big_r)?;
        let (n, _) = loop_count_n(&src, r, big_r)?;
        by_n.entry(p).or_default()[0] += 1;
        by_n.entry(n).or_default()[1] += 1;

        let img = color_switch(&src, r, big_r)?;
        debug_assert!(shell.iter().all(|&s| img.color_at(s) == Color::Blue));
        let (img_n, _) = loop_count_n(&img, r, big_r)?;
        let e = by_n.entry(p).or_default();
        if img_n == p {
            e[3] += 1;
        }
        let back = color_switch_inverse(&img, r, big_r)?;
        if annulus_bits(&back, &sites) == bits {
            e[4] += 1;
        }
        images.entry(p).or_default().push(annulus_bits(&img, &sites));
    }
    for (p, mut v) in images {
        v.sort_unstable();
        v.dedup();
        by_n.entry(p).or_default()[2] = v.len() as u64;
    }
    Ok(BijectionReport { total: colorings.total(), by_n })
}
