//! Experiment specs, dispatch, replicated sampling and report emission.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuits::{m_and_innermost_blue, rho, s_x, SxMode, MAX_DYADIC_LEVEL};
use crate::cle::{self, BSampler, RenewalPath};
use crate::config::ConfigSource;
use crate::error::{Error, Result};
use crate::fpp::{self, AnnulusGeometry};
use crate::mix::MIX_VERSION;
use crate::replicate::{default_threads, run_replicas};
use crate::shape;
use crate::stats::{fit_line, ks_two_sample, FitResult, Histogram, MomentAccumulator};
use crate::verify;

pub const CSV_HEADER: &str = "quantity,n,reps,mean,var,stderr,master_seed";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Everything needed to re-run an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    /// `verify`, `estimate`, `cle`, `tails` or `shape`.
    pub command: String,
    /// Suite, quantity, action or statistic; empty for `shape`.
    pub target: String,
    pub n: Vec<u32>,
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    pub reps: u64,
    pub seed: u64,
    pub threads: usize,
    pub window_factor: f64,
    pub exhaustive: bool,
    pub t: f64,
    pub epsilon: f64,
    pub lambda: Vec<f64>,
    pub x: Vec<u32>,
    pub j: Vec<u32>,
    pub cap: u32,
    pub direction: (f64, f64),
    pub window: f64,
    pub max_window: f64,
    pub output: Option<String>,
    pub format: Format,
}

impl ExperimentSpec {
    pub fn new(command: &str, target: &str) -> Self {
        Self {
            command: command.into(),
            target: target.into(),
            n: vec![128],
            r: 1.0,
            big_r: 3.0,
            reps: 100,
            seed: 0,
            threads: default_threads(),
            window_factor: fpp::DEFAULT_WINDOW_FACTOR,
            exhaustive: false,
            t: 1000.0,
            epsilon: 1e-3,
            lambda: vec![-5.0, -1.0, 0.0, 0.05],
            x: vec![3, 5],
            j: vec![3, 5],
            cap: 6,
            direction: (1.0, 0.0),
            window: 32.0,
            max_window: 512.0,
            output: None,
            format: Format::Csv,
        }
    }

    /// Set one field from its textual form, as written in config files and on the command line.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let bad = |reason: String| Error::InvalidSpec { field: key.to_string(), reason };
        fn num<T: std::str::FromStr>(v: &str) -> std::result::Result<T, String> {
            v.parse::<T>().map_err(|_| format!("cannot parse `{v}`"))
        }
        fn list<T: std::str::FromStr>(v: &str) -> std::result::Result<Vec<T>, String> {
            v.split(',').filter(|s| !s.trim().is_empty()).map(|s| num(s.trim())).collect()
        }
        match key {
            "command" => self.command = v.into(),
            "target" | "suite" | "quantity" | "action" | "stat" => self.target = v.into(),
            "n" => self.n = list(v).map_err(bad)?,
            "r" => self.r = num(v).map_err(bad)?,
            "R" | "big_r" => self.big_r = num(v).map_err(bad)?,
            "reps" => self.reps = num(v).map_err(bad)?,
            "seed" => self.seed = num(v).map_err(bad)?,
            "threads" => self.threads = num(v).map_err(bad)?,
            "window_factor" | "window-factor" => self.window_factor = num(v).map_err(bad)?,
            "exhaustive" => self.exhaustive = num(v).map_err(bad)?,
            "t" => self.t = num(v).map_err(bad)?,
            "epsilon" => self.epsilon = num(v).map_err(bad)?,
            "lambda" => self.lambda = list(v).map_err(bad)?,
            "x" => self.x = list(v).map_err(bad)?,
            "j" => self.j = list(v).map_err(bad)?,
            "cap" => self.cap = num(v).map_err(bad)?,
            "direction" => {
                let d: Vec<f64> = list(v).map_err(bad)?;
                if d.len() != 2 {
                    return Err(bad("expected two comma-separated components".into()));
                }
                let norm = d[0].hypot(d[1]);
                if !(norm > 0.0) {
                    return Err(bad("direction must be nonzero".into()));
                }
                self.direction = (d[0] / norm, d[1] / norm);
            }
            "window" => self.window = num(v).map_err(bad)?,
            "max_window" | "max-window" => self.max_window = num(v).map_err(bad)?,
            "output" => self.output = Some(v.into()),
            "format" => {
                self.format = match v {
                    "csv" => Format::Csv,
                    "json" => Format::Json,
                    _ => return Err(bad(format!("unknown format `{v}`"))),
                }
            }
            _ => return Err(Error::InvalidSpec { field: key.into(), reason: "unknown field".into() }),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, reason: &str| Err(Error::InvalidSpec { field: field.into(), reason: reason.into() });
        let targets: &[&str] = match self.command.as_str() {
            "verify" => &["prop-equality", "bijection", "shape-identity"],
            "estimate" => &["cn", "b0n", "t0nu", "tprime"],
            "cle" => &["mgf", "density-check", "renewal", "constants"],
            "tails" => &["sx", "mj", "tprime"],
            "shape" => &[""],
            _ => return bad("command", "expected verify, estimate, cle, tails or shape"),
        };
        if !targets.contains(&self.target.as_str()) {
            return bad("target", &format!("expected one of {targets:?}"));
        }
        if self.threads == 0 {
            return bad("threads", "must be at least 1");
        }
        let sampled = !(self.command == "cle" && matches!(self.target.as_str(), "mgf" | "constants" | "density-check"))
            && !(self.command == "verify" && self.exhaustive && self.target != "shape-identity");
        if sampled && self.reps < 2 {
            return bad("reps", "need at least 2 replicas");
        }
        let uses_n = matches!(self.command.as_str(), "shape")
            || (self.command == "estimate" && self.target != "tprime")
            || (self.command == "verify" && self.target == "shape-identity");
        if uses_n && (self.n.is_empty() || self.n.iter().any(|&n| n == 0)) {
            return bad("n", "every n must be at least 1");
        }
        let uses_annulus = self.target == "tprime" || (self.command == "verify" && self.target != "shape-identity");
        if uses_annulus && !(self.r >= 1.0 && self.r < self.big_r) {
            return bad("r", "need 1 ≤ r < R");
        }
        if !(self.window_factor > 0.0) {
            return bad("window_factor", "must be positive");
        }
        if self.command == "cle" && self.target == "renewal" {
            if !(self.t >= 0.0) {
                return bad("t", "must be nonnegative");
            }
            if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
                return bad("epsilon", "must lie in (0, 1)");
            }
        }
        if self.command == "tails" && self.target == "mj" && self.cap == 0 {
            return bad("cap", "must be at least 1");
        }
        if self.command == "tails" && self.target == "mj" && self.j.iter().any(|&j| j + self.cap - 1 > MAX_DYADIC_LEVEL) {
            return bad("cap", "j + cap − 1 exceeds the largest searchable dyadic level");
        }
        if !(self.window >= 2.0 && self.window <= self.max_window) {
            return bad("window", "need 2 ≤ window ≤ max_window");
        }
        Ok(())
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub quantity: String,
    pub n: f64,
    pub reps: u64,
    pub mean: f64,
    pub var: f64,
    pub stderr: f64,
    pub master_seed: u64,
}

impl Row {
    fn from_moments(quantity: &str, n: f64, acc: &MomentAccumulator, seed: u64) -> Self {
        let var = acc.variance().unwrap_or(f64::NAN);
        Row {
            quantity: quantity.into(),
            n,
            reps: acc.n,
            mean: acc.mean,
            var,
            stderr: (var / acc.n as f64).sqrt(),
            master_seed: seed,
        }
    }

    fn exact(quantity: &str, n: f64, value: f64, seed: u64) -> Self {
        Row { quantity: quantity.into(), n, reps: 0, mean: value, var: 0.0, stderr: 0.0, master_seed: seed }
    }

    fn proportion(quantity: &str, n: f64, hits: u64, reps: u64, seed: u64) -> Self {
        let p = hits as f64 / reps as f64;
        let var = p * (1.0 - p);
        Row { quantity: quantity.into(), n, reps, mean: p, var, stderr: (var / reps as f64).sqrt(), master_seed: seed }
    }

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.quantity, self.n, self.reps, self.mean, self.var, self.stderr, self.master_seed
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub artifact: String,
    pub version: String,
    pub spec: ExperimentSpec,
    pub master_seed: u64,
    pub seed_rule: String,
    pub wall_time_secs: f64,
    pub timestamp: u64,
    pub replicas: u64,
    pub replica_errors: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShapeRow {
    pub n: u32,
    pub r_in: f64,
    pub r_out: f64,
    pub site_count: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub rows: Vec<Row>,
    /// `Some(false)` marks a failed verification.
    pub verdict: Option<bool>,
    pub summary: Vec<String>,
    pub details: serde_json::Value,
    pub samples: Vec<ShapeRow>,
    pub manifest: Manifest,
}

impl ExperimentReport {
    pub fn to_csv(&self) -> String {
        rows_to_csv(&self.rows)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Write the report in its spec's format to `path`. CSV output gets the
    /// manifest and any shape samples as sidecar files.
    pub fn write(&self, path: &std::path::Path) -> Result<()> {
        match self.manifest.spec.format {
            Format::Json => std::fs::write(path, self.to_json())?,
            Format::Csv => {
                std::fs::write(path, self.to_csv())?;
                let manifest = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
                std::fs::write(path.with_extension("manifest.json"), manifest + "\n")?;
                if !self.samples.is_empty() {
                    std::fs::write(path.with_extension("samples.csv"), samples_to_csv(&self.samples))?;
                }
            }
        }
        Ok(())
    }
}

pub fn rows_to_csv(rows: &[Row]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv());
        out.push('\n');
    }
    out
}

pub fn samples_to_csv(samples: &[ShapeRow]) -> String {
    let mut out = String::from("n,r_in,r_out,site_count,seed\n");
    for s in samples {
        out.push_str(&format!("{},{},{},{},{}\n", s.n, s.r_in, s.r_out, s.site_count, s.seed));
    }
    out
}

/// Parse `key = value` lines; `#` starts a comment.
pub fn parse_kv(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse { line: i + 1, reason: "expected `key = value`".into() })?;
        let k = k.trim();
        if k.is_empty() {
            return Err(Error::Parse { line: i + 1, reason: "empty key".into() });
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn error_kind(e: &Error) -> String {
    let s = format!("{e:?}");
    s.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error").to_string()
}

/// Replica outcomes in index order plus per-kind error counts.
pub struct Collected<T> {
    pub values: Vec<(u64, T)>,
    pub errors: BTreeMap<String, u64>,
}

fn collect<T: Send, F>(spec: &ExperimentSpec, f: F) -> Collected<T>
where
    F: Fn(u64, u64) -> Result<T> + Sync + Send,
{
    let results = run_replicas(spec.seed, spec.reps, spec.threads, |i, s| (s, f(i, s)));
    let mut values = Vec::with_capacity(results.len());
    let mut errors = BTreeMap::new();
    for (seed, r) in results {
        match r {
            Ok(v) => values.push((seed, v)),
            Err(e) => *errors.entry(error_kind(&e)).or_insert(0) += 1,
        }
    }
    Collected { values, errors }
}

// ---- sampling building blocks shared with the acceptance suite ----

/// `c_n` for every `n` in `ns` from one search per replica.
pub fn cn_samples(ns: &[u32], reps: u64, seed: u64, threads: usize) -> Result<Vec<Vec<u32>>> {
    let nmax = *ns.iter().max().ok_or_else(|| Error::InvalidArgument("empty n list".into()))?;
    run_replicas(seed, reps, threads, |_, s| {
        let scan = fpp::c_n_scan(&ConfigSource::hashed(s), nmax)?;
        Ok(ns.iter().map(|&n| scan.get(n)).collect())
    })
    .into_iter()
    .collect()
}

/// `T′(r, R)` per replica, with `ΔB(R)` forced blue.
pub fn tprime_samples(r: f64, big_r: f64, reps: u64, seed: u64, threads: usize) -> Result<Vec<u32>> {
    let geometry = AnnulusGeometry::new(r, big_r)?;
    run_replicas(seed, reps, threads, |_, s| Ok(geometry.passage(&ConfigSource::hashed(s), false)?.time))
        .into_iter()
        .collect()
}

/// `N_t` per replica, each replica driving its own generator.
pub fn renewal_samples(sampler: &BSampler, t: f64, reps: u64, seed: u64, threads: usize) -> Result<Vec<u64>> {
    run_replicas(seed, reps, threads, |_, s| {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        cle::renewal_count(t, sampler, &mut rng).map(|(n, _)| n)
    })
    .into_iter()
    .collect()
}

/// Renewal paths long enough for the bracket at `epsilon` and the count at `t`.
pub fn renewal_paths(sampler: &BSampler, horizon: f64, reps: u64, seed: u64, threads: usize) -> Vec<RenewalPath> {
    run_replicas(seed, reps, threads, |_, s| {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        RenewalPath::sample(horizon, sampler, &mut rng)
    })
}

/// Greedy `S_x` per replica; the flag marks possible undercounts.
pub fn sx_samples(x: u32, reps: u64, seed: u64, threads: usize) -> Result<Vec<(u32, bool)>> {
    run_replicas(seed, reps, threads, |_, s| {
        let r = s_x(&ConfigSource::hashed(s), x, SxMode::Greedy)?;
        Ok((r.count, r.lower_bound))
    })
    .into_iter()
    .collect()
}

/// `m(j) − j` per replica, censored at `cap`: a replica with no circuit below
/// level `j + cap` records `cap`, which keeps `P[m(j) − j ≥ t]` exact for `t ≤ cap`.
/// The flag marks censored replicas.
pub fn mj_samples(j: u32, cap: u32, reps: u64, seed: u64, threads: usize) -> Result<Vec<(u32, bool)>> {
    run_replicas(seed, reps, threads, |_, s| mj_censored(&ConfigSource::hashed(s), j, cap)).into_iter().collect()
}

fn mj_censored(source: &ConfigSource, j: u32, cap: u32) -> Result<(u32, bool)> {
    match m_and_innermost_blue(source, j, cap) {
        Ok((m, _)) => Ok((m - j, false)),
        Err(Error::SearchCapExceeded { .. }) => Ok((cap, true)),
        Err(e) => Err(e),
    }
}

/// Log-linear fit of the empirical survival `P[X ≥ t]`, `t = 0, 1, …`, over the
/// points backed by at least `min_count` samples.
pub fn tail_fit(hist: &Histogram, min_count: u64) -> Result<(Vec<(i64, f64)>, FitResult)> {
    let total = hist.total();
    let max = hist.counts.keys().next_back().copied().unwrap_or(0);
    let mut points = Vec::new();
    for t in 0..=max {
        let p = hist.survival(t);
        if (p * total as f64).round() as u64 >= min_count {
            points.push((t, p));
        }
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0 as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let fit = fit_line(&xs, &ys)?;
    Ok((points, fit))
}

/// Minimum survivors behind each tail-fit point.
pub const TAIL_MIN_COUNT: u64 = 10;

// ---- dispatch ----

pub fn run(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    let start = Instant::now();
    let mut out = Outcome::default();
    match spec.command.as_str() {
        "verify" => run_verify(spec, &mut out)?,
        "estimate" => run_estimate(spec, &mut out)?,
        "cle" => run_cle(spec, &mut out)?,
        "tails" => run_tails(spec, &mut out)?,
        "shape" => run_shape(spec, &mut out)?,
        _ => unreachable!("validated"),
    }
    let manifest = Manifest {
        artifact: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        spec: spec.clone(),
        master_seed: spec.seed,
        seed_rule: MIX_VERSION.into(),
        wall_time_secs: start.elapsed().as_secs_f64(),
        timestamp: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        replicas: out.replicas,
        replica_errors: out.errors,
    };
    Ok(ExperimentReport {
        rows: out.rows,
        verdict: out.verdict,
        summary: out.summary,
        details: serde_json::Value::Object(out.details),
        samples: out.samples,
        manifest,
    })
}

#[derive(Default)]
struct Outcome {
    rows: Vec<Row>,
    verdict: Option<bool>,
    summary: Vec<String>,
    details: serde_json::Map<String, serde_json::Value>,
    samples: Vec<ShapeRow>,
    replicas: u64,
    errors: BTreeMap<String, u64>,
}

impl Outcome {
    fn absorb_errors(&mut self, errors: BTreeMap<String, u64>) {
        for (k, v) in errors {
            *self.errors.entry(k).or_insert(0) += v;
        }
    }

    fn detail(&mut self, key: &str, value: impl Serialize) {
        self.details.insert(key.into(), serde_json::to_value(value).expect("serializable"));
    }

    fn verdict(&mut self, ok: bool) {
        self.verdict = Some(self.verdict.unwrap_or(true) && ok);
    }
}

fn run_verify(spec: &ExperimentSpec, out: &mut Outcome) -> Result<()> {
    let (r, big_r) = (spec.r, spec.big_r);
    match spec.target.as_str() {
        "prop-equality" if spec.exhaustive => {
            let rep = verify::prop_equality(r, big_r)?;
            out.replicas = rep.total;
            out.summary.push(format!("{}/{} configurations: T′ = ρ", rep.agree, rep.total));
            out.summary.push(format!("{}/{} configurations: ρ = brute-force maximum", rep.oracle_agree, rep.total));
            out.rows.push(Row::proportion("tprime_eq_rho", big_r, rep.agree, rep.total, spec.seed));
            out.verdict(rep.passed());
            out.detail("report", &rep);
        }
        "prop-equality" => {
            let geometry = AnnulusGeometry::new(r, big_r)?;
            let c = collect(spec, |_, s| {
                let src = ConfigSource::hashed(s);
                Ok((geometry.passage(&src, false)?.time, rho(&src, r, big_r)?.0))
            });
            let agree = c.values.iter().filter(|(_, (t, p))| t == p).count() as u64;
            let bad: Vec<u64> = c.values.iter().filter(|(_, (t, p))| t != p).map(|(s, _)| *s).take(5).collect();
            out.replicas = spec.reps;
            out.summary.push(format!("{agree}/{} configurations: T′ = ρ", spec.reps));
            out.rows.push(Row::proportion("tprime_eq_rho", big_r, agree, spec.reps, spec.seed));
            out.verdict(agree == spec.reps);
            out.detail("mismatched_seeds", bad);
            out.absorb_errors(c.errors);
        }
        "bijection" => {
            let dist = verify::distribution_equality(r, big_r)?;
            let bij = verify::bijection(r, big_r)?;
            out.replicas = dist.total;
            out.summary.push(format!(
                "T′ and N histograms over {} colorings: {}",
                dist.total,
                if dist.passed() { "identical" } else { "DIFFER" }
            ));
            for (n, v) in &bij.by_n {
                out.summary.push(format!(
                    "n = {n}: #{{ρ=n}} = {}, #{{N=n}} = {}, distinct images {}, images with N=n {}, round trips {}",
                    v[0], v[1], v[2], v[3], v[4]
                ));
            }
            out.verdict(dist.passed() && bij.passed());
            out.detail("distribution", &dist);
            out.detail("bijection", &bij);
        }
        "shape-identity" => {
            if spec.exhaustive {
                let (checked, matched, bad) = shape_identity_exhaustive(3.0)?;
                out.summary.push(format!("radius-3 window, n = 1: {matched}/{checked} defined colorings match"));
                out.verdict(bad.is_empty());
                out.detail("exhaustive_mismatches", bad);
            }
            for &n in &spec.n {
                let c = collect(spec, |_, s| shape::identity_check(&ConfigSource::hashed(s), n, spec.window, spec.max_window));
                let fitted: Vec<_> = c.values.iter().filter_map(|(s, m)| m.as_ref().map(|m| (*s, m.matched))).collect();
                let matched = fitted.iter().filter(|f| f.1).count() as u64;
                let bad: Vec<u64> = fitted.iter().filter(|f| !f.1).map(|f| f.0).collect();
                out.summary.push(format!(
                    "n = {n}: {matched}/{} windows match ({} of {} hulls outgrew radius {})",
                    fitted.len(),
                    spec.reps - fitted.len() as u64 - c.errors.values().sum::<u64>(),
                    spec.reps,
                    spec.max_window
                ));
                out.rows.push(Row::proportion("shape_identity", n as f64, matched, fitted.len() as u64, spec.seed));
                out.verdict(bad.is_empty());
                out.detail(&format!("mismatched_seeds_n{n}"), bad);
                out.absorb_errors(c.errors);
                out.replicas += spec.reps;
            }
        }
        _ => unreachable!("validated"),
    }
    Ok(())
}

/// Boundary identity for `n = 1` on every coloring of `B(radius)`.
///
/// Returns (colorings where both sides fit, matches, mismatching colorings as text).
pub fn shape_identity_exhaustive(radius: f64) -> Result<(u64, u64, Vec<String>)> {
    use crate::config::{enumerate_region, Color};
    use crate::lattice::Region;
    let window = Region::ball(radius);
    let sites = window.sites();
    let colorings = enumerate_region(&sites, &ConfigSource::constant(Color::Blue))?;
    let (mut checked, mut matched, mut bad) = (0, 0, Vec::new());
    for bits in 0..colorings.total() {
        let src = colorings.config(bits);
        match shape::nth_circuit_boundary(&src, 1, &window) {
            Ok(m) => {
                checked += 1;
                if m.matched {
                    matched += 1;
                } else if bad.len() < 5 {
                    bad.push(src.to_text(&sites));
                }
            }
            Err(Error::WindowOverflow | Error::CircuitNotFound(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok((checked, matched, bad))
}

fn run_estimate(spec: &ExperimentSpec, out: &mut Outcome) -> Result<()> {
    out.replicas = spec.reps;
    match spec.target.as_str() {
        "cn" => {
            let nmax = *spec.n.iter().max().expect("validated");
            let c = collect(spec, |_, s| fpp::c_n_scan(&ConfigSource::hashed(s), nmax));
            for &n in &spec.n {
                let acc: MomentAccumulator = c.values.iter().map(|(_, scan)| scan.get(n) as f64).collect();
                out.rows.push(Row::from_moments("cn", n as f64, &acc, spec.seed));
            }
            out.absorb_errors(c.errors);
        }
        "b0n" | "t0nu" => {
            let c = collect(spec, |_, s| {
                let src = ConfigSource::hashed(s);
                spec.n
                    .iter()
                    .map(|&n| match spec.target.as_str() {
                        "b0n" => fpp::b0n(&src, n, spec.window_factor),
                        _ => fpp::t0nu_in(&src, n, spec.direction, spec.window_factor),
                    })
                    .collect::<Result<Vec<_>>>()
            });
            for (k, &n) in spec.n.iter().enumerate() {
                let acc: MomentAccumulator = c.values.iter().map(|(_, v)| v[k].time as f64).collect();
                out.rows.push(Row::from_moments(&spec.target, n as f64, &acc, spec.seed));
                let hits = c.values.iter().filter(|(_, v)| v[k].window_hit).count();
                out.detail(&format!("window_hits_n{n}"), hits);
            }
            out.absorb_errors(c.errors);
        }
        "tprime" => {
            let geometry = AnnulusGeometry::new(spec.r, spec.big_r)?;
            let c = collect(spec, |_, s| Ok(geometry.passage(&ConfigSource::hashed(s), false)?.time));
            let acc: MomentAccumulator = c.values.iter().map(|(_, t)| *t as f64).collect();
            let hist: Histogram = c.values.iter().map(|(_, t)| *t as i64).collect();
            out.rows.push(Row::from_moments("tprime", spec.big_r, &acc, spec.seed));
            out.detail("r", spec.r);
            out.detail("histogram", &hist);
            out.absorb_errors(c.errors);
        }
        _ => unreachable!("validated"),
    }
    Ok(())
}

fn run_cle(spec: &ExperimentSpec, out: &mut Outcome) -> Result<()> {
    let seed = spec.seed;
    match spec.target.as_str() {
        "mgf" => {
            for &l in &spec.lambda {
                out.rows.push(Row::exact("mgf", l, cle::mgf(l)?, seed));
            }
        }
        "constants" => {
            let c = cle::limit_constants();
            for (name, v) in [
                ("mu_half", c.mu_half),
                ("mu_point", c.mu_point),
                ("var_half", c.var_half),
                ("var_point", c.var_point),
                ("mean_b", c.mean_b),
                ("var_b", c.var_b),
            ] {
                out.rows.push(Row::exact(name, 0.0, v, seed));
            }
        }
        "density-check" => {
            let d = cle::density_check(&spec.lambda)?;
            out.rows.push(Row::exact("density_mass", 0.0, d.normalization, seed));
            let mut ok = (d.normalization - 1.0).abs() < 1e-6;
            out.summary.push(format!("density integrates to {} (|error| {:e})", d.normalization, (d.normalization - 1.0).abs()));
            for &(l, quad, closed) in &d.mgf {
                let rel = ((quad - closed) / closed).abs();
                ok &= rel < 1e-5;
                out.rows.push(Row::exact("density_mgf", l, quad, seed));
                out.summary.push(format!("λ = {l}: quadrature {quad}, closed form {closed}, relative error {rel:e}"));
            }
            out.verdict(ok);
            out.detail("check", &d);
        }
        "renewal" => {
            let sampler = BSampler::new();
            let horizon = spec.t.max((1.0 / spec.epsilon).ln());
            let c = collect(spec, |_, s| {
                let mut rng = ChaCha8Rng::seed_from_u64(s);
                let path = RenewalPath::sample(horizon, &sampler, &mut rng);
                Ok((path.count(spec.t)?, cle::n_epsilon_bracket(spec.epsilon, &path)?))
            });
            let n_t: MomentAccumulator = c.values.iter().map(|(_, v)| v.0 as f64).collect();
            let lo: MomentAccumulator = c.values.iter().map(|(_, v)| v.1 .0 as f64).collect();
            let hi: MomentAccumulator = c.values.iter().map(|(_, v)| v.1 .1 as f64).collect();
            out.rows.push(Row::from_moments("renewal_count", spec.t, &n_t, seed));
            out.rows.push(Row::from_moments("bracket_lo", spec.epsilon, &lo, seed));
            out.rows.push(Row::from_moments("bracket_hi", spec.epsilon, &hi, seed));
            if spec.t > 0.0 {
                let lc = cle::limit_constants();
                let var = n_t.variance().unwrap_or(f64::NAN);
                out.summary.push(format!(
                    "E[N_t]/t = {} (limit {}), Var[N_t]/t = {} (limit {})",
                    n_t.mean / spec.t,
                    lc.mu_half,
                    var / spec.t,
                    lc.var_half
                ));
            }
            out.replicas = spec.reps;
            out.absorb_errors(c.errors);
        }
        _ => unreachable!("validated"),
    }
    Ok(())
}

fn run_tails(spec: &ExperimentSpec, out: &mut Outcome) -> Result<()> {
    out.replicas = spec.reps;
    let emit = |out: &mut Outcome, label: &str, param: u32, hist: &Histogram| {
        let total = hist.total();
        let max = hist.counts.keys().next_back().copied().unwrap_or(0);
        for t in 0..=max {
            let hits = (hist.survival(t) * total as f64).round() as u64;
            out.rows.push(Row::proportion(&format!("{label}{param}_tail"), t as f64, hits, total, spec.seed));
        }
        match tail_fit(hist, TAIL_MIN_COUNT) {
            Ok((_, fit)) => {
                out.summary.push(format!(
                    "{label} = {param}: log P[X ≥ t] slope {} (R² {})",
                    fit.slope, fit.r_squared
                ));
                out.detail(&format!("fit_{label}{param}"), fit);
            }
            Err(e) => out.summary.push(format!("{label} = {param}: no fit ({e})")),
        }
        out.detail(&format!("histogram_{label}{param}"), hist);
    };
    match spec.target.as_str() {
        "sx" => {
            for &x in &spec.x {
                let c = collect(spec, |_, s| s_x(&ConfigSource::hashed(s), x, SxMode::Greedy));
                let flagged = c.values.iter().filter(|(_, r)| r.lower_bound).count();
                let hist: Histogram = c.values.iter().map(|(_, r)| r.count as i64).collect();
                emit(out, "x", x, &hist);
                out.detail(&format!("lower_bound_flags_x{x}"), flagged);
                out.absorb_errors(c.errors);
            }
        }
        "mj" => {
            for &j in &spec.j {
                let c = collect(spec, |_, s| mj_censored(&ConfigSource::hashed(s), j, spec.cap));
                let hist: Histogram = c.values.iter().map(|(_, d)| d.0 as i64).collect();
                emit(out, "j", j, &hist);
                out.detail(&format!("censored_at_cap_j{j}"), c.values.iter().filter(|(_, d)| d.1).count());
                out.absorb_errors(c.errors);
            }
        }
        "tprime" => {
            let geometry = AnnulusGeometry::new(spec.r, spec.big_r)?;
            let c = collect(spec, |_, s| Ok(geometry.passage(&ConfigSource::hashed(s), false)?.time));
            let hist: Histogram = c.values.iter().map(|(_, t)| *t as i64).collect();
            emit(out, "R", spec.big_r as u32, &hist);
            out.absorb_errors(c.errors);
        }
        _ => unreachable!("validated"),
    }
    Ok(())
}

fn run_shape(spec: &ExperimentSpec, out: &mut Outcome) -> Result<()> {
    for &n in &spec.n {
        let wet = collect(spec, |_, s| shape::wet_sample(&ConfigSource::hashed(s), n, spec.window, spec.max_window));
        // the proxy runs on an independent stream of colorings
        let proxy_seed = crate::mix::mix64(spec.seed ^ 0x70_726f_7879);
        let proxy_spec = ExperimentSpec { seed: proxy_seed, ..spec.clone() };
        let proxy = collect(&proxy_spec, |_, s| shape::proxy_sample(&ConfigSource::hashed(s), n, spec.window, spec.max_window));
        let nf = n as f64;
        for (label, c) in [("wet", &wet), ("proxy", &proxy)] {
            let r_in: MomentAccumulator = c.values.iter().map(|(_, v)| v.r_in).collect();
            let r_out: MomentAccumulator = c.values.iter().map(|(_, v)| v.r_out).collect();
            let ratio: MomentAccumulator = c.values.iter().map(|(_, v)| v.ratio()).collect();
            out.rows.push(Row::from_moments(&format!("{label}_r_in"), nf, &r_in, spec.seed));
            out.rows.push(Row::from_moments(&format!("{label}_r_out"), nf, &r_out, spec.seed));
            out.rows.push(Row::from_moments(&format!("{label}_ratio"), nf, &ratio, spec.seed));
        }
        let a: Vec<f64> = wet.values.iter().map(|(_, v)| v.ratio()).collect();
        let b: Vec<f64> = proxy.values.iter().map(|(_, v)| v.ratio()).collect();
        if let Ok((d, p)) = ks_two_sample(&a, &b) {
            out.summary.push(format!(
                "n = {n}: r_out/r_in KS distance {d} (p {p}) between {} wet hulls and {} cluster loops",
                a.len(),
                b.len()
            ));
            out.detail(&format!("ks_n{n}"), (d, p));
        }
        let inv_in: Vec<f64> = wet.values.iter().map(|(_, v)| v.r_in / v.r_out).collect();
        out.detail(&format!("ratio_pair_n{n}"), (&a, &inv_in));
        out.samples.extend(wet.values.iter().map(|(s, v)| ShapeRow {
            n,
            r_in: v.r_in,
            r_out: v.r_out,
            site_count: v.site_count,
            seed: *s,
        }));
        out.replicas += 2 * spec.reps;
        out.absorb_errors(wet.errors);
        out.absorb_errors(proxy.errors);
    }
    Ok(())
}
