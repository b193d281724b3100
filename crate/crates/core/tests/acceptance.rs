//! Full-scale acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
//!
//! Runs as a plain binary (`harness = false`). Expect roughly half an hour on one core.

use std::time::Instant;

use critfpp::cle::{self, density_check, mgf, n_epsilon_bracket, BSampler};
use critfpp::config::ConfigSource;
use critfpp::experiments::{self, cn_samples, mj_samples, renewal_paths, renewal_samples, sx_samples, tail_fit, tprime_samples, ExperimentSpec, TAIL_MIN_COUNT};
use critfpp::replicate::{default_threads, run_replicas};
use critfpp::shape;
use critfpp::stats::{fit_line, ks_normal, tv_distance, Histogram, MomentAccumulator};
use critfpp::verify;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MU_HALF: f64 = 0.0918881;
const VAR_HALF: f64 = 0.0718573;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn threads() -> usize {
    default_threads()
}

fn exhaustive_identity() -> Outcome {
    let start = Instant::now();
    let rep = verify::prop_equality(1.0, 3.0).unwrap();
    let secs = start.elapsed().as_secs_f64();
    outcome(
        rep.passed() && secs < 120.0,
        format!("{}/{} agree, {} agree with brute force, {:.1} s", rep.agree, rep.total, rep.oracle_agree, secs),
    )
}

fn exhaustive_distribution() -> Outcome {
    let rep = verify::distribution_equality(1.0, 3.0).unwrap();
    outcome(rep.passed(), format!("T′ {:?} vs N {:?}", rep.t_prime, rep.loops))
}

fn exhaustive_bijection() -> Outcome {
    let rep = verify::bijection(1.0, 3.0).unwrap();
    outcome(rep.passed(), format!("over {} colorings, per n {:?}", rep.total, rep.by_n))
}

fn mgf_moments() -> Outcome {
    let h = 1e-4;
    let (mp, m0, mm) = (mgf(h).unwrap(), mgf(0.0).unwrap(), mgf(-h).unwrap());
    let d1 = (mp - mm) / (2.0 * h);
    let var = (mp - 2.0 * m0 + mm) / (h * h) - d1 * d1;
    let c = cle::limit_constants();
    let e_ok = rel(d1, 10.8827962) < 1e-4 && rel(var, 92.6168934) < 1e-4;
    let id_mu = rel(c.mu_half, 1.0 / c.mean_b);
    let id_var = rel(c.var_half, c.var_b / c.mean_b.powi(3));
    outcome(
        e_ok && id_mu < 1e-12 && id_var < 1e-12,
        format!("E[B] ≈ {d1:.7}, Var[B] ≈ {var:.7}; identity errors {id_mu:.1e}, {id_var:.1e}"),
    )
}

fn density_gate() -> Outcome {
    let dc = density_check(&[-5.0, -1.0, 0.0, 0.05]).unwrap();
    let mass_ok = (dc.normalization - 1.0).abs() < 1e-6;
    let worst = dc.mgf.iter().map(|&(_, q, c)| rel(q, c)).fold(0.0, f64::max);
    // sampler moments against the exact ones, with bands from the sample itself
    let sampler = BSampler::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let draws: Vec<f64> = (0..1_000_000).map(|_| sampler.sample(&mut rng)).collect();
    let acc: MomentAccumulator = draws.iter().copied().collect();
    let n = acc.n as f64;
    let s2 = acc.variance().unwrap();
    let m4 = draws.iter().map(|x| (x - acc.mean).powi(4)).sum::<f64>() / n;
    let (mean_b, var_b) = cle::b_moments();
    let z_mean = (acc.mean - mean_b) / (s2 / n).sqrt();
    let z_var = (s2 - var_b) / ((m4 - s2 * s2) / n).sqrt();
    outcome(
        mass_ok && worst < 1e-5 && z_mean.abs() < 3.0 && z_var.abs() < 3.0,
        format!(
            "mass {:.10}, worst MGF error {worst:.1e}, sampler z-scores mean {z_mean:.2} var {z_var:.2}",
            dc.normalization
        ),
    )
}

fn renewal_limits() -> Outcome {
    let t = 1e4;
    let start = Instant::now();
    let counts = renewal_samples(&BSampler::new(), t, 100_000, 6, threads()).unwrap();
    let acc: MomentAccumulator = counts.iter().map(|&c| c as f64).collect();
    let (m, v) = (acc.mean / t, acc.variance().unwrap() / t);
    let secs = start.elapsed().as_secs_f64();
    outcome(
        rel(m, MU_HALF) < 0.005 && rel(v, VAR_HALF) < 0.03 && secs < 600.0,
        format!("E[N_t]/t = {m:.7}, Var[N_t]/t = {v:.7}, {secs:.0} s"),
    )
}

const CN_GRID: [u32; 5] = [128, 256, 512, 1024, 2048];

struct CnStats {
    means: Vec<f64>,
    vars: Vec<f64>,
    top: Vec<f64>,
}

fn cn_stats() -> CnStats {
    let samples = cn_samples(&CN_GRID, 2000, 7, threads()).unwrap();
    let mut accs = vec![MomentAccumulator::new(); CN_GRID.len()];
    for row in &samples {
        for (a, &c) in accs.iter_mut().zip(row) {
            a.push(c as f64);
        }
    }
    CnStats {
        means: accs.iter().map(|a| a.mean).collect(),
        vars: accs.iter().map(|a| a.variance().unwrap()).collect(),
        top: samples.iter().map(|r| *r.last().unwrap() as f64).collect(),
    }
}

fn log_grid() -> Vec<f64> {
    CN_GRID.iter().map(|&n| (n as f64).ln()).collect()
}

fn mean_slope(s: &CnStats) -> Outcome {
    let step = MU_HALF * std::f64::consts::LN_2;
    // increments from n = 512 on
    let incs: Vec<f64> = s.means.windows(2).skip(2).map(|w| w[1] - w[0]).collect();
    let incs_ok = incs.iter().all(|d| rel(*d, step) <= 0.2);
    let fit = fit_line(&log_grid(), &s.means).unwrap();
    outcome(
        incs_ok && (0.073..=0.110).contains(&fit.slope),
        format!("means {:?}, increments {:?} vs {step:.7}, slope {:.4}", round4(&s.means), round4(&incs), fit.slope),
    )
}

fn variance_slope(s: &CnStats) -> Outcome {
    let fit = fit_line(&log_grid(), &s.vars).unwrap();
    outcome(
        rel(fit.slope, VAR_HALF) <= 0.25,
        format!("variances {:?}, slope {:.4} vs {VAR_HALF}", round4(&s.vars), fit.slope),
    )
}

fn clt(s: &CnStats) -> Outcome {
    let acc: MomentAccumulator = s.top.iter().copied().collect();
    let sd = acc.variance().unwrap().sqrt();
    let z: Vec<f64> = s.top.iter().map(|x| (x - acc.mean) / sd).collect();
    let (d, p) = ks_normal(&z).unwrap();
    let distinct = {
        let mut v: Vec<i64> = s.top.iter().map(|&x| x as i64).collect();
        v.sort();
        v.dedup();
        v.len()
    };
    outcome(p > 1e-3, format!("KS distance {d:.4}, p {p:.3e} over {} samples on {distinct} distinct values", z.len()))
}

fn annulus_convergence() -> Outcome {
    let hists: Vec<Histogram> = [64.0, 256.0, 1024.0]
        .iter()
        .map(|&r| tprime_samples(r, 2.0 * r, 10_000, 9, threads()).unwrap().into_iter().map(|t| t as i64).collect())
        .collect();
    let d1 = tv_distance(&hists[0], &hists[1]).unwrap();
    let d2 = tv_distance(&hists[1], &hists[2]).unwrap();
    let mean = hists[2].mean().unwrap();
    let eps: f64 = 0.5;
    let paths = renewal_paths(&BSampler::new(), (1.0 / eps).ln(), 100_000, 10, threads());
    let (mut lo, mut hi) = (MomentAccumulator::new(), MomentAccumulator::new());
    for p in &paths {
        let (l, h) = n_epsilon_bracket(eps, p).unwrap();
        lo.push(l as f64);
        hi.push(h as f64);
    }
    let (a, b) = (lo.mean - 0.5, hi.mean + 0.5);
    outcome(
        d2 <= d1 && d2 < 0.05 && (a..=b).contains(&mean),
        format!("tv {d1:.4} then {d2:.4}; mean T′ at 1024 = {mean:.4} in [{a:.4}, {b:.4}]"),
    )
}

fn tails() -> Outcome {
    let reps = 10_000;
    let mut lines = Vec::new();
    let mut ok = true;
    let mut check = |label: String, hist: Histogram| match tail_fit(&hist, TAIL_MIN_COUNT) {
        Ok((pts, fit)) => {
            ok &= fit.slope < 0.0 && fit.r_squared > 0.9;
            lines.push(format!("{label}: slope {:.3e}, R² {:.3} on {} points", fit.slope, fit.r_squared, pts.len()));
        }
        Err(e) => {
            ok = false;
            lines.push(format!("{label}: no fit ({e})"));
        }
    };
    for x in [3, 5] {
        let h: Histogram = sx_samples(x, reps, 11, threads()).unwrap().into_iter().map(|(c, _)| c as i64).collect();
        check(format!("S_{x}"), h);
    }
    for (j, cap) in [(3, 8), (5, 6)] {
        let h: Histogram = mj_samples(j, cap, reps, 12, threads()).unwrap().into_iter().map(|(d, _)| d as i64).collect();
        check(format!("m({j}) − {j}, censored at {cap}"), h);
    }
    outcome(ok, lines.join("; "))
}

fn shape_identity() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for n in [1u32, 2] {
        let checks = run_replicas(13 + n as u64, 1000, threads(), |_, s| {
            shape::identity_check(&ConfigSource::hashed(s), n, 32.0, 512.0).unwrap()
        });
        let fitted = checks.iter().flatten().count();
        let bad = checks.iter().flatten().filter(|m| !m.matched).count();
        ok &= bad == 0;
        parts.push(format!("n = {n}: {fitted}/1000 windows contain the loop, {bad} mismatches"));
    }
    outcome(ok, parts.join("; "))
}

fn small_specs() -> Vec<ExperimentSpec> {
    let mk = |command: &str, target: &str, kv: &[(&str, &str)]| {
        let mut s = ExperimentSpec::new(command, target);
        for (k, v) in kv {
            s.set(k, v).unwrap();
        }
        s
    };
    vec![
        mk("verify", "prop-equality", &[("r", "1"), ("R", "3"), ("reps", "200"), ("seed", "1")]),
        mk("verify", "shape-identity", &[("n", "1,2"), ("reps", "100"), ("seed", "3"), ("max_window", "128")]),
        mk("estimate", "cn", &[("n", "32,128"), ("reps", "100"), ("seed", "4")]),
        mk("estimate", "b0n", &[("n", "16"), ("reps", "50"), ("seed", "5")]),
        mk("estimate", "t0nu", &[("n", "8"), ("reps", "50"), ("seed", "6")]),
        mk("estimate", "tprime", &[("r", "8"), ("R", "32"), ("reps", "200"), ("seed", "7")]),
        mk("cle", "renewal", &[("t", "500"), ("epsilon", "0.001"), ("reps", "2000"), ("seed", "8")]),
        mk("tails", "sx", &[("x", "1,2"), ("reps", "200"), ("seed", "9")]),
        mk("tails", "mj", &[("j", "2"), ("cap", "4"), ("reps", "100"), ("seed", "10")]),
        mk("tails", "tprime", &[("r", "4"), ("R", "32"), ("reps", "200"), ("seed", "11")]),
        mk("shape", "", &[("n", "1"), ("reps", "100"), ("seed", "12"), ("max_window", "128")]),
    ]
}

fn determinism() -> Outcome {
    let mut differing = Vec::new();
    let specs = small_specs();
    for spec in &specs {
        let values: Vec<(String, String, String)> = [1usize, 4, 16]
            .iter()
            .map(|&t| {
                let rep = experiments::run(&ExperimentSpec { threads: t, ..spec.clone() }).unwrap();
                (rep.to_csv(), experiments::samples_to_csv(&rep.samples), rep.details.to_string())
            })
            .collect();
        if values.windows(2).any(|w| w[0] != w[1]) {
            differing.push(format!("{} {}", spec.command, spec.target));
        }
    }
    outcome(differing.is_empty(), format!("{} experiments at threads 1, 4, 16; differing: {differing:?}", specs.len()))
}

fn round4(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| (x * 1e4).round() / 1e4).collect()
}

fn main() {
    // `cargo test` passes harness flags such as `--quiet`; only a name filter matters here
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let wanted = |k: u32| filter.is_empty() || filter.contains(&k);
    let mut cn: Option<CnStats> = None;
    let mut failures = 0;
    for k in 1..=13u32 {
        if !wanted(k) {
            continue;
        }
        let start = Instant::now();
        let o = match k {
            1 => exhaustive_identity(),
            2 => exhaustive_distribution(),
            3 => exhaustive_bijection(),
            4 => mgf_moments(),
            5 => density_gate(),
            6 => renewal_limits(),
            7 => mean_slope(cn.get_or_insert_with(cn_stats)),
            8 => variance_slope(cn.get_or_insert_with(cn_stats)),
            9 => annulus_convergence(),
            10 => tails(),
            11 => clt(cn.get_or_insert_with(cn_stats)),
            12 => shape_identity(),
            13 => determinism(),
            _ => unreachable!(),
        };
        failures += !o.pass as u32;
        println!(
            "criterion {k:>2}: {} ({:.0} s) {}",
            if o.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            o.detail
        );
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
