//! Acceptance suite. Runs with a custom harness so that every criterion
//! prints one PASS/FAIL line regardless of the outcome of the others.

mod common;

use std::time::{Duration, Instant};

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use tailprobe::distributions::{self, DistributionSpec};
use tailprobe::ecfm::{Center, ecfm};
use tailprobe::gof;
use tailprobe::rng;
use tailprobe::sim::{self, StudyConfig, StudyReport};
use tailprobe::stats;
use tailprobe::tfr::{SpectrogramConfig, spectrogram};
use tailprobe::verdict::{self, AnalysisConfig, Category, calibrate, subsignal_gof};

struct Outcome {
    pass: bool,
    detail: String,
}

fn spec(s: &str) -> DistributionSpec {
    s.parse().unwrap()
}

fn chains() -> Vec<Vec<String>> {
    [
        ["stable:2:1", "stable:1.9:1", "stable:1.5:1"],
        ["pareto:6:1", "pareto:3:1", "pareto:1.5:1"],
        ["t:6:1", "t:3:1", "t:1.5:1"],
    ]
    .iter()
    .map(|c| c.iter().map(|s| s.to_string()).collect())
    .collect()
}

fn spectrogram_oracle() -> Outcome {
    let mut r = rng::from_seed(101);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = r.random_range(2..=64);
        let len = r.random_range(1..=n.min(32));
        let overlap = r.random_range(0..len);
        let nfft = r.random_range(len..=64);
        let beta = r.random_range(0.0..10.0);
        let x: Vec<f64> = (0..n).map(|_| r.random_range(-5.0..5.0)).collect();
        let cfg = SpectrogramConfig::new(len, beta, overlap, nfft, 1000.0).unwrap();
        let got = spectrogram(&x, &cfg).unwrap();
        let want = common::brute_spectrogram(&x, len, beta, overlap, nfft);
        assert_eq!(got.n_frames(), want.len());
        let scale = want.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        for (i, row) in want.iter().enumerate() {
            for (k, w) in row.iter().enumerate() {
                worst = worst.max((got.values[[i, k]] - w).abs() / scale);
            }
        }
    }
    Outcome {
        pass: worst <= 1e-10,
        detail: format!("max relative error {worst:.2e} over 100 signals (limit 1e-10)"),
    }
}

fn ecfm_plateau() -> Outcome {
    let hits = (0..100u64)
        .filter(|&s| {
            let mut r = rng::from_seed(s);
            let x: Vec<f64> = (0..100_000).map(|_| StandardNormal.sample(&mut r)).collect();
            let c = *ecfm(&x).unwrap().values.last().unwrap();
            (c - 3.0).abs() <= 0.2
        })
        .count();
    Outcome { pass: hits >= 99, detail: format!("|C(n) - 3| <= 0.2 in {hits}/100 runs (need 99)") }
}

fn ecfm_settles() -> Outcome {
    let mut pass = true;
    let mut detail = String::new();
    for law in ["stable:2:1", "pareto:6:1", "t:6:1"] {
        let sp = spec(law);
        let settled = (0..100u64)
            .filter(|&s| {
                let x = distributions::sample(&sp, 10_000, 10_000 + s).unwrap();
                let c = ecfm(&x).unwrap().values;
                let last = *c.last().unwrap();
                c[c.len() / 2..].iter().map(|v| (v - last).abs() / last).fold(0.0, f64::max) < 0.2
            })
            .count();
        pass &= settled >= 95;
        detail.push_str(&format!("{law} {settled}/100; "));
    }
    detail.push_str("(max relative drift over the last half < 0.2, need 95/100 each)");
    Outcome { pass, detail }
}

fn fig13_orderings(report: &StudyReport) -> Outcome {
    let chains = chains();
    let aggregate = chains.iter().all(|c| sim::ordered(report, c));
    let support = sim::ordering_support(report, &chains, 1000, 77);
    let mut detail = format!("aggregate ordered: {aggregate}; bootstrap support {support:.3} (need 0.90)");
    for c in &chains {
        let meds: Vec<String> =
            c.iter().map(|l| format!("{:.3}", report.scenario(l).unwrap().median_of_medians)).collect();
        let iqrs: Vec<String> =
            c.iter().map(|l| format!("{:.3}", report.scenario(l).unwrap().median_of_iqrs)).collect();
        detail.push_str(&format!("\n      {}: median {} | IQR {}", c[0], meds.join(" < "), iqrs.join(" < ")));
    }
    Outcome { pass: aggregate && support >= 0.9, detail }
}

fn category_accuracy(report: &StudyReport) -> Outcome {
    let mut pass = true;
    let mut detail = String::new();
    for s in &report.scenarios {
        let cat = s.expected_category.unwrap();
        let need = match cat {
            Category::Cat1 | Category::Cat4 => 0.9,
            Category::Cat2 | Category::Cat3 => 0.8,
        };
        let acc = s.accuracy.unwrap();
        let ok = acc >= need;
        pass &= ok;
        detail.push_str(&format!(
            "\n      {:<13} expected {} accuracy {:.2} (need {:.2}) {}  [TD infinite {:.2}, TFD infinite {:.2}, chi2 fail {:.2}]",
            s.scenario,
            cat,
            acc,
            need,
            if ok { "ok" } else { "MISS" },
            s.td_infinite_rate,
            s.tfd_infinite_rate,
            s.chi2_fail_rate
        ));
    }
    Outcome { pass, detail }
}

fn chi2_size_power() -> Outcome {
    let n = 10_000;
    let cfg = AnalysisConfig::new(SpectrogramConfig::short_window(sim::DEFAULT_SAMPLE_RATE_HZ));
    let null = calibrate(n, &cfg, 5005).unwrap();
    let pool = |law: &str, seed0: u64| -> Vec<f64> {
        (0..10)
            .flat_map(|s| {
                let x = distributions::sample(&spec(law), n, seed0 + s).unwrap();
                let sg = spectrogram(&x, &cfg.spectrogram).unwrap();
                subsignal_gof(&sg, &null, 0.05).unwrap().bins.into_iter().map(|b| b.p_value)
            })
            .collect()
    };
    let below = |p: &[f64]| p.iter().filter(|v| **v < 0.05).count() as f64 / p.len() as f64;
    let g = pool("stable:2:1", 90_000);
    let s = pool("stable:1.5:1", 91_000);
    let (g_med, g_low, s_low) = (stats::median(&g), below(&g), below(&s));
    Outcome {
        pass: g_med > 0.05 && g_low <= 0.10 && s_low >= 0.95,
        detail: format!(
            "Gaussian: median p {g_med:.3} (need > 0.05), {:.1}% of bins p < 0.05 (need <= 10%); \
             S(1.5,1): {:.1}% of bins p < 0.05 (need >= 95%); {} bins x 10 signals each, B = {}",
            100.0 * g_low,
            100.0 * s_low,
            g.len() / 10,
            null.replicates()
        ),
    }
}

fn sampler_correctness() -> Outcome {
    let laws = ["pareto:1.5:1", "pareto:6:2", "t:3:1", "t:1.5:0.5", "stable:1:1", "stable:2:1"];
    let mut pass = true;
    let mut detail = String::new();
    for law in laws {
        let sp = spec(law);
        let ok = (0..100u64)
            .filter(|&s| {
                let x = distributions::sample(&sp, 10_000, 4_000 + s).unwrap();
                let d = gof::ks_stat(&x, &sp).unwrap();
                common::kolmogorov_pvalue(d, x.len()) > 0.01
            })
            .count();
        pass &= ok >= 95;
        detail.push_str(&format!("{law} {ok}/100; "));
    }
    let n = 1_000_000;
    let x = distributions::sample(&spec("stable:1.5:1"), n, 6_006).unwrap();
    let mut mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let top = n / 100;
    let lx: Vec<f64> = mags[..top].iter().map(|v| v.log10()).collect();
    let ly: Vec<f64> = (1..=top).map(|k| (k as f64 / n as f64).log10()).collect();
    let slope = stats::ols_slope(&lx, &ly);
    let tail_ok = (slope + 1.5).abs() <= 0.15;
    pass &= tail_ok;
    detail
        .push_str(&format!("(need 95/100 each); S(1.5,1) top-1% tail slope {slope:.3} (need -1.5 +/- 0.15)"));
    Outcome { pass, detail }
}

fn determinism() -> Outcome {
    let pool = |k: usize| rayon::ThreadPoolBuilder::new().num_threads(k).build().unwrap();
    let mut acfg = AnalysisConfig::new(SpectrogramConfig::short_window(sim::DEFAULT_SAMPLE_RATE_HZ));
    acfg.null_replicates = 40;
    let x = distributions::sample(&spec("t:3:1"), 6_000, 31).unwrap();
    let analyze = || serde_json::to_string(&verdict::analyze(&x, &acfg, 9).unwrap()).unwrap();
    let study_cfg = StudyConfig {
        scenarios: vec![spec("stable:1.9:1"), spec("pareto:3:1")],
        n: 6_000,
        replicates: 6,
        analysis: acfg,
        seed: 12,
    };
    let study = || {
        let r = sim::run_study(&study_cfg).unwrap();
        format!("{}{}", sim::slopes_csv(&r), serde_json::to_string(&r).unwrap())
    };
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).max(8);
    let a1 = pool(1).install(analyze);
    let a2 = pool(threads).install(analyze);
    let a3 = pool(threads).install(analyze);
    let s1 = pool(1).install(study);
    let s2 = pool(threads).install(study);
    let s3 = pool(threads).install(study);
    let pass = a1 == a2 && a2 == a3 && s1 == s2 && s2 == s3;
    Outcome {
        pass,
        detail: format!("analyze and run_study identical across 1 and {threads} threads, repeated: {pass}"),
    }
}

fn td_examples(report: &StudyReport) -> Outcome {
    let finite = |l: &str| {
        let rows = report.results_for(l);
        rows.iter().filter(|r| r.td_finite).count() as f64 / rows.len() as f64
    };
    let (p6, s15, p3) = (finite("pareto:6:1"), finite("stable:1.5:1"), finite("pareto:3:1"));
    Outcome {
        pass: p6 >= 0.9 && 1.0 - s15 >= 0.95 && p3 > 0.5,
        detail: format!(
            "TD finite rate P(6,1) {p6:.2} (need >= 0.90), P(3,1) {p3:.2} (need > 0.50); \
             TD infinite rate S(1.5,1) {:.2} (need >= 0.95); threshold {:.2e}",
            1.0 - s15,
            report.td_threshold
        ),
    }
}

fn jump_factor_sweep() -> Outcome {
    let mut pass = true;
    let mut detail = String::new();
    let variants: Vec<(String, AnalysisConfig)> = [5.0, 10.0, 20.0]
        .iter()
        .map(|&j| {
            let mut a = AnalysisConfig::new(SpectrogramConfig::short_window(sim::DEFAULT_SAMPLE_RATE_HZ));
            a.segmentation.jump_factor = j;
            (format!("jump_factor {j}"), a)
        })
        .chain(std::iter::once({
            let mut a = AnalysisConfig::new(SpectrogramConfig::short_window(sim::DEFAULT_SAMPLE_RATE_HZ));
            a.normalize.center = Center::Mean;
            ("mean centring".to_string(), a)
        }))
        .collect();
    for (name, analysis) in variants {
        let cfg = StudyConfig { replicates: 20, analysis, seed: 8_000, ..Default::default() };
        let r = sim::run_study(&cfg).unwrap();
        let ordered = chains().iter().all(|c| sim::ordered(&r, c));
        let extremes = ["stable:2:1", "stable:1.5:1", "pareto:1.5:1", "t:1.5:1"];
        let acc: Vec<f64> = extremes.iter().map(|l| r.scenario(l).unwrap().accuracy.unwrap()).collect();
        let ok = ordered && acc.iter().all(|a| *a >= 0.9);
        pass &= ok;
        detail.push_str(&format!(
            "\n      {name:<16} orderings {ordered}, accuracy S(2) {:.2} S(1.5) {:.2} P(1.5) {:.2} T(1.5) {:.2}",
            acc[0], acc[1], acc[2], acc[3]
        ));
    }
    Outcome { pass, detail }
}

fn report(name: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let o = f();
    let took = t.elapsed();
    let in_time = took <= limit;
    let pass = o.pass && in_time;
    println!(
        "{} {name}: {} [{:.1} s, limit {} s]",
        if pass { "PASS" } else { "FAIL" },
        o.detail,
        took.as_secs_f64(),
        limit.as_secs()
    );
    pass
}

fn main() {
    let mins = |m: u64| Duration::from_secs(60 * m);
    let mut results = Vec::new();
    results.push(report("1 spectrogram oracle", Duration::from_secs(5), spectrogram_oracle));
    results.push(report("2 ECFM Gaussian plateau", Duration::from_secs(10), ecfm_plateau));
    results.push(report("2b ECFM plateau for finite fourth moments", mins(1), ecfm_settles));

    let t = Instant::now();
    let study = sim::run_study(&StudyConfig { seed: 2024, ..Default::default() }).unwrap();
    let study_time = t.elapsed();
    println!(
        "     (reference study: 9 scenarios x 50 replicates, n = 10000, {:.1} s)",
        study_time.as_secs_f64()
    );
    results
        .push(report("3 slope orderings", mins(10).saturating_sub(study_time), || fig13_orderings(&study)));
    results.push(report("4 category accuracy", mins(15).saturating_sub(study_time), || {
        category_accuracy(&study)
    }));
    results.push(report("4b time-domain verdict rates", mins(15), || td_examples(&study)));
    results.push(report("4c jump factor and centring robustness", mins(15), jump_factor_sweep));
    results.push(report("5 chi2 size and power", mins(5), chi2_size_power));
    results.push(report("6 sampler correctness", mins(5), sampler_correctness));
    results.push(report("7 determinism", mins(5), determinism));

    let failed = results.iter().filter(|p| !**p).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
