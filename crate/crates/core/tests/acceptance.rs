//! Acceptance suite: one PASS/FAIL line per criterion, each at its stated
//! tolerance. Exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use decoherence::experiments::{emit_csv, preset, run_scenario, Method, Scenario, Spectrum, Trajectory};
use decoherence::gaussian::{entropy_from_delta, PhaseSpaceArea};

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, n: u32, title: &str, pass: bool, detail: String) {
        if !pass {
            self.failures += 1;
        }
        println!(
            "criterion {n:>2} [{title}]: {} ({detail})",
            if pass { "PASS" } else { "FAIL" }
        );
    }
}

fn with_seed(mut s: Scenario, seed: u64) -> Scenario {
    if let Spectrum::Uniform { seed: ref mut sd, .. } = s.spectrum {
        *sd = seed;
    }
    s.name = format!("{}_seed{seed}", s.name);
    s
}

fn entropies(tr: &Trajectory, m: Method) -> Vec<f64> {
    tr.series(m)
        .unwrap()
        .entropies()
        .into_iter()
        .map(|v| v.unwrap_or(f64::NAN))
        .collect()
}

fn csv_bytes(tr: &Trajectory, dir: &std::path::Path, tag: &str) -> Vec<u8> {
    let p = dir.join(format!("{tag}.csv"));
    emit_csv(tr, &p).unwrap();
    std::fs::read(&p).unwrap()
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut jobs: Vec<(String, Scenario)> = Vec::new();
    let n1_presets = ["fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7"];
    let bath_presets = ["fig8", "fig9", "fig10", "fig11", "fig12", "nonresonant"];
    for name in n1_presets.iter().chain(&bath_presets) {
        jobs.push((name.to_string(), preset(name).unwrap()));
    }
    for seed in 2..=5 {
        jobs.push((format!("nonresonant_seed{seed}"), with_seed(preset("nonresonant").unwrap(), seed)));
    }
    // criterion 2 grid: 200 samples over [0, 50]
    for name in ["fig1", "fig2"] {
        let mut s = preset(name).unwrap();
        s.t_end = 50.0;
        s.sample_count = 200;
        jobs.push((format!("{name}_grid200"), s));
    }
    // criterion 3 reduced coupling
    let mut weak = preset("fig1").unwrap();
    weak.lambda = 1.0 / 8.0;
    jobs.push(("fig1_weak".into(), weak));
    // criterion 10 re-runs
    for name in ["fig1", "fig6", "fig7", "fig8"] {
        jobs.push((format!("{name}_rerun"), preset(name).unwrap()));
    }

    let results: BTreeMap<String, Trajectory> = std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|(k, s)| scope.spawn(move || (k.clone(), run_scenario(s).expect(k))))
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let get = |k: &str| &results[k];
    let mut r = Report { failures: 0 };

    // 1
    let s = entropy_from_delta(PhaseSpaceArea::from_delta(1.0 / 1.0_f64.tanh()).unwrap());
    r.line(1, "entropy formula", (s - 0.458).abs() <= 1e-3, format!("S(coth 1) = {s:.6}, tolerance 1e-3 around 0.458"));

    // 2
    let mut worst = 0.0f64;
    for name in ["fig1_grid200", "fig2_grid200"] {
        let tr = get(name);
        let a = entropies(tr, Method::Exact);
        let b = entropies(tr, Method::AnalyticN1);
        let c = entropies(tr, Method::DensityMatrixN1);
        for i in 0..a.len() {
            for d in [(a[i] - b[i]).abs(), (a[i] - c[i]).abs(), (b[i] - c[i]).abs()] {
                worst = worst.max(if d.is_nan() { f64::INFINITY } else { d });
            }
        }
    }
    r.line(2, "oracle triangle", worst <= 1e-6, format!("max pairwise |dS| = {worst:.2e} over 200 points x 2 presets, tolerance 1e-6"));

    // 3
    let max_dev = |tr: &Trajectory| {
        let ex = tr.series(Method::Exact).unwrap();
        let ms = tr.series(Method::MasterCorrelator).unwrap();
        (0..tr.times.len())
            .filter(|&i| tr.times[i] <= 25.0 + 1e-9)
            .map(|i| {
                let a = ex.delta_squared[i].unwrap().sqrt();
                let b = ms.delta_squared[i].unwrap().max(0.0).sqrt();
                (a - b).abs()
            })
            .fold(0.0f64, f64::max)
    };
    let (strong, weak) = (max_dev(get("fig1")), max_dev(get("fig1_weak")));
    r.line(
        3,
        "perturbative agreement",
        strong < 0.15 && weak < 0.02 && strong / weak >= 5.0,
        format!("max |dDelta| = {strong:.4} (< 0.15) at lambda 1/2, {weak:.2e} (< 0.02) at 1/8, shrink {:.0}x (>= 5)", strong / weak),
    );

    // 4
    let tr = get("fig6");
    let ex = entropies(tr, Method::Exact);
    let ms = entropies(tr, Method::MasterCorrelator);
    let mut running = 0.0f64;
    let mut crossing = None;
    for i in 0..ex.len() {
        running = running.max(ex[i]);
        if crossing.is_none() && ms[i] > 2.0 * running {
            crossing = Some(tr.times[i]);
        }
    }
    let exact_max = ex.iter().cloned().fold(0.0, f64::max);
    let bounded = exact_max <= tr.s_th + 0.5;
    r.line(
        4,
        "resonant breakdown",
        crossing.is_some_and(|t| t < 100.0) && bounded,
        format!(
            "master S first exceeds 2x exact running max at t = {} (needed < 100); exact max S = {exact_max:.4} <= S_th + 0.5 = {:.4}: {bounded}",
            crossing.map_or("never".into(), |t| format!("{t:.1}")),
            tr.s_th + 0.5
        ),
    );

    // 5
    let tr = get("fig8");
    let fired = tr.series(Method::MasterCorrelator).unwrap().breakdown;
    let c = tr.conservation.unwrap();
    let completed = tr.series(Method::Exact).unwrap().error.is_none() && *tr.times.last().unwrap() >= 600.0;
    r.line(
        5,
        "N=50 secular destabilization",
        fired.is_some_and(|t| (200.0..=400.0).contains(&t)) && completed && c.energy_drift < 1e-8,
        format!(
            "detector fires at t = {} (window [200, 400]); exact run to t = 600: {completed}, energy drift {:.1e} (< 1e-8)",
            fired.map_or("never".into(), |t| format!("{t:.1}")),
            c.energy_drift
        ),
    );

    // 6
    let tr = get("fig7");
    let ser = tr.series(Method::Exact).unwrap();
    let (mut dd, mut smax) = (0.0f64, 0.0f64);
    for i in 0..tr.times.len() {
        dd = dd.max((ser.delta_squared[i].unwrap().sqrt() - 1.0).abs());
        smax = smax.max(ser.entropy(i).unwrap_or(f64::INFINITY));
    }
    r.line(
        6,
        "time-translation-invariant state",
        dd <= 1e-8 && smax < 1e-7 && *tr.times.last().unwrap() >= 100.0,
        format!("max |Delta_S - 1| = {dd:.1e} (<= 1e-8), max S_S = {smax:.1e} (< 1e-7) over [0, 100]"),
    );

    // 7
    let mut worst = (0.0f64, 0.0f64, f64::INFINITY);
    for name in n1_presets.iter().chain(&bath_presets) {
        let c = get(name).conservation.unwrap();
        worst.0 = worst.0.max(c.energy_drift);
        worst.1 = worst.1.max(c.det_drift);
        worst.2 = worst.2.min(c.min_subsystem_delta);
    }
    r.line(
        7,
        "conservation suite",
        worst.0 < 1e-8 && worst.1 < 1e-8 && worst.2 >= 1.0 - 1e-9,
        format!(
            "over 13 presets: energy drift {:.1e}, det drift {:.1e} (both < 1e-8), min subsystem Delta {:.12} (>= 1 - 1e-9)",
            worst.0, worst.1, worst.2
        ),
    );

    // 8
    let mut avgs = Vec::new();
    for k in ["nonresonant", "nonresonant_seed2", "nonresonant_seed3", "nonresonant_seed4", "nonresonant_seed5"] {
        let tr = get(k);
        let s = entropies(tr, Method::Exact);
        let second: Vec<f64> = (0..s.len()).filter(|&i| tr.times[i] >= 150.0).map(|i| s[i]).collect();
        avgs.push(second.iter().sum::<f64>() / second.len() as f64);
    }
    r.line(
        8,
        "nonresonant weak-coupling average",
        avgs.iter().all(|a| (0.03..=0.15).contains(a)),
        format!("second-half mean S_S for seeds 1-5: {}; band [0.03, 0.15]", avgs.iter().map(|a| format!("{a:.4}")).collect::<Vec<_>>().join(", ")),
    );

    // 9
    let s5 = entropies(get("fig5"), Method::Exact);
    let s11 = entropies(get("fig11"), Method::Exact);
    let min5 = s5.iter().skip_while(|&&v| v <= 0.05).cloned().fold(f64::INFINITY, f64::min);
    let min11 = s11.iter().skip_while(|&&v| v <= 0.05).cloned().fold(f64::INFINITY, f64::min);
    let same_horizon = get("fig5").times.last() == get("fig11").times.last();
    r.line(
        9,
        "recurrence contrast",
        min5 < 0.05 && min11 > 0.05 && same_horizon,
        format!("after the initial rise: fig5 min S_S = {min5:.2e} (< 0.05), fig11 min S_S = {min11:.4} (> 0.05), shared horizon {same_horizon}"),
    );

    // 10
    let dir = tempfile::tempdir().unwrap();
    let identical: Vec<(String, bool)> = ["fig1", "fig6", "fig7", "fig8"]
        .iter()
        .map(|n| {
            let a = csv_bytes(get(n), dir.path(), &format!("{n}_a"));
            let b = csv_bytes(get(&format!("{n}_rerun")), dir.path(), &format!("{n}_b"));
            (n.to_string(), a == b)
        })
        .collect();
    r.line(
        10,
        "determinism",
        identical.iter().all(|(_, ok)| *ok),
        format!("byte-identical CSV on re-run: {}", identical.iter().map(|(n, ok)| format!("{n}={ok}")).collect::<Vec<_>>().join(" ")),
    );

    // informational: the second-order master equation dips below Delta^2 = 1
    // by O(lambda^4) near the recurrences, which trips the Delta^2 clause
    let notes: Vec<String> = ["fig1", "fig2", "fig3", "fig4"]
        .iter()
        .map(|n| {
            let ser = get(n).series(Method::MasterCorrelator).unwrap();
            let min = ser.delta_squared.iter().flatten().cloned().fold(f64::INFINITY, f64::min);
            let t = ser.breakdown.map_or("none".into(), |t| format!("{t:.1}"));
            format!("{n}: fires at {t}, min Delta^2 {min:.4}")
        })
        .collect();
    println!("note: detector on master runs of the single-mode presets: {}", notes.join("; "));

    println!(
        "acceptance: {} of 10 criteria passed in {:.1} s",
        10 - r.failures,
        start.elapsed().as_secs_f64()
    );
    if r.failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
