//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use chanocc_core::occupancy::{receiver_rx_power, sender_gate, OccupancyRegistry, RandomStream, StreamKind};
use chanocc_core::sim::{run_scenario, FlowConfig, ScenarioConfig};
use chanocc_core::tracekit::{
    compute_channel_occupancy, derive_busy_other, derive_busy_trace, parse_survey_log, read_busy_trace,
    write_busy_trace, BusyTrace, NetworkMembership, Occupancy,
};
use chanocc_tools::preset::{run_variants, Direction, PresetName, Variant};
use chanocc_tools::report::{self, round2, Table};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

/// Failures collected while checking one criterion.
#[derive(Default)]
struct Checks {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Checks {
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn note(&mut self, what: impl Into<String>) {
        self.notes.push(what.into());
    }
}

struct Criterion {
    id: &'static str,
    title: &'static str,
    budget: Duration,
    run: fn(&mut Checks),
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("chanocc-acceptance-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

// ---------------------------------------------------------------- 1

/// Foreign busy time per node, straight from the definition.
fn busy_other_oracle(rows: &[(u32, u32, u32)], members: &[u32]) -> BTreeMap<u32, f64> {
    rows.iter()
        .map(|&(node, busy, _)| {
            let others: i64 = rows
                .iter()
                .filter(|&&(n, _, _)| n != node && members.contains(&n))
                .map(|&(_, _, tx)| i64::from(tx))
                .sum();
            let residue = (i64::from(busy) - others).max(0) as f64;
            (node, (residue / 1000.0).min(1.0))
        })
        .collect()
}

fn occupancy_derivation(c: &mut Checks) {
    // (node, busy_total, tx) per window; active is always the full window.
    let windows: [&[(u32, u32, u32)]; 4] = [
        &[(0, 700, 100), (1, 500, 200), (2, 650, 300)],
        // Node 0 heard less than the others sent: clamps to zero.
        &[(0, 300, 0), (1, 900, 250), (2, 800, 250)],
        &[(0, 0, 0), (1, 0, 0), (2, 0, 0)],
        &[(0, 1000, 0), (1, 1000, 0), (2, 1000, 1000)],
    ];
    for members in [&[0u32, 1, 2][..], &[0, 1][..]] {
        let mut csv = String::from("node,window_start_ms,active_ms,busy_total_ms,tx_ms\n");
        for (w, rows) in windows.iter().enumerate() {
            for &(node, busy, tx) in rows.iter() {
                csv.push_str(&format!("{node},{},1000,{busy},{tx}\n", w * 1000));
            }
        }
        let log = parse_survey_log(&csv, 1000).unwrap();
        let membership = NetworkMembership::new(members.iter().copied()).unwrap();
        for &node in members {
            let trace = derive_busy_trace(&log, node, &membership, 1000).unwrap();
            for (w, rows) in windows.iter().enumerate() {
                let expected = busy_other_oracle(rows, members)[&node];
                let samples: Vec<_> = log.iter().filter(|s| s.window_index(1000) == w as u64).copied().collect();
                let direct = derive_busy_other(&samples, node, &membership).unwrap();
                let co = compute_channel_occupancy(direct, 1000);
                c.check(co == expected, format!("members {members:?} node {node} window {w}: {co} != {expected}"));
                let stored = trace.at_window(w as u64).fraction();
                c.check(stored == expected, format!("trace node {node} window {w}: {stored} != {expected}"));
            }
        }
    }
    c.check(compute_channel_occupancy(1200, 1000) == 1.0, "ratio above one is not clamped");
    c.check(compute_channel_occupancy(0, 1000) == 0.0, "zero busy time");
    c.check(compute_channel_occupancy(250, 1000) == 0.25, "plain ratio");
}

// ---------------------------------------------------------------- 2

fn gate_statistics(c: &mut Checks) {
    let branches = [(0.5, 0.49, true), (0.5, 0.5, false), (0.5, 0.51, false), (0.0, 0.0, false), (1.0, 0.999_999, true)];
    for (co, draw, blocked) in branches {
        let rx = receiver_rx_power(16.0, co, draw);
        c.check(rx == if blocked { -1000.0 } else { 16.0 }, format!("rx power co {co} draw {draw}: {rx}"));
        c.check(sender_gate(co, draw).is_blocked() == blocked, format!("sender gate co {co} draw {draw}"));
    }
    const N: u32 = 1_000_000;
    for co in [0.1, 0.37, 0.5, 0.9] {
        let mut tx = RandomStream::for_node(42, StreamKind::Sender, 0);
        let mut rx = RandomStream::for_node(42, StreamKind::Receiver, 1);
        let blocked = (0..N).filter(|_| sender_gate(co, tx.uniform()).is_blocked()).count();
        let silenced = (0..N).filter(|_| receiver_rx_power(16.0, co, rx.uniform()) == -1000.0).count();
        for (what, n) in [("sender", blocked), ("receiver", silenced)] {
            let frac = n as f64 / f64::from(N);
            c.check((frac - co).abs() <= 0.005, format!("{what} c={co}: blocked fraction {frac:.5}"));
            c.note(format!("{what} c={co}: {frac:.4}"));
        }
    }
}

// ---------------------------------------------------------------- 3

fn saturation_oracle_mbps() -> f64 {
    let symbols = |bytes: f64, mbps: f64| ((16.0 + 8.0 * bytes + 6.0) / (4.0 * mbps)).ceil();
    let data = 20.0 + 4.0 * symbols(1470.0 + 28.0 + 36.0, 54.0);
    let ack = 20.0 + 4.0 * symbols(14.0, 24.0);
    1470.0 * 8.0 / (34.0 + 7.5 * 9.0 + data + 16.0 + ack)
}

fn saturation_baseline(c: &mut Checks) {
    let mut config = ScenarioConfig::two_nodes();
    config.flows.push(FlowConfig::saturated(0, 0, 1));
    config.duration_ms = 10_000;
    let mean = run_scenario(&config).unwrap().series[0].mean().unwrap();
    let oracle = saturation_oracle_mbps();
    c.note(format!("mean {mean:.3} Mbit/s, cycle oracle {oracle:.3}, reference 29.26"));
    c.check((mean - oracle).abs() / oracle <= 0.02, format!("{mean:.3} not within 2% of {oracle:.3}"));
    c.check((mean - 29.26).abs() / 29.26 <= 0.10, format!("{mean:.3} not within 10% of 29.26"));
}

// ---------------------------------------------------------------- 4

fn plateau_means(mbps: &[f64], first_window: usize) -> Vec<f64> {
    (0..6).map(|k| mbps[first_window + 5 * k..first_window + 5 * k + 5].iter().sum::<f64>() / 5.0).collect()
}

fn staircase_shape(c: &mut Checks) {
    let dir = scratch("staircase");
    let variants = [Variant::ReceiverOnly, Variant::SenderOnly, Variant::Both];
    let run = run_variants(PresetName::SyntheticStaircase, &variants, Direction::AtoB, 1, &dir).unwrap();
    for v in &run.variants {
        let mbps = &v.output.series[0].mbps;
        let mut phases = Vec::new();
        if v.variant.interference() {
            phases.push(("receiver", 0));
        }
        if v.variant.sender_gate() {
            phases.push(("sender", 30));
        }
        for (phase, first) in phases {
            let means = plateau_means(mbps, first);
            let t_max = means[0];
            let ratios: Vec<String> = means.iter().map(|m| format!("{:.3}", m / t_max)).collect();
            c.note(format!("{} {phase} phase: T_max {t_max:.2}, ratios [{}]", v.variant, ratios.join(", ")));
            for (k, m) in means.iter().enumerate() {
                let target = (1.0 - 0.1 * k as f64) * t_max;
                c.check(
                    (m - target).abs() <= 0.1 * target,
                    format!("{} {phase} c={:.1}: {m:.2} outside {target:.2} +/- 10%", v.variant, 0.1 * k as f64),
                );
            }
        }
    }
    let _ = fs::remove_dir_all(&dir);
}

// ---------------------------------------------------------------- 5

fn bidirectional_contention(c: &mut Checks) {
    let dir = scratch("bidir");
    let run = run_variants(PresetName::SyntheticStaircase, &[Variant::Baseline], Direction::Bidirectional, 1, &dir)
        .unwrap();
    for s in &run.variants[0].output.series {
        let mean = report::summarize(s, None).unwrap();
        c.note(format!("flow {}: {mean:.3} Mbit/s per direction", s.flow));
        c.check((mean - 13.48).abs() / 13.48 <= 0.15, format!("flow {}: {mean:.3} not within 15% of 13.48", s.flow));
    }
    let _ = fs::remove_dir_all(&dir);
}

// ---------------------------------------------------------------- 6

fn end_to_end(c: &mut Checks) {
    let root = scratch("controlled");
    for &direction in Direction::ALL {
        run_variants(PresetName::ControlledInterference, Variant::ALL, direction, 1, &root.join(direction.as_str()))
            .unwrap();
    }
    let table = report::table_from_runs(&root, Variant::SenderOnly).unwrap();
    for r in &table.occupancy.rows {
        c.note(format!("exp {} {}: reference {:.2}, candidate {:.2}, error {:.2}%", r.experiment, r.flow, r.reference, r.candidate, r.error_pct));
    }
    let occ = table.occupancy.average_pct;
    let base = table.baseline.average_pct;
    c.note(format!("average error: sender-only {occ:.2}%, baseline {base:.2}%"));
    for other in [Variant::ReceiverOnly, Variant::Both] {
        let t = report::table_from_runs(&root, other).unwrap();
        c.note(format!("average error with {other} as candidate: {:.2}%", t.occupancy.average_pct));
    }
    c.check(occ < 15.0, format!("reproduction error {occ:.2}% not below 15%"));
    c.check(base > 40.0, format!("baseline error {base:.2}% not above 40%"));
    let _ = fs::remove_dir_all(&root);
}

// ---------------------------------------------------------------- 7

fn report_arithmetic(c: &mut Checks) {
    let table = Table::testbed_fixture();
    let err = |r: f64, x: f64| (x - r).abs() / r * 100.0;
    let means = [(17.92, 16.67, 29.26), (18.05, 14.29, 29.25), (8.55, 9.90, 13.48)];
    let stated = [(6.96, 63.28), (20.98, 65.50), (7.53, 27.57)];

    let friis1 = round2(table.baseline.rows[0].error_pct);
    c.check(friis1 == 63.28, format!("exp 1 baseline error {friis1} != 63.28"));
    let occ1 = table.occupancy.rows[0].error_pct;
    c.check((occ1 - 6.96).abs() <= 0.2, format!("exp 1 occupancy error {occ1:.2} not within 0.2 of 6.96"));
    let occ2 = table.occupancy.rows[1].error_pct;
    c.check((occ2 - 20.98).abs() <= 0.2, format!("exp 2 occupancy error {occ2:.2} not within 0.2 of 20.98"));

    let mut expected = Vec::new();
    let (mut occ_sum, mut base_sum) = (0.0, 0.0);
    for (i, ((r, o, b), (po, pb))) in means.iter().zip(stated).enumerate() {
        let (eo, eb) = (err(*r, *o), err(*r, *b));
        occ_sum += eo;
        base_sum += eb;
        if (round2(eo) - po).abs() > 0.2 {
            expected.push(format!("{} occupancy", i + 1));
        }
        if (round2(eb) - pb).abs() > 0.2 {
            expected.push(format!("{} baseline", i + 1));
        }
    }
    if (round2(occ_sum / 3.0) - 11.83).abs() > 0.2 {
        expected.push("average occupancy".into());
    }
    if (round2(base_sum / 3.0) - 51.12).abs() > 0.2 {
        expected.push("average baseline".into());
    }
    let checks = table.checks();
    let flagged: Vec<String> = checks.iter().filter(|k| k.divergent).map(|k| k.cell.clone()).collect();
    c.check(flagged == expected, format!("flagged {flagged:?}, expected {expected:?}"));
    for k in checks.iter().filter(|k| k.divergent) {
        c.note(format!("flagged {}: computed {:.2}, stated {:.2}", k.cell, k.computed, k.stated));
    }
    let csv = table.to_csv();
    c.check(csv.contains("1,A->B,17.92,16.67,29.26,6.98,63.28,6.96,63.28,ok"), "table CSV row 1");
}

// ---------------------------------------------------------------- 8

fn snapshot(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_owned()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().to_owned(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn determinism(c: &mut Checks) {
    for (name, direction) in [
        (PresetName::SyntheticStaircase, Direction::AtoB),
        (PresetName::ControlledInterference, Direction::Bidirectional),
    ] {
        let (a, b) = (scratch("det-a"), scratch("det-b"));
        for dir in [&a, &b] {
            run_variants(name, Variant::ALL, direction, 9, dir).unwrap();
        }
        let (sa, sb) = (snapshot(&a), snapshot(&b));
        c.check(!sa.is_empty() && sa == sb, format!("{name} {direction}: outputs differ between identical runs"));
        c.note(format!("{name} {direction}: {} files identical", sa.len()));
        let _ = fs::remove_dir_all(&a);
        let _ = fs::remove_dir_all(&b);
    }

    let traces = (1u32..2000, proptest::collection::btree_map(0u64..5000, 0u32..=1_000_000, 0..80));
    let mut runner = TestRunner::new(Config { cases: 512, failure_persistence: None, ..Config::default() });
    let result = runner.run(&traces, |(window_ms, samples)| {
        let mut t = BusyTrace::new(3, window_ms).unwrap();
        for (w, ppm) in samples {
            t.push(w, Occupancy::from_ppm(ppm).unwrap()).unwrap();
        }
        let mut text = String::new();
        write_busy_trace(&t, &mut text).unwrap();
        let back = read_busy_trace(&text, 3, window_ms).unwrap();
        prop_assert_eq!(&back, &t);
        let mut again = String::new();
        write_busy_trace(&back, &mut again).unwrap();
        prop_assert_eq!(again, text);
        Ok(())
    });
    c.check(result.is_ok(), format!("trace round trip: {result:?}"));
}

// ---------------------------------------------------------------- invariant

fn constant(node: u32, co: f64) -> BusyTrace {
    BusyTrace::from_levels(node, 1000, vec![Occupancy::from_fraction(co).unwrap(); 5]).unwrap()
}

/// Saturated 5 s run with constant occupancy on the receiver (node 1) or
/// the sender (node 0), relative to the same run without occupancy.
fn response_ratio(receiver: bool, co: f64, seed: u64) -> f64 {
    let run = |co: Option<f64>| {
        let mut config = ScenarioConfig::two_nodes();
        config.flows.push(FlowConfig::saturated(0, 0, 1));
        config.duration_ms = 5000;
        config.seed = seed;
        if let Some(co) = co {
            if receiver {
                config.occupancy.interference = Some(OccupancyRegistry::new().with(1, "rx", constant(1, co)));
            } else {
                config.occupancy.sender_gate = Some(OccupancyRegistry::new().with(0, "tx", constant(0, co)));
            }
        }
        run_scenario(&config).unwrap().series[0].mean().unwrap()
    };
    run(Some(co)) / run(None)
}

fn occupancy_response(c: &mut Checks) {
    for (name, receiver) in [("receiver", true), ("sender", false)] {
        let curve: Vec<String> =
            [0.1, 0.2, 0.3, 0.4, 0.5, 0.7, 0.9].iter().map(|&co| format!("{co}:{:.3}", response_ratio(receiver, co, 1))).collect();
        c.note(format!("{name} ratio by c: {}", curve.join(" ")));
        let mut runner = TestRunner::new(Config { cases: 48, failure_persistence: None, ..Config::default() });
        let result = runner.run(&(0.0f64..=1.0, 0u64..1000), |(co, seed)| {
            let ratio = response_ratio(receiver, co, seed);
            prop_assert!((ratio - (1.0 - co)).abs() <= 0.1, "c {:.4}: ratio {:.4}", co, ratio);
            Ok(())
        });
        if let Err(e) = result {
            c.check(false, format!("{name}: {e}"));
        }
    }
}

fn main() {
    let criteria = [
        Criterion { id: "1", title: "busy-time derivation matches the oracle exactly", budget: Duration::from_secs(1), run: occupancy_derivation },
        Criterion { id: "2", title: "gate branches exact, blocked fraction within c +/- 0.005", budget: Duration::from_secs(5), run: gate_statistics },
        Criterion { id: "3", title: "zero-occupancy saturation throughput", budget: Duration::from_secs(10), run: saturation_baseline },
        Criterion { id: "4", title: "staircase plateaus within (1-c)*T_max +/- 10%", budget: Duration::from_secs(30), run: staircase_shape },
        Criterion { id: "5", title: "bidirectional per-direction mean within 15% of 13.48", budget: Duration::MAX, run: bidirectional_contention },
        Criterion { id: "6", title: "emulation vs reproduction error < 15%, baseline > 40%", budget: Duration::from_secs(120), run: end_to_end },
        Criterion { id: "7", title: "fixture table arithmetic and divergence flags", budget: Duration::MAX, run: report_arithmetic },
        Criterion { id: "8", title: "byte-identical reruns and trace round trip", budget: Duration::MAX, run: determinism },
        Criterion { id: "inv", title: "constant occupancy scales throughput to (1-c) +/- 0.1", budget: Duration::MAX, run: occupancy_response },
    ];

    let mut failed = Vec::new();
    for criterion in &criteria {
        let mut checks = Checks::default();
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(|| (criterion.run)(&mut checks)));
        let elapsed = start.elapsed();
        if let Err(panic) = outcome {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            checks.failures.push(format!("panicked: {msg}"));
        }
        if elapsed > criterion.budget {
            checks.failures.push(format!("took {:.2} s, budget {:.0} s", elapsed.as_secs_f64(), criterion.budget.as_secs_f64()));
        }
        let pass = checks.failures.is_empty();
        println!(
            "{} criterion {:>3}: {} ({:.2} s)",
            if pass { "PASS" } else { "FAIL" },
            criterion.id,
            criterion.title,
            elapsed.as_secs_f64()
        );
        for n in &checks.notes {
            println!("       {n}");
        }
        for f in &checks.failures {
            println!("     ! {f}");
        }
        if !pass {
            failed.push(criterion.id);
        }
    }
    println!(
        "\nacceptance: {} of {} criteria passed{}",
        criteria.len() - failed.len(),
        criteria.len(),
        if failed.is_empty() { String::new() } else { format!("; failed: {}", failed.join(", ")) }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
