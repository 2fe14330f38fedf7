mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use geomca::harness::{
    eta_sweep, generate_clusters, mode_truncation, sample_size_sweep, separability_sweep,
    ClusterSpec, ModeTruncationConfig, SampleSizeConfig,
};
use geomca::ipr::balance;
use geomca::{
    build_epsilon_graph, estimate_epsilon, evaluate, ipr, run_geomca, sparsify, GeomcaParams,
    GraphOptions, PointSet, ReportOptions, SetLabel,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FORMULA_TOL: f64 = 1e-12;
const FORMULA_LIMIT: Duration = Duration::from_secs(60);
const TRUNCATION_LIMIT: Duration = Duration::from_secs(120);
const TRUNCATION_FLOOR: f64 = 0.9;
const PLATEAU_LIMIT: Duration = Duration::from_secs(120);
const PLATEAU_CLASSES: usize = 7;
const PLATEAU_MIN_SIZE: u64 = 100;
const SIZE_DRIFT: f64 = 0.15;
const SIZE_MIN: usize = 500;
const SIZE_LIMIT: Duration = Duration::from_secs(120);
const PERF_LIMIT: Duration = Duration::from_secs(60);
const PERF_MAX_EDGES: u64 = 1_000_000;
const PERF_MAX_RSS_KB: u64 = 2 * 1024 * 1024;

/// Greedy first-fit sparsification is not monotone in delta: the points
/// (5,5), (4,2), (1,2), (5,0) keep 2 at delta = 3 and 3 at delta = 4. The
/// criterion is still checked as stated and reported as failing.
const KNOWN_FAILURES: &[usize] = &[7];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= FORMULA_TOL
}

fn formula_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut failures = Vec::new();
    for case in 0..200 {
        let (r, e) = random_fixture(&mut rng, 200);
        let epsilon = random_epsilon(&mut rng, &r, &e);
        let delta = rng
            .random_bool(0.5)
            .then(|| epsilon * rng.random_range(0.2..=1.0));
        let eta = [0.0, 0.25, 0.5, 0.75];
        let (eta_c, eta_q) = (eta[rng.random_range(0..4)], eta[rng.random_range(0..4)]);
        let params = GeomcaParams {
            epsilon,
            delta,
            eta_c,
            eta_q,
        };
        let report = run_geomca(&r, &e, &params, &ReportOptions { include_members: true }).unwrap();
        let want = oracle_pipeline(&r, &e, epsilon, delta, eta_c, eta_q);

        let by_members: BTreeMap<(Vec<usize>, Vec<usize>), &OracleComponent> = want
            .components
            .iter()
            .map(|c| ((c.members_r.clone(), c.members_e.clone()), c))
            .collect();
        let mut ok = report.components.len() == want.components.len()
            && report.graph.num_edges == want.num_edges;
        for comp in &report.components {
            let mut mr = comp.members_r.clone().unwrap();
            let mut me = comp.members_e.clone().unwrap();
            mr.sort_unstable();
            me.sort_unstable();
            ok &= comp.v_r as usize == mr.len() && comp.v_e as usize == me.len();
            match by_members.get(&(mr, me)) {
                Some(o) => {
                    ok &= comp.e_rr == o.e_rr
                        && comp.e_ee == o.e_ee
                        && comp.e_het == o.e_het
                        && close(comp.c, o.c)
                        && close(comp.q, o.q);
                }
                None => ok = false,
            }
        }
        let g = &report.global;
        ok &= close(g.precision, want.precision)
            && close(g.recall, want.recall)
            && close(g.network_consistency, want.network_c)
            && close(g.network_quality, want.network_q);
        if !ok {
            failures.push(case);
        }
    }
    let elapsed = start.elapsed();
    outcome(
        failures.is_empty() && elapsed < FORMULA_LIMIT,
        format!("200 fixtures, mismatches {failures:?}, {elapsed:.1?}"),
    )
}

fn partition_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut failures = Vec::new();
    for case in 0..100 {
        let (r, e) = random_fixture(&mut rng, 500);
        let epsilon = random_epsilon(&mut rng, &r, &e);
        let g = build_epsilon_graph(&r, &e, epsilon).unwrap();
        let n_r = r.len();
        let got: BTreeSet<Vec<usize>> = g
            .components()
            .iter()
            .map(|c| {
                let mut v: Vec<usize> = c.members_r.clone();
                v.extend(c.members_e.iter().map(|j| n_r + j));
                v.sort_unstable();
                v
            })
            .collect();
        let all = r.concat(&e).unwrap();
        let n = all.len();
        let adj: Vec<Vec<bool>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| i != j && d(all.row(i), all.row(j)) < epsilon)
                    .collect()
            })
            .collect();
        if got != closure_classes(&adj) || got.len() != g.components().len() {
            failures.push(case);
        }
    }
    outcome(failures.is_empty(), format!("100 fixtures, mismatches {failures:?}"))
}

fn truncation_trend() -> Outcome {
    let start = Instant::now();
    let spec = ClusterSpec::boxes(1.0, 1.0, 10.0, 1);
    let cfg = ModeTruncationConfig {
        ipr_k: None,
        ..ModeTruncationConfig::default()
    };
    let res = mode_truncation(&spec, &cfg).unwrap();
    let recall: Vec<f64> = res.rows[..=6].iter().map(|r| r.recall).collect();
    let monotone = recall.windows(2).all(|w| w[0] <= w[1]);
    let (p6, r6, p11) = (res.rows[6].precision, res.rows[6].recall, res.rows[11].precision);
    let elapsed = start.elapsed();
    outcome(
        monotone
            && p11 < p6
            && p6 >= TRUNCATION_FLOOR
            && r6 >= TRUNCATION_FLOOR
            && elapsed < TRUNCATION_LIMIT,
        format!(
            "R(0..6) {:?}, P(6) {p6:.3}, R(6) {r6:.3}, P(11) {p11:.3}, {elapsed:.1?}",
            recall.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>()
        ),
    )
}

fn separability_plateau() -> Outcome {
    let start = Instant::now();
    let separation = 40.0;
    let spec = ClusterSpec::uniform(PLATEAU_CLASSES, 12, 300, 300, 1.0, separation, 4);
    let (lo, hi) = (0.5, separation);
    let eps: Vec<f64> = (0..=20).map(|i| lo + i as f64 * (hi - lo) / 20.0).collect();
    let res = separability_sweep(&spec, &eps, PLATEAU_MIN_SIZE).unwrap();
    let counts: Vec<usize> = res.rows.iter().map(|r| r.large_components.unwrap()).collect();
    let (mid_lo, mid_hi) = (lo + 0.2 * (hi - lo), hi - 0.2 * (hi - lo));
    let plateau = eps
        .iter()
        .zip(&counts)
        .filter(|(e, _)| **e >= mid_lo && **e <= mid_hi)
        .all(|(_, &c)| c == PLATEAU_CLASSES);
    let elapsed = start.elapsed();
    outcome(
        plateau && counts[0] == 0 && counts[20] == 1 && elapsed < PLATEAU_LIMIT,
        format!("counts {counts:?} over eps {lo}..{hi}, {elapsed:.1?}"),
    )
}

fn eta_monotonicity() -> Outcome {
    let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut fixtures: Vec<(PointSet, PointSet, f64)> = (0..20)
        .map(|_| {
            let (r, e) = random_fixture(&mut rng, 300);
            let eps = random_epsilon(&mut rng, &r, &e);
            (r, e, eps)
        })
        .collect();
    let data = generate_clusters(&ClusterSpec::uniform(4, 8, 150, 150, 1.0, 6.0, 5)).unwrap();
    let eps = estimate_epsilon(&data.train.points, 5.0, 150, 0).unwrap().epsilon;
    fixtures.push((data.train.points, data.holdout.points, eps));

    let mut failures = Vec::new();
    for (case, (r, e, epsilon)) in fixtures.iter().enumerate() {
        let ev = evaluate(r, e, &GeomcaParams::new(*epsilon), &GraphOptions::default()).unwrap();
        let res = eta_sweep(&ev, &grid, &grid).unwrap();
        let zero_at_one = res
            .rows
            .iter()
            .filter(|row| row.coords.contains(&1.0))
            .all(|row| row.precision == 0.0 && row.recall == 0.0);
        if !res.all_checks_hold() || !zero_at_one {
            failures.push(case);
        }
    }
    outcome(
        failures.is_empty(),
        format!("{} fixtures on an 11 x 11 grid, failing {failures:?}", fixtures.len()),
    )
}

fn delta_equals_epsilon() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut failures = Vec::new();
    let mut with_edges = 0;
    for case in 0..50 {
        let (r, e) = random_fixture(&mut rng, 300);
        let epsilon = random_epsilon(&mut rng, &r, &e);
        let params = GeomcaParams {
            delta: Some(epsilon),
            ..GeomcaParams::new(epsilon)
        };
        let ev = evaluate(&r, &e, &params, &GraphOptions::default()).unwrap();
        let mut ok = true;
        for (comp, score) in ev.graph.components().iter().zip(&ev.local.scores) {
            if comp.e_total() > 0 {
                ok &= comp.counts.e_rr == 0 && comp.counts.e_ee == 0 && score.quality == 1.0;
            }
        }
        if ev.graph.num_edges() > 0 {
            with_edges += 1;
            ok &= ev.network.quality == 1.0;
        }
        if !ok {
            failures.push(case);
        }
    }
    outcome(
        failures.is_empty(),
        format!("50 fixtures ({with_edges} with edges), failing {failures:?}"),
    )
}

fn sparsify_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut broken_separation, mut broken_cover, mut non_monotone) = (0, 0, Vec::new());
    let mut first_rise = String::new();
    for case in 0..100 {
        let (r, e) = random_fixture(&mut rng, 300);
        let w = r.concat(&e).unwrap();
        let scale = random_epsilon(&mut rng, &r, &e);
        let deltas: Vec<f64> = (0..=8).map(|i| scale * i as f64 / 4.0).collect();
        let mut kept_counts = Vec::new();
        for &delta in &deltas {
            let s = sparsify(&w, delta).unwrap();
            let separated = s.kept.iter().enumerate().all(|(a, &i)| {
                s.kept[a + 1..]
                    .iter()
                    .all(|&j| d(w.row(i), w.row(j)) > delta)
            });
            let kept: BTreeSet<usize> = s.kept.iter().copied().collect();
            let covered = (0..w.len()).all(|i| {
                kept.contains(&i)
                    || s.cover
                        .get(&i)
                        .is_some_and(|&k| kept.contains(&k) && d(w.row(i), w.row(k)) <= delta)
            }) && s.cover.len() + s.kept.len() == w.len();
            broken_separation += usize::from(!separated);
            broken_cover += usize::from(!covered);
            kept_counts.push(s.num_kept());
        }
        if kept_counts.windows(2).any(|p| p[1] > p[0]) {
            if non_monotone.is_empty() {
                first_rise = format!(", kept counts {kept_counts:?} for delta = i/4 * {scale:.3}");
            }
            non_monotone.push(case);
        }
    }
    outcome(
        broken_separation == 0 && broken_cover == 0 && non_monotone.is_empty(),
        format!(
            "separation violations {broken_separation}, cover violations {broken_cover}, \
             fixtures with a kept count rising in delta {non_monotone:?}{first_rise}"
        ),
    )
}

fn sample_size_robustness() -> Outcome {
    let start = Instant::now();
    let spec = ClusterSpec::uniform(2, 12, 2500, 2500, 1.0, 10.0, 8);
    let res = sample_size_sweep(&spec, &SampleSizeConfig::default()).unwrap();
    let full = res.rows.last().unwrap();
    let mut worst: f64 = 0.0;
    for row in res.rows.iter().filter(|r| r.coords[0] >= SIZE_MIN as f64) {
        worst = worst
            .max((row.precision - full.precision).abs())
            .max((row.recall - full.recall).abs());
    }
    let elapsed = start.elapsed();
    outcome(
        full.n_r == 5000 && worst <= SIZE_DRIFT && elapsed < SIZE_LIMIT,
        format!(
            "full P {:.3} R {:.3}, worst drift {worst:.3} for sizes >= {SIZE_MIN}, {elapsed:.1?}",
            full.precision, full.recall
        ),
    )
}

fn ipr_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut failures = Vec::new();
    let mut case = 0;
    while case < 50 {
        let (r, e) = random_fixture(&mut rng, 1000);
        if r.len() < 4 || e.len() < 4 {
            continue;
        }
        let seed = rng.random();
        let got = ipr(&r, &e, 3, seed).unwrap();
        let (rb, eb) = balance(&r, &e, seed).unwrap();
        let want = oracle_ipr(&rb, &eb, 3);
        let same = ipr(&r, &r.clone().with_label(SetLabel::Evaluation), 3, seed).unwrap();
        if (got.precision, got.recall) != want || same.precision != 1.0 || same.recall != 1.0 {
            failures.push(case);
        }
        case += 1;
    }
    outcome(failures.is_empty(), format!("50 fixtures with k = 3, failing {failures:?}"))
}

fn determinism() -> Outcome {
    let data = generate_clusters(&ClusterSpec::uniform(4, 16, 1200, 1200, 1.0, 6.0, 10)).unwrap();
    let (r, e) = (&data.train.points, &data.holdout.points);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            let est = estimate_epsilon(r, 5.0, 500, 3).unwrap();
            let params = GeomcaParams {
                epsilon: est.epsilon,
                delta: Some(est.epsilon * 0.05),
                eta_c: 0.5,
                eta_q: 0.3,
            };
            run_geomca(r, e, &params, &ReportOptions { include_members: true })
                .unwrap()
                .with_epsilon_estimate(est)
                .with_ipr(ipr(r, e, 3, 3).unwrap())
                .to_json_pretty()
        })
    };
    let reference = run(1);
    let others = [run(2), run(8), run(8), run(1)];
    let identical = others.iter().all(|o| *o == reference);
    outcome(
        identical,
        format!(
            "{} + {} points, {} report bytes, runs at 1/2/8/8/1 threads identical: {identical}",
            r.len(),
            e.len(),
            reference.len()
        ),
    )
}

fn peak_rss_kb() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    status
        .lines()
        .find_map(|l| l.strip_prefix("VmHWM:"))?
        .split_whitespace()
        .next()?
        .parse()
        .ok()
}

fn performance() -> Outcome {
    let data = generate_clusters(&ClusterSpec::uniform(10, 128, 500, 500, 1.0, 10.0, 11)).unwrap();
    let (r, e) = (&data.train.points, &data.holdout.points);
    let epsilon = estimate_epsilon(r, 0.5, 1000, 0).unwrap().epsilon;
    let start = Instant::now();
    let g = build_epsilon_graph(r, e, epsilon).unwrap();
    let elapsed = start.elapsed();
    let rss = peak_rss_kb();
    let rss_ok = rss.is_some_and(|kb| kb < PERF_MAX_RSS_KB);
    outcome(
        g.num_vertices() == 10_000
            && g.num_edges() < PERF_MAX_EDGES
            && elapsed < PERF_LIMIT
            && rss_ok,
        format!(
            "10000 x 128, {} edges, {} components, {elapsed:.2?}, peak RSS {} MiB",
            g.num_edges(),
            g.components().len(),
            rss.map_or("unknown".into(), |kb| (kb / 1024).to_string())
        ),
    )
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 11] = [
        ("formula oracle", formula_oracle),
        ("component partition oracle", partition_oracle),
        ("mode truncation trend", truncation_trend),
        ("separability plateau", separability_plateau),
        ("eta monotonicity", eta_monotonicity),
        ("delta = epsilon quality", delta_equals_epsilon),
        ("sparsification invariants", sparsify_invariants),
        ("sample-size robustness", sample_size_robustness),
        ("IPR oracle", ipr_oracle),
        ("determinism across threads", determinism),
        ("performance smoke", performance),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {:>2}. {name}: {}", i + 1, o.detail);
        if !o.pass {
            failed.push(i + 1);
        }
    }
    let passed = criteria.len() - failed.len();
    println!(
        "acceptance: {passed}/{} pass, failing {failed:?}, known failures {KNOWN_FAILURES:?}",
        criteria.len()
    );
    if failed.iter().all(|i| KNOWN_FAILURES.contains(i)) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
