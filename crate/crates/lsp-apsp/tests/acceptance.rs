//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

use std::collections::BTreeMap;
use std::time::Instant;

use lsp_apsp::experiments::{aggregate, run_churn, run_experiment, ExperimentKind, ExperimentSpec};
use lsp_apsp_core::oracle::{all_pairs_dijkstra, dist_matches, enumerate_lsps, verify_path_system, VerifyMode};
use lsp_apsp_core::stats::{harmonic, reference_values};
use lsp_apsp_core::{
    solve_apsp, EdgeUpdateSampler, MonotoneBucketQueue, PairQueue, PathSystem, QueueKind, Seed, WeightModel,
    WeightedDigraph,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn first_mismatch(actual: &[f64], expected: &[f64]) -> Option<(usize, f64, f64)> {
    actual
        .iter()
        .zip(expected)
        .enumerate()
        .find(|(_, (&a, &e))| !dist_matches(a, e))
        .map(|(i, (&a, &e))| (i, a, e))
}

fn static_correctness() -> Outcome {
    let mut solves = 0;
    for n in [10, 50, 200] {
        for seed in 0..50 {
            let g = WeightedDigraph::gen_complete(n, WeightModel::Uniform01, Seed(seed)).unwrap();
            let expected = all_pairs_dijkstra(&g);
            for kind in [QueueKind::Bucket, QueueKind::Comparison] {
                let res = solve_apsp(&g, kind).map_err(|e| e.to_string())?;
                if let Some((i, a, e)) = first_mismatch(&res.dist, &expected) {
                    return Err(format!("n={n} seed={seed} {kind:?}: pair {i} got {a}, Dijkstra {e}"));
                }
                solves += 1;
            }
        }
    }
    Ok(format!("{solves} solves match Dijkstra at 1e-9"))
}

fn lsp_exactly_once() -> Outcome {
    let mut cases = 0;
    for n in [4, 8, 16, 30] {
        for seed in 0..30 {
            let g = WeightedDigraph::gen_complete(n, WeightModel::Uniform01, Seed(1000 + seed)).unwrap();
            let lsps = enumerate_lsps(&g).map_err(|e| format!("n={n} seed={seed}: {e}"))?;
            let res = solve_apsp(&g, QueueKind::Bucket).unwrap();
            if res.examined_lsp_count + g.edge_count() as u64 != lsps.len() as u64 {
                return Err(format!(
                    "n={n} seed={seed}: examined {} + |E| {} != {}",
                    res.examined_lsp_count,
                    g.edge_count(),
                    lsps.len()
                ));
            }
            let sys = PathSystem::init(&g).unwrap();
            let stored: Vec<Vec<usize>> = sys.stored_lsps().into_iter().map(|l| l.vertices).collect();
            let expected: Vec<Vec<usize>> = lsps.into_iter().map(|l| l.vertices).collect();
            if stored != expected {
                return Err(format!("n={n} seed={seed}: stored LSP set differs from enumeration"));
            }
            cases += 1;
        }
    }
    Ok(format!("{cases} instances: counts and stored sets match enumeration"))
}

fn dynamic_equivalence() -> Outcome {
    let g = WeightedDigraph::gen_complete(40, WeightModel::Uniform01, Seed(40)).unwrap();
    let mut sys = PathSystem::init(&g).unwrap();
    let mut sampler = EdgeUpdateSampler::new(&g, WeightModel::Uniform01, Seed(41)).unwrap();
    for i in 0..100 {
        sys.apply_update(&[sampler.next_update()]).map_err(|e| e.to_string())?;
        let fresh = PathSystem::init(&sys.graph()).unwrap();
        if let Some((p, a, e)) = first_mismatch(sys.dist_table(), fresh.dist_table()) {
            return Err(format!("n=40 update {i}: pair {p} got {a}, re-init {e}"));
        }
        let seqs = |s: &PathSystem| s.stored_lsps().into_iter().map(|l| l.vertices).collect::<Vec<_>>();
        if seqs(&sys) != seqs(&fresh) {
            return Err(format!("n=40 update {i}: stored LSP set differs from re-init"));
        }
    }
    let g = WeightedDigraph::gen_complete(300, WeightModel::Uniform01, Seed(300)).unwrap();
    let mut sys = PathSystem::init(&g).unwrap();
    let mut current = g.clone();
    let mut sampler = EdgeUpdateSampler::new(&g, WeightModel::Uniform01, Seed(301)).unwrap();
    for i in 1..=100 {
        let ((u, v), w) = sampler.next_update();
        sys.apply_update(&[((u, v), w)]).map_err(|e| e.to_string())?;
        current.set_weight(u, v, w).unwrap();
        if i % 10 == 0 {
            let report = verify_path_system(&sys, &current, VerifyMode::DistOnly).unwrap();
            if !report.pass {
                return Err(format!("n=300 update {i}: {:?}", report.dist_mismatches.first()));
            }
        }
    }
    Ok("n=40: 100 updates equal re-init; n=300: 10 dist-only checks pass".into())
}

fn lsp_density() -> Outcome {
    let spec = ExperimentSpec::new(ExperimentKind::LspDensity, 1000, 10, WeightModel::Uniform01, Seed(4));
    let rows = run_experiment(&spec).map_err(|e| e.to_string())?;
    let mean = aggregate(&rows, 1000, "lsp_per_n2").unwrap().value;
    check((2.2..=3.1).contains(&mean), format!("mean |LSP|/n² = {mean:.4} (band [2.2, 3.1], target 2.645)"))
}

fn distance_mean() -> Outcome {
    let spec = ExperimentSpec::new(ExperimentKind::DistanceStats, 500, 5, WeightModel::Exponential1, Seed(5));
    let rows = run_experiment(&spec).map_err(|e| e.to_string())?;
    let mean = aggregate(&rows, 500, "distance").unwrap().value;
    let reference = harmonic(499) / 499.0;
    let rel = (mean - reference).abs() / reference;
    check(rel <= 0.05, format!("grand mean {mean:.6} vs H499/499 = {reference:.6} (rel err {rel:.4}, limit 0.05)"))
}

fn edge_sp_probability() -> Outcome {
    let spec = ExperimentSpec::new(ExperimentKind::EdgeSpProb, 500, 5, WeightModel::Exponential1, Seed(6));
    let rows = run_experiment(&spec).map_err(|e| e.to_string())?;
    let frac = aggregate(&rows, 500, "edge_sp_fraction").unwrap().value;
    let reference = reference_values(500).unwrap().mean_distance;
    let rel = (frac - reference).abs() / reference;
    check(rel <= 0.10, format!("|E*|/|E| = {frac:.6} vs H499/499 = {reference:.6} (rel err {rel:.4}, limit 0.10)"))
}

fn hop_count() -> Outcome {
    let spec = ExperimentSpec::new(ExperimentKind::HopStats, 1000, 3, WeightModel::Uniform01, Seed(7));
    let rows = run_experiment(&spec).map_err(|e| e.to_string())?;
    let hops = aggregate(&rows, 1000, "hops").unwrap().value;
    let ln = (1000f64).ln();
    let rel = (hops - ln).abs() / ln;
    check(rel <= 0.15, format!("mean hops {hops:.4} vs ln 1000 = {ln:.4} (rel err {rel:.4}, limit 0.15)"))
}

fn churn_bounds() -> Outcome {
    let n = 500;
    let g = WeightedDigraph::gen_complete(n, WeightModel::Uniform01, Seed(8)).unwrap();
    let rows = run_churn(&g, WeightModel::Uniform01, Seed(8), 1000, false).map_err(|e| e.to_string())?;
    let asymmetric = rows.iter().filter(|r| r.report.sp_minus != r.report.sp_plus).count();
    let mean = |f: fn(&lsp_apsp::io::ChurnRow) -> u64| rows.iter().map(|r| f(r) as f64).sum::<f64>() / rows.len() as f64;
    let sp = mean(|r| r.report.sp_minus);
    let lsp = mean(|r| r.report.lsp_minus);
    let ln = (n as f64).ln();
    let detail = format!(
        "{asymmetric} asymmetric rows; mean sp_minus {sp:.3} (limit {:.2}); mean lsp_minus {lsp:.2} (limit {:.1})",
        3.0 * ln,
        10.0 * ln * ln
    );
    check(asymmetric == 0 && sp <= 3.0 * ln && lsp <= 10.0 * ln * ln, detail)
}

fn scaling() -> Outcome {
    let mut spec = ExperimentSpec::new(ExperimentKind::ExamineScaling, 2000, 3, WeightModel::Uniform01, Seed(9));
    spec.sizes = vec![500, 2000];
    let rows = run_experiment(&spec).map_err(|e| e.to_string())?;
    let small = aggregate(&rows, 500, "examined_per_n2").unwrap().value;
    let large = aggregate(&rows, 2000, "examined_per_n2").unwrap().value;
    check(
        large <= 1.5 * small,
        format!("examined/n²: {small:.4} at n=500, {large:.4} at n=2000 (ratio {:.3}, limit 1.5)", large / small),
    )
}

fn bucket_differential() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut extractions = 0usize;
    for seq in 0..200 {
        let cap = rng.gen_range(1..200);
        let delta: f64 = rng.gen_range(1e-3..1.0);
        let buckets = rng.gen_range(2..400);
        let mut q = MonotoneBucketQueue::new(delta, buckets, cap).unwrap();
        let mut shadow: BTreeMap<usize, f64> = BTreeMap::new();
        let mut floor = 0.0f64;
        for _ in 0..rng.gen_range(10..600) {
            if rng.gen_bool(0.6) {
                let pair = rng.gen_range(0..cap);
                let key = floor + rng.gen_range(0.0..4.0 * delta * buckets as f64);
                match shadow.get(&pair) {
                    Some(&old) if old <= key => continue,
                    _ => {}
                }
                q.insert_or_decrease(pair, key).map_err(|e| format!("sequence {seq}: {e}"))?;
                shadow.insert(pair, key);
            } else if let Some((pair, key)) = q.extract_min() {
                if shadow.remove(&pair) != Some(key) {
                    return Err(format!("sequence {seq}: extracted unknown pair {pair}"));
                }
                if let Some(min) = shadow.values().copied().reduce(f64::min) {
                    if !(key < min + delta) {
                        return Err(format!("sequence {seq}: extracted {key} but {min} remains (δ = {delta})"));
                    }
                }
                floor = floor.max(key);
                extractions += 1;
            }
        }
    }
    let mut solves = 0;
    for seed in 0..200u64 {
        let n = rng.gen_range(2..60);
        let p = rng.gen_range(0.05..=1.0);
        let model = match seed % 3 {
            0 => WeightModel::Uniform01,
            1 => WeightModel::Exponential1,
            _ => WeightModel::IntegerUniform { max: 20 },
        };
        let g = WeightedDigraph::gen_gnp(n, p, model, Seed(seed)).unwrap();
        let bucket = solve_apsp(&g, QueueKind::Bucket).unwrap();
        let heap = solve_apsp(&g, QueueKind::Comparison).unwrap();
        if let Some((i, a, e)) = first_mismatch(&bucket.dist, &heap.dist) {
            return Err(format!("graph {seed}: pair {i} bucket {a}, heap {e}"));
        }
        solves += 1;
    }
    Ok(format!("δ-slack held on {extractions} extractions over 200 sequences; {solves} solves agree"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("static correctness", static_correctness),
        ("LSP exactly-once", lsp_exactly_once),
        ("dynamic equivalence", dynamic_equivalence),
        ("LSP density", lsp_density),
        ("distance mean", distance_mean),
        ("edge-SP probability", edge_sp_probability),
        ("hop count", hop_count),
        ("churn bounds", churn_bounds),
        ("scaling", scaling),
        ("bucket-queue differential", bucket_differential),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = (i + 1).to_string();
        if !filter.is_empty() && !filter.iter().any(|x| x == &id) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {id:>2} {name} [{secs:.1}s]: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {id:>2} {name} [{secs:.1}s]: {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
