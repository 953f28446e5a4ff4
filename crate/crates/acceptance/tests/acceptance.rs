//! Acceptance suite: one PASS/FAIL line per criterion. Exits nonzero if
//! any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;
use synopsviz_acceptance::{gen, goldens, oracle};
use synopsviz_core::hierarchy::Strategy;
use synopsviz_core::{
    build_hierarchy, compute_dataset_stats, infer_schema, ingest, resolve_selection,
    FacetSelection, HierarchyConfig, PointSet, RdfFormat, Term, ValueKind,
};

const TOL: f64 = 1e-9;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(problems: Vec<String>, summary: String) -> Outcome {
    match problems.first() {
        None => Outcome {
            pass: true,
            detail: summary,
        },
        Some(first) => Outcome {
            pass: false,
            detail: format!("{summary}; {} problem(s), first: {first}", problems.len()),
        },
    }
}

fn within(o: Outcome, elapsed: Duration, limit: Duration) -> Outcome {
    let detail = format!("{} in {:.2?} (limit {limit:?})", o.detail, elapsed);
    Outcome {
        pass: o.pass && elapsed < limit,
        detail,
    }
}

fn stats_oracle() -> Outcome {
    let start = Instant::now();
    let mut problems = Vec::new();
    let mut total = 0;
    for seed in 0..200u64 {
        let mut r = gen::rng(seed);
        let triples = gen::random_triples(&mut r, 10_000);
        total += triples.len();
        let top_n = r.random_range(1..=15);
        let store = match ingest(gen::to_ntriples(&triples).as_bytes(), RdfFormat::NTriples) {
            Ok(s) => s,
            Err(e) => {
                problems.push(format!("seed {seed}: {e}"));
                continue;
            }
        };
        let got = compute_dataset_stats(&store, &infer_schema(&store), top_n);
        let want = oracle::dataset_stats(&triples, top_n);
        problems.extend(
            oracle::diff_stats(&got, &want)
                .into_iter()
                .map(|p| format!("seed {seed}: {p}")),
        );
    }
    within(
        outcome(problems, format!("200 stores, {total} generated triples")),
        start.elapsed(),
        Duration::from_secs(60),
    )
}

fn random_config(r: &mut impl Rng) -> HierarchyConfig {
    let strategy = if r.random_bool(0.5) {
        Strategy::EqualWidth
    } else {
        Strategy::EqualFrequency
    };
    let mut c = HierarchyConfig::new(strategy, r.random_range(1..=4), r.random_range(2..=16));
    c.sample_size = r.random_range(0..=5);
    c
}

/// Runs the binning oracle and the merge check over the same 500 trees.
fn hierarchy_oracles() -> (Outcome, Outcome) {
    let start = Instant::now();
    let mut binning = Vec::new();
    let mut merging = Vec::new();
    let mut nodes = 0;
    for seed in 0..500u64 {
        let mut r = gen::rng(1_000 + seed);
        let ps = gen::random_point_set(&mut r, 5_000);
        let config = random_config(&mut r);
        let tree = match build_hierarchy(ps.clone(), config) {
            Ok(t) => t,
            Err(e) => {
                binning.push(format!("seed {seed}: {e}"));
                continue;
            }
        };
        nodes += tree.node_count();
        merging.extend(
            oracle::check_merge(&tree, TOL)
                .into_iter()
                .map(|p| format!("seed {seed}: {p}")),
        );
        if tree.leaf_point_reads() != 0 {
            merging.push(format!(
                "seed {seed}: {} leaf point reads during drill-down",
                tree.leaf_point_reads()
            ));
        }
        let reference = oracle::reference_tree(&ps, &config);
        binning.extend(
            oracle::check_hierarchy(&tree, &reference, TOL)
                .into_iter()
                .map(|p| format!("seed {seed} ({config:?}): {p}")),
        );
    }
    let elapsed = start.elapsed();
    (
        within(
            outcome(binning, format!("500 point sets, {nodes} nodes")),
            elapsed,
            Duration::from_secs(60),
        ),
        outcome(
            merging,
            format!("{nodes} nodes, zero leaf-point reads required"),
        ),
    )
}

fn determinism() -> Outcome {
    let mut problems = Vec::new();
    let mut checked = 0;
    for (fixture, property) in goldens::CASES {
        let format = if fixture.ends_with(".ttl") {
            RdfFormat::Turtle
        } else {
            RdfFormat::NTriples
        };
        for strategy in [Strategy::EqualWidth, Strategy::EqualFrequency] {
            let render = || -> Result<Vec<u8>, String> {
                let bytes =
                    std::fs::read(goldens::fixture_path(fixture)).map_err(|e| e.to_string())?;
                let store = ingest(bytes.as_slice(), format).map_err(|e| e.to_string())?;
                let summary = infer_schema(&store);
                let points =
                    resolve_selection(&store, &summary, &FacetSelection::property(*property))
                        .map_err(|e| e.to_string())?;
                let tree = build_hierarchy(points, HierarchyConfig::new(strategy, 3, 3))
                    .map_err(|e| e.to_string())?;
                serde_json::to_vec(&tree.to_nested()).map_err(|e| e.to_string())
            };
            match (render(), render()) {
                (Ok(a), Ok(b)) if a == b => checked += 1,
                (Ok(_), Ok(_)) => {
                    problems.push(format!("{fixture} {strategy}: serializations differ"))
                }
                (Err(e), _) | (_, Err(e)) => problems.push(format!("{fixture} {strategy}: {e}")),
            }
        }
    }
    outcome(
        problems,
        format!("{checked} fixture hierarchies rebuilt twice"),
    )
}

fn fixture_goldens(rt: &tokio::runtime::Runtime) -> Outcome {
    let problems = rt.block_on(goldens::check_all());
    outcome(
        problems,
        format!(
            "{} fixtures x {} endpoints",
            goldens::CASES.len(),
            goldens::ENDPOINTS.len()
        ),
    )
}

fn million_points() -> PointSet {
    let mut r = gen::rng(99);
    let pairs = (0..1_000_000).map(|i| {
        (
            Term::iri(format!("http://ex.org/e{}", i / 2)),
            r.random_range(0.0..1e6),
        )
    });
    PointSet::from_pairs(ValueKind::Numeric, pairs.collect::<Vec<_>>())
}

fn performance() -> Outcome {
    let mut problems = Vec::new();
    let mut notes = Vec::new();

    let text = gen::synthetic_ntriples(1_000_000);
    let start = Instant::now();
    match ingest(text.as_bytes(), RdfFormat::NTriples) {
        Ok(store) if store.len() >= 999_000 => {
            let t = start.elapsed();
            notes.push(format!("ingest 1M {t:.2?}"));
            if t >= Duration::from_secs(30) {
                problems.push(format!("ingest took {t:.2?}"));
            }
        }
        Ok(store) => problems.push(format!("ingest kept only {} triples", store.len())),
        Err(e) => problems.push(format!("ingest failed: {e}")),
    }
    drop(text);

    let points = std::sync::Arc::new(million_points());
    for strategy in [Strategy::EqualWidth, Strategy::EqualFrequency] {
        let start = Instant::now();
        let tree = match build_hierarchy(points.clone(), HierarchyConfig::new(strategy, 3, 10)) {
            Ok(t) => t,
            Err(e) => {
                problems.push(format!("{strategy}: {e}"));
                continue;
            }
        };
        let t = start.elapsed();
        notes.push(format!("build {strategy} {t:.2?}"));
        if t >= Duration::from_secs(2) {
            problems.push(format!("{strategy} build took {t:.2?}"));
        }
        let mut worst = Duration::ZERO;
        for id in tree
            .node_ids()
            .iter()
            .filter(|id| id.matches('.').count() < 2)
        {
            let start = Instant::now();
            let children = tree.children_of(id).expect("known node");
            std::hint::black_box(children);
            worst = worst.max(start.elapsed());
        }
        notes.push(format!("childrenOf max {worst:.2?}"));
        if worst >= Duration::from_millis(10) {
            problems.push(format!("{strategy} childrenOf took {worst:.2?}"));
        }
    }
    outcome(problems, notes.join(", "))
}

fn schema_oracle() -> Outcome {
    let mut problems = Vec::new();
    let mut broken = 0;
    for seed in 0..100u64 {
        let mut r = gen::rng(5_000 + seed);
        let triples = gen::random_class_hierarchy(&mut r);
        let store = match ingest(gen::to_ntriples(&triples).as_bytes(), RdfFormat::NTriples) {
            Ok(s) => s,
            Err(e) => {
                problems.push(format!("seed {seed}: {e}"));
                continue;
            }
        };
        let summary = infer_schema(&store);
        broken += summary.broken_edges.len();
        problems.extend(
            oracle::check_schema(&triples, &summary)
                .into_iter()
                .map(|p| format!("seed {seed}: {p}")),
        );
    }
    outcome(
        problems,
        format!("100 class hierarchies, {broken} cycle edges removed"),
    )
}

fn main() -> ExitCode {
    let rt = tokio::runtime::Runtime::new().expect("runtime");
    let (hierarchy, aggregation) = hierarchy_oracles();
    let results = [
        ("oracle equivalence: statistics", stats_oracle()),
        ("oracle equivalence: hierarchy", hierarchy),
        ("aggregation over levels", aggregation),
        ("determinism", determinism()),
        ("fixture goldens", fixture_goldens(&rt)),
        ("desk-scale performance", performance()),
        ("schema inference", schema_oracle()),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        println!(
            "{} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
