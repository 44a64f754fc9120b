mod common;

use common::pair_count_auc;
use edgesketch::eval::output::write_scores;
use edgesketch::eval::{bench, linear_fit, run_pipeline, sweep, PipelineParams, ScoreMode, SweepGrid};
use edgesketch::stream_io::{
    generate_synthetic, read_edges, read_labels, write_edges, write_labels, EdgeFormat, SyntheticConfig,
};
use edgesketch::tensor_sketch::EdgeEvent;
use proptest::prelude::*;

fn small_stream(seed: u64) -> Vec<EdgeEvent> {
    generate_synthetic(&SyntheticConfig {
        n_nodes: 200,
        n_edges: 50_000,
        n_bins: 200,
        burst_count: 5,
        burst_size: 300,
        burst_fanout: 5,
        background_rate: None,
        seed,
    })
    .unwrap()
    .edges
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn auc_equals_pair_counting(
        data in prop::collection::vec((0u8..12, any::<bool>()), 2..150),
    ) {
        let scores: Vec<f64> = data.iter().map(|(s, _)| *s as f64 / 4.0).collect();
        let labels: Vec<bool> = data.iter().map(|(_, l)| *l).collect();
        prop_assume!(labels.iter().any(|&l| l) && labels.iter().any(|&l| !l));
        let got = edgesketch::eval::roc_auc(&scores, &labels).unwrap();
        prop_assert!((got - pair_count_auc(&scores, &labels)).abs() <= 1e-12);
    }

    #[test]
    fn edge_file_round_trip(
        raw in prop::collection::vec((0u64..1_000_000, 0u64..1_000_000, 0u64..50, any::<bool>()), 1..200),
        space in any::<bool>(),
    ) {
        let mut t = 0;
        let edges: Vec<EdgeEvent> = raw
            .iter()
            .map(|&(u, v, dt, l)| {
                t += dt;
                EdgeEvent::labeled(u, v, t, l)
            })
            .collect();
        let format = if space { EdgeFormat::Space } else { EdgeFormat::Comma };
        let dir = tempfile::tempdir().unwrap();
        let ep = dir.path().join("e.txt");
        let lp = dir.path().join("l.txt");
        write_edges(std::fs::File::create(&ep).unwrap(), &edges, format).unwrap();
        write_labels(std::fs::File::create(&lp).unwrap(), &edges).unwrap();
        let (back, warning) = read_edges(&ep, format).unwrap();
        prop_assert!(warning.is_none());
        let labels = read_labels(&lp).unwrap();
        prop_assert_eq!(back.len(), edges.len());
        for ((a, b), l) in back.iter().zip(&edges).zip(&labels) {
            prop_assert_eq!((a.u, a.v, a.t), (b.u, b.v, b.t));
            prop_assert_eq!(Some(*l), b.label);
        }
    }
}

#[test]
fn identical_runs_write_identical_bytes() {
    let edges = small_stream(7);
    let params = PipelineParams::default();
    let render = || {
        let (scored, _) = run_pipeline(&edges, &params).unwrap();
        let mut buf = Vec::new();
        write_scores(&mut buf, &scored).unwrap();
        buf
    };
    assert_eq!(render(), render());
}

#[test]
fn synthetic_bursts_rank_high() {
    let edges = small_stream(3);
    for mode in [ScoreMode::Posterior, ScoreMode::Raw] {
        let params = PipelineParams { score_mode: mode, ..Default::default() };
        let (_, report) = run_pipeline(&edges, &params).unwrap();
        assert!(report.auc.unwrap() > 0.9, "{mode}: {:?}", report.auc);
    }
}

#[test]
fn default_stream_auc_is_pinned() {
    let stream = generate_synthetic(&SyntheticConfig::default()).unwrap();
    let (_, report) = run_pipeline(&stream.edges, &PipelineParams::default()).unwrap();
    let auc = report.auc.unwrap();
    assert!((auc - GOLDEN_AUC).abs() < 1e-12, "{auc}");
}

const GOLDEN_AUC: f64 = 0.9682531098989899;

#[test]
fn unlabeled_stream_reports_no_auc() {
    let edges: Vec<EdgeEvent> = small_stream(1)
        .into_iter()
        .map(|e| EdgeEvent::new(e.u, e.v, e.t))
        .collect();
    let (scored, report) = run_pipeline(&edges, &PipelineParams::default()).unwrap();
    assert_eq!(scored.len(), edges.len());
    assert!(report.auc.is_none());
}

#[test]
fn throughput_stays_flat_along_the_stream() {
    let edges = generate_synthetic(&SyntheticConfig::default()).unwrap().edges;
    let params = PipelineParams::default();
    let mut pipeline = edgesketch::eval::Pipeline::new(&params).unwrap();
    let chunk = 100_000;
    let mut times = Vec::new();
    for part in edges.chunks(chunk) {
        let start = std::time::Instant::now();
        for e in part {
            std::hint::black_box(pipeline.process(e).unwrap());
        }
        times.push(start.elapsed().as_secs_f64());
    }
    let (first, last) = (times[0], *times.last().unwrap());
    assert!(last < 2.0 * first && first < 2.0 * last, "{times:?}");
}

#[test]
fn runtime_grows_linearly_with_prefix_length() {
    let edges = small_stream(5);
    let rows = bench(&edges, &PipelineParams::default(), &[5_000, 10_000, 20_000, 40_000], 3).unwrap();
    let xs: Vec<f64> = rows.iter().map(|r| r.n_edges as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.exec_seconds).collect();
    let (slope, _, r2) = linear_fit(&xs, &ys);
    assert!(slope > 0.0 && r2 >= 0.9, "{rows:?}");
}

#[test]
fn sweep_reports_each_cell() {
    let edges = small_stream(9);
    let grid = SweepGrid::new()
        .axis("rows", [2, 4])
        .unwrap()
        .axis("score_mode", ["posterior", "raw"])
        .unwrap();
    let rows = sweep(&grid, &PipelineParams::default(), &edges, 2, 2).unwrap();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert!(r.error.is_none());
        assert!(r.auc_mean.unwrap() > 0.85);
        assert!(r.auc_std.unwrap() >= 0.0);
    }
    assert_eq!(rows[0].params.sketch.rows, 2);
    assert_eq!(rows[3].params.score_mode, ScoreMode::Raw);

    let bad = SweepGrid::new().axis("gamma", ["0.9", "1.5"]).unwrap();
    let rows = sweep(&bad, &PipelineParams::default(), &edges, 1, 1).unwrap();
    assert!(rows[0].error.is_none());
    assert!(rows[1].error.as_deref().unwrap().contains("gamma"));
}
