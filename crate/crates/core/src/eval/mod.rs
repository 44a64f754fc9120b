//! End-to-end scoring pipeline, evaluation metrics and experiment drivers.

mod auc;
pub mod output;
mod params;
mod sweep;

use std::hint::black_box;
use std::time::Instant;

pub use auc::roc_auc;
pub use params::{canonical_key, PipelineParams, ScoreMode, PARAM_KEYS};
pub use sweep::{parse_grid, sweep, SweepGrid, SweepRow};

use crate::detector::DetectorState;
use crate::error::{Error, Result};
use crate::scoring::{likelihoods, posterior_from_logs, raw_score_unchecked, ScoringParams};
use crate::tensor_sketch::{EdgeEvent, NodeId, TensorSketch, Timestamp};

/// Per-edge output record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredEdge {
    pub u: NodeId,
    pub v: NodeId,
    pub t: Timestamp,
    pub a_hat: f64,
    pub s_hat: f64,
    pub raw: f64,
    pub posterior: f64,
    pub z: f64,
    pub tau: f64,
    pub flag: bool,
}

/// Streaming sketch -> score -> detector chain for a single stream.
#[derive(Debug, Clone)]
pub struct Pipeline {
    sketch: TensorSketch,
    scoring: ScoringParams,
    detector: DetectorState,
    score_mode: ScoreMode,
}

impl Pipeline {
    pub fn new(params: &PipelineParams) -> Result<Self> {
        params.validate()?;
        Ok(Pipeline {
            sketch: TensorSketch::new(params.sketch)?,
            scoring: params.scoring,
            detector: DetectorState::new(params.detector)?,
            score_mode: params.score_mode,
        })
    }

    #[inline]
    pub fn process(&mut self, e: &EdgeEvent) -> Result<ScoredEdge> {
        let est = self.sketch.update(e.u, e.v, e.t)?;
        let raw = raw_score_unchecked(est.a_hat, est.s_hat, est.bins);
        let posterior = posterior_from_logs(
            likelihoods(est.a_hat, est.s_hat, est.bins, &self.scoring),
            self.scoring.prior,
        );
        let x = match self.score_mode {
            ScoreMode::Posterior => posterior,
            ScoreMode::Raw => raw,
        };
        let d = self.detector.classify(x);
        Ok(ScoredEdge {
            u: e.u,
            v: e.v,
            t: e.t,
            a_hat: est.a_hat,
            s_hat: est.s_hat,
            raw,
            posterior,
            z: d.z,
            tau: d.tau,
            flag: d.flag,
        })
    }

    pub fn sketch(&self) -> &TensorSketch {
        &self.sketch
    }

    pub fn detector(&self) -> &DetectorState {
        &self.detector
    }
}

impl ScoredEdge {
    /// The score the detector consumed under `mode`.
    pub fn score(&self, mode: ScoreMode) -> f64 {
        match mode {
            ScoreMode::Posterior => self.posterior,
            ScoreMode::Raw => self.raw,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub n_edges: usize,
    /// Wall time of the processing loop only.
    pub exec_seconds: f64,
    /// `exec_seconds / n_edges`; absent for an empty stream.
    pub avg_time_per_edge: Option<f64>,
    /// Time spent reading the input, when the caller measured it.
    pub load_seconds: Option<f64>,
    pub flagged: usize,
    pub auc: Option<f64>,
    pub params: PipelineParams,
}

/// Mean processing time per edge.
pub fn avg_time(exec_seconds: f64, n_edges: usize) -> Result<f64> {
    if n_edges == 0 {
        return Err(Error::param("n_edges", "average time needs at least one edge"));
    }
    Ok(exec_seconds / n_edges as f64)
}

/// Scores `edges` in order. The AUC is filled in when every edge carries a
/// label and both classes occur.
pub fn run_pipeline(edges: &[EdgeEvent], params: &PipelineParams) -> Result<(Vec<ScoredEdge>, RunReport)> {
    let mut pipeline = Pipeline::new(params)?;
    let mut scored = Vec::with_capacity(edges.len());

    let start = Instant::now();
    for e in edges {
        scored.push(pipeline.process(e)?);
    }
    let exec_seconds = start.elapsed().as_secs_f64();

    let auc = labels_of(edges).and_then(|labels| {
        let scores: Vec<f64> = scored.iter().map(|s| s.score(params.score_mode)).collect();
        roc_auc(&scores, &labels).ok()
    });
    let report = RunReport {
        n_edges: edges.len(),
        exec_seconds,
        avg_time_per_edge: avg_time(exec_seconds, edges.len()).ok(),
        load_seconds: None,
        flagged: scored.iter().filter(|s| s.flag).count(),
        auc,
        params: *params,
    };
    Ok((scored, report))
}

/// Labels of a fully labeled stream.
pub fn labels_of(edges: &[EdgeEvent]) -> Option<Vec<bool>> {
    edges.iter().map(|e| e.label).collect()
}

/// Runs the pipeline without keeping per-edge output and returns the
/// processing time in seconds.
pub fn time_pipeline(edges: &[EdgeEvent], params: &PipelineParams) -> Result<f64> {
    let mut pipeline = Pipeline::new(params)?;
    let start = Instant::now();
    for e in edges {
        black_box(pipeline.process(e)?);
    }
    Ok(start.elapsed().as_secs_f64())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchRow {
    pub n_edges: usize,
    pub exec_seconds: f64,
    pub avg_time_per_edge: f64,
}

/// Times the pipeline on growing prefixes of `edges`. Each prefix is run
/// `repeats` times on a fresh pipeline and the fastest run is kept.
/// Prefixes longer than the stream are skipped.
pub fn bench(
    edges: &[EdgeEvent],
    params: &PipelineParams,
    prefixes: &[usize],
    repeats: usize,
) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for &n in prefixes.iter().filter(|&&n| n >= 1 && n <= edges.len()) {
        let mut best = f64::INFINITY;
        for _ in 0..repeats.max(1) {
            best = best.min(time_pipeline(&edges[..n], params)?);
        }
        rows.push(BenchRow {
            n_edges: n,
            exec_seconds: best,
            avg_time_per_edge: avg_time(best, n)?,
        });
    }
    Ok(rows)
}

/// Least-squares line through `(xs, ys)`: `(slope, intercept, r_squared)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, intercept, r2)
}
