use rayon::prelude::*;

use super::params::canonical_key;
use super::{labels_of, roc_auc, PipelineParams, Pipeline};
use crate::error::{Error, Result};
use crate::tensor_sketch::EdgeEvent;

/// Cartesian grid of parameter values, one axis per key.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepGrid {
    axes: Vec<(&'static str, Vec<String>)>,
}

impl SweepGrid {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn axis<S: ToString>(mut self, key: &str, values: impl IntoIterator<Item = S>) -> Result<Self> {
        self.push_axis(key, values.into_iter().map(|v| v.to_string()).collect())?;
        Ok(self)
    }

    fn push_axis(&mut self, key: &str, values: Vec<String>) -> Result<()> {
        let Some(key) = canonical_key(key) else {
            return Err(Error::param("grid", format!("unknown parameter `{key}`")));
        };
        if values.is_empty() {
            return Err(Error::param("grid", format!("`{key}` has no values")));
        }
        match self.axes.iter_mut().find(|(k, _)| *k == key) {
            Some((_, vs)) => *vs = values,
            None => self.axes.push((key, values)),
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.axes.is_empty()
    }

    pub fn len(&self) -> usize {
        if self.axes.is_empty() {
            0
        } else {
            self.axes.iter().map(|(_, v)| v.len()).product()
        }
    }

    /// Every combination applied on top of `base`, first axis slowest.
    pub fn cells(&self, base: &PipelineParams) -> Vec<Result<PipelineParams>> {
        let mut combos: Vec<Vec<(&'static str, &str)>> = vec![Vec::new()];
        for (key, values) in &self.axes {
            combos = combos
                .into_iter()
                .flat_map(|c| {
                    values.iter().map(move |v| {
                        let mut c = c.clone();
                        c.push((*key, v.as_str()));
                        c
                    })
                })
                .collect();
        }
        combos
            .into_iter()
            .map(|assignments| {
                let mut p = *base;
                for (k, v) in assignments {
                    p.set(k, v)?;
                }
                p.validate()?;
                Ok(p)
            })
            .collect()
    }
}

/// Parses `key=v1,v2,...` lines; `#` starts a comment.
pub fn parse_grid(text: &str) -> Result<SweepGrid> {
    let mut grid = SweepGrid::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, values)) = line.split_once('=') else {
            return Err(Error::Parse {
                path: "grid".into(),
                line: i + 1,
                reason: format!("expected `key=v1,v2,...`, got `{line}`"),
            });
        };
        let values: Vec<String> = values
            .split(',')
            .map(|v| v.trim().to_owned())
            .filter(|v| !v.is_empty())
            .collect();
        grid.push_axis(key.trim(), values)?;
    }
    Ok(grid)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub params: PipelineParams,
    pub auc_mean: Option<f64>,
    pub auc_std: Option<f64>,
    pub runtime_mean_s: Option<f64>,
    pub avg_time_per_edge_s: Option<f64>,
    pub error: Option<String>,
}

impl SweepRow {
    fn failed(params: PipelineParams, err: Error) -> Self {
        SweepRow {
            params,
            auc_mean: None,
            auc_std: None,
            runtime_mean_s: None,
            avg_time_per_edge_s: None,
            error: Some(err.to_string()),
        }
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn run_cell(params: &PipelineParams, edges: &[EdgeEvent], labels: Option<&[bool]>, repeats: usize) -> Result<SweepRow> {
    let mut aucs = Vec::with_capacity(repeats);
    let mut runtimes = Vec::with_capacity(repeats);
    for r in 0..repeats {
        let mut p = *params;
        p.sketch.seed = params.sketch.seed.wrapping_add(r as u64);
        let mut pipeline = Pipeline::new(&p)?;
        let mut scores = Vec::with_capacity(edges.len());
        let start = std::time::Instant::now();
        for e in edges {
            scores.push(pipeline.process(e)?.score(p.score_mode));
        }
        runtimes.push(start.elapsed().as_secs_f64());
        if let Some(labels) = labels {
            aucs.push(roc_auc(&scores, labels)?);
        }
    }
    let (runtime_mean, _) = mean_std(&runtimes);
    let (auc_mean, auc_std) = if aucs.is_empty() {
        (None, None)
    } else {
        let (m, s) = mean_std(&aucs);
        (Some(m), Some(s))
    };
    Ok(SweepRow {
        params: *params,
        auc_mean,
        auc_std,
        runtime_mean_s: Some(runtime_mean),
        avg_time_per_edge_s: (!edges.is_empty()).then(|| runtime_mean / edges.len() as f64),
        error: None,
    })
}

/// Runs every grid cell `repeats` times with hash seeds `seed, seed+1, ...`
/// and aggregates AUC (population mean and std) and runtime. Cells run on
/// `threads` workers; a failing cell yields a row with `error` set instead
/// of aborting the sweep. AUC is reported when every edge is labeled.
pub fn sweep(
    grid: &SweepGrid,
    base: &PipelineParams,
    edges: &[EdgeEvent],
    repeats: usize,
    threads: usize,
) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(Error::param("grid", "sweep grid is empty"));
    }
    if repeats == 0 {
        return Err(Error::param("repeats", "must be at least 1"));
    }
    let labels = labels_of(edges);
    let cells = grid.cells(base);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::param("threads", e.to_string()))?;
    let rows = pool.install(|| {
        cells
            .par_iter()
            .map(|cell| match cell {
                Ok(p) => run_cell(p, edges, labels.as_deref(), repeats)
                    .unwrap_or_else(|e| SweepRow::failed(*p, e)),
                Err(e) => SweepRow {
                    error: Some(e.to_string()),
                    ..SweepRow::failed(*base, Error::param("grid", "invalid cell"))
                },
            })
            .collect()
    });
    Ok(rows)
}
