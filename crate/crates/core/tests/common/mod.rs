//! Independent reference implementations used as test oracles. None of
//! these call into the code paths they check, apart from the shared hash
//! function (both sketches must see identical columns to be comparable).
#![allow(dead_code)]

use std::collections::HashMap;

use edgesketch::tensor_sketch::hash_edge;

/// Plain Count-Min sketch: every row is incremented on every insert.
pub struct PlainCms {
    rows: usize,
    cols: usize,
    seed: u64,
    cells: Vec<f64>,
}

impl PlainCms {
    pub fn new(rows: usize, cols: usize, seed: u64) -> Self {
        PlainCms {
            rows,
            cols,
            seed,
            cells: vec![0.0; rows * cols],
        }
    }

    pub fn insert(&mut self, u: u64, v: u64) {
        for r in 0..self.rows {
            let c = hash_edge(self.seed, r, u, v, self.cols);
            self.cells[r * self.cols + c] += 1.0;
        }
    }

    pub fn estimate(&self, u: u64, v: u64) -> f64 {
        (0..self.rows)
            .map(|r| self.cells[r * self.cols + hash_edge(self.seed, r, u, v, self.cols)])
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Default)]
pub struct ExactCounts(pub HashMap<(u64, u64), u64>);

impl ExactCounts {
    pub fn insert(&mut self, u: u64, v: u64) {
        *self.0.entry((u, v)).or_default() += 1;
    }

    pub fn get(&self, u: u64, v: u64) -> u64 {
        self.0.get(&(u, v)).copied().unwrap_or(0)
    }
}

/// Fraction of (positive, negative) pairs with the positive scored higher,
/// ties counted as half.
pub fn pair_count_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let mut good = 0.0;
    let mut pairs = 0.0;
    for (i, &li) in labels.iter().enumerate() {
        if !li {
            continue;
        }
        for (j, &lj) in labels.iter().enumerate() {
            if lj {
                continue;
            }
            pairs += 1.0;
            if scores[i] > scores[j] {
                good += 1.0;
            } else if scores[i] == scores[j] {
                good += 0.5;
            }
        }
    }
    good / pairs
}

/// Two-pass population mean and standard deviation.
pub fn batch_mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    let scale = a.abs().max(b.abs());
    scale == 0.0 || (a - b).abs() <= tol * scale
}
