//! Temporal Count-Min sketch with conservative update.
//!
//! The sketch keeps a `d x w x W` tensor of counters: `d` hash rows, `w`
//! columns per row and a ring of `W` time bins. Alongside it sits a `d x w`
//! cumulative plane that is never decayed or pruned.
//!
//! Time is discretised into bins of width `bin_width`; an edge at time `t`
//! lands in absolute bin `t / bin_width`, stored in ring slot `bin % W`.
//!
//! Decay is applied once per bin transition. Instead of rescaling every
//! live slot when time advances, each slot remembers the absolute bin it
//! holds (`slot_bin`). Counters are only ever written while their slot is the
//! current one, so a slot stamped with bin `b` has been through exactly
//! `current_bin - b` transitions and reads as `raw * gamma^(current_bin - b)`.
//! Slots whose bin has left the window read as zero and are cleared when the
//! ring wraps onto them. Per-edge work is O(d); each bin transition costs one
//! `d * w` slot clear.

mod hash;

pub use hash::{hash_edge, row_seed, EdgeHasher};

use crate::error::{Error, Result};

pub type NodeId = u64;
pub type Timestamp = u64;

/// One timestamped directed interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeEvent {
    pub u: NodeId,
    pub v: NodeId,
    pub t: Timestamp,
    /// Ground truth, `true` for anomalous.
    pub label: Option<bool>,
}

impl EdgeEvent {
    pub fn new(u: NodeId, v: NodeId, t: Timestamp) -> Self {
        EdgeEvent {
            u,
            v,
            t,
            label: None,
        }
    }

    pub fn labeled(u: NodeId, v: NodeId, t: Timestamp, anomalous: bool) -> Self {
        EdgeEvent {
            u,
            v,
            t,
            label: Some(anomalous),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SketchParams {
    /// Number of hash rows `d`.
    pub rows: usize,
    /// Columns per row `w`.
    pub cols: usize,
    /// Live time bins `W`.
    pub window: usize,
    /// Bin width, in timestamp units.
    pub bin_width: u64,
    /// Per-bin decay factor, in (0, 1].
    pub gamma: f64,
    pub seed: u64,
}

impl Default for SketchParams {
    fn default() -> Self {
        SketchParams {
            rows: 4,
            cols: 512,
            window: 16,
            bin_width: 1,
            gamma: 0.95,
            seed: 42,
        }
    }
}

impl SketchParams {
    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 {
            return Err(Error::param("rows", "must be at least 1"));
        }
        if self.cols == 0 {
            return Err(Error::param("cols", "must be at least 1"));
        }
        if self.window == 0 {
            return Err(Error::param("window", "must be at least 1"));
        }
        if self.bin_width == 0 {
            return Err(Error::param("bin_width", "must be positive"));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::param(
                "gamma",
                format!("must lie in (0, 1], got {}", self.gamma),
            ));
        }
        Ok(())
    }
}

/// Frequency estimates returned by [`TensorSketch::update`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    /// Count of the edge in the current bin.
    pub a_hat: f64,
    /// Cumulative count of the edge over the whole stream.
    pub s_hat: f64,
    /// Bins elapsed since the first edge, 1-based.
    pub bins: u64,
}

#[derive(Debug, Clone)]
pub struct TensorSketch {
    params: SketchParams,
    hasher: EdgeHasher,
    /// Slot-major: `slot * d * w + row * w + col`.
    current: Vec<f64>,
    slot_bin: Vec<Option<u64>>,
    total: Vec<f64>,
    current_bin: Option<u64>,
    bins_elapsed: u64,
    /// `gamma^i` for `i` in `0..W`.
    decay_pow: Vec<f64>,
    cols_buf: Vec<usize>,
}

impl TensorSketch {
    pub fn new(params: SketchParams) -> Result<Self> {
        params.validate()?;
        let plane = params.rows * params.cols;
        let mut decay_pow = Vec::with_capacity(params.window);
        let mut p = 1.0;
        for _ in 0..params.window {
            decay_pow.push(p);
            p *= params.gamma;
        }
        Ok(TensorSketch {
            params,
            hasher: EdgeHasher::new(params.seed, params.rows, params.cols),
            current: vec![0.0; plane * params.window],
            slot_bin: vec![None; params.window],
            total: vec![0.0; plane],
            current_bin: None,
            bins_elapsed: 0,
            decay_pow,
            cols_buf: Vec::with_capacity(params.rows),
        })
    }

    pub fn params(&self) -> &SketchParams {
        &self.params
    }

    pub fn current_bin(&self) -> Option<u64> {
        self.current_bin
    }

    pub fn bins_elapsed(&self) -> u64 {
        self.bins_elapsed
    }

    /// Number of counter cells held: `d*w*W + d*w`.
    pub fn counter_cells(&self) -> usize {
        self.current.len() + self.total.len()
    }

    pub fn bin_of(&self, t: Timestamp) -> u64 {
        t / self.params.bin_width
    }

    #[inline]
    fn plane(&self) -> usize {
        self.params.rows * self.params.cols
    }

    #[inline]
    fn slot_of(&self, bin: u64) -> usize {
        (bin % self.params.window as u64) as usize
    }

    fn open_slot(&mut self, bin: u64) {
        let slot = self.slot_of(bin);
        let plane = self.plane();
        self.current[slot * plane..(slot + 1) * plane].fill(0.0);
        self.slot_bin[slot] = Some(bin);
    }

    /// Moves the sketch to the bin containing `t` and returns the number of
    /// bin transitions applied. The very first call only opens the first bin
    /// and returns 0.
    pub fn advance_time(&mut self, t: Timestamp) -> Result<u64> {
        let bin = self.bin_of(t);
        match self.current_bin {
            None => {
                self.current_bin = Some(bin);
                self.bins_elapsed = 1;
                self.open_slot(bin);
                Ok(0)
            }
            Some(cur) if bin < cur => Err(Error::Ordering {
                t,
                bin,
                current_bin: cur,
            }),
            Some(cur) if bin == cur => Ok(0),
            Some(cur) => {
                let steps = bin - cur;
                self.current_bin = Some(bin);
                self.bins_elapsed += steps;
                self.open_slot(bin);
                Ok(steps)
            }
        }
    }

    /// Inserts one occurrence of `(u, v)` at time `t` and returns the
    /// post-insert estimates.
    pub fn update(&mut self, u: NodeId, v: NodeId, t: Timestamp) -> Result<Estimate> {
        self.advance_time(t)?;
        let cur = self.current_bin.expect("advance_time opens a bin");
        let w = self.params.cols;
        let base = self.slot_of(cur) * self.plane();

        let mut cols = std::mem::take(&mut self.cols_buf);
        self.hasher.columns_into(u, v, &mut cols);

        let a_hat = conservative_increment(&mut self.current[base..], w, &cols);
        let s_hat = conservative_increment(&mut self.total, w, &cols);

        self.cols_buf = cols;
        Ok(Estimate {
            a_hat,
            s_hat,
            bins: self.bins_elapsed,
        })
    }

    /// Count of `(u, v)` in the current bin; 0 before any edge.
    pub fn estimate_current(&self, u: NodeId, v: NodeId) -> f64 {
        match self.current_bin {
            Some(cur) => self.estimate_at(u, v, cur),
            None => 0.0,
        }
    }

    /// Cumulative count of `(u, v)` over the stream.
    pub fn estimate_total(&self, u: NodeId, v: NodeId) -> f64 {
        let w = self.params.cols;
        (0..self.params.rows)
            .map(|r| self.total[r * w + self.hasher.column(r, u, v)])
            .fold(f64::INFINITY, f64::min)
    }

    /// Decayed count of `(u, v)` in absolute bin `bin`. Bins outside the
    /// live window, or in the future, read as 0.
    pub fn estimate_at(&self, u: NodeId, v: NodeId, bin: u64) -> f64 {
        let Some((base, factor)) = self.live_slot(bin) else {
            return 0.0;
        };
        let w = self.params.cols;
        let raw = (0..self.params.rows)
            .map(|r| self.current[base + r * w + self.hasher.column(r, u, v)])
            .fold(f64::INFINITY, f64::min);
        raw * factor
    }

    /// Decayed value of one cell of the time tensor.
    pub fn cell(&self, row: usize, col: usize, bin: u64) -> f64 {
        assert!(row < self.params.rows && col < self.params.cols);
        match self.live_slot(bin) {
            Some((base, factor)) => self.current[base + row * self.params.cols + col] * factor,
            None => 0.0,
        }
    }

    /// Value of one cell of the cumulative plane.
    pub fn total_cell(&self, row: usize, col: usize) -> f64 {
        assert!(row < self.params.rows && col < self.params.cols);
        self.total[row * self.params.cols + col]
    }

    /// Offset of the slot holding `bin` and the decay accumulated since.
    fn live_slot(&self, bin: u64) -> Option<(usize, f64)> {
        let cur = self.current_bin?;
        if bin > cur {
            return None;
        }
        let age = cur - bin;
        if age >= self.params.window as u64 {
            return None;
        }
        let slot = self.slot_of(bin);
        if self.slot_bin[slot] != Some(bin) {
            return None;
        }
        Some((slot * self.plane(), self.decay_pow[age as usize]))
    }

    pub fn hasher(&self) -> &EdgeHasher {
        &self.hasher
    }
}

/// Increments only the cells holding the row-wise minimum and returns the
/// new minimum. `plane` is row-major with row stride `w`.
#[inline]
fn conservative_increment(plane: &mut [f64], w: usize, cols: &[usize]) -> f64 {
    let min = cols
        .iter()
        .enumerate()
        .map(|(r, &c)| plane[r * w + c])
        .fold(f64::INFINITY, f64::min);
    for (r, &c) in cols.iter().enumerate() {
        let cell = &mut plane[r * w + c];
        if *cell == min {
            *cell += 1.0;
        }
    }
    // Counters in these planes only take integer values, so every cell that
    // was above the minimum is already >= min + 1.
    min + 1.0
}
