//! Edge-stream and label file I/O, plus a synthetic labeled stream generator.
//!
//! Edge files hold one `u<sep>v<sep>t` triple per line with no header, where
//! the separator is a comma or whitespace. Node ids are either unsigned
//! integers or arbitrary tokens; the choice is made from the first data line,
//! and tokens are interned to dense ids in order of first appearance.
//!
//! Label files hold one `0` or `1` per line, aligned with the edge file.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tensor_sketch::{EdgeEvent, NodeId, Timestamp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EdgeFormat {
    #[default]
    Comma,
    Space,
}

impl EdgeFormat {
    fn separator(self) -> char {
        match self {
            EdgeFormat::Comma => ',',
            EdgeFormat::Space => ' ',
        }
    }
}

impl FromStr for EdgeFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "comma" | "," | "csv" => Ok(EdgeFormat::Comma),
            "space" | " " | "ssv" => Ok(EdgeFormat::Space),
            other => Err(Error::param(
                "format",
                format!("expected `comma` or `space`, got `{other}`"),
            )),
        }
    }
}

#[derive(Debug)]
enum IdMode {
    Undecided,
    Numeric,
    Interned(HashMap<String, NodeId>),
}

/// Streaming reader over an edge file.
///
/// Timestamps that go backwards are clamped to the latest timestamp seen, so
/// downstream bins stay monotone. The first such line is remembered and
/// reported by [`EdgeReader::take_warning`].
#[derive(Debug)]
pub struct EdgeReader<R> {
    input: R,
    source: String,
    format: EdgeFormat,
    line_no: usize,
    buf: String,
    ids: IdMode,
    last_t: Option<Timestamp>,
    clamped: usize,
    warning: Option<String>,
}

impl<R: BufRead> EdgeReader<R> {
    pub fn new(input: R, format: EdgeFormat, source: impl Into<String>) -> Self {
        EdgeReader {
            input,
            source: source.into(),
            format,
            line_no: 0,
            buf: String::new(),
            ids: IdMode::Undecided,
            last_t: None,
            clamped: 0,
            warning: None,
        }
    }

    /// Number of events whose timestamp was clamped.
    pub fn clamped(&self) -> usize {
        self.clamped
    }

    /// The out-of-order warning, once. Later calls return `None`.
    pub fn take_warning(&mut self) -> Option<String> {
        self.warning.take()
    }

    fn parse_error(&self, reason: impl Into<String>) -> Error {
        Error::Parse {
            path: self.source.clone(),
            line: self.line_no,
            reason: reason.into(),
        }
    }

    fn split_line<'a>(&self, line: &'a str) -> Vec<&'a str> {
        match self.format {
            EdgeFormat::Comma => line.split(',').map(str::trim).collect(),
            EdgeFormat::Space => line.split_whitespace().collect(),
        }
    }

    fn node_id(&mut self, tok: &str) -> Result<NodeId> {
        if let IdMode::Undecided = self.ids {
            self.ids = if tok.parse::<u64>().is_ok() {
                IdMode::Numeric
            } else {
                IdMode::Interned(HashMap::new())
            };
        }
        match &mut self.ids {
            IdMode::Numeric => tok.parse::<u64>().map_err(|_| {
                self.parse_error(format!("node id `{tok}` is not an unsigned integer"))
            }),
            IdMode::Interned(map) => {
                if tok.is_empty() {
                    return Err(self.parse_error("empty node id"));
                }
                let next = map.len() as NodeId;
                Ok(*map.entry(tok.to_owned()).or_insert(next))
            }
            IdMode::Undecided => unreachable!(),
        }
    }

    fn parse_line(&mut self, line: &str) -> Result<EdgeEvent> {
        let fields = self.split_line(line);
        if fields.len() != 3 {
            return Err(self.parse_error(format!(
                "expected 3 fields `u{}v{}t`, found {}",
                self.format.separator(),
                self.format.separator(),
                fields.len()
            )));
        }
        let (fu, fv, ft) = (fields[0], fields[1], fields[2]);
        let t: Timestamp = ft
            .parse()
            .map_err(|_| self.parse_error(format!("timestamp `{ft}` is not a non-negative integer")))?;
        let u = self.node_id(fu)?;
        let v = self.node_id(fv)?;

        let t = match self.last_t {
            Some(last) if t < last => {
                self.clamped += 1;
                if self.clamped == 1 {
                    self.warning = Some(format!(
                        "{}:{}: timestamp {t} precedes {last}; out-of-order timestamps are clamped",
                        self.source, self.line_no
                    ));
                }
                last
            }
            _ => t,
        };
        self.last_t = Some(t);
        Ok(EdgeEvent::new(u, v, t))
    }
}

impl<R: BufRead> Iterator for EdgeReader<R> {
    type Item = Result<EdgeEvent>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            match self.input.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => return Some(Err(Error::io(&self.source, e))),
            }
            self.line_no += 1;
            let line = std::mem::take(&mut self.buf);
            let trimmed = line.trim();
            if trimmed.is_empty() {
                self.buf = line;
                continue;
            }
            let item = self.parse_line(trimmed);
            self.buf = line;
            return Some(item);
        }
    }
}

pub fn open_edges(path: &Path, format: EdgeFormat) -> Result<EdgeReader<BufReader<File>>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(EdgeReader::new(
        BufReader::new(file),
        format,
        path.display().to_string(),
    ))
}

/// Reads a whole edge file. The out-of-order warning, if any, is returned
/// alongside the events.
pub fn read_edges(path: &Path, format: EdgeFormat) -> Result<(Vec<EdgeEvent>, Option<String>)> {
    let mut reader = open_edges(path, format)?;
    let edges = reader.by_ref().collect::<Result<Vec<_>>>()?;
    Ok((edges, reader.take_warning()))
}

pub fn parse_labels(input: impl BufRead, source: &str) -> Result<Vec<bool>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::io(source, e))?;
        match line.trim() {
            "0" => out.push(false),
            "1" => out.push(true),
            "" => {}
            tok => {
                return Err(Error::Parse {
                    path: source.to_owned(),
                    line: i + 1,
                    reason: format!("label `{tok}` is not 0 or 1"),
                })
            }
        }
    }
    Ok(out)
}

pub fn read_labels(path: &Path) -> Result<Vec<bool>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_labels(BufReader::new(file), &path.display().to_string())
}

/// Attaches labels to edges one-to-one.
pub fn attach_labels(edges: &mut [EdgeEvent], labels: &[bool]) -> Result<()> {
    if edges.len() != labels.len() {
        return Err(Error::Length {
            edges: edges.len(),
            labels: labels.len(),
        });
    }
    for (e, &l) in edges.iter_mut().zip(labels) {
        e.label = Some(l);
    }
    Ok(())
}

pub fn write_edges(mut out: impl Write, edges: &[EdgeEvent], format: EdgeFormat) -> io::Result<()> {
    let sep = format.separator();
    for e in edges {
        writeln!(out, "{}{sep}{}{sep}{}", e.u, e.v, e.t)?;
    }
    out.flush()
}

/// Writes one `0`/`1` per edge; unlabeled edges are written as `0`.
pub fn write_labels(mut out: impl Write, edges: &[EdgeEvent]) -> io::Result<()> {
    for e in edges {
        out.write_all(if e.label == Some(true) { b"1\n" } else { b"0\n" })?;
    }
    out.flush()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub n_nodes: u64,
    /// Total events, bursts included.
    pub n_edges: usize,
    pub n_bins: u64,
    pub burst_count: usize,
    pub burst_size: usize,
    /// Distinct destinations per burst.
    pub burst_fanout: usize,
    /// When set, `n_bins` is derived so that each ordered node pair sees
    /// about this many background events per bin.
    pub background_rate: Option<f64>,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n_nodes: 1000,
            n_edges: 1_000_000,
            n_bins: 1000,
            burst_count: 20,
            burst_size: 500,
            burst_fanout: 10,
            background_rate: None,
            seed: 42,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_nodes < 2 {
            return Err(Error::param("nodes", "need at least 2 nodes"));
        }
        if self.n_bins == 0 {
            return Err(Error::param("bins", "must be at least 1"));
        }
        let burst_events = self
            .burst_count
            .checked_mul(self.burst_size)
            .ok_or_else(|| Error::param("burst_size", "burst_count * burst_size overflows"))?;
        if burst_events > self.n_edges {
            return Err(Error::param(
                "bursts",
                format!(
                    "burst_count * burst_size = {burst_events} exceeds n_edges = {}",
                    self.n_edges
                ),
            ));
        }
        if self.burst_count > 0 {
            if self.burst_size == 0 {
                return Err(Error::param("burst_size", "must be at least 1"));
            }
            if self.burst_fanout == 0 || self.burst_fanout as u64 > self.n_nodes - 1 {
                return Err(Error::param(
                    "fanout",
                    format!("must lie in [1, {}]", self.n_nodes - 1),
                ));
            }
        }
        if let Some(rate) = self.background_rate {
            if !(rate > 0.0 && rate.is_finite()) {
                return Err(Error::param("background_rate", "must be positive"));
            }
        }
        Ok(())
    }

    fn background_events(&self) -> usize {
        self.n_edges - self.burst_count * self.burst_size
    }

    /// Number of bins actually generated.
    pub fn effective_bins(&self) -> u64 {
        match self.background_rate {
            Some(rate) => {
                let pairs = (self.n_nodes * (self.n_nodes - 1)) as f64;
                ((self.background_events() as f64 / (pairs * rate)).ceil() as u64).max(1)
            }
            None => self.n_bins,
        }
    }
}

/// A labeled stream; each event's `label` is set.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticStream {
    pub edges: Vec<EdgeEvent>,
}

impl SyntheticStream {
    pub fn labels(&self) -> Vec<bool> {
        self.edges.iter().map(|e| e.label == Some(true)).collect()
    }
}

/// Background traffic between uniformly drawn node pairs, plus bursts in
/// which one source fires `burst_size` events at `burst_fanout`
/// destinations inside a single bin. Timestamps are bin indices; use a bin
/// width of 1 to score the stream at its native resolution.
pub fn generate_synthetic(config: &SyntheticConfig) -> Result<SyntheticStream> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n_bins = config.effective_bins();
    let n = config.n_nodes;
    let mut edges = Vec::with_capacity(config.n_edges);

    let distinct_pair = |rng: &mut ChaCha8Rng| {
        let u = rng.gen_range(0..n);
        let mut v = rng.gen_range(0..n - 1);
        if v >= u {
            v += 1;
        }
        (u, v)
    };

    for _ in 0..config.background_events() {
        let (u, v) = distinct_pair(&mut rng);
        let t = rng.gen_range(0..n_bins);
        edges.push(EdgeEvent::labeled(u, v, t, false));
    }

    for _ in 0..config.burst_count {
        let src = rng.gen_range(0..n);
        let t = rng.gen_range(0..n_bins);
        // destinations drawn from the pool minus the source
        let dests: Vec<u64> = index::sample(&mut rng, (n - 1) as usize, config.burst_fanout)
            .into_iter()
            .map(|i| {
                let i = i as u64;
                if i >= src {
                    i + 1
                } else {
                    i
                }
            })
            .collect();
        for _ in 0..config.burst_size {
            let v = dests[rng.gen_range(0..dests.len())];
            edges.push(EdgeEvent::labeled(src, v, t, true));
        }
    }

    // interleave bursts with background inside each bin, then order by time
    rand::seq::SliceRandom::shuffle(edges.as_mut_slice(), &mut rng);
    edges.sort_by_key(|e| e.t);
    Ok(SyntheticStream { edges })
}
