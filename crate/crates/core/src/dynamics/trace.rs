use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::{DynamicsTrace, RoundRecord};
use crate::error::{Error, Result};

pub const TRACE_HEADER: &str = "t,buyer,seller,budget,utility,phi,eg_objective,avg_gap";

/// Appends one CSV row per (round, buyer, seller) and flushes after every
/// round, so an interrupted run leaves a readable prefix.
pub struct TraceWriter {
    out: BufWriter<File>,
    path: PathBuf,
}

impl TraceWriter {
    pub fn create(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = File::create(&path).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        let mut w = Self {
            out: BufWriter::new(file),
            path,
        };
        w.write(|out| writeln!(out, "{TRACE_HEADER}"))?;
        Ok(w)
    }

    pub fn append(&mut self, record: &RoundRecord) -> Result<()> {
        self.write(|out| {
            for i in 0..record.split.rows() {
                for k in 0..record.split.cols() {
                    writeln!(
                        out,
                        "{},{},{},{},{},{},{},{}",
                        record.t,
                        i,
                        k,
                        record.split[(i, k)],
                        record.utilities[(i, k)],
                        record.phi,
                        record.eg_objective,
                        record.avg_gap
                    )?;
                }
            }
            out.flush()
        })
    }

    fn write(&mut self, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
        f(&mut self.out).map_err(|source| Error::Io {
            path: self.path.clone(),
            source,
        })
    }
}

/// Ergodic convergence diagnostics of a trace.
#[derive(Debug, Clone)]
pub struct RateReport {
    /// g(T) = (1/T) Σ_{t≤T} (EG* − EG(t)) for T = 1, 2, ...
    pub avg_gap: Vec<f64>,
    /// sup_T T·g(T).
    pub max_scaled_gap: f64,
    /// Φ(1), the bound on T·g(T).
    pub initial_potential: f64,
    /// Whether g(T) is non-increasing once EG(t) has become monotone
    /// (observational, not a guarantee).
    pub monotone_tail: bool,
}

impl RateReport {
    /// Whether `T·g(T) ≤ Φ(1) + slack` for every prefix.
    pub fn holds(&self, slack: f64) -> bool {
        self.max_scaled_gap <= self.initial_potential + slack
    }
}

/// Computes the running-average EG gap of `trace` against `optimal_objective`.
pub fn rate_report(trace: &DynamicsTrace, optimal_objective: f64) -> RateReport {
    let mut avg_gap = Vec::with_capacity(trace.records.len());
    let mut sum = 0.0;
    let mut max_scaled_gap = f64::NEG_INFINITY;
    for (t, r) in trace.records.iter().enumerate() {
        sum += optimal_objective - r.eg_objective;
        avg_gap.push(sum / (t + 1) as f64);
        max_scaled_gap = max_scaled_gap.max(sum);
    }
    let eg: Vec<f64> = trace.records.iter().map(|r| r.eg_objective).collect();
    let tail_start = (0..eg.len())
        .rev()
        .take_while(|&t| t == 0 || eg[t] >= eg[t - 1])
        .last()
        .unwrap_or(0);
    let monotone_tail = avg_gap[tail_start..].windows(2).all(|w| w[1] <= w[0] + 1e-15);
    RateReport {
        avg_gap,
        max_scaled_gap,
        initial_potential: trace.records.first().map_or(0.0, |r| r.phi),
        monotone_tail,
    }
}
