use std::io::Write;

use serde::Serialize;

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    /// Natural-log likelihood of the model after this iteration.
    pub log_likelihood: f64,
    pub perplexity: f64,
}

/// Per-iteration log-likelihood and perplexity of an EM run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TrainingTrace {
    /// Number of scored events `N` used for `perplexity = exp(-ll / N)`.
    pub events: u64,
    pub rows: Vec<TraceRow>,
}

impl TrainingTrace {
    pub fn new(events: u64) -> Self {
        TrainingTrace {
            events,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, iteration: usize, log_likelihood: f64) {
        self.rows.push(TraceRow {
            iteration,
            log_likelihood,
            perplexity: (-log_likelihood / self.events as f64).exp(),
        });
    }

    pub fn final_perplexity(&self) -> Option<f64> {
        self.rows.last().map(|r| r.perplexity)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "iteration,loglik,train_perplexity")?;
        for r in &self.rows {
            writeln!(out, "{},{:.10},{:.10}", r.iteration, r.log_likelihood, r.perplexity)?;
        }
        Ok(())
    }
}
