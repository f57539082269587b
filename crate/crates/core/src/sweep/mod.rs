//! Experiment grids over distribution, coloring parameter, noise factor and
//! epoch count, with aggregation into tables and charts.
//!
//! Each cell trains a fresh model. Its seed depends only on the master seed
//! and the cell's coordinates (see [`SweepGrid::cell_seed`]), so cells can
//! run in any order, on any number of workers, or on their own, and produce
//! the same record.

mod aggregate;
mod records;
mod report;
mod run;
pub mod svg;

pub use aggregate::{best_coloring, best_nf, BestColoring, BestNf, DEFAULT_TIE_TOL};
pub use records::{
    errors_csv, parse_results_csv, parse_trace_csv, read_results_csv, results_csv, trace_csv, CellFailure, RunRecord,
};
pub use report::{emit_report, REFERENCE_TABLE_COLORED, REFERENCE_TABLE_WHITE};
pub use run::{run_cell, run_grid, GridOutcome, RunOptions};

use thiserror::Error;

use crate::cdae::TrainConfig;
use crate::noisegen::{ColoringAxis, Distribution};
use crate::rng::derive_seed;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("dataset needs at least 2 images, got {0}")]
    DatasetMissing(usize),
    #[error("no records to aggregate")]
    NoRecords,
    #[error("results file: {0}")]
    Parse(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// `0.0, 0.1, ..., 0.9`.
pub fn default_levels() -> Vec<f64> {
    (0..10).map(|i| i as f64 / 10.0).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepGrid {
    pub distributions: Vec<Distribution>,
    pub nf_values: Vec<f64>,
    pub a_values: Vec<f64>,
    pub epochs_values: Vec<usize>,
    pub master_seed: u64,
    pub axis: ColoringAxis,
    /// Template; `epochs` and `seed` are replaced per cell.
    pub train: TrainConfig,
}

/// Grid coordinates of one cell. Cells are numbered with the distribution
/// varying slowest, then coloring parameter, noise factor, epochs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cell {
    pub index: usize,
    pub dist_idx: usize,
    pub a_idx: usize,
    pub nf_idx: usize,
    pub epochs_idx: usize,
}

impl SweepGrid {
    pub fn validate(&self) -> Result<(), SweepError> {
        let bad = |m: &str| Err(SweepError::InvalidGrid(m.to_string()));
        if self.distributions.is_empty()
            || self.nf_values.is_empty()
            || self.a_values.is_empty()
            || self.epochs_values.is_empty()
        {
            return bad("every grid axis needs at least one value");
        }
        if self.nf_values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return bad("noise factors must be finite and >= 0");
        }
        if self.a_values.iter().any(|v| !(0.0..1.0).contains(v)) {
            return bad("coloring parameters must lie in [0, 1)");
        }
        if self.epochs_values.contains(&0) {
            return bad("epoch counts must be >= 1");
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.distributions.len() * self.a_values.len() * self.nf_values.len() * self.epochs_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::with_capacity(self.len());
        for dist_idx in 0..self.distributions.len() {
            for a_idx in 0..self.a_values.len() {
                for nf_idx in 0..self.nf_values.len() {
                    for epochs_idx in 0..self.epochs_values.len() {
                        out.push(Cell {
                            index: out.len(),
                            dist_idx,
                            a_idx,
                            nf_idx,
                            epochs_idx,
                        });
                    }
                }
            }
        }
        out
    }

    /// `derive_seed(master, [dist id, nf index, a index, epochs index])`.
    /// The distribution enters by its stable id, not its list position.
    pub fn cell_seed(&self, cell: &Cell) -> u64 {
        derive_seed(
            self.master_seed,
            &[
                self.distributions[cell.dist_idx].kind().id(),
                cell.nf_idx as u64,
                cell.a_idx as u64,
                cell.epochs_idx as u64,
            ],
        )
    }
}
