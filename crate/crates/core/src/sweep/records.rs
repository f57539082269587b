use std::fmt::Write as _;
use std::path::Path;

use super::SweepError;
use crate::cdae::EpochTrace;
use crate::noisegen::Distribution;

pub(crate) const RESULTS_HEADER: &str =
    "dist,nf,a,epochs,seed,min_val_loss,min_epoch,psnr_noisy_db,psnr_denoised_db,wall_time_s,status";
const TRACE_HEADER: &str = "epoch,train_loss,val_loss,wall_time_s";

/// Outcome of one trained cell.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub dist: Distribution,
    pub nf: f64,
    pub a: f64,
    pub epochs: usize,
    pub seed: u64,
    pub min_val_loss: f64,
    pub min_epoch: usize,
    /// Mean PSNR of noisy inputs against clean targets over the validation
    /// split; `inf` when every input equals its target.
    pub psnr_noisy_db: f64,
    pub psnr_denoised_db: f64,
    /// Zero unless timing was requested.
    pub wall_time_s: f64,
    pub status: String,
    /// Per-epoch history. Not part of `results.csv`; stored alongside.
    pub trace: Vec<EpochTrace>,
}

/// A cell that could not be completed.
#[derive(Clone, Debug, PartialEq)]
pub struct CellFailure {
    pub index: usize,
    pub dist: Distribution,
    pub nf: f64,
    pub a: f64,
    pub epochs: usize,
    pub seed: u64,
    pub message: String,
}

/// Failure table: `dist,nf,a,epochs,seed,message`, the message quoted.
pub fn errors_csv(failures: &[CellFailure]) -> String {
    let mut s = String::from("dist,nf,a,epochs,seed,message\n");
    for f in failures {
        let msg = f.message.replace(['"', '\n', '\r'], " ");
        let _ = writeln!(s, "{},{},{},{},{},\"{}\"", f.dist.label(), f.nf, f.a, f.epochs, f.seed, msg);
    }
    s
}

/// Results table. Floats use Rust's shortest round-trip formatting, so
/// parsing the output recovers every value exactly.
pub fn results_csv(records: &[RunRecord]) -> String {
    let mut s = String::from(RESULTS_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.dist.label(),
            r.nf,
            r.a,
            r.epochs,
            r.seed,
            r.min_val_loss,
            r.min_epoch,
            r.psnr_noisy_db,
            r.psnr_denoised_db,
            r.wall_time_s,
            r.status
        );
    }
    s
}

fn field<T: std::str::FromStr>(cols: &[&str], i: usize, line: usize, name: &str) -> Result<T, SweepError> {
    cols[i]
        .trim()
        .parse()
        .map_err(|_| SweepError::Parse(format!("line {line}: bad {name} {:?}", cols[i])))
}

/// Parse a results table written by [`results_csv`]. Traces come back empty.
pub fn parse_results_csv(text: &str) -> Result<Vec<RunRecord>, SweepError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == RESULTS_HEADER => {}
        _ => return Err(SweepError::Parse("missing results header".into())),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let n = i + 1;
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 11 {
            return Err(SweepError::Parse(format!("line {n}: expected 11 columns, got {}", cols.len())));
        }
        let dist: Distribution = cols[0]
            .trim()
            .parse()
            .map_err(|e| SweepError::Parse(format!("line {n}: {e}")))?;
        out.push(RunRecord {
            dist,
            nf: field(&cols, 1, n, "nf")?,
            a: field(&cols, 2, n, "a")?,
            epochs: field(&cols, 3, n, "epochs")?,
            seed: field(&cols, 4, n, "seed")?,
            min_val_loss: field(&cols, 5, n, "min_val_loss")?,
            min_epoch: field(&cols, 6, n, "min_epoch")?,
            psnr_noisy_db: field(&cols, 7, n, "psnr_noisy_db")?,
            psnr_denoised_db: field(&cols, 8, n, "psnr_denoised_db")?,
            wall_time_s: field(&cols, 9, n, "wall_time_s")?,
            status: cols[10].trim().to_string(),
            trace: Vec::new(),
        });
    }
    Ok(out)
}

pub fn read_results_csv(path: &Path) -> Result<Vec<RunRecord>, SweepError> {
    parse_results_csv(&std::fs::read_to_string(path)?)
}

pub fn trace_csv(trace: &[EpochTrace]) -> String {
    let mut s = String::from(TRACE_HEADER);
    s.push('\n');
    for t in trace {
        let _ = writeln!(s, "{},{},{},{}", t.epoch, t.train_loss, t.val_loss, t.wall_time_s);
    }
    s
}

pub fn parse_trace_csv(text: &str) -> Result<Vec<EpochTrace>, SweepError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == TRACE_HEADER => {}
        _ => return Err(SweepError::Parse("missing trace header".into())),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 4 {
            return Err(SweepError::Parse(format!("trace line {}: expected 4 columns", i + 1)));
        }
        out.push(EpochTrace {
            epoch: field(&cols, 0, i + 1, "epoch")?,
            train_loss: field(&cols, 1, i + 1, "train_loss")?,
            val_loss: field(&cols, 2, i + 1, "val_loss")?,
            wall_time_s: field(&cols, 3, i + 1, "wall_time_s")?,
        });
    }
    Ok(out)
}
