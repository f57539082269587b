use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use super::records::{parse_results_csv, parse_trace_csv, results_csv, trace_csv, CellFailure, RunRecord};
use super::{Cell, SweepError, SweepGrid};
use crate::cdae::{self, split_indices, train, ImagePair, TrainConfig};
use crate::noisegen::{inject, NoiseSpec};
use crate::rng::derive_seed;
use crate::stft::{ImageShape, SpectrogramImage};

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Worker threads; 0 is treated as 1.
    pub workers: usize,
    /// Where finished cells are written as they complete.
    pub cell_dir: Option<PathBuf>,
    /// Reuse completed cells found in `cell_dir`.
    pub resume: bool,
    /// Record wall-clock times. Off by default so repeated runs produce
    /// byte-identical files.
    pub record_timing: bool,
}

#[derive(Clone, Debug, Default)]
pub struct GridOutcome {
    /// Completed cells in grid order.
    pub records: Vec<RunRecord>,
    pub failures: Vec<CellFailure>,
    /// Cells restored from `cell_dir` instead of retrained.
    pub resumed: usize,
}

fn failure(grid: &SweepGrid, cell: &Cell, message: String) -> CellFailure {
    CellFailure {
        index: cell.index,
        dist: grid.distributions[cell.dist_idx],
        nf: grid.nf_values[cell.nf_idx],
        a: grid.a_values[cell.a_idx],
        epochs: grid.epochs_values[cell.epochs_idx],
        seed: grid.cell_seed(cell),
        message,
    }
}

fn mean_psnr<'a>(pairs: impl Iterator<Item = (&'a crate::Tensor, &'a crate::Tensor)>) -> Result<f64, cdae::CdaeError> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for (x, y) in pairs {
        sum += cdae::psnr(x, y)?;
        n += 1;
    }
    Ok(sum / n as f64)
}

/// Train one cell from scratch on `dataset` and summarize it.
pub fn run_cell(
    grid: &SweepGrid,
    cell: &Cell,
    dataset: &[SpectrogramImage],
    record_timing: bool,
) -> Result<RunRecord, CellFailure> {
    let fail = |m: String| failure(grid, cell, m);
    let seed = grid.cell_seed(cell);
    let dist = grid.distributions[cell.dist_idx];
    let nf = grid.nf_values[cell.nf_idx];
    let a = grid.a_values[cell.a_idx];
    let epochs = grid.epochs_values[cell.epochs_idx];
    let start = Instant::now();

    let mut pairs = Vec::with_capacity(dataset.len());
    for (i, clean) in dataset.iter().enumerate() {
        let spec = NoiseSpec {
            dist,
            noise_factor: nf,
            coloring_a: a,
            seed: derive_seed(seed, &[i as u64]),
            axis: grid.axis,
        };
        let noisy = inject(clean, &spec).map_err(|e| fail(format!("noise: {e}")))?;
        pairs.push(ImagePair {
            noisy: noisy.pixels,
            clean: clean.pixels.clone(),
        });
    }
    let [h, w, c] = match pairs[0].clean.shape() {
        &[h, w, c] => [h, w, c],
        s => return Err(fail(format!("images must be [H, W, C], got {s:?}"))),
    };
    let mut model = cdae::build(ImageShape { h, w, c }, seed).map_err(|e| fail(e.to_string()))?;
    let cfg = TrainConfig {
        epochs,
        seed,
        ..grid.train
    };
    let mut trace = train(&mut model, &pairs, &cfg).map_err(|e| fail(e.to_string()))?;
    let best = cdae::min_loss(&trace).map_err(|e| fail(e.to_string()))?;

    let (_, val) = split_indices(pairs.len(), cfg.val_fraction, cfg.seed);
    let psnr_noisy = mean_psnr(val.iter().map(|&i| (&pairs[i].noisy, &pairs[i].clean))).map_err(|e| fail(e.to_string()))?;
    let denoised: Vec<crate::Tensor> = val
        .iter()
        .map(|&i| cdae::denoise(&model, &pairs[i].noisy))
        .collect::<Result<_, _>>()
        .map_err(|e| fail(e.to_string()))?;
    let psnr_denoised = mean_psnr(denoised.iter().zip(val.iter().map(|&i| &pairs[i].clean))).map_err(|e| fail(e.to_string()))?;

    if !record_timing {
        trace.iter_mut().for_each(|t| t.wall_time_s = 0.0);
    }
    Ok(RunRecord {
        dist,
        nf,
        a,
        epochs,
        seed,
        min_val_loss: best.value,
        min_epoch: best.epoch,
        psnr_noisy_db: psnr_noisy,
        psnr_denoised_db: psnr_denoised,
        wall_time_s: if record_timing { start.elapsed().as_secs_f64() } else { 0.0 },
        status: "ok".into(),
        trace,
    })
}

fn cell_paths(dir: &Path, index: usize) -> (PathBuf, PathBuf) {
    (
        dir.join(format!("cell_{index:05}.csv")),
        dir.join(format!("cell_{index:05}_trace.csv")),
    )
}

/// A stored cell is reused only if its coordinates and seed match the grid.
fn load_cell(grid: &SweepGrid, cell: &Cell, dir: &Path) -> Option<RunRecord> {
    let (rec_path, trace_path) = cell_paths(dir, cell.index);
    let mut recs = parse_results_csv(&std::fs::read_to_string(rec_path).ok()?).ok()?;
    let trace = parse_trace_csv(&std::fs::read_to_string(trace_path).ok()?).ok()?;
    if recs.len() != 1 {
        return None;
    }
    let mut r = recs.pop()?;
    let matches = r.dist == grid.distributions[cell.dist_idx]
        && r.nf == grid.nf_values[cell.nf_idx]
        && r.a == grid.a_values[cell.a_idx]
        && r.epochs == grid.epochs_values[cell.epochs_idx]
        && r.seed == grid.cell_seed(cell)
        && trace.len() == r.epochs;
    if !matches {
        return None;
    }
    r.trace = trace;
    Some(r)
}

fn store_cell(dir: &Path, index: usize, rec: &RunRecord) -> std::io::Result<()> {
    let (rec_path, trace_path) = cell_paths(dir, index);
    // Trace first: a cell counts as complete once its record file exists.
    std::fs::write(trace_path, trace_csv(&rec.trace))?;
    std::fs::write(rec_path, results_csv(std::slice::from_ref(rec)))
}

/// Run every cell of `grid`. A failing cell is reported in
/// [`GridOutcome::failures`] and does not stop the others.
pub fn run_grid(grid: &SweepGrid, dataset: &[SpectrogramImage], opts: &RunOptions) -> Result<GridOutcome, SweepError> {
    grid.validate()?;
    if dataset.len() < 2 {
        return Err(SweepError::DatasetMissing(dataset.len()));
    }
    if let Some(dir) = &opts.cell_dir {
        std::fs::create_dir_all(dir)?;
    }
    let cells = grid.cells();
    let mut slots: Vec<Option<Result<RunRecord, CellFailure>>> = vec![None; cells.len()];
    let mut resumed = 0;
    if let (true, Some(dir)) = (opts.resume, &opts.cell_dir) {
        for c in &cells {
            if let Some(r) = load_cell(grid, c, dir) {
                slots[c.index] = Some(Ok(r));
                resumed += 1;
            }
        }
    }
    let pending: Vec<Cell> = cells.iter().filter(|c| slots[c.index].is_none()).copied().collect();
    let next = AtomicUsize::new(0);
    let slots = Mutex::new(slots);
    let io_error: Mutex<Option<std::io::Error>> = Mutex::new(None);

    std::thread::scope(|s| {
        for _ in 0..opts.workers.max(1).min(pending.len().max(1)) {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(cell) = pending.get(k) else { break };
                let result = run_cell(grid, cell, dataset, opts.record_timing);
                if let (Ok(rec), Some(dir)) = (&result, &opts.cell_dir) {
                    if let Err(e) = store_cell(dir, cell.index, rec) {
                        io_error.lock().unwrap().get_or_insert(e);
                    }
                }
                slots.lock().unwrap()[cell.index] = Some(result);
            });
        }
    });

    if let Some(e) = io_error.into_inner().unwrap() {
        return Err(e.into());
    }
    let mut out = GridOutcome {
        resumed,
        ..Default::default()
    };
    for slot in slots.into_inner().unwrap().into_iter().flatten() {
        match slot {
            Ok(r) => out.records.push(r),
            Err(f) => out.failures.push(f),
        }
    }
    Ok(out)
}
