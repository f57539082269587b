use specdenoise::cdae::TrainConfig;
use specdenoise::dataset::synthetic_images;
use specdenoise::noisegen::{ColoringAxis, DistKind, Distribution};
use specdenoise::stft::{ImageShape, SpectrogramImage};
use specdenoise::sweep::{default_levels, emit_report, read_results_csv, results_csv, run_cell, run_grid, RunOptions, SweepError, SweepGrid};

fn dataset(n: usize) -> Vec<SpectrogramImage> {
    synthetic_images(n, ImageShape { h: 16, w: 16, c: 1 }, 11)
        .unwrap()
        .into_iter()
        .map(|e| e.image)
        .collect()
}

fn grid(nf: Vec<f64>, a: Vec<f64>) -> SweepGrid {
    SweepGrid {
        distributions: vec![Distribution::new(DistKind::Gaussian)],
        nf_values: nf,
        a_values: a,
        epochs_values: vec![2],
        master_seed: 99,
        axis: ColoringAxis::Time,
        train: TrainConfig {
            batch_size: 2,
            ..TrainConfig::default()
        },
    }
}

#[test]
fn one_record_per_cell_in_order() {
    let g = grid(default_levels(), vec![0.0]);
    let out = run_grid(&g, &dataset(5), &RunOptions::default()).unwrap();
    assert!(out.failures.is_empty());
    assert_eq!(out.records.len(), 10);
    for (r, nf) in out.records.iter().zip(default_levels()) {
        assert_eq!(r.nf, nf);
        assert_eq!(r.trace.len(), 2);
        let min = r.trace.iter().map(|t| t.val_loss).fold(f64::INFINITY, f64::min);
        assert_eq!(r.min_val_loss, min);
    }
    assert_eq!(out.records[0].psnr_noisy_db, f64::INFINITY);
    assert!(out.records[1].psnr_noisy_db.is_finite());
}

#[test]
fn workers_and_standalone_cells_agree() {
    let g = grid(vec![0.1, 0.3, 0.9], vec![0.0, 0.5]);
    let data = dataset(5);
    let one = run_grid(&g, &data, &RunOptions { workers: 1, ..Default::default() }).unwrap();
    let four = run_grid(&g, &data, &RunOptions { workers: 4, ..Default::default() }).unwrap();
    assert_eq!(one.records.len(), 6);
    assert_eq!(results_csv(&one.records), results_csv(&four.records));
    let again = run_grid(&g, &data, &RunOptions::default()).unwrap();
    assert_eq!(one.records, again.records);

    let cell = g.cells()[4];
    let solo = run_cell(&g, &cell, &data, false).unwrap();
    assert_eq!(solo, one.records[4]);
}

#[test]
fn resume_reuses_stored_cells() {
    let tmp = tempfile::tempdir().unwrap();
    let data = dataset(4);
    let small = grid(vec![0.1, 0.2], vec![0.0]);
    let opts = RunOptions {
        workers: 1,
        cell_dir: Some(tmp.path().join("cells")),
        resume: true,
        record_timing: false,
    };
    let first = run_grid(&small, &data, &opts).unwrap();
    assert_eq!(first.resumed, 0);

    let full = grid(vec![0.1, 0.2, 0.3], vec![0.0]);
    let second = run_grid(&full, &data, &opts).unwrap();
    assert_eq!(second.resumed, 2);
    assert_eq!(second.records.len(), 3);
    assert_eq!(&second.records[..2], &first.records[..]);
    let fresh = run_grid(&full, &data, &RunOptions::default()).unwrap();
    assert_eq!(second.records, fresh.records);
}

#[test]
fn report_rebuilds_from_results_csv() {
    let g = grid(vec![0.0, 0.3], vec![0.0, 0.5]);
    let out = run_grid(&g, &dataset(4), &RunOptions::default()).unwrap();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let files = emit_report(&out.records, a.path()).unwrap();
    let back = read_results_csv(&a.path().join("results.csv")).unwrap();
    emit_report(&back, b.path()).unwrap();
    for f in files {
        let name = f.file_name().unwrap();
        assert_eq!(std::fs::read(&f).unwrap(), std::fs::read(b.path().join(name)).unwrap(), "{name:?}");
    }
}

#[test]
fn dataset_too_small() {
    let g = grid(vec![0.1], vec![0.0]);
    assert!(matches!(run_grid(&g, &dataset(1), &RunOptions::default()), Err(SweepError::DatasetMissing(1))));
}
