use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::aggregate::{best_coloring, best_nf, DEFAULT_TIE_TOL};
use super::records::{results_csv, RunRecord};
use super::svg::{LineChart, Series};
use super::SweepError;
use crate::noisegen::{DistKind, Distribution};

/// Published optima for white noise: distribution, optimum noise factors,
/// runner-up loss and its noise factor. The minimum loss is 0.0032 for all.
pub const REFERENCE_TABLE_WHITE: [(DistKind, &str, f64, f64); 8] = [
    (DistKind::RaisedCosine, "0.1", 0.0034, 0.3),
    (DistKind::Uniform, "0.2, 0.3", 0.0033, 0.5),
    (DistKind::WignerSemicircle, "0.1, 0.3", 0.0034, 0.4),
    (DistKind::DoubleExponential, "0.2, 0.3", 0.0034, 0.8),
    (DistKind::HyperbolicSecant, "0.2, 0.4", 0.0033, 0.6),
    (DistKind::Laplace, "0.2, 0.3", 0.0034, 0.8),
    (DistKind::Logistic, "0.3, 0.4", 0.0033, 0.5),
    (DistKind::Weibull, "0.2, 0.5", 0.0034, 0.7),
];

/// Published optimum coloring parameter and average minimum loss.
pub const REFERENCE_TABLE_COLORED: [(DistKind, f64, f64); 8] = [
    (DistKind::RaisedCosine, 0.5, 0.0036),
    (DistKind::Uniform, 0.7, 0.0038),
    (DistKind::WignerSemicircle, 0.5, 0.0037),
    (DistKind::DoubleExponential, 0.4, 0.0036),
    (DistKind::HyperbolicSecant, 0.8, 0.0034),
    (DistKind::Laplace, 0.7, 0.0038),
    (DistKind::Logistic, 0.7, 0.0036),
    (DistKind::Weibull, 0.6, 0.0036),
];

const REFERENCE_MIN_LOSS: f64 = 0.0032;
const REFERENCE_OPTIMUM_NF: f64 = 0.3;
const REFERENCE_OVERALL_A: f64 = 0.3;

fn unique<T: PartialEq + Copy>(items: impl Iterator<Item = T>) -> Vec<T> {
    let mut out = Vec::new();
    for x in items {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

struct Tables {
    table1: String,
    table2: String,
}

fn tables(records: &[RunRecord]) -> Result<Tables, SweepError> {
    let dists = unique(records.iter().map(|r| r.dist));
    let mut epochs = unique(records.iter().map(|r| r.epochs));
    epochs.sort_unstable();

    let mut t1 = String::from("dist,gaussianity,epochs,a,best_nf,min_loss,next_loss,next_nf\n");
    let mut t2 = String::from("dist,gaussianity,epochs,best_a,avg_min_loss\n");
    for &e in &epochs {
        let subset: Vec<RunRecord> = records.iter().filter(|r| r.epochs == e).cloned().collect();
        for d in &dists {
            let of_dist: Vec<&RunRecord> = subset.iter().filter(|r| r.dist == *d).collect();
            let Some(a0) = sorted(of_dist.iter().map(|r| r.a).collect()).first().copied() else {
                continue;
            };
            let g = d.kind().gaussianity();
            if let Ok(b) = best_nf(&subset, d, a0, DEFAULT_TIE_TOL) {
                let nf: Vec<String> = b.nf.iter().map(|x| x.to_string()).collect();
                let _ = writeln!(
                    t1,
                    "{},{g},{e},{a0},{},{},{},{}",
                    d.label(),
                    nf.join(";"),
                    b.min_loss,
                    opt(b.runner_up.map(|r| r.0)),
                    opt(b.runner_up.map(|r| r.1))
                );
            }
            if let Ok(c) = best_coloring(&subset, d) {
                let _ = writeln!(t2, "{},{g},{e},{},{}", d.label(), c.a, c.avg_min_loss);
            }
        }
    }
    Ok(Tables { table1: t1, table2: t2 })
}

fn file_stem(d: &Distribution) -> String {
    d.label().replace(':', "-")
}

fn charts(records: &[RunRecord]) -> Vec<(String, String)> {
    let dists = unique(records.iter().map(|r| r.dist));
    let mut epochs = unique(records.iter().map(|r| r.epochs));
    epochs.sort_unstable();
    let multi_epoch = epochs.len() > 1;
    let mut out = Vec::new();

    for d in &dists {
        let of: Vec<&RunRecord> = records.iter().filter(|r| r.dist == *d).collect();
        let a_vals = sorted(unique(of.iter().map(|r| r.a)));
        let nf_vals = sorted(unique(of.iter().map(|r| r.nf)));
        let points = |f: &dyn Fn(&&RunRecord) -> bool, x: &dyn Fn(&RunRecord) -> f64| -> Vec<(f64, f64)> {
            let mut p: Vec<(f64, f64)> = of.iter().filter(|r| f(r)).map(|r| (x(r), r.min_val_loss)).collect();
            p.sort_by(|u, v| u.0.total_cmp(&v.0));
            p
        };

        let mut nf_chart = LineChart {
            title: format!("{}: minimum validation loss vs noise factor", d.label()),
            x_label: "noise factor".into(),
            y_label: "minimum validation loss".into(),
            ..Default::default()
        };
        for &e in &epochs {
            for &a in &a_vals {
                let pts = points(&|r| r.a == a && r.epochs == e, &|r| r.nf);
                if pts.is_empty() {
                    continue;
                }
                let label = if multi_epoch { format!("a={a}, {e} epochs") } else { format!("a={a}") };
                nf_chart.series.push(Series { label, points: pts });
            }
        }
        if d.kind() == DistKind::Gaussian {
            nf_chart
                .markers
                .push((REFERENCE_OPTIMUM_NF, format!("reference optimum NF={REFERENCE_OPTIMUM_NF}")));
        }
        out.push((format!("loss_vs_nf_{}.svg", file_stem(d)), nf_chart.render()));

        let mut a_chart = LineChart {
            title: format!("{}: loss averaged over noise factors vs coloring", d.label()),
            x_label: "coloring parameter a".into(),
            y_label: "average minimum validation loss".into(),
            ..Default::default()
        };
        for &e in &epochs {
            let mut pts = Vec::new();
            for &a in &a_vals {
                let cell: Vec<f64> = of.iter().filter(|r| r.a == a && r.epochs == e).map(|r| r.min_val_loss).collect();
                if !cell.is_empty() {
                    pts.push((a, cell.iter().sum::<f64>() / cell.len() as f64));
                }
            }
            a_chart.series.push(Series {
                label: format!("{e} epochs"),
                points: pts,
            });
        }
        out.push((format!("loss_vs_a_{}.svg", file_stem(d)), a_chart.render()));

        let a0 = a_vals[0];
        let mut e_chart = LineChart {
            title: format!("{}: minimum validation loss vs epochs (a={a0})", d.label()),
            x_label: "epochs".into(),
            y_label: "minimum validation loss".into(),
            ..Default::default()
        };
        for &nf in &nf_vals {
            e_chart.series.push(Series {
                label: format!("NF={nf}"),
                points: points(&|r| r.a == a0 && r.nf == nf, &|r| r.epochs as f64),
            });
        }
        out.push((format!("loss_vs_epochs_{}.svg", file_stem(d)), e_chart.render()));
    }
    out
}

fn markdown(records: &[RunRecord], t: &Tables) -> String {
    let mut s = String::from("# Sweep report\n\n");
    let _ = writeln!(
        s,
        "{} cells. Losses are validation losses of the trained denoiser; PSNR is measured on the validation split.\n",
        records.len()
    );
    s.push_str(
        "Numeric agreement with the reference values below is not expected. The reference study used a \
         different dataset, an unstated loss definition and a different training regime, so only the \
         qualitative shape of the curves is comparable.\n\n",
    );

    s.push_str("## Optimum noise factor (white noise)\n\n| dist | epochs | a | best NF | min loss | runner-up |\n|---|---|---|---|---|---|\n");
    for line in t.table1.lines().skip(1) {
        let c: Vec<&str> = line.split(',').collect();
        let runner = if c[6].is_empty() { "-".to_string() } else { format!("{} at NF={}", c[6], c[7]) };
        let _ = writeln!(s, "| {} | {} | {} | {} | {} | {runner} |", c[0], c[2], c[3], c[4].replace(';', ", "), c[5]);
    }
    s.push_str("\n## Optimum coloring parameter\n\n| dist | epochs | best a | avg min loss |\n|---|---|---|---|\n");
    for line in t.table2.lines().skip(1) {
        let c: Vec<&str> = line.split(',').collect();
        let _ = writeln!(s, "| {} | {} | {} | {} |", c[0], c[2], c[3], c[4]);
    }
    let mut overall: Vec<(f64, f64, usize)> = Vec::new();
    for r in records.iter().filter(|r| r.status == "ok" && r.min_val_loss.is_finite()) {
        match overall.iter_mut().find(|e| e.0 == r.a) {
            Some(e) => {
                e.1 += r.min_val_loss;
                e.2 += 1;
            }
            None => overall.push((r.a, r.min_val_loss, 1)),
        }
    }
    overall.sort_by(|x, y| x.0.total_cmp(&y.0));
    if let Some(best) = overall
        .iter()
        .map(|&(a, sum, n)| (a, sum / n as f64))
        .reduce(|b, c| if c.1 < b.1 { c } else { b })
    {
        let _ = writeln!(
            s,
            "\nPooled over every distribution and noise factor, the best coloring parameter is a={} (average min loss {}).",
            best.0, best.1
        );
    }

    if let Some((nf, loss)) = records
        .iter()
        .filter(|r| r.dist.kind() == DistKind::Gaussian && r.status == "ok")
        .map(|r| (r.nf, r.min_val_loss))
        .reduce(|b, c| if c.1 < b.1 { c } else { b })
    {
        let _ = writeln!(
            s,
            "\nWhite Gaussian sweep: lowest loss {loss} at NF={nf}; reference optimum near NF={REFERENCE_OPTIMUM_NF}."
        );
    }

    let _ = writeln!(
        s,
        "\n## Reference values\n\nWhite noise, minimum loss {REFERENCE_MIN_LOSS} for every distribution:\n\n| dist | gaussianity | optimum NF | runner-up |\n|---|---|---|---|"
    );
    for (k, nf, loss, at) in REFERENCE_TABLE_WHITE {
        let _ = writeln!(s, "| {} | {} | {nf} | {loss} at NF={at} |", k.name(), k.gaussianity());
    }
    s.push_str("\nColored noise:\n\n| dist | gaussianity | optimum a | avg min loss |\n|---|---|---|---|\n");
    for (k, a, loss) in REFERENCE_TABLE_COLORED {
        let _ = writeln!(s, "| {} | {} | {a} | {loss} |", k.name(), k.gaussianity());
    }
    let _ = writeln!(
        s,
        "\nA single overall optimum coloring parameter of a={REFERENCE_OVERALL_A} was also reported, which differs from the per-distribution optima above. Both aggregations are shown here without preferring either."
    );
    s
}

/// Write `results.csv`, `table1.csv`, `table2.csv`, `report.md` and the SVG
/// charts into `out_dir`. Output bytes depend only on `records`.
pub fn emit_report(records: &[RunRecord], out_dir: &Path) -> Result<Vec<PathBuf>, SweepError> {
    if records.is_empty() {
        return Err(SweepError::NoRecords);
    }
    let t = tables(records)?;
    let mut files = vec![
        ("results.csv".to_string(), results_csv(records)),
        ("table1.csv".to_string(), t.table1.clone()),
        ("table2.csv".to_string(), t.table2.clone()),
    ];
    files.extend(charts(records));
    files.push(("report.md".to_string(), markdown(records, &t)));

    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::with_capacity(files.len());
    for (name, body) in files {
        let path = out_dir.join(name);
        std::fs::write(&path, body)?;
        written.push(path);
    }
    Ok(written)
}
