use super::records::RunRecord;
use super::SweepError;
use crate::noisegen::Distribution;

/// Losses within this distance of the minimum count as tied.
pub const DEFAULT_TIE_TOL: f64 = 5e-5;

/// Noise factors reaching the lowest validation loss for one distribution
/// and coloring parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct BestNf {
    /// Every noise factor within the tie tolerance of the minimum, ascending.
    pub nf: Vec<f64>,
    pub min_loss: f64,
    /// Lowest loss outside the tie set and the noise factor reaching it.
    pub runner_up: Option<(f64, f64)>,
}

/// Coloring parameter with the lowest validation loss averaged over noise
/// factors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BestColoring {
    pub a: f64,
    pub avg_min_loss: f64,
}

fn usable(r: &RunRecord) -> bool {
    r.status == "ok" && r.min_val_loss.is_finite()
}

pub fn best_nf(records: &[RunRecord], dist: &Distribution, a: f64, tol: f64) -> Result<BestNf, SweepError> {
    let mut rows: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| usable(r) && r.dist == *dist && r.a == a)
        .map(|r| (r.nf, r.min_val_loss))
        .collect();
    if rows.is_empty() {
        return Err(SweepError::NoRecords);
    }
    rows.sort_by(|x, y| x.0.total_cmp(&y.0));
    let min_loss = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let (tied, rest): (Vec<_>, Vec<_>) = rows.into_iter().partition(|r| r.1 - min_loss <= tol);
    let mut nf: Vec<f64> = tied.iter().map(|r| r.0).collect();
    nf.dedup();
    let runner_up = rest
        .into_iter()
        .min_by(|x, y| x.1.total_cmp(&y.1).then(x.0.total_cmp(&y.0)))
        .map(|(nf, loss)| (loss, nf));
    Ok(BestNf { nf, min_loss, runner_up })
}

/// Ties resolve to the smaller coloring parameter.
pub fn best_coloring(records: &[RunRecord], dist: &Distribution) -> Result<BestColoring, SweepError> {
    let mut by_a: Vec<(f64, f64, usize)> = Vec::new();
    for r in records.iter().filter(|r| usable(r) && r.dist == *dist) {
        match by_a.iter_mut().find(|e| e.0 == r.a) {
            Some(e) => {
                e.1 += r.min_val_loss;
                e.2 += 1;
            }
            None => by_a.push((r.a, r.min_val_loss, 1)),
        }
    }
    by_a.sort_by(|x, y| x.0.total_cmp(&y.0));
    by_a.into_iter()
        .map(|(a, sum, n)| BestColoring {
            a,
            avg_min_loss: sum / n as f64,
        })
        .reduce(|best, c| if c.avg_min_loss < best.avg_min_loss { c } else { best })
        .ok_or(SweepError::NoRecords)
}
