use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::csv::read_episodes;
use crate::acnomdp::trace::ratio_from_counts;
use crate::agents::{EndCause, EpisodeLog};
use crate::{Error, Result};

pub const SUMMARY_HEADER: &str = "scope,seed,episodes,mean_costed_return,std_costed_return,mean_length,std_length,terminal_fraction,measured_steps,unmeasured_steps,ratio,ratio_label";
pub const CURVES_HEADER: &str =
    "bucket,episode_start,episode_end,seeds,mean_costed_return,std_costed_return,mean_length,std_length";

/// Converged statistics for one seed or for the pooled run.
///
/// Seed rows cover the final 10% of that seed's episodes (at least one);
/// their std columns are taken over those episodes. The pooled row averages
/// the seed means and its std columns are taken across seed means, so a
/// single-seed run has zero pooled spread. Ratios are sums of unmeasured over
/// sums of measured steps.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub seed: Option<u64>,
    pub episodes: usize,
    pub mean_costed_return: f64,
    pub std_costed_return: f64,
    pub mean_length: f64,
    pub std_length: f64,
    pub terminal_fraction: f64,
    pub measured_steps: usize,
    pub unmeasured_steps: usize,
    pub ratio: Option<f64>,
}

/// `1:x.xx`, or `undefined` when nothing was measured.
pub fn ratio_label(ratio: Option<f64>) -> String {
    match ratio {
        Some(r) => format!("1:{r:.2}"),
        None => "undefined".into(),
    }
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn window(logs: &[&EpisodeLog]) -> usize {
    (logs.len() as f64 * 0.1).ceil().max(1.0) as usize
}

fn group_by_seed(logs: &[EpisodeLog]) -> BTreeMap<u64, Vec<&EpisodeLog>> {
    let mut by_seed: BTreeMap<u64, Vec<&EpisodeLog>> = BTreeMap::new();
    for l in logs {
        by_seed.entry(l.seed).or_default().push(l);
    }
    for v in by_seed.values_mut() {
        v.sort_by_key(|l| l.episode);
    }
    by_seed
}

/// Per-seed rows (ascending seed) followed by the pooled row.
pub fn summarize_logs(logs: &[EpisodeLog]) -> Result<Vec<SummaryRow>> {
    if logs.is_empty() {
        return Err(Error::EmptyLogs("episode logs".into()));
    }
    let mut rows = Vec::new();
    for (seed, eps) in group_by_seed(logs) {
        let tail = &eps[eps.len() - window(&eps)..];
        let (mean_r, std_r) = mean_std(tail.iter().map(|l| l.costed_return));
        let (mean_l, std_l) = mean_std(tail.iter().map(|l| l.base_steps as f64));
        let measured = tail.iter().map(|l| l.measured_steps).sum();
        let unmeasured = tail.iter().map(|l| l.unmeasured_steps).sum();
        let terminal = tail.iter().filter(|l| l.end == EndCause::Terminal).count();
        rows.push(SummaryRow {
            seed: Some(seed),
            episodes: tail.len(),
            mean_costed_return: mean_r,
            std_costed_return: std_r,
            mean_length: mean_l,
            std_length: std_l,
            terminal_fraction: terminal as f64 / tail.len() as f64,
            measured_steps: measured,
            unmeasured_steps: unmeasured,
            ratio: ratio_from_counts(measured, unmeasured).ok(),
        });
    }
    let (mean_r, std_r) = mean_std(rows.iter().map(|r| r.mean_costed_return));
    let (mean_l, std_l) = mean_std(rows.iter().map(|r| r.mean_length));
    let (terminal, _) = mean_std(rows.iter().map(|r| r.terminal_fraction));
    let measured = rows.iter().map(|r| r.measured_steps).sum();
    let unmeasured = rows.iter().map(|r| r.unmeasured_steps).sum();
    let episodes = rows.iter().map(|r| r.episodes).sum();
    rows.push(SummaryRow {
        seed: None,
        episodes,
        mean_costed_return: mean_r,
        std_costed_return: std_r,
        mean_length: mean_l,
        std_length: std_l,
        terminal_fraction: terminal,
        measured_steps: measured,
        unmeasured_steps: unmeasured,
        ratio: ratio_from_counts(measured, unmeasured).ok(),
    });
    Ok(rows)
}

/// Reads `episodes.csv` from `dir` and writes `summary.csv` next to it.
pub fn summarize(dir: &Path) -> Result<Vec<SummaryRow>> {
    let path = dir.join("episodes.csv");
    let logs = read_episodes(&path)?;
    if logs.is_empty() {
        return Err(Error::EmptyLogs(path.display().to_string()));
    }
    let rows = summarize_logs(&logs)?;
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in &rows {
        let (scope, seed) = match r.seed {
            Some(s) => ("seed", s.to_string()),
            None => ("pooled", String::new()),
        };
        let _ = writeln!(
            out,
            "{scope},{seed},{},{},{},{},{},{},{},{},{},{}",
            r.episodes,
            r.mean_costed_return,
            r.std_costed_return,
            r.mean_length,
            r.std_length,
            r.terminal_fraction,
            r.measured_steps,
            r.unmeasured_steps,
            r.ratio.map_or(String::new(), |x| x.to_string()),
            ratio_label(r.ratio)
        );
    }
    std::fs::write(dir.join("summary.csv"), out)?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub bucket: usize,
    pub episode_start: u64,
    /// Exclusive.
    pub episode_end: u64,
    /// Seeds with at least one episode in the bucket.
    pub seeds: usize,
    pub mean_costed_return: f64,
    pub std_costed_return: f64,
    pub mean_length: f64,
    pub std_length: f64,
}

/// Splits the episode-index range into at most `buckets` equal spans; each
/// seed contributes its mean over a span and the row reports mean and
/// population std across seeds.
pub fn curves_from_logs(logs: &[EpisodeLog], buckets: usize) -> Vec<CurveRow> {
    let by_seed = group_by_seed(logs);
    let span = logs.iter().map(|l| l.episode + 1).max().unwrap_or(0);
    let buckets = (buckets as u64).min(span).max(1);
    let mut rows = Vec::new();
    for b in 0..buckets {
        let start = b * span / buckets;
        let end = (b + 1) * span / buckets;
        let mut returns = Vec::new();
        let mut lengths = Vec::new();
        for eps in by_seed.values() {
            let inside: Vec<_> = eps.iter().filter(|l| (start..end).contains(&l.episode)).collect();
            if inside.is_empty() {
                continue;
            }
            let n = inside.len() as f64;
            returns.push(inside.iter().map(|l| l.costed_return).sum::<f64>() / n);
            lengths.push(inside.iter().map(|l| l.base_steps as f64).sum::<f64>() / n);
        }
        if returns.is_empty() {
            continue;
        }
        let (mean_r, std_r) = mean_std(returns.iter().copied());
        let (mean_l, std_l) = mean_std(lengths.iter().copied());
        rows.push(CurveRow {
            bucket: b as usize,
            episode_start: start,
            episode_end: end,
            seeds: returns.len(),
            mean_costed_return: mean_r,
            std_costed_return: std_r,
            mean_length: mean_l,
            std_length: std_l,
        });
    }
    rows
}

/// Writes `curves.csv` into `dir` from its `episodes.csv`.
pub fn emit_curves(dir: &Path, buckets: usize) -> Result<Vec<CurveRow>> {
    let logs = read_episodes(&dir.join("episodes.csv"))?;
    let rows = curves_from_logs(&logs, buckets);
    let mut out = String::from(CURVES_HEADER);
    out.push('\n');
    for r in &rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.bucket, r.episode_start, r.episode_end, r.seeds, r.mean_costed_return, r.std_costed_return, r.mean_length, r.std_length
        );
    }
    std::fs::write(dir.join("curves.csv"), out)?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log(seed: u64, episode: u64, measured: usize, unmeasured: usize, ret: f64) -> EpisodeLog {
        EpisodeLog {
            seed,
            episode,
            base_steps: measured + unmeasured,
            decisions: measured,
            measured_steps: measured,
            unmeasured_steps: unmeasured,
            costed_return: ret,
            extrinsic_return: ret,
            discounted_return: ret,
            end: EndCause::Truncated,
        }
    }

    #[test]
    fn uniform_ratio_label() {
        let logs: Vec<_> = (0..20).map(|i| log(0, i, 4, 6, 1.0)).collect();
        let rows = summarize_logs(&logs).unwrap();
        assert_eq!(ratio_label(rows[0].ratio), "1:1.50");
        assert_eq!(rows[0].episodes, 2);
    }

    #[test]
    fn single_seed_pooled_spread_is_zero() {
        let logs: Vec<_> = (0..10).map(|i| log(3, i, 4, 6, i as f64)).collect();
        let rows = summarize_logs(&logs).unwrap();
        let pooled = rows.last().unwrap();
        assert_eq!(pooled.seed, None);
        assert_eq!(pooled.std_costed_return, 0.0);
        assert_eq!(pooled.std_length, 0.0);
    }

    #[test]
    fn empty_logs_rejected() {
        assert!(matches!(summarize_logs(&[]), Err(Error::EmptyLogs(_))));
    }

    #[test]
    fn curves_bucket_counts() {
        let logs: Vec<_> = (0..20).flat_map(|s| (0..300).map(move |i| log(s, i, 1, 1, s as f64))).collect();
        let rows = curves_from_logs(&logs, 100);
        assert_eq!(rows.len(), 100);
        assert!(rows.iter().all(|r| r.std_costed_return >= 0.0 && r.seeds == 20));
        let one: Vec<_> = (0..50).map(|i| log(0, i, 1, 1, 5.0)).collect();
        let rows = curves_from_logs(&one, 100);
        assert_eq!(rows.len(), 50);
        assert!(rows.iter().all(|r| r.std_costed_return == 0.0 && r.mean_costed_return == 5.0));
    }
}
