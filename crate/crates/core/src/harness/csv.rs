use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use super::run::EvalRow;
use crate::agents::{EndCause, EpisodeLog};
use crate::{Error, Result};

pub const EPISODES_HEADER: &str =
    "seed,episode,base_steps,decisions,measured_steps,unmeasured_steps,costed_return,extrinsic_return,end";
pub const EVAL_HEADER: &str =
    "seed,episode,decisions,mean_costed_return,std_costed_return,mean_base_steps,terminal_fraction,measured_steps,unmeasured_steps";

pub(crate) fn episode_line(out: &mut String, e: &EpisodeLog) {
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{},{}",
        e.seed,
        e.episode,
        e.base_steps,
        e.decisions,
        e.measured_steps,
        e.unmeasured_steps,
        e.costed_return,
        e.extrinsic_return,
        e.end.as_str()
    );
}

pub(crate) fn eval_line(out: &mut String, e: &EvalRow) {
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{},{}",
        e.seed,
        e.episode,
        e.decisions,
        e.mean_costed_return,
        e.std_costed_return,
        e.mean_base_steps,
        e.terminal_fraction,
        e.measured_steps,
        e.unmeasured_steps
    );
}

/// Splits a CSV file into rows after checking its header.
pub(crate) fn rows(path: &Path, header: &str) -> Result<Vec<(usize, Vec<String>)>> {
    let text = std::fs::read_to_string(path)?;
    let file = path.display().to_string();
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == header => {}
        Some((_, h)) => {
            return Err(Error::Csv { file, line: 1, message: format!("unexpected header `{h}`") });
        }
        None => return Err(Error::EmptyLogs(file)),
    }
    let width = header.split(',').count();
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<String> = line.split(',').map(|s| s.trim().to_string()).collect();
        if fields.len() != width {
            return Err(Error::Csv {
                file: file.clone(),
                line: i + 1,
                message: format!("expected {width} fields, found {}", fields.len()),
            });
        }
        out.push((i + 1, fields));
    }
    Ok(out)
}

pub(crate) fn field<T: FromStr>(path: &Path, line: usize, fields: &[String], i: usize) -> Result<T> {
    fields[i].parse().map_err(|_| Error::Csv {
        file: path.display().to_string(),
        line,
        message: format!("cannot parse field {} `{}`", i + 1, fields[i]),
    })
}

/// `discounted_return` is not stored and reads back as NaN.
pub fn read_episodes(path: &Path) -> Result<Vec<EpisodeLog>> {
    rows(path, EPISODES_HEADER)?
        .into_iter()
        .map(|(line, f)| {
            let end = match f[8].as_str() {
                "terminal" => EndCause::Terminal,
                "truncated" => EndCause::Truncated,
                other => {
                    return Err(Error::Csv {
                        file: path.display().to_string(),
                        line,
                        message: format!("unknown end cause `{other}`"),
                    })
                }
            };
            Ok(EpisodeLog {
                seed: field(path, line, &f, 0)?,
                episode: field(path, line, &f, 1)?,
                base_steps: field(path, line, &f, 2)?,
                decisions: field(path, line, &f, 3)?,
                measured_steps: field(path, line, &f, 4)?,
                unmeasured_steps: field(path, line, &f, 5)?,
                costed_return: field(path, line, &f, 6)?,
                extrinsic_return: field(path, line, &f, 7)?,
                discounted_return: f64::NAN,
                end,
            })
        })
        .collect()
}

pub fn read_evals(path: &Path) -> Result<Vec<EvalRow>> {
    rows(path, EVAL_HEADER)?
        .into_iter()
        .map(|(line, f)| {
            Ok(EvalRow {
                seed: field(path, line, &f, 0)?,
                episode: field(path, line, &f, 1)?,
                decisions: field(path, line, &f, 2)?,
                mean_costed_return: field(path, line, &f, 3)?,
                std_costed_return: field(path, line, &f, 4)?,
                mean_base_steps: field(path, line, &f, 5)?,
                terminal_fraction: field(path, line, &f, 6)?,
                measured_steps: field(path, line, &f, 7)?,
                unmeasured_steps: field(path, line, &f, 8)?,
            })
        })
        .collect()
}
