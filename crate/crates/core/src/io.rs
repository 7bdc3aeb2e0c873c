//! Text file formats: dataset CSV, its `.meta` sidecar, and numeric
//! formatting shared by every CSV this crate emits.
//!
//! Dataset CSV has one row per sample:
//!
//! ```text
//! trial_id,session,label,channel,sample_index,value
//! ```
//!
//! `trial_id`, `channel` and `sample_index` count from 0; `label` and
//! `session` from 1. The sidecar holds `key=value` lines with at least `N`,
//! `channels`, `K` and `seed`.

use std::io::{BufRead, Write};

use thiserror::Error;

use crate::basis::SampledSignal;
use crate::synth::{DatasetMeta, LabeledDataset, Trial};

pub const DATASET_HEADER: &str = "trial_id,session,label,channel,sample_index,value";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Invalid(#[from] crate::Error),
}

fn parse_err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Parse {
        line,
        message: message.into(),
    }
}

/// 17 significant digits in scientific notation; parses back to the same
/// `f64` bit pattern.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_dataset_csv<W: Write>(dataset: &LabeledDataset, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{DATASET_HEADER}")?;
    for (id, trial) in dataset.trials().iter().enumerate() {
        for (ch, signal) in trial.channels.iter().enumerate() {
            for (l, v) in signal.samples().iter().enumerate() {
                writeln!(
                    out,
                    "{id},{},{},{ch},{l},{}",
                    trial.session,
                    trial.label,
                    fmt_f64(*v)
                )?;
            }
        }
    }
    out.flush()
}

pub fn write_meta<W: Write>(meta: &DatasetMeta, mut out: W) -> std::io::Result<()> {
    writeln!(out, "N={}", meta.samples)?;
    writeln!(out, "channels={}", meta.channels)?;
    writeln!(out, "K={}", meta.classes)?;
    writeln!(out, "seed={}", meta.seed)?;
    for (k, v) in &meta.params {
        writeln!(out, "{k}={v}")?;
    }
    out.flush()
}

pub fn read_meta<R: BufRead>(input: R) -> Result<DatasetMeta, FormatError> {
    let (mut samples, mut channels, mut classes, mut seed) = (None, None, None, None);
    let mut params = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = trimmed
            .split_once('=')
            .ok_or_else(|| parse_err(i + 1, "expected key=value"))?;
        let (key, value) = (key.trim(), value.trim());
        let as_usize = |v: &str| {
            v.parse::<usize>()
                .map_err(|e| parse_err(i + 1, format!("{key}: {e}")))
        };
        match key {
            "N" => samples = Some(as_usize(value)?),
            "channels" => channels = Some(as_usize(value)?),
            "K" => classes = Some(as_usize(value)?),
            "seed" => {
                seed = Some(
                    value
                        .parse::<u64>()
                        .map_err(|e| parse_err(i + 1, format!("seed: {e}")))?,
                )
            }
            _ => params.push((key.to_string(), value.to_string())),
        }
    }
    let missing = |k: &str| parse_err(0, format!("metadata is missing `{k}`"));
    Ok(DatasetMeta {
        samples: samples.ok_or_else(|| missing("N"))?,
        channels: channels.ok_or_else(|| missing("channels"))?,
        classes: classes.ok_or_else(|| missing("K"))?,
        seed: seed.ok_or_else(|| missing("seed"))?,
        params,
    })
}

/// Reads a dataset CSV. Rows must be grouped by trial, then channel, with
/// sample indices in order; the shape must match `meta`.
pub fn read_dataset_csv<R: BufRead>(input: R, meta: DatasetMeta) -> Result<LabeledDataset, FormatError> {
    let mut lines = input.lines().enumerate();
    let header = match lines.next() {
        Some((_, header)) => header?,
        None => String::new(),
    };
    if header.trim() != DATASET_HEADER {
        return Err(parse_err(1, format!("expected header `{DATASET_HEADER}`")));
    }
    let mut trials: Vec<Trial> = Vec::new();
    let mut channels: Vec<Vec<f64>> = Vec::new();
    let mut current: Option<(usize, usize, usize)> = None;

    let finish = |trials: &mut Vec<Trial>,
                  channels: &mut Vec<Vec<f64>>,
                  head: (usize, usize, usize)|
     -> Result<(), FormatError> {
        let signals = channels
            .drain(..)
            .map(SampledSignal::new)
            .collect::<Result<Vec<_>, _>>()?;
        trials.push(Trial {
            channels: signals,
            label: head.2,
            session: head.1,
        });
        Ok(())
    };

    for (i, line) in lines {
        let line = line?;
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(parse_err(lineno, format!("expected 6 fields, got {}", fields.len())));
        }
        let int = |s: &str, name: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|e| parse_err(lineno, format!("{name}: {e}")))
        };
        let trial_id = int(fields[0], "trial_id")?;
        let session = int(fields[1], "session")?;
        let label = int(fields[2], "label")?;
        let channel = int(fields[3], "channel")?;
        let sample = int(fields[4], "sample_index")?;
        let value: f64 = fields[5]
            .trim()
            .parse()
            .map_err(|e| parse_err(lineno, format!("value: {e}")))?;

        match current {
            Some(head) if head.0 == trial_id => {
                if head.1 != session || head.2 != label {
                    return Err(parse_err(lineno, "session or label changes within a trial"));
                }
            }
            _ => {
                if let Some(head) = current {
                    finish(&mut trials, &mut channels, head)?;
                }
                if trial_id != trials.len() {
                    return Err(parse_err(
                        lineno,
                        format!("trial_id {trial_id} out of order, expected {}", trials.len()),
                    ));
                }
                current = Some((trial_id, session, label));
            }
        }
        if channel == channels.len() {
            channels.push(Vec::with_capacity(meta.samples));
        } else if channel + 1 != channels.len() {
            return Err(parse_err(lineno, format!("channel {channel} out of order")));
        }
        let samples = channels.last_mut().expect("channel pushed above");
        if sample != samples.len() {
            return Err(parse_err(lineno, format!("sample_index {sample} out of order")));
        }
        samples.push(value);
    }
    if let Some(head) = current {
        finish(&mut trials, &mut channels, head)?;
    }
    Ok(LabeledDataset::new(trials, meta)?)
}

/// Reads a single signal from a two-column CSV `sample_index,value` (header
/// optional), or from one value per line.
pub fn read_signal_csv<R: BufRead>(input: R) -> Result<SampledSignal, FormatError> {
    let mut values = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let field = match trimmed.split_once(',') {
            Some((idx, v)) => {
                if i == 0 && idx.trim().parse::<usize>().is_err() {
                    continue;
                }
                v
            }
            None => trimmed,
        };
        let v: f64 = field
            .trim()
            .parse()
            .map_err(|e| parse_err(i + 1, format!("value: {e}")))?;
        values.push(v);
    }
    Ok(SampledSignal::new(values)?)
}

pub fn write_signal_csv<W: Write>(signal: &SampledSignal, mut out: W) -> std::io::Result<()> {
    writeln!(out, "sample_index,value")?;
    for (l, v) in signal.samples().iter().enumerate() {
        writeln!(out, "{l},{}", fmt_f64(*v))?;
    }
    out.flush()
}
