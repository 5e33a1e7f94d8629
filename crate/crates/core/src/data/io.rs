use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::types::{DevicePosition, RawRecording, TimeSeriesWindow};
use crate::error::{Error, Result};

const FIXED_COLUMNS: [&str; 3] = ["subject_id", "position", "label"];

/// Reads one recording: header `subject_id,position,label,ch0..ch{D-1}`,
/// one row per timestamp, empty label for unlabeled rows.
pub fn read_recording_csv(path: &Path, sample_rate_hz: f64) -> Result<RawRecording> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(csv_err(path))?;
    let header = rdr.headers().map_err(csv_err(path))?.clone();
    if header.len() < 4 || header.iter().take(3).ne(FIXED_COLUMNS.iter().copied()) {
        return Err(Error::Data(format!("{}: header must start with subject_id,position,label and name at least one channel", path.display())));
    }
    let d = header.len() - 3;
    let mut channels = vec![Vec::new(); d];
    let mut labels = vec![];
    let mut subject: Option<String> = None;
    let mut position = DevicePosition::Unspecified;
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        let at = |msg: String| Error::Data(format!("{}:{}: {msg}", path.display(), row + 2));
        match &subject {
            None => {
                subject = Some(rec[0].to_string());
                position = rec[1].parse()?;
            }
            Some(s) if s != &rec[0] => return Err(at(format!("subject changes from `{s}` to `{}`", &rec[0]))),
            _ => {}
        }
        labels.push(if rec[2].is_empty() {
            None
        } else {
            Some(rec[2].parse::<usize>().map_err(|e| at(format!("label `{}`: {e}", &rec[2])))?)
        });
        for (c, ch) in channels.iter_mut().enumerate() {
            let v: f32 = rec[3 + c].parse().map_err(|e| at(format!("channel {c}: {e}")))?;
            if !v.is_finite() {
                return Err(at(format!("channel {c} is not finite")));
            }
            ch.push(v);
        }
    }
    let subject = subject.ok_or_else(|| Error::Data(format!("{}: no rows", path.display())))?;
    RawRecording::new(channels, sample_rate_hz, subject, position, Some(labels))
}

/// Reads a single CSV file or every `*.csv` in a directory (sorted by name).
pub fn read_recordings(path: &Path, sample_rate_hz: f64) -> Result<Vec<RawRecording>> {
    if path.is_dir() {
        let mut files: Vec<_> = std::fs::read_dir(path)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect();
        files.sort();
        if files.is_empty() {
            return Err(Error::Data(format!("{}: no csv files", path.display())));
        }
        files.iter().map(|f| read_recording_csv(f, sample_rate_hz)).collect()
    } else {
        Ok(vec![read_recording_csv(path, sample_rate_hz)?])
    }
}

pub fn write_recording_csv(path: &Path, rec: &RawRecording) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    let mut header: Vec<String> = FIXED_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend((0..rec.num_channels()).map(|c| format!("ch{c}")));
    w.write_record(&header).map_err(csv_err(path))?;
    for t in 0..rec.len() {
        let mut row = vec![rec.subject_id.clone(), rec.position.to_string(), rec.labels[t].map(|l| l.to_string()).unwrap_or_default()];
        row.extend(rec.channels.iter().map(|c| c[t].to_string()));
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::Data(format!("{}: {e}", path.display()))
}

#[derive(Serialize, Deserialize)]
struct WindowRecord {
    label: Option<usize>,
    domain: String,
    position: DevicePosition,
    values: Vec<Vec<f32>>,
}

/// Window cache, one JSON object per line.
pub fn write_windows_jsonl(path: &Path, windows: &[TimeSeriesWindow]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for w in windows {
        let rec = WindowRecord {
            label: w.label,
            domain: w.domain.clone(),
            position: w.position,
            values: w.values.chunks(w.channels).map(<[f32]>::to_vec).collect(),
        };
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_windows_jsonl(path: &Path) -> Result<Vec<TimeSeriesWindow>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out: Vec<TimeSeriesWindow> = vec![];
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: WindowRecord = serde_json::from_str(&line)?;
        let at = |msg: &str| Error::Data(format!("{}:{}: {msg}", path.display(), n + 1));
        let length = rec.values.len();
        let channels = rec.values.first().map_or(0, Vec::len);
        if rec.values.iter().any(|r| r.len() != channels) {
            return Err(at("ragged window"));
        }
        if let Some(first) = out.first() {
            if (first.length, first.channels) != (length, channels) {
                return Err(at("window shape differs from the first window"));
            }
        }
        let mut w = TimeSeriesWindow::new(rec.values.concat(), length, channels).map_err(|_| at("empty window"))?;
        if !w.is_finite() {
            return Err(at("non-finite value"));
        }
        w.label = rec.label;
        w.domain = rec.domain;
        w.position = rec.position;
        out.push(w);
    }
    Ok(out)
}
