//! CSV formats: trajectories and campaign reports.
//!
//! Floats are written as `{:.16e}` (17 significant digits), which reads back
//! to the same `f64`.

use std::io::{Read, Write};

use impulsive_core::trajectory::{Block, PiecewiseTrajectory};

use crate::campaign::CampaignRow;

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed trajectory CSV: {0}")]
    Format(String),
}

pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn trajectory_header(dimension: usize) -> Vec<String> {
    let mut h = vec!["t".to_string(), "segment_index".into(), "is_right_limit".into()];
    h.extend((0..dimension).map(|i| format!("w_{i}")));
    h
}

/// One row per node. The history block has segment index `-1`; the first
/// row of every segment after an impulse is its right limit.
pub fn write_trajectory<W: Write>(out: W, traj: &PiecewiseTrajectory) -> Result<(), CsvError> {
    let n = traj.dimension();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(trajectory_header(n))?;
    for (j, block) in traj.blocks().iter().enumerate() {
        let segment = j as i64 - 1;
        for (i, &t) in block.times.iter().enumerate() {
            let right = segment >= 1 && i == 0;
            let mut rec = vec![float(t), segment.to_string(), u8::from(right).to_string()];
            rec.extend(block.value(i, n).iter().map(|&v| float(v)));
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Rebuilds a trajectory from [`write_trajectory`] output. Delay, horizon and
/// impulse times are recovered from the rows.
pub fn read_trajectory<R: Read>(input: R) -> Result<PiecewiseTrajectory, CsvError> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.len() < 4 || header.iter().take(3).ne(["t", "segment_index", "is_right_limit"]) {
        return Err(CsvError::Format(format!("unexpected header {header:?}")));
    }
    let n = header.len() - 3;
    if header
        .iter()
        .skip(3)
        .ne(trajectory_header(n).iter().skip(3).map(String::as_str))
    {
        return Err(CsvError::Format(format!("unexpected header {header:?}")));
    }
    let parse = |s: &str| -> Result<f64, CsvError> {
        s.parse::<f64>()
            .map_err(|e| CsvError::Format(format!("bad number `{s}`: {e}")))
    };
    let mut blocks: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let segment: i64 = rec[1]
            .parse()
            .map_err(|e| CsvError::Format(format!("bad segment index `{}`: {e}", &rec[1])))?;
        let j = usize::try_from(segment + 1).map_err(|_| CsvError::Format(format!("segment {segment}")))?;
        if j == blocks.len() {
            blocks.push((Vec::new(), Vec::new()));
        } else if j + 1 != blocks.len() {
            return Err(CsvError::Format(format!("segment {segment} out of order")));
        }
        let (times, values) = &mut blocks[j];
        times.push(parse(&rec[0])?);
        for v in rec.iter().skip(3) {
            values.push(parse(v)?);
        }
    }
    if blocks.len() < 2 {
        return Err(CsvError::Format("need a history block and at least one segment".into()));
    }
    let delay = -blocks[0].0[0];
    let horizon = *blocks.last().unwrap().0.last().unwrap();
    let impulse_times = blocks[2..].iter().map(|(t, _)| t[0]).collect();
    let blocks = blocks.into_iter().map(|(t, v)| Block::new(t, v)).collect();
    PiecewiseTrajectory::from_blocks(n, delay, horizon, impulse_times, blocks)
        .map_err(|e| CsvError::Format(e.to_string()))
}

pub const CAMPAIGN_HEADER: [&str; 5] = [
    "instance_id",
    "t_max_violation",
    "max_violation",
    "num_impulses",
    "bound_at_horizon",
];

/// Campaign report: a `#` comment line naming the generator and seed, then
/// one row per instance.
pub fn write_campaign<W: Write>(mut out: W, generator: &str, seed: u64, rows: &[CampaignRow]) -> Result<(), CsvError> {
    writeln!(out, "# generator={generator} seed={seed}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CAMPAIGN_HEADER)?;
    for row in rows {
        w.write_record([
            row.instance_id.to_string(),
            float(row.t_max_violation),
            float(row.max_violation),
            row.num_impulses.to_string(),
            float(row.bound_at_horizon),
        ])?;
    }
    w.flush()?;
    Ok(())
}
