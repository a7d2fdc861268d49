use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::coarse::{contour_stats, contour_stripes, extract_stripes, BlockCell, CoarseFields, Contour, ContourStats, Phase, Stripe, StripeKind};
use crate::error::{Error, Result};
use crate::mc::Record;

pub const MEASUREMENTS_SCHEMA: &str = "kac-measurements/1";
pub const SWEEP_SCHEMA: &str = "kac-sweep/1";
pub const FIELD_SCHEMA: &str = "kac-theta-field/1";
pub const CENSUS_SCHEMA: &str = "kac-census/1";
pub const PROFILE_SCHEMA: &str = "kac-profile/1";

/// CSV text with a leading `# schema: <name>` line.
pub fn write_csv<S: AsRef<str>>(schema: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<S>>) -> Vec<u8> {
    let mut out = format!("# schema: {schema}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(header).expect("in-memory write");
        for row in rows {
            w.write_record(row.iter().map(|s| s.as_ref())).expect("in-memory write");
        }
        w.flush().expect("in-memory write");
    }
    out
}

/// Parses CSV written by [`write_csv`], checking the schema line.
pub fn read_csv(bytes: &[u8], schema: &str) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::parse("csv", e))?;
    let first = text.lines().next().unwrap_or_default();
    let found = first.strip_prefix("# schema: ").unwrap_or("<none>");
    if found != schema {
        return Err(Error::parse("csv", format!("expected schema {schema}, found {found}")));
    }
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(bytes);
    let header = r.headers().map_err(|e| Error::parse("csv", e))?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(String::from).collect()))
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::parse("csv", e))?;
    Ok((header, rows))
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";")
}

/// One row per record: `replica,sweep,channel,values` with the values
/// `;`-separated.
pub fn measurements_csv(records: &[Record]) -> Vec<u8> {
    write_csv(
        MEASUREMENTS_SCHEMA,
        &["replica", "sweep", "channel", "values"],
        records.iter().map(|r| {
            vec![r.replica.to_string(), r.sweep.to_string(), r.channel.name().to_string(), join(&r.values)]
        }),
    )
}

pub fn parse_measurements(bytes: &[u8]) -> Result<Vec<Record>> {
    let (_, rows) = read_csv(bytes, MEASUREMENTS_SCHEMA)?;
    rows.into_iter()
        .map(|row| {
            let bad = |e: &dyn std::fmt::Display| Error::parse("measurements", e.to_string());
            let values = if row[3].is_empty() {
                Vec::new()
            } else {
                row[3].split(';').map(|v| v.parse::<f64>().map_err(|e| bad(&e))).collect::<Result<_>>()?
            };
            Ok(Record {
                replica: row[0].parse().map_err(|e| bad(&e))?,
                sweep: row[1].parse().map_err(|e| bad(&e))?,
                channel: row[2].parse()?,
                values,
            })
        })
        .collect()
}

fn stripe_label(kind: StripeKind) -> &'static str {
    match kind {
        StripeKind::PlusOverMinus => "+-",
        StripeKind::MinusOverPlus => "-+",
    }
}

/// Per ℓ+ block: Θ, θ, phase, number of η = 0 blocks, stripe membership.
pub fn field_csv(fields: &CoarseFields) -> Vec<u8> {
    let mut stripe_of: HashMap<BlockCell, &'static str> = HashMap::new();
    let per_layer = fields.lattice().width / fields.scales().ell_plus;
    for s in extract_stripes(fields) {
        for k in 0..s.blocks {
            let block = (s.start_block + k) % per_layer;
            for layer in [s.lower_layer, s.upper_layer] {
                stripe_of.insert(BlockCell { layer, block }, stripe_label(s.kind));
            }
        }
    }
    let rows: Vec<Vec<String>> = fields
        .cells()
        .map(|c| {
            let phase = match fields.phase_cell(c) {
                Phase::Plus => "plus",
                Phase::Minus => "minus",
                Phase::Undetermined => "undetermined",
            };
            vec![
                c.layer.to_string(),
                c.block.to_string(),
                fields.big_theta_of(c).to_string(),
                fields.theta_cell(c.layer, c.block as isize).to_string(),
                phase.to_string(),
                fields.eta_of(c).iter().filter(|&&e| e == 0).count().to_string(),
                stripe_of.get(&c).copied().unwrap_or("").to_string(),
            ]
        })
        .collect();
    write_csv(FIELD_SCHEMA, &["layer", "block", "big_theta", "theta", "phase", "zero_eta", "stripe"], rows)
}

/// A horizontal run of ℓ+ blocks in one layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockRun {
    pub layer: usize,
    pub start: usize,
    pub len: usize,
}

pub fn run_length(cells: &[BlockCell]) -> Vec<BlockRun> {
    let mut sorted = cells.to_vec();
    sorted.sort();
    let mut runs: Vec<BlockRun> = Vec::new();
    for c in sorted {
        match runs.last_mut() {
            Some(r) if r.layer == c.layer && r.start + r.len == c.block => r.len += 1,
            _ => runs.push(BlockRun { layer: c.layer, start: c.block, len: 1 }),
        }
    }
    runs
}

pub fn expand_runs(runs: &[BlockRun]) -> Vec<BlockCell> {
    runs.iter()
        .flat_map(|r| (r.start..r.start + r.len).map(move |block| BlockCell { layer: r.layer, block }))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteriorRecord {
    pub sign: i8,
    pub cells: Vec<BlockRun>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourRecord {
    /// `(layer, block)` of the first support cell.
    pub anchor: (usize, usize),
    pub sign: i8,
    pub support: Vec<BlockRun>,
    /// η on each support cell, in sorted cell order.
    pub specification: Vec<Vec<i8>>,
    pub stats: ContourStats,
    pub stripes: Vec<Stripe>,
    pub interiors: Vec<InteriorRecord>,
}

impl ContourRecord {
    pub fn of(fields: &CoarseFields, contour: &Contour) -> Self {
        let a = contour.anchor();
        ContourRecord {
            anchor: (a.layer, a.block),
            sign: contour.sign,
            support: run_length(&contour.support),
            specification: contour.specification.clone(),
            stats: contour_stats(fields, &contour.support, false),
            stripes: contour_stripes(fields, contour),
            interiors: contour
                .interiors
                .iter()
                .map(|i| InteriorRecord { sign: i.sign, cells: run_length(&i.cells) })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusFile {
    pub schema: String,
    pub width: usize,
    pub height: usize,
    pub ell_plus: usize,
    pub ell_minus: usize,
    pub m_beta: f64,
    pub frame_sign: i8,
    pub contours: Vec<ContourRecord>,
}

impl CensusFile {
    pub fn new(fields: &CoarseFields, frame_sign: i8, contours: &[Contour]) -> Self {
        let lat = fields.lattice();
        CensusFile {
            schema: CENSUS_SCHEMA.to_string(),
            width: lat.width,
            height: lat.height,
            ell_plus: fields.scales().ell_plus,
            ell_minus: fields.scales().ell_minus,
            m_beta: fields.m_beta(),
            frame_sign,
            contours: contours.iter().map(|c| ContourRecord::of(fields, c)).collect(),
        }
    }
}

/// One row per cell of a functional profile: `layer,cell,centre,m,fixed`.
pub fn profile_csv(profile: &[Vec<f64>], fixed: impl Fn(usize, usize) -> bool, spacing: usize) -> Vec<u8> {
    let rows = profile.iter().enumerate().flat_map(|(l, row)| {
        let fixed = &fixed;
        row.iter().enumerate().map(move |(i, v)| {
            vec![
                l.to_string(),
                i.to_string(),
                ((i as f64 + 0.5) * spacing as f64).to_string(),
                v.to_string(),
                fixed(l, i).to_string(),
            ]
        })
    });
    write_csv(PROFILE_SCHEMA, &["layer", "cell", "centre", "m", "fixed"], rows.collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::Channel;

    #[test]
    fn measurements_round_trip() {
        let recs = vec![
            Record { replica: 0, sweep: 3, channel: Channel::Magnetization, values: vec![0.25] },
            Record { replica: 1, sweep: 4, channel: Channel::LayerProfile, values: vec![0.1, -0.3, 1.0 / 3.0] },
        ];
        let bytes = measurements_csv(&recs);
        assert!(bytes.starts_with(b"# schema: kac-measurements/1\n"));
        assert_eq!(parse_measurements(&bytes).unwrap(), recs);
        assert!(read_csv(&bytes, SWEEP_SCHEMA).is_err());
    }

    #[test]
    fn runs_compress_and_expand() {
        let cells: Vec<BlockCell> = [(0, 1), (0, 2), (0, 3), (1, 2), (0, 5)]
            .iter()
            .map(|&(layer, block)| BlockCell { layer, block })
            .collect();
        let runs = run_length(&cells);
        assert_eq!(runs.len(), 3);
        let mut back = expand_runs(&runs);
        back.sort();
        let mut sorted = cells.clone();
        sorted.sort();
        assert_eq!(back, sorted);
    }
}
