//! CSV persistence for BER curves.
//!
//! Metadata goes first as `# key=value` comment lines, followed by the
//! fixed header and one row per SNR point. Floats are written in their
//! shortest round-trip form.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::engine::{BerCurve, BerPoint};
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 5] = ["snr_db", "bit_errors", "bits_simulated", "ber", "trials"];

pub fn write_curve<W: Write>(curve: &BerCurve, mut out: W) -> Result<()> {
    for (k, v) in &curve.metadata {
        if k.contains(['=', '\n']) || v.contains('\n') {
            return Err(Error::InvalidConfig(format!("metadata entry {k:?} cannot be stored")));
        }
        writeln!(out, "# {k}={v}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Parse(e.to_string());
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for p in &curve.points {
        w.write_record([
            p.snr_db.to_string(),
            p.bit_errors.to_string(),
            p.bits_simulated.to_string(),
            p.ber.to_string(),
            p.trials.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_curve<R: Read>(input: R) -> Result<BerCurve> {
    let mut metadata = BTreeMap::new();
    let mut body = String::new();
    for line in BufReader::new(input).lines() {
        let line = line?;
        if let Some(rest) = line.strip_prefix('#') {
            let (k, v) = rest.trim_start().split_once('=').ok_or_else(|| Error::Parse(format!("bad metadata line {line:?}")))?;
            metadata.insert(k.to_string(), v.to_string());
        } else {
            body.push_str(&line);
            body.push('\n');
        }
    }
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    let headers = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::Parse(format!("missing column {name}")))
    };
    let idx = [col("snr_db")?, col("bit_errors")?, col("bits_simulated")?, col("ber")?, col("trials")?];
    let mut points = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        let field = |i: usize| rec.get(idx[i]).ok_or_else(|| Error::Parse("short row".into()));
        let f = |i: usize| field(i)?.parse::<f64>().map_err(|e| Error::Parse(e.to_string()));
        let u = |i: usize| field(i)?.parse::<u64>().map_err(|e| Error::Parse(e.to_string()));
        points.push(BerPoint { snr_db: f(0)?, bit_errors: u(1)?, bits_simulated: u(2)?, ber: f(3)?, trials: u(4)? });
    }
    Ok(BerCurve { metadata, points })
}

pub fn write_curve_csv(curve: &BerCurve, path: impl AsRef<Path>) -> Result<()> {
    write_curve(curve, std::io::BufWriter::new(std::fs::File::create(path)?))
}

pub fn read_curve_csv(path: impl AsRef<Path>) -> Result<BerCurve> {
    read_curve(std::fs::File::open(path)?)
}
