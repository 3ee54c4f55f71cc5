//! Plain-text exchange formats: comma-separated tables with a header row,
//! `.` decimal separator, shortest round-trip float formatting and LF endings.

use std::io::{Read, Write};

use crate::dynamics::{DetuningScan, Histogram, ScanPoint};
use crate::error::{Error, Result};
use crate::wgm::Resonance;

pub const HISTOGRAM_HEADER: [&str; 2] = ["time_ns", "counts"];
pub const SCAN_HEADER: [&str; 3] = ["detuning_nm", "lifetime_ns", "sigma_ns"];
pub const SPECTRUM_HEADER: [&str; 2] = ["wavelength_nm", "intensity"];
pub const MODES_HEADER: [&str; 5] = ["polarization", "m", "p", "wavelength_nm", "mode_volume"];

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Parse(e.to_string())
}

fn writer<W: Write>(w: W, delimiter: u8) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .delimiter(delimiter)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

fn write_table<W: Write>(w: W, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut out = writer(w, b',');
    out.write_record(header).map_err(io_err)?;
    for r in rows {
        out.write_record(&r).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

fn read_table<R: Read>(r: R, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let got = rdr.headers().map_err(io_err)?.clone();
    if got.iter().ne(header.iter().copied()) {
        return Err(Error::Parse(format!(
            "expected header {:?}, found {:?}",
            header.join(","),
            got.iter().collect::<Vec<_>>().join(",")
        )));
    }
    rdr.records().map(|r| r.map_err(io_err)).collect()
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, what: &str) -> Result<T> {
    let raw = rec.get(i).unwrap_or("");
    raw.parse().map_err(|_| {
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        Error::Parse(format!("line {line}: bad {what} value {raw:?}"))
    })
}

/// One row per bin, keyed by its left edge.
pub fn write_histogram<W: Write>(w: W, hist: &Histogram<f64>) -> Result<()> {
    let rows = hist
        .counts
        .iter()
        .zip(&hist.bin_edges_ns)
        .map(|(c, e)| vec![e.to_string(), c.to_string()]);
    write_table(w, &HISTOGRAM_HEADER, rows)
}

/// Reads left edges and counts; the closing edge is one bin width past the
/// last row, with the width taken from the final pair of rows.
pub fn read_histogram<R: Read>(r: R, repetition_rate_mhz: f64) -> Result<Histogram<f64>> {
    let recs = read_table(r, &HISTOGRAM_HEADER)?;
    if recs.len() < 2 {
        return Err(Error::Histogram("need at least two bins".into()));
    }
    let mut edges = Vec::with_capacity(recs.len() + 1);
    let mut counts = Vec::with_capacity(recs.len());
    for rec in &recs {
        edges.push(field::<f64>(rec, 0, "time_ns")?);
        counts.push(field::<u64>(rec, 1, "counts")?);
    }
    let n = edges.len();
    let width = edges[n - 1] - edges[n - 2];
    edges.push(edges[n - 1] + width);
    let h = Histogram {
        bin_edges_ns: edges,
        counts,
        repetition_rate_mhz,
    };
    h.validate()?;
    Ok(h)
}

pub fn write_scan<W: Write>(w: W, scan: &DetuningScan<f64>) -> Result<()> {
    let rows = scan.points.iter().map(|p| {
        vec![
            p.detuning_nm.to_string(),
            p.lifetime_ns.to_string(),
            p.sigma_ns.to_string(),
        ]
    });
    write_table(w, &SCAN_HEADER, rows)
}

pub fn read_scan<R: Read>(r: R, reference_mode_spacing_nm: f64) -> Result<DetuningScan<f64>> {
    let points = read_table(r, &SCAN_HEADER)?
        .iter()
        .map(|rec| {
            Ok(ScanPoint {
                detuning_nm: field(rec, 0, "detuning_nm")?,
                lifetime_ns: field(rec, 1, "lifetime_ns")?,
                sigma_ns: field(rec, 2, "sigma_ns")?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let scan = DetuningScan {
        points,
        reference_mode_spacing_nm,
    };
    scan.validate()?;
    Ok(scan)
}

pub fn write_spectrum<W: Write>(w: W, spectrum: &[(f64, f64)]) -> Result<()> {
    let rows = spectrum.iter().map(|(x, y)| vec![x.to_string(), y.to_string()]);
    write_table(w, &SPECTRUM_HEADER, rows)
}

pub fn read_spectrum<R: Read>(r: R) -> Result<Vec<(f64, f64)>> {
    read_table(r, &SPECTRUM_HEADER)?
        .iter()
        .map(|rec| Ok((field(rec, 0, "wavelength_nm")?, field(rec, 1, "intensity")?)))
        .collect()
}

/// `mode_volume` is the traveling-wave volume in (λ/n)³.
pub fn write_modes<W: Write>(w: W, modes: &[Resonance<f64>]) -> Result<()> {
    let rows = modes.iter().map(|r| {
        vec![
            r.mode.polarization.to_string(),
            r.mode.azimuthal_number.to_string(),
            r.mode.radial_number.to_string(),
            r.mode.wavelength_nm.to_string(),
            r.mode.mode_volume_cubic_lambda_over_n.to_string(),
        ]
    });
    write_table(w, &MODES_HEADER, rows)
}

/// Arbitrary named columns of equal length.
pub fn write_columns<W: Write>(w: W, header: &[&str], columns: &[&[f64]]) -> Result<()> {
    let n = columns.first().map_or(0, |c| c.len());
    if let Some(c) = columns.iter().find(|c| c.len() != n) {
        return Err(Error::LengthMismatch {
            what: "output columns",
            left: n,
            right: c.len(),
        });
    }
    let rows = (0..n).map(|i| columns.iter().map(|c| c[i].to_string()).collect());
    write_table(w, header, rows)
}

/// Tab-separated matrix: header `shift_nm` then the wavelengths, one row per shift.
pub fn write_tuning_map<W: Write>(
    w: W,
    wavelengths_nm: &[f64],
    shifts_nm: &[f64],
    rows: &[Vec<f64>],
) -> Result<()> {
    let mut out = writer(w, b'\t');
    let mut header = vec!["shift_nm".to_string()];
    header.extend(wavelengths_nm.iter().map(|x| x.to_string()));
    out.write_record(&header).map_err(io_err)?;
    for (s, row) in shifts_nm.iter().zip(rows) {
        let mut rec = vec![s.to_string()];
        rec.extend(row.iter().map(|x| x.to_string()));
        out.write_record(&rec).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}
