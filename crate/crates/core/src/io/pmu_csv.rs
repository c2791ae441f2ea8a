use std::collections::HashMap;
use std::f64::consts::TAU;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::spectrum::AmplitudeSpectrum;
use crate::types::{validate_window, MeasurementWindow, RawSamples};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngleUnit {
    Rad,
    Deg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpeedUnit {
    /// rad/s
    RadPerS,
    /// Hz, converted with 2π
    Hz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Quantity {
    Angle,
    Speed,
    Rocof,
}

#[derive(Debug, Clone, Copy)]
struct Column {
    machine: usize,
    quantity: Quantity,
    /// Factor taking the file value to rad, rad/s or rad/s².
    to_si: f64,
}

fn parse_header_field(field: &str, line: usize) -> Result<(String, Quantity, f64)> {
    let parts: Vec<&str> = field.trim().split(':').collect();
    let [label, quantity, unit] = parts.as_slice() else {
        return Err(Error::Parse {
            line,
            message: format!("column `{field}` is not `<label>:<quantity>:<unit>`"),
        });
    };
    let (quantity, to_si) = match (*quantity, *unit) {
        ("angle", "rad") => (Quantity::Angle, 1.0),
        ("angle", "deg") => (Quantity::Angle, std::f64::consts::PI / 180.0),
        ("speed", "radps") => (Quantity::Speed, 1.0),
        ("speed", "hz") => (Quantity::Speed, TAU),
        ("rocof", "radps2") => (Quantity::Rocof, 1.0),
        ("rocof", "hzps") => (Quantity::Rocof, TAU),
        ("angle" | "speed" | "rocof", other) => return Err(Error::Unit(other.to_string())),
        (other, _) => {
            return Err(Error::Parse {
                line,
                message: format!("unknown quantity `{other}`"),
            })
        }
    };
    if label.is_empty() {
        return Err(Error::Parse {
            line,
            message: "empty machine label".into(),
        });
    }
    Ok((label.to_string(), quantity, to_si))
}

/// Infers the sampling rate from the mean interval, snapping to the nearest
/// integer rate when within 1e-9 relative.
fn infer_rate(timestamps: &[f64]) -> Result<f64> {
    let m = timestamps.len();
    if m < 2 {
        return Err(Error::TooShort {
            len: m,
            min: crate::types::MIN_SAMPLES,
        });
    }
    let span = timestamps[m - 1] - timestamps[0];
    if !(span > 0.0) {
        return Err(Error::InvalidArgument("timestamps do not increase".into()));
    }
    let rate = (m - 1) as f64 / span;
    let snapped = rate.round();
    Ok(if snapped > 0.0 && (rate - snapped).abs() <= 1e-9 * rate {
        snapped
    } else {
        rate
    })
}

/// Reads a PMU window in the `time_s, <label>:<quantity>:<unit>, …` layout.
pub fn read_pmu_csv(reader: impl Read) -> Result<MeasurementWindow> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = csv
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    if header.get(0).map(str::trim) != Some("time_s") {
        return Err(Error::Parse {
            line: 1,
            message: "first column must be `time_s`".into(),
        });
    }

    let mut labels: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut columns = Vec::with_capacity(header.len() - 1);
    let mut seen = HashMap::new();
    for field in header.iter().skip(1) {
        let (label, quantity, to_si) = parse_header_field(field, 1)?;
        let machine = *index.entry(label.clone()).or_insert_with(|| {
            labels.push(label.clone());
            labels.len() - 1
        });
        if seen.insert((machine, quantity as u8), ()).is_some() {
            return Err(Error::Parse {
                line: 1,
                message: format!("duplicate column for `{field}`"),
            });
        }
        columns.push(Column {
            machine,
            quantity,
            to_si,
        });
    }
    let r = labels.len();
    let count = |q: Quantity| columns.iter().filter(|c| c.quantity == q).count();
    for q in [Quantity::Angle, Quantity::Speed] {
        if count(q) != r {
            return Err(Error::Parse {
                line: 1,
                message: "every machine needs one angle and one speed column".into(),
            });
        }
    }
    let rocof_columns = count(Quantity::Rocof);
    if rocof_columns != 0 && rocof_columns != r {
        return Err(Error::Parse {
            line: 1,
            message: "rocof columns must cover every machine or none".into(),
        });
    }

    let mut raw = RawSamples {
        labels,
        rocof: (rocof_columns > 0).then(Vec::new),
        ..RawSamples::default()
    };
    for (k, record) in csv.records().enumerate() {
        let line = k + 2;
        let record = record.map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        if record.len() != header.len() {
            return Err(Error::Parse {
                line,
                message: format!("{} fields, expected {}", record.len(), header.len()),
            });
        }
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|e| Error::Parse {
                line,
                message: format!("`{s}`: {e}"),
            })
        };
        raw.timestamps.push(parse(&record[0])?);
        let mut angles = vec![0.0; r];
        let mut speeds = vec![0.0; r];
        let mut rocof = vec![0.0; r];
        for (col, field) in columns.iter().zip(record.iter().skip(1)) {
            let value = parse(field)? * col.to_si;
            match col.quantity {
                Quantity::Angle => angles[col.machine] = value,
                Quantity::Speed => speeds[col.machine] = value,
                Quantity::Rocof => rocof[col.machine] = value,
            }
        }
        raw.angles.push(angles);
        raw.speeds.push(speeds);
        if let Some(rows) = raw.rocof.as_mut() {
            rows.push(rocof);
        }
    }
    let rate = infer_rate(&raw.timestamps)?;
    validate_window(raw, rate)
}

pub fn load_pmu_csv(path: impl AsRef<Path>) -> Result<MeasurementWindow> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_pmu_csv(file)
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes a window in SI units (rad, rad/s, rad/s²) with 17 significant digits.
pub fn write_pmu_csv_to(window: &MeasurementWindow, writer: impl Write) -> Result<()> {
    let ser = |e: csv::Error| Error::Serialization(e.to_string());
    let mut out = csv::Writer::from_writer(writer);
    let mut header = vec!["time_s".to_string()];
    for label in window.labels() {
        header.push(format!("{label}:angle:rad"));
        header.push(format!("{label}:speed:radps"));
    }
    if window.rocof().is_some() {
        header.extend(window.labels().iter().map(|l| format!("{l}:rocof:radps2")));
    }
    out.write_record(&header).map_err(ser)?;
    for (k, &t) in window.timestamps().iter().enumerate() {
        let mut row = vec![fmt(t)];
        for j in 0..window.machines() {
            row.push(fmt(window.angles()[(k, j)]));
            row.push(fmt(window.speeds()[(k, j)]));
        }
        if let Some(rocof) = window.rocof() {
            row.extend((0..window.machines()).map(|j| fmt(rocof[(k, j)])));
        }
        out.write_record(&row).map_err(ser)?;
    }
    out.flush().map_err(|e| Error::Serialization(e.to_string()))
}

pub fn write_pmu_csv(window: &MeasurementWindow, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_pmu_csv_to(window, file)
}

/// Long-format spectra: one `bin_hz, amplitude, channel` row per bin.
pub fn write_spectra(spectra: &[AmplitudeSpectrum], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let ser = |e: csv::Error| Error::Serialization(e.to_string());
    let mut out = csv::Writer::from_writer(file);
    out.write_record(["bin_hz", "amplitude", "channel"]).map_err(ser)?;
    for s in spectra {
        for (f, a) in s.frequencies.iter().zip(&s.amplitudes) {
            out.write_record([fmt(*f), fmt(*a), s.label.clone()]).map_err(ser)?;
        }
    }
    out.flush().map_err(|e| Error::io(path, e))
}
