//! File formats: scenario-trace CSV, dataset CSV and the trained-network
//! text format, plus the float convention shared by all of them.
//!
//! Floats are written at 17 significant digits (`%.16e`), which re-parses
//! bit-exactly for `f64`; the decimal separator is always '.'. Every CSV
//! starts with a `# config=<hex>` comment carrying the run's config hash.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::dataset::{Dataset, FeatureRow, Provenance};
use crate::mlp::{AffineScale, MlpNet};
use crate::scalar::Real;
use crate::sim::{SimSignals, SimTrace};

#[derive(Debug, thiserror::Error)]
pub enum FileError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },
}

impl FileError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        FileError::Io { path: path.display().to_string(), source }
    }

    fn parse(path: &Path, line: usize, msg: impl Into<String>) -> Self {
        FileError::Parse { path: path.display().to_string(), line, msg: msg.into() }
    }
}

/// 17-significant-digit scientific rendering; round-trips f64 bit-exactly.
pub fn fmt_g17<F: Real>(x: F) -> String {
    format!("{:.16e}", x)
}

/// FNV-1a 64-bit hash, used for the config provenance stamp.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn parse_field<F: Real>(path: &Path, line_no: usize, tok: &str) -> Result<F, FileError> {
    tok.trim()
        .parse::<F>()
        .map_err(|_| FileError::parse(path, line_no, format!("bad number '{tok}'")))
}

/// Writes a CSV with the `# config=` stamp and the given header line.
pub fn write_csv(
    path: &Path,
    config_hash: u64,
    header: &str,
    rows: impl IntoIterator<Item = String>,
) -> Result<(), FileError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| FileError::io(path, e))?;
    }
    let mut out = String::new();
    out.push_str(&format!("# config={config_hash:016x}\n"));
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    let mut f = fs::File::create(path).map_err(|e| FileError::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| FileError::io(path, e))
}

/// Reads a CSV written by [`write_csv`]: skips `#` comments, checks the
/// header and returns the data lines split on ','.
pub fn read_csv(
    path: &Path,
    expected_header: &str,
) -> Result<Vec<(usize, Vec<String>)>, FileError> {
    let text = fs::read_to_string(path).map_err(|e| FileError::io(path, e))?;
    let mut rows = Vec::new();
    let mut header_seen = false;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if !header_seen {
            if trimmed != expected_header {
                return Err(FileError::parse(
                    path,
                    line_no,
                    format!("expected header '{expected_header}', found '{trimmed}'"),
                ));
            }
            header_seen = true;
            continue;
        }
        rows.push((line_no, trimmed.split(',').map(str::to_string).collect()));
    }
    if !header_seen {
        return Err(FileError::parse(path, 1, "missing header"));
    }
    Ok(rows)
}

pub const TRACE_HEADER: &str = "t,Vt,Vd,Vq,omega,delta,P,Q,Vf,Ef,scenario_id";

pub fn write_trace_csv<F: Real>(
    path: &Path,
    trace: &SimTrace<F>,
    config_hash: u64,
) -> Result<(), FileError> {
    let rows = trace.signals.iter().map(|s| {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            fmt_g17(s.t),
            fmt_g17(s.v_t),
            fmt_g17(s.v_d),
            fmt_g17(s.v_q),
            fmt_g17(s.omega),
            fmt_g17(s.delta),
            fmt_g17(s.p),
            fmt_g17(s.q),
            fmt_g17(s.v_f),
            fmt_g17(s.e_f),
            trace.scenario_id
        )
    });
    write_csv(path, config_hash, TRACE_HEADER, rows)
}

pub fn read_trace_csv<F: Real>(path: &Path) -> Result<SimTrace<F>, FileError> {
    let rows = read_csv(path, TRACE_HEADER)?;
    let mut signals = Vec::with_capacity(rows.len());
    let mut scenario_id = String::new();
    for (line_no, fields) in &rows {
        if fields.len() != 11 {
            return Err(FileError::parse(path, *line_no, "expected 11 fields"));
        }
        let f = |i: usize| parse_field::<F>(path, *line_no, &fields[i]);
        signals.push(SimSignals {
            t: f(0)?,
            v_t: f(1)?,
            v_d: f(2)?,
            v_q: f(3)?,
            omega: f(4)?,
            delta: f(5)?,
            p: f(6)?,
            q: f(7)?,
            v_f: f(8)?,
            e_f: f(9)?,
        });
        if scenario_id.is_empty() {
            scenario_id = fields[10].clone();
        }
    }
    if signals.is_empty() {
        return Err(FileError::parse(path, 1, "trace has no samples"));
    }
    let dt_sample = if signals.len() >= 2 {
        signals[1].t - signals[0].t
    } else {
        F::one()
    };
    Ok(SimTrace { signals, scenario_id, dt_sample })
}

pub const DATASET_HEADER: &str = "dVt,omega,P,Q,dVq,delta,Vf,scenario_id,flagged";

pub fn write_dataset_csv<F: Real>(
    path: &Path,
    data: &Dataset<F>,
    config_hash: u64,
) -> Result<(), FileError> {
    let rows = data.rows.iter().map(|r| {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            fmt_g17(r.dvt),
            fmt_g17(r.omega),
            fmt_g17(r.p),
            fmt_g17(r.q),
            fmt_g17(r.dvq),
            fmt_g17(r.delta),
            fmt_g17(r.vf),
            r.scenario_id,
            u8::from(r.flagged)
        )
    });
    write_csv(path, config_hash, DATASET_HEADER, rows)
}

pub fn read_dataset_csv<F: Real>(path: &Path) -> Result<Dataset<F>, FileError> {
    let raw = read_csv(path, DATASET_HEADER)?;
    let mut rows = Vec::with_capacity(raw.len());
    let mut sources: Vec<String> = Vec::new();
    let mut flagged_rows = 0usize;
    for (line_no, fields) in &raw {
        if fields.len() != 9 {
            return Err(FileError::parse(path, *line_no, "expected 9 fields"));
        }
        let f = |i: usize| parse_field::<F>(path, *line_no, &fields[i]);
        let flagged = match fields[8].trim() {
            "0" => false,
            "1" => true,
            other => {
                return Err(FileError::parse(path, *line_no, format!("bad flag '{other}'")))
            }
        };
        if flagged {
            flagged_rows += 1;
        }
        let scenario_id = fields[7].clone();
        if !sources.contains(&scenario_id) {
            sources.push(scenario_id.clone());
        }
        rows.push(FeatureRow {
            dvt: f(0)?,
            omega: f(1)?,
            p: f(2)?,
            q: f(3)?,
            dvq: f(4)?,
            delta: f(5)?,
            vf: f(6)?,
            scenario_id,
            flagged,
        });
    }
    Ok(Dataset { rows, provenance: Provenance { sources, flagged_rows }, seed: None })
}

const NET_MAGIC: &str = "exfl-net";
const NET_VERSION: u32 = 1;

/// Writes a trained network: version line, `n_in n_hidden`, then row-major
/// W1, W2 and the scale parameters, all at 17 significant digits.
pub fn write_net<F: Real>(path: &Path, net: &MlpNet<F>) -> Result<(), FileError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| FileError::io(path, e))?;
    }
    let mut out = String::new();
    out.push_str(&format!("{NET_MAGIC} {NET_VERSION}\n"));
    out.push_str(&format!("{} {}\n", net.n_in, net.n_hidden));
    let cols = net.n_in + 1;
    for j in 0..net.n_hidden {
        let row: Vec<String> =
            net.w1[j * cols..(j + 1) * cols].iter().map(|&w| fmt_g17(w)).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    let w2: Vec<String> = net.w2.iter().map(|&w| fmt_g17(w)).collect();
    out.push_str(&w2.join(" "));
    out.push('\n');
    for d in 0..net.n_in {
        out.push_str(&format!(
            "{} {}\n",
            fmt_g17(net.input_scale.center[d]),
            fmt_g17(net.input_scale.half_range[d])
        ));
    }
    out.push_str(&format!(
        "{} {}\n",
        fmt_g17(net.target_scale.0),
        fmt_g17(net.target_scale.1)
    ));
    fs::write(path, out).map_err(|e| FileError::io(path, e))
}

pub fn read_net<F: Real>(path: &Path) -> Result<MlpNet<F>, FileError> {
    let text = fs::read_to_string(path).map_err(|e| FileError::io(path, e))?;
    let mut lines = text.lines().enumerate();

    let (ln, magic) = lines
        .next()
        .ok_or_else(|| FileError::parse(path, 1, "empty network file"))?;
    let mut mt = magic.split_whitespace();
    if mt.next() != Some(NET_MAGIC) {
        return Err(FileError::parse(path, ln + 1, "not a network file"));
    }
    let version: u32 = mt
        .next()
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| FileError::parse(path, ln + 1, "missing version"))?;
    if version != NET_VERSION {
        return Err(FileError::parse(path, ln + 1, format!("unsupported version {version}")));
    }

    let (ln, dims) = lines
        .next()
        .ok_or_else(|| FileError::parse(path, 2, "missing dimensions"))?;
    let mut dt = dims.split_whitespace();
    let n_in: usize = dt
        .next()
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| FileError::parse(path, ln + 1, "bad n_in"))?;
    let n_hidden: usize = dt
        .next()
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| FileError::parse(path, ln + 1, "bad n_hidden"))?;

    let mut numbers_line = |count: usize| -> Result<Vec<F>, FileError> {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| FileError::parse(path, 0, "unexpected end of file"))?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != count {
            return Err(FileError::parse(
                path,
                ln + 1,
                format!("expected {count} values, found {}", toks.len()),
            ));
        }
        toks.iter().map(|t| parse_field::<F>(path, ln + 1, t)).collect()
    };

    let mut w1 = Vec::with_capacity(n_hidden * (n_in + 1));
    for _ in 0..n_hidden {
        w1.extend(numbers_line(n_in + 1)?);
    }
    let w2 = numbers_line(n_hidden + 1)?;
    let mut center = Vec::with_capacity(n_in);
    let mut half_range = Vec::with_capacity(n_in);
    for _ in 0..n_in {
        let pair = numbers_line(2)?;
        center.push(pair[0]);
        half_range.push(pair[1]);
    }
    let t = numbers_line(2)?;

    Ok(MlpNet {
        n_in,
        n_hidden,
        w1,
        w2,
        input_scale: AffineScale { center, half_range },
        target_scale: (t[0], t[1]),
    })
}
