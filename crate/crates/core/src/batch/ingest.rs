//! Score-sample files.
//!
//! CSV: header `input_id,sample_id,score_class_0,...,score_class_{k-1}`, one
//! row per noise draw, rows of one input contiguous.
//!
//! Binary (little endian, column-major per input):
//!
//! ```text
//! magic      4 bytes  "SCRB"
//! version    u8       1
//! k          u32      classes
//! n_inputs   u32
//! per input:
//!   id_len   u32, followed by id_len bytes of UTF-8
//!   m        u32      noise samples
//!   scores   k * m f64, class 0 samples first, then class 1, ...
//! ```

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use thiserror::Error;

use crate::error::Error;
use crate::gauss::Sigma;
use crate::measures::{validate_row, ScoreSamples};

pub const BINARY_MAGIC: &[u8; 4] = b"SCRB";
pub const BINARY_VERSION: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleFormat {
    Csv,
    Binary,
}

impl SampleFormat {
    /// `.bin` and `.scrb` files are binary; anything else is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("bin") | Some("scrb") => SampleFormat::Binary,
            _ => SampleFormat::Csv,
        }
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: io::Error },

    #[error("read error: {0}")]
    Stream(#[from] io::Error),

    #[error("no inputs found")]
    NoInputs,

    #[error("bad header: {0}")]
    BadHeader(String),

    #[error("line {line}: malformed row: {reason}")]
    MalformedRow { line: u64, reason: String },

    #[error("line {line}: input {input_id:?} reappears after other inputs")]
    NonContiguous { line: u64, input_id: String },

    #[error("line {line}: row sums to {sum}, expected 1 within 1e-6")]
    RowSum { line: u64, sum: f64 },

    #[error("line {line}: score {value} is not a probability")]
    InvalidScore { line: u64, value: f64 },

    #[error("input {input_id:?}: {source}")]
    Invalid { input_id: String, source: Error },

    #[error("binary format: {0}")]
    Binary(String),
}

/// One input read from a samples file. Validation failures stay attached to
/// the input so the rest of the batch can proceed.
#[derive(Debug)]
pub struct IngestedInput {
    pub id: String,
    pub samples: Result<ScoreSamples, IngestError>,
}

pub fn ingest_samples(
    path: &Path,
    format: SampleFormat,
    sigma: Sigma,
) -> Result<Vec<IngestedInput>, IngestError> {
    let file = File::open(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let reader = BufReader::new(file);
    match format {
        SampleFormat::Csv => read_csv(reader, sigma),
        SampleFormat::Binary => read_binary(reader, sigma),
    }
}

/// Like [`ingest_samples`] but fails on the first invalid input.
pub fn ingest_samples_strict(
    path: &Path,
    format: SampleFormat,
    sigma: Sigma,
) -> Result<Vec<(String, ScoreSamples)>, IngestError> {
    ingest_samples(path, format, sigma)?
        .into_iter()
        .map(|input| Ok((input.id, input.samples?)))
        .collect()
}

struct PendingInput {
    id: String,
    rows: Vec<f64>,
    lines: Vec<u64>,
}

impl PendingInput {
    fn finish(self, k: usize, sigma: Sigma) -> IngestedInput {
        let PendingInput {
            id,
            mut rows,
            lines,
        } = self;
        let checked = rows
            .chunks_exact_mut(k)
            .zip(&lines)
            .try_for_each(|(row, &line)| {
                validate_row(0, row).map_err(|e| match e {
                    Error::RowSum { sum, .. } => IngestError::RowSum { line, sum },
                    Error::InvalidScore { value, .. } => IngestError::InvalidScore { line, value },
                    other => IngestError::Invalid {
                        input_id: id.clone(),
                        source: other,
                    },
                })
            });
        let samples = checked.and_then(|()| {
            ScoreSamples::from_row_major(rows, k, sigma).map_err(|source| IngestError::Invalid {
                input_id: id.clone(),
                source,
            })
        });
        IngestedInput { id, samples }
    }
}

pub fn read_csv<R: Read>(reader: R, sigma: Sigma) -> Result<Vec<IngestedInput>, IngestError> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = csv.records();

    let header = match records.next() {
        None => return Err(IngestError::NoInputs),
        Some(r) => r.map_err(csv_error)?,
    };
    let k = parse_header(&header)?;

    let mut inputs = Vec::new();
    let mut finished: HashSet<String> = HashSet::new();
    let mut current: Option<PendingInput> = None;

    for record in records {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != k + 2 {
            return Err(IngestError::MalformedRow {
                line,
                reason: format!("expected {} fields, found {}", k + 2, record.len()),
            });
        }
        let id = &record[0];
        if id.is_empty() {
            return Err(IngestError::MalformedRow {
                line,
                reason: "empty input_id".into(),
            });
        }
        record[1]
            .parse::<u64>()
            .map_err(|e| IngestError::MalformedRow {
                line,
                reason: format!("sample_id {:?}: {e}", &record[1]),
            })?;

        if current.as_ref().map(|c| c.id.as_str()) != Some(id) {
            if finished.contains(id) {
                return Err(IngestError::NonContiguous {
                    line,
                    input_id: id.to_string(),
                });
            }
            if let Some(done) = current.take() {
                finished.insert(done.id.clone());
                inputs.push(done.finish(k, sigma));
            }
            current = Some(PendingInput {
                id: id.to_string(),
                rows: Vec::new(),
                lines: Vec::new(),
            });
        }
        let pending = current.as_mut().expect("current input set above");
        for field in record.iter().skip(2) {
            let value = field
                .parse::<f64>()
                .map_err(|e| IngestError::MalformedRow {
                    line,
                    reason: format!("score {field:?}: {e}"),
                })?;
            pending.rows.push(value);
        }
        pending.lines.push(line);
    }
    if let Some(done) = current.take() {
        inputs.push(done.finish(k, sigma));
    }
    if inputs.is_empty() {
        return Err(IngestError::NoInputs);
    }
    Ok(inputs)
}

fn csv_error(e: csv::Error) -> IngestError {
    let line = e.position().map_or(0, |p| p.line());
    IngestError::MalformedRow {
        line,
        reason: e.to_string(),
    }
}

fn parse_header(header: &csv::StringRecord) -> Result<usize, IngestError> {
    if header.len() < 3 || &header[0] != "input_id" || &header[1] != "sample_id" {
        return Err(IngestError::BadHeader(
            "expected input_id,sample_id,score_class_0,...".into(),
        ));
    }
    for (i, name) in header.iter().skip(2).enumerate() {
        if name != format!("score_class_{i}") {
            return Err(IngestError::BadHeader(format!(
                "column {} is {name:?}, expected \"score_class_{i}\"",
                i + 2
            )));
        }
    }
    Ok(header.len() - 2)
}

fn common_k(inputs: &[(String, ScoreSamples)]) -> io::Result<usize> {
    let k = inputs.first().map_or(0, |(_, s)| s.k());
    if inputs.iter().any(|(_, s)| s.k() != k) {
        return Err(io::Error::new(
            io::ErrorKind::InvalidInput,
            "all inputs in one file must have the same number of classes",
        ));
    }
    Ok(k)
}

pub fn write_csv<W: Write>(writer: W, inputs: &[(String, ScoreSamples)]) -> io::Result<()> {
    let k = common_k(inputs)?;
    let mut w = BufWriter::new(writer);
    write!(w, "input_id,sample_id")?;
    for i in 0..k {
        write!(w, ",score_class_{i}")?;
    }
    writeln!(w)?;
    for (id, samples) in inputs {
        for (j, row) in samples.rows().enumerate() {
            write!(w, "{id},{j}")?;
            for v in row {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
    }
    w.flush()
}

pub fn read_binary<R: Read>(
    mut reader: R,
    sigma: Sigma,
) -> Result<Vec<IngestedInput>, IngestError> {
    let mut magic = [0u8; 4];
    match reader.read_exact(&mut magic) {
        Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => return Err(IngestError::NoInputs),
        other => other?,
    }
    if &magic != BINARY_MAGIC {
        return Err(IngestError::Binary("bad magic".into()));
    }
    let version = reader.read_u8()?;
    if version != BINARY_VERSION {
        return Err(IngestError::Binary(format!(
            "unsupported version {version}"
        )));
    }
    let k = reader.read_u32::<LittleEndian>()? as usize;
    let n_inputs = reader.read_u32::<LittleEndian>()? as usize;
    if k == 0 {
        return Err(IngestError::Binary("k must be positive".into()));
    }
    if n_inputs == 0 {
        return Err(IngestError::NoInputs);
    }

    let mut inputs = Vec::with_capacity(n_inputs);
    for _ in 0..n_inputs {
        let id_len = reader.read_u32::<LittleEndian>()? as usize;
        let mut id = vec![0u8; id_len];
        reader.read_exact(&mut id)?;
        let id = String::from_utf8(id).map_err(|e| IngestError::Binary(e.to_string()))?;
        let m = reader.read_u32::<LittleEndian>()? as usize;
        let mut columns = vec![0.0; k * m];
        reader.read_f64_into::<LittleEndian>(&mut columns)?;
        let mut rows = vec![0.0; k * m];
        for c in 0..k {
            for j in 0..m {
                rows[j * k + c] = columns[c * m + j];
            }
        }
        let samples =
            ScoreSamples::from_row_major(rows, k, sigma).map_err(|source| IngestError::Invalid {
                input_id: id.clone(),
                source,
            });
        inputs.push(IngestedInput { id, samples });
    }
    Ok(inputs)
}

pub fn write_binary<W: Write>(writer: W, inputs: &[(String, ScoreSamples)]) -> io::Result<()> {
    let k = common_k(inputs)?;
    let mut w = BufWriter::new(writer);
    w.write_all(BINARY_MAGIC)?;
    w.write_u8(BINARY_VERSION)?;
    w.write_u32::<LittleEndian>(k as u32)?;
    w.write_u32::<LittleEndian>(inputs.len() as u32)?;
    for (id, samples) in inputs {
        w.write_u32::<LittleEndian>(id.len() as u32)?;
        w.write_all(id.as_bytes())?;
        w.write_u32::<LittleEndian>(samples.m() as u32)?;
        for c in 0..k {
            for row in samples.rows() {
                w.write_f64::<LittleEndian>(row[c])?;
            }
        }
    }
    w.flush()
}
