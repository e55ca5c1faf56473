//! Bit-exact persistence: matrix files, dataset bundles, and run records.
//!
//! Two matrix encodings exist. The text form starts with a `rows cols`
//! header line followed by one line per row with space-separated reals at
//! 17 significant digits. The binary form is the magic bytes `OICA`, a
//! version byte (1), a reserved byte (0), two little-endian u64 for rows
//! and cols, then row-major little-endian IEEE-754 doubles. Binary
//! round-trips bitwise; content hashes are always computed over the binary
//! encoding so they are independent of the on-disk format.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;

use crate::error::{OicaError, Result};
use crate::result::{Algorithm, SeparationResult};
use crate::signal::{Dataset, RealMatrix};
use crate::sourcegen::{gg_kurtosis, SourceSpec};

const MAGIC: &[u8; 4] = b"OICA";
const VERSION: u8 = 1;

/// On-disk matrix encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Binary,
}

impl Format {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "text" => Some(Format::Text),
            "binary" => Some(Format::Binary),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Format::Text => "text",
            Format::Binary => "binary",
        }
    }
}

fn format_err(path: &Path, detail: impl Into<String>) -> OicaError {
    OicaError::Format {
        path: path.display().to_string(),
        detail: detail.into(),
    }
}

/// Serializes a matrix to the binary encoding.
pub fn matrix_binary_bytes(m: &RealMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(22 + 8 * m.len());
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.push(0);
    out.extend_from_slice(&(m.nrows() as u64).to_le_bytes());
    out.extend_from_slice(&(m.ncols() as u64).to_le_bytes());
    for v in m.iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn matrix_from_binary_bytes(path: &Path, bytes: &[u8]) -> Result<RealMatrix> {
    if bytes.len() < 22 {
        return Err(format_err(
            path,
            format!("truncated header: {} bytes at offset 0", bytes.len()),
        ));
    }
    if &bytes[0..4] != MAGIC {
        return Err(format_err(path, "bad magic at byte offset 0"));
    }
    if bytes[4] != VERSION {
        return Err(format_err(
            path,
            format!("unsupported version {} at byte offset 4", bytes[4]),
        ));
    }
    let rows = u64::from_le_bytes(bytes[6..14].try_into().unwrap()) as usize;
    let cols = u64::from_le_bytes(bytes[14..22].try_into().unwrap()) as usize;
    let expected = rows
        .checked_mul(cols)
        .and_then(|c| c.checked_mul(8))
        .and_then(|c| c.checked_add(22))
        .ok_or_else(|| format_err(path, "shape overflow at byte offset 6"))?;
    if bytes.len() != expected {
        return Err(format_err(
            path,
            format!(
                "payload length {} does not match {rows}x{cols} (expected {expected}) at byte offset 22",
                bytes.len()
            ),
        ));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for (k, chunk) in bytes[22..].chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().unwrap());
        if v.is_nan() || v.is_infinite() {
            return Err(format_err(
                path,
                format!("non-finite entry at byte offset {}", 22 + 8 * k),
            ));
        }
        data.push(v);
    }
    Array2::from_shape_vec((rows, cols), data)
        .map_err(|e| format_err(path, format!("shape error: {e}")))
}

fn matrix_text_string(m: &RealMatrix) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", m.nrows(), m.ncols());
    for row in m.rows() {
        let mut first = true;
        for v in row.iter() {
            if !first {
                out.push(' ');
            }
            let _ = write!(out, "{v:.16e}");
            first = false;
        }
        out.push('\n');
    }
    out
}

fn matrix_from_text(path: &Path, text: &str) -> Result<RealMatrix> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| format_err(path, "empty file (expected header on line 1)"))?;
    let mut parts = header.split(' ');
    let rows: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| format_err(path, "line 1: bad row count"))?;
    let cols: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| format_err(path, "line 1: bad column count"))?;
    if parts.next().is_some() {
        return Err(format_err(path, "line 1: trailing tokens in header"));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        let lineno = r + 2;
        let line = lines
            .next()
            .ok_or_else(|| format_err(path, format!("line {lineno}: missing row")))?;
        let mut count = 0usize;
        for token in line.split_whitespace() {
            let v: f64 = token.parse().map_err(|_| {
                format_err(path, format!("line {lineno}: unparseable value '{token}'"))
            })?;
            if !v.is_finite() {
                return Err(format_err(
                    path,
                    format!("line {lineno}: non-finite value '{token}'"),
                ));
            }
            data.push(v);
            count += 1;
        }
        if count != cols {
            return Err(format_err(
                path,
                format!("line {lineno}: expected {cols} values, found {count}"),
            ));
        }
    }
    if lines.any(|l| !l.trim().is_empty()) {
        return Err(format_err(path, "trailing data after last row"));
    }
    Array2::from_shape_vec((rows, cols), data)
        .map_err(|e| format_err(path, format!("shape error: {e}")))
}

/// Writes a matrix in the requested encoding.
pub fn write_matrix(path: &Path, m: &RealMatrix, format: Format) -> Result<()> {
    match format {
        Format::Binary => fs::write(path, matrix_binary_bytes(m))?,
        Format::Text => fs::write(path, matrix_text_string(m))?,
    }
    Ok(())
}

/// Reads a matrix in the given encoding.
pub fn read_matrix(path: &Path, format: Format) -> Result<RealMatrix> {
    let bytes = fs::read(path)?;
    match format {
        Format::Binary => matrix_from_binary_bytes(path, &bytes),
        Format::Text => {
            let text = String::from_utf8(bytes)
                .map_err(|e| format_err(path, format!("not UTF-8: {e}")))?;
            matrix_from_text(path, &text)
        }
    }
}

/// Reads a matrix, detecting the encoding from the magic bytes.
pub fn read_matrix_auto(path: &Path) -> Result<RealMatrix> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(MAGIC) {
        matrix_from_binary_bytes(path, &bytes)
    } else {
        let text =
            String::from_utf8(bytes).map_err(|e| format_err(path, format!("not UTF-8: {e}")))?;
        matrix_from_text(path, &text)
    }
}

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Content hash of a matrix: FNV-1a over its binary encoding, so the hash
/// does not depend on the on-disk format.
pub fn matrix_content_hash(m: &RealMatrix) -> u64 {
    fnv1a64(&matrix_binary_bytes(m))
}

fn parse_meta(path: &Path, text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (k, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            format_err(path, format!("line {}: expected key=value", k + 1))
        })?;
        pairs.push((key.to_string(), value.to_string()));
    }
    Ok(pairs)
}

fn meta_lookup<'a>(
    path: &Path,
    pairs: &'a [(String, String)],
    key: &str,
) -> Result<&'a str> {
    pairs
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
        .ok_or_else(|| format_err(path, format!("missing key '{key}'")))
}

/// A dataset bundle loaded from disk.
#[derive(Debug, Clone)]
pub struct DatasetBundle {
    pub dataset: Dataset,
    pub spec: SourceSpec,
    /// Content hash of the observed-signal matrix.
    pub hash: u64,
}

/// Writes a dataset bundle: `X.mat`, optional `A.mat` / `S.mat`, and a
/// `meta.txt` with sorted `key=value` lines.
pub fn write_dataset(dir: &Path, dataset: &Dataset, spec: &SourceSpec, format: Format) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_matrix(&dir.join("X.mat"), &dataset.observed, format)?;
    if let Some(a) = &dataset.mixing {
        write_matrix(&dir.join("A.mat"), a, format)?;
    }
    if let Some(s) = &dataset.sources {
        write_matrix(&dir.join("S.mat"), s, format)?;
    }
    let rhos = spec
        .rhos
        .iter()
        .map(|r| r.to_string())
        .collect::<Vec<_>>()
        .join(",");
    // keys sorted
    let meta = format!(
        "format={}\ngaussian_count={}\nhash_x={:016x}\nidentity_mixing={}\nrhos={}\nsamples={}\nseed={}\n",
        format.as_str(),
        spec.gaussian_count,
        matrix_content_hash(&dataset.observed),
        spec.identity_mixing,
        rhos,
        spec.samples,
        spec.seed,
    );
    fs::write(dir.join("meta.txt"), meta)?;
    Ok(())
}

/// Reads a dataset bundle, verifying the stored content hash of `X.mat`.
pub fn read_dataset(dir: &Path) -> Result<DatasetBundle> {
    let meta_path = dir.join("meta.txt");
    let meta_text = fs::read_to_string(&meta_path)?;
    let pairs = parse_meta(&meta_path, &meta_text)?;
    let rhos_raw = meta_lookup(&meta_path, &pairs, "rhos")?;
    let rhos: Vec<f64> = if rhos_raw.is_empty() {
        Vec::new()
    } else {
        rhos_raw
            .split(',')
            .map(|s| {
                s.parse()
                    .map_err(|_| format_err(&meta_path, format!("bad rho '{s}'")))
            })
            .collect::<Result<_>>()?
    };
    let gaussian_count: usize = meta_lookup(&meta_path, &pairs, "gaussian_count")?
        .parse()
        .map_err(|_| format_err(&meta_path, "bad gaussian_count"))?;
    let samples: usize = meta_lookup(&meta_path, &pairs, "samples")?
        .parse()
        .map_err(|_| format_err(&meta_path, "bad samples"))?;
    let seed: u64 = meta_lookup(&meta_path, &pairs, "seed")?
        .parse()
        .map_err(|_| format_err(&meta_path, "bad seed"))?;
    let identity_mixing = meta_lookup(&meta_path, &pairs, "identity_mixing")
        .map(|v| v == "true")
        .unwrap_or(false);
    let stored_hash = u64::from_str_radix(meta_lookup(&meta_path, &pairs, "hash_x")?, 16)
        .map_err(|_| format_err(&meta_path, "bad hash_x"))?;

    let x_path = dir.join("X.mat");
    let observed = read_matrix_auto(&x_path)?;
    let hash = matrix_content_hash(&observed);
    if hash != stored_hash {
        return Err(OicaError::ChecksumMismatch {
            path: x_path.display().to_string(),
            stored: format!("{stored_hash:016x}"),
            computed: format!("{hash:016x}"),
        });
    }
    let mixing = if dir.join("A.mat").exists() {
        Some(read_matrix_auto(&dir.join("A.mat"))?)
    } else {
        None
    };
    let sources = if dir.join("S.mat").exists() {
        Some(read_matrix_auto(&dir.join("S.mat"))?)
    } else {
        None
    };
    let mut true_kurtoses: Vec<f64> = rhos.iter().map(|&r| gg_kurtosis(r)).collect();
    true_kurtoses.extend(std::iter::repeat(0.0).take(gaussian_count));
    Ok(DatasetBundle {
        dataset: Dataset {
            observed,
            mixing,
            sources,
            true_kurtoses: Some(true_kurtoses),
        },
        spec: SourceSpec {
            rhos,
            gaussian_count,
            samples,
            seed,
            identity_mixing,
        },
        hash,
    })
}

/// Everything needed to reproduce and audit one algorithm invocation.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub algorithm: Algorithm,
    pub candidates: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub seed: u64,
    /// Dataset bundle directory as given at run time.
    pub dataset_path: PathBuf,
    /// Content hash of the dataset's observed matrix, verified on load.
    pub dataset_hash: u64,
    pub result: SeparationResult,
}

fn join_list<T: ToString>(values: &[T]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_list<T: std::str::FromStr>(path: &Path, raw: &str, key: &str) -> Result<Vec<T>> {
    if raw.is_empty() {
        return Ok(Vec::new());
    }
    raw.split(',')
        .map(|s| {
            s.parse()
                .map_err(|_| format_err(path, format!("bad {key} entry '{s}'")))
        })
        .collect()
}

/// Writes a run record directory: `meta.txt` (sorted keys), `W.mat`,
/// `upsilon.csv` (one value per line), `timing.csv`.
pub fn write_run_record(dir: &Path, record: &RunRecord, format: Format) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_matrix(&dir.join("W.mat"), &record.result.w, format)?;

    let mut upsilon = String::new();
    for u in &record.result.upsilons {
        let _ = writeln!(upsilon, "{u}");
    }
    fs::write(dir.join("upsilon.csv"), upsilon)?;

    let mut timing = String::from("component_index,seconds\n");
    for (i, s) in record.result.component_seconds.iter().enumerate() {
        let _ = writeln!(timing, "{},{s}", i + 1);
    }
    fs::write(dir.join("timing.csv"), timing)?;

    let meta = format!(
        "algorithm={}\nconverged_candidates={}\ndataset_hash={:016x}\ndataset_path={}\neps={}\niterations={}\nk={}\nl={}\nseed={}\nstop_index={}\nstop_upsilon={}\ntotal_seconds={}\n",
        record.algorithm,
        join_list(&record.result.converged_candidates),
        record.dataset_hash,
        record.dataset_path.display(),
        record.tolerance,
        join_list(&record.result.iterations),
        record.max_iterations,
        record.candidates,
        record.seed,
        record.result.stop_index.unwrap_or(0),
        record
            .result
            .stop_upsilon
            .map(|v| v.to_string())
            .unwrap_or_default(),
        record.result.total_seconds,
    );
    fs::write(dir.join("meta.txt"), meta)?;
    Ok(())
}

/// Reads a run record and verifies the referenced dataset's content hash.
pub fn read_run_record(dir: &Path) -> Result<RunRecord> {
    let meta_path = dir.join("meta.txt");
    let meta_text = fs::read_to_string(&meta_path)?;
    let pairs = parse_meta(&meta_path, &meta_text)?;

    let algorithm = Algorithm::parse(meta_lookup(&meta_path, &pairs, "algorithm")?)
        .ok_or_else(|| format_err(&meta_path, "unknown algorithm"))?;
    let candidates: usize = meta_lookup(&meta_path, &pairs, "l")?
        .parse()
        .map_err(|_| format_err(&meta_path, "bad l"))?;
    let max_iterations: usize = meta_lookup(&meta_path, &pairs, "k")?
        .parse()
        .map_err(|_| format_err(&meta_path, "bad k"))?;
    let tolerance: f64 = meta_lookup(&meta_path, &pairs, "eps")?
        .parse()
        .map_err(|_| format_err(&meta_path, "bad eps"))?;
    let seed: u64 = meta_lookup(&meta_path, &pairs, "seed")?
        .parse()
        .map_err(|_| format_err(&meta_path, "bad seed"))?;
    let dataset_path = PathBuf::from(meta_lookup(&meta_path, &pairs, "dataset_path")?);
    let dataset_hash = u64::from_str_radix(meta_lookup(&meta_path, &pairs, "dataset_hash")?, 16)
        .map_err(|_| format_err(&meta_path, "bad dataset_hash"))?;
    let stop_index_raw: usize = meta_lookup(&meta_path, &pairs, "stop_index")?
        .parse()
        .map_err(|_| format_err(&meta_path, "bad stop_index"))?;
    let stop_upsilon_raw = meta_lookup(&meta_path, &pairs, "stop_upsilon")?;
    let stop_upsilon = if stop_upsilon_raw.is_empty() {
        None
    } else {
        Some(
            stop_upsilon_raw
                .parse()
                .map_err(|_| format_err(&meta_path, "bad stop_upsilon"))?,
        )
    };
    let total_seconds: f64 = meta_lookup(&meta_path, &pairs, "total_seconds")?
        .parse()
        .map_err(|_| format_err(&meta_path, "bad total_seconds"))?;
    let iterations =
        parse_list(&meta_path, meta_lookup(&meta_path, &pairs, "iterations")?, "iterations")?;
    let converged_candidates = parse_list(
        &meta_path,
        meta_lookup(&meta_path, &pairs, "converged_candidates")?,
        "converged_candidates",
    )?;

    let w = read_matrix_auto(&dir.join("W.mat"))?;

    let upsilon_path = dir.join("upsilon.csv");
    let upsilons: Vec<f64> = fs::read_to_string(&upsilon_path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.parse()
                .map_err(|_| format_err(&upsilon_path, format!("bad value '{l}'")))
        })
        .collect::<Result<_>>()?;

    let timing_path = dir.join("timing.csv");
    let component_seconds: Vec<f64> = fs::read_to_string(&timing_path)?
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let (_, s) = l
                .split_once(',')
                .ok_or_else(|| format_err(&timing_path, format!("bad line '{l}'")))?;
            s.parse()
                .map_err(|_| format_err(&timing_path, format!("bad seconds '{s}'")))
        })
        .collect::<Result<_>>()?;

    // verify the dataset the record points at is still the one it was
    // produced from
    let x_path = dataset_path.join("X.mat");
    let observed = read_matrix_auto(&x_path)?;
    let computed = matrix_content_hash(&observed);
    if computed != dataset_hash {
        return Err(OicaError::ChecksumMismatch {
            path: x_path.display().to_string(),
            stored: format!("{dataset_hash:016x}"),
            computed: format!("{computed:016x}"),
        });
    }

    Ok(RunRecord {
        algorithm,
        candidates,
        max_iterations,
        tolerance,
        seed,
        dataset_path,
        dataset_hash,
        result: SeparationResult {
            w,
            upsilons,
            iterations,
            converged_candidates,
            stop_index: if stop_index_raw == 0 {
                None
            } else {
                Some(stop_index_raw)
            },
            stop_upsilon,
            component_seconds,
            total_seconds,
        },
    })
}
