//! Record file format: line-delimited JSON. First line is a header object,
//! then one record object per line, and a trailing summary object when the
//! instance finished (its absence flags a crashed worker).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{CompositionRecord, InstanceDiagnostics, InstanceStatus, PieceConfiguration};
use crate::chess::PieceKind;
use crate::entropy::EntropyStats;

pub const RECORD_FORMAT: &str = "qchess-records";
pub const RECORD_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum RecordFileError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed record line: {reason}")]
    Malformed { path: PathBuf, line: usize, reason: String },
    #[error("{path}: missing header line")]
    MissingHeader { path: PathBuf },
    #[error("{path}: unsupported format `{format}` version {version}")]
    UnsupportedFormat { path: PathBuf, format: String, version: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordFileHeader {
    pub format: String,
    pub version: u32,
    pub set_label: String,
    pub instance_id: u32,
    pub seed: u64,
    pub mix_ratio: f64,
    pub settings_hash: String,
    pub scorer_version: String,
    pub attempts_min: u32,
    pub attempts_max: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSummary {
    pub status: InstanceStatus,
    pub diagnostics: InstanceDiagnostics,
    pub entropy_stats: EntropyStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct FooterLine {
    summary: InstanceSummary,
}

/// Streams records to disk as they are produced, so a crashed worker still
/// leaves a parseable partial file.
pub struct RecordWriter {
    path: PathBuf,
    out: BufWriter<File>,
    error: Option<std::io::Error>,
    records_written: u64,
}

impl RecordWriter {
    pub fn create(path: &Path, header: &RecordFileHeader) -> Result<RecordWriter, RecordFileError> {
        let file = File::create(path).map_err(|e| RecordFileError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let mut writer = RecordWriter {
            path: path.to_path_buf(),
            out: BufWriter::new(file),
            error: None,
            records_written: 0,
        };
        writer.write_line(&serde_json::to_string(header).expect("header serializes"));
        Ok(writer)
    }

    pub fn append(&mut self, record: &CompositionRecord) {
        let line = serde_json::to_string(record).expect("record serializes");
        self.write_line(&line);
        self.records_written += 1;
    }

    /// Writes the trailing summary and flushes. Consumes the writer.
    pub fn finish(mut self, summary: &InstanceSummary) -> Result<u64, RecordFileError> {
        let line = serde_json::to_string(&FooterLine { summary: summary.clone() })
            .expect("summary serializes");
        self.write_line(&line);
        if let Err(e) = self.out.flush() {
            self.error.get_or_insert(e);
        }
        match self.error.take() {
            None => Ok(self.records_written),
            Some(e) => Err(RecordFileError::Io { path: self.path.clone(), source: e }),
        }
    }

    fn write_line(&mut self, line: &str) {
        if self.error.is_some() {
            return;
        }
        if let Err(e) = self.out.write_all(line.as_bytes()).and_then(|_| self.out.write_all(b"\n"))
        {
            self.error = Some(e);
        }
        // Records survive a worker crash only if they reach the OS.
        if let Err(e) = self.out.flush() {
            self.error.get_or_insert(e);
        }
    }
}

/// Parsed record file.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordFile {
    pub path: PathBuf,
    pub header: RecordFileHeader,
    pub records: Vec<CompositionRecord>,
    /// None when the worker never finished.
    pub summary: Option<InstanceSummary>,
    /// Line numbers skipped in permissive mode.
    pub skipped_lines: Vec<(usize, String)>,
}

impl RecordFile {
    pub fn is_complete(&self) -> bool {
        matches!(self.summary, Some(InstanceSummary { status: InstanceStatus::Completed, .. }))
    }
}

/// Reads a record file back. In permissive mode malformed record lines are
/// collected (with their line numbers) instead of failing the parse.
pub fn parse_record_file(path: &Path, permissive: bool) -> Result<RecordFile, RecordFileError> {
    let file = File::open(path).map_err(|e| RecordFileError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines().enumerate();

    let header: RecordFileHeader = match lines.next() {
        None => return Err(RecordFileError::MissingHeader { path: path.to_path_buf() }),
        Some((_, Ok(first))) => serde_json::from_str(&first).map_err(|e| {
            RecordFileError::Malformed { path: path.to_path_buf(), line: 1, reason: e.to_string() }
        })?,
        Some((_, Err(e))) => {
            return Err(RecordFileError::Io { path: path.to_path_buf(), source: e })
        }
    };
    if header.format != RECORD_FORMAT || header.version != RECORD_VERSION {
        return Err(RecordFileError::UnsupportedFormat {
            path: path.to_path_buf(),
            format: header.format,
            version: header.version,
        });
    }

    let mut records = Vec::new();
    let mut summary = None;
    let mut skipped = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.map_err(|e| RecordFileError::Io { path: path.to_path_buf(), source: e })?;
        if line.trim().is_empty() {
            continue;
        }
        if let Ok(footer) = serde_json::from_str::<FooterLine>(&line) {
            summary = Some(footer.summary);
            continue;
        }
        match serde_json::from_str::<CompositionRecord>(&line) {
            Ok(rec) => records.push(rec),
            Err(e) if permissive => skipped.push((line_no, e.to_string())),
            Err(e) => {
                return Err(RecordFileError::Malformed {
                    path: path.to_path_buf(),
                    line: line_no,
                    reason: e.to_string(),
                })
            }
        }
    }

    Ok(RecordFile { path: path.to_path_buf(), header, records, summary, skipped_lines: skipped })
}

/// Wire form of a piece configuration: piece letters, kings implicit.
#[derive(Serialize, Deserialize)]
pub(super) struct ConfigWire {
    white: Vec<String>,
    black: Vec<String>,
}

fn kind_letter(kind: PieceKind) -> &'static str {
    match kind {
        PieceKind::Pawn => "P",
        PieceKind::Knight => "N",
        PieceKind::Bishop => "B",
        PieceKind::Rook => "R",
        PieceKind::Queen => "Q",
        PieceKind::King => "K",
    }
}

fn letter_kind(s: &str) -> Result<PieceKind, String> {
    match s {
        "P" | "p" => Ok(PieceKind::Pawn),
        "N" | "n" => Ok(PieceKind::Knight),
        "B" | "b" => Ok(PieceKind::Bishop),
        "R" | "r" => Ok(PieceKind::Rook),
        "Q" | "q" => Ok(PieceKind::Queen),
        other => Err(format!("unknown piece letter `{other}`")),
    }
}

impl From<PieceConfiguration> for ConfigWire {
    fn from(cfg: PieceConfiguration) -> ConfigWire {
        ConfigWire {
            white: cfg.white.iter().map(|&k| kind_letter(k).to_string()).collect(),
            black: cfg.black.iter().map(|&k| kind_letter(k).to_string()).collect(),
        }
    }
}

impl TryFrom<ConfigWire> for PieceConfiguration {
    type Error = String;

    fn try_from(wire: ConfigWire) -> Result<PieceConfiguration, String> {
        let parse = |v: Vec<String>| -> Result<Vec<PieceKind>, String> {
            v.iter().map(|s| letter_kind(s)).collect()
        };
        let cfg = PieceConfiguration { white: parse(wire.white)?, black: parse(wire.black)? };
        cfg.validate()?;
        Ok(cfg)
    }
}
