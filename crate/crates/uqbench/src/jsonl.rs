//! JSON Lines prediction logs.
//!
//! One record object per line. Blank lines are skipped. Top-level fields the
//! record type does not know are ignored and counted.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::Deserialize;
use uqbench_core::PredictionRecord;

use crate::error::{Error, Result};

#[derive(Deserialize)]
struct Line {
    #[serde(flatten)]
    record: PredictionRecord,
    #[serde(flatten)]
    unknown: BTreeMap<String, serde_json::Value>,
}

/// Records of one file plus the line each came from.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RecordSet {
    pub records: Vec<PredictionRecord>,
    pub lines: Vec<usize>,
    /// Top-level fields ignored across the whole file.
    pub unknown_fields: usize,
}

/// Streaming reader: validates each record as it arrives, including id
/// uniqueness and per-dataset member seed order.
pub struct RecordStream<R> {
    reader: R,
    line: usize,
    buf: String,
    seen: HashMap<String, usize>,
    member_seeds: HashMap<String, Vec<i64>>,
    pub unknown_fields: usize,
}

impl<R: BufRead> RecordStream<R> {
    pub fn new(reader: R) -> Self {
        Self {
            reader,
            line: 0,
            buf: String::new(),
            seen: HashMap::new(),
            member_seeds: HashMap::new(),
            unknown_fields: 0,
        }
    }

    fn check(&mut self, record: &PredictionRecord) -> Result<()> {
        let line = self.line;
        record.validate().map_err(|source| Error::Invalid { line, source })?;
        if let Some(&first) = self.seen.get(&record.id) {
            return Err(Error::Invalid {
                line,
                source: uqbench_core::Error::DuplicateId { id: record.id.clone(), first, second: line },
            });
        }
        self.seen.insert(record.id.clone(), line);
        if !record.members.is_empty() {
            let seeds: Vec<i64> = record.members.iter().map(|m| m.seed).collect();
            match self.member_seeds.get(&record.dataset) {
                Some(expected) if *expected != seeds => {
                    return Err(Error::Invalid {
                        line,
                        source: uqbench_core::Error::MemberOrder {
                            id: record.id.clone(),
                            dataset: record.dataset.clone(),
                        },
                    })
                }
                Some(_) => {}
                None => {
                    self.member_seeds.insert(record.dataset.clone(), seeds);
                }
            }
        }
        Ok(())
    }
}

impl<R: BufRead> Iterator for RecordStream<R> {
    type Item = Result<(usize, PredictionRecord)>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            self.line += 1;
            match self.reader.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => return Some(Err(Error::Parse { line: self.line, message: e.to_string() })),
            }
            if self.buf.trim().is_empty() {
                continue;
            }
            let parsed: Line = match serde_json::from_str(&self.buf) {
                Ok(l) => l,
                Err(e) => return Some(Err(Error::Parse { line: self.line, message: e.to_string() })),
            };
            self.unknown_fields += parsed.unknown.len();
            let record = parsed.record;
            return Some(self.check(&record).map(|()| (self.line, record)));
        }
    }
}

/// Parses a whole JSON Lines stream.
pub fn parse_records<R: BufRead>(reader: R) -> Result<RecordSet> {
    let mut stream = RecordStream::new(reader);
    let mut set = RecordSet::default();
    for item in stream.by_ref() {
        let (line, record) = item?;
        set.lines.push(line);
        set.records.push(record);
    }
    set.unknown_fields = stream.unknown_fields;
    Ok(set)
}

pub fn read_records(path: &Path) -> Result<RecordSet> {
    let file = File::open(path).map_err(Error::io(path))?;
    parse_records(BufReader::new(file))
}

pub fn write_records<W: Write>(mut out: W, records: &[PredictionRecord]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n").map_err(Error::io("<output>"))?;
    }
    Ok(())
}

pub fn save_records(path: &Path, records: &[PredictionRecord]) -> Result<()> {
    let file = File::create(path).map_err(Error::io(path))?;
    let mut out = BufWriter::new(file);
    write_records(&mut out, records)?;
    out.flush().map_err(Error::io(path))
}
