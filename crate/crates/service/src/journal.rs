//! Append-only JSON-lines journal.
//!
//! Each line is one [`JournalEntry`]. A line is committed once its trailing
//! newline has been written and synced; a torn final line left by a crash is
//! dropped (and cut from the file) on the next open.

use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use ortkit::model::{DocumentAnnotation, SegmentAnnotation};
use serde::{Deserialize, Serialize};

use crate::ServiceError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    Segment(SegmentAnnotation),
    Document(DocumentAnnotation),
    /// Minutes added to the annotator's time on a document.
    Time { document_id: String, minutes: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JournalEntry {
    pub seq: u64,
    /// Milliseconds since the Unix epoch.
    pub timestamp_ms: u64,
    pub annotator_id: String,
    pub payload: Payload,
}

pub struct Journal {
    path: PathBuf,
    file: File,
}

impl Journal {
    /// Opens (creating if needed) the journal and returns the committed
    /// entries. A torn last line is truncated away.
    pub fn open(path: &Path) -> Result<(Journal, Vec<JournalEntry>), ServiceError> {
        let mut file = OpenOptions::new().create(true).read(true).append(true).open(path)?;
        let mut entries = Vec::new();
        let mut good_len: u64 = 0;
        {
            let mut reader = BufReader::new(&file);
            let mut line = Vec::new();
            let mut lineno = 0;
            loop {
                line.clear();
                let n = reader.read_until(b'\n', &mut line)?;
                if n == 0 {
                    break;
                }
                lineno += 1;
                let complete = line.last() == Some(&b'\n');
                let parsed = std::str::from_utf8(&line)
                    .ok()
                    .and_then(|s| serde_json::from_str::<JournalEntry>(s.trim_end()).ok());
                match parsed {
                    Some(e) if complete => {
                        if let Some(prev) = entries.last().map(|p: &JournalEntry| p.seq) {
                            if e.seq <= prev {
                                return Err(ServiceError::Corrupt {
                                    line: lineno,
                                    message: format!("sequence {} after {prev}", e.seq),
                                });
                            }
                        }
                        entries.push(e);
                        good_len += n as u64;
                    }
                    _ => {
                        // read_until stops at EOF, so an unterminated line is
                        // always the last one
                        if complete {
                            return Err(ServiceError::Corrupt {
                                line: lineno,
                                message: "unreadable journal entry".into(),
                            });
                        }
                        log::warn!("dropping torn journal tail at line {lineno}");
                        break;
                    }
                }
            }
        }
        if file.metadata()?.len() != good_len {
            file.set_len(good_len)?;
            file.seek(SeekFrom::End(0))?;
        }
        Ok((
            Journal {
                path: path.to_path_buf(),
                file,
            },
            entries,
        ))
    }

    pub fn append(&mut self, entry: &JournalEntry) -> io::Result<()> {
        let mut line = serde_json::to_vec(entry).map_err(io::Error::other)?;
        line.push(b'\n');
        self.file.write_all(&line)?;
        self.file.sync_data()
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ortkit::model::RatingVector;

    fn entry(seq: u64) -> JournalEntry {
        JournalEntry {
            seq,
            timestamp_ms: 1000 + seq,
            annotator_id: "A01".into(),
            payload: Payload::Time {
                document_id: "d1".into(),
                minutes: 1.5,
            },
        }
    }

    #[test]
    fn append_and_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("journal.jsonl");
        let (mut j, entries) = Journal::open(&path).unwrap();
        assert!(entries.is_empty());
        for s in 1..=3 {
            j.append(&entry(s)).unwrap();
        }
        drop(j);
        let (_, entries) = Journal::open(&path).unwrap();
        assert_eq!(entries, vec![entry(1), entry(2), entry(3)]);
    }

    #[test]
    fn torn_tail_is_dropped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("journal.jsonl");
        let (mut j, _) = Journal::open(&path).unwrap();
        j.append(&entry(1)).unwrap();
        j.append(&entry(2)).unwrap();
        drop(j);
        let full = std::fs::read(&path).unwrap();
        std::fs::write(&path, &full[..full.len() - 7]).unwrap();
        let (mut j, entries) = Journal::open(&path).unwrap();
        assert_eq!(entries, vec![entry(1)]);
        j.append(&entry(2)).unwrap();
        drop(j);
        let (_, entries) = Journal::open(&path).unwrap();
        assert_eq!(entries, vec![entry(1), entry(2)]);
    }

    #[test]
    fn corrupt_middle_line_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("journal.jsonl");
        let a = serde_json::to_string(&entry(1)).unwrap();
        let b = serde_json::to_string(&entry(2)).unwrap();
        std::fs::write(&path, format!("{a}\n{{oops\n{b}\n")).unwrap();
        assert!(matches!(Journal::open(&path), Err(ServiceError::Corrupt { line: 2, .. })));
    }

    #[test]
    fn payload_shape() {
        let p = Payload::Document(DocumentAnnotation {
            annotator_id: "A01".into(),
            document_id: "d1".into(),
            source_id: "N1".into(),
            ratings: RatingVector::complete([6.0; 7]),
            minutes_spent: None,
        });
        let v = serde_json::to_value(&p).unwrap();
        assert_eq!(v["kind"], "document");
        assert_eq!(v["ratings"]["overall"], 6.0);
    }
}
