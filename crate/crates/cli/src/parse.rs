//! Plain-text edge-list parsing.
//!
//! One edge per line as two whitespace-separated vertex ids; empty lines
//! and lines starting with `#` are skipped (SNAP-compatible). Self-loops
//! and malformed lines are hard errors carrying the line number.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use thiserror::Error;
use tricount_core::Edge;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("{path}:{line}: expected two vertex ids, got {content:?}")]
    Malformed { path: PathBuf, line: usize, content: String },
    #[error("{path}:{line}: self-loop at vertex {vertex} rejected")]
    SelfLoop { path: PathBuf, line: usize, vertex: u64 },
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn parse_line(raw: &str, path: &Path, line: usize) -> Result<Option<Edge>, ParseError> {
    let trimmed = raw.trim();
    if trimmed.is_empty() || trimmed.starts_with('#') {
        return Ok(None);
    }
    let mut tokens = trimmed.split_ascii_whitespace();
    let bad = || ParseError::Malformed {
        path: path.to_path_buf(),
        line,
        content: trimmed.to_string(),
    };
    let u: u64 = tokens.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
    let v: u64 = tokens.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
    if tokens.next().is_some() {
        return Err(bad());
    }
    let edge = Edge::new(u, v)
        .map_err(|_| ParseError::SelfLoop { path: path.to_path_buf(), line, vertex: u })?;
    Ok(Some(edge))
}

/// Streams an edge list in batches of `batch_size` (the final batch may be
/// short). Each `next()` performs the file reads for one batch, so I/O
/// cost sits in the iterator's caller.
pub struct BatchReader {
    path: PathBuf,
    lines: std::io::Lines<BufReader<File>>,
    line_no: usize,
    batch_size: usize,
    done: bool,
}

impl BatchReader {
    pub fn open(path: impl AsRef<Path>, batch_size: usize) -> Result<BatchReader, ParseError> {
        assert!(batch_size >= 1, "batch size must be at least 1");
        let path = path.as_ref().to_path_buf();
        let file = File::open(&path)
            .map_err(|source| ParseError::Io { path: path.clone(), source })?;
        Ok(BatchReader {
            path,
            lines: BufReader::new(file).lines(),
            line_no: 0,
            batch_size,
            done: false,
        })
    }
}

impl Iterator for BatchReader {
    type Item = Result<Vec<Edge>, ParseError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let mut batch = Vec::with_capacity(self.batch_size);
        while batch.len() < self.batch_size {
            match self.lines.next() {
                None => {
                    self.done = true;
                    break;
                }
                Some(Err(source)) => {
                    self.done = true;
                    return Some(Err(ParseError::Io { path: self.path.clone(), source }));
                }
                Some(Ok(raw)) => {
                    self.line_no += 1;
                    match parse_line(&raw, &self.path, self.line_no) {
                        Ok(None) => {}
                        Ok(Some(edge)) => batch.push(edge),
                        Err(e) => {
                            self.done = true;
                            return Some(Err(e));
                        }
                    }
                }
            }
        }
        if batch.is_empty() {
            self.done = true;
            None
        } else {
            Some(Ok(batch))
        }
    }
}

/// Reads a whole edge list into memory.
pub fn read_all(path: impl AsRef<Path>) -> Result<Vec<Edge>, ParseError> {
    let mut out = Vec::new();
    for batch in BatchReader::open(path, 1 << 16)? {
        out.extend(batch?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use std::io::Write;

    use super::*;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn batches_of_one() {
        let f = write_tmp("1 2\n2 3\n");
        let batches: Vec<Vec<Edge>> =
            BatchReader::open(f.path(), 1).unwrap().map(|b| b.unwrap()).collect();
        assert_eq!(batches.len(), 2);
        assert_eq!(batches[0], vec![Edge::new(1, 2).unwrap()]);
        assert_eq!(batches[1], vec![Edge::new(2, 3).unwrap()]);
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let f = write_tmp("# a comment\n\n1 2\n");
        let edges = read_all(f.path()).unwrap();
        assert_eq!(edges, vec![Edge::new(1, 2).unwrap()]);
    }

    #[test]
    fn tabs_and_wide_ids_parse() {
        let f = write_tmp("18446744073709551614\t3\n");
        let edges = read_all(f.path()).unwrap();
        assert_eq!(edges, vec![Edge::new(u64::MAX - 1, 3).unwrap()]);
    }

    #[test]
    fn malformed_line_reports_its_number() {
        let f = write_tmp("1 2\nnope\n");
        let err = read_all(f.path()).unwrap_err();
        assert!(matches!(err, ParseError::Malformed { line: 2, .. }), "{err}");

        let f = write_tmp("1 2 3\n");
        assert!(matches!(read_all(f.path()).unwrap_err(), ParseError::Malformed { line: 1, .. }));
    }

    #[test]
    fn self_loop_is_rejected_with_line() {
        let f = write_tmp("1 2\n7 7\n");
        let err = read_all(f.path()).unwrap_err();
        assert!(matches!(err, ParseError::SelfLoop { line: 2, vertex: 7, .. }), "{err}");
    }

    #[test]
    fn last_batch_may_be_short() {
        let f = write_tmp("1 2\n2 3\n3 4\n4 5\n5 6\n");
        let batches: Vec<Vec<Edge>> =
            BatchReader::open(f.path(), 2).unwrap().map(|b| b.unwrap()).collect();
        assert_eq!(batches.iter().map(Vec::len).collect::<Vec<_>>(), vec![2, 2, 1]);
    }
}
