//! Label access.
//!
//! The active learner only ever sees labels through a [`LabelOracle`], which
//! logs every query. Two sources are provided: an in-memory vector and a
//! file reader that seeks to individual lines on demand.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Seek, SeekFrom};
use std::path::Path;

use crate::error::{Error, Result};

pub trait LabelOracle {
    /// Number of rows the oracle can answer for.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Reveals `y_i`. Every call is logged.
    fn query(&mut self, i: usize) -> Result<f64>;

    fn query_log(&self) -> &[usize];

    fn query_count(&self) -> usize {
        self.query_log().len()
    }
}

/// Labels held in memory; used by experiments.
#[derive(Debug, Clone)]
pub struct VecOracle {
    labels: Vec<f64>,
    log: Vec<usize>,
}

impl VecOracle {
    pub fn new(labels: Vec<f64>) -> Self {
        VecOracle {
            labels,
            log: Vec::new(),
        }
    }
}

impl LabelOracle for VecOracle {
    fn len(&self) -> usize {
        self.labels.len()
    }

    fn query(&mut self, i: usize) -> Result<f64> {
        let y = *self.labels.get(i).ok_or(Error::LabelIndex {
            index: i,
            len: self.labels.len(),
        })?;
        self.log.push(i);
        Ok(y)
    }

    fn query_log(&self) -> &[usize] {
        &self.log
    }
}

/// Labels stored one per line in a text file.
///
/// Opening the file records the byte offset of every line without parsing
/// any of them; a query seeks to its line and parses just that line.
/// Answers are cached so a repeated query returns the same value without
/// touching the file again.
#[derive(Debug)]
pub struct FileOracle {
    file: File,
    offsets: Vec<u64>,
    cache: HashMap<usize, f64>,
    lines_read: usize,
    log: Vec<usize>,
}

impl FileOracle {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let mut file = File::open(path)?;
        let mut offsets = Vec::new();
        let mut reader = BufReader::new(&mut file);
        let mut pos = 0u64;
        let mut at_line_start = true;
        let mut line_has_content = false;
        let mut start = 0u64;
        let mut buf = [0u8; 1 << 16];
        loop {
            let k = reader.read(&mut buf)?;
            if k == 0 {
                break;
            }
            for &byte in &buf[..k] {
                if at_line_start {
                    start = pos;
                    at_line_start = false;
                    line_has_content = false;
                }
                if byte == b'\n' {
                    if line_has_content {
                        offsets.push(start);
                    }
                    at_line_start = true;
                } else if !byte.is_ascii_whitespace() {
                    line_has_content = true;
                }
                pos += 1;
            }
        }
        if !at_line_start && line_has_content {
            offsets.push(start);
        }
        drop(reader);
        Ok(FileOracle {
            file,
            offsets,
            cache: HashMap::new(),
            lines_read: 0,
            log: Vec::new(),
        })
    }

    /// How many label lines have actually been read and parsed.
    pub fn lines_read(&self) -> usize {
        self.lines_read
    }

    fn read_line(&mut self, i: usize) -> Result<f64> {
        self.file.seek(SeekFrom::Start(self.offsets[i]))?;
        let mut line = String::new();
        BufReader::new(&mut self.file).read_line(&mut line)?;
        self.lines_read += 1;
        let text = line.trim();
        text.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::Parse {
                line: i + 1,
                message: format!("invalid label {text:?}"),
            })
    }
}

impl LabelOracle for FileOracle {
    fn len(&self) -> usize {
        self.offsets.len()
    }

    fn query(&mut self, i: usize) -> Result<f64> {
        if i >= self.offsets.len() {
            return Err(Error::LabelIndex {
                index: i,
                len: self.offsets.len(),
            });
        }
        let y = match self.cache.get(&i) {
            Some(&y) => y,
            None => {
                let y = self.read_line(i)?;
                self.cache.insert(i, y);
                y
            }
        };
        self.log.push(i);
        Ok(y)
    }

    fn query_log(&self) -> &[usize] {
        &self.log
    }
}
