//! Word/concept embedding tables in the common word2vec interchange formats.
//!
//! Text: a `V D` header line followed by `V` lines of `token f1 .. fD`.
//! Binary: the ASCII header `V D\n`, then `V` records of token bytes, one
//! space, and `D` little-endian `f32` values. A newline before each token is
//! tolerated, as emitted by the reference word2vec trainer.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tokenization {
    Words,
    WordsPlusAnp,
}

/// Metadata that the file formats do not carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingMeta {
    pub window: usize,
    pub tokenization: Tokenization,
}

impl Default for EmbeddingMeta {
    fn default() -> Self {
        EmbeddingMeta {
            window: 5,
            tokenization: Tokenization::Words,
        }
    }
}

/// Token to dense vector map. Vectors are stored row-major in insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dimension: usize,
    pub meta: EmbeddingMeta,
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f64>,
}

impl EmbeddingTable {
    pub fn new(dimension: usize, meta: EmbeddingMeta) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::MalformedHeader("dimension must be positive".into()));
        }
        Ok(EmbeddingTable {
            dimension,
            meta,
            tokens: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
        })
    }

    pub fn insert(&mut self, token: &str, vector: &[f64]) -> Result<()> {
        if vector.len() != self.dimension {
            return Err(Error::DimMismatch {
                line: self.tokens.len() + 2,
                expected: self.dimension,
                found: vector.len(),
            });
        }
        if let Some(bad) = vector.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                line: self.tokens.len() + 2,
                value: bad.to_string(),
            });
        }
        if self.index.contains_key(token) {
            return Err(Error::DuplicateToken(token.to_owned()));
        }
        self.index.insert(token.to_owned(), self.tokens.len());
        self.tokens.push(token.to_owned());
        self.data.extend_from_slice(vector);
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.index
            .get(token)
            .map(|&i| &self.data[i * self.dimension..(i + 1) * self.dimension])
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.tokens
            .iter()
            .zip(self.data.chunks_exact(self.dimension))
            .map(|(t, v)| (t.as_str(), v))
    }

    /// Writes the text format; values use the shortest round-trip form, so
    /// reloading yields the identical table.
    pub fn write_text(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        writeln!(w, "{} {}", self.len(), self.dimension).map_err(io)?;
        for (token, vector) in self.iter() {
            write!(w, "{token}").map_err(io)?;
            for v in vector {
                write!(w, " {v}").map_err(io)?;
            }
            writeln!(w).map_err(io)?;
        }
        w.flush().map_err(io)
    }

    /// Writes the binary format with `f32` components.
    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        writeln!(w, "{} {}", self.len(), self.dimension).map_err(io)?;
        for (token, vector) in self.iter() {
            w.write_all(token.as_bytes()).map_err(io)?;
            w.write_all(b" ").map_err(io)?;
            for v in vector {
                w.write_all(&(*v as f32).to_le_bytes()).map_err(io)?;
            }
            w.write_all(b"\n").map_err(io)?;
        }
        w.flush().map_err(io)
    }
}

fn parse_header(line: &str) -> Result<(usize, usize)> {
    let mut parts = line.split_whitespace();
    let mut next = || -> Result<usize> {
        parts
            .next()
            .ok_or_else(|| Error::MalformedHeader(line.to_owned()))?
            .parse::<usize>()
            .map_err(|_| Error::MalformedHeader(line.to_owned()))
    };
    let (v, d) = (next()?, next()?);
    if parts.next().is_some() || d == 0 {
        return Err(Error::MalformedHeader(line.to_owned()));
    }
    if v == 0 {
        return Err(Error::EmptyTable);
    }
    Ok((v, d))
}

pub fn load_embeddings_text(path: &Path, meta: EmbeddingMeta) -> Result<EmbeddingTable> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_embeddings_text(BufReader::new(file), meta).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

pub fn read_embeddings_text<R: BufRead>(reader: R, meta: EmbeddingMeta) -> Result<EmbeddingTable> {
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(line) => line.map_err(|e| Error::io("<reader>", e))?,
        None => return Err(Error::MalformedHeader("missing header".into())),
    };
    let (declared, dimension) = parse_header(&header)?;
    let mut table = EmbeddingTable::new(dimension, meta)?;
    let mut vector = Vec::with_capacity(dimension);
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line.map_err(|e| Error::io("<reader>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let token = fields.next().unwrap_or_default();
        vector.clear();
        for field in fields {
            match field.parse::<f64>() {
                Ok(v) if v.is_finite() => vector.push(v),
                _ => {
                    return Err(Error::NonFinite {
                        line: line_no,
                        value: field.to_owned(),
                    })
                }
            }
        }
        if vector.len() != dimension {
            return Err(Error::DimMismatch {
                line: line_no,
                expected: dimension,
                found: vector.len(),
            });
        }
        table.insert(token, &vector)?;
    }
    if table.len() != declared {
        return Err(Error::CountMismatch {
            declared,
            found: table.len(),
        });
    }
    Ok(table)
}

pub fn load_embeddings_binary(path: &Path, meta: EmbeddingMeta) -> Result<EmbeddingTable> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    parse_embeddings_binary(&bytes, meta)
}

pub fn parse_embeddings_binary(bytes: &[u8], meta: EmbeddingMeta) -> Result<EmbeddingTable> {
    let header_end = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::MalformedHeader("missing header line".into()))?;
    let header =
        std::str::from_utf8(&bytes[..header_end]).map_err(|_| Error::MalformedHeader("header is not ASCII".into()))?;
    let (declared, dimension) = parse_header(header)?;
    let mut table = EmbeddingTable::new(dimension, meta)?;
    let mut pos = header_end + 1;
    let mut vector = vec![0.0; dimension];
    for record in 0..declared {
        while pos < bytes.len() && bytes[pos] == b'\n' {
            pos += 1;
        }
        let space = bytes[pos.min(bytes.len())..]
            .iter()
            .position(|&b| b == b' ')
            .ok_or(Error::Truncated { record })?;
        let token = std::str::from_utf8(&bytes[pos..pos + space])
            .map_err(|_| Error::MalformedHeader(format!("record {record}: token is not UTF-8")))?;
        pos += space + 1;
        let end = pos + 4 * dimension;
        if end > bytes.len() {
            return Err(Error::Truncated { record });
        }
        for (slot, chunk) in vector.iter_mut().zip(bytes[pos..end].chunks_exact(4)) {
            *slot = f32::from_le_bytes(chunk.try_into().unwrap()) as f64;
        }
        pos = end;
        table.insert(token, &vector).map_err(|e| match e {
            Error::NonFinite { value, .. } => Error::NonFinite {
                line: record + 1,
                value,
            },
            other => other,
        })?;
    }
    if bytes[pos.min(bytes.len())..].iter().any(|b| !b.is_ascii_whitespace()) {
        return Err(Error::CountMismatch {
            declared,
            found: declared + 1,
        });
    }
    Ok(table)
}
