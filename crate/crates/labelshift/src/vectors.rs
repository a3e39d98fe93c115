//! Vector files: word2vec/GloVe text (`token v1 .. vd`, optional
//! `count dim` header) and labeled TSV (`label<TAB>v1 .. vd`).

use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use labelshift_core::{Composition, EmbeddingStore};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorFormat {
    /// Word vectors; labels are composed by token averaging.
    Word2vecText,
    /// One vector per whole label.
    LabeledTsv,
}

impl FromStr for VectorFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "word2vec" | "word2vec_text" | "glove" => Ok(VectorFormat::Word2vecText),
            "tsv" | "labeled_tsv" => Ok(VectorFormat::LabeledTsv),
            _ => Err(format!("unknown vector format {s:?}")),
        }
    }
}

#[derive(Debug)]
pub struct LoadedVectors {
    pub store: EmbeddingStore,
    /// Lines skipped on load: zero vectors and repeated keys.
    pub warnings: Vec<String>,
}

pub fn load_vector_file<R: BufRead>(
    reader: R,
    format: VectorFormat,
    provider_id: &str,
) -> Result<LoadedVectors> {
    let composition = match format {
        VectorFormat::Word2vecText => Composition::TokenAverage,
        VectorFormat::LabeledTsv => Composition::WholeString,
    };
    let mut store: Option<EmbeddingStore> = None;
    let mut warnings = Vec::new();
    let mut header: Option<(usize, usize)> = None;
    let mut data_lines = 0usize;

    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if format == VectorFormat::Word2vecText && i == 0 {
            if let Some(h) = parse_header(&line) {
                header = Some(h);
                continue;
            }
        }
        let (key, values) = match format {
            VectorFormat::Word2vecText => {
                let mut fields = line.split_whitespace();
                let key = fields.next().unwrap_or_default();
                (key, parse_values(fields, line_no)?)
            }
            VectorFormat::LabeledTsv => {
                let (key, rest) = line
                    .split_once('\t')
                    .ok_or_else(|| Error::syntax(line_no, "expected label<TAB>values"))?;
                if key.is_empty() {
                    return Err(Error::Invalid {
                        line: line_no,
                        source: labelshift_core::Error::EmptyLabel,
                    });
                }
                (key, parse_values(rest.split_whitespace(), line_no)?)
            }
        };
        data_lines += 1;

        let store = match &mut store {
            Some(s) => s,
            None => {
                let dim = header.map_or(values.len(), |h| h.1);
                store.insert(
                    EmbeddingStore::new(provider_id, composition, dim)
                        .map_err(|source| Error::Invalid { line: line_no, source })?,
                )
            }
        };
        match store.insert(key, &values) {
            Ok(true) => {}
            Ok(false) => warnings.push(format!("line {line_no}: duplicate entry {key:?} ignored")),
            Err(labelshift_core::Error::ZeroVector(_)) => {
                warnings.push(format!("line {line_no}: zero vector for {key:?} rejected"))
            }
            Err(source) => return Err(Error::Invalid { line: line_no, source }),
        }
    }

    if let Some((count, _)) = header {
        if count != data_lines {
            return Err(Error::syntax(
                1,
                format!("header announces {count} vectors, file has {data_lines}"),
            ));
        }
    }
    let store = store.ok_or_else(|| Error::syntax(0, "no vectors in file"))?;
    Ok(LoadedVectors { store, warnings })
}

fn parse_header(line: &str) -> Option<(usize, usize)> {
    let mut fields = line.split_whitespace();
    let count = fields.next()?.parse().ok()?;
    let dim = fields.next()?.parse().ok()?;
    fields.next().is_none().then_some((count, dim))
}

fn parse_values<'a>(fields: impl Iterator<Item = &'a str>, line: usize) -> Result<Vec<f64>> {
    fields
        .map(|f| {
            f.parse::<f64>()
                .map_err(|_| Error::syntax(line, format!("invalid number {f:?}")))
        })
        .collect()
}

/// Loads a vector file from disk. The provider id is the file name plus
/// the first 16 hex digits of the file's SHA-256; the full digest is
/// returned alongside.
pub fn load_vector_path(path: &Path, format: VectorFormat) -> Result<(LoadedVectors, String)> {
    let file = File::open(path).map_err(|e| Error::from(e).in_file(path))?;
    let mut hashing = HashingReader::new(file);
    let mut loaded =
        load_vector_file(BufReader::new(&mut hashing), format, "").map_err(|e| e.in_file(path))?;
    let name = path.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
    let digest = hashing.hex_digest();
    loaded.store.set_provider_id(format!("{name}@{}", &digest[..16]));
    Ok((loaded, digest))
}

/// Reader adapter that hashes everything read through it.
pub struct HashingReader<R> {
    inner: R,
    hasher: Sha256,
}

impl<R: Read> HashingReader<R> {
    pub fn new(inner: R) -> Self {
        Self {
            inner,
            hasher: Sha256::new(),
        }
    }

    pub fn hex_digest(self) -> String {
        self.hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

impl<R: Read> Read for HashingReader<R> {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        let n = self.inner.read(buf)?;
        self.hasher.update(&buf[..n]);
        Ok(n)
    }
}

/// `x` rounded to 9 significant digits, printed in shortest form.
pub fn format_float(x: f64) -> String {
    let rounded: f64 = format!("{x:.8e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

/// Writes a store as labeled TSV in key order.
pub fn write_labeled_tsv<W: Write>(store: &EmbeddingStore, mut writer: W) -> Result<()> {
    for (label, v) in store.iter() {
        if label.contains(['\t', '\n']) {
            return Err(Error::Unrepresentable(format!("label {label:?} in TSV")));
        }
        let values: Vec<String> = v.iter().map(|&x| format_float(x)).collect();
        writeln!(writer, "{label}\t{}", values.join(" "))?;
    }
    Ok(())
}
