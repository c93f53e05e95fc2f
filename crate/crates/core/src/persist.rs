//! Versioned plain-text model files.
//!
//! ```text
//! SPREADER-MODEL
//! version 1
//! kind svm
//! language en
//! train c=1 tolerance=0.0001 max_iterations=1000 loss=squared_hinge fit_intercept=true
//! blocks 1
//! block tfidf/char/1-3/3000/1 corpus_size=210 terms=3000
//! 0<TAB><term><TAB><df><TAB><idf>
//! ...
//! weights 3000
//! bias <f64>
//! 0:<f64>
//! ...
//! checksum <sha256 of every preceding byte, lowercase hex>
//! ```
//!
//! Floats marked `<f64>` and idf values are the IEEE-754 bit pattern as 16
//! lowercase hex digits, so values survive exactly. Terms escape `\`, tab,
//! newline, carriage return and other control characters (`\u{..}`).
//! `idf` is `-` for count-weighted blocks.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::corpus::Language;
use crate::error::{Error, Result};
use crate::model::{LinearClassifier, LinearModel, ModelKind, TrainConfig};
use crate::vectorize::{FeatureSpace, VectorizerConfig, Vocabulary};

pub const MAGIC: &str = "SPREADER-MODEL";
pub const FORMAT_VERSION: u32 = 1;

fn hex_f64(v: f64) -> String {
    format!("{:016x}", v.to_bits())
}

fn parse_hex_f64(s: &str) -> Result<f64> {
    if s.len() != 16 {
        return Err(corrupt(format!("bad float encoding {s:?}")));
    }
    u64::from_str_radix(s, 16)
        .map(f64::from_bits)
        .map_err(|_| corrupt(format!("bad float encoding {s:?}")))
}

fn corrupt(msg: impl Into<String>) -> Error {
    Error::CorruptModelFile(msg.into())
}

pub fn escape_term(term: &str) -> String {
    let mut out = String::with_capacity(term.len());
    for c in term.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c if c.is_control() => {
                let _ = write!(out, "\\u{{{:x}}}", c as u32);
            }
            c => out.push(c),
        }
    }
    out
}

pub fn unescape_term(s: &str) -> Result<String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some('u') => {
                if chars.next() != Some('{') {
                    return Err(corrupt("bad unicode escape"));
                }
                let hex: String = chars.by_ref().take_while(|&c| c != '}').collect();
                let c = u32::from_str_radix(&hex, 16)
                    .ok()
                    .and_then(char::from_u32)
                    .ok_or_else(|| corrupt("bad unicode escape"))?;
                out.push(c);
            }
            _ => return Err(corrupt("bad escape sequence")),
        }
    }
    Ok(out)
}

pub fn model_to_string(model: &LinearModel) -> String {
    let mut out = String::new();
    let cfg = &model.train_config;
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "version {FORMAT_VERSION}");
    let _ = writeln!(out, "kind {}", model.kind());
    let _ = writeln!(out, "language {}", model.language);
    let _ = writeln!(
        out,
        "train c={} tolerance={} max_iterations={} loss={} fit_intercept={}",
        cfg.c,
        cfg.tolerance,
        cfg.max_iterations,
        cfg.loss.name(),
        cfg.fit_intercept
    );
    let blocks = model.features.blocks();
    let _ = writeln!(out, "blocks {}", blocks.len());
    for block in blocks {
        let _ = writeln!(
            out,
            "block {} corpus_size={} terms={}",
            block.config(),
            block.corpus_size(),
            block.len()
        );
        let idf = block.idf();
        for (i, (term, df)) in block.terms().iter().zip(block.document_frequency()).enumerate() {
            let idf = idf.map_or_else(|| "-".to_string(), |v| hex_f64(v[i]));
            let _ = writeln!(out, "{i}\t{}\t{df}\t{idf}", escape_term(term));
        }
    }
    let weights = &model.classifier.weights;
    let _ = writeln!(out, "weights {}", weights.len());
    let _ = writeln!(out, "bias {}", hex_f64(model.classifier.bias));
    for (i, w) in weights.iter().enumerate() {
        let _ = writeln!(out, "{i}:{}", hex_f64(*w));
    }
    let digest = Sha256::digest(out.as_bytes());
    let _ = writeln!(out, "checksum {}", hex_digest(&digest));
    out
}

fn hex_digest(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next_line(&mut self) -> Result<(usize, &'a str)> {
        self.inner
            .next()
            .map(|(i, l)| (i + 1, l))
            .ok_or_else(|| corrupt("unexpected end of file"))
    }

    fn keyed(&mut self, key: &str) -> Result<&'a str> {
        let (n, line) = self.next_line()?;
        line.strip_prefix(key)
            .and_then(|rest| rest.strip_prefix(' '))
            .ok_or_else(|| corrupt(format!("line {n}: expected {key:?}")))
    }
}

fn parse_num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse().map_err(|_| corrupt(format!("bad {what} {s:?}")))
}

fn key_values(s: &str) -> Result<Vec<(&str, &str)>> {
    s.split(' ')
        .map(|kv| kv.split_once('=').ok_or_else(|| corrupt(format!("bad field {kv:?}"))))
        .collect()
}

fn field<'a>(fields: &[(&str, &'a str)], key: &str) -> Result<&'a str> {
    fields
        .iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| corrupt(format!("missing field {key}")))
}

pub fn model_from_str(text: &str) -> Result<LinearModel> {
    let mut header = text.lines();
    if header.next() != Some(MAGIC) {
        return Err(corrupt("missing magic header"));
    }
    let version_line = header.next().ok_or_else(|| corrupt("missing version"))?;
    let version: u32 = version_line
        .strip_prefix("version ")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| corrupt("bad version line"))?;
    if version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }

    let body_end = text
        .rfind("\nchecksum ")
        .ok_or_else(|| corrupt("missing checksum (truncated file?)"))?
        + 1;
    let (body, trailer) = text.split_at(body_end);
    let stored = trailer
        .strip_prefix("checksum ")
        .map(|s| s.strip_suffix('\n').unwrap_or(s))
        .ok_or_else(|| corrupt("bad checksum line"))?;
    if stored != hex_digest(&Sha256::digest(body.as_bytes())) {
        return Err(corrupt("checksum mismatch"));
    }

    let mut lines = Lines {
        inner: body.lines().enumerate(),
    };
    lines.next_line()?;
    lines.next_line()?;
    let kind: ModelKind = lines.keyed("kind")?.parse().map_err(|_| corrupt("bad kind"))?;
    let language: Language = lines.keyed("language")?.parse().map_err(|_| corrupt("bad language"))?;
    let train_fields = key_values(lines.keyed("train")?)?;
    let train_config = TrainConfig {
        c: parse_num(field(&train_fields, "c")?, "c")?,
        tolerance: parse_num(field(&train_fields, "tolerance")?, "tolerance")?,
        max_iterations: parse_num(field(&train_fields, "max_iterations")?, "max_iterations")?,
        loss: field(&train_fields, "loss")?.parse().map_err(|_| corrupt("bad loss"))?,
        fit_intercept: parse_num(field(&train_fields, "fit_intercept")?, "fit_intercept")?,
    };

    let block_count: usize = parse_num(lines.keyed("blocks")?, "block count")?;
    let mut blocks = Vec::with_capacity(block_count);
    for _ in 0..block_count {
        let spec = lines.keyed("block")?;
        let (config_text, rest) = spec.split_once(' ').ok_or_else(|| corrupt("bad block line"))?;
        let config: VectorizerConfig = config_text.parse().map_err(|_| corrupt("bad vectorizer config"))?;
        let fields = key_values(rest)?;
        let corpus_size: u64 = parse_num(field(&fields, "corpus_size")?, "corpus_size")?;
        let n_terms: usize = parse_num(field(&fields, "terms")?, "term count")?;
        let mut terms = Vec::with_capacity(n_terms);
        let mut dfs = Vec::with_capacity(n_terms);
        let mut idfs = Vec::with_capacity(n_terms);
        for expected in 0..n_terms {
            let (n, line) = lines.next_line()?;
            let parts: Vec<&str> = line.split('\t').collect();
            if parts.len() != 4 || parts[0] != expected.to_string() {
                return Err(corrupt(format!("line {n}: bad vocabulary entry")));
            }
            terms.push(unescape_term(parts[1])?);
            dfs.push(parse_num::<u64>(parts[2], "document frequency")?);
            idfs.push(parts[3]);
        }
        let vocab = Vocabulary::from_parts(config, terms, dfs, corpus_size)
            .map_err(|e| corrupt(format!("invalid vocabulary: {e}")))?;
        match vocab.idf() {
            Some(expected) => {
                for (stored, value) in idfs.iter().zip(expected) {
                    if parse_hex_f64(stored)?.to_bits() != value.to_bits() {
                        return Err(corrupt("idf does not match document frequencies"));
                    }
                }
            }
            None => {
                if idfs.iter().any(|s| *s != "-") {
                    return Err(corrupt("idf present for count block"));
                }
            }
        }
        blocks.push(vocab);
    }
    let features = FeatureSpace::from_blocks(blocks).map_err(|_| corrupt("no feature blocks"))?;

    let dim: usize = parse_num(lines.keyed("weights")?, "weight count")?;
    let bias = parse_hex_f64(lines.keyed("bias")?)?;
    let mut weights = Vec::with_capacity(dim);
    for expected in 0..dim {
        let (n, line) = lines.next_line()?;
        let (idx, value) = line
            .split_once(':')
            .ok_or_else(|| corrupt(format!("line {n}: bad weight")))?;
        if idx != expected.to_string() {
            return Err(corrupt(format!("line {n}: weight index out of order")));
        }
        weights.push(parse_hex_f64(value)?);
    }
    if lines.inner.next().is_some() {
        return Err(corrupt("trailing content before checksum"));
    }
    LinearModel::new(
        LinearClassifier { kind, weights, bias },
        features,
        language,
        train_config,
    )
    .map_err(|e| corrupt(e.to_string()))
}

pub fn save_model(model: &LinearModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, model_to_string(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<LinearModel> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8(bytes).map_err(|_| corrupt("model file is not UTF-8"))?;
    model_from_str(&text)
}
