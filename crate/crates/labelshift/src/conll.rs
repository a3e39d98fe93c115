//! Token-per-line CoNLL files with BIO tags in the last column and blank
//! lines between sentences.

use std::io::{BufRead, Write};

use labelshift_core::{Corpus, Entity, LabelMode, Sentence, SourceFormat};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ConllParse {
    pub corpus: Corpus,
    /// `I-X` tags that did not continue an `X` span and were read as `B-X`.
    pub repairs: usize,
}

enum Tag {
    Outside,
    Begin(String),
    Inside(String),
}

fn parse_tag(tag: &str, mode: LabelMode, line: usize) -> Result<Tag> {
    if tag == "O" {
        return Ok(Tag::Outside);
    }
    let (prefix, label) = tag
        .split_once('-')
        .ok_or_else(|| Error::syntax(line, format!("unknown tag {tag:?}")))?;
    let label = mode
        .apply(label)
        .map_err(|source| Error::Invalid { line, source })?;
    match prefix {
        "B" => Ok(Tag::Begin(label)),
        "I" => Ok(Tag::Inside(label)),
        _ => Err(Error::syntax(line, format!("unknown tag {tag:?}"))),
    }
}

#[derive(Default)]
struct SentenceBuilder {
    tokens: Vec<String>,
    entities: Vec<Entity>,
    open: Option<(usize, String)>,
    first_line: usize,
}

impl SentenceBuilder {
    fn close_span(&mut self) {
        if let Some((start, label)) = self.open.take() {
            self.entities.push(Entity::new(start, self.tokens.len() - 1, label));
        }
    }

    fn push(&mut self, token: &str, tag: Tag, repairs: &mut usize) {
        match tag {
            Tag::Outside => self.close_span(),
            Tag::Begin(label) => {
                self.close_span();
                self.open = Some((self.tokens.len(), label));
            }
            Tag::Inside(label) => {
                if self.open.as_ref().map(|(_, l)| l) != Some(&label) {
                    *repairs += 1;
                    self.close_span();
                    self.open = Some((self.tokens.len(), label));
                }
            }
        }
        self.tokens.push(token.to_string());
    }

    fn finish(&mut self, sentences: &mut Vec<Sentence>) -> Result<()> {
        if self.tokens.is_empty() {
            return Ok(());
        }
        self.close_span();
        let line = self.first_line;
        let sentence = Sentence::new(std::mem::take(&mut self.tokens), std::mem::take(&mut self.entities))
            .map_err(|source| Error::Invalid { line, source })?;
        sentences.push(sentence);
        Ok(())
    }
}

pub fn parse_conll<R: BufRead>(reader: R, mode: LabelMode) -> Result<ConllParse> {
    let mut sentences = Vec::new();
    let mut repairs = 0;
    let mut current = SentenceBuilder::default();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let columns: Vec<&str> = line.split_whitespace().collect();
        match columns.as_slice() {
            [] => current.finish(&mut sentences)?,
            [first, ..] if first.starts_with("-DOCSTART-") => current.finish(&mut sentences)?,
            [_] => return Err(Error::syntax(line_no, "missing tag column")),
            [token, .., tag] => {
                if current.tokens.is_empty() {
                    current.first_line = line_no;
                }
                let tag = parse_tag(tag, mode, line_no)?;
                current.push(token, tag, &mut repairs);
            }
        }
    }
    current.finish(&mut sentences)?;
    Ok(ConllParse {
        corpus: Corpus::new(sentences, SourceFormat::ConllBio)?,
        repairs,
    })
}

/// Writes `token<TAB>tag` lines. Spaces inside labels become underscores so
/// the tag stays one column.
pub fn write_conll<W: Write>(corpus: &Corpus, mut writer: W) -> Result<()> {
    for sentence in corpus.sentences() {
        if !sentence.spans_disjoint() {
            return Err(labelshift_core::Error::OverlappingSpans.into());
        }
        let mut tags = vec![String::from("O"); sentence.tokens().len()];
        for e in sentence.entities() {
            let label = e.label.replace(' ', "_");
            tags[e.start] = format!("B-{label}");
            for tag in &mut tags[e.start + 1..=e.end] {
                *tag = format!("I-{label}");
            }
        }
        for (token, tag) in sentence.tokens().iter().zip(&tags) {
            if token.is_empty() || token.contains(char::is_whitespace) {
                return Err(Error::Unrepresentable(format!("token {token:?} as a CoNLL column")));
            }
            writeln!(writer, "{token}\t{tag}")?;
        }
        writeln!(writer)?;
    }
    Ok(())
}
