//! One JSON object per line holding a token array and an array of
//! `[start, end, label]` triples with inclusive `end`.

use std::io::{BufRead, Write};

use labelshift_core::{Corpus, Entity, LabelMode, Sentence, SourceFormat};
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct JsonlOptions {
    pub tokens_field: String,
    pub entities_field: String,
    pub mode: LabelMode,
}

impl Default for JsonlOptions {
    fn default() -> Self {
        Self {
            tokens_field: "tokenized_text".into(),
            entities_field: "ner".into(),
            mode: LabelMode::Normalize,
        }
    }
}

pub fn parse_jsonl_spans<R: BufRead>(reader: R, options: &JsonlOptions) -> Result<Corpus> {
    let mut sentences = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(&line)
            .map_err(|e| Error::syntax(line_no, format!("malformed JSON: {e}")))?;
        sentences.push(parse_record(&value, options, line_no)?);
    }
    Ok(Corpus::new(sentences, SourceFormat::JsonlSpans)?)
}

fn parse_record(value: &Value, options: &JsonlOptions, line: usize) -> Result<Sentence> {
    let tokens = value
        .get(&options.tokens_field)
        .and_then(Value::as_array)
        .ok_or_else(|| Error::syntax(line, format!("missing array field {:?}", options.tokens_field)))?
        .iter()
        .map(|t| {
            t.as_str()
                .map(String::from)
                .ok_or_else(|| Error::syntax(line, "tokens must be strings"))
        })
        .collect::<Result<Vec<_>>>()?;
    let raw_entities = value
        .get(&options.entities_field)
        .and_then(Value::as_array)
        .ok_or_else(|| {
            Error::syntax(line, format!("missing array field {:?}", options.entities_field))
        })?;

    let mut entities = Vec::with_capacity(raw_entities.len());
    for triple in raw_entities {
        let (start, end, label) = match triple.as_array().map(Vec::as_slice) {
            Some([s, e, l]) => (s.as_u64(), e.as_u64(), l.as_str()),
            _ => return Err(Error::syntax(line, "entity must be a [start, end, label] triple")),
        };
        let (Some(start), Some(end), Some(label)) = (start, end, label) else {
            return Err(Error::syntax(line, "entity must be a [start, end, label] triple"));
        };
        let label = options
            .mode
            .apply(label)
            .map_err(|source| Error::Invalid { line, source })?;
        entities.push(Entity::new(start as usize, end as usize, label));
    }
    Sentence::new(tokens, entities).map_err(|source| Error::Invalid { line, source })
}

pub fn write_jsonl_spans<W: Write>(corpus: &Corpus, mut writer: W, options: &JsonlOptions) -> Result<()> {
    for sentence in corpus.sentences() {
        let entities: Vec<Value> = sentence
            .entities()
            .iter()
            .map(|e| serde_json::json!([e.start, e.end, e.label]))
            .collect();
        let mut record = serde_json::Map::new();
        record.insert(options.tokens_field.clone(), serde_json::json!(sentence.tokens()));
        record.insert(options.entities_field.clone(), Value::Array(entities));
        serde_json::to_writer(&mut writer, &record)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use labelshift_core::label_stats;

    fn parse(text: &str) -> Result<Corpus> {
        parse_jsonl_spans(text.as_bytes(), &JsonlOptions::default())
    }

    #[test]
    fn minimal_line() {
        let c = parse(r#"{"tokenized_text":["Dylan","sang"],"ner":[[0,0,"musician"]]}"#).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.sentences()[0].entities(), [Entity::new(0, 0, "musician")]);
    }

    #[test]
    fn span_out_of_range() {
        let err = parse(r#"{"tokenized_text":["a"],"ner":[[0,5,"x"]]}"#).unwrap_err();
        assert!(matches!(
            err,
            Error::Invalid {
                line: 1,
                source: labelshift_core::Error::SpanOutOfRange { .. }
            }
        ));
    }

    #[test]
    fn malformed_line_reports_number() {
        let text = "{\"tokenized_text\":[\"a\"],\"ner\":[]}\n\n{not json\n";
        match parse(text).unwrap_err() {
            Error::Syntax { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("malformed JSON"));
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn empty_label_rejected() {
        let err = parse(r#"{"tokenized_text":["a"],"ner":[[0,0," _ "]]}"#).unwrap_err();
        assert!(matches!(
            err,
            Error::Invalid {
                source: labelshift_core::Error::EmptyLabel,
                ..
            }
        ));
        assert!(parse(r#"{"tokenized_text":["a"],"ner":[[0,0]]}"#).is_err());
        assert!(parse(r#"{"tokenized_text":["a"],"ner":[[-1,0,"x"]]}"#).is_err());
        assert!(parse(r#"{"tokens":["a"],"ner":[]}"#).is_err());
    }

    #[test]
    fn labels_merge_after_normalization() {
        let text = concat!(
            r#"{"tokenized_text":["Ann"],"ner":[[0,0,"Person"]]}"#, "\n",
            r#"{"tokenized_text":["Bo"],"ner":[[0,0,"person"]]}"#, "\n",
            r#"{"tokenized_text":["Rome"],"ner":[[0,0,"PLACE"]]}"#, "\n",
        );
        let stats = label_stats(&parse(text).unwrap());
        assert_eq!(stats.count("person"), 2);
        assert_eq!(stats.count("place"), 1);
    }

    #[test]
    fn custom_field_names_round_trip() {
        let options = JsonlOptions {
            tokens_field: "tokens".into(),
            entities_field: "spans".into(),
            mode: LabelMode::Verbatim,
        };
        let text = r#"{"tokens":["New","York","Times"],"spans":[[0,1,"City"],[0,2,"Org"]]}"#;
        let corpus = parse_jsonl_spans(text.as_bytes(), &options).unwrap();
        let mut out = Vec::new();
        write_jsonl_spans(&corpus, &mut out, &options).unwrap();
        assert_eq!(parse_jsonl_spans(out.as_slice(), &options).unwrap(), corpus);
    }
}
