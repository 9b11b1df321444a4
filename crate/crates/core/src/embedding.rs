//! Pretrained word vectors, sentence vectors, and cosine similarity.
//!
//! Word vectors are loaded from the standard word2vec text format: a header
//! line `<vocab_size> <dim>` followed by one `word f1 f2 ... fdim` row per
//! word. Sentence vectors are the plain mean of the known token vectors.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("i/o error reading embeddings: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
}

/// Immutable word -> vector table with a fixed dimension.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    /// Build a table from `(word, vector)` pairs. Later duplicates win.
    ///
    /// Panics if any vector's length differs from `dim`.
    pub fn from_pairs(dim: usize, pairs: impl IntoIterator<Item = (String, Vec<f64>)>) -> Self {
        let mut vectors = HashMap::new();
        for (word, vec) in pairs {
            assert_eq!(vec.len(), dim, "vector length mismatch for {word:?}");
            vectors.insert(word, vec);
        }
        EmbeddingTable { dim, vectors }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.vectors.get(word).map(Vec::as_slice)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.vectors.contains_key(word)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.vectors.iter().map(|(w, v)| (w.as_str(), v.as_slice()))
    }

    /// Serialize in the word2vec text format, words in sorted order.
    pub fn to_text(&self) -> String {
        let mut words: Vec<&String> = self.vectors.keys().collect();
        words.sort();
        let mut out = format!("{} {}\n", words.len(), self.dim);
        for word in words {
            out.push_str(word);
            for v in &self.vectors[word] {
                out.push(' ');
                out.push_str(&format!("{v}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Parse a word2vec text file: header `<vocab_size> <dim>`, then one row per
/// word with exactly `dim` floats. Duplicate words keep the last row.
pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingTable, LoadError> {
    let file = File::open(path.as_ref())?;
    read_embeddings(BufReader::new(file))
}

/// Same as [`load_embeddings`] but over any reader.
pub fn read_embeddings<R: Read>(reader: R) -> Result<EmbeddingTable, LoadError> {
    let mut lines = BufReader::new(reader).lines();

    let header = lines
        .next()
        .ok_or_else(|| LoadError::Format {
            line: 1,
            msg: "empty file, expected `<vocab_size> <dim>` header".into(),
        })?
        .map_err(LoadError::Io)?;
    let mut parts = header.split_whitespace();
    let declared: usize = parse_field(parts.next(), 1, "vocab size")?;
    let dim: usize = parse_field(parts.next(), 1, "dimension")?;
    if parts.next().is_some() {
        return Err(LoadError::Format {
            line: 1,
            msg: "header has trailing fields".into(),
        });
    }
    if dim == 0 {
        return Err(LoadError::Format {
            line: 1,
            msg: "dimension must be positive".into(),
        });
    }

    let mut vectors: HashMap<String, Vec<f64>> = HashMap::new();
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line.map_err(LoadError::Io)?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let word = fields.next().expect("non-empty line has a first field");
        let mut vec = Vec::with_capacity(dim);
        for field in fields {
            let v: f64 = field.parse().map_err(|_| LoadError::Format {
                line: line_no,
                msg: format!("bad float {field:?}"),
            })?;
            if !v.is_finite() {
                return Err(LoadError::Format {
                    line: line_no,
                    msg: format!("non-finite value {field:?}"),
                });
            }
            vec.push(v);
        }
        if vec.len() != dim {
            return Err(LoadError::Format {
                line: line_no,
                msg: format!("row arity: expected {dim} floats, got {}", vec.len()),
            });
        }
        if vectors.insert(word.to_string(), vec).is_some() {
            log::warn!("duplicate embedding row for {word:?} at line {line_no}, keeping last");
        }
    }

    if vectors.len() != declared {
        log::warn!(
            "embedding header declares {declared} words but {} rows parsed",
            vectors.len()
        );
    }
    Ok(EmbeddingTable { dim, vectors })
}

fn parse_field(field: Option<&str>, line: usize, what: &str) -> Result<usize, LoadError> {
    field
        .and_then(|f| f.parse().ok())
        .ok_or_else(|| LoadError::Format {
            line,
            msg: format!("bad or missing {what} in header"),
        })
}

/// Mean vector of the tokens found in the table.
///
/// Unknown tokens are skipped; if no token is known the vector is all zeros
/// and `known_token_count` is 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceVector {
    pub values: Vec<f64>,
    pub known_token_count: usize,
}

impl SentenceVector {
    pub fn zero(dim: usize) -> Self {
        SentenceVector {
            values: vec![0.0; dim],
            known_token_count: 0,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.known_token_count == 0
    }
}

pub fn sentence_vector<T: AsRef<str>>(tokens: &[T], table: &EmbeddingTable) -> SentenceVector {
    let mut sum = vec![0.0; table.dim()];
    let mut known = 0usize;
    for token in tokens {
        if let Some(vec) = table.get(token.as_ref()) {
            for (s, v) in sum.iter_mut().zip(vec) {
                *s += v;
            }
            known += 1;
        }
    }
    if known > 0 {
        let inv = 1.0 / known as f64;
        for s in &mut sum {
            *s *= inv;
        }
    }
    SentenceVector {
        values: sum,
        known_token_count: known,
    }
}

/// Cosine similarity `a.b / (|a||b|)`; 0 when either norm is 0.
///
/// Panics if the lengths differ.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "cosine over vectors of different length");
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot / (na.sqrt() * nb.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table_from(text: &str) -> Result<EmbeddingTable, LoadError> {
        read_embeddings(text.as_bytes())
    }

    #[test]
    fn parses_small_file() {
        let t = table_from("2 3\napple 1 0 0\nbanana 0 1 0\n").unwrap();
        assert_eq!(t.dim(), 3);
        assert_eq!(t.len(), 2);
        assert_eq!(t.get("apple").unwrap(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn row_arity_is_an_error() {
        let err = table_from("1 3\napple 1 0\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2"), "{msg}");
        assert!(msg.contains("row arity"), "{msg}");
    }

    #[test]
    fn non_finite_value_is_an_error() {
        let err = table_from("1 2\napple nan 0\n").unwrap_err();
        assert!(err.to_string().contains("non-finite"), "{err}");
    }

    #[test]
    fn duplicate_word_keeps_last() {
        let t = table_from("2 2\nw 1 0\nw 0 1\n").unwrap();
        assert_eq!(t.get("w").unwrap(), &[0.0, 1.0]);
    }

    #[test]
    fn text_round_trip() {
        let t = table_from("2 2\nb 0 1\na 1 0\n").unwrap();
        let again = table_from(&t.to_text()).unwrap();
        assert_eq!(again.get("a"), t.get("a"));
        assert_eq!(again.get("b"), t.get("b"));
        assert_eq!(again.len(), 2);
    }

    #[test]
    fn sentence_vector_means() {
        let t = table_from("2 3\napple 1 0 0\nbanana 0 1 0\n").unwrap();
        let sv = sentence_vector(&["apple"], &t);
        assert_eq!(sv.values, vec![1.0, 0.0, 0.0]);
        assert_eq!(sv.known_token_count, 1);

        let sv = sentence_vector(&["apple", "banana"], &t);
        assert_eq!(sv.values, vec![0.5, 0.5, 0.0]);
        assert_eq!(sv.known_token_count, 2);

        let sv = sentence_vector(&["zzz_unknown"], &t);
        assert_eq!(sv.values, vec![0.0, 0.0, 0.0]);
        assert_eq!(sv.known_token_count, 0);
        assert!(sv.is_zero());
    }

    #[test]
    fn cosine_basics() {
        assert_eq!(cosine(&[1.0, 0.0], &[1.0, 0.0]), 1.0);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]), 0.0);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 0.0]), 0.0);
    }

    #[test]
    #[should_panic(expected = "different length")]
    fn cosine_length_mismatch_panics() {
        cosine(&[1.0], &[1.0, 2.0]);
    }

    proptest! {
        #[test]
        fn cosine_symmetric_and_bounded(
            a in proptest::collection::vec(-1e6f64..1e6, 4),
            b in proptest::collection::vec(-1e6f64..1e6, 4),
        ) {
            let ab = cosine(&a, &b);
            let ba = cosine(&b, &a);
            prop_assert_eq!(ab, ba);
            prop_assert!(ab.abs() <= 1.0 + 1e-12);
        }

        #[test]
        fn cosine_scale_invariant(
            a in proptest::collection::vec(-100.0f64..100.0, 3),
            b in proptest::collection::vec(-100.0f64..100.0, 3),
            c in 0.001f64..1000.0,
        ) {
            let scaled: Vec<f64> = a.iter().map(|x| x * c).collect();
            let d = (cosine(&scaled, &b) - cosine(&a, &b)).abs();
            prop_assert!(d <= 1e-9, "difference {}", d);
        }

        #[test]
        fn sentence_vector_order_independent(perm in proptest::sample::subsequence(vec![0usize,1,2,0,1], 5)) {
            let t = table_from("3 2\nw0 1 0\nw1 0 1\nw2 1 1\n").unwrap();
            let tokens: Vec<String> = perm.iter().map(|i| format!("w{i}")).collect();
            let mut rev = tokens.clone();
            rev.reverse();
            prop_assert_eq!(sentence_vector(&tokens, &t), sentence_vector(&rev, &t));
        }
    }
}
