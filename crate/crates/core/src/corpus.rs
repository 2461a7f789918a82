//! Multi-collection corpora: loading, tokenization, vocabulary, folds.
//!
//! Input is line-delimited JSON, one document per line:
//!
//! ```text
//! {"id": "p1", "collection": "patents", "text": "An apparatus for ..."}
//! {"id": "q7", "collection": "papers", "tokens": ["we", "propose", "support_vector_machine"]}
//! ```
//!
//! Exactly one of `text` or `tokens` must be present. Multi-word phrases are
//! expected to arrive joined with `_` and are kept as single tokens.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::error::{Error, Result};

pub type WordId = u32;

/// Bidirectional token <-> id map. Ids are dense and assigned in order of
/// first appearance.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, WordId>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_words<I, S>(words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vocab = Vocabulary::new();
        for w in words {
            let w = w.into();
            if vocab.index.contains_key(&w) {
                return Err(Error::InvalidArgument(format!("duplicate vocabulary entry `{w}`")));
            }
            vocab.intern(&w);
        }
        Ok(vocab)
    }

    pub fn intern(&mut self, word: &str) -> WordId {
        if let Some(&id) = self.index.get(word) {
            return id;
        }
        let id = self.words.len() as WordId;
        self.words.push(word.to_owned());
        self.index.insert(word.to_owned(), id);
        id
    }

    pub fn id(&self, word: &str) -> Option<WordId> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: WordId) -> &str {
        &self.words[id as usize]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub collection: usize,
    pub tokens: Vec<WordId>,
}

/// A document before interning: surface tokens and a collection name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawDocument {
    pub id: String,
    pub collection: String,
    pub tokens: Vec<String>,
}

impl RawDocument {
    pub fn new<S: Into<String>>(id: impl Into<String>, collection: impl Into<String>, tokens: impl IntoIterator<Item = S>) -> Self {
        Self {
            id: id.into(),
            collection: collection.into(),
            tokens: tokens.into_iter().map(Into::into).collect(),
        }
    }
}

/// An immutable multi-collection corpus.
///
/// `token_counts` is word-major: `tf(w, c) = token_counts[w * C + c]`.
#[derive(Debug, Clone)]
pub struct Corpus {
    documents: Vec<Document>,
    collections: Vec<String>,
    vocabulary: Vocabulary,
    token_counts: Vec<u32>,
    total_tokens: usize,
    dropped_documents: usize,
}

impl Corpus {
    /// Interns raw documents. Collections are ordered by first appearance
    /// unless `collection_order` fixes them. Documents without tokens are
    /// dropped and counted.
    pub fn from_raw(raw: Vec<RawDocument>, collection_order: Option<&[String]>) -> Result<Self> {
        let mut collections: Vec<String> = collection_order.map(<[String]>::to_vec).unwrap_or_default();
        let fixed = collection_order.is_some();
        let mut coll_index: HashMap<String, usize> =
            collections.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect();
        if coll_index.len() != collections.len() {
            return Err(Error::InvalidArgument("duplicate collection names".into()));
        }

        let mut vocabulary = Vocabulary::new();
        let mut documents = Vec::with_capacity(raw.len());
        let mut dropped = 0;
        for doc in raw {
            if doc.tokens.is_empty() {
                dropped += 1;
                continue;
            }
            let collection = match coll_index.get(&doc.collection) {
                Some(&c) => c,
                None if fixed => return Err(Error::UnknownCollection(doc.collection)),
                None => {
                    let c = collections.len();
                    collections.push(doc.collection.clone());
                    coll_index.insert(doc.collection.clone(), c);
                    c
                }
            };
            let tokens = doc.tokens.iter().map(|t| vocabulary.intern(t)).collect();
            documents.push(Document {
                id: doc.id,
                collection,
                tokens,
            });
        }
        if dropped > 0 {
            warn!("dropped {dropped} empty documents");
        }
        Self::assemble(documents, collections, vocabulary, dropped)
    }

    fn assemble(
        documents: Vec<Document>,
        collections: Vec<String>,
        vocabulary: Vocabulary,
        dropped_documents: usize,
    ) -> Result<Self> {
        if documents.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let c_count = collections.len();
        let mut per_collection = vec![0usize; c_count];
        let mut token_counts = vec![0u32; vocabulary.len() * c_count];
        let mut total_tokens = 0;
        for doc in &documents {
            per_collection[doc.collection] += 1;
            total_tokens += doc.tokens.len();
            for &w in &doc.tokens {
                token_counts[w as usize * c_count + doc.collection] += 1;
            }
        }
        let populated = per_collection.iter().filter(|&&n| n > 0).count();
        if populated < 2 || c_count < 2 {
            return Err(Error::TooFewCollections(populated));
        }
        if populated < c_count {
            let empty = per_collection.iter().position(|&n| n == 0).unwrap();
            return Err(Error::InvalidArgument(format!(
                "collection `{}` has no documents",
                collections[empty]
            )));
        }
        Ok(Self {
            documents,
            collections,
            vocabulary,
            token_counts,
            total_tokens,
            dropped_documents,
        })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn collections(&self) -> &[String] {
        &self.collections
    }

    pub fn collection_index(&self, name: &str) -> Option<usize> {
        self.collections.iter().position(|c| c == name)
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn num_collections(&self) -> usize {
        self.collections.len()
    }

    pub fn num_documents(&self) -> usize {
        self.documents.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocabulary.len()
    }

    /// Total token count M.
    pub fn num_tokens(&self) -> usize {
        self.total_tokens
    }

    pub fn dropped_documents(&self) -> usize {
        self.dropped_documents
    }

    /// tf(w, c) for every collection of word `w`.
    pub fn word_counts(&self, w: WordId) -> &[u32] {
        let c = self.collections.len();
        &self.token_counts[w as usize * c..(w as usize + 1) * c]
    }

    pub fn term_frequency(&self, w: WordId, collection: usize) -> u32 {
        self.word_counts(w)[collection]
    }

    /// Raw occurrence count of `w` over all collections.
    pub fn word_total(&self, w: WordId) -> u64 {
        self.word_counts(w).iter().map(|&n| n as u64).sum()
    }

    pub fn documents_per_collection(&self) -> Vec<usize> {
        let mut n = vec![0; self.collections.len()];
        for d in &self.documents {
            n[d.collection] += 1;
        }
        n
    }

    pub fn raw_document(&self, index: usize) -> RawDocument {
        let doc = &self.documents[index];
        RawDocument {
            id: doc.id.clone(),
            collection: self.collections[doc.collection].clone(),
            tokens: doc.tokens.iter().map(|&t| self.vocabulary.word(t).to_owned()).collect(),
        }
    }

    /// A view over a subset of documents. The vocabulary and tf statistics
    /// are recomputed from the selected documents only; collections keep
    /// the parent's order.
    pub fn subset(&self, indices: &[usize]) -> Result<Corpus> {
        let mut vocabulary = Vocabulary::new();
        let mut remap: Vec<Option<WordId>> = vec![None; self.vocab_size()];
        let documents = indices
            .iter()
            .map(|&i| {
                let doc = &self.documents[i];
                let tokens = doc
                    .tokens
                    .iter()
                    .map(|&t| *remap[t as usize].get_or_insert_with(|| vocabulary.intern(self.vocabulary.word(t))))
                    .collect();
                Document {
                    id: doc.id.clone(),
                    collection: doc.collection,
                    tokens,
                }
            })
            .collect();
        Self::assemble(documents, self.collections.clone(), vocabulary, 0)
    }

    /// Re-expresses every document of `self` in the vocabulary and collection
    /// order of `target`, dropping out-of-vocabulary tokens.
    pub fn project_onto(&self, target: &Corpus) -> Result<Projection> {
        let collection_map = self
            .collections
            .iter()
            .map(|name| target.collection_index(name).ok_or_else(|| Error::UnknownCollection(name.clone())))
            .collect::<Result<Vec<_>>>()?;
        let documents: Vec<FilteredDocument> = self
            .documents
            .iter()
            .map(|doc| {
                let mut filtered = out_of_vocabulary_filter(doc, &self.vocabulary, &target.vocabulary);
                filtered.document.collection = collection_map[doc.collection];
                filtered
            })
            .collect();
        Ok(Projection { documents })
    }
}

/// A document expressed in a training vocabulary, with its OOV count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilteredDocument {
    pub document: Document,
    pub removed: usize,
}

impl FilteredDocument {
    /// Documents reduced to zero tokens are excluded from evaluation.
    pub fn is_empty(&self) -> bool {
        self.document.tokens.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct Projection {
    pub documents: Vec<FilteredDocument>,
}

impl Projection {
    pub fn kept(&self) -> impl Iterator<Item = &Document> {
        self.documents.iter().filter(|d| !d.is_empty()).map(|d| &d.document)
    }

    pub fn oov_stats(&self) -> OovStats {
        let mut stats = OovStats::default();
        for d in &self.documents {
            stats.removed_tokens += d.removed;
            stats.kept_tokens += d.document.tokens.len();
            if d.is_empty() {
                stats.empty_documents += 1;
            }
        }
        stats
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct OovStats {
    pub kept_tokens: usize,
    pub removed_tokens: usize,
    pub empty_documents: usize,
}

/// Drops the tokens of `doc` (interned in `doc_vocab`) that are absent from
/// `target`, returning a copy expressed in `target`'s ids.
pub fn out_of_vocabulary_filter(doc: &Document, doc_vocab: &Vocabulary, target: &Vocabulary) -> FilteredDocument {
    let mut removed = 0;
    let tokens = doc
        .tokens
        .iter()
        .filter_map(|&t| {
            let id = target.id(doc_vocab.word(t));
            if id.is_none() {
                removed += 1;
            }
            id
        })
        .collect();
    FilteredDocument {
        document: Document {
            id: doc.id.clone(),
            collection: doc.collection,
            tokens,
        },
        removed,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CorpusFormat {
    /// One JSON object per line with `id`, `collection` and `text` or `tokens`.
    #[default]
    JsonLines,
}

#[derive(Debug, Clone)]
pub struct LoadOptions<'a> {
    pub format: CorpusFormat,
    pub stopwords: Option<&'a Path>,
    pub min_token_len: usize,
}

impl Default for LoadOptions<'_> {
    fn default() -> Self {
        Self {
            format: CorpusFormat::JsonLines,
            stopwords: None,
            min_token_len: 1,
        }
    }
}

#[derive(Debug, Deserialize)]
struct Record {
    id: String,
    collection: String,
    text: Option<String>,
    tokens: Option<Vec<String>>,
}

/// Reads a stop-word file: one token per line, `#` starts a comment.
pub fn load_stopwords(path: &Path) -> Result<HashSet<String>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut set = HashSet::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let entry = line.split('#').next().unwrap_or("").trim();
        if !entry.is_empty() {
            set.insert(entry.to_lowercase());
        }
    }
    Ok(set)
}

pub fn load_corpus(path: &Path, options: &LoadOptions<'_>) -> Result<Corpus> {
    let stopwords = match options.stopwords {
        Some(p) => load_stopwords(p)?,
        None => HashSet::new(),
    };
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let raw = match options.format {
        CorpusFormat::JsonLines => read_json_lines(BufReader::new(file), path)?,
    };
    let normalize = Normalizer {
        stopwords: &stopwords,
        min_token_len: options.min_token_len,
    };
    let docs = raw.into_iter().map(|r| normalize.apply(r)).collect();
    Corpus::from_raw(docs, None)
}

fn read_json_lines<R: BufRead>(reader: R, path: &Path) -> Result<Vec<(Record, bool)>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: Record = serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
            line: i + 1,
            message: e.to_string(),
        })?;
        let pretokenized = match (&record.text, &record.tokens) {
            (Some(_), None) => false,
            (None, Some(_)) => true,
            _ => {
                return Err(Error::MalformedRecord {
                    line: i + 1,
                    message: "exactly one of `text` or `tokens` is required".into(),
                })
            }
        };
        out.push((record, pretokenized));
    }
    Ok(out)
}

struct Normalizer<'a> {
    stopwords: &'a HashSet<String>,
    min_token_len: usize,
}

impl Normalizer<'_> {
    fn apply(&self, (record, pretokenized): (Record, bool)) -> RawDocument {
        let tokens: Vec<String> = if pretokenized {
            record.tokens.unwrap_or_default().into_iter().map(|t| t.to_lowercase()).collect()
        } else {
            tokenize(record.text.as_deref().unwrap_or(""))
        };
        let tokens = tokens
            .into_iter()
            .filter(|t| !t.is_empty() && t.chars().count() >= self.min_token_len && !self.stopwords.contains(t))
            .collect();
        RawDocument {
            id: record.id,
            collection: record.collection,
            tokens,
        }
    }
}

fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '\u{2010}'..='\u{2027}' | '\u{00ab}' | '\u{00bb}' | '\u{00bf}' | '\u{00a1}' | '\u{3001}' | '\u{3002}'
        )
}

/// Lowercases, splits on Unicode whitespace and strips leading/trailing
/// punctuation. Interior underscores (joined phrases) survive.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|t| t.trim_matches(is_punctuation).to_lowercase())
        .filter(|t| !t.is_empty())
        .collect()
}

/// One cross-validation fold.
#[derive(Debug, Clone)]
pub struct Fold {
    pub index: usize,
    pub train: Corpus,
    pub test: Corpus,
    pub test_indices: Vec<usize>,
}

/// Assigns every document to one of `k` test folds, stratified by collection.
///
/// Within each collection documents are shuffled and dealt round-robin; the
/// starting fold rotates with the running document count so overall fold
/// sizes also differ by at most one.
pub fn fold_assignment(corpus: &Corpus, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 folds, got {k}")));
    }
    let per_collection = corpus.documents_per_collection();
    for (c, &n) in per_collection.iter().enumerate() {
        if n < k {
            return Err(Error::NotEnoughDocuments {
                folds: k,
                collection: corpus.collections()[c].clone(),
                documents: n,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0; corpus.num_documents()];
    let mut offset = 0;
    for c in 0..corpus.num_collections() {
        let mut members: Vec<usize> = corpus
            .documents()
            .iter()
            .enumerate()
            .filter(|(_, d)| d.collection == c)
            .map(|(i, _)| i)
            .collect();
        members.shuffle(&mut rng);
        for (j, &doc) in members.iter().enumerate() {
            assignment[doc] = (offset + j) % k;
        }
        offset += members.len();
    }
    Ok(assignment)
}

pub fn split_folds(corpus: &Corpus, k: usize, seed: u64) -> Result<Vec<Fold>> {
    let assignment = fold_assignment(corpus, k, seed)?;
    (0..k)
        .map(|f| {
            let (test_indices, train_indices): (Vec<usize>, Vec<usize>) =
                (0..corpus.num_documents()).partition(|&i| assignment[i] == f);
            Ok(Fold {
                index: f,
                train: corpus.subset(&train_indices)?,
                test: corpus.subset(&test_indices)?,
                test_indices,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use std::io::Write;

    use proptest::prelude::*;

    use super::*;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    fn toy(docs_per_collection: &[usize]) -> Corpus {
        let mut raw = Vec::new();
        for (c, &n) in docs_per_collection.iter().enumerate() {
            for i in 0..n {
                raw.push(RawDocument::new(
                    format!("c{c}d{i}"),
                    format!("col{c}"),
                    vec![format!("w{}", i % 7), format!("u{c}"), "shared".to_string()],
                ));
            }
        }
        Corpus::from_raw(raw, None).unwrap()
    }

    #[test]
    fn loads_three_records_identity() {
        let f = write_tmp(
            r#"{"id":"a","collection":"x","tokens":["alpha","beta"]}
{"id":"b","collection":"y","tokens":["beta","gamma","gamma"]}

{"id":"c","collection":"x","tokens":["delta"]}
"#,
        );
        let corpus = load_corpus(f.path(), &LoadOptions::default()).unwrap();
        assert_eq!(corpus.num_collections(), 2);
        assert_eq!(corpus.num_documents(), 3);
        assert_eq!(corpus.num_tokens(), 6);
        let total: u64 = (0..corpus.vocab_size() as u32).map(|w| corpus.word_total(w)).sum();
        assert_eq!(total, 6);
        let gamma = corpus.vocabulary().id("gamma").unwrap();
        assert_eq!(corpus.word_counts(gamma), &[0, 2]);
    }

    #[test]
    fn stopwords_keep_phrases() {
        let stop = write_tmp("# common words\nthe\n\nof # trailing comment\n");
        let f = write_tmp(
            r#"{"id":"a","collection":"x","tokens":["the","support_vector_machine"]}
{"id":"b","collection":"y","text":"The theory OF everything."}
"#,
        );
        let opts = LoadOptions {
            stopwords: Some(stop.path()),
            ..LoadOptions::default()
        };
        let corpus = load_corpus(f.path(), &opts).unwrap();
        let doc = corpus.raw_document(0);
        assert_eq!(doc.tokens, vec!["support_vector_machine"]);
        assert_eq!(corpus.raw_document(1).tokens, vec!["theory", "everything"]);
    }

    #[test]
    fn single_collection_is_rejected() {
        let f = write_tmp(
            r#"{"id":"a","collection":"x","text":"one two"}
{"id":"b","collection":"x","text":"three"}
"#,
        );
        let err = load_corpus(f.path(), &LoadOptions::default()).unwrap_err();
        assert!(matches!(err, Error::TooFewCollections(1)));
        assert!(err.to_string().contains("fewer than 2 collections"));
    }

    #[test]
    fn malformed_line_is_reported() {
        let f = write_tmp(
            r#"{"id":"a","collection":"x","text":"one"}
{"id":"b","collection":"y"}
"#,
        );
        match load_corpus(f.path(), &LoadOptions::default()).unwrap_err() {
            Error::MalformedRecord { line, .. } => assert_eq!(line, 2),
            e => panic!("unexpected {e:?}"),
        }
        let f = write_tmp("{\"id\":\"a\",\"collection\":\"x\",\"text\":\"one\"}\nnot json\n");
        assert!(matches!(
            load_corpus(f.path(), &LoadOptions::default()),
            Err(Error::MalformedRecord { line: 2, .. })
        ));
    }

    #[test]
    fn emptied_documents_are_dropped() {
        let stop = write_tmp("the\n");
        let f = write_tmp(
            r#"{"id":"a","collection":"x","text":"the"}
{"id":"b","collection":"x","text":"cat"}
{"id":"c","collection":"y","text":"dog"}
"#,
        );
        let opts = LoadOptions {
            stopwords: Some(stop.path()),
            min_token_len: 1,
            ..LoadOptions::default()
        };
        let corpus = load_corpus(f.path(), &opts).unwrap();
        assert_eq!(corpus.num_documents(), 2);
        assert_eq!(corpus.dropped_documents(), 1);
    }

    #[test]
    fn all_empty_is_an_error() {
        let stop = write_tmp("a\nb\n");
        let f = write_tmp("{\"id\":\"1\",\"collection\":\"x\",\"text\":\"a\"}\n{\"id\":\"2\",\"collection\":\"y\",\"text\":\"b\"}\n");
        let opts = LoadOptions {
            stopwords: Some(stop.path()),
            ..LoadOptions::default()
        };
        assert!(matches!(load_corpus(f.path(), &opts), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn min_token_len_filters() {
        let f = write_tmp("{\"id\":\"1\",\"collection\":\"x\",\"text\":\"a bb ccc\"}\n{\"id\":\"2\",\"collection\":\"y\",\"text\":\"dd\"}\n");
        let opts = LoadOptions {
            min_token_len: 2,
            ..LoadOptions::default()
        };
        let corpus = load_corpus(f.path(), &opts).unwrap();
        assert_eq!(corpus.raw_document(0).tokens, vec!["bb", "ccc"]);
    }

    #[test]
    fn tokenizer_strips_punctuation() {
        assert_eq!(
            tokenize("  \"Hello,\" said (the) Machine_Learning-model… «ok»"),
            vec!["hello", "said", "the", "machine_learning-model", "ok"]
        );
        assert!(tokenize("... --- !!!").is_empty());
    }

    #[test]
    fn stratified_folds() {
        let corpus = toy(&[50, 50]);
        let folds = split_folds(&corpus, 10, 42).unwrap();
        assert_eq!(folds.len(), 10);
        for fold in &folds {
            assert_eq!(fold.test.num_documents(), 10);
            assert_eq!(fold.test.documents_per_collection(), vec![5, 5]);
            assert_eq!(fold.train.num_documents(), 90);
        }
        let again = fold_assignment(&corpus, 10, 42).unwrap();
        assert_eq!(again, fold_assignment(&corpus, 10, 42).unwrap());
        assert_ne!(again, fold_assignment(&corpus, 10, 43).unwrap());
    }

    #[test]
    fn too_many_folds() {
        let corpus = toy(&[4, 20]);
        match split_folds(&corpus, 10, 1).unwrap_err() {
            Error::NotEnoughDocuments { documents, .. } => assert_eq!(documents, 4),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn train_views_recompute_vocabulary() {
        let corpus = toy(&[12, 12]);
        for fold in split_folds(&corpus, 3, 5).unwrap() {
            let train = &fold.train;
            let total: u64 = (0..train.vocab_size() as u32).map(|w| train.word_total(w)).sum();
            assert_eq!(total as usize, train.num_tokens());
            assert!((0..train.vocab_size() as u32).all(|w| train.word_total(w) > 0));
        }
    }

    #[test]
    fn oov_filter_cases() {
        let train = Vocabulary::from_words(["a", "b", "c"]).unwrap();
        let source = Vocabulary::from_words(["a", "x", "b", "y", "c"]).unwrap();
        let doc = Document {
            id: "d".into(),
            collection: 1,
            tokens: vec![0, 1, 2, 3, 4],
        };
        let out = out_of_vocabulary_filter(&doc, &source, &train);
        assert_eq!(out.document.tokens, vec![0, 1, 2]);
        assert_eq!(out.removed, 2);
        assert_eq!(doc.tokens.len(), 5);

        let inside = Document {
            id: "e".into(),
            collection: 0,
            tokens: vec![2, 0, 1],
        };
        let same = out_of_vocabulary_filter(&inside, &train, &train);
        assert_eq!(same.document, inside);
        assert_eq!(same.removed, 0);

        let outside = Document {
            id: "f".into(),
            collection: 0,
            tokens: vec![1, 3],
        };
        let gone = out_of_vocabulary_filter(&outside, &source, &train);
        assert!(gone.is_empty());
        assert_eq!(gone.removed, 2);
    }

    #[test]
    fn projection_maps_collections_by_name() {
        let train = Corpus::from_raw(
            vec![RawDocument::new("1", "a", ["x", "y"]), RawDocument::new("2", "b", ["y", "z"])],
            None,
        )
        .unwrap();
        let test = Corpus::from_raw(
            vec![RawDocument::new("3", "b", ["z", "q"]), RawDocument::new("4", "a", ["q"])],
            None,
        )
        .unwrap();
        let p = test.project_onto(&train).unwrap();
        assert_eq!(p.documents[0].document.collection, 1);
        assert_eq!(p.documents[1].document.collection, 0);
        assert_eq!(p.kept().count(), 1);
        let stats = p.oov_stats();
        assert_eq!((stats.kept_tokens, stats.removed_tokens, stats.empty_documents), (1, 2, 1));
    }

    proptest! {
        #[test]
        fn conservation_and_fold_partition(
            sizes in proptest::collection::vec(3usize..15, 2..4),
            k in 2usize..4,
            seed in any::<u64>(),
        ) {
            let corpus = toy(&sizes);
            let total: u64 = (0..corpus.vocab_size() as u32).map(|w| corpus.word_total(w)).sum();
            prop_assert_eq!(total as usize, corpus.documents().iter().map(|d| d.tokens.len()).sum::<usize>());

            let folds = split_folds(&corpus, k, seed).unwrap();
            let mut seen = vec![0usize; corpus.num_documents()];
            for fold in &folds {
                for &i in &fold.test_indices {
                    seen[i] += 1;
                }
                for (c, &n) in fold.test.documents_per_collection().iter().enumerate() {
                    let expected = sizes[c] as f64 / k as f64;
                    prop_assert!((n as f64 - expected).abs() < 1.0);
                }
            }
            prop_assert!(seen.iter().all(|&n| n == 1));
        }

        #[test]
        fn vocabulary_round_trip(words in proptest::collection::hash_set("[a-z_]{1,8}", 1..40)) {
            let vocab = Vocabulary::from_words(words.iter().cloned()).unwrap();
            for w in &words {
                let id = vocab.id(w).unwrap();
                prop_assert_eq!(vocab.word(id), w.as_str());
            }
            prop_assert_eq!(vocab.len(), words.len());
        }
    }
}
