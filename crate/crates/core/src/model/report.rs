use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::corpus::WordId;
use crate::error::{Error, Result};
use crate::model::{Estimates, TrainedModel, Variant};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedWord {
    pub id: WordId,
    pub word: String,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicWords {
    pub topic: usize,
    /// Top words of φ_z.
    pub independent: Vec<RankedWord>,
    /// Top words of σ_{z,c}, one list per collection.
    pub specific: Vec<Vec<RankedWord>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicReport {
    pub collections: Vec<String>,
    pub k: usize,
    pub topics: Vec<TopicWords>,
}

fn top_k(scored: impl Iterator<Item = (WordId, f64)>, k: usize) -> Vec<(WordId, f64)> {
    let mut all: Vec<(WordId, f64)> = scored.collect();
    all.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    all.truncate(k);
    all
}

/// Word ids with their probabilities, most probable first.
pub type RankedIds = Vec<(WordId, f64)>;

/// Top-k word ids of φ_z and of every σ_{z,c}. Ties are broken by word id.
pub fn top_word_ids(est: &Estimates, z: usize, k: usize) -> (RankedIds, Vec<RankedIds>) {
    let phi = top_k(est.phi_support.words().iter().map(|&w| (w, est.phi(z, w))), k);
    let sigma = (0..est.collections)
        .map(|c| top_k(est.sigma_support.words().iter().map(|&w| (w, est.sigma(z, c, w))), k))
        .collect();
    (phi, sigma)
}

pub fn top_words(model: &TrainedModel, k: usize) -> Result<TopicReport> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let named = |list: Vec<(WordId, f64)>| -> Vec<RankedWord> {
        list.into_iter()
            .map(|(id, probability)| RankedWord {
                id,
                word: model.vocabulary.word(id).to_owned(),
                probability,
            })
            .collect()
    };
    let topics = (0..model.estimates.topics)
        .map(|z| {
            let (phi, sigma) = top_word_ids(&model.estimates, z, k);
            TopicWords {
                topic: z,
                independent: named(phi),
                specific: sigma.into_iter().map(named).collect(),
            }
        })
        .collect();
    Ok(TopicReport {
        collections: model.collections.clone(),
        k,
        topics,
    })
}

impl TopicReport {
    /// Columns: topic, distribution (`independent` or a collection name),
    /// rank, word, probability.
    pub fn write_tsv<W: Write + ?Sized>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "topic\tdistribution\trank\tword\tprobability")?;
        for t in &self.topics {
            for (r, w) in t.independent.iter().enumerate() {
                writeln!(out, "{}\tindependent\t{}\t{}\t{:.8}", t.topic, r + 1, w.word, w.probability)?;
            }
            for (c, list) in t.specific.iter().enumerate() {
                for (r, w) in list.iter().enumerate() {
                    writeln!(out, "{}\t{}\t{}\t{}\t{:.8}", t.topic, self.collections[c], r + 1, w.word, w.probability)?;
                }
            }
        }
        Ok(())
    }

    /// One row per topic: the first collection's specific words, the
    /// independent words in upper case, then the remaining collections.
    pub fn write_table<W: Write + ?Sized>(&self, out: &mut W) -> std::io::Result<()> {
        let join = |l: &[RankedWord]| l.iter().map(|w| w.word.as_str()).collect::<Vec<_>>().join(" ");
        let mut header = vec![format!("{}-specific", self.collections[0]), "INDEPENDENT".to_string()];
        header.extend(self.collections[1..].iter().map(|c| format!("{c}-specific")));
        writeln!(out, "ID | {}", header.join(" | "))?;
        for t in &self.topics {
            let mut cells = vec![join(&t.specific[0]), join(&t.independent).to_uppercase()];
            cells.extend(t.specific[1..].iter().map(|l| join(l)));
            writeln!(out, "{:>2} | {}", t.topic, cells.join(" | "))?;
        }
        Ok(())
    }
}

/// Domain terms of collection `c`: words ranked by the marginal specific
/// probability `sum_z P(z|c) σ_{z,c}[w]`, where `P(z|c)` is the mean θ over
/// the training documents of `c`.
pub fn export_domain_terms(model: &TrainedModel, c: usize, k: usize) -> Result<Vec<RankedWord>> {
    if model.variant() != Variant::Entropy {
        return Err(Error::UnsupportedVariant);
    }
    if c >= model.collections.len() {
        return Err(Error::InvalidArgument(format!("collection index {c} out of range")));
    }
    let est = &model.estimates;
    let t = est.topics;
    let mut topic_weight = vec![0.0; t];
    let mut docs = 0usize;
    for d in 0..model.state.num_documents() {
        if model.state.doc_collection(d) == c {
            for (acc, &p) in topic_weight.iter_mut().zip(est.theta(d)) {
                *acc += p;
            }
            docs += 1;
        }
    }
    if docs > 0 {
        topic_weight.iter_mut().for_each(|p| *p /= docs as f64);
    }
    let scored = est
        .sigma_support
        .words()
        .iter()
        .map(|&w| (w, (0..t).map(|z| topic_weight[z] * est.sigma(z, c, w)).sum::<f64>()));
    Ok(top_k(scored, k)
        .into_iter()
        .map(|(id, probability)| RankedWord {
            id,
            word: model.vocabulary.word(id).to_owned(),
            probability,
        })
        .collect())
}
