//! Versioned, checksummed model container.
//!
//! ```text
//! offset  size  field
//! 0       8     magic  b"CCTMMODL"
//! 8       4     format version (u32 LE)
//! 12      8     payload length in bytes (u64 LE)
//! 20      32    SHA-256 of the payload
//! 52      ...   payload: sections of [tag: 4 bytes][length: u64 LE][body]
//! ```
//!
//! Sections: `META` (JSON: variant, hyperparameters, dimensions, partition
//! threshold and γ, configuration echo), `VOCB`/`COLL` (string lists:
//! u32 count, then u32 byte length + UTF-8 per entry), `PART` (one byte per
//! word, 1 = specific; entropy variant only), `DCOL` (u32 per document),
//! `DOFF` (u64 token offsets, D + 1 entries), `ZASN` (u32 per token),
//! `XASN` (u8 per token), the count tables `NDZ_`, `NPHI`, `NPHT`, `NSIG`,
//! `NSGT`, `NNOX` (u32 arrays), and the averaged estimates `ETHE`, `EPHI`,
//! `ESIG`, `EXPR` (f64 arrays). All integers and floats are little endian.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::model::{Estimates, Hyperparameters, ModelState, Support, TrainedModel, Variant};
use crate::termhood::VocabularyPartition;

pub const MAGIC: &[u8; 8] = b"CCTMMODL";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 8 + 32;

#[derive(Debug, Serialize, Deserialize)]
struct Meta {
    variant: Variant,
    hyper: Hyperparameters,
    collections: usize,
    vocab_size: usize,
    documents: usize,
    tokens: usize,
    threshold: Option<f64>,
    gamma: Option<f64>,
    config: Option<String>,
}

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn section(&mut self, tag: &[u8; 4], body: Vec<u8>) {
        self.buf.extend_from_slice(tag);
        self.buf.extend_from_slice(&(body.len() as u64).to_le_bytes());
        self.buf.extend(body);
    }
}

fn encode_u32(v: &[u32]) -> Vec<u8> {
    v.iter().flat_map(|x| x.to_le_bytes()).collect()
}

fn encode_u64(v: &[usize]) -> Vec<u8> {
    v.iter().flat_map(|&x| (x as u64).to_le_bytes()).collect()
}

fn encode_f64(v: &[f64]) -> Vec<u8> {
    v.iter().flat_map(|x| x.to_le_bytes()).collect()
}

fn encode_strings(v: &[String]) -> Vec<u8> {
    let mut out = (v.len() as u32).to_le_bytes().to_vec();
    for s in v {
        out.extend_from_slice(&(s.len() as u32).to_le_bytes());
        out.extend_from_slice(s.as_bytes());
    }
    out
}

pub fn to_bytes(model: &TrainedModel) -> Vec<u8> {
    let s = &model.state;
    let meta = Meta {
        variant: s.variant,
        hyper: s.hyper.clone(),
        collections: s.collections,
        vocab_size: s.vocab_size(),
        documents: s.num_documents(),
        tokens: s.num_tokens(),
        threshold: s.partition.as_ref().map(|p| p.threshold),
        gamma: s.partition.as_ref().map(|p| p.gamma),
        config: model.config.clone(),
    };
    let mut w = Writer { buf: Vec::new() };
    w.section(b"META", serde_json::to_vec(&meta).expect("metadata serializes"));
    w.section(b"VOCB", encode_strings(model.vocabulary.words()));
    w.section(b"COLL", encode_strings(&model.collections));
    if let Some(p) = &s.partition {
        w.section(b"PART", p.flags().iter().map(|&f| f as u8).collect());
    }
    w.section(b"DCOL", encode_u32(&s.doc_collection));
    w.section(b"DOFF", encode_u64(&s.doc_offset));
    w.section(b"ZASN", encode_u32(&s.z));
    w.section(b"XASN", s.x.iter().map(|&x| x as u8).collect());
    w.section(b"NDZ_", encode_u32(&s.n_dz));
    w.section(b"NPHI", encode_u32(&s.n_phi));
    w.section(b"NPHT", encode_u32(&s.n_phi_total));
    w.section(b"NSIG", encode_u32(&s.n_sigma));
    w.section(b"NSGT", encode_u32(&s.n_sigma_total));
    w.section(b"NNOX", encode_u32(&s.n_notx));
    let e = &model.estimates;
    w.section(b"ETHE", encode_f64(&e.theta));
    w.section(b"EPHI", encode_f64(&e.phi));
    w.section(b"ESIG", encode_f64(&e.sigma));
    w.section(b"EXPR", encode_f64(&e.x_prob));

    let payload = w.buf;
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    out.extend_from_slice(&Sha256::digest(&payload)[..]);
    out.extend(payload);
    out
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidModelFile(msg.into())
}

struct Sections<'a> {
    map: HashMap<[u8; 4], &'a [u8]>,
}

impl<'a> Sections<'a> {
    fn parse(mut payload: &'a [u8]) -> Result<Self> {
        let mut map = HashMap::new();
        while !payload.is_empty() {
            if payload.len() < 12 {
                return Err(Error::Truncated);
            }
            let tag: [u8; 4] = payload[..4].try_into().unwrap();
            let len = u64::from_le_bytes(payload[4..12].try_into().unwrap()) as usize;
            let body = payload.get(12..12 + len).ok_or(Error::Truncated)?;
            map.insert(tag, body);
            payload = &payload[12 + len..];
        }
        Ok(Self { map })
    }

    fn get(&self, tag: &[u8; 4]) -> Result<&'a [u8]> {
        self.map
            .get(tag)
            .copied()
            .ok_or_else(|| invalid(format!("missing section {}", String::from_utf8_lossy(tag))))
    }

    fn u32s(&self, tag: &[u8; 4], expected: usize) -> Result<Vec<u32>> {
        let body = self.get(tag)?;
        if body.len() != expected * 4 {
            return Err(invalid(format!("section {} has the wrong size", String::from_utf8_lossy(tag))));
        }
        Ok(body.chunks_exact(4).map(|b| u32::from_le_bytes(b.try_into().unwrap())).collect())
    }

    fn u64s(&self, tag: &[u8; 4], expected: usize) -> Result<Vec<usize>> {
        let body = self.get(tag)?;
        if body.len() != expected * 8 {
            return Err(invalid(format!("section {} has the wrong size", String::from_utf8_lossy(tag))));
        }
        Ok(body.chunks_exact(8).map(|b| u64::from_le_bytes(b.try_into().unwrap()) as usize).collect())
    }

    fn f64s(&self, tag: &[u8; 4], expected: usize) -> Result<Vec<f64>> {
        let body = self.get(tag)?;
        if body.len() != expected * 8 {
            return Err(invalid(format!("section {} has the wrong size", String::from_utf8_lossy(tag))));
        }
        Ok(body.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().unwrap())).collect())
    }

    fn bytes(&self, tag: &[u8; 4], expected: usize) -> Result<&'a [u8]> {
        let body = self.get(tag)?;
        if body.len() != expected {
            return Err(invalid(format!("section {} has the wrong size", String::from_utf8_lossy(tag))));
        }
        Ok(body)
    }

    fn strings(&self, tag: &[u8; 4]) -> Result<Vec<String>> {
        let body = self.get(tag)?;
        let read_u32 = |b: &[u8], at: usize| -> Result<usize> {
            b.get(at..at + 4)
                .map(|s| u32::from_le_bytes(s.try_into().unwrap()) as usize)
                .ok_or(Error::Truncated)
        };
        let n = read_u32(body, 0)?;
        let mut at = 4;
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let len = read_u32(body, at)?;
            let bytes = body.get(at + 4..at + 4 + len).ok_or(Error::Truncated)?;
            out.push(String::from_utf8(bytes.to_vec()).map_err(|_| invalid("string is not UTF-8"))?);
            at += 4 + len;
        }
        Ok(out)
    }
}

pub fn from_bytes(data: &[u8]) -> Result<TrainedModel> {
    if data.len() < 12 {
        return Err(Error::Truncated);
    }
    if &data[..8] != MAGIC {
        return Err(invalid("bad magic number"));
    }
    let version = u32::from_le_bytes(data[8..12].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion {
            found: version,
            supported: FORMAT_VERSION,
        });
    }
    if data.len() < HEADER_LEN {
        return Err(Error::Truncated);
    }
    let len = u64::from_le_bytes(data[12..20].try_into().unwrap()) as usize;
    let payload = &data[HEADER_LEN..];
    if payload.len() < len {
        return Err(Error::Truncated);
    }
    if payload.len() > len {
        return Err(invalid("trailing bytes after payload"));
    }
    if Sha256::digest(payload)[..] != data[20..HEADER_LEN] {
        return Err(Error::Checksum);
    }

    let sec = Sections::parse(payload)?;
    let meta: Meta = serde_json::from_slice(sec.get(b"META")?).map_err(|e| invalid(format!("metadata: {e}")))?;
    meta.hyper.validate()?;
    let t = meta.hyper.topics;
    let c = meta.collections;
    let v = meta.vocab_size;

    let vocabulary = Vocabulary::from_words(sec.strings(b"VOCB")?)?;
    let collections = sec.strings(b"COLL")?;
    if vocabulary.len() != v || collections.len() != c {
        return Err(invalid("dimensions disagree with the vocabulary or collection list"));
    }

    let partition = match meta.variant {
        Variant::Entropy => {
            let flags = sec.bytes(b"PART", v)?.iter().map(|&b| b != 0).collect();
            let threshold = meta.threshold.ok_or_else(|| invalid("missing partition threshold"))?;
            let gamma = meta.gamma.ok_or_else(|| invalid("missing γ"))?;
            Some(VocabularyPartition::from_flags(threshold, flags, gamma))
        }
        Variant::CcLda => None,
    };
    let (phi_support, sigma_support) = match &partition {
        Some(p) => (Support::from_flags(p.flags(), false), Support::from_flags(p.flags(), true)),
        None => (Support::full(v), Support::full(v)),
    };
    let (vp, vs) = (phi_support.size(), sigma_support.size());
    let d = meta.documents;
    let m = meta.tokens;

    let state = ModelState {
        variant: meta.variant,
        hyper: meta.hyper.clone(),
        partition,
        collections: c,
        doc_collection: sec.u32s(b"DCOL", d)?,
        doc_offset: sec.u64s(b"DOFF", d + 1)?,
        z: sec.u32s(b"ZASN", m)?,
        x: sec.bytes(b"XASN", m)?.iter().map(|&b| b != 0).collect(),
        n_dz: sec.u32s(b"NDZ_", d * t)?,
        n_phi: sec.u32s(b"NPHI", vp * t)?,
        n_phi_total: sec.u32s(b"NPHT", t)?,
        n_sigma: sec.u32s(b"NSIG", c * vs * t)?,
        n_sigma_total: sec.u32s(b"NSGT", c * t)?,
        n_notx: sec.u32s(b"NNOX", c * t)?,
        phi_support: phi_support.clone(),
        sigma_support: sigma_support.clone(),
    };
    let estimates = Estimates {
        topics: t,
        collections: c,
        theta: sec.f64s(b"ETHE", d * t)?,
        phi: sec.f64s(b"EPHI", vp * t)?,
        sigma: sec.f64s(b"ESIG", c * vs * t)?,
        x_prob: sec.f64s(b"EXPR", c * t)?,
        phi_support,
        sigma_support,
    };
    Ok(TrainedModel {
        state,
        estimates,
        vocabulary,
        collections,
        trace: Vec::new(),
        config: meta.config,
    })
}

pub fn save_model(model: &TrainedModel, path: &Path) -> Result<()> {
    std::fs::write(path, to_bytes(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<TrainedModel> {
    let data = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    from_bytes(&data)
}
