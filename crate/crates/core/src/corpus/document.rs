use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use serde::de::{SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::context::StructuralContext;
use super::tokenize::Token;
use super::CorpusError;

/// Term counts at one context.
pub type TermCounts = BTreeMap<Token, u32>;

/// Multiset of `(context, token)` pairs, grouped by context.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Occurrences(BTreeMap<StructuralContext, TermCounts>);

impl Occurrences {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, context: StructuralContext, token: Token, count: u32) {
        if count == 0 {
            return;
        }
        *self.0.entry(context).or_default().entry(token).or_insert(0) += count;
    }

    pub fn add_all(&mut self, context: &StructuralContext, tokens: impl IntoIterator<Item = Token>) {
        let mut tokens = tokens.into_iter().peekable();
        if tokens.peek().is_none() {
            return;
        }
        let bag = self.0.entry(context.clone()).or_default();
        for t in tokens {
            *bag.entry(t).or_insert(0) += 1;
        }
    }

    pub fn contexts(&self) -> impl Iterator<Item = (&StructuralContext, &TermCounts)> {
        self.0.iter()
    }

    pub fn at(&self, context: &StructuralContext) -> Option<&TermCounts> {
        self.0.get(context)
    }

    /// `(context, term, count)` triples in canonical order.
    pub fn triples(&self) -> impl Iterator<Item = (&StructuralContext, &Token, u32)> {
        self.0
            .iter()
            .flat_map(|(c, bag)| bag.iter().map(move |(t, &n)| (c, t, n)))
    }

    /// Token occurrences at `context`.
    pub fn count_at(&self, context: &StructuralContext) -> u64 {
        self.0
            .get(context)
            .map_or(0, |bag| bag.values().map(|&n| u64::from(n)).sum())
    }

    pub fn total(&self) -> u64 {
        self.triples().map(|(_, _, n)| u64::from(n)).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Re-keys every context through `f`, merging bags that land on the same
    /// key and dropping contexts mapped to `None`.
    pub fn remap<F>(&self, mut f: F) -> Occurrences
    where
        F: FnMut(&StructuralContext) -> Option<StructuralContext>,
    {
        let mut out = Occurrences::new();
        for (ctx, bag) in &self.0 {
            if let Some(target) = f(ctx) {
                let dst = out.0.entry(target).or_default();
                for (t, &n) in bag {
                    *dst.entry(t.clone()).or_insert(0) += n;
                }
            }
        }
        out
    }

    pub fn retain_contexts<F: FnMut(&StructuralContext) -> bool>(&mut self, mut keep: F) {
        self.0.retain(|c, _| keep(c));
    }
}

impl Serialize for Occurrences {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(None)?;
        for (c, t, n) in self.triples() {
            seq.serialize_element(&(c, t, n))?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for Occurrences {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct Triples;

        impl<'de> Visitor<'de> for Triples {
            type Value = Occurrences;

            fn expecting(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str("an array of [context, term, count] triples")
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Occurrences, A::Error> {
                let mut out = Occurrences::new();
                while let Some((c, t, n)) = seq.next_element::<(StructuralContext, Token, u32)>()? {
                    if n == 0 {
                        return Err(serde::de::Error::custom("occurrence count must be positive"));
                    }
                    out.add(c, t, n);
                }
                Ok(out)
            }
        }

        d.deserialize_seq(Triples)
    }
}

/// A document reduced to labeled bags of `(context, token)` pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextualizedDocument {
    pub doc_id: String,
    pub labels: BTreeSet<String>,
    pub occurrences: Occurrences,
    #[serde(default)]
    pub split_tag: Option<String>,
}

impl ContextualizedDocument {
    pub fn new(doc_id: impl Into<String>, labels: impl IntoIterator<Item = impl Into<String>>) -> Self {
        ContextualizedDocument {
            doc_id: doc_id.into(),
            labels: labels.into_iter().map(Into::into).collect(),
            occurrences: Occurrences::new(),
            split_tag: None,
        }
    }

    /// Builder-style helper, mostly for fixtures.
    pub fn with(mut self, context: &str, term: &str, count: u32) -> Self {
        let ctx = StructuralContext::parse(context).expect("valid context");
        let token = Token::new(term).expect("valid token");
        self.occurrences.add(ctx, token, count);
        self
    }
}

/// Writes one JSON object per line.
pub fn write_ndjson<W: Write>(docs: &[ContextualizedDocument], mut out: W) -> std::io::Result<()> {
    for doc in docs {
        serde_json::to_writer(&mut out, doc)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn read_ndjson<R: BufRead>(input: R) -> Result<Vec<ContextualizedDocument>, CorpusError> {
    let mut docs = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| CorpusError::Dump {
            line: i + 1,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let doc = serde_json::from_str(&line).map_err(|e| CorpusError::Dump {
            line: i + 1,
            message: e.to_string(),
        })?;
        docs.push(doc);
    }
    Ok(docs)
}
