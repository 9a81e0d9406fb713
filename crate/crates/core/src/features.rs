//! Handcrafted token features, windowing, and the attribute index.
//!
//! Attribute names are part of the model file format; changing how a name is
//! spelled invalidates saved models.

use alloc::borrow::ToOwned;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use hashbrown::HashMap;

use crate::corpus::{Corpus, Headline};
use crate::embeddings::EmbeddingTable;
use crate::errors::{Error, Result};

/// A feature family: one switch in the feature configuration and one row of
/// an ablation table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Bias,
    Token,
    Uppercase,
    Titlecase,
    CharTrigram,
    Quotation,
    Suffix3,
    Pos,
    Shape,
    Embedding,
}

impl Family {
    pub const ALL: [Family; 10] = [
        Family::Bias,
        Family::Token,
        Family::Uppercase,
        Family::Titlecase,
        Family::CharTrigram,
        Family::Quotation,
        Family::Suffix3,
        Family::Pos,
        Family::Shape,
        Family::Embedding,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Bias => "bias",
            Self::Token => "token",
            Self::Uppercase => "uppercase",
            Self::Titlecase => "titlecase",
            Self::CharTrigram => "char_trigram",
            Self::Quotation => "quotation",
            Self::Suffix3 => "suffix3",
            Self::Pos => "pos",
            Self::Shape => "shape",
            Self::Embedding => "embedding",
        }
    }

    fn bit(self) -> u16 {
        1 << (self as u16)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown feature family {s:?}")))
    }
}

/// Set of enabled feature families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FamilySet(u16);

impl FamilySet {
    pub const fn empty() -> Self {
        Self(0)
    }

    pub fn all() -> Self {
        Family::ALL.into_iter().collect()
    }

    pub fn contains(self, family: Family) -> bool {
        self.0 & family.bit() != 0
    }

    pub fn insert(&mut self, family: Family) {
        self.0 |= family.bit();
    }

    pub fn remove(&mut self, family: Family) {
        self.0 &= !family.bit();
    }

    pub fn without(mut self, family: Family) -> Self {
        self.remove(family);
        self
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Enabled families in canonical order.
    pub fn iter(self) -> impl Iterator<Item = Family> {
        Family::ALL.into_iter().filter(move |f| self.contains(*f))
    }
}

impl FromIterator<Family> for FamilySet {
    fn from_iter<I: IntoIterator<Item = Family>>(iter: I) -> Self {
        let mut set = Self::empty();
        for f in iter {
            set.insert(f);
        }
        set
    }
}

/// Which families to extract and how.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureConfig {
    pub families: FamilySet,
    pub window_radius: usize,
    pub embedding_scaling: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            families: FamilySet::all(),
            window_radius: 2,
            embedding_scaling: 1.0,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.families.is_empty() {
            return Err(Error::InvalidConfig("no feature family enabled".into()));
        }
        if !(self.embedding_scaling.is_finite() && self.embedding_scaling > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "embedding scaling must be positive, got {}",
                self.embedding_scaling
            )));
        }
        Ok(())
    }

    pub fn uses_embeddings(&self) -> bool {
        self.families.contains(Family::Embedding)
    }
}

/// Named real-valued attributes of one token position, in emission order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AttributeVector {
    items: Vec<(String, f64)>,
}

impl AttributeVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: impl Into<String>, value: f64) {
        self.items.push((name.into(), value));
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.items.iter().map(|(n, v)| (n.as_str(), *v))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.items.iter().map(|(n, _)| n.as_str())
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.items.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.get(name).is_some()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Character-class abstraction: `X` upper, `x` lower, `d` digit, anything
/// else verbatim; runs of the same symbol are cut at four.
pub fn word_shape(text: &str) -> String {
    let mut shape = String::with_capacity(text.len());
    let mut last = None;
    let mut run = 0;
    for c in text.chars() {
        let s = if c.is_uppercase() {
            'X'
        } else if c.is_lowercase() {
            'x'
        } else if c.is_numeric() {
            'd'
        } else {
            c
        };
        if Some(s) == last {
            run += 1;
        } else {
            last = Some(s);
            run = 1;
        }
        if run <= 4 {
            shape.push(s);
        }
    }
    shape
}

/// Three-character windows of the token padded with `^` and `$`.
pub fn char_trigrams(text: &str) -> Vec<String> {
    let padded: Vec<char> = core::iter::once('^')
        .chain(text.chars())
        .chain(core::iter::once('$'))
        .collect();
    padded.windows(3).map(|w| w.iter().collect()).collect()
}

fn closing_quote(text: &str) -> Option<&'static str> {
    match text {
        "'" => Some("'"),
        "\"" => Some("\""),
        "“" => Some("”"),
        "«" => Some("»"),
        "‘" => Some("’"),
        _ => None,
    }
}

fn is_quote(text: &str) -> bool {
    matches!(text, "'" | "\"" | "“" | "”" | "«" | "»" | "‘" | "’")
}

/// For each token, whether it sits strictly inside a quoted stretch.
///
/// An unmatched opening quote runs to the end of the headline. Quote tokens
/// are never flagged themselves.
pub fn quotation_flags(headline: &Headline) -> Vec<bool> {
    let mut flags = Vec::with_capacity(headline.tokens.len());
    let mut closer: Option<&'static str> = None;
    for token in &headline.tokens {
        let text = token.text.as_str();
        match closer {
            Some(c) if text == c => {
                closer = None;
                flags.push(false);
            }
            Some(_) => flags.push(!is_quote(text)),
            None => {
                closer = closing_quote(text);
                flags.push(false);
            }
        }
    }
    flags
}

pub fn quotation_flag(headline: &Headline, t: usize) -> bool {
    quotation_flags(headline)[t]
}

fn is_all_upper(text: &str) -> bool {
    text.chars().any(char::is_alphabetic) && !text.chars().any(char::is_lowercase)
}

fn is_title(text: &str) -> bool {
    let mut chars = text.chars();
    chars.next().is_some_and(char::is_uppercase) && !chars.any(char::is_uppercase)
}

fn suffix3(text: &str) -> &str {
    match text.char_indices().rev().nth(2) {
        Some((i, _)) => &text[i..],
        None => text,
    }
}

/// Which family emitted an attribute, judging by its name. Window boundary
/// markers belong to no family.
pub fn attribute_family(name: &str) -> Option<Family> {
    let base = match name.strip_prefix('[') {
        Some(rest) => &rest[rest.find(']')? + 1..],
        None => name,
    };
    let family = if base == "bias" {
        Family::Bias
    } else if base.starts_with("w=") {
        Family::Token
    } else if base.starts_with("upper=") {
        Family::Uppercase
    } else if base.starts_with("title=") {
        Family::Titlecase
    } else if base.starts_with("tri=") {
        Family::CharTrigram
    } else if base.starts_with("quot=") {
        Family::Quotation
    } else if base.starts_with("suf3=") {
        Family::Suffix3
    } else if base.starts_with("pos=") {
        Family::Pos
    } else if base.starts_with("shape=") {
        Family::Shape
    } else if base.starts_with("emb") {
        Family::Embedding
    } else {
        return None;
    };
    Some(family)
}

fn check_embeddings<'a>(
    config: &FeatureConfig,
    embeddings: Option<&'a EmbeddingTable>,
) -> Result<Option<&'a EmbeddingTable>> {
    config.validate()?;
    match (config.uses_embeddings(), embeddings) {
        (true, None) => Err(Error::MissingEmbeddings),
        (true, table) => Ok(table),
        (false, _) => Ok(None),
    }
}

fn token_attributes(
    headline: &Headline,
    t: usize,
    quoted: bool,
    config: &FeatureConfig,
    embeddings: Option<&EmbeddingTable>,
    out: &mut AttributeVector,
    prefix: &str,
) {
    let token = &headline.tokens[t];
    let text = token.text.as_str();
    let families = config.families;
    if families.contains(Family::Bias) {
        out.push(format!("{prefix}bias"), 1.0);
    }
    if families.contains(Family::Token) {
        out.push(format!("{prefix}w={text}"), 1.0);
    }
    if families.contains(Family::Uppercase) && is_all_upper(text) {
        out.push(format!("{prefix}upper=1"), 1.0);
    }
    if families.contains(Family::Titlecase) && is_title(text) {
        out.push(format!("{prefix}title=1"), 1.0);
    }
    if families.contains(Family::CharTrigram) {
        let mut seen: Vec<String> = Vec::new();
        for g in char_trigrams(text) {
            if !seen.contains(&g) {
                out.push(format!("{prefix}tri={g}"), 1.0);
                seen.push(g);
            }
        }
    }
    if families.contains(Family::Quotation) && quoted {
        out.push(format!("{prefix}quot=1"), 1.0);
    }
    if families.contains(Family::Suffix3) {
        out.push(format!("{prefix}suf3={}", suffix3(text)), 1.0);
    }
    if families.contains(Family::Pos) {
        if let Some(pos) = &token.pos {
            out.push(format!("{prefix}pos={pos}"), 1.0);
        }
    }
    if families.contains(Family::Shape) {
        out.push(format!("{prefix}shape={}", word_shape(text)), 1.0);
    }
    if let Some(table) = embeddings {
        let scaling = config.embedding_scaling;
        for (i, v) in table.lookup(text).iter().enumerate() {
            out.push(format!("{prefix}emb{i}"), v * scaling);
        }
    }
}

/// Unprefixed attributes of token `t` alone.
pub fn extract_token_attributes(
    headline: &Headline,
    t: usize,
    config: &FeatureConfig,
    embeddings: Option<&EmbeddingTable>,
) -> Result<AttributeVector> {
    let embeddings = check_embeddings(config, embeddings)?;
    if t >= headline.tokens.len() {
        return Err(Error::LengthMismatch {
            expected: headline.tokens.len(),
            found: t,
        });
    }
    let mut out = AttributeVector::new();
    let quoted = quotation_flag(headline, t);
    token_attributes(headline, t, quoted, config, embeddings, &mut out, "");
    Ok(out)
}

fn offset_prefix(offset: isize) -> String {
    if offset > 0 {
        format!("[+{offset}]")
    } else {
        format!("[{offset}]")
    }
}

/// One attribute vector per position, covering offsets `-r..=r`.
///
/// Names carry an offset prefix such as `[-1]w=big`. Offsets outside the
/// headline contribute a single `[o]BOS` or `[o]EOS`. Embedding dimensions
/// are emitted only at offset 0.
pub fn windowed_attributes(
    headline: &Headline,
    config: &FeatureConfig,
    embeddings: Option<&EmbeddingTable>,
) -> Result<Vec<AttributeVector>> {
    let embeddings = check_embeddings(config, embeddings)?;
    let n = headline.tokens.len();
    let radius = config.window_radius as isize;
    let quoted = quotation_flags(headline);
    let prefixes: Vec<String> = (-radius..=radius).map(offset_prefix).collect();
    let mut out = Vec::with_capacity(n);
    for t in 0..n {
        let mut attrs = AttributeVector::new();
        for (offset, prefix) in (-radius..=radius).zip(&prefixes) {
            let u = t as isize + offset;
            if u < 0 {
                attrs.push(format!("{prefix}BOS"), 1.0);
            } else if u >= n as isize {
                attrs.push(format!("{prefix}EOS"), 1.0);
            } else {
                let u = u as usize;
                let table = if offset == 0 { embeddings } else { None };
                token_attributes(headline, u, quoted[u], config, table, &mut attrs, prefix);
            }
        }
        out.push(attrs);
    }
    Ok(out)
}

/// Dense bidirectional mapping between attribute names and ids.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureIndex {
    names: Vec<String>,
    ids: HashMap<String, u32>,
    frozen: bool,
}

impl FeatureIndex {
    pub fn new() -> Self {
        Self::default()
    }

    /// A frozen index over `names`, whose positions become the ids.
    pub fn from_names(names: Vec<String>) -> Result<Self> {
        let mut ids = HashMap::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            if ids.insert(name.clone(), i as u32).is_some() {
                return Err(Error::InvalidConfig(format!(
                    "attribute {name:?} listed twice"
                )));
            }
        }
        Ok(Self {
            names,
            ids,
            frozen: true,
        })
    }

    /// Id of `name`, assigning the next one if the index is not frozen.
    pub fn insert(&mut self, name: &str) -> Option<u32> {
        if let Some(&id) = self.ids.get(name) {
            return Some(id);
        }
        if self.frozen {
            return None;
        }
        let id = self.names.len() as u32;
        self.names.push(name.to_owned());
        self.ids.insert(name.to_owned(), id);
        Some(id)
    }

    pub fn get(&self, name: &str) -> Option<u32> {
        self.ids.get(name).copied()
    }

    pub fn name(&self, id: u32) -> Option<&str> {
        self.names.get(id as usize).map(String::as_str)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// Indexes every attribute name seen over `corpus` in first-seen order and
/// freezes the result.
pub fn build_index(
    corpus: &Corpus,
    config: &FeatureConfig,
    embeddings: Option<&EmbeddingTable>,
) -> Result<FeatureIndex> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut index = FeatureIndex::new();
    for headline in corpus.headlines() {
        for attrs in windowed_attributes(headline, config, embeddings)? {
            for name in attrs.names() {
                index.insert(name);
            }
        }
    }
    index.freeze();
    Ok(index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Token;
    use alloc::vec;

    fn headline(words: &[&str]) -> Headline {
        let tokens = words.iter().map(|w| Token::new(*w).unwrap()).collect();
        Headline::new("h", tokens, vec![]).unwrap()
    }

    fn binary_config() -> FeatureConfig {
        FeatureConfig {
            families: FamilySet::all().without(Family::Embedding),
            window_radius: 2,
            embedding_scaling: 1.0,
        }
    }

    #[test]
    fn shapes() {
        assert_eq!(word_shape("Netflix"), "Xxxxx");
        assert_eq!(word_shape("2020"), "dddd");
        assert_eq!(word_shape("e-commerce"), "x-xxxx");
        assert_eq!(word_shape("DJ"), "XX");
        assert_eq!(word_shape("!!!!!!"), "!!!!");
    }

    #[test]
    fn trigrams() {
        assert_eq!(char_trigrams("big"), ["^bi", "big", "ig$"]);
        assert_eq!(char_trigrams("a"), ["^a$"]);
        assert_eq!(char_trigrams("data"), ["^da", "dat", "ata", "ta$"]);
        assert_eq!(char_trigrams("ñú"), ["^ñú", "ñú$"]);
    }

    #[test]
    fn quotation() {
        assert_eq!(
            quotation_flags(&headline(&["'", "big", "data", "'"])),
            [false, true, true, false]
        );
        assert_eq!(quotation_flags(&headline(&["no", "quotes"])), [false, false]);
        assert_eq!(
            quotation_flags(&headline(&["«", "fake", "news"])),
            [false, true, true]
        );
        assert_eq!(
            quotation_flags(&headline(&["“", "a", "”", "b", "«", "c", "»"])),
            [false, true, false, false, false, true, false]
        );
    }

    #[test]
    fn token_attributes_streaming() {
        let h = headline(&["streaming"]);
        let attrs = extract_token_attributes(&h, 0, &binary_config(), None).unwrap();
        for name in ["bias", "w=streaming", "suf3=ing", "shape=xxxx", "tri=^st", "tri=ng$"] {
            assert!(attrs.contains(name), "{name}");
        }
        assert!(!attrs.contains("title=1"));
        assert!(!attrs.contains("upper=1"));
        assert!(!attrs.contains("quot=1"));
    }

    #[test]
    fn upper_and_title() {
        let h = headline(&["DJ", "Netflix", "iPhone", "2020", "A"]);
        let c = binary_config();
        let get = |t| extract_token_attributes(&h, t, &c, None).unwrap();
        assert!(get(0).contains("upper=1") && !get(0).contains("title=1"));
        assert!(get(1).contains("title=1") && !get(1).contains("upper=1"));
        assert!(!get(2).contains("title=1") && !get(2).contains("upper=1"));
        assert!(!get(3).contains("upper=1"));
        assert!(get(4).contains("upper=1") && get(4).contains("title=1"));
        assert!(get(0).contains("suf3=DJ"));
    }

    #[test]
    fn repeated_trigrams_are_unique() {
        let h = headline(&["aaaa"]);
        let attrs = extract_token_attributes(&h, 0, &binary_config(), None).unwrap();
        let tri: Vec<_> = attrs.names().filter(|n| n.starts_with("tri=")).collect();
        assert_eq!(tri, ["tri=^aa", "tri=aaa", "tri=aa$"]);
    }

    #[test]
    fn embedding_scaling() {
        let mut table = EmbeddingTable::new("t", 2).unwrap();
        table.insert("Boom", vec![0.2, -0.4]).unwrap();
        let config = FeatureConfig {
            families: [Family::Embedding].into_iter().collect(),
            window_radius: 2,
            embedding_scaling: 0.5,
        };
        let h = headline(&["Boom"]);
        let attrs = extract_token_attributes(&h, 0, &config, Some(&table)).unwrap();
        assert_eq!(attrs.get("emb0"), Some(0.1));
        assert_eq!(attrs.get("emb1"), Some(-0.2));
        assert_eq!(
            extract_token_attributes(&h, 0, &config, None).unwrap_err(),
            Error::MissingEmbeddings
        );
    }

    #[test]
    fn window_boundaries() {
        let h = headline(&["solo"]);
        let attrs = windowed_attributes(&h, &binary_config(), None).unwrap();
        for name in ["[-2]BOS", "[-1]BOS", "[0]w=solo", "[+1]EOS", "[+2]EOS"] {
            assert!(attrs[0].contains(name), "{name}");
        }

        let h = headline(&["a", "big", "data"]);
        let attrs = windowed_attributes(&h, &binary_config(), None).unwrap();
        assert!(attrs[1].contains("[-1]w=a"));
        assert!(attrs[1].contains("[+1]w=data"));
        assert!(attrs[1].contains("[+2]EOS"));
    }

    #[test]
    fn zero_radius_is_prefixed_token_extraction() {
        let h = headline(&["El", "'", "big", "data", "'"]);
        let config = FeatureConfig {
            window_radius: 0,
            ..binary_config()
        };
        let windowed = windowed_attributes(&h, &config, None).unwrap();
        for (t, w) in windowed.iter().enumerate() {
            let single = extract_token_attributes(&h, t, &config, None).unwrap();
            let expected: Vec<_> = single.iter().map(|(n, v)| (format!("[0]{n}"), v)).collect();
            let got: Vec<_> = w.iter().map(|(n, v)| (n.to_owned(), v)).collect();
            assert_eq!(got, expected);
        }
    }

    #[test]
    fn embeddings_only_at_center() {
        let mut table = EmbeddingTable::new("t", 1).unwrap();
        table.insert("a", vec![1.0]).unwrap();
        let h = headline(&["a", "a"]);
        let attrs = windowed_attributes(&h, &FeatureConfig::default(), Some(&table)).unwrap();
        let emb: Vec<_> = attrs[0]
            .names()
            .filter(|n| attribute_family(n) == Some(Family::Embedding))
            .collect();
        assert_eq!(emb, ["[0]emb0"]);
    }

    #[test]
    fn family_of_names() {
        assert_eq!(attribute_family("[-1]w=big"), Some(Family::Token));
        assert_eq!(attribute_family("[+2]tri=^bi"), Some(Family::CharTrigram));
        assert_eq!(attribute_family("[0]emb12"), Some(Family::Embedding));
        assert_eq!(attribute_family("[0]bias"), Some(Family::Bias));
        assert_eq!(attribute_family("[-2]BOS"), None);
        assert_eq!(attribute_family("suf3=ing"), Some(Family::Suffix3));
    }

    #[test]
    fn config_validation() {
        let mut c = FeatureConfig::default();
        c.embedding_scaling = 0.0;
        assert!(c.validate().is_err());
        let c = FeatureConfig {
            families: FamilySet::empty(),
            ..FeatureConfig::default()
        };
        assert!(c.validate().is_err());
        assert_eq!("char_trigram".parse::<Family>().unwrap(), Family::CharTrigram);
        assert!("nope".parse::<Family>().is_err());
    }

    #[test]
    fn index_contract() {
        let h = headline(&["big", "data"]);
        let corpus = Corpus::new("c", vec![h]).unwrap();
        let config = FeatureConfig {
            families: [Family::Bias, Family::Token].into_iter().collect(),
            window_radius: 1,
            embedding_scaling: 1.0,
        };
        let index = build_index(&corpus, &config, None).unwrap();
        // pos 0: [-1]BOS [0]bias [0]w=big [+1]bias [+1]w=data
        // pos 1: [-1]bias [-1]w=big [0]bias [0]w=data [+1]EOS, where [0]bias repeats
        assert_eq!(index.len(), 9);
        assert_eq!(index.name(0), Some("[-1]BOS"));
        assert_eq!(index.get("[-1]bias"), Some(5));
        assert_eq!(index.get("[+1]EOS"), Some(8));
        assert_eq!(build_index(&corpus, &config, None).unwrap(), index);

        let mut frozen = index.clone();
        assert_eq!(frozen.insert("[0]w=zzz"), None);
        assert_eq!(frozen.len(), 9);
        assert!(build_index(&Corpus::empty("e"), &config, None).is_err());
        assert!(FeatureIndex::from_names(vec!["a".into(), "a".into()]).is_err());
    }
}
