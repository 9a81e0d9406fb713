//! Headlines, labeled spans, the BIO codec, tokenization and corpus statistics.

use alloc::borrow::ToOwned;
use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use hashbrown::HashSet;

use crate::errors::{Error, Result};

/// Borrowing label of a span.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    /// Borrowing from English.
    Eng,
    /// Borrowing from any other donor language.
    Other,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Eng, Label::Other];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Eng => "ENG",
            Self::Other => "OTHER",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ENG" => Ok(Self::Eng),
            "OTHER" => Ok(Self::Other),
            _ => Err(Error::UnknownTag(s.to_owned())),
        }
    }
}

/// A BIO tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tag {
    Outside,
    Begin(Label),
    Inside(Label),
}

impl Tag {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Outside => "O",
            Self::Begin(Label::Eng) => "B-ENG",
            Self::Inside(Label::Eng) => "I-ENG",
            Self::Begin(Label::Other) => "B-OTHER",
            Self::Inside(Label::Other) => "I-OTHER",
        }
    }

    pub fn label(self) -> Option<Label> {
        match self {
            Self::Outside => None,
            Self::Begin(l) | Self::Inside(l) => Some(l),
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Tag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "O" => Ok(Self::Outside),
            "B-ENG" => Ok(Self::Begin(Label::Eng)),
            "I-ENG" => Ok(Self::Inside(Label::Eng)),
            "B-OTHER" => Ok(Self::Begin(Label::Other)),
            "I-OTHER" => Ok(Self::Inside(Label::Other)),
            _ => Err(Error::UnknownTag(s.to_owned())),
        }
    }
}

/// The label set a model is trained and decoded with.
///
/// `O` is always index 0 and the order is fixed, so index-based tie-breaking
/// is reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TagAlphabet {
    /// `O, B-ENG, I-ENG, B-OTHER, I-OTHER`
    Full,
    /// `O, B-ENG, I-ENG`; OTHER spans are treated as outside.
    IgnoreOther,
}

const FULL_TAGS: [Tag; 5] = [
    Tag::Outside,
    Tag::Begin(Label::Eng),
    Tag::Inside(Label::Eng),
    Tag::Begin(Label::Other),
    Tag::Inside(Label::Other),
];

impl TagAlphabet {
    pub fn tags(self) -> &'static [Tag] {
        match self {
            Self::Full => &FULL_TAGS,
            Self::IgnoreOther => &FULL_TAGS[..3],
        }
    }

    pub fn len(self) -> usize {
        self.tags().len()
    }

    pub fn is_empty(self) -> bool {
        false
    }

    pub fn index_of(self, tag: Tag) -> Option<usize> {
        self.tags().iter().position(|&t| t == tag)
    }

    pub fn tag(self, index: usize) -> Tag {
        self.tags()[index]
    }

    /// Whether spans with this label survive in this view.
    pub fn keeps(self, label: Label) -> bool {
        match self {
            Self::Full => true,
            Self::IgnoreOther => label == Label::Eng,
        }
    }

    /// Recovers the alphabet from its ordered tag list.
    pub fn from_tags(tags: &[Tag]) -> Option<Self> {
        [Self::Full, Self::IgnoreOther]
            .into_iter()
            .find(|a| a.tags() == tags)
    }
}

fn validate_text(kind: &str, text: &str) -> Result<()> {
    if text.is_empty() {
        return Err(Error::InvalidToken(alloc::format!("empty {kind}")));
    }
    if text.chars().any(char::is_whitespace) {
        return Err(Error::InvalidToken(alloc::format!(
            "{kind} {text:?} contains whitespace"
        )));
    }
    Ok(())
}

/// One token of a headline.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    pub text: String,
    pub pos: Option<String>,
}

impl Token {
    pub fn new(text: impl Into<String>) -> Result<Self> {
        let text = text.into();
        validate_text("token", &text)?;
        Ok(Self { text, pos: None })
    }

    pub fn with_pos(text: impl Into<String>, pos: impl Into<String>) -> Result<Self> {
        let mut token = Self::new(text)?;
        let pos = pos.into();
        validate_text("POS tag", &pos)?;
        token.pos = Some(pos);
        Ok(token)
    }

    pub fn validate(&self) -> Result<()> {
        validate_text("token", &self.text)?;
        if let Some(pos) = &self.pos {
            validate_text("POS tag", pos)?;
        }
        Ok(())
    }
}

/// A half-open token range `[start, end)` carrying a borrowing label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabeledSpan {
    pub start: usize,
    pub end: usize,
    pub label: Label,
}

impl LabeledSpan {
    pub const fn new(start: usize, end: usize, label: Label) -> Self {
        Self { start, end, label }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

/// Checks that spans are in range, non-empty, sorted by start and
/// pairwise non-overlapping.
pub fn validate_spans(spans: &[LabeledSpan], length: usize) -> Result<()> {
    let mut prev_end = 0;
    for &span in spans {
        let reason = if span.start >= span.end {
            Some("start must be smaller than end")
        } else if span.end > length {
            Some("span exceeds sentence length")
        } else if span.start < prev_end {
            Some("span overlaps a previous span or is out of order")
        } else {
            None
        };
        if let Some(reason) = reason {
            return Err(Error::InvalidSpan {
                span,
                length,
                reason,
            });
        }
        prev_end = span.end;
    }
    Ok(())
}

/// One headline: a tokenized sentence with metadata and gold spans.
#[derive(Debug, Clone, PartialEq)]
pub struct Headline {
    pub id: String,
    pub date: Option<String>,
    pub section: Option<String>,
    pub tokens: Vec<Token>,
    pub gold: Vec<LabeledSpan>,
}

impl Headline {
    /// Builds a headline, sorting `gold` by start before validating it.
    pub fn new(id: impl Into<String>, tokens: Vec<Token>, mut gold: Vec<LabeledSpan>) -> Result<Self> {
        gold.sort();
        let headline = Self {
            id: id.into(),
            date: None,
            section: None,
            tokens,
            gold,
        };
        headline.validate()?;
        Ok(headline)
    }

    pub fn validate(&self) -> Result<()> {
        if self.tokens.is_empty() {
            return Err(Error::EmptyHeadline(self.id.clone()));
        }
        for token in &self.tokens {
            token.validate()?;
        }
        validate_spans(&self.gold, self.tokens.len())
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn gold_tags(&self) -> Vec<Tag> {
        // validated at construction
        spans_to_bio(&self.gold, self.tokens.len()).unwrap_or_default()
    }
}

/// An ordered collection of headlines with unique ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    name: String,
    headlines: Vec<Headline>,
}

impl Corpus {
    pub fn new(name: impl Into<String>, headlines: Vec<Headline>) -> Result<Self> {
        {
            let mut seen = HashSet::with_capacity(headlines.len());
            for headline in &headlines {
                headline.validate()?;
                if !seen.insert(headline.id.as_str()) {
                    return Err(Error::DuplicateId(headline.id.clone()));
                }
            }
        }
        Ok(Self {
            name: name.into(),
            headlines,
        })
    }

    pub fn empty(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            headlines: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn headlines(&self) -> &[Headline] {
        &self.headlines
    }

    pub fn len(&self) -> usize {
        self.headlines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.headlines.is_empty()
    }

    pub fn into_headlines(self) -> Vec<Headline> {
        self.headlines
    }

    /// Same headlines with gold spans restricted to the labels `alphabet` keeps.
    pub fn restricted_to(&self, alphabet: TagAlphabet) -> Corpus {
        let headlines = self
            .headlines
            .iter()
            .map(|h| Headline {
                gold: h.gold.iter().copied().filter(|s| alphabet.keeps(s.label)).collect(),
                ..h.clone()
            })
            .collect();
        Corpus {
            name: self.name.clone(),
            headlines,
        }
    }

    /// Same headlines with the span lists replaced, e.g. by predictions.
    pub fn with_spans(&self, spans: Vec<Vec<LabeledSpan>>) -> Result<Corpus> {
        if spans.len() != self.headlines.len() {
            return Err(Error::LengthMismatch {
                expected: self.headlines.len(),
                found: spans.len(),
            });
        }
        let headlines = self
            .headlines
            .iter()
            .zip(spans)
            .map(|(h, gold)| Headline::new(h.id.clone(), h.tokens.clone(), gold).map(|n| Headline {
                date: h.date.clone(),
                section: h.section.clone(),
                ..n
            }))
            .collect::<Result<Vec<_>>>()?;
        Ok(Corpus {
            name: self.name.clone(),
            headlines,
        })
    }
}

const PUNCTUATION: &[char] = &[
    '.', ',', ';', ':', '¡', '!', '¿', '?', '«', '»', '“', '”', '"', '\'', '‘', '’', '(', ')',
    '[', ']', '—', '…',
];

fn is_apostrophe(c: char) -> bool {
    matches!(c, '\'' | '’')
}

/// Splits raw text into tokens.
///
/// Whitespace separates tokens. Each punctuation character becomes its own
/// token, except an apostrophe between two alphanumeric characters, which
/// stays inside the word. Hyphens are not punctuation, so `e-commerce` is a
/// single token.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    for chunk in text.split_whitespace() {
        let chars: Vec<char> = chunk.chars().collect();
        let mut word = String::new();
        for (i, &c) in chars.iter().enumerate() {
            let internal_apostrophe = is_apostrophe(c)
                && i > 0
                && chars[i - 1].is_alphanumeric()
                && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric());
            if PUNCTUATION.contains(&c) && !internal_apostrophe {
                if !word.is_empty() {
                    tokens.push(Token {
                        text: core::mem::take(&mut word),
                        pos: None,
                    });
                }
                tokens.push(Token {
                    text: c.to_string(),
                    pos: None,
                });
            } else {
                word.push(c);
            }
        }
        if !word.is_empty() {
            tokens.push(Token {
                text: word,
                pos: None,
            });
        }
    }
    tokens
}

/// Encodes spans as one BIO tag per token.
pub fn spans_to_bio(spans: &[LabeledSpan], length: usize) -> Result<Vec<Tag>> {
    validate_spans(spans, length)?;
    let mut tags = alloc::vec![Tag::Outside; length];
    for span in spans {
        tags[span.start] = Tag::Begin(span.label);
        for tag in &mut tags[span.start + 1..span.end] {
            *tag = Tag::Inside(span.label);
        }
    }
    Ok(tags)
}

/// Rewrites ill-formed BIO: an `I-X` that does not continue a span of
/// label `X` becomes `B-X`.
pub fn repair_bio(tags: &[Tag]) -> Vec<Tag> {
    let mut out = Vec::with_capacity(tags.len());
    let mut current: Option<Label> = None;
    for &tag in tags {
        let fixed = match tag {
            Tag::Inside(l) if current != Some(l) => Tag::Begin(l),
            t => t,
        };
        current = fixed.label();
        out.push(fixed);
    }
    out
}

/// Decodes BIO tags into spans after applying [`repair_bio`].
pub fn bio_to_spans(tags: &[Tag]) -> Vec<LabeledSpan> {
    let mut spans: Vec<LabeledSpan> = Vec::new();
    for (t, tag) in repair_bio(tags).into_iter().enumerate() {
        match tag {
            Tag::Outside => {}
            Tag::Begin(label) => spans.push(LabeledSpan::new(t, t + 1, label)),
            Tag::Inside(_) => {
                if let Some(last) = spans.last_mut() {
                    last.end = t + 1;
                }
            }
        }
    }
    spans
}

/// Parses tag strings, failing on the first one outside the alphabet.
pub fn parse_tags<S: AsRef<str>>(tags: &[S]) -> Result<Vec<Tag>> {
    tags.iter().map(|t| t.as_ref().parse()).collect()
}

/// Per-section share of headlines containing an English borrowing.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionStats {
    pub section: String,
    pub headlines: usize,
    pub with_anglicisms: usize,
}

impl SectionStats {
    pub fn percentage(&self) -> f64 {
        if self.headlines == 0 {
            0.0
        } else {
            100.0 * self.with_anglicisms as f64 / self.headlines as f64
        }
    }
}

/// Counts describing a corpus.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorpusStats {
    pub headlines: usize,
    pub tokens: usize,
    /// Headlines with at least one ENG span.
    pub headlines_with_anglicisms: usize,
    /// Headlines with at least one span of any label.
    pub headlines_with_borrowings: usize,
    pub eng: usize,
    pub other: usize,
    /// Sorted by section name; headlines without a section are not counted.
    pub sections: Vec<SectionStats>,
}

pub fn corpus_stats(corpus: &Corpus) -> CorpusStats {
    let mut stats = CorpusStats::default();
    let mut sections: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for h in corpus.headlines() {
        let eng = h.gold.iter().filter(|s| s.label == Label::Eng).count();
        stats.headlines += 1;
        stats.tokens += h.tokens.len();
        stats.eng += eng;
        stats.other += h.gold.len() - eng;
        stats.headlines_with_anglicisms += usize::from(eng > 0);
        stats.headlines_with_borrowings += usize::from(!h.gold.is_empty());
        if let Some(section) = &h.section {
            let entry = sections.entry(section.as_str()).or_default();
            entry.0 += 1;
            entry.1 += usize::from(eng > 0);
        }
    }
    stats.sections = sections
        .into_iter()
        .map(|(section, (headlines, with_anglicisms))| SectionStats {
            section: section.to_owned(),
            headlines,
            with_anglicisms,
        })
        .collect();
    stats
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn texts(tokens: &[Token]) -> Vec<&str> {
        tokens.iter().map(|t| t.text.as_str()).collect()
    }

    fn tags(s: &str) -> Vec<Tag> {
        parse_tags(&s.split_whitespace().collect::<Vec<_>>()).unwrap()
    }

    fn headline(id: &str, words: &str, gold: Vec<LabeledSpan>) -> Headline {
        let tokens = words.split(' ').map(|w| Token::new(w).unwrap()).collect();
        Headline::new(id, tokens, gold).unwrap()
    }

    #[test]
    fn tokenize_splits_quotes() {
        assert_eq!(
            texts(&tokenize("El 'big data' llega")),
            ["El", "'", "big", "data", "'", "llega"]
        );
        assert_eq!(texts(&tokenize("¿Fake news?")), ["¿", "Fake", "news", "?"]);
        assert!(tokenize("").is_empty());
        assert!(tokenize(" \t\n ").is_empty());
    }

    #[test]
    fn tokenize_keeps_internal_hyphens_and_apostrophes() {
        assert_eq!(
            texts(&tokenize("El e-commerce y l'Hospitalet (rock'n'roll)")),
            ["El", "e-commerce", "y", "l'Hospitalet", "(", "rock'n'roll", ")"]
        );
        assert_eq!(texts(&tokenize("«Hola»…")), ["«", "Hola", "»", "…"]);
    }

    #[test]
    fn bio_encoding() {
        let eng = Label::Eng;
        assert_eq!(
            spans_to_bio(&[LabeledSpan::new(1, 3, eng)], 4).unwrap(),
            tags("O B-ENG I-ENG O")
        );
        assert_eq!(spans_to_bio(&[], 3).unwrap(), tags("O O O"));
        assert_eq!(
            spans_to_bio(
                &[LabeledSpan::new(0, 1, eng), LabeledSpan::new(1, 3, Label::Other)],
                3
            )
            .unwrap(),
            tags("B-ENG B-OTHER I-OTHER")
        );
    }

    #[test]
    fn bio_encoding_rejects_bad_spans() {
        let err = spans_to_bio(
            &[LabeledSpan::new(0, 2, Label::Eng), LabeledSpan::new(1, 3, Label::Eng)],
            4,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidSpan { span, .. } if span.start == 1));
        assert!(spans_to_bio(&[LabeledSpan::new(2, 5, Label::Eng)], 4).is_err());
        assert!(spans_to_bio(&[LabeledSpan::new(2, 2, Label::Eng)], 4).is_err());
    }

    #[test]
    fn bio_decoding_and_repair() {
        assert_eq!(
            bio_to_spans(&tags("O B-ENG I-ENG O")),
            [LabeledSpan::new(1, 3, Label::Eng)]
        );
        assert_eq!(bio_to_spans(&tags("I-ENG O")), [LabeledSpan::new(0, 1, Label::Eng)]);
        assert_eq!(
            bio_to_spans(&tags("B-ENG I-OTHER")),
            [
                LabeledSpan::new(0, 1, Label::Eng),
                LabeledSpan::new(1, 2, Label::Other)
            ]
        );
        assert_eq!(
            "I-FOO".parse::<Tag>().unwrap_err(),
            Error::UnknownTag("I-FOO".into())
        );
    }

    #[test]
    fn alphabet_views() {
        assert_eq!(TagAlphabet::Full.len(), 5);
        assert_eq!(TagAlphabet::IgnoreOther.len(), 3);
        for alphabet in [TagAlphabet::Full, TagAlphabet::IgnoreOther] {
            assert_eq!(alphabet.tag(0), Tag::Outside);
            assert_eq!(TagAlphabet::from_tags(alphabet.tags()), Some(alphabet));
        }
        assert_eq!(TagAlphabet::IgnoreOther.index_of(Tag::Begin(Label::Other)), None);
    }

    #[test]
    fn token_invariants() {
        assert!(Token::new("").is_err());
        assert!(Token::new("a b").is_err());
        assert!(Token::with_pos("a", "").is_err());
        assert!(Token::with_pos("a", "NOUN").is_ok());
    }

    #[test]
    fn headline_sorts_and_corpus_rejects_duplicates() {
        let h = headline(
            "1",
            "a b c",
            vec![LabeledSpan::new(2, 3, Label::Eng), LabeledSpan::new(0, 1, Label::Other)],
        );
        assert_eq!(h.gold[0].start, 0);
        let err = Corpus::new("c", vec![h.clone(), h]).unwrap_err();
        assert_eq!(err, Error::DuplicateId("1".into()));
        assert!(Headline::new("x", vec![], vec![]).is_err());
    }

    #[test]
    fn stats_counts_and_sections() {
        assert_eq!(corpus_stats(&Corpus::empty("e")), CorpusStats::default());

        let mut a = headline("a", "el big data", vec![LabeledSpan::new(1, 3, Label::Eng)]);
        let mut b = headline("b", "la tele", vec![]);
        let c = headline("c", "un foie", vec![LabeledSpan::new(1, 2, Label::Other)]);
        a.section = Some("TV".into());
        b.section = Some("TV".into());
        let corpus = Corpus::new("t", vec![a, b, c]).unwrap();
        let stats = corpus_stats(&corpus);
        assert_eq!(stats.headlines, 3);
        assert_eq!(stats.tokens, 7);
        assert_eq!(stats.headlines_with_anglicisms, 1);
        assert_eq!(stats.headlines_with_borrowings, 2);
        assert_eq!((stats.eng, stats.other), (1, 1));
        assert_eq!(stats.sections.len(), 1);
        assert_eq!(stats.sections[0].percentage(), 50.0);
    }

    #[test]
    fn restriction_drops_other() {
        let h = headline(
            "1",
            "a b c",
            vec![LabeledSpan::new(0, 1, Label::Eng), LabeledSpan::new(2, 3, Label::Other)],
        );
        let corpus = Corpus::new("c", vec![h]).unwrap();
        let restricted = corpus.restricted_to(TagAlphabet::IgnoreOther);
        assert_eq!(restricted.headlines()[0].gold, [LabeledSpan::new(0, 1, Label::Eng)]);
        assert_eq!(corpus.restricted_to(TagAlphabet::Full), corpus);
    }
}
