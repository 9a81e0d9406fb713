#![allow(dead_code)]

use borrowtag_core::{Corpus, EmbeddingTable, Headline, Label, LabeledSpan, Token};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every ENG token ends with this, every OTHER token with [`OTHER_MARK`],
/// and no other token does.
pub const ENG_MARK: &str = "zzq";
pub const OTHER_MARK: &str = "kxo";

const FILLERS: &[(&str, &str)] = &[
    ("el", "DET"),
    ("la", "DET"),
    ("los", "DET"),
    ("las", "DET"),
    ("un", "DET"),
    ("una", "DET"),
    ("gobierno", "NOUN"),
    ("ciudad", "NOUN"),
    ("mercado", "NOUN"),
    ("empresa", "NOUN"),
    ("precio", "NOUN"),
    ("vivienda", "NOUN"),
    ("semana", "NOUN"),
    ("calle", "NOUN"),
    ("música", "NOUN"),
    ("serie", "NOUN"),
    ("sube", "VERB"),
    ("llega", "VERB"),
    ("apuesta", "VERB"),
    ("gana", "VERB"),
    ("busca", "VERB"),
    ("cierra", "VERB"),
    ("en", "ADP"),
    ("de", "ADP"),
    ("con", "ADP"),
    ("para", "ADP"),
    ("por", "ADP"),
    ("nuevo", "ADJ"),
    ("gran", "ADJ"),
    ("último", "ADJ"),
    ("y", "CCONJ"),
    ("Madrid", "PROPN"),
    ("España", "PROPN"),
    ("2020", "NUM"),
];

const ENG_STEMS: &[&str] = &[
    "boom", "stream", "data", "start", "run", "fake", "news", "tour", "spin", "brand", "coach",
    "hype", "show", "look", "trend", "fitness", "gamer", "blog", "selfie", "hacker",
];

const OTHER_STEMS: &[&str] = &["umami", "manga", "sushi", "kitsch", "tofu", "ramen"];

const SECTIONS: &[&str] = &["economia", "tecnologia", "cultura", "deportes"];

fn word(stem: &str, mark: &str, rng: &mut ChaCha8Rng) -> String {
    if rng.random_bool(0.15) {
        format!("{}{mark}", stem.to_uppercase())
    } else {
        format!("{stem}{mark}")
    }
}

/// A corpus where ENG and OTHER spans are recognisable from a sentinel
/// suffix. Spans are never adjacent, so boundaries are recoverable too.
pub fn synthetic_corpus(name: &str, headlines: usize, seed: u64) -> Corpus {
    noisy_corpus(name, headlines, seed, 0.0)
}

/// Like [`synthetic_corpus`], but a share `plain` of ENG tokens appear as the
/// bare stem, without the sentinel, so the task is no longer trivial.
pub fn noisy_corpus(name: &str, headlines: usize, seed: u64, plain: f64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(headlines);
    for i in 0..headlines {
        let len = rng.random_range(4..10usize);
        let mut tokens: Vec<Token> = Vec::new();
        let mut gold = Vec::new();
        let mut last_was_span = true;
        while tokens.len() < len {
            let roll: f64 = rng.random_range(0.0..1.0);
            if !last_was_span && roll < 0.18 {
                let quoted = rng.random_bool(0.2);
                if quoted {
                    tokens.push(Token::with_pos("«", "PUNCT").unwrap());
                }
                let span_len = if rng.random_bool(0.3) { 2 } else { 1 };
                let start = tokens.len();
                for _ in 0..span_len {
                    let stem = ENG_STEMS[rng.random_range(0..ENG_STEMS.len())];
                    let mark = if rng.random_bool(plain) { "" } else { ENG_MARK };
                    tokens.push(Token::with_pos(word(stem, mark, &mut rng), "NOUN").unwrap());
                }
                gold.push(LabeledSpan::new(start, tokens.len(), Label::Eng));
                if quoted {
                    tokens.push(Token::with_pos("»", "PUNCT").unwrap());
                }
                last_was_span = true;
            } else if !last_was_span && roll < 0.22 {
                let stem = OTHER_STEMS[rng.random_range(0..OTHER_STEMS.len())];
                let start = tokens.len();
                tokens.push(Token::with_pos(word(stem, OTHER_MARK, &mut rng), "NOUN").unwrap());
                gold.push(LabeledSpan::new(start, start + 1, Label::Other));
                last_was_span = true;
            } else if plain > 0.0 && rng.random_bool(plain / 2.0) {
                // the same bare stems also occur unannotated
                let stem = ENG_STEMS[rng.random_range(0..ENG_STEMS.len())];
                tokens.push(Token::with_pos(stem, "NOUN").unwrap());
                last_was_span = false;
            } else {
                let (w, pos) = FILLERS[rng.random_range(0..FILLERS.len())];
                let w = if tokens.is_empty() {
                    let mut c = w.chars();
                    c.next().map(|f| f.to_uppercase().chain(c).collect()).unwrap_or_default()
                } else {
                    w.to_owned()
                };
                tokens.push(Token::with_pos(w, pos).unwrap());
                last_was_span = false;
            }
        }
        let mut h = Headline::new(format!("{name}-{i}"), tokens, gold).unwrap();
        h.section = Some(SECTIONS[i % SECTIONS.len()].to_owned());
        h.date = Some(format!("2020-02-{:02}", 1 + i % 28));
        out.push(h);
    }
    Corpus::new(name, out).unwrap()
}

/// Deterministic 4-dimensional vectors for the synthetic vocabulary.
pub fn synthetic_embeddings() -> EmbeddingTable {
    let mut table = EmbeddingTable::new("synthetic", 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (w, _) in FILLERS {
        let v = (0..4).map(|_| rng.random_range(-0.5..0.0)).collect();
        table.insert(w.to_lowercase(), v).unwrap();
    }
    for stem in ENG_STEMS.iter().chain(OTHER_STEMS) {
        let mark = if ENG_STEMS.contains(stem) { ENG_MARK } else { OTHER_MARK };
        let v: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..0.5)).collect();
        table.insert(format!("{stem}{mark}"), v.clone()).unwrap();
        table.insert(*stem, v).unwrap();
    }
    table
}

/// The table in word2vec text layout.
pub fn embeddings_text(table: &EmbeddingTable, words: &[String]) -> String {
    let mut s = format!("{} {}\n", words.len(), table.dim());
    for w in words {
        let v: Vec<String> = table.lookup(w).iter().map(|x| format!("{x:e}")).collect();
        s.push_str(&format!("{w} {}\n", v.join(" ")));
    }
    s
}

pub fn vocabulary() -> Vec<String> {
    let mut words: Vec<String> = FILLERS.iter().map(|(w, _)| w.to_lowercase()).collect();
    for stem in ENG_STEMS {
        words.push(format!("{stem}{ENG_MARK}"));
    }
    for stem in OTHER_STEMS {
        words.push(format!("{stem}{OTHER_MARK}"));
    }
    words
}

pub fn write_corpus_to(corpus: &Corpus, path: &std::path::Path) {
    borrowtag::corpus_io::write_corpus_file(corpus, path).unwrap();
}
