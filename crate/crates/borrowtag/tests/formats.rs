mod common;

use borrowtag::corpus_io::{read_corpus, write_corpus};
use borrowtag::embeddings_io::load_embeddings;
use borrowtag::model_io::{load_model, save_model};
use borrowtag::Error;
use borrowtag_core::crf::{tag, train};
use borrowtag_core::{Corpus, FeatureConfig, Headline, Label, LabeledSpan, TagAlphabet, Token, TrainConfig};
use proptest::prelude::*;

const TWO: &str = "# id = a\n# date = 2020-02-03\n# section = tv\nEl\tDET\tO\nbig\tADJ\tB-ENG\ndata\tNOUN\tI-ENG\n\n# id = b\nHola\t_\tO\n";

fn read(text: &str) -> Result<Corpus, Error> {
    read_corpus(text.as_bytes(), "t")
}

fn line_of(e: Error) -> usize {
    match e {
        Error::Parse { line, .. } => line,
        e => panic!("expected a parse error, got {e}"),
    }
}

#[test]
fn reads_two_headlines() {
    let c = read(TWO).unwrap();
    assert_eq!(c.len(), 2);
    let a = &c.headlines()[0];
    assert_eq!(a.gold, vec![LabeledSpan::new(1, 3, Label::Eng)]);
    assert_eq!(a.date.as_deref(), Some("2020-02-03"));
    assert_eq!(a.section.as_deref(), Some("tv"));
    assert_eq!(a.tokens[1].pos.as_deref(), Some("ADJ"));
    assert_eq!(c.headlines()[1].tokens[0].pos, None);
}

#[test]
fn write_then_read_is_identity_on_text() {
    let c = read(TWO).unwrap();
    let mut out = Vec::new();
    write_corpus(&c, &mut out).unwrap();
    assert_eq!(String::from_utf8(out).unwrap(), TWO);
}

#[test]
fn bare_inside_tag_starts_a_span() {
    let c = read("x\t_\tO\ny\t_\tI-ENG\nz\t_\tI-ENG\n").unwrap();
    assert_eq!(c.headlines()[0].gold, vec![LabeledSpan::new(1, 3, Label::Eng)]);
}

#[test]
fn missing_ids_are_numbered() {
    let c = read("a\t_\tO\n\nb\t_\tO\n").unwrap();
    let ids: Vec<&str> = c.headlines().iter().map(|h| h.id.as_str()).collect();
    assert_eq!(ids, ["1", "2"]);
}

#[test]
fn errors_name_the_line() {
    assert_eq!(line_of(read("a\t_\tO\nb\t_\n").unwrap_err()), 2);
    assert_eq!(line_of(read("a\t_\tO\nb\t_\tB-FRA\n").unwrap_err()), 2);
    assert_eq!(line_of(read("# id = x\na\t_\tO\n\n# id = x\nb\t_\tO\n").unwrap_err()), 4);
    assert_eq!(line_of(read("a b\t_\tO\n").unwrap_err()), 1);
    assert_eq!(line_of(read("a\t_\tO\n# id = late\n").unwrap_err()), 2);
    assert!(read("# id = lonely\n").is_err());
}

#[test]
fn crlf_and_trailing_blank_lines() {
    let c = read("a\t_\tB-OTHER\r\n\r\n\r\n").unwrap();
    assert_eq!(c.headlines()[0].gold, vec![LabeledSpan::new(0, 1, Label::Other)]);
}

fn corpus_strategy() -> impl Strategy<Value = Corpus> {
    let token = prop_oneof![Just("el"), Just("big"), Just("data"), Just("«"), Just("#tag"), Just("Ñu")];
    let pos = proptest::option::of(prop_oneof![Just("NOUN"), Just("X")]);
    let headline = (
        proptest::collection::vec((token, pos), 1..8),
        proptest::collection::vec((0usize..8, 1usize..3, any::<bool>()), 0..3),
        proptest::option::of("[a-z]{1,6}"),
        proptest::option::of(Just("2020-02-03")),
    );
    proptest::collection::vec(headline, 0..5).prop_map(|hs| {
        let headlines = hs
            .into_iter()
            .enumerate()
            .map(|(i, (toks, raw_spans, section, date))| {
                let n = toks.len();
                let tokens: Vec<Token> = toks
                    .into_iter()
                    .map(|(t, p)| match p {
                        Some(p) => Token::with_pos(t, p).unwrap(),
                        None => Token::new(t).unwrap(),
                    })
                    .collect();
                let mut spans: Vec<LabeledSpan> = Vec::new();
                for (start, len, eng) in raw_spans {
                    let end = start + len;
                    let label = if eng { Label::Eng } else { Label::Other };
                    if end <= n && spans.iter().all(|s| end <= s.start || start >= s.end) {
                        spans.push(LabeledSpan::new(start, end, label));
                    }
                }
                let mut h = Headline::new(format!("h{i}"), tokens, spans).unwrap();
                h.section = section;
                h.date = date.map(str::to_owned);
                h
            })
            .collect();
        Corpus::new("t", headlines).unwrap()
    })
}

proptest! {
    #[test]
    fn corpus_round_trip(c in corpus_strategy()) {
        let mut out = Vec::new();
        write_corpus(&c, &mut out).unwrap();
        let back = read_corpus(out.as_slice(), "t").unwrap();
        prop_assert_eq!(&back, &c);
        let mut again = Vec::new();
        write_corpus(&back, &mut again).unwrap();
        prop_assert_eq!(again, out);
    }
}

#[test]
fn embeddings_with_header() {
    let t = load_embeddings("2 3\ncasa 0.1 0.2 0.3\nstreaming 1 2 3\n".as_bytes(), "e", None).unwrap();
    assert_eq!((t.dim(), t.len()), (3, 2));
    assert_eq!(t.lookup("Streaming"), &[1.0, 2.0, 3.0]);
    assert_eq!(t.lookup("zzz"), &[0.0, 0.0, 0.0]);
}

#[test]
fn embeddings_without_header_infer_dim() {
    let t = load_embeddings("casa 0.1 0.2\n".as_bytes(), "e", None).unwrap();
    assert_eq!(t.dim(), 2);
}

#[test]
fn embedding_errors() {
    let ragged = load_embeddings("a 1 2 3\nb 1 2\n".as_bytes(), "e", None).unwrap_err();
    assert_eq!(line_of(ragged), 2);
    let nan = load_embeddings("a 1 x\n".as_bytes(), "e", None).unwrap_err();
    assert_eq!(line_of(nan), 1);
    assert!(load_embeddings("a 1 2\n".as_bytes(), "e", Some(3)).is_err());
    assert!(load_embeddings("1 3\n".as_bytes(), "e", Some(2)).is_err());
    assert!(load_embeddings("".as_bytes(), "e", None).is_err());
}

#[test]
fn embedding_duplicates_keep_first() {
    let t = load_embeddings("a 1\na 2\nb 3\n".as_bytes(), "e", None).unwrap();
    assert_eq!(t.lookup("a"), &[1.0]);
    assert_eq!(t.duplicates(), 1);
    assert_eq!(t.len(), 2);
}

fn small_model() -> borrowtag_core::CrfModel {
    let corpus = common::synthetic_corpus("m", 30, 3);
    let config = TrainConfig {
        max_iterations: 30,
        ..TrainConfig::default()
    };
    let features = FeatureConfig {
        families: FeatureConfig::default().families.without(borrowtag_core::Family::Embedding),
        ..FeatureConfig::default()
    };
    train(&corpus, &features, None, TagAlphabet::Full, &config).unwrap().model
}

fn saved(model: &borrowtag_core::CrfModel) -> String {
    let mut out = Vec::new();
    save_model(model, &mut out).unwrap();
    String::from_utf8(out).unwrap()
}

#[test]
fn model_round_trip_is_exact() {
    let model = small_model();
    let text = saved(&model);
    let loaded = load_model(text.as_bytes()).unwrap();
    assert_eq!(loaded, model);
    assert_eq!(saved(&loaded), text);
    let corpus = common::synthetic_corpus("x", 20, 4);
    assert_eq!(tag(&model, &corpus, None).unwrap(), tag(&loaded, &corpus, None).unwrap());
}

#[test]
fn model_file_errors_are_distinct() {
    let text = saved(&small_model());
    let bad_header = text.replacen("borrowtag-crf 1", "borrowtag-crf 9", 1);
    assert!(matches!(load_model(bad_header.as_bytes()), Err(Error::Version(_))));

    let lines: Vec<&str> = text.lines().collect();
    let cut = lines[..lines.len() - 3].join("\n");
    assert!(matches!(load_model(cut.as_bytes()), Err(Error::Truncated(_))));

    let extra = format!("{text}[0]w=zzz\tO\t1e0\n");
    assert!(matches!(load_model(extra.as_bytes()), Err(Error::Dimension(_))));

    let state = lines.iter().position(|l| l.starts_with("state\t")).unwrap();
    let n: usize = lines[state][6..].parse().unwrap();
    let mut wrong = lines.clone();
    let declared = format!("state\t{}", n * 1000);
    wrong[state] = &declared;
    assert!(matches!(load_model(wrong.join("\n").as_bytes()), Err(Error::Dimension(_))));

    let start = lines.iter().position(|l| l.starts_with("start\t")).unwrap();
    let mut short = lines.clone();
    short[start] = "start\t0e0";
    assert!(matches!(load_model(short.join("\n").as_bytes()), Err(Error::Dimension(_))));
}

#[test]
fn negative_zero_survives() {
    let model = small_model();
    let mut weights = model.weights().to_vec();
    weights[0] = -0.0;
    let odd = borrowtag_core::CrfModel::new(
        model.alphabet(),
        model.index().clone(),
        *model.features(),
        *model.train_config(),
        weights,
    )
    .unwrap();
    let loaded = load_model(saved(&odd).as_bytes()).unwrap();
    assert_eq!(loaded.weights()[0].to_bits(), (-0.0f64).to_bits());
}
