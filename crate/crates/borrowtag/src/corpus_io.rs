//! CoNLL-style corpus files.
//!
//! ```text
//! # id = 2020-02-03-1
//! # date = 2020-02-03
//! # section = tecnologia
//! El	DET	O
//! big	ADJ	B-ENG
//! data	NOUN	I-ENG
//! ```
//!
//! A blank line ends a headline. `_` in the POS column means no tag.
//! Headlines without an `id` comment are numbered by position, starting at 1.

use std::io::{BufRead, Write};

use borrowtag_core::corpus::{bio_to_spans, spans_to_bio};
use borrowtag_core::{Corpus, Headline, Tag, Token};

use crate::errors::{Error, Result};

#[derive(Default)]
struct Pending {
    id: Option<String>,
    date: Option<String>,
    section: Option<String>,
    tokens: Vec<Token>,
    tags: Vec<Tag>,
    first_line: usize,
}

impl Pending {
    fn is_empty(&self) -> bool {
        self.tokens.is_empty()
            && self.id.is_none()
            && self.date.is_none()
            && self.section.is_none()
    }

    fn finish(self, seq: usize) -> Result<Headline> {
        let line = self.first_line;
        let id = self.id.unwrap_or_else(|| seq.to_string());
        if self.tokens.is_empty() {
            return Err(Error::parse(line, format!("headline {id:?} has no tokens")));
        }
        let gold = bio_to_spans(&self.tags);
        let mut headline = Headline::new(id, self.tokens, gold).map_err(|e| Error::parse(line, e.to_string()))?;
        headline.date = self.date;
        headline.section = self.section;
        Ok(headline)
    }
}

/// Reads a corpus. Errors carry 1-based line numbers.
pub fn read_corpus<R: BufRead>(reader: R, name: &str) -> Result<Corpus> {
    let mut headlines = Vec::new();
    let mut pending = Pending::default();
    let mut ids = std::collections::HashSet::new();
    let mut flush = |pending: Pending, headlines: &mut Vec<Headline>| -> Result<()> {
        let line = pending.first_line;
        let headline = pending.finish(headlines.len() + 1)?;
        if !ids.insert(headline.id.clone()) {
            return Err(Error::parse(line, format!("duplicate headline id {:?}", headline.id)));
        }
        headlines.push(headline);
        Ok(())
    };
    let mut last = 0;
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        last = lineno;
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            if !pending.is_empty() {
                flush(std::mem::take(&mut pending), &mut headlines)?;
            }
            continue;
        }
        if pending.is_empty() {
            pending.first_line = lineno;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if !line.contains('\t') {
                if !pending.tokens.is_empty() {
                    return Err(Error::parse(lineno, "comment inside a headline"));
                }
                read_comment(comment, lineno, &mut pending)?;
                continue;
            }
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                lineno,
                format!("expected TOKEN<TAB>POS<TAB>TAG, found {} fields", fields.len()),
            ));
        }
        let token = match fields[1] {
            "_" => Token::new(fields[0]),
            pos => Token::with_pos(fields[0], pos),
        }
        .map_err(|e| Error::parse(lineno, e.to_string()))?;
        let tag: Tag = fields[2].parse().map_err(|e: borrowtag_core::Error| Error::parse(lineno, e.to_string()))?;
        pending.tokens.push(token);
        pending.tags.push(tag);
    }
    if !pending.is_empty() {
        if pending.tokens.is_empty() {
            return Err(Error::parse(last, "metadata without tokens at end of file"));
        }
        flush(pending, &mut headlines)?;
    }
    Ok(Corpus::new(name, headlines)?)
}

fn read_comment(comment: &str, lineno: usize, pending: &mut Pending) -> Result<()> {
    let Some((key, value)) = comment.split_once('=') else {
        return Ok(());
    };
    let value = value.trim();
    let slot = match key.trim() {
        "id" => &mut pending.id,
        "date" => &mut pending.date,
        "section" => &mut pending.section,
        _ => return Ok(()),
    };
    if value.is_empty() {
        return Err(Error::parse(lineno, format!("empty value for {:?}", key.trim())));
    }
    *slot = Some(value.to_owned());
    Ok(())
}

/// Writes a corpus with its gold spans as BIO tags.
pub fn write_corpus<W: Write>(corpus: &Corpus, mut out: W) -> Result<()> {
    for (i, h) in corpus.headlines().iter().enumerate() {
        if i > 0 {
            writeln!(out)?;
        }
        writeln!(out, "# id = {}", h.id)?;
        if let Some(date) = &h.date {
            writeln!(out, "# date = {date}")?;
        }
        if let Some(section) = &h.section {
            writeln!(out, "# section = {section}")?;
        }
        let tags = spans_to_bio(&h.gold, h.tokens.len())?;
        for (token, tag) in h.tokens.iter().zip(tags) {
            let pos = token.pos.as_deref().unwrap_or("_");
            writeln!(out, "{}\t{pos}\t{tag}", token.text)?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_corpus_file(path: &std::path::Path) -> Result<Corpus> {
    let file = std::fs::File::open(path).map_err(Error::at(path))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_corpus(std::io::BufReader::new(file), &name).map_err(|e| match e {
        Error::Parse { line, msg } => Error::Parse {
            line,
            msg: format!("{}: {msg}", path.display()),
        },
        e => e,
    })
}

pub fn write_corpus_file(corpus: &Corpus, path: &std::path::Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(Error::at(path))?;
    write_corpus(corpus, std::io::BufWriter::new(file))
}
