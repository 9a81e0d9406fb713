//! Offline RSS 2.0 ingestion into unannotated corpora.

use std::collections::{HashMap, HashSet};

use borrowtag_core::corpus::tokenize;
use borrowtag_core::{Corpus, Headline};

use crate::errors::{Error, Result};

/// One feed entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeedItem {
    /// Entity-decoded, whitespace-normalized.
    pub title: String,
    /// `YYYY-MM-DD` in the feed's own offset.
    pub pub_date: Option<String>,
    pub link: Option<String>,
    /// First path segment of `link`.
    pub section: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Feed {
    pub items: Vec<FeedItem>,
    /// Items without a usable title.
    pub skipped: usize,
}

fn normalize(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn child_text(node: roxmltree::Node<'_, '_>, name: &str) -> Option<String> {
    let child = node.children().find(|c| c.has_tag_name(name))?;
    let text: String = child.descendants().filter(|d| d.is_text()).filter_map(|d| d.text()).collect();
    let text = normalize(&text);
    (!text.is_empty()).then_some(text)
}

/// `Mon, 03 Feb 2020 08:00:00 +0100` to `2020-02-03`.
pub fn parse_pub_date(raw: &str) -> Option<String> {
    chrono::DateTime::parse_from_rfc2822(raw.trim())
        .ok()
        .map(|d| d.date_naive().format("%Y-%m-%d").to_string())
}

pub fn section_of(link: &str) -> Option<String> {
    let url = url::Url::parse(link).ok()?;
    let first = url.path_segments()?.next()?;
    (!first.is_empty()).then(|| first.to_owned())
}

pub fn parse_rss(xml: &str) -> Result<Feed> {
    let doc = roxmltree::Document::parse(xml).map_err(|e| Error::Feed(e.to_string()))?;
    let root = doc.root_element();
    if !root.has_tag_name("rss") {
        return Err(Error::Feed(format!("root element is <{}>, not <rss>", root.tag_name().name())));
    }
    let channel = root
        .children()
        .find(|c| c.has_tag_name("channel"))
        .ok_or_else(|| Error::Feed("missing <channel>".into()))?;
    let mut feed = Feed::default();
    for item in channel.children().filter(|c| c.has_tag_name("item")) {
        let Some(title) = child_text(item, "title") else {
            feed.skipped += 1;
            continue;
        };
        let pub_date = child_text(item, "pubDate").and_then(|raw| {
            let date = parse_pub_date(&raw);
            if date.is_none() {
                log::warn!("unparseable pubDate {raw:?}");
            }
            date
        });
        let link = child_text(item, "link");
        let section = link.as_deref().and_then(section_of);
        feed.items.push(FeedItem {
            title,
            pub_date,
            link,
            section,
        });
    }
    Ok(feed)
}

/// Result of turning feed items into headlines.
#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub corpus: Corpus,
    /// Items dropped as repeats of an earlier item.
    pub duplicates: usize,
    /// Ids that were already taken, so their items were not added.
    pub existing: Vec<String>,
}

/// Deduplicates by (lowercased normalized title, date), tokenizes, and
/// numbers headlines `<date>-<n>` per date in input order. Items whose id
/// is in `existing_ids` are skipped, which makes re-ingesting a feed a no-op.
pub fn items_to_corpus(name: &str, items: &[FeedItem], existing_ids: &HashSet<String>) -> Result<Ingested> {
    let mut seen = HashSet::new();
    let mut per_date: HashMap<&str, usize> = HashMap::new();
    let mut headlines = Vec::new();
    let mut duplicates = 0;
    let mut existing = Vec::new();
    for item in items {
        let title = normalize(&item.title);
        let key = (title.to_lowercase(), item.pub_date.clone());
        if !seen.insert(key) {
            duplicates += 1;
            continue;
        }
        let tokens = tokenize(&title);
        if tokens.is_empty() {
            continue;
        }
        let date = item.pub_date.as_deref().unwrap_or("undated");
        let seq = per_date.entry(date).or_insert(0);
        *seq += 1;
        let id = format!("{date}-{seq}");
        if existing_ids.contains(&id) {
            existing.push(id);
            continue;
        }
        let mut headline = Headline::new(id, tokens, Vec::new())?;
        headline.date = item.pub_date.clone();
        headline.section = item.section.clone();
        headlines.push(headline);
    }
    Ok(Ingested {
        corpus: Corpus::new(name, headlines)?,
        duplicates,
        existing,
    })
}
