//! Exact-match span evaluation.
//!
//! A predicted span counts only when its boundaries and label both equal a
//! gold span of the same headline; overlapping but unequal spans score
//! nothing. The BORROWING row ignores the label and matches on boundaries.

use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::corpus::{Corpus, Label, LabeledSpan};
use crate::errors::{Error, Result};

/// Whether OTHER spans take part in the evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EvalMode {
    WithOther,
    /// OTHER spans are removed from gold and predictions before counting.
    WithoutOther,
}

impl EvalMode {
    pub fn keeps(self, label: Label) -> bool {
        self == Self::WithOther || label == Label::Eng
    }
}

/// True/false positive and false negative counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl Counts {
    /// Percentage; 0 when nothing was predicted.
    pub fn precision(&self) -> f64 {
        percent(self.tp, self.tp + self.fp)
    }

    /// Percentage; 0 when there is nothing to find.
    pub fn recall(&self) -> f64 {
        percent(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        f1(self.precision(), self.recall())
    }

    pub fn gold(&self) -> usize {
        self.tp + self.fn_
    }

    pub fn predicted(&self) -> usize {
        self.tp + self.fp
    }

    fn add(&mut self, other: Counts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }
}

fn percent(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

/// Harmonic mean of two percentages; 0 when both are 0.
pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Rounds half away from zero to two decimals.
pub fn round2(x: f64) -> f64 {
    libm::round(x * 100.0) / 100.0
}

/// `x` in hundredths, rounded half away from zero.
pub fn hundredths(x: f64) -> i64 {
    libm::round(x * 100.0) as i64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalReport {
    pub mode: EvalMode,
    pub eng: Counts,
    pub other: Counts,
    /// Label-agnostic boundary match.
    pub borrowing: Counts,
}

impl EvalReport {
    pub fn new(mode: EvalMode) -> Self {
        Self {
            mode,
            eng: Counts::default(),
            other: Counts::default(),
            borrowing: Counts::default(),
        }
    }

    pub fn label(&self, label: Label) -> &Counts {
        match label {
            Label::Eng => &self.eng,
            Label::Other => &self.other,
        }
    }

    fn label_mut(&mut self, label: Label) -> &mut Counts {
        match label {
            Label::Eng => &mut self.eng,
            Label::Other => &mut self.other,
        }
    }
}

/// Size of the intersection of two sorted span lists under `key`.
fn matches<K: Ord>(gold: &[LabeledSpan], pred: &[LabeledSpan], key: impl Fn(&LabeledSpan) -> K) -> usize {
    let (mut i, mut j, mut hits) = (0, 0, 0);
    while i < gold.len() && j < pred.len() {
        match key(&gold[i]).cmp(&key(&pred[j])) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => {
                hits += 1;
                i += 1;
                j += 1;
            }
        }
    }
    hits
}

fn evaluate_one(report: &mut EvalReport, gold: &[LabeledSpan], pred: &[LabeledSpan]) {
    let keep = |spans: &[LabeledSpan]| {
        let mut kept: Vec<LabeledSpan> =
            spans.iter().copied().filter(|s| report.mode.keeps(s.label)).collect();
        kept.sort_by_key(|s| (s.start, s.end));
        kept
    };
    let gold = keep(gold);
    let pred = keep(pred);
    for label in Label::ALL {
        let g: Vec<LabeledSpan> = gold.iter().copied().filter(|s| s.label == label).collect();
        let p: Vec<LabeledSpan> = pred.iter().copied().filter(|s| s.label == label).collect();
        let tp = matches(&g, &p, |s| (s.start, s.end));
        report.label_mut(label).add(Counts {
            tp,
            fp: p.len() - tp,
            fn_: g.len() - tp,
        });
    }
    let tp = matches(&gold, &pred, |s| (s.start, s.end));
    report.borrowing.add(Counts {
        tp,
        fp: pred.len() - tp,
        fn_: gold.len() - tp,
    });
}

/// Evaluates aligned `(gold, predicted)` span lists, one pair per headline.
pub fn evaluate_pairs<'a, I>(pairs: I, mode: EvalMode) -> EvalReport
where
    I: IntoIterator<Item = (&'a [LabeledSpan], &'a [LabeledSpan])>,
{
    let mut report = EvalReport::new(mode);
    for (gold, pred) in pairs {
        evaluate_one(&mut report, gold, pred);
    }
    report
}

/// Evaluates `predicted` against `gold`, pairing headlines by id.
///
/// Gold headlines missing from `predicted` count as having no predictions.
pub fn evaluate(gold: &Corpus, predicted: &Corpus, mode: EvalMode) -> Result<EvalReport> {
    let gold_ids: HashMap<&str, usize> = gold
        .headlines()
        .iter()
        .enumerate()
        .map(|(i, h)| (h.id.as_str(), i))
        .collect();
    let mut by_gold: Vec<&[LabeledSpan]> = alloc::vec![&[]; gold.len()];
    for h in predicted.headlines() {
        let &i = gold_ids
            .get(h.id.as_str())
            .ok_or_else(|| Error::UnknownHeadline(h.id.clone()))?;
        by_gold[i] = &h.gold;
    }
    Ok(evaluate_pairs(
        gold.headlines().iter().map(|h| h.gold.as_slice()).zip(by_gold),
        mode,
    ))
}
