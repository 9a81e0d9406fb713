//! Plain-text and TSV renderings of reports.
//!
//! Percentages are rounded half away from zero to two decimals here and
//! nowhere else. Ablation F1 changes are differences of the rounded values,
//! so every printed change equals the printed F1 minus the printed
//! all-features F1.

use borrowtag_core::corpus::CorpusStats;
use borrowtag_core::eval::{hundredths, Counts};
use borrowtag_core::tune::{AblationTable, GridSpec, RunScore, TuneResult};
use borrowtag_core::{EvalMode, EvalReport, Label};

/// Formats a value given in hundredths, e.g. `-374` as `-3.74`.
pub fn fmt_hundredths(h: i64) -> String {
    let sign = if h < 0 { "-" } else { "" };
    let a = h.unsigned_abs();
    format!("{sign}{}.{:02}", a / 100, a % 100)
}

pub fn pct(x: f64) -> String {
    fmt_hundredths(hundredths(x))
}

/// Column-aligned text: first column left-aligned, the rest right-aligned.
pub fn align(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let mut widths = vec![0; cols];
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.chars().count());
        }
    }
    let mut out = String::new();
    for row in rows {
        let mut line = String::new();
        for (i, cell) in row.iter().enumerate() {
            let pad = widths[i] - cell.chars().count();
            if i == 0 {
                line.push_str(cell);
                line.push_str(&" ".repeat(pad));
            } else {
                line.push_str("  ");
                line.push_str(&" ".repeat(pad));
                line.push_str(cell);
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

pub fn tsv(rows: &[Vec<String>]) -> String {
    rows.iter().map(|r| r.join("\t") + "\n").collect()
}

fn mode_name(mode: EvalMode) -> &'static str {
    match mode {
        EvalMode::WithOther => "+OTHER",
        EvalMode::WithoutOther => "-OTHER",
    }
}

fn eval_rows(set: &str, report: &EvalReport) -> Vec<Vec<String>> {
    let mut rows = vec![["Set", "Mode", "Label", "Precision", "Recall", "F1 score", "TP", "FP", "FN"]
        .map(String::from)
        .to_vec()];
    let mut push = |name: &str, c: &Counts| {
        rows.push(vec![
            set.to_owned(),
            mode_name(report.mode).to_owned(),
            name.to_owned(),
            pct(c.precision()),
            pct(c.recall()),
            pct(c.f1()),
            c.tp.to_string(),
            c.fp.to_string(),
            c.fn_.to_string(),
        ]);
    };
    for label in Label::ALL {
        if report.mode.keeps(label) {
            push(label.as_str(), report.label(label));
        }
    }
    push("BORROWING", &report.borrowing);
    rows
}

pub fn eval_text(set: &str, report: &EvalReport) -> String {
    align(&eval_rows(set, report))
}

pub fn eval_tsv(set: &str, report: &EvalReport) -> String {
    tsv(&eval_rows(set, report))
}

pub fn stats_text(name: &str, stats: &CorpusStats) -> String {
    let mut out = align(&[
        ["Set", "Headlines", "Tokens", "With ENG", "With borrowing", "ENG", "OTHER"]
            .map(String::from)
            .to_vec(),
        vec![
            name.to_owned(),
            stats.headlines.to_string(),
            stats.tokens.to_string(),
            stats.headlines_with_anglicisms.to_string(),
            stats.headlines_with_borrowings.to_string(),
            stats.eng.to_string(),
            stats.other.to_string(),
        ],
    ]);
    if !stats.sections.is_empty() {
        let mut rows = vec![["Section", "Headlines", "With ENG", "%"].map(String::from).to_vec()];
        for s in &stats.sections {
            rows.push(vec![
                s.section.clone(),
                s.headlines.to_string(),
                s.with_anglicisms.to_string(),
                pct(s.percentage()),
            ]);
        }
        out.push('\n');
        out.push_str(&align(&rows));
    }
    out
}

fn score_cells(score: &Result<RunScore, borrowtag_core::Error>) -> [String; 6] {
    match score {
        Ok(s) => [
            pct(s.report.eng.precision()),
            pct(s.report.eng.recall()),
            pct(s.f1()),
            s.iterations.to_string(),
            format!("{:?}", s.termination).to_lowercase(),
            "ok".into(),
        ],
        Err(e) => [
            "-".into(),
            "-".into(),
            "-".into(),
            "-".into(),
            "-".into(),
            format!("failed: {e}"),
        ],
    }
}

fn tune_rows(spec: &GridSpec, result: &TuneResult) -> Vec<Vec<String>> {
    let mut rows = vec![[
        "Rank", "c1", "c2", "Scaling", "Embedding", "Precision", "Recall", "F1 score", "Iterations",
        "Stop", "Status",
    ]
    .map(String::from)
    .to_vec()];
    for (rank, outcome) in result.ranked().enumerate() {
        let p = outcome.point;
        let mut row = vec![
            (rank + 1).to_string(),
            p.c1.to_string(),
            p.c2.to_string(),
            p.scaling.to_string(),
            spec.embeddings[p.embedding].clone(),
        ];
        row.extend(score_cells(&outcome.score));
        rows.push(row);
    }
    rows
}

pub fn tune_tsv(spec: &GridSpec, result: &TuneResult) -> String {
    tsv(&tune_rows(spec, result))
}

pub fn tune_text(spec: &GridSpec, result: &TuneResult) -> String {
    align(&tune_rows(spec, result))
}

fn ablation_rows(table: &AblationTable) -> Vec<Vec<String>> {
    let mut rows = vec![["Features", "Precision", "Recall", "F1 score", "F1 change"]
        .map(String::from)
        .to_vec()];
    let base = table.baseline_f1().map(hundredths);
    for row in &table.rows {
        let name = match row.removed {
            None => "All features".to_owned(),
            Some(f) => format!("- {f}"),
        };
        let cells = match &row.score {
            Ok(s) => {
                let f1 = hundredths(s.f1());
                let change = match (row.removed, base) {
                    (None, _) | (_, None) => String::new(),
                    (Some(_), Some(b)) => fmt_hundredths(f1 - b),
                };
                vec![pct(s.report.eng.precision()), pct(s.report.eng.recall()), fmt_hundredths(f1), change]
            }
            Err(e) => vec!["-".into(), "-".into(), "-".into(), format!("failed: {e}")],
        };
        let mut r = vec![name];
        r.extend(cells);
        rows.push(r);
    }
    rows
}

pub fn ablation_tsv(table: &AblationTable) -> String {
    tsv(&ablation_rows(table))
}

pub fn ablation_text(table: &AblationTable) -> String {
    align(&ablation_rows(table))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hundredths_formatting() {
        assert_eq!(fmt_hundredths(8960), "89.60");
        assert_eq!(fmt_hundredths(-374), "-3.74");
        assert_eq!(fmt_hundredths(-5), "-0.05");
        assert_eq!(fmt_hundredths(0), "0.00");
        assert_eq!(pct(44.444), "44.44");
        assert_eq!(pct(100.0), "100.00");
    }

    #[test]
    fn aligned_columns() {
        let rows = vec![
            vec!["a".to_owned(), "1".to_owned()],
            vec!["long".to_owned(), "100".to_owned()],
        ];
        assert_eq!(align(&rows), "a       1\nlong  100\n");
    }
}
