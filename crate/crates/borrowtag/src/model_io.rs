//! Text model files.
//!
//! ```text
//! borrowtag-crf 1
//! labels	O	B-ENG	I-ENG
//! families	bias,token,...
//! window	2
//! scaling	1e0
//! train	c1=5e-2	c2=1e-2	...
//! attributes	K
//! <K attribute names, one per line, in id order>
//! transitions
//! <L lines of L weights>
//! start	<L weights>
//! end	<L weights>
//! state	N
//! <N lines: attribute name, label, weight>
//! ```
//!
//! Only nonzero state weights are listed; `N` is their count. Weights use
//! Rust's shortest round-trip exponent formatting, so loading is bit-exact.

use std::io::{BufRead, Write};
use std::path::Path;

use borrowtag_core::crf::Layout;
use borrowtag_core::features::FamilySet;
use borrowtag_core::{CrfModel, Family, FeatureConfig, FeatureIndex, Tag, TagAlphabet, TrainConfig};

use crate::errors::{Error, Result};

pub const MAGIC: &str = "borrowtag-crf";
pub const VERSION: u32 = 1;

pub fn save_model<W: Write>(model: &CrfModel, mut out: W) -> Result<()> {
    let alphabet = model.alphabet();
    let layout = model.layout();
    let features = model.features();
    let t = model.train_config();
    writeln!(out, "{MAGIC} {VERSION}")?;
    let labels: Vec<&str> = alphabet.tags().iter().map(|t| t.as_str()).collect();
    writeln!(out, "labels\t{}", labels.join("\t"))?;
    let families: Vec<&str> = features.families.iter().map(Family::as_str).collect();
    writeln!(out, "families\t{}", families.join(","))?;
    writeln!(out, "window\t{}", features.window_radius)?;
    writeln!(out, "scaling\t{:e}", features.embedding_scaling)?;
    writeln!(
        out,
        "train\tc1={:e}\tc2={:e}\tdelta={:e}\tperiod={}\tmax_iterations={}\tlbfgs_memory={}\tepsilon={:e}",
        t.c1, t.c2, t.delta, t.period, t.max_iterations, t.lbfgs_memory, t.epsilon
    )?;
    writeln!(out, "attributes\t{}", layout.attributes)?;
    for name in model.index().names() {
        writeln!(out, "{name}")?;
    }
    writeln!(out, "transitions")?;
    for prev in 0..layout.labels {
        let row: Vec<String> = (0..layout.labels)
            .map(|cur| format!("{:e}", model.transition_weight(prev, cur)))
            .collect();
        writeln!(out, "{}", row.join("\t"))?;
    }
    let start: Vec<String> = (0..layout.labels).map(|y| format!("{:e}", model.start_weight(y))).collect();
    writeln!(out, "start\t{}", start.join("\t"))?;
    let end: Vec<String> = (0..layout.labels).map(|y| format!("{:e}", model.end_weight(y))).collect();
    writeln!(out, "end\t{}", end.join("\t"))?;
    let mut state = Vec::new();
    for (a, name) in model.index().names().iter().enumerate() {
        for y in 0..layout.labels {
            let w = model.state_weight(a as u32, y);
            // -0.0 is written too so loading stays bit-exact
            if w.to_bits() != 0 {
                state.push(format!("{name}\t{}\t{w:e}", alphabet.tag(y)));
            }
        }
    }
    writeln!(out, "state\t{}", state.len())?;
    for line in state {
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn next(&mut self, what: &str) -> Result<String> {
        self.line += 1;
        match self.inner.next() {
            Some(line) => Ok(line?),
            None => Err(Error::Truncated(format!("expected {what} at line {}", self.line))),
        }
    }

    /// A `key<TAB>rest` line; returns `rest`.
    fn keyed(&mut self, key: &str) -> Result<String> {
        let line = self.next(key)?;
        match line.split_once('\t') {
            Some((k, rest)) if k == key => Ok(rest.to_owned()),
            _ if line == key => Ok(String::new()),
            _ => Err(self.bad(format!("expected {key:?}"))),
        }
    }

    fn bad(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.line, msg)
    }

    fn float(&self, s: &str) -> Result<f64> {
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| self.bad(format!("bad weight {s:?}")))
    }

    fn floats(&self, s: &str, n: usize) -> Result<Vec<f64>> {
        let values = s.split('\t').filter(|f| !f.is_empty()).map(|f| self.float(f)).collect::<Result<Vec<_>>>()?;
        if values.len() != n {
            return Err(Error::Dimension(format!(
                "line {}: {} weights, expected {n}",
                self.line,
                values.len()
            )));
        }
        Ok(values)
    }

    fn count(&self, s: &str) -> Result<usize> {
        s.trim().parse().map_err(|_| self.bad(format!("bad count {s:?}")))
    }

    fn keyed_count(&mut self, key: &str) -> Result<usize> {
        let rest = self.keyed(key)?;
        self.count(&rest)
    }

    fn keyed_floats(&mut self, key: &str, n: usize) -> Result<Vec<f64>> {
        let rest = self.keyed(key)?;
        self.floats(&rest, n)
    }
}

pub fn load_model<R: BufRead>(reader: R) -> Result<CrfModel> {
    let mut lines = Lines {
        inner: reader.lines(),
        line: 0,
    };
    let header = lines.next("header")?;
    if header != format!("{MAGIC} {VERSION}") {
        return Err(Error::Version(format!("header {header:?}, expected \"{MAGIC} {VERSION}\"")));
    }
    let tags = lines
        .keyed("labels")?
        .split('\t')
        .map(|t| t.parse::<Tag>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| lines.bad(e.to_string()))?;
    let alphabet = TagAlphabet::from_tags(&tags)
        .ok_or_else(|| Error::Dimension(format!("label list {tags:?} is not a known alphabet")))?;
    let families = lines
        .keyed("families")?
        .split(',')
        .filter(|f| !f.is_empty())
        .map(|f| f.parse::<Family>())
        .collect::<Result<FamilySet, _>>()
        .map_err(|e| lines.bad(e.to_string()))?;
    let window_radius = lines.keyed_count("window")?;
    let embedding_scaling = lines.keyed_floats("scaling", 1)?[0];
    let features = FeatureConfig {
        families,
        window_radius,
        embedding_scaling,
    };
    let train = parse_train(&lines.keyed("train")?).map_err(|e| lines.bad(e))?;

    let k = lines.keyed_count("attributes")?;
    let mut names = Vec::with_capacity(k.min(1 << 20));
    for _ in 0..k {
        names.push(lines.next("attribute name")?);
    }
    let index = FeatureIndex::from_names(names).map_err(|e| lines.bad(e.to_string()))?;
    let layout = Layout::new(k, alphabet.len());
    let mut weights = vec![0.0; layout.len()];

    lines.keyed("transitions")?;
    for prev in 0..layout.labels {
        let row = lines.next("transition row")?;
        for (cur, w) in lines.floats(&row, layout.labels)?.into_iter().enumerate() {
            weights[layout.transition(prev, cur)] = w;
        }
    }
    for (y, w) in lines.keyed_floats("start", layout.labels)?.into_iter().enumerate() {
        weights[layout.start(y)] = w;
    }
    for (y, w) in lines.keyed_floats("end", layout.labels)?.into_iter().enumerate() {
        weights[layout.end(y)] = w;
    }

    let declared = lines.keyed_count("state")?;
    if declared > layout.attributes * layout.labels {
        return Err(Error::Dimension(format!(
            "{declared} state weights declared, at most K*L = {} possible",
            layout.attributes * layout.labels
        )));
    }
    let mut seen = std::collections::HashSet::new();
    for _ in 0..declared {
        let line = lines.next("state weight")?;
        let fields: Vec<&str> = line.split('\t').collect();
        let [name, tag, w] = fields[..] else {
            return Err(lines.bad("expected NAME<TAB>LABEL<TAB>WEIGHT"));
        };
        let a = index
            .get(name)
            .ok_or_else(|| Error::Dimension(format!("line {}: unknown attribute {name:?}", lines.line)))?;
        let y = tag
            .parse::<Tag>()
            .ok()
            .and_then(|t| alphabet.index_of(t))
            .ok_or_else(|| Error::Dimension(format!("line {}: label {tag:?} not in model", lines.line)))?;
        let slot = layout.state(a as usize, y);
        if !seen.insert(slot) {
            return Err(lines.bad(format!("repeated weight for {name} {tag}")));
        }
        weights[slot] = lines.float(w)?;
    }
    if let Some(Ok(extra)) = lines.inner.next() {
        if !extra.trim().is_empty() {
            return Err(Error::Dimension(format!(
                "more state weights than the {declared} declared (line {})",
                lines.line + 1
            )));
        }
    }
    Ok(CrfModel::new(alphabet, index, features, train, weights)?)
}

fn parse_train(s: &str) -> std::result::Result<TrainConfig, String> {
    let mut t = TrainConfig::default();
    for field in s.split('\t') {
        let (key, value) = field.split_once('=').ok_or_else(|| format!("bad train field {field:?}"))?;
        let bad = || format!("bad value for {key}: {value:?}");
        match key {
            "c1" => t.c1 = value.parse().map_err(|_| bad())?,
            "c2" => t.c2 = value.parse().map_err(|_| bad())?,
            "delta" => t.delta = value.parse().map_err(|_| bad())?,
            "period" => t.period = value.parse().map_err(|_| bad())?,
            "max_iterations" => t.max_iterations = value.parse().map_err(|_| bad())?,
            "lbfgs_memory" => t.lbfgs_memory = value.parse().map_err(|_| bad())?,
            "epsilon" => t.epsilon = value.parse().map_err(|_| bad())?,
            _ => return Err(format!("unknown train field {key:?}")),
        }
    }
    Ok(t)
}

pub fn save_model_file(model: &CrfModel, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(Error::at(path))?;
    save_model(model, std::io::BufWriter::new(file))
}

pub fn load_model_file(path: &Path) -> Result<CrfModel> {
    let file = std::fs::File::open(path).map_err(Error::at(path))?;
    load_model(std::io::BufReader::new(file))
}
