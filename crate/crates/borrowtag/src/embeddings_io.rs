//! word2vec text tables: an optional `<count> <dim>` header, then one
//! `word v1 ... vdim` line per entry.

use std::io::BufRead;
use std::path::Path;

use borrowtag_core::EmbeddingTable;

use crate::errors::{Error, Result};

fn is_header(fields: &[&str]) -> bool {
    fields.len() == 2 && fields.iter().all(|f| f.parse::<usize>().is_ok())
}

/// Loads a table. Repeated words keep their first vector; the number of
/// repeats is available from [`EmbeddingTable::duplicates`].
pub fn load_embeddings<R: BufRead>(
    reader: R,
    name: &str,
    expected_dim: Option<usize>,
) -> Result<EmbeddingTable> {
    let mut table: Option<EmbeddingTable> = None;
    let mut declared: Option<usize> = None;
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if i == 0 && is_header(&fields) {
            let dim: usize = fields[1].parse().unwrap_or(0);
            check_dim(dim, expected_dim, lineno)?;
            declared = fields[0].parse().ok();
            table = Some(EmbeddingTable::new(name, dim).map_err(|e| Error::parse(lineno, e.to_string()))?);
            continue;
        }
        let (word, values) = (fields[0], &fields[1..]);
        let table = match &mut table {
            Some(t) => t,
            None => {
                check_dim(values.len(), expected_dim, lineno)?;
                table.insert(EmbeddingTable::new(name, values.len()).map_err(|e| Error::parse(lineno, e.to_string()))?)
            }
        };
        if values.len() != table.dim() {
            return Err(Error::parse(
                lineno,
                format!("{word:?} has {} components, expected {}", values.len(), table.dim()),
            ));
        }
        let vector = values
            .iter()
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::parse(lineno, format!("non-numeric component {v:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        table.insert(word, vector).map_err(|e| Error::parse(lineno, e.to_string()))?;
    }
    let table = table.ok_or_else(|| Error::parse(1, "embedding file has no vectors"))?;
    if table.duplicates() > 0 {
        log::warn!("{}: {} repeated words ignored", name, table.duplicates());
    }
    if let Some(count) = declared {
        let found = table.len() + table.duplicates();
        if count != found {
            log::warn!("{name}: header declares {count} vectors, file has {found}");
        }
    }
    Ok(table)
}

fn check_dim(dim: usize, expected: Option<usize>, line: usize) -> Result<()> {
    match expected {
        Some(e) if e != dim => Err(Error::parse(line, format!("dimension {dim}, expected {e}"))),
        _ => Ok(()),
    }
}

pub fn load_embeddings_file(path: &Path, expected_dim: Option<usize>) -> Result<EmbeddingTable> {
    let file = std::fs::File::open(path).map_err(Error::at(path))?;
    let name = path.to_string_lossy();
    load_embeddings(std::io::BufReader::new(file), &name, expected_dim)
}
