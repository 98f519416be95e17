//! CSV ingestion and serialization for comparison and covariate files.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::data::{ComparisonData, Edge};
use crate::error::{CareError, Result};

/// Formats a float with 17 significant digits so it re-parses exactly.
pub fn format_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| CareError::Io(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(|e| CareError::Io(format!("{}: {e}", path.display())))
}

/// Comparison data together with the external item ids.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedComparisons {
    pub data: ComparisonData,
    /// `items[k]` is the id of dense index `k`.
    pub items: Vec<String>,
    /// Rows marked `tie` that were dropped.
    pub ties_dropped: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Schema {
    Aggregated,
    PerTrial,
}

fn parse_error(line: u64, message: impl Into<String>) -> CareError {
    CareError::Parse { line: line as usize, message: message.into() }
}

fn csv_error(err: csv::Error) -> CareError {
    let line = err.position().map(|p| p.line()).unwrap_or(0);
    match err.kind() {
        csv::ErrorKind::Io(_) => CareError::Io(err.to_string()),
        _ => parse_error(line, err.to_string()),
    }
}

struct ItemIndex {
    ids: Vec<String>,
    lookup: HashMap<String, usize>,
}

impl ItemIndex {
    fn seeded(items: &[String]) -> Result<Self> {
        let mut index = Self { ids: Vec::new(), lookup: HashMap::new() };
        for id in items {
            if index.lookup.contains_key(id) {
                return Err(CareError::InvalidArgument(format!("duplicate item id {id:?}")));
            }
            index.get_or_insert(id);
        }
        Ok(index)
    }

    fn get_or_insert(&mut self, id: &str) -> usize {
        if let Some(&k) = self.lookup.get(id) {
            return k;
        }
        self.ids.push(id.to_string());
        self.lookup.insert(id.to_string(), self.ids.len() - 1);
        self.ids.len() - 1
    }
}

fn parse_count(field: &str, name: &str, line: u64) -> Result<u64> {
    field
        .trim()
        .parse::<u64>()
        .map_err(|_| parse_error(line, format!("column {name}: {field:?} is not a non-negative integer")))
}

/// Parses a comparison file. Item indices follow order of first appearance.
pub fn parse_comparisons_csv(path: &Path) -> Result<ParsedComparisons> {
    let file = fs::File::open(path).map_err(|e| CareError::Io(format!("{}: {e}", path.display())))?;
    parse_comparisons(file, &[])
}

/// Parses comparisons from any reader.
///
/// Ids in `known_items` receive indices `0..known_items.len()` in order; ids
/// not listed are appended by first appearance. Accepts the aggregated header
/// `item_i,item_j,trials,wins_j` or the per-trial header
/// `item_i,item_j,winner`, where `winner` is one of the two ids or `tie`.
pub fn parse_comparisons<R: Read>(reader: R, known_items: &[String]) -> Result<ParsedComparisons> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(reader);
    let headers: Vec<String> = rdr.headers().map_err(csv_error)?.iter().map(str::to_string).collect();
    let schema = match headers.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["item_i", "item_j", "trials", "wins_j"] => Schema::Aggregated,
        ["item_i", "item_j", "winner"] => Schema::PerTrial,
        _ => {
            return Err(parse_error(
                1,
                format!(
                    "expected header item_i,item_j,trials,wins_j or item_i,item_j,winner, got {}",
                    headers.join(",")
                ),
            ))
        }
    };

    let mut index = ItemIndex::seeded(known_items)?;
    // (i, j) with i < j -> (trials, wins_j)
    let mut totals: BTreeMap<(usize, usize), (u64, u64)> = BTreeMap::new();
    let mut ties_dropped = 0;

    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let a = &record[0];
        let b = &record[1];
        if a.is_empty() || b.is_empty() {
            return Err(parse_error(line, "empty item id"));
        }
        if a == b {
            return Err(parse_error(line, format!("self-comparison of item {a:?}")));
        }
        let (trials, wins_b) = match schema {
            Schema::Aggregated => {
                let trials = parse_count(&record[2], "trials", line)?;
                let wins = parse_count(&record[3], "wins_j", line)?;
                if trials == 0 {
                    return Err(parse_error(line, "trials must be positive"));
                }
                if wins > trials {
                    return Err(parse_error(line, format!("wins_j = {wins} exceeds trials = {trials}")));
                }
                (trials, wins)
            }
            Schema::PerTrial => {
                let winner = &record[2];
                if winner.eq_ignore_ascii_case("tie") {
                    ties_dropped += 1;
                    continue;
                } else if winner == b {
                    (1, 1)
                } else if winner == a {
                    (1, 0)
                } else {
                    return Err(parse_error(
                        line,
                        format!("winner {winner:?} is neither {a:?} nor {b:?}"),
                    ));
                }
            }
        };
        let ia = index.get_or_insert(a);
        let ib = index.get_or_insert(b);
        let (key, wins_j) = if ia < ib { ((ia, ib), wins_b) } else { ((ib, ia), trials - wins_b) };
        let entry = totals.entry(key).or_insert((0, 0));
        entry.0 = entry
            .0
            .checked_add(trials)
            .ok_or_else(|| parse_error(line, "trial count overflow"))?;
        entry.1 += wins_j;
    }

    let edges = totals
        .into_iter()
        .map(|((i, j), (trials, wins_j))| Edge { i, j, trials, wins_j })
        .collect();
    let data = ComparisonData::new(index.ids.len(), edges)?;
    Ok(ParsedComparisons { data, items: index.ids, ties_dropped })
}

/// Serializes comparisons in the aggregated schema.
pub fn comparisons_to_csv(data: &ComparisonData, items: &[String]) -> Result<String> {
    if items.len() != data.n_items() {
        return Err(CareError::DimensionMismatch {
            context: "item ids",
            expected: data.n_items(),
            actual: items.len(),
        });
    }
    let mut out = String::from("item_i,item_j,trials,wins_j\n");
    for e in data.edges() {
        out.push_str(&format!("{},{},{},{}\n", items[e.i], items[e.j], e.trials, e.wins_j));
    }
    Ok(out)
}

pub fn write_comparisons_csv(path: &Path, data: &ComparisonData, items: &[String]) -> Result<()> {
    write_atomic(path, comparisons_to_csv(data, items)?.as_bytes())
}

/// Covariates aligned to a comparison file's item order.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariateTable {
    pub feature_names: Vec<String>,
    /// `n x d`, row `k` belongs to `items[k]`.
    pub matrix: DMatrix<f64>,
}

pub fn parse_covariates_csv(path: &Path, items: &[String]) -> Result<CovariateTable> {
    let file = fs::File::open(path).map_err(|e| CareError::Io(format!("{}: {e}", path.display())))?;
    parse_covariates(file, items)
}

/// Parses a covariate file with header `item,f1,...,fd` and orders its rows
/// by `items`. Every item must appear exactly once and no other ids may occur.
pub fn parse_covariates<R: Read>(reader: R, items: &[String]) -> Result<CovariateTable> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(reader);
    let headers: Vec<String> = rdr.headers().map_err(csv_error)?.iter().map(str::to_string).collect();
    if headers.first().map(String::as_str) != Some("item") {
        return Err(parse_error(1, "covariate header must start with `item`"));
    }
    let feature_names = headers[1..].to_vec();
    let d = feature_names.len();
    let position: HashMap<&str, usize> = items.iter().enumerate().map(|(k, id)| (id.as_str(), k)).collect();

    let mut matrix = DMatrix::zeros(items.len(), d);
    let mut seen: Vec<Option<u64>> = vec![None; items.len()];
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let id = &record[0];
        let row = *position
            .get(id)
            .ok_or_else(|| parse_error(line, format!("item {id:?} does not occur in the comparisons")))?;
        if let Some(first) = seen[row] {
            return Err(parse_error(line, format!("item {id:?} already given on line {first}")));
        }
        seen[row] = Some(line);
        for (c, name) in feature_names.iter().enumerate() {
            let cell = &record[c + 1];
            let value: f64 = cell
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| parse_error(line, format!("column {name}: {cell:?} is not a finite number")))?;
            matrix[(row, c)] = value;
        }
    }
    if let Some(k) = seen.iter().position(Option::is_none) {
        return Err(CareError::Parse {
            line: 0,
            message: format!("item {:?} has no covariate row", items[k]),
        });
    }
    Ok(CovariateTable { feature_names, matrix })
}

pub fn covariates_to_csv(matrix: &DMatrix<f64>, items: &[String], feature_names: &[String]) -> Result<String> {
    if matrix.nrows() != items.len() || matrix.ncols() != feature_names.len() {
        return Err(CareError::DimensionMismatch {
            context: "covariate table",
            expected: items.len() * feature_names.len(),
            actual: matrix.nrows() * matrix.ncols(),
        });
    }
    let mut out = String::from("item");
    for name in feature_names {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (k, id) in items.iter().enumerate() {
        out.push_str(id);
        for c in 0..matrix.ncols() {
            out.push(',');
            out.push_str(&format_f64(matrix[(k, c)]));
        }
        out.push('\n');
    }
    Ok(out)
}
